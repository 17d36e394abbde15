use crate::dataset::{ClassModel, Column, CostMatrix, Dataset};

pub(crate) enum TCol {
    N(Vec<f64>),
    C(Vec<Option<u32>>, usize),
}

pub(crate) fn dataset(cols: Vec<TCol>, y: Vec<usize>, j: usize) -> Dataset {
    let predictors = cols
        .into_iter()
        .enumerate()
        .map(|(i, c)| match c {
            TCol::N(v) => (format!("x{}", i + 1), Column::Numeric(v), vec![]),
            TCol::C(v, nlev) => (
                format!("x{}", i + 1),
                Column::Categorical(v),
                (0..nlev).map(|l| format!("l{l}")).collect(),
            ),
        })
        .collect();
    Dataset::from_columns("y", (1..=j).map(|c| c.to_string()).collect(), predictors, y).unwrap()
}

pub(crate) fn unit_model(data: &Dataset) -> ClassModel {
    ClassModel::new(data.class_counts(), None, CostMatrix::unit(data.n_classes()))
}
