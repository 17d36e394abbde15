//! Tabular data: schema, column storage with missing values, priors,
//! misclassification costs and per-node class statistics.
//!
//! Class labels are stored as zero-based indices `0..J`; the external
//! labels are kept in [`Header::class_labels`] in sorted order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Class,
    Numeric,
    Categorical,
    Excluded,
}

impl Role {
    fn from_code(code: &str) -> Option<Role> {
        match code.to_ascii_lowercase().as_str() {
            "d" => Some(Role::Class),
            "n" => Some(Role::Numeric),
            "c" => Some(Role::Categorical),
            "x" => Some(Role::Excluded),
            _ => None,
        }
    }

    fn code(self) -> char {
        match self {
            Role::Class => 'd',
            Role::Numeric => 'n',
            Role::Categorical => 'c',
            Role::Excluded => 'x',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
}

/// Column roles, one `name role` pair per line.
///
/// Roles are `d` (class), `n` (numeric), `c` (categorical) and `x`
/// (excluded). Lines may carry a leading column number (`3 age n`), blank
/// lines and `#` comments are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Schema> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn parse(text: &str) -> Result<Schema> {
        let mut columns = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let (name, role) = match tokens.as_slice() {
                [name, role] => (*name, *role),
                [idx, name, role] if idx.parse::<usize>().is_ok() => (*name, *role),
                _ => {
                    return Err(Error::Schema(format!(
                        "line {}: expected `name role`",
                        lineno + 1
                    )))
                }
            };
            let role = Role::from_code(role).ok_or_else(|| {
                Error::Schema(format!("line {}: unknown role `{role}`", lineno + 1))
            })?;
            columns.push(ColumnSpec {
                name: name.to_string(),
                role,
            });
        }
        Schema::new(columns)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Schema> {
        Schema::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            let _ = writeln!(out, "{} {}", c.name, c.role.code());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n_class = self
            .columns
            .iter()
            .filter(|c| c.role == Role::Class)
            .count();
        if n_class != 1 {
            return Err(Error::Schema(format!(
                "exactly one class column required, found {n_class}"
            )));
        }
        if !self
            .columns
            .iter()
            .any(|c| matches!(c.role, Role::Numeric | Role::Categorical))
        {
            return Err(Error::NoPredictors);
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(())
    }

    pub fn class_column(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.role == Role::Class)
            .expect("validated schema has a class column")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictorKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorInfo {
    pub name: String,
    pub kind: PredictorKind,
    /// Level dictionary in first-appearance order (categorical only).
    pub levels: Vec<String>,
}

/// Everything needed to interpret rows: schema echo, class labels and
/// level dictionaries. Fitted models carry a copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: Schema,
    pub class_name: String,
    pub class_labels: Vec<String>,
    pub predictors: Vec<PredictorInfo>,
}

/// Code stored for a categorical value not present in the level dictionary.
pub const UNSEEN_LEVEL: u32 = u32::MAX;

/// One predictor value. Numeric missing is `NaN`; categorical missing is
/// `None`; a categorical code `>= levels.len()` is an unseen level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(Option<u32>),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        match self {
            Cell::Num(v) => v.is_nan(),
            Cell::Cat(c) => c.is_none(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<Option<u32>>),
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// Case-insensitive tokens read as missing.
    pub missing_tokens: Vec<String>,
    /// Declared class labels. Every one must occur in the data.
    pub classes: Option<Vec<String>>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            missing_tokens: vec![String::new(), "NA".into(), "?".into()],
            classes: None,
        }
    }
}

impl LoadOptions {
    fn is_missing(&self, token: &str) -> bool {
        let t = token.trim();
        self.missing_tokens.iter().any(|m| m.eq_ignore_ascii_case(t))
    }
}

/// Immutable column-typed training table.
#[derive(Clone, Debug)]
pub struct Dataset {
    header: Header,
    columns: Vec<Column>,
    y: Vec<usize>,
}

/// Sort labels numerically when they all parse as numbers, else lexicographically.
pub fn sort_labels(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by(|a, b| {
            let x: f64 = a.trim().parse().unwrap();
            let y: f64 = b.trim().parse().unwrap();
            x.total_cmp(&y).then_with(|| a.cmp(b))
        }),
        None => labels.sort(),
    }
}

impl Dataset {
    /// Assemble a dataset from already-encoded columns. Used by generators.
    pub fn from_parts(header: Header, columns: Vec<Column>, y: Vec<usize>) -> Result<Dataset> {
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if header.class_labels.len() < 2 {
            return Err(Error::TooFewClasses(header.class_labels.len()));
        }
        if columns.len() != header.predictors.len() || columns.is_empty() {
            return Err(Error::NoPredictors);
        }
        for (col, info) in columns.iter().zip(&header.predictors) {
            match (col, info.kind) {
                (Column::Numeric(v), PredictorKind::Numeric) if v.len() == y.len() => {}
                (Column::Categorical(v), PredictorKind::Categorical) if v.len() == y.len() => {
                    if v.iter().flatten().any(|&c| c as usize >= info.levels.len()) {
                        return Err(Error::Schema(format!(
                            "level index out of range in `{}`",
                            info.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "column `{}` does not match its declared kind or length",
                        info.name
                    )))
                }
            }
        }
        let j = header.class_labels.len();
        if let Some(&bad) = y.iter().find(|&&c| c >= j) {
            return Err(Error::Schema(format!("class index {bad} out of range")));
        }
        let ds = Dataset { header, columns, y };
        let counts = ds.class_counts();
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass(ds.header.class_labels[empty].clone()));
        }
        Ok(ds)
    }

    /// Build a dataset from named columns. Categorical columns carry their
    /// level dictionary; the class column is named `class_name`.
    pub fn from_columns(
        class_name: &str,
        class_labels: Vec<String>,
        predictors: Vec<(String, Column, Vec<String>)>,
        y: Vec<usize>,
    ) -> Result<Dataset> {
        let mut specs = vec![ColumnSpec {
            name: class_name.to_string(),
            role: Role::Class,
        }];
        let mut infos = Vec::with_capacity(predictors.len());
        let mut columns = Vec::with_capacity(predictors.len());
        for (name, col, levels) in predictors {
            let kind = match col {
                Column::Numeric(_) => PredictorKind::Numeric,
                Column::Categorical(_) => PredictorKind::Categorical,
            };
            specs.push(ColumnSpec {
                name: name.clone(),
                role: match kind {
                    PredictorKind::Numeric => Role::Numeric,
                    PredictorKind::Categorical => Role::Categorical,
                },
            });
            infos.push(PredictorInfo { name, kind, levels });
            columns.push(col);
        }
        let header = Header {
            schema: Schema::new(specs)?,
            class_name: class_name.to_string(),
            class_labels,
            predictors: infos,
        };
        Dataset::from_parts(header, columns, y)
    }

    pub fn load(csv_text: &str, schema: &Schema, opts: &LoadOptions) -> Result<Dataset> {
        load_dataset(csv_text.as_bytes(), schema, opts)
    }

    pub fn load_path(
        path: impl AsRef<Path>,
        schema: &Schema,
        opts: &LoadOptions,
    ) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        load_dataset(file, schema, opts)
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_classes(&self) -> usize {
        self.header.class_labels.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, var: usize) -> &Column {
        &self.columns[var]
    }

    pub fn kind(&self, var: usize) -> PredictorKind {
        self.header.predictors[var].kind
    }

    pub fn n_levels(&self, var: usize) -> usize {
        self.header.predictors[var].levels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn label(&self, row: usize) -> usize {
        self.y[row]
    }

    #[inline]
    pub fn num(&self, row: usize, var: usize) -> f64 {
        match &self.columns[var] {
            Column::Numeric(v) => v[row],
            Column::Categorical(_) => panic!("predictor {var} is categorical"),
        }
    }

    /// Categorical level with missing mapped to the extra level `n_levels`.
    #[inline]
    pub fn level(&self, row: usize, var: usize) -> u32 {
        match &self.columns[var] {
            Column::Categorical(v) => v[row].unwrap_or(self.header.predictors[var].levels.len() as u32),
            Column::Numeric(_) => panic!("predictor {var} is numeric"),
        }
    }

    pub fn cell(&self, row: usize, var: usize) -> Cell {
        match &self.columns[var] {
            Column::Numeric(v) => Cell::Num(v[row]),
            Column::Categorical(v) => Cell::Cat(v[row]),
        }
    }

    pub fn row(&self, row: usize) -> Vec<Cell> {
        (0..self.columns.len()).map(|v| self.cell(row, v)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Cell>> {
        (0..self.n_rows()).map(|r| self.row(r)).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Class counts over a (possibly repeating) list of row indices.
    pub fn counts_of(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        counts
    }

    /// Write the data back as CSV in schema column order. Excluded columns
    /// are written empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let names: Vec<&str> = self.header.schema.columns.iter().map(|c| c.name.as_str()).collect();
        w.write_record(&names).expect("in-memory write");
        let index: HashMap<&str, usize> = self
            .header
            .predictors
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        for row in 0..self.n_rows() {
            let mut rec: Vec<String> = Vec::with_capacity(names.len());
            for spec in &self.header.schema.columns {
                let field = match spec.role {
                    Role::Class => self.header.class_labels[self.y[row]].clone(),
                    Role::Excluded => String::new(),
                    _ => {
                        let var = index[spec.name.as_str()];
                        match self.cell(row, var) {
                            Cell::Num(v) if v.is_nan() => "NA".to_string(),
                            Cell::Num(v) => format!("{v:?}"),
                            Cell::Cat(None) => "NA".to_string(),
                            Cell::Cat(Some(c)) => self.header.predictors[var].levels[c as usize].clone(),
                        }
                    }
                };
                rec.push(field);
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// A new dataset holding the given rows (repeats allowed), sharing level
    /// dictionaries and class labels.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
                Column::Categorical(v) => Column::Categorical(rows.iter().map(|&r| v[r]).collect()),
            })
            .collect();
        Dataset {
            header: self.header.clone(),
            columns,
            y: rows.iter().map(|&r| self.y[r]).collect(),
        }
    }
}

/// Rows encoded against an existing header, for prediction.
#[derive(Clone, Debug)]
pub struct EncodedRows {
    pub rows: Vec<Vec<Cell>>,
    /// True class indices when the class column was present and the label known.
    pub labels: Option<Vec<Option<usize>>>,
}

impl Header {
    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == label.trim())
    }

    /// Encode CSV rows for prediction. Every predictor column must be in the
    /// header; the class column is optional; unseen categorical levels map
    /// to [`UNSEEN_LEVEL`].
    pub fn encode_csv<R: std::io::Read>(&self, reader: R, opts: &LoadOptions) -> Result<EncodedRows> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let position = |name: &str| headers.iter().position(|h| h == name);
        let mut pos = Vec::with_capacity(self.predictors.len());
        for p in &self.predictors {
            pos.push(position(&p.name).ok_or_else(|| Error::UnknownColumn(p.name.clone()))?);
        }
        let class_pos = position(&self.class_name);
        let dicts: Vec<HashMap<&str, u32>> = self
            .predictors
            .iter()
            .map(|p| p.levels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect())
            .collect();
        let mut rows = Vec::new();
        let mut labels = class_pos.map(|_| Vec::new());
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(pos.len());
            for (var, &p) in pos.iter().enumerate() {
                let tok = rec.get(p).unwrap_or("");
                let cell = match self.predictors[var].kind {
                    PredictorKind::Numeric => {
                        if opts.is_missing(tok) {
                            Cell::Num(f64::NAN)
                        } else {
                            Cell::Num(tok.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
                                column: self.predictors[var].name.clone(),
                                row: r + 1,
                                token: tok.to_string(),
                            })?)
                        }
                    }
                    PredictorKind::Categorical => {
                        if opts.is_missing(tok) {
                            Cell::Cat(None)
                        } else {
                            Cell::Cat(Some(*dicts[var].get(tok.trim()).unwrap_or(&UNSEEN_LEVEL)))
                        }
                    }
                };
                row.push(cell);
            }
            if let (Some(cp), Some(ls)) = (class_pos, labels.as_mut()) {
                let tok = rec.get(cp).unwrap_or("");
                ls.push(if opts.is_missing(tok) { None } else { self.class_index(tok) });
            }
            rows.push(row);
        }
        Ok(EncodedRows { rows, labels })
    }
}

/// Parse CSV text into a [`Dataset`] under `schema`.
pub fn load_dataset<R: std::io::Read>(reader: R, schema: &Schema, opts: &LoadOptions) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for h in headers.iter() {
        if !schema.columns.iter().any(|c| c.name == h) {
            return Err(Error::UnknownColumn(h.to_string()));
        }
    }
    let mut pos = HashMap::new();
    for c in &schema.columns {
        let p = headers
            .iter()
            .position(|h| h == c.name)
            .ok_or_else(|| Error::UnknownColumn(c.name.clone()))?;
        pos.insert(c.name.as_str(), p);
    }
    let class_spec = schema.class_column();
    let class_pos = pos[class_spec.name.as_str()];
    let predictor_specs: Vec<&ColumnSpec> = schema
        .columns
        .iter()
        .filter(|c| matches!(c.role, Role::Numeric | Role::Categorical))
        .collect();

    let mut raw_labels: Vec<String> = Vec::new();
    let mut columns: Vec<Column> = predictor_specs
        .iter()
        .map(|s| match s.role {
            Role::Numeric => Column::Numeric(Vec::new()),
            _ => Column::Categorical(Vec::new()),
        })
        .collect();
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); predictor_specs.len()];
    let mut dicts: Vec<HashMap<String, u32>> = vec![HashMap::new(); predictor_specs.len()];

    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let tok = rec.get(class_pos).unwrap_or("");
        if opts.is_missing(tok) {
            return Err(Error::MissingClass { row: r + 1 });
        }
        raw_labels.push(tok.trim().to_string());
        for (i, spec) in predictor_specs.iter().enumerate() {
            let tok = rec.get(pos[spec.name.as_str()]).unwrap_or("");
            match &mut columns[i] {
                Column::Numeric(v) => {
                    if opts.is_missing(tok) {
                        v.push(f64::NAN);
                    } else {
                        let x = tok.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
                            column: spec.name.clone(),
                            row: r + 1,
                            token: tok.to_string(),
                        })?;
                        v.push(x);
                    }
                }
                Column::Categorical(v) => {
                    if opts.is_missing(tok) {
                        v.push(None);
                    } else {
                        let t = tok.trim();
                        let code = match dicts[i].get(t) {
                            Some(&c) => c,
                            None => {
                                let c = levels[i].len() as u32;
                                levels[i].push(t.to_string());
                                dicts[i].insert(t.to_string(), c);
                                c
                            }
                        };
                        v.push(Some(code));
                    }
                }
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let class_labels = match &opts.classes {
        Some(declared) => {
            let mut d = declared.clone();
            sort_labels(&mut d);
            if let Some(bad) = raw_labels.iter().find(|l| !d.contains(l)) {
                return Err(Error::Schema(format!("undeclared class label `{bad}`")));
            }
            d
        }
        None => {
            let mut d: Vec<String> = raw_labels.clone();
            sort_labels(&mut d);
            d.dedup();
            d
        }
    };
    if class_labels.len() < 2 {
        return Err(Error::TooFewClasses(class_labels.len()));
    }
    let index: HashMap<&str, usize> = class_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let y = raw_labels.iter().map(|l| index[l.as_str()]).collect();
    let predictors = predictor_specs
        .iter()
        .zip(levels)
        .map(|(s, lv)| PredictorInfo {
            name: s.name.clone(),
            kind: if s.role == Role::Numeric {
                PredictorKind::Numeric
            } else {
                PredictorKind::Categorical
            },
            levels: lv,
        })
        .collect();
    let header = Header {
        schema: schema.clone(),
        class_name: class_spec.name.clone(),
        class_labels,
        predictors,
    };
    Dataset::from_parts(header, columns, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorSource {
    User,
    Estimated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub values: Vec<f64>,
    pub source: PriorSource,
}

impl Priors {
    /// `pi(j) = N_j / N`.
    pub fn estimated(counts: &[usize]) -> Priors {
        let n: usize = counts.iter().sum();
        Priors {
            values: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            source: PriorSource::Estimated,
        }
    }

    /// User priors, normalized to sum to one.
    pub fn user(values: Vec<f64>) -> Result<Priors> {
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Priors("every prior must be positive and finite".into()));
        }
        let s: f64 = values.iter().sum();
        Ok(Priors {
            values: values.iter().map(|v| v / s).collect(),
            source: PriorSource::User,
        })
    }

    /// Parse `{"label": prior, ...}`; every class must be listed.
    pub fn from_json(text: &str, header: &Header) -> Result<Priors> {
        let map: HashMap<String, f64> = serde_json::from_str(text)?;
        let mut values = vec![f64::NAN; header.class_labels.len()];
        for (k, v) in map {
            let j = header.class_index(&k).ok_or_else(|| Error::Priors(format!("unknown class `{k}`")))?;
            values[j] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Priors("a prior is required for every class".into()));
        }
        Priors::user(values)
    }
}

/// Default priors estimated from the class frequencies.
pub fn default_priors(data: &Dataset) -> Priors {
    Priors::estimated(&data.class_counts())
}

/// `cost(i, j)` = cost of predicting `i` when the truth is `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    j: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn unit(j: usize) -> CostMatrix {
        let mut entries = vec![1.0; j * j];
        for i in 0..j {
            entries[i * j + i] = 0.0;
        }
        CostMatrix { j, entries }
    }

    /// Build from rows indexed `[predicted][truth]`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<CostMatrix> {
        let j = rows.len();
        if rows.iter().any(|r| r.len() != j) {
            return Err(Error::Costs("matrix must be square".into()));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Costs("costs must be finite and nonnegative".into()));
        }
        for i in 0..j {
            if entries[i * j + i] != 0.0 {
                return Err(Error::Costs("diagonal costs must be zero".into()));
            }
        }
        Ok(CostMatrix { j, entries })
    }

    /// Parse `{"predicted": {"truth": cost}}`; unlisted pairs keep unit cost.
    pub fn from_json(text: &str, header: &Header) -> Result<CostMatrix> {
        let map: HashMap<String, HashMap<String, f64>> = serde_json::from_str(text)?;
        let j = header.class_labels.len();
        let mut rows = CostMatrix::unit(j).to_rows();
        for (pred, inner) in map {
            let i = header.class_index(&pred).ok_or_else(|| Error::Costs(format!("unknown class `{pred}`")))?;
            for (truth, c) in inner {
                let t = header.class_index(&truth).ok_or_else(|| Error::Costs(format!("unknown class `{truth}`")))?;
                rows[i][t] = c;
            }
        }
        CostMatrix::from_rows(rows)
    }

    pub fn n_classes(&self) -> usize {
        self.j
    }

    #[inline]
    pub fn cost(&self, predicted: usize, truth: usize) -> f64 {
        self.entries[predicted * self.j + truth]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.j).map(|c| c.to_vec()).collect()
    }

    pub fn is_unit(&self) -> bool {
        *self == CostMatrix::unit(self.j)
    }
}

/// Priors, costs and per-class observation weights for one training sample.
///
/// A class-`j` observation carries weight `pi(j) / N_j`, so that the sum of
/// weights in a node is `p(t)`.
#[derive(Clone, Debug)]
pub struct ClassModel {
    pub priors: Priors,
    pub costs: CostMatrix,
    pub weights: Vec<f64>,
    pub root_counts: Vec<usize>,
}

impl ClassModel {
    /// `priors = None` estimates priors from `root_counts`.
    pub fn new(root_counts: Vec<usize>, priors: Option<&Priors>, costs: CostMatrix) -> ClassModel {
        let priors = match priors {
            Some(p) if p.source == PriorSource::User => p.clone(),
            _ => Priors::estimated(&root_counts),
        };
        let weights = root_counts
            .iter()
            .zip(&priors.values)
            .map(|(&n, &p)| if n == 0 { 0.0 } else { p / n as f64 })
            .collect();
        ClassModel {
            priors,
            costs,
            weights,
            root_counts,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn stats(&self, counts: &[usize]) -> NodeClassStats {
        NodeClassStats::from_counts(counts, &self.weights)
    }

    /// Cost-minimizing class for a node with these class counts.
    pub fn assign(&self, counts: &[usize]) -> usize {
        assign_class(&self.stats(counts), &self.costs)
    }

    /// `min_i sum_j C(i|j) p(j,t)`.
    pub fn node_risk(&self, counts: &[usize]) -> f64 {
        let j = self.n_classes();
        (0..j)
            .map(|i| {
                (0..j)
                    .map(|t| self.costs.cost(i, t) * self.weights[t] * counts[t] as f64)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeClassStats {
    pub counts: Vec<usize>,
    pub n: usize,
    /// `p(j,t)`
    pub joint: Vec<f64>,
    /// `p(t)`
    pub p_node: f64,
    /// `p(j|t)`
    pub conditional: Vec<f64>,
    /// Number of classes present.
    pub classes_present: usize,
}

impl NodeClassStats {
    pub fn from_counts(counts: &[usize], weights: &[f64]) -> NodeClassStats {
        let joint: Vec<f64> = counts.iter().zip(weights).map(|(&c, &w)| w * c as f64).collect();
        let p_node: f64 = joint.iter().sum();
        let conditional = if p_node > 0.0 {
            joint.iter().map(|p| p / p_node).collect()
        } else {
            vec![0.0; joint.len()]
        };
        NodeClassStats {
            counts: counts.to_vec(),
            n: counts.iter().sum(),
            joint,
            p_node,
            conditional,
            classes_present: counts.iter().filter(|&&c| c > 0).count(),
        }
    }
}

/// Class statistics of the rows in `membership`; `p(j,t)` uses the
/// dataset-level class counts.
pub fn node_stats(data: &Dataset, membership: &[usize], priors: &Priors) -> Result<NodeClassStats> {
    if membership.is_empty() {
        return Err(Error::EmptyMembership);
    }
    let weights: Vec<f64> = data
        .class_counts()
        .iter()
        .zip(&priors.values)
        .map(|(&n, &p)| if n == 0 { 0.0 } else { p / n as f64 })
        .collect();
    Ok(NodeClassStats::from_counts(&data.counts_of(membership), &weights))
}

/// `argmin_i sum_j C(i|j) p(j|t)`, ties to the smallest index.
pub fn assign_class(stats: &NodeClassStats, costs: &CostMatrix) -> usize {
    let j = stats.conditional.len();
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for i in 0..j {
        let c: f64 = (0..j).map(|t| costs.cost(i, t) * stats.conditional[t]).sum();
        if c < best_cost {
            best_cost = c;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::parse("y d\nx1 n\nx2 c\n").unwrap()
    }

    #[test]
    fn loads_small_csv() {
        let ds = Dataset::load("y,x1,x2\na,1.5,u\nb,2,v\na,NA,u\n", &schema(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_classes(), 2);
        assert!(ds.num(2, 0).is_nan());
        assert_eq!(ds.header().predictors[1].levels, vec!["u", "v"]);
        assert_eq!(ds.labels(), &[0, 1, 0]);
    }

    #[test]
    fn missing_tokens_are_case_insensitive() {
        let ds = Dataset::load("y,x1,x2\na,na,?\nb,2,\n", &schema(), &LoadOptions::default()).unwrap();
        assert!(ds.num(0, 0).is_nan());
        assert_eq!(ds.cell(0, 1), Cell::Cat(None));
        assert_eq!(ds.cell(1, 1), Cell::Cat(None));
        assert_eq!(ds.level(1, 1), 0);
    }

    #[test]
    fn blank_class_is_an_error() {
        let err = Dataset::load("y,x1,x2\na,1,u\n,2,v\n", &schema(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingClass { row: 2 }));
        assert!(err.to_string().contains("missing class value"));
    }

    #[test]
    fn non_numeric_and_unknown_columns() {
        let err = Dataset::load("y,x1,x2\na,abc,u\nb,1,v\n", &schema(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { .. }));
        let err = Dataset::load("y,x1,x3\na,1,u\nb,1,v\n", &schema(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownColumn(_)));
        assert!(matches!(Schema::parse("y d\nz x\n"), Err(Error::NoPredictors)));
    }

    #[test]
    fn class_labels_sort_numerically() {
        let s = Schema::parse("y d\nx n\n").unwrap();
        let ds = Dataset::load("y,x\n10,1\n9,2\n2,3\n", &s, &LoadOptions::default()).unwrap();
        assert_eq!(ds.header().class_labels, vec!["2", "9", "10"]);
        assert_eq!(ds.labels(), &[2, 1, 0]);
    }

    #[test]
    fn declared_but_absent_class_is_rejected() {
        let s = Schema::parse("y d\nx n\n").unwrap();
        let opts = LoadOptions {
            classes: Some(vec!["1".into(), "2".into()]),
            ..Default::default()
        };
        let err = Dataset::load("y,x\n1,1\n1,2\n", &s, &opts).unwrap_err();
        assert!(matches!(err, Error::EmptyClass(ref c) if c == "2"));
    }

    #[test]
    fn estimated_priors() {
        assert_eq!(Priors::estimated(&[50, 50]).values, vec![0.5, 0.5]);
        assert_eq!(Priors::estimated(&[1, 3]).values, vec![0.25, 0.75]);
    }

    #[test]
    fn node_stats_root_and_pure() {
        let s = Schema::parse("y d\nx n\n").unwrap();
        let ds = Dataset::load("y,x\n1,1\n2,2\n2,3\n1,4\n2,5\n", &s, &LoadOptions::default()).unwrap();
        let pri = default_priors(&ds);
        let all: Vec<usize> = (0..5).collect();
        let st = node_stats(&ds, &all, &pri).unwrap();
        assert!((st.conditional[0] - 0.4).abs() < 1e-15);
        assert!((st.conditional[1] - 0.6).abs() < 1e-15);
        let st = node_stats(&ds, &[1, 2], &pri).unwrap();
        assert_eq!(st.conditional, vec![0.0, 1.0]);
        assert_eq!(st.classes_present, 1);
        assert!(matches!(node_stats(&ds, &[], &pri), Err(Error::EmptyMembership)));
    }

    #[test]
    fn node_stats_with_user_priors() {
        // half of each class in the node: p(1,t) = 0.9*0.5, p(2,t) = 0.1*0.5
        let s = Schema::parse("y d\nx n\n").unwrap();
        let ds = Dataset::load("y,x\n1,1\n1,2\n2,3\n2,4\n", &s, &LoadOptions::default()).unwrap();
        let pri = Priors::user(vec![0.9, 0.1]).unwrap();
        let st = node_stats(&ds, &[0, 2], &pri).unwrap();
        assert!((st.conditional[0] - 0.9).abs() < 1e-12);
        assert!((st.p_node - 0.5).abs() < 1e-12);
    }

    fn stats_of(p: &[f64]) -> NodeClassStats {
        NodeClassStats {
            counts: vec![1; p.len()],
            n: p.len(),
            joint: p.to_vec(),
            p_node: 1.0,
            conditional: p.to_vec(),
            classes_present: p.iter().filter(|&&x| x > 0.0).count(),
        }
    }

    #[test]
    fn assign_class_examples() {
        assert_eq!(assign_class(&stats_of(&[0.2, 0.8]), &CostMatrix::unit(2)), 1);
        assert_eq!(assign_class(&stats_of(&[0.5, 0.5]), &CostMatrix::unit(2)), 0);
        let ordinal = CostMatrix::from_rows(
            (0..3).map(|i| (0..3).map(|j| (i as f64 - j as f64).abs()).collect()).collect(),
        )
        .unwrap();
        // brute force: i=1 -> 0.3*0+0.7*2 = 1.4, i=2 -> 0.3+0.7 = 1.0, i=3 -> 0.6
        let p = [0.3, 0.0, 0.7];
        let brute = (0..3)
            .min_by(|&a, &b| {
                let ca: f64 = (0..3).map(|j| (a as f64 - j as f64).abs() * p[j]).sum();
                let cb: f64 = (0..3).map(|j| (b as f64 - j as f64).abs() * p[j]).sum();
                ca.partial_cmp(&cb).unwrap()
            })
            .unwrap();
        assert_eq!(brute, 2);
        assert_eq!(assign_class(&stats_of(&p), &ordinal), 2);
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(CostMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(CostMatrix::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        assert!(CostMatrix::unit(3).is_unit());
    }

    #[test]
    fn schema_text_round_trip() {
        let s = Schema::parse("# comment\n1 y d\n2 a n\n3 b c\n4 z x\n").unwrap();
        assert_eq!(Schema::parse(&s.to_text()).unwrap(), s);
        assert!(Schema::parse("y d\ny n\n").is_err());
        assert!(Schema::parse("y q\nx n\n").is_err());
    }
}
