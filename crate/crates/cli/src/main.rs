use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uvtree::harness::{
    chessboard_experiment, circle_lines_experiment, crossval_with, gen_bias_scenario, gen_chessboard, gen_circle_lines,
    run_bias_simulation, write_dataset, BiasScenario, Classifier, CvEstimate, TreeSummary,
};
use uvtree::{
    fit, fit_bagged, fit_forest, CostMatrix, Dataset, Ensemble, Error, ExportFormat, GrowConfig, LoadOptions, Method,
    Schema, Tree,
};

#[derive(Parser)]
#[command(name = "uvtree", version, about = "Classification trees with unbiased variable selection")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Train(TrainArgs),
    /// Predict the rows of a CSV file.
    Predict(PredictArgs),
    /// Cross-validated error estimate.
    Cv(CvArgs),
    /// Run a synthetic experiment.
    Simulate(SimulateArgs),
    /// Render a tree model.
    Export(ExportArgs),
    /// Write a synthetic dataset with its schema.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "K", alias = "k")]
    K,
    #[value(name = "N", alias = "n")]
    N,
    #[value(name = "BG", alias = "bg")]
    Bg,
    #[value(name = "GF", alias = "gf")]
    Gf,
}

impl MethodArg {
    fn single(self) -> Option<Method> {
        match self {
            MethodArg::S => Some(Method::S),
            MethodArg::K => Some(Method::K),
            MethodArg::N => Some(Method::N),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    BiasIndependence,
    BiasDependence,
    Chessboard,
    CircleLines,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Schema file (default: the data path with extension `.schema`).
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "S")]
    method: MethodArg,
    #[arg(long, default_value_t = 5)]
    m0: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Ensemble size (default 100 for BG, 500 for GF).
    #[arg(long)]
    trees: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Also write the routed leaf id (single trees only).
    #[arg(long)]
    leaf: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Monte-Carlo trials for bias runs, or consecutive seeds for experiments.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sample size (default 500 bias, 1000 chessboard, 300 circle-lines).
    #[arg(long)]
    n: Option<usize>,
    /// Tree method for circle-lines.
    #[arg(long, value_enum, default_value = "S")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; files are named after the generator.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Config(m) => Failure::Usage(m),
            e if e.is_data_error() => Failure::Data(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &DataArgs) -> CliResult<Dataset> {
    let schema_path = args.schema.clone().unwrap_or_else(|| args.data.with_extension("schema"));
    let schema = Schema::parse(&read(&schema_path)?)?;
    Ok(Dataset::load(&read(&args.data)?, &schema, &LoadOptions::default())?)
}

fn grow_config(fit: &FitArgs) -> GrowConfig {
    GrowConfig {
        m0: fit.m0,
        folds: fit.folds,
        seed: fit.seed,
        ..GrowConfig::with_method(fit.method.single().unwrap_or(Method::S))
    }
}

enum Model {
    Tree(Box<Tree>),
    Ensemble(Ensemble),
}

impl Model {
    fn from_json(text: &str) -> CliResult<Model> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure::Data(format!("model file: {e}")))?;
        if value.get("members").is_some() {
            Ok(Model::Ensemble(Ensemble::from_json(text)?))
        } else {
            Ok(Model::Tree(Box::new(Tree::from_json(text)?)))
        }
    }

    fn to_json(&self) -> CliResult<String> {
        Ok(match self {
            Model::Tree(t) => t.to_json()?,
            Model::Ensemble(e) => e.to_json()?,
        })
    }

    fn header(&self) -> &uvtree::Header {
        match self {
            Model::Tree(t) => &t.header,
            Model::Ensemble(e) => &e.members[0].header,
        }
    }
}

fn fit_model(data: &Dataset, fit_args: &FitArgs) -> CliResult<Model> {
    let cfg = grow_config(fit_args);
    Ok(match fit_args.method {
        MethodArg::Bg => Model::Ensemble(fit_bagged(data, &cfg, fit_args.trees.unwrap_or(uvtree::ensemble::DEFAULT_BAGGED))?),
        MethodArg::Gf => Model::Ensemble(fit_forest(data, &cfg, fit_args.trees.unwrap_or(uvtree::ensemble::DEFAULT_FOREST))?),
        _ => Model::Tree(Box::new(fit(data, &cfg)?)),
    })
}

fn train(args: &TrainArgs) -> CliResult<()> {
    let data = load(&args.data)?;
    let model = fit_model(&data, &args.fit)?;
    fs::write(&args.out, model.to_json()?).map_err(|e| Failure::Internal(format!("{}: {e}", args.out.display())))?;
    match &model {
        Model::Tree(t) => {
            println!("leaves: {}", t.n_leaves());
            println!("training errors: {}", t.errors(&data));
            println!("training cost: {:.6}", t.cost(&data));
        }
        Model::Ensemble(e) => {
            let leaves = e.members.iter().map(Tree::n_leaves).sum::<usize>() as f64 / e.members.len() as f64;
            println!("members: {}", e.members.len());
            println!("mean leaves: {leaves:.2}");
            println!("training errors: {}", e.errors(&data));
            println!("training cost: {:.6}", e.errors(&data) as f64 / data.n_rows() as f64);
        }
    }
    Ok(())
}

fn predict(args: &PredictArgs) -> CliResult<()> {
    let model = Model::from_json(&read(&args.model)?)?;
    let header = model.header();
    let encoded = header.encode_csv(read(&args.data)?.as_bytes(), &LoadOptions::default())?;
    if args.leaf && matches!(model, Model::Ensemble(_)) {
        return usage("--leaf is only available for single trees");
    }
    let mut out = String::from(if args.leaf { "predicted,leaf\n" } else { "predicted\n" });
    for row in &encoded.rows {
        let (class, leaf) = match &model {
            Model::Tree(t) => (t.predict(row), Some(t.leaf_of(row))),
            Model::Ensemble(e) => (e.predict(row), None),
        };
        out.push_str(&header.class_labels[class]);
        if let (true, Some(l)) = (args.leaf, leaf) {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
    }
    write_out(args.out.as_deref(), &out)
}

struct Fitted(Model);

impl Classifier for Fitted {
    fn classify(&self, data: &Dataset, row: usize) -> usize {
        match &self.0 {
            Model::Tree(t) => t.predict_data(data, row),
            Model::Ensemble(e) => e.predict_data(data, row),
        }
    }

    fn leaves(&self) -> Option<usize> {
        match &self.0 {
            Model::Tree(t) => Some(t.n_leaves()),
            Model::Ensemble(_) => None,
        }
    }
}

fn cv(args: &CvArgs) -> CliResult<()> {
    let data = load(&args.data)?;
    let costs = CostMatrix::unit(data.n_classes());
    let folds = args.fit.folds;
    let est: CvEstimate = crossval_with(&data, &costs, folds, args.fit.seed, |d| {
        fit_model(d, &args.fit).map(Fitted).map_err(|f| match f {
            Failure::Usage(m) => Error::Config(m),
            Failure::Data(m) | Failure::Internal(m) => Error::Model(m),
        })
    })?;
    let text = match args.format {
        Format::Json => json(&est)?,
        Format::Csv => {
            let mut s = String::from("fold,error\n");
            for (i, e) in est.fold_errors.iter().enumerate() {
                s.push_str(&format!("{},{e}\n", i + 1));
            }
            s
        }
        Format::Text => {
            let mut s = format!("cv error: {:.6}\n", est.error);
            if let Some(l) = est.mean_leaves {
                s.push_str(&format!("mean leaves: {l:.2}\n"));
            }
            s
        }
        Format::Dot => return usage("cv reports are text, csv or json"),
    };
    write_out(args.out.as_deref(), &text)
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn summaries_csv(rows: &[TreeSummary]) -> String {
    let mut s = String::from("seed,n,leaves,training_errors,top_split_vars\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.seed, r.n, r.leaves, r.training_errors, r.top_split_vars.join(" ")));
    }
    s
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.trials == Some(0) {
        return usage("--trials must be positive");
    }
    if !matches!(args.format, Format::Csv | Format::Json) {
        return usage("simulation reports are csv or json");
    }
    let (report, summary) = match args.kind {
        Kind::BiasIndependence | Kind::BiasDependence => {
            let scenario = if args.kind == Kind::BiasIndependence {
                BiasScenario::Independence
            } else {
                BiasScenario::Dependence
            };
            let trials = args.trials.unwrap_or(2000);
            let rep = run_bias_simulation(scenario, trials, args.n.unwrap_or(500), args.seed)?;
            let text = if args.format == Format::Json {
                json(&rep)?
            } else {
                let mut s = String::from("variable,univariate,linear,probability,se\n");
                for v in 0..rep.probabilities.len() {
                    s.push_str(&format!(
                        "X{},{},{},{},{}\n",
                        v + 1,
                        rep.univariate[v],
                        rep.linear[v],
                        rep.probabilities[v],
                        rep.standard_errors[v]
                    ));
                }
                s
            };
            let probs: Vec<String> = rep.probabilities.iter().map(|p| format!("{p:.4}")).collect();
            (text, format!("{} trials, selection probabilities: {}\n", rep.trials, probs.join(" ")))
        }
        Kind::Chessboard | Kind::CircleLines => {
            let trials = args.trials.unwrap_or(1) as u64;
            let method = args
                .method
                .single()
                .ok_or_else(|| Failure::Usage("experiments use method S, K or N".into()))?;
            let rows = (args.seed..args.seed + trials)
                .map(|seed| match args.kind {
                    Kind::Chessboard => chessboard_experiment(args.n.unwrap_or(1000), seed),
                    _ => circle_lines_experiment(method, args.n.unwrap_or(300), seed),
                })
                .collect::<uvtree::Result<Vec<_>>>()?;
            let text = if args.format == Format::Json { json(&rows)? } else { summaries_csv(&rows) };
            let summary: String = rows
                .iter()
                .map(|r| format!("seed {}: {} leaves, {} training errors\n", r.seed, r.leaves, r.training_errors))
                .collect();
            (text, summary)
        }
    };
    match &args.out {
        Some(p) => {
            write_out(Some(p), &report)?;
            print!("{summary}");
            Ok(())
        }
        None => write_out(None, &report),
    }
}

fn export(args: &ExportArgs) -> CliResult<()> {
    let tree = match Model::from_json(&read(&args.model)?)? {
        Model::Tree(t) => *t,
        Model::Ensemble(_) => return usage("export renders single trees"),
    };
    let format = match args.format {
        Format::Text => ExportFormat::Text,
        Format::Dot => ExportFormat::Dot,
        _ => return usage("export formats are text and dot"),
    };
    write_out(args.out.as_deref(), &tree.export(format))
}

fn generate(args: &GenerateArgs) -> CliResult<()> {
    let (data, stem) = match args.kind {
        Kind::Chessboard => (gen_chessboard(args.n.unwrap_or(1000), args.seed)?, "chessboard"),
        Kind::CircleLines => (gen_circle_lines(args.n.unwrap_or(300), args.seed)?, "circle_lines"),
        Kind::BiasIndependence => (
            gen_bias_scenario(BiasScenario::Independence, args.n.unwrap_or(500), args.seed)?,
            "bias_independence",
        ),
        Kind::BiasDependence => (
            gen_bias_scenario(BiasScenario::Dependence, args.n.unwrap_or(500), args.seed)?,
            "bias_dependence",
        ),
    };
    fs::create_dir_all(&args.out).map_err(|e| Failure::Internal(format!("{}: {e}", args.out.display())))?;
    write_dataset(&data, &args.out, stem)?;
    println!("{}", args.out.join(format!("{stem}.csv")).display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match &cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Simulate(a) => simulate(a),
        Command::Export(a) => export(a),
        Command::Generate(a) => generate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = std::panic::catch_unwind(|| run(&cli));
    let _ = std::io::stdout().flush();
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Data(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(m))) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
