//! Command-line front end.
//!
//! Every flag may also be given in a flat TOML file passed with `--config`
//! (keys use the flag names, with `-` or `_`); flags on the command line win.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dqc::{DirectionMode, DqcConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::quantile::QuantileLevel;
use crate::simbench::{
    augment_noise, generate_scenario, loo_validate, run_benchmark, ClassifierSpec, Scenario,
    ScenarioConfig,
};
use crate::theory::{optimal_theta, parse_distribution, psi_curve, PopulationPair};

#[derive(Debug, Parser)]
#[command(name = "dirquant", version, about = "Directional quantile classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a classifier on a labelled CSV and write a model file.
    Train(TrainArgs),
    /// Predict labels for the rows of a CSV.
    Predict(PredictArgs),
    /// Run the simulation benchmark and write a report.
    Benchmark(BenchmarkArgs),
    /// Leave-one-out error rate on a labelled CSV.
    Loo(LooArgs),
    /// Tabulate the two-population correct-classification curve.
    TheoryCurve(TheoryArgs),
    /// Write one replication's training and test sets.
    Simulate(SimulateArgs),
    /// Append independent standard normal noise columns.
    Augment(AugmentArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat key-value TOML file with default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub label_col: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DqcArgs {
    /// Comma-separated quantile levels.
    #[arg(long)]
    pub theta_grid: Option<String>,
    /// Directions per quantile level (default max(p, n)).
    #[arg(long)]
    pub directions: Option<usize>,
    #[arg(long)]
    pub spread: Option<f64>,
    /// uniform | optimal-perturbed
    #[arg(long)]
    pub direction_mode: Option<String>,
    #[arg(long)]
    pub clip_weights: bool,
    #[arg(long)]
    pub cv_folds: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: Option<u8>,
    /// Training (and test) set size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub correlated: bool,
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// dqc | centroid | median | cqc
    #[arg(long, alias = "classifiers")]
    pub classifier: Option<String>,
    #[command(flatten)]
    pub dqc: DqcArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// One or more dimensions, comma-separated.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated classifier names.
    #[arg(long)]
    pub classifiers: Option<String>,
    #[command(flatten)]
    pub dqc: DqcArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LooArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub classifiers: Option<String>,
    #[command(flatten)]
    pub dqc: DqcArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// e.g. `normal:0,1`, `uniform:0,1`, `lognormal:0,1,0.5`, `t:3,0,1`
    #[arg(long)]
    pub dist_a: Option<String>,
    #[arg(long)]
    pub dist_b: Option<String>,
    /// Two comma-separated priors summing to one.
    #[arg(long)]
    pub priors: Option<String>,
    /// Number of interior grid points.
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub p: Option<usize>,
    /// Replication index.
    #[arg(long)]
    pub rep: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Number of noise columns.
    #[arg(long)]
    pub extra: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Values read from a `--config` file, keyed by flag name.
#[derive(Debug, Default)]
struct FileConfig(toml::Table);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Parse(format!("config file {}: {e}", path.display())))?;
        let mut flat = toml::Table::new();
        for (k, v) in table {
            if v.is_table() {
                return Err(Error::Parse(format!("config key '{k}' must not be a table")));
            }
            flat.insert(k.replace('_', "-"), v);
        }
        Ok(Self(flat))
    }

    fn get(&self, key: &str) -> Option<&toml::Value> {
        self.0.get(key)
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        Ok(match self.get(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(toml::Value::Integer(i)) => Some(i.to_string()),
            Some(toml::Value::Float(f)) => Some(f.to_string()),
            Some(toml::Value::Array(a)) => Some(
                a.iter()
                    .map(|v| match v {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            Some(other) => return Err(bad_key(key, other)),
        })
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(bad_key(key, other)),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(bad_key(key, other)),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(bad_key(key, other)),
        }
    }
}

fn bad_key(key: &str, value: &toml::Value) -> Error {
    Error::Parse(format!("config key '{key}' has unexpected value {value}"))
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn pick_usize(flag: Option<usize>, file: &FileConfig, key: &str) -> Result<Option<usize>> {
    Ok(pick(flag, file.uint(key)?.map(|v| v as usize)))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid {what} '{s}'")))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<Vec<QuantileLevel>> {
    parse_list::<f64>(text, "quantile level")?
        .into_iter()
        .map(QuantileLevel::new)
        .collect()
}

/// Resolved per-run settings shared by several commands.
struct Resolved {
    file: FileConfig,
    seed: u64,
    out: Option<PathBuf>,
    label_col: String,
}

fn resolve_common(common: &Common) -> Result<Resolved> {
    let file = FileConfig::load(common.config.as_deref())?;
    let threads = pick_usize(common.threads, &file, "threads")?;
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(Resolved {
        seed: pick(common.seed, file.uint("seed")?).unwrap_or(1),
        out: pick(common.out.clone(), file.string("out")?.map(PathBuf::from)),
        label_col: pick(common.label_col.clone(), file.string("label-col")?)
            .unwrap_or_else(|| io::DEFAULT_LABEL_COLUMN.to_string()),
        file,
    })
}

fn dqc_config(args: &DqcArgs, r: &Resolved) -> Result<DqcConfig> {
    let f = &r.file;
    let mut c = DqcConfig {
        seed: r.seed,
        ..Default::default()
    };
    if let Some(g) = pick(args.theta_grid.clone(), f.string("theta-grid")?) {
        c.theta_grid = parse_grid(&g)?;
    }
    c.directions_per_theta = pick_usize(args.directions, f, "directions")?;
    if let Some(s) = pick(args.spread, f.float("spread")?) {
        c.spread = s;
    }
    if let Some(m) = pick(args.direction_mode.clone(), f.string("direction-mode")?) {
        c.direction_mode = m.parse::<DirectionMode>()?;
    }
    c.clip_nonnegative_weights = args.clip_weights || f.flag("clip-weights")?;
    if let Some(k) = pick_usize(args.cv_folds, f, "cv-folds")? {
        c.cv_folds = k;
    }
    Ok(c)
}

fn scenario_config(args: &ScenarioArgs, p: usize, reps: Option<usize>, r: &Resolved) -> Result<ScenarioConfig> {
    let f = &r.file;
    let mut c = ScenarioConfig {
        p,
        seed: r.seed,
        correlated: args.correlated || f.flag("correlated")?,
        ..Default::default()
    };
    if let Some(s) = pick(args.scenario.map(u64::from), f.uint("scenario")?) {
        let s = u8::try_from(s).map_err(|_| Error::InvalidConfig(format!("unknown scenario {s}")))?;
        c.scenario = Scenario::try_from(s)?;
    }
    if let Some(n) = pick_usize(args.n, f, "n")? {
        c.n = n;
    }
    if let Some(s) = pick(args.shift, f.float("shift")?) {
        c.shift = s;
    }
    if let Some(d) = pick(args.df, f.float("df")?) {
        c.df = d;
    }
    if let Some(reps) = reps {
        c.replications = reps;
    }
    c.validate()?;
    Ok(c)
}

fn classifier_list(flag: Option<String>, r: &Resolved, default: &str, dqc: &DqcConfig) -> Result<Vec<ClassifierSpec>> {
    let text = pick(flag, r.file.string("classifiers")?).unwrap_or_else(|| default.to_string());
    let specs: Vec<ClassifierSpec> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| ClassifierSpec::parse(s, dqc))
        .collect::<Result<_>>()?;
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no classifiers selected".into()));
    }
    Ok(specs)
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let data = io::load_dataset(&args.data, &r.label_col)?;
    let dqc = dqc_config(&args.dqc, &r)?;
    let name = pick(args.classifier, r.file.string("classifier")?).unwrap_or_else(|| "dqc".into());
    let model = ClassifierSpec::parse(&name, &dqc)?.fit(&data)?;
    let out = r
        .out
        .ok_or_else(|| Error::InvalidConfig("train needs --out for the model file".into()))?;
    io::save_model(&out, &model)
}

fn predict(args: PredictArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let model = io::load_model(&args.model)?;
    let x = io::read_features(std::fs::File::open(&args.data)?, &r.label_col)?;
    if x.ncols() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            found: x.ncols(),
        });
    }
    let labels = model.predict_rows(&x)?;
    let mut buf = Vec::new();
    io::write_predictions(&mut buf, &labels, &r.label_col)?;
    emit(r.out.as_deref(), std::str::from_utf8(&buf).expect("ascii"))
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let dqc = dqc_config(&args.dqc, &r)?;
    let specs = classifier_list(args.classifiers, &r, "dqc,centroid,median", &dqc)?;
    let ps: Vec<usize> = match pick(args.p, r.file.string("p")?) {
        Some(text) => parse_list(&text, "dimension")?,
        None => vec![ScenarioConfig::default().p],
    };
    if ps.is_empty() {
        return Err(Error::InvalidConfig("no dimension given".into()));
    }
    let reps = pick_usize(args.reps, &r.file, "reps")?;
    let mut reports = Vec::new();
    let mut text = String::new();
    for &p in &ps {
        let config = scenario_config(&args.scenario, p, reps, &r)?;
        let report = run_benchmark(&config, &specs)?;
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&io::report_csv(&report));
        eprint!("{}", io::report_timings(&report));
        reports.push(report);
    }
    emit(r.out.as_deref(), &text)?;
    if r.out.is_some() {
        print!("{}", io::format_table(&reports));
    }
    Ok(())
}

fn loo(args: LooArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let data = io::load_dataset(&args.data, &r.label_col)?;
    let dqc = dqc_config(&args.dqc, &r)?;
    let specs = classifier_list(args.classifiers, &r, "dqc", &dqc)?;
    let mut text = format!("# n={} p={} seed={}\nclassifier,loo_error\n", data.n(), data.p(), r.seed);
    for spec in &specs {
        let e = loo_validate(&data, spec)?;
        text.push_str(&format!("{},{e}\n", spec.name()));
    }
    emit(r.out.as_deref(), &text)
}

fn theory_curve(args: TheoryArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let f = &r.file;
    let a = pick(args.dist_a, f.string("dist-a")?).unwrap_or_else(|| "normal:0,1".into());
    let b = pick(args.dist_b, f.string("dist-b")?).unwrap_or_else(|| "normal:1,1".into());
    let first = parse_distribution(&a)?;
    let second = parse_distribution(&b)?;
    let pair = match pick(args.priors, f.string("priors")?) {
        Some(text) => {
            let pr: Vec<f64> = parse_list(&text, "prior")?;
            if pr.len() != 2 {
                return Err(Error::InvalidConfig("priors needs exactly two values".into()));
            }
            PopulationPair::new(first, second, (pr[0], pr[1]))?
        }
        None => PopulationPair::equal_priors(first, second),
    };
    let size = pick_usize(args.grid_size, f, "grid-size")?.unwrap_or(99);
    let curve = psi_curve(&pair, &QuantileLevel::uniform_grid(size));
    if curve.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value on the curve".into()));
    }
    let (theta, psi) = optimal_theta(&pair, 1e-9)?;
    eprintln!("optimal theta = {}, psi = {psi}", theta.value());
    let mut buf = Vec::new();
    io::write_psi_curve(&mut buf, &curve)?;
    emit(r.out.as_deref(), std::str::from_utf8(&buf).expect("ascii"))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let p = pick_usize(args.p, &r.file, "p")?.unwrap_or(ScenarioConfig::default().p);
    let rep = pick_usize(args.rep, &r.file, "rep")?.unwrap_or(0);
    let config = scenario_config(&args.scenario, p, Some(1), &r)?;
    let (train, test) = generate_scenario(&config, rep)?;
    let dir = r
        .out
        .ok_or_else(|| Error::InvalidConfig("simulate needs --out for the output directory".into()))?;
    std::fs::create_dir_all(&dir)?;
    let header = format!(
        "# scenario={} n={} p={} correlated={} shift={} df={} seed={} rep={}\n",
        config.scenario.number(),
        config.n,
        config.p,
        config.correlated,
        config.shift,
        config.df,
        config.seed,
        rep
    );
    for (name, data) in [("train.csv", &train), ("test.csv", &test)] {
        let mut buf = header.clone().into_bytes();
        io::write_dataset(&mut buf, data, &r.label_col)?;
        std::fs::write(dir.join(name), buf)?;
    }
    Ok(())
}

fn augment(args: AugmentArgs) -> Result<()> {
    let r = resolve_common(&args.common)?;
    let data = io::load_dataset(&args.data, &r.label_col)?;
    let extra = pick_usize(args.extra, &r.file, "extra")?.unwrap_or(45);
    let wide = augment_noise(&data, extra, r.seed)?;
    let mut buf = format!("# augment extra={extra} seed={}\n", r.seed).into_bytes();
    io::write_dataset(&mut buf, &wide, &r.label_col)?;
    emit(r.out.as_deref(), std::str::from_utf8(&buf).expect("utf8"))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Loo(a) => loo(a),
        Command::TheoryCurve(a) => theory_curve(a),
        Command::Simulate(a) => simulate(a),
        Command::Augment(a) => augment(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_lists() {
        let g = parse_grid("0.25, 0.5,0.75").unwrap();
        assert_eq!(g.len(), 3);
        assert!(parse_grid("0.5,1.0").is_err());
        assert_eq!(parse_list::<usize>("10,50,100", "p").unwrap(), vec![10, 50, 100]);
        assert!(parse_list::<usize>("10,x", "p").is_err());
    }

    #[test]
    fn config_file_values_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 9\ntheta_grid = [0.25, 0.5]\nspread = 0.1\nclip-weights = true\nn = 40\n",
        )
        .unwrap();
        let common = Common {
            config: Some(path),
            ..Default::default()
        };
        let r = resolve_common(&common).unwrap();
        assert_eq!(r.seed, 9);
        let c = dqc_config(&DqcArgs::default(), &r).unwrap();
        assert_eq!(c.theta_grid.len(), 2);
        assert_eq!(c.spread, 0.1);
        assert!(c.clip_nonnegative_weights);
        let flags = DqcArgs {
            spread: Some(0.5),
            ..Default::default()
        };
        assert_eq!(dqc_config(&flags, &r).unwrap().spread, 0.5);
        let s = scenario_config(&ScenarioArgs::default(), 5, None, &r).unwrap();
        assert_eq!((s.n, s.p, s.seed), (40, 5, 9));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["dirquant", "no-such-command"]), 1);
        assert_eq!(main_with_args(["dirquant", "--help"]), 0);
    }
}
