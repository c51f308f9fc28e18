//! The `fibens` command line: `run`, `weights`, `stability` and `curves`.
//!
//! Run settings come from four layers, later ones winning: built-in
//! defaults, a flat `key = value` file given by `--config`, the
//! `FIBENS_SEED` environment variable, and command-line flags.
//!
//! Exit codes are 0 on success, 2 for usage and configuration errors and 3
//! for numerical failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ensemble::RecursionOperator;
use crate::error::{Error, Result};
use crate::experiments::{
    emit_curves, parse_methods, run_experiment_with_threads, Curves, ExperimentConfig,
    ExperimentResult, TargetSpec,
};
use crate::learners::Family;
use crate::weights::{
    sum_squared_weights, tail_weight, weight_spectrum, weights_from_law, WeightLaw, PHI,
};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "FIBENS_SEED";

/// Keys accepted in a run configuration file.
pub const CONFIG_KEYS: [&str; 18] = [
    "target",
    "family",
    "m_learners",
    "n_train",
    "n_test",
    "noise_sd",
    "ridge_lambda",
    "rff_features",
    "bandwidth_min",
    "bandwidth_max",
    "max_degree",
    "reps",
    "seed",
    "grid_points",
    "methods",
    "beta",
    "gamma",
    "out_dir",
];

#[derive(Debug, Parser)]
#[command(
    name = "fibens",
    version,
    about = "Fibonacci-weighted and orthogonalized regression ensembles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Monte Carlo experiments and write results.csv plus curve tables.
    Run(RunArgs),
    /// Print a normalized weight vector and its diagnostics.
    Weights(WeightsArgs),
    /// Report the roots and stability verdicts of the recursion operator.
    Stability(StabilityArgs),
    /// Write curve and point tables for a single replication.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma list of targets: sin, sinc.
    #[arg(long)]
    pub target: Option<String>,
    /// Comma list of learner families: rff, poly.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long = "m-learners", visible_alias = "m")]
    pub m_learners: Option<String>,
    #[arg(long = "n-train")]
    pub n_train: Option<String>,
    #[arg(long = "n-test")]
    pub n_test: Option<String>,
    #[arg(long = "noise-sd")]
    pub noise_sd: Option<String>,
    #[arg(long = "ridge-lambda")]
    pub ridge_lambda: Option<String>,
    #[arg(long = "rff-features")]
    pub rff_features: Option<String>,
    /// Shortest RFF lengthscale as a fraction of the interval width.
    #[arg(long = "bandwidth-min")]
    pub bandwidth_min: Option<String>,
    /// Longest RFF lengthscale as a fraction of the interval width.
    #[arg(long = "bandwidth-max")]
    pub bandwidth_max: Option<String>,
    #[arg(long = "max-degree")]
    pub max_degree: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long = "grid-points")]
    pub grid_points: Option<String>,
    /// Comma list: uniform, fibonacci, orthogonal_rb, flow or a law such as `gaussian(mu=5;sigma=2)`.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<String>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<String>,
    /// Worker threads for replications; 1 runs sequentially.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let flags = [
            ("target", &self.target),
            ("family", &self.family),
            ("m_learners", &self.m_learners),
            ("n_train", &self.n_train),
            ("n_test", &self.n_test),
            ("noise_sd", &self.noise_sd),
            ("ridge_lambda", &self.ridge_lambda),
            ("rff_features", &self.rff_features),
            ("bandwidth_min", &self.bandwidth_min),
            ("bandwidth_max", &self.bandwidth_max),
            ("max_degree", &self.max_degree),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("grid_points", &self.grid_points),
            ("methods", &self.methods),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("out_dir", &self.out_dir),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Replication whose fits are written.
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
}

#[derive(Debug, Clone, Args)]
pub struct WeightsArgs {
    /// uniform, fibonacci, geometric, gaussian, logistic, gamma, beta, pareto or lognormal.
    #[arg(long)]
    pub law: String,
    #[arg(long)]
    pub m: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

impl WeightsArgs {
    fn param(&self, key: &str) -> Option<f64> {
        match key {
            "r" => self.r,
            "mu" => self.mu,
            "sigma" => self.sigma,
            "a" => self.a,
            "b" => self.b,
            "k" => self.k,
            "theta" => self.theta,
            "alpha" => self.alpha,
            "beta" => self.beta,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
}

/// Fully resolved settings for `run` and `curves`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub targets: Vec<TargetSpec>,
    pub families: Vec<Family>,
    /// Every field except `target` and `family` applies to all experiments.
    pub template: ExperimentConfig,
    pub out_dir: PathBuf,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            targets: vec![TargetSpec::sin(), TargetSpec::sinc()],
            families: vec![Family::Rff, Family::Poly],
            template: ExperimentConfig::new(TargetSpec::sin(), Family::Rff),
            out_dir: PathBuf::from("results"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

fn parse_list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(|e| Error::Config(format!("{key}: {e}"))))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

impl RunSettings {
    /// Applies one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.template;
        match key {
            "target" => self.targets = parse_list(key, value, str::parse)?,
            "family" => self.families = parse_list(key, value, str::parse)?,
            "m_learners" => t.m_learners = parse_value(key, value)?,
            "n_train" => t.n_train = parse_value(key, value)?,
            "n_test" => t.n_test = parse_value(key, value)?,
            "noise_sd" => t.noise_sd = parse_value(key, value)?,
            "ridge_lambda" => t.ridge_lambda = parse_value(key, value)?,
            "rff_features" => t.rff_features = parse_value(key, value)?,
            "bandwidth_min" => t.bandwidth_min = parse_value(key, value)?,
            "bandwidth_max" => t.bandwidth_max = parse_value(key, value)?,
            "max_degree" => t.max_degree = parse_value(key, value)?,
            "reps" => {
                let reps: i64 = parse_value(key, value)?;
                if reps < 1 {
                    return Err(Error::Config(format!(
                        "reps: must be at least 1, got {reps}"
                    )));
                }
                t.replications = reps as usize;
            }
            "seed" => t.seed = parse_value(key, value)?,
            "grid_points" => t.grid_points = parse_value(key, value)?,
            "methods" => {
                t.methods =
                    parse_methods(value).map_err(|e| Error::Config(format!("methods: {e}")))?
            }
            "beta" => t.beta = parse_value(key, value)?,
            "gamma" => t.gamma = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat config text: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            self.apply(key.trim(), value)?;
        }
        Ok(())
    }

    /// Layers defaults, the config file, `env_seed` and flags.
    pub fn resolve(args: &RunArgs, env_seed: Option<&str>) -> Result<Self> {
        let mut s = Self::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("config: cannot read {}: {e}", path.display()))
            })?;
            s.apply_text(&text)?;
        }
        if let Some(seed) = env_seed {
            s.template.seed = parse_value(SEED_ENV, seed)?;
        }
        for (key, value) in args.overrides() {
            s.apply(key, value)?;
        }
        for cfg in s.experiments() {
            cfg.validate()?;
        }
        Ok(s)
    }

    /// One config per (target, family) pair, in that order.
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for target in &self.targets {
            for family in &self.families {
                out.push(ExperimentConfig {
                    target: *target,
                    family: *family,
                    ..self.template.clone()
                });
            }
        }
        out
    }
}

/// `<target>_<family>`, e.g. `sin_rff`.
pub fn experiment_name(cfg: &ExperimentConfig) -> String {
    format!("{}_{}", cfg.target.name(), cfg.family)
}

pub const RESULTS_HEADER: &str = "experiment,model,mean_test_mse,sd_test_mse,mean_ise,sd_ise";

/// One `results.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub model: String,
    pub mean_test_mse: f64,
    pub sd_test_mse: f64,
    pub mean_ise: f64,
    pub sd_ise: f64,
}

/// Flattens results into rows sorted by (experiment, model).
pub fn result_rows(results: &[ExperimentResult]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = results
        .iter()
        .flat_map(|r| {
            let experiment = experiment_name(&r.config);
            r.methods.iter().map(move |m| ResultRow {
                experiment: experiment.clone(),
                model: m.method.label(),
                mean_test_mse: m.mean_test_mse,
                sd_test_mse: m.sd_test_mse,
                mean_ise: m.mean_ise,
                sd_ise: m.sd_ise,
            })
        })
        .collect();
    rows.sort_by(|a, b| (&a.experiment, &a.model).cmp(&(&b.experiment, &b.model)));
    rows
}

/// Floats are written in shortest round-trip form.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.experiment, r.model, r.mean_test_mse, r.sd_test_mse, r.mean_ise, r.sd_ise
        );
    }
    out
}

/// Inverse of [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::Config("results: unexpected header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Config(format!("results: malformed row `{line}`")));
            }
            Ok(ResultRow {
                experiment: f[0].to_string(),
                model: f[1].to_string(),
                mean_test_mse: parse_value("mean_test_mse", f[2])?,
                sd_test_mse: parse_value("sd_test_mse", f[3])?,
                mean_ise: parse_value("mean_ise", f[4])?,
                sd_ise: parse_value("sd_ise", f[5])?,
            })
        })
        .collect()
}

pub fn curves_csv(c: &Curves) -> String {
    let mut out = c.header().join(",");
    out.push('\n');
    for i in 0..c.x.len() {
        let _ = write!(out, "{},{}", c.x[i], c.f_true[i]);
        for (_, fit) in &c.fits {
            let _ = write!(out, ",{}", fit[i]);
        }
        out.push('\n');
    }
    out
}

pub fn points_csv(c: &Curves) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in c.points.xs().iter().zip(c.points.ys()) {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Config(format!("out_dir: cannot write {}: {e}", path.display())))
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("out_dir: cannot create {}: {e}", dir.display())))
}

fn write_curves(dir: &Path, cfg: &ExperimentConfig, rep: usize) -> Result<()> {
    let curves = emit_curves(cfg, rep)?;
    let name = experiment_name(cfg);
    write_file(
        &dir.join(format!("curves_{name}.csv")),
        &curves_csv(&curves),
    )?;
    write_file(
        &dir.join(format!("points_{name}.csv")),
        &points_csv(&curves),
    )
}

/// Aligned text table of result rows.
pub fn format_table(rows: &[ResultRow]) -> String {
    let ew = rows
        .iter()
        .map(|r| r.experiment.len())
        .max()
        .unwrap_or(0)
        .max("experiment".len());
    let mw = rows
        .iter()
        .map(|r| r.model.len())
        .max()
        .unwrap_or(0)
        .max("model".len());
    let mut out = format!(
        "{:<ew$}  {:<mw$}  {:>10}  {:>10}  {:>10}  {:>10}\n",
        "experiment", "model", "test_mse", "sd", "ise", "sd"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<ew$}  {:<mw$}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}",
            r.experiment, r.model, r.mean_test_mse, r.sd_test_mse, r.mean_ise, r.sd_ise
        );
    }
    out
}

fn cmd_run(args: &RunArgs, env_seed: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let settings = RunSettings::resolve(args, env_seed)?;
    create_out_dir(&settings.out_dir)?;
    let mut results = Vec::new();
    for cfg in settings.experiments() {
        results.push(run_experiment_with_threads(&cfg, args.threads)?);
        write_curves(&settings.out_dir, &cfg, 0)?;
    }
    let rows = result_rows(&results);
    write_file(&settings.out_dir.join("results.csv"), &results_csv(&rows))?;
    write!(out, "{}", format_table(&rows)).map_err(io_error)?;
    writeln!(
        out,
        "wrote {}",
        settings.out_dir.join("results.csv").display()
    )
    .map_err(io_error)
}

fn cmd_curves(args: &CurvesArgs, env_seed: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let settings = RunSettings::resolve(&args.run, env_seed)?;
    create_out_dir(&settings.out_dir)?;
    for cfg in settings.experiments() {
        write_curves(&settings.out_dir, &cfg, args.rep)?;
        let name = experiment_name(&cfg);
        writeln!(out, "wrote curves_{name}.csv and points_{name}.csv").map_err(io_error)?;
    }
    Ok(())
}

/// Four decimals with trailing zeros trimmed.
fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn short_list(v: &[f64]) -> String {
    format!(
        "[{}]",
        v.iter().map(|x| short(*x)).collect::<Vec<_>>().join(", ")
    )
}

fn cmd_weights(args: &WeightsArgs, out: &mut dyn Write) -> Result<()> {
    let law = WeightLaw::from_params(&args.law, |k| args.param(k))
        .map_err(|e| Error::Config(e.to_string()))?;
    let w = weights_from_law(&law, args.m)?;
    let mut text = String::new();
    let _ = writeln!(text, "law: {law}");
    let _ = writeln!(text, "M: {}", args.m);
    let _ = writeln!(text, "weights: {}", short_list(&w));
    let _ = writeln!(text, "sum of squares: {}", short(sum_squared_weights(&w)));
    let _ = writeln!(text, "spectrum: {}", short_list(&weight_spectrum(&w)));
    if law == WeightLaw::Fibonacci {
        let _ = writeln!(text, "sum of squares limit phi^-3: {:.6}", PHI.powi(-3));
        let _ = writeln!(text, "tail  weight      phi^-(k+2)  ratio");
        for k in 0..args.m.min(6) {
            let t = tail_weight(args.m, k)?;
            let limit = PHI.powi(-(k as i32 + 2));
            let _ = writeln!(text, "{k:<4}  {t:<10.6}  {limit:<10.6}  {:.6}", t / limit);
        }
    }
    write!(out, "{text}").map_err(io_error)
}

fn format_complex(z: num_complex::Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn cmd_stability(args: &StabilityArgs, out: &mut dyn Write) -> Result<()> {
    if !(args.beta.is_finite() && args.gamma.is_finite()) {
        return Err(Error::Config("beta and gamma must be finite".into()));
    }
    let r = RecursionOperator::new(args.beta, args.gamma).is_stable();
    let verdict = |ok: bool| if ok { "STABLE" } else { "UNSTABLE" };
    writeln!(out, "beta: {}  gamma: {}", args.beta, args.gamma).map_err(io_error)?;
    writeln!(
        out,
        "roots: {}, {}",
        format_complex(r.roots.0),
        format_complex(r.roots.1)
    )
    .map_err(io_error)?;
    writeln!(out, "spectral radius: {:.6}", r.spectral_radius).map_err(io_error)?;
    writeln!(
        out,
        "inequality beta^2 + 4 gamma < 4: {}",
        verdict(r.inequality_holds)
    )
    .map_err(io_error)?;
    writeln!(out, "spectral radius < 1: {}", verdict(r.stable)).map_err(io_error)
}

fn io_error(e: io::Error) -> Error {
    Error::Config(format!("output: {e}"))
}

/// Exit code for an error: 2 for configuration or domain, 3 for numerical.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Numerical(_) | Error::Normalization(_) => 3,
    }
}

/// Executes a parsed command, writing reports to `out`.
pub fn execute(cli: &Cli, env_seed: Option<&str>, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, env_seed, out),
        Command::Weights(a) => cmd_weights(a, out),
        Command::Stability(a) => cmd_stability(a, out),
        Command::Curves(a) => cmd_curves(a, env_seed, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let stdout = io::stdout();
    match execute(&cli, env_seed.as_deref(), &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fibens").chain(args.iter().copied())).unwrap()
    }

    fn output(args: &[&str]) -> String {
        let mut buf = Vec::new();
        execute(&parse(args), None, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn config_text_and_comments() {
        let mut s = RunSettings::default();
        s.apply_text("# sweep\ntarget = sinc\nfamily=poly  # ladder\n\nreps = 7\nmethods = uniform, gaussian(mu=5;sigma=2)\n")
            .unwrap();
        assert_eq!(s.targets, vec![TargetSpec::sinc()]);
        assert_eq!(s.families, vec![Family::Poly]);
        assert_eq!(s.template.replications, 7);
        assert_eq!(s.template.methods.len(), 2);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunSettings::default()
            .apply_text("n_trian = 5")
            .unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("n_trian")));
        assert_eq!(exit_code(&err), 2);
        assert!(RunSettings::default().apply_text("just words").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "seed = 5\nreps = 3\n").unwrap();
        let cfg = path.to_str().unwrap();
        let from_file = RunSettings::resolve(&parse_run(&["--config", cfg]), None).unwrap();
        assert_eq!(
            (from_file.template.seed, from_file.template.replications),
            (5, 3)
        );
        let from_env = RunSettings::resolve(&parse_run(&["--config", cfg]), Some("11")).unwrap();
        assert_eq!(from_env.template.seed, 11);
        let from_flag =
            RunSettings::resolve(&parse_run(&["--config", cfg, "--seed", "13"]), Some("11"))
                .unwrap();
        assert_eq!(from_flag.template.seed, 13);
        assert!(RunSettings::resolve(&parse_run(&[]), Some("eleven")).is_err());
    }

    fn parse_run(args: &[&str]) -> RunArgs {
        let mut full = vec!["run"];
        full.extend_from_slice(args);
        match parse(&full).command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_reps_names_the_key() {
        let err = RunSettings::resolve(&parse_run(&["--reps", "0"]), None).unwrap_err();
        assert!(err.to_string().contains("reps"));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn results_round_trip() {
        let rows = vec![
            ResultRow {
                experiment: "sin_rff".into(),
                model: "Orthogonal RB".into(),
                mean_test_mse: 0.1 + 0.2,
                sd_test_mse: 1.0 / 3.0,
                mean_ise: 2.5e-7,
                sd_ise: 0.0,
            },
            ResultRow {
                experiment: "sin_rff".into(),
                model: "Uniform".into(),
                mean_test_mse: std::f64::consts::PI,
                sd_test_mse: 1e300,
                mean_ise: 5e-324,
                sd_ise: 123456789.0,
            },
        ];
        assert_eq!(parse_results_csv(&results_csv(&rows)).unwrap(), rows);
    }

    #[test]
    fn fibonacci_weights_report() {
        let text = output(&["weights", "--law", "fibonacci", "--m", "5"]);
        assert!(
            text.contains("weights: [0.0833, 0.0833, 0.1667, 0.25, 0.4167]"),
            "{text}"
        );
        assert!(text.contains("phi^-(k+2)"));
    }

    #[test]
    fn uniform_and_pareto_reports() {
        let text = output(&["weights", "--law", "uniform", "--m", "4"]);
        assert!(text.contains("weights: [0.25, 0.25, 0.25, 0.25]"));
        assert!(text.contains("spectrum: [1, 0, 0, 0]"));
        let text = output(&["weights", "--law", "pareto", "--alpha", "1.0", "--m", "3"]);
        assert!(text.contains("weights: [0.5455, 0.2727, 0.1818]"), "{text}");
    }

    #[test]
    fn unknown_law_is_a_config_error() {
        let mut buf = Vec::new();
        let err = execute(
            &parse(&["weights", "--law", "zipf", "--m", "3"]),
            None,
            &mut buf,
        )
        .unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn stability_reports() {
        let text = output(&["stability", "--beta", "1", "--gamma", "1"]);
        assert!(text.contains("roots: 1.618034, -0.618034"));
        assert!(text.contains("spectral radius: 1.618034"));
        assert!(text.contains("spectral radius < 1: UNSTABLE"));
        let text = output(&["stability", "--beta", "0", "--gamma", "0"]);
        assert!(text.contains("spectral radius: 0.000000") && text.contains("< 1: STABLE"));
        let text = output(&["stability", "--beta", "1.9", "--gamma", "0.05"]);
        assert!(text.contains("< 4: STABLE") && text.contains("< 1: UNSTABLE"));
        assert!(text.contains("spectral radius: 1.925961"));
        let text = output(&["stability", "--beta", "-0.5", "--gamma", "-0.25"]);
        assert!(text.contains('i'), "{text}");
    }

    #[test]
    fn short_formatting() {
        assert_eq!(short(0.25), "0.25");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(-1e-9), "0");
        assert_eq!(short(1.0 / 12.0), "0.0833");
    }
}
