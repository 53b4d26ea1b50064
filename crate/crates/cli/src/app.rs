//! Command-line parsing, configuration merging and command dispatch.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use frst_core::frst::{frst_forward, frst_inverse, frst_sifted, s_transform_direct, s_transform_spectral};
use frst_core::function_spaces::{
    bmo_kappa_norm, bmo_norm, default_scales, hardy_kappa_norm, hardy_norm, lp_kappa_norm, mean_bound_m,
};
use frst_core::inequality_lab::{build_corpus, run_suite, SuiteConfig};
use frst_core::model::{all_intervals, classify_order};
use frst_core::windows::window_sigma;
use frst_core::{Branch, Grid, RowMeta, Signal, TestFn, TfMatrix, TransformMode, Weight, Window};
use num_complex::Complex;

use crate::error::{CliError, Result};
use crate::io::{emit_matrix, ingest, read_matrix_csv, uniform_grid, write_signal_csv, InputFormat};

#[derive(Debug, Parser)]
#[command(name = "frst-lab", version, about = "Fractional S-transform lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Fractional S-transform of a signal; writes matrix CSVs and a PGM heatmap
    Transform(Options),
    /// Classical S-transform of a signal (`--mode fast` uses the Fourier route)
    Stransform(Options),
    /// Reconstruct a signal from the matrix CSVs written by `transform`
    Inverse(Options),
    /// Print BMO, Hardy and weighted norm estimates of a signal
    Norms(Options),
    /// Run the inequality suite and write report.json
    Verify(Options),
    /// Write the built-in signal corpus as CSV files
    Demo(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    Const,
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Wav,
}

/// Flags shared by every command. Any flag may also come from a
/// `key=value` file given with `--config`; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Fractional order a in [0, 4)
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Window scale k > 0
    #[arg(long)]
    pub k: Option<f64>,
    /// Window exponent p > 0
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "xi-min", allow_negative_numbers = true)]
    pub xi_min: Option<f64>,
    #[arg(long = "xi-max", allow_negative_numbers = true)]
    pub xi_max: Option<f64>,
    #[arg(long = "xi-count")]
    pub xi_count: Option<usize>,
    #[arg(long, value_enum)]
    pub weight: Option<WeightKind>,
    /// Exponent s of the polynomial weight (1 + |x|)^s
    #[arg(long = "weight-s")]
    pub weight_s: Option<f64>,
    /// Weight certificate constant C
    #[arg(long = "weight-C")]
    pub weight_c: Option<f64>,
    /// Weight certificate exponent N
    #[arg(long = "weight-N")]
    pub weight_n: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(short = 'i', long)]
    pub input: Option<PathBuf>,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
    /// Input format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// key=value settings file; `suite.<name>` keys tune `verify` and `demo`
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandKind {
    Transform,
    Stransform,
    Inverse,
    Norms,
    Verify,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSelection {
    pub kind: WeightKind,
    pub s: f64,
    pub c: Option<f64>,
    pub n: Option<f64>,
}

impl WeightSelection {
    /// `const` defaults to `(C, N) = (1, 1e-6)`; `poly` to `(1, s)`.
    pub fn build(&self) -> Result<Weight> {
        Ok(match self.kind {
            WeightKind::Const => Weight::constant(self.c.unwrap_or(1.0), self.n.unwrap_or(1e-6))?,
            WeightKind::Poly if self.c.is_none() && self.n.is_none() => Weight::polynomial(self.s)?,
            WeightKind::Poly => {
                let s = self.s;
                let name = format!("poly(s={s})");
                Weight::new(name, self.c.unwrap_or(1.0), self.n.unwrap_or(s), move |x: f64| (1.0 + x.abs()).powf(s))?
            }
        })
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub a: f64,
    pub k: f64,
    pub p: f64,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub xi_count: Option<usize>,
    pub weight: WeightSelection,
    pub mode: TransformMode,
    pub format: Option<InputFormat>,
    pub suite: SuiteConfig,
}

fn read_settings(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(path, format!("line {}: expected key=value", n + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn setting<V: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>> {
    map.get(key)
        .map(|v| v.parse().map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}"))))
        .transpose()
}

fn enum_setting<V: ValueEnum>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>> {
    map.get(key)
        .map(|v| V::from_str(v, true).map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}"))))
        .transpose()
}

const FILE_KEYS: [&str; 15] = [
    "a", "k", "p", "xi-min", "xi-max", "xi-count", "weight", "weight-s", "weight-C", "weight-N", "seed", "mode",
    "input", "output", "format",
];

impl RunConfig {
    pub fn resolve(command: &Command) -> Result<Self> {
        let (kind, opts) = match command {
            Command::Transform(o) => (CommandKind::Transform, o),
            Command::Stransform(o) => (CommandKind::Stransform, o),
            Command::Inverse(o) => (CommandKind::Inverse, o),
            Command::Norms(o) => (CommandKind::Norms, o),
            Command::Verify(o) => (CommandKind::Verify, o),
            Command::Demo(o) => (CommandKind::Demo, o),
        };
        let file = match &opts.config {
            Some(path) => read_settings(path)?,
            None => BTreeMap::new(),
        };
        let mut suite = SuiteConfig::default();
        for (key, value) in &file {
            if let Some(name) = key.strip_prefix("suite.") {
                suite.set(name, value).map_err(|e| CliError::Usage(format!("config: {e}")))?;
            } else if !FILE_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config: unknown key {key:?}")));
            }
        }
        if let Some(seed) = opts.seed.or(setting(&file, "seed")?) {
            suite.seed = seed;
        }

        let a = opts.a.or(setting(&file, "a")?).unwrap_or(1.0);
        if !(0.0..4.0).contains(&a) {
            return Err(CliError::Usage(format!("order a = {a} is outside [0, 4)")));
        }
        let k = opts.k.or(setting(&file, "k")?).unwrap_or(1.0);
        let p = opts.p.or(setting(&file, "p")?).unwrap_or(1.0);
        if !(k > 0.0 && p > 0.0 && k.is_finite() && p.is_finite()) {
            return Err(CliError::Usage(format!("window parameters k = {k}, p = {p} must be > 0")));
        }
        let weight = WeightSelection {
            kind: opts.weight.or(enum_setting(&file, "weight")?).unwrap_or(WeightKind::Poly),
            s: opts.weight_s.or(setting(&file, "weight-s")?).unwrap_or(1.0),
            c: opts.weight_c.or(setting(&file, "weight-C")?),
            n: opts.weight_n.or(setting(&file, "weight-N")?),
        };
        let mode = match opts.mode.or(enum_setting(&file, "mode")?).unwrap_or(ModeArg::Fast) {
            ModeArg::Direct => TransformMode::Direct,
            ModeArg::Fast => TransformMode::Fast,
        };
        let format = opts.format.or(enum_setting(&file, "format")?).map(|f| match f {
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Wav => InputFormat::Wav,
        });
        Ok(Self {
            command: kind,
            input: opts.input.clone().or(setting(&file, "input")?),
            output: opts.output.clone().or(setting(&file, "output")?).unwrap_or_else(|| PathBuf::from(".")),
            a,
            k,
            p,
            xi_min: opts.xi_min.or(setting(&file, "xi-min")?),
            xi_max: opts.xi_max.or(setting(&file, "xi-max")?),
            xi_count: opts.xi_count.or(setting(&file, "xi-count")?),
            weight,
            mode,
            format,
            suite,
        })
    }

    fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| CliError::Usage("this command needs -i/--input".into()))
    }

    fn signal(&self) -> Result<Signal> {
        let path = self.input()?;
        ingest(path, self.format.unwrap_or_else(|| InputFormat::from_path(path)))
    }

    fn window(&self) -> Result<Window> {
        Ok(Window::new(self.k, self.p)?)
    }

    /// Requested frequency grid; unset ends default to the positive FFT
    /// bins of the input grid (zero bin excluded).
    fn xi_grid(&self, time: &Grid) -> Result<Grid> {
        let bins = Grid::positive_bins(time)?;
        let min = self.xi_min.unwrap_or(bins.start());
        let max = self.xi_max.unwrap_or(bins.last());
        let count = self.xi_count.unwrap_or(bins.count());
        if count < 2 || !(max > min) {
            return Err(CliError::Usage(format!("frequency range [{min}, {max}] with {count} points is empty")));
        }
        Ok(Grid::linspace(min, max, count)?)
    }
}

fn report_matrix(tf: &TfMatrix, dir: &Path) -> Result<()> {
    let files = emit_matrix(tf, dir)?;
    let edge: usize = tf.row_meta().iter().map(|m| m.edge_columns).sum();
    println!(
        "{} x {} matrix (xi x tau) written to {}; {edge} cells have window support past the signal edges",
        tf.rows(),
        tf.cols(),
        dir.display()
    );
    for f in files {
        println!("  {}", f.display());
    }
    Ok(())
}

fn transform(cfg: &RunConfig) -> Result<()> {
    let f = cfg.signal()?;
    let order = classify_order(cfg.a)?;
    let spec = cfg.window()?;
    let xi = cfg.xi_grid(f.grid())?;
    let tf = match order.branch() {
        Branch::Generic => frst_forward(&f, &order, &spec, f.grid(), &xi, cfg.mode)?,
        Branch::Identity | Branch::Reflection => frst_sifted(&f, &order, &spec, f.grid(), &xi)?,
    };
    report_matrix(&tf, &cfg.output)
}

fn stransform(cfg: &RunConfig) -> Result<()> {
    let f = cfg.signal()?;
    let xi = cfg.xi_grid(f.grid())?;
    let tf = match cfg.mode {
        TransformMode::Direct => s_transform_direct(&f, cfg.k, f.grid(), &xi)?,
        TransformMode::Fast => s_transform_spectral(&f, cfg.k, &xi)?,
    };
    report_matrix(&tf, &cfg.output)
}

fn inverse(cfg: &RunConfig) -> Result<()> {
    let input = cfg.input()?;
    let dir = if input.is_dir() { input.to_path_buf() } else { input.parent().unwrap_or(Path::new(".")).to_path_buf() };
    let re_path = dir.join("frst_re.csv");
    let im_path = dir.join("frst_im.csv");
    let re = read_matrix_csv(&re_path)?;
    let im = read_matrix_csv(&im_path)?;
    if re.tau != im.tau || re.xi != im.xi {
        return Err(CliError::parse(&im_path, "axes differ from frst_re.csv"));
    }
    let tau = uniform_grid(&re.tau, &re_path)?;
    let xi = uniform_grid(&re.xi, &re_path)?;
    let order = classify_order(cfg.a)?;
    order.amplitude()?;
    let spec = cfg.window()?;
    let rows = xi
        .points()
        .map(|x| Ok(RowMeta { sigma: window_sigma(&spec, &order, x)?, edge_columns: 0 }))
        .collect::<frst_core::Result<Vec<_>>>()?;
    let values = re.values.iter().zip(&im.values).map(|(&r, &i)| Complex::new(r, i)).collect();
    let tf = TfMatrix::new(tau, xi, values, order, spec, rows)?;
    let signal = frst_inverse(&tf, &order, &tau)?;
    let out = cfg.output.join("signal.csv");
    write_signal_csv(&out, &signal)?;
    println!("reconstructed {} samples to {}", signal.len(), out.display());
    Ok(())
}

fn norms(cfg: &RunConfig) -> Result<()> {
    let f = cfg.signal()?;
    let family = all_intervals(f.len(), cfg.suite.interval_cap);
    let phi = TestFn::gaussian();
    let scales = default_scales(f.grid());
    let w = cfg.weight.build()?;
    let rows = [
        ("bmo", bmo_norm(&f, &family)?),
        ("hardy", hardy_norm(&f, &phi, &scales)?),
        ("bmo_kappa", bmo_kappa_norm(&f, &w, &family)?),
        ("hardy_kappa", hardy_kappa_norm(&f, &phi, &scales, &w)?),
        ("l1_kappa", lp_kappa_norm(&f, 1.0, &w)?),
        ("m", mean_bound_m(&f, &family)?),
    ];
    println!("# {} samples, {} intervals, {} scales, weight {}", f.len(), family.len(), scales.len(), w.name());
    println!("{:<12} {:>18}", "estimator", "value");
    for (name, value) in rows {
        println!("{name:<12} {value:>18.10e}");
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<()> {
    let report = run_suite(&cfg.suite)?;
    fs::create_dir_all(&cfg.output).map_err(|e| CliError::io(&cfg.output, e))?;
    let path = cfg.output.join("report.json");
    fs::write(&path, report.to_json()).map_err(|e| CliError::io(&path, e))?;
    println!("{} checks, {} failed; report written to {}", report.summary.total, report.summary.failed, path.display());
    for (family, margin) in &report.summary.min_margin_by_family {
        println!("  {family:<32} min margin {margin:.6e}");
    }
    for c in report.failures().take(10) {
        println!("  FAIL {} lhs={:.6e} rhs={:.6e} {:?}", c.check_id, c.lhs, c.rhs, c.params);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed { failed: report.summary.failed, total: report.summary.total })
    }
}

fn demo(cfg: &RunConfig) -> Result<()> {
    cfg.suite.validate()?;
    let corpus = build_corpus(&cfg.suite)?;
    let mut count = 0;
    for (name, signal) in corpus.general.iter().chain(&corpus.nonnegative) {
        write_signal_csv(&cfg.output.join(format!("{name}.csv")), signal)?;
        count += 1;
    }
    println!("wrote {count} corpus signals to {}", cfg.output.display());
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        CommandKind::Transform => transform(cfg),
        CommandKind::Stransform => stransform(cfg),
        CommandKind::Inverse => inverse(cfg),
        CommandKind::Norms => norms(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Demo => demo(cfg),
    }
}

/// Sizes the global rayon pool from `FRST_LAB_THREADS` when set.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(value) = value else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("FRST_LAB_THREADS = {value:?} must be an integer >= 1")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(args).unwrap();
        RunConfig::resolve(&cli.command).unwrap()
    }

    #[test]
    fn defaults_and_flags() {
        let cfg = parse(&["frst-lab", "transform", "-i", "x.csv"]);
        assert_eq!(cfg.a, 1.0);
        assert_eq!(cfg.mode, TransformMode::Fast);
        assert_eq!(cfg.weight.kind, WeightKind::Poly);
        let cfg = parse(&["frst-lab", "norms", "--weight", "const", "--weight-C", "2", "--weight-N", "0.5", "--mode", "direct"]);
        let w = cfg.weight.build().unwrap();
        assert_eq!((w.c(), w.n()), (2.0, 0.5));
        assert_eq!(cfg.mode, TransformMode::Direct);
    }

    #[test]
    fn order_range_is_a_usage_error() {
        let cli = Cli::try_parse_from(["frst-lab", "transform", "--a", "5"]).unwrap();
        let err = RunConfig::resolve(&cli.command).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("[0, 4)"));
        let cli = Cli::try_parse_from(["frst-lab", "transform", "--a", "-0.5"]).unwrap();
        assert!(RunConfig::resolve(&cli.command).is_err());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# settings\na = 0.5\nk=2\nsuite.general_signals = 3\nseed=99\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["frst-lab", "verify", "--config", p, "--k", "3"]);
        assert_eq!((cfg.a, cfg.k), (0.5, 3.0));
        assert_eq!(cfg.suite.general_signals, 3);
        assert_eq!(cfg.suite.seed, 99);
        fs::write(&path, "bogus = 1\n").unwrap();
        let cli = Cli::try_parse_from(["frst-lab", "verify", "--config", p]).unwrap();
        assert_eq!(RunConfig::resolve(&cli.command).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn default_frequency_grid_skips_zero() {
        let cfg = parse(&["frst-lab", "transform"]);
        let t = Grid::new(0.0, 0.5, 8).unwrap();
        let xi = cfg.xi_grid(&t).unwrap();
        assert_eq!(xi.start(), 0.25);
        assert_eq!(xi.count(), 4);
    }

    #[test]
    fn thread_setting() {
        assert!(configure_threads(None).is_ok());
        assert_eq!(configure_threads(Some("0")).unwrap_err().exit_code(), 2);
        assert_eq!(configure_threads(Some("many")).unwrap_err().exit_code(), 2);
    }
}
