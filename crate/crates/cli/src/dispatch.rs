//! Argument parsing, validation and the per-subcommand drivers.
//!
//! Exit codes: 0 on success, 1 on numerical or I/O failure, 2 on usage
//! errors (bad flags, parameters outside a domain).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use serde_json::{json, Value};

use stablemult::harmonic_extension::{extend, ExtensionKernel};
use stablemult::multiplier_op::{
    apply_t, g_function, lp_probe, pairing_check, symbol_m, symbol_m_truncated, ProfileKind,
};
use stablemult::spectral::translate;
use stablemult::stable_density::{subordinator_density, StableDensity};
use stablemult::stable_mc::{
    green_functional, harmonic_check, jump_martingale_stats, simulate_until_exit, PathConfig,
};
use stablemult::{
    DensityEvalSpec, Error, GridSpec, MultiplierProfile, SampledField, StableParams, TQuadSpec,
};

use crate::config::{GreenFn, RunConfig, Subcommand};
use crate::emit::{self, Cell, Table};
use crate::fields;
use crate::verify;

/// Environment variable that fixes the worker-thread count.
pub const THREADS_ENV: &str = "STABLEMULT_THREADS";

macro_rules! options {
    ($($field:ident : $help:literal),* $(,)?) => {
        /// Options shared by every subcommand; each maps to the
        /// configuration key of the same name.
        #[derive(Args, Debug, Default, Clone)]
        pub struct Opts {
            /// Flat key=value file, or a JSON report to replay.
            #[arg(long)]
            config: Option<PathBuf>,
            $(
                #[arg(long, allow_hyphen_values = true, help = $help)]
                $field: Option<String>,
            )*
        }

        impl Opts {
            fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $( if let Some(x) = &self.$field { v.push((stringify!($field), x.as_str())); } )*
                v
            }
        }
    };
}

options! {
    alpha: "Stability index in (0, 2)",
    d: "Dimension (1, 2 or 3)",
    seed: "Seed for every random stream",
    format: "Output format: csv or json",
    output: "Output file (standard output when absent)",
    s: "Times, as a,b,c or lo:hi:count",
    t: "Extension height",
    x: "Points (d = 1) or one point's coordinates; path start",
    j: "Coordinate index of the derivative, 1-based",
    k: "Derivative order, 1 or 2",
    beta: "Index of the one-sided stable law, in (0, 1)",
    xi: "Frequencies",
    n: "Grid size (power of two)",
    length: "Grid period",
    origin: "Left end of the period, or 'centered'",
    field: "Test field: bump, gaussian or cosine",
    center: "Test field centre",
    width: "Test field half-width",
    g_field: "Second field for pairing",
    g_center: "Second field centre",
    g_width: "Second field half-width",
    profile: "Multiplier profile: constant_one, exp_decay or tabulated",
    profile_t: "Abscissae of a tabulated profile",
    profile_values: "Values of a tabulated profile",
    t_min: "Lower end of the t-rule, or 'auto'",
    t_max: "Upper end of the t-rule, or 'auto'",
    n_t: "Nodes of the t-rule, or 'auto'",
    h_policy: "full or truncated",
    singular_cell: "omit or taylor_correct",
    a: "Starting height of the vertical component",
    dt: "Base time step",
    max_steps: "Step budget per path",
    step_growth: "Step growth factor epsilon in h = max(dt, epsilon Z^2)",
    paths: "Number of Monte Carlo paths",
    green_f: "Green functional integrand: exp or indicator",
    p: "Exponents",
    widths: "Half-widths of the L^p family",
    shifts: "Translations of the L^p family, in grid cells",
    suite: "Verification suite: fast or full",
}

#[derive(Parser, Debug)]
#[command(
    name = "stablemult",
    version,
    about = "Stable densities, the multiplier T and path simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Density p(s, x) of the symmetric stable process.
    Density(Opts),
    /// Partial derivative of p(s, x) of order k in coordinate j.
    Derivative(Opts),
    /// Density of the one-sided stable law.
    Subordinator(Opts),
    /// Harmonic extension kernel q_t.
    Kernel(Opts),
    /// Q_t f on a periodic grid.
    Extend(Opts),
    /// The operator T applied to a test field (alpha < 1).
    ApplyT(Opts),
    /// The symbol m(xi).
    Symbol(Opts),
    /// The symbol of T with truncated h-range on the configured t-rule.
    SymbolTruncated(Opts),
    /// The square function G f.
    Gfunction(Opts),
    /// Both sides of the pairing identity.
    Pairing(Opts),
    /// One path of (Y, Z) until exit.
    Simulate(Opts),
    /// The Green functional of the vertical component.
    Green(Opts),
    /// E f(Y at exit) against Q_a f(x).
    Harmonic(Opts),
    /// Small-jump statistics of u(Y, Z).
    Jumps(Opts),
    /// ||T f||_p / ||f||_p over a family of bumps.
    LpProbe(Opts),
    /// Run the acceptance suite.
    Verify(Opts),
}

impl Command {
    fn split(self) -> (Subcommand, Opts) {
        match self {
            Command::Density(o) => (Subcommand::Density, o),
            Command::Derivative(o) => (Subcommand::Derivative, o),
            Command::Subordinator(o) => (Subcommand::Subordinator, o),
            Command::Kernel(o) => (Subcommand::Kernel, o),
            Command::Extend(o) => (Subcommand::Extend, o),
            Command::ApplyT(o) => (Subcommand::ApplyT, o),
            Command::Symbol(o) => (Subcommand::Symbol, o),
            Command::SymbolTruncated(o) => (Subcommand::SymbolTruncated, o),
            Command::Gfunction(o) => (Subcommand::Gfunction, o),
            Command::Pairing(o) => (Subcommand::Pairing, o),
            Command::Simulate(o) => (Subcommand::Simulate, o),
            Command::Green(o) => (Subcommand::Green, o),
            Command::Harmonic(o) => (Subcommand::Harmonic, o),
            Command::Jumps(o) => (Subcommand::Jumps, o),
            Command::LpProbe(o) => (Subcommand::LpProbe, o),
            Command::Verify(o) => (Subcommand::Verify, o),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Shape(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Result of one run: the table and whether the run counts as a success
/// (only `verify` can produce a table and still fail).
pub struct Outcome {
    pub table: Table,
    pub ok: bool,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, ok: true }
    }
}

/// Entry point of the binary.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (sub, opts) = cli.command.split();
    configure_threads();

    let mut cfg = match resolve(sub, &opts) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("stablemult {}: usage error: {msg}", sub.name());
            return 2;
        }
    };
    match run(&mut cfg) {
        Ok(out) => {
            let path = cfg.output_path.clone();
            if let Err(e) = emit::emit(
                &out.table,
                &meta(&cfg),
                cfg.format,
                path.as_deref().map(Path::new),
            ) {
                eprintln!("stablemult {}: {e}", sub.name());
                return 1;
            }
            if out.ok {
                0
            } else {
                eprintln!("stablemult {}: one or more criteria failed", sub.name());
                1
            }
        }
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Usage(m) => ("usage error", m),
                Failure::Numerical(m) => ("numerical error", m),
            };
            eprintln!("stablemult {}: {kind}: {msg}", sub.name());
            f.code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve(sub: Subcommand, opts: &Opts) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(sub);
    if let Some(path) = &opts.config {
        cfg.load(path).map_err(|e| e.0)?;
    }
    for (key, value) in opts.pairs() {
        cfg.set(key, value).map_err(|e| e.0)?;
    }
    Ok(cfg)
}

pub fn meta(cfg: &RunConfig) -> Value {
    json!({
        "subcommand": cfg.subcommand.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
    })
}

/// Run the configured subcommand. Fills defaulted quadrature bounds into
/// `cfg` so that the emitted metadata is fully resolved.
pub fn run(cfg: &mut RunConfig) -> Result<Outcome, Failure> {
    Ok(match cfg.subcommand {
        Subcommand::Density => density(cfg)?.into(),
        Subcommand::Derivative => derivative(cfg)?.into(),
        Subcommand::Subordinator => subordinator(cfg)?.into(),
        Subcommand::Kernel => kernel(cfg)?.into(),
        Subcommand::Extend => extension(cfg)?.into(),
        Subcommand::ApplyT => operator(cfg)?.into(),
        Subcommand::Symbol => symbol(cfg, false)?.into(),
        Subcommand::SymbolTruncated => symbol(cfg, true)?.into(),
        Subcommand::Gfunction => gfunction(cfg)?.into(),
        Subcommand::Pairing => pairing(cfg)?.into(),
        Subcommand::Simulate => simulate(cfg)?.into(),
        Subcommand::Green => green(cfg)?.into(),
        Subcommand::Harmonic => harmonic(cfg)?.into(),
        Subcommand::Jumps => jumps(cfg)?.into(),
        Subcommand::LpProbe => lp(cfg)?.into(),
        Subcommand::Verify => {
            let report = verify::run(cfg.suite, cfg.seed);
            Outcome {
                table: report.table(),
                ok: report.passed(),
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Resolution helpers

fn params(cfg: &RunConfig) -> Result<StableParams, Failure> {
    Ok(StableParams::new(cfg.alpha, cfg.d)?)
}

/// Operator commands need `0 < α < 1` and `d = 1`.
fn operator_params(cfg: &RunConfig) -> Result<StableParams, Failure> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(usage(format!(
            "{} requires alpha in (0, 1), the range where T is well defined; got {}",
            cfg.subcommand.name(),
            cfg.alpha
        )));
    }
    line_params(cfg)
}

fn line_params(cfg: &RunConfig) -> Result<StableParams, Failure> {
    if cfg.d != 1 {
        return Err(usage(format!(
            "{} is one-dimensional; got d = {}",
            cfg.subcommand.name(),
            cfg.d
        )));
    }
    params(cfg)
}

/// Points to evaluate: every entry of `x` when `d = 1`, otherwise `x` as
/// one point.
fn points(cfg: &RunConfig) -> Result<Vec<Vec<f64>>, Failure> {
    if cfg.d == 1 {
        return Ok(cfg.x.iter().map(|&x| vec![x]).collect());
    }
    if cfg.x.len() != cfg.d {
        return Err(usage(format!(
            "x must have {} coordinates when d = {}, got {}",
            cfg.d,
            cfg.d,
            cfg.x.len()
        )));
    }
    Ok(vec![cfg.x.clone()])
}

fn coord_columns(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["x".into()]
    } else {
        (1..=d).map(|i| format!("x{i}")).collect()
    }
}

fn table_with(prefix: &[&str], d: usize, suffix: &[&str]) -> Table {
    let mut cols: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    cols.extend(coord_columns(d));
    cols.extend(suffix.iter().map(|s| s.to_string()));
    Table {
        columns: cols,
        rows: Vec::new(),
    }
}

fn profile(cfg: &RunConfig) -> Result<MultiplierProfile, Failure> {
    Ok(match cfg.profile.kind {
        ProfileKind::ConstantOne => MultiplierProfile::constant_one(),
        ProfileKind::ExpDecay => MultiplierProfile::exp_decay(),
        ProfileKind::Tabulated => {
            MultiplierProfile::tabulated(cfg.profile.t.clone(), cfg.profile.values.clone())?
        }
    })
}

fn grid(cfg: &RunConfig) -> Result<GridSpec, Failure> {
    Ok(fields::grid(&cfg.grid)?)
}

fn field(cfg: &RunConfig, g: GridSpec) -> Result<SampledField, Failure> {
    Ok(fields::field(g, &cfg.field)?)
}

/// The t-rule: grid defaults with any configured bound overriding them.
fn quad(
    cfg: &mut RunConfig,
    g: &GridSpec,
    params: StableParams,
    sup_bound: f64,
) -> Result<TQuadSpec, Failure> {
    let q = &cfg.quad;
    let auto = TQuadSpec::for_grid(g, params, sup_bound, q.h_policy, q.singular_cell)?;
    let spec = TQuadSpec::new(
        q.t_min.unwrap_or(auto.t_min),
        q.t_max.unwrap_or(auto.t_max),
        q.n_t.unwrap_or(auto.n_t),
        q.h_policy,
        q.singular_cell,
    )?;
    cfg.quad.t_min = Some(spec.t_min);
    cfg.quad.t_max = Some(spec.t_max);
    cfg.quad.n_t = Some(spec.n_t);
    Ok(spec)
}

fn path_config(
    cfg: &RunConfig,
    params: StableParams,
    start: Vec<f64>,
) -> Result<PathConfig, Failure> {
    let mc = &cfg.mc;
    if mc.paths == 0 {
        return Err(usage("paths must be positive"));
    }
    Ok(PathConfig::new(
        params,
        start,
        mc.start_height,
        mc.dt,
        mc.max_steps,
        cfg.seed,
    )?
    .with_step_growth(mc.step_growth)?)
}

fn first_x(cfg: &RunConfig) -> Result<f64, Failure> {
    cfg.x.first().copied().ok_or_else(|| usage("x is empty"))
}

// ---------------------------------------------------------------------------
// Drivers

fn density(cfg: &RunConfig) -> Result<Table, Failure> {
    let sd = StableDensity::new(params(cfg)?, DensityEvalSpec::default())?;
    let pts = points(cfg)?;
    let mut t = table_with(&["s"], cfg.d, &["p"]);
    for &s in &cfg.s {
        for x in &pts {
            let mut row: Vec<Cell> = vec![s.into()];
            row.extend(x.iter().map(|&v| Cell::from(v)));
            row.push(sd.density(s, x)?.into());
            t.push(row);
        }
    }
    Ok(t)
}

fn derivative(cfg: &RunConfig) -> Result<Table, Failure> {
    let sd = StableDensity::new(params(cfg)?, DensityEvalSpec::default())?;
    let pts = points(cfg)?;
    let mut t = table_with(&["s"], cfg.d, &["j", "k", "dp"]);
    for &s in &cfg.s {
        for x in &pts {
            let mut row: Vec<Cell> = vec![s.into()];
            row.extend(x.iter().map(|&v| Cell::from(v)));
            row.push(cfg.j.into());
            row.push(cfg.k.into());
            row.push(sd.partial(s, x, cfg.j, cfg.k)?.into());
            t.push(row);
        }
    }
    Ok(t)
}

fn subordinator(cfg: &RunConfig) -> Result<Table, Failure> {
    let mut t = Table::new(&["s", "g"]);
    for &s in &cfg.s {
        t.push(vec![s.into(), subordinator_density(cfg.beta, s)?.into()]);
    }
    Ok(t)
}

fn kernel(cfg: &RunConfig) -> Result<Table, Failure> {
    let k = ExtensionKernel::new(params(cfg)?, cfg.t, DensityEvalSpec::default())?;
    let mut t = table_with(&[], cfg.d, &["q"]);
    for x in points(cfg)? {
        let mut row: Vec<Cell> = x.iter().map(|&v| Cell::from(v)).collect();
        row.push(k.qt_kernel(&x)?.into());
        t.push(row);
    }
    Ok(t)
}

fn grid_table(columns: &[&str], fields: &[&SampledField]) -> Table {
    let mut t = Table::new(columns);
    let g = fields[0].grid();
    for i in 0..g.n() {
        let mut row: Vec<Cell> = vec![g.x(i).into()];
        row.extend(fields.iter().map(|f| Cell::from(f.values()[i])));
        t.push(row);
    }
    t
}

fn extension(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = line_params(cfg)?;
    let f = field(cfg, grid(cfg)?)?;
    let qf = extend(&f, params, cfg.t)?;
    Ok(grid_table(&["x", "f", "qf"], &[&f, &qf]))
}

fn operator(cfg: &mut RunConfig) -> Result<Table, Failure> {
    let params = operator_params(cfg)?;
    let g = grid(cfg)?;
    let r = profile(cfg)?;
    let q = quad(cfg, &g, params, r.sup_bound())?;
    let f = field(cfg, g)?;
    let tf = apply_t(&f, &r, params, &q)?;
    Ok(grid_table(&["x", "f", "tf"], &[&f, &tf]))
}

fn symbol(cfg: &mut RunConfig, truncated: bool) -> Result<Table, Failure> {
    let params = line_params(cfg)?;
    let r = profile(cfg)?;
    let mut t = Table::new(&["xi", "m"]);
    if truncated {
        let g = grid(cfg)?;
        let q = quad(cfg, &g, params, r.sup_bound())?;
        for &xi in &cfg.xi {
            t.push(vec![
                xi.into(),
                symbol_m_truncated(xi, &r, params, &q)?.into(),
            ]);
        }
    } else {
        for &xi in &cfg.xi {
            t.push(vec![xi.into(), symbol_m(xi, &r, params)?.into()]);
        }
    }
    Ok(t)
}

fn gfunction(cfg: &mut RunConfig) -> Result<Table, Failure> {
    let params = line_params(cfg)?;
    let g = grid(cfg)?;
    let q = quad(cfg, &g, params, 1.0)?;
    let f = field(cfg, g)?;
    let gf = g_function(&f, params, &q)?;
    Ok(grid_table(&["x", "f", "g"], &[&f, &gf]))
}

fn pairing(cfg: &mut RunConfig) -> Result<Table, Failure> {
    let params = operator_params(cfg)?;
    let g = grid(cfg)?;
    let q = quad(cfg, &g, params, 1.0)?;
    let f = field(cfg, g)?;
    let h = fields::field(g, &cfg.partner)?;
    let (lhs, rhs) = pairing_check(&f, &h, params, &q)?;
    let mut t = Table::new(&["lhs", "rhs", "rel_diff"]);
    t.push(vec![
        lhs.into(),
        rhs.into(),
        ((lhs - rhs).abs() / rhs.abs()).into(),
    ]);
    Ok(t)
}

fn simulate(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = params(cfg)?;
    let start = points(cfg)?.remove(0);
    let pc = path_config(cfg, params, start)?;
    let rec = simulate_until_exit(&pc)?;
    let mut t = Table {
        columns: ["exit_step", "exit_time"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: Vec::new(),
    };
    t.columns.extend(
        coord_columns(cfg.d)
            .into_iter()
            .map(|c| format!("exit_{c}")),
    );
    t.columns.extend(
        ["u_qv", "m_qv", "u_value", "small_jumps", "large_jumps"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut row: Vec<Cell> = vec![rec.exit_step.into(), rec.exit_time.into()];
    row.extend(rec.exit_position.iter().map(|&v| Cell::from(v)));
    row.extend([
        rec.u_quadratic_variation.into(),
        rec.m_quadratic_variation.into(),
        rec.u_value.into(),
        rec.small_jumps.into(),
        rec.large_jumps.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn green(cfg: &RunConfig) -> Result<Table, Failure> {
    let pc = path_config(cfg, params(cfg)?, vec![0.0; cfg.d])?;
    let rep = match cfg.mc.green_f {
        GreenFn::Exp => green_functional(&pc, |s| (-s).exp(), cfg.mc.paths)?,
        GreenFn::Indicator => {
            green_functional(&pc, |s| if s < 1.0 { 1.0 } else { 0.0 }, cfg.mc.paths)?
        }
    };
    let mut t = Table::new(&["mean", "std_error", "n", "reference", "z", "excluded"]);
    let z = (rep.estimate.mean - rep.reference) / rep.estimate.std_error;
    t.push(vec![
        rep.estimate.mean.into(),
        rep.estimate.std_error.into(),
        rep.estimate.n.into(),
        rep.reference.into(),
        z.into(),
        rep.excluded.into(),
    ]);
    Ok(t)
}

fn harmonic(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = line_params(cfg)?;
    let f = field(cfg, grid(cfg)?)?;
    let pc = path_config(cfg, params, vec![first_x(cfg)?])?;
    let rep = harmonic_check(&pc, &f, cfg.mc.paths)?;
    let mut t = Table::new(&["mean", "std_error", "n", "analytic", "abs_diff", "excluded"]);
    t.push(vec![
        rep.mc.mean.into(),
        rep.mc.std_error.into(),
        rep.mc.n.into(),
        rep.analytic.into(),
        (rep.mc.mean - rep.analytic).abs().into(),
        rep.excluded.into(),
    ]);
    Ok(t)
}

fn jumps(cfg: &RunConfig) -> Result<Table, Failure> {
    let params = line_params(cfg)?;
    let f = field(cfg, grid(cfg)?)?;
    let pc = path_config(cfg, params, vec![0.0])?;
    let mut t = Table::new(&[
        "p",
        "ratio",
        "mean_abs_u_p",
        "std_error",
        "paths",
        "excluded",
        "qv_violations",
        "small_jumps",
        "large_jumps",
    ]);
    for &p in &cfg.p {
        let s = jump_martingale_stats(&pc, &f, cfg.mc.paths, p)?;
        t.push(vec![
            p.into(),
            s.ratio.into(),
            s.u_abs_p.mean.into(),
            s.u_abs_p.std_error.into(),
            s.paths.into(),
            s.excluded.into(),
            s.qv_violations.into(),
            s.small_jumps.into(),
            s.large_jumps.into(),
        ]);
    }
    Ok(t)
}

fn lp(cfg: &mut RunConfig) -> Result<Table, Failure> {
    let params = operator_params(cfg)?;
    let g = grid(cfg)?;
    let r = profile(cfg)?;
    let q = quad(cfg, &g, params, r.sup_bound())?;
    if cfg.widths.is_empty() || cfg.shifts.is_empty() {
        return Err(usage("widths and shifts must be nonempty"));
    }
    let mut family = Vec::new();
    let mut labels = Vec::new();
    for &w in &cfg.widths {
        let base = fields::field(
            g,
            &crate::config::FieldParams {
                width: w,
                ..cfg.field.clone()
            },
        )?;
        for &s in &cfg.shifts {
            family.push(translate(&base, s));
            labels.push((w, s));
        }
    }
    let mut t = Table::new(&["p", "width", "shift", "ratio"]);
    for &p in &cfg.p {
        let rep = lp_probe(&family, &r, params, &q, p)?;
        for (&(w, s), &ratio) in labels.iter().zip(&rep.ratios) {
            t.push(vec![p.into(), w.into(), s.into(), ratio.into()]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(args: &[&str]) -> Vec<String> {
        std::iter::once("stablemult")
            .chain(args.iter().copied())
            .map(String::from)
            .collect()
    }

    fn run_args(args: &[&str]) -> Result<Table, Failure> {
        let cli = Cli::try_parse_from(argv(args)).expect("valid arguments");
        let (sub, opts) = cli.command.split();
        let mut cfg = resolve(sub, &opts).expect("resolvable");
        run(&mut cfg).map(|o| o.table)
    }

    #[test]
    fn density_cauchy_value() {
        let t = run_args(&[
            "density", "--alpha", "1", "--d", "1", "--s", "1", "--x", "0",
        ])
        .unwrap();
        assert_eq!(t.to_csv(), "s,x,p\n1,0,0.318309886\n");
    }

    #[test]
    fn apply_t_rejects_alpha_above_one() {
        match run_args(&["apply-t", "--alpha", "1.5"]) {
            Err(Failure::Usage(msg)) => assert!(msg.contains("(0, 1)"), "{msg}"),
            other => panic!(
                "expected a usage error, got {:?}",
                other.map(|t| t.to_csv())
            ),
        }
    }

    #[test]
    fn negative_values_are_accepted() {
        let t = run_args(&["density", "--x", "-1,1"]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][2], t.rows[1][2]);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let cli = Cli::try_parse_from(argv(&["density", "--alpha", "abc"])).unwrap();
        let (sub, opts) = cli.command.split();
        assert!(resolve(sub, &opts).is_err());
        assert!(matches!(
            run_args(&["density", "--alpha", "2.5"]),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            run_args(&["density", "--d", "2", "--x", "1"]),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn symbol_table_columns() {
        let t = run_args(&["symbol", "--alpha", "0.5", "--xi", "1,2"]).unwrap();
        assert_eq!(t.columns, vec!["xi", "m"]);
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn quadrature_bounds_are_resolved_into_the_config() {
        let cli = Cli::try_parse_from(argv(&[
            "apply-t", "--alpha", "0.5", "--n", "256", "--length", "32",
        ]))
        .unwrap();
        let (sub, opts) = cli.command.split();
        let mut cfg = resolve(sub, &opts).unwrap();
        run(&mut cfg).unwrap();
        assert!(cfg.quad.t_min.is_some() && cfg.quad.t_max.is_some() && cfg.quad.n_t.is_some());
    }
}
