//! Command-line front end.
//!
//! Every subcommand writes one table (see [`crate::table`]) to `--out` or to
//! standard output. Exit status is 0 on success and 1 on input or I/O
//! errors. A flagged result (for example an infeasible solve) exits with 2
//! after the table is written.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use trijm_core::bound::{
    brute_force_bound, penalty_scaling_study, solve_lower_bound, ObjectiveKind, SolverConfig, Triad, Variant,
};
use trijm_core::fermat::{ft_point, FtProblem, DEFAULT_MAX_ITER};
use trijm_core::ion::{
    plan_effects, plan_for_povm, simulate_plan, ArgminSource, ExperimentConfig, NoiseModel, ShotConfig, DEFAULT_SHOTS,
};
use trijm_core::joint::{
    build_povm_general, build_povm_orthogonal, build_povm_pair, coplanar_lhs, jm_check_triple, one_orthogonal_ft,
    one_orthogonal_sides, orthogonal_lhs, outcome_label, pair_lhs, JointPovm, Triple,
};
use trijm_core::qubit::{prob, QubitState};
use trijm_core::scenarios::{self, default_domain, linspace, Family, SweepSpec, DEFAULT_GRID_POINTS};
use trijm_core::tol::TOL;
use trijm_core::{Error as CoreError, Vec3};

use crate::expr::{parse_list, parse_scalar, parse_vector};
use crate::parallel::{par_experiment, par_sweep, with_threads};
use crate::plan::PlanFile;
use crate::table::{write_output, Cell, Format, Metadata, Table};

/// A real number written as an expression such as `pi/3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar(pub f64);

impl FromStr for Scalar {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_scalar(s).map(Scalar).map_err(|e| e.to_string())
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// A vector written as `x,y,z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecArg(pub Vec3);

impl FromStr for VecArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_vector(s).map(VecArg)
    }
}

impl Serialize for VecArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.to_array().serialize(s)
    }
}

/// A comma-separated list of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct ListArg(pub Vec<f64>);

impl FromStr for ListArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(ListArg)
    }
}

impl Serialize for ListArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// `lo,hi,n` for `n` evenly spaced points, or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridArg {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridArg {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.n)
    }
}

impl FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        match parts.as_slice() {
            [x] => {
                let x = parse_scalar(x).map_err(|e| e.to_string())?;
                Ok(GridArg { lo: x, hi: x, n: 1 })
            }
            [lo, hi, n] => {
                let lo = parse_scalar(lo).map_err(|e| format!("lower end: {e}"))?;
                let hi = parse_scalar(hi).map_err(|e| format!("upper end: {e}"))?;
                let n: usize = n.trim().parse().map_err(|_| format!("point count `{}` is not a positive integer", n.trim()))?;
                if n == 0 {
                    return Err("point count must be at least 1".into());
                }
                if hi < lo {
                    return Err("upper end below lower end".into());
                }
                Ok(GridArg { lo, hi, n })
            }
            _ => Err("expected `lo,hi,n` or a single value".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Orthogonal,
    Coplanar,
    #[value(alias = "one_orthogonal")]
    OneOrthogonal,
    General,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Orthogonal => Family::Orthogonal,
            FamilyArg::Coplanar => Family::Coplanar,
            FamilyArg::OneOrthogonal => Family::OneOrthogonal,
            FamilyArg::General => Family::General,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    General,
    Orthogonal,
    Coplanar,
    #[value(alias = "one_orthogonal")]
    OneOrthogonal,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::General => Variant::General,
            VariantArg::Orthogonal => Variant::Orthogonal,
            VariantArg::Coplanar => Variant::Coplanar,
            VariantArg::OneOrthogonal => Variant::OneOrthogonal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionArg {
    /// Eight outcomes from the median of the lambda points.
    General,
    /// Compact eight-outcome POVM, orthogonal triples only.
    Orthogonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    /// Closed-form family at `k = 1` (orthogonal family only).
    Analytic,
    /// Lower-bound solve at each point.
    Solver,
}

#[derive(Debug, Parser)]
#[command(name = "trijm", version, about = "Joint measurability and error trade-off bounds for qubit observable triples")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Master seed for solver restarts and shot noise.
    #[arg(long, global = true, env = "ARTIFACT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "ARTIFACT_OUT")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "ARTIFACT_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps and simulations.
    #[arg(long, global = true, env = "ARTIFACT_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Joint-measurability test of a pair or triple of Bloch vectors.
    Jm(JmArgs),
    /// Joint POVM whose marginals are the given observables.
    Povm(PovmArgs),
    /// Lower bound of the total error for one target triad.
    Bound(BoundArgs),
    /// Lower bounds over a grid of a target family.
    Sweep(SweepArgs),
    /// Dependence of the penalised optimum on the penalty factor.
    PenaltyStudy(PenaltyArgs),
    /// Shot-noise simulation of the measurement protocol.
    Simulate(SimulateArgs),
    /// Geometric median of a point set.
    Ft(FtArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Jm(_) => "jm",
            Command::Povm(_) => "povm",
            Command::Bound(_) => "bound",
            Command::Sweep(_) => "sweep",
            Command::PenaltyStudy(_) => "penalty-study",
            Command::Simulate(_) => "simulate",
            Command::Ft(_) => "ft",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JmArgs {
    #[arg(long)]
    pub l1: VecArg,
    #[arg(long)]
    pub l2: VecArg,
    /// Third vector; a pairwise test is run when absent.
    #[arg(long)]
    pub l3: Option<VecArg>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PovmArgs {
    #[arg(long)]
    pub l1: VecArg,
    #[arg(long)]
    pub l2: VecArg,
    #[arg(long)]
    pub l3: Option<VecArg>,
    #[arg(long, value_enum, default_value_t = ConstructionArg::General)]
    pub construction: ConstructionArg,
    /// Also write the measurement plan of the outcomes as JSON.
    #[arg(long)]
    #[serde(skip)]
    pub plan_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Penalty factor of the last stage.
    #[arg(long, default_value = "1e5")]
    pub np: Scalar,
    /// Penalty factors of the earlier stages.
    #[arg(long, default_value = "1e2,1e3,1e4,1e5")]
    pub schedule: ListArg,
    /// Run a single stage at `--np` instead of the schedule.
    #[arg(long)]
    pub single_stage: bool,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Evaluation budget of one stage.
    #[arg(long, default_value_t = 60_000)]
    pub max_evals: usize,
    #[arg(long, default_value = "1e-13")]
    pub simplex_tol: Scalar,
    /// Hinge penalty instead of the squared one.
    #[arg(long)]
    pub hinge: bool,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            penalty_np: self.np.0,
            penalty_schedule: if self.single_stage { Vec::new() } else { self.schedule.0.clone() },
            restarts: self.restarts,
            simplex_tol: self.simplex_tol.0,
            max_evals: self.max_evals,
            seed,
        };
        cfg.validate().context("solver options")?;
        Ok(cfg)
    }

    fn kind(&self, variant: Variant) -> ObjectiveKind {
        if self.hinge {
            ObjectiveKind::hinge(variant)
        } else {
            ObjectiveKind::squared(variant)
        }
    }
}

fn solver_json(cfg: &SolverConfig) -> Value {
    json!({
        "penalty_np": cfg.penalty_np,
        "stages": cfg.stages(),
        "restarts": cfg.restarts,
        "simplex_tol": cfg.simplex_tol,
        "max_evals": cfg.max_evals,
        "seed": cfg.seed,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Orthogonal)]
    pub family: FamilyArg,
    #[arg(long, default_value = "0")]
    pub phi: Scalar,
    #[arg(long, default_value = "0")]
    pub varphi: Scalar,
    /// Second angle of `b` in the general family.
    #[arg(long, default_value = "0")]
    pub extra: Scalar,
    /// Explicit target triad; overrides the family.
    #[arg(long, requires_all = ["b", "c"])]
    pub a: Option<VecArg>,
    #[arg(long, requires_all = ["a", "c"])]
    pub b: Option<VecArg>,
    #[arg(long, requires_all = ["a", "b"])]
    pub c: Option<VecArg>,
    /// Constraint variant; defaults to the family's own, or general for an
    /// explicit triad.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also evaluate a brute-force grid bound of this density (3 to 21).
    #[arg(long)]
    pub brute_force: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Orthogonal)]
    pub family: FamilyArg,
    /// Sweep only the diagonal `phi = varphi` along the phi grid.
    #[arg(long)]
    pub diagonal: bool,
    /// `lo,hi,n` or a single value; default: the family's domain, 41 points.
    #[arg(long)]
    pub phi: Option<GridArg>,
    #[arg(long)]
    pub varphi: Option<GridArg>,
    #[arg(long, default_value = "0")]
    pub extra: Scalar,
}

impl GridArgs {
    fn spec(&self) -> Result<SweepSpec> {
        let family: Family = self.family.into();
        let (phi_hi, varphi_hi) = default_domain(family);
        let default = |hi| GridArg { lo: 0.0, hi, n: DEFAULT_GRID_POINTS };
        let spec = SweepSpec {
            family,
            phi_grid: self.phi.unwrap_or(default(phi_hi)).points(),
            varphi_grid: if self.diagonal { Vec::new() } else { self.varphi.unwrap_or(default(varphi_hi)).points() },
            diagonal_only: self.diagonal,
            extra: self.extra.0,
        };
        spec.validate().context("grid")?;
        Ok(spec)
    }
}

fn spec_json(spec: &SweepSpec) -> Value {
    json!({
        "family": spec.family.name(),
        "phi_grid": spec.phi_grid,
        "varphi_grid": spec.varphi_grid,
        "diagonal_only": spec.diagonal_only,
        "extra": spec.extra,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PenaltyArgs {
    /// Penalty factors, one single-stage solve each.
    #[arg(long, default_value = "1e1,1e2,1e3,1e4")]
    pub np_list: ListArg,
    #[arg(long, value_enum, default_value_t = VariantArg::General)]
    pub variant: VariantArg,
    #[arg(long)]
    pub hinge: bool,
    #[arg(long, default_value_t = 60_000)]
    pub max_evals: usize,
    #[arg(long, default_value = "1e-13")]
    pub simplex_tol: Scalar,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Where the approximations come from; default: analytic for the
    /// orthogonal family, solver otherwise.
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    /// Simulate a measurement plan file on `--state` instead of a sweep.
    #[arg(long, requires = "state")]
    pub plan: Option<PathBuf>,
    /// Bloch vector of the prepared state in plan mode.
    #[arg(long, requires = "plan")]
    pub state: Option<VecArg>,
    #[arg(long, env = "ARTIFACT_SHOTS", default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    /// Write noise-free values instead of sampled ones.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value = "0")]
    pub prep_depolarization: Scalar,
    #[arg(long, default_value = "0")]
    pub detection_flip: Scalar,
    #[arg(long, default_value = "0")]
    pub amplitude_jitter: Scalar,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FtArgs {
    /// File with one `x,y,z` point per line (`#` starts a comment), or a
    /// JSON array of `[x, y, z]` triples.
    #[arg(long, required_unless_present = "point")]
    pub points: Option<PathBuf>,
    /// A point; repeat for several.
    #[arg(long)]
    pub point: Vec<VecArg>,
    #[arg(long, default_value = "1e-12")]
    pub tol: Scalar,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

/// How a successful run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Output written, but some result is flagged.
    Flagged,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Flagged => 2,
        }
    }

    fn flag_if(bad: bool) -> Status {
        if bad {
            Status::Flagged
        } else {
            Status::Success
        }
    }
}

/// Error naming the command-line field it came from.
#[derive(Debug)]
struct FieldError {
    field: String,
    source: CoreError,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.source)
    }
}

impl std::error::Error for FieldError {}

fn field_err(field: &str, source: CoreError) -> anyhow::Error {
    FieldError { field: field.into(), source }.into()
}

fn ball_arg(field: &str, v: VecArg) -> Result<Vec3> {
    let n = v.0.norm();
    if n > 1.0 + TOL.ball_clamp {
        return Err(field_err(field, CoreError::OutsideBall { what: "vector", norm: n }));
    }
    Ok(v.0)
}

fn vec_cells(v: Vec3) -> [Cell; 3] {
    [Cell::Num(v.x), Cell::Num(v.y), Cell::Num(v.z)]
}

fn vec_columns(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|c| format!("{prefix}_{c}"))
}

struct Output {
    meta: Metadata,
    table: Table,
    status: Status,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Runs a parsed command line and writes its output.
pub fn run(cli: &Cli) -> Result<Status> {
    let g = &cli.global;
    if g.threads == Some(0) {
        bail!("--threads: must be at least 1");
    }
    let out = with_threads(g.threads, || execute(g, &cli.command))??;
    let rendered = out.table.render(&out.meta, g.format)?;
    write_output(g.out.as_deref(), &rendered)?;
    Ok(out.status)
}

fn execute(g: &Global, cmd: &Command) -> Result<Output> {
    let args = serde_json::to_value(cmd)?;
    let mut meta = Metadata::new(cmd.name(), g.seed, json!({ "format": g.format, "args": args }));
    let (table, status) = match cmd {
        Command::Jm(a) => cmd_jm(a, &mut meta)?,
        Command::Povm(a) => cmd_povm(a, &mut meta)?,
        Command::Bound(a) => cmd_bound(a, g.seed, &mut meta)?,
        Command::Sweep(a) => cmd_sweep(a, g.seed, &mut meta)?,
        Command::PenaltyStudy(a) => cmd_penalty(a, g.seed, &mut meta)?,
        Command::Simulate(a) => cmd_simulate(a, g.seed, &mut meta)?,
        Command::Ft(a) => cmd_ft(a)?,
    };
    Ok(Output { meta, table, status })
}

fn set_config(meta: &mut Metadata, key: &str, value: Value) {
    if let Value::Object(m) = &mut meta.config {
        m.insert(key.into(), value);
    }
}

fn cmd_jm(a: &JmArgs, meta: &mut Metadata) -> Result<(Table, Status)> {
    let l1 = ball_arg("--l1", a.l1)?;
    let l2 = ball_arg("--l2", a.l2)?;
    let mut table = Table::new(["test", "lhs", "rhs", "margin", "satisfied", "ft_x", "ft_y", "ft_z", "converged"]);
    let row = |name: &str, lhs: f64, rhs: f64, ft: Option<Vec3>, converged: bool| {
        let margin = rhs - lhs;
        let [x, y, z] = ft.map(vec_cells).unwrap_or([Cell::Empty, Cell::Empty, Cell::Empty]);
        vec![Cell::text(name), Cell::Num(lhs), Cell::Num(rhs), Cell::Num(margin), Cell::Bool(margin >= -TOL.jm), x, y, z, Cell::Bool(converged)]
    };
    let Some(l3) = a.l3 else {
        table.push(row("pair", pair_lhs(l1, l2), 2.0, None, true));
        meta.summary = Some(json!({ "satisfied": pair_lhs(l1, l2) <= 2.0 + TOL.jm }));
        return Ok((table, Status::Success));
    };
    let l3 = ball_arg("--l3", l3)?;
    let t = Triple::new(l1, l2, l3)?;
    let report = jm_check_triple(&t)?;
    table.push(row("triple", report.lhs, 4.0, Some(report.ft.point), report.ft.converged));
    if t.max_dot() <= TOL.orthogonal {
        table.push(row("orthogonal", orthogonal_lhs(&t), 1.0, None, true));
    }
    if t.triple_product().abs() <= TOL.coplanar {
        table.push(row("coplanar", coplanar_lhs(&t), 2.0, None, true));
    }
    if t.third_overlap() <= TOL.one_orthogonal {
        let (lhs, rhs) = one_orthogonal_sides(&t);
        table.push(row("one_orthogonal", lhs, rhs, Some(one_orthogonal_ft(&t)), true));
    }
    meta.summary = Some(json!({ "satisfied": report.satisfied, "margin": report.margin }));
    Ok((table, Status::flag_if(!report.reliable())))
}

fn cmd_povm(a: &PovmArgs, meta: &mut Metadata) -> Result<(Table, Status)> {
    let l1 = ball_arg("--l1", a.l1)?;
    let l2 = ball_arg("--l2", a.l2)?;
    let l3 = a.l3.map(|v| ball_arg("--l3", v)).transpose()?;
    let built = match (l3, a.construction) {
        (None, _) => build_povm_pair(l1, l2),
        (Some(l3), c) => {
            let t = Triple::new(l1, l2, l3)?;
            match c {
                ConstructionArg::General => build_povm_general(&t),
                ConstructionArg::Orthogonal => build_povm_orthogonal(&t),
            }
        }
    };
    let mut table = Table::new(["outcome", "s", "v_x", "v_y", "v_z", "min_eigenvalue", "rank_one"]);
    let povm = match built {
        Ok(p) => p,
        Err(e @ (CoreError::NotJointlyMeasurable { .. } | CoreError::NegativeOutcome { .. })) => {
            eprintln!("warning: {e}");
            meta.summary = Some(json!({ "error": e.to_string() }));
            return Ok((table, Status::Flagged));
        }
        Err(e) => return Err(e.into()),
    };
    for (signs, e) in povm.outcomes() {
        let [x, y, z] = vec_cells(e.v);
        table.push(vec![
            Cell::text(outcome_label(&signs)),
            Cell::Num(e.s),
            x,
            y,
            z,
            Cell::Num(e.min_eigenvalue()),
            Cell::Bool(e.is_rank_one()),
        ]);
    }
    meta.summary = Some(povm_summary(&povm));
    let mut status = Status::Success;
    if let Some(path) = &a.plan_out {
        match plan_for_povm(&povm) {
            Ok(plan) => write_output(Some(path), &PlanFile::from(&plan).to_json()?)?,
            Err(e) => {
                eprintln!("warning: no measurement plan written: {e}");
                status = Status::Flagged;
            }
        }
    }
    Ok((table, status))
}

fn povm_summary(p: &JointPovm) -> Value {
    let total = p.outcomes().fold(trijm_core::qubit::Effect::ZERO, |acc, (_, e)| acc + e);
    let completeness = total.distance(&trijm_core::qubit::Effect::IDENTITY);
    let rank_one = p.outcomes().filter(|(_, e)| !e.is_zero()).all(|(_, e)| e.is_rank_one());
    json!({
        "outcomes": p.len(),
        "completeness_error": completeness,
        "all_rank_one": rank_one,
    })
}

fn bound_columns() -> Vec<String> {
    let mut c: Vec<String> = ["variant", "value", "penalized_value"].map(String::from).into();
    for p in ["d", "e", "f"] {
        c.extend(vec_columns(p));
    }
    c.extend(["term_ad", "term_be", "term_cf", "residual_g1", "residual_g2", "evals", "restart", "np_final"].map(String::from));
    c.extend(vec_columns("ft"));
    c.extend(["feasible", "converged", "brute_force"].map(String::from));
    c
}

fn cmd_bound(a: &BoundArgs, seed: u64, meta: &mut Metadata) -> Result<(Table, Status)> {
    let (triad, default_variant) = match (a.a, a.b, a.c) {
        (Some(va), Some(vb), Some(vc)) => {
            let t = Triad::new(va.0, vb.0, vc.0).context("--a/--b/--c")?;
            (t, Variant::General)
        }
        _ => {
            let family: Family = a.family.into();
            let t = scenarios::triad(family, a.phi.0, a.varphi.0, a.extra.0).context("--phi/--varphi/--extra")?;
            (t, family.variant())
        }
    };
    let variant = a.variant.map(Variant::from).unwrap_or(default_variant);
    let cfg = a.solver.config(seed)?;
    let kind = a.solver.kind(variant);
    set_config(meta, "solver", solver_json(&cfg));
    set_config(meta, "triad", json!(triad.vectors().map(Vec3::to_array)));
    let r = solve_lower_bound(&triad, kind, &cfg)?;
    let brute = match a.brute_force {
        Some(density) => Cell::Num(brute_force_bound(&triad, kind, density).context("--brute-force")?),
        None => Cell::Empty,
    };
    let terms = r.breakdown(&triad);
    let mut row = vec![Cell::text(variant.name()), Cell::Num(r.value), Cell::Num(r.penalized_value)];
    for v in r.argmin.vectors() {
        row.extend(vec_cells(v));
    }
    row.extend([terms.d_ad, terms.d_be, terms.d_cf, r.residual_g1, r.residual_g2].map(Cell::Num));
    row.extend([Cell::Int(r.evals as u64), Cell::Int(r.restart as u64), Cell::Num(r.np_final)]);
    row.extend(r.ft_diag.map(|ft| vec_cells(ft.point)).unwrap_or([Cell::Empty, Cell::Empty, Cell::Empty]));
    row.extend([Cell::Bool(r.feasible), Cell::Bool(r.converged), brute]);
    let mut table = Table::new(bound_columns());
    table.push(row);
    meta.summary = Some(json!({ "value": r.value, "feasible": r.feasible, "converged": r.converged }));
    Ok((table, Status::flag_if(!(r.feasible && r.converged))))
}

fn cmd_sweep(a: &SweepArgs, seed: u64, meta: &mut Metadata) -> Result<(Table, Status)> {
    let spec = a.grid.spec()?;
    let cfg = a.solver.config(seed)?;
    set_config(meta, "grid", spec_json(&spec));
    set_config(meta, "solver", solver_json(&cfg));
    let rows = par_sweep(&spec, &cfg)?;
    let mut columns: Vec<String> = ["family", "index", "phi", "varphi", "value", "term_ad", "term_be", "term_cf"].map(String::from).into();
    for p in ["d", "e", "f"] {
        columns.extend(vec_columns(p));
    }
    columns.extend(["residual_g1", "residual_g2", "evals", "feasible", "converged"].map(String::from));
    let mut table = Table::new(columns);
    let mut flagged = false;
    for r in &rows {
        let mut row = vec![
            Cell::text(spec.family.name()),
            Cell::Int(r.index as u64),
            Cell::Num(r.phi),
            Cell::Num(r.varphi),
            Cell::Num(r.value),
            Cell::Num(r.terms.d_ad),
            Cell::Num(r.terms.d_be),
            Cell::Num(r.terms.d_cf),
        ];
        for v in r.argmin.vectors() {
            row.extend(vec_cells(v));
        }
        row.extend([Cell::Num(r.residual_g1), Cell::Num(r.residual_g2), Cell::Int(r.evals as u64)]);
        row.extend([Cell::Bool(r.feasible), Cell::Bool(r.converged)]);
        table.push(row);
        flagged |= !(r.feasible && r.converged);
    }
    let max = rows.iter().max_by(|x, y| x.value.total_cmp(&y.value));
    let min = rows.iter().min_by(|x, y| x.value.total_cmp(&y.value));
    if let (Some(max), Some(min)) = (max, min) {
        meta.summary = Some(json!({
            "max": { "value": max.value, "phi": max.phi, "varphi": max.varphi },
            "min": { "value": min.value, "phi": min.phi, "varphi": min.varphi },
            "flagged_points": rows.iter().filter(|r| !(r.feasible && r.converged)).count(),
        }));
    }
    Ok((table, Status::flag_if(flagged)))
}

fn cmd_penalty(a: &PenaltyArgs, seed: u64, meta: &mut Metadata) -> Result<(Table, Status)> {
    let base = SolverConfig {
        simplex_tol: a.simplex_tol.0,
        max_evals: a.max_evals,
        seed,
        ..SolverConfig::default()
    };
    base.validate().context("solver options")?;
    if a.np_list.0.iter().any(|&np| np.is_nan() || np <= 0.0) {
        bail!("--np-list: factors must be positive");
    }
    let variant: Variant = a.variant.into();
    let kind = if a.hinge { ObjectiveKind::hinge(variant) } else { ObjectiveKind::squared(variant) };
    let triad = scenarios::triad(Family::Orthogonal, 0.0, 0.0, 0.0)?;
    let study = penalty_scaling_study(&triad, kind, &a.np_list.0, &base).context("penalty study")?;
    let mut table = Table::new(["np", "value", "gap", "gap_times_np", "converged", "evals"]);
    for p in &study.points {
        table.push(vec![
            Cell::Num(p.np),
            Cell::Num(p.value),
            Cell::Num(p.gap),
            Cell::Num(p.gap * p.np),
            Cell::Bool(p.converged),
            Cell::Int(p.result.evals as u64),
        ]);
    }
    eprintln!("slope = {:.4}, constant = {:.4}", study.slope, study.constant);
    meta.summary = Some(json!({ "reference": study.reference, "slope": study.slope, "constant": study.constant }));
    Ok((table, Status::flag_if(study.points.iter().any(|p| !p.converged))))
}

const DATASET_COLUMNS: [&str; 11] =
    ["family", "phi", "varphi", "quantity", "value", "stderr", "shots", "seed", "exact", "infeasible", "not_single_qubit_measurable"];

fn cmd_simulate(a: &SimulateArgs, seed: u64, meta: &mut Metadata) -> Result<(Table, Status)> {
    let shots = ShotConfig { shots: a.shots, seed };
    shots.validate().context("--shots")?;
    let noise = NoiseModel {
        prep_depolarization: a.prep_depolarization.0,
        detection_flip: a.detection_flip.0,
        amplitude_jitter: a.amplitude_jitter.0,
    };
    noise.validate().context("noise options")?;
    let mut table = Table::new(DATASET_COLUMNS);
    if let (Some(path), Some(state)) = (&a.plan, a.state) {
        return simulate_plan_file(path, state, &shots, &noise, a.exact, table);
    }
    let spec = a.grid.spec()?;
    let source_arg = a.source.unwrap_or(if spec.family == Family::Orthogonal { SourceArg::Analytic } else { SourceArg::Solver });
    let source = match source_arg {
        SourceArg::Analytic => ArgminSource::Analytic,
        SourceArg::Solver => {
            let cfg = a.solver.config(seed)?;
            set_config(meta, "solver", solver_json(&cfg));
            ArgminSource::Solver(cfg)
        }
    };
    set_config(meta, "grid", spec_json(&spec));
    set_config(meta, "source", json!(source_arg));
    let cfg = ExperimentConfig { shots, noise, exact: a.exact };
    let rows = par_experiment(&spec, &source, &cfg)?;
    let mut flagged = false;
    for r in &rows {
        flagged |= r.infeasible;
        for q in &r.quantities {
            table.push(vec![
                Cell::text(spec.family.name()),
                Cell::Num(r.phi),
                Cell::Num(r.varphi),
                Cell::text(q.name.clone()),
                Cell::Num(q.value),
                Cell::Num(q.stderr),
                Cell::Int(q.shots),
                Cell::Int(seed),
                Cell::Num(q.exact),
                Cell::Bool(r.infeasible),
                Cell::Bool(q.not_single_qubit_measurable),
            ]);
        }
    }
    Ok((table, Status::flag_if(flagged)))
}

fn simulate_plan_file(path: &Path, state: VecArg, shots: &ShotConfig, noise: &NoiseModel, exact: bool, mut table: Table) -> Result<(Table, Status)> {
    let plan = crate::plan::read_plan(path)?;
    let rho = QubitState::new(ball_arg("--state", state)?).map_err(|e| field_err("--state", e))?;
    let estimates = if exact {
        plan_effects(&plan)
            .iter()
            .map(|(_, e)| trijm_core::ion::ShotEstimate::exact(prob(e, &rho), shots.shots))
            .collect()
    } else {
        simulate_plan(&plan, &rho, shots, noise, 0)?
    };
    for ((label, e), est) in plan_effects(&plan).into_iter().zip(estimates) {
        table.push(vec![
            Cell::text("plan"),
            Cell::Empty,
            Cell::Empty,
            Cell::text(label),
            Cell::Num(est.p_hat),
            Cell::Num(est.stderr),
            Cell::Int(est.shots),
            Cell::Int(shots.seed),
            Cell::Num(prob(&e, &rho)),
            Cell::Bool(false),
            Cell::Bool(false),
        ]);
    }
    Ok((table, Status::Success))
}

/// Reads points for `ft --points`.
pub fn read_points(path: &Path) -> Result<Vec<Vec3>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        let raw: Vec<[f64; 3]> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(raw.into_iter().map(Vec3::from_array).collect());
    }
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_vector(line).map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), i + 1))?;
        points.push(v);
    }
    Ok(points)
}

fn cmd_ft(a: &FtArgs) -> Result<(Table, Status)> {
    let mut points = match &a.points {
        Some(p) => read_points(p)?,
        None => Vec::new(),
    };
    points.extend(a.point.iter().map(|v| v.0));
    let prob = FtProblem::new(points).context("--points")?;
    if a.tol.0 <= 0.0 {
        bail!("--tol: must be positive");
    }
    let r = ft_point(&prob, a.tol.0, a.max_iter);
    let mut table = Table::new(["x", "y", "z", "total_distance", "iterations", "converged", "at_vertex"]);
    let mut row: Vec<Cell> = vec_cells(r.point).into();
    row.extend([
        Cell::Num(r.total_distance),
        Cell::Int(r.iterations as u64),
        Cell::Bool(r.converged),
        r.at_vertex.map(|i| Cell::Int(i as u64)).unwrap_or(Cell::Empty),
    ]);
    table.push(row);
    Ok((table, Status::flag_if(!r.converged)))
}
