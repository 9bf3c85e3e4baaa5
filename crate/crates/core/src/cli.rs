//! Command-line harness: one subcommand per pipeline stage.
//!
//! Every subcommand reads a TOML experiment file, runs one stage, and
//! leaves artifacts in the output directory together with a manifest
//! (config hash, seed, timestamp, file list).  All randomness flows from
//! one seed; CSV bodies contain no timestamps, so a rerun with the same
//! config and seed is byte-identical.
//!
//! Exit codes: 0 success, 2 invalid configuration or inputs, 3 the
//! algorithm did not converge, 4 runtime failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::code_search::{
    build_super_matrices, complete_coding_matrix, find_code, hamming_bound, residual, CodeSpace,
    CodingMatrix, Supervector,
};
use crate::config::{config_hash, ControlBlock, ExperimentConfig, FewBodyTerm, GeneratorBlock};
use crate::control::{
    decode_by_sign_reversal, lie_algebra_rank, propagator, synthesize_timings, ControlPair,
    SynthesisOptions, TimingVector,
};
use crate::error_model::{few_body_generator, FieldProfile, GeneratorSet};
use crate::quantum::{C64, Operator, StateVector, pauli_x, pauli_y, pauli_z};
use crate::random_coding::{sparsity_audit, suppression_sweep};
use crate::records::{
    csv_row, fmt_f64, read_control_sequence, read_generator_set, write_code_space,
    write_coding_matrix, write_control_sequence, write_generator_set,
};
use crate::rng::{rng_stream, standard_complex, streams};
use crate::zeno::{
    check_zeno_regime, coordinate_subspace, scaling_vs_tau_z, zeno_cycle, CycleRow,
    ProjectionMode, ProtectionSetup, ZenoConfig,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "zenocode", version, about = "Coherence protection by coding and repeated projection")]
pub struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the experiment file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides [output].dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress lines on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the packing bound A - 1 >= M for the configured problem.
    CheckBound,
    /// Search for a code space orthogonal to the error generators.
    FindCode,
    /// Synthesize pulse durations whose propagator encodes by control alone.
    SynthesizeTimings,
    /// Run protection cycles and trace survival and fidelity.
    SimulateZeno,
    /// Rerun protection across cycle lengths and fit the infidelity power law.
    #[command(name = "sweep-tauZ")]
    SweepTauZ,
    /// Compare Haar and two-local-walk codings on few-body errors.
    RandomCodingSweep,
    /// Report the Lie-algebra rank generated by the control pair.
    LieRank,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckBound => "check-bound",
            Command::FindCode => "find-code",
            Command::SynthesizeTimings => "synthesize-timings",
            Command::SimulateZeno => "simulate-zeno",
            Command::SweepTauZ => "sweep-tauZ",
            Command::RandomCodingSweep => "random-coding-sweep",
            Command::LieRank => "lie-rank",
        }
    }
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Config(String),
    NoConverge(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::NoConverge(_) => EXIT_NO_CONVERGENCE,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::NoConverge(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::DegenerateConfiguration(_)
            | Error::CompletionFailed { .. }
            | Error::RestartRequired { .. } => Failure::NoConverge(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Reclassify an error as a configuration problem (used while inputs are
/// being loaded and resolved).
fn cfg_err(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

type CmdResult<T> = std::result::Result<T, Failure>;

struct Ctx {
    cfg: ExperimentConfig,
    seed: u64,
    out_dir: PathBuf,
    quiet: bool,
    outputs: Vec<String>,
}

impl Ctx {
    fn say(&self, msg: String) {
        if !self.quiet {
            println!("{msg}");
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    fn write_file(&mut self, name: &str, content: &str) -> CmdResult<()> {
        std::fs::write(self.path(name), content)
            .map_err(|e| Failure::Runtime(format!("cannot write {name}: {e}")))?;
        self.record_output(name);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &serde_json::Value) -> CmdResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Runtime(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_file(name, &text)
    }

    fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> CmdResult<()> {
        let mut out = String::with_capacity(rows.len() * 64 + header.len() + 1);
        out.push_str(header);
        out.push('\n');
        for r in rows {
            out.push_str(&csv_row(r));
            out.push('\n');
        }
        self.write_file(name, &out)
    }

    fn total_dim(&self) -> CmdResult<usize> {
        self.cfg.problem.resolved_total_dim().map_err(cfg_err)
    }

    fn code_dim(&self) -> CmdResult<usize> {
        self.cfg.problem.resolved_code_dim().map_err(cfg_err)
    }

    fn field_profiles(&self, count: usize) -> CmdResult<Vec<FieldProfile>> {
        if self.cfg.fields.is_empty() {
            // No fields configured: every generator idles at amplitude zero.
            return Ok(vec![FieldProfile::Constant { amplitude: 0.0 }; count]);
        }
        if self.cfg.fields.len() != count {
            return Err(Failure::Config(format!(
                "{} field profiles configured for {count} generators",
                self.cfg.fields.len()
            )));
        }
        self.cfg
            .fields
            .iter()
            .map(|f| f.to_profile(self.seed).map_err(cfg_err))
            .collect()
    }

    fn build_generators(&self) -> CmdResult<GeneratorSet> {
        let gens = match &self.cfg.generators {
            GeneratorBlock::RandomHermitian { seed } => {
                let dim = self.total_dim()?;
                let count = self.cfg.problem.resolved_generator_count().map_err(cfg_err)?;
                GeneratorSet::random_hermitian(dim, count, seed.unwrap_or(self.seed))
                    .map_err(cfg_err)?
            }
            GeneratorBlock::FewBody { terms, normalize } => {
                let qubits = self.cfg.problem.qubits.ok_or_else(|| {
                    Failure::Config("few-body generators need the qubit count n in [problem]".into())
                })?;
                let mut ops = Vec::with_capacity(terms.len());
                let mut labels = Vec::with_capacity(terms.len());
                for t in terms {
                    let (op, label) = few_body_term(qubits, t)?;
                    let op = match normalize.as_str() {
                        "frobenius" => op.frobenius_normalized().map_err(cfg_err)?,
                        "spectral" => op.spectral_normalized().map_err(cfg_err)?,
                        _ => op,
                    };
                    ops.push(op);
                    labels.push(label);
                }
                let dim = 1usize << qubits;
                if let Some(m) = self.cfg.problem.generator_count {
                    if m as usize != ops.len() {
                        return Err(Failure::Config(format!(
                            "M = {m} but the few-body list defines {} generators",
                            ops.len()
                        )));
                    }
                }
                GeneratorSet::new(dim, ops, labels).map_err(cfg_err)?
            }
            GeneratorBlock::File { path } => {
                let full = self.cfg.resolve_path(path);
                let gens = read_generator_set(&full).map_err(cfg_err)?;
                if let Ok(n) = self.cfg.problem.resolved_total_dim() {
                    if n != gens.dim() {
                        return Err(Failure::Config(format!(
                            "generator file has dimension {} but the problem says N = {n}",
                            gens.dim()
                        )));
                    }
                }
                if let Some(m) = self.cfg.problem.generator_count {
                    if m as usize != gens.len() {
                        return Err(Failure::Config(format!(
                            "generator file holds {} generators but the problem says M = {m}",
                            gens.len()
                        )));
                    }
                }
                gens
            }
        };
        Ok(gens)
    }

    /// The configured control pair, plus stored timings when it came from a
    /// sequence file.
    fn build_control(&self, default_dim: Option<usize>) -> CmdResult<(ControlPair, Option<TimingVector>)> {
        let block = self.cfg.control.as_ref().ok_or_else(|| {
            Failure::Config("this subcommand needs a [control] block".into())
        })?;
        match block {
            ControlBlock::Random { dim, seed, sign_reversible } => {
                let dim = dim
                    .or(default_dim)
                    .ok_or_else(|| Failure::Config("the control block needs a dimension".into()))?;
                let pair =
                    ControlPair::random(dim, seed.unwrap_or(self.seed)).map_err(cfg_err)?;
                let pair = if *sign_reversible {
                    pair
                } else {
                    ControlPair::new(pair.h_a().clone(), pair.h_b().clone(), false).map_err(cfg_err)?
                };
                Ok((pair, None))
            }
            ControlBlock::TwoLocal { qubits, seed } => {
                let q = qubits.or(self.cfg.problem.qubits).ok_or_else(|| {
                    Failure::Config("two-local control needs a qubit count".into())
                })?;
                let pair = crate::random_coding::two_local_control_pair(q, seed.unwrap_or(self.seed))
                    .map_err(cfg_err)?;
                Ok((pair, None))
            }
            ControlBlock::File { path } => {
                let full = self.cfg.resolve_path(path);
                let (pair, tau) = read_control_sequence(&full).map_err(cfg_err)?;
                Ok((pair, Some(tau)))
            }
        }
    }

    /// The coding matrix the protection run will use, with a short origin
    /// tag for the summary.
    fn build_coding(&mut self, gens: &GeneratorSet) -> CmdResult<(CodingMatrix, String)> {
        let dim = gens.dim();
        let code_dim = self.code_dim()?;
        match self.cfg.algorithm.coding.as_deref().unwrap_or("search") {
            "identity" => Ok((CodingMatrix::identity(dim, code_dim).map_err(cfg_err)?, "identity".into())),
            "replay" => {
                let (ctrl, tau) = self.build_control(Some(dim))?;
                let tau = tau.ok_or_else(|| {
                    Failure::Config("replay coding needs [control] kind = \"file\" with stored timings".into())
                })?;
                if ctrl.dim() != dim {
                    return Err(Failure::Config(format!(
                        "control dimension {} does not match the generators' {dim}",
                        ctrl.dim()
                    )));
                }
                let u = propagator(&ctrl, &tau)?;
                if ctrl.sign_reversible() {
                    let (dec_ctrl, dec_tau) = decode_by_sign_reversal(&ctrl, &tau)?;
                    let u_dec = propagator(&dec_ctrl, &dec_tau)?;
                    let dev = (u_dec.matrix() * u.matrix()
                        - nalgebra::DMatrix::<C64>::identity(dim, dim))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                    if dev > 1e-9 {
                        return Err(Failure::Runtime(format!(
                            "sign-reversed decode sequence misses the inverse by {dev:.3e}"
                        )));
                    }
                    self.say(format!("replay decode check: |U_dec U - 1| = {dev:.3e}"));
                }
                Ok((CodingMatrix::from_operator(u, code_dim)?, "replay".into()))
            }
            _ => {
                let tol = self.cfg.algorithm.tol.unwrap_or(1e-8);
                let max_iter = self.cfg.algorithm.max_iter.unwrap_or(10_000);
                let res = find_code(gens, code_dim, tol, max_iter, self.seed)?;
                if !res.converged {
                    return Err(Failure::NoConverge(format!(
                        "code search stalled at residual {:.3e} after {} iterations",
                        res.code.residual(),
                        res.iterations
                    )));
                }
                self.say(format!(
                    "code search: residual {:.3e} after {} iterations",
                    res.code.residual(),
                    res.iterations
                ));
                Ok((complete_coding_matrix(&res.code, self.seed)?, "search".into()))
            }
        }
    }

    /// Initial information state inside the given orthonormal subspace.
    fn initial_state(&self, subspace: &[StateVector]) -> CmdResult<StateVector> {
        let kind = self.cfg.algorithm.initial_state.as_deref().unwrap_or("basis0");
        let combo: Vec<C64> = match kind {
            "uniform" => vec![C64::new(1.0, 0.0); subspace.len()],
            "random" => {
                let mut rng = rng_stream(self.seed, streams::INITIAL_STATE);
                (0..subspace.len()).map(|_| standard_complex(&mut rng)).collect()
            }
            _ => {
                let mut v = vec![C64::new(0.0, 0.0); subspace.len()];
                v[0] = C64::new(1.0, 0.0);
                v
            }
        };
        let dim = subspace[0].dim();
        let mut acc = nalgebra::DVector::<C64>::zeros(dim);
        for (c, b) in combo.iter().zip(subspace) {
            acc += b.amplitudes() * *c;
        }
        let psi = StateVector::from_dvector(acc)?;
        Ok(psi.normalized()?)
    }

    fn zeno_config(&self, mode_default: ProjectionMode) -> CmdResult<ZenoConfig> {
        let tau_z = self.cfg.algorithm.tau_z.unwrap_or(0.05);
        let cfg = ZenoConfig {
            tau_z,
            n_cycles: self.cfg.algorithm.n_cycles.unwrap_or(20),
            dt: self.cfg.algorithm.dt.unwrap_or(tau_z / 10.0),
            mode: match self.cfg.algorithm.projection_mode.as_deref() {
                Some("stochastic") => ProjectionMode::Stochastic,
                Some("deterministic") => ProjectionMode::Deterministic,
                _ => mode_default,
            },
            seed: self.seed,
        };
        cfg.validate().map_err(cfg_err)?;
        Ok(cfg)
    }
}

fn few_body_term(qubits: usize, t: &FewBodyTerm) -> CmdResult<(Operator, String)> {
    let pauli = |name: &str| match name {
        "x" => pauli_x(),
        "y" => pauli_y(),
        _ => pauli_z(),
    };
    let local = match t.paulis.len() {
        1 => pauli(&t.paulis[0]),
        2 => {
            let k = pauli(&t.paulis[0]).kron(&pauli(&t.paulis[1]));
            Operator::hermitian(k.matrix().clone()).map_err(cfg_err)?
        }
        n => {
            return Err(Failure::Config(format!(
                "few-body terms act on one or two qubits, this one lists {n}"
            )))
        }
    };
    let op = few_body_generator(qubits, &t.support, &local)
        .map_err(cfg_err)?
        .scale(t.coefficient);
    let mut label = String::new();
    for (p, q) in t.paulis.iter().zip(&t.support) {
        let _ = write!(label, "{p}{q}");
    }
    Ok((op, label))
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn execute(cli: Cli) -> CmdResult<i32> {
    let config_path = cli
        .config
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let base = config_path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let cfg = ExperimentConfig::from_toml(&text, &base).map_err(cfg_err)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out_dir = cli.out.unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let name = cli.command.name();
    let hash = config_hash(&text, seed);
    let mut ctx = Ctx { cfg, seed, out_dir, quiet: cli.quiet, outputs: Vec::new() };

    let code = match cli.command {
        Command::CheckBound => cmd_check_bound(&mut ctx)?,
        Command::FindCode => cmd_find_code(&mut ctx)?,
        Command::SynthesizeTimings => cmd_synthesize(&mut ctx)?,
        Command::SimulateZeno => cmd_simulate(&mut ctx)?,
        Command::SweepTauZ => cmd_sweep_tauz(&mut ctx)?,
        Command::RandomCodingSweep => cmd_random_coding(&mut ctx)?,
        Command::LieRank => cmd_lie_rank(&mut ctx)?,
    };

    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "config_hash": hash,
        "seed": ctx.seed,
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "outputs": ctx.outputs,
    });
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::Runtime(format!("cannot serialize the manifest: {e}")))?;
    text.push('\n');
    std::fs::write(ctx.path("manifest.json"), text)
        .map_err(|e| Failure::Runtime(format!("cannot write the manifest: {e}")))?;
    Ok(code)
}

fn cmd_check_bound(ctx: &mut Ctx) -> CmdResult<i32> {
    let a = ctx.cfg.problem.resolved_ancilla_dim().map_err(cfg_err)?;
    let m = ctx.cfg.problem.resolved_generator_count().map_err(cfg_err)?;
    let ok = hamming_bound(a, m).map_err(cfg_err)?;
    let verdict = if ok { "satisfied" } else { "violated" };
    let relation = if ok { ">=" } else { "<" };
    ctx.say(format!("bound {verdict}: A - 1 = {} {relation} M = {m}", a - 1));
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "check-bound",
            "ancilla_dim": a,
            "generator_count": m,
            "satisfied": ok,
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_find_code(ctx: &mut Ctx) -> CmdResult<i32> {
    let gens = ctx.build_generators()?;
    let code_dim = ctx.code_dim()?;
    let tol = ctx.cfg.algorithm.tol.unwrap_or(1e-8);
    let max_iter = ctx.cfg.algorithm.max_iter.unwrap_or(10_000);
    let res = find_code(&gens, code_dim, tol, max_iter, ctx.seed)?;

    write_generator_set(&ctx.path("generators.txt"), &gens)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    ctx.record_output("generators.txt");
    write_code_space(&ctx.path("code.txt"), &res.code).map_err(|e| Failure::Runtime(e.to_string()))?;
    ctx.record_output("code.txt");

    let rows: Vec<Vec<String>> = res
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), fmt_f64(*r)])
        .collect();
    ctx.write_csv("residual_history.csv", "iteration,residual", &rows)?;

    let mut completed = false;
    if res.converged {
        let cm = complete_coding_matrix(&res.code, ctx.seed)?;
        write_coding_matrix(&ctx.path("coding.txt"), &cm)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        ctx.record_output("coding.txt");
        completed = true;
    }

    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "find-code",
            "dim": gens.dim(),
            "code_dim": code_dim,
            "generator_count": gens.len(),
            "converged": res.converged,
            "iterations": res.iterations,
            "restarts": res.restarts,
            "residual": res.code.residual(),
            "coding_matrix_written": completed,
        }),
    )?;
    ctx.say(format!(
        "find-code: residual {:.3e} after {} iterations ({} restarts)",
        res.code.residual(),
        res.iterations,
        res.restarts
    ));
    if res.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("find-code did not reach the tolerance {tol:.1e} within {max_iter} iterations");
        Ok(EXIT_NO_CONVERGENCE)
    }
}

fn cmd_synthesize(ctx: &mut Ctx) -> CmdResult<i32> {
    let gens = ctx.build_generators()?;
    let code_dim = ctx.code_dim()?;
    let (ctrl, _) = ctx.build_control(Some(gens.dim()))?;
    if ctrl.dim() != gens.dim() {
        return Err(Failure::Config(format!(
            "control dimension {} does not match the generators' {}",
            ctrl.dim(),
            gens.dim()
        )));
    }

    // The synthesis only takes the code dimension from the code space; the
    // coordinate basis is the honest placeholder, with its actual residual.
    let words = coordinate_subspace(gens.dim(), code_dim).map_err(cfg_err)?;
    let mats = build_super_matrices(&gens, code_dim)?;
    let sv = Supervector::from_states(&words)?;
    let start_residual = residual(&sv, &mats)?;
    let code = CodeSpace::new(words, start_residual)?;

    let alg = &ctx.cfg.algorithm;
    let opts = SynthesisOptions {
        range: (alg.tau_min.unwrap_or(0.1), alg.tau_max.unwrap_or(2.0)),
        tol: alg.tol.unwrap_or(1e-6),
        max_iter: alg.max_iter.unwrap_or(500),
        delta_n: alg.delta_n.unwrap_or(2),
        halvings: alg.halvings.unwrap_or(10),
        seed: ctx.seed,
    };
    let report = match synthesize_timings(&ctrl, &code, &gens, &opts) {
        Ok(r) => r,
        Err(e @ Error::DegenerateConfiguration(_)) => {
            return Err(Failure::NoConverge(e.to_string()));
        }
        Err(e) => return Err(e.into()),
    };

    let rows: Vec<Vec<String>> = report
        .g_history
        .iter()
        .enumerate()
        .map(|(i, g)| vec![i.to_string(), fmt_f64(*g)])
        .collect();
    ctx.write_csv("g_history.csv", "iteration,g", &rows)?;
    write_control_sequence(&ctx.path("control_sequence.txt"), &ctrl, &report.timings)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    ctx.record_output("control_sequence.txt");

    let final_g = report.g_history.last().copied().unwrap_or(f64::NAN);
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "synthesize-timings",
            "dim": gens.dim(),
            "code_dim": code_dim,
            "pulses": report.timings.len(),
            "converged": report.converged,
            "iterations": report.iterations,
            "rotations": report.rotations,
            "final_g": final_g,
        }),
    )?;
    ctx.say(format!(
        "synthesize-timings: G = {final_g:.3e} after {} iterations ({} rotations, {} pulses)",
        report.iterations,
        report.rotations,
        report.timings.len()
    ));
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "synthesis did not reach G < {:.1e} within {} iterations",
            opts.tol, opts.max_iter
        );
        Ok(EXIT_NO_CONVERGENCE)
    }
}

fn cmd_simulate(ctx: &mut Ctx) -> CmdResult<i32> {
    let gens = ctx.build_generators()?;
    let fields = ctx.field_profiles(gens.len())?;
    let code_dim = ctx.code_dim()?;
    let (coding, coding_origin) = ctx.build_coding(&gens)?;
    let subspace = coordinate_subspace(gens.dim(), code_dim).map_err(cfg_err)?;
    let psi0 = ctx.initial_state(&subspace)?;
    let zcfg = ctx.zeno_config(ProjectionMode::Deterministic)?;

    let (in_regime, margin) = check_zeno_regime(&gens, &fields, zcfg.tau_z, zcfg.dt)?;
    if !in_regime {
        log::warn!("cycle length is outside the weak-noise regime (margin {margin:.3e})");
    }

    let mut rows: Vec<CycleRow> = Vec::with_capacity(zcfg.n_cycles);
    let mut state = psi0.clone();
    let mut cumulative = 1.0;
    let mut aborted_at: Option<usize> = None;
    for c in 0..zcfg.n_cycles {
        let t_start = c as f64 * zcfg.tau_z;
        match zeno_cycle(&state, &coding, &gens, &fields, &zcfg, t_start, c, &subspace) {
            Ok((next, outcome)) => {
                state = next;
                cumulative *= outcome.survival_probability;
                rows.push(CycleRow {
                    cycle: c + 1,
                    t_end: t_start + zcfg.tau_z,
                    survival_probability: outcome.survival_probability,
                    fidelity_to_initial: crate::quantum::fidelity(&state, &psi0)?,
                    leak_norm: outcome.leak_norm,
                });
            }
            Err(Error::ProjectionFailed { cycle, survival })
                if zcfg.mode == ProjectionMode::Stochastic =>
            {
                ctx.say(format!(
                    "projection failed at cycle {} (survival probability {survival:.6})",
                    cycle + 1
                ));
                aborted_at = Some(cycle + 1);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.cycle.to_string(),
                fmt_f64(r.t_end),
                fmt_f64(r.survival_probability),
                fmt_f64(r.fidelity_to_initial),
                fmt_f64(r.leak_norm),
            ]
        })
        .collect();
    ctx.write_csv("zeno_trace.csv", "cycle,t,survival,fidelity,leak", &csv_rows)?;

    let final_fidelity = rows.last().map(|r| r.fidelity_to_initial);
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "simulate-zeno",
            "coding": coding_origin,
            "tau_z": zcfg.tau_z,
            "cycles_requested": zcfg.n_cycles,
            "cycles_completed": rows.len(),
            "aborted_at_cycle": aborted_at,
            "cumulative_survival": cumulative,
            "final_fidelity": final_fidelity,
            "zeno_regime_margin": margin,
        }),
    )?;
    ctx.say(format!(
        "simulate-zeno: {} cycles, cumulative survival {cumulative:.6}, final fidelity {}",
        rows.len(),
        final_fidelity.map(|f| format!("{f:.9}")).unwrap_or_else(|| "n/a".into())
    ));
    Ok(EXIT_OK)
}

fn cmd_sweep_tauz(ctx: &mut Ctx) -> CmdResult<i32> {
    let gens = ctx.build_generators()?;
    let fields = ctx.field_profiles(gens.len())?;
    let code_dim = ctx.code_dim()?;
    let (coding, coding_origin) = ctx.build_coding(&gens)?;
    let subspace = coordinate_subspace(gens.dim(), code_dim).map_err(cfg_err)?;
    let psi0 = ctx.initial_state(&subspace)?;

    let tau_z_list = ctx.cfg.algorithm.tau_z_list.clone().unwrap_or_else(|| {
        // Five points logarithmically spaced over one decade.
        let (lo, hi) = (1e-3_f64, 1e-2_f64);
        (0..5).map(|i| lo * (hi / lo).powf(i as f64 / 4.0)).collect()
    });
    let total_time = ctx.cfg.algorithm.total_time.unwrap_or(1.0);
    let substeps = match ctx.cfg.algorithm.dt {
        Some(dt) => {
            let longest = tau_z_list.iter().cloned().fold(0.0_f64, f64::max);
            ((longest / dt).ceil() as usize).max(1)
        }
        None => 8,
    };

    let setup = ProtectionSetup {
        psi0,
        coding,
        gens,
        fields,
        subspace,
        substeps_per_cycle: substeps,
        seed: ctx.seed,
    };
    let table = scaling_vs_tau_z(&setup, &tau_z_list, total_time).map_err(|e| match e {
        Error::InvalidArgument(_) => cfg_err(e),
        other => other.into(),
    })?;

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.tau_z),
                r.n_cycles.to_string(),
                fmt_f64(r.per_cycle_infidelity),
                fmt_f64(r.cumulative_infidelity),
            ]
        })
        .collect();
    ctx.write_csv(
        "tau_z_scaling.csv",
        "tau_z,n_cycles,per_cycle_infidelity,cumulative_infidelity",
        &rows,
    )?;
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "sweep-tauZ",
            "coding": coding_origin,
            "total_time": total_time,
            "substeps_per_cycle": substeps,
            "points": table.rows.len(),
            "slope": table.slope,
        }),
    )?;
    ctx.say(format!(
        "sweep-tauZ: {} points, per-cycle infidelity slope {}",
        table.rows.len(),
        table.slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into())
    ));
    Ok(EXIT_OK)
}

fn cmd_random_coding(ctx: &mut Ctx) -> CmdResult<i32> {
    let alg = &ctx.cfg.algorithm;
    let n_list = alg.n_list.clone().unwrap_or_else(|| (4..=8).collect());
    let k = ctx.cfg.problem.info_qubits.unwrap_or(1);
    let switches_per_qubit = alg.switches_per_qubit.unwrap_or(8);
    let seeds = alg.sweep_seeds.unwrap_or(5);

    let sweep = suppression_sweep(&n_list, k, switches_per_qubit, seeds, ctx.seed)
        .map_err(|e| match e {
            Error::InvalidArgument(_) => cfg_err(e),
            other => other.into(),
        })?;

    let rows: Vec<Vec<String>> = sweep
        .records
        .iter()
        .map(|r| {
            vec![
                r.n_qubits.to_string(),
                r.k_qubits.to_string(),
                r.source.to_string(),
                r.switch_count.to_string(),
                r.seed.to_string(),
                fmt_f64(r.mean_abs),
                fmt_f64(r.max_abs),
                fmt_f64(r.predicted),
            ]
        })
        .collect();
    ctx.write_csv(
        "suppression.csv",
        "n,k,source,switch_count,seed,mean_abs,max_abs,predicted",
        &rows,
    )?;

    let kept: Vec<usize> = {
        let mut v: Vec<usize> = sweep.records.iter().map(|r| r.n_qubits).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let sparsity = sparsity_audit(&kept);
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "random-coding-sweep",
            "n_list": kept,
            "k": k,
            "switches_per_qubit": switches_per_qubit,
            "seeds_per_point": seeds,
            "haar_slope": sweep.haar_slope,
            "nonholonomic_slope": sweep.nonholonomic_slope,
            "sparsity_exponent": sparsity,
            "truncated": sweep.truncated,
        }),
    )?;
    ctx.say(format!(
        "random-coding-sweep: haar slope {}, walk slope {}, coupling-count exponent {}",
        opt_fmt(sweep.haar_slope),
        opt_fmt(sweep.nonholonomic_slope),
        opt_fmt(sparsity)
    ));
    Ok(EXIT_OK)
}

fn opt_fmt(v: Option<f64>) -> String {
    v.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into())
}

fn cmd_lie_rank(ctx: &mut Ctx) -> CmdResult<i32> {
    let default_dim = ctx.cfg.problem.resolved_total_dim().ok();
    let (ctrl, _) = ctx.build_control(default_dim)?;
    let depth = ctx.cfg.algorithm.depth.unwrap_or(12);
    let rank = lie_algebra_rank(&ctrl, depth);
    let dim = ctrl.dim();
    let traceless = ctrl.h_a().trace().norm() < 1e-10 && ctrl.h_b().trace().norm() < 1e-10;
    let cap = if traceless { dim * dim - 1 } else { dim * dim };
    ctx.write_json(
        "summary.json",
        &serde_json::json!({
            "subcommand": "lie-rank",
            "dim": dim,
            "bracket_depth": depth,
            "rank": rank,
            "reachable_cap": cap,
            "saturated": rank == cap,
        }),
    )?;
    ctx.say(format!("lie-rank: {rank} of {cap} (dimension {dim}, bracket depth {depth})"));
    Ok(EXIT_OK)
}
