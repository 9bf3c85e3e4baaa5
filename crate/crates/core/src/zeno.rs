//! The protection cycle: encode, let the error fields act, decode, project.
//!
//! One cycle of length tau_Z maps the information state psi to
//! P C^dag U_err(tau_Z) C psi (renormalized), with C the coding matrix and P
//! the projector onto the information subspace.  Coding moves the subspace
//! where first-order error action is orthogonal to it, so each projection
//! removes the accumulated error at cost O(tau_Z^2) and repeating cycles
//! freezes the state.
//!
//! Indexing convention: with an ancilla of dimension A and information
//! dimension I the composite index is a * I + i (ancilla most significant);
//! an ancilla in its ground level puts the information subspace on the first
//! I coordinates.

use nalgebra::DMatrix;
use rand::Rng;

use crate::code_search::CodingMatrix;
use crate::error_model::{evolve_exact, FieldProfile, GeneratorSet, NoiseIntegrals};
use crate::fit::log_log_slope;
use crate::quantum::{fidelity, projector_onto, C64, Operator, StateVector};
use crate::rng::{rng_stream, streams};
use crate::{Error, Result};

/// Split of the total space into information times ancilla, with the
/// ancilla reference state the codeword construction uses.
#[derive(Debug, Clone)]
pub struct AncillaLayout {
    info_dim: usize,
    ancilla_dim: usize,
    ancilla_state: StateVector,
}

impl AncillaLayout {
    pub fn new(info_dim: usize, ancilla_dim: usize, ancilla_state: StateVector) -> Result<Self> {
        if info_dim == 0 || ancilla_dim == 0 {
            return Err(Error::InvalidArgument("layout dimensions must be at least 1".into()));
        }
        if ancilla_state.dim() != ancilla_dim {
            return Err(Error::DimensionMismatch { expected: ancilla_dim, got: ancilla_state.dim() });
        }
        if !ancilla_state.is_normalized(1e-10) {
            return Err(Error::NotNormalized {
                deviation: (ancilla_state.norm() - 1.0).abs(),
                tolerance: 1e-10,
            });
        }
        Ok(Self { info_dim, ancilla_dim, ancilla_state })
    }

    /// Ancilla resting in its first level.
    pub fn ground(info_dim: usize, ancilla_dim: usize) -> Result<Self> {
        Self::new(info_dim, ancilla_dim, StateVector::basis_state(ancilla_dim, 0)?)
    }

    pub fn info_dim(&self) -> usize {
        self.info_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn total_dim(&self) -> usize {
        self.info_dim * self.ancilla_dim
    }

    pub fn ancilla_state(&self) -> &StateVector {
        &self.ancilla_state
    }

    /// |alpha> tensor |psi>, in the a * I + i index convention.
    pub fn embed(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.info_dim {
            return Err(Error::DimensionMismatch { expected: self.info_dim, got: psi.dim() });
        }
        let mut out = nalgebra::DVector::zeros(self.total_dim());
        for a in 0..self.ancilla_dim {
            let amp = self.ancilla_state.amplitudes()[a];
            for i in 0..self.info_dim {
                out[a * self.info_dim + i] = amp * psi.amplitudes()[i];
            }
        }
        StateVector::from_dvector(out)
    }

    /// The orthonormal family |alpha> tensor |nu_i>, i = 0..I-1.
    pub fn subspace_basis(&self) -> Result<Vec<StateVector>> {
        (0..self.info_dim)
            .map(|i| self.embed(&StateVector::basis_state(self.info_dim, i)?))
            .collect()
    }
}

/// The first `code_dim` coordinate directions of an N-dimensional space;
/// the information subspace for a ground-state ancilla.
pub fn coordinate_subspace(dim: usize, code_dim: usize) -> Result<Vec<StateVector>> {
    if code_dim > dim {
        return Err(Error::InvalidArgument(format!(
            "information dimension {code_dim} exceeds total dimension {dim}"
        )));
    }
    (0..code_dim).map(|i| StateVector::basis_state(dim, i)).collect()
}

/// How the projection step treats the leaked weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Keep the projected component and renormalize; survival probabilities
    /// are recorded but never sampled.
    Deterministic,
    /// Sample the measurement: with probability 1 - survival the run aborts
    /// with `ProjectionFailed`.
    Stochastic,
}

/// Parameters of a protection run.
#[derive(Debug, Clone)]
pub struct ZenoConfig {
    pub tau_z: f64,
    pub n_cycles: usize,
    /// Upper bound on the evolution substep inside one cycle.
    pub dt: f64,
    pub mode: ProjectionMode,
    /// Seed for the stochastic projection draws; cycle k uses its own
    /// stream, so outcomes are independent of call order.
    pub seed: u64,
}

impl ZenoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_z > 0.0) {
            return Err(Error::InvalidArgument(format!("tau_Z must be positive, got {}", self.tau_z)));
        }
        if !(self.dt > 0.0 && self.dt <= self.tau_z) {
            return Err(Error::InvalidArgument(format!(
                "substep dt must satisfy 0 < dt <= tau_Z, got dt = {} with tau_Z = {}",
                self.dt, self.tau_z
            )));
        }
        if self.n_cycles == 0 {
            return Err(Error::InvalidArgument("a run needs at least one cycle".into()));
        }
        Ok(())
    }
}

/// Measured numbers for one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutcome {
    /// |P psi'|^2 just before renormalization.
    pub survival_probability: f64,
    /// Norm of the component outside the information subspace.
    pub leak_norm: f64,
}

/// One protection cycle starting at field time `t_start`.
///
/// The input state must lie in the span of `subspace` (orthonormal family);
/// the returned state lies there again.  `cycle_index` selects the
/// stochastic draw stream and labels failures.
pub fn zeno_cycle(
    psi: &StateVector,
    coding: &CodingMatrix,
    gens: &GeneratorSet,
    fields: &[FieldProfile],
    cfg: &ZenoConfig,
    t_start: f64,
    cycle_index: usize,
    subspace: &[StateVector],
) -> Result<(StateVector, CycleOutcome)> {
    cfg.validate()?;
    let p = projector_onto(subspace)?;
    if p.dim() != coding.dim() || gens.dim() != coding.dim() || psi.dim() != coding.dim() {
        return Err(Error::DimensionMismatch { expected: coding.dim(), got: psi.dim() });
    }
    let inside = p.apply(psi)?;
    let outside = (psi.amplitudes() - inside.amplitudes()).norm();
    if outside > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "input state has weight {outside:.3e} outside the information subspace"
        )));
    }

    let encoded = coding.encode(psi)?;
    let evolved = evolve_exact(&encoded, gens, fields, t_start, t_start + cfg.tau_z, cfg.dt)?;
    let decoded = coding.decode(&evolved)?;

    let projected = p.apply(&decoded)?;
    let survival = projected.norm().powi(2);
    let leak = (decoded.amplitudes() - projected.amplitudes()).norm();

    if survival < 1e-12 {
        return Err(Error::ProjectionFailed { cycle: cycle_index, survival });
    }
    if cfg.mode == ProjectionMode::Stochastic {
        let mut rng = rng_stream(cfg.seed, streams::PROJECTION.wrapping_add((cycle_index as u64) << 8));
        let draw: f64 = rng.gen();
        if draw >= survival {
            return Err(Error::ProjectionFailed { cycle: cycle_index, survival });
        }
    }
    let next = projected.normalized()?;
    Ok((next, CycleOutcome { survival_probability: survival, leak_norm: leak }))
}

/// Per-cycle trace of a protection run.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRow {
    /// 1-based cycle number.
    pub cycle: usize,
    /// Field time at the end of the cycle.
    pub t_end: f64,
    pub survival_probability: f64,
    pub fidelity_to_initial: f64,
    pub leak_norm: f64,
}

#[derive(Debug, Clone)]
pub struct ZenoRunRecord {
    pub cycles: Vec<CycleRow>,
    /// Product of the per-cycle survival probabilities.
    pub cumulative_survival: f64,
    pub final_state: StateVector,
}

/// Chain `cfg.n_cycles` cycles with continuous field time.
pub fn run_protection(
    psi0: &StateVector,
    coding: &CodingMatrix,
    gens: &GeneratorSet,
    fields: &[FieldProfile],
    cfg: &ZenoConfig,
    subspace: &[StateVector],
) -> Result<ZenoRunRecord> {
    cfg.validate()?;
    if !psi0.is_normalized(1e-8) {
        return Err(Error::NotNormalized { deviation: (psi0.norm() - 1.0).abs(), tolerance: 1e-8 });
    }
    let mut state = psi0.clone();
    let mut rows = Vec::with_capacity(cfg.n_cycles);
    let mut cumulative = 1.0;
    for c in 0..cfg.n_cycles {
        let t_start = c as f64 * cfg.tau_z;
        let (next, outcome) = zeno_cycle(&state, coding, gens, fields, cfg, t_start, c, subspace)?;
        state = next;
        cumulative *= outcome.survival_probability;
        rows.push(CycleRow {
            cycle: c + 1,
            t_end: t_start + cfg.tau_z,
            survival_probability: outcome.survival_probability,
            fidelity_to_initial: fidelity(&state, psi0)?,
            leak_norm: outcome.leak_norm,
        });
    }
    Ok(ZenoRunRecord { cycles: rows, cumulative_survival: cumulative, final_state: state })
}

/// Fidelity trace without any protection: plain evolution under the error
/// fields, sampled at the cycle boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct UnprotectedRow {
    pub cycle: usize,
    pub t_end: f64,
    pub fidelity_to_initial: f64,
}

pub fn run_unprotected(
    psi0: &StateVector,
    gens: &GeneratorSet,
    fields: &[FieldProfile],
    cfg: &ZenoConfig,
) -> Result<Vec<UnprotectedRow>> {
    cfg.validate()?;
    if !psi0.is_normalized(1e-8) {
        return Err(Error::NotNormalized { deviation: (psi0.norm() - 1.0).abs(), tolerance: 1e-8 });
    }
    let mut state = psi0.clone();
    let mut rows = Vec::with_capacity(cfg.n_cycles);
    for c in 0..cfg.n_cycles {
        let t_start = c as f64 * cfg.tau_z;
        state = evolve_exact(&state, gens, fields, t_start, t_start + cfg.tau_z, cfg.dt)?;
        rows.push(UnprotectedRow {
            cycle: c + 1,
            t_end: t_start + cfg.tau_z,
            fidelity_to_initial: fidelity(&state, psi0)?,
        });
    }
    Ok(rows)
}

/// First-order Hamiltonian felt inside the information subspace:
/// (h_e)_ij = sum_m f_m sum_ab conj(alpha_a) alpha_b (C^dag E_m C)[aI+i, bI+j].
/// A perfect code cancels it entirely.
pub fn effective_hamiltonian(
    coding: &CodingMatrix,
    gens: &GeneratorSet,
    layout: &AncillaLayout,
    field_values: &[f64],
) -> Result<Operator> {
    if layout.total_dim() != coding.dim() || gens.dim() != coding.dim() {
        return Err(Error::DimensionMismatch { expected: coding.dim(), got: layout.total_dim() });
    }
    let h = gens.hamiltonian_at(field_values)?;
    let c = coding.operator().matrix();
    let t = c.adjoint() * h.matrix() * c;
    let i_dim = layout.info_dim();
    let a_dim = layout.ancilla_dim();
    let alpha = layout.ancilla_state().amplitudes();
    let mut out = DMatrix::<C64>::zeros(i_dim, i_dim);
    for i in 0..i_dim {
        for j in 0..i_dim {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..a_dim {
                for b in 0..a_dim {
                    acc += alpha[a].conj() * alpha[b] * t[(a * i_dim + i, b * i_dim + j)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Operator::hermitian_with(out, 1e-10)
}

/// Everything needed to rerun a protection experiment at different cycle
/// lengths.
#[derive(Debug, Clone)]
pub struct ProtectionSetup {
    pub psi0: StateVector,
    pub coding: CodingMatrix,
    pub gens: GeneratorSet,
    pub fields: Vec<FieldProfile>,
    pub subspace: Vec<StateVector>,
    /// Substeps per cycle; the run uses dt = tau_Z / substeps.
    pub substeps_per_cycle: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauZScalingRow {
    pub tau_z: f64,
    pub n_cycles: usize,
    /// Mean of (1 - survival) over the cycles of the run.
    pub per_cycle_infidelity: f64,
    /// 1 - fidelity to the initial state at the end of the run.
    pub cumulative_infidelity: f64,
}

#[derive(Debug, Clone)]
pub struct TauZScalingTable {
    pub rows: Vec<TauZScalingRow>,
    /// ln-ln slope of the per-cycle infidelity against tau_Z; None when a
    /// row's infidelity is nonpositive (protection too good to resolve).
    pub slope: Option<f64>,
}

/// Run the same protection experiment at each cycle length, keeping the
/// total protected time near `total_time`, and fit the per-cycle
/// infidelity's power law.  The list must span at least a decade.
pub fn scaling_vs_tau_z(
    setup: &ProtectionSetup,
    tau_z_list: &[f64],
    total_time: f64,
) -> Result<TauZScalingTable> {
    if tau_z_list.len() < 2 {
        return Err(Error::InvalidArgument("the cycle-length list needs at least two entries".into()));
    }
    if tau_z_list.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument("cycle lengths must be positive".into()));
    }
    let lo = tau_z_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tau_z_list.iter().cloned().fold(0.0_f64, f64::max);
    if hi / lo < 10.0 {
        return Err(Error::InvalidArgument(format!(
            "cycle lengths must span at least one decade (got ratio {:.3})",
            hi / lo
        )));
    }
    if setup.substeps_per_cycle == 0 {
        return Err(Error::InvalidArgument("substeps_per_cycle must be at least 1".into()));
    }
    if !(total_time > 0.0) {
        return Err(Error::InvalidArgument("total time must be positive".into()));
    }
    let mut rows = Vec::with_capacity(tau_z_list.len());
    for &tau_z in tau_z_list {
        let n_cycles = ((total_time / tau_z).round() as usize).max(1);
        let cfg = ZenoConfig {
            tau_z,
            n_cycles,
            dt: tau_z / setup.substeps_per_cycle as f64,
            mode: ProjectionMode::Deterministic,
            seed: setup.seed,
        };
        let record =
            run_protection(&setup.psi0, &setup.coding, &setup.gens, &setup.fields, &cfg, &setup.subspace)?;
        let per_cycle = record
            .cycles
            .iter()
            .map(|r| 1.0 - r.survival_probability)
            .sum::<f64>()
            / n_cycles as f64;
        let last_fid = record.cycles.last().map(|r| r.fidelity_to_initial).unwrap_or(1.0);
        rows.push(TauZScalingRow {
            tau_z,
            n_cycles,
            per_cycle_infidelity: per_cycle,
            cumulative_infidelity: 1.0 - last_fid,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.tau_z).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.per_cycle_infidelity).collect();
    let slope = log_log_slope(&xs, &ys);
    Ok(TauZScalingTable { rows, slope })
}

/// Convenience check that a field set stays inside the weak-noise regime
/// over one cycle.
pub fn check_zeno_regime(
    gens: &GeneratorSet,
    fields: &[FieldProfile],
    tau_z: f64,
    dt: f64,
) -> Result<(bool, f64)> {
    let ints = NoiseIntegrals::from_fields(fields, 0.0, tau_z, dt)?;
    let margin = ints.regime_margin(gens)?;
    Ok((ints.in_zeno_regime(gens)?, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_search::{complete_coding_matrix, find_code};
    use crate::quantum::{pauli_x, pauli_z};

    fn cfg(tau_z: f64, n_cycles: usize) -> ZenoConfig {
        ZenoConfig { tau_z, n_cycles, dt: tau_z / 4.0, mode: ProjectionMode::Deterministic, seed: 0 }
    }

    #[test]
    fn layout_with_ground_ancilla_hits_the_first_coordinates() {
        let layout = AncillaLayout::ground(2, 4).unwrap();
        let basis = layout.subspace_basis().unwrap();
        for (i, b) in basis.iter().enumerate() {
            let expect = StateVector::basis_state(8, i).unwrap();
            assert_eq!(b.amplitudes(), expect.amplitudes());
        }
        let coords = coordinate_subspace(8, 2).unwrap();
        assert_eq!(coords[1].amplitudes(), basis[1].amplitudes());
    }

    #[test]
    fn entangled_ancilla_layout_still_yields_an_orthonormal_family() {
        let alpha = StateVector::new(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
        ])
        .unwrap();
        let layout = AncillaLayout::new(3, 2, alpha).unwrap();
        let basis = layout.subspace_basis().unwrap();
        // projector_onto validates orthonormality internally.
        assert!(projector_onto(&basis).is_ok());
    }

    #[test]
    fn config_validation_rejects_bad_substeps() {
        let mut c = cfg(0.1, 5);
        c.dt = 0.2;
        assert!(c.validate().is_err());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let c2 = ZenoConfig { n_cycles: 0, ..cfg(0.1, 1) };
        assert!(c2.validate().is_err());
    }

    #[test]
    fn noise_free_cycle_is_inert() {
        let gens = GeneratorSet::new(4, vec![pauli_z().kron(&pauli_z())], Vec::new()).unwrap();
        let fields = vec![FieldProfile::Constant { amplitude: 0.0 }];
        let coding = CodingMatrix::identity(4, 2).unwrap();
        let sub = coordinate_subspace(4, 2).unwrap();
        let psi = StateVector::basis_state(4, 1).unwrap();
        let (next, out) =
            zeno_cycle(&psi, &coding, &gens, &fields, &cfg(0.1, 1), 0.0, 0, &sub).unwrap();
        assert!((out.survival_probability - 1.0).abs() < 1e-12);
        assert!(out.leak_norm < 1e-12);
        assert!((next.amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn in_subspace_rotation_survives_but_loses_fidelity() {
        // I tensor X acts inside the information subspace (ancilla-major
        // layout, dim 4 = ancilla 2 x info 2): projection cannot stop it.
        let e = Operator::identity(2).kron(&pauli_x());
        let e = Operator::hermitian(e.matrix().clone()).unwrap();
        let gens = GeneratorSet::new(4, vec![e], Vec::new()).unwrap();
        let f = 0.3;
        let fields = vec![FieldProfile::Constant { amplitude: f }];
        let coding = CodingMatrix::identity(4, 2).unwrap();
        let sub = coordinate_subspace(4, 2).unwrap();
        let psi = StateVector::basis_state(4, 0).unwrap();
        let tau = 0.25;
        let record = run_protection(&psi, &coding, &gens, &fields, &cfg(tau, 8), &sub).unwrap();
        let last = record.cycles.last().unwrap();
        assert!((record.cumulative_survival - 1.0).abs() < 1e-10, "no leak expected");
        let expect = (f * tau * 8.0).cos().powi(2);
        assert!(
            (last.fidelity_to_initial - expect).abs() < 1e-8,
            "fidelity {} vs cos^2 {expect}",
            last.fidelity_to_initial
        );
    }

    #[test]
    fn leaking_evolution_is_frozen_by_projection() {
        // X on the ancilla qubit moves weight out of the subspace; the
        // deterministic projection pulls it back every cycle.
        let e = pauli_x().kron(&Operator::identity(2));
        let e = Operator::hermitian(e.matrix().clone()).unwrap();
        let gens = GeneratorSet::new(4, vec![e], Vec::new()).unwrap();
        let fields = vec![FieldProfile::Constant { amplitude: 0.2 }];
        let coding = CodingMatrix::identity(4, 2).unwrap();
        let sub = coordinate_subspace(4, 2).unwrap();
        let psi = StateVector::basis_state(4, 0).unwrap();
        let tau = 0.05;
        let record = run_protection(&psi, &coding, &gens, &fields, &cfg(tau, 10), &sub).unwrap();
        for row in &record.cycles {
            // Survival loss per cycle is (f tau)^2 to leading order.
            let expect = (0.2 * tau).sin().powi(2);
            assert!((1.0 - row.survival_probability - expect).abs() < 1e-6);
            // The state itself stays put: X only connects to the ancilla.
            assert!((row.fidelity_to_initial - 1.0).abs() < 1e-9);
        }
        let product: f64 =
            record.cycles.iter().map(|r| r.survival_probability).product();
        assert!((record.cumulative_survival - product).abs() < 1e-14);
    }

    #[test]
    fn stochastic_mode_samples_the_survival_probability() {
        // Engineered 50/50 projection: I = 1, A = 2, X rotation by pi/4.
        let gens = GeneratorSet::new(2, vec![pauli_x()], Vec::new()).unwrap();
        let fields = vec![FieldProfile::Constant { amplitude: 1.0 }];
        let coding = CodingMatrix::identity(2, 1).unwrap();
        let sub = coordinate_subspace(2, 1).unwrap();
        let psi = StateVector::basis_state(2, 0).unwrap();
        let tau = std::f64::consts::FRAC_PI_4;
        let mut survived = 0;
        let trials = 400;
        for seed in 0..trials {
            let c = ZenoConfig {
                tau_z: tau,
                n_cycles: 1,
                dt: tau,
                mode: ProjectionMode::Stochastic,
                seed,
            };
            match zeno_cycle(&psi, &coding, &gens, &fields, &c, 0.0, 0, &sub) {
                Ok((_, out)) => {
                    assert!((out.survival_probability - 0.5).abs() < 1e-10);
                    survived += 1;
                }
                Err(Error::ProjectionFailed { cycle: 0, survival }) => {
                    assert!((survival - 0.5).abs() < 1e-10);
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        // Loose binomial bounds around 200.
        assert!(
            (140..=260).contains(&survived),
            "survived {survived}/{trials}, expected about half"
        );
        // Determinism: the same seed gives the same outcome.
        let c = ZenoConfig { tau_z: tau, n_cycles: 1, dt: tau, mode: ProjectionMode::Stochastic, seed: 7 };
        let a = zeno_cycle(&psi, &coding, &gens, &fields, &c, 0.0, 0, &sub).is_ok();
        let b = zeno_cycle(&psi, &coding, &gens, &fields, &c, 0.0, 0, &sub).is_ok();
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_rejects_states_outside_the_subspace() {
        let gens = GeneratorSet::new(4, vec![pauli_x().kron(&Operator::identity(2))], Vec::new()).unwrap();
        let fields = vec![FieldProfile::Constant { amplitude: 0.1 }];
        let coding = CodingMatrix::identity(4, 2).unwrap();
        let sub = coordinate_subspace(4, 2).unwrap();
        let outside = StateVector::basis_state(4, 3).unwrap();
        assert!(zeno_cycle(&outside, &coding, &gens, &fields, &cfg(0.1, 1), 0.0, 0, &sub).is_err());
    }

    #[test]
    fn effective_hamiltonian_reduces_to_the_upper_block_for_identity_coding() {
        let gens = GeneratorSet::random_hermitian(6, 2, 5).unwrap();
        let coding = CodingMatrix::identity(6, 2).unwrap();
        let layout = AncillaLayout::ground(2, 3).unwrap();
        let h_e = effective_hamiltonian(&coding, &gens, &layout, &[0.4, -0.7]).unwrap();
        let h_full = gens.hamiltonian_at(&[0.4, -0.7]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((h_e.matrix()[(i, j)] - h_full.matrix()[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn effective_hamiltonian_vanishes_on_a_proper_code() {
        let gens = GeneratorSet::random_hermitian(8, 3, 2003).unwrap();
        let res = find_code(&gens, 2, 1e-10, 20_000, 3).unwrap();
        assert!(res.converged);
        let coding = complete_coding_matrix(&res.code, 17).unwrap();
        let layout = AncillaLayout::ground(2, 4).unwrap();
        let h_e = effective_hamiltonian(&coding, &gens, &layout, &[0.3, -0.2, 0.5]).unwrap();
        assert!(h_e.spectral_norm() < 1e-8, "|h_e| = {:.3e}", h_e.spectral_norm());
    }

    #[test]
    fn scaling_requires_a_decade() {
        let gens = GeneratorSet::new(2, vec![pauli_x()], Vec::new()).unwrap();
        let setup = ProtectionSetup {
            psi0: StateVector::basis_state(2, 0).unwrap(),
            coding: CodingMatrix::identity(2, 1).unwrap(),
            gens,
            fields: vec![FieldProfile::Constant { amplitude: 0.1 }],
            subspace: coordinate_subspace(2, 1).unwrap(),
            substeps_per_cycle: 2,
            seed: 0,
        };
        assert!(scaling_vs_tau_z(&setup, &[0.01, 0.02], 0.5).is_err());
        let table = scaling_vs_tau_z(&setup, &[0.005, 0.01, 0.02, 0.05], 0.5).unwrap();
        assert_eq!(table.rows.len(), 4);
        // Leak per cycle is sin^2(f tau) ~ tau^2: slope 2.
        let slope = table.slope.unwrap();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }
}
