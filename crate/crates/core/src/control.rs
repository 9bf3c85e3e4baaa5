//! Non-holonomic control: timing synthesis for a strictly alternating pair
//! of Hamiltonians.
//!
//! The only free parameters are the pulse durations tau_1..tau_nC of
//! U(tau) = exp(-i H_x_nC tau_nC) ... exp(-i H_b tau_2) exp(-i H_a tau_1),
//! the controls alternating a, b, a, ... from the rightmost (first applied)
//! factor.  Synthesis drives the transported code constraints to zero by
//! solving, at each step, the linearization of the constraint change in the
//! timings and walking along it with a halving line search.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;

use crate::code_search::{
    build_super_matrices, optimal_lambdas, BlockKind, CodeSpace, SuperMatrix, Supervector,
};
use crate::error_model::GeneratorSet;
use crate::quantum::{C64, Operator, SpectralDecomposition, StateVector, TOL};
use crate::rng::{rng_stream, streams};
use crate::{Error, Result};

/// Which of the two controls a pulse uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlIndex {
    A,
    B,
}

/// Control for pulse j (0-based): even pulses use H_a.
pub fn control_at(pulse: usize) -> ControlIndex {
    if pulse % 2 == 0 { ControlIndex::A } else { ControlIndex::B }
}

/// An alternating pair of control Hamiltonians with cached
/// eigendecompositions, so exponentials at arbitrary durations cost two
/// matrix products instead of an eigensolve.
#[derive(Debug, Clone)]
pub struct ControlPair {
    h_a: Operator,
    h_b: Operator,
    spec_a: SpectralDecomposition,
    spec_b: SpectralDecomposition,
    /// V_a^dag V_b: change of basis used when consecutive pulses switch
    /// controls.
    bridge_ab: DMatrix<C64>,
    sign_reversible: bool,
}

impl ControlPair {
    /// `sign_reversible` declares that the hardware can drive -H_a and -H_b,
    /// which is what sign-reversal decoding needs.
    pub fn new(h_a: Operator, h_b: Operator, sign_reversible: bool) -> Result<Self> {
        if h_a.dim() != h_b.dim() {
            return Err(Error::DimensionMismatch { expected: h_a.dim(), got: h_b.dim() });
        }
        let spec_a = SpectralDecomposition::new(&h_a)?;
        let spec_b = SpectralDecomposition::new(&h_b)?;
        let bridge_ab = spec_a.eigenvector_matrix().adjoint() * spec_b.eigenvector_matrix();
        Ok(Self { h_a, h_b, spec_a, spec_b, bridge_ab, sign_reversible })
    }

    /// Two seeded random Hermitian controls of unit spectral norm.
    pub fn random(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_stream(seed, streams::CONTROL);
        let h_a = crate::quantum::random_hermitian(dim, &mut rng)?.spectral_normalized()?;
        let h_b = crate::quantum::random_hermitian(dim, &mut rng)?.spectral_normalized()?;
        Self::new(h_a, h_b, true)
    }

    pub fn dim(&self) -> usize {
        self.h_a.dim()
    }

    pub fn h_a(&self) -> &Operator {
        &self.h_a
    }

    pub fn h_b(&self) -> &Operator {
        &self.h_b
    }

    pub fn sign_reversible(&self) -> bool {
        self.sign_reversible
    }

    pub fn hamiltonian(&self, which: ControlIndex) -> &Operator {
        match which {
            ControlIndex::A => &self.h_a,
            ControlIndex::B => &self.h_b,
        }
    }

    fn spectral(&self, which: ControlIndex) -> &SpectralDecomposition {
        match which {
            ControlIndex::A => &self.spec_a,
            ControlIndex::B => &self.spec_b,
        }
    }

    /// V_to^dag V_from.
    fn bridge(&self, to: ControlIndex, from: ControlIndex) -> Option<DMatrix<C64>> {
        match (to, from) {
            (ControlIndex::A, ControlIndex::B) => Some(self.bridge_ab.clone()),
            (ControlIndex::B, ControlIndex::A) => Some(self.bridge_ab.adjoint()),
            _ => None,
        }
    }

    /// The pair (-H_a, -H_b), controls in the same order.
    pub fn negated(&self) -> Result<Self> {
        Self::new(self.h_a.scale(-1.0), self.h_b.scale(-1.0), self.sign_reversible)
    }

    /// The pair (-H_b, -H_a): controls negated and swapped.
    pub fn negated_swapped(&self) -> Result<Self> {
        Self::new(self.h_b.scale(-1.0), self.h_a.scale(-1.0), self.sign_reversible)
    }
}

/// Pulse durations plus the subset of them currently treated as free
/// unknowns by the synthesis linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingVector {
    timings: Vec<f64>,
    free_set: Vec<usize>,
}

impl TimingVector {
    pub fn new(timings: Vec<f64>) -> Result<Self> {
        Self::with_free_set(timings, Vec::new())
    }

    pub fn with_free_set(timings: Vec<f64>, mut free_set: Vec<usize>) -> Result<Self> {
        if timings.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument("pulse durations must be finite and nonnegative".into()));
        }
        free_set.sort_unstable();
        free_set.dedup();
        if free_set.last().is_some_and(|&j| j >= timings.len()) {
            return Err(Error::InvalidArgument("free set index out of range".into()));
        }
        Ok(Self { timings, free_set })
    }

    pub fn random_in_range<R: Rng + ?Sized>(count: usize, range: (f64, f64), rng: &mut R) -> Result<Self> {
        check_range(range)?;
        let timings = (0..count).map(|_| rng.gen_range(range.0..=range.1)).collect();
        Self::new(timings)
    }

    pub fn len(&self) -> usize {
        self.timings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timings.is_empty()
    }

    pub fn timings(&self) -> &[f64] {
        &self.timings
    }

    pub fn free_set(&self) -> &[usize] {
        &self.free_set
    }

    pub fn with_timings(&self, timings: Vec<f64>) -> Result<Self> {
        Self::with_free_set(timings, self.free_set.clone())
    }

    pub fn set_free_set(&mut self, free_set: Vec<usize>) -> Result<()> {
        *self = Self::with_free_set(self.timings.clone(), free_set)?;
        Ok(())
    }

    /// Durations in reverse pulse order; free indices remapped to follow.
    pub fn reversed(&self) -> Self {
        let n = self.timings.len();
        let timings = self.timings.iter().rev().cloned().collect();
        let mut free_set: Vec<usize> = self.free_set.iter().map(|&j| n - 1 - j).collect();
        free_set.sort_unstable();
        Self { timings, free_set }
    }
}

fn check_range(range: (f64, f64)) -> Result<()> {
    if !(range.0.is_finite() && range.1.is_finite() && 0.0 <= range.0 && range.0 < range.1) {
        return Err(Error::InvalidArgument(format!(
            "duration range must satisfy 0 <= min < max, got ({}, {})",
            range.0, range.1
        )));
    }
    Ok(())
}

/// U(tau), built in the eigenbases of the two controls: one change-of-basis
/// product per control switch plus diagonal phase scalings.  Validated
/// unitary within 1e-9.
pub fn propagator(ctrl: &ControlPair, tau: &TimingVector) -> Result<Operator> {
    let n_c = tau.len();
    if n_c == 0 {
        return Ok(Operator::identity(ctrl.dim()));
    }
    let dim = ctrl.dim();
    let first = control_at(0);
    // Accumulate D_j W_j ... D_1 V_x1^dag; prepend V of the last control at
    // the end.
    let mut acc = ctrl.spectral(first).eigenvector_matrix().adjoint();
    scale_rows_by_phases(&mut acc, ctrl.spectral(first).eigenvalues(), tau.timings()[0]);
    let mut prev = first;
    for j in 1..n_c {
        let cur = control_at(j);
        if let Some(bridge) = ctrl.bridge(cur, prev) {
            acc = bridge * acc;
        }
        scale_rows_by_phases(&mut acc, ctrl.spectral(cur).eigenvalues(), tau.timings()[j]);
        prev = cur;
    }
    let u = ctrl.spectral(prev).eigenvector_matrix() * acc;
    debug_assert_eq!(u.nrows(), dim);
    Operator::unitary_with(u, 1e-9)
}

fn scale_rows_by_phases(m: &mut DMatrix<C64>, eigenvalues: &DVector<f64>, t: f64) {
    for r in 0..m.nrows() {
        let phase = C64::from_polar(1.0, -eigenvalues[r] * t);
        for c in 0..m.ncols() {
            m[(r, c)] *= phase;
        }
    }
}

/// dU/dtau_j for every pulse: insert -i H at pulse j, i.e.
/// dU/dtau_j = S_{j+1} (-i H_x_j) P_j with P the prefix and S the suffix
/// products.  The derivatives are not unitary.
pub fn propagator_derivatives(ctrl: &ControlPair, tau: &TimingVector) -> Result<Vec<Operator>> {
    let n_c = tau.len();
    let dim = ctrl.dim();
    if n_c == 0 {
        return Ok(Vec::new());
    }
    let factors: Vec<DMatrix<C64>> = (0..n_c)
        .map(|j| ctrl.spectral(control_at(j)).evolution_matrix(tau.timings()[j]))
        .collect();
    // prefix[j] = F_j ... F_1 (prefix[0] = I).
    let mut prefix = Vec::with_capacity(n_c + 1);
    prefix.push(DMatrix::<C64>::identity(dim, dim));
    for f in &factors {
        let last = prefix.last().unwrap();
        prefix.push(f * last);
    }
    let minus_i = C64::new(0.0, -1.0);
    let mut derivs: Vec<Option<Operator>> = (0..n_c).map(|_| None).collect();
    // Walk the suffix backward: at pulse j the accumulator holds S_{j+1}.
    let mut suffix = DMatrix::<C64>::identity(dim, dim);
    for j in (0..n_c).rev() {
        let h = ctrl.hamiltonian(control_at(j)).matrix();
        let d = &suffix * (h * &prefix[j + 1]) * minus_i;
        derivs[j] = Some(Operator::generic(d)?);
        suffix *= &factors[j];
    }
    Ok(derivs.into_iter().map(|d| d.unwrap()).collect())
}

/// Squared constraint magnitude of the transported supervector:
/// G(tau) = sum_k |<C| U^dag EE_k U |C>|^2 over error supermatrices only.
/// Orthonormality supermatrices are rejected: a unitary cannot change them.
pub fn test_function_g(
    ctrl: &ControlPair,
    tau: &TimingVector,
    c_sv: &Supervector,
    error_mats: &[SuperMatrix],
) -> Result<f64> {
    check_error_mats(ctrl, c_sv, error_mats)?;
    let u = propagator(ctrl, tau)?;
    let transported = c_sv.apply_blockwise(&u)?;
    let mut g = 0.0;
    for m in error_mats {
        g += m.quadratic_form(&transported)?.norm_sqr();
    }
    Ok(g)
}

fn check_error_mats(ctrl: &ControlPair, c_sv: &Supervector, mats: &[SuperMatrix]) -> Result<()> {
    for m in mats {
        if m.kind() == BlockKind::Orthonormality {
            return Err(Error::InvalidArgument(
                "the test function takes error constraints only; orthonormality is invariant under the propagator".into(),
            ));
        }
        if m.n() != ctrl.dim() || m.block_count() != c_sv.block_count() {
            return Err(Error::DimensionMismatch { expected: ctrl.dim(), got: m.n() });
        }
    }
    if c_sv.n() != ctrl.dim() {
        return Err(Error::DimensionMismatch { expected: ctrl.dim(), got: c_sv.n() });
    }
    Ok(())
}

/// Linearization of the transported constraints in the pulse durations.
///
/// For each error constraint k the complex row is
/// g_kj = (D_j gamma_s)^dag B (U gamma_t) + (U gamma_s)^dag B (D_j gamma_t)
/// and the complex target is
/// w_k = [<C0'|EE_k|C0'> - <C0|EE_k|C0>] / <C0'|C0'>,
/// where C0 = U C, C0' = C0 + delta_c / 2.  Real and imaginary parts become
/// candidate real rows; rank-revealing elimination with a relative pivot
/// threshold keeps exactly M I^2 independent original rows (the imaginary
/// parts of the real-valued diagonal constraints drop out).
pub fn build_linear_system(
    ctrl: &ControlPair,
    tau: &TimingVector,
    c_sv: &Supervector,
    delta_c: &Supervector,
    mats: &[SuperMatrix],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let error_mats: Vec<&SuperMatrix> =
        mats.iter().filter(|m| matches!(m.kind(), BlockKind::Error { .. })).collect();
    if error_mats.is_empty() {
        return Err(Error::InvalidArgument("no error constraints to linearize".into()));
    }
    let i_dim = c_sv.block_count();
    let gen_count = error_mats
        .iter()
        .map(|m| match m.kind() {
            BlockKind::Error { generator } => generator + 1,
            BlockKind::Orthonormality => 0,
        })
        .max()
        .unwrap_or(0);
    let target_rows = gen_count * i_dim * i_dim;
    let n_c = tau.len();

    let u = propagator(ctrl, tau)?;
    let derivs = propagator_derivatives(ctrl, tau)?;
    let phi: Vec<DVector<C64>> = c_sv.blocks().iter().map(|b| u.matrix() * b).collect();
    let dphi: Vec<Vec<DVector<C64>>> = derivs
        .iter()
        .map(|d| c_sv.blocks().iter().map(|b| d.matrix() * b).collect())
        .collect();

    let c0 = Supervector::from_blocks(phi.clone())?;
    let c0p = c0.add_scaled(delta_c, C64::new(0.5, 0.0))?;
    let norm2 = c0p.inner(&c0p)?.re;
    if norm2 <= 0.0 {
        return Err(Error::DegenerateConfiguration("target supervector has vanished".into()));
    }

    // Candidate rows: per constraint the real part then the imaginary part.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * error_mats.len());
    for m in &error_mats {
        let s = m.row_block();
        let t = m.col_block();
        let q0 = m.quadratic_form(&c0)?;
        let q1 = m.quadratic_form(&c0p)?;
        let w = (q1 - q0) / C64::new(norm2, 0.0);
        let b = m.block_matrix();
        let b_phi_t = b * &phi[t];
        let mut row = Vec::with_capacity(n_c);
        for j in 0..n_c {
            let first = dphi[j][s].dotc(&b_phi_t);
            let second = phi[s].dotc(&(b * &dphi[j][t]));
            row.push(first + second);
        }
        rows.push((row.iter().map(|z| z.re).collect(), w.re));
        rows.push((row.iter().map(|z| z.im).collect(), w.im));
    }

    // Rank-revealing pass in candidate order.  The pivot threshold is
    // relative to the largest row magnitude of the whole table, so rows that
    // are zero up to roundoff (the imaginary parts of real diagonal
    // constraints) are dropped rather than judged against themselves.
    let table_scale = rows
        .iter()
        .flat_map(|(row, _)| row.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut selected: Vec<(Vec<f64>, f64)> = Vec::with_capacity(target_rows);
    let mut pivots: Vec<(Vec<f64>, usize)> = Vec::new();
    for (row, rhs) in rows {
        let mut work = row.clone();
        for (pivot_row, pivot_col) in &pivots {
            let factor = work[*pivot_col];
            if factor != 0.0 {
                for (w, p) in work.iter_mut().zip(pivot_row) {
                    *w -= factor * p;
                }
            }
        }
        let (best_col, best_val) = work
            .iter()
            .enumerate()
            .map(|(c, v)| (c, v.abs()))
            .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_val > TOL.pivot * table_scale {
            let inv = 1.0 / work[best_col];
            let normalized: Vec<f64> = work.iter().map(|v| v * inv).collect();
            pivots.push((normalized, best_col));
            selected.push((row, rhs));
        }
    }

    if selected.len() != target_rows {
        return Err(Error::DegenerateConfiguration(format!(
            "constraint linearization has rank {} (expected {target_rows})",
            selected.len()
        )));
    }

    let mat = DMatrix::from_fn(target_rows, n_c, |r, c| selected[r].0[c]);
    let rhs = DVector::from_fn(target_rows, |r, _| selected[r].1);
    Ok((mat, rhs))
}

/// Knobs for `synthesize_timings`.
#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    /// Admissible duration window [min, max]; every pulse stays inside it.
    pub range: (f64, f64),
    /// Convergence threshold on the test function G.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra pulses beyond the M I^2 constraints; the slack makes the
    /// square subsystem well-conditioned after rotations.
    pub delta_n: usize,
    /// Number of halvings in the step-length line search (grid 1, 1/2, ...,
    /// 2^-halvings).
    pub halvings: u32,
    pub seed: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { range: (0.1, 2.0), tol: 1e-6, max_iter: 500, delta_n: 2, halvings: 10, seed: 0 }
    }
}

impl SynthesisOptions {
    pub fn alpha_grid(&self) -> Vec<f64> {
        (0..=self.halvings).map(|k| 0.5_f64.powi(k as i32)).collect()
    }
}

/// Result of a synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub timings: TimingVector,
    pub g_history: Vec<f64>,
    pub rotations: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Find pulse durations whose propagator maps the coordinate information
/// basis into a code space for the generator set.
///
/// Each iteration: take one damped code-search correction at the transported
/// supervector, solve the square linear system restricted to the current
/// free duration subset, and line-search along the solution; when no step
/// length helps, rotate to a fresh free subset.  `code` supplies the code
/// dimension I; the constraints are solved in timing space from scratch, so
/// the realized code space need not coincide with the one found by
/// `find_code`.
pub fn synthesize_timings(
    ctrl: &ControlPair,
    code: &CodeSpace,
    gens: &GeneratorSet,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    if gens.is_empty() {
        return Err(Error::InvalidArgument("synthesis needs at least one error generator".into()));
    }
    if gens.dim() != ctrl.dim() {
        return Err(Error::DimensionMismatch { expected: ctrl.dim(), got: gens.dim() });
    }
    if code.dim() != ctrl.dim() {
        return Err(Error::DimensionMismatch { expected: ctrl.dim(), got: code.dim() });
    }
    check_range(opts.range)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.delta_n == 0 {
        return Err(Error::InvalidArgument("delta_n must be at least 1".into()));
    }

    let i_dim = code.code_dim();
    let m_count = gens.len();
    let free_size = m_count * i_dim * i_dim;
    let n_c = free_size + opts.delta_n;

    let mats = build_super_matrices(gens, i_dim)?;
    let error_mats: Vec<SuperMatrix> =
        mats.iter().filter(|m| matches!(m.kind(), BlockKind::Error { .. })).cloned().collect();
    let coord_blocks: Vec<StateVector> = (0..i_dim)
        .map(|s| StateVector::basis_state(ctrl.dim(), s))
        .collect::<Result<Vec<_>>>()?;
    let c_sv = Supervector::from_states(&coord_blocks)?;

    let mut rng = rng_stream(opts.seed, streams::SYNTHESIS);
    let mut tau = TimingVector::random_in_range(n_c, opts.range, &mut rng)?;
    tau.set_free_set(sample(&mut rng, n_c, free_size).into_vec())?;

    let alpha_grid = opts.alpha_grid();
    let mut g_cur = test_function_g(ctrl, &tau, &c_sv, &error_mats)?;
    let mut history = vec![g_cur];
    let mut rotations = 0usize;
    let mut iterations = 0usize;

    while g_cur >= opts.tol && iterations < opts.max_iter {
        iterations += 1;

        // Code-search correction at the transported supervector.
        let u = propagator(ctrl, &tau)?;
        let transported = c_sv.apply_blockwise(&u)?;
        let lambdas = optimal_lambdas(&transported, &mats)?;
        let mut delta = zero_like(&transported);
        for (m, lam) in mats.iter().zip(&lambdas) {
            if *lam != C64::new(0.0, 0.0) {
                delta = delta.add_scaled(&m.apply(&transported)?, *lam)?;
            }
        }

        let step = match build_linear_system(ctrl, &tau, &c_sv, &delta, &mats) {
            Ok((s_full, w)) => {
                let s_free = DMatrix::from_fn(free_size, free_size, |r, c| {
                    s_full[(r, tau.free_set()[c])]
                });
                s_free.lu().solve(&w)
            }
            Err(Error::DegenerateConfiguration(_)) => None,
            Err(e) => return Err(e),
        };

        let mut accepted = false;
        if let Some(d_free) = step {
            for &alpha in &alpha_grid {
                let mut cand = tau.timings().to_vec();
                for (c, &j) in tau.free_set().iter().enumerate() {
                    cand[j] = (cand[j] + alpha * d_free[c]).clamp(opts.range.0, opts.range.1);
                }
                let cand_tau = tau.with_timings(cand)?;
                let g_cand = test_function_g(ctrl, &cand_tau, &c_sv, &error_mats)?;
                if g_cand < g_cur {
                    tau = cand_tau;
                    g_cur = g_cand;
                    accepted = true;
                    break;
                }
            }
        }

        if !accepted {
            // Rotate the free subset; keep drawing until it changes.
            let previous = tau.free_set().to_vec();
            loop {
                let fresh = {
                    let mut f = sample(&mut rng, n_c, free_size).into_vec();
                    f.sort_unstable();
                    f
                };
                if fresh != previous {
                    tau.set_free_set(fresh)?;
                    break;
                }
            }
            rotations += 1;
        }
        history.push(g_cur);
    }

    Ok(SynthesisReport {
        timings: tau,
        g_history: history,
        rotations,
        iterations,
        converged: g_cur < opts.tol,
    })
}

fn zero_like(sv: &Supervector) -> Supervector {
    let blocks = (0..sv.block_count()).map(|_| DVector::zeros(sv.n())).collect();
    Supervector::from_blocks(blocks).expect("shape preserved")
}

/// Decoding sequence by sign reversal: running the reversed durations on the
/// negated pair gives U(tau)^dag.  An even pulse count starts the decoder on
/// the other control, so the negated pair is also swapped.
pub fn decode_by_sign_reversal(ctrl: &ControlPair, tau: &TimingVector) -> Result<(ControlPair, TimingVector)> {
    if !ctrl.sign_reversible() {
        return Err(Error::InvalidArgument(
            "control pair is not flagged sign-reversible; the decoder needs -H_a and -H_b".into(),
        ));
    }
    let decoder = if tau.len() % 2 == 1 { ctrl.negated()? } else { ctrl.negated_swapped()? };
    Ok((decoder, tau.reversed()))
}

/// Dimension of the real Lie algebra spanned by i H_a, i H_b and their
/// nested commutators up to the given bracket depth (depth 1 is just the
/// generators).  Computed by incremental orthonormalization under the
/// real Frobenius inner product Re Tr(X^dag Y); saturation for generic
/// pairs with trace is dim^2, traceless pairs top out at dim^2 - 1.
pub fn lie_algebra_rank(ctrl: &ControlPair, depth: usize) -> usize {
    let dim = ctrl.dim();
    let max_rank = dim * dim;
    let i = C64::new(0.0, 1.0);
    let gens = [ctrl.h_a.matrix() * i, ctrl.h_b.matrix() * i];

    let mut basis: Vec<DMatrix<C64>> = Vec::new();
    let mut frontier: Vec<DMatrix<C64>> = Vec::new();
    for g in &gens {
        if let Some(b) = independent_direction(&basis, g) {
            basis.push(b.clone());
            frontier.push(b);
        }
    }
    for _level in 1..depth {
        if basis.len() >= max_rank || frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                let bracket = x * g - g * x;
                if let Some(b) = independent_direction(&basis, &bracket) {
                    basis.push(b.clone());
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

/// Orthonormalize a candidate against the basis (two passes); returns the
/// normalized residual direction if it is numerically independent.
fn independent_direction(basis: &[DMatrix<C64>], candidate: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let norm = frob_norm(candidate);
    if norm < 1e-14 {
        return None;
    }
    let mut v = candidate / C64::new(norm, 0.0);
    for _pass in 0..2 {
        for b in basis {
            let overlap = real_frob_inner(b, &v);
            if overlap != 0.0 {
                v -= b * C64::new(overlap, 0.0);
            }
        }
    }
    let resid = frob_norm(&v);
    if resid > 1e-10 {
        Some(&v / C64::new(resid, 0.0))
    } else {
        None
    }
}

fn frob_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn real_frob_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}
