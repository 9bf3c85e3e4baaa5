//! Error Hamiltonians of the form H(t) = sum_m f_m(t) E_m.
//!
//! The generators E_m are fixed Hermitian operators; the scalar field
//! amplitudes f_m(t) carry all time dependence.  Over one protection interval
//! the relevant strength of generator m is the integrated amplitude
//! eps_m = int f_m dt, and the weak-noise regime requires |eps_m| |E_m| << 1
//! for every m.

use nalgebra::DMatrix;
use rand::Rng;

use crate::quantum::{C64, Operator, OperatorKind, SpectralDecomposition, StateVector, TOL};
use crate::rng::{rng_stream, streams};
use crate::{Error, Result};

/// Validated family of Hermitian error generators on one Hilbert space.
///
/// An empty family is legal (noise-free system); a linearly dependent one is
/// not, since dependent generators make constraint counting meaningless.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<Operator>,
    labels: Vec<String>,
}

impl GeneratorSet {
    /// `labels` may be empty, in which case generators are named E1..EM.
    pub fn new(dim: usize, generators: Vec<Operator>, labels: Vec<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("generator dimension must be at least 1".into()));
        }
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
            let dev = g.hermitian_deviation();
            if dev > TOL.hermitian {
                return Err(Error::NotHermitian { deviation: dev, tolerance: TOL.hermitian });
            }
        }
        let labels = if labels.is_empty() {
            (1..=generators.len()).map(|m| format!("E{m}")).collect()
        } else if labels.len() == generators.len() {
            labels
        } else {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} generators",
                labels.len(),
                generators.len()
            )));
        };
        let set = Self { dim, generators, labels };
        set.check_independent()?;
        Ok(set)
    }

    /// Gram-matrix rank check: G_mn = Tr(E_m^dag E_n) must have its smallest
    /// eigenvalue above the threshold.
    fn check_independent(&self) -> Result<()> {
        let m = self.generators.len();
        if m == 0 {
            return Ok(());
        }
        let mut gram = DMatrix::<C64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let mut tr = C64::new(0.0, 0.0);
                let ma = self.generators[a].matrix();
                let mb = self.generators[b].matrix();
                for (x, y) in ma.iter().zip(mb.iter()) {
                    tr += x.conj() * y;
                }
                gram[(a, b)] = tr;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(gram);
        let smallest = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if smallest <= TOL.gram_rank {
            return Err(Error::DependentGenerators { smallest, threshold: TOL.gram_rank });
        }
        Ok(())
    }

    /// Seeded random Hermitian generators, each scaled to unit spectral norm
    /// so field amplitudes are directly comparable across generators.
    pub fn random_hermitian(dim: usize, count: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_stream(seed, streams::GENERATORS);
        let mut gens = Vec::with_capacity(count);
        for _ in 0..count {
            let h = crate::quantum::random_hermitian(dim, &mut rng)?;
            gens.push(h.spectral_normalized()?);
        }
        Self::new(dim, gens, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Operator] {
        &self.generators
    }

    pub fn get(&self, m: usize) -> &Operator {
        &self.generators[m]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spectral_norms(&self) -> Vec<f64> {
        self.generators.iter().map(|g| g.spectral_norm()).collect()
    }

    /// H = sum_m values[m] * E_m.
    pub fn hamiltonian_at(&self, values: &[f64]) -> Result<Operator> {
        if values.len() != self.generators.len() {
            return Err(Error::DimensionMismatch { expected: self.generators.len(), got: values.len() });
        }
        let mut h = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (f, g) in values.iter().zip(&self.generators) {
            h += g.matrix() * C64::new(*f, 0.0);
        }
        Operator::hermitian(h)
    }
}

/// Scalar amplitude profile f(t) for one generator.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldProfile {
    Constant { amplitude: f64 },
    /// amplitude * sin(omega t + phase), with omega an angular frequency.
    Sinusoid { amplitude: f64, omega: f64, phase: f64 },
    /// Piecewise-constant noise: on segment k = floor(t / segment) the value
    /// is amplitude * u_k with u_k uniform on [-1, 1], drawn from a stream
    /// derived from (seed, k).  The value depends only on the seed and the
    /// segment index, never on evaluation order.
    PiecewiseRandom { amplitude: f64, segment: f64, seed: u64 },
}

impl FieldProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldProfile::PiecewiseRandom { segment, .. } if *segment <= 0.0 => Err(
                Error::InvalidArgument(format!("piecewise-random segment length must be positive, got {segment}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            FieldProfile::Constant { amplitude } => *amplitude,
            FieldProfile::Sinusoid { amplitude, omega, phase } => amplitude * (omega * t + phase).sin(),
            FieldProfile::PiecewiseRandom { amplitude, segment, seed } => {
                let k = (t / segment).floor() as i64;
                let mut rng = rng_stream(*seed, streams::DYNAMIC_BASE.wrapping_add(k as u64));
                amplitude * rng.gen_range(-1.0..1.0)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, FieldProfile::Constant { .. })
    }
}

/// Integrated field amplitudes eps_m = int_t0^t1 f_m dt for one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIntegrals {
    pub epsilons: Vec<f64>,
}

impl NoiseIntegrals {
    pub fn new(epsilons: Vec<f64>) -> Self {
        Self { epsilons }
    }

    /// Midpoint quadrature with uniform substeps no longer than `max_substep`.
    pub fn from_fields(fields: &[FieldProfile], t0: f64, t1: f64, max_substep: f64) -> Result<Self> {
        let steps = substep_count(t0, t1, max_substep)?;
        let mut eps = vec![0.0; fields.len()];
        if steps == 0 {
            return Ok(Self::new(eps));
        }
        let h = (t1 - t0) / steps as f64;
        for f in fields {
            f.validate()?;
        }
        for k in 0..steps {
            let t_mid = t0 + (k as f64 + 0.5) * h;
            for (e, f) in eps.iter_mut().zip(fields) {
                *e += f.evaluate(t_mid) * h;
            }
        }
        Ok(Self::new(eps))
    }

    /// Largest |eps_m| * |E_m| over the set; the weak-noise regime holds when
    /// this is small compared to 1 (threshold `TOL.zeno_regime`).
    pub fn regime_margin(&self, gens: &GeneratorSet) -> Result<f64> {
        if self.epsilons.len() != gens.len() {
            return Err(Error::DimensionMismatch { expected: gens.len(), got: self.epsilons.len() });
        }
        let norms = gens.spectral_norms();
        Ok(self
            .epsilons
            .iter()
            .zip(&norms)
            .map(|(e, n)| e.abs() * n)
            .fold(0.0, f64::max))
    }

    pub fn in_zeno_regime(&self, gens: &GeneratorSet) -> Result<bool> {
        Ok(self.regime_margin(gens)? < TOL.zeno_regime)
    }
}

fn substep_count(t0: f64, t1: f64, max_substep: f64) -> Result<usize> {
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("interval end {t1} precedes start {t0}")));
    }
    if !(max_substep > 0.0) {
        return Err(Error::InvalidArgument(format!("substep must be positive, got {max_substep}")));
    }
    if t1 == t0 {
        return Ok(0);
    }
    Ok(((t1 - t0) / max_substep).ceil().max(1.0) as usize)
}

/// Propagate a state through H(t) = sum f_m(t) E_m by piecewise-constant
/// midpoint discretization: substeps of length at most `max_substep`, each
/// applying expm(-i H(t_mid) h).  Exact for constant fields regardless of the
/// substep; second-order accurate in the substep otherwise.
pub fn evolve_exact(
    psi: &StateVector,
    gens: &GeneratorSet,
    fields: &[FieldProfile],
    t0: f64,
    t1: f64,
    max_substep: f64,
) -> Result<StateVector> {
    if fields.len() != gens.len() {
        return Err(Error::DimensionMismatch { expected: gens.len(), got: fields.len() });
    }
    if psi.dim() != gens.dim() {
        return Err(Error::DimensionMismatch { expected: gens.dim(), got: psi.dim() });
    }
    for f in fields {
        f.validate()?;
    }
    let steps = substep_count(t0, t1, max_substep)?;
    if steps == 0 {
        return Ok(psi.clone());
    }
    // Constant fields commute with themselves at all times: one exponential.
    if fields.iter().all(FieldProfile::is_constant) {
        let values: Vec<f64> = fields.iter().map(|f| f.evaluate(t0)).collect();
        let h = gens.hamiltonian_at(&values)?;
        return SpectralDecomposition::new(&h)?.apply_evolution(psi, t1 - t0);
    }
    let h = (t1 - t0) / steps as f64;
    let mut state = psi.clone();
    for k in 0..steps {
        let t_mid = t0 + (k as f64 + 0.5) * h;
        let values: Vec<f64> = fields.iter().map(|f| f.evaluate(t_mid)).collect();
        let ham = gens.hamiltonian_at(&values)?;
        state = SpectralDecomposition::new(&ham)?.apply_evolution(&state, h)?;
    }
    Ok(state)
}

/// First-order propagation (1 - i sum_m eps_m E_m) |psi>.  The output is not
/// normalized; its norm exceeds 1 at second order in eps.
pub fn evolve_first_order(
    psi: &StateVector,
    gens: &GeneratorSet,
    integrals: &NoiseIntegrals,
) -> Result<StateVector> {
    if integrals.epsilons.len() != gens.len() {
        return Err(Error::DimensionMismatch { expected: gens.len(), got: integrals.epsilons.len() });
    }
    if psi.dim() != gens.dim() {
        return Err(Error::DimensionMismatch { expected: gens.dim(), got: psi.dim() });
    }
    let mut out = psi.amplitudes().clone();
    for (eps, g) in integrals.epsilons.iter().zip(gens.generators()) {
        out += g.matrix() * psi.amplitudes() * C64::new(0.0, -eps);
    }
    StateVector::from_dvector(out)
}

/// Embed a one- or two-qubit Hermitian operator into an n-qubit register.
///
/// Qubit 0 is the most significant factor of the composite index.  The
/// support must be strictly ascending; support[0] is the most significant
/// qubit of the local operator.
pub fn few_body_generator(n_qubits: usize, support: &[usize], local: &Operator) -> Result<Operator> {
    if n_qubits == 0 || n_qubits > 12 {
        return Err(Error::InvalidArgument(format!(
            "qubit count must be between 1 and 12, got {n_qubits}"
        )));
    }
    if support.is_empty() || support.len() > 2 {
        return Err(Error::InvalidArgument(format!(
            "support must hold one or two qubits, got {}",
            support.len()
        )));
    }
    if !support.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("support indices must be strictly ascending".into()));
    }
    if let Some(&q) = support.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::InvalidArgument(format!("support qubit {q} out of range for {n_qubits} qubits")));
    }
    let s = support.len();
    let local_dim = 1usize << s;
    if local.dim() != local_dim {
        return Err(Error::DimensionMismatch { expected: local_dim, got: local.dim() });
    }
    if local.kind() != OperatorKind::Hermitian && local.hermitian_deviation() > TOL.hermitian {
        return Err(Error::NotHermitian { deviation: local.hermitian_deviation(), tolerance: TOL.hermitian });
    }

    let n = n_qubits;
    let dim = 1usize << n;
    // Bit position (from the least significant end) of each support qubit.
    let shifts: Vec<usize> = support.iter().map(|&q| n - 1 - q).collect();
    let support_mask: usize = shifts.iter().map(|&b| 1usize << b).sum();
    let env_mask = (dim - 1) & !support_mask;

    // Scatter a local index into the global bit positions.
    let scatter = |l: usize| -> usize {
        let mut g = 0usize;
        for (j, &b) in shifts.iter().enumerate() {
            if (l >> (s - 1 - j)) & 1 == 1 {
                g |= 1 << b;
            }
        }
        g
    };
    let local_patterns: Vec<usize> = (0..local_dim).map(scatter).collect();

    let mut out = DMatrix::<C64>::zeros(dim, dim);
    // Enumerate environment configurations by iterating all indices and
    // keeping those with empty support bits.
    let mut env = 0usize;
    loop {
        for (l_row, &row_bits) in local_patterns.iter().enumerate() {
            for (l_col, &col_bits) in local_patterns.iter().enumerate() {
                let v = local.matrix()[(l_row, l_col)];
                if v != C64::new(0.0, 0.0) {
                    out[(env | row_bits, env | col_bits)] = v;
                }
            }
        }
        // Advance to the next environment configuration within env_mask.
        env = (env.wrapping_sub(env_mask)) & env_mask;
        if env == 0 {
            break;
        }
    }
    Operator::hermitian(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_x, pauli_y, pauli_z};
    use crate::rng::rng_from_seed;
    use nalgebra::DMatrix;

    #[test]
    fn generator_set_rejects_dependence_and_accepts_pauli() {
        let err = GeneratorSet::new(2, vec![pauli_x(), pauli_x()], Vec::new());
        assert!(matches!(err, Err(Error::DependentGenerators { .. })));
        let ok = GeneratorSet::new(2, vec![pauli_x(), pauli_y(), pauli_z()], Vec::new()).unwrap();
        assert_eq!(ok.len(), 3);
        assert_eq!(ok.labels(), ["E1", "E2", "E3"]);
    }

    #[test]
    fn empty_generator_set_gives_zero_hamiltonian() {
        let gens = GeneratorSet::new(4, Vec::new(), Vec::new()).unwrap();
        let h = gens.hamiltonian_at(&[]).unwrap();
        assert_eq!(h.max_abs_entry(), 0.0);
    }

    #[test]
    fn random_generators_have_unit_spectral_norm() {
        let gens = GeneratorSet::random_hermitian(6, 3, 42).unwrap();
        for n in gens.spectral_norms() {
            assert!((n - 1.0).abs() < 1e-12, "norm {n}");
        }
        // Seed determinism.
        let again = GeneratorSet::random_hermitian(6, 3, 42).unwrap();
        assert_eq!(gens.get(1).matrix(), again.get(1).matrix());
    }

    #[test]
    fn sinusoid_with_zero_amplitude_vanishes() {
        let f = FieldProfile::Sinusoid { amplitude: 0.0, omega: 5.0, phase: 0.3 };
        for t in [0.0, 0.1, 2.0] {
            assert_eq!(f.evaluate(t), 0.0);
        }
    }

    #[test]
    fn piecewise_random_depends_only_on_segment_and_seed() {
        let f = FieldProfile::PiecewiseRandom { amplitude: 0.5, segment: 0.25, seed: 9 };
        let late = f.evaluate(0.8);
        let early = f.evaluate(0.1);
        // Order of evaluation must not matter.
        assert_eq!(f.evaluate(0.1), early);
        assert_eq!(f.evaluate(0.8), late);
        // Same segment, same value; the two draws above live in different
        // segments and should differ.
        assert_eq!(f.evaluate(0.2), early);
        assert_ne!(early, late);
        assert!(early.abs() <= 0.5 && late.abs() <= 0.5);
    }

    #[test]
    fn noise_integrals_match_closed_forms() {
        let fields = vec![
            FieldProfile::Constant { amplitude: 0.3 },
            FieldProfile::Sinusoid { amplitude: 1.0, omega: 2.0, phase: 0.0 },
        ];
        let ints = NoiseIntegrals::from_fields(&fields, 0.0, 1.5, 1e-4).unwrap();
        assert!((ints.epsilons[0] - 0.45).abs() < 1e-12);
        let expect = (1.0 - (3.0f64).cos()) / 2.0;
        assert!((ints.epsilons[1] - expect).abs() < 1e-7, "got {}", ints.epsilons[1]);
    }

    #[test]
    fn regime_margin_flags_strong_noise() {
        let gens = GeneratorSet::new(2, vec![pauli_z()], Vec::new()).unwrap();
        let weak = NoiseIntegrals::new(vec![0.01]);
        let strong = NoiseIntegrals::new(vec![0.5]);
        assert!(weak.in_zeno_regime(&gens).unwrap());
        assert!(!strong.in_zeno_regime(&gens).unwrap());
    }

    #[test]
    fn constant_field_evolution_is_exact_for_any_substep() {
        let gens = GeneratorSet::new(2, vec![pauli_z()], Vec::new()).unwrap();
        let fields = vec![FieldProfile::Constant { amplitude: 0.7 }];
        let psi = StateVector::new(vec![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let coarse = evolve_exact(&psi, &gens, &fields, 0.0, 2.0, 10.0).unwrap();
        let fine = evolve_exact(&psi, &gens, &fields, 0.0, 2.0, 1e-3).unwrap();
        assert!((coarse.amplitudes() - fine.amplitudes()).norm() < 1e-12);
        assert!((coarse.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_dependent_evolution_converges_quadratically_in_the_substep() {
        let gens = GeneratorSet::new(2, vec![pauli_x(), pauli_z()], Vec::new()).unwrap();
        let fields = vec![
            FieldProfile::Sinusoid { amplitude: 0.9, omega: 4.0, phase: 0.1 },
            FieldProfile::Constant { amplitude: 0.4 },
        ];
        let mut rng = rng_from_seed(2);
        let psi = StateVector::random_normalized(2, &mut rng).unwrap();
        let reference = evolve_exact(&psi, &gens, &fields, 0.0, 1.0, 1.0 / 4096.0).unwrap();
        let err_at = |steps: f64| {
            let s = evolve_exact(&psi, &gens, &fields, 0.0, 1.0, 1.0 / steps).unwrap();
            (s.amplitudes() - reference.amplitudes()).norm()
        };
        let e16 = err_at(16.0);
        let e32 = err_at(32.0);
        let ratio = e16 / e32;
        assert!(
            (2.5..6.0).contains(&ratio),
            "halving the substep should shrink the error about 4x, got {ratio} ({e16} -> {e32})"
        );
    }

    #[test]
    fn first_order_evolution_matches_exact_to_second_order() {
        let gens = GeneratorSet::new(2, vec![pauli_y()], Vec::new()).unwrap();
        let psi = StateVector::basis_state(2, 0).unwrap();
        let mut errs = Vec::new();
        for eps in [1e-2, 1e-3] {
            let fields = vec![FieldProfile::Constant { amplitude: eps }];
            let exact = evolve_exact(&psi, &gens, &fields, 0.0, 1.0, 1.0).unwrap();
            let approx =
                evolve_first_order(&psi, &gens, &NoiseIntegrals::new(vec![eps])).unwrap();
            errs.push((exact.amplitudes() - approx.amplitudes()).norm());
        }
        let order = (errs[0] / errs[1]).log10();
        assert!((order - 2.0).abs() < 0.1, "residual order {order}");
    }

    #[test]
    fn few_body_embeds_at_the_expected_positions() {
        // Z on qubit 0 of two qubits: diag(1, 1, -1, -1).
        let z0 = few_body_generator(2, &[0], &pauli_z()).unwrap();
        let expect = pauli_z().kron(&Operator::identity(2));
        assert_eq!(z0.matrix(), expect.matrix());
        // X on qubit 1 of two qubits: I tensor X.
        let x1 = few_body_generator(2, &[1], &pauli_x()).unwrap();
        let expect = Operator::identity(2).kron(&pauli_x());
        assert_eq!(x1.matrix(), expect.matrix());
        // Two-qubit coupling on non-adjacent qubits of three.
        let xx = pauli_x().kron(&pauli_x());
        let x0x2 = few_body_generator(3, &[0, 2], &xx).unwrap();
        let expect = pauli_x().kron(&Operator::identity(2)).kron(&pauli_x());
        assert_eq!(x0x2.matrix(), expect.matrix());
    }

    #[test]
    fn few_body_preserves_the_spectral_norm() {
        let zz = pauli_z().kron(&pauli_z());
        let emb = few_body_generator(4, &[1, 3], &zz).unwrap();
        assert!((emb.spectral_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn few_body_rejects_bad_supports() {
        assert!(few_body_generator(3, &[], &pauli_z()).is_err());
        assert!(few_body_generator(3, &[2, 1], &pauli_z().kron(&pauli_z())).is_err());
        assert!(few_body_generator(3, &[3], &pauli_z()).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let nonherm = Operator::generic(m).unwrap();
        assert!(few_body_generator(3, &[0], &nonherm).is_err());
    }

    #[test]
    fn disjoint_supports_commute() {
        let a = few_body_generator(4, &[0, 1], &pauli_x().kron(&pauli_y())).unwrap();
        let b = few_body_generator(4, &[2, 3], &pauli_z().kron(&pauli_x())).unwrap();
        let ab = a.compose(&b).unwrap();
        let ba = b.compose(&a).unwrap();
        let dev = (ab.matrix() - ba.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(dev, 0.0);
    }
}
