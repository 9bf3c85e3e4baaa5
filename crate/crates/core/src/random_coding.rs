//! How well does a *random* coding suppress few-body errors?
//!
//! For an n-qubit register carrying k information qubits, conjugate each
//! error generator by a random unitary and look at the magnitude of the
//! upper-left 2^k x 2^k block: that is the part of the error the information
//! subspace still feels.  For Haar-random conjugation the block entries of a
//! Frobenius-normalized generator scale like 2^-n, so the suppression
//! improves exponentially in the number of spectator qubits.  The sweep
//! compares that baseline against unitaries reachable by alternating just
//! two two-local control Hamiltonians.

use rand::Rng;

use crate::control::{propagator, ControlPair, TimingVector};
use crate::error_model::few_body_generator;
use crate::fit::{linear_fit, log_log_slope};
use crate::quantum::{haar_random_unitary, pauli_x, pauli_y, pauli_z, C64, Operator};
use crate::rng::{rng_stream, streams};
use crate::{Error, Result};

/// Switch count per register qubit that makes the two-Hamiltonian walk look
/// Haar-like in practice.
pub const DEFAULT_SWITCHES_PER_QUBIT: usize = 8;

/// Default timing window for the random walk segments.
pub const DEFAULT_SWITCH_RANGE: (f64, f64) = (0.1, 2.0);

/// Where a sweep record's coding unitary came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingSource {
    Haar,
    NonHolonomic,
}

impl CodingSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CodingSource::Haar => "haar",
            CodingSource::NonHolonomic => "nonholonomic",
        }
    }
}

impl std::fmt::Display for CodingSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean and max entry magnitude of the information block of C^dag E C,
/// after removing the block's identity component (a global phase drift is
/// not an error).
pub fn projected_error_norm(coding: &Operator, error: &Operator, code_dim: usize) -> Result<(f64, f64)> {
    let t = conjugated_block(coding, error, code_dim)?;
    let trace: C64 = (0..code_dim).map(|i| t[(i, i)]).sum();
    let shift = trace / code_dim as f64;
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for i in 0..code_dim {
        for j in 0..code_dim {
            let v = if i == j { t[(i, j)] - shift } else { t[(i, j)] };
            let m = v.norm();
            sum += m;
            max = max.max(m);
        }
    }
    Ok((sum / (code_dim * code_dim) as f64, max))
}

/// Same as `projected_error_norm` but keeping the identity component.
pub fn projected_error_norm_raw(coding: &Operator, error: &Operator, code_dim: usize) -> Result<(f64, f64)> {
    let t = conjugated_block(coding, error, code_dim)?;
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for v in t.iter() {
        let m = v.norm();
        sum += m;
        max = max.max(m);
    }
    Ok((sum / (code_dim * code_dim) as f64, max))
}

fn conjugated_block(
    coding: &Operator,
    error: &Operator,
    code_dim: usize,
) -> Result<nalgebra::DMatrix<C64>> {
    if coding.dim() != error.dim() {
        return Err(Error::DimensionMismatch { expected: coding.dim(), got: error.dim() });
    }
    if code_dim == 0 || code_dim > coding.dim() {
        return Err(Error::InvalidArgument(format!(
            "information dimension {code_dim} must lie in 1..={}",
            coding.dim()
        )));
    }
    let c_block = coding.matrix().columns(0, code_dim);
    Ok(c_block.adjoint() * error.matrix() * c_block)
}

/// A control pair built from all one-qubit Paulis plus XX, YY, ZZ on every
/// qubit pair, with independent uniform coefficients; both Hamiltonians are
/// spectrally normalized.  This is the "cheap hardware" against which the
/// Haar baseline is judged.
pub fn two_local_control_pair(n_qubits: usize, seed: u64) -> Result<ControlPair> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "the two-local family needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut rng = rng_stream(seed, streams::CONTROL);
    let h_a = random_two_local(n_qubits, &mut rng)?.spectral_normalized()?;
    let h_b = random_two_local(n_qubits, &mut rng)?.spectral_normalized()?;
    ControlPair::new(h_a, h_b, true)
}

fn random_two_local<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Operator> {
    let dim = 1usize << n_qubits;
    let singles = [pauli_x(), pauli_y(), pauli_z()];
    let pairs = [
        pauli_x().kron(&pauli_x()),
        pauli_y().kron(&pauli_y()),
        pauli_z().kron(&pauli_z()),
    ];
    let mut h = Operator::zeros(dim);
    for q in 0..n_qubits {
        for local in &singles {
            let c = rng.gen_range(-1.0..=1.0);
            h = h.add(&few_body_generator(n_qubits, &[q], local)?.scale(c))?;
        }
    }
    for i in 0..n_qubits {
        for j in (i + 1)..n_qubits {
            for local in &pairs {
                let c = rng.gen_range(-1.0..=1.0);
                let local = Operator::hermitian(local.matrix().clone())?;
                h = h.add(&few_body_generator(n_qubits, &[i, j], &local)?.scale(c))?;
            }
        }
    }
    Ok(h)
}

/// Product of `switch_count` alternating-Hamiltonian segments with random
/// durations.  Deterministic in `seed`.
pub fn random_nonholonomic_unitary(
    ctrl: &ControlPair,
    switch_count: usize,
    range: (f64, f64),
    seed: u64,
) -> Result<Operator> {
    if switch_count == 0 {
        return Err(Error::InvalidArgument("the walk needs at least one segment".into()));
    }
    let mut rng = rng_stream(seed, streams::SWEEP);
    let tau = TimingVector::random_in_range(switch_count, range, &mut rng)?;
    propagator(ctrl, &tau)
}

/// How close a unitary's entry statistics are to Haar: the normalized
/// fourth moment N(N+1)/2 * mean |U_ij|^4, which is 1 for Haar and N/2 for
/// a permutation.
pub fn genericity_proxy(u: &Operator) -> f64 {
    let n = u.dim() as f64;
    let mean4 = u.matrix().iter().map(|z| z.norm().powi(4)).sum::<f64>() / (n * n);
    0.5 * n * (n + 1.0) * mean4
}

/// One sweep measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionRecord {
    pub n_qubits: usize,
    pub k_qubits: usize,
    pub source: CodingSource,
    /// Segments in the walk; 0 for the Haar baseline.
    pub switch_count: usize,
    pub seed: u64,
    /// Mean entry magnitude of the information block, averaged over the
    /// generator family.
    pub mean_abs: f64,
    /// Largest entry magnitude over the family.
    pub max_abs: f64,
    /// The Haar-baseline expectation 2^(k - n).
    pub predicted: f64,
}

#[derive(Debug, Clone)]
pub struct SuppressionSweep {
    pub records: Vec<SuppressionRecord>,
    /// Slope of log2(mean suppression) against n - k for the Haar source.
    pub haar_slope: Option<f64>,
    pub nonholonomic_slope: Option<f64>,
    /// True when register sizes beyond the budget cap were dropped.
    pub truncated: bool,
}

/// Largest register the sweep will simulate; beyond this the dense matrices
/// stop being worth the wall time.
pub const MAX_SWEEP_QUBITS: usize = 10;

/// The fixed error family probed by the sweep: one single-qubit flip and
/// two far-apart couplings, all traceless and Frobenius-normalized so the
/// block statistics are comparable across n.
pub fn sweep_generators(n_qubits: usize) -> Result<Vec<Operator>> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "the sweep family needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let zz = Operator::hermitian(pauli_z().kron(&pauli_z()).matrix().clone())?;
    let xx = Operator::hermitian(pauli_x().kron(&pauli_x()).matrix().clone())?;
    Ok(vec![
        few_body_generator(n_qubits, &[0], &pauli_x())?.frobenius_normalized()?,
        few_body_generator(n_qubits, &[0, n_qubits - 1], &zz)?.frobenius_normalized()?,
        few_body_generator(n_qubits, &[n_qubits - 2, n_qubits - 1], &xx)?.frobenius_normalized()?,
    ])
}

/// Compare Haar and two-local-walk codings across register sizes.
///
/// For each n and each of `seeds_per_point` seeds, one record per source is
/// produced; the per-source slope is fit on log2 of the seed-averaged mean
/// suppression against the spectator count n - k.
pub fn suppression_sweep(
    n_list: &[usize],
    k_qubits: usize,
    switches_per_qubit: usize,
    seeds_per_point: usize,
    base_seed: u64,
) -> Result<SuppressionSweep> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("the sweep needs at least one register size".into()));
    }
    if seeds_per_point == 0 {
        return Err(Error::InvalidArgument("seeds_per_point must be at least 1".into()));
    }
    if switches_per_qubit == 0 {
        return Err(Error::InvalidArgument("switches_per_qubit must be at least 1".into()));
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut truncated = false;
    for &n in n_list {
        if n > MAX_SWEEP_QUBITS {
            truncated = true;
            log::warn!(
                "dropping register size {n}: dense sweep is capped at {MAX_SWEEP_QUBITS} qubits"
            );
            continue;
        }
        if k_qubits >= n {
            return Err(Error::InvalidArgument(format!(
                "k = {k_qubits} information qubits need a strictly larger register, got n = {n}"
            )));
        }
        kept.push(n);
    }
    if kept.is_empty() {
        return Err(Error::InvalidArgument("every register size exceeded the sweep cap".into()));
    }

    let code_dim = 1usize << k_qubits;
    let mut records = Vec::new();
    let mut haar_means: Vec<(f64, f64)> = Vec::new();
    let mut nh_means: Vec<(f64, f64)> = Vec::new();
    for &n in &kept {
        let dim = 1usize << n;
        let gens = sweep_generators(n)?;
        let predicted = (2.0_f64).powi(k_qubits as i32 - n as i32);
        let switch_count = switches_per_qubit * n;
        let mut haar_acc = 0.0;
        let mut nh_acc = 0.0;
        for s in 0..seeds_per_point {
            let seed = base_seed.wrapping_add((n as u64) * 10_000 + s as u64);
            let haar = haar_random_unitary(dim, seed)?;
            let (mean_h, max_h) = family_suppression(&haar, &gens, code_dim)?;
            records.push(SuppressionRecord {
                n_qubits: n,
                k_qubits,
                source: CodingSource::Haar,
                switch_count: 0,
                seed,
                mean_abs: mean_h,
                max_abs: max_h,
                predicted,
            });
            haar_acc += mean_h;

            let ctrl = two_local_control_pair(n, seed)?;
            let walk = random_nonholonomic_unitary(&ctrl, switch_count, DEFAULT_SWITCH_RANGE, seed)?;
            let (mean_n, max_n) = family_suppression(&walk, &gens, code_dim)?;
            records.push(SuppressionRecord {
                n_qubits: n,
                k_qubits,
                source: CodingSource::NonHolonomic,
                switch_count,
                seed,
                mean_abs: mean_n,
                max_abs: max_n,
                predicted,
            });
            nh_acc += mean_n;
        }
        let x = (n - k_qubits) as f64;
        haar_means.push((x, haar_acc / seeds_per_point as f64));
        nh_means.push((x, nh_acc / seeds_per_point as f64));
    }

    Ok(SuppressionSweep {
        records,
        haar_slope: slope_log2(&haar_means),
        nonholonomic_slope: slope_log2(&nh_means),
        truncated,
    })
}

fn family_suppression(coding: &Operator, gens: &[Operator], code_dim: usize) -> Result<(f64, f64)> {
    let mut mean = 0.0;
    let mut max = 0.0_f64;
    for g in gens {
        let (m, mx) = projected_error_norm(coding, g, code_dim)?;
        mean += m;
        max = max.max(mx);
    }
    Ok((mean / gens.len() as f64, max))
}

fn slope_log2(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, y)| !(y > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.log2()).collect();
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}

/// Number of distinct coupling terms in the two-local control family:
/// 3 singles per qubit would overcount the walk's freedom, so count the
/// qubits once plus the three pair species.
pub fn coupling_family_count(n_qubits: usize) -> usize {
    n_qubits + 3 * n_qubits * (n_qubits - 1) / 2
}

/// Log-log growth rate of the control-term count over the register sizes:
/// about 2, i.e. quadratically many knobs reach Haar-like codings whose
/// generic construction would need exponentially many.
pub fn sparsity_audit(n_list: &[usize]) -> Option<f64> {
    if n_list.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = n_list.iter().map(|&n| coupling_family_count(n) as f64).collect();
    log_log_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_counts_grow_quadratically() {
        assert_eq!(coupling_family_count(4), 22);
        assert_eq!(coupling_family_count(8), 92);
        let slope = sparsity_audit(&[4, 5, 6, 7, 8]).unwrap();
        assert!((1.85..2.25).contains(&slope), "slope {slope}");
    }

    #[test]
    fn projected_norm_drops_the_identity_component() {
        // Z on qubit 0 of two qubits restricts to the information block as
        // a multiple of the identity: pure phase drift, no error content.
        let z0 = few_body_generator(2, &[0], &pauli_z()).unwrap().frobenius_normalized().unwrap();
        let c = Operator::identity(4);
        let (mean, max) = projected_error_norm(&c, &z0, 2).unwrap();
        assert!(mean < 1e-15 && max < 1e-15);
        let (raw_mean, raw_max) = projected_error_norm_raw(&c, &z0, 2).unwrap();
        assert!((raw_mean - 0.25).abs() < 1e-12, "raw mean {raw_mean}");
        assert!((raw_max - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_local_pair_is_deterministic_and_traceless() {
        let a = two_local_control_pair(3, 11).unwrap();
        let b = two_local_control_pair(3, 11).unwrap();
        assert_eq!(a.h_a().matrix(), b.h_a().matrix());
        assert_eq!(a.h_b().matrix(), b.h_b().matrix());
        assert!(a.h_a().trace().norm() < 1e-12);
        assert!(a.h_b().trace().norm() < 1e-12);
        assert!((a.h_a().matrix() - a.h_b().matrix()).norm() > 1e-3);
        let c = two_local_control_pair(3, 12).unwrap();
        assert!((a.h_a().matrix() - c.h_a().matrix()).norm() > 1e-3);
    }

    #[test]
    fn walk_is_unitary_and_seed_stable() {
        let ctrl = two_local_control_pair(3, 5).unwrap();
        let u = random_nonholonomic_unitary(&ctrl, 12, DEFAULT_SWITCH_RANGE, 9).unwrap();
        assert!(u.unitary_deviation() < 1e-9);
        let v = random_nonholonomic_unitary(&ctrl, 12, DEFAULT_SWITCH_RANGE, 9).unwrap();
        assert_eq!(u.matrix(), v.matrix());
        let w = random_nonholonomic_unitary(&ctrl, 12, DEFAULT_SWITCH_RANGE, 10).unwrap();
        assert!((u.matrix() - w.matrix()).norm() > 1e-6);
    }

    #[test]
    fn haar_proxy_is_near_one_and_short_walks_are_less_generic() {
        let mut acc = 0.0;
        for seed in 0..6 {
            acc += genericity_proxy(&haar_random_unitary(16, seed).unwrap());
        }
        let haar = acc / 6.0;
        assert!((haar - 1.0).abs() < 0.2, "haar proxy {haar}");

        let mut short = 0.0;
        let mut long = 0.0;
        for seed in 0..6 {
            let ctrl = two_local_control_pair(3, seed).unwrap();
            short += genericity_proxy(
                &random_nonholonomic_unitary(&ctrl, 2, DEFAULT_SWITCH_RANGE, seed).unwrap(),
            );
            long += genericity_proxy(
                &random_nonholonomic_unitary(&ctrl, 24, DEFAULT_SWITCH_RANGE, seed).unwrap(),
            );
        }
        assert!(
            long < short,
            "proxy should fall toward 1 with more switches: short {short}, long {long}"
        );
    }

    #[test]
    fn small_sweep_produces_records_and_slopes() {
        let sweep = suppression_sweep(&[2, 3], 1, 4, 2, 0).unwrap();
        assert_eq!(sweep.records.len(), 2 * 2 * 2);
        assert!(!sweep.truncated);
        assert!(sweep.haar_slope.is_some());
        assert!(sweep.nonholonomic_slope.is_some());
        for r in &sweep.records {
            assert!(r.mean_abs > 0.0 && r.max_abs >= r.mean_abs);
            assert!((r.predicted - (2.0_f64).powi(1 - r.n_qubits as i32)).abs() < 1e-15);
            match r.source {
                CodingSource::Haar => assert_eq!(r.switch_count, 0),
                CodingSource::NonHolonomic => assert_eq!(r.switch_count, 4 * r.n_qubits),
            }
        }
    }

    #[test]
    fn oversized_registers_are_dropped_with_a_flag() {
        let sweep = suppression_sweep(&[2, 3, 11], 1, 2, 1, 0).unwrap();
        assert!(sweep.truncated);
        assert!(sweep.records.iter().all(|r| r.n_qubits <= MAX_SWEEP_QUBITS));
        assert!(suppression_sweep(&[11], 1, 2, 1, 0).is_err());
        assert!(suppression_sweep(&[3], 3, 2, 1, 0).is_err());
    }
}
