//! Iterative search for code spaces orthogonal to a set of error generators.
//!
//! A candidate code of I codewords in dimension N is handled as one
//! supervector |C> of I stacked blocks.  Every scalar constraint on the
//! codewords, orthogonality <gamma_s|gamma_t> = 0 for s < t and error
//! orthogonality <gamma_s|E_m|gamma_t> = 0 for s <= t, becomes the quadratic
//! form of a sparse block supermatrix, so the whole constraint set is the
//! list of values <C|EE_k|C> and a code is a supervector annihilating all of
//! them.  The search repeatedly takes the locally optimal correction along
//! each EE_k|C> direction, applies half of it, and renormalizes the blocks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error_model::GeneratorSet;
use crate::quantum::{C64, Operator, StateVector, TOL};
use crate::rng::{rng_stream, streams};
use crate::{Error, Result};

/// I complex blocks of dimension N, stacked: block s holds codeword s.
#[derive(Debug, Clone, PartialEq)]
pub struct Supervector {
    blocks: Vec<DVector<C64>>,
}

impl Supervector {
    pub fn from_blocks(blocks: Vec<DVector<C64>>) -> Result<Self> {
        let n = blocks.first().map(|b| b.len()).unwrap_or(0);
        if n == 0 {
            return Err(Error::InvalidArgument("supervector needs at least one nonempty block".into()));
        }
        if blocks.iter().any(|b| b.len() != n) {
            return Err(Error::InvalidArgument("supervector blocks must share one dimension".into()));
        }
        Ok(Self { blocks })
    }

    pub fn from_states(states: &[StateVector]) -> Result<Self> {
        Self::from_blocks(states.iter().map(|s| s.amplitudes().clone()).collect())
    }

    /// Random Gaussian blocks, each rescaled to unit norm.
    pub fn random_block_normalized<R: Rng + ?Sized>(n: usize, blocks: usize, rng: &mut R) -> Result<Self> {
        let raw: Vec<DVector<C64>> = (0..blocks)
            .map(|_| DVector::from_fn(n, |_, _| crate::rng::standard_complex(rng)))
            .collect();
        Self::from_blocks(raw)?.block_normalized()
    }

    /// Block dimension N.
    pub fn n(&self) -> usize {
        self.blocks[0].len()
    }

    /// Number of blocks I.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, s: usize) -> &DVector<C64> {
        &self.blocks[s]
    }

    pub fn blocks(&self) -> &[DVector<C64>] {
        &self.blocks
    }

    /// Rescale every block to unit norm; errors if a block is numerically
    /// zero, since its direction is then meaningless.
    pub fn block_normalized(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.blocks.len());
        for (s, b) in self.blocks.iter().enumerate() {
            let norm = b.norm();
            if norm < TOL.block_collapse {
                return Err(Error::RestartRequired { block: s, norm });
            }
            out.push(b / C64::new(norm, 0.0));
        }
        Ok(Self { blocks: out })
    }

    pub fn is_block_normalized(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| (b.norm() - 1.0).abs() <= tol)
    }

    /// Full inner product <self|other> over the stacked vector.
    pub fn inner(&self, other: &Supervector) -> Result<C64> {
        if self.n() != other.n() || self.block_count() != other.block_count() {
            return Err(Error::DimensionMismatch { expected: self.n() * self.block_count(), got: other.n() * other.block_count() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            acc += a.dotc(b);
        }
        Ok(acc)
    }

    pub fn add_scaled(&self, other: &Supervector, coeff: C64) -> Result<Self> {
        if self.n() != other.n() || self.block_count() != other.block_count() {
            return Err(Error::DimensionMismatch { expected: self.n() * self.block_count(), got: other.n() * other.block_count() });
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a + b * coeff)
            .collect();
        Ok(Self { blocks })
    }

    /// Apply one operator to every block (block-diagonal action U (+) ... (+) U).
    pub fn apply_blockwise(&self, op: &Operator) -> Result<Self> {
        if op.dim() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: op.dim() });
        }
        Ok(Self { blocks: self.blocks.iter().map(|b| op.matrix() * b).collect() })
    }

    /// The stacked (N * I)-dimensional vector, block 0 first.
    pub fn stacked(&self) -> DVector<C64> {
        let n = self.n();
        let mut out = DVector::zeros(n * self.blocks.len());
        for (s, b) in self.blocks.iter().enumerate() {
            for r in 0..n {
                out[s * n + r] = b[r];
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }
}

/// What a supermatrix block enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// <gamma_row|gamma_col> = 0 (identity block).
    Orthonormality,
    /// <gamma_row|E_m|gamma_col> = 0 for generator index m.
    Error { generator: usize },
}

/// Sparse supermatrix with a single nonzero N x N block at block position
/// (row_block, col_block); its quadratic form against a supervector is
/// gamma_row^dag B gamma_col, one scalar constraint.
#[derive(Debug, Clone)]
pub struct SuperMatrix {
    n: usize,
    block_count: usize,
    row_block: usize,
    col_block: usize,
    kind: BlockKind,
    block: DMatrix<C64>,
}

impl SuperMatrix {
    pub(crate) fn orthonormality(n: usize, block_count: usize, row_block: usize, col_block: usize) -> Result<Self> {
        if row_block == col_block {
            return Err(Error::InvalidArgument("orthonormality constraints pair distinct blocks".into()));
        }
        Self::build(n, block_count, row_block, col_block, BlockKind::Orthonormality, DMatrix::identity(n, n))
    }

    pub(crate) fn error(
        generator: usize,
        matrix: DMatrix<C64>,
        block_count: usize,
        row_block: usize,
        col_block: usize,
    ) -> Result<Self> {
        let n = matrix.nrows();
        Self::build(n, block_count, row_block, col_block, BlockKind::Error { generator }, matrix)
    }

    fn build(
        n: usize,
        block_count: usize,
        row_block: usize,
        col_block: usize,
        kind: BlockKind,
        block: DMatrix<C64>,
    ) -> Result<Self> {
        if row_block >= block_count || col_block >= block_count {
            return Err(Error::InvalidArgument(format!(
                "block position ({row_block}, {col_block}) out of range for {block_count} blocks"
            )));
        }
        if block.nrows() != n || block.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: block.nrows() });
        }
        Ok(Self { n, block_count, row_block, col_block, kind, block })
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn row_block(&self) -> usize {
        self.row_block
    }

    pub fn col_block(&self) -> usize {
        self.col_block
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// The nonzero N x N block B.
    pub fn block_matrix(&self) -> &DMatrix<C64> {
        &self.block
    }

    /// EE |C>: the single nonzero output block row_block gets B gamma_col.
    pub fn apply(&self, c: &Supervector) -> Result<Supervector> {
        self.check_shape(c)?;
        let mut blocks = vec![DVector::zeros(self.n); self.block_count];
        blocks[self.row_block] = &self.block * c.block(self.col_block);
        Ok(Supervector { blocks })
    }

    /// <C|EE|C> = gamma_row^dag B gamma_col.
    pub fn quadratic_form(&self, c: &Supervector) -> Result<C64> {
        self.check_shape(c)?;
        let bv = &self.block * c.block(self.col_block);
        Ok(c.block(self.row_block).dotc(&bv))
    }

    /// Dense (N I) x (N I) matrix, for tests and small diagnostics.
    pub fn realize(&self) -> DMatrix<C64> {
        let total = self.n * self.block_count;
        let mut out = DMatrix::zeros(total, total);
        for r in 0..self.n {
            for c in 0..self.n {
                out[(self.row_block * self.n + r, self.col_block * self.n + c)] = self.block[(r, c)];
            }
        }
        out
    }

    fn check_shape(&self, c: &Supervector) -> Result<()> {
        if c.n() != self.n || c.block_count() != self.block_count {
            return Err(Error::DimensionMismatch { expected: self.n * self.block_count, got: c.n() * c.block_count() });
        }
        Ok(())
    }
}

/// The full constraint list for a code of `code_dim` codewords against a
/// generator set, in a fixed documented order: first the I(I-1)/2
/// orthonormality constraints (row < col, row-major), then for each
/// generator m in set order the M I(I+1)/2 error constraints over pairs
/// row <= col, row-major.
pub fn build_super_matrices(gens: &GeneratorSet, code_dim: usize) -> Result<Vec<SuperMatrix>> {
    if code_dim == 0 {
        return Err(Error::InvalidArgument("code dimension must be at least 1".into()));
    }
    if code_dim > gens.dim() {
        return Err(Error::InvalidArgument(format!(
            "cannot fit {code_dim} orthonormal codewords in dimension {}",
            gens.dim()
        )));
    }
    let n = gens.dim();
    let i = code_dim;
    let mut mats = Vec::with_capacity(i * (i - 1) / 2 + gens.len() * i * (i + 1) / 2);
    for s in 0..i {
        for t in (s + 1)..i {
            mats.push(SuperMatrix::orthonormality(n, i, s, t)?);
        }
    }
    for (m, g) in gens.generators().iter().enumerate() {
        for s in 0..i {
            for t in s..i {
                mats.push(SuperMatrix::error(m, g.matrix().clone(), i, s, t)?);
            }
        }
    }
    Ok(mats)
}

/// Largest constraint magnitude max_k |<C|EE_k|C>|.
pub fn residual(c: &Supervector, mats: &[SuperMatrix]) -> Result<f64> {
    let mut r: f64 = 0.0;
    for m in mats {
        r = r.max(m.quadratic_form(c)?.norm());
    }
    Ok(r)
}

/// Sum of squared constraint magnitudes; the quantity each step decreases in
/// the typical case.
pub fn constraint_cost(c: &Supervector, mats: &[SuperMatrix]) -> Result<f64> {
    let mut f = 0.0;
    for m in mats {
        f += m.quadratic_form(c)?.norm_sqr();
    }
    Ok(f)
}

/// Per-constraint step coefficients lambda_k = -<EE_k C|C> / <EE_k C|EE_k C>,
/// zero when EE_k|C> vanishes.  lambda_k alone would zero constraint k
/// exactly; the search applies half of their sum.
pub fn optimal_lambdas(c: &Supervector, mats: &[SuperMatrix]) -> Result<Vec<C64>> {
    let mut lambdas = Vec::with_capacity(mats.len());
    for m in mats {
        let q = m.quadratic_form(c)?;
        let d = &m.block * c.block(m.col_block());
        let dd = d.norm_squared();
        if dd < TOL.block_collapse * TOL.block_collapse {
            lambdas.push(C64::new(0.0, 0.0));
        } else {
            // <EE_k C|C> = conj(<C|EE_k C>) = conj(q).
            lambdas.push(-q.conj() / C64::new(dd, 0.0));
        }
    }
    Ok(lambdas)
}

/// One damped correction: C' = block_normalize(C + (1/2) sum_k lambda_k EE_k C).
/// Signals a restart when a block of the update collapses.
pub fn code_search_step(c: &Supervector, mats: &[SuperMatrix]) -> Result<Supervector> {
    let lambdas = optimal_lambdas(c, mats)?;
    let mut updated = c.clone();
    let half = C64::new(0.5, 0.0);
    for (m, lam) in mats.iter().zip(&lambdas) {
        if *lam != C64::new(0.0, 0.0) {
            let d = m.apply(c)?;
            updated = updated.add_scaled(&d, half * lam)?;
        }
    }
    for (s, b) in updated.blocks.iter().enumerate() {
        let norm = b.norm();
        if norm < TOL.block_collapse {
            return Err(Error::RestartRequired { block: s, norm });
        }
    }
    updated.block_normalized()
}

/// A found code: orthonormal codewords with a certified constraint residual.
#[derive(Debug, Clone)]
pub struct CodeSpace {
    codewords: Vec<StateVector>,
    residual: f64,
}

impl CodeSpace {
    /// Validates the orthonormality part of the residual claim directly; the
    /// generator part is checked against a set by `verify`.
    pub fn new(codewords: Vec<StateVector>, residual: f64) -> Result<Self> {
        let first = codewords
            .first()
            .ok_or_else(|| Error::InvalidArgument("a code needs at least one codeword".into()))?;
        let dim = first.dim();
        if codewords.iter().any(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: 0 });
        }
        if !residual.is_finite() || residual < 0.0 {
            return Err(Error::InvalidArgument(format!("residual must be a nonnegative number, got {residual}")));
        }
        let slack = 1e-13;
        for (s, a) in codewords.iter().enumerate() {
            for (t, b) in codewords.iter().enumerate() {
                let target = if s == t { 1.0 } else { 0.0 };
                let dev = (a.inner(b)? - C64::new(target, 0.0)).norm();
                if dev > residual + slack {
                    return Err(Error::NotOrthonormal { deviation: dev, tolerance: residual + slack });
                }
            }
        }
        Ok(Self { codewords, residual })
    }

    pub fn dim(&self) -> usize {
        self.codewords[0].dim()
    }

    pub fn code_dim(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[StateVector] {
        &self.codewords
    }

    pub fn codeword(&self, s: usize) -> &StateVector {
        &self.codewords[s]
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Recompute the worst constraint violation against a generator set,
    /// orthonormality included.
    pub fn verify(&self, gens: &GeneratorSet) -> Result<f64> {
        let mats = build_super_matrices(gens, self.code_dim())?;
        let sv = Supervector::from_states(&self.codewords)?;
        // The supermatrix list covers distinct-pair orthogonality and all
        // generator constraints; the codeword norms are checked on top.
        let mut worst = residual(&sv, &mats)?;
        for a in &self.codewords {
            worst = worst.max((a.inner(a)? - C64::new(1.0, 0.0)).norm());
        }
        Ok(worst)
    }
}

/// Outcome of `find_code`.
#[derive(Debug, Clone)]
pub struct CodeSearchResult {
    pub code: CodeSpace,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub residual_history: Vec<f64>,
}

/// Iterate the damped correction from a random start until the residual
/// drops below `tol`, restarting on block collapse; returns the best iterate
/// seen if the budget runs out.
pub fn find_code(
    gens: &GeneratorSet,
    code_dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<CodeSearchResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mats = build_super_matrices(gens, code_dim)?;
    let mut rng = rng_stream(seed, streams::CODE_SEARCH);
    let n = gens.dim();

    let mut c = Supervector::random_block_normalized(n, code_dim, &mut rng)?;
    let mut history = Vec::new();
    let mut restarts = 0usize;
    let mut best = (c.clone(), f64::INFINITY);
    let mut converged = false;
    let mut iterations = max_iter;

    for iter in 0..=max_iter {
        let r = residual(&c, &mats)?;
        history.push(r);
        if r < best.1 {
            best = (c.clone(), r);
        }
        if r < tol {
            converged = true;
            iterations = iter;
            break;
        }
        if iter == max_iter {
            break;
        }
        match code_search_step(&c, &mats) {
            Ok(next) => c = next,
            Err(Error::RestartRequired { .. }) => {
                restarts += 1;
                c = Supervector::random_block_normalized(n, code_dim, &mut rng)?;
            }
            Err(e) => return Err(e),
        }
    }

    let (best_sv, best_r) = best;
    let codewords = best_sv
        .blocks()
        .iter()
        .map(|b| StateVector::from_dvector(b.clone()))
        .collect::<Result<Vec<_>>>()?;
    let code = CodeSpace::new(codewords, best_r.max(1e-15))?;
    Ok(CodeSearchResult { code, converged, iterations, restarts, residual_history: history })
}

/// Unitary whose first `code_dim` columns are the codewords (after a
/// symmetric orthonormalization absorbing the residual) and whose remaining
/// columns are a random orthonormal completion.
#[derive(Debug, Clone)]
pub struct CodingMatrix {
    op: Operator,
    code_dim: usize,
}

impl CodingMatrix {
    pub fn from_operator(op: Operator, code_dim: usize) -> Result<Self> {
        if code_dim == 0 || code_dim > op.dim() {
            return Err(Error::InvalidArgument(format!(
                "code dimension {code_dim} invalid for a coding matrix of dimension {}",
                op.dim()
            )));
        }
        let dev = op.unitary_deviation();
        if dev > TOL.unitary {
            return Err(Error::NotUnitary { deviation: dev, tolerance: TOL.unitary });
        }
        Ok(Self { op, code_dim })
    }

    /// Trivial coding: the identity, for unprotected and plain-projection
    /// baselines.
    pub fn identity(dim: usize, code_dim: usize) -> Result<Self> {
        Self::from_operator(Operator::identity(dim), code_dim)
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    /// C |psi>.
    pub fn encode(&self, psi: &StateVector) -> Result<StateVector> {
        self.op.apply(psi)
    }

    /// C^dag |psi>; exact inverse of `encode` up to roundoff.
    pub fn decode(&self, psi: &StateVector) -> Result<StateVector> {
        self.op.adjoint().apply(psi)
    }
}

/// Extend a code to a full coding unitary.
///
/// The codeword family is first symmetrically orthonormalized (Gram inverse
/// square root), which moves each codeword by at most about its residual;
/// the remaining columns are random vectors orthogonalized twice against
/// everything before them.  Draws that collapse are retried up to 8 times.
pub fn complete_coding_matrix(code: &CodeSpace, seed: u64) -> Result<CodingMatrix> {
    if code.residual() >= 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "refusing to complete a code with residual {:.3e} (needs < 1e-6)",
            code.residual()
        )));
    }
    let n = code.dim();
    let i = code.code_dim();
    let mut rng = rng_stream(seed, streams::COMPLETION);

    // Symmetric (Gram^-1/2) orthonormalization of the codeword columns.
    let mut basis = DMatrix::<C64>::zeros(n, i);
    for (s, cw) in code.codewords().iter().enumerate() {
        basis.set_column(s, cw.amplitudes());
    }
    let gram = basis.adjoint() * &basis;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut inv_sqrt = DMatrix::<C64>::zeros(i, i);
    for k in 0..i {
        let w = eig.eigenvalues[k];
        if w <= 1e-8 {
            return Err(Error::DegenerateConfiguration(format!(
                "codeword Gram matrix nearly singular (eigenvalue {w:.3e})"
            )));
        }
        let s = C64::new(1.0 / w.sqrt(), 0.0);
        let col = eig.eigenvectors.column(k);
        for a in 0..i {
            for b in 0..i {
                inv_sqrt[(a, b)] += col[a] * s * col[b].conj();
            }
        }
    }
    let ortho = &basis * inv_sqrt;

    let mut cols: Vec<DVector<C64>> = (0..i).map(|s| ortho.column(s).into_owned()).collect();
    for _ in i..n {
        let mut accepted = None;
        for _attempt in 0..8 {
            let mut v = DVector::from_fn(n, |_, _| crate::rng::standard_complex(&mut rng));
            // Two orthogonalization passes keep the completion orthonormal
            // to machine precision.
            for _pass in 0..2 {
                for c in &cols {
                    let overlap = c.dotc(&v);
                    v -= c * overlap;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                accepted = Some(v / C64::new(norm, 0.0));
                break;
            }
        }
        match accepted {
            Some(v) => cols.push(v),
            None => return Err(Error::CompletionFailed { attempts: 8 }),
        }
    }

    let mut u = DMatrix::<C64>::zeros(n, n);
    for (k, c) in cols.iter().enumerate() {
        u.set_column(k, c);
    }
    CodingMatrix::from_operator(Operator::unitary(u)?, i)
}

/// Counting bound for code existence: an ancilla of dimension A can protect
/// against at most A - 1 independent generators.
pub fn hamming_bound(ancilla_dim: usize, generator_count: usize) -> Result<bool> {
    if ancilla_dim == 0 {
        return Err(Error::InvalidArgument("ancilla dimension must be at least 1".into()));
    }
    Ok(ancilla_dim - 1 >= generator_count)
}
