//! ADMM solver for `min ||Au - y||^2 + lambda * sum_i |Du_i|^(p_i)`.
//!
//! The splitting introduces `v = Fu` with scaled dual `w`. Each iteration
//! solves the quadratic u-subproblem through a cached symmetric factorization,
//! applies the separable gradient prox per pixel (isotropic grouping in 2D),
//! and ascends the dual: `w <- w + Fu - v`.

use crate::error::{Error, Result};
use crate::fft;
use crate::numerics::{chandrupatla_root, RootConfig};
use crate::operators::{
    gradient_adjoint, gradient_apply, GradientField, MeasurementOperator, Selection, Shape, Signal,
};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rustfft::num_complex::Complex64;

/// Per-component regularization exponents, each in [1, 2].
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    per_component: Vec<f64>,
}

impl ExponentField {
    pub fn new(per_component: Vec<f64>) -> Result<Self> {
        if per_component
            .iter()
            .any(|&p| !(1.0..=2.0).contains(&p) || !p.is_finite())
        {
            return Err(Error::InvalidInput(
                "exponents must lie in [1, 2]".into(),
            ));
        }
        Ok(ExponentField { per_component })
    }

    pub fn homogeneous(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.per_component
    }

    pub fn len(&self) -> usize {
        self.per_component.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_component.is_empty()
    }
}

/// ADMM parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Constraint penalty rho (> 0).
    pub rho: f64,
    /// Regularization weight lambda (> 0).
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop when `||Fu - v||_2 <= tol_primal * sqrt(M)`.
    pub tol_primal: f64,
    /// ... and `rho * ||v_new - v_old||_2 <= tol_dual * sqrt(M)`.
    pub tol_dual: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            lambda: 1.0,
            max_iter: 2000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rho > 0.0
            && self.lambda > 0.0
            && self.tol_primal > 0.0
            && self.tol_dual > 0.0
            && self.max_iter >= 1
            && self.rho.is_finite()
            && self.lambda.is_finite();
        if !ok {
            return Err(Error::InvalidInput(format!(
                "solver config fields must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// ADMM iterate triple with residuals.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub k: usize,
    pub primal_res: f64,
    pub dual_res: f64,
}

/// Solver output: the reconstruction plus per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub u_hat: Signal,
    pub iterations: usize,
    /// False if the run stopped at `max_iter` without meeting the tolerances.
    pub converged: bool,
    pub primal_history: Vec<f64>,
    pub dual_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub state: AdmmState,
}

/// Soft thresholding: `sgn(q) * max(|q| - kappa, 0)`.
pub fn shrink(kappa: f64, q: f64) -> f64 {
    q.signum() * (q.abs() - kappa).max(0.0)
}

/// Proximal map of `|.|^p` at `q >= 0` with parameter `rho`:
/// `argmin_x |x|^p + (rho/2)(x - q)^2`.
///
/// For `p = 1` this is shrinkage with threshold `1/rho`; for `p > 1` it is the
/// unique zero on `[0, q]` of `h(x) = sgn(x) p |x|^(p-1) + rho (x - q)`,
/// located with Chandrupatla's method. For `p` near 1 the root can be
/// exponentially small (it scales like `(rho q / p)^(1/(p-1))` when
/// `rho q < p`), so the bracketing runs on the substitution `x = q e^(-s)`,
/// where `h` is smooth in `s` across every regime; the result is then
/// polished to the neighboring float minimizing `|h|`. A root below the
/// smallest positive float rounds to 0 and is returned directly.
pub fn prox_scalar(p: f64, rho: f64, q: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidInput(format!("exponent {p} outside [1, 2]")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!("prox parameter {rho} must be > 0")));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidInput(format!("prox argument {q} must be >= 0")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(shrink(1.0 / rho, q));
    }
    let pm1 = p - 1.0;
    let h = |x: f64| x.signum() * p * x.abs().powf(pm1) + rho * (x - q);
    // h(0) = -rho q < 0 and h(q) = p q^(p-1) > 0, so [0, q] brackets the root.
    if h(f64::MIN_POSITIVE) >= 0.0 {
        return Ok(0.0);
    }
    // g(s) = h(q e^(-s)) in a numerically stable arrangement; strictly
    // decreasing with g(0) > 0. The upper bound pushes x to the subnormal
    // floor, where the precheck above guarantees a sign change.
    let ln_q = q.ln();
    let g = |s: f64| p * (pm1 * (ln_q - s)).exp() + rho * q * (-s).exp_m1();
    let s_hi = (ln_q + 745.0).max(1.0);
    let s = chandrupatla_root(g, 0.0, s_hi, &RootConfig::exact(200))?;
    let center = q * (-s).exp();

    // The s-space answer places x within a couple of ulps of the root;
    // scan the float neighborhood for the literal-h minimizer.
    let mut best = center.clamp(0.0, q);
    let mut best_h = h(best).abs();
    for step in [-3i32, -2, -1, 1, 2, 3] {
        let mut x = center;
        for _ in 0..step.abs() {
            x = if step > 0 { x.next_up() } else { x.next_down() };
        }
        let x = x.clamp(0.0, q);
        let hx = h(x).abs();
        if hx < best_h {
            best = x;
            best_h = hx;
        }
    }
    Ok(best)
}

/// Gradient prox applied blockwise: for each pixel block `x_i` of `target`
/// (a scalar in 1D, an `(x, y)` difference pair in 2D),
/// `v_i = prox(p_i, rho_over_lambda, ||x_i||_2) * x_i / ||x_i||_2`.
pub fn v_update(
    target: &GradientField,
    p: &ExponentField,
    rho_over_lambda: f64,
) -> Result<GradientField> {
    let shape = target.shape();
    let n = shape.len();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "exponent field vs signal length",
            expected: n,
            got: p.len(),
        });
    }
    if !(rho_over_lambda > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rho/lambda must be > 0, got {rho_over_lambda}"
        )));
    }
    let t = target.values();
    let ps = p.values();
    let mut out = vec![0.0; t.len()];
    match shape {
        Shape::OneD(_) => {
            for i in 0..n {
                let mag = t[i].abs();
                if mag > 0.0 {
                    out[i] = prox_scalar(ps[i], rho_over_lambda, mag)? * t[i].signum();
                }
            }
        }
        Shape::TwoD { .. } => {
            for i in 0..n {
                let (gx, gy) = (t[i], t[n + i]);
                let mag = gx.hypot(gy);
                if mag > 0.0 {
                    let s = prox_scalar(ps[i], rho_over_lambda, mag)? / mag;
                    out[i] = s * gx;
                    out[n + i] = s * gy;
                }
            }
        }
    }
    GradientField::new(out, shape)
}

// --------------------------------------------------------------------------
// Normal-equation solver for the u-subproblem
// --------------------------------------------------------------------------

/// Largest signal size for which the dense normal matrix is assembled.
const DENSE_LIMIT: usize = 8192;

/// Pivot-ratio threshold declaring the normal matrix near-singular.
const PIVOT_RATIO: f64 = 1e-12;

enum Backend {
    Dense {
        chol: Cholesky<f64, Dyn>,
    },
    /// Partial Fourier whose 2D selection is a product `K x (all frequencies)`
    /// along one axis. The full axis is diagonalized by the DCT eigenbasis of
    /// its Neumann Laplacian, leaving one small SPD system per frequency.
    Separable {
        /// Signal is processed as an `n_full x n_sub` matrix; true when that
        /// matrix is the transpose of the row-major grid.
        transposed: bool,
        n_full: usize,
        n_sub: usize,
        basis: DMatrix<f64>,
        blocks: Vec<Cholesky<f64, Dyn>>,
    },
}

/// Factorization handle for `(A^T A + rho F^T F) u = b`, reusable across ADMM
/// iterations and across lambda values sharing `(op, rho)`.
pub struct NormalSolver {
    shape: Shape,
    rho: f64,
    backend: Backend,
    /// True when the operator cannot observe constant signals (no DC
    /// frequency measured), i.e. constants lie in the normal matrix nullspace.
    constants_unobserved: bool,
}

impl NormalSolver {
    pub fn new(op: &MeasurementOperator, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidInput(format!(
                "normal solver rho must be > 0, got {rho}"
            )));
        }
        let shape = op.signal_shape();
        let constants_unobserved = match op.selection() {
            Some(Selection::OneD(ks)) => !ks.contains(&0),
            Some(Selection::TwoD(ks)) => !ks.contains(&(0, 0)),
            None => false,
        };
        let backend = match (op.selection(), shape) {
            (Some(Selection::TwoD(ks)), Shape::TwoD { rows, cols }) => {
                match detect_product_mask(ks, rows, cols) {
                    Some(axes) => build_separable(ks, rows, cols, rho, axes)?,
                    None => build_dense(op, rho)?,
                }
            }
            _ => build_dense(op, rho)?,
        };
        Ok(NormalSolver {
            shape,
            rho,
            backend,
            constants_unobserved,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// True when constant signals are flagged in the nullspace check at
    /// assembly (mask without the DC component).
    pub fn constants_unobserved(&self) -> bool {
        self.constants_unobserved
    }

    /// Solves `(A^T A + rho F^T F) u = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.shape.len() {
            return Err(Error::DimensionMismatch {
                context: "normal solve rhs",
                expected: self.shape.len(),
                got: rhs.len(),
            });
        }
        match &self.backend {
            Backend::Dense { chol } => {
                let mut b = DVector::from_column_slice(rhs);
                chol.solve_mut(&mut b);
                Ok(b.as_slice().to_vec())
            }
            Backend::Separable {
                transposed,
                n_full,
                n_sub,
                basis,
                blocks,
            } => {
                let (rows, cols) = match self.shape {
                    Shape::TwoD { rows, cols } => (rows, cols),
                    Shape::OneD(_) => unreachable!("separable backend is 2D only"),
                };
                // Lay the rhs out as n_full x n_sub.
                let x = if *transposed {
                    DMatrix::from_fn(*n_full, *n_sub, |f, s| rhs[s * cols + f])
                } else {
                    DMatrix::from_fn(*n_full, *n_sub, |f, s| rhs[f * cols + s])
                };
                let mut w = basis.transpose() * x;
                let mut row = DVector::zeros(*n_sub);
                for j in 0..*n_full {
                    for s in 0..*n_sub {
                        row[s] = w[(j, s)];
                    }
                    blocks[j].solve_mut(&mut row);
                    for s in 0..*n_sub {
                        w[(j, s)] = row[s];
                    }
                }
                let sol = basis * w;
                let mut out = vec![0.0; rows * cols];
                for f in 0..*n_full {
                    for s in 0..*n_sub {
                        let idx = if *transposed { s * cols + f } else { f * cols + s };
                        out[idx] = sol[(f, s)];
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Which axis carries the frequency subset in a product mask.
enum ProductAxes {
    /// Selection is `Kx x (all ky)`: full axis = rows.
    SubsetX { kx: Vec<usize> },
    /// Selection is `(all kx) x Ky`: full axis = cols.
    SubsetY { ky: Vec<usize> },
}

fn detect_product_mask(
    ks: &[(usize, usize)],
    rows: usize,
    cols: usize,
) -> Option<ProductAxes> {
    let mut grid = vec![false; rows * cols];
    let mut kx_set = vec![false; cols];
    let mut ky_set = vec![false; rows];
    for &(kx, ky) in ks {
        grid[ky * cols + kx] = true;
        kx_set[kx] = true;
        ky_set[ky] = true;
    }
    let kx: Vec<usize> = (0..cols).filter(|&i| kx_set[i]).collect();
    let ky: Vec<usize> = (0..rows).filter(|&i| ky_set[i]).collect();
    if ks.len() != kx.len() * ky.len() {
        return None;
    }
    for &x in &kx {
        for &y in &ky {
            if !grid[y * cols + x] {
                return None;
            }
        }
    }
    if ky.len() == rows {
        Some(ProductAxes::SubsetX { kx })
    } else if kx.len() == cols {
        Some(ProductAxes::SubsetY { ky })
    } else {
        None
    }
}

/// One-dimensional `F^T F` stencil (Neumann Laplacian): diagonal entries
/// 1, 2, ..., 2, 1 with -1 off-diagonals.
fn laplacian_1d(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut d = 0.0;
        if i + 1 < n {
            d += 1.0;
        }
        if i >= 1 {
            d += 1.0;
        }
        m[(i, i)] = d;
        if i + 1 < n {
            m[(i, i + 1)] = -1.0;
            m[(i + 1, i)] = -1.0;
        }
    }
    m
}

/// Orthonormal DCT-II eigenbasis of `laplacian_1d(n)`; column `j` has
/// eigenvalue `4 sin^2(pi j / (2n))`.
fn dct_basis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, j| {
        let scale = if j == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        scale * (std::f64::consts::PI * (r as f64 + 0.5) * j as f64 / n as f64).cos()
    })
}

/// Cosine Gram matrix of a frequency subset on an axis of length `n`:
/// `G[a, b] = sum_k cos(2 pi k (a - b) / n)`.
fn cos_gram(freqs: &[usize], n: usize) -> DMatrix<f64> {
    let mut c = vec![0.0; n];
    for (d, cd) in c.iter_mut().enumerate() {
        *cd = freqs
            .iter()
            .map(|&k| (2.0 * std::f64::consts::PI * k as f64 * d as f64 / n as f64).cos())
            .sum();
    }
    DMatrix::from_fn(n, n, |a, b| {
        let d = if a >= b { a - b } else { b - a };
        c[d]
    })
}

fn cholesky_checked(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(m).ok_or_else(|| singular_error(what))?;
    let diag = chol.l_dirty().diagonal();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &d in diag.iter() {
        if !d.is_finite() {
            return Err(singular_error(what));
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    // Pivots of L L^T are the squared diagonal entries.
    if lo * lo < PIVOT_RATIO * hi * hi {
        return Err(singular_error(what));
    }
    Ok(chol)
}

fn singular_error(what: &str) -> Error {
    Error::SingularSystem(format!(
        "{what}: normal matrix is singular or near-singular; constant signals \
         appear unobservable — use a frequency mask that measures the DC component"
    ))
}

fn build_separable(
    ks: &[(usize, usize)],
    rows: usize,
    cols: usize,
    rho: f64,
    axes: ProductAxes,
) -> Result<Backend> {
    let _ = ks;
    let (transposed, n_full, n_sub, subset) = match axes {
        ProductAxes::SubsetX { kx } => (false, rows, cols, kx),
        ProductAxes::SubsetY { ky } => (true, cols, rows, ky),
    };
    let gram = cos_gram(&subset, n_sub);
    let lap_sub = laplacian_1d(n_sub);
    let base = gram * (n_full as f64) + lap_sub * rho;
    let basis = dct_basis(n_full);
    let mut blocks = Vec::with_capacity(n_full);
    for j in 0..n_full {
        let half = std::f64::consts::PI * j as f64 / (2.0 * n_full as f64);
        let eig = 4.0 * half.sin() * half.sin();
        let mut block = base.clone();
        for s in 0..n_sub {
            block[(s, s)] += rho * eig;
        }
        blocks.push(cholesky_checked(block, "separable Fourier block")?);
    }
    Ok(Backend::Separable {
        transposed,
        n_full,
        n_sub,
        basis,
        blocks,
    })
}

fn build_dense(op: &MeasurementOperator, rho: f64) -> Result<Backend> {
    let shape = op.signal_shape();
    let n = shape.len();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!(
            "dense normal matrix at N = {n} exceeds the supported size {DENSE_LIMIT}; \
             use a product partial-Fourier mask (subset along one axis, all \
             frequencies along the other) for large 2D problems"
        )));
    }
    let mut m = match op.selection() {
        Some(sel) => gram_from_selection(sel, shape),
        None => {
            // Identity or dense matrix kind: assemble A^T A directly.
            if op.is_partial_fourier() {
                unreachable!("partial Fourier handled above");
            }
            let mut aa = DMatrix::zeros(n, n);
            // A^T A column by column via operator applications.
            let mut e = Signal::zeros(shape);
            for j in 0..n {
                let mut vals = vec![0.0; n];
                vals[j] = 1.0;
                e = Signal::new(vals, shape)?;
                let col = op.adjoint_apply(&op.forward_apply(&e)?)?;
                for i in 0..n {
                    aa[(i, j)] = col[i];
                }
            }
            let _ = e;
            aa
        }
    };
    add_gradient_gram(&mut m, shape, rho);
    Ok(Backend::Dense {
        chol: cholesky_checked(m, "dense normal matrix")?,
    })
}

/// Assembles `A^T A` for a partial Fourier operator. The matrix is
/// (block-)circulant with symbol `Re(sum_sel e^(2 pi i k d / N))`, obtained
/// from one unnormalized inverse DFT of the selection indicator.
fn gram_from_selection(sel: &Selection, shape: Shape) -> DMatrix<f64> {
    let n = shape.len();
    match (sel, shape) {
        (Selection::OneD(ks), Shape::OneD(_)) => {
            let mut ind = vec![Complex64::default(); n];
            for &k in ks {
                ind[k] = Complex64::new(1.0, 0.0);
            }
            fft::dft_line(&mut ind, false);
            DMatrix::from_fn(n, n, |i, j| {
                let d = (i + n - j) % n;
                ind[d].re
            })
        }
        (Selection::TwoD(ks), Shape::TwoD { rows, cols }) => {
            let mut ind = vec![Complex64::default(); n];
            for &(kx, ky) in ks {
                ind[ky * cols + kx] = Complex64::new(1.0, 0.0);
            }
            fft::dft_grid(&mut ind, rows, cols, false);
            DMatrix::from_fn(n, n, |i, j| {
                let (ri, ci) = (i / cols, i % cols);
                let (rj, cj) = (j / cols, j % cols);
                let dr = (ri + rows - rj) % rows;
                let dc = (ci + cols - cj) % cols;
                ind[dr * cols + dc].re
            })
        }
        _ => unreachable!("selection validated against shape at construction"),
    }
}

/// Adds `rho * F^T F` to a dense matrix.
fn add_gradient_gram(m: &mut DMatrix<f64>, shape: Shape, rho: f64) {
    match shape {
        Shape::OneD(n) => {
            for i in 0..n.saturating_sub(1) {
                m[(i, i)] += rho;
                m[(i + 1, i + 1)] += rho;
                m[(i, i + 1)] -= rho;
                m[(i + 1, i)] -= rho;
            }
        }
        Shape::TwoD { rows, cols } => {
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        m[(i, i)] += rho;
                        m[(i + 1, i + 1)] += rho;
                        m[(i, i + 1)] -= rho;
                        m[(i + 1, i)] -= rho;
                    }
                    if r + 1 < rows {
                        let k = i + cols;
                        m[(i, i)] += rho;
                        m[(k, k)] += rho;
                        m[(i, k)] -= rho;
                        m[(k, i)] -= rho;
                    }
                }
            }
        }
    }
}

/// Solves `(A^T A + rho F^T F) u = A^T y + rho F^T x` for the quadratic
/// u-subproblem. Builds a fresh factorization; use [`AdmmWorkspace`] to reuse
/// one across iterations and lambda values.
pub fn u_update(
    op: &MeasurementOperator,
    y: &[f64],
    rho: f64,
    rhs_field: &GradientField,
) -> Result<Vec<f64>> {
    let solver = NormalSolver::new(op, rho)?;
    u_update_with(&solver, op, y, rhs_field)
}

/// As [`u_update`] but reusing an existing factorization handle.
pub fn u_update_with(
    solver: &NormalSolver,
    op: &MeasurementOperator,
    y: &[f64],
    rhs_field: &GradientField,
) -> Result<Vec<f64>> {
    if rhs_field.shape() != solver.shape() {
        return Err(Error::DimensionMismatch {
            context: "u_update rhs field shape",
            expected: solver.shape().gradient_len(),
            got: rhs_field.len(),
        });
    }
    let aty = op.adjoint_apply(y)?;
    let ftx = gradient_adjoint(rhs_field);
    let rho = solver.rho();
    let rhs: Vec<f64> = aty
        .iter()
        .zip(&ftx)
        .map(|(a, f)| a + rho * f)
        .collect();
    solver.solve(&rhs)
}

// --------------------------------------------------------------------------
// ADMM driver
// --------------------------------------------------------------------------

/// Reusable per-operator solver state: owns the factorization shared by every
/// lambda at a fixed `(op, rho)` pair. Immutable after construction, so one
/// workspace may serve concurrent solves.
pub struct AdmmWorkspace<'a> {
    op: &'a MeasurementOperator,
    solver: NormalSolver,
    rho: f64,
}

impl<'a> AdmmWorkspace<'a> {
    pub fn new(op: &'a MeasurementOperator, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidInput(format!("rho must be > 0, got {rho}")));
        }
        // The u-step minimizes ||Au - y||^2 + (rho/2) ||Fu - x||_2^2, whose
        // normal system is (A^T A + (rho/2) F^T F) u = A^T y + (rho/2) F^T x.
        let solver = NormalSolver::new(op, rho / 2.0)?;
        Ok(AdmmWorkspace { op, solver, rho })
    }

    pub fn operator(&self) -> &MeasurementOperator {
        self.op
    }

    pub fn solve(
        &self,
        y: &[f64],
        p: &ExponentField,
        cfg: &SolverConfig,
        init: Option<AdmmState>,
    ) -> Result<ReconstructionResult> {
        cfg.validate()?;
        if cfg.rho != self.rho {
            return Err(Error::InvalidInput(format!(
                "workspace was built for rho = {}, config asks rho = {}",
                self.rho, cfg.rho
            )));
        }
        let shape = self.op.signal_shape();
        let n = shape.len();
        let m_grad = shape.gradient_len();
        if y.len() != self.op.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "admm measurement length",
                expected: self.op.out_dim(),
                got: y.len(),
            });
        }
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "admm exponent field length",
                expected: n,
                got: p.len(),
            });
        }

        let (mut u, mut v, mut w) = match init {
            Some(state) => {
                if state.u.len() != n || state.v.len() != m_grad || state.w.len() != m_grad {
                    return Err(Error::InvalidInput(
                        "warm-start state does not match problem dimensions".into(),
                    ));
                }
                (state.u, state.v, state.w)
            }
            None => (vec![0.0; n], vec![0.0; m_grad], vec![0.0; m_grad]),
        };

        let aty = self.op.adjoint_apply(y)?;
        let rho_half = self.rho / 2.0;
        let sigma = self.rho / cfg.lambda;
        let tol_primal = cfg.tol_primal * (m_grad as f64).sqrt();
        let tol_dual = cfg.tol_dual * (m_grad as f64).sqrt();

        let mut primal_history = Vec::new();
        let mut dual_history = Vec::new();
        let mut objective_history = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        let mut primal_res = f64::INFINITY;
        let mut dual_res = f64::INFINITY;

        for _ in 0..cfg.max_iter {
            // u-update
            let diff: Vec<f64> = v.iter().zip(&w).map(|(vi, wi)| vi - wi).collect();
            let ftx = gradient_adjoint(&GradientField::new(diff, shape)?);
            let rhs: Vec<f64> = aty
                .iter()
                .zip(&ftx)
                .map(|(a, f)| a + rho_half * f)
                .collect();
            u = self.solver.solve(&rhs)?;
            let u_signal = Signal::new(u.clone(), shape)?;
            let fu = gradient_apply(&u_signal);

            // v-update on Fu + w
            let target: Vec<f64> = fu.values().iter().zip(&w).map(|(f, wi)| f + wi).collect();
            let v_new = v_update(&GradientField::new(target, shape)?, p, sigma)?;
            dual_res = self.rho
                * v_new
                    .values()
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            v = v_new.into_values();

            // dual ascent
            primal_res = 0.0;
            for i in 0..m_grad {
                let r = fu.values()[i] - v[i];
                w[i] += r;
                primal_res += r * r;
            }
            primal_res = primal_res.sqrt();

            iterations += 1;
            primal_history.push(primal_res);
            dual_history.push(dual_res);
            objective_history.push(objective_value(self.op, y, &u_signal, p, cfg.lambda)?);

            if primal_res <= tol_primal && dual_res <= tol_dual {
                converged = true;
                break;
            }
        }

        Ok(ReconstructionResult {
            u_hat: Signal::new(u.clone(), shape)?,
            iterations,
            converged,
            primal_history,
            dual_history,
            objective_history,
            state: AdmmState {
                u,
                v,
                w,
                k: iterations,
                primal_res,
                dual_res,
            },
        })
    }
}

/// Objective `||Au - y||^2 + lambda sum_i ||(Fu)_i||_2^(p_i)` with blockwise
/// (isotropic) gradient magnitudes.
pub fn objective_value(
    op: &MeasurementOperator,
    y: &[f64],
    u: &Signal,
    p: &ExponentField,
    lambda: f64,
) -> Result<f64> {
    let au = op.forward_apply(u)?;
    if au.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "objective measurement length",
            expected: au.len(),
            got: y.len(),
        });
    }
    let fidelity: f64 = au.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(fidelity + lambda * penalty_value(&gradient_apply(u), p)?)
}

/// Regularizer value `sum_i ||g_i||_2^(p_i)` of a gradient field.
pub fn penalty_value(g: &GradientField, p: &ExponentField) -> Result<f64> {
    let n = g.shape().len();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "penalty exponent field length",
            expected: n,
            got: p.len(),
        });
    }
    let vals = g.values();
    let ps = p.values();
    let mut acc = 0.0;
    match g.shape() {
        Shape::OneD(_) => {
            for i in 0..n {
                acc += vals[i].abs().powf(ps[i]);
            }
        }
        Shape::TwoD { .. } => {
            for i in 0..n {
                acc += vals[i].hypot(vals[n + i]).powf(ps[i]);
            }
        }
    }
    Ok(acc)
}

/// Convenience entry point: factors the normal system and runs ADMM.
pub fn admm_solve(
    op: &MeasurementOperator,
    y: &[f64],
    p: &ExponentField,
    cfg: &SolverConfig,
    init: Option<AdmmState>,
) -> Result<ReconstructionResult> {
    AdmmWorkspace::new(op, cfg.rho)?.solve(y, p, cfg, init)
}
