//! Linear measurement operators and the discrete gradient.
//!
//! The measurement map `A` comes in three kinds: partial Fourier (a subset of
//! unnormalized DFT coefficients with real and imaginary parts stacked),
//! identity, and an explicit dense matrix. The gradient `F` is the forward
//! difference with replicated boundary (last difference per direction is zero),
//! so `F` maps length-`N` signals to length-`N` (1D) or length-`2N` (2D)
//! fields. Every operator exposes an exact adjoint.

use crate::error::{Error, Result};
use crate::fft;
use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

/// Grid shape of a signal: a 1D line or a row-major 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    OneD(usize),
    TwoD { rows: usize, cols: usize },
}

impl Shape {
    /// Number of signal components `N`.
    pub fn len(&self) -> usize {
        match *self {
            Shape::OneD(n) => n,
            Shape::TwoD { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length `M` of a gradient field over this shape: `N` in 1D, `2N` in 2D.
    pub fn gradient_len(&self) -> usize {
        match self {
            Shape::OneD(_) => self.len(),
            Shape::TwoD { .. } => 2 * self.len(),
        }
    }
}

/// Real-valued signal on a 1D or 2D grid (row-major storage in 2D).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
    shape: Shape,
}

impl Signal {
    pub fn new(values: Vec<f64>, shape: Shape) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                context: "signal values vs shape",
                expected: shape.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "signal contains non-finite entries".into(),
            ));
        }
        Ok(Signal { values, shape })
    }

    pub fn zeros(shape: Shape) -> Self {
        Signal {
            values: vec![0.0; shape.len()],
            shape,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Gradient field over a signal shape. In 2D the x-differences (along columns)
/// are stored first, then the y-differences, so pixel `i` owns the pair
/// `(values[i], values[N + i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    values: Vec<f64>,
    shape: Shape,
}

impl GradientField {
    pub fn new(values: Vec<f64>, shape: Shape) -> Result<Self> {
        if values.len() != shape.gradient_len() {
            return Err(Error::DimensionMismatch {
                context: "gradient field vs shape",
                expected: shape.gradient_len(),
                got: values.len(),
            });
        }
        Ok(GradientField { values, shape })
    }

    pub fn zeros(shape: Shape) -> Self {
        GradientField {
            values: vec![0.0; shape.gradient_len()],
            shape,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Retained frequency indices of a partial Fourier operator.
///
/// 1D entries are wavenumbers `k` in `0..n`; 2D entries are `(k_x, k_y)` pairs
/// with `k_x` in `0..cols` and `k_y` in `0..rows`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    OneD(Vec<usize>),
    TwoD(Vec<(usize, usize)>),
}

impl Selection {
    pub fn len(&self) -> usize {
        match self {
            Selection::OneD(v) => v.len(),
            Selection::TwoD(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
enum OperatorKind {
    PartialFourier { selection: Selection },
    Identity,
    Dense { matrix: DMatrix<f64> },
}

/// Linear measurement operator `A` with an exact adjoint.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    kind: OperatorKind,
    shape: Shape,
}

/// Builds a partial Fourier operator retaining `selection` in order.
///
/// The DFT convention is the unnormalized forward sum
/// `u_hat_k = sum_n u_n exp(-2*pi*i*k*n/N)` (separable analogue in 2D), and the
/// output stacks `(Re k_1, Im k_1, Re k_2, Im k_2, ...)` in selection order, so
/// the measurement dimension is `2 * |selection|`.
pub fn make_partial_fourier(shape: Shape, selection: Selection) -> Result<MeasurementOperator> {
    match (&shape, &selection) {
        (Shape::OneD(n), Selection::OneD(ks)) => {
            let mut seen = vec![false; *n];
            for &k in ks {
                if k >= *n {
                    return Err(Error::InvalidSelection(format!(
                        "frequency {k} out of range for n = {n}"
                    )));
                }
                if seen[k] {
                    return Err(Error::InvalidSelection(format!("duplicate frequency {k}")));
                }
                seen[k] = true;
            }
        }
        (Shape::TwoD { rows, cols }, Selection::TwoD(ks)) => {
            let mut seen = vec![false; rows * cols];
            for &(kx, ky) in ks {
                if kx >= *cols || ky >= *rows {
                    return Err(Error::InvalidSelection(format!(
                        "frequency ({kx}, {ky}) out of range for {rows} x {cols}"
                    )));
                }
                let idx = ky * cols + kx;
                if seen[idx] {
                    return Err(Error::InvalidSelection(format!(
                        "duplicate frequency ({kx}, {ky})"
                    )));
                }
                seen[idx] = true;
            }
        }
        _ => {
            return Err(Error::InvalidSelection(
                "selection dimensionality does not match shape".into(),
            ))
        }
    }
    Ok(MeasurementOperator {
        kind: OperatorKind::PartialFourier { selection },
        shape,
    })
}

pub fn make_identity(shape: Shape) -> MeasurementOperator {
    MeasurementOperator {
        kind: OperatorKind::Identity,
        shape,
    }
}

/// Wraps an explicit `m x N` matrix as a measurement operator.
pub fn make_dense(shape: Shape, matrix: DMatrix<f64>) -> Result<MeasurementOperator> {
    if matrix.ncols() != shape.len() {
        return Err(Error::DimensionMismatch {
            context: "dense operator columns vs signal length",
            expected: shape.len(),
            got: matrix.ncols(),
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "dense operator contains non-finite entries".into(),
        ));
    }
    Ok(MeasurementOperator {
        kind: OperatorKind::Dense { matrix },
        shape,
    })
}

impl MeasurementOperator {
    pub fn signal_shape(&self) -> Shape {
        self.shape
    }

    /// Measurement dimension `m`.
    pub fn out_dim(&self) -> usize {
        match &self.kind {
            OperatorKind::PartialFourier { selection } => 2 * selection.len(),
            OperatorKind::Identity => self.shape.len(),
            OperatorKind::Dense { matrix } => matrix.nrows(),
        }
    }

    pub fn selection(&self) -> Option<&Selection> {
        match &self.kind {
            OperatorKind::PartialFourier { selection } => Some(selection),
            _ => None,
        }
    }

    pub fn is_partial_fourier(&self) -> bool {
        matches!(self.kind, OperatorKind::PartialFourier { .. })
    }

    /// Applies `A`, producing a real measurement vector of length `m`.
    pub fn forward_apply(&self, u: &Signal) -> Result<Vec<f64>> {
        if u.shape() != self.shape {
            return Err(Error::DimensionMismatch {
                context: "forward_apply signal vs operator shape",
                expected: self.shape.len(),
                got: u.len(),
            });
        }
        Ok(match &self.kind {
            OperatorKind::Identity => u.values().to_vec(),
            OperatorKind::Dense { matrix } => {
                let x = nalgebra::DVector::from_column_slice(u.values());
                (matrix * x).as_slice().to_vec()
            }
            OperatorKind::PartialFourier { selection } => {
                let spectrum = self.full_spectrum(u.values());
                let mut out = Vec::with_capacity(2 * selection.len());
                match (selection, self.shape) {
                    (Selection::OneD(ks), Shape::OneD(_)) => {
                        for &k in ks {
                            out.push(spectrum[k].re);
                            out.push(spectrum[k].im);
                        }
                    }
                    (Selection::TwoD(ks), Shape::TwoD { cols, .. }) => {
                        for &(kx, ky) in ks {
                            let c = spectrum[ky * cols + kx];
                            out.push(c.re);
                            out.push(c.im);
                        }
                    }
                    _ => unreachable!("selection validated against shape at construction"),
                }
                out
            }
        })
    }

    /// Applies the exact transpose of `forward_apply` as a real-linear map.
    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.out_dim() {
            return Err(Error::DimensionMismatch {
                context: "adjoint_apply measurement length",
                expected: self.out_dim(),
                got: y.len(),
            });
        }
        Ok(match &self.kind {
            OperatorKind::Identity => y.to_vec(),
            OperatorKind::Dense { matrix } => {
                let v = nalgebra::DVector::from_column_slice(y);
                (matrix.transpose() * v).as_slice().to_vec()
            }
            OperatorKind::PartialFourier { selection } => {
                let n = self.shape.len();
                let mut spectrum = vec![Complex64::default(); n];
                match (selection, self.shape) {
                    (Selection::OneD(ks), Shape::OneD(_)) => {
                        for (j, &k) in ks.iter().enumerate() {
                            spectrum[k] = Complex64::new(y[2 * j], y[2 * j + 1]);
                        }
                        fft::dft_line(&mut spectrum, false);
                    }
                    (Selection::TwoD(ks), Shape::TwoD { rows, cols }) => {
                        for (j, &(kx, ky)) in ks.iter().enumerate() {
                            spectrum[ky * cols + kx] = Complex64::new(y[2 * j], y[2 * j + 1]);
                        }
                        fft::dft_grid(&mut spectrum, rows, cols, false);
                    }
                    _ => unreachable!("selection validated against shape at construction"),
                }
                spectrum.iter().map(|c| c.re).collect()
            }
        })
    }

    fn full_spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        match self.shape {
            Shape::OneD(_) => fft::dft_line(&mut buf, true),
            Shape::TwoD { rows, cols } => fft::dft_grid(&mut buf, rows, cols, true),
        }
        buf
    }
}

/// Forward-difference gradient with replicated boundary.
///
/// 1D: `(Fu)_i = u_{i+1} - u_i` for `i < N-1` and `(Fu)_{N-1} = 0`. 2D applies
/// the same rule independently along x (columns) and y (rows), stacked x-first.
pub fn gradient_apply(u: &Signal) -> GradientField {
    let v = u.values();
    match u.shape() {
        Shape::OneD(n) => {
            let mut out = vec![0.0; n];
            for i in 0..n.saturating_sub(1) {
                out[i] = v[i + 1] - v[i];
            }
            GradientField {
                values: out,
                shape: u.shape(),
            }
        }
        Shape::TwoD { rows, cols } => {
            let n = rows * cols;
            let mut out = vec![0.0; 2 * n];
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        out[i] = v[i + 1] - v[i];
                    }
                    if r + 1 < rows {
                        out[n + i] = v[i + cols] - v[i];
                    }
                }
            }
            GradientField {
                values: out,
                shape: u.shape(),
            }
        }
    }
}

/// Exact transpose of `gradient_apply`, returning a signal-shaped vector.
pub fn gradient_adjoint(v: &GradientField) -> Vec<f64> {
    let g = v.values();
    match v.shape() {
        Shape::OneD(n) => {
            let mut out = vec![0.0; n];
            for i in 0..n.saturating_sub(1) {
                out[i] -= g[i];
                out[i + 1] += g[i];
            }
            out
        }
        Shape::TwoD { rows, cols } => {
            let n = rows * cols;
            let mut out = vec![0.0; n];
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        out[i] -= g[i];
                        out[i + 1] += g[i];
                    }
                    if r + 1 < rows {
                        out[i] -= g[n + i];
                        out[i + cols] += g[n + i];
                    }
                }
            }
            out
        }
    }
}
