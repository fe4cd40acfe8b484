//! Exponent design: lambda scheduling, gradient statistics over multiple
//! reconstructions, patchwise pooling, neighborhood filtering, feature
//! classification, and the exponent curve.
//!
//! The pipeline classifies each patch as discontinuity, oscillation, or
//! smooth from Min-Max-normalized variance pooling of two gradient estimates
//! (one from TV-regularized samples, one from Tikhonov-regularized samples),
//! then assigns exponent 1 on discontinuities and `2 - exp(-c * avg)` from
//! the matching normalized average pooling elsewhere.

use crate::admm::ExponentField;
use crate::error::{Error, Result};
use crate::operators::{gradient_apply, GradientField, Shape, Signal};
use rand::Rng;

/// Non-overlapping cover of the signal domain by K-sized patches
/// (K x K pixels in 2D); trailing remainders form smaller boundary patches.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    k: usize,
    layout: PatchLayout,
    patches: Vec<Vec<usize>>,
}

/// Arrangement of patches: a 1D sequence or a 2D grid of patch coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchLayout {
    OneD { n_patches: usize },
    TwoD { rows_p: usize, cols_p: usize },
}

impl PatchGrid {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layout(&self) -> PatchLayout {
        self.layout
    }

    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    /// Component index sets, one per patch, disjoint and covering `0..N`.
    pub fn patches(&self) -> &[Vec<usize>] {
        &self.patches
    }

    /// Patch index owning a given component index.
    pub fn patch_of(&self, component: usize, shape: Shape) -> usize {
        match (self.layout, shape) {
            (PatchLayout::OneD { .. }, Shape::OneD(_)) => component / self.k,
            (PatchLayout::TwoD { cols_p, .. }, Shape::TwoD { cols, .. }) => {
                let (r, c) = (component / cols, component % cols);
                (r / self.k) * cols_p + c / self.k
            }
            _ => unreachable!("patch grid layout matches its shape by construction"),
        }
    }
}

/// Splits `shape` into a row-major tiling of K-sized patches.
pub fn build_patch_grid(shape: Shape, k: usize) -> Result<PatchGrid> {
    if k == 0 {
        return Err(Error::InvalidSize("patch size must be >= 1".into()));
    }
    match shape {
        Shape::OneD(n) => {
            if k > n {
                return Err(Error::InvalidSize(format!(
                    "patch size {k} exceeds signal length {n}"
                )));
            }
            let n_patches = n.div_ceil(k);
            let patches = (0..n_patches)
                .map(|j| (j * k..((j + 1) * k).min(n)).collect())
                .collect();
            Ok(PatchGrid {
                k,
                layout: PatchLayout::OneD { n_patches },
                patches,
            })
        }
        Shape::TwoD { rows, cols } => {
            if k > rows || k > cols {
                return Err(Error::InvalidSize(format!(
                    "patch size {k} exceeds grid {rows} x {cols}"
                )));
            }
            let rows_p = rows.div_ceil(k);
            let cols_p = cols.div_ceil(k);
            let mut patches = Vec::with_capacity(rows_p * cols_p);
            for pr in 0..rows_p {
                for pc in 0..cols_p {
                    let mut idx = Vec::new();
                    for r in pr * k..((pr + 1) * k).min(rows) {
                        for c in pc * k..((pc + 1) * k).min(cols) {
                            idx.push(r * cols + c);
                        }
                    }
                    patches.push(idx);
                }
            }
            Ok(PatchGrid {
                k,
                layout: PatchLayout::TwoD { rows_p, cols_p },
                patches,
            })
        }
    }
}

/// One scalar statistic per patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingMap {
    pub values: Vec<f64>,
    pub kind: PoolKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Variance,
    Average,
    Normalized,
}

/// Feature label of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchClass {
    Discontinuity,
    Oscillation,
    Smooth,
}

impl PatchClass {
    /// Stable integer code used in CSV artifacts: smooth 0, discontinuity 1,
    /// oscillation 2.
    pub fn code(&self) -> u8 {
        match self {
            PatchClass::Smooth => 0,
            PatchClass::Discontinuity => 1,
            PatchClass::Oscillation => 2,
        }
    }
}

/// Per-patch feature labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    pub labels: Vec<PatchClass>,
}

/// Reading of the 1D neighborhood filter (the 2D form always takes the
/// minimum over four directional maxima).
///
/// The default mirrors the 2D directional form: a jump patch flanked by
/// one-sided Gibbs ringing still sees its quiet side, which is what lets the
/// filter separate isolated discontinuities from extended oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NghdMode {
    /// Minimum of the per-side maxima, mirroring the 2D directional form.
    #[default]
    MinOfSides,
    /// Single maximum over both sides of the center patch.
    SingleMax,
}

/// Hyperparameters of the exponent-design pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignHyper {
    /// Patch size per axis.
    pub k: usize,
    /// Smooth-variance threshold epsilon, in (0, 1).
    pub eps_var: f64,
    /// Neighborhood filter size (>= 1 patches per direction).
    pub n_nghd: usize,
    /// Exponent-curve constant c > 0.
    pub c: f64,
    /// Number of reconstruction samples per regularization type (>= 2).
    pub n_samples: usize,
    /// Global bounds of the lambda draw interval.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Bounds on the ratio lambda_b / lambda_a of the drawn interval.
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub seed: u64,
    pub nghd_mode: NghdMode,
}

impl Default for DesignHyper {
    fn default() -> Self {
        DesignHyper {
            k: 5,
            eps_var: 1e-2,
            n_nghd: 3,
            c: 27.0,
            n_samples: 200,
            lambda_lo: 1e-4,
            lambda_hi: 1e4,
            ratio_lo: 1e2,
            ratio_hi: 1e4,
            seed: 0,
            nghd_mode: NghdMode::MinOfSides,
        }
    }
}

impl DesignHyper {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k >= 1
            && self.eps_var > 0.0
            && self.eps_var < 1.0
            && self.n_nghd >= 1
            && self.c > 0.0
            && self.n_samples >= 2
            && self.lambda_lo > 0.0
            && self.lambda_lo < self.lambda_hi
            && self.ratio_lo > 1.0
            && self.ratio_lo <= self.ratio_hi
            && self.ratio_hi <= self.lambda_hi / self.lambda_lo;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "design hyperparameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `count` logarithmically equispaced values on `[lo, hi]` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Draws the regularization schedule: a random subinterval `[la, lb]` of
/// `[lambda_lo, lambda_hi]` with `lb / la` in `[ratio_lo, ratio_hi]` (both
/// log-endpoints uniform subject to the constraints), then `n_samples`
/// logarithmically equispaced values on it.
pub fn lambda_schedule(hyper: &DesignHyper, rng: &mut impl Rng) -> Vec<f64> {
    let r: f64 = rng.gen_range(hyper.ratio_lo.log10()..=hyper.ratio_hi.log10());
    let lo_exp = hyper.lambda_lo.log10();
    let hi_exp = hyper.lambda_hi.log10();
    let a: f64 = rng.gen_range(lo_exp..=(hi_exp - r));
    log_spaced(10f64.powf(a), 10f64.powf(a + r), hyper.n_samples)
}

/// Mean gradients of the two sample sets, plus the per-pixel pooling field
/// (signed gradient in 1D, isotropic magnitude in 2D).
#[derive(Debug, Clone)]
pub struct GradientStats {
    pub g1: GradientField,
    pub g2: GradientField,
    mag1: Vec<f64>,
    mag2: Vec<f64>,
}

impl GradientStats {
    /// Pooling input derived from the mean TV-sample gradient.
    pub fn pooling_field_tv(&self) -> &[f64] {
        &self.mag1
    }

    /// Pooling input derived from the mean Tikhonov-sample gradient.
    pub fn pooling_field_tik(&self) -> &[f64] {
        &self.mag2
    }
}

fn mean_gradient(samples: &[Signal]) -> Result<GradientField> {
    let shape = samples[0].shape();
    let mut acc = vec![0.0; shape.gradient_len()];
    for s in samples {
        if s.shape() != shape {
            return Err(Error::InvalidInput(
                "gradient_stats samples have mixed shapes".into(),
            ));
        }
        let g = gradient_apply(s);
        for (a, b) in acc.iter_mut().zip(g.values()) {
            *a += b;
        }
    }
    let c = samples.len() as f64;
    acc.iter_mut().for_each(|v| *v /= c);
    GradientField::new(acc, shape)
}

/// Per-pixel pooling field of a mean gradient: the signed value in 1D, the
/// isotropic magnitude `||(Dx, Dy)||_2` in 2D.
fn pooling_field(g: &GradientField) -> Vec<f64> {
    match g.shape() {
        Shape::OneD(_) => g.values().to_vec(),
        Shape::TwoD { .. } => {
            let n = g.shape().len();
            let v = g.values();
            (0..n).map(|i| v[i].hypot(v[n + i])).collect()
        }
    }
}

/// Averages the gradients of the TV and Tikhonov sample sets.
pub fn gradient_stats(samples_tv: &[Signal], samples_tik: &[Signal]) -> Result<GradientStats> {
    if samples_tv.is_empty() || samples_tik.is_empty() {
        return Err(Error::InvalidInput(
            "gradient_stats requires non-empty sample lists".into(),
        ));
    }
    let g1 = mean_gradient(samples_tv)?;
    let g2 = mean_gradient(samples_tik)?;
    if g1.shape() != g2.shape() {
        return Err(Error::InvalidInput(
            "TV and Tikhonov samples have different shapes".into(),
        ));
    }
    let mag1 = pooling_field(&g1);
    let mag2 = pooling_field(&g2);
    Ok(GradientStats { g1, g2, mag1, mag2 })
}

/// Patchwise variance pooling `mean(g^2) - mean(|g|)^2`.
pub fn variance_pool(g: &[f64], grid: &PatchGrid) -> PoolingMap {
    let values = grid
        .patches()
        .iter()
        .map(|idx| {
            let inv = 1.0 / idx.len() as f64;
            let m2: f64 = idx.iter().map(|&i| g[i] * g[i]).sum::<f64>() * inv;
            let m1: f64 = idx.iter().map(|&i| g[i].abs()).sum::<f64>() * inv;
            m2 - m1 * m1
        })
        .collect();
    PoolingMap {
        values,
        kind: PoolKind::Variance,
    }
}

/// Patchwise average pooling `mean(|g|)`.
pub fn average_pool(g: &[f64], grid: &PatchGrid) -> PoolingMap {
    let values = grid
        .patches()
        .iter()
        .map(|idx| idx.iter().map(|&i| g[i].abs()).sum::<f64>() / idx.len() as f64)
        .collect();
    PoolingMap {
        values,
        kind: PoolKind::Average,
    }
}

/// Min-Max normalization `(v - min) / (max - min)`; all zeros when the map is
/// constant.
pub fn minmax_normalize(map: &PoolingMap) -> PoolingMap {
    let lo = map.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        map.values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; map.values.len()]
    };
    PoolingMap {
        values,
        kind: PoolKind::Normalized,
    }
}

/// Directional neighborhood filter on a normalized variance map.
///
/// 1D: the maximum over the `n` neighbors on each side of the center patch
/// (center excluded; single max by default, see [`NghdMode`]). 2D: the
/// minimum over the four directional maxima (horizontal, vertical, two
/// diagonals). Out-of-domain neighbors are dropped; a direction with no
/// in-domain neighbor is skipped; with every direction empty the output is 0.
pub fn nghd_filter(vmap: &PoolingMap, grid: &PatchGrid, n: usize, mode: NghdMode) -> PoolingMap {
    let v = &vmap.values;
    let values = match grid.layout() {
        PatchLayout::OneD { n_patches } => (0..n_patches)
            .map(|i| {
                let mut left: Option<f64> = None;
                let mut right: Option<f64> = None;
                for k in 1..=n {
                    if i >= k {
                        let x = v[i - k];
                        left = Some(left.map_or(x, |m: f64| m.max(x)));
                    }
                    if i + k < n_patches {
                        let x = v[i + k];
                        right = Some(right.map_or(x, |m: f64| m.max(x)));
                    }
                }
                match mode {
                    NghdMode::SingleMax => match (left, right) {
                        (Some(a), Some(b)) => a.max(b),
                        (Some(a), None) | (None, Some(a)) => a,
                        (None, None) => 0.0,
                    },
                    NghdMode::MinOfSides => match (left, right) {
                        (Some(a), Some(b)) => a.min(b),
                        (Some(a), None) | (None, Some(a)) => a,
                        (None, None) => 0.0,
                    },
                }
            })
            .collect(),
        PatchLayout::TwoD { rows_p, cols_p } => {
            let at = |r: isize, c: isize| -> Option<f64> {
                if r >= 0 && (r as usize) < rows_p && c >= 0 && (c as usize) < cols_p {
                    Some(v[r as usize * cols_p + c as usize])
                } else {
                    None
                }
            };
            (0..rows_p * cols_p)
                .map(|idx| {
                    let (i, j) = ((idx / cols_p) as isize, (idx % cols_p) as isize);
                    let dirs: [[(isize, isize); 2]; 4] = [
                        [(0, 1), (0, -1)],   // horizontal
                        [(1, 0), (-1, 0)],   // vertical
                        [(1, 1), (-1, -1)],  // main diagonal
                        [(-1, 1), (1, -1)],  // anti-diagonal
                    ];
                    let mut best: Option<f64> = None;
                    for dir in dirs {
                        let mut dmax: Option<f64> = None;
                        for (sr, sc) in dir {
                            for k in 1..=n as isize {
                                if let Some(x) = at(i + sr * k, j + sc * k) {
                                    dmax = Some(dmax.map_or(x, |m: f64| m.max(x)));
                                }
                            }
                        }
                        if let Some(d) = dmax {
                            best = Some(best.map_or(d, |b: f64| b.min(d)));
                        }
                    }
                    best.unwrap_or(0.0)
                })
                .collect()
        }
    };
    PoolingMap {
        values,
        kind: PoolKind::Normalized,
    }
}

/// Labels each patch from the normalized variance maps and their filtered
/// versions. The g1 condition is `var1n >= eps && filt1 < eps`; the g2
/// condition is `var2n >= eps && filt2 >= eps`.
///
/// The g1 condition takes precedence: a patch satisfying it is a
/// discontinuity even when the g2 condition also holds, because Gibbs
/// ringing in the Tikhonov samples raises the g2 variance around every real
/// jump; the TV statistics are the reliable discontinuity detector there.
/// A remaining g2-condition patch is oscillation; everything else is smooth.
pub fn classify_patches(
    var1n: &PoolingMap,
    var2n: &PoolingMap,
    filt1: &PoolingMap,
    filt2: &PoolingMap,
    eps_var: f64,
) -> Result<ClassMap> {
    let m = var1n.values.len();
    if var2n.values.len() != m || filt1.values.len() != m || filt2.values.len() != m {
        return Err(Error::DimensionMismatch {
            context: "classify_patches map lengths",
            expected: m,
            got: var2n.values.len().min(filt1.values.len()).min(filt2.values.len()),
        });
    }
    let labels = (0..m)
        .map(|j| {
            let g1_cond = var1n.values[j] >= eps_var && filt1.values[j] < eps_var;
            let g2_cond = var2n.values[j] >= eps_var && filt2.values[j] >= eps_var;
            if g1_cond {
                PatchClass::Discontinuity
            } else if g2_cond {
                PatchClass::Oscillation
            } else {
                PatchClass::Smooth
            }
        })
        .collect();
    Ok(ClassMap { labels })
}

/// Exponent curve `Phi(a) = 2 - exp(-c a)`, strictly increasing on [0, 1]
/// with range [1, 2 - exp(-c)].
pub fn exponent_curve(c: f64, a: f64) -> f64 {
    2.0 - (-c * a).exp()
}

/// Assigns per-patch exponents and expands them to components: 1 on
/// discontinuity patches, `Phi(avg1n)` on smooth patches, `Phi(avg2n)` on
/// oscillation patches.
pub fn assign_exponents(
    classes: &ClassMap,
    avg1n: &PoolingMap,
    avg2n: &PoolingMap,
    c: f64,
    grid: &PatchGrid,
    shape: Shape,
) -> Result<ExponentField> {
    let m = classes.labels.len();
    if avg1n.values.len() != m || avg2n.values.len() != m || grid.n_patches() != m {
        return Err(Error::DimensionMismatch {
            context: "assign_exponents map lengths",
            expected: m,
            got: avg1n.values.len().min(avg2n.values.len()).min(grid.n_patches()),
        });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("curve constant c = {c} must be > 0")));
    }
    let mut per_component = vec![0.0; shape.len()];
    for (j, idx) in grid.patches().iter().enumerate() {
        let q = match classes.labels[j] {
            PatchClass::Discontinuity => 1.0,
            PatchClass::Smooth => exponent_curve(c, avg1n.values[j]),
            PatchClass::Oscillation => exponent_curve(c, avg2n.values[j]),
        };
        for &i in idx {
            per_component[i] = q;
        }
    }
    ExponentField::new(per_component)
}

/// Per-patch exponent values in patch-grid layout (for CSV/PGM artifacts).
pub fn patch_exponents(field: &ExponentField, grid: &PatchGrid) -> Vec<f64> {
    grid.patches()
        .iter()
        .map(|idx| field.values()[idx[0]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn patch_grid_1d_examples() {
        let g = build_patch_grid(Shape::OneD(200), 5).unwrap();
        assert_eq!(g.n_patches(), 40);
        assert!(g.patches().iter().all(|p| p.len() == 5));

        let g = build_patch_grid(Shape::OneD(7), 3).unwrap();
        let sizes: Vec<usize> = g.patches().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 1]);

        assert!(build_patch_grid(Shape::OneD(4), 5).is_err());
    }

    #[test]
    fn patch_grid_2d_exact_tiling() {
        let shape = Shape::TwoD {
            rows: 128,
            cols: 128,
        };
        let g = build_patch_grid(shape, 4).unwrap();
        assert_eq!(g.layout(), PatchLayout::TwoD { rows_p: 32, cols_p: 32 });
        assert_eq!(g.n_patches(), 1024);
        assert!(g.patches().iter().all(|p| p.len() == 16));

        // Disjoint cover.
        let mut seen = vec![false; 128 * 128];
        for p in g.patches() {
            for &i in p {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.patch_of(0, shape), 0);
        assert_eq!(g.patch_of(4, shape), 1);
        assert_eq!(g.patch_of(4 * 128, shape), 32);
    }

    #[test]
    fn log_spacing_example() {
        let v = log_spaced(1.0, 100.0, 3);
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert!((v[2] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_schedule_respects_bounds() {
        let hyper = DesignHyper {
            n_samples: 16,
            ..Default::default()
        };
        for seed in 0..1000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sched = lambda_schedule(&hyper, &mut rng);
            assert_eq!(sched.len(), 16);
            for &l in &sched {
                assert!((1e-4..=1.0001e4).contains(&l), "lambda {l} out of range");
            }
            let ratio = sched[15] / sched[0];
            assert!(
                (99.0..=1.01e4).contains(&ratio),
                "interval ratio {ratio} out of range"
            );
            for w in sched.windows(2) {
                assert!(w[1] > w[0]);
            }
        }
    }

    #[test]
    fn lambda_schedule_is_seed_deterministic() {
        let hyper = DesignHyper::default();
        let a = lambda_schedule(&hyper, &mut ChaCha8Rng::seed_from_u64(9));
        let b = lambda_schedule(&hyper, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    fn signal(values: Vec<f64>, shape: Shape) -> Signal {
        Signal::new(values, shape).unwrap()
    }

    #[test]
    fn gradient_stats_basics() {
        let shape = Shape::OneD(6);
        let u = signal(vec![0.0, 1.0, 3.0, 3.0, 2.0, 2.0], shape);
        let single = gradient_stats(std::slice::from_ref(&u), std::slice::from_ref(&u)).unwrap();
        assert_eq!(single.g1.values(), gradient_apply(&u).values());

        let neg = signal(u.values().iter().map(|v| -v).collect(), shape);
        let cancel = gradient_stats(&[u.clone(), neg.clone()], &[u.clone()]).unwrap();
        assert!(cancel.g1.values().iter().all(|&v| v == 0.0));

        let ab = gradient_stats(&[u.clone(), neg.clone()], &[u.clone()]).unwrap();
        let ba = gradient_stats(&[neg, u.clone()], &[u]).unwrap();
        assert_eq!(ab.g1.values(), ba.g1.values());

        assert!(gradient_stats(&[], &[]).is_err());
    }

    #[test]
    fn variance_pool_examples() {
        let grid = build_patch_grid(Shape::OneD(3), 3).unwrap();
        let m = variance_pool(&[2.0, 2.0, 2.0], &grid);
        assert!(m.values[0].abs() < 1e-15);

        let grid = build_patch_grid(Shape::OneD(2), 2).unwrap();
        let m = variance_pool(&[-1.0, 1.0], &grid);
        assert!(m.values[0].abs() < 1e-15);

        let grid = build_patch_grid(Shape::OneD(3), 3).unwrap();
        let m = variance_pool(&[1.0, 2.0, 3.0], &grid);
        assert!((m.values[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn average_pool_examples() {
        let grid = build_patch_grid(Shape::OneD(2), 2).unwrap();
        assert_eq!(average_pool(&[0.0, 0.0], &grid).values[0], 0.0);
        assert_eq!(average_pool(&[-1.0, 1.0], &grid).values[0], 1.0);
        let grid = build_patch_grid(Shape::OneD(3), 3).unwrap();
        assert_eq!(average_pool(&[1.0, 2.0, 3.0], &grid).values[0], 2.0);
    }

    #[test]
    fn minmax_examples() {
        let m = PoolingMap {
            values: vec![2.0, 4.0, 6.0],
            kind: PoolKind::Variance,
        };
        assert_eq!(minmax_normalize(&m).values, vec![0.0, 0.5, 1.0]);

        let flat = PoolingMap {
            values: vec![3.0; 4],
            kind: PoolKind::Variance,
        };
        assert_eq!(minmax_normalize(&flat).values, vec![0.0; 4]);

        let scaled = PoolingMap {
            values: m.values.iter().map(|v| v * 7.5).collect(),
            kind: PoolKind::Variance,
        };
        assert_eq!(minmax_normalize(&scaled).values, minmax_normalize(&m).values);
    }

    #[test]
    fn nghd_filter_1d() {
        let grid = build_patch_grid(Shape::OneD(5), 1).unwrap();
        let vmap = PoolingMap {
            values: vec![0.0, 0.9, 0.1, 0.9, 0.0],
            kind: PoolKind::Normalized,
        };
        let f = nghd_filter(&vmap, &grid, 1, NghdMode::SingleMax);
        assert_eq!(f.values[2], 0.9);
        // Min-of-sides reading also gives 0.9 here; it differs on one-sided data.
        let f2 = nghd_filter(&vmap, &grid, 1, NghdMode::MinOfSides);
        assert_eq!(f2.values[2], 0.9);
        let asym = PoolingMap {
            values: vec![0.0, 0.2, 0.5, 0.9, 0.0],
            kind: PoolKind::Normalized,
        };
        assert_eq!(
            nghd_filter(&asym, &grid, 1, NghdMode::SingleMax).values[2],
            0.9
        );
        assert_eq!(
            nghd_filter(&asym, &grid, 1, NghdMode::MinOfSides).values[2],
            0.2
        );

        let constant = PoolingMap {
            values: vec![0.7; 5],
            kind: PoolKind::Normalized,
        };
        let f = nghd_filter(&constant, &grid, 1, NghdMode::SingleMax);
        assert!(f.values.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn nghd_filter_2d_selects_smooth_direction() {
        // 3x3 patch grid; horizontal neighbors of the center are 0, everything
        // else 1. The min over directional maxima must pick 0.
        let grid = build_patch_grid(Shape::TwoD { rows: 3, cols: 3 }, 1).unwrap();
        let vmap = PoolingMap {
            values: vec![1.0, 1.0, 1.0, 0.0, 0.5, 0.0, 1.0, 1.0, 1.0],
            kind: PoolKind::Normalized,
        };
        let f = nghd_filter(&vmap, &grid, 1, NghdMode::SingleMax);
        assert_eq!(f.values[4], 0.0);
    }

    #[test]
    fn nghd_filter_degenerate_single_patch() {
        let grid = build_patch_grid(Shape::OneD(3), 3).unwrap();
        let vmap = PoolingMap {
            values: vec![0.8],
            kind: PoolKind::Normalized,
        };
        assert_eq!(
            nghd_filter(&vmap, &grid, 2, NghdMode::SingleMax).values,
            vec![0.0]
        );
    }

    fn map(values: Vec<f64>) -> PoolingMap {
        PoolingMap {
            values,
            kind: PoolKind::Normalized,
        }
    }

    #[test]
    fn classification_examples() {
        // All variances zero: everything smooth.
        let z = map(vec![0.0; 3]);
        let cm = classify_patches(&z, &z, &z, &z, 1e-2).unwrap();
        assert!(cm.labels.iter().all(|&l| l == PatchClass::Smooth));

        // Isolated high-variance g1 patch with quiet g2: discontinuity.
        let cm = classify_patches(
            &map(vec![0.8]),
            &map(vec![0.001]),
            &map(vec![0.001]),
            &map(vec![0.0]),
            1e-2,
        )
        .unwrap();
        assert_eq!(cm.labels[0], PatchClass::Discontinuity);

        // Both conditions true: the g1 condition wins (a real jump always
        // carries Gibbs-contaminated g2 statistics).
        let cm = classify_patches(
            &map(vec![0.8]),
            &map(vec![0.8]),
            &map(vec![0.001]),
            &map(vec![0.5]),
            1e-2,
        )
        .unwrap();
        assert_eq!(cm.labels[0], PatchClass::Discontinuity);

        // g2 condition alone: oscillation.
        let cm = classify_patches(
            &map(vec![0.001]),
            &map(vec![0.9]),
            &map(vec![0.9]),
            &map(vec![0.9]),
            1e-2,
        )
        .unwrap();
        assert_eq!(cm.labels[0], PatchClass::Oscillation);
    }

    #[test]
    fn exponent_assignment_examples() {
        let shape = Shape::OneD(3);
        let grid = build_patch_grid(shape, 1).unwrap();
        let classes = ClassMap {
            labels: vec![
                PatchClass::Discontinuity,
                PatchClass::Smooth,
                PatchClass::Oscillation,
            ],
        };
        let avg1 = map(vec![0.3, 0.0, 0.9]);
        let avg2 = map(vec![0.1, 0.4, 1.0]);
        let field = assign_exponents(&classes, &avg1, &avg2, 3.5, &grid, shape).unwrap();
        assert_eq!(field.values()[0], 1.0);
        assert_eq!(field.values()[1], 1.0); // Phi(0) = 2 - e^0 = 1
        let expect = 2.0 - (-3.5f64).exp();
        assert!((field.values()[2] - expect).abs() < 1e-12);
        assert!((expect - 1.96980).abs() < 5e-5);
    }

    #[test]
    fn exponent_range_is_bounded() {
        let c: f64 = 27.0;
        let hi = 2.0 - (-c).exp();
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            let p = exponent_curve(c, a);
            assert!((1.0..=hi).contains(&p));
        }
        // Strictly increasing.
        assert!(exponent_curve(c, 0.2) < exponent_curve(c, 0.4));
    }

    #[test]
    fn variance_pool_sign_flip_invariance() {
        let grid = build_patch_grid(Shape::OneD(6), 3).unwrap();
        let g = [0.3, -1.2, 0.7, 2.0, -0.4, 0.9];
        let flipped: Vec<f64> = g.iter().map(|v| -v).collect();
        assert_eq!(
            variance_pool(&g, &grid).values,
            variance_pool(&flipped, &grid).values
        );
    }
}
