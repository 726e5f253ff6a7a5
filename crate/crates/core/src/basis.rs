//! Basis function families, design matrices and squared-norm integrals over
//! box subdomains.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate_box;

/// Points per dimension used when a basis has no closed-form integral.
pub const DEFAULT_QUADRATURE_POINTS: usize = 64;

/// Axis-aligned box `[lower_k, upper_k]` in every dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("domain", "a box needs at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (k, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(invalid(
                    "domain",
                    format!("edge {k} has lower {a} and upper {b}"),
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).product()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn contains_box(&self, other: &BoxDomain) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|k| self.lower[k] <= other.lower[k] && other.upper[k] <= self.upper[k])
    }
}

/// A finite family of functions `φ_0 … φ_{L-1}` on `ℝ^d`.
///
/// Implementors only have to provide pointwise evaluation; the squared-norm
/// integral then falls back to tensor-product quadrature.
pub trait Basis: Send + Sync {
    /// Input dimension `d`.
    fn dim(&self) -> usize;

    /// Number of basis functions `L`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `φ_i(x)` with no range checks; see [`eval`] for the checked version.
    fn value(&self, i: usize, x: &[f64]) -> f64;

    /// Writes `φ_{indices[k]}(x)` into `out[k]`.
    fn fill_values(&self, x: &[f64], indices: &[usize], out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(indices) {
            *o = self.value(i, x);
        }
    }

    /// `∫_Ω |φ_i(x)|² dx`. Indices and dimensions are checked by the caller.
    fn sq_norm(&self, i: usize, omega: &BoxDomain) -> Result<f64> {
        Ok(integrate_box(omega, DEFAULT_QUADRATURE_POINTS, |x| {
            self.value(i, x).powi(2)
        }))
    }
}

fn check_index<B: Basis + ?Sized>(basis: &B, i: usize) -> Result<()> {
    if i >= basis.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: basis.len(),
        });
    }
    Ok(())
}

fn check_dim<B: Basis + ?Sized>(basis: &B, found: usize) -> Result<()> {
    if found != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found,
        });
    }
    Ok(())
}

/// `φ_i(x)`, checking the index (0-based) and the point's dimension.
pub fn eval<B: Basis + ?Sized>(basis: &B, i: usize, x: &[f64]) -> Result<f64> {
    check_index(basis, i)?;
    check_dim(basis, x.len())?;
    Ok(basis.value(i, x))
}

/// The `N × L` design matrix with entry `(n, i) = φ_i(x_n)`.
pub fn design_matrix<B: Basis + ?Sized>(basis: &B, points: &[Vec<f64>]) -> Result<Mat<f64>> {
    let all: Vec<usize> = (0..basis.len()).collect();
    design_matrix_columns(basis, &all, points)
}

/// The `N × |indices|` design matrix restricted to the given basis functions.
pub fn design_matrix_columns<B: Basis + ?Sized>(
    basis: &B,
    indices: &[usize],
    points: &[Vec<f64>],
) -> Result<Mat<f64>> {
    for &i in indices {
        check_index(basis, i)?;
    }
    for p in points {
        check_dim(basis, p.len())?;
    }
    let mut out = Mat::zeros(points.len(), indices.len());
    let mut row = vec![0.0; indices.len()];
    for (n, p) in points.iter().enumerate() {
        basis.fill_values(p, indices, &mut row);
        for (k, v) in row.iter().enumerate() {
            out[(n, k)] = *v;
        }
    }
    Ok(out)
}

/// Same as [`design_matrix_columns`] but transposed: column `n` holds the
/// selected features of `points[n]`. This is the layout the predictive
/// solves consume.
pub fn feature_columns<B: Basis + ?Sized>(
    basis: &B,
    indices: &[usize],
    points: &[Vec<f64>],
) -> Result<Mat<f64>> {
    for &i in indices {
        check_index(basis, i)?;
    }
    for p in points {
        check_dim(basis, p.len())?;
    }
    let mut out = Mat::zeros(indices.len(), points.len());
    let mut row = vec![0.0; indices.len()];
    for (n, p) in points.iter().enumerate() {
        basis.fill_values(p, indices, &mut row);
        for (k, v) in row.iter().enumerate() {
            out[(k, n)] = *v;
        }
    }
    Ok(out)
}

/// Exact `∫_Ω |φ_i(x)|² dx`.
pub fn sq_norm_integral<B: Basis + ?Sized>(basis: &B, i: usize, omega: &BoxDomain) -> Result<f64> {
    check_index(basis, i)?;
    check_dim(basis, omega.dim())?;
    if omega.measure() == 0.0 {
        return Ok(0.0);
    }
    basis.sq_norm(i, omega)
}

/// Gauss–Legendre estimate of `∫_Ω |φ_i(x)|² dx` with `points_per_dim`
/// nodes along each axis.
pub fn sq_norm_integral_quadrature<B: Basis + ?Sized>(
    basis: &B,
    i: usize,
    omega: &BoxDomain,
    points_per_dim: usize,
) -> Result<f64> {
    if points_per_dim < 2 {
        return Err(invalid("points_per_dim", "need at least 2 nodes"));
    }
    check_index(basis, i)?;
    check_dim(basis, omega.dim())?;
    Ok(integrate_box(omega, points_per_dim, |x| {
        basis.value(i, x).powi(2)
    }))
}

/// Gaussian bumps `φ_i(x) = exp(-‖x - c_i‖² / l²)` with a shared lengthscale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfBasis {
    centers: Vec<Vec<f64>>,
    lengthscale: f64,
}

impl RbfBasis {
    pub fn new(centers: Vec<Vec<f64>>, lengthscale: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(invalid("centers", "need at least one center"));
        }
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(invalid(
                "lengthscale",
                format!("must be positive, got {lengthscale}"),
            ));
        }
        let d = centers[0].len();
        if d == 0 {
            return Err(invalid("centers", "centers must have dimension >= 1"));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.len(),
            });
        }
        Ok(Self {
            centers,
            lengthscale,
        })
    }

    /// `count` centers spaced evenly over `[lo, hi]`, endpoints included.
    pub fn equidistant_1d(lo: f64, hi: f64, count: usize, lengthscale: f64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("count", "need at least one center"));
        }
        let centers = if count == 1 {
            vec![vec![0.5 * (lo + hi)]]
        } else {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|k| vec![lo + step * k as f64]).collect()
        };
        Self::new(centers, lengthscale)
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }
}

impl Basis for RbfBasis {
    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn len(&self) -> usize {
        self.centers.len()
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let r2: f64 = self.centers[i]
            .iter()
            .zip(x)
            .map(|(c, v)| (v - c).powi(2))
            .sum();
        (-r2 / (self.lengthscale * self.lengthscale)).exp()
    }

    // φ² = exp(-2 (x - c)² / l²) factorizes per axis; each factor integrates to
    // l √(π/2) / 2 · [erf(√2 (b - c) / l) - erf(√2 (a - c) / l)].
    fn sq_norm(&self, i: usize, omega: &BoxDomain) -> Result<f64> {
        let l = self.lengthscale;
        let scale = std::f64::consts::SQRT_2 / l;
        let prefactor = 0.5 * l * (0.5 * PI).sqrt();
        let mut total = 1.0;
        for (k, c) in self.centers[i].iter().enumerate() {
            let hi = scale * (omega.upper()[k] - c);
            let lo = scale * (omega.lower()[k] - c);
            total *= prefactor * erf_difference(lo, hi);
        }
        Ok(total.max(0.0))
    }
}

/// `erf(b) - erf(a)` for `a <= b`, evaluated through `erfc` in the tails to
/// avoid cancellation.
fn erf_difference(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

/// Laplacian eigenfunctions with Dirichlet boundary on a box:
/// `φ_i(x) = Π_d h_d^{-1/2} sin(π i_d (x_d - lower_d) / (upper_d - lower_d))`,
/// with `h_d` the half-width. They are orthonormal on the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertBasis {
    domain: BoxDomain,
    indices: Vec<Vec<usize>>,
    max_mode: Vec<usize>,
}

impl HilbertBasis {
    pub fn new(domain: BoxDomain, indices: Vec<Vec<usize>>) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("indices", "need at least one multi-index"));
        }
        let d = domain.dim();
        for idx in &indices {
            if idx.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: idx.len(),
                });
            }
            if idx.contains(&0) {
                return Err(invalid("indices", "multi-index entries start at 1"));
            }
        }
        if (0..d).any(|k| domain.width(k) <= 0.0) {
            return Err(invalid("domain", "model box must have positive width"));
        }
        let max_mode = (0..d)
            .map(|k| indices.iter().map(|idx| idx[k]).max().unwrap_or(0))
            .collect();
        Ok(Self {
            domain,
            indices,
            max_mode,
        })
    }

    /// All multi-indices with `1 <= i_k <= counts[k]`, last coordinate
    /// varying fastest.
    pub fn grid(domain: BoxDomain, counts: &[usize]) -> Result<Self> {
        if counts.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(invalid("counts", "need at least one mode per dimension"));
        }
        let mut indices = vec![Vec::new()];
        for &c in counts {
            indices = indices
                .into_iter()
                .flat_map(|prefix| {
                    (1..=c).map(move |m| {
                        let mut next = prefix.clone();
                        next.push(m);
                        next
                    })
                })
                .collect();
        }
        Self::new(domain, indices)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    fn half_width(&self, k: usize) -> f64 {
        0.5 * self.domain.width(k)
    }

    /// Per-axis sine tables: `table[k][m - 1] = h_k^{-1/2} sin(π m (x_k - lower_k) / width_k)`.
    fn sine_tables(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.domain.dim())
            .map(|k| {
                let norm = self.half_width(k).sqrt().recip();
                let theta = PI * (x[k] - self.domain.lower()[k]) / self.domain.width(k);
                (1..=self.max_mode[k])
                    .map(|m| norm * (m as f64 * theta).sin())
                    .collect()
            })
            .collect()
    }
}

impl Basis for HilbertBasis {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        self.indices[i]
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let theta = PI * m as f64 * (x[k] - self.domain.lower()[k]) / self.domain.width(k);
                theta.sin() / self.half_width(k).sqrt()
            })
            .product()
    }

    fn fill_values(&self, x: &[f64], indices: &[usize], out: &mut [f64]) {
        let tables = self.sine_tables(x);
        for (o, &i) in out.iter_mut().zip(indices) {
            *o = self.indices[i]
                .iter()
                .enumerate()
                .map(|(k, &m)| tables[k][m - 1])
                .product();
        }
    }

    // Per axis: (1/h) ∫ sin²(k u) du with antiderivative u/2 - sin(2ku)/(4k).
    fn sq_norm(&self, i: usize, omega: &BoxDomain) -> Result<f64> {
        if !self.domain.contains_box(omega) {
            return Err(Error::OmegaOutsideDomain);
        }
        let mut total = 1.0;
        for (k, &m) in self.indices[i].iter().enumerate() {
            let freq = PI * m as f64 / self.domain.width(k);
            let anti = |u: f64| 0.5 * u - (2.0 * freq * u).sin() / (4.0 * freq);
            let a = omega.lower()[k] - self.domain.lower()[k];
            let b = omega.upper()[k] - self.domain.lower()[k];
            total *= (anti(b) - anti(a)) / self.half_width(k);
        }
        Ok(total.max(0.0))
    }
}
