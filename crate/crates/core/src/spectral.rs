//! Lattice-adapted Fourier representation of fields on a flat torus.
//!
//! Samples live on the points `x(j1, j2) = (j1/n1) xi + (j2/n2) eta`, so a
//! plain rectangular DFT over `(j1, j2)` diagonalizes every torus shape. The
//! coefficient at index `(m, n)` multiplies `exp(2 pi i k.x)` with the
//! Cartesian wave vector `k = m xi* + n eta*`; geometry only enters through
//! these per-mode wave vectors.
//!
//! Normalization: `f(x) = sum_k F_k exp(2 pi i k.x)`, so Parseval reads
//! `int f^2 = area * sum |F_k|^2`. Quadrature is the uniform cell sum times
//! the area element `|det| / (n1 n2)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{classify_eigenspace, DualVector, EigenspaceInfo, LatticeBasis, Vec2};

/// Mean-zero tolerance on the zero-mode coefficient, relative to the largest
/// coefficient magnitude (with a floor of one).
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-12;

/// Relative spectral mass outside the first shell below which a field is
/// treated as a member of the first eigenspace.
pub const E1_MASS_THRESHOLD: f64 = 1e-6;

struct GridInner {
    basis: LatticeBasis,
    n1: usize,
    n2: usize,
    info: EigenspaceInfo,
    kx: Vec<f64>,
    ky: Vec<f64>,
    ksq: Vec<f64>,
    /// Modes whose derivative is well defined (Nyquist rows/columns excluded).
    differentiable: Vec<bool>,
    /// Two-thirds truncation mask.
    dealias: Vec<bool>,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

/// Uniform sampling grid of a torus together with cached FFT plans and
/// per-mode wave vectors. Cloning is cheap.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("basis", &self.inner.basis)
            .field("n1", &self.inner.n1)
            .field("n2", &self.inner.n2)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.basis == other.inner.basis
                && self.inner.n1 == other.inner.n1
                && self.inner.n2 == other.inner.n2)
    }
}

/// Signed frequency of FFT index `i` on an axis of length `n`.
pub fn freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(basis: LatticeBasis, n1: usize, n2: usize) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 16 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and >= 16"
                )));
            }
        }
        let info = classify_eigenspace(&basis)?;
        let dual = basis.dual();
        let len = n1 * n2;
        let mut kx = vec![0.0; len];
        let mut ky = vec![0.0; len];
        let mut ksq = vec![0.0; len];
        let mut differentiable = vec![false; len];
        let mut dealias = vec![false; len];
        for i1 in 0..n1 {
            let m = freq(i1, n1);
            for i2 in 0..n2 {
                let n = freq(i2, n2);
                let idx = i1 * n2 + i2;
                let k = dual.vector(m, n);
                kx[idx] = k.x;
                ky[idx] = k.y;
                ksq[idx] = k.norm_sq();
                differentiable[idx] =
                    2 * m.unsigned_abs() as usize != n1 && 2 * n.unsigned_abs() as usize != n2;
                dealias[idx] =
                    3 * (m.unsigned_abs() as usize) < n1 && 3 * (n.unsigned_abs() as usize) < n2;
            }
        }
        let mut planner = FftPlanner::new();
        let inner = GridInner {
            basis,
            n1,
            n2,
            info,
            kx,
            ky,
            ksq,
            differentiable,
            dealias,
            fwd1: planner.plan_fft_forward(n1),
            inv1: planner.plan_fft_inverse(n1),
            fwd2: planner.plan_fft_forward(n2),
            inv2: planner.plan_fft_inverse(n2),
        };
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    pub fn basis(&self) -> &LatticeBasis {
        &self.inner.basis
    }

    pub fn n1(&self) -> usize {
        self.inner.n1
    }

    pub fn n2(&self) -> usize {
        self.inner.n2
    }

    pub fn len(&self) -> usize {
        self.inner.n1 * self.inner.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        self.inner.basis.area()
    }

    /// Quadrature weight of one sample.
    pub fn cell_area(&self) -> f64 {
        self.area() / self.len() as f64
    }

    pub fn eigenspace(&self) -> &EigenspaceInfo {
        &self.inner.info
    }

    pub fn lambda1(&self) -> f64 {
        self.inner.info.lambda1
    }

    pub fn point(&self, j1: usize, j2: usize) -> Vec2 {
        self.inner.basis.point(
            j1 as f64 / self.inner.n1 as f64,
            j2 as f64 / self.inner.n2 as f64,
        )
    }

    /// Flat index of mode `(m, n)`, or `None` if it is not representable
    /// strictly below the Nyquist limit.
    pub fn mode_index(&self, m: i64, n: i64) -> Option<usize> {
        let (n1, n2) = (self.inner.n1 as i64, self.inner.n2 as i64);
        if 2 * m.abs() >= n1 || 2 * n.abs() >= n2 {
            return None;
        }
        Some((m.rem_euclid(n1) * n2 + n.rem_euclid(n2)) as usize)
    }

    pub fn mode_of_index(&self, idx: usize) -> (i64, i64) {
        let (n1, n2) = (self.inner.n1, self.inner.n2);
        (freq(idx / n2, n1), freq(idx % n2, n2))
    }

    /// Cartesian wave vector of flat mode index `idx`.
    pub fn wavevector(&self, idx: usize) -> Vec2 {
        Vec2::new(self.inner.kx[idx], self.inner.ky[idx])
    }

    /// `|k|^2` of flat mode index `idx`.
    pub fn ksq(&self, idx: usize) -> f64 {
        self.inner.ksq[idx]
    }

    pub fn is_dealiased(&self, idx: usize) -> bool {
        self.inner.dealias[idx]
    }

    pub(crate) fn kx(&self) -> &[f64] {
        &self.inner.kx
    }

    pub(crate) fn ky(&self) -> &[f64] {
        &self.inner.ky
    }

    pub(crate) fn ksq_table(&self) -> &[f64] {
        &self.inner.ksq
    }

    pub(crate) fn differentiable(&self) -> &[bool] {
        &self.inner.differentiable
    }

    pub(crate) fn dealias_mask(&self) -> &[bool] {
        &self.inner.dealias
    }

    /// Flat indices of the first-eigenspace modes `+k_i` and `-k_i`.
    pub fn e1_indices(&self) -> Result<Vec<(usize, usize)>> {
        self.inner
            .info
            .modes
            .iter()
            .map(|k| self.resolve_mode(k))
            .collect()
    }

    pub(crate) fn resolve_mode(&self, k: &DualVector) -> Result<(usize, usize)> {
        let too_coarse = || Error::GridTooCoarse {
            n1: self.n1(),
            n2: self.n2(),
            m: k.m,
            n: k.n,
        };
        let plus = self.mode_index(k.m, k.n).ok_or_else(too_coarse)?;
        let minus = self.mode_index(-k.m, -k.n).ok_or_else(too_coarse)?;
        Ok((plus, minus))
    }

    /// In-place unnormalized 2D FFT over the `n1 x n2` row-major buffer.
    pub(crate) fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let (n1, n2) = (self.inner.n1, self.inner.n2);
        debug_assert_eq!(data.len(), n1 * n2);
        let (row, col) = if inverse {
            (&self.inner.inv2, &self.inner.inv1)
        } else {
            (&self.inner.fwd2, &self.inner.fwd1)
        };
        let scratch_len = row
            .get_inplace_scratch_len()
            .max(col.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];
        row.process_with_scratch(data, &mut scratch);
        let mut t = vec![Complex64::default(); n1 * n2];
        transpose(data, &mut t, n1, n2);
        col.process_with_scratch(&mut t, &mut scratch);
        transpose(&t, data, n2, n1);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{a:?} vs {b:?}")))
    }
}

/// Real field sampled on a [`Grid`].
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for a {}x{} grid",
                samples.len(),
                grid.n1(),
                grid.n2()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(Vec2) -> f64) -> Self {
        let mut samples = Vec::with_capacity(grid.len());
        for j1 in 0..grid.n1() {
            for j2 in 0..grid.n2() {
                samples.push(f(grid.point(j1, j2)));
            }
        }
        Self {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, j1: usize, j2: usize) -> f64 {
        self.samples[j1 * self.grid.n2() + j2]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Removes the cell average.
    pub fn project_mean_zero(&mut self) {
        let mean = self.mean();
        self.samples.iter_mut().for_each(|v| *v -= mean);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| a * v).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &RealField) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            samples,
        })
    }

    /// `g(x) = f(x - p)` for the grid translation `p = (d1/n1) xi + (d2/n2) eta`.
    pub fn grid_shift(&self, d1: i64, d2: i64) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut samples = vec![0.0; n1 * n2];
        for j1 in 0..n1 {
            let s1 = (j1 as i64 - d1).rem_euclid(n1 as i64) as usize;
            for j2 in 0..n2 {
                let s2 = (j2 as i64 - d2).rem_euclid(n2 as i64) as usize;
                samples[j1 * n2 + j2] = self.samples[s1 * n2 + s2];
            }
        }
        Self {
            grid: self.grid.clone(),
            samples,
        }
    }

    pub fn analyze(&self) -> SpectralField {
        analyze(self)
    }
}

/// Fourier coefficients of a real field, stored in FFT order.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a {}x{} grid",
                coeffs.len(),
                grid.n1(),
                grid.n2()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of mode `(m, n)`; zero for modes beyond the grid.
    pub fn coeff(&self, m: i64, n: i64) -> Complex64 {
        self.grid
            .mode_index(m, n)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Sets mode `(m, n)` and its Hermitian partner `(-m, -n)`.
    pub fn set_mode(&mut self, m: i64, n: i64, value: Complex64) -> Result<()> {
        let err = || Error::GridTooCoarse {
            n1: self.grid.n1(),
            n2: self.grid.n2(),
            m,
            n,
        };
        let plus = self.grid.mode_index(m, n).ok_or_else(err)?;
        let minus = self.grid.mode_index(-m, -n).ok_or_else(err)?;
        if plus == minus {
            self.coeffs[plus] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[plus] = value;
            self.coeffs[minus] = value.conj();
        }
        Ok(())
    }

    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn check_mean_zero(&self) -> Result<()> {
        let mean = self.coeffs[0].norm();
        if mean > MEAN_ZERO_TOLERANCE * self.max_abs_coeff().max(1.0) {
            return Err(Error::NonZeroMean { mean });
        }
        Ok(())
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    /// Zeroes every mode outside the two-thirds truncation window.
    pub fn dealias(&mut self) {
        for (c, &keep) in self.coeffs.iter_mut().zip(self.grid.dealias_mask()) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    /// Maximum violation of `F(-m,-n) = conj(F(m,n))` over resolved modes.
    pub fn hermitian_defect(&self) -> f64 {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut worst: f64 = 0.0;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let j1 = (n1 - i1) % n1;
                let j2 = (n2 - i2) % n2;
                let a = self.coeffs[i1 * n2 + i2];
                let b = self.coeffs[j1 * n2 + j2];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    /// Squared L2 norm via Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.area() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn synthesize(&self) -> RealField {
        synthesize(self)
    }
}

pub fn analyze(f: &RealField) -> SpectralField {
    let grid = f.grid.clone();
    let mut data: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft2(&mut data, false);
    let norm = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= norm);
    SpectralField { grid, coeffs: data }
}

pub fn synthesize(field: &SpectralField) -> RealField {
    let grid = field.grid.clone();
    let mut data = field.coeffs.clone();
    grid.fft2(&mut data, true);
    RealField {
        grid,
        samples: data.into_iter().map(|c| c.re).collect(),
    }
}

/// Synthesizes two real fields with one complex transform (`a + i b`).
pub(crate) fn synthesize_pair(a: &SpectralField, b: &SpectralField) -> (RealField, RealField) {
    let grid = a.grid.clone();
    let i = Complex64::new(0.0, 1.0);
    let mut data: Vec<Complex64> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| x + i * y)
        .collect();
    grid.fft2(&mut data, true);
    let re = data.iter().map(|c| c.re).collect();
    let im = data.iter().map(|c| c.im).collect();
    (
        RealField {
            grid: grid.clone(),
            samples: re,
        },
        RealField { grid, samples: im },
    )
}

/// Inverse of `-Laplacian` on mean-zero fields.
pub fn green_apply(field: &SpectralField) -> Result<SpectralField> {
    field.check_mean_zero()?;
    let ksq = field.grid.ksq_table();
    let four_pi2 = 4.0 * PI * PI;
    let coeffs = field
        .coeffs
        .iter()
        .zip(ksq)
        .enumerate()
        .map(|(idx, (c, &q))| {
            if idx == 0 {
                Complex64::default()
            } else {
                c / (four_pi2 * q)
            }
        })
        .collect();
    Ok(SpectralField {
        grid: field.grid.clone(),
        coeffs,
    })
}

/// `-Laplacian`, i.e. multiplication by `4 pi^2 |k|^2`.
pub fn neg_laplacian(field: &SpectralField) -> SpectralField {
    let four_pi2 = 4.0 * PI * PI;
    let coeffs = field
        .coeffs
        .iter()
        .zip(field.grid.ksq_table())
        .map(|(c, &q)| c * (four_pi2 * q))
        .collect();
    SpectralField {
        grid: field.grid.clone(),
        coeffs,
    }
}

/// Cartesian gradient `(d1 f, d2 f)` with per-mode multiplier `2 pi i k`.
/// Nyquist modes have no real derivative and are dropped.
pub fn gradient(field: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = &field.grid;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut d1 = vec![Complex64::default(); grid.len()];
    let mut d2 = vec![Complex64::default(); grid.len()];
    for (idx, c) in field.coeffs.iter().enumerate() {
        if grid.differentiable()[idx] {
            d1[idx] = two_pi_i * grid.kx()[idx] * c;
            d2[idx] = two_pi_i * grid.ky()[idx] * c;
        }
    }
    (
        SpectralField {
            grid: grid.clone(),
            coeffs: d1,
        },
        SpectralField {
            grid: grid.clone(),
            coeffs: d2,
        },
    )
}

/// Spectral divergence of a vector field given by its components.
pub fn divergence(v1: &SpectralField, v2: &SpectralField) -> Result<SpectralField> {
    check_same_grid(&v1.grid, &v2.grid)?;
    let (a, _) = gradient(v1);
    let (_, b) = gradient(v2);
    a.axpy(1.0, &b)
}

/// Scalar curl `d1 v2 - d2 v1`.
pub fn curl(v1: &SpectralField, v2: &SpectralField) -> Result<SpectralField> {
    check_same_grid(&v1.grid, &v2.grid)?;
    let (_, d2v1) = gradient(v1);
    let (d1v2, _) = gradient(v2);
    d1v2.axpy(-1.0, &d2v1)
}

/// Stream function `G omega` and velocity `v = perp-grad psi = (d2 psi, -d1 psi)`
/// in coefficient space.
pub fn velocity_coeffs(omega: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let psi = green_apply(omega)?;
    let (d1, d2) = gradient(&psi);
    Ok((d2, d1.scaled(-1.0)))
}

pub fn velocity_from_vorticity(omega: &SpectralField) -> Result<(RealField, RealField)> {
    let (v1, v2) = velocity_coeffs(omega)?;
    Ok(synthesize_pair(&v1, &v2))
}

/// Kinetic energy `1/2 int omega G omega`.
pub fn energy(omega: &SpectralField) -> Result<f64> {
    omega.check_mean_zero()?;
    let four_pi2 = 4.0 * PI * PI;
    let sum: f64 = omega
        .coeffs
        .iter()
        .zip(omega.grid.ksq_table())
        .skip(1)
        .map(|(c, &q)| c.norm_sqr() / (four_pi2 * q))
        .sum();
    Ok(0.5 * omega.grid.area() * sum)
}

/// `int omega^2`.
pub fn enstrophy(omega: &SpectralField) -> f64 {
    omega.l2_norm_sq()
}

/// `int |grad u|^2`.
pub fn dirichlet_integral(u: &SpectralField) -> f64 {
    let four_pi2 = 4.0 * PI * PI;
    let sum: f64 = u
        .coeffs
        .iter()
        .zip(u.grid.ksq_table())
        .map(|(c, &q)| four_pi2 * q * c.norm_sqr())
        .sum();
    u.grid.area() * sum
}

/// `(1/lambda1) int omega^2 - int omega G omega`, nonnegative by the
/// energy-enstrophy inequality.
pub fn energy_enstrophy_gap(omega: &SpectralField) -> Result<f64> {
    omega.check_mean_zero()?;
    let four_pi2 = 4.0 * PI * PI;
    let inv_l1 = 1.0 / omega.grid.lambda1();
    let sum: f64 = omega
        .coeffs
        .iter()
        .zip(omega.grid.ksq_table())
        .skip(1)
        .map(|(c, &q)| c.norm_sqr() * (inv_l1 - 1.0 / (four_pi2 * q)))
        .sum();
    Ok(omega.grid.area() * sum)
}

/// Fraction of `int omega^2` carried by modes off the first shell.
pub fn mass_outside_e1(omega: &SpectralField) -> Result<f64> {
    let total: f64 = omega.coeffs.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut inside = 0.0;
    for (p, m) in omega.grid.e1_indices()? {
        inside += omega.coeffs[p].norm_sqr() + omega.coeffs[m].norm_sqr();
    }
    Ok(((total - inside) / total).max(0.0))
}

pub fn is_in_e1(omega: &SpectralField) -> Result<bool> {
    Ok(mass_outside_e1(omega)? <= E1_MASS_THRESHOLD)
}

/// `(int |f|^p)^(1/p)` by cell quadrature; `p = inf` gives the max norm.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::BadExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let dv = f.grid.cell_area();
    let s: f64 = if p == 2.0 {
        f.samples.iter().map(|v| v * v).sum()
    } else {
        f.samples.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((s * dv).powf(1.0 / p))
}

/// `int omega^m` by cell quadrature.
pub fn casimir(omega: &RealField, m: u32) -> Result<f64> {
    if m < 1 {
        return Err(Error::BadExponent(m as f64));
    }
    let exp = m as i32;
    Ok(omega.grid.cell_area() * omega.samples.iter().map(|v| v.powi(exp)).sum::<f64>())
}

/// Moves `field` onto `target` (same basis), zero-padding or truncating.
/// Source Nyquist modes are dropped.
pub fn resample(field: &SpectralField, target: &Grid) -> Result<SpectralField> {
    if field.grid.basis() != target.basis() {
        return Err(Error::ShapeMismatch(
            "resample across different lattices".into(),
        ));
    }
    let mut out = SpectralField::zeros(target);
    for (idx, c) in field.coeffs.iter().enumerate() {
        if *c == Complex64::default() || !field.grid.differentiable()[idx] {
            continue;
        }
        let (m, n) = field.grid.mode_of_index(idx);
        if let Some(t) = target.mode_index(m, n) {
            out.coeffs[t] = *c;
        }
    }
    Ok(out)
}

/// `int f g` by cell quadrature.
pub fn inner(f: &RealField, g: &RealField) -> Result<f64> {
    check_same_grid(&f.grid, &g.grid)?;
    Ok(f.grid.cell_area()
        * f.samples
            .iter()
            .zip(&g.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>())
}
