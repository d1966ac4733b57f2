//! Elements of the first eigenspace as amplitude/phase tuples.
//!
//! A state is `w(x) = sum_i A_i cos(2 pi k_i.x + alpha_i)` over the ordered
//! wave vectors of [`EigenspaceInfo`]. Translating `w` by `p` only rotates
//! phases, `alpha_i -> alpha_i - 2 pi k_i.p`, which is what makes orbit
//! bookkeeping tractable.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{EigenspaceInfo, Vec2};
use crate::optimize::NelderMead;
use crate::spectral::{analyze, lp_norm, Grid, RealField, SpectralField};

/// Default tolerance for [`same_orbit`] on amplitudes and phase invariants.
pub const DEFAULT_ORBIT_TOLERANCE: f64 = 1e-8;

/// Coarse search resolution per lattice direction for general `L^p` orbit
/// distances.
pub const COARSE_SEARCH: usize = 32;

pub fn wrap_phase(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenstateCoeffs {
    info: EigenspaceInfo,
    amps: Vec<f64>,
    phases: Vec<f64>,
}

impl EigenstateCoeffs {
    /// Builds a canonical tuple: phases are reduced to `[0, 2 pi)`, a negative
    /// amplitude is folded into its phase and a zero amplitude gets phase 0.
    pub fn new(info: EigenspaceInfo, amps: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amps.len() != info.pairs() || phases.len() != info.pairs() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes / {} phases for a {}-dimensional eigenspace",
                amps.len(),
                phases.len(),
                info.dim()
            )));
        }
        if amps.iter().chain(&phases).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite eigenstate coefficient".into()));
        }
        let mut c = Self { info, amps, phases };
        c.canonicalize();
        Ok(c)
    }

    pub fn zeros(info: EigenspaceInfo) -> Self {
        let n = info.pairs();
        Self {
            info,
            amps: vec![0.0; n],
            phases: vec![0.0; n],
        }
    }

    /// Uniform amplitudes in `[0, max_amp)` and uniform phases.
    pub fn random<R: Rng + ?Sized>(info: EigenspaceInfo, max_amp: f64, rng: &mut R) -> Self {
        let n = info.pairs();
        let amps = (0..n).map(|_| rng.gen::<f64>() * max_amp).collect();
        let phases = (0..n).map(|_| rng.gen::<f64>() * TAU).collect();
        let mut c = Self { info, amps, phases };
        c.canonicalize();
        c
    }

    fn canonicalize(&mut self) {
        for (a, ph) in self.amps.iter_mut().zip(self.phases.iter_mut()) {
            if *a < 0.0 {
                *a = -*a;
                *ph += PI;
            }
            *ph = if *a == 0.0 { 0.0 } else { wrap_phase(*ph) };
        }
    }

    pub fn info(&self) -> &EigenspaceInfo {
        &self.info
    }

    pub fn dim(&self) -> usize {
        self.info.dim()
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Complex mode amplitude `A_i exp(i alpha_i)`.
    pub fn mode(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.amps[i], self.phases[i])
    }

    /// `int w^2 = area * sum A_i^2 / 2`.
    pub fn l2_norm_sq(&self) -> f64 {
        0.5 * self.info.basis.area() * self.amps.iter().map(|a| a * a).sum::<f64>()
    }

    /// Plain-text record `dim A1 alpha1 [A2 alpha2 [A3 alpha3]]`.
    pub fn to_record(&self) -> String {
        let mut s = self.dim().to_string();
        for (a, ph) in self.amps.iter().zip(&self.phases) {
            s.push_str(&format!(" {a} {ph}"));
        }
        s
    }

    /// Parses a record; the leading `dim` token is optional.
    pub fn parse(info: EigenspaceInfo, text: &str) -> Result<Self> {
        let values: Vec<f64> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{t}'")))
            })
            .collect::<Result<_>>()?;
        let dim = info.dim();
        let body = if values.len() == dim {
            &values[..]
        } else if values.len() == dim + 1 && values[0] == dim as f64 {
            &values[1..]
        } else {
            return Err(Error::Parse(format!(
                "expected '{dim} A1 alpha1 ...' with {} amplitude/phase pairs, got {} numbers",
                info.pairs(),
                values.len()
            )));
        };
        let amps = body.iter().step_by(2).copied().collect();
        let phases = body.iter().skip(1).step_by(2).copied().collect();
        Self::new(info, amps, phases)
    }

    /// Fourier coefficients of the state on `grid`.
    pub fn to_spectral(&self, grid: &Grid) -> Result<SpectralField> {
        if grid.basis() != &self.info.basis {
            return Err(Error::MixedEigenspace);
        }
        let mut s = SpectralField::zeros(grid);
        for (i, k) in self.info.modes.iter().enumerate() {
            s.set_mode(k.m, k.n, self.mode(i) * 0.5)?;
        }
        Ok(s)
    }
}

pub fn synthesize_eigenstate(c: &EigenstateCoeffs, grid: &Grid) -> Result<RealField> {
    Ok(c.to_spectral(grid)?.synthesize())
}

/// Coefficients of `w(. - p)`.
pub fn translate_coeffs(c: &EigenstateCoeffs, p: Vec2) -> EigenstateCoeffs {
    let mut out = c.clone();
    for (ph, k) in out.phases.iter_mut().zip(&c.info.modes) {
        *ph -= TAU * k.k.dot(p);
    }
    out.canonicalize();
    out
}

/// Phase angle `alpha1 + alpha2 - alpha3` (six-dimensional case only).
pub fn phase_angle(c: &EigenstateCoeffs) -> Option<f64> {
    (c.info.pairs() == 3).then(|| wrap_phase(c.phases[0] + c.phases[1] - c.phases[2]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitInvariant {
    pub amps: Vec<f64>,
    /// `A1 A2 A3 exp(i (alpha1 + alpha2 - alpha3))`, six-dimensional case only.
    pub phase: Option<Complex64>,
}

pub fn orbit_invariant(c: &EigenstateCoeffs) -> OrbitInvariant {
    let phase = phase_angle(c).map(|theta| Complex64::from_polar(c.amps.iter().product(), theta));
    OrbitInvariant {
        amps: c.amps.clone(),
        phase,
    }
}

/// Translation-orbit equality through the invariants: equal ordered
/// amplitudes, plus equal phase angle in the six-dimensional case when
/// `A1 A2 A3 > tol`.
pub fn same_orbit(a: &EigenstateCoeffs, b: &EigenstateCoeffs, tol: f64) -> Result<bool> {
    if a.info != b.info {
        return Err(Error::MixedEigenspace);
    }
    if a.amps.iter().zip(&b.amps).any(|(x, y)| (x - y).abs() > tol) {
        return Ok(false);
    }
    if a.info.pairs() == 3 {
        let prod_a: f64 = a.amps.iter().product();
        let prod_b: f64 = b.amps.iter().product();
        if prod_a > tol && prod_b > tol {
            let (ta, tb) = (phase_angle(a).unwrap(), phase_angle(b).unwrap());
            return Ok(circular_distance(ta, tb) <= tol);
        }
    }
    Ok(true)
}

/// Solves `2 pi k_i.p = theta_i` for two linearly independent modes.
fn solve_phase_system(k1: Vec2, k2: Vec2, t1: f64, t2: f64) -> Vec2 {
    let det = k1.cross(k2);
    let r1 = t1 / TAU;
    let r2 = t2 / TAU;
    Vec2::new((r1 * k2.y - r2 * k1.y) / det, (k1.x * r2 - k2.x * r1) / det)
}

/// Constructive orbit test: finds `p` with `translate_coeffs(a, p) == b`
/// from the phase equations of two independent active modes, then checks
/// every mode. Returns `None` when no translation maps `a` onto `b`.
pub fn solve_translation(
    a: &EigenstateCoeffs,
    b: &EigenstateCoeffs,
    tol: f64,
) -> Result<Option<Vec2>> {
    if a.info != b.info {
        return Err(Error::MixedEigenspace);
    }
    if a.amps.iter().zip(&b.amps).any(|(x, y)| (x - y).abs() > tol) {
        return Ok(None);
    }
    let modes = &a.info.modes;
    let active: Vec<usize> = (0..modes.len())
        .filter(|&i| a.amps[i] > tol && b.amps[i] > tol)
        .collect();
    let shift = |i: usize| a.phases[i] - b.phases[i];
    let p = match active.as_slice() {
        [] => Vec2::ZERO,
        [i] => {
            let k = modes[*i].k;
            k * (shift(*i) / (TAU * k.norm_sq()))
        }
        [i, j, ..] => solve_phase_system(modes[*i].k, modes[*j].k, shift(*i), shift(*j)),
    };
    let moved = translate_coeffs(a, p);
    let ok = (0..modes.len()).all(|i| {
        let d = (moved.mode(i) - b.mode(i)).norm();
        d <= 4.0 * tol * a.amps[i].max(1.0)
    });
    Ok(ok.then_some(p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitDistance {
    pub dist: f64,
    /// A minimizing translation, reduced to the fundamental cell.
    pub p_star: Vec2,
}

/// `min_p || f - w(. - p) ||_p` over translations.
///
/// For `p_norm = 2` the distance decomposes per Fourier mode; the optimal
/// translation maximizes `sum_i a_i cos(gamma_i + 2 pi k_i.p)`, which is
/// solved in closed form for two and four dimensions and by a phase-torus
/// search plus Newton polish for six. Other exponents use a coarse grid over
/// the fundamental cell followed by Nelder-Mead refinement.
pub fn orbit_distance(f: &RealField, c: &EigenstateCoeffs, p_norm: f64) -> Result<OrbitDistance> {
    if !(p_norm >= 1.0) {
        return Err(Error::BadExponent(p_norm));
    }
    let grid = f.grid();
    if grid.basis() != &c.info.basis {
        return Err(Error::MixedEigenspace);
    }
    grid.e1_indices()?;
    if p_norm == 2.0 {
        orbit_distance_l2(&analyze(f), c)
    } else {
        orbit_distance_search(f, c, p_norm)
    }
}

/// L2 orbit distance from Fourier coefficients.
pub fn orbit_distance_l2(fhat: &SpectralField, c: &EigenstateCoeffs) -> Result<OrbitDistance> {
    let grid = fhat.grid();
    if grid.basis() != &c.info.basis {
        return Err(Error::MixedEigenspace);
    }
    let idx = grid.e1_indices()?;
    let coeffs = fhat.coeffs();
    let mut off_shell: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    for &(p, m) in &idx {
        off_shell -= coeffs[p].norm_sqr() + coeffs[m].norm_sqr();
    }
    // recompute the off-shell mass without cancellation when it is small
    if off_shell < 1e-6 * fhat.max_abs_coeff().powi(2) {
        let on: Vec<bool> = {
            let mut v = vec![false; coeffs.len()];
            for &(p, m) in &idx {
                v[p] = true;
                v[m] = true;
            }
            v
        };
        off_shell = coeffs
            .iter()
            .zip(&on)
            .filter(|(_, &o)| !o)
            .map(|(z, _)| z.norm_sqr())
            .sum();
    }
    let f_modes: Vec<Complex64> = idx.iter().map(|&(p, _)| coeffs[p]).collect();
    let w_modes: Vec<Complex64> = (0..c.info.pairs()).map(|i| c.mode(i) * 0.5).collect();

    let dist_at = |theta: &[f64]| -> f64 {
        let on: f64 = f_modes
            .iter()
            .zip(&w_modes)
            .zip(theta)
            .map(|((fz, wz), &t)| (fz - wz * Complex64::from_polar(1.0, -t)).norm_sqr())
            .sum();
        (grid.area() * (off_shell.max(0.0) + 2.0 * on)).sqrt()
    };

    let g: Vec<Complex64> = f_modes
        .iter()
        .zip(&w_modes)
        .map(|(fz, wz)| fz * wz.conj())
        .collect();
    let modes = &c.info.modes;
    let theta: Vec<f64> = match modes.len() {
        1 => vec![-g[0].arg()],
        2 => vec![-g[0].arg(), -g[1].arg()],
        _ => {
            let (t1, t2) = maximize_triad(&g);
            vec![t1, t2, t1 + t2]
        }
    };
    let p = match modes.len() {
        1 => modes[0].k * (theta[0] / (TAU * modes[0].k.norm_sq())),
        _ => solve_phase_system(modes[0].k, modes[1].k, theta[0], theta[1]),
    };
    let at_zero = dist_at(&vec![0.0; modes.len()]);
    let best = dist_at(&theta);
    let basis = &c.info.basis;
    Ok(if best <= at_zero {
        OrbitDistance {
            dist: best,
            p_star: basis.wrap(p),
        }
    } else {
        OrbitDistance {
            dist: at_zero,
            p_star: Vec2::ZERO,
        }
    })
}

/// Maximizes `h = sum_i |g_i| cos(arg g_i + theta_i)` with `theta_3 = theta_1 + theta_2`.
fn maximize_triad(g: &[Complex64]) -> (f64, f64) {
    let a: Vec<f64> = g.iter().map(|z| z.norm()).collect();
    let c: Vec<f64> = g.iter().map(|z| z.arg()).collect();
    let h = |t1: f64, t2: f64| {
        a[0] * (c[0] + t1).cos() + a[1] * (c[1] + t2).cos() + a[2] * (c[2] + t1 + t2).cos()
    };
    if a.iter().all(|&v| v == 0.0) {
        return (0.0, 0.0);
    }
    const N: usize = 64;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..N {
        for j in 0..N {
            let (t1, t2) = (TAU * i as f64 / N as f64, TAU * j as f64 / N as f64);
            let v = h(t1, t2);
            if v > best.2 {
                best = (t1, t2, v);
            }
        }
    }
    let (mut t1, mut t2, mut val) = best;
    for _ in 0..50 {
        let s1 = a[0] * (c[0] + t1).sin();
        let s2 = a[1] * (c[1] + t2).sin();
        let s3 = a[2] * (c[2] + t1 + t2).sin();
        let k1 = a[0] * (c[0] + t1).cos();
        let k2 = a[1] * (c[1] + t2).cos();
        let k3 = a[2] * (c[2] + t1 + t2).cos();
        let grad = [-(s1 + s3), -(s2 + s3)];
        let hess = [[-(k1 + k3), -k3], [-k3, -(k2 + k3)]];
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        // Newton step when the Hessian is negative definite, gradient step otherwise
        let step = if hess[0][0] < 0.0 && det > 0.0 {
            [
                -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det,
                -(hess[0][0] * grad[1] - hess[1][0] * grad[0]) / det,
            ]
        } else {
            let scale = 0.1 / a.iter().sum::<f64>();
            [grad[0] * scale, grad[1] * scale]
        };
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-6 {
            let (n1, n2) = (t1 + lambda * step[0], t2 + lambda * step[1]);
            let nv = h(n1, n2);
            if nv >= val {
                t1 = n1;
                t2 = n2;
                val = nv;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved || step[0].hypot(step[1]) < 1e-15 {
            break;
        }
    }
    (t1, t2)
}

fn orbit_distance_search(
    f: &RealField,
    c: &EigenstateCoeffs,
    p_norm: f64,
) -> Result<OrbitDistance> {
    let grid = f.grid().clone();
    let basis = c.info.basis;
    let base = c.to_spectral(&grid)?;
    let modes = c.info.modes.clone();
    let eval = |s: f64, t: f64| -> f64 {
        let p = basis.point(s, t);
        let mut shifted = base.clone();
        for k in &modes {
            let rot = Complex64::from_polar(1.0, -TAU * k.k.dot(p));
            let (ip, im) = grid.resolve_mode(k).expect("resolved above");
            shifted.coeffs_mut()[ip] *= rot;
            shifted.coeffs_mut()[im] *= rot.conj();
        }
        let w = shifted.synthesize();
        let diff = f.axpy(-1.0, &w).expect("same grid");
        lp_norm(&diff, p_norm).expect("valid exponent")
    };

    let n = COARSE_SEARCH;
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| eval((idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64))
        .collect();
    let (best_idx, _) =
        values.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        );
    let start = [
        (best_idx / n) as f64 / n as f64,
        (best_idx % n) as f64 / n as f64,
    ];
    let nm = NelderMead {
        initial_step: 0.5 / n as f64,
        ..Default::default()
    };
    let refined = nm.minimize(|x| eval(x[0], x[1]), &start);
    let at_zero = values[0];
    Ok(if refined.value <= at_zero {
        OrbitDistance {
            dist: refined.value,
            p_star: basis.wrap(basis.point(refined.x[0], refined.x[1])),
        }
    } else {
        OrbitDistance {
            dist: at_zero,
            p_star: Vec2::ZERO,
        }
    })
}

/// Projection onto the first eigenspace and the L2 norm of the remainder.
pub fn project_to_e1(f: &RealField) -> Result<(EigenstateCoeffs, f64)> {
    let fhat = analyze(f);
    fhat.check_mean_zero()?;
    let grid = f.grid();
    let info = grid.eigenspace().clone();
    let idx = grid.e1_indices()?;
    let floor = 1e-12 * f.max_abs();
    let mut amps = Vec::with_capacity(idx.len());
    let mut phases = Vec::with_capacity(idx.len());
    for &(p, _) in &idx {
        let z = fhat.coeffs()[p] * 2.0;
        if z.norm() <= floor {
            amps.push(0.0);
            phases.push(0.0);
        } else {
            amps.push(z.norm());
            phases.push(z.arg());
        }
    }
    let coeffs = EigenstateCoeffs::new(info, amps, phases)?;
    let w = synthesize_eigenstate(&coeffs, grid)?;
    let residual = lp_norm(&f.axpy(-1.0, &w)?, 2.0)?;
    Ok((coeffs, residual))
}
