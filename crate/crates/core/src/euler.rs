//! Pseudo-spectral integration of the vorticity equation
//! `d_t omega + v . grad omega = 0`, `v = perp-grad G omega`, with classical
//! RK4 in time, plus conservation diagnostics and the orbital stability
//! experiment.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigenstate::{orbit_distance, orbit_distance_l2, wrap_phase, EigenstateCoeffs};
use crate::error::{Error, Result};
use crate::lattice::Vec2;
use crate::spectral::{
    casimir, energy, enstrophy, lp_norm, mass_outside_e1, synthesize_pair, velocity_coeffs, Grid,
    RealField, SpectralField,
};

/// Abort once `max |omega|` exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Column header of the diagnostics CSV.
pub const CSV_HEADER: &str =
    "t,energy,enstrophy,casimir3,casimir4,casimir5,casimir6,meanv1,meanv2,orbit_dist,pstar1,pstar2,theta";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    /// Steps between diagnostic rows.
    pub diag_stride: usize,
    /// Steps between retained snapshots; 0 keeps none.
    pub snapshot_stride: usize,
    /// Integrate `d_t omega = +v . grad omega` instead (time reversal).
    pub backward: bool,
}

impl SolverConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            dt,
            t_end,
            integrator: Integrator::Rk4,
            dealias: Dealias::TwoThirds,
            diag_stride: 10,
            snapshot_stride: 0,
            backward: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        if self.diag_stride == 0 {
            return Err(Error::InvalidConfig(
                "diag_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn min_cell(&self) -> f64 {
        let b = self.grid.basis();
        (b.xi().norm() / self.grid.n1() as f64).min(b.eta().norm() / self.grid.n2() as f64)
    }
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub omega: SpectralField,
}

/// `-(v . grad omega)` with the two-thirds mask applied to the product.
pub fn rhs(omega: &SpectralField) -> Result<SpectralField> {
    rhs_with(omega, Dealias::TwoThirds)
}

pub fn rhs_with(omega: &SpectralField, dealias: Dealias) -> Result<SpectralField> {
    omega.check_mean_zero()?;
    let grid = omega.grid();
    let mut coeffs = advection(grid, omega.coeffs(), dealias);
    coeffs.iter_mut().for_each(|c| *c = -*c);
    SpectralField::new(grid.clone(), coeffs)
}

/// Coefficients of `v . grad omega` (zero mode removed).
fn advection(grid: &Grid, w: &[Complex64], dealias: Dealias) -> Vec<Complex64> {
    let len = grid.len();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let four_pi2 = 4.0 * PI * PI;
    let (kx, ky, ksq, diff) = (
        grid.kx(),
        grid.ky(),
        grid.ksq_table(),
        grid.differentiable(),
    );
    // velocity packed as v1 + i v2, gradient as d1 + i d2
    let i = Complex64::new(0.0, 1.0);
    let mut vel = vec![Complex64::default(); len];
    let mut grad = vec![Complex64::default(); len];
    for idx in 1..len {
        if !diff[idx] {
            continue;
        }
        let psi = w[idx] / (four_pi2 * ksq[idx]);
        let v1 = two_pi_i * ky[idx] * psi;
        let v2 = -two_pi_i * kx[idx] * psi;
        vel[idx] = v1 + i * v2;
        grad[idx] = two_pi_i * kx[idx] * w[idx] + i * (two_pi_i * ky[idx] * w[idx]);
    }
    grid.fft2(&mut vel, true);
    grid.fft2(&mut grad, true);
    let mut prod: Vec<Complex64> = vel
        .iter()
        .zip(&grad)
        .map(|(v, g)| Complex64::new(v.re * g.re + v.im * g.im, 0.0))
        .collect();
    grid.fft2(&mut prod, false);
    let norm = 1.0 / len as f64;
    let mask = grid.dealias_mask();
    for (idx, c) in prod.iter_mut().enumerate() {
        *c = if dealias == Dealias::TwoThirds && !mask[idx] {
            Complex64::default()
        } else {
            *c * norm
        };
    }
    prod[0] = Complex64::default();
    prod
}

/// Time integrator bound to one configuration.
pub struct Solver {
    config: SolverConfig,
    sign: f64,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let sign = if config.backward { 1.0 } else { -1.0 };
        Ok(Self { config, sign })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Prepares an initial condition: checks the grid and mean, removes the
    /// zero mode and applies the truncation mask.
    pub fn initial_state(&self, omega0: &SpectralField) -> Result<SolverState> {
        if omega0.grid() != &self.config.grid {
            return Err(Error::ShapeMismatch(
                "initial field lives on a different grid".into(),
            ));
        }
        omega0.check_mean_zero()?;
        let mut omega = omega0.clone();
        omega.zero_mean();
        if self.config.dealias == Dealias::TwoThirds {
            omega.dealias();
        }
        Ok(SolverState { t: 0.0, omega })
    }

    fn eval(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut out = advection(&self.config.grid, w, self.config.dealias);
        out.iter_mut().for_each(|c| *c *= self.sign);
        out
    }

    /// One classical RK4 step.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let dt = self.config.dt;
        let w0 = state.omega.coeffs().to_vec();
        let stage = |base: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
            base.iter().zip(k).map(|(b, k)| b + k * h).collect()
        };
        let k1 = self.eval(&w0);
        let k2 = self.eval(&stage(&w0, &k1, 0.5 * dt));
        let k3 = self.eval(&stage(&w0, &k2, 0.5 * dt));
        let k4 = self.eval(&stage(&w0, &k3, dt));
        let w: Vec<Complex64> = (0..w0.len())
            .map(|i| w0[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
            .collect();
        state.omega = SpectralField::new(self.config.grid.clone(), w)?;
        state.t += dt;
        Ok(())
    }
}

/// Reference state against which orbit distances are recorded.
#[derive(Clone, Debug)]
pub struct Target {
    pub coeffs: EigenstateCoeffs,
    pub p_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    /// `int omega^m` for `m = 3..=6`.
    pub casimirs: [f64; 4],
    /// `int |omega|^m` for `m = 2..=6`, used to normalize drifts.
    pub abs_moments: [f64; 5],
    pub mean_velocity: [f64; 2],
    pub max_abs: f64,
    /// L2 norm of the part of omega off the first shell.
    pub e1_residual: f64,
    pub orbit_dist: Option<f64>,
    pub p_star: Option<Vec2>,
    /// `alpha1 + alpha2 - alpha3` of the first-shell projection (six
    /// dimensions, all amplitudes nonzero).
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub rows: Vec<DiagnosticsRow>,
}

fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.12e}"),
        None => "NaN".to_string(),
    }
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn orbit_distances(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.orbit_dist).collect()
    }

    /// `max_t D(t) / D(0)`.
    pub fn amplification(&self) -> Option<f64> {
        let d = self.orbit_distances();
        let d0 = *d.first()?;
        let max = d.iter().fold(0.0f64, |m, v| m.max(*v));
        Some(if d0 > 0.0 {
            max / d0
        } else if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        })
    }

    /// Writes `# key = value` comment lines, the header and one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            let mut fields = vec![
                fmt_num(Some(r.t)),
                fmt_num(Some(r.energy)),
                fmt_num(Some(r.enstrophy)),
            ];
            fields.extend(r.casimirs.iter().map(|c| fmt_num(Some(*c))));
            fields.push(fmt_num(Some(r.mean_velocity[0])));
            fields.push(fmt_num(Some(r.mean_velocity[1])));
            fields.push(fmt_num(r.orbit_dist));
            fields.push(fmt_num(r.p_star.map(|p| p.x)));
            fields.push(fmt_num(r.p_star.map(|p| p.y)));
            fields.push(fmt_num(r.theta));
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Triad phase of the first-shell part of `omega`.
pub fn shell_theta(omega: &SpectralField) -> Result<Option<f64>> {
    let grid = omega.grid();
    if grid.eigenspace().dim() != 6 {
        return Ok(None);
    }
    let idx = grid.e1_indices()?;
    let c: Vec<Complex64> = idx.iter().map(|&(p, _)| omega.coeffs()[p]).collect();
    let scale = omega.max_abs_coeff();
    if c.iter().any(|z| z.norm() <= 1e-12 * scale) {
        return Ok(None);
    }
    Ok(Some(wrap_phase(c[0].arg() + c[1].arg() - c[2].arg())))
}

/// Samples every diagnostic at one instant.
pub fn sample(t: f64, omega: &SpectralField, target: Option<&Target>) -> Result<DiagnosticsRow> {
    let (v1, v2) = velocity_coeffs(omega)?;
    let (vr1, vr2) = synthesize_pair(&v1, &v2);
    let omega_real = omega.synthesize();
    let mut casimirs = [0.0; 4];
    for (m, slot) in (3u32..=6).zip(casimirs.iter_mut()) {
        *slot = casimir(&omega_real, m)?;
    }
    let mut abs_moments = [0.0; 5];
    for (m, slot) in (2u32..=6).zip(abs_moments.iter_mut()) {
        *slot = lp_norm(&omega_real, m as f64)?.powi(m as i32);
    }
    let ens = enstrophy(omega);
    let e1_residual = (mass_outside_e1(omega)? * ens).sqrt();
    let (orbit_dist, p_star) = match target {
        Some(tg) => {
            let d = if tg.p_norm == 2.0 {
                orbit_distance_l2(omega, &tg.coeffs)?
            } else {
                orbit_distance(&omega_real, &tg.coeffs, tg.p_norm)?
            };
            (Some(d.dist), Some(d.p_star))
        }
        None => (None, None),
    };
    Ok(DiagnosticsRow {
        t,
        energy: energy(omega)?,
        enstrophy: ens,
        casimirs,
        abs_moments,
        mean_velocity: [vr1.mean(), vr2.mean()],
        max_abs: omega_real.max_abs(),
        e1_residual,
        orbit_dist,
        p_star,
        theta: shell_theta(omega)?,
    })
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub final_state: SolverState,
    /// `(t, omega(t))` at every `snapshot_stride` steps, including `t = 0`.
    pub snapshots: Vec<(f64, RealField)>,
    pub diagnostics: Diagnostics,
}

fn max_speed(omega: &SpectralField) -> Result<f64> {
    let (v1, v2) = velocity_coeffs(omega)?;
    let (a, b) = synthesize_pair(&v1, &v2);
    Ok(a.samples()
        .iter()
        .zip(b.samples())
        .fold(0.0f64, |m, (x, y)| m.max(x.hypot(*y))))
}

fn cfl_advisory(config: &SolverConfig, omega: &SpectralField, t: f64) -> Result<()> {
    let vmax = max_speed(omega)?;
    if vmax > 0.0 {
        let limit = 0.5 * config.min_cell() / vmax;
        if config.dt > limit {
            log::warn!(
                "t = {t}: dt = {} exceeds advisory CFL limit {limit:.3e}",
                config.dt
            );
        }
    }
    Ok(())
}

/// Integrates from `omega0` to `t_end`.
pub fn run(
    config: &SolverConfig,
    omega0: &SpectralField,
    target: Option<&Target>,
) -> Result<RunOutput> {
    let solver = Solver::new(config.clone())?;
    let mut state = solver.initial_state(omega0)?;
    let steps = config.steps();
    let dt = config.dt;
    cfl_advisory(config, &state.omega, 0.0)?;
    let mut diagnostics = Diagnostics::default();
    let mut snapshots = Vec::new();
    let first = sample(0.0, &state.omega, target)?;
    let limit = BLOWUP_FACTOR * first.max_abs.max(f64::MIN_POSITIVE);
    diagnostics.rows.push(first);
    if config.snapshot_stride > 0 {
        snapshots.push((0.0, state.omega.synthesize()));
    }
    log::debug!("integrating {steps} steps of dt = {dt}");
    for n in 1..=steps {
        solver.step(&mut state)?;
        // avoid drift from repeated addition
        state.t = n as f64 * dt;
        let diag_due = n % config.diag_stride == 0;
        if diag_due
            || !state
                .omega
                .coeffs()
                .iter()
                .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            let row = sample(state.t, &state.omega, target);
            let blown = match &row {
                Ok(r) => !(r.max_abs <= limit),
                Err(_) => true,
            };
            if blown {
                let max_abs = row.as_ref().map(|r| r.max_abs).unwrap_or(f64::NAN);
                return Err(Error::NumericalBlowup {
                    t: state.t,
                    max_abs,
                    partial: Box::new(diagnostics),
                });
            }
            let row = row?;
            diagnostics.rows.push(row);
            if n % (config.diag_stride * 10) == 0 {
                cfl_advisory(config, &state.omega, state.t)?;
            }
        }
        if config.snapshot_stride > 0 && n % config.snapshot_stride == 0 {
            snapshots.push((state.t, state.omega.synthesize()));
        }
    }
    Ok(RunOutput {
        final_state: state,
        snapshots,
        diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityThresholds {
    pub energy: f64,
    /// Enstrophy (`m = 2`).
    pub quadratic: f64,
    /// `m = 3..=6`.
    pub higher: f64,
}

impl Default for AdmissibilityThresholds {
    fn default() -> Self {
        Self {
            energy: 1e-8,
            quadratic: 1e-8,
            higher: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub energy_drift: f64,
    /// Relative drift of `int omega^m` for `m = 2..=6`.
    pub casimir_drifts: [f64; 5],
    pub pass: bool,
}

/// Maximum relative drift of energy and of the casimirs `m = 2..=6`. Each
/// casimir drift is normalized by `int |omega|^m` at the first sample so that
/// odd moments near zero do not inflate it.
pub fn admissibility_check(
    diag: &Diagnostics,
    thresholds: &AdmissibilityThresholds,
) -> Result<AdmissibilityReport> {
    let first = diag
        .rows
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty diagnostics".into()))?;
    let rel = |a: f64, b: f64, denom: f64| {
        if denom > 0.0 {
            (a - b).abs() / denom
        } else {
            (a - b).abs()
        }
    };
    let mut energy_drift: f64 = 0.0;
    let mut drifts = [0.0f64; 5];
    for r in &diag.rows {
        energy_drift = energy_drift.max(rel(r.energy, first.energy, first.energy));
        drifts[0] = drifts[0].max(rel(r.enstrophy, first.enstrophy, first.abs_moments[0]));
        for j in 0..4 {
            drifts[j + 1] = drifts[j + 1].max(rel(
                r.casimirs[j],
                first.casimirs[j],
                first.abs_moments[j + 1],
            ));
        }
    }
    let pass = energy_drift <= thresholds.energy
        && drifts[0] <= thresholds.quadratic
        && drifts[1..].iter().all(|d| *d <= thresholds.higher);
    Ok(AdmissibilityReport {
        energy_drift,
        casimir_drifts: drifts,
        pass,
    })
}

/// Seeded random real field with Fourier support on `0 < |k| <= kmax`,
/// inside the truncation window, normalized to unit `L^p` norm.
pub fn random_band_limited(
    grid: &Grid,
    kmax: f64,
    p_norm: f64,
    seed: u64,
) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(grid);
    // enumerate the half plane so each Hermitian pair is drawn once, in a fixed order
    let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
    let mut any = false;
    for m in 0..n1 / 2 {
        for n in -(n2 / 2) + 1..n2 / 2 {
            if m == 0 && n <= 0 {
                continue;
            }
            let Some(idx) = grid.mode_index(m, n) else {
                continue;
            };
            if !grid.is_dealiased(idx) || grid.ksq(idx).sqrt() > kmax * (1.0 + 1e-12) {
                continue;
            }
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            field.set_mode(m, n, z)?;
            any = true;
        }
    }
    if !any {
        return Err(Error::InvalidConfig(format!(
            "no modes with 0 < |k| <= {kmax}"
        )));
    }
    let norm = lp_norm(&field.synthesize(), p_norm)?;
    Ok(field.scaled(1.0 / norm))
}

/// Perturbs `reference` by `epsilon` times a unit random field band-limited
/// to `|k| <= 3 rho`, integrates, and records the orbit distance to the
/// reference, the optimal translation and the triad phase.
pub fn stability_experiment(
    reference: &EigenstateCoeffs,
    epsilon: f64,
    perturbation_seed: u64,
    p_norm: f64,
    config: &SolverConfig,
) -> Result<Diagnostics> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "epsilon = {epsilon} must be nonnegative"
        )));
    }
    let grid = &config.grid;
    let omega_bar = reference.to_spectral(grid)?;
    let omega0 = if epsilon > 0.0 {
        let g = random_band_limited(grid, 3.0 * grid.eigenspace().rho, p_norm, perturbation_seed)?;
        omega_bar.axpy(epsilon, &g)?
    } else {
        omega_bar
    };
    let target = Target {
        coeffs: reference.clone(),
        p_norm,
    };
    Ok(run(config, &omega0, Some(&target))?.diagnostics)
}
