//! Self-check battery run by `torus-euler verify`. Each check is small enough
//! that the whole suite finishes in seconds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eigenstate::{
    orbit_distance_l2, same_orbit, solve_translation, translate_coeffs, EigenstateCoeffs,
};
use crate::equimeasurable::{
    enumerate_candidates, forward_moments, max_orbits, moment_bracket, moments_quadrature_oracle,
    orbit_census, CandidateTriple, MomentData,
};
use crate::error::Result;
use crate::euler::{admissibility_check, run, AdmissibilityThresholds, SolverConfig};
use crate::lattice::{classify_eigenspace, EigenspaceInfo, LatticeBasis, Vec2};
use crate::spectral::{energy_enstrophy_gap, enstrophy, Grid, SpectralField};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("lattice presets", check_presets),
    ("dual basis identities", check_dual),
    ("energy-enstrophy inequality", check_gap),
    ("moment brackets", check_brackets),
    ("cubic round-trip", check_cubic),
    ("orbit census bounds", check_census),
    ("orbit equivalence", check_equivalence),
    ("steady eigenstates", check_steady),
    ("conservation", check_conservation),
];

/// Runs every check; each gets its own generator derived from `seed`.
pub fn run_battery(seed: u64) -> VerifyReport {
    let checks = CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            match f(&mut rng) {
                Ok((pass, detail)) => CheckResult { name, pass, detail },
                Err(e) => CheckResult {
                    name,
                    pass: false,
                    detail: format!("error: {e}"),
                },
            }
        })
        .collect();
    VerifyReport { seed, checks }
}

fn info(preset: &str) -> Result<EigenspaceInfo> {
    classify_eigenspace(&LatticeBasis::preset(preset)?)
}

fn random_basis(rng: &mut ChaCha8Rng) -> LatticeBasis {
    loop {
        let xi = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let eta = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if xi.cross(eta).abs() > 0.1 {
            if let Ok(b) = LatticeBasis::new(xi, eta) {
                return b;
            }
        }
    }
}

fn check_presets(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let hex = info("hexagonal")?;
    let sq = info("square")?;
    let rect = info(&format!("rectangular:{PI}"))?;
    let ok = hex.dim() == 6
        && (hex.lambda1 - 4.0 / 3.0).abs() < 1e-10
        && (hex.rho - 1.0 / (3f64.sqrt() * PI)).abs() < 1e-10
        && sq.dim() == 4
        && (sq.lambda1 - 1.0).abs() < 1e-10
        && rect.dim() == 2
        && (rect.lambda1 - 1.0).abs() < 1e-10;
    Ok((
        ok,
        format!(
            "lambda1 = {:.12} / {:.12} / {:.12}",
            hex.lambda1, sq.lambda1, rect.lambda1
        ),
    ))
}

fn check_dual(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let b = random_basis(rng);
        let d = b.dual();
        let errs = [
            d.xi_star.dot(b.xi()) - 1.0,
            d.xi_star.dot(b.eta()),
            d.eta_star.dot(b.xi()),
            d.eta_star.dot(b.eta()) - 1.0,
        ];
        worst = errs.iter().fold(worst, |m, e| m.max(e.abs()));
    }
    Ok((worst <= 1e-12, format!("max defect {worst:.2e}")))
}

fn check_gap(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let grid = Grid::new(LatticeBasis::preset("hexagonal")?, 32, 32)?;
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..20 {
        let mut f = SpectralField::zeros(&grid);
        for _ in 0..8 {
            let m = rng.gen_range(-5..=5);
            let n = rng.gen_range(-5..=5);
            if (m, n) != (0, 0) {
                f.set_mode(
                    m,
                    n,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )?;
            }
        }
        let e = enstrophy(&f);
        if e > 0.0 {
            worst = worst.min(energy_enstrophy_gap(&f)? / e);
        }
    }
    let c = EigenstateCoeffs::random(grid.eigenspace().clone(), 1.0, rng);
    let w = c.to_spectral(&grid)?;
    let shell_gap = energy_enstrophy_gap(&w)?.abs() / enstrophy(&w);
    Ok((
        worst >= -1e-10 && shell_gap <= 1e-10,
        format!("min gap {worst:.2e}, shell gap {shell_gap:.2e}"),
    ))
}

fn check_brackets(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let hex = info("hexagonal")?;
    let kappa = [(2, 0.5), (3, 1.5), (4, 3.0 / 8.0), (6, 5.0 / 16.0)];
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = EigenstateCoeffs::random(hex.clone(), 1.5, rng);
        for (m, k) in kappa {
            let o = moments_quadrature_oracle(&c, m);
            let b = k * moment_bracket(&c, m)?;
            worst = worst.max((o - b).abs() / o.abs().max(1e-300).max(b.abs()).max(1e-12));
        }
    }
    Ok((worst <= 1e-9, format!("max relative mismatch {worst:.2e}")))
}

fn check_cubic(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut most = 0;
    for _ in 0..100 {
        let t = CandidateTriple {
            x: rng.gen_range(0.0..2.0),
            y: rng.gen_range(0.0..2.0),
            z: rng.gen_range(0.0..2.0),
        };
        let [c1, c2, c3] = forward_moments(t.x, t.y, t.z);
        let cands = enumerate_candidates(&MomentData {
            c1,
            c2,
            c3,
            b2: 0.0,
        });
        most = most.max(cands.len());
        worst = worst.max(
            cands
                .iter()
                .map(|c| c.max_dist(&t))
                .fold(f64::INFINITY, f64::min),
        );
    }
    Ok((
        worst <= 1e-6 && most <= 6,
        format!("max recovery error {worst:.2e}, max candidates {most}"),
    ))
}

fn check_census(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    let mut counts = Vec::new();
    for preset in ["rectangular:3.0", "square", "hexagonal"] {
        let i = info(preset)?;
        let mut most = 0;
        for _ in 0..20 {
            let c = EigenstateCoeffs::random(i.clone(), 1.0, rng);
            let census = orbit_census(&c)?;
            ok &=
                census.count <= max_orbits(i.dim()) && census.matches_reference.iter().any(|m| *m);
            most = most.max(census.count);
        }
        counts.push(format!("dim {}: max {most}", i.dim()));
    }
    Ok((ok, counts.join(", ")))
}

fn check_equivalence(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut disagreements = 0;
    for preset in ["rectangular:3.0", "square", "hexagonal"] {
        let i = info(preset)?;
        for k in 0..40 {
            let a = EigenstateCoeffs::random(i.clone(), 1.0, rng);
            let p = i.basis.point(rng.gen(), rng.gen());
            let mut b = translate_coeffs(&a, p);
            if k % 2 == 1 {
                let mut ph = b.phases().to_vec();
                let last = ph.len() - 1;
                ph[last] += 0.3;
                b = EigenstateCoeffs::new(i.clone(), b.amps().to_vec(), ph)?;
            }
            let s = same_orbit(&a, &b, 1e-8)?;
            let t = solve_translation(&a, &b, 1e-8)?.is_some();
            if s != t {
                disagreements += 1;
            }
        }
    }
    Ok((disagreements == 0, format!("{disagreements} disagreements")))
}

fn check_steady(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let grid = Grid::new(LatticeBasis::preset("hexagonal")?, 32, 32)?;
    let c = EigenstateCoeffs::random(grid.eigenspace().clone(), 1.0, rng);
    let mut cfg = SolverConfig::new(grid.clone(), 1e-2, 1.0);
    cfg.diag_stride = 100;
    let out = run(&cfg, &c.to_spectral(&grid)?, None)?;
    let rel = orbit_distance_l2(&out.final_state.omega, &c)?.dist / c.l2_norm_sq().sqrt();
    Ok((rel <= 1e-6, format!("relative orbit distance {rel:.2e}")))
}

fn check_conservation(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let grid = Grid::new(LatticeBasis::preset("hexagonal")?, 32, 32)?;
    let mut w = SpectralField::zeros(&grid);
    w.set_mode(1, 0, Complex64::new(0.25, 0.0))?;
    w.set_mode(1, 2, Complex64::new(0.0, 0.2))?;
    let mut cfg = SolverConfig::new(grid, 1e-2, 1.0);
    cfg.diag_stride = 10;
    let out = run(&cfg, &w, None)?;
    let rep = admissibility_check(&out.diagnostics, &AdmissibilityThresholds::default())?;
    Ok((
        rep.pass,
        format!(
            "energy drift {:.2e}, enstrophy drift {:.2e}",
            rep.energy_drift, rep.casimir_drifts[0]
        ),
    ))
}
