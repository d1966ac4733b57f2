use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_euler::eigenstate::{
    circular_distance, orbit_distance, same_orbit, solve_translation, translate_coeffs,
    EigenstateCoeffs,
};
use torus_euler::lattice::{classify_eigenspace, EigenspaceInfo, LatticeBasis, Vec2};
use torus_euler::spectral::{Grid, RealField};

const PRESETS: [&str; 3] = ["rectangular:3.0", "square", "hexagonal"];

fn info(which: usize) -> EigenspaceInfo {
    classify_eigenspace(&LatticeBasis::preset(PRESETS[which]).unwrap()).unwrap()
}

fn random_state(info: &EigenspaceInfo, rng: &mut ChaCha8Rng) -> EigenstateCoeffs {
    let pairs = info.pairs();
    let amps = (0..pairs).map(|_| rng.gen_range(0.2..1.5)).collect();
    let phases = (0..pairs).map(|_| rng.gen_range(0.0..TAU)).collect();
    EigenstateCoeffs::new(info.clone(), amps, phases).unwrap()
}

/// `sum A_i cos(2 pi k_i . (x - p) + alpha_i)` evaluated pointwise.
fn evaluate(c: &EigenstateCoeffs, x: Vec2, p: Vec2) -> f64 {
    c.info()
        .modes
        .iter()
        .zip(c.amps().iter().zip(c.phases()))
        .map(|(k, (a, ph))| a * (TAU * k.k.dot(x - p) + ph).cos())
        .sum()
}

/// Constructive test: solve the phase equations of the
/// first two modes by Cramer's rule (one mode in two dimensions), then
/// compare every mode.
fn constructive_same_orbit(a: &EigenstateCoeffs, b: &EigenstateCoeffs, tol: f64) -> bool {
    if a.amps()
        .iter()
        .zip(b.amps())
        .any(|(x, y)| (x - y).abs() > tol)
    {
        return false;
    }
    let modes = &a.info().modes;
    // translation by p subtracts 2 pi k.p from each phase
    let d = |i: usize| (a.phases()[i] - b.phases()[i]) / TAU;
    let p = if modes.len() == 1 {
        modes[0].k * (d(0) / modes[0].k.norm_sq())
    } else {
        let (k1, k2) = (modes[0].k, modes[1].k);
        let det = k1.x * k2.y - k1.y * k2.x;
        Vec2::new(
            (d(0) * k2.y - d(1) * k1.y) / det,
            (k1.x * d(1) - k2.x * d(0)) / det,
        )
    };
    (0..modes.len()).all(|i| {
        let moved = a.phases()[i] - TAU * modes[i].k.dot(p);
        a.amps()[i] <= tol || circular_distance(moved, b.phases()[i]) * a.amps()[i] <= 4.0 * tol
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn translation_is_group_action(which in 0..3usize, seed in any::<u64>()) {
        let i = info(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_state(&i, &mut rng);
        let p = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let q = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let two = translate_coeffs(&translate_coeffs(&c, p), q);
        let one = translate_coeffs(&c, p + q);
        for (a, b) in two.phases().iter().zip(one.phases()) {
            prop_assert!(circular_distance(*a, *b) <= 1e-12);
        }
        prop_assert_eq!(two.amps(), c.amps());
        let back = translate_coeffs(&translate_coeffs(&c, p), Vec2::ZERO - p);
        for (a, b) in back.phases().iter().zip(c.phases()) {
            prop_assert!(circular_distance(*a, *b) <= 1e-12);
        }
    }

    #[test]
    fn same_orbit_is_equivalence(which in 0..3usize, seed in any::<u64>()) {
        let i = info(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&i, &mut rng);
        let b = translate_coeffs(&a, i.basis.point(rng.gen(), rng.gen()));
        let c = translate_coeffs(&b, i.basis.point(rng.gen(), rng.gen()));
        let other = random_state(&i, &mut rng);
        let tol = 1e-8;
        prop_assert!(same_orbit(&a, &a, tol).unwrap());
        prop_assert!(same_orbit(&a, &b, tol).unwrap() && same_orbit(&b, &a, tol).unwrap());
        prop_assert!(same_orbit(&b, &c, tol).unwrap() && same_orbit(&a, &c, tol).unwrap());
        prop_assert_eq!(same_orbit(&a, &other, tol).unwrap(), same_orbit(&other, &a, tol).unwrap());
        if same_orbit(&a, &other, tol).unwrap() {
            prop_assert!(same_orbit(&c, &other, tol).unwrap());
        }
    }

    #[test]
    fn same_orbit_agrees_with_constructive_solve(which in 0..3usize, seed in any::<u64>(), kind in 0..4u8) {
        let i = info(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&i, &mut rng);
        let moved = translate_coeffs(&a, i.basis.point(rng.gen(), rng.gen()));
        let b = match kind {
            0 => moved,
            1 => {
                // nudge one phase: leaves the orbit in six dimensions only
                let mut ph = moved.phases().to_vec();
                ph[i.pairs() - 1] += rng.gen_range(0.01..1.0);
                EigenstateCoeffs::new(i.clone(), moved.amps().to_vec(), ph).unwrap()
            }
            2 => {
                let mut amps = moved.amps().to_vec();
                amps[0] += 1e-3;
                EigenstateCoeffs::new(i.clone(), amps, moved.phases().to_vec()).unwrap()
            }
            _ => random_state(&i, &mut rng),
        };
        let tol = 1e-8;
        let s = same_orbit(&a, &b, tol).unwrap();
        prop_assert_eq!(s, constructive_same_orbit(&a, &b, tol));
        prop_assert_eq!(s, solve_translation(&a, &b, tol).unwrap().is_some());
        if kind == 0 {
            prop_assert!(s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn l2_orbit_distance_is_attained_and_near_optimal(which in 0..3usize, seed in any::<u64>()) {
        let i = info(which);
        let g = Grid::new(i.basis, 32, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_state(&i, &mut rng);
        let p0 = i.basis.point(rng.gen(), rng.gen());
        let bump: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let modes = i.modes.clone();
        let f = RealField::from_fn(&g, |x| {
            let twice = 2.0 * TAU * modes[0].k.dot(x);
            evaluate(&c, x, p0) + bump[0] * twice.cos() + bump[1] * twice.sin() + bump[2] * (TAU * modes[0].k.dot(x) * 3.0).sin()
        });
        let d = orbit_distance(&f, &c, 2.0).unwrap();
        let dist_at = |p: Vec2| {
            let s: f64 = (0..g.n1())
                .flat_map(|a| (0..g.n2()).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let x = g.point(a, b);
                    (f.get(a, b) - evaluate(&c, x, p)).powi(2)
                })
                .sum();
            (s * g.cell_area()).sqrt()
        };
        // attained at the reported translation
        prop_assert!((dist_at(d.p_star) - d.dist).abs() <= 1e-9 * d.dist.max(1.0));
        // no worse than a brute-force scan
        let n = 40;
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in 0..n {
                best = best.min(dist_at(i.basis.point(a as f64 / n as f64, b as f64 / n as f64)));
            }
        }
        prop_assert!(d.dist <= best + 1e-9);
        // grid shifts do not change it
        let shifted = orbit_distance(&f.grid_shift(5, -3), &c, 2.0).unwrap();
        prop_assert!((shifted.dist - d.dist).abs() <= 1e-9);
    }
}
