//! Derivative-free Nelder-Mead minimization (standard coefficients).

#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once every vertex lies within this distance of the best one.
    pub simplex_tolerance: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            simplex_tolerance: 1e-10,
            initial_step: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), f(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = f(&x);
            simplex.push((x, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| dist(x, &simplex[0].0))
                .fold(0.0, f64::max);
            if size < self.simplex_tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = f(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&best) {
                    *xi = bi + 0.5 * (*xi - bi);
                }
                *v = f(x);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            converged,
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead {
            max_iterations: 500,
            ..Default::default()
        };
        let m = nm.minimize(
            |x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.1).powi(2),
            &[0.0, 0.0],
        );
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-8 && (m.x[1] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_iterations: 2000,
            simplex_tolerance: 1e-12,
            initial_step: 0.1,
        };
        let m = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(
            (m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            m
        );
    }

    #[test]
    fn respects_iteration_cap() {
        let nm = NelderMead {
            max_iterations: 3,
            ..Default::default()
        };
        let m = nm.minimize(|x| x[0].abs() + x[1].abs(), &[5.0, 5.0]);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
