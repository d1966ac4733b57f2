//! Moment system and census of translational orbits inside an equimeasurable
//! class of the first eigenspace.
//!
//! Equimeasurable states share every moment `int w^m`. On the phase torus
//! `(y1, y2) in [0, 2 pi)^2` the moments reduce to fixed polynomials
//! ("brackets") in the amplitudes and, in six dimensions, the phase
//! combination `theta = alpha1 + alpha2 - alpha3`:
//!
//! ```text
//! m = 2:  b1 = A1^2 + A2^2 + A3^2
//! m = 3:  b2 = A1 A2 A3 cos(theta)
//! m = 4:  b3 = sum A^4 + 4 sum A_i^2 A_j^2
//! m = 6:  b4 = sum A^6 + 9 sum A_i^4 A_j^2 + 27 A1^2 A2^2 A3^2
//!              + 18 A1^2 A2^2 A3^2 cos^2(theta)
//! ```
//!
//! With `(x, y, z) = (A1^2, A2^2, A3^2)` the system becomes symmetric in the
//! squared amplitudes and reduces to a single cubic in `x`; each root gives at
//! most two `(y, z)` pairs, and each triple at most two orbits.

use std::f64::consts::TAU;

use crate::eigenstate::{same_orbit, EigenstateCoeffs};
use crate::error::{Error, Result};

/// Relative clamp for squared amplitudes that come out slightly negative.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Max-norm distance below which two candidate triples are merged.
pub const TRIPLE_DEDUP: f64 = 1e-7;

/// Relative tolerance of the forward check on candidate triples.
pub const FORWARD_TOLERANCE: f64 = 1e-7;

/// Spacing below which cubic roots are merged.
pub const ROOT_DEDUP: f64 = 1e-8;

/// Tolerance used to recognize the reference among census representatives.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-6;

/// Moment brackets of a six-dimensional state and the derived right-hand
/// sides of the symmetric system in squared amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentData {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub b2: f64,
}

impl MomentData {
    pub fn from_brackets(b1: f64, b2: f64, b3: f64, b4: f64) -> Self {
        Self {
            c1: b1,
            c2: b3,
            c3: b4 - 18.0 * b2 * b2,
            b2,
        }
    }

    pub fn from_state(c: &EigenstateCoeffs) -> Result<Self> {
        if c.dim() != 6 {
            return Err(Error::UnsupportedMoment {
                order: 6,
                dim: c.dim(),
            });
        }
        Ok(Self::from_brackets(
            moment_bracket(c, 2)?,
            moment_bracket(c, 3)?,
            moment_bracket(c, 4)?,
            moment_bracket(c, 6)?,
        ))
    }
}

fn theta(c: &EigenstateCoeffs) -> f64 {
    let p = c.phases();
    p[0] + p[1] - p[2]
}

/// The polynomial bracket of the `m`-th moment.
///
/// Six dimensions support `m in {2, 3, 4, 6}`; two and four dimensions
/// support `m in {2, 4}` (there the phases drop out).
pub fn moment_bracket(c: &EigenstateCoeffs, m: u32) -> Result<f64> {
    let a = c.amps();
    let sq: Vec<f64> = a.iter().map(|v| v * v).collect();
    let sum_pow = |k: i32| sq.iter().map(|s| s.powi(k)).sum::<f64>();
    let pair_sum = || {
        let mut s = 0.0;
        for i in 0..sq.len() {
            for j in (i + 1)..sq.len() {
                s += sq[i] * sq[j];
            }
        }
        s
    };
    match (c.dim(), m) {
        (_, 2) => Ok(sum_pow(1)),
        (_, 4) => Ok(sum_pow(2) + 4.0 * pair_sum()),
        (6, 3) => Ok(a[0] * a[1] * a[2] * theta(c).cos()),
        (6, 6) => {
            let (x, y, z) = (sq[0], sq[1], sq[2]);
            let mixed = x * x * (y + z) + y * y * (x + z) + z * z * (x + y);
            let xyz = x * y * z;
            let ct = theta(c).cos();
            Ok(sum_pow(3) + 9.0 * mixed + 27.0 * xyz + 18.0 * xyz * ct * ct)
        }
        (dim, order) => Err(Error::UnsupportedMoment { order, dim }),
    }
}

/// Mean of `w^m` over the phase torus, where `w` is the state written in
/// phase variables: `A1 cos(y1 + a1) [+ A2 cos(y2 + a2) [+ A3 cos(y1 + y2 + a3)]]`.
///
/// Uses an `N x N` uniform rule with `N >= 4m`, which is exact for the
/// trigonometric polynomial `w^m`.
pub fn moments_quadrature_oracle(c: &EigenstateCoeffs, m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let n = (4 * m as usize).max(8);
    let a = c.amps();
    let ph = c.phases();
    let h = TAU / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let y1 = h * i as f64;
        for j in 0..n {
            let y2 = h * j as f64;
            let w = match a.len() {
                1 => a[0] * (y1 + ph[0]).cos(),
                2 => a[0] * (y1 + ph[0]).cos() + a[1] * (y2 + ph[1]).cos(),
                _ => {
                    a[0] * (y1 + ph[0]).cos()
                        + a[1] * (y2 + ph[1]).cos()
                        + a[2] * (y1 + y2 + ph[2]).cos()
                }
            };
            total += w.powi(m as i32);
        }
    }
    total / (n * n) as f64
}

/// Left-hand sides `(c1, c2, c3)` of the symmetric system at `(x, y, z)`.
pub fn forward_moments(x: f64, y: f64, z: f64) -> [f64; 3] {
    let c1 = x + y + z;
    let c2 = x * x + y * y + z * z + 4.0 * (x * y + x * z + y * z);
    let c3 = x.powi(3)
        + y.powi(3)
        + z.powi(3)
        + 9.0 * (x * x * y + x * x * z + x * y * y + y * y * z + x * z * z + y * z * z)
        + 27.0 * x * y * z;
    [c1, c2, c3]
}

/// Coefficients `[a, b, c, d]` of `a x^3 + b x^2 + c x + d` whose roots are
/// the possible first components `x` of solutions.
pub fn reduce_to_cubic(c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    [
        3.0,
        -3.0 * c1,
        1.5 * (c2 - c1 * c1),
        3.0 * c1 * c2 - 2.0 * c1.powi(3) - c3,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicRoot {
    pub value: f64,
    pub multiplicity: u8,
}

/// All real roots of `a x^3 + b x^2 + c x + d`.
///
/// Roots are isolated between the critical points of the cubic and polished
/// by safeguarded Newton iteration. A critical point whose value vanishes to
/// rounding accuracy is reported as a repeated root.
pub fn solve_cubic(coeffs: [f64; 4]) -> Result<Vec<CubicRoot>> {
    let [a, b, c, d] = coeffs;
    let scale = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if a == 0.0 || a.abs() <= 1e-14 * scale || !scale.is_finite() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let (b, c, d) = (b / a, c / a, d / a);
    let f = |x: f64| ((x + b) * x + c) * x + d;
    let fp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let rounding = |x: f64| {
        let ax = x.abs();
        1e-12 * (ax * ax * ax + b.abs() * ax * ax + c.abs() * ax + d.abs()).max(f64::MIN_POSITIVE)
    };
    let bound = 1.0 + b.abs().max(c.abs()).max(d.abs());
    let root_in = |lo: f64, hi: f64| bracketed_root(&f, &fp, lo, hi);

    let mut roots: Vec<CubicRoot> = Vec::with_capacity(3);
    let simple = |v: f64| CubicRoot {
        value: v,
        multiplicity: 1,
    };
    let disc = b * b - 3.0 * c;
    if disc <= 0.0 {
        let r0 = -b / 3.0;
        if f(r0).abs() <= rounding(r0) {
            roots.push(CubicRoot {
                value: r0,
                multiplicity: 3,
            });
        } else {
            roots.push(simple(root_in(-bound, bound)));
        }
    } else {
        let s = disc.sqrt();
        let r1 = (-b - s) / 3.0;
        let r2 = (-b + s) / 3.0;
        let (f1, f2) = (f(r1), f(r2));
        let (z1, z2) = (f1.abs() <= rounding(r1), f2.abs() <= rounding(r2));
        match (z1, z2) {
            (true, true) => roots.push(CubicRoot {
                value: 0.5 * (r1 + r2),
                multiplicity: 3,
            }),
            (true, false) => {
                roots.push(CubicRoot {
                    value: r1,
                    multiplicity: 2,
                });
                roots.push(simple(root_in(r2, bound)));
            }
            (false, true) => {
                roots.push(simple(root_in(-bound, r1)));
                roots.push(CubicRoot {
                    value: r2,
                    multiplicity: 2,
                });
            }
            (false, false) => {
                if f1 > 0.0 && f2 < 0.0 {
                    roots.push(simple(root_in(-bound, r1)));
                    roots.push(simple(root_in(r1, r2)));
                    roots.push(simple(root_in(r2, bound)));
                } else if f2 > 0.0 {
                    roots.push(simple(root_in(-bound, r1)));
                } else {
                    roots.push(simple(root_in(r2, bound)));
                }
            }
        }
    }

    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    let mut merged: Vec<CubicRoot> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.value - last.value).abs() <= ROOT_DEDUP => {
                last.multiplicity = (last.multiplicity + r.multiplicity).min(3);
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Root of `f` in `[lo, hi]` given a sign change, by Newton steps that fall
/// back to bisection whenever they leave the bracket.
fn bracketed_root(f: &impl Fn(f64) -> f64, fp: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let increasing = fhi > flo;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let d = fp(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= f64::EPSILON * x.abs()
        {
            return next;
        }
        x = next;
    }
    x
}

fn clamp_nonnegative(v: f64, scale: f64) -> Option<f64> {
    if v >= 0.0 {
        Some(v)
    } else if v >= -CLAMP_TOLERANCE * scale {
        Some(0.0)
    } else {
        None
    }
}

/// Pairs `(y, z)` completing a root `x`: `y + z = c1 - x` and
/// `yz = x^2 - c1 x + (c2 - c1^2)/2`. Both orderings are returned when
/// `y != z`.
pub fn back_substitute(x: f64, c1: f64, c2: f64) -> Vec<(f64, f64)> {
    let scale = c1.abs().max(1.0);
    let s = c1 - x;
    let q = x * x - c1 * x + 0.5 * (c2 - c1 * c1);
    let mut disc = s * s - 4.0 * q;
    let disc_scale = s * s + 4.0 * q.abs();
    if disc < 0.0 {
        if disc < -CLAMP_TOLERANCE * disc_scale {
            return Vec::new();
        }
        disc = 0.0;
    }
    let r = disc.sqrt();
    let (y, z) = if s >= 0.0 {
        let big = 0.5 * (s + r);
        (if big != 0.0 { q / big } else { 0.0 }, big)
    } else {
        let small = 0.5 * (s - r);
        (small, if small != 0.0 { q / small } else { 0.0 })
    };
    let (Some(y), Some(z)) = (clamp_nonnegative(y, scale), clamp_nonnegative(z, scale)) else {
        return Vec::new();
    };
    let check = |y: f64, z: f64| {
        let f = forward_moments(x, y, z);
        (f[0] - c1).abs() <= FORWARD_TOLERANCE * c1.abs().max(f64::MIN_POSITIVE)
            && (f[1] - c2).abs() <= FORWARD_TOLERANCE * c2.abs().max(f64::MIN_POSITIVE)
    };
    if !check(y, z) {
        return Vec::new();
    }
    if (y - z).abs() > TRIPLE_DEDUP * scale {
        vec![(y, z), (z, y)]
    } else {
        vec![(y, z)]
    }
}

/// Candidate squared-amplitude triple `(A1^2, A2^2, A3^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CandidateTriple {
    pub fn max_dist(&self, other: &CandidateTriple) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        [self.x.sqrt(), self.y.sqrt(), self.z.sqrt()]
    }
}

/// Every nonnegative solution of the symmetric system (at most six).
pub fn enumerate_candidates(md: &MomentData) -> Vec<CandidateTriple> {
    let scale = md.c1.abs().max(1.0);
    let Ok(roots) = solve_cubic(reduce_to_cubic(md.c1, md.c2, md.c3)) else {
        return Vec::new();
    };
    let target = [md.c1, md.c2, md.c3];
    let mut out: Vec<CandidateTriple> = Vec::new();
    for root in roots {
        let Some(x) = clamp_nonnegative(root.value, scale) else {
            continue;
        };
        for (y, z) in back_substitute(x, md.c1, md.c2) {
            let f = forward_moments(x, y, z);
            let ok = f.iter().zip(&target).enumerate().all(|(i, (v, t))| {
                let s = t.abs().max(scale.powi(i as i32 + 1) * 1e-12);
                (v - t).abs() <= FORWARD_TOLERANCE * s
            });
            let cand = CandidateTriple { x, y, z };
            if ok && out.iter().all(|o| o.max_dist(&cand) > TRIPLE_DEDUP * scale) {
                out.push(cand);
            }
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    out
}

/// Candidate translational orbits sharing the moments of a reference state.
#[derive(Clone, Debug)]
pub struct OrbitCensus {
    pub dim: usize,
    pub representatives: Vec<EigenstateCoeffs>,
    /// Whether each representative lies on the reference orbit.
    pub matches_reference: Vec<bool>,
    /// Sup-norm cross-check (`||w||_inf = A1 + A2` in two and four
    /// dimensions); absent in six dimensions.
    pub sup_norm_consistent: Option<bool>,
    pub count: usize,
}

pub fn max_orbits(dim: usize) -> usize {
    match dim {
        2 => 1,
        4 => 2,
        _ => 12,
    }
}

pub fn orbit_census(reference: &EigenstateCoeffs) -> Result<OrbitCensus> {
    let info = reference.info().clone();
    let amp_scale = reference.amps().iter().fold(1.0f64, |m, a| m.max(*a));
    let dedup_tol = 1e-8 * amp_scale;
    let mut candidates: Vec<EigenstateCoeffs> = Vec::new();

    match reference.dim() {
        2 => {
            candidates.push(EigenstateCoeffs::new(
                info.clone(),
                reference.amps().to_vec(),
                vec![0.0],
            )?);
        }
        4 => {
            let c1 = moment_bracket(reference, 2)?;
            let b3 = moment_bracket(reference, 4)?;
            let prod = 0.5 * (b3 - c1 * c1);
            let mut disc = c1 * c1 - 4.0 * prod;
            if disc < 0.0 {
                if disc < -CLAMP_TOLERANCE * c1 * c1 {
                    return Err(Error::InconsistentMoments(format!(
                        "negative discriminant {disc:e}"
                    )));
                }
                disc = 0.0;
            }
            let r = disc.sqrt();
            let big = 0.5 * (c1 + r);
            let small = if big > 0.0 { prod / big } else { 0.0 };
            let scale = c1.max(1.0);
            let (big, small) = match (
                clamp_nonnegative(big, scale),
                clamp_nonnegative(small, scale),
            ) {
                (Some(b), Some(s)) => (b, s),
                _ => {
                    return Err(Error::InconsistentMoments(
                        "negative squared amplitude".into(),
                    ))
                }
            };
            for (x, y) in [(big, small), (small, big)] {
                candidates.push(EigenstateCoeffs::new(
                    info.clone(),
                    vec![x.sqrt(), y.sqrt()],
                    vec![0.0, 0.0],
                )?);
            }
        }
        6 => {
            let md = MomentData::from_state(reference)?;
            let triples = enumerate_candidates(&md);
            let a = reference.amps();
            let own = CandidateTriple {
                x: a[0] * a[0],
                y: a[1] * a[1],
                z: a[2] * a[2],
            };
            let scale = md.c1.abs().max(1.0);
            if !triples
                .iter()
                .any(|t| t.max_dist(&own) <= MEMBERSHIP_TOLERANCE * scale)
            {
                return Err(Error::InconsistentMoments(format!(
                    "reference triple {own:?} not among {} candidates",
                    triples.len()
                )));
            }
            for t in &triples {
                let amps = t.amplitudes();
                let prod = amps[0] * amps[1] * amps[2];
                if prod > dedup_tol * amp_scale * amp_scale {
                    let cos = md.b2 / prod;
                    if cos.abs() > 1.0 + 1e-6 {
                        // the cubic moment cannot be matched by any phase
                        continue;
                    }
                    let alpha = cos.clamp(-1.0, 1.0).acos();
                    for phase in [alpha, -alpha] {
                        candidates.push(EigenstateCoeffs::new(
                            info.clone(),
                            amps.to_vec(),
                            vec![0.0, 0.0, phase],
                        )?);
                    }
                } else {
                    if md.b2.abs() > 1e-6 * amp_scale.powi(3) {
                        continue;
                    }
                    candidates.push(EigenstateCoeffs::new(
                        info.clone(),
                        amps.to_vec(),
                        vec![0.0; 3],
                    )?);
                }
            }
        }
        d => {
            return Err(Error::InternalInvariant(format!(
                "eigenspace dimension {d}"
            )))
        }
    }

    let mut representatives: Vec<EigenstateCoeffs> = Vec::new();
    for cand in candidates {
        let mut fresh = true;
        for r in &representatives {
            if same_orbit(r, &cand, dedup_tol)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            representatives.push(cand);
        }
    }
    let member_tol = MEMBERSHIP_TOLERANCE * amp_scale;
    let matches_reference = representatives
        .iter()
        .map(|r| same_orbit(reference, r, member_tol))
        .collect::<Result<Vec<_>>>()?;
    if !matches_reference.iter().any(|&m| m) {
        return Err(Error::InconsistentMoments(
            "reference orbit missing from census".into(),
        ));
    }
    let count = representatives.len();
    if count > max_orbits(reference.dim()) {
        return Err(Error::InternalInvariant(format!(
            "{count} orbits exceed the bound for dimension {}",
            reference.dim()
        )));
    }
    let sup_norm_consistent = (reference.dim() <= 4).then(|| {
        let target: f64 = reference.amps().iter().sum();
        representatives
            .iter()
            .all(|r| (r.amps().iter().sum::<f64>() - target).abs() <= member_tol)
    });
    Ok(OrbitCensus {
        dim: reference.dim(),
        representatives,
        matches_reference,
        sup_norm_consistent,
        count,
    })
}
