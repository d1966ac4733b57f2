//! Lattice and dual-lattice arithmetic.
//!
//! A flat torus is described by a [`LatticeBasis`] `(xi, eta)`. The Fourier
//! modes of the torus are indexed by the dual lattice, whose shortest vectors
//! determine the first Laplacian eigenvalue `lambda1 = 4 pi^2 rho^2` and the
//! first eigenspace (dimension 2, 4 or 6).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative tolerance used to decide `|k| == rho`.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Relative determinant threshold below which a basis is rejected.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // adding zero folds -0 into 0
        write!(f, "({}, {})", self.x + 0.0, self.y + 0.0)
    }
}

/// Two linearly independent generators of the lattice `Lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeBasis {
    xi: Vec2,
    eta: Vec2,
}

impl LatticeBasis {
    pub fn new(xi: Vec2, eta: Vec2) -> Result<Self> {
        let det = xi.cross(eta);
        let scale = xi.norm_sq().max(eta.norm_sq());
        if !det.is_finite()
            || !scale.is_finite()
            || det.abs() < DEGENERACY_THRESHOLD * scale
            || scale == 0.0
        {
            return Err(Error::DegenerateBasis { det });
        }
        Ok(Self { xi, eta })
    }

    /// Named presets: `square`, `hexagonal` and `rectangular:<h>`.
    pub fn preset(name: &str) -> Result<Self> {
        let two_pi = 2.0 * PI;
        let name = name.trim();
        match name {
            "square" => Self::new(Vec2::new(two_pi, 0.0), Vec2::new(0.0, two_pi)),
            "hexagonal" => Self::new(
                Vec2::new(two_pi, 0.0),
                Vec2::new(two_pi * 0.5, two_pi * 3f64.sqrt() / 2.0),
            ),
            _ => {
                let h = name
                    .strip_prefix("rectangular:")
                    .ok_or_else(|| Error::Parse(format!("unknown lattice preset '{name}'")))?;
                let h: f64 = h
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rectangular height '{h}'")))?;
                if !(h > 0.0) || !h.is_finite() {
                    return Err(Error::Parse(format!(
                        "rectangular height must be positive, got {h}"
                    )));
                }
                Self::new(Vec2::new(two_pi, 0.0), Vec2::new(0.0, h))
            }
        }
    }

    pub fn xi(&self) -> Vec2 {
        self.xi
    }

    pub fn eta(&self) -> Vec2 {
        self.eta
    }

    pub fn det(&self) -> f64 {
        self.xi.cross(self.eta)
    }

    /// Area of the fundamental cell.
    pub fn area(&self) -> f64 {
        self.det().abs()
    }

    /// `s * xi + t * eta`.
    pub fn point(&self, s: f64, t: f64) -> Vec2 {
        s * self.xi + t * self.eta
    }

    /// Coordinates `(s, t)` with `p = s xi + t eta`.
    pub fn lattice_coords(&self, p: Vec2) -> (f64, f64) {
        let dual = self.dual();
        (p.dot(dual.xi_star), p.dot(dual.eta_star))
    }

    /// Representative of `p` modulo the lattice inside the cell `[0,1)^2`.
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        let (s, t) = self.lattice_coords(p);
        self.point(s.rem_euclid(1.0), t.rem_euclid(1.0))
    }

    /// Distance between `p` and `q` measured modulo the lattice, in lattice
    /// coordinates (max over the two circular coordinate differences).
    pub fn cell_distance(&self, p: Vec2, q: Vec2) -> f64 {
        let (s, t) = self.lattice_coords(p - q);
        let circ = |u: f64| {
            let r = u.rem_euclid(1.0);
            r.min(1.0 - r)
        };
        circ(s).max(circ(t))
    }

    pub fn dual(&self) -> DualBasis {
        let det = self.det();
        DualBasis {
            xi_star: Vec2::new(self.eta.y, -self.eta.x) * (1.0 / det),
            eta_star: Vec2::new(-self.xi.y, self.xi.x) * (1.0 / det),
        }
    }

    pub fn gram(&self) -> [[f64; 2]; 2] {
        gram(self.xi, self.eta)
    }

    pub fn gram_dual(&self) -> [[f64; 2]; 2] {
        let d = self.dual();
        gram(d.xi_star, d.eta_star)
    }
}

impl fmt::Display for LatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi = {}, eta = {}", self.xi, self.eta)
    }
}

fn gram(a: Vec2, b: Vec2) -> [[f64; 2]; 2] {
    let ab = a.dot(b);
    [[a.norm_sq(), ab], [ab, b.norm_sq()]]
}

/// Biorthogonal basis `(xi*, eta*)` of the dual lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualBasis {
    pub xi_star: Vec2,
    pub eta_star: Vec2,
}

impl DualBasis {
    pub fn vector(&self, m: i64, n: i64) -> Vec2 {
        (m as f64) * self.xi_star + (n as f64) * self.eta_star
    }

    /// The dual basis viewed as a lattice basis (its own dual is the original).
    pub fn as_lattice(&self) -> Result<LatticeBasis> {
        LatticeBasis::new(self.xi_star, self.eta_star)
    }
}

pub fn dual_basis(basis: &LatticeBasis) -> DualBasis {
    basis.dual()
}

pub fn gram_dual(basis: &LatticeBasis) -> [[f64; 2]; 2] {
    basis.gram_dual()
}

/// Dual lattice vector `k = m xi* + n eta*` together with its integer index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualVector {
    pub m: i64,
    pub n: i64,
    pub k: Vec2,
}

impl DualVector {
    pub fn new(dual: &DualBasis, m: i64, n: i64) -> Self {
        Self {
            m,
            n,
            k: dual.vector(m, n),
        }
    }

    pub fn negate(self) -> Self {
        Self {
            m: -self.m,
            n: -self.n,
            k: -self.k,
        }
    }

    pub fn same_index(&self, other: &DualVector) -> bool {
        self.m == other.m && self.n == other.n
    }

    /// True if this vector has the canonical sign of its `+-` pair.
    fn is_canonical(&self, tol: f64) -> bool {
        self.k.x > tol || (self.k.x.abs() <= tol && self.k.y > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortestVectorSet {
    pub rho: f64,
    /// All shortest vectors, sorted by polar angle in `[0, 2 pi)`.
    pub vectors: Vec<DualVector>,
    /// One vector per `+-` pair with canonical sign, sorted by angle in
    /// `(-pi/2, pi/2]`.
    pub representatives: Vec<DualVector>,
}

/// Lagrange-Gauss reduction of the dual basis. Returns integer coordinates of
/// the reduced vectors with respect to `(xi*, eta*)`.
fn gauss_reduce(dual: &DualBasis) -> Result<([i64; 2], [i64; 2])> {
    let mut c1 = [1i64, 0];
    let mut c2 = [0i64, 1];
    let vec = |c: [i64; 2]| dual.vector(c[0], c[1]);
    for _ in 0..10_000 {
        if vec(c1).norm_sq() > vec(c2).norm_sq() {
            std::mem::swap(&mut c1, &mut c2);
        }
        let b1 = vec(c1);
        let b2 = vec(c2);
        let ratio = b1.dot(b2) / b1.norm_sq();
        // |ratio| = 1/2 is already reduced; rounding it would cycle
        if ratio.abs() <= 0.5 + 1e-12 {
            return Ok((c1, c2));
        }
        let mu = ratio.round() as i64;
        c2 = [c2[0] - mu * c1[0], c2[1] - mu * c1[1]];
    }
    Err(Error::InternalInvariant(
        "Gauss reduction did not terminate".into(),
    ))
}

/// All shortest nonzero vectors of the dual lattice.
///
/// The dual basis is Gauss-reduced and then all combinations with
/// coefficients in `[-2, 2]^2` of the reduced basis are scanned; shortest
/// vectors of a reduced 2D basis are always among `+-b1, +-b2, +-(b1 +- b2)`.
pub fn shortest_vectors(basis: &LatticeBasis) -> Result<ShortestVectorSet> {
    let dual = basis.dual();
    let (c1, c2) = gauss_reduce(&dual)?;

    let mut candidates = Vec::with_capacity(24);
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            if a == 0 && b == 0 {
                continue;
            }
            let m = a * c1[0] + b * c2[0];
            let n = a * c1[1] + b * c2[1];
            candidates.push(DualVector::new(&dual, m, n));
        }
    }
    let rho = candidates
        .iter()
        .map(|v| v.k.norm())
        .fold(f64::INFINITY, f64::min);
    let mut vectors: Vec<DualVector> = candidates
        .into_iter()
        .filter(|v| v.k.norm() <= rho * (1.0 + TIE_TOLERANCE))
        .collect();
    vectors.sort_by(|a, b| {
        let ang = |v: &DualVector| v.k.angle().rem_euclid(2.0 * PI);
        ang(a).total_cmp(&ang(b))
    });

    let sign_tol = TIE_TOLERANCE * rho;
    let mut representatives: Vec<DualVector> = vectors
        .iter()
        .copied()
        .filter(|v| v.is_canonical(sign_tol))
        .collect();
    representatives.sort_by(|a, b| a.k.angle().total_cmp(&b.k.angle()));

    if !matches!(vectors.len(), 2 | 4 | 6) || representatives.len() * 2 != vectors.len() {
        return Err(Error::InternalInvariant(format!(
            "shortest vector set has {} members ({} representatives)",
            vectors.len(),
            representatives.len()
        )));
    }
    Ok(ShortestVectorSet {
        rho,
        vectors,
        representatives,
    })
}

/// First eigenvalue and an ordered choice of eigenspace wave vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenspaceInfo {
    pub basis: LatticeBasis,
    pub rho: f64,
    pub lambda1: f64,
    /// `k1[, k2[, k3]]`; in the six-dimensional case `k3 = k1 + k2`.
    pub modes: Vec<DualVector>,
}

impl EigenspaceInfo {
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn pairs(&self) -> usize {
        self.modes.len()
    }
}

pub fn classify_eigenspace(basis: &LatticeBasis) -> Result<EigenspaceInfo> {
    let svs = shortest_vectors(basis)?;
    let reps = &svs.representatives;
    let modes = match reps.len() {
        1 | 2 => reps.clone(),
        3 => hexagonal_ordering(reps)?,
        n => {
            return Err(Error::InternalInvariant(format!(
                "{n} shortest-vector representatives"
            )))
        }
    };
    Ok(EigenspaceInfo {
        basis: *basis,
        rho: svs.rho,
        lambda1: 4.0 * PI * PI * svs.rho * svs.rho,
        modes,
    })
}

fn hexagonal_ordering(reps: &[DualVector]) -> Result<Vec<DualVector>> {
    let find = |m: i64, n: i64| {
        reps.iter()
            .find(|r| (r.m == m && r.n == n) || (r.m == -m && r.n == -n))
            .copied()
    };
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (a, b) = (reps[i], reps[j]);
            if let Some(r) = find(a.m + b.m, a.n + b.n) {
                if r.m == a.m + b.m && r.n == a.n + b.n {
                    return Ok(vec![a, b, r]);
                }
            }
        }
    }
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let (a, b) = (reps[i], reps[j]);
            if let Some(r) = find(a.m - b.m, a.n - b.n) {
                let sum = if r.m == a.m - b.m && r.n == a.n - b.n {
                    r
                } else {
                    r.negate()
                };
                return Ok(vec![a, b.negate(), sum]);
            }
        }
    }
    Err(Error::InternalInvariant(
        "no ordering of the six shortest vectors satisfies k3 = k1 + k2".into(),
    ))
}
