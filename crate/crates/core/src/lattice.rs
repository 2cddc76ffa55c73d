//! Finite-index subgroups of the first homology of a boundary torus.
//!
//! A torus boundary component carries a fixed basis, so its homology is
//! identified with `Z^2`. Subgroups are stored in column Hermite normal
//! form, which makes structural equality coincide with subgroup equality.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("generators span a subgroup of rank less than two")]
    RankDeficient,
    #[error("slopes are parallel")]
    ParallelSlopes,
    #[error("the zero vector has no slope")]
    ZeroVector,
    #[error("({0}, {1}) is not primitive")]
    NotPrimitive(i64, i64),
    #[error("matrix {0:?} does not have determinant +1 or -1")]
    NotUnimodular([[i64; 2]; 2]),
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("hermite normal form entries ({0}, {1}, {2}) are not reduced")]
    NotReduced(BigInt, BigInt, BigInt),
    #[error("coordinate does not fit in 64 bits")]
    Overflow,
}

/// An integer vector in a torus basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector {
    pub x: BigInt,
    pub y: BigInt,
}

impl Vector {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        Vector { x: x.into(), y: y.into() }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn det(&self, other: &Vector) -> BigInt {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn scale(&self, k: &BigInt) -> Vector {
        Vector { x: &self.x * k, y: &self.y * k }
    }

    pub fn neg(&self) -> Vector {
        Vector { x: -&self.x, y: -&self.y }
    }

    /// Greatest common divisor of the coordinates.
    pub fn content(&self) -> BigInt {
        self.x.gcd(&self.y)
    }

    pub fn to_i64_pair(&self) -> Result<(i64, i64), LatticeError> {
        match (self.x.to_i64(), self.y.to_i64()) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(LatticeError::Overflow),
        }
    }
}

impl From<(i64, i64)> for Vector {
    fn from((x, y): (i64, i64)) -> Self {
        Vector::new(x, y)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A primitive vector up to sign, normalized so that `p > 0`, or `p = 0` and `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    /// Builds a slope from a primitive vector. Either sign is accepted.
    pub fn new(p: i64, q: i64) -> Result<Slope, LatticeError> {
        if p == 0 && q == 0 {
            return Err(LatticeError::ZeroVector);
        }
        if p.gcd(&q) != 1 {
            return Err(LatticeError::NotPrimitive(p, q));
        }
        Ok(Self::normalized(p, q))
    }

    /// The slope of a nonzero vector, discarding its content.
    pub fn of_vector(v: &Vector) -> Result<Slope, LatticeError> {
        if v.is_zero() {
            return Err(LatticeError::ZeroVector);
        }
        let g = v.content();
        let (p, q) = Vector { x: &v.x / &g, y: &v.y / &g }.to_i64_pair()?;
        Ok(Self::normalized(p, q))
    }

    fn normalized(p: i64, q: i64) -> Slope {
        if p < 0 || (p == 0 && q < 0) {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn vector(&self) -> Vector {
        Vector::new(self.p, self.q)
    }

    /// Algebraic intersection number up to sign.
    pub fn intersection(&self, other: &Slope) -> u128 {
        let d = self.p as i128 * other.q as i128 - self.q as i128 * other.p as i128;
        d.unsigned_abs()
    }

    pub fn is_parallel(&self, other: &Slope) -> bool {
        self == other
    }

    /// The slope `t` with `|det(self, t)| = 1` minimizing `|p| + |q|`, ties
    /// broken by `(p, q)`.
    pub fn complement(&self) -> Slope {
        let (p, q) = (self.p as i128, self.q as i128);
        let e = p.extended_gcd(&q);
        debug_assert_eq!(e.gcd, 1);
        let t0 = (-e.y, e.x);
        let mut ks = Vec::new();
        for (t, s) in [(t0.0, p), (t0.1, q)] {
            if s != 0 {
                ks.push(Integer::div_floor(&-t, &s));
                ks.push(Integer::div_ceil(&-t, &s));
            }
        }
        ks.into_iter()
            .map(|k| {
                let (a, b) = (t0.0 + k * p, t0.1 + k * q);
                let s = Slope::normalized(a as i64, b as i64);
                (a.abs() + b.abs(), s)
            })
            .min()
            .map(|(_, s)| s)
            .expect("a nonzero slope has a complement")
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// `k` times a slope, with `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScaledSlope {
    pub k: BigInt,
    pub slope: Slope,
}

impl ScaledSlope {
    pub fn new(k: impl Into<BigInt>, slope: Slope) -> Result<ScaledSlope, LatticeError> {
        let k = k.into();
        if !k.is_positive() {
            return Err(LatticeError::NonPositiveScale);
        }
        Ok(ScaledSlope { k, slope })
    }

    pub fn unit(slope: Slope) -> ScaledSlope {
        ScaledSlope { k: BigInt::one(), slope }
    }

    pub fn of_vector(v: &Vector) -> Result<ScaledSlope, LatticeError> {
        let slope = Slope::of_vector(v)?;
        Ok(ScaledSlope { k: v.content(), slope })
    }

    pub fn vector(&self) -> Vector {
        self.slope.vector().scale(&self.k)
    }

    pub fn times(&self, m: &BigInt) -> ScaledSlope {
        ScaledSlope { k: &self.k * m, slope: self.slope }
    }
}

/// A change of torus basis, `det = ±1`. Maps end-a coordinates to end-b coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gluing {
    m: [[i64; 2]; 2],
}

impl Gluing {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Gluing, LatticeError> {
        let det = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
        if det.abs() != 1 {
            return Err(LatticeError::NotUnimodular(m));
        }
        Ok(Gluing { m })
    }

    pub fn identity() -> Gluing {
        Gluing { m: [[1, 0], [0, 1]] }
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Gluing {
        let d = self.det();
        let m = self.m;
        Gluing { m: [[d * m[1][1], -d * m[0][1]], [-d * m[1][0], d * m[0][0]]] }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let m = self.m;
        Vector {
            x: &v.x * m[0][0] + &v.y * m[0][1],
            y: &v.x * m[1][0] + &v.y * m[1][1],
        }
    }

    pub fn apply_slope(&self, s: &Slope) -> Result<Slope, LatticeError> {
        Slope::of_vector(&self.apply(&s.vector()))
    }
}

/// A finite-index subgroup of `Z^2` with columns `(a, 0)` and `(b, d)`,
/// `a, d > 0` and `0 <= b < a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    a: BigInt,
    b: BigInt,
    d: BigInt,
}

impl Lattice {
    pub fn full() -> Lattice {
        Lattice { a: BigInt::one(), b: BigInt::zero(), d: BigInt::one() }
    }

    /// Rebuilds a lattice from stored normal-form entries, rejecting unreduced ones.
    pub fn from_hnf(a: BigInt, b: BigInt, d: BigInt) -> Result<Lattice, LatticeError> {
        if !a.is_positive() || !d.is_positive() || b.is_negative() || b >= a {
            return Err(LatticeError::NotReduced(a, b, d));
        }
        Ok(Lattice { a, b, d })
    }

    /// Row-major matrix whose columns generate the lattice.
    pub fn matrix(&self) -> [[BigInt; 2]; 2] {
        [[self.a.clone(), self.b.clone()], [BigInt::zero(), self.d.clone()]]
    }

    pub fn entries(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.d)
    }

    pub fn generators(&self) -> [Vector; 2] {
        [
            Vector { x: self.a.clone(), y: BigInt::zero() },
            Vector { x: self.b.clone(), y: self.d.clone() },
        ]
    }

    pub fn index(&self) -> BigInt {
        &self.a * &self.d
    }

    pub fn contains(&self, v: &Vector) -> bool {
        if !v.y.is_multiple_of(&self.d) {
            return false;
        }
        let j = &v.y / &self.d;
        (&v.x - j * &self.b).is_multiple_of(&self.a)
    }

    /// Least `m > 0` with `m * s` in the lattice.
    pub fn slope_order(&self, s: &Slope) -> BigInt {
        let (sx, sy) = (BigInt::from(s.p()), BigInt::from(s.q()));
        let m1 = &self.d / self.d.gcd(&sy);
        let r = &m1 * &sx - (&m1 * &sy / &self.d) * &self.b;
        m1 * (&self.a / self.a.gcd(&r))
    }

    /// Whether `v` lies in the lattice and is not a proper multiple of another element.
    pub fn is_primitive_element(&self, v: &Vector) -> bool {
        match ScaledSlope::of_vector(v) {
            Ok(ss) => self.slope_order(&ss.slope) == ss.k,
            Err(_) => false,
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[({},0)] + Z[({},{})]", self.a, self.b, self.d)
    }
}

/// Hermite normal form of the subgroup generated by `gens`.
pub fn hnf(gens: &[Vector]) -> Result<Lattice, LatticeError> {
    let mut axis = BigInt::zero();
    let mut pivot: Option<Vector> = None;
    for v in gens {
        if v.y.is_zero() {
            axis = axis.gcd(&v.x);
            continue;
        }
        let v = if v.y.is_negative() { v.neg() } else { v.clone() };
        let next = match pivot.take() {
            None => v,
            Some(p) => {
                let e = p.y.extended_gcd(&v.y);
                let g = e.gcd;
                let np = Vector { x: &e.x * &p.x + &e.y * &v.x, y: g.clone() };
                let r1 = &p.x - (&p.y / &g) * &np.x;
                let r2 = &v.x - (&v.y / &g) * &np.x;
                axis = axis.gcd(&r1).gcd(&r2);
                np
            }
        };
        pivot = Some(next);
        if let Some(p) = pivot.as_mut() {
            if !axis.is_zero() {
                p.x = p.x.mod_floor(&axis);
            }
        }
    }
    match pivot {
        Some(p) if !axis.is_zero() => Ok(Lattice { b: p.x.mod_floor(&axis), a: axis, d: p.y }),
        _ => Err(LatticeError::RankDeficient),
    }
}

/// `Z[a] + Z[b]`.
pub fn span2(a: &ScaledSlope, b: &ScaledSlope) -> Result<Lattice, LatticeError> {
    if a.slope.is_parallel(&b.slope) {
        return Err(LatticeError::ParallelSlopes);
    }
    hnf(&[a.vector(), b.vector()])
}

/// Constants `(B, B')` with `Z[c] + Z[αB t] = Z[c] + Z[αB' t']` for every `α >= 1`.
///
/// After a unimodular change of basis `c = (x, 0)`, `t = (y, z)`, `t' = (y', z')`,
/// the pair is `(x|z'|, x|z|)`. No attempt is made to minimize it.
pub fn compat_constants(
    c: &ScaledSlope,
    t: &Slope,
    t2: &Slope,
) -> Result<(BigInt, BigInt), LatticeError> {
    if c.slope.is_parallel(t) || c.slope.is_parallel(t2) {
        return Err(LatticeError::ParallelSlopes);
    }
    let s = c.slope;
    let e = (s.p() as i128).extended_gcd(&(s.q() as i128));
    // rows of U: (m, n) and (-q, p); U s = (1, 0)
    let second_row = |v: &Slope| -(s.q() as i128) * v.p() as i128 + s.p() as i128 * v.q() as i128;
    debug_assert_eq!(e.x * s.p() as i128 + e.y * s.q() as i128, 1);
    let z = BigInt::from(second_row(t).abs());
    let z2 = BigInt::from(second_row(t2).abs());
    Ok((&c.k * z2, &c.k * z))
}

pub fn apply_gluing(g: &Gluing, l: &Lattice) -> Lattice {
    let [u, v] = l.generators();
    hnf(&[g.apply(&u), g.apply(&v)]).expect("unimodular image of a full-rank lattice")
}
