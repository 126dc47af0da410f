//! Characteristic polynomials, Newton polygons and slope-α eigen-data.
//!
//! Polynomials are stored in descending order, `Σ_{s=0}^{t} c_s X^{t-s}`,
//! so the polygon of `f` is the lower convex hull of `(i, v_p(c_i))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::kernel_mod;
use crate::matrix::{big_vec, IntMatrix};
use crate::padic::{inverse_mod, is_unit, padic_valuation, Prime, Slope, Valuation};

/// Polynomial `Σ c_s X^{t-s}` with `c_0 ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl TryFrom<Vec<String>> for CharPoly {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        let coeffs = v
            .iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad coefficient {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        CharPoly::new(coeffs)
    }
}

impl From<CharPoly> for Vec<String> {
    fn from(cp: CharPoly) -> Self {
        cp.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl CharPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::Parse("polynomial has no coefficients".into())),
            Some(c) if c.is_zero() => Err(Error::Parse("leading coefficient is zero".into())),
            Some(_) => Ok(CharPoly { coeffs }),
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[BigInt]) -> Self {
        let mut coeffs = vec![BigInt::one()];
        for r in roots {
            let mut next = coeffs.clone();
            next.push(BigInt::zero());
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] -= c * r;
            }
            coeffs = next;
        }
        CharPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_derivative(&self, x: &BigInt) -> BigInt {
        let t = self.degree();
        self.coeffs[..t]
            .iter()
            .enumerate()
            .fold(BigInt::zero(), |acc, (s, c)| {
                acc * x + c * BigInt::from(t - s)
            })
    }

    pub fn mul(&self, other: &CharPoly) -> CharPoly {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CharPoly { coeffs: out }
    }
}

/// `det(X·I - A)` by the Faddeev-LeVerrier recurrence; every division by
/// `k` is exact over the integers.
pub fn char_poly(a: &IntMatrix) -> CharPoly {
    let n = a.dim();
    let mut coeffs = vec![BigInt::one()];
    let mut m = IntMatrix::zero(n);
    for k in 1..=n {
        m = (a * &m).shift_diagonal(&-&coeffs[k - 1]);
        let am = a * &m;
        let trace: BigInt = (0..n).map(|i| am.get(i, i)).sum();
        let (q, r) = trace.div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
        coeffs.push(-q);
    }
    CharPoly { coeffs }
}

/// A polygon slope: an exact rational, or infinity for zero roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolygonSlope {
    Finite(Slope),
    Infinite,
}

impl From<Slope> for PolygonSlope {
    fn from(s: Slope) -> Self {
        PolygonSlope::Finite(s)
    }
}

impl From<i64> for PolygonSlope {
    fn from(v: i64) -> Self {
        PolygonSlope::Finite(Slope::integer(v))
    }
}

impl fmt::Display for PolygonSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonSlope::Finite(s) => s.fmt(f),
            PolygonSlope::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PolygonSlope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            Ok(PolygonSlope::Infinite)
        } else {
            Ok(PolygonSlope::Finite(s.parse()?))
        }
    }
}

impl Serialize for PolygonSlope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolygonSlope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlopeSegment {
    pub slope: PolygonSlope,
    pub length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub index: usize,
    pub valuation: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<Vertex>,
    /// Finite segments, slopes strictly increasing.
    pub segments: Vec<SlopeSegment>,
    /// Number of trailing zero coefficients (roots equal to zero).
    pub infinite_multiplicity: usize,
}

impl NewtonPolygon {
    /// All segments including the infinite-slope part, if any.
    pub fn census(&self) -> Vec<SlopeSegment> {
        let mut out = self.segments.clone();
        if self.infinite_multiplicity > 0 {
            out.push(SlopeSegment {
                slope: PolygonSlope::Infinite,
                length: self.infinite_multiplicity,
            });
        }
        out
    }
}

pub fn newton_polygon(cp: &CharPoly, p: Prime) -> NewtonPolygon {
    let points: Vec<(i128, i128)> = cp
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match padic_valuation(c, p) {
            Valuation::Finite(v) => Some((i as i128, v as i128)),
            Valuation::Infinite => None,
        })
        .collect();

    let mut hull: Vec<(i128, i128)> = Vec::with_capacity(points.len());
    for &pt in &points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (pt.1 - o.1) - (a.1 - o.1) * (pt.0 - o.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let segments = hull
        .windows(2)
        .map(|w| {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            SlopeSegment {
                slope: PolygonSlope::Finite(Slope::from(Ratio::new(dy as i64, dx as i64))),
                length: dx as usize,
            }
        })
        .collect();
    let last = hull.last().map_or(0, |v| v.0 as usize);
    NewtonPolygon {
        vertices: hull
            .iter()
            .map(|&(i, v)| Vertex {
                index: i as usize,
                valuation: v as u64,
            })
            .collect(),
        segments,
        infinite_multiplicity: cp.degree() - last,
    }
}

/// Horizontal length of the segment with the given slope, zero if absent.
pub fn slope_multiplicity(np: &NewtonPolygon, slope: impl Into<PolygonSlope>) -> usize {
    match slope.into() {
        PolygonSlope::Infinite => np.infinite_multiplicity,
        finite => np
            .segments
            .iter()
            .find(|s| s.slope == finite)
            .map_or(0, |s| s.length),
    }
}

/// Multiset of eigenvalue valuations of `a`.
pub fn slope_census(a: &IntMatrix, p: Prime) -> Vec<SlopeSegment> {
    newton_polygon(&char_poly(a), p).census()
}

/// A root of valuation `alpha`, truncated mod `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HenselRoot {
    #[serde(with = "crate::matrix::big_entry")]
    pub lambda: BigInt,
    pub precision: u32,
    /// `e = v_p(f'(λ))`; eigen-data derived from `λ` is reliable mod
    /// `p^{precision - e}`.
    pub derivative_valuation: u32,
    /// Root of the rescaled polynomial mod `p` that was lifted.
    pub seed: u64,
}

impl HenselRoot {
    pub fn reliable_precision(&self) -> u32 {
        self.precision.saturating_sub(self.derivative_valuation)
    }
}

fn lift_slope_root(cp: &CharPoly, p: Prime, alpha: u32, precision: u32) -> Result<HenselRoot> {
    if precision <= alpha {
        return Err(Error::OutOfRange {
            what: "precision must exceed the slope",
            value: precision as i64,
        });
    }
    let t = cp.degree();
    // f(p^α Y) = p^m g(Y), g primitive
    let mut scaled: Vec<BigInt> = cp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(s, c)| c * p.pow(alpha * (t - s) as u32))
        .collect();
    let m = scaled
        .iter()
        .filter_map(|c| padic_valuation(c, p).finite())
        .min()
        .expect("leading coefficient is nonzero") as u32;
    let content = p.pow(m);
    for c in scaled.iter_mut() {
        *c /= &content;
    }
    let g = CharPoly { coeffs: scaled };

    let pb = p.to_bigint();
    let unit_roots: Vec<u64> = (1..p.get())
        .filter(|&y| g.eval(&BigInt::from(y)).is_multiple_of(&pb))
        .collect();
    let seed = *unit_roots
        .iter()
        .find(|&&y| is_unit(&g.eval_derivative(&BigInt::from(y)), p))
        .ok_or(if unit_roots.is_empty() {
            Error::NoUnitRoot
        } else {
            Error::RootNotSimple
        })?;

    let mut y = BigInt::from(seed);
    let mut prec = 1u32;
    while prec < precision {
        prec = (2 * prec).min(precision);
        let modulus = p.pow(prec);
        let deriv = g.eval_derivative(&y);
        let inv = inverse_mod(&deriv, &modulus).ok_or(Error::RootNotSimple)?;
        y = (&y - g.eval(&y) * inv).mod_floor(&modulus);
    }

    let modulus = p.pow(precision);
    let lambda = (p.pow(alpha) * y).mod_floor(&modulus);
    debug_assert!(cp.eval(&lambda).is_multiple_of(&modulus));
    Ok(HenselRoot {
        lambda,
        precision,
        derivative_valuation: m - alpha,
        seed,
    })
}

/// Lift the unique root of valuation `alpha` of `cp` to precision `p^N`.
///
/// The slope-`alpha` segment of the polygon must exist and have length
/// one. The root is found by rescaling `X = p^α·Y`, dividing out the
/// content, locating the unit root of the result mod `p` and running
/// Newton's iteration.
pub fn hensel_slope_root(
    cp: &CharPoly,
    p: Prime,
    alpha: u32,
    precision: u32,
) -> Result<HenselRoot> {
    let slope = PolygonSlope::from(alpha as i64);
    match slope_multiplicity(&newton_polygon(cp, p), slope) {
        0 => Err(Error::SlopeAbsent(slope.to_string())),
        1 => lift_slope_root(cp, p, alpha, precision),
        length => Err(Error::SlopeNotSimple {
            slope: slope.to_string(),
            length,
        }),
    }
}

/// Like [`hensel_slope_root`] but accepts a slope segment of any length,
/// lifting the smallest seed that is a simple root mod `p`.
pub fn hensel_slope_root_any(
    cp: &CharPoly,
    p: Prime,
    alpha: u32,
    precision: u32,
) -> Result<HenselRoot> {
    let slope = PolygonSlope::from(alpha as i64);
    if slope_multiplicity(&newton_polygon(cp, p), slope) == 0 {
        return Err(Error::SlopeAbsent(slope.to_string()));
    }
    lift_slope_root(cp, p, alpha, precision)
}

/// Scale `v` so that its first unit coordinate becomes 1, mod `p^precision`.
pub fn normalize_mod(v: &[BigInt], p: Prime, precision: u32) -> Result<Vec<BigInt>> {
    let modulus = p.pow(precision);
    let pivot = v
        .iter()
        .find(|x| is_unit(x, p))
        .ok_or(Error::NotPrimitive)?;
    let inv = inverse_mod(pivot, &modulus).expect("unit is invertible");
    Ok(v.iter().map(|x| (x * &inv).mod_floor(&modulus)).collect())
}

/// A vector `F ∉ pL` with `(A - λI)·F ≡ 0 mod p^precision`, normalized so
/// its first unit coordinate is 1.
pub fn eigenvector_mod(
    a: &IntMatrix,
    lambda: &BigInt,
    p: Prime,
    precision: u32,
) -> Result<Vec<BigInt>> {
    if precision == 0 {
        return Err(Error::ZeroPrecision);
    }
    let shifted = a.shift_diagonal(lambda);
    let generator = kernel_mod(&shifted, p, precision)
        .into_iter()
        .rev()
        .find(|g| g.order_exponent == precision && g.direction.iter().any(|x| is_unit(x, p)))
        .ok_or(Error::NoUnitEigenvector(precision))?;
    normalize_mod(&generator.direction, p, precision)
}

/// Eigenvalue of `b` on `f` mod `p^precision`, checked in every coordinate.
pub fn commuting_eigenvalue(
    b: &IntMatrix,
    f: &[BigInt],
    p: Prime,
    precision: u32,
) -> Result<BigInt> {
    let modulus = p.pow(precision);
    let i = f
        .iter()
        .position(|x| is_unit(x, p))
        .ok_or(Error::NotPrimitive)?;
    let image = b.mul_vec(f);
    let inv = inverse_mod(&f[i], &modulus).expect("unit is invertible");
    let a = (&image[i] * inv).mod_floor(&modulus);
    for (j, (bf, fj)) in image.iter().zip(f).enumerate() {
        if !(bf - &a * fj).is_multiple_of(&modulus) {
            return Err(Error::InconsistentEigenvalue {
                coordinate: j,
                precision,
            });
        }
    }
    Ok(a)
}

/// Serialized form of a polygon computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonReport {
    pub prime: Prime,
    pub char_poly: CharPoly,
    pub vertices: Vec<Vertex>,
    pub segments: Vec<SlopeSegment>,
}

impl PolygonReport {
    pub fn for_matrix(a: &IntMatrix, p: Prime) -> Self {
        let cp = char_poly(a);
        let np = newton_polygon(&cp, p);
        PolygonReport {
            prime: p,
            segments: np.census(),
            vertices: np.vertices,
            char_poly: cp,
        }
    }
}

/// An eigenvector together with the precision it is known to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eigenvector {
    #[serde(with = "big_vec")]
    pub vector: Vec<BigInt>,
    pub precision: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn seg(num: i64, den: i64, length: usize) -> SlopeSegment {
        SlopeSegment {
            slope: PolygonSlope::Finite(Slope::new(num, den).unwrap()),
            length,
        }
    }

    /// Oracle: det(xI - A) by Bareiss at integer points.
    fn char_poly_at(a: &IntMatrix, x: i64) -> BigInt {
        (&IntMatrix::identity(a.dim()).scale(&big(x)) - a).determinant()
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(
            char_poly(&IntMatrix::identity(2)).coeffs(),
            &[big(1), big(-2), big(1)]
        );
        assert_eq!(
            char_poly(&m(&[&[0, 1], &[1, 0]])).coeffs(),
            &[big(1), big(0), big(-1)]
        );
        // companion of X^3 + 2X + 5
        let c = m(&[&[0, 0, -5], &[1, 0, -2], &[0, 1, 0]]);
        assert_eq!(char_poly(&c), CharPoly::from_i64(&[1, 0, 2, 5]).unwrap());
    }

    #[test]
    fn char_poly_matches_determinant_oracle() {
        let a = m(&[
            &[3, -1, 4, 1],
            &[5, 9, -2, 6],
            &[5, 3, 5, -8],
            &[9, 7, 9, 3],
        ]);
        let cp = char_poly(&a);
        for x in -3..=5 {
            assert_eq!(cp.eval(&big(x)), char_poly_at(&a, x));
        }
    }

    #[test]
    fn polygon_examples() {
        let f = CharPoly::from_i64(&[1, 2, 8, 32]).unwrap();
        let np = newton_polygon(&f, p(2));
        assert_eq!(np.segments, vec![seg(1, 1, 1), seg(2, 1, 2)]);
        assert_eq!(slope_multiplicity(&np, 2), 2);
        assert_eq!(slope_multiplicity(&np, 3), 0);
        assert_eq!(slope_multiplicity(&np, 1), 1);
        assert_eq!(
            np.vertices,
            vec![
                Vertex {
                    index: 0,
                    valuation: 0
                },
                Vertex {
                    index: 1,
                    valuation: 1
                },
                Vertex {
                    index: 3,
                    valuation: 5
                }
            ]
        );

        let np = newton_polygon(&CharPoly::from_i64(&[1, 0, -2]).unwrap(), p(7));
        assert_eq!(np.segments, vec![seg(0, 1, 2)]);

        let np = newton_polygon(&CharPoly::from_i64(&[1, -12, 27]).unwrap(), p(3));
        assert_eq!(np.segments, vec![seg(1, 1, 1), seg(2, 1, 1)]);
    }

    #[test]
    fn rational_and_infinite_slopes() {
        // X^3 - 2X^2: roots 0, 0, 2; X^2 - 2 over p = 2 has slope 1/2
        let np = newton_polygon(&CharPoly::from_i64(&[1, -2, 0, 0]).unwrap(), p(2));
        assert_eq!(
            np.census(),
            vec![
                seg(1, 1, 1),
                SlopeSegment {
                    slope: PolygonSlope::Infinite,
                    length: 2
                }
            ]
        );
        let np = newton_polygon(&CharPoly::from_i64(&[1, 0, -2]).unwrap(), p(2));
        assert_eq!(np.segments, vec![seg(1, 2, 2)]);
    }

    #[test]
    fn census_examples() {
        let q = p(3);
        assert_eq!(
            slope_census(&IntMatrix::zero(3), q),
            vec![SlopeSegment {
                slope: PolygonSlope::Infinite,
                length: 3
            }]
        );
        assert_eq!(slope_census(&IntMatrix::identity(4), q), vec![seg(0, 1, 4)]);
        let u = m(&[&[1, 2], &[1, 3]]);
        let u_inv = m(&[&[3, -2], &[-1, 1]]);
        let d = m(&[&[3, 0], &[0, 9]]);
        let a = &(&u * &d) * &u_inv;
        assert_eq!(slope_census(&a, q), vec![seg(1, 1, 1), seg(2, 1, 1)]);
    }

    #[test]
    fn hensel_examples() {
        // X^2 - 2 at p = 7: slope 0 has length 2, so the strict entry point refuses
        let f = CharPoly::from_i64(&[1, 0, -2]).unwrap();
        assert!(matches!(
            hensel_slope_root(&f, p(7), 0, 3),
            Err(Error::SlopeNotSimple { length: 2, .. })
        ));
        let root = hensel_slope_root_any(&f, p(7), 0, 3).unwrap();
        assert_eq!(root.lambda, big(108));
        assert_eq!(root.seed, 3);
        assert_eq!((big(108) * big(108) - big(2)) % big(343), big(0));

        let f = CharPoly::from_i64(&[1, -12, 27]).unwrap();
        let root = hensel_slope_root(&f, p(3), 1, 5).unwrap();
        assert_eq!(root.lambda, big(3));
        assert_eq!(root.derivative_valuation, 1);

        let f = CharPoly::from_i64(&[1, -10]).unwrap();
        let root = hensel_slope_root(&f, p(5), 1, 4).unwrap();
        assert_eq!(root.lambda, big(10));
        assert_eq!(root.derivative_valuation, 0);
    }

    #[test]
    fn hensel_errors() {
        let f = CharPoly::from_i64(&[1, -12, 27]).unwrap();
        assert!(matches!(
            hensel_slope_root(&f, p(3), 3, 5),
            Err(Error::SlopeAbsent(_))
        ));
        assert!(hensel_slope_root(&f, p(3), 1, 1).is_err());
    }

    #[test]
    fn eigenvector_examples() {
        let q = p(5);
        let a = IntMatrix::diagonal(&[big(5), big(125)]);
        assert_eq!(
            eigenvector_mod(&a, &big(5), q, 4).unwrap(),
            vec![big(1), big(0)]
        );

        let a = m(&[&[5, 1], &[0, 25]]);
        assert_eq!(
            eigenvector_mod(&a, &big(5), q, 4).unwrap(),
            vec![big(1), big(0)]
        );

        // conjugated: A = U diag(5, 125) U^-1, eigenvector U e_1 up to a unit
        let u = m(&[&[1, 2], &[1, 3]]);
        let u_inv = m(&[&[3, -2], &[-1, 1]]);
        let a = &(&u * &IntMatrix::diagonal(&[big(5), big(125)])) * &u_inv;
        let cp = char_poly(&a);
        let root = hensel_slope_root(&cp, q, 1, 6).unwrap();
        let f = eigenvector_mod(&a, &root.lambda, q, root.reliable_precision()).unwrap();
        let expected = normalize_mod(&[big(1), big(1)], q, root.reliable_precision()).unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn commuting_eigenvalue_examples() {
        let q = p(3);
        let f = vec![big(1), big(4)];
        assert_eq!(
            commuting_eigenvalue(&IntMatrix::identity(2), &f, q, 3).unwrap(),
            big(1)
        );
        let a = m(&[&[3, 0], &[0, 1]]);
        assert!(matches!(
            commuting_eigenvalue(&a, &[big(1), big(1)], q, 2),
            Err(Error::InconsistentEigenvalue { coordinate: 1, .. })
        ));
        assert_eq!(
            commuting_eigenvalue(&a, &[big(3), big(3)], q, 2),
            Err(Error::NotPrimitive)
        );
    }

    #[test]
    fn polygon_report_round_trip() {
        let r = PolygonReport::for_matrix(&m(&[&[0, 1], &[32, 4]]), p(2));
        assert_eq!(r.segments, vec![seg(2, 1, 1), seg(3, 1, 1)]);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"2/1\""));
        let back: PolygonReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    fn poly_strategy() -> impl Strategy<Value = CharPoly> {
        (proptest::collection::vec(-200i64..=200, 1..5), 1i64..=3).prop_map(|(tail, lead)| {
            let mut c = vec![lead];
            c.extend(tail);
            CharPoly::from_i64(&c).unwrap()
        })
    }

    fn merged(a: &[SlopeSegment], b: &[SlopeSegment]) -> Vec<SlopeSegment> {
        let mut all: Vec<SlopeSegment> = a.iter().chain(b).copied().collect();
        all.sort();
        let mut out: Vec<SlopeSegment> = Vec::new();
        for s in all {
            match out.last_mut() {
                Some(last) if last.slope == s.slope => last.length += s.length,
                _ => out.push(s),
            }
        }
        out
    }

    proptest! {
        #[test]
        fn polygon_of_product_merges_segments(f in poly_strategy(), g in poly_strategy(), pi in 0usize..3) {
            let q = p([2, 3, 5][pi]);
            let fa = newton_polygon(&f, q).census();
            let ga = newton_polygon(&g, q).census();
            // leading coefficients may carry valuation; compare slopes only
            let prod = newton_polygon(&f.mul(&g), q).census();
            prop_assert_eq!(prod, merged(&fa, &ga));
        }

        #[test]
        fn polygon_is_convex(f in poly_strategy(), pi in 0usize..3) {
            let q = p([2, 3, 5][pi]);
            let np = newton_polygon(&f, q);
            for w in np.segments.windows(2) {
                prop_assert!(w[0].slope < w[1].slope);
            }
            let total: usize = np.segments.iter().map(|s| s.length).sum();
            prop_assert_eq!(total + np.infinite_multiplicity, f.degree());
        }

        #[test]
        fn char_poly_agrees_with_determinant(entries in proptest::collection::vec(-20i64..=20, 9)) {
            let a = IntMatrix::from_i64_rows(&entries.chunks(3).collect::<Vec<_>>()).unwrap();
            let cp = char_poly(&a);
            for x in -2..=2 {
                prop_assert_eq!(cp.eval(&big(x)), char_poly_at(&a, x));
            }
        }
    }
}
