//! Lattice quotients `L/K` and the integer linear algebra behind them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{big_vec, IntMatrix};
use crate::padic::{padic_valuation, unit_part, Prime};

/// Exponents `a_1 ≥ … ≥ a_r ≥ 0` of `L/K ≅ ⊕ Z/p^{a_i}`, at level `n`
/// (every `a_i ≤ n`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct DivisorProfile {
    level: u32,
    exponents: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    n: u32,
    a: Vec<u32>,
}

impl TryFrom<RawProfile> for DivisorProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        DivisorProfile::new(raw.n, raw.a)
    }
}

impl From<DivisorProfile> for RawProfile {
    fn from(p: DivisorProfile) -> Self {
        RawProfile {
            n: p.level,
            a: p.exponents,
        }
    }
}

impl DivisorProfile {
    pub fn new(level: u32, exponents: Vec<u32>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidProfile("level must be positive".into()));
        }
        if exponents.is_empty() {
            return Err(Error::InvalidProfile("profile is empty".into()));
        }
        if exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidProfile(format!(
                "exponents {exponents:?} are not nonincreasing"
            )));
        }
        if let Some(&a) = exponents.iter().find(|&&a| a > level) {
            return Err(Error::ExponentAboveLevel { exponent: a, level });
        }
        Ok(DivisorProfile { level, exponents })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// Keep only the first `max_rank` exponents.
    pub fn truncated(&self, max_rank: usize) -> Result<Self> {
        let keep = max_rank.min(self.rank());
        DivisorProfile::new(self.level, self.exponents[..keep].to_vec())
    }

    /// Multiplicities `σ_1, …, σ_n`: `σ_k` counts exponents equal to
    /// `n + 1 - k`. Exponents equal to zero are not counted.
    pub fn multiplicities(&self) -> Vec<usize> {
        (0..self.level)
            .map(|k| {
                let target = self.level - k;
                self.exponents.iter().filter(|&&a| a == target).count()
            })
            .collect()
    }
}

/// `A = U·D·V` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | … | d_r`, all `d_i ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn divisors(&self) -> Vec<BigInt> {
        (0..self.d.dim())
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }
}

/// Serialized form of a Smith decomposition: `A = U·D·V` and the
/// diagonal of `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnfReport {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    #[serde(with = "big_vec")]
    pub divisors: Vec<BigInt>,
}

impl From<&SmithDecomposition> for SnfReport {
    fn from(s: &SmithDecomposition) -> Self {
        SnfReport {
            u: s.u.clone(),
            d: s.d.clone(),
            v: s.v.clone(),
            divisors: s.divisors(),
        }
    }
}

/// Working state for elimination. Invariant: `A = u·w·v`, `u·u_inv = I`,
/// `v·v_inv = I`.
struct Elimination {
    n: usize,
    w: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    u_inv: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
    v_inv: Vec<Vec<BigInt>>,
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    IntMatrix::identity(n).rows()
}

fn axpy_rows(m: &mut [Vec<BigInt>], target: usize, src: usize, c: &BigInt) {
    let (t, s) = if target < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[target], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(target);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x += c * y;
    }
}

fn axpy_cols(m: &mut [Vec<BigInt>], target: usize, src: usize, c: &BigInt) {
    for row in m.iter_mut() {
        let add = c * &row[src];
        row[target] += add;
    }
}

impl Elimination {
    fn new(a: &IntMatrix) -> Self {
        let n = a.dim();
        Elimination {
            n,
            w: a.rows(),
            u: identity_rows(n),
            u_inv: identity_rows(n),
            v: identity_rows(n),
            v_inv: identity_rows(n),
        }
    }

    /// row_i(w) += c·row_j(w)
    fn row_add(&mut self, i: usize, j: usize, c: &BigInt) {
        axpy_rows(&mut self.w, i, j, c);
        axpy_cols(&mut self.u, j, i, &-c);
        axpy_rows(&mut self.u_inv, i, j, c);
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.w.swap(i, j);
        for row in self.u.iter_mut() {
            row.swap(i, j);
        }
        self.u_inv.swap(i, j);
    }

    fn row_negate(&mut self, i: usize) {
        for x in self.w[i].iter_mut() {
            *x = -&*x;
        }
        for row in self.u.iter_mut() {
            row[i] = -&row[i];
        }
        for x in self.u_inv[i].iter_mut() {
            *x = -&*x;
        }
    }

    /// col_j(w) += c·col_i(w)
    fn col_add(&mut self, j: usize, i: usize, c: &BigInt) {
        axpy_cols(&mut self.w, j, i, c);
        axpy_rows(&mut self.v, i, j, &-c);
        axpy_cols(&mut self.v_inv, j, i, c);
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.w.iter_mut() {
            row.swap(i, j);
        }
        self.v.swap(i, j);
        for row in self.v_inv.iter_mut() {
            row.swap(i, j);
        }
    }

    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.n {
            for j in t..self.n {
                let x = &self.w[i][j];
                if x.is_zero() {
                    continue;
                }
                let a = x.abs();
                if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                    best = Some((i, j, a));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    fn run(mut self) -> SmithDecomposition {
        let n = self.n;
        'diagonal: for t in 0..n {
            loop {
                let Some((pi, pj)) = self.min_pivot(t) else {
                    break 'diagonal;
                };
                self.row_swap(t, pi);
                self.col_swap(t, pj);

                let mut remainder = false;
                for i in t + 1..n {
                    if self.w[i][t].is_zero() {
                        continue;
                    }
                    let q = self.w[i][t].div_floor(&self.w[t][t]);
                    self.row_add(i, t, &-q);
                    remainder |= !self.w[i][t].is_zero();
                }
                for j in t + 1..n {
                    if self.w[t][j].is_zero() {
                        continue;
                    }
                    let q = self.w[t][j].div_floor(&self.w[t][t]);
                    self.col_add(j, t, &-q);
                    remainder |= !self.w[t][j].is_zero();
                }
                if remainder {
                    continue;
                }

                let pivot = self.w[t][t].clone();
                let offender =
                    (t + 1..n).find(|&i| (t + 1..n).any(|j| !self.w[i][j].is_multiple_of(&pivot)));
                match offender {
                    Some(i) => self.row_add(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.w[t][t].is_negative() {
                self.row_negate(t);
            }
        }

        let to_matrix = |rows: Vec<Vec<BigInt>>| {
            IntMatrix::from_rows(rows).expect("elimination preserves shape")
        };
        SmithDecomposition {
            u: to_matrix(self.u),
            d: to_matrix(self.w),
            v: to_matrix(self.v),
            u_inv: to_matrix(self.u_inv),
            v_inv: to_matrix(self.v_inv),
        }
    }
}

/// Smith normal form by pivoting on the entry of least nonzero absolute
/// value, with both transforms and their inverses accumulated.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    Elimination::new(a).run()
}

/// Profile of `Z^r / K` where `K` is spanned by the columns of `kgen`.
pub fn quotient_profile(kgen: &IntMatrix, p: Prime, level: u32) -> Result<DivisorProfile> {
    let snf = smith_normal_form(kgen);
    let mut exponents = Vec::with_capacity(kgen.dim());
    for d in snf.divisors() {
        if d.is_zero() {
            return Err(Error::InfiniteIndex);
        }
        if !unit_part(&d, p)?.abs().is_one() {
            return Err(Error::ForeignDivisor(d.to_string()));
        }
        let a = padic_valuation(&d, p).finite().expect("nonzero divisor") as u32;
        if a > level {
            return Err(Error::ExponentAboveLevel { exponent: a, level });
        }
        exponents.push(a);
    }
    exponents.sort_unstable_by(|x, y| y.cmp(x));
    DivisorProfile::new(level, exponents)
}

/// Whether `ξ(K) ⊂ p^n L` for `K = ⊕ p^{a_j} Z e_j`: column `j` of `xi`
/// must be divisible by `p^{n - a_j}`.
pub fn check_xi_condition(xi: &IntMatrix, profile: &DivisorProfile, p: Prime) -> Result<bool> {
    if xi.dim() != profile.rank() {
        return Err(Error::DimensionMismatch {
            expected: profile.rank(),
            found: xi.dim(),
        });
    }
    let n = profile.level();
    Ok(profile.exponents().iter().enumerate().all(|(j, &a)| {
        let m = p.pow(n - a);
        xi.column(j).all(|x| x.is_multiple_of(&m))
    }))
}

/// Profile of `L/(K + p^{n'}L)` at level `n'`.
pub fn profile_mod(profile: &DivisorProfile, nprime: u32) -> Result<DivisorProfile> {
    if nprime == 0 || nprime > profile.level() {
        return Err(Error::OutOfRange {
            what: "n' must satisfy 1 <= n' <= n",
            value: nprime as i64,
        });
    }
    DivisorProfile::new(
        nprime,
        profile.exponents().iter().map(|&a| a.min(nprime)).collect(),
    )
}

/// One cyclic summand of `ker(A mod p^N)`.
///
/// The summand is generated by `vector = p^{N - order_exponent}·direction`
/// and is isomorphic to `Z/p^{order_exponent}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelGenerator {
    #[serde(with = "big_vec")]
    pub direction: Vec<BigInt>,
    #[serde(with = "big_vec")]
    pub vector: Vec<BigInt>,
    pub order_exponent: u32,
}

/// Generators of `{v mod p^N : A·v ≡ 0 mod p^N}` read off a Smith form.
/// Summands of trivial order are omitted.
pub fn kernel_mod(a: &IntMatrix, p: Prime, precision: u32) -> Vec<KernelGenerator> {
    let snf = smith_normal_form(a);
    let modulus = p.pow(precision);
    snf.divisors()
        .iter()
        .enumerate()
        .filter_map(|(i, d)| {
            let order = padic_valuation(d, p).min_with(precision as u64) as u32;
            if order == 0 {
                return None;
            }
            let direction: Vec<BigInt> =
                snf.v_inv.column(i).map(|x| x.mod_floor(&modulus)).collect();
            let scale = p.pow(precision - order);
            let vector = direction
                .iter()
                .map(|x| (x * &scale).mod_floor(&modulus))
                .collect();
            Some(KernelGenerator {
                direction,
                vector,
                order_exponent: order,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn assert_valid_snf(a: &IntMatrix, snf: &SmithDecomposition) {
        let n = a.dim();
        assert_eq!(&(&snf.u * &snf.d) * &snf.v, *a);
        assert_eq!(&snf.u * &snf.u_inv, IntMatrix::identity(n));
        assert_eq!(&snf.v * &snf.v_inv, IntMatrix::identity(n));
        assert!(snf.u.determinant().abs().is_one());
        assert!(snf.v.determinant().abs().is_one());
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!(snf.d.get(i, j).is_zero());
                }
            }
        }
        let d = snf.divisors();
        assert!(d.iter().all(|x| !x.is_negative()));
        for w in d.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]) || (w[0].is_zero() && w[1].is_zero()));
        }
        assert_eq!(snf.d.determinant().abs(), a.determinant().abs());
    }

    #[test]
    fn snf_examples() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.divisors(), vec![big(1), big(6)]);
        assert_valid_snf(&a, &s);

        let a = m(&[&[5, 0], &[0, 5]]);
        assert_eq!(smith_normal_form(&a).divisors(), vec![big(5), big(5)]);

        let a = IntMatrix::zero(2);
        let s = smith_normal_form(&a);
        assert_eq!(s.divisors(), vec![big(0), big(0)]);
        assert_valid_snf(&a, &s);

        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.divisors(), vec![big(2), big(6), big(12)]);
        assert_valid_snf(&a, &s);
    }

    #[test]
    fn profile_examples() {
        let q = p(5);
        let k = m(&[&[25, 0], &[0, 5]]);
        assert_eq!(quotient_profile(&k, q, 3).unwrap().exponents(), &[2, 1]);
        assert_eq!(
            quotient_profile(&IntMatrix::identity(2), q, 3)
                .unwrap()
                .exponents(),
            &[0, 0]
        );
        let k = m(&[&[5, 1], &[0, 5]]);
        assert_eq!(quotient_profile(&k, q, 2).unwrap().exponents(), &[2, 0]);
    }

    #[test]
    fn profile_errors() {
        let q = p(5);
        assert_eq!(
            quotient_profile(&m(&[&[5, 0], &[0, 0]]), q, 3),
            Err(Error::InfiniteIndex)
        );
        assert!(matches!(
            quotient_profile(&m(&[&[10, 0], &[0, 1]]), q, 3),
            Err(Error::ForeignDivisor(_))
        ));
        assert_eq!(
            quotient_profile(&m(&[&[125, 0], &[0, 1]]), q, 2),
            Err(Error::ExponentAboveLevel {
                exponent: 3,
                level: 2
            })
        );
        assert!(DivisorProfile::new(3, vec![1, 2]).is_err());
        assert!(DivisorProfile::new(3, vec![4]).is_err());
        assert!(DivisorProfile::new(0, vec![0]).is_err());
    }

    #[test]
    fn xi_condition_examples() {
        let q = p(2);
        let prof = DivisorProfile::new(2, vec![2, 0]).unwrap();
        assert!(!check_xi_condition(&m(&[&[1, 2], &[0, 4]]), &prof, q).unwrap());
        assert!(check_xi_condition(&m(&[&[1, 4], &[3, 8]]), &prof, q).unwrap());
        let any = m(&[&[1, 3], &[5, 7]]);
        assert!(check_xi_condition(&any.scale(&big(4)), &prof, q).unwrap());
        let full = DivisorProfile::new(2, vec![2, 2]).unwrap();
        assert!(check_xi_condition(&any, &full, q).unwrap());
        assert!(check_xi_condition(&IntMatrix::identity(3), &full, q).is_err());
    }

    #[test]
    fn profile_mod_examples() {
        let prof = DivisorProfile::new(3, vec![3, 3, 2, 2, 1, 1]).unwrap();
        let m2 = profile_mod(&prof, 2).unwrap();
        assert_eq!(m2.exponents(), &[2, 2, 2, 2, 1, 1]);
        assert_eq!(m2.level(), 2);
        assert_eq!(profile_mod(&prof, 3).unwrap(), prof);
        let prof = DivisorProfile::new(3, vec![3, 1, 0]).unwrap();
        assert_eq!(profile_mod(&prof, 1).unwrap().exponents(), &[1, 1, 0]);
        assert!(profile_mod(&prof, 0).is_err());
        assert!(profile_mod(&prof, 4).is_err());
    }

    #[test]
    fn kernel_examples() {
        let q = p(3);
        assert!(kernel_mod(&IntMatrix::identity(3), q, 4).is_empty());

        let a = m(&[&[3, 0], &[0, 1]]);
        let ker = kernel_mod(&a, q, 3);
        assert_eq!(ker.len(), 1);
        assert_eq!(ker[0].order_exponent, 1);
        assert_eq!(ker[0].direction, vec![big(1), big(0)]);
        assert_eq!(ker[0].vector, vec![big(9), big(0)]);

        let ker = kernel_mod(&IntMatrix::zero(2), q, 3);
        assert_eq!(ker.len(), 2);
        assert!(ker.iter().all(|g| g.order_exponent == 3));
        let dirs: Vec<_> = ker.iter().map(|g| g.direction.clone()).collect();
        assert!(dirs.contains(&vec![big(1), big(0)]));
        assert!(dirs.contains(&vec![big(0), big(1)]));
    }

    #[test]
    fn multiplicities_of_profile() {
        let prof = DivisorProfile::new(3, vec![3, 3, 2, 2, 1, 1, 0]).unwrap();
        assert_eq!(prof.multiplicities(), vec![2, 2, 2]);
    }

    fn small_matrix(max_dim: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
        (1..=max_dim).prop_flat_map(move |n| {
            proptest::collection::vec(-bound..=bound, n * n).prop_map(move |e| {
                let rows: Vec<Vec<i64>> = e.chunks(n).map(|c| c.to_vec()).collect();
                IntMatrix::from_i64_rows(&rows).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn snf_reconstructs(a in small_matrix(5, 50)) {
            let s = smith_normal_form(&a);
            assert_valid_snf(&a, &s);
        }

        #[test]
        fn profile_invariant_under_change_of_generators(
            exps in proptest::collection::vec(0u32..4, 1..5),
            seed_ops in proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..12),
        ) {
            let q = p(3);
            let mut exps = exps;
            exps.sort_unstable_by(|a, b| b.cmp(a));
            let n = exps.len();
            let k = IntMatrix::diagonal(&exps.iter().map(|&a| q.pow(a)).collect::<Vec<_>>());
            let mut u = IntMatrix::identity(n);
            for (i, j, c) in seed_ops {
                if i < n && j < n && i != j {
                    let mut e = IntMatrix::identity(n);
                    e.set(i, j, big(c));
                    u = &u * &e;
                }
            }
            let base = quotient_profile(&k, q, 3).unwrap();
            prop_assert_eq!(base.exponents(), &exps[..]);
            prop_assert_eq!(quotient_profile(&(&k * &u), q, 3).unwrap(), base);
        }

        #[test]
        fn profile_mod_is_idempotent_and_monotone(
            exps in proptest::collection::vec(0u32..6, 1..8),
            nprime in 1u32..6,
        ) {
            let mut exps = exps;
            exps.sort_unstable_by(|a, b| b.cmp(a));
            let prof = DivisorProfile::new(5, exps).unwrap();
            let once = profile_mod(&prof, nprime).unwrap();
            prop_assert_eq!(profile_mod(&once, nprime).unwrap(), once.clone());
            for (a, b) in once.exponents().iter().zip(prof.exponents()) {
                prop_assert!(a <= b);
            }
        }

        #[test]
        fn xi_condition_closed_under_addition(
            exps in proptest::collection::vec(0u32..4, 3),
            x in proptest::collection::vec(-5i64..=5, 9),
            y in proptest::collection::vec(-5i64..=5, 9),
        ) {
            let q = p(2);
            let mut exps = exps;
            exps.sort_unstable_by(|a, b| b.cmp(a));
            let prof = DivisorProfile::new(3, exps.clone()).unwrap();
            let build = |raw: &[i64]| {
                let mut mat = IntMatrix::zero(3);
                for i in 0..3 {
                    for j in 0..3 {
                        mat.set(i, j, big(raw[3 * i + j]) * q.pow(3 - exps[j]));
                    }
                }
                mat
            };
            let (a, b) = (build(&x), build(&y));
            prop_assert!(check_xi_condition(&a, &prof, q).unwrap());
            prop_assert!(check_xi_condition(&b, &prof, q).unwrap());
            prop_assert!(check_xi_condition(&(&a + &b), &prof, q).unwrap());
        }

        #[test]
        fn kernel_generators_are_annihilated(a in small_matrix(4, 30)) {
            let q = p(3);
            let prec = 4;
            let modulus = q.pow(prec);
            for g in kernel_mod(&a, q, prec) {
                let image = a.mul_vec(&g.vector);
                prop_assert!(image.iter().all(|x| x.is_multiple_of(&modulus)));
                let order = q.pow(g.order_exponent);
                prop_assert!(g.vector.iter().all(|x| (x * &order).is_multiple_of(&modulus)));
            }
        }
    }
}
