//! Boundary functions of a lattice quotient and the constants built on them.
//!
//! For a profile `(a_i)` at level `n` put `b_i = n - a_i`,
//! `B(j) = b_1 + … + b_j`, `M = ⌈n/2⌉` and `T(j) = M + B(j-1)`. The exact
//! constant `c(L/K)` is `min(n, min_{1≤i≤r} T(i)/i)`. Everything on this
//! exact side is integer or rational; only the closed-form estimates
//! (`c_1`, the closed `κ` and the matching threshold on `n`) use `f64`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{profile_mod, DivisorProfile};
use crate::padic::Slope;

/// Distance to the nearest integer below which closed-form values are
/// flagged as sitting on a rounding boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFunctions {
    pub level: u32,
    /// `b_i = n - a_i`, nondecreasing.
    pub b: Vec<u64>,
    /// `B(0), B(1), …, B(r)`.
    pub prefix: Vec<u64>,
    /// Smallest `M` with `2M ≥ n`.
    pub m: u64,
    /// `T(1), …, T(r)`.
    pub t: Vec<u64>,
}

impl BoundaryFunctions {
    /// `B(j)` for `0 ≤ j ≤ r`.
    pub fn big_b(&self, j: usize) -> u64 {
        self.prefix[j]
    }

    /// `T(j)` for `1 ≤ j ≤ r`.
    pub fn big_t(&self, j: usize) -> u64 {
        self.t[j - 1]
    }
}

pub fn boundary_functions(profile: &DivisorProfile) -> BoundaryFunctions {
    let n = profile.level() as u64;
    let b: Vec<u64> = profile.exponents().iter().map(|&a| n - a as u64).collect();
    let mut prefix = Vec::with_capacity(b.len() + 1);
    prefix.push(0);
    for &x in &b {
        prefix.push(prefix.last().unwrap() + x);
    }
    let m = n.div_ceil(2);
    let t = (1..=b.len()).map(|j| m + prefix[j - 1]).collect();
    BoundaryFunctions {
        level: profile.level(),
        b,
        prefix,
        m,
        t,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CBound {
    pub value: Slope,
    /// Smallest `i` attaining `min T(i)/i`.
    pub argmin: usize,
    /// The level `n` was strictly below every `T(i)/i`.
    pub capped: bool,
}

pub fn c_exact(profile: &DivisorProfile) -> CBound {
    c_from_boundary(&boundary_functions(profile))
}

fn c_from_boundary(bf: &BoundaryFunctions) -> CBound {
    let (argmin, best) =
        bf.t.iter()
            .enumerate()
            .map(|(k, &t)| (k + 1, Ratio::new(t as i64, (k + 1) as i64)))
            .fold(None::<(usize, Ratio<i64>)>, |acc, (i, r)| match acc {
                Some((_, b)) if b <= r => acc,
                _ => Some((i, r)),
            })
            .expect("profile has positive rank");
    let cap = Ratio::from_integer(bf.level as i64);
    if cap < best {
        CBound {
            value: Slope::from(cap),
            argmin,
            capped: true,
        }
    } else {
        CBound {
            value: Slope::from(best),
            argmin,
            capped: false,
        }
    }
}

/// The tensor-structure profile: `((r+1)^d - r^d)·h` copies of `n - r`
/// for `r = 0, …, n-1`.
pub fn hilbert_profile(d: u32, h: u32, n: u32) -> Result<DivisorProfile> {
    hilbert_profile_truncated(d, h, n, usize::MAX)
}

/// [`hilbert_profile`] cut to its first `max_rank` exponents, without
/// materializing the rest.
pub fn hilbert_profile_truncated(
    d: u32,
    h: u32,
    n: u32,
    max_rank: usize,
) -> Result<DivisorProfile> {
    if d == 0 || h == 0 || n == 0 {
        return Err(Error::OutOfRange {
            what: "d, h and n must be positive",
            value: d.min(h).min(n) as i64,
        });
    }
    let overflow = || Error::OutOfRange {
        what: "hilbert profile length overflows",
        value: n as i64,
    };
    let mut exponents = Vec::new();
    for r in 0..n as u64 {
        let hi = (r + 1).checked_pow(d).ok_or_else(overflow)?;
        let lo = r.checked_pow(d).ok_or_else(overflow)?;
        let count = (hi - lo).checked_mul(h as u64).ok_or_else(overflow)?;
        let room = max_rank.saturating_sub(exponents.len());
        let take = (count as usize).min(room);
        exponents.extend(std::iter::repeat_n(n - r as u32, take));
        if exponents.len() >= max_rank {
            break;
        }
    }
    DivisorProfile::new(n, exponents)
}

/// `c_1 = (1/(d+1))^{d/(d+1)} · (h^{-d/(d+1)} + 1)`.
pub fn c1_closed(d: u32, h: u32) -> f64 {
    let d = d as f64;
    let e = d / (d + 1.0);
    (1.0 / (d + 1.0)).powf(e) * ((h as f64).powf(-e) + 1.0)
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < BOUNDARY_TOLERANCE
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedKappa {
    pub kappa: i64,
    /// `c_1·n^{1/(d+1)} - 1 - 3α` before flooring.
    pub value: f64,
    pub near_boundary: bool,
}

/// `⌊c_1·n^{1/(d+1)} - 1 - 3α⌋`.
pub fn kappa_closed(n: u64, alpha: u32, d: u32, h: u32) -> ClosedKappa {
    let value =
        c1_closed(d, h) * (n as f64).powf(1.0 / (d as f64 + 1.0)) - 1.0 - 3.0 * alpha as f64;
    ClosedKappa {
        kappa: value.floor() as i64,
        value,
        near_boundary: near_integer(value),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Smallest integer strictly above `value`.
    pub n: u64,
    /// `((κ + 1 + 3α)/c_1)^{d+1}`.
    pub value: f64,
    pub near_boundary: bool,
}

pub fn n_threshold(kappa: u64, alpha: u32, d: u32, h: u32) -> Threshold {
    let base = (kappa as f64 + 1.0 + 3.0 * alpha as f64) / c1_closed(d, h);
    let value = base.powi(d as i32 + 1);
    Threshold {
        n: value.floor() as u64 + 1,
        value,
        near_boundary: near_integer(value),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub nprime: u32,
    pub c: Slope,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub alpha: u32,
    pub kappa: u32,
    /// `κ ≤ n - 2α`.
    pub kappa_in_range: bool,
    /// One entry per `n'` with `n - 2α - κ < n' ≤ n` (and `n' ≥ 1`).
    pub levels: Vec<LevelCheck>,
    pub passed: bool,
    pub reason: Option<String>,
}

/// Check `κ ≤ n - 2α` and `α < c(L/(K + p^{n'}L))` for every `n'` with
/// `n - 2α - κ < n' ≤ n`.
pub fn proposition_hypotheses(
    profile: &DivisorProfile,
    alpha: u32,
    kappa: u32,
) -> HypothesisReport {
    let n = profile.level() as i64;
    let lowest = n - 2 * alpha as i64 - kappa as i64;
    let kappa_in_range = lowest >= 0;
    let start = (lowest + 1).max(1) as u32;
    let alpha_q = Slope::integer(alpha as i64);
    let levels: Vec<LevelCheck> = (start..=profile.level())
        .map(|nprime| {
            let c = c_exact(&profile_mod(profile, nprime).expect("n' in range")).value;
            LevelCheck {
                nprime,
                c,
                holds: alpha_q < c,
            }
        })
        .collect();
    let failing = levels.iter().find(|l| !l.holds);
    let reason = if !kappa_in_range {
        Some("kappa-range".to_string())
    } else {
        failing.map(|l| format!("slope-bound at n'={}", l.nprime))
    };
    HypothesisReport {
        alpha,
        kappa,
        kappa_in_range,
        passed: reason.is_none(),
        levels,
        reason,
    }
}

/// Largest `κ ≥ 1` for which [`proposition_hypotheses`] passes.
pub fn auto_kappa(profile: &DivisorProfile, alpha: u32) -> Option<u32> {
    let max = (profile.level() as i64 - 2 * alpha as i64).max(0) as u32;
    // passing is monotone in κ: a larger κ only adds levels
    (1..=max)
        .rev()
        .find(|&k| proposition_hypotheses(profile, alpha, k).passed)
}

/// Exact constant of `L/(K + p^{n'}L)`, the slope bound below which
/// multiplicities are locally constant for `p^{n'}`-congruent operators.
pub fn constancy_bound(profile: &DivisorProfile, nprime: u32) -> Result<CBound> {
    Ok(c_exact(&profile_mod(profile, nprime)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TRow {
    pub i: usize,
    pub t: u64,
    pub ratio: Slope,
}

/// Everything the `bounds` command prints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d: u32,
    pub h: u32,
    pub n: u32,
    pub alpha: u32,
    pub rank: usize,
    /// `σ_1, …, σ_n`.
    pub multiplicities: Vec<usize>,
    pub m: u64,
    pub t_table: Vec<TRow>,
    pub c_exact: CBound,
    pub c1: f64,
    pub kappa_closed: ClosedKappa,
    pub n_threshold: Option<Threshold>,
    pub hypotheses: HypothesisReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaChoice {
    Fixed(u32),
    #[serde(with = "auto_literal")]
    Auto,
}

mod auto_literal {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!(
                "expected \"auto\", found {s:?}"
            )))
        }
    }
}

impl std::str::FromStr for KappaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(KappaChoice::Auto)
        } else {
            s.parse().map(KappaChoice::Fixed).map_err(|_| {
                Error::Parse(format!("kappa must be \"auto\" or an integer, got {s:?}"))
            })
        }
    }
}

pub fn bounds_report(
    d: u32,
    h: u32,
    n: u32,
    alpha: u32,
    kappa: KappaChoice,
) -> Result<BoundsReport> {
    let profile = hilbert_profile(d, h, n)?;
    let bf = boundary_functions(&profile);
    let t_table =
        bf.t.iter()
            .enumerate()
            .map(|(k, &t)| TRow {
                i: k + 1,
                t,
                ratio: Slope::from(Ratio::new(t as i64, (k + 1) as i64)),
            })
            .collect();
    let closed = kappa_closed(n as u64, alpha, d, h);
    let kappa = match kappa {
        KappaChoice::Fixed(k) => k,
        KappaChoice::Auto => auto_kappa(&profile, alpha).unwrap_or(1),
    };
    Ok(BoundsReport {
        d,
        h,
        n,
        alpha,
        rank: profile.rank(),
        multiplicities: profile.multiplicities(),
        m: bf.m,
        t_table,
        c_exact: c_from_boundary(&bf),
        c1: c1_closed(d, h),
        n_threshold: (closed.kappa >= 0).then(|| n_threshold(closed.kappa as u64, alpha, d, h)),
        kappa_closed: closed,
        hypotheses: proposition_hypotheses(&profile, alpha, kappa),
    })
}

/// One line of the exact-versus-closed comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub d: u32,
    pub h: u32,
    pub n: u32,
    pub exact: Slope,
    /// `c_1·n^{1/(d+1)} - 1`.
    pub closed: f64,
    pub difference: f64,
    pub closed_exceeds_exact: bool,
}

pub fn compare_c(d_list: &[u32], h_list: &[u32], n_max: u32) -> Result<Vec<CompareRow>> {
    if d_list.is_empty() || h_list.is_empty() || n_max == 0 {
        return Err(Error::Config(
            "d-list, h-list and n-max must be nonempty".into(),
        ));
    }
    let mut rows = Vec::new();
    for &d in d_list {
        for &h in h_list {
            for n in 1..=n_max {
                let exact = c_exact(&hilbert_profile(d, h, n)?).value;
                let closed = c1_closed(d, h) * (n as f64).powf(1.0 / (d as f64 + 1.0)) - 1.0;
                rows.push(CompareRow {
                    d,
                    h,
                    n,
                    exact,
                    closed,
                    difference: closed - exact.to_f64(),
                    closed_exceeds_exact: closed > exact.to_f64(),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(n: u32, a: &[u32]) -> DivisorProfile {
        DivisorProfile::new(n, a.to_vec()).unwrap()
    }

    fn q(a: i64, b: i64) -> Slope {
        Slope::new(a, b).unwrap()
    }

    #[test]
    fn boundary_examples() {
        let bf = boundary_functions(&prof(3, &[3, 3, 2, 2, 1, 1]));
        assert_eq!(bf.b, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(&bf.prefix[1..], &[0, 0, 1, 2, 4, 6]);
        assert_eq!(bf.m, 2);
        assert_eq!(bf.t, vec![2, 2, 2, 3, 4, 6]);

        let bf = boundary_functions(&prof(4, &[4, 4, 4]));
        assert!(bf.b.iter().all(|&b| b == 0));
        assert!(bf.t.iter().all(|&t| t == bf.m));

        let bf = boundary_functions(&prof(2, &[0]));
        assert_eq!((bf.b.clone(), bf.m, bf.t.clone()), (vec![2], 1, vec![1]));
    }

    #[test]
    fn c_exact_examples() {
        // T(i)/i = 2, 1, 2/3, 3/4, 4/5, 1
        let c = c_exact(&prof(3, &[3, 3, 2, 2, 1, 1]));
        assert_eq!((c.value, c.argmin, c.capped), (q(2, 3), 3, false));
        let c = c_exact(&prof(2, &[2, 2]));
        assert_eq!((c.value, c.argmin), (q(1, 2), 2));
        let c = c_exact(&prof(2, &[0]));
        assert_eq!(c.value, q(1, 1));
        // level 1 with a single trivial summand: T(1) = 1 ties with the cap
        let c = c_exact(&prof(1, &[0]));
        assert_eq!((c.value, c.capped), (q(1, 1), false));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(
            hilbert_profile(1, 2, 3).unwrap().exponents(),
            &[3, 3, 2, 2, 1, 1]
        );
        assert_eq!(hilbert_profile(1, 1, 1).unwrap().exponents(), &[1]);
        assert_eq!(hilbert_profile(2, 1, 2).unwrap().exponents(), &[2, 1, 1, 1]);
        assert_eq!(hilbert_profile(2, 3, 4).unwrap().rank(), 48);
        assert_eq!(
            hilbert_profile_truncated(1, 1, 12, 8).unwrap().exponents(),
            &[12, 11, 10, 9, 8, 7, 6, 5]
        );
        assert!(hilbert_profile(0, 1, 1).is_err());
    }

    #[test]
    fn c1_examples() {
        assert!((c1_closed(1, 1) - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((c1_closed(2, 1) - 0.961_500).abs() < 5e-7);
        assert!((c1_closed(1, 4) - 1.060_660).abs() < 5e-7);
        // (1/3)^{2/3}·2 evaluated independently
        let direct = 2.0 * (1.0f64 / 9.0).cbrt();
        assert!((c1_closed(2, 1) - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn kappa_and_threshold_examples() {
        assert_eq!(kappa_closed(100, 0, 1, 1).kappa, 13);
        assert_eq!(kappa_closed(1, 5, 1, 1).kappa, -15);
        assert!(kappa_closed(100, 5, 1, 1).kappa < 0);
        assert_eq!(n_threshold(13, 0, 1, 1).n, 99);
        assert_eq!(n_threshold(0, 0, 1, 1).n, 1);
        for n in 1..200 {
            for alpha in 0..3 {
                let k = kappa_closed(n, alpha, 1, 1);
                if k.kappa >= 0 && !k.near_boundary {
                    let t = n_threshold(k.kappa as u64, alpha, 1, 1);
                    assert!(kappa_closed(t.n, alpha, 1, 1).kappa >= k.kappa);
                }
            }
        }
    }

    #[test]
    fn boundary_flag_on_exact_ties() {
        // c_1·√8 = 4 exactly for d = h = 1
        assert!(kappa_closed(8, 0, 1, 1).near_boundary);
        assert!(!kappa_closed(100, 0, 1, 1).near_boundary);
    }

    #[test]
    fn hypothesis_examples() {
        let p = prof(3, &[3, 3, 2, 2, 1, 1]);
        let r = proposition_hypotheses(&p, 1, 1);
        assert!(r.kappa_in_range);
        assert!(!r.passed);
        let top = r.levels.iter().find(|l| l.nprime == 3).unwrap();
        assert_eq!(top.c, q(2, 3));
        assert!(!top.holds);

        let r = proposition_hypotheses(&p, 1, 2);
        assert_eq!(r.reason.as_deref(), Some("kappa-range"));

        let flat = hilbert_profile(1, 1, 6).unwrap();
        let r = proposition_hypotheses(&flat, 0, 6);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.levels.len(), 6);
    }

    #[test]
    fn auto_kappa_on_default_profile() {
        let p = hilbert_profile_truncated(1, 1, 12, 8).unwrap();
        assert_eq!(auto_kappa(&p, 1), Some(1));
        assert_eq!(auto_kappa(&prof(3, &[3, 3, 2, 2, 1, 1]), 1), None);
    }

    #[test]
    fn kappa_choice_parsing() {
        assert_eq!("auto".parse::<KappaChoice>().unwrap(), KappaChoice::Auto);
        assert_eq!("4".parse::<KappaChoice>().unwrap(), KappaChoice::Fixed(4));
        assert!("four".parse::<KappaChoice>().is_err());
        let v: KappaChoice = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(v, KappaChoice::Auto);
        let v: KappaChoice = serde_json::from_str("3").unwrap();
        assert_eq!(v, KappaChoice::Fixed(3));
        assert_eq!(
            serde_json::to_string(&KappaChoice::Auto).unwrap(),
            "\"auto\""
        );
    }

    #[test]
    fn bounds_report_examples() {
        let r = bounds_report(1, 2, 3, 1, KappaChoice::Auto).unwrap();
        assert_eq!(r.c_exact.value, q(2, 3));
        assert!(!r.hypotheses.passed);
        let r = bounds_report(1, 1, 100, 0, KappaChoice::Auto).unwrap();
        assert_eq!(r.kappa_closed.kappa, 13);
        let r = bounds_report(2, 1, 2, 0, KappaChoice::Fixed(1)).unwrap();
        assert_eq!(r.multiplicities, vec![1, 3]);
        assert_eq!(r.rank, 4);
    }

    #[test]
    fn compare_rows() {
        let rows = compare_c(&[1], &[1, 2], 3).unwrap();
        let r = rows.iter().find(|r| (r.d, r.h, r.n) == (1, 2, 3)).unwrap();
        assert_eq!(r.exact, q(2, 3));
        assert!((r.closed - 1.0908).abs() < 1e-3);
        assert!(r.closed_exceeds_exact);
        let r = rows.iter().find(|r| (r.d, r.h, r.n) == (1, 1, 1)).unwrap();
        assert_eq!(r.exact, q(1, 1));
        assert!((r.closed - 0.41421356).abs() < 1e-6);
        assert!(!r.closed_exceeds_exact);
        assert!(compare_c(&[], &[1], 3).is_err());
    }
}
