//! Randomized instances of congruent operator pairs, and the trial runners
//! that check eigenvalue congruence and slope-multiplicity constancy on
//! them.
//!
//! All instances use the adapted basis: `K = ⊕ p^{a_j} Z e_j`. An operator
//! `ξ` satisfies `ξ(K) ⊂ p^n L` when column `j` is divisible by
//! `p^{n-a_j}`. A second operator `ξ' = ξ + Δ` induces the same map on
//! `L/K` when `Δ` maps `L` into `K`, i.e. row `i` of `Δ` is divisible by
//! `p^{a_i}`.
//!
//! # Seeds
//!
//! Trial `i` of an experiment with master seed `s` draws from a ChaCha8
//! stream seeded with `splitmix64(s + (i + 1)·0x9E3779B97F4A7C15)`
//! (wrapping arithmetic), where `splitmix64` is the standard finalizer
//! `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//! z *= 0x94D049BB133111EB; z ^= z >> 31`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    auto_kappa, constancy_bound, hilbert_profile_truncated, proposition_hypotheses, KappaChoice,
};
use crate::error::{Error, Result};
use crate::lattice::{check_xi_condition, DivisorProfile};
use crate::matrix::{big_entry, big_vec, IntMatrix};
use crate::newton::{
    char_poly, commuting_eigenvalue, eigenvector_mod, hensel_slope_root, newton_polygon,
    slope_multiplicity, PolygonSlope, SlopeSegment,
};
use crate::padic::{congruence_margin, congruent_mod_power, is_unit, Prime, Slope};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master_seed: u64, trial_index: u32) -> u64 {
    splitmix64(master_seed.wrapping_add((trial_index as u64 + 1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    PolynomialPsi,
    Planted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSource {
    Explicit(DivisorProfile),
    Hilbert {
        d: u32,
        h: u32,
        n: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_rank: Option<usize>,
    },
}

impl ProfileSource {
    pub fn resolve(&self) -> Result<DivisorProfile> {
        match self {
            ProfileSource::Explicit(p) => Ok(p.clone()),
            ProfileSource::Hilbert { d, h, n, max_rank } => {
                hilbert_profile_truncated(*d, *h, *n, max_rank.unwrap_or(usize::MAX))
            }
        }
    }
}

fn default_kappa() -> KappaChoice {
    KappaChoice::Auto
}

fn default_max_attempts() -> u32 {
    64
}

fn default_entry_bound() -> u32 {
    2
}

fn default_precision_guard() -> u32 {
    8
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: Prime,
    pub profile: ProfileSource,
    pub alpha: u32,
    #[serde(default = "default_kappa")]
    pub kappa: KappaChoice,
    pub trials: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    /// Random entries are `p^{…}·u` with `|u| ≤ p^{entry_bound}`.
    #[serde(default = "default_entry_bound")]
    pub entry_bound: u32,
    #[serde(default = "default_precision_guard")]
    pub precision_guard: u32,
    /// `n'` for constancy runs; `ξ ≡ ξ' mod p^{n'}`. Defaults to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congruence_level: Option<u32>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The default proposition run: `p = 3`, tensor profile `(d, h, n) =
    /// (1, 1, 12)` truncated to rank 8, `α = 1`, automatic `κ`, 100 trials.
    pub fn default_proposition() -> Self {
        ExperimentConfig {
            p: Prime::new(3).expect("3 is prime"),
            profile: ProfileSource::Hilbert {
                d: 1,
                h: 1,
                n: 12,
                max_rank: Some(8),
            },
            alpha: 1,
            kappa: KappaChoice::Auto,
            trials: 100,
            master_seed: 20_240_601,
            generator: Generator::PolynomialPsi,
            max_attempts: 64,
            entry_bound: 2,
            precision_guard: 8,
            congruence_level: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        let profile = self.profile.resolve()?;
        if self.alpha >= profile.level() {
            return Err(Error::Config(format!(
                "alpha = {} must be below the level n = {}",
                self.alpha,
                profile.level()
            )));
        }
        if let Some(np) = self.congruence_level {
            if np == 0 || np > profile.level() {
                return Err(Error::Config(format!(
                    "congruence_level = {np} must lie in 1..={}",
                    profile.level()
                )));
            }
        }
        if self
            .p
            .get()
            .checked_pow(self.entry_bound)
            .is_none_or(|b| b > i64::MAX as u64)
        {
            return Err(Error::Config(
                "p^entry_bound does not fit in 64 bits".into(),
            ));
        }
        Ok(())
    }
}

/// A pair of operators with isomorphic quotients, and a commuting
/// operator for each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstancePair {
    pub xi: IntMatrix,
    pub xi_prime: IntMatrix,
    pub psi: IntMatrix,
    pub psi_prime: IntMatrix,
    pub profile: DivisorProfile,
    pub seed: u64,
    /// Ascending coefficients of `q` with `ψ = q(ξ)`, `ψ' = q(ξ')`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_big_vec")]
    pub psi_polynomial: Option<Vec<BigInt>>,
    /// Planted `ψ`-eigenvalues on the slope-α eigenvectors of `ξ`, `ξ'`.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_big_pair"
    )]
    pub planted_eigenvalues: Option<(BigInt, BigInt)>,
}

mod opt_big_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "big_vec")] Vec<BigInt>);

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<BigInt>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|x| Wrap(x.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<BigInt>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

mod opt_big_pair {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Pair(
        #[serde(with = "big_entry")] BigInt,
        #[serde(with = "big_entry")] BigInt,
    );

    pub fn serialize<S: Serializer>(
        v: &Option<(BigInt, BigInt)>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|(a, b)| Pair(a.clone(), b.clone()))
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<(BigInt, BigInt)>, D::Error> {
        Ok(Option::<Pair>::deserialize(d)?.map(|p| (p.0, p.1)))
    }
}

fn uniform(rng: &mut ChaCha8Rng, bound: i64) -> BigInt {
    BigInt::from(rng.random_range(-bound..=bound))
}

fn entry_bound_value(p: Prime, entry_bound: u32) -> i64 {
    p.get().pow(entry_bound) as i64
}

/// Random `ξ` with column `j` divisible by `p^{n-a_j}`.
pub fn gen_xi(
    profile: &DivisorProfile,
    p: Prime,
    entry_bound: u32,
    rng: &mut ChaCha8Rng,
) -> IntMatrix {
    let r = profile.rank();
    let n = profile.level();
    let bound = entry_bound_value(p, entry_bound);
    let scales: Vec<BigInt> = profile.exponents().iter().map(|&a| p.pow(n - a)).collect();
    let mut xi = IntMatrix::zero(r);
    for i in 0..r {
        for (j, scale) in scales.iter().enumerate() {
            xi.set(i, j, scale * uniform(rng, bound));
        }
    }
    xi
}

/// `ξ' = ξ + Δ` with `Δ_{ij}` divisible by `p^{max(a_i, n - a_j, extra)}`.
pub fn gen_congruent_pair(
    xi: &IntMatrix,
    profile: &DivisorProfile,
    p: Prime,
    extra_level: u32,
    entry_bound: u32,
    rng: &mut ChaCha8Rng,
) -> IntMatrix {
    let r = profile.rank();
    let n = profile.level();
    let a = profile.exponents();
    let bound = entry_bound_value(p, entry_bound);
    let mut out = xi.clone();
    for i in 0..r {
        for j in 0..r {
            let e = a[i].max(n - a[j]).max(extra_level);
            let delta = p.pow(e) * uniform(rng, bound);
            out.set(i, j, xi.get(i, j) + delta);
        }
    }
    out
}

/// Random integer polynomial of degree below `r`, ascending coefficients.
pub fn gen_polynomial(r: usize, p: Prime, entry_bound: u32, rng: &mut ChaCha8Rng) -> Vec<BigInt> {
    let bound = entry_bound_value(p, entry_bound);
    (0..r).map(|_| uniform(rng, bound)).collect()
}

/// `(ψ, ψ') = (q(ξ), q(ξ'))` for one random `q`.
pub fn gen_polynomial_psi(
    xi: &IntMatrix,
    xi_prime: &IntMatrix,
    p: Prime,
    entry_bound: u32,
    rng: &mut ChaCha8Rng,
) -> (IntMatrix, IntMatrix, Vec<BigInt>) {
    let q = gen_polynomial(xi.dim(), p, entry_bound, rng);
    (xi.eval_poly(&q), xi_prime.eval_poly(&q), q)
}

/// A unimodular matrix and its inverse.
#[derive(Clone, Debug)]
pub struct Unimodular {
    pub matrix: IntMatrix,
    pub inverse: IntMatrix,
}

/// Product of `steps` random elementary transvections `I + c·E_{ij}`.
///
/// Above the diagonal (`i < j`) the multiplier is scaled by
/// `p^{column_shift[j] - column_shift[i]}` when positive, and every
/// multiplier is additionally scaled by `p^{min_level}`. With a
/// nondecreasing `column_shift` the result preserves the lattice
/// `⊕ p^{-column_shift[j]} Z e_j`.
pub fn gen_unimodular(
    r: usize,
    p: Prime,
    column_shift: &[u32],
    min_level: u32,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Unimodular {
    let mut matrix = IntMatrix::identity(r);
    let mut inverse = IntMatrix::identity(r);
    if r < 2 {
        return Unimodular { matrix, inverse };
    }
    let base = p.pow(min_level);
    for _ in 0..steps {
        let i = rng.random_range(0..r);
        let mut j = rng.random_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let mut c =
            BigInt::from(rng.random_range(1..=2i64) * if rng.random_bool(0.5) { 1 } else { -1 });
        if i < j && column_shift[j] > column_shift[i] {
            c *= p.pow(column_shift[j] - column_shift[i]);
        }
        c *= &base;
        // matrix ← matrix·(I + c E_ij): column j += c·column i
        for row in 0..r {
            let v = matrix.get(row, j) + &c * matrix.get(row, i);
            matrix.set(row, j, v);
        }
        // inverse ← (I - c E_ij)·inverse: row i -= c·row j
        for col in 0..r {
            let v = inverse.get(i, col) - &c * inverse.get(j, col);
            inverse.set(i, col, v);
        }
    }
    Unimodular { matrix, inverse }
}

fn random_unit(p: Prime, entry_bound: u32, rng: &mut ChaCha8Rng) -> BigInt {
    let bound = entry_bound_value(p, entry_bound).max(1);
    loop {
        let u = BigInt::from(rng.random_range(1..=bound));
        if is_unit(&u, p) {
            return if rng.random_bool(0.5) { u } else { -u };
        }
    }
}

/// Planted instance: `ξ = U·D·U⁻¹`, `ψ = U·E·U⁻¹` with `D`, `E` diagonal
/// and exactly one diagonal entry of `D` of valuation `alpha`; the primed
/// pair uses `U·V` with `V ≡ I` and `D' ≡ D`, `E' ≡ E` mod `p^n`.
///
/// `U` is drawn from the unimodular matrices that preserve
/// `⊕ p^{-(n-a_j)} Z e_j`, and every `D_jj` has valuation at least
/// `n - a_j`, which makes `ξ(K) ⊂ p^n L` hold by construction.
pub fn gen_planted_instance(
    profile: &DivisorProfile,
    p: Prime,
    alpha: u32,
    entry_bound: u32,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<InstancePair> {
    let r = profile.rank();
    let n = profile.level();
    let shift: Vec<u32> = profile.exponents().iter().map(|&a| n - a).collect();
    let eligible: Vec<usize> = (0..r).filter(|&j| shift[j] <= alpha).collect();
    if eligible.is_empty() {
        return Err(Error::Config(format!(
            "no basis direction admits slope {alpha}: every column shift exceeds it"
        )));
    }
    let chosen = eligible[rng.random_range(0..eligible.len())];
    let bound = entry_bound_value(p, entry_bound);
    let pn = p.pow(n);

    let mut d = Vec::with_capacity(r);
    let mut e = Vec::with_capacity(r);
    for (j, &s) in shift.iter().enumerate() {
        let valuation = if j == chosen {
            alpha
        } else {
            let options: Vec<u32> = (s..=s + 3).filter(|&v| v != alpha).collect();
            options[rng.random_range(0..options.len())]
        };
        d.push(p.pow(valuation) * random_unit(p, entry_bound, rng));
        e.push(uniform(rng, bound));
    }
    let d_prime: Vec<BigInt> = d.iter().map(|x| x + &pn * uniform(rng, bound)).collect();
    let e_prime: Vec<BigInt> = e.iter().map(|x| x + &pn * uniform(rng, bound)).collect();

    let u = gen_unimodular(r, p, &shift, 0, 3 * r, rng);
    let v = gen_unimodular(r, p, &shift, n, r, rng);
    let uv = &u.matrix * &v.matrix;
    let uv_inv = &v.inverse * &u.inverse;

    let conj =
        |m: &IntMatrix, diag: &[BigInt], inv: &IntMatrix| &(m * &IntMatrix::diagonal(diag)) * inv;
    Ok(InstancePair {
        xi: conj(&u.matrix, &d, &u.inverse),
        psi: conj(&u.matrix, &e, &u.inverse),
        xi_prime: conj(&uv, &d_prime, &uv_inv),
        psi_prime: conj(&uv, &e_prime, &uv_inv),
        profile: profile.clone(),
        seed,
        psi_polynomial: None,
        planted_eigenvalues: Some((e[chosen].clone(), e_prime[chosen].clone())),
    })
}

/// Structural checks every generated pair must pass: the `ξ(K) ⊂ p^n L`
/// condition on both operators, quotient agreement of `ξ, ξ'` and of
/// `ψ, ψ'` (row `i` of the difference divisible by `p^{a_i}`), and exact
/// commutation.
pub fn check_instance(inst: &InstancePair, p: Prime) -> Result<bool> {
    let prof = &inst.profile;
    let quotient_agrees = |x: &IntMatrix, y: &IntMatrix| {
        let diff = x - y;
        prof.exponents().iter().enumerate().all(|(i, &a)| {
            let m = p.pow(a);
            diff.row(i).iter().all(|v| v.is_multiple_of(&m))
        })
    };
    Ok(check_xi_condition(&inst.xi, prof, p)?
        && check_xi_condition(&inst.xi_prime, prof, p)?
        && quotient_agrees(&inst.xi, &inst.xi_prime)
        && quotient_agrees(&inst.psi, &inst.psi_prime)
        && inst.xi.commutes_with(&inst.psi)
        && inst.xi_prime.commutes_with(&inst.psi_prime))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Accepted,
    Rejected,
    Violation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Hypotheses,
    NotSimple,
    NoInstance,
    Precision,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Hypotheses => "hypotheses",
            RejectReason::NotSimple => "not-simple",
            RejectReason::NoInstance => "no-instance",
            RejectReason::Precision => "precision",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeMismatch {
    pub slope: PolygonSlope,
    pub multiplicity: usize,
    pub multiplicity_prime: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: u32,
    pub seed: u64,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub attempts: u32,
    pub alpha: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    pub census_xi: Vec<SlopeSegment>,
    pub census_xi_prime: Vec<SlopeSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_big")]
    pub lambda: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_big")]
    pub lambda_prime: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_big")]
    pub a: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_big")]
    pub a_prime: Option<BigInt>,
    /// Precision (exponent of `p`) to which `a` and `a'` are both known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    /// `v_p(a - a')`, capped at `precision`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub congruence_margin: Option<u32>,
    /// `a` matches the independent prediction (`q(λ)` or the planted value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agrees: Option<bool>,
    /// Constancy runs: slope bound `c(L/(K + p^{n'}L))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_bound: Option<Slope>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub mismatches: Vec<SlopeMismatch>,
    /// Constancy runs: mismatches at or above the bound (outside the claim).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub informational: Vec<SlopeMismatch>,
    /// Full instance, embedded for violations and oracle failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstancePair>,
}

mod opt_big {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "big_entry")] BigInt);

    pub fn serialize<S: Serializer>(
        v: &Option<BigInt>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|x| Wrap(x.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigInt>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl TrialReport {
    fn new(index: u32, seed: u64, alpha: u32, kappa: Option<u32>) -> Self {
        TrialReport {
            index,
            seed,
            status: TrialStatus::Accepted,
            reason: None,
            detail: None,
            attempts: 0,
            alpha,
            kappa,
            census_xi: Vec::new(),
            census_xi_prime: Vec::new(),
            lambda: None,
            lambda_prime: None,
            a: None,
            a_prime: None,
            precision: None,
            congruence_margin: None,
            oracle_agrees: None,
            slope_bound: None,
            mismatches: Vec::new(),
            informational: Vec::new(),
            instance: None,
        }
    }

    fn reject(mut self, reason: RejectReason, detail: impl Into<String>) -> Self {
        self.status = TrialStatus::Rejected;
        self.reason = Some(reason);
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Proposition,
    Constancy,
}

/// Configuration resolved once per experiment.
#[derive(Clone, Debug)]
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    pub profile: DivisorProfile,
    /// `None` when no `κ` satisfies the hypotheses.
    pub kappa: Option<u32>,
    pub hypotheses_pass: bool,
    pub working_precision: u32,
}

impl PreparedExperiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let profile = config.profile.resolve()?;
        let (kappa, hypotheses_pass) = match config.kappa {
            KappaChoice::Auto => {
                let k = auto_kappa(&profile, config.alpha);
                (k, k.is_some())
            }
            KappaChoice::Fixed(k) => (
                Some(k),
                k >= 1 && proposition_hypotheses(&profile, config.alpha, k).passed,
            ),
        };
        let working_precision =
            profile.level() + 2 * config.alpha + kappa.unwrap_or(0) + config.precision_guard;
        Ok(PreparedExperiment {
            config: config.clone(),
            profile,
            kappa,
            hypotheses_pass,
            working_precision,
        })
    }

    fn generate(&self, seed: u64, extra_level: u32, rng: &mut ChaCha8Rng) -> Result<InstancePair> {
        let cfg = &self.config;
        match cfg.generator {
            Generator::PolynomialPsi => {
                let xi = gen_xi(&self.profile, cfg.p, cfg.entry_bound, rng);
                let xi_prime = gen_congruent_pair(
                    &xi,
                    &self.profile,
                    cfg.p,
                    extra_level,
                    cfg.entry_bound,
                    rng,
                );
                let (psi, psi_prime, q) =
                    gen_polynomial_psi(&xi, &xi_prime, cfg.p, cfg.entry_bound, rng);
                Ok(InstancePair {
                    xi,
                    xi_prime,
                    psi,
                    psi_prime,
                    profile: self.profile.clone(),
                    seed,
                    psi_polynomial: Some(q),
                    planted_eigenvalues: None,
                })
            }
            Generator::Planted => {
                gen_planted_instance(&self.profile, cfg.p, cfg.alpha, cfg.entry_bound, seed, rng)
            }
        }
    }
}

/// One trial of the eigenvalue-congruence check.
pub fn run_proposition_trial(prep: &PreparedExperiment, trial_index: u32) -> TrialReport {
    let cfg = &prep.config;
    let p = cfg.p;
    let seed = trial_seed(cfg.master_seed, trial_index);
    let mut report = TrialReport::new(trial_index, seed, cfg.alpha, prep.kappa);

    let kappa = match prep.kappa {
        Some(k) if prep.hypotheses_pass => k,
        _ => {
            return report.reject(
                RejectReason::Hypotheses,
                "no kappa satisfies the hypotheses",
            )
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha_slope = PolygonSlope::from(cfg.alpha as i64);
    let mut found = None;
    let mut last_failure = RejectReason::NotSimple;
    for attempt in 1..=cfg.max_attempts {
        report.attempts = attempt;
        let inst = match prep.generate(seed, 0, &mut rng) {
            Ok(inst) => inst,
            Err(e) => return report.reject(RejectReason::NoInstance, e.to_string()),
        };
        if !check_instance(&inst, p).unwrap_or(false) {
            last_failure = RejectReason::NoInstance;
            continue;
        }
        let np = newton_polygon(&char_poly(&inst.xi), p);
        let np_prime = newton_polygon(&char_poly(&inst.xi_prime), p);
        report.census_xi = np.census();
        report.census_xi_prime = np_prime.census();
        if slope_multiplicity(&np, alpha_slope) == 1
            && slope_multiplicity(&np_prime, alpha_slope) == 1
        {
            found = Some(inst);
            break;
        }
        last_failure = RejectReason::NotSimple;
    }
    let Some(inst) = found else {
        let detail = format!("no admissible instance in {} attempts", cfg.max_attempts);
        return report.reject(last_failure, detail);
    };

    let n = prep.working_precision;
    let side = |xi: &IntMatrix, psi: &IntMatrix| -> Result<(BigInt, BigInt, u32)> {
        let root = hensel_slope_root(&char_poly(xi), p, cfg.alpha, n)?;
        let prec = root.reliable_precision();
        let f = eigenvector_mod(xi, &root.lambda, p, prec)?;
        let a = commuting_eigenvalue(psi, &f, p, prec)?;
        Ok((root.lambda, a, prec))
    };
    let ((lambda, a, prec), (lambda_p, a_p, prec_p)) = match (
        side(&inst.xi, &inst.psi),
        side(&inst.xi_prime, &inst.psi_prime),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            report.instance = Some(inst);
            return report.reject(RejectReason::Precision, e.to_string());
        }
    };
    let precision = prec.min(prec_p);
    report.lambda = Some(lambda.clone());
    report.lambda_prime = Some(lambda_p.clone());
    report.a = Some(a.clone());
    report.a_prime = Some(a_p.clone());
    report.precision = Some(precision);

    let oracle = match (&inst.psi_polynomial, &inst.planted_eigenvalues) {
        (Some(q), _) => {
            let predict = |l: &BigInt| q.iter().rev().fold(BigInt::zero(), |acc, c| acc * l + c);
            congruent_mod_power(&a, &predict(&lambda), p, prec)
                && congruent_mod_power(&a_p, &predict(&lambda_p), p, prec_p)
        }
        (None, Some((e, e_p))) => {
            congruent_mod_power(&a, e, p, prec) && congruent_mod_power(&a_p, e_p, p, prec_p)
        }
        (None, None) => true,
    };
    report.oracle_agrees = Some(oracle);

    if precision < kappa {
        report.instance = Some(inst);
        return report.reject(
            RejectReason::Precision,
            format!("eigenvalues known only mod p^{precision}, below kappa = {kappa}"),
        );
    }
    let margin = congruence_margin(&a, &a_p, p, precision);
    report.congruence_margin = Some(margin);
    if margin < kappa {
        report.status = TrialStatus::Violation;
    }
    if margin < kappa || !oracle {
        report.instance = Some(inst);
    }
    report
}

fn multiplicity_map(census: &[SlopeSegment]) -> BTreeMap<PolygonSlope, usize> {
    census.iter().map(|s| (s.slope, s.length)).collect()
}

/// One trial of the slope-multiplicity constancy check.
pub fn run_constancy_trial(prep: &PreparedExperiment, trial_index: u32) -> TrialReport {
    let cfg = &prep.config;
    let p = cfg.p;
    let seed = trial_seed(cfg.master_seed, trial_index);
    let mut report = TrialReport::new(trial_index, seed, cfg.alpha, None);
    let nprime = cfg.congruence_level.unwrap_or(prep.profile.level());
    let bound = constancy_bound(&prep.profile, nprime)
        .expect("validated congruence level")
        .value;
    report.slope_bound = Some(bound);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = None;
    for attempt in 1..=cfg.max_attempts {
        report.attempts = attempt;
        let inst = match prep.generate(seed, nprime, &mut rng) {
            Ok(inst) => inst,
            Err(e) => return report.reject(RejectReason::NoInstance, e.to_string()),
        };
        let congruent = inst
            .xi
            .entries()
            .iter()
            .zip(inst.xi_prime.entries())
            .all(|(x, y)| congruent_mod_power(x, y, p, nprime));
        if congruent && check_instance(&inst, p).unwrap_or(false) {
            found = Some(inst);
            break;
        }
    }
    let Some(inst) = found else {
        return report.reject(
            RejectReason::NoInstance,
            "generated pairs failed structural checks",
        );
    };

    report.census_xi = newton_polygon(&char_poly(&inst.xi), p).census();
    report.census_xi_prime = newton_polygon(&char_poly(&inst.xi_prime), p).census();
    let left = multiplicity_map(&report.census_xi);
    let right = multiplicity_map(&report.census_xi_prime);
    let slopes: std::collections::BTreeSet<PolygonSlope> =
        left.keys().chain(right.keys()).copied().collect();
    for slope in slopes {
        let (m, m_p) = (
            left.get(&slope).copied().unwrap_or(0),
            right.get(&slope).copied().unwrap_or(0),
        );
        if m == m_p {
            continue;
        }
        let entry = SlopeMismatch {
            slope,
            multiplicity: m,
            multiplicity_prime: m_p,
        };
        match slope {
            PolygonSlope::Finite(s) if s < bound => report.mismatches.push(entry),
            _ => report.informational.push(entry),
        }
    }
    if !report.mismatches.is_empty() {
        report.status = TrialStatus::Violation;
        report.instance = Some(inst);
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u32,
    pub accepted: u32,
    pub rejected: BTreeMap<String, u32>,
    pub violations: u32,
    pub oracle_mismatches: u32,
    /// Smallest `v_p(a - a')` over accepted proposition trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<u32>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub config: ExperimentConfig,
    pub profile: DivisorProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    pub working_precision: u32,
    pub summary: Summary,
    pub trials: Vec<TrialReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Run every trial of `config`. `jobs > 1` spreads trials over a thread
/// pool; the report is the same byte for byte either way.
pub fn run_experiment(
    config: &ExperimentConfig,
    mode: Mode,
    jobs: usize,
) -> Result<ExperimentReport> {
    let prep = PreparedExperiment::new(config)?;
    let run = |i: u32| match mode {
        Mode::Proposition => run_proposition_trial(&prep, i),
        Mode::Constancy => run_constancy_trial(&prep, i),
    };
    let mut trials: Vec<TrialReport> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| (0..config.trials).into_par_iter().map(run).collect())
    } else {
        (0..config.trials).map(run).collect()
    };
    trials.sort_by_key(|t| t.index);

    let mut summary = Summary {
        trials: config.trials,
        accepted: 0,
        rejected: BTreeMap::new(),
        violations: 0,
        oracle_mismatches: 0,
        min_margin: None,
        warnings: Vec::new(),
    };
    for t in &trials {
        match t.status {
            TrialStatus::Accepted => summary.accepted += 1,
            TrialStatus::Violation => summary.violations += 1,
            TrialStatus::Rejected => {
                let key = t.reason.map_or("unknown", RejectReason::as_str).to_string();
                *summary.rejected.entry(key).or_default() += 1;
            }
        }
        if t.oracle_agrees == Some(false) {
            summary.oracle_mismatches += 1;
        }
        if t.status != TrialStatus::Rejected {
            if let Some(m) = t.congruence_margin {
                summary.min_margin = Some(summary.min_margin.map_or(m, |x| x.min(m)));
            }
        }
    }
    if mode == Mode::Proposition && !prep.hypotheses_pass {
        summary.warnings.push(format!(
            "hypotheses fail for alpha = {} with kappa = {}; all {} trials rejected",
            config.alpha,
            prep.kappa.map_or("none".to_string(), |k| k.to_string()),
            config.trials
        ));
    }
    if summary.accepted == 0 && summary.violations == 0 {
        summary.warnings.push("no trial was accepted".to_string());
    }

    Ok(ExperimentReport {
        mode,
        config: config.clone(),
        profile: prep.profile.clone(),
        kappa: if mode == Mode::Proposition {
            prep.kappa
        } else {
            None
        },
        working_precision: prep.working_precision,
        summary,
        trials,
    })
}
