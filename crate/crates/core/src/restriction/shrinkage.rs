use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::algebra::Rational;

use super::{sample_survivors, RestrictionError};

fn binom(n: u32, r: u32) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut out = BigInt::one();
    for i in 0..r {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

fn check_range(m: u32, k: u32, l: u32) -> Result<(), RestrictionError> {
    if l == 0 || l > k || k > m {
        return Err(RestrictionError::Parameters(format!(
            "need 1 <= l <= k <= m, got l={l}, k={k}, m={m}"
        )));
    }
    Ok(())
}

/// Whether `m ≥ 16` and `k ≤ m / (4 log₂ m)`, the range the shrinkage
/// lemma is stated for.
fn in_lemma_range(m: u32, k: u32) -> bool {
    m >= 16 && (k as f64) <= m as f64 / (4.0 * (m as f64).log2())
}

/// `1/m^ℓ`: the branch for monomials with many fixed variables.
pub fn tail_bound(m: u32, l: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(m).pow(l))
}

/// `C(ℓ′, ℓ) · C(m−ℓ, k−ℓ) / C(m, k)`: some `ℓ` of the `ℓ′` indices all
/// survive.
pub fn union_bound(m: u32, k: u32, l: u32, l_prime: u32) -> Rational {
    Rational::new(binom(l_prime, l) * binom(m - l, k - l), binom(m, k))
}

/// Bound for a monomial of domain-degree `ℓ′`: the tail branch applies
/// when `ℓ′ − k > ℓ log₂ m`, the union branch always.
fn composite(m: u32, k: u32, l: u32, l_prime: u32) -> (Rational, bool) {
    let union = union_bound(m, k, l, l_prime);
    let tail_applies = l_prime as f64 - k as f64 > l as f64 * (m as f64).log2();
    let b = if tail_applies {
        union.clone().min(tail_bound(m, l))
    } else {
        union
    };
    (b.min(Rational::one()), tail_applies)
}

/// Worst case of the composite over every domain-degree `ℓ ≤ ℓ′ ≤ m`,
/// capped at 1.
pub fn default_bound(m: u32, k: u32, l: u32) -> Rational {
    (l..=m)
        .map(|lp| composite(m, k, l, lp).0)
        .max()
        .unwrap_or_else(Rational::one)
}

/// `1 / bound_fn(m, k, ℓ)`.
pub fn size_lower_bound(
    m: u32,
    k: u32,
    l: u32,
    bound_fn: impl Fn(u32, u32, u32) -> Rational,
) -> Result<Rational, RestrictionError> {
    check_range(m, k, l)?;
    let b = bound_fn(m, k, l);
    if b <= Rational::zero() || b > Rational::one() {
        return Err(RestrictionError::InvalidBound(b.to_string()));
    }
    Ok(b.recip())
}

/// Exact probability that a monomial with one variable on each of `ℓ′`
/// domain indices survives with domain-degree at least `ℓ`: `j` of its
/// indices land in `D` (hypergeometric) and the other `ℓ′ − j` coins all
/// come up 1.
pub fn exact_survival(m: u32, k: u32, l: u32, l_prime: u32) -> Rational {
    let total = binom(m, k);
    let mut p = Rational::zero();
    for j in l..=k.min(l_prime) {
        let ways = binom(l_prime, j) * binom(m - l_prime, k - j);
        p += Rational::new(ways, total.clone() * BigInt::from(2).pow(l_prime - j));
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundComponents {
    pub tail: f64,
    pub union: f64,
    pub tail_applies: bool,
    /// The bound for this `ℓ′`.
    pub composite: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageReport {
    pub m: u32,
    pub k: u32,
    pub l: u32,
    pub l_prime: u32,
    pub trials: u64,
    pub seed: u64,
    pub survived: u64,
    pub empirical_survival: f64,
    /// Binomial standard error of `empirical_survival`.
    pub sigma: f64,
    pub exact_survival: f64,
    pub bound_components: BoundComponents,
    /// [`default_bound`], the worst case over all `ℓ′`.
    pub default_bound: f64,
    pub in_lemma_range: bool,
}

/// Restricts the monomial `x_{1,·} ⋯ x_{ℓ′,·}` (by symmetry, any `ℓ′`
/// distinct indices behave alike) and counts how often it stays nonzero
/// with domain-degree at least `ℓ`.
pub fn shrinkage_experiment(
    m: u32,
    k: u32,
    l: u32,
    l_prime: u32,
    trials: u64,
    seed: u64,
) -> Result<ShrinkageReport, RestrictionError> {
    check_range(m, k, l)?;
    if l_prime > m || trials == 0 {
        return Err(RestrictionError::Parameters(format!(
            "need l' <= m and trials > 0, got l'={l_prime}, m={m}, trials={trials}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut survived = 0u64;
    for _ in 0..trials {
        let d = sample_survivors(&mut rng, m, k);
        let mut degree = 0;
        let mut alive = true;
        for i in 1..=l_prime {
            if d.binary_search(&i).is_ok() {
                degree += 1;
            } else if !rng.gen::<bool>() {
                alive = false;
            }
        }
        if alive && degree >= l {
            survived += 1;
        }
    }
    let p = survived as f64 / trials as f64;
    let (c, tail_applies) = composite(m, k, l, l_prime);
    let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
    Ok(ShrinkageReport {
        m,
        k,
        l,
        l_prime,
        trials,
        seed,
        survived,
        empirical_survival: p,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        exact_survival: f(&exact_survival(m, k, l, l_prime)),
        bound_components: BoundComponents {
            tail: f(&tail_bound(m, l)),
            union: f(&union_bound(m, k, l, l_prime)),
            tail_applies,
            composite: f(&c),
        },
        default_bound: f(&default_bound(m, k, l)),
        in_lemma_range: in_lemma_range(m, k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub counts: Vec<u64>,
    pub chi2: f64,
    pub dof: u32,
    pub p_value: f64,
}

/// Pearson test of the per-index survival counts against `trials·k/m`.
/// Cells of a uniform `k`-subset are negatively correlated, which only
/// makes the statistic smaller than under a multinomial null.
pub fn survivor_uniformity(m: u32, k: u32, trials: u64, seed: u64) -> Result<UniformityReport, RestrictionError> {
    if k == 0 || k > m || m < 2 || trials == 0 {
        return Err(RestrictionError::Parameters(format!(
            "need 1 <= k <= m, m >= 2, trials > 0; got k={k}, m={m}, trials={trials}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; m as usize];
    for _ in 0..trials {
        for i in sample_survivors(&mut rng, m, k) {
            counts[i as usize - 1] += 1;
        }
    }
    let expected = trials as f64 * k as f64 / m as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = m - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(UniformityReport {
        counts,
        chi2,
        dof,
        p_value: 1.0 - dist.cdf(chi2),
    })
}
