//! Block counterexamples: coefficient plateaus `c = 1/n^{n+2}` on
//! `[n^n, (n+1)^{n+1} − 1]` and the set `A = ℕ ∩ ∪ [n^n, a·n^n]`, whose upper
//! density is at least δ while the sub-series over `A` converges.
//!
//! Block endpoints are exact big integers; counting never enumerates.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::{ratio_to_f64, PsiFunction};
use crate::series::CoeffSequence;
use crate::sets::IntegerSet;
use crate::summation::CompensatedSum;

/// Default largest block index accepted by the verifiers.
pub const DEFAULT_BLOCK_CAP: u32 = 50;
/// Plateau coefficients are handled as exact rationals up to this block.
pub const EXACT_BLOCK_LIMIT: u32 = 12;
/// Blocks longer than this are weighted through the sandwich bracket.
const DIRECT_SUM_LIMIT: u64 = 1 << 16;

fn pow_self(n: u32) -> BigUint {
    BigUint::from(n).pow(n)
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).ln();
    }
    let shift = bits - 900;
    big_to_f64(&(x >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rigorous rational upper bound for `e`: `Σ_{k≤20} 1/k! + 1/(20!·20)`.
pub fn e_upper_bound() -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for k in 0..=20u32 {
        if k > 0 {
            fact *= k;
        }
        sum += BigRational::new(BigInt::one(), fact.clone());
    }
    sum + BigRational::new(BigInt::one(), fact * 20)
}

#[derive(Debug, Clone)]
pub struct SalatExample {
    pub delta: f64,
    /// `a = 1/(1 − δ)` computed exactly from the binary64 value of δ.
    pub a: BigRational,
    pub coeffs: CoeffSequence,
    /// The part of `A` whose endpoints fit in 64 bits.
    pub set_a: IntegerSet,
    pub sharpness_psi: Option<String>,
    pub cap: u32,
}

/// Plateau index of `m ≥ 1`: the largest `n` with `n^n ≤ m`.
pub fn plateau_index(m: u64) -> u32 {
    let mut n = 1u32;
    while (n as u64 + 1).checked_pow(n + 1).is_some_and(|v| v <= m) {
        n += 1;
    }
    n
}

pub fn salat_example(delta: f64) -> Result<SalatExample> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let d = BigRational::from_float(delta).expect("finite");
    let a = BigRational::one() / (BigRational::one() - d);
    let coeffs = CoeffSequence::from_exact_fn(
        format!("salat:{delta}"),
        |m| {
            let n = plateau_index(m) as f64;
            n.powf(-(n + 2.0))
        },
        |m| {
            let n = plateau_index(m);
            BigRational::new(BigInt::one(), BigInt::from(n).pow(n + 2))
        },
    )?;
    let mut ex = SalatExample {
        delta,
        a,
        coeffs,
        set_a: IntegerSet::naturals(),
        sharpness_psi: None,
        cap: DEFAULT_BLOCK_CAP,
    };
    ex.set_a = ex.u64_set()?;
    Ok(ex)
}

impl SalatExample {
    pub fn with_sharpness(mut self) -> Self {
        self.sharpness_psi = Some("salat-sharpness".into());
        self
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.cap = cap;
        self
    }

    pub fn a_f64(&self) -> f64 {
        ratio_to_f64(&self.a)
    }

    /// Set block `[n^n, ⌊a·n^n⌋]`.
    pub fn block(&self, n: u32) -> (BigUint, BigUint) {
        let lo = pow_self(n);
        let hi = (&self.a * BigRational::from_integer(BigInt::from(lo.clone())))
            .floor()
            .to_integer();
        (lo, hi.to_biguint().expect("positive"))
    }

    /// Coefficient plateau `[n^n, (n+1)^{n+1} − 1]`.
    pub fn plateau(n: u32) -> (BigUint, BigUint) {
        (pow_self(n), pow_self(n + 1) - 1u32)
    }

    /// Union of blocks `1..=n`, with overlapping or touching blocks merged.
    pub fn merged_blocks(&self, n: u32) -> Vec<(BigUint, BigUint)> {
        let mut out: Vec<(BigUint, BigUint)> = Vec::new();
        for j in 1..=n {
            let (lo, hi) = self.block(j);
            match out.last_mut() {
                Some(last) if lo <= &last.1 + 1u32 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        out
    }

    /// `A(x)`, exact, for `x` below the start of block `n + 1`.
    pub fn count_upto(&self, x: &BigUint) -> BigUint {
        let mut n = 1;
        while pow_self(n + 1) <= *x {
            n += 1;
        }
        self.merged_blocks(n)
            .into_iter()
            .filter(|(lo, _)| lo <= x)
            .map(|(lo, hi)| hi.min(x.clone()) - lo + 1u32)
            .sum()
    }

    fn u64_set(&self) -> Result<IntegerSet> {
        let mut blocks = Vec::new();
        let mut horizon = u64::MAX;
        for (lo, hi) in self.merged_blocks(16) {
            match (lo.to_u64(), hi.to_u64()) {
                (Some(l), Some(h)) => blocks.push((l, h)),
                (Some(l), None) => {
                    horizon = l - 1;
                    break;
                }
                _ => break,
            }
        }
        Ok(
            IntegerSet::interval_union(format!("salat-set:{}", self.delta), blocks)?
                .with_horizon(horizon),
        )
    }

    fn check_blocks(&self, n_blocks: u32) -> Result<()> {
        if n_blocks > self.cap {
            return Err(Error::BlockCapExceeded {
                requested: n_blocks as u64,
                cap: self.cap as u64,
            });
        }
        if n_blocks < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 blocks, got {n_blocks}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperCheckpoint {
    pub n: u32,
    /// `⌊a·n^n⌋` as a decimal string.
    pub x: String,
    pub count: String,
    pub ratio: f64,
    /// `A(x)/x ≥ δ`, decided with integers.
    pub meets_delta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerCheckpoint {
    pub n: u32,
    /// `(n+1)^{n+1} − 1`.
    pub y: String,
    pub count: String,
    pub ratio: f64,
    /// `(2a·n^n + 2n)/y`.
    pub finite_bound: f64,
    /// `2a/(e(n+1))`.
    pub asymptotic_bound: f64,
    pub within_finite_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauMass {
    pub n: u32,
    pub full_mass: f64,
    /// `(e−1)/n`.
    pub lower_bound: f64,
    pub exceeds_lower_bound: bool,
    pub sub_mass: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalatReport {
    pub delta: f64,
    pub a: String,
    pub n_blocks: u32,
    pub upper: Vec<UpperCheckpoint>,
    pub lower: Vec<LowerCheckpoint>,
    pub lower_ratios_decreasing: bool,
    pub plateaus: Vec<PlateauMass>,
    pub full_partial_sum: f64,
    /// `(e−1)·Σ_{j≤n} 1/j`.
    pub full_lower_bound: f64,
    pub full_ok: bool,
    pub sub_total: f64,
    /// `3 + a·π²/6`.
    pub sub_bound: f64,
    pub sub_ok: bool,
    /// `(n+1)^{n+1} − n^n > (e−1)·n^{n+1}` for every `n ≤ max(50, n_blocks)`,
    /// using a rational upper bound for `e`.
    pub not_right_ok: bool,
    pub not_right_checked_upto: u32,
}

/// Exact check of `(n+1)^{n+1} − n^n > (e_up − 1)·n^{n+1}`.
pub fn not_right_holds(n: u32, e_up: &BigRational) -> bool {
    let lhs = BigInt::from(pow_self(n + 1)) - BigInt::from(pow_self(n));
    let rhs = (e_up - BigRational::one()) * BigRational::from_integer(BigInt::from(n).pow(n + 1));
    BigRational::from_integer(lhs) > rhs
}

fn exact_ratio(num: &BigUint, den: &BigUint) -> f64 {
    ratio_to_f64(&BigRational::new(
        BigInt::from(num.clone()),
        BigInt::from(den.clone()),
    ))
}

fn overlap(a: &(BigUint, BigUint), b: &(BigUint, BigUint)) -> BigUint {
    let lo = a.0.clone().max(b.0.clone());
    let hi = a.1.clone().min(b.1.clone());
    if lo > hi {
        BigUint::zero()
    } else {
        hi - lo + 1u32
    }
}

/// `count / n^{n+2}`: exact for small plateaus, in the log domain beyond.
fn plateau_mass(n: u32, count: &BigUint) -> (f64, Option<BigRational>) {
    if count.is_zero() {
        return (0.0, Some(BigRational::zero()));
    }
    if n <= EXACT_BLOCK_LIMIT {
        let r = BigRational::new(BigInt::from(count.clone()), BigInt::from(n).pow(n + 2));
        (ratio_to_f64(&r), Some(r))
    } else {
        (
            (big_ln(count) - (n as f64 + 2.0) * (n as f64).ln()).exp(),
            None,
        )
    }
}

pub fn salat_example_verify(ex: &SalatExample, n_blocks: u32) -> Result<SalatReport> {
    ex.check_blocks(n_blocks)?;
    let delta = BigRational::from_float(ex.delta).expect("finite");
    let a = ex.a_f64();
    let e = std::f64::consts::E;

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for n in 1..=n_blocks {
        let (_, x) = ex.block(n);
        let count = ex.count_upto(&x);
        let lhs = BigRational::from_integer(BigInt::from(count.clone()));
        let meets = lhs >= &delta * BigRational::from_integer(BigInt::from(x.clone()));
        upper.push(UpperCheckpoint {
            n,
            ratio: exact_ratio(&count, &x),
            x: x.to_string(),
            count: count.to_string(),
            meets_delta: meets,
        });

        let y = pow_self(n + 1) - 1u32;
        let count = ex.count_upto(&y);
        let ratio = exact_ratio(&count, &y);
        let nn = big_to_f64(&pow_self(n));
        let finite_bound = (2.0 * a * nn + 2.0 * n as f64) / big_to_f64(&y);
        lower.push(LowerCheckpoint {
            n,
            y: y.to_string(),
            count: count.to_string(),
            ratio,
            finite_bound,
            asymptotic_bound: 2.0 * a / (e * (n as f64 + 1.0)),
            within_finite_bound: ratio <= finite_bound * (1.0 + 1e-12),
        });
    }
    let lower_ratios_decreasing = lower.windows(2).skip(1).all(|w| w[1].ratio < w[0].ratio);

    let blocks = ex.merged_blocks(n_blocks);
    let mut plateaus = Vec::new();
    let (mut full_exact, mut sub_exact) = (BigRational::zero(), BigRational::zero());
    let (mut full_log, mut sub_log) = (CompensatedSum::new(), CompensatedSum::new());
    let mut full_ok = true;
    let mut harmonic = 0.0;
    let e_up = e_upper_bound();
    for n in 1..=n_blocks {
        let plateau = SalatExample::plateau(n);
        let len = &plateau.1 - &plateau.0 + 1u32;
        let in_a: BigUint = blocks.iter().map(|b| overlap(b, &plateau)).sum();
        let (full, full_r) = plateau_mass(n, &len);
        let (sub, sub_r) = plateau_mass(n, &in_a);
        // Rigorous for exact plateaus: n·mass > e_up − 1 > e − 1.
        let exceeds = match &full_r {
            Some(r) => r * BigRational::from_integer(n.into()) > &e_up - BigRational::one(),
            None => full * n as f64 > (e - 1.0) * (1.0 + 1e-12),
        };
        match (full_r, sub_r) {
            (Some(f), Some(s)) => {
                full_exact += f;
                sub_exact += s;
            }
            _ => {
                full_log.add(full);
                sub_log.add(sub);
            }
        }
        harmonic += 1.0 / n as f64;
        full_ok &= exceeds;
        plateaus.push(PlateauMass {
            n,
            full_mass: full,
            lower_bound: (e - 1.0) / n as f64,
            exceeds_lower_bound: exceeds,
            sub_mass: sub,
            exact: n <= EXACT_BLOCK_LIMIT,
        });
    }
    let full_partial_sum = ratio_to_f64(&full_exact) + full_log.value();
    let sub_total = ratio_to_f64(&sub_exact) + sub_log.value();
    let full_lower_bound = (e - 1.0) * harmonic;
    let sub_bound = 3.0 + a * std::f64::consts::PI.powi(2) / 6.0;

    let not_right_checked_upto = n_blocks.max(50);
    let not_right_ok = (1..=not_right_checked_upto).all(|n| not_right_holds(n, &e_up));

    Ok(SalatReport {
        delta: ex.delta,
        a: ex.a.to_string(),
        n_blocks,
        upper,
        lower,
        lower_ratios_decreasing,
        plateaus,
        full_ok: full_ok && full_partial_sum >= full_lower_bound,
        full_partial_sum,
        full_lower_bound,
        sub_ok: sub_total <= sub_bound + 1e-9,
        sub_total,
        sub_bound,
        not_right_ok,
        not_right_checked_upto,
    })
}

/// `Σ_{m=lo}^{hi} ψ′(m)` enclosed in `[lower, upper]`; direct summation for
/// short ranges, the concavity sandwich otherwise.
pub fn weight_bracket(psi: &PsiFunction, lo: &BigUint, hi: &BigUint) -> (f64, f64) {
    let len = hi - lo + 1u32;
    if len <= BigUint::from(DIRECT_SUM_LIMIT) {
        let (l, h) = (
            lo.to_u64().expect("short range"),
            hi.to_u64().expect("short range"),
        );
        let s = (l..=h)
            .map(|m| psi.derivative(m as f64))
            .collect::<CompensatedSum>()
            .value();
        return (s, s);
    }
    let below = big_to_f64(&(lo - 1u32));
    let top = big_to_f64(hi);
    let diff = psi.value(top) - psi.value(below);
    let width = psi.derivative(below) - psi.derivative(top);
    // Absorb the rounding of the huge endpoints and values.
    let guard = 1e-12 * psi.value(top);
    (diff - width - guard, diff + guard)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauWeight {
    pub n: u32,
    /// Lower bound of `Σ ψ′(m)c_m` over plateau `n`.
    pub weighted_mass_lower: f64,
    /// `(e−1)/(α·n·loglog((n+1)^{n+1} + e^e))`.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiCheckpoint {
    pub n: u32,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub target: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub alpha: f64,
    /// `ln x₀ = e^{α/(α−1)} − e^e`.
    pub ln_x0: f64,
    pub x0: Option<f64>,
    pub psi_in_d1: bool,
    /// First block with `n^n > x₀`.
    pub first_qualifying_block: Option<u32>,
    pub plateau_weights: Vec<PlateauWeight>,
    pub checkpoints: Vec<PsiCheckpoint>,
    pub slack: f64,
    pub salat: SalatReport,
}

/// Slack of the ψ-density checkpoint comparison.
pub const SHARPNESS_SLACK: f64 = 0.02;

pub fn sharpness_verify(ex: &SalatExample, n_blocks: u32, alpha: f64) -> Result<SharpnessReport> {
    if ex.sharpness_psi.is_none() {
        return Err(Error::InvalidArgument(
            "example was built without the sharpness weight".into(),
        ));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    let salat = salat_example_verify(ex, n_blocks)?;
    let psi = PsiFunction::salat_sharpness();
    let ee = crate::psi::e_to_e();
    let ln_x0 = (alpha / (alpha - 1.0)).exp() - ee;
    if !ln_x0.is_finite() || ln_x0 > f64::MAX.ln() {
        return Err(Error::Domain(format!(
            "x0 = exp({ln_x0}) is not representable for alpha = {alpha}"
        )));
    }
    let x0 = ln_x0.exp();
    let qualifies = |n: u32| (n as f64) * (n as f64).ln() > ln_x0;
    let e = std::f64::consts::E;

    let mut plateau_weights = Vec::new();
    for n in (1..=n_blocks).filter(|&n| qualifies(n)) {
        let (lo, hi) = SalatExample::plateau(n);
        let (w_lower, _) = weight_bracket(&psi, &lo, &hi);
        let mass = if w_lower > 0.0 {
            (w_lower.ln() - (n as f64 + 2.0) * (n as f64).ln()).exp()
        } else {
            0.0
        };
        let top = big_to_f64(&pow_self(n + 1));
        let bound = (e - 1.0) / (alpha * n as f64 * (top + ee).ln().ln());
        plateau_weights.push(PlateauWeight {
            n,
            weighted_mass_lower: mass,
            bound,
            ok: mass >= bound,
        });
    }

    let target = ex.delta / alpha;
    let mut checkpoints = Vec::new();
    for n in (1..=n_blocks).filter(|&n| qualifies(n)) {
        let (_, x) = ex.block(n);
        let (mut lo_sum, mut hi_sum) = (CompensatedSum::new(), CompensatedSum::new());
        for (lo, hi) in ex.merged_blocks(n) {
            let hi = hi.min(x.clone());
            if lo > hi {
                continue;
            }
            let (l, u) = weight_bracket(&psi, &lo, &hi);
            lo_sum.add(l);
            hi_sum.add(u);
        }
        let px = psi.value(big_to_f64(&x));
        let ratio_lower = lo_sum.value() / px;
        checkpoints.push(PsiCheckpoint {
            n,
            ratio_lower,
            ratio_upper: hi_sum.value() / px,
            target,
            ok: ratio_lower >= target - SHARPNESS_SLACK,
        });
    }

    Ok(SharpnessReport {
        alpha,
        ln_x0,
        x0: x0.is_finite().then_some(x0),
        psi_in_d1: psi.class_report().in_d1,
        first_qualifying_block: (1..=n_blocks).find(|&n| qualifies(n)),
        plateau_weights,
        checkpoints,
        slack: SHARPNESS_SLACK,
        salat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> SalatExample {
        salat_example(0.5).unwrap()
    }

    #[test]
    fn blocks_and_plateaus() {
        let ex = half();
        let blocks: Vec<(u64, u64)> = (1..=5)
            .map(|n| ex.block(n))
            .map(|(l, h)| (l.to_u64().unwrap(), h.to_u64().unwrap()))
            .collect();
        assert_eq!(
            blocks,
            vec![(1, 2), (4, 8), (27, 54), (256, 512), (3125, 6250)]
        );
        for (m, c) in [
            (1, 1.0),
            (3, 1.0),
            (4, 1.0 / 16.0),
            (26, 1.0 / 16.0),
            (27, 1.0 / 243.0),
            (255, 1.0 / 243.0),
        ] {
            assert_eq!(ex.coeffs.get(m).unwrap(), c, "m = {m}");
        }
        assert_eq!(ex.coeffs.get(256).unwrap(), 1.0 / 4f64.powi(6));
    }

    #[test]
    fn counting_matches_enumeration() {
        let ex = half();
        let members: Vec<u64> = ex.set_a.members(1_000_000).unwrap().collect();
        for x in [
            1u64, 2, 3, 8, 26, 54, 55, 255, 512, 6250, 46_656, 93_312, 1_000_000,
        ] {
            let brute = members.partition_point(|&m| m <= x) as u64;
            assert_eq!(
                ex.count_upto(&BigUint::from(x)).to_u64().unwrap(),
                brute,
                "x = {x}"
            );
            assert_eq!(ex.set_a.count(x).unwrap(), brute);
        }
    }

    #[test]
    fn overlapping_blocks_merge() {
        let ex = salat_example(0.9).unwrap();
        let merged = ex.merged_blocks(3);
        assert_eq!(merged[0].0, BigUint::from(1u32));
        assert!(merged.windows(2).all(|w| w[0].1.clone() + 1u32 < w[1].0));
    }

    #[test]
    fn checkpoints_for_half() {
        let ex = half();
        let r = salat_example_verify(&ex, 10).unwrap();
        assert_eq!(r.upper[2].x, "54");
        assert_eq!(r.upper[2].count, "35");
        assert_eq!(r.lower[2].count, "35");
        assert!((r.lower[2].ratio - 35.0 / 255.0).abs() < 1e-15);
        assert!(r.upper.iter().all(|c| c.meets_delta));
        assert!(r.not_right_ok && r.full_ok && r.sub_ok);
        assert!(r.lower.iter().all(|c| c.within_finite_bound));
    }

    #[test]
    fn e_bound_is_above_e() {
        let e = ratio_to_f64(&e_upper_bound());
        assert!(e >= std::f64::consts::E && e - std::f64::consts::E < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let ex = half().with_cap(8);
        assert_eq!(
            salat_example_verify(&ex, 9).unwrap_err(),
            Error::BlockCapExceeded {
                requested: 9,
                cap: 8
            }
        );
        assert!(salat_example_verify(&ex, 2).is_err());
    }

    #[test]
    fn beyond_exact_limit_uses_log_domain() {
        let r = salat_example_verify(&half(), 20).unwrap();
        assert!(r.plateaus.iter().all(|p| p.exceeds_lower_bound));
        assert!(!r.plateaus[15].exact);
    }

    #[test]
    fn sharpness_half_alpha_two() {
        let ex = half().with_sharpness();
        let r = sharpness_verify(&ex, 10, 2.0).unwrap();
        assert!(r.psi_in_d1);
        assert!(r.x0.unwrap() < 1.0);
        assert_eq!(r.first_qualifying_block, Some(1));
        for c in r.checkpoints.iter().filter(|c| c.n >= 3) {
            assert!(c.ok, "{c:?}");
        }
        assert!(
            r.plateau_weights.iter().all(|p| p.ok),
            "{:?}",
            r.plateau_weights
        );
    }
}
