//! Weight functions ψ, their derivatives, and the class / growth checks
//! used to gate every density and series operation.
//!
//! All checks are grid-sampled on integers. Functions with exponential
//! growth are evaluated in the log domain so that horizons of 10⁶ and
//! beyond stay finite.

use std::f64::consts::E;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::{log_checkpoints, CompensatedSum, LogSumExp, TailWindow};

/// Grid horizon used for the cached classification of a [`PsiFunction`].
pub const DEFAULT_CLASSIFY_HORIZON: u64 = 1_000_000;

const MONOTONE_SLACK: f64 = 1e-12;
const STEP_RATIO_TOLERANCE: f64 = 1e-3;
/// Relative tolerance on `Σψ′(k)/ψ(n)` for accepting the asymptotic form.
pub const ASYM_TOLERANCE: f64 = 0.05;

/// `e^e`, the shift used by the sharpness weight `x/loglog(x+e^e)`.
pub fn e_to_e() -> f64 {
    E.powf(E)
}

/// A user supplied ψ given as plain function pointers.
#[derive(Clone, Copy)]
pub struct CustomPsi {
    pub value: fn(f64) -> f64,
    pub derivative: fn(f64) -> f64,
}

impl fmt::Debug for CustomPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomPsi")
    }
}

#[derive(Debug, Clone)]
pub enum PsiKind {
    /// ψ(x) = x
    Identity,
    /// ψ(x) = x^p
    Power {
        p: f64,
    },
    /// ψ(x) = log(x + 1)
    LogShift,
    /// ψ(x) = (log(x + e))^α
    LogPower {
        alpha: f64,
    },
    /// ψ(x) = exp(x^δ)
    ExpPower {
        delta: f64,
    },
    /// ψ(x) = x / loglog(x + e^e)
    SalatSharpness,
    /// ψ(x) = e^{αx}
    Exponential {
        alpha: f64,
    },
    Custom(CustomPsi),
}

/// A weight function ψ together with its derivative.
///
/// Catalog functions whose natural form is non-positive near zero are
/// stored shifted (`log(x+1)`, `(log(x+e))^α`, `x/loglog(x+e^e)`); the shift
/// never affects a density because only integer arguments `≥ 1` are used.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    kind: PsiKind,
    domain_start: f64,
    label: String,
    class_cache: Arc<OnceLock<PsiClassReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiClassReport {
    pub psi: String,
    pub grid_horizon: u64,
    pub in_d1: bool,
    pub in_d2: bool,
    pub log_concave: bool,
    /// ψ(n+1)/ψ(n) at the end of the grid.
    pub step_ratio_tail: f64,
    /// `(n, Σ_{k≤n} ψ′(k) / ψ(n))` at logarithmic checkpoints.
    pub asym_ratio_trace: Vec<(u64, f64)>,
}

impl PsiClassReport {
    /// Whether `Σψ′(k) ∼ ψ(n)` is supported by the final checkpoint.
    pub fn satisfies_asym(&self) -> bool {
        self.asym_ratio_trace
            .last()
            .map(|&(_, r)| (r - 1.0).abs() <= ASYM_TOLERANCE)
            .unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub psi: String,
    pub horizon: u64,
    pub tail_fraction: f64,
    /// Always true: every field is a min/max over the tail window, not a limit.
    pub finite_horizon_estimate: bool,
    pub order_lower: f64,
    pub order_upper: f64,
    pub log_doubling_c: f64,
    /// `None` when `ψ(2x)/ψ(x)` itself overflows.
    pub doubling_c: Option<f64>,
    pub regularity_liminf: f64,
    pub increment_limsup: f64,
    /// The increment estimate grew across the window, suggesting `limsup = ∞`.
    pub increment_trend_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub key: &'static str,
    pub definition: &'static str,
}

/// Keys accepted by [`PsiFunction::from_key`].
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            key: "identity",
            definition: "x",
        },
        CatalogEntry {
            key: "power:p=<p>",
            definition: "x^p",
        },
        CatalogEntry {
            key: "sqrt",
            definition: "x^(1/2)",
        },
        CatalogEntry {
            key: "log1p",
            definition: "log(x+1)",
        },
        CatalogEntry {
            key: "logpow:alpha=<a>",
            definition: "(log(x+e))^alpha",
        },
        CatalogEntry {
            key: "explog:delta=<d>",
            definition: "exp(x^delta)",
        },
        CatalogEntry {
            key: "salat-sharpness",
            definition: "x/loglog(x+e^e)",
        },
        CatalogEntry {
            key: "exp:alpha=<a>",
            definition: "e^(alpha*x)",
        },
    ]
}

fn parse_param(key: &str, rest: &str, name: &str) -> Result<f64> {
    let value = rest
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("psi key `{key}`: expected `{name}=<value>`")))?;
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("psi key `{key}`: `{value}` is not a number")))
}

impl PsiFunction {
    fn with_kind(kind: PsiKind, label: String) -> Self {
        Self {
            kind,
            domain_start: 1.0,
            label,
            class_cache: Arc::new(OnceLock::new()),
        }
    }

    pub fn identity() -> Self {
        Self::with_kind(PsiKind::Identity, "identity".into())
    }

    pub fn power(p: f64) -> Self {
        assert!(p > 0.0, "power exponent must be positive");
        Self::with_kind(PsiKind::Power { p }, format!("power:p={p}"))
    }

    pub fn sqrt() -> Self {
        let mut f = Self::power(0.5);
        f.label = "sqrt".into();
        f
    }

    pub fn log_shift() -> Self {
        Self::with_kind(PsiKind::LogShift, "log1p".into())
    }

    pub fn log_power(alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        Self::with_kind(PsiKind::LogPower { alpha }, format!("logpow:alpha={alpha}"))
    }

    pub fn exp_power(delta: f64) -> Self {
        assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
        Self::with_kind(PsiKind::ExpPower { delta }, format!("explog:delta={delta}"))
    }

    pub fn salat_sharpness() -> Self {
        Self::with_kind(PsiKind::SalatSharpness, "salat-sharpness".into())
    }

    pub fn exponential(alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        Self::with_kind(PsiKind::Exponential { alpha }, format!("exp:alpha={alpha}"))
    }

    pub fn custom(label: impl Into<String>, custom: CustomPsi, domain_start: f64) -> Self {
        let mut f = Self::with_kind(PsiKind::Custom(custom), label.into());
        f.domain_start = domain_start;
        f
    }

    /// Resolve a catalog key such as `power:p=2` or `explog:delta=0.5`.
    pub fn from_key(key: &str) -> Result<Self> {
        let (head, rest) = key.split_once(':').unwrap_or((key, ""));
        let f = match head {
            "identity" => Self::identity(),
            "sqrt" => Self::sqrt(),
            "log1p" => Self::log_shift(),
            "salat-sharpness" => Self::salat_sharpness(),
            "power" => {
                let p = parse_param(key, rest, "p")?;
                if !(p > 0.0) {
                    return Err(Error::Parse(format!("psi key `{key}`: p must be positive")));
                }
                Self::power(p)
            }
            "logpow" => {
                let a = parse_param(key, rest, "alpha")?;
                if !(a > 0.0) {
                    return Err(Error::Parse(format!(
                        "psi key `{key}`: alpha must be positive"
                    )));
                }
                Self::log_power(a)
            }
            "explog" => {
                let d = parse_param(key, rest, "delta")?;
                if !(d > 0.0 && d <= 1.0) {
                    return Err(Error::Parse(format!(
                        "psi key `{key}`: delta must lie in (0,1]"
                    )));
                }
                Self::exp_power(d)
            }
            "exp" => {
                let a = if rest.is_empty() {
                    1.0
                } else {
                    parse_param(key, rest, "alpha")?
                };
                if !(a > 0.0) {
                    return Err(Error::Parse(format!(
                        "psi key `{key}`: alpha must be positive"
                    )));
                }
                Self::exponential(a)
            }
            _ => return Err(Error::Parse(format!("unknown psi key `{key}`"))),
        };
        Ok(f)
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, PsiKind::Identity)
    }

    /// True for kinds whose values leave binary64 range at moderate x.
    pub fn grows_exponentially(&self) -> bool {
        matches!(
            self.kind,
            PsiKind::ExpPower { .. } | PsiKind::Exponential { .. }
        )
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => x,
            PsiKind::Power { p } => x.powf(p),
            PsiKind::LogShift => x.ln_1p(),
            PsiKind::LogPower { alpha } => (x + E).ln().powf(alpha),
            PsiKind::ExpPower { delta } => x.powf(delta).exp(),
            PsiKind::SalatSharpness => x / (x + e_to_e()).ln().ln(),
            PsiKind::Exponential { alpha } => (alpha * x).exp(),
            PsiKind::Custom(c) => (c.value)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Power { p } => p * x.powf(p - 1.0),
            PsiKind::LogShift => 1.0 / (x + 1.0),
            PsiKind::LogPower { alpha } => {
                let l = (x + E).ln();
                alpha * l.powf(alpha - 1.0) / (x + E)
            }
            PsiKind::ExpPower { delta } => delta * x.powf(delta - 1.0) * x.powf(delta).exp(),
            PsiKind::SalatSharpness => {
                let u = x + e_to_e();
                let l = u.ln();
                let ll = l.ln();
                (ll - x / (u * l)) / (ll * ll)
            }
            PsiKind::Exponential { alpha } => alpha * (alpha * x).exp(),
            PsiKind::Custom(c) => (c.derivative)(x),
        }
    }

    /// `ln ψ(x)`, finite even where `ψ(x)` overflows.
    pub fn ln_value(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => x.ln(),
            PsiKind::Power { p } => p * x.ln(),
            PsiKind::LogShift => x.ln_1p().ln(),
            PsiKind::LogPower { alpha } => alpha * (x + E).ln().ln(),
            PsiKind::ExpPower { delta } => x.powf(delta),
            PsiKind::SalatSharpness => x.ln() - (x + e_to_e()).ln().ln().ln(),
            PsiKind::Exponential { alpha } => alpha * x,
            PsiKind::Custom(c) => (c.value)(x).ln(),
        }
    }

    /// `ln ψ′(x)`.
    pub fn ln_derivative(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => 0.0,
            PsiKind::Power { p } => p.ln() + (p - 1.0) * x.ln(),
            PsiKind::LogShift => -x.ln_1p(),
            PsiKind::LogPower { alpha } => {
                alpha.ln() + (alpha - 1.0) * (x + E).ln().ln() - (x + E).ln()
            }
            PsiKind::ExpPower { delta } => delta.ln() + (delta - 1.0) * x.ln() + x.powf(delta),
            PsiKind::Exponential { alpha } => alpha.ln() + alpha * x,
            _ => self.derivative(x).ln(),
        }
    }

    /// `ψ(x)/ψ′(x)` without forming either factor when they overflow.
    pub fn value_over_derivative(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => x,
            PsiKind::Power { p } => x / p,
            PsiKind::LogShift => (x + 1.0) * x.ln_1p(),
            PsiKind::LogPower { alpha } => (x + E) * (x + E).ln() / alpha,
            PsiKind::ExpPower { delta } => x.powf(1.0 - delta) / delta,
            PsiKind::Exponential { alpha } => 1.0 / alpha,
            _ => self.value(x) / self.derivative(x),
        }
    }

    /// `ln ψ(x+1) − ln ψ(x)`, using closed forms where cancellation bites.
    pub fn ln_step_ratio(&self, x: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => (1.0 / x).ln_1p(),
            PsiKind::Power { p } => p * (1.0 / x).ln_1p(),
            PsiKind::Exponential { alpha } => alpha,
            _ => self.ln_value(x + 1.0) - self.ln_value(x),
        }
    }

    /// Exact ψ′(k) where ψ′ is rational at integers.
    pub fn exact_derivative(&self, k: u64) -> Option<BigRational> {
        match self.kind {
            PsiKind::Identity => Some(BigRational::one()),
            PsiKind::Power { p } if p >= 1.0 && p.fract() == 0.0 && p <= 64.0 => {
                let p = p as u32;
                let v = BigInt::from(p) * BigInt::from(k).pow(p - 1);
                Some(BigRational::from_integer(v))
            }
            _ => None,
        }
    }

    fn check_domain(&self, n: u64) -> Result<()> {
        if (n as f64) < self.domain_start {
            return Err(Error::Domain(format!(
                "{}: k = {n} is below domain start {}",
                self.label, self.domain_start
            )));
        }
        Ok(())
    }

    fn grid_start(&self) -> u64 {
        (self.domain_start.ceil() as u64).max(1)
    }

    /// Classification at [`DEFAULT_CLASSIFY_HORIZON`], computed once and
    /// shared between clones.
    pub fn class_report(&self) -> &PsiClassReport {
        self.class_cache.get_or_init(|| {
            classify(self, DEFAULT_CLASSIFY_HORIZON).expect("catalog domain covers the grid")
        })
    }

    pub fn require_d1(&self, op: &str) -> Result<()> {
        if self.class_report().in_d1 {
            Ok(())
        } else {
            Err(Error::Class(format!(
                "{op} requires a concave ψ; {} is not in D1",
                self.label
            )))
        }
    }
}

/// `Σ_{k=1}^n ψ′(k)` with compensated accumulation.
pub fn psi_prime_sum(psi: &PsiFunction, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    psi.check_domain(1)?;
    if psi.grows_exponentially() {
        let mut acc = LogSumExp::new();
        for k in 1..=n {
            acc.add_log(psi.ln_derivative(k as f64));
        }
        return Ok(acc.ln().exp());
    }
    let mut acc = CompensatedSum::new();
    for k in 1..=n {
        acc.add(psi.derivative(k as f64));
    }
    Ok(acc.value())
}

fn non_increasing_step(prev: f64, next: f64) -> bool {
    if prev.is_infinite() || next.is_infinite() {
        return next <= prev;
    }
    next <= prev + MONOTONE_SLACK * prev.abs().max(1.0)
}

/// Grid-sampled class membership of ψ.
pub fn classify(psi: &PsiFunction, grid_horizon: u64) -> Result<PsiClassReport> {
    if grid_horizon < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_horizon must be at least 16, got {grid_horizon}"
        )));
    }
    let start = psi.grid_start();
    psi.check_domain(start)?;

    let mut d_non_increasing = true;
    let mut d_non_decreasing = true;
    let mut log_concave = true;

    let mut prev_ld = psi.ln_derivative(start as f64);
    let mut prev_g = prev_ld - psi.ln_value(start as f64);
    for n in (start + 1)..=grid_horizon {
        let x = n as f64;
        let ld = psi.ln_derivative(x);
        let g = ld - psi.ln_value(x);
        if d_non_increasing && !non_increasing_step(prev_ld, ld) {
            d_non_increasing = false;
        }
        if d_non_decreasing && !non_increasing_step(-prev_ld, -ld) {
            d_non_decreasing = false;
        }
        if log_concave && !non_increasing_step(prev_g, g) {
            log_concave = false;
        }
        prev_ld = ld;
        prev_g = g;
    }

    let last = (grid_horizon - 1) as f64;
    let decade = ((grid_horizon / 10).max(start)) as f64;
    let step_ratio_tail = psi.ln_step_ratio(last).exp();
    let step_ratio_decade = psi.ln_step_ratio(decade).exp();
    // ψ(n+1)/ψ(n) → 1: either already within tolerance, or the excess over 1
    // at least halves across the final decade of the grid.
    let step_ok = step_ratio_tail <= 1.0 + STEP_RATIO_TOLERANCE
        || step_ratio_tail - 1.0 <= 0.5 * (step_ratio_decade - 1.0);

    let asym_ratio_trace = asym_trace(psi, start, grid_horizon);

    Ok(PsiClassReport {
        psi: psi.label.clone(),
        grid_horizon,
        in_d1: d_non_increasing,
        in_d2: d_non_decreasing && step_ok,
        log_concave,
        step_ratio_tail,
        asym_ratio_trace,
    })
}

fn asym_trace(psi: &PsiFunction, start: u64, horizon: u64) -> Vec<(u64, f64)> {
    let checkpoints = log_checkpoints(horizon, 2.0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cp = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= start)
        .peekable();
    if psi.grows_exponentially() {
        let mut acc = LogSumExp::new();
        for k in start..=horizon {
            acc.add_log(psi.ln_derivative(k as f64));
            if cp.peek() == Some(&k) {
                cp.next();
                out.push((k, (acc.ln() - psi.ln_value(k as f64)).exp()));
            }
        }
    } else {
        let mut acc = CompensatedSum::new();
        for k in start..=horizon {
            acc.add(psi.derivative(k as f64));
            if cp.peek() == Some(&k) {
                cp.next();
                out.push((k, acc.value() / psi.value(k as f64)));
            }
        }
    }
    out
}

/// Growth indicators over the tail window `[horizon/2, horizon]`, all in the
/// log domain. Never overflows.
pub fn growth_report_log_domain(psi: &PsiFunction, horizon: u64) -> Result<GrowthReport> {
    if horizon < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least 10^3, got {horizon}"
        )));
    }
    let tail_fraction = 0.5;
    let window = TailWindow::new(horizon, tail_fraction);
    psi.check_domain(window.start)?;

    let mut order_lower = f64::INFINITY;
    let mut order_upper = f64::NEG_INFINITY;
    let mut log_doubling = f64::NEG_INFINITY;
    let mut regularity = f64::INFINITY;
    let mut increment = f64::NEG_INFINITY;
    for n in window.start..=window.end {
        let x = n as f64;
        let lv = psi.ln_value(x);
        let order = lv / x.ln();
        order_lower = order_lower.min(order);
        order_upper = order_upper.max(order);
        log_doubling = log_doubling.max(psi.ln_value(2.0 * x) - lv);
        regularity = regularity.min((lv - x.ln() - psi.ln_derivative(x)).exp());
        increment = increment.max(x * psi.ln_step_ratio(x));
    }
    let inc_start = window.start as f64 * psi.ln_step_ratio(window.start as f64);
    let inc_end = window.end as f64 * psi.ln_step_ratio(window.end as f64);
    let doubling = log_doubling.exp();

    Ok(GrowthReport {
        psi: psi.label.clone(),
        horizon,
        tail_fraction,
        finite_horizon_estimate: true,
        order_lower,
        order_upper,
        log_doubling_c: log_doubling,
        doubling_c: doubling.is_finite().then_some(doubling),
        regularity_liminf: regularity,
        increment_limsup: increment,
        increment_trend_unbounded: inc_end > 1.5 * inc_start,
    })
}

/// Like [`growth_report_log_domain`] but refuses ψ whose value at
/// `2·horizon` does not fit in binary64.
pub fn growth_report(psi: &PsiFunction, horizon: u64) -> Result<GrowthReport> {
    let at_double = 2.0 * horizon as f64;
    if !psi.value(at_double).is_finite() {
        return Err(Error::Overflow {
            what: format!("{}(2·{horizon})", psi.label),
            log_value: psi.ln_value(at_double),
        });
    }
    growth_report_log_domain(psi, horizon)
}

/// Sandwich `Σ_{j=n+1}^m ψ′(j) ≤ ψ(m) − ψ(n) ≤ Σ_{j=n+1}^m ψ′(j) + ψ′(n) − ψ′(m)`.
pub fn lem2_sandwich_check(psi: &PsiFunction, n: u64, m: u64) -> Result<bool> {
    if n < 1 || n >= m {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ n < m, got n = {n}, m = {m}"
        )));
    }
    psi.require_d1("lem2_sandwich_check")?;
    let sum: f64 = ((n + 1)..=m)
        .map(|j| psi.derivative(j as f64))
        .collect::<CompensatedSum>()
        .value();
    Ok(sandwich_holds(psi, n, m, sum))
}

fn sandwich_holds(psi: &PsiFunction, n: u64, m: u64, sum: f64) -> bool {
    let (xn, xm) = (n as f64, m as f64);
    let diff = psi.value(xm) - psi.value(xn);
    let slack = 1e-12 * psi.value(xm).abs();
    sum <= diff + slack && diff <= sum + psi.derivative(xn) - psi.derivative(xm) + slack
}

/// Result of checking the sandwich on every pair `1 ≤ n < m ≤ max_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichSweep {
    pub psi: String,
    pub max_m: u64,
    pub pairs_checked: u64,
    pub failures: Vec<(u64, u64)>,
}

/// All-pairs variant of [`lem2_sandwich_check`] using compensated prefix sums.
pub fn lem2_sandwich_sweep(psi: &PsiFunction, max_m: u64) -> Result<SandwichSweep> {
    psi.require_d1("lem2_sandwich_sweep")?;
    let mut prefix = Vec::with_capacity(max_m as usize + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(0.0);
    for j in 1..=max_m {
        acc.add(psi.derivative(j as f64));
        prefix.push(acc.value());
    }
    let mut failures = Vec::new();
    let mut pairs = 0;
    for n in 1..max_m {
        for m in (n + 1)..=max_m {
            pairs += 1;
            let sum = prefix[m as usize] - prefix[n as usize];
            if !sandwich_holds(psi, n, m, sum) {
                failures.push((n, m));
            }
        }
    }
    Ok(SandwichSweep {
        psi: psi.label.clone(),
        max_m,
        pairs_checked: pairs,
        failures,
    })
}

/// `min_{2 ≤ x ≤ horizon} (ψ(x) − ψ(x−1)) / ψ′(x)` over integers.
pub fn logconcave_gap(psi: &PsiFunction, horizon: u64) -> Result<f64> {
    if horizon < 10 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least 10, got {horizon}"
        )));
    }
    if !psi.class_report().log_concave {
        return Err(Error::Class(format!("{} is not log-concave", psi.label)));
    }
    let start = psi.grid_start().max(1) + 1;
    let mut gap = f64::INFINITY;
    for n in start.max(2)..=horizon {
        let x = n as f64;
        let q = if psi.grows_exponentially() {
            let lv = psi.ln_value(x);
            (lv - psi.ln_derivative(x)).exp() * -(psi.ln_value(x - 1.0) - lv).exp_m1()
        } else {
            (psi.value(x) - psi.value(x - 1.0)) / psi.derivative(x)
        };
        gap = gap.min(q);
    }
    Ok(gap)
}

/// Exact `Σ_{k=1}^n ψ′(k)` when ψ′ is rational at integers.
pub fn psi_prime_sum_exact(psi: &PsiFunction, n: u64) -> Result<BigRational> {
    let mut acc = BigRational::from_integer(0.into());
    for k in 1..=n {
        acc += psi.exact_derivative(k).ok_or_else(|| {
            Error::Capability(format!("{} has no exact rational derivative", psi.label))
        })?;
    }
    Ok(acc)
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
