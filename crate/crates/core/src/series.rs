//! Coefficient sequences, partial sums of series and sub-series, limit
//! traces, the Abel partial-summation identity, and divergence probes.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::{ratio_to_f64, PsiFunction};
use crate::sets::{for_each_indicator, IntegerSet, WeightSum, DEFAULT_TAIL_FRACTION};
use crate::summation::{CompensatedSum, TailTracker, TailWindow};

/// Number of leading terms on which hints and non-negativity are verified.
pub const HINT_PREFIX: u64 = 10_000;
const HINT_SLACK: f64 = 1e-12;

type ValueFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(u64) -> BigRational + Send + Sync>;

/// Monotonicity hypotheses a sequence can declare.
#[derive(Debug, Clone)]
pub enum MonotonicityHint {
    None,
    NonIncreasing,
    /// `c_n/ψ′(n)` non-increasing.
    RatioNonIncreasing(PsiFunction),
    /// `c_n/ψ′(n)` non-decreasing.
    RatioNonDecreasing(PsiFunction),
}

impl MonotonicityHint {
    pub fn name(&self) -> &'static str {
        match self {
            MonotonicityHint::None => "none",
            MonotonicityHint::NonIncreasing => "non_increasing",
            MonotonicityHint::RatioNonIncreasing(_) => "c_over_psi_prime_non_increasing",
            MonotonicityHint::RatioNonDecreasing(_) => "c_over_psi_prime_non_decreasing",
        }
    }
}

/// Non-negative coefficients `n ↦ c_n`, `n ≥ 1`.
#[derive(Clone)]
pub struct CoeffSequence {
    label: String,
    value: ValueFn,
    exact: Option<ExactFn>,
    horizon: Option<u64>,
    hint: MonotonicityHint,
}

impl fmt::Debug for CoeffSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffSequence")
            .field("label", &self.label)
            .field("exact", &self.exact.is_some())
            .field("horizon", &self.horizon)
            .field("hint", &self.hint.name())
            .finish()
    }
}

fn recip_int(n: u64, power: u32) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(n).pow(power))
}

impl CoeffSequence {
    fn build(
        label: String,
        value: ValueFn,
        exact: Option<ExactFn>,
        horizon: Option<u64>,
    ) -> Result<Self> {
        let seq = Self {
            label,
            value,
            exact,
            horizon,
            hint: MonotonicityHint::None,
        };
        for n in 1..=seq.prefix_len() {
            seq.get(n)?;
        }
        Ok(seq)
    }

    /// `c_n = v(n)`; no exact capability.
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(label.into(), Arc::new(f), None, None)
    }

    /// Exact rationals with a matching floating evaluator.
    pub fn from_exact_fn(
        label: impl Into<String>,
        value: impl Fn(u64) -> f64 + Send + Sync + 'static,
        exact: impl Fn(u64) -> BigRational + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(label.into(), Arc::new(value), Some(Arc::new(exact)), None)
    }

    pub fn recip() -> Self {
        Self::from_exact_fn("recip", |n| 1.0 / n as f64, |n| recip_int(n, 1)).expect("positive")
    }

    /// `1/n^a`; exact when `a` is a non-negative integer.
    pub fn recip_pow(a: f64) -> Self {
        let label = format!("recip-pow:{a}");
        let value: ValueFn = Arc::new(move |n| (n as f64).powf(-a));
        let exact: Option<ExactFn> = if a >= 0.0 && a.fract() == 0.0 && a <= 64.0 {
            let p = a as u32;
            Some(Arc::new(move |n| recip_int(n, p)))
        } else {
            None
        };
        Self::build(label, value, exact, None).expect("positive")
    }

    /// `1/(n log²(n+1))`.
    pub fn recip_logsq() -> Self {
        Self::from_fn("recip-logsq", |n| {
            let x = n as f64;
            let l = x.ln_1p();
            1.0 / (x * l * l)
        })
        .expect("positive")
    }

    pub fn constant(v: f64) -> Result<Self> {
        let exact = BigRational::from_float(v)
            .ok_or_else(|| Error::InvalidArgument(format!("constant {v} is not finite")))?;
        Self::build(
            format!("const:{v}"),
            Arc::new(move |_| v),
            Some(Arc::new(move |_| exact.clone())),
            None,
        )
    }

    /// `table[i] = c_{i+1}`; exact through the binary64 values.
    pub fn table(label: impl Into<String>, table: Vec<f64>) -> Result<Self> {
        let t = Arc::new(table);
        let horizon = Some(t.len() as u64);
        let (tv, te) = (t.clone(), t);
        Self::build(
            label.into(),
            Arc::new(move |n| tv[n as usize - 1]),
            Some(Arc::new(move |n| {
                BigRational::from_float(te[n as usize - 1]).unwrap_or_default()
            })),
            horizon,
        )
    }

    pub fn exact_table(label: impl Into<String>, table: Vec<BigRational>) -> Result<Self> {
        if let Some(i) = table.iter().position(|c| c.is_negative()) {
            return Err(Error::Domain(format!("c_{} is negative", i + 1)));
        }
        let floats: Arc<Vec<f64>> = Arc::new(table.iter().map(ratio_to_f64).collect());
        let t = Arc::new(table);
        let horizon = Some(t.len() as u64);
        Self::build(
            label.into(),
            Arc::new(move |n| floats[n as usize - 1]),
            Some(Arc::new(move |n| t[n as usize - 1].clone())),
            horizon,
        )
    }

    /// Declare and verify a monotonicity hint on the first [`HINT_PREFIX`] terms.
    pub fn with_hint(mut self, hint: MonotonicityHint) -> Result<Self> {
        self.hint = hint;
        let mut checker = HintChecker::new(&self.hint);
        for n in 1..=self.prefix_len() {
            let c = self.get(n)?;
            checker.observe(n, c)?;
        }
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn prefix_len(&self) -> u64 {
        self.horizon.map_or(HINT_PREFIX, |h| h.min(HINT_PREFIX))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hint(&self) -> &MonotonicityHint {
        &self.hint
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    pub fn supports_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn check_horizon(&self, n: u64) -> Result<()> {
        match self.horizon {
            Some(h) if n > h => Err(Error::Horizon {
                queried: n,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }

    /// `c_n`, rejecting negative or non-finite values.
    pub fn get(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("coefficients are indexed from 1".into()));
        }
        self.check_horizon(n)?;
        let c = (self.value)(n);
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "{}: c_{n} = {c} is not a non-negative real",
                self.label
            )));
        }
        Ok(c)
    }

    pub fn exact(&self, n: u64) -> Result<BigRational> {
        self.check_horizon(n)?;
        let f = self.exact.as_ref().ok_or_else(|| {
            Error::Capability(format!(
                "{} has no exact rational representation",
                self.label
            ))
        })?;
        Ok(f(n))
    }

    /// Error unless `c_n/ψ′(n)` is declared non-increasing for this ψ.
    pub(crate) fn require_ratio_non_increasing(&self, psi: &PsiFunction, op: &str) -> Result<()> {
        match &self.hint {
            MonotonicityHint::RatioNonIncreasing(p) if p.label() == psi.label() => Ok(()),
            _ => Err(Error::Hint(format!(
                "{op} requires {} to declare c_n/ψ′(n) non-increasing for {}",
                self.label,
                psi.label()
            ))),
        }
    }
}

/// Streaming verification of a declared hint.
pub(crate) struct HintChecker<'a> {
    hint: &'a MonotonicityHint,
    prev: Option<f64>,
}

impl<'a> HintChecker<'a> {
    pub fn new(hint: &'a MonotonicityHint) -> Self {
        Self { hint, prev: None }
    }

    pub fn observe(&mut self, n: u64, c: f64) -> Result<()> {
        let (value, increasing_allowed) = match self.hint {
            MonotonicityHint::None => return Ok(()),
            MonotonicityHint::NonIncreasing => (c, false),
            MonotonicityHint::RatioNonIncreasing(p) => (c / p.derivative(n as f64), false),
            MonotonicityHint::RatioNonDecreasing(p) => (c / p.derivative(n as f64), true),
        };
        if let Some(prev) = self.prev {
            let slack = HINT_SLACK * prev.abs().max(value.abs());
            let ok = if increasing_allowed {
                value >= prev - slack
            } else {
                value <= prev + slack
            };
            if !ok {
                return Err(Error::Hint(format!(
                    "declared hint {} violated at n = {n}: {prev} then {value}",
                    self.hint.name()
                )));
            }
        }
        self.prev = Some(value);
        Ok(())
    }
}

/// Tail window and checkpoint spacing shared by all traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceOptions {
    pub tail_fraction: f64,
    pub checkpoint_ratio: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            tail_fraction: DEFAULT_TAIL_FRACTION,
            checkpoint_ratio: 2.0,
        }
    }
}

impl TraceOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_fraction must lie in (0, 1), got {}",
                self.tail_fraction
            )));
        }
        if !(self.checkpoint_ratio > 1.0) {
            return Err(Error::InvalidArgument(
                "checkpoint_ratio must exceed 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn tracker(&self, horizon: u64) -> TailTracker {
        TailTracker::new(horizon, self.tail_fraction, self.checkpoint_ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub label: String,
    pub points: Vec<(u64, f64)>,
    /// `max |value|` over the tail window.
    pub tail_sup: f64,
    /// `min value` over the tail window.
    pub tail_inf: f64,
    /// `max value` over the tail window.
    pub tail_max: f64,
    pub final_value: f64,
    pub horizon: u64,
    pub tail_fraction: f64,
    pub window: (u64, u64),
    /// Final value as an exact fraction, when computed in exact mode.
    pub exact_final: Option<String>,
}

impl Trace {
    pub(crate) fn from_tracker(
        label: impl Into<String>,
        t: TailTracker,
        horizon: u64,
        opts: &TraceOptions,
    ) -> Self {
        let w = t.window();
        Self {
            label: label.into(),
            tail_sup: if t.seen_in_window {
                t.max_abs
            } else {
                f64::NAN
            },
            tail_inf: if t.seen_in_window { t.min } else { f64::NAN },
            tail_max: if t.seen_in_window { t.max } else { f64::NAN },
            final_value: t.last,
            points: t.points,
            horizon,
            tail_fraction: opts.tail_fraction,
            window: (w.start, w.end),
            exact_final: None,
        }
    }

    /// `(n, value)` pairs as `n,value` CSV lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value\n");
        for (n, v) in &self.points {
            out.push_str(&format!("{n},{v:e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMode {
    Compensated,
    ExactRational,
}

/// Partial sums `Σ_{k≤n} χ_A(k) c_k`.
pub fn subseries_partial_sums(
    c: &CoeffSequence,
    a: &IntegerSet,
    horizon: u64,
    mode: SumMode,
    opts: &TraceOptions,
) -> Result<Trace> {
    opts.validate()?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    c.check_horizon(horizon)?;
    let label = format!("subseries {} over {}", c.label(), a.label());
    match mode {
        SumMode::Compensated => {
            let mut t = opts.tracker(horizon);
            let mut acc = CompensatedSum::new();
            let mut err = None;
            for_each_indicator(a, horizon, |n, hit| {
                if hit && err.is_none() {
                    match c.get(n) {
                        Ok(v) => acc.add(v),
                        Err(e) => err = Some(e),
                    }
                }
                t.observe(n, acc.value());
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(Trace::from_tracker(label, t, horizon, opts))
        }
        SumMode::ExactRational => {
            if !c.supports_exact() {
                return Err(Error::Capability(format!(
                    "{} has no exact rational representation",
                    c.label()
                )));
            }
            // Partial sums are monotone, so the window extremes sit at its ends.
            let window = TailWindow::new(horizon, opts.tail_fraction);
            let checkpoints = crate::summation::log_checkpoints(horizon, opts.checkpoint_ratio);
            let mut points = Vec::new();
            let mut acc = BigRational::zero();
            let mut at_start = 0.0;
            let mut err = None;
            let mut cp = checkpoints.iter().peekable();
            for_each_indicator(a, horizon, |n, hit| {
                if hit && err.is_none() {
                    match c.exact(n) {
                        Ok(v) => acc += v,
                        Err(e) => err = Some(e),
                    }
                }
                if cp.peek() == Some(&&n) {
                    cp.next();
                    points.push((n, ratio_to_f64(&acc)));
                }
                if n == window.start {
                    at_start = ratio_to_f64(&acc);
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            let fin = ratio_to_f64(&acc);
            Ok(Trace {
                label,
                points,
                tail_sup: fin,
                tail_inf: at_start,
                tail_max: fin,
                final_value: fin,
                horizon,
                tail_fraction: opts.tail_fraction,
                window: (window.start, window.end),
                exact_final: Some(acc.to_string()),
            })
        }
    }
}

/// `Σ_{k≤n} χ_A(k)c_k / Σ_{k≤n} c_k`, skipping `n` where the denominator is 0.
pub fn ratio_trace(
    c: &CoeffSequence,
    a: &IntegerSet,
    horizon: u64,
    opts: &TraceOptions,
) -> Result<Trace> {
    opts.validate()?;
    c.check_horizon(horizon)?;
    let mut t = opts.tracker(horizon);
    let (mut num, mut den) = (CompensatedSum::new(), CompensatedSum::new());
    let mut err = None;
    for_each_indicator(a, horizon, |n, hit| {
        if err.is_some() {
            return;
        }
        match c.get(n) {
            Ok(v) => {
                den.add(v);
                if hit {
                    num.add(v);
                }
            }
            Err(e) => err = Some(e),
        }
        if den.value() > 0.0 {
            t.observe(n, (num.value() / den.value()).min(1.0));
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if den.value() <= 0.0 {
        return Err(Error::Degenerate(format!(
            "{}: all coefficients vanish up to {horizon}",
            c.label()
        )));
    }
    Ok(Trace::from_tracker(
        format!("ratio {} over {}", c.label(), a.label()),
        t,
        horizon,
        opts,
    ))
}

/// `(ψ(n)/ψ′(n))·c_n`.
pub fn olivier_trace(
    c: &CoeffSequence,
    psi: &PsiFunction,
    horizon: u64,
    opts: &TraceOptions,
) -> Result<Trace> {
    opts.validate()?;
    if horizon < 10 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least 10, got {horizon}"
        )));
    }
    c.check_horizon(horizon)?;
    let mut t = opts.tracker(horizon);
    for n in 1..=horizon {
        t.observe(n, psi.value_over_derivative(n as f64) * c.get(n)?);
    }
    Ok(Trace::from_tracker(
        format!("olivier {} / {}", c.label(), psi.label()),
        t,
        horizon,
        opts,
    ))
}

/// `A_ψ(n) c_n / ψ′(n)`.
pub fn nc1_trace(
    c: &CoeffSequence,
    a: &IntegerSet,
    psi: &PsiFunction,
    horizon: u64,
    opts: &TraceOptions,
) -> Result<Trace> {
    opts.validate()?;
    c.require_ratio_non_increasing(psi, "nc1_trace")?;
    c.check_horizon(horizon)?;
    let mut t = opts.tracker(horizon);
    let mut weight = WeightSum::for_psi(psi);
    let mut checker = HintChecker::new(c.hint());
    let mut err = None;
    for_each_indicator(a, horizon, |n, hit| {
        if err.is_some() {
            return;
        }
        if hit {
            weight.add_derivative(psi, n);
        }
        let cn = match c.get(n).and_then(|v| checker.observe(n, v).map(|_| v)) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let v = if cn == 0.0 {
            0.0
        } else {
            (weight.ln() - psi.ln_derivative(n as f64)).exp() * cn
        };
        t.observe(n, v);
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Trace::from_tracker(
        format!("nc1 {} over {} / {}", c.label(), a.label(), psi.label()),
        t,
        horizon,
        opts,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub mode: SumMode,
    /// Exact mode: `lhs == rhs` as rationals. Compensated mode:
    /// `abs_gap ≤ 1e-10·max(1, |lhs|)`.
    pub holds: bool,
}

pub(crate) fn float_identity(n: u64, lhs: f64, rhs: f64) -> IdentityCheck {
    let abs_gap = (lhs - rhs).abs();
    IdentityCheck {
        n,
        lhs,
        rhs,
        abs_gap,
        mode: SumMode::Compensated,
        holds: abs_gap <= 1e-10 * lhs.abs().max(1.0),
    }
}

pub(crate) fn exact_identity(n: u64, lhs: &BigRational, rhs: &BigRational) -> IdentityCheck {
    let gap = lhs - rhs;
    IdentityCheck {
        n,
        lhs: ratio_to_f64(lhs),
        rhs: ratio_to_f64(rhs),
        abs_gap: ratio_to_f64(&gap.abs()),
        mode: SumMode::ExactRational,
        holds: gap.is_zero(),
    }
}

pub(crate) fn exact_psi_prime(psi: &PsiFunction, k: u64) -> Result<BigRational> {
    psi.exact_derivative(k).ok_or_else(|| {
        Error::Capability(format!("{} has no exact rational derivative", psi.label()))
    })
}

/// Both sides of
/// `Σ_{k≤n} χ_A(k)c_k = c_n A_ψ(n)/ψ′(n) + Σ_{k<n} A_ψ(k)(c_k/ψ′(k) − c_{k+1}/ψ′(k+1))`.
pub fn abel_identity_check(
    c: &CoeffSequence,
    a: &IntegerSet,
    psi: &PsiFunction,
    n: u64,
    mode: SumMode,
) -> Result<IdentityCheck> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let chi = a.indicator(n)?;
    match mode {
        SumMode::Compensated => {
            let mut lhs = CompensatedSum::new();
            let mut rhs = CompensatedSum::new();
            let mut weight = CompensatedSum::new();
            let mut ratio = c.get(1)? / psi.derivative(1.0);
            for k in 1..=n {
                if chi[k as usize - 1] {
                    lhs.add(c.get(k)?);
                    weight.add(psi.derivative(k as f64));
                }
                if k < n {
                    let next = c.get(k + 1)? / psi.derivative((k + 1) as f64);
                    rhs.add(weight.value() * (ratio - next));
                    ratio = next;
                } else {
                    rhs.add(c.get(n)? * weight.value() / psi.derivative(n as f64));
                }
            }
            Ok(float_identity(n, lhs.value(), rhs.value()))
        }
        SumMode::ExactRational => {
            let mut lhs = BigRational::zero();
            let mut weight = BigRational::zero();
            let mut sum = BigRational::zero();
            let mut ratio = c.exact(1)? / exact_psi_prime(psi, 1)?;
            let mut cn = BigRational::zero();
            let mut dn = BigRational::zero();
            for k in 1..=n {
                let ck = c.exact(k)?;
                let dk = exact_psi_prime(psi, k)?;
                if chi[k as usize - 1] {
                    lhs += &ck;
                    weight += &dk;
                }
                if k < n {
                    let next = c.exact(k + 1)? / exact_psi_prime(psi, k + 1)?;
                    sum += &weight * (&ratio - &next);
                    ratio = next;
                } else {
                    cn = ck;
                    dn = dk;
                }
            }
            let rhs = cn * &weight / dn + sum;
            Ok(exact_identity(n, &lhs, &rhs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SalatCondition {
    /// `ψ(n)c_n`, for concave ψ.
    S1Concave,
    /// `(ψ(n)/ψ′(n))c_n`, for convex ψ.
    S1Convex,
}

pub fn condition_trace(
    c: &CoeffSequence,
    psi: &PsiFunction,
    horizon: u64,
    which: SalatCondition,
    opts: &TraceOptions,
) -> Result<Trace> {
    opts.validate()?;
    let class = psi.class_report();
    let (ok, name) = match which {
        SalatCondition::S1Concave => (class.in_d1, "D1"),
        SalatCondition::S1Convex => (class.in_d2, "D2"),
    };
    if !ok {
        return Err(Error::Class(format!("{} is not in {name}", psi.label())));
    }
    c.check_horizon(horizon)?;
    let mut t = opts.tracker(horizon);
    for n in 1..=horizon {
        let x = n as f64;
        let w = match which {
            SalatCondition::S1Concave => psi.value(x),
            SalatCondition::S1Convex => psi.value_over_derivative(x),
        };
        t.observe(n, w * c.get(n)?);
    }
    Ok(Trace::from_tracker(
        format!("condition {} / {}", c.label(), psi.label()),
        t,
        horizon,
        opts,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    ReachedThreshold { at_n: u64, partial_sum: f64 },
    Inconclusive { budget_spent: u64, partial_sum: f64 },
}

/// First `n ≤ budget` with `Σ_{k≤n} χ_A(k)c_k > threshold`.
pub fn divergence_probe(
    c: &CoeffSequence,
    a: &IntegerSet,
    threshold: f64,
    budget: u64,
) -> Result<Verdict> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut limit = budget;
    if let Some(h) = a.horizon() {
        limit = limit.min(h);
    }
    if let Some(h) = c.horizon() {
        limit = limit.min(h);
    }
    let mut acc = CompensatedSum::new();
    for k in a.members(limit)? {
        acc.add(c.get(k)?);
        if acc.value() > threshold {
            return Ok(Verdict::ReachedThreshold {
                at_n: k,
                partial_sum: acc.value(),
            });
        }
    }
    Ok(Verdict::Inconclusive {
        budget_spent: limit,
        partial_sum: acc.value(),
    })
}
