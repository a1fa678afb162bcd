//! Sub-signed series `Σ m_n c_n` with `m_n ∈ {−1, 0, 1}`: the A/B/C
//! decomposition, the signed Abel identity, the Toeplitz transform built from
//! `c/ψ′`, weighted means, and the signed density traces.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::series::{
    exact_identity, exact_psi_prime, float_identity, CoeffSequence, HintChecker, IdentityCheck,
    MonotonicityHint, SumMode, Trace, TraceOptions,
};
use crate::sets::IntegerSet;
use crate::summation::CompensatedSum;

/// Slack used when comparing tail-window extremes of two sequences.
pub const SANDWICH_SLACK: f64 = 0.02;

#[derive(Clone)]
enum SignSource {
    Alternating,
    AlternatingOn(IntegerSet),
    Indicator(IntegerSet),
    Constant(i64),
    Table(Arc<Vec<i64>>),
    Func(Arc<dyn Fn(u64) -> i64 + Send + Sync>),
}

/// `n ↦ m_n`, checked to lie in `{−1, 0, 1}` on every access.
#[derive(Clone)]
pub struct SignSequence {
    source: SignSource,
    label: String,
}

impl fmt::Debug for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignSequence")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

fn check_sign(n: u64, v: i64) -> Result<i8> {
    match v {
        -1 | 0 | 1 => Ok(v as i8),
        _ => Err(Error::SignValue { n, value: v }),
    }
}

impl SignSequence {
    /// `(−1)^{n+1}`.
    pub fn alternating() -> Self {
        Self {
            source: SignSource::Alternating,
            label: "alt".into(),
        }
    }

    /// `±1` alternating along the elements of `set` (first element `+1`), 0 elsewhere.
    pub fn alternating_on(set: IntegerSet) -> Self {
        let label = format!("alt-on:{}", set.label());
        Self {
            source: SignSource::AlternatingOn(set),
            label,
        }
    }

    /// `χ_set(n)`.
    pub fn indicator(set: IntegerSet) -> Self {
        let label = format!("indicator:{}", set.label());
        Self {
            source: SignSource::Indicator(set),
            label,
        }
    }

    pub fn constant(v: i64) -> Result<Self> {
        check_sign(1, v)?;
        Ok(Self {
            source: SignSource::Constant(v),
            label: format!("const:{v}"),
        })
    }

    /// `table[i] = m_{i+1}`.
    pub fn table(label: impl Into<String>, table: Vec<i64>) -> Result<Self> {
        for (i, &v) in table.iter().enumerate() {
            check_sign(i as u64 + 1, v)?;
        }
        Ok(Self {
            source: SignSource::Table(Arc::new(table)),
            label: label.into(),
        })
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(u64) -> i64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            source: SignSource::Func(Arc::new(f)),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn get(&self, n: u64) -> Result<i8> {
        if n == 0 {
            return Err(Error::Domain("signs are indexed from 1".into()));
        }
        let v = match &self.source {
            SignSource::Alternating => {
                if n % 2 == 1 {
                    1
                } else {
                    -1
                }
            }
            SignSource::AlternatingOn(s) => {
                if s.contains(n)? {
                    if s.count(n)? % 2 == 1 {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                }
            }
            SignSource::Indicator(s) => s.contains(n)? as i64,
            SignSource::Constant(v) => *v,
            SignSource::Table(t) => *t.get(n as usize - 1).ok_or(Error::Horizon {
                queried: n,
                horizon: t.len() as u64,
            })?,
            SignSource::Func(f) => f(n),
        };
        check_sign(n, v)
    }

    /// `m_1, …, m_horizon` (index 0 is `n = 1`).
    pub fn prefix(&self, horizon: u64) -> Result<Vec<i8>> {
        match &self.source {
            SignSource::AlternatingOn(s) => {
                let mut out = vec![0i8; horizon as usize];
                for (j, k) in s.members(horizon)?.enumerate() {
                    out[k as usize - 1] = if j % 2 == 0 { 1 } else { -1 };
                }
                Ok(out)
            }
            SignSource::Indicator(s) => {
                Ok(s.indicator(horizon)?.into_iter().map(|b| b as i8).collect())
            }
            _ => (1..=horizon).map(|n| self.get(n)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ABDecomposition {
    pub set_a: IntegerSet,
    pub set_b: IntegerSet,
    pub set_c: IntegerSet,
    pub horizon: u64,
}

/// `A = {m = 1}`, `B = {m = −1}`, `C = {m = 0}` on `[1, horizon]`.
pub fn decompose(m: &SignSequence, horizon: u64) -> Result<ABDecomposition> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let prefix = Arc::new(m.prefix(horizon)?);
    let view = |target: i8, name: &str| {
        let p = prefix.clone();
        IntegerSet::predicate(format!("{name}({})", m.label()), horizon, move |n| {
            p[n as usize - 1] == target
        })
    };
    let d = ABDecomposition {
        set_a: view(1, "A"),
        set_b: view(-1, "B"),
        set_c: view(0, "C"),
        horizon,
    };
    for n in 1..=horizon {
        let (a, b, c) = (
            d.set_a.contains(n)?,
            d.set_b.contains(n)?,
            d.set_c.contains(n)?,
        );
        let mn = prefix[n as usize - 1];
        if a as u8 + b as u8 + c as u8 != 1 || mn != a as i8 - b as i8 {
            return Err(Error::InvalidSet(format!("partition broken at n = {n}")));
        }
    }
    Ok(d)
}

/// `Σ_{k≤n} m_k c_k`.
pub fn subsigned_partial_sums(
    m: &SignSequence,
    c: &CoeffSequence,
    horizon: u64,
    opts: &TraceOptions,
) -> Result<Trace> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let signs = m.prefix(horizon)?;
    let mut t = opts.tracker(horizon);
    let mut acc = CompensatedSum::new();
    for n in 1..=horizon {
        let s = signs[n as usize - 1];
        if s != 0 {
            acc.add(s as f64 * c.get(n)?);
        }
        t.observe(n, acc.value());
    }
    Ok(Trace::from_tracker(
        format!("subsigned {} x {}", m.label(), c.label()),
        t,
        horizon,
        opts,
    ))
}

/// Both sides of
/// `P_n = (A_ψ(n) − B_ψ(n)) c_n/ψ′(n) + (c_n/ψ′(n)) Σ_{k<n} (ψ′(k+1)/c_{k+1} − ψ′(k)/c_k) P_k`.
pub fn abel_signed_identity_check(
    m: &SignSequence,
    c: &CoeffSequence,
    psi: &PsiFunction,
    n: u64,
    mode: SumMode,
) -> Result<IdentityCheck> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let signs = m.prefix(n)?;
    match mode {
        SumMode::Compensated => {
            let mut coeffs = Vec::with_capacity(n as usize);
            for k in 1..=n {
                let ck = c.get(k)?;
                if ck == 0.0 {
                    return Err(Error::ZeroCoefficient(k));
                }
                coeffs.push(ck);
            }
            let mut p = CompensatedSum::new();
            let mut signed_weight = CompensatedSum::new();
            let mut inner = CompensatedSum::new();
            let mut prev_ratio = psi.derivative(1.0) / coeffs[0];
            for k in 1..=n {
                let s = signs[k as usize - 1] as f64;
                p.add(s * coeffs[k as usize - 1]);
                signed_weight.add(s * psi.derivative(k as f64));
                if k < n {
                    let next = psi.derivative((k + 1) as f64) / coeffs[k as usize];
                    inner.add((next - prev_ratio) * p.value());
                    prev_ratio = next;
                }
            }
            let scale = coeffs[n as usize - 1] / psi.derivative(n as f64);
            let rhs = signed_weight.value() * scale + scale * inner.value();
            Ok(float_identity(n, p.value(), rhs))
        }
        SumMode::ExactRational => {
            let mut coeffs = Vec::with_capacity(n as usize);
            let mut derivs = Vec::with_capacity(n as usize);
            for k in 1..=n {
                let ck = c.exact(k)?;
                if ck.is_zero() {
                    return Err(Error::ZeroCoefficient(k));
                }
                coeffs.push(ck);
                derivs.push(exact_psi_prime(psi, k)?);
            }
            let mut p = BigRational::zero();
            let mut signed_weight = BigRational::zero();
            let mut inner = BigRational::zero();
            let mut prev_ratio = &derivs[0] / &coeffs[0];
            for k in 0..n as usize {
                match signs[k] {
                    1 => {
                        p += &coeffs[k];
                        signed_weight += &derivs[k];
                    }
                    -1 => {
                        p -= &coeffs[k];
                        signed_weight -= &derivs[k];
                    }
                    _ => {}
                }
                if k + 1 < n as usize {
                    let next = &derivs[k + 1] / &coeffs[k + 1];
                    inner += (&next - &prev_ratio) * &p;
                    prev_ratio = next;
                }
            }
            let last = n as usize - 1;
            let scale = &coeffs[last] / &derivs[last];
            let rhs = &scale * (signed_weight + inner);
            Ok(exact_identity(n, &p, &rhs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToeplitzRow {
    pub n: u64,
    /// `c_{n,k}` for `k = 1..n−1`.
    pub row: Vec<f64>,
    pub row_sum: f64,
    pub closed_form_sum: f64,
    pub abs_gap: f64,
    pub nonnegative: bool,
}

fn ratio_weights(c: &CoeffSequence, psi: &PsiFunction, n: u64) -> Result<(f64, Vec<f64>)> {
    let mut inv = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let ck = c.get(k)?;
        if ck == 0.0 {
            return Err(Error::ZeroCoefficient(k));
        }
        inv.push(psi.derivative(k as f64) / ck);
    }
    let d = inv.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((1.0 / inv[n as usize - 1], d))
}

/// Row `n` of `c_{n,k} = (c_n/ψ′(n))(ψ′(k+1)/c_{k+1} − ψ′(k)/c_k)`, `k < n`.
pub fn toeplitz_rows(c: &CoeffSequence, psi: &PsiFunction, n: u64) -> Result<ToeplitzRow> {
    c.require_ratio_non_increasing(psi, "toeplitz_rows")?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (scale, d) = ratio_weights(c, psi, n)?;
    let row: Vec<f64> = d.iter().map(|dk| scale * dk).collect();
    let row_sum = row.iter().copied().collect::<CompensatedSum>().value();
    let closed_form_sum = 1.0 - psi.derivative(1.0) / c.get(1)? * scale;
    let tol = 1e-12 * row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ToeplitzRow {
        n,
        nonnegative: row.iter().all(|&v| v >= -tol),
        abs_gap: (row_sum - closed_form_sum).abs(),
        row,
        row_sum,
        closed_form_sum,
    })
}

type RowFn = Arc<dyn Fn(u64) -> Vec<f64> + Send + Sync>;

/// Where the rows of a Toeplitz transform come from.
#[derive(Clone)]
pub enum ToeplitzSource {
    /// Rows built from `c/ψ′`; evaluated in `O(horizon)` through a prefix sum.
    Separable { c: CoeffSequence, psi: PsiFunction },
    /// Explicit rows: `rows(n)` returns `c_{n,1..=n}`.
    Dense(RowFn),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToeplitzReport {
    pub y: Trace,
    pub x_tail_min: f64,
    pub x_tail_max: f64,
    pub y_tail_min: f64,
    pub y_tail_max: f64,
    /// `liminf x − slack ≤ liminf y` and `limsup y ≤ limsup x + slack` on the window.
    pub sandwich_holds: bool,
    pub slack: f64,
}

/// `y_n = Σ_{k≤n} c_{n,k} x_k`.
pub fn toeplitz_transform(
    source: &ToeplitzSource,
    x: &dyn Fn(u64) -> f64,
    horizon: u64,
    opts: &TraceOptions,
) -> Result<ToeplitzReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let mut xt = opts.tracker(horizon);
    let mut yt = opts.tracker(horizon);
    match source {
        ToeplitzSource::Separable { c, psi } => {
            c.require_ratio_non_increasing(psi, "toeplitz_transform")?;
            let mut checker = HintChecker::new(c.hint());
            let mut acc = CompensatedSum::new();
            let c1 = c.get(1)?;
            if c1 == 0.0 {
                return Err(Error::ZeroCoefficient(1));
            }
            let mut prev_inv = psi.derivative(1.0) / c1;
            checker.observe(1, c1)?;
            xt.observe(1, x(1));
            yt.observe(1, 0.0);
            for n in 2..=horizon {
                let cn = c.get(n)?;
                if cn == 0.0 {
                    return Err(Error::ZeroCoefficient(n));
                }
                checker
                    .observe(n, cn)
                    .map_err(|e| Error::Condition(e.to_string()))?;
                let inv = psi.derivative(n as f64) / cn;
                let d = inv - prev_inv;
                if d < -1e-12 * inv.abs() {
                    return Err(Error::Condition(format!(
                        "row entry c_{{n,{}}} is negative",
                        n - 1
                    )));
                }
                acc.add(d * x(n - 1));
                prev_inv = inv;
                xt.observe(n, x(n));
                yt.observe(n, acc.value() / inv);
            }
        }
        ToeplitzSource::Dense(rows) => {
            for n in 1..=horizon {
                let row = rows(n);
                if let Some(k) = row.iter().position(|&v| v < 0.0) {
                    return Err(Error::Condition(format!(
                        "row {n} has negative entry at k = {}",
                        k + 1
                    )));
                }
                let y = row
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| r * x(i as u64 + 1))
                    .collect::<CompensatedSum>();
                xt.observe(n, x(n));
                yt.observe(n, y.value());
            }
        }
    }
    let (x_min, x_max) = (xt.min, xt.max);
    let y = Trace::from_tracker("toeplitz y", yt, horizon, opts);
    Ok(ToeplitzReport {
        sandwich_holds: x_min - SANDWICH_SLACK <= y.tail_inf
            && y.tail_max <= x_max + SANDWICH_SLACK,
        x_tail_min: x_min,
        x_tail_max: x_max,
        y_tail_min: y.tail_inf,
        y_tail_max: y.tail_max,
        slack: SANDWICH_SLACK,
        y,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RajagopalReport {
    pub sigma_a: Trace,
    pub sigma_b: Trace,
    pub a_total: f64,
    pub b_total: f64,
    /// `liminf σ_b ≤ liminf σ_a ≤ limsup σ_a ≤ limsup σ_b` up to the slack.
    pub sandwich_holds: bool,
    pub anomalies: Vec<String>,
    pub slack: f64,
}

/// Threshold the weight sums must cross for the means to be meaningful.
pub const DIVERGENCE_THRESHOLD: f64 = 1.0;

/// `σ(s, a)_n = Σ a_k s_k / Σ a_k` and the same for `b`.
pub fn rajagopal_means(
    s: &dyn Fn(u64) -> f64,
    a: &CoeffSequence,
    b: &CoeffSequence,
    horizon: u64,
    threshold: f64,
    opts: &TraceOptions,
) -> Result<RajagopalReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let mut ta = opts.tracker(horizon);
    let mut tb = opts.tracker(horizon);
    let (mut na, mut da) = (CompensatedSum::new(), CompensatedSum::new());
    let (mut nb, mut db) = (CompensatedSum::new(), CompensatedSum::new());
    let mut prev_ratio: Option<f64> = None;
    let prefix = horizon.min(crate::series::HINT_PREFIX);
    for n in 1..=horizon {
        let (an, bn, sn) = (a.get(n)?, b.get(n)?, s(n));
        if n <= prefix && bn > 0.0 {
            let r = an / bn;
            if let Some(p) = prev_ratio {
                if r > p + 1e-12 * p.abs().max(r.abs()) {
                    return Err(Error::Hint(format!("a_n/b_n increases at n = {n}")));
                }
            }
            prev_ratio = Some(r);
        }
        na.add(an * sn);
        da.add(an);
        nb.add(bn * sn);
        db.add(bn);
        if da.value() > 0.0 {
            ta.observe(n, na.value() / da.value());
        }
        if db.value() > 0.0 {
            tb.observe(n, nb.value() / db.value());
        }
    }
    for (name, total) in [("A_n", da.value()), ("B_n", db.value())] {
        if !(total > threshold) {
            return Err(Error::DivergencePrereq(format!(
                "{name} = {total} did not exceed {threshold} by n = {horizon}"
            )));
        }
    }
    let sigma_a = Trace::from_tracker(format!("sigma(s, {})", a.label()), ta, horizon, opts);
    let sigma_b = Trace::from_tracker(format!("sigma(s, {})", b.label()), tb, horizon, opts);
    let mut anomalies = Vec::new();
    if sigma_b.tail_inf > sigma_a.tail_inf + SANDWICH_SLACK {
        anomalies.push(format!(
            "liminf: sigma_b {} > sigma_a {}",
            sigma_b.tail_inf, sigma_a.tail_inf
        ));
    }
    if sigma_a.tail_max > sigma_b.tail_max + SANDWICH_SLACK {
        anomalies.push(format!(
            "limsup: sigma_a {} > sigma_b {}",
            sigma_a.tail_max, sigma_b.tail_max
        ));
    }
    Ok(RajagopalReport {
        a_total: da.value(),
        b_total: db.value(),
        sandwich_holds: anomalies.is_empty(),
        anomalies,
        slack: SANDWICH_SLACK,
        sigma_a,
        sigma_b,
    })
}

/// What the caller asserts about convergence of `Σ m_n c_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceClaim {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasullReport {
    /// `(A_ψ(n) − B_ψ(n)) c_n/ψ′(n)`.
    pub nc_trace: Trace,
    /// `(A_ψ(n) − B_ψ(n))/ψ(n)`.
    pub density_gap_trace: Trace,
    /// `(2A_ψ(n) − Σψ′(k)) c_n/ψ′(n)`, only when `C` is empty on the prefix.
    pub nc2_trace: Option<Trace>,
    /// `max |nc − nc2|` over all `n`, when `nc2_trace` exists.
    pub nc2_max_deviation: Option<f64>,
    pub hint: String,
    pub caller_claim: ConvergenceClaim,
}

pub fn gasull_traces(
    m: &SignSequence,
    c: &CoeffSequence,
    psi: &PsiFunction,
    horizon: u64,
    claim: ConvergenceClaim,
    opts: &TraceOptions,
) -> Result<GasullReport> {
    match c.hint() {
        MonotonicityHint::RatioNonIncreasing(p) | MonotonicityHint::RatioNonDecreasing(p)
            if p.label() == psi.label() => {}
        _ => {
            return Err(Error::Hint(format!(
                "gasull_traces requires {} to declare c_n/ψ′(n) monotone for {}",
                c.label(),
                psi.label()
            )))
        }
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let signs = m.prefix(horizon)?;
    let c_empty = signs.iter().all(|&s| s != 0);
    let mut checker = HintChecker::new(c.hint());
    let (mut nc, mut gap) = (opts.tracker(horizon), opts.tracker(horizon));
    let mut nc2 = opts.tracker(horizon);
    let (mut wa, mut wb, mut total) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let mut max_dev = 0.0f64;
    for n in 1..=horizon {
        let x = n as f64;
        let d = psi.derivative(x);
        match signs[n as usize - 1] {
            1 => wa.add(d),
            -1 => wb.add(d),
            _ => {}
        }
        total.add(d);
        let cn = c.get(n)?;
        checker.observe(n, cn)?;
        let diff = wa.value() - wb.value();
        let scale = cn / d;
        let v = diff * scale;
        if !v.is_finite() {
            return Err(Error::Overflow {
                what: format!("A_ψ({n}) − B_ψ({n})"),
                log_value: psi.ln_value(x),
            });
        }
        nc.observe(n, v);
        gap.observe(n, diff / psi.value(x));
        if c_empty {
            let v2 = (2.0 * wa.value() - total.value()) * scale;
            max_dev = max_dev.max((v2 - v).abs());
            nc2.observe(n, v2);
        }
    }
    let label = format!("{} x {} / {}", m.label(), c.label(), psi.label());
    Ok(GasullReport {
        nc_trace: Trace::from_tracker(format!("nc {label}"), nc, horizon, opts),
        density_gap_trace: Trace::from_tracker(format!("density gap {label}"), gap, horizon, opts),
        nc2_trace: c_empty.then(|| Trace::from_tracker(format!("nc2 {label}"), nc2, horizon, opts)),
        nc2_max_deviation: c_empty.then_some(max_dev),
        hint: c.hint().name().into(),
        caller_claim: claim,
    })
}

/// `log 2 = Σ_{k≥1} 1/(k·2^k)`, summed exactly to 60 terms.
pub fn ln2_reference() -> f64 {
    let mut acc = BigRational::zero();
    let mut pow = BigRational::one();
    let half = BigRational::new(1.into(), 2.into());
    for k in 1..=60u32 {
        pow *= &half;
        acc += &pow / BigRational::from_integer(k.into());
    }
    crate::psi::ratio_to_f64(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::prime_set;

    fn ratio_hint(c: CoeffSequence, psi: &PsiFunction) -> CoeffSequence {
        c.with_hint(MonotonicityHint::RatioNonIncreasing(psi.clone()))
            .unwrap()
    }

    #[test]
    fn sign_values_are_checked() {
        assert!(SignSequence::constant(2).is_err());
        let bad = SignSequence::from_fn("bad", |n| if n == 3 { 5 } else { 1 });
        assert_eq!(bad.prefix(5), Err(Error::SignValue { n: 3, value: 5 }));
    }

    #[test]
    fn decompose_alternating() {
        let d = decompose(&SignSequence::alternating(), 100).unwrap();
        assert_eq!(d.set_a.count(100).unwrap(), 50);
        assert!(d.set_a.contains(1).unwrap() && d.set_b.contains(2).unwrap());
        assert_eq!(d.set_c.count(100).unwrap(), 0);
    }

    #[test]
    fn decompose_indicator_and_primes() {
        let d = decompose(&SignSequence::indicator(IntegerSet::squares()), 100).unwrap();
        assert_eq!(d.set_a.count(100).unwrap(), 10);
        assert_eq!(d.set_b.count(100).unwrap(), 0);
        assert_eq!(d.set_c.count(100).unwrap(), 90);
        let d = decompose(&SignSequence::alternating_on(prime_set(30).unwrap()), 30).unwrap();
        let a: Vec<u64> = d.set_a.members(30).unwrap().collect();
        let b: Vec<u64> = d.set_b.members(30).unwrap().collect();
        assert_eq!(a, vec![2, 5, 11, 17, 23]);
        assert_eq!(b, vec![3, 7, 13, 19, 29]);
        assert!(d.set_c.contains(1).unwrap());
    }

    #[test]
    fn alternating_harmonic() {
        let t = subsigned_partial_sums(
            &SignSequence::alternating(),
            &CoeffSequence::recip(),
            1_000_000,
            &TraceOptions::default(),
        )
        .unwrap();
        assert!((t.final_value - ln2_reference()).abs() <= 1e-6);
        let z = subsigned_partial_sums(
            &SignSequence::constant(0).unwrap(),
            &CoeffSequence::recip(),
            100,
            &TraceOptions::default(),
        )
        .unwrap();
        assert!(z.points.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn ln2_matches_std() {
        assert!((ln2_reference() - std::f64::consts::LN_2).abs() < 1e-16);
    }

    #[test]
    fn signed_abel_examples() {
        let id = PsiFunction::identity();
        let r = abel_signed_identity_check(
            &SignSequence::alternating(),
            &CoeffSequence::recip(),
            &id,
            6,
            SumMode::Compensated,
        )
        .unwrap();
        assert!((r.lhs - 0.616_666_666_666_666_6).abs() < 1e-15);
        assert!(r.abs_gap <= 1e-12);
        let r = abel_signed_identity_check(
            &SignSequence::constant(1).unwrap(),
            &CoeffSequence::constant(1.0).unwrap(),
            &id,
            5,
            SumMode::ExactRational,
        )
        .unwrap();
        assert!(r.holds && r.lhs == 5.0);
        let r = abel_signed_identity_check(
            &SignSequence::alternating(),
            &CoeffSequence::recip(),
            &PsiFunction::power(2.0),
            200,
            SumMode::ExactRational,
        )
        .unwrap();
        assert!(r.holds);
        let zero = CoeffSequence::table("z", vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            abel_signed_identity_check(
                &SignSequence::alternating(),
                &zero,
                &id,
                3,
                SumMode::Compensated
            ),
            Err(Error::ZeroCoefficient(2))
        );
    }

    #[test]
    fn toeplitz_row_examples() {
        let id = PsiFunction::identity();
        let c = ratio_hint(CoeffSequence::recip(), &id);
        let r = toeplitz_rows(&c, &id, 4).unwrap();
        assert_eq!(r.row, vec![0.25, 0.25, 0.25]);
        assert_eq!(r.row_sum, 0.75);
        assert_eq!(r.closed_form_sum, 0.75);
        let same = ratio_hint(CoeffSequence::constant(1.0).unwrap(), &id);
        let r = toeplitz_rows(&same, &id, 10).unwrap();
        assert!(r.row.iter().all(|&v| v == 0.0) && r.row_sum == 0.0 && r.closed_form_sum == 0.0);
        assert!(matches!(
            toeplitz_rows(&CoeffSequence::recip(), &id, 4),
            Err(Error::Hint(_))
        ));
        let col: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| toeplitz_rows(&c, &id, n).unwrap().row[0])
            .collect();
        assert!(col[0] > col[1] && col[1] > col[2]);
    }

    #[test]
    fn toeplitz_transform_examples() {
        let id = PsiFunction::identity();
        let src = ToeplitzSource::Separable {
            c: ratio_hint(CoeffSequence::recip(), &id),
            psi: id.clone(),
        };
        let opts = TraceOptions::default();
        let r = toeplitz_transform(&src, &|_| 1.0, 1000, &opts).unwrap();
        for &(n, y) in &r.y.points {
            assert!((y - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
        }
        let r = toeplitz_transform(
            &src,
            &|n| if n % 2 == 0 { 1.0 } else { -1.0 },
            10_000,
            &opts,
        )
        .unwrap();
        assert!(r.y_tail_min >= -1.0 && r.y_tail_max <= 1.0);
        let r = toeplitz_transform(&src, &|n| 0.3 + 1.0 / n as f64, 100_000, &opts).unwrap();
        assert!((r.y.final_value - 0.3).abs() < 0.01);
        assert!(r.sandwich_holds);
        let dense = ToeplitzSource::Dense(Arc::new(|n| {
            let mut row = vec![1.0 / n as f64; n as usize];
            row[0] = -1.0;
            row
        }));
        assert!(matches!(
            toeplitz_transform(&dense, &|_| 1.0, 5, &opts),
            Err(Error::Condition(_))
        ));
    }

    #[test]
    fn rajagopal_examples() {
        let evens = |n: u64| (n % 2 == 0) as u8 as f64;
        let one = CoeffSequence::constant(1.0).unwrap();
        let opts = TraceOptions::default();
        let r = rajagopal_means(&evens, &one, &one, 10, 1.0, &opts).unwrap();
        assert_eq!(r.sigma_b.final_value, 0.5);
        let r = rajagopal_means(&evens, &CoeffSequence::recip(), &one, 4, 1.0, &opts).unwrap();
        assert!((r.sigma_a.final_value - 0.75 / (1.0 + 0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-15);
        let r = rajagopal_means(
            &evens,
            &CoeffSequence::recip_pow(2.0),
            &one,
            1000,
            2.0,
            &opts,
        );
        assert!(matches!(r, Err(Error::DivergencePrereq(_))));
    }

    #[test]
    fn gasull_examples() {
        let id = PsiFunction::identity();
        let c = ratio_hint(CoeffSequence::recip(), &id);
        let h = 100_000;
        let opts = TraceOptions::default();
        let r = gasull_traces(
            &SignSequence::alternating(),
            &c,
            &id,
            h,
            ConvergenceClaim::Converges,
            &opts,
        )
        .unwrap();
        assert!(r.nc_trace.tail_sup <= 1.0 / (h as f64 * 0.5));
        assert!(r.density_gap_trace.tail_sup <= 1.0 / (h as f64 * 0.5));
        assert!(r.nc2_max_deviation.unwrap() <= 1e-12);
        let r = gasull_traces(
            &SignSequence::indicator(IntegerSet::squares()),
            &c,
            &id,
            h,
            ConvergenceClaim::Converges,
            &opts,
        )
        .unwrap();
        assert!((r.nc_trace.final_value - (h as f64).sqrt().floor() / h as f64).abs() < 1e-15);
        assert!(r.nc2_trace.is_none());
        assert!(gasull_traces(
            &SignSequence::alternating(),
            &CoeffSequence::recip(),
            &id,
            10,
            ConvergenceClaim::Unknown,
            &opts
        )
        .is_err());
    }
}
