//! Subsets of ℕ, their counting functions `A(n)` and weighted counts
//! `A_ψ(n)`, and finite-horizon linear and ψ-density estimates.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::summation::{CompensatedSum, LogSumExp, TailTracker};

/// Default tail fraction of every finite-horizon estimate.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Interval blocks longer than this are weighted through the sandwich bracket.
pub const DEFAULT_BLOCK_THRESHOLD: u64 = 1 << 16;
/// Additive slack of the density chain comparisons.
pub const CHAIN_SLACK: f64 = 0.02;

type Membership = Arc<dyn Fn(u64) -> bool + Send + Sync>;
type GeneratorFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// `n ↦ φ(n)` for `n ≥ 1`, strictly increasing; `φ(0) = 0` by convention.
#[derive(Clone)]
pub enum Generator {
    Func(GeneratorFn),
    /// `table[i] = φ(i + 1)`; the set is known only up to the last entry.
    Table(Arc<Vec<u64>>),
}

impl Generator {
    pub fn func(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        Generator::Func(Arc::new(f))
    }

    /// `φ(j)`; `None` if a table generator is queried past its end.
    pub fn get(&self, j: u64) -> Option<u64> {
        if j == 0 {
            return Some(0);
        }
        match self {
            Generator::Func(f) => Some(f(j)),
            Generator::Table(t) => t.get(j as usize - 1).copied(),
        }
    }
}

/// `{first + i·stride : i ≥ 0} ∩ [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProgressionSegment {
    pub first: u64,
    pub stride: u64,
    pub lo: u64,
    pub hi: u64,
}

impl ProgressionSegment {
    fn count_upto(&self, x: u64) -> u64 {
        if x < self.first {
            0
        } else {
            (x - self.first) / self.stride + 1
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= self.lo && k <= self.hi && k >= self.first && (k - self.first) % self.stride == 0
    }

    pub fn count_within(&self, n: u64) -> u64 {
        let top = self.hi.min(n);
        if top < self.lo {
            return 0;
        }
        self.count_upto(top) - self.count_upto(self.lo - 1)
    }

    fn first_member(&self) -> Option<u64> {
        let start = if self.lo <= self.first {
            self.first
        } else {
            let off = self.lo - self.first;
            self.first + off.div_ceil(self.stride) * self.stride
        };
        (start <= self.hi).then_some(start)
    }
}

#[derive(Clone)]
pub enum SetRepr {
    FiniteList(Arc<Vec<u64>>),
    ArithmeticProgression {
        first: u64,
        stride: u64,
    },
    IncreasingGenerator(Generator),
    IntervalUnion(Arc<Vec<(u64, u64)>>),
    Predicate(Membership),
    /// Disjoint, ascending arithmetic-progression pieces.
    ProgressionSegments(Arc<Vec<ProgressionSegment>>),
}

#[derive(Clone)]
pub struct IntegerSet {
    repr: SetRepr,
    label: String,
    /// Largest `n` for which membership is known.
    horizon: Option<u64>,
}

impl fmt::Debug for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegerSet")
            .field("label", &self.label)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

const GENERATOR_SPOT_CHECK: u64 = 1_000;

impl IntegerSet {
    pub fn finite_list(label: impl Into<String>, elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return Err(Error::InvalidSet("elements must be positive".into()));
        }
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSet(format!(
                "list not strictly ascending at {} ≥ {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            repr: SetRepr::FiniteList(Arc::new(elements)),
            label: label.into(),
            horizon: None,
        })
    }

    pub fn arithmetic(first: u64, stride: u64) -> Result<Self> {
        if first == 0 || stride == 0 {
            return Err(Error::InvalidSet(
                "progression needs first ≥ 1 and stride ≥ 1".into(),
            ));
        }
        Ok(Self {
            repr: SetRepr::ArithmeticProgression { first, stride },
            label: format!("ap:{first},{stride}"),
            horizon: None,
        })
    }

    pub fn naturals() -> Self {
        let mut s = Self::arithmetic(1, 1).expect("valid progression");
        s.label = "naturals".into();
        s
    }

    pub fn evens() -> Self {
        let mut s = Self::arithmetic(2, 2).expect("valid progression");
        s.label = "evens".into();
        s
    }

    pub fn odds() -> Self {
        let mut s = Self::arithmetic(1, 2).expect("valid progression");
        s.label = "odds".into();
        s
    }

    pub fn multiples_of(m: u64) -> Result<Self> {
        Self::arithmetic(m, m)
    }

    pub fn generator(label: impl Into<String>, generator: Generator) -> Result<Self> {
        let checked = match &generator {
            Generator::Func(_) => GENERATOR_SPOT_CHECK,
            Generator::Table(t) => t.len() as u64,
        };
        let mut prev = 0;
        for j in 1..=checked {
            let v = generator.get(j).expect("within checked range");
            if j > 1 && v <= prev {
                return Err(Error::InvalidSet(format!(
                    "φ({j}) = {v} does not exceed φ({}) = {prev}",
                    j - 1
                )));
            }
            prev = v;
        }
        let horizon = match &generator {
            Generator::Table(t) => Some(t.last().copied().unwrap_or(0)),
            Generator::Func(_) => None,
        };
        Ok(Self {
            repr: SetRepr::IncreasingGenerator(generator),
            label: label.into(),
            horizon,
        })
    }

    pub fn squares() -> Self {
        Self::generator("squares", Generator::func(|n| n * n)).expect("n² is increasing")
    }

    pub fn interval_union(label: impl Into<String>, intervals: Vec<(u64, u64)>) -> Result<Self> {
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidSet(format!(
                    "interval [{lo}, {hi}] is empty or contains 0"
                )));
            }
            if i > 0 && intervals[i - 1].1 >= lo {
                return Err(Error::InvalidSet(format!(
                    "intervals [{}, {}] and [{lo}, {hi}] overlap or are unsorted",
                    intervals[i - 1].0,
                    intervals[i - 1].1
                )));
            }
        }
        Ok(Self {
            repr: SetRepr::IntervalUnion(Arc::new(intervals)),
            label: label.into(),
            horizon: None,
        })
    }

    pub fn predicate(
        label: impl Into<String>,
        horizon: u64,
        test: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: SetRepr::Predicate(Arc::new(test)),
            label: label.into(),
            horizon: Some(horizon),
        }
    }

    pub fn progression_segments(
        label: impl Into<String>,
        segments: Vec<ProgressionSegment>,
    ) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if s.first == 0 || s.stride == 0 || s.lo == 0 || s.lo > s.hi {
                return Err(Error::InvalidSet(format!("invalid segment {s:?}")));
            }
            if i > 0 && segments[i - 1].hi >= s.lo {
                return Err(Error::InvalidSet("segments overlap or are unsorted".into()));
            }
        }
        Ok(Self {
            repr: SetRepr::ProgressionSegments(Arc::new(segments)),
            label: label.into(),
            horizon: None,
        })
    }

    /// Restrict queries to `n ≤ horizon` (e.g. for a sieved or sampled set).
    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(self.horizon.map_or(horizon, |h| h.min(horizon)));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn repr(&self) -> &SetRepr {
        &self.repr
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    fn check_horizon(&self, n: u64) -> Result<()> {
        match self.horizon {
            Some(h) if n > h => Err(Error::Horizon {
                queried: n,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, k: u64) -> Result<bool> {
        self.check_horizon(k)?;
        if k == 0 {
            return Ok(false);
        }
        Ok(match &self.repr {
            SetRepr::FiniteList(v) => v.binary_search(&k).is_ok(),
            SetRepr::ArithmeticProgression { first, stride } => {
                k >= *first && (k - first) % stride == 0
            }
            SetRepr::IncreasingGenerator(g) => {
                let j = generator_rank(g, k);
                j > 0 && g.get(j) == Some(k)
            }
            SetRepr::IntervalUnion(iv) => {
                let i = iv.partition_point(|&(_, hi)| hi < k);
                i < iv.len() && iv[i].0 <= k
            }
            SetRepr::Predicate(p) => p(k),
            SetRepr::ProgressionSegments(segs) => {
                let i = segs.partition_point(|s| s.hi < k);
                i < segs.len() && segs[i].contains(k)
            }
        })
    }

    /// `A(n) = #{k ∈ A : 1 ≤ k ≤ n}`.
    pub fn count(&self, n: u64) -> Result<u64> {
        self.check_horizon(n)?;
        Ok(match &self.repr {
            SetRepr::FiniteList(v) => v.partition_point(|&x| x <= n) as u64,
            SetRepr::ArithmeticProgression { first, stride } => {
                if n < *first {
                    0
                } else {
                    (n - first) / stride + 1
                }
            }
            SetRepr::IncreasingGenerator(g) => {
                let j = generator_rank(g, n);
                if g.get(1) == Some(0) && j > 0 {
                    j - 1
                } else {
                    j
                }
            }
            SetRepr::IntervalUnion(iv) => iv
                .iter()
                .take_while(|&&(lo, _)| lo <= n)
                .map(|&(lo, hi)| hi.min(n) - lo + 1)
                .sum(),
            SetRepr::Predicate(p) => (1..=n).filter(|&k| p(k)).count() as u64,
            SetRepr::ProgressionSegments(segs) => segs
                .iter()
                .take_while(|s| s.lo <= n)
                .map(|s| s.count_within(n))
                .sum(),
        })
    }

    /// Members in `[1, n]`, ascending.
    pub fn members(&self, n: u64) -> Result<Box<dyn Iterator<Item = u64> + '_>> {
        self.check_horizon(n)?;
        Ok(match &self.repr {
            SetRepr::FiniteList(v) => Box::new(v.iter().copied().take_while(move |&x| x <= n)),
            SetRepr::ArithmeticProgression { first, stride } => {
                Box::new((*first..=n).step_by(*stride as usize))
            }
            SetRepr::IncreasingGenerator(g) => Box::new(
                (1..)
                    .map(move |j| g.get(j))
                    .take_while(move |v| matches!(v, Some(x) if *x <= n))
                    .flatten()
                    .filter(|&x| x > 0),
            ),
            SetRepr::IntervalUnion(iv) => Box::new(
                iv.iter()
                    .take_while(move |&&(lo, _)| lo <= n)
                    .flat_map(move |&(lo, hi)| lo..=hi.min(n)),
            ),
            SetRepr::Predicate(p) => Box::new((1..=n).filter(move |&k| p(k))),
            SetRepr::ProgressionSegments(segs) => Box::new(
                segs.iter()
                    .take_while(move |s| s.lo <= n)
                    .flat_map(move |s| {
                        let top = s.hi.min(n);
                        let start = s.first_member().filter(|&x| x <= top);
                        start
                            .into_iter()
                            .flat_map(move |x| (x..=top).step_by(s.stride as usize))
                    }),
            ),
        })
    }

    /// `χ_A(1), …, χ_A(n)` as a dense vector (index 0 is `k = 1`).
    pub fn indicator(&self, n: u64) -> Result<Vec<bool>> {
        let mut out = vec![false; n as usize];
        for k in self.members(n)? {
            out[k as usize - 1] = true;
        }
        Ok(out)
    }
}

/// Largest `j ≥ 0` with `φ(j) ≤ n` (`φ(0) = 0`).
fn generator_rank(g: &Generator, n: u64) -> u64 {
    let le = |j: u64| g.get(j).is_some_and(|v| v <= n);
    let mut hi = 1;
    while le(hi) {
        if hi > n + 1 {
            break;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // le(lo) holds, le(hi) fails (or hi is past any possible rank).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if le(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Running `Σ ψ′(k)` that switches to the log domain for fast-growing ψ.
#[derive(Debug, Clone, Copy)]
pub(crate) enum WeightSum {
    Linear(CompensatedSum),
    Log(LogSumExp),
}

impl WeightSum {
    pub fn for_psi(psi: &PsiFunction) -> Self {
        if psi.grows_exponentially() {
            WeightSum::Log(LogSumExp::new())
        } else {
            WeightSum::Linear(CompensatedSum::new())
        }
    }

    pub fn add_derivative(&mut self, psi: &PsiFunction, k: u64) {
        match self {
            WeightSum::Linear(s) => s.add(psi.derivative(k as f64)),
            WeightSum::Log(s) => s.add_log(psi.ln_derivative(k as f64)),
        }
    }

    pub fn ln(&self) -> f64 {
        match self {
            WeightSum::Linear(s) => s.value().ln(),
            WeightSum::Log(s) => s.ln(),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            WeightSum::Linear(s) => s.value(),
            WeightSum::Log(s) => s.ln().exp(),
        }
    }

    pub fn ratio(&self, other: &WeightSum) -> f64 {
        match (self, other) {
            (WeightSum::Linear(a), WeightSum::Linear(b)) => a.value() / b.value(),
            _ => (self.ln() - other.ln()).exp(),
        }
    }

    pub fn ratio_to_psi(&self, psi: &PsiFunction, n: u64) -> f64 {
        match self {
            WeightSum::Linear(a) => a.value() / psi.value(n as f64),
            WeightSum::Log(a) => (a.ln() - psi.ln_value(n as f64)).exp(),
        }
    }
}

/// `A_ψ(n)` with a rigorous enclosure `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedCount {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl WeightedCount {
    pub fn bracket_width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `A_ψ(n) = Σ_{k ≤ n, k ∈ A} ψ′(k)` with the default block threshold.
pub fn weighted_count(a: &IntegerSet, psi: &PsiFunction, n: u64) -> Result<WeightedCount> {
    weighted_count_with_threshold(a, psi, n, DEFAULT_BLOCK_THRESHOLD)
}

/// `Σ_{j=lo}^{hi} ψ′(j)` enclosed by the sandwich bracket:
/// `ψ(hi) − ψ(lo−1) − (ψ′(lo−1) − ψ′(hi)) ≤ Σ ≤ ψ(hi) − ψ(lo−1)`.
pub fn block_weight_bracket(psi: &PsiFunction, lo: u64, hi: u64) -> (f64, f64) {
    let (mut lower, mut upper) = (0.0, 0.0);
    let mut lo = lo;
    if (lo as f64 - 1.0) < psi.domain_start() {
        let d = psi.derivative(lo as f64);
        lower += d;
        upper += d;
        lo += 1;
        if lo > hi {
            return (lower, upper);
        }
    }
    let (below, top) = ((lo - 1) as f64, hi as f64);
    let diff = psi.value(top) - psi.value(below);
    let width = psi.derivative(below) - psi.derivative(top);
    (lower + diff - width, upper + diff)
}

pub fn weighted_count_with_threshold(
    a: &IntegerSet,
    psi: &PsiFunction,
    n: u64,
    block_threshold: u64,
) -> Result<WeightedCount> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    a.check_horizon(n)?;
    let brackets = psi.class_report().in_d1;
    if let (SetRepr::IntervalUnion(iv), true) = (&a.repr, brackets) {
        let mut exact = CompensatedSum::new();
        let mut lower = CompensatedSum::new();
        let mut upper = CompensatedSum::new();
        for &(lo, hi) in iv.iter().take_while(|&&(lo, _)| lo <= n) {
            let hi = hi.min(n);
            if hi - lo + 1 > block_threshold {
                let (l, u) = block_weight_bracket(psi, lo, hi);
                lower.add(l);
                upper.add(u);
            } else {
                for k in lo..=hi {
                    exact.add(psi.derivative(k as f64));
                }
            }
        }
        let e = exact.value();
        let (l, u) = (e + lower.value(), e + upper.value());
        return Ok(WeightedCount {
            value: u,
            lower: l,
            upper: u,
        });
    }
    let mut acc = WeightSum::for_psi(psi);
    for k in a.members(n)? {
        acc.add_derivative(psi, k);
    }
    let v = acc.value();
    Ok(WeightedCount {
        value: v,
        lower: v,
        upper: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by `Σ_{k≤n} ψ′(k)`.
    Sum,
    /// Divide by `ψ(n)`; valid when `Σψ′(k) ∼ ψ(n)`.
    PsiValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub set: String,
    pub psi: Option<String>,
    pub normalization: Option<Normalization>,
    pub lower_estimate: f64,
    pub upper_estimate: f64,
    /// Ratio at the horizon itself.
    pub final_ratio: f64,
    pub horizon: u64,
    pub tail_fraction: f64,
    /// Window over which min/max were taken, as indices.
    pub window: (u64, u64),
    pub checkpoints: Vec<(u64, f64)>,
}

fn check_tail_fraction(tf: f64) -> Result<()> {
    if tf > 0.0 && tf < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tail_fraction must lie in (0, 1), got {tf}"
        )))
    }
}

fn check_density_horizon(h: u64) -> Result<()> {
    if h < 1_000 {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least 10^3, got {h}"
        )));
    }
    Ok(())
}

fn finish(
    tracker: TailTracker,
    set: &IntegerSet,
    psi: Option<&PsiFunction>,
    normalization: Option<Normalization>,
    horizon: u64,
    tail_fraction: f64,
) -> DensityReport {
    let w = tracker.window();
    DensityReport {
        set: set.label.clone(),
        psi: psi.map(|p| p.label().to_string()),
        normalization,
        lower_estimate: tracker.min,
        upper_estimate: tracker.max,
        final_ratio: tracker.last,
        horizon,
        tail_fraction,
        window: (w.start, w.end),
        checkpoints: tracker.points,
    }
}

/// Iterate `(n, χ_A(n))` for `n = 1..=horizon` without materializing χ_A.
pub(crate) fn for_each_indicator(
    a: &IntegerSet,
    horizon: u64,
    mut f: impl FnMut(u64, bool),
) -> Result<()> {
    let mut members = a.members(horizon)?.peekable();
    for n in 1..=horizon {
        let hit = members.peek() == Some(&n);
        if hit {
            members.next();
        }
        f(n, hit);
    }
    Ok(())
}

/// Tail-window min/max of `A(n)/n`.
pub fn linear_density_report(
    a: &IntegerSet,
    horizon: u64,
    tail_fraction: f64,
) -> Result<DensityReport> {
    check_density_horizon(horizon)?;
    check_tail_fraction(tail_fraction)?;
    let mut tracker = TailTracker::new(horizon, tail_fraction, 2.0);
    let mut count = 0u64;
    for_each_indicator(a, horizon, |n, hit| {
        count += hit as u64;
        tracker.observe(n, count as f64 / n as f64);
    })?;
    Ok(finish(tracker, a, None, None, horizon, tail_fraction))
}

/// Tail-window min/max of `A_ψ(n)` over the chosen normalization.
pub fn psi_density_report(
    a: &IntegerSet,
    psi: &PsiFunction,
    horizon: u64,
    tail_fraction: f64,
    normalization: Normalization,
) -> Result<DensityReport> {
    check_density_horizon(horizon)?;
    check_tail_fraction(tail_fraction)?;
    if normalization == Normalization::PsiValue && !psi.class_report().satisfies_asym() {
        return Err(Error::Class(format!(
            "{}: Σψ′(k) ∼ ψ(n) not supported, use the sum normalization",
            psi.label()
        )));
    }
    let mut tracker = TailTracker::new(horizon, tail_fraction, 2.0);
    let mut num = WeightSum::for_psi(psi);
    let mut den = WeightSum::for_psi(psi);
    for_each_indicator(a, horizon, |n, hit| {
        den.add_derivative(psi, n);
        if hit {
            num.add_derivative(psi, n);
        }
        let r = match normalization {
            Normalization::Sum => num.ratio(&den),
            Normalization::PsiValue => num.ratio_to_psi(psi, n),
        };
        tracker.observe(n, if r.is_nan() { 0.0 } else { r });
    })?;
    Ok(finish(
        tracker,
        a,
        Some(psi),
        Some(normalization),
        horizon,
        tail_fraction,
    ))
}

/// Ratios `A_ψ(φ(n))/ψ(φ(n))` evaluated only at the set's own elements.
pub fn density_along_phi(
    phi: &IntegerSet,
    psi: &PsiFunction,
    terms: u64,
    tail_fraction: f64,
) -> Result<DensityReport> {
    let SetRepr::IncreasingGenerator(g) = &phi.repr else {
        return Err(Error::InvalidSet(format!(
            "{} is not given by an increasing generator",
            phi.label
        )));
    };
    psi.require_d1("density_along_phi")?;
    if terms < 100 {
        return Err(Error::InvalidArgument(format!(
            "terms must be at least 10^2, got {terms}"
        )));
    }
    check_tail_fraction(tail_fraction)?;
    let mut tracker = TailTracker::new(terms, tail_fraction, 2.0);
    let mut acc = CompensatedSum::new();
    for j in 1..=terms {
        let x = g.get(j).ok_or(Error::Horizon {
            queried: j,
            horizon: phi.horizon.unwrap_or(0),
        })?;
        if x == 0 {
            tracker.observe(j, 0.0);
            continue;
        }
        acc.add(psi.derivative(x as f64));
        tracker.observe(j, acc.value() / psi.value(x as f64));
    }
    Ok(finish(
        tracker,
        phi,
        Some(psi),
        Some(Normalization::PsiValue),
        terms,
        tail_fraction,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub set: String,
    pub psi: String,
    /// "D1" or "D2"; decides the expected ordering.
    pub class: String,
    /// `(name, estimate)` in the order the chain asserts, bracketed by 0 and 1.
    pub chain: Vec<(String, f64)>,
    pub slack: f64,
    pub holds: bool,
    pub linear: DensityReport,
    pub psi_density: DensityReport,
}

/// Checks `0 ≤ d ≤ d_ψ ≤ d̄_ψ ≤ d̄ ≤ 1` (concave ψ) or
/// `0 ≤ d_ψ ≤ d ≤ d̄ ≤ d̄_ψ ≤ 1` (convex ψ) up to [`CHAIN_SLACK`].
pub fn chain_check(
    a: &IntegerSet,
    psi: &PsiFunction,
    horizon: u64,
    tail_fraction: f64,
) -> Result<ChainReport> {
    let class = psi.class_report();
    let concave = if class.in_d1 {
        true
    } else if class.in_d2 {
        false
    } else {
        return Err(Error::Class(format!(
            "{} is in neither D1 nor D2",
            psi.label()
        )));
    };
    let linear = linear_density_report(a, horizon, tail_fraction)?;
    let psi_density = psi_density_report(a, psi, horizon, tail_fraction, Normalization::Sum)?;
    let (ll, lu) = (linear.lower_estimate, linear.upper_estimate);
    let (pl, pu) = (psi_density.lower_estimate, psi_density.upper_estimate);
    let inner = if concave {
        [
            ("lower_linear", ll),
            ("lower_psi", pl),
            ("upper_psi", pu),
            ("upper_linear", lu),
        ]
    } else {
        [
            ("lower_psi", pl),
            ("lower_linear", ll),
            ("upper_linear", lu),
            ("upper_psi", pu),
        ]
    };
    let mut chain = vec![("zero".to_string(), 0.0)];
    chain.extend(inner.iter().map(|&(k, v)| (k.to_string(), v)));
    chain.push(("one".to_string(), 1.0));
    let holds = chain.windows(2).all(|w| w[0].1 <= w[1].1 + CHAIN_SLACK);
    Ok(ChainReport {
        set: a.label.clone(),
        psi: psi.label().to_string(),
        class: if concave { "D1" } else { "D2" }.into(),
        chain,
        slack: CHAIN_SLACK,
        holds,
        linear,
        psi_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(a: &IntegerSet, n: u64) -> u64 {
        (1..=n).filter(|&k| a.contains(k).unwrap()).count() as u64
    }

    #[test]
    fn count_examples() {
        assert_eq!(IntegerSet::evens().count(10).unwrap(), 5);
        assert_eq!(IntegerSet::squares().count(100).unwrap(), 10);
        let iv = IntegerSet::interval_union("iv", vec![(1, 2), (4, 8), (27, 54)]).unwrap();
        assert_eq!(iv.count(30).unwrap(), 11);
        assert_eq!(brute_count(&iv, 30), 11);
    }

    #[test]
    fn predicate_horizon_is_enforced() {
        let p = IntegerSet::predicate("mod7", 100, |k| k % 7 == 0);
        assert_eq!(p.count(100).unwrap(), 14);
        assert_eq!(
            p.count(101),
            Err(Error::Horizon {
                queried: 101,
                horizon: 100
            })
        );
        assert!(p.contains(200).is_err());
    }

    #[test]
    fn table_generator_horizon() {
        let g = IntegerSet::generator("t", Generator::Table(Arc::new(vec![1, 4, 9]))).unwrap();
        assert_eq!(g.count(9).unwrap(), 3);
        assert!(g.count(10).is_err());
    }

    #[test]
    fn generator_with_zero_first_value() {
        let g = IntegerSet::generator("shifted", Generator::func(|n| n - 1)).unwrap();
        assert_eq!(g.count(10).unwrap(), 10);
        assert_eq!(
            g.members(5).unwrap().collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn invalid_sets_are_rejected() {
        assert!(IntegerSet::finite_list("x", vec![3, 2]).is_err());
        assert!(IntegerSet::interval_union("x", vec![(1, 5), (5, 7)]).is_err());
        assert!(IntegerSet::generator("x", Generator::func(|_| 4)).is_err());
        assert!(IntegerSet::arithmetic(0, 2).is_err());
    }

    #[test]
    fn segments_count_and_members() {
        let segs = vec![
            ProgressionSegment {
                first: 1,
                stride: 2,
                lo: 1,
                hi: 3,
            },
            ProgressionSegment {
                first: 1,
                stride: 4,
                lo: 4,
                hi: 40,
            },
        ];
        let s = IntegerSet::progression_segments("seg", segs).unwrap();
        let m: Vec<u64> = s.members(40).unwrap().collect();
        assert_eq!(m, vec![1, 3, 5, 9, 13, 17, 21, 25, 29, 33, 37]);
        for n in 1..=45 {
            assert_eq!(s.count(n).unwrap(), brute_count(&s, n));
        }
    }

    #[test]
    fn weighted_examples() {
        let id = PsiFunction::identity();
        assert_eq!(
            weighted_count(&IntegerSet::evens(), &id, 10).unwrap().value,
            5.0
        );
        let l = IntegerSet::finite_list("l", vec![1, 2, 3]).unwrap();
        assert_eq!(
            weighted_count(&l, &PsiFunction::power(2.0), 3)
                .unwrap()
                .value,
            12.0
        );
    }

    #[test]
    fn weighted_squares_log() {
        let w =
            weighted_count(&IntegerSet::squares(), &PsiFunction::log_shift(), 1_000_000).unwrap();
        let oracle: f64 = (1..=1000u64).map(|k| 1.0 / ((k * k) as f64 + 1.0)).sum();
        assert!((w.value - oracle).abs() < 1e-13);
    }

    #[test]
    fn bracket_contains_brute_force() {
        let psi = PsiFunction::log_shift();
        let iv = IntegerSet::interval_union("iv", vec![(1, 900), (1000, 5000)]).unwrap();
        let w = weighted_count_with_threshold(&iv, &psi, 6000, 100).unwrap();
        let brute: f64 = (1..=900)
            .chain(1000..=5000)
            .map(|k| psi.derivative(k as f64))
            .sum();
        assert!(w.lower <= brute && brute <= w.upper, "{w:?} vs {brute}");
        assert!(w.bracket_width() > 0.0);
    }

    #[test]
    fn linear_density_examples() {
        let r =
            linear_density_report(&IntegerSet::multiples_of(3).unwrap(), 1_000_000, 0.5).unwrap();
        assert!((r.lower_estimate - 1.0 / 3.0).abs() <= 1e-5);
        assert!((r.upper_estimate - 1.0 / 3.0).abs() <= 1e-5);
        let r = linear_density_report(&IntegerSet::naturals(), 5_000, 0.5).unwrap();
        assert_eq!((r.lower_estimate, r.upper_estimate), (1.0, 1.0));
    }

    #[test]
    fn psi_density_of_naturals_is_one() {
        for psi in [
            PsiFunction::log_shift(),
            PsiFunction::power(2.0),
            PsiFunction::exponential(1.0),
        ] {
            let r = psi_density_report(
                &IntegerSet::naturals(),
                &psi,
                2_000,
                0.5,
                Normalization::Sum,
            )
            .unwrap();
            assert!((r.lower_estimate - 1.0).abs() < 1e-12, "{}", psi.label());
            assert!((r.upper_estimate - 1.0).abs() < 1e-12, "{}", psi.label());
        }
    }

    #[test]
    fn psi_value_normalization_requires_asym() {
        let r = psi_density_report(
            &IntegerSet::naturals(),
            &PsiFunction::exponential(1.0),
            2_000,
            0.5,
            Normalization::PsiValue,
        );
        assert!(matches!(r, Err(Error::Class(_))));
    }

    #[test]
    fn along_phi_examples() {
        let id = PsiFunction::identity();
        let r = density_along_phi(&IntegerSet::squares(), &id, 1_000, 0.5).unwrap();
        assert!(r.upper_estimate <= 0.002);
        let doubles = IntegerSet::generator("2n", Generator::func(|n| 2 * n)).unwrap();
        let r = density_along_phi(&doubles, &id, 1_000, 0.5).unwrap();
        assert_eq!((r.lower_estimate, r.upper_estimate), (0.5, 0.5));
        assert!(density_along_phi(&doubles, &PsiFunction::power(2.0), 1_000, 0.5).is_err());
    }

    #[test]
    fn chain_examples() {
        let r = chain_check(
            &IntegerSet::evens(),
            &PsiFunction::log_shift(),
            100_000,
            0.5,
        )
        .unwrap();
        assert!(r.holds);
        let r = chain_check(
            &IntegerSet::naturals(),
            &PsiFunction::power(2.0),
            10_000,
            0.5,
        )
        .unwrap();
        assert!(r.holds);
        assert_eq!(r.class, "D2");
        assert!(chain_check(
            &IntegerSet::evens(),
            &PsiFunction::exponential(1.0),
            1_000,
            0.5
        )
        .is_err());
    }
}
