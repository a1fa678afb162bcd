//! Compensated accumulation and checkpoint bookkeeping shared by every scan.

use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation.
///
/// Unlike plain Kahan it stays accurate when an addend is larger in
/// magnitude than the running sum, which happens at the start of every
/// partial-sum scan.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Multiply the accumulated value by `factor`, used by log-domain
    /// accumulators when the reference scale moves.
    pub fn rescale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sum an iterator of terms with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// Streaming sum of `exp(log_term)` over terms that may individually
/// overflow binary64. The result is kept as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    acc: CompensatedSum,
    log_scale: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            acc: CompensatedSum::new(),
            log_scale: f64::NEG_INFINITY,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.log_scale {
            if self.log_scale.is_finite() {
                self.acc.rescale((self.log_scale - log_term).exp());
            }
            self.log_scale = log_term;
        }
        self.acc.add((log_term - self.log_scale).exp());
    }

    /// Natural log of the accumulated sum; `-inf` when empty.
    pub fn ln(&self) -> f64 {
        if self.log_scale == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.log_scale + self.acc.value().ln()
    }
}

/// Closed tail window `[ceil(horizon * tail_fraction), horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailWindow {
    pub start: u64,
    pub end: u64,
}

impl TailWindow {
    pub fn new(horizon: u64, tail_fraction: f64) -> Self {
        let start = ((horizon as f64) * tail_fraction).ceil() as u64;
        Self {
            start: start.clamp(1, horizon.max(1)),
            end: horizon,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.start && n <= self.end
    }
}

/// Geometric checkpoints `1, r, r^2, ...` (rounded, deduplicated) capped by
/// `horizon`, which is always the last entry.
pub fn log_checkpoints(horizon: u64, ratio: f64) -> Vec<u64> {
    let ratio = if ratio > 1.0 { ratio } else { 2.0 };
    let mut out = Vec::new();
    let mut x = 1.0_f64;
    while (x as u64) < horizon {
        let n = x.round() as u64;
        if out.last() != Some(&n) {
            out.push(n);
        }
        x *= ratio;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Running min/max tracker over the tail window plus checkpoint capture.
#[derive(Debug, Clone)]
pub(crate) struct TailTracker {
    window: TailWindow,
    checkpoints: Vec<u64>,
    next_cp: usize,
    pub points: Vec<(u64, f64)>,
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub last: f64,
    pub seen_in_window: bool,
}

impl TailTracker {
    pub fn new(horizon: u64, tail_fraction: f64, checkpoint_ratio: f64) -> Self {
        Self {
            window: TailWindow::new(horizon, tail_fraction),
            checkpoints: log_checkpoints(horizon, checkpoint_ratio),
            next_cp: 0,
            points: Vec::new(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            max_abs: 0.0,
            last: f64::NAN,
            seen_in_window: false,
        }
    }

    /// Record value at index `n`; indices must be fed in ascending order.
    pub fn observe(&mut self, n: u64, value: f64) {
        while self.next_cp < self.checkpoints.len() && self.checkpoints[self.next_cp] < n {
            self.next_cp += 1;
        }
        if self.next_cp < self.checkpoints.len() && self.checkpoints[self.next_cp] == n {
            self.points.push((n, value));
            self.next_cp += 1;
        }
        if self.window.contains(n) {
            self.seen_in_window = true;
            self.min = self.min.min(value);
            self.max = self.max.max(value);
            self.max_abs = self.max_abs.max(value.abs());
        }
        self.last = value;
    }

    pub fn window(&self) -> TailWindow {
        self.window
    }
}
