//! A set of ψ-density zero carrying a divergent sub-series, built by
//! descending a binary tree of arithmetic progressions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::{growth_report_log_domain, PsiFunction};
use crate::series::{divergence_probe, CoeffSequence, Trace, TraceOptions, Verdict};
use crate::sets::{
    for_each_indicator, psi_density_report, DensityReport, IntegerSet, Normalization,
    ProgressionSegment, WeightSum,
};
use crate::summation::CompensatedSum;

/// Lower bound on the estimated `liminf ψ(x)/(xψ′(x))` for the density claim.
pub const COND2_THRESHOLD: f64 = 0.01;

/// An infinite arithmetic progression `{first + i·stride}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Progression {
    pub first: u64,
    pub stride: u64,
}

impl Progression {
    fn contains(&self, k: u64) -> bool {
        k >= self.first && (k - self.first) % self.stride == 0
    }

    /// Odd-indexed elements (the 1st, 3rd, …).
    pub fn odd_child(&self) -> Self {
        Self {
            first: self.first,
            stride: 2 * self.stride,
        }
    }

    /// Even-indexed elements (the 2nd, 4th, …).
    pub fn even_child(&self) -> Self {
        Self {
            first: self.first + self.stride,
            stride: 2 * self.stride,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Odd,
    Even,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuerbachArtifacts {
    pub coeffs: String,
    pub psi: String,
    /// Progression chosen at each completed stage.
    pub branch_path: Vec<Progression>,
    pub branches: Vec<Branch>,
    /// `n_0 = 0, n_1, …`.
    pub nk: Vec<u64>,
    /// Sub-series sum of stage `k` over `(n_{k−1}, n_k]`.
    pub block_sums: Vec<f64>,
    pub segments: Vec<ProgressionSegment>,
    pub probe: Verdict,
    /// Stage at which the budget ran out, if any.
    pub exhausted_at: Option<usize>,
    pub stage_budget: u64,
}

impl AuerbachArtifacts {
    pub fn completed_stages(&self) -> usize {
        self.block_sums.len()
    }

    /// `A = ∪ N_i ∩ [n_{i−1}+1, n_i]`, known up to the last boundary.
    pub fn set_a(&self) -> Result<IntegerSet> {
        let horizon = *self.nk.last().expect("n_0 present");
        Ok(
            IntegerSet::progression_segments("auerbach", self.segments.clone())?
                .with_horizon(horizon),
        )
    }
}

/// Runs stages until `k_max` or until a stage exhausts its budget.
pub fn auerbach_build_progress(
    c: &CoeffSequence,
    psi: &PsiFunction,
    k_max: usize,
    stage_budget: u64,
) -> Result<AuerbachArtifacts> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let probe = divergence_probe(c, &IntegerSet::naturals(), k_max as f64, stage_budget)?;
    let mut node = Progression {
        first: 1,
        stride: 1,
    };
    let mut art = AuerbachArtifacts {
        coeffs: c.label().into(),
        psi: psi.label().into(),
        branch_path: Vec::new(),
        branches: Vec::new(),
        nk: vec![0],
        block_sums: Vec::new(),
        segments: Vec::new(),
        probe,
        exhausted_at: None,
        stage_budget,
    };
    for k in 1..=k_max {
        let prev = *art.nk.last().expect("n_0 present");
        let (odd, even) = (node.odd_child(), node.even_child());
        let (mut s_odd, mut s_even) = (CompensatedSum::new(), CompensatedSum::new());
        let threshold = k as f64;
        let mut chosen = None;
        let mut h = prev;
        for _ in 0..stage_budget {
            let Some(next) = h.checked_add(1) else { break };
            h = next;
            if odd.contains(h) {
                s_odd.add(c.get(h)?);
            } else if even.contains(h) {
                s_even.add(c.get(h)?);
            }
            if h > 2 * prev {
                if s_odd.value() > threshold {
                    chosen = Some((Branch::Odd, odd, s_odd.value()));
                } else if s_even.value() > threshold {
                    chosen = Some((Branch::Even, even, s_even.value()));
                }
                if chosen.is_some() {
                    break;
                }
            }
        }
        let Some((branch, prog, sum)) = chosen else {
            art.exhausted_at = Some(k);
            return Ok(art);
        };
        art.segments.push(ProgressionSegment {
            first: prog.first,
            stride: prog.stride,
            lo: prev + 1,
            hi: h,
        });
        art.branch_path.push(prog);
        art.branches.push(branch);
        art.block_sums.push(sum);
        art.nk.push(h);
        node = prog;
    }
    Ok(art)
}

/// Like [`auerbach_build_progress`] but fails with `StageBudgetExhausted`.
pub fn auerbach_build(
    c: &CoeffSequence,
    psi: &PsiFunction,
    k_max: usize,
    stage_budget: u64,
) -> Result<AuerbachArtifacts> {
    let art = auerbach_build_progress(c, psi, k_max, stage_budget)?;
    match art.exhausted_at {
        Some(k) => Err(Error::StageBudgetExhausted(k)),
        None => Ok(art),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub r: usize,
    pub n_r: u64,
    /// `A_ψ(n_r)/(n_r ψ′(n_r))`.
    pub ratio: f64,
    /// `(r − 1/2)/2^{r−1}`.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuerbachReport {
    pub completed_stages: usize,
    pub exhausted_at: Option<usize>,
    pub psi_class_ok: bool,
    pub block_sums_ok: bool,
    pub doubling_ok: bool,
    pub boundary_checks: Vec<BoundaryCheck>,
    pub boundaries_ok: bool,
    /// `A_ψ(n)/(nψ′(n))` up to the horizon.
    pub cond_trace: Trace,
    pub cond2_estimate: Option<f64>,
    pub cond2_holds: bool,
    /// ψ-density of the constructed set, only when the growth condition holds.
    pub density: Option<DensityReport>,
}

pub fn auerbach_verify(
    art: &AuerbachArtifacts,
    psi: &PsiFunction,
    horizon: u64,
) -> Result<AuerbachReport> {
    let stages = art.completed_stages();
    if stages < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 completed stages, have {stages}"
        )));
    }
    let class = psi.class_report();
    let psi_class_ok = class.in_d2 || psi.is_identity();
    let set = art.set_a()?;
    let covered = *art.nk.last().expect("n_0 present");
    let horizon = horizon.min(covered);

    let block_sums_ok = art
        .block_sums
        .iter()
        .enumerate()
        .all(|(i, &s)| s > (i + 1) as f64);
    let doubling_ok = art.nk.windows(2).all(|w| w[1] > 2 * w[0]);

    let mut checks = Vec::new();
    let opts = TraceOptions::default();
    let mut tracker = opts.tracker(horizon);
    let mut weight = WeightSum::for_psi(psi);
    let mut boundary = art.nk.iter().skip(1).enumerate().peekable();
    for_each_indicator(&set, covered, |n, hit| {
        if hit {
            weight.add_derivative(psi, n);
        }
        let x = n as f64;
        let ratio = (weight.ln() - x.ln() - psi.ln_derivative(x)).exp();
        if n <= horizon {
            tracker.observe(n, ratio);
        }
        if let Some(&(i, &nr)) = boundary.peek() {
            if nr == n {
                boundary.next();
                let r = i + 1;
                let bound = (r as f64 - 0.5) / 2f64.powi(r as i32 - 1);
                checks.push(BoundaryCheck {
                    r,
                    n_r: nr,
                    ratio,
                    bound,
                    ok: ratio <= bound + 1e-9,
                });
            }
        }
    })?;
    let cond_trace = Trace::from_tracker("A_psi(n)/(n psi'(n))", tracker, horizon, &opts);

    let cond2_estimate = if horizon >= 1_000 {
        Some(growth_report_log_domain(psi, horizon)?.regularity_liminf)
    } else {
        None
    };
    let cond2_holds = psi.is_identity() || cond2_estimate.is_some_and(|v| v >= COND2_THRESHOLD);
    let density = if cond2_holds && horizon >= 1_000 {
        Some(psi_density_report(
            &set,
            psi,
            horizon,
            opts.tail_fraction,
            Normalization::Sum,
        )?)
    } else {
        None
    };
    Ok(AuerbachReport {
        completed_stages: stages,
        exhausted_at: art.exhausted_at,
        psi_class_ok,
        block_sums_ok,
        doubling_ok,
        boundaries_ok: checks.iter().all(|c| c.ok),
        boundary_checks: checks,
        cond_trace,
        cond2_estimate,
        cond2_holds,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_stage_harmonic() {
        let art =
            auerbach_build_progress(&CoeffSequence::recip(), &PsiFunction::identity(), 1, 1_000)
                .unwrap();
        assert_eq!(art.nk, vec![0, 3]);
        assert_eq!(art.branches, vec![Branch::Odd]);
        assert_eq!(
            art.branch_path[0],
            Progression {
                first: 1,
                stride: 2
            }
        );
        assert!((art.block_sums[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    /// Independent lockstep scan for stage 2 of the harmonic construction.
    #[test]
    fn second_stage_matches_direct_scan() {
        let art = auerbach_build_progress(
            &CoeffSequence::recip(),
            &PsiFunction::identity(),
            2,
            1_000_000,
        )
        .unwrap();
        let (mut a, mut b) = (0.0, 0.0);
        let mut n2 = 0;
        for h in 4u64.. {
            if h % 4 == 1 {
                a += 1.0 / h as f64;
            }
            if h % 4 == 3 {
                b += 1.0 / h as f64;
            }
            if h > 6 && (a > 2.0 || b > 2.0) {
                n2 = h;
                break;
            }
        }
        assert_eq!(art.nk[2], n2);
        assert!(art.nk[2] > 2_000 && art.nk[2] < 20_000, "{}", art.nk[2]);
    }

    #[test]
    fn convergent_series_exhausts() {
        let r = auerbach_build(
            &CoeffSequence::recip_pow(2.0),
            &PsiFunction::identity(),
            3,
            100_000,
        );
        assert_eq!(r.unwrap_err(), Error::StageBudgetExhausted(2));
    }

    #[test]
    fn segments_agree_with_reconstruction() {
        let art = auerbach_build_progress(
            &CoeffSequence::recip(),
            &PsiFunction::identity(),
            2,
            1_000_000,
        )
        .unwrap();
        let set = art.set_a().unwrap();
        let h = *art.nk.last().unwrap();
        for n in 1..=h {
            let stage = art.nk.partition_point(|&b| b < n);
            let p = art.branch_path[stage - 1];
            assert_eq!(set.contains(n).unwrap(), p.contains(n), "n = {n}");
            assert_eq!(p.stride, 1 << stage);
        }
    }

    #[test]
    fn verify_reports_growth_condition() {
        let art = auerbach_build_progress(
            &CoeffSequence::recip(),
            &PsiFunction::identity(),
            2,
            1_000_000,
        )
        .unwrap();
        let r = auerbach_verify(&art, &PsiFunction::identity(), 1_000_000).unwrap();
        assert!(r.block_sums_ok && r.doubling_ok && r.cond2_holds);
        assert!(r.density.is_some());
        let r = auerbach_verify(&art, &PsiFunction::exponential(1.0), 1_000_000).unwrap();
        assert!(!r.cond2_holds && r.density.is_none() && !r.psi_class_ok);
    }
}
