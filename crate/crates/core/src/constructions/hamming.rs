//! Witness coefficients for a set of lower ψ-density zero: a sequence with
//! `c/ψ′` non-increasing whose full series diverges while the sub-series over
//! the set converges.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::series::{
    subseries_partial_sums, CoeffSequence, MonotonicityHint, SumMode, Trace, TraceOptions,
};
use crate::sets::{Generator, IntegerSet, SetRepr};
use crate::summation::CompensatedSum;

fn generator_of(phi: &IntegerSet) -> Result<&Generator> {
    match phi.repr() {
        SetRepr::IncreasingGenerator(g) => Ok(g),
        _ => Err(Error::InvalidSet(format!(
            "{} is not given by an increasing generator",
            phi.label()
        ))),
    }
}

fn phi_at(g: &Generator, j: u64) -> Result<u64> {
    g.get(j).ok_or_else(|| Error::Horizon {
        queried: j,
        horizon: 0,
    })
}

/// Greedy boundaries `n_0 = 0 < n_1 < … < n_{k_max}`: each `n_{k+1}` is the
/// smallest index with
/// `(ψ(φ(n_{k+1})) − ψ(φ(n_k))) ≥ 2^k (F(n_{k+1}) − F(n_k))` and
/// `F(n_{k+1}) − F(n_k) ≥ F(n_k) − F(n_{k−1})`, where `F(j) = A_ψ(φ(j))`.
pub fn select_nk(
    phi: &IntegerSet,
    psi: &PsiFunction,
    k_max: usize,
    search_budget: u64,
) -> Result<Vec<u64>> {
    psi.require_d1("select_nk")?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let g = generator_of(phi)?;
    let mut nk = vec![0u64];
    let (mut f_prev_gap, mut f_at_nk, mut g_at_nk) = (0.0, 0.0, psi.value(0.0));
    let mut f = CompensatedSum::new();
    let mut j = 0u64;
    for k in 0..k_max {
        let target = 2f64.powi(k as i32);
        loop {
            j += 1;
            if j > search_budget {
                return Err(Error::BudgetExhausted { k_reached: k });
            }
            let x = phi_at(g, j)?;
            if x > 0 {
                f.add(psi.derivative(x as f64));
            }
            let gap = f.value() - f_at_nk;
            let rise = psi.value(x as f64) - g_at_nk;
            if gap > 0.0 && rise >= target * gap && gap >= f_prev_gap {
                nk.push(j);
                f_prev_gap = gap;
                f_at_nk = f.value();
                g_at_nk = psi.value(x as f64);
                break;
            }
        }
    }
    Ok(nk)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypCheck {
    pub k: usize,
    pub ratio: f64,
    pub required_ratio: f64,
    pub gap: f64,
    pub previous_gap: f64,
    pub hyp1: bool,
    pub hyp2: bool,
}

/// Re-derives both block conditions for given boundaries by direct summation.
pub fn check_block_conditions(
    phi: &IntegerSet,
    psi: &PsiFunction,
    nk: &[u64],
) -> Result<Vec<HypCheck>> {
    let g = generator_of(phi)?;
    let weight = |j: u64| -> Result<f64> {
        let mut s = CompensatedSum::new();
        for i in 1..=j {
            let x = phi_at(g, i)?;
            if x > 0 {
                s.add(psi.derivative(x as f64));
            }
        }
        Ok(s.value())
    };
    let mut out = Vec::new();
    for k in 0..nk.len().saturating_sub(1) {
        let (a, b) = (nk[k], nk[k + 1]);
        let gap = weight(b)? - weight(a)?;
        let previous_gap = if k == 0 {
            0.0
        } else {
            weight(a)? - weight(nk[k - 1])?
        };
        let rise = psi.value(phi_at(g, b)? as f64) - psi.value(phi_at(g, a)? as f64);
        let required_ratio = 2f64.powi(k as i32);
        let ratio = rise / gap;
        out.push(HypCheck {
            k,
            ratio,
            required_ratio,
            gap,
            previous_gap,
            hyp1: ratio >= required_ratio,
            hyp2: gap >= previous_gap,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct HammingWitness {
    pub phi_label: String,
    pub psi: PsiFunction,
    pub nk: Vec<u64>,
    /// `φ(n_k)`.
    pub boundaries: Vec<u64>,
    /// `D_k = 2^k (A_ψ(φ(n_{k+1})) − A_ψ(φ(n_k)))`.
    pub block_denominators: Vec<f64>,
    /// `c_m = ψ′(m)/D_k` for `φ(n_k) < m ≤ φ(n_{k+1})`.
    pub coeffs: CoeffSequence,
    phi: IntegerSet,
}

impl HammingWitness {
    pub fn blocks(&self) -> usize {
        self.block_denominators.len()
    }

    pub fn phi(&self) -> &IntegerSet {
        &self.phi
    }
}

fn block_of(boundaries: &[u64], m: u64) -> usize {
    boundaries.partition_point(|&b| b < m) - 1
}

/// Builds the witness with `B(m) ≡ 1`.
pub fn hamming_coeffs(phi: &IntegerSet, psi: &PsiFunction, nk: &[u64]) -> Result<HammingWitness> {
    if nk.len() < 2 || nk[0] != 0 || nk.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "nk must start at 0 and increase strictly".into(),
        ));
    }
    let g = generator_of(phi)?;
    let boundaries: Vec<u64> = nk.iter().map(|&j| phi_at(g, j)).collect::<Result<_>>()?;
    let mut f = CompensatedSum::new();
    let mut f_at = vec![0.0];
    let exact_weights = (1..=2).all(|k| psi.exact_derivative(k).is_some());
    let mut fe = BigRational::zero();
    let mut fe_at = vec![BigRational::zero()];
    for j in 1..=*nk.last().expect("non-empty") {
        let x = phi_at(g, j)?;
        if x > 0 {
            f.add(psi.derivative(x as f64));
            if exact_weights {
                fe += psi.exact_derivative(x).expect("exact derivative");
            }
        }
        if nk.contains(&j) {
            f_at.push(f.value());
            fe_at.push(fe.clone());
        }
    }
    let denominators: Vec<f64> = (0..nk.len() - 1)
        .map(|k| 2f64.powi(k as i32) * (f_at[k + 1] - f_at[k]))
        .collect();
    if let Some(k) = denominators.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Degenerate(format!("block {k} carries no weight")));
    }
    let horizon_m = *boundaries.last().expect("non-empty");
    let label = format!("hamming[{}; {}]", phi.label(), psi.label());
    let coeffs = if exact_weights {
        let exact_den: Vec<BigRational> = (0..nk.len() - 1)
            .map(|k| {
                let two_k = BigRational::from_integer(num_bigint::BigInt::one() << k);
                two_k * (&fe_at[k + 1] - &fe_at[k])
            })
            .collect();
        let table = (1..=horizon_m)
            .map(|m| {
                psi.exact_derivative(m).expect("exact derivative")
                    / &exact_den[block_of(&boundaries, m)]
            })
            .collect();
        CoeffSequence::exact_table(label, table)?
    } else {
        let table = (1..=horizon_m)
            .map(|m| psi.derivative(m as f64) / denominators[block_of(&boundaries, m)])
            .collect();
        CoeffSequence::table(label, table)?
    };
    let coeffs = coeffs.with_hint(MonotonicityHint::RatioNonIncreasing(psi.clone()))?;
    Ok(HammingWitness {
        phi_label: phi.label().to_string(),
        psi: psi.clone(),
        nk: nk.to_vec(),
        boundaries,
        block_denominators: denominators,
        coeffs,
        phi: phi.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HammingReport {
    pub nk: Vec<u64>,
    pub boundaries: Vec<u64>,
    pub horizon: u64,
    pub full_series_trace: Trace,
    pub subseries_trace: Trace,
    /// Per-block `Σ_{φ(n_k) < m ≤ φ(n_{k+1})} c_m`.
    pub full_block_sums: Vec<f64>,
    /// Per-block `Σ_{n_k < j ≤ n_{k+1}} c_{φ(j)}`.
    pub sub_block_sums: Vec<f64>,
    pub full_total: f64,
    pub sub_total: f64,
    /// Sub-series partial sums never exceed block 0 plus 2.
    pub sub_bound_ok: bool,
    pub monotone_ok: bool,
    pub block_conditions_ok: bool,
    pub insufficient_blocks: bool,
}

pub fn verify_hamming(w: &HammingWitness, horizon: u64) -> Result<HammingReport> {
    let covered = *w.boundaries.last().expect("non-empty");
    let horizon = horizon.min(covered);
    let complete = w
        .boundaries
        .iter()
        .skip(1)
        .filter(|&&b| b <= horizon)
        .count();
    let insufficient_blocks = complete < 3;
    let opts = TraceOptions::default();
    let full = subseries_partial_sums(
        &w.coeffs,
        &IntegerSet::naturals(),
        horizon,
        SumMode::Compensated,
        &opts,
    )?;
    let phi_h = w.phi.clone().with_horizon(horizon);
    let sub = subseries_partial_sums(&w.coeffs, &phi_h, horizon, SumMode::Compensated, &opts)?;

    let mut full_block_sums = Vec::new();
    let mut sub_block_sums = Vec::new();
    let g = generator_of(&w.phi)?;
    for k in 0..complete {
        let (lo, hi) = (w.boundaries[k] + 1, w.boundaries[k + 1]);
        full_block_sums.push(
            (lo..=hi)
                .map(|m| w.coeffs.get(m))
                .collect::<Result<CompensatedSum>>()?
                .value(),
        );
        let mut s = CompensatedSum::new();
        for j in (w.nk[k] + 1)..=w.nk[k + 1] {
            s.add(w.coeffs.get(phi_at(g, j)?)?);
        }
        sub_block_sums.push(s.value());
    }

    let block0 = sub_block_sums.first().copied().unwrap_or(0.0);
    let mut running = CompensatedSum::new();
    let mut sub_bound_ok = true;
    for m in w.phi.members(horizon)? {
        running.add(w.coeffs.get(m)?);
        if running.value() > block0 + 2.0 + 1e-12 {
            sub_bound_ok = false;
        }
    }

    let mut monotone_ok = true;
    let mut prev = f64::INFINITY;
    for m in 1..=horizon {
        let r = w.coeffs.get(m)? / w.psi.derivative(m as f64);
        if r > prev * (1.0 + 1e-12) {
            monotone_ok = false;
        }
        prev = r;
    }
    let block_conditions_ok = check_block_conditions(&w.phi, &w.psi, &w.nk)?
        .iter()
        .all(|h| h.hyp1 && h.hyp2);

    Ok(HammingReport {
        nk: w.nk.clone(),
        boundaries: w.boundaries.clone(),
        horizon,
        full_total: full.final_value,
        sub_total: sub.final_value,
        full_series_trace: full,
        subseries_trace: sub,
        full_block_sums,
        sub_block_sums,
        sub_bound_ok,
        monotone_ok,
        block_conditions_ok,
        insufficient_blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_boundaries() {
        let id = PsiFunction::identity();
        let sq = IntegerSet::squares();
        assert_eq!(
            select_nk(&sq, &id, 5, 1_000).unwrap(),
            vec![0, 1, 2, 3, 5, 11]
        );
        assert_eq!(select_nk(&sq, &id, 1, 1_000).unwrap(), vec![0, 1]);
        assert_eq!(select_nk(&sq, &id, 2, 1_000).unwrap(), vec![0, 1, 2]);
    }

    /// Exhaustive oracle: for each k, every index before the chosen one fails.
    #[test]
    fn greedy_is_minimal() {
        let id = PsiFunction::identity();
        let sq = IntegerSet::squares();
        let nk = select_nk(&sq, &id, 5, 1_000).unwrap();
        for k in 0..nk.len() - 1 {
            for cand in (nk[k] + 1)..nk[k + 1] {
                let mut probe = nk[..=k].to_vec();
                probe.push(cand);
                let h = check_block_conditions(&sq, &id, &probe).unwrap();
                assert!(
                    !(h[k].hyp1 && h[k].hyp2),
                    "k = {k}, candidate {cand} admissible"
                );
            }
        }
        assert!(check_block_conditions(&sq, &id, &nk)
            .unwrap()
            .iter()
            .all(|h| h.hyp1 && h.hyp2));
    }

    #[test]
    fn positive_density_exhausts_budget() {
        let doubles = IntegerSet::generator("2n", Generator::func(|n| 2 * n)).unwrap();
        let r = select_nk(&doubles, &PsiFunction::identity(), 4, 100_000);
        assert_eq!(r, Err(Error::BudgetExhausted { k_reached: 2 }));
    }

    #[test]
    fn requires_concave_psi() {
        let r = select_nk(&IntegerSet::squares(), &PsiFunction::power(2.0), 3, 100);
        assert!(matches!(r, Err(Error::Class(_))));
    }

    #[test]
    fn squares_coefficients() {
        let id = PsiFunction::identity();
        let sq = IntegerSet::squares();
        let w = hamming_coeffs(&sq, &id, &[0, 1, 2, 3, 5, 11]).unwrap();
        let expect = |m: u64| match m {
            1 => 1.0,
            2..=4 => 0.5,
            5..=9 => 0.25,
            10..=25 => 1.0 / 16.0,
            _ => 1.0 / 96.0,
        };
        for m in 1..=121 {
            assert_eq!(w.coeffs.get(m).unwrap(), expect(m), "m = {m}");
        }
        assert_eq!(w.block_denominators, vec![1.0, 2.0, 4.0, 16.0, 96.0]);
        let r = verify_hamming(&w, 10_000).unwrap();
        assert_eq!(r.sub_block_sums, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        assert_eq!(r.full_block_sums[2], 1.25);
        assert!((r.sub_total - 1.9375).abs() < 1e-12);
        assert!(r.full_total > 5.0);
        assert!(r.monotone_ok && r.sub_bound_ok && r.block_conditions_ok && !r.insufficient_blocks);
    }

    #[test]
    fn one_block_is_flagged() {
        let w = hamming_coeffs(&IntegerSet::squares(), &PsiFunction::identity(), &[0, 1]).unwrap();
        assert!(verify_hamming(&w, 100).unwrap().insufficient_blocks);
    }
}
