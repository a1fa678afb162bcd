use densitylab::constructions::hamming::{hamming_coeffs, select_nk, verify_hamming};
use densitylab::constructions::salat::{salat_example, salat_example_verify};
use densitylab::{IntegerSet, PsiFunction};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

#[test]
fn hamming_ratio_is_block_constant() {
    let psi = PsiFunction::sqrt();
    let sq = IntegerSet::squares();
    let nk = select_nk(&sq, &psi, 4, 1_000_000).unwrap();
    let w = hamming_coeffs(&sq, &psi, &nk).unwrap();
    let bounds = &w.boundaries;
    for (k, pair) in bounds.windows(2).enumerate() {
        let (lo, hi) = (pair[0] + 1, pair[1]);
        let expected = 1.0 / w.block_denominators[k];
        for m in lo..=hi {
            let r = w.coeffs.get(m).unwrap() / psi.derivative(m as f64);
            assert!((r - expected).abs() <= 1e-12 * expected, "m = {m}");
        }
    }
    let r = verify_hamming(&w, *bounds.last().unwrap()).unwrap();
    assert!(r.sub_bound_ok && r.monotone_ok);
}

#[test]
fn salat_counts_match_enumeration_to_a_million() {
    for delta in [0.25, 0.5, 0.75] {
        let ex = salat_example(delta).unwrap();
        let a = ex.a_f64();
        let mut member = vec![false; 1_000_001];
        for n in 1..=7u64 {
            let lo = n.pow(n as u32);
            let hi = (a * lo as f64).floor() as u64;
            for k in lo..=hi.min(1_000_000) {
                member[k as usize] = true;
            }
        }
        let mut count = 0u64;
        for x in 1..=1_000_000u64 {
            count += member[x as usize] as u64;
            if x % 977 == 0 || x == 1_000_000 {
                assert_eq!(
                    ex.count_upto(&BigUint::from(x)).to_u64().unwrap(),
                    count,
                    "delta {delta}, x {x}"
                );
            }
        }
    }
}

#[test]
fn salat_full_verification_at_cap() {
    let ex = salat_example(0.5).unwrap();
    let r = salat_example_verify(&ex, 50).unwrap();
    assert!(r.upper.iter().all(|c| c.meets_delta));
    assert!(r.full_ok && r.sub_ok && r.not_right_ok);
    assert!(r.full_partial_sum > 5.0);
}
