//! Acceptance criteria, one pass/fail line each. Exits non-zero if any fails.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use densitylab::constructions::hamming::{hamming_coeffs, select_nk, verify_hamming};
use densitylab::constructions::salat::{salat_example, salat_example_verify, sharpness_verify};
use densitylab::primes::prime_set;
use densitylab::psi::lem2_sandwich_sweep;
use densitylab::series::olivier_trace;
use densitylab::sets::{linear_density_report, psi_density_report};
use densitylab::signed::toeplitz_rows;
use densitylab::{
    CoeffSequence, IntegerSet, MonotonicityHint, Normalization, PsiFunction, TraceOptions,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

struct Ctx {
    dir: PathBuf,
    runs: usize,
}

impl Ctx {
    fn cli(&mut self, args: &[&str]) -> (i32, String, Value) {
        self.runs += 1;
        let name = format!("run{}.json", self.runs);
        self.cli_at(args, &name)
    }

    /// Runs with a fixed output file, which is part of the recorded config.
    fn cli_at(&mut self, args: &[&str], name: &str) -> (i32, String, Value) {
        let out = self.dir.join(name);
        let _ = fs::remove_file(&out);
        let mut argv = vec!["densitylab".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        argv.push("--output".into());
        argv.push(out.display().to_string());
        let code = densitylab_cli::run(argv);
        let text = fs::read_to_string(&out).unwrap_or_default();
        let value = serde_json::from_str(&text).unwrap_or(Value::Null);
        (code, text, value)
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn abel(ctx: &mut Ctx) -> Outcome {
    let (code, _, v) = ctx.cli(&[
        "verify", "abel", "--n", "1000", "--trials", "1000", "--exact", "--seed", "1",
    ]);
    let r = &v["result"];
    let exact_ok = ["unsigned_exact", "signed_exact"].iter().all(|k| {
        r[k]["checks"] == 1000
            && r[k]["failures"].as_array().is_some_and(|a| a.is_empty())
            && f(&r[k]["max_rel_gap"]) == 0.0
    });
    let (gu, gs) = (
        f(&r["unsigned_float"]["max_rel_gap"]),
        f(&r["signed_float"]["max_rel_gap"]),
    );
    outcome(
        code == 0 && exact_ok && gu <= 1e-10 && gs <= 1e-10,
        format!("exact gaps zero: {exact_ok}; float max rel gap {gu:.2e} / {gs:.2e}"),
    )
}

fn toeplitz(_: &mut Ctx) -> Outcome {
    let psi = PsiFunction::identity();
    let c = CoeffSequence::recip()
        .with_hint(MonotonicityHint::RatioNonIncreasing(psi.clone()))
        .unwrap();
    let mut worst = (0.0f64, 0u64);
    for n in 1..=10_000u64 {
        let row = toeplitz_rows(&c, &psi, n).unwrap();
        let gap = (row.row_sum - (1.0 - 1.0 / n as f64)).abs();
        if gap > worst.0 {
            worst = (gap, n);
        }
    }
    outcome(
        worst.0 <= 1e-12,
        format!(
            "max |row_sum - (1 - 1/n)| = {:.2e} at n = {}",
            worst.0, worst.1
        ),
    )
}

fn sandwich(_: &mut Ctx) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for key in ["identity", "log1p", "sqrt", "salat-sharpness"] {
        let psi = PsiFunction::from_key(key).unwrap();
        let sweep = lem2_sandwich_sweep(&psi, 1_000).unwrap();
        let ok = psi.class_report().in_d1
            && sweep.failures.is_empty()
            && sweep.pairs_checked == 1_000 * 999 / 2;
        pass &= ok;
        details.push(format!("{key}: {} failures", sweep.failures.len()));
    }
    outcome(pass, details.join(", "))
}

fn sieve_count(n: usize) -> usize {
    let mut composite = vec![false; n + 1];
    let mut count = 0;
    for i in 2..=n {
        if !composite[i] {
            count += 1;
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    count
}

fn densities(_: &mut Ctx) -> Outcome {
    let h = 1_000_000;
    let mut pass = true;
    let mut details = Vec::new();
    let log = PsiFunction::log_shift();
    for m in [2u64, 3, 5] {
        let set = IntegerSet::multiples_of(m).unwrap();
        let target = 1.0 / m as f64;
        let lin = linear_density_report(&set, h, 0.5).unwrap();
        let lin_err = (lin.lower_estimate - target)
            .abs()
            .max((lin.upper_estimate - target).abs());
        let ps = psi_density_report(&set, &log, h, 0.5, Normalization::Sum).unwrap();
        let ps_err = (ps.lower_estimate - target)
            .abs()
            .max((ps.upper_estimate - target).abs());
        pass &= lin_err <= 1e-5 && ps_err <= 0.02;
        details.push(format!("m={m}: linear {lin_err:.1e}, log {ps_err:.1e}"));
    }
    let expected = sieve_count(h as usize);
    let primes = linear_density_report(&prime_set(h).unwrap(), h, 0.5).unwrap();
    let gap = (primes.final_ratio - expected as f64 / h as f64).abs();
    pass &= expected == 78_498 && gap <= 1e-6;
    details.push(format!(
        "primes: ratio {} (sieve {expected})",
        primes.final_ratio
    ));
    outcome(pass, details.join(", "))
}

fn hamming(_: &mut Ctx) -> Outcome {
    let sq = IntegerSet::squares();
    let id = PsiFunction::identity();
    let nk = select_nk(&sq, &id, 5, 10_000_000).unwrap();
    let w = hamming_coeffs(&sq, &id, &nk).unwrap();
    let last = *w.boundaries.last().unwrap();
    let r = verify_hamming(&w, last).unwrap();
    let geometric: f64 = (0..nk.len() - 1).map(|k| 0.5f64.powi(k as i32)).sum();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for m in 1..=last {
        let ratio = w.coeffs.get(m).unwrap() / id.derivative(m as f64);
        monotone &= ratio <= prev;
        prev = ratio;
    }
    let pass = nk == [0, 1, 2, 3, 5, 11]
        && (r.sub_total - geometric).abs() <= 1e-12
        && r.sub_total <= 2.0
        && r.full_total > 5.0
        && monotone
        && r.monotone_ok;
    outcome(
        pass,
        format!(
            "nk {nk:?}, sub total {}, full total {:.4}",
            r.sub_total, r.full_total
        ),
    )
}

fn auerbach(ctx: &mut Ctx) -> Outcome {
    let (code, _, v) = ctx.cli(&[
        "verify",
        "auerbach",
        "--c",
        "recip",
        "--psi",
        "identity",
        "--kmax",
        "6",
        "--stage-budget",
        "1e7",
    ]);
    let art = &v["result"]["artifacts"];
    let sums: Vec<f64> = art["block_sums"]
        .as_array()
        .map(|a| a.iter().map(f).collect())
        .unwrap_or_default();
    let nk: Vec<u64> = art["nk"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_u64).collect())
        .unwrap_or_default();
    let sums_ok = sums.len() == 6 && sums.iter().enumerate().all(|(i, &s)| s > (i + 1) as f64);
    let doubling = nk.len() == 7 && nk.windows(2).all(|w| w[1] > 2 * w[0]);
    let checks = v["result"]["report"]["boundary_checks"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let bounds_ok = checks.len() == 6 && checks.iter().all(|c| c["ok"] == true);
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| c["ok"] != true)
        .map(|c| {
            format!(
                "r={} ratio {:.4} > {:.4}",
                c["r"],
                f(&c["ratio"]),
                f(&c["bound"])
            )
        })
        .collect();
    outcome(
        code == 0 && sums_ok && doubling && bounds_ok,
        format!(
            "stages completed {} of 6 (exhausted at {}), nk {nk:?}, boundary failures [{}]",
            sums.len(),
            art["exhausted_at"],
            failing.join("; ")
        ),
    )
}

fn salat(_: &mut Ctx) -> Outcome {
    let ex = salat_example(0.5).unwrap();
    let r = salat_example_verify(&ex, 10).unwrap();
    let a = 2.0;

    // Independent enumeration for endpoints up to 10^6.
    let mut member = vec![false; 1_000_001];
    for n in 1..=7u64 {
        let lo = n.pow(n as u32);
        for k in lo..=(2 * lo).min(1_000_000) {
            member[k as usize] = true;
        }
    }
    let brute = |x: u64| member[1..=x as usize].iter().filter(|&&b| b).count() as u64;
    let mut oracle_ok = true;
    for n in 2..=6u64 {
        let x = 2 * n.pow(n as u32);
        let y = (n + 1).pow(n as u32 + 1) - 1;
        oracle_ok &= r.upper[n as usize - 1].count == brute(x).to_string();
        if y <= 1_000_000 {
            oracle_ok &= r.lower[n as usize - 1].count == brute(y).to_string();
        }
    }

    let upper_ok = r
        .upper
        .iter()
        .filter(|c| (2..=10).contains(&c.n))
        .all(|c| c.meets_delta);
    let at3 = r.lower[2].ratio;
    let below_013_by_3 = at3 < 0.13;
    let tail: Vec<_> = r.lower.iter().filter(|c| (3..=10).contains(&c.n)).collect();
    let decreasing = tail.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let asym_ok = tail
        .iter()
        .all(|c| c.ratio < 2.0 * a / (std::f64::consts::E * (c.n as f64 + 1.0)) + 0.01);
    let sub_bound = 3.0 + 2.0 * std::f64::consts::PI.powi(2) / 6.0 + 1e-9;
    let sub_ok = r.sub_total <= sub_bound;
    let pass = oracle_ok
        && upper_ok
        && below_013_by_3
        && decreasing
        && asym_ok
        && sub_ok
        && r.not_right_ok;
    outcome(
        pass,
        format!(
            "counts match enumeration: {oracle_ok}; A(2n^n)/(2n^n) >= 1/2: {upper_ok}; ratio at n=3 {at3:.4} < 0.13: {below_013_by_3}; \
             decreasing: {decreasing}; below 2a/(e(n+1))+0.01: {asym_ok}; sub total {:.6} <= {sub_bound:.6}: {sub_ok}; \
             gap inequality n<=50: {}",
            r.sub_total, r.not_right_ok
        ),
    )
}

fn sharpness(_: &mut Ctx) -> Outcome {
    let ex = salat_example(0.5).unwrap().with_sharpness();
    let r = sharpness_verify(&ex, 10, 2.0).unwrap();
    let pts: Vec<_> = r
        .checkpoints
        .iter()
        .filter(|c| (3..=10).contains(&c.n))
        .collect();
    let min = pts
        .iter()
        .map(|c| c.ratio_lower)
        .fold(f64::INFINITY, f64::min);
    let pass = r.psi_in_d1 && pts.len() == 8 && pts.iter().all(|c| c.ratio_lower >= 0.25 - 0.02);
    outcome(
        pass,
        format!(
            "psi in D1: {}; min lower ratio over n=3..10: {min:.4}",
            r.psi_in_d1
        ),
    )
}

/// `log 2 = Σ 1/(k 2^k)` in exact rationals, 80 terms (error below 2^-80).
fn ln2() -> f64 {
    let mut acc = BigRational::zero();
    for k in 1..=80u32 {
        acc += BigRational::new(BigInt::one(), BigInt::from(k) * (BigInt::one() << k));
    }
    acc.numer().to_f64().unwrap() / acc.denom().to_f64().unwrap()
}

fn gasull(ctx: &mut Ctx) -> Outcome {
    let (code, _, v) = ctx.cli(&[
        "verify",
        "gasull",
        "--signs",
        "alt",
        "--c",
        "recip",
        "--psi",
        "identity",
        "--horizon",
        "1e6",
        "--claim",
        "converges",
    ]);
    let r = &v["result"];
    let sup = f(&r["traces"]["nc_trace"]["tail_sup"]);
    let bound = 1.0 / (1e6 * 0.5);
    let partial = f(&r["partial_sums"]["final_value"]);
    let gap = (partial - ln2()).abs();
    outcome(
        code == 0 && sup <= bound && gap <= 1e-6,
        format!("nc tail sup {sup:.4e} <= {bound:.1e}; |S - log 2| = {gap:.2e}"),
    )
}

fn olivier(_: &mut Ctx) -> Outcome {
    let h = 1_000_000;
    let opts = TraceOptions::default();
    let a = olivier_trace(
        &CoeffSequence::recip_logsq(),
        &PsiFunction::log_power(2.0),
        h,
        &opts,
    )
    .unwrap();
    let b = olivier_trace(
        &CoeffSequence::recip_pow(2.0),
        &PsiFunction::identity(),
        h,
        &opts,
    )
    .unwrap();
    let bound = 2.0 / h as f64;
    outcome(
        a.tail_sup <= 0.05 && b.tail_sup <= bound,
        format!(
            "log-square tail sup {:.4}; n c_n tail sup {:e} vs 2/h = {bound:e}",
            a.tail_sup, b.tail_sup
        ),
    )
}

fn determinism(ctx: &mut Ctx) -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "density",
            "--set",
            "ap:3,3",
            "--psi",
            "identity",
            "--horizon",
            "100000",
        ],
        vec![
            "verify", "abel", "--n", "200", "--trials", "50", "--exact", "--seed", "7",
        ],
        vec!["verify", "toeplitz", "--n", "2000", "--horizon", "20000"],
        vec!["verify", "hamming"],
        vec![
            "verify",
            "salat-example",
            "--delta",
            "0.5",
            "--blocks",
            "10",
        ],
        vec![
            "verify",
            "sharpness",
            "--delta",
            "0.5",
            "--blocks",
            "10",
            "--alpha",
            "2",
        ],
        vec!["verify", "gasull", "--horizon", "100000"],
        vec![
            "verify",
            "olivier",
            "--c",
            "recip-logsq",
            "--psi",
            "logpow:alpha=2",
            "--horizon",
            "100000",
        ],
        vec!["construct", "salat", "--delta", "0.5", "--sharpness"],
        vec!["selftest", "--seed", "3"],
    ];
    let mut differing = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let name = format!("rerun{i}.json");
        let (c1, t1, _) = ctx.cli_at(cmd, &name);
        let (c2, t2, _) = ctx.cli_at(cmd, &name);
        if c1 != c2 || t1 != t2 || t1.is_empty() {
            differing.push(cmd.join(" "));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands rerun; differing: {differing:?}",
            commands.len()
        ),
    )
}

type Criterion = (usize, &'static str, f64, fn(&mut Ctx) -> Outcome);

fn main() {
    let dir = std::env::temp_dir().join(format!("densitylab-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("temp dir");
    let mut ctx = Ctx {
        dir: dir.clone(),
        runs: 0,
    };
    let criteria: [Criterion; 11] = [
        (1, "abel identities", 30.0, abel),
        (2, "toeplitz row sums", 5.0, toeplitz),
        (3, "sandwich inequality", 60.0, sandwich),
        (4, "density estimators", 60.0, densities),
        (5, "hamming construction", 5.0, hamming),
        (6, "auerbach construction", 120.0, auerbach),
        (7, "block example", 30.0, salat),
        (8, "sharpness variant", 30.0, sharpness),
        (9, "signed traces", 10.0, gasull),
        (10, "olivier traces", 10.0, olivier),
        (11, "determinism", f64::INFINITY, determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let o = check(&mut ctx);
        let secs = start.elapsed().as_secs_f64();
        let pass = o.pass && secs <= limit;
        println!(
            "criterion {id:>2} {name}: {} [{secs:.2}s, limit {limit}s] {}",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    let _ = fs::remove_dir_all(&dir);
    if failed.is_empty() {
        println!("all acceptance criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
