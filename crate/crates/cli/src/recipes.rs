use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use densitylab::constructions::auerbach::{
    auerbach_build, auerbach_build_progress, auerbach_verify,
};
use densitylab::constructions::hamming::{
    check_block_conditions, hamming_coeffs, select_nk, verify_hamming,
};
use densitylab::constructions::salat::{
    e_upper_bound, not_right_holds, salat_example, salat_example_verify, sharpness_verify,
    SalatExample,
};
use densitylab::psi::{catalog, classify, growth_report_log_domain, lem2_sandwich_sweep};
use densitylab::series::{
    abel_identity_check, condition_trace, nc1_trace, olivier_trace, ratio_trace,
    subseries_partial_sums, SalatCondition, SumMode,
};
use densitylab::sets::{chain_check, density_along_phi, linear_density_report, psi_density_report};
use densitylab::signed::{
    abel_signed_identity_check, gasull_traces, rajagopal_means, subsigned_partial_sums,
    toeplitz_rows, toeplitz_transform, ConvergenceClaim, SignSequence, ToeplitzSource,
};
use densitylab::{
    CoeffSequence, Error, IntegerSet, MonotonicityHint, Normalization, PsiFunction, Result, Trace,
    TraceOptions,
};

use crate::literals::{
    parse_psi, parse_sequence, parse_set, parse_signs, SEQUENCE_LITERALS, SET_LITERALS,
    SIGN_LITERALS,
};
use crate::{
    AuerbachArgs, ClaimArg, Cli, Command, Construct, Format, HammingArgs, NormalizationArg,
    SalatArgs, TraceKind, Verify, Window, RECIPES, SCHEMA_VERSION,
};

/// Result of one recipe, before rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub recipe: String,
    pub result: Value,
    pub csv: Option<String>,
    /// Plain-text output that replaces the JSON report.
    pub text: Option<String>,
    pub anomalies: Vec<String>,
}

impl Outcome {
    fn new(recipe: &str, result: impl Serialize) -> Result<Self> {
        Ok(Self {
            recipe: recipe.into(),
            result: to_value(result)?,
            csv: None,
            text: None,
            anomalies: Vec::new(),
        })
    }

    fn with_csv(mut self, trace: &Trace) -> Self {
        self.csv = Some(trace.to_csv());
        self
    }

    fn flag(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.anomalies.push(msg.into());
        }
    }

    pub fn render(&self, cli: &Cli) -> Result<String> {
        if let Some(t) = &self.text {
            return Ok(t.clone());
        }
        match cli.format {
            Format::Csv => self.csv.clone().ok_or_else(|| {
                Error::InvalidArgument(format!("format: `{}` produces no CSV trace", self.recipe))
            }),
            Format::Json => {
                let report = json!({
                    "schema_version": SCHEMA_VERSION,
                    "recipe": self.recipe,
                    "status": if self.anomalies.is_empty() { "ok" } else { "anomaly" },
                    "anomalies": self.anomalies,
                    "config": to_value(cli)?,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&report).expect("serializable");
                s.push('\n');
                Ok(s)
            }
        }
    }
}

fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidArgument(format!("serialization: {e}")))
}

fn opts(w: &Window) -> Result<TraceOptions> {
    if !(w.tail_fraction > 0.0 && w.tail_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail_fraction must lie in (0, 1), got {}",
            w.tail_fraction
        )));
    }
    if w.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(TraceOptions {
        tail_fraction: w.tail_fraction,
        ..TraceOptions::default()
    })
}

fn with_ratio_hint(c: CoeffSequence, psi: &PsiFunction) -> Result<CoeffSequence> {
    c.with_hint(MonotonicityHint::RatioNonIncreasing(psi.clone()))
}

pub(crate) fn run_recipe(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Density {
            set,
            psi,
            normalization,
            along,
            window,
        } => density(
            set,
            psi.as_deref(),
            *normalization,
            along.as_deref(),
            window,
        ),
        Command::Chain { set, psi, window } => {
            let r = chain_check(
                &parse_set(set)?,
                &parse_psi(psi)?,
                window.horizon,
                window.tail_fraction,
            )?;
            let mut out = Outcome::new("chain", &r)?;
            out.flag(r.holds, "density chain violated beyond slack");
            Ok(out)
        }
        Command::ClassifyPsi { psi, horizon } => {
            Outcome::new("classify-psi", classify(&parse_psi(psi)?, *horizon)?)
        }
        Command::Growth { psi, horizon } => Outcome::new(
            "growth",
            growth_report_log_domain(&parse_psi(psi)?, *horizon)?,
        ),
        Command::Trace {
            kind,
            c,
            set,
            psi,
            signs,
            exact,
            window,
        } => trace(*kind, c, set, psi, signs, *exact, window),
        Command::Construct(c) => construct(c),
        Command::Verify(v) => verify(v),
        Command::Selftest { seed, trials } => selftest(*seed, *trials),
        Command::List => Ok(Outcome {
            text: Some(listing()),
            ..Outcome::new("list", Value::Null)?
        }),
    }
}

fn density(
    set: &str,
    psi: Option<&str>,
    norm: NormalizationArg,
    along: Option<&str>,
    w: &Window,
) -> Result<Outcome> {
    let a = parse_set(set)?;
    let r = match (psi, along) {
        (Some(p), Some(phi)) => {
            density_along_phi(&parse_set(phi)?, &parse_psi(p)?, w.horizon, w.tail_fraction)?
        }
        (None, Some(_)) => return Err(Error::InvalidArgument("along: requires --psi".into())),
        (Some(p), None) => {
            let norm = match norm {
                NormalizationArg::Sum => Normalization::Sum,
                NormalizationArg::PsiValue => Normalization::PsiValue,
            };
            psi_density_report(&a, &parse_psi(p)?, w.horizon, w.tail_fraction, norm)?
        }
        (None, None) => linear_density_report(&a, w.horizon, w.tail_fraction)?,
    };
    let mut out = Outcome::new("density", &r)?;
    let mut csv = String::from("n,value\n");
    for (n, v) in &r.checkpoints {
        csv.push_str(&format!("{n},{v}\n"));
    }
    out.csv = Some(csv);
    out.flag(
        r.lower_estimate <= r.upper_estimate,
        "lower estimate exceeds upper estimate",
    );
    Ok(out)
}

fn trace(
    kind: TraceKind,
    c: &str,
    set: &str,
    psi: &str,
    signs: &str,
    exact: bool,
    w: &Window,
) -> Result<Outcome> {
    let o = opts(w)?;
    let c = parse_sequence(c)?;
    let psi_f = parse_psi(psi)?;
    let h = w.horizon;
    let t = match kind {
        TraceKind::Subseries => {
            let mode = if exact {
                SumMode::ExactRational
            } else {
                SumMode::Compensated
            };
            subseries_partial_sums(&c, &parse_set(set)?, h, mode, &o)?
        }
        TraceKind::Ratio => ratio_trace(&c, &parse_set(set)?, h, &o)?,
        TraceKind::Olivier => olivier_trace(&c, &psi_f, h, &o)?,
        TraceKind::Nc1 => nc1_trace(
            &with_ratio_hint(c, &psi_f)?,
            &parse_set(set)?,
            &psi_f,
            h,
            &o,
        )?,
        TraceKind::S1Concave => condition_trace(&c, &psi_f, h, SalatCondition::S1Concave, &o)?,
        TraceKind::S1Convex => condition_trace(&c, &psi_f, h, SalatCondition::S1Convex, &o)?,
        TraceKind::Subsigned => subsigned_partial_sums(&parse_signs(signs)?, &c, h, &o)?,
    };
    Ok(Outcome::new("trace", &t)?.with_csv(&t))
}

fn hamming_inputs(a: &HammingArgs) -> Result<(IntegerSet, PsiFunction)> {
    Ok((parse_set(&a.phi)?, parse_psi(&a.psi)?))
}

fn salat_from(a: &SalatArgs) -> Result<SalatExample> {
    Ok(salat_example(a.delta)?.with_cap(a.cap))
}

fn construct(c: &Construct) -> Result<Outcome> {
    match c {
        Construct::Hamming(a) => {
            let (phi, psi) = hamming_inputs(a)?;
            let nk = select_nk(&phi, &psi, a.kmax, a.budget)?;
            let w = hamming_coeffs(&phi, &psi, &nk)?;
            let hyps = check_block_conditions(&phi, &psi, &nk)?;
            let mut out = Outcome::new(
                "hamming",
                json!({
                    "phi": w.phi_label,
                    "psi": psi.label(),
                    "nk": w.nk,
                    "boundaries": w.boundaries,
                    "block_denominators": w.block_denominators,
                    "block_conditions": hyps,
                }),
            )?;
            for h in &hyps {
                out.flag(
                    h.hyp1 && h.hyp2,
                    format!("block {} violates its selection conditions", h.k),
                );
            }
            Ok(out)
        }
        Construct::Auerbach(a) => {
            let art = auerbach_build(
                &parse_sequence(&a.c)?,
                &parse_psi(&a.psi)?,
                a.kmax,
                a.stage_budget,
            )?;
            Outcome::new("auerbach", &art)
        }
        Construct::Salat {
            salat,
            sharpness,
            alpha,
        } => {
            if salat.blocks > salat.cap {
                return Err(Error::BlockCapExceeded {
                    requested: salat.blocks as u64,
                    cap: salat.cap as u64,
                });
            }
            let mut ex = salat_from(salat)?;
            if *sharpness {
                ex = ex.with_sharpness();
            }
            let blocks: Vec<Value> = (1..=salat.blocks)
                .map(|n| {
                    let (lo, hi) = ex.block(n);
                    let (plo, phi) = SalatExample::plateau(n);
                    json!({
                        "n": n,
                        "lo": lo.to_string(),
                        "hi": hi.to_string(),
                        "plateau_lo": plo.to_string(),
                        "plateau_hi": phi.to_string(),
                        "coefficient": format!("1/{}", BigInt::from(n).pow(n + 2)),
                    })
                })
                .collect();
            let merged: Vec<[String; 2]> = ex
                .merged_blocks(salat.blocks)
                .iter()
                .map(|(l, h)| [l.to_string(), h.to_string()])
                .collect();
            let mut result = json!({
                "delta": ex.delta,
                "a": ex.a.to_string(),
                "blocks": blocks,
                "merged_blocks": merged,
                "sharpness_psi": ex.sharpness_psi,
            });
            if *sharpness {
                result["alpha"] = json!(alpha);
                result["ln_x0"] = json!((alpha / (alpha - 1.0)).exp() - densitylab::psi::e_to_e());
            }
            Outcome::new("salat", result)
        }
    }
}

#[derive(Serialize, Default)]
struct AbelSummary {
    checks: usize,
    failures: Vec<u64>,
    max_rel_gap: f64,
}

impl AbelSummary {
    fn record(&mut self, trial: u64, lhs: f64, gap: f64, holds: bool, tol: f64, exact: bool) {
        self.checks += 1;
        let rel = gap / lhs.abs().max(1.0);
        self.max_rel_gap = self.max_rel_gap.max(rel);
        let ok = if exact { holds } else { rel <= tol };
        if !ok {
            self.failures.push(trial);
        }
    }
}

/// Random instance: rational coefficients over a common denominator.
struct AbelInstance {
    n: u64,
    c: CoeffSequence,
    set: IntegerSet,
    signs: SignSequence,
    psi: PsiFunction,
}

fn abel_instance(rng: &mut ChaCha8Rng, n_max: u64, trial: u64) -> Result<AbelInstance> {
    const DEN: i64 = 720;
    let n = rng.gen_range(2..=n_max.max(2));
    let coeffs: Vec<BigRational> = (0..n)
        .map(|_| BigRational::new(BigInt::from(rng.gen_range(1..=1000i64)), BigInt::from(DEN)))
        .collect();
    let members: Vec<u64> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
    let signs: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
    Ok(AbelInstance {
        n,
        c: CoeffSequence::exact_table(format!("trial{trial}"), coeffs)?,
        set: IntegerSet::finite_list(format!("trial{trial}"), members)?,
        signs: SignSequence::table(format!("trial{trial}"), signs)?,
        psi: if trial % 2 == 0 {
            PsiFunction::identity()
        } else {
            PsiFunction::power(2.0)
        },
    })
}

fn verify_abel(n_max: u64, trials: usize, exact: bool, seed: u64, tol: f64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut uf, mut ue, mut sf, mut se) = (
        AbelSummary::default(),
        AbelSummary::default(),
        AbelSummary::default(),
        AbelSummary::default(),
    );
    for trial in 0..trials as u64 {
        let inst = abel_instance(&mut rng, n_max, trial)?;
        let r = abel_identity_check(&inst.c, &inst.set, &inst.psi, inst.n, SumMode::Compensated)?;
        uf.record(trial, r.lhs, r.abs_gap, r.holds, tol, false);
        let r = abel_signed_identity_check(
            &inst.signs,
            &inst.c,
            &inst.psi,
            inst.n,
            SumMode::Compensated,
        )?;
        sf.record(trial, r.lhs, r.abs_gap, r.holds, tol, false);
        if exact {
            let r = abel_identity_check(
                &inst.c,
                &inst.set,
                &inst.psi,
                inst.n,
                SumMode::ExactRational,
            )?;
            ue.record(trial, r.lhs, r.abs_gap, r.holds, tol, true);
            let r = abel_signed_identity_check(
                &inst.signs,
                &inst.c,
                &inst.psi,
                inst.n,
                SumMode::ExactRational,
            )?;
            se.record(trial, r.lhs, r.abs_gap, r.holds, tol, true);
        }
    }
    let mut out = Outcome::new(
        "abel",
        json!({
            "trials": trials,
            "n_max": n_max,
            "seed": seed,
            "unsigned_float": uf,
            "signed_float": sf,
            "unsigned_exact": exact.then_some(&ue),
            "signed_exact": exact.then_some(&se),
        }),
    )?;
    for (name, s) in [
        ("unsigned float", &uf),
        ("signed float", &sf),
        ("unsigned exact", &ue),
        ("signed exact", &se),
    ] {
        out.flag(
            s.failures.is_empty(),
            format!("{name} identity failed in {} trials", s.failures.len()),
        );
    }
    Ok(out)
}

fn verify_toeplitz(c: &str, psi: &str, n: u64, x: &str, tol: f64, w: &Window) -> Result<Outcome> {
    let psi = parse_psi(psi)?;
    let c = with_ratio_hint(parse_sequence(c)?, &psi)?;
    let (mut max_gap, mut worst, mut nonneg) = (0.0f64, 0u64, true);
    let mut last = None;
    for k in 1..=n {
        let row = toeplitz_rows(&c, &psi, k)?;
        if row.abs_gap > max_gap {
            max_gap = row.abs_gap;
            worst = k;
        }
        nonneg &= row.nonnegative;
        if k == n {
            last = Some((row.row_sum, row.closed_form_sum));
        }
    }
    let xs = parse_sequence(x)?;
    let xf = |k: u64| xs.get(k).unwrap_or(f64::NAN);
    let source = ToeplitzSource::Separable {
        c: c.clone(),
        psi: psi.clone(),
    };
    let transform = toeplitz_transform(&source, &xf, w.horizon, &opts(w)?)?;
    let (row_sum, closed) = last.unwrap_or((f64::NAN, f64::NAN));
    let mut out = Outcome::new(
        "toeplitz",
        json!({
            "rows_checked": n,
            "max_row_gap": max_gap,
            "worst_row": worst,
            "rows_nonnegative": nonneg,
            "last_row_sum": row_sum,
            "last_closed_form_sum": closed,
            "transform": transform,
        }),
    )?
    .with_csv(&transform.y);
    out.flag(
        max_gap <= tol,
        format!("row sum gap {max_gap:e} at n = {worst} exceeds {tol:e}"),
    );
    out.flag(nonneg, "negative matrix entries");
    out.flag(
        transform.sandwich_holds,
        "transform escapes the liminf/limsup sandwich",
    );
    Ok(out)
}

fn verify(v: &Verify) -> Result<Outcome> {
    match v {
        Verify::Abel {
            n,
            trials,
            exact,
            seed,
            tol,
        } => verify_abel(*n, *trials, *exact, *seed, *tol),
        Verify::Toeplitz {
            c,
            psi,
            n,
            x,
            tol,
            window,
        } => verify_toeplitz(c, psi, *n, x, *tol, window),
        Verify::Rajagopal {
            set,
            a,
            b,
            threshold,
            window,
        } => {
            let set = parse_set(set)?;
            let s = move |k: u64| {
                if set.contains(k).unwrap_or(false) {
                    1.0
                } else {
                    0.0
                }
            };
            let r = rajagopal_means(
                &s,
                &parse_sequence(a)?,
                &parse_sequence(b)?,
                window.horizon,
                *threshold,
                &opts(window)?,
            )?;
            let mut out = Outcome::new("rajagopal", &r)?.with_csv(&r.sigma_a);
            out.flag(r.sandwich_holds, "mean sandwich violated beyond slack");
            out.anomalies.extend(r.anomalies.iter().cloned());
            Ok(out)
        }
        Verify::Olivier {
            c,
            psi,
            tol,
            window,
        } => {
            let t = olivier_trace(
                &parse_sequence(c)?,
                &parse_psi(psi)?,
                window.horizon,
                &opts(window)?,
            )?;
            let mut out =
                Outcome::new("olivier", json!({ "trace": t, "bound": tol }))?.with_csv(&t);
            if let Some(b) = tol {
                out.flag(
                    t.tail_sup <= *b,
                    format!("tail sup {} exceeds {b}", t.tail_sup),
                );
            }
            Ok(out)
        }
        Verify::Hamming { args, horizon } => {
            let (phi, psi) = hamming_inputs(args)?;
            let nk = select_nk(&phi, &psi, args.kmax, args.budget)?;
            let w = hamming_coeffs(&phi, &psi, &nk)?;
            let h = horizon.unwrap_or(*w.boundaries.last().expect("non-empty"));
            let r = verify_hamming(&w, h)?;
            let mut out = Outcome::new("hamming", &r)?.with_csv(&r.subseries_trace);
            out.flag(r.sub_bound_ok, "sub-series exceeds its bound");
            out.flag(r.monotone_ok, "c/ψ′ is not non-increasing");
            out.flag(r.block_conditions_ok, "block selection conditions fail");
            out.flag(
                !r.insufficient_blocks,
                "too few blocks to exhibit divergence",
            );
            Ok(out)
        }
        Verify::Auerbach { args, horizon } => verify_auerbach(args, *horizon),
        Verify::SalatExample(a) => {
            let r = salat_example_verify(&salat_from(a)?, a.blocks)?;
            let mut out = Outcome::new("salat-example", &r)?;
            for c in &r.upper {
                out.flag(c.meets_delta, format!("A(x)/x < delta at block {}", c.n));
            }
            for c in &r.lower {
                out.flag(
                    c.within_finite_bound,
                    format!("ratio above finite bound at block {}", c.n),
                );
            }
            out.flag(r.full_ok, "full-series block masses below bound");
            out.flag(r.sub_ok, "sub-series total above bound");
            out.flag(r.not_right_ok, "block gap inequality fails");
            Ok(out)
        }
        Verify::Sharpness { salat, alpha } => {
            let r = sharpness_verify(&salat_from(salat)?.with_sharpness(), salat.blocks, *alpha)?;
            let mut out = Outcome::new("sharpness", &r)?;
            out.flag(r.psi_in_d1, "sharpness weight not classified concave");
            for c in &r.checkpoints {
                out.flag(
                    c.ok,
                    format!(
                        "ψ-density ratio {} below target at block {}",
                        c.ratio_lower, c.n
                    ),
                );
            }
            for p in &r.plateau_weights {
                out.flag(
                    p.ok,
                    format!("weighted plateau mass below bound at block {}", p.n),
                );
            }
            Ok(out)
        }
        Verify::Gasull {
            signs,
            c,
            psi,
            claim,
            window,
        } => {
            let o = opts(window)?;
            let psi = parse_psi(psi)?;
            let m = parse_signs(signs)?;
            let c = with_ratio_hint(parse_sequence(c)?, &psi)?;
            let claim = match claim {
                ClaimArg::Converges => ConvergenceClaim::Converges,
                ClaimArg::Diverges => ConvergenceClaim::Diverges,
                ClaimArg::Unknown => ConvergenceClaim::Unknown,
            };
            let r = gasull_traces(&m, &c, &psi, window.horizon, claim, &o)?;
            let partial = subsigned_partial_sums(&m, &c, window.horizon, &o)?;
            Ok(
                Outcome::new("gasull", json!({ "traces": r, "partial_sums": partial }))?
                    .with_csv(&r.nc_trace),
            )
        }
    }
}

fn verify_auerbach(a: &AuerbachArgs, horizon: u64) -> Result<Outcome> {
    let c = parse_sequence(&a.c)?;
    let psi = parse_psi(&a.psi)?;
    let art = auerbach_build_progress(&c, &psi, a.kmax, a.stage_budget)?;
    let report = if art.completed_stages() >= 2 {
        Some(auerbach_verify(&art, &psi, horizon)?)
    } else {
        None
    };
    let mut out = Outcome::new("auerbach", json!({ "artifacts": art, "report": report }))?;
    if let Some(k) = art.exhausted_at {
        out.anomalies.push(format!(
            "stage {k} exhausted its budget of {}",
            a.stage_budget
        ));
    }
    match &report {
        Some(r) => {
            out.flag(
                r.block_sums_ok,
                "a block sum does not exceed its stage index",
            );
            out.flag(r.doubling_ok, "boundaries do not double");
            for b in &r.boundary_checks {
                out.flag(
                    b.ok,
                    format!(
                        "boundary bound fails at r = {}: {} > {}",
                        b.r, b.ratio, b.bound
                    ),
                );
            }
            out.flag(r.psi_class_ok, "ψ is not in the convex class");
        }
        None => out
            .anomalies
            .push(format!("only {} stages completed", art.completed_stages())),
    }
    Ok(out)
}

#[derive(Serialize)]
struct SelfCheck {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn selftest(seed: u64, trials: usize) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| {
        checks.push(SelfCheck {
            name,
            passed,
            detail,
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed = 0;
    for trial in 0..trials as u64 {
        let inst = abel_instance(&mut rng, 60, trial)?;
        let u = abel_identity_check(
            &inst.c,
            &inst.set,
            &inst.psi,
            inst.n,
            SumMode::ExactRational,
        )?;
        let s = abel_signed_identity_check(
            &inst.signs,
            &inst.c,
            &inst.psi,
            inst.n,
            SumMode::ExactRational,
        )?;
        failed += usize::from(!(u.holds && s.holds));
    }
    push(
        "abel-exact",
        failed == 0,
        format!("{failed} of {trials} trials failed"),
    );

    let id = PsiFunction::identity();
    let c = with_ratio_hint(CoeffSequence::recip(), &id)?;
    let mut gap = 0.0f64;
    for n in 1..=200 {
        let row = toeplitz_rows(&c, &id, n)?;
        gap = gap.max((row.row_sum - (1.0 - 1.0 / n as f64)).abs());
    }
    push("toeplitz-rows", gap <= 1e-12, format!("max gap {gap:e}"));

    let d = linear_density_report(&IntegerSet::arithmetic(3, 3)?, 100_000, 0.5)?;
    let err = (d.final_ratio - 1.0 / 3.0).abs();
    push(
        "ap-density",
        err <= 1e-4,
        format!("final ratio {}", d.final_ratio),
    );

    for psi in [PsiFunction::identity(), PsiFunction::sqrt()] {
        let sweep = lem2_sandwich_sweep(&psi, 200)?;
        push(
            "lem2-sandwich",
            sweep.failures.is_empty(),
            format!("{}: {} failures", psi.label(), sweep.failures.len()),
        );
    }

    let ex = salat_example(0.5)?;
    let count = ex.count_upto(&num_bigint::BigUint::from(54u32));
    let e_up = e_upper_bound();
    let gaps_ok = (1..=50).all(|n| not_right_holds(n, &e_up));
    push(
        "block-example",
        count == 35u32.into() && gaps_ok,
        format!("A(54) = {count}"),
    );

    let nk = select_nk(&IntegerSet::squares(), &id, 5, 1_000_000)?;
    push("hamming-nk", nk == [0, 1, 2, 3, 5, 11], format!("{nk:?}"));

    let mut out = Outcome::new("selftest", json!({ "seed": seed, "checks": checks }))?;
    for c in &checks {
        out.flag(c.passed, format!("{}: {}", c.name, c.detail));
    }
    Ok(out)
}

fn listing() -> String {
    let mut s = String::from("psi keys:\n");
    for e in catalog() {
        s.push_str(&format!("  {:<22} {}\n", e.key, e.definition));
    }
    for (title, items) in [
        ("set literals", SET_LITERALS),
        ("sequence literals", SEQUENCE_LITERALS),
        ("sign literals", SIGN_LITERALS),
    ] {
        s.push_str(&format!("{title}:\n"));
        for (lit, desc) in items {
            s.push_str(&format!("  {lit:<22} {desc}\n"));
        }
    }
    s.push_str("recipes:\n");
    for r in RECIPES {
        s.push_str(&format!("  {r}\n"));
    }
    s
}
