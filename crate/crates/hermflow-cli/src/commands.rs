use crate::output::{cx, emit, envelope, tidy, vector, CliError};
use crate::{ClassifyArgs, Cli, Command, CplxArgs, Expect, FlowArgs, Format, HopfArgs, Table3Args, Target};
use hermflow::catalog::table3::regenerate_with;
use hermflow::catalog::{format_params, parse_params, Catalog, RegenOptions, Table3Fixture};
use hermflow::flow::{integrate, named_flow, preserves_nonnegativity, scalars, FlowCoefficients};
use hermflow::hopf::{bisectional, bismut_curvature_at, HopfMetric};
use hermflow::invariant::{bismut_curvature, format_witness, format_witness_value, ComplexStructureEquations, CurvatureConvention, CurvatureTensor, MetricCoefficients, MetricSlice};
use hermflow::notation::parse_vector;
use hermflow::oracle::{fd_bismut_christoffels, fd_curvature_with, FdScheme, PointMetricField};
use hermflow::positivity::{classify_hopf, classify_unitary, ClassifyOptions, SignClassification, Verdict, Witness};
use hermflow::sampling::{random_metric, seeded};
use hermflow::tensor::{ComplexTensor, FrameIndex};
use hermflow::tol::{Tolerances, MIN_SAMPLES};
use hermflow::HermError;
use serde_json::json;

/// Tolerance of the finite-difference cross-check in `hopf --verify`.
const VERIFY_TOL: f64 = 1e-6;
/// Hopf sample points for `classify --hopf`.
const HOPF_POINTS: usize = 4;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let tol = cli.tolerances()?;
    if cli.global.threads > 0 {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global();
    }
    match &cli.command {
        Command::Hopf(a) => hopf(cli, &tol, a),
        Command::Flow(a) => flow(cli, &tol, a),
        Command::Cplx(a) => cplx(cli, &tol, a),
        Command::Classify(a) => classify(cli, &tol, a),
        Command::Table3(a) => table3(cli, &tol, a),
        Command::Families => families(cli, &tol),
    }
}

fn format_of(cli: &Cli, allowed: &[Format], default: Format) -> Result<Format, CliError> {
    let f = cli.global.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(CliError::Invalid(format!("--format {f:?} is not available here (use one of {allowed:?})").to_lowercase()));
    }
    Ok(f)
}

fn components(t: &ComplexTensor, label: impl Fn(&[usize]) -> [FrameIndex; 4], threshold: f64) -> Vec<(String, String)> {
    t.indices()
        .filter_map(|ix| {
            let v = t.get(&ix);
            (v.norm() > threshold).then(|| (format_witness(&label(&ix)), cx(v)))
        })
        .collect()
}

fn hopf(cli: &Cli, tol: &Tolerances, a: &HopfArgs) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Text, Format::Json], Format::Text)?;
    let h = HopfMetric::new(a.n, a.alpha, a.beta)?;
    let z = parse_vector(&a.point, a.n)?;
    let om = bismut_curvature_at(&h, &z)?;
    let thr = tol.zero_threshold(om.max_abs());
    let label = |ix: &[usize]| [FrameIndex::hol(ix[0] + 1), FrameIndex::anti(ix[1] + 1), FrameIndex::hol(ix[2] + 1), FrameIndex::anti(ix[3] + 1)];
    let comps = components(&om, label, thr);
    let bis = match (&a.xi, &a.nu) {
        (Some(x), Some(y)) => Some(bisectional(&h, &z, &parse_vector(x, a.n)?, &parse_vector(y, a.n)?)?.value),
        _ => None,
    };
    let check = if a.verify {
        let field = PointMetricField::new(a.n, move |w| h.metric(w));
        let gamma = |w: &[hermflow::C64]| fd_bismut_christoffels(&field, w, FdScheme::richardson());
        let fd = fd_curvature_with(&field, &gamma, &z, FdScheme::richardson())?;
        let diff = fd.mixed_block().data().iter().zip(om.data()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        Some((diff, fd.pure_type_max()))
    } else {
        None
    };
    let text = match format {
        Format::Json => envelope(
            "hopf",
            cli.global.seed,
            tol,
            json!({
                "n": a.n, "alpha": a.alpha, "beta": a.beta, "point": vector(&z),
                "components": comps.iter().map(|(k, v)| json!({"component": k, "value": v})).collect::<Vec<_>>(),
                "flat": comps.is_empty(),
                "bisectional": bis.map(tidy),
                "verify": check.map(|(d, p)| json!({"max_difference": d, "pure_type_max": p, "tolerance": VERIFY_TOL, "ok": d <= VERIFY_TOL && p <= VERIFY_TOL})),
            }),
        ),
        _ => {
            let mut s = format!("Bismut curvature of g({}, {}) on n = {} at z = {}\n", a.alpha, a.beta, a.n, vector(&z));
            if comps.is_empty() {
                s.push_str("all components vanish\n");
            }
            for (k, v) in &comps {
                s.push_str(&format!("{k} = {v}\n"));
            }
            if let Some(b) = bis {
                s.push_str(&format!("bisectional {}\n", tidy(b)));
            }
            if let Some((d, p)) = check {
                let ok = if d <= VERIFY_TOL && p <= VERIFY_TOL { "ok" } else { "FAILED" };
                s.push_str(&format!("finite-difference check: max difference {d:.1e}, pure-type {p:.1e}, tolerance {VERIFY_TOL:e}: {ok}\n"));
            }
            s
        }
    };
    emit(cli.global.output.as_deref(), &text)?;
    match check {
        Some((d, p)) if d > VERIFY_TOL || p > VERIFY_TOL => Err(CliError::Mismatch(format!("closed form and finite differences differ by {d:.2e}"))),
        _ => Ok(()),
    }
}

fn flow_coefficients(a: &FlowArgs) -> Result<FlowCoefficients, CliError> {
    match (&a.name, &a.coeffs) {
        (Some(n), _) => Ok(named_flow(n)?),
        (None, Some(c)) => {
            let v: Vec<f64> = c
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("bad coefficient {x:?}"))))
                .collect::<Result<_, _>>()?;
            match v[..] {
                [p, q, r, s] if v.iter().all(|x| x.is_finite()) => Ok(FlowCoefficients::new(p, q, r, s)),
                _ => Err(CliError::Invalid(format!("--coeffs needs four finite numbers, got {c:?}"))),
            }
        }
        (None, None) => Err(CliError::Invalid("give --name or --coeffs".into())),
    }
}

fn flow(cli: &Cli, tol: &Tolerances, a: &FlowArgs) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Csv, Format::Json, Format::Text], Format::Csv)?;
    let fc = flow_coefficients(a)?;
    if a.every == 0 {
        return Err(CliError::Invalid("--every must be at least 1".into()));
    }
    let tr = integrate(a.alpha0, a.beta0, &fc, a.n, a.t_end, a.dt)?;
    let sc = scalars(&fc, a.n);
    let pres = preserves_nonnegativity(&fc, a.n);
    let last = tr.last();
    let samples: Vec<_> = tr
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % a.every == 0 || *k + 1 == tr.samples.len())
        .map(|(_, s)| *s)
        .collect();
    let ratio = sc.static_ratio.map_or("none".to_string(), |r| tidy(r).to_string());
    let mut summary = format!(
        "flow {} n={}: F={} L={} static_ratio={} verdict {} (bound {}, margin {}); gamma {} -> {} at t={}; {}",
        fc.label(),
        a.n,
        tidy(sc.f),
        tidy(sc.l),
        ratio,
        if pres.preserved { "preserved" } else { "not preserved" },
        tidy(pres.bound),
        tidy(pres.margin),
        tidy(a.beta0 / a.alpha0),
        tidy(last.gamma),
        tidy(last.t),
        tr.termination
    );
    if let Some(r) = &tr.exit_reason {
        summary.push_str(&format!(" ({r})"));
    }
    summary.push('\n');
    let body = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "alpha", "beta", "gamma"]).map_err(|e| CliError::Invalid(e.to_string()))?;
            for s in &samples {
                w.write_record([s.t, s.alpha, s.beta, s.gamma].map(|x| x.to_string())).map_err(|e| CliError::Invalid(e.to_string()))?;
            }
            Some(String::from_utf8(w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?).expect("utf-8"))
        }
        Format::Json => Some(envelope(
            "flow",
            cli.global.seed,
            tol,
            json!({
                "coefficients": fc, "n": a.n, "alpha0": a.alpha0, "beta0": a.beta0, "t_end": a.t_end, "dt": a.dt,
                "scalars": sc, "preservation": pres, "termination": tr.termination, "exit_reason": tr.exit_reason,
                "samples": samples,
            }),
        )),
        _ => None,
    };
    match body {
        // summary goes to stderr when stdout carries the data
        Some(b) if cli.global.output.is_none() => {
            emit(None, &b)?;
            eprint!("{summary}");
        }
        Some(b) => {
            emit(cli.global.output.as_deref(), &b)?;
            print!("{summary}");
        }
        None => emit(cli.global.output.as_deref(), &summary)?,
    }
    Ok(())
}

struct Structure {
    label: String,
    eqs: ComplexStructureEquations,
}

fn structure(t: &Target) -> Result<Structure, CliError> {
    match (&t.family, &t.equations) {
        (Some(f), _) => {
            let fam = Catalog::builtin().family(f)?;
            let p = parse_params(&t.params)?;
            Ok(Structure {
                label: format!("{} [{}]", fam.id, format_params(&p)),
                eqs: fam.instantiate(&p)?,
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            let eqs = ComplexStructureEquations::from_json(&text)?;
            if eqs.n() != 3 {
                return Err(CliError::Invalid(format!("invariant metrics are implemented for n = 3, file has n = {}", eqs.n())));
            }
            Ok(Structure {
                label: path.display().to_string(),
                eqs,
            })
        }
        (None, None) => Err(CliError::Invalid("give --family or --equations".into())),
    }
}

fn frame_label(ix: &[usize]) -> [FrameIndex; 4] {
    [ix[0], ix[1], ix[2], ix[3]].map(|s| FrameIndex::from_slot(s, 3))
}

fn cplx(cli: &Cli, tol: &Tolerances, a: &CplxArgs) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Text, Format::Json], Format::Text)?;
    let st = structure(&a.target)?;
    let metrics: Vec<MetricCoefficients> = match a.random {
        Some(0) => return Err(CliError::Invalid("--random must be at least 1".into())),
        Some(k) => {
            let slice = MetricSlice::parse(&a.slice)?;
            let mut rng = seeded(cli.global.seed);
            (0..k).map(|_| random_metric(&mut rng, &slice)).collect()
        }
        None => vec![MetricCoefficients::parse(&a.target.metric)?],
    };
    let mut holds = true;
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut first: Option<CurvatureTensor> = None;
    for m in &metrics {
        let om = bismut_curvature(&st.eqs, m, CurvatureConvention::Swapped)?;
        let rep = om.check_cplx_with(tol);
        worst = worst.max(rep.max_violation);
        if first.is_none() {
            first = Some(om.clone());
        }
        if !rep.satisfied {
            holds = false;
            witness = rep.witness.map(|(w, v)| (format_witness_value(&w, v), *m));
            break;
        }
    }
    let dump = match (a.dump, &first) {
        (true, Some(om)) => components(om.tensor(), frame_label, tol.zero_threshold(om.max_abs())),
        _ => Vec::new(),
    };
    let text = match format {
        Format::Json => envelope(
            "cplx",
            cli.global.seed,
            tol,
            json!({
                "structure": st.label,
                "metrics": metrics.len(),
                "holds": holds,
                "max_violation": worst,
                "witness": witness.as_ref().map(|(w, m)| json!({"component": w, "metric": m})),
                "components": dump.iter().map(|(k, v)| json!({"component": k, "value": v})).collect::<Vec<_>>(),
            }),
        ),
        _ => {
            let mut s = format!("{}: (Cplx) {} on {} metric(s), max violation {:.3e}\n", st.label, if holds { "holds" } else { "fails" }, metrics.len(), worst);
            if let Some((w, m)) = &witness {
                s.push_str(&format!("witness {w} at r2={} s2={} t2={} u={} v={} z={}\n", tidy(m.r2), tidy(m.s2), tidy(m.t2), cx(m.u), cx(m.v), cx(m.z)));
            }
            for (k, v) in &dump {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s
        }
    };
    emit(cli.global.output.as_deref(), &text)?;
    match a.expect {
        Some(Expect::Holds) if !holds => Err(CliError::Mismatch("(Cplx) was expected to hold".into())),
        Some(Expect::Fails) if holds => Err(CliError::Mismatch("(Cplx) was expected to fail".into())),
        _ => Ok(()),
    }
}

fn witness_json(w: &Option<Witness>) -> serde_json::Value {
    w.as_ref().map_or(serde_json::Value::Null, |w| json!({"xi": vector(&w.xi), "nu": vector(&w.nu), "value": tidy(w.value)}))
}

fn classify(cli: &Cli, tol: &Tolerances, a: &ClassifyArgs) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Text, Format::Json], Format::Text)?;
    let expect = a.expect.as_deref().map(Verdict::parse).transpose()?;
    if a.starts == 0 {
        return Err(CliError::Invalid("--starts must be at least 1".into()));
    }
    let opts = ClassifyOptions {
        starts: a.starts,
        seed: cli.global.seed,
        tolerances: *tol,
        ..ClassifyOptions::default()
    };
    let (label, outcome): (String, Result<SignClassification, HermError>) = if a.hopf {
        let (n, al, be) = (a.n.expect("required"), a.alpha.expect("required"), a.beta.expect("required"));
        let h = HopfMetric::new(n, al, be)?;
        (format!("Hopf g({al}, {be}), n = {n}"), classify_hopf(&h, HOPF_POINTS, &opts))
    } else {
        let st = structure(&a.target)?;
        let m = MetricCoefficients::parse(&a.target.metric)?;
        let om = bismut_curvature(&st.eqs, &m, CurvatureConvention::Swapped)?;
        (format!("{} with {}", st.label, a.target.metric), classify_unitary(&om, m.frame_metric()?.hermitian(), &opts))
    };
    let (verdict, c) = match outcome {
        Ok(c) => (Some(c.verdict), Some(c)),
        Err(HermError::CplxViolated { .. }) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let vtext = verdict.map_or("not defined: (Cplx) fails".to_string(), |v| v.to_string());
    let text = match format {
        Format::Json => envelope(
            "classify",
            cli.global.seed,
            tol,
            json!({
                "target": label,
                "verdict": verdict,
                "cplx": verdict.is_some(),
                "min_value": c.as_ref().map(|c| tidy(c.min_value)),
                "max_value": c.as_ref().map(|c| tidy(c.max_value)),
                "min_witness": c.as_ref().map(|c| witness_json(&c.min_witness)),
                "max_witness": c.as_ref().map(|c| witness_json(&c.max_witness)),
                "starts": a.starts,
            }),
        ),
        _ => {
            let mut s = format!("{label}: {vtext}\n");
            if let Some(c) = &c {
                s.push_str(&format!("min {} max {} (tolerance {:.1e})\n", tidy(c.min_value), tidy(c.max_value), c.tolerance));
                for (name, w) in [("min", &c.min_witness), ("max", &c.max_witness)] {
                    if let Some(w) = w {
                        s.push_str(&format!("{name} at xi = {}, nu = {}\n", vector(&w.xi), vector(&w.nu)));
                    }
                }
            }
            s
        }
    };
    emit(cli.global.output.as_deref(), &text)?;
    match expect {
        Some(e) if Some(e) != verdict => Err(CliError::Mismatch(format!("expected {e}, found {vtext}"))),
        _ => Ok(()),
    }
}

fn table3(cli: &Cli, tol: &Tolerances, a: &Table3Args) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Markdown, Format::Json], Format::Markdown)?;
    if a.samples < MIN_SAMPLES {
        eprintln!("warning: --samples {} is below the minimum of {MIN_SAMPLES}", a.samples);
        return Err(CliError::Invalid(format!("--samples must be at least {MIN_SAMPLES}")));
    }
    let catalog = Catalog::builtin();
    let mut fixture = match &a.fixture {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            Table3Fixture::from_json_with(&text, catalog)?
        }
        None => Table3Fixture::builtin().clone(),
    };
    if a.corrupt {
        corrupt(&mut fixture, &a.families)?;
    }
    let opts = RegenOptions {
        samples: a.samples,
        seed: cli.global.seed,
        starts: a.starts,
        tolerances: *tol,
        families: a.families.clone(),
        ..RegenOptions::default()
    };
    let report = regenerate_with(&fixture, catalog, &opts)?;
    let text = match format {
        Format::Json => envelope("table3", cli.global.seed, tol, &report),
        _ => report.to_markdown(),
    };
    emit(cli.global.output.as_deref(), &text)?;
    if report.ok() {
        Ok(())
    } else {
        for m in &report.mismatches {
            eprintln!("- {m}");
        }
        Err(CliError::Mismatch(format!("{} disagreement(s) with the fixture", report.mismatches.len())))
    }
}

/// Flips the first sign verdict among the selected rows.
fn corrupt(f: &mut Table3Fixture, only: &[String]) -> Result<(), CliError> {
    let row = f
        .rows
        .iter_mut()
        .filter(|r| only.is_empty() || only.iter().any(|o| o.eq_ignore_ascii_case(&r.family)))
        .find(|r| !r.sign.is_empty())
        .ok_or_else(|| CliError::Invalid("no sign entry to corrupt".into()))?;
    let e = &mut row.sign[0];
    e.verdict = if e.verdict == Verdict::NonNegative { Verdict::NonPositive } else { Verdict::NonNegative };
    Ok(())
}

fn families(cli: &Cli, tol: &Tolerances) -> Result<(), CliError> {
    let format = format_of(cli, &[Format::Text, Format::Json], Format::Text)?;
    let cat = Catalog::builtin();
    let text = match format {
        Format::Json => envelope("families", cli.global.seed, tol, &cat.families),
        _ => {
            let mut s = String::new();
            for f in &cat.families {
                let names: Vec<&str> = f.parameters.iter().map(|p| p.name.as_str()).collect();
                s.push_str(&format!("{:<6} {:<10} params [{}]  {}\n", f.id, f.kind, names.join(", "), f.equations));
            }
            s
        }
    };
    emit(cli.global.output.as_deref(), &text)
}
