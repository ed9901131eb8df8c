//! Regenerates the (Cplx) and Bismut-sign classification from random metrics and
//! compares it with the bundled table.

use super::{format_params, Catalog, FamilySpec, Params};
use crate::invariant::{bismut_curvature, format_witness_value, CurvatureConvention, MetricCoefficients, MetricSlice};
use crate::positivity::{classify_unitary, ClassifyOptions, Verdict};
use crate::sampling::{random_metric, substream, SeededRng};
use crate::tol::{self, Tolerances};
use crate::{HermError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

const TABLE3_JSON: &str = include_str!("../../data/table3.json");

/// (Cplx) holds for every metric on `slice` when the parameters match `when`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CplxCase {
    #[serde(default)]
    pub when: Params,
    #[serde(default)]
    pub slice: String,
}

/// Expected sign of the Bismut bisectional curvature for metrics on `slice`
/// (with `r² = r2` if given).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    pub label: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub slice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub family: String,
    /// Part of the printed classification (the rest are families where (Cplx) never holds).
    pub listed: bool,
    /// Empty: (Cplx) never holds.
    pub cplx: Vec<CplxCase>,
    #[serde(default)]
    pub sign: Vec<SignEntry>,
    /// A known disagreement between the table and the computation; reported, not counted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_discrepancy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table3Fixture {
    pub rows: Vec<TableRow>,
}

fn param_matches(when: &Params, p: &Params) -> bool {
    when.iter().all(|(k, v)| p.get(k).is_some_and(|w| (w.0 - v.0).norm() <= 1e-12))
}

/// Slices in `set` not strictly more constrained than another member.
fn minimal(set: &[MetricSlice]) -> Vec<MetricSlice> {
    let mut out: Vec<MetricSlice> = set
        .iter()
        .copied()
        .filter(|s| !set.iter().any(|o| o != s && s.contains(o)))
        .collect();
    out.sort_by_key(|s| (s.count(), s.u, s.v, s.z));
    out.dedup();
    out
}

fn slice_text(s: &[MetricSlice]) -> String {
    match s {
        [] => "never".into(),
        [one] if *one == MetricSlice::GENERIC => "always".into(),
        _ => s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" or "),
    }
}

impl TableRow {
    /// Minimal slices on which (Cplx) holds at `p`; empty means never.
    pub fn expected_slices(&self, p: &Params) -> Result<Vec<MetricSlice>> {
        let mut set = Vec::new();
        for c in &self.cplx {
            if param_matches(&c.when, p) {
                set.push(MetricSlice::parse(&c.slice)?);
            }
        }
        Ok(minimal(&set))
    }

    /// The (Cplx) column as text.
    pub fn cplx_text(&self) -> String {
        if self.cplx.is_empty() {
            return "never".into();
        }
        self.cplx
            .iter()
            .map(|c| {
                let slice = MetricSlice::parse(&c.slice).unwrap_or_default();
                let mut parts: Vec<String> = c.when.iter().map(|(k, v)| format!("{k}={v}")).collect();
                if slice != MetricSlice::GENERIC {
                    parts.push(slice.to_string());
                }
                if parts.is_empty() {
                    "always".into()
                } else {
                    parts.join(", ")
                }
            })
            .collect::<Vec<_>>()
            .join(" or ")
    }

    pub fn sign_text(&self) -> String {
        if self.sign.is_empty() {
            return "–".into();
        }
        self.sign
            .iter()
            .map(|s| {
                let v = verdict_text(s.verdict);
                if s.label.is_empty() {
                    v.to_string()
                } else {
                    format!("{}: {v}", s.label)
                }
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Indefinite => "nowhere non-negative nor non-positive",
        other => other.label(),
    }
}

impl Table3Fixture {
    /// Parses and checks the fixture against `catalog`.
    pub fn from_json_with(s: &str, catalog: &Catalog) -> Result<Self> {
        let f: Table3Fixture = serde_json::from_str(s).map_err(|e| HermError::Fixture(format!("table: {e}")))?;
        for row in &f.rows {
            let fam = catalog
                .family(&row.family)
                .map_err(|_| HermError::Fixture(format!("unknown family {}", row.family)))?;
            for c in &row.cplx {
                MetricSlice::parse(&c.slice).map_err(|e| HermError::Fixture(format!("{}: {e}", row.family)))?;
                for k in c.when.keys() {
                    if fam.parameter(k).is_none() {
                        return Err(HermError::Fixture(format!("{}: no parameter {k}", row.family)));
                    }
                }
            }
            for e in &row.sign {
                MetricSlice::parse(&e.slice).map_err(|er| HermError::Fixture(format!("{}: {er}", row.family)))?;
                fam.validate_params(&e.params)
                    .map_err(|er| HermError::Fixture(format!("{} {}: {er}", row.family, e.label)))?;
            }
        }
        Ok(f)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_json_with(s, Catalog::builtin())
    }

    pub fn builtin() -> &'static Table3Fixture {
        static T: OnceLock<Table3Fixture> = OnceLock::new();
        T.get_or_init(|| Table3Fixture::from_json(TABLE3_JSON).expect("bundled table3.json is valid"))
    }

    pub fn row(&self, family: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.family.eq_ignore_ascii_case(family))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegenOptions {
    /// Metrics per slice at each tabulated parameter point; other points get a tenth.
    pub samples: usize,
    pub seed: u64,
    /// Multistart count for each sign classification.
    pub starts: usize,
    /// Grid size for each real parameter.
    pub grid: usize,
    /// Extra random parameter draws per family.
    pub random: usize,
    pub tolerances: Tolerances,
    /// Restrict to these families (all rows if empty).
    #[serde(default)]
    pub families: Vec<String>,
}

impl Default for RegenOptions {
    fn default() -> Self {
        RegenOptions {
            samples: 200,
            seed: 0,
            starts: 64,
            grid: 10,
            random: 4,
            tolerances: Tolerances::default(),
            families: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCheck {
    pub slice: String,
    pub holds: bool,
    pub samples: usize,
    pub max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CplxOutcome {
    pub params: Params,
    pub tabulated: bool,
    pub expected: String,
    pub found: String,
    pub matches: bool,
    pub slices: Vec<SliceCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignOutcome {
    pub label: String,
    pub params: Params,
    pub slice: String,
    pub expected: Verdict,
    /// Common verdict of every sampled metric, if they agree.
    pub found: Option<Verdict>,
    pub counts: BTreeMap<String, usize>,
    pub min_value: f64,
    pub max_value: f64,
    pub samples: usize,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub family: String,
    pub listed: bool,
    pub cplx_text: String,
    pub sign_text: String,
    pub cplx: Vec<CplxOutcome>,
    pub sign: Vec<SignOutcome>,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_discrepancy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table3Report {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub rows: Vec<RowReport>,
    /// Disagreements with the fixture; a non-empty list is a failure.
    pub mismatches: Vec<String>,
    /// Disagreements on rows marked as known discrepancies.
    pub discrepancies: Vec<String>,
}

fn check_slice(
    eqs: &crate::invariant::ComplexStructureEquations,
    slice: MetricSlice,
    count: usize,
    rng: &mut SeededRng,
    tols: &Tolerances,
) -> Result<SliceCheck> {
    let mut out = SliceCheck {
        slice: slice.to_string(),
        holds: true,
        samples: 0,
        max_violation: 0.0,
        witness: None,
    };
    for _ in 0..count {
        let m = random_metric(rng, &slice);
        let omega = bismut_curvature(eqs, &m, CurvatureConvention::Swapped)?;
        let rep = omega.check_cplx_with(tols);
        out.samples += 1;
        out.max_violation = out.max_violation.max(rep.max_violation);
        if !rep.satisfied {
            out.holds = false;
            out.witness = rep.witness.map(|(w, v)| format_witness_value(&w, v));
            break;
        }
    }
    Ok(out)
}

fn cplx_outcome(
    fam: &FamilySpec,
    row: &TableRow,
    p: &Params,
    count: usize,
    seed: u64,
    stream: u64,
    tols: &Tolerances,
) -> Result<CplxOutcome> {
    let eqs = fam.instantiate(p)?;
    let slices = MetricSlice::all()
        .enumerate()
        .map(|(k, s)| check_slice(&eqs, s, count, &mut substream(seed, stream * 8 + k as u64), tols))
        .collect::<Result<Vec<_>>>()?;
    let holding: Vec<MetricSlice> = MetricSlice::all().zip(&slices).filter(|(_, c)| c.holds).map(|(s, _)| s).collect();
    let found = minimal(&holding);
    let expected = row.expected_slices(p)?;
    Ok(CplxOutcome {
        params: p.clone(),
        tabulated: fam.is_special(p),
        expected: slice_text(&expected),
        found: slice_text(&found),
        matches: found == expected,
        slices,
    })
}

fn sample_on(rng: &mut SeededRng, slice: &MetricSlice, r2: Option<f64>) -> MetricCoefficients {
    loop {
        let mut m = random_metric(rng, slice);
        if let Some(r) = r2 {
            m.r2 = r;
        }
        if m.validate().is_ok() {
            return m;
        }
    }
}

/// Classifies `count` metrics drawn for `entry`.
pub fn sign_outcome(
    fam: &FamilySpec,
    entry: &SignEntry,
    count: usize,
    seed: u64,
    stream: u64,
    opts: &ClassifyOptions,
) -> Result<SignOutcome> {
    let eqs = fam.instantiate(&entry.params)?;
    let slice = MetricSlice::parse(&entry.slice)?;
    let mut rng = substream(seed, stream);
    let mut out = SignOutcome {
        label: entry.label.clone(),
        params: entry.params.clone(),
        slice: slice.to_string(),
        expected: entry.verdict,
        found: None,
        counts: BTreeMap::new(),
        min_value: f64::INFINITY,
        max_value: f64::NEG_INFINITY,
        samples: 0,
        matches: false,
        error: None,
    };
    let mut verdicts = Vec::new();
    for k in 0..count {
        let m = sample_on(&mut rng, &slice, entry.r2);
        let omega = bismut_curvature(&eqs, &m, CurvatureConvention::Swapped)?;
        let g = m.frame_metric()?;
        match classify_unitary(&omega, g.hermitian(), &ClassifyOptions { seed: opts.seed.wrapping_add(k as u64), ..*opts }) {
            Ok(c) => {
                out.min_value = out.min_value.min(c.min_value);
                out.max_value = out.max_value.max(c.max_value);
                *out.counts.entry(c.verdict.label().to_string()).or_default() += 1;
                verdicts.push(c.verdict);
            }
            Err(e) => {
                out.error = Some(e.to_string());
                break;
            }
        }
        out.samples += 1;
    }
    if out.error.is_none() && verdicts.iter().all(|v| *v == verdicts[0]) {
        out.found = verdicts.first().copied();
    }
    out.matches = out.found == Some(entry.verdict);
    Ok(out)
}

fn check_row(
    row: &TableRow,
    row_index: usize,
    catalog: &Catalog,
    opts: &RegenOptions,
) -> Result<RowReport> {
    let fam = catalog.family(&row.family)?;
    let base = (row_index as u64 + 1) << 20;
    let mut prng = substream(opts.seed, base);
    let points = fam.parameter_points(&mut prng, opts.grid, opts.random);
    let light = (opts.samples / 10).max(8);
    let cplx = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let count = if fam.is_special(p) { opts.samples } else { light };
            cplx_outcome(fam, row, p, count, opts.seed, base + 1 + k as u64, &opts.tolerances)
        })
        .collect::<Result<Vec<_>>>()?;
    let copts = ClassifyOptions {
        starts: opts.starts,
        seed: opts.seed,
        tolerances: opts.tolerances,
        ..ClassifyOptions::default()
    };
    let per_entry = (opts.samples / 8).max(6);
    let sign = row
        .sign
        .par_iter()
        .enumerate()
        .map(|(k, e)| sign_outcome(fam, e, per_entry, opts.seed, base + 0x8000 + k as u64, &copts))
        .collect::<Result<Vec<_>>>()?;
    let matches = cplx.iter().all(|c| c.matches) && sign.iter().all(|s| s.matches);
    Ok(RowReport {
        family: fam.id.clone(),
        listed: row.listed,
        cplx_text: row.cplx_text(),
        sign_text: row.sign_text(),
        cplx,
        sign,
        matches,
        known_discrepancy: row.known_discrepancy.clone(),
    })
}

/// Rebuilds every row of `fixture` and records where the computation disagrees.
pub fn regenerate_with(fixture: &Table3Fixture, catalog: &Catalog, opts: &RegenOptions) -> Result<Table3Report> {
    if opts.samples < tol::MIN_SAMPLES {
        return Err(HermError::InvalidParameter(format!(
            "samples = {} is below the minimum of {}",
            opts.samples,
            tol::MIN_SAMPLES
        )));
    }
    let rows: Vec<(usize, &TableRow)> = fixture
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| opts.families.is_empty() || opts.families.iter().any(|f| f.eq_ignore_ascii_case(&r.family)))
        .collect();
    if rows.is_empty() {
        return Err(HermError::InvalidParameter(format!("no table rows for {:?}", opts.families)));
    }
    let reports = rows
        .par_iter()
        .map(|(k, r)| check_row(r, *k, catalog, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut mismatches = Vec::new();
    let mut discrepancies = Vec::new();
    for r in &reports {
        let sink = if r.known_discrepancy.is_some() { &mut discrepancies } else { &mut mismatches };
        for c in r.cplx.iter().filter(|c| !c.matches) {
            sink.push(format!(
                "{} [{}]: (Cplx) expected {}, found {}",
                r.family,
                format_params(&c.params),
                c.expected,
                c.found
            ));
        }
        for s in r.sign.iter().filter(|s| !s.matches) {
            let found = match (&s.found, &s.error) {
                (_, Some(e)) => e.clone(),
                (Some(v), None) => v.label().to_string(),
                (None, None) => format!("mixed {:?}", s.counts),
            };
            sink.push(format!(
                "{} {} [{}]: sign expected {}, found {found}",
                r.family,
                s.label,
                format_params(&s.params),
                s.expected
            ));
        }
    }
    Ok(Table3Report {
        seed: opts.seed,
        samples: opts.samples,
        tolerances: opts.tolerances,
        rows: reports,
        mismatches,
        discrepancies,
    })
}

pub fn regenerate_table3(opts: &RegenOptions) -> Result<Table3Report> {
    regenerate_with(Table3Fixture::builtin(), Catalog::builtin(), opts)
}

impl Table3Report {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn row(&self, family: &str) -> Option<&RowReport> {
        self.rows.iter().find(|r| r.family.eq_ignore_ascii_case(family))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "Bismut curvature classification, seed {}, {} samples per slice, zero_rel {:e}, sign_rel {:e}\n\n",
            self.seed, self.samples, self.tolerances.zero_rel, self.tolerances.sign_rel
        ));
        s.push_str("| Family | (Cplx) | Bismut bisectional curvature | Points | Regenerated |\n");
        s.push_str("|---|---|---|---|---|\n");
        let mut rows: Vec<&RowReport> = self.rows.iter().filter(|r| r.listed).collect();
        rows.extend(self.rows.iter().filter(|r| !r.listed));
        for r in rows {
            let status = if r.matches {
                "match".to_string()
            } else if r.known_discrepancy.is_some() {
                "known discrepancy".to_string()
            } else {
                "MISMATCH".to_string()
            };
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r.family,
                r.cplx_text,
                r.sign_text,
                r.cplx.len(),
                status
            ));
        }
        if !self.mismatches.is_empty() {
            s.push_str("\nMismatches:\n\n");
            for m in &self.mismatches {
                s.push_str(&format!("- {m}\n"));
            }
        }
        if !self.discrepancies.is_empty() {
            s.push_str("\nKnown discrepancies:\n\n");
            for m in &self.discrepancies {
                s.push_str(&format!("- {m}\n"));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_slices() {
        let p = |s: &str| MetricSlice::parse(s).unwrap();
        assert_eq!(minimal(&[p("u,v,z"), p("v,z")]), vec![p("v,z")]);
        assert_eq!(minimal(&MetricSlice::all().collect::<Vec<_>>()), vec![MetricSlice::GENERIC]);
        assert_eq!(minimal(&[p("u"), p("v"), p("u,v")]), vec![p("v"), p("u")]);
        assert!(minimal(&[]).is_empty());
    }

    #[test]
    fn fixture_expectations() {
        let t = Table3Fixture::builtin();
        let siv3 = t.row("Siv3").unwrap();
        let a = |s: &str| super::super::parse_params(s).unwrap();
        assert_eq!(slice_text(&siv3.expected_slices(&a("A=0")).unwrap()), "v=z=0");
        assert_eq!(slice_text(&siv3.expected_slices(&a("A=2")).unwrap()), "u=v=z=0");
        let ni = t.row("Ni").unwrap();
        assert_eq!(slice_text(&ni.expected_slices(&a("rho=1,lambda=0,D=0")).unwrap()), "never");
        assert_eq!(ni.cplx_text(), "rho=0");
        assert_eq!(t.row("Nii").unwrap().cplx_text(), "B=0, c=0, rho=1, v=0");
        assert_eq!(t.rows.iter().filter(|r| r.listed).count(), 7);
    }

    #[test]
    fn bad_fixtures() {
        let bad = r#"{"rows":[{"family":"Nx","listed":true,"cplx":[]}]}"#;
        assert!(Table3Fixture::from_json(bad).is_err());
        let bad = r#"{"rows":[{"family":"Np","listed":true,"cplx":[{"slice":"w"}]}]}"#;
        assert!(Table3Fixture::from_json(bad).is_err());
        let bad = r#"{"rows":[{"family":"Np","listed":true,"cplx":[],"sign":[{"label":"","params":{"rho":3},"verdict":"flat"}]}]}"#;
        assert!(Table3Fixture::from_json(bad).is_err());
    }

    #[test]
    fn too_few_samples() {
        let o = RegenOptions {
            samples: 5,
            ..RegenOptions::default()
        };
        assert!(matches!(regenerate_table3(&o), Err(HermError::InvalidParameter(_))));
    }

    #[test]
    fn small_rows_regenerate() {
        let o = RegenOptions {
            samples: 50,
            starts: 16,
            grid: 3,
            random: 1,
            families: vec!["Np".into(), "Siv1".into(), "Sv".into()],
            ..RegenOptions::default()
        };
        let r = regenerate_table3(&o).unwrap();
        assert!(r.ok(), "{:?}", r.mismatches);
        assert_eq!(r.rows.len(), 3);
        assert!(r.to_markdown().contains("| Np | always |"));
    }
}
