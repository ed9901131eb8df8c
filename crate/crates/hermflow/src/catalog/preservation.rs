//! Does the invariant HCF keep a family inside its (Cplx) slice and keep the sign of
//! the Bismut bisectional curvature?

use super::table3::{Table3Fixture, TableRow};
use super::{format_params, Catalog, Params};
use crate::flow::{named_flow, FlowCoefficients, Termination, NAMED_FLOWS};
use crate::invariant::{bismut_curvature, integrate_invariant, CurvatureConvention, InvariantFlowOptions, MetricCoefficients, MetricSlice};
use crate::positivity::{classify_unitary, ClassifyOptions, Verdict};
use crate::sampling::{random_metric, substream};
use crate::tol::{self, Tolerances};
use crate::{HermError, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationOptions {
    pub seed: u64,
    /// Random `(a, b, c, d)` in `[−1, 1]⁴`, in addition to the named flows.
    pub random_flows: usize,
    pub t_end: f64,
    pub dt: f64,
    pub starts: usize,
    pub tolerances: Tolerances,
    /// Restrict to these families (all listed rows if empty).
    #[serde(default)]
    pub families: Vec<String>,
}

impl Default for PreservationOptions {
    fn default() -> Self {
        PreservationOptions {
            seed: 0,
            random_flows: 5,
            t_end: 0.5,
            dt: 1e-3,
            starts: 32,
            tolerances: Tolerances::default(),
            families: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationOutcome {
    pub family: String,
    pub label: String,
    pub params: Params,
    pub flow: FlowCoefficients,
    pub initial: MetricCoefficients,
    pub last: MetricCoefficients,
    pub t_reached: f64,
    pub termination: Termination,
    /// The (Cplx) slice the start lies on.
    pub slice: String,
    /// Largest `|u|, |v|, |z|` among the coordinates the slice forces to zero.
    pub slice_drift: f64,
    pub slice_ok: bool,
    pub verdict_start: Verdict,
    pub verdict_end: Option<Verdict>,
    pub sign_ok: bool,
    /// Largest `|Ω^B|` along the trajectory, for flat starts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_max: Option<f64>,
    pub flat_ok: bool,
}

impl PreservationOutcome {
    pub fn ok(&self) -> bool {
        self.slice_ok && self.sign_ok && self.flat_ok
    }

    pub fn describe(&self) -> String {
        format!(
            "{} {} [{}] under {}: drift {:.2e} on {}, sign {} -> {}{}",
            self.family,
            self.label,
            format_params(&self.params),
            self.flow.label(),
            self.slice_drift,
            self.slice,
            self.verdict_start,
            self.verdict_end.map_or("?".to_string(), |v| v.to_string()),
            self.flat_max.map_or(String::new(), |f| format!(", max |Ω| {f:.2e}"))
        )
    }
}

fn drift(slice: &MetricSlice, m: &MetricCoefficients) -> f64 {
    let mut d: f64 = 0.0;
    if slice.u {
        d = d.max(m.u.norm());
    }
    if slice.v {
        d = d.max(m.v.norm());
    }
    if slice.z {
        d = d.max(m.z.norm());
    }
    d
}

/// Named flows followed by `random` seeded draws.
pub fn test_flows(seed: u64, random: usize) -> Vec<FlowCoefficients> {
    let mut out: Vec<FlowCoefficients> = NAMED_FLOWS.iter().map(|n| named_flow(n).expect("named flow")).collect();
    let mut rng = substream(seed, 0xf10);
    for _ in 0..random {
        let mut x = || rng.gen_range(-1.0..=1.0);
        out.push(FlowCoefficients::new(x(), x(), x(), x()));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn run_case(
    catalog: &Catalog,
    row: &TableRow,
    entry_index: usize,
    fc: &FlowCoefficients,
    m0: MetricCoefficients,
    opts: &PreservationOptions,
    copts: &ClassifyOptions,
) -> Result<PreservationOutcome> {
    let entry = &row.sign[entry_index];
    let fam = catalog.family(&row.family)?;
    let eqs = fam.instantiate(&entry.params)?;
    let entry_slice = MetricSlice::parse(&entry.slice)?;
    // the (Cplx) slice containing the start
    let slice = row
        .expected_slices(&entry.params)?
        .into_iter()
        .find(|s| entry_slice.contains(s))
        .ok_or_else(|| HermError::Fixture(format!("{} {}: start is off every (Cplx) slice", row.family, entry.label)))?;
    let classify = |m: &MetricCoefficients| -> Result<Verdict> {
        let omega = bismut_curvature(&eqs, m, CurvatureConvention::Swapped)?;
        Ok(classify_unitary(&omega, m.frame_metric()?.hermitian(), copts)?.verdict)
    };
    let verdict_start = classify(&m0)?;
    let traj = integrate_invariant(
        &eqs,
        &m0,
        fc,
        opts.t_end,
        &InvariantFlowOptions {
            dt: opts.dt,
            ..InvariantFlowOptions::default()
        },
    )?;
    let slice_drift = traj.metrics.iter().map(|m| drift(&slice, m)).fold(0.0, f64::max);
    let last = *traj.last();
    let slice_ok = slice_drift <= tol::SLICE_PERSIST;
    let verdict_end = if slice_ok { classify(&last).ok() } else { None };
    let flat_max = if verdict_start == Verdict::Flat {
        let mut worst: f64 = 0.0;
        for m in &traj.metrics {
            worst = worst.max(bismut_curvature(&eqs, m, CurvatureConvention::Swapped)?.max_abs());
        }
        Some(worst)
    } else {
        None
    };
    Ok(PreservationOutcome {
        family: fam.id.clone(),
        label: entry.label.clone(),
        params: entry.params.clone(),
        flow: fc.clone(),
        initial: m0,
        last,
        t_reached: *traj.times.last().expect("non-empty"),
        termination: traj.termination,
        slice: slice.to_string(),
        slice_drift,
        slice_ok,
        verdict_start,
        verdict_end,
        sign_ok: verdict_end == Some(verdict_start),
        flat_max,
        flat_ok: flat_max.map_or(true, |f| f <= tol::FLAT_PERSIST),
    })
}

/// Every sign entry of the listed rows, under every test flow, from one random start.
pub fn flow_preservation_check_with(
    fixture: &Table3Fixture,
    catalog: &Catalog,
    opts: &PreservationOptions,
) -> Result<Vec<PreservationOutcome>> {
    let flows = test_flows(opts.seed, opts.random_flows);
    let copts = ClassifyOptions {
        starts: opts.starts,
        seed: opts.seed,
        tolerances: opts.tolerances,
        ..ClassifyOptions::default()
    };
    let mut jobs = Vec::new();
    for (ri, row) in fixture.rows.iter().enumerate().filter(|(_, r)| r.listed) {
        if !opts.families.is_empty() && !opts.families.iter().any(|f| f.eq_ignore_ascii_case(&row.family)) {
            continue;
        }
        for (ei, entry) in row.sign.iter().enumerate() {
            let mut rng = substream(opts.seed, 0x9000 + (ri as u64) * 64 + ei as u64);
            let slice = MetricSlice::parse(&entry.slice)?;
            let m0 = loop {
                let mut m = random_metric(&mut rng, &slice);
                if let Some(r2) = entry.r2 {
                    m.r2 = r2;
                }
                if m.validate().is_ok() {
                    break m;
                }
            };
            for fc in &flows {
                jobs.push((row, ei, fc.clone(), m0));
            }
        }
    }
    jobs.par_iter()
        .map(|(row, ei, fc, m0)| run_case(catalog, row, *ei, fc, *m0, opts, &copts))
        .collect()
}

pub fn flow_preservation_check(opts: &PreservationOptions) -> Result<Vec<PreservationOutcome>> {
    flow_preservation_check_with(Table3Fixture::builtin(), Catalog::builtin(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flows_listed() {
        let f = test_flows(1, 5);
        assert_eq!(f.len(), 8);
        assert_eq!(f[0].label(), "gradient");
        assert_eq!(test_flows(1, 5), f);
    }

    #[test]
    fn si_flat_persists_short() {
        let o = PreservationOptions {
            random_flows: 1,
            t_end: 0.05,
            starts: 8,
            families: vec!["Si".into()],
            ..PreservationOptions::default()
        };
        let out = flow_preservation_check(&o).unwrap();
        assert_eq!(out.len(), 4 * 4);
        for c in &out {
            assert!(c.ok(), "{}", c.describe());
        }
        assert!(out.iter().any(|c| c.flat_max.is_some()));
    }
}
