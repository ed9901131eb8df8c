//! Browser demo: Hopf curvature, (Cplx) checks and Hopf flows. Every function returns
//! a JSON string; failures come back as `{"error": ...}`.

use hermflow::catalog::instantiate;
use hermflow::flow::{integrate, named_flow, preserves_nonnegativity, scalars};
use hermflow::hopf::{bismut_curvature_at, HopfMetric};
use hermflow::invariant::{bismut_curvature, format_witness_value, CurvatureConvention, MetricCoefficients};
use hermflow::notation::{format_complex, parse_vector};
use hermflow::tol::Tolerances;
use hermflow::Result;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn wrap(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Nonzero components `Ω_{i j̄ k l̄}` of `g(α,β)` at `point`.
#[wasm_bindgen]
pub fn hopf_curvature(n: usize, alpha: f64, beta: f64, point: &str) -> String {
    wrap((|| {
        let h = HopfMetric::new(n, alpha, beta)?;
        let z = parse_vector(point, n)?;
        let om = bismut_curvature_at(&h, &z)?;
        let thr = Tolerances::default().zero_threshold(om.max_abs());
        let comps: Vec<Value> = om
            .indices()
            .filter(|ix| om.get(ix).norm() > thr)
            .map(|ix| {
                json!({
                    "index": format!("{}{}̄{}{}̄", ix[0] + 1, ix[1] + 1, ix[2] + 1, ix[3] + 1),
                    "value": format_complex(om.get(&ix)),
                })
            })
            .collect();
        Ok(json!({ "gamma": h.gamma(), "components": comps }))
    })())
}

/// (Cplx) for a bundled family at one metric (`r2=1,u=0.1+0.2i`, others unit).
#[wasm_bindgen]
pub fn cplx_check(family: &str, params: &str, metric: &str) -> String {
    wrap((|| {
        let eqs = instantiate(family, params)?;
        let m = MetricCoefficients::parse(metric)?;
        let rep = bismut_curvature(&eqs, &m, CurvatureConvention::Swapped)?.check_cplx_with(&Tolerances::default());
        Ok(json!({
            "holds": rep.satisfied,
            "max_violation": rep.max_violation,
            "witness": rep.witness.filter(|_| !rep.satisfied).map(|(w, v)| format_witness_value(&w, v)),
        }))
    })())
}

/// Trajectory `(t, α, β, γ)` of a named flow, thinned to about 200 samples.
#[wasm_bindgen]
pub fn hopf_flow(name: &str, n: usize, alpha0: f64, beta0: f64, t_end: f64) -> String {
    wrap((|| {
        let fc = named_flow(name)?;
        let tr = integrate(alpha0, beta0, &fc, n, t_end, 1e-3)?;
        let every = (tr.samples.len() / 200).max(1);
        let pts: Vec<[f64; 4]> = tr
            .samples
            .iter()
            .enumerate()
            .filter(|(k, _)| k % every == 0 || *k + 1 == tr.samples.len())
            .map(|(_, s)| [s.t, s.alpha, s.beta, s.gamma])
            .collect();
        Ok(json!({
            "scalars": scalars(&fc, n),
            "preserved": preserves_nonnegativity(&fc, n).preserved,
            "termination": tr.termination.to_string(),
            "samples": pts,
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_flat() {
        let v: Value = serde_json::from_str(&hopf_curvature(2, 1.0, 0.0, "1,0")).unwrap();
        assert_eq!(v["components"].as_array().unwrap().len(), 0);
        let v: Value = serde_json::from_str(&hopf_curvature(2, 1.0, -3.0, "1,0")).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn cplx_examples() {
        let v: Value = serde_json::from_str(&cplx_check("Siii1", "sign=1", "unit")).unwrap();
        assert_eq!(v["holds"], true);
        let v: Value = serde_json::from_str(&cplx_check("Sii", "x=1", "unit")).unwrap();
        assert_eq!(v["holds"], false);
    }

    #[test]
    fn flow_thinned() {
        let v: Value = serde_json::from_str(&hopf_flow("pluriclosed", 2, 1.0, 0.0, 1.0)).unwrap();
        let n = v["samples"].as_array().unwrap().len();
        assert!((150..=260).contains(&n), "{n}");
        assert_eq!(v["preserved"], true);
    }
}
