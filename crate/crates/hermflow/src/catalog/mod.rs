//! The nilpotent and solvable families of complex structures on six-dimensional
//! Lie algebras, as parametrized structure equations.

pub mod preservation;
pub mod table3;

use crate::invariant::ComplexStructureEquations;
use crate::notation::{format_complex, parse_complex};
use crate::sampling::SeededRng;
use crate::{HermError, Result, C64};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::sync::OnceLock;

pub use preservation::{flow_preservation_check, PreservationOptions, PreservationOutcome};
pub use table3::{regenerate_table3, RegenOptions, Table3Fixture, Table3Report};

const FAMILIES_JSON: &str = include_str!("../../data/families.json");

/// A parameter value; reals are stored with zero imaginary part.
/// JSON: a number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamValue(pub C64);

impl ParamValue {
    pub fn real(x: f64) -> Self {
        ParamValue(C64::new(x, 0.0))
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Real(f64),
    Pair([f64; 2]),
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for ParamValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match RawValue::deserialize(d)? {
            RawValue::Real(x) => ParamValue::real(x),
            RawValue::Pair([re, im]) => ParamValue(C64::new(re, im)),
        })
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// `rho=0,D=0.1+1i` -> params.
pub fn parse_params(text: &str) -> Result<Params> {
    let mut out = Params::new();
    for item in text.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HermError::InvalidParameter(format!("expected name=value, got {item:?}")))?;
        out.insert(k.trim().to_string(), ParamValue(parse_complex(v)?));
    }
    Ok(out)
}

pub fn format_params(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    Choice {
        values: Vec<f64>,
    },
    Real {
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
        #[serde(default)]
        min_exclusive: bool,
        #[serde(default)]
        max_exclusive: bool,
    },
    Complex {
        #[serde(default)]
        im_min: Option<f64>,
        #[serde(default)]
        abs_ne: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

const EXACT: f64 = 1e-12;
/// Sampling window for unbounded real ranges and complex parameters.
const SPAN: f64 = 2.0;

impl ParamSpec {
    fn check(&self, v: C64) -> Result<()> {
        let fail = |why: String| Err(HermError::InvalidParameter(format!("{} = {}: {why}", self.name, format_complex(v))));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return fail("not finite".into());
        }
        match &self.kind {
            ParamKind::Choice { values } => {
                if v.im != 0.0 || !values.iter().any(|c| (c - v.re).abs() <= EXACT) {
                    return fail(format!("must be one of {values:?}"));
                }
            }
            ParamKind::Real {
                min,
                max,
                min_exclusive,
                max_exclusive,
            } => {
                if v.im != 0.0 {
                    return fail("must be real".into());
                }
                if let Some(lo) = min {
                    if v.re < *lo || (*min_exclusive && v.re <= *lo) {
                        return fail(format!("below the range starting at {lo}"));
                    }
                }
                if let Some(hi) = max {
                    if v.re > *hi || (*max_exclusive && v.re >= *hi) {
                        return fail(format!("above the range ending at {hi}"));
                    }
                }
            }
            ParamKind::Complex { im_min, abs_ne } => {
                if let Some(lo) = im_min {
                    if v.im < *lo {
                        return fail(format!("imaginary part below {lo}"));
                    }
                }
                if let Some(r) = abs_ne {
                    if (v.norm() - r).abs() <= EXACT {
                        return fail(format!("modulus must differ from {r}"));
                    }
                }
            }
        }
        Ok(())
    }

    fn real_window(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ParamKind::Real { min, max, .. } => {
                let lo = min.unwrap_or(-SPAN);
                Some((lo, max.unwrap_or(lo + 1.5 * SPAN)))
            }
            _ => None,
        }
    }

    fn sample(&self, rng: &mut SeededRng) -> C64 {
        loop {
            let v = match &self.kind {
                ParamKind::Choice { values } => C64::new(values[rng.gen_range(0..values.len())], 0.0),
                ParamKind::Real { .. } => {
                    let (lo, hi) = self.real_window().expect("real");
                    C64::new(rng.gen_range(lo..hi), 0.0)
                }
                ParamKind::Complex { im_min, .. } => {
                    let im_lo = im_min.unwrap_or(-SPAN);
                    C64::new(rng.gen_range(-SPAN..SPAN), rng.gen_range(im_lo..SPAN))
                }
            };
            if self.check(v).is_ok() {
                return v;
            }
        }
    }

    /// `k` evenly spaced admissible values across the range (reals only).
    fn grid(&self, k: usize) -> Vec<C64> {
        let Some((lo, hi)) = self.real_window() else {
            return Vec::new();
        };
        (0..k)
            .map(|j| C64::new(lo + (hi - lo) * (j as f64 + 0.5) / k as f64, 0.0))
            .filter(|v| self.check(*v).is_ok())
            .collect()
    }
}

/// One summand `(re + i·im)·atom` of a coefficient. Atoms: a parameter name `p`,
/// `1/p`, or `cis(p) = cos p + i sin p`; none means 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefPart {
    Atom(f64, f64, String),
    Plain(f64, f64),
}

/// `(k, i, j, coefficient)`, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqTerm(pub usize, pub usize, pub usize, pub Vec<CoefPart>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub id: String,
    pub kind: String,
    /// Human-readable structure equations.
    pub equations: String,
    pub parameters: Vec<ParamSpec>,
    /// At least one of these must be nonzero.
    #[serde(default)]
    pub not_all_zero: Vec<String>,
    #[serde(rename = "C")]
    pub c: Vec<EqTerm>,
    #[serde(rename = "D")]
    pub d: Vec<EqTerm>,
    /// Parameter points always included in sweeps.
    #[serde(default)]
    pub special: Vec<Params>,
}

fn atom_value(atom: &str, p: &Params) -> Result<C64> {
    let get = |name: &str| {
        p.get(name)
            .map(|v| v.0)
            .ok_or_else(|| HermError::InvalidParameter(format!("missing parameter {name}")))
    };
    if let Some(name) = atom.strip_prefix("1/") {
        let v = get(name)?;
        if v.norm() == 0.0 {
            return Err(HermError::InvalidParameter(format!("{name} must be nonzero")));
        }
        Ok(v.inv())
    } else if let Some(name) = atom.strip_prefix("cis(").and_then(|r| r.strip_suffix(')')) {
        let v = get(name)?;
        Ok(C64::from_polar(1.0, v.re))
    } else {
        get(atom)
    }
}

fn coefficient(parts: &[CoefPart], p: &Params) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for part in parts {
        s += match part {
            CoefPart::Plain(re, im) => C64::new(*re, *im),
            CoefPart::Atom(re, im, a) => C64::new(*re, *im) * atom_value(a, p)?,
        };
    }
    Ok(s)
}

impl FamilySpec {
    pub fn parameter(&self, name: &str) -> Option<&ParamSpec> {
        self.parameters.iter().find(|s| s.name == name)
    }

    /// Checks names, ranges and joint constraints.
    pub fn validate_params(&self, p: &Params) -> Result<()> {
        for name in p.keys() {
            if self.parameter(name).is_none() {
                let known: Vec<&str> = self.parameters.iter().map(|s| s.name.as_str()).collect();
                return Err(HermError::InvalidParameter(format!(
                    "{} has no parameter {name} (parameters: {known:?})",
                    self.id
                )));
            }
        }
        for spec in &self.parameters {
            let v = p
                .get(&spec.name)
                .ok_or_else(|| HermError::InvalidParameter(format!("{} needs parameter {}", self.id, spec.name)))?;
            spec.check(v.0)?;
        }
        if !self.not_all_zero.is_empty() && self.not_all_zero.iter().all(|k| p.get(k).map_or(true, |v| v.0.norm() == 0.0)) {
            return Err(HermError::InvalidParameter(format!(
                "{}: {} must not all vanish",
                self.id,
                self.not_all_zero.join(", ")
            )));
        }
        Ok(())
    }

    pub fn instantiate(&self, p: &Params) -> Result<ComplexStructureEquations> {
        self.validate_params(p)?;
        let eval = |terms: &[EqTerm]| -> Result<Vec<(usize, usize, usize, C64)>> {
            terms.iter().map(|t| Ok((t.0, t.1, t.2, coefficient(&t.3, p)?))).collect()
        };
        let eqs = ComplexStructureEquations::from_terms(3, &eval(&self.c)?, &eval(&self.d)?)?;
        eqs.validate()?;
        Ok(eqs)
    }

    pub fn sample_params(&self, rng: &mut SeededRng) -> Params {
        loop {
            let p: Params = self
                .parameters
                .iter()
                .map(|s| (s.name.clone(), ParamValue(s.sample(rng))))
                .collect();
            if self.validate_params(&p).is_ok() {
                return p;
            }
        }
    }

    /// Special points, a `grid`-point sweep of every real parameter (others drawn at
    /// random), and `random` further draws. Duplicates removed.
    pub fn parameter_points(&self, rng: &mut SeededRng, grid: usize, random: usize) -> Vec<Params> {
        let mut out: Vec<Params> = self.special.clone();
        for spec in &self.parameters {
            for v in spec.grid(grid) {
                let mut p = self.sample_params(rng);
                p.insert(spec.name.clone(), ParamValue(v));
                if self.validate_params(&p).is_ok() {
                    out.push(p);
                }
            }
        }
        if !self.parameters.is_empty() {
            out.extend((0..random).map(|_| self.sample_params(rng)));
        }
        let mut uniq: Vec<Params> = Vec::new();
        for p in out {
            if !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        uniq
    }

    pub fn is_special(&self, p: &Params) -> bool {
        self.special.contains(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub families: Vec<FamilySpec>,
}

impl Catalog {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Catalog = serde_json::from_str(s).map_err(|e| HermError::Fixture(format!("families: {e}")))?;
        for f in &c.families {
            for p in &f.special {
                f.validate_params(p).map_err(|e| HermError::Fixture(format!("{}: special point: {e}", f.id)))?;
            }
        }
        Ok(c)
    }

    pub fn builtin() -> &'static Catalog {
        static CAT: OnceLock<Catalog> = OnceLock::new();
        CAT.get_or_init(|| Catalog::from_json(FAMILIES_JSON).expect("bundled families.json is valid"))
    }

    /// Case-insensitive lookup.
    pub fn family(&self, id: &str) -> Result<&FamilySpec> {
        self.families
            .iter()
            .find(|f| f.id.eq_ignore_ascii_case(id))
            .ok_or_else(|| HermError::UnknownName(format!("family {id}")))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.families.iter().map(|f| f.id.as_str()).collect()
    }
}

/// Shorthand for the bundled catalog.
pub fn family(id: &str) -> Result<&'static FamilySpec> {
    Catalog::builtin().family(id)
}

/// Instantiates a bundled family from `name=value` text.
pub fn instantiate(id: &str, params: &str) -> Result<ComplexStructureEquations> {
    family(id)?.instantiate(&parse_params(params)?)
}
