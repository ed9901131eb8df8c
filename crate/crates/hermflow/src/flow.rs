//! The `(α, β, γ)` reduction of Hermitian curvature flows on `g(α,β)`.
//!
//! ```text
//! α̇ = γ + 1 − n + (γ+1)(a + 2b + (n−1)d)
//! β̇ = γ(1 − 2n − γ(n−1)) + (γ+1)²(n−1)(a + (n−1)c) − (γ+1)(a + 2b + (n−1)d)
//! γ̇ = (γ+1)[(F−n)γ + F] / α,   α̇ = (γ+1)L − n
//! F = (n−2)a − 2b + (n−1)²c − (n−1)d,   L = 1 + a + 2b + (n−1)d
//! ```

use crate::positivity::gamma_threshold;
use crate::{HermError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl FlowCoefficients {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        FlowCoefficients { a, b, c, d, name: None }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("({}, {}, {}, {})", self.a, self.b, self.c, self.d))
    }
}

pub const NAMED_FLOWS: [&str; 3] = ["gradient", "pluriclosed", "ustinovskiy"];

/// Presets. Ustinovskiy's flow is the tuple whose `F` equals 1 in every dimension:
/// only the `b` term of `F` is independent of `n`, so `−2b = 1` and `a = c = d = 0`.
pub fn named_flow(name: &str) -> Result<FlowCoefficients> {
    match name {
        "gradient" => Ok(FlowCoefficients::new(0.5, -0.25, -0.5, 1.0).named("gradient")),
        "pluriclosed" => Ok(FlowCoefficients::new(1.0, 0.0, 0.0, 0.0).named("pluriclosed")),
        "ustinovskiy" => Ok(FlowCoefficients::new(0.0, -0.5, 0.0, 0.0).named("ustinovskiy")),
        other => Err(HermError::UnknownName(format!("flow '{other}' (known: {})", NAMED_FLOWS.join(", ")))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowScalars {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub static_ratio: Option<f64>,
}

pub fn scalars(fc: &FlowCoefficients, n: usize) -> FlowScalars {
    let nf = n as f64;
    let f = (nf - 2.0) * fc.a - 2.0 * fc.b + (nf - 1.0).powi(2) * fc.c - (nf - 1.0) * fc.d;
    let l = 1.0 + fc.a + 2.0 * fc.b + (nf - 1.0) * fc.d;
    FlowScalars {
        f,
        l,
        static_ratio: (f < nf).then(|| f / (nf - f)),
    }
}

fn check_state(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0) || !(beta > -alpha) || !beta.is_finite() || !alpha.is_finite() {
        return Err(HermError::InadmissibleState(format!("α = {alpha}, β = {beta}")));
    }
    Ok(())
}

/// `(α̇, β̇)` exactly as printed in the ODE system.
pub fn ode_rhs(alpha: f64, beta: f64, fc: &FlowCoefficients, n: usize) -> Result<(f64, f64)> {
    check_state(alpha, beta)?;
    Ok(rhs_unchecked(beta / alpha, fc, n))
}

fn rhs_unchecked(gamma: f64, fc: &FlowCoefficients, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let m = fc.a + 2.0 * fc.b + (nf - 1.0) * fc.d;
    let alpha_dot = gamma + 1.0 - nf + (gamma + 1.0) * m;
    let beta_dot = gamma * (1.0 - 2.0 * nf - gamma * (nf - 1.0))
        + (gamma + 1.0).powi(2) * (nf - 1.0) * (fc.a + (nf - 1.0) * fc.c)
        - (gamma + 1.0) * m;
    (alpha_dot, beta_dot)
}

/// `γ̇ = (γ+1)[(F−n)γ + F]/α`.
pub fn gamma_dot(alpha: f64, gamma: f64, fc: &FlowCoefficients, n: usize) -> f64 {
    let s = scalars(fc, n);
    (gamma + 1.0) * ((s.f - n as f64) * gamma + s.f) / alpha
}

/// `γ̇` by the quotient rule from [`ode_rhs`].
pub fn gamma_dot_from_rhs(alpha: f64, beta: f64, fc: &FlowCoefficients, n: usize) -> Result<f64> {
    let (ad, bd) = ode_rhs(alpha, beta, fc, n)?;
    Ok((bd * alpha - beta * ad) / (alpha * alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    LeftAdmissibleCone,
    Converged,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::ReachedTEnd => "reached_t_end",
            Termination::LeftAdmissibleCone => "left_admissible_cone",
            Termination::Converged => "converged",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub n: usize,
    pub coefficients: FlowCoefficients,
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
    /// Start of the first run of `convergence_steps` steps within `convergence_tol` of the static ratio.
    pub converged_at: Option<f64>,
    pub exit_reason: Option<String>,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has its initial point")
    }

    pub fn gammas(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Shrink the step near `α → 0`, where the `γ` equation stiffens like `1/α`.
    pub stiffness_control: bool,
    pub stop_on_convergence: bool,
    pub convergence_tol: f64,
    pub convergence_steps: usize,
    /// Keep every k-th step (the last step is always kept).
    pub record_every: usize,
    /// Treat `α` below `alpha_floor · α0` as having reached zero.
    pub alpha_floor: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            stiffness_control: true,
            stop_on_convergence: false,
            convergence_tol: 1e-6,
            convergence_steps: 100,
            record_every: 1,
            alpha_floor: 1e-12,
        }
    }
}

fn rk4_step(alpha: f64, beta: f64, fc: &FlowCoefficients, n: usize, h: f64) -> (f64, f64) {
    let f = |a: f64, b: f64| rhs_unchecked(b / a, fc, n);
    let k1 = f(alpha, beta);
    let k2 = f(alpha + h / 2.0 * k1.0, beta + h / 2.0 * k1.1);
    let k3 = f(alpha + h / 2.0 * k2.0, beta + h / 2.0 * k2.1);
    let k4 = f(alpha + h * k3.0, beta + h * k3.1);
    (
        alpha + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        beta + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

pub fn integrate(alpha0: f64, beta0: f64, fc: &FlowCoefficients, n: usize, t_end: f64, dt: f64) -> Result<FlowTrajectory> {
    integrate_with(alpha0, beta0, fc, n, t_end, dt, &IntegrateOptions::default())
}

/// RK4 on `(α, β)`. Leaving the cone (`α → 0` or `γ → −1`) ends the run without an error.
pub fn integrate_with(
    alpha0: f64,
    beta0: f64,
    fc: &FlowCoefficients,
    n: usize,
    t_end: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<FlowTrajectory> {
    check_state(alpha0, beta0)?;
    if n < 2 {
        return Err(HermError::InvalidParameter(format!("n = {n} < 2")));
    }
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(HermError::InvalidParameter(format!("t_end = {t_end}, dt = {dt}")));
    }
    let sc = scalars(fc, n);
    let nf = n as f64;
    let mut traj = FlowTrajectory {
        n,
        coefficients: fc.clone(),
        samples: vec![FlowSample {
            t: 0.0,
            alpha: alpha0,
            beta: beta0,
            gamma: beta0 / alpha0,
        }],
        termination: Termination::ReachedTEnd,
        converged_at: None,
        exit_reason: None,
    };
    let (mut t, mut a, mut b) = (0.0, alpha0, beta0);
    let mut run = 0usize;
    let mut run_start = 0.0;
    let mut step = 0usize;
    let floor = opts.alpha_floor * alpha0;
    while t < t_end * (1.0 - 1e-15) {
        let mut h = dt.min(t_end - t);
        if opts.stiffness_control {
            let g = b / a;
            let stiff = (sc.f - nf).abs() * (g.abs() + 1.0) + sc.f.abs() + 1.0;
            h = h.min(0.1 * a / stiff);
        }
        let (na, nb) = rk4_step(a, b, fc, n, h);
        step += 1;
        let exit = if !(na > floor) {
            Some(format!("α reached {na:.3e} at t = {:.6}", t + h))
        } else if !(nb > -na) {
            Some(format!("γ reached {:.6} at t = {:.6}", nb / na, t + h))
        } else if h < 1e-14 * t_end.max(1.0) {
            Some(format!("step underflow at t = {t:.6}, α = {a:.3e}"))
        } else {
            None
        };
        if let Some(reason) = exit {
            traj.termination = Termination::LeftAdmissibleCone;
            traj.exit_reason = Some(reason);
            break;
        }
        t += h;
        a = na;
        b = nb;
        let gamma = b / a;
        let sample = FlowSample { t, alpha: a, beta: b, gamma };
        if let Some(s) = sc.static_ratio {
            if (gamma - s).abs() < opts.convergence_tol {
                if run == 0 {
                    run_start = t;
                }
                run += 1;
                if run >= opts.convergence_steps && traj.converged_at.is_none() {
                    traj.converged_at = Some(run_start);
                    if opts.stop_on_convergence {
                        traj.samples.push(sample);
                        traj.termination = Termination::Converged;
                        return Ok(traj);
                    }
                }
            } else {
                run = 0;
            }
        }
        if step % opts.record_every.max(1) == 0 {
            traj.samples.push(sample);
        }
    }
    let last = FlowSample {
        t,
        alpha: a,
        beta: b,
        gamma: b / a,
    };
    if traj.last().t != t {
        traj.samples.push(last);
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preservation {
    pub preserved: bool,
    /// `bound − F`; non-negative exactly when preserved.
    pub margin: f64,
    pub bound: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

/// Non-negativity of `g(α, γα)` is preserved iff `F ≤ n γ_n/(γ_n + 1)`.
pub fn preserves_nonnegativity(fc: &FlowCoefficients, n: usize) -> Preservation {
    let gn = gamma_threshold(n);
    let bound = n as f64 * gn / (gn + 1.0);
    let f = scalars(fc, n).f;
    Preservation {
        preserved: f <= bound,
        margin: bound - f,
        bound,
        f,
    }
}

/// Checks `|γ(t) − s| ≤ |C| (A t + α0)^{(F−n)/A}` along a trajectory, where `A`
/// bounds `α̇` from above and `C` is fixed by the initial value. Returns the worst
/// ratio of actual deviation to the envelope (≤ 1 means the bound holds).
pub fn decay_envelope_ratio(traj: &FlowTrajectory) -> Option<f64> {
    let n = traj.n;
    let sc = scalars(&traj.coefficients, n);
    let s = sc.static_ratio?;
    let first = traj.samples.first()?;
    let slope = traj
        .samples
        .iter()
        .map(|p| rhs_unchecked(p.gamma, &traj.coefficients, n).0)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(slope > 0.0) {
        return None;
    }
    let expo = (sc.f - n as f64) / slope;
    let c0 = (first.gamma - s).abs() / first.alpha.powf(expo);
    let mut worst: f64 = 0.0;
    for p in &traj.samples {
        let env = c0 * (slope * p.t + first.alpha).powf(expo);
        let dev = (p.gamma - s).abs();
        if env > 0.0 {
            worst = worst.max(dev / env);
        } else if dev > 0.0 {
            return Some(f64::INFINITY);
        }
    }
    Some(worst)
}
