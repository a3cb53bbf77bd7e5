//! Fisher information and Shannon mutual information of circuit outcome
//! distributions, plus the closed forms for the nested-MZI scenarios.

use crate::circuit::{Circuit, CircuitError, Element, PolarizedState, Polarization, RotatorAngle};
use crate::math::{gauss_legendre_on, Kahan};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

/// Probability below which a Fisher contribution switches to its analytic
/// `4 |db|^2` limit (outcomes whose amplitude is first order in theta).
const VANISHING_PROB: f64 = 1e-30;

/// Post-selection survival below this is treated as degenerate.
const MIN_SURVIVAL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("Fisher information undefined at theta = {0} (derivative of sqrt(1 - theta^2) diverges)")]
    ThetaAtBoundary(f64),
    #[error("post-selection is degenerate: survival probability {0:.3e}")]
    DegeneratePostSelection(f64),
    #[error("unsupported configuration for the closed form: {0}")]
    UnsupportedConfiguration(String),
    #[error("prior density does not integrate to 1 (got {0})")]
    PriorNotNormalized(f64),
    #[error("outcome index {index} out of range for {n_outcomes} outcomes")]
    OutcomeOutOfRange { index: usize, n_outcomes: usize },
}

/// Detection probabilities over `(path, polarization)` outcomes.
///
/// Outcome index `i` maps to path `i % n_paths`, polarization H for
/// `i < n_paths` and V otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeDistribution {
    pub n_paths: usize,
    pub probabilities: Vec<f64>,
    pub absorbed: f64,
    pub postselected: bool,
    /// Survival probability used for renormalization (1.0 when not post-selected).
    pub survival: f64,
}

impl OutcomeDistribution {
    pub fn probability(&self, path: usize, pol: Polarization) -> f64 {
        match pol {
            Polarization::H => self.probabilities[path],
            Polarization::V => self.probabilities[path + self.n_paths],
        }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// How an [`InfoResult`] value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMethod {
    ClosedForm,
    DerivativePropagation,
    FiniteDifference,
    Quadrature,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoResult {
    pub value: f64,
    pub method: InfoMethod,
    /// Per-outcome contributions in outcome-index order.
    pub per_outcome: Vec<f64>,
    /// Negative-measurement (restricted) or absorbed-lump (full) contribution.
    pub remainder_term: f64,
    /// Quadrature metadata; zero/false outside quadrature results.
    pub quadrature_nodes: usize,
    pub quadrature_delta: f64,
    pub quadrature_warning: bool,
}

impl InfoResult {
    fn simple(value: f64, method: InfoMethod) -> Self {
        Self {
            value,
            method,
            per_outcome: Vec::new(),
            remainder_term: 0.0,
            quadrature_nodes: 0,
            quadrature_delta: 0.0,
            quadrature_warning: false,
        }
    }
}

/// Outcome set the Fisher information is computed over.
#[derive(Debug, Clone)]
pub enum OutcomeSet {
    /// Every detector outcome; on lossy circuits the absorbed probability
    /// enters as one aggregate outcome so the total never undercounts a
    /// restricted set.
    All,
    /// A subset of outcome indices; the negative-measurement term
    /// `(dP_A/dtheta)^2 / (1 - P_A)` is added.
    Restricted(Vec<usize>),
}

/// Integration variable of the Shannon prior.
///
/// `Theta` is the rotator's off-diagonal entry on [-1, 1]. `DiagonalSigned`
/// is the rotator's diagonal entry on [-1, 1], covering rotations up to a
/// half turn; this is the variable in which the inner-arm closed form lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorVariable {
    Theta,
    DiagonalSigned,
}

/// Prior over the tagging parameter.
#[derive(Clone)]
pub struct PriorSpec {
    pub lo: f64,
    pub hi: f64,
    pub variable: PriorVariable,
    /// Density over the integration variable; `None` means uniform.
    pub density: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for PriorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PriorSpec")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("variable", &self.variable)
            .field("density", &self.density.as_ref().map(|_| "custom"))
            .finish()
    }
}

impl PriorSpec {
    /// Uniform prior 1/2 on theta in [-1, 1].
    pub fn uniform_theta() -> Self {
        Self { lo: -1.0, hi: 1.0, variable: PriorVariable::Theta, density: None }
    }

    /// Uniform prior 1/2 on the signed diagonal parameter in [-1, 1].
    pub fn uniform_diagonal() -> Self {
        Self { lo: -1.0, hi: 1.0, variable: PriorVariable::DiagonalSigned, density: None }
    }

    fn density_at(&self, x: f64) -> f64 {
        match &self.density {
            Some(f) => f(x),
            None => 1.0 / (self.hi - self.lo),
        }
    }
}

/// Outcome probabilities at `theta`, optionally post-selected on a subset
/// (absorbed events are excluded by construction; survivors renormalized).
pub fn outcome_probs(
    circuit: &Circuit,
    input: &PolarizedState,
    theta: f64,
    postselect: Option<&[usize]>,
) -> Result<OutcomeDistribution, InfoError> {
    let out = circuit.evolve(input, theta)?;
    let n = circuit.n_paths();
    let raw: Vec<f64> = out.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    match postselect {
        None => Ok(OutcomeDistribution {
            n_paths: n,
            probabilities: raw,
            absorbed: out.absorbed(),
            postselected: false,
            survival: 1.0,
        }),
        Some(keep) => {
            for &i in keep {
                if i >= 2 * n {
                    return Err(InfoError::OutcomeOutOfRange { index: i, n_outcomes: 2 * n });
                }
            }
            let survival: f64 = keep.iter().map(|&i| raw[i]).sum();
            if survival < MIN_SURVIVAL {
                return Err(InfoError::DegeneratePostSelection(survival));
            }
            let mut probs = vec![0.0; 2 * n];
            for &i in keep {
                probs[i] = raw[i] / survival;
            }
            Ok(OutcomeDistribution {
                n_paths: n,
                probabilities: probs,
                absorbed: out.absorbed(),
                postselected: true,
                survival,
            })
        }
    }
}

/// Classical Fisher information of the tagging parameter from exact
/// derivative propagation.
///
/// Restricted sets add the negative-measurement term; the full set adds a
/// single aggregate term for absorbed probability on lossy circuits (zero on
/// unitary circuits). Outcomes with probability below the vanishing guard
/// contribute the analytic limit `4 |db_i|^2`.
pub fn fisher(
    circuit: &Circuit,
    input: &PolarizedState,
    theta: f64,
    outcomes: &OutcomeSet,
) -> Result<InfoResult, InfoError> {
    if theta.abs() >= 1.0 {
        return Err(InfoError::ThetaAtBoundary(theta));
    }
    let (state, deriv) = circuit.evolve_with_derivative(input, theta)?;
    let b = state.amplitudes();
    let probs: Vec<f64> = b.iter().map(|a| a.norm_sqr()).collect();
    let dprobs: Vec<f64> = b
        .iter()
        .zip(&deriv)
        .map(|(bi, dbi)| 2.0 * (bi.conj() * dbi).re)
        .collect();
    let contribution = |i: usize| -> f64 {
        if probs[i] < VANISHING_PROB {
            4.0 * deriv[i].norm_sqr()
        } else {
            dprobs[i] * dprobs[i] / probs[i]
        }
    };
    let dim = probs.len();
    let mut per_outcome = vec![0.0; dim];
    let mut sum = Kahan::default();
    let mut remainder = 0.0;
    match outcomes {
        OutcomeSet::All => {
            for i in 0..dim {
                per_outcome[i] = contribution(i);
                sum.add(per_outcome[i]);
            }
            let absorbed = state.absorbed();
            if absorbed > VANISHING_PROB {
                let d_abs: f64 = -dprobs.iter().sum::<f64>();
                remainder = d_abs * d_abs / absorbed;
                sum.add(remainder);
            }
        }
        OutcomeSet::Restricted(set) => {
            let mut p_a = 0.0;
            let mut dp_a = 0.0;
            for &i in set {
                if i >= dim {
                    return Err(InfoError::OutcomeOutOfRange { index: i, n_outcomes: dim });
                }
                per_outcome[i] = contribution(i);
                sum.add(per_outcome[i]);
                p_a += probs[i];
                dp_a += dprobs[i];
            }
            if 1.0 - p_a > VANISHING_PROB {
                remainder = dp_a * dp_a / (1.0 - p_a);
                sum.add(remainder);
            }
        }
    }
    Ok(InfoResult {
        value: sum.sum(),
        method: InfoMethod::DerivativePropagation,
        per_outcome,
        remainder_term: remainder,
        quadrature_nodes: 0,
        quadrature_delta: 0.0,
        quadrature_warning: false,
    })
}

/// Closed-form Fisher information for a circuit whose only polarization
/// element is a single bound rotator, everything else being real
/// polarization-neutral optics: `F = 4 |c_k|^2 / (1 - theta^2)`.
pub fn fisher_closed_single_rotator(
    circuit: &Circuit,
    slot: usize,
    theta: f64,
    input: &PolarizedState,
) -> Result<InfoResult, InfoError> {
    if theta.abs() >= 1.0 {
        return Err(InfoError::ThetaAtBoundary(theta));
    }
    if circuit.rotator_slots() != [slot] {
        return Err(InfoError::UnsupportedConfiguration(format!(
            "expected exactly one bound rotator at slot {slot}, got slots {:?}",
            circuit.rotator_slots()
        )));
    }
    for (idx, e) in circuit.elements().iter().enumerate() {
        match e {
            Element::Rotator(_) if idx != slot => {
                return Err(InfoError::UnsupportedConfiguration(
                    "additional rotator present".into(),
                ))
            }
            Element::Absorber(_) => {
                return Err(InfoError::UnsupportedConfiguration("absorber present".into()))
            }
            _ => {}
        }
    }
    check_common_phase(input)?;
    let c_k = circuit.presence_amplitude(slot, input, theta)?;
    let value = 4.0 * c_k.norm_sqr() / (1.0 - theta * theta);
    Ok(InfoResult::simple(value, InfoMethod::ClosedForm))
}

fn check_common_phase(input: &PolarizedState) -> Result<(), InfoError> {
    let n = input.n_paths();
    let amps = input.amplitudes();
    for a in &amps[n..] {
        if a.norm_sqr() > 1e-24 {
            return Err(InfoError::UnsupportedConfiguration(
                "input carries amplitude in the rotated polarization".into(),
            ));
        }
    }
    let reference = amps[..n]
        .iter()
        .cloned()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or_else(|| Complex64::new(1.0, 0.0));
    if reference.norm_sqr() < 1e-24 {
        return Ok(());
    }
    let phase = reference / reference.norm();
    for a in &amps[..n] {
        let rotated = a * phase.conj();
        if rotated.im.abs() > 1e-9 || rotated.re < -1e-9 {
            return Err(InfoError::UnsupportedConfiguration(
                "input spatial components do not share a common phase".into(),
            ));
        }
    }
    Ok(())
}

/// Shannon mutual information between the tagging parameter and the detector
/// outcomes, by fixed-order Gauss-Legendre quadrature (default 256 nodes).
///
/// The rule is applied on a transformed variable (`theta = sin u` for the
/// theta prior) with the domain split at zero, which handles the integrable
/// `p log p` singularities. The result records the requested-order value; the
/// doubled-order value is used for the convergence delta and warning.
pub fn shannon_mi(
    circuit: &Circuit,
    input: &PolarizedState,
    prior: &PriorSpec,
    nodes: usize,
) -> Result<InfoResult, InfoError> {
    let nodes = nodes.max(8);
    let value = shannon_fixed_order(circuit, input, prior, nodes)?;
    let refined = shannon_fixed_order(circuit, input, prior, nodes * 2)?;
    let delta = (refined - value).abs();
    Ok(InfoResult {
        value,
        method: InfoMethod::Quadrature,
        per_outcome: Vec::new(),
        remainder_term: 0.0,
        quadrature_nodes: nodes,
        quadrature_delta: delta,
        quadrature_warning: delta > 1e-8,
    })
}

fn shannon_fixed_order(
    circuit: &Circuit,
    input: &PolarizedState,
    prior: &PriorSpec,
    nodes: usize,
) -> Result<f64, InfoError> {
    // Quadrature grid over the integration variable, with the measure
    // transformed for the theta -> sin u substitution.
    let mut xs: Vec<f64> = Vec::with_capacity(nodes);
    let mut ws: Vec<f64> = Vec::with_capacity(nodes);
    let mut push_panel = |a: f64, b: f64, k: usize, trig: bool| {
        if k == 0 || (b - a).abs() < f64::EPSILON {
            return;
        }
        if trig {
            let (ua, ub) = (a.asin(), b.asin());
            let (us, uw) = gauss_legendre_on(k, ua, ub);
            for (u, w) in us.iter().zip(&uw) {
                xs.push(u.sin());
                ws.push(w * u.cos());
            }
        } else {
            let (x, w) = gauss_legendre_on(k, a, b);
            xs.extend_from_slice(&x);
            ws.extend_from_slice(&w);
        }
    };
    let trig = prior.variable == PriorVariable::Theta;
    if prior.lo < 0.0 && prior.hi > 0.0 {
        push_panel(prior.lo, 0.0, nodes / 2, trig);
        push_panel(0.0, prior.hi, nodes - nodes / 2, trig);
    } else {
        push_panel(prior.lo, prior.hi, nodes, trig);
    }

    // Prior normalization check (quadrature-tolerance invariant).
    let mass: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * prior.density_at(x)).sum();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(InfoError::PriorNotNormalized(mass));
    }

    let dim = 2 * circuit.n_paths();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(xs.len());
    for &x in &xs {
        let angle = match prior.variable {
            PriorVariable::Theta => RotatorAngle::from_theta(x),
            PriorVariable::DiagonalSigned => RotatorAngle::from_diagonal(x),
        };
        let state = circuit.evolve_angle(input, angle)?;
        table.push(state.amplitudes().iter().map(|a| a.norm_sqr()).collect());
    }

    let mut h = Kahan::default();
    for i in 0..dim {
        let mut mean = Kahan::default();
        for (row, (&x, &w)) in table.iter().zip(xs.iter().zip(&ws)) {
            mean.add(w * prior.density_at(x) * row[i]);
        }
        let p_bar = mean.sum();
        if p_bar <= 0.0 {
            continue;
        }
        for (row, (&x, &w)) in table.iter().zip(xs.iter().zip(&ws)) {
            let p = row[i];
            if p > 0.0 {
                h.add(w * prior.density_at(x) * p * (p / p_bar).log2());
            }
        }
    }
    Ok(h.sum())
}

const LN2: f64 = std::f64::consts::LN_2;

/// Natural logs of 3 to f64 precision.
const LN3: f64 = 1.0986122886681098;

/// Closed-form mutual information of the inner-arm scenario with
/// `t4 = r1, r4 = t1`, as a function of `t1`, under the signed-diagonal
/// uniform prior. The `r^6 log` term is defined as 0 at `r1 = 0`, and the
/// `t1 -> 0` limit is 0.
pub fn shannon_closed_inner(t1: f64) -> f64 {
    assert!((0.0..=1.0).contains(&t1), "t1 must be in [0, 1]");
    if t1 == 0.0 {
        return 0.0;
    }
    let t2 = t1 * t1;
    let r2 = 1.0 - t2;
    let log_term = if r2 > 0.0 { -2.0 * r2.powi(3) * r2.ln() } else { 0.0 };
    let q = 3.0 * r2 + t2 * t2;
    let inner = 3.0 * LN3 + t2 * (LN2 - 1.0) - 2.0 - q * q.ln();
    (log_term + t2 * inner) / (3.0 * LN2 * t2)
}

/// Second-order model of [`shannon_closed_inner`] for small `t1`.
pub fn shannon_taylor(t1: f64) -> f64 {
    assert!((0.0..=1.0).contains(&t1), "t1 must be in [0, 1]");
    let a2 = (-3.0 + LN2 + 3.0 * LN3) / (3.0 * LN2);
    a2 * t1 * t1
}

/// [6/4] Pade approximant of [`shannon_closed_inner`] over [0, 1].
pub fn shannon_pade(t1: f64) -> f64 {
    assert!((0.0..=1.0).contains(&t1), "t1 must be in [0, 1]");
    let a2 = (-3.0 + LN2 + 3.0 * LN3) / (3.0 * LN2);
    let a4 = (25.0 - 6.0 * LN2 - 24.0 * LN3) / (18.0 * LN2);
    let a6 = (254.0 - 3.0 * LN2 - 429.0 * LN3 + 180.0 * LN3 * LN3) / (90.0 * (6.0 * LN3 - 7.0) * LN2);
    let b2 = -1.0;
    let b4 = 1.0 / (10.0 * (7.0 - 6.0 * LN3));
    let x = t1 * t1;
    (a2 * x + a4 * x * x + a6 * x * x * x) / (1.0 + b2 * x + b4 * x * x)
}

/// CSV table of the inner-arm mutual information curve and its models,
/// columns `t1,H_exact,H_taylor,H_pade`, on a uniform grid over [0, 1].
pub fn shannon_curve_csv(points: usize) -> String {
    let points = points.max(2);
    let mut out = String::from("t1,H_exact,H_taylor,H_pade\n");
    for i in 0..points {
        let t1 = i as f64 / (points - 1) as f64;
        out.push_str(&format!(
            "{t1:.17e},{:.17e},{:.17e},{:.17e}\n",
            shannon_closed_inner(t1),
            shannon_taylor(t1),
            shannon_pade(t1)
        ));
    }
    out
}
