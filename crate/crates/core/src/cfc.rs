//! Counterfactual-violation measures and the chained-device parameter sweeps.

use crate::builders::{chained_nmzi, cmzi, ChainedNmziSpec, CmziSpec};
use crate::circuit::{Circuit, PolarizedState, Polarization};
use crate::info::{fisher, InfoError, OutcomeSet};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CfcError {
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Free-space Fisher benchmark `4 / (1 - theta^2)`.
pub fn fisher_free(theta_w: f64) -> f64 {
    4.0 / (1.0 - theta_w * theta_w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Type1,
    Type1Restricted,
    Type2,
}

/// Device configuration a report refers to.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SweepConfig {
    pub n_outer: usize,
    pub m_inner: usize,
    pub theta_w: f64,
    pub blocked: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub kind: ViolationKind,
    /// D, D_A or P_A depending on `kind`.
    pub value: f64,
    /// F or F_A entering the ratio (Type 1) or attached to the report (Type 2).
    pub fisher_component: f64,
    pub f_free: f64,
    pub config: SweepConfig,
}

/// Type-1 violation strength `D = F / F_free`.
pub fn violation_type1(fisher_value: f64, theta_w: f64) -> Result<ViolationReport, CfcError> {
    if fisher_value < 0.0 {
        return Err(CfcError::InvalidArgument(format!("negative Fisher value {fisher_value}")));
    }
    if theta_w.abs() >= 1.0 {
        return Err(CfcError::InvalidArgument(format!("theta_w {theta_w} outside (-1, 1)")));
    }
    let f_free = fisher_free(theta_w);
    Ok(ViolationReport {
        kind: ViolationKind::Type1,
        value: fisher_value / f_free,
        fisher_component: fisher_value,
        f_free,
        config: SweepConfig { theta_w, ..Default::default() },
    })
}

/// Type-2 violation: total probability over the sender's outcomes at
/// `theta_w`, plus the restricted Fisher information of the same set.
pub fn violation_type2(
    circuit: &Circuit,
    input: &PolarizedState,
    theta_w: f64,
    sender_outcomes: &[usize],
) -> Result<(ViolationReport, f64), CfcError> {
    let out = circuit.evolve(input, theta_w)?;
    let amps = out.amplitudes();
    let p_a: f64 = sender_outcomes.iter().map(|&i| amps[i].norm_sqr()).sum();
    let fa = fisher(circuit, input, theta_w, &OutcomeSet::Restricted(sender_outcomes.to_vec()))?;
    let report = ViolationReport {
        kind: ViolationKind::Type2,
        value: p_a,
        fisher_component: fa.value,
        f_free: fisher_free(theta_w),
        config: SweepConfig { theta_w, ..Default::default() },
    };
    Ok((report, fa.value))
}

/// Detection probabilities of the chained nested MZI at `theta = 0`.
/// Returns `(P_D1, P_D2, absorbed)`.
pub fn chained_detection_probs(n_outer: usize, m_inner: usize, blocked: bool) -> Result<(f64, f64, f64), CfcError> {
    if n_outer < 1 || m_inner < 1 {
        return Err(CfcError::InvalidArgument("chain sizes must be >= 1".into()));
    }
    let spec = if blocked {
        ChainedNmziSpec::blocked(n_outer, m_inner)
    } else {
        ChainedNmziSpec::open(n_outer, m_inner)
    };
    let circuit = chained_nmzi(spec);
    let input = PolarizedState::input_h(3, 0)?;
    let out = circuit.evolve(&input, 0.0)?;
    Ok((
        out.probability(0, Polarization::H) + out.probability(0, Polarization::V),
        out.probability(1, Polarization::H) + out.probability(1, Polarization::V),
        out.absorbed(),
    ))
}

/// Sender's detector outcomes of the chained nested MZI: D1 and D2, both
/// polarizations (paths 0 and 1 of 3).
pub fn chained_sender_outcomes() -> Vec<usize> {
    vec![0, 1, 3, 4]
}

/// Sender's detector outcomes of the chained MZI: D1, both polarizations
/// (path 0 of 2).
pub fn cmzi_sender_outcomes() -> Vec<usize> {
    vec![0, 2]
}

/// One cell of a sweep grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub n_outer: usize,
    pub m_inner: usize,
    pub theta_w: f64,
    pub p_d1: f64,
    pub p_d2: f64,
    pub absorbed: f64,
    /// Type-1 restricted violation strength (chained NMZI sweeps).
    pub d_a: Option<f64>,
    /// Type-2 violation probability (chained MZI sweeps).
    pub p_a: Option<f64>,
    pub f_a: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub cells: Vec<SweepCell>,
    /// Axis sizes for rectangularity checks: (n values, m values, theta values).
    pub shape: (usize, usize, usize),
    /// Wall-clock seconds spent computing the grid.
    pub runtime_seconds: f64,
}

/// Spatially conditioned Type-1 violation strength `D_A = F_A / F_free` of
/// the open, tagged chained NMZI over an (N, M) grid.
///
/// Cells evaluate independently in parallel and merge in grid order, so
/// repeated sweeps are bit-identical.
pub fn sweep_chained_nmzi(
    n_list: &[usize],
    m_list: &[usize],
    theta_w: f64,
) -> Result<SweepGrid, CfcError> {
    if theta_w.abs() >= 1.0 {
        return Err(CfcError::InvalidArgument(format!("theta_w {theta_w} outside (-1, 1)")));
    }
    let max_m = m_list.iter().copied().max().unwrap_or(1) as f64;
    if theta_w.abs() * max_m >= 1.0 {
        eprintln!(
            "warning: theta_w = {theta_w:e} is not small against 1/M = {:e}; outside the weak-tag regime",
            1.0 / max_m
        );
    }
    let points: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| m_list.iter().map(move |&m| (n, m)))
        .collect();
    let started = std::time::Instant::now();
    let cells: Vec<SweepCell> = points
        .par_iter()
        .map(|&(n, m)| -> Result<SweepCell, CfcError> {
            let circuit = chained_nmzi(ChainedNmziSpec::tagged(n, m));
            let input = PolarizedState::input_h(3, 0)?;
            let out = circuit.evolve(&input, theta_w)?;
            let fa = fisher(
                &circuit,
                &input,
                theta_w,
                &OutcomeSet::Restricted(chained_sender_outcomes()),
            )?;
            Ok(SweepCell {
                n_outer: n,
                m_inner: m,
                theta_w,
                p_d1: out.probability(0, Polarization::H) + out.probability(0, Polarization::V),
                p_d2: out.probability(1, Polarization::H) + out.probability(1, Polarization::V),
                absorbed: out.absorbed(),
                d_a: Some(fa.value / fisher_free(theta_w)),
                p_a: None,
                f_a: Some(fa.value),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepGrid {
        cells,
        shape: (n_list.len(), m_list.len(), 1),
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// `(P_A, F_A)` of the open, tagged chained MZI over an (N, theta_w) grid.
pub fn sweep_cmzi(n_list: &[usize], theta_w_list: &[f64]) -> Result<SweepGrid, CfcError> {
    for &t in theta_w_list {
        if t.abs() >= 1.0 {
            return Err(CfcError::InvalidArgument(format!("theta_w {t} outside (-1, 1)")));
        }
    }
    let points: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| theta_w_list.iter().map(move |&t| (n, t)))
        .collect();
    let started = std::time::Instant::now();
    let cells: Vec<SweepCell> = points
        .par_iter()
        .map(|&(n, theta_w)| -> Result<SweepCell, CfcError> {
            let circuit = cmzi(CmziSpec::tagged(n));
            let input = PolarizedState::input_h(2, 0)?;
            let out = circuit.evolve(&input, theta_w)?;
            let p_a = out.probability(0, Polarization::H) + out.probability(0, Polarization::V);
            let fa = fisher(
                &circuit,
                &input,
                theta_w,
                &OutcomeSet::Restricted(cmzi_sender_outcomes()),
            )?;
            Ok(SweepCell {
                n_outer: n,
                m_inner: 0,
                theta_w,
                p_d1: p_a,
                p_d2: out.probability(1, Polarization::H) + out.probability(1, Polarization::V),
                absorbed: out.absorbed(),
                d_a: None,
                p_a: Some(p_a),
                f_a: Some(fa.value),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepGrid {
        cells,
        shape: (n_list.len(), 1, theta_w_list.len()),
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

impl SweepGrid {
    /// CSV dump: `N,M,theta_w,P_D1,P_D2,absorbed,D_A,P_A,F_A` with empty
    /// fields where a quantity does not apply.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,M,theta_w,P_D1,P_D2,absorbed,D_A,P_A,F_A\n");
        for c in &self.cells {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{}\n",
                c.n_outer,
                c.m_inner,
                c.theta_w,
                c.p_d1,
                c.p_d2,
                c.absorbed,
                opt(c.d_a),
                opt(c.p_a),
                opt(c.f_a),
            ));
        }
        out
    }
}
