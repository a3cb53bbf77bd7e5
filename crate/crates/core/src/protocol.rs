//! Post-selected single-NMZI communication protocol: bit-conditional
//! distributions, decoding threshold, success probability, trial counts and
//! the protocol-level violation strength.

use crate::math::{erfc, ln_binomial, Kahan};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("channel is undecidable: P0 = P1 = {0}")]
    UndecidableChannel(f64),
}

/// Bit-conditional detection probabilities of the post-selected channel.
///
/// `p0` is the probability of a D1-H detection given the open (0-bit)
/// process, `p1` the same for the blocked (1-bit) process; both conditioned
/// on post-selection (no absorption, no D3 detection).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BitChannel {
    pub p0: f64,
    pub p1: f64,
    pub r1: f64,
    pub t1: f64,
    pub theta_w: f64,
}

/// Closed-form bit probabilities; inner splitters fixed at 50:50 and the
/// recombiner at `r4 = t1, t4 = r1`.
pub fn bit_probabilities(r1: f64, t1: f64, theta_w: f64) -> Result<BitChannel, ProtocolError> {
    if (r1 * r1 + t1 * t1 - 1.0).abs() > 1e-12 {
        return Err(ProtocolError::InvalidArgument(format!(
            "r1^2 + t1^2 = {} != 1",
            r1 * r1 + t1 * t1
        )));
    }
    if theta_w.abs() >= 1.0 {
        return Err(ProtocolError::InvalidArgument(format!("theta_w {theta_w} outside (-1, 1)")));
    }
    let theta_bar = (1.0 - theta_w * theta_w).sqrt() / 2.0;
    let norm0 = 1.0 / (4.0 - 2.0 * t1 * t1 * (1.0 + 2.0 * theta_bar));
    let p0 = norm0 * r1 * r1 * t1 * t1 * (1.0 + 2.0 * theta_bar).powi(2);
    let p1 = r1 * r1 * t1 * t1 / (3.0 * r1 * r1 + 1.0);
    Ok(BitChannel { p0, p1, r1, t1, theta_w })
}

/// Conditioned Fisher information of the two bit processes:
/// `F0 = t1^2 / (1 - theta_w^2)` and `F1 = 0`.
pub fn fisher_bits(t1: f64, theta_w: f64) -> (f64, f64) {
    (t1 * t1 / (1.0 - theta_w * theta_w), 0.0)
}

/// Decoding threshold: the receiver notes a logical 1 when the D1-H count is
/// below `q'`; a tie (count == q') decodes as 0.
pub fn decode_threshold(n_gamma: u64, channel: &BitChannel) -> Result<u64, ProtocolError> {
    let (p0, p1) = (channel.p0, channel.p1);
    if p0 == p1 {
        return Err(ProtocolError::UndecidableChannel(p0));
    }
    if !(0.0 < p1 && p1 < p0 && p0 < 1.0) {
        return Err(ProtocolError::InvalidArgument(format!(
            "need 0 < P1 < P0 < 1, got P0 = {p0}, P1 = {p1}"
        )));
    }
    if n_gamma == 0 {
        return Ok(0);
    }
    let num = n_gamma as f64 * ((1.0 - p1) / (1.0 - p0)).ln();
    let den = (p0 / p1).ln() - ((1.0 - p0) / (1.0 - p1)).ln();
    Ok((num / den).floor() as u64)
}

/// Probability of a correct logical-bit transmission: the two binomial sums
/// with the threshold at `q'`, evaluated with log-domain binomial terms and
/// compensated accumulation (stable to n_gamma = 1e6).
pub fn success_probability(n_gamma: u64, channel: &BitChannel) -> Result<f64, ProtocolError> {
    let q_prime = decode_threshold(n_gamma, channel)?;
    Ok(0.5 * binomial_cdf(q_prime, n_gamma, channel.p1)
        + 0.5 * (1.0 - binomial_cdf(q_prime, n_gamma, channel.p0)))
}

/// Success probability with an explicit threshold (used by the optimality scan).
pub fn success_probability_at(n_gamma: u64, threshold: u64, channel: &BitChannel) -> f64 {
    0.5 * binomial_cdf(threshold, n_gamma, channel.p1)
        + 0.5 * (1.0 - binomial_cdf(threshold, n_gamma, channel.p0))
}

/// P(X <= k) for X ~ Binomial(n, p), summed from the smaller tail in the log
/// domain.
fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    if k >= n {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut sum = Kahan::default();
    // Sum whichever tail is shorter, in increasing-magnitude order away from
    // the mode so the compensated accumulation sees small terms first.
    if (k as f64) <= n as f64 * p {
        for j in (0..=k).rev() {
            sum.add((ln_binomial(n, j) + j as f64 * ln_p + (n - j) as f64 * ln_q).exp());
        }
        sum.sum().min(1.0)
    } else {
        for j in (k + 1)..=n {
            sum.add((ln_binomial(n, j) + j as f64 * ln_p + (n - j) as f64 * ln_q).exp());
        }
        (1.0 - sum.sum()).max(0.0)
    }
}

/// Minimum trial count from the normal-approximation bound, with the
/// small-`t1` Taylor form `4 (Phi^-1(eps))^2 / t1^2` alongside.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialCount {
    pub exact_bound: u64,
    pub taylor_bound: f64,
}

pub fn min_trials(epsilon: f64, channel: &BitChannel) -> Result<TrialCount, ProtocolError> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(ProtocolError::InvalidArgument(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let (p0, p1) = (channel.p0, channel.p1);
    if p0 == p1 {
        return Err(ProtocolError::UndecidableChannel(p0));
    }
    let z = inverse_normal_cdf(epsilon)?;
    let spread = (p0 * (1.0 - p0)).sqrt() + (p1 * (1.0 - p1)).sqrt();
    let bound = (z * spread / (p0 - p1)).powi(2);
    let taylor = 4.0 * z * z / (channel.t1 * channel.t1);
    Ok(TrialCount { exact_bound: bound.ceil() as u64, taylor_bound: taylor })
}

/// Inverse of the standard normal CDF: rational initial approximation
/// refined by one Newton step on the erfc-based CDF. Absolute error below
/// 1e-9 on (0, 1).
pub fn inverse_normal_cdf(p: f64) -> Result<f64, ProtocolError> {
    if !(0.0 < p && p < 1.0) {
        return Err(ProtocolError::InvalidArgument(format!("p = {p} outside (0, 1)")));
    }
    // Acklam's rational approximation.
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };
    // One Newton step on Phi(x) - p = 0 with Phi from erfc.
    let cdf = 0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2);
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    Ok(x - (cdf - p) / pdf)
}

/// Protocol-level violation report.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub epsilon: f64,
    pub t1: f64,
    pub theta_w: f64,
    pub p0: f64,
    pub p1: f64,
    pub q_prime: u64,
    pub n_gamma: u64,
    pub success: f64,
    /// D from the exact normal-approximation trial count.
    pub d: f64,
    /// D in the small-t1 Taylor regime, `(Phi^-1(eps))^2`.
    pub d_taylor: f64,
}

/// Full protocol evaluation: trial count for the target error rate, decoding
/// threshold, exact success probability and the violation strength
/// `D = n_gamma * F0 / F_free`.
pub fn protocol_violation(epsilon: f64, t1: f64, theta_w: f64) -> Result<ProtocolReport, ProtocolError> {
    if !(0.0 < t1 && t1 < 1.0) {
        return Err(ProtocolError::InvalidArgument(format!("t1 = {t1} outside (0, 1)")));
    }
    let r1 = (1.0 - t1 * t1).sqrt();
    let channel = bit_probabilities(r1, t1, theta_w)?;
    let trials = min_trials(epsilon, &channel)?;
    let n_gamma = trials.exact_bound;
    let (q_prime, success) = if n_gamma == 0 {
        (0, 0.5)
    } else {
        (decode_threshold(n_gamma, &channel)?, success_probability(n_gamma, &channel)?)
    };
    let (f0, _f1) = fisher_bits(t1, theta_w);
    let f_free = 4.0 / (1.0 - theta_w * theta_w);
    let z = inverse_normal_cdf(epsilon)?;
    Ok(ProtocolReport {
        epsilon,
        t1,
        theta_w,
        p0: channel.p0,
        p1: channel.p1,
        q_prime,
        n_gamma,
        success,
        d: n_gamma as f64 * f0 / f_free,
        d_taylor: z * z,
    })
}
