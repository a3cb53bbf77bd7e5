//! Shared test oracles, kept independent of the engine's evolution path:
//! dense per-element matrices composed by explicit matrix multiplication,
//! and finite-difference Fisher information.
//!
//! Each integration-test binary links this module and uses its own subset.
#![allow(dead_code)]

use mzisim::circuit::{Circuit, Element, PolarizedState};
use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn identity(dim: usize) -> Dense {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let dim = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Dense matrix of one element; absorbers become the (non-unitary) projector
/// that zeroes their path.
pub fn element_matrix(e: &Element, n: usize, theta: f64, bound: bool) -> Dense {
    let dim = 2 * n;
    let mut m = identity(dim);
    match *e {
        Element::BeamSplitter(bs) => {
            for off in [0, n] {
                let (a, b) = (bs.path_a + off, bs.path_b + off);
                m[a][a] = Complex64::new(bs.r, 0.0);
                m[a][b] = Complex64::new(bs.t, 0.0);
                m[b][a] = Complex64::new(-bs.t, 0.0);
                m[b][b] = Complex64::new(bs.r, 0.0);
            }
        }
        Element::Rotator(rot) => {
            let th = if bound { theta } else { rot.theta };
            let c = (1.0 - th * th).max(0.0).sqrt();
            let (h, v) = (rot.path, rot.path + n);
            m[h][h] = Complex64::new(c, 0.0);
            m[h][v] = Complex64::new(th, 0.0);
            m[v][h] = Complex64::new(-th, 0.0);
            m[v][v] = Complex64::new(c, 0.0);
        }
        Element::Absorber(ab) => {
            let (h, v) = (ab.path, ab.path + n);
            m[h][h] = Complex64::new(0.0, 0.0);
            m[v][v] = Complex64::new(0.0, 0.0);
        }
    }
    m
}

/// Full transfer matrix by dense composition.
pub fn dense_transfer(circuit: &Circuit, theta: f64) -> Dense {
    let n = circuit.n_paths();
    let mut acc = identity(2 * n);
    for (idx, e) in circuit.elements().iter().enumerate() {
        let bound = circuit.rotator_slots().contains(&idx);
        acc = matmul(&element_matrix(e, n, theta, bound), &acc);
    }
    acc
}

pub fn apply(m: &Dense, input: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(input).map(|(a, b)| a * b).sum())
        .collect()
}

/// Output probabilities via the dense oracle.
pub fn dense_probs(circuit: &Circuit, input: &PolarizedState, theta: f64) -> Vec<f64> {
    let m = dense_transfer(circuit, theta);
    apply(&m, input.amplitudes()).iter().map(|a| a.norm_sqr()).collect()
}

/// Restricted Fisher information via central finite differences on the dense
/// oracle: subset sum plus the negative-measurement term.
pub fn fd_fisher_restricted(
    circuit: &Circuit,
    input: &PolarizedState,
    theta: f64,
    subset: &[usize],
    h: f64,
) -> f64 {
    let pp = dense_probs(circuit, input, theta + h);
    let pm = dense_probs(circuit, input, theta - h);
    let p0 = dense_probs(circuit, input, theta);
    let mut f = 0.0;
    let mut p_a = 0.0;
    let mut dp_a = 0.0;
    for &i in subset {
        let dp = (pp[i] - pm[i]) / (2.0 * h);
        if p0[i] > 1e-30 {
            f += dp * dp / p0[i];
        }
        p_a += p0[i];
        dp_a += dp;
    }
    if 1.0 - p_a > 1e-30 {
        f += dp_a * dp_a / (1.0 - p_a);
    }
    f
}

/// Unrestricted finite-difference Fisher over all detector outcomes.
pub fn fd_fisher_all(circuit: &Circuit, input: &PolarizedState, theta: f64, h: f64) -> f64 {
    let pp = dense_probs(circuit, input, theta + h);
    let pm = dense_probs(circuit, input, theta - h);
    let p0 = dense_probs(circuit, input, theta);
    let mut f = 0.0;
    for i in 0..p0.len() {
        let dp = (pp[i] - pm[i]) / (2.0 * h);
        if p0[i] > 1e-30 {
            f += dp * dp / p0[i];
        }
    }
    f
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}
