//! Polarized path circuits and single-photon state evolution.
//!
//! A state lives on `n` spatial paths, each with two polarization components.
//! Amplitudes are stored as a complex vector of length `2n`: index `i` in
//! `[0, n)` is path `i` with the input ("horizontal") polarization, index
//! `i + n` is the same path with the orthogonal ("vertical") polarization.
//!
//! Elements act locally:
//!
//! * [`BeamSplitter`] mixes two paths with the real rotation block
//!   `[[r, t], [-t, r]]`, applied identically to both polarization blocks.
//!   Chains of such splitters compose as rotations, which is what the
//!   chained interferometers rely on.
//! * [`Rotator`] mixes the two polarizations of one path with
//!   `[[c, theta], [-theta, c]]`, `c = sqrt(1 - theta^2)`. Rotators listed in
//!   [`Circuit::rotator_slots`] are bound to the single tagging parameter
//!   passed to [`Circuit::evolve`].
//! * [`Absorber`] removes all amplitude on one path and books the removed
//!   probability on the state's `absorbed` ledger.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version written into circuit JSON documents.
pub const CIRCUIT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("path index {index} out of range for {n_paths} paths")]
    PathOutOfRange { index: usize, n_paths: usize },
    #[error("beam splitter on identical paths ({0})")]
    DegeneratePair(usize),
    #[error("coefficients not normalized: r^2 + t^2 = {0}")]
    NotNormalized(f64),
    #[error("tagging parameter {0} outside [-1, 1]")]
    ThetaOutOfDomain(f64),
    #[error("rotator slot {0} does not reference a rotator element")]
    SlotNotARotator(usize),
    #[error("rotator slot {0} out of range")]
    SlotOutOfRange(usize),
    #[error("scattering matrix undefined: circuit contains an absorber")]
    AbsorberInMatrix,
    #[error("input state has {got} amplitudes, circuit expects {want}")]
    InputLength { got: usize, want: usize },
    #[error("invalid circuit JSON: {0}")]
    Json(String),
    #[error("unsupported circuit schema version {0}")]
    SchemaVersion(u32),
}

/// Polarization label for detector outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Single-photon amplitude vector over `n` paths x 2 polarizations, plus the
/// cumulative probability removed by absorbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedState {
    n_paths: usize,
    amplitudes: Vec<Complex64>,
    absorbed: f64,
}

impl PolarizedState {
    /// Horizontally polarized photon in a single input path.
    pub fn input_h(n_paths: usize, path: usize) -> Result<Self, CircuitError> {
        if path >= n_paths {
            return Err(CircuitError::PathOutOfRange { index: path, n_paths });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * n_paths];
        amplitudes[path] = Complex64::new(1.0, 0.0);
        Ok(Self { n_paths, amplitudes, absorbed: 0.0 })
    }

    /// State from raw amplitudes (length `2 * n_paths`), normalized by the caller.
    pub fn from_amplitudes(n_paths: usize, amplitudes: Vec<Complex64>) -> Result<Self, CircuitError> {
        if amplitudes.len() != 2 * n_paths {
            return Err(CircuitError::InputLength { got: amplitudes.len(), want: 2 * n_paths });
        }
        Ok(Self { n_paths, amplitudes, absorbed: 0.0 })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of `(path, polarization)`.
    pub fn amplitude(&self, path: usize, pol: Polarization) -> Complex64 {
        match pol {
            Polarization::H => self.amplitudes[path],
            Polarization::V => self.amplitudes[path + self.n_paths],
        }
    }

    /// Cumulative probability removed by absorbers.
    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    /// Sum of |amplitude|^2 over all components.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Detection probability of `(path, polarization)`.
    pub fn probability(&self, path: usize, pol: Polarization) -> f64 {
        self.amplitude(path, pol).norm_sqr()
    }
}

/// Two-path mixer with real coefficients, block `[[r, t], [-t, r]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub path_a: usize,
    pub path_b: usize,
    pub r: f64,
    pub t: f64,
}

/// Polarization rotation on one path; `theta` is the off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotator {
    pub path: usize,
    pub theta: f64,
}

/// Removes all amplitude on one path, adding it to the absorbed ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    pub path: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    BeamSplitter(BeamSplitter),
    Rotator(Rotator),
    Absorber(Absorber),
}

/// Ordered element list over `n_paths` paths. Rotators whose indices appear in
/// `rotator_slots` share the single tagging parameter given at evolution time;
/// any other rotator keeps its fixed `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_paths: usize,
    elements: Vec<Element>,
    rotator_slots: Vec<usize>,
}

const COEFF_TOL: f64 = 1e-12;

/// Internal rotator action with an explicit (diagonal, off-diagonal) pair.
/// `c^2 + d^2 = 1`; the public API uses `(sqrt(1-theta^2), theta)`, while the
/// signed-diagonal Shannon prior evaluates with `c < 0` as well.
#[derive(Clone, Copy)]
pub(crate) struct RotatorAngle {
    pub c: f64,
    pub d: f64,
}

impl RotatorAngle {
    pub(crate) fn from_theta(theta: f64) -> Self {
        Self { c: (1.0 - theta * theta).max(0.0).sqrt(), d: theta }
    }

    /// Signed diagonal parametrization: c = vartheta, d = +sqrt(1 - vartheta^2).
    pub(crate) fn from_diagonal(vartheta: f64) -> Self {
        Self { c: vartheta, d: (1.0 - vartheta * vartheta).max(0.0).sqrt() }
    }
}

impl Circuit {
    pub fn new(n_paths: usize, elements: Vec<Element>, rotator_slots: Vec<usize>) -> Result<Self, CircuitError> {
        for e in &elements {
            match *e {
                Element::BeamSplitter(bs) => {
                    for idx in [bs.path_a, bs.path_b] {
                        if idx >= n_paths {
                            return Err(CircuitError::PathOutOfRange { index: idx, n_paths });
                        }
                    }
                    if bs.path_a == bs.path_b {
                        return Err(CircuitError::DegeneratePair(bs.path_a));
                    }
                    let s = bs.r * bs.r + bs.t * bs.t;
                    if (s - 1.0).abs() > COEFF_TOL {
                        return Err(CircuitError::NotNormalized(s));
                    }
                }
                Element::Rotator(rot) => {
                    if rot.path >= n_paths {
                        return Err(CircuitError::PathOutOfRange { index: rot.path, n_paths });
                    }
                    if rot.theta.abs() > 1.0 {
                        return Err(CircuitError::ThetaOutOfDomain(rot.theta));
                    }
                }
                Element::Absorber(ab) => {
                    if ab.path >= n_paths {
                        return Err(CircuitError::PathOutOfRange { index: ab.path, n_paths });
                    }
                }
            }
        }
        for &slot in &rotator_slots {
            match elements.get(slot) {
                Some(Element::Rotator(_)) => {}
                Some(_) => return Err(CircuitError::SlotNotARotator(slot)),
                None => return Err(CircuitError::SlotOutOfRange(slot)),
            }
        }
        Ok(Self { n_paths, elements, rotator_slots })
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn rotator_slots(&self) -> &[usize] {
        &self.rotator_slots
    }

    pub fn has_absorber(&self) -> bool {
        self.elements.iter().any(|e| matches!(e, Element::Absorber(_)))
    }

    fn check_theta(theta: f64) -> Result<(), CircuitError> {
        if !(theta.is_finite() && theta.abs() <= 1.0) {
            return Err(CircuitError::ThetaOutOfDomain(theta));
        }
        Ok(())
    }

    /// Evolve `input` through the circuit with the bound rotators at `theta`.
    pub fn evolve(&self, input: &PolarizedState, theta: f64) -> Result<PolarizedState, CircuitError> {
        Self::check_theta(theta)?;
        self.evolve_angle(input, RotatorAngle::from_theta(theta))
    }

    pub(crate) fn evolve_angle(&self, input: &PolarizedState, bound: RotatorAngle) -> Result<PolarizedState, CircuitError> {
        if input.n_paths != self.n_paths {
            return Err(CircuitError::InputLength { got: input.amplitudes.len(), want: 2 * self.n_paths });
        }
        let mut state = input.clone();
        let n = self.n_paths;
        for (idx, e) in self.elements.iter().enumerate() {
            match *e {
                Element::BeamSplitter(bs) => {
                    for off in [0, n] {
                        let (a, b) = (bs.path_a + off, bs.path_b + off);
                        let (va, vb) = (state.amplitudes[a], state.amplitudes[b]);
                        state.amplitudes[a] = bs.r * va + bs.t * vb;
                        state.amplitudes[b] = -bs.t * va + bs.r * vb;
                    }
                }
                Element::Rotator(rot) => {
                    let ang = if self.rotator_slots.contains(&idx) {
                        bound
                    } else {
                        RotatorAngle::from_theta(rot.theta)
                    };
                    let (h, v) = (rot.path, rot.path + n);
                    let (vh, vv) = (state.amplitudes[h], state.amplitudes[v]);
                    state.amplitudes[h] = ang.c * vh + ang.d * vv;
                    state.amplitudes[v] = -ang.d * vh + ang.c * vv;
                }
                Element::Absorber(ab) => {
                    let (h, v) = (ab.path, ab.path + n);
                    state.absorbed += state.amplitudes[h].norm_sqr() + state.amplitudes[v].norm_sqr();
                    state.amplitudes[h] = Complex64::new(0.0, 0.0);
                    state.amplitudes[v] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(state)
    }

    /// Output amplitudes and their exact derivative with respect to the shared
    /// tagging parameter, in one forward pass (product rule accumulated as
    /// `d' = E d + E' b` at each bound slot).
    ///
    /// With no bound rotator the derivative is the zero vector.
    pub fn evolve_with_derivative(
        &self,
        input: &PolarizedState,
        theta: f64,
    ) -> Result<(PolarizedState, Vec<Complex64>), CircuitError> {
        Self::check_theta(theta)?;
        if input.n_paths != self.n_paths {
            return Err(CircuitError::InputLength { got: input.amplitudes.len(), want: 2 * self.n_paths });
        }
        let n = self.n_paths;
        let mut state = input.clone();
        let mut deriv = vec![Complex64::new(0.0, 0.0); 2 * n];
        let c = (1.0 - theta * theta).max(0.0).sqrt();
        // dc/dtheta; infinite at |theta| = 1, callers needing derivatives
        // reject the boundary before getting here.
        let dc = if c > 0.0 { -theta / c } else { f64::INFINITY };
        for (idx, e) in self.elements.iter().enumerate() {
            match *e {
                Element::BeamSplitter(bs) => {
                    for off in [0, n] {
                        let (a, b) = (bs.path_a + off, bs.path_b + off);
                        let (va, vb) = (state.amplitudes[a], state.amplitudes[b]);
                        state.amplitudes[a] = bs.r * va + bs.t * vb;
                        state.amplitudes[b] = -bs.t * va + bs.r * vb;
                        let (da, db) = (deriv[a], deriv[b]);
                        deriv[a] = bs.r * da + bs.t * db;
                        deriv[b] = -bs.t * da + bs.r * db;
                    }
                }
                Element::Rotator(rot) => {
                    let bound = self.rotator_slots.contains(&idx);
                    let ang = if bound { RotatorAngle::from_theta(theta) } else { RotatorAngle::from_theta(rot.theta) };
                    let (h, v) = (rot.path, rot.path + n);
                    let (vh, vv) = (state.amplitudes[h], state.amplitudes[v]);
                    let (dh, dv) = (deriv[h], deriv[v]);
                    deriv[h] = ang.c * dh + ang.d * dv;
                    deriv[v] = -ang.d * dh + ang.c * dv;
                    if bound {
                        deriv[h] += dc * vh + vv;
                        deriv[v] += -vh + dc * vv;
                    }
                    state.amplitudes[h] = ang.c * vh + ang.d * vv;
                    state.amplitudes[v] = -ang.d * vh + ang.c * vv;
                }
                Element::Absorber(ab) => {
                    let (h, v) = (ab.path, ab.path + n);
                    state.absorbed += state.amplitudes[h].norm_sqr() + state.amplitudes[v].norm_sqr();
                    state.amplitudes[h] = Complex64::new(0.0, 0.0);
                    state.amplitudes[v] = Complex64::new(0.0, 0.0);
                    deriv[h] = Complex64::new(0.0, 0.0);
                    deriv[v] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok((state, deriv))
    }

    /// Derivative of the output amplitudes with respect to the shared theta.
    pub fn derivative_state(&self, input: &PolarizedState, theta: f64) -> Result<Vec<Complex64>, CircuitError> {
        Ok(self.evolve_with_derivative(input, theta)?.1)
    }

    /// Dense 2n x 2n scattering matrix, column `j` = evolution of basis state `j`.
    /// Reserved for absorber-free circuits; row-major storage.
    pub fn scattering_matrix(&self, theta: f64) -> Result<Vec<Vec<Complex64>>, CircuitError> {
        if self.has_absorber() {
            return Err(CircuitError::AbsorberInMatrix);
        }
        Self::check_theta(theta)?;
        let dim = 2 * self.n_paths;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for j in 0..dim {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[j] = Complex64::new(1.0, 0.0);
            let basis = PolarizedState { n_paths: self.n_paths, amplitudes: amps, absorbed: 0.0 };
            let out = self.evolve(&basis, theta)?;
            for i in 0..dim {
                m[i][j] = out.amplitudes[i];
            }
        }
        Ok(m)
    }

    /// Amplitude on the slot rotator's path (input polarization block)
    /// immediately before that rotator, with `input` evolved through the
    /// circuit prefix at `theta`.
    pub fn presence_amplitude(
        &self,
        slot: usize,
        input: &PolarizedState,
        theta: f64,
    ) -> Result<Complex64, CircuitError> {
        let rot = match self.elements.get(slot) {
            Some(Element::Rotator(r)) => *r,
            Some(_) => return Err(CircuitError::SlotNotARotator(slot)),
            None => return Err(CircuitError::SlotOutOfRange(slot)),
        };
        let prefix = Circuit {
            n_paths: self.n_paths,
            elements: self.elements[..slot].to_vec(),
            rotator_slots: self.rotator_slots.iter().copied().filter(|&s| s < slot).collect(),
        };
        let state = prefix.evolve(input, theta)?;
        Ok(state.amplitude(rot.path, Polarization::H))
    }

    /// Serialize to the versioned JSON document.
    pub fn to_json(&self) -> String {
        let doc = CircuitDoc {
            schema_version: CIRCUIT_SCHEMA_VERSION,
            n_paths: self.n_paths,
            elements: self.elements.clone(),
            rotator_slots: self.rotator_slots.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("circuit serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let doc: CircuitDoc = serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        if doc.schema_version != CIRCUIT_SCHEMA_VERSION {
            return Err(CircuitError::SchemaVersion(doc.schema_version));
        }
        Circuit::new(doc.n_paths, doc.elements, doc.rotator_slots)
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    schema_version: u32,
    n_paths: usize,
    elements: Vec<Element>,
    rotator_slots: Vec<usize>,
}
