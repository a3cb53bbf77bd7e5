//! Circuit builders for the devices under study.
//!
//! Path conventions are fixed by the tests against the known scattering
//! matrices and detection benchmarks:
//!
//! * Nested MZI (3 paths): detectors D1/D2/D3 are paths 0/1/2 at the output.
//!   Wiring is BS1 on (0,1), inner BS2/BS3 on (1,2), BS4 on (0,1); rotator
//!   positions 1..5 as in [`NmziPosition`].
//! * Chained nested MZI (3 rails): rail 0 stays with the sender (D1), rail 1
//!   is the outer interferometer arm (D2), rail 2 is the receiver-side rail
//!   that is dumped after each inner chain.
//! * Chained MZI (2 rails): rail 0 returns to the sender (D1), rail 1 is the
//!   receiver's rail (D2).

use crate::circuit::{Absorber, BeamSplitter, Circuit, Element, Rotator};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Rotator location in the nested MZI of the five scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmziPosition {
    /// No rotator.
    None,
    /// Outer arm, between the first and last splitter.
    P1,
    /// Inner-interferometer entry, between the first and second splitter.
    P2,
    /// Between the third and last splitter.
    P3,
    /// Inner arm carried by path 2.
    P4,
    /// Inner arm carried by path 1.
    P5,
}

impl NmziPosition {
    pub fn from_index(i: usize) -> Option<Self> {
        Some(match i {
            0 => Self::None,
            1 => Self::P1,
            2 => Self::P2,
            3 => Self::P3,
            4 => Self::P4,
            5 => Self::P5,
            _ => return None,
        })
    }
}

/// Beam-splitter coefficient pair with `r^2 + t^2 = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Coefficients {
    pub r: f64,
    pub t: f64,
}

impl Coefficients {
    pub fn from_t(t: f64) -> Self {
        Self { r: (1.0 - t * t).max(0.0).sqrt(), t }
    }

    pub fn from_r(r: f64) -> Self {
        Self { r, t: (1.0 - r * r).max(0.0).sqrt() }
    }
}

/// Single rotator in free space (one path, two polarizations).
pub fn free_rotator() -> Circuit {
    Circuit::new(1, vec![Element::Rotator(Rotator { path: 0, theta: 0.0 })], vec![0])
        .expect("free rotator is always valid")
}

/// Nested MZI with inner splitters fixed at 50:50 and an optional bound
/// rotator at one of the five scenario positions.
pub fn nmzi(bs1: Coefficients, bs4: Coefficients, position: NmziPosition) -> Circuit {
    let h = FRAC_1_SQRT_2;
    let mut elements = Vec::new();
    let mut slots = Vec::new();
    let rot = |elements: &mut Vec<Element>, slots: &mut Vec<usize>, path: usize| {
        slots.push(elements.len());
        elements.push(Element::Rotator(Rotator { path, theta: 0.0 }));
    };
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: bs1.r, t: bs1.t }));
    if position == NmziPosition::P1 {
        rot(&mut elements, &mut slots, 0);
    }
    if position == NmziPosition::P2 {
        rot(&mut elements, &mut slots, 1);
    }
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 1, path_b: 2, r: h, t: h }));
    if position == NmziPosition::P4 {
        rot(&mut elements, &mut slots, 2);
    }
    if position == NmziPosition::P5 {
        rot(&mut elements, &mut slots, 1);
    }
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 1, path_b: 2, r: h, t: h }));
    if position == NmziPosition::P3 {
        rot(&mut elements, &mut slots, 1);
    }
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: bs4.r, t: bs4.t }));
    Circuit::new(3, elements, slots).expect("nmzi wiring is always valid")
}

/// Post-selected communication device: nested MZI with `r4 = t1`, `t4 = r1`,
/// a bound rotator on the path-2 inner arm, and (for the 1-bit process) an
/// absorbing object right after it.
pub fn nmzi_comm(bs1: Coefficients, blocked: bool) -> Circuit {
    let h = FRAC_1_SQRT_2;
    let mut elements = vec![
        Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: bs1.r, t: bs1.t }),
        Element::BeamSplitter(BeamSplitter { path_a: 1, path_b: 2, r: h, t: h }),
        Element::Rotator(Rotator { path: 2, theta: 0.0 }),
    ];
    let slots = vec![2];
    if blocked {
        elements.push(Element::Absorber(Absorber { path: 2 }));
    }
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 1, path_b: 2, r: h, t: h }));
    elements.push(Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: bs1.t, t: bs1.r }));
    Circuit::new(3, elements, slots).expect("nmzi_comm wiring is always valid")
}

/// Chained nested MZI parameters.
#[derive(Debug, Clone, Copy)]
pub struct ChainedNmziSpec {
    /// Number of outer beam splitters, `t_n = sin(pi / 2N)`.
    pub n_outer: usize,
    /// Number of splitters per inner chain, `t_m = sin(pi / 2M)`.
    pub m_inner: usize,
    /// Insert absorbing detectors after every inner splitter.
    pub bob_blocked: bool,
    /// Bind one rotator per inner MZI on the receiver rail.
    pub tag_inner: bool,
    /// Tag every inner segment instead of every inner MZI (adds the segment
    /// after the last splitter of each chain).
    pub tag_per_segment: bool,
}

impl ChainedNmziSpec {
    pub fn open(n_outer: usize, m_inner: usize) -> Self {
        Self { n_outer, m_inner, bob_blocked: false, tag_inner: false, tag_per_segment: false }
    }

    pub fn blocked(n_outer: usize, m_inner: usize) -> Self {
        Self { bob_blocked: true, ..Self::open(n_outer, m_inner) }
    }

    pub fn tagged(n_outer: usize, m_inner: usize) -> Self {
        Self { tag_inner: true, ..Self::open(n_outer, m_inner) }
    }
}

/// Chained nested MZI on 3 rails: N outer splitters with an inner chain of M
/// splitters between consecutive outer splitters; rail 2 is dumped after each
/// chain. Degenerate sizes (N = 1 or M = 1 give t = 1) are allowed.
pub fn chained_nmzi(spec: ChainedNmziSpec) -> Circuit {
    assert!(spec.n_outer >= 1 && spec.m_inner >= 1, "chain sizes must be >= 1");
    let outer = Coefficients::from_t((PI / (2.0 * spec.n_outer as f64)).sin());
    let inner = Coefficients::from_t((PI / (2.0 * spec.m_inner as f64)).sin());
    let mut elements = Vec::new();
    let mut slots = Vec::new();
    for stage in 0..spec.n_outer {
        elements.push(Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: outer.r, t: outer.t }));
        if stage + 1 == spec.n_outer {
            break;
        }
        for m in 0..spec.m_inner {
            elements.push(Element::BeamSplitter(BeamSplitter { path_a: 1, path_b: 2, r: inner.r, t: inner.t }));
            if spec.bob_blocked {
                elements.push(Element::Absorber(Absorber { path: 2 }));
            } else if spec.tag_inner && (spec.tag_per_segment || m + 1 < spec.m_inner) {
                slots.push(elements.len());
                elements.push(Element::Rotator(Rotator { path: 2, theta: 0.0 }));
            }
        }
        elements.push(Element::Absorber(Absorber { path: 2 }));
    }
    Circuit::new(3, elements, slots).expect("chained nmzi wiring is always valid")
}

/// Chained MZI parameters.
#[derive(Debug, Clone, Copy)]
pub struct CmziSpec {
    /// Number of beam splitters, `t = sin(pi / 2N)`.
    pub n_splitters: usize,
    /// Insert absorbing detectors on the receiver rail after every splitter.
    pub bob_blocked: bool,
    /// Bind one rotator per MZI (inter-splitter segment) on the receiver rail.
    pub tag_bob: bool,
}

impl CmziSpec {
    pub fn open(n_splitters: usize) -> Self {
        Self { n_splitters, bob_blocked: false, tag_bob: false }
    }

    pub fn blocked(n_splitters: usize) -> Self {
        Self { bob_blocked: true, ..Self::open(n_splitters) }
    }

    pub fn tagged(n_splitters: usize) -> Self {
        Self { tag_bob: true, ..Self::open(n_splitters) }
    }
}

/// Chained MZI on 2 rails. Blocked: absorbers on rail 1 after each splitter.
/// Tagged: a bound rotator on rail 1 in each of the N-1 segments (after the
/// channel rotation, i.e. before the absorber would sit in the blocked case).
pub fn cmzi(spec: CmziSpec) -> Circuit {
    assert!(spec.n_splitters >= 1, "need at least one splitter");
    let c = Coefficients::from_t((PI / (2.0 * spec.n_splitters as f64)).sin());
    let mut elements = Vec::new();
    let mut slots = Vec::new();
    for stage in 0..spec.n_splitters {
        elements.push(Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: c.r, t: c.t }));
        if stage + 1 < spec.n_splitters && spec.tag_bob {
            slots.push(elements.len());
            elements.push(Element::Rotator(Rotator { path: 1, theta: 0.0 }));
        }
        if spec.bob_blocked {
            elements.push(Element::Absorber(Absorber { path: 1 }));
        }
    }
    Circuit::new(2, elements, slots).expect("cmzi wiring is always valid")
}
