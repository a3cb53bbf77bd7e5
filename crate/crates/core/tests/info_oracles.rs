//! Information-measure oracles: closed forms of the five scenarios, the
//! single-rotator equivalence property, estimator variance against the
//! Cramer-Rao bound, the inner-arm closed form against quadrature, and the
//! approximant error levels.

mod common;

use mzisim::builders::{free_rotator, nmzi, Coefficients, NmziPosition};
use mzisim::circuit::{BeamSplitter, Circuit, Element, PolarizedState, Rotator};
use mzisim::info::{
    fisher, fisher_closed_single_rotator, shannon_closed_inner, shannon_mi, shannon_pade, shannon_taylor,
    OutcomeSet, PriorSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H_FREE: f64 = 0.3280357795359374; // (ln 108 - 4) / (3 ln 2)
const LN2: f64 = std::f64::consts::LN_2;
const LN3: f64 = 1.0986122886681098;

/// Random polarization-neutral real circuit with exactly one bound rotator
/// and a common-phase input.
fn random_single_rotator_circuit(rng: &mut ChaCha8Rng) -> (Circuit, PolarizedState, f64) {
    let n_paths = rng.gen_range(1..=4usize);
    let n_bs = if n_paths == 1 { 0 } else { rng.gen_range(0..=10usize) };
    let mut elements = Vec::new();
    for _ in 0..n_bs {
        let a = rng.gen_range(0..n_paths);
        let mut b = rng.gen_range(0..n_paths);
        while b == a {
            b = rng.gen_range(0..n_paths);
        }
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        elements.push(Element::BeamSplitter(BeamSplitter { path_a: a, path_b: b, r: angle.cos(), t: angle.sin() }));
    }
    let slot = rng.gen_range(0..=elements.len());
    let path = rng.gen_range(0..n_paths);
    elements.insert(slot, Element::Rotator(Rotator { path, theta: 0.0 }));
    let circuit = Circuit::new(n_paths, elements, vec![slot]).unwrap();
    // Nonnegative real amplitudes in the input polarization block share a phase.
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n_paths];
    let mut norm = 0.0;
    for a in amps.iter_mut().take(n_paths) {
        let v: f64 = rng.gen_range(0.0..1.0);
        *a = Complex64::new(v, 0.0);
        norm += v * v;
    }
    if norm < 1e-12 {
        amps[0] = Complex64::new(1.0, 0.0);
        norm = 1.0;
    }
    let scale = 1.0 / norm.sqrt();
    for a in &mut amps {
        *a *= scale;
    }
    let input = PolarizedState::from_amplitudes(n_paths, amps).unwrap();
    let theta = rng.gen_range(-0.9..0.9);
    (circuit, input, theta)
}

#[test]
fn single_rotator_equivalence_over_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let (circuit, input, theta) = random_single_rotator_circuit(&mut rng);
        let slot = circuit.rotator_slots()[0];
        let generic = fisher(&circuit, &input, theta, &OutcomeSet::All).unwrap();
        let closed = fisher_closed_single_rotator(&circuit, slot, theta, &input).unwrap();
        let scale = closed.value.max(1e-12);
        assert!(
            (generic.value - closed.value).abs() / scale <= 1e-9,
            "case {case}: generic {} vs closed {}",
            generic.value,
            closed.value
        );
    }
}

#[test]
fn scenario_fisher_closed_forms_on_a_grid() {
    let theta_grid = [-0.8, -0.3, 0.0, 0.45, 0.9];
    let r1_grid = [0.1, 0.35, 0.6, 0.8, 0.95];
    let input = PolarizedState::input_h(3, 0).unwrap();
    for &r1 in &r1_grid {
        let t1 = (1.0f64 - r1 * r1).sqrt();
        for &th in &theta_grid {
            let one_m = 1.0 - th * th;
            let cases = [
                (NmziPosition::P1, 4.0 * r1 * r1 / one_m),
                (NmziPosition::P2, 4.0 * t1 * t1 / one_m),
                (NmziPosition::P3, 0.0),
                (NmziPosition::P4, 2.0 * t1 * t1 / one_m),
                (NmziPosition::P5, 2.0 * t1 * t1 / one_m),
            ];
            for (pos, want) in cases {
                let c = nmzi(Coefficients::from_r(r1), Coefficients::from_r(0.55), pos);
                let f = fisher(&c, &input, th, &OutcomeSet::All).unwrap();
                let scale = want.max(1e-9);
                assert!(
                    (f.value - want).abs() / scale <= 1e-9,
                    "{pos:?} r1={r1} th={th}: {} vs {want}",
                    f.value
                );
            }
        }
    }
}

#[test]
fn scenario_shannon_scaling() {
    let input = PolarizedState::input_h(3, 0).unwrap();
    let prior = PriorSpec::uniform_theta();
    for &r1 in &[0.3, 0.7, 0.9] {
        let t1 = (1.0f64 - r1 * r1).sqrt();
        let c1 = nmzi(Coefficients::from_r(r1), Coefficients::from_r(0.55), NmziPosition::P1);
        let h1 = shannon_mi(&c1, &input, &prior, 256).unwrap();
        assert!((h1.value - H_FREE * r1 * r1).abs() < 1e-6, "pos1 r1={r1}: {}", h1.value);
        let c2 = nmzi(Coefficients::from_r(r1), Coefficients::from_r(0.55), NmziPosition::P2);
        let h2 = shannon_mi(&c2, &input, &prior, 256).unwrap();
        assert!((h2.value - H_FREE * t1 * t1).abs() < 1e-6, "pos2 r1={r1}: {}", h2.value);
        let c3 = nmzi(Coefficients::from_r(r1), Coefficients::from_r(0.55), NmziPosition::P3);
        let h3 = shannon_mi(&c3, &input, &prior, 256).unwrap();
        assert!(h3.value.abs() < 1e-10, "pos3: {}", h3.value);
        assert!(h3.value > -1e-10, "non-negativity");
    }
}

#[test]
fn quadrature_converges_on_all_scenarios() {
    let input = PolarizedState::input_h(3, 0).unwrap();
    let prior = PriorSpec::uniform_theta();
    for pos in 0..=5 {
        let c = nmzi(
            Coefficients::from_r(0.8),
            Coefficients::from_r(0.55),
            NmziPosition::from_index(pos).unwrap(),
        );
        let h = shannon_mi(&c, &input, &prior, 256).unwrap();
        assert!(
            h.quadrature_delta < 1e-8,
            "position {pos}: doubling the nodes moved H by {:e}",
            h.quadrature_delta
        );
        assert!(!h.quadrature_warning);
    }
}

#[test]
fn restricting_outcomes_never_increases_shannon() {
    // Data-processing check: lump all outcomes but the sender's into one
    // event and compare. The lumped distribution is realized by an
    // equivalent two-outcome family evaluated through the same quadrature.
    let input = PolarizedState::input_h(3, 0).unwrap();
    let prior = PriorSpec::uniform_theta();
    for pos in 1..=5 {
        let c = nmzi(
            Coefficients::from_r(0.8),
            Coefficients::from_r(0.55),
            NmziPosition::from_index(pos).unwrap(),
        );
        let full = shannon_mi(&c, &input, &prior, 256).unwrap().value;
        let restricted = shannon_restricted_oracle(&c, &input, &[0, 3], 256);
        assert!(
            restricted <= full + 1e-9,
            "pos {pos}: restricted {restricted} > full {full}"
        );
        assert!(restricted >= -1e-10);
    }
}

/// Quadrature of the coarse-grained mutual information: the kept outcomes
/// individually plus everything else lumped into a single negative event.
/// Independent of the library quadrature (plain midpoint rule, fine grid).
fn shannon_restricted_oracle(c: &Circuit, input: &PolarizedState, keep: &[usize], n: usize) -> f64 {
    let m = 64 * n;
    let dim = 2 * c.n_paths();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for k in 0..m {
        let th = -1.0 + (k as f64 + 0.5) * (2.0 / m as f64);
        let out = c.evolve(input, th).unwrap();
        let probs: Vec<f64> = out.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let lump = 1.0 - keep.iter().map(|&i| probs[i]).sum::<f64>();
        let mut row: Vec<f64> = keep.iter().map(|&i| probs[i]).collect();
        row.push(lump);
        debug_assert_eq!(row.len(), keep.len() + 1);
        let _ = dim;
        rows.push(row);
    }
    let w = 1.0 / m as f64; // includes the 1/2 prior times dtheta = 2/m
    let k_outcomes = keep.len() + 1;
    let mut h = 0.0;
    for i in 0..k_outcomes {
        let p_bar: f64 = rows.iter().map(|r| w * r[i]).sum();
        if p_bar <= 0.0 {
            continue;
        }
        for r in &rows {
            if r[i] > 0.0 {
                h += w * r[i] * (r[i] / p_bar).log2();
            }
        }
    }
    h
}

#[test]
fn mle_variance_respects_cramer_rao() {
    // Free rotator at a fixed tagging angle; photon-count estimator
    // theta_hat = sqrt(k / n). Sample variance over replicates must respect
    // Var >= 1 / (shots * F) within 3-sigma sampling slack.
    use rand_distr::{Binomial, Distribution};
    let theta = 0.3f64;
    let shots = 100_000u64;
    let replicates = 400usize;
    let c = free_rotator();
    let input = PolarizedState::input_h(1, 0).unwrap();
    let f = fisher(&c, &input, theta, &OutcomeSet::All).unwrap().value;
    let crb = 1.0 / (shots as f64 * f);
    let mut rng = ChaCha8Rng::seed_from_u64(0xc4a0);
    let bin = Binomial::new(shots, theta * theta).unwrap();
    let estimates: Vec<f64> = (0..replicates)
        .map(|_| ((bin.sample(&mut rng) as f64) / shots as f64).sqrt())
        .collect();
    let mean = estimates.iter().sum::<f64>() / replicates as f64;
    let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (replicates as f64 - 1.0);
    let slack = 3.0 * (2.0 / (replicates as f64 - 1.0)).sqrt();
    assert!(
        var >= crb * (1.0 - slack),
        "sample variance {var:e} below CRB {crb:e} beyond sampling error"
    );
    assert!(var <= crb * (1.0 + slack) * 1.2, "variance {var:e} implausibly far above CRB {crb:e}");
}

#[test]
fn inner_closed_form_matches_diagonal_prior_quadrature() {
    let prior = PriorSpec::uniform_diagonal();
    for &t1 in &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let r1 = (1.0f64 - t1 * t1).sqrt();
        let c = nmzi(Coefficients::from_r(r1), Coefficients::from_t(r1), NmziPosition::P4);
        let input = PolarizedState::input_h(3, 0).unwrap();
        let h = shannon_mi(&c, &input, &prior, 256).unwrap();
        let want = shannon_closed_inner(t1);
        assert!(
            (h.value - want).abs() <= 1e-6,
            "t1 = {t1}: quadrature {} vs closed {want}",
            h.value
        );
    }
}

#[test]
fn inner_closed_form_does_not_match_theta_prior() {
    // The adjudication of the prior question: under the uniform-theta prior
    // the same device disagrees with the closed form by orders more than the
    // acceptance tolerance, so the closed form lives in the diagonal prior.
    let t1 = 0.5f64;
    let r1 = (1.0 - t1 * t1).sqrt();
    let c = nmzi(Coefficients::from_r(r1), Coefficients::from_t(r1), NmziPosition::P4);
    let input = PolarizedState::input_h(3, 0).unwrap();
    let h = shannon_mi(&c, &input, &PriorSpec::uniform_theta(), 256).unwrap();
    let closed = shannon_closed_inner(t1);
    assert!(
        (h.value - closed).abs() > 0.05,
        "theta-prior H {} unexpectedly matches the closed form {closed}",
        h.value
    );
}

#[test]
fn closed_form_special_values() {
    assert_eq!(shannon_closed_inner(0.0), 0.0);
    let want_one = (3.0 * LN3 + LN2 - 3.0) / (3.0 * LN2);
    assert!((shannon_closed_inner(1.0) - want_one).abs() < 1e-14);
    let a2 = (-3.0 + LN2 + 3.0 * LN3) / (3.0 * LN2);
    assert!((a2 - 0.475600793166).abs() < 1e-10);
    assert!((shannon_taylor(0.2) - a2 * 0.04).abs() < 1e-15);
}

#[test]
fn approximant_error_levels() {
    let mse_pade: f64 = (0..=400)
        .map(|i| {
            let t1 = i as f64 / 400.0;
            let d = shannon_pade(t1) - shannon_closed_inner(t1);
            d * d
        })
        .sum::<f64>()
        / 401.0;
    assert!(
        mse_pade > 2.8e-10 && mse_pade < 2.8e-8,
        "Pade MSE {mse_pade:e} not within an order of magnitude of 2.8e-9"
    );
    let mse_taylor: f64 = (0..=400)
        .map(|i| {
            let t1 = 0.4 * i as f64 / 400.0;
            let d = shannon_taylor(t1) - shannon_closed_inner(t1);
            d * d
        })
        .sum::<f64>()
        / 401.0;
    assert!(
        mse_taylor > 3.1e-9 && mse_taylor < 3.1e-7,
        "Taylor MSE {mse_taylor:e} not within an order of magnitude of 3.1e-8"
    );
}

#[test]
fn closed_form_rejects_unsupported_configurations() {
    use mzisim::circuit::{Absorber, BeamSplitter, Element, Rotator};
    use mzisim::info::InfoError;
    let input = PolarizedState::input_h(2, 0).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Second rotator alongside the bound one.
    let two_rotators = Circuit::new(
        2,
        vec![
            Element::Rotator(Rotator { path: 0, theta: 0.0 }),
            Element::Rotator(Rotator { path: 1, theta: 0.2 }),
        ],
        vec![0],
    )
    .unwrap();
    assert!(matches!(
        fisher_closed_single_rotator(&two_rotators, 0, 0.1, &input),
        Err(InfoError::UnsupportedConfiguration(_))
    ));
    // Absorber present.
    let lossy = Circuit::new(
        2,
        vec![
            Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: h, t: h }),
            Element::Rotator(Rotator { path: 0, theta: 0.0 }),
            Element::Absorber(Absorber { path: 1 }),
        ],
        vec![1],
    )
    .unwrap();
    assert!(matches!(
        fisher_closed_single_rotator(&lossy, 1, 0.1, &input),
        Err(InfoError::UnsupportedConfiguration(_))
    ));
    // Input without a common phase across spatial components.
    let ok_circuit = Circuit::new(
        2,
        vec![
            Element::BeamSplitter(BeamSplitter { path_a: 0, path_b: 1, r: h, t: h }),
            Element::Rotator(Rotator { path: 0, theta: 0.0 }),
        ],
        vec![1],
    )
    .unwrap();
    let mixed_phase = PolarizedState::from_amplitudes(
        2,
        vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    assert!(matches!(
        fisher_closed_single_rotator(&ok_circuit, 1, 0.1, &mixed_phase),
        Err(InfoError::UnsupportedConfiguration(_))
    ));
    // The same circuit with a common-phase input is accepted.
    assert!(fisher_closed_single_rotator(&ok_circuit, 1, 0.1, &input).is_ok());
}

#[test]
fn fisher_all_equals_unrestricted_formula_on_unitary_circuits() {
    // With every outcome kept and no absorption the remainder term vanishes
    // and the value equals the plain sum, cross-checked per-outcome against
    // the finite-difference oracle.
    let c = nmzi(Coefficients::from_r(0.8), Coefficients::from_r(0.55), NmziPosition::P4);
    let input = PolarizedState::input_h(3, 0).unwrap();
    let th = 0.3;
    let f = fisher(&c, &input, th, &OutcomeSet::All).unwrap();
    assert_eq!(f.remainder_term, 0.0);
    let fd = common::fd_fisher_all(&c, &input, th, 1e-5);
    assert!((f.value - fd).abs() / f.value < 1e-6, "{} vs {fd}", f.value);
}

#[test]
fn restricted_fisher_matches_fd_oracle() {
    let c = nmzi(Coefficients::from_r(0.8), Coefficients::from_r(0.55), NmziPosition::P4);
    let input = PolarizedState::input_h(3, 0).unwrap();
    let th = 0.2;
    let subset = vec![0usize, 3];
    let f = fisher(&c, &input, th, &OutcomeSet::Restricted(subset.clone())).unwrap();
    let fd = common::fd_fisher_restricted(&c, &input, th, &subset, 1e-5);
    assert!((f.value - fd).abs() / f.value.max(1e-12) < 1e-6, "{} vs {fd}", f.value);
}
