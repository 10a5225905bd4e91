//! Deterministic checks over the 10×10 (ω_z, ω₁) grid at ω = 1.

use lrphase::claims::{
    check_dynamical_differ, check_invariants_differ, check_propagator_identical,
    check_sequence_global, check_total_phase_equal, dynamical_gap_formula,
};
use lrphase::linalg::{fidelity, global_phase_distance};
use lrphase::model::identical_invariant_conjugate;
use lrphase::phases::{cyclic_states, expectation_track, loop_phases};
use lrphase::propagation::{
    analytic_loop_propagator, loop_cycle_propagator, numeric_propagator, richardson_propagator,
    sequence_propagator,
};
use lrphase::{Branch, LoopSpec, PulseAxis, SequenceElement, SequenceSpec, Spin, TwoQubitSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> impl Iterator<Item = LoopSpec> {
    let axis = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / 9.0;
    (0..10).flat_map(move |i| {
        (0..10)
            .map(move |j| LoopSpec::new(axis(-3.0, 3.0, i), axis(0.0, 3.0, j), 0.0, 1.0).unwrap())
    })
}

fn nondegenerate() -> impl Iterator<Item = LoopSpec> {
    grid().filter(|l| l.omega_eff() >= 1e-6)
}

#[test]
fn analytic_and_numeric_propagators_agree() {
    for l in grid() {
        let t = l.period();
        let numeric = numeric_propagator(&l, t, 4096).unwrap();
        assert!(fidelity(&analytic_loop_propagator(&l, t), &numeric.unitary) >= 1.0 - 1e-9);
    }
}

#[test]
fn conjugate_propagators_agree_numerically() {
    for l in grid() {
        let c = identical_invariant_conjugate(&l);
        assert!(loop_cycle_propagator(&l).max_abs_diff(&loop_cycle_propagator(&c)) <= 1e-12);
        let u = richardson_propagator(&l, l.period(), 10_000)
            .unwrap()
            .unitary;
        let v = richardson_propagator(&c, c.period(), 10_000)
            .unwrap()
            .unitary;
        assert!(global_phase_distance(&u, &v).unwrap() <= 1e-8);
    }
}

#[test]
fn eigenstates_of_the_initial_invariant_recur() {
    for l in nondegenerate() {
        let (plus, minus) = cyclic_states(&l).unwrap();
        assert!(
            plus.cyclicity_defect <= 1e-10 && minus.cyclicity_defect <= 1e-10,
            "{l:?}"
        );
    }
}

#[test]
fn energy_is_constant_along_recurrent_states() {
    for l in nondegenerate() {
        let (plus, minus) = cyclic_states(&l).unwrap();
        for (branch, state) in [(Branch::Plus, plus.state), (Branch::Minus, minus.state)] {
            let track = expectation_track(&l, &state, 64).unwrap();
            let mean = track.iter().sum::<f64>() / track.len() as f64;
            let variance =
                track.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / track.len() as f64;
            assert!(variance <= 1e-16, "{variance}");
            let r = loop_phases(&l, branch).unwrap();
            assert!((r.dynamical_unwrapped + l.duration() * track[0]).abs() <= 1e-10);
        }
    }
}

#[test]
fn claims_one_through_four_hold_on_the_grid() {
    for l in nondegenerate() {
        assert!(check_total_phase_equal(&l).unwrap().passed(), "{l:?}");
        assert!(check_propagator_identical(&l).unwrap().passed(), "{l:?}");
        if l.detuning() != 0.0 {
            let r = check_dynamical_differ(&l).unwrap();
            assert!((r.get("gap").unwrap() - dynamical_gap_formula(&l)).abs() <= 1e-8);
        }
    }
    for l in grid() {
        assert!(check_invariants_differ(&l).passed(), "{l:?}");
    }
}

#[test]
fn replacement_invariance_on_random_sequences() {
    let c = LoopSpec::new(1.5, 1.0, 0.0, 1.0).unwrap();
    let c_bar = identical_invariant_conjugate(&c);
    let spec = TwoQubitSpec::new(c, 0.0, 0.4).unwrap();
    let alphabet = [
        SequenceElement::Loop(c),
        SequenceElement::Loop(c_bar),
        SequenceElement::PiPulse {
            target: Spin::A,
            axis: PulseAxis::X,
        },
        SequenceElement::PiPulse {
            target: Spin::B,
            axis: PulseAxis::X,
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let len = rng.gen_range(1..=8);
        let elements = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        let seq = SequenceSpec::new(elements).unwrap();
        let replaced = seq.with_conjugates_replaced(&c);
        let d = global_phase_distance(
            &sequence_propagator(&spec, &seq).unwrap(),
            &sequence_propagator(&spec, &replaced).unwrap(),
        )
        .unwrap();
        assert!(d <= 1e-8, "{d}");
        assert!(check_sequence_global(&spec, &seq).unwrap().passed());
    }
}
