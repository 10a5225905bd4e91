//! Acceptance criteria A1–A10. Prints one line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lrphase::claims::{
    adiabatic_certificate, adiabatic_point, check_dynamical_differ, check_invariants_differ,
    check_propagator_identical, check_recurrent_differ, check_total_phase_equal,
    dynamical_gap_formula, ADIABATIC_OMEGAS,
};
use lrphase::linalg::{angle_gap, fidelity, global_phase_distance};
use lrphase::model::{identical_invariant_conjugate, invariant_residual, invariant_residual_fd};
use lrphase::phases::{cyclic_states, loop_phases};
use lrphase::propagation::{analytic_loop_propagator, numeric_propagator, sequence_propagator};
use lrphase::{Branch, LoopSpec, PulseAxis, SequenceElement, SequenceSpec, Spin, TwoQubitSpec};
use lrphase_cli::SWEEP_HEADER;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

/// Id, title, check, time budget in seconds.
type Criterion = (&'static str, &'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p1() -> LoopSpec {
    LoopSpec::new(1.5, 1.0, 0.0, 1.0).unwrap()
}

fn q1() -> TwoQubitSpec {
    TwoQubitSpec::new(p1(), 0.0, 0.4).unwrap()
}

/// 10×10 grid, ω_z ∈ [−3, 3], ω₁ ∈ [0, 3], ω = 1.
fn grid() -> Vec<LoopSpec> {
    let axis = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / 9.0;
    (0..10)
        .flat_map(|i| {
            (0..10).map(move |j| {
                LoopSpec::new(axis(-3.0, 3.0, i), axis(0.0, 3.0, j), 0.0, 1.0).unwrap()
            })
        })
        .collect()
}

fn nondegenerate_grid() -> Vec<LoopSpec> {
    grid()
        .into_iter()
        .filter(|l| l.omega_eff() >= 1e-6)
        .collect()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn a1() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in grid() {
        let t = l.period();
        let u = numeric_propagator(&l, t, 4096)
            .map_err(|e| e.to_string())?
            .unitary;
        worst = worst.max(1.0 - fidelity(&analytic_loop_propagator(&l, t), &u));
    }
    ensure(worst <= 1e-9, || {
        format!("worst fidelity deficit {worst:.3e}")
    })?;
    Ok(format!(
        "100 grid points, worst fidelity deficit {worst:.2e}"
    ))
}

fn a2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_fd) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let w = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let l = LoopSpec::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-PI..PI),
            w,
        )
        .unwrap();
        for _ in 0..10 {
            let t = rng.gen_range(-50.0..50.0);
            worst = worst.max(invariant_residual(&l, t));
            worst_fd = worst_fd.max(invariant_residual_fd(&l, t, 1e-4));
        }
    }
    ensure(worst <= 1e-12, || format!("analytic residual {worst:.3e}"))?;
    ensure(worst_fd <= 1e-7, || {
        format!("finite-difference residual {worst_fd:.3e}")
    })?;
    Ok(format!(
        "1000 loops x 10 times, residual {worst:.2e} analytic, {worst_fd:.2e} finite-difference"
    ))
}

fn a3() -> Outcome {
    let mut worst: f64 = 0.0;
    let points = nondegenerate_grid();
    for l in &points {
        let (plus, minus) = cyclic_states(l).map_err(|e| e.to_string())?;
        worst = worst.max(plus.cyclicity_defect).max(minus.cyclicity_defect);
    }
    ensure(worst <= 1e-10, || {
        format!("worst cyclicity defect {worst:.3e}")
    })?;
    Ok(format!(
        "{} grid points (Omega >= 1e-6), worst cyclicity defect {worst:.2e}",
        points.len()
    ))
}

fn a4() -> Outcome {
    let (mut sum_err, mut solid_err) = (0.0f64, 0.0f64);
    for l in nondegenerate_grid() {
        for branch in [Branch::Plus, Branch::Minus] {
            let r = loop_phases(&l, branch).map_err(|e| e.to_string())?;
            sum_err = sum_err.max(angle_gap(
                r.total_wrapped,
                r.dynamical_unwrapped + r.geometric_wrapped,
            ));
            solid_err = solid_err.max(angle_gap(r.geometric_wrapped, r.solid_angle_check));
        }
    }
    ensure(sum_err <= 1e-10, || {
        format!("total vs dynamical + geometric {sum_err:.3e}")
    })?;
    ensure(solid_err <= 1e-5, || {
        format!("solid angle vs geometric {solid_err:.3e}")
    })?;
    let r = loop_phases(&p1(), Branch::Plus).map_err(|e| e.to_string())?;
    let got = [r.total_wrapped, r.dynamical_unwrapped, r.geometric_wrapped];
    let want = [-0.370_814_8, -4.917_370_4, -1.736_629_6];
    for (g, w) in got.iter().zip(want) {
        ensure((g - w).abs() <= 1e-6, || format!("P1 phase {g} vs {w}"))?;
    }
    Ok(format!(
        "decomposition {sum_err:.1e}, solid angle {solid_err:.1e}, P1 = ({:.7}, {:.7}, {:.7})",
        got[0], got[1], got[2]
    ))
}

fn a5() -> Outcome {
    let (mut entry, mut total) = (0.0f64, 0.0f64);
    let points = nondegenerate_grid();
    for l in &points {
        let c2 = check_propagator_identical(l).map_err(|e| e.to_string())?;
        let c1 = check_total_phase_equal(l).map_err(|e| e.to_string())?;
        entry = entry.max(c2.get("entry_max_diff").unwrap());
        total = total
            .max(c1.get("gap_plus").unwrap())
            .max(c1.get("gap_minus").unwrap());
        ensure(c1.passed() && c2.passed(), || {
            format!("claim failed at {l:?}")
        })?;
    }
    ensure(entry <= 1e-10, || {
        format!("propagator entry gap {entry:.3e}")
    })?;
    ensure(total <= 1e-8, || format!("total phase gap {total:.3e}"))?;
    Ok(format!(
        "{} grid points, propagator gap {entry:.1e}, total phase gap {total:.1e}",
        points.len()
    ))
}

fn a6() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in nondegenerate_grid()
        .into_iter()
        .filter(|l| l.detuning() != 0.0)
    {
        let r = check_dynamical_differ(&l).map_err(|e| e.to_string())?;
        worst = worst.max((r.get("gap").unwrap() - dynamical_gap_formula(&l)).abs());
        let expected = -TAU * l.omega().signum() * l.detuning() / l.omega_eff();
        worst = worst.max((r.get("gap").unwrap() - expected).abs());
    }
    ensure(worst <= 1e-8, || format!("gap vs formula {worst:.3e}"))?;
    let gap = check_dynamical_differ(&p1())
        .map_err(|e| e.to_string())?
        .get("gap")
        .unwrap();
    ensure((gap - (-2.809_925_9)).abs() <= 1e-6, || {
        format!("P1 gap {gap}")
    })?;
    Ok(format!(
        "formula error {worst:.1e} on grid, P1 gap {gap:.7}"
    ))
}

fn a7() -> Outcome {
    let slow = LoopSpec::new(1.5, 1.0, 0.0, 0.01).unwrap();
    let mut worst: f64 = 0.0;
    for l in grid().into_iter().chain([p1(), slow]) {
        let r = check_invariants_differ(&l);
        worst = worst.max((r.get("gap_max").unwrap() - l.omega().abs() * SQRT_2).abs());
    }
    ensure(worst <= 1e-8, || {
        format!("invariant gap vs |omega|sqrt2 {worst:.3e}")
    })?;
    let fast = check_recurrent_differ(&p1())
        .map_err(|e| e.to_string())?
        .get("overlap_deficit")
        .unwrap();
    let adiabatic = check_recurrent_differ(&slow)
        .map_err(|e| e.to_string())?
        .get("overlap_deficit")
        .unwrap();
    ensure(fast > 1e-6, || format!("P1 overlap deficit {fast:.3e}"))?;
    ensure(adiabatic <= 1e-4, || {
        format!("slow-loop overlap deficit {adiabatic:.3e}")
    })?;
    Ok(format!("invariant gap error {worst:.1e}, overlap deficit {fast:.4} at P1, {adiabatic:.1e} at omega=0.01"))
}

fn a8() -> Outcome {
    let c = p1();
    let c_bar = identical_invariant_conjugate(&c);
    let spec = q1();
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
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len = rng.gen_range(1..=8);
        let seq =
            SequenceSpec::new((0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect()).unwrap();
        let g = sequence_propagator(&spec, &seq).map_err(|e| e.to_string())?;
        let h = sequence_propagator(&spec, &seq.with_conjugates_replaced(&c))
            .map_err(|e| e.to_string())?;
        worst = worst.max(global_phase_distance(&g, &h).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-8, || {
        format!("replacement distance {worst:.3e}")
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fresh = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_lrphase"))
        .args(["gate-report", "--config"])
        .arg(repo_root().join("configs/q1.json"))
        .arg("--out")
        .arg(&fresh)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || {
        format!("gate-report exited with {status}")
    })?;
    let archived_path = repo_root().join("docs/default-sequence-report.json");
    let archived: Value =
        serde_json::from_str(&fs::read_to_string(&archived_path).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let fresh: Value =
        serde_json::from_str(&fs::read_to_string(&fresh).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let drift = json_drift(&archived, &fresh)?;
    ensure(drift <= 1e-9, || {
        format!("archived gate report drifted by {drift:.3e}")
    })?;
    let d = fresh["report"]["replacement_distance"]
        .as_f64()
        .unwrap_or(f64::NAN);
    ensure(d <= 1e-10, || {
        format!("default sequence replacement distance {d:.3e}")
    })?;
    Ok(format!("100 random sequences, worst replacement distance {worst:.1e}; archived default report matches"))
}

/// Largest numeric difference between two JSON trees of the same shape.
fn json_drift(a: &Value, b: &Value) -> Result<f64, String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            Ok((x.as_f64().unwrap() - y.as_f64().unwrap()).abs())
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .try_fold(0.0f64, |m, (p, q)| Ok(m.max(json_drift(p, q)?))),
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => {
            x.iter().try_fold(0.0f64, |m, (k, p)| {
                let q = y.get(k).ok_or_else(|| format!("missing key {k}"))?;
                Ok(m.max(json_drift(p, q)?))
            })
        }
        _ if a == b => Ok(0.0),
        _ => Err(format!("shape mismatch: {a} vs {b}")),
    }
}

fn a9() -> Outcome {
    let l = p1();
    let points: Vec<_> = ADIABATIC_OMEGAS
        .iter()
        .map(|w| adiabatic_point(&l, *w))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst = [0.0f64; 3];
    for pair in points.windows(2) {
        let (big, small) = (&pair[0], &pair[1]);
        let ratios = [
            small.dynamical_gap / big.dynamical_gap,
            small.geometric_sum / big.geometric_sum,
            small.berry_error / big.berry_error,
        ];
        for (slot, r) in worst.iter_mut().zip(ratios) {
            *slot = slot.max(r);
        }
    }
    ensure(worst.iter().all(|r| *r <= 0.5 * 1.25), || {
        format!("halving ratios {worst:?}")
    })?;
    let cert = adiabatic_certificate(&l, &ADIABATIC_OMEGAS).map_err(|e| e.to_string())?;
    ensure(cert.passed(), || {
        format!("certificate failed: {:?}", cert.measured)
    })?;
    Ok(format!(
        "worst halving ratios d_gap {:.3}, g_sum {:.3}, b_err {:.3} (limit 0.625)",
        worst[0], worst[1], worst[2]
    ))
}

fn a10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_lrphase");
    let code = |args: &[&std::ffi::OsStr]| -> Result<Option<i32>, String> {
        Command::new(bin)
            .args(args)
            .output()
            .map(|o| o.status.code())
            .map_err(|e| e.to_string())
    };
    let configs = repo_root().join("configs");
    let verify = |cfg: &Path| {
        code(&[
            "verify-claims".as_ref(),
            "--config".as_ref(),
            cfg.as_os_str(),
        ])
    };

    let reference = verify(&configs.join("q1.json"))?;
    ensure(reference == Some(0), || {
        format!("reference config exited {reference:?}")
    })?;
    let perturbed = verify(&configs.join("q1_perturbed_conjugate.json"))?;
    ensure(perturbed == Some(1), || {
        format!("perturbed conjugate exited {perturbed:?}")
    })?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"system": {"loop": {"omega_z": 1.5, "omega_1": 1, "omega": 0}}}"#,
    )
    .map_err(|e| e.to_string())?;
    let malformed = verify(&bad)?;
    ensure(malformed == Some(2), || {
        format!("malformed config exited {malformed:?}")
    })?;
    let missing = verify(&dir.path().join("absent.json"))?;
    ensure(missing == Some(2), || {
        format!("missing config exited {missing:?}")
    })?;

    let out = Command::new(bin)
        .args(["sweep", "--config"])
        .arg(configs.join("adiabatic_sweep.json"))
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let header = text.lines().next().unwrap_or_default();
    let expected = "omega,omega_z,omega_1,delta,Omega_eff,phi_total_plus,phi_dyn_plus,phi_geo_plus,phi_total_minus,phi_dyn_minus,phi_geo_minus,pair_dyn_gap,pair_geo_sum,berry_ref,solid_angle_check";
    ensure(header == expected && header == SWEEP_HEADER, || {
        format!("header {header:?}")
    })?;
    Ok("exit codes 0/1/2/2, CSV header bit-exact".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("A1", "propagator oracle agreement", a1, 5),
        ("A2", "invariant equation residual", a2, 2),
        ("A3", "recurrence of invariant eigenstates", a3, 2),
        ("A4", "phase decomposition", a4, 3),
        ("A5", "C1/C2 identical propagators and total phases", a5, 3),
        ("A6", "C3 dynamical phase gap", a6, 2),
        ("A7", "C4/C5 invariants and recurrent bases differ", a7, 2),
        (
            "A8",
            "C6 replacement invariance and archived gate report",
            a8,
            10,
        ),
        ("A9", "C7 adiabatic contrast halving", a9, 30),
        ("A10", "CLI contract", a10, 5),
    ];
    let mut failures = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("{id:<4} PASS {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failures += 1;
                println!("{id:<4} FAIL {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
