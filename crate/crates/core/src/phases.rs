//! Cyclic states and their phase decomposition.
//!
//! The eigenvectors of `I(0)` return to themselves after every period. For
//! such a state the total phase `arg⟨ψ(0)|U(nT)|ψ(0)⟩` splits into a dynamical
//! part `−∫⟨H⟩dt` and a geometric remainder. The geometric part is
//! cross-checked against `−½∮(1 − cos Θ) dφ` over the Bloch trajectory.
//!
//! Sign convention: the dynamical phase is `−∫⟨ψ|H|ψ⟩ dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{principal_angle, Ket2, Mat2};
use crate::model::{hamiltonian_at, invariant_at, LoopSpec};
use crate::propagation::{analytic_loop_propagator, loop_cycle_propagator};

/// Below this Ω the invariant is treated as the null operator.
pub const DEGENERATE_OMEGA: f64 = 1e-12;

/// Largest cyclicity defect for which a state counts as recurrent.
pub const MAX_CYCLICITY_DEFECT: f64 = 1e-9;

const SIMPSON_INTERVALS_PER_PERIOD: usize = 128;
const SIMPSON_TOL: f64 = 1e-11;
const SIMPSON_MAX_DOUBLINGS: u32 = 10;
const SOLID_ANGLE_SAMPLES_PER_PERIOD: usize = 1024;
const BOUNDARY_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicState {
    pub state: Ket2,
    /// ±Ω/2.
    pub invariant_eigenvalue: f64,
    /// `1 − |⟨ψ(0)|U(nT)|ψ(0)⟩|`.
    pub cyclicity_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub total_wrapped: f64,
    pub total_unwrapped: f64,
    pub dynamical_unwrapped: f64,
    pub geometric_wrapped: f64,
    /// Unwrapped `−½∮(1 − cos Θ) dφ` of the Bloch trajectory.
    pub solid_angle_check: f64,
    /// Adiabatic Berry phase of the field direction itself,
    /// `−sgn(ω)·n·π(1 − ω_z/√(ω_z² + ω₁²))`.
    pub berry_reference: f64,
    pub cyclicity_defect: f64,
}

/// Both recurrent states `(+Ω/2, −Ω/2)` of the loop.
pub fn cyclic_states(l: &LoopSpec) -> Result<(CyclicState, CyclicState)> {
    Ok((
        cyclic_state(l, Branch::Plus)?,
        cyclic_state(l, Branch::Minus)?,
    ))
}

pub fn cyclic_state(l: &LoopSpec, branch: Branch) -> Result<CyclicState> {
    let omega_eff = l.omega_eff();
    if omega_eff <= DEGENERATE_OMEGA {
        return Err(Error::DegenerateInvariant { omega_eff });
    }
    let i0 = invariant_at(l, 0.0).invariant;
    let state = phase_fixed(bloch_eigenvector(i0.cx, i0.cy, i0.cz, branch));
    let u = loop_cycle_propagator(l);
    Ok(CyclicState {
        state,
        invariant_eigenvalue: 0.5 * branch.sign() * omega_eff,
        cyclicity_defect: cyclicity_defect(&u, &state),
    })
}

/// Eigenvector of `n·σ` for eigenvalue `±|n|`, built from the polar angles so
/// that neither pole loses precision.
fn bloch_eigenvector(nx: f64, ny: f64, nz: f64, branch: Branch) -> Ket2 {
    let rho = nx.hypot(ny);
    let theta = rho.atan2(nz);
    let (s, c) = (0.5 * theta).sin_cos();
    let azimuth = if rho > 0.0 {
        Complex64::new(nx / rho, ny / rho)
    } else {
        Complex64::new(1.0, 0.0)
    };
    match branch {
        Branch::Plus => Ket2::from([Complex64::new(c, 0.0), azimuth * s]),
        Branch::Minus => Ket2::from([Complex64::new(s, 0.0), -azimuth * c]),
    }
}

/// Rotates the global phase so the first nonzero amplitude is real positive.
fn phase_fixed(k: Ket2) -> Ket2 {
    let lead =
        k.0.iter()
            .copied()
            .find(|z| z.norm() > 1e-15)
            .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = lead.conj() / lead.norm();
    Ket2::from(k.0.map(|z| z * rot))
}

fn cyclicity_defect(u: &Mat2, state: &Ket2) -> f64 {
    1.0 - state.inner(&u.apply(state)).norm()
}

pub fn loop_phases(l: &LoopSpec, which: Branch) -> Result<PhaseReport> {
    let cs = cyclic_state(l, which)?;
    phases_for_state(l, &cs.state)
}

/// Phase decomposition of `l` evaluated on a caller-chosen initial state,
/// which must be recurrent for `l`.
pub fn phases_for_state(l: &LoopSpec, state: &Ket2) -> Result<PhaseReport> {
    let state = state.normalized()?;
    let u = loop_cycle_propagator(l);
    let amplitude = state.inner(&u.apply(&state));
    let defect = 1.0 - amplitude.norm();
    if defect > MAX_CYCLICITY_DEFECT {
        return Err(Error::NonCyclic { defect });
    }
    let total_wrapped = principal_angle(amplitude.arg());

    let (energy_integral, polarization_integral) = trajectory_integrals(l, &state);
    let dynamical_unwrapped = -energy_integral;
    // Connection i⟨u|u̇⟩ = (ω/2)⟨σz⟩ in the gauge u(t) = exp(−iωtσz/2)u(0),
    // plus the frame's closure phase −ω·nT/2.
    let duration = l.duration();
    let geometric_unwrapped = 0.5 * l.omega() * (polarization_integral - duration);

    Ok(PhaseReport {
        total_wrapped,
        total_unwrapped: dynamical_unwrapped + geometric_unwrapped,
        dynamical_unwrapped,
        geometric_wrapped: wrap_snapped(total_wrapped - dynamical_unwrapped),
        solid_angle_check: solid_angle(l, &state),
        berry_reference: berry_reference(l),
        cyclicity_defect: defect,
    })
}

/// `principal_angle`, with values within rounding of −π sent to +π.
fn wrap_snapped(x: f64) -> f64 {
    let r = principal_angle(x);
    if r <= -PI + BOUNDARY_SNAP {
        PI
    } else {
        r
    }
}

/// `(∫⟨H⟩dt, ∫⟨σz⟩dt)` over `[0, nT]`, composite Simpson starting at 129
/// points per period and doubled until both integrals settle.
fn trajectory_integrals(l: &LoopSpec, state: &Ket2) -> (f64, f64) {
    let duration = l.duration();
    let sigma_z = Mat2::sigma_z();
    let sample = |t: f64| {
        let psi = analytic_loop_propagator(l, t).apply(state);
        (
            psi.expectation(&hamiltonian_at(l, t).matrix()),
            psi.expectation(&sigma_z),
        )
    };
    let mut intervals = SIMPSON_INTERVALS_PER_PERIOD * l.n_periods() as usize;
    let mut previous = simpson(&sample, duration, intervals);
    for _ in 0..SIMPSON_MAX_DOUBLINGS {
        intervals *= 2;
        let current = simpson(&sample, duration, intervals);
        let settled = |a: f64, b: f64| (a - b).abs() < SIMPSON_TOL * a.abs().max(1.0);
        let done = settled(current.0, previous.0) && settled(current.1, previous.1);
        previous = current;
        if done {
            break;
        }
    }
    previous
}

fn simpson(f: &impl Fn(f64) -> (f64, f64), length: f64, intervals: usize) -> (f64, f64) {
    debug_assert!(intervals.is_multiple_of(2));
    let h = length / intervals as f64;
    let mut acc = (0.0, 0.0);
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (a, b) = f(k as f64 * h);
        acc.0 += w * a;
        acc.1 += w * b;
    }
    (acc.0 * h / 3.0, acc.1 * h / 3.0)
}

/// `−½ Σ (1 − cos Θ) Δφ` along the sampled Bloch trajectory, with the
/// azimuth unwrapped step by step. Steps touching a pole are skipped.
fn solid_angle(l: &LoopSpec, state: &Ket2) -> f64 {
    let samples = SOLID_ANGLE_SAMPLES_PER_PERIOD * l.n_periods() as usize;
    let h = l.duration() / samples as f64;
    let bloch_at = |k: usize| {
        analytic_loop_propagator(l, k as f64 * h)
            .apply(state)
            .bloch()
    };
    let mut acc = 0.0;
    let mut prev = bloch_at(0);
    for k in 1..=samples {
        let next = bloch_at(k);
        let rho_prev = prev[0].hypot(prev[1]);
        let rho_next = next[0].hypot(next[1]);
        if rho_prev > 1e-9 && rho_next > 1e-9 {
            let d_phi = principal_angle(next[1].atan2(next[0]) - prev[1].atan2(prev[0]));
            let cos_mid = 0.5 * (prev[2] + next[2]);
            acc += (1.0 - cos_mid) * d_phi;
        }
        prev = next;
    }
    -0.5 * acc
}

pub fn berry_reference(l: &LoopSpec) -> f64 {
    let field = l.omega_z().hypot(l.omega_1());
    if field == 0.0 {
        return 0.0;
    }
    -l.omega().signum() * l.n_periods() as f64 * PI * (1.0 - l.omega_z() / field)
}

/// `⟨ψ(t)|H(t)|ψ(t)⟩` at `samples` uniform times over one period.
pub fn expectation_track(l: &LoopSpec, state: &Ket2, samples: usize) -> Result<Vec<f64>> {
    if samples < 16 {
        return Err(Error::InvalidInput(format!(
            "expectation track needs at least 16 samples, got {samples}"
        )));
    }
    let state = state.normalized()?;
    let h = l.period() / samples as f64;
    Ok((0..samples)
        .map(|k| {
            let t = k as f64 * h;
            let psi = analytic_loop_propagator(l, t).apply(&state);
            psi.expectation(&hamiltonian_at(l, t).matrix())
        })
        .collect())
}
