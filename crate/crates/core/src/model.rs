//! Rotating-field loops, their dynamical invariant, and the two-spin register.
//!
//! A loop drives one spin with
//! `H(t) = ½[ω_z σz + ω₁(cos(ωt + φ₀) σx + sin(ωt + φ₀) σy)]`,
//! a transverse field rotating about ẑ at the signed rate ω. The sign of ω is
//! the loop orientation. The invariant is `I(t) = H(t) − (ω/2) σz`, whose
//! eigenvalues ±Ω/2 with `Ω = √((ω_z − ω)² + ω₁²)` do not depend on time.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianDecomp, Mat2, Mat4};

/// One constantly rotating-field loop, repeated for `n_periods` whole cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLoopSpec", into = "RawLoopSpec")]
pub struct LoopSpec {
    omega_z: f64,
    omega_1: f64,
    phi_0: f64,
    omega: f64,
    n_periods: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoopSpec {
    omega_z: f64,
    omega_1: f64,
    #[serde(default)]
    phi_0: f64,
    omega: f64,
    #[serde(default = "one")]
    n_periods: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<RawLoopSpec> for LoopSpec {
    type Error = Error;
    fn try_from(raw: RawLoopSpec) -> Result<Self> {
        LoopSpec::with_periods(
            raw.omega_z,
            raw.omega_1,
            raw.phi_0,
            raw.omega,
            raw.n_periods,
        )
    }
}

impl From<LoopSpec> for RawLoopSpec {
    fn from(l: LoopSpec) -> Self {
        RawLoopSpec {
            omega_z: l.omega_z,
            omega_1: l.omega_1,
            phi_0: l.phi_0,
            omega: l.omega,
            n_periods: l.n_periods,
        }
    }
}

/// Tunable loop parameter, used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopParameter {
    Omega,
    OmegaZ,
    #[serde(rename = "omega_1")]
    Omega1,
    #[serde(rename = "phi_0")]
    Phi0,
}

impl LoopSpec {
    /// A single-period loop.
    pub fn new(omega_z: f64, omega_1: f64, phi_0: f64, omega: f64) -> Result<Self> {
        Self::with_periods(omega_z, omega_1, phi_0, omega, 1)
    }

    pub fn with_periods(
        omega_z: f64,
        omega_1: f64,
        phi_0: f64,
        omega: f64,
        n_periods: u32,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_z", omega_z),
            ("omega_1", omega_1),
            ("phi_0", phi_0),
            ("omega", omega),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if omega_1 < 0.0 {
            return Err(Error::InvalidInput(format!(
                "omega_1 must be non-negative, got {omega_1}"
            )));
        }
        if omega == 0.0 {
            return Err(Error::InvalidInput(
                "omega must be nonzero (the period is undefined)".into(),
            ));
        }
        if !(TAU / omega.abs()).is_finite() {
            return Err(Error::InvalidInput(format!(
                "omega {omega} gives a non-finite period"
            )));
        }
        if n_periods == 0 {
            return Err(Error::InvalidInput(
                "n_periods must be a positive integer".into(),
            ));
        }
        Ok(Self {
            omega_z,
            omega_1,
            phi_0,
            omega,
            n_periods,
        })
    }

    pub fn omega_z(&self) -> f64 {
        self.omega_z
    }

    pub fn omega_1(&self) -> f64 {
        self.omega_1
    }

    pub fn phi_0(&self) -> f64 {
        self.phi_0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_periods(&self) -> u32 {
        self.n_periods
    }

    /// `T = 2π/|ω|`.
    pub fn period(&self) -> f64 {
        TAU / self.omega.abs()
    }

    /// Total evolution time `n·T`.
    pub fn duration(&self) -> f64 {
        self.n_periods as f64 * self.period()
    }

    /// Detuning `Δ = ω_z − ω`.
    pub fn detuning(&self) -> f64 {
        self.omega_z - self.omega
    }

    /// Effective Rabi frequency `Ω = √(Δ² + ω₁²)`.
    pub fn omega_eff(&self) -> f64 {
        self.detuning().hypot(self.omega_1)
    }

    pub fn with_parameter(&self, parameter: LoopParameter, value: f64) -> Result<Self> {
        let mut l = *self;
        match parameter {
            LoopParameter::Omega => l.omega = value,
            LoopParameter::OmegaZ => l.omega_z = value,
            LoopParameter::Omega1 => l.omega_1 = value,
            LoopParameter::Phi0 => l.phi_0 = value,
        }
        Self::with_periods(l.omega_z, l.omega_1, l.phi_0, l.omega, l.n_periods)
    }

    pub fn parameter(&self, parameter: LoopParameter) -> f64 {
        match parameter {
            LoopParameter::Omega => self.omega,
            LoopParameter::OmegaZ => self.omega_z,
            LoopParameter::Omega1 => self.omega_1,
            LoopParameter::Phi0 => self.phi_0,
        }
    }

    pub fn with_n_periods(&self, n_periods: u32) -> Result<Self> {
        Self::with_periods(
            self.omega_z,
            self.omega_1,
            self.phi_0,
            self.omega,
            n_periods,
        )
    }

    fn transverse_angle(&self, t: f64) -> f64 {
        self.omega * t + self.phi_0
    }
}

/// `H(t)`, `I(t)` and the gauge potential `I − H = −(ω/2)σz` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantDecomposition {
    pub invariant: HermitianDecomp,
    pub gauge_potential: HermitianDecomp,
    pub hamiltonian: HermitianDecomp,
}

pub fn hamiltonian_at(l: &LoopSpec, t: f64) -> HermitianDecomp {
    let (s, c) = l.transverse_angle(t).sin_cos();
    let half = 0.5 * l.omega_1;
    HermitianDecomp::new(0.0, half * c, half * s, 0.5 * l.omega_z)
}

pub fn invariant_at(l: &LoopSpec, t: f64) -> InvariantDecomposition {
    let hamiltonian = hamiltonian_at(l, t);
    let gauge_potential = HermitianDecomp::new(0.0, 0.0, 0.0, -0.5 * l.omega);
    InvariantDecomposition {
        invariant: hamiltonian + gauge_potential,
        gauge_potential,
        hamiltonian,
    }
}

/// Analytic `∂I/∂t`; only the transverse part moves.
pub fn invariant_rate(l: &LoopSpec, t: f64) -> HermitianDecomp {
    let (s, c) = l.transverse_angle(t).sin_cos();
    let k = 0.5 * l.omega_1 * l.omega;
    HermitianDecomp::new(0.0, -k * s, k * c, 0.0)
}

/// `‖∂I/∂t − i[I, H]‖_F` for explicitly supplied operators.
pub fn equation_residual(
    invariant: &HermitianDecomp,
    invariant_rate: &HermitianDecomp,
    hamiltonian: &HermitianDecomp,
) -> f64 {
    let i_m = invariant.matrix();
    let h_m = hamiltonian.matrix();
    let commutator = i_m * h_m - h_m * i_m;
    (invariant_rate.matrix() - commutator.scale(Complex64::new(0.0, 1.0))).frobenius_norm()
}

/// Residual of the invariant equation at `t`, with the analytic time derivative.
pub fn invariant_residual(l: &LoopSpec, t: f64) -> f64 {
    let d = invariant_at(l, t);
    equation_residual(&d.invariant, &invariant_rate(l, t), &d.hamiltonian)
}

/// Same residual with `∂I/∂t` taken by a central difference of step `step`.
pub fn invariant_residual_fd(l: &LoopSpec, t: f64, step: f64) -> f64 {
    let ahead = invariant_at(l, t + step).invariant;
    let behind = invariant_at(l, t - step).invariant;
    let rate = (ahead - behind).scale(0.5 / step);
    let d = invariant_at(l, t);
    equation_residual(&d.invariant, &rate, &d.hamiltonian)
}

/// The opposite-orientation loop sharing the same invariant at t = 0:
/// `ω → −ω`, `ω_z → ω_z − 2ω`. The detuning and hence `I(0)` are unchanged.
pub fn identical_invariant_conjugate(l: &LoopSpec) -> LoopSpec {
    let out = LoopSpec {
        omega_z: l.omega_z - 2.0 * l.omega,
        omega: -l.omega,
        ..*l
    };
    debug_assert!(
        invariant_at(l, 0.0)
            .invariant
            .max_abs_diff(&invariant_at(&out, 0.0).invariant)
            <= 1e-14 * (1.0 + l.omega_z.abs() + l.omega.abs())
    );
    out
}

/// Plain sign flip `(ω_z, ω) → (−ω_z, −ω)`. Shares the invariant only on
/// resonance.
pub fn sign_flip_conjugate(l: &LoopSpec) -> LoopSpec {
    LoopSpec {
        omega_z: -l.omega_z,
        omega: -l.omega,
        ..*l
    }
}

/// The loop traversing the same Hamiltonian path backwards in time:
/// `H_rev(t) = H(T − t)`.
pub fn time_reversed(l: &LoopSpec) -> LoopSpec {
    LoopSpec {
        omega: -l.omega,
        ..*l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateKind {
    #[default]
    IdenticalInvariant,
    SignFlip,
}

/// How the partner loop C̄ is built from C, with an optional deliberate
/// offset on its vertical field (a negative control).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateRule {
    #[serde(default)]
    pub kind: ConjugateKind,
    #[serde(default)]
    pub omega_z_offset: f64,
}

impl ConjugateRule {
    pub fn apply(&self, l: &LoopSpec) -> Result<LoopSpec> {
        let base = match self.kind {
            ConjugateKind::IdenticalInvariant => identical_invariant_conjugate(l),
            ConjugateKind::SignFlip => sign_flip_conjugate(l),
        };
        base.with_parameter(LoopParameter::OmegaZ, base.omega_z + self.omega_z_offset)
    }
}

/// Spin a driven by a loop, spin b static, Ising coupling `(J/2) σz⊗σz`.
///
/// Basis order is `|a b⟩` with index `2a + b` and ↑ = 0. An NMR coupling
/// quoted in Hz maps to `coupling_j = π·J_Hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitSpec {
    pub loop_a: LoopSpec,
    #[serde(default)]
    pub omega_b: f64,
    #[serde(default)]
    pub coupling_j: f64,
}

impl TwoQubitSpec {
    pub fn new(loop_a: LoopSpec, omega_b: f64, coupling_j: f64) -> Result<Self> {
        if !omega_b.is_finite() || !coupling_j.is_finite() {
            return Err(Error::InvalidInput(
                "omega_b and coupling_j must be finite".into(),
            ));
        }
        Ok(Self {
            loop_a,
            omega_b,
            coupling_j,
        })
    }

    pub fn with_loop(&self, loop_a: LoopSpec) -> Self {
        Self { loop_a, ..*self }
    }
}

/// Eigen-sector of spin b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Up,
    Down,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Up, Sector::Down];

    pub fn sign(self) -> f64 {
        match self {
            Sector::Up => 1.0,
            Sector::Down => -1.0,
        }
    }

    /// Index of the spin-b basis state.
    pub fn index(self) -> usize {
        match self {
            Sector::Up => 0,
            Sector::Down => 1,
        }
    }
}

pub fn two_qubit_hamiltonian(spec: &TwoQubitSpec, t: f64) -> Mat4 {
    let one = Mat2::identity();
    let z = Mat2::sigma_z();
    let half = |x: f64| Complex64::new(0.5 * x, 0.0);
    hamiltonian_at(&spec.loop_a, t).matrix().kron(&one)
        + one.kron(&z.scale(half(spec.omega_b)))
        + z.kron(&z).scale(half(spec.coupling_j))
}

/// Effective spin-a loop in sector `s` (`ω_z → ω_z + s·J`) and the sector's
/// scalar energy `s·ω_b/2`.
pub fn sector_reduce(spec: &TwoQubitSpec, s: Sector) -> (LoopSpec, f64) {
    let l = spec.loop_a;
    let reduced = LoopSpec {
        omega_z: l.omega_z + s.sign() * spec.coupling_j,
        ..l
    };
    (reduced, 0.5 * s.sign() * spec.omega_b)
}
