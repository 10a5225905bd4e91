//! Propagators: closed-form rotating-frame solutions for loops, a midpoint
//! exponential integrator used as an independent oracle, and composition of
//! two-spin sequences of whole loops and ideal π pulses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{HermitianDecomp, Mat, Mat2, Mat4};
use crate::model::{
    hamiltonian_at, identical_invariant_conjugate, invariant_at, sector_reduce,
    two_qubit_hamiltonian, LoopSpec, Sector, TwoQubitSpec,
};

/// Integrator density used when the caller does not choose one.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

/// Minimum integrator density accepted.
pub const MIN_STEPS_PER_PERIOD: usize = 100;

/// Largest unitarity defect an accepted propagator may carry.
pub const MAX_UNITARITY_DEFECT: f64 = 1e-9;

/// Closed form `U(t) = exp(−i(ωt/2)σz) · exp(−i I(0) t)`.
///
/// At `t = T` the frame factor is −𝟙, so `U(T) = −exp(−i I(0) T)`.
pub fn analytic_loop_propagator(l: &LoopSpec, t: f64) -> Mat2 {
    let frame = HermitianDecomp::new(0.0, 0.0, 0.0, 0.5 * l.omega());
    let invariant = invariant_at(l, 0.0).invariant;
    frame.propagator(t) * invariant.propagator(t)
}

/// Analytic propagator over the loop's whole `n·T`.
pub fn loop_cycle_propagator(l: &LoopSpec) -> Mat2 {
    analytic_loop_propagator(l, l.duration())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorResult<const N: usize> {
    pub unitary: Mat<N>,
    pub unitarity_defect: f64,
    /// Hamiltonian evaluations spent; 0 for closed forms.
    pub step_count: usize,
}

/// A periodically driven system the integrator can step.
pub trait DrivenSystem<const N: usize> {
    fn period(&self) -> f64;

    /// Exactly unitary factor `exp(−i H(t_mid) h)`.
    fn step_propagator(&self, t_mid: f64, h: f64) -> Mat<N>;
}

impl DrivenSystem<2> for LoopSpec {
    fn period(&self) -> f64 {
        LoopSpec::period(self)
    }

    fn step_propagator(&self, t_mid: f64, h: f64) -> Mat2 {
        hamiltonian_at(self, t_mid).propagator(h)
    }
}

impl DrivenSystem<4> for TwoQubitSpec {
    fn period(&self) -> f64 {
        self.loop_a.period()
    }

    /// The 4×4 Hamiltonian commutes with σz on spin b, so each spin-b block
    /// is read off the full matrix and exponentiated on its own.
    fn step_propagator(&self, t_mid: f64, h: f64) -> Mat4 {
        let full = two_qubit_hamiltonian(self, t_mid);
        let blocks = Sector::BOTH.map(|s| {
            let b = s.index();
            let mut block = Mat2::zeros();
            for i in 0..2 {
                for j in 0..2 {
                    block.0[i][j] = full.0[2 * i + b][2 * j + b];
                }
            }
            HermitianDecomp::from_matrix(&block).propagator(h)
        });
        embed_sectors(&blocks)
    }
}

/// Midpoint exponential stepping `U ← exp(−i H(t_k + h/2) h) · U`.
///
/// Second order in `h`; see [`richardson_propagator`] for the extrapolated
/// variant.
pub fn numeric_propagator<S, const N: usize>(
    system: &S,
    t: f64,
    steps: usize,
) -> Result<PropagatorResult<N>>
where
    S: DrivenSystem<N>,
{
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite evolution time {t}"
        )));
    }
    let periods = (t.abs() / system.period()).max(1.0);
    let required = (MIN_STEPS_PER_PERIOD as f64 * periods).ceil() as usize;
    if steps < required {
        return Err(Error::InvalidInput(format!(
            "{steps} steps is below the minimum of {MIN_STEPS_PER_PERIOD} per period ({required} needed)"
        )));
    }
    let h = t / steps as f64;
    let mut u = Mat::<N>::identity();
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * h;
        u = system.step_propagator(t_mid, h) * u;
    }
    accept(u, steps)
}

/// Richardson extrapolation `(4 U_{h/2} − U_h) / 3` of the midpoint rule.
///
/// Cancels the `h²` error term; the result is unitary only up to the
/// remaining `O(h⁴)` error and the defect is reported as usual.
pub fn richardson_propagator<S, const N: usize>(
    system: &S,
    t: f64,
    steps: usize,
) -> Result<PropagatorResult<N>>
where
    S: DrivenSystem<N>,
{
    let coarse = numeric_propagator(system, t, steps)?;
    let fine = numeric_propagator(system, t, 2 * steps)?;
    let u = (fine.unitary.scale(Complex64::new(4.0, 0.0)) - coarse.unitary)
        .scale(Complex64::new(1.0 / 3.0, 0.0));
    accept(u, 3 * steps)
}

fn accept<const N: usize>(u: Mat<N>, step_count: usize) -> Result<PropagatorResult<N>> {
    let unitarity_defect = u.unitarity_defect();
    if unitarity_defect.is_nan() || unitarity_defect > MAX_UNITARITY_DEFECT {
        return Err(Error::IntegrationFailure {
            defect: unitarity_defect,
        });
    }
    Ok(PropagatorResult {
        unitary: u,
        unitarity_defect,
        step_count,
    })
}

/// Places per-sector 2×2 operators on spin a into a 4×4 operator that is
/// block diagonal in spin b (`index = 2a + b`).
pub fn embed_sectors(blocks: &[Mat2; 2]) -> Mat4 {
    let mut out = Mat4::zeros();
    for (b, block) in blocks.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                out.0[2 * i + b][2 * j + b] = block.0[i][j];
            }
        }
    }
    out
}

/// Per-sector closed-form propagators of a loop over its whole periods,
/// including the sector's scalar phase `e^{−i s ω_b nT / 2}`.
pub fn sector_cycle_propagators(spec: &TwoQubitSpec, l: &LoopSpec) -> [Mat2; 2] {
    let driven = spec.with_loop(*l);
    Sector::BOTH.map(|s| {
        let (reduced, energy) = sector_reduce(&driven, s);
        let phase = Complex64::from_polar(1.0, -energy * l.duration());
        loop_cycle_propagator(&reduced).scale(phase)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseAxis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceElement {
    /// Whole periods of a loop driving spin a.
    Loop(LoopSpec),
    /// Ideal instantaneous π pulse `exp(−i(π/2)σ_axis) = −iσ_axis`.
    PiPulse { target: Spin, axis: PulseAxis },
}

/// Ordered, nonempty list of sequence elements. The first element acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SequenceElement>", into = "Vec<SequenceElement>")]
pub struct SequenceSpec {
    elements: Vec<SequenceElement>,
}

impl SequenceSpec {
    pub fn new(elements: Vec<SequenceElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput(
                "sequence must contain at least one element".into(),
            ));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[SequenceElement] {
        &self.elements
    }

    /// `[C, C̄, π_x(b), C, C̄, π_x(b)]` with C̄ the identical-invariant
    /// conjugate. A plausible reading of the four-loop scheme, not a
    /// reconstruction of it.
    pub fn default_four_loop(c: &LoopSpec) -> Self {
        let c_bar = identical_invariant_conjugate(c);
        let flip = SequenceElement::PiPulse {
            target: Spin::B,
            axis: PulseAxis::X,
        };
        let elements = vec![
            SequenceElement::Loop(*c),
            SequenceElement::Loop(c_bar),
            flip,
            SequenceElement::Loop(*c),
            SequenceElement::Loop(c_bar),
            flip,
        ];
        Self { elements }
    }

    /// Replaces every loop equal to the identical-invariant conjugate of
    /// `reference` by `reference` itself.
    pub fn with_conjugates_replaced(&self, reference: &LoopSpec) -> Self {
        let conjugate = identical_invariant_conjugate(reference);
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                SequenceElement::Loop(l) if same_loop(l, &conjugate) => {
                    SequenceElement::Loop(*reference)
                }
                other => *other,
            })
            .collect();
        Self { elements }
    }
}

fn same_loop(a: &LoopSpec, b: &LoopSpec) -> bool {
    const EPS: f64 = 1e-12;
    a.n_periods() == b.n_periods()
        && (a.omega_z() - b.omega_z()).abs() <= EPS
        && (a.omega_1() - b.omega_1()).abs() <= EPS
        && (a.phi_0() - b.phi_0()).abs() <= EPS
        && (a.omega() - b.omega()).abs() <= EPS
}

impl TryFrom<Vec<SequenceElement>> for SequenceSpec {
    type Error = Error;
    fn try_from(elements: Vec<SequenceElement>) -> Result<Self> {
        Self::new(elements)
    }
}

impl From<SequenceSpec> for Vec<SequenceElement> {
    fn from(seq: SequenceSpec) -> Self {
        seq.elements
    }
}

/// `−iσ_axis` on the target spin, identity on the other.
pub fn pi_pulse_unitary(target: Spin, axis: PulseAxis) -> Mat4 {
    let sigma = match axis {
        PulseAxis::X => Mat2::sigma_x(),
        PulseAxis::Y => Mat2::sigma_y(),
    };
    let pulse = sigma.scale(Complex64::new(0.0, -1.0));
    let one = Mat2::identity();
    match target {
        Spin::A => pulse.kron(&one),
        Spin::B => one.kron(&pulse),
    }
}

/// Product of all element unitaries, later elements on the left.
pub fn sequence_propagator(spec: &TwoQubitSpec, seq: &SequenceSpec) -> Result<Mat4> {
    let mut g = Mat4::identity();
    for element in seq.elements() {
        let u = match element {
            SequenceElement::Loop(l) => embed_sectors(&sector_cycle_propagators(spec, l)),
            SequenceElement::PiPulse { target, axis } => pi_pulse_unitary(*target, *axis),
        };
        g = u * g;
    }
    accept(g, 0).map(|r| r.unitary)
}
