//! Executable checks for the statements about opposite nonadiabatic loops.
//!
//! Each check returns a [`ClaimResult`] carrying the measured numbers and
//! the tolerance its verdict was judged against:
//!
//! * C1: a loop and its identical-invariant conjugate give equal total phases
//!   on the shared recurrent states.
//! * C2: their cycle propagators are equal entry by entry.
//! * C3: their dynamical phases differ by `−2π n sgn(ω) Δ/Ω`.
//! * C4: a loop and its time reverse have invariants that differ by `ωσz`.
//! * C5: the recurrent states of a loop and its time reverse differ.
//! * C6: in a two-spin sequence, swapping every conjugate loop for the
//!   original leaves the gate unchanged, so nothing geometric survives that
//!   the dynamical phases would not also produce.
//! * C7: in the adiabatic limit the time-reversed pair recovers equal
//!   dynamical phases and opposite (Berry) geometric phases, linearly in ω.

use std::collections::BTreeMap;
use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{angle_gap, global_phase_distance, principal_angle, Mat4};
use crate::model::{
    invariant_at, sector_reduce, time_reversed, ConjugateRule, LoopParameter, LoopSpec, Sector,
    TwoQubitSpec,
};
use crate::phases::{cyclic_state, loop_phases, phases_for_state, Branch};
use crate::propagation::{loop_cycle_propagator, sequence_propagator, SequenceSpec};

/// Minimum overlap `|⟨u|ū⟩|` for two loops to count as sharing a recurrent
/// state.
pub const SHARED_BASIS_OVERLAP: f64 = 1.0 - 1e-6;

/// Recurrent-basis overlap deficit above which two bases count as different.
pub const RECURRENT_DEFICIT_TOL: f64 = 1e-6;

/// Default adiabatic sweep; each value halves the previous.
pub const ADIABATIC_OMEGAS: [f64; 4] = [0.16, 0.08, 0.04, 0.02];

/// Slack on "halving ω at least halves the measure".
pub const HALVING_SLACK: f64 = 0.25;

/// Measures at or below this are treated as converged to zero.
pub const ADIABATIC_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClaimId {
    #[serde(rename = "C1_total_phase_equal")]
    TotalPhaseEqual,
    #[serde(rename = "C2_propagator_identical")]
    PropagatorIdentical,
    #[serde(rename = "C3_dynamical_differ")]
    DynamicalDiffer,
    #[serde(rename = "C4_invariants_differ")]
    InvariantsDiffer,
    #[serde(rename = "C5_recurrent_differ")]
    RecurrentDiffer,
    #[serde(rename = "C6_sequence_global")]
    SequenceGlobal,
    #[serde(rename = "C7_adiabatic_contrast")]
    AdiabaticContrast,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::TotalPhaseEqual,
        ClaimId::PropagatorIdentical,
        ClaimId::DynamicalDiffer,
        ClaimId::InvariantsDiffer,
        ClaimId::RecurrentDiffer,
        ClaimId::SequenceGlobal,
        ClaimId::AdiabaticContrast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::TotalPhaseEqual => "C1_total_phase_equal",
            ClaimId::PropagatorIdentical => "C2_propagator_identical",
            ClaimId::DynamicalDiffer => "C3_dynamical_differ",
            ClaimId::InvariantsDiffer => "C4_invariants_differ",
            ClaimId::RecurrentDiffer => "C5_recurrent_differ",
            ClaimId::SequenceGlobal => "C6_sequence_global",
            ClaimId::AdiabaticContrast => "C7_adiabatic_contrast",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim_id: ClaimId,
    pub verdict: Verdict,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ClaimResult {
    fn new(claim_id: ClaimId, pass: bool, measured: Measured, tolerance: f64) -> Self {
        Self {
            claim_id,
            verdict: Verdict::from_bool(pass),
            measured: measured.0,
            tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.measured.get(key).copied()
    }
}

#[derive(Default)]
struct Measured(BTreeMap<String, f64>);

impl Measured {
    fn put(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Discretized phase quantities.
    pub phase: f64,
    /// Analytic identities.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase: 1e-8,
            identity: 1e-10,
        }
    }
}

/// Runs the claim checks with one tolerance set and one conjugate rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClaimChecker {
    pub tolerances: Tolerances,
    pub conjugate: ConjugateRule,
}

impl ClaimChecker {
    pub fn total_phase_equal(&self, l: &LoopSpec) -> Result<ClaimResult> {
        check_total_phase_pair(l, &self.conjugate.apply(l)?, self.tolerances.phase)
    }

    pub fn propagator_identical(&self, l: &LoopSpec) -> Result<ClaimResult> {
        check_propagator_pair(l, &self.conjugate.apply(l)?, self.tolerances.identity)
    }

    pub fn dynamical_differ(&self, l: &LoopSpec) -> Result<ClaimResult> {
        dynamical_gap(l, &self.conjugate.apply(l)?, self.tolerances.phase).map(|(r, _)| r)
    }

    /// C3 on both spin-b sectors of a register; resonant sectors are skipped.
    pub fn dynamical_differ_sectors(&self, spec: &TwoQubitSpec) -> Result<ClaimResult> {
        let mut measured = Measured::default();
        let mut pass = true;
        let mut evaluated = 0;
        let mut skipped = Vec::new();
        for s in Sector::BOTH {
            let (reduced, _) = sector_reduce(spec, s);
            let tag = match s {
                Sector::Up => "up",
                Sector::Down => "down",
            };
            match dynamical_gap(
                &reduced,
                &self.conjugate.apply(&reduced)?,
                self.tolerances.phase,
            ) {
                Ok((r, gap)) => {
                    evaluated += 1;
                    pass &= r.passed();
                    measured.put(format!("gap_{tag}"), gap);
                    measured.put(
                        format!("formula_error_{tag}"),
                        r.get("formula_error").unwrap_or(f64::NAN),
                    );
                }
                Err(Error::ResonantDegenerate) => skipped.push(tag),
                Err(e) => return Err(e),
            }
        }
        if evaluated == 0 {
            return Err(Error::ResonantDegenerate);
        }
        let result = ClaimResult::new(
            ClaimId::DynamicalDiffer,
            pass,
            measured,
            self.tolerances.phase,
        );
        Ok(if skipped.is_empty() {
            result
        } else {
            result.with_note(format!(
                "resonant sector(s) skipped: {}",
                skipped.join(", ")
            ))
        })
    }

    pub fn invariants_differ(&self, l: &LoopSpec) -> ClaimResult {
        invariants_gap(l, self.tolerances.phase)
    }

    pub fn recurrent_differ(&self, l: &LoopSpec) -> Result<ClaimResult> {
        check_recurrent_differ(l)
    }

    pub fn sequence_global(&self, spec: &TwoQubitSpec, seq: &SequenceSpec) -> Result<ClaimResult> {
        let report = gate_report(spec, seq)?;
        Ok(report.claim(self.tolerances.phase))
    }
}

/// C1 with the identical-invariant conjugate.
pub fn check_total_phase_equal(l: &LoopSpec) -> Result<ClaimResult> {
    ClaimChecker::default().total_phase_equal(l)
}

/// C1 against an arbitrary partner loop. Fails with
/// [`Error::MismatchedRecurrentBasis`] when the two loops do not share their
/// recurrent states.
pub fn check_total_phase_pair(l: &LoopSpec, partner: &LoopSpec, tol: f64) -> Result<ClaimResult> {
    let mut measured = Measured::default();
    let mut worst: f64 = 0.0;
    for (branch, tag) in [(Branch::Plus, "plus"), (Branch::Minus, "minus")] {
        let own = cyclic_state(l, branch)?;
        let theirs = cyclic_state(partner, branch)?;
        let overlap = own.state.inner(&theirs.state).norm();
        if overlap < SHARED_BASIS_OVERLAP {
            return Err(Error::MismatchedRecurrentBasis { overlap });
        }
        let a = phases_for_state(l, &own.state)?;
        let b = phases_for_state(partner, &own.state)?;
        let gap = angle_gap(a.total_wrapped, b.total_wrapped);
        worst = worst.max(gap);
        measured
            .put(format!("total_{tag}"), a.total_wrapped)
            .put(format!("total_bar_{tag}"), b.total_wrapped)
            .put(format!("gap_{tag}"), gap);
    }
    Ok(ClaimResult::new(
        ClaimId::TotalPhaseEqual,
        worst <= tol,
        measured,
        tol,
    ))
}

/// C2 with the identical-invariant conjugate.
pub fn check_propagator_identical(l: &LoopSpec) -> Result<ClaimResult> {
    ClaimChecker::default().propagator_identical(l)
}

/// C2 against an arbitrary partner loop: the cycle propagators must agree
/// entry-wise, not merely up to a global phase.
pub fn check_propagator_pair(l: &LoopSpec, partner: &LoopSpec, tol: f64) -> Result<ClaimResult> {
    let u = loop_cycle_propagator(l);
    let v = loop_cycle_propagator(partner);
    let entry = u.max_abs_diff(&v);
    let mut measured = Measured::default();
    measured
        .put("entry_max_diff", entry)
        .put("global_phase_distance", global_phase_distance(&u, &v)?);
    Ok(ClaimResult::new(
        ClaimId::PropagatorIdentical,
        entry <= tol,
        measured,
        tol,
    ))
}

/// C3 with the identical-invariant conjugate.
pub fn check_dynamical_differ(l: &LoopSpec) -> Result<ClaimResult> {
    ClaimChecker::default().dynamical_differ(l)
}

/// Closed form of `φ_d(L) − φ_d(L̄)` for the identical-invariant conjugate on
/// the shared + state.
pub fn dynamical_gap_formula(l: &LoopSpec) -> f64 {
    -TAU * l.n_periods() as f64 * l.omega().signum() * l.detuning() / l.omega_eff()
}

fn dynamical_gap(l: &LoopSpec, partner: &LoopSpec, tol: f64) -> Result<(ClaimResult, f64)> {
    if l.detuning().abs() <= 1e-12 {
        return Err(Error::ResonantDegenerate);
    }
    let state = cyclic_state(l, Branch::Plus)?.state;
    let a = phases_for_state(l, &state)?;
    let b = phases_for_state(partner, &state)?;
    let gap = a.dynamical_unwrapped - b.dynamical_unwrapped;
    let expected = dynamical_gap_formula(l);
    let formula_error = (gap - expected).abs();
    let mut measured = Measured::default();
    measured
        .put("dynamical", a.dynamical_unwrapped)
        .put("dynamical_bar", b.dynamical_unwrapped)
        .put("gap", gap)
        .put("expected_gap", expected)
        .put("formula_error", formula_error);
    let pass = gap.abs() >= 10.0 * tol && formula_error <= tol;
    Ok((
        ClaimResult::new(ClaimId::DynamicalDiffer, pass, measured, tol),
        gap,
    ))
}

/// C4: `max_t ‖I_L(t) − I_L̄(T − t)‖_F` for the time-reversed loop equals
/// `|ω|√2`.
pub fn check_invariants_differ(l: &LoopSpec) -> ClaimResult {
    ClaimChecker::default().invariants_differ(l)
}

const INVARIANT_SAMPLES: usize = 256;

fn invariants_gap(l: &LoopSpec, tol: f64) -> ClaimResult {
    let reversed = time_reversed(l);
    let period = l.period();
    let gaps: Vec<f64> = (0..=INVARIANT_SAMPLES)
        .map(|k| {
            let t = period * k as f64 / INVARIANT_SAMPLES as f64;
            let diff = invariant_at(l, t).invariant - invariant_at(&reversed, period - t).invariant;
            diff.matrix().frobenius_norm()
        })
        .collect();
    let max = gaps.iter().copied().fold(0.0, f64::max);
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let expected = l.omega().abs() * SQRT_2;
    let mut measured = Measured::default();
    measured
        .put("gap_max", max)
        .put("gap_min", min)
        .put("expected_gap", expected);
    ClaimResult::new(
        ClaimId::InvariantsDiffer,
        (max - expected).abs() <= tol,
        measured,
        tol,
    )
}

/// C5: overlap deficit `1 − |⟨u₊(L)|u₊(L̄)⟩|²` between the + recurrent states of
/// a loop and its time reverse.
pub fn check_recurrent_differ(l: &LoopSpec) -> Result<ClaimResult> {
    let reversed = time_reversed(l);
    let u = cyclic_state(l, Branch::Plus)?.state;
    let v = cyclic_state(&reversed, Branch::Plus)?.state;
    let deficit = 1.0 - u.inner(&v).norm_sqr();
    let mut measured = Measured::default();
    measured
        .put("overlap_deficit", deficit)
        .put("cone_cosine", l.detuning() / l.omega_eff())
        .put(
            "cone_cosine_bar",
            reversed.detuning() / reversed.omega_eff(),
        );
    if l.omega_1() == 0.0 {
        return Ok(ClaimResult::new(
            ClaimId::RecurrentDiffer,
            true,
            measured,
            RECURRENT_DEFICIT_TOL,
        )
        .with_note("DegenerateGeometry: no transverse field, both bases are σz eigenstates"));
    }
    Ok(ClaimResult::new(
        ClaimId::RecurrentDiffer,
        deficit >= RECURRENT_DEFICIT_TOL,
        measured,
        RECURRENT_DEFICIT_TOL,
    ))
}

/// Gate-level summary of a two-spin sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// Frobenius norm of the off-diagonal part in the computational basis.
    pub diagonality_defect: f64,
    /// Phases of `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` when the gate is diagonal.
    pub basis_phases: Option<[f64; 4]>,
    /// `φ₁₁ − φ₁₀ − φ₀₁ + φ₀₀` with ↑ = 0, when the gate is diagonal.
    pub conditional_phase: Option<f64>,
    pub identity_distance: f64,
    /// Global-phase distance to the same sequence with every conjugate loop
    /// replaced by the original loop.
    pub replacement_distance: f64,
    /// Row-major `[re, im]` entries.
    pub unitary: Vec<Vec<[f64; 2]>>,
}

const DIAGONAL_TOL: f64 = 1e-8;

pub fn gate_report(spec: &TwoQubitSpec, seq: &SequenceSpec) -> Result<GateReport> {
    let g = sequence_propagator(spec, seq)?;
    let replaced = sequence_propagator(spec, &seq.with_conjugates_replaced(&spec.loop_a))?;
    let diagonality_defect = g.off_diagonal_norm();
    let basis_phases =
        (diagonality_defect <= DIAGONAL_TOL).then(|| [0, 1, 2, 3].map(|k| g.0[k][k].arg()));
    let conditional_phase = basis_phases.map(|p| principal_angle(p[3] - p[2] - p[1] + p[0]));
    Ok(GateReport {
        diagonality_defect,
        basis_phases,
        conditional_phase,
        identity_distance: global_phase_distance(&g, &Mat4::identity())?,
        replacement_distance: global_phase_distance(&g, &replaced)?,
        unitary: g
            .0
            .iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    })
}

impl GateReport {
    /// C6 verdict: replacement invariance within `tol`.
    pub fn claim(&self, tol: f64) -> ClaimResult {
        let mut measured = Measured::default();
        measured
            .put("replacement_distance", self.replacement_distance)
            .put("diagonality_defect", self.diagonality_defect)
            .put("identity_distance", self.identity_distance);
        if let Some(c) = self.conditional_phase {
            measured.put("conditional_phase", c);
        }
        ClaimResult::new(
            ClaimId::SequenceGlobal,
            self.replacement_distance <= tol,
            measured,
            tol,
        )
    }
}

/// C6 with default tolerances.
pub fn check_sequence_global(spec: &TwoQubitSpec, seq: &SequenceSpec) -> Result<ClaimResult> {
    ClaimChecker::default().sequence_global(spec, seq)
}

/// The three adiabatic-contrast measures at one rotation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticPoint {
    pub omega: f64,
    /// `|φ_d(C) − φ_d(C̄)|`.
    pub dynamical_gap: f64,
    /// `|principal(φ_g(C) + φ_g(C̄))|`.
    pub geometric_sum: f64,
    /// `|principal(φ_g(C) − berry_reference)|`.
    pub berry_error: f64,
}

/// Measures `C = loop at ω` against its time reverse, each on its own +
/// recurrent state.
pub fn adiabatic_point(l: &LoopSpec, omega: f64) -> Result<AdiabaticPoint> {
    let c = l.with_parameter(LoopParameter::Omega, omega)?;
    let c_bar = time_reversed(&c);
    let a = loop_phases(&c, Branch::Plus)?;
    let b = loop_phases(&c_bar, Branch::Plus)?;
    Ok(AdiabaticPoint {
        omega,
        dynamical_gap: (a.dynamical_unwrapped - b.dynamical_unwrapped).abs(),
        geometric_sum: angle_gap(a.geometric_wrapped + b.geometric_wrapped, 0.0),
        berry_error: angle_gap(a.geometric_wrapped, a.berry_reference),
    })
}

/// Linear-in-ω bounds `measure ≤ K·|ω|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticBounds {
    pub k_dynamical: f64,
    pub k_geometric: f64,
    pub k_berry: f64,
}

impl AdiabaticBounds {
    pub fn calibrate(l: &LoopSpec, omega: f64) -> Result<Self> {
        let p = adiabatic_point(l, omega)?;
        let w = omega.abs();
        Ok(Self {
            k_dynamical: p.dynamical_gap / w,
            k_geometric: p.geometric_sum / w,
            k_berry: p.berry_error / w,
        })
    }

    fn admits(&self, p: &AdiabaticPoint) -> bool {
        let w = p.omega.abs();
        p.dynamical_gap <= self.k_dynamical * w + ADIABATIC_FLOOR
            && p.geometric_sum <= self.k_geometric * w + ADIABATIC_FLOOR
            && p.berry_error <= self.k_berry * w + ADIABATIC_FLOOR
    }
}

fn adiabatic_result(p: &AdiabaticPoint, bounds: &AdiabaticBounds) -> ClaimResult {
    let w = p.omega.abs();
    let mut measured = Measured::default();
    measured
        .put("omega", p.omega)
        .put("d_gap", p.dynamical_gap)
        .put("g_sum", p.geometric_sum)
        .put("b_err", p.berry_error)
        .put("bound_d_gap", bounds.k_dynamical * w)
        .put("bound_g_sum", bounds.k_geometric * w)
        .put("bound_b_err", bounds.k_berry * w);
    let tol = (bounds
        .k_dynamical
        .max(bounds.k_geometric)
        .max(bounds.k_berry))
        * w
        + ADIABATIC_FLOOR;
    ClaimResult::new(ClaimId::AdiabaticContrast, bounds.admits(p), measured, tol)
}

fn validate_omegas(omegas: &[f64]) -> Result<f64> {
    if omegas.iter().any(|w| *w == 0.0 || !w.is_finite()) {
        return Err(Error::InvalidInput(
            "adiabatic sweep rates must be finite and nonzero".into(),
        ));
    }
    omegas
        .iter()
        .map(|w| w.abs())
        .fold(None, |m: Option<f64>, w| Some(m.map_or(w, |m| m.max(w))))
        .ok_or_else(|| Error::InvalidInput("adiabatic sweep needs at least one rate".into()))
}

/// Per-point C7 results with `K` calibrated once at the largest `|ω|`.
pub fn adiabatic_contrast(l: &LoopSpec, omegas: &[f64]) -> Result<Vec<ClaimResult>> {
    let largest = validate_omegas(omegas)?;
    let bounds = AdiabaticBounds::calibrate(l, largest)?;
    adiabatic_contrast_with(l, omegas, &bounds)
}

/// Per-point C7 results against fixed bounds.
pub fn adiabatic_contrast_with(
    l: &LoopSpec,
    omegas: &[f64],
    bounds: &AdiabaticBounds,
) -> Result<Vec<ClaimResult>> {
    validate_omegas(omegas)?;
    omegas
        .iter()
        .map(|w| adiabatic_point(l, *w).map(|p| adiabatic_result(&p, bounds)))
        .collect()
}

/// C7 convergence certificate: walking from the largest to the smallest
/// `|ω|`, each measure must shrink at least in proportion to ω, with
/// [`HALVING_SLACK`] relative slack. Every point must also sit inside the
/// calibrated linear bounds.
pub fn adiabatic_certificate(l: &LoopSpec, omegas: &[f64]) -> Result<ClaimResult> {
    let largest = validate_omegas(omegas)?;
    let bounds = AdiabaticBounds::calibrate(l, largest)?;
    let mut points = omegas
        .iter()
        .map(|w| adiabatic_point(l, *w))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| b.omega.abs().total_cmp(&a.omega.abs()));

    let mut pass = points.iter().all(|p| bounds.admits(p));
    let mut worst = [0.0f64; 3];
    for pair in points.windows(2) {
        let (big, small) = (&pair[0], &pair[1]);
        let scale = small.omega.abs() / big.omega.abs();
        let measures = [
            (big.dynamical_gap, small.dynamical_gap),
            (big.geometric_sum, small.geometric_sum),
            (big.berry_error, small.berry_error),
        ];
        for (slot, (prev, next)) in worst.iter_mut().zip(measures) {
            if next <= ADIABATIC_FLOOR {
                continue;
            }
            // normalized so that exactly linear shrinkage gives 1
            let ratio = next / (prev * scale);
            *slot = slot.max(ratio);
            pass &= ratio <= 1.0 + HALVING_SLACK;
        }
    }
    let mut measured = Measured::default();
    measured
        .put("worst_ratio_d_gap", worst[0])
        .put("worst_ratio_g_sum", worst[1])
        .put("worst_ratio_b_err", worst[2]);
    if let Some(p) = points.last() {
        measured
            .put("smallest_omega", p.omega)
            .put("d_gap_at_smallest", p.dynamical_gap)
            .put("g_sum_at_smallest", p.geometric_sum)
            .put("b_err_at_smallest", p.berry_error);
    }
    Ok(ClaimResult::new(
        ClaimId::AdiabaticContrast,
        pass,
        measured,
        HALVING_SLACK,
    ))
}
