use std::collections::BTreeMap;
use std::fmt::Write as _;

use lrphase::claims::{adiabatic_certificate, ClaimChecker, ADIABATIC_OMEGAS};
use lrphase::linalg::{global_phase_distance, principal_angle};
use lrphase::model::{invariant_at, time_reversed};
use lrphase::phases::{self, cyclic_state, phases_for_state};
use lrphase::propagation::richardson_propagator;
use lrphase::{
    Branch, ClaimId, ClaimResult, Error, GateReport, HermitianDecomp, LoopSpec, PhaseReport,
    SequenceSpec, Tolerances, TwoQubitSpec, Verdict,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::format::{fmt_g, fmt_g_digits, round_json};
use crate::{CliError, Format};

/// Header of the sweep CSV. Downstream tooling matches it byte for byte.
pub const SWEEP_HEADER: &str = "omega,omega_z,omega_1,delta,Omega_eff,phi_total_plus,phi_dyn_plus,phi_geo_plus,phi_total_minus,phi_dyn_minus,phi_geo_minus,pair_dyn_gap,pair_geo_sum,berry_ref,solid_angle_check";

pub const DEFAULT_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub format: Option<Format>,
    pub steps: usize,
    pub phase_tol: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            format: None,
            steps: DEFAULT_STEPS,
            phase_tol: None,
        }
    }
}

impl Options {
    fn format(&self, cfg: &RunConfig, fallback: Format) -> Format {
        self.format.or(cfg.output.format).unwrap_or(fallback)
    }

    fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        if let Some(t) = self.phase_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config(format!(
                    "--tol must be positive and finite, got {t}"
                )));
            }
            tol.phase = t;
        }
        Ok(tol)
    }
}

/// A rendered command result.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub all_pass: bool,
    pub warnings: Vec<String>,
}

impl Rendered {
    fn ok(body: String) -> Self {
        Self {
            body,
            all_pass: true,
            warnings: Vec::new(),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub invariant_eigenvalue: f64,
    pub cyclicity_defect: f64,
    /// `[re, im]` amplitudes of `|↑⟩, |↓⟩`.
    pub state: [[f64; 2]; 2],
    pub phases: PhaseReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopPhasesReport {
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub detuning: f64,
    pub omega_eff: f64,
    pub period: f64,
    pub invariant_0: HermitianDecomp,
    pub gauge_potential: HermitianDecomp,
    pub plus: StateReport,
    pub minus: StateReport,
}

pub fn loop_phases_report(l: &LoopSpec) -> Result<LoopPhasesReport, CliError> {
    let state_report = |branch| -> Result<StateReport, CliError> {
        let cs = cyclic_state(l, branch)?;
        let phases = phases_for_state(l, &cs.state)?;
        Ok(StateReport {
            invariant_eigenvalue: cs.invariant_eigenvalue,
            cyclicity_defect: cs.cyclicity_defect,
            state: cs.state.0.map(|z| [z.re, z.im]),
            phases,
        })
    };
    let d = invariant_at(l, 0.0);
    Ok(LoopPhasesReport {
        loop_spec: *l,
        detuning: l.detuning(),
        omega_eff: l.omega_eff(),
        period: l.period(),
        invariant_0: d.invariant,
        gauge_potential: d.gauge_potential,
        plus: state_report(Branch::Plus)?,
        minus: state_report(Branch::Minus)?,
    })
}

pub fn loop_phases(cfg: &RunConfig, opts: &Options) -> Result<Rendered, CliError> {
    let crate::config::SystemConfig::Loop(l) = cfg.system else {
        return Err(CliError::Config(
            "loop-phases needs a single-loop system (\"system\": {\"loop\": ...})".into(),
        ));
    };
    let body = match opts.format(cfg, Format::Text) {
        Format::Json => to_json(&loop_phases_report(&l)?)?,
        Format::Csv => {
            let (row, _) = sweep_row(&l);
            format!("{SWEEP_HEADER}\n{}\n", row.to_csv())
        }
        Format::Text => render_loop_text(&loop_phases_report(&l)?),
    };
    Ok(Rendered::ok(body))
}

fn render_loop_text(r: &LoopPhasesReport) -> String {
    let l = &r.loop_spec;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "loop: omega_z={} omega_1={} phi_0={} omega={} n_periods={}",
        fmt_g(l.omega_z()),
        fmt_g(l.omega_1()),
        fmt_g(l.phi_0()),
        fmt_g(l.omega()),
        l.n_periods()
    );
    let _ = writeln!(
        s,
        "detuning={} Omega_eff={} period={}",
        fmt_g(r.detuning),
        fmt_g(r.omega_eff),
        fmt_g(r.period)
    );
    let i0 = &r.invariant_0;
    let _ = writeln!(
        s,
        "invariant(0): {}·1 + {}·σx + {}·σy + {}·σz",
        fmt_g(i0.c0),
        fmt_g(i0.cx),
        fmt_g(i0.cy),
        fmt_g(i0.cz)
    );
    let _ = writeln!(s, "gauge potential: {}·σz", fmt_g(r.gauge_potential.cz));
    let _ = writeln!(
        s,
        "{:<6} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>10}",
        "state",
        "eigenvalue",
        "total",
        "dynamical",
        "geometric",
        "solid_angle",
        "berry_ref",
        "cyc_defect"
    );
    for (name, st) in [("plus", &r.plus), ("minus", &r.minus)] {
        let p = &st.phases;
        let _ = writeln!(
            s,
            "{:<6} {:>14.10} {:>14.10} {:>14.10} {:>14.10} {:>14.10} {:>14.10} {:>10.2e}",
            name,
            st.invariant_eigenvalue,
            p.total_wrapped,
            p.dynamical_unwrapped,
            p.geometric_wrapped,
            p.solid_angle_check,
            p.berry_reference,
            st.cyclicity_defect
        );
    }
    s
}

/// One sweep CSV row. Phase cells are NaN when the loop has no
/// nondegenerate recurrent basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub omega_z: f64,
    pub omega_1: f64,
    pub delta: f64,
    #[serde(rename = "Omega_eff")]
    pub omega_eff: f64,
    pub phi_total_plus: f64,
    pub phi_dyn_plus: f64,
    pub phi_geo_plus: f64,
    pub phi_total_minus: f64,
    pub phi_dyn_minus: f64,
    pub phi_geo_minus: f64,
    pub pair_dyn_gap: f64,
    pub pair_geo_sum: f64,
    pub berry_ref: f64,
    pub solid_angle_check: f64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [
            self.omega,
            self.omega_z,
            self.omega_1,
            self.delta,
            self.omega_eff,
            self.phi_total_plus,
            self.phi_dyn_plus,
            self.phi_geo_plus,
            self.phi_total_minus,
            self.phi_dyn_minus,
            self.phi_geo_minus,
            self.pair_dyn_gap,
            self.pair_geo_sum,
            self.berry_ref,
            self.solid_angle_check,
        ]
        .map(fmt_g)
        .join(",")
    }
}

/// Row for `l`, with the `pair_*` columns taken against its time reverse.
pub fn sweep_row(l: &LoopSpec) -> (SweepRow, Option<Error>) {
    let mut row = SweepRow {
        omega: l.omega(),
        omega_z: l.omega_z(),
        omega_1: l.omega_1(),
        delta: l.detuning(),
        omega_eff: l.omega_eff(),
        phi_total_plus: f64::NAN,
        phi_dyn_plus: f64::NAN,
        phi_geo_plus: f64::NAN,
        phi_total_minus: f64::NAN,
        phi_dyn_minus: f64::NAN,
        phi_geo_minus: f64::NAN,
        pair_dyn_gap: f64::NAN,
        pair_geo_sum: f64::NAN,
        berry_ref: phases::berry_reference(l),
        solid_angle_check: f64::NAN,
    };
    let fill = |row: &mut SweepRow| -> Result<(), Error> {
        let plus = phases::loop_phases(l, Branch::Plus)?;
        let minus = phases::loop_phases(l, Branch::Minus)?;
        row.phi_total_plus = plus.total_wrapped;
        row.phi_dyn_plus = plus.dynamical_unwrapped;
        row.phi_geo_plus = plus.geometric_wrapped;
        row.phi_total_minus = minus.total_wrapped;
        row.phi_dyn_minus = minus.dynamical_unwrapped;
        row.phi_geo_minus = minus.geometric_wrapped;
        row.solid_angle_check = plus.solid_angle_check;
        let reversed = phases::loop_phases(&time_reversed(l), Branch::Plus)?;
        row.pair_dyn_gap = plus.dynamical_unwrapped - reversed.dynamical_unwrapped;
        row.pair_geo_sum = principal_angle(plus.geometric_wrapped + reversed.geometric_wrapped);
        Ok(())
    };
    let err = fill(&mut row).err();
    (row, err)
}

pub fn sweep(cfg: &RunConfig, opts: &Options) -> Result<Rendered, CliError> {
    let Some(sweep) = &cfg.sweep else {
        return Err(CliError::Config(
            "sweep needs a \"sweep\" block with parameter and values".into(),
        ));
    };
    let base = cfg.system.primary_loop();
    let mut warnings = Vec::new();
    let mut seen: Vec<f64> = Vec::new();
    for v in &sweep.values {
        if seen.contains(v) {
            warnings.push(format!(
                "duplicate sweep value {}; row emitted twice",
                fmt_g(*v)
            ));
        }
        seen.push(*v);
    }
    let mut rows = Vec::with_capacity(sweep.values.len());
    for v in &sweep.values {
        let l = base.with_parameter(sweep.parameter, *v)?;
        let (row, err) = sweep_row(&l);
        if let Some(e) = err {
            warnings.push(format!(
                "sweep value {}: {e}; phase cells left as nan",
                fmt_g(*v)
            ));
        }
        rows.push(row);
    }
    let body = match opts.format(cfg, Format::Csv) {
        Format::Csv => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&r.to_csv());
                s.push('\n');
            }
            s
        }
        Format::Json => to_json(&rows)?,
        Format::Text => {
            let mut s = SWEEP_HEADER.replace(',', "  ");
            s.push('\n');
            for r in &rows {
                s.push_str(&r.to_csv().replace(',', "  "));
                s.push('\n');
            }
            s
        }
    };
    Ok(Rendered {
        body,
        all_pass: true,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineVerdict {
    Pass,
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl LineVerdict {
    fn label(self) -> &'static str {
        match self {
            LineVerdict::Pass => "PASS",
            LineVerdict::Fail => "FAIL",
            LineVerdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimLine {
    pub claim_id: ClaimId,
    pub verdict: LineVerdict,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ClaimLine {
    fn from_outcome(id: ClaimId, outcome: Result<ClaimResult, Error>) -> Self {
        match outcome {
            Ok(r) => Self {
                claim_id: r.claim_id,
                verdict: match r.verdict {
                    Verdict::Pass => LineVerdict::Pass,
                    Verdict::Fail => LineVerdict::Fail,
                },
                measured: r.measured,
                tolerance: Some(r.tolerance),
                note: r.note,
            },
            Err(Error::ResonantDegenerate) => Self {
                claim_id: id,
                verdict: LineVerdict::NotApplicable,
                measured: BTreeMap::new(),
                tolerance: None,
                note: Some(Error::ResonantDegenerate.to_string()),
            },
            Err(e) => Self {
                claim_id: id,
                verdict: LineVerdict::Fail,
                measured: BTreeMap::new(),
                tolerance: None,
                note: Some(e.to_string()),
            },
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("{:<24} {:<4}", self.claim_id.as_str(), self.verdict.label());
        for (k, v) in &self.measured {
            let _ = write!(s, " {k}={}", fmt_g_digits(*v, 8));
        }
        if let Some(t) = self.tolerance {
            let _ = write!(s, " tol={}", fmt_g_digits(t, 3));
        }
        if let Some(n) = &self.note {
            let _ = write!(s, " ({n})");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsReport {
    pub all_pass: bool,
    pub claims: Vec<ClaimLine>,
}

/// Runs every claim check that applies to the configured system.
pub fn run_claims(cfg: &RunConfig, opts: &Options) -> Result<ClaimsReport, CliError> {
    let checker = ClaimChecker {
        tolerances: opts.tolerances()?,
        conjugate: cfg.conjugate,
    };
    let l = cfg.system.primary_loop();
    let partner = checker.conjugate.apply(&l)?;
    let mut lines = Vec::with_capacity(ClaimId::ALL.len());

    lines.push(ClaimLine::from_outcome(
        ClaimId::TotalPhaseEqual,
        checker.total_phase_equal(&l),
    ));

    let mut c2 = checker.propagator_identical(&l);
    if let Ok(r) = &mut c2 {
        let u = richardson_propagator(&l, l.duration(), opts.steps)?.unitary;
        let v = richardson_propagator(&partner, partner.duration(), opts.steps)?.unitary;
        r.measured.insert(
            "numeric_global_phase_distance".into(),
            global_phase_distance(&u, &v)?,
        );
    }
    lines.push(ClaimLine::from_outcome(ClaimId::PropagatorIdentical, c2));

    let c3 = match cfg.two_qubit() {
        Some(spec) => checker.dynamical_differ_sectors(&spec),
        None => checker.dynamical_differ(&l),
    };
    lines.push(ClaimLine::from_outcome(ClaimId::DynamicalDiffer, c3));
    lines.push(ClaimLine::from_outcome(
        ClaimId::InvariantsDiffer,
        Ok(checker.invariants_differ(&l)),
    ));
    lines.push(ClaimLine::from_outcome(
        ClaimId::RecurrentDiffer,
        checker.recurrent_differ(&l),
    ));
    if let Some(spec) = cfg.two_qubit() {
        let seq = cfg.resolved_sequence()?;
        lines.push(ClaimLine::from_outcome(
            ClaimId::SequenceGlobal,
            checker.sequence_global(&spec, &seq),
        ));
    }
    lines.push(ClaimLine::from_outcome(
        ClaimId::AdiabaticContrast,
        adiabatic_certificate(&l, &ADIABATIC_OMEGAS),
    ));

    let all_pass = lines.iter().all(|c| c.verdict != LineVerdict::Fail);
    Ok(ClaimsReport {
        all_pass,
        claims: lines,
    })
}

pub fn verify_claims(cfg: &RunConfig, opts: &Options) -> Result<Rendered, CliError> {
    let report = run_claims(cfg, opts)?;
    let body = match opts.format(cfg, Format::Text) {
        Format::Text => report.claims.iter().map(|c| c.render() + "\n").collect(),
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("claim_id,verdict,quantity,value\n");
            for c in &report.claims {
                let verdict = c.verdict.label().to_lowercase();
                if let Some(t) = c.tolerance {
                    let _ = writeln!(s, "{},{verdict},tolerance,{}", c.claim_id, fmt_g(t));
                }
                for (k, v) in &c.measured {
                    let _ = writeln!(s, "{},{verdict},{k},{}", c.claim_id, fmt_g(*v));
                }
            }
            s
        }
    };
    Ok(Rendered {
        body,
        all_pass: report.all_pass,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReportDocument {
    pub system: TwoQubitSpec,
    pub sequence: SequenceSpec,
    pub report: GateReport,
    pub claim: ClaimResult,
}

pub fn gate_report_document(
    cfg: &RunConfig,
    opts: &Options,
) -> Result<GateReportDocument, CliError> {
    let Some(spec) = cfg.two_qubit() else {
        return Err(CliError::Config(
            "gate-report needs a two-qubit system (\"system\": {\"two_qubit\": ...})".into(),
        ));
    };
    let sequence = cfg.resolved_sequence()?;
    let report = lrphase::claims::gate_report(&spec, &sequence)?;
    let claim = report.claim(opts.tolerances()?.phase);
    Ok(GateReportDocument {
        system: spec,
        sequence,
        report,
        claim,
    })
}

pub fn gate_report(cfg: &RunConfig, opts: &Options) -> Result<Rendered, CliError> {
    let doc = gate_report_document(cfg, opts)?;
    let all_pass = doc.claim.passed();
    let body = match opts.format(cfg, Format::Json) {
        Format::Json => to_json(&doc)?,
        Format::Text => {
            let r = &doc.report;
            let mut s = String::new();
            let _ = writeln!(s, "sequence length: {}", doc.sequence.elements().len());
            let _ = writeln!(s, "diagonality defect: {}", fmt_g(r.diagonality_defect));
            match (r.basis_phases, r.conditional_phase) {
                (Some(p), Some(c)) => {
                    let _ = writeln!(s, "basis phases (00,01,10,11): {}", p.map(fmt_g).join(" "));
                    let _ = writeln!(s, "conditional phase: {}", fmt_g(c));
                }
                _ => {
                    let _ = writeln!(s, "basis phases: not diagonal in the computational basis");
                }
            }
            let _ = writeln!(s, "distance from identity: {}", fmt_g(r.identity_distance));
            let _ = writeln!(s, "replacement distance: {}", fmt_g(r.replacement_distance));
            s.push_str(
                &ClaimLine::from_outcome(ClaimId::SequenceGlobal, Ok(doc.claim.clone())).render(),
            );
            s.push('\n');
            s
        }
        Format::Csv => {
            return Err(CliError::Config(
                "gate-report has no csv form; use json or text".into(),
            ))
        }
    };
    Ok(Rendered {
        body,
        all_pass,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1_config() -> RunConfig {
        RunConfig::parse(r#"{"system": {"loop": {"omega_z": 1.5, "omega_1": 1, "omega": 1}}}"#)
            .unwrap()
    }

    #[test]
    fn header_has_fifteen_columns() {
        assert_eq!(SWEEP_HEADER.split(',').count(), 15);
    }

    #[test]
    fn p1_row_matches_reference() {
        let (row, err) = sweep_row(&p1_config().system.primary_loop());
        assert!(err.is_none());
        assert!((row.phi_total_plus - (-0.370_814_8)).abs() < 1e-6);
        assert!((row.phi_dyn_plus - (-4.917_370_4)).abs() < 1e-6);
        assert!((row.phi_geo_plus - (-1.736_629_6)).abs() < 1e-6);
        assert_eq!(row.to_csv().split(',').count(), 15);
    }

    #[test]
    fn degenerate_row_is_nan_with_error() {
        let l = LoopSpec::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let (row, err) = sweep_row(&l);
        assert!(matches!(err, Some(Error::DegenerateInvariant { .. })));
        assert!(row.phi_total_plus.is_nan());
        assert_eq!(row.omega, 1.0);
    }

    #[test]
    fn single_loop_claims_skip_sequence_check() {
        let report = run_claims(&p1_config(), &Options::default()).unwrap();
        assert_eq!(report.claims.len(), 6);
        assert!(report.all_pass, "{report:?}");
    }

    #[test]
    fn resonant_loop_reports_not_applicable() {
        let cfg =
            RunConfig::parse(r#"{"system": {"loop": {"omega_z": 1, "omega_1": 1, "omega": 1}}}"#)
                .unwrap();
        let report = run_claims(&cfg, &Options::default()).unwrap();
        assert_eq!(report.claims[2].verdict, LineVerdict::NotApplicable);
        assert!(report.all_pass);
    }

    #[test]
    fn bad_tolerance_is_a_config_error() {
        let opts = Options {
            phase_tol: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(
            run_claims(&p1_config(), &opts),
            Err(CliError::Config(_))
        ));
    }
}
