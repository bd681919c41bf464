//! Observables extracted from trajectories: nonadiabatic transitions and
//! their delay times, final-state chirality, Riemann-sheet trajectories and
//! parameter sweeps.
//!
//! A nonadiabatic transition (NAT) is confirmed where `|c₊| = |c₋|` and the
//! newly dominant coefficient keeps its dominance; its delay time is counted
//! from the last branch-cut crossing at which the occupied branch entered
//! the loss sheet (or from t = 0 when the run starts in the loss state).

use crate::dynamics::{
    initial_state, integrate_envelope, DynamicsError, IntegratorOptions, Trajectory,
};
use crate::model::{self, EigenFrame, ModelError, StateLabel, SystemParams};
use crate::schedule::{cut_crossings, CutCrossing, Direction, LoopSpec, ScheduleError};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// An equality crossing occurred before any loss-entry reference; its
    /// delay is undefined.
    #[error("equality crossing at t={time} precedes any loss-entry crossing")]
    NoCrossingReference { time: f64 },
    #[error("trajectory too sparse: {samples_per_period} samples/period, need >= {required}")]
    InsufficientSampling {
        samples_per_period: usize,
        required: usize,
    },
    #[error("state vanished at t={time}: both coefficients below 1e-300")]
    ZeroState { time: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Minimum recorded samples per period required by NAT detection.
const MIN_SAMPLES_PER_PERIOD: usize = 1000;

/// Fraction of the period the new dominant coefficient must hold dominance
/// for an equality crossing to count as a NAT. Suppresses grazing crossings
/// near the branch cut.
const DOMINANCE_HOLD_FRACTION: f64 = 0.01;

/// One confirmed nonadiabatic transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NatEvent {
    /// Interpolated time of the `|c₊| = |c₋|` crossing.
    pub time: f64,
    /// The loss-entry reference the delay is counted from.
    pub preceding_crossing: f64,
    /// `time - preceding_crossing`, strictly positive.
    pub delay: f64,
}

/// Direction, initial and final labels, transitions and the final overlap of
/// one loop run. `final_label` is `None` when the overlap ratio does not
/// reach the tie threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ChiralityReport {
    pub direction: Direction,
    pub initial_label: StateLabel,
    pub final_label: Option<StateLabel>,
    pub nat_events: Vec<NatEvent>,
    /// Dominant/subdominant magnitude of the final state projected onto the
    /// initial frame; at least 1.
    pub final_overlap_ratio: f64,
}

impl ChiralityReport {
    /// Final state matches the direction-determined chiral outcome
    /// (CW -> minus, CCW -> plus in initial-frame labels).
    pub fn matches_chiral_pattern(&self) -> bool {
        self.final_label == Some(expected_final(self.direction))
    }
}

/// Initial-frame label the chiral conversion sends every state to.
pub fn expected_final(direction: Direction) -> StateLabel {
    match direction {
        Direction::Cw => StateLabel::Minus,
        Direction::Ccw => StateLabel::Plus,
    }
}

fn dominant(c: &(C64, C64)) -> StateLabel {
    if c.0.norm() >= c.1.norm() {
        StateLabel::Plus
    } else {
        StateLabel::Minus
    }
}

/// Instantaneous loss label at or after sample `idx` (the spectrum is real
/// exactly on the cut, so scan forward to the first split frame).
fn loss_label_from(traj: &Trajectory, idx: usize) -> Option<StateLabel> {
    traj.frames[idx..].iter().find_map(|f| f.loss_label())
}

/// Detect nonadiabatic transitions along a trajectory.
///
/// `crossings` are the schedule-level cut crossings; their `entering_loss`
/// flags are recomputed here from the trajectory (which branch the state
/// actually occupied). Events are confirmed with the dominance-hold window
/// and their delays measured from the latest preceding loss entry.
pub fn detect_nats(
    traj: &Trajectory,
    crossings: &[CutCrossing],
) -> Result<Vec<NatEvent>, AnalysisError> {
    let n = traj.len();
    let spp = if n < 2 { 0 } else { traj.samples_per_period() };
    if spp < MIN_SAMPLES_PER_PERIOD {
        return Err(AnalysisError::InsufficientSampling {
            samples_per_period: spp,
            required: MIN_SAMPLES_PER_PERIOD,
        });
    }

    let d: Vec<f64> = traj
        .coeffs
        .iter()
        .map(|(p, m)| p.norm() - m.norm())
        .collect();

    // Loss-entry references, resolved against the trajectory.
    let mut refs: Vec<f64> = Vec::new();
    for c in crossings {
        let before = match traj.times.iter().rposition(|&t| t <= c.time) {
            Some(i) => i,
            None => 0,
        };
        let after = traj
            .times
            .iter()
            .position(|&t| t > c.time)
            .unwrap_or(n - 1);
        let dom = dominant(&traj.coeffs[before]);
        let entering_loss = match loss_label_from(traj, after) {
            Some(loss) => loss == dom,
            None => c.entering_loss,
        };
        if entering_loss {
            refs.push(c.time);
        }
    }
    // A run started in the loss state counts t = 0 as its reference.
    if loss_label_from(traj, 0) == Some(dominant(&traj.coeffs[0])) && !refs.contains(&0.0) {
        refs.push(0.0);
    }
    refs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let window = DOMINANCE_HOLD_FRACTION * traj.period();
    let mut events: Vec<NatEvent> = Vec::new();
    let mut sign = if d[0] >= 0.0 { 1.0 } else { -1.0 };
    for i in 0..n - 1 {
        let flips = (sign > 0.0 && d[i] >= 0.0 && d[i + 1] < 0.0)
            || (sign < 0.0 && d[i] <= 0.0 && d[i + 1] > 0.0);
        if !flips {
            continue;
        }
        let t0 = traj.times[i];
        let t1 = traj.times[i + 1];
        let t_ev = t0 + (t1 - t0) * d[i] / (d[i] - d[i + 1]);
        let new_sign = -sign;
        let held = traj.times[i + 1..]
            .iter()
            .zip(&d[i + 1..])
            .take_while(|(t, _)| **t <= t_ev + window)
            .all(|(_, &dk)| dk * new_sign >= 0.0);
        if !held {
            continue; // grazing crossing, dominance not retained
        }
        let reference = refs.iter().rev().find(|&&r| r < t_ev).copied();
        match reference {
            None => return Err(AnalysisError::NoCrossingReference { time: t_ev }),
            Some(r) => events.push(NatEvent {
                time: t_ev,
                preceding_crossing: r,
                delay: t_ev - r,
            }),
        }
        sign = new_sign;
    }
    Ok(events)
}

/// Riemann-sheet trajectory: the coefficient-weighted mean eigenvalue
/// `(|c₋|²λ₋ + |c₊|²λ₊)/(|c₋|²+|c₊|²)` per recorded sample.
pub fn riemann_trajectory(traj: &Trajectory) -> Result<Vec<(f64, C64)>, AnalysisError> {
    traj.times
        .iter()
        .zip(traj.coeffs.iter().zip(&traj.frames))
        .map(|(&t, ((cp, cm), frame))| {
            let wp = cp.norm_sqr();
            let wm = cm.norm_sqr();
            if wp < 1e-300 && wm < 1e-300 {
                return Err(AnalysisError::ZeroState { time: t });
            }
            Ok((
                t,
                (wp * frame.lambda_plus + wm * frame.lambda_minus) / (wp + wm),
            ))
        })
        .collect()
}

/// Classify the final state of a run in the fixed initial frame.
///
/// The final label is the larger of `|l±(0)ᵀ Ψ(T)|`; the verdict is withheld
/// (`final_label = None`) when the dominant/subdominant ratio does not
/// exceed `tie_ratio` (default 10 in the CLI).
pub fn classify_final(
    traj: &Trajectory,
    initial_frame: &EigenFrame,
    tie_ratio: f64,
) -> Result<ChiralityReport, AnalysisError> {
    let psi = traj.states.last().expect("trajectory is never empty").as_vec();
    let op = (initial_frame.l_plus[0] * psi[0] + initial_frame.l_plus[1] * psi[1]).norm();
    let om = (initial_frame.l_minus[0] * psi[0] + initial_frame.l_minus[1] * psi[1]).norm();
    let (label, ratio) = if op >= om {
        (StateLabel::Plus, op / om)
    } else {
        (StateLabel::Minus, om / op)
    };
    let crossings = cut_crossings(&traj.spec, traj.omega);
    let nat_events = detect_nats(traj, &crossings)?;
    Ok(ChiralityReport {
        direction: traj.spec.direction(),
        initial_label: dominant(&traj.coeffs[0]),
        final_label: (ratio > tie_ratio).then_some(label),
        nat_events,
        final_overlap_ratio: ratio,
    })
}

/// Run one loop (direction and initial label applied to `spec`) and classify
/// the outcome. Returns the trajectory alongside the report.
pub fn run_loop(
    params: &SystemParams,
    spec: &LoopSpec,
    init_label: StateLabel,
    opts: &IntegratorOptions,
    tie_ratio: f64,
) -> Result<(Trajectory, ChiralityReport), AnalysisError> {
    let omega = params.detuning();
    let frame0 = model::eigenframe(
        omega,
        crate::schedule::gamma_at(spec, 0.0),
        crate::schedule::theta_at(spec, 0.0),
        None,
    )?;
    let init = initial_state(&frame0, init_label);
    let traj = integrate_envelope(params, spec, &init, opts)?;
    let report = classify_final(&traj, &frame0, tie_ratio)?;
    Ok((traj, report))
}

/// Swept loop parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ATheta,
    AGamma,
    Gamma0,
    OmegaC,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ATheta => "a_theta",
            SweepAxis::AGamma => "a_gamma",
            SweepAxis::Gamma0 => "gamma_0",
            SweepAxis::OmegaC => "omega_c",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "a_theta" => Some(SweepAxis::ATheta),
            "a_gamma" => Some(SweepAxis::AGamma),
            "gamma_0" => Some(SweepAxis::Gamma0),
            "omega_c" => Some(SweepAxis::OmegaC),
            _ => None,
        }
    }

    /// Template with this axis set to `value` (the ω_c axis takes the
    /// magnitude; direction is applied separately).
    pub fn apply(self, template: &LoopSpec, value: f64) -> LoopSpec {
        let mut spec = *template;
        match self {
            SweepAxis::ATheta => spec.a_theta = value,
            SweepAxis::AGamma => spec.a_gamma = value,
            SweepAxis::Gamma0 => spec.gamma_0 = value,
            SweepAxis::OmegaC => spec.omega_c = value.abs() * spec.omega_c.signum(),
        }
        spec
    }
}

/// Delay times along a parameter sweep. `delay_times[i]` holds the delays of
/// all NATs at `axis_values[i]` (empty = no NAT); `errors[i]` records a
/// per-point failure without aborting the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub delay_times: Vec<Vec<f64>>,
    pub chiral_flags: Vec<bool>,
    pub errors: Vec<Option<String>>,
}

/// Sweep one loop parameter, integrating and extracting NAT delays at every
/// value. Points run in parallel; results keep the axis order. When `opts`
/// is `None` each point uses the default step for its own period (which is
/// what an ω_c sweep needs).
pub fn sweep_delay(
    params: &SystemParams,
    template: &LoopSpec,
    axis: SweepAxis,
    values: &[f64],
    init_label: StateLabel,
    direction: Direction,
    opts: Option<&IntegratorOptions>,
    tie_ratio: f64,
) -> SweepResult {
    let points: Vec<(Vec<f64>, bool, Option<String>)> = values
        .par_iter()
        .map(|&v| {
            let spec = axis.apply(template, v).with_direction(direction);
            if let Err(e) = spec.validate() {
                return (Vec::new(), false, Some(e.to_string()));
            }
            let point_opts = opts
                .copied()
                .unwrap_or_else(|| IntegratorOptions::for_loop(&spec));
            match run_loop(params, &spec, init_label, &point_opts, tie_ratio) {
                Ok((_, report)) => (
                    report.nat_events.iter().map(|e| e.delay).collect(),
                    report.matches_chiral_pattern(),
                    None,
                ),
                Err(e) => (Vec::new(), false, Some(e.to_string())),
            }
        })
        .collect();

    let mut result = SweepResult {
        axis_name: axis.name().to_string(),
        axis_values: values.to_vec(),
        delay_times: Vec::with_capacity(points.len()),
        chiral_flags: Vec::with_capacity(points.len()),
        errors: Vec::with_capacity(points.len()),
    };
    for (delays, flag, err) in points {
        result.delay_times.push(delays);
        result.chiral_flags.push(flag);
        result.errors.push(err);
    }
    result
}

/// Reports for all four direction x initial-label combinations of one loop.
#[derive(Debug, Clone, Serialize)]
pub struct ChiralityMatrix {
    pub cw_from_plus: ChiralityReport,
    pub cw_from_minus: ChiralityReport,
    pub ccw_from_plus: ChiralityReport,
    pub ccw_from_minus: ChiralityReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiralityVerdict {
    /// Direction alone fixes the final state, and the two directions differ.
    Chiral,
    /// All outcomes determinate but not direction-chiral.
    Nonchiral,
    /// At least one run ended without a determinate final label.
    Undetermined,
}

impl ChiralityMatrix {
    pub fn reports(&self) -> [&ChiralityReport; 4] {
        [
            &self.cw_from_plus,
            &self.cw_from_minus,
            &self.ccw_from_plus,
            &self.ccw_from_minus,
        ]
    }

    pub fn verdict(&self) -> ChiralityVerdict {
        let labels: Vec<Option<StateLabel>> =
            self.reports().iter().map(|r| r.final_label).collect();
        if labels.iter().any(|l| l.is_none()) {
            return ChiralityVerdict::Undetermined;
        }
        let cw = (labels[0], labels[1]);
        let ccw = (labels[2], labels[3]);
        if cw.0 == cw.1 && ccw.0 == ccw.1 && cw.0 != ccw.0 {
            ChiralityVerdict::Chiral
        } else {
            ChiralityVerdict::Nonchiral
        }
    }
}

/// Run all four (direction, initial label) combinations of `spec`.
pub fn chirality_matrix(
    params: &SystemParams,
    spec: &LoopSpec,
    opts: &IntegratorOptions,
    tie_ratio: f64,
) -> Result<ChiralityMatrix, AnalysisError> {
    let combos = [
        (Direction::Cw, StateLabel::Plus),
        (Direction::Cw, StateLabel::Minus),
        (Direction::Ccw, StateLabel::Plus),
        (Direction::Ccw, StateLabel::Minus),
    ];
    let mut reports: Vec<ChiralityReport> = combos
        .par_iter()
        .map(|&(dir, label)| {
            let spec = spec.with_direction(dir);
            run_loop(params, &spec, label, opts, tie_ratio).map(|(_, r)| r)
        })
        .collect::<Result<_, _>>()?;
    let ccw_from_minus = reports.pop().unwrap();
    let ccw_from_plus = reports.pop().unwrap();
    let cw_from_minus = reports.pop().unwrap();
    let cw_from_plus = reports.pop().unwrap();
    Ok(ChiralityMatrix {
        cw_from_plus,
        cw_from_minus,
        ccw_from_plus,
        ccw_from_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eigenframe;
    use crate::schedule::{gamma_at, theta_at};
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    fn omega() -> f64 {
        TAU * 0.1
    }

    fn params() -> SystemParams {
        SystemParams::from_carrier(TAU * 10.0, omega(), 0.0).unwrap()
    }

    /// Tiny hand-built trajectory with prescribed coefficients on a fixed
    /// frame; enough structure for the pointwise analysis ops.
    fn synthetic(coeffs: Vec<(C64, C64)>) -> Trajectory {
        let om = omega();
        let spec = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 10.0, om / 8.0).unwrap();
        let n = coeffs.len();
        let frame = eigenframe(om, 0.4 * om, 0.3, None).unwrap();
        let rebuild = |c: &(C64, C64)| {
            crate::dynamics::EnvelopeState::new(
                c.0 * frame.r_plus[0] + c.1 * frame.r_minus[0],
                c.0 * frame.r_plus[1] + c.1 * frame.r_minus[1],
            )
        };
        Trajectory {
            spec,
            omega: om,
            times: (0..n).map(|i| i as f64).collect(),
            states: coeffs.iter().map(rebuild).collect(),
            coeffs,
            frames: vec![frame; n],
            schedule_values: vec![(0.3, 0.4 * om); n],
            log_scale: vec![0.0; n],
        }
    }

    #[test]
    fn riemann_pure_plus_segment() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let traj = synthetic(vec![(one, zero); 4]);
        let rt = riemann_trajectory(&traj).unwrap();
        for (_, v) in rt {
            assert!((v - traj.frames[0].lambda_plus).norm() < 1e-14);
        }
    }

    #[test]
    fn riemann_equal_weights_hits_zero() {
        let one = C64::new(1.0, 0.0);
        let traj = synthetic(vec![(one, one); 3]);
        let rt = riemann_trajectory(&traj).unwrap();
        for (_, v) in rt {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn riemann_zero_state_is_error() {
        let zero = C64::new(0.0, 0.0);
        let traj = synthetic(vec![(zero, zero); 2]);
        assert!(matches!(
            riemann_trajectory(&traj),
            Err(AnalysisError::ZeroState { .. })
        ));
    }

    #[test]
    fn detect_requires_dense_sampling() {
        let one = C64::new(1.0, 0.0);
        let traj = synthetic(vec![(one, one); 10]);
        assert!(matches!(
            detect_nats(&traj, &[]),
            Err(AnalysisError::InsufficientSampling { .. })
        ));
    }

    #[test]
    fn hermitian_loop_has_no_transitions_and_no_chirality() {
        // Γ ≡ 0 slow loop: adiabatic Hermitian transport, final = initial.
        let om = omega();
        let spec = LoopSpec::new(0.0, 0.0, PI / 20.0, om / 8.0).unwrap();
        let opts = IntegratorOptions::for_loop(&spec);
        let m = chirality_matrix(&params(), &spec, &opts, 10.0).unwrap();
        for r in m.reports() {
            assert!(r.nat_events.is_empty());
            assert_eq!(r.final_label, Some(r.initial_label));
        }
        assert_eq!(m.verdict(), ChiralityVerdict::Nonchiral);
    }

    #[test]
    fn straight_path_cw_from_plus_single_late_transition() {
        let om = omega();
        let spec = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 6.0, om / 17.0)
            .unwrap()
            .with_direction(Direction::Cw);
        let opts = IntegratorOptions::for_loop(&spec);
        let (traj, report) = run_loop(&params(), &spec, StateLabel::Plus, &opts, 10.0).unwrap();
        assert_eq!(report.nat_events.len(), 1, "events: {:?}", report.nat_events);
        let ev = report.nat_events[0];
        let half = traj.period() / 2.0;
        assert!(ev.time > half);
        assert!((ev.preceding_crossing - half).abs() < 1e-6 * traj.period());
        assert!(ev.delay > 0.0);
        assert_eq!(report.final_label, Some(StateLabel::Minus));
    }

    #[test]
    fn transition_times_stable_under_stride_halving() {
        let om = omega();
        let spec = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 6.0, om / 17.0)
            .unwrap()
            .with_direction(Direction::Cw);
        let dt = spec.period() / 20_000.0;
        let run = |stride: usize| {
            let opts = IntegratorOptions::new(dt, stride);
            let (traj, report) = run_loop(&params(), &spec, StateLabel::Minus, &opts, 10.0).unwrap();
            (traj.period(), report.nat_events)
        };
        let (period, ev_a) = run(4);
        let (_, ev_b) = run(2);
        assert_eq!(ev_a.len(), ev_b.len());
        for (a, b) in ev_a.iter().zip(&ev_b) {
            assert!((a.time - b.time).abs() < 1e-3 * period);
        }
    }

    #[test]
    fn sweep_preserves_order_and_flags() {
        let om = omega();
        let template = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 6.0, om / 17.0).unwrap();
        let values = [0.5 * om, 0.7 * om, 0.9 * om];
        let res = sweep_delay(
            &params(),
            &template,
            SweepAxis::Gamma0,
            &values,
            StateLabel::Minus,
            Direction::Cw,
            None,
            10.0,
        );
        assert_eq!(res.axis_name, "gamma_0");
        assert_eq!(res.axis_values, values);
        assert_eq!(res.delay_times.len(), 3);
        assert_eq!(res.chiral_flags.len(), 3);
        assert!(res.errors.iter().all(|e| e.is_none()));
        // Invariant: empty delay list == no-NAT point; otherwise delays > 0.
        for delays in &res.delay_times {
            for d in delays {
                assert!(*d > 0.0);
            }
        }
    }

    #[test]
    fn sweep_records_per_point_errors() {
        let om = omega();
        let template = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0).unwrap();
        // a_theta = 2.0 is out of range: recorded, not fatal.
        let res = sweep_delay(
            &params(),
            &template,
            SweepAxis::ATheta,
            &[PI / 30.0, 2.0],
            StateLabel::Minus,
            Direction::Cw,
            None,
            10.0,
        );
        assert!(res.errors[0].is_none());
        assert!(res.errors[1].is_some());
        assert!(res.delay_times[1].is_empty());
        assert!(!res.chiral_flags[1]);
    }

    #[test]
    fn classify_pure_final_state_has_infinite_ratio() {
        let om = omega();
        let spec = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 10.0, om / 8.0).unwrap();
        let frame0 = eigenframe(om, gamma_at(&spec, 0.0), theta_at(&spec, 0.0), None).unwrap();
        // Hand-build a two-sample trajectory ending exactly in r₋(0).
        let n = 2001;
        let minus = initial_state(&frame0, StateLabel::Minus);
        let traj = Trajectory {
            spec,
            omega: om,
            times: (0..n).map(|i| spec.period() * i as f64 / (n - 1) as f64).collect(),
            states: vec![minus; n],
            coeffs: vec![(C64::new(0.0, 0.0), C64::new(1.0, 0.0)); n],
            frames: vec![frame0.clone(); n],
            schedule_values: vec![(FRAC_PI_4, 2.0 * om / 3.0); n],
            log_scale: vec![0.0; n],
        };
        let report = classify_final(&traj, &frame0, 10.0).unwrap();
        assert_eq!(report.final_label, Some(StateLabel::Minus));
        assert!(report.final_overlap_ratio.is_infinite());
    }
}
