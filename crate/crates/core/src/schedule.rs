//! Time-dependent parameter loops: a triangle-wave rotation angle θ(t) and a
//! sinusoidal gain/loss Γ(t) sharing one loop frequency ω_c, plus detection
//! of branch-cut crossings along the path.
//!
//! The sign of `omega_c` is the loop direction: counterclockwise for
//! `omega_c > 0`, clockwise for `omega_c < 0`. Both schedules are evaluated
//! in closed form; θ(t) is the exactly integrated triangle wave, not a
//! quadrature.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid loop spec: {0}")]
    InvalidSpec(String),
    #[error("step too coarse: dt={dt} must be below T/8={limit}")]
    StepTooCoarse { dt: f64, limit: f64 },
}

/// Loop traversal direction, defined by the sign of ω_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Cw,
    Ccw,
}

impl Direction {
    /// Sign carried by ω_c for this direction.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Ccw => 1.0,
            Direction::Cw => -1.0,
        }
    }

    pub fn from_omega_c(omega_c: f64) -> Self {
        if omega_c > 0.0 {
            Direction::Ccw
        } else {
            Direction::Cw
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Cw => "cw",
            Direction::Ccw => "ccw",
        }
    }
}

/// Definition of one parameter loop.
///
/// ```text
/// θ(t) = θ_center + A_θ · tri(ω_c t + φ₀)            (unit triangle wave)
/// Γ(t) = Γ₀ + A_Γ · sin(ω_c t + φ₀ + φ_γ + π/2)
/// ```
///
/// `start_phase` (φ₀, default 0) shifts where on the loop the evolution
/// starts; with the defaults the path starts at θ = θ_center, Γ = Γ₀ + A_Γ.
///
/// `gamma_phase` (φ_γ, default 0) offsets the Γ oscillation against the θ
/// triangle. Encircling runs that must start on the branch cut (the
/// PT-symmetric segment, Γ(0) < Ω) use φ_γ = π, which starts the loop at
/// Γ₀ - A_Γ without changing the direction semantics of the θ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub gamma_0: f64,
    pub a_gamma: f64,
    pub a_theta: f64,
    /// Signed loop angular frequency; must be nonzero.
    pub omega_c: f64,
    pub theta_center: f64,
    pub n_periods: u32,
    pub start_phase: f64,
    pub gamma_phase: f64,
}

impl LoopSpec {
    pub fn new(gamma_0: f64, a_gamma: f64, a_theta: f64, omega_c: f64) -> Result<Self, ScheduleError> {
        let spec = Self {
            gamma_0,
            a_gamma,
            a_theta,
            omega_c,
            theta_center: FRAC_PI_4,
            n_periods: 1,
            start_phase: 0.0,
            gamma_phase: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_theta_center(mut self, theta_center: f64) -> Self {
        self.theta_center = theta_center;
        self
    }

    pub fn with_n_periods(mut self, n: u32) -> Self {
        self.n_periods = n;
        self
    }

    pub fn with_start_phase(mut self, phase: f64) -> Self {
        self.start_phase = phase;
        self
    }

    pub fn with_gamma_phase(mut self, phase: f64) -> Self {
        self.gamma_phase = phase;
        self
    }

    /// Loop starting on the branch cut: θ(0) = θ_center and Γ(0) = Γ₀ - A_Γ.
    pub fn starting_on_cut(self) -> Self {
        self.with_start_phase(0.0).with_gamma_phase(PI)
    }

    /// Same loop traversed in the given direction (forces the sign of ω_c).
    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.omega_c = self.omega_c.abs() * direction.sign();
        self
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        if !(self.a_gamma >= 0.0) {
            return Err(ScheduleError::InvalidSpec(format!(
                "a_gamma must be nonnegative, got {}",
                self.a_gamma
            )));
        }
        if !(self.a_theta >= 0.0 && self.a_theta <= PI / 2.0) {
            return Err(ScheduleError::InvalidSpec(format!(
                "a_theta must lie in [0, pi/2], got {}",
                self.a_theta
            )));
        }
        if self.gamma_0 - self.a_gamma < 0.0 {
            return Err(ScheduleError::InvalidSpec(format!(
                "gamma_0 - a_gamma = {} is negative",
                self.gamma_0 - self.a_gamma
            )));
        }
        if !(self.omega_c != 0.0 && self.omega_c.is_finite()) {
            return Err(ScheduleError::InvalidSpec(format!(
                "omega_c must be a nonzero finite rate, got {}",
                self.omega_c
            )));
        }
        if self.n_periods == 0 {
            return Err(ScheduleError::InvalidSpec("n_periods must be positive".into()));
        }
        if !self.theta_center.is_finite()
            || !self.start_phase.is_finite()
            || !self.gamma_phase.is_finite()
        {
            return Err(ScheduleError::InvalidSpec(
                "theta_center, start_phase and gamma_phase must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Loop period T = 2π/|ω_c|.
    pub fn period(&self) -> f64 {
        TAU / self.omega_c.abs()
    }

    /// Full run duration n_periods · T.
    pub fn total_time(&self) -> f64 {
        self.n_periods as f64 * self.period()
    }

    pub fn direction(&self) -> Direction {
        Direction::from_omega_c(self.omega_c)
    }
}

/// Unit triangle wave with period 2π: 0 at phase 0, +1 at π/2, 0 at π,
/// -1 at 3π/2, slope ±2/π. Clamped so the range is exactly [-1, 1].
fn triangle(phase: f64) -> f64 {
    (2.0 / PI * phase.sin().asin()).clamp(-1.0, 1.0)
}

/// Rotation angle θ(t).
pub fn theta_at(spec: &LoopSpec, t: f64) -> f64 {
    spec.theta_center + spec.a_theta * triangle(spec.omega_c * t + spec.start_phase)
}

/// Gain/loss rate Γ(t).
pub fn gamma_at(spec: &LoopSpec, t: f64) -> f64 {
    spec.gamma_0
        + spec.a_gamma * (spec.omega_c * t + spec.start_phase + spec.gamma_phase).cos()
}

/// Uniformly sampled closed path `(t, θ, Γ)` over the whole run.
///
/// Fails with [`ScheduleError::StepTooCoarse`] when `dt >= T/8`; the path is
/// closed, so the first and last parameter points agree to ~1e-12.
pub fn sample_path(spec: &LoopSpec, dt: f64) -> Result<Vec<(f64, f64, f64)>, ScheduleError> {
    spec.validate()?;
    let period = spec.period();
    if !(dt > 0.0) || dt >= period / 8.0 {
        return Err(ScheduleError::StepTooCoarse {
            dt,
            limit: period / 8.0,
        });
    }
    let total = spec.total_time();
    let n = (total / dt).ceil() as usize;
    Ok((0..=n)
        .map(|i| {
            let t = total * i as f64 / n as f64;
            (t, theta_at(spec, t), gamma_at(spec, t))
        })
        .collect())
}

/// One crossing of the PT-symmetric branch-cut segment (`cos 2θ = 0` with
/// `Γ < Ω`).
///
/// `entering_loss` here is the schedule-level default: at a transversal
/// crossing the gain and loss labels of the tracked branches exchange, so a
/// state that was riding the gain branch enters the loss branch. Whether the
/// *occupied* branch actually does so depends on the trajectory; NAT
/// detection recomputes the flag from the integrated coefficients and
/// overrides this default (the t = 0 start-on-cut entry in particular
/// depends on the initial label).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutCrossing {
    pub time: f64,
    pub entering_loss: bool,
}

/// Times in `[0, n_periods·T)` where the path crosses the branch cut.
///
/// A run that starts exactly on the cut registers t = 0 as a crossing.
/// Tangential touches of `cos 2θ = 0` (the excursion just reaching a zero)
/// and passes with `Γ(t) >= Ω` are not crossings.
pub fn cut_crossings(spec: &LoopSpec, omega: f64) -> Vec<CutCrossing> {
    let total = spec.total_time();
    let mut times: Vec<f64> = Vec::new();

    if spec.a_theta == 0.0 {
        // Degenerate in θ: the path either never touches the cut or lies on
        // it entirely; neither yields a transversal crossing.
        return Vec::new();
    }

    // Zeros of cos 2θ inside the θ excursion: θ* = π/4 + mπ/2.
    let lo = spec.theta_center - spec.a_theta;
    let hi = spec.theta_center + spec.a_theta;
    let m_lo = ((lo - FRAC_PI_4) / (PI / 2.0)).floor() as i64 - 1;
    let m_hi = ((hi - FRAC_PI_4) / (PI / 2.0)).ceil() as i64 + 1;
    for m in m_lo..=m_hi {
        let theta_star = FRAC_PI_4 + m as f64 * PI / 2.0;
        let v = (theta_star - spec.theta_center) / spec.a_theta;
        if v.abs() >= 1.0 {
            continue; // out of range, or a tangential touch
        }
        // Phases (mod 2π) where the triangle takes the value v: one on the
        // rising edge, one on the falling edge.
        let base = PI / 2.0 * v;
        for phase0 in [base, PI - base] {
            // Solve ω_c t + φ₀ = phase0 + 2πk over the run window.
            let k_a = (spec.omega_c * 0.0 + spec.start_phase - phase0) / TAU;
            let k_b = (spec.omega_c * total + spec.start_phase - phase0) / TAU;
            let (k_min, k_max) = if k_a <= k_b { (k_a, k_b) } else { (k_b, k_a) };
            for k in (k_min.floor() as i64 - 1)..=(k_max.ceil() as i64 + 1) {
                let t = (phase0 + TAU * k as f64 - spec.start_phase) / spec.omega_c;
                if t >= -total * 1e-12 && t < total * (1.0 - 1e-12) {
                    times.push(t.max(0.0));
                }
            }
        }
    }

    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < spec.period() * 1e-9);
    times
        .into_iter()
        .filter(|&t| gamma_at(spec, t) < omega)
        .map(|time| CutCrossing {
            time,
            entering_loss: true,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = TAU;

    fn omega() -> f64 {
        TWO_PI * 0.1
    }

    fn orange_loop() -> LoopSpec {
        let om = omega();
        LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0).unwrap()
    }

    fn green_path() -> LoopSpec {
        let om = omega();
        LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 10.0, om / 8.0).unwrap()
    }

    #[test]
    fn theta_starts_at_center_and_peaks_at_quarter_period() {
        let spec = orange_loop();
        let t_q = spec.period() / 4.0;
        assert!((theta_at(&spec, 0.0) - FRAC_PI_4).abs() < 1e-15);
        assert!((theta_at(&spec, t_q) - (FRAC_PI_4 + spec.a_theta)).abs() < 1e-12);
        assert!((theta_at(&spec, 2.0 * t_q) - FRAC_PI_4).abs() < 1e-12);
        // CW peaks on the other side.
        let cw = spec.with_direction(Direction::Cw);
        assert!((theta_at(&cw, t_q) - (FRAC_PI_4 - spec.a_theta)).abs() < 1e-12);
    }

    #[test]
    fn gamma_extremes() {
        let spec = orange_loop();
        assert!((gamma_at(&spec, 0.0) - (spec.gamma_0 + spec.a_gamma)).abs() < 1e-15);
        assert!(
            (gamma_at(&spec, spec.period() / 2.0) - (spec.gamma_0 - spec.a_gamma)).abs() < 1e-15
        );
        let flat = green_path();
        for k in 0..10 {
            assert_eq!(gamma_at(&flat, k as f64 * 0.77), flat.gamma_0);
        }
    }

    #[test]
    fn closure_and_range() {
        let spec = orange_loop().with_n_periods(3);
        let t_end = spec.total_time();
        assert!((theta_at(&spec, t_end) - theta_at(&spec, 0.0)).abs() < 1e-12);
        assert!((gamma_at(&spec, t_end) - gamma_at(&spec, 0.0)).abs() < 1e-12);
        for k in 0..=5000 {
            let t = t_end * k as f64 / 5000.0;
            let th = theta_at(&spec, t);
            let g = gamma_at(&spec, t);
            assert!(th >= spec.theta_center - spec.a_theta - 1e-15);
            assert!(th <= spec.theta_center + spec.a_theta + 1e-15);
            assert!(g >= spec.gamma_0 - spec.a_gamma - 1e-15);
            assert!(g <= spec.gamma_0 + spec.a_gamma + 1e-15);
        }
    }

    #[test]
    fn direction_reversal_is_time_reversal() {
        let ccw = orange_loop();
        let cw = ccw.with_direction(Direction::Cw);
        let total = ccw.total_time();
        for k in 0..=999 {
            let t = total * k as f64 / 999.0;
            assert!((theta_at(&cw, t) - theta_at(&ccw, total - t)).abs() < 1e-12);
            assert!((gamma_at(&cw, t) - gamma_at(&ccw, total - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_speed_away_from_turning_points() {
        let spec = orange_loop();
        let expect = 2.0 * spec.a_theta / PI * spec.omega_c.abs();
        let dt = spec.period() * 1e-6;
        for &frac in &[0.05, 0.15, 0.35, 0.6, 0.9] {
            let t = spec.period() * frac;
            let slope = (theta_at(&spec, t + dt) - theta_at(&spec, t - dt)) / (2.0 * dt);
            assert!((slope.abs() - expect).abs() < 1e-6 * expect);
        }
    }

    #[test]
    fn sample_path_closes_and_guards_step() {
        let spec = orange_loop();
        let pts = sample_path(&spec, spec.period() / 200.0).unwrap();
        let first = pts.first().unwrap();
        let last = pts.last().unwrap();
        assert!((first.1 - last.1).abs() < 1e-12);
        assert!((first.2 - last.2).abs() < 1e-12);
        assert!(matches!(
            sample_path(&spec, spec.period()),
            Err(ScheduleError::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn green_path_crossings_at_endpoints_and_half_period() {
        let spec = green_path();
        let xs = cut_crossings(&spec, omega());
        let period = spec.period();
        assert_eq!(xs.len(), 2, "got {xs:?}");
        assert!(xs[0].time.abs() < 1e-9 * period);
        assert!((xs[1].time - period / 2.0).abs() < 1e-9 * period);

        // Same times regardless of direction.
        let cw = spec.with_direction(Direction::Cw);
        let xs_cw = cut_crossings(&cw, omega());
        assert_eq!(xs_cw.len(), 2);
        assert!(xs_cw[0].time.abs() < 1e-9 * period);
        assert!((xs_cw[1].time - period / 2.0).abs() < 1e-9 * period);
    }

    #[test]
    fn orange_loop_crosses_only_at_half_period() {
        let spec = orange_loop();
        let xs = cut_crossings(&spec, omega());
        assert_eq!(xs.len(), 1, "got {xs:?}");
        assert!((xs[0].time - spec.period() / 2.0).abs() < 1e-9 * spec.period());
    }

    #[test]
    fn on_cut_start_moves_crossing_to_origin() {
        // With the Γ oscillation phase-flipped the loop starts on the cut
        // (Γ₀ - A_Γ < Ω) and the half-period point sits on the broken
        // segment, so the only crossing in one period is t = 0.
        let spec = orange_loop().starting_on_cut();
        assert!((theta_at(&spec, 0.0) - FRAC_PI_4).abs() < 1e-12);
        assert!((gamma_at(&spec, 0.0) - (spec.gamma_0 - spec.a_gamma)).abs() < 1e-15);
        let xs = cut_crossings(&spec, omega());
        assert_eq!(xs.len(), 1, "got {xs:?}");
        assert!(xs[0].time.abs() < 1e-9 * spec.period());
    }

    #[test]
    fn off_cut_loop_has_no_crossings() {
        let om = omega();
        let spec = LoopSpec::new(om / 2.0, om / 30.0, PI / 30.0, om / 8.0)
            .unwrap()
            .with_theta_center(0.0);
        assert!(cut_crossings(&spec, om).is_empty());
    }

    #[test]
    fn multi_period_crossings_repeat() {
        let spec = green_path().with_n_periods(2);
        let xs = cut_crossings(&spec, omega());
        let half = spec.period() / 2.0;
        assert_eq!(xs.len(), 4);
        for (k, x) in xs.iter().enumerate() {
            assert!((x.time - k as f64 * half).abs() < 1e-9 * spec.period());
        }
    }

    #[test]
    fn spec_validation() {
        let om = omega();
        assert!(LoopSpec::new(om, -0.1, 0.1, om).is_err());
        assert!(LoopSpec::new(om, 2.0 * om, 0.1, om).is_err()); // Γ goes negative
        assert!(LoopSpec::new(om, 0.0, 2.0, om).is_err()); // a_theta > π/2
        assert!(LoopSpec::new(om, 0.0, 0.1, 0.0).is_err()); // ω_c = 0
        assert!(LoopSpec::new(om, 0.0, 0.1, om).unwrap().with_n_periods(0).validate().is_err());
    }
}
