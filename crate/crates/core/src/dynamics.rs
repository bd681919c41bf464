//! Integration of the envelope (Schrödinger-type) and full second-order
//! dynamics along a parameter loop, plus conversion between the two pictures
//! by quadrature demodulation.
//!
//! All integrators are fixed-step classical RK4: deterministic step
//! placement keeps transition timings reproducible bit for bit.

use crate::model::{
    self, build_hamiltonian, effective_frequencies, EigenFrame, ModelError, StateLabel,
    SystemParams, Vec2,
};
use crate::schedule::{gamma_at, theta_at, LoopSpec, ScheduleError};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Amplitude ceiling that triggers a state rescale during envelope runs.
/// Gain phases grow exponentially; only relative amplitudes carry physics,
/// so the state is renormalized and the factor logged.
const RESCALE_LIMIT: f64 = 1e100;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("branch tracking failed at t={t}: {source}")]
    BranchTrackingFailed { t: f64, source: ModelError },
    #[error("state became non-finite at t={t}")]
    NonFinite { t: f64 },
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("carrier undersampled: sampling rate {rate} below 4 samples per carrier cycle")]
    UndersampledCarrier { rate: f64 },
    #[error("outside the weak-coupling regime: Omega/omega_0 = {ratio} exceeds {limit}")]
    RegimeViolation { ratio: f64, limit: f64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Complex mode-amplitude pair `(A_x, A_y)`; the envelope of the
/// displacement. No normalization is imposed: non-Hermitian evolution does
/// not conserve the norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeState {
    pub a_x: C64,
    pub a_y: C64,
}

impl EnvelopeState {
    pub fn new(a_x: C64, a_y: C64) -> Self {
        Self { a_x, a_y }
    }

    pub fn as_vec(&self) -> Vec2 {
        [self.a_x, self.a_y]
    }

    pub fn from_vec(v: Vec2) -> Self {
        Self { a_x: v[0], a_y: v[1] }
    }

    pub fn is_finite(&self) -> bool {
        self.a_x.re.is_finite()
            && self.a_x.im.is_finite()
            && self.a_y.re.is_finite()
            && self.a_y.im.is_finite()
    }
}

/// Mechanical state of the two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

/// Fixed-step integration method. Only classical RK4 is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Rk4Fixed,
}

/// Step size and recording cadence for an integration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub dt: f64,
    pub method: Method,
    pub record_stride: usize,
}

impl IntegratorOptions {
    pub fn new(dt: f64, record_stride: usize) -> Self {
        Self {
            dt,
            method: Method::Rk4Fixed,
            record_stride,
        }
    }

    /// Default for envelope runs: dt = T/20000, one record every 4 steps
    /// (5000 samples per period).
    pub fn for_loop(spec: &LoopSpec) -> Self {
        Self::new(spec.period() / 20_000.0, 4)
    }

    /// Default for full mechanical runs: 50 steps per carrier cycle,
    /// every step recorded.
    pub fn for_carrier(params: &SystemParams) -> Self {
        Self::new(TAU / (50.0 * params.omega_0()), 1)
    }

    fn validate_basic(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DynamicsError::InvalidOptions(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(DynamicsError::InvalidOptions(
                "record_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Envelope stability/accuracy guard: dt · max|λ| < 0.1.
    fn validate_envelope(&self, max_rate: f64) -> Result<(), DynamicsError> {
        self.validate_basic()?;
        if self.dt * max_rate >= 0.1 {
            return Err(DynamicsError::InvalidOptions(format!(
                "dt*max|lambda| = {} violates the stability guard 0.1",
                self.dt * max_rate
            )));
        }
        Ok(())
    }
}

/// Recorded time series of one envelope integration.
///
/// All arrays share one length; `frames` are pairwise branch-continuous.
/// `log_scale[i]` is the accumulated natural log of rescale factors divided
/// out of `states[i]` and `coeffs[i]` (zero unless the run grew past the
/// rescale ceiling).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: LoopSpec,
    /// Detuning Ω of the run, kept for downstream analysis.
    pub omega: f64,
    pub times: Vec<f64>,
    pub states: Vec<EnvelopeState>,
    pub coeffs: Vec<(C64, C64)>,
    pub frames: Vec<EigenFrame>,
    pub schedule_values: Vec<(f64, f64)>,
    pub log_scale: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.spec.period()
    }

    /// Recorded samples per loop period.
    pub fn samples_per_period(&self) -> usize {
        (self.len() - 1) / self.spec.n_periods as usize
    }
}

/// Initial envelope state equal to one eigenstate of the given frame, so the
/// projected coefficients start at exactly (1, 0) or (0, 1).
pub fn initial_state(frame: &EigenFrame, which: StateLabel) -> EnvelopeState {
    EnvelopeState::from_vec(frame.right(which))
}

/// Expansion coefficients `(c₊, c₋)` of a state in a frame, via the
/// unconjugated left eigenvectors.
pub fn project_coefficients(state: &EnvelopeState, frame: &EigenFrame) -> (C64, C64) {
    let v = state.as_vec();
    (
        frame.l_plus[0] * v[0] + frame.l_plus[1] * v[1],
        frame.l_minus[0] * v[0] + frame.l_minus[1] * v[1],
    )
}

fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[C64; N]) -> [C64; N],
    t: f64,
    y: &[C64; N],
    h: f64,
) -> [C64; N] {
    let k1 = f(t, y);
    let mut y2 = *y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(t + 0.5 * h, &y2);
    for i in 0..N {
        y2[i] = y[i] + h * k3[i];
    }
    let k4 = f(t + h, &y2);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Envelope RHS: iΨ' = H(θ(t), Γ(t))Ψ.
fn envelope_rhs(omega: f64, spec: &LoopSpec) -> impl Fn(f64, &[C64; 2]) -> [C64; 2] + '_ {
    move |t, y| {
        let h = build_hamiltonian(omega, gamma_at(spec, t), theta_at(spec, t));
        [
            -C64::i() * (h[0][0] * y[0] + h[0][1] * y[1]),
            -C64::i() * (h[1][0] * y[0] + h[1][1] * y[1]),
        ]
    }
}

/// Integrate the envelope equation over the full run of `spec`, recording
/// state, branch-tracked frame, projected coefficients and schedule values
/// every `record_stride` steps. The final time is exactly `n_periods * T`.
pub fn integrate_envelope(
    params: &SystemParams,
    spec: &LoopSpec,
    init: &EnvelopeState,
    opts: &IntegratorOptions,
) -> Result<Trajectory, DynamicsError> {
    spec.validate()?;
    let omega = params.detuning();
    let max_rate = 0.5 * (omega + spec.gamma_0 + spec.a_gamma);
    opts.validate_envelope(max_rate)?;
    if !init.is_finite() {
        return Err(DynamicsError::NonFinite { t: 0.0 });
    }

    let total = spec.total_time();
    let stride = opts.record_stride;
    let mut n_steps = (total / opts.dt).round().max(1.0) as usize;
    n_steps = n_steps.div_ceil(stride) * stride;
    let n_records = n_steps / stride + 1;

    let rhs = envelope_rhs(omega, spec);
    let mut traj = Trajectory {
        spec: *spec,
        omega,
        times: Vec::with_capacity(n_records),
        states: Vec::with_capacity(n_records),
        coeffs: Vec::with_capacity(n_records),
        frames: Vec::with_capacity(n_records),
        schedule_values: Vec::with_capacity(n_records),
        log_scale: Vec::with_capacity(n_records),
    };

    let mut y = init.as_vec();
    let mut log_scale = 0.0f64;
    let record = |i: usize,
                  y: &Vec2,
                  log_scale: f64,
                  traj: &mut Trajectory|
     -> Result<(), DynamicsError> {
        let t = total * i as f64 / n_steps as f64;
        let (theta, gamma) = (theta_at(spec, t), gamma_at(spec, t));
        let frame = model::eigenframe(omega, gamma, theta, traj.frames.last())
            .map_err(|source| DynamicsError::BranchTrackingFailed { t, source })?;
        let state = EnvelopeState::from_vec(*y);
        traj.coeffs.push(project_coefficients(&state, &frame));
        traj.times.push(t);
        traj.states.push(state);
        traj.frames.push(frame);
        traj.schedule_values.push((theta, gamma));
        traj.log_scale.push(log_scale);
        Ok(())
    };

    record(0, &y, log_scale, &mut traj)?;
    for i in 0..n_steps {
        let t0 = total * i as f64 / n_steps as f64;
        let t1 = total * (i + 1) as f64 / n_steps as f64;
        y = rk4_step(&rhs, t0, &y, t1 - t0);
        if !EnvelopeState::from_vec(y).is_finite() {
            return Err(DynamicsError::NonFinite { t: t1 });
        }
        let mag = y[0].norm().max(y[1].norm());
        if mag > RESCALE_LIMIT {
            y[0] /= mag;
            y[1] /= mag;
            log_scale += mag.ln();
        }
        if (i + 1) % stride == 0 {
            record(i + 1, &y, log_scale, &mut traj)?;
        }
    }
    Ok(traj)
}

/// Integrate the full second-order mechanics
/// `ẍ + Γẋ + ω_x²(t)x + η(t)y = 0`, `ÿ - Γẏ + ω_y²(t)y + η(t)x = 0`
/// with RK4, recording `(t, state)` every `record_stride` steps.
pub fn integrate_full(
    params: &SystemParams,
    spec: &LoopSpec,
    init: &MechState,
    opts: &IntegratorOptions,
) -> Result<Vec<(f64, MechState)>, DynamicsError> {
    spec.validate()?;
    opts.validate_basic()?;
    let omega_0 = params.omega_0();
    if opts.dt * omega_0 >= 0.2 {
        return Err(DynamicsError::InvalidOptions(format!(
            "dt*omega_0 = {} does not resolve the carrier (must be < 0.2)",
            opts.dt * omega_0
        )));
    }

    let total = spec.total_time();
    let stride = opts.record_stride;
    let mut n_steps = (total / opts.dt).round().max(1.0) as usize;
    n_steps = n_steps.div_ceil(stride) * stride;

    // State vector (x, y, vx, vy) packed into the real parts.
    let re = |v: &[C64; 4], i: usize| v[i].re;
    let rhs = |t: f64, v: &[C64; 4]| -> [C64; 4] {
        let eff = effective_frequencies(params, theta_at(spec, t));
        let g = gamma_at(spec, t);
        let (x, y, vx, vy) = (re(v, 0), re(v, 1), re(v, 2), re(v, 3));
        [
            C64::new(vx, 0.0),
            C64::new(vy, 0.0),
            C64::new(-g * vx - eff.omega_x.powi(2) * x - eff.eta * y, 0.0),
            C64::new(g * vy - eff.omega_y.powi(2) * y - eff.eta * x, 0.0),
        ]
    };

    let mut v = [
        C64::new(init.x, 0.0),
        C64::new(init.y, 0.0),
        C64::new(init.vx, 0.0),
        C64::new(init.vy, 0.0),
    ];
    let unpack = |v: &[C64; 4]| MechState {
        x: v[0].re,
        y: v[1].re,
        vx: v[2].re,
        vy: v[3].re,
    };
    let mut out = Vec::with_capacity(n_steps / stride + 1);
    out.push((0.0, unpack(&v)));
    for i in 0..n_steps {
        let t0 = total * i as f64 / n_steps as f64;
        let t1 = total * (i + 1) as f64 / n_steps as f64;
        v = rk4_step(&rhs, t0, &v, t1 - t0);
        if !v.iter().all(|z| z.re.is_finite()) {
            return Err(DynamicsError::NonFinite { t: t1 });
        }
        if (i + 1) % stride == 0 {
            out.push((t1, unpack(&v)));
        }
    }
    Ok(out)
}

/// Second-order Butterworth low-pass biquad coefficients for a cutoff given
/// as a fraction of the sampling rate (cycles per sample).
fn lowpass_biquad(fc_per_sample: f64) -> ([f64; 3], [f64; 2]) {
    let k = (PI * fc_per_sample).tan();
    let sqrt2 = std::f64::consts::SQRT_2;
    let norm = 1.0 / (1.0 + sqrt2 * k + k * k);
    let b0 = k * k * norm;
    (
        [b0, 2.0 * b0, b0],
        [2.0 * (k * k - 1.0) * norm, (1.0 - sqrt2 * k + k * k) * norm],
    )
}

fn iir_forward(x: &[C64], b: [f64; 3], a: [f64; 2]) -> Vec<C64> {
    let mut y = Vec::with_capacity(x.len());
    let zero = C64::new(0.0, 0.0);
    let (mut x1, mut x2, mut y1, mut y2) = (zero, zero, zero, zero);
    for &xi in x {
        let yi = b[0] * xi + b[1] * x1 + b[2] * x2 - a[0] * y1 - a[1] * y2;
        x2 = x1;
        x1 = xi;
        y2 = y1;
        y1 = yi;
        y.push(yi);
    }
    y
}

/// Zero-phase (forward-backward) low-pass with odd-reflection edge padding.
fn filtfilt(x: &[C64], fc_per_sample: f64) -> Vec<C64> {
    let n = x.len();
    if n < 3 {
        return x.to_vec();
    }
    let (b, a) = lowpass_biquad(fc_per_sample);
    // Enough padding for the filter to settle: ~10 time constants.
    let pad = ((1.6 / fc_per_sample).ceil() as usize).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    let mut y = iir_forward(&ext, b, a);
    y.reverse();
    let mut y = iir_forward(&y, b, a);
    y.reverse();
    y[pad..pad + n].to_vec()
}

/// Recover the complex envelopes from sampled mechanical motion by
/// quadrature demodulation at the carrier `omega_0`, low-pass filtered at
/// `cutoff` (rad/s; pick it between Ω and ω₀, e.g. their geometric mean).
pub fn demodulate(
    samples: &[(f64, MechState)],
    omega_0: f64,
    cutoff: f64,
) -> Result<Vec<(f64, EnvelopeState)>, DynamicsError> {
    if samples.len() < 2 {
        return Err(DynamicsError::InvalidOptions(
            "demodulation needs at least two samples".into(),
        ));
    }
    let dt = samples[1].0 - samples[0].0;
    let rate = 1.0 / dt;
    if rate <= 4.0 * omega_0 / TAU {
        return Err(DynamicsError::UndersampledCarrier { rate });
    }

    let mix = |t: f64, q: f64, v: f64| -> C64 {
        0.5 * (C64::new(q, 0.0) - C64::i() * v / omega_0) * (-C64::i() * omega_0 * t).exp()
    };
    let zx: Vec<C64> = samples.iter().map(|(t, s)| mix(*t, s.x, s.vx)).collect();
    let zy: Vec<C64> = samples.iter().map(|(t, s)| mix(*t, s.y, s.vy)).collect();
    let fc = cutoff / TAU * dt; // cycles per sample
    let ax = filtfilt(&zx, fc);
    let ay = filtfilt(&zy, fc);
    Ok(samples
        .iter()
        .zip(ax.into_iter().zip(ay))
        .map(|((t, _), (x, y))| (*t, EnvelopeState::new(x, y)))
        .collect())
}

/// Outcome of the envelope-vs-full cross validation.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub rms_error: f64,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Cross-validate the envelope reduction: run the full mechanics and the
/// envelope equation from consistent initial conditions, demodulate the
/// mechanics, and compare the normalized coefficient magnitudes
/// `|c±|/sqrt(|c₊|²+|c₋|²)` sample by sample over the run.
///
/// Requires the weak-coupling regime (`Ω/ω₀` below the configured ratio).
pub fn verify_envelope_reduction(
    params: &SystemParams,
    spec: &LoopSpec,
    init_label: StateLabel,
    tol: f64,
) -> Result<ReductionReport, DynamicsError> {
    if !params.weak_coupling() {
        return Err(DynamicsError::RegimeViolation {
            ratio: params.detuning() / params.omega_0(),
            limit: params.max_detuning_ratio,
        });
    }
    let omega = params.detuning();
    let omega_0 = params.omega_0();
    let frame0 = model::eigenframe(omega, gamma_at(spec, 0.0), theta_at(spec, 0.0), None)?;
    let psi0 = initial_state(&frame0, init_label);

    // Shared time grid for both integrators.
    let opts = IntegratorOptions::new(TAU / (50.0 * omega_0), 1);

    // Consistent mechanical initial conditions:
    // q(0) = 2 Re A(0), q̇(0) = 2 Re(iω₀A(0) + Ȧ(0)) with Ȧ(0) = -iH(0)Ψ(0).
    let h0 = build_hamiltonian(omega, gamma_at(spec, 0.0), theta_at(spec, 0.0));
    let v = psi0.as_vec();
    let adot = [
        -C64::i() * (h0[0][0] * v[0] + h0[0][1] * v[1]),
        -C64::i() * (h0[1][0] * v[0] + h0[1][1] * v[1]),
    ];
    let init_mech = MechState {
        x: 2.0 * psi0.a_x.re,
        y: 2.0 * psi0.a_y.re,
        vx: 2.0 * (C64::i() * omega_0 * psi0.a_x + adot[0]).re,
        vy: 2.0 * (C64::i() * omega_0 * psi0.a_y + adot[1]).re,
    };

    let full = integrate_full(params, spec, &init_mech, &opts)?;
    let demod = demodulate(&full, omega_0, (omega * omega_0).sqrt())?;
    let env = integrate_envelope(params, spec, &psi0, &opts)?;
    debug_assert_eq!(env.len(), demod.len());

    let normalized = |c: (C64, C64)| -> (f64, f64) {
        let (p, m) = (c.0.norm(), c.1.norm());
        let h = p.hypot(m).max(1e-300);
        (p / h, m / h)
    };
    let mut sum_sq = 0.0f64;
    let mut max_err = 0.0f64;
    let mut count = 0usize;
    for i in 0..env.len().min(demod.len()) {
        let (up_e, um_e) = normalized(env.coeffs[i]);
        let c_full = project_coefficients(&demod[i].1, &env.frames[i]);
        let (up_f, um_f) = normalized(c_full);
        for d in [up_e - up_f, um_e - um_f] {
            sum_sq += d * d;
            max_err = max_err.max(d.abs());
            count += 1;
        }
    }
    let rms = (sum_sq / count as f64).sqrt();
    Ok(ReductionReport {
        rms_error: rms,
        max_error: max_err,
        tolerance: tol,
        pass: rms < tol,
    })
}
