//! Effective two-mode non-Hermitian model: Hamiltonian construction, the
//! closed-form eigensystem with branch-continuous tracking, exceptional-point
//! location and PT-phase classification.
//!
//! The model lives on the parameter plane `(Γ, θ)` at fixed detuning `Ω`:
//!
//! ```text
//! H = [ -iΓ/2 - (Ω/2)cos2θ      -(Ω/2)sin2θ      ]
//!     [     -(Ω/2)sin2θ      iΓ/2 + (Ω/2)cos2θ  ]
//! ```
//!
//! with eigenvalues `λ± = ±(1/2)sqrt(Ω² - Γ² + 2iΩΓcos2θ)`. The two square
//! root branches form intersecting Riemann sheets over the plane, touching at
//! the pair of exceptional points `Γ = Ω`, `θ = π/4, 3π/4`.

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, TAU};
use thiserror::Error;

/// Complex 2-vector in the `(A_x, A_y)` mode basis.
pub type Vec2 = [C64; 2];
/// Complex 2x2 matrix, row major.
pub type Mat2 = [[C64; 2]; 2];

/// Dead band applied to `cos 2θ`. An angle within ~1e-16 rad of the branch
/// cut is indistinguishable from it in f64, so values of `cos 2θ` below this
/// are snapped to zero. This keeps the spectrum exactly real on the PT line
/// and closes the eigenvalue gap exactly at the EPs, which a raw `cos(2θ)`
/// cannot do (`cos(2*(π/4 as f64))` is ~6e-17, producing a spurious ~1e-8
/// gap after the square root).
const COS2T_SNAP: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum ModelError {
    /// Zero detuning: the two modes are identical and no EP exists.
    #[error("degenerate model: detuning must be positive, got {0}")]
    DegenerateModel(f64),
    /// Eigenvectors coalesce; no biorthogonal frame exists at this point.
    #[error("defective point: eigenvectors coalesce at gamma={gamma}, theta={theta}")]
    DefectivePoint { gamma: f64, theta: f64 },
    /// Both branch candidates are comparably close to the predecessor frame;
    /// the step is too large to continue the branch unambiguously.
    #[error("ambiguous branch: candidate distances {d_near:.4} and {d_far:.4}; refine the step")]
    AmbiguousBranch { d_near: f64, d_far: f64 },
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
}

/// Which member of the eigenpair a state or coefficient refers to.
///
/// At a cold start `Plus` is the gain-side label (larger `Im λ`, ties broken
/// toward `Re λ ≥ 0`); along a tracked path the labels follow branch
/// continuity, not the instantaneous gain/loss character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    Plus,
    Minus,
}

impl StateLabel {
    pub fn other(self) -> Self {
        match self {
            StateLabel::Plus => StateLabel::Minus,
            StateLabel::Minus => StateLabel::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::Plus => "plus",
            StateLabel::Minus => "minus",
        }
    }
}

/// Static physics of the two-mode system: bare mode frequencies, the derived
/// carrier and detuning, and the common gain/loss rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_x0: f64,
    pub omega_y0: f64,
    /// Common rate Γ used when a run does not impose a schedule.
    pub gamma: f64,
    /// Upper bound on Ω/ω₀ accepted as "weak coupling" (default 0.1).
    pub max_detuning_ratio: f64,
}

impl SystemParams {
    /// Build from bare mode frequencies. Requires `omega_x0 >= omega_y0 > 0`
    /// (so the detuning is nonnegative) and `gamma >= 0`.
    pub fn new(omega_x0: f64, omega_y0: f64, gamma: f64) -> Result<Self, ModelError> {
        if !(omega_x0.is_finite() && omega_x0 > 0.0) || !(omega_y0.is_finite() && omega_y0 > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "mode frequencies must be positive, got omega_x0={omega_x0}, omega_y0={omega_y0}"
            )));
        }
        if omega_x0 < omega_y0 {
            return Err(ModelError::InvalidParams(format!(
                "omega_x0={omega_x0} < omega_y0={omega_y0} gives negative detuning"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "gamma must be nonnegative, got {gamma}"
            )));
        }
        Ok(Self {
            omega_x0,
            omega_y0,
            gamma,
            max_detuning_ratio: 0.1,
        })
    }

    /// Build from the carrier `ω₀ = (ω_x0 + ω_y0)/2` and detuning
    /// `Ω = ω_x0 - ω_y0`.
    pub fn from_carrier(omega_0: f64, detuning: f64, gamma: f64) -> Result<Self, ModelError> {
        if !(detuning >= 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "detuning must be nonnegative, got {detuning}"
            )));
        }
        Self::new(omega_0 + detuning / 2.0, omega_0 - detuning / 2.0, gamma)
    }

    pub fn with_max_detuning_ratio(mut self, ratio: f64) -> Self {
        self.max_detuning_ratio = ratio;
        self
    }

    /// Average uncoupled resonance frequency ω₀.
    pub fn omega_0(&self) -> f64 {
        0.5 * (self.omega_x0 + self.omega_y0)
    }

    /// Detuning Ω = ω_x0 - ω_y0.
    pub fn detuning(&self) -> f64 {
        self.omega_x0 - self.omega_y0
    }

    /// True when Ω/ω₀ is below the configured ratio; the envelope reduction
    /// is only claimed in this regime.
    pub fn weak_coupling(&self) -> bool {
        self.detuning() / self.omega_0() < self.max_detuning_ratio
    }
}

/// Resonance frequencies and squared-frequency coupling of the rotated trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFrequencies {
    pub omega_x: f64,
    pub omega_y: f64,
    /// Coupling η = (ω_x0² - ω_y0²) sin2θ / 2, in rad²/s².
    pub eta: f64,
}

/// Resonance frequencies of the x and y modes after rotating the bound field
/// by `theta`, together with the induced coupling.
pub fn effective_frequencies(params: &SystemParams, theta: f64) -> EffectiveFrequencies {
    let sum = 0.5 * (params.omega_x0.powi(2) + params.omega_y0.powi(2));
    let diff = 0.5 * (params.omega_x0.powi(2) - params.omega_y0.powi(2));
    let (c2, s2) = rotation_trig(theta);
    EffectiveFrequencies {
        omega_x: (sum + c2 * diff).sqrt(),
        omega_y: (sum - c2 * diff).sqrt(),
        eta: diff * s2,
    }
}

/// PT-phase taxonomy of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseClass {
    /// On the branch cut with Γ < Ω: fully real spectrum.
    ExactPt,
    /// On the cut line with Γ > Ω: purely imaginary spectrum pair.
    BrokenPt,
    /// Γ = Ω and cos2θ = 0 within tolerance: coalescent point.
    ExceptionalPoint,
    /// Off the cut line.
    Generic,
}

/// Instantaneous eigensystem at one parameter point.
///
/// `l_i^T r_j = δ_ij` with the unconjugated transpose; `lambda_minus` is
/// exactly `-lambda_plus`. The complex angle `alpha` parametrizes the frame:
/// `r₊ = (-sin(α/2), cos(α/2))`, `r₋ = (cos(α/2), sin(α/2))`, and is tracked
/// continuously (including 2π winding) when a predecessor is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub alpha: C64,
    pub r_plus: Vec2,
    pub r_minus: Vec2,
    pub l_plus: Vec2,
    pub l_minus: Vec2,
    /// 0 when `lambda_plus` sits on the principal square-root sheet, 1 on the
    /// other one.
    pub branch_id: u8,
}

impl EigenFrame {
    /// Right eigenvector for the given label.
    pub fn right(&self, label: StateLabel) -> Vec2 {
        match label {
            StateLabel::Plus => self.r_plus,
            StateLabel::Minus => self.r_minus,
        }
    }

    /// Eigenvalue for the given label.
    pub fn lambda(&self, label: StateLabel) -> C64 {
        match label {
            StateLabel::Plus => self.lambda_plus,
            StateLabel::Minus => self.lambda_minus,
        }
    }

    /// Label of the instantaneous loss side (`Im λ < 0`), if the spectrum is
    /// not real at this point.
    pub fn loss_label(&self) -> Option<StateLabel> {
        if self.lambda_plus.im < 0.0 {
            Some(StateLabel::Plus)
        } else if self.lambda_plus.im > 0.0 {
            Some(StateLabel::Minus)
        } else {
            None
        }
    }
}

/// `(cos 2θ, sin 2θ)` with the dead band applied to the cosine.
pub(crate) fn rotation_trig(theta: f64) -> (f64, f64) {
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    (if c2.abs() < COS2T_SNAP { 0.0 } else { c2 }, s2)
}

/// Diagonal and off-diagonal symbols of the traceless Hamiltonian:
/// `a = (Ω/2)cos2θ + iΓ/2`, `b = (Ω/2)sin2θ`, so `H = [[-a, -b], [-b, a]]`
/// and `λ² = a² + b²`.
fn hamiltonian_symbols(omega: f64, gamma: f64, theta: f64) -> (C64, C64) {
    let (c2, s2) = rotation_trig(theta);
    (
        C64::new(0.5 * omega * c2, 0.5 * gamma),
        C64::new(0.5 * omega * s2, 0.0),
    )
}

/// Effective two-state Hamiltonian at one parameter point.
pub fn build_hamiltonian(omega: f64, gamma: f64, theta: f64) -> Mat2 {
    let (a, b) = hamiltonian_symbols(omega, gamma, theta);
    [[-a, -b], [-b, a]]
}

/// Cold-start labeling: larger imaginary part wins (the gain state, since
/// `Ψ ∝ e^{-iλt}` grows for `Im λ > 0`); real-spectrum ties go to the root
/// with `Re λ ≥ 0`.
fn label_cold(principal: C64) -> C64 {
    if principal.im > 0.0 {
        principal
    } else if principal.im < 0.0 {
        -principal
    } else if principal.re >= 0.0 {
        principal
    } else {
        -principal
    }
}

/// Eigenvalue pair `(λ₊, λ₋)` with the cold-start labeling convention.
pub fn eigenvalues(omega: f64, gamma: f64, theta: f64) -> (C64, C64) {
    let (a, b) = hamiltonian_symbols(omega, gamma, theta);
    let lp = label_cold((a * a + b * b).sqrt());
    (lp, -lp)
}

/// Complex frame angle for a chosen eigenvalue branch:
/// `e^{iα} = (a + ib)/λ`, with `Re α` in the principal strip.
fn alpha_for(a: C64, b: C64, lambda: C64) -> C64 {
    let w = (a + C64::i() * b) / lambda;
    C64::new(w.arg(), -w.norm().ln())
}

/// Shift `alpha` by a multiple of 2π to bring its real part near `target`.
fn unwind_toward(alpha: C64, target: C64) -> C64 {
    let k = ((target.re - alpha.re) / TAU).round();
    C64::new(alpha.re + k * TAU, alpha.im)
}

/// Instantaneous biorthogonal eigenframe.
///
/// Without a predecessor the labels follow the cold-start convention. With a
/// predecessor the frame angle continues the branch that minimizes
/// `|α - α_prev|` over the two square-root candidates (each unwound mod 2π);
/// steps where the two candidates end up within π/4 of the same distance are
/// rejected as [`ModelError::AmbiguousBranch`].
pub fn eigenframe(
    omega: f64,
    gamma: f64,
    theta: f64,
    predecessor: Option<&EigenFrame>,
) -> Result<EigenFrame, ModelError> {
    let (a, b) = hamiltonian_symbols(omega, gamma, theta);
    let lambda_sq = a * a + b * b;
    if lambda_sq.norm() == 0.0 {
        return Err(ModelError::DefectivePoint { gamma, theta });
    }
    let principal = lambda_sq.sqrt();

    let (lambda, alpha) = match predecessor {
        None => {
            let lp = label_cold(principal);
            (lp, alpha_for(a, b, lp))
        }
        Some(prev) => {
            let cand = [
                (principal, unwind_toward(alpha_for(a, b, principal), prev.alpha)),
                (-principal, unwind_toward(alpha_for(a, b, -principal), prev.alpha)),
            ];
            let d0 = (cand[0].1 - prev.alpha).norm();
            let d1 = (cand[1].1 - prev.alpha).norm();
            let (pick, d_near, d_far) = if d0 <= d1 {
                (cand[0], d0, d1)
            } else {
                (cand[1], d1, d0)
            };
            if d_far - d_near < std::f64::consts::FRAC_PI_4 {
                return Err(ModelError::AmbiguousBranch { d_near, d_far });
            }
            pick
        }
    };

    let half = 0.5 * alpha;
    let (s, c) = (half.sin(), half.cos());
    let r_plus = [-s, c];
    let r_minus = [c, s];
    let branch_id = if (lambda - principal).norm() <= (lambda + principal).norm() {
        0
    } else {
        1
    };
    Ok(EigenFrame {
        lambda_plus: lambda,
        lambda_minus: -lambda,
        alpha,
        r_plus,
        r_minus,
        l_plus: r_plus,
        l_minus: r_minus,
        branch_id,
    })
}

/// The pair of exceptional points within one θ-period: `(Γ, θ) = (Ω, π/4)`
/// and `(Ω, 3π/4)`.
pub fn ep_locations(omega: f64) -> Result<[(f64, f64); 2], ModelError> {
    if !(omega > 0.0) {
        return Err(ModelError::DegenerateModel(omega));
    }
    Ok([(omega, FRAC_PI_4), (omega, 3.0 * FRAC_PI_4)])
}

/// Classify a parameter point against the PT-phase taxonomy.
///
/// `tol` bounds both `|Γ-Ω|/Ω` and `|cos2θ|` for the EP test and `|cos2θ|`
/// for the cut-line tests; points off the cut line are `Generic`.
pub fn classify_phase(omega: f64, gamma: f64, theta: f64, tol: f64) -> PhaseClass {
    let (c2, _) = rotation_trig(theta);
    let on_cut_line = c2.abs() < tol;
    if on_cut_line && (gamma - omega).abs() < tol * omega {
        PhaseClass::ExceptionalPoint
    } else if on_cut_line && gamma < omega {
        PhaseClass::ExactPt
    } else if on_cut_line && gamma > omega {
        PhaseClass::BrokenPt
    } else {
        PhaseClass::Generic
    }
}

/// Eigenvalue pairs over a rectangular `(Γ, θ)` grid, row major with Γ as
/// the slow axis. Within each row the pair is continuity-tracked from the
/// previous θ point; each row starts from the frame tracked down the first
/// column, so adjacent sheet values join up for plotting.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub gammas: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `(λ₊, λ₋)` per grid node, row major: index `i * thetas.len() + j`.
    pub values: Vec<(C64, C64)>,
}

impl SurfaceGrid {
    pub fn at(&self, gamma_idx: usize, theta_idx: usize) -> (C64, C64) {
        self.values[gamma_idx * self.thetas.len() + theta_idx]
    }
}

/// Continue an eigenvalue branch: pick the square root closest to the
/// predecessor value. Used for surface tracking where full frames (which are
/// undefined at the EPs the grid may contain) are not needed.
fn track_eigenvalue(omega: f64, gamma: f64, theta: f64, prev: C64) -> C64 {
    let (a, b) = hamiltonian_symbols(omega, gamma, theta);
    let p = (a * a + b * b).sqrt();
    if (p - prev).norm() <= (-p - prev).norm() {
        p
    } else {
        -p
    }
}

/// Sample the two eigenvalue sheets over `gamma_range × theta_range`.
///
/// Ranges are inclusive; `resolution` is the number of nodes per axis and
/// must be at least 2.
pub fn surface_grid(
    omega: f64,
    gamma_range: (f64, f64),
    theta_range: (f64, f64),
    resolution: (usize, usize),
) -> SurfaceGrid {
    let (ng, nt) = resolution;
    assert!(ng >= 2 && nt >= 2, "surface resolution must be >= 2 per axis");
    let gammas: Vec<f64> = (0..ng)
        .map(|i| gamma_range.0 + (gamma_range.1 - gamma_range.0) * i as f64 / (ng - 1) as f64)
        .collect();
    let thetas: Vec<f64> = (0..nt)
        .map(|j| theta_range.0 + (theta_range.1 - theta_range.0) * j as f64 / (nt - 1) as f64)
        .collect();

    let mut values = Vec::with_capacity(ng * nt);
    let mut col_anchor = eigenvalues(omega, gammas[0], thetas[0]).0;
    for (i, &g) in gammas.iter().enumerate() {
        let row_start = if i == 0 {
            col_anchor
        } else {
            track_eigenvalue(omega, g, thetas[0], col_anchor)
        };
        col_anchor = row_start;
        let mut prev = row_start;
        for &th in &thetas {
            let lp = track_eigenvalue(omega, g, th, prev);
            values.push((lp, -lp));
            prev = lp;
        }
    }
    SurfaceGrid {
        gammas,
        thetas,
        values,
    }
}
