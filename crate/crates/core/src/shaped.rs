//! Finite-duration selective pulses.
//!
//! The RF field acts on both spins; selectivity comes only from the
//! resonance offsets. A linear phase ramp moves the excitation to
//! `ramp_offset`. Integration runs in the frame rotating with the ramp,
//! where the RF phase is static, using a fourth-order Magnus step with two
//! Gauss–Legendre samples per slice. The lab-frame propagator is recovered
//! exactly by the closing frame rotation.
//!
//! Default durations, truncation and slice counts are tuning choices for
//! this simulator, not measured spectrometer settings.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

use crate::algebra::{CMatrix, ProductOperator};
use crate::error::{Error, Result};
use crate::pulse::{hard_pulse, Spin, SpinSystem};

pub const MIN_SLICES: usize = 32;
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseShape {
    /// Gaussian truncated where the envelope falls to `truncation` of its peak.
    Gaussian { truncation: f64 },
    Rectangular,
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::Gaussian { .. } => "gaussian",
            PulseShape::Rectangular => "rectangular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapedPulseSpec {
    pub target: Spin,
    /// Degrees.
    pub flip: f64,
    /// Degrees; 0 = x, 90 = y.
    pub phase: f64,
    pub shape: PulseShape,
    /// Seconds.
    pub duration: f64,
    pub slices: usize,
    /// Hz; the excitation frequency set by the phase ramp.
    pub ramp_offset: f64,
}

/// Shaped-pulse settings used when compiling selective pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftPulseDefaults {
    pub duration: f64,
    pub truncation: f64,
    pub slices: usize,
}

impl Default for SoftPulseDefaults {
    fn default() -> Self {
        Self {
            duration: 6e-3,
            truncation: 0.01,
            slices: 512,
        }
    }
}

impl ShapedPulseSpec {
    /// Gaussian pulse excited at the target's own offset.
    pub fn gaussian(
        target: Spin,
        flip: f64,
        phase: f64,
        sys: &SpinSystem,
        defaults: &SoftPulseDefaults,
    ) -> Self {
        Self {
            target,
            flip,
            phase,
            shape: PulseShape::Gaussian {
                truncation: defaults.truncation,
            },
            duration: defaults.duration,
            slices: defaults.slices,
            ramp_offset: sys.offset(target),
        }
    }

    pub fn with_duration(self, duration: f64) -> Self {
        Self { duration, ..self }
    }

    pub fn with_shape(self, shape: PulseShape) -> Self {
        Self { shape, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.slices < MIN_SLICES {
            return Err(Error::InvalidPulse(format!(
                "at least {MIN_SLICES} slices required, got {}",
                self.slices
            )));
        }
        if let PulseShape::Gaussian { truncation } = self.shape {
            if !(truncation > 0.0 && truncation < 1.0) {
                return Err(Error::InvalidPulse(format!(
                    "truncation must lie in (0, 1), got {truncation}"
                )));
            }
        }
        if !self.flip.is_finite() || !self.phase.is_finite() || !self.ramp_offset.is_finite() {
            return Err(Error::InvalidPulse("non-finite pulse parameter".into()));
        }
        Ok(())
    }

    fn envelope(&self) -> Envelope {
        let center = self.duration / 2.0;
        let shape = match self.shape {
            PulseShape::Gaussian { truncation } => {
                let sigma = center / (-2.0 * truncation.ln()).sqrt();
                Profile::Gaussian { sigma }
            }
            PulseShape::Rectangular => Profile::Flat,
        };
        let mut env = Envelope {
            center,
            profile: shape,
            scale: 1.0,
        };
        env.scale = self.flip.to_radians() / env.integral(0.0, self.duration);
        env
    }
}

#[derive(Debug, Clone, Copy)]
enum Profile {
    Gaussian { sigma: f64 },
    Flat,
}

/// Continuous amplitude profile ω₁(t), rad/s, calibrated to the flip angle.
#[derive(Debug, Clone, Copy)]
struct Envelope {
    center: f64,
    profile: Profile,
    scale: f64,
}

impl Envelope {
    fn at(&self, t: f64) -> f64 {
        self.scale
            * match self.profile {
                Profile::Gaussian { sigma } => {
                    let x = (t - self.center) / sigma;
                    (-0.5 * x * x).exp()
                }
                Profile::Flat => 1.0,
            }
    }

    /// Unscaled ∫ₐᵇ profile dt, times `scale`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        let raw = match self.profile {
            Profile::Gaussian { sigma } => {
                let k = sigma * std::f64::consts::SQRT_2;
                sigma
                    * (PI / 2.0).sqrt()
                    * (libm::erf((b - self.center) / k) - libm::erf((a - self.center) / k))
            }
            Profile::Flat => b - a,
        };
        self.scale * raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeSample {
    /// Slice-averaged RF amplitude, rad/s.
    pub amplitude: f64,
    /// RF phase at the slice midpoint, rad.
    pub phase: f64,
}

/// Piecewise-constant envelope; Σ amplitude·Δt equals the flip angle in radians.
pub fn gaussian_envelope(spec: &ShapedPulseSpec) -> Result<Vec<EnvelopeSample>> {
    spec.validate()?;
    let env = spec.envelope();
    let dt = spec.duration / spec.slices as f64;
    let phase0 = spec.phase.to_radians();
    Ok((0..spec.slices)
        .map(|k| {
            let a = k as f64 * dt;
            let mid = a + dt / 2.0;
            EnvelopeSample {
                amplitude: env.integral(a, a + dt) / dt,
                phase: phase0 + 2.0 * PI * spec.ramp_offset * mid,
            }
        })
        .collect())
}

/// Diagonal of F_z = I_z + S_z.
const FZ_DIAG: [f64; 4] = [1.0, 0.0, 0.0, -1.0];

fn fz_rotation(angle: f64) -> CMatrix {
    CMatrix::diag(&FZ_DIAG.map(|m| C64::from_polar(1.0, -angle * m)))
}

/// Propagator in the frame rotating at `ramp_offset`, without convergence checks.
fn integrate_frame(sys: &SpinSystem, spec: &ShapedPulseSpec, slices: usize) -> CMatrix {
    let env = spec.envelope();
    let energies = sys.energies();
    let ramp = 2.0 * PI * spec.ramp_offset;
    let h0 = CMatrix::diag(&std::array::from_fn::<_, 4, _>(|i| {
        C64::new(energies[i] - ramp * FZ_DIAG[i], 0.0)
    }));
    let (sp, cp) = spec.phase.to_radians().sin_cos();
    let rf = ProductOperator::Ix.matrix() + ProductOperator::Sx.matrix();
    let rf = rf.scale_real(cp)
        + (ProductOperator::Iy.matrix() + ProductOperator::Sy.matrix()).scale_real(sp);
    let comm = h0.commutator(&rf);

    let h = spec.duration / slices as f64;
    let gauss = h * 3f64.sqrt() / 6.0;
    let corr = 3f64.sqrt() / 12.0 * h * h;
    let minus_i_h = C64::new(0.0, -h);

    let mut u = CMatrix::identity(4);
    for k in 0..slices {
        let mid = (k as f64 + 0.5) * h;
        let a1 = env.at(mid - gauss);
        let a2 = env.at(mid + gauss);
        let mean = 0.5 * (a1 + a2);
        let omega = (h0 + rf.scale_real(mean)).scale(minus_i_h) + comm.scale_real(corr * (a2 - a1));
        u = omega.expm() * u;
    }
    u
}

fn checked(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<CMatrix> {
    spec.validate()?;
    let coarse = integrate_frame(sys, spec, spec.slices);
    let fine = integrate_frame(sys, spec, 2 * spec.slices);
    let diff = (coarse - fine).frobenius_norm();
    if diff > CONVERGENCE_TOL {
        return Err(Error::SliceConvergence(diff));
    }
    Ok(coarse)
}

/// Lab-frame (transmitter-frame) propagator of the shaped pulse.
///
/// Fails with [`Error::SliceConvergence`] when doubling the slice count moves
/// the result by more than 1e-6 in Frobenius norm.
pub fn shaped_propagator(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<CMatrix> {
    let frame = checked(sys, spec)?;
    Ok(fz_rotation(2.0 * PI * spec.ramp_offset * spec.duration) * frame)
}

/// Lab-frame propagator at exactly `spec.slices` slices, skipping the
/// slice-doubling check.
pub fn sliced_propagator(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<CMatrix> {
    spec.validate()?;
    let frame = integrate_frame(sys, spec, spec.slices);
    Ok(fz_rotation(2.0 * PI * spec.ramp_offset * spec.duration) * frame)
}

/// Propagator referenced to the ramp frame, i.e. with the receiver and all
/// later pulse phases advanced to follow the excitation frequency. This is
/// the form compared against an instantaneous pulse.
pub fn frame_propagator(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<CMatrix> {
    checked(sys, spec)
}

/// Net z-rotation of `spectator` in degrees, wrapped to (−180, 180].
///
/// Taken from the relative phase of the two spectator blocks: with spectator
/// fixed in |0⟩ resp. |1⟩, the target sees 2×2 blocks B₀, B₁ and the
/// residual is arg Tr(B₀†B₁).
pub fn spectator_residual(u: &CMatrix, spectator: Spin) -> f64 {
    let idx = |spec_bit: usize, tgt_bit: usize| match spectator {
        Spin::S => 2 * tgt_bit + spec_bit,
        Spin::I => 2 * spec_bit + tgt_bit,
    };
    let mut overlap = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            overlap += u[(idx(0, r), idx(0, c))].conj() * u[(idx(1, r), idx(1, c))];
        }
    }
    overlap.arg().to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseReport {
    #[serde(serialize_with = "serialize_matrix")]
    pub achieved: CMatrix,
    /// |Tr(U_target†U_achieved)|/4.
    pub fidelity: f64,
    /// Degrees.
    pub spectator_z_residual: f64,
}

pub fn serialize_matrix<S: Serializer>(m: &CMatrix, ser: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.dim())
        .map(|r| (0..m.dim()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    rows.serialize(ser)
}

pub fn pulse_fidelity(achieved: &CMatrix, target: &CMatrix, spectator: Spin) -> PulseReport {
    let n = achieved.dim() as f64;
    let fidelity = ((target.adjoint() * *achieved).trace().norm() / n).min(1.0);
    PulseReport {
        achieved: *achieved,
        fidelity,
        spectator_z_residual: spectator_residual(achieved, spectator),
    }
}

/// Moves the duration to the nearest value within ±50% of the request at
/// which the spectator's net z-rotation vanishes.
pub fn calibrate_spectator(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<ShapedPulseSpec> {
    spec.validate()?;
    let spectator = spec.target.other();
    let detuning = sys.offset(spectator) - spec.ramp_offset;
    if detuning.abs() < 1e-9 {
        return Err(Error::Calibration(
            "spectator sits at the excitation frequency; nothing to null".into(),
        ));
    }
    let period = 1.0 / detuning.abs();
    let requested = spec.duration;
    let (lo, hi) = (0.5 * requested, 1.5 * requested);
    let step = (period / 12.0).min(requested / 8.0);
    let n = (((hi - lo) / step).ceil() as usize).clamp(8, 4000);
    let residual = |tau: f64| {
        let trial = spec.with_duration(tau);
        spectator_residual(&integrate_frame(sys, &trial, trial.slices), spectator)
    };

    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let tau = lo + (hi - lo) * k as f64 / n as f64;
            (tau, residual(tau))
        })
        .collect();

    let mut best: Option<((f64, f64), (f64, f64))> = None;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        // a sign change across a ±180° wrap is not a root
        let crosses = a.1 == 0.0 || a.1.signum() != b.1.signum();
        if !crosses || (a.1 - b.1).abs() > 180.0 {
            continue;
        }
        let mid = 0.5 * (a.0 + b.0);
        let better = best.is_none_or(|(p, q)| (mid - requested).abs() < (0.5 * (p.0 + q.0) - requested).abs());
        if better {
            best = Some((a, b));
        }
    }
    let (mut a, mut b) = best.ok_or_else(|| {
        Error::Calibration(format!(
            "no spectator zero crossing within ±50% of {requested} s"
        ))
    })?;

    // Illinois regula falsi; the residual is close to linear in τ.
    let mut side = 0i8;
    let mut root = a.0;
    for _ in 0..60 {
        if a.1 == 0.0 {
            root = a.0;
            break;
        }
        let t = (a.0 * b.1 - b.0 * a.1) / (b.1 - a.1);
        let r = residual(t);
        root = t;
        if r.abs() < 1e-7 || (b.0 - a.0).abs() < 1e-13 {
            break;
        }
        if r.signum() == b.1.signum() {
            b = (t, r);
            if side == -1 {
                a.1 /= 2.0;
            }
            side = -1;
        } else {
            a = (t, r);
            if side == 1 {
                b.1 /= 2.0;
            }
            side = 1;
        }
    }
    Ok(spec.with_duration(root))
}

/// A calibrated selective pulse ready for composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftPulse {
    pub spec: ShapedPulseSpec,
    #[serde(skip)]
    pub propagator: CMatrix,
    pub report: PulseReport,
}

/// Builds the frame propagator for `spec` and scores it against the
/// matching instantaneous pulse.
pub fn realize(sys: &SpinSystem, spec: &ShapedPulseSpec) -> Result<SoftPulse> {
    let propagator = frame_propagator(sys, spec)?;
    let ideal = hard_pulse(spec.flip, spec.phase, &[spec.target])?;
    Ok(SoftPulse {
        spec: *spec,
        propagator,
        report: pulse_fidelity(&propagator, &ideal, spec.target.other()),
    })
}

/// Gaussian selective pulse with spectator-nulling duration.
pub fn calibrated_soft_pulse(
    sys: &SpinSystem,
    target: Spin,
    flip: f64,
    phase: f64,
    defaults: &SoftPulseDefaults,
) -> Result<SoftPulse> {
    let spec = ShapedPulseSpec::gaussian(target, flip, phase, sys, defaults);
    let spec = calibrate_spectator(sys, &spec)?;
    realize(sys, &spec)
}
