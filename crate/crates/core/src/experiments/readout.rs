//! FID synthesis, spectra, phasing and absorption/emission classification.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::algebra::{evolve, CMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::pulse::{free_evolution, spin_operator, Spin, SpinSystem};

/// Fraction of the reference integral below which a line counts as degraded.
pub const DEGRADED_FRACTION: f64 = 0.25;
/// Fraction of the reference integral below which a line counts as absent.
pub const ABSENT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Acquisition {
    pub points: usize,
    /// Seconds.
    pub dwell: f64,
}

impl Acquisition {
    pub const DEFAULT_POINTS: usize = 4096;

    pub fn new(points: usize, dwell: f64) -> Result<Self> {
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidAcquisition(format!(
                "points must be a power of two >= 2, got {points}"
            )));
        }
        if !(dwell > 0.0) || !dwell.is_finite() {
            return Err(Error::InvalidAcquisition(format!(
                "dwell must be positive, got {dwell}"
            )));
        }
        Ok(Self { points, dwell })
    }

    /// 4096 points with a spectral width four times the larger offset.
    pub fn auto(sys: &SpinSystem) -> Result<Self> {
        Self::auto_with_points(sys, Self::DEFAULT_POINTS)
    }

    pub fn auto_with_points(sys: &SpinSystem, points: usize) -> Result<Self> {
        let widest = sys.nu_i.abs().max(sys.nu_s.abs());
        let widest = if widest > 0.0 { widest } else { sys.j.abs() };
        if widest == 0.0 {
            return Err(Error::InvalidAcquisition(
                "cannot choose a dwell with zero offsets and zero coupling".into(),
            ));
        }
        Self::new(points, 1.0 / (4.0 * widest))
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / (self.points as f64 * self.dwell)
    }

    pub fn check_aliasing(&self, sys: &SpinSystem) -> Result<()> {
        let nyquist = 1.0 / (2.0 * self.dwell);
        let required = sys.nu_i.abs().max(sys.nu_s.abs()) + sys.j.abs();
        if nyquist > required {
            Ok(())
        } else {
            Err(Error::Aliasing {
                dwell: self.dwell,
                nyquist,
                required,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fid {
    pub samples: Vec<C64>,
    pub dwell: f64,
}

impl Fid {
    pub fn new(samples: Vec<C64>, dwell: f64) -> Result<Self> {
        Acquisition::new(samples.len(), dwell)?;
        Ok(Self { samples, dwell })
    }

    pub fn points(&self) -> usize {
        self.samples.len()
    }

    /// Columns `time_s,real,imag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time_s,real,imag")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(w, "{},{},{}", k as f64 * self.dwell, s.re, s.im)?;
        }
        Ok(())
    }
}

/// Quadrature observable I⁺ + S⁺.
fn raising_sum() -> CMatrix {
    let i = C64::new(0.0, 1.0);
    let mut op = CMatrix::zeros(4);
    for spin in [Spin::I, Spin::S] {
        op = op + spin_operator(spin, 'x') + spin_operator(spin, 'y').scale(i);
    }
    op
}

/// s(t_k) = Tr(ρ(t_k)(I⁺ + S⁺)) e^{−t_k/T2*}, sampled at t_k = k·dwell.
pub fn synthesize_fid(rho: &DensityMatrix, sys: &SpinSystem, acq: &Acquisition) -> Result<Fid> {
    acq.check_aliasing(sys)?;
    let obs = raising_sum();
    let mut samples = Vec::with_capacity(acq.points);
    for k in 0..acq.points {
        let t = k as f64 * acq.dwell;
        let rho_t = evolve(rho, &free_evolution(sys, t)?)?;
        let decay = if sys.t2_star.is_infinite() {
            1.0
        } else {
            (-t / sys.t2_star).exp()
        };
        samples.push((*rho_t.matrix() * obs).trace() * decay);
    }
    Fid::new(samples, acq.dwell)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Hz, ascending from −1/(2·dwell).
    pub freqs: Vec<f64>,
    pub amplitudes: Vec<C64>,
    /// Zero-order phase already applied, radians.
    pub phase0: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    /// Same data with the zero-order phase set to `phase0` instead.
    pub fn rephased(&self, phase0: f64) -> Spectrum {
        let rot = C64::from_polar(1.0, phase0 - self.phase0);
        Spectrum {
            freqs: self.freqs.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * rot).collect(),
            phase0,
        }
    }

    fn window(&self, center: f64, half_width: f64) -> Result<std::ops::Range<usize>> {
        let lo = self.freqs.partition_point(|&f| f < center - half_width);
        let hi = self.freqs.partition_point(|&f| f <= center + half_width);
        if lo >= hi {
            return Err(Error::EmptyWindow(center));
        }
        Ok(lo..hi)
    }

    /// Complex sum of the bins in [center − half_width, center + half_width] times the bin width.
    pub fn integrate(&self, center: f64, half_width: f64) -> Result<C64> {
        let range = self.window(center, half_width)?;
        let sum: C64 = self.amplitudes[range].iter().sum();
        Ok(sum * self.bin_width())
    }

    /// Frequencies of the two strongest local maxima of |S| in the window, ascending.
    pub fn doublet(&self, center: f64, half_width: f64) -> Result<(f64, f64)> {
        let range = self.window(center, half_width)?;
        let mag: Vec<f64> = self.amplitudes.iter().map(|a| a.norm()).collect();
        let mut peaks: Vec<usize> = range
            .filter(|&k| k > 0 && k + 1 < mag.len() && mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])
            .collect();
        if peaks.len() < 2 {
            return Err(Error::EmptyWindow(center));
        }
        peaks.sort_by(|&a, &b| mag[b].total_cmp(&mag[a]));
        let (a, b) = (self.freqs[peaks[0]], self.freqs[peaks[1]]);
        Ok((a.min(b), a.max(b)))
    }

    /// Columns `freq_hz,real,imag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "freq_hz,real,imag")?;
        for (f, a) in self.freqs.iter().zip(&self.amplitudes) {
            writeln!(w, "{},{},{}", f, a.re, a.im)?;
        }
        Ok(())
    }
}

/// Unnormalized forward DFT, reordered so frequencies ascend, times e^{iφ₀}.
pub fn spectrum(fid: &Fid, phase0: f64) -> Spectrum {
    let n = fid.points();
    let mut buf = fid.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.rotate_right(n / 2);
    let rot = C64::from_polar(1.0, phase0);
    let width = 1.0 / (n as f64 * fid.dwell);
    Spectrum {
        freqs: (0..n).map(|k| (k as f64 - (n / 2) as f64) * width).collect(),
        amplitudes: buf.into_iter().map(|a| a * rot).collect(),
        phase0,
    }
}

/// Half-width of a spin's multiplet window: |J|, but never narrower than three bins.
pub fn multiplet_half_width(sys: &SpinSystem, spec: &Spectrum) -> f64 {
    sys.j.abs().max(3.0 * spec.bin_width())
}

/// Absolute zero-order phase that puts the I multiplet of `reference` into
/// pure absorption.
pub fn calibrate_phase(reference: &Spectrum, sys: &SpinSystem) -> Result<f64> {
    let raw = reference.rephased(0.0);
    let total = raw.integrate(sys.nu_i, multiplet_half_width(sys, &raw))?;
    if total.norm() == 0.0 {
        return Err(Error::EmptyWindow(sys.nu_i));
    }
    let phi = -total.arg();
    // keep the result in (−π, π]
    Ok(if phi <= -PI { phi + 2.0 * PI } else { phi })
}

/// Per-spin integrals of the reference spectrum, used to judge signal strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceLevel {
    pub i: f64,
    pub s: f64,
}

impl ReferenceLevel {
    pub fn measure(reference: &Spectrum, sys: &SpinSystem, phase0: f64) -> Result<Self> {
        let [i, s] = integrals(&reference.rephased(phase0), sys)?;
        Ok(Self {
            i: i.abs(),
            s: s.abs(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReadout {
    pub integral_i: f64,
    pub integral_s: f64,
    #[serde(rename = "bit_I")]
    pub bit_i: u8,
    #[serde(rename = "bit_S")]
    pub bit_s: u8,
    pub degraded: bool,
}

fn integrals(spec: &Spectrum, sys: &SpinSystem) -> Result<[f64; 2]> {
    let hw = multiplet_half_width(sys, spec);
    Ok([
        spec.integrate(sys.nu_i, hw)?.re,
        spec.integrate(sys.nu_s, hw)?.re,
    ])
}

/// Reads each spin's bit from the sign of its integrated absorption line
/// after re-phasing to `phase0`.
pub fn classify(
    spec: &Spectrum,
    sys: &SpinSystem,
    phase0: f64,
    reference: &ReferenceLevel,
) -> Result<SpectralReadout> {
    let [i, s] = integrals(&spec.rephased(phase0), sys)?;
    if i.abs() < ABSENT_FRACTION * reference.i && s.abs() < ABSENT_FRACTION * reference.s {
        return Err(Error::Unclassifiable);
    }
    Ok(SpectralReadout {
        integral_i: i,
        integral_s: s,
        bit_i: u8::from(i <= 0.0),
        bit_s: u8::from(s <= 0.0),
        degraded: i.abs() < DEGRADED_FRACTION * reference.i
            || s.abs() < DEGRADED_FRACTION * reference.s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{po_compose, ProductOperator, ProductOperatorCoeffs};

    fn state(pairs: &[(ProductOperator, f64)]) -> DensityMatrix {
        let mut coeffs = ProductOperatorCoeffs::from_pairs(pairs);
        coeffs[ProductOperator::HalfE] = 0.5;
        DensityMatrix::from_trusted(po_compose(&coeffs), None)
    }

    #[test]
    fn longitudinal_state_has_no_signal() {
        let sys = SpinSystem::cytosine();
        let rho = state(&[(ProductOperator::Iz, 0.3), (ProductOperator::IzSz, 0.2)]);
        let fid = synthesize_fid(&rho, &sys, &Acquisition::auto(&sys).unwrap()).unwrap();
        assert!(fid.samples.iter().all(|s| s.norm() < 1e-15));
        let spec = spectrum(&fid, 0.3);
        assert!(spec.amplitudes.iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn in_phase_doublet() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::auto(&sys).unwrap();
        let rho = state(&[(ProductOperator::Ix, 0.5)]);
        let fid = synthesize_fid(&rho, &sys, &acq).unwrap();
        let s0 = fid.samples[0];
        for (k, s) in fid.samples.iter().enumerate() {
            let t = k as f64 * acq.dwell;
            let expected = s0
                * C64::from_polar(1.0, 2.0 * PI * sys.nu_i * t)
                * (PI * sys.j * t).cos()
                * (-t / sys.t2_star).exp();
            assert!((s - expected).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn aliasing_rejected() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::new(1024, 1.0 / 700.0).unwrap();
        let rho = state(&[(ProductOperator::Ix, 0.5)]);
        assert!(matches!(
            synthesize_fid(&rho, &sys, &acq),
            Err(Error::Aliasing { .. })
        ));
        assert!(Acquisition::new(1000, 1e-3).is_err());
        assert!(Acquisition::new(1024, 0.0).is_err());
    }

    #[test]
    fn default_acquisition() {
        let acq = Acquisition::auto(&SpinSystem::cytosine()).unwrap();
        assert_eq!(acq.points, 4096);
        assert!((acq.dwell - 1.0 / 1526.0).abs() < 1e-15);
        assert!((acq.bin_width() - 1526.0 / 4096.0).abs() < 1e-12);
    }

    fn exponential(nu: f64, phase: f64, n: usize, dwell: f64) -> Fid {
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 * dwell;
                C64::from_polar((-t / 0.3).exp(), 2.0 * PI * nu * t + phase)
            })
            .collect();
        Fid::new(samples, dwell).unwrap()
    }

    #[test]
    fn lorentzian_is_centered_and_absorptive() {
        let fid = exponential(100.0, 0.0, 2048, 1e-3);
        let spec = spectrum(&fid, 0.0);
        assert!((spec.freqs[0] + 500.0).abs() < 1e-9);
        assert!(spec.freqs.windows(2).all(|w| w[1] > w[0]));
        let peak = (0..spec.freqs.len())
            .max_by(|&a, &b| spec.amplitudes[a].norm().total_cmp(&spec.amplitudes[b].norm()))
            .unwrap();
        assert!((spec.freqs[peak] - 100.0).abs() <= spec.bin_width());
        assert!(spec.amplitudes[peak].re > 0.0);
    }

    #[test]
    fn parseval() {
        let fid = exponential(37.0, 0.4, 512, 2e-3);
        let spec = spectrum(&fid, 1.1);
        let time: f64 = fid.samples.iter().map(|s| s.norm_sqr()).sum();
        let freq: f64 = spec.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!((freq - 512.0 * time).abs() < 1e-9 * freq);
    }

    #[test]
    fn phase_calibration() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::auto(&sys).unwrap();
        let rho = state(&[(ProductOperator::Ix, 0.5), (ProductOperator::Sx, 0.5)]);
        let fid = synthesize_fid(&rho, &sys, &acq).unwrap();
        let phased = spectrum(&fid, 0.0);
        assert!(calibrate_phase(&phased, &sys).unwrap().abs() < 1f64.to_radians());
        let rotated = Fid::new(
            fid.samples.iter().map(|s| s * C64::i()).collect(),
            fid.dwell,
        )
        .unwrap();
        let phi = calibrate_phase(&spectrum(&rotated, 0.0), &sys).unwrap();
        assert!((phi + PI / 2.0).abs() < 1f64.to_radians());
    }

    #[test]
    fn emission_line_reads_one() {
        let sys = SpinSystem::cytosine();
        let acq = Acquisition::auto(&sys).unwrap();
        let reference = spectrum(
            &synthesize_fid(&state(&[(ProductOperator::Ix, 0.5), (ProductOperator::Sx, 0.5)]), &sys, &acq).unwrap(),
            0.0,
        );
        let level = ReferenceLevel::measure(&reference, &sys, 0.0).unwrap();
        let spec = spectrum(
            &synthesize_fid(&state(&[(ProductOperator::Ix, 0.5), (ProductOperator::Sx, -0.5)]), &sys, &acq).unwrap(),
            0.0,
        );
        let r = classify(&spec, &sys, 0.0, &level).unwrap();
        assert_eq!((r.bit_i, r.bit_s, r.degraded), (0, 1, false));

        let (lo, hi) = spec.doublet(sys.nu_s, sys.j).unwrap();
        assert!(((hi - lo) - sys.j).abs() <= spec.bin_width());

        let weak = spectrum(
            &synthesize_fid(&state(&[(ProductOperator::Ix, 0.05), (ProductOperator::Sx, 0.4)]), &sys, &acq).unwrap(),
            0.0,
        );
        assert!(classify(&weak, &sys, 0.0, &level).unwrap().degraded);

        let silent = spectrum(&synthesize_fid(&state(&[]), &sys, &acq).unwrap(), 0.0);
        assert_eq!(classify(&silent, &sys, 0.0, &level), Err(Error::Unclassifiable));
    }
}
