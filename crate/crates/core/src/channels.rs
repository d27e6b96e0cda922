//! Flat fading models: Rayleigh, Rician and Nakagami-m.
//!
//! Each model is described by a [`ChannelSpec`]. The quantities used
//! downstream are the mean square `E[|h|^2]`, the moment generating function
//! of the instantaneous SNR evaluated at a negative argument, and a sampler
//! for complex channel gains.
//!
//! With `gamma_bar` the average SNR the MGFs are
//!
//! * Rayleigh: `1 / (1 + s gamma_bar)`
//! * Rician: `(1+K)/(1+K+s gamma_bar) * exp(-K s gamma_bar / (1+K+s gamma_bar))`
//!   with Rician factor `K = u^2 / (2 sigma^2)`
//! * Nakagami-m: `(1 + s gamma_bar / m)^(-m)`

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fading model and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Zero-mean complex Gaussian gain with per-dimension variance `sigma2`.
    Rayleigh { sigma2: f64 },
    /// Line-of-sight amplitude `u` plus a Rayleigh scatter component.
    Rician { sigma2: f64, u: f64 },
    /// Nakagami-m amplitude with fading parameter `m` and spread `omega`.
    Nakagami { m: f64, omega: f64 },
}

impl ChannelSpec {
    pub fn rayleigh(sigma2: f64) -> Result<Self> {
        Self::Rayleigh { sigma2 }.validated()
    }

    pub fn rician(u: f64, sigma2: f64) -> Result<Self> {
        Self::Rician { sigma2, u }.validated()
    }

    pub fn nakagami(m: f64, omega: f64) -> Result<Self> {
        Self::Nakagami { m, omega }.validated()
    }

    /// Returns `self` if all parameters are admissible.
    pub fn validated(self) -> Result<Self> {
        let ok = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::Parameter(msg.to_string()))
            }
        };
        match self {
            ChannelSpec::Rayleigh { sigma2 } => {
                ok(sigma2.is_finite() && sigma2 > 0.0, "Rayleigh sigma2 must be > 0")?
            }
            ChannelSpec::Rician { sigma2, u } => {
                ok(sigma2.is_finite() && sigma2 > 0.0, "Rician sigma2 must be > 0")?;
                ok(u.is_finite() && u >= 0.0, "Rician LoS amplitude u must be >= 0")?;
            }
            ChannelSpec::Nakagami { m, omega } => {
                ok(m.is_finite() && m >= 0.5, "Nakagami m must be >= 0.5")?;
                ok(omega.is_finite() && omega > 0.0, "Nakagami omega must be > 0")?;
            }
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Rayleigh { .. } => "rayleigh",
            ChannelSpec::Rician { .. } => "rician",
            ChannelSpec::Nakagami { .. } => "nakagami",
        }
    }

    /// Rician factor `u^2 / (2 sigma^2)`; zero for the other models.
    pub fn rician_factor(&self) -> f64 {
        match *self {
            ChannelSpec::Rician { sigma2, u } => u * u / (2.0 * sigma2),
            _ => 0.0,
        }
    }

    /// `E[|h|^2]`.
    pub fn mean_square(&self) -> f64 {
        match *self {
            ChannelSpec::Rayleigh { sigma2 } => 2.0 * sigma2,
            ChannelSpec::Rician { sigma2, .. } => 2.0 * sigma2 * (1.0 + self.rician_factor()),
            ChannelSpec::Nakagami { omega, .. } => omega,
        }
    }

    /// Average SNR for a unit-energy symbol at the given `Es/N0` (linear).
    pub fn gamma_bar(&self, es_over_n0: f64) -> f64 {
        self.mean_square() * es_over_n0
    }

    /// `M_gamma(-s)` for average SNR `gamma_bar`.
    pub fn mgf_neg(&self, s: f64, gamma_bar: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("MGF argument s = {s} must be >= 0")));
        }
        if !(gamma_bar > 0.0) {
            return Err(Error::Domain(format!("average SNR {gamma_bar} must be > 0")));
        }
        Ok(self.mgf_of_product(s * gamma_bar))
    }

    /// `M_gamma(-s)` written in terms of `x = s * gamma_bar >= 0`.
    pub(crate) fn mgf_of_product(&self, x: f64) -> f64 {
        match *self {
            ChannelSpec::Rayleigh { .. } => 1.0 / (1.0 + x),
            ChannelSpec::Rician { .. } => {
                let k = self.rician_factor();
                let denom = 1.0 + k + x;
                (1.0 + k) / denom * (-k * x / denom).exp()
            }
            ChannelSpec::Nakagami { m, .. } => (1.0 + x / m).powf(-m),
        }
    }

    /// Derivative of [`Self::mgf_of_product`] with respect to `x`.
    pub(crate) fn mgf_of_product_derivative(&self, x: f64) -> f64 {
        match *self {
            ChannelSpec::Rayleigh { .. } => -1.0 / ((1.0 + x) * (1.0 + x)),
            ChannelSpec::Rician { .. } => {
                let k = self.rician_factor();
                let denom = 1.0 + k + x;
                let amp = (1.0 + k) / denom;
                let expo = (-k * x / denom).exp();
                let d_amp = -(1.0 + k) / (denom * denom);
                let d_expo = -k * (1.0 + k) / (denom * denom);
                expo * (d_amp + amp * d_expo)
            }
            ChannelSpec::Nakagami { m, .. } => -(1.0 + x / m).powf(-m - 1.0),
        }
    }

    /// Draws `res` independent complex gains.
    ///
    /// Rician gains carry their line-of-sight part on the real axis. Nakagami
    /// gains draw `|h|^2` from `Gamma(m, omega / m)` and a uniform phase.
    pub fn sample<R: Rng + ?Sized>(&self, res: usize, rng: &mut R) -> FadingRealization {
        let coefficients = (0..res).map(|_| self.sample_one(rng)).collect();
        FadingRealization { coefficients }
    }

    #[inline]
    pub(crate) fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            ChannelSpec::Rayleigh { sigma2 } => complex_gaussian(rng) * sigma2.sqrt(),
            ChannelSpec::Rician { sigma2, u } => complex_gaussian(rng) * sigma2.sqrt() + u,
            ChannelSpec::Nakagami { m, omega } => {
                let power: f64 = Gamma::new(m, omega / m)
                    .expect("validated Nakagami parameters")
                    .sample(rng);
                let phase = rng.random::<f64>() * 2.0 * PI;
                Complex64::from_polar(power.sqrt(), phase)
            }
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelSpec::Rayleigh { sigma2 } => write!(f, "rayleigh(sigma2={sigma2})"),
            ChannelSpec::Rician { sigma2, u } => write!(f, "rician(u={u}, sigma2={sigma2})"),
            ChannelSpec::Nakagami { m, omega } => write!(f, "nakagami(m={m}, omega={omega})"),
        }
    }
}

/// `X + jY` with `X, Y` independent standard normals.
#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// One draw of per-RE channel gains.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingRealization {
    pub coefficients: Vec<Complex64>,
}

/// Per-RE Chernoff/MGF factor of the pairwise error probability.
///
/// For a squared per-RE distance `d2` this is `M_gamma(-d2 / 4)` at the
/// average SNR implied by the channel and `Es/N0`.
#[derive(Clone, Copy, Debug)]
pub struct PairFactor {
    spec: ChannelSpec,
    scale: f64,
}

impl PairFactor {
    pub fn new(spec: ChannelSpec, es_over_n0: f64) -> Self {
        PairFactor { spec, scale: spec.gamma_bar(es_over_n0) / 4.0 }
    }

    #[inline]
    pub fn eval(&self, d2: f64) -> f64 {
        self.spec.mgf_of_product(self.scale * d2)
    }

    /// Derivative with respect to `d2`.
    #[inline]
    pub fn derivative(&self, d2: f64) -> f64 {
        self.scale * self.spec.mgf_of_product_derivative(self.scale * d2)
    }
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_squares() {
        assert_eq!(ChannelSpec::rayleigh(0.5).unwrap().mean_square(), 1.0);
        assert_eq!(ChannelSpec::rician(0.0, 0.5).unwrap().mean_square(), 1.0);
        assert_eq!(ChannelSpec::nakagami(1.5, 2.0).unwrap().mean_square(), 2.0);
        // u = 2, sigma2 = 0.5: K = 4, E = 1 * 5
        assert!((ChannelSpec::rician(2.0, 0.5).unwrap().mean_square() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mgf_simple_values() {
        let ray = ChannelSpec::rayleigh(0.5).unwrap();
        assert_eq!(ray.mgf_neg(0.0, 3.7).unwrap(), 1.0);
        assert_eq!(ray.mgf_neg(1.0, 1.0).unwrap(), 0.5);
        assert!(matches!(ray.mgf_neg(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ray.mgf_neg(0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn nakagami_unit_m_is_rayleigh() {
        let ray = ChannelSpec::rayleigh(0.5).unwrap();
        let nak = ChannelSpec::nakagami(1.0, 1.0).unwrap();
        for &s in &[0.0, 0.1, 1.0, 7.5] {
            for &g in &[0.01, 1.0, 100.0] {
                let a = ray.mgf_neg(s, g).unwrap();
                let b = nak.mgf_neg(s, g).unwrap();
                assert!((a - b).abs() < 1e-15, "{s} {g}");
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(ChannelSpec::rayleigh(0.0).is_err());
        assert!(ChannelSpec::rician(-1.0, 0.5).is_err());
        assert!(ChannelSpec::nakagami(0.4, 1.0).is_err());
        assert!(ChannelSpec::nakagami(1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let specs = [
            ChannelSpec::rayleigh(0.3).unwrap(),
            ChannelSpec::rician(1.2, 0.4).unwrap(),
            ChannelSpec::nakagami(2.5, 1.3).unwrap(),
        ];
        for spec in specs {
            let f = PairFactor::new(spec, 12.0);
            for &d2 in &[0.0, 0.05, 0.7, 3.0] {
                let h = 1e-6;
                let fd = (f.eval(d2 + h) - f.eval((d2 - h).max(0.0))) / (d2 + h - (d2 - h).max(0.0));
                let an = f.derivative(d2);
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{spec} {d2}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn pure_los_limit() {
        let spec = ChannelSpec::rician(2.0, 1e-14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draw = spec.sample(1000, &mut rng);
        assert!(draw.coefficients.iter().all(|h| (h.norm() - 2.0).abs() < 1e-5));
    }
}
