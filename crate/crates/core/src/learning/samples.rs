//! How many utility samples per phase keep the estimated acceptance rule
//! within the ξ-perturbation the convergence argument tolerates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

type LogMgfFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Log moment-generating function `θ ↦ log E[e^{θX}]` of the estimation
/// noise, searched on `[0, domain_max]`.
#[derive(Clone)]
pub struct LogMgf {
    f: Arc<LogMgfFn>,
    domain_max: f64,
    label: String,
}

impl LogMgf {
    pub fn new(
        label: impl Into<String>,
        domain_max: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(domain_max > 0.0 && domain_max.is_finite()) {
            return Err(invalid("log-MGF domain bound must be positive and finite"));
        }
        let mgf = Self {
            f: Arc::new(f),
            domain_max,
            label: label.into(),
        };
        mgf.check()?;
        Ok(mgf)
    }

    /// Zero-mean Gaussian noise: `log M(θ) = θ²σ²/2`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(invalid("gaussian sigma must be positive"));
        }
        let var = sigma * sigma;
        Self::new(format!("gaussian(sigma={sigma})"), 1e3 / var.max(1e-3), move |t| {
            0.5 * t * t * var
        })
    }

    #[inline]
    pub fn eval(&self, theta: f64) -> f64 {
        (self.f)(theta)
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `log M(0) = 0` and convexity on a grid over the domain.
    fn check(&self) -> Result<()> {
        if self.eval(0.0).abs() > 1e-12 {
            return Err(invalid("log-MGF must vanish at 0"));
        }
        let steps = 64;
        let h = self.domain_max / steps as f64;
        let vals: Vec<f64> = (0..=steps).map(|k| self.eval(k as f64 * h)).collect();
        for w in vals.windows(3) {
            if w.iter().all(|v| v.is_finite()) {
                let second = w[0] - 2.0 * w[1] + w[2];
                let scale = w.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                if second < -1e-9 * scale {
                    return Err(invalid("log-MGF is not convex on its domain"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LogMgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogMgf")
            .field("label", &self.label)
            .field("domain_max", &self.domain_max)
            .finish()
    }
}

/// Description of the utility-estimation noise.
#[derive(Debug, Clone)]
pub enum NoiseSpec {
    /// Samples lie in an interval of width `width`.
    Bounded { width: f64 },
    /// Unbounded noise characterized by its log-MGF.
    Unbounded(LogMgf),
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Bounded { width } if !(*width > 0.0 && width.is_finite()) => {
                Err(invalid("bounded noise width must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Serializable form of [`NoiseSpec`] for configs (only closed-form MGFs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseConfig {
    Bounded { width: f64 },
    Gaussian { sigma: f64 },
}

impl NoiseConfig {
    pub fn to_spec(&self) -> Result<NoiseSpec> {
        let spec = match *self {
            NoiseConfig::Bounded { width } => NoiseSpec::Bounded { width },
            NoiseConfig::Gaussian { sigma } => NoiseSpec::Unbounded(LogMgf::gaussian(sigma)?),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A sample count with the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRequirement {
    pub n: u64,
    /// `ln(4/ξ) + 2/τ`.
    pub numerator: f64,
    /// Bounded: `2(1−ξ)²τ²/ℓ²`. Unbounded: `θ*(1−ξ)τ − log M(θ*)`.
    pub denominator: f64,
    /// Chernoff parameter (unbounded noise only).
    pub theta_star: Option<f64>,
}

fn check_tau_xi(tau: f64, xi: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid(format!("temperature must be positive, got {tau}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid(format!("xi must lie in (0, 1), got {xi}")));
    }
    Ok(())
}

fn ceil_count(x: f64) -> Result<u64> {
    // Values past 2^53 no longer have integer resolution anyway.
    if !x.is_finite() || x >= 2f64.powi(63) {
        return Err(Error::SampleCountOverflow(x));
    }
    Ok((x.ceil() as u64).max(1))
}

/// Hoeffding count for noise bounded in an interval of width `width`:
/// `⌈(ln(4/ξ) + 2/τ) · ℓ² / (2(1−ξ)²τ²)⌉`.
pub fn required_samples_bounded(tau: f64, xi: f64, width: f64) -> Result<SampleRequirement> {
    check_tau_xi(tau, xi)?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid("noise width must be positive"));
    }
    let numerator = (4.0 / xi).ln() + 2.0 / tau;
    let denominator = 2.0 * (1.0 - xi).powi(2) * tau * tau / (width * width);
    Ok(SampleRequirement {
        n: ceil_count(numerator / denominator)?,
        numerator,
        denominator,
        theta_star: None,
    })
}

/// Chernoff count for unbounded noise:
/// `⌈(ln(4/ξ) + 2/τ) / (θ*(1−ξ)τ − log M(θ*))⌉` with θ* maximizing the
/// (concave) denominator over `[0, domain_max]` by golden-section search.
///
/// If `log M` grows slower than linearly the maximizer sits at the domain
/// bound, which then caps θ*.
pub fn required_samples_unbounded(tau: f64, xi: f64, mgf: &LogMgf) -> Result<SampleRequirement> {
    check_tau_xi(tau, xi)?;
    let slope = (1.0 - xi) * tau;
    let objective = |theta: f64| {
        let v = theta * slope - mgf.eval(theta);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let theta_star = golden_section_max(objective, 0.0, mgf.domain_max());
    let denominator = objective(theta_star);
    if !(denominator > 0.0) {
        return Err(Error::MgfTooHeavy { denominator });
    }
    let numerator = (4.0 / xi).ln() + 2.0 / tau;
    Ok(SampleRequirement {
        n: ceil_count(numerator / denominator)?,
        numerator,
        denominator,
        theta_star: Some(theta_star),
    })
}

pub fn required_samples(tau: f64, xi: f64, noise: &NoiseSpec) -> Result<SampleRequirement> {
    match noise {
        NoiseSpec::Bounded { width } => required_samples_bounded(tau, xi, *width),
        NoiseSpec::Unbounded(mgf) => required_samples_unbounded(tau, xi, mgf),
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The bracket endpoints can beat the midpoint when the optimum is at a bound.
    [lo, mid, hi]
        .into_iter()
        .fold((mid, f(mid)), |best, x| {
            let v = f(x);
            if v > best.1 {
                (x, v)
            } else {
                best
            }
        })
        .0
}
