use std::fmt;

use crate::error::{Result, VnsError};

/// Named scaling presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegimeKind {
    /// `(γ, σ) = (1, 1)`.
    Light,
    /// `(γ, σ) = (1, ε^α)` with `α ∈ [0, 1/2]`.
    LightFast,
    /// `(γ, σ) = (ε, 1)`.
    Fine,
    /// Arbitrary positive triple, for experiments.
    Custom,
}

/// Scaling parameters `(ε, γ, σ)` of the kinetic–fluid system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRegime {
    pub epsilon: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub kind: RegimeKind,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(VnsError::InvalidArgument(format!("epsilon = {eps} must lie in (0, 1]")));
    }
    Ok(())
}

impl ScalingRegime {
    pub fn light(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self { epsilon, gamma: 1.0, sigma: 1.0, alpha: 0.0, kind: RegimeKind::Light })
    }

    pub fn light_fast(epsilon: f64, alpha: f64) -> Result<Self> {
        check_eps(epsilon)?;
        if !(0.0..=0.5).contains(&alpha) {
            return Err(VnsError::InvalidArgument(format!("alpha = {alpha} must lie in [0, 1/2]")));
        }
        Ok(Self {
            epsilon,
            gamma: 1.0,
            sigma: epsilon.powf(alpha),
            alpha,
            kind: RegimeKind::LightFast,
        })
    }

    pub fn fine(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self { epsilon, gamma: epsilon, sigma: 1.0, alpha: 0.0, kind: RegimeKind::Fine })
    }

    pub fn custom(epsilon: f64, gamma: f64, sigma: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("gamma", gamma), ("sigma", sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(VnsError::InvalidArgument(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { epsilon, gamma, sigma, alpha: 0.0, kind: RegimeKind::Custom })
    }

    /// Preset by name: `light`, `light_fast` or `fine`.
    pub fn by_name(name: &str, epsilon: f64, alpha: f64) -> Result<Self> {
        match name {
            "light" => Self::light(epsilon),
            "light_fast" => Self::light_fast(epsilon, alpha),
            "fine" => Self::fine(epsilon),
            other => Err(VnsError::InvalidArgument(format!("unknown regime '{other}'"))),
        }
    }

    /// Same preset at another ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        match self.kind {
            RegimeKind::Light => Self::light(epsilon),
            RegimeKind::LightFast => Self::light_fast(epsilon, self.alpha),
            RegimeKind::Fine => Self::fine(epsilon),
            RegimeKind::Custom => Self::custom(epsilon, self.gamma, self.sigma),
        }
    }

    /// Kinetic energy prefactor `ε / (σ² γ)`.
    pub fn kinetic_weight(&self) -> f64 {
        self.epsilon / (self.sigma * self.sigma * self.gamma)
    }
}

impl fmt::Display for ScalingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            RegimeKind::Light => "light",
            RegimeKind::LightFast => "light_fast",
            RegimeKind::Fine => "fine",
            RegimeKind::Custom => "custom",
        };
        write!(f, "{name}(eps={}, gamma={}, sigma={})", self.epsilon, self.gamma, self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let r = ScalingRegime::fine(0.1).unwrap();
        assert_eq!((r.gamma, r.sigma), (0.1, 1.0));
        let r = ScalingRegime::light_fast(0.0625, 0.5).unwrap();
        assert!((r.sigma - 0.25).abs() < 1e-15);
        assert!(ScalingRegime::light_fast(0.1, 0.6).is_err());
        assert!(ScalingRegime::light(0.0).is_err());
        assert!(ScalingRegime::light(1.5).is_err());
    }
}
