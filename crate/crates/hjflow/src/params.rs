//! Plant and design-rate parameters.

use crate::error::{Error, Result};

/// Parameters of the viscous HJ plant u_t = ε u_xx − a u_x (b + u_x) together
/// with the controller rate c₁ and the observer rate c₂.
///
/// Every formula in the crate reads from this record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    epsilon: f64,
    a: f64,
    b: f64,
    c1: f64,
    c2: f64,
}

impl Params {
    /// Construct parameters, rejecting ε ≤ 0, a = 0 and negative rates.
    pub fn new(epsilon: f64, a: f64, b: f64, c1: f64, c2: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !a.is_finite() || a == 0.0 {
            return Err(Error::InvalidParams(format!("a must be nonzero, got {a}")));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParams(format!("b must be finite, got {b}")));
        }
        if !c1.is_finite() || c1 < 0.0 {
            return Err(Error::InvalidParams(format!("c1 must be >= 0, got {c1}")));
        }
        if !c2.is_finite() || c2 < 0.0 {
            return Err(Error::InvalidParams(format!("c2 must be >= 0, got {c2}")));
        }
        Ok(Self {
            epsilon,
            a,
            b,
            c1,
            c2,
        })
    }

    /// The traffic case study: a = b = 1, ε = 1/4, c₁ = c₂ = 1.
    pub fn traffic() -> Self {
        Self::new(0.25, 1.0, 1.0, 1.0, 1.0).expect("valid constants")
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// a/ε, the exponent rate of the linearizing transform.
    pub fn a_over_eps(&self) -> f64 {
        self.a / self.epsilon
    }

    /// ab/2ε, the exponent rate of the spatial weight.
    pub fn ab_over_2eps(&self) -> f64 {
        self.a * self.b / (2.0 * self.epsilon)
    }

    /// a²b²/4ε, the reaction rate of the transformed linear PDE.
    pub fn reaction_rate(&self) -> f64 {
        self.a * self.a * self.b * self.b / (4.0 * self.epsilon)
    }

    /// Copy with a different controller rate (used by rate sweeps).
    pub fn with_c1(mut self, c1: f64) -> Result<Self> {
        if !c1.is_finite() || c1 < 0.0 {
            return Err(Error::InvalidParams(format!("c1 must be >= 0, got {c1}")));
        }
        self.c1 = c1;
        Ok(self)
    }

    /// Copy with a different observer rate.
    pub fn with_c2(mut self, c2: f64) -> Result<Self> {
        if !c2.is_finite() || c2 < 0.0 {
            return Err(Error::InvalidParams(format!("c2 must be >= 0, got {c2}")));
        }
        self.c2 = c2;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_viscosity() {
        assert!(Params::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(Params::new(-0.5, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_zero_a() {
        assert!(Params::new(0.25, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(Params::new(0.25, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(Params::new(0.25, 1.0, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn traffic_constants() {
        let p = Params::traffic();
        assert_eq!(p.epsilon(), 0.25);
        assert_eq!(p.ab_over_2eps(), 2.0);
        assert_eq!(p.reaction_rate(), 1.0);
    }
}
