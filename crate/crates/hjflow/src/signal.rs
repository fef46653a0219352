//! Time signals with exact analytic n-th derivatives.
//!
//! Reference outputs and their lifted forms need derivatives of arbitrary
//! order, and the Gevrey-bound checks need them exactly: numerical
//! differentiation at order 8 is hopeless. Composite signals (exponentials,
//! products) therefore propagate derivatives through exact Leibniz
//! recurrences with integer binomial weights.

use std::sync::Arc;

/// A smooth time function exposing its n-th derivative at any t ≥ 0.
pub trait Signal: Send + Sync {
    /// d^n/dt^n of the signal at time t (n = 0 is the value itself).
    fn derivative(&self, order: usize, t: f64) -> f64;

    fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }
}

impl Signal for Arc<dyn Signal> {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        self.as_ref().derivative(order, t)
    }
}

/// amplitude · sin(t); n-th derivative amplitude · sin(t + nπ/2).
#[derive(Debug, Clone, Copy)]
pub struct SineSignal {
    pub amplitude: f64,
}

impl Signal for SineSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        self.amplitude * (t + order as f64 * std::f64::consts::FRAC_PI_2).sin()
    }
}

/// slope · t; first derivative slope, higher derivatives zero.
#[derive(Debug, Clone, Copy)]
pub struct RampSignal {
    pub slope: f64,
}

impl Signal for RampSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        match order {
            0 => self.slope * t,
            1 => self.slope,
            _ => 0.0,
        }
    }
}

/// Constant signal; all derivatives zero.
#[derive(Debug, Clone, Copy)]
pub struct ConstSignal {
    pub value: f64,
}

impl Signal for ConstSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        let _ = t;
        if order == 0 {
            self.value
        } else {
            0.0
        }
    }
}

/// Binomial coefficient as f64; exact for the orders used here (n ≤ ~50).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// e^{scale·f(t)} with derivatives from the recurrence
/// E^{(n+1)} = Σ_i C(n,i) (scale·f)^{(i+1)} E^{(n−i)}.
pub struct ExpSignal {
    pub inner: Arc<dyn Signal>,
    pub scale: f64,
}

impl ExpSignal {
    pub fn new(inner: Arc<dyn Signal>, scale: f64) -> Self {
        Self { inner, scale }
    }

    /// All derivatives of e^{scale·f} up to `order` at one time instant.
    pub fn derivatives_upto(&self, order: usize, t: f64) -> Vec<f64> {
        let mut e = Vec::with_capacity(order + 1);
        e.push((self.scale * self.inner.derivative(0, t)).exp());
        let f_der: Vec<f64> = (1..=order)
            .map(|i| self.scale * self.inner.derivative(i, t))
            .collect();
        for n in 0..order {
            let mut s = 0.0;
            for i in 0..=n {
                s += binomial(n, i) * f_der[i] * e[n - i];
            }
            e.push(s);
        }
        e
    }
}

impl Signal for ExpSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        self.derivatives_upto(order, t)[order]
    }
}

/// Product of two signals, differentiated by the Leibniz rule.
pub struct ProductSignal {
    pub left: Arc<dyn Signal>,
    pub right: Arc<dyn Signal>,
}

impl Signal for ProductSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        (0..=order)
            .map(|i| {
                binomial(order, i)
                    * self.left.derivative(i, t)
                    * self.right.derivative(order - i, t)
            })
            .sum()
    }
}

/// constant + Σ coefficient·signal.
pub struct LinComboSignal {
    pub terms: Vec<(f64, Arc<dyn Signal>)>,
    pub constant: f64,
}

impl Signal for LinComboSignal {
    fn derivative(&self, order: usize, t: f64) -> f64 {
        let mut s: f64 = self
            .terms
            .iter()
            .map(|(c, f)| c * f.derivative(order, t))
            .sum();
        if order == 0 {
            s += self.constant;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sine_known_derivatives() {
        let s = SineSignal { amplitude: 1.0 };
        assert_relative_eq!(s.derivative(2, 0.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.derivative(1, 0.0), 1.0, epsilon = 1e-15);
        // 4-periodic in the order
        assert_relative_eq!(s.derivative(4, 1.3), s.derivative(0, 1.3), epsilon = 1e-12);
    }

    #[test]
    fn ramp_derivatives() {
        let r = RampSignal { slope: 0.25 };
        assert_eq!(r.derivative(0, 8.0), 2.0);
        assert_eq!(r.derivative(1, 3.7), 0.25);
        assert_eq!(r.derivative(3, 3.7), 0.0);
    }

    #[test]
    fn const_derivatives() {
        let c = ConstSignal { value: -0.5 };
        assert_eq!(c.derivative(0, 2.0), -0.5);
        assert_eq!(c.derivative(1, 2.0), 0.0);
        assert_eq!(c.derivative(5, 2.0), 0.0);
    }

    #[test]
    fn exp_of_ramp_matches_closed_form() {
        // e^{-t/2}: n-th derivative (-1/2)^n e^{-t/2}
        let e = ExpSignal::new(Arc::new(RampSignal { slope: 1.0 }), -0.5);
        for n in 0..10 {
            let expect = (-0.5f64).powi(n as i32) * (-0.5f64 * 1.7).exp();
            assert_relative_eq!(e.derivative(n, 1.7), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn exp_of_sine_against_central_differences() {
        let e = ExpSignal::new(Arc::new(SineSignal { amplitude: 0.3 }), 1.0);
        let h = 1e-5;
        let t = 0.9;
        let fd = (e.derivative(0, t + h) - e.derivative(0, t - h)) / (2.0 * h);
        assert_relative_eq!(e.derivative(1, t), fd, max_relative = 1e-8);
        let fd2 = (e.derivative(1, t + h) - e.derivative(1, t - h)) / (2.0 * h);
        assert_relative_eq!(e.derivative(2, t), fd2, max_relative = 1e-7);
    }

    #[test]
    fn product_leibniz_matches_analytic() {
        // t/4 * sin t: second derivative = cos t/2 - t sin t /4
        let p = ProductSignal {
            left: Arc::new(RampSignal { slope: 0.25 }),
            right: Arc::new(SineSignal { amplitude: 1.0 }),
        };
        let t = 2.1f64;
        let expect = 0.5 * t.cos() - 0.25 * t * t.sin();
        assert_relative_eq!(p.derivative(2, t), expect, max_relative = 1e-13);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(40, 20), 137_846_528_820.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn values_are_continuous_under_dense_sampling() {
        let signals: Vec<Box<dyn Signal>> = vec![
            Box::new(SineSignal { amplitude: 0.25 }),
            Box::new(RampSignal { slope: 0.25 }),
            Box::new(ConstSignal { value: -0.5 }),
            Box::new(ExpSignal::new(
                Arc::new(SineSignal { amplitude: 0.25 }),
                1.0,
            )),
            Box::new(ProductSignal {
                left: Arc::new(RampSignal { slope: 0.25 }),
                right: Arc::new(SineSignal { amplitude: 1.0 }),
            }),
        ];
        let dt = 1e-4;
        for s in &signals {
            for i in 0..5000 {
                let t = i as f64 * dt;
                let jump = (s.derivative(0, t + dt) - s.derivative(0, t)).abs();
                assert!(jump <= 10.0 * dt, "jump {jump:.3e} at t = {t}");
            }
        }
    }
}
