//! Closed-form radial profiles that can be sampled and rescaled exactly.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Norms;
use crate::quadrature::{integrate_geometric, integrate_panels, smoothstep5};

/// Shape of a profile in its own variable `s = r / length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Zero,
    /// `exp(-s^2)`
    Gaussian,
    /// `(1 + s^2/3)^(-1/2)`
    AubinTalenti,
    /// `chi(s / cutoff) * (1 + s^2/3)^(-1/2)`, see [`cutoff`].
    TruncatedAubinTalenti {
        cutoff: f64,
    },
    /// Piecewise cubic Hermite interpolation of `(s, value)` rows, zero past
    /// the last row.
    Table {
        s: Vec<f64>,
        values: Vec<Complex64>,
    },
}

/// `amplitude * shape(r / length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticProfile {
    pub shape: Shape,
    pub amplitude: f64,
    pub length: f64,
}

/// Smooth radial cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`, a quintic ramp in
/// `x^2` between. Returns the value and its derivative.
pub fn cutoff(x: f64) -> (f64, f64) {
    if x <= 1.0 {
        return (1.0, 0.0);
    }
    if x >= 2.0 {
        return (0.0, 0.0);
    }
    let [s, ds, _] = smoothstep5((x * x - 1.0) / 3.0);
    (1.0 - s, -ds * 2.0 * x / 3.0)
}

fn at(s: f64) -> (f64, f64) {
    let q = 1.0 + s * s / 3.0;
    let v = q.powf(-0.5);
    (v, -s / 3.0 * v / q)
}

// Integrals of the Aubin–Talenti powers over t = s/sqrt(3) in [t0, inf).
// With theta = atan(t0): t^2/(1+t^2)^3 -> (pi/2-theta)/8 + sin(4 theta)/32,
// t^4/(1+t^2)^3 -> 3(pi/2-theta)/8 + sin(2 theta)/4 - sin(4 theta)/32,
// t^2/(1+t^2)^2 -> (pi/2-theta)/2 + sin(2 theta)/4.
struct AtTail {
    l6: f64,
    grad: f64,
    l4: f64,
}

fn at_tail(t0: f64) -> AtTail {
    let rest = if t0 <= 0.0 { FRAC_PI_2 } else { (1.0 / t0).atan() };
    let s2 = 2.0 * t0 / (1.0 + t0 * t0);
    let c2 = (1.0 - t0 * t0) / (1.0 + t0 * t0);
    let s4 = 2.0 * s2 * c2;
    let k = 12.0 * 3f64.sqrt() * PI;
    AtTail {
        l6: k * (rest / 8.0 + s4 / 32.0),
        grad: k / 3.0 * (3.0 * rest / 8.0 + s2 / 4.0 - s4 / 32.0),
        l4: k * (rest / 2.0 + s2 / 4.0),
    }
}

impl AnalyticProfile {
    pub fn new(shape: Shape, amplitude: f64, length: f64) -> Result<Self> {
        if !(amplitude.is_finite() && length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!(
                "profile needs finite amplitude and positive length, got {amplitude}, {length}"
            )));
        }
        match &shape {
            Shape::TruncatedAubinTalenti { cutoff } if !(cutoff.is_finite() && *cutoff > 0.0) => {
                return Err(Error::Config(format!("cutoff radius must be positive, got {cutoff}")));
            }
            Shape::Table { s, values } => {
                if s.len() != values.len() || s.len() < 2 {
                    return Err(Error::Shape { expected: s.len().max(2), actual: values.len() });
                }
                if s[0] < 0.0 || s.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("table abscissae must increase from >= 0".into()));
                }
            }
            _ => {}
        }
        Ok(Self { shape, amplitude, length })
    }

    pub fn zero() -> Self {
        Self { shape: Shape::Zero, amplitude: 0.0, length: 1.0 }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self { shape: Shape::Gaussian, amplitude, length: width }
    }

    pub fn aubin_talenti() -> Self {
        Self { shape: Shape::AubinTalenti, amplitude: 1.0, length: 1.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, Shape::Zero) || self.amplitude == 0.0
    }

    /// Radius beyond which the profile vanishes identically, if any.
    pub fn support(&self) -> Option<f64> {
        match &self.shape {
            Shape::Zero => Some(0.0),
            Shape::TruncatedAubinTalenti { cutoff } => Some(2.0 * cutoff * self.length),
            Shape::Table { s, .. } => Some(s[s.len() - 1] * self.length),
            Shape::Gaussian | Shape::AubinTalenti => None,
        }
    }

    /// Shape value and `d/ds` at `s`.
    fn shape_eval(&self, s: f64) -> (Complex64, Complex64) {
        let re = |(a, b): (f64, f64)| (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
        match &self.shape {
            Shape::Zero => re((0.0, 0.0)),
            Shape::Gaussian => {
                let e = (-s * s).exp();
                re((e, -2.0 * s * e))
            }
            Shape::AubinTalenti => re(at(s)),
            Shape::TruncatedAubinTalenti { cutoff: c } => {
                let (w, dw) = at(s);
                let (x, dx) = cutoff(s / c);
                re((x * w, x * dw + dx / c * w))
            }
            Shape::Table { s: xs, values } => table_eval(xs, values, s),
        }
    }

    pub fn value(&self, r: f64) -> Complex64 {
        self.amplitude * self.shape_eval(r / self.length).0
    }

    pub fn derivative(&self, r: f64) -> Complex64 {
        self.amplitude / self.length * self.shape_eval(r / self.length).1
    }

    /// `e^{a lambda} phi(e^{2 lambda} x)`, exactly.
    pub fn rescaled(&self, lambda: f64, amplitude_exponent: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            amplitude: self.amplitude * (amplitude_exponent * lambda).exp(),
            length: self.length * (-2.0 * lambda).exp(),
        }
    }

    fn scale(&self, shape_norms: Norms) -> Norms {
        let a2 = self.amplitude * self.amplitude;
        let l = self.length;
        let l3 = l * l * l;
        Norms {
            l2_sq: a2 * l3 * shape_norms.l2_sq,
            grad_sq: a2 * l * shape_norms.grad_sq,
            l4_4: a2 * a2 * l3 * shape_norms.l4_4,
            l6_6: a2 * a2 * a2 * l3 * shape_norms.l6_6,
        }
    }

    /// Norms over all of R^3 from closed forms or panel quadrature.
    pub fn norms(&self) -> Norms {
        self.tail_norms(0.0)
    }

    /// The norm integrals restricted to `|x| >= r0`.
    pub fn tail_norms(&self, r0: f64) -> Norms {
        if self.is_zero() {
            return Norms::default();
        }
        let s0 = (r0 / self.length).max(0.0);
        let shape = match &self.shape {
            Shape::Zero => Norms::default(),
            Shape::Gaussian => {
                let end = s0.max(0.0) + 12.0;
                self.shape_quadrature(s0, end, |a, b, f| integrate_panels(f, a, b, 48))
            }
            Shape::AubinTalenti => {
                let t = at_tail(s0 / 3f64.sqrt());
                Norms { l2_sq: f64::INFINITY, grad_sq: t.grad, l4_4: t.l4, l6_6: t.l6 }
            }
            Shape::TruncatedAubinTalenti { cutoff: c } => {
                let c = *c;
                let ramp = self.shape_quadrature(s0.max(c), 2.0 * c, |a, b, f| integrate_panels(f, a, b, 32));
                if s0 >= c {
                    ramp
                } else {
                    let sq3 = 3f64.sqrt();
                    let (ta, tb) = (at_tail(s0 / sq3), at_tail(c / sq3));
                    let (t0, t1) = (s0 / sq3, c / sq3);
                    let k = 12.0 * sq3 * PI;
                    // t^2/(1+t^2) -> t - atan t
                    let l2_core = k * ((t1 - t0) - (t1.atan() - t0.atan()));
                    Norms {
                        l2_sq: ramp.l2_sq + l2_core,
                        grad_sq: ramp.grad_sq + ta.grad - tb.grad,
                        l4_4: ramp.l4_4 + ta.l4 - tb.l4,
                        l6_6: ramp.l6_6 + ta.l6 - tb.l6,
                    }
                }
            }
            Shape::Table { s, .. } => {
                let mut acc = Norms::default();
                for w in s.windows(2) {
                    let (a, b) = (w[0].max(s0), w[1]);
                    if b > a {
                        acc = acc + self.shape_quadrature(a, b, |a, b, f| integrate_panels(f, a, b, 1));
                    }
                }
                acc
            }
        };
        self.scale(shape)
    }

    fn shape_quadrature(&self, a: f64, b: f64, rule: impl Fn(f64, f64, &dyn Fn(f64) -> f64) -> f64) -> Norms {
        if b <= a {
            return Norms::default();
        }
        let four_pi = 4.0 * PI;
        let p = |s: f64, pw: i32| {
            let (v, _) = self.shape_eval(s);
            four_pi * s * s * v.norm_sqr().powi(pw)
        };
        Norms {
            l2_sq: rule(a, b, &|s| p(s, 1)),
            grad_sq: rule(a, b, &|s| {
                let (_, d) = self.shape_eval(s);
                four_pi * s * s * d.norm_sqr()
            }),
            l4_4: rule(a, b, &|s| p(s, 2)),
            l6_6: rule(a, b, &|s| p(s, 3)),
        }
    }

    /// Grid-free norms by geometric panels, independent of the closed forms.
    /// Used as a cross-check; slowly decaying shapes are cut at `r_end`.
    pub fn norms_by_panels(&self, r_end: f64) -> Norms {
        let end = self.support().map_or(r_end, |s| s.min(r_end)) / self.length;
        let mut cuts = vec![0.0];
        if let Shape::TruncatedAubinTalenti { cutoff } = self.shape {
            cuts.push(cutoff.min(end));
        }
        cuts.push(end);
        let mut n = Norms::default();
        for w in cuts.windows(2) {
            n = n + self.shape_quadrature(w[0], w[1], |a, b, f| integrate_geometric(f, a, b, 0.25));
        }
        self.scale(n)
    }
}

fn table_eval(xs: &[f64], vs: &[Complex64], s: f64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let last = xs.len() - 1;
    if s >= xs[last] {
        return if s == xs[last] { (vs[last], zero) } else { (zero, zero) };
    }
    if s <= xs[0] {
        return (vs[0], zero);
    }
    let i = xs.partition_point(|&x| x <= s) - 1;
    let slope = |k: usize| -> Complex64 {
        if k == 0 || k == last {
            zero
        } else {
            (vs[k + 1] - vs[k - 1]) / (xs[k + 1] - xs[k - 1])
        }
    };
    let h = xs[i + 1] - xs[i];
    let t = (s - xs[i]) / h;
    let (m0, m1) = (slope(i) * h, slope(i + 1) * h);
    let (t2, t3) = (t * t, t * t * t);
    let v = vs[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * (t3 - 2.0 * t2 + t)
        + vs[i + 1] * (-2.0 * t3 + 3.0 * t2)
        + m1 * (t3 - t2);
    let d = vs[i] * (6.0 * t2 - 6.0 * t)
        + m0 * (3.0 * t2 - 4.0 * t + 1.0)
        + vs[i + 1] * (-6.0 * t2 + 6.0 * t)
        + m1 * (3.0 * t2 - 2.0 * t);
    (v, d / h)
}
