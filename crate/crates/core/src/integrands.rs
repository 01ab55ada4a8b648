//! Benchmark integrands with exact or reference integrals.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierPolynomial;
use crate::sampling::{inverse_normal_cdf, SMALLEST_UNIFORM};

/// `sum_{i=1}^d (-1)^i prod_{j<=i} x_j`.
pub fn truncation_test(x: &[f64]) -> f64 {
    let mut prod = 1.0;
    let mut sign = -1.0;
    let mut total = 0.0;
    for &v in x {
        prod *= v;
        total += sign * prod;
        sign = -sign;
    }
    total
}

/// `(1 - (-1/2)^d) / (-3)` as an exact fraction.
pub fn truncation_test_exact_integral_rational(d: usize) -> BigRational {
    let minus_half = BigRational::new(BigInt::from(-1), BigInt::from(2));
    let mut p = BigRational::one();
    for _ in 0..d {
        p *= &minus_half;
    }
    (BigRational::one() - p) / BigRational::from_integer(BigInt::from(-3))
}

pub fn truncation_test_exact_integral(d: usize) -> f64 {
    let d = d.min(i32::MAX as usize) as i32;
    (1.0 - (-0.5f64).powi(d)) / -3.0
}

/// Option value for the default parameters.
pub const ASIAN_REFERENCE: f64 = 7.2110915;

/// Arithmetic-average Asian call under geometric Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsianParams {
    pub s0: f64,
    pub strike: f64,
    pub maturity: f64,
    pub rate: f64,
    /// Zero is accepted as the deterministic limit.
    pub sigma: f64,
    /// Number of monitoring dates.
    pub d: usize,
}

impl Default for AsianParams {
    fn default() -> Self {
        Self {
            s0: 50.0,
            strike: 45.0,
            maturity: 1.0,
            rate: 0.05,
            sigma: 0.3,
            d: 12,
        }
    }
}

impl AsianParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("asian parameter {what}")));
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return bad("s0 must be positive");
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return bad("strike must be positive");
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return bad("maturity must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be non-negative");
        }
        if !self.rate.is_finite() {
            return bad("rate must be finite");
        }
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        Ok(())
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    /// Discounted payoff of the deterministic path `S_j = s0 e^{r j dt}`.
    pub fn deterministic_value(&self) -> f64 {
        let dt = self.maturity / self.d as f64;
        let mean = (1..=self.d)
            .map(|j| self.s0 * (self.rate * j as f64 * dt).exp())
            .sum::<f64>()
            / self.d as f64;
        (-self.rate * self.maturity).exp() * (mean - self.strike).max(0.0)
    }

    /// Known integral: the deterministic value when `sigma = 0`, the
    /// reference price for the default parameters, otherwise none.
    pub fn reference_value(&self) -> Option<f64> {
        if self.sigma == 0.0 {
            Some(self.deterministic_value())
        } else if self.is_default() {
            Some(ASIAN_REFERENCE)
        } else {
            None
        }
    }
}

/// Discounted payoff for one uniform vector, with sequential increments
/// `S_j = S_{j-1} exp((r - sigma^2/2) dt + sigma sqrt(dt) z_j)`.
pub fn asian_call_payoff(u: &[f64], p: &AsianParams) -> Result<f64> {
    if u.len() != p.d {
        return Err(Error::DimensionMismatch {
            expected: p.d,
            got: u.len(),
        });
    }
    let dt = p.maturity / p.d as f64;
    let drift = (p.rate - 0.5 * p.sigma * p.sigma) * dt;
    let vol = p.sigma * dt.sqrt();
    let mut log_s = p.s0.ln();
    let mut total = 0.0;
    for &uj in u {
        let z = inverse_normal_cdf(uj)?;
        log_s += drift + vol * z;
        total += log_s.exp();
    }
    let mean = total / p.d as f64;
    Ok((-p.rate * p.maturity).exp() * (mean - p.strike).max(0.0))
}

/// Named integrand.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    Truncation { d: usize },
    Asian(AsianParams),
    Fourier(FourierPolynomial),
    Constant { d: usize, value: f64 },
}

impl Integrand {
    /// Resolve a registry name: `truncation`, `asian`, `fourier:<file>`,
    /// `constant` or `constant:<value>`.
    pub fn from_name(name: &str, d: usize, asian: Option<AsianParams>) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let f = match (head, arg) {
            ("truncation", None) => Integrand::Truncation { d },
            ("asian", None) => {
                let p = AsianParams {
                    d,
                    ..asian.unwrap_or_default()
                };
                p.validate()?;
                Integrand::Asian(p)
            }
            ("fourier", Some(path)) => {
                let f = read_fourier(Path::new(path))?;
                if f.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: f.dim(),
                    });
                }
                Integrand::Fourier(f)
            }
            ("constant", v) => {
                let value = match v {
                    Some(s) => s
                        .parse()
                        .map_err(|e| Error::InvalidConfig(format!("constant `{s}`: {e}")))?,
                    None => 1.0,
                };
                Integrand::Constant { d, value }
            }
            _ => return Err(Error::InvalidConfig(format!("unknown integrand `{name}`"))),
        };
        if let Integrand::Fourier(p) = &f {
            if let Some(k) = p.asymmetric_frequency() {
                return Err(Error::NotConjugateSymmetric(k));
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        match self {
            Integrand::Truncation { d } | Integrand::Constant { d, .. } => *d,
            Integrand::Asian(p) => p.d,
            Integrand::Fourier(f) => f.dim(),
        }
    }

    /// Value at `x`. Asian coordinates are clamped into
    /// `[2^-53, 1 - 2^-53]` first.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Integrand::Truncation { .. } => truncation_test(x),
            Integrand::Asian(p) => {
                let mut u = [0.0; 64];
                let clamp = |v: f64| v.clamp(SMALLEST_UNIFORM, 1.0 - SMALLEST_UNIFORM);
                if x.len() <= u.len() {
                    for (dst, &v) in u.iter_mut().zip(x) {
                        *dst = clamp(v);
                    }
                    asian_call_payoff(&u[..x.len()], p)
                } else {
                    let u: Vec<f64> = x.iter().map(|&v| clamp(v)).collect();
                    asian_call_payoff(&u, p)
                }
                .expect("clamped coordinates lie inside (0, 1)")
            }
            Integrand::Fourier(f) => f.eval_real_unchecked(x),
            Integrand::Constant { value, .. } => *value,
        }
    }

    /// Exact or reference integral when one is known.
    pub fn exact(&self) -> Option<f64> {
        match self {
            Integrand::Truncation { d } => Some(truncation_test_exact_integral(*d)),
            Integrand::Asian(p) => p.reference_value(),
            Integrand::Fourier(f) => Some(f.integral()),
            Integrand::Constant { value, .. } => Some(*value),
        }
    }
}

fn read_fourier(path: &Path) -> Result<FourierPolynomial> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    FourierPolynomial::parse(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::integration_error;
    use crate::sampling::iid_uniform;

    #[test]
    fn truncation_values() {
        assert_eq!(truncation_test(&[0.5]), -0.5);
        assert_eq!(truncation_test(&[0.5, 0.5]), -0.25);
        let x = 1.0 - f64::EPSILON;
        assert!((truncation_test(&[x, x, x]) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncation_integrals() {
        assert_eq!(truncation_test_exact_integral(1), -0.5);
        assert_eq!(truncation_test_exact_integral(2), -0.25);
        assert!((truncation_test_exact_integral(100) + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            truncation_test_exact_integral_rational(2),
            BigRational::new(BigInt::from(-1), BigInt::from(4))
        );
    }

    #[test]
    fn truncation_midpoint_quadrature() {
        for d in 1..=4usize {
            let m: usize = if d == 4 { 33 } else { 64 };
            let total = m.pow(d as u32);
            let mut sum = 0.0;
            let mut x = vec![0.0; d];
            for mut c in 0..total {
                for v in x.iter_mut() {
                    *v = ((c % m) as f64 + 0.5) / m as f64;
                    c /= m;
                }
                sum += truncation_test(&x);
            }
            let q = sum / total as f64;
            assert!((q - truncation_test_exact_integral(d)).abs() < 1e-3, "d = {d}");
        }
    }

    #[test]
    fn asian_median_path() {
        let p = AsianParams::default();
        let v = asian_call_payoff(&[0.5; 12], &p).unwrap();
        let dt = 1.0 / 12.0;
        let mean = (1..=12).map(|j| 50.0 * (0.005 * j as f64 * dt).exp()).sum::<f64>() / 12.0;
        let expected = (-0.05f64).exp() * (mean - 45.0);
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 4.885_183_363_925_75).abs() < 1e-9);
    }

    #[test]
    fn asian_boundary_rejected() {
        let p = AsianParams::default();
        let mut u = [0.5; 12];
        u[3] = 0.0;
        assert!(asian_call_payoff(&u, &p).is_err());
        assert!(Integrand::Asian(p).eval(&u).is_finite());
    }

    #[test]
    fn asian_zero_volatility() {
        let p = AsianParams {
            sigma: 0.0,
            ..AsianParams::default()
        };
        let pts = iid_uniform(1000, 12, 3);
        let f = Integrand::Asian(p);
        let e = integration_error(&pts, |x| f.eval(x), p.deterministic_value());
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn asian_monotone_in_each_coordinate() {
        let p = AsianParams::default();
        let pts = iid_uniform(200, 12, 8);
        for (i, x) in pts.iter().enumerate() {
            let j = i % 12;
            let mut lo = x.to_vec();
            let mut hi = x.to_vec();
            hi[j] = (x[j] + 0.1).min(0.999);
            lo[j] = x[j].max(1e-6);
            assert!(asian_call_payoff(&hi, &p).unwrap() >= asian_call_payoff(&lo, &p).unwrap());
        }
    }

    #[test]
    fn registry() {
        assert_eq!(Integrand::from_name("truncation", 5, None).unwrap().exact(), Some(truncation_test_exact_integral(5)));
        assert_eq!(Integrand::from_name("asian", 12, None).unwrap().exact(), Some(ASIAN_REFERENCE));
        assert_eq!(Integrand::from_name("asian", 6, None).unwrap().exact(), None);
        assert_eq!(Integrand::from_name("constant:2.5", 3, None).unwrap().eval(&[0.1; 3]), 2.5);
        assert!(Integrand::from_name("nope", 2, None).is_err());
        assert!(Integrand::from_name("fourier:/nonexistent/file", 2, None).is_err());
    }

    #[test]
    fn registry_rejects_invalid_asian() {
        let p = AsianParams {
            sigma: -0.1,
            ..AsianParams::default()
        };
        assert!(Integrand::from_name("asian", 12, Some(p)).is_err());
    }
}
