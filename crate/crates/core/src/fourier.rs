//! Finite Fourier polynomials `f(x) = sum_k c_k exp(2 pi i <k, x>)`.

use std::collections::BTreeMap;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients equal up to this (relative) tolerance count as conjugate.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierPolynomial {
    d: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierPolynomial {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    /// Build from `(frequency, coefficient)` pairs; repeated frequencies add.
    pub fn from_terms<I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut f = Self::new(d);
        for (k, c) in terms {
            f.add_term(k, c)?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, k: Vec<i64>, c: Complex64) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: k.len(),
            });
        }
        let slot = self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
        Ok(())
    }

    /// `cos(2 pi k . x)` scaled by `amplitude`.
    pub fn cosine(k: Vec<i64>, amplitude: f64) -> Result<Self> {
        let d = k.len();
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let half = Complex64::new(amplitude / 2.0, 0.0);
        Self::from_terms(d, [(k, half), (neg, half)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], Complex64)> + '_ {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    /// The integral over the unit cube, `Re c_0`.
    pub fn integral(&self) -> f64 {
        self.coefficient(&vec![0; self.d]).re
    }

    /// First frequency whose coefficient is not the conjugate of its mirror.
    pub fn asymmetric_frequency(&self) -> Option<Vec<i64>> {
        self.terms.iter().find_map(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let mirror = self.coefficient(&neg).conj();
            let scale = c.norm().max(mirror.norm()).max(1.0);
            ((c - mirror).norm() > SYMMETRY_TOL * scale).then(|| k.clone())
        })
    }

    pub fn is_real(&self) -> bool {
        self.asymmetric_frequency().is_none()
    }

    /// Complex value at `x`.
    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                let (s, co) = (std::f64::consts::TAU * phase).sin_cos();
                c * Complex64::new(co, s)
            })
            .sum()
    }

    /// Real part of the value; only meaningful for real polynomials.
    pub fn eval_real_unchecked(&self, x: &[f64]) -> f64 {
        self.eval_complex(x).re
    }

    /// Parse lines `k_1 ... k_d re im`; blank lines and `#` comments are
    /// skipped. All rows must have the same dimension.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut out: Option<Self> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            if fields.len() < 3 {
                return Err(parse_err(format!("expected `k_1 .. k_d re im`, got {} fields", fields.len())));
            }
            let d = fields.len() - 2;
            let k = fields[..d]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|e| parse_err(format!("frequency `{s}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(format!("coefficient `{s}`: {e}")));
            let c = Complex64::new(num(fields[d])?, num(fields[d + 1])?);
            let f = out.get_or_insert_with(|| Self::new(d));
            f.add_term(k, c).map_err(|_| parse_err(format!("expected {} frequencies, got {d}", f.d)))?;
        }
        out.ok_or_else(|| Error::Parse {
            line: 0,
            message: "no coefficients".into(),
        })
    }
}

/// Value of a real Fourier polynomial at `x`.
pub fn fourier_poly_eval(f: &FourierPolynomial, x: &[f64]) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    if let Some(k) = f.asymmetric_frequency() {
        return Err(Error::NotConjugateSymmetric(k));
    }
    let v = f.eval_complex(x);
    let mass: f64 = f.terms().map(|(_, c)| c.norm()).sum();
    debug_assert!(v.im.abs() <= 1e-12 * mass.max(1.0), "imaginary residual {}", v.im);
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_values() {
        let f = FourierPolynomial::cosine(vec![1], 1.0).unwrap();
        assert_eq!(fourier_poly_eval(&f, &[0.0]).unwrap(), 1.0);
        assert!(fourier_poly_eval(&f, &[0.25]).unwrap().abs() < 1e-15);
        assert_eq!(f.integral(), 0.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let f = FourierPolynomial::from_terms(1, [(vec![1], Complex64::new(0.5, 0.0))]).unwrap();
        assert!(matches!(
            fourier_poly_eval(&f, &[0.1]),
            Err(Error::NotConjugateSymmetric(k)) if k == vec![1]
        ));
    }

    #[test]
    fn constant_polynomial() {
        let f = FourierPolynomial::from_terms(2, [(vec![0, 0], Complex64::new(2.5, 0.0))]).unwrap();
        assert_eq!(f.integral(), 2.5);
        assert_eq!(fourier_poly_eval(&f, &[0.3, 0.9]).unwrap(), 2.5);
    }

    #[test]
    fn parse_file_format() {
        let text = "# cos(2 pi (x1 + 2 x2))\n1 2 0.5 0\n-1 -2 0.5 0\n\n0 0 1.0 0.0\n";
        let f = FourierPolynomial::parse(text.as_bytes()).unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.len(), 3);
        assert!(f.is_real());
        assert!((fourier_poly_eval(&f, &[0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_report_line() {
        let err = FourierPolynomial::parse("1 0.5 0\n1 2 0.5 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(FourierPolynomial::parse("1 x 0\n".as_bytes()).is_err());
        assert!(FourierPolynomial::parse("".as_bytes()).is_err());
    }
}
