//! Dense real polynomials in ascending coefficient order, with Horner
//! evaluation and a companion-matrix root finder polished by Newton steps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A real polynomial `sum_k coeffs[k] z^k` with a nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming trailing zero coefficients. The zero
    /// polynomial is rejected.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("polynomial coefficients must be finite".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Value, first and second derivative by a single Horner sweep.
    pub fn eval_derivs(&self, z: f64) -> (f64, f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut d2p = 0.0;
        for &c in self.coeffs.iter().rev() {
            d2p = d2p * z + 2.0 * dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, d2p)
    }

    /// Sum of the term magnitudes `sum_k |a_k| |z|^k`, the natural rounding
    /// scale for an evaluation at `z`.
    pub fn magnitude_at(&self, z: f64) -> f64 {
        let az = z.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * az + c.abs())
    }

    pub fn eval_complex(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Returns `None` for constants.
    pub fn derivative(&self) -> Option<Polynomial> {
        if self.degree() == 0 {
            return None;
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial::new(coeffs).ok()
    }

    pub fn scaled(&self, s: f64) -> Result<Polynomial> {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Polynomial {
        let lead = self.leading();
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c / lead).collect(),
        }
    }

    /// `a * self + b * other`; fails when the result is identically zero.
    pub fn linear_combination(a: f64, p: &Polynomial, b: f64, q: &Polynomial) -> Result<Polynomial> {
        let len = p.coeffs.len().max(q.coeffs.len());
        let coeffs = (0..len)
            .map(|k| a * p.coeffs.get(k).copied().unwrap_or(0.0) + b * q.coeffs.get(k).copied().unwrap_or(0.0))
            .collect();
        Polynomial::new(coeffs)
    }

    /// Synthetic division by `(z - root)`, discarding the remainder.
    pub fn deflate(&self, root: f64) -> Option<Polynomial> {
        if self.degree() == 0 {
            return None;
        }
        let d = self.degree();
        let mut q = vec![0.0; d];
        let mut carry = self.coeffs[d];
        for k in (0..d).rev() {
            q[k] = carry;
            carry = self.coeffs[k] + carry * root;
        }
        Polynomial::new(q).ok()
    }

    /// All complex roots: eigenvalues of the companion matrix of the monic
    /// rescaling, each refined by `polish_steps` complex Newton steps.
    pub fn roots(&self, polish_steps: usize) -> Result<Vec<Complex64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        if d == 1 {
            return Ok(vec![Complex64::new(-self.coeffs[0] / lead, 0.0)]);
        }
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let schur = companion
            .try_schur(f64::EPSILON, 10_000)
            .ok_or_else(|| Error::RootFinding {
                degree: d,
                detail: "Schur iteration on the companion matrix failed to converge".into(),
            })?;
        let mut roots: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
        for r in roots.iter_mut() {
            for _ in 0..polish_steps {
                let (p, dp) = self.eval_complex(*r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                let candidate = *r - step;
                // accept only improving steps; near multiple roots Newton can wander
                if self.eval_complex(candidate).0.norm() <= p.norm() {
                    *r = candidate;
                } else {
                    break;
                }
            }
        }
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::RootFinding {
                degree: d,
                detail: "non-finite eigenvalue".into(),
            });
        }
        Ok(roots)
    }

    /// Real roots in ascending order. A complex root is accepted as real when
    /// `|Im| <= imag_tol * (1 + |root|)`; its real part is then polished by
    /// real Newton iterations.
    pub fn real_roots(&self, imag_tol: f64, polish_steps: usize) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = self
            .roots(polish_steps)?
            .into_iter()
            .filter(|r| r.im.abs() <= imag_tol * (1.0 + r.norm()))
            .map(|r| self.polish_real(r.re, 8))
            .collect();
        out.sort_by(|a, b| a.total_cmp(b));
        Ok(out)
    }

    fn polish_real(&self, mut x: f64, iters: usize) -> f64 {
        for _ in 0..iters {
            let (p, dp, _) = self.eval_derivs(x);
            if dp == 0.0 || p == 0.0 {
                break;
            }
            let next = x - p / dp;
            if self.eval(next).abs() < p.abs() {
                x = next;
            } else {
                break;
            }
        }
        x
    }
}
