//! The quartic characteristic polynomial `Phi_l(Lambda; n)` of the
//! quasilinear eigenvalue problem, and its `n -> infinity` limit `F_l`.

use serde::Serialize;

use crate::error::Result;
use crate::poly::Polynomial;

/// Imaginary-part threshold for accepting a quartic root as real.
pub const REAL_ROOT_IMAG_TOL: f64 = 1e-8;
/// Newton polish steps applied to companion eigenvalues.
pub const POLISH_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicQuartic {
    pub l: u32,
    pub n: f64,
    pub a4: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

fn horner(c: &[f64; 5], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

impl CharacteristicQuartic {
    /// Ascending coefficients `[a0, a1, a2, a3, a4]`.
    pub fn coeffs(&self) -> [f64; 5] {
        [self.a0, self.a1, self.a2, self.a3, self.a4]
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        horner(&self.coeffs(), lambda)
    }

    pub fn d_lambda(&self, lambda: f64) -> f64 {
        let x = lambda;
        ((4.0 * self.a4 * x + 3.0 * self.a3) * x + 2.0 * self.a2) * x + self.a1
    }

    pub fn d2_lambda(&self, lambda: f64) -> f64 {
        let x = lambda;
        (12.0 * self.a4 * x + 6.0 * self.a3) * x + 2.0 * self.a2
    }

    /// `dPhi/dn`; the coefficients are affine in `n`, so this does not depend on `n`.
    pub fn d_n(&self, lambda: f64) -> f64 {
        horner(&n_slope_coeffs(self.l), lambda)
    }

    pub fn d_lambda_d_n(&self, lambda: f64) -> f64 {
        let c = n_slope_coeffs(self.l);
        let x = lambda;
        ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]
    }

    /// `sum_k |a_k| |Lambda|^k`, the rounding scale of an evaluation.
    pub fn scale(&self, lambda: f64) -> f64 {
        let c = self.coeffs().map(f64::abs);
        horner(&c, lambda.abs())
    }

    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(self.coeffs().to_vec()).expect("a4 = 1 + n is nonzero")
    }
}

/// Derivatives of the coefficients with respect to `n`, ascending.
fn n_slope_coeffs(l: u32) -> [f64; 5] {
    let l = l as f64;
    [
        l.powi(3) * (4.0 * l - 2.0),
        l * l * (6.0 * l + 3.0),
        l * (6.0 * l + 5.0),
        4.0 * l + 1.0,
        1.0,
    ]
}

pub fn build_quartic(l: u32, n: f64) -> CharacteristicQuartic {
    let lf = l as f64;
    CharacteristicQuartic {
        l,
        n,
        a4: 1.0 + n,
        a3: (1.0 + n) * (4.0 * lf + 1.0),
        a2: lf * (5.0 * n + 3.0 + lf * (6.0 * n + 7.0)),
        a1: lf * lf * (3.0 * n + 4.0 + 6.0 * lf * (1.0 + n)),
        a0: lf.powi(3) * (2.0 * (1.0 - n) + 2.0 * lf * (2.0 * n + 1.0)),
    }
}

/// The rational characteristic equation before clearing its denominator
/// `l^2 + (Lambda+l)^2`.
pub fn rational_characteristic(l: u32, n: f64, lambda: f64) -> f64 {
    let lf = l as f64;
    let s = lambda + lf;
    let den = lf * lf + s * s;
    let quad = lambda * lambda + (2.0 * lf + 1.0) * lambda + lf * (lf + 1.0);
    quad * (1.0 + n * s * s / den)
        + n * (lf.powi(3) * (lf - 1.0) + 2.0 * lf * s * (lambda * lf + lf * (lf - 1.0))) / den
}

/// `|R(Lambda) (l^2 + (Lambda+l)^2) - Phi_l(Lambda; n)|` where `R` is the
/// rational form. The two agree exactly for `l = 1` or `n = 0`; otherwise
/// they differ by `2 n l (l-1) Lambda (Lambda + l)`.
pub fn residual_consistency(l: u32, n: f64, lambda: f64) -> f64 {
    let lf = l as f64;
    let s = lambda + lf;
    let den = lf * lf + s * s;
    (rational_characteristic(l, n, lambda) * den - build_quartic(l, n).eval(lambda)).abs()
}

/// Sorted real roots. For real `Lambda` the cleared denominator is at least
/// `l^2 > 0`, so clearing introduces no spurious real roots.
pub fn real_roots(q: &CharacteristicQuartic) -> Result<Vec<f64>> {
    q.polynomial().real_roots(REAL_ROOT_IMAG_TOL, POLISH_STEPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitQuartic {
    pub l: u32,
    /// Ascending coefficients of `F_l`.
    pub coeffs: [f64; 5],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitMinimum {
    pub lambda: f64,
    pub value: f64,
}

impl LimitQuartic {
    pub fn eval(&self, lambda: f64) -> f64 {
        horner(&self.coeffs, lambda)
    }

    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(self.coeffs.to_vec()).expect("F_l is monic")
    }

    /// Global minimum over the reals, taken among the critical points.
    pub fn global_minimum(&self) -> Result<LimitMinimum> {
        let p = self.polynomial();
        let dp = p.derivative().expect("quartic has a derivative");
        let crit = dp.real_roots(1e-10, 4)?;
        let best = crit
            .into_iter()
            .map(|x| LimitMinimum {
                lambda: x,
                value: p.eval(x),
            })
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("an odd-degree derivative has a real root");
        Ok(best)
    }
}

/// Expanded coefficients of
/// `[L^2+(2l+1)L+l(l+1)](L+l)^2 + l^3(l-1) + 2l(L+l)(L l + l(l-1))`.
pub fn limit_polynomial(l: u32) -> LimitQuartic {
    let l = l as f64;
    LimitQuartic {
        l: l as u32,
        coeffs: [
            4.0 * l.powi(4) - 2.0 * l.powi(3),
            8.0 * l.powi(3) + l * l,
            8.0 * l * l + 3.0 * l,
            4.0 * l + 1.0,
            1.0,
        ],
    }
}

/// The `n = 0` factor `Lambda^2 + (2l+1) Lambda + l(l+1)`.
pub fn linear_quadratic(l: u32, lambda: f64) -> f64 {
    let l = l as f64;
    lambda * lambda + (2.0 * l + 1.0) * lambda + l * (l + 1.0)
}
