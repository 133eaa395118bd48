//! Linear pencil eigenpairs: the polynomial eigenfunctions of
//! `(1+z^2) psi'' + 2(lambda+1) z psi' + lambda(lambda+1) psi = 0`,
//! i.e. harmonic polynomials rewritten in the blow-up variable `z = x/(-y)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Degrees up to this bound are built in exact rational arithmetic.
pub const EXACT_DEGREE_LIMIT: u32 = 64;

/// Default threshold on `|psi'|` at a zero for it to count as transversal.
pub const DEFAULT_TRANSVERSALITY_TOL: f64 = 1e-8;

/// Imaginary-part threshold for accepting companion eigenvalues as real zeros.
pub const NODAL_IMAG_TOL: f64 = 1e-9;

/// Eigenfunction family: `First` has `lambda = -degree`, `Second` has
/// `lambda = -degree - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    First,
    Second,
}

impl Family {
    pub fn eigenvalue(self, degree: u32) -> f64 {
        match self {
            Family::First => -(degree as f64),
            Family::Second => -(degree as f64) - 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilEigenpair {
    pub degree: u32,
    pub family: Family,
    pub lambda: f64,
    pub poly: Polynomial,
}

impl PencilEigenpair {
    pub fn residual(&self, z: f64) -> f64 {
        pencil_residual_with(&self.poly, self.lambda, z)
    }
}

/// The pair `(lambda_l^+, lambda_l^-) = (-l, -l-1)`, the roots of
/// `lambda^2 + (2l+1) lambda + l(l+1) = 0`.
pub fn pencil_eigenvalues(l: u32) -> Result<(f64, f64)> {
    if l == 0 {
        return Err(Error::InvalidArgument(
            "l must be >= 1; lambda = 0 is the non-vanishing constant mode".into(),
        ));
    }
    let l = l as f64;
    Ok((-l, -l - 1.0))
}

/// Exact monic coefficients (ascending powers) from the downward recursion
/// `a_k = -(k+2)(k+1) / [(k+lambda)(k+lambda+1)] a_{k+2}`, `a_degree = 1`.
pub fn exact_coefficients(degree: u32, family: Family) -> Result<Vec<BigRational>> {
    let lambda: i64 = match family {
        Family::First => -(degree as i64),
        Family::Second => -(degree as i64) - 1,
    };
    let d = degree as usize;
    let mut a = vec![BigRational::zero(); d + 1];
    a[d] = BigRational::from_integer(BigInt::from(1));
    let mut k = degree as i64 - 2;
    while k >= 0 {
        let den = (k + lambda) * (k + lambda + 1);
        if den == 0 {
            return Err(Error::RecursionDenominator {
                k,
                lambda: lambda as f64,
            });
        }
        let num = -(k + 2) * (k + 1);
        let ratio = BigRational::new(BigInt::from(num), BigInt::from(den));
        a[k as usize] = &a[k as usize + 2] * ratio;
        k -= 2;
    }
    Ok(a)
}

fn float_coefficients(degree: u32, family: Family) -> Result<Vec<f64>> {
    let lambda = family.eigenvalue(degree);
    let d = degree as usize;
    let mut a = vec![0.0; d + 1];
    a[d] = 1.0;
    let mut k = degree as i64 - 2;
    while k >= 0 {
        let kf = k as f64;
        let den = (kf + lambda) * (kf + lambda + 1.0);
        if den == 0.0 {
            return Err(Error::RecursionDenominator { k, lambda });
        }
        a[k as usize] = -(kf + 2.0) * (kf + 1.0) / den * a[k as usize + 2];
        k -= 2;
    }
    Ok(a)
}

/// Monic pencil eigenfunction of the given degree and family.
pub fn build_eigenfunction(degree: u32, family: Family) -> Result<PencilEigenpair> {
    let coeffs = if degree <= EXACT_DEGREE_LIMIT {
        exact_coefficients(degree, family)?
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    } else {
        float_coefficients(degree, family)?
    };
    Ok(PencilEigenpair {
        degree,
        family,
        lambda: family.eigenvalue(degree),
        poly: Polynomial::new(coeffs)?,
    })
}

/// `(1+z^2) psi'' + 2(lambda+1) z psi' + lambda(lambda+1) psi`.
pub fn pencil_residual(pair: &PencilEigenpair, z: f64) -> f64 {
    pair.residual(z)
}

/// Pencil operator applied to an arbitrary polynomial at an arbitrary lambda.
pub fn pencil_residual_with(poly: &Polynomial, lambda: f64, z: f64) -> f64 {
    let (p, dp, d2p) = poly.eval_derivs(z);
    (1.0 + z * z) * d2p + 2.0 * (lambda + 1.0) * z * dp + lambda * (lambda + 1.0) * p
}

/// Image of a pencil eigenvalue under `psi = (1+z^2)^gamma phi`, which turns
/// the pencil into `-(1+z^2)^2 phi'' = mu phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SturmLiouvilleImage {
    pub gamma: f64,
    pub mu: f64,
    /// Exponent of the symmetrising weight `rho_lambda = (1+z^2)^(lambda+1)`.
    pub weight_exponent: f64,
}

pub fn sturm_liouville_map(lambda: f64) -> SturmLiouvilleImage {
    SturmLiouvilleImage {
        gamma: -(lambda + 1.0) / 2.0,
        mu: (lambda + 1.0) * (lambda - 1.0),
        weight_exponent: lambda + 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodalZero {
    pub z: f64,
    /// `|p'(z)|` at the zero.
    pub slope: f64,
    pub transversal: bool,
}

/// Sorted real zeros of a polynomial or of a sampled eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct NodalSet {
    pub zeros: Vec<NodalZero>,
}

impl NodalSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.z).collect()
    }

    pub fn all_transversal(&self) -> bool {
        self.zeros.iter().all(|z| z.transversal)
    }
}

/// Real zeros of `poly` with transversality flags `|poly'(root)| > tol`.
pub fn nodal_set(poly: &Polynomial, tol: f64) -> Result<NodalSet> {
    let roots = poly.real_roots(NODAL_IMAG_TOL, 3)?;
    let zeros = roots
        .into_iter()
        .map(|z| {
            let (_, dp, _) = poly.eval_derivs(z);
            NodalZero {
                z,
                slope: dp.abs(),
                transversal: dp.abs() > tol,
            }
        })
        .collect();
    Ok(NodalSet { zeros })
}

/// `c psi*_{l,1} + d psi*_{l-1,2}`; both share the eigenvalue `-l`.
pub fn combine(c: f64, d: f64, l: u32) -> Result<Polynomial> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    if c == 0.0 && d == 0.0 {
        return Err(Error::InvalidArgument("trivial combination: c = d = 0".into()));
    }
    let first = build_eigenfunction(l, Family::First)?;
    let second = build_eigenfunction(l - 1, Family::Second)?;
    Polynomial::linear_combination(c, &first.poly, d, &second.poly)
}

/// One term `e^{-k tau} [c psi*_{k,1}(z) + d psi*_{k-1,2}(z)]` of the
/// rescaled solution expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub k: u32,
    pub c: f64,
    pub d: f64,
}

pub fn evaluate_expansion(terms: &[ExpansionTerm], z: f64, tau: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        if t.k == 0 {
            return Err(Error::InvalidArgument("expansion index k must be >= 1".into()));
        }
        let first = build_eigenfunction(t.k, Family::First)?;
        let second = build_eigenfunction(t.k - 1, Family::Second)?;
        let value = t.c * first.poly.eval(z) + t.d * second.poly.eval(z);
        total += (-(t.k as f64) * tau).exp() * value;
    }
    Ok(total)
}

/// Blow-up coordinates `z = x/(-y)`, `tau = -ln(-y)` for a point with `y < 0`.
pub fn blow_up_coordinates(x: f64, y: f64) -> Result<(f64, f64)> {
    if !(y < 0.0) {
        return Err(Error::Domain { y });
    }
    Ok((x / (-y), -(-y).ln()))
}
