//! First-order branching `Lambda_l = lambda_l + n mu_l + o(n)`,
//! `Psi_l = psi_l + n phi_l + o(n)` at `n = 0`.

use serde::Serialize;

use crate::characteristic::build_quartic;
use crate::error::{Error, Result};
use crate::pencil::{build_eigenfunction, Family, PencilEigenpair};
use crate::quadrature;

/// `(Lambda Psi + z Psi')^2 / D`, `D = Psi'^2 + (Lambda Psi + z Psi')^2`.
pub fn phi1(psi: f64, dpsi: f64, lambda: f64, z: f64) -> Result<f64> {
    let s = lambda * psi + z * dpsi;
    let d = dpsi * dpsi + s * s;
    if !(d > 0.0) {
        return Err(Error::GradientDegeneracy { z, denominator: d });
    }
    Ok(s * s / d)
}

/// `[Psi'^2 Psi'' + 2 Psi' S (Lambda Psi' + z Psi'')] / D`.
pub fn phi2(psi: f64, dpsi: f64, d2psi: f64, lambda: f64, z: f64) -> Result<f64> {
    let s = lambda * psi + z * dpsi;
    let d = dpsi * dpsi + s * s;
    if !(d > 0.0) {
        return Err(Error::GradientDegeneracy { z, denominator: d });
    }
    Ok((dpsi * dpsi * d2psi + 2.0 * dpsi * s * (lambda * dpsi + z * d2psi)) / d)
}

/// The seed of a branch: the eigenvalue `-l` (first family, `psi_{l,1}`)
/// or `-l-1` (second family, `psi_{l,2}`). Both eigenfunctions have degree `l`.
pub fn seed_pair(l: u32, family: Family) -> Result<PencilEigenpair> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    build_eigenfunction(l, family)
}

/// Source of the correction equation `B*_lambda phi = h`:
/// `h = -[Phi_2 + mu((2 lambda+1) psi + 2 z psi') - Phi_1 psi'']`.
pub fn source_h(mu: f64, pair: &PencilEigenpair, z: f64) -> Result<f64> {
    let (h0, h1) = source_parts(pair, z)?;
    Ok(h0 + mu * h1)
}

/// `h = h0 + mu h1`.
fn source_parts(pair: &PencilEigenpair, z: f64) -> Result<(f64, f64)> {
    let lambda = pair.lambda;
    let (p, dp, d2p) = pair.poly.eval_derivs(z);
    let f1 = phi1(p, dp, lambda, z)?;
    let f2 = phi2(p, dp, d2p, lambda, z)?;
    Ok((-(f2 - f1 * d2p), -((2.0 * lambda + 1.0) * p + 2.0 * z * dp)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    pub lambda: f64,
    pub exponent: f64,
}

impl Weight {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            exponent: lambda + 1.0,
        }
    }

    /// `rho_lambda(z) = (1+z^2)^(lambda+1)`.
    pub fn eval(&self, z: f64) -> f64 {
        (1.0 + z * z).powf(self.exponent)
    }
}

/// `mu = -Phi_n / Phi_Lambda` at `(lambda_l, 0)`.
pub fn mu_via_ift(l: u32, family: Family) -> Result<f64> {
    let lambda = seed_pair(l, family)?.lambda;
    let q = build_quartic(l, 0.0);
    let dl = q.d_lambda(lambda);
    if dl.abs() <= 1e-12 * q.scale(lambda) {
        return Err(Error::DegenerateSeed { lambda, derivative: dl });
    }
    Ok(-q.d_n(lambda) / dl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureControl {
    pub z_initial: f64,
    pub z_limit: f64,
    /// Stop when successive truncations change `mu` by less than this.
    pub tail_tol: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self {
            z_initial: 200.0,
            z_limit: 1e8,
            tail_tol: 1e-6,
            abs_tol: 1e-13,
            rel_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSample {
    pub z: f64,
    /// `int rho h0 psi / (1+z^2)` over `[-z, z]`.
    pub a: f64,
    /// `int rho h1 psi / (1+z^2)` over `[-z, z]`.
    pub b: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDiagnostics {
    /// Truncation sequence `Z, 2Z, 4Z, ...`.
    pub samples: Vec<TailSample>,
    pub converged: bool,
    pub divergent_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureMu {
    /// `mu` at the last truncation, or `None` when the tail is divergent.
    pub mu: Option<f64>,
    pub diagnostics: TailDiagnostics,
}

fn half_line_integral<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, ctrl: &QuadratureControl) -> f64 {
    // geometric panels keep the polynomial-times-power integrand well resolved
    let mut total = 0.0;
    let mut a = lo;
    while a < hi {
        let b = if a < 1.0 { 1.0f64.min(hi) } else { (2.0 * a).min(hi) };
        total += quadrature::integrate(f, a, b, ctrl.abs_tol, ctrl.rel_tol, 400).value;
        a = b;
    }
    total
}

/// Solves the orthogonality condition `int rho h(mu) psi / (1+z^2) = 0` on
/// `[-Z, Z]`, doubling `Z` until `mu` settles or the tails are found not
/// to decay.
pub fn mu_via_quadrature(l: u32, family: Family, ctrl: &QuadratureControl) -> Result<QuadratureMu> {
    let pair = seed_pair(l, family)?;
    let w = Weight::new(pair.lambda);
    let integrand = |z: f64, part: usize| -> f64 {
        let (h0, h1) = source_parts(&pair, z).unwrap_or((f64::NAN, f64::NAN));
        let h = if part == 0 { h0 } else { h1 };
        2.0 * w.eval(z) * h * pair.poly.eval(z) / (1.0 + z * z)
    };
    let fa = |z: f64| integrand(z, 0);
    let fb = |z: f64| integrand(z, 1);

    let mut samples: Vec<TailSample> = Vec::new();
    let (mut a, mut b) = (0.0, 0.0);
    let mut z_prev = 0.0;
    let mut z = ctrl.z_initial;
    let (mut converged, mut divergent) = (false, false);
    while z <= ctrl.z_limit {
        a += half_line_integral(&fa, z_prev, z, ctrl);
        b += half_line_integral(&fb, z_prev, z, ctrl);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::GradientDegeneracy {
                z,
                denominator: f64::NAN,
            });
        }
        if b == 0.0 {
            return Err(Error::OrthogonalityDegenerate { value: b });
        }
        samples.push(TailSample { z, a, b, mu: -a / b });
        let k = samples.len();
        if k >= 3 {
            let inc = |s: &[TailSample], i: usize| (s[i].a - s[i - 1].a, s[i].b - s[i - 1].b);
            let (da1, db1) = inc(&samples, k - 2);
            let (da2, db2) = inc(&samples, k - 1);
            if db2.abs() >= 0.9 * db1.abs() && db1 != 0.0 || da2.abs() >= 0.9 * da1.abs() && da1 != 0.0 {
                divergent = true;
                break;
            }
        }
        if k >= 3 && (samples[k - 1].mu - samples[k - 2].mu).abs() < ctrl.tail_tol {
            converged = true;
            break;
        }
        z_prev = z;
        z *= 2.0;
    }
    let mu = (!divergent).then(|| samples.last().map(|s| s.mu)).flatten();
    Ok(QuadratureMu {
        mu,
        diagnostics: TailDiagnostics {
            samples,
            converged,
            divergent_tail: divergent,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionGrid {
    pub z_max: f64,
    /// Odd, so that `z = 0` is a node.
    pub points: usize,
}

impl Default for CorrectionGrid {
    fn default() -> Self {
        Self {
            z_max: 50.0,
            points: 4001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correction {
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
    /// Max-norm of the discrete residual of `B* phi = h` on interior nodes.
    pub residual: f64,
    /// Trapezoid value of `int rho phi psi / (1+z^2)`.
    pub orthogonality: f64,
}

/// Solves `(1+z^2) phi'' + 2(lambda+1) z phi' + lambda(lambda+1) phi = h` by
/// second-order central differences. The grid is symmetric and `phi`
/// inherits the parity of `psi`, so the scheme marches outward from `z = 0`
/// with a ghost node fixed by parity. The remaining kernel direction
/// (`psi`) is removed by the normalization `int rho phi psi / (1+z^2) = 0`.
pub fn solve_correction(l: u32, family: Family, mu: f64, grid: &CorrectionGrid) -> Result<Correction> {
    if grid.points < 5 || grid.points.is_multiple_of(2) || !(grid.z_max > 0.0) {
        return Err(Error::InvalidArgument(
            "grid needs an odd number (>= 5) of points and z_max > 0".into(),
        ));
    }
    let pair = seed_pair(l, family)?;
    let lam = pair.lambda;
    let m = (grid.points - 1) / 2;
    let dz = grid.z_max / m as f64;
    let zs: Vec<f64> = (0..=m).map(|i| i as f64 * dz).collect();
    let h: Vec<f64> = zs.iter().map(|&z| source_h(mu, &pair, z)).collect::<Result<_>>()?;
    let even = l.is_multiple_of(2);

    let march = |seed: f64, rhs: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut phi = vec![0.0; m + 1];
        let c0 = lam * (lam + 1.0);
        if even {
            phi[0] = seed;
            phi[1] = phi[0] + 0.5 * dz * dz * (rhs(0) - c0 * phi[0]);
        } else {
            phi[0] = 0.0;
            phi[1] = seed * dz;
        }
        for i in 1..m {
            let z = zs[i];
            let a = (1.0 + z * z) / (dz * dz);
            let b = (lam + 1.0) * z / dz;
            phi[i + 1] = (rhs(i) - c0 * phi[i] + 2.0 * a * phi[i] - (a - b) * phi[i - 1]) / (a + b);
        }
        phi
    };
    let particular = march(0.0, &|i| h[i]);
    let homogeneous = march(1.0, &|_| 0.0);

    let w = Weight::new(lam);
    let weights: Vec<f64> = zs
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            // trapezoid on [-z_max, z_max], folded onto the half grid
            let t = if i == 0 || i == m { 1.0 } else { 2.0 };
            t * dz * w.eval(z) * pair.poly.eval(z) / (1.0 + z * z)
        })
        .collect();
    let dot = |v: &[f64]| v.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
    let kernel = dot(&homogeneous);
    if kernel == 0.0 || !kernel.is_finite() {
        return Err(Error::SingularSystem(format!(
            "normalization functional vanishes on the kernel ({kernel})"
        )));
    }
    let c = -dot(&particular) / kernel;
    let half: Vec<f64> = particular.iter().zip(&homogeneous).map(|(p, q)| p + c * q).collect();

    let mut residual = 0.0f64;
    for i in 1..m {
        let z = zs[i];
        let d2 = (half[i + 1] - 2.0 * half[i] + half[i - 1]) / (dz * dz);
        let d1 = (half[i + 1] - half[i - 1]) / (2.0 * dz);
        let r = (1.0 + z * z) * d2 + 2.0 * (lam + 1.0) * z * d1 + lam * (lam + 1.0) * half[i] - h[i];
        residual = residual.max(r.abs() / (1.0 + h[i].abs()));
    }
    let orthogonality = dot(&half);

    let sign = if even { 1.0 } else { -1.0 };
    let mut z = Vec::with_capacity(grid.points);
    let mut phi = Vec::with_capacity(grid.points);
    for i in (1..=m).rev() {
        z.push(-zs[i]);
        phi.push(sign * half[i]);
    }
    for i in 0..=m {
        z.push(zs[i]);
        phi.push(half[i]);
    }
    Ok(Correction {
        z,
        phi,
        residual,
        orthogonality,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMethod {
    ImplicitFunction,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingData {
    pub l: u32,
    pub family: Family,
    pub lambda: f64,
    pub mu: f64,
    pub mu_method: MuMethod,
    pub correction: Option<Correction>,
}

pub fn branching_data(l: u32, family: Family, grid: Option<&CorrectionGrid>) -> Result<BranchingData> {
    let pair = seed_pair(l, family)?;
    let mu = mu_via_ift(l, family)?;
    let correction = grid.map(|g| solve_correction(l, family, mu, g)).transpose()?;
    Ok(BranchingData {
        l,
        family,
        lambda: pair.lambda,
        mu,
        mu_method: MuMethod::ImplicitFunction,
        correction,
    })
}
