//! Admissibility of straight crack slopes at a multiple crack tip: the
//! slopes must be zeros of one eigenfunction combination
//! `c psi*_{l,1} + d psi*_{l-1,2}`.

use serde::{Deserialize, Serialize};

use crate::continuation::{continue_branch, locate_fold, BranchFamily, StepControl, Termination};
use crate::eigenfunction::{shoot_cauchy, CauchySolution};
use crate::error::{Error, Result};
use crate::ode::IntegratorControl;
use crate::pencil::{build_eigenfunction, combine, nodal_set, Family, DEFAULT_TRANSVERSALITY_TOL};
use crate::poly::Polynomial;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrackSpec {
    alphas: Vec<f64>,
}

impl CrackSpec {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidArgument("crack spec needs at least one slope".into()));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("crack slopes must be finite".into()));
        }
        if alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "crack slopes must be strictly increasing".into(),
            ));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Default upper bound of the eigenvalue scan, `m + 10`.
    pub fn default_l_max(&self) -> u32 {
        self.alphas.len() as u32 + 10
    }
}

/// How the slopes must sit inside the zero list of a combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// The slopes are consecutive entries of the sorted zero list.
    #[default]
    Consecutive,
    /// The slopes are any distinct zeros.
    AnySubset,
    /// The slopes are all of the zeros.
    AllZeros,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Match {
    pub l: u32,
    /// Projective ratio `(c : d)`, unit length, first nonzero entry positive.
    pub ratio: (f64, f64),
    /// Positions of the slopes in the combination's sorted zero list.
    pub indices: Vec<usize>,
    pub max_residual: f64,
    pub zeros: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub matches: Vec<Match>,
    pub decay_exponent: Option<u32>,
    pub mode: MatchMode,
    pub n: f64,
    pub experimental: bool,
}

fn normalize_ratio(c: f64, d: f64) -> (f64, f64) {
    let r = c.hypot(d);
    let (c, d) = (c / r, d / r);
    let first = if c != 0.0 { c } else { d };
    if first < 0.0 {
        (-c, -d)
    } else {
        (c, d)
    }
}

/// Assigns each slope to the nearest zero and checks the mode's placement
/// rule. Returns the indices on success.
fn place(alphas: &[f64], zeros: &[f64], mode: MatchMode) -> Option<Vec<usize>> {
    if zeros.len() < alphas.len() {
        return None;
    }
    let idx: Vec<usize> = alphas
        .iter()
        .map(|a| {
            zeros
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - a).abs().total_cmp(&(y.1 - a).abs()))
                .map(|(i, _)| i)
                .expect("nonempty zeros")
        })
        .collect();
    let increasing = idx.windows(2).all(|w| w[1] > w[0]);
    let ok = match mode {
        MatchMode::AnySubset => increasing,
        MatchMode::Consecutive => idx.windows(2).all(|w| w[1] == w[0] + 1),
        MatchMode::AllZeros => idx.windows(2).all(|w| w[1] == w[0] + 1) && idx.len() == zeros.len(),
    };
    ok.then_some(idx)
}

fn report(matches: Vec<Match>, mode: MatchMode, n: f64, experimental: bool) -> AdmissibilityReport {
    let decay_exponent = matches.iter().map(|m| m.l).min();
    AdmissibilityReport {
        admissible: !matches.is_empty(),
        matches,
        decay_exponent,
        mode,
        n,
        experimental,
    }
}

/// Scans `l = m..=l_max` for a combination vanishing at every slope.
pub fn check_linear(spec: &CrackSpec, l_max: u32, tol: f64, mode: MatchMode) -> Result<AdmissibilityReport> {
    let m = spec.len() as u32;
    if l_max < m {
        return Err(Error::InvalidArgument(format!(
            "l_max = {l_max} is below the number of slopes {m}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let alphas = spec.alphas();
    let mut matches = Vec::new();
    for l in m.max(1)..=l_max {
        let p1 = build_eigenfunction(l, Family::First)?.poly;
        let p2 = build_eigenfunction(l - 1, Family::Second)?.poly;
        // c p1(a1) + d p2(a1) = 0; p1 and p2 never vanish together on the real line
        let (c, d) = normalize_ratio(p2.eval(alphas[0]), -p1.eval(alphas[0]));
        let comb = Polynomial::linear_combination(c, &p1, d, &p2)?;
        let max_residual = alphas
            .iter()
            .map(|&a| comb.eval(a).abs() / comb.magnitude_at(a))
            .fold(0.0, f64::max);
        if max_residual > tol {
            continue;
        }
        let zeros = nodal_set(&comb, DEFAULT_TRANSVERSALITY_TOL)?.positions();
        if let Some(indices) = place(alphas, &zeros, mode) {
            matches.push(Match {
                l,
                ratio: (c, d),
                indices,
                max_residual,
                zeros,
            });
        }
    }
    Ok(report(matches, mode, 0.0, false))
}

/// The nodal set of `c psi*_{l,1} + d psi*_{l-1,2}` as a crack spec.
pub fn roundtrip_generate(l: u32, c: f64, d: f64) -> Result<CrackSpec> {
    let comb = combine(c, d, l)?;
    let zeros = nodal_set(&comb, DEFAULT_TRANSVERSALITY_TOL)?.positions();
    if zeros.is_empty() {
        return Err(Error::NoRealZeros);
    }
    CrackSpec::new(zeros)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearControl {
    /// Initial-angle samples on `[0, pi]` before bisection.
    pub theta_samples: usize,
    pub z_max: f64,
    pub integrator: IntegratorControl,
}

impl Default for NonlinearControl {
    fn default() -> Self {
        Self {
            theta_samples: 64,
            z_max: 100.0,
            integrator: IntegratorControl::default(),
        }
    }
}

/// `(c : d)` coordinates of the Cauchy data `(Psi(0), Psi'(0))`, read
/// through the linear basis `psi*_{l,1}, psi*_{l-1,2}`.
fn ratio_from_data(l: u32, psi0: f64, dpsi0: f64) -> Result<(f64, f64)> {
    let p1 = build_eigenfunction(l, Family::First)?.poly;
    let p2 = build_eigenfunction(l - 1, Family::Second)?.poly;
    let (a, da, _) = p1.eval_derivs(0.0);
    let (b, db, _) = p2.eval_derivs(0.0);
    // [a b; da db] (c, d) = (psi0, dpsi0); the parities make it diagonal
    let det = a * db - b * da;
    Ok(normalize_ratio(
        (psi0 * db - b * dpsi0) / det,
        (a * dpsi0 - da * psi0) / det,
    ))
}

/// The nonlinear analogue of [`check_linear`]: at `Lambda = Lambda_l(n)` on
/// the branch seeded at `-l`, the one-parameter family of Cauchy data
/// `(cos t, sin t)` replaces the pencil combinations. The angle is fixed by
/// `Psi(alpha_1) = 0`; `tol` bounds the distance of every slope from its
/// matched zero. Eigenvalues are consulted from `l = m` upward while `n`
/// lies below the fold `n_l*`. Results are flagged experimental.
pub fn check_nonlinear(
    spec: &CrackSpec,
    n: f64,
    l_max: u32,
    tol: f64,
    mode: MatchMode,
    ctrl: &NonlinearControl,
) -> Result<AdmissibilityReport> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument("n must be finite and >= 0".into()));
    }
    if n == 0.0 {
        return check_linear(spec, l_max, tol, mode);
    }
    let m = spec.len() as u32;
    if l_max < m {
        return Err(Error::InvalidArgument(format!(
            "l_max = {l_max} is below the number of slopes {m}"
        )));
    }
    let alphas = spec.alphas();
    let mut matches = Vec::new();
    for l in m.max(1)..=l_max {
        if l >= 2 {
            let fold = locate_fold(l)?;
            if n >= fold.n_star {
                if l == m.max(1) {
                    return Err(Error::NoRealEigenvalue {
                        l,
                        n,
                        n_star: fold.n_star,
                    });
                }
                break;
            }
        }
        let branch = continue_branch(l, BranchFamily::Upper, n, &StepControl::default())?;
        if matches!(branch.termination, Termination::Fold { .. }) {
            break;
        }
        let lambda = branch.samples.last().expect("branch has samples").1;
        for theta in angle_roots(n, lambda, alphas[0], ctrl)? {
            let (p0, d0) = (theta.cos(), theta.sin());
            let sol = shoot_cauchy(
                n,
                lambda,
                p0,
                d0,
                ctrl.z_max
                    .max(1.5 * alphas[alphas.len() - 1].abs())
                    .max(1.5 * alphas[0].abs()),
                &ctrl.integrator,
            )?;
            let zeros = sol.zeros().positions();
            let Some(indices) = place(alphas, &zeros, mode) else {
                continue;
            };
            let max_residual = alphas
                .iter()
                .zip(&indices)
                .map(|(a, &i)| (a - zeros[i]).abs() / (1.0 + a.abs()))
                .fold(0.0, f64::max);
            if max_residual <= tol {
                matches.push(Match {
                    l,
                    ratio: ratio_from_data(l, p0, d0)?,
                    indices,
                    max_residual,
                    zeros,
                });
            }
        }
    }
    Ok(report(matches, mode, n, true))
}

/// Angles `t` in `[0, pi)` with `Psi_t(alpha) = 0`, where `Psi_t` has Cauchy
/// data `(cos t, sin t)`. By 1-homogeneity `Psi_{t+pi} = -Psi_t`.
fn angle_roots(n: f64, lambda: f64, alpha: f64, ctrl: &NonlinearControl) -> Result<Vec<f64>> {
    let value = |t: f64| -> Result<f64> {
        let (p0, d0) = (t.cos(), t.sin());
        if alpha == 0.0 {
            return Ok(p0);
        }
        let sol: CauchySolution = shoot_cauchy(n, lambda, p0, d0, alpha.abs(), &ctrl.integrator)?;
        Ok(sol.eval(alpha).0)
    };
    let k = ctrl.theta_samples.max(4);
    let pi = std::f64::consts::PI;
    let grid: Vec<f64> = (0..=k).map(|i| pi * i as f64 / k as f64).collect();
    let mut vals = Vec::with_capacity(k + 1);
    for &t in &grid[..k] {
        vals.push(value(t)?);
    }
    vals.push(-vals[0]);
    let mut roots = Vec::new();
    for i in 0..k {
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let (mut fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            let fm = value(mid)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    Ok(roots)
}
