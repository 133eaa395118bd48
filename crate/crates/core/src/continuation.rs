//! Natural-parameter continuation of the real eigenvalue branches
//! `Lambda_l(n)` and location of the saddle-node points where they merge.

use serde::Serialize;

use crate::characteristic::{build_quartic, REAL_ROOT_IMAG_TOL};
use crate::error::{Error, Result};
use crate::poly::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchFamily {
    /// Seeded at `lambda_l^+ = -l`.
    Upper,
    /// Seeded at `lambda_l^- = -l - 1`.
    Lower,
}

impl BranchFamily {
    pub fn seed(self, l: u32) -> f64 {
        match self {
            BranchFamily::Upper => -(l as f64),
            BranchFamily::Lower => -(l as f64) - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    pub initial: f64,
    pub shrink: f64,
    pub floor: f64,
    pub grow: f64,
    pub max_step: f64,
    pub max_newton: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 1e-3,
            shrink: 0.5,
            floor: 1e-9,
            grow: 1.5,
            max_step: 0.02,
            max_newton: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldKind {
    /// Two real roots merge and leave the real axis.
    Fold,
    /// Two real branches cross; real roots persist on both sides.
    Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub l: u32,
    pub n_star: f64,
    pub lambda_star: f64,
    pub residual_phi: f64,
    pub residual_dphi: f64,
    pub second_derivative: f64,
    pub kind: FoldKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    ReachedNMax,
    Fold { fold: FoldPoint },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub l: u32,
    pub family: BranchFamily,
    /// `(n, Lambda)` with `n` strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub termination: Termination,
}

/// A polynomial in `Lambda` whose coefficients are affine in `n`.
#[derive(Debug, Clone)]
struct AffinePencil {
    base: Vec<f64>,
    slope: Vec<f64>,
}

impl AffinePencil {
    fn quartic(l: u32) -> Self {
        let q0 = build_quartic(l, 0.0).coeffs();
        let q1 = build_quartic(l, 1.0).coeffs();
        // exact: coefficients are affine in n with small-integer data
        let slope = q0.iter().zip(&q1).map(|(a, b)| b - a).collect();
        Self {
            base: q0.to_vec(),
            slope,
        }
    }

    /// `Phi_1 / (Lambda + 1)`; both coefficient vectors vanish at `-1`.
    fn deflated_l1() -> Self {
        let q = Self::quartic(1);
        Self {
            base: deflate(&q.base, -1.0),
            slope: deflate(&q.slope, -1.0),
        }
    }

    fn coeffs(&self, n: f64) -> Vec<f64> {
        self.base.iter().zip(&self.slope).map(|(a, b)| a + n * b).collect()
    }

    /// `(P, P_Lambda, P_LambdaLambda, P_n, P_Lambda n)`.
    fn eval(&self, n: f64, x: f64) -> (f64, f64, f64, f64, f64) {
        let (p, dp, d2p) = derivs(&self.coeffs(n), x);
        let (pn, dpn, _) = derivs(&self.slope, x);
        (p, dp, d2p, pn, dpn)
    }

    fn scale(&self, n: f64, x: f64) -> f64 {
        self.coeffs(n).iter().rev().fold(0.0, |acc, c| acc * x.abs() + c.abs())
    }

    fn real_roots(&self, n: f64) -> Result<Vec<f64>> {
        Polynomial::new(self.coeffs(n))?.real_roots(REAL_ROOT_IMAG_TOL, 2)
    }
}

fn deflate(c: &[f64], root: f64) -> Vec<f64> {
    let d = c.len() - 1;
    let mut q = vec![0.0; d];
    let mut carry = c[d];
    for k in (0..d).rev() {
        q[k] = carry;
        carry = c[k] + carry * root;
    }
    q
}

fn derivs(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        d2p = d2p * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp, d2p)
}

/// Newton on `P(.; n) = 0` from `x0`. Returns the converged root or `None`.
fn correct(pencil: &AffinePencil, n: f64, x0: f64, max_iter: usize) -> Option<f64> {
    let mut x = x0;
    for _ in 0..max_iter {
        let (p, dp, ..) = pencil.eval(n, x);
        if dp == 0.0 || !dp.is_finite() {
            return None;
        }
        let dx = p / dp;
        x -= dx;
        if !x.is_finite() {
            return None;
        }
        if dx.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    let (p, ..) = pencil.eval(n, x);
    (p.abs() <= 1e-12 * pencil.scale(n, x)).then_some(x)
}

/// Two-dimensional Newton iteration for `F(u) = 0` with explicit Jacobian.
fn newton_2x2<F>(mut u: [f64; 2], max_iter: usize, system: F) -> std::result::Result<[f64; 2], String>
where
    F: Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
{
    for _ in 0..max_iter {
        let (f, j) = system(u);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(format!("singular Jacobian at (n, Lambda) = ({}, {})", u[0], u[1]));
        }
        let d0 = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let d1 = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        u = [u[0] - d0, u[1] - d1];
        if !u[0].is_finite() || !u[1].is_finite() {
            return Err("non-finite iterate".into());
        }
        if d0.abs() <= 4.0 * f64::EPSILON * u[0].abs().max(1e-300)
            && d1.abs() <= 4.0 * f64::EPSILON * (1.0 + u[1].abs())
        {
            return Ok(u);
        }
    }
    Ok(u)
}

/// Tracks one branch from its `n = 0` seed up to `n_max` or its fold.
pub fn continue_branch(l: u32, family: BranchFamily, n_max: f64, ctrl: &StepControl) -> Result<Branch> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    if !(n_max > 0.0) || !n_max.is_finite() {
        return Err(Error::InvalidArgument("n_max must be positive and finite".into()));
    }
    validate_control(ctrl)?;
    if l == 1 && family == BranchFamily::Upper {
        return Ok(Branch {
            l,
            family,
            samples: grid_samples(n_max, ctrl, |_| -1.0),
            termination: Termination::ReachedNMax,
        });
    }
    let pencil = if l == 1 {
        AffinePencil::deflated_l1()
    } else {
        AffinePencil::quartic(l)
    };
    track(l, family, &pencil, n_max, ctrl)
}

fn validate_control(c: &StepControl) -> Result<()> {
    let ok = c.initial > 0.0
        && c.floor > 0.0
        && c.floor <= c.initial
        && c.shrink > 0.0
        && c.shrink < 1.0
        && c.grow >= 1.0
        && c.max_step >= c.initial
        && c.max_newton > 0;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("inconsistent step control {c:?}")))
    }
}

fn grid_samples(n_max: f64, ctrl: &StepControl, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, f(0.0))];
    let mut n = 0.0;
    let mut h = ctrl.initial;
    while n < n_max {
        n = (n + h).min(n_max);
        out.push((n, f(n)));
        h = (h * ctrl.grow).min(ctrl.max_step);
    }
    out
}

fn track(l: u32, family: BranchFamily, pencil: &AffinePencil, n_max: f64, ctrl: &StepControl) -> Result<Branch> {
    let seed = family.seed(l);
    let orientation = pencil.eval(0.0, seed).1.signum();
    let mut samples = vec![(0.0, seed)];
    let (mut n, mut x) = (0.0, seed);
    let mut count = pencil.real_roots(0.0)?.len();
    let mut h = ctrl.initial;

    while n < n_max {
        let step = h.min(n_max - n);
        let n_next = if step == n_max - n { n_max } else { n + step };
        let (_, dp, _, pn, _) = pencil.eval(n, x);
        let slope = -pn / dp;
        let limit = 0.25 * (1.0 + x.abs());
        let predicted = x + (slope * step).clamp(-limit, limit);

        let accepted = correct(pencil, n_next, predicted, ctrl.max_newton)
            .or_else(|| correct(pencil, n_next, x, ctrl.max_newton))
            .filter(|&y| {
                let (_, dp, ..) = pencil.eval(n_next, y);
                dp.signum() == orientation && (y - x).abs() <= limit
            });

        let next_count = pencil.real_roots(n_next)?.len();
        if next_count < count {
            if let Ok(fold) = fold_on(l, pencil, n, n_next, x) {
                if (fold.lambda_star - x).abs() <= 0.5 {
                    samples.push((fold.n_star, fold.lambda_star));
                    return Ok(Branch {
                        l,
                        family,
                        samples,
                        termination: Termination::Fold { fold },
                    });
                }
            }
        }

        match accepted {
            Some(y) => {
                n = n_next;
                x = y;
                count = next_count;
                samples.push((n, x));
                h = (step * ctrl.grow).min(ctrl.max_step);
            }
            None => {
                h = step * ctrl.shrink;
                if h < ctrl.floor {
                    return Err(Error::NewtonDivergence {
                        l,
                        n: n_next,
                        last_n: n,
                        last_lambda: x,
                    });
                }
            }
        }
    }
    Ok(Branch {
        l,
        family,
        samples,
        termination: Termination::ReachedNMax,
    })
}

/// Locates the saddle-node point of `Phi_l` inside `bracket`, where the
/// number of real roots drops.
pub fn find_fold(l: u32, bracket: (f64, f64)) -> Result<FoldPoint> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    let pencil = AffinePencil::quartic(l);
    let (lo, hi) = bracket;
    if !(lo < hi) || lo < 0.0 {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    fold_on(l, &pencil, lo, hi, f64::NAN)
}

fn fold_on(l: u32, pencil: &AffinePencil, lo0: f64, hi0: f64, near: f64) -> Result<FoldPoint> {
    let c_lo = pencil.real_roots(lo0)?.len();
    let c_hi = pencil.real_roots(hi0)?.len();
    if c_hi >= c_lo {
        return Err(Error::NoFoldInBracket { l, lo: lo0, hi: hi0 });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if pencil.real_roots(mid)?.len() >= c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let roots = pencil.real_roots(lo)?;
    let lambda0 = closest_pair_midpoint(&roots, near).ok_or_else(|| Error::FoldNewton {
        l,
        detail: "no real root pair at the lower bracket end".into(),
    })?;
    let u = newton_2x2([lo, lambda0], 50, |[n, x]| {
        let (p, dp, d2p, pn, dpn) = pencil.eval(n, x);
        ([p, dp], [[pn, dp], [dpn, d2p]])
    })
    .map_err(|detail| Error::FoldNewton { l, detail })?;
    let (p, dp, d2p, ..) = pencil.eval(u[0], u[1]);
    if !(u[0] > 0.0) || d2p == 0.0 {
        return Err(Error::FoldNewton {
            l,
            detail: format!("converged to a degenerate point (n, Lambda) = ({}, {})", u[0], u[1]),
        });
    }
    Ok(FoldPoint {
        l,
        n_star: u[0],
        lambda_star: u[1],
        residual_phi: p.abs(),
        residual_dphi: dp.abs(),
        second_derivative: d2p,
        kind: FoldKind::Fold,
    })
}

/// Midpoint of the closest adjacent pair of sorted roots; when `near` is
/// finite, the adjacent pair closest to it.
fn closest_pair_midpoint(roots: &[f64], near: f64) -> Option<f64> {
    roots
        .windows(2)
        .map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0]))
        .min_by(|a, b| {
            let key = |m: &(f64, f64)| if near.is_finite() { (m.0 - near).abs() } else { m.1 };
            key(a).total_cmp(&key(b))
        })
        .map(|m| m.0)
}

/// Geometric scan in `n` (factor 1.3 from 1e-6 to 1) for the first drop in
/// the real-root count of `Phi_l`, then `find_fold` on that bracket.
pub fn locate_fold(l: u32) -> Result<FoldPoint> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    let pencil = AffinePencil::quartic(l);
    let mut prev_n = 1e-6;
    let mut prev = pencil.real_roots(prev_n)?.len();
    loop {
        let n = (prev_n * 1.3).min(1.0);
        let c = pencil.real_roots(n)?.len();
        if c < prev {
            return find_fold(l, (prev_n, n));
        }
        if n >= 1.0 {
            return Err(Error::NoFoldInBracket { l, lo: 1e-6, hi: 1.0 });
        }
        prev_n = n;
        prev = c;
    }
}

/// The double root of `Phi_1`, a crossing of the persistent branch
/// `Lambda = -1` with the lower branch. Solved as the 2x2 system
/// `C(Lambda; n) = 0, Lambda + 1 = 0` on the deflated cubic
/// `C = Phi_1 / (Lambda + 1)`, which keeps the Jacobian regular.
pub fn double_root_l1() -> Result<FoldPoint> {
    let cubic = AffinePencil::deflated_l1();
    let u = newton_2x2([0.4, -1.1], 50, |[n, x]| {
        let (c, dc, _, cn, _) = cubic.eval(n, x);
        ([c, x + 1.0], [[cn, dc], [0.0, 1.0]])
    })
    .map_err(|detail| Error::FoldNewton { l: 1, detail })?;
    let q = build_quartic(1, u[0]);
    Ok(FoldPoint {
        l: 1,
        n_star: u[0],
        lambda_star: u[1],
        residual_phi: q.eval(u[1]).abs(),
        residual_dphi: q.d_lambda(u[1]).abs(),
        second_derivative: q.d2_lambda(u[1]),
        kind: FoldKind::Crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::real_roots;

    #[test]
    fn deflated_cubic_times_linear_factor() {
        let c = AffinePencil::deflated_l1();
        for &n in &[0.0, 0.5, 1.7] {
            for &x in &[-3.0, -0.2, 0.9] {
                let lhs = (x + 1.0) * c.eval(n, x).0;
                let rhs = build_quartic(1, n).eval(x);
                assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn l1_upper_is_flat() {
        let b = continue_branch(1, BranchFamily::Upper, 2.0, &StepControl::default()).unwrap();
        assert!(b.samples.iter().all(|&(_, x)| x == -1.0));
        assert_eq!(b.samples.last().unwrap().0, 2.0);
        assert_eq!(b.termination, Termination::ReachedNMax);
    }

    #[test]
    fn l1_lower_persists_through_crossing() {
        let b = continue_branch(1, BranchFamily::Lower, 2.0, &StepControl::default()).unwrap();
        assert_eq!(b.termination, Termination::ReachedNMax);
        for &(n, x) in &b.samples {
            let q = build_quartic(1, n);
            assert!(q.eval(x).abs() <= 1e-10 * q.scale(x));
        }
        let (n_half, x_half) = *b
            .samples
            .iter()
            .min_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs()))
            .unwrap();
        assert!((x_half + 1.0).abs() < 10.0 * (n_half - 0.5).abs() + 1e-9);
    }

    #[test]
    fn l2_upper_decreases_toward_fold() {
        let b = continue_branch(2, BranchFamily::Upper, 0.119, &StepControl::default()).unwrap();
        assert_eq!(b.samples[0], (0.0, -2.0));
        assert!(b.samples.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1));
        assert!(b.samples.last().unwrap().1 < -2.4);
    }

    #[test]
    fn l2_terminates_at_fold() {
        for fam in [BranchFamily::Upper, BranchFamily::Lower] {
            let b = continue_branch(2, fam, 0.5, &StepControl::default()).unwrap();
            match b.termination {
                Termination::Fold { fold } => {
                    assert!((fold.n_star - 0.119124238252).abs() < 1e-9);
                    assert_eq!(b.samples.last().unwrap().0, fold.n_star);
                }
                other => panic!("expected fold, got {other:?}"),
            }
            assert!(b.samples.windows(2).all(|w| w[1].0 > w[0].0));
        }
    }

    #[test]
    fn fold_residuals_and_annihilation() {
        for l in 2..=10u32 {
            let f = locate_fold(l).unwrap();
            let q = build_quartic(l, f.n_star);
            let tol = 1e-11 * q.a0.abs().max(1.0);
            assert!(f.residual_phi <= tol && f.residual_dphi <= tol, "l={l}: {f:?}");
            assert!(f.second_derivative.abs() > 1e-6);
            let after = real_roots(&build_quartic(l, f.n_star * 1.01)).unwrap();
            assert!(after.iter().all(|r| (r - f.lambda_star).abs() > 0.5));
            let before = real_roots(&build_quartic(l, f.n_star * 0.99)).unwrap();
            assert_eq!(before.iter().filter(|r| (*r - f.lambda_star).abs() < 0.5).count(), 2);
        }
    }

    #[test]
    fn no_fold_for_l1_and_bad_brackets() {
        assert!(matches!(locate_fold(1), Err(Error::NoFoldInBracket { .. })));
        assert!(matches!(find_fold(2, (0.2, 0.3)), Err(Error::NoFoldInBracket { .. })));
        assert!(find_fold(2, (0.3, 0.2)).is_err());
    }

    #[test]
    fn double_root_is_at_half() {
        let f = double_root_l1().unwrap();
        assert!((f.n_star - 0.5).abs() < 1e-12 && (f.lambda_star + 1.0).abs() < 1e-12);
        assert_eq!(f.kind, FoldKind::Crossing);
        assert!(!real_roots(&build_quartic(1, 0.6)).unwrap().is_empty());
        assert!(!real_roots(&build_quartic(1, 0.4)).unwrap().is_empty());
    }

    #[test]
    fn divergence_reports_last_good_sample() {
        let ctrl = StepControl {
            max_newton: 1,
            ..StepControl::default()
        };
        match continue_branch(3, BranchFamily::Upper, 1.0, &ctrl) {
            Err(Error::NewtonDivergence {
                last_n, last_lambda, ..
            }) => {
                let q = build_quartic(3, last_n);
                assert!(q.eval(last_lambda).abs() <= 1e-10 * q.scale(last_lambda));
            }
            Ok(b) => assert!(matches!(b.termination, Termination::Fold { .. })),
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
