//! Shooting for the quasilinear eigenfunction equation
//!
//! `Psi'' = -{[L(L+1) Psi + 2(L+1) z Psi'](1 + n S^2/D) + 2 n L Psi'^2 S/D}
//!          / {(1+z^2) + n (z S + Psi')^2/D}`,
//!
//! with `S = L Psi + z Psi'` and `D = Psi'^2 + S^2`. The equation is
//! invariant under `z -> -z`, which is used to mirror solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorControl, Trajectory};
use crate::pencil::{NodalSet, NodalZero};

/// Relative size of `D` below which an accepted step is logged as a near
/// gradient degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// A zero is transversal when `|Psi'| >= TRANSVERSALITY_TOL * local scale`.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;

/// Smallest admissible `|coefficient of Psi''|` relative to `1 + z^2`.
const COEFFICIENT_TOL: f64 = 1e-12;

/// `Psi''` solved from the equation, which is affine in `Psi''`.
pub fn isolate_second_derivative(z: f64, psi: f64, dpsi: f64, lambda: f64, n: f64) -> Result<f64> {
    let lin = lambda * (lambda + 1.0) * psi + 2.0 * (lambda + 1.0) * z * dpsi;
    let base = 1.0 + z * z;
    if n == 0.0 {
        return Ok(-lin / base);
    }
    let s = lambda * psi + z * dpsi;
    let d = dpsi * dpsi + s * s;
    if !(d > 0.0) {
        return Err(Error::GradientDegeneracy { z, denominator: d });
    }
    let num = lin * (1.0 + n * s * s / d) + 2.0 * n * lambda * dpsi * dpsi * s / d;
    let w = z * s + dpsi;
    let coefficient = base + n * w * w / d;
    if !(coefficient.abs() > COEFFICIENT_TOL * base) {
        return Err(Error::QuasilinearDegeneracy { z, coefficient });
    }
    Ok(-num / coefficient)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootControl {
    pub z_max: f64,
    pub integrator: IntegratorControl,
    /// Uniform output samples on `[-z_max, z_max]`.
    pub samples: usize,
    /// Points of the least-squares growth fit on `[z_max/10, z_max]`.
    pub fit_points: usize,
}

impl Default for ShootControl {
    fn default() -> Self {
        Self {
            z_max: 100.0,
            integrator: IntegratorControl::default(),
            samples: 2001,
            fit_points: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingSolution {
    pub l: u32,
    pub n: f64,
    pub lambda: f64,
    pub initial: (f64, f64),
    /// `(z, Psi, Psi')` on a uniform grid over `[-z_max, z_max]`.
    pub samples: Vec<(f64, f64, f64)>,
    pub zeros: NodalSet,
    /// Least-squares slope of `ln|Psi|` against `ln z` on `[z_max/10, z_max]`.
    pub growth_exponent: f64,
    /// `Psi(z_max) / z_max^growth_exponent`.
    pub amplitude: f64,
    pub degeneracy_events: Vec<f64>,
}

/// Solution of the Cauchy problem at `z = 0` on both half-lines.
#[derive(Debug, Clone)]
pub struct CauchySolution {
    pub n: f64,
    pub lambda: f64,
    pub initial: (f64, f64),
    forward: Trajectory<2>,
    /// Forward solution from the reflected data; `Psi(-z) = back(z).0`.
    backward: Trajectory<2>,
    pub degeneracy_events: Vec<f64>,
}

impl CauchySolution {
    pub fn z_max(&self) -> f64 {
        self.forward.z_end()
    }

    /// `(Psi, Psi')` at any `z` in `[-z_max, z_max]`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        if z >= 0.0 {
            let y = self.forward.eval(z).expect("nonempty trajectory");
            (y[0], y[1])
        } else {
            let y = self.backward.eval(-z).expect("nonempty trajectory");
            (y[0], -y[1])
        }
    }

    /// Sign-change zeros on `[-z_max, z_max]`, refined by bisection on the
    /// dense output.
    pub fn zeros(&self) -> NodalSet {
        let mut zs = Vec::new();
        let mut push = |z: f64, d: f64, scale: f64| {
            zs.push(NodalZero {
                z,
                slope: d.abs(),
                transversal: d.abs() >= TRANSVERSALITY_TOL * scale,
            });
        };
        let (p0, d0) = self.initial;
        if p0 == 0.0 {
            push(0.0, d0, d0.abs());
        }
        for (traj, sign) in [(&self.forward, 1.0), (&self.backward, -1.0)] {
            for step in &traj.steps {
                const SUB: usize = 8;
                for j in 0..SUB {
                    let a = step.z0 + step.h * j as f64 / SUB as f64;
                    let b = if j + 1 == SUB {
                        step.z1()
                    } else {
                        step.z0 + step.h * (j + 1) as f64 / SUB as f64
                    };
                    let (ya, yb) = (step.eval(a), step.eval(b));
                    if ya[0] == 0.0 || (yb[0] != 0.0 && ya[0].signum() == yb[0].signum()) {
                        continue;
                    }
                    let (mut lo, mut hi) = (a, b);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if step.eval(mid)[0].signum() == ya[0].signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let z = 0.5 * (lo + hi);
                    let y = step.eval(z);
                    let scale = ya[0].abs().max(yb[0].abs()).max(ya[1].abs()).max(yb[1].abs());
                    push(sign * z, y[1], scale);
                }
            }
        }
        zs.sort_by(|a, b| a.z.total_cmp(&b.z));
        zs.dedup_by(|a, b| (a.z - b.z).abs() <= 1e-12 * (1.0 + a.z.abs()));
        NodalSet { zeros: zs }
    }

    /// Least-squares slope of `ln|Psi|` against `ln z` on `[z_max/10, z_max]`.
    pub fn growth_fit(&self, points: usize) -> (f64, f64) {
        let z_max = self.z_max();
        let z_min = z_max / 10.0;
        let pts: Vec<(f64, f64)> = (0..points.max(2))
            .map(|i| z_min + (z_max - z_min) * i as f64 / (points.max(2) - 1) as f64)
            .filter_map(|z| {
                let p = self.eval(z).0.abs();
                (p > 0.0).then(|| (z.ln(), p.ln()))
            })
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
            (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
        });
        let slope = sxy / sxx;
        let amplitude = self.eval(z_max).0 / z_max.powf(slope);
        (slope, amplitude)
    }
}

/// Integrates the Cauchy problem `Psi(0) = psi0, Psi'(0) = dpsi0` on
/// `[0, z_max]` and, through the reflection symmetry, on `[-z_max, 0]`.
pub fn shoot_cauchy(
    n: f64,
    lambda: f64,
    psi0: f64,
    dpsi0: f64,
    z_max: f64,
    ctrl: &IntegratorControl,
) -> Result<CauchySolution> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument("n must be finite and >= 0".into()));
    }
    if psi0 == 0.0 && dpsi0 == 0.0 {
        return Err(Error::InvalidArgument("trivial initial data".into()));
    }
    if !(z_max > 0.0) || !z_max.is_finite() {
        return Err(Error::InvalidArgument("z_max must be positive".into()));
    }
    let rhs = |z: f64, y: &[f64; 2]| Ok([y[1], isolate_second_derivative(z, y[0], y[1], lambda, n)?]);
    let forward = integrate(rhs, 0.0, [psi0, dpsi0], z_max, ctrl)?;
    let backward = if dpsi0 == 0.0 {
        forward.clone()
    } else {
        integrate(rhs, 0.0, [psi0, -dpsi0], z_max, ctrl)?
    };
    let mut degeneracy_events = Vec::new();
    for (traj, sign) in [(&forward, 1.0), (&backward, -1.0)] {
        for step in &traj.steps {
            let z = step.z1();
            let [p, d] = step.end();
            let s = lambda * p + z * d;
            let rel = (d * d + s * s) / ((1.0 + z * z) * d * d + p * p).max(f64::MIN_POSITIVE);
            if n > 0.0 && rel < DEGENERACY_TOL {
                degeneracy_events.push(sign * z);
            }
        }
    }
    degeneracy_events.sort_by(f64::total_cmp);
    degeneracy_events.dedup();
    Ok(CauchySolution {
        n,
        lambda,
        initial: (psi0, dpsi0),
        forward,
        backward,
        degeneracy_events,
    })
}

/// Parity-normalised initial data: `(1, 0)` for even `l`, `(0, 1)` for odd.
pub fn parity_initial_data(l: u32) -> (f64, f64) {
    if l.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Shoots the eigenfunction of parity `l` at the given `Lambda`.
pub fn shoot(l: u32, n: f64, lambda: f64, ctrl: &ShootControl) -> Result<ShootingSolution> {
    let (p0, d0) = parity_initial_data(l);
    shoot_scaled(l, n, lambda, 1.0, ctrl).map(|mut s| {
        s.initial = (p0, d0);
        s
    })
}

/// As [`shoot`], with the parity initial data multiplied by `c`.
pub fn shoot_scaled(l: u32, n: f64, lambda: f64, c: f64, ctrl: &ShootControl) -> Result<ShootingSolution> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    if c == 0.0 {
        return Err(Error::InvalidArgument("amplitude must be nonzero".into()));
    }
    let (p0, d0) = parity_initial_data(l);
    let sol = shoot_cauchy(n, lambda, c * p0, c * d0, ctrl.z_max, &ctrl.integrator)?;
    Ok(summarize(l, &sol, ctrl))
}

pub fn summarize(l: u32, sol: &CauchySolution, ctrl: &ShootControl) -> ShootingSolution {
    let z_max = sol.z_max();
    let count = ctrl.samples.max(2);
    let samples = (0..count)
        .map(|i| {
            let z = if i + 1 == count {
                z_max
            } else {
                -z_max + 2.0 * z_max * i as f64 / (count - 1) as f64
            };
            let (p, d) = sol.eval(z);
            (z, p, d)
        })
        .collect();
    let (growth_exponent, amplitude) = sol.growth_fit(ctrl.fit_points);
    ShootingSolution {
        l,
        n: sol.n,
        lambda: sol.lambda,
        initial: sol.initial,
        samples,
        zeros: sol.zeros(),
        growth_exponent,
        amplitude,
        degeneracy_events: sol.degeneracy_events.clone(),
    }
}

/// `Psi'(z) = (1+z^2)^{-1} exp{-[n/(1+n)]/(1+z^2)}`, the once-integrated
/// solution at `Lambda = 0`.
pub fn closed_form_lambda0_derivative(n: f64, z: f64) -> f64 {
    let q = 1.0 + z * z;
    (-(n / (1.0 + n)) / q).exp() / q
}

/// The bounded non-polynomial solution of `(1+z^2) psi'' + 2 z psi' = 0`.
/// Its limits `+-pi/2` give a discontinuous trace `sign(x)` at the tip, so it
/// is not an admissible eigenfunction.
pub fn arctan_example(z: f64) -> f64 {
    z.atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArctanCheck {
    pub z: f64,
    pub residual: f64,
    pub admissible: bool,
}

pub fn arctan_check(z: f64) -> ArctanCheck {
    let q = 1.0 + z * z;
    let d1 = 1.0 / q;
    let d2 = -2.0 * z / (q * q);
    ArctanCheck {
        z,
        residual: q * d2 + 2.0 * z * d1,
        admissible: false,
    }
}
