//! Dormand–Prince 5(4) with Hairer's continuous extension.

use serde::Serialize;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_min: 1e-14,
            max_steps: 500_000,
        }
    }
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub z0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn z1(&self) -> f64 {
        self.z0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.rcont[0]
    }

    pub fn end(&self) -> [f64; N] {
        self.eval(self.z1())
    }

    pub fn eval(&self, z: f64) -> [f64; N] {
        let t = (z - self.z0) / self.h;
        let t1 = 1.0 - t;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + t * (r[1][i] + t1 * (r[2][i] + t * (r[3][i] + t1 * r[4][i]))))
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
    pub rejected: usize,
    pub evaluations: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn z_start(&self) -> f64 {
        self.steps.first().map(|s| s.z0).unwrap_or(0.0)
    }

    pub fn z_end(&self) -> f64 {
        self.steps.last().map(|s| s.z1()).unwrap_or(0.0)
    }

    pub fn final_state(&self) -> Option<[f64; N]> {
        self.steps.last().map(|s| s.end())
    }

    /// Interpolated state; `z` is clamped to the integrated interval.
    pub fn eval(&self, z: f64) -> Option<[f64; N]> {
        if self.steps.is_empty() {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.z1() < z).min(self.steps.len() - 1);
        let step = &self.steps[idx];
        Some(step.eval(z.clamp(step.z0, step.z1())))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(k, a)| a * k[i]).sum::<f64>())
}

/// Integrates `y' = f(z, y)` forward from `z0` to `z_end > z0`.
///
/// The error norm is weighted by `atol * s0 + rtol * |y|`, where `s0` is the
/// max-norm of the initial data, so that trajectories of 1-homogeneous
/// systems scale exactly with their initial data.
pub fn integrate<const N: usize, F>(
    mut f: F,
    z0: f64,
    y0: [f64; N],
    z_end: f64,
    ctrl: &IntegratorControl,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(z_end > z0) {
        return Err(Error::InvalidArgument(format!("need z_end > z0, got [{z0}, {z_end}]")));
    }
    if !(ctrl.rtol > 0.0 && ctrl.atol >= 0.0 && ctrl.h_min > 0.0) {
        return Err(Error::InvalidArgument("integrator tolerances must be positive".into()));
    }
    let s0 = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s0 = if s0 > 0.0 { s0 } else { 1.0 };
    let weight = |a: &[f64; N], b: &[f64; N], i: usize| ctrl.atol * s0 + ctrl.rtol * a[i].abs().max(b[i].abs());

    let mut z = z0;
    let mut y = y0;
    let mut k1 = f(z, &y)?;
    let mut evaluations = 1;
    let mut h = initial_step(&y, &k1, s0, z_end - z0, ctrl);
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut err_old = 1e-4f64;

    while z < z_end {
        if steps.len() + rejected >= ctrl.max_steps {
            return Err(Error::TooManySteps {
                max_steps: ctrl.max_steps,
                z_end,
            });
        }
        let last = z + h >= z_end;
        if last {
            h = z_end - z;
        }
        let k2 = f(z + C2 * h, &axpy(&y, h, &[(&k1, A21)]))?;
        let k3 = f(z + C3 * h, &axpy(&y, h, &[(&k1, A31), (&k2, A32)]))?;
        let k4 = f(z + C4 * h, &axpy(&y, h, &[(&k1, A41), (&k2, A42), (&k3, A43)]))?;
        let k5 = f(
            z + C5 * h,
            &axpy(&y, h, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]),
        )?;
        let k6 = f(
            z + h,
            &axpy(&y, h, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]),
        )?;
        let y_new = axpy(&y, h, &[(&k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)]);
        let z_new = if last { z_end } else { z + h };
        let k7 = f(z_new, &y_new)?;
        evaluations += 6;

        let err = {
            let e = axpy(
                &[0.0; N],
                h,
                &[(&k1, E1), (&k3, E3), (&k4, E4), (&k5, E5), (&k6, E6), (&k7, E7)],
            );
            let s: f64 = (0..N).map(|i| (e[i] / weight(&y, &y_new, i)).powi(2)).sum();
            (s / N as f64).sqrt()
        };
        if !err.is_finite() {
            h *= 0.2;
            rejected += 1;
            if h < ctrl.h_min {
                return Err(Error::StepSizeUnderflow { z, h });
            }
            continue;
        }

        // PI controller (Hairer's beta = 0.04)
        let fac = (err.powf(0.2 - 0.04 * 0.75) / err_old.powf(0.04) / 0.9).clamp(0.1, 5.0);
        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            steps.push(DenseStep { z0: z, h, rcont });
            err_old = err.max(1e-4);
            z = z_new;
            y = y_new;
            k1 = k7;
            h /= fac;
        } else {
            rejected += 1;
            h /= (err.powf(0.2) / 0.9).min(10.0);
        }
        if h < ctrl.h_min && z < z_end {
            return Err(Error::StepSizeUnderflow { z, h });
        }
    }
    Ok(Trajectory {
        steps,
        rejected,
        evaluations,
    })
}

fn initial_step<const N: usize>(y: &[f64; N], f0: &[f64; N], s0: f64, span: f64, ctrl: &IntegratorControl) -> f64 {
    let sk = |i: usize| ctrl.atol * s0 + ctrl.rtol * y[i].abs();
    let d0: f64 = (0..N).map(|i| (y[i] / sk(i)).powi(2)).sum::<f64>().sqrt();
    let d1: f64 = (0..N).map(|i| (f0[i] / sk(i)).powi(2)).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(ctrl.h_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let t = integrate(
            |_, y: &[f64; 1]| Ok([y[0]]),
            0.0,
            [1.0],
            5.0,
            &IntegratorControl::default(),
        )
        .unwrap();
        let got = t.final_state().unwrap()[0];
        assert!((got - 5f64.exp()).abs() < 1e-8 * 5f64.exp());
        assert_eq!(t.z_end(), 5.0);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let t = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            10.0,
            &IntegratorControl::default(),
        )
        .unwrap();
        for i in 0..=1000 {
            let z = i as f64 * 0.01;
            let y = t.eval(z).unwrap();
            assert!((y[0] - z.sin()).abs() < 1e-8, "z={z}");
            assert!((y[1] - z.cos()).abs() < 1e-8, "z={z}");
        }
    }

    #[test]
    fn dense_output_is_continuous_across_steps() {
        let t = integrate(
            |z, y: &[f64; 1]| Ok([z * y[0].cos()]),
            0.0,
            [0.3],
            4.0,
            &IntegratorControl::default(),
        )
        .unwrap();
        for w in t.steps.windows(2) {
            let a = w[0].end()[0];
            let b = w[1].start()[0];
            assert!((a - b).abs() < 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn errors_propagate_from_rhs() {
        let r = integrate(
            |z, y: &[f64; 1]| {
                if z > 1.0 {
                    Err(Error::QuasilinearDegeneracy { z, coefficient: 0.0 })
                } else {
                    Ok([y[0]])
                }
            },
            0.0,
            [1.0],
            2.0,
            &IntegratorControl::default(),
        );
        assert!(matches!(r, Err(Error::QuasilinearDegeneracy { .. })));
    }

    #[test]
    fn rejects_bad_interval_and_caps_steps() {
        let ctrl = IntegratorControl::default();
        assert!(integrate(|_, y: &[f64; 1]| Ok([y[0]]), 1.0, [1.0], 1.0, &ctrl).is_err());
        let tight = IntegratorControl { max_steps: 3, ..ctrl };
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 50.0, &tight);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }
}
