use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crack_pencil::characteristic::{build_quartic, limit_polynomial, real_roots};
use crack_pencil::continuation::{continue_branch, double_root_l1, locate_fold, BranchFamily, StepControl};
use crack_pencil::crack::{check_linear, check_nonlinear, roundtrip_generate, CrackSpec, MatchMode, NonlinearControl};
use crack_pencil::eigenfunction::{closed_form_lambda0_derivative, shoot, shoot_cauchy, shoot_scaled, ShootControl};
use crack_pencil::ode::IntegratorControl;
use crack_pencil::pencil::{build_eigenfunction, exact_coefficients, Family};
use crack_pencil::perturbation::{mu_via_ift, mu_via_quadrature, QuadratureControl};
use crack_pencil::Error;

/// Outcome of one criterion: pass flag and a one-line detail.
type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn criterion_1() -> Outcome {
    // (lambda, degree, family, ascending integer coefficients as printed)
    let table: &[(i64, u32, Family, &[i64])] = &[
        (0, 0, Family::First, &[1]),
        (-1, 1, Family::First, &[0, 1]),
        (-1, 0, Family::Second, &[1]),
        (-2, 2, Family::First, &[-1, 0, 1]),
        (-2, 1, Family::Second, &[0, 1]),
        (-3, 3, Family::First, &[0, -3, 0, 1]),
        (-3, 2, Family::Second, &[-1, 0, 3]),
        (-4, 4, Family::First, &[1, 0, -6, 0, 1]),
        (-4, 3, Family::Second, &[0, -1, 0, 1]),
    ];
    let mut bad = Vec::new();
    for &(lambda, degree, family, printed) in table {
        let lead = *printed.last().unwrap();
        let monic: Vec<BigRational> = printed.iter().map(|&c| rational(c, lead)).collect();
        let got = exact_coefficients(degree, family).unwrap();
        let pair = build_eigenfunction(degree, family).unwrap();
        if got != monic || pair.lambda != lambda as f64 {
            bad.push(format!("{family:?} degree {degree}"));
        }
    }
    (
        bad.is_empty(),
        format!("{} table entries, mismatches: {bad:?}", table.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for l in 1..=100u32 {
        let roots = real_roots(&build_quartic(l, 0.0)).unwrap();
        let want = [-(l as f64) - 1.0, -(l as f64)];
        if roots.len() != 2 {
            bad.push(l);
            continue;
        }
        for (r, w) in roots.iter().zip(want) {
            worst = worst.max((r - w).abs());
        }
    }
    (
        bad.is_empty() && worst <= 1e-9,
        format!("max |root - pencil eigenvalue| = {worst:.2e}, wrong root count at l = {bad:?}"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = 10.0 * i as f64 / 49.0;
        let q = build_quartic(1, n);
        worst = worst.max(q.eval(-1.0).abs() / q.a0.abs().max(1.0));
    }
    (
        worst <= 1e-12,
        format!("max |Phi_1(-1; n)| / max(1, |a0|) = {worst:.2e} on 50 points"),
    )
}

fn criterion_4() -> Outcome {
    let f = double_root_l1().unwrap();
    let ok = (f.n_star - 0.5).abs() <= 1e-10 && (f.lambda_star + 1.0).abs() <= 1e-10;
    (ok, format!("(n, Lambda) = ({:.15}, {:.15})", f.n_star, f.lambda_star))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let f2 = locate_fold(2).unwrap();
    let n_ok = f2.n_star > 0.11912 && f2.n_star < 0.11913;
    let lam_ok = (f2.lambda_star + 2.4782).abs() <= 2e-4;
    ok &= n_ok && lam_ok;
    lines.push(format!(
        "l=2 n*={:.8} [{}] Lambda*={:.6} [{}]",
        f2.n_star,
        if n_ok { "ok" } else { "off" },
        f2.lambda_star,
        if lam_ok { "ok" } else { "off" }
    ));
    let quoted: &[(u32, f64, f64)] = &[
        (3, 0.052292, -3.546),
        (4, 0.025354, -4.55514),
        (5, 0.014859, -5.546),
        (10, 0.0036245, -10.5254),
        (100, 0.00002555062, -100.5025),
    ];
    for &(l, n_q, lam_q) in quoted {
        let f = locate_fold(l).unwrap();
        let n_ok = ((f.n_star - n_q) / n_q).abs() <= 1e-4;
        let lam_ok = (f.lambda_star - lam_q).abs() <= 1e-3;
        ok &= n_ok && lam_ok;
        lines.push(format!(
            "l={l} n*={:.10e} vs {n_q:e} [{}] Lambda*={:.6} vs {lam_q} [{}]",
            f.n_star,
            if n_ok { "ok" } else { "off" },
            f.lambda_star,
            if lam_ok { "ok" } else { "off" }
        ));
    }
    (ok, lines.join("; "))
}

fn criterion_6() -> Outcome {
    let m = limit_polynomial(2).global_minimum().unwrap();
    (
        (6.84..=6.85).contains(&m.value),
        format!("min F_2 = {:.6} at Lambda = {:.6}", m.value, m.lambda),
    )
}

fn criterion_7() -> Outcome {
    let ctrl = StepControl {
        initial: 1e-7,
        ..StepControl::default()
    };
    let mut worst = 0.0f64;
    for l in 2..=6u32 {
        for (branch, family) in [
            (BranchFamily::Upper, Family::First),
            (BranchFamily::Lower, Family::Second),
        ] {
            let b = continue_branch(l, branch, 1e-6, &ctrl).unwrap();
            let (n0, x0) = b.samples[0];
            let (n1, x1) = b.samples[1];
            let slope = (x1 - x0) / (n1 - n0);
            let mu = mu_via_ift(l, family).unwrap();
            worst = worst.max(((slope - mu) / mu).abs());
        }
    }
    (
        worst <= 1e-5,
        format!("max relative slope mismatch {worst:.2e} over l=2..6, both families"),
    )
}

fn criterion_8() -> Outcome {
    let ctrl = QuadratureControl::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for l in [2u32, 3] {
        let q = mu_via_quadrature(l, Family::Second, &ctrl).unwrap();
        let ift = mu_via_ift(l, Family::Second).unwrap();
        let agree = q.mu.is_some_and(|m| ((m - ift) / ift).abs() <= 1e-3);
        ok &= agree;
        lines.push(format!("second l={l}: quadrature {:?} vs ift {ift:.6}", q.mu));
    }
    for l in [2u32, 3] {
        let q = mu_via_quadrature(l, Family::First, &ctrl).unwrap();
        let flagged = q.mu.is_none() && q.diagnostics.divergent_tail;
        ok &= flagged;
        lines.push(format!("first l={l}: divergent-tail {}", q.diagnostics.divergent_tail));
    }
    (ok, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let ctrl = ShootControl {
        z_max: 5.0,
        samples: 1001,
        integrator: IntegratorControl {
            rtol: 1e-12,
            atol: 1e-12,
            ..IntegratorControl::default()
        },
        ..ShootControl::default()
    };
    let mut worst = 0.0f64;
    for l in 1..=6u32 {
        for family in [Family::First, Family::Second] {
            let pair = build_eigenfunction(l, family).unwrap();
            let (p0, dp0, _) = pair.poly.eval_derivs(0.0);
            let c = if l % 2 == 0 { p0 } else { dp0 };
            let sol = shoot_scaled(l, 0.0, pair.lambda, c, &ctrl).unwrap();
            let err = sol
                .samples
                .iter()
                .map(|&(z, p, _)| (p - pair.poly.eval(z)).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    (
        worst <= 1e-6,
        format!("max |Psi - psi*| on [-5,5] = {worst:.2e}, l=1..6, both families"),
    )
}

fn criterion_10() -> Outcome {
    let d0 = closed_form_lambda0_derivative(1.0, 0.0);
    let sol = shoot_cauchy(1.0, 0.0, 0.0, d0, 10.0, &IntegratorControl::default()).unwrap();
    let worst = (0..=1000)
        .map(|i| {
            let z = i as f64 * 0.01;
            (sol.eval(z).1 - closed_form_lambda0_derivative(1.0, z)).abs()
        })
        .fold(0.0, f64::max);
    (
        worst <= 1e-8,
        format!("max |Psi' - closed form| on [0,10] = {worst:.2e}"),
    )
}

fn criterion_11() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    for l in 2..=4u32 {
        let n_star = locate_fold(l).unwrap().n_star;
        for f in [0.25, 0.5, 0.75] {
            let n = f * n_star;
            let b = continue_branch(l, BranchFamily::Upper, n, &StepControl::default()).unwrap();
            let lam = b.samples.last().unwrap().1;
            let sol = shoot(l, n, lam, &ShootControl::default()).unwrap();
            cases += 1;
            if sol.zeros.len() != l as usize || !sol.zeros.all_transversal() {
                bad.push(format!("l={l} n={f}n*: {} zeros", sol.zeros.len()));
            }
        }
    }
    (bad.is_empty(), format!("{cases} cases, failures: {bad:?}"))
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_214);
    let (mut cases, mut mismatches) = (0, 0);
    while cases < 200 {
        let l = rng.random_range(1..=8u32);
        let t = rng.random_range(0.0..std::f64::consts::PI);
        let r = rng.random_range(0.1..10.0);
        let (c, d) = (r * t.cos(), r * t.sin());
        let Ok(spec) = roundtrip_generate(l, c, d) else {
            continue;
        };
        cases += 1;
        let report = check_linear(&spec, 8, 1e-9, MatchMode::Consecutive).unwrap();
        let found = report.matches.iter().any(|m| {
            let (mc, md) = m.ratio;
            m.l == l
                && (mc * d - md * c).abs() <= 1e-7 * r
                && spec
                    .alphas()
                    .iter()
                    .zip(&m.indices)
                    .all(|(a, &i)| (a - m.zeros[i]).abs() <= 1e-8 * (1.0 + a.abs()))
        });
        if !found {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("{cases} cases, {mismatches} mismatches"))
}

fn criterion_13() -> Outcome {
    let spec = CrackSpec::new(vec![-1.0, 1.0]).unwrap();
    let linear = check_linear(&spec, spec.default_l_max(), 1e-8, MatchMode::Consecutive).unwrap();
    let at_two = linear.admissible && linear.decay_exponent == Some(2);
    let beyond = check_nonlinear(
        &spec,
        0.2,
        2,
        1e-8,
        MatchMode::Consecutive,
        &NonlinearControl::default(),
    );
    let nonexistence = matches!(beyond, Err(Error::NoRealEigenvalue { l: 2, .. }));
    (
        at_two && nonexistence,
        format!(
            "decay exponent {:?}; n=0.2: {}",
            linear.decay_exponent,
            match beyond {
                Err(e) => e.to_string(),
                Ok(_) => "no error".into(),
            }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("polynomial table", criterion_1),
        ("quartic factorization at n=0", criterion_2),
        ("persistent l=1 eigenvalue", criterion_3),
        ("l=1 double root", criterion_4),
        ("fold points", criterion_5),
        ("limit polynomial minimum", criterion_6),
        ("branch slope vs implicit function slope", criterion_7),
        ("quadrature slope cross-check", criterion_8),
        ("shooting at n=0 vs pencil polynomials", criterion_9),
        ("shooting at Lambda=0 vs closed form", criterion_10),
        ("transversality sweep", criterion_11),
        ("crack round-trip", criterion_12),
        ("crack symmetric pair", criterion_13),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
