use anyhow::Result;

use gpground::curve::convergence_rate_check;
use gpground::series::{lambda_inf_via_pade, PadeConfig};
use gpground::shooting::{solve_lambda, solve_lambda_inf, verify_nondegeneracy, ModalCoefficient};
use gpground::Error;

use crate::commands::{EXIT_INVARIANT, EXIT_OK};
use crate::VerifyArgs;

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, r: Result<(bool, String), Error>) -> Check {
    let name = name.into();
    match r {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

pub fn run(a: &VerifyArgs) -> Result<u8> {
    let d = a.d;
    let cfg = a.num.config();
    let sg = solve_lambda_inf(d, &cfg)?;
    let li = sg.lambda_inf;
    let mut checks = vec![check(
        "lambda_inf",
        Ok((
            sg.eigen.anomalies.is_empty(),
            format!("{li:.12} (C_inf {:.6e})", sg.c_inf),
        )),
    )];
    checks.push(check(
        "pade agreement",
        lambda_inf_via_pade(d, &PadeConfig::default(), &cfg).map(|pe| {
            let diff = pe.lambda_inf - li;
            (diff.abs() < 1e-3, format!("difference {diff:.3e}"))
        }),
    ));
    let amplitudes: &[f64] = if a.quick {
        &[1.0, 10.0, 100.0]
    } else {
        &[0.1, 1.0, 10.0, 100.0, 1e3, 1e4]
    };
    for &b in amplitudes {
        checks.push(check(
            format!("ground state b = {b}"),
            solve_lambda(d, b, &cfg).map(|gs| {
                let v = gs.invariant_violations();
                let detail = if v.is_empty() {
                    format!(
                        "lambda {:.12}, Pohozaev {:.1e}, bound slack {:.3e}",
                        gs.lambda, gs.functionals.pohozaev_residual, gs.functionals.bound1_slack
                    )
                } else {
                    v.join("; ")
                };
                (v.is_empty(), detail)
            }),
        ));
    }
    let b = 0.03;
    checks.push(check(
        "small-amplitude law",
        solve_lambda(d, b, &cfg).map(|gs| {
            let ratio = (f64::from(d) - gs.lambda) / (b * b) / 2f64.powf(-f64::from(d) / 2.0);
            (
                (ratio - 1.0).abs() < 0.01,
                format!("(d - lambda)/b^2 / 2^(-d/2) = {ratio:.5} at b = {b}"),
            )
        }),
    ));
    if !a.quick {
        checks.push(check(
            "nondegeneracy",
            verify_nondegeneracy(&sg, &cfg).map(|nd| {
                let a3 = match nd.a3 {
                    ModalCoefficient::NotApplicable => String::new(),
                    ModalCoefficient::Indeterminate { spread } => {
                        format!(", a3 indeterminate (spread {spread:.1e})")
                    }
                    ModalCoefficient::Value { value, err } => {
                        format!(", a3 {value:.6e} +- {err:.1e}")
                    }
                };
                (
                    nd.clearly_nonzero(10.0),
                    format!("a1 {:.6e} +- {:.1e}{a3}", nd.a1, nd.a1_err),
                )
            }),
        ));
        checks.push(check(
            "convergence rate",
            convergence_rate_check(d, li, &[1e2, 1e3, 1e4], &cfg).map(|cr| {
                (
                    (cr.slope + 2.0).abs() <= 0.2,
                    format!("slope {:.4}", cr.slope),
                )
            }),
        ));
    }
    let mut failed = 0;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        failed += usize::from(!c.pass);
    }
    println!(
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    Ok(if failed == 0 { EXIT_OK } else { EXIT_INVARIANT })
}
