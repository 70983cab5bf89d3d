use std::time::Instant;

use anyhow::{anyhow, Result};
use serde::Serialize;
use serde_json::json;

use gpground::curve::{
    default_grid, find_bn, fit_monotone, fit_snaking, log_grid, sign_changes, sweep_curve, RootScan,
};
use gpground::models::exponents;
use gpground::series::{lambda_inf_via_pade, PadeConfig};
use gpground::shooting::{solve_lambda, solve_lambda_inf, solve_theta, trial_shot};
use gpground::Error;

use crate::output::{num, write_pair, Csv, Manifest};
use crate::{CurveArgs, LambdaArgs, LambdaInfArgs, Method, ProfileArgs, SnakeArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

/// `|λ(b) - λ∞|` below this is treated as unresolved.
pub const RESOLUTION: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(pub String);

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Dimension { .. } | Error::Parameter(_)) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

#[derive(Serialize)]
struct GroundStateSummary {
    d: u32,
    b: f64,
    lambda: f64,
    bracket_width: f64,
    shots: usize,
    tail_c: f64,
    tail_spread: f64,
    mass: f64,
    energy: f64,
    pohozaev_residual: f64,
    bound1_slack: f64,
    r_max: f64,
    samples: usize,
    anomalies: Vec<String>,
    invariant_violations: Vec<String>,
}

pub fn lambda(a: &LambdaArgs) -> Result<u8> {
    let cfg = a.num.config();
    let gs = solve_lambda(a.d, a.b, &cfg)?;
    let s = GroundStateSummary {
        d: gs.d,
        b: gs.b,
        lambda: gs.lambda,
        bracket_width: gs.eigen.bracket_width,
        shots: gs.eigen.shots,
        tail_c: gs.tail_c,
        tail_spread: gs.tail_spread,
        mass: gs.functionals.mass,
        energy: gs.functionals.energy,
        pohozaev_residual: gs.functionals.pohozaev_residual,
        bound1_slack: gs.functionals.bound1_slack,
        r_max: gs.profile.r_max(),
        samples: gs.profile.len(),
        anomalies: gs.anomalies.clone(),
        invariant_violations: gs.invariant_violations(),
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s)?);
    } else {
        println!("d                  {}", s.d);
        println!("b                  {}", num(s.b));
        println!("lambda             {:.15}", s.lambda);
        println!("bracket_width      {:e}", s.bracket_width);
        println!("tail_C             {:.12e}", s.tail_c);
        println!("mass               {:.12e}", s.mass);
        println!("energy             {:.12e}", s.energy);
        println!("pohozaev_residual  {:e}", s.pohozaev_residual);
        for an in &s.anomalies {
            println!("anomaly: {an}");
        }
        for v in &s.invariant_violations {
            println!("violation: {v}");
        }
    }
    Ok(if s.invariant_violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    })
}

pub fn lambda_inf(a: &LambdaInfArgs) -> Result<u8> {
    let cfg = a.num.config();
    let report = match a.method {
        Method::Shoot => {
            let sg = solve_lambda_inf(a.d, &cfg)?;
            json!({
                "d": a.d,
                "method": "shoot",
                "lambda_inf": sg.lambda_inf,
                "bracket_width": sg.eigen.bracket_width,
                "c_inf": sg.c_inf,
                "anomalies": sg.eigen.anomalies,
            })
        }
        Method::Pade => {
            let pe = lambda_inf_via_pade(a.d, &PadeConfig::default(), &cfg)?;
            json!({
                "d": a.d,
                "method": "pade",
                "lambda_inf": pe.lambda_inf,
                "bracket_width": pe.eigen.bracket_width,
                "r_match_min": pe.r_match_min,
                "order_min": [pe.order_min.0, pe.order_min.1],
                "anomalies": pe.eigen.anomalies,
            })
        }
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("d             {}", a.d);
        println!(
            "lambda_inf    {:.15}",
            report["lambda_inf"].as_f64().unwrap_or(f64::NAN)
        );
        println!(
            "bracket_width {:e}",
            report["bracket_width"].as_f64().unwrap_or(f64::NAN)
        );
        if let Some(c) = report["c_inf"].as_f64() {
            println!("C_inf         {c:.12e}");
        }
        if let Some(r) = report["r_match_min"].as_f64() {
            println!("r_match       {r}");
            println!(
                "order         [{}/{}]",
                report["order_min"][0], report["order_min"][1]
            );
        }
    }
    Ok(EXIT_OK)
}

pub fn curve(a: &CurveArgs) -> Result<u8> {
    let start = Instant::now();
    let cfg = a.num.config();
    if !(a.b_min > 0.0 && a.b_max > a.b_min) {
        return Err(Usage("need 0 < --b-min < --b-max".into()).into());
    }
    let grid = match a.points {
        Some(0) => return Err(Usage("--points must be positive".into()).into()),
        Some(1) => vec![a.b_min],
        Some(n) => {
            let (l0, l1) = (a.b_min.ln(), a.b_max.ln());
            (0..n)
                .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
        None => match exponents::<f64>(a.d) {
            Ok(pack) => default_grid(&pack, a.b_min, a.b_max)?,
            Err(_) => log_grid(a.b_min, a.b_max, 50)?,
        },
    };
    let sweep = sweep_curve(a.d, &grid, &cfg)?;
    let mut csv = Csv::new(&[
        "b",
        "lambda",
        "bracket_width",
        "tail_C",
        "mass",
        "energy",
        "pohozaev_residual",
    ]);
    let mut violations = 0;
    for p in &sweep.points {
        csv.push(vec![
            p.b,
            p.lambda,
            p.bracket_width,
            p.tail_c,
            p.mass,
            p.energy,
            p.pohozaev_residual,
        ]);
        violations += p.violations;
    }
    let mut manifest = Manifest::new("curve", serde_json::to_value(a)?, &cfg);
    manifest.anomalies = sweep
        .failures
        .iter()
        .map(|(b, e)| format!("b = {}: {e}", num(*b)))
        .collect();
    manifest.anomalies.extend(
        sweep
            .points
            .iter()
            .filter(|p| p.violations > 0)
            .map(|p| format!("b = {}: {} invariant violations", num(p.b), p.violations)),
    );
    match &a.out {
        Some(out) => {
            manifest.wall_ms = start.elapsed().as_millis() as u64;
            write_pair(out, &csv, &manifest)?;
            eprintln!(
                "{} points, {} failures -> {}",
                sweep.points.len(),
                sweep.failures.len(),
                out.display()
            );
        }
        None => print!("{}", csv.render()),
    }
    for an in &manifest.anomalies {
        eprintln!("anomaly: {an}");
    }
    Ok(if !sweep.failures.is_empty() {
        EXIT_SOLVER
    } else if violations > 0 {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    })
}

pub fn snake(a: &SnakeArgs) -> Result<u8> {
    let start = Instant::now();
    let cfg = a.num.config();
    let pack = exponents::<f64>(a.d)?;
    let li = solve_lambda_inf(a.d, &cfg)?.lambda_inf;
    let mut manifest = Manifest::new("snake", serde_json::to_value(a)?, &cfg);
    let mut csv = Csv::new(&["n", "b_n", "ratio"]);
    let mut code = EXIT_OK;
    println!("d           {}", a.d);
    println!("lambda_inf  {li:.15}");
    if let Some(period) = pack.root_ratio() {
        let b_max = a.b_max.unwrap_or(3e6);
        let b_min_fit = a.b_min_fit.unwrap_or(100.0);
        println!("regime      oscillatory (5 <= d <= 12): lambda(b) - lambda_inf changes sign infinitely often");
        println!("alpha       {:.12}", pack.alpha);
        println!("beta        {:.12}", pack.beta);
        println!("e^(pi/a)    {period:.6}");
        let rs = find_bn(a.d, li, &pack, &RootScan::new(1.0, b_max), &cfg)?;
        match fit_snaking(&rs.scan, li, &pack, b_min_fit, RESOLUTION) {
            Ok(fit) => {
                println!("A_inf       {:.8e}", fit.a_inf);
                println!("delta_inf   {:.8}", fit.delta_inf);
                println!(
                    "rms_rel     {:.3e} ({} points)",
                    fit.rms_rel_residual, fit.n_points
                );
            }
            Err(e) => {
                manifest.anomalies.push(format!("snaking fit: {e}"));
                code = EXIT_SOLVER;
            }
        }
        println!("{:>3} {:>22} {:>10}", "n", "b_n", "ratio");
        for (i, b) in rs.roots.iter().enumerate() {
            let ratio = if i == 0 {
                f64::NAN
            } else {
                b / rs.roots[i - 1]
            };
            println!("{:>3} {:>22.10} {:>10.6}", i + 1, b, ratio);
            csv.push(vec![(i + 1) as f64, *b, ratio]);
        }
        for (n, r) in &rs.flagged {
            manifest.anomalies.push(format!(
                "ratio b_{}/b_{} = {r} far from e^(pi/alpha): missed root?",
                n + 1,
                n
            ));
        }
        for (b, e) in &rs.failures {
            manifest.anomalies.push(format!("b = {}: {e}", num(*b)));
            code = EXIT_SOLVER;
        }
    } else {
        let b_max = a.b_max.unwrap_or(1e4);
        let b_min_fit = a.b_min_fit.unwrap_or(100.0);
        println!("regime      monotone (d >= 13): lambda(b) approaches lambda_inf from one side");
        println!("kappa_plus  {:.12}", pack.kappa_plus);
        println!("kappa_minus {:.12}", pack.kappa_minus);
        let grid = log_grid(1.0, b_max, 20)?;
        let sweep = sweep_curve(a.d, &grid, &cfg)?;
        println!(
            "sign changes {}",
            sign_changes(&sweep.points, li, RESOLUTION)
        );
        match fit_monotone(&sweep.points, li, &pack, b_min_fit, RESOLUTION) {
            Ok(fit) => {
                println!("exponent    {:.6} (free fit)", fit.fitted_exponent);
                println!("B_inf       {:.8e} (at kappa_plus)", fit.b_inf);
                println!(
                    "rms_rel     {:.3e} ({} points)",
                    fit.rms_rel_residual, fit.n_points
                );
            }
            Err(e) => {
                manifest.anomalies.push(format!("monotone fit: {e}"));
                code = EXIT_SOLVER;
            }
        }
        for (b, e) in &sweep.failures {
            manifest.anomalies.push(format!("b = {}: {e}", num(*b)));
            code = EXIT_SOLVER;
        }
    }
    for an in &manifest.anomalies {
        eprintln!("anomaly: {an}");
    }
    if let Some(out) = &a.out {
        manifest.wall_ms = start.elapsed().as_millis() as u64;
        write_pair(out, &csv, &manifest)?;
    }
    Ok(code)
}

pub fn profile(a: &ProfileArgs) -> Result<u8> {
    let start = Instant::now();
    let cfg = a.num.config();
    let mut manifest = Manifest::new("profile", serde_json::to_value(a)?, &cfg);
    let csv = if a.theta {
        let orbit = solve_theta(a.d, &cfg)?;
        let tr = &orbit.trajectory;
        table(
            &["t", "Theta", "Theta_t"],
            tr.t(),
            tr.value(),
            tr.derivative(),
        )
    } else if a.singular {
        let sg = solve_lambda_inf(a.d, &cfg)?;
        manifest
            .anomalies
            .extend(sg.eigen.anomalies.iter().cloned());
        println!("lambda_inf {:.15}", sg.lambda_inf);
        if a.emden {
            table(
                &["t", "Psi", "Psi_t"],
                sg.psi.t(),
                sg.psi.value(),
                sg.psi.derivative(),
            )
        } else {
            let fp = &sg.f_profile;
            table(&["r", "F", "Fp"], fp.t(), fp.value(), fp.derivative())
        }
    } else {
        let b = a.b.ok_or_else(|| anyhow!("--b is required"))?;
        let profile = match a.lambda {
            Some(lam) => {
                let shot = trial_shot(a.d, b, lam, &cfg)?;
                let loc = shot.class.location.map_or("-".to_string(), num);
                println!("shot {} at r = {loc}", shot.class.tag);
                manifest.anomalies.push(format!(
                    "single shot at lambda = {}: {}",
                    num(lam),
                    shot.class.tag
                ));
                shot.profile
            }
            None => {
                let gs = solve_lambda(a.d, b, &cfg)?;
                println!("lambda {:.15}", gs.lambda);
                manifest.anomalies.extend(gs.anomalies.iter().cloned());
                gs.profile
            }
        };
        let (r, f, fp) = (profile.r(), profile.f(), profile.fp());
        if a.emden {
            let mut csv = Csv::new(&["t", "psi", "psi_t", "Psi", "Psi_t"]);
            for i in 0..r.len() {
                let (ri, fi, fpi) = (r[i], f[i], fp[i]);
                csv.push(vec![
                    ri.ln(),
                    fi,
                    ri * fpi,
                    ri * fi,
                    ri * fi + ri * ri * fpi,
                ]);
            }
            csv
        } else {
            table(&["r", "f", "fp"], r, f, fp)
        }
    };
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    write_pair(&a.out, &csv, &manifest)?;
    Ok(EXIT_OK)
}

fn table(header: &'static [&'static str], x: &[f64], y: &[f64], z: &[f64]) -> Csv {
    let mut csv = Csv::new(header);
    for i in 0..x.len() {
        csv.push(vec![x[i], y[i], z[i]]);
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Usage("x".into()).into()), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::Dimension { d: 3, min: 4 }.into()),
            EXIT_USAGE
        );
        assert_eq!(exit_code(&Error::ThetaNotConverged.into()), EXIT_SOLVER);
        assert_eq!(exit_code(&anyhow!("io")), EXIT_SOLVER);
    }
}
