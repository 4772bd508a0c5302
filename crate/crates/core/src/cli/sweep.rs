//! CSV sweeps over the amplitude angle and phase.

use std::fmt::Write;

use crate::error::Result;
use crate::par::Execution;
use crate::state::CoherentParams;
use crate::witness::{gap_functions, threshold_by_bisection, tolerance, SystemSize, WitnessFamily};

use super::config::{Preset, SweepConfig};

fn snake(family: WitnessFamily) -> &'static str {
    match family {
        WitnessFamily::BaselineGhz => "baseline_ghz",
        WitnessFamily::FullFidelityPhi => "full_phi",
        WitnessFamily::FullFidelityPhiTheta => "full_phi_theta",
        WitnessFamily::EfficientPhi => "efficient_phi",
        WitnessFamily::EfficientPhiTheta => "efficient_phi_theta",
    }
}

/// Column names for a sweep; part of the output contract.
pub fn sweep_header(cfg: &SweepConfig) -> Vec<String> {
    let mut cols: Vec<String> = match cfg.preset {
        Preset::Fig3 => ["theta", "phi", "p_eq13_or_19", "p_finite_N"]
            .map(String::from)
            .to_vec(),
        Preset::Fig45 => ["theta", "p_eq31", "p_eq33", "gap_g"]
            .map(String::from)
            .to_vec(),
        Preset::ToleranceMap => {
            let mut c = vec!["theta".to_string(), "phi".to_string()];
            for f in WitnessFamily::ALL {
                c.push(snake(f).to_string());
                c.push(format!("{}_finite_N", snake(f)));
            }
            c.push("gap_g".into());
            c.push("gap_l".into());
            c
        }
        Preset::Custom => ["theta", "phi", "family", "p_asymptotic", "p_finite_N"]
            .map(String::from)
            .to_vec(),
    };
    if cfg.bisect {
        match cfg.preset {
            Preset::Fig45 => {
                cols.push("p_bisect_phi_theta".into());
                cols.push("p_bisect_phi".into());
            }
            Preset::ToleranceMap => {}
            _ => cols.push("p_bisect".into()),
        }
    }
    cols
}

#[derive(Clone, Copy)]
enum Row {
    Grid {
        theta: f64,
        phi: f64,
    },
    Family {
        theta: f64,
        phi: f64,
        family: WitnessFamily,
    },
}

fn rows(cfg: &SweepConfig) -> Vec<Row> {
    let mut out = Vec::new();
    for &theta in &cfg.theta.values {
        for &phi in &cfg.phi.values {
            if cfg.preset == Preset::Custom {
                out.extend(
                    cfg.families
                        .iter()
                        .map(|&family| Row::Family { theta, phi, family }),
                );
            } else {
                out.push(Row::Grid { theta, phi });
            }
        }
    }
    out
}

fn bisect(family: WitnessFamily, n: usize, theta: f64, phi: f64) -> Result<f64> {
    threshold_by_bisection(family, n, CoherentParams::new(theta, phi)?)
}

fn render(cfg: &SweepConfig, row: &Row) -> Result<String> {
    let n = cfg.n;
    let fin = SystemSize::Finite(n);
    let asy = SystemSize::Asymptotic;
    let mut vals: Vec<String> = Vec::new();
    let mut num = |x: f64| vals.push(format!("{x}"));
    match (*row, cfg.preset) {
        (Row::Grid { theta, phi }, Preset::Fig3) => {
            num(theta);
            num(phi);
            num(tolerance(WitnessFamily::BaselineGhz, theta, phi, asy));
            num(tolerance(WitnessFamily::BaselineGhz, theta, phi, fin));
            if cfg.bisect {
                num(bisect(WitnessFamily::BaselineGhz, n, theta, phi)?);
            }
        }
        (Row::Grid { theta, phi }, Preset::Fig45) => {
            num(theta);
            num(tolerance(
                WitnessFamily::FullFidelityPhiTheta,
                theta,
                phi,
                asy,
            ));
            num(tolerance(WitnessFamily::FullFidelityPhi, theta, phi, asy));
            num(gap_functions(theta).0);
            if cfg.bisect {
                num(bisect(WitnessFamily::FullFidelityPhiTheta, n, theta, phi)?);
                num(bisect(WitnessFamily::FullFidelityPhi, n, theta, phi)?);
            }
        }
        (Row::Grid { theta, phi }, _) => {
            num(theta);
            num(phi);
            for f in WitnessFamily::ALL {
                num(tolerance(f, theta, phi, asy));
                num(tolerance(f, theta, phi, fin));
            }
            let (g, l) = gap_functions(theta);
            num(g);
            num(l);
        }
        (Row::Family { theta, phi, family }, _) => {
            num(theta);
            num(phi);
            vals.push(family.name().to_string());
            let mut num = |x: f64| vals.push(format!("{x}"));
            num(tolerance(family, theta, phi, asy));
            num(tolerance(family, theta, phi, fin));
            if cfg.bisect {
                num(bisect(family, n, theta, phi)?);
            }
        }
    }
    Ok(vals.join(","))
}

/// CSV text for the sweep. Rows are computed with `exec` and emitted in
/// grid order (theta outer, phi inner).
pub fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<String> {
    let rows = rows(cfg);
    let rendered: Vec<String> = exec
        .map(&rows, |r| render(cfg, r))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut out = String::new();
    writeln!(out, "{}", sweep_header(cfg).join(",")).expect("string write");
    for line in rendered {
        writeln!(out, "{line}").expect("string write");
    }
    Ok(out)
}
