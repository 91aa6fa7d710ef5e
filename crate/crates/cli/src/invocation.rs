//! A fully resolved command: everything needed to reproduce an output, and
//! the code that runs it.

use std::path::PathBuf;

use anyhow::{Context, Result};
use d2k::counting::{d2k_fast_parallel, d2k_naive};
use d2k::model::{LetterDistribution, MatchParams, Sequence};
use d2k::moments::MomentReport;
use d2k::numeric::format_g17;
use d2k::perturbed::DistanceDistribution;
use d2k::simulation::{ks_grid, simulate, GridSpec, KsGrid, SimConfig, KS_GRID_CSV_HEADER};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Naive,
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    Count {
        seq_a: PathBuf,
        seq_b: PathBuf,
        m: usize,
        k: usize,
        algo: Algo,
    },
    Dist {
        eta: f64,
        m: usize,
        gc: Option<usize>,
    },
    Mean {
        dist: LetterDistribution,
        params: MatchParams,
    },
    VarBounds {
        dist: LetterDistribution,
        params: MatchParams,
    },
    Regime {
        dist: LetterDistribution,
        params: MatchParams,
    },
    Simulate {
        config: SimConfig,
        emit_samples: bool,
    },
    KsGrid {
        specs: Vec<GridSpec>,
    },
}

/// What a command produced, before formatting.
pub enum Output {
    Count { params: MatchParams, d2k: u64 },
    Dist { rows: Vec<DistanceDistribution> },
    Report(Box<MomentReport>),
    Simulate(Box<d2k::simulation::SimOutcome>),
    Grids(Vec<KsGrid>),
}

/// Error in the inputs rather than in the computation (exit code 2).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn read_sequence(path: &PathBuf) -> Result<Sequence> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    Sequence::parse_text(&text).map_err(|e| InputError(format!("{}: {e}", path.display())).into())
}

impl Invocation {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { config, .. } => Some(config.seed),
            Invocation::KsGrid { specs } => specs.first().map(|s| s.seed),
            _ => None,
        }
    }

    pub fn run(&self) -> Result<Output> {
        match self {
            Invocation::Count { seq_a, seq_b, m, k, algo } => {
                let a = read_sequence(seq_a)?;
                let b = read_sequence(seq_b)?;
                if a.len() != b.len() {
                    return Err(InputError(format!(
                        "sequences differ in length ({} vs {})",
                        a.len(),
                        b.len()
                    ))
                    .into());
                }
                let params = MatchParams::new(a.len(), *m, *k).map_err(|e| InputError(e.to_string()))?;
                let d2k = match algo {
                    Algo::Naive => d2k_naive(&a, &b, &params)?,
                    Algo::Fast => d2k_fast_parallel(&a, &b, &params)?,
                };
                Ok(Output::Count { params, d2k })
            }
            Invocation::Dist { eta, m, gc } => {
                let counts: Vec<usize> = match gc {
                    Some(c) => vec![*c],
                    None => (0..=*m).collect(),
                };
                let rows = counts
                    .into_iter()
                    .map(|c| DistanceDistribution::new(*m, *eta, c))
                    .collect::<d2k::Result<_>>()?;
                Ok(Output::Dist { rows })
            }
            Invocation::Mean { dist, params }
            | Invocation::VarBounds { dist, params }
            | Invocation::Regime { dist, params } => {
                Ok(Output::Report(Box::new(MomentReport::compute(dist, params)?)))
            }
            Invocation::Simulate { config, emit_samples } => {
                let mut outcome = simulate(config)?;
                if !emit_samples {
                    outcome.samples.clear();
                }
                Ok(Output::Simulate(Box::new(outcome)))
            }
            Invocation::KsGrid { specs } => {
                let grids = specs
                    .iter()
                    .map(|s| ks_grid(s).with_context(|| format!("grid for k = {}", s.k)))
                    .collect::<Result<_>>()?;
                Ok(Output::Grids(grids))
            }
        }
    }
}

fn report_json(command: &Invocation, r: &MomentReport) -> Value {
    let flags = json!({
        "theorem_normal": r.regime.theorem_normal,
        "empirically_normal": r.regime.empirically_normal,
        "poisson_regime_k0": r.regime.poisson_regime_k0,
    });
    let mut out = json!({
        "params": r.params,
        "eta": r.eta,
        "p2": r.p2,
        "p3": r.p3,
        "alpha": r.regime.alpha,
        "log_base": r.regime.log_base,
        "flags": flags,
    });
    let obj = out.as_object_mut().expect("object literal");
    let mut put = |key: &str, v: Value| {
        obj.insert(key.to_string(), v);
    };
    match command {
        Invocation::Mean { .. } => {
            put("ey_exact", json!(r.ey_exact));
            put("ey_lower", json!(r.ey_lower));
            put("ey_upper", json!(r.ey_upper));
            put("mean_exact", json!(r.mean_exact));
            put("mean_lower", json!(r.mean_lower));
            put("mean_upper", json!(r.mean_upper));
        }
        Invocation::VarBounds { .. } => {
            put("mean_exact", json!(r.mean_exact));
            put("var_lower_dominant", json!(r.var_lower_dominant));
            put("var_lower_valid", json!(r.var_lower_valid));
            put("var_lower_k0_general", json!(r.var_lower_k0_general));
            put("var_upper", json!(r.var_upper));
        }
        _ => {
            put("iso_m_alpha_half", json!(r.iso_m_alpha_half));
            put("iso_m_alpha_two", json!(r.iso_m_alpha_two));
        }
    }
    out
}

impl Output {
    pub fn to_json(&self, command: &Invocation) -> Value {
        match self {
            Output::Count { params, d2k } => json!({ "params": params, "d2k": d2k }),
            Output::Dist { rows } => json!(rows
                .iter()
                .map(|d| json!({ "gc": d.gc_count(), "pmf": d.pmf(), "cdf": d.cdf() }))
                .collect::<Vec<_>>()),
            Output::Report(r) => report_json(command, r),
            Output::Simulate(o) => json!({
                "mean_exact": o.mean_exact,
                "mean": o.sample_mean,
                "var": o.sample_var,
                "ks": o.ks,
                "samples": o.samples,
            }),
            Output::Grids(grids) => json!(grids
                .iter()
                .map(|g| json!({ "k": g.k(), "iso_lines": g.iso_lines, "cells": g.cells }))
                .collect::<Vec<_>>()),
        }
    }

    pub fn to_csv(&self, command: &Invocation) -> String {
        match self {
            Output::Count { params, d2k } => {
                format!("n,m,k,d2k\n{},{},{},{d2k}\n", params.n, params.m, params.k)
            }
            Output::Dist { rows } => {
                let mut out = String::from("m,eta,gc,k,pmf,cdf\n");
                for d in rows {
                    for (k, (p, c)) in d.pmf().iter().zip(d.cdf()).enumerate() {
                        out.push_str(&format!(
                            "{},{},{},{k},{},{}\n",
                            d.m(),
                            format_g17(d.eta()),
                            d.gc_count(),
                            format_g17(*p),
                            format_g17(*c)
                        ));
                    }
                }
                out
            }
            Output::Report(_) => {
                let value = self.to_json(command);
                let obj = value.as_object().expect("report is an object");
                let mut header = Vec::new();
                let mut row = Vec::new();
                for (key, v) in obj {
                    flatten_csv(key, v, &mut header, &mut row);
                }
                format!("{}\n{}\n", header.join(","), row.join(","))
            }
            Output::Simulate(o) => {
                let c = &o.config;
                format!(
                    "n,m,k,reps,mean_exact,mean,var,d_stat,p_value,seed\n{},{},{},{},{},{},{},{},{},{}\n",
                    c.params.n,
                    c.params.m,
                    c.params.k,
                    c.replicates,
                    format_g17(o.mean_exact),
                    format_g17(o.sample_mean),
                    format_g17(o.sample_var),
                    format_g17(o.ks.d_statistic),
                    format_g17(o.ks.p_value),
                    c.seed
                )
            }
            Output::Grids(grids) => {
                let mut out = format!("{KS_GRID_CSV_HEADER}\n");
                for g in grids {
                    out.push_str(g.to_csv().split_once('\n').map_or("", |(_, rows)| rows));
                }
                out
            }
        }
    }
}

fn flatten_csv(key: &str, v: &Value, header: &mut Vec<String>, row: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten_csv(&format!("{key}.{k}"), inner, header, row);
            }
        }
        Value::Number(n) => {
            header.push(key.to_string());
            row.push(match n.as_f64() {
                Some(x) if !(n.is_u64() || n.is_i64()) => format_g17(x),
                _ => n.to_string(),
            });
        }
        Value::Null => {
            header.push(key.to_string());
            row.push(String::new());
        }
        other => {
            header.push(key.to_string());
            row.push(other.to_string());
        }
    }
}
