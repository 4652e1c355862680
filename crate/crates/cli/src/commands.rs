//! Subcommand definitions and their report/exit-code logic.

use crate::files::{RegionTemplateFile, SolverConfigFile, SystemFile};
use crate::scanfile::{decimal, write_gnuplot, write_scan};
use clap::{Args, Parser, Subcommand, ValueEnum};
use delta_stab::analysis::{
    certify, region_scan, robust_margin_with, AxisRange, KSchedule, Method, RegionTemplate,
};
use delta_stab::conditions::{Condition, RobustForm};
use delta_stab::oracle::{classify, sweep, OracleVerdict};
use delta_stab::sdp::{FeasibilityStatus, SolverConfig};
use delta_stab::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "delta-stab", version, about = "Strong-stability certificates for x(t) = A x(t-a) + B x(t-b)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one condition over a k schedule and compare with the frequency sweep.
    Check(CheckArgs),
    /// Bisect the largest certified uncertainty scale r.
    Margin(MarginArgs),
    /// Scan a two-parameter family on a grid and write a CSV table.
    Region(RegionArgs),
    /// Sweep the spectral radius of A + B e^{-jθ} over θ.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub system: PathBuf,
    /// Condition label, optionally pinned to one order (thm4k2).
    #[arg(long, default_value = "thm4")]
    pub method: String,
    #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
    pub k_schedule: Vec<usize>,
    /// Keep going after the first certified order.
    #[arg(long)]
    pub all_k: bool,
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Printed,
    Derived,
}

#[derive(Debug, Args)]
pub struct MarginArgs {
    pub system: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "printed")]
    pub form: FormArg,
    /// CSV file for the probes; printed to stdout when absent.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// `paper` or a JSON file with A, B, dA, dB.
    #[arg(long, default_value = "paper")]
    pub template: String,
    /// Comma-separated method labels; may be empty.
    #[arg(long, default_value = "carvalho,thm4k2,kronecker")]
    pub methods: String,
    /// alpha_lo,alpha_hi,beta_lo,beta_hi
    #[arg(long, default_value = "-1,1,-1,1", value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Vec<f64>,
    #[arg(long, default_value_t = 0.02)]
    pub step: f64,
    /// Cells with |rho_max - 1| within the band are left out of the agreement counts.
    #[arg(long, default_value_t = 0.02)]
    pub band: f64,
    #[arg(long, default_value = "scan.csv")]
    pub out: PathBuf,
    /// Optional gnuplot data file with one block per region.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long)]
    pub solver_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub system: PathBuf,
    #[arg(long, default_value_t = delta_stab::oracle::DEFAULT_GRID_POINTS)]
    pub grid: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub refine: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub band: f64,
    /// CSV file of θ,ρ pairs; omitted when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command; errors are reported on `err` and map to exit 2.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Check(a) => check(a, out),
        Command::Margin(a) => margin(a, out),
        Command::Region(a) => region(a, out),
        Command::Oracle(a) => oracle(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("i/o: {e}"))
}

fn solver_config(path: &Option<PathBuf>) -> Result<SolverConfig> {
    match path {
        Some(p) => SolverConfigFile::load(p),
        None => Ok(SolverConfig::default()),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn status_label(s: FeasibilityStatus) -> &'static str {
    match s {
        FeasibilityStatus::Feasible => "feasible",
        FeasibilityStatus::Infeasible => "infeasible",
        FeasibilityStatus::Inconclusive => "inconclusive",
    }
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let file = SystemFile::load(&a.system)?;
    let sys = file.system()?;
    let unc = file.uncertainty()?;
    let method: Method = a.method.parse()?;
    let schedule = method.schedule(&KSchedule::new(a.k_schedule.clone(), !a.all_k)?);
    if matches!(method.condition, Condition::Robust | Condition::Polytopic) && unc.is_none() {
        return Err(Error::InvalidInput(format!("{} needs an uncertainty section", method.condition)));
    }
    let cfg = solver_config(&a.solver_config)?;
    let rep = certify(&sys, method.condition, &schedule, &cfg, unc.as_ref())?;

    let w = |e| io_err(e);
    writeln!(out, "method {} k_schedule {:?}", method.condition, schedule.ks).map_err(w)?;
    if let Some(rho) = rep.equal_delay_rho {
        writeln!(out, "equal delays: rho(A+B) = {}", decimal(rho, 12)).map_err(w)?;
    }
    for kv in &rep.per_k {
        let v = &kv.verdict;
        let k = kv.k.map_or("-".to_string(), |k| k.to_string());
        let ub = v.upper_bound.map_or("-".to_string(), |u| format!("{u:.6e}"));
        write!(out, "k={k} status={} margin={:.6e} upper_bound={ub}", status_label(v.status), v.achieved_margin).map_err(w)?;
        match &v.note {
            Some(n) => writeln!(out, " note={n}").map_err(w)?,
            None => writeln!(out).map_err(w)?,
        }
    }
    if let Some(s) = &rep.sweep {
        writeln!(out, "oracle rho_max={} argmax_theta={:.6} verdict={}", decimal(s.rho_max, 12), s.argmax_theta, rep.oracle.label())
            .map_err(w)?;
    } else {
        writeln!(out, "oracle verdict={}", rep.oracle.label()).map_err(w)?;
    }
    if rep.certified {
        match rep.certified_k {
            Some(k) => writeln!(out, "result certified k={k}").map_err(w)?,
            None => writeln!(out, "result certified").map_err(w)?,
        }
        Ok(EXIT_OK)
    } else {
        let kmax = schedule.ks.last().copied().unwrap_or(1);
        if method.condition.uses_k() {
            writeln!(out, "result not_certified (k <= {kmax})").map_err(w)?;
        } else {
            writeln!(out, "result not_certified").map_err(w)?;
        }
        Ok(EXIT_NEGATIVE)
    }
}

fn margin(a: &MarginArgs, out: &mut dyn Write) -> Result<i32> {
    let file = SystemFile::load(&a.system)?;
    let sys = file.system()?;
    let template = file.margin_template()?;
    let cfg = solver_config(&a.solver_config)?;
    let form = match a.form {
        FormArg::Printed => RobustForm::Printed,
        FormArg::Derived => RobustForm::Derived,
    };
    let res = robust_margin_with(&sys, &template, a.k, a.r_max, a.tol, &cfg, form)?;
    let w = |e| io_err(e);
    writeln!(
        out,
        "k={} r_star={} bracket={},{} iterations={} conservative={}",
        res.k, res.r_star, res.bracket.0, res.bracket.1, res.iterations, res.conservative
    )
    .map_err(w)?;
    let mut lines = vec!["r,status,margin".to_string()];
    lines.extend(res.transcript.iter().map(|p| format!("{},{},{:.9e}", p.r, status_label(p.status), p.margin)));
    match &a.transcript {
        Some(path) => {
            let mut f = create(path)?;
            for l in &lines {
                writeln!(f, "{l}").map_err(w)?;
            }
            f.flush().map_err(w)?;
        }
        None => {
            for l in &lines {
                writeln!(out, "{l}").map_err(w)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn region(a: &RegionArgs, out: &mut dyn Write) -> Result<i32> {
    let template = if a.template == "paper" { RegionTemplate::example() } else { RegionTemplateFile::load(a.template.as_ref())? };
    let methods = a
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<Method>)
        .collect::<Result<Vec<_>>>()?;
    let [alo, ahi, blo, bhi] = a.range[..] else {
        return Err(Error::InvalidInput(format!("--range needs four values, got {}", a.range.len())));
    };
    let cfg = solver_config(&a.solver_config)?;
    let mut csv = create(&a.out)?;
    let scan = region_scan(&template, &methods, AxisRange::new(alo, ahi, a.step)?, AxisRange::new(blo, bhi, a.step)?, &cfg, a.band)?;
    let w = |e| io_err(e);
    write_scan(&scan, &mut csv).and_then(|_| csv.flush()).map_err(w)?;
    if let Some(path) = &a.gnuplot {
        let mut g = create(path)?;
        write_gnuplot(&scan, &mut g).and_then(|_| g.flush()).map_err(w)?;
    }
    writeln!(out, "cells {} written to {}", scan.cells.len(), a.out.display()).map_err(w)?;
    for (m, s) in scan.methods.iter().zip(&scan.agreement) {
        writeln!(
            out,
            "{m}: considered={} agree={} false_certified={} missed={} errors={}",
            s.considered, s.agree, s.false_certified, s.missed, s.errors
        )
        .map_err(w)?;
    }
    if scan.soundness_violation {
        writeln!(out, "soundness: VIOLATED (a certified cell has rho_max >= 1)").map_err(w)?;
        Ok(EXIT_NEGATIVE)
    } else {
        writeln!(out, "soundness: ok").map_err(w)?;
        Ok(EXIT_OK)
    }
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let sys = SystemFile::load(&a.system)?.system()?;
    if !(a.band >= 0.0) {
        return Err(Error::InvalidInput("band must be nonnegative".into()));
    }
    let rep = sweep(&sys, a.grid, a.refine)?;
    let w = |e| io_err(e);
    if let Some(path) = &a.out {
        let mut f = create(path)?;
        writeln!(f, "theta,rho").map_err(w)?;
        for (t, r) in rep.grid.iter().zip(&rep.rho) {
            writeln!(f, "{t},{}", decimal(*r, 12)).map_err(w)?;
        }
        f.flush().map_err(w)?;
    }
    let verdict = classify(rep.rho_max, a.band);
    writeln!(out, "rho_max={}", decimal(rep.rho_max, 12)).map_err(w)?;
    writeln!(out, "argmax_theta={:.10}", rep.argmax_theta).map_err(w)?;
    writeln!(out, "rho_a_plus_b={}", decimal(rep.rho_a_plus_b, 12)).map_err(w)?;
    writeln!(out, "verdict={}", verdict.label()).map_err(w)?;
    Ok(match verdict {
        OracleVerdict::Stable => EXIT_OK,
        OracleVerdict::Unstable => EXIT_NEGATIVE,
        OracleVerdict::Boundary => EXIT_BOUNDARY,
    })
}
