//! Rendering of experiment summaries as text tables, CSV or JSON.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::harness::ExperimentSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown format {other:?} (expected text, csv or json)"
            ))),
        }
    }
}

pub fn emit_table(summary: &ExperimentSummary, format: TableFormat) -> Result<String> {
    if summary.records.is_empty() {
        return Err(Error::EmptySummary);
    }
    Ok(match format {
        TableFormat::Text => render_text(summary),
        TableFormat::Csv => render_csv(summary),
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
            s.push('\n');
            s
        }
    })
}

/// Parses the JSON produced by [`emit_table`].
pub fn parse_json_summary(text: &str) -> Result<ExperimentSummary> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

const LABEL: usize = 14;
const CELL: usize = 10;

fn p_value(p: Option<f64>) -> String {
    p.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"))
}

fn render_text(s: &ExperimentSummary) -> String {
    let c = &s.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "The means and standard deviations of estimators (mu={:.4}, sigma^2={:.4})",
        c.mu, c.sigma_sq
    );
    let _ = writeln!(
        out,
        "h={}, N={}, replications={}, sampler={}, root_seed={}",
        c.grid.step(),
        c.grid.len(),
        c.replications,
        c.sampler,
        c.root_seed
    );
    let group = 2 * CELL;
    let rule = "-".repeat(LABEL + group * s.records.len());

    let _ = writeln!(out, "{rule}");
    let mut line = format!("{:LABEL$}", "");
    for r in &s.records {
        let _ = write!(line, "{:^group$}", format!("H={}", r.hurst));
    }
    let _ = writeln!(out, "{}", line.trim_end());
    let mut line = format!("{:LABEL$}", "");
    for _ in &s.records {
        let _ = write!(line, "{:>CELL$}{:>CELL$}", "mu", "sigma^2");
    }
    let _ = writeln!(out, "{line}");
    let _ = writeln!(out, "{rule}");

    let row = |label: &str, f: &dyn Fn(&crate::harness::HurstRecord) -> (String, String)| {
        let mut line = format!("{label:LABEL$}");
        for r in &s.records {
            let (a, b) = f(r);
            let _ = write!(line, "{a:>CELL$}{b:>CELL$}");
        }
        line
    };
    let _ = writeln!(
        out,
        "{}",
        row("Mean", &|r| (format!("{:.4}", r.mean_mu_hat), format!("{:.4}", r.mean_sigma_sq_hat)))
    );
    let _ = writeln!(
        out,
        "{}",
        row("Std.dev.", &|r| (format!("{:.4}", r.sd_mu_hat), format!("{:.4}", r.sd_sigma_sq_hat)))
    );
    let _ = writeln!(
        out,
        "{}",
        row("Exact sd", &|r| (
            format!("{:.4}", r.theoretical_sd_mu_hat),
            format!("{:.4}", r.theoretical_var_sigma_sq.sqrt())
        ))
    );
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(
        out,
        "{}",
        row("KS p (z)", &|r| (p_value(r.ks_p_z_mu), p_value(r.ks_p_z_sigma)))
    );
    let _ = writeln!(
        out,
        "{}",
        row("KS p chi^2", &|r| ("".to_string(), p_value(r.ks_p_chi_sq)))
    );
    let _ = writeln!(out, "{rule}");
    out
}

fn opt(p: Option<f64>) -> String {
    p.map_or_else(String::new, |p| p.to_string())
}

fn render_csv(s: &ExperimentSummary) -> String {
    let c = &s.config;
    let mut out = String::from(
        "mu,sigma_sq,step_h,count_n,replications,root_seed,sampler,hurst,mean_mu_hat,sd_mu_hat,\
         mean_sigma_sq_hat,sd_sigma_sq_hat,ks_p_z_mu,ks_p_chi_sq,ks_p_z_sigma,\
         empirical_var_sigma_sq,theoretical_var_sigma_sq,theoretical_sd_mu_hat\n",
    );
    for r in &s.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.mu,
            c.sigma_sq,
            c.grid.step(),
            c.grid.len(),
            c.replications,
            c.root_seed,
            c.sampler,
            r.hurst,
            r.mean_mu_hat,
            r.sd_mu_hat,
            r.mean_sigma_sq_hat,
            r.sd_sigma_sq_hat,
            opt(r.ks_p_z_mu),
            opt(r.ks_p_chi_sq),
            opt(r.ks_p_z_sigma),
            r.empirical_var_sigma_sq,
            r.theoretical_var_sigma_sq,
            r.theoretical_sd_mu_hat
        );
    }
    out
}
