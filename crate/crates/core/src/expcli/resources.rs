use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::acquire::{ell_rounds, estimation_rounds, robust_parameters, AcquireParams, LeakParameters, DEFAULT_BLOCKS};
use crate::certify::{noniid_formula_blocks, CopyRule};
use crate::error::Result;
use crate::tasks::forrelation_repetitions;

use super::config::ExperimentConfig;

/// One formula evaluated at the configured parameters, next to what a run actually uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub quantity: String,
    pub formula: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configured: Option<f64>,
}

fn row(quantity: &str, formula: &str, value: f64, configured: Option<f64>) -> ResourceRow {
    ResourceRow { quantity: quantity.into(), formula: formula.into(), value, configured }
}

/// Formula counts with the declared constants (`C_SO = 2`, unit constant for the non-i.i.d. bound).
pub fn resource_table(cfg: &ExperimentConfig) -> Result<Vec<ResourceRow>> {
    let (n, m, eps, delta) = (cfg.n, cfg.m, cfg.eps, cfg.delta);
    let nb = n * m;
    let blocks = cfg.blocks.unwrap_or(DEFAULT_BLOCKS) as f64;
    let noniid = noniid_formula_blocks(nb, eps, delta);
    let mut rows = vec![
        row("iid copies", "2·n·m·ln(1/δ)/ε", CopyRule::Linear.copies(nb, eps, delta)? as f64, cfg.blocks.map(|b| b as f64)),
        row("iid copies (quadratic)", "2·(n·m)²·ln(2/δ)/ε²", CopyRule::Quadratic.copies(nb, eps, delta)? as f64, None),
        row("non-iid blocks N", "(n·m)⁵/(δ²ε⁶)", noniid, Some(blocks)),
        row("m_pub unidirectional", "n⁵m⁶/(δ²ε⁶)", noniid * m as f64, Some(blocks * m as f64)),
        row("m_pri unidirectional", "2·m·(N − 1)", 2.0 * m as f64 * (noniid - 1.0), Some(2.0 * m as f64 * (blocks - 1.0))),
    ];
    if let Some(leak) = cfg.leak_bound() {
        let lp = LeakParameters::new(n, &AcquireParams::new(m, eps, delta), leak)?;
        let af_blocks = cfg.blocks.unwrap_or(lp.formula_blocks) as f64;
        rows.push(row("eps_leak", "1 − (1 − δ_leak/2)^m", lp.eps_leak, None));
        rows.push(row("eps_cert", "min(ε, ¾·ε_leak)", lp.eps_cert, None));
        rows.push(row("ancilla-free blocks N", "2·n·m·ln(1/δ)/ε_cert", lp.formula_blocks as f64, Some(af_blocks)));
        rows.push(row("m_pub ancilla-free", "(N + 1)·m", (lp.formula_blocks as f64 + 1.0) * m as f64, Some((af_blocks + 1.0) * m as f64)));
    }
    let (eps_a, delta_a) = robust_parameters(cfg.delta_tilde);
    let ell = ell_rounds(delta, delta_a)? as f64;
    rows.push(row("eps_A", "δ̃²", eps_a, None));
    rows.push(row("delta_A", "2·δ̃", delta_a, None));
    rows.push(row("rounds ell", "⌈2 ln(1/δ)/(1 − 4δ_A)²⌉", ell, None));
    if delta_a < 1.0 / 3.0 {
        rows.push(row("estimation rounds", "min ℓ: Pr[Bin(ℓ, 1−δ_A) ≥ 2ℓ/3] ≥ 1 − δ", estimation_rounds(delta, delta_a)? as f64, None));
    }
    let reps = forrelation_repetitions(cfg.delta_tilde)? as f64;
    rows.push(row("forrelation copies per run", "⌈ln(1/δ̃)/(2·0.09²)⌉ odd", reps, None));
    rows.push(row("m_pub forrelation", "n⁵·ln(1/δ)", (n as f64).powi(5) * (1.0 / delta).ln(), Some(ell * blocks * reps * 2.0)));
    Ok(rows)
}

/// Plain-text rendering of [`resource_table`].
pub fn print_resource_table(cfg: &ExperimentConfig) -> Result<String> {
    let rows = resource_table(cfg)?;
    let w0 = rows.iter().map(|r| r.quantity.chars().count()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r.formula.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w0$}  {:<w1$}  {:>14}  {:>14}", "quantity", "formula", "formula value", "configured");
    for r in &rows {
        let conf = r.configured.map_or("-".to_string(), fmt_num);
        let pad0 = w0 - r.quantity.chars().count();
        let pad1 = w1 - r.formula.chars().count();
        let _ = writeln!(out, "{}{}  {}{}  {:>14}  {:>14}", r.quantity, " ".repeat(pad0), r.formula, " ".repeat(pad1), fmt_num(r.value), conf);
    }
    Ok(out)
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e12 {
        format!("{v:.0}")
    } else if v.abs() >= 1e6 || v.abs() < 1e-3 {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}
