//! Pipeline orchestration and text rendering for the subcommands.

use std::fmt::Write as _;

use pgt_core::{
    alignment_search, build_one_excitation, classify_frequencies, decompose, fit_power_law,
    pgt_verdict, transfer_form, FitResult, FrequencyAnalysis, PgtVerdict, ScalingDataset,
    TransferForm, VerdictReport, VerdictThresholds,
};
use rug::{Float, Integer};

use crate::config::ExperimentConfig;

pub struct Analysis {
    pub form: TransferForm,
    pub analysis: FrequencyAnalysis,
    pub eigenvalues: Vec<Float>,
    pub report: String,
}

/// Height limit for integer-relation coefficients during classification.
const RELATION_HEIGHT: u64 = 1_000_000;

fn fmt20(x: &Float) -> String {
    let s = Float::with_val(64, x).to_string_radix(10, Some(20));
    s
}

pub fn analyze(cfg: &ExperimentConfig) -> Result<Analysis, String> {
    let prec = cfg.precision_bits;
    let h = build_one_excitation(&cfg.spec).map_err(|e| e.to_string())?;
    let sd = decompose(&h, prec).map_err(|e| e.to_string())?;
    let form = transfer_form(&cfg.spec, &sd);
    let analysis = classify_frequencies(&form.frequencies(), &Integer::from(RELATION_HEIGHT), prec)
        .map_err(|e| e.to_string())?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "chain: {:?} N={} source={} target={}",
        family_name(cfg),
        cfg.spec.n_spins,
        cfg.spec.source,
        cfg.spec.target
    );
    let _ = writeln!(out, "precision: {prec} bits");
    let _ = write!(out, "spectrum:");
    for ev in &sd.eigenvalues {
        let _ = write!(out, " {}", fmt20(ev));
    }
    out.push('\n');
    let _ = writeln!(out, "transfer form: {}", render_form(&form));
    let _ = writeln!(out, "weight norm: {}", fmt20(&form.weight_norm()));
    for (i, f) in form.frequencies().iter().enumerate() {
        let label = match analysis.rational_part.iter().find(|(j, _)| *j == i) {
            Some((_, frac)) => format!("rational {frac}"),
            None => "irrational".to_string(),
        };
        let _ = writeln!(out, "frequency[{i}] = {} ({label})", fmt20(f));
    }
    for r in &analysis.relations {
        let coeffs: Vec<String> = r.iter().map(Integer::to_string).collect();
        let _ = writeln!(out, "integer relation (1, x..): [{}]", coeffs.join(", "));
    }
    let _ = writeln!(out, "K_I = {}", analysis.k_i);
    if analysis.unexplored {
        let _ = writeln!(out, "warning: relation search hit its height limit; K_I is an upper bound");
    }
    if analysis.k_i == 0 {
        let norm_gap = Float::with_val(prec, 1u32 - &form.weight_norm()).abs();
        if norm_gap.to_f64() <= 1e-9 {
            let _ = writeln!(out, "all frequencies rational with unit weight norm: perfect state transfer");
        }
    }

    Ok(Analysis {
        form,
        analysis,
        eigenvalues: sd.eigenvalues.clone(),
        report: out,
    })
}

pub fn scan(cfg: &ExperimentConfig, ana: &Analysis) -> ScalingDataset {
    alignment_search(&ana.form, &ana.analysis, &cfg.budget())
}

pub fn verdict(ana: &Analysis, ds: &ScalingDataset) -> VerdictReport {
    pgt_verdict(&ana.form, &ana.analysis, ds, &VerdictThresholds::default())
}

pub fn render_fit(fit: &FitResult) -> String {
    if fit.insufficient_data {
        return format!(
            "fit: insufficient data ({} points below the epsilon cut)\n",
            fit.n_points
        );
    }
    format!(
        "fit: alpha = {:.4} (K_I/2 = {:.1}), prefactor = {:.4e}, r^2 = {:.4}, {} points, consistent = {}\n",
        fit.alpha, fit.reference, fit.prefactor, fit.r_squared, fit.n_points, fit.consistent
    )
}

pub fn render_scan_summary(ds: &ScalingDataset) -> String {
    let mut out = String::new();
    if ds.perfect_transfer {
        let _ = writeln!(
            out,
            "perfect transfer on the time grid at q = {} (epsilon = 0)",
            ds.points[0].q
        );
    }
    let _ = writeln!(
        out,
        "dataset: {} points, sup P = {:.6}, grid step {}",
        ds.points.len(),
        ds.sup_probability.to_f64(),
        match ds.grid {
            pgt_core::GridStep::Pi => "pi",
            pgt_core::GridStep::HalfPi => "pi/2",
        }
    );
    if let Some(last) = ds.points.last() {
        let _ = writeln!(
            out,
            "deepest point: q = {}, epsilon = {:.3e}",
            last.q,
            last.epsilon.to_f64()
        );
    }
    out
}

pub fn render_verdict(v: &VerdictReport) -> String {
    let name = match v.verdict {
        PgtVerdict::Pgt => "PGT",
        PgtVerdict::NoPgt => "no PGT",
        PgtVerdict::Inconclusive => "inconclusive",
    };
    format!(
        "verdict: {name} ({}; {})\n",
        if v.certified { "certified" } else { "empirical" },
        v.detail
    )
}

pub fn fit_dataset(cfg: &ExperimentConfig, ds: &ScalingDataset) -> FitResult {
    fit_power_law(ds, &cfg.fit)
}

fn render_form(form: &TransferForm) -> String {
    let mut out = String::new();
    match &form.general {
        Some(pairs) => {
            let _ = write!(out, "|sum_k w_k exp(-i lambda_k t)|^2 with (lambda, w):");
            for p in pairs {
                let _ = write!(out, " ({}, {})", fmt20(&p.eigenvalue), fmt20(&p.weight));
            }
        }
        None => {
            let _ = write!(out, "P(t) = [{}", fmt20(&form.constant));
            for t in &form.terms {
                let f = fmt20(&t.frequency);
                let w = fmt20(&t.weight);
                let kind = if t.shift.is_sin() { "sin" } else { "cos" };
                let _ = write!(out, " + {w}*{kind}({f} t)");
            }
            let _ = write!(out, "]^2");
        }
    }
    out
}

fn family_name(cfg: &ExperimentConfig) -> &'static str {
    use pgt_core::Family::*;
    match cfg.spec.family {
        Xx { .. } => "XX",
        StaggeredHeisenberg { .. } => "staggered Heisenberg",
        DecoratedSsh { .. } => "decorated SSH",
    }
}
