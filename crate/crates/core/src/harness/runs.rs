//! Experiment runners.
//!
//! Every replicate is a pure function of its derived seeds, replicates are
//! mapped over a rayon pool with an order-preserving collect, and all
//! aggregation happens afterwards in replicate order. Outputs therefore do
//! not depend on the worker count.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use rayon::ThreadPool;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{Reference, Report, RowTemplate, Table};
use crate::error::{Error, Result};
use crate::extremes::{
    exp_variance_ratio, gumbel_two_sided_tail, ks_distance, l_t, limit_at, limit_supinf, local_extrema_ppp,
    local_minima_ppp, cw_bounds, tail_decay, ExtremeSummary, GumbelRef,
};
use crate::field::{area_fraction, render_pgm, AdditiveField, Side, Window};
use crate::kernels::{Grid1D, KernelSpec};
use crate::percolation::{
    certificate_block_at, certificate_block_cth, certificate_ladder_sn, certificate_path_bth, find_blocking_rectangle,
    has_crossing, ladder_scales, verify_blocking, Direction,
};
use crate::sampler::{derive_seed, write_path_dump, CirculantSampler, ProcessPath};
use crate::stats::{correlation, mean};

/// Seed of process `process` (of `d`) in replicate `replicate`.
pub fn replicate_seed(master: u64, replicate: u64, process: usize, d: usize) -> u64 {
    derive_seed(master, replicate * d as u64 + process as u64)
}

/// Runs the experiment selected by `config.kind`, writing any image or dump
/// files under `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    config.validate()?;
    match config.kind {
        ExperimentKind::CrossingScan => run_crossing_scan(config),
        ExperimentKind::WindowScan => run_window_scan(config),
        ExperimentKind::GumbelStudy => run_gumbel_study(config),
        ExperimentKind::ExtremesStudy => run_extremes_study(config),
        ExperimentKind::BlockingStudy => run_blocking_study(config),
        ExperimentKind::CertificateAudit => run_certificate_audit(config),
        ExperimentKind::Slice3D => run_slice3d_study(config),
        ExperimentKind::Render => run_render(config, out_dir),
        ExperimentKind::Sample => run_sample(config, out_dir),
    }
}

fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn replicates<T, F>(pool: &ThreadPool, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

fn count(flags: impl Iterator<Item = bool>) -> u64 {
    flags.filter(|&b| b).count() as u64
}

fn template(config: &ExperimentConfig) -> RowTemplate {
    RowTemplate {
        kernel1: config.kernels[0].descriptor(),
        kernel2: config.kernels.get(1).map(KernelSpec::descriptor).unwrap_or_default(),
        rho: config.rho,
        master_seed: config.master_seed,
    }
}

/// `λ₂` of the unit-variance process `g/√K(0)`.
fn unit_lambda2(k: &KernelSpec) -> f64 {
    k.lambda2() / k.variance()
}

fn sampler(kernel: &KernelSpec, lo: f64, hi: f64, eps: f64) -> Result<CirculantSampler> {
    CirculantSampler::new(kernel, &Grid1D::covering(lo, hi, eps)?)
}

fn full_window(field: &AdditiveField) -> Window {
    let shape = field.shape();
    Window::new(0, 0, shape[0], shape[1])
}

fn crosses(field: &AdditiveField, level: f64, side: Side) -> Result<bool> {
    let mask = field.level_mask(level, side, full_window(field), &[])?;
    has_crossing(&mask, Direction::LeftRight)
}

fn violation(what: &str, replicate: u64, detail: String) -> Error {
    Error::SoundnessViolation(format!("{what} at replicate {replicate}: {detail}"))
}

/// Left-right crossings of `{f ≤ ℓ}` in `[0, R] × [0, ρR]`, optionally also in
/// `[0, R] × [0, ρR^{K1(0)/K2(0)}]`. For equal variances and `ρ = 1` the
/// square-blocking certificate is evaluated and checked on every replicate.
pub fn run_crossing_scan(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let (k1, k2) = (config.kernels[0], config.kernels[1]);
    let tpl = template(config);
    let balanced = k1.variance() == k2.variance();
    let audit_at = balanced && config.rho == 1.0;
    let at_ref = limit_at(unit_lambda2(&k1), unit_lambda2(&k2))?;
    let exponent = k1.variance() / k2.variance();
    let mut report = Report::default();

    for &r in &config.sizes {
        info!("crossing scan: R = {r}");
        let s1 = sampler(&k1, 0.0, r, config.eps)?;
        let s2 = sampler(&k2, 0.0, config.rho * r, config.eps)?;
        let s2r = if config.rescaled {
            Some(sampler(&k2, 0.0, config.rho * r.powf(exponent), config.eps)?)
        } else {
            None
        };
        let outcomes = replicates(&pool, config.replicates, |rep| {
            let g1 = s1.sample(replicate_seed(config.master_seed, rep, 0, 2));
            let g2_seed = replicate_seed(config.master_seed, rep, 1, 2);
            let field = AdditiveField::planar(g1.clone(), s2.sample(g2_seed));
            let plain = config
                .levels
                .iter()
                .map(|&l| crosses(&field, l, Side::AtMost))
                .collect::<Result<Vec<_>>>()?;
            let rescaled = match &s2r {
                Some(s) => {
                    let f = AdditiveField::planar(g1, s.sample(g2_seed));
                    config
                        .levels
                        .iter()
                        .map(|&l| crosses(&f, l, Side::AtMost))
                        .collect::<Result<Vec<_>>>()?
                }
                None => Vec::new(),
            };
            let mut a = false;
            if audit_at {
                a = certificate_block_at(field.component(0), field.component(1), r)?;
                if a && crosses(&field, 0.0, Side::AtMost)? {
                    return Err(violation("square-blocking certificate", rep, format!("R = {r}, crossing of {{f ≤ 0}} found")));
                }
            }
            Ok((plain, rescaled, a))
        })?;

        for (i, &level) in config.levels.iter().enumerate() {
            let reference = if audit_at && level == 0.0 {
                Reference::Bounds(at_ref, 1.0 - at_ref)
            } else {
                Reference::None
            };
            let hits = count(outcomes.iter().map(|o| o.0[i]));
            report.rows.push(tpl.row("crossing", r, level, 0.0, hits, config.replicates, reference));
        }
        if config.rescaled {
            for (i, &level) in config.levels.iter().enumerate() {
                let hits = count(outcomes.iter().map(|o| o.1[i]));
                report
                    .rows
                    .push(tpl.row("crossing_rescaled", r, level, 0.0, hits, config.replicates, Reference::None));
            }
        }
        if audit_at {
            let hits = count(outcomes.iter().map(|o| o.2));
            report
                .rows
                .push(tpl.row("certificate_A", r, 0.0, 0.0, hits, config.replicates, Reference::Value(at_ref)));
        }
    }
    Ok(report)
}

/// Crossings of `{f ≤ 2h/√log R}` in `[0, R]²` for each `h`, with the
/// asymptotic bounds as reference. The path and blocking certificates for
/// each `h` are checked on every replicate.
pub fn run_window_scan(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let (k1, k2) = (config.kernels[0], config.kernels[1]);
    if k1.variance() != k2.variance() {
        return Err(Error::Config("window scan needs K1(0) = K2(0)".into()));
    }
    let tpl = template(config);
    let (l21, l22) = (unit_lambda2(&k1), unit_lambda2(&k2));
    let mut report = Report::default();

    for &r in &config.sizes {
        info!("window scan: R = {r}");
        if !(r > 1.0) {
            return Err(Error::Config(format!("window scan needs R > 1, got {r}")));
        }
        let root_log = r.ln().sqrt();
        let s1 = sampler(&k1, 0.0, r, config.eps)?;
        let s2 = sampler(&k2, 0.0, r, config.eps)?;
        let outcomes = replicates(&pool, config.replicates, |rep| {
            let field = AdditiveField::planar(
                s1.sample(replicate_seed(config.master_seed, rep, 0, 2)),
                s2.sample(replicate_seed(config.master_seed, rep, 1, 2)),
            );
            let (g1, g2) = (field.component(0), field.component(1));
            let mut out = Vec::with_capacity(config.h_values.len());
            for &h in &config.h_values {
                let level = 2.0 * h / root_log;
                let cross = crosses(&field, level, Side::AtMost)?;
                let (b, b_level) = certificate_path_bth(g1, g2, r, h)?;
                if b && !crosses(&field, b_level, Side::Above)? {
                    return Err(violation("path certificate", rep, format!("R = {r}, h = {h}: no crossing of {{f > {b_level}}}")));
                }
                let (c, c_level) = certificate_block_cth(g1, g2, r, h)?;
                if c {
                    let blocked = if c_level == level { cross } else { crosses(&field, c_level, Side::AtMost)? };
                    if blocked {
                        return Err(violation("column-blocking certificate", rep, format!("R = {r}, h = {h}: crossing of {{f ≤ {c_level}}}")));
                    }
                }
                out.push((cross, b, c));
            }
            Ok(out)
        })?;

        for (i, &h) in config.h_values.iter().enumerate() {
            let level = 2.0 * h / root_log;
            let (lo, hi) = cw_bounds(h, l21, l22)?;
            let n = config.replicates;
            report.rows.push(tpl.row("window", r, level, h, count(outcomes.iter().map(|o| o[i].0)), n, Reference::Bounds(lo, hi)));
            report.rows.push(tpl.row("certificate_B", r, level, h, count(outcomes.iter().map(|o| o[i].1)), n, Reference::None));
            report.rows.push(tpl.row("certificate_C", r, level, h, count(outcomes.iter().map(|o| o[i].2)), n, Reference::None));
        }
    }
    Ok(report)
}

/// Per-replicate extremes of one unit-normalized path on `[0, T]`.
struct PathExtremes {
    sup: f64,
    rescaled: f64,
    maxima_above: usize,
    minima_above: usize,
}

fn extremes_samples(config: &ExperimentConfig, pool: &ThreadPool, t: f64) -> Result<Vec<PathExtremes>> {
    let kernel = config.kernels[0];
    let sigma = kernel.variance().sqrt();
    let s = sampler(&kernel, 0.0, t, config.eps)?;
    replicates(pool, config.replicates, |rep| {
        let path = s.sample(replicate_seed(config.master_seed, rep, 0, 1));
        let unit: Vec<f64> = path.values().iter().map(|v| v / sigma).collect();
        let summary = ExtremeSummary::from_values(*path.grid(), &unit);
        let l = l_t(t, 1.0)?;
        let maxima_above = local_extrema_ppp(&summary, t, 1.0)?.iter().filter(|m| m.1 > 0.0).count();
        let minima_above = local_minima_ppp(&summary, t, 1.0)?.iter().filter(|m| m.1 > 0.0).count();
        Ok(PathExtremes {
            sup: summary.sup,
            rescaled: l * (summary.sup - l),
            maxima_above,
            minima_above,
        })
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| x.to_string())
}

/// Rescaled suprema against the shifted Gumbel law, and the counts of
/// rescaled local maxima and minima with positive marks.
pub fn run_gumbel_study(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let kernel = config.kernels[0];
    let reference = GumbelRef::new(unit_lambda2(&kernel))?;
    let expected = reference.lambda2.sqrt() / (2.0 * std::f64::consts::PI);
    let tpl = template(config);
    let mut report = Report::default();
    let mut ks = Table::new(
        "ks",
        &["T", "replicates", "ks_distance", "mean_max_count", "mean_min_count", "expected_count", "count_correlation"],
    );

    for &t in &config.sizes {
        info!("gumbel study: T = {t}");
        let samples = extremes_samples(config, &pool, t)?;
        let rescaled: Vec<f64> = samples.iter().map(|s| s.rescaled).collect();
        for &x in &config.levels {
            let hits = count(rescaled.iter().map(|&v| v <= x));
            report
                .rows
                .push(tpl.row("gumbel_cdf", t, x, 0.0, hits, config.replicates, Reference::Value(reference.cdf(x))));
        }
        let maxima: Vec<f64> = samples.iter().map(|s| s.maxima_above as f64).collect();
        let minima: Vec<f64> = samples.iter().map(|s| s.minima_above as f64).collect();
        ks.push(vec![
            t.to_string(),
            config.replicates.to_string(),
            ks_distance(&rescaled, |x| reference.cdf(x))?.to_string(),
            fmt_opt(mean(&maxima)),
            fmt_opt(mean(&minima)),
            expected.to_string(),
            fmt_opt(correlation(&maxima, &minima)),
        ]);
    }
    report.tables.push(ks);
    Ok(report)
}

/// Concentration of the supremum: tail frequencies of `|sup − L_T| > x/L_T`
/// and the exponential variance ratio at each horizon.
pub fn run_extremes_study(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let kernel = config.kernels[0];
    let shift = GumbelRef::new(unit_lambda2(&kernel))?.shift;
    let tpl = template(config);
    let mut report = Report::default();
    let mut tail = Table::new("tail", &["T", "x", "frequency", "gaussian_bound", "gumbel_limit"]);
    let mut ratio = Table::new("variance_ratio", &["T", "theta", "replicates", "ratio"]);

    for &t in &config.sizes {
        info!("extremes study: T = {t}");
        let samples = extremes_samples(config, &pool, t)?;
        let sups: Vec<f64> = samples.iter().map(|s| s.sup).collect();
        for p in tail_decay(&sups, t, &config.tail_x)? {
            let limit = gumbel_two_sided_tail(p.x, shift);
            let hits = (p.frequency * config.replicates as f64).round() as u64;
            report
                .rows
                .push(tpl.row("tail", t, p.x, 0.0, hits, config.replicates, Reference::Value(limit)));
            tail.push(vec![
                t.to_string(),
                p.x.to_string(),
                p.frequency.to_string(),
                p.gaussian_bound.to_string(),
                limit.to_string(),
            ]);
        }
        ratio.push(vec![
            t.to_string(),
            config.theta.to_string(),
            config.replicates.to_string(),
            exp_variance_ratio(&sups, config.theta, t)?.to_string(),
        ]);
    }
    report.tables.push(tail);
    report.tables.push(ratio);
    Ok(report)
}

/// Frequency of blocking rectangles around `[−T, T] × [−τ(T), τ(T)]` at
/// threshold `s = L_{1;T}`; every certificate found is re-verified on the
/// field. Also reports the ladder events for `config.ladder_rungs`.
pub fn run_blocking_study(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let (k1, k2) = (config.kernels[0], config.kernels[1]);
    let tpl = template(config);
    let reference = limit_supinf(unit_lambda2(&k1))? * limit_supinf(unit_lambda2(&k2))?;
    let mut report = Report::default();
    let mut certs = Table::new("certificates", &["T", "replicate", "a1", "b1", "a2", "b2", "threshold_s", "valid", "verified"]);

    for &t in &config.sizes {
        info!("blocking study: T = {t}");
        let tau = t.powf(k1.variance() / k2.variance());
        let s = l_t(t, k1.variance())?;
        let s1 = sampler(&k1, -2.0 * t, 2.0 * t, config.eps)?;
        let s2 = sampler(&k2, -2.0 * tau, 2.0 * tau, config.eps)?;
        let found = replicates(&pool, config.replicates, |rep| {
            let g1 = s1.sample(replicate_seed(config.master_seed, rep, 0, 2));
            let g2 = s2.sample(replicate_seed(config.master_seed, rep, 1, 2));
            match find_blocking_rectangle(&g1, &g2, t, tau, s)? {
                Some(cert) if cert.valid => {
                    if !verify_blocking(&AdditiveField::planar(g1, g2), &cert)? {
                        return Err(violation("blocking rectangle", rep, format!("T = {t}: {}", cert.to_csv_row())));
                    }
                    Ok(Some(cert))
                }
                _ => Ok(None),
            }
        })?;
        let mut hits = 0;
        for (rep, cert) in found.iter().enumerate() {
            if let Some(c) = cert {
                hits += 1;
                let mut row = vec![t.to_string(), rep.to_string()];
                row.extend(c.to_csv_row().split(',').map(str::to_string));
                row.push("true".into());
                certs.push(row);
            }
        }
        report
            .rows
            .push(tpl.row("blocking", t, s, 0.0, hits, config.replicates, Reference::Value(reference)));
    }

    for &n in &config.ladder_rungs {
        let (t_n, tau) = ladder_scales(n, k1.variance(), k2.variance());
        info!("ladder: n = {n}");
        let s1 = sampler(&k1, 0.0, 2.0 * t_n, config.eps)?;
        let s2 = sampler(&k2, 0.0, 2.0 * tau, config.eps)?;
        let events = replicates(&pool, config.ladder_replicates, |rep| {
            let g1 = s1.sample(replicate_seed(config.master_seed, rep, 0, 2));
            let g2 = s2.sample(replicate_seed(config.master_seed, rep, 1, 2));
            certificate_ladder_sn(&g1, &g2, n, config.ladder_level, k1.variance(), k2.variance())
        })?;
        report.rows.push(tpl.row(
            "ladder",
            t_n,
            config.ladder_level,
            0.0,
            count(events.into_iter()),
            config.ladder_replicates,
            Reference::None,
        ));
    }
    report.tables.push(certs);
    Ok(report)
}

/// Per-replicate implication checks for every certificate type.
///
/// On `[0, T]²`: the square-blocking event (equal variances only) must rule
/// out a left-right crossing of `{f ≤ 0}`; each path event must come with a
/// left-right crossing of `{f > level}`; each column-blocking event must rule
/// out a left-right crossing of `{f ≤ level}`. Blocking rectangles at horizon
/// `blocking_t` must pass `verify_blocking`. Any failure aborts the run.
pub fn run_certificate_audit(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    let (k1, k2) = (config.kernels[0], config.kernels[1]);
    let tpl = template(config);
    let balanced = k1.variance() == k2.variance();
    let mut report = Report::default();
    let mut audit = Table::new("audit", &["certificate", "T", "h", "replicates", "certified", "violations"]);

    for &t in &config.sizes {
        info!("certificate audit: T = {t}");
        let s1 = sampler(&k1, 0.0, t, config.eps)?;
        let s2 = sampler(&k2, 0.0, t, config.eps)?;
        let outcomes = replicates(&pool, config.replicates, |rep| {
            let g1 = s1.sample(replicate_seed(config.master_seed, rep, 0, 2));
            let g2 = s2.sample(replicate_seed(config.master_seed, rep, 1, 2));
            let field = AdditiveField::planar(g1.clone(), g2.clone());
            let a = balanced && certificate_block_at(&g1, &g2, t)?;
            if a && crosses(&field, 0.0, Side::AtMost)? {
                return Err(violation("square-blocking certificate", rep, format!("T = {t}")));
            }
            let mut per_h = Vec::with_capacity(config.h_values.len());
            for &h in &config.h_values {
                let (b, b_level) = certificate_path_bth(&g1, &g2, t, h)?;
                if b && !crosses(&field, b_level, Side::Above)? {
                    return Err(violation("path certificate", rep, format!("T = {t}, h = {h}")));
                }
                let (c, c_level) = certificate_block_cth(&g1, &g2, t, h)?;
                if c && crosses(&field, c_level, Side::AtMost)? {
                    return Err(violation("column-blocking certificate", rep, format!("T = {t}, h = {h}")));
                }
                per_h.push((b, c));
            }
            Ok((a, per_h))
        })?;
        let n = config.replicates;
        if balanced {
            let hits = count(outcomes.iter().map(|o| o.0));
            let at_ref = limit_at(unit_lambda2(&k1), unit_lambda2(&k2))?;
            report.rows.push(tpl.row("certificate_A", t, 0.0, 0.0, hits, n, Reference::Value(at_ref)));
            audit.push(vec!["A".into(), t.to_string(), "0".into(), n.to_string(), hits.to_string(), "0".into()]);
        }
        for (i, &h) in config.h_values.iter().enumerate() {
            let b = count(outcomes.iter().map(|o| o.1[i].0));
            let c = count(outcomes.iter().map(|o| o.1[i].1));
            let level = 2.0 * h / t.ln().sqrt();
            report.rows.push(tpl.row("certificate_B", t, level, h, b, n, Reference::None));
            report.rows.push(tpl.row("certificate_C", t, level, h, c, n, Reference::None));
            audit.push(vec!["B".into(), t.to_string(), h.to_string(), n.to_string(), b.to_string(), "0".into()]);
            audit.push(vec!["C".into(), t.to_string(), h.to_string(), n.to_string(), c.to_string(), "0".into()]);
        }
    }

    let t = config.blocking_t;
    let tau = t.powf(k1.variance() / k2.variance());
    let s = l_t(t, k1.variance())?;
    let s1 = sampler(&k1, -2.0 * t, 2.0 * t, config.eps)?;
    let s2 = sampler(&k2, -2.0 * tau, 2.0 * tau, config.eps)?;
    let found = replicates(&pool, config.blocking_replicates, |rep| {
        let g1 = s1.sample(replicate_seed(config.master_seed, rep, 0, 2));
        let g2 = s2.sample(replicate_seed(config.master_seed, rep, 1, 2));
        match find_blocking_rectangle(&g1, &g2, t, tau, s)? {
            Some(cert) if cert.valid => {
                if !verify_blocking(&AdditiveField::planar(g1, g2), &cert)? {
                    return Err(violation("blocking rectangle", rep, format!("T = {t}: {}", cert.to_csv_row())));
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    })?;
    let hits = count(found.into_iter());
    let n = config.blocking_replicates;
    report.rows.push(tpl.row("certificate_blocking", t, s, 0.0, hits, n, Reference::None));
    audit.push(vec!["blocking".into(), t.to_string(), "0".into(), n.to_string(), hits.to_string(), "0".into()]);
    report.tables.push(audit);
    Ok(report)
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// Three-dimensional field at level `ℓ < 0`: search `g3` on
/// `[0, search_length]` for its minimum; when it is below `2ℓ`, test for a
/// left-right crossing of `{f ≤ ℓ}` on the plane `x₃ = s₃` over `[0, R]²`.
pub fn run_slice3d_study(config: &ExperimentConfig) -> Result<Report> {
    let pool = pool(config.workers)?;
    if config.kernels.len() != 3 {
        return Err(Error::Config("slice3d needs three kernels".into()));
    }
    let (k1, k2, k3) = (config.kernels[0], config.kernels[1], config.kernels[2]);
    let tpl = template(config);
    let s3 = sampler(&k3, 0.0, config.search_length, config.eps)?;
    let mut report = Report::default();

    for &r in &config.sizes {
        info!("slice3d: R = {r}");
        let s1 = sampler(&k1, 0.0, r, config.eps)?;
        let s2 = sampler(&k2, 0.0, r, config.eps)?;
        let outcomes = replicates(&pool, config.replicates, |rep| {
            let g3 = s3.sample(replicate_seed(config.master_seed, rep, 2, 3));
            let (s_3, low) = argmin(g3.values());
            let mut out = Vec::with_capacity(config.levels.len());
            for &level in &config.levels {
                let found = low < 2.0 * level;
                let joint = if found {
                    let field = AdditiveField::new(vec![
                        s1.sample(replicate_seed(config.master_seed, rep, 0, 3)),
                        s2.sample(replicate_seed(config.master_seed, rep, 1, 3)),
                        g3.clone(),
                    ])?;
                    let window = Window::new(0, 0, field.shape()[0], field.shape()[1]);
                    let mask = field.level_mask(level, Side::AtMost, window, &[s_3])?;
                    has_crossing(&mask, Direction::LeftRight)?
                } else {
                    false
                };
                out.push((found, joint));
            }
            Ok(out)
        })?;
        for (i, &level) in config.levels.iter().enumerate() {
            let n = config.replicates;
            report.rows.push(tpl.row("slice_found", r, level, 0.0, count(outcomes.iter().map(|o| o[i].0)), n, Reference::None));
            report.rows.push(tpl.row("slice_joint", r, level, 0.0, count(outcomes.iter().map(|o| o[i].1)), n, Reference::None));
        }
    }
    Ok(report)
}

/// File name of the nodal-domain image for a kernel pair.
pub fn render_file_name(k1: &KernelSpec, k2: &KernelSpec) -> String {
    format!("nodal_{}_{}.pgm", k1.family().as_str(), k2.family().as_str())
}

/// Renders `{f ≤ 0}` over a `render_size × render_size` window to a PGM.
pub fn run_render(config: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    let (k1, k2) = (config.kernels[0], config.kernels[1]);
    let n = config.render_size;
    let grid = Grid1D::new(0.0, config.eps, n)?;
    let g1 = CirculantSampler::new(&k1, &grid)?.sample(replicate_seed(config.master_seed, 0, 0, 2));
    let g2 = CirculantSampler::new(&k2, &grid)?.sample(replicate_seed(config.master_seed, 0, 1, 2));
    let mask = AdditiveField::planar(g1, g2).excursion_mask(0.0, Window::square(n))?;
    let fraction = area_fraction(&mask)?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(render_file_name(&k1, &k2));
    render_pgm(&mask, &path)?;
    info!("rendered {} (area fraction {fraction:.4})", path.display());

    let mut table = Table::new("render", &["kernel1", "kernel2", "width", "height", "area_fraction", "master_seed", "file"]);
    table.push(vec![
        k1.descriptor(),
        k2.descriptor(),
        n.to_string(),
        n.to_string(),
        fraction.to_string(),
        config.master_seed.to_string(),
        render_file_name(&k1, &k2),
    ]);
    Ok(Report {
        rows: Vec::new(),
        tables: vec![table],
        files: vec![path],
    })
}

/// Dumps sampled paths of every kernel on `[0, sizes[0]]` for the first
/// `replicates` replicates.
pub fn run_sample(config: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    let d = config.kernels.len();
    let samplers = config
        .kernels
        .iter()
        .map(|k| sampler(k, 0.0, config.sizes[0], config.eps))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out_dir)?;
    let mut table = Table::new("paths", &["process", "replicate", "seed", "count", "eps", "clamped_mass", "file"]);
    let mut files: Vec<PathBuf> = Vec::new();
    for rep in 0..config.replicates {
        for (i, s) in samplers.iter().enumerate() {
            let path: ProcessPath = s.sample(replicate_seed(config.master_seed, rep, i, d));
            let name = format!("path_g{}_r{rep}.anf", i + 1);
            let file = out_dir.join(&name);
            write_path_dump(&path, fs::File::create(&file)?)?;
            table.push(vec![
                (i + 1).to_string(),
                rep.to_string(),
                path.seed().to_string(),
                path.len().to_string(),
                path.grid().eps().to_string(),
                path.clamped_mass().to_string(),
                name,
            ]);
            files.push(file);
        }
    }
    Ok(Report {
        rows: Vec::new(),
        tables: vec![table],
        files,
    })
}
