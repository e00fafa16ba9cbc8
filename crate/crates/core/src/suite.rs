//! Suite orchestration shared by the CLI and the acceptance tests: configuration,
//! memory-derived level caps and the per-suite check runners.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use crate::braiding::{self, flip, hecke_relation_residual, r_matrix, rbar_full, yang_baxter_residual};
use crate::error::{FusionError, Result};
use crate::groupoid::{build_section, compare_sections, required_levels, verify_groupoid, Groupoid, GroupoidOptions, SectionPolicy};
use crate::haar::{verify_haar, HaarContext};
use crate::hecke::{self, verify_hecke};
use crate::linalg::{self, diff_abs, mm, C64};
use crate::report::{summarize, timed, timed_result, CheckReport, Summary};
use crate::scalars::QContext;
use crate::weights::{
    classical_power_multiplicities, classical_successors, conjugate, dim_classical, enumerate_alcove, fusion_step,
    in_open_alcove, thresholds, truncated_power_multiplicities, Weight,
};
use crate::wenzl::{right_coherence_defect, form_consistency, verify_level, LevelOptions, Levels};

/// Which suite to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Alcove,
    Fuse,
    Levels,
    Groupoid,
    Haar,
    Appendix,
    All,
}

/// User-facing run parameters.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub ell: usize,
    /// Highest level built; `None` picks the memory-derived defaults.
    pub max_power: Option<usize>,
    pub tol: f64,
    pub dense_cap: usize,
    pub memory_budget_mb: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(n: usize, ell: usize) -> Self {
        RunConfig { n, ell, max_power: None, tol: 1e-9, dense_cap: 6, memory_budget_mb: 2048, seed: 0 }
    }

    pub fn ctx(&self) -> Result<QContext> {
        QContext::with_tol(self.n, self.ell, self.tol)
    }

    /// Highest level for the level and Haar suites: min(m̃, memory cap) unless overridden.
    pub fn level_top(&self, ctx: &QContext) -> usize {
        self.max_power
            .unwrap_or_else(|| thresholds(ctx).m_tilde.min(level_memory_cap(ctx, self.dense_cap, self.memory_budget_mb)))
    }

    /// Highest level for the groupoid suite: enough for order-4 tuples, cut by the memory cap.
    pub fn groupoid_top(&self, ctx: &QContext) -> usize {
        let cap = required_levels(ctx, 4).min(groupoid_memory_cap(ctx, self.memory_budget_mb));
        match self.max_power {
            Some(m) => cap.min(m),
            None => cap,
        }
    }

    /// Bound for the groupoid and appendix identities, which accumulate longer products.
    pub fn structural_tol(&self) -> f64 {
        10.0 * self.tol
    }
}

/// Resolved configuration recorded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigRecord {
    pub suite: Suite,
    pub n: usize,
    pub ell: usize,
    pub max_power: usize,
    pub groupoid_levels: usize,
    pub m_tilde: usize,
    pub tol: f64,
    pub dense_cap: usize,
    pub memory_budget_mb: usize,
    pub seed: u64,
    pub rng: &'static str,
}

/// A finished run: resolved config, human-readable tables and check reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ConfigRecord,
    #[serde(skip)]
    pub tables: Vec<String>,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("id\tstatus\tmax_residual\tcoverage\tms\n");
        for c in &self.checks {
            let status = serde_json::to_value(c.status).expect("status serializes");
            s.push_str(&format!(
                "{}\t{}\t{:e}\t{}\t{}\n",
                c.id,
                status.as_str().unwrap_or_default(),
                c.max_residual,
                c.coverage.replace(['\t', '\n'], " "),
                c.ms
            ));
        }
        s
    }
}

/// Dimensions of levels 0..=n from the weight oracle.
pub fn oracle_dims(ctx: &QContext, n: usize) -> Vec<usize> {
    let mut cur: BTreeMap<Weight, usize> = BTreeMap::new();
    cur.insert(Weight::zero(ctx.n), 1);
    let mut out = vec![1];
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (w, m) in &cur {
            for k in fusion_step(ctx, w).expect("weights stay in the alcove").kept {
                *next.entry(k).or_insert(0) += m;
            }
        }
        cur = next;
        out.push(cur.iter().map(|(w, m)| m * dim_classical(w)).sum());
    }
    out
}

/// Largest level whose cumulative one-step and ambient storage fits the budget.
pub fn level_memory_cap(ctx: &QContext, dense_cap: usize, budget_mb: usize) -> usize {
    let nn = ctx.n;
    let mut used = 0usize;
    let mut n = 0;
    let mut prev = 1usize;
    loop {
        let k = n + 1;
        let Some(&d) = oracle_dims(ctx, k).last() else { return n };
        let mut bytes = 2 * 16 * nn * prev * d;
        if k <= dense_cap {
            bytes += 2 * 16 * nn.pow(k as u32) * d;
        }
        used += bytes;
        if used >> 20 > budget_mb || k > 64 {
            return n;
        }
        prev = d;
        n = k;
    }
}

/// Largest total level t such that every order-4 default-section tuple with total at most t
/// fits the per-tuple corner budget of the groupoid suite.
pub fn groupoid_memory_cap(ctx: &QContext, budget_mb: usize) -> usize {
    let alcove = enumerate_alcove(ctx);
    let top = required_levels(ctx, 4);
    let dims = oracle_dims(ctx, top);
    let entries: Vec<(usize, usize)> = alcove.iter().map(|w| (w.deg() as usize, dim_classical(w))).collect();
    let mut worst_at = vec![0usize; top + 1];
    for t in (0..4).map(|_| entries.iter()).multi_cartesian_product() {
        let total: usize = t.iter().map(|e| e.0).sum();
        if total > top {
            continue;
        }
        let cols: usize = t.iter().map(|e| e.1).product();
        let rows = t.iter().map(|e| dims[e.0]).product::<usize>().max(dims[total]);
        worst_at[total] = worst_at[total].max((4 * 16 * rows * cols) >> 20);
    }
    let mut cap = 0;
    for (t, &mb) in worst_at.iter().enumerate() {
        if mb > budget_mb {
            break;
        }
        cap = t;
    }
    cap
}

fn build_levels(ctx: &QContext, cfg: &RunConfig, n_max: usize) -> Result<Levels> {
    let mut o = LevelOptions::new(n_max);
    o.ambient_max = n_max.min(cfg.dense_cap);
    o.memory_budget_mb = cfg.memory_budget_mb;
    Levels::build(ctx, &o)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Weight table and alcove bookkeeping checks.
pub fn alcove_checks(ctx: &QContext) -> (String, Vec<CheckReport>) {
    let ws = enumerate_alcove(ctx);
    let th = thresholds(ctx);
    let mut table = format!("alcove (N={}, ell={}): {} weights, m = {}, m~ = {}\n", ctx.n, ctx.ell, ws.len(), th.m, th.m_tilde);
    table.push_str("weight\tdeg\tconj\tdim\n");
    for w in &ws {
        table.push_str(&format!("{:?}\t{}\t{:?}\t{}\n", w.parts, w.deg(), conjugate(w).parts, dim_classical(w)));
    }
    let cov = format!("{} weights", ws.len());
    let expected = binomial(ctx.ell - 1, ctx.n - 1);
    let mut out = vec![timed(|| {
        CheckReport::predicate("alcove-count", ws.len() == expected, ws.len() as f64, format!("expected {expected}"))
    })];
    out.push(timed(|| {
        let ok = ws.iter().all(|w| {
            let c = conjugate(w);
            in_open_alcove(ctx, &c) && conjugate(&c) == *w && w.deg() + c.deg() == ctx.n as i64 * w.first()
        });
        CheckReport::predicate("alcove-conjugation", ok, 0.0, cov.clone())
    }));
    (table, out)
}

/// Fusion rules and truncated multiplicities up to level `top`.
pub fn fuse_checks(ctx: &QContext, top: usize) -> (String, Vec<CheckReport>) {
    let ws = enumerate_alcove(ctx);
    let mut table = String::from("weight\tkept\tnegligible\n");
    let mut steps_ok = true;
    for w in &ws {
        match fusion_step(ctx, w) {
            Ok(s) => {
                let kept: Vec<_> = s.kept.iter().map(|k| k.parts.clone()).collect();
                let neg: Vec<_> = s.negligible.iter().map(|k| k.parts.clone()).collect();
                table.push_str(&format!("{:?}\t{:?}\t{:?}\n", w.parts, kept, neg));
                let mut all: Vec<Weight> = s.kept.iter().chain(&s.negligible).cloned().collect();
                all.sort();
                steps_ok &= all == classical_successors(w)
                    && s.kept.iter().all(|k| in_open_alcove(ctx, k))
                    && !s.negligible.iter().any(|k| in_open_alcove(ctx, k));
            }
            Err(_) => steps_ok = false,
        }
    }
    table.push_str("level\tdim\tmultiplicities\n");
    let dims = oracle_dims(ctx, top);
    let mut bound_ok = true;
    let mut classical_ok = true;
    let stable = ctx.ell - ctx.n;
    for (n, &d) in dims.iter().enumerate() {
        let m = truncated_power_multiplicities(ctx, n);
        let ms: Vec<String> = m.iter().map(|(w, k)| format!("{:?}:{k}", w.parts)).collect();
        table.push_str(&format!("{n}\t{d}\t{}\n", ms.join(" ")));
        let full = ctx.n.pow(n as u32);
        bound_ok &= d <= full;
        if n <= stable {
            classical_ok &= m == classical_power_multiplicities(&Weight::zero(ctx.n), n) && d == full;
        }
    }
    let cov = format!("levels 0..={top}");
    let out = vec![
        CheckReport::predicate("fusion-successors", steps_ok, 0.0, format!("{} weights", ws.len())),
        CheckReport::predicate("fusion-classical-agreement", classical_ok, 0.0, format!("levels 0..={}", stable.min(top))),
        CheckReport::predicate("fusion-dimension-bound", bound_ok, 0.0, cov),
    ];
    (table, out)
}

/// Hecke, braid, Yang–Baxter and R, R̄, Θ, σ identities on small tensor powers.
pub fn algebra_checks(ctx: &QContext, legs: usize, tol: f64) -> Vec<CheckReport> {
    let legs = legs.clamp(2, 4);
    let nn = ctx.n;
    let mut out = Vec::new();
    let lv_ops = braiding::BraidOperators::new(ctx);
    out.push(timed(|| {
        let r = (2..=legs).map(|k| hecke_relation_residual(ctx, &lv_ops, k)).fold(0.0, f64::max);
        CheckReport::residual("hecke-braid-relations", r, tol, format!("V^⊗n, n ≤ {legs}"))
    }));
    let r = r_matrix(ctx);
    let sw = flip(nn);
    out.push(timed(|| CheckReport::residual("yang-baxter", yang_baxter_residual(ctx, &r), tol, "V^⊗3")));
    out.push(timed(|| {
        let r21 = mm(&mm(&sw, &r), &sw);
        CheckReport::residual("r-unitarity", linalg::id_residual(&mm(&r.adjoint(), &r21)), tol, "R* R_21 = 1")
    }));
    out.push(timed_result("rbar-selfadjoint-involutive", || {
        let rb = rbar_full(ctx, 2)?;
        let rb21 = mm(&mm(&sw, &rb), &sw);
        let res = linalg::herm_residual(&rb).max(linalg::id_residual(&mm(&rb, &rb21)));
        Ok(CheckReport::residual("rbar-selfadjoint-involutive", res, tol, "V⊗V"))
    }));
    out.push(timed_result("theta-commutation", || {
        let rb = rbar_full(ctx, 2)?;
        let th = mm(&linalg::inverse(&r)?, &rb);
        let th21 = mm(&mm(&sw, &th), &sw);
        let res = diff_abs(&mm(&th21, &r), &mm(&r, &th));
        Ok(CheckReport::residual("theta-commutation", res, tol, "V⊗V"))
    }));
    out.push(timed(|| {
        let mut worst = 0.0f64;
        let mut done = Vec::new();
        let mut skipped = Vec::new();
        for k in 2..=legs {
            match braiding::coboundary_sigma(ctx, k) {
                Ok(s) => {
                    worst = worst.max(linalg::id_residual(&mm(&s, &s)));
                    done.push(k);
                }
                Err(FusionError::BranchCollision { .. }) => skipped.push(k),
                Err(e) => return CheckReport::from_error("sigma-involution", &e),
            }
        }
        let mut cov = format!("n = {done:?}");
        if !skipped.is_empty() {
            cov.push_str(&format!("; branch collision at n = {skipped:?}"));
        }
        CheckReport::residual("sigma-involution", worst, tol, cov)
    }));
    out
}

/// The smallest truncation: [2]_q = 1, p_2 = SS*, and failure of right coherence at level 3.
pub fn level_three_example(lv: &Levels) -> Vec<CheckReport> {
    let ctx = lv.ctx;
    let q = ctx.q();
    let mut out = vec![timed(|| {
        let r = ((q + q.inv()) - C64::new(1.0, 0.0)).norm();
        CheckReport::residual("qint-two-is-one", r, 1e-12, "[2]_q at ell = 3")
    })];
    out.push(timed_result("p2-is-determinant-projection", || {
        let s = hecke::quantum_determinant(&ctx);
        let p2 = lv.p_ambient(2)?;
        let r = diff_abs(&p2, &mm(&s, &hecke::determinant_adjoint(&ctx, &s)?));
        Ok(CheckReport::residual("p2-is-determinant-projection", r, 1e-9, "V⊗V"))
    }));
    out.push(timed_result("right-coherence-defect", || {
        let (defect, _) = right_coherence_defect(lv, 3)?;
        Ok(CheckReport::predicate("right-coherence-defect", defect > 0.1, defect, "‖p_3(1⊗p_2) − p_3‖ > 0.1"))
    }));
    out.push(timed_result("right-coherence-absorbed", || {
        let (_, absorbed) = right_coherence_defect(lv, 3)?;
        Ok(CheckReport::residual("right-coherence-absorbed", absorbed, 1e-9, "p_3(1⊗p_2)p_3 = p_3"))
    }));
    out
}

/// Level suite over levels 0..=top of `lv`.
pub fn level_checks(lv: &Levels, top: usize, cfg: &RunConfig) -> Vec<CheckReport> {
    let ctx = lv.ctx;
    let mut out = algebra_checks(&ctx, cfg.dense_cap, cfg.tol);
    if (ctx.n, ctx.ell) == (2, 3) && lv.n_max() >= 3 && lv.ambient_max() >= 3 {
        out.extend(level_three_example(lv));
    }
    for n in 0..=top.min(lv.n_max()) {
        for mut r in verify_level(lv, n, cfg.dense_cap, cfg.seed, cfg.tol) {
            r.id = format!("{}@{n}", r.id);
            out.push(r);
        }
    }
    let small = lv.ambient_max().min(top).min(4);
    out.push(timed(|| {
        let mut worst = 0.0f64;
        let mut done = Vec::new();
        let mut skipped = Vec::new();
        for n in 2..=small {
            match form_consistency(lv, n) {
                Ok(r) => {
                    worst = worst.max(r);
                    done.push(n);
                }
                Err(FusionError::BranchCollision { .. }) => skipped.push(n),
                Err(e) => return CheckReport::from_error("wenzl-form-consistency", &e),
            }
        }
        let mut cov = format!("n = {done:?}");
        if !skipped.is_empty() {
            cov.push_str(&format!("; branch collision at n = {skipped:?}"));
        }
        CheckReport::residual("wenzl-form-consistency", worst, cfg.tol, cov)
    }));
    out.push(timed(|| {
        let mut worst = 0.0f64;
        let mut done = Vec::new();
        for n in 1..=small {
            let (Ok(a), Ok(b)) = (lv.tau(n), lv.tau_from_rbar(n)) else { continue };
            worst = worst.max(diff_abs(&a, &b));
            done.push(n);
        }
        CheckReport::residual("tau-two-routes", worst, cfg.tol, format!("n = {done:?}"))
    }));
    out
}

/// Groupoid axiom suite plus section independence against a seeded alternative section.
pub fn groupoid_checks(lv: &Levels, cfg: &RunConfig) -> Vec<CheckReport> {
    let opts = GroupoidOptions {
        seed: cfg.seed,
        tol: cfg.structural_tol(),
        memory_budget_mb: cfg.memory_budget_mb,
        dense_cap: cfg.dense_cap,
        ..GroupoidOptions::default()
    };
    let g = match Groupoid::with_default_section(lv) {
        Ok(g) => g,
        Err(e) => return vec![CheckReport::from_error("section-built", &e)],
    };
    let mut out = verify_groupoid(&g, &opts);
    match build_section(lv, SectionPolicy::Seeded(cfg.seed.wrapping_add(1))) {
        Ok(s) => out.push(compare_sections(&g, &Groupoid::new(lv, s), &opts)),
        Err(e) => out.push(CheckReport::from_error("section-independence", &e)),
    }
    out
}

pub fn haar_checks(lv: &Levels, cfg: &RunConfig) -> Vec<CheckReport> {
    match Groupoid::with_default_section(lv) {
        Ok(g) => verify_haar(&HaarContext::new(&g), cfg.seed, cfg.tol),
        Err(e) => vec![CheckReport::from_error("section-built", &e)],
    }
}

pub fn appendix_checks(ctx: &QContext, lv: Option<&Levels>, cfg: &RunConfig) -> Vec<CheckReport> {
    let lv = lv.filter(|l| l.ambient_max() > ctx.n);
    verify_hecke(ctx, lv, cfg.structural_tol())
}

fn level_failure(e: &FusionError) -> Vec<CheckReport> {
    vec![CheckReport::from_error("level-built", e)]
}

/// Run one suite. Errors are configuration errors only; numeric failures land in the report.
pub fn run(cfg: &RunConfig, suite: Suite) -> Result<RunReport> {
    let ctx = cfg.ctx()?;
    if cfg.dense_cap == 0 {
        return Err(FusionError::Config("dense-cap must be positive".into()));
    }
    let top = cfg.level_top(&ctx);
    let gtop = cfg.groupoid_top(&ctx);
    let config = ConfigRecord {
        suite,
        n: cfg.n,
        ell: cfg.ell,
        max_power: top,
        groupoid_levels: gtop,
        m_tilde: thresholds(&ctx).m_tilde,
        tol: cfg.tol,
        dense_cap: cfg.dense_cap,
        memory_budget_mb: cfg.memory_budget_mb,
        seed: cfg.seed,
        rng: "chacha8",
    };
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Alcove) {
        let (t, c) = alcove_checks(&ctx);
        tables.push(t);
        checks.extend(c);
    }
    if want(Suite::Fuse) {
        let (t, c) = fuse_checks(&ctx, top);
        tables.push(t);
        checks.extend(c);
    }
    let n_max = match suite {
        Suite::Alcove | Suite::Fuse => None,
        Suite::Levels | Suite::Haar => Some(top),
        Suite::Groupoid => Some(gtop),
        Suite::Appendix => Some(ctx.n + 1),
        Suite::All => Some(top.max(gtop).max(ctx.n + 1)),
    };
    if let Some(n_max) = n_max {
        match build_levels(&ctx, cfg, n_max) {
            Ok(lv) => {
                if want(Suite::Levels) {
                    // the full run verifies every level it builds
                    let top = if suite == Suite::All { lv.n_max() } else { top };
                    tables.push(format!("level dims: {:?}\n", &lv.dims()[..=top.min(lv.n_max())]));
                    checks.extend(level_checks(&lv, top, cfg));
                }
                if want(Suite::Groupoid) {
                    checks.extend(groupoid_checks(&lv, cfg));
                }
                if want(Suite::Haar) {
                    checks.extend(haar_checks(&lv, cfg));
                }
                if want(Suite::Appendix) {
                    checks.extend(appendix_checks(&ctx, Some(&lv), cfg));
                }
            }
            Err(e) => checks.extend(level_failure(&e)),
        }
    }
    let summary = summarize(&checks);
    Ok(RunReport { config, tables, checks, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_dims_match_known_levels() {
        let ctx = QContext::new(2, 5).unwrap();
        assert_eq!(oracle_dims(&ctx, 8), vec![1, 2, 4, 8, 11, 22, 29, 58, 76]);
        let ctx = QContext::new(3, 4).unwrap();
        assert_eq!(oracle_dims(&ctx, 3), vec![1, 3, 3, 1]);
    }

    #[test]
    fn groupoid_caps_under_default_budget() {
        let cap = |n, ell| groupoid_memory_cap(&QContext::new(n, ell).unwrap(), 2048);
        assert_eq!(cap(3, 5), 9);
        for (n, ell) in [(2, 3), (2, 4), (3, 4), (2, 5)] {
            let ctx = QContext::new(n, ell).unwrap();
            assert_eq!(cap(n, ell), required_levels(&ctx, 4));
        }
    }

    #[test]
    fn default_max_power_is_m_tilde() {
        for (n, ell, mt) in [(2, 3, 3), (2, 4, 5), (3, 4, 5), (2, 5, 7), (3, 5, 8)] {
            let ctx = QContext::new(n, ell).unwrap();
            assert_eq!(RunConfig::new(n, ell).level_top(&ctx), mt);
        }
    }

    #[test]
    fn config_errors_are_rejected() {
        assert!(run(&RunConfig::new(1, 3), Suite::Alcove).is_err());
        assert!(run(&RunConfig::new(3, 3), Suite::Alcove).is_err());
    }

    #[test]
    fn alcove_and_fuse_reports() {
        let r = run(&RunConfig::new(2, 3), Suite::Alcove).unwrap();
        assert!(r.ok());
        assert!(r.tables[0].starts_with("alcove (N=2, ell=3): 2 weights"));
        let r = run(&RunConfig::new(3, 5), Suite::Fuse).unwrap();
        assert!(r.ok(), "{:?}", r.checks);
    }

    #[test]
    fn level_report_is_deterministic() {
        let cfg = RunConfig::new(2, 3);
        let strip = |r: RunReport| r.checks.into_iter().map(|c| (c.id, c.status, c.max_residual.to_bits())).collect::<Vec<_>>();
        let a = run(&cfg, Suite::Levels).unwrap();
        assert!(a.ok(), "{:?}", a.checks.iter().filter(|c| c.failed()).collect::<Vec<_>>());
        assert!(a.checks.iter().any(|c| c.id == "right-coherence-defect" && c.passed()));
        let b = run(&cfg, Suite::Levels).unwrap();
        assert_eq!(strip(a), strip(b));
    }
}
