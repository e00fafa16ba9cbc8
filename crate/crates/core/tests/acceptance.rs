//! Acceptance criteria over the five target configurations. Each criterion prints one
//! PASS/FAIL line with its pinned tolerance.

use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use fusionq::report::{CheckReport, Status};
use fusionq::suite::{run, RunConfig, RunReport, Suite};

const CONFIGS: [(usize, usize); 5] = [(2, 3), (2, 4), (3, 4), (2, 5), (3, 5)];
const SMALL: [(usize, usize); 3] = [(2, 3), (2, 4), (3, 4)];
const RUNTIME_LIMIT: Duration = Duration::from_secs(300);

struct Run {
    report: RunReport,
    elapsed: Duration,
}

static RUNS: [OnceLock<Run>; 5] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
static SERIAL: Mutex<()> = Mutex::new(());

/// Full suite for one configuration, computed once and shared by all criteria.
fn full(cfg: (usize, usize)) -> &'static Run {
    let i = CONFIGS.iter().position(|c| *c == cfg).expect("target config");
    RUNS[i].get_or_init(|| {
        let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
        let t = Instant::now();
        let report = run(&RunConfig::new(cfg.0, cfg.1), Suite::All).expect("valid config");
        Run { report, elapsed: t.elapsed() }
    })
}

/// Reports whose id is `base` or `base@level`.
fn matching<'a>(r: &'a RunReport, base: &str) -> Vec<&'a CheckReport> {
    r.checks
        .iter()
        .filter(|c| c.id == base || c.id.strip_prefix(base).is_some_and(|s| s.starts_with('@')))
        .collect()
}

#[derive(Default)]
struct Verdict {
    problems: Vec<String>,
    checked: usize,
}

impl Verdict {
    fn fail(&mut self, cfg: (usize, usize), c: &CheckReport, why: &str) {
        self.problems.push(format!("{cfg:?} {}: {why} (residual {:.3e}, {})", c.id, c.max_residual, c.coverage));
    }

    /// Every matching report passes (or is skipped with a reason), at least one passes,
    /// and each passing value satisfies `accept`.
    fn each(&mut self, cfg: (usize, usize), base: &str, accept: impl Fn(&CheckReport) -> bool, rule: &str) {
        let r = &full(cfg).report;
        let cs = matching(r, base);
        if !cs.iter().any(|c| c.status == Status::Pass) {
            self.problems.push(format!("{cfg:?} {base}: no passing report"));
        }
        for c in cs {
            match c.status {
                Status::Fail => self.fail(cfg, c, "failed"),
                Status::Skipped if c.coverage.is_empty() => self.fail(cfg, c, "skipped without a reason"),
                Status::Skipped => {}
                Status::Pass => {
                    self.checked += 1;
                    if !accept(c) {
                        self.fail(cfg, c, rule);
                    }
                }
            }
        }
    }

    fn below(&mut self, cfgs: &[(usize, usize)], ids: &[&str], bound: f64) {
        for &cfg in cfgs {
            for id in ids {
                self.each(cfg, id, |c| c.max_residual < bound, &format!("residual ≥ {bound:e}"));
            }
        }
    }

    fn above(&mut self, cfgs: &[(usize, usize)], id: &str, bound: f64) {
        for &cfg in cfgs {
            self.each(cfg, id, |c| c.max_residual > bound, &format!("value ≤ {bound:e}"));
        }
    }

    fn holds(&mut self, cfgs: &[(usize, usize)], ids: &[&str]) {
        for &cfg in cfgs {
            for id in ids {
                self.each(cfg, id, |_| true, "");
            }
        }
    }

    fn report(self, number: usize, title: &str, tolerance: &str) {
        let ok = self.problems.is_empty();
        let line = format!(
            "criterion {number:>2} [{}] {title} ({tolerance}; {} reports)",
            if ok { "PASS" } else { "FAIL" },
            self.checked
        );
        // written past the test harness capture so every line shows in the log
        let _ = writeln!(std::io::stderr(), "{line}");
        assert!(ok, "{line}\n{}", self.problems.join("\n"));
    }
}

#[test]
fn criterion_01_smallest_truncation() {
    let mut v = Verdict::default();
    let cfg = [(2, 3)];
    v.below(&cfg, &["qint-two-is-one"], 1e-12);
    v.below(&cfg, &["p2-is-determinant-projection", "right-coherence-absorbed"], 1e-9);
    v.above(&cfg, "right-coherence-defect", 0.1);
    v.report(1, "[2]_q = 1, p_2 = SS*, right coherence fails but is absorbed", "1e-12 / 1e-9 / defect > 0.1");
}

#[test]
fn criterion_02_algebraic_relations() {
    let mut v = Verdict::default();
    let ids = [
        "hecke-braid-relations",
        "yang-baxter",
        "r-unitarity",
        "rbar-selfadjoint-involutive",
        "theta-commutation",
        "sigma-involution",
    ];
    v.below(&CONFIGS, &ids, 1e-9);
    v.report(2, "Hecke, braid, Yang–Baxter, R, R̄, Θ and σ relations", "residual < 1e-9");
}

#[test]
fn criterion_03_positivity() {
    let mut v = Verdict::default();
    v.above(&CONFIGS, "form-positivity", 1e-8);
    v.below(&CONFIGS, &["projection-selfadjoint"], 1e-9);
    v.report(3, "Wenzl form positive on every level, projections selfadjoint", "min eig > 1e-8, residual < 1e-9");
}

#[test]
fn criterion_04_fusion_oracle() {
    let mut v = Verdict::default();
    v.holds(&CONFIGS, &["level-multiplicities", "fusion-successors", "fusion-classical-agreement", "fusion-dimension-bound"]);
    v.report(4, "block multiplicities and Weyl dimensions match the weight oracle", "exact");
}

#[test]
fn criterion_05_level_identities() {
    let mut v = Verdict::default();
    let ids = [
        "level-maps-isometric",
        "arrow-compatibility",
        "braiding-unitary",
        "braiding-natural",
        "braid-relations-compressed",
        "left-coherence",
        "compression-functorial",
        "middle-absorption",
        "negligible-kill",
        "tau-involution",
        "tau-two-routes",
        "wenzl-form-consistency",
    ];
    v.below(&CONFIGS, &ids, 1e-9);
    v.report(5, "level maps, compressed braidings and τ", "residual < 1e-9");
}

#[test]
fn criterion_06_groupoid_axioms() {
    let mut v = Verdict::default();
    let ids = [
        "section-isometric",
        "coproduct-unit",
        "unit-idempotent",
        "coproduct-multiplicative",
        "coproduct-support",
        "antipode-antimultiplicative",
        "antipode-star",
        "antipode-square",
        "antipode-on-generators",
        "antipode-axiom",
        "associator-idempotent",
        "associator-support",
        "associator-quasi-inverse",
        "associator-intertwining",
        "associator-from-units",
        "r-support",
        "r-intertwining",
        "r-block-braiding",
        "pi-coproduct",
        "pi-star",
        "coproduct-star",
        "cstar-identity",
        "iterated-coproduct-reduction",
    ];
    v.below(&CONFIGS, &ids, 1e-8);
    v.holds(&CONFIGS, &["unit-not-identity", "pi-surjective"]);
    v.above(&CONFIGS, "coproduct-strictness", 1e-3);
    v.report(6, "groupoid axioms and the strictness witness", "residual < 1e-8, witness > 1e-3");
}

#[test]
fn criterion_07_cocycle_and_counit() {
    let mut v = Verdict::default();
    v.below(&SMALL, &["cocycle", "cocycle-counit", "counit-property", "counit-multiplicative"], 1e-8);
    for cfg in SMALL {
        for c in matching(&full(cfg).report, "cocycle") {
            let (used, total) = c.coverage.split_once(' ').and_then(|(f, _)| f.split_once('/')).unwrap_or(("?", "!"));
            if used != total {
                v.fail(cfg, c, "not every order-4 tuple covered");
            }
        }
    }
    v.report(7, "cocycle and counit over all order-4 tuples", "residual < 1e-8, full coverage");
}

#[test]
fn criterion_08_tensor_equivalence() {
    let mut v = Verdict::default();
    v.below(&CONFIGS, &["tensor-structure", "tensor-hexagon"], 1e-8);
    v.above(&CONFIGS, "rep-positivity", 1e-8);
    v.holds(&CONFIGS, &["functor-full"]);
    v.report(8, "tensor structure and positivity of the iterated-coproduct supports", "residual < 1e-8, min eig > 1e-8");
}

#[test]
fn criterion_09_haar() {
    let mut v = Verdict::default();
    for cfg in CONFIGS {
        v.each(cfg, "haar-unit", |c| c.max_residual == 0.0, "h(I) ≠ 1 exactly");
    }
    let ids = [
        "haar-nontrivial-blocks",
        "haar-annihilation-arrows",
        "haar-annihilation-negligible",
        "haar-orthogonality",
        "conjugation-vector",
        "trivial-projection-central",
    ];
    v.below(&CONFIGS, &ids, 1e-9);
    v.holds(&CONFIGS, &["haar-trivial-free-negligible", "haar-no-early-negligible", "cosemisimple-degree"]);
    v.above(&CONFIGS, "cosemisimple-rank", 1e-6);
    v.report(9, "Haar functional and cosemisimplicity certificate", "exact unit, residual < 1e-9, sv ratio > 1e-6");
}

#[test]
fn criterion_10_hecke() {
    let mut v = Verdict::default();
    let ids = [
        "antisymmetrizer-absorbs",
        "antisymmetrizer-square",
        "antisymmetrizer-vanishes",
        "determinant-antisymmetric",
        "determinant-norms",
        "determinant-norms-levels",
        "conjugate-equations",
        "determinant-generates",
        "schur-weyl",
    ];
    v.below(&CONFIGS, &ids, 1e-8);
    v.report(10, "antisymmetrizers, quantum determinant and conjugate equations", "residual < 1e-8");
}

#[test]
fn criterion_11_section_independence() {
    let mut v = Verdict::default();
    v.below(&[(2, 4)], &["section-independence"], 1e-8);
    v.report(11, "default and seeded sections give the same twisted coproduct", "residual < 1e-8");
}

#[test]
fn full_suites_fit_the_runtime_budget() {
    for cfg in CONFIGS {
        let r = full(cfg);
        let _ = writeln!(std::io::stderr(), "{cfg:?}: {} checks in {:.1?}", r.report.checks.len(), r.elapsed);
        assert!(r.report.ok(), "{cfg:?} has failing checks");
        assert!(r.elapsed < RUNTIME_LIMIT, "{cfg:?} took {:?}", r.elapsed);
    }
}
