//! The acceptance criteria, one printed line each. Run with
//! `cargo test -p ogp-core --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::BTreeSet;

use common::decorate::{compare, random_case, Tally};
use common::rules::{instance, ALL};
use common::{all_valuations, big_step, corpus, corpus_all, e, never_blocks, pick_seed_count, report, Gen, VAL_CAP};
use ogp_core::expr::Expr;
use ogp_core::frontend::parse_expr;
use ogp_core::lang::{ProofNode, Rule, Stmt, StmtKind};
use ogp_core::model::Model;
use ogp_core::obligation::Obligation;
use ogp_core::oracle::{build_state_space, raw, DEFAULT_STATE_CAP};
use ogp_core::predicate::{evaluate, substitute, valid, Universe, Valuation};
use ogp_core::progress::check_script;
use ogp_core::report::check_program;
use ogp_core::safety::{check_global, check_invariant, check_local, check_postcondition, check_safety};
use ogp_core::transformer::{guard_conjunction_split, progress_equivalence, SplitRequest};
use ogp_core::wlp::{hoare_holds, wlp, wlp_plain, wp_atomic};

fn all_ok(obs: &[Obligation]) -> bool {
    obs.iter().all(|o| o.verdict.is_valid())
}

fn failing(obs: &[Obligation]) -> Vec<String> {
    obs.iter().filter(|o| !o.verdict.is_valid()).map(|o| o.id.clone()).collect()
}

fn is_valid(u: &Universe, p: &Expr) -> bool {
    valid(u, p, VAL_CAP).unwrap().is_valid()
}

fn program_one() -> (bool, String) {
    let m = corpus("program1.ogp");
    let (lc, gc) = (check_local(&m, VAL_CAP), check_global(&m, VAL_CAP));
    let post = check_postcondition(&m, "done", &e("x == 3"), VAL_CAP);
    let weak = corpus("program1_local.ogp");
    let weak_gc = failing(&check_global(&weak, VAL_CAP));
    let ok = all_ok(&lc) && all_ok(&gc) && post.verdict.is_valid() && all_ok(&check_local(&weak, VAL_CAP)) && !weak_gc.is_empty();
    let detail = format!(
        "LC {}/{} valid, GC {}/{} valid, postcondition x == 3 {}; unweakened annotation fails GC at {}",
        lc.len() - failing(&lc).len(),
        lc.len(),
        gc.len() - failing(&gc).len(),
        gc.len(),
        post.verdict.word(),
        weak_gc.join(", ")
    );
    (ok, detail)
}

fn programs_two_three() -> (bool, String) {
    let p3 = corpus("program3.ogp");
    let safety = check_safety(&p3, VAL_CAP);
    let post = check_postcondition(&p3, "done", &e("x == 2"), VAL_CAP);
    let mut ok = safety.annotation_verified() && post.verdict.is_valid();
    let mut parts = vec![format!("program3 annotation {} obligations valid, postcondition {}", safety.obligations.len(), post.verdict.word())];
    for name in ["program2.ogp", "program3.ogp"] {
        let m = corpus(name);
        let ts = build_state_space(&m, DEFAULT_STATE_CAP).unwrap();
        let holds = ts.check_postcondition(&m.universe, &e("x == 2")).unwrap().is_none();
        let iso = raw::isomorphic_to(&m, &ts, DEFAULT_STATE_CAP).unwrap();
        ok &= holds && iso;
        parts.push(format!("{name}: oracle postcondition {holds}, raw isomorphic {iso}"));
    }
    (ok, parts.join("; "))
}

fn immediate_labels(n: &ProofNode, out: &mut BTreeSet<String>, rules: &mut BTreeSet<&'static str>) {
    rules.insert(n.rule.name());
    match &n.rule {
        Rule::Immediate(l) => {
            out.insert(l.clone());
        }
        Rule::Transitivity { first, second, .. } | Rule::Cancellation { first, second, .. } => {
            immediate_labels(first, out, rules);
            immediate_labels(second, out, rules);
        }
        Rule::Disjunction(cases) | Rule::Completion { cases, .. } => {
            cases.iter().for_each(|(_, c)| immediate_labels(c, out, rules));
        }
        Rule::DisjunctionTheorem(subs) => subs.iter().for_each(|c| immediate_labels(c, out, rules)),
        Rule::Impossibility(sub) | Rule::Psp { sub, .. } => immediate_labels(sub, out, rules),
        Rule::DisjunctionRange { template, .. } | Rule::Induction { template, .. } => immediate_labels(template, out, rules),
        Rule::Implication => {}
    }
}

fn refinement_two() -> (bool, String) {
    let m = corpus("init_refinement2.ogp");
    let ts = build_state_space(&m, DEFAULT_STATE_CAP).unwrap();
    let run = check_program(&m, None, VAL_CAP).unwrap();
    let mut ok = run.safety.annotation_verified();
    let mut parts = Vec::new();
    for (name, labels) in [("P1", ["X.2", "Y.1", "Y.2", "Y.4"]), ("P2", ["Y.2", "X.1", "X.2", "X.4"])] {
        let script = m.program.proofs.iter().find(|s| s.property == name).unwrap();
        let r = check_script(&m, script, VAL_CAP).unwrap();
        let (mut imm, mut rules) = (BTreeSet::new(), BTreeSet::new());
        immediate_labels(&script.root, &mut imm, &mut rules);
        let shaped = labels.iter().all(|l| imm.contains(*l)) && rules.contains("disjunction") && rules.contains("implication");
        let (p, q) = match &m.program.property(name).unwrap().kind {
            ogp_core::lang::PropertyKind::LeadsTo(p, q) => (p.clone(), q.clone()),
            _ => unreachable!(),
        };
        let oracle = ts.check_leadsto(&m.universe, &p, &q).unwrap().holds;
        ok &= r.holds() && shaped && oracle;
        parts.push(format!(
            "{name} script {} ({} nodes, immediate at {}), oracle {oracle}",
            if r.holds() { "verified" } else { "failed" },
            r.nodes.len(),
            imm.into_iter().collect::<Vec<_>>().join(" ")
        ));
    }
    let unless = run.properties.iter().find(|p| p.name == "stable_x").unwrap().discharged();
    let eq8 = e("pc.Y == Y.5 ==> y");
    let strengthened = run.properties.iter().find(|p| p.name == "done_y").unwrap().discharged();
    let done_y = match &m.program.property("done_y").unwrap().kind {
        ogp_core::lang::PropertyKind::Invariant(i) => i.clone(),
        _ => unreachable!(),
    };
    let entails = is_valid(&m.universe, &Expr::implies(done_y, eq8.clone()));
    let alone = failing(&check_invariant(&m, "eq8", &eq8, VAL_CAP));
    let eq8_oracle = ts.check_invariant(&m.universe, &eq8).unwrap().is_none();
    let deadlock_free = ts.deadlock().is_none();
    ok &= unless && strengthened && entails && alone == ["INV:eq8/X.1"] && eq8_oracle && deadlock_free;
    parts.push(format!(
        "unless {unless}; invariant pc.Y == Y.5 ==> y via strengthened form {strengthened}, alone fails at {}, oracle {eq8_oracle}; deadlock-free {deadlock_free}",
        alone.join(",")
    ));
    (ok, parts.join("; "))
}

fn negative_controls() -> (bool, String) {
    let s = corpus("init_simplified.ogp");
    let r = check_script(&s, &s.program.proofs[0], VAL_CAP).unwrap();
    let bad = failing(&r.obligations().cloned().collect::<Vec<_>>());
    let ts = build_state_space(&s, DEFAULT_STATE_CAP).unwrap();
    let dead = ts.deadlock();
    let stuck = dead.is_some_and(|d| {
        let v = ts.valuation(d);
        ["pc.X == X.2 && pc.Y == Y.2 && !x && !y"].iter().all(|p| evaluate(&s.universe, &e(p), &v).unwrap())
    });
    let p1 = ts.check_leadsto(&s.universe, &e("pc.X == X.2"), &e("pc.X == X.3")).unwrap();
    let f = corpus("init_failed_alternative.ogp");
    let gc = check_global(&f, VAL_CAP);
    let lc = check_local(&f, VAL_CAP);
    let gc_bad = failing(&gc);
    let lc_ok = lc.iter().filter(|o| o.id.starts_with("LC:Y.5#2/")).all(|o| o.verdict.is_valid());
    let fts = build_state_space(&f, DEFAULT_STATE_CAP).unwrap();
    let violated = fts.check_assertions(&f).unwrap().iter().any(|v| v.label == "Y.5" && v.index == 1);
    let ok = !r.holds()
        && bad.iter().any(|id| id.ends_with("IMM2/Y.2"))
        && stuck
        && !p1.holds
        && gc_bad.iter().any(|id| id == "GC:Y.5#2/X.6")
        && lc_ok
        && violated;
    let detail = format!(
        "simplified: script fails at {}, oracle deadlock {}; failed alternative: GC fails at {}, LC of that assertion valid {lc_ok}, oracle violation {violated}",
        bad.join(","),
        dead.map(|d| ts.render_state(&s.universe, d)).unwrap_or_else(|| "none".into()),
        gc_bad.join(",")
    );
    (ok, detail)
}

fn guard_split() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, label, hoist, expect) in [
        ("gcl_demo.ogp", "A.1", "b", true),
        ("gcl_mutual.ogp", "A.2", "c", true),
        ("gcl_toggle.ogp", "A.1", "b", true),
        ("gcl_sabotaged.ogp", "A.1", "b", false),
    ] {
        let before = ogp_core::frontend::load(&common::corpus_dir().join(name)).unwrap();
        let req = SplitRequest { label: label.into(), hoist: parse_expr(hoist).unwrap(), fresh: None };
        let split = guard_conjunction_split(&before, &req, VAL_CAP).unwrap();
        let (mb, ma) = (Model::new(&before).unwrap(), Model::new(&split.program).unwrap());
        let h = progress_equivalence(&mb, &ma, DEFAULT_STATE_CAP).unwrap();
        let diverge = h.divergences().count();
        let progress_diverges = h.divergences().any(|c| c.property.contains("leadsto") || c.property == "deadlock-free");
        ok &= if expect { split.justified() && h.equivalent() } else { !split.justified() && progress_diverges };
        parts.push(format!(
            "{name}: side condition {}, {} verdicts, {diverge} diverge",
            if split.justified() { "valid" } else { "fails" },
            h.comparisons.len()
        ));
    }
    (ok, parts.join("; "))
}

fn derived_rules() -> (bool, String) {
    let n = pick_seed_count(200);
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, rule) in ALL.iter().enumerate() {
        let (mut premised, mut violations) = (0, Vec::new());
        for seed in 0..n as u64 {
            let inst = instance(*rule, 1_000_000 * k as u64 + seed);
            premised += inst.premises as usize;
            if inst.violated() {
                violations.push(format!("{}\n{}", inst.statement, inst.program));
            }
        }
        if let Some(v) = violations.first() {
            eprintln!("{rule:?} violated:\n{v}");
        }
        ok &= violations.is_empty();
        parts.push(format!("{rule:?} {premised}/{n} premised, {} violations", violations.len()));
    }
    (ok, parts.join("; "))
}

fn checker_soundness() -> (bool, String) {
    let mut total = Tally::default();
    let mut programs = 0;
    for (name, program) in corpus_all() {
        let m = Model::new(&program).unwrap();
        let ts = build_state_space(&m, DEFAULT_STATE_CAP).unwrap();
        total.add(&compare(&m, &ts, &name));
        programs += 1;
    }
    for seed in 0..pick_seed_count(500) as u64 {
        let (t, text) = random_case(seed);
        if !t.violations.is_empty() {
            eprintln!("{:?}\n{text}", t.violations);
        }
        total.add(&t);
        programs += 1;
    }
    let detail = format!("{programs} programs; discharged: {}; {} violations", total.summary(), total.violations.len());
    (total.violations.is_empty(), detail)
}

/// The next label after top-level statement `k` of component `c`.
fn next_label(m: &Model, c: usize, k: usize) -> String {
    let comp = &m.program.components[c];
    match comp.body.stmts.get(k + 1) {
        Some(s) => comp.full_label(s.label.as_ref().unwrap()),
        None => comp.final_full_label().unwrap(),
    }
}

fn assignments(s: &Stmt, out: &mut Vec<Vec<(String, Expr)>>) {
    match &s.kind {
        StmtKind::Assign(pairs) => out.push(pairs.clone()),
        StmtKind::Atomic(b) => b.stmts.iter().for_each(|s| assignments(s, out)),
        StmtKind::If(bs) | StmtKind::Do(bs) => bs.iter().for_each(|br| br.body.stmts.iter().for_each(|s| assignments(s, out))),
        StmtKind::Skip => {}
    }
}

fn with_pc(u: &Universe, v: &Valuation, pc: &str, label: &str) -> Valuation {
    let mut w = v.clone();
    w.0[u.slot(pc).unwrap()] = u.label_code(label).unwrap();
    w
}

#[derive(Default)]
struct WlpCounts {
    statements: usize,
    conjunctive: usize,
    monotone: usize,
    substitution: usize,
    hoare: usize,
    atomic: usize,
    violations: Vec<String>,
}

fn wlp_case(g: &mut Gen, counts: &mut WlpCounts) {
    let r = g.program(5, false);
    let m = &r.model;
    let u = &m.universe;
    let vals = all_valuations(u);
    for (c, comp) in m.program.components.iter().enumerate() {
        for (k, s) in comp.body.stmts.iter().enumerate() {
            counts.statements += 1;
            let here = comp.full_label(s.label.as_ref().unwrap());
            let next = next_label(m, c, k);
            let (p, q, rr) = (g.pred(m, &r.vars, 2), g.pred(m, &r.vars, 2), g.pred(m, &r.vars, 2));
            let w = |post: &Expr| wlp(comp, s, &next, post).unwrap();
            let tag = format!("{here} in\n{}", r.text);

            let conj = Expr::iff(w(&Expr::and(q.clone(), rr.clone())), Expr::and(w(&q), w(&rr)));
            counts.conjunctive += 1;
            if !is_valid(u, &conj) {
                counts.violations.push(format!("conjunctivity at {tag}"));
            }
            let mono = Expr::implies(w(&q), w(&Expr::or(q.clone(), rr.clone())));
            counts.monotone += 1;
            if !is_valid(u, &mono) {
                counts.violations.push(format!("monotonicity at {tag}"));
            }

            let mut assigns = Vec::new();
            assignments(s, &mut assigns);
            for pairs in &assigns {
                let sub = substitute(&q, pairs).unwrap();
                counts.substitution += 1;
                for v in &vals {
                    let mut after = v.clone();
                    for (x, rhs) in pairs {
                        after.0[u.slot(x).unwrap()] = u.compile(rhs).unwrap().eval(&v.0).unwrap();
                    }
                    if evaluate(u, &sub, v).unwrap() != evaluate(u, &q, &after).unwrap() {
                        counts.violations.push(format!("substitution for {pairs:?} at {tag}"));
                        break;
                    }
                }
            }

            let claimed = hoare_holds(u, comp, s, &next, &p, &q, VAL_CAP).unwrap().is_valid();
            let block = ogp_core::lang::Block::new(vec![s.clone()]);
            let actual = vals.iter().filter(|v| evaluate(u, &p, v).unwrap()).all(|v| {
                big_step(u, &block, v.clone()).iter().all(|w| evaluate(u, &q, &with_pc(u, w, &comp.pc(), &next)).unwrap())
            });
            counts.hoare += 1;
            if claimed != actual {
                counts.violations.push(format!("hoare_holds {claimed} vs {actual} for {{{p}}} {here} {{{q}}} in\n{}", r.text));
            }

            if let StmtKind::Atomic(body) = &s.kind {
                counts.atomic += 1;
                let strong = wp_atomic(body, &q).unwrap();
                let weak = wlp_plain(body, &q).unwrap();
                if !is_valid(u, &Expr::implies(strong.clone(), weak.clone())) {
                    counts.violations.push(format!("wp not stronger than wlp at {tag}"));
                }
                for v in &vals {
                    let runs = big_step(u, body, v.clone());
                    let all_q = runs.iter().all(|w| evaluate(u, &q, w).unwrap());
                    let total = never_blocks(u, body, v) && all_q;
                    if evaluate(u, &strong, v).unwrap() != total || evaluate(u, &weak, v).unwrap() != all_q {
                        counts.violations.push(format!("atomic wp/wlp disagree at {tag}"));
                        break;
                    }
                }
            }
        }
    }
}

fn wlp_suite() -> (bool, String) {
    let target = pick_seed_count(500);
    let mut g = Gen::new(0x5eed_0008);
    let mut counts = WlpCounts::default();
    while counts.statements < target {
        wlp_case(&mut g, &mut counts);
    }
    if let Some(v) = counts.violations.first() {
        eprintln!("{v}");
    }
    let detail = format!(
        "{} statements: conjunctivity {}, monotonicity {}, substitution {}, hoare_holds {}, atomic wp/wlp {}; {} violations",
        counts.statements,
        counts.conjunctive,
        counts.monotone,
        counts.substitution,
        counts.hoare,
        counts.atomic,
        counts.violations.len()
    );
    (counts.violations.is_empty(), detail)
}

/// Exactly one active control point per component in every reachable
/// state, and steps of one component never move another's counter.
fn control_state(m: &Model, ts: &ogp_core::oracle::TransitionSystem) -> (usize, usize, Vec<String>) {
    let u = &m.universe;
    let mut bad = Vec::new();
    let atoms: Vec<(usize, Vec<Expr>)> = m
        .program
        .components
        .iter()
        .enumerate()
        .map(|(c, comp)| (c, comp.labels().iter().map(|l| m.at(l)).collect()))
        .collect();
    for s in 0..ts.len() {
        let v = ts.valuation(s);
        for (c, ats) in &atoms {
            let active = ats.iter().filter(|a| evaluate(u, a, &v).unwrap()).count();
            if active != 1 {
                bad.push(format!("state {s}: {active} active control points in component {c}"));
            }
        }
        for t in &ts.succ[s] {
            for (c, &slot) in ts.pc_slots.iter().enumerate() {
                if c != t.component && ts.states[s][slot] != ts.states[t.to][slot] {
                    bad.push(format!("state {s}: component {} moved the counter of {c}", t.component));
                }
            }
        }
    }
    (ts.len(), ts.transition_count(), bad)
}

fn control_facts() -> (bool, String) {
    let (mut states, mut transitions, mut bad, mut programs) = (0, 0, Vec::new(), 0);
    for (_, program) in corpus_all() {
        let m = Model::new(&program).unwrap();
        let ts = build_state_space(&m, DEFAULT_STATE_CAP).unwrap();
        let (s, t, b) = control_state(&m, &ts);
        (states, transitions, programs) = (states + s, transitions + t, programs + 1);
        bad.extend(b);
    }
    let mut g = Gen::new(0x5eed_0009);
    for _ in 0..pick_seed_count(100) {
        let r = g.program(5, true);
        let (s, t, b) = control_state(&r.model, &r.ts);
        (states, transitions, programs) = (states + s, transitions + t, programs + 1);
        bad.extend(b);
    }
    if let Some(b) = bad.first() {
        eprintln!("{b}");
    }
    (bad.is_empty(), format!("{programs} programs, {states} states, {transitions} transitions; {} violations", bad.len()))
}

type Criterion = fn() -> (bool, String);

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 9] = [
        ("program 1 annotation and postcondition", program_one),
        ("programs 2 and 3 postcondition x == 2", programs_two_three),
        ("initialisation protocol, second refinement", refinement_two),
        ("negative controls", negative_controls),
        ("guard conjunction split", guard_split),
        ("derived progress rules", derived_rules),
        ("checker against oracle", checker_soundness),
        ("wlp properties", wlp_suite),
        ("control-state facts", control_facts),
    ];
    let mut failed = Vec::new();
    for (k, (title, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        report(k + 1, title, ok, &detail);
        if !ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
