//! Acceptance gate: one PASS/FAIL line per criterion, then a single assertion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use dp_endo::classifier::{
    blowdown_web, compare_with_printed, enumerate_classes, figure_cycle, normalize_cycle,
    ClassifiedSurface, EnumerationOptions, FIGURES,
};
use dp_endo::cli_report::{cmd_graph, cmd_verify, SurfaceScriptFile};
use dp_endo::endo::{ledger_sweep, lift_through_blowup, mult_endomorphism, projection_formula};
use dp_endo::neg_curves::{
    components_and_d_check, enumerate_negative_classes, verify_loop_contains_all_negatives, DCheck,
};
use dp_endo::par::Execution;
use dp_endo::pic_lattice::{
    blowup_pullback, canonical_class, intersect, DivisorClass, LatticeSignature,
};
use dp_endo::surface_builder::{build_from_script, SurfaceModel};
use dp_endo::toric_fan::{LabelCycle, Seed};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Fixture {
    classes: Vec<ClassifiedSurface>,
    models: Vec<SurfaceModel>,
    elapsed: Duration,
    noether_violations: usize,
    fans_visited: usize,
}

fn fixture() -> Fixture {
    let start = Instant::now();
    let e = enumerate_classes(&EnumerationOptions::default()).expect("enumeration runs");
    let elapsed = start.elapsed();
    let models = e
        .classes
        .iter()
        .map(|c| build_from_script(&c.witness_script).expect("witness replays"))
        .collect();
    Fixture {
        classes: e.classes,
        models,
        elapsed,
        noether_violations: e.stats.noether_violations,
        fans_visited: e.stats.fans_visited,
    }
}

fn classification_count(fx: &Fixture) -> Outcome {
    ensure(fx.classes.len() == 12, || {
        format!("{} classes", fx.classes.len())
    })?;
    let mut k2: Vec<i64> = fx.classes.iter().map(|c| c.k2).collect();
    k2.sort();
    ensure(k2 == [3, 4, 4, 4, 5, 5, 6, 6, 6, 6, 7, 7], || {
        format!("K^2 multiset {k2:?}")
    })?;
    ensure(fx.elapsed < Duration::from_secs(5), || {
        format!("took {:?}", fx.elapsed)
    })?;
    Ok(format!("12 classes in {:?}", fx.elapsed))
}

fn figure_identification(fx: &Fixture) -> Outcome {
    let mut seen = BTreeSet::new();
    for c in &fx.classes {
        let matches: Vec<u8> = FIGURES
            .iter()
            .filter(|(id, _)| {
                normalize_cycle(&figure_cycle(*id).unwrap()) == normalize_cycle(&c.cycle)
            })
            .map(|(id, _)| *id)
            .collect();
        ensure(matches.len() == 1, || {
            format!("{} matches figures {matches:?}", c.cycle)
        })?;
        ensure(c.figure_id == Some(matches[0]), || {
            format!("{} labelled {:?}", c.cycle, c.figure_id)
        })?;
        seen.insert(matches[0]);
    }
    ensure(seen.len() == 12, || format!("figures hit: {seen:?}"))?;
    Ok("each figure matched exactly once".into())
}

fn degree_bound(fx: &Fixture) -> Outcome {
    let oracle = common::loop_oracle(3, 7);
    let found: BTreeSet<Vec<i64>> = fx
        .classes
        .iter()
        .map(|c| c.cycle.labels().to_vec())
        .collect();
    ensure(found == oracle, || {
        format!("search {found:?} vs scan {oracle:?}")
    })?;
    let below = common::loop_oracle(-3, 2);
    ensure(below.is_empty(), || {
        format!("scan finds K^2 <= 2 loops {below:?}")
    })?;
    let wide = enumerate_classes(&EnumerationOptions::range(1, 7)).map_err(|e| e.to_string())?;
    let low: Vec<_> = wide.classes.iter().filter(|c| c.k2 < 3).collect();
    ensure(low.is_empty() && wide.classes.len() == 12, || {
        format!("{} classes below 3", low.len())
    })?;
    Ok("search over K^2 >= 1 finds nothing below 3; matches direct scan".into())
}

fn noether(fx: &Fixture) -> Outcome {
    ensure(fx.noether_violations == 0, || {
        format!("{} violations", fx.noether_violations)
    })?;
    Ok(format!("{} fans, 0 violations", fx.fans_visited))
}

fn ramification(fx: &Fixture) -> Outcome {
    let ds = [1, 2, 3, 4, 5];
    let ledgers = ledger_sweep(&fx.models, &ds, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(ledgers.len() == 60, || format!("{} ledgers", ledgers.len()))?;
    for (k, l) in ledgers.iter().enumerate() {
        let m = &fx.models[k / ds.len()];
        let d = l.d;
        let expected_total = canonical_class(m.sig).try_scale(1 - d).unwrap();
        let sum_p = DivisorClass::sum(
            m.sig,
            m.loop_curves
                .iter()
                .filter(|c| c.self_int >= 0)
                .map(|c| &c.class),
        )
        .unwrap();
        let sum_e = DivisorClass::sum(
            m.sig,
            m.loop_curves
                .iter()
                .filter(|c| c.self_int < 0)
                .map(|c| &c.class),
        )
        .unwrap();
        let ok = l.k_minus_pullback_k == expected_total
            && l.branch_class == sum_e.try_scale(d - 1).unwrap()
            && l.z_class == sum_p.try_scale(d - 1).unwrap()
            && l.z_terms.iter().all(|(_, c)| *c == d - 1)
            && l.branch_terms.iter().all(|(_, c)| *c == d - 1);
        ensure(ok, || format!("model {k} d={d}: {l:?}"))?;
    }
    Ok("60 of 60 exact".into())
}

fn lifting(fx: &Fixture) -> Outcome {
    let mut n = 0;
    for c in &fx.classes {
        let seed = SurfaceModel::seed(c.witness_script.seed).unwrap();
        let target = build_from_script(&c.witness_script).unwrap();
        for d in [2, 3] {
            let mut e = mult_endomorphism(&seed, d).map_err(|e| e.to_string())?;
            for &corner in &c.witness_script.steps {
                e = lift_through_blowup(&e, corner).map_err(|e| e.to_string())?;
            }
            let direct = mult_endomorphism(&target, d).map_err(|e| e.to_string())?;
            ensure(e.pullback == direct.pullback && e.surface == target, || {
                format!("{:?} d={d}", c.witness_script)
            })?;
            n += 1;
        }
    }
    Ok(format!("{n} lifted towers agree"))
}

fn negative_counts(fx: &Fixture) -> Outcome {
    let s3 = enumerate_negative_classes(LatticeSignature::plane(3)).map_err(|e| e.to_string())?;
    let s6 = enumerate_negative_classes(LatticeSignature::plane(6)).map_err(|e| e.to_string())?;
    ensure(s3.minus_one.len() == 6, || {
        format!("n=3: {}", s3.minus_one.len())
    })?;
    ensure(s6.minus_one.len() == 27 && s6.minus_two.len() == 72, || {
        format!("n=6: {} / {}", s6.minus_one.len(), s6.minus_two.len())
    })?;
    ensure(common::brute_negative_classes(6, 1).len() == 27, || {
        "brute force n=6 (-1)".into()
    })?;
    ensure(common::brute_negative_classes(6, 2).len() == 72, || {
        "brute force n=6 (-2)".into()
    })?;
    for m in &fx.models {
        let r = verify_loop_contains_all_negatives(m).map_err(|e| e.to_string())?;
        ensure(r.holds, || {
            format!(
                "{:?}: witness {:?}",
                m.script,
                r.witness.map(|w| w.to_string())
            )
        })?;
    }
    Ok("6; 27 / 72; loop holds every negative class on all 12".into())
}

fn structure(fx: &Fixture) -> Outcome {
    for m in &fx.models {
        let s = components_and_d_check(m).map_err(|e| e.to_string())?;
        ensure(s.m >= 3 && s.e == 1, || {
            format!("{:?}: m={} e={}", m.script, s.m, s.e)
        })?;
        ensure(s.check != DCheck::Fails, || {
            format!("{:?}: D.sum E = {}", m.script, s.d_dot_e)
        })?;
        ensure(s.h0_matches != Some(false), || {
            format!("{:?}: chi(D) = {}", m.script, s.h0_d)
        })?;
    }
    Ok("m >= 3, e = 1, D.sum E = 2 when D != 0".into())
}

fn web(fx: &Fixture) -> Outcome {
    let web = blowdown_web(&fx.classes).map_err(|e| e.to_string())?;
    for (a, b) in [(5, 4), (2, 1), (7, 6), (8, 7), (10, 9), (10, 11), (12, 11)] {
        ensure(web.has_figure_edge(a, b), || {
            format!("missing X({a}) -> X({b})")
        })?;
    }
    let cmp = compare_with_printed(&web);
    ensure(
        cmp.discrepancies.iter().any(|d| d.contains("X(2) twice")),
        || "no duplication report".into(),
    )?;
    ensure(web.escapes.is_empty(), || {
        format!("escapes {:?}", web.escapes)
    })?;
    Ok(format!("{} computed edges, closed", web.edges.len()))
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(1000)
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn model_strategy() -> impl Strategy<Value = SurfaceModel> {
    (
        prop::sample::select(Seed::ALL.to_vec()),
        prop::collection::vec(0usize..64, 0..=6),
    )
        .prop_map(|(s, raw)| build_from_script(&common::script_from_raw(s, &raw)).unwrap())
}

fn class(sig: LatticeSignature, raw: &[i64]) -> DivisorClass {
    DivisorClass::new(sig, raw[..sig.rank()].to_vec()).unwrap()
}

fn properties() -> Outcome {
    let coeffs = || prop::collection::vec(-20i64..20, 10);
    run_property(
        "bilinearity",
        (0usize..=8, coeffs(), coeffs(), coeffs(), -5i64..5, -5i64..5),
        |(n, a, b, c, x, y)| {
            let sig = LatticeSignature::plane(n);
            let (a, b, c) = (class(sig, &a), class(sig, &b), class(sig, &c));
            let lhs = intersect(&a.try_scale(x)?.try_add(&b.try_scale(y)?)?, &c)?;
            prop_assert_eq!(lhs, x * intersect(&a, &c)? + y * intersect(&b, &c)?);
            prop_assert_eq!(intersect(&a, &b)?, intersect(&b, &a)?);
            Ok(())
        },
    )?;
    run_property(
        "pullback isometry",
        (0usize..8, coeffs(), coeffs()),
        |(n, a, b)| {
            let sig = LatticeSignature::plane(n);
            let (a, b) = (class(sig, &a), class(sig, &b));
            let up = sig.blown_up();
            prop_assert_eq!(
                intersect(&blowup_pullback(&a, up)?, &blowup_pullback(&b, up)?)?,
                intersect(&a, &b)?
            );
            Ok(())
        },
    )?;
    run_property(
        "normalize idempotence",
        prop::collection::vec(-3i64..3, 3..12),
        |labels| {
            let n = normalize_cycle(&LabelCycle::new(labels.clone()).unwrap());
            prop_assert_eq!(normalize_cycle(&n), n.clone());
            prop_assert_eq!(n.labels().to_vec(), common::dihedral_min(&labels));
            Ok(())
        },
    )?;
    run_property(
        "projection formula",
        (model_strategy(), 1i64..=5, coeffs(), coeffs()),
        |(m, d, a, b)| {
            let e = mult_endomorphism(&m, d)?;
            let (lhs, rhs) = projection_formula(&e, &class(m.sig, &a), &class(m.sig, &b))?;
            prop_assert_eq!(
                rhs,
                d * d * intersect(&class(m.sig, &a), &class(m.sig, &b))?
            );
            prop_assert_eq!(lhs, rhs);
            Ok(())
        },
    )?;
    run_property(
        "deterministic output",
        (
            prop::sample::select(Seed::ALL.to_vec()),
            prop::collection::vec(0usize..64, 0..6),
            1i64..=4,
        ),
        |(seed, raw, d)| {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("s.json");
            let file = SurfaceScriptFile::from_script(&common::script_from_raw(seed, &raw), None);
            std::fs::write(&path, file.to_json()).unwrap();
            let mut runs = Vec::new();
            for _ in 0..2 {
                let (mut out, mut err) = (Vec::new(), Vec::new());
                let a = cmd_verify(&path, &[d], None, &mut out, &mut err);
                let b = cmd_graph(&path, "ascii", None, &mut out, &mut err);
                let c = cmd_graph(&path, "dot", None, &mut out, &mut err);
                runs.push((out, err, a, b, c));
            }
            prop_assert!(runs[0] == runs[1]);
            Ok(())
        },
    )?;
    Ok("5 properties x 1000 cases".into())
}

#[test]
fn acceptance() {
    let fx = fixture();
    let criteria: Vec<Criterion> = vec![
        (
            "classification count",
            Box::new(|| classification_count(&fx)),
        ),
        (
            "figure identification",
            Box::new(|| figure_identification(&fx)),
        ),
        ("degree bound", Box::new(|| degree_bound(&fx))),
        ("Noether identity", Box::new(|| noether(&fx))),
        ("ramification ledger", Box::new(|| ramification(&fx))),
        ("lifting coherence", Box::new(|| lifting(&fx))),
        ("negative-curve counts", Box::new(|| negative_counts(&fx))),
        ("structure constants", Box::new(|| structure(&fx))),
        ("blow-down web", Box::new(|| web(&fx))),
        ("property suites", Box::new(properties)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
