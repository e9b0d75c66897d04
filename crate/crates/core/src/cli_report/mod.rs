//! Batch commands behind the `dp-endo` binary: surface-script files, JSON
//! reports and graph output.
//!
//! Every command writes to caller-supplied streams and returns an
//! [`ExitStatus`]; nothing here touches the process directly.
//!
//! # Script files
//!
//! ```json
//! {"seed": "P2", "blowups": [0, 2, 4], "name": "X1"}
//! ```
//!
//! `seed` is one of `P2`, `F0`, `F1`, `F2`. Each entry of `blowups` is a corner
//! of the current loop: corner `i` is the node where component `i` meets
//! component `i + 1` (cyclically), components are numbered from the seed's
//! first one, and the new exceptional curve becomes component `i + 1`.
//!
//! # Verification report
//!
//! A JSON object with the script, the loop in model order and in normal form,
//! `K^2`, the matching figure (if any), one entry per check in `checks` (each
//! with `status` of `pass`, `fail` or `skipped`, a `detail` string and an
//! optional `witness`), the ramification ledger for each requested `d`, and an
//! overall `passed` flag.

mod graph;

pub use graph::{ascii_loop, dot_loop, figure_order, GraphFormat};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{
    blowdown_web, compare_with_printed, enumerate_classes, expected_count, identify_figure,
    normalize_cycle, web_to_dot, EnumerationOptions,
};
use crate::endo::{lift_through_blowup, mult_endomorphism, ramification_ledger};
use crate::error::{Error, Result};
use crate::neg_curves::{components_and_d_check, verify_loop_contains_all_negatives, DCheck};
use crate::pic_lattice::Base;
use crate::surface_builder::{
    build_from_script, cross_validate, loop_divisor, BlowupScript, SurfaceModel,
};
use crate::toric_fan::{is_weak_del_pezzo, LabelCycle, Seed};

#[derive(Copy, Clone, Debug, Eq, PartialEq)]
pub enum ExitStatus {
    Pass,
    Fail,
    Usage,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Fail => 1,
            ExitStatus::Usage => 2,
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            ExitStatus::Pass
        } else {
            ExitStatus::Fail
        }
    }
}

fn status_for(e: &Error) -> ExitStatus {
    match e {
        Error::ModelCorruption(_) | Error::Overflow | Error::LiftPrecondition(_) => {
            ExitStatus::Fail
        }
        _ => ExitStatus::Usage,
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceScriptFile {
    pub seed: String,
    pub blowups: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl SurfaceScriptFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_script(script: &BlowupScript, name: Option<String>) -> Self {
        SurfaceScriptFile {
            seed: script.seed.name().to_string(),
            blowups: script.steps.clone(),
            name,
        }
    }

    pub fn to_script(&self) -> Result<BlowupScript> {
        let seed: Seed = self.seed.parse()?;
        Ok(BlowupScript::new(seed, self.blowups.clone()))
    }

    pub fn build(&self) -> Result<SurfaceModel> {
        build_from_script(&self.to_script()?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

#[derive(Copy, Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct ReportCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl ReportCheck {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        ReportCheck {
            name: name.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: detail.into(),
            witness: None,
        }
    }

    fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        ReportCheck {
            name: name.into(),
            status: CheckStatus::Skipped,
            detail: detail.into(),
            witness: None,
        }
    }

    fn with_witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub d: i64,
    pub degree: i64,
    pub branch_terms: Vec<(String, i64)>,
    pub z_terms: Vec<(String, i64)>,
    pub branch_class: String,
    pub z_class: String,
    pub k_minus_pullback_k: String,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub script: SurfaceScriptFile,
    pub figure_id: Option<u8>,
    pub cycle: LabelCycle,
    pub normal_form: LabelCycle,
    pub k2: i64,
    pub checks: Vec<ReportCheck>,
    pub ledgers: Vec<LedgerSummary>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&ReportCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Run every check on the surface described by `file`, with ledgers for each
/// `d` in `ds`.
pub fn verify_surface(file: &SurfaceScriptFile, ds: &[i64]) -> Result<VerificationReport> {
    if let Some(&d) = ds.iter().find(|&&d| d <= 0) {
        return Err(Error::NonPositiveDegree(d));
    }
    let script = file.to_script()?;
    let model = build_from_script(&script)?;
    let cycle = LabelCycle::new(model.labels())?;
    let k2 = model.k2();
    let in_classified_range = k2 <= 7;
    let mut checks = Vec::new();

    let cv = cross_validate(&model)?;
    let consistency: Vec<_> = cv
        .checks
        .iter()
        .filter(|c| c.name != "loop_simple" && c.name != "anticanonical")
        .collect();
    checks.push(
        ReportCheck::new(
            "lattice_fan_agreement",
            consistency.iter().all(|c| c.passed),
            consistency
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        )
        .with_witness(
            consistency
                .iter()
                .find(|c| !c.passed)
                .map(|c| c.detail.clone()),
        ),
    );
    let simple = cv.get("loop_simple").expect("always run");
    checks.push(
        ReportCheck::new(
            "loop_simple",
            simple.passed,
            format!("{} components", model.loop_curves.len()),
        )
        .with_witness((!simple.passed).then(|| simple.detail.clone())),
    );
    let anti = loop_divisor(&model);
    checks.push(
        ReportCheck::new("anticanonical", anti.is_ok(), "K + LP = 0")
            .with_witness(anti.err().map(|e| e.to_string())),
    );

    let wdp = is_weak_del_pezzo(&model.fan)?;
    checks.push(ReportCheck::new("weak_del_pezzo", wdp, "-K nef and big"));

    let out_of_range: Vec<_> = model
        .loop_curves
        .iter()
        .filter(|c| !(-2..=1).contains(&c.self_int))
        .collect();
    checks.push(
        ReportCheck::new(
            "labels_in_range",
            out_of_range.is_empty(),
            "self-intersections in {-2,-1,0,1}",
        )
        .with_witness(
            out_of_range
                .first()
                .map(|c| format!("{}^2 = {}", c.name, c.self_int)),
        ),
    );

    checks.push(match model.sig.base {
        // Only on a weak del Pezzo surface is every negative curve a (-1)- or
        // (-2)-curve, which is all the class search can see.
        _ if !wdp => ReportCheck::skipped("negatives_in_loop", "not a weak del Pezzo surface"),
        Base::Hirzebruch(_) => ReportCheck::skipped(
            "negatives_in_loop",
            "the lattice search covers blow-ups of the plane only",
        ),
        Base::Plane if model.sig.n > 8 => {
            ReportCheck::skipped("negatives_in_loop", "more than 8 blow-ups")
        }
        Base::Plane => {
            let r = verify_loop_contains_all_negatives(&model)?;
            ReportCheck::new(
                "negatives_in_loop",
                r.holds,
                format!("{} negative classes certified", r.certificates.len()),
            )
            .with_witness(r.witness.map(|w| w.to_string()))
        }
    });

    let cs = components_and_d_check(&model)?;
    checks.push(if in_classified_range {
        ReportCheck::new(
            "negative_part_connected",
            cs.m >= 3 && cs.e == 1,
            format!("m = {}, e = {}", cs.m, cs.e),
        )
    } else {
        ReportCheck::skipped("negative_part_connected", format!("K^2 = {k2} > 7"))
    });
    checks.push(match cs.check {
        DCheck::Vacuous => ReportCheck::skipped("d_dot_sum_e", "D = 0"),
        DCheck::Holds | DCheck::Fails => ReportCheck::new(
            "d_dot_sum_e",
            cs.check == DCheck::Holds,
            format!(
                "D = {}, D.sum E = {}, 2e = {}",
                cs.d_class,
                cs.d_dot_e,
                2 * cs.e
            ),
        ),
    });
    checks.push(match cs.h0_matches {
        None => ReportCheck::skipped("euler_char_d", "D = 0"),
        Some(ok) => ReportCheck::new(
            "euler_char_d",
            ok,
            format!("chi(D) = {}, 1 + D^2 + e expected", cs.h0_d),
        ),
    });

    let mut ledgers = Vec::new();
    let seed_model = SurfaceModel::seed(script.seed)?;
    for &d in ds {
        let e = mult_endomorphism(&model, d)?;
        let bad = model
            .loop_curves
            .iter()
            .find(|c| e.pull(&c.class).ok() != c.class.try_scale(d).ok());
        checks.push(
            ReportCheck::new(
                format!("eigencurves[d={d}]"),
                e.is_scalar() && bad.is_none() && e.degree() == d * d,
                format!("f^* = {d} Id, deg f = {}", e.degree()),
            )
            .with_witness(bad.map(|c| c.name.clone())),
        );

        let mut lifted = mult_endomorphism(&seed_model, d)?;
        for &corner in &script.steps {
            lifted = lift_through_blowup(&lifted, corner)?;
        }
        checks.push(ReportCheck::new(
            format!("lift_coherent[d={d}]"),
            lifted.pullback == e.pullback,
            format!("lifted along {} steps", script.steps.len()),
        ));

        let check_name = format!("ramification[d={d}]");
        match ramification_ledger(&e) {
            Ok(l) => {
                checks.push(ReportCheck::new(
                    check_name,
                    l.z_exact,
                    format!(
                        "K - f^*K = {} = ({}) + ({})",
                        l.k_minus_pullback_k, l.branch_class, l.z_class
                    ),
                ));
                ledgers.push(LedgerSummary {
                    d,
                    degree: e.degree(),
                    branch_terms: l.branch_terms,
                    z_terms: l.z_terms,
                    branch_class: l.branch_class.to_string(),
                    z_class: l.z_class.to_string(),
                    k_minus_pullback_k: l.k_minus_pullback_k.to_string(),
                });
            }
            Err(Error::ModelCorruption(msg)) => checks
                .push(ReportCheck::new(check_name, false, "split failed").with_witness(Some(msg))),
            Err(other) => return Err(other),
        }
    }

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(VerificationReport {
        name: file.name.clone(),
        script: SurfaceScriptFile::from_script(&script, file.name.clone()),
        figure_id: identify_figure(&cycle),
        normal_form: normalize_cycle(&cycle),
        cycle,
        k2,
        checks,
        ledgers,
        passed,
    })
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn report_error(e: &Error, err: &mut dyn Write) -> ExitStatus {
    let _ = writeln!(err, "error: {e}");
    status_for(e)
}

/// Classify loops with `K^2` in `[k2_min, k2_max]`. The JSON array goes to
/// `out_path` (or `out`); the count line goes to `out` when a path is given
/// and to `err` otherwise.
pub fn cmd_classify(
    k2_min: i64,
    k2_max: i64,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let mut run = || -> Result<ExitStatus> {
        let e = enumerate_classes(&EnumerationOptions::range(k2_min, k2_max))?;
        emit(out_path, &to_json(&e.classes)?, out)?;
        let expected = expected_count(k2_min, k2_max);
        let summary: &mut dyn Write = if out_path.is_some() {
            &mut *out
        } else {
            &mut *err
        };
        writeln!(
            summary,
            "{} classes with {k2_min} <= K^2 <= {k2_max} (expected {expected})",
            e.classes.len()
        )?;
        Ok(ExitStatus::of(e.classes.len() == expected))
    };
    let result = run();
    result.unwrap_or_else(|e| report_error(&e, err))
}

pub fn cmd_verify(
    script_path: &Path,
    ds: &[i64],
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let mut run = || -> Result<ExitStatus> {
        let file = SurfaceScriptFile::load(script_path)?;
        let report = verify_surface(&file, ds)?;
        emit(out_path, &to_json(&report)?, out)?;
        for c in report
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
        {
            writeln!(
                err,
                "FAIL {}: {}",
                c.name,
                c.witness.as_deref().unwrap_or(&c.detail)
            )?;
        }
        Ok(ExitStatus::of(report.passed))
    };
    let result = run();
    result.unwrap_or_else(|e| report_error(&e, err))
}

pub fn cmd_graph(
    script_path: &Path,
    format: &str,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let mut run = || -> Result<ExitStatus> {
        let format: GraphFormat = format.parse()?;
        let file = SurfaceScriptFile::load(script_path)?;
        let model = file.build()?;
        let text = match format {
            GraphFormat::Dot => dot_loop(&model, file.name.as_deref()),
            GraphFormat::Ascii => ascii_loop(&model.labels()),
        };
        emit(out_path, &text, out)?;
        Ok(ExitStatus::Pass)
    };
    let result = run();
    result.unwrap_or_else(|e| report_error(&e, err))
}

/// The blow-down web of the default classification as DOT, with the
/// comparison against the printed chains as leading comments.
pub fn cmd_web(out_path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let mut run = || -> Result<ExitStatus> {
        let e = enumerate_classes(&EnumerationOptions::default())?;
        let web = blowdown_web(&e.classes)?;
        let cmp = compare_with_printed(&web);
        emit(out_path, &web_to_dot(&web, &cmp), out)?;
        let missing = cmp
            .printed
            .iter()
            .filter(|p| !p.ambiguous && !p.computed)
            .count();
        Ok(ExitStatus::of(missing == 0 && web.escapes.is_empty()))
    };
    let result = run();
    result.unwrap_or_else(|e| report_error(&e, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(seed: &str, blowups: &[usize]) -> SurfaceScriptFile {
        SurfaceScriptFile {
            seed: seed.into(),
            blowups: blowups.to_vec(),
            name: None,
        }
    }

    #[test]
    fn script_round_trip() {
        let f = SurfaceScriptFile::parse(r#"{"seed": "P2", "blowups": [0, 2, 4], "name": "X1"}"#)
            .unwrap();
        assert_eq!(f.name.as_deref(), Some("X1"));
        assert_eq!(SurfaceScriptFile::parse(&f.to_json()).unwrap(), f);
        assert!(matches!(
            SurfaceScriptFile::parse(r#"{"seed": "P3", "blowups": []}"#)
                .unwrap()
                .to_script(),
            Err(Error::UnknownSeed(_))
        ));
        assert!(SurfaceScriptFile::parse(r#"{"seed": "P2"}"#).is_err());
    }

    #[test]
    fn hexagon_passes_everything() {
        let r = verify_surface(&file("P2", &[0, 2, 4]), &[1, 2, 3]).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.figure_id, Some(1));
        assert_eq!(r.check("d_dot_sum_e").unwrap().status, CheckStatus::Skipped);
        assert_eq!(r.ledgers.len(), 3);
        assert!(r.ledgers[1].z_terms.is_empty());
        assert_eq!(r.ledgers[1].k_minus_pullback_k, "3H - E1 - E2 - E3");
    }

    #[test]
    fn check_names_are_unique() {
        let r = verify_surface(&file("P2", &[0, 0, 3]), &[2, 3]).unwrap();
        let mut names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
        let len = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), len);
    }

    #[test]
    fn triangle_is_outside_the_range() {
        let r = verify_surface(&file("P2", &[]), &[2]).unwrap();
        assert_eq!(
            r.check("negative_part_connected").unwrap().status,
            CheckStatus::Skipped
        );
        assert!(r.passed);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            status_for(&Error::UnknownSeed("x".into())),
            ExitStatus::Usage
        );
        assert_eq!(
            status_for(&Error::ModelCorruption("x".into())),
            ExitStatus::Fail
        );
        assert_eq!(ExitStatus::Usage.code(), 2);
        assert!(verify_surface(&file("P2", &[0]), &[0]).is_err());
    }
}
