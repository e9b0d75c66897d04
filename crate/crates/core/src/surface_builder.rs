//! Blow-up towers over a triangle of lines (or a Hirzebruch square), built on
//! the lattice side and the fan side in lockstep.
//!
//! Blow-up centres are always nodes of the current loop. Corner `i` is the node
//! where loop component `i` meets component `i + 1` (cyclically); components are
//! numbered from the seed's first component and the new exceptional curve is
//! inserted at position `i + 1`. Ray `i` of the fan is always the same curve as
//! loop component `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pic_lattice::{
    blowup_pullback, canonical_class, intersect, DivisorClass, LatticeSignature,
};
use crate::toric_fan::{boundary_labels, seed_fan, star_subdivide, Fan2D, LabelCycle, Seed};

#[derive(Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub struct BlowupScript {
    pub seed: Seed,
    pub steps: Vec<usize>,
}

impl BlowupScript {
    pub fn new(seed: Seed, steps: Vec<usize>) -> Self {
        BlowupScript { seed, steps }
    }

    pub fn then(&self, corner: usize) -> Self {
        let mut steps = self.steps.clone();
        steps.push(corner);
        BlowupScript {
            seed: self.seed,
            steps,
        }
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub name: String,
    pub class: DivisorClass,
    pub self_int: i64,
    pub in_loop: bool,
}

impl CurveRecord {
    fn new(name: impl Into<String>, class: DivisorClass) -> Result<Self> {
        let self_int = class.self_intersection()?;
        Ok(CurveRecord {
            name: name.into(),
            class,
            self_int,
            in_loop: true,
        })
    }
}

/// A surface with its anticanonical loop, in both representations.
///
/// Fields are public so that consistency checks can be exercised against
/// deliberately damaged models; [`cross_validate`] is the arbiter.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct SurfaceModel {
    pub sig: LatticeSignature,
    pub fan: Fan2D,
    pub loop_curves: Vec<CurveRecord>,
    pub script: BlowupScript,
}

fn seed_model(seed: Seed) -> Result<SurfaceModel> {
    let (sig, named): (LatticeSignature, Vec<(&str, Vec<i64>)>) = match seed {
        Seed::P2 => (
            LatticeSignature::plane(0),
            vec![("L12", vec![1]), ("L23", vec![1]), ("L31", vec![1])],
        ),
        // F1 is the plane blown up at the vertex L12 n L31 of the triangle.
        Seed::F1 => (
            LatticeSignature::plane(1),
            vec![
                ("L12", vec![1, -1]),
                ("E1", vec![0, 1]),
                ("L31", vec![1, -1]),
                ("L23", vec![1, 0]),
            ],
        ),
        Seed::F0 | Seed::F2 => {
            let s = if seed == Seed::F0 { 0 } else { 2 };
            // rays (1,0),(0,1),(-1,s),(0,-1): D0 = D2 = F, D1 = S, D3 = S + sF
            (
                LatticeSignature::hirzebruch(s as u8, 0),
                vec![
                    ("fib0", vec![1, 0]),
                    ("sec0", vec![0, 1]),
                    ("fib1", vec![1, 0]),
                    ("sec1", vec![s, 1]),
                ],
            )
        }
    };
    let loop_curves = named
        .into_iter()
        .map(|(name, c)| CurveRecord::new(name, DivisorClass::new(sig, c)?))
        .collect::<Result<_>>()?;
    Ok(SurfaceModel {
        sig,
        fan: seed_fan(seed),
        loop_curves,
        script: BlowupScript::new(seed, Vec::new()),
    })
}

impl SurfaceModel {
    pub fn seed(seed: Seed) -> Result<Self> {
        seed_model(seed)
    }

    /// Blow up the loop node `corner`.
    pub fn blow_up(&self, corner: usize) -> Result<SurfaceModel> {
        let len = self.loop_curves.len();
        if corner >= len {
            return Err(Error::CornerOutOfRange {
                step: None,
                index: corner,
                len,
            });
        }
        let sig = self.sig.blown_up();
        let e_new = DivisorClass::exceptional(sig, sig.n);
        let mut loop_curves = Vec::with_capacity(len + 1);
        for (i, rec) in self.loop_curves.iter().enumerate() {
            let mut class = blowup_pullback(&rec.class, sig)?;
            if i == corner || i == (corner + 1) % len {
                class = class.try_sub(&e_new)?;
            }
            loop_curves.push(CurveRecord::new(rec.name.clone(), class)?);
        }
        loop_curves.insert(corner + 1, CurveRecord::new(format!("E{}", sig.n), e_new)?);
        Ok(SurfaceModel {
            sig,
            fan: star_subdivide(&self.fan, corner)?,
            loop_curves,
            script: self.script.then(corner),
        })
    }

    pub fn k2(&self) -> i64 {
        self.sig.k2()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.loop_curves.iter().map(|c| c.self_int).collect()
    }

    pub fn curve(&self, name: &str) -> Option<&CurveRecord> {
        self.loop_curves.iter().find(|c| c.name == name)
    }
}

pub fn build_from_script(script: &BlowupScript) -> Result<SurfaceModel> {
    let mut model = SurfaceModel::seed(script.seed)?;
    for (step, &corner) in script.steps.iter().enumerate() {
        model = model.blow_up(corner).map_err(|e| match e {
            Error::CornerOutOfRange { index, len, .. } => Error::CornerOutOfRange {
                step: Some(step),
                index,
                len,
            },
            other => other,
        })?;
    }
    Ok(model)
}

/// The loop `LP` as a class; it must equal `-K`.
pub fn loop_divisor(model: &SurfaceModel) -> Result<DivisorClass> {
    let lp = DivisorClass::sum(model.sig, model.loop_curves.iter().map(|c| &c.class))?;
    let minus_k = canonical_class(model.sig).try_scale(-1)?;
    if lp != minus_k {
        return Err(Error::ModelCorruption(format!(
            "loop sums to {lp}, but -K = {minus_k}"
        )));
    }
    Ok(lp)
}

pub fn dual_graph_cycle(model: &SurfaceModel) -> Result<LabelCycle> {
    LabelCycle::new(model.labels())
}

/// Result of one named consistency check.
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub checks: Vec<CheckOutcome>,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Compare the lattice and fan representations of `model`.
pub fn cross_validate(model: &SurfaceModel) -> Result<CrossValidation> {
    let mut checks = Vec::new();
    let curves = &model.loop_curves;
    let n = curves.len();

    let mut bad = Vec::new();
    for c in curves {
        let actual = c.class.self_intersection()?;
        if actual != c.self_int {
            bad.push(format!(
                "{}: recorded {}, class gives {}",
                c.name, c.self_int, actual
            ));
        }
    }
    checks.push(CheckOutcome::new(
        "self_int_consistent",
        bad.is_empty(),
        bad.join("; "),
    ));

    let lattice_labels: Vec<i64> = curves
        .iter()
        .map(|c| c.class.self_intersection())
        .collect::<Result<_>>()?;
    let fan_labels = boundary_labels(&model.fan)?;
    let same = lattice_labels == fan_labels.labels();
    checks.push(CheckOutcome::new(
        "labels_match",
        same,
        format!("lattice {lattice_labels:?}, fan {:?}", fan_labels.labels()),
    ));

    let k2_lattice = canonical_class(model.sig).self_intersection()?;
    let k2_fan = fan_labels.k2();
    checks.push(CheckOutcome::new(
        "k2_agreement",
        k2_lattice == k2_fan && n == model.fan.len(),
        format!("lattice K^2 = {k2_lattice}, fan K^2 = {k2_fan}"),
    ));

    let lp = DivisorClass::sum(model.sig, curves.iter().map(|c| &c.class))?;
    let k_plus_lp = canonical_class(model.sig).try_add(&lp)?;
    checks.push(CheckOutcome::new(
        "anticanonical",
        k_plus_lp.is_zero(),
        format!("K + LP = {k_plus_lp}"),
    ));

    let mut bad = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let expected = i64::from(adjacent);
            let got = intersect(&curves[i].class, &curves[j].class)?;
            if got != expected {
                bad.push(format!(
                    "{}.{} = {got}, expected {expected}",
                    curves[i].name, curves[j].name
                ));
            }
        }
    }
    checks.push(CheckOutcome::new(
        "loop_simple",
        bad.is_empty(),
        bad.join("; "),
    ));

    Ok(CrossValidation { checks })
}
