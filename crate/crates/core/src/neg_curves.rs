//! Negative classes and negative curves.
//!
//! On a weak del Pezzo surface every irreducible curve `C` with `C^2 < 0` is a
//! `(-1)`-curve (`K.C = -1`) or a `(-2)`-curve (`K.C = 0`). The candidate
//! classes are therefore the integral solutions of two quadratic systems,
//! which are finite once `K^2 > 0` and are found here by exhaustive search.
//!
//! Writing a class as `aH + sum b_j E_j` on the plane blown up in `n` points,
//! the conditions read
//!
//! ```text
//! (-1)-classes:  sum b_j = 1 - 3a,  sum b_j^2 = a^2 + 1
//! (-2)-classes:  sum b_j =   - 3a,  sum b_j^2 = a^2 + 2
//! ```
//!
//! Cauchy-Schwarz, `(sum b_j)^2 <= n sum b_j^2`, gives
//! `(9 - n) a^2 - 6ka + k^2 - nc <= 0` with `(k, c) = (1, 1)` or `(0, 2)`,
//! which bounds `a` when `n <= 8`; then `|b_j| <= sqrt(a^2 + c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::pic_lattice::{
    canonical_class, euler_char, intersect, Base, DivisorClass, LatticeSignature,
};
use crate::surface_builder::{CurveRecord, SurfaceModel};

#[derive(Copy, Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub enum NegativeKind {
    /// `(D^2, K.D) = (-1, -1)`
    MinusOne,
    /// `(D^2, K.D) = (-2, 0)`
    MinusTwo,
}

impl NegativeKind {
    fn sum_target(self) -> i64 {
        match self {
            NegativeKind::MinusOne => 1,
            NegativeKind::MinusTwo => 0,
        }
    }

    fn square_excess(self) -> i64 {
        match self {
            NegativeKind::MinusOne => 1,
            NegativeKind::MinusTwo => 2,
        }
    }

    pub fn self_intersection(self) -> i64 {
        -(self.square_excess())
    }

    pub fn canonical_degree(self) -> i64 {
        -(self.sum_target())
    }
}

/// Finite box containing every solution for one kind.
#[derive(Copy, Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub a_min: i64,
    pub a_max: i64,
    pub b_max: i64,
}

impl SearchBox {
    pub fn is_empty(&self) -> bool {
        self.a_min > self.a_max
    }
}

fn isqrt(x: i64) -> i64 {
    if x <= 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as i64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

fn check_sig(sig: LatticeSignature) -> Result<usize> {
    if sig.base != Base::Plane {
        return Err(Error::Unsupported(format!(
            "negative-class enumeration needs a blow-up of the plane, got {sig}"
        )));
    }
    if sig.n > 8 {
        return Err(Error::Unsupported(format!(
            "negative classes are infinite once K^2 <= 0 ({sig} has K^2 = {})",
            sig.k2()
        )));
    }
    Ok(sig.n)
}

pub fn search_box(sig: LatticeSignature, kind: NegativeKind) -> Result<SearchBox> {
    let n = check_sig(sig)? as i64;
    let (k, c) = (kind.sum_target(), kind.square_excess());
    let q = |a: i64| (9 - n) * a * a - 6 * k * a + k * k - n * c;
    // q is convex with its minimum in [v, v + 1]
    let v = (3 * k).div_euclid(9 - n);
    let (mut lo, mut hi) = (v + 1, v);
    while q(lo - 1) <= 0 {
        lo -= 1;
    }
    while q(hi + 1) <= 0 {
        hi += 1;
    }
    let b_max = if lo > hi {
        0
    } else {
        isqrt(lo.abs().max(hi.abs()).pow(2) + c)
    };
    Ok(SearchBox {
        a_min: lo,
        a_max: hi,
        b_max,
    })
}

/// Depth-first completion of `prefix` to a full `b` vector with the given
/// remaining sum and sum of squares.
fn complete(prefix: &mut Vec<i64>, left: usize, sum: i64, sq: i64, out: &mut Vec<Vec<i64>>) {
    if left == 0 {
        if sum == 0 && sq == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if sq < 0 || sum * sum > left as i64 * sq || (sum - sq) % 2 != 0 {
        return;
    }
    let r = isqrt(sq);
    for b in -r..=r {
        prefix.push(b);
        complete(prefix, left - 1, sum - b, sq - b * b, out);
        prefix.pop();
    }
}

fn enumerate_kind(
    sig: LatticeSignature,
    kind: NegativeKind,
    exec: Execution,
) -> Result<Vec<DivisorClass>> {
    let n = check_sig(sig)?;
    let bx = search_box(sig, kind)?;
    if bx.is_empty() {
        return Ok(Vec::new());
    }
    let (k, c) = (kind.sum_target(), kind.square_excess());
    // Work items: the value of `a` and, when n >= 1, the first coordinate.
    let mut tasks = Vec::new();
    for a in bx.a_min..=bx.a_max {
        if n == 0 {
            tasks.push((a, None));
        } else {
            tasks.extend((-bx.b_max..=bx.b_max).map(|b| (a, Some(b))));
        }
    }
    let found = par::flat_map(exec, &tasks, |&(a, first)| {
        let mut out = Vec::new();
        let (sum, sq) = (k - 3 * a, a * a + c);
        let mut prefix = vec![a];
        match first {
            None => complete(&mut prefix, 0, sum, sq, &mut out),
            Some(b) => {
                prefix.push(b);
                complete(&mut prefix, n - 1, sum - b, sq - b * b, &mut out);
            }
        }
        out
    });
    let mut classes = found
        .into_iter()
        .map(|coeffs| DivisorClass::new(sig, coeffs))
        .collect::<Result<Vec<_>>>()?;
    classes.sort();
    classes.dedup();
    Ok(classes)
}

/// All integral `(-1)`- and `(-2)`-classes of a plane blow-up with `n <= 8`.
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct NegativeClassSet {
    pub sig: LatticeSignature,
    pub minus_one: Vec<DivisorClass>,
    pub minus_two: Vec<DivisorClass>,
}

impl NegativeClassSet {
    pub fn iter(&self) -> impl Iterator<Item = (NegativeKind, &DivisorClass)> {
        self.minus_one
            .iter()
            .map(|c| (NegativeKind::MinusOne, c))
            .chain(self.minus_two.iter().map(|c| (NegativeKind::MinusTwo, c)))
    }
}

pub fn enumerate_negative_classes(sig: LatticeSignature) -> Result<NegativeClassSet> {
    enumerate_negative_classes_with(sig, Execution::default())
}

pub fn enumerate_negative_classes_with(
    sig: LatticeSignature,
    exec: Execution,
) -> Result<NegativeClassSet> {
    Ok(NegativeClassSet {
        sig,
        minus_one: enumerate_kind(sig, NegativeKind::MinusOne, exec)?,
        minus_two: enumerate_kind(sig, NegativeKind::MinusTwo, exec)?,
    })
}

/// The loop components with negative self-intersection.
///
/// On a toric surface an irreducible curve of negative self-intersection is
/// the only member of its linear system, hence torus-invariant, hence a
/// boundary component. [`verify_loop_contains_all_negatives`] certifies the
/// same statement from the lattice alone.
pub fn negative_curves(model: &SurfaceModel) -> Vec<CurveRecord> {
    model
        .loop_curves
        .iter()
        .filter(|c| c.self_int < 0)
        .cloned()
        .collect()
}

/// Why a negative class is not the class of an irreducible curve outside the
/// loop.
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The class is that of a loop curve.
    LoopCurve { name: String },
    /// `class = sum n_i D_i` with `n_i >= 0` over loop curves. An irreducible
    /// `G` outside the loop would give `G^2 = sum n_i G.D_i >= 0`.
    Decomposition { terms: Vec<(String, i64)> },
    /// `N = sum c_i D_i` (with `c_i >= 0`) meets every loop curve
    /// non-negatively, so it is nef, and `N.class < 0`: not effective.
    NotEffective {
        nef: Vec<(String, i64)>,
        pairing: i64,
    },
    /// No decomposition over the full toric boundary exists, exhausted under
    /// the weight `A = sum c_i D_i` (each `A.D_i >= 1`) with `A.class =
    /// budget`. Every effective class on a toric surface is an invariant
    /// effective one, so the class is not effective.
    NoInvariantDecomposition {
        weight: Vec<(String, i64)>,
        budget: i64,
    },
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct ClassCertificate {
    pub kind: NegativeKind,
    pub class: DivisorClass,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct LoopNegativity {
    pub holds: bool,
    pub classes_checked: usize,
    pub certificates: Vec<ClassCertificate>,
    /// First class that could not be certified.
    pub witness: Option<DivisorClass>,
}

const NEF_COEFF_MAX: i64 = 2;
const WEIGHT_COEFF_MAX: i64 = 12;

/// Every integral combination `sum c_i D_i` with `0 <= c_i <= max`, as
/// coefficient vectors, in lexicographic order.
fn coefficient_box(len: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn dot(c: &[i64], row: &[i64]) -> i64 {
    c.iter().zip(row).map(|(a, b)| a * b).sum()
}

/// Some `c >= 0` with `sum_j c_j D_j . D_i >= 1` for every `i`, trying
/// coefficient bounds `1, 2, ..` up to [`WEIGHT_COEFF_MAX`].
fn positive_weight(gram: &[Vec<i64>]) -> Option<Vec<i64>> {
    let len = gram.len();
    // Row i can be tested once every j it touches is assigned.
    let last: Vec<usize> = gram
        .iter()
        .map(|row| row.iter().rposition(|&g| g != 0).unwrap_or(0))
        .collect();
    fn go(gram: &[Vec<i64>], last: &[usize], max: i64, c: &mut Vec<i64>) -> bool {
        let k = c.len();
        if k == gram.len() {
            return true;
        }
        for x in 0..=max {
            c.push(x);
            let ok = (0..gram.len())
                .filter(|&i| last[i] == k)
                .all(|i| dot(c, &gram[i][..=k]) >= 1);
            if ok && go(gram, last, max, c) {
                return true;
            }
            c.pop();
        }
        false
    }
    (1..=WEIGHT_COEFF_MAX).find_map(|max| {
        let mut c = Vec::with_capacity(len);
        go(gram, &last, max, &mut c).then_some(c)
    })
}

struct Support<'a> {
    curves: &'a [CurveRecord],
    gram: Vec<Vec<i64>>,
    nef: Vec<Vec<i64>>,
    /// Pairing weights `A.D_i >= 1` used to bound decompositions.
    weights: Option<Vec<i64>>,
    weight_coeffs: Vec<i64>,
    /// `curves` is the whole torus-invariant boundary.
    full_boundary: bool,
}

impl<'a> Support<'a> {
    fn new(curves: &'a [CurveRecord], full_boundary: bool) -> Result<Self> {
        let len = curves.len();
        let mut gram = vec![vec![0; len]; len];
        for i in 0..len {
            for j in 0..len {
                gram[i][j] = intersect(&curves[i].class, &curves[j].class)?;
            }
        }
        let pairings = |c: &[i64]| -> Vec<i64> { (0..len).map(|j| dot(c, &gram[j])).collect() };

        let nef = coefficient_box(len, NEF_COEFF_MAX)
            .iter()
            .filter(|c| c.iter().any(|&x| x > 0))
            .filter(|c| pairings(c).iter().all(|&p| p >= 0))
            .cloned()
            .collect();

        let (weights, weight_coeffs) = match positive_weight(&gram) {
            Some(c) => (Some(pairings(&c)), c),
            None => (None, Vec::new()),
        };
        Ok(Support {
            curves,
            gram,
            nef,
            weights,
            weight_coeffs,
            full_boundary,
        })
    }

    fn named(&self, coeffs: &[i64]) -> Vec<(String, i64)> {
        self.curves
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c != 0)
            .map(|(r, &c)| (r.name.clone(), c))
            .collect()
    }

    fn certify(&self, class: &DivisorClass) -> Result<Option<Certificate>> {
        if let Some(rec) = self.curves.iter().find(|r| &r.class == class) {
            return Ok(Some(Certificate::LoopCurve {
                name: rec.name.clone(),
            }));
        }
        let against: Vec<i64> = self
            .curves
            .iter()
            .map(|r| intersect(&r.class, class))
            .collect::<Result<_>>()?;
        if let Some(n) = self.nef.iter().find(|n| dot(n, &against) < 0) {
            return Ok(Some(Certificate::NotEffective {
                nef: self.named(n),
                pairing: dot(n, &against),
            }));
        }
        if let Some(w) = &self.weights {
            let budget = dot(&self.weight_coeffs, &against);
            let mut chosen = Vec::with_capacity(w.len());
            if let Some(terms) = self.decompose(class, w, budget, &mut chosen)? {
                return Ok(Some(Certificate::Decomposition {
                    terms: self.named(&terms),
                }));
            }
            if self.full_boundary {
                return Ok(Some(Certificate::NoInvariantDecomposition {
                    weight: self.named(&self.weight_coeffs),
                    budget,
                }));
            }
        }
        Ok(None)
    }

    /// Search `n_i >= 0` with `sum n_i w_i = budget` and `sum n_i D_i = class`.
    /// Every decomposition satisfies the weight equation, so the search is
    /// exhaustive.
    fn decompose(
        &self,
        class: &DivisorClass,
        w: &[i64],
        budget: i64,
        chosen: &mut Vec<i64>,
    ) -> Result<Option<Vec<i64>>> {
        if budget < 0 {
            return Ok(None);
        }
        let i = chosen.len();
        if i + 1 == w.len() {
            if budget % w[i] != 0 {
                return Ok(None);
            }
            chosen.push(budget / w[i]);
            let sum = chosen
                .iter()
                .zip(self.curves)
                .try_fold(DivisorClass::zero(class.signature()), |acc, (&n, r)| {
                    acc.try_add(&r.class.try_scale(n)?)
                })?;
            let hit = (&sum == class).then(|| chosen.clone());
            chosen.pop();
            return Ok(hit);
        }
        for n in 0..=budget / w[i] {
            chosen.push(n);
            let found = self.decompose(class, w, budget - n * w[i], chosen)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

pub fn verify_loop_contains_all_negatives(model: &SurfaceModel) -> Result<LoopNegativity> {
    verify_with_support(model, &model.loop_curves)
}

/// As [`verify_loop_contains_all_negatives`], but certificates may only use
/// the curves in `support`.
pub fn verify_with_support(
    model: &SurfaceModel,
    support: &[CurveRecord],
) -> Result<LoopNegativity> {
    let set = enumerate_negative_classes_with(model.sig, Execution::Sequential)?;
    let sup = Support::new(support, support == model.loop_curves.as_slice())?;
    debug_assert_eq!(sup.gram.len(), support.len());
    let mut certificates = Vec::new();
    let mut witness = None;
    let mut checked = 0;
    for (kind, class) in set.iter() {
        checked += 1;
        match sup.certify(class)? {
            Some(certificate) => certificates.push(ClassCertificate {
                kind,
                class: class.clone(),
                certificate,
            }),
            None => {
                witness = Some(class.clone());
                break;
            }
        }
    }
    Ok(LoopNegativity {
        holds: witness.is_none(),
        classes_checked: checked,
        certificates,
        witness,
    })
}

/// Outcome of the `D . sum E = 2e` identity.
#[derive(Copy, Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DCheck {
    /// `D = 0`; the identity is only claimed for `D != 0`.
    Vacuous,
    Holds,
    Fails,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct ComponentStructure {
    /// Number of negative loop curves.
    pub m: usize,
    /// Connected components of their union.
    pub e: usize,
    /// `D = -K - sum E`, the sum of the non-negative loop curves.
    pub d_class: DivisorClass,
    pub d_dot_e: i64,
    pub check: DCheck,
    /// `chi(O(D))` and whether it equals `1 + D^2 + e` (only for `D != 0`).
    pub h0_d: i64,
    pub h0_matches: Option<bool>,
}

pub fn components_and_d_check(model: &SurfaceModel) -> Result<ComponentStructure> {
    let neg: Vec<&CurveRecord> = model
        .loop_curves
        .iter()
        .filter(|c| c.self_int < 0)
        .collect();
    let m = neg.len();

    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if intersect(&neg[i].class, &neg[j].class)? > 0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let e = (0..m).filter(|&i| find(&mut parent, i) == i).count();

    let sum_e = DivisorClass::sum(model.sig, neg.iter().map(|c| &c.class))?;
    let d_class = canonical_class(model.sig).try_scale(-1)?.try_sub(&sum_e)?;
    let d_direct = DivisorClass::sum(
        model.sig,
        model
            .loop_curves
            .iter()
            .filter(|c| c.self_int >= 0)
            .map(|c| &c.class),
    )?;
    if d_direct != d_class {
        return Err(Error::ModelCorruption(format!(
            "-K - sum E = {d_class}, but the non-negative loop curves sum to {d_direct}"
        )));
    }
    let d_dot_e = intersect(&d_class, &sum_e)?;
    let h0_d = euler_char(&d_class)?;
    let (check, h0_matches) = if d_class.is_zero() {
        (DCheck::Vacuous, None)
    } else {
        let check = if d_dot_e == 2 * e as i64 {
            DCheck::Holds
        } else {
            DCheck::Fails
        };
        let d2 = d_class.self_intersection()?;
        (check, Some(h0_d == 1 + d2 + e as i64))
    };
    Ok(ComponentStructure {
        m,
        e,
        d_class,
        d_dot_e,
        check,
        h0_d,
        h0_matches,
    })
}
