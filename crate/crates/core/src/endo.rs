//! Self-maps that act as multiplication by `d` on the Picard group.
//!
//! The toric route starts from a linear map `A` of the fan lattice that sends
//! every ray to a positive multiple of itself. For `A = d * Id` this is the
//! power map `[X:Y:Z] -> [X^d:Y^d:Z^d]` on the plane and its lifts. Pullbacks
//! of boundary divisors are read off the support functions, `phi^* D_j =
//! sum_i h_j(A v_i) D_i`, and transported to the Picard lattice by an exact
//! linear solve. The lifting route instead extends a known pullback across one
//! blow-up at a fixed node. Both must produce the same matrix.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::pic_lattice::{canonical_class, intersect, DivisorClass};
use crate::surface_builder::SurfaceModel;

/// Square integer matrix acting on coefficient vectors, row-major.
#[derive(Clone, Debug, Eq, PartialEq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn scalar(n: usize, d: i64) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = d;
        }
        IntMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn apply(&self, c: &DivisorClass) -> Result<DivisorClass> {
        if c.coeffs().len() != self.n {
            return Err(Error::RankMismatch {
                signature: c.signature(),
                expected: self.n,
                got: c.coeffs().len(),
            });
        }
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc: i64 = 0;
            for (j, &x) in c.coeffs().iter().enumerate() {
                let t = self.get(i, j).checked_mul(x).ok_or(Error::Overflow)?;
                acc = acc.checked_add(t).ok_or(Error::Overflow)?;
            }
            out.push(acc);
        }
        DivisorClass::new(c.signature(), out)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        let n = self.n;
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i64 = 0;
                for k in 0..n {
                    let t = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .ok_or(Error::Overflow)?;
                    acc = acc.checked_add(t).ok_or(Error::Overflow)?;
                }
                data[i * n + j] = acc;
            }
        }
        Ok(IntMatrix { n, data })
    }

    /// Block sum with a `1 x 1` block `d` in the new last coordinate.
    fn extend(&self, d: i64) -> IntMatrix {
        let n = self.n + 1;
        let mut data = vec![0; n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                data[i * n + j] = self.get(i, j);
            }
        }
        data[n * n - 1] = d;
        IntMatrix { n, data }
    }
}

pub type LatticeMap = [[i64; 2]; 2];

fn lattice_apply(a: &LatticeMap, v: [i64; 2]) -> [i64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn lattice_det(a: &LatticeMap) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn lattice_mul(a: &LatticeMap, b: &LatticeMap) -> LatticeMap {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Endomorphism {
    pub d: i64,
    pub surface: SurfaceModel,
    /// Action of `f^*` on coefficient vectors in the standard basis.
    pub pullback: IntMatrix,
    /// The map of the fan lattice inducing `f`.
    pub lattice_map: LatticeMap,
}

impl Endomorphism {
    /// Topological degree, `det` of the lattice map.
    pub fn degree(&self) -> i64 {
        lattice_det(&self.lattice_map)
    }

    pub fn pull(&self, c: &DivisorClass) -> Result<DivisorClass> {
        self.pullback.apply(c)
    }

    /// `f^*` is `d * Id` on the whole lattice.
    pub fn is_scalar(&self) -> bool {
        self.pullback == IntMatrix::scalar(self.pullback.dim(), self.d)
    }

    /// `self . other` on the same surface.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.surface.script != other.surface.script {
            return Err(Error::Unsupported(
                "composition needs both maps on the same surface".into(),
            ));
        }
        Ok(Endomorphism {
            d: self.d.checked_mul(other.d).ok_or(Error::Overflow)?,
            surface: self.surface.clone(),
            // (f . g)^* = g^* f^*
            pullback: other.pullback.mul(&self.pullback)?,
            lattice_map: lattice_mul(&self.lattice_map, &other.lattice_map),
        })
    }
}

/// Per boundary divisor data of a toric self-map.
struct ToricAction {
    /// Row `j`: coefficients of `phi^* D_j` on the boundary divisors.
    pullback_rows: Vec<Vec<i64>>,
    /// Ramification index along each boundary divisor.
    ramification: Vec<i64>,
}

fn toric_action(model: &SurfaceModel, a: &LatticeMap) -> Result<ToricAction> {
    let rays = model.fan.rays();
    let len = rays.len();
    let mut rows = vec![vec![0i64; len]; len];
    let mut ramification = Vec::with_capacity(len);
    for (i, &v) in rays.iter().enumerate() {
        let w = lattice_apply(a, v);
        let (k, alpha, beta) = model.fan.cone_coordinates(w);
        rows[k][i] += alpha;
        rows[(k + 1) % len][i] += beta;
        // A finite map sends each boundary curve onto a boundary curve, i.e.
        // each ray onto a ray.
        let e = match (alpha, beta) {
            (x, 0) | (0, x) if x > 0 => x,
            _ => {
                return Err(Error::Unsupported(format!(
                    "lattice map sends ray {i} into the interior of cone {k}"
                )))
            }
        };
        ramification.push(e);
    }
    Ok(ToricAction {
        pullback_rows: rows,
        ramification,
    })
}

type Q = Ratio<i128>;

/// Find the integer matrix `M` with `M b_j = y_j` for every `j`, where the
/// `b_j` span the lattice over the rationals.
fn solve_linear_map(basis: &[DivisorClass], images: &[DivisorClass]) -> Result<IntMatrix> {
    let rank = basis
        .first()
        .map(|b| b.coeffs().len())
        .ok_or_else(|| Error::ModelCorruption("empty loop".into()))?;

    // Greedily pick rank independent columns by elimination.
    let mut chosen: Vec<usize> = Vec::new();
    let mut reduced: Vec<Vec<Q>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for (j, b) in basis.iter().enumerate() {
        let mut v: Vec<Q> = b
            .coeffs()
            .iter()
            .map(|&x| Q::from_integer(x as i128))
            .collect();
        for (r, &p) in reduced.iter().zip(&pivots) {
            if v[p] != Q::from_integer(0) {
                let f = v[p] / r[p];
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= f * *y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| *x != Q::from_integer(0)) {
            reduced.push(v);
            pivots.push(p);
            chosen.push(j);
            if chosen.len() == rank {
                break;
            }
        }
    }
    if chosen.len() != rank {
        return Err(Error::ModelCorruption(format!(
            "loop classes span rank {} < {rank}",
            chosen.len()
        )));
    }

    // Solve M B = Y via B^T M^T = Y^T, Gauss-Jordan on [B^T | Y^T].
    let mut aug: Vec<Vec<Q>> = chosen
        .iter()
        .map(|&j| {
            basis[j]
                .coeffs()
                .iter()
                .chain(images[j].coeffs())
                .map(|&x| Q::from_integer(x as i128))
                .collect()
        })
        .collect();
    for col in 0..rank {
        let piv = (col..rank)
            .find(|&r| aug[r][col] != Q::from_integer(0))
            .ok_or_else(|| Error::ModelCorruption("singular loop basis".into()))?;
        aug.swap(col, piv);
        let p = aug[col][col];
        for x in aug[col].iter_mut() {
            *x /= p;
        }
        for r in 0..rank {
            if r != col && aug[r][col] != Q::from_integer(0) {
                let f = aug[r][col];
                let pivot_row = aug[col].clone();
                for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                    *x -= f * *y;
                }
            }
        }
    }
    // Row i of the solution is column i of M.
    let mut data = vec![0i64; rank * rank];
    for (i, row) in aug.iter().enumerate() {
        for j in 0..rank {
            let x = row[rank + j];
            if !x.is_integer() {
                return Err(Error::ModelCorruption(format!(
                    "pullback entry {x} is not integral"
                )));
            }
            data[j * rank + i] = i64::try_from(x.to_integer()).map_err(|_| Error::Overflow)?;
        }
    }
    let m = IntMatrix { n: rank, data };
    for (b, y) in basis.iter().zip(images) {
        if &m.apply(b)? != y {
            return Err(Error::ModelCorruption(format!(
                "pullback is inconsistent on {b}: got {}, expected {y}",
                m.apply(b)?
            )));
        }
    }
    Ok(m)
}

/// The self-map induced by multiplication by `d` on the fan lattice.
pub fn mult_endomorphism(model: &SurfaceModel, d: i64) -> Result<Endomorphism> {
    if d <= 0 {
        return Err(Error::NonPositiveDegree(d));
    }
    let lattice_map = [[d, 0], [0, d]];
    let pullback = toric_pullback_matrix(model, &lattice_map)?;
    Ok(Endomorphism {
        d,
        surface: model.clone(),
        pullback,
        lattice_map,
    })
}

/// Pullback matrix of the toric self-map induced by `a`, in the standard basis.
pub fn toric_pullback_matrix(model: &SurfaceModel, a: &LatticeMap) -> Result<IntMatrix> {
    let action = toric_action(model, a)?;
    let classes: Vec<DivisorClass> = model.loop_curves.iter().map(|c| c.class.clone()).collect();
    let images = action
        .pullback_rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&classes)
                .try_fold(DivisorClass::zero(model.sig), |acc, (&k, c)| {
                    acc.try_add(&c.try_scale(k)?)
                })
        })
        .collect::<Result<Vec<_>>>()?;
    solve_linear_map(&classes, &images)
}

/// Extend `e` across the blow-up of the loop node `corner`.
///
/// Both branches through the node must be eigencurves of `f^*` with
/// eigenvalue `d`, and the lattice map must fix both rays, so the node is a
/// fixed point with a fixed tangent pair. The lifted map commutes with the
/// blow-down, so its pullback is `f^*` on pulled-back classes and `d` on the
/// new exceptional class.
pub fn lift_through_blowup(e: &Endomorphism, corner: usize) -> Result<Endomorphism> {
    let curves = &e.surface.loop_curves;
    let len = curves.len();
    if corner >= len {
        return Err(Error::CornerOutOfRange {
            step: None,
            index: corner,
            len,
        });
    }
    for idx in [corner, (corner + 1) % len] {
        let c = &curves[idx];
        if e.pull(&c.class)? != c.class.try_scale(e.d)? {
            return Err(Error::LiftPrecondition(format!(
                "{} is not an eigencurve with eigenvalue {}",
                c.name, e.d
            )));
        }
        let v = e.surface.fan.rays()[idx];
        let w = lattice_apply(&e.lattice_map, v);
        let on_ray = w[0] * v[1] - w[1] * v[0] == 0 && w[0] * v[0] + w[1] * v[1] > 0;
        if !on_ray {
            return Err(Error::LiftPrecondition(format!(
                "lattice map moves the ray of {}",
                c.name
            )));
        }
    }
    let surface = e.surface.blow_up(corner)?;
    Ok(Endomorphism {
        d: e.d,
        surface,
        pullback: e.pullback.extend(e.d),
        lattice_map: e.lattice_map,
    })
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct RamificationLedger {
    pub d: i64,
    /// Coefficient of each negative loop curve `E_i` in the ramification divisor.
    pub branch_terms: Vec<(String, i64)>,
    /// `Z` as an exact divisor on the non-negative loop curves `P_j`.
    pub z_terms: Vec<(String, i64)>,
    pub branch_class: DivisorClass,
    pub z_class: DivisorClass,
    /// `K - f^*K`, from the pullback matrix.
    pub k_minus_pullback_k: DivisorClass,
    /// `Z` has coefficient exactly `d - 1` on every `P_j`.
    pub z_exact: bool,
}

impl RamificationLedger {
    /// No ramification at all (`d = 1`).
    pub fn is_empty(&self) -> bool {
        self.k_minus_pullback_k.is_zero()
            && self.branch_terms.iter().all(|(_, c)| *c == 0)
            && self.z_terms.iter().all(|(_, c)| *c == 0)
    }
}

/// Split the ramification divisor of `e` over the loop and check
/// `K = f^*K + (d-1) sum E_i + Z` with `Z = (d-1) sum P_j`.
pub fn ramification_ledger(e: &Endomorphism) -> Result<RamificationLedger> {
    let model = &e.surface;
    let sig = model.sig;
    let action = toric_action(model, &e.lattice_map)?;

    let k = canonical_class(sig);
    let k_minus_pullback_k = k.try_sub(&e.pull(&k)?)?;

    let mut branch_terms = Vec::new();
    let mut z_terms = Vec::new();
    let mut branch_class = DivisorClass::zero(sig);
    let mut z_class = DivisorClass::zero(sig);
    for (c, &ram) in model.loop_curves.iter().zip(&action.ramification) {
        let coeff = ram - 1;
        let term = c.class.try_scale(coeff)?;
        if c.self_int < 0 {
            branch_terms.push((c.name.clone(), coeff));
            branch_class = branch_class.try_add(&term)?;
        } else {
            z_terms.push((c.name.clone(), coeff));
            z_class = z_class.try_add(&term)?;
        }
    }
    let ramification = branch_class.try_add(&z_class)?;
    if ramification != k_minus_pullback_k {
        return Err(Error::ModelCorruption(format!(
            "K - f^*K = {k_minus_pullback_k}, but the ramification divisor is {ramification}"
        )));
    }

    let sum_p = DivisorClass::sum(
        sig,
        model
            .loop_curves
            .iter()
            .filter(|c| c.self_int >= 0)
            .map(|c| &c.class),
    )?;
    let sum_e = DivisorClass::sum(
        sig,
        model
            .loop_curves
            .iter()
            .filter(|c| c.self_int < 0)
            .map(|c| &c.class),
    )?;
    let expected = sum_e.try_add(&sum_p)?.try_scale(e.d - 1)?;
    if k_minus_pullback_k != expected {
        return Err(Error::ModelCorruption(format!(
            "K - f^*K = {k_minus_pullback_k}, expected (d-1)(sum E + sum P) = {expected}"
        )));
    }
    let z_exact = z_terms.iter().all(|(_, c)| *c == e.d - 1)
        && branch_terms.iter().all(|(_, c)| *c == e.d - 1)
        && z_class == sum_p.try_scale(e.d - 1)?;

    Ok(RamificationLedger {
        d: e.d,
        branch_terms,
        z_terms,
        branch_class,
        z_class,
        k_minus_pullback_k,
        z_exact,
    })
}

/// Ledgers for every `(model, d)` pair, in row-major order.
pub fn ledger_sweep(
    models: &[SurfaceModel],
    ds: &[i64],
    exec: Execution,
) -> Result<Vec<RamificationLedger>> {
    let jobs: Vec<(&SurfaceModel, i64)> = models
        .iter()
        .flat_map(|m| ds.iter().map(move |&d| (m, d)))
        .collect();
    par::map(exec, &jobs, |(m, d)| {
        ramification_ledger(&mult_endomorphism(m, *d)?)
    })
    .into_iter()
    .collect()
}

/// `(f^*D1).(f^*D2)` and `deg(f) * D1.D2`.
pub fn projection_formula(
    e: &Endomorphism,
    d1: &DivisorClass,
    d2: &DivisorClass,
) -> Result<(i64, i64)> {
    let lhs = intersect(&e.pull(d1)?, &e.pull(d2)?)?;
    let rhs = e
        .degree()
        .checked_mul(intersect(d1, d2)?)
        .ok_or(Error::Overflow)?;
    Ok((lhs, rhs))
}

/// The power map `[X:Y:Z] -> [X^d:Y^d:Z^d]` on monomials.
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub d: i64,
    /// Exponent vector of each component.
    pub components: [[i64; 3]; 3],
}

impl PowerMap {
    pub fn new(d: i64) -> Result<Self> {
        if d <= 0 {
            return Err(Error::NonPositiveDegree(d));
        }
        let mut components = [[0; 3]; 3];
        for (i, c) in components.iter_mut().enumerate() {
            c[i] = d;
        }
        Ok(PowerMap { d, components })
    }

    /// Zero pattern of `f(p)` for a point `p` whose vanishing coordinates are
    /// `zeros`: a monomial vanishes iff one of its variables does.
    fn image_zeros(&self, zeros: [bool; 3]) -> [bool; 3] {
        let mut out = [false; 3];
        for (j, comp) in self.components.iter().enumerate() {
            out[j] = (0..3).any(|k| comp[k] > 0 && zeros[k]);
        }
        out
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct PowerMapPullback {
    /// Which coordinate line, 1-based.
    pub line: usize,
    pub d: i64,
    /// Multiplicities of `f^* V(X_line)` on `V(X), V(Y), V(Z)`.
    pub divisor: [i64; 3],
    /// Coordinate strata (as sets of vanishing coordinates, 1-based) that map
    /// onto the coordinate point `P_line`.
    pub point_preimage: Vec<Vec<usize>>,
    /// `K = f^*K + (d-1) sum L_i` in `H`-coefficients: `-3 = -3d + 3(d-1)`.
    pub canonical_identity: bool,
}

pub fn power_map_pullback(line: usize, d: i64) -> Result<PowerMapPullback> {
    if !(1..=3).contains(&line) {
        return Err(Error::Unsupported(format!(
            "coordinate line {line} (expected 1..=3)"
        )));
    }
    let f = PowerMap::new(d)?;
    let divisor = f.components[line - 1];

    // P_line has every coordinate but X_line equal to zero.
    let mut target = [true; 3];
    target[line - 1] = false;
    let mut point_preimage = Vec::new();
    for mask in 1u8..7 {
        let zeros = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
        if f.image_zeros(zeros) == target {
            point_preimage.push((0..3).filter(|&k| zeros[k]).map(|k| k + 1).collect());
        }
    }

    let pulled_k = -3 * d;
    let ramification: i64 = (0..3).map(|i| f.components[i][i] - 1).sum();
    Ok(PowerMapPullback {
        line,
        d,
        divisor,
        point_preimage,
        canonical_identity: -3 == pulled_k + ramification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_builder::build_from_script;
    use crate::surface_builder::BlowupScript;
    use crate::toric_fan::Seed;

    fn model(seed: Seed, steps: &[usize]) -> SurfaceModel {
        build_from_script(&BlowupScript::new(seed, steps.to_vec())).unwrap()
    }

    #[test]
    fn identity_and_squares_on_the_plane() {
        let p2 = model(Seed::P2, &[]);
        let id = mult_endomorphism(&p2, 1).unwrap();
        assert!(id.is_scalar());
        assert_eq!(id.degree(), 1);
        assert!(ramification_ledger(&id).unwrap().is_empty());

        let sq = mult_endomorphism(&p2, 2).unwrap();
        assert_eq!(sq.degree(), 4);
        assert_eq!(sq.pullback, IntMatrix::scalar(1, 2));
        assert!(matches!(
            mult_endomorphism(&p2, 0),
            Err(Error::NonPositiveDegree(0))
        ));
    }

    #[test]
    fn pullback_is_scalar_on_every_seed() {
        for s in Seed::ALL {
            let m = SurfaceModel::seed(s).unwrap();
            for d in 1..=4 {
                let e = mult_endomorphism(&m, d).unwrap();
                assert!(e.is_scalar(), "{s} d={d}: {:?}", e.pullback);
            }
        }
    }

    #[test]
    fn lifting_one_corner() {
        let e = mult_endomorphism(&model(Seed::P2, &[]), 2).unwrap();
        let lifted = lift_through_blowup(&e, 0).unwrap();
        assert_eq!(lifted.degree(), 4);
        let ex = lifted.surface.curve("E1").unwrap().class.clone();
        assert_eq!(lifted.pull(&ex).unwrap(), ex.try_scale(2).unwrap());
        assert_eq!(
            lifted.pullback,
            mult_endomorphism(&lifted.surface, 2).unwrap().pullback
        );
        assert!(lift_through_blowup(&e, 3).is_err());
    }

    #[test]
    fn lift_rejects_a_non_eigen_branch() {
        let mut e = mult_endomorphism(&model(Seed::P2, &[]), 2).unwrap();
        e.pullback = IntMatrix::scalar(1, 3);
        assert!(matches!(
            lift_through_blowup(&e, 0),
            Err(Error::LiftPrecondition(_))
        ));
    }

    #[test]
    fn non_finite_lattice_map_is_rejected() {
        let p2 = model(Seed::P2, &[]);
        // (1,0) -> (1,1) lands strictly inside the first cone.
        assert!(toric_pullback_matrix(&p2, &[[1, 0], [1, 1]]).is_err());
    }

    #[test]
    fn power_map_lines() {
        let p = power_map_pullback(1, 2).unwrap();
        assert_eq!(p.divisor, [2, 0, 0]);
        assert_eq!(p.point_preimage, vec![vec![2, 3]]);
        assert!(p.canonical_identity);
        let id = power_map_pullback(2, 1).unwrap();
        assert_eq!(id.divisor, [0, 1, 0]);
        for d in 1..=7 {
            for line in 1..=3 {
                assert!(power_map_pullback(line, d).unwrap().canonical_identity);
            }
        }
        assert!(power_map_pullback(4, 2).is_err());
        assert!(power_map_pullback(1, 0).is_err());
    }

    #[test]
    fn composition_multiplies_degrees() {
        let m = model(Seed::P2, &[0, 2, 4]);
        let f = mult_endomorphism(&m, 2).unwrap();
        let g = mult_endomorphism(&m, 3).unwrap();
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.d, 6);
        assert_eq!(fg.degree(), 36);
        assert!(fg.is_scalar());
    }
}
