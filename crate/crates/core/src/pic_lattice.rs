//! Picard lattice of an iterated point blow-up of a minimal rational surface.
//!
//! Classes are stored in the standard basis: for a blow-up of the plane that is
//! `(H; E1, ..., En)`, with the diagonal form `(+1, -1, ..., -1)`. The two
//! Hirzebruch seeds `F0` and `F2` are not blow-ups of the plane, so their base
//! block is `(F, S)` (fibre and negative section, `F^2 = 0`, `F.S = 1`,
//! `S^2 = -s`) followed by the same `-1` exceptional block.
//!
//! Coefficients are stored directly: the class `H - E1 - E2` is `(1; -1, -1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The minimal surface a blow-up tower starts from.
#[derive(Copy, Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub enum Base {
    Plane,
    /// The Hirzebruch surface with a section of self-intersection `-s`.
    Hirzebruch(u8),
}

impl Base {
    pub fn rank(self) -> usize {
        match self {
            Base::Plane => 1,
            Base::Hirzebruch(_) => 2,
        }
    }

    fn form(self, i: usize, j: usize) -> i64 {
        match self {
            Base::Plane => 1,
            Base::Hirzebruch(s) => match (i, j) {
                (0, 0) => 0,
                (1, 1) => -i64::from(s),
                _ => 1,
            },
        }
    }
}

#[derive(Copy, Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub struct LatticeSignature {
    pub base: Base,
    /// Number of exceptional basis vectors.
    pub n: usize,
}

impl LatticeSignature {
    pub fn plane(n: usize) -> Self {
        LatticeSignature {
            base: Base::Plane,
            n,
        }
    }

    pub fn hirzebruch(s: u8, n: usize) -> Self {
        LatticeSignature {
            base: Base::Hirzebruch(s),
            n,
        }
    }

    pub fn rank(&self) -> usize {
        self.base.rank() + self.n
    }

    /// Signature after one more point blow-up.
    pub fn blown_up(&self) -> Self {
        LatticeSignature {
            base: self.base,
            n: self.n + 1,
        }
    }

    /// Entry `(i, j)` of the Gram matrix in the standard basis.
    pub fn form(&self, i: usize, j: usize) -> i64 {
        let b = self.base.rank();
        match (i < b, j < b) {
            (true, true) => self.base.form(i, j),
            (false, false) if i == j => -1,
            _ => 0,
        }
    }

    /// `K^2` of the surface with this Picard lattice.
    pub fn k2(&self) -> i64 {
        let base = match self.base {
            Base::Plane => 9,
            Base::Hirzebruch(_) => 8,
        };
        base - self.n as i64
    }
}

impl fmt::Display for LatticeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            Base::Plane => write!(f, "Bl_{}(P2)", self.n),
            Base::Hirzebruch(s) => write!(f, "Bl_{}(F{})", self.n, s),
        }
    }
}

/// An integral divisor class.
#[derive(Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub struct DivisorClass {
    sig: LatticeSignature,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(sig: LatticeSignature, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != sig.rank() {
            return Err(Error::RankMismatch {
                signature: sig,
                expected: sig.rank(),
                got: coeffs.len(),
            });
        }
        Ok(DivisorClass { sig, coeffs })
    }

    pub fn zero(sig: LatticeSignature) -> Self {
        DivisorClass {
            sig,
            coeffs: vec![0; sig.rank()],
        }
    }

    /// The `i`-th standard basis vector (0-based over the whole basis).
    pub fn basis(sig: LatticeSignature, i: usize) -> Self {
        let mut c = Self::zero(sig);
        c.coeffs[i] = 1;
        c
    }

    /// The line class `H` of a plane blow-up.
    pub fn line(sig: LatticeSignature) -> Self {
        debug_assert_eq!(sig.base, Base::Plane);
        Self::basis(sig, 0)
    }

    /// The exceptional class `E_j`, 1-based as in the usual notation.
    pub fn exceptional(sig: LatticeSignature, j: usize) -> Self {
        assert!(
            j >= 1 && j <= sig.n,
            "exceptional index {j} out of range for {sig}"
        );
        Self::basis(sig, sig.base.rank() + j - 1)
    }

    pub fn signature(&self) -> LatticeSignature {
        self.sig
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn same_sig(&self, other: &Self) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch {
                left: self.sig,
                right: other.sig,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_sig(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(DivisorClass {
            sig: self.sig,
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.try_scale(-1)?)
    }

    pub fn try_scale(&self, k: i64) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(k).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(DivisorClass {
            sig: self.sig,
            coeffs,
        })
    }

    /// Sum of a non-empty or empty family of classes on `sig`.
    pub fn sum<'a, I>(sig: LatticeSignature, classes: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a DivisorClass>,
    {
        classes
            .into_iter()
            .try_fold(Self::zero(sig), |acc, c| acc.try_add(c))
    }

    pub fn self_intersection(&self) -> Result<i64> {
        intersect(self, self)
    }
}

impl fmt::Display for DivisorClass {
    /// Symbolic form such as `2H - E1 - E3` or `F + S - E2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base_names: &[&str] = match self.sig.base {
            Base::Plane => &["H"],
            Base::Hirzebruch(_) => &["F", "S"],
        };
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let name = if i < base_names.len() {
                base_names[i].to_string()
            } else {
                format!("E{}", i - base_names.len() + 1)
            };
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if c.abs() != 1 {
                write!(f, "{}", c.abs())?;
            }
            write!(f, "{name}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The intersection pairing.
pub fn intersect(d1: &DivisorClass, d2: &DivisorClass) -> Result<i64> {
    d1.same_sig(d2)?;
    let sig = d1.sig;
    let b = sig.base.rank();
    let mut acc: i64 = 0;
    for i in 0..b {
        for j in 0..b {
            let g = sig.form(i, j);
            if g == 0 {
                continue;
            }
            let t = d1.coeffs[i]
                .checked_mul(d2.coeffs[j])
                .and_then(|x| x.checked_mul(g))
                .ok_or(Error::Overflow)?;
            acc = acc.checked_add(t).ok_or(Error::Overflow)?;
        }
    }
    for i in b..sig.rank() {
        let t = d1.coeffs[i]
            .checked_mul(d2.coeffs[i])
            .ok_or(Error::Overflow)?;
        acc = acc.checked_sub(t).ok_or(Error::Overflow)?;
    }
    Ok(acc)
}

/// `K` in the standard basis: `-3H + sum E_j`, or `-(s+2)F - 2S + sum E_j`.
pub fn canonical_class(sig: LatticeSignature) -> DivisorClass {
    let mut coeffs = vec![1; sig.rank()];
    match sig.base {
        Base::Plane => coeffs[0] = -3,
        Base::Hirzebruch(s) => {
            coeffs[0] = -(i64::from(s) + 2);
            coeffs[1] = -2;
        }
    }
    DivisorClass { sig, coeffs }
}

/// Riemann-Roch: `chi(O(D)) = 1 + (D^2 - D.K) / 2`.
pub fn euler_char(d: &DivisorClass) -> Result<i64> {
    let k = canonical_class(d.sig);
    let num = d.self_intersection()? - intersect(d, &k)?;
    if num % 2 != 0 {
        return Err(Error::Parity { value: num });
    }
    Ok(1 + num / 2)
}

/// Total transform of `d` under one further point blow-up with lattice `target`.
pub fn blowup_pullback(d: &DivisorClass, target: LatticeSignature) -> Result<DivisorClass> {
    if target != d.sig.blown_up() {
        return Err(Error::BadBlowupTarget {
            source_sig: d.sig,
            target,
        });
    }
    let mut coeffs = d.coeffs.clone();
    coeffs.push(0);
    Ok(DivisorClass {
        sig: target,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cls(n: usize, c: &[i64]) -> DivisorClass {
        DivisorClass::new(LatticeSignature::plane(n), c.to_vec()).unwrap()
    }

    #[test]
    fn basic_products() {
        let sig = LatticeSignature::plane(2);
        let h = DivisorClass::line(sig);
        let e1 = DivisorClass::exceptional(sig, 1);
        assert_eq!(intersect(&h, &h).unwrap(), 1);
        assert_eq!(intersect(&e1, &e1).unwrap(), -1);
        let l = cls(2, &[1, -1, -1]);
        assert_eq!(intersect(&l, &l).unwrap(), -1);
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = DivisorClass::line(LatticeSignature::plane(1));
        let b = DivisorClass::line(LatticeSignature::plane(2));
        assert!(matches!(
            intersect(&a, &b),
            Err(Error::SignatureMismatch { .. })
        ));
        assert!(DivisorClass::new(LatticeSignature::plane(2), vec![1, 0]).is_err());
    }

    #[test]
    fn canonical_self_intersection() {
        assert_eq!(canonical_class(LatticeSignature::plane(0)).coeffs(), &[-3]);
        for n in 0..=12 {
            let sig = LatticeSignature::plane(n);
            let k = canonical_class(sig);
            assert_eq!(k.self_intersection().unwrap(), 9 - n as i64);
            assert_eq!(sig.k2(), 9 - n as i64);
        }
        for s in 0..=3u8 {
            for n in 0..=4 {
                let sig = LatticeSignature::hirzebruch(s, n);
                assert_eq!(
                    canonical_class(sig).self_intersection().unwrap(),
                    8 - n as i64
                );
            }
        }
    }

    #[test]
    fn euler_characteristic_values() {
        let sig = LatticeSignature::plane(3);
        assert_eq!(euler_char(&DivisorClass::zero(sig)).unwrap(), 1);
        let minus_k = canonical_class(sig).try_scale(-1).unwrap();
        assert_eq!(euler_char(&minus_k).unwrap(), 7);
        assert_eq!(euler_char(&DivisorClass::exceptional(sig, 1)).unwrap(), 1);
        // h0(O(dH)) on the plane
        for d in 0..6 {
            let dh = DivisorClass::line(LatticeSignature::plane(0))
                .try_scale(d)
                .unwrap();
            assert_eq!(euler_char(&dh).unwrap(), (d + 1) * (d + 2) / 2);
        }
    }

    #[test]
    fn blowup_identities() {
        let p2 = LatticeSignature::plane(0);
        let h = DivisorClass::line(p2);
        assert_eq!(
            blowup_pullback(&h, p2.blown_up()).unwrap().coeffs(),
            &[1, 0]
        );
        assert!(blowup_pullback(&h, LatticeSignature::plane(2)).is_err());

        for n in 0..8 {
            let sig = LatticeSignature::plane(n);
            let up = sig.blown_up();
            let k_pulled = blowup_pullback(&canonical_class(sig), up).unwrap();
            let e_new = DivisorClass::exceptional(up, n + 1);
            assert_eq!(k_pulled.try_add(&e_new).unwrap(), canonical_class(up));
        }
    }

    #[test]
    fn symbolic_display() {
        assert_eq!(cls(2, &[1, -1, -1]).to_string(), "H - E1 - E2");
        assert_eq!(cls(2, &[0, 0, 0]).to_string(), "0");
        assert_eq!(cls(1, &[-3, 1]).to_string(), "-3H + E1");
    }

    fn arb_class(n: usize) -> impl Strategy<Value = DivisorClass> {
        proptest::collection::vec(-20i64..=20, 1 + n)
            .prop_map(move |c| DivisorClass::new(LatticeSignature::plane(n), c).unwrap())
    }

    fn arb_triple() -> impl Strategy<Value = (DivisorClass, DivisorClass, DivisorClass, i64)> {
        (0usize..=8).prop_flat_map(|n| (arb_class(n), arb_class(n), arb_class(n), -5i64..=5))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn pairing_is_symmetric_bilinear((a, b, c, k) in arb_triple()) {
            let ab = intersect(&a, &b).unwrap();
            prop_assert_eq!(ab, intersect(&b, &a).unwrap());
            let lhs = intersect(&a.try_scale(k).unwrap().try_add(&b).unwrap(), &c).unwrap();
            let rhs = k * intersect(&a, &c).unwrap() + intersect(&b, &c).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn euler_char_never_hits_parity((a, _b, _c, _k) in arb_triple()) {
            prop_assert!(euler_char(&a).is_ok());
        }

        #[test]
        fn pullback_is_isometric((a, b, _c, _k) in arb_triple()) {
            let up = a.signature().blown_up();
            let pa = blowup_pullback(&a, up).unwrap();
            let pb = blowup_pullback(&b, up).unwrap();
            prop_assert_eq!(intersect(&pa, &pb).unwrap(), intersect(&a, &b).unwrap());
        }
    }
}
