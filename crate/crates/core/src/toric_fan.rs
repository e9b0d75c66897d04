//! Smooth complete fans in a rank-2 lattice and their boundary cycles.
//!
//! A fan is a counterclockwise cyclic list of primitive rays `v_0, ..., v_{n-1}`
//! with `det(v_i, v_{i+1}) = 1`. The boundary divisor `D_i` of ray `v_i` has
//! self-intersection `a_i` determined by `v_{i-1} + v_{i+1} = -a_i v_i`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Ray = [i64; 2];

fn det(u: Ray, v: Ray) -> i64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Starting surfaces for blow-up towers.
///
/// Only the plane and `F0`, `F1`, `F2` are needed: a boundary label can only
/// go down under corner blow-ups, so a seed carrying a label `<= -3` (every
/// `F_s` with `s >= 3`) never produces a surface whose labels all lie in
/// `{-2, -1, 0, 1}`.
#[derive(Copy, Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
pub enum Seed {
    P2,
    F0,
    F1,
    F2,
}

impl Seed {
    pub const ALL: [Seed; 4] = [Seed::P2, Seed::F0, Seed::F1, Seed::F2];

    pub fn name(self) -> &'static str {
        match self {
            Seed::P2 => "P2",
            Seed::F0 => "F0",
            Seed::F1 => "F1",
            Seed::F2 => "F2",
        }
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P2" => Ok(Seed::P2),
            "F0" => Ok(Seed::F0),
            "F1" => Ok(Seed::F1),
            "F2" => Ok(Seed::F2),
            other => Err(Error::UnknownSeed(other.to_string())),
        }
    }
}

/// Cyclic sequence of self-intersection numbers around an anticanonical loop.
#[derive(Clone, Debug, Eq, PartialEq, Ord, PartialOrd, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelCycle(Vec<i64>);

impl LabelCycle {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if labels.len() < 3 {
            return Err(Error::InvalidFan(format!(
                "a loop needs at least 3 components, got {}",
                labels.len()
            )));
        }
        Ok(LabelCycle(labels))
    }

    pub fn labels(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `K^2 = (sum of D_i)^2 = sum a_i + 2 * (number of nodes)`.
    pub fn k2(&self) -> i64 {
        self.0.iter().sum::<i64>() + 2 * self.0.len() as i64
    }

    /// `sum a_i = 12 - 3n` holds for every smooth complete fan.
    pub fn satisfies_noether(&self) -> bool {
        self.0.iter().sum::<i64>() == 12 - 3 * self.0.len() as i64
    }

    /// Label-side effect of blowing up the node between positions `corner`
    /// and `corner + 1`: both neighbours drop by one and a `-1` is inserted.
    pub fn insert_corner(&self, corner: usize) -> Result<Self> {
        let n = self.0.len();
        if corner >= n {
            return Err(Error::CornerOutOfRange {
                step: None,
                index: corner,
                len: n,
            });
        }
        let mut out = self.0.clone();
        out[corner] -= 1;
        out[(corner + 1) % n] -= 1;
        out.insert(corner + 1, -1);
        Ok(LabelCycle(out))
    }
}

impl fmt::Display for LabelCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, Eq, PartialEq, Hash)]
pub struct Fan2D {
    rays: Vec<Ray>,
}

impl Fan2D {
    pub fn new(rays: Vec<Ray>) -> Result<Self> {
        if !check_smooth_complete(&rays) {
            return Err(Error::InvalidFan(format!(
                "rays {rays:?} do not form a smooth complete counterclockwise fan"
            )));
        }
        Ok(Fan2D { rays })
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Rays rotated so the lexicographically smallest one comes first.
    pub fn canonical_rays(&self) -> Vec<Ray> {
        let start = (0..self.rays.len())
            .min_by_key(|&i| self.rays[i])
            .unwrap_or(0);
        let mut out = self.rays[start..].to_vec();
        out.extend_from_slice(&self.rays[..start]);
        out
    }

    pub fn k2(&self) -> Result<i64> {
        Ok(boundary_labels(self)?.k2())
    }

    /// Coordinates `(alpha, beta)` with `w = alpha v_k + beta v_{k+1}`, where
    /// `k` is a cone containing `w`. Smoothness makes both integral.
    pub fn cone_coordinates(&self, w: Ray) -> (usize, i64, i64) {
        let n = self.rays.len();
        for k in 0..n {
            let u = self.rays[k];
            let v = self.rays[(k + 1) % n];
            let alpha = det(w, v);
            let beta = det(u, w);
            if alpha >= 0 && beta >= 0 {
                return (k, alpha, beta);
            }
        }
        unreachable!("a complete fan covers the plane")
    }
}

impl Serialize for Fan2D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.canonical_rays().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fan2D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rays = Vec::<Ray>::deserialize(d)?;
        Fan2D::new(rays).map_err(serde::de::Error::custom)
    }
}

pub fn seed_fan(seed: Seed) -> Fan2D {
    let rays = match seed {
        Seed::P2 => vec![[1, 0], [0, 1], [-1, -1]],
        Seed::F0 => vec![[1, 0], [0, 1], [-1, 0], [0, -1]],
        Seed::F1 => vec![[1, 0], [0, 1], [-1, 1], [0, -1]],
        Seed::F2 => vec![[1, 0], [0, 1], [-1, 2], [0, -1]],
    };
    Fan2D { rays }
}

/// Seed lookup by name, for script parsing.
pub fn seed_fan_by_name(name: &str) -> Result<Fan2D> {
    Ok(seed_fan(name.parse()?))
}

/// Insert `v_i + v_{i+1}` into the cone `(v_i, v_{i+1})`.
pub fn star_subdivide(fan: &Fan2D, corner: usize) -> Result<Fan2D> {
    let n = fan.rays.len();
    if corner >= n {
        return Err(Error::CornerOutOfRange {
            step: None,
            index: corner,
            len: n,
        });
    }
    let u = fan.rays[corner];
    let v = fan.rays[(corner + 1) % n];
    let mut rays = fan.rays.clone();
    rays.insert(corner + 1, [u[0] + v[0], u[1] + v[1]]);
    Ok(Fan2D { rays })
}

pub fn boundary_labels(fan: &Fan2D) -> Result<LabelCycle> {
    let n = fan.rays.len();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let prev = fan.rays[(i + n - 1) % n];
        let next = fan.rays[(i + 1) % n];
        let v = fan.rays[i];
        let s = [prev[0] + next[0], prev[1] + next[1]];
        if det(s, v) != 0 {
            return Err(Error::InvalidFan(format!(
                "neighbours of ray {i} do not sum to a multiple of it"
            )));
        }
        // v is primitive, so one coordinate is non-zero and divides evenly.
        let a = if v[0] != 0 {
            -s[0] / v[0]
        } else {
            -s[1] / v[1]
        };
        labels.push(a);
    }
    LabelCycle::new(labels)
}

/// Smooth (every consecutive determinant is `+1`), complete and winding
/// exactly once counterclockwise, with primitive rays.
pub fn check_smooth_complete(rays: &[Ray]) -> bool {
    let n = rays.len();
    if n < 3 {
        return false;
    }
    if rays.iter().any(|r| r[0].gcd(&r[1]) != 1) {
        return false;
    }
    if (0..n).any(|i| det(rays[i], rays[(i + 1) % n]) != 1) {
        return false;
    }
    // Every step turns strictly less than a half-turn, so the winding number
    // equals the number of crossings of the positive x-axis.
    let upper = |r: Ray| r[1] > 0 || (r[1] == 0 && r[0] > 0);
    let crossings = (0..n)
        .filter(|&i| !upper(rays[i]) && upper(rays[(i + 1) % n]))
        .count();
    crossings == 1
}

/// `-K` nef (every label `>= -2`) and big (`K^2 > 0`).
pub fn is_weak_del_pezzo(fan: &Fan2D) -> Result<bool> {
    let labels = boundary_labels(fan)?;
    Ok(labels.labels().iter().all(|&a| a >= -2) && labels.k2() > 0)
}
