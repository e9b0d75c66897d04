//! Oracles shared by the integration suites. None of them call into the
//! search code they are used to check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dp_endo::surface_builder::BlowupScript;
use dp_endo::toric_fan::Seed;

/// Lex-min over rotations and reflections, written out longhand.
pub fn dihedral_min(labels: &[i64]) -> Vec<i64> {
    let n = labels.len();
    let mut best: Option<Vec<i64>> = None;
    for start in 0..n {
        for rev in [false, true] {
            let v: Vec<i64> = (0..n)
                .map(|k| {
                    let i = if rev {
                        (start + n - k) % n
                    } else {
                        (start + k) % n
                    };
                    labels[i]
                })
                .collect();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    best.unwrap()
}

/// Does `v_{i-1} + v_{i+1} = -a_i v_i` close up into a fan winding once?
fn closes_once(labels: &[i64]) -> bool {
    let (mut p, mut q) = ([1i64, 0], [0i64, 1]);
    for &a in labels {
        let r = [-a * q[0] - p[0], -a * q[1] - p[1]];
        p = q;
        q = r;
    }
    let closes = p == [1, 0] && q == [0, 1];
    let n = labels.len() as i64;
    closes && labels.iter().sum::<i64>() == 12 - 3 * n
}

/// Dihedral classes of label cycles of the given length with every label in
/// `{-2,-1,0,1}` that are the boundary of a smooth complete fan.
pub fn loops_of_length(len: usize) -> BTreeSet<Vec<i64>> {
    let target = 12 - 3 * len as i64;
    let mut out = BTreeSet::new();
    let mut cur = Vec::with_capacity(len);
    fn go(len: usize, target: i64, cur: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
        let sum: i64 = cur.iter().sum();
        let left = (len - cur.len()) as i64;
        if sum - 2 * left > target || sum + left < target {
            return;
        }
        if cur.len() == len {
            if closes_once(cur) {
                out.insert(dihedral_min(cur));
            }
            return;
        }
        for a in -2..=1 {
            cur.push(a);
            go(len, target, cur, out);
            cur.pop();
        }
    }
    go(len, target, &mut cur, &mut out);
    out
}

/// All such loops with `K^2 = 12 - len` in `[k2_min, k2_max]`.
pub fn loop_oracle(k2_min: i64, k2_max: i64) -> BTreeSet<Vec<i64>> {
    (k2_min..=k2_max)
        .filter(|&k2| k2 <= 9)
        .flat_map(|k2| loops_of_length((12 - k2) as usize))
        .collect()
}

/// Classes `(a; b_1..b_n)` with `D^2 = -s` and `K.D = s - 2`, found by
/// scanning `a` in `[-2, 5]` and each `b_i` in `[-4, 4]`.
pub fn brute_negative_classes(n: usize, s: i64) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    let mut b = vec![-4i64; n];
    loop {
        let sb: i64 = b.iter().sum();
        let sq: i64 = b.iter().map(|x| x * x).sum();
        for a in -2..=5i64 {
            // D^2 = a^2 - sum b^2, K.D = -3a - sum b
            if a * a - sq == -s && -3 * a - sb == s - 2 {
                let mut v = vec![a];
                v.extend(&b);
                out.insert(v);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            b[i] += 1;
            if b[i] <= 4 {
                break;
            }
            b[i] = -4;
            i += 1;
        }
    }
}

/// A script from raw corner choices, each reduced modulo the loop length at
/// that step.
pub fn script_from_raw(seed: Seed, raw: &[usize]) -> BlowupScript {
    let start = if seed == Seed::P2 { 3 } else { 4 };
    let steps = raw
        .iter()
        .enumerate()
        .map(|(k, r)| r % (start + k))
        .collect();
    BlowupScript::new(seed, steps)
}

pub fn witness_files() -> Vec<std::path::PathBuf> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}
