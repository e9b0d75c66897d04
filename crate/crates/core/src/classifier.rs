//! Enumeration of the anticanonical loops that occur, up to dihedral symmetry.
//!
//! A smooth complete fan is determined up to `GL(2, Z)` by its label cycle
//! (`v_{i+1} = -a_i v_i - v_{i-1}` from any starting basis), so deduplicating
//! the search frontier by the normalized cycle loses nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neg_curves::verify_loop_contains_all_negatives;
use crate::par::{self, Execution};
use crate::pic_lattice::Base;
use crate::surface_builder::{build_from_script, cross_validate, BlowupScript};
use crate::toric_fan::{
    boundary_labels, is_weak_del_pezzo, seed_fan, star_subdivide, Fan2D, LabelCycle, Seed,
};

/// The twelve loops, read top row left to right, then bottom row right to left.
pub const FIGURES: [(u8, &[i64]); 12] = [
    (1, &[-1, -1, -1, -1, -1, -1]),
    (2, &[-2, -1, -2, -1, -1, -1, -1]),
    (3, &[-2, -1, -2, -1, -2, -1, -2, -1]),
    (4, &[-1, -2, -2, -1, -2, -1, -1, -2]),
    (5, &[-1, -2, -2, -1, -2, -2, -1, -2, -2]),
    (6, &[-1, 0, -1, -1, -2, -1]),
    (7, &[-1, 0, -2, -1, -2, -2, -1]),
    (8, &[-2, 0, -2, -1, -2, -2, -2, -1]),
    (9, &[0, 0, -1, -1, -1]),
    (10, &[-2, 0, 0, -1, -2, -1]),
    (11, &[0, 1, -1, -1, -2]),
    (12, &[-2, 0, 1, -2, -1, -2]),
];

pub fn figure_cycle(id: u8) -> Option<LabelCycle> {
    FIGURES
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, l)| table_cycle(l))
}

/// A dihedral image of a cyclic sequence: start index and direction.
#[derive(Copy, Clone, Debug, Eq, PartialEq)]
pub struct Orientation {
    pub start: usize,
    pub reversed: bool,
}

impl Orientation {
    /// Position in the original sequence of entry `k` of the image.
    pub fn source_index(&self, k: usize, len: usize) -> usize {
        if self.reversed {
            (self.start + len - k % len) % len
        } else {
            (self.start + k) % len
        }
    }

    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        (0..items.len())
            .map(|k| items[self.source_index(k, items.len())].clone())
            .collect()
    }
}

fn orientations(len: usize) -> impl Iterator<Item = Orientation> {
    [false, true]
        .into_iter()
        .flat_map(move |reversed| (0..len).map(move |start| Orientation { start, reversed }))
}

/// Lexicographically smallest rotation or reflection.
pub fn normalize_cycle(c: &LabelCycle) -> LabelCycle {
    let labels = c.labels();
    let best = orientations(labels.len())
        .map(|o| o.apply(labels))
        .min()
        .expect("cycle is non-empty");
    LabelCycle::new(best).expect("same length as input")
}

/// An orientation taking `from` onto `to`, if they are dihedrally equivalent.
pub fn find_orientation(from: &[i64], to: &[i64]) -> Option<Orientation> {
    if from.len() != to.len() {
        return None;
    }
    orientations(from.len()).find(|o| o.apply(from) == to)
}

pub fn identify_figure(c: &LabelCycle) -> Option<u8> {
    let key = normalize_cycle(c);
    FIGURES
        .iter()
        .find(|(_, l)| normalize_cycle(&table_cycle(l)) == key)
        .map(|(id, _)| *id)
}

fn table_cycle(labels: &[i64]) -> LabelCycle {
    LabelCycle::new(labels.to_vec()).expect("table cycles have length >= 3")
}

/// Contract the `(-1)` component at `pos`: delete it and raise both
/// neighbours by one.
pub fn contract(c: &LabelCycle, pos: usize) -> Result<LabelCycle> {
    let labels = c.labels();
    let n = labels.len();
    if pos >= n {
        return Err(Error::CornerOutOfRange {
            step: None,
            index: pos,
            len: n,
        });
    }
    if labels[pos] != -1 {
        return Err(Error::Unsupported(format!(
            "component {pos} has self-intersection {}, not -1",
            labels[pos]
        )));
    }
    if n <= 3 {
        return Err(Error::Unsupported(
            "cannot contract a loop of length 3".into(),
        ));
    }
    let mut out = labels.to_vec();
    out[(pos + n - 1) % n] += 1;
    out[(pos + 1) % n] += 1;
    out.remove(pos);
    LabelCycle::new(out)
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedSurface {
    pub figure_id: Option<u8>,
    pub cycle: LabelCycle,
    pub k2: i64,
    pub witness_script: BlowupScript,
    /// Lattice-side certificate that every negative curve lies on the loop.
    /// `None` when the witness is not a plane blow-up and cannot be checked.
    pub negatives_in_loop: Option<bool>,
}

#[derive(Clone, Debug, Eq, PartialEq)]
pub struct EnumerationOptions {
    pub k2_min: i64,
    pub k2_max: i64,
    pub seeds: Vec<Seed>,
    pub exec: Execution,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            k2_min: 3,
            k2_max: 7,
            seeds: Seed::ALL.to_vec(),
            exec: Execution::default(),
        }
    }
}

impl EnumerationOptions {
    pub fn range(k2_min: i64, k2_max: i64) -> Self {
        EnumerationOptions {
            k2_min,
            k2_max,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, Eq, PartialEq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub fans_visited: usize,
    pub noether_violations: usize,
    pub pruned_below_minus_two: usize,
    pub levels: usize,
    /// Weak del Pezzo fans with labels in `{-2,-1,0,1}` seen at each `K^2`,
    /// before deduplication, across the whole search depth.
    pub admissible_by_k2: BTreeMap<i64, usize>,
    pub rejected_by_negativity: Vec<LabelCycle>,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub classes: Vec<ClassifiedSurface>,
    pub stats: EnumerationStats,
}

#[derive(Clone)]
struct Node {
    script: BlowupScript,
    fan: Fan2D,
}

struct Child {
    node: Node,
    labels: LabelCycle,
    weak_dp: bool,
}

fn witness_key(s: &BlowupScript) -> (Seed, &[usize]) {
    (s.seed, &s.steps)
}

pub fn enumerate_classes(opts: &EnumerationOptions) -> Result<Enumeration> {
    if !(1 <= opts.k2_min && opts.k2_min <= opts.k2_max && opts.k2_max <= 7) {
        return Err(Error::K2Range {
            min: opts.k2_min,
            max: opts.k2_max,
        });
    }
    let mut stats = EnumerationStats::default();
    let mut found: BTreeMap<LabelCycle, BlowupScript> = BTreeMap::new();

    let mut seeds = opts.seeds.clone();
    seeds.sort();
    seeds.dedup();
    let mut frontier: Vec<Node> = seeds
        .iter()
        .map(|&s| Node {
            script: BlowupScript::new(s, Vec::new()),
            fan: seed_fan(s),
        })
        .collect();
    for node in &frontier {
        stats.fans_visited += 1;
        if !boundary_labels(&node.fan)?.satisfies_noether() {
            stats.noether_violations += 1;
        }
    }

    while !frontier.is_empty() {
        stats.levels += 1;
        let children: Vec<Result<Child>> = par::flat_map(opts.exec, &frontier, |node| {
            (0..node.fan.len())
                .map(|corner| {
                    let fan = star_subdivide(&node.fan, corner)?;
                    let labels = boundary_labels(&fan)?;
                    let weak_dp = is_weak_del_pezzo(&fan)?;
                    Ok(Child {
                        node: Node {
                            script: node.script.then(corner),
                            fan,
                        },
                        labels,
                        weak_dp,
                    })
                })
                .collect()
        });

        let mut next: BTreeMap<LabelCycle, Node> = BTreeMap::new();
        for child in children {
            let child = child?;
            stats.fans_visited += 1;
            if !child.labels.satisfies_noether() {
                stats.noether_violations += 1;
            }
            let labels = child.labels.labels();
            let k2 = child.labels.k2();
            // Labels never go up under further blow-ups, and K^2 only drops.
            if labels.iter().any(|&a| a < -2) {
                stats.pruned_below_minus_two += 1;
                continue;
            }
            if k2 < opts.k2_min {
                continue;
            }
            let key = normalize_cycle(&child.labels);
            let admissible = child.weak_dp && labels.iter().all(|&a| (-2..=1).contains(&a));
            if admissible {
                *stats.admissible_by_k2.entry(k2).or_default() += 1;
            }
            if admissible && k2 <= opts.k2_max {
                let better = found
                    .get(&key)
                    .is_none_or(|w| witness_key(&child.node.script) < witness_key(w));
                if better {
                    found.insert(key.clone(), child.node.script.clone());
                }
            }
            match next.get(&key) {
                Some(n) if witness_key(&n.script) <= witness_key(&child.node.script) => {}
                _ => {
                    next.insert(key, child.node);
                }
            }
        }
        frontier = next.into_values().collect();
    }

    let candidates: Vec<(LabelCycle, BlowupScript)> = found.into_iter().collect();
    let checked: Vec<Result<ClassifiedSurface>> =
        par::map(opts.exec, &candidates, |(cycle, script)| {
            let model = build_from_script(script)?;
            let cv = cross_validate(&model)?;
            if !cv.passed() {
                return Err(Error::ModelCorruption(format!(
                    "witness {script:?} fails cross-validation: {:?}",
                    cv.failures().collect::<Vec<_>>()
                )));
            }
            let negatives_in_loop = match model.sig.base {
                Base::Plane => Some(verify_loop_contains_all_negatives(&model)?.holds),
                Base::Hirzebruch(_) => None,
            };
            Ok(ClassifiedSurface {
                figure_id: identify_figure(cycle),
                cycle: cycle.clone(),
                k2: cycle.k2(),
                witness_script: script.clone(),
                negatives_in_loop,
            })
        });

    let mut classes = Vec::new();
    for c in checked {
        let c = c?;
        if c.negatives_in_loop == Some(false) {
            stats.rejected_by_negativity.push(c.cycle);
        } else {
            classes.push(c);
        }
    }
    classes.sort_by(|a, b| (a.figure_id, &a.cycle).cmp(&(b.figure_id, &b.cycle)));
    Ok(Enumeration { classes, stats })
}

/// Number of figure loops with `K^2` in the given range.
pub fn expected_count(k2_min: i64, k2_max: i64) -> usize {
    FIGURES
        .iter()
        .filter(|(_, l)| {
            let k2 = table_cycle(l).k2();
            (k2_min..=k2_max).contains(&k2)
        })
        .count()
}

/// Indices into [`BlowdownWeb::nodes`].
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct WebEdge {
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct OuterTarget {
    /// Index into [`BlowdownWeb::nodes`].
    pub from: usize,
    pub cycle: LabelCycle,
    /// `F0`, `F1` or `F2` for `K^2 = 8` targets.
    pub name: Option<String>,
}

/// Blow-downs between classified surfaces, one `(-1)` loop curve at a time.
#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct BlowdownWeb {
    pub nodes: Vec<LabelCycle>,
    pub figure_ids: Vec<Option<u8>>,
    pub edges: Vec<WebEdge>,
    pub hirzebruch_targets: Vec<OuterTarget>,
    /// Targets with `K^2 <= 7` that are not among the nodes.
    pub escapes: Vec<OuterTarget>,
}

impl BlowdownWeb {
    fn index_of_figure(&self, id: u8) -> Option<usize> {
        self.figure_ids.iter().position(|f| *f == Some(id))
    }

    pub fn has_figure_edge(&self, from: u8, to: u8) -> bool {
        match (self.index_of_figure(from), self.index_of_figure(to)) {
            (Some(a), Some(b)) => self.edges.iter().any(|e| e.from == a && e.to == b),
            _ => false,
        }
    }

    pub fn figure_edges(&self) -> Vec<(u8, u8)> {
        self.edges
            .iter()
            .filter_map(|e| Some((self.figure_ids[e.from]?, self.figure_ids[e.to]?)))
            .collect()
    }
}

fn hirzebruch_name(c: &LabelCycle) -> Option<String> {
    let key = normalize_cycle(c);
    Seed::ALL
        .into_iter()
        .filter(|s| *s != Seed::P2)
        .find(|&s| {
            boundary_labels(&seed_fan(s))
                .map(|l| normalize_cycle(&l) == key)
                .unwrap_or(false)
        })
        .map(|s| s.name().to_string())
}

pub fn blowdown_web(classes: &[ClassifiedSurface]) -> Result<BlowdownWeb> {
    let nodes: Vec<LabelCycle> = classes.iter().map(|c| normalize_cycle(&c.cycle)).collect();
    let index: BTreeMap<&LabelCycle, usize> =
        nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut edges = BTreeSet::new();
    let mut hirz = BTreeSet::new();
    let mut escapes = BTreeSet::new();
    for (i, cycle) in nodes.iter().enumerate() {
        for (pos, &a) in cycle.labels().iter().enumerate() {
            if a != -1 || cycle.len() <= 3 {
                continue;
            }
            let target = normalize_cycle(&contract(cycle, pos)?);
            if let Some(&j) = index.get(&target) {
                edges.insert((i, j));
            } else if target.k2() >= 8 {
                hirz.insert((i, target));
            } else {
                escapes.insert((i, target));
            }
        }
    }
    let outer = |set: BTreeSet<(usize, LabelCycle)>| {
        set.into_iter()
            .map(|(from, cycle)| OuterTarget {
                from,
                name: hirzebruch_name(&cycle),
                cycle,
            })
            .collect()
    };
    Ok(BlowdownWeb {
        figure_ids: classes.iter().map(|c| c.figure_id).collect(),
        nodes,
        edges: edges
            .into_iter()
            .map(|(from, to)| WebEdge { from, to })
            .collect(),
        hirzebruch_targets: outer(hirz),
        escapes: outer(escapes),
    })
}

/// Reference arrows `X(from) -> X(to)`, read off the printed chains
/// `X(5) -> X(4) -> X(2) -> X(1) <- X(2) <- X(3)`, `X(6) <- X(7) <- X(8)`,
/// `X(9) <- X(10) -> X(11) <- X(12)`. The first chain names `X(2)` twice, so
/// the arrows touching its second occurrence or `X(4) -> X(2)` cannot be read
/// unambiguously and are flagged.
pub const PRINTED_EDGES: [(u8, u8, bool); 10] = [
    (5, 4, false),
    (4, 2, true),
    (2, 1, false),
    (2, 1, true),
    (3, 2, true),
    (7, 6, false),
    (8, 7, false),
    (10, 9, false),
    (10, 11, false),
    (12, 11, false),
];

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct PrintedEdgeCheck {
    pub from: u8,
    pub to: u8,
    pub ambiguous: bool,
    pub computed: bool,
}

#[derive(Clone, Debug, Eq, PartialEq, Serialize, Deserialize)]
pub struct WebComparison {
    pub printed: Vec<PrintedEdgeCheck>,
    /// Computed edges between figures that no printed chain mentions.
    pub unprinted: Vec<(u8, u8)>,
    pub discrepancies: Vec<String>,
}

pub fn compare_with_printed(web: &BlowdownWeb) -> WebComparison {
    let printed: Vec<PrintedEdgeCheck> = PRINTED_EDGES
        .iter()
        .map(|&(from, to, ambiguous)| PrintedEdgeCheck {
            from,
            to,
            ambiguous,
            computed: web.has_figure_edge(from, to),
        })
        .collect();
    let printed_set: BTreeSet<(u8, u8)> = PRINTED_EDGES.iter().map(|&(a, b, _)| (a, b)).collect();
    let unprinted: Vec<(u8, u8)> = web
        .figure_edges()
        .into_iter()
        .filter(|e| !printed_set.contains(e))
        .collect();

    let mut discrepancies = vec![
        "printed chain `X(5) -> X(4) -> X(2) -> X(1) <- X(2) <- X(3)` names X(2) twice; \
         its arrows X(4) -> X(2), the second X(2) -> X(1) and X(3) -> X(2) are ambiguous"
            .to_string(),
    ];
    for p in printed.iter().filter(|p| p.ambiguous) {
        discrepancies.push(format!(
            "ambiguous printed arrow X({}) -> X({}): {} in the computed web",
            p.from,
            p.to,
            if p.computed { "present" } else { "absent" }
        ));
    }
    for p in printed.iter().filter(|p| !p.ambiguous && !p.computed) {
        discrepancies.push(format!(
            "printed arrow X({}) -> X({}) is not computed",
            p.from, p.to
        ));
    }
    WebComparison {
        printed,
        unprinted,
        discrepancies,
    }
}

/// DOT rendering of the web, preceded by the comparison as `//` comments.
pub fn web_to_dot(web: &BlowdownWeb, cmp: &WebComparison) -> String {
    let mut out = String::new();
    let name = |i: usize| match web.figure_ids[i] {
        Some(id) => format!("X{id}"),
        None => format!("N{i}"),
    };
    out.push_str("// printed arrow | ambiguous | computed\n");
    for p in &cmp.printed {
        let _ = writeln!(
            out,
            "// X({}) -> X({}) | {} | {}",
            p.from,
            p.to,
            if p.ambiguous { "yes" } else { "no" },
            if p.computed { "yes" } else { "no" }
        );
    }
    for (a, b) in &cmp.unprinted {
        let _ = writeln!(out, "// computed only: X({a}) -> X({b})");
    }
    for d in &cmp.discrepancies {
        let _ = writeln!(out, "// discrepancy: {d}");
    }
    out.push_str("digraph blowdowns {\n");
    for (i, c) in web.nodes.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {} [label=\"{}\\nK2={}\\n{}\"];",
            name(i),
            name(i),
            c.k2(),
            c
        );
    }
    let mut hirz_names = BTreeSet::new();
    for t in &web.hirzebruch_targets {
        if let Some(n) = &t.name {
            hirz_names.insert(n.clone());
        }
    }
    for n in &hirz_names {
        let _ = writeln!(out, "  {n} [shape=box, label=\"{n}\\nK2=8\"];");
    }
    for e in &web.edges {
        let _ = writeln!(out, "  {} -> {};", name(e.from), name(e.to));
    }
    for t in &web.hirzebruch_targets {
        let target = t.name.clone().unwrap_or_else(|| format!("\"{}\"", t.cycle));
        let _ = writeln!(out, "  {} -> {} [style=dashed];", name(t.from), target);
    }
    for t in &web.escapes {
        let _ = writeln!(out, "  {} -> \"{}\" [color=red];", name(t.from), t.cycle);
    }
    out.push_str("}\n");
    out
}
