use std::fmt::Write as _;
use std::str::FromStr;

use crate::classifier::{figure_cycle, find_orientation, identify_figure, Orientation};
use crate::error::Error;
use crate::surface_builder::SurfaceModel;
use crate::toric_fan::LabelCycle;

#[derive(Copy, Clone, Debug, Eq, PartialEq)]
pub enum GraphFormat {
    Dot,
    Ascii,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "ascii" => Ok(GraphFormat::Ascii),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Indices of the loop in drawing order: matched to the figure table when the
/// loop is one of the twelve, otherwise as built.
pub fn figure_order(labels: &[i64]) -> Vec<usize> {
    let identity = Orientation {
        start: 0,
        reversed: false,
    };
    let o = LabelCycle::new(labels.to_vec())
        .ok()
        .and_then(|c| identify_figure(&c))
        .and_then(figure_cycle)
        .and_then(|f| find_orientation(labels, f.labels()))
        .unwrap_or(identity);
    (0..labels.len())
        .map(|k| o.source_index(k, labels.len()))
        .collect()
}

/// Two-row drawing: the first half of the loop on top, left to right, the
/// rest underneath, read right to left, joined at both ends.
pub fn ascii_loop(labels: &[i64]) -> String {
    let order = figure_order(labels);
    let cells: Vec<String> = order.iter().map(|&i| format!("({})", labels[i])).collect();
    let split = cells.len() / 2;
    let top = cells[..split].join(" -- ");
    let bottom: Vec<&str> = cells[split..].iter().rev().map(String::as_str).collect();
    let bottom = bottom.join(" -- ");

    let right = top.len().max(bottom.len()).saturating_sub(2);
    let mut bars = vec![b' '; right + 1];
    bars[1] = b'|';
    bars[right] = b'|';
    let bars = String::from_utf8(bars).expect("ascii");

    let mut out = String::new();
    for line in [top.as_str(), bars.as_str(), bars.as_str(), bottom.as_str()] {
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub fn dot_loop(model: &SurfaceModel, name: Option<&str>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph \"{}\" {{", name.unwrap_or("loop"));
    let n = model.loop_curves.len();
    for (i, c) in model.loop_curves.iter().enumerate() {
        let _ = writeln!(out, "  c{i} [label=\"{}\\n{}\"];", c.name, c.self_int);
    }
    for i in 0..n {
        let _ = writeln!(out, "  c{i} -- c{};", (i + 1) % n);
    }
    out.push_str("}\n");
    out
}
