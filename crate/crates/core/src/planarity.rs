//! Planarity statistics over a treebank.

use serde::Serialize;

use crate::graph::{is_one_planar, is_two_planar, Arc, DepGraph};
use crate::oracle::assign_planes;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlanarityReport {
    pub sentences: usize,
    pub arcs: usize,
    pub one_planar: usize,
    pub two_planar: usize,
    pub neither: usize,
    pub plane2_arcs: usize,
    pub discarded_arcs: usize,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl PlanarityReport {
    /// Share of sentences whose tree is 1-planar (projective with the root arcs).
    pub fn one_planar_pct(&self) -> f64 {
        pct(self.one_planar, self.sentences)
    }

    /// Share of sentences whose tree is 2-planar. 1-planar trees count too.
    pub fn two_planar_pct(&self) -> f64 {
        pct(self.two_planar, self.sentences)
    }

    pub fn neither_pct(&self) -> f64 {
        pct(self.neither, self.sentences)
    }

    pub fn plane2_pct(&self) -> f64 {
        pct(self.plane2_arcs, self.arcs)
    }

    pub fn discarded_pct(&self) -> f64 {
        pct(self.discarded_arcs, self.arcs)
    }

    pub fn to_text(&self) -> String {
        format!(
            "sentences {}\narcs {}\n1-planar {:.2}%\n2-planar {:.2}%\nneither {:.2}%\nplane-2 arcs {:.2}%\ndiscarded arcs {:.2}%\n",
            self.sentences,
            self.arcs,
            self.one_planar_pct(),
            self.two_planar_pct(),
            self.neither_pct(),
            self.plane2_pct(),
            self.discarded_pct()
        )
    }

    /// One JSON object, counts and percentages together.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sentences": self.sentences,
            "arcs": self.arcs,
            "one_planar": self.one_planar,
            "two_planar": self.two_planar,
            "neither": self.neither,
            "plane2_arcs": self.plane2_arcs,
            "discarded_arcs": self.discarded_arcs,
            "one_planar_pct": self.one_planar_pct(),
            "two_planar_pct": self.two_planar_pct(),
            "neither_pct": self.neither_pct(),
            "plane2_pct": self.plane2_pct(),
            "discarded_pct": self.discarded_pct(),
        })
    }
}

pub fn planarity_stats<'a, I>(trees: I) -> PlanarityReport
where
    I: IntoIterator<Item = &'a DepGraph>,
{
    let mut r = PlanarityReport::default();
    for tree in trees {
        let arcs: Vec<Arc> = tree.arcs().collect();
        r.sentences += 1;
        r.arcs += arcs.len();
        if is_one_planar(&arcs) {
            r.one_planar += 1;
        }
        if is_two_planar(&arcs) {
            r.two_planar += 1;
        } else {
            r.neither += 1;
        }
        let pa = assign_planes(tree);
        r.plane2_arcs += pa.plane2().len();
        r.discarded_arcs += pa.discarded().len();
    }
    r
}
