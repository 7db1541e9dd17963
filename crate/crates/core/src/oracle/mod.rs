//! Oracles for the 2-Planar system.
//!
//! The loss of a configuration is computed against a fixed plane
//! assignment of the gold arcs. Gold arcs of each plane are classified as
//! individually reachable or not; the loss is the number of unreachable
//! arcs plus the number of cycles in the graph formed by the built arcs and
//! the reachable ones. Right after a Switch the parser is forced to take a
//! non-Switch transition, so the loss of such a configuration is the best
//! loss among those forced successors.

mod assign;
mod brute;

pub use assign::{assign_planes, static_derivation, static_oracle};
pub use brute::{brute_force_min_loss, BruteForce, DEFAULT_MAX_LEN};

use thiserror::Error;

use crate::graph::{arcs_cross, count_cycles, Arc, DepGraph, Label};
use crate::system::{Configuration, Plane, SystemError, Transition, TransitionKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("configuration is terminal")]
    Terminal,
    #[error("configuration is not on the static oracle's path")]
    OffPath,
    #[error("sentence length {len} exceeds the brute-force bound {max}")]
    TooLong { len: usize, max: usize },
    #[error("plane {0} contains crossing arcs")]
    CrossingPlane(usize),
    #[error("assignment does not cover the gold arcs")]
    Mismatch,
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Assignment {
    Plane(Plane),
    Discarded,
}

/// Partition of the gold arcs into plane 1, plane 2 and discarded arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneAssignment {
    heads: Vec<Option<usize>>,
    labels: Vec<Option<Label>>,
    /// Indexed by dependent; `None` only for the root.
    planes: Vec<Option<Assignment>>,
}

impl PlaneAssignment {
    /// An explicit assignment, e.g. for testing against a non-canonical
    /// split. `assignment[i - 1]` is the assignment of the arc into token `i`.
    pub fn from_parts(gold: &DepGraph, assignment: &[Assignment]) -> Result<Self, OracleError> {
        if assignment.len() != gold.len() {
            return Err(OracleError::Mismatch);
        }
        let n = gold.len();
        let planes: Vec<Option<Assignment>> = std::iter::once(None)
            .chain(assignment.iter().copied().map(Some))
            .collect();
        let pa = PlaneAssignment {
            heads: gold.node_heads(),
            labels: std::iter::once(None)
                .chain((1..=n).map(|d| gold.label(d)))
                .collect(),
            planes,
        };
        for plane in Plane::BOTH {
            let arcs = pa.plane_arcs(plane);
            for (i, &a) in arcs.iter().enumerate() {
                if arcs[i + 1..].iter().any(|&b| arcs_cross(a, b)) {
                    return Err(OracleError::CrossingPlane(plane.number()));
                }
            }
        }
        Ok(pa)
    }

    /// Number of tokens.
    pub fn len(&self) -> usize {
        self.heads.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gold_head(&self, dep: usize) -> Option<usize> {
        self.heads[dep]
    }

    pub fn gold_label(&self, dep: usize) -> Option<Label> {
        self.labels[dep]
    }

    pub fn assignment(&self, dep: usize) -> Option<Assignment> {
        self.planes[dep]
    }

    /// Plane of the gold arc into `dep`, unless it was discarded.
    pub fn plane_of(&self, dep: usize) -> Option<Plane> {
        match self.planes[dep] {
            Some(Assignment::Plane(p)) => Some(p),
            _ => None,
        }
    }

    pub fn plane_arcs(&self, plane: Plane) -> Vec<Arc> {
        self.arcs_where(|a| a == Assignment::Plane(plane))
    }

    pub fn plane1(&self) -> Vec<Arc> {
        self.plane_arcs(Plane::First)
    }

    pub fn plane2(&self) -> Vec<Arc> {
        self.plane_arcs(Plane::Second)
    }

    pub fn discarded(&self) -> Vec<Arc> {
        self.arcs_where(|a| a == Assignment::Discarded)
    }

    /// Number of arcs in plane 1 and plane 2 together.
    pub fn kept_count(&self) -> usize {
        self.planes
            .iter()
            .filter(|a| matches!(a, Some(Assignment::Plane(_))))
            .count()
    }

    fn arcs_where(&self, pred: impl Fn(Assignment) -> bool) -> Vec<Arc> {
        (1..self.heads.len())
            .filter(|&d| self.planes[d].is_some_and(&pred))
            .map(|d| Arc::new(self.heads[d].unwrap(), d))
            .collect()
    }

    /// Whether the arc into `dep` is built in its assigned plane.
    pub fn built_correctly(&self, c: &Configuration, dep: usize) -> bool {
        match self.plane_of(dep) {
            Some(p) => c.arcs().head(dep) == self.heads[dep] && c.arc_plane(dep) == Some(p),
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossBreakdown {
    /// Individually unreachable gold arcs of plane 1 and plane 2.
    pub unreachable: [Vec<Arc>; 2],
    /// Cycles in the built arcs plus the individually reachable gold arcs.
    pub cycle_count: usize,
    /// Extra loss forced by a preceding Switch; zero otherwise.
    pub forced_move_penalty: usize,
    pub total: usize,
}

/// Individual reachability of the gold arcs, classified per plane.
struct Reachability {
    unreachable: [Vec<Arc>; 2],
    /// Built arcs plus reachable gold arcs, as a head array.
    completed: Vec<Option<usize>>,
}

fn classify(c: &Configuration, pa: &PlaneAssignment, keep_sets: bool) -> (usize, Reachability) {
    let n = c.len();
    let mut on_stack = [vec![false; n + 1], vec![false; n + 1]];
    for plane in Plane::BOTH {
        for &v in c.stack(plane) {
            on_stack[plane.index()][v] = true;
        }
    }
    let arcs = c.arcs();
    let mut completed = arcs.heads().to_vec();
    let mut unreachable: [Vec<Arc>; 2] = [Vec::new(), Vec::new()];
    let mut count = 0;
    for y in 1..=n {
        let Some(plane) = pa.plane_of(y) else {
            continue;
        };
        let x = pa.heads[y].unwrap();
        let built_head = arcs.head(y);
        if built_head == Some(x) && c.arc_plane(y) == Some(plane) {
            continue;
        }
        let (lo, hi) = Arc::new(x, y).span();
        let out_of_reach =
            !(on_stack[plane.index()][lo] || c.in_buffer(lo)) || !c.in_buffer(hi);
        // A head other than x, or x itself in the other plane, blocks the arc.
        let headed = built_head.is_some();
        let connected = c.wcc().same_set(x, y);
        if out_of_reach || headed || connected {
            count += 1;
            if keep_sets {
                unreachable[plane.index()].push(Arc::new(x, y));
            }
        } else {
            completed[y] = Some(x);
        }
    }
    (
        count,
        Reachability {
            unreachable,
            completed,
        },
    )
}

/// The loss ignoring any pending forced move.
fn unforced_loss(c: &Configuration, pa: &PlaneAssignment) -> usize {
    let (u, r) = classify(c, pa, false);
    u + count_cycles(&r.completed)
}

fn forced_successor_loss(c: &Configuration, pa: &PlaneAssignment) -> Option<usize> {
    TransitionKind::ALL
        .into_iter()
        .filter(|&k| k != TransitionKind::Switch && c.is_legal(k))
        .map(|k| unforced_loss(&c.apply(k.with_label(Label(0))).unwrap(), pa))
        .min()
}

/// Minimum number of assigned gold arcs that cannot end up built in their
/// plane from `c`.
pub fn loss(c: &Configuration, pa: &PlaneAssignment) -> LossBreakdown {
    let (u, r) = classify(c, pa, true);
    let cycle_count = count_cycles(&r.completed);
    let base = u + cycle_count;
    let forced_move_penalty = if c.last_was_switch() && !c.is_terminal() {
        forced_successor_loss(c, pa).map_or(0, |best| best - base)
    } else {
        0
    };
    LossBreakdown {
        unreachable: r.unreachable,
        cycle_count,
        forced_move_penalty,
        total: base + forced_move_penalty,
    }
}

fn total_loss(c: &Configuration, pa: &PlaneAssignment) -> usize {
    let base = unforced_loss(c, pa);
    if c.last_was_switch() && !c.is_terminal() {
        forced_successor_loss(c, pa).unwrap_or(base)
    } else {
        base
    }
}

/// Per-transition loss deltas and the recommended zero-cost set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionCosts {
    /// Every legal transition with its cost; `None` marks a Switch after
    /// which nothing else is legal.
    pub costs: Vec<(TransitionKind, Option<usize>)>,
    pub zero_cost: Vec<TransitionKind>,
}

impl TransitionCosts {
    pub fn cost(&self, kind: TransitionKind) -> Option<usize> {
        self.costs
            .iter()
            .find(|(k, _)| *k == kind)
            .and_then(|(_, c)| *c)
    }

    pub fn is_zero_cost(&self, kind: TransitionKind) -> bool {
        self.zero_cost.contains(&kind)
    }
}

/// Costs of every legal transition, with the zero-cost set regularized.
pub fn transition_costs(c: &Configuration, pa: &PlaneAssignment) -> Result<TransitionCosts, OracleError> {
    let legal = c.legal().map_err(|_| OracleError::Terminal)?;
    let base = total_loss(c, pa);
    let label = Label(0);
    let costs: Vec<(TransitionKind, Option<usize>)> = legal
        .into_iter()
        .map(|k| {
            let next = c.apply(k.with_label(label)).unwrap();
            let cost = if k == TransitionKind::Switch {
                forced_successor_loss(&next, pa).map(|l| l - base)
            } else {
                Some(unforced_loss(&next, pa) - base)
            };
            (k, cost)
        })
        .collect();
    let zero_cost = costs
        .iter()
        .filter(|(_, cost)| *cost == Some(0))
        .map(|(k, _)| *k)
        .collect();
    Ok(regularize(c, TransitionCosts { costs, zero_cost }))
}

/// Drops Switch from the zero-cost set whenever some other transition is
/// also zero-cost, so arcs of the active plane are built before changing
/// planes.
pub fn regularize(_c: &Configuration, mut costs: TransitionCosts) -> TransitionCosts {
    let other_zero = costs
        .zero_cost
        .iter()
        .any(|&k| k != TransitionKind::Switch);
    if other_zero {
        costs.zero_cost.retain(|&k| k != TransitionKind::Switch);
    }
    costs
}

/// Labels a zero-cost transition kind: arcs that are gold get their gold
/// label.
pub fn gold_transition(c: &Configuration, pa: &PlaneAssignment, kind: TransitionKind) -> Transition {
    let label = c
        .candidate_arc(kind)
        .filter(|a| pa.gold_head(a.dep) == Some(a.head))
        .and_then(|a| pa.gold_label(a.dep))
        .unwrap_or(Label(0));
    kind.with_label(label)
}

#[cfg(test)]
mod tests;
