//! Arc-hybrid transitions with Swap, and its static-dynamic oracle.
//!
//! The root is node 0 at the buffer front. Once shifted it stays at the
//! bottom of the stack: it can never be a LeftArc dependent and RightArc
//! needs two stack items. Swap is decided statically from the projective
//! order of the gold tree; the arc and Shift transitions get dynamic costs.

use std::fmt;

use crate::graph::{Arc, ArcSet, DepGraph, Label};
use crate::system::{forest_completion, SystemError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HybridKind {
    Shift,
    LeftArc,
    RightArc,
    Swap,
}

impl HybridKind {
    pub const ALL: [HybridKind; 4] = [
        HybridKind::Shift,
        HybridKind::LeftArc,
        HybridKind::RightArc,
        HybridKind::Swap,
    ];

    pub fn is_arc(self) -> bool {
        matches!(self, HybridKind::LeftArc | HybridKind::RightArc)
    }

    pub fn with_label(self, label: Label) -> HybridTransition {
        match self {
            HybridKind::Shift => HybridTransition::Shift,
            HybridKind::LeftArc => HybridTransition::LeftArc(label),
            HybridKind::RightArc => HybridTransition::RightArc(label),
            HybridKind::Swap => HybridTransition::Swap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HybridTransition {
    Shift,
    LeftArc(Label),
    RightArc(Label),
    Swap,
}

impl HybridTransition {
    pub fn kind(self) -> HybridKind {
        match self {
            HybridTransition::Shift => HybridKind::Shift,
            HybridTransition::LeftArc(_) => HybridKind::LeftArc,
            HybridTransition::RightArc(_) => HybridKind::RightArc,
            HybridTransition::Swap => HybridKind::Swap,
        }
    }
}

impl fmt::Display for HybridTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HybridTransition::Shift => write!(f, "SH"),
            HybridTransition::LeftArc(l) => write!(f, "LA({})", l.0),
            HybridTransition::RightArc(l) => write!(f, "RA({})", l.0),
            HybridTransition::Swap => write!(f, "SW"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridConfiguration {
    n: usize,
    stack: Vec<usize>,
    /// Front last, so Shift pops and Swap inserts near the end.
    buffer: Vec<usize>,
    arcs: ArcSet,
    swaps: usize,
}

impl HybridConfiguration {
    pub fn initial(n: usize) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::EmptySentence);
        }
        Ok(HybridConfiguration {
            n,
            stack: Vec::new(),
            buffer: (0..=n).rev().collect(),
            arcs: ArcSet::new(n + 1),
            swaps: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Bottom first.
    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    /// Front first.
    pub fn buffer(&self) -> Vec<usize> {
        self.buffer.iter().rev().copied().collect()
    }

    pub fn top(&self) -> Option<usize> {
        self.stack.last().copied()
    }

    pub fn second(&self) -> Option<usize> {
        self.stack.len().checked_sub(2).map(|i| self.stack[i])
    }

    pub fn buffer_front(&self) -> Option<usize> {
        self.buffer.last().copied()
    }

    pub fn in_buffer(&self, v: usize) -> bool {
        self.buffer.contains(&v)
    }

    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    pub fn swaps(&self) -> usize {
        self.swaps
    }

    pub fn is_terminal(&self) -> bool {
        self.buffer.is_empty() && self.stack.len() <= 1
    }

    pub fn candidate_arc(&self, kind: HybridKind) -> Option<Arc> {
        let s = self.top()?;
        match kind {
            HybridKind::LeftArc => Some(Arc::new(self.buffer_front()?, s)),
            HybridKind::RightArc => Some(Arc::new(self.second()?, s)),
            _ => None,
        }
    }

    pub fn is_legal(&self, kind: HybridKind) -> bool {
        if self.is_terminal() {
            return false;
        }
        match kind {
            HybridKind::Shift => !self.buffer.is_empty(),
            HybridKind::LeftArc => {
                self.top().is_some_and(|s| s != 0) && !self.buffer.is_empty()
            }
            HybridKind::RightArc => self.stack.len() >= 2,
            HybridKind::Swap => match (self.top(), self.buffer_front()) {
                (Some(s), Some(b)) => 0 < s && s < b,
                _ => false,
            },
        }
    }

    pub fn legal(&self) -> Result<Vec<HybridKind>, SystemError> {
        if self.is_terminal() {
            return Err(SystemError::Terminal);
        }
        Ok(HybridKind::ALL
            .into_iter()
            .filter(|&k| self.is_legal(k))
            .collect())
    }

    pub fn apply(&self, t: HybridTransition) -> Result<HybridConfiguration, SystemError> {
        let mut next = self.clone();
        next.apply_mut(t)?;
        Ok(next)
    }

    pub fn apply_mut(&mut self, t: HybridTransition) -> Result<(), SystemError> {
        if self.is_terminal() {
            return Err(SystemError::Terminal);
        }
        if !self.is_legal(t.kind()) {
            return Err(SystemError::IllegalHybrid(t.kind()));
        }
        match t {
            HybridTransition::Shift => {
                let b = self.buffer.pop().unwrap();
                self.stack.push(b);
            }
            HybridTransition::LeftArc(label) | HybridTransition::RightArc(label) => {
                let arc = self.candidate_arc(t.kind()).unwrap();
                self.arcs
                    .insert(arc, Some(label))
                    .expect("stack nodes are headless");
                self.stack.pop();
            }
            HybridTransition::Swap => {
                let s = self.stack.pop().unwrap();
                let at = self.buffer.len() - 1;
                self.buffer.insert(at, s);
                self.swaps += 1;
            }
        }
        Ok(())
    }

    pub fn extract_parse(&self) -> Result<DepGraph, SystemError> {
        if !self.is_terminal() {
            return Err(SystemError::NotTerminal);
        }
        Ok(forest_completion(&self.arcs))
    }

    pub fn trace_line(&self, step: usize, transition: &str) -> String {
        format!(
            "STEP {}: {} | S={:?} B={:?}",
            step,
            transition,
            self.stack,
            self.buffer()
        )
    }
}

/// Rank of every node in the in-order traversal of the gold tree: left
/// dependents, then the head, then right dependents, in surface order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectiveOrder {
    rank: Vec<usize>,
}

impl ProjectiveOrder {
    pub fn rank(&self, node: usize) -> usize {
        self.rank[node]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    pub fn is_identity(&self) -> bool {
        self.rank.iter().enumerate().all(|(i, &r)| i == r)
    }
}

pub fn projective_order(gold: &DepGraph) -> ProjectiveOrder {
    let n = gold.len();
    let mut children = vec![Vec::new(); n + 1];
    for dep in 1..=n {
        children[gold.head(dep)].push(dep);
    }
    let mut rank = vec![0; n + 1];
    let mut next = 0;
    // explicit stack: (node, whether its own slot has been emitted)
    let mut work = vec![(0usize, false)];
    while let Some((v, emitted)) = work.pop() {
        if emitted {
            rank[v] = next;
            next += 1;
            continue;
        }
        for &c in children[v].iter().rev().filter(|&&c| c > v) {
            work.push((c, false));
        }
        work.push((v, true));
        for &c in children[v].iter().rev().filter(|&&c| c < v) {
            work.push((c, false));
        }
    }
    ProjectiveOrder { rank }
}

/// Oracle output for one configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridCosts {
    /// Empty when the static Swap rule fires.
    pub costs: Vec<(HybridKind, usize)>,
    pub zero_cost: Vec<HybridKind>,
}

impl HybridCosts {
    pub fn cost(&self, kind: HybridKind) -> Option<usize> {
        self.costs.iter().find(|(k, _)| *k == kind).map(|(_, c)| *c)
    }

    pub fn is_zero_cost(&self, kind: HybridKind) -> bool {
        self.zero_cost.contains(&kind)
    }
}

/// Static Swap when the stack top comes after the buffer front in projective
/// order; otherwise the dynamic costs of the legal non-Swap transitions.
pub fn hybrid_oracle(
    c: &HybridConfiguration,
    gold: &DepGraph,
    po: &ProjectiveOrder,
) -> Result<HybridCosts, SystemError> {
    if c.is_terminal() {
        return Err(SystemError::Terminal);
    }
    if c.is_legal(HybridKind::Swap) {
        let (s, b) = (c.top().unwrap(), c.buffer_front().unwrap());
        if po.rank(s) > po.rank(b) {
            return Ok(HybridCosts {
                costs: Vec::new(),
                zero_cost: vec![HybridKind::Swap],
            });
        }
    }
    let head = |d: usize| if d == 0 { None } else { Some(gold.head(d)) };
    // Nodes that some buffer node precedes in projective order will be
    // swapped back into the buffer before they are attached for good.
    let first_in_buffer = c.buffer.iter().map(|&x| po.rank(x)).min();
    let displaced = |x: usize| first_in_buffer.is_some_and(|m| po.rank(x) > m);
    let on_stack = |x: usize| c.stack.contains(&x);
    // Dependents the top could still take: a displaced top returns to the
    // buffer and can collect anything left on the stack.
    let pending_deps = |s: usize| {
        (1..=c.len())
            .filter(|&d| head(d) == Some(s) && d != s)
            .filter(|&d| c.in_buffer(d) || (on_stack(d) && (displaced(s) || displaced(d))))
            .count()
    };
    let mut costs = Vec::new();
    for kind in [HybridKind::Shift, HybridKind::LeftArc, HybridKind::RightArc] {
        if !c.is_legal(kind) {
            continue;
        }
        let cost = match kind {
            HybridKind::LeftArc | HybridKind::RightArc => {
                let s = c.top().unwrap();
                let chosen = c.candidate_arc(kind).unwrap().head;
                let lost_head = head(s).is_some_and(|h| {
                    if h == chosen {
                        false
                    } else if displaced(s) {
                        on_stack(h) || c.in_buffer(h)
                    } else if kind == HybridKind::LeftArc {
                        Some(h) == c.second() || c.in_buffer(h)
                    } else {
                        c.in_buffer(h)
                    }
                });
                pending_deps(s) + lost_head as usize
            }
            HybridKind::Shift => {
                let b = c.buffer_front().unwrap();
                if displaced(b) {
                    0
                } else {
                    let below = &c.stack()[..c.stack().len().saturating_sub(1)];
                    let linked = below
                        .iter()
                        .filter(|&&k| !displaced(k) && (head(k) == Some(b) || head(b) == Some(k)))
                        .count();
                    let top_wants_b = c
                        .top()
                        .is_some_and(|s| !displaced(s) && head(s) == Some(b));
                    linked + top_wants_b as usize
                }
            }
            HybridKind::Swap => unreachable!(),
        };
        costs.push((kind, cost));
    }
    let zero_cost = costs.iter().filter(|(_, c)| *c == 0).map(|(k, _)| *k).collect();
    Ok(HybridCosts { costs, zero_cost })
}

/// Labels an oracle-chosen kind with the gold label of the arc it builds.
pub fn hybrid_gold_transition(c: &HybridConfiguration, gold: &DepGraph, kind: HybridKind) -> HybridTransition {
    let label = c
        .candidate_arc(kind)
        .filter(|a| a.dep != 0 && gold.head(a.dep) == a.head)
        .and_then(|a| gold.label(a.dep))
        .unwrap_or(Label(0));
    kind.with_label(label)
}
