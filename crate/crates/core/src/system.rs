//! The 2-Planar transition system.
//!
//! A configuration holds two stacks, one per plane, a buffer and the arcs
//! built so far. Shift pushes the buffer front onto both stacks; Reduce,
//! LeftArc and RightArc act on the active stack; Switch swaps which stack is
//! active. Two Switch transitions in a row are not allowed.
//!
//! The artificial root is node 0 and sits at the front of the initial buffer,
//! so root attachments are ordinary RightArc transitions from node 0. Node 0
//! never receives a head.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Arc, ArcSet, DepGraph, Label, UnionFind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("cannot parse an empty sentence")]
    EmptySentence,
    #[error("configuration is terminal")]
    Terminal,
    #[error("configuration is not terminal")]
    NotTerminal,
    #[error("transition {0:?} is not legal here")]
    Illegal(TransitionKind),
    #[error("transition {0:?} is not legal here")]
    IllegalHybrid(crate::hybrid::HybridKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Plane {
    First,
    Second,
}

impl Plane {
    pub const BOTH: [Plane; 2] = [Plane::First, Plane::Second];

    pub fn index(self) -> usize {
        match self {
            Plane::First => 0,
            Plane::Second => 1,
        }
    }

    pub fn other(self) -> Plane {
        match self {
            Plane::First => Plane::Second,
            Plane::Second => Plane::First,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> usize {
        self.index() + 1
    }
}

/// A transition without its label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransitionKind {
    Shift,
    Reduce,
    LeftArc,
    RightArc,
    Switch,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 5] = [
        TransitionKind::Shift,
        TransitionKind::Reduce,
        TransitionKind::LeftArc,
        TransitionKind::RightArc,
        TransitionKind::Switch,
    ];

    pub fn is_arc(self) -> bool {
        matches!(self, TransitionKind::LeftArc | TransitionKind::RightArc)
    }

    /// Attaches `label` to arc transitions; other kinds ignore it.
    pub fn with_label(self, label: Label) -> Transition {
        match self {
            TransitionKind::Shift => Transition::Shift,
            TransitionKind::Reduce => Transition::Reduce,
            TransitionKind::LeftArc => Transition::LeftArc(label),
            TransitionKind::RightArc => Transition::RightArc(label),
            TransitionKind::Switch => Transition::Switch,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transition {
    Shift,
    Reduce,
    LeftArc(Label),
    RightArc(Label),
    Switch,
}

impl Transition {
    pub fn kind(self) -> TransitionKind {
        match self {
            Transition::Shift => TransitionKind::Shift,
            Transition::Reduce => TransitionKind::Reduce,
            Transition::LeftArc(_) => TransitionKind::LeftArc,
            Transition::RightArc(_) => TransitionKind::RightArc,
            Transition::Switch => TransitionKind::Switch,
        }
    }

    pub fn label(self) -> Option<Label> {
        match self {
            Transition::LeftArc(l) | Transition::RightArc(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Shift => write!(f, "Shift"),
            Transition::Reduce => write!(f, "Reduce"),
            Transition::LeftArc(l) => write!(f, "LeftArc({})", l.0),
            Transition::RightArc(l) => write!(f, "RightArc({})", l.0),
            Transition::Switch => write!(f, "Switch"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    n: usize,
    stacks: [Vec<usize>; 2],
    active: Plane,
    /// The buffer is always the suffix `front..=n`.
    front: usize,
    arcs: ArcSet,
    planes: Vec<Option<Plane>>,
    wcc: UnionFind,
    last_was_switch: bool,
}

impl Configuration {
    /// The start configuration for a sentence of `n` tokens: empty stacks,
    /// buffer `[0, 1, ..., n]`.
    pub fn initial(n: usize) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::EmptySentence);
        }
        Ok(Configuration {
            n,
            stacks: [Vec::new(), Vec::new()],
            active: Plane::First,
            front: 0,
            arcs: ArcSet::new(n + 1),
            planes: vec![None; n + 1],
            wcc: UnionFind::new(n + 1),
            last_was_switch: false,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn active(&self) -> Plane {
        self.active
    }

    pub fn stack(&self, plane: Plane) -> &[usize] {
        &self.stacks[plane.index()]
    }

    pub fn active_stack(&self) -> &[usize] {
        self.stack(self.active)
    }

    pub fn inactive_stack(&self) -> &[usize] {
        self.stack(self.active.other())
    }

    pub fn active_top(&self) -> Option<usize> {
        self.active_stack().last().copied()
    }

    pub fn buffer_front(&self) -> Option<usize> {
        (self.front <= self.n).then_some(self.front)
    }

    /// Buffer contents, front first.
    pub fn buffer(&self) -> RangeInclusive<usize> {
        self.front..=self.n
    }

    pub fn in_buffer(&self, node: usize) -> bool {
        node >= self.front && node <= self.n
    }

    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    /// Plane in which the arc into `dep` was built, if any.
    pub fn arc_plane(&self, dep: usize) -> Option<Plane> {
        self.planes[dep]
    }

    pub fn wcc(&self) -> &UnionFind {
        &self.wcc
    }

    pub fn last_was_switch(&self) -> bool {
        self.last_was_switch
    }

    pub fn is_terminal(&self) -> bool {
        self.front > self.n
    }

    /// The arc a LeftArc or RightArc would add here.
    pub fn candidate_arc(&self, kind: TransitionKind) -> Option<Arc> {
        let s = self.active_top()?;
        let b = self.buffer_front()?;
        match kind {
            TransitionKind::LeftArc => Some(Arc::new(b, s)),
            TransitionKind::RightArc => Some(Arc::new(s, b)),
            _ => None,
        }
    }

    fn arc_allowed(&self, arc: Arc) -> bool {
        // Under single-head, adding head -> dep closes a cycle iff dep is
        // headless and already weakly connected to head.
        arc.dep != 0 && self.arcs.head(arc.dep).is_none() && !self.wcc.same_set(arc.head, arc.dep)
    }

    pub fn is_legal(&self, kind: TransitionKind) -> bool {
        if self.is_terminal() {
            return false;
        }
        match kind {
            TransitionKind::Shift => true,
            TransitionKind::Reduce => !self.active_stack().is_empty(),
            TransitionKind::LeftArc | TransitionKind::RightArc => self
                .candidate_arc(kind)
                .is_some_and(|arc| self.arc_allowed(arc)),
            TransitionKind::Switch => !self.last_was_switch,
        }
    }

    pub fn legal(&self) -> Result<Vec<TransitionKind>, SystemError> {
        if self.is_terminal() {
            return Err(SystemError::Terminal);
        }
        Ok(TransitionKind::ALL
            .into_iter()
            .filter(|&k| self.is_legal(k))
            .collect())
    }

    pub fn apply(&self, t: Transition) -> Result<Configuration, SystemError> {
        let mut next = self.clone();
        next.apply_mut(t)?;
        Ok(next)
    }

    pub fn apply_mut(&mut self, t: Transition) -> Result<(), SystemError> {
        let kind = t.kind();
        if self.is_terminal() {
            return Err(SystemError::Terminal);
        }
        if !self.is_legal(kind) {
            return Err(SystemError::Illegal(kind));
        }
        match t {
            Transition::Shift => {
                let b = self.front;
                self.stacks[0].push(b);
                self.stacks[1].push(b);
                self.front += 1;
            }
            Transition::Reduce => {
                self.stacks[self.active.index()].pop();
            }
            Transition::LeftArc(label) | Transition::RightArc(label) => {
                let arc = self.candidate_arc(kind).expect("legal arc transition");
                self.arcs
                    .insert(arc, Some(label))
                    .expect("legality guarantees single head");
                self.planes[arc.dep] = Some(self.active);
                self.wcc.union(arc.head, arc.dep);
            }
            Transition::Switch => {
                self.active = self.active.other();
            }
        }
        self.last_was_switch = kind == TransitionKind::Switch;
        Ok(())
    }

    /// Reads the parse off a terminal configuration. Tokens left without a
    /// head are attached to the root with no label.
    pub fn extract_parse(&self) -> Result<DepGraph, SystemError> {
        if !self.is_terminal() {
            return Err(SystemError::NotTerminal);
        }
        Ok(forest_completion(&self.arcs))
    }

    /// One line of the debugging trace format.
    pub fn trace_line(&self, step: usize, transition: &str) -> String {
        let front = self
            .buffer_front()
            .map_or_else(|| "-".to_string(), |b| b.to_string());
        format!(
            "STEP {}: {} | S1={:?} S2={:?} active={} B-front={}",
            step,
            transition,
            self.stacks[0],
            self.stacks[1],
            self.active.number(),
            front
        )
    }
}

pub(crate) fn forest_completion(arcs: &ArcSet) -> DepGraph {
    let n = arcs.nodes() - 1;
    let heads: Vec<usize> = (1..=n).map(|d| arcs.head(d).unwrap_or(0)).collect();
    let labels = (1..=n).map(|d| arcs.label(d)).collect();
    DepGraph::with_labels(heads, labels).expect("arc sets are acyclic forests")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::count_cycles;

    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const L: Label = Label(0);

    fn run(c: &Configuration, ts: &[Transition]) -> Configuration {
        ts.iter().fold(c.clone(), |c, &t| c.apply(t).unwrap())
    }

    #[test]
    fn initial_configuration() {
        let c = Configuration::initial(2).unwrap();
        assert_eq!(c.buffer().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(c.active_stack().is_empty() && c.inactive_stack().is_empty());
        assert!(!c.is_terminal());
        assert_eq!(Configuration::initial(0), Err(SystemError::EmptySentence));
        assert_eq!(
            c.legal().unwrap(),
            vec![TransitionKind::Shift, TransitionKind::Switch]
        );
    }

    #[test]
    fn shift_pushes_both_stacks() {
        let c = Configuration::initial(3).unwrap().apply(Transition::Shift).unwrap();
        assert_eq!(c.stack(Plane::First), &[0]);
        assert_eq!(c.stack(Plane::Second), &[0]);
        assert_eq!(c.buffer_front(), Some(1));
    }

    #[test]
    fn no_double_switch() {
        let c = Configuration::initial(3).unwrap();
        let c = run(&c, &[Transition::Shift, Transition::Switch]);
        assert!(!c.legal().unwrap().contains(&TransitionKind::Switch));
        assert_eq!(
            c.apply(Transition::Switch),
            Err(SystemError::Illegal(TransitionKind::Switch))
        );
        let init = Configuration::initial(1).unwrap();
        let sw = init.apply(Transition::Switch).unwrap();
        assert!(sw.apply(Transition::Switch).is_err());
    }

    #[test]
    fn single_head_blocks_left_arc() {
        // Build 3 -> 2, then put 2 on top with 4 in front.
        let c = Configuration::initial(4).unwrap();
        let c = run(
            &c,
            &[
                Transition::Shift,
                Transition::Shift,
                Transition::Shift,
                Transition::LeftArc(L),
                Transition::Shift,
                Transition::Switch,
                Transition::Reduce,
            ],
        );
        assert_eq!(c.arcs().head(2), Some(3));
        assert_eq!(c.active_top(), Some(2));
        assert_eq!(c.buffer_front(), Some(4));
        assert!(!c.is_legal(TransitionKind::LeftArc));
        assert!(c.is_legal(TransitionKind::RightArc));
    }

    #[test]
    fn acyclicity_blocks_arc() {
        let c = Configuration::initial(3).unwrap();
        let c = run(
            &c,
            &[
                Transition::Shift,
                Transition::Shift,
                Transition::RightArc(L), // 1 -> 2
                Transition::Shift,
                Transition::RightArc(L), // 2 -> 3
                Transition::Reduce,
                Transition::Reduce,
            ],
        );
        assert_eq!(c.active_top(), Some(0));
        let c = c.apply(Transition::Switch).unwrap();
        // plane 2 stack [0, 1, 2], front 3; 3 -> 2 would break single-head
        assert!(!c.is_legal(TransitionKind::LeftArc));
        let c = c.apply(Transition::Reduce).unwrap();
        // 3 -> 1 would close 1 -> 2 -> 3 -> 1
        assert_eq!(c.active_top(), Some(1));
        assert!(!c.is_legal(TransitionKind::LeftArc));
    }

    #[test]
    fn root_never_gets_a_head() {
        let c = run(&Configuration::initial(2).unwrap(), &[Transition::Shift]);
        assert_eq!(c.active_top(), Some(0));
        assert!(!c.is_legal(TransitionKind::LeftArc));
        assert!(c.is_legal(TransitionKind::RightArc));
    }

    #[test]
    fn terminal_detection_and_extraction() {
        let mut c = Configuration::initial(3).unwrap();
        assert!(c.extract_parse().is_err());
        // 2 -> 1, 2 -> 3, token 2 left for forest completion.
        for t in [
            Transition::Shift,
            Transition::Reduce,
            Transition::Shift,
            Transition::LeftArc(L),
            Transition::Reduce,
            Transition::Shift,
            Transition::RightArc(Label(4)),
        ] {
            c.apply_mut(t).unwrap();
        }
        assert!(!c.is_terminal());
        c.apply_mut(Transition::Shift).unwrap();
        assert!(c.is_terminal());
        assert_eq!(c.legal(), Err(SystemError::Terminal));
        let g = c.extract_parse().unwrap();
        assert_eq!(g.heads(), &[2, 0, 2]);
        assert_eq!(g.label(2), None);
        assert_eq!(g.label(3), Some(Label(4)));

        let mut e = Configuration::initial(2).unwrap();
        while !e.is_terminal() {
            e.apply_mut(Transition::Shift).unwrap();
        }
        assert_eq!(e.extract_parse().unwrap().heads(), &[0, 0]);
    }

    #[test]
    fn explicit_root_arc_kept() {
        let c = run(
            &Configuration::initial(1).unwrap(),
            &[Transition::Shift, Transition::RightArc(L), Transition::Shift],
        );
        assert_eq!(c.extract_parse().unwrap().heads(), &[0]);
        assert!(c.arcs().contains(Arc::new(0, 1)));
    }

    #[test]
    fn trace_format() {
        let c = run(&Configuration::initial(2).unwrap(), &[Transition::Shift]);
        assert_eq!(
            c.trace_line(1, "Shift"),
            "STEP 1: Shift | S1=[0] S2=[0] active=1 B-front=1"
        );
    }

    fn has_path(heads: &[Option<usize>], from: usize, to: usize) -> bool {
        // Directed path from -> ... -> to following arcs head -> dep, i.e.
        // walk up from `to` through heads.
        let mut cur = Some(to);
        let mut steps = 0;
        while let Some(v) = cur {
            if v == from {
                return true;
            }
            steps += 1;
            if steps > heads.len() {
                return false;
            }
            cur = heads[v];
        }
        false
    }

    fn random_walk(n: usize, seed: u64) -> Vec<Configuration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Configuration::initial(n).unwrap();
        let mut seen = vec![c.clone()];
        while !c.is_terminal() {
            let legal = c.legal().unwrap();
            let k = *legal.choose(&mut rng).unwrap();
            c.apply_mut(k.with_label(L)).unwrap();
            seen.push(c.clone());
        }
        seen
    }

    proptest! {
        #[test]
        fn walks_keep_forest_invariants(n in 1usize..8, seed in any::<u64>()) {
            let walk = random_walk(n, seed);
            // every walk is bounded: shifts n+1, arcs <= n, reduces <= 2(n+1),
            // switches at most one more than the rest
            prop_assert!(walk.len() - 1 <= 2 * (4 * n + 3) + 1);
            for c in &walk {
                prop_assert_eq!(count_cycles(c.arcs().heads()), 0);
                prop_assert!(c.arcs().head(0).is_none());
                for d in 1..=n {
                    let left = (1..=n).filter(|&x| c.arcs().head(x) == Some(d)).min();
                    let right = (1..=n).filter(|&x| c.arcs().head(x) == Some(d)).max();
                    prop_assert_eq!(c.arcs().leftmost_dep(d), left);
                    prop_assert_eq!(c.arcs().rightmost_dep(d), right);
                }
            }
            for pair in walk.windows(3) {
                prop_assert!(!(pair[1].last_was_switch() && pair[2].last_was_switch()));
            }
            prop_assert!(walk.last().unwrap().is_terminal());
        }

        #[test]
        fn wcc_test_matches_path_search(n in 1usize..7, seed in any::<u64>()) {
            for c in random_walk(n, seed) {
                let heads = c.arcs().heads();
                for x in 0..=n {
                    for y in 1..=n {
                        if x == y || heads[y].is_some() {
                            continue;
                        }
                        let creates_cycle = has_path(heads, y, x);
                        prop_assert_eq!(c.wcc().same_set(x, y), creates_cycle);
                    }
                }
            }
        }
    }
}
