//! A configuration of either transition system behind one interface.

use crate::graph::{ArcSet, DepGraph, Label};
use crate::hybrid::{HybridConfiguration, HybridKind};
use crate::system::{Configuration, TransitionKind};

use super::SystemId;

/// Unlabeled move of either system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Shift,
    Reduce,
    Switch,
    Swap,
    LeftArc,
    RightArc,
}

impl Move {
    pub const COUNT: usize = 6;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_planar(kind: TransitionKind) -> Move {
        match kind {
            TransitionKind::Shift => Move::Shift,
            TransitionKind::Reduce => Move::Reduce,
            TransitionKind::LeftArc => Move::LeftArc,
            TransitionKind::RightArc => Move::RightArc,
            TransitionKind::Switch => Move::Switch,
        }
    }

    pub fn from_hybrid(kind: HybridKind) -> Move {
        match kind {
            HybridKind::Shift => Move::Shift,
            HybridKind::LeftArc => Move::LeftArc,
            HybridKind::RightArc => Move::RightArc,
            HybridKind::Swap => Move::Swap,
        }
    }

    fn planar(self) -> Option<TransitionKind> {
        Some(match self {
            Move::Shift => TransitionKind::Shift,
            Move::Reduce => TransitionKind::Reduce,
            Move::Switch => TransitionKind::Switch,
            Move::LeftArc => TransitionKind::LeftArc,
            Move::RightArc => TransitionKind::RightArc,
            Move::Swap => return None,
        })
    }

    fn hybrid(self) -> Option<HybridKind> {
        Some(match self {
            Move::Shift => HybridKind::Shift,
            Move::Swap => HybridKind::Swap,
            Move::LeftArc => HybridKind::LeftArc,
            Move::RightArc => HybridKind::RightArc,
            Move::Reduce | Move::Switch => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Move::Shift => "SH",
            Move::Reduce => "RE",
            Move::Switch => "SW",
            Move::Swap => "SWAP",
            Move::LeftArc => "LA",
            Move::RightArc => "RA",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum State {
    Planar(Configuration),
    Hybrid(HybridConfiguration),
}

impl State {
    pub fn initial(system: SystemId, n: usize) -> State {
        match system {
            SystemId::TwoPlanar => State::Planar(Configuration::initial(n).expect("non-empty sentence")),
            SystemId::HybridSwap => {
                State::Hybrid(HybridConfiguration::initial(n).expect("non-empty sentence"))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            State::Planar(c) => c.len(),
            State::Hybrid(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_terminal(&self) -> bool {
        match self {
            State::Planar(c) => c.is_terminal(),
            State::Hybrid(c) => c.is_terminal(),
        }
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        match self {
            State::Planar(c) => mv.planar().is_some_and(|k| c.is_legal(k)),
            State::Hybrid(c) => mv.hybrid().is_some_and(|k| c.is_legal(k)),
        }
    }

    /// Legality of every move, indexed by [`Move::index`].
    pub fn legal_moves_mask(&self) -> Vec<bool> {
        const ALL: [Move; Move::COUNT] = [
            Move::Shift,
            Move::Reduce,
            Move::Switch,
            Move::Swap,
            Move::LeftArc,
            Move::RightArc,
        ];
        ALL.iter().map(|&m| self.is_legal(m)).collect()
    }

    /// Panics on an illegal move.
    pub fn apply(&mut self, mv: Move, label: Label) {
        match self {
            State::Planar(c) => c
                .apply_mut(mv.planar().expect("2-Planar move").with_label(label))
                .expect("legal move"),
            State::Hybrid(c) => c
                .apply_mut(mv.hybrid().expect("hybrid move").with_label(label))
                .expect("legal move"),
        }
    }

    pub fn arcs(&self) -> &ArcSet {
        match self {
            State::Planar(c) => c.arcs(),
            State::Hybrid(c) => c.arcs(),
        }
    }

    pub fn buffer_front(&self) -> Option<usize> {
        match self {
            State::Planar(c) => c.buffer_front(),
            State::Hybrid(c) => c.buffer_front(),
        }
    }

    /// Head and dependent of the arc a move would build.
    pub fn candidate_arc(&self, mv: Move) -> Option<crate::graph::Arc> {
        match self {
            State::Planar(c) => mv.planar().and_then(|k| c.candidate_arc(k)),
            State::Hybrid(c) => mv.hybrid().and_then(|k| c.candidate_arc(k)),
        }
    }

    pub fn extract(&self) -> DepGraph {
        match self {
            State::Planar(c) => c.extract_parse(),
            State::Hybrid(c) => c.extract_parse(),
        }
        .expect("terminal configuration")
    }

    pub fn trace_line(&self, step: usize, mv: Move, label: Label) -> String {
        let name = match mv {
            Move::LeftArc | Move::RightArc => format!("{}({})", mv.name(), label.0),
            _ => mv.name().to_string(),
        };
        match self {
            State::Planar(c) => c.trace_line(step, &name),
            State::Hybrid(c) => c.trace_line(step, &name),
        }
    }
}
