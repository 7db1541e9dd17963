//! Focus positions read off a configuration.

use super::State;

/// Node positions fed to the scorer; `None` marks an empty slot.
///
/// 2-Planar: active stack top 3, inactive stack top 2, buffer front, the
/// leftmost and rightmost modifiers of the five stack words, and the
/// leftmost modifier of the buffer front (17 slots). Arc-hybrid: stack top
/// 3, buffer front, the modifiers of the three stack words and the leftmost
/// modifier of the buffer front (11 slots).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureView {
    pub slots: Vec<Option<usize>>,
}

pub const PLANAR_SLOTS: usize = 17;
pub const HYBRID_SLOTS: usize = 11;

fn top(stack: &[usize], k: usize) -> Option<usize> {
    stack.len().checked_sub(k + 1).map(|i| stack[i])
}

pub fn extract_features(state: &State) -> FeatureView {
    let arcs = state.arcs();
    let (words, front): (Vec<Option<usize>>, Option<usize>) = match state {
        State::Planar(c) => {
            let a = c.active_stack();
            let i = c.inactive_stack();
            (
                vec![top(a, 0), top(a, 1), top(a, 2), top(i, 0), top(i, 1)],
                c.buffer_front(),
            )
        }
        State::Hybrid(c) => {
            let s = c.stack();
            (vec![top(s, 0), top(s, 1), top(s, 2)], c.buffer_front())
        }
    };
    let mut slots = words.clone();
    slots.push(front);
    for w in &words {
        slots.push(w.and_then(|w| arcs.leftmost_dep(w)));
        slots.push(w.and_then(|w| arcs.rightmost_dep(w)));
    }
    slots.push(front.and_then(|b| arcs.leftmost_dep(b)));
    FeatureView { slots }
}

pub fn slot_count(system: super::SystemId) -> usize {
    match system {
        super::SystemId::TwoPlanar => PLANAR_SLOTS,
        super::SystemId::HybridSwap => HYBRID_SLOTS,
    }
}
