//! Random gold trees and random legal walks for verification.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{is_two_planar, DepGraph};
use crate::system::{Configuration, TransitionKind};

/// A random forest over `n` tokens: tokens are visited in random order and
/// each one attaches to a uniformly chosen node that is already attached
/// (the root included). Several tokens may attach to the root.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DepGraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut attached = vec![0usize];
    let mut heads = vec![0usize; n];
    for &tok in &order {
        let head = *attached.choose(rng).unwrap();
        heads[tok - 1] = head;
        attached.push(tok);
    }
    DepGraph::from_heads(heads).expect("random attachment yields a forest")
}

/// A random tree whose arcs (root arcs included) split into two
/// non-crossing planes.
pub fn random_two_planar_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DepGraph {
    loop {
        let tree = random_tree(n, rng);
        let arcs: Vec<_> = tree.arcs().collect();
        if is_two_planar(&arcs) {
            return tree;
        }
    }
}

/// Every configuration visited by a uniformly random legal walk from the
/// initial configuration, terminal one included.
pub fn random_walk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Configuration> {
    let mut c = Configuration::initial(n).expect("n >= 1");
    let mut out = vec![c.clone()];
    while !c.is_terminal() {
        let legal = c.legal().unwrap();
        let kind: TransitionKind = *legal.choose(rng).unwrap();
        c.apply_mut(kind.with_label(crate::graph::Label(0))).unwrap();
        out.push(c.clone());
    }
    out
}
