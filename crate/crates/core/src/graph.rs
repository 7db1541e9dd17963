//! Graph primitives shared by the transition systems and oracles.
//!
//! Node 0 is the artificial root; tokens are numbered `1..=n`. Every
//! structure here is node-indexed, so vectors have length `n + 1`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {dep} has more than one head ({first} and {second})")]
    MultipleHeads {
        dep: usize,
        first: usize,
        second: usize,
    },
    #[error("node {node} out of range for a graph with {nodes} nodes")]
    OutOfRange { node: usize, nodes: usize },
    #[error("length mismatch: {left} vs {right} tokens")]
    LengthMismatch { left: usize, right: usize },
    #[error("head graph contains a directed cycle through node {0}")]
    Cyclic(usize),
    #[error("token {0} is its own head")]
    SelfLoop(usize),
}

/// Dependency label, interned by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub u32);

/// A dependency arc `head -> dep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub head: usize,
    pub dep: usize,
}

impl Arc {
    pub fn new(head: usize, dep: usize) -> Self {
        debug_assert_ne!(head, dep);
        Arc { head, dep }
    }

    /// `(min, max)` of the two endpoints.
    pub fn span(self) -> (usize, usize) {
        if self.head < self.dep {
            (self.head, self.dep)
        } else {
            (self.dep, self.head)
        }
    }
}

/// True iff the spans of `a` and `b` interleave. Arcs sharing an endpoint
/// never cross.
pub fn arcs_cross(a: Arc, b: Arc) -> bool {
    let (a0, a1) = a.span();
    let (b0, b1) = b.span();
    (a0 < b0 && b0 < a1 && a1 < b1) || (b0 < a0 && a0 < b1 && b1 < a1)
}

/// A rooted dependency forest over tokens `1..=n`.
///
/// `heads[i - 1]` is the head of token `i` (0 for the artificial root).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepGraph {
    heads: Vec<usize>,
    labels: Vec<Option<Label>>,
}

impl DepGraph {
    /// Builds an unlabeled graph, checking ranges, self-loops and cycles.
    pub fn from_heads(heads: Vec<usize>) -> Result<Self, GraphError> {
        let labels = vec![None; heads.len()];
        Self::with_labels(heads, labels)
    }

    pub fn with_labels(heads: Vec<usize>, labels: Vec<Option<Label>>) -> Result<Self, GraphError> {
        if heads.len() != labels.len() {
            return Err(GraphError::LengthMismatch {
                left: heads.len(),
                right: labels.len(),
            });
        }
        let n = heads.len();
        for (i, &h) in heads.iter().enumerate() {
            if h > n {
                return Err(GraphError::OutOfRange {
                    node: h,
                    nodes: n + 1,
                });
            }
            if h == i + 1 {
                return Err(GraphError::SelfLoop(h));
            }
        }
        let node_heads = node_indexed(&heads);
        if let Some(node) = first_cycle_node(&node_heads) {
            return Err(GraphError::Cyclic(node));
        }
        Ok(DepGraph { heads, labels })
    }

    /// Number of tokens (excluding the root).
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Head of token `dep` (1-based).
    pub fn head(&self, dep: usize) -> usize {
        self.heads[dep - 1]
    }

    pub fn label(&self, dep: usize) -> Option<Label> {
        self.labels[dep - 1]
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn labels(&self) -> &[Option<Label>] {
        &self.labels
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.heads
            .iter()
            .enumerate()
            .map(|(i, &h)| Arc::new(h, i + 1))
    }

    /// Node-indexed heads: entry 0 is `None`.
    pub fn node_heads(&self) -> Vec<Option<usize>> {
        node_indexed(&self.heads)
    }
}

fn node_indexed(heads: &[usize]) -> Vec<Option<usize>> {
    std::iter::once(None)
        .chain(heads.iter().map(|&h| Some(h)))
        .collect()
}

/// Arcs with in-degree at most one, stored by dependent. Also keeps the
/// leftmost and rightmost dependent of every node up to date.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcSet {
    heads: Vec<Option<usize>>,
    labels: Vec<Option<Label>>,
    leftmost: Vec<Option<usize>>,
    rightmost: Vec<Option<usize>>,
    len: usize,
}

impl ArcSet {
    /// An empty arc set over nodes `0..nodes`.
    pub fn new(nodes: usize) -> Self {
        ArcSet {
            heads: vec![None; nodes],
            labels: vec![None; nodes],
            leftmost: vec![None; nodes],
            rightmost: vec![None; nodes],
            len: 0,
        }
    }

    pub fn nodes(&self) -> usize {
        self.heads.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn head(&self, dep: usize) -> Option<usize> {
        self.heads[dep]
    }

    pub fn label(&self, dep: usize) -> Option<Label> {
        self.labels[dep]
    }

    pub fn contains(&self, arc: Arc) -> bool {
        self.heads.get(arc.dep).copied().flatten() == Some(arc.head)
    }

    pub fn leftmost_dep(&self, node: usize) -> Option<usize> {
        self.leftmost[node]
    }

    pub fn rightmost_dep(&self, node: usize) -> Option<usize> {
        self.rightmost[node]
    }

    pub fn heads(&self) -> &[Option<usize>] {
        &self.heads
    }

    pub fn insert(&mut self, arc: Arc, label: Option<Label>) -> Result<(), GraphError> {
        let nodes = self.nodes();
        for node in [arc.head, arc.dep] {
            if node >= nodes {
                return Err(GraphError::OutOfRange { node, nodes });
            }
        }
        if arc.head == arc.dep {
            return Err(GraphError::SelfLoop(arc.dep));
        }
        if let Some(first) = self.heads[arc.dep] {
            return Err(GraphError::MultipleHeads {
                dep: arc.dep,
                first,
                second: arc.head,
            });
        }
        self.heads[arc.dep] = Some(arc.head);
        self.labels[arc.dep] = label;
        let h = arc.head;
        if self.leftmost[h].is_none_or(|l| arc.dep < l) {
            self.leftmost[h] = Some(arc.dep);
        }
        if self.rightmost[h].is_none_or(|r| arc.dep > r) {
            self.rightmost[h] = Some(arc.dep);
        }
        self.len += 1;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = Arc> + '_ {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(dep, h)| h.map(|head| Arc::new(head, dep)))
    }
}

/// Disjoint sets with union by rank.
///
/// `union` compresses paths; `same_set` only reads, and union by rank keeps
/// its walk logarithmic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size).collect(),
            rank: vec![0; size],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn check(&self, x: usize) -> Result<(), GraphError> {
        if x < self.parent.len() {
            Ok(())
        } else {
            Err(GraphError::OutOfRange {
                node: x,
                nodes: self.parent.len(),
            })
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    pub fn same_set(&self, a: usize, b: usize) -> bool {
        self.root(a) == self.root(b)
    }

    /// Whether `x` and `y` are in the same weakly connected component of the
    /// arcs added so far.
    pub fn same_wcc(&self, x: usize, y: usize) -> Result<bool, GraphError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.same_set(x, y))
    }

    pub fn add_arc_wcc(&mut self, arc: Arc) -> Result<(), GraphError> {
        self.check(arc.head)?;
        self.check(arc.dep)?;
        self.union(arc.head, arc.dep);
        Ok(())
    }
}

const WHITE: u8 = 0;
const GREY: u8 = 1;
const BLACK: u8 = 2;

/// Counts the directed cycles of a graph given as a head array (in-degree
/// at most one by construction). Cycles of such a graph are node-disjoint.
pub fn count_cycles(heads: &[Option<usize>]) -> usize {
    let n = heads.len();
    let mut color = vec![WHITE; n];
    let mut cycles = 0;
    let mut path = Vec::new();
    for start in 0..n {
        if color[start] != WHITE {
            continue;
        }
        let mut cur = Some(start);
        while let Some(v) = cur {
            match color[v] {
                WHITE => {
                    color[v] = GREY;
                    path.push(v);
                    cur = heads[v];
                }
                GREY => {
                    cycles += 1;
                    break;
                }
                _ => break,
            }
        }
        for v in path.drain(..) {
            color[v] = BLACK;
        }
    }
    cycles
}

/// [`count_cycles`] over an explicit arc list on nodes `0..nodes`.
pub fn count_cycles_in_arcs(arcs: &[Arc], nodes: usize) -> Result<usize, GraphError> {
    let mut heads = vec![None; nodes];
    for arc in arcs {
        for node in [arc.head, arc.dep] {
            if node >= nodes {
                return Err(GraphError::OutOfRange { node, nodes });
            }
        }
        if let Some(first) = heads[arc.dep] {
            return Err(GraphError::MultipleHeads {
                dep: arc.dep,
                first,
                second: arc.head,
            });
        }
        heads[arc.dep] = Some(arc.head);
    }
    Ok(count_cycles(&heads))
}

fn first_cycle_node(heads: &[Option<usize>]) -> Option<usize> {
    let n = heads.len();
    let mut color = vec![WHITE; n];
    let mut path = Vec::new();
    for start in 0..n {
        let mut cur = Some(start);
        let mut found = None;
        while let Some(v) = cur {
            match color[v] {
                WHITE => {
                    color[v] = GREY;
                    path.push(v);
                    cur = heads[v];
                }
                GREY => {
                    found = Some(v);
                    break;
                }
                _ => break,
            }
        }
        for v in path.drain(..) {
            color[v] = BLACK;
        }
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Number of tokens whose head differs between the two graphs.
pub fn hamming_loss(pred: &DepGraph, gold: &DepGraph) -> Result<usize, GraphError> {
    if pred.len() != gold.len() {
        return Err(GraphError::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    Ok(pred
        .heads()
        .iter()
        .zip(gold.heads())
        .filter(|(p, g)| p != g)
        .count())
}

/// Two-colors the crossing graph of `arcs` (vertices are arcs, edges join
/// crossing pairs) by BFS. Returns `None` if it is not bipartite.
pub fn crossing_two_coloring(arcs: &[Arc]) -> Option<Vec<u8>> {
    let m = arcs.len();
    let mut color: Vec<Option<u8>> = vec![None; m];
    let mut queue = VecDeque::new();
    for start in 0..m {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let ci = color[i].unwrap();
            for j in 0..m {
                if i == j || !arcs_cross(arcs[i], arcs[j]) {
                    continue;
                }
                match color[j] {
                    None => {
                        color[j] = Some(1 - ci);
                        queue.push_back(j);
                    }
                    Some(cj) if cj == ci => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(Option::unwrap).collect())
}

/// No two arcs cross.
pub fn is_one_planar(arcs: &[Arc]) -> bool {
    arcs.iter()
        .enumerate()
        .all(|(i, &a)| arcs[i + 1..].iter().all(|&b| !arcs_cross(a, b)))
}

pub fn is_two_planar(arcs: &[Arc]) -> bool {
    crossing_two_coloring(arcs).is_some()
}
