//! Canonical plane assignment and the static oracle.
//!
//! Gold arcs are taken in the order a left-to-right derivation would build
//! them (by right endpoint, then nearest left endpoint first). An arc is kept
//! if it can still be two-colored against the kept arcs it crosses, tracked
//! with a parity union-find; otherwise it is discarded. Each connected
//! component of the kept crossing graph then has exactly two valid colorings,
//! and the simulation picks the one that puts the component's first arc in
//! whichever plane is active when that arc's right endpoint reaches the
//! buffer front.

use crate::graph::{arcs_cross, Arc, DepGraph, Label};
use crate::system::{Configuration, Plane, Transition};

use super::{Assignment, OracleError, PlaneAssignment};

/// What the static oracle knows about the plane of a gold arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Known(Plane),
    /// Kept, but its component has not been oriented yet.
    Pending,
    Discarded,
}

/// Union-find where every element stores its color parity relative to the
/// parent.
struct ParityForest {
    parent: Vec<usize>,
    parity: Vec<u8>,
    rank: Vec<u8>,
}

impl ParityForest {
    fn new(size: usize) -> Self {
        ParityForest {
            parent: (0..size).collect(),
            parity: vec![0; size],
            rank: vec![0; size],
        }
    }

    /// Root of `x` and the parity of `x` relative to it.
    fn find(&mut self, x: usize) -> (usize, u8) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let p = self.parent[x];
        let (root, p_par) = self.find(p);
        self.parity[x] ^= p_par;
        self.parent[x] = root;
        (root, self.parity[x])
    }

    /// Records that `a` and `b` get different colors. Both must be
    /// consistent with the existing constraints.
    fn join_opposite(&mut self, a: usize, b: usize) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            debug_assert_ne!(pa, pb);
            return;
        }
        let rel = pa ^ pb ^ 1;
        let (child, root) = if self.rank[ra] < self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[child] = root;
        self.parity[child] = rel;
        if self.rank[ra] == self.rank[rb] {
            self.rank[root] += 1;
        }
    }
}

/// Per-dependent bookkeeping for the simulation.
struct Gold {
    n: usize,
    heads: Vec<Option<usize>>,
    labels: Vec<Option<Label>>,
    children: Vec<Vec<usize>>,
}

impl Gold {
    fn new(gold: &DepGraph) -> Self {
        let n = gold.len();
        let heads = gold.node_heads();
        let mut labels = vec![None; n + 1];
        let mut children = vec![Vec::new(); n + 1];
        for dep in 1..=n {
            labels[dep] = gold.label(dep);
            children[gold.head(dep)].push(dep);
        }
        Gold {
            n,
            heads,
            labels,
            children,
        }
    }

    fn label(&self, dep: usize) -> Label {
        self.labels[dep].unwrap_or(Label(0))
    }
}

/// One step of the static oracle.
///
/// Priority: LeftArc or RightArc between the active top and the buffer
/// front if that gold arc belongs to the active plane; Reduce if the active
/// top has no unbuilt active-plane arcs left with buffer nodes; Switch if
/// the inactive stack holds a node whose inactive-plane arc to the buffer
/// front is still unbuilt; otherwise Shift.
fn static_step(c: &Configuration, gold: &Gold, status: &dyn Fn(usize) -> Status) -> Transition {
    let p = c.active();
    let b = c.buffer_front().expect("non-terminal configuration");
    let unbuilt = |dep: usize| c.arcs().head(dep).is_none();

    if let Some(s) = c.active_top() {
        if gold.heads[s] == Some(b) && status(s) == Status::Known(p) && unbuilt(s) {
            return Transition::LeftArc(gold.label(s));
        }
        if gold.heads[b] == Some(s) && status(b) == Status::Known(p) && unbuilt(b) {
            return Transition::RightArc(gold.label(b));
        }
        let blocks = |dep: usize| match status(dep) {
            Status::Known(q) => q == p && unbuilt(dep),
            Status::Pending => unbuilt(dep),
            Status::Discarded => false,
        };
        let head_pending = gold.heads[s].is_some_and(|h| c.in_buffer(h) && blocks(s));
        let dep_pending = gold.children[s]
            .iter()
            .any(|&d| c.in_buffer(d) && blocks(d));
        if !head_pending && !dep_pending {
            return Transition::Reduce;
        }
    }

    if !c.last_was_switch() {
        let q = p.other();
        let linked = |x: usize| {
            let dep = if gold.heads[x] == Some(b) {
                x
            } else if gold.heads[b] == Some(x) {
                b
            } else {
                return false;
            };
            status(dep) == Status::Known(q) && unbuilt(dep)
        };
        if c.stack(q).iter().any(|&x| linked(x)) {
            return Transition::Switch;
        }
    }
    Transition::Shift
}

/// Arcs in the order a left-to-right derivation reaches them.
fn build_order(gold: &DepGraph) -> Vec<Arc> {
    let mut arcs: Vec<Arc> = gold.arcs().collect();
    arcs.sort_by_key(|a| {
        let (lo, hi) = a.span();
        (hi, std::cmp::Reverse(lo))
    });
    arcs
}

/// Splits the gold arcs into two non-crossing planes plus a discarded set,
/// by running the static oracle over the gold tree.
pub fn assign_planes(gold: &DepGraph) -> PlaneAssignment {
    let n = gold.len();
    let order = build_order(gold);
    let m = order.len();

    // Keep arcs greedily while the crossing graph stays bipartite.
    let mut forest = ParityForest::new(m);
    let mut kept = vec![false; m];
    for i in 0..m {
        let crossing: Vec<usize> = (0..i)
            .filter(|&j| kept[j] && arcs_cross(order[i], order[j]))
            .collect();
        let mut consistent = true;
        let mut seen: Vec<(usize, u8)> = Vec::new();
        for &j in &crossing {
            let (root, par) = forest.find(j);
            match seen.iter().find(|(r, _)| *r == root) {
                Some(&(_, p)) if p != par => {
                    consistent = false;
                    break;
                }
                Some(_) => {}
                None => seen.push((root, par)),
            }
        }
        if consistent {
            kept[i] = true;
            for &j in &crossing {
                forest.join_opposite(i, j);
            }
        }
    }

    // Per dependent: index into `order`.
    let mut arc_index = vec![usize::MAX; n + 1];
    for (i, a) in order.iter().enumerate() {
        arc_index[a.dep] = i;
    }
    let mut root_of = vec![0usize; m];
    let mut parity = vec![0u8; m];
    for i in 0..m {
        let (r, p) = forest.find(i);
        root_of[i] = r;
        parity[i] = p;
    }
    // First arc of each component in build order.
    let mut first_arc: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        if kept[i] && first_arc[root_of[i]].is_none() {
            first_arc[root_of[i]] = Some(i);
        }
    }

    let g = Gold::new(gold);
    let mut orientation: Vec<Option<Plane>> = vec![None; m];
    let status_of = |dep: usize, orientation: &[Option<Plane>]| -> Status {
        let i = arc_index[dep];
        if !kept[i] {
            return Status::Discarded;
        }
        match orientation[root_of[i]] {
            Some(plane) if parity[i] == parity[first_arc[root_of[i]].unwrap()] => Status::Known(plane),
            Some(plane) => Status::Known(plane.other()),
            None => Status::Pending,
        }
    };

    let mut c = Configuration::initial(n).expect("gold graphs are non-empty");
    let mut next_arc = 0;
    while !c.is_terminal() {
        let b = c.buffer_front().unwrap();
        // Orient components whose first arc ends at the new buffer front.
        while next_arc < m && order[next_arc].span().1 <= b {
            let i = next_arc;
            next_arc += 1;
            if kept[i] && first_arc[root_of[i]] == Some(i) {
                orientation[root_of[i]] = Some(c.active());
            }
        }
        let status = |dep: usize| status_of(dep, &orientation);
        let t = static_step(&c, &g, &status);
        c.apply_mut(t)
            .expect("static oracle only proposes legal transitions");
    }

    let planes = (0..=n)
        .map(|dep| {
            if dep == 0 {
                return None;
            }
            let i = arc_index[dep];
            if !kept[i] {
                return Some(Assignment::Discarded);
            }
            debug_assert_eq!(c.arcs().head(dep), gold.node_heads()[dep]);
            Some(Assignment::Plane(
                c.arc_plane(dep).expect("kept arcs are built by the simulation"),
            ))
        })
        .collect();
    PlaneAssignment {
        heads: g.heads,
        labels: g.labels,
        planes,
    }
}

/// The canonical next transition on the static path of `pa`.
pub fn static_oracle(c: &Configuration, pa: &PlaneAssignment) -> Result<Transition, OracleError> {
    if c.is_terminal() {
        return Err(OracleError::Terminal);
    }
    let n = pa.len();
    let mut children = vec![Vec::new(); n + 1];
    for dep in 1..=n {
        if let Some(h) = pa.heads[dep] {
            children[h].push(dep);
        }
    }
    let gold = Gold {
        n,
        heads: pa.heads.clone(),
        labels: pa.labels.clone(),
        children,
    };
    debug_assert_eq!(gold.n, c.len());
    let status = |dep: usize| match pa.planes[dep] {
        Some(Assignment::Plane(p)) => Status::Known(p),
        _ => Status::Discarded,
    };
    let t = static_step(c, &gold, &status);
    if !c.is_legal(t.kind()) {
        return Err(OracleError::OffPath);
    }
    if let Some(arc) = c.candidate_arc(t.kind()) {
        if pa.gold_head(arc.dep) != Some(arc.head) {
            return Err(OracleError::OffPath);
        }
    }
    Ok(t)
}

/// Runs the static oracle from the initial configuration to the end.
pub fn static_derivation(pa: &PlaneAssignment) -> Result<Vec<(Configuration, Transition)>, OracleError> {
    let mut c = Configuration::initial(pa.len()).map_err(OracleError::System)?;
    let mut out = Vec::new();
    while !c.is_terminal() {
        let t = static_oracle(&c, pa)?;
        let next = c.apply(t).map_err(OracleError::System)?;
        out.push((c, t));
        c = next;
    }
    Ok(out)
}
