//! Exhaustive search over completions, used to check the loss.

use std::collections::HashMap;

use crate::system::{Configuration, Plane};

use super::{OracleError, PlaneAssignment};

pub const DEFAULT_MAX_LEN: usize = 6;

/// Hard limit of the packed state below.
const PACKED_MAX_LEN: usize = 7;

/// A configuration reduced to what its future depends on. Stacks only ever
/// hold increasing node ids, so each one is a bitmask; connected components
/// of the built arcs are stored as the smallest node of each component.
#[derive(Clone, Copy)]
struct State {
    stacks: [u8; 2],
    front: u8,
    active: u8,
    switched: bool,
    headed: u8,
    comp: [u8; PACKED_MAX_LEN + 1],
}

impl State {
    fn from_config(c: &Configuration) -> Self {
        let n = c.len();
        let mut stacks = [0u8; 2];
        for plane in Plane::BOTH {
            for &v in c.stack(plane) {
                stacks[plane.index()] |= 1 << v;
            }
        }
        let mut headed = 0u8;
        let mut comp = [0u8; PACKED_MAX_LEN + 1];
        for v in 0..=n {
            if c.arcs().head(v).is_some() {
                headed |= 1 << v;
            }
            comp[v] = (0..=v).find(|&u| c.wcc().same_set(u, v)).unwrap_or(v) as u8;
        }
        State {
            stacks,
            front: c.buffer_front().map_or(n as u8 + 1, |b| b as u8),
            active: c.active().index() as u8,
            switched: c.last_was_switch(),
            headed,
            comp,
        }
    }

    fn key(&self, n: usize) -> u64 {
        let mut k = self.stacks[0] as u64
            | (self.stacks[1] as u64) << 8
            | (self.front as u64) << 16
            | (self.active as u64) << 20
            | (self.switched as u64) << 21
            | (self.headed as u64) << 22;
        for v in 1..=n {
            k |= (self.comp[v] as u64) << (30 + 3 * (v - 1));
        }
        k
    }

    fn top(&self) -> Option<u8> {
        let s = self.stacks[self.active as usize];
        (s != 0).then(|| 7 - s.leading_zeros() as u8)
    }

    fn attach(&self, head: u8, dep: u8) -> Option<State> {
        let (h, d) = (head as usize, dep as usize);
        if dep == 0 || self.headed & (1 << dep) != 0 || self.comp[h] == self.comp[d] {
            return None;
        }
        let mut next = *self;
        next.headed |= 1 << dep;
        let (keep, drop) = (self.comp[h].min(self.comp[d]), self.comp[h].max(self.comp[d]));
        for x in next.comp.iter_mut() {
            if *x == drop {
                *x = keep;
            }
        }
        next.switched = false;
        Some(next)
    }
}

/// Memoized search for the minimum loss reachable from a configuration.
///
/// Every gold arc built in its assigned plane adds one, so the search
/// maximizes the number of such arcs still to be built. Arc transitions
/// leave the stacks and buffer alone, so an arc that gains nothing can be
/// dropped from a completion without making a later step illegal, unless it
/// sits between two Switches. Inside the search such a detour returns to an
/// already explored state with one more constraint, so gain-free arcs are
/// only tried at the start, when the configuration was reached by a Switch.
/// The table can be reused across configurations of the same sentence.
pub struct BruteForce<'a> {
    pa: &'a PlaneAssignment,
    n: usize,
    /// Gold dependents of each node, per plane.
    children: [Vec<Vec<usize>>; 2],
    memo: HashMap<u64, u8>,
}

impl<'a> BruteForce<'a> {
    /// Longest sentence the packed search state can hold.
    pub const MAX_LEN: usize = PACKED_MAX_LEN;

    pub fn new(pa: &'a PlaneAssignment, max_len: usize) -> Result<Self, OracleError> {
        let max = max_len.min(PACKED_MAX_LEN);
        if pa.len() > max {
            return Err(OracleError::TooLong {
                len: pa.len(),
                max,
            });
        }
        let n = pa.len();
        let mut children = [vec![Vec::new(); n + 1], vec![Vec::new(); n + 1]];
        for dep in 1..=n {
            if let (Some(h), Some(p)) = (pa.gold_head(dep), pa.plane_of(dep)) {
                children[p.index()][h].push(dep);
            }
        }
        Ok(BruteForce {
            pa,
            n,
            children,
            memo: HashMap::new(),
        })
    }

    pub fn states_explored(&self) -> usize {
        self.memo.len()
    }

    /// Minimum over all terminal completions of the number of assigned gold
    /// arcs missing from the final arc set or built in the wrong plane.
    pub fn min_loss(&mut self, c: &Configuration) -> usize {
        assert_eq!(c.len(), self.n, "configuration and gold differ in length");
        let done = (1..=self.n).filter(|&d| self.pa.built_correctly(c, d)).count();
        let gain = if c.is_terminal() {
            0
        } else {
            let st = State::from_config(c);
            let mut best = self.best_gain(st);
            if st.switched {
                // a gain-free arc followed by a Switch back
                if let Some(s) = st.top() {
                    for (head, dep) in [(st.front, s), (s, st.front)] {
                        if let Some(mut next) = st.attach(head, dep) {
                            next.active ^= 1;
                            next.switched = true;
                            let gain = self.gains(head, dep, st.active) as u8;
                            best = best.max(gain + self.best_gain(next));
                        }
                    }
                }
            }
            best
        };
        self.pa.kept_count() - done - gain as usize
    }

    fn gains(&self, head: u8, dep: u8, active: u8) -> bool {
        self.pa.gold_head(dep as usize) == Some(head as usize)
            && self.pa.plane_of(dep as usize).map(|p| p.index() as u8) == Some(active)
    }

    /// Whether `v`, sitting on the stack of `plane`, can still take part in
    /// a gaining arc. Nodes that cannot are as good as reduced.
    fn alive(&self, st: &State, v: usize, plane: u8) -> bool {
        let open = |head: usize, dep: usize, other: usize| {
            other >= st.front as usize
                && st.headed & (1 << dep) == 0
                && st.comp[head] != st.comp[dep]
        };
        let as_dep = v != 0
            && self.pa.plane_of(v).map(|p| p.index() as u8) == Some(plane)
            && self.pa.gold_head(v).is_some_and(|h| open(h, v, h));
        as_dep
            || self.children[plane as usize][v]
                .iter()
                .any(|&d| open(v, d, d))
    }

    fn best_gain(&mut self, mut st: State) -> u8 {
        if st.front as usize > self.n {
            return 0;
        }
        for plane in 0..2u8 {
            // right after a Switch, reducing a dead node still unlocks the
            // next Switch
            if st.switched && plane == st.active {
                continue;
            }
            for v in 0..st.front as usize {
                if st.stacks[plane as usize] & (1 << v) != 0 && !self.alive(&st, v, plane) {
                    st.stacks[plane as usize] &= !(1 << v);
                }
            }
        }
        let key = st.key(self.n);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let b = st.front;
        let mut best = 0;

        let mut shifted = st;
        shifted.stacks[0] |= 1 << b;
        shifted.stacks[1] |= 1 << b;
        shifted.front += 1;
        shifted.switched = false;
        best = best.max(self.best_gain(shifted));

        if let Some(s) = st.top() {
            let mut reduced = st;
            reduced.stacks[st.active as usize] &= !(1 << s);
            reduced.switched = false;
            best = best.max(self.best_gain(reduced));

            for (head, dep) in [(b, s), (s, b)] {
                if !self.gains(head, dep, st.active) {
                    continue;
                }
                if let Some(next) = st.attach(head, dep) {
                    best = best.max(1 + self.best_gain(next));
                }
            }
        }

        if !st.switched {
            let mut other = st;
            other.active ^= 1;
            other.switched = true;
            best = best.max(self.best_gain(other));
        }

        self.memo.insert(key, best);
        best
    }
}

/// [`BruteForce::min_loss`] with a fresh table and the default length bound.
pub fn brute_force_min_loss(c: &Configuration, pa: &PlaneAssignment) -> Result<usize, OracleError> {
    let mut bf = BruteForce::new(pa, DEFAULT_MAX_LEN)?;
    Ok(bf.min_loss(c))
}
