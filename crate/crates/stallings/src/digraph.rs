//! Finite S-labeled digraphs: folding, core extraction, and graph surgery.
//!
//! Two types split the spec of "S-digraph" along its central invariant:
//!
//! - [`GraphBuilder`] holds an arbitrary multiset of labeled edges — the
//!   unfolded input (generator-loop bouquets, hand-built gadgets).
//! - [`SDigraph`] is a *slot table*: for every vertex and every letter of
//!   S ∪ S⁻¹ at most one neighbor. The representation cannot express an
//!   unfolded graph, so foldedness ("no two equal-labeled out-edges, no two
//!   equal-labeled in-edges") is a structural invariant rather than a runtime
//!   promise.
//!
//! [`GraphBuilder::fold`] is the only road from the first to the second:
//! union-find over vertices with a worklist of slot conflicts, confluent by
//! the usual diamond argument and tested against permuted fold orders. The
//! folded result is renumbered by BFS from the basepoint, which makes equal
//! rooted graphs byte-for-byte equal (`canonicalize` exposes the same
//! renumbering for graphs built by other means).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::SerializeMap;

use crate::words::{Alphabet, Letter};
use crate::{Error, Result};

const EMPTY: u32 = u32::MAX;

/// An unfolded S-digraph under construction: dense vertex ids, an edge
/// multiset, and an optional basepoint. Edges are stored with positive
/// labels; an edge `(u, s, v)` means `u --s--> v` and equivalently
/// `v --s⁻¹--> u`.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    alphabet: Alphabet,
    n: u32,
    edges: Vec<(u32, Letter, u32)>,
    basepoint: Option<u32>,
}

impl GraphBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        GraphBuilder {
            alphabet,
            n: 0,
            edges: Vec::new(),
            basepoint: None,
        }
    }

    pub fn add_vertex(&mut self) -> u32 {
        self.n += 1;
        self.n - 1
    }

    /// Add `u --l--> v`, stored positively (`u --s⁻¹--> v` becomes
    /// `v --s--> u`).
    pub fn add_edge(&mut self, u: u32, l: Letter, v: u32) {
        debug_assert!(u < self.n && v < self.n);
        debug_assert!(self.alphabet.contains(l));
        if l.is_positive() {
            self.edges.push((u, l, v));
        } else {
            self.edges.push((v, l.inverse(), u));
        }
    }

    pub fn set_basepoint(&mut self, v: u32) {
        debug_assert!(v < self.n);
        self.basepoint = Some(v);
    }

    /// Trace `letters` from `from` through fresh vertices back to `to`
    /// (a generator loop when `from == to`). Used to build bouquets.
    pub fn add_word_path(&mut self, from: u32, letters: &[Letter], to: u32) {
        let mut cur = from;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                to
            } else {
                self.add_vertex()
            };
            self.add_edge(cur, l, next);
            cur = next;
        }
        if letters.is_empty() {
            debug_assert_eq!(from, to);
        }
    }

    /// Stallings folding: repeatedly identify the two endpoints of
    /// equal-labeled edges leaving (or entering) a common vertex, until the
    /// slot table is single-valued. Union-find with a worklist of pending
    /// identifications; the result is independent of processing order.
    ///
    /// The folded graph is renumbered by BFS from the basepoint (vertex 0 if
    /// none was set); the returned map sends builder ids to folded ids.
    /// Errors if the graph is empty or not connected (every caller builds
    /// connected graphs; disconnected input would silently drop vertices
    /// otherwise).
    pub fn fold(&self) -> Result<FoldResult> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("cannot fold an empty graph".into()));
        }
        let deg = self.alphabet.num_letters();
        let mut uf = UnionFind::new(self.n as usize);
        // Slot tables live at class representatives and move on union.
        let mut slots = vec![EMPTY; self.n as usize * deg];
        let mut pending: Vec<(u32, u32)> = Vec::new();

        let set_slot = |slots: &mut Vec<u32>,
                        uf: &mut UnionFind,
                        pending: &mut Vec<(u32, u32)>,
                        x: u32,
                        l: Letter,
                        y: u32| {
            let xi = x as usize * deg + l.index();
            let cur = slots[xi];
            if cur == EMPTY {
                slots[xi] = y;
            } else if uf.find(cur) != uf.find(y) {
                pending.push((cur, y));
            }
        };

        for &(u, l, v) in &self.edges {
            let (ru, rv) = (uf.find(u), uf.find(v));
            set_slot(&mut slots, &mut uf, &mut pending, ru, l, rv);
            let rv = uf.find(v);
            let ru = uf.find(u);
            set_slot(&mut slots, &mut uf, &mut pending, rv, l.inverse(), ru);
            while let Some((a, b)) = pending.pop() {
                let (ra, rb) = (uf.find(a), uf.find(b));
                if ra == rb {
                    continue;
                }
                // Merge the smaller slot table into the larger.
                let (keep, drop) = if uf.size(ra) >= uf.size(rb) {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                uf.union_into(keep, drop);
                for li in 0..deg {
                    let t = slots[drop as usize * deg + li];
                    if t != EMPTY {
                        set_slot(
                            &mut slots,
                            &mut uf,
                            &mut pending,
                            keep,
                            Letter::from_index(li),
                            t,
                        );
                    }
                }
            }
        }

        // Normalize every stored target to its final representative.
        for slot in slots.iter_mut() {
            if *slot != EMPTY {
                *slot = uf.find(*slot);
            }
        }
        let base = uf.find(self.basepoint.unwrap_or(0));
        let order = bfs_order(&|v, l| slots[v as usize * deg + l.index()], deg, base);

        let mut new_id = vec![EMPTY; self.n as usize];
        for (i, &v) in order.iter().enumerate() {
            new_id[v as usize] = i as u32;
        }
        // Reachability check: every class representative must be reached.
        for v in 0..self.n {
            if uf.find(v) == v && new_id[v as usize] == EMPTY {
                return Err(Error::InvalidArgument(
                    "fold requires a connected graph".into(),
                ));
            }
        }

        let mut out = SDigraph::with_vertices(self.alphabet, order.len());
        for (ni, &v) in order.iter().enumerate() {
            for li in 0..deg {
                let t = slots[v as usize * deg + li];
                if t != EMPTY {
                    out.slots[ni * deg + li] = new_id[t as usize];
                }
            }
        }
        out.basepoint = Some(new_id[base as usize]);

        let vertex_map = (0..self.n).map(|v| new_id[uf.find(v) as usize]).collect();
        Ok(FoldResult {
            graph: out,
            vertex_map,
        })
    }
}

/// Output of [`GraphBuilder::fold`]: the folded graph plus the projection of
/// builder vertex ids onto folded ids.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub graph: SDigraph,
    pub vertex_map: Vec<u32>,
}

/// A finite folded S-digraph as a slot table: entry `(v, l)` is the endpoint
/// of the unique l-labeled edge at `v` (out-edge for positive `l`, in-edge
/// source for an inverse letter), or empty. Immutable in practice: all
/// operations build new graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SDigraph {
    alphabet: Alphabet,
    /// `slots[v * 2·rank + l]`, `u32::MAX` = empty.
    slots: Vec<u32>,
    basepoint: Option<u32>,
}

impl SDigraph {
    pub(crate) fn with_vertices(alphabet: Alphabet, n: usize) -> Self {
        SDigraph {
            alphabet,
            slots: vec![EMPTY; n * alphabet.num_letters()],
            basepoint: None,
        }
    }

    /// A single basepointed vertex with no edges.
    pub fn point(alphabet: Alphabet) -> Self {
        let mut g = SDigraph::with_vertices(alphabet, 1);
        g.basepoint = Some(0);
        g
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_vertices(&self) -> usize {
        self.slots.len() / self.alphabet.num_letters()
    }

    /// Number of (positively labeled) edges.
    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn basepoint(&self) -> Option<u32> {
        self.basepoint
    }

    pub fn set_basepoint(&mut self, v: Option<u32>) {
        if let Some(v) = v {
            debug_assert!((v as usize) < self.num_vertices());
        }
        self.basepoint = v;
    }

    /// The unique `l`-neighbor of `v`, if materialized.
    #[inline]
    pub fn next(&self, v: u32, l: Letter) -> Option<u32> {
        let t = self.slots[v as usize * self.alphabet.num_letters() + l.index()];
        (t != EMPTY).then_some(t)
    }

    /// Undirected degree: the number of filled slots (a loop fills two).
    pub fn degree(&self, v: u32) -> usize {
        let deg = self.alphabet.num_letters();
        (0..deg)
            .filter(|&li| self.slots[v as usize * deg + li] != EMPTY)
            .count()
    }

    /// Iterate positive edges `(src, letter, dst)` in (src, letter) order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, Letter, u32)> + '_ {
        let deg = self.alphabet.num_letters();
        (0..self.num_vertices() as u32).flat_map(move |v| {
            self.alphabet.generators().filter_map(move |s| {
                let t = self.slots[v as usize * deg + s.index()];
                (t != EMPTY).then_some((v, s, t))
            })
        })
    }

    /// True iff every slot of every vertex is filled (the graph is
    /// 2|S|-regular, i.e. a complete Schreier graph).
    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(|&t| t != EMPTY)
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices() == 0 {
            return true;
        }
        let deg = self.alphabet.num_letters();
        let order = bfs_order(&|v, l| self.slots[v as usize * deg + l.index()], deg, 0);
        order.len() == self.num_vertices()
    }

    pub(crate) fn set_edge(&mut self, u: u32, s: Letter, v: u32) {
        debug_assert!(s.is_positive());
        let deg = self.alphabet.num_letters();
        debug_assert_eq!(self.slots[u as usize * deg + s.index()], EMPTY);
        debug_assert_eq!(self.slots[v as usize * deg + s.inverse().index()], EMPTY);
        self.slots[u as usize * deg + s.index()] = v;
        self.slots[v as usize * deg + s.inverse().index()] = u;
    }

    fn clear_edge(&mut self, u: u32, s: Letter) {
        debug_assert!(s.is_positive());
        let deg = self.alphabet.num_letters();
        let v = self.slots[u as usize * deg + s.index()];
        debug_assert_ne!(v, EMPTY);
        self.slots[u as usize * deg + s.index()] = EMPTY;
        self.slots[v as usize * deg + s.inverse().index()] = EMPTY;
    }

    /// Iteratively delete degree-≤1 vertices other than `base` until none
    /// remain, then renumber canonically (BFS from `base`). Idempotent; the
    /// result together with `base ↦ 0` is `Core(Γ, base)`.
    ///
    /// Errors if `base` is not a vertex. Requires a connected graph (all
    /// callers maintain this; pruning never disconnects).
    pub fn core(&self, base: u32) -> Result<FoldResult> {
        if base as usize >= self.num_vertices() {
            return Err(Error::InvalidVertex(base));
        }
        let deg = self.alphabet.num_letters();
        let mut g = self.clone();
        let mut degree: Vec<usize> = (0..g.num_vertices() as u32).map(|v| g.degree(v)).collect();
        let mut queue: Vec<u32> = (0..g.num_vertices() as u32)
            .filter(|&v| v != base && degree[v as usize] <= 1)
            .collect();
        let mut dead = vec![false; g.num_vertices()];
        while let Some(v) = queue.pop() {
            if dead[v as usize] || v == base {
                continue;
            }
            dead[v as usize] = true;
            for li in 0..deg {
                let l = Letter::from_index(li);
                if let Some(t) = g.next(v, l) {
                    let s = if l.is_positive() { l } else { l.inverse() };
                    let src = if l.is_positive() { v } else { t };
                    g.clear_edge(src, s);
                    degree[v as usize] -= 1;
                    if t != v {
                        degree[t as usize] -= 1;
                        if t != base && degree[t as usize] <= 1 && !dead[t as usize] {
                            queue.push(t);
                        }
                    }
                }
            }
        }
        g.basepoint = Some(base);
        let mut res = g.canonicalize(base)?;
        // Dead vertices map nowhere; mark them with EMPTY.
        for (v, is_dead) in dead.iter().enumerate() {
            if *is_dead {
                res.vertex_map[v] = EMPTY;
            }
        }
        Ok(res)
    }

    /// Renumber vertices by BFS from `base` (neighbors visited in letter
    /// order), making equal rooted graphs identical. The basepoint becomes 0.
    /// Errors if `base` is invalid or the graph is not connected after
    /// ignoring isolated pruned vertices (callers pass pruned graphs whose
    /// live part is connected).
    pub fn canonicalize(&self, base: u32) -> Result<FoldResult> {
        if base as usize >= self.num_vertices() {
            return Err(Error::InvalidVertex(base));
        }
        let deg = self.alphabet.num_letters();
        let order = bfs_order(&|v, l| self.slots[v as usize * deg + l.index()], deg, base);
        let mut new_id = vec![EMPTY; self.num_vertices()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v as usize] = i as u32;
        }
        for v in 0..self.num_vertices() {
            if new_id[v] == EMPTY && self.degree(v as u32) > 0 {
                return Err(Error::InvalidArgument(
                    "canonicalize requires the live part to be connected".into(),
                ));
            }
        }
        let mut out = SDigraph::with_vertices(self.alphabet, order.len());
        for (ni, &v) in order.iter().enumerate() {
            for li in 0..deg {
                let t = self.slots[v as usize * deg + li];
                if t != EMPTY {
                    out.slots[ni * deg + li] = new_id[t as usize];
                }
            }
        }
        out.basepoint = Some(0);
        Ok(FoldResult {
            graph: out,
            vertex_map: new_id,
        })
    }

    /// Disjoint union; vertices of `other` are shifted by `self`'s count
    /// (returned as the offset). Keeps `self`'s basepoint.
    pub fn disjoint_union(&self, other: &SDigraph) -> (SDigraph, u32) {
        assert_eq!(self.alphabet, other.alphabet);
        let offset = self.num_vertices() as u32;
        let mut out = self.clone();
        out.slots.extend(
            other
                .slots
                .iter()
                .map(|&t| if t == EMPTY { EMPTY } else { t + offset }),
        );
        (out, offset)
    }

    /// Attach a directed path of `length` edges labeled `label` from `from`
    /// to `to` through `length − 1` fresh vertices. An inverse `label` is the
    /// same surgery with the endpoints swapped. Preconditions: `from` has a
    /// free outgoing slot and `to` a free incoming slot for the label;
    /// `length ≥ 1`. The result stays folded.
    pub fn attach_path(
        &self,
        from: u32,
        to: u32,
        label: Letter,
        length: usize,
    ) -> Result<SDigraph> {
        let (from, to, s) = if label.is_positive() {
            (from, to, label)
        } else {
            (to, from, label.inverse())
        };
        if from as usize >= self.num_vertices() {
            return Err(Error::InvalidVertex(from));
        }
        if to as usize >= self.num_vertices() {
            return Err(Error::InvalidVertex(to));
        }
        if length == 0 {
            return Err(Error::SurgeryConflict(
                "attach_path needs length ≥ 1".into(),
            ));
        }
        if self.next(from, s).is_some() {
            return Err(Error::SurgeryConflict(format!(
                "vertex {from} already has an outgoing {s} edge"
            )));
        }
        if self.next(to, s.inverse()).is_some() {
            return Err(Error::SurgeryConflict(format!(
                "vertex {to} already has an incoming {s} edge"
            )));
        }
        if length == 1 && from == to {
            // A loop fills both slots at once; the two checks above already
            // guarantee they are free.
        }
        let mut out = self.clone();
        let deg = self.alphabet.num_letters();
        let first_new = out.num_vertices() as u32;
        out.slots
            .extend(std::iter::repeat(EMPTY).take((length - 1) * deg));
        let mut cur = from;
        for i in 0..length {
            let nxt = if i + 1 == length {
                to
            } else {
                first_new + i as u32
            };
            out.set_edge(cur, s, nxt);
            cur = nxt;
        }
        Ok(out)
    }

    /// DOT export; the basepoint is drawn with a double circle.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph stallings {\n  rankdir=LR;\n  node [shape=circle];\n");
        if let Some(b) = self.basepoint {
            let _ = writeln!(s, "  {b} [shape=doublecircle];");
        }
        for (u, l, v) in self.edges() {
            let _ = writeln!(s, "  {u} -> {v} [label=\"{l}\"];");
        }
        s.push_str("}\n");
        s
    }

    /// JSON schema: `{vertices:[int], edges:[[src,label,dst]], basepoint:int}`.
    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<u32> = (0..self.num_vertices() as u32).collect();
        let edges: Vec<serde_json::Value> = self
            .edges()
            .map(|(u, l, v)| serde_json::json!([u, l.to_string(), v]))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert("vertices".into(), serde_json::json!(vertices));
        obj.insert("edges".into(), serde_json::json!(edges));
        if let Some(b) = self.basepoint {
            obj.insert("basepoint".into(), serde_json::json!(b));
        }
        serde_json::Value::Object(obj)
    }

    /// Parse the JSON schema emitted by [`SDigraph::to_json`]. The edge list
    /// is folded (so arbitrary labeled graphs are accepted and normalized).
    pub fn from_json(alphabet: Alphabet, value: &serde_json::Value) -> Result<FoldResult> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidArgument("graph JSON must be an object".into()))?;
        let vertices = obj
            .get("vertices")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::InvalidArgument("graph JSON needs a vertices array".into()))?;
        let mut b = GraphBuilder::new(alphabet);
        let mut max_id = 0u32;
        for v in vertices {
            let id = v
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("vertex ids must be integers".into()))?;
            max_id = max_id.max(id as u32);
        }
        for _ in 0..=max_id {
            b.add_vertex();
        }
        if let Some(edges) = obj.get("edges").and_then(|v| v.as_array()) {
            for e in edges {
                let triple = e.as_array().filter(|t| t.len() == 3).ok_or_else(|| {
                    Error::InvalidArgument("edges must be [src,label,dst]".into())
                })?;
                let src = triple[0].as_u64().ok_or_else(|| {
                    Error::InvalidArgument("edge source must be an integer".into())
                })? as u32;
                let dst = triple[2].as_u64().ok_or_else(|| {
                    Error::InvalidArgument("edge target must be an integer".into())
                })? as u32;
                let label = triple[1]
                    .as_str()
                    .ok_or_else(|| Error::InvalidArgument("edge label must be a string".into()))?;
                let word = crate::words::Word::parse(alphabet, label)?;
                if word.len() != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "edge label must be a single letter, got {label:?}"
                    )));
                }
                if src > max_id || dst > max_id {
                    return Err(Error::InvalidVertex(src.max(dst)));
                }
                b.add_edge(src, word.letters()[0], dst);
            }
        }
        if let Some(bp) = obj.get("basepoint") {
            let bp = bp
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("basepoint must be an integer".into()))?;
            b.set_basepoint(bp as u32);
        }
        b.fold()
    }
}

impl serde::Serialize for SDigraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = self.to_json();
        let obj = json.as_object().expect("to_json returns an object");
        let mut map = s.serialize_map(Some(obj.len()))?;
        for (k, v) in obj {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// BFS order over representatives starting at `base`; `next(v, l)` returns
/// `u32::MAX` for an empty slot. Letters are visited in index order, so the
/// order — and everything renumbered with it — is canonical.
fn bfs_order(next: &dyn Fn(u32, Letter) -> u32, num_letters: usize, base: u32) -> Vec<u32> {
    let mut order = vec![base];
    let mut seen = BTreeMap::new();
    seen.insert(base, ());
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for li in 0..num_letters {
            let t = next(v, Letter::from_index(li));
            if t != EMPTY && !seen.contains_key(&t) {
                seen.insert(t, ());
                order.push(t);
            }
        }
    }
    order
}

/// Union-find with union-by-size; `union_into` forces a chosen representative
/// so slot tables can stay attached to survivors.
#[derive(Debug)]
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    /// Make `keep` the representative of `drop`'s class. Both must already be
    /// representatives.
    fn union_into(&mut self, keep: u32, drop: u32) {
        debug_assert_eq!(self.parent[keep as usize], keep);
        debug_assert_eq!(self.parent[drop as usize], drop);
        debug_assert_ne!(keep, drop);
        self.parent[drop as usize] = keep;
        self.size[keep as usize] += self.size[drop as usize];
    }
}
