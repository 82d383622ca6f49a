//! The 2|S|-regular completion Γ* of a folded graph, the free-group action on
//! its vertices, and exact orbit-finiteness decisions.
//!
//! Γ* hangs an infinite tree at every unfilled edge slot of the core graph.
//! Tree vertices are never materialized: a [`VertexRef`] addresses one
//! symbolically by its anchor in the core plus the reduced walk leading to it,
//! so memory stays proportional to what a computation touches. Because Γ* is
//! folded and complete, every letter moves every vertex — the action is a
//! total function, and `Core(Γ*, v)` equals the original core for every `v`
//! (hanging trees create no new cycles).

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use crate::digraph::SDigraph;
use crate::words::{Alphabet, Letter, Word};
use crate::{Error, Result};

/// A transitive-piece view of the completed graph Γ* of a folded core.
///
/// The action convention is a left action: `act(w, x)` applies the letters of
/// `w` right-to-left, so that `act(w₁·w₂, x) = act(w₁, act(w₂, x))`. A word
/// read left-to-right along edges from the basepoint (as
/// [`crate::subgroups::SubgroupHandle::contains`] does) therefore corresponds
/// to acting by its *reverse*; membership questions should go through
/// `contains`, not through `act` fixing the basepoint.
#[derive(Debug, Clone)]
pub struct SchreierView {
    core: Arc<SDigraph>,
}

/// A vertex of Γ*: either a core vertex by id, or a tree vertex addressed by
/// its core anchor and the reduced, non-empty walk from the anchor into the
/// tree (whose first step is an unfilled slot of the anchor).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexRef {
    Core(u32),
    Tree { anchor: u32, walk: Word },
}

impl VertexRef {
    pub fn core_id(&self) -> Option<u32> {
        match self {
            VertexRef::Core(v) => Some(*v),
            VertexRef::Tree { .. } => None,
        }
    }

    pub fn is_core(&self) -> bool {
        matches!(self, VertexRef::Core(_))
    }
}

/// Decision returned by [`SchreierView::orbit_finiteness`].
///
/// `Finite` carries the orbit of the *translated* start vertex under the
/// cyclic reduction of the word — a list of distinct core vertex ids (finite
/// orbits of cyclically reduced words never contain tree vertices). It maps
/// onto the orbit of the original vertex, element by element, under
/// `y ↦ act(conjugator, y)`; in particular the two orbits have equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitFiniteness {
    Finite(Vec<u32>),
    Infinite,
}

impl SchreierView {
    /// View the completion of a folded core graph.
    pub fn new(core: SDigraph) -> SchreierView {
        SchreierView {
            core: Arc::new(core),
        }
    }

    pub fn core(&self) -> &SDigraph {
        &self.core
    }

    pub fn alphabet(&self) -> Alphabet {
        self.core.alphabet()
    }

    /// The basepoint of the core as a vertex of Γ* (vertex 0 if none is set).
    pub fn base(&self) -> VertexRef {
        VertexRef::Core(self.core.basepoint().unwrap_or(0))
    }

    /// One step of the action: the endpoint of the `l`-labeled edge at `x`,
    /// i.e. `l·x`. Total: missing core slots step into hanging trees.
    pub fn act_letter(&self, l: Letter, x: &VertexRef) -> VertexRef {
        match x {
            VertexRef::Core(v) => match self.core.next(*v, l) {
                Some(t) => VertexRef::Core(t),
                None => VertexRef::Tree {
                    anchor: *v,
                    walk: Word::reduce([l]),
                },
            },
            VertexRef::Tree { anchor, walk } => {
                if walk.last() == Some(l.inverse()) {
                    let mut shorter = walk.clone();
                    shorter.pop_letter();
                    if shorter.is_empty() {
                        VertexRef::Core(*anchor)
                    } else {
                        VertexRef::Tree {
                            anchor: *anchor,
                            walk: shorter,
                        }
                    }
                } else {
                    let mut longer = walk.clone();
                    longer.push_reduced(l);
                    VertexRef::Tree {
                        anchor: *anchor,
                        walk: longer,
                    }
                }
            }
        }
    }

    /// The action of a word: letters applied right-to-left, so that
    /// `act(w₁·w₂, x) = act(w₁, act(w₂, x))` and `act(ε, x) = x`.
    pub fn act(&self, w: &Word, x: &VertexRef) -> VertexRef {
        let mut cur = x.clone();
        for &l in w.letters().iter().rev() {
            cur = self.act_letter(l, &cur);
        }
        cur
    }

    /// Word action restricted to the core: `None` as soon as a step would
    /// leave it. Fast path for orbit sweeps.
    pub fn act_core(&self, w: &Word, v: u32) -> Option<u32> {
        let mut cur = v;
        for &l in w.letters().iter().rev() {
            cur = self.core.next(cur, l)?;
        }
        Some(cur)
    }

    /// Decide whether the forward orbit `{act(wᵏ, x)}` is finite, exactly.
    ///
    /// Internally `w` is replaced by its cyclic reduction `u` (with
    /// `w = c·u·c⁻¹`) and `x` by `act(c⁻¹, x)`; the two orbit problems are
    /// equivalent under the bijection `act(c, ·)`. For cyclically reduced `u`
    /// the walk spelled by `u^∞` never backtracks, so entering a hanging tree
    /// is irreversible: a translated start outside the core, or any iterate
    /// stepping off it, certifies an infinite orbit. Otherwise the start
    /// vertex must recur within `|V(core)|` iterations by pigeonhole and
    /// bijectivity, yielding the finite orbit.
    pub fn orbit_finiteness(&self, w: &Word, x: &VertexRef) -> Result<OrbitFiniteness> {
        if w.is_empty() {
            return Err(Error::InvalidArgument(
                "orbit finiteness needs a nonempty word".into(),
            ));
        }
        let (conj, u) = w.cyclically_reduce();
        let start = self.act(&conj.inverse(), x);
        let v0 = match start {
            VertexRef::Core(v) => v,
            VertexRef::Tree { .. } => return Ok(OrbitFiniteness::Infinite),
        };
        let mut orbit = vec![v0];
        let bound = self.core.num_vertices();
        for _ in 0..bound {
            match self.act_core(&u, *orbit.last().unwrap()) {
                None => return Ok(OrbitFiniteness::Infinite),
                Some(y) if y == v0 => return Ok(OrbitFiniteness::Finite(orbit)),
                Some(y) => orbit.push(y),
            }
        }
        Err(Error::Internal(
            "orbit iteration exceeded the pigeonhole bound".into(),
        ))
    }

    /// The ball of radius `radius` around `center` in the undirected graph
    /// metric of Γ*, as an induced subgraph with back-references into Γ*.
    /// Vertex 0 is the center; BFS order (letters in index order) makes the
    /// result deterministic.
    pub fn ball(&self, center: &VertexRef, radius: usize) -> Ball<VertexRef> {
        ball_of(self, center.clone(), radius)
    }
}

/// A finite chunk of an action: `graph` is the induced subgraph on the ball
/// (slots leading outside are left empty), `refs[i]` is the underlying point
/// of ball vertex `i`, and `depths[i]` its distance from the center.
#[derive(Debug, Clone)]
pub struct Ball<P> {
    pub graph: SDigraph,
    pub refs: Vec<P>,
    pub depths: Vec<usize>,
}

impl<P: Eq + Hash> Ball<P> {
    /// The ball-local id of an underlying point, if it lies in the ball.
    pub fn id_of(&self, p: &P) -> Option<u32> {
        // Balls are small; linear scan keeps the struct plain data.
        self.refs.iter().position(|q| q == p).map(|i| i as u32)
    }
}

/// A left action of the free group on `alphabet()` on some point set: `step`
/// applies one letter, and `step(l⁻¹, step(l, p)) = p` must hold. Everything
/// generic in this crate (balls, boundary counts, Følner searches) works
/// through this trait.
pub trait PointAction {
    type Point: Clone + Eq + Hash + Ord;

    fn alphabet(&self) -> Alphabet;

    /// `l · p`.
    fn step(&self, l: Letter, p: &Self::Point) -> Self::Point;

    /// `w · p`, letters right-to-left.
    fn apply(&self, w: &Word, p: &Self::Point) -> Self::Point {
        let mut cur = p.clone();
        for &l in w.letters().iter().rev() {
            cur = self.step(l, &cur);
        }
        cur
    }
}

impl PointAction for SchreierView {
    type Point = VertexRef;

    fn alphabet(&self) -> Alphabet {
        self.core.alphabet()
    }

    fn step(&self, l: Letter, p: &VertexRef) -> VertexRef {
        self.act_letter(l, p)
    }
}

/// BFS ball of `radius` around `center` under an arbitrary point action,
/// materialized as an induced S-digraph (the `l`-edge of a ball vertex is
/// present iff both endpoints lie in the ball). Deterministic: neighbors are
/// explored in letter-index order.
pub fn ball_of<A: PointAction>(action: &A, center: A::Point, radius: usize) -> Ball<A::Point> {
    let deg = action.alphabet().num_letters();
    let mut refs: Vec<A::Point> = vec![center.clone()];
    let mut depths = vec![0usize];
    let mut ids: HashMap<A::Point, u32> = HashMap::new();
    ids.insert(center, 0);
    let mut head = 0;
    while head < refs.len() {
        let d = depths[head];
        if d == radius {
            break;
        }
        let p = refs[head].clone();
        head += 1;
        for li in 0..deg {
            let q = action.step(Letter::from_index(li), &p);
            if !ids.contains_key(&q) {
                ids.insert(q.clone(), refs.len() as u32);
                refs.push(q);
                depths.push(d + 1);
            }
        }
    }
    let mut graph = SDigraph::with_vertices(action.alphabet(), refs.len());
    for (i, p) in refs.iter().enumerate() {
        for s in action.alphabet().generators() {
            let q = action.step(s, p);
            if let Some(&j) = ids.get(&q) {
                graph.set_edge(i as u32, s, j);
            }
        }
    }
    graph.set_basepoint(Some(0));
    Ball {
        graph,
        refs,
        depths,
    }
}

/// All finite orbits of `x ↦ w·x` on the completion Γ* of `graph`, for a
/// cyclically reduced `w`, found in one sweep over the core vertices.
///
/// For cyclically reduced words a finite orbit can only consist of core
/// vertices, and any iterate stepping off the core certifies an infinite
/// orbit (see [`SchreierView::orbit_finiteness`]); so the partial map
/// `v ↦ w·v` through the core's own edges decides every vertex at once. The
/// functional graph is walked with the usual three-color scheme, giving
/// O(|V|·|w|) total. Each cycle is reported once, rotated so its smallest
/// vertex id comes first; cycles are listed in order of that id.
pub fn finite_orbit_sweep(graph: &SDigraph, w: &Word) -> Result<Vec<Vec<u32>>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument(
            "orbit sweep needs a nonempty word".into(),
        ));
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::InvalidArgument(
            "orbit sweep needs a cyclically reduced word".into(),
        ));
    }
    let step = |v: u32| -> Option<u32> {
        let mut cur = v;
        for &l in w.letters().iter().rev() {
            cur = graph.next(cur, l)?;
        }
        Some(cur)
    };
    // 0 = unvisited, 1 = on the path being walked, 2 = resolved.
    let mut color = vec![0u8; graph.num_vertices()];
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    for start in 0..graph.num_vertices() as u32 {
        if color[start as usize] != 0 {
            continue;
        }
        let mut path = vec![start];
        color[start as usize] = 1;
        loop {
            match step(*path.last().unwrap()) {
                // The walk leaves the core: everything on the path escapes.
                None => break,
                Some(next) => match color[next as usize] {
                    0 => {
                        color[next as usize] = 1;
                        path.push(next);
                    }
                    1 => {
                        // Closed a fresh cycle: the path suffix from `next`.
                        let pos = path.iter().position(|&v| v == next).unwrap();
                        let mut cyc = path[pos..].to_vec();
                        let min_at = (0..cyc.len()).min_by_key(|&i| cyc[i]).unwrap();
                        cyc.rotate_left(min_at);
                        cycles.push(cyc);
                        break;
                    }
                    // Joins territory already resolved; its fate is known.
                    _ => break,
                },
            }
        }
        for v in path {
            color[v as usize] = 2;
        }
    }
    cycles.sort_by_key(|c| c[0]);
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroups::SubgroupHandle;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(f2(), s).unwrap()
    }

    fn sharp_view() -> SchreierView {
        let h = SubgroupHandle::from_generators(f2(), &[w("a"), w("baB")]).unwrap();
        SchreierView::new(h.graph().clone())
    }

    fn cayley_view() -> SchreierView {
        let t = SubgroupHandle::from_generators(f2(), &[]).unwrap();
        SchreierView::new(t.graph().clone())
    }

    fn random_word(rng: &mut ChaCha8Rng, alphabet: Alphabet, max_len: usize) -> Word {
        let len = rng.gen_range(0..=max_len);
        Word::reduce((0..len).map(|_| Letter::from_index(rng.gen_range(0..alphabet.num_letters()))))
    }

    #[test]
    fn identity_acts_trivially() {
        let view = sharp_view();
        let x = VertexRef::Core(1);
        assert_eq!(view.act(&Word::empty(), &x), x);
    }

    #[test]
    fn sharp_example_traces() {
        let view = sharp_view();
        // Canonical form: 0 = root (a-loop, b-edge to 1), 1 has an a-loop.
        assert_eq!(view.act(&w("b"), &view.base()), VertexRef::Core(1));
        let off = view.act(&w("b"), &VertexRef::Core(1));
        assert!(!off.is_core());
        // Stepping back returns.
        assert_eq!(view.act(&w("B"), &off), VertexRef::Core(1));
    }

    #[test]
    fn action_composes_and_inverts() {
        let view = sharp_view();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let w1 = random_word(&mut rng, f2(), 6);
            let w2 = random_word(&mut rng, f2(), 6);
            // Random start: displace a random core vertex by a random word.
            let v = rng.gen_range(0..view.core().num_vertices()) as u32;
            let x = view.act(&random_word(&mut rng, f2(), 4), &VertexRef::Core(v));
            let composed = view.act(&w1.concat(&w2), &x);
            let nested = view.act(&w1, &view.act(&w2, &x));
            assert_eq!(composed, nested);
            assert_eq!(view.act(&w1.inverse(), &view.act(&w1, &x)), x);
        }
    }

    #[test]
    fn orbit_examples() {
        let view = sharp_view();
        assert_eq!(
            view.orbit_finiteness(&w("a"), &view.base()).unwrap(),
            OrbitFiniteness::Finite(vec![0])
        );
        assert_eq!(
            view.orbit_finiteness(&w("b"), &view.base()).unwrap(),
            OrbitFiniteness::Infinite
        );
        // Conjugated fixed point: baB fixes b·base even though that vertex
        // hangs in a tree.
        let x = view.act(&w("b"), &VertexRef::Core(1));
        assert_eq!(view.act(&w("baB"), &x), x);
        assert_eq!(
            view.orbit_finiteness(&w("baB"), &x).unwrap(),
            OrbitFiniteness::Finite(vec![1])
        );
        assert!(matches!(
            view.orbit_finiteness(&Word::empty(), &view.base()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn free_action_has_no_finite_orbits() {
        let view = cayley_view();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut g = random_word(&mut rng, f2(), 5);
            while g.is_empty() {
                g = random_word(&mut rng, f2(), 5);
            }
            let x = view.act(&random_word(&mut rng, f2(), 4), &view.base());
            assert_eq!(
                view.orbit_finiteness(&g, &x).unwrap(),
                OrbitFiniteness::Infinite
            );
        }
    }

    #[test]
    fn orbit_decision_matches_naive_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let num_gens = rng.gen_range(0..3);
            let gens: Vec<Word> = (0..num_gens)
                .map(|_| random_word(&mut rng, f2(), 5))
                .collect();
            let h = SubgroupHandle::from_generators(f2(), &gens).unwrap();
            let view = SchreierView::new(h.graph().clone());
            let mut u = random_word(&mut rng, f2(), 6);
            while u.is_empty() {
                u = random_word(&mut rng, f2(), 6);
            }
            let v = rng.gen_range(0..view.core().num_vertices()) as u32;
            let x = view.act(&random_word(&mut rng, f2(), 3), &VertexRef::Core(v));
            let bound = 10 * view.core().num_vertices();
            let mut cur = x.clone();
            let mut naive_period = None;
            for k in 1..=bound {
                cur = view.act(&u, &cur);
                if cur == x {
                    naive_period = Some(k);
                    break;
                }
            }
            match view.orbit_finiteness(&u, &x).unwrap() {
                OrbitFiniteness::Finite(orbit) => {
                    assert_eq!(naive_period, Some(orbit.len()), "word {u} from {x:?}");
                }
                OrbitFiniteness::Infinite => {
                    assert_eq!(naive_period, None, "word {u} from {x:?}");
                }
            }
        }
    }

    #[test]
    fn cayley_ball_counts() {
        let view = cayley_view();
        let mut prev: Vec<VertexRef> = Vec::new();
        for r in 0..=4usize {
            let ball = view.ball(&view.base(), r);
            // 1 + 4·(3^r − 1)/2 vertices in the 4-regular tree.
            assert_eq!(ball.refs.len(), 2 * 3usize.pow(r as u32) - 1);
            assert_eq!(ball.depths.iter().max().copied(), Some(r));
            for p in &prev {
                assert!(ball.id_of(p).is_some(), "radius {r} lost a vertex");
            }
            prev = ball.refs.clone();
        }
    }

    #[test]
    fn ball_radius_zero_is_a_point() {
        let view = sharp_view();
        let ball = view.ball(&view.base(), 0);
        assert_eq!(ball.refs.len(), 1);
        assert_eq!(ball.graph.num_vertices(), 1);
        assert_eq!(ball.depths, vec![0]);
    }

    #[test]
    fn ball_graph_is_induced() {
        let view = sharp_view();
        let ball = view.ball(&view.base(), 2);
        // Every edge present in the ball graph matches the action.
        for (u, s, v) in ball.graph.edges() {
            let stepped = view.act_letter(s, &ball.refs[u as usize]);
            assert_eq!(stepped, ball.refs[v as usize]);
        }
        // Core edges between ball members are present.
        let id0 = ball.id_of(&VertexRef::Core(0)).unwrap();
        let id1 = ball.id_of(&VertexRef::Core(1)).unwrap();
        assert_eq!(ball.graph.next(id0, Letter::positive(1)), Some(id1));
    }

    #[test]
    fn orbit_sweep_matches_per_vertex_decisions() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..40 {
            let num_gens = rng.gen_range(1..3);
            let gens: Vec<Word> = (0..num_gens)
                .map(|_| random_word(&mut rng, f2(), 6))
                .collect();
            let h = SubgroupHandle::from_generators(f2(), &gens).unwrap();
            let view = SchreierView::new(h.graph().clone());
            let mut u = random_word(&mut rng, f2(), 5);
            while u.is_empty() || !u.is_cyclically_reduced() {
                u = random_word(&mut rng, f2(), 5);
            }
            let cycles = finite_orbit_sweep(view.core(), &u).unwrap();
            let mut on_cycle = vec![false; view.core().num_vertices()];
            for cyc in &cycles {
                // Each cycle really is one orbit of u, starting at its
                // smallest id, and the entries are distinct.
                assert_eq!(cyc[0], *cyc.iter().min().unwrap());
                for (i, &v) in cyc.iter().enumerate() {
                    assert!(!on_cycle[v as usize], "vertex {v} reported twice");
                    on_cycle[v as usize] = true;
                    let next = cyc[(i + 1) % cyc.len()];
                    assert_eq!(view.act_core(&u, v), Some(next));
                }
            }
            for v in 0..view.core().num_vertices() as u32 {
                let decision = view.orbit_finiteness(&u, &VertexRef::Core(v)).unwrap();
                assert_eq!(
                    matches!(decision, OrbitFiniteness::Finite(_)),
                    on_cycle[v as usize],
                    "word {u} at vertex {v}"
                );
            }
        }
    }

    #[test]
    fn orbit_sweep_rejects_bad_words() {
        let view = sharp_view();
        assert!(finite_orbit_sweep(view.core(), &Word::empty()).is_err());
        assert!(finite_orbit_sweep(view.core(), &w("abA")).is_err());
    }
}
