//! Finitely generated subgroups of a free group as rooted core graphs.
//!
//! A [`SubgroupHandle`] wraps the canonical rooted core graph of a subgroup:
//! folded, equal to its own core relative to the basepoint, and renumbered by
//! BFS so that two handles describe the same subgroup **iff** they are
//! structurally equal. Everything else — membership, rank, index,
//! conjugation, intersection, amenability, ball-certified malnormality — is
//! read off that graph.

use std::collections::HashMap;

use crate::digraph::{GraphBuilder, SDigraph};
use crate::words::{enumerate_reduced, Alphabet, Word};
use crate::{Error, Result};

/// A finitely generated subgroup of the free group on `alphabet`, in
/// canonical form (rooted core graph, basepoint renumbered to 0).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubgroupHandle {
    graph: SDigraph,
}

impl SubgroupHandle {
    /// Build the subgroup generated by `gens`: a bouquet of generator loops
    /// at a root, folded and cored. Empty generators are skipped, so
    /// `from_generators(&[])` is the trivial subgroup.
    pub fn from_generators(alphabet: Alphabet, gens: &[Word]) -> Result<SubgroupHandle> {
        let mut b = GraphBuilder::new(alphabet);
        let base = b.add_vertex();
        b.set_basepoint(base);
        for g in gens {
            if !g.is_empty() {
                b.add_word_path(base, g.letters(), base);
            }
        }
        let folded = b.fold()?.graph;
        Self::from_graph(&folded, folded.basepoint().expect("fold sets a basepoint"))
    }

    /// Wrap an existing folded graph as the subgroup of loops at `base`,
    /// taking its core and canonical numbering.
    pub fn from_graph(graph: &SDigraph, base: u32) -> Result<SubgroupHandle> {
        let cored = graph.core(base)?.graph;
        Ok(SubgroupHandle { graph: cored })
    }

    /// The canonical core graph (basepoint 0).
    pub fn graph(&self) -> &SDigraph {
        &self.graph
    }

    pub fn alphabet(&self) -> Alphabet {
        self.graph.alphabet()
    }

    /// Membership: `w` is in the subgroup iff it labels a closed path at the
    /// basepoint. Tracing leaves the core only by failing.
    pub fn contains(&self, w: &Word) -> bool {
        let mut cur = 0u32;
        for &l in w.letters() {
            match self.graph.next(cur, l) {
                Some(t) => cur = t,
                None => return false,
            }
        }
        cur == 0
    }

    /// Free rank of the subgroup: `|E| − |V| + 1` of the core graph.
    pub fn rank(&self) -> usize {
        self.graph.num_edges() + 1 - self.graph.num_vertices()
    }

    /// Index in the ambient free group: finite iff the core graph is
    /// 2|S|-regular, in which case it equals the vertex count.
    pub fn index(&self) -> Option<usize> {
        if self.graph.is_complete() {
            let index = self.graph.num_vertices();
            // Nielsen–Schreier: rank − 1 = index · (|S| − 1).
            debug_assert_eq!(self.rank() - 1, index * (self.alphabet().rank() - 1));
            Some(index)
        } else {
            None
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    /// Subgroups of free groups are amenable exactly when they are trivial or
    /// infinite cyclic, i.e. have rank ≤ 1.
    pub fn is_amenable(&self) -> bool {
        self.rank() <= 1
    }

    /// The conjugate `g·H·g⁻¹`, built by re-rooting: hang a fresh path
    /// spelling `g` onto the basepoint, fold, and take the core at the new
    /// root. Satisfies `conjugate(H, g).contains(g·h·g⁻¹) ⇔ H.contains(h)`.
    pub fn conjugate(&self, g: &Word) -> Result<SubgroupHandle> {
        if g.is_empty() {
            return Ok(self.clone());
        }
        let mut b = GraphBuilder::new(self.alphabet());
        for _ in 0..self.graph.num_vertices() {
            b.add_vertex();
        }
        for (u, l, v) in self.graph.edges() {
            b.add_edge(u, l, v);
        }
        let new_base = b.add_vertex();
        // Reading g from the new root must arrive at the old basepoint.
        b.add_word_path(new_base, g.letters(), 0);
        b.set_basepoint(new_base);
        let folded = b.fold()?.graph;
        Self::from_graph(&folded, folded.basepoint().expect("fold sets a basepoint"))
    }

    /// The intersection `H ∩ K`: fiber product of the two core graphs,
    /// restricted to the component of `(base, base)`, then cored. Satisfies
    /// `contains(H∩K, w) ⇔ contains(H, w) ∧ contains(K, w)`.
    pub fn intersect(&self, other: &SubgroupHandle) -> Result<SubgroupHandle> {
        assert_eq!(self.alphabet(), other.alphabet());
        let deg = self.alphabet().num_letters();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut order: Vec<(u32, u32)> = vec![(0, 0)];
        ids.insert((0, 0), 0);
        let mut head = 0;
        while head < order.len() {
            let (u, v) = order[head];
            head += 1;
            for li in 0..deg {
                let l = crate::words::Letter::from_index(li);
                if let (Some(tu), Some(tv)) = (self.graph.next(u, l), other.graph.next(v, l)) {
                    ids.entry((tu, tv)).or_insert_with(|| {
                        order.push((tu, tv));
                        (order.len() - 1) as u32
                    });
                }
            }
        }
        let mut b = GraphBuilder::new(self.alphabet());
        for _ in 0..order.len() {
            b.add_vertex();
        }
        for (i, &(u, v)) in order.iter().enumerate() {
            for s in self.alphabet().generators() {
                if let (Some(tu), Some(tv)) = (self.graph.next(u, s), other.graph.next(v, s)) {
                    if let Some(&j) = ids.get(&(tu, tv)) {
                        b.add_edge(i as u32, s, j);
                    }
                }
            }
        }
        b.set_basepoint(0);
        // The fiber product of folded graphs is already folded; fold() only
        // renumbers here.
        let folded = b.fold()?.graph;
        Self::from_graph(&folded, 0)
    }

    /// A free basis read off a spanning tree of the core graph: one word
    /// `σ(u)·s·σ(v)⁻¹` per non-tree positive edge `(u, s, v)`, where `σ(x)`
    /// spells the tree path from the basepoint to `x`. Returns exactly
    /// `rank()` words, in (source vertex, letter) order.
    pub fn generators(&self) -> Vec<Word> {
        let n = self.graph.num_vertices();
        // parent[v] = (u, l) with u --l--> v a tree edge; basepoint has none.
        let mut parent: Vec<Option<(u32, crate::words::Letter)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = vec![0u32];
        let mut head = 0;
        let deg = self.alphabet().num_letters();
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for li in 0..deg {
                let l = crate::words::Letter::from_index(li);
                if let Some(v) = self.graph.next(u, l) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        parent[v as usize] = Some((u, l));
                        queue.push(v);
                    }
                }
            }
        }
        let sigma = |v: u32| -> Word {
            let mut letters = Vec::new();
            let mut cur = v;
            while let Some((p, l)) = parent[cur as usize] {
                letters.push(l);
                cur = p;
            }
            letters.reverse();
            Word::reduce(letters)
        };
        let mut out = Vec::new();
        for (u, s, v) in self.graph.edges() {
            let is_tree =
                parent[v as usize] == Some((u, s)) || parent[u as usize] == Some((v, s.inverse()));
            if !is_tree {
                let mut w = sigma(u);
                w.push_reduced(s);
                out.push(w.concat(&sigma(v).inverse()));
            }
        }
        debug_assert_eq!(out.len(), self.rank());
        out
    }

    /// Ball-certified malnormality: checks that `gHg⁻¹ ∩ H` is trivial for
    /// every reduced `g` of length ≤ `radius` outside `H`. Returns the first
    /// violating witness (in length-lexicographic order) or a certificate
    /// naming the exhausted radius.
    pub fn malnormal_in_ball(&self, radius: usize) -> Result<Malnormality> {
        if radius == 0 {
            return Err(Error::InvalidArgument(
                "malnormality search needs radius ≥ 1".into(),
            ));
        }
        for g in enumerate_reduced(self.alphabet(), radius) {
            if g.is_empty() || self.contains(&g) {
                continue;
            }
            let meet = self.conjugate(&g)?.intersect(self)?;
            if !meet.is_trivial() {
                return Ok(Malnormality::Violated {
                    witness: g,
                    intersection: meet,
                });
            }
        }
        Ok(Malnormality::BallCertified { radius })
    }
}

/// Outcome of [`SubgroupHandle::malnormal_in_ball`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Malnormality {
    /// No violating conjugator exists within the searched radius.
    BallCertified { radius: usize },
    /// `witness ∉ H` but `witness·H·witness⁻¹ ∩ H` is the given nontrivial
    /// subgroup.
    Violated {
        witness: Word,
        intersection: SubgroupHandle,
    },
}
