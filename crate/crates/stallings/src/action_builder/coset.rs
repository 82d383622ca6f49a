//! The metabelian coset space G/N′ for a finite quotient G/N: Schreier
//! transversal, cocycle tables, conjugation matrices, and exact point
//! arithmetic realizing the G-action on pairs (coset of N, vector in Z^r).
//!
//! A point (q, z) stands for the coset σ(q)·n·N′ where n ∈ N abelianizes to
//! z ∈ Z^r ≅ N/N′. One letter moves it to (l·q, z + ab(γ)) where γ is the
//! Schreier element of the traversed Cayley edge — the identity for spanning
//! tree edges, a signed basis vector otherwise. All arithmetic is exact.

use std::collections::HashMap;

use crate::action_builder::quotient::QuotientGroup;
use crate::schreier::PointAction;
use crate::words::{Alphabet, Letter, Word};
use crate::{Error, Result};

/// A point of G/N′.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetPoint {
    pub q: u32,
    pub z: Vec<i32>,
}

/// Signed Schreier-generator index of one Cayley edge crossing; `0` encodes
/// a tree edge, `±(j+1)` the generator `j` crossed forward or backward.
type Coc = i32;

#[derive(Debug, Clone)]
pub struct CosetSpace {
    alphabet: Alphabet,
    /// |Q|, the index of N.
    pub order: usize,
    /// Rank r of the free group N; the fiber is Z^r.
    pub rank: usize,
    pub description: String,
    /// left[letter.index()][q] = (image of letter)·q in Q.
    left: Vec<Vec<u32>>,
    /// coc[letter.index()][q]: fiber translation of stepping by the letter
    /// at coset q.
    coc: Vec<Vec<Coc>>,
    /// Spanning-tree transversal: σ(q) maps the base coset to q.
    pub sigma: Vec<Word>,
    /// The Schreier generators of N as words, g_j = σ(s·q)⁻¹ · s · σ(q).
    pub schreier_words: Vec<Word>,
    /// conj[letter.index()] = r×r matrix of conjugation by the letter on
    /// N/N′ ≅ Z^r: column j is the rewriting of l·g_j·l⁻¹.
    pub conj: Vec<Vec<Vec<i64>>>,
}

impl CosetSpace {
    /// Reidemeister–Schreier data over the quotient's left Cayley graph.
    pub fn build(group: &QuotientGroup) -> Result<CosetSpace> {
        let alphabet = group.alphabet;
        let order = group.order;
        let num_letters = alphabet.num_letters();

        // Geodesic BFS spanning tree from the identity coset, over all
        // letters in canonical order.
        let mut parent: Vec<Option<(u32, Letter)>> = vec![None; order];
        let mut sigma: Vec<Option<Word>> = vec![None; order];
        sigma[0] = Some(Word::empty());
        let mut queue = vec![0u32];
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            for l in alphabet.letters() {
                let t = group.left[l.index()][q as usize];
                if sigma[t as usize].is_none() {
                    sigma[t as usize] = Some(Word::reduce(
                        std::iter::once(l).chain(
                            sigma[q as usize]
                                .as_ref()
                                .unwrap()
                                .letters()
                                .iter()
                                .copied(),
                        ),
                    ));
                    parent[t as usize] = Some((q, l));
                    queue.push(t);
                }
            }
        }
        if queue.len() != order {
            return Err(Error::Internal(
                "quotient Cayley graph must be connected".into(),
            ));
        }
        let sigma: Vec<Word> = sigma.into_iter().map(Option::unwrap).collect();

        // Tree edges normalized to positive labels: (src, s, dst).
        let mut tree: HashMap<(u32, Letter), u32> = HashMap::new();
        for (child, p) in parent.iter().enumerate() {
            if let Some((par, l)) = p {
                if l.is_positive() {
                    tree.insert((*par, *l), child as u32);
                } else {
                    tree.insert((child as u32, l.inverse()), *par);
                }
            }
        }

        // Positive-edge sweep in canonical order indexes the Schreier
        // generators; tree crossings carry no fiber translation.
        let mut coc: Vec<Vec<Coc>> = vec![vec![0; order]; num_letters];
        let mut schreier_words = Vec::new();
        for q in 0..order as u32 {
            for s in alphabet.generators() {
                let t = group.left[s.index()][q as usize];
                if tree.get(&(q, s)) == Some(&t) {
                    continue;
                }
                let j = schreier_words.len();
                let t_back = sigma[t as usize].inverse();
                schreier_words.push(Word::reduce(
                    t_back
                        .letters()
                        .iter()
                        .copied()
                        .chain(std::iter::once(s))
                        .chain(sigma[q as usize].letters().iter().copied()),
                ));
                coc[s.index()][q as usize] = (j + 1) as Coc;
            }
        }
        let rank = schreier_words.len();
        assert_eq!(
            rank,
            order * (alphabet.rank() - 1) + 1,
            "Schreier generator count must satisfy the index formula"
        );
        // Inverse letters cross the matching positive edge backwards.
        for s in alphabet.generators() {
            let t_letter = s.inverse();
            for q in 0..order {
                let src = group.left[t_letter.index()][q] as usize;
                coc[t_letter.index()][q] = -coc[s.index()][src];
            }
        }

        let mut space = CosetSpace {
            alphabet,
            order,
            rank,
            description: group.description.clone(),
            left: group.left.clone(),
            coc,
            sigma,
            schreier_words,
            conj: Vec::new(),
        };

        // Conjugation matrices on the fiber, column by column, then the
        // inverse-pair relation C_s · C_{s⁻¹} = I.
        let mut conj = Vec::with_capacity(num_letters);
        for l in alphabet.letters() {
            let lw = Word::reduce(std::iter::once(l));
            let mut mat = vec![vec![0i64; rank]; rank];
            for (j, g) in space.schreier_words.clone().iter().enumerate() {
                let conjugated = lw.concat(g).concat(&lw.inverse());
                let col = space.rewrite(&conjugated)?;
                for i in 0..rank {
                    mat[i][j] = col[i];
                }
            }
            conj.push(mat);
        }
        for s in alphabet.generators() {
            let a = &conj[s.index()];
            let b = &conj[s.inverse().index()];
            for j in 0..rank {
                for i in 0..rank {
                    let entry: i64 = (0..rank).map(|k| a[i][k] * b[k][j]).sum();
                    let expect = i64::from(i == j);
                    if entry != expect {
                        return Err(Error::Internal(
                            "conjugation matrices fail the inverse relation".into(),
                        ));
                    }
                }
            }
        }
        space.conj = conj;
        Ok(space)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// The base point: identity coset, zero fiber.
    pub fn base(&self) -> CosetPoint {
        CosetPoint {
            q: 0,
            z: vec![0; self.rank],
        }
    }

    /// Apply one letter (left action).
    pub fn step_point(&self, l: Letter, p: &CosetPoint) -> CosetPoint {
        let mut z = p.z.clone();
        let c = self.coc[l.index()][p.q as usize];
        if c > 0 {
            z[(c - 1) as usize] += 1;
        } else if c < 0 {
            z[(-c - 1) as usize] -= 1;
        }
        CosetPoint {
            q: self.left[l.index()][p.q as usize],
            z,
        }
    }

    /// Apply a word right-to-left (left action).
    pub fn apply_word(&self, w: &Word, p: &CosetPoint) -> CosetPoint {
        let mut cur = p.clone();
        for &l in w.letters().iter().rev() {
            cur = self.step_point(l, &cur);
        }
        cur
    }

    /// Coset of N reached from the identity.
    pub fn eval_q(&self, w: &Word) -> u32 {
        self.apply_word(w, &self.base()).q
    }

    /// Order of the word's image in Q.
    pub fn order_in_q(&self, w: &Word) -> usize {
        let mut q = self.eval_q(w);
        let mut d = 1;
        while q != 0 {
            for &l in w.letters().iter().rev() {
                q = self.left[l.index()][q as usize];
            }
            d += 1;
            assert!(d <= self.order);
        }
        d
    }

    /// Abelianized Schreier rewriting of an element of N: its fiber
    /// translation at the base point. Words outside N are rejected.
    pub fn rewrite(&self, w: &Word) -> Result<Vec<i64>> {
        let moved = self.apply_word(w, &self.base());
        if moved.q != 0 {
            return Err(Error::InvalidArgument(format!(
                "{w} lies outside the kernel subgroup"
            )));
        }
        Ok(moved.z.iter().map(|&v| v as i64).collect())
    }

    /// Torsion-freeness smoke test to the given word length: no nonempty
    /// cyclically reduced word may have a nontrivial finite-order image in
    /// G/N′. With d the order of the image in Q, the image's order is finite
    /// exactly when w^d rewrites to zero; that is tolerated only when the
    /// image was trivial to begin with (d = 1 and zero rewriting).
    pub fn torsion_smoke(&self, max_len: usize) -> Result<()> {
        for w in crate::words::enumerate_cyclically_reduced(self.alphabet, max_len) {
            let d = self.order_in_q(&w);
            let mut p = self.base();
            for _ in 0..d {
                p = self.apply_word(&w, &p);
            }
            debug_assert_eq!(p.q, 0);
            let power_trivial = p.z.iter().all(|&v| v == 0);
            if power_trivial && d > 1 {
                return Err(Error::Internal(format!(
                    "torsion witness: {w} has image of order {d} in G/N′"
                )));
            }
            if power_trivial && d == 1 {
                // w itself lies in N′; fine, but it must then rewrite to 0.
                debug_assert!(self.rewrite(&w)?.iter().all(|&v| v == 0));
            }
        }
        Ok(())
    }

    /// Lengths of the Schreier generator words (edge-crossing costs used by
    /// Følner shape heuristics).
    pub fn schreier_word_lengths(&self) -> Vec<usize> {
        self.schreier_words.iter().map(Word::len).collect()
    }
}

impl PointAction for CosetSpace {
    type Point = CosetPoint;

    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn step(&self, l: Letter, p: &CosetPoint) -> CosetPoint {
        self.step_point(l, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_builder::quotient::FiniteQuotient;
    use crate::words::enumerate_cyclically_reduced;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(f2(), s).unwrap()
    }

    fn z2_space() -> CosetSpace {
        let q = FiniteQuotient::cyclic(f2(), 2, &[1, 1]);
        CosetSpace::build(&q.group(4).unwrap()).unwrap()
    }

    fn z5_space() -> CosetSpace {
        let q = FiniteQuotient::cyclic(f2(), 5, &[1, 2]);
        CosetSpace::build(&q.group(8).unwrap()).unwrap()
    }

    #[test]
    fn klein_four_has_schreier_rank_five() {
        let c1: Vec<Word> = enumerate_cyclically_reduced(f2(), 1);
        let q = FiniteQuotient::avoiding(f2(), &c1).unwrap();
        let space = CosetSpace::build(&q.group(16).unwrap()).unwrap();
        assert_eq!(space.order, 4);
        assert_eq!(space.rank, 5);
    }

    #[test]
    fn index_formula_for_cyclic_quotients() {
        assert_eq!(z2_space().rank, 3);
        assert_eq!(z5_space().rank, 6);
    }

    #[test]
    fn generator_relations_on_random_points() {
        let space = z5_space();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let p = CosetPoint {
                q: rng.gen_range(0..space.order as u32),
                z: (0..space.rank).map(|_| rng.gen_range(-50..=50)).collect(),
            };
            for s in f2().generators() {
                let roundtrip = space.step_point(s.inverse(), &space.step_point(s, &p));
                assert_eq!(roundtrip, p);
                let other = space.step_point(s, &space.step_point(s.inverse(), &p));
                assert_eq!(other, p);
            }
        }
    }

    #[test]
    fn kernel_words_translate_by_their_rewriting() {
        let space = z2_space();
        // aa ∈ N: fixes the coset, translates by its Schreier rewriting.
        let moved = space.apply_word(&w("aa"), &space.base());
        assert_eq!(moved.q, 0);
        let rewriting = space.rewrite(&w("aa")).unwrap();
        assert_eq!(
            rewriting,
            moved.z.iter().map(|&v| v as i64).collect::<Vec<i64>>()
        );
        assert_eq!(rewriting.iter().map(|v| v.abs()).sum::<i64>(), 1);
        // The rewriting lands on the coordinate whose Schreier word is aa.
        let j = rewriting.iter().position(|&v| v != 0).unwrap();
        assert_eq!(space.schreier_words[j], w("aa"));
        // Words outside N are rejected.
        assert!(space.rewrite(&w("a")).is_err());
        // A nontrivial kernel element with cancellation: abAB ∈ N for Z/2.
        let z = space.rewrite(&w("abAB")).unwrap();
        assert!(z.iter().any(|&v| v != 0), "commutator is not in N′ here");
    }

    #[test]
    fn transversal_is_geodesic_and_consistent() {
        let space = z5_space();
        for (q, s) in space.sigma.iter().enumerate() {
            assert_eq!(space.eval_q(s), q as u32, "σ({q}) must reach coset {q}");
            assert!(s.len() <= 2, "Z/5 with images 1,2 has diameter 2");
        }
    }

    #[test]
    fn torsion_smoke_passes_on_the_ladder_spaces() {
        z2_space().torsion_smoke(2).unwrap();
        z5_space().torsion_smoke(3).unwrap();
    }

    #[test]
    fn conjugation_matrices_are_inverse_pairs() {
        // Checked inside build; spot-check a column's meaning here.
        let space = z2_space();
        let j = 1usize;
        let g = space.schreier_words[j].clone();
        let a = Word::parse(f2(), "a").unwrap();
        let conjugated = a.concat(&g).concat(&a.inverse());
        let col = space.rewrite(&conjugated).unwrap();
        for i in 0..space.rank {
            assert_eq!(space.conj[Letter::positive(0).index()][i][j], col[i]);
        }
    }

    #[test]
    fn cyclic_orders() {
        let space = z5_space();
        assert_eq!(space.order_in_q(&w("a")), 5);
        assert_eq!(space.order_in_q(&w("b")), 5);
        assert_eq!(space.order_in_q(&w("ab")), 5);
        assert_eq!(space.order_in_q(&w("aaaaa")), 1);
    }
}
