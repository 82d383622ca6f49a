//! Finite quotients of the free group that avoid a prescribed set of words:
//! a guaranteed permutation-representation construction, plus a search for
//! much smaller cyclic quotients verified by direct evaluation.

use std::collections::HashMap;

use crate::words::{Alphabet, Letter, Word};
use crate::{Error, Result};

/// A homomorphism from the free group onto a finite permutation group,
/// stored factored: generator `g` acts on factor `i` by `images[g][i]`.
/// The represented group is the diagonal image inside the product of the
/// factor symmetric groups; its kernel is the avoided words' alibi.
#[derive(Debug, Clone)]
pub struct FiniteQuotient {
    alphabet: Alphabet,
    /// Size of each factor's domain.
    pub degrees: Vec<usize>,
    /// `images[generator][factor][point]`.
    images: Vec<Vec<Vec<u16>>>,
    /// The words this quotient was built to avoid (map to non-identity).
    pub avoided: Vec<Word>,
    /// Human-readable provenance of the construction.
    pub description: String,
    /// True for the trivial quotient built from an empty avoided set; stages
    /// reject it.
    pub degenerate: bool,
}

fn identity_table(n: usize) -> Vec<u16> {
    (0..n as u16).collect()
}

fn invert_table(t: &[u16]) -> Vec<u16> {
    let mut inv = vec![0u16; t.len()];
    for (i, &j) in t.iter().enumerate() {
        inv[j as usize] = i as u16;
    }
    inv
}

impl FiniteQuotient {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// The permutation representation from the construction: one factor per
    /// avoided word `w`, on `{0,…,|w|}`, in which `w` moves `0` to `|w|`
    /// along its letters (reading the action right to left, matching word
    /// application everywhere else in this crate). The partial injections
    /// this forces are conflict-free for reduced words and are completed
    /// canonically: unmapped sources in ascending order onto unmapped
    /// targets in ascending order. Every avoided word therefore acts
    /// nontrivially on its own factor; the evaluation check is run anyway.
    pub fn avoiding(alphabet: Alphabet, c: &[Word]) -> Result<FiniteQuotient> {
        if c.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidArgument(
                "avoided set must be identity-free".into(),
            ));
        }
        let rank = alphabet.rank();
        let mut degrees = Vec::with_capacity(c.len());
        let mut images: Vec<Vec<Vec<u16>>> = vec![Vec::with_capacity(c.len()); rank];
        for w in c {
            let n = w.len() + 1;
            degrees.push(n);
            // Partial map per generator: entry source → target.
            let mut partial: Vec<HashMap<u16, u16>> = vec![HashMap::new(); rank];
            let letters = w.letters();
            let len = letters.len();
            for (j, &l) in letters.iter().enumerate() {
                // Position bookkeeping for right-to-left application: the
                // j-th letter is the (len−1−j)-th applied.
                let (src, dst) = if l.is_positive() {
                    ((len - 1 - j) as u16, (len - j) as u16)
                } else {
                    ((len - j) as u16, (len - 1 - j) as u16)
                };
                let prev = partial[l.generator() as usize].insert(src, dst);
                debug_assert!(
                    prev.is_none() || prev == Some(dst),
                    "reduced words cannot force conflicting images"
                );
            }
            for (g, part) in partial.iter().enumerate() {
                let mut table = vec![u16::MAX; n];
                let mut used = vec![false; n];
                for (&s, &d) in part {
                    table[s as usize] = d;
                    used[d as usize] = true;
                }
                let mut free_targets = (0..n as u16).filter(|&d| !used[d as usize]);
                for slot in table.iter_mut() {
                    if *slot == u16::MAX {
                        *slot = free_targets.next().expect("counting");
                    }
                }
                images[g].push(table);
            }
        }
        let q = FiniteQuotient {
            alphabet,
            degrees,
            images,
            avoided: c.to_vec(),
            description: format!("permutation representation on {} factors", c.len()),
            degenerate: c.is_empty(),
        };
        if !q.degenerate && !q.avoids(c) {
            return Err(Error::Internal(
                "avoiding construction failed its evaluation sweep".into(),
            ));
        }
        Ok(q)
    }

    /// A cyclic quotient Z/m with prescribed generator images, as a single
    /// rotation factor.
    pub fn cyclic(alphabet: Alphabet, modulus: usize, gen_images: &[usize]) -> FiniteQuotient {
        assert_eq!(gen_images.len(), alphabet.rank());
        assert!(modulus >= 1 && modulus <= u16::MAX as usize);
        let images = gen_images
            .iter()
            .map(|&x| {
                vec![(0..modulus)
                    .map(|p| ((p + x) % modulus) as u16)
                    .collect::<Vec<u16>>()]
            })
            .collect();
        FiniteQuotient {
            alphabet,
            degrees: vec![modulus],
            images,
            avoided: Vec::new(),
            description: format!("Z/{modulus} with generator images {:?}", gen_images),
            degenerate: false,
        }
    }

    /// Search small cyclic quotients (moduli `2..=max_modulus`, all image
    /// tuples with entries in `1..m`) for one that sends every word of `c`
    /// to a nonzero residue; first hit in lexicographic order wins, making
    /// the choice deterministic. Verification is by direct evaluation of
    /// each word's abelianized image.
    pub fn abelian_avoiding(
        alphabet: Alphabet,
        c: &[Word],
        max_modulus: usize,
    ) -> Option<FiniteQuotient> {
        if c.is_empty() {
            return None;
        }
        let rank = alphabet.rank();
        // Abelianized exponent vectors of the avoided words.
        let exps: Vec<Vec<i64>> = c
            .iter()
            .map(|w| {
                let mut e = vec![0i64; rank];
                for &l in w.letters() {
                    e[l.generator() as usize] += if l.is_positive() { 1 } else { -1 };
                }
                e
            })
            .collect();
        for m in 2..=max_modulus {
            let mut img = vec![1usize; rank];
            loop {
                let ok = exps.iter().all(|e| {
                    let v: i64 = e.iter().zip(&img).map(|(&a, &x)| a * x as i64).sum();
                    v.rem_euclid(m as i64) != 0
                });
                if ok {
                    let mut q = FiniteQuotient::cyclic(alphabet, m, &img);
                    q.avoided = c.to_vec();
                    debug_assert!(q.avoids(c));
                    return Some(q);
                }
                // Next image tuple in lexicographic order over [1, m)^rank.
                let mut i = rank;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    img[i] += 1;
                    if img[i] < m {
                        break;
                    }
                    img[i] = 1;
                    if i == 0 {
                        break;
                    }
                }
                if img.iter().all(|&x| x == 1) {
                    break; // wrapped all the way around
                }
            }
            // img wrapped: try next modulus.
        }
        None
    }

    /// Evaluate a word's image on one factor (right-to-left application).
    pub fn eval_factor(&self, w: &Word, factor: usize) -> Vec<u16> {
        let mut table = identity_table(self.degrees[factor]);
        for &l in w.letters().iter().rev() {
            let gen_table = &self.images[l.generator() as usize][factor];
            let step: Vec<u16> = if l.is_positive() {
                gen_table.clone()
            } else {
                invert_table(gen_table)
            };
            // Apply `step` after the partial composition so far.
            for slot in table.iter_mut() {
                *slot = step[*slot as usize];
            }
        }
        table
    }

    /// Does the word map to the identity of the quotient?
    pub fn is_identity(&self, w: &Word) -> bool {
        (0..self.degrees.len()).all(|f| {
            self.eval_factor(w, f)
                .iter()
                .enumerate()
                .all(|(i, &j)| i as u16 == j)
        })
    }

    /// True when every word of `c` maps to a non-identity permutation.
    pub fn avoids(&self, c: &[Word]) -> bool {
        c.iter().all(|w| !self.is_identity(w))
    }

    /// Materialize the image group: element list (the identity first) and
    /// left-multiplication tables for every letter, by closure under the
    /// generators. Errors when the group outgrows the budget.
    pub fn group(&self, max_order: usize) -> Result<QuotientGroup> {
        let concat = |tabs: &[Vec<u16>]| -> Vec<u16> {
            tabs.iter().flat_map(|t| t.iter().copied()).collect()
        };
        let identity: Vec<u16> = concat(
            &self
                .degrees
                .iter()
                .map(|&n| identity_table(n))
                .collect::<Vec<_>>(),
        );
        // Factor offsets into the concatenated representation.
        let mut offsets = Vec::with_capacity(self.degrees.len());
        let mut acc = 0;
        for &n in &self.degrees {
            offsets.push(acc);
            acc += n;
        }
        let rank = self.alphabet.rank();
        let gen_tables: Vec<Vec<u16>> = (0..rank).map(|g| concat(&self.images[g])).collect();
        let left_mult = |e: &[u16], g: usize| -> Vec<u16> {
            // (s ∘ e): apply e, then the generator image, factorwise.
            let mut out = vec![0u16; e.len()];
            for (f, &off) in offsets.iter().enumerate() {
                let n = self.degrees[f];
                for p in 0..n {
                    out[off + p] = gen_tables[g][off + e[off + p] as usize];
                }
            }
            out
        };

        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
        index.insert(identity, 0);
        let mut pos_next: Vec<Vec<u32>> = vec![Vec::new(); rank];
        let mut head = 0;
        while head < elements.len() {
            let e = elements[head].clone();
            for g in 0..rank {
                let f = left_mult(&e, g);
                let id = match index.get(&f) {
                    Some(&id) => id,
                    None => {
                        if elements.len() >= max_order {
                            return Err(Error::InvalidArgument(format!(
                                "quotient group exceeds the order budget {max_order}"
                            )));
                        }
                        let id = elements.len() as u32;
                        elements.push(f.clone());
                        index.insert(f, id);
                        id
                    }
                };
                pos_next[g].push(id);
            }
            head += 1;
        }
        let order = elements.len();
        // Left-multiplication table per letter; inverse letters invert the
        // generator's permutation of the element set.
        let mut left = vec![vec![0u32; order]; self.alphabet.num_letters()];
        for g in 0..rank {
            let mut inv = vec![0u32; order];
            for (q, &t) in pos_next[g].iter().enumerate() {
                inv[t as usize] = q as u32;
            }
            left[Letter::positive(g as u8).index()] = pos_next[g].clone();
            left[Letter::negative(g as u8).index()] = inv;
        }
        Ok(QuotientGroup {
            alphabet: self.alphabet,
            order,
            left,
            description: self.description.clone(),
        })
    }
}

/// The image group of a [`FiniteQuotient`], reduced to what coset-space
/// construction needs: element count and left multiplication by letters.
/// Element 0 is the identity.
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    pub alphabet: Alphabet,
    pub order: usize,
    /// `left[letter.index()][q]` = (image of letter)·q.
    pub left: Vec<Vec<u32>>,
    pub description: String,
}

impl QuotientGroup {
    /// The coset reached from the identity by a word (right-to-left).
    pub fn eval(&self, w: &Word) -> u32 {
        let mut q = 0u32;
        for &l in w.letters().iter().rev() {
            q = self.left[l.index()][q as usize];
        }
        q
    }

    /// Multiplicative order of the word's image.
    pub fn order_of(&self, w: &Word) -> usize {
        // q ↦ w·q iterated from the identity closes a cycle of length ord(w̄).
        let mut q = self.eval(w);
        let mut d = 1;
        while q != 0 {
            for &l in w.letters().iter().rev() {
                q = self.left[l.index()][q as usize];
            }
            d += 1;
            assert!(d <= self.order, "order must divide the group order");
        }
        d
    }
}
