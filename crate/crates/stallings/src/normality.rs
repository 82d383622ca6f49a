//! Weak normality machinery over free groups: witness sweeps, the monotone
//! subgroup-growing step, iterated closures, and n-degree certification.
//!
//! A *witness* for `H` under a predicate ℒ is an element `g` with
//! `gHg⁻¹ ∩ H ∈ ℒ`; `H` is q-normal-like when the witnesses generate the
//! ambient group. All searches here are radius-bounded, and certificates are
//! deliberately one-sided: `Certified` means the ball search proved the
//! property, `Unknown` means it did not decide — absence of small witnesses
//! proves nothing, so there is no refuting verdict.

use std::collections::{HashMap, HashSet};

use num::Signed;

use crate::isoperimetry::Ratio;
use crate::schreier::{SchreierView, VertexRef};
use crate::subgroups::SubgroupHandle;
use crate::words::{enumerate_reduced, Word};
use crate::{Error, Result};

/// An upward-closed collection of subgroups, decided (or heuristically
/// over-approximated) on concrete handles.
#[derive(Debug, Clone)]
pub enum LPredicate {
    /// Infinite subgroups: rank ≥ 1 (nontrivial subgroups of free groups are
    /// infinite).
    Infinite,
    /// Nonamenable subgroups: rank ≥ 2 (contains a free group of rank 2).
    Nonamenable,
    /// Subgroups acting nonamenably on the vertices of `x`'s completion.
    /// Heuristic one-sided test: rank ≥ 2 **and** no strictly
    /// (S_H, ε)-invariant set shows up among orbit-ball prefixes within the
    /// budget, where S_H is a free basis of the subgroup. Certificates carry
    /// a flag marking this predicate as heuristic.
    NonamenableOnX {
        x: SchreierView,
        max_size: usize,
        radius: usize,
        eps: Ratio,
    },
}

impl LPredicate {
    pub fn holds(&self, h: &SubgroupHandle) -> bool {
        match self {
            LPredicate::Infinite => h.rank() >= 1,
            LPredicate::Nonamenable => h.rank() >= 2,
            LPredicate::NonamenableOnX {
                x,
                max_size,
                radius,
                eps,
            } => {
                h.rank() >= 2
                    && !has_small_invariant_set(x, &h.generators(), *max_size, *radius, eps)
            }
        }
    }

    /// True when a positive answer rests on a budgeted search rather than an
    /// exact rank computation.
    pub fn is_heuristic(&self) -> bool {
        matches!(self, LPredicate::NonamenableOnX { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            LPredicate::Infinite => "infinite (rank ≥ 1)".into(),
            LPredicate::Nonamenable => "nonamenable (rank ≥ 2)".into(),
            LPredicate::NonamenableOnX { max_size, radius, eps, .. } => format!(
                "nonamenable on X (heuristic: rank ≥ 2, no ({eps})-invariant set ≤ {max_size} points in radius {radius})"
            ),
        }
    }
}

/// Does the subgroup generated by `words`, acting on the completion `x`
/// through its own free basis, admit a strictly ε-invariant set among the
/// BFS-ball prefixes of the basepoint orbit? One direction per basis word.
fn has_small_invariant_set(
    x: &SchreierView,
    words: &[Word],
    max_size: usize,
    radius: usize,
    eps: &Ratio,
) -> bool {
    if words.is_empty() {
        return true; // the trivial group acts amenably; singletons are invariant
    }
    assert!(eps.is_positive(), "ε must be positive");
    // BFS over the basepoint orbit under the words and their inverses.
    let inverses: Vec<Word> = words.iter().map(Word::inverse).collect();
    let mut order: Vec<VertexRef> = vec![x.base()];
    let mut seen: HashSet<VertexRef> = order.iter().cloned().collect();
    let mut depth = vec![0usize];
    let mut head = 0;
    while head < order.len() {
        if depth[head] == radius {
            break;
        }
        let p = order[head].clone();
        let d = depth[head];
        head += 1;
        for w in words.iter().chain(inverses.iter()) {
            let q = x.act(w, &p);
            if seen.insert(q.clone()) {
                order.push(q);
                depth.push(d + 1);
            }
        }
    }
    let mut members: HashSet<&VertexRef> = HashSet::new();
    for m in 1..=max_size.min(order.len()) {
        members.insert(&order[m - 1]);
        let total: usize = words
            .iter()
            .map(|w| {
                order[..m]
                    .iter()
                    .filter(|p| !members.contains(&x.act(w, p)))
                    .count()
            })
            .sum();
        if Ratio::new(total.into(), m.into()) < *eps {
            return true;
        }
    }
    false
}

/// All reduced words of length ≤ `radius` whose conjugation intersection
/// `gHg⁻¹ ∩ H` satisfies the predicate, each with the intersection handle.
/// Elements of `H` (the empty word included) appear whenever `H` itself
/// satisfies the predicate, since they intersect to `H`.
///
/// Witness symmetry — `g` qualifies iff `g⁻¹` does, with intersections of
/// equal rank — is asserted across the sweep.
pub fn witnesses(
    h: &SubgroupHandle,
    pred: &LPredicate,
    radius: usize,
) -> Result<Vec<(Word, SubgroupHandle)>> {
    if radius == 0 {
        return Err(Error::InvalidArgument(
            "witness sweeps need radius ≥ 1".into(),
        ));
    }
    let mut out = Vec::new();
    let mut ranks: HashMap<Word, usize> = HashMap::new();
    for g in enumerate_reduced(h.alphabet(), radius) {
        let meet = h.conjugate(&g)?.intersect(h)?;
        ranks.insert(g.clone(), meet.rank());
        if pred.holds(&meet) {
            out.push((g, meet));
        }
    }
    for (g, rank) in &ranks {
        assert_eq!(
            ranks.get(&g.inverse()),
            Some(rank),
            "witness symmetry failed at {g}"
        );
    }
    Ok(out)
}

/// One monotone growing step: the subgroup generated by `K` together with
/// all its ball witnesses that lie in the ambient subgroup. Always contains
/// `K`; monotone in `K`.
pub fn f_step(
    k: &SubgroupHandle,
    ambient_gens: &[Word],
    pred: &LPredicate,
    radius: usize,
) -> Result<SubgroupHandle> {
    let ambient = SubgroupHandle::from_generators(k.alphabet(), ambient_gens)?;
    let mut gens = k.generators();
    for (g, _) in witnesses(k, pred, radius)? {
        if ambient.contains(&g) {
            gens.push(g);
        }
    }
    let grown = SubgroupHandle::from_generators(k.alphabet(), &gens)?;
    debug_assert!(k.generators().iter().all(|g| grown.contains(g)));
    Ok(grown)
}

/// Iterate [`f_step`] inside the full free group until stabilization or the
/// iteration budget runs out. Returns the last subgroup and whether it is a
/// ball-certified fixed point. The true closure always contains the result.
pub fn wq_closure(
    h: &SubgroupHandle,
    pred: &LPredicate,
    radius: usize,
    max_iter: usize,
) -> Result<(SubgroupHandle, bool)> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("closure needs max_iter ≥ 1".into()));
    }
    let ambient: Vec<Word> = h
        .alphabet()
        .generators()
        .map(|s| Word::reduce([s]))
        .collect();
    let mut cur = h.clone();
    for _ in 0..max_iter {
        let next = f_step(&cur, &ambient, pred, radius)?;
        if next == cur {
            return Ok((cur, true));
        }
        cur = next;
    }
    Ok((cur, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Unknown,
}

/// Outcome of [`degree_certify`]: the searched data and a one-sided verdict.
#[derive(Debug, Clone)]
pub struct NormalityCertificate {
    pub subject: SubgroupHandle,
    /// Generators of the ambient group the chain must reach.
    pub ambient: Vec<Word>,
    pub degree: usize,
    pub predicate: String,
    /// Witnesses adjoined along the successful iteration, with the rank of
    /// their conjugation intersection.
    pub witnesses: Vec<(Word, usize)>,
    /// The iterated subgroups H = K₀ ⊆ K₁ ⊆ … as far as computed.
    pub chain: Vec<SubgroupHandle>,
    pub radius: usize,
    pub verdict: Verdict,
    /// True when the base predicate is a budgeted heuristic rather than an
    /// exact rank test.
    pub heuristic: bool,
}

/// Certify `n`-degree weak normality of `H` in the full free group on its
/// alphabet, over the base predicate.
///
/// Degree 0 asks whether `H` itself satisfies the predicate. Degree `n ≥ 1`
/// runs the closure iteration in which a conjugator `g` counts as a witness
/// precisely when `gHg⁻¹ ∩ H` is certified at degree `n − 1` (at degree 1
/// that is the base predicate itself); `Certified` requires the chain to
/// reach the ambient group, verified by membership of its generators. There
/// is no refuting verdict: `Unknown` only means the radius-bounded search
/// did not decide.
pub fn degree_certify(
    h: &SubgroupHandle,
    n: usize,
    pred_base: &LPredicate,
    radius: usize,
) -> Result<NormalityCertificate> {
    let ambient: Vec<Word> = h
        .alphabet()
        .generators()
        .map(|s| Word::reduce([s]))
        .collect();
    let mut cert = NormalityCertificate {
        subject: h.clone(),
        ambient: ambient.clone(),
        degree: n,
        predicate: pred_base.describe(),
        witnesses: Vec::new(),
        chain: vec![h.clone()],
        radius,
        verdict: Verdict::Unknown,
        heuristic: pred_base.is_heuristic(),
    };
    if n == 0 {
        if pred_base.holds(h) {
            cert.verdict = Verdict::Certified;
        }
        return Ok(cert);
    }

    // Level-(n−1) acceptance for a conjugation intersection.
    let level_ok = |meet: &SubgroupHandle| -> Result<bool> {
        if n == 1 {
            Ok(pred_base.holds(meet))
        } else {
            Ok(degree_certify(meet, n - 1, pred_base, radius)?.verdict == Verdict::Certified)
        }
    };

    let max_iter = 16;
    let mut cur = h.clone();
    // A subject that already is the ambient group is certified by the
    // length-zero chain; the closure loop below would otherwise stop at its
    // immediate fixed point without reaching the ambient check.
    if cur.index() == Some(1) && ambient.iter().all(|g| cur.contains(g)) {
        cert.verdict = Verdict::Certified;
        return Ok(cert);
    }
    for _ in 0..max_iter {
        let mut gens = cur.generators();
        let mut grew_from: Vec<(Word, usize)> = Vec::new();
        for g in enumerate_reduced(h.alphabet(), radius) {
            let meet = cur.conjugate(&g)?.intersect(&cur)?;
            if level_ok(&meet)? {
                grew_from.push((g.clone(), meet.rank()));
                gens.push(g);
            }
        }
        let next = SubgroupHandle::from_generators(h.alphabet(), &gens)?;
        if next == cur {
            break;
        }
        for w in grew_from {
            if !cert.witnesses.contains(&w) {
                cert.witnesses.push(w);
            }
        }
        cert.chain.push(next.clone());
        cur = next;
        if ambient.iter().all(|g| cur.contains(g)) && cur.index() == Some(1) {
            cert.verdict = Verdict::Certified;
            break;
        }
    }
    if cert.verdict == Verdict::Certified {
        assert!(
            cert.ambient
                .iter()
                .all(|g| cert.chain.last().unwrap().contains(g)),
            "certified chain must reach the ambient group"
        );
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(f2(), s).unwrap()
    }

    fn handle(gens: &[&str]) -> SubgroupHandle {
        let gens: Vec<Word> = gens.iter().map(|g| w(g)).collect();
        SubgroupHandle::from_generators(f2(), &gens).unwrap()
    }

    fn sharp() -> SubgroupHandle {
        handle(&["a", "baB"])
    }

    fn index_two() -> SubgroupHandle {
        handle(&["aa", "ab", "aB"])
    }

    #[test]
    fn sharp_example_infinite_witnesses_at_radius_one() {
        let found = witnesses(&sharp(), &LPredicate::Infinite, 1).unwrap();
        let words: Vec<String> = found.iter().map(|(g, _)| g.to_string()).collect();
        assert!(words.contains(&"a".to_string()));
        assert!(words.contains(&"b".to_string()));
        // b's intersection is the cyclic ⟨bab⁻¹⟩.
        let (_, meet) = found
            .iter()
            .find(|(g, _)| g == &w("b"))
            .expect("b is a witness");
        assert_eq!(meet.rank(), 1);
        assert!(meet.contains(&w("baB")));
    }

    #[test]
    fn sharp_example_nonamenable_witnesses_stay_inside() {
        let h = sharp();
        let found = witnesses(&h, &LPredicate::Nonamenable, 3).unwrap();
        assert!(!found.is_empty());
        for (g, meet) in found {
            assert!(h.contains(&g), "witness {g} outside H");
            assert_eq!(meet, h, "proper conjugates must intersect cyclically");
        }
    }

    #[test]
    fn finite_index_everything_is_a_witness() {
        let k = index_two();
        let found = witnesses(&k, &LPredicate::Nonamenable, 2).unwrap();
        let expected = crate::words::enumerate_reduced(f2(), 2).len();
        assert_eq!(found.len(), expected);
    }

    #[test]
    fn f_step_examples() {
        let full = handle(&["a", "b"]);
        let ambient: Vec<Word> = vec![w("a"), w("b")];
        // Fixed point at the ambient group.
        assert_eq!(
            f_step(&full, &ambient, &LPredicate::Infinite, 1).unwrap(),
            full
        );
        // The sharp example under Infinite grows to F₂ in one step.
        assert_eq!(
            f_step(&sharp(), &ambient, &LPredicate::Infinite, 1).unwrap(),
            full
        );
        // Under Nonamenable it does not grow at all.
        assert_eq!(
            f_step(&sharp(), &ambient, &LPredicate::Nonamenable, 4).unwrap(),
            sharp()
        );
    }

    #[test]
    fn closure_examples() {
        let full = handle(&["a", "b"]);
        let (c, fixed) = wq_closure(&index_two(), &LPredicate::Nonamenable, 1, 4).unwrap();
        assert_eq!(c, full);
        assert!(fixed);
        let (c, fixed) = wq_closure(&sharp(), &LPredicate::Nonamenable, 4, 4).unwrap();
        assert_eq!(c, sharp());
        assert!(fixed);
        let (c, fixed) = wq_closure(&sharp(), &LPredicate::Infinite, 1, 4).unwrap();
        assert_eq!(c, full);
        assert!(fixed);
    }

    #[test]
    fn degree_certification() {
        // Degree 0: the predicate itself.
        let c = degree_certify(&sharp(), 0, &LPredicate::Nonamenable, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        let triv = handle(&[]);
        let c = degree_certify(&triv, 0, &LPredicate::Infinite, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);

        // Finite index: certified at degree 1 with a short chain.
        let c = degree_certify(&index_two(), 1, &LPredicate::Nonamenable, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.chain.len(), 2);
        assert!(!c.heuristic);

        // The ambient group itself: certified by the length-zero chain.
        let c = degree_certify(&handle(&["a", "b"]), 1, &LPredicate::Nonamenable, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.chain.len(), 1);
        assert!(c.witnesses.is_empty());

        // The sharp example: q-normal (degree 1, Infinite)…
        let c = degree_certify(&sharp(), 1, &LPredicate::Infinite, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        // …but not decidably wq*-normal (degree 1, Nonamenable): Unknown.
        let c = degree_certify(&sharp(), 1, &LPredicate::Nonamenable, 3).unwrap();
        assert_eq!(c.verdict, Verdict::Unknown);
        assert_eq!(c.chain.last().unwrap(), &sharp());
    }

    #[test]
    fn witness_upward_closure_on_nested_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut tested = 0;
        while tested < 12 {
            let len = |rng: &mut ChaCha8Rng| rng.gen_range(1..=4);
            let rand_word = |rng: &mut ChaCha8Rng| {
                let l = len(rng);
                Word::reduce((0..l).map(|_| crate::words::Letter::from_index(rng.gen_range(0..4))))
            };
            let g1 = rand_word(&mut rng);
            let g2 = rand_word(&mut rng);
            let extra = rand_word(&mut rng);
            let h = SubgroupHandle::from_generators(f2(), &[g1.clone(), g2.clone()]).unwrap();
            let k = SubgroupHandle::from_generators(f2(), &[g1, g2, extra]).unwrap();
            if h == k || h.is_trivial() {
                continue;
            }
            tested += 1;
            // Membership check of the inclusion H ⊆ K.
            for g in h.generators() {
                assert!(k.contains(&g));
            }
            for (g, _) in witnesses(&h, &LPredicate::Infinite, 2).unwrap() {
                let meet = k.conjugate(&g).unwrap().intersect(&k).unwrap();
                assert!(
                    LPredicate::Infinite.holds(&meet),
                    "witness {g} lost going up"
                );
            }
        }
    }

    #[test]
    fn f_step_is_monotone_on_nested_pairs() {
        let ambient: Vec<Word> = vec![w("a"), w("b")];
        for (small, big) in [
            (vec!["aa"], vec!["aa", "bb"]),
            (vec!["a"], vec!["a", "bab"]),
            (vec!["ab"], vec!["ab", "ba"]),
        ] {
            let h = handle(&small);
            let k = handle(&big);
            let fh = f_step(&h, &ambient, &LPredicate::Infinite, 2).unwrap();
            let fk = f_step(&k, &ambient, &LPredicate::Infinite, 2).unwrap();
            for g in fh.generators() {
                assert!(fk.contains(&g), "{small:?} ⊆ {big:?} broke monotonicity");
            }
        }
    }

    #[test]
    fn nonamenable_on_x_heuristic() {
        let x = SchreierView::new(handle(&[]).graph().clone());
        let pred = LPredicate::NonamenableOnX {
            x,
            max_size: 8,
            radius: 2,
            eps: Ratio::new(1.into(), 3.into()),
        };
        assert!(pred.is_heuristic());
        // A rank-2 subgroup acting freely on the F₂ Cayley graph: no small
        // invariant sets.
        assert!(pred.holds(&sharp()));
        // Rank 1 fails outright.
        assert!(!pred.holds(&handle(&["a"])));
    }
}
