//! The sharp small-witness example: H = ⟨a, baB⟩ in the free group of rank
//! two has an exact isoperimetric upper bound of 1/2 on its coset graph,
//! attained by a two-point set and matched by the exhaustive floor.

use stallings::isoperimetry::phi_search;
use stallings::{Alphabet, SchreierView, SubgroupHandle, Word};

fn main() -> stallings::Result<()> {
    let f2 = Alphabet::new(2)?;
    let h = SubgroupHandle::from_generators(f2, &[Word::parse(f2, "a")?, Word::parse(f2, "baB")?])?;
    assert_eq!(h.rank(), 2);
    assert_eq!(h.index(), None); // infinite index
    assert!(h.contains(&Word::parse(f2, "aabaBA")?));

    // Exact isoperimetric upper bound on the coset graph of H:
    // exhaustive over connected subsets of ≤ 12 points within radius 6.
    let view = SchreierView::new(h.graph().clone());
    let bound = phi_search(&view, 12, 6, true)?;
    assert_eq!(bound.upper.to_string(), "1/2");
    assert_eq!(bound.witness.len(), 2);
    assert!(!bound.truncated);

    println!(
        "upper bound {} with witness of size {} (floor {})",
        bound.upper,
        bound.witness.len(),
        bound.searched_floor
    );
    Ok(())
}
