//! Explicit families of sets and the operations the exact domain needs:
//! reduction to maximal sets, maximal union, and maximal pairwise union
//! ("dot product").
//!
//! Persistence only depends on the *largest possible* conflict sets, so a
//! family can always be thinned to its maximal elements (an antichain)
//! without changing any verdict.  The operations here keep that invariant
//! when their inputs have it.  This representation enumerates sets
//! explicitly — exponential in the worst case — and serves as the readable
//! reference implementation; the decision-diagram engine in [`crate::zdd`]
//! computes the same functions on a shared representation.

use std::collections::BTreeSet;

/// A family of sets over element type `T`.
pub type Family<T> = BTreeSet<BTreeSet<T>>;

/// Build a family from anything iterable, e.g. `family([vec![1, 2], vec![2]])`.
pub fn family<T, I, S>(sets: I) -> Family<T>
where
    T: Ord,
    I: IntoIterator<Item = S>,
    S: IntoIterator<Item = T>,
{
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// The subfamily of maximal sets: drop every set that is a strict subset of
/// another member.
pub fn max_set<T: Ord + Clone>(f: &Family<T>) -> Family<T> {
    f.iter()
        .filter(|s| !f.iter().any(|t| *s != t && s.is_subset(t)))
        .cloned()
        .collect()
}

/// Union of two families, thinned to maximal sets.
pub fn max_union<T: Ord + Clone>(a: &Family<T>, b: &Family<T>) -> Family<T> {
    max_set(&a.union(b).cloned().collect())
}

/// All pairwise unions of a set from `a` with a set from `b`, thinned to
/// maximal sets.  Empty if either family is empty.
pub fn max_dot_product<T: Ord + Clone>(a: &Family<T>, b: &Family<T>) -> Family<T> {
    let mut products = Family::new();
    for s in a {
        for t in b {
            products.insert(s.union(t).cloned().collect());
        }
    }
    max_set(&products)
}

/// Extend every member set by one element, without thinning (distinct sets
/// may collapse when they only differed in `x`).  Thinned afterwards this
/// equals a dot product with the singleton family `{{x}}`.
pub fn add_to_all<T: Ord + Clone>(f: &Family<T>, x: &T) -> Family<T> {
    f.iter()
        .map(|s| {
            let mut s = s.clone();
            s.insert(x.clone());
            s
        })
        .collect()
}

/// Size of the largest member set; 0 for the empty family.
pub fn max_cardinality<T>(f: &Family<T>) -> usize {
    f.iter().map(|s| s.len()).max().unwrap_or(0)
}

/// Is some member set larger than `bound`?
pub fn exceeds<T>(f: &Family<T>, bound: usize) -> bool {
    max_cardinality(f) > bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_set_keeps_only_maximal_members() {
        let f = family([vec![1], vec![1, 2], vec![1, 3], vec![1, 2, 3], vec![4]]);
        assert_eq!(max_set(&f), family([vec![1, 2, 3], vec![4]]));
        // Idempotent and preserves incomparable sets.
        assert_eq!(max_set(&max_set(&f)), max_set(&f));
        let antichain = family([vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(max_set(&antichain), antichain);
    }

    #[test]
    fn empty_set_handling() {
        // {} ∈ F is dominated by any nonempty member but survives alone.
        let lone: Family<u32> = family([Vec::<u32>::new()]);
        assert_eq!(max_set(&lone), lone);
        assert_eq!(max_cardinality(&lone), 0);
        let mixed = family([vec![], vec![7]]);
        assert_eq!(max_set(&mixed), family([vec![7]]));
        assert_eq!(max_cardinality(&Family::<u32>::new()), 0);
    }

    #[test]
    fn max_union_commutes_and_thins() {
        let a = family([vec![1], vec![2, 3]]);
        let b = family([vec![1, 2], vec![3]]);
        let u = max_union(&a, &b);
        assert_eq!(u, family([vec![1, 2], vec![2, 3]]));
        assert_eq!(u, max_union(&b, &a));
        // Neutral element: the empty family.
        assert_eq!(max_union(&a, &Family::new()), max_set(&a));
    }

    #[test]
    fn dot_product_takes_pairwise_unions() {
        let a = family([vec![1], vec![2]]);
        let b = family([vec![2], vec![3]]);
        assert_eq!(
            max_dot_product(&a, &b),
            family([vec![1, 2], vec![1, 3], vec![2, 3]]),
        );
        // {1,2} absorbs the {2}∪{2} = {2} product.
        assert!(exceeds(&max_dot_product(&a, &b), 1));
        assert!(!exceeds(&max_dot_product(&a, &b), 2));
        // Annihilator: the empty family.
        assert_eq!(max_dot_product(&a, &Family::new()), Family::new());
        // Neutral element: {∅}.
        assert_eq!(max_dot_product(&a, &family([Vec::<u32>::new()])), max_set(&a));
    }

    #[test]
    fn add_to_all_extends_without_thinning() {
        let f = family([vec![1], vec![2, 3], vec![1, 3]]);
        assert_eq!(add_to_all(&f, &3), family([vec![1, 3], vec![2, 3]]));
        assert_eq!(max_set(&add_to_all(&f, &3)), max_dot_product(&f, &family([vec![3]])));
        // Unthinned: {1,2} ∪ {3} is kept alongside its superset.
        let g = family([vec![1, 2], vec![1, 2, 3]]);
        assert_eq!(add_to_all(&g, &3), family([vec![1, 2, 3]]));
        let h = family([vec![1], vec![2]]);
        assert_eq!(add_to_all(&h, &2), family([vec![1, 2], vec![2]]));
    }
}
