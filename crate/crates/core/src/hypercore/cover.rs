use crate::error::{Error, Result};
use crate::hypercore::KPartiteHypergraph;

/// k-partite cover of a k-graph on `0..n`: each part is a copy of the vertex
/// set, and every edge contributes all k! transversal orderings.
pub fn partite_cover(n: usize, k: usize, edges: &[Vec<usize>]) -> Result<KPartiteHypergraph> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("uniformity must be at least 2, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("vertex set is empty".into()));
    }
    let mut h = KPartiteHypergraph::new(vec![n; k])?;
    for e in edges {
        if e.len() != k {
            return Err(Error::MalformedEdge {
                edge: e.clone(),
                reason: format!("expected {k} vertices"),
            });
        }
        if let Some(&v) = e.iter().find(|&&v| v >= n) {
            return Err(Error::MalformedEdge {
                edge: e.clone(),
                reason: format!("vertex {v} out of range 0..{n}"),
            });
        }
        let mut sorted = e.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedEdge {
                edge: e.clone(),
                reason: "repeated vertex".into(),
            });
        }
        for_each_permutation(&mut sorted, &mut |p| h.set(p, true));
    }
    Ok(h)
}

/// Heap's algorithm.
fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, items: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if n <= 1 {
            f(items);
            return;
        }
        for i in 0..n - 1 {
            rec(n - 1, items, f);
            if n.is_multiple_of(2) {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
        rec(n - 1, items, f);
    }
    let n = items.len();
    rec(n, items, f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_has_six_transversals() {
        let h = partite_cover(3, 3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(h.sizes(), &[3, 3, 3]);
        assert_eq!(h.edge_count(), 6);
        assert!(h.contains(&[2, 0, 1]));
        assert!(!h.contains(&[0, 0, 1]));
    }

    #[test]
    fn empty_graph_gives_empty_cover() {
        let h = partite_cover(5, 3, &[]).unwrap();
        assert_eq!(h.sizes(), &[5, 5, 5]);
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn malformed_edges_rejected() {
        assert!(matches!(
            partite_cover(4, 3, &[vec![0, 1]]),
            Err(Error::MalformedEdge { .. })
        ));
        assert!(matches!(
            partite_cover(4, 3, &[vec![0, 1, 1]]),
            Err(Error::MalformedEdge { .. })
        ));
    }
}
