use super::RealMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortKey {
    /// Largest value first.
    Descending,
    /// Entries flagged `true` first; relative order otherwise kept.
    ConvergedFirst,
}

/// Stable permutation `perm` such that `values[perm[0]], values[perm[1]], ...`
/// is ordered by `key`.
pub fn sort_permutation(values: &[f64], key: SortKey, flags: Option<&[bool]>) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    match key {
        SortKey::Descending => perm.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
        SortKey::ConvergedFirst => {
            let flags = flags.expect("converged-first sort needs flags");
            assert_eq!(flags.len(), values.len());
            perm.sort_by_key(|&i| !flags[i]);
        }
    }
    perm
}

/// Reorders `items` so that `items[i]` becomes the old `items[perm[i]]`.
pub fn permute<T: Clone>(items: &mut [T], perm: &[usize]) {
    assert_eq!(items.len(), perm.len());
    let old = items.to_vec();
    for (slot, &p) in items.iter_mut().zip(perm) {
        *slot = old[p].clone();
    }
}

/// Sorts eigenvalues and the matching columns of `z` in place; returns the
/// applied permutation so callers can reorder companion arrays.
pub fn sort_eigenpairs(
    values: &mut [f64],
    z: &mut RealMatrix,
    key: SortKey,
    flags: Option<&[bool]>,
) -> Vec<usize> {
    assert_eq!(z.cols(), values.len());
    let perm = sort_permutation(values, key, flags);
    permute(values, &perm);
    let old = z.clone();
    for r in 0..z.rows() {
        for (c, &p) in perm.iter().enumerate() {
            z[(r, c)] = old[(r, p)];
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descending() {
        let mut values = vec![1.0, 3.0, 2.0];
        let mut z = RealMatrix::identity(3);
        let perm = sort_eigenpairs(&mut values, &mut z, SortKey::Descending, None);
        assert_eq!(values, vec![3.0, 2.0, 1.0]);
        assert_eq!(perm, vec![1, 2, 0]);
        // column c of z is e_{perm[c]}
        for (c, &p) in perm.iter().enumerate() {
            assert_eq!(z[(p, c)], 1.0);
        }
    }

    #[test]
    fn converged_first_keeps_relative_order() {
        let mut values = vec![5.0, 4.0, 3.0];
        let mut z = RealMatrix::identity(3);
        let flags = [false, true, false];
        sort_eigenpairs(&mut values, &mut z, SortKey::ConvergedFirst, Some(&flags));
        assert_eq!(values, vec![4.0, 5.0, 3.0]);
    }

    #[test]
    fn ties_are_stable() {
        let values = vec![2.0, 1.0, 2.0, 1.0];
        assert_eq!(sort_permutation(&values, SortKey::Descending, None), vec![0, 2, 1, 3]);
    }

    #[test]
    fn sorting_is_idempotent() {
        let mut values = vec![0.3, -1.0, 0.3, 7.0, 2.0];
        let mut z = RealMatrix::identity(5);
        sort_eigenpairs(&mut values, &mut z, SortKey::Descending, None);
        let (v1, z1) = (values.clone(), z.clone());
        let perm = sort_eigenpairs(&mut values, &mut z, SortKey::Descending, None);
        assert_eq!(perm, (0..5).collect::<Vec<_>>());
        assert_eq!((values, z), (v1, z1));
    }
}
