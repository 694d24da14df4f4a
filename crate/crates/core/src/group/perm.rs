use std::collections::HashMap;

use super::{GroupError, GroupTable, DEFAULT_ORDER_CAP};

/// A permutation of `0..degree` in image form: `p[i]` is the image of `i`.
pub type Permutation = Vec<usize>;

/// `(p * q)(i) = p(q(i))`: apply `q` first.
pub fn compose(p: &[usize], q: &[usize]) -> Permutation {
    q.iter().map(|&i| p[i]).collect()
}

fn is_permutation(p: &[usize], degree: usize) -> bool {
    if p.len() != degree {
        return false;
    }
    let mut seen = vec![false; degree];
    p.iter().all(|&i| i < degree && !std::mem::replace(&mut seen[i], true))
}

/// Closes a set of permutations under composition, with the default cap.
pub fn close_permutations(degree: usize, generators: &[Permutation]) -> Result<GroupTable, GroupError> {
    close_permutations_with_cap(degree, generators, DEFAULT_ORDER_CAP)
}

/// Closes a set of permutations under composition.
///
/// Id 0 is the identity permutation. The remaining ids follow breadth-first
/// discovery (layer `k` holds the elements first reached as a product of `k`
/// generators); inside a layer elements are ordered lexicographically.
pub fn close_permutations_with_cap(
    degree: usize,
    generators: &[Permutation],
    cap: usize,
) -> Result<GroupTable, GroupError> {
    for (index, g) in generators.iter().enumerate() {
        if !is_permutation(g, degree) {
            return Err(GroupError::NotAPermutation { index, degree });
        }
    }
    let identity: Permutation = (0..degree).collect();
    let mut ids: HashMap<Permutation, usize> = HashMap::new();
    ids.insert(identity.clone(), 0);
    let mut elements = vec![identity];
    let mut layer_start = 0;
    while layer_start < elements.len() {
        let layer_end = elements.len();
        let mut next: Vec<Permutation> = Vec::new();
        for e in &elements[layer_start..layer_end] {
            for g in generators {
                let p = compose(e, g);
                if !ids.contains_key(&p) && !next.contains(&p) {
                    next.push(p);
                }
            }
        }
        next.sort();
        for p in next {
            if elements.len() >= cap {
                return Err(GroupError::GroupTooLarge { order: elements.len() + 1, cap });
            }
            ids.insert(p.clone(), elements.len());
            elements.push(p);
        }
        layer_start = layer_end;
    }
    Ok(table_from_permutations(&elements, &ids))
}

pub(crate) fn table_from_permutations(elements: &[Permutation], ids: &HashMap<Permutation, usize>) -> GroupTable {
    let n = elements.len();
    let mut table = Vec::with_capacity(n * n);
    for a in elements {
        for b in elements {
            table.push(ids[&compose(a, b)] as u32);
        }
    }
    GroupTable::from_flat_unchecked(n, table)
}
