use std::sync::Arc;

use super::{GroupError, GroupTable};

/// A subgroup of a parent table, stored as its sorted member list.
///
/// Member `members[i]` is the element with local id `i` in
/// [`Subgroup::induced_table`]; since members are sorted and contain 0, the
/// identity keeps local id 0.
#[derive(Debug, Clone)]
pub struct Subgroup {
    parent: Arc<GroupTable>,
    members: Vec<usize>,
    local: Vec<Option<usize>>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && *self.parent == *other.parent
    }
}

impl Subgroup {
    /// Checks that `members` is a subgroup of `parent`.
    pub fn from_members(
        parent: Arc<GroupTable>,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Subgroup, GroupError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            parent.check_element(m)?;
        }
        let sub = Subgroup::new_unchecked(parent, members);
        let closed = sub.members.first() == Some(&0)
            && sub.members.iter().all(|&a| {
                sub.contains(sub.parent.inv(a)) && sub.members.iter().all(|&b| sub.contains(sub.parent.mul(a, b)))
            });
        if closed {
            Ok(sub)
        } else {
            Err(GroupError::NotASubgroup { members: sub.members })
        }
    }

    fn new_unchecked(parent: Arc<GroupTable>, members: Vec<usize>) -> Subgroup {
        let mut local = vec![None; parent.order()];
        for (i, &m) in members.iter().enumerate() {
            local[m] = Some(i);
        }
        Subgroup { parent, members, local }
    }

    pub fn parent(&self) -> &Arc<GroupTable> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.local.get(g).is_some_and(|l| l.is_some())
    }

    /// Local id of a parent element, if it lies in the subgroup.
    pub fn local_id(&self, g: usize) -> Option<usize> {
        self.local.get(g).copied().flatten()
    }

    /// Parent id of a local id.
    pub fn parent_id(&self, local: usize) -> usize {
        self.members[local]
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    /// The subgroup as a group in its own right, on local ids.
    pub fn induced_table(&self) -> GroupTable {
        let n = self.members.len();
        let mut table = Vec::with_capacity(n * n);
        for &a in &self.members {
            for &b in &self.members {
                table.push(self.local[self.parent.mul(a, b)].expect("closed") as u32);
            }
        }
        let t = GroupTable::from_flat_unchecked(n, table);
        match self.parent.names() {
            Some(names) => {
                t.with_names(self.members.iter().map(|&m| names[m].clone()).collect()).expect("one name per member")
            }
            None => t,
        }
    }
}

/// Smallest subgroup containing `gens`.
pub fn subgroup_closure(group: &Arc<GroupTable>, gens: &[usize]) -> Subgroup {
    let mut inside = vec![false; group.order()];
    inside[0] = true;
    let mut members = vec![0];
    let mut frontier = vec![0];
    while let Some(a) = frontier.pop() {
        for &g in gens {
            let p = group.mul(a, g);
            if !inside[p] {
                inside[p] = true;
                members.push(p);
                frontier.push(p);
            }
        }
    }
    // Right multiplication by generators reaches every element of a finite
    // subgroup, since inverses are positive powers.
    members.sort_unstable();
    Subgroup::new_unchecked(group.clone(), members)
}

/// `true` iff `g S g^-1 = S` for every `g` in the parent.
pub fn is_normal(sub: &Subgroup) -> bool {
    let g = sub.parent();
    g.elements().all(|x| sub.members().iter().all(|&h| sub.contains(g.conj(x, h))))
}

/// Right cosets `H g` of a subgroup.
#[derive(Debug, Clone)]
pub struct CosetDecomposition {
    subgroup: Subgroup,
    cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
}

impl CosetDecomposition {
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn cosets(&self) -> &[Vec<usize>] {
        &self.cosets
    }

    /// Number of cosets.
    pub fn index(&self) -> usize {
        self.cosets.len()
    }

    /// Index of the coset containing `g`.
    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }
}

/// Right cosets ordered by their minimum element, so coset 0 is the subgroup.
pub fn coset_decomposition(sub: &Subgroup) -> CosetDecomposition {
    let g = sub.parent();
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut cosets = Vec::new();
    for x in g.elements() {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let mut coset: Vec<usize> = sub.members().iter().map(|&h| g.mul(h, x)).collect();
        coset.sort_unstable();
        for &y in &coset {
            coset_of[y] = cosets.len();
        }
        cosets.push(coset);
    }
    CosetDecomposition { subgroup: sub.clone(), cosets, coset_of }
}

/// The minimum element of each coset; the first is always the identity.
pub fn canonical_transversal(dec: &CosetDecomposition) -> Vec<usize> {
    dec.cosets.iter().map(|c| c[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic, dihedral, quaternion8};

    #[test]
    fn closure_examples() {
        let c4 = Arc::new(cyclic(4).unwrap());
        assert_eq!(subgroup_closure(&c4, &[2]).members(), &[0, 2]);
        let s3 = Arc::new(dihedral(3).unwrap());
        assert_eq!(subgroup_closure(&s3, &[]).members(), &[0]);
        assert_eq!(subgroup_closure(&s3, &[1]).members(), &[0, 1, 2]);
    }

    #[test]
    fn normality() {
        let s3 = Arc::new(dihedral(3).unwrap());
        assert!(is_normal(&subgroup_closure(&s3, &[1])));
        assert!(!is_normal(&subgroup_closure(&s3, &[3])));
        assert!(is_normal(&subgroup_closure(&s3, &[])));
    }

    #[test]
    fn cosets_and_transversals() {
        let c4 = Arc::new(cyclic(4).unwrap());
        let dec = coset_decomposition(&subgroup_closure(&c4, &[2]));
        assert_eq!(dec.index(), 2);
        assert_eq!(canonical_transversal(&dec), vec![0, 1]);

        let q8 = Arc::new(quaternion8().unwrap());
        let center = Subgroup::from_members(q8.clone(), [0, 1]).unwrap();
        assert_eq!(coset_decomposition(&center).index(), 4);

        let s3 = Arc::new(dihedral(3).unwrap());
        let a3 = subgroup_closure(&s3, &[1]);
        assert_eq!(canonical_transversal(&coset_decomposition(&a3)), vec![0, 3]);
        let whole = subgroup_closure(&s3, &[1, 3]);
        let dec = coset_decomposition(&whole);
        assert_eq!(dec.index(), 1);
        assert_eq!(canonical_transversal(&dec), vec![0]);
    }

    #[test]
    fn from_members_rejects_non_subgroups() {
        let s3 = Arc::new(dihedral(3).unwrap());
        assert!(Subgroup::from_members(s3.clone(), [0, 1]).is_err());
        assert!(Subgroup::from_members(s3.clone(), [1, 2]).is_err());
        assert!(Subgroup::from_members(s3.clone(), [0, 9]).is_err());
        let a3 = Subgroup::from_members(s3, [2, 1, 0, 1]).unwrap();
        assert_eq!(a3.members(), &[0, 1, 2]);
        assert_eq!(a3.induced_table().order(), 3);
    }
}
