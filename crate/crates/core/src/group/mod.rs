//! Finite groups stored as validated Cayley tables.
//!
//! Elements are dense ids `0..order` and the identity is always id `0`.
//! Everything downstream (transversals, the choice of the marker element,
//! fresh-variable naming) derives its determinism from this id order.

mod builders;
mod io;
mod perm;
mod subgroup;

pub use builders::{cyclic, dihedral, direct_product, from_expr, quaternion8, symmetric};
pub use io::GroupFile;
pub use perm::{close_permutations, close_permutations_with_cap, compose, Permutation};
pub use subgroup::{
    canonical_transversal, coset_decomposition, is_normal, subgroup_closure, CosetDecomposition, Subgroup,
};

use thiserror::Error;

/// Default cap on group order (|S7|).
pub const DEFAULT_ORDER_CAP: usize = 5040;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("empty table")]
    Empty,
    #[error("row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry at ({row}, {col}) is {value}, out of range for order {order}")]
    IdOutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("not a Latin square: value {value} repeats at ({row}, {col})")]
    NotLatinSquare { row: usize, col: usize, value: usize },
    #[error("element 0 is not the identity: ({row}, {col}) is wrong")]
    NoIdentityAtZero { row: usize, col: usize },
    #[error("not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("generator {index} is not a permutation of 0..{degree}")]
    NotAPermutation { index: usize, degree: usize },
    #[error("group order {order} exceeds the cap {cap}")]
    GroupTooLarge { order: usize, cap: usize },
    #[error("{count} names given for a group of order {order}")]
    NamesLength { count: usize, order: usize },
    #[error("element id {id} out of range for order {order}")]
    ElementOutOfRange { id: usize, order: usize },
    #[error("{members:?} is not a subgroup")]
    NotASubgroup { members: Vec<usize> },
    #[error("bad group expression `{0}`")]
    BadExpression(String),
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    table: Vec<u32>,
    inverses: Vec<u32>,
    names: Option<Vec<String>>,
}

impl GroupTable {
    /// Validates a raw square table, `rows[i][j] = i * j`.
    ///
    /// Checks run in a fixed order (shape, range, Latin square, identity at 0,
    /// associativity) and the error names the first offending cell or triple.
    pub fn validate(rows: &[Vec<usize>]) -> Result<GroupTable, GroupError> {
        let n = rows.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::NotSquare { row, len: r.len(), expected: n });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::IdOutOfRange { row, col, value, order: n });
                }
            }
        }
        for (row, r) in rows.iter().enumerate() {
            let mut seen = vec![false; n];
            for (col, &value) in r.iter().enumerate() {
                if std::mem::replace(&mut seen[value], true) {
                    return Err(GroupError::NotLatinSquare { row, col, value });
                }
            }
        }
        for col in 0..n {
            let mut seen = vec![false; n];
            for (row, r) in rows.iter().enumerate() {
                let value = r[col];
                if std::mem::replace(&mut seen[value], true) {
                    return Err(GroupError::NotLatinSquare { row, col, value });
                }
            }
        }
        for i in 0..n {
            if rows[0][i] != i {
                return Err(GroupError::NoIdentityAtZero { row: 0, col: i });
            }
            if rows[i][0] != i {
                return Err(GroupError::NoIdentityAtZero { row: i, col: 0 });
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = rows[a][b];
                for c in 0..n {
                    if rows[ab][c] != rows[a][rows[b][c]] {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let table = rows.iter().flatten().map(|&v| v as u32).collect();
        Ok(GroupTable::from_flat_unchecked(n, table))
    }

    /// Builds a table known to satisfy the group axioms (internal constructors).
    pub(crate) fn from_flat_unchecked(order: usize, table: Vec<u32>) -> GroupTable {
        debug_assert_eq!(table.len(), order * order);
        let mut inverses = vec![0u32; order];
        for a in 0..order {
            let row = &table[a * order..(a + 1) * order];
            let b = row.iter().position(|&v| v == 0).expect("Latin row contains the identity");
            inverses[a] = b as u32;
        }
        GroupTable { order, table, inverses, names: None }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<GroupTable, GroupError> {
        if names.len() != self.order {
            return Err(GroupError::NamesLength { count: names.len(), order: self.order });
        }
        self.names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a] as usize
    }

    /// `a * b * a^-1`
    #[inline]
    pub fn conj(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.inv(a))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Display name of an element; falls back to the numeric id.
    pub fn name(&self, a: usize) -> String {
        match &self.names {
            Some(names) => names[a].clone(),
            None => a.to_string(),
        }
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn check_element(&self, id: usize) -> Result<(), GroupError> {
        if id < self.order {
            Ok(())
        } else {
            Err(GroupError::ElementOutOfRange { id, order: self.order })
        }
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.iter().map(|&v| v as usize).collect()).collect()
    }
}
