//! Extension data of a finite group over a normal subgroup.
//!
//! With a transversal `t_0 = 1, t_1, ..., t_{m-1}` of the right cosets of `H`,
//! every product of representatives splits as `t_i t_j = c(i,j) t_{k(i,j)}`
//! with `c(i,j)` in `H`, and `sigma_i(h) = t_i h t_i^-1` acts on `H`.
//!
//! Coset indices are 0-based in memory (coset 0 is `H`, `t_0` the identity).
//! The JSON form and the report counterexamples use 1-based indices, so the
//! identity representative is `t_1` there.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::group::{canonical_transversal, coset_decomposition, is_normal, GroupTable, Subgroup};
use crate::report::{Step, VerificationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("subgroup is trivial")]
    TrivialH,
    #[error("subgroup has index 1; the group interprets itself trivially")]
    TrivialIndex,
    #[error("malformed extension data: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone)]
pub struct ExtensionData {
    group: Arc<GroupTable>,
    subgroup: Subgroup,
    h_table: Arc<GroupTable>,
    transversal: Vec<usize>,
    coset_of: Vec<usize>,
    /// parent ids of elements of `H`
    c: Vec<Vec<usize>>,
    k: Vec<Vec<usize>>,
    /// permutations of local ids of `H`
    sigma: Vec<Vec<usize>>,
}

/// Serialized form: `k` is 1-based, `c` and `transversal` are parent ids,
/// `sigma[i]` maps local ids of `H` (positions in `subgroup`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionJson {
    pub m: usize,
    pub subgroup: Vec<usize>,
    pub transversal: Vec<usize>,
    pub c: Vec<Vec<usize>>,
    pub k: Vec<Vec<usize>>,
    pub sigma: Vec<Vec<usize>>,
}

/// Computes the extension data for the canonical transversal.
pub fn extension_data(h: &Subgroup) -> Result<ExtensionData, ExtensionError> {
    if !is_normal(h) {
        return Err(ExtensionError::NotNormal);
    }
    if h.is_trivial() {
        return Err(ExtensionError::TrivialH);
    }
    let dec = coset_decomposition(h);
    if dec.index() == 1 {
        return Err(ExtensionError::TrivialIndex);
    }
    let g = h.parent().clone();
    let t = canonical_transversal(&dec);
    let m = t.len();
    let mut c = vec![vec![0; m]; m];
    let mut k = vec![vec![0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let p = g.mul(t[i], t[j]);
            let q = dec.coset_of(p);
            k[i][j] = q;
            c[i][j] = g.mul(p, g.inv(t[q]));
        }
    }
    let sigma = t
        .iter()
        .map(|&ti| h.members().iter().map(|&x| h.local_id(g.conj(ti, x)).expect("normal subgroup")).collect())
        .collect();
    ExtensionData::from_parts(h.clone(), t, c, k, sigma)
}

impl ExtensionData {
    /// Assembles extension data from explicit parts, checking only shape:
    /// the transversal meets every coset once starting from the identity,
    /// `c` lies in `H`, `k` is in range and each `sigma_i` is a permutation.
    /// The algebraic identities are left to [`verify_extension_identities`].
    pub fn from_parts(
        subgroup: Subgroup,
        transversal: Vec<usize>,
        c: Vec<Vec<usize>>,
        k: Vec<Vec<usize>>,
        sigma: Vec<Vec<usize>>,
    ) -> Result<ExtensionData, ExtensionError> {
        let bad = |msg: String| Err(ExtensionError::Malformed(msg));
        let group = subgroup.parent().clone();
        let m = transversal.len();
        if m == 0 || transversal[0] != 0 {
            return bad("transversal must start with the identity".into());
        }
        if m * subgroup.order() != group.order() {
            return bad(format!("{m} representatives for index {}", group.order() / subgroup.order()));
        }
        let mut coset_of = vec![usize::MAX; group.order()];
        for (i, &t) in transversal.iter().enumerate() {
            if group.check_element(t).is_err() {
                return bad(format!("representative {t} out of range"));
            }
            for &h in subgroup.members() {
                let x = group.mul(h, t);
                if coset_of[x] != usize::MAX {
                    return bad(format!("representatives {} and {} share a coset", coset_of[x] + 1, i + 1));
                }
                coset_of[x] = i;
            }
        }
        if c.len() != m || k.len() != m || sigma.len() != m {
            return bad("c, k and sigma must have m rows".into());
        }
        for i in 0..m {
            if c[i].len() != m || k[i].len() != m {
                return bad(format!("row {} of c or k has the wrong length", i + 1));
            }
            for j in 0..m {
                if !subgroup.contains(c[i][j]) {
                    return bad(format!("c({},{}) = {} is not in H", i + 1, j + 1, c[i][j]));
                }
                if k[i][j] >= m {
                    return bad(format!("k({},{}) out of range", i + 1, j + 1));
                }
            }
            let mut seen = vec![false; subgroup.order()];
            let ok = sigma[i].len() == subgroup.order()
                && sigma[i].iter().all(|&x| x < seen.len() && !std::mem::replace(&mut seen[x], true));
            if !ok {
                return bad(format!("sigma_{} is not a permutation of H", i + 1));
            }
        }
        let h_table = Arc::new(subgroup.induced_table());
        Ok(ExtensionData { group, subgroup, h_table, transversal, coset_of, c, k, sigma })
    }

    pub fn from_json(group: Arc<GroupTable>, data: &ExtensionJson) -> Result<ExtensionData, ExtensionError> {
        let subgroup = Subgroup::from_members(group, data.subgroup.iter().copied())
            .map_err(|e| ExtensionError::Malformed(e.to_string()))?;
        if data.m != data.transversal.len() {
            return Err(ExtensionError::Malformed("m disagrees with the transversal".into()));
        }
        let mut k = data.k.clone();
        for v in k.iter_mut().flatten() {
            *v = v.checked_sub(1).ok_or_else(|| ExtensionError::Malformed("k values are 1-based".into()))?;
        }
        ExtensionData::from_parts(subgroup, data.transversal.clone(), data.c.clone(), k, data.sigma.clone())
    }

    pub fn to_json(&self) -> ExtensionJson {
        ExtensionJson {
            m: self.m(),
            subgroup: self.subgroup.members().to_vec(),
            transversal: self.transversal.clone(),
            c: self.c.clone(),
            k: self.k.iter().map(|r| r.iter().map(|v| v + 1).collect()).collect(),
            sigma: self.sigma.clone(),
        }
    }

    pub fn group(&self) -> &Arc<GroupTable> {
        &self.group
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// `H` on local ids.
    pub fn h_table(&self) -> &Arc<GroupTable> {
        &self.h_table
    }

    /// The index `|G : H|`.
    pub fn m(&self) -> usize {
        self.transversal.len()
    }

    pub fn transversal(&self) -> &[usize] {
        &self.transversal
    }

    pub fn t(&self, i: usize) -> usize {
        self.transversal[i]
    }

    /// `c(i,j)` as a parent id.
    pub fn c(&self, i: usize, j: usize) -> usize {
        self.c[i][j]
    }

    /// `c(i,j)` as a local id of `H`.
    pub fn c_local(&self, i: usize, j: usize) -> usize {
        self.subgroup.local_id(self.c[i][j]).expect("c lies in H")
    }

    pub fn k(&self, i: usize, j: usize) -> usize {
        self.k[i][j]
    }

    /// `sigma_i` on local ids.
    pub fn sigma(&self, i: usize) -> &[usize] {
        &self.sigma[i]
    }

    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// Splits `g = h t_i`, returning `(local id of h, i)`.
    pub fn decompose(&self, g: usize) -> (usize, usize) {
        let i = self.coset_of[g];
        let h = self.group.mul(g, self.group.inv(self.transversal[i]));
        (self.subgroup.local_id(h).expect("g t_i^-1 lies in H"), i)
    }

    /// `h t_i` for a local id `h`.
    pub fn compose(&self, h: usize, i: usize) -> usize {
        self.group.mul(self.subgroup.parent_id(h), self.transversal[i])
    }

    /// Product in normal form: `(h,i)(x,j) = (h sigma_i(x) c(i,j), k(i,j))`.
    pub fn normal_form_mul(&self, (h, i): (usize, usize), (x, j): (usize, usize)) -> (usize, usize) {
        let ht = &self.h_table;
        let y = ht.mul(ht.mul(h, self.sigma[i][x]), self.c_local(i, j));
        (y, self.k[i][j])
    }
}

/// Checks every identity the extension data must satisfy, exhaustively.
///
/// Counterexamples use 1-based coset indices and local ids of `H`.
pub fn verify_extension_identities(ext: &ExtensionData) -> VerificationReport {
    let g = &ext.group;
    let h = &ext.h_table;
    let m = ext.m();
    let loc = |x: usize| ext.subgroup.local_id(x).expect("in H");
    let mut steps = Vec::new();

    let defining = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .find(|&(i, j)| g.mul(ext.t(i), ext.t(j)) != g.mul(ext.c(i, j), ext.t(ext.k(i, j))));
    steps.push(match defining {
        None => Step::pass("defining"),
        Some((i, j)) => Step::fail("defining", json!({"i": i + 1, "j": j + 1})),
    });

    let unit = (0..m).find_map(|j| {
        if ext.c(0, j) != 0 || ext.k(0, j) != j {
            Some(json!({"i": 1, "j": j + 1}))
        } else if ext.c(j, 0) != 0 || ext.k(j, 0) != j {
            Some(json!({"i": j + 1, "j": 1}))
        } else {
            None
        }
    });
    let unit = unit
        .or_else(|| ext.sigma(0).iter().enumerate().find(|&(x, &y)| x != y).map(|(x, _)| json!({"sigma": 1, "h": x})));
    steps.push(match unit {
        None => Step::pass("unit"),
        Some(cx) => Step::fail("unit", cx),
    });

    let conjugation = (0..m).find_map(|i| {
        ext.subgroup
            .members()
            .iter()
            .enumerate()
            .find(|&(x, &hx)| loc(g.conj(ext.t(i), hx)) != ext.sigma(i)[x])
            .map(|(x, _)| json!({"i": i + 1, "h": x}))
    });
    steps.push(match conjugation {
        None => Step::pass("sigma-conjugation"),
        Some(cx) => Step::fail("sigma-conjugation", cx),
    });

    let triples = || (0..m).flat_map(move |i| (0..m).flat_map(move |j| (0..m).map(move |l| (i, j, l))));
    let assoc_index = triples().find(|&(i, j, l)| ext.k(ext.k(i, j), l) != ext.k(i, ext.k(j, l)));
    steps.push(match assoc_index {
        None => Step::pass("associativity-index"),
        Some((i, j, l)) => Step::fail("associativity-index", json!({"i": i + 1, "j": j + 1, "l": l + 1})),
    });

    let assoc_cocycle = triples().find(|&(i, j, l)| {
        let lhs = h.mul(ext.c_local(i, j), ext.c_local(ext.k(i, j), l));
        let rhs = h.mul(ext.sigma(i)[ext.c_local(j, l)], ext.c_local(i, ext.k(j, l)));
        lhs != rhs
    });
    steps.push(match assoc_cocycle {
        None => Step::pass("associativity-cocycle"),
        Some((i, j, l)) => Step::fail("associativity-cocycle", json!({"i": i + 1, "j": j + 1, "l": l + 1})),
    });

    let composition = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).find_map(|(i, j)| {
        let c = ext.c_local(i, j);
        (0..h.order())
            .find(|&x| {
                let lhs = ext.sigma(i)[ext.sigma(j)[x]];
                let rhs = h.conj(c, ext.sigma(ext.k(i, j))[x]);
                lhs != rhs
            })
            .map(|x| json!({"i": i + 1, "j": j + 1, "h": x}))
    });
    steps.push(match composition {
        None => Step::pass("sigma-composition"),
        Some(cx) => Step::fail("sigma-composition", cx),
    });

    let mut reconstruction = None;
    'outer: for a in g.elements() {
        for b in g.elements() {
            let (y, q) = ext.normal_form_mul(ext.decompose(a), ext.decompose(b));
            if ext.compose(y, q) != g.mul(a, b) {
                reconstruction = Some(json!({"g": a, "g2": b}));
                break 'outer;
            }
        }
    }
    steps.push(match reconstruction {
        None => Step::pass("reconstruction"),
        Some(cx) => Step::fail("reconstruction", cx),
    });

    VerificationReport::new("extension", steps)
}
