//! Standard small groups with documented element orderings.

use std::collections::HashMap;

use super::perm::{table_from_permutations, Permutation};
use super::{GroupError, GroupTable, DEFAULT_ORDER_CAP};

fn check_cap(order: usize) -> Result<(), GroupError> {
    if order > DEFAULT_ORDER_CAP {
        Err(GroupError::GroupTooLarge { order, cap: DEFAULT_ORDER_CAP })
    } else {
        Ok(())
    }
}

/// Cyclic group of order `n`; id `k` is the `k`-th power of the generator.
pub fn cyclic(n: usize) -> Result<GroupTable, GroupError> {
    if n == 0 {
        return Err(GroupError::Empty);
    }
    check_cap(n)?;
    let table = (0..n).flat_map(|a| (0..n).map(move |b| ((a + b) % n) as u32)).collect();
    let names = (0..n)
        .map(|k| match k {
            0 => "e".to_string(),
            1 => "g".to_string(),
            _ => format!("g^{k}"),
        })
        .collect();
    GroupTable::from_flat_unchecked(n, table).with_names(names)
}

/// Dihedral group of order `2n`: ids `0..n` are the rotations `r^k`,
/// ids `n..2n` are the reflections `s r^k`, with `r s = s r^-1`.
pub fn dihedral(n: usize) -> Result<GroupTable, GroupError> {
    if n == 0 {
        return Err(GroupError::Empty);
    }
    let order = 2 * n;
    check_cap(order)?;
    // (flip, rot) encodes s^flip r^rot
    let decode = |x: usize| (x / n, x % n);
    let mut table = Vec::with_capacity(order * order);
    for a in 0..order {
        let (fa, ra) = decode(a);
        for b in 0..order {
            let (fb, rb) = decode(b);
            // s^fa r^ra s^fb r^rb = s^(fa+fb) r^(±ra + rb)
            let rot = if fb == 1 { (n - ra + rb) % n } else { (ra + rb) % n };
            table.push((((fa + fb) % 2) * n + rot) as u32);
        }
    }
    let power = |p: &str, k: usize| match k {
        0 => String::new(),
        1 => p.to_string(),
        _ => format!("{p}^{k}"),
    };
    let names = (0..order)
        .map(|x| {
            let (f, r) = decode(x);
            match (f, r) {
                (0, 0) => "e".to_string(),
                (0, r) => power("r", r),
                (_, r) => format!("s{}", power("r", r)),
            }
        })
        .collect();
    GroupTable::from_flat_unchecked(order, table).with_names(names)
}

/// Symmetric group on `n <= 5` points, permutations in lexicographic order
/// (id 0 is the identity). Products compose right to left.
pub fn symmetric(n: usize) -> Result<GroupTable, GroupError> {
    if n > 5 {
        let order = (1..=n).product();
        return Err(GroupError::GroupTooLarge { order, cap: 120 });
    }
    let mut perms: Vec<Permutation> = Vec::new();
    let mut p: Permutation = (0..n).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let ids: HashMap<Permutation, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let names =
        perms.iter().map(|p| format!("[{}]", p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))).collect();
    table_from_permutations(&perms, &ids).with_names(names)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Quaternion group, ordered `1, -1, i, -i, j, -j, k, -k`.
pub fn quaternion8() -> Result<GroupTable, GroupError> {
    // unit index: 0=1, 1=i, 2=j, 3=k; id = 2*unit + negative
    fn unit_mul(a: usize, b: usize) -> (bool, usize) {
        match (a, b) {
            (0, x) | (x, 0) => (false, x),
            (x, y) if x == y => (true, 0),
            (1, 2) => (false, 3),
            (2, 3) => (false, 1),
            (3, 1) => (false, 2),
            (2, 1) => (true, 3),
            (3, 2) => (true, 1),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    }
    let mut table = Vec::with_capacity(64);
    for a in 0..8 {
        for b in 0..8 {
            let (neg, u) = unit_mul(a / 2, b / 2);
            let sign = (a % 2) ^ (b % 2) ^ usize::from(neg);
            table.push((2 * u + sign) as u32);
        }
    }
    let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].map(String::from).to_vec();
    GroupTable::from_flat_unchecked(8, table).with_names(names)
}

/// Direct product; `(a, b)` has id `a * |B| + b`.
pub fn direct_product(a: &GroupTable, b: &GroupTable) -> Result<GroupTable, GroupError> {
    let (na, nb) = (a.order(), b.order());
    let order = na * nb;
    check_cap(order)?;
    let mut table = Vec::with_capacity(order * order);
    for x in 0..order {
        for y in 0..order {
            let p = a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb);
            table.push(p as u32);
        }
    }
    let names = (0..order).map(|x| format!("({},{})", a.name(x / nb), b.name(x % nb))).collect();
    GroupTable::from_flat_unchecked(order, table).with_names(names)
}

/// Parses a builder expression.
///
/// Accepted forms: `trivial`, `cyclic:N`, `dihedral:N` (order `2N`),
/// `symmetric:N`, `quaternion8`, and `product:E1,E2,...` where each factor is
/// one of the non-product forms; products fold left.
pub fn from_expr(expr: &str) -> Result<GroupTable, GroupError> {
    let expr = expr.trim();
    if let Some(factors) = expr.strip_prefix("product:") {
        let mut parts = factors.split(',');
        let first = parts.next().ok_or_else(|| GroupError::BadExpression(expr.into()))?;
        let mut acc = atom_from_expr(first)?;
        for part in parts {
            acc = direct_product(&acc, &atom_from_expr(part)?)?;
        }
        return Ok(acc);
    }
    atom_from_expr(expr)
}

fn atom_from_expr(expr: &str) -> Result<GroupTable, GroupError> {
    let expr = expr.trim();
    let bad = || GroupError::BadExpression(expr.to_string());
    let (head, arg) = match expr.split_once(':') {
        Some((h, a)) => (h, Some(a.trim().parse::<usize>().map_err(|_| bad())?)),
        None => (expr, None),
    };
    match (head, arg) {
        ("trivial", None) => cyclic(1),
        ("quaternion8", None) => quaternion8(),
        ("cyclic", Some(n)) => cyclic(n),
        ("dihedral", Some(n)) => dihedral(n),
        ("symmetric", Some(n)) => symmetric(n),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order_census(g: &GroupTable) -> Vec<usize> {
        let mut counts = vec![0; g.order() + 1];
        for a in g.elements() {
            counts[g.element_order(a)] += 1;
        }
        counts
    }

    #[test]
    fn trivial_group() {
        assert_eq!(cyclic(1).unwrap().order(), 1);
        assert_eq!(from_expr("trivial").unwrap().order(), 1);
    }

    #[test]
    fn q8_has_a_single_involution() {
        let q = quaternion8().unwrap();
        assert_eq!(order_census(&q)[2], 1);
        assert_eq!(order_census(&q)[4], 6);
        // i * j = k, j * i = -k
        assert_eq!(q.mul(2, 4), 6);
        assert_eq!(q.mul(4, 2), 7);
    }

    #[test]
    fn klein_four() {
        let c2 = cyclic(2).unwrap();
        let v = direct_product(&c2, &c2).unwrap();
        assert_eq!(order_census(&v)[2], 3);
    }

    #[test]
    fn builders_satisfy_group_axioms() {
        for g in [
            cyclic(6).unwrap(),
            dihedral(3).unwrap(),
            dihedral(4).unwrap(),
            symmetric(4).unwrap(),
            quaternion8().unwrap(),
            from_expr("product:cyclic:2,cyclic:2,cyclic:2").unwrap(),
        ] {
            assert!(GroupTable::validate(&g.rows()).is_ok());
        }
    }

    #[test]
    fn dihedral_relations() {
        let d4 = dihedral(4).unwrap();
        let (r, s) = (1, 4);
        assert_eq!(d4.element_order(r), 4);
        assert_eq!(d4.element_order(s), 2);
        // r s = s r^-1
        assert_eq!(d4.mul(r, s), d4.mul(s, d4.inv(r)));
        assert_eq!(d4.name(5), "sr");
    }

    #[test]
    fn symmetric_is_lexicographic() {
        let s3 = symmetric(3).unwrap();
        assert_eq!(s3.name(0), "[0,1,2]");
        assert_eq!(s3.name(5), "[2,1,0]");
        assert_eq!(symmetric(5).unwrap().order(), 120);
        assert!(matches!(symmetric(6), Err(GroupError::GroupTooLarge { .. })));
    }

    #[test]
    fn bad_expressions() {
        for e in ["", "cyclic", "cyclic:x", "foo:3", "product:", "quaternion8:2"] {
            assert!(from_expr(e).is_err(), "{e}");
        }
        assert_eq!(from_expr("product:cyclic:2,cyclic:3").unwrap().order(), 6);
    }
}
