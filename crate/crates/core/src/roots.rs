//! Half roots, roots and subset combinatorics for the rank-`p` type-C system.
//!
//! Half roots `+[i]` / `-[i]` label the standard basis of `Z^{2p}`; roots are
//! differences of half roots and label the elementary symplectic generators.
//! Subgroups are described by a pair `(S, T)` of an isotropic and a symplectic
//! subset of half roots, from which the various `Phi` root sets are derived.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A half root `+[i]` or `-[i]` with `i` in `1..=p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct HalfRoot {
    sign: i8,
    index: usize,
}

impl HalfRoot {
    pub fn new(sign: i8, index: usize) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput(format!("half root sign must be ±1, got {sign}")));
        }
        if index == 0 {
            return Err(Error::InvalidInput("half root index must be >= 1".into()));
        }
        Ok(HalfRoot { sign, index })
    }

    pub fn pos(index: usize) -> Self {
        HalfRoot { sign: 1, index }
    }

    pub fn neg(index: usize) -> Self {
        HalfRoot { sign: -1, index }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn negate(&self) -> Self {
        HalfRoot { sign: -self.sign, index: self.index }
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// 0-based row/column of the basis vector `z_h` in a `2p x 2p` matrix:
    /// `z_{[i]}` sits at `i-1`, `z_{-[i]}` at `p+i-1`.
    pub fn row(&self, p: usize) -> usize {
        debug_assert!(self.index <= p);
        if self.sign > 0 {
            self.index - 1
        } else {
            p + self.index - 1
        }
    }

    /// Inverse of [`HalfRoot::row`].
    pub fn from_row(row: usize, p: usize) -> Self {
        if row < p {
            HalfRoot::pos(row + 1)
        } else {
            HalfRoot::neg(row - p + 1)
        }
    }

    pub fn check_rank(&self, p: usize) -> Result<()> {
        if self.index > p {
            Err(Error::InvalidInput(format!("half root {self} out of range for rank {p}")))
        } else {
            Ok(())
        }
    }
}

/// Total order: by index, then `+` before `-`. Keeps all set enumerations
/// deterministic.
impl Ord for HalfRoot {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.index, -self.sign).cmp(&(other.index, -other.sign))
    }
}

impl PartialOrd for HalfRoot {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HalfRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.sign > 0 { "+" } else { "-" }, self.index)
    }
}

impl FromStr for HalfRoot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (1, &s[1..]),
            Some(b'-') => (-1, &s[1..]),
            _ => return Err(Error::Parse(format!("half root must start with '+' or '-': {s:?}"))),
        };
        let index: usize =
            rest.parse().map_err(|_| Error::Parse(format!("bad half root index: {s:?}")))?;
        HalfRoot::new(sign, index)
    }
}

/// Short roots have two nonzero coefficients `±1`; long roots one `±2`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RootKind {
    Short,
    Long,
}

/// A type-C root, stored canonically as its coefficient vector in `Z^p`
/// (coefficient of `[i]` at slot `i-1`). The short/long tag is recomputed
/// from the vector, never cached.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Root {
    coeffs: Vec<i8>,
}

impl Root {
    /// The root `s - t` for `t != ±s` (short).
    pub fn short(s: HalfRoot, t: HalfRoot, p: usize) -> Result<Self> {
        if s.index() == t.index() {
            return Err(Error::InvalidInput(format!("short root requires t != ±s: {s}, {t}")));
        }
        let mut coeffs = vec![0i8; p];
        s.check_rank(p)?;
        t.check_rank(p)?;
        coeffs[s.index() - 1] += s.sign();
        coeffs[t.index() - 1] -= t.sign();
        Ok(Root { coeffs })
    }

    /// The long root `2s`.
    pub fn long(s: HalfRoot, p: usize) -> Result<Self> {
        s.check_rank(p)?;
        let mut coeffs = vec![0i8; p];
        coeffs[s.index() - 1] = 2 * s.sign();
        Ok(Root { coeffs })
    }

    /// The sum `a + b` of two half-root functionals, if it is a root.
    pub fn from_halfroot_sum(a: HalfRoot, b: HalfRoot, p: usize) -> Result<Self> {
        a.check_rank(p)?;
        b.check_rank(p)?;
        let mut coeffs = vec![0i8; p];
        coeffs[a.index() - 1] += a.sign();
        coeffs[b.index() - 1] += b.sign();
        Root::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<i8>) -> Result<Self> {
        let root = Root { coeffs };
        match root.classify() {
            Some(_) => Ok(root),
            None => Err(Error::InvalidInput(format!(
                "coefficient vector {:?} is not a type-C root",
                root.coeffs
            ))),
        }
    }

    fn classify(&self) -> Option<RootKind> {
        let nonzero: Vec<i8> = self.coeffs.iter().copied().filter(|&c| c != 0).collect();
        match nonzero.as_slice() {
            [a, b] if a.abs() == 1 && b.abs() == 1 => Some(RootKind::Short),
            [a] if a.abs() == 2 => Some(RootKind::Long),
            _ => None,
        }
    }

    pub fn kind(&self) -> RootKind {
        self.classify().expect("Root invariant violated")
    }

    pub fn is_short(&self) -> bool {
        self.kind() == RootKind::Short
    }

    pub fn is_long(&self) -> bool {
        self.kind() == RootKind::Long
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn negate(&self) -> Self {
        Root { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    /// Canonical presentation `alpha = s - t`: `s` is the half root read off
    /// the lowest-index nonzero coefficient. For a long root `2s` returns
    /// `(s, -s)`. The presentation fixes the matrix of the elementary
    /// generator; the other presentation of a short root would give its
    /// inverse.
    pub fn presentation(&self) -> (HalfRoot, HalfRoot) {
        let mut iter = self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0);
        let (i, &ci) = iter.next().expect("Root is nonzero");
        if ci.abs() == 2 {
            let s = HalfRoot { sign: ci.signum(), index: i + 1 };
            return (s, s.negate());
        }
        let (j, &cj) = iter.next().expect("short root has two nonzero coefficients");
        let s = HalfRoot { sign: ci, index: i + 1 };
        let t = HalfRoot { sign: -cj, index: j + 1 };
        (s, t)
    }

    /// For a short root, the isotropic pair `{a, b}` with `alpha = a + b`.
    pub fn halfroot_sum_pair(&self) -> Option<(HalfRoot, HalfRoot)> {
        if !self.is_short() {
            return None;
        }
        let (s, t) = self.presentation();
        Some((s, t.negate()))
    }
}

/// Coefficient-vector sum, present when the sum is again a root.
pub fn root_add(a: &Root, b: &Root) -> Result<Option<Root>> {
    if a.rank() != b.rank() {
        return Err(Error::InvalidInput(format!(
            "rank mismatch in root addition: {} vs {}",
            a.rank(),
            b.rank()
        )));
    }
    let coeffs: Vec<i8> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
    let cand = Root { coeffs };
    Ok(cand.classify().map(|_| cand))
}

/// All `2p^2` roots of the rank-`p` system, in coefficient-vector order.
pub fn all_roots(p: usize) -> Vec<Root> {
    let mut out = Vec::new();
    for i in 1..=p {
        for si in [1i8, -1] {
            let s = HalfRoot { sign: si, index: i };
            out.push(Root::long(s, p).unwrap());
            for j in 1..=p {
                if j == i {
                    continue;
                }
                for sj in [1i8, -1] {
                    let t = HalfRoot { sign: sj, index: j };
                    out.push(Root::short(s, t, p).unwrap());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            RootKind::Long => {
                let (s, _) = self.presentation();
                write!(f, "2*{s}")
            }
            RootKind::Short => {
                for (i, &c) in self.coeffs.iter().enumerate() {
                    if c != 0 {
                        write!(f, "{}{}", if c > 0 { "+" } else { "-" }, i + 1)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl Root {
    /// Parses the display form at a given rank, e.g. `"+1-2"` or `"2*+1"`.
    pub fn parse(s: &str, p: usize) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("2*") {
            let h: HalfRoot = rest.parse()?;
            return Root::long(h, p);
        }
        // Split into signed index tokens.
        let bytes = s.as_bytes();
        let mut tokens = Vec::new();
        let mut start = 0;
        for (k, &b) in bytes.iter().enumerate() {
            if k > 0 && (b == b'+' || b == b'-') {
                tokens.push(&s[start..k]);
                start = k;
            }
        }
        tokens.push(&s[start..]);
        if tokens.len() != 2 {
            return Err(Error::Parse(format!("cannot parse root {s:?}")));
        }
        let a: HalfRoot = tokens[0].parse()?;
        let b: HalfRoot = tokens[1].parse()?;
        Root::from_halfroot_sum(a, b, p)
    }
}

/// Combinatorial type of a subset of half roots.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubsetClass {
    /// No pair `{±s}`; includes the empty set.
    Isotropic,
    /// Nonempty and closed under negation.
    Symplectic,
    Neither,
}

/// Classifies a subset of half roots as isotropic, symplectic or neither.
pub fn classify_subset(x: &BTreeSet<HalfRoot>, p: usize) -> Result<SubsetClass> {
    for h in x {
        h.check_rank(p)?;
    }
    let pair_free = x.iter().all(|h| !x.contains(&h.negate()));
    if pair_free {
        return Ok(SubsetClass::Isotropic);
    }
    if x.iter().all(|h| x.contains(&h.negate())) {
        return Ok(SubsetClass::Symplectic);
    }
    Ok(SubsetClass::Neither)
}

/// A pair `(S, T)` of disjoint subsets of half roots with `S` isotropic and
/// `T` symplectic, inside a fixed ambient rank `p`. `T` may be empty; `S` may
/// be empty for the frames that only use the symplectic block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubgroupFrame {
    p: usize,
    s: BTreeSet<HalfRoot>,
    t: BTreeSet<HalfRoot>,
}

impl SubgroupFrame {
    pub fn new(p: usize, s: BTreeSet<HalfRoot>, t: BTreeSet<HalfRoot>) -> Result<Self> {
        match classify_subset(&s, p)? {
            SubsetClass::Isotropic => {}
            _ => return Err(Error::InvalidInput("S must be isotropic".into())),
        }
        if !t.is_empty() {
            match classify_subset(&t, p)? {
                SubsetClass::Symplectic => {}
                _ => return Err(Error::InvalidInput("T must be symplectic".into())),
            }
        }
        if s.intersection(&t).next().is_some() {
            return Err(Error::InvalidInput("S and T must be disjoint".into()));
        }
        // T symplectic and S ∩ T = ∅ already forces (-S) ∩ T = ∅.
        Ok(SubgroupFrame { p, s, t })
    }

    /// Convenience: `S` from signed indices, `T` from unsigned index pairs.
    pub fn from_indices(p: usize, s: &[(i8, usize)], t_indices: &[usize]) -> Result<Self> {
        let mut sset = BTreeSet::new();
        for &(sign, idx) in s {
            sset.insert(HalfRoot::new(sign, idx)?);
        }
        let mut tset = BTreeSet::new();
        for &idx in t_indices {
            tset.insert(HalfRoot::pos(idx));
            tset.insert(HalfRoot::neg(idx));
        }
        SubgroupFrame::new(p, sset, tset)
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn s(&self) -> &BTreeSet<HalfRoot> {
        &self.s
    }

    pub fn t(&self) -> &BTreeSet<HalfRoot> {
        &self.t
    }

    /// `S` in canonical order.
    pub fn s_list(&self) -> Vec<HalfRoot> {
        self.s.iter().copied().collect()
    }

    /// `T` in canonical order.
    pub fn t_list(&self) -> Vec<HalfRoot> {
        self.t.iter().copied().collect()
    }

    /// The positive half of `T`.
    pub fn t_plus(&self) -> Vec<HalfRoot> {
        self.t.iter().copied().filter(|h| h.is_positive()).collect()
    }

    /// Half roots fixed by the parabolic: outside `S ∪ -S ∪ T`.
    pub fn free_halfroots(&self) -> Vec<HalfRoot> {
        let mut out = Vec::new();
        for i in 1..=self.p {
            for sign in [1i8, -1] {
                let h = HalfRoot { sign, index: i };
                if !self.s.contains(&h) && !self.s.contains(&h.negate()) && !self.t.contains(&h) {
                    out.push(h);
                }
            }
        }
        out
    }
}

/// Which derived root set of a frame to produce.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PhiKind {
    P,
    Gl,
    Sp,
    N,
    Z,
}

/// The root sets attached to a frame:
/// `ΦP = {s-t} ∪ {s±s' ≠ 0} ∪ {t-t' ≠ 0}`, `ΦGL = {s-s' ≠ 0}`,
/// `ΦSp = {t-t' ≠ 0}`, `ΦZ = {s+s'}`, `ΦN = ΦZ ∪ {s-t}`.
pub fn phi_set(kind: PhiKind, frame: &SubgroupFrame) -> BTreeSet<Root> {
    let p = frame.rank();
    let s_list = frame.s_list();
    let t_list = frame.t_list();
    let mut out = BTreeSet::new();

    let add_st = |out: &mut BTreeSet<Root>| {
        for &s in &s_list {
            for &t in &t_list {
                out.insert(Root::short(s, t, p).unwrap());
            }
        }
    };
    let add_z = |out: &mut BTreeSet<Root>| {
        for &a in &s_list {
            for &b in &s_list {
                if let Ok(r) = Root::from_halfroot_sum(a, b, p) {
                    out.insert(r);
                }
            }
        }
    };
    let add_gl = |out: &mut BTreeSet<Root>| {
        for &a in &s_list {
            for &b in &s_list {
                if a != b {
                    out.insert(Root::short(a, b, p).unwrap());
                }
            }
        }
    };
    let add_sp = |out: &mut BTreeSet<Root>| {
        for &a in &t_list {
            for &b in &t_list {
                if a == b {
                    continue;
                }
                if a == b.negate() {
                    out.insert(Root::long(a, p).unwrap());
                } else {
                    out.insert(Root::short(a, b, p).unwrap());
                }
            }
        }
    };

    match kind {
        PhiKind::P => {
            add_st(&mut out);
            add_gl(&mut out);
            add_z(&mut out);
            add_sp(&mut out);
        }
        PhiKind::Gl => add_gl(&mut out),
        PhiKind::Sp => add_sp(&mut out),
        PhiKind::Z => add_z(&mut out),
        PhiKind::N => {
            add_z(&mut out);
            add_st(&mut out);
        }
    }
    out
}

/// `ΦN` in the fixed canonical order used for normal forms and Lie algebra
/// bases: first the `S x T` block in `(s, t)` order, then `ΦZ` in pair order.
pub fn phi_n_ordered(frame: &SubgroupFrame) -> Vec<Root> {
    let p = frame.rank();
    let mut out = Vec::new();
    for &s in &frame.s_list() {
        for &t in &frame.t_list() {
            out.push(Root::short(s, t, p).unwrap());
        }
    }
    let s_list = frame.s_list();
    for (i, &a) in s_list.iter().enumerate() {
        for &b in &s_list[i..] {
            out.push(Root::from_halfroot_sum(a, b, p).unwrap());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hr(sign: i8, idx: usize) -> HalfRoot {
        HalfRoot::new(sign, idx).unwrap()
    }

    #[test]
    fn classify_examples() {
        let p = 3;
        let single: BTreeSet<_> = [hr(1, 1)].into_iter().collect();
        assert_eq!(classify_subset(&single, p).unwrap(), SubsetClass::Isotropic);

        let sympl: BTreeSet<_> = [hr(1, 2), hr(-1, 2), hr(1, 3), hr(-1, 3)].into_iter().collect();
        assert_eq!(classify_subset(&sympl, p).unwrap(), SubsetClass::Symplectic);

        let neither: BTreeSet<_> = [hr(1, 1), hr(-1, 1), hr(1, 2)].into_iter().collect();
        assert_eq!(classify_subset(&neither, p).unwrap(), SubsetClass::Neither);

        let empty = BTreeSet::new();
        assert_eq!(classify_subset(&empty, p).unwrap(), SubsetClass::Isotropic);

        let bad: BTreeSet<_> = [hr(1, 4)].into_iter().collect();
        assert!(classify_subset(&bad, p).is_err());
    }

    #[test]
    fn root_arithmetic() {
        let p = 3;
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap(); // [1]-[2]
        let b = Root::short(hr(1, 2), hr(1, 3), p).unwrap(); // [2]-[3]
        let sum = root_add(&a, &b).unwrap().unwrap();
        assert_eq!(sum, Root::short(hr(1, 1), hr(1, 3), p).unwrap());
        assert!(sum.is_short());

        let c = Root::short(hr(1, 1), hr(-1, 2), p).unwrap(); // [1]+[2]
        let long = root_add(&a, &c).unwrap().unwrap();
        assert_eq!(long, Root::long(hr(1, 1), p).unwrap());
        assert!(long.is_long());

        assert!(root_add(&a, &a.negate()).unwrap().is_none());
        // [1]-[2] + [1]-[3] is not a root
        let d = Root::short(hr(1, 1), hr(1, 3), p).unwrap();
        assert!(root_add(&a, &d).unwrap().is_none());
    }

    #[test]
    fn root_add_commutes() {
        let p = 4;
        let roots = all_roots(p);
        for a in &roots {
            for b in &roots {
                assert_eq!(root_add(a, b).unwrap(), root_add(b, a).unwrap());
            }
        }
    }

    #[test]
    fn root_count_and_display() {
        assert_eq!(all_roots(2).len(), 8);
        assert_eq!(all_roots(3).len(), 18);
        assert_eq!(all_roots(4).len(), 32);

        let p = 3;
        let r = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        assert_eq!(r.to_string(), "+1-2");
        assert_eq!(Root::parse("+1-2", p).unwrap(), r);
        let l = Root::long(hr(1, 1), p).unwrap();
        assert_eq!(l.to_string(), "2*+1");
        assert_eq!(Root::parse("2*+1", p).unwrap(), l);
        let m = Root::long(hr(-1, 2), p).unwrap();
        assert_eq!(Root::parse(&m.to_string(), p).unwrap(), m);
        for r in all_roots(4) {
            assert_eq!(Root::parse(&r.to_string(), 4).unwrap(), r);
        }
    }

    #[test]
    fn phi_sets_match_displayed_formulas() {
        // kind=Z, S={[1]} -> {2[1]}
        let f = SubgroupFrame::from_indices(3, &[(1, 1)], &[]).unwrap();
        let z = phi_set(PhiKind::Z, &f);
        assert_eq!(z.len(), 1);
        assert!(z.contains(&Root::long(hr(1, 1), 3).unwrap()));

        // kind=N, S={[1]}, T={±2,±3}
        let f = SubgroupFrame::from_indices(3, &[(1, 1)], &[2, 3]).unwrap();
        let n = phi_set(PhiKind::N, &f);
        let expected: BTreeSet<Root> = [
            Root::parse("+1-2", 3).unwrap(),
            Root::parse("+1+2", 3).unwrap(),
            Root::parse("+1-3", 3).unwrap(),
            Root::parse("+1+3", 3).unwrap(),
            Root::parse("2*+1", 3).unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(n, expected);

        // kind=GL, S=∅ -> ∅
        let f = SubgroupFrame::from_indices(3, &[], &[2]).unwrap();
        assert!(phi_set(PhiKind::Gl, &f).is_empty());
    }

    #[test]
    fn phi_n_is_disjoint_union() {
        for (s, t) in [(vec![(1i8, 1)], vec![2, 3]), (vec![(1, 1), (-1, 2)], vec![3])] {
            let f = SubgroupFrame::from_indices(3, &s, &t).unwrap();
            let n = phi_set(PhiKind::N, &f);
            let z = phi_set(PhiKind::Z, &f);
            let mut st = BTreeSet::new();
            for &a in &f.s_list() {
                for &b in &f.t_list() {
                    st.insert(Root::short(a, b, 3).unwrap());
                }
            }
            assert!(z.is_disjoint(&st));
            let union: BTreeSet<_> = z.union(&st).cloned().collect();
            assert_eq!(n, union);
            assert_eq!(phi_n_ordered(&f).len(), n.len());
        }
    }

    #[test]
    fn phi_sp_cardinality_by_double_loop() {
        let f = SubgroupFrame::from_indices(4, &[], &[1, 2, 3]).unwrap();
        let sp = phi_set(PhiKind::Sp, &f);
        let mut brute = BTreeSet::new();
        for &a in &f.t_list() {
            for &b in &f.t_list() {
                if a == b {
                    continue;
                }
                let mut coeffs = vec![0i8; 4];
                coeffs[a.index() - 1] += a.sign();
                coeffs[b.index() - 1] -= b.sign();
                if let Ok(r) = Root::from_coeffs(coeffs) {
                    brute.insert(r);
                }
            }
        }
        assert_eq!(sp, brute);
        // #T = 6 half roots: the rank-3 subsystem has 2*3^2 = 18 roots.
        assert_eq!(sp.len(), 18);
    }

    #[test]
    fn frame_validation() {
        assert!(SubgroupFrame::from_indices(3, &[(1, 1), (-1, 1)], &[]).is_err());
        assert!(SubgroupFrame::from_indices(3, &[(1, 1)], &[1]).is_err());
        assert!(SubgroupFrame::from_indices(3, &[(1, 1)], &[2, 3]).is_ok());
    }

    #[test]
    fn negation_preserves_classification() {
        let p = 4;
        let sets: Vec<BTreeSet<HalfRoot>> = vec![
            [hr(1, 1), hr(-1, 2)].into_iter().collect(),
            [hr(1, 1), hr(-1, 1), hr(1, 3), hr(-1, 3)].into_iter().collect(),
        ];
        for x in sets {
            let neg: BTreeSet<_> = x.iter().map(|h| h.negate()).collect();
            let cx = classify_subset(&x, p).unwrap();
            let cn = classify_subset(&neg, p).unwrap();
            assert_eq!(cx, cn);
        }
    }
}
