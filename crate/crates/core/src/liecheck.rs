//! Exact weight-zero homology of the graded nilpotent Lie algebra attached
//! to a frame `(S, T)`: the algebra is spanned by `X_alpha = e_alpha - 1`
//! over the roots of `N_{S,T}`, graded by weights of the diagonal subgroup
//! of `SL(S) x Sp(T)`, and the solvable-group criterion asks that zero is
//! not a principal weight, no two principal weights are quasi-opposite, and
//! the degree-zero parts of the second homology and of the Killing module
//! vanish.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::roots::{phi_n_ordered, HalfRoot, Root, SubgroupFrame};
use crate::spmat::{elementary, root_units, Int, Mat, Rat};

/// A weight of the diagonal group: a rational vector on `S` (canonicalized
/// to mean zero, quotienting the determinant-one relation) and an integer
/// vector on the positive half of `T`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Weight {
    d_part: Vec<Rat>,
    e_part: Vec<Int>,
}

impl Weight {
    pub fn is_zero(&self) -> bool {
        self.d_part.iter().all(|x| x.is_zero()) && self.e_part.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        Weight {
            d_part: self
                .d_part
                .iter()
                .zip(&other.d_part)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            e_part: self
                .e_part
                .iter()
                .zip(&other.e_part)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn negate(&self) -> Self {
        Weight {
            d_part: self.d_part.iter().map(|x| -x.clone()).collect(),
            e_part: self.e_part.iter().map(|x| -x.clone()).collect(),
        }
    }

    /// Quasi-opposite: `alpha = t beta` for some `t < 0`; both nonzero.
    pub fn quasi_opposite(&self, other: &Self) -> bool {
        if self.is_zero() || other.is_zero() {
            return false;
        }
        let a: Vec<Rat> = self
            .d_part
            .iter()
            .cloned()
            .chain(self.e_part.iter().map(|x| Rat::from_integer(x.clone())))
            .collect();
        let b: Vec<Rat> = other
            .d_part
            .iter()
            .cloned()
            .chain(other.e_part.iter().map(|x| Rat::from_integer(x.clone())))
            .collect();
        // parallel: all 2x2 minors vanish
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if a[i].clone() * b[j].clone() != a[j].clone() * b[i].clone() {
                    return false;
                }
            }
        }
        // antiparallel: negative dot product
        let dot: Rat = a.iter().zip(&b).map(|(x, y)| x.clone() * y.clone()).sum();
        dot.is_negative()
    }
}

/// The weight of `X_alpha` for `alpha` in `ΦN_{S,T}`: functional
/// coefficients of the root split over `S` and `T+`, with the `S` part
/// centered.
pub fn weight_of_root(alpha: &Root, frame: &SubgroupFrame) -> Result<Weight> {
    let s_list = frame.s_list();
    let t_plus = frame.t_plus();
    let mut d_part = vec![Rat::zero(); s_list.len()];
    let mut e_part = vec![Int::zero(); t_plus.len()];
    for (i, &c) in alpha.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let idx = i + 1;
        let pos = HalfRoot::pos(idx);
        let neg = HalfRoot::neg(idx);
        if let Some(k) = s_list.iter().position(|&s| s == pos) {
            d_part[k] += Rat::from_integer(Int::from(c));
        } else if let Some(k) = s_list.iter().position(|&s| s == neg) {
            d_part[k] -= Rat::from_integer(Int::from(c));
        } else if let Some(k) = t_plus.iter().position(|&t| t.index() == idx) {
            e_part[k] += Int::from(c);
        } else {
            return Err(Error::InvalidInput(format!(
                "root {alpha} is not supported on S ∪ T"
            )));
        }
    }
    // canonicalize the S part: subtract the mean (trace-free relation)
    if !s_list.is_empty() {
        let mean: Rat = d_part.iter().cloned().sum::<Rat>()
            / Rat::from_integer(Int::from(s_list.len() as i64));
        for x in d_part.iter_mut() {
            *x -= mean.clone();
        }
    }
    Ok(Weight { d_part, e_part })
}

/// The graded nilpotent Lie algebra on basis `{X_alpha}` with exact integer
/// structure constants computed from matrix commutators.
pub struct GradedNilpotentAlgebra {
    frame: SubgroupFrame,
    basis: Vec<Root>,
    mats: Vec<Mat<Int>>,
    weights: Vec<Weight>,
    /// sparse brackets: `(i, j) -> coefficients` over the basis; only `i < j`
    /// stored, antisymmetry fills the rest
    brackets: HashMap<(usize, usize), Vec<(usize, Int)>>,
}

impl GradedNilpotentAlgebra {
    pub fn basis(&self) -> &[Root] {
        &self.basis
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn frame(&self) -> &SubgroupFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `[X_i, X_j]` as coefficients over the basis.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<(usize, Int)> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Vec::new(),
            Less => self.brackets.get(&(i, j)).cloned().unwrap_or_default(),
            Greater => self
                .brackets
                .get(&(j, i))
                .map(|v| v.iter().map(|(k, c)| (*k, -c.clone())).collect())
                .unwrap_or_default(),
        }
    }
}

/// Expands a matrix in the span of the `X_alpha` by reading the primary
/// entry slot of each basis root; the remainder must vanish exactly.
fn expand_in_basis(
    m: &Mat<Int>,
    basis: &[Root],
    mats: &[Mat<Int>],
    p: usize,
) -> Option<Vec<(usize, Int)>> {
    let mut coeffs = Vec::new();
    let mut rest = m.clone();
    for (k, alpha) in basis.iter().enumerate() {
        let ((r, c), u) = root_units(alpha, p)[0];
        let coef = rest.at(r, c).clone() * Int::from(u);
        if !coef.is_zero() {
            // subtract coef * X_alpha
            let x = mats[k].clone();
            for rr in 0..2 * p {
                for cc in 0..2 * p {
                    let v = x.at(rr, cc);
                    if !v.is_zero() {
                        let cur = rest.at(rr, cc).clone();
                        rest.set(rr, cc, cur - &coef * v);
                    }
                }
            }
            coeffs.push((k, coef));
        }
    }
    if rest == Mat::zero(2 * p) {
        Some(coeffs)
    } else {
        None
    }
}

/// Builds the algebra: basis, weights, and exact brackets. Verifies two-step
/// nilpotency, the Jacobi identity, and weight additivity along the way.
pub fn build_algebra(frame: &SubgroupFrame) -> Result<GradedNilpotentAlgebra> {
    let p = frame.rank();
    if frame.s().is_empty() {
        return Err(Error::InvalidInput("frame needs a nonempty S".into()));
    }
    let basis = phi_n_ordered(frame);
    let expected = {
        let ns = frame.s().len();
        let nt = frame.t().len();
        ns * nt + ns * (ns + 1) / 2
    };
    if basis.len() != expected {
        return Err(Error::Invariant("basis size mismatch".into()));
    }
    let mats: Vec<Mat<Int>> = basis
        .iter()
        .map(|alpha| {
            let e = elementary(p, alpha, &Int::one());
            e.sub(&Mat::identity(2 * p))
        })
        .collect();
    let weights: Vec<Weight> =
        basis.iter().map(|alpha| weight_of_root(alpha, frame)).collect::<Result<_>>()?;

    let mut brackets = HashMap::new();
    let n = basis.len();
    for i in 0..n {
        for j in i + 1..n {
            let comm = mats[i].mul(&mats[j]).sub(&mats[j].mul(&mats[i]));
            if comm == Mat::zero(2 * p) {
                continue;
            }
            let coeffs = expand_in_basis(&comm, &basis, &mats, p)
                .ok_or_else(|| Error::Invariant("bracket leaves the basis span".into()))?;
            // weight additivity
            let target = weights[i].add(&weights[j]);
            for (k, _) in &coeffs {
                if weights[*k] != target {
                    return Err(Error::Invariant("bracket violates the grading".into()));
                }
            }
            brackets.insert((i, j), coeffs);
        }
    }
    let alg = GradedNilpotentAlgebra { frame: frame.clone(), basis, mats, weights, brackets };
    verify_axioms(&alg)?;
    Ok(alg)
}

/// Two-step nilpotency, antisymmetry, and the Jacobi identity, exactly.
/// The bracket table was computed from exact matrix commutators, so table
/// lookups carry the matrix-level facts; one commutator per central basis
/// element is still recomputed from matrices as a spot check.
pub fn verify_axioms(alg: &GradedNilpotentAlgebra) -> Result<()> {
    let n = alg.dim();
    let p = alg.frame.rank();
    let mut central: Vec<usize> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let bij = alg.bracket(i, j);
            let bji = alg.bracket(j, i);
            // antisymmetry
            let mut sum: HashMap<usize, Int> = HashMap::new();
            for (k, c) in bij.iter().chain(bji.iter()) {
                *sum.entry(*k).or_insert_with(Int::zero) += c;
            }
            if sum.values().any(|c| !c.is_zero()) {
                return Err(Error::Invariant("bracket is not antisymmetric".into()));
            }
            central.extend(bij.iter().map(|(k, _)| *k));
        }
    }
    central.sort_unstable();
    central.dedup();
    // 2-step nilpotency: every bracket image is central
    for &k in &central {
        for l in 0..n {
            if !alg.bracket(k, l).is_empty() {
                return Err(Error::Invariant("algebra is not 2-step nilpotent".into()));
            }
        }
        let probe = alg.mats[k].mul(&alg.mats[0]).sub(&alg.mats[0].mul(&alg.mats[k]));
        if probe != Mat::zero(2 * p) {
            return Err(Error::Invariant("central element fails a matrix commutator".into()));
        }
    }
    // Jacobi on basis triples (cheap because brackets are central)
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut total: HashMap<usize, Int> = HashMap::new();
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for (m, cm) in alg.bracket(a, b) {
                        for (q, cq) in alg.bracket(m, c) {
                            *total.entry(q).or_insert_with(Int::zero) += &cm * &cq;
                        }
                    }
                }
                if total.values().any(|c| !c.is_zero()) {
                    return Err(Error::Invariant("Jacobi identity fails".into()));
                }
            }
        }
    }
    Ok(())
}

/// Which graded piece to extract.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GradedSpace {
    Tensor2,
    Wedge2,
    Wedge3,
    Sym2,
}

/// Basis index lists of the degree-zero part of the chosen space.
pub fn zero_weight_component(space: GradedSpace, alg: &GradedNilpotentAlgebra) -> Vec<Vec<usize>> {
    let n = alg.dim();
    let w = alg.weights();
    let mut by_weight: HashMap<&Weight, Vec<usize>> = HashMap::new();
    for (i, wi) in w.iter().enumerate() {
        by_weight.entry(wi).or_default().push(i);
    }
    let mut out = Vec::new();
    match space {
        GradedSpace::Tensor2 => {
            for i in 0..n {
                let need = w[i].negate();
                if let Some(js) = by_weight.get(&need) {
                    for &j in js {
                        out.push(vec![i, j]);
                    }
                }
            }
        }
        GradedSpace::Wedge2 => {
            for i in 0..n {
                let need = w[i].negate();
                if let Some(js) = by_weight.get(&need) {
                    for &j in js {
                        if i < j {
                            out.push(vec![i, j]);
                        }
                    }
                }
            }
        }
        GradedSpace::Sym2 => {
            for i in 0..n {
                let need = w[i].negate();
                if let Some(js) = by_weight.get(&need) {
                    for &j in js {
                        if i <= j {
                            out.push(vec![i, j]);
                        }
                    }
                }
            }
        }
        GradedSpace::Wedge3 => {
            for i in 0..n {
                for j in i + 1..n {
                    let need = w[i].add(&w[j]).negate();
                    if let Some(ks) = by_weight.get(&need) {
                        for &k in ks {
                            if j < k {
                                out.push(vec![i, j, k]);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Exact rank of an integer matrix by fraction-free elimination.
pub fn rank_int(rows: Vec<Vec<Int>>) -> usize {
    let mut rows: Vec<Vec<Int>> =
        rows.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    if rows.is_empty() {
        return 0;
    }
    let width = rows[0].len();
    let mut rank = 0;
    let mut col = 0;
    while col < width && rank < rows.len() {
        if let Some(pr) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            rows.swap(rank, pr);
            let pivot = rows[rank][col].clone();
            for r in rank + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let f = rows[r][col].clone();
                for j in col..width {
                    let a = &rows[r][j] * &pivot;
                    let b = &rows[rank][j] * &f;
                    rows[r][j] = a - b;
                }
            }
            rank += 1;
        }
        col += 1;
    }
    rank
}

fn d3_of_triple(
    alg: &GradedNilpotentAlgebra,
    triple: &[usize],
    wedge_index: &HashMap<(usize, usize), usize>,
    dim: usize,
) -> Vec<Int> {
    let mut row = vec![Int::zero(); dim];
    let (x, y, z) = (triple[0], triple[1], triple[2]);
    for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
        // [X_a, X_b] ∧ X_c
        for (m, cm) in alg.bracket(a, b) {
            if m == c {
                continue;
            }
            let (lo, hi, sign) = if m < c { (m, c, 1) } else { (c, m, -1) };
            if let Some(&idx) = wedge_index.get(&(lo, hi)) {
                row[idx] += Int::from(sign) * &cm;
            }
        }
    }
    row
}

/// Dimension of the degree-zero part of the second homology
/// `ker d2 / im d3` of the algebra, by exact rank computation.
pub fn h2_zero_dim(alg: &GradedNilpotentAlgebra) -> usize {
    let wedge2 = zero_weight_component(GradedSpace::Wedge2, alg);
    if wedge2.is_empty() {
        return 0;
    }
    let wedge_index: HashMap<(usize, usize), usize> =
        wedge2.iter().enumerate().map(|(k, pair)| ((pair[0], pair[1]), k)).collect();
    // d2 into the zero-weight part of the algebra
    let zero_basis: Vec<usize> =
        (0..alg.dim()).filter(|&i| alg.weights()[i].is_zero()).collect();
    let d2_rows: Vec<Vec<Int>> = wedge2
        .iter()
        .map(|pair| {
            let mut row = vec![Int::zero(); zero_basis.len().max(1)];
            for (k, c) in alg.bracket(pair[0], pair[1]) {
                if let Some(pos) = zero_basis.iter().position(|&z| z == k) {
                    row[pos] += c;
                }
            }
            row
        })
        .collect();
    let ker_dim = wedge2.len() - rank_int(d2_rows);

    let wedge3 = zero_weight_component(GradedSpace::Wedge3, alg);
    let d3_rows: Vec<Vec<Int>> = wedge3
        .iter()
        .map(|t| d3_of_triple(alg, t, &wedge_index, wedge2.len()))
        .collect();
    let im_dim = rank_int(d3_rows);
    ker_dim - im_dim
}

/// Dimension of the degree-zero part of `Sym^2` modulo the Killing-module
/// relations `[x,y]⊙z - [x,z]⊙y`.
pub fn kill_zero_dim(alg: &GradedNilpotentAlgebra) -> usize {
    let sym2 = zero_weight_component(GradedSpace::Sym2, alg);
    if sym2.is_empty() {
        return 0;
    }
    let sym_index: HashMap<(usize, usize), usize> =
        sym2.iter().enumerate().map(|(k, pair)| ((pair[0], pair[1]), k)).collect();
    let n = alg.dim();
    let w = alg.weights();
    let mut rel_rows: Vec<Vec<Int>> = Vec::new();
    // ordered triples with weight sum zero
    let mut by_weight: HashMap<&Weight, Vec<usize>> = HashMap::new();
    for (i, wi) in w.iter().enumerate() {
        by_weight.entry(wi).or_default().push(i);
    }
    for x in 0..n {
        for y in 0..n {
            let need = w[x].add(&w[y]).negate();
            let Some(zs) = by_weight.get(&need) else { continue };
            for &z in zs {
                let mut row = vec![Int::zero(); sym2.len()];
                let mut touched = false;
                for (m, cm) in alg.bracket(x, y) {
                    let key = (m.min(z), m.max(z));
                    if let Some(&idx) = sym_index.get(&key) {
                        row[idx] += &cm;
                        touched = true;
                    }
                }
                for (m, cm) in alg.bracket(x, z) {
                    let key = (m.min(y), m.max(y));
                    if let Some(&idx) = sym_index.get(&key) {
                        row[idx] -= &cm;
                        touched = true;
                    }
                }
                if touched {
                    rel_rows.push(row);
                }
            }
        }
    }
    sym2.len() - rank_int(rel_rows)
}

/// Chain property `d2 ∘ d3 = 0` on the degree-zero pieces, exactly.
pub fn chain_property_holds(alg: &GradedNilpotentAlgebra) -> bool {
    let wedge3 = zero_weight_component(GradedSpace::Wedge3, alg);
    for t in &wedge3 {
        // d2(d3(x∧y∧z)) = [[x,y],z] + [[y,z],x] + [[z,x],y]
        let mut total: HashMap<usize, Int> = HashMap::new();
        let (x, y, z) = (t[0], t[1], t[2]);
        for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
            for (m, cm) in alg.bracket(a, b) {
                for (q, cq) in alg.bracket(m, c) {
                    *total.entry(q).or_insert_with(Int::zero) += &cm * &cq;
                }
            }
        }
        if total.values().any(|c| !c.is_zero()) {
            return false;
        }
    }
    true
}

/// The solvable-group criterion report for a frame.
#[derive(Clone, Debug)]
pub struct DctReport {
    pub standard_solvable: bool,
    pub quasi_opposite_principal: bool,
    pub h2_0: usize,
    pub kill_0: usize,
    pub verdict: bool,
}

/// Weights of the abelianization `u/[u,u]` with their graded dimensions.
fn principal_weights(alg: &GradedNilpotentAlgebra) -> Vec<(Weight, usize)> {
    // [u, u] is spanned by all bracket images; group by weight
    let mut bracket_rows: HashMap<Weight, Vec<Vec<Int>>> = HashMap::new();
    let n = alg.dim();
    for i in 0..n {
        for j in i + 1..n {
            let b = alg.bracket(i, j);
            if b.is_empty() {
                continue;
            }
            let wsum = alg.weights()[i].add(&alg.weights()[j]);
            let mut row = vec![Int::zero(); n];
            for (k, c) in b {
                row[k] += c;
            }
            bracket_rows.entry(wsum).or_default().push(row);
        }
    }
    let mut dims: HashMap<Weight, usize> = HashMap::new();
    for w in alg.weights() {
        *dims.entry(w.clone()).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    for (w, d) in dims {
        let sub = bracket_rows.get(&w).map(|rows| rank_int(rows.clone())).unwrap_or(0);
        if d > sub {
            out.push((w, d - sub));
        }
    }
    out.sort();
    out
}

/// Evaluates the full criterion for a frame.
pub fn dct_report(frame: &SubgroupFrame) -> Result<DctReport> {
    let alg = build_algebra(frame)?;
    let principal = principal_weights(&alg);
    let standard_solvable = principal.iter().all(|(w, _)| !w.is_zero());
    let mut quasi_opposite = false;
    for (i, (a, _)) in principal.iter().enumerate() {
        for (b, _) in principal.iter().skip(i + 1) {
            if a.quasi_opposite(b) {
                quasi_opposite = true;
            }
        }
    }
    let h2_0 = h2_zero_dim(&alg);
    let kill_0 = kill_zero_dim(&alg);
    Ok(DctReport {
        standard_solvable,
        quasi_opposite_principal: quasi_opposite,
        h2_0,
        kill_0,
        verdict: standard_solvable && !quasi_opposite && h2_0 == 0 && kill_0 == 0,
    })
}

pub fn report_csv_header() -> &'static str {
    "s_size,t_size,dim,standard_solvable,quasi_opposite,h2_0,kill_0,verdict"
}

pub fn report_csv_row(frame: &SubgroupFrame, r: &DctReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        frame.s().len(),
        frame.t().len(),
        frame.s().len() * frame.t().len() + frame.s().len() * (frame.s().len() + 1) / 2,
        r.standard_solvable,
        r.quasi_opposite_principal,
        r.h2_0,
        r.kill_0,
        r.verdict
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(p: usize, s: &[(i8, usize)], t: &[usize]) -> SubgroupFrame {
        SubgroupFrame::from_indices(p, s, t).unwrap()
    }

    fn int(x: i64) -> Int {
        Int::from(x)
    }

    #[test]
    fn heisenberg_frame() {
        // S = {[1]}, T = {±2}: basis {X_{1-2}, X_{1+2}, X_{2·1}}, one bracket
        let f = frame(2, &[(1, 1)], &[2]);
        let alg = build_algebra(&f).unwrap();
        assert_eq!(alg.dim(), 3);
        let mut nonzero = 0;
        for i in 0..3 {
            for j in i + 1..3 {
                let b = alg.bracket(i, j);
                if !b.is_empty() {
                    nonzero += 1;
                    assert_eq!(b.len(), 1);
                    let (k, c) = &b[0];
                    assert!(alg.basis()[*k].is_long());
                    assert_eq!(c.abs(), int(2));
                }
            }
        }
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn abelian_frame_without_t() {
        let f = frame(2, &[(1, 1), (1, 2)], &[]);
        let alg = build_algebra(&f).unwrap();
        assert_eq!(alg.dim(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert!(alg.bracket(i, j).is_empty());
            }
        }
    }

    #[test]
    fn abelianization_weights_are_the_tensor_block() {
        let f = frame(3, &[(1, 1), (1, 2)], &[3]);
        let alg = build_algebra(&f).unwrap();
        let principal = principal_weights(&alg);
        // weights of u/[u,u] = {s - t}: #S * #T = 2 * 2 = 4 weights
        let expected: usize = 4;
        let total: usize = principal.iter().map(|(_, d)| d).sum();
        assert_eq!(total, expected);
        for (w, _) in &principal {
            assert!(!w.is_zero());
        }
    }

    #[test]
    fn zero_component_vanishes_off_four() {
        // #S = 3: no opposite weight pairs at all
        let f = frame(4, &[(1, 1), (1, 2), (1, 3)], &[4]);
        let alg = build_algebra(&f).unwrap();
        assert!(zero_weight_component(GradedSpace::Tensor2, &alg).is_empty());
        assert_eq!(h2_zero_dim(&alg), 0);
        assert_eq!(kill_zero_dim(&alg), 0);
    }

    #[test]
    fn four_s_pairing_structure() {
        // #S = 4, #T = 2: tensor-square zero part spanned by
        // X_{s1+s2} ⊗ X_{s3+s4} over pair partitions: 6 ordered, 3 wedge
        let f = frame(5, &[(1, 1), (1, 2), (1, 3), (1, 4)], &[5]);
        let alg = build_algebra(&f).unwrap();
        let t2 = zero_weight_component(GradedSpace::Tensor2, &alg);
        assert_eq!(t2.len(), 6);
        let w2 = zero_weight_component(GradedSpace::Wedge2, &alg);
        assert_eq!(w2.len(), 3);
        // the boundary identity kills them
        assert_eq!(h2_zero_dim(&alg), 0);
        assert_eq!(kill_zero_dim(&alg), 0);
        assert!(chain_property_holds(&alg));
    }

    #[test]
    fn explicit_boundary_identity_at_four() {
        // d3(X_{s1+t} ∧ X_{s2-t} ∧ X_{s3+s4}) is a nonzero multiple of
        // X_{s1+s2} ∧ X_{s3+s4}
        let f = frame(5, &[(1, 1), (1, 2), (1, 3), (1, 4)], &[5]);
        let alg = build_algebra(&f).unwrap();
        let p = 5;
        let find = |alpha: &Root| alg.basis().iter().position(|b| b == alpha).unwrap();
        let s1_t = find(&Root::short(HalfRoot::pos(1), HalfRoot::neg(5), p).unwrap()); // s1 + t
        let s2_mt = find(&Root::short(HalfRoot::pos(2), HalfRoot::pos(5), p).unwrap()); // s2 - t
        let s3s4 =
            find(&Root::from_halfroot_sum(HalfRoot::pos(3), HalfRoot::pos(4), p).unwrap());
        let s1s2 =
            find(&Root::from_halfroot_sum(HalfRoot::pos(1), HalfRoot::pos(2), p).unwrap());

        let wedge2 = zero_weight_component(GradedSpace::Wedge2, &alg);
        let wedge_index: HashMap<(usize, usize), usize> =
            wedge2.iter().enumerate().map(|(k, pr)| ((pr[0], pr[1]), k)).collect();
        let mut triple = vec![s1_t, s2_mt, s3s4];
        triple.sort();
        let row = d3_of_triple(&alg, &triple, &wedge_index, wedge2.len());
        let target = wedge_index[&(s1s2.min(s3s4), s1s2.max(s3s4))];
        assert!(!row[target].is_zero());
        // and the Killing relation likewise pairs the same classes
        assert_eq!(kill_zero_dim(&alg), 0);
    }

    #[test]
    fn small_frames_report_consistently() {
        // #S = 1: the determinant-one relation kills the whole S-part, so
        // X_{2s} has weight zero; Sym²-degree-0 is spanned by the two
        // classes X_{s-t}⊙X_{s+t} and X_{2s}⊙X_{2s}, and only the second
        // lies in the relation span.
        let f = frame(2, &[(1, 1)], &[2]);
        let alg = build_algebra(&f).unwrap();
        assert_eq!(zero_weight_component(GradedSpace::Sym2, &alg).len(), 2);
        assert_eq!(kill_zero_dim(&alg), 1);
        assert_eq!(h2_zero_dim(&alg), 0);

        // #S = 2, T = ∅: the weight of z_{s1} z_{s2} is zero, so zero IS a
        // principal weight and the verdict must be false
        let f = frame(2, &[(1, 1), (1, 2)], &[]);
        let rep = dct_report(&f).unwrap();
        assert!(!rep.standard_solvable);
        assert!(!rep.verdict);
    }

    #[test]
    fn verdict_true_on_the_hypothesis_range() {
        for s_size in 3..=4usize {
            for t_pairs in 1..=2usize {
                let p = s_size + t_pairs;
                let s: Vec<(i8, usize)> = (1..=s_size).map(|i| (1i8, i)).collect();
                let t: Vec<usize> = (s_size + 1..=p).collect();
                let f = frame(p, &s, &t);
                let rep = dct_report(&f).unwrap();
                assert!(rep.verdict, "verdict false at #S={s_size}, #T/2={t_pairs}");
                assert_eq!(rep.h2_0, 0);
                assert_eq!(rep.kill_0, 0);
            }
        }
    }

    #[test]
    fn mixed_sign_frame_builds() {
        let f = frame(4, &[(1, 1), (-1, 2), (1, 3)], &[4]);
        let alg = build_algebra(&f).unwrap();
        assert!(chain_property_holds(&alg));
        let rep = dct_report(&f).unwrap();
        assert!(rep.verdict);
    }

    #[test]
    fn quasi_opposite_detection() {
        let w1 = Weight {
            d_part: vec![Rat::from_integer(int(1)), Rat::from_integer(int(-1))],
            e_part: vec![int(2)],
        };
        let w2 = Weight {
            d_part: vec![Rat::from_integer(int(-2)), Rat::from_integer(int(2))],
            e_part: vec![int(-4)],
        };
        let w3 = Weight {
            d_part: vec![Rat::from_integer(int(2)), Rat::from_integer(int(-2))],
            e_part: vec![int(4)],
        };
        assert!(w1.quasi_opposite(&w2));
        assert!(!w1.quasi_opposite(&w3));
    }
}
