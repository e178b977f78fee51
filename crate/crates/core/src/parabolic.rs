//! Membership and block coordinates for the parabolic subgroup `P_{S,T}(Z)`
//! and its normal form: a word `d e n` with `d` a word for the `GL(S)`
//! block, `e` a shortcut-compressed word for the `Sp(T)` block, and `n` a
//! shortcut word for the unipotent part.

use num_traits::{One, Signed, Zero};

use crate::boundedgen::sp_decompose_short;
use crate::error::{Error, Result};
use crate::roots::{Root, SubgroupFrame};
use crate::shortcuts::{nilpotent_word, shortcut};
use crate::spmat::{Int, Mat, Rat};
use crate::unipotent::{ab_of, n_membership, sym_reading, u_of, uz_of, SymElem, TensorElem};
use crate::words::Word;

/// Exact membership in `P_{S,T}`: symplectic, preserves `R^S`, fixes every
/// basis vector outside `S ∪ -S ∪ T`.
pub fn parabolic_membership(m: &Mat<Int>, frame: &SubgroupFrame) -> Result<bool> {
    let p = frame.rank();
    if m.dim() != 2 * p {
        return Err(Error::InvalidInput("dimension mismatch with frame rank".into()));
    }
    if !m.is_symplectic()? {
        return Ok(false);
    }
    let s_rows: Vec<usize> = frame.s_list().iter().map(|s| s.row(p)).collect();
    for &s in &frame.s_list() {
        let c = s.row(p);
        for r in 0..2 * p {
            if !m.at(r, c).is_zero() && !s_rows.contains(&r) {
                return Ok(false);
            }
        }
    }
    for h in frame.free_halfroots() {
        let c = h.row(p);
        for r in 0..2 * p {
            let expect = if r == c { Int::one() } else { Int::zero() };
            if m.at(r, c) != &expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The exact factorization `M = gl · sp · u(V) · u_Z(q)` of a parabolic
/// element, with `u` the balanced section (so `q` may have halves).
#[derive(Clone, Debug)]
pub struct BlockSplit {
    pub gl_part: Mat<Int>,
    pub sp_part: Mat<Int>,
    pub n_tensor: TensorElem,
    pub n_sym: SymElem,
}

impl BlockSplit {
    /// Reassembles the product; equals the source matrix exactly.
    pub fn reassemble(&self) -> Mat<Rat> {
        self.gl_part
            .to_rational()
            .mul(&self.sp_part.to_rational())
            .mul(&u_of(&self.n_tensor))
            .mul(&uz_of(&self.n_sym))
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"gl\":{},\"sp\":{},\"n_tensor\":{},\"n_sym\":{}}}",
            crate::spmat::to_json(&self.gl_part),
            crate::spmat::to_json(&self.sp_part),
            self.n_tensor.to_json(),
            self.n_sym.to_json()
        )
    }
}

/// Embeds the `S`-block action of `m` as a `GL(S)` element: the `(S, S)`
/// and `(-S, -S)` blocks of a parabolic element are exactly the blocks of
/// its `GL(S)` factor, so they are read off directly.
fn gl_projection(m: &Mat<Int>, frame: &SubgroupFrame) -> Result<Mat<Int>> {
    let p = frame.rank();
    let s_list = frame.s_list();
    let mut out = Mat::identity(2 * p);
    for &si in &s_list {
        for &sj in &s_list {
            out.set(si.row(p), sj.row(p), m.at(si.row(p), sj.row(p)).clone());
            out.set(
                si.negate().row(p),
                sj.negate().row(p),
                m.at(si.negate().row(p), sj.negate().row(p)).clone(),
            );
        }
    }
    if !out.is_symplectic()? {
        return Err(Error::Invariant("extracted GL block is not symplectic".into()));
    }
    Ok(out)
}

/// Embeds the `T`-block action of `m` as an `Sp(T)` element.
fn sp_projection(m: &Mat<Int>, frame: &SubgroupFrame) -> Mat<Int> {
    let p = frame.rank();
    let mut out = Mat::identity(2 * p);
    for &a in &frame.t_list() {
        for &b in &frame.t_list() {
            let v = m.at(a.row(p), b.row(p)).clone();
            out.set(a.row(p), b.row(p), v);
        }
    }
    out
}

/// Splits a parabolic element into its diagonal blocks and unipotent
/// coordinates.
pub fn project_blocks(m: &Mat<Int>, frame: &SubgroupFrame) -> Result<BlockSplit> {
    if !parabolic_membership(m, frame)? {
        return Err(Error::Domain("matrix is not in P_{S,T}".into()));
    }
    let gl_part = gl_projection(m, frame)?;
    let sp_part = sp_projection(m, frame);
    let n = sp_part.sp_inverse().mul(&gl_part.sp_inverse()).mul(m);
    if !n_membership(&n, frame)? {
        return Err(Error::Invariant("unipotent part is not in N_{S,T}".into()));
    }
    let n_tensor = ab_of(&n, frame)?;
    let residual = u_of(&n_tensor).sp_inverse().mul(&n.to_rational());
    if !crate::unipotent::z_membership(&residual, frame)? {
        return Err(Error::Invariant("central residual is not in Z_S".into()));
    }
    let n_sym = sym_reading(&residual, frame);
    let split = BlockSplit { gl_part, sp_part, n_tensor, n_sym };
    if split.reassemble() != m.to_rational() {
        return Err(Error::Invariant("block split does not reassemble".into()));
    }
    Ok(split)
}

/// Word in `ΦGL(S)` letters for a matrix of `GL(S)` acting on `R^S` with
/// determinant 1, by integer row reduction; errors on determinant -1
/// (outside the subgroup generated by the elementary letters).
pub fn gl_word_factors(gl: &Mat<Int>, frame: &SubgroupFrame) -> Result<Vec<(Root, Int)>> {
    let p = frame.rank();
    let s_list = frame.s_list();
    let k = s_list.len();
    let mut b = vec![vec![Int::zero(); k]; k];
    for (i, &si) in s_list.iter().enumerate() {
        for (j, &sj) in s_list.iter().enumerate() {
            b[i][j] = gl.at(si.row(p), sj.row(p)).clone();
        }
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    // row ops: add x * row j to row i, recorded as left factors
    let mut left: Vec<(usize, usize, Int)> = Vec::new();
    let mut w = b;
    let addrow = |w: &mut Vec<Vec<Int>>, i: usize, j: usize, x: &Int, left: &mut Vec<(usize, usize, Int)>| {
        if x.is_zero() {
            return;
        }
        for col in 0..k {
            let add = x * &w[j][col];
            w[i][col] += add;
        }
        left.push((i, j, x.clone()));
    };
    for col in 0..k {
        // Euclid over rows col..k: each column of the trailing unimodular
        // block is primitive, so the running gcd reaches ±1.
        loop {
            let nz: Vec<usize> = (col..k).filter(|&r| !w[r][col].is_zero()).collect();
            match nz.as_slice() {
                [] => return Err(Error::Domain("singular S-block".into())),
                [r] if *r == col => break,
                [r] => {
                    // lone pivot below the diagonal: move it up, then clear it
                    let r = *r;
                    addrow(&mut w, col, r, &Int::one(), &mut left);
                    let q = &w[r][col] / &w[col][col];
                    addrow(&mut w, r, col, &-q, &mut left);
                }
                _ => {
                    let rmin = nz
                        .iter()
                        .copied()
                        .min_by_key(|&r| w[r][col].abs())
                        .unwrap();
                    for &r in &nz {
                        if r == rmin {
                            continue;
                        }
                        let q = num_integer::Integer::div_floor(&w[r][col], &w[rmin][col]);
                        addrow(&mut w, r, rmin, &-q, &mut left);
                    }
                }
            }
        }
        if w[col][col].abs() != Int::one() {
            return Err(Error::Invariant("pivot is not a unit".into()));
        }
        // clear the column above the pivot (below is already clear)
        for r in 0..col {
            if w[r][col].is_zero() {
                continue;
            }
            let q = &w[r][col] / &w[col][col];
            addrow(&mut w, r, col, &-q, &mut left);
        }
    }
    // now w is upper triangular with ±1 diagonal; the off-diagonal part is
    // empty because every column got fully cleared
    let minus: Vec<usize> = (0..k).filter(|&i| w[i][i] == Int::from(-1)).collect();
    if minus.len() % 2 != 0 {
        return Err(Error::Unsupported(
            "GL part has determinant -1; not a word in the elementary letters".into(),
        ));
    }
    for pair in minus.chunks(2) {
        let (i, j) = (pair[0], pair[1]);
        // multiply by -I on the (i, j) plane: (E_ij(1) E_ji(-1) E_ij(1))^2
        for _ in 0..2 {
            addrow(&mut w, i, j, &Int::one(), &mut left);
            addrow(&mut w, j, i, &-Int::one(), &mut left);
            addrow(&mut w, i, j, &Int::one(), &mut left);
        }
    }
    for i in 0..k {
        for j in 0..k {
            let expect = if i == j { Int::one() } else { Int::zero() };
            if w[i][j] != expect {
                return Err(Error::Invariant("reduction did not reach the identity".into()));
            }
        }
    }
    // L_m .. L_1 B = I  =>  B = L_1^{-1} .. L_m^{-1} in word order.
    let mut factors = Vec::new();
    for (i, j, x) in left {
        let (root, unit) = crate::spmat::transvection(p, s_list[i], s_list[j])?;
        factors.push((root, -Int::from(unit) * x));
    }
    let mut prod = Mat::identity(2 * p);
    for (r, x) in &factors {
        crate::spmat::apply_letter_right(&mut prod, r, x);
    }
    if &prod != gl {
        return Err(Error::Invariant("GL word does not reconstruct the block".into()));
    }
    Ok(factors)
}

/// Report accompanying a normal-form word.
#[derive(Debug)]
pub struct OmegaReport {
    pub split: BlockSplit,
    pub word: Word,
    pub gl_len: usize,
    pub sp_len: usize,
    pub n_len: usize,
}

/// The normal form `Ω(M) = d e n`: `d` realizes the `GL(S)` block (shortcut
/// compressed factor by factor), `e` the `Sp(T)` block through the bounded
/// generation decomposition, and `n` the unipotent part. The word evaluates
/// to `M` exactly; an unusable `GL` block is an explicit error, never a
/// wrong word.
pub fn omega_normal_form(m: &Mat<Int>, frame: &SubgroupFrame) -> Result<OmegaReport> {
    let p = frame.rank();
    let split = project_blocks(m, frame)?;

    let mut d = Word::empty(p);
    if !split.gl_part.is_identity() {
        for (root, x) in gl_word_factors(&split.gl_part, frame)? {
            d = d.concat(&shortcut(&root, &x)?.word);
        }
    }

    let mut e = Word::empty(p);
    if !split.sp_part.is_identity() {
        let t_idx: Vec<usize> = frame.t_plus().iter().map(|h| h.index()).collect();
        let t_frame = SubgroupFrame::from_indices(p, &[], &t_idx)?;
        let (_, word) = sp_decompose_short(&split.sp_part, &t_frame)?;
        e = word;
    }

    let n = split.sp_part.sp_inverse().mul(&split.gl_part.sp_inverse()).mul(m);
    let n_word = nilpotent_word(&n, frame)?;

    let word = d.concat(&e).concat(&n_word);
    if &word.evaluate() != m {
        return Err(Error::Invariant("normal form word does not evaluate to the input".into()));
    }
    Ok(OmegaReport {
        gl_len: d.len(),
        sp_len: e.len(),
        n_len: n_word.len(),
        split,
        word,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{phi_set, HalfRoot, PhiKind};
    use crate::spmat::{apply_letter_right, elementary};
    use crate::unipotent::u_product;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn hr(sign: i8, idx: usize) -> HalfRoot {
        HalfRoot::new(sign, idx).unwrap()
    }

    fn int(x: i64) -> Int {
        Int::from(x)
    }

    fn frame_1_23() -> SubgroupFrame {
        SubgroupFrame::from_indices(3, &[(1, 1)], &[2, 3]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let f = frame_1_23();
        let p = 3;
        // e_{[1]-[2]}(7) is in P
        let inside = elementary(p, &Root::short(hr(1, 1), hr(1, 2), p).unwrap(), &int(7));
        assert!(parabolic_membership(&inside, &f).unwrap());
        // identity always
        assert!(parabolic_membership(&Mat::identity(2 * p), &f).unwrap());
        // e_{[2]-[1]} moves R^S out of itself
        let outside = elementary(p, &Root::short(hr(1, 2), hr(1, 1), p).unwrap(), &int(1));
        assert!(!parabolic_membership(&outside, &f).unwrap());
    }

    fn random_parabolic(rng: &mut ChaCha8Rng, frame: &SubgroupFrame) -> Mat<Int> {
        let p = frame.rank();
        let mut m = Mat::<Int>::identity(2 * p);
        let roots: Vec<Root> = phi_set(PhiKind::P, frame).into_iter().collect();
        for _ in 0..12 {
            let alpha = roots.choose(rng).unwrap();
            apply_letter_right(&mut m, alpha, &int(rng.gen_range(-3..=3)));
        }
        m
    }

    #[test]
    fn split_reassembles_for_random_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for frame in [
            frame_1_23(),
            SubgroupFrame::from_indices(3, &[(1, 1), (-1, 2)], &[3]).unwrap(),
            SubgroupFrame::from_indices(4, &[(1, 1), (1, 2)], &[3, 4]).unwrap(),
        ] {
            for _ in 0..10 {
                let m = random_parabolic(&mut rng, &frame);
                assert!(parabolic_membership(&m, &frame).unwrap());
                let split = project_blocks(&m, &frame).unwrap();
                assert_eq!(split.reassemble(), m.to_rational());
                // gl acts trivially on R^T, sp on R^{S ∪ -S}
                assert!(crate::unipotent::gl_membership(&split.gl_part, &frame).unwrap());
                assert!(crate::unipotent::sp_block_membership(&split.sp_part, &frame).unwrap());
            }
        }
    }

    #[test]
    fn split_of_pure_parts() {
        let f = frame_1_23();
        let p = 3;
        // sp-only matrix
        let m = elementary(p, &Root::short(hr(1, 2), hr(1, 3), p).unwrap(), &int(3));
        let split = project_blocks(&m, &f).unwrap();
        assert!(split.gl_part.is_identity());
        assert!(split.n_tensor.is_zero());
        assert!(split.n_sym.is_zero());
        assert_eq!(split.sp_part, m);

        // u-only matrix
        let mut v = TensorElem::zero(&f);
        v.set(hr(1, 1), hr(1, 2), int(2)).unwrap();
        let m = u_product(&v);
        let split = project_blocks(&m, &f).unwrap();
        assert!(split.gl_part.is_identity());
        assert!(split.sp_part.is_identity());
        assert_eq!(split.n_tensor, v);
    }

    #[test]
    fn displayed_mixed_example() {
        // M = e_{[2]-[3]}(3) e_{[1]-[2]}(2) e_{2[1]}(5) with S={[1]}, T={±2,±3}
        let f = frame_1_23();
        let p = 3;
        let m = elementary(p, &Root::short(hr(1, 2), hr(1, 3), p).unwrap(), &int(3))
            .mul(&elementary(p, &Root::short(hr(1, 1), hr(1, 2), p).unwrap(), &int(2)))
            .mul(&elementary(p, &Root::long(hr(1, 1), p).unwrap(), &int(5)));
        let split = project_blocks(&m, &f).unwrap();
        assert!(split.gl_part.is_identity());
        assert_eq!(
            split.sp_part,
            elementary(p, &Root::short(hr(1, 2), hr(1, 3), p).unwrap(), &int(3))
        );
        // the tensor part is 2 z_[1] ⊗ z_[2] ... conjugated through sp_part:
        // reassembly is the binding check
        assert_eq!(split.reassemble(), m.to_rational());
    }

    #[test]
    fn gl_word_reconstructs_random_sl() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let frame = SubgroupFrame::from_indices(4, &[(1, 1), (1, 2), (-1, 3)], &[]).unwrap();
        let p = frame.rank();
        let roots: Vec<Root> = phi_set(PhiKind::Gl, &frame).into_iter().collect();
        for _ in 0..15 {
            let mut m = Mat::<Int>::identity(2 * p);
            for _ in 0..10 {
                let alpha = roots.choose(&mut rng).unwrap();
                apply_letter_right(&mut m, alpha, &int(rng.gen_range(-4..=4)));
            }
            let factors = gl_word_factors(&m, &frame).unwrap();
            let mut prod = Mat::<Int>::identity(2 * p);
            for (r, x) in &factors {
                apply_letter_right(&mut prod, r, x);
            }
            assert_eq!(prod, m);
        }
    }

    #[test]
    fn omega_evaluates_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for frame in [frame_1_23(), SubgroupFrame::from_indices(4, &[(1, 1), (1, 2)], &[3, 4]).unwrap()]
        {
            for _ in 0..6 {
                let m = random_parabolic(&mut rng, &frame);
                let rep = omega_normal_form(&m, &frame).unwrap();
                assert_eq!(rep.word.evaluate(), m);
            }
        }
    }

    #[test]
    fn omega_of_identity_is_empty() {
        let f = frame_1_23();
        let rep = omega_normal_form(&Mat::identity(6), &f).unwrap();
        assert!(rep.word.is_empty());
    }

    #[test]
    fn omega_large_unipotent_is_short() {
        let f = frame_1_23();
        let p = 3;
        let x: Int = int(1_000_000);
        let m = elementary(p, &Root::short(hr(1, 1), hr(1, 2), p).unwrap(), &x);
        let rep = omega_normal_form(&m, &f).unwrap();
        assert_eq!(rep.word.evaluate(), m);
        assert!(rep.word.len() <= 400, "length {}", rep.word.len());
    }

    #[test]
    fn omega_rejects_nonmembers() {
        let f = frame_1_23();
        let p = 3;
        let outside = elementary(p, &Root::short(hr(1, 2), hr(1, 1), p).unwrap(), &int(1));
        assert!(omega_normal_form(&outside, &f).is_err());
    }

    #[test]
    fn gl_determinant_minus_one_is_unsupported() {
        // swap-with-sign on S = {[1],[2]} has det -1 on R^S
        let frame = SubgroupFrame::from_indices(3, &[(1, 1), (1, 2)], &[]).unwrap();
        let p = 3;
        let mut m = Mat::<Int>::identity(2 * p);
        // z1 -> z2, z2 -> z1, dual likewise: symplectic, det -1 on the block
        m.set(0, 0, int(0));
        m.set(1, 1, int(0));
        m.set(0, 1, int(1));
        m.set(1, 0, int(1));
        m.set(3, 3, int(0));
        m.set(4, 4, int(0));
        m.set(3, 4, int(1));
        m.set(4, 3, int(1));
        assert!(m.is_symplectic().unwrap());
        assert!(parabolic_membership(&m, &frame).unwrap());
        match omega_normal_form(&m, &frame) {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected unsupported case, got {other:?}"),
        }
    }
}
