//! Words of length `O(log|x|)` representing `e_alpha(x)`.
//!
//! The engine is a radix expansion of the coefficient along a hyperbolic
//! integer matrix: conjugating a unipotent coordinate block by the
//! `[[2,1],[1,1]]` generator of a diagonalizable abelian subgroup multiplies
//! the coordinates by a fixed hyperbolic base, so bounded digit vectors
//! interleaved with conjugation letters reach exponentially large
//! coefficients. Three word shapes cover every root:
//!
//! * short roots at rank >= 3: digits live in an abelian two-column slice
//!   `z_s ⊗ span(z_t, z_aux)` of an isotropic triple, the ladder is exact;
//! * short roots at rank 2: digits live in the symplectic slice
//!   `z_s ⊗ span(z_t, z_{-t})`, the ladder picks up a central `e_{2s}`
//!   defect, which a commutator word cancels exactly;
//! * long roots: the commutator `[he_{s-t}(x/2), he_{s+t}(1)]` with one
//!   parity letter; central defects of the halves cancel in the commutator.
//!
//! All eigenvalue comparisons are done in `Z[√d]`, never in floating point.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::roots::{HalfRoot, Root, RootKind, SubgroupFrame};
use crate::spmat::{elementary, Int, Mat};
use crate::unipotent::{u_product, TensorElem};
use crate::words::{commutator_factors, Letter, Word};

// ---------------------------------------------------------------------------
// Exact arithmetic in Z[√d]
// ---------------------------------------------------------------------------

/// Sign of `p + q √d` for non-square `d > 0`.
fn quad_sign(p: &Int, q: &Int, d: u64) -> i32 {
    use std::cmp::Ordering::*;
    let (sp, sq) = (p.sign(), q.sign());
    if sq == num_bigint::Sign::NoSign {
        return match sp {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        };
    }
    if sp == num_bigint::Sign::NoSign {
        return if sq == num_bigint::Sign::Plus { 1 } else { -1 };
    }
    if sp == sq {
        return if sp == num_bigint::Sign::Plus { 1 } else { -1 };
    }
    // opposite signs: compare p^2 with q^2 d
    let p2 = p * p;
    let q2d = q * q * Int::from(d);
    match p2.cmp(&q2d) {
        Equal => 0,
        Greater => {
            if sp == num_bigint::Sign::Plus {
                1
            } else {
                -1
            }
        }
        Less => {
            if sq == num_bigint::Sign::Plus {
                1
            } else {
                -1
            }
        }
    }
}

/// Compares `|p1 + q1 √d|` against `|p2 + q2 √d|`.
fn quad_cmp_abs(p1: &Int, q1: &Int, p2: &Int, q2: &Int, d: u64) -> std::cmp::Ordering {
    // |x| <= |y|  <=>  x^2 <= y^2; squares are again in Z[√d]
    let a = p1 * p1 + q1 * q1 * Int::from(d);
    let b = Int::from(2) * p1 * q1;
    let c = p2 * p2 + q2 * q2 * Int::from(d);
    let e = Int::from(2) * p2 * q2;
    match quad_sign(&(a - c), &(b - e), d) {
        1 => std::cmp::Ordering::Greater,
        -1 => std::cmp::Ordering::Less,
        _ => std::cmp::Ordering::Equal,
    }
}

/// `|p + q √d| <= k` for integer `k >= 0`.
fn quad_abs_le_int(p: &Int, q: &Int, k: i64, d: u64) -> bool {
    let kk = Int::from(k);
    quad_cmp_abs(p, q, &kk, &Int::zero(), d) != std::cmp::Ordering::Greater
}

// ---------------------------------------------------------------------------
// Hyperbolic base and radix expansion
// ---------------------------------------------------------------------------

/// A `2x2` integer matrix with determinant 1 and trace at least 3: both
/// eigenvalues are real, positive, and distinct.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct HyperbolicBase {
    m: [[i64; 2]; 2],
}

impl Default for HyperbolicBase {
    fn default() -> Self {
        HyperbolicBase { m: [[2, 1], [1, 1]] }
    }
}

impl HyperbolicBase {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let tr = m[0][0] + m[1][1];
        if det != 1 || tr < 3 {
            return Err(Error::InvalidInput(format!(
                "hyperbolic base needs det 1 and trace >= 3, got det {det}, trace {tr}"
            )));
        }
        Ok(HyperbolicBase { m })
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.m
    }

    fn trace(&self) -> i64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Discriminant `tr^2 - 4` of the characteristic polynomial.
    fn disc(&self) -> u64 {
        (self.trace() * self.trace() - 4) as u64
    }

    fn apply(&self, v: &[Int; 2]) -> [Int; 2] {
        [
            Int::from(self.m[0][0]) * &v[0] + Int::from(self.m[0][1]) * &v[1],
            Int::from(self.m[1][0]) * &v[0] + Int::from(self.m[1][1]) * &v[1],
        ]
    }

    fn apply_inv(&self, v: &[Int; 2]) -> [Int; 2] {
        // inverse of a det-1 matrix
        [
            Int::from(self.m[1][1]) * &v[0] - Int::from(self.m[0][1]) * &v[1],
            -Int::from(self.m[1][0]) * &v[0] + Int::from(self.m[0][0]) * &v[1],
        ]
    }

    fn apply_i64(&self, v: [i64; 2]) -> [i64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// The covector `w` with `w ∘ A = λ_- w`, scaled to integer entries in
    /// `Z[√d]`: `w = (tr - 2a + √d, -2b)`. Its pairing with `v` measures the
    /// component of `v` along the contracting eigendirection, the one a
    /// nonnegative-power digit expansion cannot reach when large.
    fn y_pairing(&self, v: &[Int; 2]) -> (Int, Int) {
        let a = Int::from(self.trace() - 2 * self.m[0][0]);
        let b = Int::from(-2 * self.m[0][1]);
        (a * &v[0] + b * &v[1], v[0].clone())
    }
}

/// Digits of a two-sided expansion `v = Σ_j A^{offset+j} r_j` with
/// `max |r_j| <= digit_bound`.
#[derive(Clone, Debug)]
pub struct RadixExpansion {
    pub offset: i64,
    pub digits: Vec<[i64; 2]>,
}

impl RadixExpansion {
    /// Total step count: emitted digits plus the normalizing offset.
    pub fn steps(&self) -> usize {
        self.digits.len() + self.offset.unsigned_abs() as usize
    }

    /// Exact reconstruction `Σ_j A^{offset+j} r_j` (checked in tests).
    pub fn reconstruct(&self, base: &HyperbolicBase) -> [Int; 2] {
        // Horner from the top digit down, then shift by the offset.
        let mut acc = [Int::zero(), Int::zero()];
        for r in self.digits.iter().rev() {
            acc = base.apply(&acc);
            acc[0] += Int::from(r[0]);
            acc[1] += Int::from(r[1]);
        }
        let mut k = self.offset;
        while k > 0 {
            acc = base.apply(&acc);
            k -= 1;
        }
        while k < 0 {
            acc = base.apply_inv(&acc);
            k += 1;
        }
        acc
    }
}

/// Reachability table for the bounded tail states: for every small vector
/// expandable with nonnegative powers, the first digit of a shortest
/// expansion.
struct TailTable {
    first: HashMap<(i64, i64), [i64; 2]>,
}

const TAIL_ENTER: i64 = 12;
const TAIL_BALL: i64 = 64;

fn tail_table(base: &HyperbolicBase, bound: i64) -> Arc<TailTable> {
    static TABLES: OnceLock<Mutex<HashMap<([[i64; 2]; 2], i64), Arc<TailTable>>>> =
        OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().unwrap();
    if let Some(t) = guard.get(&(base.m, bound)) {
        return t.clone();
    }
    let mut first = HashMap::new();
    let mut frontier = vec![(0i64, 0i64)];
    let mut seen: std::collections::HashSet<(i64, i64)> = frontier.iter().copied().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &(x, y) in &frontier {
            let au = base.apply_i64([x, y]);
            for r0 in -bound..=bound {
                for r1 in -bound..=bound {
                    let v = (au[0] + r0, au[1] + r1);
                    if v.0.abs() > TAIL_BALL || v.1.abs() > TAIL_BALL {
                        continue;
                    }
                    if seen.insert(v) {
                        first.insert(v, [r0, r1]);
                        next.push(v);
                    }
                }
            }
        }
        frontier = next;
    }
    let t = Arc::new(TailTable { first });
    guard.insert((base.m, bound), t.clone());
    t
}

/// Expands `v` in base `A` with digits bounded by `digit_bound`, greedily
/// minimizing the contracting-eigendirection component of `A^{-1}(v - r)` at
/// each step. The offset (negative powers of `A`) first brings that
/// component into the digit window; without it, vectors outside an `O(1)`
/// strip have no bounded-digit expansion at all.
pub fn radix_expand(
    v: &[Int; 2],
    base: &HyperbolicBase,
    digit_bound: i64,
    step_cap: usize,
) -> Result<RadixExpansion> {
    if digit_bound < 2 {
        return Err(Error::InvalidInput("digit bound must be at least 2".into()));
    }
    if v[0].is_zero() && v[1].is_zero() {
        return Ok(RadixExpansion { offset: 0, digits: Vec::new() });
    }
    let d = base.disc();
    let mut cur = v.clone();
    let mut offset = 0i64;
    let mut steps = 0usize;
    // Normalize: shrink the contracting-direction pairing into the window
    // covered by the digit set.
    loop {
        let (yp, yq) = base.y_pairing(&cur);
        if quad_abs_le_int(&yp, &yq, 2 * digit_bound, d) {
            break;
        }
        cur = base.apply(&cur);
        offset -= 1;
        steps += 1;
        if steps > step_cap {
            return Err(Error::Budget("radix normalization exceeded the step cap".into()));
        }
    }

    let table = tail_table(base, digit_bound);
    let mut digits: Vec<[i64; 2]> = Vec::new();
    loop {
        if cur[0].is_zero() && cur[1].is_zero() {
            break;
        }
        // Bounded tail: finish with a table-driven shortest expansion.
        if let (Some(x), Some(y)) = (i64::try_from(&cur[0]).ok(), i64::try_from(&cur[1]).ok()) {
            if x.abs() <= TAIL_ENTER && y.abs() <= TAIL_ENTER && table.first.contains_key(&(x, y))
            {
                let mut state = (x, y);
                while state != (0, 0) {
                    let r = table.first[&state];
                    digits.push(r);
                    let u = base.apply_inv(&[Int::from(state.0 - r[0]), Int::from(state.1 - r[1])]);
                    state = (
                        i64::try_from(&u[0]).expect("tail state fits i64"),
                        i64::try_from(&u[1]).expect("tail state fits i64"),
                    );
                }
                break;
            }
        }
        // Greedy digit: minimize the contracting pairing of the remainder,
        // then the sup-norm of the next state, then lexicographic.
        let mut best: Option<([i64; 2], [Int; 2], (Int, Int))> = None;
        for r0 in -digit_bound..=digit_bound {
            for r1 in -digit_bound..=digit_bound {
                let rem = [&cur[0] - Int::from(r0), &cur[1] - Int::from(r1)];
                let nxt = base.apply_inv(&rem);
                let ypair = base.y_pairing(&nxt);
                let better = match &best {
                    None => true,
                    Some((_, bnxt, by)) => {
                        match quad_cmp_abs(&ypair.0, &ypair.1, &by.0, &by.1, d) {
                            std::cmp::Ordering::Less => true,
                            std::cmp::Ordering::Greater => false,
                            std::cmp::Ordering::Equal => {
                                let n1 = nxt[0].abs().max(nxt[1].abs());
                                let n2 = bnxt[0].abs().max(bnxt[1].abs());
                                n1 < n2
                            }
                        }
                    }
                };
                if better {
                    best = Some(([r0, r1], nxt, ypair));
                }
            }
        }
        let (digit, nxt, _) = best.expect("digit set is nonempty");
        digits.push(digit);
        cur = nxt;
        steps += 1;
        if steps > step_cap {
            return Err(Error::Budget(
                "radix expansion exceeded the step cap; digit set assumption falsified".into(),
            ));
        }
    }
    Ok(RadixExpansion { offset, digits })
}

// ---------------------------------------------------------------------------
// Shortcut plans
// ---------------------------------------------------------------------------

/// Which word shape a plan used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShortcutVariant {
    /// Literal letter expansion, for small coefficients.
    Literal,
    /// Abelian two-column ladder in an isotropic triple `{s, t, aux}`.
    ShortRoot { s: HalfRoot, t: HalfRoot, aux: HalfRoot },
    /// Symplectic-slice ladder plus commutator fixup, rank 2 only.
    SpecialShort { s: HalfRoot, t: HalfRoot },
    /// Commutator of two short-root shortcuts plus a parity letter.
    LongRoot { s: HalfRoot, t: HalfRoot, special: bool },
}

/// A shortcut word together with its construction data.
#[derive(Clone, Debug)]
pub struct ShortcutPlan {
    pub root: Root,
    pub x: Int,
    pub variant: ShortcutVariant,
    pub word: Word,
    pub expansion: Option<RadixExpansion>,
}

impl ShortcutPlan {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    /// JSON sidecar: variant, digits, measured length.
    pub fn to_json(&self) -> String {
        let digits = match &self.expansion {
            None => "null".to_string(),
            Some(e) => {
                let ds: Vec<String> =
                    e.digits.iter().map(|r| format!("[{},{}]", r[0], r[1])).collect();
                format!("{{\"offset\":{},\"digits\":[{}]}}", e.offset, ds.join(","))
            }
        };
        format!(
            "{{\"root\":\"{}\",\"x\":\"{}\",\"variant\":\"{:?}\",\"length\":{},\"expansion\":{}}}",
            self.root, self.x, self.variant, self.word.len(), digits
        )
    }
}

const LITERAL_MAX: i64 = 4;

fn smallest_free_index(p: usize, used: &[usize]) -> Option<usize> {
    (1..=p).find(|i| !used.contains(i))
}

/// A ladder context: two coordinate slots on the `z_s` row, unit-corrected
/// letters writing into them, and a word `h` whose conjugation action on the
/// slot coordinates is a hyperbolic base.
struct LadderSpec {
    p: usize,
    s: HalfRoot,
    slot_a: HalfRoot,
    slot_b: HalfRoot,
    root_a: Root,
    unit_a: i8,
    root_b: Root,
    unit_b: i8,
    h: Word,
    base: HyperbolicBase,
}

impl LadderSpec {
    fn build(p: usize, s: HalfRoot, slot_a: HalfRoot, slot_b: HalfRoot) -> Result<Self> {
        let (root_a, unit_a) = crate::spmat::transvection(p, s, slot_a)?;
        let (root_b, unit_b) = crate::spmat::transvection(p, s, slot_b)?;
        // h acts as [[2,1],[1,1]] on (z_{slot_a}, z_{slot_b}).
        let (ga, ua) = crate::spmat::transvection(p, slot_a, slot_b)?;
        let (gb, ub) = crate::spmat::transvection(p, slot_b, slot_a)?;
        let h = Word::from_letters(p, vec![Letter::new(ga, ua), Letter::new(gb, ub)]);
        let mut spec = LadderSpec {
            p,
            s,
            slot_a,
            slot_b,
            root_a,
            unit_a,
            root_b,
            unit_b,
            h,
            base: HyperbolicBase::default(),
        };
        spec.base = spec.conj_action()?;
        Ok(spec)
    }

    /// Abelian slice `z_s ⊗ span(z_t, z_aux)` inside the isotropic triple
    /// `{s, t, aux}`; conjugation by the GL-block hyperbolic on `(t, aux)`.
    /// Digit words commute and the ladder is exact.
    fn isotropic(p: usize, s: HalfRoot, t: HalfRoot, aux: HalfRoot) -> Result<Self> {
        LadderSpec::build(p, s, t, aux)
    }

    /// Symplectic slice `z_s ⊗ span(z_t, z_{-t})`; conjugation by the
    /// hyperbolic in the rank-one symplectic block on `{±t}`. Products of
    /// digit words carry central `e_{2s}` defects.
    fn symplectic(p: usize, s: HalfRoot, t: HalfRoot) -> Result<Self> {
        LadderSpec::build(p, s, t, t.negate())
    }

    fn coords(&self, m: &Mat<Int>) -> [Int; 2] {
        let sr = self.s.row(self.p);
        [
            m.at(sr, self.slot_a.row(self.p)).clone(),
            m.at(sr, self.slot_b.row(self.p)).clone(),
        ]
    }

    /// Word with slot coordinates exactly `r` (commuting letter blocks).
    fn digit_word(&self, r: &[i64; 2]) -> Word {
        Word::power(self.p, &self.root_a, &Int::from(r[0] * self.unit_a as i64))
            .concat(&Word::power(self.p, &self.root_b, &Int::from(r[1] * self.unit_b as i64)))
    }

    /// The matrix `F` with `coords(h M h^{-1}) = F coords(M)` on the slice,
    /// read off the conjugates of the two unit digit words.
    fn conj_action(&self) -> Result<HyperbolicBase> {
        let he = self.h.evaluate();
        let hinv = he.sp_inverse();
        let mut cols = Vec::new();
        for r in [[1i64, 0], [0, 1]] {
            let conj = he.mul(&self.digit_word(&r).evaluate()).mul(&hinv);
            cols.push(self.coords(&conj));
        }
        let to_i64 = |x: &Int| -> Result<i64> {
            i64::try_from(x)
                .map_err(|_| Error::Invariant("conjugation action overflows i64".into()))
        };
        HyperbolicBase::new([
            [to_i64(&cols[0][0])?, to_i64(&cols[1][0])?],
            [to_i64(&cols[0][1])?, to_i64(&cols[1][1])?],
        ])
    }

    /// Assembles `h^o D(r_0) h D(r_1) h ... D(r_k) h^{-(o+k)}`, which
    /// evaluates to the product of the `h^{o+j} D(r_j) h^{-(o+j)}`, i.e. to
    /// the element with slot coordinates `Σ F^{o+j} r_j`.
    fn ladder_word(&self, exp: &RadixExpansion) -> Word {
        let p = self.p;
        let h_pow = |n: i64| -> Word {
            let block = if n >= 0 { self.h.clone() } else { self.h.inverse() };
            let mut out = Word::empty(p);
            for _ in 0..n.unsigned_abs() {
                out = out.concat(&block);
            }
            out
        };
        if exp.digits.is_empty() {
            return Word::empty(p);
        }
        let mut w = h_pow(exp.offset);
        for (j, r) in exp.digits.iter().enumerate() {
            w = w.concat(&self.digit_word(r));
            if j + 1 < exp.digits.len() {
                w = w.concat(&self.h);
            }
        }
        let k = (exp.digits.len() - 1) as i64;
        w.concat(&h_pow(-(exp.offset + k)))
    }

    /// Ladder word whose slot coordinates are `(c, 0)`.
    fn ladder(&self, c: &Int, cap: usize) -> Result<(Word, RadixExpansion)> {
        let exp = radix_expand(&[c.clone(), Int::zero()], &self.base, 2, cap)?;
        Ok((self.ladder_word(&exp), exp))
    }
}

fn step_cap_for(x: &Int) -> usize {
    4 * x.abs().bits() as usize + 64
}

/// A word evaluating to `e_{s-t}(x)` possibly times a central `e_{2s}`
/// factor; returns the word and the central defect coefficient. The pair
/// `(s, t)` fixes which `Z` the defect lives in, so callers that cancel the
/// defect must pass the pair explicitly.
fn short_word_mod_center(
    p: usize,
    s: HalfRoot,
    t: HalfRoot,
    x: &Int,
) -> Result<(Word, Int, Option<RadixExpansion>)> {
    let alpha = Root::short(s, t, p)?;
    if x.abs() <= Int::from(LITERAL_MAX) {
        return Ok((Word::power(p, &alpha, x), Int::zero(), None));
    }
    if p >= 3 {
        let aux_idx = smallest_free_index(p, &[s.index(), t.index()])
            .ok_or_else(|| Error::Unsupported("no auxiliary index".into()))?;
        let spec = LadderSpec::isotropic(p, s, t, HalfRoot::pos(aux_idx))?;
        let target = Int::from(spec.unit_a) * x;
        let (w, exp) = spec.ladder(&target, step_cap_for(x))?;
        return Ok((w, Int::zero(), Some(exp)));
    }
    // rank 2: symplectic slice with a central defect
    let spec = LadderSpec::symplectic(p, s, t)?;
    let target = Int::from(spec.unit_a) * x;
    let (w, exp) = spec.ladder(&target, step_cap_for(x))?;
    let val = w.evaluate();
    let residual = elementary(p, &alpha, x).sp_inverse().mul(&val);
    // residual must be e_{2s}(m)
    let long = Root::long(s, p)?;
    let m = residual.at(s.row(p), s.negate().row(p)).clone();
    if residual != elementary(p, &long, &m) {
        return Err(Error::Invariant("symplectic ladder residual is not central".into()));
    }
    Ok((w, m, Some(exp)))
}

/// A word evaluating exactly to `e_{2s}(y)`, built as a commutator of
/// shortcut halves (whose central defects cancel) and one parity letter.
fn long_word(p: usize, s: HalfRoot, t: HalfRoot, y: &Int) -> Result<Word> {
    let root_a = Root::short(s, t, p)?;
    let root_b = Root::from_halfroot_sum(s, t, p)?;
    let long = Root::long(s, p)?;
    if y.abs() <= Int::from(LITERAL_MAX) {
        return Ok(Word::power(p, &long, y));
    }
    let factors = commutator_factors(p, &root_a, &root_b, &Int::one(), &Int::one())?;
    if factors.len() != 1 || factors[0].0 != long {
        return Err(Error::Invariant("commutator of the half roots is not the long root".into()));
    }
    let kappa = factors[0].1.clone();
    debug_assert_eq!(kappa.abs(), Int::from(2));
    let y1 = y / &kappa; // truncating division: remainder in {-1, 0, 1}
    let rho = y - &kappa * &y1;
    let (half, _, _) = short_word_mod_center(p, s, t, &y1)?;
    let b_letter = Word::from_letters(p, vec![Letter::new(root_b.clone(), 1)]);
    let w = half
        .concat(&b_letter)
        .concat(&half.inverse())
        .concat(&b_letter.inverse())
        .concat(&Word::power(p, &long, &rho));
    Ok(w)
}

/// A word of length `O(log(|x|+2))` that evaluates exactly to
/// `e_alpha(x)`. Requires rank at least 2.
pub fn shortcut(alpha: &Root, x: &Int) -> Result<ShortcutPlan> {
    let p = alpha.rank();
    if p < 2 {
        return Err(Error::Unsupported("shortcuts need rank at least 2".into()));
    }
    let plan = match alpha.kind() {
        _ if x.abs() <= Int::from(LITERAL_MAX) => ShortcutPlan {
            root: alpha.clone(),
            x: x.clone(),
            variant: ShortcutVariant::Literal,
            word: Word::power(p, alpha, x),
            expansion: None,
        },
        RootKind::Short => {
            let (s, t) = alpha.presentation();
            if p >= 3 {
                let aux_idx = smallest_free_index(p, &[s.index(), t.index()]).unwrap();
                let aux = HalfRoot::pos(aux_idx);
                let (word, defect, expansion) = short_word_mod_center(p, s, t, x)?;
                debug_assert!(defect.is_zero());
                ShortcutPlan {
                    root: alpha.clone(),
                    x: x.clone(),
                    variant: ShortcutVariant::ShortRoot { s, t, aux },
                    word,
                    expansion,
                }
            } else {
                let (junky, defect, expansion) = short_word_mod_center(p, s, t, x)?;
                let fix = long_word(p, s, t, &-defect)?;
                ShortcutPlan {
                    root: alpha.clone(),
                    x: x.clone(),
                    variant: ShortcutVariant::SpecialShort { s, t },
                    word: junky.concat(&fix),
                    expansion,
                }
            }
        }
        RootKind::Long => {
            let (s, _) = alpha.presentation();
            let t_idx = smallest_free_index(p, &[s.index()])
                .ok_or_else(|| Error::Unsupported("long-root shortcut needs a second index".into()))?;
            let t = HalfRoot::pos(t_idx);
            ShortcutPlan {
                root: alpha.clone(),
                x: x.clone(),
                variant: ShortcutVariant::LongRoot { s, t, special: p == 2 },
                word: long_word(p, s, t, x)?,
                expansion: None,
            }
        }
    };
    // Exactness is the module contract; check it on every construction.
    if plan.word.evaluate() != elementary(p, alpha, x) {
        return Err(Error::Invariant(format!("shortcut for {alpha}({x}) evaluates wrongly")));
    }
    Ok(plan)
}

/// Shortcut word for the canonical section of a tensor: concatenation of the
/// per-entry shortcuts in key order; evaluates exactly to `u_product(V)`.
pub struct TensorShortcut {
    pub word: Word,
    pub plans: Vec<ShortcutPlan>,
}

pub fn shortcut_tensor(v: &TensorElem) -> Result<TensorShortcut> {
    let p = v.frame().rank();
    let mut word = Word::empty(p);
    let mut plans = Vec::new();
    for ((s, t), x) in v.iter() {
        let alpha = Root::short(*s, *t, p)?;
        let plan = shortcut(&alpha, x)?;
        word = word.concat(&plan.word);
        plans.push(plan);
    }
    if word.evaluate() != u_product(v) {
        return Err(Error::Invariant("tensor shortcut does not match the section".into()));
    }
    Ok(TensorShortcut { word, plans })
}

/// Shortcut word for an arbitrary element of `N_{S,T}(Z)`: the tensor part
/// by `shortcut_tensor`, the central remainder by one shortcut per `Z_S`
/// coordinate. Evaluates exactly to `m`.
pub fn nilpotent_word(m: &Mat<Int>, frame: &SubgroupFrame) -> Result<Word> {
    let p = frame.rank();
    let v = crate::unipotent::ab_of(m, frame)?;
    let ts = shortcut_tensor(&v)?;
    let rem = u_product(&v).sp_inverse().mul(m);
    if !crate::unipotent::z_membership(&rem, frame)? {
        return Err(Error::Invariant("nilpotent remainder is not central".into()));
    }
    let mut word = ts.word;
    let s_list = frame.s_list();
    for (i, &a) in s_list.iter().enumerate() {
        for &b in &s_list[i..] {
            let coef = rem.at(a.row(p), b.negate().row(p)).clone();
            if coef.is_zero() {
                continue;
            }
            let root = Root::from_halfroot_sum(a, b, p)?;
            let plan = shortcut(&root, &coef)?;
            word = word.concat(&plan.word);
        }
    }
    if &word.evaluate() != m {
        return Err(Error::Invariant("nilpotent word does not evaluate to the input".into()));
    }
    Ok(word)
}

/// One row of a length measurement.
pub struct ProfileRow {
    pub x: Int,
    pub len: usize,
    pub ratio_num: usize,
    pub log2_arg: u64,
}

/// Measures shortcut lengths against `log2(|x|+2)`; emitted as CSV by the
/// CLI. The ratio column is `len / log2(|x|+2)` rounded up.
pub fn length_profile(alpha: &Root, xs: &[Int]) -> Result<Vec<ProfileRow>> {
    let mut out = Vec::new();
    for x in xs {
        let plan = shortcut(alpha, x)?;
        let log2_arg = (x.abs() + Int::from(2)).bits();
        out.push(ProfileRow {
            x: x.clone(),
            len: plan.word.len(),
            ratio_num: plan.word.len().div_ceil(log2_arg as usize),
            log2_arg,
        });
    }
    Ok(out)
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("x,len,log2_bound_bits,len_over_log2\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.x, r.len, r.log2_arg, r.ratio_num));
    }
    out
}

/// The submultiplicativity lower bound: any word evaluating to `M` has
/// `(2p)^{len-1} >= ||M||_inf`, i.e. `len >= 1 + log_{2p}||M||`. Exact check.
pub fn length_lower_bound_holds(word_len: usize, m: &Mat<Int>) -> bool {
    let p = m.dim() / 2;
    if word_len == 0 {
        return m.is_identity();
    }
    Int::from(2 * p).pow((word_len - 1) as u32) >= m.norm_inf()
}
