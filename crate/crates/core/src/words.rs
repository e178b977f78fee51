//! Words over the elementary generator alphabet `{e_alpha^{±1}}`, the four
//! homotopy moves (relator insertion/deletion at cost 1, free
//! expansion/contraction at cost 0), relator families, and a breadth-first
//! area search at desk scale.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::roots::{all_roots, root_add, Root};
use crate::spmat::{apply_letter_right, elementary, root_units, Int, Mat};

/// One alphabet symbol `e_alpha^{±1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Letter {
    pub root: Root,
    pub exp: i8,
}

impl Letter {
    pub fn new(root: Root, exp: i8) -> Self {
        debug_assert!(exp == 1 || exp == -1);
        Letter { root, exp }
    }

    pub fn inverse(&self) -> Self {
        Letter { root: self.root.clone(), exp: -self.exp }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 {
            write!(f, "e({})", self.root)
        } else {
            write!(f, "e({})^-1", self.root)
        }
    }
}

/// A finite word over the alphabet, at a fixed ambient rank.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    p: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty(p: usize) -> Self {
        Word { p, letters: Vec::new() }
    }

    pub fn from_letters(p: usize, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.iter().all(|l| l.root.rank() == p));
        Word { p, letters }
    }

    /// The expansion of `e_alpha(x)` into `|x|` letters.
    pub fn power(p: usize, alpha: &Root, x: &Int) -> Self {
        let exp = if x.is_negative() { -1 } else { 1 };
        let n: usize = x.abs().try_into().expect("letter expansion length fits usize");
        Word {
            p,
            letters: (0..n).map(|_| Letter::new(alpha.clone(), exp)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn push(&mut self, l: Letter) {
        self.letters.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        debug_assert_eq!(self.p, other.p);
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word { p: self.p, letters }
    }

    pub fn inverse(&self) -> Word {
        Word {
            p: self.p,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Exact product of the letters' matrices, in word order.
    pub fn evaluate(&self) -> Mat<Int> {
        let mut m = Mat::identity(2 * self.p);
        for l in &self.letters {
            apply_letter_right(&mut m, &l.root, &Int::from(l.exp));
        }
        m
    }

    /// Iterated free contraction; the result is independent of contraction
    /// order.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            if let Some(top) = stack.last() {
                if top.root == l.root && top.exp == -l.exp {
                    stack.pop();
                    continue;
                }
            }
            stack.push(l.clone());
        }
        Word { p: self.p, letters: stack }
    }

    /// Removes inverse pairs at the two ends until none remain; used by the
    /// one-move-left detector of the area search.
    pub fn cyclic_reduce(&self) -> Word {
        let mut w = self.free_reduce();
        loop {
            match (w.letters.first(), w.letters.last()) {
                (Some(a), Some(b)) if w.letters.len() >= 2 && a.root == b.root && a.exp == -b.exp =>
                {
                    w.letters.pop();
                    w.letters.remove(0);
                }
                _ => return w,
            }
        }
    }

    /// Net exponent sum per root; the abelianized image of the word.
    pub fn exponent_sums(&self) -> HashMap<Root, i64> {
        let mut out = HashMap::new();
        for l in &self.letters {
            *out.entry(l.root.clone()).or_insert(0) += l.exp as i64;
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", toks.join(" "))
    }
}

impl Word {
    /// Parses the whitespace-separated token format, e.g.
    /// `e(+1-2)^-1 e(2*+1)`.
    pub fn parse(s: &str, p: usize) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (body, exp) = match tok.strip_suffix("^-1") {
                Some(b) => (b, -1),
                None => match tok.strip_suffix("^1") {
                    Some(b) => (b, 1),
                    None => (tok, 1),
                },
            };
            let inner = body
                .strip_prefix("e(")
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad letter token {tok:?}")))?;
            letters.push(Letter::new(Root::parse(inner, p)?, exp));
        }
        Ok(Word { p, letters })
    }
}

/// The four homotopy moves. Relator moves cost 1, free moves cost 0.
#[derive(Clone, Debug)]
pub enum HomotopyMove {
    InsertRelator { pos: usize, relator: Word },
    DeleteRelator { pos: usize, len: usize },
    FreeExpand { pos: usize, letter: Letter },
    FreeContract { pos: usize },
}

impl HomotopyMove {
    pub fn cost(&self) -> usize {
        match self {
            HomotopyMove::InsertRelator { .. } | HomotopyMove::DeleteRelator { .. } => 1,
            _ => 0,
        }
    }
}

/// A finite set of relators, closed under inversion, with a rotation index
/// for detecting words that are a single conjugated relator.
#[derive(Clone, Debug)]
pub struct RelatorSet {
    p: usize,
    words: Vec<Word>,
    word_set: HashSet<Vec<Letter>>,
    rotations: HashSet<Vec<Letter>>,
    max_len: usize,
}

impl RelatorSet {
    pub fn new(p: usize, words: Vec<Word>) -> Result<Self> {
        let mut uniq: Vec<Word> = Vec::new();
        let mut seen = HashSet::new();
        for w in words {
            if w.rank() != p {
                return Err(Error::InvalidInput("relator rank mismatch".into()));
            }
            if !w.evaluate().is_identity() {
                return Err(Error::InvalidInput(format!("relator {w} does not represent 1")));
            }
            for cand in [w.clone(), w.inverse()] {
                if cand.is_empty() {
                    continue;
                }
                if seen.insert(cand.letters.clone()) {
                    uniq.push(cand);
                }
            }
        }
        let mut rotations = HashSet::new();
        for w in &uniq {
            let c = w.cyclic_reduce();
            let n = c.len();
            for k in 0..n.max(1) {
                let mut rot = c.letters[k..].to_vec();
                rot.extend_from_slice(&c.letters[..k]);
                rotations.insert(rot);
            }
        }
        let max_len = uniq.iter().map(|w| w.len()).max().unwrap_or(0);
        let word_set = uniq.iter().map(|w| w.letters.clone()).collect();
        Ok(RelatorSet { p, words: uniq, word_set, rotations, max_len })
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.word_set.contains(w.letters())
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// True when `w` is conjugate (by free moves) to a relator: its cyclic
    /// reduction is a rotation of some relator's cyclic reduction.
    pub fn one_deletion_away(&self, w: &Word) -> bool {
        self.rotations.contains(w.cyclic_reduce().letters())
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<String> =
            self.words.iter().map(|w| format!("\"{w}\"")).collect();
        format!("[{}]", entries.join(","))
    }
}

/// Applies a homotopy move, validating it against the relator set.
pub fn apply_move(w: &Word, m: &HomotopyMove, relators: &RelatorSet) -> Result<Word> {
    let letters = w.letters();
    match m {
        HomotopyMove::InsertRelator { pos, relator } => {
            if *pos > letters.len() {
                return Err(Error::InvalidInput("insert position out of bounds".into()));
            }
            if !relators.contains(relator) {
                return Err(Error::InvalidInput("word is not an active relator".into()));
            }
            let mut out = letters[..*pos].to_vec();
            out.extend(relator.letters().iter().cloned());
            out.extend(letters[*pos..].iter().cloned());
            Ok(Word::from_letters(w.rank(), out))
        }
        HomotopyMove::DeleteRelator { pos, len } => {
            if pos + len > letters.len() {
                return Err(Error::InvalidInput("delete range out of bounds".into()));
            }
            let target = Word::from_letters(w.rank(), letters[*pos..pos + len].to_vec());
            if !relators.contains(&target) {
                return Err(Error::InvalidInput(
                    "deleted subword is not an active relator".into(),
                ));
            }
            let mut out = letters[..*pos].to_vec();
            out.extend(letters[pos + len..].iter().cloned());
            Ok(Word::from_letters(w.rank(), out))
        }
        HomotopyMove::FreeExpand { pos, letter } => {
            if *pos > letters.len() {
                return Err(Error::InvalidInput("expand position out of bounds".into()));
            }
            let mut out = letters[..*pos].to_vec();
            out.push(letter.inverse());
            out.push(letter.clone());
            out.extend(letters[*pos..].iter().cloned());
            Ok(Word::from_letters(w.rank(), out))
        }
        HomotopyMove::FreeContract { pos } => {
            if pos + 2 > letters.len() {
                return Err(Error::InvalidInput("contract position out of bounds".into()));
            }
            let (a, b) = (&letters[*pos], &letters[pos + 1]);
            if a.root != b.root || a.exp != -b.exp {
                return Err(Error::InvalidInput("letters at position are not t^-1 t".into()));
            }
            let mut out = letters[..*pos].to_vec();
            out.extend(letters[pos + 2..].iter().cloned());
            Ok(Word::from_letters(w.rank(), out))
        }
    }
}

/// Decomposes a product of at most two elementary matrices with disjoint
/// entry slots back into `(root, coefficient)` factors; used to read off the
/// exact commutator tail.
fn peel_elementary_product(m: &Mat<Int>, candidates: &[Root], p: usize) -> Option<Vec<(Root, Int)>> {
    let mut rest = m.clone();
    let mut out = Vec::new();
    for gamma in candidates {
        let ((r, c), _) = root_units(gamma, p)[0];
        let coef = rest.at(r, c).clone();
        if !coef.is_zero() {
            rest = elementary(p, gamma, &-coef.clone()).mul(&rest);
            out.push((gamma.clone(), coef));
        }
    }
    if rest.is_identity() {
        Some(out)
    } else {
        None
    }
}

/// The exact commutator identity for a pair of roots: returns the factor
/// sequence of `[e_alpha(x), e_beta(y)]` as elementary matrices. For most
/// pairs this is a single `e_{alpha+beta}(kappa x y)`; for a long root
/// paired with a short one it can also carry an `e_{alpha+2beta}` or
/// `e_{2alpha+beta}` tail.
pub fn commutator_factors(p: usize, alpha: &Root, beta: &Root, x: &Int, y: &Int) -> Result<Vec<(Root, Int)>> {
    let a = elementary(p, alpha, x);
    let b = elementary(p, beta, y);
    let comm = a.mul(&b).mul(&a.sp_inverse()).mul(&b.sp_inverse());
    let mut candidates = Vec::new();
    if let Some(r) = root_add(alpha, beta)? {
        candidates.push(r);
    }
    for (u, v) in [(alpha, beta), (beta, alpha)] {
        if let Some(r) = root_add(u, v)? {
            if let Some(r2) = root_add(&r, v)? {
                candidates.push(r2);
            }
        }
    }
    peel_elementary_product(&comm, &candidates, p)
        .ok_or_else(|| Error::Invariant(format!("unexpected commutator shape for ({alpha}, {beta})")))
}

/// All relators of the family at the given coefficient bound: for every
/// ordered root pair with `alpha + beta != 0`, the word
/// `[e_alpha(x), e_beta(y)] * tail^{-1}` with the tail read off the exact
/// commutator. Additive relators are freely trivial in the ±1-letter
/// alphabet and therefore do not appear. Every emitted relator evaluates to
/// the identity by construction, and the set is closed under inversion.
pub fn relator_set(p: usize, xbound: i64) -> Result<RelatorSet> {
    if p < 1 || xbound < 1 {
        return Err(Error::InvalidInput("need p >= 1 and xbound >= 1".into()));
    }
    let roots = all_roots(p);
    let mut words = Vec::new();
    for alpha in &roots {
        for beta in &roots {
            if alpha == beta || *beta == alpha.negate() {
                continue;
            }
            for x in 1..=xbound {
                for y in 1..=xbound {
                    for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let xi = Int::from(sx * x);
                        let yi = Int::from(sy * y);
                        let mut w = Word::power(p, alpha, &xi);
                        w = w.concat(&Word::power(p, beta, &yi));
                        w = w.concat(&Word::power(p, alpha, &-xi.clone()));
                        w = w.concat(&Word::power(p, beta, &-yi.clone()));
                        for (gamma, coef) in
                            commutator_factors(p, alpha, beta, &xi, &yi)?.iter().rev()
                        {
                            w = w.concat(&Word::power(p, gamma, &-coef.clone()));
                        }
                        let w = w.free_reduce();
                        if !w.is_empty() {
                            words.push(w);
                        }
                    }
                }
            }
        }
    }
    RelatorSet::new(p, words)
}

/// Breadth-first search for the minimum number of relator moves homotoping a
/// relation to the empty word, visiting only words of length `<= max_len`
/// and expanding at most `max_cost` states. Free moves are contracted into
/// the edges, so every edge costs one relator move. Returns `None` when the
/// budget is hit before an answer is certain.
pub fn area_search(
    w: &Word,
    relators: &RelatorSet,
    max_len: usize,
    max_cost: usize,
) -> Result<Option<usize>> {
    if !w.evaluate().is_identity() {
        return Err(Error::Domain("area search requires a relation".into()));
    }
    let p = w.rank();
    let start = w.free_reduce();
    if start.is_empty() {
        return Ok(Some(0));
    }
    // Alphabet for conjugators.
    let alphabet: Vec<Letter> = all_roots(p)
        .into_iter()
        .flat_map(|r| [Letter::new(r.clone(), 1), Letter::new(r, -1)])
        .collect();

    let mut best: Option<usize> = None;
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    let mut queue: VecDeque<(Word, usize)> = VecDeque::new();
    seen.insert(start.letters().to_vec());
    queue.push_back((start, 0));
    let mut expanded = 0usize;

    while let Some((cur, depth)) = queue.pop_front() {
        if let Some(b) = best {
            if depth + 1 >= b {
                return Ok(best);
            }
        }
        if cur.is_empty() {
            return Ok(Some(depth));
        }
        if cur.len() + relators.max_len() <= max_len && relators.one_deletion_away(&cur) {
            best = Some(best.map_or(depth + 1, |b: usize| b.min(depth + 1)));
            continue;
        }
        if expanded >= max_cost {
            return Ok(best.filter(|b| *b <= depth + 1));
        }
        expanded += 1;

        let push = |next: Word, queue: &mut VecDeque<(Word, usize)>, seen: &mut HashSet<Vec<Letter>>| {
            if seen.insert(next.letters().to_vec()) {
                queue.push_back((next, depth + 1));
            }
        };

        // Deletion edges: literal relator occurrences.
        for r in relators.words() {
            let rl = r.len();
            if rl > cur.len() {
                continue;
            }
            for pos in 0..=cur.len() - rl {
                if &cur.letters()[pos..pos + rl] == r.letters() {
                    let m = HomotopyMove::DeleteRelator { pos, len: rl };
                    let next = apply_move(&cur, &m, relators)?.free_reduce();
                    push(next, &mut queue, &mut seen);
                }
            }
        }

        // Insertion edges: g r g^{-1} at every position, conjugator length
        // capped by the visited-word length bound.
        for r in relators.words() {
            if cur.len() + r.len() > max_len {
                continue;
            }
            let gmax = (max_len - cur.len() - r.len()) / 2;
            let mut conjugators: Vec<Word> = vec![Word::empty(p)];
            for _ in 0..gmax {
                let mut nextgen = Vec::new();
                for g in &conjugators {
                    for l in &alphabet {
                        let mut gl = g.clone();
                        if let Some(last) = gl.letters().last() {
                            if last.root == l.root && last.exp == -l.exp {
                                continue;
                            }
                        }
                        gl.push(l.clone());
                        nextgen.push(gl);
                    }
                }
                let before = conjugators.len();
                conjugators.extend(nextgen);
                if conjugators.len() == before {
                    break;
                }
            }
            for g in &conjugators {
                let grg = g.concat(r).concat(&g.inverse());
                for pos in 0..=cur.len() {
                    let mut out = cur.letters()[..pos].to_vec();
                    out.extend(grg.letters().iter().cloned());
                    out.extend(cur.letters()[pos..].iter().cloned());
                    let next = Word::from_letters(p, out).free_reduce();
                    if next.len() <= max_len {
                        push(next, &mut queue, &mut seen);
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Lower bound on the area from the abelianized image: each relator move
/// changes any root's exponent sum by at most the relator maximum.
pub fn area_lower_bound(w: &Word, relators: &RelatorSet) -> Option<usize> {
    let sums = w.exponent_sums();
    let mut bound = 0usize;
    for (root, v) in sums {
        let mut rel_max = 0i64;
        for r in relators.words() {
            if let Some(rv) = r.exponent_sums().get(&root) {
                rel_max = rel_max.max(rv.abs());
            }
        }
        if rel_max == 0 {
            return None; // not fillable by this set
        }
        let need = (v.abs() + rel_max - 1) / rel_max;
        bound = bound.max(need as usize);
    }
    Some(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::HalfRoot;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn hr(sign: i8, idx: usize) -> HalfRoot {
        HalfRoot::new(sign, idx).unwrap()
    }

    fn int(x: i64) -> Int {
        Int::from(x)
    }

    #[test]
    fn evaluate_is_a_homomorphism() {
        let p = 2;
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let b = Root::short(hr(1, 1), hr(-1, 2), p).unwrap();
        let w1 = Word::power(p, &a, &int(2));
        let w2 = Word::power(p, &b, &int(-3));
        assert_eq!(
            w1.concat(&w2).evaluate(),
            w1.evaluate().mul(&w2.evaluate())
        );
        assert!(Word::empty(p).evaluate().is_identity());
    }

    #[test]
    fn free_cancellation_preserves_value() {
        let p = 2;
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let w = Word::from_letters(
            p,
            vec![
                Letter::new(a.clone(), 1),
                Letter::new(a.clone(), 1),
                Letter::new(a.clone(), -1),
            ],
        );
        assert_eq!(w.evaluate(), elementary(p, &a, &int(1)));
        assert_eq!(w.free_reduce().len(), 1);
    }

    #[test]
    fn commutator_fixes_kappa_sign() {
        // e_{[1]-[2]} e_{[1]+[2]} e^{-1} e^{-1} evaluates to e_{2[1]}(kappa),
        // kappa = ±2
        let p = 2;
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let b = Root::short(hr(1, 1), hr(-1, 2), p).unwrap();
        let factors = commutator_factors(p, &a, &b, &int(1), &int(1)).unwrap();
        assert_eq!(factors.len(), 1);
        let (gamma, kappa) = &factors[0];
        assert_eq!(*gamma, Root::long(hr(1, 1), p).unwrap());
        assert_eq!(kappa.abs(), int(2));

        // swapping the arguments reverses the sign
        let swapped = commutator_factors(p, &b, &a, &int(1), &int(1)).unwrap();
        assert_eq!(swapped[0].1, -factors[0].1.clone());
    }

    #[test]
    fn long_short_pair_has_two_term_tail() {
        // [e_{2[1]}(x), e_{[2]-[1]}(y)] = e_{[1]+[2]}(∓xy) e_{2[2]}(∓xy²)
        let p = 2;
        let alpha = Root::long(hr(1, 1), p).unwrap();
        let beta = Root::short(hr(1, 2), hr(1, 1), p).unwrap();
        for (x, y) in [(1i64, 1i64), (2, 3), (-2, 3), (3, -3)] {
            let factors = commutator_factors(p, &alpha, &beta, &int(x), &int(y)).unwrap();
            assert_eq!(factors.len(), 2, "expected two factors for x={x}, y={y}");
            let sum = Root::short(hr(1, 1), hr(-1, 2), p).unwrap();
            let tail = Root::long(hr(1, 2), p).unwrap();
            assert_eq!(factors[0].0, sum);
            assert_eq!(factors[0].1.abs(), int((x * y).abs()));
            assert_eq!(factors[1].0, tail);
            assert_eq!(factors[1].1.abs(), int((x * y * y).abs()));
        }
    }

    #[test]
    fn moves_preserve_value() {
        let p = 2;
        let rel = relator_set(p, 1).unwrap();
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let b = Root::short(hr(1, 1), hr(-1, 2), p).unwrap();
        let w = Word::from_letters(p, vec![Letter::new(a.clone(), 1), Letter::new(b.clone(), 1)]);

        let m = HomotopyMove::FreeExpand { pos: 1, letter: Letter::new(a.clone(), 1) };
        let w2 = apply_move(&w, &m, &rel).unwrap();
        assert_eq!(w2.len(), 4);
        assert_eq!(w2.evaluate(), w.evaluate());

        let back = apply_move(&w2, &HomotopyMove::FreeContract { pos: 1 }, &rel).unwrap();
        assert_eq!(back, w);

        let r = rel.words()[0].clone();
        let ins = apply_move(&w, &HomotopyMove::InsertRelator { pos: 1, relator: r.clone() }, &rel)
            .unwrap();
        assert_eq!(ins.evaluate(), w.evaluate());
        let del =
            apply_move(&ins, &HomotopyMove::DeleteRelator { pos: 1, len: r.len() }, &rel).unwrap();
        assert_eq!(del, w);

        // malformed moves are rejected
        assert!(apply_move(&w, &HomotopyMove::FreeContract { pos: 0 }, &rel).is_err());
        assert!(apply_move(
            &w,
            &HomotopyMove::DeleteRelator { pos: 0, len: 2 },
            &rel
        )
        .is_err());
    }

    #[test]
    fn every_relator_is_a_relation() {
        for p in 1..=2 {
            let rel = relator_set(p, 2).unwrap();
            for r in rel.words() {
                assert!(r.evaluate().is_identity());
            }
            assert!(!rel.words().is_empty() || p == 1);
        }
    }

    #[test]
    fn free_reduce_confluent_under_random_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = 2;
        let roots = all_roots(p);
        for _ in 0..50 {
            let letters: Vec<Letter> = (0..12)
                .map(|_| {
                    Letter::new(
                        roots.choose(&mut rng).unwrap().clone(),
                        if rng.gen_bool(0.5) { 1 } else { -1 },
                    )
                })
                .collect();
            let w = Word::from_letters(p, letters);
            let canonical = w.free_reduce();
            // random order: repeatedly contract a random adjacent inverse pair
            let mut cur = w.clone();
            loop {
                let positions: Vec<usize> = (0..cur.len().saturating_sub(1))
                    .filter(|&i| {
                        let a = &cur.letters()[i];
                        let b = &cur.letters()[i + 1];
                        a.root == b.root && a.exp == -b.exp
                    })
                    .collect();
                if positions.is_empty() {
                    break;
                }
                let pos = *positions.choose(&mut rng).unwrap();
                let rel = RelatorSet::new(p, vec![]).unwrap();
                cur = apply_move(&cur, &HomotopyMove::FreeContract { pos }, &rel).unwrap();
            }
            assert_eq!(cur, canonical);
        }
    }

    #[test]
    fn area_search_examples() {
        let p = 2;
        let rel = relator_set(p, 1).unwrap();

        // empty word -> 0
        let empty = Word::empty(p);
        assert_eq!(area_search(&empty, &rel, 24, 100_000).unwrap(), Some(0));

        // a single relator -> 1
        let r = rel.words()[0].clone();
        assert_eq!(area_search(&r, &rel, 24, 100_000).unwrap(), Some(1));

        // a conjugate g r g^{-1} with l(g) = 2 -> 1
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let b = Root::long(hr(1, 2), p).unwrap();
        let g = Word::from_letters(p, vec![Letter::new(a, 1), Letter::new(b, -1)]);
        let conj = g.concat(&r).concat(&g.inverse());
        assert_eq!(area_search(&conj, &rel, 24, 100_000).unwrap(), Some(1));

        // non-relations are rejected
        let bad = Word::from_letters(p, vec![Letter::new(rel.words()[0].letters()[0].root.clone(), 1)]);
        assert!(area_search(&bad, &rel, 24, 100_000).is_err());
    }

    #[test]
    fn word_text_roundtrip() {
        let p = 3;
        let a = Root::short(hr(1, 1), hr(1, 2), p).unwrap();
        let b = Root::long(hr(-1, 3), p).unwrap();
        let w = Word::from_letters(p, vec![Letter::new(a, -1), Letter::new(b, 1)]);
        let s = w.to_string();
        assert_eq!(Word::parse(&s, p).unwrap(), w);
    }
}
