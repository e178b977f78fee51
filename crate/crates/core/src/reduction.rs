//! Desk-scale reduction theory: Siegel-form points, the sublattice generated
//! by short vectors, the gap-regime predictions for that sublattice, a depth
//! proxy on the diagonal part, and size-adaptive triangulations of a square
//! driven by a Lipschitz gauge function.

use std::collections::BTreeMap;
use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::roots::{HalfRoot, Root};
use crate::spmat::{root_units, Int, Mat, Rat};

/// Positive roots of the rank-`q` system: differences `[i]-[j]` (i<j), sums
/// `[i]+[j]` (i<j), and longs `2[i]`.
pub fn positive_roots(q: usize) -> Vec<Root> {
    let mut out = Vec::new();
    for i in 1..=q {
        for j in i + 1..=q {
            out.push(Root::short(HalfRoot::pos(i), HalfRoot::pos(j), q).unwrap());
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            out.push(Root::short(HalfRoot::pos(i), HalfRoot::neg(j), q).unwrap());
        }
    }
    for i in 1..=q {
        out.push(Root::long(HalfRoot::pos(i), q).unwrap());
    }
    out
}

/// A point of the Siegel-form family: unipotent coordinates on the positive
/// roots and a diagonal part satisfying `a_i > eps a_{i+1}`, `a_p^2 > eps`.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    p: usize,
    eps: Rat,
    n_coords: BTreeMap<Root, Rat>,
    a: Vec<Rat>,
}

impl SiegelPoint {
    pub fn new(p: usize, eps: Rat, n_coords: BTreeMap<Root, Rat>, a: Vec<Rat>) -> Result<Self> {
        if !eps.is_positive() || eps >= Rat::one() {
            return Err(Error::InvalidInput("eps must lie in (0,1)".into()));
        }
        if a.len() != p {
            return Err(Error::InvalidInput("diagonal length must equal the rank".into()));
        }
        if a.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidInput("diagonal entries must be positive".into()));
        }
        for i in 0..p - 1 {
            if a[i] <= eps.clone() * a[i + 1].clone() {
                return Err(Error::InvalidInput(format!(
                    "Siegel inequality a_{} > eps a_{} violated",
                    i + 1,
                    i + 2
                )));
            }
        }
        if a[p - 1].clone() * a[p - 1].clone() <= eps {
            return Err(Error::InvalidInput("Siegel inequality a_p > sqrt(eps) violated".into()));
        }
        let valid: Vec<Root> = positive_roots(p);
        for k in n_coords.keys() {
            if !valid.contains(k) {
                return Err(Error::InvalidInput(format!("{k} is not a positive root")));
            }
        }
        Ok(SiegelPoint { p, eps, n_coords, a })
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn eps(&self) -> &Rat {
        &self.eps
    }

    pub fn diagonal(&self) -> &[Rat] {
        &self.a
    }

    /// Checks that every unipotent coordinate lies in `[-box, box]`.
    pub fn n_in_box(&self, half_width: &Rat) -> bool {
        self.n_coords.values().all(|v| v.abs() <= *half_width)
    }

    /// The exact rational matrix `n a`.
    pub fn matrix(&self) -> Mat<Rat> {
        let p = self.p;
        let mut n: Mat<Rat> = Mat::identity(2 * p);
        for alpha in positive_roots(p) {
            if let Some(x) = self.n_coords.get(&alpha) {
                // right-multiply by the rational elementary matrix
                let mut e: Mat<Rat> = Mat::identity(2 * p);
                for ((r, c), u) in root_units(&alpha, p) {
                    e.set(r, c, Rat::from_integer(Int::from(u)) * x.clone());
                }
                n = n.mul(&e);
            }
        }
        let mut d: Mat<Rat> = Mat::zero(2 * p);
        for i in 0..p {
            d.set(i, i, self.a[i].clone());
            d.set(p + i, p + i, self.a[i].recip());
        }
        n.mul(&d)
    }
}

// ---------------------------------------------------------------------------
// Short-vector sublattice and Hermite normal form
// ---------------------------------------------------------------------------

/// Row-style Hermite normal form of the subgroup generated by the rows:
/// pivots positive and increasing, entries above a pivot reduced into
/// `[0, pivot)`. Canonical, so two subgroups are equal iff their forms are.
pub fn hermite_normal_form(rows: &[Vec<Int>]) -> Vec<Vec<Int>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let width = rows[0].len();
    let mut work: Vec<Vec<Int>> = rows.iter().filter(|r| !r.iter().all(|x| x.is_zero())).cloned().collect();
    let mut out: Vec<Vec<Int>> = Vec::new();
    let mut col = 0;
    while col < width && !work.is_empty() {
        // gcd-reduce the column
        loop {
            work.retain(|r| !r.iter().all(|x| x.is_zero()));
            let mut nz: Vec<usize> =
                (0..work.len()).filter(|&i| !work[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| work[i][col].abs());
            let pivot_idx = nz[0];
            for &i in &nz[1..] {
                let q = Integer::div_floor(&work[i][col], &work[pivot_idx][col]);
                if !q.is_zero() {
                    for j in 0..width {
                        let sub = &q * &work[pivot_idx][j];
                        work[i][j] -= sub;
                    }
                }
            }
            // if no entry changed (all quotients zero), smallest strictly
            // divides nothing more; swap in a classical remainder step
            let still: Vec<usize> =
                (0..work.len()).filter(|&i| !work[i][col].is_zero()).collect();
            if still.len() == nz.len()
                && still.iter().all(|&i| work[i][col].abs() == work[pivot_idx][col].abs())
            {
                // identical magnitudes: subtract once more to cancel
                let base = work[pivot_idx].clone();
                for &i in &still {
                    if i != pivot_idx && work[i][col] == base[col] {
                        for j in 0..width {
                            let sub = base[j].clone();
                            work[i][j] -= sub;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..work.len()).find(|&i| !work[i][col].is_zero()) {
            let mut row = work.remove(i);
            if row[col].is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            out.push(row);
        }
        col += 1;
    }
    // reduce entries above pivots
    let pivots: Vec<usize> = out
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    for i in (0..out.len()).rev() {
        for k in 0..i {
            let pc = pivots[i];
            let q = Integer::div_floor(&out[k][pc], &out[i][pc]);
            if !q.is_zero() {
                for j in 0..out[0].len() {
                    let sub = &q * &out[i][j];
                    out[k][j] -= sub;
                }
            }
        }
    }
    out
}

/// Membership of a vector in the row span of a Hermite form.
pub fn hnf_contains(hnf: &[Vec<Int>], v: &[Int]) -> bool {
    let mut v = v.to_vec();
    for row in hnf {
        let pc = row.iter().position(|x| !x.is_zero());
        let Some(pc) = pc else { continue };
        if !v[pc].is_zero() {
            if !(&v[pc] % &row[pc]).is_zero() {
                return false;
            }
            let q = &v[pc] / &row[pc];
            for j in 0..v.len() {
                let sub = &q * &row[j];
                v[j] -= sub;
            }
        }
    }
    v.iter().all(|x| x.is_zero())
}

/// Upper bound on the square root of a nonnegative rational.
fn sqrt_upper(q: &Rat) -> Rat {
    if q.is_zero() {
        return Rat::zero();
    }
    let scaled = q.numer() * q.denom();
    let root = scaled.sqrt() + Int::one();
    Rat::new(root, q.denom().clone())
}

/// All integer row vectors `v` with `||v x||_2 <= r` and `|v_j| <=
/// search_box`, for a block-triangular `x` (unipotent-times-diagonal shape):
/// upper-left block upper triangular, lower-left zero, lower-right lower
/// triangular. Exact rational norm comparisons throughout.
pub fn short_vectors(x: &Mat<Rat>, r: &Rat, search_box: i64) -> Result<Vec<Vec<Int>>> {
    let p = x.dim() / 2;
    if x.dim() % 2 != 0 {
        return Err(Error::InvalidInput("even dimension required".into()));
    }
    for i in 0..p {
        for j in 0..p {
            if !x.at(p + i, j).is_zero() {
                return Err(Error::Unsupported("lower-left block must vanish".into()));
            }
            if i > j && !x.at(i, j).is_zero() {
                return Err(Error::Unsupported("upper-left block must be upper triangular".into()));
            }
            if i < j && !x.at(p + i, p + j).is_zero() {
                return Err(Error::Unsupported("lower-right block must be lower triangular".into()));
            }
        }
    }
    let r2 = r * r;
    let mut out: Vec<Vec<Int>> = Vec::new();
    // order of decision: v_0..v_{p-1} then v_{2p-1}..v_p; coordinate j of
    // v x becomes final right after its variable groups are fixed.
    let mut v = vec![Int::zero(); 2 * p];
    // partial[j] = Σ over decided i of v_i x_{i j}
    struct Ctx<'a> {
        x: &'a Mat<Rat>,
        p: usize,
        r2: Rat,
        box_: i64,
    }
    fn descend(
        ctx: &Ctx,
        v: &mut Vec<Int>,
        level: usize,
        used: Rat,
        partial: &[Rat],
        out: &mut Vec<Vec<Int>>,
    ) {
        let p = ctx.p;
        if level == 2 * p {
            out.push(v.clone());
            return;
        }
        // which variable and which coordinate becomes final
        let (var, coord) = if level < p { (level, level) } else { (3 * p - 1 - level, 3 * p - 1 - level) };
        let diag = ctx.x.at(var, coord).clone();
        debug_assert!(!diag.is_zero());
        let c = partial[coord].clone();
        // |c + t*diag|^2 <= r2 - used
        let budget = ctx.r2.clone() - used.clone();
        if budget.is_negative() {
            return;
        }
        let s_up = sqrt_upper(&budget);
        let lo_r = (-s_up.clone() - c.clone()) / diag.clone();
        let hi_r = (s_up - c.clone()) / diag.clone();
        let (lo_r, hi_r) = if diag.is_positive() { (lo_r, hi_r) } else { (hi_r, lo_r) };
        let mut lo = lo_r.floor().to_integer();
        let mut hi = hi_r.ceil().to_integer();
        let box_i = Int::from(ctx.box_);
        if lo < -box_i.clone() {
            lo = -box_i.clone();
        }
        if hi > box_i {
            hi = box_i;
        }
        let mut t = lo;
        while t <= hi {
            let term = c.clone() + Rat::from_integer(t.clone()) * diag.clone();
            let used2 = used.clone() + term.clone() * term.clone();
            if used2 <= ctx.r2 {
                v[var] = t.clone();
                // update partials for later-final coordinates
                let mut newpartial = partial.to_vec();
                for j in 0..2 * p {
                    if j == coord {
                        newpartial[j] = term.clone();
                        continue;
                    }
                    let w = ctx.x.at(var, j);
                    if !w.is_zero() {
                        newpartial[j] = newpartial[j].clone() + Rat::from_integer(t.clone()) * w.clone();
                    }
                }
                descend(ctx, v, level + 1, used2, &newpartial, out);
                v[var] = Int::zero();
            }
            t += 1;
        }
    }
    let ctx = Ctx { x, p, r2, box_: search_box };
    let partial = vec![Rat::zero(); 2 * p];
    descend(&ctx, &mut v, 0, Rat::zero(), &partial, &mut out);
    Ok(out)
}

/// Hermite-form basis of the subgroup generated by the short row vectors.
pub fn v_lattice(x: &Mat<Rat>, r: &Rat, search_box: i64) -> Result<Vec<Vec<Int>>> {
    let gens = short_vectors(x, r, search_box)?;
    Ok(hermite_normal_form(&gens))
}

/// Outcome of a gap-regime check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RegimeOutcome {
    Confirmed,
    Refuted,
    OutsideRegime,
}

/// Checks the short-vector sublattice prediction at a gap index: for
/// `i < p`, the regime `a_i > C r > C^2 a_{i+1}` predicts the span of the
/// last `2p - i` standard vectors; for `i = p` (with `r` around 1), the
/// regime `a_p > C r` predicts the span of the last `p`. The certification
/// also needs `min_{j <= i} a_j > r`, which the calibrated constant
/// guarantees for genuine Siegel families.
pub fn rshort_check(
    pt: &SiegelPoint,
    i: usize,
    r: &Rat,
    c_const: &Rat,
    search_box: i64,
) -> Result<RegimeOutcome> {
    let p = pt.rank();
    if i == 0 || i > p {
        return Err(Error::InvalidInput("gap index must lie in 1..=p".into()));
    }
    let a = pt.diagonal();
    let in_regime = if i < p {
        a[i - 1].clone() > c_const * r && r.clone() > c_const * &a[i]
    } else {
        // last-block regime: all inverse directions short, all plain ones long
        a[p - 1].clone() > c_const * r && r.clone() * c_const.clone() * a[0].recip() < Rat::one()
    };
    if !in_regime {
        return Ok(RegimeOutcome::OutsideRegime);
    }
    // certification that no vector outside the predicted span qualifies
    let guard = (0..i).all(|j| a[j] > *r);
    if !guard {
        return Ok(RegimeOutcome::OutsideRegime);
    }
    let x = pt.matrix();
    let basis = v_lattice(&x, r, search_box)?;
    let span_start = if i < p { i } else { p };
    let predicted: Vec<Vec<Int>> = (span_start..2 * p)
        .map(|k| {
            let mut row = vec![Int::zero(); 2 * p];
            row[k] = Int::one();
            row
        })
        .collect();
    let predicted = hermite_normal_form(&predicted);
    Ok(if basis == predicted { RegimeOutcome::Confirmed } else { RegimeOutcome::Refuted })
}

// ---------------------------------------------------------------------------
// Depth proxy
// ---------------------------------------------------------------------------

/// `log2` of a positive rational to 32 fractional bits, by fixed-point
/// squaring with 96 guard bits. The result has denominator `2^32` and error
/// below `2^-32`.
pub fn log2_fixed(q: &Rat) -> Result<Rat> {
    const FRAC_BITS: u32 = 32;
    const GUARD: u32 = 96;
    if !q.is_positive() {
        return Err(Error::InvalidInput("log2 of a nonpositive number".into()));
    }
    // integer part: 2^k <= q < 2^{k+1}
    let mut k: i64 = q.numer().bits() as i64 - q.denom().bits() as i64;
    let pow = |e: i64| -> Rat {
        let two = Int::from(2);
        if e >= 0 {
            Rat::from_integer(two.pow(e as u32))
        } else {
            Rat::new(Int::one(), two.pow((-e) as u32))
        }
    };
    while pow(k) > *q {
        k -= 1;
    }
    while pow(k + 1) <= *q {
        k += 1;
    }
    // fixed point: x in [1, 2) scaled by 2^GUARD
    let scale = Int::one() << GUARD;
    let x0 = q / pow(k);
    let mut x = (x0.numer() << GUARD) / x0.denom();
    let mut frac = Int::zero();
    for _ in 0..FRAC_BITS {
        x = (&x * &x) >> GUARD;
        frac <<= 1;
        if x >= (&scale << 1) {
            frac += 1;
            x >>= 1;
        }
    }
    Ok(Rat::from_integer(Int::from(k)) + Rat::new(frac, Int::one() << FRAC_BITS))
}

/// Max over simple roots of `|sigma(log2 a)|`, floored at a configured
/// constant; depends only on the diagonal part.
pub fn depth_proxy(pt: &SiegelPoint, floor: &Rat) -> Result<Rat> {
    let a = pt.diagonal();
    let p = pt.rank();
    let mut best = floor.clone();
    for j in 0..p - 1 {
        let ratio = a[j].clone() / a[j + 1].clone();
        let l = log2_fixed(&ratio)?.abs();
        if l > best {
            best = l;
        }
    }
    let last = a[p - 1].clone() * a[p - 1].clone();
    let l = log2_fixed(&last)?.abs();
    if l > best {
        best = l;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Adaptive triangulation
// ---------------------------------------------------------------------------

/// A gauge function sampled on the integer grid of `[0, N]^2`, extended by
/// bilinear interpolation.
#[derive(Clone, Debug)]
pub struct GridFn {
    n: usize,
    values: Vec<Rat>,
}

impl GridFn {
    pub fn new(n: usize, values: Vec<Rat>) -> Result<Self> {
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidInput("need (N+1)^2 grid values".into()));
        }
        let g = GridFn { n, values };
        for y in 0..=n {
            for x in 0..=n {
                if g.at(x, y) < &Rat::one() {
                    return Err(Error::InvalidInput("gauge must be at least 1".into()));
                }
            }
        }
        // 1-Lipschitz on axis-adjacent pairs
        for y in 0..=n {
            for x in 0..n {
                if (g.at(x, y).clone() - g.at(x + 1, y).clone()).abs() > Rat::one() {
                    return Err(Error::InvalidInput("gauge is not 1-Lipschitz".into()));
                }
            }
        }
        for x in 0..=n {
            for y in 0..n {
                if (g.at(x, y).clone() - g.at(x, y + 1).clone()).abs() > Rat::one() {
                    return Err(Error::InvalidInput("gauge is not 1-Lipschitz".into()));
                }
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, x: usize, y: usize) -> &Rat {
        &self.values[y * (self.n + 1) + x]
    }

    /// Bilinear value at a rational point of the square.
    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        let fx = x.floor().to_integer().min(Int::from(self.n as i64 - 1)).max(Int::zero());
        let fy = y.floor().to_integer().min(Int::from(self.n as i64 - 1)).max(Int::zero());
        let ix = usize::try_from(&fx).unwrap();
        let iy = usize::try_from(&fy).unwrap();
        let dx = x - Rat::from_integer(fx);
        let dy = y - Rat::from_integer(fy);
        let one = Rat::one();
        let f00 = self.at(ix, iy).clone();
        let f10 = self.at(ix + 1, iy).clone();
        let f01 = self.at(ix, iy + 1).clone();
        let f11 = self.at(ix + 1, iy + 1).clone();
        f00.clone() * (one.clone() - dx.clone()) * (one.clone() - dy.clone())
            + f10 * dx.clone() * (one.clone() - dy.clone())
            + f01 * (one - dx.clone()) * dy.clone()
            + f11 * dx * dy
    }
}

/// A triangulation of `[0, N]^2` with rational vertices.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub n: usize,
    pub vertices: Vec<(Rat, Rat)>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Cell {
    x: usize,
    y: usize,
    size: usize,
}

/// Builds the balanced quadtree leaf set: subdivision driven by the dyadic
/// quantization of `min(h/3, N/2)` at cell corners, then 2:1 balancing.
fn quadtree_leaves(h: &GridFn) -> Vec<Cell> {
    let n = h.n();
    let target = |x: usize, y: usize| -> usize {
        let hv = h.at(x, y).clone();
        let third = hv / Rat::from_integer(Int::from(3));
        let cap = Rat::from_integer(Int::from((n / 2).max(1) as i64));
        let t = if third < cap { third } else { cap };
        // 2^floor(log2 t), floored at 1
        if t <= Rat::one() {
            return 1;
        }
        let mut s = 1usize;
        while Rat::from_integer(Int::from(2 * s as i64)) <= t {
            s *= 2;
        }
        s
    };
    let mut leaves = Vec::new();
    let mut stack = vec![Cell { x: 0, y: 0, size: n }];
    while let Some(c) = stack.pop() {
        let corners = [
            (c.x, c.y),
            (c.x + c.size, c.y),
            (c.x, c.y + c.size),
            (c.x + c.size, c.y + c.size),
        ];
        // Size by the largest corner target: the gauge at every corner of a
        // leaf then stays below 6 * size, which is what the per-edge lower
        // bound needs; the Lipschitz property keeps the smallest corner
        // above size for the upper bound.
        let tmax = corners.iter().map(|&(x, y)| target(x, y)).max().unwrap();
        if c.size > tmax && c.size > 1 {
            let half = c.size / 2;
            stack.push(Cell { x: c.x, y: c.y, size: half });
            stack.push(Cell { x: c.x + half, y: c.y, size: half });
            stack.push(Cell { x: c.x, y: c.y + half, size: half });
            stack.push(Cell { x: c.x + half, y: c.y + half, size: half });
        } else {
            leaves.push(c);
        }
    }
    // 2:1 balance: split any leaf with a neighbor smaller than half its size
    loop {
        let mut by_corner: HashMap<(usize, usize), usize> = HashMap::new();
        for c in &leaves {
            by_corner.insert((c.x, c.y), c.size);
        }
        let occupied = |x: usize, y: usize| -> Option<usize> { by_corner.get(&(x, y)).copied() };
        let mut to_split: Vec<usize> = Vec::new();
        'cells: for (idx, c) in leaves.iter().enumerate() {
            if c.size <= 1 {
                continue;
            }
            // look for any leaf corner strictly inside a side of c
            let quarter = c.size / 2;
            let probes = [
                (c.x.wrapping_sub(1), c.y),
                (c.x.wrapping_sub(1), c.y + quarter),
                (c.x + c.size, c.y),
                (c.x + c.size, c.y + quarter),
                (c.x, c.y.wrapping_sub(1)),
                (c.x + quarter, c.y.wrapping_sub(1)),
                (c.x, c.y + c.size),
                (c.x + quarter, c.y + c.size),
            ];
            for &(px, py) in &probes {
                if px > n || py > n {
                    continue;
                }
                // a neighbor leaf of size < c.size/2 starting at a probe
                // position means a hanging chain longer than one level
                if let Some(sz) = occupied(px.saturating_sub(0), py) {
                    if sz * 2 < c.size && touches(c, px, py, sz, n) {
                        to_split.push(idx);
                        continue 'cells;
                    }
                }
            }
        }
        if to_split.is_empty() {
            break;
        }
        to_split.sort_unstable();
        to_split.dedup();
        for idx in to_split.into_iter().rev() {
            let c = leaves.swap_remove(idx);
            let half = c.size / 2;
            leaves.push(Cell { x: c.x, y: c.y, size: half });
            leaves.push(Cell { x: c.x + half, y: c.y, size: half });
            leaves.push(Cell { x: c.x, y: c.y + half, size: half });
            leaves.push(Cell { x: c.x + half, y: c.y + half, size: half });
        }
    }
    leaves.sort_by_key(|c| (c.y, c.x, c.size));
    leaves
}

fn touches(c: &Cell, px: usize, py: usize, sz: usize, n: usize) -> bool {
    let _ = n;
    let (l1, r1, b1, t1) = (c.x, c.x + c.size, c.y, c.y + c.size);
    let (l2, r2, b2, t2) = (px, px + sz, py, py + sz);
    let share_v = (r2 == l1 || r1 == l2) && t2 > b1 && t1 > b2;
    let share_h = (t2 == b1 || t1 == b2) && r2 > l1 && r1 > l2;
    share_v || share_h
}

/// Size-adaptive triangulation of `[0, N]^2` whose edges satisfy
/// `min(h(x)/6, N/2) <= d(x, y) <= sqrt(2) h(x)` at both endpoints, with
/// `O(N^2)` triangles and squared-length sums `O(N^2)`. The mesh is a 2:1
/// balanced quadtree; cells without hanging midpoints split along a
/// diagonal, the others fan from their center.
pub fn adaptive_triangulate(n: usize, h: &GridFn) -> Result<Triangulation> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidInput("N must be a power of two, at least 2".into()));
    }
    if h.n() != n {
        return Err(Error::InvalidInput("gauge grid size must match N".into()));
    }
    let leaves = quadtree_leaves(h);

    // collect hanging midpoints per cell side
    let mut corner_set: HashMap<(usize, usize), ()> = HashMap::new();
    for c in &leaves {
        corner_set.insert((c.x, c.y), ());
        corner_set.insert((c.x + c.size, c.y), ());
        corner_set.insert((c.x, c.y + c.size), ());
        corner_set.insert((c.x + c.size, c.y + c.size), ());
    }

    let mut vertices: Vec<(Rat, Rat)> = Vec::new();
    let mut vertex_ids: HashMap<(Int, Int), usize> = HashMap::new();
    let vid = |vertices: &mut Vec<(Rat, Rat)>,
                   vertex_ids: &mut HashMap<(Int, Int), usize>,
                   x: Rat,
                   y: Rat|
     -> usize {
        // scale by 2 so cell centers (half-integers) key exactly
        let key = (
            (x.numer() * Int::from(2)) / x.denom(),
            (y.numer() * Int::from(2)) / y.denom(),
        );
        if let Some(&id) = vertex_ids.get(&key) {
            return id;
        }
        let id = vertices.len();
        vertices.push((x, y));
        vertex_ids.insert(key, id);
        id
    };

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for c in &leaves {
        let s = c.size;
        let ri = |v: usize| Rat::from_integer(Int::from(v as i64));
        // boundary walk with hanging midpoints (2:1 => at most one per side)
        let mid = s / 2;
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        let push_side = |boundary: &mut Vec<(usize, usize)>, from: (usize, usize), m: Option<(usize, usize)>| {
            boundary.push(from);
            if let Some(mp) = m {
                boundary.push(mp);
            }
        };
        let has = |x: usize, y: usize| corner_set.contains_key(&(x, y));
        let m_bottom = (s > 1 && has(c.x + mid, c.y)).then_some((c.x + mid, c.y));
        let m_right = (s > 1 && has(c.x + s, c.y + mid)).then_some((c.x + s, c.y + mid));
        let m_top = (s > 1 && has(c.x + mid, c.y + s)).then_some((c.x + mid, c.y + s));
        let m_left = (s > 1 && has(c.x, c.y + mid)).then_some((c.x, c.y + mid));
        push_side(&mut boundary, (c.x, c.y), m_bottom);
        push_side(&mut boundary, (c.x + s, c.y), m_right);
        push_side(&mut boundary, (c.x + s, c.y + s), m_top);
        push_side(&mut boundary, (c.x, c.y + s), m_left);

        let hanging = boundary.len() > 4;
        if !hanging {
            let a = vid(&mut vertices, &mut vertex_ids, ri(c.x), ri(c.y));
            let b = vid(&mut vertices, &mut vertex_ids, ri(c.x + s), ri(c.y));
            let d = vid(&mut vertices, &mut vertex_ids, ri(c.x + s), ri(c.y + s));
            let e = vid(&mut vertices, &mut vertex_ids, ri(c.x), ri(c.y + s));
            triangles.push([a, b, d]);
            triangles.push([a, d, e]);
        } else {
            // Fan from a hanging midpoint: midpoints are corners of the
            // half-size neighbors, where the gauge is small enough for the
            // short fan legs. The cell center would not satisfy the lower
            // bound on its legs.
            let corners = [
                (c.x, c.y),
                (c.x + s, c.y),
                (c.x + s, c.y + s),
                (c.x, c.y + s),
            ];
            let apex_pos = boundary
                .iter()
                .position(|v| !corners.contains(v))
                .expect("hanging cell has a midpoint");
            let ids: Vec<usize> = boundary
                .iter()
                .map(|&(x, y)| vid(&mut vertices, &mut vertex_ids, ri(x), ri(y)))
                .collect();
            let m = ids.len();
            let apex = ids[apex_pos];
            for k in 0..m {
                let a = ids[(apex_pos + k) % m];
                let b = ids[(apex_pos + k + 1) % m];
                if a == apex || b == apex {
                    continue;
                }
                triangles.push([apex, a, b]);
            }
        }
    }
    let tri = Triangulation { n, vertices, triangles };
    verify_conforming(&tri)?;
    verify_edge_bounds(&tri, h)?;
    Ok(tri)
}

/// Every interior edge is shared by exactly two triangles, boundary edges by
/// one.
pub fn verify_conforming(t: &Triangulation) -> Result<()> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &t.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *count.entry(key).or_insert(0) += 1;
        }
    }
    let nr = Rat::from_integer(Int::from(t.n as i64));
    for (&(a, b), &c) in &count {
        let (xa, ya) = &t.vertices[a];
        let (xb, yb) = &t.vertices[b];
        let on_boundary = (xa.is_zero() && xb.is_zero())
            || (ya.is_zero() && yb.is_zero())
            || (*xa == nr && *xb == nr)
            || (*ya == nr && *yb == nr);
        let expect = if on_boundary { 1 } else { 2 };
        if c != expect {
            return Err(Error::Invariant(format!(
                "edge ({a}, {b}) belongs to {c} triangles, expected {expect}"
            )));
        }
    }
    Ok(())
}

/// The verbatim per-edge size condition, checked at both endpoints.
pub fn verify_edge_bounds(t: &Triangulation, h: &GridFn) -> Result<()> {
    let two = Rat::from_integer(Int::from(2));
    let six = Rat::from_integer(Int::from(6));
    let half_n = Rat::new(Int::from(t.n as i64), Int::from(2));
    let mut seen: std::collections::HashSet<(usize, usize)> = Default::default();
    for tri in &t.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                continue;
            }
            let (xa, ya) = &t.vertices[a];
            let (xb, yb) = &t.vertices[b];
            let d2 = (xa.clone() - xb.clone()) * (xa.clone() - xb.clone())
                + (ya.clone() - yb.clone()) * (ya.clone() - yb.clone());
            for (x, y) in [(xa, ya), (xb, yb)] {
                let hv = h.eval(x, y);
                let lower = {
                    let candidate = hv.clone() / six.clone();
                    if candidate < half_n {
                        candidate
                    } else {
                        half_n.clone()
                    }
                };
                if lower.clone() * lower.clone() > d2 {
                    return Err(Error::Invariant(format!(
                        "edge ({a}, {b}) shorter than min(h/6, N/2) at an endpoint"
                    )));
                }
                if d2 > two.clone() * hv.clone() * hv {
                    return Err(Error::Invariant(format!(
                        "edge ({a}, {b}) longer than sqrt(2) h at an endpoint"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Triangle count and squared-length sums, normalized by `N^2`.
pub struct TriangulationReport {
    pub triangles: usize,
    pub count_over_n2: Rat,
    pub squared_sum_over_n2: Rat,
}

pub fn triangulation_report(t: &Triangulation) -> TriangulationReport {
    let mut sq = Rat::zero();
    for tri in &t.triangles {
        let mut perim2 = Rat::zero();
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let (xa, ya) = &t.vertices[a];
            let (xb, yb) = &t.vertices[b];
            let d2 = (xa.clone() - xb.clone()) * (xa.clone() - xb.clone())
                + (ya.clone() - yb.clone()) * (ya.clone() - yb.clone());
            // squared edge length plus its contribution to squared perimeter
            // bounded by 3 Σ d^2; use d^2 both ways to stay exact
            perim2 += d2.clone();
            sq += d2;
        }
        sq += Rat::from_integer(Int::from(3)) * perim2;
    }
    let n2 = Rat::from_integer(Int::from((t.n * t.n) as i64));
    TriangulationReport {
        triangles: t.triangles.len(),
        count_over_n2: Rat::from_integer(Int::from(t.triangles.len() as i64)) / n2.clone(),
        squared_sum_over_n2: sq / n2,
    }
}

/// JSON for the CLI: vertex list and triangle list.
pub fn triangulation_json(t: &Triangulation) -> String {
    let verts: Vec<String> =
        t.vertices.iter().map(|(x, y)| format!("[\"{x}\",\"{y}\"]")).collect();
    let tris: Vec<String> =
        t.triangles.iter().map(|t| format!("[{},{},{}]", t[0], t[1], t[2])).collect();
    format!(
        "{{\"n\":{},\"vertices\":[{}],\"triangles\":[{}]}}",
        t.n,
        verts.join(","),
        tris.join(",")
    )
}

/// Simple SVG rendering for visual inspection.
pub fn triangulation_svg(t: &Triangulation) -> String {
    let scale = 512.0 / t.n as f64;
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\">\n",
    );
    for tri in &t.triangles {
        let pts: Vec<String> = tri
            .iter()
            .map(|&i| {
                let (x, y) = &t.vertices[i];
                let fx = x.numer().to_string().parse::<f64>().unwrap_or(0.0)
                    / x.denom().to_string().parse::<f64>().unwrap_or(1.0);
                let fy = y.numer().to_string().parse::<f64>().unwrap_or(0.0)
                    / y.denom().to_string().parse::<f64>().unwrap_or(1.0);
                format!("{:.2},{:.2}", fx * scale, 512.0 - fy * scale)
            })
            .collect();
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>\n",
            pts.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    fn ri(n: i64) -> Rat {
        Rat::from_integer(Int::from(n))
    }

    #[test]
    fn siegel_point_validation() {
        let eps = rat(1, 4);
        assert!(SiegelPoint::new(2, eps.clone(), BTreeMap::new(), vec![ri(4), ri(2)]).is_ok());
        // violated chain: a_1 <= eps a_2
        assert!(SiegelPoint::new(2, eps.clone(), BTreeMap::new(), vec![rat(1, 8), ri(2)]).is_err());
        // violated floor: a_p^2 <= eps
        assert!(SiegelPoint::new(2, eps, BTreeMap::new(), vec![ri(4), rat(1, 4)]).is_err());
    }

    #[test]
    fn siegel_matrix_is_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = 2;
        for _ in 0..10 {
            let mut n_coords = BTreeMap::new();
            for alpha in positive_roots(p) {
                n_coords.insert(alpha, rat(rng.gen_range(-32..=32), 64));
            }
            let pt =
                SiegelPoint::new(p, rat(1, 4), n_coords, vec![ri(8), ri(2)]).unwrap();
            assert!(pt.matrix().is_symplectic().unwrap());
            assert!(pt.n_in_box(&rat(1, 2)));
        }
        // p=1 diag example
        let pt = SiegelPoint::new(1, rat(1, 4), BTreeMap::new(), vec![ri(4)]).unwrap();
        let m = pt.matrix();
        assert_eq!(m.at(0, 0), &ri(4));
        assert_eq!(m.at(1, 1), &rat(1, 4));
    }

    #[test]
    fn hnf_is_canonical_and_membership_works() {
        let rows = vec![
            vec![Int::from(2), Int::from(4)],
            vec![Int::from(0), Int::from(6)],
            vec![Int::from(2), Int::from(10)],
        ];
        let h = hermite_normal_form(&rows);
        assert_eq!(h.len(), 2);
        assert!(hnf_contains(&h, &[Int::from(2), Int::from(4)]));
        assert!(hnf_contains(&h, &[Int::from(4), Int::from(2)]));
        assert!(!hnf_contains(&h, &[Int::from(1), Int::from(0)]));

        // permuting generators gives the same form
        let rows2 = vec![rows[2].clone(), rows[0].clone(), rows[1].clone()];
        assert_eq!(hermite_normal_form(&rows2), h);
    }

    #[test]
    fn identity_short_vectors_span_everything() {
        let p = 1;
        let x: Mat<Rat> = Mat::identity(2 * p);
        let basis = v_lattice(&x, &ri(1), 3).unwrap();
        let expected = hermite_normal_form(&[
            vec![Int::one(), Int::zero()],
            vec![Int::zero(), Int::one()],
        ]);
        assert_eq!(basis, expected);
    }

    #[test]
    fn stretched_diagonal_keeps_only_short_direction() {
        // p=1, a = 100: only z_{-1} is short at r = 1
        let pt = SiegelPoint::new(1, rat(1, 4), BTreeMap::new(), vec![ri(100)]).unwrap();
        let basis = v_lattice(&pt.matrix(), &ri(1), 10).unwrap();
        assert_eq!(basis, vec![vec![Int::zero(), Int::one()]]);
    }

    #[test]
    fn rshort_gap_and_last_block_regimes() {
        let c = ri(8);
        // part (a): p=2, a = (2 C^3, C), r = 3/2 C^2, gap at i = 1
        let a1 = ri(2) * c.clone() * c.clone() * c.clone();
        let a2 = c.clone();
        let r = rat(3, 2) * c.clone() * c.clone();
        let mut n_coords = BTreeMap::new();
        for alpha in positive_roots(2) {
            n_coords.insert(alpha, rat(1, 4));
        }
        let pt = SiegelPoint::new(2, rat(1, 4), n_coords.clone(), vec![a1, a2]).unwrap();
        assert_eq!(rshort_check(&pt, 1, &r, &c, 50).unwrap(), RegimeOutcome::Confirmed);

        // part (b): p=2, a = (C^2, 2C), r = 1
        let pt =
            SiegelPoint::new(2, rat(1, 4), n_coords, vec![c.clone() * c.clone(), ri(2) * c.clone()])
                .unwrap();
        assert_eq!(rshort_check(&pt, 2, &ri(1), &c, 50).unwrap(), RegimeOutcome::Confirmed);

        // no gap: outside the regime
        let flat = SiegelPoint::new(2, rat(1, 4), BTreeMap::new(), vec![ri(1), ri(1)]).unwrap();
        assert_eq!(rshort_check(&flat, 1, &ri(1), &c, 10).unwrap(), RegimeOutcome::OutsideRegime);
    }

    #[test]
    fn log2_fixed_matches_known_values() {
        assert_eq!(log2_fixed(&ri(8)).unwrap(), ri(3));
        assert_eq!(log2_fixed(&rat(1, 4)).unwrap(), ri(-2));
        let l3 = log2_fixed(&ri(3)).unwrap();
        // log2(3) = 1.5849625007...
        let approx = rat(1_584_962_500, 1_000_000_000);
        assert!((l3.clone() - approx).abs() < rat(1, 100_000_000));
    }

    #[test]
    fn depth_proxy_examples() {
        let floor = ri(2);
        // flat point: the floor
        let flat = SiegelPoint::new(2, rat(1, 4), BTreeMap::new(), vec![ri(1), ri(1)]).unwrap();
        assert_eq!(depth_proxy(&flat, &floor).unwrap(), floor);
        // a = (8, 2): both simple roots give log2 = 2
        let pt = SiegelPoint::new(2, rat(1, 4), BTreeMap::new(), vec![ri(8), ri(2)]).unwrap();
        assert_eq!(depth_proxy(&pt, &floor).unwrap(), ri(2));
        // widening the gap increases the proxy
        let wide = SiegelPoint::new(2, rat(1, 4), BTreeMap::new(), vec![ri(64), ri(2)]).unwrap();
        assert!(depth_proxy(&wide, &floor).unwrap() > depth_proxy(&pt, &floor).unwrap());
        // proxy ignores the unipotent coordinates
        let mut n_coords = BTreeMap::new();
        for alpha in positive_roots(2) {
            n_coords.insert(alpha, rat(1, 3));
        }
        let with_n = SiegelPoint::new(2, rat(1, 4), n_coords, vec![ri(8), ri(2)]).unwrap();
        assert_eq!(depth_proxy(&with_n, &floor).unwrap(), depth_proxy(&pt, &floor).unwrap());
    }

    fn constant_gauge(n: usize, v: Rat) -> GridFn {
        GridFn::new(n, vec![v; (n + 1) * (n + 1)]).unwrap()
    }

    #[test]
    fn uniform_gauge_gives_unit_mesh() {
        let n = 4;
        let h = constant_gauge(n, Rat::one());
        let t = adaptive_triangulate(n, &h).unwrap();
        assert_eq!(t.triangles.len(), 2 * n * n);
    }

    #[test]
    fn distance_gauge_meshes_verify() {
        for n in [4usize, 8, 16] {
            let mut vals = Vec::new();
            for y in 0..=n {
                for _x in 0..=n {
                    vals.push(Rat::from_integer(Int::from(1.max(y as i64))));
                }
            }
            let h = GridFn::new(n, vals).unwrap();
            let t = adaptive_triangulate(n, &h).unwrap();
            // checks run inside; also count is O(N^2)
            assert!(t.triangles.len() <= 8 * n * n);
        }
    }

    #[test]
    fn random_lipschitz_gauges_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [4usize, 8] {
            for _ in 0..5 {
                let mut vals: Vec<Rat> =
                    (0..(n + 1) * (n + 1)).map(|_| ri(rng.gen_range(1..=(n as i64)))).collect();
                // project to 1-Lipschitz by repeated relaxation
                for _ in 0..2 * n {
                    for y in 0..=n {
                        for x in 0..=n {
                            let mut best = vals[y * (n + 1) + x].clone();
                            let neighbors: Vec<(usize, usize)> = [
                                (x.wrapping_sub(1), y),
                                (x + 1, y),
                                (x, y.wrapping_sub(1)),
                                (x, y + 1),
                            ]
                            .into_iter()
                            .filter(|&(a, b)| a <= n && b <= n)
                            .collect();
                            for (a, b) in neighbors {
                                let lim = vals[b * (n + 1) + a].clone() + Rat::one();
                                if best > lim {
                                    best = lim;
                                }
                            }
                            vals[y * (n + 1) + x] = best.max(Rat::one());
                        }
                    }
                }
                let h = GridFn::new(n, vals).unwrap();
                let t = adaptive_triangulate(n, &h).unwrap();
                let rep = triangulation_report(&t);
                assert!(rep.triangles > 0);
            }
        }
    }

    #[test]
    fn gauge_validation() {
        // not Lipschitz
        let mut vals = vec![Rat::one(); 9];
        vals[4] = ri(5);
        assert!(GridFn::new(2, vals).is_err());
        // below 1
        let vals = vec![rat(1, 2); 9];
        assert!(GridFn::new(2, vals).is_err());
    }
}
