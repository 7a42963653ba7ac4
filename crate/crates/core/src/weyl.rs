//! The affine Weyl group W of type C~ as periodic signed permutations of Z,
//! together with its length functions, Bruhat order, parabolic subgroups and
//! minimal coset representatives.
//!
//! An element is stored by its window [a_1, ..., a_d]_c, meaning w(i) = a_i
//! for 1 <= i <= d; the whole permutation is recovered from
//! w(-i) = -w(i) and w(i + D) = w(i) + D with D = 2d + 2, so that 0 and d+1
//! are fixed points of every element modulo D.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Default ceiling on |W_lambda| for parabolic enumeration.
pub const DEFAULT_PARABOLIC_LIMIT: u128 = 1_000_000;

/// An element of W = Perm^c(Z) for type C~_d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePermC {
    d: usize,
    window: Vec<i64>,
}

impl AffinePermC {
    pub fn new(d: usize, window: Vec<i64>) -> Result<Self> {
        if window.len() != d {
            return Err(Error::InvalidWindow(format!(
                "expected {} entries, got {}",
                d,
                window.len()
            )));
        }
        let dd = 2 * (d as i64) + 2;
        let mut seen = BTreeSet::new();
        seen.insert(0i64);
        seen.insert(d as i64 + 1);
        for &a in &window {
            let r = a.rem_euclid(dd);
            let rneg = (-a).rem_euclid(dd);
            if !seen.insert(r) || !seen.insert(rneg) {
                return Err(Error::InvalidWindow(format!(
                    "window {:?} is not a bijection mod {}",
                    window, dd
                )));
            }
        }
        Ok(AffinePermC { d, window })
    }

    pub fn identity(d: usize) -> Self {
        AffinePermC {
            d,
            window: (1..=d as i64).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Period D = 2d + 2.
    pub fn period(&self) -> i64 {
        2 * (self.d as i64) + 2
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn is_identity(&self) -> bool {
        self.window.iter().enumerate().all(|(i, &a)| a == i as i64 + 1)
    }

    /// The simple reflection s_i, 0 <= i <= d.
    pub fn generator(d: usize, i: usize) -> Result<Self> {
        if i > d {
            return Err(Error::IndexRange(format!("generator index {} > {}", i, d)));
        }
        let mut w: Vec<i64> = (1..=d as i64).collect();
        if i == 0 {
            w[0] = -1;
        } else if i == d {
            w[d - 1] = d as i64 + 2;
        } else {
            w.swap(i - 1, i);
        }
        Ok(AffinePermC { d, window: w })
    }

    /// The transposition (i,j)_c swapping kD +- i and kD +- j for all k.
    pub fn transposition_c(d: usize, i: i64, j: i64) -> Result<Self> {
        let t = TranspositionC::new(d, i, j)?;
        let window = (1..=d as i64).map(|x| t.apply(x)).collect();
        AffinePermC::new(d, window)
    }

    /// Evaluate the permutation at any integer.
    pub fn apply(&self, x: i64) -> i64 {
        let dd = self.period();
        let r = x.rem_euclid(dd);
        let q = (x - r) / dd;
        let base = if r == 0 {
            0
        } else if r == self.d as i64 + 1 {
            r
        } else if r <= self.d as i64 {
            self.window[(r - 1) as usize]
        } else {
            // r in [d+2 .. D-1] is congruent to -(D - r) with D - r in [1..d]
            dd - self.window[(dd - r - 1) as usize]
        };
        q * dd + base
    }

    /// (self . other)(x) = self(other(x)).
    pub fn compose(&self, other: &AffinePermC) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::RankMismatch(format!("{} vs {}", self.d, other.d)));
        }
        let window = (1..=self.d as i64)
            .map(|x| self.apply(other.apply(x)))
            .collect();
        Ok(AffinePermC { d: self.d, window })
    }

    pub fn inverse(&self) -> Self {
        let dd = self.period();
        let mut window = vec![0i64; self.d];
        for t in 1..=self.d as i64 {
            let r = t.rem_euclid(dd);
            // Find the window slot whose residue class hits r, in either sign.
            let mut val = None;
            for (idx, &a) in self.window.iter().enumerate() {
                if a.rem_euclid(dd) == r {
                    let m = (t - a) / dd;
                    val = Some(idx as i64 + 1 + m * dd);
                    break;
                }
                if (-a).rem_euclid(dd) == r {
                    let m = (t + a) / dd;
                    val = Some(-(idx as i64 + 1) + m * dd);
                    break;
                }
            }
            window[(t - 1) as usize] = val.expect("valid window covers all residues");
        }
        AffinePermC { d: self.d, window }
    }

    /// Max displacement M = max_i |w(i) - i| over the window (and hence over
    /// all of Z, by periodicity and oddness).
    pub fn max_displacement(&self) -> i64 {
        self.window
            .iter()
            .enumerate()
            .map(|(i, &a)| (a - (i as i64 + 1)).abs())
            .max()
            .unwrap_or(0)
    }

    /// Coxeter length, via the crossed-pair count
    /// l(g) = 1/2 |{(i,j) in [1..d] x Z : i>j, g(i)<g(j) or i<j, g(i)>g(j)}|.
    ///
    /// A pair (i,j) can cross only when |j - i| < 2M where M bounds the
    /// displacement |g(x) - x|, so the scan over j is finite.
    pub fn length(&self) -> u64 {
        let d = self.d as i64;
        let reach = 2 * self.max_displacement() + 1;
        let mut count: u64 = 0;
        for i in 1..=d {
            let gi = self.apply(i);
            for j in (i - reach)..=(i + reach) {
                if j == i {
                    continue;
                }
                let gj = self.apply(j);
                if (i > j && gi < gj) || (i < j && gi > gj) {
                    count += 1;
                }
            }
        }
        debug_assert!(count % 2 == 0, "crossed-pair count must be even");
        count / 2
    }

    /// Independent length oracle: the Bjorner-Brenti formula for the
    /// period-(2d+1) presentation, reached through the order-preserving
    /// reindexing that removes the fixed points d+1+DZ.
    pub fn length_bb05(&self) -> u64 {
        let d = self.d as i64;
        let p = 2 * d + 1; // period of the reindexed presentation
        let w: Vec<i64> = (1..=d).map(|i| iota_inv(self.apply(i), d)).collect();
        let mut inv_b: i64 = 0;
        for a in 0..w.len() {
            if w[a] < 0 {
                inv_b += 1; // neg
            }
            for b in (a + 1)..w.len() {
                if w[a] > w[b] {
                    inv_b += 1; // inv
                }
                if w[a] + w[b] < 0 {
                    inv_b += 1; // nsp
                }
            }
        }
        let mut floors: i64 = 0;
        for a in 0..w.len() {
            for b in a..w.len() {
                floors += (w[a] - w[b]).abs() / p;
                floors += (w[a] + w[b]).abs() / p;
            }
        }
        (inv_b + floors) as u64
    }

    /// Smallest i with l(g s_i) < l(g); None iff g is the identity.
    pub fn descent_right(&self) -> Option<usize> {
        let d = self.d;
        if self.window[0] < 0 {
            return Some(0);
        }
        for i in 1..d {
            if self.window[i - 1] > self.window[i] {
                return Some(i);
            }
        }
        if self.window[d - 1] > d as i64 + 1 {
            return Some(d);
        }
        None
    }

    /// True iff l(g s_i) < l(g).
    pub fn has_descent_right(&self, i: usize) -> bool {
        let d = self.d;
        if i == 0 {
            self.window[0] < 0
        } else if i == d {
            self.window[d - 1] > d as i64 + 1
        } else {
            self.window[i - 1] > self.window[i]
        }
    }

    /// True iff l(s_i g) < l(g).
    pub fn has_descent_left(&self, i: usize) -> bool {
        // l(s_i g) < l(g) iff g^{-1}(i-wall) crosses; use g^{-1} positions.
        let d = self.d as i64;
        let inv = |t: i64| self.preimage(t);
        if i == 0 {
            inv(1) < 0
        } else if i == self.d {
            inv(d) > d + 1
        } else {
            inv(i as i64) > inv(i as i64 + 1)
        }
    }

    /// g^{-1}(t) without materializing the inverse.
    pub fn preimage(&self, t: i64) -> i64 {
        let dd = self.period();
        let r = t.rem_euclid(dd);
        if r == 0 || r == self.d as i64 + 1 {
            return t;
        }
        for (idx, &a) in self.window.iter().enumerate() {
            if a.rem_euclid(dd) == r {
                return idx as i64 + 1 + (t - a);
            }
            if (-a).rem_euclid(dd) == r {
                return -(idx as i64 + 1) + (t + a);
            }
        }
        unreachable!("valid window covers all residues")
    }

    /// Multiply by s_i on the right: g s_i.
    pub fn mul_gen_right(&self, i: usize) -> Self {
        let d = self.d;
        let mut w = self.window.clone();
        if i == 0 {
            w[0] = -w[0];
        } else if i == d {
            w[d - 1] = 2 * (d as i64 + 1) - w[d - 1];
        } else {
            w.swap(i - 1, i);
        }
        AffinePermC { d, window: w }
    }

    /// Multiply by s_i on the left: s_i g.
    pub fn mul_gen_left(&self, i: usize) -> Self {
        let s = AffinePermC::generator(self.d, i).expect("index checked by caller");
        s.compose(self).expect("same rank")
    }

    /// A reduced word (i_1, ..., i_l) with g = s_{i_1} ... s_{i_l}, obtained
    /// by always stripping the smallest right descent.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut g = self.clone();
        let mut rev = Vec::new();
        while let Some(i) = g.descent_right() {
            rev.push(i);
            g = g.mul_gen_right(i);
        }
        rev.reverse();
        rev
    }

    pub fn from_word(d: usize, word: &[usize]) -> Result<Self> {
        let mut g = AffinePermC::identity(d);
        for &i in word {
            if i > d {
                return Err(Error::IndexRange(format!("letter {} > {}", i, d)));
            }
            g = g.mul_gen_right(i);
        }
        Ok(g)
    }

    /// Bruhat order h <= g, by the dominance criterion
    /// h[s,t] <= g[s,t] for all s,t, where g[s,t] = #{a <= s : g(a) >= t}.
    ///
    /// The function (s,t) -> g[s,t] is invariant under (s,t) -> (s+D, t+D),
    /// and for s >= t + M the count equals (s - t - M + 1) plus a quantity
    /// depending on t alone, so a bounded window of offsets suffices.
    pub fn bruhat_leq(&self, g: &AffinePermC) -> Result<bool> {
        let h = self;
        if h.d != g.d {
            return Err(Error::RankMismatch(format!("{} vs {}", h.d, g.d)));
        }
        let dd = h.period();
        let m = h.max_displacement().max(g.max_displacement());
        let b = m + dd;
        for t in 0..dd {
            for s in (t - b)..=(t + b) {
                if rank_count(h, s, t, m) > rank_count(g, s, t, m) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Window text form `[a1,a2,...,ad]_c`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t
            .strip_suffix("_c")
            .ok_or_else(|| Error::Parse(format!("missing _c suffix in {:?}", s)))?;
        let t = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("missing brackets in {:?}", s)))?;
        let window: Vec<i64> = if t.trim().is_empty() {
            vec![]
        } else {
            t.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?
        };
        let d = window.len();
        AffinePermC::new(d, window)
    }
}

fn rank_count(g: &AffinePermC, s: i64, t: i64, m: i64) -> i64 {
    // #{a <= s : g(a) >= t}: a must lie in [t - m .. s]; below that g(a) < t.
    let lo = t - m - 1;
    if s < lo {
        return 0;
    }
    let tail = if s >= t + m { s - (t + m) + 1 } else { 0 };
    let hi = s.min(t + m - 1);
    let mut c = tail;
    for a in lo..=hi {
        if g.apply(a) >= t {
            c += 1;
        }
    }
    c
}

/// The reindexing removing the fixed points d+1+DZ: order-preserving
/// bijection from Z onto Z \ (d+1+DZ), here inverted.
fn iota_inv(x: i64, d: i64) -> i64 {
    let dd = 2 * d + 2;
    let mut r = x.rem_euclid(dd);
    let mut q = (x - r) / dd;
    if r > d + 1 {
        r -= dd;
        q += 1;
    }
    debug_assert!(r != d + 1, "x must avoid the removed classes");
    q * (dd - 1) + r
}

impl fmt::Display for AffinePermC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.window.iter().map(|a| a.to_string()).collect();
        write!(f, "[{}]_c", strs.join(","))
    }
}

/// Transposition (i,j)_c as a reusable action on Z.
pub struct TranspositionC {
    dd: i64,
    i: i64,
    j: i64,
}

impl TranspositionC {
    pub fn new(d: usize, i: i64, j: i64) -> Result<Self> {
        let dd = 2 * (d as i64) + 2;
        let ri = i.rem_euclid(dd);
        let rj = j.rem_euclid(dd);
        if ri == rj || ri == (-j).rem_euclid(dd) {
            return Err(Error::IndexRange(format!("(i,j)_c needs i != +-j mod D, got ({}, {})", i, j)));
        }
        for r in [ri, rj] {
            if r == 0 || r == (d as i64) + 1 {
                return Err(Error::IndexRange(format!(
                    "transposition index {} lies in a fixed class",
                    r
                )));
            }
        }
        Ok(TranspositionC { dd, i, j })
    }

    pub fn apply(&self, x: i64) -> i64 {
        let dd = self.dd;
        let r = x.rem_euclid(dd);
        if r == self.i.rem_euclid(dd) {
            x + (self.j - self.i)
        } else if r == (-self.i).rem_euclid(dd) {
            x - (self.j - self.i)
        } else if r == self.j.rem_euclid(dd) {
            x - (self.j - self.i)
        } else if r == (-self.j).rem_euclid(dd) {
            x + (self.j - self.i)
        } else {
            x
        }
    }
}

/// A weak composition (lambda_0, ..., lambda_{r+1}) of d; the two end parts
/// index the type-C blocks, the middle parts type-A blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<i64>,
}

impl Composition {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidComposition(
                "need at least the two end parts".into(),
            ));
        }
        if parts.iter().any(|&p| p < 0) {
            return Err(Error::InvalidComposition(format!("negative part in {:?}", parts)));
        }
        Ok(Composition { parts })
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    /// Number of middle (type-A) parts.
    pub fn r(&self) -> usize {
        self.parts.len() - 2
    }

    pub fn d(&self) -> i64 {
        self.parts.iter().sum()
    }

    /// Partial sums lambda_0, lambda_0 + lambda_1, ..., up to d - lambda_last:
    /// the generator indices removed from S.
    pub fn cuts(&self) -> Vec<i64> {
        let mut acc = 0;
        let mut out = Vec::with_capacity(self.parts.len() - 1);
        for &p in &self.parts[..self.parts.len() - 1] {
            acc += p;
            out.push(acc);
        }
        out
    }

    /// Generator indices of the parabolic subgroup W_lambda inside [0..d].
    pub fn generator_indices(&self) -> Vec<usize> {
        let d = self.d();
        let cuts: BTreeSet<i64> = self.cuts().into_iter().collect();
        (0..=d)
            .filter(|i| !cuts.contains(i))
            .map(|i| i as usize)
            .collect()
    }

    /// The interval block R_i for the base indices 0 <= i <= r+1, as an
    /// inclusive range (possibly empty when hi < lo).
    pub fn block_base(&self, i: usize) -> (i64, i64) {
        let r = self.r();
        let d = self.d();
        if i == 0 {
            (-self.parts[0], self.parts[0])
        } else if i == r + 1 {
            (d + 1 - self.parts[r + 1], d + 1 + self.parts[r + 1])
        } else {
            let lo: i64 = self.parts[..i].iter().sum();
            (lo + 1, lo + self.parts[i])
        }
    }

    /// R_i for any integer i, via R_{-i} = -R_i and R_{i+n'} = R_i + D where
    /// n' = 2r' + 2 counts a full period of blocks and D = 2d + 2.
    pub fn block(&self, i: i64) -> (i64, i64) {
        let np = 2 * (self.r() as i64) + 2;
        let dd = 2 * self.d() + 2;
        let r0 = i.rem_euclid(np);
        let q = (i - r0) / np;
        let base = if r0 <= self.r() as i64 + 1 {
            self.block_base(r0 as usize)
        } else {
            let (lo, hi) = self.block_base((np - r0) as usize);
            (-hi + dd, -lo + dd)
        };
        (base.0 + q * dd, base.1 + q * dd)
    }

    /// The block index j with x in R_j.
    pub fn block_index(&self, x: i64) -> i64 {
        let np = 2 * (self.r() as i64) + 2;
        let dd = 2 * self.d() + 2;
        let lam0 = self.parts[0];
        let shifted = x + lam0;
        let q = shifted.div_euclid(dd);
        let x0 = x - q * dd; // x0 in [-lam0 .. D - lam0)
        for i in 0..=(self.r() as i64 + 1) {
            let (lo, hi) = self.block_base(i as usize);
            if x0 >= lo && x0 <= hi {
                return i + q * np;
            }
        }
        // Upper half of the period: mirror through d+1.
        let y = dd - x0;
        for i in 1..=(self.r() as i64) {
            let (lo, hi) = self.block_base(i as usize);
            if y >= lo && y <= hi {
                return (np - i) + q * np;
            }
        }
        unreachable!("blocks partition Z")
    }

    /// |W_lambda| = 2^l0 l0! * prod(l_i!) * 2^lk lk!.
    pub fn parabolic_size(&self) -> u128 {
        fn fact(m: i64) -> u128 {
            (1..=m as u128).product::<u128>().max(1)
        }
        let r = self.r();
        let mut size: u128 = fact(self.parts[0]) << self.parts[0];
        for i in 1..=r {
            size = size.saturating_mul(fact(self.parts[i]));
        }
        size.saturating_mul(fact(self.parts[r + 1]) << self.parts[r + 1])
    }

    /// Longest element of W_lambda: reverses each type-A block and negates
    /// each type-C block through its symmetry center.
    pub fn longest_element(&self) -> AffinePermC {
        let d = self.d();
        let r = self.r();
        let mut window: Vec<i64> = (1..=d).collect();
        for x in 1..=self.parts[0] {
            window[(x - 1) as usize] = -x;
        }
        for i in 1..=r {
            let (lo, hi) = self.block_base(i);
            for x in lo..=hi {
                window[(x - 1) as usize] = lo + hi - x;
            }
        }
        let lk = self.parts[r + 1];
        for t in 1..=lk {
            let x = d + 1 - t;
            window[(x - 1) as usize] = d + 1 + t;
        }
        AffinePermC { d: d as usize, window }
    }

    /// Full enumeration of W_lambda, guarded by `limit`.
    pub fn enumerate_parabolic(&self, limit: u128) -> Result<Vec<AffinePermC>> {
        let size = self.parabolic_size();
        if size > limit {
            return Err(Error::ParabolicTooLarge { size, limit });
        }
        let d = self.d() as usize;
        let r = self.r();
        let mut windows: Vec<Vec<i64>> = vec![(1..=d as i64).collect()];
        // Type-C block at 0: signed permutations of [1..l0].
        windows = extend_signed(windows, 1, self.parts[0], false, self.d());
        // Middle type-A blocks.
        for i in 1..=r {
            let (lo, hi) = self.block_base(i);
            windows = extend_plain(windows, lo, hi);
        }
        // Type-C block at r+1: signed permutations around d+1.
        windows = extend_signed(windows, 1, self.parts[r + 1], true, self.d());
        windows
            .into_iter()
            .map(|w| AffinePermC::new(d, w))
            .collect()
    }

    pub fn as_text(&self) -> String {
        let strs: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        format!("({})", strs.join(","))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s
            .trim()
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("missing parens in {:?}", s)))?;
        let parts: Vec<i64> = if t.trim().is_empty() {
            vec![]
        } else {
            t.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?
        };
        Composition::new(parts)
    }
}

fn permutations_of(vals: &[i64]) -> Vec<Vec<i64>> {
    if vals.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        let mut rest = vals.to_vec();
        rest.remove(k);
        for mut tail in permutations_of(&rest) {
            let mut p = vec![v];
            p.append(&mut tail);
            out.push(p);
        }
    }
    out
}

fn extend_plain(windows: Vec<Vec<i64>>, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if lo > hi {
        return windows;
    }
    let vals: Vec<i64> = (lo..=hi).collect();
    let perms = permutations_of(&vals);
    let mut out = Vec::with_capacity(windows.len() * perms.len());
    for w in &windows {
        for p in &perms {
            let mut nw = w.clone();
            for (off, &v) in p.iter().enumerate() {
                nw[(lo - 1) as usize + off] = v;
            }
            out.push(nw);
        }
    }
    out
}

/// Signed permutations acting on positions [1..m] (around 0) or on positions
/// [d+1-m..d] reflected through d+1 (`upper = true`).
fn extend_signed(windows: Vec<Vec<i64>>, _one: i64, m: i64, upper: bool, d: i64) -> Vec<Vec<i64>> {
    if m == 0 {
        return windows;
    }
    let vals: Vec<i64> = (1..=m).collect();
    let mut signed: Vec<Vec<i64>> = Vec::new();
    for p in permutations_of(&vals) {
        let mlen = p.len() as u32;
        for mask in 0..(1u64 << mlen) {
            let q: Vec<i64> = p
                .iter()
                .enumerate()
                .map(|(k, &v)| if mask >> k & 1 == 1 { -v } else { v })
                .collect();
            signed.push(q);
        }
    }
    let mut out = Vec::with_capacity(windows.len() * signed.len());
    for w in &windows {
        for q in &signed {
            let mut nw = w.clone();
            for (off, &v) in q.iter().enumerate() {
                if upper {
                    // position d+1-t maps to d+1-v (reflection center d+1)
                    let pos = d - off as i64; // t = off+1 -> position d+1-t
                    nw[(pos - 1) as usize] = d + 1 - v;
                } else {
                    nw[off] = v;
                }
            }
            out.push(nw);
        }
    }
    out
}

/// Is g the minimal-length representative of W_lambda g, i.e. is g^{-1}
/// order-preserving on every block R_i^lambda?
pub fn is_min_right_rep(g: &AffinePermC, lambda: &Composition) -> bool {
    for i in 0..=(lambda.r() + 1) {
        let (lo, hi) = lambda.block_base(i);
        let mut prev = None;
        for x in lo..=hi {
            let y = g.preimage(x);
            if let Some(p) = prev {
                if y <= p {
                    return false;
                }
            }
            prev = Some(y);
        }
    }
    true
}

/// Minimal-length element of the double coset W_lambda g W_mu, by two-sided
/// descent stripping.
pub fn min_double_coset_rep(
    lambda: &Composition,
    g: &AffinePermC,
    mu: &Composition,
) -> AffinePermC {
    let lgen = lambda.generator_indices();
    let rgen = mu.generator_indices();
    let mut w = g.clone();
    loop {
        let mut changed = false;
        for &i in &lgen {
            if w.has_descent_left(i) {
                w = w.mul_gen_left(i);
                changed = true;
            }
        }
        for &i in &rgen {
            if w.has_descent_right(i) {
                w = w.mul_gen_right(i);
                changed = true;
            }
        }
        if !changed {
            return w;
        }
    }
}

/// The set D_delta of minimal right coset representatives intersected with
/// W_mu (full enumeration of W_mu, filtered through the order-preservation
/// criterion).
pub fn enumerate_min_reps(
    delta: &Composition,
    mu: &Composition,
    limit: u128,
) -> Result<Vec<AffinePermC>> {
    let all = mu.enumerate_parabolic(limit)?;
    Ok(all
        .into_iter()
        .filter(|w| is_min_right_rep(w, delta))
        .collect())
}

/// A uniform-ish random element: window a_i = +-pi(i) + k_i D for a random
/// permutation pi, random signs, and bounded period shifts. Every such
/// window is a valid element, and every element of moderate displacement
/// arises this way.
pub fn random_element(d: usize, shift_bound: i64, rng: &mut impl rand::Rng) -> AffinePermC {
    let dd = 2 * d as i64 + 2;
    let mut perm: Vec<i64> = (1..=d as i64).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let window: Vec<i64> = perm
        .into_iter()
        .map(|p| {
            let sign = if rng.random_range(0..2) == 1 { -1 } else { 1 };
            let k = rng.random_range(-shift_bound..=shift_bound);
            sign * p + k * dd
        })
        .collect();
    AffinePermC::new(d, window).expect("window is valid by construction")
}

/// The longest element g+ = w0^lambda g w0^delta w0^mu of W_lambda g W_mu,
/// with the length identity asserted.
pub fn g_plus(
    lambda: &Composition,
    g: &AffinePermC,
    delta: &Composition,
    mu: &Composition,
) -> AffinePermC {
    let wl = lambda.longest_element();
    let wd = delta.longest_element();
    let wm = mu.longest_element();
    let out = wl
        .compose(g)
        .and_then(|x| x.compose(&wd))
        .and_then(|x| x.compose(&wm))
        .expect("equal ranks");
    debug_assert_eq!(
        out.length() as i64,
        wl.length() as i64 + g.length() as i64 - wd.length() as i64 + wm.length() as i64
    );
    out
}
