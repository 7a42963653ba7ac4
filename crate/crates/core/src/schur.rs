//! The affine q-Schur algebra: standard-basis arithmetic through the
//! closed-form tridiagonal product, the Hecke-level double-coset oracle,
//! the bar involution, and the canonical and monomial bases.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::hecke::{x_lambda, HeckeElt, KlTable};
use crate::laurent::Laurent;
use crate::mult::{self, matrix_fact, matrix_fact_c};
use crate::weyl::{
    enumerate_min_reps, g_plus, min_double_coset_rep, AffinePermC, Composition,
};
use crate::ximat::{
    a_ts, delta_of, is_admissible, kappa, kappa_inv, m_of_tridiag, CsMatrix,
    ThetaMatrix,
};

/// Which normalization the coefficients refer to: e_A or [A] = v^{-d_A} e_A.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    E,
    Std,
}

/// A finite A-linear combination of basis elements indexed by Xi_{n,d}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurElt {
    r: usize,
    d: i64,
    basis: Basis,
    terms: BTreeMap<CsMatrix, Laurent>,
}

impl SchurElt {
    pub fn zero(r: usize, d: i64, basis: Basis) -> Self {
        SchurElt {
            r,
            d,
            basis,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis_elt(a: &CsMatrix, basis: Basis) -> Self {
        let mut out = SchurElt::zero(a.r(), a.d(), basis);
        out.add_term(a.clone(), Laurent::one());
        out
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, a: &CsMatrix) -> Laurent {
        self.terms.get(a).cloned().unwrap_or_else(Laurent::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CsMatrix, &Laurent)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, a: CsMatrix, c: Laurent) {
        if c.is_zero() {
            return;
        }
        debug_assert!(a.is_xi(self.d), "Schur keys must lie in Xi_{{n,d}}");
        match self.terms.entry(a) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let mut v = e.get().clone();
                v += &c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &SchurElt) -> SchurElt {
        assert_eq!(self.basis, other.basis);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SchurElt) -> SchurElt {
        assert_eq!(self.basis, other.basis);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.scale(-1));
        }
        out
    }

    pub fn scale(&self, c: &Laurent) -> SchurElt {
        let mut out = SchurElt::zero(self.r, self.d, self.basis);
        for (a, k) in &self.terms {
            out.add_term(a.clone(), k * c);
        }
        out
    }

    /// Convert between the e-basis and the standard basis via v^{+-d_A}.
    pub fn to_basis(&self, basis: Basis) -> SchurElt {
        if basis == self.basis {
            return self.clone();
        }
        let mut out = SchurElt::zero(self.r, self.d, basis);
        for (a, c) in &self.terms {
            let shift = match basis {
                // [A] = v^{-d_A} e_A, so e-coefficients pick up v^{+d_A}.
                Basis::Std => a.d_stat(),
                Basis::E => -a.d_stat(),
            };
            out.add_term(a.clone(), c.shift(shift));
        }
        out
    }

    /// Evaluate every coefficient at v = 1, dropping the terms that vanish.
    pub fn eval_at_one(&self) -> BTreeMap<CsMatrix, BigInt> {
        self.terms
            .iter()
            .map(|(a, c)| (a.clone(), c.eval_at_one()))
            .filter(|(_, v)| *v != BigInt::from(0))
            .collect()
    }

    /// The <=_alg-maximal elements of the support.
    pub fn support_maxima(&self) -> Vec<&CsMatrix> {
        self.terms
            .keys()
            .filter(|a| !self.terms.keys().any(|b| a.lt_alg(b)))
            .collect()
    }
}

impl serde::Serialize for SchurElt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        #[derive(serde::Serialize)]
        struct Term<'a> {
            matrix: &'a CsMatrix,
            coefficient: &'a Laurent,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(a, c)| Term {
                matrix: a,
                coefficient: c,
            })
            .collect();
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("basis", match self.basis {
            Basis::E => "e",
            Basis::Std => "std",
        })?;
        m.serialize_entry("terms", &terms)?;
        m.end()
    }
}

/// Shared state for the Schur-level computations: the Kazhdan-Lusztig memo
/// table, the parabolic size guard, and the cached triangular expansions
/// used by the bar involution.
pub struct SchurContext {
    pub kl: KlTable,
    pub limit: u128,
    nmatrix: HashMap<(Vec<i64>, Vec<i64>, AffinePermC), Vec<(AffinePermC, Laurent)>>,
}

impl Default for SchurContext {
    fn default() -> Self {
        SchurContext::new(crate::weyl::DEFAULT_PARABOLIC_LIMIT)
    }
}

impl SchurContext {
    pub fn new(limit: u128) -> Self {
        SchurContext {
            kl: KlTable::new(),
            limit,
            nmatrix: HashMap::new(),
        }
    }
}

/// All elements of the double coset W_lambda y W_nu, via the bijection
/// W_lambda x (D_delta cap W_nu) -> coset.
fn coset_elements(
    lambda: &Composition,
    y: &AffinePermC,
    nu: &Composition,
    limit: u128,
) -> Result<Vec<AffinePermC>> {
    let a = kappa(lambda, y, nu)?;
    let delta = delta_of(&a);
    let reps = enumerate_min_reps(&delta, nu, limit)?;
    let mut out = Vec::new();
    for x in lambda.enumerate_parabolic(limit)? {
        let xy = x.compose(y)?;
        for z in &reps {
            out.push(xy.compose(z)?);
        }
    }
    Ok(out)
}

/// The independent oracle for every closed-form product:
/// e_B e_A = (1/[A]!_c) x_lambda T_{g1} T_{(D_delta cap W_mu) g2} x_nu,
/// expanded by peeling maximal double cosets.
pub fn mult_oracle(b: &CsMatrix, a: &CsMatrix, ctx: &SchurContext) -> Result<SchurElt> {
    if b.col_c() != a.row_c() {
        return Err(Error::MarginMismatch(format!(
            "col_c(B) = {:?} != row_c(A) = {:?}",
            b.col_c(),
            a.row_c()
        )));
    }
    let (lambda, g1, mu) = kappa_inv(b)?;
    let (_, g2, nu) = kappa_inv(a)?;
    let limit = ctx.limit;
    let delta_b = delta_of(b);
    let reps = enumerate_min_reps(&delta_b, &mu, limit)?;
    let mut h = x_lambda(&lambda, limit)?.mul_basis_right(&g1);
    let mut mid = HeckeElt::zero(g1.d());
    for w in &reps {
        mid.add_term(w.compose(&g2)?, Laurent::one());
    }
    h = h.mul(&mid)?;
    h = h.mul(&x_lambda(&nu, limit)?)?;
    // Peel maximal cosets.
    let fact_a = matrix_fact_c(a)?;
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::E);
    while !h.is_zero() {
        let u = h
            .support()
            .max_by_key(|g| (g.length(), (*g).clone()))
            .unwrap()
            .clone();
        let c = h.coeff(&u);
        let y = min_double_coset_rep(&lambda, &u, &nu);
        let coset = coset_elements(&lambda, &y, &nu, limit)?;
        debug_assert!(coset.iter().all(|w| w.length() <= u.length()));
        for w in &coset {
            h.add_term(w.clone(), c.scale(-1));
        }
        let key = kappa(&lambda, &y, &nu)?;
        out.add_term(key, c.exact_div(&fact_a)?);
    }
    Ok(out)
}

/// The closed-form product [B][A] for tridiagonal B, in the standard basis.
pub fn mult_tridiag(b: &CsMatrix, a: &CsMatrix) -> Result<SchurElt> {
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::Std);
    for term in mult::tridiag_terms(b, a, false)? {
        debug_assert!(term.key.is_xi(a.d()));
        out.add_term(term.key, term.coeff);
    }
    Ok(out)
}

/// Left-multiply a standard-basis element by [B] for tridiagonal B.
pub fn mult_tridiag_elt(b: &CsMatrix, p: &SchurElt) -> Result<SchurElt> {
    assert_eq!(p.basis, Basis::Std);
    let mut out = SchurElt::zero(p.r(), p.d(), Basis::Std);
    for (key, c) in p.iter() {
        if b.col_c() != key.row_c() {
            continue;
        }
        for term in mult::tridiag_terms(b, key, false)? {
            out.add_term(term.key, &term.coeff * c);
        }
    }
    Ok(out)
}

/// Left-multiply by a general standard-basis combination of tridiagonal
/// matrices.
pub fn mult_elt(left: &SchurElt, p: &SchurElt) -> Result<SchurElt> {
    assert_eq!(left.basis, Basis::Std);
    let mut out = SchurElt::zero(p.r(), p.d(), Basis::Std);
    for (b, c) in left.iter() {
        if !b.is_tridiagonal() {
            return Err(Error::NotTridiagonal);
        }
        out = out.add(&mult_tridiag_elt(b, p)?.scale(c));
    }
    Ok(out)
}

/// The one-directional special case: every selector S vanishes.
/// Requires B* = sum b_{i,i+1} E_theta^{i,i+1} (forward) or the transpose
/// shape (backward).
pub fn mult_semisimple(b: &CsMatrix, a: &CsMatrix) -> Result<SchurElt> {
    let r = b.r() as i64;
    let forward = (1..=r + 1).all(|i| b.get(i, i - 1) == 0);
    let backward = (0..=r).all(|i| b.get(i, i + 1) == 0);
    if !b.is_tridiagonal() || (!forward && !backward) {
        return Err(Error::Precondition(
            "semisimple product needs a one-directional tridiagonal B".into(),
        ));
    }
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::E);
    for t in mult::theta_ba(b, a, false)? {
        let key = a_ts(a, &t, &ThetaMatrix::zero(a.n()))?;
        let exp = 2 * (mult::w_at_length(a, &t) + a.ell() - key.ell());
        let num = matrix_fact_c(&key)?;
        let den = &matrix_fact_c(&a_minus_t_theta(a, &t)?)? * &matrix_fact(&t);
        let coeff = num.exact_div(&den)?.shift(exp);
        out.add_term(key, coeff);
    }
    Ok(out)
}

fn a_minus_t_theta(a: &CsMatrix, t: &ThetaMatrix) -> Result<CsMatrix> {
    // A - T_theta as a centro-symmetric matrix (entries stay nonnegative by
    // the selector constraint).
    let tth = t.theta();
    let reach = a.band() + t.iter().map(|(i, j, _)| (i - j).abs()).max().unwrap_or(0) + 2;
    let r = a.r() as i64;
    let mut items = Vec::new();
    for i in 0..=(r + 1) {
        for j in (i - reach)..=(i + reach) {
            let v = a.get(i, j) - tth.get(i, j);
            if v != 0 {
                items.push((i, j, v));
            }
        }
    }
    CsMatrix::new(a.r(), items)
}

/// The Chevalley special case B = diag(B) + E_theta^{h,h+1}.
pub fn mult_chevalley(b: &CsMatrix, a: &CsMatrix) -> Result<SchurElt> {
    let r = b.r() as i64;
    let h = (0..=r)
        .find(|&h| b.get(h, h + 1) == 1)
        .ok_or_else(|| Error::Precondition("Chevalley B needs one unit off-diagonal".into()))?;
    // All other off-diagonal entries must vanish.
    let mut check = b.clone();
    check = sub_e_theta(&check, h, h + 1, 1)?;
    if !check.is_diagonal() {
        return Err(Error::Precondition("Chevalley B must be diag + E_theta^{h,h+1}".into()));
    }
    if b.col_c() != a.row_c() {
        return Err(Error::MarginMismatch("chevalley margins".into()));
    }
    let band = a.band();
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::E);
    for p in (h + 1 - band - 2)..=(h + 1 + band + 2) {
        let eps = if (h + 1 == p) && (p.rem_euclid(r + 1) == 0 || false) {
            // epsilon^theta_{ij} is 2 exactly on the special diagonal classes
            2
        } else if h + 1 == p
            && (p.rem_euclid(2 * (r + 1)) == 0 || p.rem_euclid(2 * (r + 1)) == r + 1)
        {
            2
        } else {
            1
        };
        let eps = if h + 1 == p {
            let m = p.rem_euclid(2 * (r + 1));
            if m == 0 || m == r + 1 {
                2
            } else {
                eps.min(1)
            }
        } else {
            1
        };
        if a.get(h + 1, p) < eps {
            continue;
        }
        let row_h = a.row_entries(h);
        let tail: i64 = row_h.iter().filter(|(&j, _)| j > p).map(|(_, &v)| v).sum();
        let coeff = Laurent::q_int(a.get(h, p) + 1).shift(2 * tail);
        let mut key = add_e_theta(a, h, p, 1)?;
        key = sub_e_theta(&key, h + 1, p, 1)?;
        out.add_term(key, coeff);
    }
    Ok(out)
}

fn add_e_theta(a: &CsMatrix, k: i64, l: i64, c: i64) -> Result<CsMatrix> {
    let t = ThetaMatrix::e(a.n(), k, l);
    let tth = t.theta();
    let r = a.r() as i64;
    let reach = a.band() + (k - l).abs() + 2;
    let mut items = Vec::new();
    for i in 0..=(r + 1) {
        for j in (i - reach)..=(i + reach) {
            let v = a.get(i, j) + c * tth.get(i, j);
            if v != 0 {
                items.push((i, j, v));
            }
        }
    }
    CsMatrix::new(a.r(), items)
}

fn sub_e_theta(a: &CsMatrix, k: i64, l: i64, c: i64) -> Result<CsMatrix> {
    add_e_theta(a, k, l, -c)
}

/// The classical limit: the product at v = 1 computed by the independent
/// double-factorial formula.
pub fn classical_limit_formula(b: &CsMatrix, a: &CsMatrix) -> Result<BTreeMap<CsMatrix, BigInt>> {
    fn fact(m: i64) -> BigInt {
        let mut x = BigInt::one();
        for i in 2..=m {
            x *= i;
        }
        x
    }
    fn dfact(m: i64) -> BigInt {
        // (m)!! for odd or even m >= -1, with (-1)!! = 0!! = 1.
        let mut x = BigInt::one();
        let mut i = m;
        while i >= 2 {
            x *= i;
            i -= 2;
        }
        x
    }
    let r = a.r() as i64;
    let mut out: BTreeMap<CsMatrix, BigInt> = BTreeMap::new();
    for t in mult::theta_ba(b, a, false)? {
        let key = a_ts(a, &t, &ThetaMatrix::zero(a.n()))?;
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (i, j) in a.iplus_domain(a.band() + b.band() + 2) {
            if (i == 0 && j == 0) || (i == r + 1 && j == r + 1) {
                continue;
            }
            let at = a.get(i, j) - t.get(i, j) - t.get(-i, -j);
            let kv = key.get(i, j);
            num *= fact(kv);
            den *= fact(at);
        }
        for (_, _, v) in t.iter() {
            den *= fact(v);
        }
        for k in [0i64, r + 1] {
            let akk = a.get(k, k);
            let tkk = t.get(k, k);
            let hkk = t.hat().get(k, k);
            num *= dfact(akk - 2 * tkk + 2 * hkk - 1);
            den *= dfact(akk - 2 * tkk - 1);
        }
        let q = num / den;
        let e = out.entry(key).or_insert_with(|| BigInt::from(0));
        *e += q;
        if *e == BigInt::from(0) {
            let zero_keys: Vec<CsMatrix> = out
                .iter()
                .filter(|(_, v)| **v == BigInt::from(0))
                .map(|(k, _)| k.clone())
                .collect();
            for k in zero_keys {
                out.remove(&k);
            }
        }
    }
    Ok(out)
}

/// Expansion of [A](C'_{w0^mu}) in the Kazhdan-Lusztig basis: the list of
/// (y, N_{y,A}) with [A](C'_{w0^mu}) = sum_y N_y C'_{y+}, y running over
/// minimal double coset representatives below g.
fn n_expansion(
    lambda: &Composition,
    g: &AffinePermC,
    mu: &Composition,
    ctx: &mut SchurContext,
) -> Result<Vec<(AffinePermC, Laurent)>> {
    let key = (lambda.parts().to_vec(), mu.parts().to_vec(), g.clone());
    if let Some(v) = ctx.nmatrix.get(&key) {
        return Ok(v.clone());
    }
    let a = kappa(lambda, g, mu)?;
    let limit = ctx.limit;
    // T_{W_lambda g W_mu}, direct enumeration.
    let mut h = HeckeElt::zero(g.d());
    for w in coset_elements(lambda, g, mu, limit)? {
        h.add_term(w, Laurent::one());
    }
    let scale = Laurent::v_pow(-a.d_stat() - mu.longest_element().length() as i64);
    h = h.scale(&scale);
    // Convert to the KL basis by stripping maximal terms.
    let mut expansion: Vec<(AffinePermC, Laurent)> = Vec::new();
    while !h.is_zero() {
        let u = h
            .support()
            .max_by_key(|w| (w.length(), (*w).clone()))
            .unwrap()
            .clone();
        let c = h.coeff(&u).shift(u.length() as i64);
        let cu = ctx.kl.cprime(&u);
        h = h.sub(&cu.scale(&c));
        // u must be the longest element of its own double coset.
        let y = min_double_coset_rep(lambda, &u, mu);
        let ay = kappa(lambda, &y, mu)?;
        let delta = delta_of(&ay);
        debug_assert_eq!(
            g_plus(lambda, &y, &delta, mu),
            u,
            "KL support of a coset sum must consist of longest coset elements"
        );
        expansion.push((y, c));
    }
    ctx.nmatrix.insert(key, expansion.clone());
    Ok(expansion)
}

/// bar([A]) expanded in the standard basis, through the triangular
/// transition to the Kazhdan-Lusztig coordinates, where bar is coefficient
/// conjugation.
pub fn bar_std(a: &CsMatrix, ctx: &mut SchurContext) -> Result<SchurElt> {
    let (lambda, g, mu) = kappa_inv(a)?;
    // Closure of the index set under the expansions.
    let mut order: Vec<AffinePermC> = vec![g.clone()];
    let mut expansions: HashMap<AffinePermC, Vec<(AffinePermC, Laurent)>> = HashMap::new();
    let mut idx = 0;
    while idx < order.len() {
        let y = order[idx].clone();
        idx += 1;
        let exp = n_expansion(&lambda, &y, &mu, ctx)?;
        for (z, _) in &exp {
            if !order.contains(z) {
                order.push(z.clone());
            }
        }
        expansions.insert(y, exp);
    }
    // Solve sum_y m_y N_{z,y} = bar(N_{z,g}) by descending length.
    order.sort_by_key(|y| std::cmp::Reverse((y.length(), y.clone())));
    let n_of = |y: &AffinePermC, z: &AffinePermC, exps: &HashMap<AffinePermC, Vec<(AffinePermC, Laurent)>>| {
        exps.get(y)
            .and_then(|v| v.iter().find(|(w, _)| w == z).map(|(_, c)| c.clone()))
            .unwrap_or_else(Laurent::zero)
    };
    let mut m: HashMap<AffinePermC, Laurent> = HashMap::new();
    for z in &order {
        let mut rhs = n_of(&g, z, &expansions).bar();
        for (y, my) in &m {
            rhs -= &(&n_of(y, z, &expansions) * my);
        }
        // N_{z,z} = 1.
        m.insert(z.clone(), rhs);
    }
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::Std);
    for (y, c) in m {
        out.add_term(kappa(&lambda, &y, &mu)?, c);
    }
    Ok(out)
}

/// bar of a standard-basis element.
pub fn bar_elt(p: &SchurElt, ctx: &mut SchurContext) -> Result<SchurElt> {
    assert_eq!(p.basis, Basis::Std);
    let mut out = SchurElt::zero(p.r(), p.d(), Basis::Std);
    for (a, c) in p.iter() {
        out = out.add(&bar_std(a, ctx)?.scale(&c.bar()));
    }
    Ok(out)
}

/// The canonical basis element {A}, through the Kazhdan-Lusztig route:
/// {A} = [A] + sum_{y<g} v^{l(y+) - l(g+)} P_{y+,g+} [kappa(lambda,y,mu)].
pub fn canonical_kl(a: &CsMatrix, ctx: &mut SchurContext) -> Result<SchurElt> {
    let (lambda, g, mu) = kappa_inv(a)?;
    let delta = delta_of(a);
    let gp = g_plus(&lambda, &g, &delta, &mu);
    let cg = ctx.kl.cprime(&gp);
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::Std);
    let mut seen: Vec<AffinePermC> = Vec::new();
    for (u, coeff) in cg.iter() {
        let y = min_double_coset_rep(&lambda, u, &mu);
        if seen.contains(&y) {
            continue;
        }
        let ay = kappa(&lambda, &y, &mu)?;
        let yp = g_plus(&lambda, &y, &delta_of(&ay), &mu);
        if &yp != u {
            continue;
        }
        seen.push(y.clone());
        // P_{y+,g+} = v^{l(g+)} (coefficient of T_{y+} in C'_{g+}).
        let p = coeff.shift(gp.length() as i64);
        let c = p.shift(yp.length() as i64 - gp.length() as i64);
        out.add_term(ay, c);
    }
    Ok(out)
}

/// The canonical basis element, through the triangular bar-invariance
/// characterization: the unique bar-invariant element in
/// [A] + sum v^{-1} Z[v^{-1}] [lower].
pub fn canonical_triangular(a: &CsMatrix, ctx: &mut SchurContext) -> Result<SchurElt> {
    // Collect the candidate lower keys from bar([A]) and close up.
    let mut keys: Vec<CsMatrix> = vec![a.clone()];
    let mut bars: HashMap<CsMatrix, SchurElt> = HashMap::new();
    let mut idx = 0;
    while idx < keys.len() {
        let k = keys[idx].clone();
        idx += 1;
        let bk = bar_std(&k, ctx)?;
        for (z, _) in bk.iter() {
            if !keys.contains(z) {
                keys.push(z.clone());
            }
        }
        bars.insert(k, bk);
    }
    // Order keys by descending l(A); bar is triangular along <=_alg and a
    // fortiori along this ordering within the closure.
    keys.sort_by_key(|k| std::cmp::Reverse((k.ell(), k.clone())));
    let mut c: HashMap<CsMatrix, Laurent> = HashMap::new();
    c.insert(keys[0].clone(), Laurent::one());
    for z in keys.iter().skip(1) {
        // f = sum_{y > z} bar(c_y) R_{z,y}   (R = bar matrix entries)
        let mut f = Laurent::zero();
        for (y, cy) in &c {
            let r_zy = bars
                .get(y)
                .map(|b| b.coeff(z))
                .unwrap_or_else(Laurent::zero);
            f += &(&cy.bar() * &r_zy);
        }
        // Solve c_z - bar(c_z) = f - (diagonal part already included? no:
        // R_{z,z} = 1 so f currently lacks the c_z bar term).
        // Bar-invariance at z reads: c_z = sum_y bar(c_y) R_{z,y}
        //                                = f + bar(c_z).
        // f is bar-antisymmetric, so take the strictly negative part.
        debug_assert!({
            let chk = &f.bar() + &f;
            chk.is_zero()
        });
        let mut cz = Laurent::zero();
        for (e, coef) in f.iter() {
            if *e < 0 {
                cz += &Laurent::monomial(coef.clone(), *e);
            }
        }
        if !cz.is_zero() {
            c.insert(z.clone(), cz);
        }
    }
    let mut out = SchurElt::zero(a.r(), a.d(), Basis::Std);
    for (k, v) in c {
        out.add_term(k, v);
    }
    Ok(out)
}

/// The tridiagonal chain of the peeling algorithm: matrices A^(1)..A^(x)
/// whose product has leading term [A].
pub fn monomial_chain(a: &CsMatrix) -> Result<Vec<CsMatrix>> {
    let n = a.n();
    let mut chain: Vec<CsMatrix> = Vec::new();
    let mut c = a.clone();
    let mut target_rows: Vec<i64> = (1..=n).map(|i| a.row_sum(i)).collect();
    loop {
        if c.is_tridiagonal() {
            chain.push(c);
            return Ok(chain);
        }
        let k = c.band();
        let mut off = ThetaMatrix::zero(n);
        for i in 1..=n {
            let v = c.get(i, i + k);
            if v != 0 {
                off.add(i, i + 1, v);
            }
        }
        let offth = off.theta();
        // Assemble the tridiagonal factor: off-diagonal part plus the
        // diagonal forced by the target row sums.
        let r = a.r() as i64;
        let mut items = Vec::new();
        for i in 0..=(r + 1) {
            for j in [i - 1, i + 1] {
                let v = offth.get(i, j);
                if v != 0 {
                    items.push((i, j, v));
                }
            }
        }
        for i in 0..=(r + 1) {
            let row_off: i64 = offth.get(i, i - 1) + offth.get(i, i + 1);
            let idx = ((i - 1).rem_euclid(n) + 1) as usize - 1;
            let want = target_rows[idx];
            let diag = want - row_off;
            if diag != 0 {
                items.push((i, i, diag));
            }
        }
        let factor = CsMatrix::new(a.r(), items)?;
        if !factor.is_xi(a.d()) {
            return Err(Error::Precondition(format!(
                "chain factor leaves Xi: {}",
                factor
            )));
        }
        target_rows = (1..=n).map(|i| factor.col_sum(i)).collect();
        chain.push(factor);
        // Peel: C <- C - T_theta + (T down)_theta with T = sum c_{i,i+k} E^{i,i+k}.
        let mut t = ThetaMatrix::zero(n);
        for i in 1..=n {
            let v = c.get(i, i + k);
            if v != 0 {
                t.add(i, i + k, v);
            }
        }
        let tth = t.theta();
        let tdownth = t.down().theta();
        let reach = c.band() + 2;
        let mut items = Vec::new();
        for i in 0..=(r + 1) {
            for j in (i - reach)..=(i + reach) {
                let v = c.get(i, j) - tth.get(i, j) + tdownth.get(i, j);
                if v != 0 {
                    items.push((i, j, v));
                }
            }
        }
        c = CsMatrix::new(a.r(), items)?;
    }
}

/// m'_A = [A^(1)] ... [A^(x)].
pub fn semi_monomial(a: &CsMatrix) -> Result<SchurElt> {
    let chain = monomial_chain(a)?;
    let mut p = SchurElt::basis_elt(chain.last().unwrap(), Basis::Std);
    for b in chain.iter().rev().skip(1) {
        p = mult_tridiag_elt(b, &p)?;
    }
    Ok(p)
}

/// m_A = {A^(1)} ... {A^(x)}.
pub fn monomial(a: &CsMatrix, ctx: &mut SchurContext) -> Result<SchurElt> {
    let chain = monomial_chain(a)?;
    let mut p = canonical_kl(chain.last().unwrap(), ctx)?;
    for b in chain.iter().rev().skip(1) {
        let cb = canonical_kl(b, ctx)?;
        p = mult_elt(&cb, &p)?;
    }
    Ok(p)
}

/// Report from the leading-term analysis of [B][A].
#[derive(Debug)]
pub struct LeadingReport {
    pub m: CsMatrix,
    pub max_is_m: bool,
    pub leading_coeff: Laurent,
    pub admissible: bool,
}

pub fn leading_term_check(b: &CsMatrix, a: &CsMatrix) -> Result<LeadingReport> {
    let product = mult_tridiag(b, a)?;
    let m = m_of_tridiag(b, a)?;
    let maxima = product.support_maxima();
    let max_is_m = maxima.len() == 1 && maxima[0] == &m;
    Ok(LeadingReport {
        leading_coeff: product.coeff(&m),
        max_is_m,
        admissible: is_admissible(b, a),
        m,
    })
}

/// The slow sigma-level verification mode: for every T in Theta_{B,A} and
/// every fiber element w, group K_w by the selector S and check
/// sum_{sigma in psi_w^{-1}(S)} v^{-2 h(w,sigma)}
///   = v^{-2 h(T,S)} [T choose S] [[S]].
/// Returns the number of (T, S, w) triples checked.
pub fn verify_sigma_level(b: &CsMatrix, a: &CsMatrix, ctx: &SchurContext) -> Result<usize> {
    let tctx = crate::hecke::TridiagContext::new(b)?;
    let (_, g2, nu) = kappa_inv(a)?;
    let mu = &tctx.mu;
    let reps = enumerate_min_reps(&tctx.delta, mu, ctx.limit)?;
    let r = a.r();
    let mut checked = 0;
    // phi(w) and the grouping of K_w by psi_w.
    for w in &reps {
        let wg2 = w.compose(&g2)?;
        let mut t = ThetaMatrix::zero(a.n());
        for i in 1..=a.n() {
            let (lo, hi) = tctx.delta.block(3 * i - 1);
            for k in lo..=hi {
                t.add(i, nu.block_index(wg2.preimage(k)), 1);
            }
        }
        let mut groups: BTreeMap<ThetaMatrix, Laurent> = BTreeMap::new();
        for sigma in tctx.enumerate_kw(&wg2) {
            let mut s = ThetaMatrix::zero(a.n());
            for &(_, k) in &sigma.pairs {
                let i = tctx.delta.block_index(k);
                debug_assert_eq!((i + 1) % 3, 0);
                let iblk = (i + 1) / 3;
                s.add(iblk, nu.block_index(wg2.preimage(k)), 1);
            }
            // Extend to the full period by the convention on the mirrored
            // blocks: the j-side entries land in rows 1-i.
            for &(j, _) in &sigma.pairs {
                let ib = tctx.delta.block_index(j);
                debug_assert_eq!((ib + 2) % 3, 0);
                let iblk = (ib + 2) / 3;
                s.add(1 - iblk, -nu.block_index(wg2.preimage(j)), 1);
            }
            let h = tctx.h(&wg2, &sigma);
            let e = groups.entry(s).or_insert_with(Laurent::zero);
            *e += &Laurent::v_pow(-2 * h as i64);
        }
        for (s, lhs) in groups {
            let rhs = &(&mult::t_choose_s(&t, &s) * &mult::bracket_s(&s, r))
                .shift(-2 * mult::h_ts(&t, &s, r));
            if &lhs != rhs {
                return Err(Error::Precondition(format!(
                    "sigma-level identity fails: lhs = {}, rhs = {}",
                    lhs, rhs
                )));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Direct check of the fiber Poincare identity
/// sum_{w in phi^{-1}(T)} v^{2l(w)} = v^{2 l(w_{A,T})} [A]!_c / ([A-T_theta]!_c [T]!).
pub fn verify_fiber_sum(b: &CsMatrix, a: &CsMatrix, ctx: &SchurContext) -> Result<usize> {
    let tctx = crate::hecke::TridiagContext::new(b)?;
    let (_, g2, nu) = kappa_inv(a)?;
    let reps = enumerate_min_reps(&tctx.delta, &tctx.mu, ctx.limit)?;
    let mut fibers: BTreeMap<ThetaMatrix, Laurent> = BTreeMap::new();
    for w in &reps {
        let wg2 = w.compose(&g2)?;
        let mut t = ThetaMatrix::zero(a.n());
        for i in 1..=a.n() {
            let (lo, hi) = tctx.delta.block(3 * i - 1);
            for k in lo..=hi {
                t.add(i, nu.block_index(wg2.preimage(k)), 1);
            }
        }
        let e = fibers.entry(t).or_insert_with(Laurent::zero);
        *e += &Laurent::v_pow(2 * w.length() as i64);
    }
    let fact_a = matrix_fact_c(a)?;
    let mut checked = 0;
    for (t, lhs) in fibers {
        let den = &matrix_fact_c(&a_minus_t_theta(a, &t)?)? * &matrix_fact(&t);
        let rhs = fact_a
            .exact_div(&den)?
            .shift(2 * mult::w_at_length(a, &t));
        if lhs != rhs {
            return Err(Error::Precondition(format!(
                "fiber sum fails for T: lhs = {}, rhs = {}",
                lhs, rhs
            )));
        }
        checked += 1;
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ximat::enumerate_xi;

    fn ctx() -> SchurContext {
        SchurContext::default()
    }

    fn pairs(r: usize, d: i64, band: i64) -> Vec<(CsMatrix, CsMatrix)> {
        let all = enumerate_xi(r, d, band);
        let mut out = Vec::new();
        for b in all.iter().filter(|m| m.is_tridiagonal()) {
            for a in &all {
                if b.col_c() == a.row_c() {
                    out.push((b.clone(), a.clone()));
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_b_acts_as_identity() {
        let c = ctx();
        for a in enumerate_xi(1, 3, 2) {
            let lam = a.row_c_composition().unwrap();
            let b = CsMatrix::diagonal(&lam).unwrap();
            let viaoracle = mult_oracle(&b, &a, &c).unwrap();
            assert_eq!(viaoracle, SchurElt::basis_elt(&a, Basis::E));
            let viatridiag = mult_tridiag(&b, &a).unwrap();
            assert_eq!(viatridiag, SchurElt::basis_elt(&a, Basis::Std));
        }
    }

    #[test]
    fn tridiag_matches_oracle_small() {
        let c = ctx();
        for (b, a) in pairs(0, 2, 2) {
            // e_B e_A = v^{d_B + d_A} [B][A]
            let closed = mult_tridiag(&b, &a)
                .unwrap()
                .to_basis(Basis::E)
                .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
            let oracle = mult_oracle(&b, &a, &c).unwrap();
            assert_eq!(closed, oracle, "thm-B mismatch for B={} A={}", b, a);
        }
    }

    #[test]
    fn tridiag_matches_oracle_rank_one() {
        let c = ctx();
        let mut count = 0;
        for (b, a) in pairs(1, 3, 2) {
            let closed = mult_tridiag(&b, &a)
                .unwrap()
                .to_basis(Basis::E)
                .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
            let oracle = mult_oracle(&b, &a, &c).unwrap();
            assert_eq!(closed, oracle, "thm-B mismatch for B={} A={}", b, a);
            count += 1;
        }
        assert!(count > 100);
    }

    #[test]
    fn fiber_sum_identity() {
        let c = ctx();
        let mut checked = 0;
        for (b, a) in pairs(1, 3, 1).into_iter().take(40) {
            checked += verify_fiber_sum(&b, &a, &c).unwrap();
        }
        assert!(checked >= 40);
    }

    #[test]
    fn sigma_level_identity() {
        let c = ctx();
        let mut checked = 0;
        for (b, a) in pairs(1, 3, 1).into_iter().take(25) {
            checked += verify_sigma_level(&b, &a, &c).unwrap();
        }
        assert!(checked >= 25);
    }

    #[test]
    fn semisimple_and_chevalley_agree() {
        let _c = ctx();
        for (b, a) in pairs(1, 3, 2) {
            let r = b.r() as i64;
            let forward = (1..=r + 1).all(|i| b.get(i, i - 1) == 0);
            let backward = (0..=r).all(|i| b.get(i, i + 1) == 0);
            if forward || backward {
                let ss = mult_semisimple(&b, &a).unwrap();
                let td = mult_tridiag(&b, &a)
                    .unwrap()
                    .to_basis(Basis::E)
                    .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
                assert_eq!(ss, td, "semisimple mismatch for B={} A={}", b, a);
            }
            // Chevalley shape: diag + E_theta^{h,h+1}.
            let offsum: i64 = (0..=r).map(|i| b.get(i, i + 1)).sum::<i64>()
                + (1..=r + 1).map(|i| b.get(i, i - 1)).sum::<i64>();
            let single = (0..=r).any(|h| {
                b.get(h, h + 1) == 1
                    && offsum == 1
            });
            if single {
                let ch = mult_chevalley(&b, &a).unwrap();
                let td = mult_tridiag(&b, &a)
                    .unwrap()
                    .to_basis(Basis::E)
                    .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
                assert_eq!(ch, td, "chevalley mismatch for B={} A={}", b, a);
            }
        }
    }

    #[test]
    fn classical_limit_agrees() {
        for (b, a) in pairs(1, 3, 2) {
            let td = mult_tridiag(&b, &a)
                .unwrap()
                .to_basis(Basis::E)
                .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
            let lhs = td.eval_at_one();
            let rhs = classical_limit_formula(&b, &a).unwrap();
            assert_eq!(lhs, rhs, "classical limit mismatch for B={} A={}", b, a);
        }
    }

    #[test]
    fn bar_is_involution_and_triangular() {
        let mut c = ctx();
        for a in enumerate_xi(0, 2, 2) {
            let bar = bar_std(&a, &mut c).unwrap();
            assert!(bar.coeff(&a).is_one(), "diagonal coefficient of bar");
            for (k, _) in bar.iter() {
                assert!(k.leq_alg(&a), "bar must be <=_alg-triangular: {} vs {}", k, a);
            }
            let back = bar_elt(&bar, &mut c).unwrap();
            assert_eq!(back, SchurElt::basis_elt(&a, Basis::Std), "bar^2 != id at {}", a);
        }
    }

    #[test]
    fn canonical_routes_agree_and_are_bar_invariant() {
        let mut c = ctx();
        for a in enumerate_xi(0, 2, 2) {
            let kl = canonical_kl(&a, &mut c).unwrap();
            let tri = canonical_triangular(&a, &mut c).unwrap();
            assert_eq!(kl, tri, "canonical basis routes differ at {}", a);
            assert!(kl.coeff(&a).is_one());
            for (k, coeff) in kl.iter() {
                if k != &a {
                    assert!(k.lt_alg(&a));
                    assert!(coeff.degree().unwrap() < 0, "coefficients in v^-1 Z[v^-1]");
                }
            }
            let bar = bar_elt(&kl, &mut c).unwrap();
            assert_eq!(bar, kl, "canonical element must be bar invariant at {}", a);
        }
    }

    #[test]
    fn monomial_chain_and_bases() {
        let mut c = ctx();
        for a in enumerate_xi(0, 2, 2) {
            let chain = monomial_chain(&a).unwrap();
            assert!(chain.iter().all(|m| m.is_tridiagonal()));
            if a.is_tridiagonal() {
                assert_eq!(chain.len(), 1);
                assert_eq!(&chain[0], &a);
            }
            let sm = semi_monomial(&a).unwrap();
            assert!(sm.coeff(&a).is_one(), "semi-monomial leading coefficient at {}", a);
            for (k, _) in sm.iter() {
                assert!(k.leq_alg(&a), "semi-monomial support above A");
            }
            let m = monomial(&a, &mut c).unwrap();
            assert!(m.coeff(&a).is_one());
            for (k, _) in m.iter() {
                assert!(k.leq_alg(&a));
            }
            let bar = bar_elt(&m, &mut c).unwrap();
            assert_eq!(bar, m, "monomial element must be bar invariant");
        }
    }

    #[test]
    fn leading_terms_admissible() {
        let mut adm = 0;
        for (b, a) in pairs(1, 3, 2) {
            let rep = leading_term_check(&b, &a).unwrap();
            if rep.admissible {
                adm += 1;
                assert!(
                    rep.max_is_m,
                    "admissible max support element must be M(B,A) for B={} A={}",
                    b, a
                );
                assert!(
                    rep.leading_coeff.is_one(),
                    "admissible leading coefficient for B={} A={}: {}",
                    b,
                    a,
                    rep.leading_coeff
                );
            }
        }
        assert!(adm > 50);
    }

    #[test]
    fn leading_term_counterexample_for_mixed_b() {
        // The packed selector does not dominate when B carries mass on both
        // sides of the diagonal: the symmetric cancellation S = T leaves the
        // key A itself on top of the product. This pins the genuine support
        // maximum, certified against the double-coset oracle.
        let c = ctx();
        let b = CsMatrix::new(1, vec![(0, 0, 1), (1, 2, 1), (2, 1, 1), (2, 2, 3)]).unwrap();
        let a = CsMatrix::new(1, vec![(0, 0, 1), (1, 3, 1), (2, 2, 5)]).unwrap();
        let rep = leading_term_check(&b, &a).unwrap();
        assert!(!rep.admissible);
        assert!(!rep.max_is_m);
        let product = mult_tridiag(&b, &a).unwrap();
        let maxima = product.support_maxima();
        assert_eq!(maxima, vec![&a]);
        assert!(rep.m.lt_alg(&a));
        // Certify against the oracle.
        let closed = product
            .to_basis(Basis::E)
            .scale(&Laurent::v_pow(b.d_stat() + a.d_stat()));
        assert_eq!(closed, mult_oracle(&b, &a, &c).unwrap());
    }

    #[test]
    fn associativity_of_tridiag_products() {
        // (e_B1 e_B2) e_A = e_B1 (e_B2 e_A): the left association goes
        // through the double-coset oracle (the intermediate products need
        // not have tridiagonal keys), the right through the closed form.
        let c = ctx();
        let all = enumerate_xi(0, 2, 1);
        let tris: Vec<_> = all.iter().filter(|m| m.is_tridiagonal()).collect();
        let e_tridiag = |b: &CsMatrix, x: &CsMatrix| {
            mult_tridiag(b, x)
                .unwrap()
                .to_basis(Basis::E)
                .scale(&Laurent::v_pow(b.d_stat() + x.d_stat()))
        };
        let mut count = 0;
        for b1 in &tris {
            for b2 in &tris {
                if b1.col_c() != b2.row_c() {
                    continue;
                }
                for a in &all {
                    if b2.col_c() != a.row_c() {
                        continue;
                    }
                    let mut left = SchurElt::zero(a.r(), a.d(), Basis::E);
                    for (k, co) in mult_oracle(b1, b2, &c).unwrap().iter() {
                        left = left.add(&mult_oracle(k, a, &c).unwrap().scale(co));
                    }
                    let mut right = SchurElt::zero(a.r(), a.d(), Basis::E);
                    for (k, co) in e_tridiag(b2, a).iter() {
                        right = right.add(&e_tridiag(b1, k).scale(co));
                    }
                    assert_eq!(left, right, "associativity fails");
                    count += 1;
                    if count > 40 {
                        return;
                    }
                }
            }
        }
    }
}
