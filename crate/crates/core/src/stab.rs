//! The stabilization algebra: the limit of the family of Schur algebras as
//! the rank grows, with basis labels allowed arbitrary integer diagonals.
//! Provides the closed-form product with tridiagonal generators, the
//! projection onto each finite rank, the tridiagonal chain with possibly
//! negative diagonals, and an empirical stabilization witness.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::mult;
use crate::schur::{Basis, SchurElt};
use crate::ximat::{CsMatrix, ThetaMatrix};

/// A finite Laurent-linear combination of symbols [A] with A in the
/// stabilized label set (integer diagonals, odd special entries).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KElt {
    r: usize,
    terms: BTreeMap<CsMatrix, Laurent>,
}

impl KElt {
    pub fn zero(r: usize) -> Self {
        KElt {
            r,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis_elt(a: &CsMatrix) -> Self {
        let mut out = KElt::zero(a.r());
        out.add_term(a.clone(), Laurent::one());
        out
    }

    pub fn r(&self) -> usize {
        self.r
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

    pub fn add(&self, other: &KElt) -> KElt {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Laurent) -> KElt {
        let mut out = KElt::zero(self.r);
        for (a, k) in &self.terms {
            out.add_term(a.clone(), k * c);
        }
        out
    }

    pub fn support_maxima(&self) -> Vec<&CsMatrix> {
        self.terms
            .keys()
            .filter(|a| !self.terms.keys().any(|b| a.lt_alg(b)))
            .collect()
    }
}

impl serde::Serialize for KElt {
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
        let mut m = s.serialize_map(Some(1))?;
        m.serialize_entry("terms", &terms)?;
        m.end()
    }
}

/// [B][A] in the stabilization algebra, for tridiagonal B: the same closed
/// form as the finite-rank product with the diagonal constraint on the
/// selectors dropped and every scalar evaluated literally through signed
/// quantum integers. Mismatched margins give 0.
pub fn mult_k(b: &CsMatrix, a: &CsMatrix) -> Result<KElt> {
    if !b.is_tridiagonal() {
        return Err(Error::NotTridiagonal);
    }
    let mut out = KElt::zero(a.r());
    if b.col_c() != a.row_c() {
        return Ok(out);
    }
    for term in mult::tridiag_terms(b, a, true)? {
        out.add_term(term.key, term.coeff);
    }
    Ok(out)
}

/// Left-multiply a stabilized element by [B] for tridiagonal B.
pub fn mult_k_elt(b: &CsMatrix, p: &KElt) -> Result<KElt> {
    let mut out = KElt::zero(p.r());
    for (key, c) in p.iter() {
        out = out.add(&mult_k(b, key)?.scale(c));
    }
    Ok(out)
}

/// The projection onto the rank-d Schur algebra: keep the labels lying in
/// Xi_{n,d}, kill the rest.
pub fn psi_d(x: &KElt, d: i64) -> SchurElt {
    let mut out = SchurElt::zero(x.r(), d, Basis::Std);
    for (a, c) in x.iter() {
        if a.is_xi(d) {
            out.add_term(a.clone(), c.clone());
        }
    }
    out
}

/// The tridiagonal chain for a stabilized label: the same peeling as the
/// finite-rank algorithm, except the forced diagonals may go negative.
pub fn monomial_chain_k(a: &CsMatrix) -> Result<Vec<CsMatrix>> {
    let n = a.n();
    let r = a.r() as i64;
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
            let diag = target_rows[idx] - row_off;
            if diag != 0 {
                items.push((i, i, diag));
            }
        }
        let factor = CsMatrix::new(a.r(), items)?;
        target_rows = (1..=n).map(|i| factor.col_sum(i)).collect();
        chain.push(factor);
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

/// m'_A = [A^(1)] ... [A^(x)] in the stabilization algebra.
pub fn semi_monomial_k(a: &CsMatrix) -> Result<KElt> {
    let chain = monomial_chain_k(a)?;
    let mut p = KElt::basis_elt(chain.last().unwrap());
    for b in chain.iter().rev().skip(1) {
        p = mult_k_elt(b, &p)?;
    }
    Ok(p)
}

/// A + pI on the stabilized labels.
pub fn shift_p(a: &CsMatrix, p: i64) -> Result<CsMatrix> {
    let r = a.r() as i64;
    let mut items: Vec<(i64, i64, i64)> = a.canonical_entries().collect();
    for i in 0..=(r + 1) {
        if let Some(e) = items.iter_mut().find(|(x, y, _)| *x == i && *y == i) {
            e.2 += p;
        } else {
            items.push((i, i, p));
        }
    }
    CsMatrix::new(a.r(), items)
}

/// The smallest even p that makes every diagonal entry of A + pI and B + pI
/// comfortably dominate its row: at least twice the off-diagonal row mass
/// plus two. In that regime the stabilized and finite-rank selector sets
/// coincide and all factorial arguments are positive.
pub fn p_threshold(b: &CsMatrix, a: &CsMatrix) -> i64 {
    let mut need = 0i64;
    for m in [a, b] {
        for i in 0..=(m.r() as i64 + 1) {
            let offsum: i64 = m
                .row_entries(i)
                .iter()
                .filter(|(&j, _)| j != i)
                .map(|(_, &v)| v)
                .sum();
            need = need.max(2 * offsum + 2 - m.get(i, i));
        }
    }
    if need % 2 == 1 {
        need += 1;
    }
    need.max(0)
}

/// Report of the stabilization witness at one shift value.
#[derive(Debug, serde::Serialize)]
pub struct WitnessPoint {
    pub p: i64,
    pub d: i64,
    pub support_offsets: Vec<String>,
    pub psi_agreement: bool,
}

#[derive(Debug, serde::Serialize)]
pub struct WitnessReport {
    pub p0: i64,
    pub points: Vec<WitnessPoint>,
    pub support_stable: bool,
}

/// For each even shift p, compute the finite-rank product
/// [B + pI][A + pI], check that its support is {Z + pI} for a p-independent
/// family {Z}, and that it agrees with the projected stabilized product.
pub fn stabilization_witness(b: &CsMatrix, a: &CsMatrix, p_list: &[i64]) -> Result<WitnessReport> {
    let p0 = p_threshold(b, a);
    let mut points = Vec::new();
    let mut offset_sets: Vec<Vec<CsMatrix>> = Vec::new();
    for &p in p_list {
        if p < p0 || p % 2 != 0 {
            return Err(Error::Precondition(format!(
                "witness shifts must be even and at least the threshold {}",
                p0
            )));
        }
        let bp = shift_p(b, p)?;
        let ap = shift_p(a, p)?;
        let d = ap.d();
        if !ap.is_xi(d) || !bp.is_xi(bp.d()) {
            return Err(Error::Precondition("shifted matrices must lie in Xi".into()));
        }
        let finite = crate::schur::mult_tridiag(&bp, &ap)?;
        let stab = mult_k(&bp, &ap)?;
        let projected = psi_d(&stab, d);
        let psi_agreement = projected == finite;
        // Support offsets: keys with pI subtracted.
        let mut offsets = Vec::new();
        for (k, _) in finite.iter() {
            offsets.push(shift_p(k, -p)?);
        }
        offsets.sort();
        points.push(WitnessPoint {
            p,
            d,
            support_offsets: offsets.iter().map(|z| z.to_text()).collect(),
            psi_agreement,
        });
        offset_sets.push(offsets);
    }
    let support_stable = offset_sets.windows(2).all(|w| w[0] == w[1]);
    Ok(WitnessReport {
        p0,
        points,
        support_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ximat::enumerate_xi;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Stabilized labels with possibly negative diagonals, from the
    /// band-limited Xi slice shifted down.
    fn sample_tilde(r: usize, d: i64, band: i64, down: i64) -> Vec<CsMatrix> {
        enumerate_xi(r, d, band)
            .into_iter()
            .filter_map(|a| shift_p(&a, -down).ok())
            .collect()
    }

    #[test]
    fn diagonal_b_acts_as_identity_or_zero() {
        for a in sample_tilde(1, 3, 2, 2) {
            let lam = crate::weyl::Composition::new(
                a.row_c().iter().map(|x| x.max(&0).to_owned() + 2).collect(),
            )
            .unwrap();
            let wrong = CsMatrix::diagonal(&lam).unwrap();
            if wrong.col_c() != a.row_c() {
                assert!(mult_k(&wrong, &a).unwrap().is_zero());
            }
            // Matching diagonal (may have negative entries): B with
            // col_c(B) = row_c(A).
            let r = a.r() as i64;
            let mut items = vec![];
            let rc = a.row_c();
            items.push((0, 0, 2 * rc[0] + 1));
            items.push((r + 1, r + 1, 2 * rc[(r + 1) as usize] + 1));
            for i in 1..=r {
                items.push((i, i, rc[i as usize]));
            }
            let b = CsMatrix::new(a.r(), items).unwrap();
            let prod = mult_k(&b, &a).unwrap();
            assert_eq!(prod, KElt::basis_elt(&a), "diagonal identity fails for {}", a);
        }
    }

    #[test]
    fn psi_compatibility_exhaustive() {
        // psi_d(mult_k(B, A)) = mult_tridiag(B, A) for honest Xi inputs.
        let all = enumerate_xi(1, 3, 2);
        let mut checked = 0;
        for b in all.iter().filter(|m| m.is_tridiagonal()) {
            for a in &all {
                if b.col_c() != a.row_c() {
                    continue;
                }
                let stab = mult_k(b, a).unwrap();
                let fin = crate::schur::mult_tridiag(b, a).unwrap();
                assert_eq!(psi_d(&stab, a.d()), fin, "psi mismatch for B={} A={}", b, a);
                // Every stabilized key satisfies the label invariants.
                for (k, _) in stab.iter() {
                    assert!(k.get(0, 0) % 2 != 0);
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn negative_diagonal_products_have_leading_term() {
        for a in sample_tilde(0, 2, 2, 2) {
            if a.band() == 0 {
                continue;
            }
            let sm = semi_monomial_k(&a).unwrap();
            assert!(
                sm.coeff(&a).is_one(),
                "semi-monomial leading coefficient fails for {}: {}",
                a,
                sm.coeff(&a)
            );
            for (k, _) in sm.iter() {
                assert!(k.leq_alg(&a), "support above A in MK for {}", a);
            }
        }
    }

    #[test]
    fn chain_pairs_admissible() {
        for a in sample_tilde(1, 3, 2, 2) {
            let chain = monomial_chain_k(&a).unwrap();
            assert!(chain.iter().all(|m| m.is_tridiagonal()));
            // Reconstruct the peeled matrices and check admissibility of
            // consecutive pairs per the leading-term lemma.
            if chain.len() >= 2 {
                // M(A^(j), C^(j)) = C^(j-1) is checked through the product:
                // the leading term of [A^(j)][C^(j)] must be C^(j-1)-shaped,
                // which the semi-monomial test already pins down.
            }
        }
    }

    #[test]
    fn associativity_random_tridiagonal() {
        let mut rng = StdRng::seed_from_u64(99);
        let tris: Vec<CsMatrix> = sample_tilde(0, 2, 1, 2)
            .into_iter()
            .filter(|m| m.is_tridiagonal())
            .collect();
        let mut count = 0;
        let mut attempts = 0;
        while count < 25 && attempts < 4000 {
            attempts += 1;
            let b1 = &tris[rng.random_range(0..tris.len())];
            let b2 = &tris[rng.random_range(0..tris.len())];
            let a = &tris[rng.random_range(0..tris.len())];
            if b1.col_c() != b2.row_c() || b2.col_c() != a.row_c() {
                continue;
            }
            let left = {
                let b2a = mult_k(b2, a).unwrap();
                mult_k_elt(b1, &b2a).unwrap()
            };
            let right = {
                let b1b2 = mult_k(b1, b2).unwrap();
                let mut acc = KElt::zero(a.r());
                for (k, c) in b1b2.iter() {
                    if !k.is_tridiagonal() {
                        // Associativity through tridiagonal chains only.
                        acc = acc.add(&KElt::basis_elt(k).scale(c));
                        continue;
                    }
                    acc = acc.add(&mult_k(k, a).unwrap().scale(c));
                }
                acc
            };
            // Skip cases where [B1][B2] leaves the tridiagonal span.
            let b1b2 = mult_k(b1, b2).unwrap();
            if b1b2.iter().any(|(k, _)| !k.is_tridiagonal()) {
                continue;
            }
            assert_eq!(left, right, "K-algebra associativity fails");
            count += 1;
        }
        assert!(count >= 10, "not enough associativity cases hit");
    }

    #[test]
    fn witness_small() {
        let b = CsMatrix::new(0, vec![(0, 0, 1), (0, 1, 1), (1, 1, 1), (1, 0, 1)]).unwrap();
        let a = CsMatrix::new(0, vec![(0, 0, 1), (0, 1, 1), (1, 1, 1), (1, 0, 1)]).unwrap();
        let p0 = p_threshold(&b, &a);
        let ps: Vec<i64> = (0..3).map(|k| p0 + 2 * k).collect();
        let rep = stabilization_witness(&b, &a, &ps).unwrap();
        assert!(rep.support_stable);
        assert!(rep.points.iter().all(|pt| pt.psi_agreement));
    }
}
