//! Exterior words over an indexed set of odd generators, with Koszul-signed
//! multiplication, and the pigeonhole vanishing check for wedge products.
//!
//! A word is a strictly increasing list of generator indices; products of
//! arbitrary index lists are canonicalized by sorting, picking up the sign
//! of the permutation, and vanish when an index repeats. Sums of words with
//! scalar coefficients form the exterior algebra; the module is generic over
//! [`Scalar`] because the heat-kernel code reuses it with complex
//! coefficients while the exact modules use rationals.

use crate::scalar::{Rational, Scalar};
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from exterior-algebra operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExteriorError {
    /// A one-form's coordinate vector has the wrong length.
    #[error("one-form {index} has {found} coordinates, expected {expected}")]
    CoordinateLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    /// A forced-vanishing conclusion failed to match the explicit expansion.
    #[error("internal check failed: {0}")]
    InternalCheck(String),
}

/// A strictly increasing list of generator indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtWord(Vec<u32>);

impl ExtWord {
    /// The empty word (the unit of the algebra).
    pub fn unit() -> Self {
        ExtWord(Vec::new())
    }

    /// The single-generator word.
    pub fn generator(i: u32) -> Self {
        ExtWord(vec![i])
    }

    /// Canonicalize an arbitrary index list: `None` if an index repeats,
    /// otherwise the sorted word and the sign of the sorting permutation.
    pub fn canonicalize(indices: &[u32]) -> Option<(ExtWord, i64)> {
        let mut v = indices.to_vec();
        // Count inversions while insertion-sorting; every swap of adjacent
        // odd generators contributes a factor of -1.
        let mut inversions = 0u64;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                inversions += 1;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((ExtWord(v), sign))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Concatenate two words and canonicalize.
    pub fn concat(&self, other: &ExtWord) -> Option<(ExtWord, i64)> {
        let mut joined = self.0.clone();
        joined.extend_from_slice(&other.0);
        ExtWord::canonicalize(&joined)
    }

    /// Remove generator `i`, returning the sign `(-1)^k` where `k` is the
    /// number of generators before `i` in the word; `None` if absent.
    pub fn remove(&self, i: u32) -> Option<(ExtWord, i64)> {
        let pos = self.0.binary_search(&i).ok()?;
        let mut v = self.0.clone();
        v.remove(pos);
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        Some((ExtWord(v), sign))
    }
}

/// A finite sum of exterior words with scalar coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtSum<S: Scalar> {
    terms: BTreeMap<ExtWord, S>,
}

impl<S: Scalar> ExtSum<S> {
    pub fn zero() -> Self {
        ExtSum {
            terms: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        ExtSum::term(ExtWord::unit(), S::one())
    }

    /// The sum with a single term (dropped if the coefficient is zero).
    pub fn term(word: ExtWord, coeff: S) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(word, coeff);
        }
        ExtSum { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExtWord, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &ExtWord) -> S {
        self.terms.get(word).cloned().unwrap_or_else(S::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, word: ExtWord, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word.clone()).or_insert_with(S::zero);
        *entry = entry.clone() + coeff;
        if entry.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = ExtSum::zero();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x.clone() * c.clone());
        }
        out
    }

    /// Wedge product with Koszul signs (all generators odd).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = ExtSum::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                if let Some((word, sign)) = wa.concat(wb) {
                    let mut c = ca.clone() * cb.clone();
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(word, c);
                }
            }
        }
        out
    }
}

/// Expand the wedge product of a list of one-forms, each given by its
/// coordinates in a spanning set of `rank` generators.
pub fn wedge_expansion(
    one_forms: &[Vec<Rational>],
    rank: usize,
) -> Result<ExtSum<Rational>, ExteriorError> {
    for (index, form) in one_forms.iter().enumerate() {
        if form.len() != rank {
            return Err(ExteriorError::CoordinateLength {
                index,
                expected: rank,
                found: form.len(),
            });
        }
    }
    let mut product = ExtSum::unit();
    for form in one_forms {
        let mut factor = ExtSum::zero();
        for (i, c) in form.iter().enumerate() {
            factor.add_term(ExtWord::generator(i as u32), c.clone());
        }
        product = product.mul(&factor);
    }
    Ok(product)
}

/// Whether a wedge product of one-forms is forced to vanish by counting:
/// more factors than the rank of their span.
///
/// When the count forces vanishing, the explicit expansion is computed and
/// must agree; a disagreement would indicate a sign error in the algebra
/// and is reported as an internal check failure rather than swallowed.
pub fn wedge_vanishing_check(
    one_forms: &[Vec<Rational>],
    rank: usize,
) -> Result<bool, ExteriorError> {
    for (index, form) in one_forms.iter().enumerate() {
        if form.len() != rank {
            return Err(ExteriorError::CoordinateLength {
                index,
                expected: rank,
                found: form.len(),
            });
        }
    }
    let forced = one_forms.len() > rank;
    if forced {
        let expansion = wedge_expansion(one_forms, rank)?;
        if !expansion.is_zero() {
            return Err(ExteriorError::InternalCheck(format!(
                "{} one-forms in a span of rank {rank} must wedge to zero, but the expansion has {} surviving terms",
                one_forms.len(),
                expansion.num_terms()
            )));
        }
    }
    Ok(forced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rint, Rational};

    #[test]
    fn canonicalize_sorts_with_sign() {
        let (w, s) = ExtWord::canonicalize(&[2, 1]).unwrap();
        assert_eq!(w.indices(), &[1, 2]);
        assert_eq!(s, -1);
        let (w, s) = ExtWord::canonicalize(&[3, 1, 2]).unwrap();
        assert_eq!(w.indices(), &[1, 2, 3]);
        assert_eq!(s, 1); // cyclic rotation of three odds: even permutation
        assert!(ExtWord::canonicalize(&[1, 1]).is_none());
    }

    #[test]
    fn removal_sign_counts_preceding_generators() {
        let (w, _) = ExtWord::canonicalize(&[0, 1, 2]).unwrap();
        let (r, s) = w.remove(1).unwrap();
        assert_eq!(r.indices(), &[0, 2]);
        assert_eq!(s, -1);
        assert!(w.remove(5).is_none());
    }

    #[test]
    fn anticommutativity() {
        let a: ExtSum<Rational> = ExtSum::term(ExtWord::generator(0), rint(1));
        let b: ExtSum<Rational> = ExtSum::term(ExtWord::generator(1), rint(1));
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        assert_eq!(ab, ba.scale(&rint(-1)));
        // Squares of odd generators vanish.
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn wedge_of_dependent_forms_vanishes() {
        // Three one-forms in a rank-2 span: forced.
        let forms = vec![
            vec![rint(1), rint(0)],
            vec![rint(0), rint(1)],
            vec![rint(3), rint(-5)],
        ];
        assert!(wedge_vanishing_check(&forms, 2).unwrap());
        assert!(wedge_expansion(&forms, 2).unwrap().is_zero());
    }

    #[test]
    fn wedge_of_independent_forms_survives() {
        let forms = vec![vec![rint(1), rint(0)], vec![rint(1), rint(1)]];
        assert!(!wedge_vanishing_check(&forms, 2).unwrap());
        let e = wedge_expansion(&forms, 2).unwrap();
        let (w, _) = ExtWord::canonicalize(&[0, 1]).unwrap();
        assert_eq!(e.coeff(&w), rint(1));
    }

    #[test]
    fn coordinate_length_is_validated() {
        let forms = vec![vec![rint(1)]];
        assert!(matches!(
            wedge_vanishing_check(&forms, 2),
            Err(ExteriorError::CoordinateLength { .. })
        ));
    }
}
