//! Graded vector spaces, degreewise linear maps, Koszul signs, supertraces,
//! and dimension counts of free graded-commutative algebras.
//!
//! A [`GradedVectorSpace`] is a finite ordered basis with an integer degree
//! per element, in one of two grading modes: honest integer grading or its
//! two-periodic collapse. Degreewise maps are stored as one matrix block per
//! source degree; homogeneity is part of the data, not an afterthought, so a
//! map that mixes degrees cannot be represented at all.
//!
//! The [`koszul_sign`] function is the single source of truth for the sign
//! that appears when odd elements are permuted; every other module that
//! needs a sign routes through it or through the word-level variant in
//! [`crate::exterior`].

use crate::linalg::Matrix;
use crate::scalar::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from graded-space and graded-map construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GradedError {
    /// The index list passed to a sign computation is not a permutation.
    #[error("not a permutation of 0..{len}: {indices:?}")]
    NotAPermutation { len: usize, indices: Vec<usize> },
    /// A block's shape disagrees with the source and target dimensions.
    #[error("block for source degree {degree} has shape {found_rows}x{found_cols}, expected {expected_rows}x{expected_cols}")]
    BlockShape {
        degree: i64,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    /// Supertrace requires a degree-preserving endomorphism.
    #[error("supertrace requires shift 0 and equal source and target; found shift {shift}")]
    NotAnEndomorphism { shift: i64 },
    /// A flat matrix claimed to be homogeneous has an entry connecting
    /// incompatible degrees.
    #[error("flat matrix is not homogeneous of shift {shift}: nonzero entry from degree {from} to degree {to}")]
    NotHomogeneous { shift: i64, from: i64, to: i64 },
    /// Two spaces expected to be equal differ.
    #[error("graded spaces differ: {context}")]
    SpaceMismatch { context: String },
}

/// Integer grading or its two-periodic collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GradingMode {
    Integer,
    TwoPeriodic,
}

/// One basis element: a label for reports and an integer degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisElement {
    pub label: String,
    pub degree: i64,
}

/// A finite-dimensional graded vector space with an ordered basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedVectorSpace {
    mode: GradingMode,
    basis: Vec<BasisElement>,
}

impl GradedVectorSpace {
    /// Build from labeled degrees. In two-periodic mode degrees are stored
    /// reduced to `{0, 1}`.
    pub fn new(mode: GradingMode, basis: Vec<BasisElement>) -> Self {
        let basis = match mode {
            GradingMode::Integer => basis,
            GradingMode::TwoPeriodic => basis
                .into_iter()
                .map(|b| BasisElement {
                    degree: b.degree.rem_euclid(2),
                    label: b.label,
                })
                .collect(),
        };
        GradedVectorSpace { mode, basis }
    }

    /// Integer-graded space from `(label, degree)` pairs.
    pub fn integer(pairs: Vec<(String, i64)>) -> Self {
        GradedVectorSpace::new(
            GradingMode::Integer,
            pairs
                .into_iter()
                .map(|(label, degree)| BasisElement { label, degree })
                .collect(),
        )
    }

    pub fn mode(&self) -> GradingMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn degree(&self, index: usize) -> i64 {
        self.basis[index].degree
    }

    pub fn label(&self, index: usize) -> &str {
        &self.basis[index].label
    }

    /// Parity of a basis element: degree mod 2 in `{0, 1}`.
    pub fn parity(&self, index: usize) -> u8 {
        self.basis[index].degree.rem_euclid(2) as u8
    }

    /// Dimensions keyed by degree, ascending.
    pub fn dims_by_degree(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for b in &self.basis {
            *out.entry(b.degree).or_insert(0) += 1;
        }
        out
    }

    /// The distinct degrees present, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        self.dims_by_degree().into_keys().collect()
    }

    /// Indices of the basis elements in a given degree, in basis order.
    pub fn indices_in_degree(&self, degree: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degree(i) == degree).collect()
    }

    /// The same basis with degrees reduced mod 2.
    pub fn collapse_two_periodic(&self) -> GradedVectorSpace {
        GradedVectorSpace::new(GradingMode::TwoPeriodic, self.basis.clone())
    }
}

/// A degreewise linear map of homogeneous shift `s`: one matrix block per
/// source degree, mapping into source degree + `s` of the target.
///
/// Blocks absent from the map are zero. Every stored block's shape is
/// validated against the two spaces at construction.
#[derive(Debug, Clone)]
pub struct GradedMap {
    source: GradedVectorSpace,
    target: GradedVectorSpace,
    shift: i64,
    blocks: BTreeMap<i64, Matrix<Rational>>,
}

impl GradedMap {
    pub fn new(
        source: GradedVectorSpace,
        target: GradedVectorSpace,
        shift: i64,
        blocks: BTreeMap<i64, Matrix<Rational>>,
    ) -> Result<Self, GradedError> {
        for (&degree, block) in &blocks {
            let expected_cols = source.indices_in_degree(degree).len();
            let expected_rows = target.indices_in_degree(degree + shift).len();
            if block.nrows() != expected_rows || block.ncols() != expected_cols {
                return Err(GradedError::BlockShape {
                    degree,
                    expected_rows,
                    expected_cols,
                    found_rows: block.nrows(),
                    found_cols: block.ncols(),
                });
            }
        }
        Ok(GradedMap {
            source,
            target,
            shift,
            blocks,
        })
    }

    /// Interpret a flat matrix over the full bases as a homogeneous map,
    /// verifying that every nonzero entry respects the shift.
    pub fn from_flat(
        source: GradedVectorSpace,
        target: GradedVectorSpace,
        shift: i64,
        flat: &Matrix<Rational>,
    ) -> Result<Self, GradedError> {
        if flat.nrows() != target.dim() || flat.ncols() != source.dim() {
            return Err(GradedError::BlockShape {
                degree: 0,
                expected_rows: target.dim(),
                expected_cols: source.dim(),
                found_rows: flat.nrows(),
                found_cols: flat.ncols(),
            });
        }
        for i in 0..target.dim() {
            for j in 0..source.dim() {
                if flat.at(i, j).is_zero() {
                    continue;
                }
                let ok = match source.mode() {
                    GradingMode::Integer => target.degree(i) == source.degree(j) + shift,
                    GradingMode::TwoPeriodic => {
                        target.degree(i) == (source.degree(j) + shift).rem_euclid(2)
                    }
                };
                if !ok {
                    return Err(GradedError::NotHomogeneous {
                        shift,
                        from: source.degree(j),
                        to: target.degree(i),
                    });
                }
            }
        }
        let mut blocks = BTreeMap::new();
        for &degree in source.dims_by_degree().keys() {
            let src_idx = source.indices_in_degree(degree);
            let tgt_degree = match source.mode() {
                GradingMode::Integer => degree + shift,
                GradingMode::TwoPeriodic => (degree + shift).rem_euclid(2),
            };
            let tgt_idx = target.indices_in_degree(tgt_degree);
            let block = Matrix::from_fn(tgt_idx.len(), src_idx.len(), |r, c| {
                flat.at(tgt_idx[r], src_idx[c]).clone()
            });
            if !block.is_zero() || (!src_idx.is_empty() && !tgt_idx.is_empty()) {
                blocks.insert(degree, block);
            }
        }
        GradedMap::new(source, target, shift, blocks)
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn source(&self) -> &GradedVectorSpace {
        &self.source
    }

    pub fn target(&self) -> &GradedVectorSpace {
        &self.target
    }

    pub fn block(&self, degree: i64) -> Option<&Matrix<Rational>> {
        self.blocks.get(&degree)
    }

    /// The full matrix over the flat bases of source and target.
    pub fn to_flat(&self) -> Matrix<Rational> {
        let mut flat = Matrix::zeros(self.target.dim(), self.source.dim());
        for (&degree, block) in &self.blocks {
            let src_idx = self.source.indices_in_degree(degree);
            let tgt_degree = match self.source.mode() {
                GradingMode::Integer => degree + self.shift,
                GradingMode::TwoPeriodic => (degree + self.shift).rem_euclid(2),
            };
            let tgt_idx = self.target.indices_in_degree(tgt_degree);
            for (r, &i) in tgt_idx.iter().enumerate() {
                for (c, &j) in src_idx.iter().enumerate() {
                    flat.set(i, j, block.at(r, c).clone());
                }
            }
        }
        flat
    }

    /// Supertrace of a degree-preserving endomorphism:
    /// the alternating sum `sum_d (-1)^d tr(block_d)`.
    pub fn supertrace(&self) -> Result<Rational, GradedError> {
        if self.shift != 0 || self.source != self.target {
            return Err(GradedError::NotAnEndomorphism { shift: self.shift });
        }
        let mut total = Rational::zero();
        for (&degree, block) in &self.blocks {
            let t = block
                .trace()
                .map_err(|_| GradedError::NotAnEndomorphism { shift: self.shift })?;
            if degree.rem_euclid(2) == 0 {
                total += t;
            } else {
                total -= t;
            }
        }
        Ok(total)
    }
}

/// Supertrace of a flat endomorphism of a graded space: the alternating sum
/// of diagonal entries weighted by the parity of each basis element.
///
/// Unlike [`GradedMap::supertrace`] this does not require homogeneity, only
/// a square matrix over the space's basis.
pub fn flat_supertrace(
    space: &GradedVectorSpace,
    m: &Matrix<Rational>,
) -> Result<Rational, GradedError> {
    if m.nrows() != space.dim() || m.ncols() != space.dim() {
        return Err(GradedError::SpaceMismatch {
            context: format!(
                "supertrace of a {}x{} matrix over a space of dimension {}",
                m.nrows(),
                m.ncols(),
                space.dim()
            ),
        });
    }
    let mut total = Rational::zero();
    for i in 0..space.dim() {
        if space.parity(i) == 0 {
            total += m.at(i, i).clone();
        } else {
            total -= m.at(i, i).clone();
        }
    }
    Ok(total)
}

/// The Koszul sign of a permutation of homogeneous elements.
///
/// `perm[k]` is the original position of the element now at position `k`;
/// `degrees[j]` is the degree of the element originally at position `j`.
/// The sign is `-1` raised to the number of inversions whose two elements
/// are both odd: transposing two elements costs `(-1)^(|a||b|)`.
pub fn koszul_sign(perm: &[usize], degrees: &[i64]) -> Result<i64, GradedError> {
    if perm.len() != degrees.len() {
        return Err(GradedError::NotAPermutation {
            len: degrees.len(),
            indices: perm.to_vec(),
        });
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(GradedError::NotAPermutation {
                len: degrees.len(),
                indices: perm.to_vec(),
            });
        }
        seen[p] = true;
    }
    let mut odd_inversions = 0u64;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j]
                && degrees[perm[i]].rem_euclid(2) == 1
                && degrees[perm[j]].rem_euclid(2) == 1
            {
                odd_inversions += 1;
            }
        }
    }
    Ok(if odd_inversions.is_multiple_of(2) { 1 } else { -1 })
}

/// Dimension table of the free graded-commutative algebra on generators of
/// the given degrees: even generators polynomial, odd generators exterior.
///
/// Returns counts keyed by `(word length, total degree)` for word lengths up
/// to `max_weight`. Counts use `u128`; the products involved stay far below
/// overflow for any cap this crate accepts.
pub fn free_cga_dimension_table(
    generator_degrees: &[i64],
    max_weight: usize,
) -> BTreeMap<(usize, i64), u128> {
    let mut table: BTreeMap<(usize, i64), u128> = BTreeMap::new();
    table.insert((0, 0), 1);
    for &g in generator_degrees {
        let odd = g.rem_euclid(2) == 1;
        let mut next: BTreeMap<(usize, i64), u128> = BTreeMap::new();
        for (&(w, d), &count) in &table {
            let max_k = if odd { 1 } else { max_weight - w };
            for k in 0..=max_k {
                if w + k > max_weight {
                    break;
                }
                let key = (w + k, d + g * k as i64);
                *next.entry(key).or_insert(0) += count;
            }
        }
        table = next;
    }
    table
}

/// Dimension of the weight-`w`, degree-`d` piece of the free
/// graded-commutative algebra on the given generator degrees.
pub fn free_cga_dimension(generator_degrees: &[i64], weight: usize, degree: i64) -> u128 {
    free_cga_dimension_table(generator_degrees, weight)
        .get(&(weight, degree))
        .copied()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rint;

    fn space(degs: &[i64]) -> GradedVectorSpace {
        GradedVectorSpace::integer(
            degs.iter()
                .enumerate()
                .map(|(i, &d)| (format!("e{i}"), d))
                .collect(),
        )
    }

    #[test]
    fn dims_by_degree_and_collapse() {
        let v = space(&[0, 1, 2, -1, 1]);
        let dims = v.dims_by_degree();
        assert_eq!(dims[&1], 2);
        assert_eq!(dims[&-1], 1);
        let c = v.collapse_two_periodic();
        assert_eq!(c.dims_by_degree()[&0], 2);
        assert_eq!(c.dims_by_degree()[&1], 3);
    }

    #[test]
    fn koszul_sign_swapping_two_odds() {
        // Swapping two odd elements: sign -1.
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]).unwrap(), -1);
        // Odd past even: sign +1.
        assert_eq!(koszul_sign(&[1, 0], &[1, 2]).unwrap(), 1);
        // Identity permutation: +1.
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]).unwrap(), 1);
        // Reversing three odds: three transpositions of odd pairs.
        assert_eq!(koszul_sign(&[2, 1, 0], &[1, 1, 1]).unwrap(), -1);
    }

    #[test]
    fn koszul_sign_rejects_non_permutations() {
        assert!(koszul_sign(&[0, 0], &[1, 1]).is_err());
        assert!(koszul_sign(&[0, 2], &[1, 1]).is_err());
    }

    #[test]
    fn graded_map_roundtrip_and_homogeneity() {
        let v = space(&[0, 1]);
        let w = space(&[1, 2]);
        // Shift +1 map: degree 0 -> 1, degree 1 -> 2; flat matrix with the
        // two allowed entries.
        let mut flat = Matrix::zeros(2, 2);
        flat.set(0, 0, rint(3));
        flat.set(1, 1, rint(5));
        let g = GradedMap::from_flat(v.clone(), w.clone(), 1, &flat).unwrap();
        assert_eq!(g.to_flat(), flat);

        // An entry violating the shift is rejected.
        let mut bad = Matrix::zeros(2, 2);
        bad.set(1, 0, rint(1)); // degree 0 -> degree 2 under shift 1: no.
        assert!(matches!(
            GradedMap::from_flat(v, w, 1, &bad),
            Err(GradedError::NotHomogeneous { .. })
        ));
    }

    #[test]
    fn supertrace_alternates() {
        let v = space(&[0, 1]);
        let mut flat = Matrix::zeros(2, 2);
        flat.set(0, 0, rint(7));
        flat.set(1, 1, rint(2));
        let g = GradedMap::from_flat(v.clone(), v.clone(), 0, &flat).unwrap();
        assert_eq!(g.supertrace().unwrap(), rint(5));
        assert_eq!(flat_supertrace(&v, &flat).unwrap(), rint(5));
    }

    #[test]
    fn free_cga_counts_polynomial_and_exterior() {
        // One even generator of degree 2: one monomial per weight.
        assert_eq!(free_cga_dimension(&[2], 3, 6), 1);
        assert_eq!(free_cga_dimension(&[2], 3, 5), 0);
        // Three odd generators of degree 1: binomial(3, w) in degree w.
        assert_eq!(free_cga_dimension(&[1, 1, 1], 2, 2), 3);
        assert_eq!(free_cga_dimension(&[1, 1, 1], 3, 3), 1);
        assert_eq!(free_cga_dimension(&[1, 1, 1], 4, 4), 0);
        // Mixed: one even degree 0 and one odd degree 1, weight 2.
        let t = free_cga_dimension_table(&[0, 1], 2);
        assert_eq!(t[&(2, 0)], 1); // x^2
        assert_eq!(t[&(2, 1)], 1); // x theta
    }
}
