//! Randomized invariants of the exact kernel: sign bookkeeping, trace
//! identities, rank arithmetic, complex Euler characteristics, and the
//! free graded-commutative dimension table against an enumeration oracle.

use std::collections::BTreeMap;

use num::Zero;
use proptest::collection::vec;
use proptest::prelude::*;

use twist4::graded::{flat_supertrace, free_cga_dimension_table, koszul_sign, GradedVectorSpace};
use twist4::linalg::{Matrix, MatrixComplex};
use twist4::{rint, Rational};

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Rational>> {
    vec(-4i64..=4, rows * cols).prop_map(move |entries| {
        Matrix::from_fn(rows, cols, |i, j| rint(entries[i * cols + j]))
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

/// Restrict a square matrix to the parity-preserving (even) endomorphisms
/// of the graded space with the given degrees.
fn parity_blocks(m: Matrix<Rational>, degrees: &[i64]) -> Matrix<Rational> {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if degrees[i].rem_euclid(2) == degrees[j].rem_euclid(2) {
            m.at(i, j).clone()
        } else {
            Rational::zero()
        }
    })
}

fn graded_space(degrees: &[i64]) -> GradedVectorSpace {
    GradedVectorSpace::integer(
        degrees
            .iter()
            .enumerate()
            .map(|(i, &d)| (format!("e{i}"), d))
            .collect(),
    )
}

proptest! {
    /// Composing permutations multiplies their Koszul signs, with the
    /// second factor's sign taken over the degrees as reordered by the
    /// first.
    #[test]
    fn koszul_sign_is_multiplicative(
        (degrees, p, q) in (2..=6usize).prop_flat_map(|n| {
            (vec(-2i64..=3, n), permutation(n), permutation(n))
        })
    ) {
        // After p, position j holds the element originally at p[j];
        // composing with q puts original p[q[k]] at position k.
        let composed: Vec<usize> = q.iter().map(|&k| p[k]).collect();
        let reordered: Vec<i64> = p.iter().map(|&j| degrees[j]).collect();
        let lhs = koszul_sign(&composed, &degrees).unwrap();
        let rhs = koszul_sign(&p, &degrees).unwrap() * koszul_sign(&q, &reordered).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// The parity-signed trace is cyclic on parity-preserving maps, hence
    /// vanishes on their commutators.
    #[test]
    fn supertrace_is_cyclic_for_even_maps(
        (degrees, a, b) in (2..=5usize).prop_flat_map(|n| {
            (vec(-2i64..=3, n), int_matrix(n, n), int_matrix(n, n))
        })
    ) {
        let space = graded_space(&degrees);
        let a = parity_blocks(a, &degrees);
        let b = parity_blocks(b, &degrees);
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        let str_ab = flat_supertrace(&space, &ab).unwrap();
        let str_ba = flat_supertrace(&space, &ba).unwrap();
        prop_assert_eq!(&str_ab, &str_ba);
        let commutator = ab.sub(&ba).unwrap();
        prop_assert!(flat_supertrace(&space, &commutator).unwrap().is_zero());
    }

    /// Rank plus kernel dimension equals the number of columns, the image
    /// basis has exactly rank columns, and kernel columns genuinely map to
    /// zero.
    #[test]
    fn rank_nullity_holds(
        m in (1..=6usize, 1..=6usize).prop_flat_map(|(r, c)| int_matrix(r, c))
    ) {
        let kernel = m.kernel_basis();
        let image = m.image_basis();
        prop_assert_eq!(m.rank() + kernel.ncols(), m.ncols());
        prop_assert_eq!(image.ncols(), m.rank());
        for j in 0..kernel.ncols() {
            let out = m.apply(&kernel.col(j)).unwrap();
            prop_assert!(out.iter().all(Rational::is_zero));
        }
    }

    /// Multiplying by unit-triangular matrices on either side preserves
    /// rank: the rank computation is basis-independent.
    #[test]
    fn rank_is_invariant_under_unit_triangular_factors(
        (a, lower, upper) in (1..=5usize, 1..=5usize).prop_flat_map(|(r, c)| {
            (int_matrix(r, c), int_matrix(r, r), int_matrix(c, c))
        })
    ) {
        let n = a.nrows();
        let c = a.ncols();
        let l = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                rint(1)
            } else if i > j {
                lower.at(i, j).clone()
            } else {
                Rational::zero()
            }
        });
        let u = Matrix::from_fn(c, c, |i, j| {
            if i == j {
                rint(1)
            } else if i < j {
                upper.at(i, j).clone()
            } else {
                Rational::zero()
            }
        });
        let conjugated = l.mul(&a).unwrap().mul(&u).unwrap();
        prop_assert_eq!(conjugated.rank(), a.rank());
    }

    /// For a three-term complex, the alternating sum of cohomology
    /// dimensions equals the alternating sum of chain dimensions, and each
    /// cohomology is bounded by its chain group.
    #[test]
    fn complex_euler_characteristic_is_chain_level(
        (d1, r2) in (1..=4usize, 1..=4usize, 1..=4usize).prop_flat_map(|(a, b, c)| {
            (int_matrix(b, a), int_matrix(c, b))
        })
    ) {
        // Build the second map with rows drawn from the left kernel of the
        // first, so the composite vanishes by construction.
        let left_kernel = d1.transpose().kernel_basis();
        let c = r2.nrows();
        let d2 = if left_kernel.ncols() == 0 {
            Matrix::zeros(c, d1.nrows())
        } else {
            let mix = Matrix::from_fn(c, left_kernel.ncols(), |i, j| {
                r2.at(i, j % r2.ncols()).clone()
            });
            mix.mul(&left_kernel.transpose()).unwrap()
        };
        let dims = vec![d1.ncols(), d1.nrows(), d2.nrows()];
        let complex = MatrixComplex::new(0, dims.clone(), vec![d1, d2]).unwrap();
        let h = complex.cohomology_dims();
        let mut chi_chain: i64 = 0;
        for (k, d) in dims.iter().enumerate() {
            chi_chain += if k % 2 == 0 { *d as i64 } else { -(*d as i64) };
            let hk = h.get(&(k as i64)).copied().unwrap_or(0);
            prop_assert!(hk <= *d, "degree {k}: cohomology exceeds chains");
        }
        let chi_h: i64 = h
            .iter()
            .map(|(k, d)| if k.rem_euclid(2) == 0 { *d as i64 } else { -(*d as i64) })
            .sum();
        prop_assert_eq!(chi_h, chi_chain);
    }

    /// The convolution-built dimension table of the free graded-commutative
    /// algebra agrees with a direct enumeration of exponent vectors.
    #[test]
    fn free_cga_table_matches_exponent_enumeration(
        (degrees, cap) in (vec(-2i64..=3, 1..=4), 0..=5usize)
    ) {
        let table = free_cga_dimension_table(&degrees, cap);
        let mut oracle: BTreeMap<(usize, i64), u128> = BTreeMap::new();
        let mut stack: Vec<(usize, usize, i64)> = vec![(0, 0, 0)];
        while let Some((idx, weight, degree)) = stack.pop() {
            if idx == degrees.len() {
                *oracle.entry((weight, degree)).or_insert(0) += 1;
                continue;
            }
            let max_e = if degrees[idx].rem_euclid(2) == 1 {
                1
            } else {
                cap - weight
            };
            for e in 0..=max_e {
                if weight + e > cap {
                    break;
                }
                stack.push((idx + 1, weight + e, degree + degrees[idx] * e as i64));
            }
        }
        prop_assert_eq!(table, oracle);
    }
}
