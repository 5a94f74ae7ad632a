//! Weyl algebras on graded dual pairs and filtered algebras of
//! differential-operator type.
//!
//! A [`WeylAlgebra`] is built on a generator space `V ⊕ V*` with the
//! evaluation pairing; its elements are kept in a normal-ordered PBW basis
//! with every `V*`-generator moved to the right of every `V`-generator, and
//! the product is computed by graded reordering with `ħ = 1`:
//! `f·b = (-1)^(|f||b|) b·f + ω(f, b)`. Products that escape the length cap
//! are reported as errors, never truncated.
//!
//! The product has an independent oracle: `V*`-generators act as graded
//! derivations on the free graded-commutative algebra of `V`, and an operator
//! of fiber order `m` supported on a set of directions is determined by its
//! action on monomials of length at most `m` in those directions. The
//! [`WeylAlgebra::action_oracle_check`] method exercises that representation
//! for every capped pair of basis monomials.
//!
//! A [`DOTAlgebra`] records the bi-indexed dimension data of a filtered
//! algebra of differential-operator type: blocks keyed by fiberwise weight
//! and by the anti-diagonal level (fiber weight minus base weight).
//! [`dot_check`] recomputes both associated-graded dimension tables from
//! scratch — the fiberwise one against functions on the shifted cotangent
//! space (a free graded-commutative count) and the anti-diagonal one against
//! differential operators on the underlying space (a PBW count) — and flags
//! any block that disagrees, as report rows rather than errors.

use crate::graded::{free_cga_dimension_table, GradedVectorSpace};
use crate::linalg::Matrix;
use crate::scalar::{rint, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Errors raised by Weyl-algebra construction and products.
#[derive(Debug, thiserror::Error)]
pub enum WeylError {
    /// A product left the PBW length cap.
    #[error("product produced a monomial of length {length}, beyond the cap {cap}")]
    CapOverflow { length: usize, cap: usize },
    /// An exponent vector has the wrong number of entries.
    #[error("exponent vector has {found} entries, expected {expected}")]
    ExponentLength { expected: usize, found: usize },
    /// An odd generator appeared with exponent at least two in an input.
    #[error("odd generator {label} cannot carry exponent {exponent}")]
    OddExponent { label: String, exponent: u32 },
    /// The symplectic form has the wrong shape.
    #[error("form is {found_rows}x{found_cols}, expected {expected}x{expected}")]
    FormShape {
        expected: usize,
        found_rows: usize,
        found_cols: usize,
    },
    /// The symplectic form is not graded-antisymmetric.
    #[error("form is not graded-antisymmetric at entry ({row}, {col})")]
    NotGradedAntisymmetric { row: usize, col: usize },
    /// The symplectic form is degenerate.
    #[error("form on a {dim}-dimensional space has rank {rank}")]
    DegenerateForm { rank: usize, dim: usize },
    /// The enumerated PBW count disagreed with the generating-function table.
    #[error("PBW enumeration at level {level}, degree {degree} gives {enumerated}, table gives {table}")]
    CountMismatch {
        level: usize,
        degree: i64,
        enumerated: u128,
        table: u128,
    },
    /// The normal-ordered product disagreed with the action on polynomials.
    #[error("product of {left} and {right} disagrees with its action on {poly}")]
    ActionMismatch {
        left: String,
        right: String,
        poly: String,
    },
    /// An associativity witness failed.
    #[error("associativity fails on ({a})({b})({c})")]
    NotAssociative { a: String, b: String, c: String },
    /// A graded commutator was requested for inhomogeneous arguments.
    #[error("graded commutator needs homogeneous arguments; found mixed parities")]
    InhomogeneousCommutator,
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// One generator of a Weyl algebra: base (`V`) or fiber (`V*`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylGen {
    pub label: String,
    pub degree: i64,
    pub is_fiber: bool,
}

impl WeylGen {
    fn parity(&self) -> u8 {
        self.degree.rem_euclid(2) as u8
    }
}

/// Exponent vector over the full generator list, base block first.
pub type WeylExpo = Vec<u32>;

/// Element of a Weyl algebra: rational combination of normal-ordered PBW
/// monomials `x^α ∂^β`, keyed by exponent vector.
pub type WeylElement = BTreeMap<WeylExpo, Rational>;

/// Polynomial in the base generators only: an element of the free
/// graded-commutative algebra on `V`, keyed by base exponent vector.
pub type BasePoly = BTreeMap<Vec<u32>, Rational>;

/// Weyl algebra on a graded dual pair `V ⊕ V*` with the evaluation pairing.
///
/// Generators are ordered base block first, then fiber block; the canonical
/// PBW monomial form keeps fiber generators to the right, which is the
/// normal-order convention recorded in every serialized element.
#[derive(Debug, Clone)]
pub struct WeylAlgebra {
    name: String,
    gens: Vec<WeylGen>,
    n_base: usize,
    omega: Matrix<Rational>,
    cap: usize,
}

impl WeylAlgebra {
    /// Build the Weyl algebra on `V ⊕ V*` for a graded base space `V`.
    ///
    /// Fiber generators are the duals, labeled `∂<label>`, in degree `-d` for
    /// a base generator of degree `d`. The pairing is evaluation:
    /// `ω(∂_i, x_j) = δ_ij`, extended graded-antisymmetrically.
    pub fn on_dual_pair(name: &str, base: &GradedVectorSpace, cap: usize) -> WeylAlgebra {
        let n = base.dim();
        let mut gens: Vec<WeylGen> = Vec::with_capacity(2 * n);
        for b in base.basis() {
            gens.push(WeylGen {
                label: b.label.clone(),
                degree: b.degree,
                is_fiber: false,
            });
        }
        for b in base.basis() {
            gens.push(WeylGen {
                label: format!("∂{}", b.label),
                degree: -b.degree,
                is_fiber: true,
            });
        }
        let mut omega: Matrix<Rational> = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            // ω(∂_i, x_i) = 1; graded antisymmetry fixes the mirror entry:
            // ω(x_i, ∂_i) = -(-1)^(|x_i||∂_i|) ω(∂_i, x_i).
            omega.set(n + i, i, rint(1));
            let p = gens[i].parity();
            let mirror = if p == 1 { rint(1) } else { rint(-1) };
            omega.set(i, n + i, mirror);
        }
        WeylAlgebra {
            name: name.to_string(),
            gens,
            n_base: n,
            omega,
            cap,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn gens(&self) -> &[WeylGen] {
        &self.gens
    }

    pub fn base_dim(&self) -> usize {
        self.n_base
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    /// Degrees of the base generators, in order.
    pub fn base_degrees(&self) -> Vec<i64> {
        self.gens[..self.n_base].iter().map(|g| g.degree).collect()
    }

    /// Degrees of the fiber generators, in order.
    pub fn fiber_degrees(&self) -> Vec<i64> {
        self.gens[self.n_base..].iter().map(|g| g.degree).collect()
    }

    /// The evaluation pairing as a matrix over the full generator list.
    pub fn omega(&self) -> &Matrix<Rational> {
        &self.omega
    }

    /// The unit element.
    pub fn one(&self) -> WeylElement {
        let mut e = WeylElement::new();
        e.insert(vec![0; self.gens.len()], rint(1));
        e
    }

    /// The `i`-th generator as an element.
    pub fn gen_element(&self, i: usize) -> WeylElement {
        let mut expo = vec![0; self.gens.len()];
        expo[i] = 1;
        let mut e = WeylElement::new();
        e.insert(expo, rint(1));
        e
    }

    /// A single PBW monomial with coefficient one.
    pub fn monomial_element(&self, expo: &[u32]) -> Result<WeylElement, WeylError> {
        self.validate_expo(expo)?;
        let mut e = WeylElement::new();
        e.insert(expo.to_vec(), rint(1));
        Ok(e)
    }

    fn validate_expo(&self, expo: &[u32]) -> Result<(), WeylError> {
        if expo.len() != self.gens.len() {
            return Err(WeylError::ExponentLength {
                expected: self.gens.len(),
                found: expo.len(),
            });
        }
        for (i, &x) in expo.iter().enumerate() {
            if x >= 2 && self.gens[i].parity() == 1 {
                return Err(WeylError::OddExponent {
                    label: self.gens[i].label.clone(),
                    exponent: x,
                });
            }
        }
        Ok(())
    }

    fn expo_length(expo: &[u32]) -> usize {
        expo.iter().map(|&x| x as usize).sum()
    }

    fn expo_degree(&self, expo: &[u32]) -> i64 {
        expo.iter()
            .zip(&self.gens)
            .map(|(&x, g)| x as i64 * g.degree)
            .sum()
    }

    fn expo_to_word(expo: &[u32]) -> Vec<usize> {
        let mut w = Vec::new();
        for (i, &x) in expo.iter().enumerate() {
            for _ in 0..x {
                w.push(i);
            }
        }
        w
    }

    /// Normal-order a word of generator indices, accumulating the resulting
    /// PBW terms into `out` with the given coefficient.
    ///
    /// The rewriting rule is the graded commutation relation
    /// `g_p g_q = (-1)^(|g_p||g_q|) g_q g_p + ω(g_p, g_q)` applied to the
    /// first adjacent inversion; it terminates because a swap lowers the
    /// inversion count and a contraction shortens the word.
    fn normal_order_into(&self, word: Vec<usize>, coeff: Rational, out: &mut WeylElement) {
        let mut stack: Vec<(Vec<usize>, Rational)> = vec![(word, coeff)];
        while let Some((w, c)) = stack.pop() {
            let inversion = (0..w.len().saturating_sub(1)).find(|&t| w[t] > w[t + 1]);
            match inversion {
                Some(t) => {
                    let (p, q) = (w[t], w[t + 1]);
                    let swap_sign = if self.gens[p].parity() == 1 && self.gens[q].parity() == 1 {
                        rint(-1)
                    } else {
                        rint(1)
                    };
                    let mut swapped = w.clone();
                    swapped.swap(t, t + 1);
                    stack.push((swapped, c.clone() * swap_sign));
                    let pairing = self.omega.at(p, q);
                    if !pairing.is_zero() {
                        let mut contracted = w.clone();
                        contracted.drain(t..t + 2);
                        stack.push((contracted, c * pairing.clone()));
                    }
                }
                None => {
                    // Sorted word: collapse to an exponent vector. A repeated
                    // odd generator kills the term, since ω(g, g) = 0 here
                    // makes g² = ½[g, g] = 0.
                    let mut expo = vec![0u32; self.gens.len()];
                    let mut dead = false;
                    for &i in &w {
                        expo[i] += 1;
                        if expo[i] >= 2 && self.gens[i].parity() == 1 {
                            dead = true;
                            break;
                        }
                    }
                    if !dead {
                        let entry = out.entry(expo).or_insert_with(Rational::zero);
                        *entry += c;
                        if entry.is_zero() {
                            // Leave removal of cancelled terms to the caller's
                            // final sweep; keeping the entry here would be
                            // harmless but noisy.
                        }
                    }
                }
            }
        }
    }

    /// Normal-ordered product of two elements.
    ///
    /// Returns [`WeylError::CapOverflow`] if any surviving term of the normal
    /// form is longer than the cap; the product is never silently truncated.
    pub fn product(&self, a: &WeylElement, b: &WeylElement) -> Result<WeylElement, WeylError> {
        let mut out = WeylElement::new();
        for (ea, ca) in a {
            self.validate_expo(ea)?;
            for (eb, cb) in b {
                self.validate_expo(eb)?;
                let mut word = Self::expo_to_word(ea);
                word.extend(Self::expo_to_word(eb));
                self.normal_order_into(word, ca.clone() * cb.clone(), &mut out);
            }
        }
        out.retain(|_, c| !c.is_zero());
        if let Some(len) = out.keys().map(|e| Self::expo_length(e)).max() {
            if len > self.cap {
                return Err(WeylError::CapOverflow {
                    length: len,
                    cap: self.cap,
                });
            }
        }
        Ok(out)
    }

    /// Graded commutator `[a, b] = ab - (-1)^(|a||b|) ba` of two elements
    /// that are homogeneous in degree.
    pub fn graded_commutator(
        &self,
        a: &WeylElement,
        b: &WeylElement,
    ) -> Result<WeylElement, WeylError> {
        let parity_of = |e: &WeylElement| -> Result<u8, WeylError> {
            let mut parities = e.keys().map(|x| self.expo_degree(x).rem_euclid(2) as u8);
            match parities.next() {
                None => Ok(0),
                Some(p) => {
                    if parities.all(|q| q == p) {
                        Ok(p)
                    } else {
                        Err(WeylError::InhomogeneousCommutator)
                    }
                }
            }
        };
        let pa = parity_of(a)?;
        let pb = parity_of(b)?;
        let sign = if pa == 1 && pb == 1 { rint(-1) } else { rint(1) };
        let ab = self.product(a, b)?;
        let ba = self.product(b, a)?;
        let mut out = ab;
        for (e, c) in ba {
            let entry = out.entry(e).or_insert_with(Rational::zero);
            *entry -= sign.clone() * c;
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Human-readable form of an element, in normal order (fiber generators
    /// printed to the right of base generators within every monomial).
    pub fn format_element(&self, e: &WeylElement) -> String {
        if e.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (expo, c) in e {
            let mono: Vec<String> = expo
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0)
                .map(|(i, x)| {
                    if *x == 1 {
                        self.gens[i].label.clone()
                    } else {
                        format!("{}^{}", self.gens[i].label, x)
                    }
                })
                .collect();
            let mono = if mono.is_empty() {
                "1".to_string()
            } else {
                mono.join("*")
            };
            parts.push(format!("({}) {}", c, mono));
        }
        parts.join(" + ")
    }

    /// All PBW basis monomials of length at most `max_len`, in a fixed order.
    pub fn monomials_up_to(&self, max_len: usize) -> Vec<WeylExpo> {
        let mut out: Vec<WeylExpo> = Vec::new();
        let mut current = vec![0u32; self.gens.len()];
        self.enumerate_monomials(0, max_len, &mut current, &mut out);
        out.sort_by_key(|e| (Self::expo_length(e), e.clone()));
        out
    }

    fn enumerate_monomials(
        &self,
        index: usize,
        budget: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<WeylExpo>,
    ) {
        if index == self.gens.len() {
            out.push(current.clone());
            return;
        }
        let max_here = if self.gens[index].parity() == 1 {
            budget.min(1)
        } else {
            budget
        };
        for k in 0..=max_here {
            current[index] = k as u32;
            self.enumerate_monomials(index + 1, budget - k, current, out);
        }
        current[index] = 0;
    }

    /// PBW dimension table: counts keyed by `(length, degree)` for lengths up
    /// to the cap, from explicit monomial enumeration.
    pub fn pbw_dims(&self) -> BTreeMap<(usize, i64), u128> {
        let mut table = BTreeMap::new();
        for e in self.monomials_up_to(self.cap) {
            let key = (Self::expo_length(&e), self.expo_degree(&e));
            *table.entry(key).or_insert(0u128) += 1;
        }
        table
    }

    /// Check that the associated graded of the PBW filtration has the free
    /// graded-commutative dimensions, comparing the enumerated table against
    /// the generating-function count.
    pub fn gr_matches_free_cga(&self) -> Result<(), WeylError> {
        let degrees: Vec<i64> = self.gens.iter().map(|g| g.degree).collect();
        let expected = free_cga_dimension_table(&degrees, self.cap);
        let expected: BTreeMap<(usize, i64), u128> = expected
            .into_iter()
            .filter(|((_, _), c)| *c > 0)
            .collect();
        let got = self.pbw_dims();
        for (&(l, d), _) in expected.iter().chain(got.iter()) {
            let e = expected.get(&(l, d)).copied().unwrap_or(0);
            let g = got.get(&(l, d)).copied().unwrap_or(0);
            if e != g {
                return Err(WeylError::CountMismatch {
                    level: l,
                    degree: d,
                    enumerated: g,
                    table: e,
                });
            }
        }
        Ok(())
    }

    /// Check that leading terms multiply as in the free graded-commutative
    /// algebra: for every pair of basis monomials within the cap, the
    /// top-length part of the product is the Koszul-signed exponent sum.
    pub fn leading_term_check(&self) -> Result<u64, WeylError> {
        let monos = self.monomials_up_to(self.cap);
        let mut checked = 0u64;
        for a in &monos {
            for b in &monos {
                let total = Self::expo_length(a) + Self::expo_length(b);
                if total > self.cap {
                    continue;
                }
                let prod = self.product(&self.monomial_element(a)?, &self.monomial_element(b)?)?;
                let top: WeylElement = prod
                    .iter()
                    .filter(|(e, _)| Self::expo_length(e) == total)
                    .map(|(e, c)| (e.clone(), c.clone()))
                    .collect();
                let expected = match cga_mul(&self.gens, a, b) {
                    None => WeylElement::new(),
                    Some((sign, expo)) => {
                        let mut e = WeylElement::new();
                        e.insert(expo, rint(sign));
                        e
                    }
                };
                if top != expected {
                    return Err(WeylError::ActionMismatch {
                        left: self.format_element(&self.monomial_element(a)?),
                        right: self.format_element(&self.monomial_element(b)?),
                        poly: "leading term".to_string(),
                    });
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Apply an element to a polynomial in the base generators, reading each
    /// normal-ordered monomial `x^α ∂^β` as "differentiate by `β`, then
    /// multiply by `x^α`".
    pub fn apply(&self, op: &WeylElement, p: &BasePoly) -> Result<BasePoly, WeylError> {
        let mut out = BasePoly::new();
        for (expo, c) in op {
            self.validate_expo(expo)?;
            let mut work: BasePoly = p.clone();
            // Fiber part acts first; within the fiber word the rightmost
            // letter acts first, i.e. descending generator index.
            for i in (self.n_base..self.gens.len()).rev() {
                for _ in 0..expo[i] {
                    work = self.apply_fiber_gen(i, &work);
                }
            }
            // Base part multiplies on the left.
            let alpha = &expo[..self.n_base];
            for (mono, mc) in &work {
                if let Some((sign, merged)) = cga_mul(&self.gens[..self.n_base], alpha, mono) {
                    let entry = out.entry(merged).or_insert_with(Rational::zero);
                    *entry += c.clone() * mc.clone() * rint(sign);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// One fiber generator acting as a graded derivation with
    /// `∂_i(x_j) = ω(∂_i, x_j)` on a base polynomial.
    fn apply_fiber_gen(&self, fiber_index: usize, p: &BasePoly) -> BasePoly {
        let mut out = BasePoly::new();
        let f_parity = self.gens[fiber_index].parity();
        for (mono, c) in p {
            for j in 0..self.n_base {
                if mono[j] == 0 {
                    continue;
                }
                let pairing = self.omega.at(fiber_index, j);
                if pairing.is_zero() {
                    continue;
                }
                // Koszul sign for carrying the derivation past the factors
                // to the left of generator j.
                let mut prefix_parity = 0u8;
                for (k, &xk) in mono.iter().enumerate().take(j) {
                    prefix_parity ^= ((xk as u8) & 1) & self.gens[k].parity();
                }
                let sign = if f_parity == 1 && prefix_parity == 1 {
                    rint(-1)
                } else {
                    rint(1)
                };
                let mult = if self.gens[j].parity() == 1 {
                    rint(1)
                } else {
                    rint(mono[j] as i64)
                };
                let mut reduced = mono.clone();
                reduced[j] -= 1;
                let entry = out.entry(reduced).or_insert_with(Rational::zero);
                *entry += c.clone() * pairing.clone() * sign * mult;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Validate the normal-ordered product against the polynomial action for
    /// every pair of basis monomials whose lengths sum to at most `pair_cap`.
    ///
    /// For each pair the composite `a∘b` and the product `ab` are applied to
    /// every monomial supported in the base directions touched by the pair,
    /// of length up to the combined fiber order. An operator of that order
    /// and support is determined by its values there: applying it to `x^β`
    /// for `β` of minimal fiber length isolates the `∂^β` coefficients, so
    /// agreement on these polynomials implies equality of operators. Returns
    /// the number of pairs checked.
    pub fn action_oracle_check(&self, pair_cap: usize) -> Result<u64, WeylError> {
        let pair_cap = pair_cap.min(self.cap);
        let monos = self.monomials_up_to(pair_cap);
        let mut checked = 0u64;
        for a in &monos {
            let la = Self::expo_length(a);
            for b in &monos {
                if la + Self::expo_length(b) > pair_cap {
                    continue;
                }
                let ea = self.monomial_element(a)?;
                let eb = self.monomial_element(b)?;
                let prod = self.product(&ea, &eb)?;
                // Base directions touched by either monomial (a fiber
                // generator touches its dual base direction).
                let mut support: Vec<usize> = Vec::new();
                for j in 0..self.n_base {
                    if a[j] > 0 || b[j] > 0 || a[self.n_base + j] > 0 || b[self.n_base + j] > 0 {
                        support.push(j);
                    }
                }
                let fiber_order: usize = (self.n_base..self.gens.len())
                    .map(|i| (a[i] + b[i]) as usize)
                    .sum();
                for p in self.support_monomials(&support, fiber_order) {
                    let direct = self.apply(&prod, &p)?;
                    let composed = self.apply(&ea, &self.apply(&eb, &p)?)?;
                    if direct != composed {
                        return Err(WeylError::ActionMismatch {
                            left: self.format_element(&ea),
                            right: self.format_element(&eb),
                            poly: format!("{:?}", p.keys().next()),
                        });
                    }
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Monomial polynomials of length up to `max_len` in the given base
    /// directions (odd directions capped at exponent one).
    fn support_monomials(&self, support: &[usize], max_len: usize) -> Vec<BasePoly> {
        let mut expos: Vec<Vec<u32>> = vec![vec![0; self.n_base]];
        for &j in support {
            let mut next = Vec::new();
            for e in &expos {
                let used: usize = e.iter().map(|&x| x as usize).sum();
                let max_here = if self.gens[j].parity() == 1 {
                    (max_len - used).min(1)
                } else {
                    max_len - used
                };
                for k in 0..=max_here {
                    let mut e2 = e.clone();
                    e2[j] = k as u32;
                    next.push(e2);
                }
            }
            expos = next;
        }
        expos
            .into_iter()
            .map(|e| {
                let mut p = BasePoly::new();
                p.insert(e, rint(1));
                p
            })
            .collect()
    }

    /// Check associativity `(ab)c = a(bc)` on every triple of basis
    /// monomials whose lengths sum to at most `triple_cap`. Returns the
    /// number of triples checked.
    pub fn associativity_check(&self, triple_cap: usize) -> Result<u64, WeylError> {
        let triple_cap = triple_cap.min(self.cap);
        let monos = self.monomials_up_to(triple_cap);
        let mut checked = 0u64;
        for a in &monos {
            let la = Self::expo_length(a);
            for b in &monos {
                let lb = Self::expo_length(b);
                if la + lb > triple_cap {
                    continue;
                }
                for c in &monos {
                    if la + lb + Self::expo_length(c) > triple_cap {
                        continue;
                    }
                    let ea = self.monomial_element(a)?;
                    let eb = self.monomial_element(b)?;
                    let ec = self.monomial_element(c)?;
                    let left = self.product(&self.product(&ea, &eb)?, &ec)?;
                    let right = self.product(&ea, &self.product(&eb, &ec)?)?;
                    if left != right {
                        return Err(WeylError::NotAssociative {
                            a: self.format_element(&ea),
                            b: self.format_element(&eb),
                            c: self.format_element(&ec),
                        });
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }
}

/// Koszul-signed product of two exponent vectors in a free
/// graded-commutative algebra on the given generators. Returns `None` when
/// an odd generator repeats.
fn cga_mul(gens: &[WeylGen], a: &[u32], b: &[u32]) -> Option<(i64, Vec<u32>)> {
    let mut sign = 1i64;
    let mut merged = a.to_vec();
    for (j, &bx) in b.iter().enumerate() {
        if bx == 0 {
            continue;
        }
        if gens[j].parity() == 1 {
            if bx >= 2 || merged[j] >= 1 {
                return None;
            }
            // Move one odd letter of index j past the odd letters of a with
            // larger index.
            let crossings: u32 = merged
                .iter()
                .enumerate()
                .skip(j + 1)
                .filter(|(k, _)| gens[*k].parity() == 1)
                .map(|(_, &x)| x)
                .sum();
            if crossings % 2 == 1 {
                sign = -sign;
            }
        }
        merged[j] += bx;
    }
    Some((sign, merged))
}

/// Graded PBW dimension table of the enveloping algebra of a Heisenberg Lie
/// algebra on a graded symplectic space.
///
/// Validates that `omega` is graded-antisymmetric and nondegenerate, then
/// returns counts keyed by `(filtration level, degree)` for levels up to
/// `cap`. The counts are obtained by explicit monomial enumeration and
/// cross-checked against the free graded-commutative generating-function
/// table; a disagreement is an error, so the PBW statement is checked here,
/// not assumed.
pub fn heisenberg_enveloping_dims(
    space: &GradedVectorSpace,
    omega: &Matrix<Rational>,
    cap: usize,
) -> Result<BTreeMap<(usize, i64), u128>, WeylError> {
    let n = space.dim();
    if omega.nrows() != n || omega.ncols() != n {
        return Err(WeylError::FormShape {
            expected: n,
            found_rows: omega.nrows(),
            found_cols: omega.ncols(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            let sign = if space.parity(i) == 1 && space.parity(j) == 1 {
                rint(1)
            } else {
                rint(-1)
            };
            if omega.at(i, j).clone() != sign * omega.at(j, i).clone() {
                return Err(WeylError::NotGradedAntisymmetric { row: i, col: j });
            }
        }
    }
    let rank = omega.rank();
    if rank < n {
        return Err(WeylError::DegenerateForm { rank, dim: n });
    }

    // Explicit enumeration of PBW monomials (odd exponents at most one).
    let mut enumerated: BTreeMap<(usize, i64), u128> = BTreeMap::new();
    let mut stack: Vec<(usize, usize, i64)> = vec![(0, 0, 0)];
    while let Some((index, len, deg)) = stack.pop() {
        if index == n {
            *enumerated.entry((len, deg)).or_insert(0) += 1;
            continue;
        }
        let max_here = if space.parity(index) == 1 {
            (cap - len).min(1)
        } else {
            cap - len
        };
        for k in 0..=max_here {
            stack.push((index + 1, len + k, deg + space.degree(index) * k as i64));
        }
    }

    let degrees: Vec<i64> = space.basis().iter().map(|b| b.degree).collect();
    let table = free_cga_dimension_table(&degrees, cap);
    for (&(l, d), &c) in enumerated.iter() {
        let t = table.get(&(l, d)).copied().unwrap_or(0);
        if t != c {
            return Err(WeylError::CountMismatch {
                level: l,
                degree: d,
                enumerated: c,
                table: t,
            });
        }
    }
    for (&(l, d), &t) in table.iter() {
        if t > 0 && enumerated.get(&(l, d)).copied().unwrap_or(0) != t {
            return Err(WeylError::CountMismatch {
                level: l,
                degree: d,
                enumerated: 0,
                table: t,
            });
        }
    }
    Ok(enumerated)
}

/// One dimension block of a differential-operator-type algebra, keyed by
/// fiberwise weight, base weight, and internal degree. The anti-diagonal
/// level is `fiber_weight - base_weight`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DotBlock {
    pub fiber_weight: usize,
    pub base_weight: usize,
    pub level: i64,
    pub degree: i64,
    pub dim: u128,
}

/// How a differential-operator-type algebra was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DotSource {
    /// A genuine Weyl algebra on a dual pair; the blocks are its PBW counts.
    AbelianWeyl,
    /// A dimension-level skeleton extracted from a Lie-algebra cochain
    /// complex with polynomial coefficients, carrying its first-page
    /// differential data.
    CeSkeleton,
}

/// Rank of one block of the first-page differential of a skeleton.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DotDifferentialRow {
    pub from_degree: i64,
    pub from_weight: usize,
    pub to_degree: i64,
    pub to_weight: usize,
    pub rank: usize,
}

/// Bi-filtered algebra of differential-operator type, recorded at the level
/// of block dimensions: fiberwise weight on one axis, anti-diagonal level
/// (fiber weight minus base weight) on the other.
#[derive(Debug, Clone)]
pub struct DOTAlgebra {
    name: String,
    base_degrees: Vec<i64>,
    fiber_degrees: Vec<i64>,
    cap: usize,
    degree_window: Option<(i64, i64)>,
    blocks: Vec<DotBlock>,
    source: DotSource,
    first_page: Vec<DotDifferentialRow>,
    weyl: Option<WeylAlgebra>,
}

impl DOTAlgebra {
    /// Record the block dimensions of a Weyl algebra on a dual pair; the
    /// anti-diagonal filtration of a genuine Weyl algebra is the fiber-order
    /// filtration shifted by base weight, so both associated-graded tables
    /// come from the same PBW basis.
    pub fn from_weyl(w: &WeylAlgebra) -> DOTAlgebra {
        let mut counts: BTreeMap<(usize, usize, i64), u128> = BTreeMap::new();
        for e in w.monomials_up_to(w.cap()) {
            let base: usize = e[..w.base_dim()].iter().map(|&x| x as usize).sum();
            let fiber: usize = e[w.base_dim()..].iter().map(|&x| x as usize).sum();
            let deg = w.expo_degree(&e);
            *counts.entry((fiber, base, deg)).or_insert(0) += 1;
        }
        let blocks = counts
            .into_iter()
            .map(|((fiber, base, degree), dim)| DotBlock {
                fiber_weight: fiber,
                base_weight: base,
                level: fiber as i64 - base as i64,
                degree,
                dim,
            })
            .collect();
        DOTAlgebra {
            name: format!("D({})", w.name()),
            base_degrees: w.base_degrees(),
            fiber_degrees: w.fiber_degrees(),
            cap: w.cap(),
            degree_window: None,
            blocks,
            source: DotSource::AbelianWeyl,
            first_page: Vec::new(),
            weyl: Some(w.clone()),
        }
    }

    /// Assemble a skeleton from externally computed blocks (a cochain
    /// complex read at the dimension level) with its first-page differential
    /// ranks. `degree_window` limits which degrees the blocks cover.
    pub fn from_blocks(
        name: &str,
        base_degrees: Vec<i64>,
        fiber_degrees: Vec<i64>,
        cap: usize,
        degree_window: Option<(i64, i64)>,
        blocks: Vec<DotBlock>,
        first_page: Vec<DotDifferentialRow>,
    ) -> DOTAlgebra {
        DOTAlgebra {
            name: name.to_string(),
            base_degrees,
            fiber_degrees,
            cap,
            degree_window,
            blocks,
            source: DotSource::CeSkeleton,
            first_page,
            weyl: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn source(&self) -> DotSource {
        self.source
    }

    pub fn blocks(&self) -> &[DotBlock] {
        &self.blocks
    }

    pub fn first_page(&self) -> &[DotDifferentialRow] {
        &self.first_page
    }

    /// The underlying Weyl algebra, when the blocks came from one.
    pub fn weyl(&self) -> Option<&WeylAlgebra> {
        self.weyl.as_ref()
    }

    /// Overwrite one block's recorded dimension, for fault-injection tests
    /// and demonstrations of [`dot_check`] localization.
    pub fn corrupt_block(mut self, index: usize, dim: u128) -> DOTAlgebra {
        self.blocks[index].dim = dim;
        self
    }
}

/// One fiberwise row of a [`DotCheckReport`]: a stored block against the
/// functions-on-the-shifted-cotangent-space count.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DotFiberRow {
    pub fiber_weight: usize,
    pub base_weight: usize,
    pub degree: i64,
    pub dim: u128,
    pub expected: u128,
    pub pass: bool,
}

/// One anti-diagonal row of a [`DotCheckReport`]: stored dimensions
/// aggregated per level against the differential-operator count.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DotAntidiagRow {
    pub level: i64,
    pub degree: i64,
    pub dim: u128,
    pub expected: u128,
    pub pass: bool,
}

/// Blockwise verification report for a [`DOTAlgebra`]. Failures are rows
/// with `pass = false`, not errors.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DotCheckReport {
    pub name: String,
    pub cap: usize,
    pub fiber_rows: Vec<DotFiberRow>,
    pub antidiag_rows: Vec<DotAntidiagRow>,
    pub all_pass: bool,
}

/// Recompute both associated-graded dimension tables of a
/// differential-operator-type algebra and compare them blockwise against the
/// stored dimensions.
///
/// The fiberwise expectation is the free graded-commutative count on base
/// and fiber generators (functions on the shifted cotangent space); the
/// anti-diagonal expectation aggregates the same count per level, which is
/// the PBW dimension table of differential operators on the underlying
/// space. Every stored block yields a row; expected blocks that are absent
/// from the stored table yield failing rows with `dim = 0`.
pub fn dot_check(d: &DOTAlgebra) -> DotCheckReport {
    let base_table = free_cga_dimension_table(&d.base_degrees, d.cap);
    let fiber_table = free_cga_dimension_table(&d.fiber_degrees, d.cap);

    // Convolve the two tables into expected (fiber weight, base weight,
    // degree) blocks within the cap and degree window.
    let mut expected: BTreeMap<(usize, usize, i64), u128> = BTreeMap::new();
    for (&(fw, fd), &fc) in &fiber_table {
        for (&(bw, bd), &bc) in &base_table {
            if fw + bw > d.cap || fc == 0 || bc == 0 {
                continue;
            }
            let deg = fd + bd;
            if let Some((lo, hi)) = d.degree_window {
                if deg < lo || deg > hi {
                    continue;
                }
            }
            *expected.entry((fw, bw, deg)).or_insert(0) += fc * bc;
        }
    }

    let mut stored: BTreeMap<(usize, usize, i64), u128> = BTreeMap::new();
    for b in &d.blocks {
        *stored
            .entry((b.fiber_weight, b.base_weight, b.degree))
            .or_insert(0) += b.dim;
    }

    let keys: std::collections::BTreeSet<(usize, usize, i64)> =
        expected.keys().chain(stored.keys()).copied().collect();
    let mut fiber_rows = Vec::new();
    for (fw, bw, deg) in keys {
        let dim = stored.get(&(fw, bw, deg)).copied().unwrap_or(0);
        let exp = expected.get(&(fw, bw, deg)).copied().unwrap_or(0);
        fiber_rows.push(DotFiberRow {
            fiber_weight: fw,
            base_weight: bw,
            degree: deg,
            dim,
            expected: exp,
            pass: dim == exp,
        });
    }

    let mut stored_level: BTreeMap<(i64, i64), u128> = BTreeMap::new();
    for b in &d.blocks {
        *stored_level.entry((b.level, b.degree)).or_insert(0) += b.dim;
    }
    let mut expected_level: BTreeMap<(i64, i64), u128> = BTreeMap::new();
    for (&(fw, bw, deg), &c) in &expected {
        *expected_level
            .entry((fw as i64 - bw as i64, deg))
            .or_insert(0) += c;
    }
    let level_keys: std::collections::BTreeSet<(i64, i64)> = stored_level
        .keys()
        .chain(expected_level.keys())
        .copied()
        .collect();
    let mut antidiag_rows = Vec::new();
    for (level, deg) in level_keys {
        let dim = stored_level.get(&(level, deg)).copied().unwrap_or(0);
        let exp = expected_level.get(&(level, deg)).copied().unwrap_or(0);
        antidiag_rows.push(DotAntidiagRow {
            level,
            degree: deg,
            dim,
            expected: exp,
            pass: dim == exp,
        });
    }

    let all_pass =
        fiber_rows.iter().all(|r| r.pass) && antidiag_rows.iter().all(|r| r.pass);
    DotCheckReport {
        name: d.name.clone(),
        cap: d.cap,
        fiber_rows,
        antidiag_rows,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn base(degrees: &[i64]) -> GradedVectorSpace {
        GradedVectorSpace::integer(
            degrees
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("x{i}"), d))
                .collect(),
        )
    }

    fn expo(w: &WeylAlgebra, pairs: &[(usize, u32)]) -> WeylExpo {
        let mut e = vec![0u32; w.dim()];
        for &(i, k) in pairs {
            e[i] = k;
        }
        e
    }

    #[test]
    fn dual_pair_commutator_is_the_evaluation_pairing() {
        let w = WeylAlgebra::on_dual_pair("poly1", &base(&[0]), 4);
        // [∂, x] = 1 for the even pair.
        let c = w
            .graded_commutator(&w.gen_element(1), &w.gen_element(0))
            .unwrap();
        assert_eq!(c, w.one());
        // x·x is the squared monomial.
        let xx = w.product(&w.gen_element(0), &w.gen_element(0)).unwrap();
        assert_eq!(xx, w.monomial_element(&expo(&w, &[(0, 2)])).unwrap());
    }

    #[test]
    fn second_order_reordering_example() {
        // ∂²·x = x∂² + 2∂.
        let w = WeylAlgebra::on_dual_pair("poly1", &base(&[0]), 4);
        let d2 = w.monomial_element(&expo(&w, &[(1, 2)])).unwrap();
        let x = w.gen_element(0);
        let prod = w.product(&d2, &x).unwrap();
        let mut want = WeylElement::new();
        want.insert(expo(&w, &[(0, 1), (1, 2)]), rint(1));
        want.insert(expo(&w, &[(1, 1)]), rint(2));
        assert_eq!(prod, want);
    }

    #[test]
    fn odd_pair_anticommutes_onto_the_unit() {
        let w = WeylAlgebra::on_dual_pair("odd1", &base(&[1]), 4);
        let theta = w.gen_element(0);
        let dual = w.gen_element(1);
        // θ² = 0 and (∂θ)² = 0.
        assert!(w.product(&theta, &theta).unwrap().is_empty());
        assert!(w.product(&dual, &dual).unwrap().is_empty());
        // For odd generators the graded commutator is the anticommutator.
        let c = w.graded_commutator(&dual, &theta).unwrap();
        assert_eq!(c, w.one());
        // ∂θ·θ = 1 - θ∂θ in normal order.
        let prod = w.product(&dual, &theta).unwrap();
        let mut want = WeylElement::new();
        want.insert(expo(&w, &[]), rint(1));
        want.insert(expo(&w, &[(0, 1), (1, 1)]), rint(-1));
        assert_eq!(prod, want);
    }

    #[test]
    fn cap_overflow_is_an_error_not_a_truncation() {
        let w = WeylAlgebra::on_dual_pair("poly1", &base(&[0]), 2);
        let x2 = w.monomial_element(&expo(&w, &[(0, 2)])).unwrap();
        let x = w.gen_element(0);
        match w.product(&x2, &x) {
            Err(WeylError::CapOverflow { length: 3, cap: 2 }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
        // A product whose normal form stays inside the cap is fine even
        // though the raw word is longer.
        let d = w.gen_element(1);
        let prod = w.product(&d, &x).unwrap();
        assert_eq!(prod.len(), 2);
    }

    #[test]
    fn action_oracle_validates_mixed_parity_products() {
        // Base like a three-sphere compactification: one odd, one even.
        let w = WeylAlgebra::on_dual_pair("s3-like", &base(&[-1, 2]), 5);
        let pairs = w.action_oracle_check(5).unwrap();
        assert!(pairs > 100, "checked only {pairs} pairs");
    }

    #[test]
    fn associativity_on_capped_triples() {
        let w = WeylAlgebra::on_dual_pair("mixed", &base(&[0, 1]), 5);
        let triples = w.associativity_check(5).unwrap();
        assert!(triples > 500, "checked only {triples} triples");
    }

    #[test]
    fn associated_graded_is_free_graded_commutative() {
        let w = WeylAlgebra::on_dual_pair("mixed3", &base(&[-1, 0, 2]), 4);
        w.gr_matches_free_cga().unwrap();
        let pairs = w.leading_term_check().unwrap();
        assert!(pairs > 0);
    }

    #[test]
    fn normal_order_puts_fibers_right_in_serialized_elements() {
        let w = WeylAlgebra::on_dual_pair("poly1", &base(&[0]), 4);
        let d = w.gen_element(1);
        let x = w.gen_element(0);
        let prod = w.product(&d, &x).unwrap();
        let s = w.format_element(&prod);
        assert!(s.contains("x0*∂x0"), "normal order lost in {s}");
    }

    #[test]
    fn heisenberg_one_even_generator_counts_per_level() {
        let v = GradedVectorSpace::integer(vec![("x".into(), 0), ("p".into(), 0)]);
        let mut omega: Matrix<Rational> = Matrix::zeros(2, 2);
        omega.set(0, 1, rint(1));
        omega.set(1, 0, rint(-1));
        let t = heisenberg_enveloping_dims(&v, &omega, 6).unwrap();
        for k in 0..=6usize {
            assert_eq!(t.get(&(k, 0)).copied().unwrap_or(0), k as u128 + 1);
        }
    }

    #[test]
    fn heisenberg_one_odd_generator_has_total_dimension_four() {
        let v = GradedVectorSpace::integer(vec![("θ".into(), 1), ("θ*".into(), -1)]);
        let mut omega: Matrix<Rational> = Matrix::zeros(2, 2);
        // Odd-odd pairing is graded-antisymmetric when symmetric.
        omega.set(0, 1, rint(1));
        omega.set(1, 0, rint(1));
        let t = heisenberg_enveloping_dims(&v, &omega, 5).unwrap();
        let total: u128 = t.values().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn heisenberg_rejects_bad_forms() {
        let v = GradedVectorSpace::integer(vec![("x".into(), 0), ("p".into(), 0)]);
        let omega: Matrix<Rational> = Matrix::zeros(2, 2);
        match heisenberg_enveloping_dims(&v, &omega, 3) {
            Err(WeylError::DegenerateForm { rank: 0, dim: 2 }) => {}
            other => panic!("expected degenerate form, got {other:?}"),
        }
        let mut skewless: Matrix<Rational> = Matrix::zeros(2, 2);
        skewless.set(0, 1, rint(1));
        skewless.set(1, 0, rint(1));
        match heisenberg_enveloping_dims(&v, &skewless, 3) {
            Err(WeylError::NotGradedAntisymmetric { .. }) => {}
            other => panic!("expected antisymmetry failure, got {other:?}"),
        }
    }

    #[test]
    fn heisenberg_torus_level_counts_match_generating_function() {
        // Shifted three-torus cohomology tensor a line: degrees k-1.
        let degrees = [-1i64, 0, 0, 0, 1, 1, 1, 2];
        let mut pairs: Vec<(String, i64)> = Vec::new();
        for (i, &d) in degrees.iter().enumerate() {
            pairs.push((format!("a{i}"), d));
        }
        for (i, &d) in degrees.iter().enumerate() {
            pairs.push((format!("a{i}*"), -d));
        }
        let v = GradedVectorSpace::integer(pairs);
        let n = degrees.len();
        let mut omega: Matrix<Rational> = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega.set(n + i, i, rint(1));
            let sign = if degrees[i].rem_euclid(2) == 1 {
                rint(1)
            } else {
                rint(-1)
            };
            omega.set(i, n + i, sign);
        }
        let t = heisenberg_enveloping_dims(&v, &omega, 3).unwrap();
        let per_level = |l: usize| -> u128 {
            t.iter()
                .filter(|((lev, _), _)| *lev == l)
                .map(|(_, c)| *c)
                .sum()
        };
        assert_eq!(per_level(0), 1);
        assert_eq!(per_level(1), 16);
        // Eight odd and eight even generators in total:
        // C(8,2) + 8·8 + C(9,2) = 28 + 64 + 36.
        assert_eq!(per_level(2), 128);
    }

    #[test]
    fn dot_from_weyl_passes_and_corruption_is_localized() {
        let w = WeylAlgebra::on_dual_pair("s3-like", &base(&[-1, 2]), 4);
        let dot = DOTAlgebra::from_weyl(&w);
        let report = dot_check(&dot);
        assert!(report.all_pass);
        assert!(report.fiber_rows.iter().all(|r| r.pass));

        // Corrupt one block and check exactly its rows fail.
        let victim = dot
            .blocks()
            .iter()
            .position(|b| b.fiber_weight == 1 && b.base_weight == 1)
            .unwrap();
        let bad_block = dot.blocks()[victim].clone();
        let corrupted = dot.corrupt_block(victim, bad_block.dim + 5);
        let report = dot_check(&corrupted);
        assert!(!report.all_pass);
        for row in &report.fiber_rows {
            let is_victim = row.fiber_weight == bad_block.fiber_weight
                && row.base_weight == bad_block.base_weight
                && row.degree == bad_block.degree;
            assert_eq!(row.pass, !is_victim);
        }
        for row in &report.antidiag_rows {
            let is_victim = row.level == bad_block.level && row.degree == bad_block.degree;
            assert_eq!(row.pass, !is_victim);
        }
    }

    #[test]
    fn rational_coefficients_survive_products() {
        let w = WeylAlgebra::on_dual_pair("poly1", &base(&[0]), 4);
        let mut a = WeylElement::new();
        a.insert(expo(&w, &[(1, 1)]), rat(1, 2));
        let mut b = WeylElement::new();
        b.insert(expo(&w, &[(0, 1)]), rat(2, 3));
        let prod = w.product(&a, &b).unwrap();
        assert_eq!(prod.get(&expo(&w, &[])).cloned(), Some(rat(1, 3)));
        assert_eq!(
            prod.get(&expo(&w, &[(0, 1), (1, 1)])).cloned(),
            Some(rat(1, 3))
        );
    }
}
