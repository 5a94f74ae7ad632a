//! A finite polynomial de Rham model: differential forms on affine n-space
//! with polynomial coefficients truncated at a chosen degree, affine vector
//! fields, contraction, Lie derivative, and the Cartan identity check.
//!
//! The model keeps forms as sums of `(monomial, dx-word)` pairs with rational
//! coefficients. The exterior derivative lowers polynomial degree and raises
//! form degree, so polynomial truncation gives a genuine finite subcomplex.
//! Contraction against an affine vector field can raise polynomial degree by
//! one; identities are therefore asserted strictly below the truncation
//! window, where no information has been lost.

use crate::exterior::ExtWord;
use crate::linalg::Matrix;
use crate::scalar::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from the polynomial-form model.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyFormError {
    /// A vector field component is not affine, so applying it repeatedly
    /// escapes every polynomial-degree window.
    #[error("vector field component {component} has a coefficient of polynomial degree {degree}; only affine (degree <= 1) coefficients preserve the truncated model")]
    NotAffine { component: usize, degree: u32 },
    /// A component list of the wrong length was supplied.
    #[error("expected {expected} vector field components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    /// An exponent vector of the wrong length was supplied.
    #[error("monomial exponent vector has length {found}, expected {expected}")]
    ExponentLength { expected: usize, found: usize },
}

/// A polynomial in `n` commuting variables with rational coefficients,
/// stored as exponent-vector terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// The coordinate variable `x_i`.
    pub fn variable(n: usize, i: usize) -> Self {
        assert!(i < n, "variable index {i} out of range for {n} variables");
        let mut exp = vec![0; n];
        exp[i] = 1;
        let mut p = Poly::zero(n);
        p.add_term(exp, Rational::from_integer(1.into()));
        p
    }

    pub fn from_terms(
        n: usize,
        terms: Vec<(Vec<u32>, Rational)>,
    ) -> Result<Self, PolyFormError> {
        let mut p = Poly::zero(n);
        for (exp, c) in terms {
            if exp.len() != n {
                return Err(PolyFormError::ExponentLength {
                    expected: n,
                    found: exp.len(),
                });
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of the highest term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: Rational) {
        assert_eq!(exp.len(), self.n, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(exp.clone())
            .or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        let mut out = Poly::zero(self.n);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = Poly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exp, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        assert!(i < self.n);
        let mut out = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exp = e.clone();
            exp[i] -= 1;
            out.add_term(exp, c.clone() * Rational::from_integer((e[i] as i64).into()));
        }
        out
    }
}

/// A polynomial differential form: sum of `dx`-words with polynomial
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyForm {
    n: usize,
    terms: BTreeMap<ExtWord, Poly>,
}

impl PolyForm {
    pub fn zero(n: usize) -> Self {
        PolyForm {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_part(word: ExtWord, coeff: Poly) -> Self {
        let mut f = PolyForm::zero(coeff.num_vars());
        f.add_part(word, coeff);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = (&ExtWord, &Poly)> {
        self.terms.iter()
    }

    pub fn add_part(&mut self, word: ExtWord, coeff: Poly) {
        assert_eq!(coeff.num_vars(), self.n);
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(word.clone())
            .or_insert_with(|| Poly::zero(self.n));
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &PolyForm) -> PolyForm {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (w, p) in &other.terms {
            out.add_part(w.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyForm) -> PolyForm {
        let minus_one = -Rational::from_integer(1.into());
        let mut out = self.clone();
        for (w, p) in &other.terms {
            out.add_part(w.clone(), p.scale(&minus_one));
        }
        out
    }
}

/// A vector field with affine coefficients:
/// `X = sum_i (c_i + sum_j M_ij x_j) d/dx_i`.
#[derive(Debug, Clone)]
pub struct AffineVectorField {
    n: usize,
    constant: Vec<Rational>,
    linear: Matrix<Rational>,
}

impl AffineVectorField {
    /// Build from explicit constant and linear parts. `linear[i][j]` is the
    /// coefficient of `x_j` in the `d/dx_i` component.
    pub fn new(constant: Vec<Rational>, linear: Matrix<Rational>) -> Result<Self, PolyFormError> {
        let n = constant.len();
        if linear.nrows() != n || linear.ncols() != n {
            return Err(PolyFormError::ComponentCount {
                expected: n,
                found: linear.nrows(),
            });
        }
        Ok(AffineVectorField {
            n,
            constant,
            linear,
        })
    }

    /// Build from polynomial components, rejecting non-affine coefficients:
    /// a quadratic or higher component would push forms out of every
    /// truncated model under repeated application.
    pub fn from_components(components: Vec<Poly>) -> Result<Self, PolyFormError> {
        let n = components.len();
        let mut constant = vec![Rational::zero(); n];
        let mut linear = Matrix::zeros(n, n);
        for (i, p) in components.iter().enumerate() {
            if p.num_vars() != n {
                return Err(PolyFormError::ComponentCount {
                    expected: n,
                    found: p.num_vars(),
                });
            }
            for (exp, c) in p.terms() {
                let total: u32 = exp.iter().sum();
                match total {
                    0 => constant[i] = c.clone(),
                    1 => {
                        let j = exp.iter().position(|&e| e == 1).expect("degree-1 term");
                        linear.set(i, j, c.clone());
                    }
                    d => {
                        return Err(PolyFormError::NotAffine {
                            component: i,
                            degree: d,
                        })
                    }
                }
            }
        }
        Ok(AffineVectorField {
            n,
            constant,
            linear,
        })
    }

    /// The zero vector field.
    pub fn zero(n: usize) -> Self {
        AffineVectorField {
            n,
            constant: vec![Rational::zero(); n],
            linear: Matrix::zeros(n, n),
        }
    }

    /// The translation field `d/dx_i`.
    pub fn translation(n: usize, i: usize) -> Self {
        let mut constant = vec![Rational::zero(); n];
        constant[i] = Rational::from_integer(1.into());
        AffineVectorField {
            n,
            constant,
            linear: Matrix::zeros(n, n),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// The `i`-th component as a polynomial.
    pub fn component(&self, i: usize) -> Poly {
        let mut p = Poly::constant(self.n, self.constant[i].clone());
        for j in 0..self.n {
            let c = self.linear.at(i, j);
            if !c.is_zero() {
                p = p.add(&Poly::variable(self.n, j).scale(c));
            }
        }
        p
    }

    /// Apply the field to a function: `X(f) = sum_i X^i df/dx_i`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for i in 0..self.n {
            out = out.add(&self.component(i).mul(&f.derivative(i)));
        }
        out
    }
}

/// Truncated polynomial de Rham forms on affine `n`-space.
///
/// The block `(p, q)` consists of `p`-forms with homogeneous polynomial
/// coefficients of degree `q`, for `q` up to the truncation degree.
#[derive(Debug, Clone)]
pub struct PolyFormComplex {
    n: usize,
    truncation: u32,
}

/// Outcome of the Cartan identity comparison on one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanBlock {
    pub form_degree: usize,
    pub poly_degree: u32,
    pub dim: usize,
    pub exact: bool,
}

/// Report of the blockwise Cartan identity check.
#[derive(Debug, Clone)]
pub struct CartanReport {
    /// One entry per checked `(form degree, polynomial degree)` block.
    pub blocks: Vec<CartanBlock>,
    /// Whether the identity held exactly on every checked block.
    pub all_exact: bool,
    /// The truncation degree; blocks with polynomial degree equal to it are
    /// excluded because contraction can raise polynomial degree by one.
    pub truncation: u32,
}

impl PolyFormComplex {
    /// Build the model on `n` variables truncated at polynomial degree
    /// `truncation` (the conventional default is 4 on 4 variables).
    pub fn new(n: usize, truncation: u32) -> Self {
        PolyFormComplex { n, truncation }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Monomial exponent vectors of total degree `q`.
    fn monomials(&self, q: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut current = vec![0u32; self.n];
        fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, left: u32) {
            if pos + 1 == current.len() {
                current[pos] = left;
                out.push(current.clone());
                return;
            }
            for take in 0..=left {
                current[pos] = take;
                rec(out, current, pos + 1, left - take);
            }
        }
        if self.n == 0 {
            if q == 0 {
                out.push(Vec::new());
            }
            return out;
        }
        rec(&mut out, &mut current, 0, q);
        out
    }

    /// Strictly increasing index words of length `p`.
    fn words(&self, p: usize) -> Vec<ExtWord> {
        let mut out = Vec::new();
        let mut stack: Vec<u32> = Vec::new();
        fn rec(n: u32, p: usize, start: u32, stack: &mut Vec<u32>, out: &mut Vec<ExtWord>) {
            if stack.len() == p {
                let (w, sign) = ExtWord::canonicalize(stack).expect("strictly increasing");
                debug_assert_eq!(sign, 1);
                out.push(w);
                return;
            }
            for i in start..n {
                stack.push(i);
                rec(n, p, i + 1, stack, out);
                stack.pop();
            }
        }
        rec(self.n as u32, p, 0, &mut stack, &mut out);
        out
    }

    /// Basis of the block `(p, q)` as explicit forms.
    pub fn block_basis(&self, form_degree: usize, poly_degree: u32) -> Vec<PolyForm> {
        let mut out = Vec::new();
        for word in self.words(form_degree) {
            for exp in self.monomials(poly_degree) {
                let mut poly = Poly::zero(self.n);
                poly.add_term(exp.clone(), Rational::from_integer(1.into()));
                out.push(PolyForm::from_part(word.clone(), poly));
            }
        }
        out
    }

    /// Exterior derivative: `d(f dx_S) = sum_i df/dx_i dx_i ^ dx_S`.
    pub fn d(&self, form: &PolyForm) -> PolyForm {
        let mut out = PolyForm::zero(self.n);
        for (word, poly) in form.parts() {
            for i in 0..self.n {
                let df = poly.derivative(i);
                if df.is_zero() {
                    continue;
                }
                if let Some((new_word, sign)) =
                    ExtWord::generator(i as u32).concat(word)
                {
                    let signed = if sign < 0 {
                        df.scale(&-Rational::from_integer(1.into()))
                    } else {
                        df
                    };
                    out.add_part(new_word, signed);
                }
            }
        }
        out
    }

    /// Contraction `iota_X`: replaces each `dx_i` in turn by the component
    /// `X^i`, with the alternating sign of its position.
    pub fn contract(&self, x: &AffineVectorField, form: &PolyForm) -> PolyForm {
        let mut out = PolyForm::zero(self.n);
        for (word, poly) in form.parts() {
            for &i in word.indices() {
                let component = x.component(i as usize);
                if component.is_zero() {
                    continue;
                }
                let (rest, sign) = word.remove(i).expect("index taken from the word");
                let mut coeff = poly.mul(&component);
                if sign < 0 {
                    coeff = coeff.scale(&-Rational::from_integer(1.into()));
                }
                out.add_part(rest, coeff);
            }
        }
        out
    }

    /// Lie derivative, implemented directly (not via the Cartan identity):
    /// `L_X(f dx_S) = X(f) dx_S + f sum_{i in S} dx_S[dx_i := d(X^i)]`.
    pub fn lie_derivative(&self, x: &AffineVectorField, form: &PolyForm) -> PolyForm {
        let mut out = PolyForm::zero(self.n);
        for (word, poly) in form.parts() {
            out.add_part(word.clone(), x.apply(poly));
            for &i in word.indices() {
                // d(X^i) = sum_j (dX^i/dx_j) dx_j, constant coefficients
                // since X is affine.
                let (rest, removal_sign) = word.remove(i).expect("index from word");
                for j in 0..self.n {
                    let c = x.component(i as usize).derivative(j);
                    if c.is_zero() {
                        continue;
                    }
                    let Some((new_word, concat_sign)) =
                        ExtWord::generator(j as u32).concat(&rest)
                    else {
                        continue;
                    };
                    // Moving dx_j into the slot dx_i occupied: the removal
                    // sign cancels against re-insertion at the front up to
                    // the concat sign computed on the remainder.
                    let mut coeff = poly.mul(&c);
                    if removal_sign * concat_sign < 0 {
                        coeff = coeff.scale(&-Rational::from_integer(1.into()));
                    }
                    out.add_part(new_word, coeff);
                }
            }
        }
        out
    }

    /// Verify `[d, iota_X] = L_X` on every block strictly below the
    /// truncation degree. Both sides are assembled independently; agreement
    /// must be exact.
    pub fn cartan_identity_check(
        &self,
        x: &AffineVectorField,
    ) -> Result<CartanReport, PolyFormError> {
        if x.num_vars() != self.n {
            return Err(PolyFormError::ComponentCount {
                expected: self.n,
                found: x.num_vars(),
            });
        }
        let mut blocks = Vec::new();
        let mut all_exact = true;
        for p in 0..=self.n {
            for q in 0..self.truncation {
                let basis = self.block_basis(p, q);
                let mut exact = true;
                for b in &basis {
                    let lhs = self.d(&self.contract(x, b)).add(&self.contract(x, &self.d(b)));
                    let rhs = self.lie_derivative(x, b);
                    if !lhs.sub(&rhs).is_zero() {
                        exact = false;
                    }
                }
                all_exact &= exact;
                blocks.push(CartanBlock {
                    form_degree: p,
                    poly_degree: q,
                    dim: basis.len(),
                    exact,
                });
            }
        }
        Ok(CartanReport {
            blocks,
            all_exact,
            truncation: self.truncation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rint;

    fn rotation(n: usize) -> AffineVectorField {
        // x1 d/dx2 - x2 d/dx1.
        let mut components = vec![Poly::zero(n); n];
        components[1] = Poly::variable(n, 0);
        components[0] = Poly::variable(n, 1).scale(&rint(-1));
        AffineVectorField::from_components(components).unwrap()
    }

    #[test]
    fn d_squares_to_zero() {
        let cx = PolyFormComplex::new(3, 4);
        for p in 0..=3 {
            for q in 1..4 {
                for b in cx.block_basis(p, q) {
                    assert!(cx.d(&cx.d(&b)).is_zero());
                }
            }
        }
    }

    #[test]
    fn contraction_squares_to_zero() {
        let cx = PolyFormComplex::new(3, 3);
        let x = rotation(3);
        for p in 0..=3 {
            for q in 0..2 {
                for b in cx.block_basis(p, q) {
                    assert!(cx.contract(&x, &cx.contract(&x, &b)).is_zero());
                }
            }
        }
    }

    #[test]
    fn cartan_for_translation() {
        let cx = PolyFormComplex::new(3, 3);
        let x = AffineVectorField::translation(3, 0);
        let report = cx.cartan_identity_check(&x).unwrap();
        assert!(report.all_exact);
    }

    #[test]
    fn cartan_for_rotation() {
        let cx = PolyFormComplex::new(3, 3);
        let report = cx.cartan_identity_check(&rotation(3)).unwrap();
        assert!(report.all_exact);
    }

    #[test]
    fn cartan_for_zero_field() {
        let cx = PolyFormComplex::new(2, 2);
        let report = cx
            .cartan_identity_check(&AffineVectorField::zero(2))
            .unwrap();
        assert!(report.all_exact);
    }

    #[test]
    fn quadratic_fields_rejected() {
        let n = 2;
        let quad = Poly::variable(n, 0).mul(&Poly::variable(n, 0));
        let err = AffineVectorField::from_components(vec![quad, Poly::zero(n)]).unwrap_err();
        assert!(matches!(err, PolyFormError::NotAffine { component: 0, degree: 2 }));
    }

    #[test]
    fn lie_derivative_is_a_derivation_on_functions() {
        // L_X(fg) = X(f)g + fX(g) for functions.
        let x = rotation(2);
        let f = Poly::variable(2, 0);
        let g = Poly::variable(2, 1);
        let lhs = x.apply(&f.mul(&g));
        let rhs = x.apply(&f).mul(&g).add(&f.mul(&x.apply(&g)));
        assert_eq!(lhs, rhs);
    }
}
