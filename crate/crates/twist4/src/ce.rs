//! Chevalley–Eilenberg cochain complexes of finite-dimensional dg Lie
//! algebras, with coefficient modules, weight caps, and the
//! augmentation-ideal filtration.
//!
//! The cochain algebra is the free graded-commutative algebra on shifted
//! dual generators (degree `1 - |e|` per algebra basis element `e`), tensored
//! with the chosen coefficients. Completed symmetric algebras are handled
//! weight-by-weight under a cap, and every reported cohomology number
//! carries an explicit exact-or-truncated flag computed from what the caps
//! can and cannot see.
//!
//! Sign conventions (fixed once, checked by the square-zero guard on every
//! build): for generators `x^a` dual to `e_a`,
//! `d x^a = -Σ_b D_{ab} x^b - ½ Σ_{b,c} (-1)^{|e_b|} B^a_{bc} x^b x^c`,
//! where `D` is the matrix of the algebra differential and `B` the bracket
//! structure constants; coefficient generators differentiate by the module
//! differential plus `Σ_i (-1)^{|e_i|} x^i (e_i · m)`.

use crate::dglie::{DgLieAlgebra, DgLieError, SparseVec};
use crate::graded::GradedVectorSpace;
use crate::linalg::{LinalgError, Matrix};
use crate::scalar::{rat, rint, Rational};
use crate::spectral::{FilteredComplex, SpectralError};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from CE construction.
#[derive(Debug, Error, PartialEq)]
pub enum CeError {
    #[error("degree window ({lo}, {hi}) is inverted")]
    WindowInverted { lo: i64, hi: i64 },
    #[error("caps admit no cochains: degree window ({lo}, {hi}), max weight {max_weight}")]
    EmptyWindow {
        lo: i64,
        hi: i64,
        max_weight: usize,
    },
    #[error("differential does not square to zero on generator monomial {monomial:?}; the coefficient module is inconsistent")]
    SquareNonzero { monomial: String },
    #[error("module shape mismatch: {context}")]
    ModuleShape { context: String },
    #[error("the windowed total complex is inconsistent ({context}); widen the caps so no differential image is chopped")]
    TruncatedTotalComplex { context: String },
    #[error(transparent)]
    DgLie(#[from] DgLieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A finite-dimensional dg module over a dg Lie algebra, given by action
/// and differential structure constants over a graded basis.
///
/// The semantic guard is [`semidirect_abelian`]: adjoining the module as an
/// abelian ideal must produce an algebra passing the full axiom suite.
#[derive(Debug, Clone)]
pub struct LModule {
    name: String,
    space: GradedVectorSpace,
    /// `action[i][j]` = `e_i · m_j` over the module basis.
    action: Vec<Vec<SparseVec>>,
    d: Vec<SparseVec>,
}

impl LModule {
    pub fn from_parts(
        name: String,
        space: GradedVectorSpace,
        action: Vec<Vec<SparseVec>>,
        d: Vec<SparseVec>,
        algebra_dim: usize,
    ) -> Result<Self, CeError> {
        let m = space.dim();
        if action.len() != algebra_dim || action.iter().any(|row| row.len() != m) || d.len() != m {
            return Err(CeError::ModuleShape {
                context: format!(
                    "module {name}: expected {algebra_dim} action rows over {m} module columns"
                ),
            });
        }
        Ok(LModule {
            name,
            space,
            action,
            d,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &GradedVectorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn action_of(&self, i: usize, j: usize) -> &SparseVec {
        &self.action[i][j]
    }

    pub fn d_of(&self, j: usize) -> &SparseVec {
        &self.d[j]
    }
}

/// The one-dimensional trivial module in degree 0.
pub fn trivial_module(l: &DgLieAlgebra) -> LModule {
    LModule {
        name: "trivial".to_string(),
        space: GradedVectorSpace::integer(vec![("1".to_string(), 0)]),
        action: vec![vec![Vec::new()]; l.dim()],
        d: vec![Vec::new()],
    }
}

/// The adjoint module with all degrees shifted by `shift`.
pub fn adjoint_module(l: &DgLieAlgebra, shift: i64) -> LModule {
    let n = l.dim();
    let basis: Vec<(String, i64)> = (0..n)
        .map(|i| {
            (
                format!("ad[{}]", l.space().label(i)),
                l.space().degree(i) + shift,
            )
        })
        .collect();
    let action: Vec<Vec<SparseVec>> = (0..n)
        .map(|i| (0..n).map(|j| l.bracket_of(i, j).clone()).collect())
        .collect();
    let d: Vec<SparseVec> = (0..n).map(|j| l.d_of(j).clone()).collect();
    LModule {
        name: format!("adjoint[{shift:+}]"),
        space: GradedVectorSpace::integer(basis),
        action,
        d,
    }
}

/// The coadjoint module `L*` with degrees `-|e| + shift`:
/// `(x · φ)(y) = -(-1)^{|x||φ|} φ([x, y])` and
/// `(d φ)(y) = -(-1)^{|φ|} φ(d y)`.
pub fn coadjoint_module(l: &DgLieAlgebra, shift: i64) -> LModule {
    let n = l.dim();
    let degree = |j: usize| -l.space().degree(j) + shift;
    let basis: Vec<(String, i64)> = (0..n)
        .map(|j| (format!("co[{}]", l.space().label(j)), degree(j)))
        .collect();
    let mut action: Vec<Vec<SparseVec>> = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // e_i · e_j^*  =  Σ_k  -(-1)^{|e_i| |e_j^*|} B^j_{ik}  e_k^*.
            let sign = if (l.space().degree(i) * degree(j)).rem_euclid(2) == 1 {
                rint(1)
            } else {
                rint(-1)
            };
            let mut entries: SparseVec = Vec::new();
            for k in 0..n {
                for (row, c) in l.bracket_of(i, k) {
                    if *row == j {
                        entries.push((k, sign.clone() * c.clone()));
                    }
                }
            }
            entries.sort_by_key(|(k, _)| *k);
            action[i][j] = entries;
        }
    }
    let mut d: Vec<SparseVec> = vec![Vec::new(); n];
    for j in 0..n {
        let sign = if degree(j).rem_euclid(2) == 1 {
            rint(1)
        } else {
            rint(-1)
        };
        let mut entries: SparseVec = Vec::new();
        for k in 0..n {
            for (row, c) in l.d_of(k) {
                if *row == j {
                    entries.push((k, sign.clone() * c.clone()));
                }
            }
        }
        entries.sort_by_key(|(k, _)| *k);
        d[j] = entries;
    }
    LModule {
        name: format!("coadjoint[{shift:+}]"),
        space: GradedVectorSpace::integer(basis),
        action,
        d,
    }
}

/// Adjoin a module as an abelian ideal: the result is an honest dg Lie
/// algebra exactly when the module data satisfies the dg-module axioms, so
/// running the axiom suite on the output is the module guard.
pub fn semidirect_abelian(l: &DgLieAlgebra, m: &LModule) -> Result<DgLieAlgebra, CeError> {
    let n = l.dim();
    let mm = m.dim();
    if m.action.len() != n {
        return Err(CeError::ModuleShape {
            context: format!(
                "module {} declares {} action rows, algebra {} has dimension {n}",
                m.name(),
                m.action.len(),
                l.name()
            ),
        });
    }
    let total = n + mm;
    let mut basis: Vec<(String, i64)> = Vec::with_capacity(total);
    for i in 0..n {
        basis.push((l.space().label(i).to_string(), l.space().degree(i)));
    }
    for j in 0..mm {
        basis.push((m.space().label(j).to_string(), m.space().degree(j)));
    }
    let mut d: Vec<SparseVec> = Vec::with_capacity(total);
    for i in 0..n {
        d.push(l.d_of(i).clone());
    }
    for j in 0..mm {
        d.push(m.d_of(j).iter().map(|(k, c)| (k + n, c.clone())).collect());
    }
    let mut bracket: Vec<Vec<SparseVec>> = vec![vec![Vec::new(); total]; total];
    for i in 0..n {
        for j in 0..n {
            bracket[i][j] = l.bracket_of(i, j).clone();
        }
    }
    for i in 0..n {
        for j in 0..mm {
            let act: SparseVec = m
                .action_of(i, j)
                .iter()
                .map(|(k, c)| (k + n, c.clone()))
                .collect();
            let sign = if (l.space().degree(i) * m.space().degree(j)).rem_euclid(2) == 1 {
                rint(1)
            } else {
                rint(-1)
            };
            bracket[n + j][i] = act.iter().map(|(k, c)| (*k, sign.clone() * c.clone())).collect();
            bracket[i][n + j] = act;
        }
    }
    let space = GradedVectorSpace::integer(basis);
    Ok(DgLieAlgebra::from_parts(
        format!("{}⋉{}", l.name(), m.name()),
        space,
        d,
        bracket,
        None,
        None,
    )?)
}

/// Coefficient choices for CE cochains.
#[derive(Debug, Clone)]
pub enum CoeffSpec {
    /// The one-dimensional trivial module.
    Trivial,
    /// The coadjoint module (linear coefficients), degrees `-|e| + shift`.
    Coadjoint { shift: i64 },
    /// The full symmetric algebra on a declared module, truncated by the
    /// overall weight cap.
    SymModule { module: LModule },
}

impl CoeffSpec {
    fn describe(&self) -> String {
        match self {
            CoeffSpec::Trivial => "trivial".to_string(),
            CoeffSpec::Coadjoint { shift } => format!("coadjoint[{shift:+}]"),
            CoeffSpec::SymModule { module } => format!("Sym({})", module.name()),
        }
    }
}

/// Exponent vector over the generator list.
type Expo = Vec<u32>;
/// Formal rational combination of monomials.
type SparseMono = BTreeMap<Expo, Rational>;

#[derive(Debug, Clone)]
struct CeGen {
    label: String,
    degree: i64,
    /// Whether this generator is a coefficient-module factor (counted by
    /// the module weight) rather than a dual of the algebra.
    is_module: bool,
}

/// A built CE complex: monomial blocks keyed by (degree, total weight) with
/// the differential split into its weight-preserving and weight-raising
/// halves.
#[derive(Debug, Clone)]
pub struct CeComplex {
    algebra_name: String,
    coeff_desc: String,
    gens: Vec<CeGen>,
    max_weight: usize,
    degree_window: (i64, i64),
    blocks: BTreeMap<(i64, usize), Vec<Expo>>,
    gen_images: Vec<SparseMono>,
    /// d0: (deg, w) → (deg+1, w).
    d0: BTreeMap<(i64, usize), Matrix<Rational>>,
    /// d1: (deg, w) → (deg+1, w+1).
    d1: BTreeMap<(i64, usize), Matrix<Rational>>,
}

impl CeComplex {
    pub fn algebra_name(&self) -> &str {
        &self.algebra_name
    }

    pub fn coefficients(&self) -> &str {
        &self.coeff_desc
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn degree_window(&self) -> (i64, i64) {
        self.degree_window
    }

    /// Block dimensions as (degree, weight, dim) rows.
    pub fn block_dims(&self) -> Vec<(i64, usize, usize)> {
        self.blocks
            .iter()
            .map(|((d, w), m)| (*d, *w, m.len()))
            .collect()
    }

    /// Number of module factors in each monomial of a block, in basis order.
    ///
    /// Since every generator contributes one unit of weight, the remaining
    /// `weight - module_count` units sit on algebra-dual generators. Returns
    /// `None` for an absent block.
    pub fn monomial_module_counts(&self, degree: i64, weight: usize) -> Option<Vec<usize>> {
        self.blocks
            .get(&(degree, weight))
            .map(|monos| monos.iter().map(|e| self.module_count(e)).collect())
    }

    pub fn d0_block(&self, degree: i64, weight: usize) -> Option<&Matrix<Rational>> {
        self.d0.get(&(degree, weight))
    }

    pub fn d1_block(&self, degree: i64, weight: usize) -> Option<&Matrix<Rational>> {
        self.d1.get(&(degree, weight))
    }

    fn module_count(&self, e: &Expo) -> usize {
        e.iter()
            .zip(&self.gens)
            .filter(|(_, g)| g.is_module)
            .map(|(x, _)| *x as usize)
            .sum()
    }

    fn monomial_label(&self, e: &Expo) -> String {
        let parts: Vec<String> = e
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
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

fn gen_is_odd(degree: i64) -> bool {
    degree.rem_euclid(2) == 1
}

fn monomial_degree(gens: &[CeGen], e: &Expo) -> i64 {
    e.iter()
        .zip(gens)
        .map(|(x, g)| (*x as i64) * g.degree)
        .sum()
}

/// Product of two monomials in the free graded-commutative algebra:
/// `None` when an odd generator repeats, else the Koszul sign and the
/// combined exponents.
fn mul_monomials(gens: &[CeGen], a: &Expo, b: &Expo) -> Option<(Rational, Expo)> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let s = a[i] + b[i];
        if gen_is_odd(gens[i].degree) && s > 1 {
            return None;
        }
        out.push(s);
    }
    let mut swaps: u32 = 0;
    for i in 0..a.len() {
        if gen_is_odd(gens[i].degree) && b[i] == 1 {
            for j in i + 1..a.len() {
                if gen_is_odd(gens[j].degree) && a[j] == 1 {
                    swaps += 1;
                }
            }
        }
    }
    Some((if swaps % 2 == 1 { rint(-1) } else { rint(1) }, out))
}

/// Apply the odd derivation with the given generator images to a monomial.
fn apply_derivation(gens: &[CeGen], images: &[SparseMono], mono: &Expo) -> SparseMono {
    let mut out: SparseMono = BTreeMap::new();
    for t in 0..gens.len() {
        let k = mono[t];
        if k == 0 || images[t].is_empty() {
            continue;
        }
        // Sign from moving the odd derivation past the factors before t.
        let prefix_degree: i64 = (0..t).map(|s| (mono[s] as i64) * gens[s].degree).sum();
        let prefix_sign = if prefix_degree.rem_euclid(2) == 1 {
            rint(-1)
        } else {
            rint(1)
        };
        let mut left = mono.clone();
        left[t] -= 1;
        let mut right = vec![0u32; gens.len()];
        for s in t + 1..gens.len() {
            right[s] = left[s];
            left[s] = 0;
        }
        for (img, c) in &images[t] {
            let Some((s1, first)) = mul_monomials(gens, &left, img) else {
                continue;
            };
            let Some((s2, full)) = mul_monomials(gens, &first, &right) else {
                continue;
            };
            let coeff = prefix_sign.clone() * rint(k as i64) * c.clone() * s1 * s2;
            let entry = out.entry(full).or_insert_with(Rational::zero);
            *entry += coeff;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Enumerate exponent vectors of total weight `w` (odd generators capped at
/// exponent 1).
fn monomials_of_weight(gens: &[CeGen], w: usize) -> Vec<Expo> {
    let mut out = Vec::new();
    let mut current = vec![0u32; gens.len()];
    fn rec(gens: &[CeGen], pos: usize, remaining: usize, current: &mut Expo, out: &mut Vec<Expo>) {
        if pos == gens.len() {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        let cap = if gen_is_odd(gens[pos].degree) {
            remaining.min(1)
        } else {
            remaining
        };
        for e in 0..=cap {
            current[pos] = e as u32;
            rec(gens, pos + 1, remaining - e, current, out);
        }
        current[pos] = 0;
    }
    rec(gens, 0, w, &mut current, &mut out);
    out
}

/// Build the CE complex of `l` with the given coefficients, weight cap, and
/// degree window. The differential is verified to square to zero exactly,
/// as a formal identity on every in-window monomial (no truncation in the
/// check itself).
pub fn build_ce(
    l: &DgLieAlgebra,
    coeffs: &CoeffSpec,
    max_weight: usize,
    degree_window: (i64, i64),
) -> Result<CeComplex, CeError> {
    let (lo, hi) = degree_window;
    if lo > hi {
        return Err(CeError::WindowInverted { lo, hi });
    }
    let n = l.dim();

    // Generator list: duals of the algebra, then coefficient generators.
    let mut gens: Vec<CeGen> = (0..n)
        .map(|i| CeGen {
            label: format!("x<{}>", l.space().label(i)),
            degree: 1 - l.space().degree(i),
            is_module: false,
        })
        .collect();
    let module: Option<LModule> = match coeffs {
        CoeffSpec::Trivial => None,
        CoeffSpec::Coadjoint { shift } => Some(coadjoint_module(l, *shift)),
        CoeffSpec::SymModule { module } => {
            if module.action.len() != n {
                return Err(CeError::ModuleShape {
                    context: format!(
                        "module {} declares {} action rows, algebra {} has dimension {n}",
                        module.name(),
                        module.action.len(),
                        l.name()
                    ),
                });
            }
            Some(module.clone())
        }
    };
    let linear_coefficients = matches!(coeffs, CoeffSpec::Coadjoint { .. });
    if let Some(m) = &module {
        for j in 0..m.dim() {
            gens.push(CeGen {
                label: format!("y<{}>", m.space().label(j)),
                degree: m.space().degree(j),
                is_module: true,
            });
        }
    }

    // Generator images of the differential.
    let mut images: Vec<SparseMono> = vec![BTreeMap::new(); gens.len()];
    let unit_expo = |g: usize| -> Expo {
        let mut e = vec![0u32; gens.len()];
        e[g] = 1;
        e
    };
    for a in 0..n {
        let mut img: SparseMono = BTreeMap::new();
        // Linear part: -Σ_b D_{ab} x^b.
        for b in 0..n {
            for (row, c) in l.d_of(b) {
                if *row == a {
                    let e = unit_expo(b);
                    let entry = img.entry(e).or_insert_with(Rational::zero);
                    *entry -= c.clone();
                }
            }
        }
        // Quadratic part: -½ Σ_{b,c} (-1)^{|e_b|} B^a_{bc} x^b x^c.
        for b in 0..n {
            let sign = if l.space().degree(b).rem_euclid(2) == 1 {
                rint(-1)
            } else {
                rint(1)
            };
            for c_idx in 0..n {
                for (row, coeff) in l.bracket_of(b, c_idx) {
                    if *row != a {
                        continue;
                    }
                    if let Some((s, e)) =
                        mul_monomials(&gens, &unit_expo(b), &unit_expo(c_idx))
                    {
                        let entry = img.entry(e).or_insert_with(Rational::zero);
                        *entry += rat(-1, 2) * sign.clone() * coeff.clone() * s;
                    }
                }
            }
        }
        img.retain(|_, v| !v.is_zero());
        images[a] = img;
    }
    if let Some(m) = &module {
        for j in 0..m.dim() {
            let gj = n + j;
            let mut img: SparseMono = BTreeMap::new();
            // Module differential. The minus sign is forced by the
            // square-zero guard given the linear part -D of the generator
            // differential above.
            for (k, c) in m.d_of(j) {
                let e = unit_expo(n + *k);
                let entry = img.entry(e).or_insert_with(Rational::zero);
                *entry -= c.clone();
            }
            // Action part: Σ_i (-1)^{|e_i|} x^i (e_i · m_j).
            for i in 0..n {
                let sign = if l.space().degree(i).rem_euclid(2) == 1 {
                    rint(-1)
                } else {
                    rint(1)
                };
                for (k, c) in m.action_of(i, j) {
                    if let Some((s, e)) =
                        mul_monomials(&gens, &unit_expo(i), &unit_expo(n + *k))
                    {
                        let entry = img.entry(e).or_insert_with(Rational::zero);
                        *entry += sign.clone() * c.clone() * s;
                    }
                }
            }
            img.retain(|_, v| !v.is_zero());
            images[gj] = img;
        }
    }

    // Enumerate in-window monomials.
    let mut blocks: BTreeMap<(i64, usize), Vec<Expo>> = BTreeMap::new();
    for w in 0..=max_weight {
        for e in monomials_of_weight(&gens, w) {
            let m_count: usize = e
                .iter()
                .zip(&gens)
                .filter(|(_, g)| g.is_module)
                .map(|(x, _)| *x as usize)
                .sum();
            if linear_coefficients && m_count != 1 {
                continue;
            }
            let d = monomial_degree(&gens, &e);
            if d < lo || d > hi {
                continue;
            }
            blocks.entry((d, w)).or_default().push(e);
        }
    }
    if blocks.is_empty() {
        return Err(CeError::EmptyWindow { lo, hi, max_weight });
    }
    let index: BTreeMap<Expo, (i64, usize, usize)> = blocks
        .iter()
        .flat_map(|((d, w), monos)| {
            monos
                .iter()
                .enumerate()
                .map(move |(pos, e)| (e.clone(), (*d, *w, pos)))
        })
        .collect();

    let complex = CeComplex {
        algebra_name: l.name().to_string(),
        coeff_desc: coeffs.describe(),
        gens: gens.clone(),
        max_weight,
        degree_window,
        blocks: blocks.clone(),
        gen_images: images.clone(),
        d0: BTreeMap::new(),
        d1: BTreeMap::new(),
    };

    // Square-zero guard: exact formal identity on every in-window monomial.
    for monos in blocks.values() {
        for e in monos {
            let de = apply_derivation(&gens, &images, e);
            let mut dde: SparseMono = BTreeMap::new();
            for (m1, c1) in &de {
                for (m2, c2) in apply_derivation(&gens, &images, m1) {
                    let entry = dde.entry(m2).or_insert_with(Rational::zero);
                    *entry += c1.clone() * c2;
                }
            }
            dde.retain(|_, v| !v.is_zero());
            if !dde.is_empty() {
                return Err(CeError::SquareNonzero {
                    monomial: complex.monomial_label(e),
                });
            }
        }
    }

    // Assemble the split block matrices.
    let mut d0: BTreeMap<(i64, usize), Matrix<Rational>> = BTreeMap::new();
    let mut d1: BTreeMap<(i64, usize), Matrix<Rational>> = BTreeMap::new();
    for ((deg, w), monos) in &blocks {
        let t0 = blocks.get(&(deg + 1, *w)).map_or(0, Vec::len);
        let t1 = blocks.get(&(deg + 1, w + 1)).map_or(0, Vec::len);
        let mut m0: Matrix<Rational> = Matrix::zeros(t0, monos.len());
        let mut m1: Matrix<Rational> = Matrix::zeros(t1, monos.len());
        for (col, e) in monos.iter().enumerate() {
            for (target, c) in apply_derivation(&gens, &images, e) {
                let tw: usize = target.iter().map(|x| *x as usize).sum();
                if let Some(&(td, tiw, pos)) = index.get(&target) {
                    debug_assert_eq!(td, deg + 1);
                    if tiw == *w {
                        let cur = m0.at(pos, col).clone();
                        m0.set(pos, col, cur + c);
                    } else if tiw == w + 1 {
                        let cur = m1.at(pos, col).clone();
                        m1.set(pos, col, cur + c);
                    }
                } else {
                    // Target escapes the caps; the truncation flags report
                    // this honestly.
                    debug_assert!(
                        tw > max_weight
                            || monomial_degree(&gens, &target) > hi
                            || monomial_degree(&gens, &target) < lo
                    );
                }
            }
        }
        d0.insert((*deg, *w), m0);
        d1.insert((*deg, *w), m1);
    }

    Ok(CeComplex { d0, d1, ..complex })
}

/// One cohomology row: a degree and coefficient weight with its dimension
/// and whether the caps make the number exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CeCohomologyRow {
    pub degree: i64,
    /// Number of coefficient-module factors (0 for trivial coefficients).
    pub module_weight: usize,
    pub dim: usize,
    pub truncated: bool,
}

/// Cohomology of the CE complex, split by coefficient weight (which the
/// differential preserves), with per-row truncation flags.
pub fn ce_cohomology(c: &CeComplex) -> Result<Vec<CeCohomologyRow>, CeError> {
    // Split monomials by module weight.
    let mut slices: BTreeMap<usize, BTreeMap<i64, Vec<Expo>>> = BTreeMap::new();
    for ((deg, _), monos) in &c.blocks {
        for e in monos {
            slices
                .entry(c.module_count(e))
                .or_default()
                .entry(*deg)
                .or_default()
                .push(e.clone());
        }
    }
    let mut rows = Vec::new();
    for (m_weight, per_degree) in &slices {
        let degrees: Vec<i64> = per_degree.keys().copied().collect();
        // Index within the slice.
        let mut slice_index: BTreeMap<&Expo, usize> = BTreeMap::new();
        for monos in per_degree.values() {
            for e in monos {
                let next = slice_index.len();
                slice_index.insert(e, next);
            }
        }
        let mut rank_out: BTreeMap<i64, usize> = BTreeMap::new();
        for (&deg, monos) in per_degree {
            let target = per_degree.get(&(deg + 1));
            let t_len = target.map_or(0, Vec::len);
            let mut m: Matrix<Rational> = Matrix::zeros(t_len, monos.len());
            if let Some(target) = target {
                let pos_of: BTreeMap<&Expo, usize> = target
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (e, i))
                    .collect();
                for (col, e) in monos.iter().enumerate() {
                    for (img, coeff) in apply_derivation(&c.gens, &c.gen_images, e) {
                        if let Some(&row) = pos_of.get(&img) {
                            let cur = m.at(row, col).clone();
                            m.set(row, col, cur + coeff);
                        }
                    }
                }
            }
            rank_out.insert(deg, m.rank());
        }
        for &deg in &degrees {
            let dim = per_degree[&deg].len();
            let out = rank_out.get(&deg).copied().unwrap_or(0);
            let inc = rank_out.get(&(deg - 1)).copied().unwrap_or(0);
            let h = dim.saturating_sub(out + inc);
            rows.push(CeCohomologyRow {
                degree: deg,
                module_weight: *m_weight,
                dim: h,
                truncated: !slice_is_complete(c, *m_weight, deg),
            });
        }
    }
    Ok(rows)
}

/// Whether the caps see every monomial of the given coefficient-weight
/// slice in degrees `D-1 ..= D+1`, so the cohomology at `D` is exact.
fn slice_is_complete(c: &CeComplex, m_weight: usize, degree: i64) -> bool {
    for e_deg in degree - 1..=degree + 1 {
        match max_weight_at_degree(c, m_weight, e_deg) {
            Reach::None => {}
            Reach::Bounded(w) => {
                let (lo, hi) = c.degree_window;
                if e_deg < lo || e_deg > hi || w > c.max_weight {
                    return false;
                }
            }
            Reach::Unbounded => return false,
        }
    }
    true
}

enum Reach {
    /// No monomial of the slice exists in this degree.
    None,
    /// Monomials exist; the largest total weight among them.
    Bounded(usize),
    /// Monomials of unbounded weight exist in this degree.
    Unbounded,
}

/// Exact reachability analysis: the maximum total weight of a monomial of
/// the given coefficient weight in the given degree, ignoring the caps.
fn max_weight_at_degree(c: &CeComplex, m_weight: usize, degree: i64) -> Reach {
    // Enumerate coefficient-part exponent vectors of the fixed count.
    let module_gens: Vec<usize> = (0..c.gens.len()).filter(|&i| c.gens[i].is_module).collect();
    let algebra_gens: Vec<usize> = (0..c.gens.len())
        .filter(|&i| !c.gens[i].is_module)
        .collect();
    let mut module_degrees: Vec<i64> = Vec::new();
    {
        // Compositions of m_weight over the module generators (odd capped).
        let mut stack: Vec<(usize, usize, i64)> = vec![(0, m_weight, 0)];
        while let Some((pos, remaining, deg)) = stack.pop() {
            if pos == module_gens.len() {
                if remaining == 0 {
                    module_degrees.push(deg);
                }
                continue;
            }
            let g = &c.gens[module_gens[pos]];
            let cap = if gen_is_odd(g.degree) {
                remaining.min(1)
            } else {
                remaining
            };
            for e in 0..=cap {
                stack.push((pos + 1, remaining - e, deg + (e as i64) * g.degree));
            }
        }
        module_degrees.sort_unstable();
        module_degrees.dedup();
    }
    if module_degrees.is_empty() {
        return Reach::None;
    }

    // Unlimited (even) algebra generators admitting a zero-sum combination
    // make weights unbounded wherever anything is realizable.
    let unlimited: Vec<i64> = algebra_gens
        .iter()
        .map(|&i| c.gens[i].degree)
        .filter(|d| !gen_is_odd(*d))
        .collect();
    let has_zero_combo = unlimited.contains(&0)
        || (unlimited.iter().any(|d| *d > 0) && unlimited.iter().any(|d| *d < 0));

    // DP for the algebra part: degree → max weight.
    let odd_neg_total: i64 = algebra_gens
        .iter()
        .map(|&i| c.gens[i].degree)
        .filter(|d| gen_is_odd(*d) && *d < 0)
        .sum();
    let odd_pos_total: i64 = algebra_gens
        .iter()
        .map(|&i| c.gens[i].degree)
        .filter(|d| gen_is_odd(*d) && *d > 0)
        .sum();
    let module_min = *module_degrees.first().unwrap();
    let hi_target = degree - module_min;
    let lo_bound = odd_neg_total.min(0) - 1;
    let hi_bound = hi_target.max(0) + odd_pos_total.max(0) + 1;
    if lo_bound > hi_bound {
        return Reach::None;
    }
    let mut dp: BTreeMap<i64, usize> = BTreeMap::new();
    dp.insert(0, 0);
    for &i in &algebra_gens {
        let d = c.gens[i].degree;
        if gen_is_odd(d) {
            let snapshot: Vec<(i64, usize)> = dp.iter().map(|(k, v)| (*k, *v)).collect();
            for (deg0, w0) in snapshot {
                let nd = deg0 + d;
                if nd < lo_bound || nd > hi_bound {
                    continue;
                }
                let entry = dp.entry(nd).or_insert(0);
                *entry = (*entry).max(w0 + 1);
            }
        } else if d >= 1 {
            // Unbounded copies, ascending sweep.
            let keys: Vec<i64> = dp.keys().copied().collect();
            let mut frontier = keys;
            while let Some(deg0) = frontier.pop() {
                let w0 = dp[&deg0];
                let nd = deg0 + d;
                if nd > hi_bound {
                    continue;
                }
                let entry = dp.entry(nd).or_insert(0);
                if w0 + 1 > *entry {
                    *entry = w0 + 1;
                    frontier.push(nd);
                }
            }
        }
        // Even nonpositive degrees are handled by the zero-combination
        // analysis above; a lone negative even generator with no positive
        // partner can only lower degrees, which the window DP below treats
        // via the unbounded flag conservatively.
    }
    let has_neg_even = unlimited.iter().any(|d| *d < 0);
    let mut best: Option<usize> = None;
    for &md in &module_degrees {
        let target = degree - md;
        if let Some(&w) = dp.get(&target) {
            best = Some(best.map_or(w + m_weight, |b: usize| b.max(w + m_weight)));
        }
    }
    match best {
        None if has_neg_even => Reach::Unbounded,
        None => Reach::None,
        Some(_) if has_zero_combo || has_neg_even => Reach::Unbounded,
        Some(w) => Reach::Bounded(w),
    }
}

/// The decreasing filtration by total Sym-weight, handed off to the
/// spectral-sequence engine. Requires the windowed total complex to be an
/// honest complex (no chopped differentials), which holds whenever the caps
/// are wide enough for the cohomology flags to read "exact".
pub fn augmentation_filtration(c: &CeComplex) -> Result<FilteredComplex, CeError> {
    let degrees: Vec<i64> = {
        let mut d: Vec<i64> = c.blocks.keys().map(|(deg, _)| *deg).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    let lo = *degrees.first().expect("nonempty by construction");
    let hi = *degrees.last().unwrap();
    // Per-degree monomial lists with (weight) annotations, in block order.
    let mut per_degree: BTreeMap<i64, Vec<(Expo, usize)>> = BTreeMap::new();
    for ((deg, w), monos) in &c.blocks {
        let entry = per_degree.entry(*deg).or_default();
        for e in monos {
            entry.push((e.clone(), *w));
        }
    }
    let dims: Vec<usize> = (lo..=hi)
        .map(|d| per_degree.get(&d).map_or(0, Vec::len))
        .collect();
    let mut maps: Vec<Matrix<Rational>> = Vec::new();
    for d in lo..hi {
        let source = per_degree.get(&d).cloned().unwrap_or_default();
        let target = per_degree.get(&(d + 1)).cloned().unwrap_or_default();
        let pos_of: BTreeMap<&Expo, usize> = target
            .iter()
            .enumerate()
            .map(|(i, (e, _))| (e, i))
            .collect();
        let mut m: Matrix<Rational> = Matrix::zeros(target.len(), source.len());
        for (col, (e, _)) in source.iter().enumerate() {
            for (img, coeff) in apply_derivation(&c.gens, &c.gen_images, e) {
                if let Some(&row) = pos_of.get(&img) {
                    let cur = m.at(row, col).clone();
                    m.set(row, col, cur + coeff);
                }
            }
        }
        maps.push(m);
    }
    let complex = crate::linalg::MatrixComplex::new(lo, dims, maps).map_err(|e| {
        CeError::TruncatedTotalComplex {
            context: e.to_string(),
        }
    })?;
    let max_w = c.max_weight as i64;
    let mut levels: BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>> = BTreeMap::new();
    for p in 0..=max_w {
        let mut per: BTreeMap<i64, Matrix<Rational>> = BTreeMap::new();
        for d in lo..=hi {
            let list = per_degree.get(&d).cloned().unwrap_or_default();
            let cols: Vec<Vec<Rational>> = list
                .iter()
                .enumerate()
                .filter(|(_, (_, w))| *w as i64 >= p)
                .map(|(j, _)| {
                    let mut v = vec![Rational::zero(); list.len()];
                    v[j] = rint(1);
                    v
                })
                .collect();
            let basis = if cols.is_empty() {
                Matrix::zeros(list.len(), 0)
            } else {
                Matrix::from_cols(cols)?
            };
            per.insert(d, basis);
        }
        levels.insert(p, per);
    }
    Ok(FilteredComplex::new(
        complex,
        levels,
        "Sym-weight (augmentation ideal)",
    )?)
}
