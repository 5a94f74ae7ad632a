//! Spectral sequences of finitely filtered cochain complexes.
//!
//! Pages are computed by exact subquotient arithmetic over the rationals:
//! for a decreasing filtration `F^p`, the page blocks are
//! `E_r^{p,n} = Z_r^{p,n} / (Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1})` with
//! `Z_r^{p,n} = F^p ∩ d^{-1} F^{p+r}`, and every dimension and differential
//! rank is an honest subspace computation. Two weight filtrations used by
//! the observable-theory bookkeeping ship as adapters from bigraded
//! complexes with declared differential pieces.

use crate::linalg::{
    dim_added, preimage_span, span_dim, span_intersect, span_sum, LinalgError, Matrix,
    MatrixComplex,
};
use crate::scalar::{rat, rint, Rational};
use num_traits::Zero;
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from filtration validation and the bigraded adapters.
#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("filtration level {level} is not contained in level {} in degree {degree}", level - 1)]
    NotNested { level: i64, degree: i64 },
    #[error("lowest filtration level does not span the whole space in degree {degree}")]
    NotExhaustive { degree: i64 },
    #[error("differential leaves filtration level {level} in degree {degree}")]
    FiltrationViolated { level: i64, degree: i64 },
    #[error("filtration basis in level {level}, degree {degree} has {found} rows, expected {expected}")]
    BasisShape {
        level: i64,
        degree: i64,
        expected: usize,
        found: usize,
    },
    #[error("differential piece {name:?} with (dm, dn) = ({dm}, {dn}) violates {rule}")]
    PieceViolates {
        name: String,
        dm: i64,
        dn: i64,
        rule: String,
    },
    #[error("differential piece {name:?} connects element {from} to {to}, which does not match its declared shift")]
    PieceEntryMismatch {
        name: String,
        from: usize,
        to: usize,
    },
    #[error("bigraded element index {index} out of range {dim}")]
    ElementIndex { index: usize, dim: usize },
    #[error("internal page bookkeeping failed: {context}")]
    InternalCheck { context: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite cochain complex with a finite decreasing filtration
/// `F^min ⊇ … ⊇ F^max` given by subspace bases per cohomological degree.
/// Levels are raw integers: adapters that relabel weights keep their
/// arithmetic visible here.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    complex: MatrixComplex<Rational>,
    /// `levels[p][n]` = basis matrix of `F^p` in degree `n`; keys are
    /// contiguous `min_level..=max_level` and every complex degree appears.
    levels: BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>>,
    /// Human-readable description of what the level index means.
    level_label: String,
}

impl FilteredComplex {
    /// Validate exhaustiveness, nesting, and `d(F^p) ⊆ F^p`, then wrap.
    pub fn new(
        complex: MatrixComplex<Rational>,
        levels: BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>>,
        level_label: impl Into<String>,
    ) -> Result<Self, SpectralError> {
        let min_level = *levels.keys().next().ok_or(SpectralError::NotExhaustive {
            degree: complex.offset(),
        })?;
        let max_level = *levels.keys().last().unwrap();
        for p in min_level..=max_level {
            if !levels.contains_key(&p) {
                return Err(SpectralError::NotNested {
                    level: p,
                    degree: complex.offset(),
                });
            }
        }
        let degrees: Vec<i64> = (0..complex.dims().len())
            .map(|i| complex.offset() + i as i64)
            .collect();
        // Shapes, exhaustiveness of the bottom level, nesting, stability.
        for &n in &degrees {
            let dim = complex.dim_in_degree(n);
            for (&p, per_degree) in &levels {
                let basis = per_degree
                    .get(&n)
                    .cloned()
                    .unwrap_or_else(|| Matrix::zeros(dim, 0));
                if basis.nrows() != dim {
                    return Err(SpectralError::BasisShape {
                        level: p,
                        degree: n,
                        expected: dim,
                        found: basis.nrows(),
                    });
                }
                if p == min_level && basis.rank() != dim {
                    return Err(SpectralError::NotExhaustive { degree: n });
                }
            }
        }
        let fetch = |p: i64, n: i64| -> Matrix<Rational> {
            let dim = complex.dim_in_degree(n);
            levels
                .get(&p)
                .and_then(|m| m.get(&n))
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(dim, 0))
        };
        for &n in &degrees {
            for p in min_level + 1..=max_level {
                let outer = fetch(p - 1, n);
                let inner = fetch(p, n);
                if dim_added(&inner, &outer)? > 0 {
                    return Err(SpectralError::NotNested { level: p, degree: n });
                }
            }
        }
        for &n in &degrees {
            if let Some(d) = complex.map_out_of(n) {
                for p in min_level..=max_level {
                    let basis = fetch(p, n);
                    if basis.ncols() == 0 {
                        continue;
                    }
                    let image = d.mul(&basis)?;
                    let target = fetch(p, n + 1);
                    if dim_added(&image, &target)? > 0 {
                        return Err(SpectralError::FiltrationViolated { level: p, degree: n });
                    }
                }
            }
        }
        Ok(FilteredComplex {
            complex,
            levels,
            level_label: level_label.into(),
        })
    }

    pub fn complex(&self) -> &MatrixComplex<Rational> {
        &self.complex
    }

    pub fn level_label(&self) -> &str {
        &self.level_label
    }

    pub fn min_level(&self) -> i64 {
        *self.levels.keys().next().expect("validated nonempty")
    }

    pub fn max_level(&self) -> i64 {
        *self.levels.keys().last().expect("validated nonempty")
    }

    pub fn degrees(&self) -> Vec<i64> {
        (0..self.complex.dims().len())
            .map(|i| self.complex.offset() + i as i64)
            .collect()
    }

    /// Basis of `F^p` in degree `n`, with the conventions `F^{<min}` =
    /// everything and `F^{>max}` = zero.
    pub fn filtration_basis(&self, p: i64, n: i64) -> Matrix<Rational> {
        let dim = self.complex.dim_in_degree(n);
        if p < self.min_level() {
            return Matrix::identity(dim);
        }
        self.levels
            .get(&p)
            .and_then(|m| m.get(&n))
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(dim, 0))
    }

    /// The differential out of degree `n` as a matrix (zero-shaped when the
    /// complex carries no map there).
    pub fn d_out_of(&self, n: i64) -> Matrix<Rational> {
        match self.complex.map_out_of(n) {
            Some(m) => m.clone(),
            None => Matrix::zeros(self.complex.dim_in_degree(n + 1), self.complex.dim_in_degree(n)),
        }
    }

    /// First page index at which all differentials are forced to vanish.
    pub fn stabilization_page(&self) -> i64 {
        self.max_level() - self.min_level() + 2
    }
}

/// One block of one page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageBlock {
    pub dim: usize,
    /// Rank of `d_r` out of this block.
    pub rank_out: usize,
}

/// One page of the spectral sequence.
#[derive(Debug, Clone)]
pub struct Page {
    pub r: i64,
    /// Blocks keyed by (filtration level, cohomological degree); absent
    /// keys are zero blocks.
    pub blocks: BTreeMap<(i64, i64), PageBlock>,
}

/// All requested pages plus the stabilized dims.
#[derive(Debug, Clone)]
pub struct SpectralPages {
    pub pages: Vec<Page>,
    /// Dims at the stabilization page (`E_∞` of the finite filtration),
    /// computed regardless of how many pages were requested.
    pub stabilized: BTreeMap<(i64, i64), usize>,
}

/// Compute pages `E_0..E_{r_max}` with exact subquotients.
///
/// Alongside the reported pages, the routine re-derives every next page
/// dimension from the current page's differential ranks and fails loudly
/// if the two computations disagree.
pub fn pages(f: &FilteredComplex, r_max: i64) -> Result<SpectralPages, SpectralError> {
    let min_p = f.min_level();
    let max_p = f.max_level();
    let degrees = f.degrees();
    if degrees.is_empty() {
        return Ok(SpectralPages {
            pages: vec![],
            stabilized: BTreeMap::new(),
        });
    }
    let r_stab = f.stabilization_page();
    let r_top = r_max.max(r_stab);

    // Z_r^{p,n} = F^p ∩ d^{-1} F^{p+r}; cache per r as maps (p,n) → basis.
    let z_basis = |r: i64, p: i64, n: i64| -> Result<Matrix<Rational>, SpectralError> {
        let fp = f.filtration_basis(p, n);
        let d = f.d_out_of(n);
        let target = f.filtration_basis(p + r, n + 1);
        let pre = preimage_span(&d, &target)?;
        Ok(span_intersect(&fp, &pre)?)
    };
    // Denominator of E_r^{p,n}: Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1}.
    let den_basis = |r: i64, p: i64, n: i64| -> Result<Matrix<Rational>, SpectralError> {
        let first = z_basis(r - 1, p + 1, n)?;
        let z_in = z_basis(r - 1, p - r + 1, n - 1)?;
        let d_in = f.d_out_of(n - 1);
        let second = d_in.mul(&z_in)?;
        Ok(span_sum(&first, &second)?)
    };

    let mut out_pages: Vec<Page> = Vec::new();
    let mut stabilized: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut previous: Option<Page> = None;
    for r in 0..=r_top {
        let mut blocks: BTreeMap<(i64, i64), PageBlock> = BTreeMap::new();
        for &n in &degrees {
            for p in min_p..=max_p {
                let z = z_basis(r, p, n)?;
                let den = den_basis(r, p, n)?;
                let dim = span_dim(&z) - span_dim(&den);
                // Rank of d_r out of (p, n): image of Z_r in the target
                // subquotient E_r^{p+r, n+1}.
                let d = f.d_out_of(n);
                let dz = d.mul(&z)?;
                let target_den = den_basis(r, p + r, n + 1)?;
                let rank_out = span_dim(&span_sum(&dz, &target_den)?) - span_dim(&target_den);
                if dim > 0 || rank_out > 0 {
                    blocks.insert((p, n), PageBlock { dim, rank_out });
                }
            }
        }
        // Cross-check against the previous page's rank bookkeeping.
        if let Some(prev) = &previous {
            for &n in &degrees {
                for p in min_p..=max_p {
                    let prev_dim = prev.blocks.get(&(p, n)).map_or(0, |b| b.dim);
                    let rank_out = prev.blocks.get(&(p, n)).map_or(0, |b| b.rank_out);
                    let rank_in = prev
                        .blocks
                        .get(&(p - prev.r, n - 1))
                        .map_or(0, |b| b.rank_out);
                    let expected = prev_dim - rank_out - rank_in;
                    let got = blocks.get(&(p, n)).map_or(0, |b| b.dim);
                    if expected != got {
                        return Err(SpectralError::InternalCheck {
                            context: format!(
                                "page {} block ({p}, {n}): rank arithmetic predicts dim {expected}, subquotient computation gives {got}",
                                r
                            ),
                        });
                    }
                }
            }
        }
        if r == r_stab {
            stabilized = blocks
                .iter()
                .filter(|(_, b)| b.dim > 0)
                .map(|(k, b)| (*k, b.dim))
                .collect();
        }
        previous = Some(Page { r, blocks: blocks.clone() });
        if r <= r_max {
            out_pages.push(Page { r, blocks });
        }
    }
    Ok(SpectralPages {
        pages: out_pages,
        stabilized,
    })
}

/// Associated graded of the total cohomology:
/// `gr^p H^n = (F^p ∩ ker d) / (F^{p+1} ∩ ker d + F^p ∩ im d)`.
pub fn gr_total_cohomology(
    f: &FilteredComplex,
) -> Result<BTreeMap<(i64, i64), usize>, SpectralError> {
    let mut out = BTreeMap::new();
    for &n in &f.degrees() {
        let d = f.d_out_of(n);
        let kernel = d.kernel_basis();
        let image = f.d_out_of(n - 1).image_basis();
        for p in f.min_level()..=f.max_level() {
            let fp = f.filtration_basis(p, n);
            let fp1 = f.filtration_basis(p + 1, n);
            let numerator = span_intersect(&fp, &kernel)?;
            let den = span_sum(
                &span_intersect(&fp1, &kernel)?,
                &span_intersect(&fp, &image)?,
            )?;
            let dim = span_dim(&numerator) - span_dim(&den);
            if dim > 0 {
                out.insert((p, n), dim);
            }
        }
    }
    Ok(out)
}

/// Whether a block-dimension table equals the associated graded of total
/// cohomology. Exposed separately so corrupted page data can be tested
/// against the honest answer.
pub fn blocks_match_gr(
    blocks: &BTreeMap<(i64, i64), usize>,
    f: &FilteredComplex,
) -> Result<bool, SpectralError> {
    let gr = gr_total_cohomology(f)?;
    let nonzero: BTreeMap<(i64, i64), usize> = blocks
        .iter()
        .filter(|(_, v)| **v > 0)
        .map(|(k, v)| (*k, *v))
        .collect();
    Ok(nonzero == gr)
}

/// Finite convergence: the stabilized page equals the associated graded of
/// the total cohomology.
pub fn check_convergence(f: &FilteredComplex) -> Result<bool, SpectralError> {
    let p = pages(f, 0)?;
    blocks_match_gr(&p.stabilized, f)
}

/// One basis element of a bigraded complex: a cohomological degree plus a
/// weight pair `(m, n)` whose meaning the adapters interpret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigradedElement {
    pub label: String,
    pub degree: i64,
    pub m: i64,
    pub n: i64,
}

/// A named piece of the differential with a declared weight shift
/// `(dm, dn)`; entries are `(to, from, coefficient)` index triples.
#[derive(Debug, Clone)]
pub struct DiffPiece {
    pub name: String,
    pub dm: i64,
    pub dn: i64,
    pub entries: Vec<(usize, usize, Rational)>,
}

/// A complex of `(m, n)`-biweighted spaces with the differential split into
/// declared pieces. The adapters below turn weight bookkeeping into
/// filtrations.
#[derive(Debug, Clone)]
pub struct BigradedComplex {
    elements: Vec<BigradedElement>,
    pieces: Vec<DiffPiece>,
}

impl BigradedComplex {
    /// Validate that every entry of every piece connects elements whose
    /// degree rises by one and whose weights shift exactly by the piece's
    /// declaration.
    pub fn new(
        elements: Vec<BigradedElement>,
        pieces: Vec<DiffPiece>,
    ) -> Result<Self, SpectralError> {
        let dim = elements.len();
        for piece in &pieces {
            for (to, from, _) in &piece.entries {
                if *to >= dim || *from >= dim {
                    return Err(SpectralError::ElementIndex {
                        index: (*to).max(*from),
                        dim,
                    });
                }
                let a = &elements[*from];
                let b = &elements[*to];
                if b.degree != a.degree + 1 || b.m != a.m + piece.dm || b.n != a.n + piece.dn {
                    return Err(SpectralError::PieceEntryMismatch {
                        name: piece.name.clone(),
                        from: *from,
                        to: *to,
                    });
                }
            }
        }
        Ok(BigradedComplex { elements, pieces })
    }

    pub fn elements(&self) -> &[BigradedElement] {
        &self.elements
    }

    pub fn pieces(&self) -> &[DiffPiece] {
        &self.pieces
    }

    /// Assemble the filtered complex whose level assigns `level_of(element)`
    /// and check that each piece shifts levels by at least zero.
    fn filtered_by(
        &self,
        level_of: impl Fn(&BigradedElement) -> i64,
        level_shift_of: impl Fn(&DiffPiece) -> i64,
        rule: &str,
        level_label: &str,
    ) -> Result<FilteredComplex, SpectralError> {
        for piece in &self.pieces {
            if level_shift_of(piece) < 0 {
                return Err(SpectralError::PieceViolates {
                    name: piece.name.clone(),
                    dm: piece.dm,
                    dn: piece.dn,
                    rule: rule.to_string(),
                });
            }
        }
        // Group elements by cohomological degree.
        let mut degrees: Vec<i64> = self.elements.iter().map(|e| e.degree).collect();
        degrees.sort_unstable();
        degrees.dedup();
        if degrees.is_empty() {
            return Err(SpectralError::NotExhaustive { degree: 0 });
        }
        let lo = degrees[0];
        let hi = *degrees.last().unwrap();
        let per_degree: Vec<Vec<usize>> = (lo..=hi)
            .map(|n| {
                self.elements
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.degree == n)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let position: BTreeMap<usize, (i64, usize)> = per_degree
            .iter()
            .enumerate()
            .flat_map(|(slot, idxs)| {
                idxs.iter()
                    .enumerate()
                    .map(move |(j, &i)| (i, (lo + slot as i64, j)))
            })
            .collect();
        let dims: Vec<usize> = per_degree.iter().map(Vec::len).collect();
        let mut maps: Vec<Matrix<Rational>> = (0..dims.len().saturating_sub(1))
            .map(|s| Matrix::zeros(dims[s + 1], dims[s]))
            .collect();
        for piece in &self.pieces {
            for (to, from, c) in &piece.entries {
                let (dn_from, j) = position[from];
                let (_, i) = position[to];
                let slot = (dn_from - lo) as usize;
                let current = maps[slot].at(i, j).clone();
                maps[slot].set(i, j, current + c.clone());
            }
        }
        let complex = MatrixComplex::new(lo, dims, maps)?;

        let min_level = self.elements.iter().map(&level_of).min().unwrap();
        let max_level = self.elements.iter().map(&level_of).max().unwrap();
        let mut levels: BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>> = BTreeMap::new();
        for p in min_level..=max_level {
            let mut per: BTreeMap<i64, Matrix<Rational>> = BTreeMap::new();
            for (slot, idxs) in per_degree.iter().enumerate() {
                let n = lo + slot as i64;
                let cols: Vec<Vec<Rational>> = idxs
                    .iter()
                    .enumerate()
                    .filter(|(_, &i)| level_of(&self.elements[i]) >= p)
                    .map(|(j, _)| {
                        let mut v = vec![Rational::zero(); idxs.len()];
                        v[j] = rint(1);
                        v
                    })
                    .collect();
                let basis = if cols.is_empty() {
                    Matrix::zeros(idxs.len(), 0)
                } else {
                    Matrix::from_cols(cols)?
                };
                per.insert(n, basis);
            }
            levels.insert(p, per);
        }
        FilteredComplex::new(complex, levels, level_label)
    }
}

/// The free-to-interacting filtration: level of an element with weights
/// `(m, n)` (loop order, word weight) is `2m + n`; every differential piece
/// must satisfy `2 dm + dn ≥ 0`, and the associated graded keeps exactly
/// the `2 dm + dn = 0` pieces.
pub fn f2i_filtration(b: &BigradedComplex) -> Result<FilteredComplex, SpectralError> {
    b.filtered_by(
        |e| 2 * e.m + e.n,
        |p| 2 * p.dm + p.dn,
        "2*dm + dn >= 0 (free-to-interacting filtration)",
        "2m+n (free-to-interacting)",
    )
}

/// The anti-diagonal filtration: the reported level of an element is
/// `n - m`, along which every admissible differential piece is
/// non-increasing; internally the filtration index is `m - n` so that the
/// stored filtration is decreasing with a level-non-decreasing
/// differential. A piece with `dn - dm > 0` is rejected: it plays the role
/// of a linear quantum interaction term, whose absence this filtration
/// requires.
pub fn antidiagonal_filtration(b: &BigradedComplex) -> Result<FilteredComplex, SpectralError> {
    b.filtered_by(
        |e| e.m - e.n,
        |p| p.dm - p.dn,
        "dn - dm <= 0 (no linear quantum term)",
        "m-n (negated anti-diagonal level n-m)",
    )
}

/// Deterministic pseudo-random filtered complex for stress-testing the
/// page arithmetic: a random filtration-compatible partial matching
/// differential conjugated by a random filtration-preserving unipotent
/// automorphism, so that subspace bases are not coordinate subspaces.
pub fn random_filtered_complex(
    rng: &mut impl Rng,
    max_degree_slots: usize,
    max_dim_per_degree: usize,
    max_level: i64,
) -> FilteredComplex {
    let slots = rng.gen_range(2..=max_degree_slots.max(2));
    let offset = rng.gen_range(-2..=2i64);
    let dims: Vec<usize> = (0..slots)
        .map(|_| rng.gen_range(1..=max_dim_per_degree.max(1)))
        .collect();
    // Assign levels and a source/target role to each basis vector.
    let levels_of: Vec<Vec<i64>> = dims
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen_range(0..=max_level)).collect())
        .collect();
    let is_source: Vec<Vec<bool>> = dims
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    let coefficients = [rint(1), rint(-1), rint(2), rat(1, 2)];
    let mut maps: Vec<Matrix<Rational>> = (0..slots - 1)
        .map(|s| Matrix::zeros(dims[s + 1], dims[s]))
        .collect();
    for s in 0..slots - 1 {
        let mut used_targets = vec![false; dims[s + 1]];
        for j in 0..dims[s] {
            if !is_source[s][j] || rng.gen_bool(0.3) {
                continue;
            }
            let candidates: Vec<usize> = (0..dims[s + 1])
                .filter(|&i| {
                    !is_source[s + 1][i]
                        && !used_targets[i]
                        && levels_of[s + 1][i] >= levels_of[s][j]
                })
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let i = candidates[rng.gen_range(0..candidates.len())];
            used_targets[i] = true;
            let c = coefficients[rng.gen_range(0..coefficients.len())].clone();
            maps[s].set(i, j, c);
        }
    }
    // Random unipotent change of basis g per degree with g(F^p) = F^p:
    // entries only from lower-level columns into higher-or-equal-level rows
    // in a fixed triangular order.
    let mut gs: Vec<Matrix<Rational>> = Vec::new();
    let mut g_invs: Vec<Matrix<Rational>> = Vec::new();
    for s in 0..slots {
        let d = dims[s];
        let mut g = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let ok = levels_of[s][i] > levels_of[s][j]
                    || (levels_of[s][i] == levels_of[s][j] && i < j);
                if ok && rng.gen_bool(0.4) {
                    let c = coefficients[rng.gen_range(0..coefficients.len())].clone();
                    g.set(i, j, c);
                }
            }
        }
        // Invert by solving g x = e_j column by column.
        let mut inv = Matrix::zeros(d, d);
        for j in 0..d {
            let mut e = vec![Rational::zero(); d];
            e[j] = rint(1);
            let col = g
                .solve(&e)
                .expect("square system")
                .expect("unipotent matrices are invertible");
            for (i, c) in col.into_iter().enumerate() {
                inv.set(i, j, c);
            }
        }
        gs.push(g);
        g_invs.push(inv);
    }
    let conjugated: Vec<Matrix<Rational>> = (0..slots - 1)
        .map(|s| {
            gs[s + 1]
                .mul(&maps[s])
                .and_then(|m| m.mul(&g_invs[s]))
                .expect("shapes agree")
        })
        .collect();
    let complex = MatrixComplex::new(offset, dims.clone(), conjugated)
        .expect("matching differential squares to zero");
    let mut levels: BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>> = BTreeMap::new();
    for p in 0..=max_level {
        let mut per = BTreeMap::new();
        for s in 0..slots {
            let cols: Vec<Vec<Rational>> = (0..dims[s])
                .filter(|&j| levels_of[s][j] >= p)
                .map(|j| gs[s].col(j))
                .collect();
            let basis = if cols.is_empty() {
                Matrix::zeros(dims[s], 0)
            } else {
                Matrix::from_cols(cols).expect("equal lengths")
            };
            per.insert(offset + s as i64, basis);
        }
        levels.insert(p, per);
    }
    FilteredComplex::new(complex, levels, "random weight").expect("construction is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coordinate_levels(
        dims: &[usize],
        offset: i64,
        level_of: impl Fn(i64, usize) -> i64,
        max_level: i64,
    ) -> BTreeMap<i64, BTreeMap<i64, Matrix<Rational>>> {
        let mut levels = BTreeMap::new();
        for p in 0..=max_level {
            let mut per = BTreeMap::new();
            for (s, &d) in dims.iter().enumerate() {
                let n = offset + s as i64;
                let cols: Vec<Vec<Rational>> = (0..d)
                    .filter(|&j| level_of(n, j) >= p)
                    .map(|j| {
                        let mut v = vec![Rational::zero(); d];
                        v[j] = rint(1);
                        v
                    })
                    .collect();
                let basis = if cols.is_empty() {
                    Matrix::zeros(d, 0)
                } else {
                    Matrix::from_cols(cols).unwrap()
                };
                per.insert(n, basis);
            }
            levels.insert(p, per);
        }
        levels
    }

    #[test]
    fn trivial_filtration_first_page_is_cohomology() {
        // 0 → Q² → Q → 0 with d = (1 0): cohomology dims (1, 0).
        let d = Matrix::from_rows(vec![vec![rint(1), rint(0)]]).unwrap();
        let cx = MatrixComplex::new(0, vec![2, 1], vec![d]).unwrap();
        let levels = coordinate_levels(&[2, 1], 0, |_, _| 0, 0);
        let f = FilteredComplex::new(cx, levels, "trivial").unwrap();
        let p = pages(&f, 1).unwrap();
        let e1 = &p.pages[1];
        assert_eq!(e1.blocks.get(&(0, 0)).map(|b| b.dim), Some(1));
        assert_eq!(e1.blocks.get(&(0, 1)), None);
        assert!(check_convergence(&f).unwrap());
    }

    #[test]
    fn contractible_complex_has_vanishing_e_infinity() {
        let d = Matrix::from_rows(vec![vec![rint(1)]]).unwrap();
        let cx = MatrixComplex::new(0, vec![1, 1], vec![d]).unwrap();
        // Two-step filtration separating source and target.
        let levels = coordinate_levels(&[1, 1], 0, |n, _| if n == 1 { 1 } else { 0 }, 1);
        let f = FilteredComplex::new(cx, levels, "toy").unwrap();
        let p = pages(&f, 3).unwrap();
        assert!(p.stabilized.is_empty());
        assert!(check_convergence(&f).unwrap());
    }

    #[test]
    fn two_step_filtration_matches_hand_computation() {
        // Degrees 0 and 1, each Q²; d(a0) = b1 (level 1 → level 1),
        // d(a1) = 0, d eats one pair at page 1... and one crossing pair:
        // d(x) lands one level deeper, visible only on page 2.
        // Basis degree 0: x (level 0), a (level 1); degree 1: y (level 0),
        // b (level 1). d(x) = b, d(a) = 0: the differential raises level by
        // one from x, so E_1 has no differential on x and E_2 kills (x, b).
        let d = Matrix::from_rows(vec![vec![rint(0), rint(0)], vec![rint(1), rint(0)]]).unwrap();
        let cx = MatrixComplex::new(0, vec![2, 2], vec![d]).unwrap();
        let levels = coordinate_levels(&[2, 2], 0, |_, j| j as i64, 1);
        let f = FilteredComplex::new(cx, levels, "two-step").unwrap();
        let p = pages(&f, 2).unwrap();
        let e1 = &p.pages[1];
        // E_1: everything survives page 0/1 since d shifts level by +1.
        assert_eq!(e1.blocks.get(&(0, 0)).map(|b| b.dim), Some(1));
        assert_eq!(e1.blocks.get(&(1, 0)).map(|b| b.dim), Some(1));
        assert_eq!(e1.blocks.get(&(0, 1)).map(|b| b.dim), Some(1));
        assert_eq!(e1.blocks.get(&(1, 1)).map(|b| b.dim), Some(1));
        assert_eq!(e1.blocks.get(&(0, 0)).map(|b| b.rank_out), Some(1));
        // E_2 = E_∞: x and b cancel; a and y survive.
        let e2 = &p.pages[2];
        assert_eq!(e2.blocks.get(&(1, 0)).map(|b| b.dim), Some(1));
        assert_eq!(e2.blocks.get(&(0, 1)).map(|b| b.dim), Some(1));
        assert_eq!(e2.blocks.get(&(0, 0)), None);
        assert_eq!(e2.blocks.get(&(1, 1)), None);
        assert!(check_convergence(&f).unwrap());
    }

    #[test]
    fn filtration_violations_are_rejected_with_the_block() {
        // d maps level 1 into level 0: violates preservation.
        let d = Matrix::from_rows(vec![vec![rint(0), rint(1)], vec![rint(0), rint(0)]]).unwrap();
        let cx = MatrixComplex::new(0, vec![2, 2], vec![d]).unwrap();
        let levels = coordinate_levels(&[2, 2], 0, |_, j| j as i64, 1);
        let err = FilteredComplex::new(cx, levels, "bad").unwrap_err();
        assert_eq!(
            err,
            SpectralError::FiltrationViolated { level: 1, degree: 0 }
        );
    }

    #[test]
    fn corrupted_page_data_fails_the_gr_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_filtered_complex(&mut rng, 4, 6, 2);
        let p = pages(&f, 1).unwrap();
        assert!(blocks_match_gr(&p.stabilized, &f).unwrap());
        let mut corrupted = p.stabilized.clone();
        let key = corrupted.keys().next().copied().unwrap_or((0, 0));
        *corrupted.entry(key).or_insert(0) += 1;
        assert!(!blocks_match_gr(&corrupted, &f).unwrap());
    }

    #[test]
    fn random_complexes_converge_with_monotone_pages() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_filtered_complex(&mut rng, 5, 8, 3);
            let p = pages(&f, f.stabilization_page()).unwrap();
            assert!(check_convergence(&f).unwrap(), "seed {seed}");
            for w in p.pages.windows(2) {
                for (key, block) in &w[1].blocks {
                    let before = w[0].blocks.get(key).map_or(0, |b| b.dim);
                    assert!(block.dim <= before, "seed {seed}, block {key:?}");
                }
            }
        }
    }

    #[test]
    fn f2i_adapter_filters_by_twice_m_plus_n() {
        // Elements: degree 0 with (m, n) = (0, 2); degree 1 with (1, 0).
        // A piece with (dm, dn) = (1, -2) has 2dm+dn = 0: admissible,
        // survives in gr.
        let elements = vec![
            BigradedElement {
                label: "classical".into(),
                degree: 0,
                m: 0,
                n: 2,
            },
            BigradedElement {
                label: "quantum".into(),
                degree: 1,
                m: 1,
                n: 0,
            },
        ];
        let pieces = vec![DiffPiece {
            name: "loop".into(),
            dm: 1,
            dn: -2,
            entries: vec![(1, 0, rint(1))],
        }];
        let b = BigradedComplex::new(elements.clone(), pieces).unwrap();
        let f = f2i_filtration(&b).unwrap();
        assert_eq!(f.min_level(), 2);
        assert_eq!(f.max_level(), 2);
        assert!(check_convergence(&f).unwrap());
        // An inadmissible piece is rejected by name.
        let bad = BigradedComplex::new(
            elements,
            vec![DiffPiece {
                name: "linear-quantum".into(),
                dm: 1,
                dn: -3,
            entries: vec![],
            }],
        );
        // Entry-free pieces construct fine but fail the filtration rule...
        let err = f2i_filtration(&bad.unwrap()).unwrap_err();
        match err {
            SpectralError::PieceViolates { name, .. } => {
                assert_eq!(name, "linear-quantum");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn f2i_level_shifts_with_constant_n_shift() {
        let make = |shift: i64| {
            let elements = vec![
                BigradedElement {
                    label: "u".into(),
                    degree: 0,
                    m: 0,
                    n: 1 + shift,
                },
                BigradedElement {
                    label: "v".into(),
                    degree: 1,
                    m: 0,
                    n: 1 + shift,
                },
            ];
            let pieces = vec![DiffPiece {
                name: "free".into(),
                dm: 0,
                dn: 0,
                entries: vec![(1, 0, rint(1))],
            }];
            f2i_filtration(&BigradedComplex::new(elements, pieces).unwrap()).unwrap()
        };
        assert_eq!(make(0).min_level() + 5, make(5).min_level());
    }

    #[test]
    fn antidiagonal_adapter_rejects_level_raising_pieces() {
        let elements = vec![
            BigradedElement {
                label: "a".into(),
                degree: 0,
                m: 1,
                n: 1,
            },
            BigradedElement {
                label: "b".into(),
                degree: 1,
                m: 1,
                n: 2,
            },
        ];
        // dn - dm = +1 > 0: a linear quantum term.
        let pieces = vec![DiffPiece {
            name: "i1q".into(),
            dm: 0,
            dn: 1,
            entries: vec![(1, 0, rint(1))],
        }];
        let b = BigradedComplex::new(elements, pieces).unwrap();
        let err = antidiagonal_filtration(&b).unwrap_err();
        assert!(matches!(err, SpectralError::PieceViolates { .. }));
    }

    #[test]
    fn antidiagonal_level_is_preserved_by_laplacian_like_pieces() {
        // (dm, dn) = (-1, -1) keeps n - m: admissible and level-preserving.
        let elements = vec![
            BigradedElement {
                label: "top".into(),
                degree: 0,
                m: 2,
                n: 2,
            },
            BigradedElement {
                label: "bot".into(),
                degree: 1,
                m: 1,
                n: 1,
            },
        ];
        let pieces = vec![DiffPiece {
            name: "bv".into(),
            dm: -1,
            dn: -1,
            entries: vec![(1, 0, rint(1))],
        }];
        let b = BigradedComplex::new(elements, pieces).unwrap();
        let f = antidiagonal_filtration(&b).unwrap();
        assert_eq!(f.min_level(), 0);
        assert_eq!(f.max_level(), 0);
        assert!(check_convergence(&f).unwrap());
    }

    #[test]
    fn piece_entries_must_match_declared_shifts() {
        let elements = vec![
            BigradedElement {
                label: "a".into(),
                degree: 0,
                m: 0,
                n: 0,
            },
            BigradedElement {
                label: "b".into(),
                degree: 1,
                m: 0,
                n: 1,
            },
        ];
        let pieces = vec![DiffPiece {
            name: "mislabeled".into(),
            dm: 0,
            dn: 0,
            entries: vec![(1, 0, rint(1))],
        }];
        let err = BigradedComplex::new(elements, pieces).unwrap_err();
        assert!(matches!(err, SpectralError::PieceEntryMismatch { .. }));
    }
}
