//! The moduli of vacua at the level of points: centralizers, the
//! symmetry-breaking decomposition, the coarse moduli map, and the family
//! of twisted complexes over vacua.
//!
//! A vacuum is an element `x` of an ordinary gauge algebra with invariant
//! pairing (the dual is identified with the algebra through the pairing).
//! The quantitative claims verified here: the centralizer is the exact
//! perpendicular of the adjoint image (`g_x = im(ad_x)^⊥`, a consequence of
//! skew self-adjointness of `ad_x`), dimensions obey rank–nullity, the
//! coarse moduli map sees only generalized eigenvalues, and the twisted
//! complex over a vacuum has the cohomology of the broken-gauge complex at
//! the origin.
//!
//! The moduli stack itself is represented by points plus equivariance
//! checks: every computed quantity is conjugation-invariant, which is what
//! a family over the quotient means at a point.

use crate::dglie::{
    vacuum_twisted_algebra, CdgAlgebra, DgLieAlgebra, DgLieError, Pairing, SparseVec, TwistPoint,
};
use crate::graded::{GradedVectorSpace, GradingMode};
use crate::linalg::{span_intersect, LinalgError, Matrix};
use crate::scalar::{rint, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from vacuum-moduli operations.
#[derive(Debug, Error, PartialEq)]
pub enum VacuaError {
    #[error("coordinate vector has length {found}, algebra dimension is {expected}")]
    CoordinateLength { expected: usize, found: usize },
    #[error("algebra {algebra} carries no invariant pairing; the vacuum moduli identify the dual with the algebra through it")]
    MissingPairing { algebra: String },
    #[error("invariant pairing of {algebra} is degenerate: rank {rank} < dimension {dim}")]
    DegeneratePairing {
        algebra: String,
        rank: usize,
        dim: usize,
    },
    #[error("algebra {algebra} has no defining representation; the coarse moduli map needs characteristic polynomials")]
    MissingDefiningRep { algebra: String },
    #[error("algebra {algebra} is not an ordinary algebra concentrated in degree 0")]
    NotOrdinary { algebra: String },
    #[error("matrix does not lie in the span of the defining representation of {algebra}")]
    NotInAlgebra { algebra: String },
    #[error("centralizer bracket escaped its own span at basis pair ({i}, {j}); this indicates corrupted input data")]
    CentralizerNotClosed { i: usize, j: usize },
    #[error(transparent)]
    DgLie(#[from] DgLieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A point of the vacuum moduli: an ordinary gauge algebra together with a
/// rational coordinate vector.
#[derive(Debug, Clone)]
pub struct VacuumPoint {
    algebra: DgLieAlgebra,
    x: Vec<Rational>,
    label: String,
}

impl VacuumPoint {
    pub fn new(algebra: DgLieAlgebra, x: Vec<Rational>, label: &str) -> Result<Self, VacuaError> {
        if x.len() != algebra.dim() {
            return Err(VacuaError::CoordinateLength {
                expected: algebra.dim(),
                found: x.len(),
            });
        }
        if algebra.space().mode() != GradingMode::Integer
            || algebra.space().degrees().iter().any(|d| *d != 0)
        {
            return Err(VacuaError::NotOrdinary {
                algebra: algebra.name().to_string(),
            });
        }
        Ok(VacuumPoint {
            algebra,
            x,
            label: label.to_string(),
        })
    }

    pub fn algebra(&self) -> &DgLieAlgebra {
        &self.algebra
    }

    pub fn coords(&self) -> &[Rational] {
        &self.x
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_origin(&self) -> bool {
        self.x.iter().all(Rational::is_zero)
    }
}

/// Express a matrix of the defining representation in algebra coordinates.
pub fn coords_from_matrix(
    g: &DgLieAlgebra,
    mat: &Matrix<Rational>,
) -> Result<Vec<Rational>, VacuaError> {
    let Some(rep) = g.defining_rep() else {
        return Err(VacuaError::MissingDefiningRep {
            algebra: g.name().to_string(),
        });
    };
    let m = rep[0].nrows();
    let vectorize = |a: &Matrix<Rational>| -> Vec<Rational> {
        let mut v = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                v.push(a.at(i, j).clone());
            }
        }
        v
    };
    let basis = Matrix::from_cols(rep.iter().map(vectorize).collect())?;
    basis
        .solve(&vectorize(mat))?
        .ok_or_else(|| VacuaError::NotInAlgebra {
            algebra: g.name().to_string(),
        })
}

/// The centralizer of a vacuum: an exact kernel basis of `ad_x` (columns)
/// with its dimension.
pub fn centralizer(p: &VacuumPoint) -> Result<(Matrix<Rational>, usize), VacuaError> {
    let ad = p.algebra.ad_matrix(&p.x)?;
    let basis = ad.kernel_basis();
    let dim = basis.ncols();
    Ok((basis, dim))
}

/// Verification report of the symmetry-breaking decomposition at a vacuum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakingReport {
    pub algebra: String,
    pub vacuum: String,
    pub dim_algebra: usize,
    pub dim_centralizer: usize,
    pub rank_ad: usize,
    /// `dim g = dim g_x + rank ad_x` (rank–nullity).
    pub dims_add: bool,
    /// `g_x = im(ad_x)^⊥` exactly.
    pub perp_identity: bool,
    /// `κ(a, ad_x b) = -κ(ad_x a, b)` on the full basis, exactly.
    pub kappa_skew: bool,
    /// Whether `g = g_x ⊕ im(ad_x)` actually splits (informational: true
    /// exactly for the vacua where the restricted pairing is
    /// nondegenerate; fails for nilpotent vacua while the perpendicular
    /// identity above still holds).
    pub direct_sum: bool,
    /// Whether κ restricted to the centralizer is nondegenerate
    /// (informational, equivalent to `direct_sum`).
    pub restricted_pairing_nondegenerate: bool,
}

impl BreakingReport {
    /// The lemma's actual content: perpendicular identity, rank–nullity,
    /// and skew self-adjointness.
    pub fn passed(&self) -> bool {
        self.dims_add && self.perp_identity && self.kappa_skew
    }
}

/// Compute the symmetry-breaking decomposition `(g_x, im(ad_x))` at a
/// vacuum and verify its exact properties. Requires nondegenerate κ.
pub fn breaking_decomposition(
    p: &VacuumPoint,
) -> Result<(Matrix<Rational>, Matrix<Rational>, BreakingReport), VacuaError> {
    let g = &p.algebra;
    let n = g.dim();
    let Some(pairing) = g.pairing() else {
        return Err(VacuaError::MissingPairing {
            algebra: g.name().to_string(),
        });
    };
    let gram = pairing.gram.clone();
    let rank = gram.rank();
    if rank != n {
        return Err(VacuaError::DegeneratePairing {
            algebra: g.name().to_string(),
            rank,
            dim: n,
        });
    }
    let ad = g.ad_matrix(&p.x)?;
    let (cent, dim_cent) = centralizer(p)?;
    let image = ad.image_basis();
    let rank_ad = image.ncols();
    let dims_add = dim_cent + rank_ad == n;

    // Perpendicular of the image: kernel of (G · image)^T acting on
    // vectors, i.e. of image^T · G.
    let perp = image.transpose().mul(&gram)?.kernel_basis();
    let perp_identity = crate::linalg::spans_equal(&cent, &perp)?;

    // Skew self-adjointness of ad_x: G · ad + ad^T · G = 0.
    let skew_defect = gram.mul(&ad)?.add(&ad.transpose().mul(&gram)?)?;
    let kappa_skew = skew_defect.is_zero();

    // Direct sum: the intersection of centralizer and image is zero.
    let intersection_dim = span_intersect(&cent, &image)?.rank();
    let direct_sum = intersection_dim == 0 && dims_add;

    // Restricted Gram matrix on the centralizer.
    let restricted = cent.transpose().mul(&gram)?.mul(&cent)?;
    let restricted_nondegenerate = restricted.rank() == dim_cent;

    let report = BreakingReport {
        algebra: g.name().to_string(),
        vacuum: p.label.clone(),
        dim_algebra: n,
        dim_centralizer: dim_cent,
        rank_ad,
        dims_add,
        perp_identity,
        kappa_skew,
        direct_sum,
        restricted_pairing_nondegenerate: restricted_nondegenerate,
    };
    Ok((cent, image, report))
}

/// Restrict the algebra to the centralizer of a vacuum, producing an
/// honest ordinary Lie algebra on the kernel basis. The restricted pairing
/// is attached only when it is nondegenerate (it degenerates at nilpotent
/// vacua); the defining representation restricts along the basis columns.
pub fn broken_gauge_algebra(p: &VacuumPoint) -> Result<DgLieAlgebra, VacuaError> {
    let g = &p.algebra;
    let (cent, k) = centralizer(p)?;
    let labels: Vec<(String, i64)> = (0..k).map(|i| (format!("c{i}"), 0)).collect();
    let mut bracket: Vec<Vec<SparseVec>> = vec![vec![Vec::new(); k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let bi = cent.col(i);
            let bj = cent.col(j);
            let mut v = vec![Rational::zero(); g.dim()];
            for a in 0..g.dim() {
                for b in 0..g.dim() {
                    if bi[a].is_zero() || bj[b].is_zero() {
                        continue;
                    }
                    for (t, c) in g.bracket_of(a, b) {
                        v[*t] += bi[a].clone() * bj[b].clone() * c.clone();
                    }
                }
            }
            let coords = cent
                .solve(&v)?
                .ok_or(VacuaError::CentralizerNotClosed { i, j })?;
            bracket[i][j] = coords
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(t, c)| (t, c.clone()))
                .collect();
        }
    }
    let pairing = match g.pairing() {
        Some(pairing) => {
            let restricted = cent.transpose().mul(&pairing.gram)?.mul(&cent)?;
            if restricted.rank() == k {
                Some(Pairing {
                    gram: restricted,
                    degree: pairing.degree,
                })
            } else {
                None
            }
        }
        None => None,
    };
    let rep = match g.defining_rep() {
        Some(rep) => {
            let m = rep[0].nrows();
            let mats: Vec<Matrix<Rational>> = (0..k)
                .map(|col| {
                    let coords = cent.col(col);
                    let mut acc = Matrix::zeros(m, m);
                    for (i, c) in coords.iter().enumerate() {
                        if !c.is_zero() {
                            acc = acc.add(&rep[i].scale(c)).expect("same shape");
                        }
                    }
                    acc
                })
                .collect();
            Some(mats)
        }
        None => None,
    };
    Ok(DgLieAlgebra::from_parts(
        format!("{}_x[{}]", g.name(), p.label),
        GradedVectorSpace::integer(labels),
        vec![Vec::new(); k],
        bracket,
        pairing,
        rep,
    )?)
}

/// A cohomology table in either grading mode, with a common comparison
/// through the parity collapse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "grading", rename_all = "kebab-case")]
pub enum CohomologyTable {
    Integer { dims: BTreeMap<i64, usize> },
    TwoPeriodic { even: usize, odd: usize },
}

impl CohomologyTable {
    pub fn parity_collapsed(&self) -> (usize, usize) {
        match self {
            CohomologyTable::Integer { dims } => {
                let mut even = 0;
                let mut odd = 0;
                for (deg, dim) in dims {
                    if deg.rem_euclid(2) == 0 {
                        even += dim;
                    } else {
                        odd += dim;
                    }
                }
                (even, odd)
            }
            CohomologyTable::TwoPeriodic { even, odd } => (*even, *odd),
        }
    }

    pub fn total(&self) -> usize {
        let (e, o) = self.parity_collapsed();
        e + o
    }
}

/// Outcome of building and measuring one side of the broken-theory
/// comparison: either a cohomology table, or the constructor's rejection
/// (the square-zero guard fires at nilpotent vacua with `u ≠ 0`, which is
/// the documented signal that no compatible differential exists there).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SideOutcome {
    Table(CohomologyTable),
    Rejected { reason: String },
}

/// Report comparing the twisted complex over a vacuum with the broken
/// gauge complex at the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BrokenTheoryReport {
    pub algebra: String,
    pub vacuum: String,
    pub cdga: String,
    pub t1: String,
    pub t2: String,
    pub u: String,
    pub ambient: SideOutcome,
    pub broken: SideOutcome,
    /// Parity-collapsed dimension comparison; `None` when either side was
    /// rejected by the square-zero guard.
    pub dims_match: Option<bool>,
}

fn measure(
    a: &CdgAlgebra,
    g: &DgLieAlgebra,
    x: &[Rational],
    twist: &TwistPoint,
    eps_degree: i8,
) -> SideOutcome {
    match vacuum_twisted_algebra(a, g, x, twist, eps_degree) {
        Ok(v) => match v.cohomology_dims() {
            Ok(dims) => {
                if v.space().mode() == GradingMode::TwoPeriodic {
                    SideOutcome::Table(CohomologyTable::TwoPeriodic {
                        even: dims.get(&0).copied().unwrap_or(0),
                        odd: dims.get(&1).copied().unwrap_or(0),
                    })
                } else {
                    SideOutcome::Table(CohomologyTable::Integer { dims })
                }
            }
            Err(e) => SideOutcome::Rejected {
                reason: e.to_string(),
            },
        },
        Err(e) => SideOutcome::Rejected {
            reason: e.to_string(),
        },
    }
}

/// Compare the cohomology of the twisted complex over the vacuum with the
/// broken-gauge complex at the origin of its own moduli, at the same twist
/// parameters. Comparison is through the parity collapse, since a nonzero
/// vacuum forces the two-periodic grading on the ambient side.
pub fn broken_theory_check(
    p: &VacuumPoint,
    a: &CdgAlgebra,
    twist: &TwistPoint,
    eps_degree: i8,
) -> Result<BrokenTheoryReport, VacuaError> {
    let ambient = measure(a, &p.algebra, &p.x, twist, eps_degree);
    let gx = broken_gauge_algebra(p)?;
    let origin = vec![Rational::zero(); gx.dim()];
    let broken = measure(a, &gx, &origin, twist, eps_degree);
    let dims_match = match (&ambient, &broken) {
        (SideOutcome::Table(t1), SideOutcome::Table(t2)) => {
            Some(t1.parity_collapsed() == t2.parity_collapsed())
        }
        _ => None,
    };
    Ok(BrokenTheoryReport {
        algebra: p.algebra.name().to_string(),
        vacuum: p.label.clone(),
        cdga: a.name().to_string(),
        t1: twist.t1.to_string(),
        t2: twist.t2.to_string(),
        u: twist.u.to_string(),
        ambient,
        broken,
        dims_match,
    })
}

/// The coarse moduli invariants of a vacuum: elementary symmetric
/// functions of the generalized eigenvalues (signed characteristic
/// polynomial coefficients) together with the power traces, both in the
/// defining representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliInvariants {
    /// `e_1 .. e_n`: trace first, determinant last.
    pub elementary: Vec<String>,
    /// `tr(x^k)` for `k = 1 .. n`.
    pub power_traces: Vec<String>,
}

/// The coarse moduli map: characteristic-polynomial invariants of the
/// vacuum in the defining representation. Conjugate vacua map to the same
/// tuple; Jordan structure is forgotten.
pub fn coarse_moduli_map(p: &VacuumPoint) -> Result<ModuliInvariants, VacuaError> {
    let g = &p.algebra;
    let Some(rep) = g.defining_rep() else {
        return Err(VacuaError::MissingDefiningRep {
            algebra: g.name().to_string(),
        });
    };
    let m = rep[0].nrows();
    let mut mat = Matrix::zeros(m, m);
    for (i, c) in p.x.iter().enumerate() {
        if !c.is_zero() {
            mat = mat.add(&rep[i].scale(c))?;
        }
    }
    let coeffs = mat.charpoly()?;
    let elementary: Vec<String> = (1..=m)
        .map(|k| {
            let sign = if k % 2 == 1 { rint(-1) } else { rint(1) };
            (sign * coeffs[k].clone()).to_string()
        })
        .collect();
    let mut power = Vec::new();
    let mut acc = Matrix::identity(m);
    for _ in 1..=m {
        acc = acc.mul(&mat)?;
        power.push(acc.trace()?.to_string());
    }
    Ok(ModuliInvariants {
        elementary,
        power_traces: power,
    })
}

/// Catalogued vacua for a preset: the origin plus representative
/// semisimple, nilpotent, and mixed points, given by defining-representation
/// matrices so the catalogue is independent of basis ordering.
pub fn vacuum_catalogue(g: &DgLieAlgebra) -> Result<Vec<VacuumPoint>, VacuaError> {
    let Some(rep) = g.defining_rep() else {
        return Err(VacuaError::MissingDefiningRep {
            algebra: g.name().to_string(),
        });
    };
    let m = rep[0].nrows();
    let name = g.name().to_string();
    let mut entries: Vec<(String, Matrix<Rational>)> = vec![(
        "origin".to_string(),
        Matrix::zeros(m, m),
    )];
    let diag = |vals: &[i64]| {
        let mut d = Matrix::zeros(m, m);
        for (i, v) in vals.iter().enumerate() {
            d.set(i, i, rint(*v));
        }
        d
    };
    let jordan_block = |size: usize| {
        let mut j = Matrix::zeros(m, m);
        for i in 0..size.saturating_sub(1) {
            j.set(i, i + 1, rint(1));
        }
        j
    };
    match (name.as_str(), m) {
        ("gl2", 2) => {
            entries.push(("regular-semisimple diag(1,2)".to_string(), diag(&[1, 2])));
            entries.push(("nilpotent Jordan block".to_string(), jordan_block(2)));
            entries.push(("central identity".to_string(), diag(&[1, 1])));
        }
        ("gl3", 3) => {
            entries.push(("regular-semisimple diag(1,2,3)".to_string(), diag(&[1, 2, 3])));
            entries.push(("subregular diag(1,1,2)".to_string(), diag(&[1, 1, 2])));
            entries.push(("regular nilpotent".to_string(), jordan_block(3)));
            entries.push(("minimal nilpotent".to_string(), jordan_block(2)));
        }
        ("sl3", 3) => {
            entries.push((
                "regular-semisimple diag(1,2,-3)".to_string(),
                diag(&[1, 2, -3]),
            ));
            entries.push(("subregular diag(1,1,-2)".to_string(), diag(&[1, 1, -2])));
            entries.push(("regular nilpotent".to_string(), jordan_block(3)));
        }
        ("sl2", 2) => {
            entries.push(("coroot diag(1,-1)".to_string(), diag(&[1, -1])));
            entries.push(("nilpotent Jordan block".to_string(), jordan_block(2)));
        }
        _ => {
            // Generic fallback: a regular semisimple diagonal when the rep
            // is by square matrices containing the diagonals; otherwise
            // only the origin.
            let d: Vec<i64> = (0..m as i64).map(|i| i + 1).collect();
            let candidate = diag(&d);
            if coords_from_matrix(g, &candidate).is_ok() {
                entries.push(("regular-semisimple".to_string(), candidate));
            }
        }
    }
    let mut out = Vec::new();
    for (label, mat) in entries {
        let coords = coords_from_matrix(g, &mat)?;
        out.push(VacuumPoint::new(g.clone(), coords, &label)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dglie::{cdga_preset, preset};
    use rand::distributions::{Distribution, Uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point_from_matrix(name: &str, mat: Matrix<Rational>, label: &str) -> VacuumPoint {
        let g = preset(name).unwrap();
        let coords = coords_from_matrix(&g, &mat).unwrap();
        VacuumPoint::new(g, coords, label).unwrap()
    }

    fn diag(vals: &[i64]) -> Matrix<Rational> {
        let m = vals.len();
        let mut d = Matrix::zeros(m, m);
        for (i, v) in vals.iter().enumerate() {
            d.set(i, i, rint(*v));
        }
        d
    }

    fn jordan(m: usize) -> Matrix<Rational> {
        let mut j = Matrix::zeros(m, m);
        for i in 0..m - 1 {
            j.set(i, i + 1, rint(1));
        }
        j
    }

    #[test]
    fn centralizer_at_the_origin_is_everything() {
        let g = preset("gl3").unwrap();
        let p = VacuumPoint::new(g, vec![Rational::zero(); 9], "origin").unwrap();
        let (_, dim) = centralizer(&p).unwrap();
        assert_eq!(dim, 9);
    }

    #[test]
    fn gl2_centralizers_have_the_expected_dimensions() {
        let p = point_from_matrix("gl2", diag(&[1, 2]), "diag(1,2)");
        assert_eq!(centralizer(&p).unwrap().1, 2);
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        assert_eq!(centralizer(&p).unwrap().1, 2);
    }

    #[test]
    fn gl3_breaking_dimensions_match_the_orbit_structure() {
        for (mat, label, dims) in [
            (diag(&[1, 2, 3]), "diag(1,2,3)", (3usize, 6usize)),
            (jordan(3), "regular nilpotent", (3, 6)),
            (diag(&[1, 1, 2]), "diag(1,1,2)", (5, 4)),
        ] {
            let p = point_from_matrix("gl3", mat, label);
            let (_, _, report) = breaking_decomposition(&p).unwrap();
            assert!(report.passed(), "{label}: {report:?}");
            assert_eq!(
                (report.dim_centralizer, report.rank_ad),
                dims,
                "{label}"
            );
        }
    }

    #[test]
    fn nilpotent_vacua_break_the_direct_sum_but_not_the_perp_identity() {
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        let (_, _, report) = breaking_decomposition(&p).unwrap();
        assert!(report.passed());
        assert!(!report.direct_sum);
        assert!(!report.restricted_pairing_nondegenerate);
        // Semisimple vacua do split.
        let p = point_from_matrix("gl2", diag(&[1, 2]), "diag(1,2)");
        let (_, _, report) = breaking_decomposition(&p).unwrap();
        assert!(report.direct_sum);
        assert!(report.restricted_pairing_nondegenerate);
    }

    #[test]
    fn skew_self_adjointness_holds_for_random_vacua() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeff = Uniform::new_inclusive(-6i64, 6);
        for name in ["gl2", "gl3", "sl3", "so4"] {
            let g = preset(name).unwrap();
            for _ in 0..5 {
                let x: Vec<Rational> =
                    (0..g.dim()).map(|_| rint(coeff.sample(&mut rng))).collect();
                let p = VacuumPoint::new(g.clone(), x, "random").unwrap();
                let (_, _, report) = breaking_decomposition(&p).unwrap();
                assert!(report.kappa_skew, "{name}");
                assert!(report.dims_add, "{name}");
                assert!(report.perp_identity, "{name}");
            }
        }
    }

    #[test]
    fn breaking_rejects_missing_pairing() {
        let g = preset("nonuni2").unwrap();
        let p = VacuumPoint::new(g, vec![rint(1), Rational::zero()], "e").unwrap();
        assert!(matches!(
            breaking_decomposition(&p),
            Err(VacuaError::MissingPairing { .. })
        ));
    }

    #[test]
    fn broken_gauge_algebra_of_a_semisimple_vacuum_is_a_torus() {
        let p = point_from_matrix("gl3", diag(&[1, 2, 3]), "diag(1,2,3)");
        let gx = broken_gauge_algebra(&p).unwrap();
        assert_eq!(gx.dim(), 3);
        assert!(gx.is_abelian());
        assert!(gx.check_axioms().passed());
        assert!(gx.pairing().is_some());
    }

    #[test]
    fn broken_gauge_algebra_at_a_nilpotent_vacuum_drops_the_pairing() {
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        let gx = broken_gauge_algebra(&p).unwrap();
        assert_eq!(gx.dim(), 2);
        assert!(gx.check_axioms().passed());
        // Restricted κ is degenerate on span(I, N): κ(N, N) = 0, κ(N, I) = 0.
        assert!(gx.pairing().is_none());
    }

    #[test]
    fn broken_theory_matches_at_a_regular_semisimple_vacuum() {
        let a = cdga_preset("T4").unwrap();
        let p = point_from_matrix("gl2", diag(&[1, 2]), "diag(1,2)");
        let r = broken_theory_check(&p, &a, &TwistPoint::zero(), -1).unwrap();
        assert_eq!(r.dims_match, Some(true), "{r:?}");
        // The ambient side is two-periodic (nonzero vacuum), the broken
        // side integer-graded (origin, zero twist).
        assert!(matches!(
            r.ambient,
            SideOutcome::Table(CohomologyTable::TwoPeriodic { .. })
        ));
        assert!(matches!(
            r.broken,
            SideOutcome::Table(CohomologyTable::Integer { .. })
        ));
    }

    #[test]
    fn broken_theory_at_the_origin_is_tautological() {
        let a = cdga_preset("S2").unwrap();
        let g = preset("gl2").unwrap();
        let p = VacuumPoint::new(g, vec![Rational::zero(); 4], "origin").unwrap();
        let r = broken_theory_check(&p, &a, &TwistPoint::zero(), -1).unwrap();
        assert_eq!(r.dims_match, Some(true));
    }

    #[test]
    fn broken_theory_matches_at_a_nilpotent_vacuum_without_u() {
        let a = cdga_preset("T4").unwrap();
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        let r = broken_theory_check(&p, &a, &TwistPoint::zero(), -1).unwrap();
        assert_eq!(r.dims_match, Some(true), "{r:?}");
    }

    #[test]
    fn broken_theory_reports_guard_rejection_at_nilpotent_vacuum_with_u() {
        let a = cdga_preset("S2").unwrap();
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        let twist = TwistPoint::new(rint(0), rint(0), rint(1));
        let r = broken_theory_check(&p, &a, &twist, -1).unwrap();
        assert!(matches!(r.ambient, SideOutcome::Rejected { .. }), "{r:?}");
        // The broken side is built at the origin, where the guard passes.
        assert!(matches!(r.broken, SideOutcome::Table(_)));
        assert_eq!(r.dims_match, None);
    }

    #[test]
    fn broken_theory_matches_at_semisimple_vacuum_with_full_twist() {
        let a = cdga_preset("S2").unwrap();
        let p = point_from_matrix("gl2", diag(&[1, 2]), "diag(1,2)");
        let twist = TwistPoint::new(rint(1), rint(1), rint(1));
        let r = broken_theory_check(&p, &a, &twist, -1).unwrap();
        assert_eq!(r.dims_match, Some(true), "{r:?}");
    }

    #[test]
    fn coarse_moduli_of_gl2_examples() {
        let p = point_from_matrix("gl2", diag(&[1, 2]), "diag(1,2)");
        let inv = coarse_moduli_map(&p).unwrap();
        assert_eq!(inv.elementary, vec!["3", "2"]);
        assert_eq!(inv.power_traces, vec!["3", "5"]);
        // Jordan blocks are forgotten: the nilpotent maps to the origin's
        // invariants.
        let p = point_from_matrix("gl2", jordan(2), "jordan");
        let inv_n = coarse_moduli_map(&p).unwrap();
        let origin = VacuumPoint::new(
            preset("gl2").unwrap(),
            vec![Rational::zero(); 4],
            "origin",
        )
        .unwrap();
        assert_eq!(inv_n, coarse_moduli_map(&origin).unwrap());
    }

    #[test]
    fn coarse_moduli_is_conjugation_invariant_and_separates_spectra() {
        let g = preset("gl3").unwrap();
        let x_mat = diag(&[1, 2, 3]);
        // A rational invertible conjugator.
        let mut m = Matrix::identity(3);
        m.set(0, 1, rint(2));
        m.set(1, 2, rint(-1));
        m.set(2, 0, rint(3));
        assert_eq!(m.rank(), 3);
        let m_inv = {
            let mut cols = Vec::new();
            for j in 0..3 {
                let mut e = vec![Rational::zero(); 3];
                e[j] = rint(1);
                cols.push(m.solve(&e).unwrap().unwrap());
            }
            Matrix::from_cols(cols).unwrap()
        };
        let conj = m.mul(&x_mat).unwrap().mul(&m_inv).unwrap();
        let p1 = VacuumPoint::new(g.clone(), coords_from_matrix(&g, &x_mat).unwrap(), "d").unwrap();
        let p2 =
            VacuumPoint::new(g.clone(), coords_from_matrix(&g, &conj).unwrap(), "conj").unwrap();
        assert_eq!(
            coarse_moduli_map(&p1).unwrap(),
            coarse_moduli_map(&p2).unwrap()
        );
        // Distinct eigenvalue multisets separate.
        let p3 =
            VacuumPoint::new(g.clone(), coords_from_matrix(&g, &diag(&[1, 2, 4])).unwrap(), "d2")
                .unwrap();
        assert_ne!(
            coarse_moduli_map(&p1).unwrap(),
            coarse_moduli_map(&p3).unwrap()
        );
    }

    #[test]
    fn catalogue_covers_the_acceptance_presets() {
        for (name, expect_min) in [("gl2", 4), ("gl3", 5), ("sl3", 4)] {
            let g = preset(name).unwrap();
            let cat = vacuum_catalogue(&g).unwrap();
            assert!(cat.len() >= expect_min, "{name}: {}", cat.len());
            assert!(cat[0].is_origin());
            for p in &cat {
                let (_, _, report) = breaking_decomposition(p).unwrap();
                assert!(report.passed(), "{name} / {}", p.label());
            }
        }
    }
}
