//! Determinant lines, observable counts, and compactification algebras over
//! a catalogue of cohomology-level manifold data.
//!
//! Global invariants over a manifold enter through finite data: the graded
//! dimensions of its cohomology, an orientation flag, and optionally the
//! Poincaré pairing. A [`ManifoldData`] record carries exactly that, with a
//! validation pass (Euler characteristic, pairing shapes and nondegeneracy);
//! nothing in this module computes cohomology from a triangulation. A small
//! catalogue of standard closed manifolds ships embedded in the binary and
//! can be replaced by user-supplied JSON of the same shape.
//!
//! Three consumers sit on top:
//!
//! * [`det_line_degree`] — the degree of the determinant line of a
//!   four-manifold invariant, implemented twice (a closed-form coefficient
//!   sum and a per-degree dimension table) and compared, with a parity
//!   cross-check against the Euler characteristic of the coefficient system.
//! * [`classical_observable_dims`] — graded dimension counts of polynomial
//!   functions on the cohomology of the field complex.
//! * [`compactification_algebra`] — the algebra assigned to a closed
//!   three-manifold: a genuine Weyl algebra in the abelian case, and a
//!   dimension-level skeleton of differential-operator type, with its
//!   first-page differential, in the nonabelian case.

use crate::ce::{adjoint_module, build_ce, CoeffSpec};
use crate::dglie::{cdga_preset, tensor_with_cdga, DgLieAlgebra};
use crate::graded::{free_cga_dimension_table, GradedVectorSpace, GradingMode};
use crate::linalg::Matrix;
use crate::scalar::{rint, Rational};
use crate::weyl::{DOTAlgebra, DotBlock, DotDifferentialRow, WeylAlgebra};
use std::collections::BTreeMap;

/// Embedded manifold catalogue, JSON of `Vec<ManifoldData>`.
const MANIFOLD_CATALOGUE_JSON: &str = include_str!("../data/manifolds.json");

/// Errors raised by catalogue validation and the manifold-level invariants.
#[derive(Debug, thiserror::Error)]
pub enum FactHomError {
    #[error("catalogue JSON is malformed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown manifold {name}; available: {available}")]
    UnknownManifold { name: String, available: String },
    #[error("manifold {name}: expected {expected} graded dimensions for dimension {dim}, found {found}")]
    BettiLength {
        name: String,
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("manifold {name}: stated Euler characteristic {stated}, alternating sum gives {computed}")]
    ChiMismatch {
        name: String,
        stated: i64,
        computed: i64,
    },
    #[error("manifold {name}: pairing key {key} is not a degree within 0..={dim}")]
    PairingDegree { name: String, key: String, dim: usize },
    #[error("manifold {name}: pairing at degree {degree} is {found_rows}x{found_cols}, expected {expected_rows}x{expected_cols}")]
    PairingShape {
        name: String,
        degree: usize,
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("manifold {name}: pairing at degree {degree} is degenerate (rank {rank} of {dim})")]
    PairingDegenerate {
        name: String,
        degree: usize,
        rank: usize,
        dim: usize,
    },
    #[error("manifold {name}: Hodge column has {found} entries, expected {expected}")]
    HodgeColumnLength {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("manifold {name} has dimension {found}, this invariant needs dimension {expected}")]
    WrongDimension {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("manifold {name} is not closed; global invariants here need a closed manifold")]
    NotClosed { name: String },
    #[error("manifold {name} is not oriented")]
    NotOriented { name: String },
    #[error("manifold {name} is not marked admissible for Dolbeault-type invariants")]
    NotAdmissible { name: String },
    #[error("algebra {name} is two-periodically graded; integer degrees are required here")]
    NotIntegerGraded { name: String },
    #[error("no finite commutative dg model is catalogued for {name}, so the nonabelian compactification cannot be formed")]
    NoDgModel { name: String },
    #[error(transparent)]
    DgLie(#[from] crate::dglie::DgLieError),
    #[error(transparent)]
    Ce(#[from] crate::ce::CeError),
    #[error(transparent)]
    Weyl(#[from] crate::weyl::WeylError),
    #[error(transparent)]
    Vacua(#[from] crate::vacua::VacuaError),
}

/// Which cohomology theory a manifold record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CohomologyFlavor {
    DeRham,
    Dolbeault,
}

/// Cohomology-level data of a manifold: the only geometric input this crate
/// accepts.
///
/// `betti[k]` is the dimension of `H^k`; for the Dolbeault flavor it is the
/// Hodge table collapsed to total degree `p + q`, and `h0q` optionally
/// retains the `h^{0,q}` column for holomorphic Euler-characteristic
/// parities. `pairing` maps a degree `k` to the matrix of the Poincaré
/// pairing `H^k × H^{dim-k} → k`. Dolbeault admissibility is a recorded
/// assertion about the underlying geometry, not something checked here.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ManifoldData {
    pub name: String,
    pub dim: usize,
    pub flavor: CohomologyFlavor,
    pub betti: Vec<usize>,
    pub chi: i64,
    pub oriented: bool,
    #[serde(default = "default_closed")]
    pub closed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pairing: BTreeMap<String, Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dolbeault_admissible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0q: Option<Vec<usize>>,
}

fn default_closed() -> bool {
    true
}

impl ManifoldData {
    /// Validate internal consistency: graded dimensions spanning `0..=dim`,
    /// the Euler characteristic, and every declared pairing nondegenerate
    /// with the shape `betti[k] × betti[dim-k]`.
    pub fn validate(&self) -> Result<(), FactHomError> {
        if self.betti.len() != self.dim + 1 {
            return Err(FactHomError::BettiLength {
                name: self.name.clone(),
                dim: self.dim,
                expected: self.dim + 1,
                found: self.betti.len(),
            });
        }
        let computed: i64 = self
            .betti
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        if computed != self.chi {
            return Err(FactHomError::ChiMismatch {
                name: self.name.clone(),
                stated: self.chi,
                computed,
            });
        }
        for (key, rows) in &self.pairing {
            let k: usize = key.parse().map_err(|_| FactHomError::PairingDegree {
                name: self.name.clone(),
                key: key.clone(),
                dim: self.dim,
            })?;
            if k > self.dim {
                return Err(FactHomError::PairingDegree {
                    name: self.name.clone(),
                    key: key.clone(),
                    dim: self.dim,
                });
            }
            let expected_rows = self.betti[k];
            let expected_cols = self.betti[self.dim - k];
            let found_rows = rows.len();
            let found_cols = rows.first().map(|r| r.len()).unwrap_or(0);
            if found_rows != expected_rows
                || rows.iter().any(|r| r.len() != expected_cols)
            {
                return Err(FactHomError::PairingShape {
                    name: self.name.clone(),
                    degree: k,
                    expected_rows,
                    expected_cols,
                    found_rows,
                    found_cols,
                });
            }
            let m: Matrix<Rational> = Matrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&x| rint(x)).collect())
                    .collect(),
            )
            .map_err(|_| FactHomError::PairingShape {
                name: self.name.clone(),
                degree: k,
                expected_rows,
                expected_cols,
                found_rows,
                found_cols,
            })?;
            let rank = m.rank();
            if rank < expected_rows.min(expected_cols) || expected_rows != expected_cols {
                return Err(FactHomError::PairingDegenerate {
                    name: self.name.clone(),
                    degree: k,
                    rank,
                    dim: expected_rows,
                });
            }
        }
        if self.flavor == CohomologyFlavor::Dolbeault {
            if let Some(h0q) = &self.h0q {
                let expected = self.dim / 2 + 1;
                if h0q.len() != expected {
                    return Err(FactHomError::HodgeColumnLength {
                        name: self.name.clone(),
                        expected,
                        found: h0q.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Holomorphic Euler characteristic `Σ (-1)^q h^{0,q}` when the Hodge
    /// column is recorded.
    pub fn holomorphic_chi(&self) -> Option<i64> {
        self.h0q.as_ref().map(|col| {
            col.iter()
                .enumerate()
                .map(|(q, &h)| if q % 2 == 0 { h as i64 } else { -(h as i64) })
                .sum()
        })
    }
}

/// Parse and validate a catalogue from JSON text.
pub fn manifold_catalogue_from_json(text: &str) -> Result<Vec<ManifoldData>, FactHomError> {
    let entries: Vec<ManifoldData> = serde_json::from_str(text)?;
    for e in &entries {
        e.validate()?;
    }
    Ok(entries)
}

/// The embedded catalogue of closed manifolds.
pub fn manifold_catalogue() -> Result<Vec<ManifoldData>, FactHomError> {
    manifold_catalogue_from_json(MANIFOLD_CATALOGUE_JSON)
}

/// Look up one manifold of the embedded catalogue by name.
pub fn manifold(name: &str) -> Result<ManifoldData, FactHomError> {
    let catalogue = manifold_catalogue()?;
    catalogue
        .iter()
        .find(|m| m.name == name)
        .cloned()
        .ok_or_else(|| FactHomError::UnknownManifold {
            name: name.to_string(),
            available: catalogue
                .iter()
                .map(|m| m.name.clone())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Coefficient of a degree-`k` cohomology class in the determinant-line
/// degree: `k` for odd `k`, `1 - k` for even `k`.
fn det_coeff(k: i64) -> i64 {
    if k.rem_euclid(2) == 1 {
        k
    } else {
        1 - k
    }
}

/// One degree of the tensor coefficient system in a [`DetLineReport`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DetLineRow {
    pub degree: i64,
    pub dim: usize,
    pub coefficient: i64,
    pub contribution: i64,
}

/// Parity bookkeeping for the Dolbeault flavor, where the Euler
/// characteristic entering the parity statement is ambiguous between the
/// topological and the holomorphic one. Both are reported; `disagree` is set
/// when the recorded data decides both and they differ.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DolbeaultParityNote {
    pub topological_chi: i64,
    pub topological_parity: u8,
    pub holomorphic_chi: Option<i64>,
    pub holomorphic_parity: Option<u8>,
    pub disagree: Option<bool>,
}

/// Degree of the determinant line of a closed four-manifold invariant, with
/// both implementations and the parity cross-check.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DetLineReport {
    pub manifold: String,
    pub flavor: CohomologyFlavor,
    pub algebra: String,
    /// From the closed-form coefficient sum.
    pub degree_shift: i64,
    /// From the per-degree dimension table.
    pub degree_shift_from_table: i64,
    pub implementations_agree: bool,
    pub total_rank: usize,
    pub per_degree: Vec<DetLineRow>,
    pub parity: u8,
    pub chi_tensor: i64,
    pub parity_matches_chi: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dolbeault: Option<DolbeaultParityNote>,
}

/// Degree of the determinant line attached to a closed oriented
/// four-manifold and a finite-dimensional coefficient algebra.
///
/// The coefficient system is `H•(M) ⊗ g`; the degree is
/// `Σ_k c_k · dim H^k` with `c_k = k` for odd `k` and `1 - k` for even `k`.
/// Implemented twice — once directly from that formula and once through an
/// explicit per-degree basis table — and the two results are compared in the
/// report, along with the parity identity against the Euler characteristic
/// of the coefficient system.
pub fn det_line_degree(
    m: &ManifoldData,
    g: &DgLieAlgebra,
) -> Result<DetLineReport, FactHomError> {
    m.validate()?;
    if m.dim != 4 {
        return Err(FactHomError::WrongDimension {
            name: m.name.clone(),
            expected: 4,
            found: m.dim,
        });
    }
    if !m.closed {
        return Err(FactHomError::NotClosed {
            name: m.name.clone(),
        });
    }
    match m.flavor {
        CohomologyFlavor::DeRham => {
            if !m.oriented {
                return Err(FactHomError::NotOriented {
                    name: m.name.clone(),
                });
            }
        }
        CohomologyFlavor::Dolbeault => {
            if m.dolbeault_admissible != Some(true) {
                return Err(FactHomError::NotAdmissible {
                    name: m.name.clone(),
                });
            }
        }
    }
    if g.space().mode() != GradingMode::Integer {
        return Err(FactHomError::NotIntegerGraded {
            name: g.name().to_string(),
        });
    }

    // Implementation one: the coefficient formula, summed over pairs of a
    // cohomological degree and an algebra generator degree.
    let mut shift_formula: i64 = 0;
    for (k, &b) in m.betti.iter().enumerate() {
        for e in g.space().basis() {
            let t = k as i64 + e.degree;
            shift_formula += det_coeff(t) * b as i64;
        }
    }

    // Implementation two: materialize the tensor coefficient system as a
    // graded space and read the answer off its dimension table.
    let mut tensor_basis: Vec<(String, i64)> = Vec::new();
    for (k, &b) in m.betti.iter().enumerate() {
        for i in 0..b {
            for e in g.space().basis() {
                tensor_basis.push((format!("h{k}[{i}]⊗{}", e.label), k as i64 + e.degree));
            }
        }
    }
    let tensor = GradedVectorSpace::integer(tensor_basis);
    let mut shift_table: i64 = 0;
    let mut per_degree = Vec::new();
    for (&degree, &dim) in &tensor.dims_by_degree() {
        let coefficient = det_coeff(degree);
        let contribution: i64 = coefficient * dim as i64;
        shift_table += contribution;
        per_degree.push(DetLineRow {
            degree,
            dim,
            coefficient,
            contribution,
        });
    }

    let chi_tensor: i64 = tensor
        .dims_by_degree()
        .iter()
        .map(|(&d, &n)| if d.rem_euclid(2) == 0 { n as i64 } else { -(n as i64) })
        .sum();
    let parity = shift_formula.rem_euclid(2) as u8;
    let parity_matches_chi = (shift_formula - chi_tensor).rem_euclid(2) == 0;

    let dolbeault = if m.flavor == CohomologyFlavor::Dolbeault {
        let chi_g: i64 = g
            .space()
            .basis()
            .iter()
            .map(|e| if e.degree.rem_euclid(2) == 0 { 1 } else { -1 })
            .sum();
        let holomorphic_chi = m.holomorphic_chi().map(|c| c * chi_g);
        let holomorphic_parity = holomorphic_chi.map(|c| c.rem_euclid(2) as u8);
        let topological_parity = chi_tensor.rem_euclid(2) as u8;
        Some(DolbeaultParityNote {
            topological_chi: chi_tensor,
            topological_parity,
            holomorphic_chi,
            holomorphic_parity,
            disagree: holomorphic_parity.map(|p| p != topological_parity),
        })
    } else {
        None
    };

    Ok(DetLineReport {
        manifold: m.name.clone(),
        flavor: m.flavor,
        algebra: g.name().to_string(),
        degree_shift: shift_formula,
        degree_shift_from_table: shift_table,
        implementations_agree: shift_formula == shift_table,
        total_rank: tensor.dim(),
        per_degree,
        parity,
        chi_tensor,
        parity_matches_chi,
        dolbeault,
    })
}

/// Determinant-line degree after symmetry breaking: the coefficient algebra
/// is the broken gauge algebra of a vacuum point.
pub fn det_line_for_vacuum(
    m: &ManifoldData,
    p: &crate::vacua::VacuumPoint,
) -> Result<DetLineReport, FactHomError> {
    let broken = crate::vacua::broken_gauge_algebra(p)?;
    det_line_degree(m, &broken)
}

/// Graded dimension counts of classical observables over a manifold.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ObservableDimsReport {
    pub manifold: String,
    pub algebra: String,
    /// What the table means: exact observables for an abelian algebra, the
    /// first page of the generator-count filtration otherwise.
    pub label: String,
    pub max_weight: usize,
    pub degree_window: (i64, i64),
    pub generator_degrees: Vec<i64>,
    /// Rows `(weight, degree, dim)` within the window, ascending.
    pub rows: Vec<(usize, i64, u128)>,
}

/// Dimensions of the polynomial observables on the cohomology of the field
/// complex over a closed manifold.
///
/// The generators are dual to `H^k(M) ⊗ g` placed in degree `k + d - 1` and
/// to `H^k(M) ⊗ g*` placed in degree `k - d - 2`, for each cohomological
/// degree `k` and algebra generator degree `d`; the table is the free
/// graded-commutative count on those degrees. For a nonabelian algebra the
/// product on observables is deformed, so the table is labeled as the first
/// page of the generator-count filtration rather than as exact observable
/// dimensions. The result only uses graded dimensions — it is independent of
/// any pairing data the manifold record carries.
pub fn classical_observable_dims(
    m: &ManifoldData,
    g: &DgLieAlgebra,
    max_weight: usize,
    degree_window: (i64, i64),
) -> Result<ObservableDimsReport, FactHomError> {
    m.validate()?;
    if !m.closed {
        return Err(FactHomError::NotClosed {
            name: m.name.clone(),
        });
    }
    if g.space().mode() != GradingMode::Integer {
        return Err(FactHomError::NotIntegerGraded {
            name: g.name().to_string(),
        });
    }
    let mut generator_degrees: Vec<i64> = Vec::new();
    for (k, &b) in m.betti.iter().enumerate() {
        for e in g.space().basis() {
            for _ in 0..b {
                // Field direction H^k ⊗ g shifted down by one, and antifield
                // direction H^k ⊗ g* shifted down by two.
                generator_degrees.push(k as i64 + e.degree - 1);
                generator_degrees.push(k as i64 - e.degree - 2);
            }
        }
    }
    generator_degrees.sort_unstable();
    let table = free_cga_dimension_table(&generator_degrees, max_weight);
    let rows: Vec<(usize, i64, u128)> = table
        .into_iter()
        .filter(|&((_, d), c)| c > 0 && d >= degree_window.0 && d <= degree_window.1)
        .map(|((w, d), c)| (w, d, c))
        .collect();
    let label = if g.is_abelian() {
        "classical observables (free graded-commutative)".to_string()
    } else {
        "E1 page of the generator-count filtration".to_string()
    };
    Ok(ObservableDimsReport {
        manifold: m.name.clone(),
        algebra: g.name().to_string(),
        label,
        max_weight,
        degree_window,
        generator_degrees,
        rows,
    })
}

/// The algebra a closed three-manifold compactification assigns to the
/// transverse direction.
///
/// For an abelian coefficient algebra this is a genuine Weyl algebra on the
/// dual pair of `H•(N)[1] ⊗ g`, returned with its PBW block dimensions. For
/// a nonabelian algebra only the dimension-level skeleton is formed: the
/// cochain complex of `H•(N) ⊗ g` with coefficients in the symmetric
/// algebra of its shifted adjoint module, read off as bi-indexed block
/// dimensions together with the ranks of its first-page differential. The
/// nonabelian case requires a catalogued finite dg model for `N`.
pub fn compactification_algebra(
    n: &ManifoldData,
    g: &DgLieAlgebra,
    cap: usize,
) -> Result<DOTAlgebra, FactHomError> {
    n.validate()?;
    if n.dim != 3 {
        return Err(FactHomError::WrongDimension {
            name: n.name.clone(),
            expected: 3,
            found: n.dim,
        });
    }
    if !n.closed {
        return Err(FactHomError::NotClosed {
            name: n.name.clone(),
        });
    }
    if g.space().mode() != GradingMode::Integer {
        return Err(FactHomError::NotIntegerGraded {
            name: g.name().to_string(),
        });
    }

    if g.is_abelian() {
        // Base space H•(N)[1] ⊗ g.
        let mut basis: Vec<(String, i64)> = Vec::new();
        for (k, &b) in n.betti.iter().enumerate() {
            for i in 0..b {
                for e in g.space().basis() {
                    basis.push((format!("h{k}[{i}]⊗{}", e.label), k as i64 - 1 + e.degree));
                }
            }
        }
        let base = GradedVectorSpace::integer(basis);
        let name = format!("U(H({})[1]⊗{} ⊕ dual)", n.name, g.name());
        let w = WeylAlgebra::on_dual_pair(&name, &base, cap);
        return Ok(DOTAlgebra::from_weyl(&w));
    }

    // Nonabelian: cochains of h = H•(N) ⊗ g with coefficients in
    // Sym(h adjoint, shifted down by one), read at the dimension level.
    let model = cdga_preset(&n.name).map_err(|_| FactHomError::NoDgModel {
        name: n.name.clone(),
    })?;
    let h = tensor_with_cdga(&model, g)?;
    let module = adjoint_module(&h, -1);
    let base_degrees: Vec<i64> = h.space().basis().iter().map(|e| 1 - e.degree).collect();
    let fiber_degrees: Vec<i64> = module.space().basis().iter().map(|e| e.degree).collect();
    let lo = base_degrees
        .iter()
        .chain(fiber_degrees.iter())
        .copied()
        .min()
        .unwrap_or(0)
        .min(0)
        * cap as i64;
    let hi = base_degrees
        .iter()
        .chain(fiber_degrees.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(0)
        * cap as i64;
    let coeffs = CoeffSpec::SymModule { module };
    let complex = build_ce(&h, &coeffs, cap, (lo, hi))?;

    let mut counts: BTreeMap<(usize, usize, i64), u128> = BTreeMap::new();
    let mut first_page: Vec<DotDifferentialRow> = Vec::new();
    for (degree, weight, _) in complex.block_dims() {
        let module_counts = complex
            .monomial_module_counts(degree, weight)
            .unwrap_or_default();
        for mc in module_counts {
            *counts.entry((mc, weight - mc, degree)).or_insert(0) += 1;
        }
        if let Some(d1) = complex.d1_block(degree, weight) {
            let rank = d1.rank();
            if rank > 0 {
                first_page.push(DotDifferentialRow {
                    from_degree: degree,
                    from_weight: weight,
                    to_degree: degree + 1,
                    to_weight: weight + 1,
                    rank,
                });
            }
        }
    }
    let blocks: Vec<DotBlock> = counts
        .into_iter()
        .map(|((fiber, base, degree), dim)| DotBlock {
            fiber_weight: fiber,
            base_weight: base,
            level: fiber as i64 - base as i64,
            degree,
            dim,
        })
        .collect();
    Ok(DOTAlgebra::from_blocks(
        &format!("D-skeleton(B({}⊗H({})))", g.name(), n.name),
        base_degrees,
        fiber_degrees,
        cap,
        Some((lo, hi)),
        blocks,
        first_page,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dglie::preset;
    use crate::vacua::VacuumPoint;
    use crate::weyl::{dot_check, DotSource};

    #[test]
    fn embedded_catalogue_parses_and_validates() {
        let cat = manifold_catalogue().unwrap();
        assert!(cat.len() >= 12);
        for name in ["S4", "T4", "S2xS2", "CP2", "K3", "S3", "T3", "S1xS2"] {
            assert!(cat.iter().any(|m| m.name == name), "missing {name}");
        }
        let k3 = manifold("K3").unwrap();
        assert_eq!(k3.betti[2], 22);
        assert_eq!(k3.chi, 24);
        assert_eq!(k3.pairing["2"].len(), 22);
    }

    #[test]
    fn validation_rejects_inconsistent_records() {
        let mut bad = manifold("S4").unwrap();
        bad.chi = 5;
        match bad.validate() {
            Err(FactHomError::ChiMismatch {
                stated: 5,
                computed: 2,
                ..
            }) => {}
            other => panic!("expected chi mismatch, got {other:?}"),
        }
        let mut degenerate = manifold("CP2").unwrap();
        degenerate.pairing.insert("2".into(), vec![vec![0]]);
        match degenerate.validate() {
            Err(FactHomError::PairingDegenerate { degree: 2, .. }) => {}
            other => panic!("expected degenerate pairing, got {other:?}"),
        }
        let mut misshapen = manifold("S2xS2").unwrap();
        misshapen.pairing.insert("2".into(), vec![vec![1]]);
        assert!(matches!(
            misshapen.validate(),
            Err(FactHomError::PairingShape { .. })
        ));
    }

    #[test]
    fn unknown_manifold_lists_the_catalogue() {
        match manifold("nosuch") {
            Err(FactHomError::UnknownManifold { available, .. }) => {
                assert!(available.contains("S4"));
                assert!(available.contains("K3"));
            }
            other => panic!("expected unknown manifold, got {other:?}"),
        }
    }

    #[test]
    fn det_line_degrees_match_the_closed_forms() {
        let expectations = [
            ("S4", [-2i64, -6, -16]),
            ("T4", [8, 24, 64]),
            ("S2xS2", [-4, -12, -32]),
            ("CP2", [-3, -9, -24]),
            ("K3", [-24, -72, -192]),
        ];
        let algebras = ["abelian:1", "sl2", "sl3"];
        for (mname, expected) in expectations {
            let m = manifold(mname).unwrap();
            for (g, want) in algebras.iter().zip(expected) {
                let g = preset(g).unwrap();
                let r = det_line_degree(&m, &g).unwrap();
                assert_eq!(r.degree_shift, want, "{mname} with {}", g.name());
                assert!(r.implementations_agree);
                assert_eq!(r.degree_shift_from_table, want);
                assert!(r.parity_matches_chi);
            }
        }
    }

    #[test]
    fn det_line_rejects_bad_inputs() {
        let sl2 = preset("sl2").unwrap();
        let s3 = manifold("S3").unwrap();
        assert!(matches!(
            det_line_degree(&s3, &sl2),
            Err(FactHomError::WrongDimension {
                expected: 4,
                found: 3,
                ..
            })
        ));
        let mut unoriented = manifold("S4").unwrap();
        unoriented.oriented = false;
        assert!(matches!(
            det_line_degree(&unoriented, &sl2),
            Err(FactHomError::NotOriented { .. })
        ));
        let mut open = manifold("S4").unwrap();
        open.closed = false;
        assert!(matches!(
            det_line_degree(&open, &sl2),
            Err(FactHomError::NotClosed { .. })
        ));
    }

    #[test]
    fn dolbeault_reports_both_parities() {
        let sl2 = preset("sl2").unwrap();
        let t4d = manifold("t4dolb").unwrap();
        let r = det_line_degree(&t4d, &sl2).unwrap();
        assert_eq!(r.degree_shift, 24);
        let note = r.dolbeault.expect("dolbeault note");
        assert_eq!(note.topological_parity, 0);
        assert_eq!(note.holomorphic_parity, Some(0));
        assert_eq!(note.disagree, Some(false));

        let hopf = manifold("hopf").unwrap();
        let r = det_line_degree(&hopf, &sl2).unwrap();
        assert_eq!(r.degree_shift, 6);
        assert!(r.dolbeault.is_some());
    }

    #[test]
    fn observables_over_a_point_use_two_generator_degrees() {
        let pt = manifold("point").unwrap();
        let ab1 = preset("abelian:1").unwrap();
        let r = classical_observable_dims(&pt, &ab1, 3, (-10, 0)).unwrap();
        assert_eq!(r.generator_degrees, vec![-2, -1]);
        assert!(r.label.contains("free graded-commutative"));
        // Weight zero is the unit in degree zero.
        assert!(r.rows.contains(&(0, 0, 1)));
        // Weight one: one odd and one even generator.
        assert!(r.rows.contains(&(1, -1, 1)));
        assert!(r.rows.contains(&(1, -2, 1)));
        // Weight two: θ², x θ, x².
        assert!(r.rows.contains(&(2, -3, 1)));
        assert!(r.rows.contains(&(2, -4, 1)));
        assert!(!r.rows.contains(&(2, -2, 1)));
    }

    #[test]
    fn observables_label_flags_nonabelian_and_ignore_pairings() {
        let sl2 = preset("sl2").unwrap();
        let m = manifold("S2xS2").unwrap();
        let with = classical_observable_dims(&m, &sl2, 2, (-8, 8)).unwrap();
        assert!(with.label.contains("E1 page"));
        let mut stripped = m.clone();
        stripped.pairing.clear();
        let without = classical_observable_dims(&stripped, &sl2, 2, (-8, 8)).unwrap();
        assert_eq!(with.rows, without.rows);
    }

    #[test]
    fn abelian_compactification_of_the_three_sphere() {
        let s3 = manifold("S3").unwrap();
        let ab1 = preset("abelian:1").unwrap();
        let dot = compactification_algebra(&s3, &ab1, 4).unwrap();
        assert_eq!(dot.source(), DotSource::AbelianWeyl);
        let w = dot.weyl().expect("abelian case carries the Weyl algebra");
        // Two base generators in degrees -1 and 2, and their duals.
        assert_eq!(w.base_degrees(), vec![-1, 2]);
        assert_eq!(w.fiber_degrees(), vec![1, -2]);
        // Dual pairs have graded commutator one.
        for i in 0..2 {
            let c = w
                .graded_commutator(&w.gen_element(2 + i), &w.gen_element(i))
                .unwrap();
            assert_eq!(c, w.one(), "pair {i}");
        }
        assert!(dot_check(&dot).all_pass);
        w.gr_matches_free_cga().unwrap();
    }

    #[test]
    fn abelian_compactification_of_the_three_torus() {
        let t3 = manifold("T3").unwrap();
        let ab1 = preset("abelian:1").unwrap();
        let dot = compactification_algebra(&t3, &ab1, 2).unwrap();
        let w = dot.weyl().unwrap();
        assert_eq!(w.base_dim(), 8);
        assert_eq!(w.dim(), 16);
        // Level-one PBW count is the generator count.
        let level1: u128 = w
            .pbw_dims()
            .iter()
            .filter(|((l, _), _)| *l == 1)
            .map(|(_, c)| *c)
            .sum();
        assert_eq!(level1, 16);
        assert!(dot_check(&dot).all_pass);
    }

    #[test]
    fn nonabelian_compactification_skeleton_checks_out() {
        let s3 = manifold("S3").unwrap();
        let sl2 = preset("sl2").unwrap();
        let dot = compactification_algebra(&s3, &sl2, 3).unwrap();
        assert_eq!(dot.source(), DotSource::CeSkeleton);
        assert!(dot.weyl().is_none());
        assert!(!dot.first_page().is_empty(), "bracket differential missing");
        let report = dot_check(&dot);
        assert!(report.all_pass, "failing rows: {:?}", report);

        // Corrupting a block is localized to its rows.
        let bad = dot.blocks()[3].clone();
        let corrupted = dot.corrupt_block(3, bad.dim + 1);
        let report = dot_check(&corrupted);
        assert!(!report.all_pass);
        for row in &report.fiber_rows {
            let is_victim = row.fiber_weight == bad.fiber_weight
                && row.base_weight == bad.base_weight
                && row.degree == bad.degree;
            assert_eq!(row.pass, !is_victim);
        }
    }

    #[test]
    fn compactification_rejects_wrong_dimensions() {
        let sl2 = preset("sl2").unwrap();
        for name in ["S4", "T2", "point"] {
            let m = manifold(name).unwrap();
            assert!(matches!(
                compactification_algebra(&m, &sl2, 3),
                Err(FactHomError::WrongDimension { expected: 3, .. })
            ));
        }
    }

    #[test]
    fn det_line_after_symmetry_breaking() {
        let gl2 = preset("gl2").unwrap();
        // Regular semisimple vacuum: the centralizer is a two-dimensional
        // torus, so every coefficient degree doubles the abelian answer.
        let x = crate::vacua::coords_from_matrix(
            &gl2,
            &Matrix::from_rows(vec![
                vec![rint(1), rint(0)],
                vec![rint(0), rint(2)],
            ])
            .unwrap(),
        )
        .unwrap();
        let p = VacuumPoint::new(gl2, x, "diag(1,2)").unwrap();
        let m = manifold("S4").unwrap();
        let r = det_line_for_vacuum(&m, &p).unwrap();
        assert_eq!(r.degree_shift, -4);
        assert!(r.implementations_agree);
    }
}
