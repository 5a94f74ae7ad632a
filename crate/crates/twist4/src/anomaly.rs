//! Diagram combinatorics of cotangent theories and the algebraic weights of
//! one-loop anomalies: graph classification, tadpole traces, supertrace
//! invariant polynomials, and the shifted-copy cancellation theorem.
//!
//! The quantitative content is small and exact: the weight attached to a
//! wheel with `v` internal vertices at the element `X` is the supertrace of
//! `(ad_X)^v` over the gauge algebra, and adjoining a degree-shifted copy of
//! the algebra makes every such supertrace vanish identically because the
//! shifted block contributes the same diagonal with opposite parity. The
//! report operation both samples this exactly and verifies the block
//! structure that proves it for all `X` at once.

use crate::dglie::{DgLieAlgebra, DgLieError};
use crate::graded::{flat_supertrace, GradedError};
use crate::linalg::LinalgError;
use crate::scalar::{rint, Rational};
use num_traits::Zero;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Errors from graph validation and weight evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum AnomalyError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("edge references vertex {vertex}, but the graph declares {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("vertex {vertex} is isolated (valence 0)")]
    IsolatedVertex { vertex: usize },
    #[error("graph is not connected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },
    #[error("external leg {vertex} has valence {valence}, expected exactly 1")]
    ExternalValence { vertex: usize, valence: usize },
    #[error("external leg {vertex} is not a declared vertex")]
    ExternalOutOfRange { vertex: usize },
    #[error("algebra {algebra} carries no invariant pairing, which supplies the edge factor of the wheel weight")]
    MissingPairing { algebra: String },
    #[error("invariant pairing of {algebra} is degenerate: rank {rank} < dimension {dim}")]
    DegeneratePairing {
        algebra: String,
        rank: usize,
        dim: usize,
    },
    #[error("wheel power must be at least 1")]
    PowerZero,
    #[error("element has a component on the odd basis vector {label}; wheel weights are defined on the even part")]
    OddComponent { label: String },
    #[error("coordinate vector has length {found}, algebra dimension is {expected}")]
    CoordinateLength { expected: usize, found: usize },
    #[error("delta degree must be +1 or -1, found {found}")]
    BadDeltaDegree { found: i64 },
    #[error(transparent)]
    DgLie(#[from] DgLieError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// A connected directed multigraph with distinguished univalent external
/// legs. Edge orientation records the propagator polarization: admissible
/// diagrams of a cotangent theory allow at most one incoming edge per
/// vertex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionGraph {
    /// Vertices are `0 .. vertices`.
    pub vertices: usize,
    /// Distinguished external legs; each must have total valence 1.
    pub external: Vec<usize>,
    /// Directed edges `(from, to)`; parallel edges allowed.
    pub edges: Vec<(usize, usize)>,
}

impl InteractionGraph {
    pub fn new(
        vertices: usize,
        external: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, AnomalyError> {
        let g = InteractionGraph {
            vertices,
            external,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    /// Check the structural invariants: declared vertices, no isolated
    /// vertices, connectivity, and univalent external legs.
    pub fn validate(&self) -> Result<(), AnomalyError> {
        if self.vertices == 0 {
            return Err(AnomalyError::EmptyGraph);
        }
        for &(a, b) in &self.edges {
            for v in [a, b] {
                if v >= self.vertices {
                    return Err(AnomalyError::VertexOutOfRange {
                        vertex: v,
                        count: self.vertices,
                    });
                }
            }
        }
        for &v in &self.external {
            if v >= self.vertices {
                return Err(AnomalyError::ExternalOutOfRange { vertex: v });
            }
        }
        let mut valence = vec![0usize; self.vertices];
        for &(a, b) in &self.edges {
            valence[a] += 1;
            valence[b] += 1;
        }
        if let Some(v) = valence.iter().position(|&x| x == 0) {
            return Err(AnomalyError::IsolatedVertex { vertex: v });
        }
        for &v in &self.external {
            if valence[v] != 1 {
                return Err(AnomalyError::ExternalValence {
                    vertex: v,
                    valence: valence[v],
                });
            }
        }
        // Connectivity in the undirected sense.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(AnomalyError::Disconnected { vertex: v });
        }
        Ok(())
    }

    fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.vertices];
        for &(_, b) in &self.edges {
            d[b] += 1;
        }
        d
    }
}

/// Classification of an interaction graph in a cotangent theory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum GraphClass {
    /// No directed cycle: the diagram is a tree.
    Tree,
    /// Exactly one directed cycle with outgoing trees attached.
    WheelWithTrees { loop_length: usize },
    /// Some vertex receives two or more edges; the diagram weight vanishes.
    Inadmissible { vertex: usize },
}

/// Classify a validated graph: at most one incoming edge everywhere means
/// the incoming edges define a partial predecessor map, whose unique cycle
/// (if any) is the wheel.
pub fn classify_graph(g: &InteractionGraph) -> Result<GraphClass, AnomalyError> {
    g.validate()?;
    let in_deg = g.in_degrees();
    if let Some(v) = in_deg.iter().position(|&d| d >= 2) {
        return Ok(GraphClass::Inadmissible { vertex: v });
    }
    // Unique predecessor per vertex (if any).
    let mut pred: Vec<Option<usize>> = vec![None; g.vertices];
    for &(a, b) in &g.edges {
        pred[b] = Some(a);
    }
    // Walk predecessors with coloring to find the unique cycle.
    let mut color = vec![0u8; g.vertices]; // 0 new, 1 on path, 2 done
    for start in 0..g.vertices {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        loop {
            if color[v] == 1 {
                // Found a cycle: measure from the first occurrence of v.
                let pos = path.iter().position(|&p| p == v).expect("on current path");
                let len = path.len() - pos;
                return Ok(GraphClass::WheelWithTrees { loop_length: len });
            }
            if color[v] == 2 {
                break;
            }
            color[v] = 1;
            path.push(v);
            match pred[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        for p in path {
            color[p] = 2;
        }
    }
    Ok(GraphClass::Tree)
}

/// The tadpole weight of an element: the supertrace of its adjoint action.
/// Vanishes identically on unimodular (in particular reductive) algebras.
pub fn tadpole_weight(g: &DgLieAlgebra, x: &[Rational]) -> Result<Rational, AnomalyError> {
    let ad = g.ad_matrix(x)?;
    Ok(flat_supertrace(g.space(), &ad)?)
}

fn require_even(l: &DgLieAlgebra, x: &[Rational]) -> Result<(), AnomalyError> {
    if x.len() != l.dim() {
        return Err(AnomalyError::CoordinateLength {
            expected: l.dim(),
            found: x.len(),
        });
    }
    for (i, c) in x.iter().enumerate() {
        if !c.is_zero() && l.space().parity(i) == 1 {
            return Err(AnomalyError::OddComponent {
                label: l.space().label(i).to_string(),
            });
        }
    }
    Ok(())
}

/// The algebraic weight of a wheel with `v` internal vertices at the even
/// element `X`: the supertrace of `(ad_X)^v`. The invariant pairing is
/// required because it supplies the algebraic edge factor in the derivation
/// of this formula.
pub fn wheel_algebraic_weight(
    l: &DgLieAlgebra,
    v: usize,
    x: &[Rational],
) -> Result<Rational, AnomalyError> {
    if v == 0 {
        return Err(AnomalyError::PowerZero);
    }
    let Some(pairing) = l.pairing() else {
        return Err(AnomalyError::MissingPairing {
            algebra: l.name().to_string(),
        });
    };
    let rank = pairing.gram.rank();
    if rank != l.dim() {
        return Err(AnomalyError::DegeneratePairing {
            algebra: l.name().to_string(),
            rank,
            dim: l.dim(),
        });
    }
    require_even(l, x)?;
    let ad = l.ad_matrix(x)?;
    Ok(flat_supertrace(l.space(), &ad.pow(v)?)?)
}

/// One structural verification: that the extended algebra splits blockwise
/// as the base plus a parity-flipped copy under `ad_X`, which forces every
/// wheel weight to cancel between the two blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockCancellation {
    pub diagonal_blocks_equal: bool,
    pub cross_blocks_zero: bool,
    pub parity_flipped: bool,
}

impl BlockCancellation {
    pub fn proves_vanishing(&self) -> bool {
        self.diagonal_blocks_equal && self.cross_blocks_zero && self.parity_flipped
    }
}

/// Verify on matrices that `ad_X` over the extension `L = L' ⊕ L'·δ`
/// (basis: the first `half` indices unshifted, the rest shifted) has equal
/// diagonal blocks, vanishing cross blocks, and opposite parities between
/// the halves. When all three hold, `str (ad_X)^v = tr_even - tr_odd`
/// cancels between the blocks for every `v`, proving the wheel weights
/// vanish for all powers at once.
pub fn delta_cancellation_check(
    l_ext: &DgLieAlgebra,
    half: usize,
    x: &[Rational],
) -> Result<BlockCancellation, AnomalyError> {
    if x.len() != l_ext.dim() {
        return Err(AnomalyError::CoordinateLength {
            expected: l_ext.dim(),
            found: x.len(),
        });
    }
    let n = l_ext.dim();
    let ad = l_ext.ad_matrix(x)?;
    let mut diag_equal = n == 2 * half;
    let mut cross_zero = n == 2 * half;
    let mut parity_flip = n == 2 * half;
    if n == 2 * half {
        for i in 0..half {
            if l_ext.space().parity(i) == l_ext.space().parity(i + half) {
                parity_flip = false;
            }
            for j in 0..half {
                if ad.at(i, j) != ad.at(i + half, j + half) {
                    diag_equal = false;
                }
                if !ad.at(i, j + half).is_zero() || !ad.at(i + half, j).is_zero() {
                    cross_zero = false;
                }
            }
        }
    }
    Ok(BlockCancellation {
        diagonal_blocks_equal: diag_equal,
        cross_blocks_zero: cross_zero,
        parity_flipped: parity_flip,
    })
}

/// One sampled wheel evaluation in the vanishing report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WheelSample {
    pub v: usize,
    pub sample: usize,
    /// Exact weight, as a rational in lowest terms.
    pub weight: String,
    pub pass: bool,
}

/// Report of the one-loop anomaly-vanishing verification for a shifted-copy
/// extension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub base_algebra: String,
    pub extended_algebra: String,
    pub delta_degree: i64,
    pub v_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<WheelSample>,
    /// Per-sample structural block verification (proves vanishing for all
    /// X and v, making the sampled rows a redundancy).
    pub structural: Vec<BlockCancellation>,
    pub all_pass: bool,
    pub notes: Vec<String>,
}

/// Build `L = L'[δ]`, evaluate every wheel weight up to `v_max` on a
/// seeded deterministic sample of even elements of `L'`, and verify the
/// blockwise cancellation structure that proves vanishing for all `X`.
pub fn anomaly_vanishing_report(
    lprime: &DgLieAlgebra,
    delta_degree: i64,
    v_max: usize,
    samples: usize,
    seed: u64,
) -> Result<AnomalyReport, AnomalyError> {
    if delta_degree != 1 && delta_degree != -1 {
        return Err(AnomalyError::BadDeltaDegree {
            found: delta_degree,
        });
    }
    let l = lprime.epsilon_extend(delta_degree as i8)?;
    let n = lprime.dim();
    let even_indices: Vec<usize> = (0..n).filter(|&i| lprime.space().parity(i) == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeff = Uniform::new_inclusive(-9i64, 9);
    let mut rows = Vec::new();
    let mut structural = Vec::new();
    let mut all_pass = true;
    for s in 0..samples {
        // Even element of L', embedded in the unshifted block of L.
        let mut x = vec![Rational::zero(); l.dim()];
        for &i in &even_indices {
            x[i] = rint(coeff.sample(&mut rng));
        }
        let cancellation = delta_cancellation_check(&l, n, &x)?;
        if !cancellation.proves_vanishing() {
            all_pass = false;
        }
        structural.push(cancellation);
        for v in 1..=v_max {
            let w = wheel_algebraic_weight(&l, v, &x)?;
            let pass = w.is_zero();
            if !pass {
                all_pass = false;
            }
            rows.push(WheelSample {
                v,
                sample: s,
                weight: w.to_string(),
                pass,
            });
        }
    }
    Ok(AnomalyReport {
        base_algebra: lprime.name().to_string(),
        extended_algebra: l.name().to_string(),
        delta_degree,
        v_max,
        samples,
        seed,
        rows,
        structural,
        all_pass,
        notes: vec![
            "The algebraic wheel weight depends only on the gauge algebra, never on the twist parameters; vanishing here covers the whole parameter family at once.".to_string(),
            "The structural block verification proves vanishing for every even element and every power; the sampled rows are a redundancy check.".to_string(),
        ],
    })
}
