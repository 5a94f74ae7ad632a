//! Numeric heat-kernel propagator on flat complex space, with its gauge
//! condition and integration-by-parts witnesses.
//!
//! Everything here is floating point; none of it feeds the exact modules.
//! The regulated propagator on `C^d` is an antiholomorphic form valued in
//! the words of the generators `dz̄_i - dw̄_i`:
//!
//! `P_Λ = Σ_j (-1)^(j-1) c_j · Π_{i≠j} (dz̄_i - dw̄_i)`, with
//! `c_j = (z̄_j - w̄_j)/4 · (2πi)^(-d) · ∫_0^Λ t^(-(d+1)) e^(-r²/4t) dt`.
//!
//! The overall normalization is fixed by the `d = 1` limit: as `Λ → ∞` the
//! propagator must reproduce the Cauchy kernel `1/(2πi(z-w))`, which pins
//! both the `1/4` and the `(2πi)^(-d)`; the same convention fixes the signs
//! everywhere else in this module. The proper-time integral is evaluated by
//! adaptive composite Gauss–Legendre quadrature after the substitution
//! `s = 1/t`, which maps `(0, Λ]` to `[1/Λ, ∞)` with exponential decay;
//! quadrature that fails to reach its tolerance is an error, and the
//! truncated tail is bounded analytically below the tolerance.

use crate::exterior::{ExtSum, ExtWord};
use num::complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Tolerance for matching the `d = 1` propagator against the exact Cauchy
/// kernel at cutoff `Λ = 10^6 r²`, where the truncated-tail deficit is a
/// relative `≈ 2.5·10^-7` and quadrature error is far smaller.
pub const CAUCHY_MATCH_TOL: f64 = 1e-6;

/// Tolerance for translation invariance of evaluated components; the
/// displacement is reassembled from shifted floats, so this is rounding
/// noise, not quadrature error.
pub const TRANSLATION_TOL: f64 = 1e-10;

/// Tolerance for the integration-by-parts pairing of two Schwartz-class
/// test functions on the truncated plane: the Gaussian tails beyond the
/// integration box are below `10^-16`, so the budget is quadrature error.
pub const BY_PARTS_TOL: f64 = 1e-8;

/// Tolerance for the negative control, whose answer is a nonzero boundary
/// term computed in closed form.
pub const NEGATIVE_CONTROL_TOL: f64 = 1e-6;

/// Residual tolerance for the finite-difference gauge-condition check with
/// central differences of step [`GAUGE_FD_STEP`]: the scheme's `h²` error
/// near order-one components sits around `10^-8`, three orders below this.
pub const GAUGE_FD_TOL: f64 = 1e-5;

/// Central-difference step for the numeric gauge-condition check.
pub const GAUGE_FD_STEP: f64 = 1e-4;

/// Errors raised by the numeric propagator machinery.
#[derive(Debug, thiserror::Error)]
pub enum HeatError {
    #[error("quadrature spec invalid: {reason}")]
    InvalidSpec { reason: String },
    #[error("Gauss–Legendre order {points} is not tabulated; available: 2, 4, 8, 16")]
    UnsupportedGaussOrder { points: usize },
    #[error("point dimensions differ: {z_len} vs {w_len}")]
    DimensionMismatch { z_len: usize, w_len: usize },
    #[error("points must have at least one complex coordinate")]
    EmptyPoint,
    #[error("quadrature did not converge: estimated error {estimated_error:e} above tolerance {abs_tol:e} after {refinements} refinements")]
    NotConverged {
        estimated_error: f64,
        abs_tol: f64,
        refinements: usize,
    },
}

/// How to integrate the proper-time parameter: cutoff, tolerance, and the
/// composite Gauss–Legendre refinement policy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    /// Proper-time cutoff `Λ` of the regulated propagator.
    pub lambda: f64,
    /// Absolute tolerance on the proper-time integral.
    pub abs_tol: f64,
    /// Points per Gauss–Legendre panel (2, 4, 8, or 16).
    pub gauss_points: usize,
    /// Maximum number of panel doublings before giving up.
    pub max_refinements: usize,
}

impl QuadratureSpec {
    /// Spec with default Gauss order 8 and thirty refinements.
    pub fn new(lambda: f64, abs_tol: f64) -> Result<QuadratureSpec, HeatError> {
        let spec = QuadratureSpec {
            lambda,
            abs_tol,
            gauss_points: 8,
            max_refinements: 30,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HeatError> {
        // `is_finite` + explicit positivity also rejects NaN inputs.
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(HeatError::InvalidSpec {
                reason: format!("cutoff must be positive and finite, got {}", self.lambda),
            });
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(HeatError::InvalidSpec {
                reason: format!("tolerance must be positive and finite, got {}", self.abs_tol),
            });
        }
        gauss_table(self.gauss_points).map(|_| ())
    }
}

/// Positive half of a symmetric Gauss–Legendre rule on `[-1, 1]`:
/// `(node, weight)` pairs, mirrored with equal weights at `-node`.
fn gauss_table(points: usize) -> Result<&'static [(f64, f64)], HeatError> {
    const N2: &[(f64, f64)] = &[(0.5773502691896257, 1.0)];
    const N4: &[(f64, f64)] = &[
        (0.3399810435848563, 0.6521451548625461),
        (0.8611363115940526, 0.3478548451374538),
    ];
    const N8: &[(f64, f64)] = &[
        (0.1834346424956498, 0.362_683_783_378_362),
        (0.525_532_409_916_329, 0.3137066458778873),
        (0.7966664774136267, 0.2223810344533745),
        (0.9602898564975363, 0.1012285362903763),
    ];
    const N16: &[(f64, f64)] = &[
        (0.0950125098376374, 0.1894506104550685),
        (0.2816035507792589, 0.1826034150449236),
        (0.4580167776572274, 0.1691565193950025),
        (0.6178762444026438, 0.1495959888165767),
        (0.755_404_408_355_003, 0.1246289712555339),
        (0.8656312023878318, 0.0951585116824928),
        (0.9445750230732326, 0.0622535239386479),
        (0.9894009349916499, 0.0271524594117541),
    ];
    match points {
        2 => Ok(N2),
        4 => Ok(N4),
        8 => Ok(N8),
        16 => Ok(N16),
        other => Err(HeatError::UnsupportedGaussOrder { points: other }),
    }
}

/// Composite Gauss–Legendre rule with `panels` equal panels on `[lo, hi]`.
pub fn composite_gauss(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    panels: usize,
    gauss_points: usize,
) -> Result<f64, HeatError> {
    let table = gauss_table(gauss_points)?;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + width * p as f64;
        let mid = a + width / 2.0;
        let half = width / 2.0;
        for &(x, wgt) in table {
            total += wgt * half * (f(mid + half * x) + f(mid - half * x));
        }
    }
    Ok(total)
}

/// Outcome of one adaptive integration: the refinement history that
/// produced the accepted value.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureReport {
    pub value: f64,
    pub panels: usize,
    pub refinements: usize,
    pub estimated_error: f64,
}

/// Adaptive composite Gauss–Legendre on `[lo, hi]`: double the panel count
/// until two successive composites differ by less than the tolerance.
pub fn integrate_adaptive(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureReport, HeatError> {
    spec.validate()?;
    let mut panels = 4usize;
    let mut previous = composite_gauss(f, lo, hi, panels, spec.gauss_points)?;
    let mut last_error = f64::INFINITY;
    for refinement in 1..=spec.max_refinements {
        panels *= 2;
        let current = composite_gauss(f, lo, hi, panels, spec.gauss_points)?;
        last_error = (current - previous).abs();
        if last_error < spec.abs_tol {
            return Ok(QuadratureReport {
                value: current,
                panels,
                refinements: refinement,
                estimated_error: last_error,
            });
        }
        previous = current;
    }
    Err(HeatError::NotConverged {
        estimated_error: last_error,
        abs_tol: spec.abs_tol,
        refinements: spec.max_refinements,
    })
}

/// The proper-time integral `I_d(Λ, r²) = ∫_0^Λ t^(-(d+1)) e^(-r²/4t) dt`,
/// evaluated as `∫_{1/Λ}^∞ s^(d-1) e^(-r²s/4) ds` after `s = 1/t`.
///
/// The upper limit is truncated at a point where the analytic tail bound
/// falls below a tenth of the tolerance, and the remaining finite integral
/// is done adaptively. Requires `r² > 0`.
fn radial_integral(
    d: usize,
    r_squared: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureReport, HeatError> {
    let a = r_squared / 4.0;
    let s_lo = 1.0 / spec.lambda;
    // Closed-form tail of ∫_S^∞ s^(d-1) e^(-as) ds for integer d ≥ 1.
    let tail = |s: f64| -> f64 {
        let mut sum = 0.0;
        let mut factor = 1.0; // (d-1)! / (d-1-k)!
        for k in 0..d {
            sum += factor * s.powi((d - 1 - k) as i32) / a.powi(k as i32 + 1);
            factor *= (d - 1 - k) as f64;
        }
        (-a * s).exp() * sum
    };
    let mut s_hi = (s_lo * 2.0).max(1.0);
    while tail(s_hi) > spec.abs_tol / 10.0 {
        s_hi *= 2.0;
    }
    let integrand = move |s: f64| s.powi(d as i32 - 1) * (-a * s).exp();
    integrate_adaptive(&integrand, s_lo, s_hi, spec)
}

/// The regulated propagator at a pair of points: an antiholomorphic form
/// over the generator words, with the quadrature history attached.
#[derive(Debug, Clone)]
pub struct PropagatorValue {
    pub dim: usize,
    /// Form expansion over words in the generators `dz̄_i - dw̄_i`.
    pub form: ExtSum<Complex64>,
    pub r_squared: f64,
    pub lambda: f64,
    /// Absent exactly when the points coincide and the value is exactly 0.
    pub quadrature: Option<QuadratureReport>,
}

impl PropagatorValue {
    /// Coefficient of the word omitting generator `j`.
    pub fn component(&self, j: usize) -> Complex64 {
        let indices: Vec<u32> = (0..self.dim as u32).filter(|&i| i != j as u32).collect();
        let (word, sign) = ExtWord::canonicalize(&indices).expect("distinct indices");
        self.form.coeff(&word) * Complex64::new(sign as f64, 0.0)
    }
}

/// Evaluate the regulated propagator on `C^d` at `(z, w)`.
///
/// Coincident points give exactly zero without touching the quadrature; the
/// displacement factors vanish identically there.
pub fn propagator_eval(
    z: &[Complex64],
    w: &[Complex64],
    spec: &QuadratureSpec,
) -> Result<PropagatorValue, HeatError> {
    spec.validate()?;
    if z.len() != w.len() {
        return Err(HeatError::DimensionMismatch {
            z_len: z.len(),
            w_len: w.len(),
        });
    }
    let d = z.len();
    if d == 0 {
        return Err(HeatError::EmptyPoint);
    }
    let r_squared: f64 = z
        .iter()
        .zip(w)
        .map(|(zi, wi)| (zi - wi).norm_sqr())
        .sum();
    if r_squared == 0.0 {
        return Ok(PropagatorValue {
            dim: d,
            form: ExtSum::zero(),
            r_squared,
            lambda: spec.lambda,
            quadrature: None,
        });
    }
    let quad = radial_integral(d, r_squared, spec)?;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let prefactor = two_pi_i.powi(d as i32).inv();
    let mut form = ExtSum::zero();
    for j in 0..d {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let displacement = (z[j] - w[j]).conj();
        let coeff = displacement * sign * prefactor * (quad.value / 4.0);
        let indices: Vec<u32> = (0..d as u32).filter(|&i| i != j as u32).collect();
        let (word, wsign) = ExtWord::canonicalize(&indices).expect("distinct indices");
        form.add_term(word, coeff * Complex64::new(wsign as f64, 0.0));
    }
    Ok(PropagatorValue {
        dim: d,
        form,
        r_squared,
        lambda: spec.lambda,
        quadrature: Some(quad),
    })
}

/// The exact `d = 1` reference at finite cutoff: the Cauchy kernel with the
/// closed-form truncated tail,
/// `conj(z-w)/(2πi r²) · e^(-r²/4Λ)`.
pub fn cauchy_reference(z: Complex64, w: Complex64, lambda: f64) -> Complex64 {
    let displacement = z - w;
    let r_squared = displacement.norm_sqr();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    displacement.conj() / (two_pi_i * r_squared) * (-r_squared / (4.0 * lambda)).exp()
}

/// The unregulated Cauchy kernel `1/(2πi(z-w))`.
pub fn cauchy_kernel(z: Complex64, w: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * (z - w)).inv()
}

/// A planar test function together with its antiholomorphic derivative
/// `∂_w̄ f`, supplied analytically by the catalogue.
pub struct TestFunction {
    pub name: String,
    pub f: Box<dyn Fn(Complex64) -> Complex64>,
    pub dbar: Box<dyn Fn(Complex64) -> Complex64>,
}

/// `e^(-|w|²)`, with `∂_w̄ = -w · e^(-|w|²)`.
pub fn gaussian() -> TestFunction {
    TestFunction {
        name: "exp(-|w|^2)".to_string(),
        f: Box::new(|w| Complex64::new((-w.norm_sqr()).exp(), 0.0)),
        dbar: Box::new(|w| -w * (-w.norm_sqr()).exp()),
    }
}

/// `w · e^(-|w|²)`, with `∂_w̄ = -w² e^(-|w|²)`.
pub fn moment_gaussian() -> TestFunction {
    TestFunction {
        name: "w exp(-|w|^2)".to_string(),
        f: Box::new(|w| w * (-w.norm_sqr()).exp()),
        dbar: Box::new(|w| -w * w * (-w.norm_sqr()).exp()),
    }
}

/// `e^(-|w-c|²)`, with `∂_w̄ = -(w-c) e^(-|w-c|²)`.
pub fn shifted_gaussian(c: Complex64) -> TestFunction {
    TestFunction {
        name: format!("exp(-|w-({c})|^2)"),
        f: Box::new(move |w| Complex64::new((-(w - c).norm_sqr()).exp(), 0.0)),
        dbar: Box::new(move |w| -(w - c) * (-(w - c).norm_sqr()).exp()),
    }
}

/// The constant `1`, whose `∂_w̄` vanishes.
pub fn constant_one() -> TestFunction {
    TestFunction {
        name: "1".to_string(),
        f: Box::new(|_| Complex64::new(1.0, 0.0)),
        dbar: Box::new(|_| Complex64::new(0.0, 0.0)),
    }
}

/// The antiholomorphic coordinate `w̄`, with `∂_w̄ = 1`. Not Schwartz class:
/// this is the negative control, whose by-parts pairing equals a boundary
/// term instead of vanishing.
pub fn antiholomorphic_coordinate() -> TestFunction {
    TestFunction {
        name: "conj(w)".to_string(),
        f: Box::new(|w| w.conj()),
        dbar: Box::new(|_| Complex64::new(1.0, 0.0)),
    }
}

/// Tensor-product Gauss–Legendre grid on the square
/// `[-half_width, half_width]²` identified with a patch of `C`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlanarGrid {
    pub half_width: f64,
    pub panels_per_axis: usize,
    pub gauss_points: usize,
}

impl PlanarGrid {
    /// Default grid for Schwartz-class integrands of order-one width:
    /// `[-7, 7]²` with 24 panels of 8-point Gauss per axis, which resolves
    /// unit Gaussians to well below [`BY_PARTS_TOL`].
    pub fn standard() -> PlanarGrid {
        PlanarGrid {
            half_width: 7.0,
            panels_per_axis: 24,
            gauss_points: 8,
        }
    }

    /// Integrate a complex-valued function over the square against the area
    /// measure `dx dy`.
    pub fn integrate(
        &self,
        f: &dyn Fn(Complex64) -> Complex64,
    ) -> Result<Complex64, HeatError> {
        let table = gauss_table(self.gauss_points)?;
        let lo = -self.half_width;
        let width = 2.0 * self.half_width / self.panels_per_axis as f64;
        // One-dimensional nodes and weights, expanded once.
        let mut nodes: Vec<(f64, f64)> = Vec::new();
        for p in 0..self.panels_per_axis {
            let mid = lo + width * (p as f64 + 0.5);
            let half = width / 2.0;
            for &(x, wgt) in table {
                nodes.push((mid + half * x, wgt * half));
                nodes.push((mid - half * x, wgt * half));
            }
        }
        let mut total = Complex64::new(0.0, 0.0);
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                total += f(Complex64::new(x, y)) * (wx * wy);
            }
        }
        Ok(total)
    }
}

/// The two halves of the integration-by-parts pairing and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ByPartsReport {
    pub first: Complex64,
    pub second: Complex64,
    pub sum: Complex64,
    pub magnitude: f64,
}

/// Both halves of `∫ (∂_w̄ f) g dA` and `∫ f (∂_w̄ g) dA` on the grid.
pub fn by_parts_pair(
    f: &TestFunction,
    g: &TestFunction,
    grid: &PlanarGrid,
) -> Result<(Complex64, Complex64), HeatError> {
    let first = grid.integrate(&|w| (f.dbar)(w) * (g.f)(w))?;
    let second = grid.integrate(&|w| (f.f)(w) * (g.dbar)(w))?;
    Ok((first, second))
}

/// The integration-by-parts sum `∫ (∂_w̄ f) g + f (∂_w̄ g) dA`.
///
/// For Schwartz-class `f, g` this is a pure boundary term at infinity and
/// vanishes below [`BY_PARTS_TOL`]; for the negative-control pair it equals
/// the explicit boundary term instead.
pub fn by_parts_vanishing(
    f: &TestFunction,
    g: &TestFunction,
    grid: &PlanarGrid,
) -> Result<ByPartsReport, HeatError> {
    let (first, second) = by_parts_pair(f, g, grid)?;
    let sum = first + second;
    Ok(ByPartsReport {
        first,
        second,
        sum,
        magnitude: sum.norm(),
    })
}

/// Result of the symbolic divergence of the propagator form.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GaugeSymbolicReport {
    pub dim: usize,
    pub terms_before_cancellation: usize,
    pub exact_zero: bool,
}

/// Apply the codifferential to the propagator symbolically and verify that
/// it cancels identically.
///
/// Every component is `(-1)^(k-1) (z̄_k - w̄_k) φ(r²)` on the word omitting
/// `k`; contracting generator `j ≠ k` and applying `∂_{z_j}` produces the
/// symmetric factor `(z̄_k - w̄_k)(z̄_j - w̄_j) φ'(r²)` — the antiholomorphic
/// displacement is killed by the holomorphic derivative, only the chain rule
/// through `r²` survives. The `(k, j)` and `(j, k)` contributions land on
/// the same word with the same symmetric factor and opposite signs, so the
/// sum cancels exactly, for every `φ`. The cancellation is checked here in
/// integer arithmetic over the form words; `d = 1` has no contractions and
/// is zero trivially.
pub fn gauge_symbolic_check(d: usize) -> GaugeSymbolicReport {
    // Key: (target word, sorted displacement pair {k, j}); value: integer
    // coefficient of the symmetric factor.
    let mut terms: BTreeMap<(Vec<u32>, Vec<u32>), i64> = BTreeMap::new();
    let mut count = 0usize;
    for k in 0..d as u32 {
        let indices: Vec<u32> = (0..d as u32).filter(|&i| i != k).collect();
        let (word, base_sign) = ExtWord::canonicalize(&indices).expect("distinct");
        let component_sign = if k % 2 == 0 { 1i64 } else { -1i64 };
        for j in 0..d as u32 {
            if j == k {
                continue;
            }
            let (reduced, contraction_sign) = word.remove(j).expect("j is in the word");
            let mut pair = vec![k, j];
            pair.sort_unstable();
            let key = (reduced.indices().to_vec(), pair);
            *terms.entry(key).or_insert(0) +=
                component_sign * base_sign * contraction_sign;
            count += 1;
        }
    }
    GaugeSymbolicReport {
        dim: d,
        terms_before_cancellation: count,
        exact_zero: terms.values().all(|&c| c == 0),
    }
}

/// Result of the finite-difference gauge-condition check.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaugeFdReport {
    pub dim: usize,
    pub points: usize,
    pub max_residual: f64,
    pub step: f64,
}

/// Check the gauge condition numerically: at seeded random point pairs,
/// assemble the codifferential of the evaluated propagator from central
/// differences in the holomorphic directions, `∂_z = (∂_x - i ∂_y)/2`, and
/// measure the worst residual over target words.
pub fn gauge_condition_fd(
    d: usize,
    spec: &QuadratureSpec,
    seed: u64,
    points: usize,
) -> Result<GaugeFdReport, HeatError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = GAUGE_FD_STEP;
    let mut max_residual: f64 = 0.0;
    for _ in 0..points {
        // Sample a well-separated pair to keep the components smooth.
        let (z, w) = loop {
            let z: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let w: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let r2: f64 = z.iter().zip(&w).map(|(a, b)| (a - b).norm_sqr()).sum();
            if r2 > 0.3 {
                break (z, w);
            }
        };
        // Residual per target word, accumulated over (component, direction).
        let mut residuals: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for k in 0..d {
            let indices: Vec<u32> = (0..d as u32).filter(|&i| i != k as u32).collect();
            let (word, base_sign) = ExtWord::canonicalize(&indices).expect("distinct");
            for j in 0..d {
                if j == k {
                    continue;
                }
                let (reduced, contraction_sign) =
                    word.remove(j as u32).expect("j is in the word");
                let eval = |dz: Complex64| -> Result<Complex64, HeatError> {
                    let mut zs = z.clone();
                    zs[j] += dz;
                    Ok(propagator_eval(&zs, &w, spec)?.component(k))
                };
                let dx = (eval(Complex64::new(h, 0.0))? - eval(Complex64::new(-h, 0.0))?)
                    / (2.0 * h);
                let dy = (eval(Complex64::new(0.0, h))? - eval(Complex64::new(0.0, -h))?)
                    / (2.0 * h);
                let dz_deriv = (dx - Complex64::new(0.0, 1.0) * dy) / 2.0;
                let sign = (base_sign * contraction_sign) as f64;
                *residuals
                    .entry(reduced.indices().to_vec())
                    .or_insert(Complex64::new(0.0, 0.0)) += dz_deriv * sign;
            }
        }
        for r in residuals.values() {
            max_residual = max_residual.max(r.norm());
        }
    }
    Ok(GaugeFdReport {
        dim: d,
        points,
        max_residual,
        step: h,
    })
}

/// Combined gauge-condition report: the symbolic cancellation and the
/// finite-difference residual.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaugeReport {
    pub symbolic: GaugeSymbolicReport,
    pub fd: GaugeFdReport,
    pub pass: bool,
}

/// Run both halves of the gauge-condition check.
pub fn gauge_condition_check(
    d: usize,
    spec: &QuadratureSpec,
    seed: u64,
    points: usize,
) -> Result<GaugeReport, HeatError> {
    let symbolic = gauge_symbolic_check(d);
    let fd = gauge_condition_fd(d, spec, seed, points)?;
    let pass = symbolic.exact_zero && fd.max_residual < GAUGE_FD_TOL;
    Ok(GaugeReport { symbolic, fd, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coincident_points_give_exact_zero() {
        let spec = QuadratureSpec::new(10.0, 1e-10).unwrap();
        for d in 1..=3 {
            let z: Vec<Complex64> = (0..d).map(|i| c(i as f64, -0.5)).collect();
            let p = propagator_eval(&z, &z, &spec).unwrap();
            assert!(p.form.is_zero());
            assert!(p.quadrature.is_none());
        }
    }

    #[test]
    fn one_dimensional_limit_is_the_cauchy_kernel() {
        let z = c(0.7, 0.3);
        let w = c(-0.2, 0.1);
        let r2 = (z - w).norm_sqr();

        // Against the closed form with the exact truncated tail, the only
        // difference is quadrature error.
        let spec = QuadratureSpec::new(1e4 * r2, 1e-11).unwrap();
        let p = propagator_eval(&[z], &[w], &spec).unwrap();
        let finite = cauchy_reference(z, w, spec.lambda);
        assert!(
            (p.component(0) - finite).norm() < 1e-9,
            "difference {:e}",
            (p.component(0) - finite).norm()
        );

        // Against the unregulated kernel the tail deficit dominates: at
        // Λ = 10^4 r² it is a relative 2.5e-5, at 10^6 r² below 1e-6.
        let exact = cauchy_kernel(z, w);
        assert!((p.component(0) - exact).norm() < 1e-4);
        assert!((p.component(0) - exact).norm() > 1e-7);
        let tight = QuadratureSpec::new(1e6 * r2, 1e-11).unwrap();
        let p = propagator_eval(&[z], &[w], &tight).unwrap();
        assert!((p.component(0) - exact).norm() < CAUCHY_MATCH_TOL);
    }

    #[test]
    fn translation_invariance_of_components() {
        let spec = QuadratureSpec::new(50.0, 1e-11).unwrap();
        let z = [c(0.4, -0.1), c(1.2, 0.8)];
        let w = [c(-0.3, 0.5), c(0.1, -0.9)];
        let shift = c(0.3, -0.4);
        let zs: Vec<Complex64> = z.iter().map(|x| x + shift).collect();
        let ws: Vec<Complex64> = w.iter().map(|x| x + shift).collect();
        let p = propagator_eval(&z, &w, &spec).unwrap();
        let q = propagator_eval(&zs, &ws, &spec).unwrap();
        for j in 0..2 {
            assert!(
                (p.component(j) - q.component(j)).norm() < TRANSLATION_TOL,
                "component {j}"
            );
        }
    }

    #[test]
    fn homogeneity_under_joint_rescaling() {
        // (z, w, Λ) → (λz, λw, |λ|²Λ) scales each component by λ̄ |λ|^(-2d).
        let base_spec = QuadratureSpec::new(20.0, 1e-12).unwrap();
        let z = [c(0.9, 0.2), c(-0.4, 0.6)];
        let w = [c(0.1, -0.3), c(0.2, 0.1)];
        let p = propagator_eval(&z, &w, &base_spec).unwrap();
        for lambda_factor in [2.0f64, 1.0 / 3.0] {
            let zs: Vec<Complex64> = z.iter().map(|x| x * lambda_factor).collect();
            let ws: Vec<Complex64> = w.iter().map(|x| x * lambda_factor).collect();
            let scaled_spec = QuadratureSpec::new(
                base_spec.lambda * lambda_factor * lambda_factor,
                1e-12,
            )
            .unwrap();
            let q = propagator_eval(&zs, &ws, &scaled_spec).unwrap();
            let expected_scale = lambda_factor / lambda_factor.powi(4);
            for j in 0..2 {
                let want = p.component(j) * expected_scale;
                let got = q.component(j);
                assert!(
                    (want - got).norm() < 1e-8 * want.norm().max(1.0),
                    "λ={lambda_factor}, j={j}: {want} vs {got}"
                );
            }
        }
    }

    #[test]
    fn cutoff_accumulates_monotonically() {
        let z = [c(0.8, 0.0), c(0.0, 0.7)];
        let w = [c(0.0, 0.0), c(0.0, 0.0)];
        let mut previous = 0.0f64;
        for lambda in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let spec = QuadratureSpec::new(lambda, 1e-12).unwrap();
            let p = propagator_eval(&z, &w, &spec).unwrap();
            let magnitude = p.component(0).norm();
            assert!(
                magnitude > previous,
                "Λ={lambda}: {magnitude} not above {previous}"
            );
            previous = magnitude;
        }
    }

    #[test]
    fn refinement_converges_at_least_second_order() {
        // Low-order panels against the exact antiderivative of the d = 1
        // integrand on a fixed interval: halving the panel width must shrink
        // the error by at least a factor of four.
        let a = 0.85f64 / 4.0;
        let (s_lo, s_hi) = (0.1f64, 40.0f64);
        let exact = ((-a * s_lo).exp() - (-a * s_hi).exp()) / a;
        let integrand = |s: f64| (-a * s).exp();
        let mut errors = Vec::new();
        for panels in [8usize, 16, 32] {
            let value = composite_gauss(&integrand, s_lo, s_hi, panels, 2).unwrap();
            errors.push((value - exact).abs());
        }
        for pair in errors.windows(2) {
            if pair[0] > 1e-12 {
                assert!(
                    pair[1] < pair[0] / 4.0,
                    "refinement not second order: {errors:?}"
                );
            }
        }
    }

    #[test]
    fn nonconvergence_is_reported() {
        let spec = QuadratureSpec {
            lambda: 10.0,
            abs_tol: 1e-30,
            gauss_points: 2,
            max_refinements: 3,
        };
        match propagator_eval(&[c(1.0, 0.0)], &[c(0.0, 0.0)], &spec) {
            Err(HeatError::NotConverged {
                refinements: 3, ..
            }) => {}
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        assert!(QuadratureSpec::new(-1.0, 1e-8).is_err());
        assert!(QuadratureSpec::new(1.0, 0.0).is_err());
        let bad_order = QuadratureSpec {
            lambda: 1.0,
            abs_tol: 1e-8,
            gauss_points: 5,
            max_refinements: 10,
        };
        assert!(matches!(
            bad_order.validate(),
            Err(HeatError::UnsupportedGaussOrder { points: 5 })
        ));
    }

    #[test]
    fn by_parts_vanishes_for_gaussian_pair() {
        let grid = PlanarGrid::standard();
        let r = by_parts_vanishing(&gaussian(), &gaussian(), &grid).unwrap();
        assert!(r.magnitude < BY_PARTS_TOL, "magnitude {:e}", r.magnitude);
    }

    #[test]
    fn by_parts_moment_pair_matches_gaussian_moments() {
        let grid = PlanarGrid::standard();
        let f = moment_gaussian();
        let g = shifted_gaussian(c(1.0, 0.0));
        let (first, second) = by_parts_pair(&f, &g, &grid).unwrap();
        // Completing the square at w = v + 1/2 reduces both halves to
        // radial Gaussian moments: ∓ (π/8) e^(-1/2).
        let moment = PI / 8.0 * (-0.5f64).exp();
        assert!((first - c(-moment, 0.0)).norm() < BY_PARTS_TOL);
        assert!((second - c(moment, 0.0)).norm() < BY_PARTS_TOL);
        let sum = first + second;
        assert!(sum.norm() < BY_PARTS_TOL);
    }

    #[test]
    fn by_parts_negative_control_equals_the_boundary_term() {
        // f = 1 and g = w̄ are not Schwartz class: the pairing equals the
        // area of the box, the explicit boundary term, not zero.
        let grid = PlanarGrid::standard();
        let r = by_parts_vanishing(&constant_one(), &antiholomorphic_coordinate(), &grid)
            .unwrap();
        let area = 4.0 * grid.half_width * grid.half_width;
        assert!(
            (r.sum - c(area, 0.0)).norm() < NEGATIVE_CONTROL_TOL,
            "sum {} vs area {area}",
            r.sum
        );
    }

    #[test]
    fn gauge_symbolic_cancellation_is_exact() {
        for d in 1..=4 {
            let r = gauge_symbolic_check(d);
            assert!(r.exact_zero, "dimension {d}");
            if d == 1 {
                assert_eq!(r.terms_before_cancellation, 0);
            } else {
                assert_eq!(r.terms_before_cancellation, d * (d - 1));
            }
        }
    }

    #[test]
    fn gauge_condition_holds_in_finite_differences() {
        let spec = QuadratureSpec::new(25.0, 1e-10).unwrap();
        let report = gauge_condition_check(2, &spec, 17, 10).unwrap();
        assert!(report.symbolic.exact_zero);
        assert!(
            report.fd.max_residual < GAUGE_FD_TOL,
            "residual {:e}",
            report.fd.max_residual
        );
        assert!(report.pass);
    }
}
