//! Loop-calculus transform.
//!
//! Every edge `e = (f_i, f_j)` gets a pair of square matrices `M_{e,fi}`,
//! `M_{e,fj}` with `M_{e,fi} M_{e,fj}^T = I`, built from the fixed-point
//! messages on `e`. Transforming each local function through the matrices of
//! its incident edges leaves the partition function unchanged, puts the
//! Bethe partition function at the all-zero configuration and annihilates
//! every configuration with exactly one nonzero edge.

use serde::Serialize;

use crate::error::{NfgError, Result};
use crate::limits::Limits;
use crate::nfg::{global_eval, FactorGraph};
use crate::spa::{bethe_parts, raw_update, Messages, SpaReport};
use crate::tensor::{next_index, CMatrix, ComplexTensor, C64, TOL_HERM};

pub const TOL_ZE: f64 = 1e-9;
pub const TOL_B1: f64 = 1e-12;
pub const FRAGILE_B1: f64 = 1e-6;
pub const TOL_BIORTH: f64 = 1e-10;

/// Resolved constants of one edge; index 0 is the lower endpoint `f_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LctParams {
    pub z_e: f64,
    pub beta0: f64,
    pub zeta: [f64; 2],
    pub chi: [f64; 2],
    pub delta: [f64; 2],
    pub epsilon: [f64; 2],
    /// True when `β_e(0) = 1` selected the alternative δ/ε choice.
    pub unit_branch: bool,
}

impl LctParams {
    /// Largest violation of the constraint system for messages `mu_i`, `mu_j`.
    pub fn constraint_residual(&self, mu_i0: f64, mu_j0: f64) -> f64 {
        let mut r = (self.zeta[0] * self.zeta[1] - 1.0 / self.z_e).abs();
        r = r.max((self.chi[0] * self.chi[1] - 1.0).abs());
        r = r.max((self.delta[0] * self.delta[1] - self.z_e).abs());
        if self.unit_branch {
            r = r.max(
                (1.0 + self.delta[0] * self.epsilon[1] + self.delta[1] * self.epsilon[0]).abs(),
            );
        } else {
            let w = self.z_e * (1.0 - self.beta0);
            r = r.max((self.delta[0] + w * self.epsilon[0] - mu_j0).abs());
            r = r.max((self.delta[1] + w * self.epsilon[1] - mu_i0).abs());
        }
        r
    }
}

/// Default parameters (`ζ = Z_e^{-1/2}`, `χ = 1`).
pub fn resolve_params(edge: usize, mu_i: &[C64], mu_j: &[C64]) -> Result<LctParams> {
    resolve_params_with(edge, mu_i, mu_j, 1.0)
}

/// Parameters with `χ_i = chi_i` and `χ_j = 1 / chi_i`.
pub fn resolve_params_with(edge: usize, mu_i: &[C64], mu_j: &[C64], chi_i: f64) -> Result<LctParams> {
    if !(chi_i.is_finite() && chi_i != 0.0) {
        return Err(NfgError::InvalidArgument(format!("chi must be finite and nonzero, got {chi_i}")));
    }
    let z: C64 = mu_i.iter().zip(mu_j).map(|(a, b)| a * b).sum();
    if z.im.abs() > TOL_ZE || z.re <= TOL_ZE {
        return Err(NfgError::LctInapplicable { edge, z_e: z });
    }
    let z_e = z.re;
    let (mi0, mj0) = (mu_i[0].re, mu_j[0].re);
    let beta0 = mi0 * mj0 / z_e;
    let s = z_e.sqrt();
    let unit_branch = (1.0 - beta0).abs() <= TOL_B1;
    let (delta, epsilon) = if unit_branch {
        let d = [mj0, mi0];
        let sum = d[0] + d[1];
        if sum.abs() <= f64::EPSILON {
            return Err(NfgError::DegenerateParameter { edge });
        }
        (d, [-1.0 / sum, -1.0 / sum])
    } else {
        let w = z_e * (1.0 - beta0);
        ([s, s], [(mj0 - s) / w, (mi0 - s) / w])
    };
    Ok(LctParams {
        z_e,
        beta0,
        zeta: [1.0 / s, 1.0 / s],
        chi: [chi_i, 1.0 / chi_i],
        delta,
        epsilon,
        unit_branch,
    })
}

fn m_matrix(mu_s: &[C64], mu_o: &[C64], zeta: f64, chi: f64, delta: f64, eps: f64) -> CMatrix {
    let n = mu_s.len();
    CMatrix::from_fn(n, n, |x, xt| {
        if xt == 0 {
            mu_s[x] * zeta
        } else if x == 0 {
            -mu_o[xt] * (zeta * chi)
        } else {
            let d = if x == xt { delta } else { 0.0 };
            (mu_s[x] * mu_o[xt] * eps + d) * (zeta * chi)
        }
    })
}

/// `max(|M_i M_j^T − I|, |M_i^T M_j − I|)`.
pub fn biorthogonality_residual(mi: &CMatrix, mj: &CMatrix) -> f64 {
    let id = CMatrix::identity(mi.rows());
    let a = mi.mul(&mj.transpose()).max_abs_diff(&id);
    let b = mi.transpose().mul(mj).max_abs_diff(&id);
    a.max(b)
}

/// The matrices `(M_{e,fi}, M_{e,fj})` for messages into `f_i` and `f_j`.
pub fn build_m_matrices(mu_i: &[C64], mu_j: &[C64], p: &LctParams) -> Result<(CMatrix, CMatrix)> {
    let mi = m_matrix(mu_i, mu_j, p.zeta[0], p.chi[0], p.delta[0], p.epsilon[0]);
    let mj = m_matrix(mu_j, mu_i, p.zeta[1], p.chi[1], p.delta[1], p.epsilon[1]);
    let r = biorthogonality_residual(&mi, &mj);
    let scale = 1.0 + mi.max_abs() * mj.max_abs();
    if !(r <= TOL_BIORTH * scale) {
        return Err(NfgError::Consistency {
            what: "M-matrix biorthogonality".into(),
            residual: r,
        });
    }
    Ok((mi, mj))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LctDiagnostics {
    /// Per edge biorthogonality residual.
    pub biorthogonality: Vec<f64>,
    /// Edges with `1e-12 < |1 − β_e(0)| < 1e-6`.
    pub fragile_edges: Vec<usize>,
    /// Bethe partition function at the messages used.
    pub z_bethe: C64,
    /// Transformed global function at the all-zero configuration.
    pub g0: C64,
    /// Largest `|f̃|` over entries with exactly one nonzero coordinate.
    pub max_weight_one: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LctResult {
    pub transformed: FactorGraph,
    pub m_matrices: Vec<(CMatrix, CMatrix)>,
    pub params: Vec<LctParams>,
    pub diagnostics: LctDiagnostics,
}

/// Transforms the graph at the fixed point held by a converged SPA report.
pub fn transform(g: &FactorGraph, report: &SpaReport) -> Result<LctResult> {
    if !report.converged {
        return Err(NfgError::NonConvergence(
            "the transform needs a converged fixed point".into(),
        ));
    }
    let m = report
        .messages
        .as_ref()
        .ok_or_else(|| NfgError::NonConvergence("report carries no messages".into()))?;
    transform_messages(g, m, None)
}

/// Transforms the graph at arbitrary messages. `chi` optionally gives `χ_{e,fi}`
/// per edge (default 1).
pub fn transform_messages(g: &FactorGraph, m: &Messages, chi: Option<&[f64]>) -> Result<LctResult> {
    let mut params = Vec::with_capacity(g.num_edges());
    let mut m_matrices = Vec::with_capacity(g.num_edges());
    let mut biorthogonality = Vec::with_capacity(g.num_edges());
    let mut fragile_edges = Vec::new();
    for e in 0..g.num_edges() {
        let (mu_i, mu_j) = (m.get(e, 0), m.get(e, 1));
        let c = chi.map_or(1.0, |c| c[e]);
        let p = resolve_params_with(e, mu_i, mu_j, c)?;
        let gap = (1.0 - p.beta0).abs();
        if gap > TOL_B1 && gap < FRAGILE_B1 {
            fragile_edges.push(e);
        }
        let (mi, mj) = build_m_matrices(mu_i, mu_j, &p)?;
        biorthogonality.push(biorthogonality_residual(&mi, &mj));
        params.push(p);
        m_matrices.push((mi, mj));
    }
    let mut functions = Vec::with_capacity(g.num_nodes());
    for (f, node) in g.nodes().iter().enumerate() {
        let mut t = g.function(f).clone();
        for &e in &node.edges {
            let mat = if g.endpoint_side(e, f) == 0 {
                &m_matrices[e].0
            } else {
                &m_matrices[e].1
            };
            t = t.mode_product(e, mat, e)?;
        }
        functions.push(t);
    }
    let scale = functions
        .iter()
        .flat_map(|t| t.data())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let transformed = FactorGraph::new_weak_with_tolerance(
        g.kind(),
        g.nodes().to_vec(),
        g.edges().to_vec(),
        functions,
        TOL_HERM * (1.0 + scale),
    )?;
    let z_bethe = bethe_parts(g, m).z_bethe.ok_or_else(|| NfgError::LctInapplicable {
        edge: 0,
        z_e: C64::new(0.0, 0.0),
    })?;
    let zeros = vec![0usize; g.num_edges()];
    let g0 = global_eval(&transformed, &zeros);
    let max_weight_one = weight_one_max(&transformed);
    Ok(LctResult {
        transformed,
        m_matrices,
        params,
        diagnostics: LctDiagnostics {
            biorthogonality,
            fragile_edges,
            z_bethe,
            g0,
            max_weight_one,
        },
    })
}

/// Largest magnitude among local-function entries of Hamming weight one.
pub fn weight_one_max(g: &FactorGraph) -> f64 {
    let mut worst = 0.0f64;
    for t in g.functions() {
        let sizes = t.sizes();
        let mut idx = vec![0; sizes.len()];
        for z in t.data() {
            if idx.iter().filter(|&&x| x != 0).count() == 1 {
                worst = worst.max(z.norm());
            }
            next_index(&mut idx, &sizes);
        }
    }
    worst
}

/// True if no node has exactly one incident edge with a nonzero value.
pub fn is_generalized_loop(g: &FactorGraph, config: &[usize]) -> bool {
    g.nodes()
        .iter()
        .all(|node| node.edges.iter().filter(|&&e| config[e] != 0).count() != 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopTerm {
    pub configuration: Vec<usize>,
    /// `g̃(x̃) / g̃(0)`.
    pub weight: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSeries {
    pub g0: C64,
    /// Every nonzero generalized-loop configuration.
    pub terms: Vec<LoopTerm>,
    /// Largest `|g̃(x̃) / g̃(0)|` over configurations that are not generalized loops.
    pub max_non_loop_weight: f64,
    /// `Z(Ñ)` summed over all configurations.
    pub partition: C64,
}

impl LoopSeries {
    pub fn weight_sum(&self) -> C64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `g̃(0) (1 + Σ weights)`.
    pub fn resummed(&self) -> C64 {
        self.g0 * (C64::new(1.0, 0.0) + self.weight_sum())
    }
}

/// Enumerates the transformed graph and splits `Z(Ñ)` into `g̃(0)` and
/// generalized-loop corrections.
pub fn loop_series(lr: &LctResult, limits: &Limits) -> Result<LoopSeries> {
    let g = &lr.transformed;
    let total = g.configuration_count();
    if total > limits.enumeration as u128 {
        return Err(NfgError::Capacity {
            what: "loop-series enumeration".into(),
            required: total,
            limit: limits.enumeration as u128,
        });
    }
    let sizes: Vec<usize> = (0..g.num_edges()).map(|e| g.axis_size(e)).collect();
    let mut config = vec![0usize; sizes.len()];
    let g0 = global_eval(g, &config);
    let mut terms = Vec::new();
    let mut max_non_loop = 0.0f64;
    let mut partition = C64::new(0.0, 0.0);
    for _ in 0..total as u64 {
        let v = global_eval(g, &config);
        partition += v;
        if config.iter().any(|&x| x != 0) {
            if is_generalized_loop(g, &config) {
                terms.push(LoopTerm {
                    configuration: config.clone(),
                    weight: v / g0,
                });
            } else {
                max_non_loop = max_non_loop.max((v / g0).norm());
            }
        }
        next_index(&mut config, &sizes);
    }
    Ok(LoopSeries {
        g0,
        terms,
        max_non_loop_weight: max_non_loop,
        partition,
    })
}

/// One SPA update on the transformed graph from messages `[x̃ = 0]`; returns
/// the largest deviation from `[x̃ = 0]` after rescaling each message by its
/// zero component.
pub fn induced_fixed_point_check(lr: &LctResult) -> f64 {
    let g = &lr.transformed;
    let to = (0..g.num_edges())
        .map(|e| {
            let mut v = vec![C64::new(0.0, 0.0); g.axis_size(e)];
            v[0] = C64::new(1.0, 0.0);
            [v.clone(), v]
        })
        .collect();
    let m = Messages::new(g, to).expect("sizes match the graph");
    let (next, _) = raw_update(g, &m);
    let mut worst = 0.0f64;
    for e in 0..g.num_edges() {
        for s in 0..2 {
            let v = next.get(e, s);
            if v[0].norm() == 0.0 {
                return f64::INFINITY;
            }
            for (x, z) in v.iter().enumerate() {
                let want = if x == 0 { 1.0 } else { 0.0 };
                worst = worst.max((z / v[0] - want).norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `Π_f Σ |f̃|`.
    pub s: f64,
    pub z_star: f64,
    /// `Z* > (2/3) S`.
    pub two_thirds: bool,
    /// `(S − Z*) / Z*`.
    pub alpha: f64,
    /// `α < 1/2`.
    pub alpha_below_half: bool,
    pub agree: bool,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.two_thirds && self.alpha_below_half
    }
}

/// Evaluates the checkable sufficient condition at the transform's fixed point.
pub fn check_condition(lr: &LctResult) -> ConditionReport {
    let s: f64 = lr.transformed.functions().iter().map(|t| t.abs_sum()).product();
    let z_star = lr.diagnostics.z_bethe.re;
    let two_thirds = z_star > (2.0 / 3.0) * s;
    let alpha = if z_star > 0.0 { (s - z_star) / z_star } else { f64::INFINITY };
    let alpha_below_half = alpha < 0.5;
    ConditionReport {
        s,
        z_star,
        two_thirds,
        alpha,
        alpha_below_half,
        agree: two_thirds == alpha_below_half,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GSplit {
    /// `Π_f Σ f̃ − Z*`.
    pub sum_g1: C64,
    /// Largest `|g₁|` over socket configurations of Hamming weight at most one.
    pub max_low_weight_g1: f64,
}

/// Splits `Π_f f̃` over independent socket variables into `g₀` (the value
/// `Z*` at the all-zero configuration) and the remainder `g₁`.
pub fn g_split(lr: &LctResult) -> GSplit {
    let g = &lr.transformed;
    let z_star = lr.diagnostics.z_bethe;
    let sums: Vec<C64> = g.functions().iter().map(|t| t.sum()).collect();
    let zeros: Vec<C64> = g.functions().iter().map(|t| t.data()[0]).collect();
    let sum_g1 = sums.iter().product::<C64>() - z_star;
    let base: C64 = zeros.iter().product();
    let mut worst = (base - z_star).norm();
    for (f, t) in g.functions().iter().enumerate() {
        let others: C64 = zeros
            .iter()
            .enumerate()
            .filter(|&(h, _)| h != f)
            .map(|(_, z)| *z)
            .product();
        let sizes = t.sizes();
        let mut idx = vec![0; sizes.len()];
        for z in t.data() {
            if idx.iter().filter(|&&x| x != 0).count() == 1 {
                worst = worst.max((z * others).norm());
            }
            next_index(&mut idx, &sizes);
        }
    }
    GSplit {
        sum_g1,
        max_low_weight_g1: worst,
    }
}

/// `Σ_x̃ g₁(x̃)` by brute force over all socket configurations.
pub fn g1_sum_enumerated(lr: &LctResult, limits: &Limits) -> Result<C64> {
    let g = &lr.transformed;
    let mut count: u128 = 1;
    for t in g.functions() {
        count = count.saturating_mul(t.len() as u128);
    }
    if count > limits.enumeration as u128 {
        return Err(NfgError::Capacity {
            what: "socket enumeration".into(),
            required: count,
            limit: limits.enumeration as u128,
        });
    }
    let sizes: Vec<usize> = g.functions().iter().map(ComplexTensor::len).collect();
    let mut idx = vec![0usize; sizes.len()];
    let mut total = C64::new(0.0, 0.0);
    for _ in 0..count as u64 {
        let mut v = C64::new(1.0, 0.0);
        for (t, &k) in g.functions().iter().zip(&idx) {
            v *= t.data()[k];
        }
        total += v;
        next_index(&mut idx, &sizes);
    }
    Ok(total - lr.diagnostics.z_bethe)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vec<C64> {
        x.iter().map(|&a| C64::new(a, 0.0)).collect()
    }

    #[test]
    fn unit_branch_parameters() {
        let p = resolve_params(0, &v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!(p.unit_branch);
        assert_eq!(p.delta, [1.0, 1.0]);
        assert_eq!(p.epsilon, [-0.5, -0.5]);
        assert!((1.0 + p.delta[0] * p.epsilon[1] + p.delta[1] * p.epsilon[0]).abs() < 1e-12);
    }

    #[test]
    fn uniform_binary_parameters() {
        let p = resolve_params(0, &v(&[0.5, 0.5]), &v(&[0.5, 0.5])).unwrap();
        assert!((p.z_e - 0.5).abs() < 1e-15);
        assert!((p.beta0 - 0.5).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((p.delta[0] - s).abs() < 1e-15);
        let eps = (0.5 - s) / 0.25;
        assert!((p.epsilon[0] - eps).abs() < 1e-12);
        assert!(p.constraint_residual(0.5, 0.5) < 1e-12);
    }

    #[test]
    fn zero_edge_partition_is_inapplicable() {
        let err = resolve_params(3, &v(&[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, NfgError::LctInapplicable { edge: 3, .. }));
    }

    #[test]
    fn binary_matrices_match_closed_form() {
        let (mi_v, mj_v) = (v(&[0.3, 0.7]), v(&[0.6, 0.4]));
        let p = resolve_params(0, &mi_v, &mj_v).unwrap();
        let (mi, _) = build_m_matrices(&mi_v, &mj_v, &p).unwrap();
        let z = p.zeta[0];
        let expect = CMatrix::from_real(2, 2, &[0.3 * z, -0.4 * z, 0.7 * z, 0.6 * z]).unwrap();
        assert!(mi.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn equal_real_messages_give_orthogonal_matrices() {
        let mu = v(&[0.2, 0.5, 0.3]);
        let p = resolve_params(0, &mu, &mu).unwrap();
        let (mi, mj) = build_m_matrices(&mu, &mu, &p).unwrap();
        assert!(mi.max_abs_diff(&mj) < 1e-15);
        assert!(mi.transpose().mul(&mi).max_abs_diff(&CMatrix::identity(3)) < 1e-10);
    }
}
