//! Finite graph covers and the degree-M Bethe partition function.
//!
//! An M-cover has nodes `(f, m)` and edges `(e, m)`; edge `(e, m)` joins
//! `(f_i, m)` to `(f_j, σ_e(m))`. Node `(f, m)` has index `f * M + m` and
//! edge `(e, m)` has index `e * M + m`. `(Z_{B,M})^M` is the mean of `Z`
//! over all `(M!)^{|E|}` labeled covers and is computed three ways:
//! exhaustive averaging, Monte-Carlo sampling and the method-of-types sum.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NfgError, Result};
use crate::lct::{check_condition, LctResult};
use crate::limits::Limits;
use crate::nfg::{Edge, FactorGraph, Node};
use crate::tensor::{contract_network, Axis, CMatrix, ComplexTensor, C64};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSpec {
    m: usize,
    sigma: Vec<Vec<usize>>,
}

impl CoverSpec {
    pub fn new(m: usize, sigma: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(NfgError::InvalidArgument("cover degree must be positive".into()));
        }
        for (e, p) in sigma.iter().enumerate() {
            let mut seen = vec![false; m];
            if p.len() != m {
                return Err(NfgError::InvalidArgument(format!(
                    "permutation of edge {e} has length {}, expected {m}",
                    p.len()
                )));
            }
            for &x in p {
                if x >= m || seen[x] {
                    return Err(NfgError::InvalidArgument(format!(
                        "permutation of edge {e} is not a bijection on [{m}]: {p:?}"
                    )));
                }
                seen[x] = true;
            }
        }
        Ok(Self { m, sigma })
    }

    pub fn identity(m: usize, num_edges: usize) -> Self {
        Self {
            m,
            sigma: vec![(0..m).collect(); num_edges],
        }
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn sigma(&self, e: usize) -> &[usize] {
        &self.sigma[e]
    }

    fn inverse(&self, e: usize) -> Vec<usize> {
        let mut inv = vec![0; self.m];
        for (a, &b) in self.sigma[e].iter().enumerate() {
            inv[b] = a;
        }
        inv
    }

    fn check_graph(&self, g: &FactorGraph) -> Result<()> {
        if self.sigma.len() != g.num_edges() {
            return Err(NfgError::InvalidArgument(format!(
                "cover spec has {} permutations for {} edges",
                self.sigma.len(),
                g.num_edges()
            )));
        }
        Ok(())
    }
}

/// Cover-edge labels of node `(f, m)` in the order of `P_f`.
fn cover_labels(g: &FactorGraph, inverses: &[Vec<usize>], m_deg: usize, f: usize, m: usize) -> Vec<usize> {
    g.nodes()[f]
        .edges
        .iter()
        .map(|&e| {
            if g.endpoint_side(e, f) == 0 {
                e * m_deg + m
            } else {
                e * m_deg + inverses[e][m]
            }
        })
        .collect()
}

/// The cover as a factor graph.
pub fn build_cover(g: &FactorGraph, spec: &CoverSpec) -> Result<FactorGraph> {
    spec.check_graph(g)?;
    let md = spec.m;
    let inverses: Vec<Vec<usize>> = (0..g.num_edges()).map(|e| spec.inverse(e)).collect();
    let mut edges = Vec::with_capacity(g.num_edges() * md);
    for (e, edge) in g.edges().iter().enumerate() {
        let (i, j) = edge.endpoints;
        for m in 0..md {
            edges.push(Edge {
                endpoints: (i * md + m, j * md + spec.sigma[e][m]),
                alphabet: edge.alphabet,
            });
        }
    }
    let mut nodes = Vec::with_capacity(g.num_nodes() * md);
    let mut functions = Vec::with_capacity(g.num_nodes() * md);
    for (f, node) in g.nodes().iter().enumerate() {
        for m in 0..md {
            let labels = cover_labels(g, &inverses, md, f, m);
            functions.push(g.function(f).with_labels(&labels)?);
            nodes.push(Node {
                name: format!("{}_{}", node.name, m + 1),
                edges: labels,
            });
        }
    }
    if g.weak_sense() {
        FactorGraph::new_weak(g.kind(), nodes, edges, functions)
    } else {
        FactorGraph::new(g.kind(), nodes, edges, functions)
    }
}

fn cover_partition(g: &FactorGraph, spec: &CoverSpec, limits: &Limits) -> Result<C64> {
    let md = spec.m;
    let inverses: Vec<Vec<usize>> = (0..g.num_edges()).map(|e| spec.inverse(e)).collect();
    let mut tensors = Vec::with_capacity(g.num_nodes() * md);
    for f in 0..g.num_nodes() {
        for m in 0..md {
            let labels = cover_labels(g, &inverses, md, f, m);
            tensors.push(g.function(f).with_labels(&labels)?);
        }
    }
    Ok(contract_network(tensors, limits.contraction)?)
}

/// Partition function of one cover.
pub fn cover_z(g: &FactorGraph, spec: &CoverSpec, limits: &Limits) -> Result<C64> {
    spec.check_graph(g)?;
    cover_partition(g, spec, limits)
}

/// All permutations of `[m]` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..m).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..m).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..m).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZbmMethod {
    Exhaustive,
    MonteCarlo,
    TypeFormula,
}

impl std::fmt::Display for ZbmMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ZbmMethod::Exhaustive => "exhaustive",
            ZbmMethod::MonteCarlo => "montecarlo",
            ZbmMethod::TypeFormula => "typeformula",
        })
    }
}

impl std::str::FromStr for ZbmMethod {
    type Err = NfgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(ZbmMethod::Exhaustive),
            "montecarlo" | "monte-carlo" => Ok(ZbmMethod::MonteCarlo),
            "typeformula" | "type-formula" => Ok(ZbmMethod::TypeFormula),
            _ => Err(NfgError::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZbmEstimate {
    pub method: ZbmMethod,
    pub m: usize,
    /// `(Z_{B,M})^M`, the mean cover partition function.
    pub value: C64,
    pub stderr: Option<f64>,
    pub samples: Option<usize>,
    pub covers: Option<u64>,
}

impl ZbmEstimate {
    /// `Z_{B,M}`: the real M-th root of the mean, after checking that the
    /// imaginary part is negligible.
    pub fn root(&self) -> Result<f64> {
        let v = self.value;
        if v.im.abs() > 1e-9 * (1.0 + v.norm()) {
            return Err(NfgError::Consistency {
                what: format!("imaginary part of the M = {} mean", self.m),
                residual: v.im.abs(),
            });
        }
        if v.re < 0.0 {
            return Err(NfgError::SignedRoot { value: v.re });
        }
        Ok(v.re.powf(1.0 / self.m as f64))
    }
}

/// One estimate in the CSV result format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZbmRecord {
    pub instance_id: String,
    pub estimate: ZbmEstimate,
    pub runtime_ms: f64,
}

/// Records as CSV: `instance-id,M,method,value,root,stderr,runtime-ms`.
/// `value` is the real part of the mean; `root` is empty when undefined.
pub fn zbm_records_to_csv(records: &[ZbmRecord]) -> Result<String> {
    use crate::experiment::{csv_err, finish};
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance-id", "M", "method", "value", "root", "stderr", "runtime-ms"])
        .map_err(csv_err)?;
    for r in records {
        let e = &r.estimate;
        w.write_record([
            r.instance_id.clone(),
            e.m.to_string(),
            e.method.to_string(),
            e.value.re.to_string(),
            e.root().map(|x| x.to_string()).unwrap_or_default(),
            e.stderr.map(|x| x.to_string()).unwrap_or_default(),
            r.runtime_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn factorial_u128(m: usize) -> u128 {
    (1..=m as u128).product()
}

/// Number of labeled M-covers, `(M!)^{|E|}`, saturating.
pub fn cover_count(m: usize, num_edges: usize) -> u128 {
    let f = factorial_u128(m);
    (0..num_edges).fold(1u128, |acc, _| acc.saturating_mul(f))
}

/// Mean of `Z` over every labeled M-cover, visited in lexicographic order of
/// the permutation vector.
pub fn zbm_exhaustive(g: &FactorGraph, m: usize, limits: &Limits) -> Result<ZbmEstimate> {
    if m == 0 {
        return Err(NfgError::InvalidArgument("cover degree must be positive".into()));
    }
    let count = cover_count(m, g.num_edges());
    if count > limits.covers as u128 {
        return Err(NfgError::Capacity {
            what: format!("exhaustive averaging over (M!)^|E| covers with M = {m}"),
            required: count,
            limit: limits.covers as u128,
        });
    }
    let perms = permutations(m);
    let np = perms.len() as u64;
    let ne = g.num_edges();
    let values: Vec<Result<C64>> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut sigma = vec![Vec::new(); ne];
            let mut rem = k;
            for e in (0..ne).rev() {
                sigma[e] = perms[(rem % np) as usize].clone();
                rem /= np;
            }
            cover_partition(g, &CoverSpec { m, sigma }, limits)
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for v in values {
        total += v?;
    }
    Ok(ZbmEstimate {
        method: ZbmMethod::Exhaustive,
        m,
        value: total / count as f64,
        stderr: None,
        samples: None,
        covers: Some(count as u64),
    })
}

/// The permutation vector of Monte-Carlo sample `s`.
pub fn sample_spec(m: usize, num_edges: usize, seed: u64, s: u64) -> CoverSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    let sigma = (0..num_edges)
        .map(|_| {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    CoverSpec { m, sigma }
}

/// Sample mean of `Z` over independent uniformly drawn covers.
pub fn zbm_montecarlo(g: &FactorGraph, m: usize, samples: usize, seed: u64, limits: &Limits) -> Result<ZbmEstimate> {
    if m == 0 || samples == 0 {
        return Err(NfgError::InvalidArgument(
            "cover degree and sample count must be positive".into(),
        ));
    }
    let ne = g.num_edges();
    let values: Vec<Result<C64>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| cover_partition(g, &sample_spec(m, ne, seed, s), limits))
        .collect();
    let values: Vec<C64> = values.into_iter().collect::<Result<_>>()?;
    let n = values.len() as f64;
    // Accumulate relative to the first sample.
    let shift = values[0];
    let mean_shifted: C64 = values.iter().map(|z| z - shift).sum::<C64>() / n;
    let mean = shift + mean_shifted;
    let var = if values.len() > 1 {
        values.iter().map(|z| (z - shift - mean_shifted).norm_sqr()).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ZbmEstimate {
        method: ZbmMethod::MonteCarlo,
        m,
        value: mean,
        stderr: Some((var / n).sqrt()),
        samples: Some(samples),
        covers: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeVector {
    /// Occurrences of each symbol; sums to M.
    pub counts: Vec<u32>,
}

impl TypeVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn m(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn normalized(&self) -> Vec<f64> {
        let m = self.m() as f64;
        self.counts.iter().map(|&k| k as f64 / m).collect()
    }
}

pub fn type_of(v: &[usize], alphabet: usize) -> TypeVector {
    let mut counts = vec![0u32; alphabet];
    for &x in v {
        counts[x] += 1;
    }
    TypeVector { counts }
}

fn binom(n: u64, k: u64) -> Result<u64> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
        if acc > u64::MAX as u128 {
            return Err(NfgError::BigCount(format!("binomial({n}, {k})")));
        }
    }
    Ok(acc as u64)
}

/// `C(|X| + M − 1, M)`, the number of types of length-M vectors.
pub fn num_types(alphabet: u64, m: u64) -> Result<u64> {
    if alphabet == 0 {
        return Ok(u64::from(m == 0));
    }
    let n = alphabet
        .checked_add(m)
        .and_then(|x| x.checked_sub(1))
        .ok_or_else(|| NfgError::BigCount(format!("num_types({alphabet}, {m})")))?;
    binom(n, m)
}

/// `M! / Π_x k_x!`, the size of the type class.
pub fn class_size(t: &TypeVector) -> Result<u64> {
    let mut acc: u64 = 1;
    let mut running: u64 = 0;
    for &k in &t.counts {
        running += k as u64;
        let b = binom(running, k as u64)?;
        acc = acc
            .checked_mul(b)
            .ok_or_else(|| NfgError::BigCount(format!("class size of {:?}", t.counts)))?;
    }
    Ok(acc)
}

/// Every type of length-M vectors over the alphabet, in lexicographic order
/// of the count vector (descending in the first symbol).
pub fn all_types(alphabet: usize, m: u32) -> Vec<TypeVector> {
    fn rec(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<TypeVector>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(TypeVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=rest).rev() {
            prefix.push(k);
            rec(rest - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if alphabet > 0 {
        rec(m, alphabet, &mut Vec::new(), &mut out);
    }
    out
}

fn digits(mut v: usize, n: usize, m: usize) -> Vec<usize> {
    let mut d = vec![0; m];
    for k in (0..m).rev() {
        d[k] = v % n;
        v /= n;
    }
    d
}

/// The projector `P_e` on `X^M` (index `v = Σ_m x_m n^{M-1-m}`):
/// `P(a, b) = [type(a) = type(b)] / |T_{type(a)}|`.
pub fn p_e_matrix(alphabet: usize, m: usize) -> Result<CMatrix> {
    let side = alphabet
        .checked_pow(m as u32)
        .ok_or_else(|| NfgError::BigCount(format!("{alphabet}^{m}")))?;
    let types: Vec<TypeVector> = (0..side).map(|v| type_of(&digits(v, alphabet, m), alphabet)).collect();
    let sizes: Vec<u64> = types.iter().map(class_size).collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(side, side, |a, b| {
        if types[a] == types[b] {
            C64::new(1.0 / sizes[a] as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// `(Z_{B,M})^M` via the method-of-types sum, evaluated as a tensor network:
/// every node becomes the M-fold product of its local function over grouped
/// socket axes and every edge the projector `P_e` between its two sockets.
pub fn zbm_typeformula(g: &FactorGraph, m: usize, limits: &Limits) -> Result<ZbmEstimate> {
    if m == 0 {
        return Err(NfgError::InvalidArgument("cover degree must be positive".into()));
    }
    let grouped = |e: usize| -> Result<usize> {
        g.axis_size(e)
            .checked_pow(m as u32)
            .filter(|&s| s <= limits.contraction)
            .ok_or_else(|| NfgError::Capacity {
                what: format!("socket alphabet of edge {e} at M = {m}"),
                required: (g.axis_size(e) as u128).saturating_pow(m as u32),
                limit: limits.contraction as u128,
            })
    };
    let mut projectors = Vec::with_capacity(g.num_edges());
    for e in 0..g.num_edges() {
        grouped(e)?;
        projectors.push(p_e_matrix(g.axis_size(e), m)?);
    }
    let mut tensors = Vec::with_capacity(g.num_nodes());
    for (f, node) in g.nodes().iter().enumerate() {
        let base = g.function(f);
        let base_sizes = base.sizes();
        let mut axes = Vec::with_capacity(node.edges.len());
        let mut volume: u128 = 1;
        for &e in &node.edges {
            let size = grouped(e)?;
            volume = volume.saturating_mul(size as u128);
            axes.push(Axis::new(2 * e + g.endpoint_side(e, f), size));
        }
        if volume > limits.contraction as u128 {
            return Err(NfgError::Capacity {
                what: format!("grouped tensor of node {f} at M = {m}"),
                required: volume,
                limit: limits.contraction as u128,
            });
        }
        // offsets[a][v * m + copy]: contribution of grouped index v on axis a
        // to the base offset of copy `copy`.
        let base_strides = base.strides();
        let offsets: Vec<Vec<usize>> = axes
            .iter()
            .enumerate()
            .map(|(a, ax)| {
                (0..ax.size)
                    .flat_map(|v| digits(v, base_sizes[a], m))
                    .map(|d| d * base_strides[a])
                    .collect()
            })
            .collect();
        let data = base.data();
        let mut t = ComplexTensor::from_fn(axes, |idx| {
            let mut p = C64::new(1.0, 0.0);
            for copy in 0..m {
                let off: usize = idx
                    .iter()
                    .zip(&offsets)
                    .map(|(&v, o)| o[v * m + copy])
                    .sum();
                p *= data[off];
                if p == C64::new(0.0, 0.0) {
                    break;
                }
            }
            p
        })?;
        // Absorb P_e on the upper endpoint so both ends share label 2e.
        for &e in &node.edges {
            if g.endpoint_side(e, f) == 1 {
                t = t.mode_product(2 * e + 1, &projectors[e], 2 * e)?;
            }
        }
        tensors.push(t);
    }
    let value = contract_network(tensors, limits.contraction)?;
    Ok(ZbmEstimate {
        method: ZbmMethod::TypeFormula,
        m,
        value,
        stderr: None,
        samples: None,
        covers: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub m: usize,
    pub alpha: f64,
    /// `(Z_{B,M} / Z*)^M`.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub holds: bool,
}

pub const BOUNDS_SLACK: f64 = 1e-6;

/// `1 − α(1 − α^M)/(1 − α) ≤ ratio ≤ (1 − α^{M+1})/(1 − α)`.
pub fn sandwich_bounds(alpha: f64, ratio: f64, m: usize) -> BoundsReport {
    let mi = m as i32;
    let (lower, upper) = if (1.0 - alpha).abs() < 1e-15 {
        (1.0 - m as f64, m as f64 + 1.0)
    } else {
        (
            1.0 - alpha * (1.0 - alpha.powi(mi)) / (1.0 - alpha),
            (1.0 - alpha.powi(mi + 1)) / (1.0 - alpha),
        )
    };
    let lower_margin = ratio - lower;
    let upper_margin = upper - ratio;
    BoundsReport {
        m,
        alpha,
        ratio,
        lower,
        upper,
        lower_margin,
        upper_margin,
        holds: lower_margin >= -BOUNDS_SLACK && upper_margin >= -BOUNDS_SLACK,
    }
}

/// Computes `(Z_{B,M})^M` with the method-of-types sum and checks it against
/// the sandwich bounds implied by `α` of the transform.
pub fn bethe_cover_bounds(g: &FactorGraph, lr: &LctResult, m: usize, limits: &Limits) -> Result<BoundsReport> {
    let cond = check_condition(lr);
    let est = zbm_typeformula(g, m, limits)?;
    let ratio = est.value.re / cond.z_star.powi(m as i32);
    Ok(sandwich_bounds(cond.alpha, ratio, m))
}
