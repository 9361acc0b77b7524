//! Sum-product algorithm, beliefs, the Bethe partition function at SPA
//! fixed points and the Bethe free energy of standard graphs.
//!
//! `µ_{e,f}` denotes the message travelling along `e` into node `f`. It is
//! computed at the opposite endpoint of `e` by summing that node's local
//! function against all of its other incoming messages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NfgError, Result};
use crate::nfg::{FactorGraph, GraphKind};
use crate::tensor::{next_index, project_psd, CMatrix, ComplexTensor, C64};

/// Scaling factors at or below this magnitude count as zero.
pub const TOL_ZERO: f64 = 1e-14;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Messages {
    /// `to[e][s]` is the message on edge `e` into endpoint `s` (0 = lower node).
    to: Vec<[Vec<C64>; 2]>,
}

impl Messages {
    pub fn new(g: &FactorGraph, to: Vec<[Vec<C64>; 2]>) -> Result<Self> {
        if to.len() != g.num_edges() {
            return Err(NfgError::InvalidArgument(format!(
                "{} message pairs for {} edges",
                to.len(),
                g.num_edges()
            )));
        }
        for (e, pair) in to.iter().enumerate() {
            for v in pair {
                if v.len() != g.axis_size(e) {
                    return Err(NfgError::InvalidArgument(format!(
                        "message on edge {e} has length {}, expected {}",
                        v.len(),
                        g.axis_size(e)
                    )));
                }
            }
        }
        Ok(Self { to })
    }

    pub fn uniform(g: &FactorGraph) -> Self {
        let to = (0..g.num_edges())
            .map(|e| {
                let n = g.axis_size(e);
                let v = vec![C64::new(1.0 / n as f64, 0.0); n];
                [v.clone(), v]
            })
            .collect();
        Self { to }
    }

    /// Independent random normalized messages (simplex draws for standard
    /// graphs, PSD draws for double-edge graphs).
    pub fn random(g: &FactorGraph, rng: &mut impl Rng) -> Self {
        let to = (0..g.num_edges())
            .map(|e| {
                let q = g.edges()[e].alphabet;
                [random_message(g.kind(), q, rng), random_message(g.kind(), q, rng)]
            })
            .collect();
        Self { to }
    }

    pub fn num_edges(&self) -> usize {
        self.to.len()
    }

    /// Message on `e` into endpoint side `side`.
    pub fn get(&self, e: usize, side: usize) -> &[C64] {
        &self.to[e][side]
    }

    pub fn set(&mut self, e: usize, side: usize, v: Vec<C64>) {
        assert_eq!(v.len(), self.to[e][side].len());
        self.to[e][side] = v;
    }

    /// Message on `e` into node `f`.
    pub fn into_node(&self, g: &FactorGraph, e: usize, f: usize) -> &[C64] {
        &self.to[e][g.endpoint_side(e, f)]
    }

    pub fn scaled(&self, e: usize, side: usize, s: C64) -> Self {
        let mut out = self.clone();
        for z in &mut out.to[e][side] {
            *z *= s;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Messages) -> f64 {
        self.to
            .iter()
            .zip(&other.to)
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    fn blend(&self, old: &Messages, gamma: f64) -> Messages {
        let mut out = self.clone();
        for (a, b) in out.to.iter_mut().zip(&old.to) {
            for s in 0..2 {
                for (x, y) in a[s].iter_mut().zip(&b[s]) {
                    *x = *x * (1.0 - gamma) + y * gamma;
                }
            }
        }
        out
    }
}

fn unit_disk(rng: &mut impl Rng) -> C64 {
    let r = rng.random::<f64>().sqrt();
    let t = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, t)
}

/// A random normalized message. Standard: uniform on the simplex.
/// Double-edge: unit-disk entries, Hermitian part, negative eigenvalues
/// clipped, then scaled to sum 1.
pub fn random_message(kind: GraphKind, q: usize, rng: &mut impl Rng) -> Vec<C64> {
    match kind {
        GraphKind::Standard => {
            let w: Vec<f64> = (0..q).map(|_| Exp1.sample(rng)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| C64::new(x / s, 0.0)).collect()
        }
        GraphKind::DoubleEdge => loop {
            let raw = CMatrix::from_fn(q, q, |_, _| unit_disk(rng));
            let psd = project_psd(&raw);
            let s: C64 = psd.data().iter().sum();
            if s.re > 1e-6 {
                // Entries of a PSD matrix sum to a real nonnegative value.
                break psd.data().iter().map(|z| z / s.re).collect();
            }
        },
    }
}

/// Unnormalized outgoing messages of node `f`, one per incident edge position.
fn node_outgoing(g: &FactorGraph, m: &Messages, f: usize) -> Vec<Vec<C64>> {
    let node = &g.nodes()[f];
    let t = g.function(f);
    let sizes = t.sizes();
    let k = sizes.len();
    let incoming: Vec<&[C64]> = node.edges.iter().map(|&e| m.into_node(g, e, f)).collect();
    let mut out: Vec<Vec<C64>> = sizes.iter().map(|&n| vec![ZERO; n]).collect();
    let mut idx = vec![0usize; k];
    let mut prefix = vec![C64::new(1.0, 0.0); k + 1];
    let mut suffix = vec![C64::new(1.0, 0.0); k + 1];
    for &val in t.data() {
        if val != ZERO {
            for a in 0..k {
                prefix[a + 1] = prefix[a] * incoming[a][idx[a]];
            }
            for a in (0..k).rev() {
                suffix[a] = suffix[a + 1] * incoming[a][idx[a]];
            }
            for a in 0..k {
                out[a][idx[a]] += val * prefix[a] * suffix[a + 1];
            }
        }
        next_index(&mut idx, &sizes);
    }
    out
}

/// `Σ_x f(x) Π_e µ_{e,f}(x_e)`.
pub fn node_partition(g: &FactorGraph, m: &Messages, f: usize) -> C64 {
    let node = &g.nodes()[f];
    let t = g.function(f);
    let sizes = t.sizes();
    let incoming: Vec<&[C64]> = node.edges.iter().map(|&e| m.into_node(g, e, f)).collect();
    let mut idx = vec![0usize; sizes.len()];
    let mut acc = ZERO;
    for &val in t.data() {
        if val != ZERO {
            let mut p = val;
            for (a, v) in incoming.iter().enumerate() {
                p *= v[idx[a]];
            }
            acc += p;
        }
        next_index(&mut idx, &sizes);
    }
    acc
}

/// `Σ_x µ_{e,fi}(x) µ_{e,fj}(x)` (no conjugation).
pub fn edge_partition(m: &Messages, e: usize) -> C64 {
    m.get(e, 0).iter().zip(m.get(e, 1)).map(|(a, b)| a * b).sum()
}

/// The message update without normalization: new messages and their
/// scaling factors `κ_{e,f}`.
pub fn raw_update(g: &FactorGraph, m: &Messages) -> (Messages, Vec<[C64; 2]>) {
    let per_node: Vec<Vec<Vec<C64>>> = (0..g.num_nodes()).map(|f| node_outgoing(g, m, f)).collect();
    let mut to: Vec<[Vec<C64>; 2]> = (0..g.num_edges()).map(|_| [Vec::new(), Vec::new()]).collect();
    let mut kappa = vec![[ZERO; 2]; g.num_edges()];
    for (f, outs) in per_node.into_iter().enumerate() {
        for (pos, v) in outs.into_iter().enumerate() {
            let e = g.nodes()[f].edges[pos];
            let target_side = 1 - g.endpoint_side(e, f);
            kappa[e][target_side] = v.iter().sum();
            to[e][target_side] = v;
        }
    }
    (Messages { to }, kappa)
}

/// `f_SPA(µ)` with every message divided by its scaling factor. Fails if some
/// scaling factor vanishes.
pub fn spa_map(g: &FactorGraph, m: &Messages) -> Result<Messages> {
    let (mut out, kappa) = raw_update(g, m);
    for e in 0..g.num_edges() {
        for s in 0..2 {
            let k = kappa[e][s];
            if k.norm() <= TOL_ZERO {
                return Err(NfgError::DegenerateBelief(format!("message on edge {e} side {s}")));
            }
            for z in &mut out.to[e][s] {
                *z /= k;
            }
        }
    }
    Ok(out)
}

/// `‖f_SPA(µ) − µ‖_max`; infinite if the update is degenerate.
pub fn fixed_point_residual(g: &FactorGraph, m: &Messages) -> f64 {
    match spa_map(g, m) {
        Ok(next) => next.max_abs_diff(m),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub messages: Messages,
    /// Edges whose five scaling factors had a zero product.
    pub degenerate_edges: Vec<usize>,
}

/// One synchronous update of all messages. Edges whose scaling factors
/// vanish trigger a random redraw of every message into both endpoints.
pub fn spa_step(g: &FactorGraph, m: &Messages, rng: &mut impl Rng) -> StepOutcome {
    let (mut next, kappa) = raw_update(g, m);
    for e in 0..g.num_edges() {
        for s in 0..2 {
            let k = kappa[e][s];
            if k.norm() > TOL_ZERO {
                for z in &mut next.to[e][s] {
                    *z /= k;
                }
            }
        }
    }
    let z_f: Vec<C64> = (0..g.num_nodes()).map(|f| node_partition(g, &next, f)).collect();
    let mut degenerate_edges = Vec::new();
    let mut redraw = vec![false; g.num_nodes()];
    for (e, edge) in g.edges().iter().enumerate() {
        let (i, j) = edge.endpoints;
        let kappa_e = edge_partition(&next, e);
        let factors = [kappa[e][0], kappa[e][1], kappa_e, z_f[i], z_f[j]];
        if factors.iter().any(|k| k.norm() <= TOL_ZERO) {
            degenerate_edges.push(e);
            redraw[i] = true;
            redraw[j] = true;
        }
    }
    for f in (0..g.num_nodes()).filter(|&f| redraw[f]) {
        for &e in &g.nodes()[f].edges {
            let side = g.endpoint_side(e, f);
            next.to[e][side] = random_message(g.kind(), g.edges()[e].alphabet, rng);
        }
    }
    StepOutcome {
        messages: next,
        degenerate_edges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Uniform,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaOptions {
    pub init: Init,
    pub max_iter: usize,
    pub tol_fp: f64,
    pub damping: f64,
    /// Damping switched on when the residual stalls; 0 disables the fallback.
    pub fallback_damping: f64,
    /// Extra runs from seeded random messages after the first run.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SpaOptions {
    fn default() -> Self {
        Self {
            init: Init::Uniform,
            max_iter: 10_000,
            tol_fp: 1e-9,
            damping: 0.0,
            fallback_damping: 0.5,
            restarts: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateEvent {
    pub run: usize,
    pub iteration: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub damping: f64,
    pub z_bethe: Option<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub restarts_used: usize,
    /// Best fixed point; for a failed run, the last iterate of the run with
    /// the smallest residual.
    pub messages: Option<Messages>,
    pub z_f: Vec<C64>,
    pub z_e: Vec<C64>,
    pub z_bethe: Option<C64>,
    pub degenerate_events: Vec<DegenerateEvent>,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheParts {
    pub z_f: Vec<C64>,
    pub z_e: Vec<C64>,
    /// `Π Z_f / Π Z_e`; absent when some `Z_e` vanishes.
    pub z_bethe: Option<C64>,
}

/// `Z_f`, `Z_e` and `Z_B = Π Z_f / Π Z_e` at the given messages.
pub fn bethe_parts(g: &FactorGraph, m: &Messages) -> BetheParts {
    let z_f: Vec<C64> = (0..g.num_nodes()).map(|f| node_partition(g, m, f)).collect();
    let z_e: Vec<C64> = (0..g.num_edges()).map(|e| edge_partition(m, e)).collect();
    let z_bethe = if z_e.iter().any(|z| z.norm() <= TOL_ZERO) {
        None
    } else {
        let num: C64 = z_f.iter().product();
        let den: C64 = z_e.iter().product();
        Some(num / den)
    };
    BetheParts { z_f, z_e, z_bethe }
}

struct RunOutcome {
    summary: RunSummary,
    messages: Messages,
    events: Vec<DegenerateEvent>,
}

fn single_run(g: &FactorGraph, opts: &SpaOptions, run: usize) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(run as u64);
    let mut m = if run == 0 && opts.init == Init::Uniform {
        Messages::uniform(g)
    } else {
        Messages::random(g, &mut rng)
    };
    let mut gamma = opts.damping;
    let mut events = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let step = spa_step(g, &m, &mut rng);
        residual = step.messages.max_abs_diff(&m);
        if step.degenerate_edges.is_empty() && residual <= opts.tol_fp {
            converged = true;
            break;
        }
        for &edge in &step.degenerate_edges {
            events.push(DegenerateEvent { run, iteration: it, edge });
        }
        m = if gamma > 0.0 && step.degenerate_edges.is_empty() {
            step.messages.blend(&m, gamma)
        } else {
            step.messages
        };
        history.push(residual);
        if gamma == 0.0 && opts.fallback_damping > 0.0 && it >= 200 && it % 100 == 0 {
            let earlier = history[it - 101];
            if residual > 0.5 * earlier {
                gamma = opts.fallback_damping;
            }
        }
    }
    let z_bethe = if converged { bethe_parts(g, &m).z_bethe } else { None };
    RunOutcome {
        summary: RunSummary {
            converged,
            iterations,
            residual,
            damping: gamma,
            z_bethe,
        },
        messages: m,
        events,
    }
}

/// Runs the SPA from the requested start plus `restarts` seeded random
/// starts and keeps the converged fixed point with the largest `Re Z_B`.
pub fn spa_run(g: &FactorGraph, opts: &SpaOptions) -> SpaReport {
    let runs: Vec<RunOutcome> = (0..=opts.restarts)
        .into_par_iter()
        .map(|r| single_run(g, opts, r))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.summary.converged && r.summary.z_bethe.is_some())
        .max_by(|(ia, a), (ib, b)| {
            let za = a.summary.z_bethe.unwrap().re;
            let zb = b.summary.z_bethe.unwrap().re;
            za.total_cmp(&zb).then(ib.cmp(ia))
        })
        .map(|(i, _)| i);
    let events: Vec<DegenerateEvent> = runs.iter().flat_map(|r| r.events.iter().cloned()).collect();
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    match best {
        Some(i) => {
            let r = &runs[i];
            let parts = bethe_parts(g, &r.messages);
            SpaReport {
                converged: true,
                iterations: r.summary.iterations,
                residual: r.summary.residual,
                restarts_used: runs.len(),
                messages: Some(r.messages.clone()),
                z_f: parts.z_f,
                z_e: parts.z_e,
                z_bethe: parts.z_bethe,
                degenerate_events: events,
                runs: summaries,
            }
        }
        None => {
            let closest = runs
                .iter()
                .min_by(|a, b| a.summary.residual.total_cmp(&b.summary.residual))
                .expect("at least one run");
            SpaReport {
                converged: false,
                iterations: closest.summary.iterations,
                residual: closest.summary.residual,
                restarts_used: runs.len(),
                messages: Some(closest.messages.clone()),
                z_f: Vec::new(),
                z_e: Vec::new(),
                z_bethe: None,
                degenerate_events: events,
                runs: summaries,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beliefs {
    pub edges: Vec<Vec<C64>>,
    pub nodes: Vec<ComplexTensor>,
}

/// Normalized edge and node beliefs induced by the messages.
pub fn beliefs_at(g: &FactorGraph, m: &Messages) -> Result<Beliefs> {
    let mut edges = Vec::with_capacity(g.num_edges());
    for e in 0..g.num_edges() {
        let prod: Vec<C64> = m.get(e, 0).iter().zip(m.get(e, 1)).map(|(a, b)| a * b).collect();
        let k: C64 = prod.iter().sum();
        if k.norm() <= TOL_ZERO {
            return Err(NfgError::DegenerateBelief(format!("edge {e}")));
        }
        edges.push(prod.into_iter().map(|z| z / k).collect());
    }
    let mut nodes = Vec::with_capacity(g.num_nodes());
    for f in 0..g.num_nodes() {
        let node = &g.nodes()[f];
        let incoming: Vec<&[C64]> = node.edges.iter().map(|&e| m.into_node(g, e, f)).collect();
        let t = g.function(f);
        let sizes = t.sizes();
        let mut idx = vec![0; sizes.len()];
        let mut data = Vec::with_capacity(t.len());
        for &val in t.data() {
            let mut p = val;
            for (a, v) in incoming.iter().enumerate() {
                p *= v[idx[a]];
            }
            data.push(p);
            next_index(&mut idx, &sizes);
        }
        let k: C64 = data.iter().sum();
        if k.norm() <= TOL_ZERO {
            return Err(NfgError::DegenerateBelief(format!("node {f} ({})", node.name)));
        }
        for z in &mut data {
            *z /= k;
        }
        nodes.push(ComplexTensor::new(t.axes().to_vec(), data)?);
    }
    Ok(Beliefs { edges, nodes })
}

/// Sum of a tensor over all axes except `label`.
pub fn marginal(t: &ComplexTensor, label: usize) -> Vec<C64> {
    let pos = t.axis_position(label).expect("label present");
    let sizes = t.sizes();
    let mut out = vec![ZERO; sizes[pos]];
    let mut idx = vec![0; sizes.len()];
    for &v in t.data() {
        out[idx[pos]] += v;
        next_index(&mut idx, &sizes);
    }
    out
}

/// `max |Σ_{x_{P_f∖e}} β_f − β_e|` over all node/edge incidences.
pub fn consistency_residual(g: &FactorGraph, b: &Beliefs) -> f64 {
    let mut worst = 0.0f64;
    for (f, node) in g.nodes().iter().enumerate() {
        for &e in &node.edges {
            let marg = marginal(&b.nodes[f], e);
            for (x, y) in marg.iter().zip(&b.edges[e]) {
                worst = worst.max((x - y).norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergy {
    /// `U_B − H_B`; `+∞` when `divergent`.
    pub value: f64,
    pub internal_energy: f64,
    pub entropy: f64,
    /// A node belief is positive where its local function vanishes.
    pub divergent: bool,
}

fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

/// Bethe free energy `F_B = U_B − H_B` of a standard graph at beliefs `b`.
pub fn bethe_free_energy(g: &FactorGraph, b: &Beliefs) -> Result<FreeEnergy> {
    const TOL: f64 = 1e-6;
    if g.kind() != GraphKind::Standard {
        return Err(NfgError::InvalidArgument(
            "the Bethe free energy is only evaluated for standard graphs".into(),
        ));
    }
    let simplex = |v: &mut dyn Iterator<Item = &C64>, what: String| -> Result<()> {
        let mut s = 0.0;
        for z in v {
            if z.re < -TOL || z.im.abs() > TOL {
                return Err(NfgError::Validation(format!("{what} has entry {z} outside the simplex")));
            }
            s += z.re;
        }
        if (s - 1.0).abs() > TOL {
            return Err(NfgError::Validation(format!("{what} sums to {s}")));
        }
        Ok(())
    };
    for (e, v) in b.edges.iter().enumerate() {
        simplex(&mut v.iter(), format!("edge belief {e}"))?;
    }
    for (f, t) in b.nodes.iter().enumerate() {
        simplex(&mut t.data().iter(), format!("node belief {f}"))?;
    }
    let resid = consistency_residual(g, b);
    if resid > TOL {
        return Err(NfgError::Validation(format!(
            "beliefs are not locally consistent (residual {resid:e})"
        )));
    }
    let mut u = 0.0;
    let mut divergent = false;
    for (f, t) in b.nodes.iter().enumerate() {
        for (beta, val) in t.data().iter().zip(g.function(f).data()) {
            if beta.re <= 0.0 {
                continue;
            }
            if val.re <= 0.0 {
                divergent = true;
            } else {
                u -= beta.re * val.re.ln();
            }
        }
    }
    let h_nodes: f64 = b.nodes.iter().map(|t| entropy(t.data().iter().map(|z| z.re))).sum();
    let h_edges: f64 = b.edges.iter().map(|v| entropy(v.iter().map(|z| z.re))).sum();
    let h = h_nodes - h_edges;
    Ok(FreeEnergy {
        value: if divergent { f64::INFINITY } else { u - h },
        internal_energy: if divergent { f64::INFINITY } else { u },
        entropy: h,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Axis;

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn ones_cycle() -> FactorGraph {
        let t = || ComplexTensor::new(vec![Axis::new(0, 2), Axis::new(1, 2)], real(&[1.0; 4])).unwrap();
        FactorGraph::from_edge_list(GraphKind::Standard, 2, &[(0, 1), (0, 1)], 2, vec![t(), t()]).unwrap()
    }

    #[test]
    fn uniform_is_fixed_point_of_all_ones() {
        let g = ones_cycle();
        let m = Messages::uniform(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let step = spa_step(&g, &m, &mut rng);
        assert!(step.degenerate_edges.is_empty());
        assert_eq!(step.messages.max_abs_diff(&m), 0.0);
        let b = beliefs_at(&g, &m).unwrap();
        for v in &b.edges {
            assert_eq!(v, &real(&[0.5, 0.5]));
        }
        assert!(b.nodes.iter().all(|t| t.data().iter().all(|z| *z == C64::new(0.25, 0.0))));
    }

    #[test]
    fn free_energy_of_all_ones_cycle() {
        // U = 0 and H = 2 log 4 - 2 log 2, so exp(-F) = 4 = Z.
        let g = ones_cycle();
        let b = beliefs_at(&g, &Messages::uniform(&g)).unwrap();
        let fe = bethe_free_energy(&g, &b).unwrap();
        assert!(((-fe.value).exp() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_de_messages_are_psd_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v = random_message(GraphKind::DoubleEdge, 3, &mut rng);
            let s: C64 = v.iter().sum();
            assert!((s - C64::new(1.0, 0.0)).norm() < 1e-12);
            let c = CMatrix::from_vec(3, 3, v).unwrap();
            let ch = crate::tensor::ChoiMatrix::new(c).unwrap();
            assert!(crate::tensor::min_eigenvalue(&ch) > -1e-12);
        }
    }
}
