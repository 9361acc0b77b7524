//! Factor-graph data model, validation, exact partition functions and the
//! `.nfg.json` document format.
//!
//! Variables live on edges and local functions on nodes. Every edge is a full
//! edge between two distinct nodes `i < j`. In a double-edge graph each edge
//! carries a pair `(x, x')`, stored as a single tensor axis of size `|X|^2`
//! with index `x * |X| + x'`; the special element `(0, 0)` is index 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NfgError, Result};
use crate::limits::Limits;
use crate::tensor::{
    contract_network, hermitian_eigendecompose, Axis, CMatrix, ChoiMatrix, ComplexTensor, C64,
    TOL_HERM, TOL_PSD,
};

pub const SCHEMA: &str = "nfg/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Standard,
    DoubleEdge,
}

impl GraphKind {
    /// Size of the tensor axis for an edge with the given alphabet.
    pub fn axis_size(self, alphabet: usize) -> usize {
        match self {
            GraphKind::Standard => alphabet,
            GraphKind::DoubleEdge => alphabet * alphabet,
        }
    }
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphKind::Standard => "standard",
            GraphKind::DoubleEdge => "double-edge",
        })
    }
}

impl std::str::FromStr for GraphKind {
    type Err = NfgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "s" => Ok(GraphKind::Standard),
            "double-edge" | "de" => Ok(GraphKind::DoubleEdge),
            _ => Err(NfgError::InvalidArgument(format!("unknown graph kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub endpoints: (usize, usize),
    pub alphabet: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    /// Incident edges in axis order.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    kind: GraphKind,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    functions: Vec<ComplexTensor>,
    weak_sense: bool,
}

impl FactorGraph {
    /// Builds a graph, checking structure and the value domain of the kind:
    /// nonnegative reals for standard graphs, Hermitian Choi matrices for
    /// double-edge graphs. The weak-sense flag is set when some Choi matrix is
    /// not PSD.
    pub fn new(
        kind: GraphKind,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        functions: Vec<ComplexTensor>,
    ) -> Result<Self> {
        check_structure(kind, &nodes, &edges, &functions)?;
        let mut g = Self {
            kind,
            nodes,
            edges,
            functions,
            weak_sense: false,
        };
        match kind {
            GraphKind::Standard => {
                for (f, t) in g.functions.iter().enumerate() {
                    if let Some(z) = t.data().iter().find(|z| z.im.abs() > TOL_HERM || z.re < 0.0) {
                        return Err(NfgError::Validation(format!(
                            "node {} ({}) has entry {z}; standard local functions must be real and nonnegative",
                            f, g.nodes[f].name
                        )));
                    }
                }
            }
            GraphKind::DoubleEdge => {
                for f in 0..g.nodes.len() {
                    let choi = g.checked_choi(f)?;
                    if hermitian_eigendecompose(&choi).min_eigenvalue() < -TOL_PSD {
                        g.weak_sense = true;
                    }
                }
            }
        }
        Ok(g)
    }

    /// Builds a graph whose values are only required to be real (standard) or
    /// Hermitian (double-edge). The result is always flagged weak-sense; this
    /// is the form produced by the loop-calculus transform.
    pub fn new_weak(
        kind: GraphKind,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        functions: Vec<ComplexTensor>,
    ) -> Result<Self> {
        Self::new_weak_with_tolerance(kind, nodes, edges, functions, TOL_HERM)
    }

    pub fn new_weak_with_tolerance(
        kind: GraphKind,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        functions: Vec<ComplexTensor>,
        tol: f64,
    ) -> Result<Self> {
        check_structure(kind, &nodes, &edges, &functions)?;
        let g = Self {
            kind,
            nodes,
            edges,
            functions,
            weak_sense: true,
        };
        for f in 0..g.nodes.len() {
            match kind {
                GraphKind::Standard => {
                    if let Some(z) = g.functions[f].data().iter().find(|z| z.im.abs() > tol) {
                        return Err(NfgError::Validation(format!(
                            "node {f} has non-real entry {z}"
                        )));
                    }
                }
                GraphKind::DoubleEdge => {
                    ChoiMatrix::with_tolerance(g.choi_matrix(f), tol).map_err(|e| {
                        NfgError::Validation(format!("node {f} ({}): {e}", g.nodes[f].name))
                    })?;
                }
            }
        }
        Ok(g)
    }

    /// Convenience constructor: incident-edge lists follow edge-id order and
    /// nodes are named `f1, f2, ...`.
    pub fn from_edge_list(
        kind: GraphKind,
        num_nodes: usize,
        edge_list: &[(usize, usize)],
        alphabet: usize,
        functions: Vec<ComplexTensor>,
    ) -> Result<Self> {
        let (nodes, edges) = topology(num_nodes, edge_list, alphabet);
        Self::new(kind, nodes, edges, functions)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn functions(&self) -> &[ComplexTensor] {
        &self.functions
    }

    pub fn function(&self, f: usize) -> &ComplexTensor {
        &self.functions[f]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weak_sense(&self) -> bool {
        self.weak_sense
    }

    pub fn is_strict_sense(&self) -> bool {
        !self.weak_sense
    }

    /// Tensor-axis size of edge `e` (`|X_e|` or `|X_e|^2`).
    pub fn axis_size(&self, e: usize) -> usize {
        self.kind.axis_size(self.edges[e].alphabet)
    }

    /// The endpoint of `e` that is not `f`.
    pub fn other_endpoint(&self, e: usize, f: usize) -> usize {
        let (i, j) = self.edges[e].endpoints;
        if f == i {
            j
        } else {
            i
        }
    }

    /// 0 if `f` is the lower endpoint of `e`, 1 otherwise.
    pub fn endpoint_side(&self, e: usize, f: usize) -> usize {
        usize::from(self.edges[e].endpoints.0 != f)
    }

    /// Total number of configurations, saturating.
    pub fn configuration_count(&self) -> u128 {
        (0..self.num_edges())
            .map(|e| self.axis_size(e) as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// Choi matrix of a double-edge node: rows `x_{P_f}`, columns `x'_{P_f}`.
    pub fn choi_matrix(&self, f: usize) -> CMatrix {
        let alphabets: Vec<usize> = self.nodes[f]
            .edges
            .iter()
            .map(|&e| self.edges[e].alphabet)
            .collect();
        paired_tensor_to_choi(&self.functions[f], &alphabets)
    }

    fn checked_choi(&self, f: usize) -> Result<ChoiMatrix> {
        ChoiMatrix::new(self.choi_matrix(f))
            .map_err(|e| NfgError::Validation(format!("node {f} ({}): {e}", self.nodes[f].name)))
    }

    /// Same graph with new local functions; structure is re-checked.
    pub fn with_functions(&self, functions: Vec<ComplexTensor>, weak: bool) -> Result<Self> {
        if weak {
            Self::new_weak(self.kind, self.nodes.clone(), self.edges.clone(), functions)
        } else {
            Self::new(self.kind, self.nodes.clone(), self.edges.clone(), functions)
        }
    }
}

/// Node and edge lists for a topology given as endpoint pairs.
pub fn topology(num_nodes: usize, edge_list: &[(usize, usize)], alphabet: usize) -> (Vec<Node>, Vec<Edge>) {
    let mut nodes: Vec<Node> = (0..num_nodes)
        .map(|f| Node {
            name: format!("f{}", f + 1),
            edges: Vec::new(),
        })
        .collect();
    let mut edges = Vec::with_capacity(edge_list.len());
    for (e, &(i, j)) in edge_list.iter().enumerate() {
        if i < num_nodes {
            nodes[i].edges.push(e);
        }
        if j < num_nodes && j != i {
            nodes[j].edges.push(e);
        }
        edges.push(Edge {
            endpoints: (i, j),
            alphabet,
        });
    }
    (nodes, edges)
}

fn check_structure(
    kind: GraphKind,
    nodes: &[Node],
    edges: &[Edge],
    functions: &[ComplexTensor],
) -> Result<()> {
    if nodes.len() != functions.len() {
        return Err(NfgError::Structural(format!(
            "{} nodes but {} local functions",
            nodes.len(),
            functions.len()
        )));
    }
    for (e, edge) in edges.iter().enumerate() {
        let (i, j) = edge.endpoints;
        if i >= nodes.len() || j >= nodes.len() {
            return Err(NfgError::Structural(format!(
                "edge {e} is dangling: endpoint ({i}, {j}) refers to a missing node"
            )));
        }
        if i >= j {
            return Err(NfgError::Structural(format!(
                "edge {e} has endpoints ({i}, {j}); full edges need i < j"
            )));
        }
        if edge.alphabet == 0 {
            return Err(NfgError::Structural(format!("edge {e} has an empty alphabet")));
        }
        for f in [i, j] {
            let count = nodes[f].edges.iter().filter(|&&x| x == e).count();
            if count != 1 {
                return Err(NfgError::Structural(format!(
                    "edge {e} appears {count} times in the incident list of node {f}"
                )));
            }
        }
    }
    for (f, node) in nodes.iter().enumerate() {
        for &e in &node.edges {
            let Some(edge) = edges.get(e) else {
                return Err(NfgError::Structural(format!(
                    "node {f} ({}) lists missing edge {e}",
                    node.name
                )));
            };
            if edge.endpoints.0 != f && edge.endpoints.1 != f {
                return Err(NfgError::Structural(format!(
                    "node {f} ({}) lists edge {e}, which does not touch it",
                    node.name
                )));
            }
        }
        let t = &functions[f];
        let labels = t.labels();
        if labels != node.edges {
            return Err(NfgError::Structural(format!(
                "local function of node {f} ({}) has axes {labels:?}, expected {:?}",
                node.name, node.edges
            )));
        }
        for ax in t.axes() {
            let want = kind.axis_size(edges[ax.label].alphabet);
            if ax.size != want {
                return Err(NfgError::Structural(format!(
                    "local function of node {f} ({}) has size {} on edge {}, expected {want}",
                    node.name, ax.size, ax.label
                )));
            }
        }
    }
    Ok(())
}

/// Choi matrix of a tensor whose axes are paired indices `x * q + x'`.
pub fn paired_tensor_to_choi(t: &ComplexTensor, alphabets: &[usize]) -> CMatrix {
    let side: usize = alphabets.iter().product();
    let strides = t.strides();
    let k = alphabets.len();
    let mut out = CMatrix::zeros(side, side);
    let mut row = vec![0usize; k];
    for r in 0..side {
        let mut col = vec![0usize; k];
        for c in 0..side {
            let off: usize = (0..k)
                .map(|a| (row[a] * alphabets[a] + col[a]) * strides[a])
                .sum();
            out.set(r, c, t.data()[off]);
            crate::tensor::next_index(&mut col, alphabets);
        }
        crate::tensor::next_index(&mut row, alphabets);
    }
    out
}

/// Inverse of [`paired_tensor_to_choi`].
pub fn choi_to_paired_tensor(c: &CMatrix, labels: &[usize], alphabets: &[usize]) -> Result<ComplexTensor> {
    let axes: Vec<Axis> = labels
        .iter()
        .zip(alphabets)
        .map(|(&l, &q)| Axis::new(l, q * q))
        .collect();
    let side: usize = alphabets.iter().product();
    if c.rows() != side || c.cols() != side {
        return Err(NfgError::InvalidArgument(format!(
            "Choi matrix is {}x{}, expected side {side}",
            c.rows(),
            c.cols()
        )));
    }
    Ok(ComplexTensor::from_fn(axes, |idx| {
        let mut r = 0;
        let mut col = 0;
        for (a, &q) in alphabets.iter().enumerate() {
            r = r * q + idx[a] / q;
            col = col * q + idx[a] % q;
        }
        c.get(r, col)
    })?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SenseClass {
    /// Standard graph with nonnegative real entries.
    Standard,
    /// Standard kind with signed entries (e.g. after a transform).
    SignedStandard,
    StrictSense,
    WeakSense,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub node: usize,
    pub name: String,
    pub hermitian_deviation: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub psd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub edge: usize,
    pub endpoints: (usize, usize),
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: GraphKind,
    pub classification: SenseClass,
    pub nodes: Vec<NodeReport>,
    pub edges: Vec<EdgeReport>,
}

/// Per-node Hermitian/PSD status and the overall classification.
pub fn validate(g: &FactorGraph) -> Result<ValidationReport> {
    check_structure(g.kind, &g.nodes, &g.edges, &g.functions)?;
    let mut nodes = Vec::with_capacity(g.num_nodes());
    for (f, node) in g.nodes.iter().enumerate() {
        let report = match g.kind {
            GraphKind::Standard => NodeReport {
                node: f,
                name: node.name.clone(),
                hermitian_deviation: None,
                min_eigenvalue: None,
                psd: g.functions[f].data().iter().all(|z| z.re >= 0.0 && z.im.abs() <= TOL_HERM),
            },
            GraphKind::DoubleEdge => {
                let c = g.choi_matrix(f);
                let dev = c.hermitian_deviation();
                let min_eig = ChoiMatrix::new(c)
                    .ok()
                    .map(|ch| hermitian_eigendecompose(&ch).min_eigenvalue());
                NodeReport {
                    node: f,
                    name: node.name.clone(),
                    hermitian_deviation: Some(dev),
                    min_eigenvalue: min_eig,
                    psd: min_eig.is_some_and(|l| l >= -TOL_PSD),
                }
            }
        };
        nodes.push(report);
    }
    let edges = g
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| EdgeReport {
            edge: e,
            endpoints: edge.endpoints,
            ordered: edge.endpoints.0 < edge.endpoints.1,
        })
        .collect();
    let all_ok = nodes.iter().all(|n| n.psd);
    let classification = match (g.kind, all_ok) {
        (GraphKind::Standard, true) => SenseClass::Standard,
        (GraphKind::Standard, false) => SenseClass::SignedStandard,
        (GraphKind::DoubleEdge, true) => SenseClass::StrictSense,
        (GraphKind::DoubleEdge, false) => SenseClass::WeakSense,
    };
    Ok(ValidationReport {
        kind: g.kind,
        classification,
        nodes,
        edges,
    })
}

/// Product of local-function entries selected by a configuration. Each entry
/// of `config` is the axis index of its edge (paired index for double edges).
pub fn global_eval(g: &FactorGraph, config: &[usize]) -> C64 {
    debug_assert_eq!(config.len(), g.num_edges());
    let mut value = C64::new(1.0, 0.0);
    for (f, node) in g.nodes.iter().enumerate() {
        let idx: Vec<usize> = node.edges.iter().map(|&e| config[e]).collect();
        value *= g.functions[f].get(&idx);
        if value == C64::new(0.0, 0.0) {
            break;
        }
    }
    value
}

/// Paired axis index of `(x, x')` on an edge with alphabet `q`.
pub fn pair_index(q: usize, x: usize, xp: usize) -> usize {
    x * q + xp
}

const CHUNK: u64 = 1 << 12;

/// Brute-force sum of the global function over all configurations.
pub fn partition_exact(g: &FactorGraph) -> Result<C64> {
    partition_exact_with(g, &Limits::default())
}

pub fn partition_exact_with(g: &FactorGraph, limits: &Limits) -> Result<C64> {
    let total = g.configuration_count();
    if total > limits.enumeration as u128 {
        return Err(NfgError::Capacity {
            what: "exact enumeration".into(),
            required: total,
            limit: limits.enumeration as u128,
        });
    }
    let total = total as u64;
    let sizes: Vec<usize> = (0..g.num_edges()).map(|e| g.axis_size(e)).collect();
    // Per node: (edge, stride) pairs for offset computation.
    let plan: Vec<Vec<(usize, usize)>> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(f, node)| {
            let strides = g.functions[f].strides();
            node.edges.iter().copied().zip(strides).collect()
        })
        .collect();
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<C64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut config = vec![0usize; sizes.len()];
            let mut rem = start;
            for k in (0..sizes.len()).rev() {
                config[k] = (rem % sizes[k] as u64) as usize;
                rem /= sizes[k] as u64;
            }
            let mut acc = C64::new(0.0, 0.0);
            for _ in start..end {
                let mut v = C64::new(1.0, 0.0);
                for (f, p) in plan.iter().enumerate() {
                    let off: usize = p.iter().map(|&(e, s)| config[e] * s).sum();
                    v *= g.functions[f].data()[off];
                }
                acc += v;
                crate::tensor::next_index(&mut config, &sizes);
            }
            acc
        })
        .collect();
    Ok(partial.into_iter().sum())
}

/// Partition function by greedy tensor-network contraction.
pub fn partition_contract(g: &FactorGraph) -> Result<C64> {
    partition_contract_with(g, &Limits::default())
}

pub fn partition_contract_with(g: &FactorGraph, limits: &Limits) -> Result<C64> {
    Ok(contract_network(g.functions.clone(), limits.contraction)?)
}

/// Embeds a standard graph as a double-edge graph with diagonal Choi
/// matrices `C_f(x, x') = f(x) [x = x']`.
pub fn embed_double_edge(g: &FactorGraph) -> Result<FactorGraph> {
    if g.kind != GraphKind::Standard {
        return Err(NfgError::InvalidArgument("graph is already double-edge".into()));
    }
    let mut functions = Vec::with_capacity(g.num_nodes());
    for (f, node) in g.nodes.iter().enumerate() {
        let qs: Vec<usize> = node.edges.iter().map(|&e| g.edges[e].alphabet).collect();
        let axes: Vec<Axis> = node
            .edges
            .iter()
            .zip(&qs)
            .map(|(&e, &q)| Axis::new(e, q * q))
            .collect();
        let src = &g.functions[f];
        functions.push(ComplexTensor::from_fn(axes, |idx| {
            let mut diag = Vec::with_capacity(idx.len());
            for (a, &q) in qs.iter().enumerate() {
                let (x, xp) = (idx[a] / q, idx[a] % q);
                if x != xp {
                    return C64::new(0.0, 0.0);
                }
                diag.push(x);
            }
            src.get(&diag)
        })?);
    }
    FactorGraph::new(GraphKind::DoubleEdge, g.nodes.clone(), g.edges.clone(), functions)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    schema: String,
    kind: GraphKind,
    weak_sense: bool,
    edges: Vec<EdgeDoc>,
    nodes: Vec<NodeDoc>,
    tensors: Vec<TensorDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: usize,
    endpoints: [usize; 2],
    alphabet: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    name: String,
    edges: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorDoc {
    node: usize,
    axes: Vec<usize>,
    data: Vec<[f64; 2]>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> NfgError {
    NfgError::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Writes the graph as a pretty-printed JSON document with fixed key order.
pub fn serialize(g: &FactorGraph) -> Result<String> {
    let doc = GraphDoc {
        schema: SCHEMA.to_string(),
        kind: g.kind,
        weak_sense: g.weak_sense,
        edges: g
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeDoc {
                id,
                endpoints: [e.endpoints.0, e.endpoints.1],
                alphabet: e.alphabet,
            })
            .collect(),
        nodes: g
            .nodes
            .iter()
            .map(|n| NodeDoc {
                name: n.name.clone(),
                edges: n.edges.clone(),
            })
            .collect(),
        tensors: g
            .functions
            .iter()
            .enumerate()
            .map(|(node, t)| TensorDoc {
                node,
                axes: t.labels(),
                data: t.data().iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect(),
    };
    if g.functions.iter().flat_map(|t| t.data()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NfgError::InvalidArgument(
            "non-finite tensor entries cannot be serialized".into(),
        ));
    }
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| NfgError::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a document written by [`serialize`].
pub fn parse(text: &str) -> Result<FactorGraph> {
    let doc: GraphDoc = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(parse_err(
            "schema",
            format!("unsupported schema `{}`, expected `{SCHEMA}`", doc.schema),
        ));
    }
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (k, e) in doc.edges.iter().enumerate() {
        if e.id != k {
            return Err(parse_err(format!("edges[{k}].id"), format!("expected id {k}, found {}", e.id)));
        }
        edges.push(Edge {
            endpoints: (e.endpoints[0], e.endpoints[1]),
            alphabet: e.alphabet,
        });
    }
    let nodes: Vec<Node> = doc
        .nodes
        .iter()
        .map(|n| Node {
            name: n.name.clone(),
            edges: n.edges.clone(),
        })
        .collect();
    if doc.tensors.len() != nodes.len() {
        return Err(parse_err(
            "tensors",
            format!("{} tensors for {} nodes", doc.tensors.len(), nodes.len()),
        ));
    }
    let mut functions = Vec::with_capacity(nodes.len());
    for (k, t) in doc.tensors.iter().enumerate() {
        if t.node != k {
            return Err(parse_err(format!("tensors[{k}].node"), format!("expected node {k}, found {}", t.node)));
        }
        if t.axes != nodes[k].edges {
            return Err(parse_err(
                format!("tensors[{k}].axes"),
                format!("axis order {:?} does not match incident edges {:?}", t.axes, nodes[k].edges),
            ));
        }
        let mut axes = Vec::with_capacity(t.axes.len());
        for &e in &t.axes {
            let edge = edges
                .get(e)
                .ok_or_else(|| parse_err(format!("tensors[{k}].axes"), format!("unknown edge {e}")))?;
            axes.push(Axis::new(e, doc.kind.axis_size(edge.alphabet)));
        }
        let data = t.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        functions.push(
            ComplexTensor::new(axes, data)
                .map_err(|e| parse_err(format!("tensors[{k}].data"), e.to_string()))?,
        );
    }
    if doc.weak_sense {
        FactorGraph::new_weak(doc.kind, nodes, edges, functions)
    } else {
        let g = FactorGraph::new(doc.kind, nodes, edges, functions)?;
        if g.weak_sense {
            return Err(parse_err(
                "weak_sense",
                "document declares strict sense but a Choi matrix is not PSD",
            ));
        }
        Ok(g)
    }
}
