//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{NfgError, Result};
use crate::nfg::{choi_to_paired_tensor, topology, FactorGraph, GraphKind, Node};
use crate::tensor::{Axis, CMatrix, ComplexTensor, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// 4 nodes, 5 edges.
    Fig3,
    /// 4 nodes, 6 edges.
    FigB,
    Cycle(usize),
    /// Random tree on `n` nodes.
    Tree(usize),
    /// `ρ – Ũ – B̃ – I` chain of a state, two unitaries and a trace.
    UnitaryChain,
}

impl std::str::FromStr for Topology {
    type Err = NfgError;

    fn from_str(s: &str) -> Result<Self> {
        let arg = |name: &str| -> Result<usize> {
            let inner = s
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| s.strip_prefix(name).and_then(|r| r.strip_prefix(':')))
                .ok_or_else(|| NfgError::InvalidArgument(format!("expected {name}(n), got `{s}`")))?;
            inner
                .parse()
                .map_err(|_| NfgError::InvalidArgument(format!("bad node count in `{s}`")))
        };
        match s {
            "fig3" => Ok(Topology::Fig3),
            "fig-b" | "figb" => Ok(Topology::FigB),
            "unitary-chain" => Ok(Topology::UnitaryChain),
            _ if s.starts_with("cycle") => Ok(Topology::Cycle(arg("cycle")?)),
            _ if s.starts_with("tree") => Ok(Topology::Tree(arg("tree")?)),
            _ => Err(NfgError::InvalidArgument(format!("unknown topology `{s}`"))),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Topology::Fig3 => write!(f, "fig3"),
            Topology::FigB => write!(f, "fig-b"),
            Topology::Cycle(n) => write!(f, "cycle({n})"),
            Topology::Tree(n) => write!(f, "tree({n})"),
            Topology::UnitaryChain => write!(f, "unitary-chain"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// `C_f = A A^H`, trace-normalized to the side of `C_f`.
    PsdRandom,
    /// `C_f = I + η A A^H / ‖A A^H‖_max`.
    PsdNearIdentity { eta: f64 },
    /// Entries uniform in `(0, 1]`.
    PositiveSnfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub topology: Topology,
    pub alphabet: usize,
    pub kind: GraphKind,
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(topology: Topology, kind: GraphKind, ensemble: Ensemble, seed: u64) -> Self {
        Self {
            topology,
            alphabet: 2,
            kind,
            ensemble,
            seed,
        }
    }
}

pub const FIG3_EDGES: [(usize, usize); 5] = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];
pub const FIGB_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 3), (1, 2), (2, 3)];

/// Endpoint list and node count of a topology.
pub fn edge_list(topology: Topology, rng: &mut impl Rng) -> Result<(usize, Vec<(usize, usize)>)> {
    match topology {
        Topology::Fig3 => Ok((4, FIG3_EDGES.to_vec())),
        Topology::FigB => Ok((4, FIGB_EDGES.to_vec())),
        Topology::UnitaryChain => Ok((4, vec![(0, 1), (1, 2), (2, 3)])),
        Topology::Cycle(n) => {
            if n < 2 {
                return Err(NfgError::InvalidArgument("a cycle needs at least 2 nodes".into()));
            }
            let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|k| (k, k + 1)).collect();
            edges.push((0, n - 1));
            Ok((n, edges))
        }
        Topology::Tree(n) => {
            if n < 2 {
                return Err(NfgError::InvalidArgument("a tree needs at least 2 nodes".into()));
            }
            let edges = (1..n).map(|k| (rng.random_range(0..k), k)).collect();
            Ok((n, edges))
        }
    }
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `A A^H` for an `n x n` complex standard-Gaussian `A`.
pub fn random_gram(n: usize, rng: &mut impl Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    a.mul(&a.adjoint())
}

/// Haar-like random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| a.get(i, j)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

fn ensemble_choi(ensemble: Ensemble, side: usize, rng: &mut impl Rng) -> Result<CMatrix> {
    match ensemble {
        Ensemble::PsdRandom => {
            let c = random_gram(side, rng);
            let tr = c.trace().re;
            Ok(c.scale(C64::new(side as f64 / tr, 0.0)))
        }
        Ensemble::PsdNearIdentity { eta } => {
            let c = random_gram(side, rng);
            let scale = c.max_abs();
            Ok(CMatrix::identity(side).add(&c.scale(C64::new(eta / scale, 0.0))))
        }
        Ensemble::PositiveSnfg => Err(NfgError::InvalidArgument(
            "positive-s-nfg is an ensemble for standard graphs".into(),
        )),
    }
}

/// Builds a graph from the spec; deterministic in the seed.
pub fn gen(spec: &GeneratorSpec) -> Result<FactorGraph> {
    if spec.alphabet == 0 {
        return Err(NfgError::InvalidArgument("alphabet must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    if spec.topology == Topology::UnitaryChain {
        if spec.kind != GraphKind::DoubleEdge {
            return Err(NfgError::InvalidArgument("the unitary chain is a double-edge graph".into()));
        }
        return unitary_chain(spec.alphabet, &mut rng);
    }
    let (n, edges) = edge_list(spec.topology, &mut rng)?;
    let q = spec.alphabet;
    let (nodes, edge_defs) = topology(n, &edges, q);
    let mut functions = Vec::with_capacity(n);
    match (spec.kind, spec.ensemble) {
        (GraphKind::Standard, Ensemble::PositiveSnfg) => {
            for node in &nodes {
                let axes: Vec<Axis> = node.edges.iter().map(|&e| Axis::new(e, q)).collect();
                functions.push(ComplexTensor::from_fn(axes, |_| {
                    C64::new(1.0 - rng.random::<f64>(), 0.0)
                })?);
            }
        }
        (GraphKind::Standard, _) => {
            return Err(NfgError::InvalidArgument(
                "standard graphs use the positive-s-nfg ensemble".into(),
            ))
        }
        (GraphKind::DoubleEdge, ensemble) => {
            for node in &nodes {
                let side = q.pow(node.edges.len() as u32);
                let c = ensemble_choi(ensemble, side, &mut rng)?;
                let alphabets = vec![q; node.edges.len()];
                functions.push(choi_to_paired_tensor(&c, &node.edges, &alphabets)?);
            }
        }
    }
    FactorGraph::new(spec.kind, nodes, edge_defs, functions)
}

/// State `ρ`, unitaries `U`, `B` and a trace node `I`; `Z = tr(B U ρ U^H B^H) = 1`.
pub fn unitary_chain(q: usize, rng: &mut impl Rng) -> Result<FactorGraph> {
    let rho = {
        let c = random_gram(q, rng);
        let tr = c.trace().re;
        c.scale(C64::new(1.0 / tr, 0.0))
    };
    let u = random_unitary(q, rng);
    let b = random_unitary(q, rng);
    // Edges: 0 = (ρ, U) carries x1, 1 = (U, B) carries x2, 2 = (B, I) carries x3.
    let edges = [(0usize, 1usize), (1, 2), (2, 3)];
    let (_, edge_defs) = topology(4, &edges, q);
    let nodes = vec![
        Node { name: "rho".into(), edges: vec![0] },
        Node { name: "U".into(), edges: vec![1, 0] },
        Node { name: "B".into(), edges: vec![2, 1] },
        Node { name: "I".into(), edges: vec![2] },
    ];
    // Ũ((x2,x1),(x2',x1')) = U(x2,x1) conj(U(x2',x1')) as a Choi matrix on (x2,x1).
    let lift = |m: &CMatrix| {
        let vec: Vec<C64> = (0..q * q).map(|r| m.get(r / q, r % q)).collect();
        CMatrix::from_fn(q * q, q * q, |r, c| vec[r] * vec[c].conj())
    };
    let functions = vec![
        choi_to_paired_tensor(&rho, &[0], &[q])?,
        choi_to_paired_tensor(&lift(&u), &[1, 0], &[q, q])?,
        choi_to_paired_tensor(&lift(&b), &[2, 1], &[q, q])?,
        choi_to_paired_tensor(&CMatrix::identity(q), &[2], &[q])?,
    ];
    FactorGraph::new(GraphKind::DoubleEdge, nodes, edge_defs, functions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfg::{partition_exact, validate, SenseClass};

    #[test]
    fn unitary_chain_has_unit_partition_function() {
        let g = gen(&GeneratorSpec::new(Topology::UnitaryChain, GraphKind::DoubleEdge, Ensemble::PsdRandom, 3)).unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(validate(&g).unwrap().classification, SenseClass::StrictSense);
        let z = partition_exact(&g).unwrap();
        assert!((z - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(3, &mut rng);
        assert!(u.adjoint().mul(&u).max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn positive_entries_in_unit_interval() {
        let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::Standard, Ensemble::PositiveSnfg, 0)).unwrap();
        for t in g.functions() {
            assert!(t.data().iter().all(|z| z.re > 0.0 && z.re <= 1.0 && z.im == 0.0));
        }
    }

    #[test]
    fn psd_random_is_strict_sense() {
        let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::DoubleEdge, Ensemble::PsdRandom, 7)).unwrap();
        assert_eq!(validate(&g).unwrap().classification, SenseClass::StrictSense);
    }

    #[test]
    fn topology_parsing() {
        assert_eq!("cycle(3)".parse::<Topology>().unwrap(), Topology::Cycle(3));
        assert_eq!("tree:5".parse::<Topology>().unwrap(), Topology::Tree(5));
        assert!("star".parse::<Topology>().is_err());
    }
}
