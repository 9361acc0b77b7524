#![allow(dead_code)]

use nfg_core::nfg::{FactorGraph, GraphKind};
use nfg_core::tensor::{Axis, ComplexTensor, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Brute-force partition function: sum over every edge assignment of the
/// product of directly indexed local-function entries.
pub fn brute_force_z(g: &FactorGraph) -> C64 {
    let sizes: Vec<usize> = (0..g.num_edges()).map(|e| g.axis_size(e)).collect();
    let mut x = vec![0usize; sizes.len()];
    let mut total = C64::new(0.0, 0.0);
    loop {
        let mut p = c(1.0);
        for (f, node) in g.nodes().iter().enumerate() {
            let idx: Vec<usize> = node.edges.iter().map(|&e| x[e]).collect();
            p *= g.function(f).get(&idx);
        }
        total += p;
        let mut k = 0;
        loop {
            if k == x.len() {
                return total;
            }
            x[k] += 1;
            if x[k] < sizes[k] {
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

fn matrix_tensor(data: [f64; 4]) -> ComplexTensor {
    ComplexTensor::new(
        vec![Axis::new(0, 2), Axis::new(1, 2)],
        data.iter().map(|&v| c(v)).collect(),
    )
    .unwrap()
}

/// Two nodes joined by two binary edges with the given 2x2 local functions.
pub fn two_cycle(f1: [f64; 4], f2: [f64; 4]) -> FactorGraph {
    FactorGraph::from_edge_list(
        GraphKind::Standard,
        2,
        &[(0, 1), (0, 1)],
        2,
        vec![matrix_tensor(f1), matrix_tensor(f2)],
    )
    .unwrap()
}

/// The 2-cycle with `f1 = [[1,1],[0,1]]` and `f2 = I`.
pub fn jordan_cycle() -> FactorGraph {
    two_cycle([1.0, 1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0])
}
