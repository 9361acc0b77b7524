mod common;

use common::*;
use nfg_core::cover::{build_cover, CoverSpec};
use nfg_core::gen::*;
use nfg_core::limits::Limits;
use nfg_core::nfg::*;
use nfg_core::tensor::{Axis, CMatrix, ComplexTensor, C64};
use nfg_core::NfgError;

fn identity_fig3() -> FactorGraph {
    let (nodes, edges) = topology(4, &FIG3_EDGES, 2);
    let functions = nodes
        .iter()
        .map(|n| {
            let side = 1 << n.edges.len();
            choi_to_paired_tensor(&CMatrix::identity(side), &n.edges, &vec![2; n.edges.len()]).unwrap()
        })
        .collect();
    FactorGraph::new(GraphKind::DoubleEdge, nodes, edges, functions).unwrap()
}

#[test]
fn identity_choi_fig3_is_strict() {
    let g = identity_fig3();
    let report = validate(&g).unwrap();
    assert_eq!(report.classification, SenseClass::StrictSense);
    assert!(report.edges.iter().all(|e| e.ordered));
    assert_eq!(report.nodes.len(), 4);
    assert_eq!(g.num_edges(), 5);
}

#[test]
fn negative_eigenvalue_makes_weak_sense() {
    let (nodes, edges) = topology(2, &[(0, 1)], 2);
    let flip = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let functions = vec![
        choi_to_paired_tensor(&flip, &[0], &[2]).unwrap(),
        choi_to_paired_tensor(&CMatrix::identity(2), &[0], &[2]).unwrap(),
    ];
    let g = FactorGraph::new(GraphKind::DoubleEdge, nodes, edges, functions).unwrap();
    assert!(g.weak_sense());
    let report = validate(&g).unwrap();
    assert_eq!(report.classification, SenseClass::WeakSense);
    assert!((report.nodes[0].min_eigenvalue.unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn unitary_chain_is_strict() {
    let g = gen(&GeneratorSpec::new(Topology::UnitaryChain, GraphKind::DoubleEdge, Ensemble::PsdRandom, 11)).unwrap();
    assert_eq!(validate(&g).unwrap().classification, SenseClass::StrictSense);
}

#[test]
fn non_hermitian_double_edge_function_is_rejected() {
    let (nodes, edges) = topology(2, &[(0, 1)], 2);
    let bad = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let functions = vec![
        choi_to_paired_tensor(&bad, &[0], &[2]).unwrap(),
        choi_to_paired_tensor(&CMatrix::identity(2), &[0], &[2]).unwrap(),
    ];
    assert!(FactorGraph::new(GraphKind::DoubleEdge, nodes, edges, functions).is_err());
}

#[test]
fn negative_standard_entry_is_rejected() {
    let t = ComplexTensor::new(vec![Axis::new(0, 2), Axis::new(1, 2)], vec![c(1.0), c(-1.0), c(0.0), c(1.0)]).unwrap();
    let r = FactorGraph::from_edge_list(GraphKind::Standard, 2, &[(0, 1), (0, 1)], 2, vec![t.clone(), t]);
    assert!(matches!(r, Err(NfgError::Validation(_))));
}

#[test]
fn global_eval_of_ones_is_one() {
    let g = two_cycle([1.0; 4], [1.0; 4]);
    for x in 0..4 {
        assert_eq!(global_eval(&g, &[x % 2, x / 2]), c(1.0));
    }
}

#[test]
fn global_eval_on_the_jordan_cycle() {
    let g = jordan_cycle();
    assert_eq!(global_eval(&g, &[1, 0]), c(0.0));
    assert_eq!(global_eval(&g, &[0, 1]), c(0.0));
    assert_eq!(global_eval(&g, &[1, 1]), c(1.0));
}

#[test]
fn global_eval_at_zero_matches_node_lookup() {
    let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::DoubleEdge, Ensemble::PsdRandom, 5)).unwrap();
    let zero = vec![pair_index(2, 0, 0); 5];
    let expected: C64 = (0..4)
        .map(|f| g.choi_matrix(f).get(0, 0))
        .product();
    assert!((global_eval(&g, &zero) - expected).norm() < 1e-14);
}

#[test]
fn small_partition_functions() {
    assert_eq!(partition_exact(&jordan_cycle()).unwrap(), c(2.0));
    assert_eq!(partition_contract(&jordan_cycle()).unwrap(), c(2.0));
    let id = two_cycle([1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]);
    assert_eq!(partition_exact(&id).unwrap(), c(2.0));
}

#[test]
fn strict_fig3_matches_enumeration_and_is_nonnegative() {
    for seed in 0..10 {
        let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::DoubleEdge, Ensemble::PsdRandom, seed)).unwrap();
        let z = partition_exact(&g).unwrap();
        assert!(rel(z, brute_force_z(&g)) < 1e-12);
        assert!(z.re >= -1e-9);
        assert!(z.im.abs() <= 1e-9 * (1.0 + z.norm()));
    }
}

#[test]
fn contraction_matches_enumeration_on_random_graphs() {
    let topologies = [
        Topology::Fig3,
        Topology::FigB,
        Topology::Cycle(3),
        Topology::Cycle(6),
        Topology::Tree(5),
        Topology::Tree(8),
    ];
    for seed in 0..240u64 {
        let t = topologies[(seed % 6) as usize];
        let (kind, ensemble) = if seed % 2 == 0 {
            (GraphKind::DoubleEdge, Ensemble::PsdRandom)
        } else {
            (GraphKind::Standard, Ensemble::PositiveSnfg)
        };
        let mut spec = GeneratorSpec::new(t, kind, ensemble, seed);
        spec.alphabet = if seed % 5 == 1 { 3 } else { 2 };
        let g = gen(&spec).unwrap();
        if g.configuration_count() > 1_000_000 {
            continue;
        }
        let exact = partition_exact(&g).unwrap();
        let contracted = partition_contract(&g).unwrap();
        assert!(rel(contracted, exact) <= 1e-9, "seed {seed}: {contracted} vs {exact}");
    }
}

#[test]
fn contraction_is_exact_on_trees() {
    for seed in 0..20 {
        let g = gen(&GeneratorSpec::new(Topology::Tree(6), GraphKind::DoubleEdge, Ensemble::PsdRandom, seed)).unwrap();
        assert!(rel(partition_contract(&g).unwrap(), partition_exact(&g).unwrap()) < 1e-12);
    }
}

#[test]
fn two_cover_of_fig3_matches_enumeration() {
    let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::Standard, Ensemble::PositiveSnfg, 3)).unwrap();
    let sigma = vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1], vec![0, 1]];
    let cover = build_cover(&g, &CoverSpec::new(2, sigma).unwrap()).unwrap();
    assert_eq!(cover.num_nodes(), 8);
    assert_eq!(cover.num_edges(), 10);
    assert!(rel(partition_contract(&cover).unwrap(), brute_force_z(&cover)) <= 1e-9);

    let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::DoubleEdge, Ensemble::PsdRandom, 3)).unwrap();
    let sigma = vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1], vec![1, 0]];
    let cover = build_cover(&g, &CoverSpec::new(2, sigma).unwrap()).unwrap();
    assert!(rel(partition_contract(&cover).unwrap(), brute_force_z(&cover)) <= 1e-9);
}

#[test]
fn embedding_preserves_the_partition_function() {
    for seed in 0..10 {
        let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::Standard, Ensemble::PositiveSnfg, seed)).unwrap();
        let d = embed_double_edge(&g).unwrap();
        assert_eq!(d.kind(), GraphKind::DoubleEdge);
        assert!(d.is_strict_sense());
        assert!(rel(partition_exact(&d).unwrap(), partition_exact(&g).unwrap()) < 1e-12);
    }
}

#[test]
fn enumeration_limit_is_a_capacity_error() {
    let g = gen(&GeneratorSpec::new(Topology::FigB, GraphKind::DoubleEdge, Ensemble::PsdRandom, 0)).unwrap();
    let limits = Limits { enumeration: 100, ..Limits::default() };
    let err = partition_exact_with(&g, &limits).unwrap_err();
    assert!(err.is_capacity());
    let limits = Limits { contraction: 4, ..Limits::default() };
    assert!(partition_contract_with(&g, &limits).unwrap_err().is_capacity());
}

#[test]
fn serialization_round_trips_bit_exactly() {
    for seed in 0..5 {
        let g = gen(&GeneratorSpec::new(Topology::Fig3, GraphKind::DoubleEdge, Ensemble::PsdRandom, seed)).unwrap();
        let doc = serialize(&g).unwrap();
        let back = parse(&doc).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize(&back).unwrap(), doc);
    }
    let doc = serialize(&jordan_cycle()).unwrap();
    assert_eq!(parse(&doc).unwrap(), jordan_cycle());
}

#[test]
fn fig3_document_parses() {
    let g = identity_fig3();
    let back = parse(&serialize(&g).unwrap()).unwrap();
    assert_eq!(back.num_nodes(), 4);
    assert_eq!(back.num_edges(), 5);
}

#[test]
fn corrupted_axis_order_is_a_parse_error() {
    let g = identity_fig3();
    let doc = serialize(&g).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    let axes = v["tensors"][0]["axes"].as_array_mut().unwrap();
    axes.reverse();
    let err = parse(&v.to_string()).unwrap_err();
    match err {
        NfgError::Parse { location, .. } => assert_eq!(location, "tensors[0].axes"),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn missing_schema_is_a_parse_error() {
    let doc = serialize(&jordan_cycle()).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    v["schema"] = serde_json::Value::String("nfg/0".into());
    assert!(matches!(parse(&v.to_string()), Err(NfgError::Parse { .. })));
    assert!(matches!(parse("{"), Err(NfgError::Parse { .. })));
}
