use nfg_core::experiment::*;
use nfg_core::gen::*;
use nfg_core::limits::Limits;
use nfg_core::nfg::{partition_exact, GraphKind};
use nfg_core::spa::SpaOptions;

fn spec(topology: Topology, ensemble: Ensemble, instances: usize, m_max: usize) -> ExperimentSpec {
    ExperimentSpec {
        generator: GeneratorSpec::new(topology, GraphKind::DoubleEdge, ensemble, 17),
        instances,
        m_max,
        samples: 200,
        spa: SpaOptions::default(),
        limits: Limits::default(),
    }
}

#[test]
fn degree_one_column_is_the_partition_function() {
    let s = spec(Topology::Fig3, Ensemble::PsdNearIdentity { eta: 0.05 }, 6, 2);
    let result = experiment(&s).unwrap();
    assert_eq!(result.rows.len(), 6);
    for (i, row) in result.rows.iter().enumerate() {
        assert_eq!(row.seed, instance_seed(17, i));
        let g = gen(&GeneratorSpec { seed: row.seed, ..s.generator }).unwrap();
        let z = partition_exact(&g).unwrap().re;
        assert!((row.z - z).abs() <= 1e-9 * z);
        assert!((row.zbm[0].unwrap() - z).abs() <= 1e-9 * z);
        assert!(row.converged);
    }
}

#[test]
fn tree_deviations_vanish() {
    let s = spec(Topology::Tree(4), Ensemble::PsdRandom, 5, 3);
    let result = experiment(&s).unwrap();
    for row in &result.rows {
        for d in &row.dev {
            assert!(d.unwrap().abs() <= 1e-6);
        }
    }
    assert_eq!(result.summary.excluded, 0);
    assert!(result.summary.per_m.iter().all(|m| m.count == 5 && m.mean.abs() <= 1e-6));
}

#[test]
fn experiments_are_deterministic() {
    let s = spec(Topology::Cycle(3), Ensemble::PsdRandom, 4, 4);
    let a = experiment(&s).unwrap();
    let b = experiment(&s).unwrap();
    assert_eq!(a, b);
    assert_eq!(rows_to_csv(&a.rows, 4).unwrap(), rows_to_csv(&b.rows, 4).unwrap());
}

#[test]
fn csv_layout() {
    let s = spec(Topology::Cycle(2), Ensemble::PsdRandom, 3, 2);
    let result = experiment(&s).unwrap();
    let csv = rows_to_csv(&result.rows, 2).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,Z,Z_star,Z_B1,Z_B2,dev_1,dev_2,condition,alpha,converged"
    );
    assert_eq!(lines.count(), 3);
    let summary = summary_to_csv(&result.summary).unwrap();
    assert!(summary.starts_with("M,count,mean,std,q10,"));
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn summary_statistics() {
    let rows: Vec<ExperimentRow> = [0.1, 0.2, 0.3]
        .iter()
        .map(|&d| ExperimentRow {
            seed: 0,
            z: 1.0,
            z_star: Some(1.0),
            zbm: vec![Some(1.0 + d)],
            dev: vec![Some(d)],
            condition: Some(true),
            alpha: Some(0.1),
            converged: true,
        })
        .collect();
    let s = summarize(&rows, 1);
    let m = &s.per_m[0];
    assert_eq!(m.count, 3);
    assert!((m.mean - 0.2).abs() < 1e-15);
    assert!((m.std - 0.1).abs() < 1e-15);
    assert!((m.deciles[4] - 0.2).abs() < 1e-15);
}
