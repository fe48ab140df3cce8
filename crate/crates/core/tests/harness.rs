use lcc::harness::{run_sweep, ExperimentSpec, Grid, CSV_HEADER};
use lcc::rng::{gen_gaussian_matrix, trial_seed, GaussianSource};
use lcc::{decompose, total_cost, CostModel, DecomposeConfig};

fn spec(algorithms: Vec<DecomposeConfig>, trials: usize, grid: Grid) -> ExperimentSpec {
    ExperimentSpec {
        rows: 16,
        cols: 4,
        trials,
        seed: 42,
        algorithms,
        cost: CostModel::default(),
        grid,
        record_timing: false,
        output: None,
    }
}

#[test]
fn generator_is_reproducible() {
    let a = gen_gaussian_matrix(8, 4, 5).unwrap();
    assert_eq!(a, gen_gaussian_matrix(8, 4, 5).unwrap());
    let b = gen_gaussian_matrix(8, 4, 6).unwrap();
    let same = a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x == y).count();
    assert_eq!(same, 0);
    let mut g = GaussianSource::new(1);
    let xs: Vec<f64> = (0..10_000).map(|_| g.standard_normal()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.05 && (var - 1.0).abs() < 0.05, "{mean} {var}");
}

#[test]
fn single_trial_gives_one_row_and_its_mean() {
    let table = run_sweep(&spec(vec![DecomposeConfig::fs(0.0)], 1, Grid::TargetSqnr(vec![20.0]))).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!(!table.rows[0].is_aggregate());
    assert!(table.rows[1].is_aggregate());
}

#[test]
fn rows_agree_with_direct_runs() {
    let cfgs = vec![DecomposeConfig::fs(0.0), DecomposeConfig::ma(0.0, Some(0))];
    let table = run_sweep(&spec(cfgs.clone(), 4, Grid::TargetSqnr(vec![15.0, 25.0]))).unwrap();
    assert_eq!(table.rows.len(), 2 * 2 * 5);
    for row in table.rows.iter().filter(|r| !r.is_aggregate()) {
        let t = gen_gaussian_matrix(16, 4, trial_seed(42, row.trial.unwrap() as u64)).unwrap();
        let mut cfg = cfgs[row.config_index].clone();
        cfg.target_sqnr_db = row.grid.parse().unwrap();
        let res = decompose(&t, &cfg).unwrap();
        let cost = total_cost(&res.dag, &CostModel::default());
        assert_eq!(row.sqnr_db, res.sqnr_db);
        assert_eq!(row.n_add, cost.n_add as f64);
        assert_eq!(row.n_delay, cost.n_delay as f64);
        assert_eq!(row.cost_adders, 20.0 * cost.n_add as f64);
        assert_eq!(row.cost_total, cost.total);
    }
    // both curve flavours are available per configuration
    for c in 0..2 {
        assert_eq!(table.curve(c, false).points().len(), 2);
        assert_eq!(table.curve(c, true).points().len(), 2);
    }
}

#[test]
fn csv_layout_and_determinism() {
    let s = spec(
        vec![DecomposeConfig::fp(0.0), DecomposeConfig::new(lcc::Algorithm::Csd, 0.0)],
        3,
        Grid::TargetSqnr(vec![10.0, 20.0]),
    );
    let a = run_sweep(&s).unwrap().to_csv().unwrap();
    let b = run_sweep(&s).unwrap().to_csv().unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(
        CSV_HEADER.join(","),
        "algorithm,s,dmax,q,grid,trial,sqnr_db,n_add,n_delay,n_inv,cost_adders,cost_total,wall_ms,flag"
    );
    assert_eq!(lines.count(), 2 * 2 * 4);
    assert!(a.lines().any(|l| l.starts_with("csd,") && l.contains(",mean,")));
}

#[test]
fn spec_files_round_trip() {
    let s = spec(vec![DecomposeConfig::ma(0.0, Some(1))], 2, Grid::VertexBudget(vec![4, 8]));
    let text = serde_json::to_string(&s).unwrap();
    let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
    assert!(run_sweep(&back).is_ok());
}
