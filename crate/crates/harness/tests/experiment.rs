use dbs_core::rng::run_seed;
use dbs_harness::experiment::Stats;
use dbs_harness::{convergence_study, read_csv, run_experiment, Cell, Quantile, RunConfig, RunReport, StudyGrid};

fn tiny(problem: &str, steps: usize, runs: usize) -> RunConfig {
    let mut cfg = RunConfig::new(problem, steps);
    cfg.runs = runs;
    cfg.scale = 0.02;
    cfg.seed = 17;
    cfg
}

/// Numeric content of a report, without wall-clock times.
fn numbers(r: &RunReport) -> Vec<f64> {
    let mut v = Vec::new();
    for run in &r.runs {
        let e = run.estimate.as_ref().unwrap();
        v.push(e.u);
        v.extend(&e.z);
        v.push(e.gamma00);
        v.extend(e.control.iter().flatten());
        v.push(run.clamps as f64);
        v.extend(run.log.iter().map(|l| l.validation_loss));
    }
    v.push(r.aggregate.u.mean);
    v.push(r.aggregate.u.std);
    v
}

#[test]
fn identical_configs_reproduce() {
    let cfg = tiny("merton", 3, 3);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(numbers(&a), numbers(&b));
    let mut other = cfg.clone();
    other.seed = 18;
    assert_ne!(numbers(&a), numbers(&run_experiment(&other).unwrap()));
}

#[test]
fn run_seeds_are_distinct() {
    let cfg = tiny("case1", 2, 4);
    let r = run_experiment(&cfg).unwrap();
    let seeds: Vec<u64> = r.runs.iter().map(|x| x.seed).collect();
    assert_eq!(seeds, (0..4).map(|i| run_seed(17, i)).collect::<Vec<_>>());
    for i in 0..4 {
        for j in 0..i {
            assert_ne!(seeds[i], seeds[j]);
        }
    }
    let u: Vec<f64> = r.runs.iter().map(|x| x.estimate.as_ref().unwrap().u).collect();
    assert!(u.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn aggregates_recompute_from_rows() {
    let r = run_experiment(&tiny("one-asset-scott", 2, 3)).unwrap();
    assert_eq!(r.runs.len(), 3);
    let u: Vec<f64> = r.runs.iter().map(|x| x.estimate.as_ref().unwrap().u).collect();
    let s = Stats::of(&u);
    assert!((s.mean - r.aggregate.u.mean).abs() < 1e-12);
    assert!((s.std - r.aggregate.u.std).abs() < 1e-12);
    let reference = r.reference.as_ref().unwrap();
    assert_eq!(
        r.rel_err_u().unwrap(),
        (r.aggregate.u.mean - reference.u).abs() / reference.u.abs()
    );
    assert_eq!(r.aggregate.control.as_ref().unwrap().len(), 1);
    assert_eq!(r.aggregate.z.len(), 2);
}

#[test]
fn single_run_has_zero_std() {
    let r = run_experiment(&tiny("lq", 2, 1)).unwrap();
    assert_eq!(r.aggregate.u.std, 0.0);
    assert!(r.aggregate.control.is_none());
}

#[test]
fn report_csv_has_one_aggregate_row_and_round_trips() {
    let r = run_experiment(&tiny("merton", 2, 10)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    dbs_harness::emit_csv(&r.to_table(), &path).unwrap();
    let t = read_csv(&path).unwrap();
    assert_eq!(t, r.to_table());
    assert_eq!(t.rows.len(), 11);
    let aggregate = t.column("aggregate").unwrap();
    assert_eq!(
        t.rows.iter().filter(|row| row[aggregate] == Cell::Bool(true)).count(),
        1
    );
    assert_eq!(t.get(10, "u").unwrap().as_f64(), Some(r.aggregate.u.mean));
    // Control columns are emitted for portfolio problems only.
    assert!(t.column("control_1").is_some());
    let lq = run_experiment(&tiny("lq", 2, 1)).unwrap().to_table();
    assert!(lq.column("control_1").is_none());
    let log = r.log_table();
    assert_eq!(log.rows.len(), r.runs.iter().map(|x| x.log.len()).sum::<usize>());
}

#[test]
fn single_cell_study_matches_the_experiment() {
    let mut cfg = tiny("case1", 2, 2);
    cfg.sigma_hat = Some(1.5);
    cfg.quantile = Quantile::Value(0.99);
    let study = convergence_study(&cfg, &StudyGrid::new(vec![2], vec![1.5])).unwrap();
    let direct = run_experiment(&cfg).unwrap();
    assert_eq!(study.reports.len(), 1);
    assert_eq!(numbers(&study.reports[0]), numbers(&direct));
    let t = study.to_table();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.get(0, "mean_u").unwrap().as_f64(), Some(direct.aggregate.u.mean));
    assert_eq!(t.get(0, "p").unwrap().as_f64(), Some(0.99));
    assert_eq!(t.get(0, "rel_err").unwrap().as_f64(), direct.rel_err_u());
}

#[test]
fn empty_study_table_is_header_only() {
    let t = dbs_harness::StudyTable { reports: Vec::new() }.to_table();
    let mut buf = Vec::new();
    t.write_to(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "problem,d,N,sigma_hat,p,m,mean_u,std_u,ref_u,rel_err,mean_z,std_z,runtime_s\n"
    );
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    assert!(run_experiment(&tiny("merton", 0, 1)).is_err());
    assert!(run_experiment(&tiny("nope", 2, 1)).is_err());
    let mut cfg = tiny("merton", 2, 1);
    cfg.runs = 0;
    assert!(run_experiment(&cfg).is_err());
}
