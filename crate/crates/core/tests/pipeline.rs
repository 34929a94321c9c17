use std::fs;

use commonrec::config::RunConfig;
use commonrec::pipeline::{baseline_local_rw, explain_fc, explain_fcr, prepare};
use commonrec::report::{eval_report, RunReport};
use commonrec::Error;

fn small(extra: &str) -> RunConfig {
    let text = format!(
        "{extra}steps = 300\nbudget = 4\nseed = 3\n[dataset]\nkind = \"synthetic\"\nn_graphs = 30\nmin_nodes = 4\nmax_nodes = 8\nseed = 3\n"
    );
    RunConfig::from_toml(&text, &[]).unwrap()
}

fn written(report: &RunReport) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn runs_repeat_byte_for_byte() {
    let cfg = small("");
    let a = explain_fcr(&cfg).unwrap();
    let b = explain_fcr(&cfg).unwrap();
    assert_eq!(written(&a), written(&b));
    let a = baseline_local_rw(&cfg).unwrap();
    let b = baseline_local_rw(&cfg).unwrap();
    assert_eq!(written(&a), written(&b));
}

#[test]
fn report_files_are_complete() {
    let report = explain_fcr(&small("")).unwrap();
    let files = written(&report);
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["config.toml", "curve.csv", "exemplars.txt", "metrics.csv", "report.json", "summary.json"]
    );
    let json = String::from_utf8(files[4].1.clone()).unwrap();
    assert_eq!(RunReport::from_json(&json).unwrap(), report);
    let config = String::from_utf8(files[0].1.clone()).unwrap();
    assert_eq!(RunConfig::from_toml(&config, &[]).unwrap(), report.config);
    assert!(report.summary.coverage > 0.0, "the small corpus should yield some recourse");
    assert!(report.summary.recourse.len() <= 4);
}

#[test]
fn fc_without_binding_budget_matches_fcr() {
    let cfg = small("");
    let fcr = explain_fcr(&cfg).unwrap();
    let fc = explain_fc(&cfg).unwrap();
    assert_eq!(fcr.summary.to_json(), fc.summary.to_json());
    let huge = small("counterfactual_budget = 1000000\n");
    assert_eq!(explain_fc(&huge).unwrap().summary.to_json(), fcr.summary.to_json());
}

#[test]
fn fc_budget_limits_counterfactuals() {
    let cfg = small("counterfactual_budget = 2\n");
    let fc = explain_fc(&cfg).unwrap();
    assert_eq!(fc.counts.counterfactual_budget, Some(2));
    assert!(fc.counts.considered <= 2);
    assert!(fc.counts.counterfactuals_used <= 2);
    let forced = explain_fc(&small("fc_force_nearest = true\n")).unwrap();
    assert!(forced.counts.considered <= forced.dataset.n_inputs);
}

#[test]
fn baseline_keeps_one_counterfactual_per_input() {
    let report = baseline_local_rw(&small("")).unwrap();
    assert!(report.counts.considered <= report.dataset.n_inputs);
    assert!(report.counts.pool <= report.dataset.n_inputs);
}

/// Greedy maximum coverage over plain sets; ties go to the lower index.
fn greedy_max_coverage(n: usize, sets: &[Vec<usize>], budget: usize) -> usize {
    let mut covered = vec![false; n];
    for _ in 0..budget {
        let gain = |s: &Vec<usize>| s.iter().filter(|&&u| !covered[u]).count();
        let Some(best) = (0..sets.len()).max_by_key(|&i| (gain(&sets[i]), std::cmp::Reverse(i))) else {
            break;
        };
        if gain(&sets[best]) == 0 {
            break;
        }
        for &u in &sets[best] {
            covered[u] = true;
        }
    }
    covered.iter().filter(|&&c| c).count()
}

#[test]
fn reduction_config_reaches_greedy_max_coverage() {
    let sets = vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5]];
    let text = "steps = 4000\nbudget = 2\nseed = 1\nreject_by = \"classifier\"\n\
                [dataset]\nkind = \"reduction\"\nn_elements = 6\nsets = [[0, 1, 2], [2, 3], [3, 4, 5], [0, 5]]\n\
                [embedder]\nkind = \"wl-hash\"\nrounds = 0\n";
    let cfg = RunConfig::from_toml(text, &[]).unwrap();
    let report = explain_fcr(&cfg).unwrap();
    let expected = greedy_max_coverage(6, &sets, 2) as f64 / 6.0;
    assert_eq!(report.summary.coverage, expected);
}

#[test]
fn eval_table_over_runs() {
    let a = explain_fcr(&small("")).unwrap();
    let b = baseline_local_rw(&small("")).unwrap();
    let table = eval_report(&[a.clone(), b]);
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].coverage, a.summary.coverage);
    let csv = table.table_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(table.curves_csv().lines().count() > 1);
}

#[test]
fn errors_name_their_stage() {
    let cfg = RunConfig::from_toml(
        "[dataset]\nkind = \"tu\"\npath = \"/nonexistent/commonrec-tu\"\n",
        &[],
    )
    .unwrap();
    let err = prepare(&cfg).err().expect("missing dataset must fail");
    assert!(err.to_string().contains("commonrec-tu"), "{err}");
    let bad = RunConfig::from_toml("theta = -1\n", &[]);
    assert!(matches!(bad, Err(Error::Config(_))));
}
