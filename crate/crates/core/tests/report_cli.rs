mod support;

use std::path::Path;
use std::process::Command;

use gsmtr::report::io::{load_dataset, read_table, write_matrix_csv};
use gsmtr::report::{intervals_from_draws, rank_snps, render_interval_plot, select_snps, IntervalReport};
use ndarray::{array, Array2, Array3};
use support::*;

fn fixed_report() -> IntervalReport {
    IntervalReport {
        snp_names: vec!["rs1".into(), "rs<2>".into()],
        phenotype_names: vec!["lh_a".into(), "lh_b".into(), "rh_a".into()],
        mean: array![[0.5, -0.2, 0.1], [0.0, 0.3, -0.4]],
        lower: array![[0.1, -0.6, -0.2], [-0.1, 0.05, -0.9]],
        upper: array![[0.9, 0.2, 0.4], [0.1, 0.55, -0.1]],
        level: 0.95,
    }
}

#[test]
fn interval_plot_matches_golden_file() {
    let svg = render_interval_plot(&fixed_report(), 1).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/interval_plot.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, std::fs::read_to_string(golden).unwrap());
    assert_eq!(svg.matches(r#"class="interval selected""#).count(), 2);
    assert!(svg.contains("rs&lt;2&gt;"));
}

#[test]
fn higher_level_selects_a_subset() {
    let mut rng = oracle_rng(1);
    let draws = Array3::from_shape_fn((2000, 6, 3), |(_, i, _)| 0.6 * i as f64 / 5.0 + 0.3 * normal(&mut rng));
    let r95 = intervals_from_draws(draws.view(), 0.95).unwrap();
    let r99 = intervals_from_draws(draws.view(), 0.99).unwrap();
    let r80 = intervals_from_draws(draws.view(), 0.80).unwrap();
    for idx in ndarray::indices(r95.lower.dim()) {
        assert!(r99.lower[idx] <= r95.lower[idx] && r95.lower[idx] <= r80.lower[idx]);
        assert!(r80.upper[idx] <= r95.upper[idx] && r95.upper[idx] <= r99.upper[idx]);
    }
    let (s80, s95, s99) = (select_snps(&r80), select_snps(&r95), select_snps(&r99));
    assert!(s99.pairs.iter().all(|p| s95.pairs.contains(p)));
    assert!(s95.pairs.iter().all(|p| s80.pairs.contains(p)));
    assert!(s80.pairs.len() > s99.pairs.len());
}

#[test]
fn equal_tail_endpoints_follow_linear_interpolation() {
    // Draws 1..=101 of a single coefficient: the 2.5% and 97.5% points
    // under linear interpolation between order statistics are 3.5 and 98.5.
    let draws = Array3::from_shape_fn((101, 1, 1), |(s, _, _)| (101 - s) as f64);
    let r = intervals_from_draws(draws.view(), 0.95).unwrap();
    approx::assert_abs_diff_eq!(r.lower[[0, 0]], 3.5, epsilon = 1e-12);
    approx::assert_abs_diff_eq!(r.upper[[0, 0]], 98.5, epsilon = 1e-12);
    approx::assert_abs_diff_eq!(r.mean[[0, 0]], 51.0, epsilon = 1e-12);
}

#[test]
fn ranking_uses_absolute_row_sums() {
    let w = array![[0.1, -0.1], [-2.0, 0.5], [0.3, 0.3], [0.0, 0.0]];
    let order: Vec<usize> = rank_snps(w.view()).iter().map(|r| r.snp).collect();
    assert_eq!(order, vec![1, 2, 0, 3]);
}

fn write_inputs(dir: &Path, n: usize, seed: u64) {
    let mut rng = oracle_rng(seed);
    let x = random_genotypes(n, 5, &mut rng);
    let w = array![[0.8, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, -0.6], [0.0, 0.0]];
    let y = x.dot(&w) + random_matrix(n, 2, 0.5, &mut rng);
    let snps: Vec<String> = (1..=5).map(|i| format!("rs{i}")).collect();
    write_matrix_csv(std::fs::File::create(dir.join("geno.csv")).unwrap(), &snps, &x).unwrap();
    write_matrix_csv(std::fs::File::create(dir.join("pheno.csv")).unwrap(), &["lh_vol".into(), "rh_vol".into()], &y).unwrap();
    std::fs::write(dir.join("genes.csv"), "snp_id,gene_id\nrs1,APOE\nrs2,APOE\nrs3,CLU\nrs4,CLU\nrs5,CR1\n").unwrap();
}

fn gsmtr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gsmtr")).args(args).output().unwrap()
}

#[test]
fn dataset_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path(), 30, 2);
    let data = load_dataset(&dir.path().join("geno.csv"), &dir.path().join("pheno.csv"), &dir.path().join("genes.csv")).unwrap();
    assert_eq!((data.n(), data.d(), data.c()), (30, 5, 2));
    assert_eq!(data.groups().sizes(), vec![2, 2, 1]);
    let text = std::fs::read(dir.path().join("pheno.csv")).unwrap();
    let table = read_table(text.as_slice(), "phenotypes").unwrap();
    let mut again = Vec::new();
    write_matrix_csv(&mut again, &table.header, &table.values).unwrap();
    assert_eq!(again, text);
    let y: Array2<f64> = data.y().to_owned();
    assert_eq!(y, table.values);
}

#[test]
fn fit_then_report_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path(), 40, 3);
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    let out = p("fit");
    let res = gsmtr(&[
        "fit", "--genotypes", &p("geno.csv"), "--phenotypes", &p("pheno.csv"), "--groups", &p("genes.csv"),
        "--out", &out, "--iterations", "700", "--burn-in", "200", "--thin", "1", "--seed", "4",
        "--plots", "all", "--save-draws",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["posterior_summary.csv", "selection.csv", "ranking.csv", "groups.csv", "manifest.json", "chain.json"] {
        assert!(Path::new(&out).join(f).exists(), "missing {f}");
    }
    assert!(Path::new(&out).join("plots").read_dir().unwrap().count() == 5);
    let summary = std::fs::read_to_string(Path::new(&out).join("posterior_summary.csv")).unwrap();
    assert!(summary.starts_with("snp,phenotype,mean,lower,upper,selected\n"));
    assert_eq!(summary.lines().count(), 1 + 10);

    let rep = p("rep");
    let res = gsmtr(&["report", "--draws", &format!("{out}/chain.json"), "--out", &rep]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(summary, std::fs::read_to_string(Path::new(&rep).join("posterior_summary.csv")).unwrap());
}

#[test]
fn malformed_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path(), 20, 5);
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    std::fs::write(dir.path().join("bad.csv"), "lh_vol,rh_vol\n1.0,abc\n").unwrap();
    let res = gsmtr(&[
        "fit", "--genotypes", &p("geno.csv"), "--phenotypes", &p("bad.csv"), "--groups", &p("genes.csv"),
        "--out", &p("o"),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("rh_vol"));

    std::fs::write(dir.path().join("genes2.csv"), "snp_id,gene_id\nrs1,APOE\n").unwrap();
    let res = gsmtr(&[
        "fit", "--genotypes", &p("geno.csv"), "--phenotypes", &p("pheno.csv"), "--groups", &p("genes2.csv"),
        "--out", &p("o"),
    ]);
    assert_eq!(res.status.code(), Some(2));
}
