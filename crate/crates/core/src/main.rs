use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gsmtr::report::{self, io, IntervalReport};
use gsmtr::sim::{self, BayesMethod, BootstrapMethod, IntervalMethod, StudyDesign};
use gsmtr::wang::{self, WangOptions};
use gsmtr::{ChainOutput, Dataset, Error, Hyperparams, Init, Result, SamplerConfig, TuningGrid};

const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(name = "gsmtr", version, about = "Bayesian group-sparse multi-task regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Gibbs chain at a fixed tuning pair and summarize it.
    Fit(FitArgs),
    /// Run one chain per grid point, pick the pair with minimum WAIC and summarize its chain.
    Tune(TuneArgs),
    /// Percentile bootstrap intervals around the penalized estimator.
    Bootstrap(BootstrapArgs),
    /// Coverage study on simulated data.
    Simulate(SimulateArgs),
    /// Rebuild the summaries from saved draws.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Genotype CSV: one row per subject, one column per SNP, header of SNP IDs.
    #[arg(long)]
    genotypes: PathBuf,
    /// Phenotype CSV: one row per subject, header of phenotype IDs.
    #[arg(long)]
    phenotypes: PathBuf,
    /// Two-column CSV (snp_id, gene_id) with a header row.
    #[arg(long)]
    groups: PathBuf,
    /// Fit the phenotypes as given instead of centering and scaling each column.
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML file with run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    level: Option<f64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    chains_parallel: Option<usize>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    #[arg(long, value_enum)]
    plots: Option<PlotMode>,
    /// Also write the stored draws to chain.json for the `report` command.
    #[arg(long)]
    save_draws: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    lambda1_sq: Option<f64>,
    #[arg(long)]
    lambda2_sq: Option<f64>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// `LO:HI:COUNT` (log-spaced), a comma list, `full` (11 × 11) or
    /// `sub49` (7 × 7); `A/B` gives separate λ₁² and λ₂² axes.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Fixed γ₁; with --gamma2 this skips cross-validation.
    #[arg(long, requires = "gamma2")]
    gamma1: Option<f64>,
    #[arg(long, requires = "gamma1")]
    gamma2: Option<f64>,
    /// Cross-validation grid for (γ₁, γ₂), same syntax as `tune --grid`.
    #[arg(long)]
    gamma_grid: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study design TOML.
    #[arg(long, conflicts_with = "study", required_unless_present = "study")]
    config: Option<PathBuf>,
    /// Built-in reduced-size analog of reference study 1-4.
    #[arg(long)]
    study: Option<u8>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    chains_parallel: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// chain.json written by `fit --save-draws` or `tune --save-draws`.
    #[arg(long)]
    draws: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long, value_enum)]
    plots: Option<PlotMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InitKind {
    Zeros,
    Wang,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PlotMode {
    None,
    Selected,
    All,
}

/// Settings readable from `--config`; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    iterations: Option<usize>,
    burn_in: Option<usize>,
    thin: Option<usize>,
    level: Option<f64>,
    lambda1_sq: Option<f64>,
    lambda2_sq: Option<f64>,
    a_sigma: Option<f64>,
    b_sigma: Option<f64>,
    grid: Option<String>,
    chains_parallel: Option<usize>,
    standardize: Option<bool>,
    init: Option<InitKind>,
    plots: Option<PlotMode>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    gamma_grid: Option<String>,
    folds: Option<usize>,
    bootstrap_replicates: Option<usize>,
}

/// Effective settings after merging defaults, config file and flags.
#[derive(Debug, Clone, Serialize)]
struct Settings {
    seed: u64,
    iterations: usize,
    burn_in: usize,
    thin: usize,
    level: f64,
    lambda1_sq: f64,
    lambda2_sq: f64,
    a_sigma: f64,
    b_sigma: f64,
    grid: String,
    chains_parallel: usize,
    standardize: bool,
    init: InitKind,
    plots: PlotMode,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    gamma_grid: String,
    folds: usize,
    bootstrap_replicates: usize,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn settings(common: &CommonArgs, data: Option<&DataArgs>, chain: Option<&ChainArgs>) -> Result<Settings> {
    let f = load_config(common.config.as_deref())?;
    let ch = |get: fn(&ChainArgs) -> Option<usize>| chain.and_then(get);
    let s = Settings {
        seed: common.seed.or(f.seed).unwrap_or(0),
        iterations: ch(|c| c.iterations).or(f.iterations).unwrap_or(6000),
        burn_in: ch(|c| c.burn_in).or(f.burn_in).unwrap_or(1000),
        thin: ch(|c| c.thin).or(f.thin).unwrap_or(5),
        level: common.level.or(f.level).unwrap_or(0.95),
        lambda1_sq: f.lambda1_sq.unwrap_or(1.0),
        lambda2_sq: f.lambda2_sq.unwrap_or(1.0),
        a_sigma: f.a_sigma.unwrap_or(1.0),
        b_sigma: f.b_sigma.unwrap_or(1.0),
        grid: f.grid.unwrap_or_else(|| "full".into()),
        chains_parallel: common.chains_parallel.or(f.chains_parallel).unwrap_or(0),
        standardize: !data.is_some_and(|d| d.no_standardize) && f.standardize.unwrap_or(true),
        init: chain.and_then(|c| c.init).or(f.init).unwrap_or(InitKind::Zeros),
        plots: chain.and_then(|c| c.plots).or(f.plots).unwrap_or(PlotMode::Selected),
        gamma1: f.gamma1,
        gamma2: f.gamma2,
        gamma_grid: f.gamma_grid.unwrap_or_else(|| "0.01:1000:6".into()),
        folds: f.folds.unwrap_or(5),
        bootstrap_replicates: f.bootstrap_replicates.unwrap_or(1000),
    };
    if !(s.level > 0.0 && s.level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {}", s.level)));
    }
    Ok(s)
}

fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse grid axis {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo) || count == 0 || (count == 1 && hi != lo) {
            return Err(bad());
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = (lo.log10(), hi.log10());
        return Ok((0..count)
            .map(|k| {
                let e = a + (b - a) * k as f64 / (count - 1) as f64;
                let r = e.round();
                // land exactly on powers of ten when the exponent is integral
                if (e - r).abs() < 1e-9 {
                    10f64.powi(r as i32)
                } else {
                    10f64.powf(e)
                }
            })
            .collect());
    }
    spec.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn parse_grid(spec: &str) -> Result<TuningGrid> {
    match spec.trim() {
        "full" => return Ok(TuningGrid::full()),
        "sub49" => return Ok(TuningGrid::subgrid49()),
        _ => {}
    }
    let (a, b) = match spec.split_once('/') {
        Some((a, b)) => (parse_axis(a)?, parse_axis(b)?),
        None => {
            let a = parse_axis(spec)?;
            (a.clone(), a)
        }
    };
    TuningGrid::product(&a, &b)
}

struct Loaded {
    data: Dataset<f64>,
    standardization: Option<report::Standardization>,
}

fn load(args: &DataArgs, s: &Settings) -> Result<Loaded> {
    let raw = io::load_dataset(&args.genotypes, &args.phenotypes, &args.groups)?;
    if !s.standardize {
        return Ok(Loaded {
            data: raw,
            standardization: None,
        });
    }
    let (y, t) = report::standardize_phenotypes(raw.y(), raw.phenotype_names())?;
    let data = Dataset::with_names(
        raw.x().to_owned(),
        y,
        raw.groups().clone(),
        raw.snp_names().to_vec(),
        raw.phenotype_names().to_vec(),
    )?
    .mark_standardized()?;
    Ok(Loaded {
        data,
        standardization: Some(t),
    })
}

fn sampler_config(s: &Settings) -> SamplerConfig<f64> {
    let init = match s.init {
        InitKind::Zeros => Init::Zeros,
        InitKind::Wang => Init::Wang,
    };
    SamplerConfig::new(s.iterations, s.burn_in)
        .with_thin(s.thin)
        .with_seed(s.seed)
        .with_init(init)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || "._-".contains(ch) { ch } else { '_' })
        .collect()
}

fn write_manifest(out: &Path, command: &str, seed: u64, settings: &impl Serialize, extra: serde_json::Value) -> Result<()> {
    let canonical = serde_json::to_string(settings).map_err(|e| Error::Invalid(e.to_string()))?;
    let hash = Sha256::digest(canonical.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let manifest = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config_sha256": hex,
        "config": serde_json::from_str::<serde_json::Value>(&canonical).expect("valid json"),
        "details": extra,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invalid(e.to_string()))?;
    fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn write_plots(out: &Path, report: &IntervalReport, mode: PlotMode) -> Result<usize> {
    if mode == PlotMode::None {
        return Ok(0);
    }
    let dir = out.join("plots");
    fs::create_dir_all(&dir)?;
    let mut count = 0;
    for i in 0..report.d() {
        if mode == PlotMode::All || report.snp_selected(i) {
            let path = dir.join(format!("{}.svg", file_stem(&report.snp_names[i])));
            fs::write(path, report::render_interval_plot(report, i)?)?;
            count += 1;
        }
    }
    Ok(count)
}

/// Writes the interval summary, selection, ranking and plots of one chain.
fn summarize(
    out: &Path,
    chain: &ChainOutput<f64>,
    data: &Dataset<f64>,
    s: &Settings,
) -> Result<serde_json::Value> {
    let report = report::credible_intervals(chain, s.level)?
        .with_names(data.snp_names().to_vec(), data.phenotype_names().to_vec())?;
    let selection = report::select_snps(&report);
    // rank by the penalized estimate at the posterior-mode-matched weights
    let hyper = Hyperparams::with_lambdas(chain.lambda1_sq, chain.lambda2_sq)?;
    let (g1, g2) = hyper.matched_gammas(chain.posterior_mean_sigma2().sqrt());
    let fit = wang::fit_wang(data.x(), data.y(), data.groups(), g1, g2, &WangOptions::default())?;
    let ranking = report::rank_snps(fit.w.view());
    io::write_posterior_summary(create(&out.join("posterior_summary.csv"))?, &report)?;
    io::write_selection(create(&out.join("selection.csv"))?, &report, &selection)?;
    io::write_ranking(create(&out.join("ranking.csv"))?, &report, &ranking)?;
    io::write_group_map(&out.join("groups.csv"), data.snp_names(), data.groups())?;
    let plots = write_plots(out, &report, s.plots)?;
    if !fit.converged {
        log::warn!("penalized estimate used for ranking did not converge");
    }
    Ok(serde_json::json!({
        "draws": chain.n_draws(),
        "lambda1_sq": chain.lambda1_sq,
        "lambda2_sq": chain.lambda2_sq,
        "chain_seed": chain.seed,
        "selected_pairs": selection.pairs.len(),
        "selected_snps": selection.snps.len(),
        "ranking_gamma1": g1,
        "ranking_gamma2": g2,
        "ranking_converged": fit.converged,
        "plots": plots,
    }))
}

fn write_standardization(out: &Path, data: &Dataset<f64>, t: &Option<report::Standardization>) -> Result<()> {
    let Some(t) = t else { return Ok(()) };
    let mut w = csv::Writer::from_writer(create(&out.join("standardization.csv"))?);
    w.write_record(["phenotype", "mean", "sd"])?;
    for (j, name) in data.phenotype_names().iter().enumerate() {
        w.write_record([name.clone(), t.mean[j].to_string(), t.sd[j].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn install_pool(threads: usize) {
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

fn run_fit(args: FitArgs) -> Result<u8> {
    let mut s = settings(&args.common, Some(&args.data), Some(&args.chain))?;
    if let Some(v) = args.lambda1_sq {
        s.lambda1_sq = v;
    }
    if let Some(v) = args.lambda2_sq {
        s.lambda2_sq = v;
    }
    let out = &args.common.out;
    fs::create_dir_all(out)?;
    let loaded = load(&args.data, &s)?;
    let hyper = Hyperparams::new(s.lambda1_sq, s.lambda2_sq, s.a_sigma, s.b_sigma)?;
    let chain = gsmtr::run_gibbs(&loaded.data, &hyper, &sampler_config(&s))?;
    let details = summarize(out, &chain, &loaded.data, &s)?;
    write_standardization(out, &loaded.data, &loaded.standardization)?;
    if args.chain.save_draws {
        io::SavedChain::from_chain(&chain, loaded.data.snp_names(), loaded.data.phenotype_names())
            .save(&out.join("chain.json"))?;
    }
    write_manifest(out, "fit", s.seed, &s, details)?;
    Ok(0)
}

fn run_tune(args: TuneArgs) -> Result<u8> {
    let mut s = settings(&args.common, Some(&args.data), Some(&args.chain))?;
    if let Some(g) = &args.grid {
        s.grid = g.clone();
    }
    let grid = parse_grid(&s.grid)?;
    let out = &args.common.out;
    fs::create_dir_all(out)?;
    let loaded = load(&args.data, &s)?;
    let base = Hyperparams::new(1.0, 1.0, s.a_sigma, s.b_sigma)?;
    let search = gsmtr::grid_search(&loaded.data, &grid, &base, &sampler_config(&s), s.chains_parallel)?;
    search.report.write_csv(create(&out.join("waic_grid.csv"))?)?;
    let mut details = summarize(out, &search.best, &loaded.data, &s)?;
    write_standardization(out, &loaded.data, &loaded.standardization)?;
    if args.chain.save_draws {
        io::SavedChain::from_chain(&search.best, loaded.data.snp_names(), loaded.data.phenotype_names())
            .save(&out.join("chain.json"))?;
    }
    let failed = search.report.n_failed();
    details["grid_points"] = grid.len().into();
    details["failed_points"] = failed.into();
    write_manifest(out, "tune", s.seed, &s, details)?;
    if failed > 0 {
        eprintln!("warning: {failed} of {} grid points failed; see waic_grid.csv", grid.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn run_bootstrap(args: BootstrapArgs) -> Result<u8> {
    let mut s = settings(&args.common, Some(&args.data), None)?;
    s.gamma1 = args.gamma1.or(s.gamma1);
    s.gamma2 = args.gamma2.or(s.gamma2);
    if let Some(g) = &args.gamma_grid {
        s.gamma_grid = g.clone();
    }
    if let Some(f) = args.folds {
        s.folds = f;
    }
    if let Some(b) = args.replicates {
        s.bootstrap_replicates = b;
    }
    install_pool(s.chains_parallel);
    let out = &args.common.out;
    fs::create_dir_all(out)?;
    let loaded = load(&args.data, &s)?;
    let data = &loaded.data;
    let opts = WangOptions::default();
    let mut details = serde_json::json!({});
    let (g1, g2) = match (s.gamma1, s.gamma2) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let grid = parse_grid(&s.gamma_grid)?;
            let sel = wang::cv_select(data.x(), data.y(), data.groups(), grid.points(), s.folds, s.seed, &opts)?;
            details["cv_scores"] = sel.scores.clone().into();
            (sel.gamma1, sel.gamma2)
        }
    };
    let result = wang::bootstrap_intervals(
        data.x(),
        data.y(),
        data.groups(),
        g1,
        g2,
        s.bootstrap_replicates,
        s.level,
        s.seed,
        &opts,
    )?;
    io::write_bootstrap(
        create(&out.join("bootstrap_intervals.csv"))?,
        data.snp_names(),
        data.phenotype_names(),
        &result,
    )?;
    write_standardization(out, data, &loaded.standardization)?;
    details["gamma1"] = g1.into();
    details["gamma2"] = g2.into();
    details["replicates"] = result.replicates().into();
    details["converged_fraction"] = result.converged_fraction().into();
    write_manifest(out, "bootstrap", s.seed, &s, details)?;
    Ok(0)
}

fn run_simulate(args: SimulateArgs) -> Result<u8> {
    let mut design = match (&args.config, args.study) {
        (Some(p), _) => StudyDesign::from_file(p)?,
        (None, Some(k)) => StudyDesign::desk(k)?,
        (None, None) => return Err(Error::Config("give --config or --study".into())),
    };
    if let Some(seed) = args.seed {
        design.seed = seed;
    }
    if let Some(r) = args.replicates {
        design.replicates = r;
    }
    design.validate()?;
    install_pool(args.chains_parallel.unwrap_or(0));
    fs::create_dir_all(&args.out)?;
    let methods: [&dyn IntervalMethod; 2] = [&BayesMethod, &BootstrapMethod];
    let table = sim::run_study(&design, &methods)?;
    table.write_csv(create(&args.out.join("coverage.csv"))?)?;
    let failures: usize = table.methods.iter().map(|m| m.failures).sum();
    let details = serde_json::json!({
        "methods": table.methods.iter().map(|m| serde_json::json!({
            "method": m.method,
            "mcp_overall": m.mcp_overall,
            "mcp_active": m.mcp_active,
            "replicates": m.replicates,
            "failures": m.failures,
        })).collect::<Vec<_>>(),
    });
    write_manifest(&args.out, "simulate", design.seed, &design, details)?;
    Ok(if failures > 0 { EXIT_PARTIAL } else { 0 })
}

fn run_report(args: ReportArgs) -> Result<u8> {
    let saved = io::SavedChain::load(&args.draws)?;
    let level = args.level.unwrap_or(0.95);
    fs::create_dir_all(&args.out)?;
    let report = report::intervals_from_draws(saved.draws()?.view(), level)?
        .with_names(saved.snp_names.clone(), saved.phenotype_names.clone())?;
    let selection = report::select_snps(&report);
    let ranking = report::rank_snps(report.mean.view());
    io::write_posterior_summary(create(&args.out.join("posterior_summary.csv"))?, &report)?;
    io::write_selection(create(&args.out.join("selection.csv"))?, &report, &selection)?;
    io::write_ranking(create(&args.out.join("ranking.csv"))?, &report, &ranking)?;
    let plots = write_plots(&args.out, &report, args.plots.unwrap_or(PlotMode::Selected))?;
    let settings = serde_json::json!({ "draws": args.draws, "level": level });
    let details = serde_json::json!({
        "selected_pairs": selection.pairs.len(),
        "selected_snps": selection.snps.len(),
        "ranking": "posterior mean",
        "plots": plots,
    });
    write_manifest(&args.out, "report", saved.seed, &settings, details)?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Tune(a) => run_tune(a),
        Command::Bootstrap(a) => run_bootstrap(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
