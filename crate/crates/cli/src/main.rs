//! `physact`: feature extraction, forward selection and cross-validated
//! evaluation of multi-channel sEMG recordings.
//!
//! Exit status is 0 on success, 2 for bad input (config, data, indices)
//! and 1 for anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use physact::dataset::{load_dataset, DatasetManifest};
use physact::eval::{
    ablation, channel_relevance, default_ablation_groups, monte_carlo, sfs_pnn, ClassifierConfig,
    RepeatedCv,
};
use physact::features::{extract_all, published_selection, FeatureMatrix, FeatureRegistry};
use physact::ExperimentConfig;

#[derive(Parser)]
#[command(name = "physact", version, about = "sEMG physical action classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the feature matrix of every pattern in the manifest.
    Extract(Common),
    /// Forward feature selection on a feature matrix.
    Select(WithFeatures),
    /// Repeated k-fold evaluation of a feature subset.
    Eval(WithSelection),
    /// Leave-one-channel-out evaluation of a feature subset.
    Relevance(WithSelection),
    /// Cumulative Baseline / +ICS / +LMF evaluation of a feature subset.
    Ablate(WithSelection),
}

#[derive(Args)]
struct Common {
    /// Experiment config file (`key = value`); defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's `manifest`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct WithFeatures {
    #[command(flatten)]
    common: Common,
    /// Feature matrix CSV; defaults to `features.csv` in the output dir.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Args)]
struct WithSelection {
    #[command(flatten)]
    inner: WithFeatures,
    /// 1-based feature indices: a comma list, `published`, `all`, or a file
    /// (a selection CSV from `select`, or indices separated by commas or
    /// whitespace).
    #[arg(long)]
    selected: String,
}

/// An error plus the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Classify<T> {
    fn user(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn user(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: 2,
            error: e.into(),
        })
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: 1,
            error: e.into(),
        })
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)
            .with_context(|| format!("config {}", p.display()))
            .user()?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(m) = &c.manifest {
        cfg.manifest = Some(m.clone());
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .internal()?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .internal()?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read_features(w: &WithFeatures, cfg: &ExperimentConfig) -> Result<FeatureMatrix, Failure> {
    let path = w
        .features
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("features.csv"));
    let file = fs::File::open(&path)
        .with_context(|| format!("opening {}", path.display()))
        .user()?;
    FeatureMatrix::read_csv(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
        .user()
}

/// Registry of the extraction config whose names match the matrix header.
fn registry_for(m: &FeatureMatrix, cfg: &ExperimentConfig) -> Option<FeatureRegistry> {
    (1..=64)
        .map(|ch| cfg.features.registry(ch))
        .find(|r| r.names() == m.names)
}

fn parse_indices(text: &str, features: usize) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let i: usize = tok.parse().map_err(|_| anyhow!("bad feature index `{tok}`"))?;
        if i == 0 || i > features {
            bail!("feature index {i} out of range 1..={features}");
        }
        if !out.contains(&(i - 1)) {
            out.push(i - 1);
        }
    }
    if out.is_empty() {
        bail!("no feature indices given");
    }
    Ok(out)
}

/// 0-based positions named by `--selected`.
fn resolve_selection(
    spec: &str,
    m: &FeatureMatrix,
    registry: Option<&FeatureRegistry>,
) -> anyhow::Result<Vec<usize>> {
    match (spec, registry) {
        ("all", _) => return Ok((0..m.num_features()).collect()),
        ("published", Some(r)) => return Ok(published_selection(r)),
        ("published", None) => bail!("`published` needs a matrix with the configured feature layout"),
        _ => {}
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return parse_indices(spec, m.num_features());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.starts_with("step,") {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut idx = Vec::new();
        for rec in r.records() {
            let rec = rec.with_context(|| format!("reading {}", path.display()))?;
            idx.push(rec.get(1).unwrap_or("").to_string());
        }
        return parse_indices(&idx.join(","), m.num_features())
            .with_context(|| format!("in {}", path.display()));
    }
    parse_indices(&text, m.num_features()).with_context(|| format!("in {}", path.display()))
}

struct Prepared {
    cfg: ExperimentConfig,
    matrix: FeatureMatrix,
    registry: Option<FeatureRegistry>,
    selected: Vec<usize>,
}

impl Prepared {
    fn registry(&self) -> Result<&FeatureRegistry, Failure> {
        self.registry
            .as_ref()
            .ok_or_else(|| anyhow!("feature columns do not match the configured feature layout"))
            .user()
    }
}

fn prepare(w: &WithSelection) -> Result<Prepared, Failure> {
    let cfg = load_config(&w.inner.common)?;
    let matrix = read_features(&w.inner, &cfg)?;
    let registry = registry_for(&matrix, &cfg);
    let selected = resolve_selection(&w.selected, &matrix, registry.as_ref()).user()?;
    Ok(Prepared {
        cfg,
        matrix,
        registry,
        selected,
    })
}

fn config_json(cfg: &ExperimentConfig) -> Value {
    json!(cfg.to_map())
}

fn selected_json(p: &Prepared) -> Value {
    Value::Array(
        p.selected
            .iter()
            .map(|&i| json!({ "index": i + 1, "name": p.matrix.names[i] }))
            .collect(),
    )
}

fn cmd_extract(c: &Common) -> Result<(), Failure> {
    let cfg = load_config(c)?;
    let manifest_path = cfg
        .manifest
        .clone()
        .ok_or_else(|| anyhow!("no manifest: set `manifest` in the config or pass --manifest"))
        .user()?;
    let manifest = DatasetManifest::load(&manifest_path).user()?;
    let patterns = load_dataset(&manifest).user()?;
    if patterns.is_empty() {
        return Err(anyhow!("manifest lists no recordings")).user();
    }
    let matrix = extract_all(&patterns, &cfg.features).user()?;
    let registry = cfg.features.registry(manifest.channels);
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf).internal()?;
    write(&cfg.output_dir, "features.csv", &String::from_utf8_lossy(&buf))?;
    write(&cfg.output_dir, "registry.csv", &registry.to_csv())?;
    println!(
        "{} patterns x {} features -> {}",
        matrix.num_rows(),
        matrix.num_features(),
        cfg.output_dir.join("features.csv").display()
    );
    Ok(())
}

fn cmd_select(w: &WithFeatures) -> Result<(), Failure> {
    let cfg = load_config(&w.common)?;
    let m = read_features(w, &cfg)?;
    let trace = sfs_pnn(
        &m.rows,
        &m.labels,
        cfg.folds,
        cfg.sfs_sigma,
        cfg.sfs_seed,
        cfg.sfs_max_features,
        cfg.sfs_patience,
    )
    .user()?;
    let mut out = String::from("step,index,name,criterion\n");
    for (s, step) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s + 1,
            step.feature + 1,
            m.names[step.feature],
            step.criterion
        ));
    }
    write(&cfg.output_dir, "selection.csv", &out)?;
    let list: Vec<String> = trace.features().iter().map(|i| (i + 1).to_string()).collect();
    println!(
        "selected {} features, criterion = {:.4}: {}",
        trace.len(),
        trace.best().unwrap_or(0.0),
        list.join(",")
    );
    Ok(())
}

fn repeated<'a>(cfg: &ExperimentConfig, classifier: &'a ClassifierConfig) -> RepeatedCv<'a> {
    RepeatedCv {
        folds: cfg.folds,
        runs: cfg.mc_runs,
        base_seed: cfg.seed,
        classifier,
    }
}

fn cmd_eval(w: &WithSelection) -> Result<(), Failure> {
    let p = prepare(w)?;
    let cols = p.matrix.select(&p.selected);
    let mut mc = monte_carlo(
        &cols,
        &p.matrix.labels,
        p.cfg.folds,
        &p.cfg.classifier(),
        p.cfg.mc_runs,
        p.cfg.seed,
    )
    .user()?;
    mc.first.selected = p.selected.iter().map(|i| i + 1).collect();
    let report = json!({
        "config": config_json(&p.cfg),
        "selected": selected_json(&p),
        "folds": p.cfg.folds,
        "runs": p.cfg.mc_runs,
        "base_seed": p.cfg.seed,
        "alpha_mean": mc.alpha_mean,
        "alpha_std": mc.alpha_std,
        "kappa_mean": mc.kappa_mean,
        "kappa_std": mc.kappa_std,
        "per_run": mc.runs,
        "first_run": mc.first,
        "confusion_sum": mc.confusion_sum,
    });
    let text = serde_json::to_string_pretty(&report).internal()? + "\n";
    write(&p.cfg.output_dir, "report.json", &text)?;
    write(&p.cfg.output_dir, "confusion.csv", &mc.first.confusion.to_csv())?;
    println!("alpha = {:.4}  kappa = {:.4}", mc.alpha_mean, mc.kappa_mean);
    Ok(())
}

fn cmd_relevance(w: &WithSelection) -> Result<(), Failure> {
    let p = prepare(w)?;
    let classifier = p.cfg.classifier();
    let rel = channel_relevance(
        &p.matrix.rows,
        &p.matrix.labels,
        &p.selected,
        p.registry()?,
        &repeated(&p.cfg, &classifier),
    )
    .user()?;
    let mut out = String::from("channel,alpha,kappa,alpha_std,kappa_std,dropped\n");
    for r in &rel {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.channel, r.alpha, r.kappa, r.alpha_std, r.kappa_std, r.dropped
        ));
        println!("channel {}: alpha = {:.4}  kappa = {:.4}", r.channel, r.alpha, r.kappa);
    }
    write(&p.cfg.output_dir, "relevance.csv", &out)?;
    Ok(())
}

fn cmd_ablate(w: &WithSelection) -> Result<(), Failure> {
    let p = prepare(w)?;
    let groups = default_ablation_groups(&p.selected, p.registry()?);
    let classifier = p.cfg.classifier();
    let rows = ablation(
        &p.matrix.rows,
        &p.matrix.labels,
        &groups,
        &repeated(&p.cfg, &classifier),
    )
    .user()?;
    let mut out = String::from("group,features,alpha,kappa,delta_alpha,delta_kappa,members\n");
    for (r, g) in rows.iter().zip(&groups) {
        let members: Vec<String> = g.features.iter().map(|i| (i + 1).to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},\"{}\"\n",
            r.name,
            r.features,
            r.alpha,
            r.kappa,
            r.delta_alpha,
            r.delta_kappa,
            members.join(",")
        ));
        println!(
            "{:<8} {:>3} features  alpha = {:.4}  kappa = {:.4}  delta kappa = {:+.4}",
            r.name, r.features, r.alpha, r.kappa, r.delta_kappa
        );
    }
    write(&p.cfg.output_dir, "ablation.csv", &out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Extract(c) => cmd_extract(c),
        Command::Select(w) => cmd_select(w),
        Command::Eval(w) => cmd_eval(w),
        Command::Relevance(w) => cmd_relevance(w),
        Command::Ablate(w) => cmd_ablate(w),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
