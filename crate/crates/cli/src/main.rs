use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scribe_core::dataset::{select_features, Dataset};
use scribe_core::features::FeatureId;
use scribe_core::pipeline::{run_extract, RunConfig};
use scribe_core::reduce::ReducerKind;
use scribe_core::report::{cluster_dataset, scan_report, shift_report, write_artifacts, Artifact};
use scribe_core::synth::{render_pages, write_corpus, HandStyle, PageSpec};

#[derive(Parser)]
#[command(name = "scribe", version, about = "Handwriting feature extraction and hand-shift analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for page and box parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma separated feature names, e.g. the six-feature variant
    /// `orientation,height,width,corner_angle,aspect_ratio,blob_dog`.
    #[arg(long, global = true)]
    features: Option<String>,
}

#[derive(Args, Clone, Default)]
struct Analysis {
    /// pca, ica, kpca-cosine or kpca-rbf; repeatable.
    #[arg(long = "reducer")]
    reducers: Vec<ReducerKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature rows from page images and hOCR into a CSV dataset.
    Extract {
        #[command(flatten)]
        common: Common,
    },
    /// Reduce and fuzzy-cluster one or more datasets.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: Analysis,
        /// Dataset CSV; repeatable. Without one, pages are extracted first.
        #[arg(long = "dataset")]
        datasets: Vec<PathBuf>,
        /// Number of centres; repeatable.
        #[arg(long = "centers")]
        centers: Vec<usize>,
    },
    /// Dummy hand-shift experiment between two datasets, or a scan of one.
    Shift {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long, required_unless_present = "scan")]
        left: Option<PathBuf>,
        #[arg(long, required_unless_present = "scan")]
        right: Option<PathBuf>,
        /// Keep only rows with this hand tag from the left dataset.
        #[arg(long)]
        left_hand: Option<String>,
        #[arg(long)]
        right_hand: Option<String>,
        /// Scan a single dataset instead.
        #[arg(long, conflicts_with_all = ["left", "right"])]
        scan: Option<PathBuf>,
    },
    /// Slide the shift test along one dataset in document order.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: Analysis,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Write a synthetic handwriting corpus (PNG + hOCR).
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Hand::A)]
        hand: Hand,
        #[arg(long, default_value_t = 2)]
        pages: usize,
        /// Number of the first page.
        #[arg(long, default_value_t = 1)]
        first: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Hand {
    A,
    B,
}

/// Things worth a nonzero exit status that did not stop the run.
type Warnings = Vec<String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(w) if w.is_empty() => ExitCode::SUCCESS,
        Ok(w) => {
            eprintln!("completed with {} warning(s)", w.len());
            for x in &w {
                eprintln!("  {x}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn settings(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => RunConfig::default(),
    };
    cfg.resolve_seed(common.seed)?;
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if let Some(n) = common.workers.or(cfg.workers) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    if let Some(f) = &common.features {
        cfg.extract.selected = FeatureId::parse_list(f)?;
    }
    Ok(cfg)
}

fn reducers(cfg: &RunConfig, a: &Analysis) -> Vec<ReducerKind> {
    if a.reducers.is_empty() {
        cfg.reducers.clone()
    } else {
        a.reducers.clone()
    }
}

fn load_dataset(path: &Path, cfg: &RunConfig, common: &Common) -> Result<Dataset> {
    let ds = Dataset::read_csv(path).with_context(|| format!("reading dataset {}", path.display()))?;
    if common.features.is_some() {
        return Ok(select_features(&ds, &cfg.extract.selected)?);
    }
    Ok(ds)
}

fn emit(cfg: &RunConfig, artifacts: &[Artifact]) -> Result<()> {
    for p in write_artifacts(&cfg.out_dir, artifacts)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn extract(cfg: &RunConfig) -> Result<(Dataset, Warnings)> {
    let run = run_extract(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("dataset.csv");
    run.dataset.write_csv(&path)?;
    println!("page  hand  lines  words  rows  rejected");
    for p in &run.dataset.meta.pages {
        println!(
            "{:>4}  {:<4}  {:>5}  {:>5}  {:>4}  {:>8}",
            p.page,
            p.hand.as_deref().unwrap_or("-"),
            p.lines,
            p.words,
            p.rows,
            p.rejected_boxes
        );
    }
    println!("wrote {} ({} rows)", path.display(), run.dataset.len());
    Ok((run.dataset, run.warnings))
}

fn run(command: Command) -> Result<Warnings> {
    match command {
        Command::Extract { common } => {
            let cfg = settings(&common)?;
            Ok(extract(&cfg)?.1)
        }
        Command::Cluster { common, analysis, datasets, centers } => {
            let cfg = settings(&common)?;
            let (ds, mut warnings) = if datasets.is_empty() {
                extract(&cfg)?
            } else {
                let parts = datasets
                    .iter()
                    .map(|p| load_dataset(p, &cfg, &common))
                    .collect::<Result<Vec<_>>>()?;
                (Dataset::concat(&parts)?, Vec::new())
            };
            let centers = if centers.is_empty() { cfg.centers.clone() } else { centers };
            for reducer in reducers(&cfg, &analysis) {
                for &c in &centers {
                    let out = cluster_dataset::<f64>(&ds, &cfg.cluster_settings(reducer, c))
                        .with_context(|| format!("clustering with {} and {c} centres", reducer.name()))?;
                    let r = &out.report;
                    println!(
                        "{} c={c}: FPC {:.4} ({:?}, threshold {})",
                        reducer.name(),
                        r.fpc,
                        r.verdict,
                        r.fpc_threshold.map_or("none".into(), |t| t.to_string())
                    );
                    for h in &r.memberships.hands {
                        let pct: Vec<String> = h.pct.iter().enumerate().map(|(i, p)| format!("{i}: {p:.1}%")).collect();
                        println!("  {} ({} rows): {}", h.hand, h.rows, pct.join(", "));
                    }
                    warnings.extend(r.warnings.iter().cloned());
                    warnings.extend(r.memberships.excluded.iter().map(|h| format!("hand {h} has no rows")));
                    emit(&cfg, &out.artifacts())?;
                }
            }
            Ok(warnings)
        }
        Command::Shift { common, analysis, left, right, left_hand, right_hand, scan } => {
            let cfg = settings(&common)?;
            if let Some(doc) = scan {
                return scan_cmd(&cfg, &common, &analysis, &doc);
            }
            let (Some(left), Some(right)) = (left, right) else {
                bail!("--left and --right are required without --scan");
            };
            let pick = |p: &Path, hand: &Option<String>| -> Result<Dataset> {
                let ds = load_dataset(p, &cfg, &common)?;
                Ok(match hand {
                    Some(h) => ds.filter_hand(h),
                    None => ds,
                })
            };
            let (l, r) = (pick(&left, &left_hand)?, pick(&right, &right_hand)?);
            for reducer in reducers(&cfg, &analysis) {
                let rep = shift_report::<f64>(&l, &r, reducer, &cfg.shift)
                    .with_context(|| format!("shift experiment with {}", reducer.name()))?;
                println!(
                    "{}: {:.1}% different (std {:.1}) over {} dummy shifts",
                    reducer.name(),
                    rep.experiment.mean_pct_different,
                    rep.experiment.std_pct_different,
                    rep.experiment.iterations.len()
                );
                for f in &rep.experiment.fpc_sweep {
                    println!("  c={}: FPC {:.4} ± {:.4}", f.centers, f.mean, f.std);
                }
                emit(&cfg, &rep.artifacts())?;
            }
            Ok(Vec::new())
        }
        Command::Scan { common, analysis, dataset } => {
            let cfg = settings(&common)?;
            scan_cmd(&cfg, &common, &analysis, &dataset)
        }
        Command::Synth { common, hand, pages, first } => {
            let cfg = settings(&common)?;
            let style = match hand {
                Hand::A => HandStyle::hand_a(),
                Hand::B => HandStyle::hand_b(),
            };
            let seed = cfg.seed.unwrap_or_default();
            let recs = render_pages(&style, &PageSpec::default(), first, pages, seed);
            write_corpus(&cfg.out_dir, &recs)?;
            println!("wrote {pages} page(s) of hand {} to {}", style.name, cfg.out_dir.display());
            Ok(Vec::new())
        }
    }
}

fn scan_cmd(cfg: &RunConfig, common: &Common, analysis: &Analysis, path: &Path) -> Result<Warnings> {
    let ds = load_dataset(path, cfg, common)?;
    for reducer in reducers(cfg, analysis) {
        let rep = scan_report::<f64>(&ds, reducer, &cfg.shift)
            .with_context(|| format!("scanning with {}", reducer.name()))?;
        println!("{}: {} boundaries, flagged rows {:?}", reducer.name(), rep.points.len(), rep.flagged_rows);
        emit(cfg, &rep.artifacts())?;
    }
    Ok(Vec::new())
}
