use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use treekit::{exit, files, sweep, PredictionSource, ScenarioConfig};
use treekit_core::augment::{self, AugmentConfig};
use treekit_core::evaluate::{self, compute_ce, CeInput};
use treekit_core::geometry::AreaMode;
use treekit_core::grouping::{self, GroupingConfig};
use treekit_core::sparsify::{sparsify_indices, sparsify_series, SparsifyConfig};
use treekit_core::synthgen::{self, ForestConfig, OracleNoise};
use treekit_core::{io, seed, InstanceSegmentation};

#[derive(Parser)]
#[command(
    name = "treekit",
    version,
    about = "Tree instance segmentation toolkit for labeled point clouds"
)]
struct Cli {
    /// Seed for every stochastic step; overrides seeds in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file or directory, for commands without a positional output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Area {
    Hull,
    Bbox,
}

impl From<Area> for AreaMode {
    fn from(a: Area) -> Self {
        match a {
            Area::Hull => AreaMode::ConvexHull,
            Area::Bbox => AreaMode::BoundingBox,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic forest (cloud.ptc) and oracle predictions (oracle.prd).
    Synth {
        /// Forest config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Oracle noise JSON (offset_sigma, embedding_sigma, semantic_flip_prob).
        #[arg(long)]
        noise: Option<PathBuf>,
    },
    /// Randomly subsample a cloud to a target density (points per m²).
    Sparsify {
        #[arg(long)]
        density: f64,
        #[arg(long, value_enum, default_value = "hull")]
        area: Area,
        input: PathBuf,
        output: Option<PathBuf>,
    },
    /// Sparsify to several densities, one file per density.
    SparsifySeries {
        #[arg(long, value_delimiter = ',', required = true)]
        densities: Vec<f64>,
        #[arg(long, value_enum, default_value = "hull")]
        area: Area,
        input: PathBuf,
        out_dir: Option<PathBuf>,
    },
    /// Apply reflect, scale, rotate and jitter augmentation.
    Augment {
        /// Augment config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        input: PathBuf,
        output: Option<PathBuf>,
    },
    /// Group per-point predictions into tree instances.
    Segment {
        /// Grouping config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        cloud: PathBuf,
        preds: PathBuf,
        output: Option<PathBuf>,
    },
    /// Match predicted instances to ground truth and report metrics.
    Evaluate {
        gt: PathBuf,
        pred: PathBuf,
        /// Height bin size in meters.
        #[arg(long, default_value_t = evaluate::DEFAULT_BIN_HEIGHT)]
        bins: f64,
        /// Also write the per-bin table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Computational efficiency in MB per core per minute.
    Ce {
        #[arg(long)]
        mb: f64,
        #[arg(long)]
        cores: f64,
        #[arg(long)]
        minutes: f64,
    },
    /// Compose a scenario dataset and write a manifest.
    Prepare {
        /// Scenario config JSON.
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate one cloud at several densities; writes CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        densities: Vec<f64>,
        /// Grouping config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Predictions aligned with the full cloud.
        #[arg(long, conflicts_with = "noise")]
        preds: Option<PathBuf>,
        /// Use the synthetic oracle with this noise JSON instead of a file.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Labeled cloud; its instance column is the ground truth.
        cloud: PathBuf,
    },
    /// Segment and evaluate in one go; writes instances.ptc and report.json.
    Run {
        /// Grouping config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        cloud: PathBuf,
        preds: PathBuf,
        gt: PathBuf,
    },
}

fn output(positional: Option<PathBuf>, global: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    positional.or_else(|| global.clone()).ok_or_else(|| {
        anyhow!(treekit_core::Error::InvalidParameter(format!(
            "missing {what} (positional or --out)"
        )))
    })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => files::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let seed_or = |fallback: u64| cli.seed.unwrap_or(fallback);

    match cli.command {
        Command::Synth { config, noise } => {
            let mut forest: ForestConfig = files::read_config(config.as_deref())?;
            forest.seed = seed_or(forest.seed);
            let noise: OracleNoise = files::read_config(noise.as_deref())?;
            let dir = output(None, &cli.out, "output directory")?;
            let cloud = synthgen::generate_forest(&forest).context("synth")?;
            let preds = synthgen::oracle_predictions(&cloud, &noise, seed::derive(forest.seed, 1))
                .context("oracle")?;
            files::create_dir(&dir)?;
            files::write_cloud(&cloud, &dir.join("cloud.ptc"))?;
            io::save_predictions(&preds, dir.join("oracle.prd"))?;
        }
        Command::Sparsify {
            density,
            area,
            input,
            output: out,
        } => {
            let out = output(out, &cli.out, "output file")?;
            let cloud = files::read_cloud(&input)?;
            let idx =
                sparsify_indices(&cloud, density, seed_or(0), area.into()).context("sparsify")?;
            files::write_cloud(&cloud.select(&idx), &out)?;
        }
        Command::SparsifySeries {
            densities,
            area,
            input,
            out_dir,
        } => {
            let dir = output(out_dir, &cli.out, "output directory")?;
            let cloud = files::read_cloud(&input)?;
            let config = SparsifyConfig {
                target_densities: densities,
                seed: seed_or(0),
                area_mode: area.into(),
            };
            let series = sparsify_series(&cloud, &config).context("sparsify")?;
            files::create_dir(&dir)?;
            let stem = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "cloud".into());
            for (d, c) in series {
                let path = dir.join(format!("{stem}_d{}.ptc", files::density_label(d)));
                files::write_cloud(&c, &path)?;
                println!("{}\t{}", path.display(), c.len());
            }
        }
        Command::Augment {
            config,
            input,
            output: out,
        } => {
            let out = output(out, &cli.out, "output file")?;
            let mut aug: AugmentConfig = files::read_config(config.as_deref())?;
            aug.seed = seed_or(aug.seed);
            let cloud = files::read_cloud(&input)?;
            files::write_cloud(&augment::augment(&cloud, &aug).context("augment")?, &out)?;
        }
        Command::Segment {
            config,
            cloud,
            preds,
            output: out,
        } => {
            let out = output(out, &cli.out, "output file")?;
            let config: GroupingConfig = files::read_config(config.as_deref())?;
            let cloud = files::read_cloud(&cloud)?;
            let preds = io::load_predictions(&preds)?;
            let seg = grouping::segment(&cloud, &preds, &config).context("segment")?;
            let result =
                grouping::prediction_cloud(&cloud, &preds, &seg, config.semantic_threshold)?;
            files::write_cloud(&result, &out)?;
        }
        Command::Evaluate {
            gt,
            pred,
            bins,
            csv,
        } => {
            let gt = files::read_cloud(&gt)?;
            let pred = files::read_cloud(&pred)?;
            let report = evaluate::evaluate(
                &InstanceSegmentation::from_cloud(&gt),
                &InstanceSegmentation::from_cloud(&pred),
                &gt.z(),
                bins,
            )
            .context("evaluate")?;
            if let Some(path) = csv {
                let mut w = ::csv::Writer::from_path(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
                for b in &report.per_bin {
                    w.serialize(b)?;
                }
                w.flush()?;
            }
            emit(&(report.to_json() + "\n"), &cli.out)?;
        }
        Command::Ce { mb, cores, minutes } => {
            println!("{}", compute_ce(CeInput::new(mb, cores, minutes))?);
        }
        Command::Prepare { config } => {
            let dir = output(None, &cli.out, "output directory")?;
            let mut scenario: ScenarioConfig = {
                let text = std::fs::read_to_string(&config)
                    .with_context(|| format!("reading {}", config.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", config.display()))?
            };
            scenario.seed = seed_or(scenario.seed);
            let manifest = treekit::prepare_scenario(&scenario, &dir)?;
            eprintln!(
                "{} artifacts, manifest at {}",
                manifest.artifacts.len(),
                dir.join("manifest.json").display()
            );
        }
        Command::Sweep {
            densities,
            config,
            preds,
            noise,
            cloud,
        } => {
            let config: GroupingConfig = files::read_config(config.as_deref())?;
            let cloud = files::read_cloud(&cloud)?;
            let source = match (preds, noise) {
                (Some(p), _) => PredictionSource::File(io::load_predictions(&p)?),
                (None, n) => PredictionSource::Oracle(files::read_config(n.as_deref())?),
            };
            let rows = treekit::sweep_densities(&cloud, &source, &densities, &config, seed_or(0))?;
            let mut buf = Vec::new();
            sweep::write_csv(&rows, &mut buf)?;
            emit(&String::from_utf8(buf).expect("csv is utf-8"), &cli.out)?;
        }
        Command::Run {
            config,
            cloud,
            preds,
            gt,
        } => {
            let dir = output(None, &cli.out, "output directory")?;
            let config: GroupingConfig = files::read_config(config.as_deref())?;
            let out = treekit::run_pipeline(&cloud, &preds, &config, &gt, &dir)?;
            eprintln!(
                "detection {:.3}, commission {:.3}; wrote {}",
                out.report.detection_rate,
                out.report.commission_rate,
                out.report_path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(treekit::exit_code(&e) as u8)
        }
    }
}
