use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use flowkit::harness::{
    emit_report, fetch_predictions, load_dataset, load_predictions, score, write_predictions, ModelEndpointConfig,
    ReportFormat, ScoreOptions,
};
use flowkit::metrics::{ComponentMatchMode, MetricConfig, MetricResult, TriggerMatchMode};
use flowkit::render::{rasterize, sample_style, to_dot};
use flowkit::synth::{
    default_registry, generate_dataset, pattern, read_records_file, split_dataset, write_records_file, Catalog,
    GenParams, SeedStream, PATTERN_COUNTS,
};
use flowkit::tree::NodeWeights;
use std::fs;
use std::path::PathBuf;

/// Workflow generation, rendering and evaluation toolkit
#[derive(Parser, Debug)]
#[command(name = "flowkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic flows as JSONL
    Generate {
        /// Pattern name, or `mixed` to sample all patterns by weight
        #[arg(long, default_value = "mixed")]
        pattern: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Probability of adding an IF branch
        #[arg(long, default_value_t = 0.5)]
        p_if: f64,
        /// Probability of adding an ELSE branch when an IF exists
        #[arg(long, default_value_t = 0.5)]
        p_else: f64,
        /// Catalog JSON replacing the built-in one
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Partition a flow file into train/valid/test by content hash
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        /// Three comma-separated ratios summing to 1
        #[arg(long, default_value = "0.86,0.07,0.07")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one Graphviz file per flow, with a randomized style
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also produce PNGs through the `dot` executable
        #[arg(long)]
        raster: bool,
    },
    /// Score predictions against a reference dataset
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// Prediction JSONL with `sample_id` and `raw_output`
        #[arg(long, conflicts_with = "endpoint", required_unless_present = "endpoint")]
        predictions: Option<PathBuf>,
        /// Model endpoint config JSON
        #[arg(long)]
        endpoint: Option<PathBuf>,
        /// Where to keep raw endpoint outputs
        #[arg(long, requires = "endpoint")]
        save_predictions: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Leave samples without a prediction out of the means
        #[arg(long)]
        exclude_missing: bool,
        /// Node weight table JSON
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Trigger match also compares trigger inputs
        #[arg(long)]
        strict_trigger: bool,
        /// Component match ignores duplicate components
        #[arg(long)]
        set_components: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Md,
}

fn parse_ratios(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad ratios `{text}`"))?;
    match parts.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => bail!("expected three ratios, got {}", parts.len()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            pattern: name,
            count,
            seed,
            out,
            p_if,
            p_else,
            catalog,
        } => {
            let params = GenParams { p_if, p_else };
            let registry = if name == "mixed" {
                default_registry(&params)
            } else {
                let known: Vec<&str> = PATTERN_COUNTS.iter().map(|(n, _)| *n).collect();
                vec![pattern(&name, &params)
                    .with_context(|| format!("unknown pattern `{name}`; known: mixed, {}", known.join(", ")))?]
            };
            let catalog = match catalog {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)
                    .with_context(|| format!("reading catalog {}", path.display()))?,
                None => Catalog::default(),
            };
            let records = generate_dataset(&registry, &catalog, count, seed)?;
            write_records_file(&out, &records).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {} flows to {}", records.len(), out.display());
        }
        Command::Split {
            input,
            ratios,
            seed,
            out,
        } => {
            let records = read_records_file(&input).with_context(|| format!("reading {}", input.display()))?;
            let flows: Vec<_> = records.into_iter().map(|r| r.flow).collect();
            let manifest = split_dataset(&flows, parse_ratios(&ratios)?, seed)?;
            fs::write(&out, serde_json::to_string_pretty(&manifest)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "train {} / valid {} / test {}",
                manifest.train.len(),
                manifest.valid.len(),
                manifest.test.len()
            );
        }
        Command::Render {
            input,
            out_dir,
            seed,
            raster,
        } => {
            let records = read_records_file(&input).with_context(|| format!("reading {}", input.display()))?;
            fs::create_dir_all(&out_dir)?;
            let stream = SeedStream::new(seed).named("render");
            let mut rasterized = 0;
            let mut missing_dot = false;
            for r in &records {
                let style = sample_style(stream.named(&r.id.0).key());
                let dot_path = out_dir.join(format!("{}.dot", r.id));
                fs::write(&dot_path, to_dot(&r.flow, &style))?;
                if raster && !missing_dot {
                    if rasterize(&dot_path, &dot_path.with_extension("png"))? {
                        rasterized += 1;
                    } else {
                        missing_dot = true;
                        eprintln!("warning: `dot` not found on PATH, skipping PNG output");
                    }
                }
            }
            eprintln!(
                "wrote {} DOT files ({rasterized} PNG) to {}",
                records.len(),
                out_dir.display()
            );
        }
        Command::Evaluate {
            dataset,
            predictions,
            endpoint,
            save_predictions,
            report,
            format,
            exclude_missing,
            weights,
            strict_trigger,
            set_components,
        } => {
            let samples = load_dataset(&dataset).with_context(|| format!("reading {}", dataset.display()))?;
            let preds = match (predictions, endpoint) {
                (Some(p), _) => load_predictions(&p).with_context(|| format!("reading {}", p.display()))?,
                (None, Some(cfg)) => {
                    let config = ModelEndpointConfig::load(&cfg)?;
                    let preds = fetch_predictions(&samples, &config)?;
                    if let Some(path) = save_predictions {
                        write_predictions(fs::File::create(&path)?, &preds)?;
                    }
                    preds
                }
                (None, None) => bail!("either --predictions or --endpoint is required"),
            };
            let weights = match weights {
                Some(path) => {
                    let w: NodeWeights = serde_json::from_str(&fs::read_to_string(&path)?)
                        .with_context(|| format!("reading weights {}", path.display()))?;
                    w.validate().map_err(anyhow::Error::msg)?;
                    w
                }
                None => NodeWeights::default(),
            };
            let opts = ScoreOptions {
                metrics: MetricConfig {
                    weights,
                    trigger_mode: if strict_trigger {
                        TriggerMatchMode::Strict
                    } else {
                        TriggerMatchMode::TypeOnly
                    },
                    component_mode: if set_components {
                        ComponentMatchMode::Set
                    } else {
                        ComponentMatchMode::Multiset
                    },
                },
                exclude_missing,
            };
            let result = score(&samples, &preds, &opts)?;
            let fmt = match format {
                Format::Json => ReportFormat::Json,
                Format::Md => ReportFormat::Markdown,
            };
            fs::write(&report, emit_report(&result, fmt)).with_context(|| format!("writing {}", report.display()))?;
            let summary: Vec<String> = MetricResult::COLUMNS
                .iter()
                .zip(result.overall.means.values())
                .map(|(c, v)| format!("{c}: {v:.3}"))
                .collect();
            println!("{} samples; {}", result.overall.count, summary.join(", "));
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
