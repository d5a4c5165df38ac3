use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cogplay::logmodel::{read_logfile, save_logfile, validate, LOG_EXTENSION};
use cogplay::pipeline::{
    assemble_report, clean_stage, endpoints_stage, list_logs, load_logs, run_pipeline, stats_stage,
    trajectory_artifacts, write_bundle, CleanOutput, Pairing, PipelineConfig,
};
use cogplay::synthplayer::{simulate_cohort, CohortSpec};
use cogplay::trajectory::analyze;
use cogplay::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cogplay",
    version,
    about = "Gameplay telemetry simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a cohort and write one log (plus ground truth) per session.
    Simulate {
        /// Cohort JSON: {"games": [...], "players": [{"id", "sessions", "params"}]}.
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check log files against the format invariants.
    Validate {
        /// Log files or directories of logs.
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Outlier exclusion on RT and gRT.
    Clean {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        include_errors: bool,
        /// Kept trial values (JSON), input to `endpoints`.
        #[arg(long)]
        out: PathBuf,
        /// Exclusion table (CSV).
        #[arg(long)]
        report: PathBuf,
    },
    /// Session-level endpoint table from cleaned values and span-game logs.
    Endpoints {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Output of `clean`.
        #[arg(long)]
        clean: PathBuf,
        /// External scores CSV (participant, task, form, kind, value).
        #[arg(long)]
        external: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlations and test-retest ICC from an endpoint table.
    Stats {
        endpoints: PathBuf,
        #[command(flatten)]
        common: Common,
        /// JSON list of {"a": {...}, "b": {...}} pairings; default is every pair.
        #[arg(long)]
        pairings: Option<PathBuf>,
        #[arg(long)]
        correlations: PathBuf,
        #[arg(long)]
        icc: PathBuf,
    },
    /// Trajectory features, embedding, clusters, session profiles and identification.
    Trajectory {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        min_samples: Option<usize>,
        #[arg(long)]
        lateral_threshold: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Bundle existing stage outputs with a manifest, without recomputation.
    Report {
        #[arg(required = true)]
        parts: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Every stage end to end, as described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        include_errors: bool,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    match &common.config {
        Some(p) => PipelineConfig::from_json(&String::from_utf8_lossy(&read(p)?)),
        None => PipelineConfig::from_json(r#"{}"#),
    }
}

fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            out.extend(list_logs(p)?);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { cohort, seed, out } => {
            let spec = CohortSpec::from_json(&String::from_utf8_lossy(&read(&cohort)?))?;
            let sims = simulate_cohort(&spec, seed)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            for s in &sims {
                save_logfile(
                    &out.join(format!("{}.{LOG_EXTENSION}", s.truth.session)),
                    &s.log,
                )?;
                let truth = serde_json::to_string_pretty(&s.truth)? + "\n";
                write(&out.join(format!("{}.truth.json", s.truth.session)), truth)?;
            }
            println!("wrote {} sessions to {}", sims.len(), out.display());
        }
        Command::Validate { logs } => {
            let mut first_err = None;
            for p in expand(&logs)? {
                match read_logfile(&p).and_then(|f| validate(&f)) {
                    Ok(()) => println!("ok      {}", p.display()),
                    Err(e) => {
                        println!("invalid {}: {e}", p.display());
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        Command::Clean {
            logs,
            common,
            include_errors,
            out,
            report,
        } => {
            let cfg = load_config(&common)?;
            let files = load_logs(&expand(&logs)?)?;
            let clean = clean_stage(&files, &cfg.cleaning, include_errors || cfg.include_errors)?;
            write(&report, clean.exclusions_csv()?)?;
            write(&out, serde_json::to_string_pretty(&clean)? + "\n")?;
        }
        Command::Endpoints {
            logs,
            common,
            clean,
            external,
            out,
        } => {
            let cfg = load_config(&common)?;
            let files = load_logs(&expand(&logs)?)?;
            let clean: CleanOutput = serde_json::from_slice(&read(&clean)?)?;
            let external = match external.or(cfg.external_scores) {
                Some(p) => Some(read(&p)?),
                None => None,
            };
            let ep = endpoints_stage(
                &files,
                &clean,
                external.as_deref(),
                cfg.cleaning.participant_mad_ratio,
            )?;
            for d in &ep.participant_outliers {
                eprintln!(
                    "participant-level outlier removed: {} {} {}:{}",
                    d.participant, d.session, d.measure, d.kind
                );
            }
            for r in &ep.rejected_external {
                eprintln!("external score rejected: {r}");
            }
            write(&out, ep.table.to_csv()?)?;
        }
        Command::Stats {
            endpoints,
            common,
            pairings,
            correlations,
            icc,
        } => {
            let cfg = load_config(&common)?;
            let table = cogplay::endpoints::EndpointTable::from_csv(&String::from_utf8_lossy(
                &read(&endpoints)?,
            ))?;
            let pairings: Vec<Pairing> = match pairings {
                Some(p) => serde_json::from_slice(&read(&p)?)?,
                None => cfg.pairings,
            };
            let st = stats_stage(&table, &pairings, cfg.prior)?;
            for s in &st.skipped {
                eprintln!("skipped: {s}");
            }
            write(&correlations, st.correlations_csv()?)?;
            write(&icc, st.icc_csv()?)?;
        }
        Command::Trajectory {
            logs,
            common,
            seed,
            eps,
            min_samples,
            lateral_threshold,
            out_dir,
        } => {
            let mut cfg = load_config(&common)?.trajectory;
            if let Some(e) = eps {
                cfg.cluster.eps = e;
            }
            if let Some(m) = min_samples {
                cfg.cluster.min_samples = m;
            }
            if let Some(t) = lateral_threshold {
                cfg.lateral_threshold = t;
            }
            let files = load_logs(&expand(&logs)?)?;
            let analysis = analyze(&files, &cfg, seed)?;
            let notes = analysis
                .rejected
                .iter()
                .map(|(r, n)| format!("trajectory trials dropped ({r}): {n}"))
                .collect();
            write_bundle(
                &out_dir,
                &trajectory_artifacts(&analysis)?,
                None,
                Some(seed),
                vec![],
                notes,
            )?;
            println!(
                "{} trials, {} clusters, identification mean diagonal {:.1}%",
                analysis.trials.len(),
                analysis.n_clusters,
                analysis.identification.mean_diagonal()
            );
        }
        Command::Report {
            parts,
            seed,
            out_dir,
        } => {
            let m = assemble_report(&parts, &out_dir, seed)?;
            println!(
                "bundled {} files into {}",
                m.outputs.len(),
                out_dir.display()
            );
        }
        Command::Run {
            config,
            seed,
            out_dir,
            include_errors,
        } => {
            let mut cfg = PipelineConfig::from_json(&String::from_utf8_lossy(&read(&config)?))?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            if let Some(o) = out_dir {
                cfg.output_dir = o;
            }
            cfg.include_errors |= include_errors;
            let run = run_pipeline(&cfg)?;
            println!(
                "wrote {} files to {}",
                run.manifest.outputs.len() + 1,
                cfg.output_dir.display()
            );
            for n in &run.manifest.notes {
                eprintln!("note: {n}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
