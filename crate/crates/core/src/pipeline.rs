//! End-to-end orchestration: simulate, validate, clean, endpoints, stats,
//! trajectory, report. Each stage is also callable on its own so the CLI
//! subcommands can be chained through files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cleaning::{
    clean_sessions, participant_outlier_mask, report_csv, CleaningConfig, ExclusionReport,
    SessionValues,
};
use crate::endpoints::{
    ingest_external_scores, rr_session_row, session_trial_values, summarize_session,
    trial_measures, EndpointKind, EndpointRow, EndpointTable,
};
use crate::logmodel::{read_logfile, validate, write_logfile, LogFile, LOG_EXTENSION};
use crate::stats::{correlate, icc_2_1, pair_by_participant, CorrelationPrior};
use crate::synthplayer::{simulate_cohort, CohortSpec, GroundTruth};
use crate::taskengine::Game;
use crate::trajectory::{analyze, TrajectoryAnalysis, TrajectoryConfig};
use crate::{Error, Result};

/// One side of a correlation: a measure, an endpoint kind, and optionally a
/// single session or form (external tasks with parallel forms).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasureRef {
    pub measure: String,
    pub kind: EndpointKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
}

impl fmt::Display for MeasureRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.measure, self.kind)?;
        if let Some(form) = &self.form {
            write!(f, "@{form}")?;
        }
        Ok(())
    }
}

impl MeasureRef {
    /// participant → mean over the matching rows.
    pub fn participant_values(&self, table: &EndpointTable) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &table.rows {
            if r.measure != self.measure || r.kind != self.kind {
                continue;
            }
            if self.form.as_ref().is_some_and(|f| *f != r.session) {
                continue;
            }
            let e = acc.entry(r.participant.clone()).or_insert((0.0, 0));
            e.0 += r.value;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(p, (s, n))| (p, s / n as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub a: MeasureRef,
    pub b: MeasureRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Log files to analyze.
    #[serde(default)]
    pub logs: Vec<PathBuf>,
    /// Every `.pxlog` in this directory is added to `logs`.
    #[serde(default)]
    pub log_dir: Option<PathBuf>,
    /// CSV with participant, task, form, kind, value.
    #[serde(default)]
    pub external_scores: Option<PathBuf>,
    /// Simulate this cohort first and analyze its logs.
    #[serde(default)]
    pub simulate: Option<CohortSpec>,
    /// Required by `run`; stage subcommands take their outputs from flags.
    #[serde(default)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cleaning: CleaningConfig,
    /// Include error trials in mean RT / gRT.
    #[serde(default)]
    pub include_errors: bool,
    /// Empty means every pair of measures in the endpoint table.
    #[serde(default)]
    pub pairings: Vec<Pairing>,
    #[serde(default)]
    pub prior: CorrelationPrior,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.cleaning.validate()?;
        self.trajectory.validate()?;
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::InvalidInput("output_dir is required".into()));
        }
        let mut paths: Vec<&Path> = self.logs.iter().map(PathBuf::as_path).collect();
        paths.extend(self.log_dir.as_deref());
        paths.extend(self.external_scores.as_deref());
        paths.push(&self.output_dir);
        let mut seen = std::collections::BTreeSet::new();
        for p in paths {
            if !seen.insert(p) {
                return Err(Error::InvalidInput(format!(
                    "path {} is referenced twice",
                    p.display()
                )));
            }
        }
        if self.simulate.is_some() && self.seed.is_none() {
            return Err(Error::InvalidInput("a seed is required to simulate".into()));
        }
        if self.simulate.is_none() && self.logs.is_empty() && self.log_dir.is_none() {
            return Err(Error::InvalidInput(
                "no logs, log_dir or simulate given".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// `.pxlog` files in a directory, sorted by name.
pub fn list_logs(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == LOG_EXTENSION) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Reads and validates every log, ordered by session id. Duplicate session ids are an error.
pub fn load_logs(paths: &[PathBuf]) -> Result<Vec<LogFile>> {
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        let f = read_logfile(p)?;
        validate(&f).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}: {m}", p.display())),
            other => other,
        })?;
        files.push(f);
    }
    sort_logs(files)
}

fn sort_logs(mut files: Vec<LogFile>) -> Result<Vec<LogFile>> {
    files.sort_by(|a, b| a.header.session.cmp(&b.header.session));
    if let Some(w) = files
        .windows(2)
        .find(|w| w[0].header.session == w[1].header.session)
    {
        return Err(Error::Validation(format!(
            "session {} appears twice",
            w[0].header.session
        )));
    }
    Ok(files)
}

/// Kept per-trial values of one (game, endpoint) after cleaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedSet {
    pub game: Game,
    pub kind: EndpointKind,
    pub sessions: Vec<SessionValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanOutput {
    pub reports: Vec<ExclusionReport>,
    pub kept: Vec<CleanedSet>,
}

impl CleanOutput {
    pub fn exclusions_csv(&self) -> Result<String> {
        report_csv(&self.reports)
    }
}

/// Cleans RT and (where the gaze channel exists) gRT for every speeded game.
pub fn clean_stage(
    files: &[LogFile],
    config: &CleaningConfig,
    include_errors: bool,
) -> Result<CleanOutput> {
    let mut reports = Vec::new();
    let mut kept = Vec::new();
    for game in Game::ALL.into_iter().filter(|g| g.is_forced_choice()) {
        let game_files: Vec<&LogFile> = files.iter().filter(|f| f.header.game == game).collect();
        if game_files.is_empty() {
            continue;
        }
        let measures = game_files
            .iter()
            .map(|f| trial_measures(f))
            .collect::<Result<Vec<_>>>()?;
        for kind in [EndpointKind::Rt, EndpointKind::Grt] {
            let mut sessions = Vec::new();
            for (f, m) in game_files.iter().zip(&measures) {
                if kind == EndpointKind::Grt && !f.header.gaze {
                    continue;
                }
                sessions.push(session_trial_values(f, m, kind, include_errors)?);
            }
            if sessions.is_empty() {
                continue;
            }
            let (survivors, report) =
                clean_sessions(&format!("{} {}", game.code(), kind), &sessions, config)?;
            reports.push(report);
            kept.push(CleanedSet {
                game,
                kind,
                sessions: survivors,
            });
        }
    }
    Ok(CleanOutput { reports, kept })
}

/// A participant-level outlier dropped from the endpoint table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub participant: String,
    pub session: String,
    pub measure: String,
    pub kind: EndpointKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointsOutput {
    pub table: EndpointTable,
    pub participant_outliers: Vec<DroppedRow>,
    pub rejected_external: Vec<String>,
}

/// Session means of the cleaned times, span thresholds, then the
/// participant-level filter per (measure, kind); external scores are appended unfiltered.
pub fn endpoints_stage(
    files: &[LogFile],
    clean: &CleanOutput,
    external_csv: Option<&[u8]>,
    participant_mad_ratio: f64,
) -> Result<EndpointsOutput> {
    let mut rows: Vec<EndpointRow> = Vec::new();
    for set in &clean.kept {
        rows.extend(
            set.sessions
                .iter()
                .filter_map(|s| summarize_session(set.game, set.kind, s)),
        );
    }
    for f in files
        .iter()
        .filter(|f| f.header.game == Game::RainbowRandom)
    {
        rows.push(rr_session_row(f)?.0);
    }
    let mut groups: BTreeMap<(String, EndpointKind), Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        groups
            .entry((r.measure.clone(), r.kind))
            .or_default()
            .push(i);
    }
    let mut drop = vec![false; rows.len()];
    for idx in groups.values() {
        let values: Vec<f64> = idx.iter().map(|&i| rows[i].value).collect();
        for (&i, keep) in idx
            .iter()
            .zip(participant_outlier_mask(&values, participant_mad_ratio))
        {
            drop[i] = !keep;
        }
    }
    let mut table = EndpointTable::default();
    let mut participant_outliers = Vec::new();
    for (r, d) in rows.into_iter().zip(drop) {
        if d {
            participant_outliers.push(DroppedRow {
                participant: r.participant,
                session: r.session,
                measure: r.measure,
                kind: r.kind,
                value: r.value,
            });
        } else {
            table.push(r)?;
        }
    }
    let mut rejected_external = Vec::new();
    if let Some(bytes) = external_csv {
        let ingest = ingest_external_scores(bytes)?;
        for r in ingest.rows {
            table.push(r)?;
        }
        rejected_external = ingest
            .rejected
            .into_iter()
            .map(|r| format!("line {}: {}", r.line, r.message))
            .collect();
    }
    table.sort();
    Ok(EndpointsOutput {
        table,
        participant_outliers,
        rejected_external,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub measure_a: String,
    pub measure_b: String,
    pub n: usize,
    pub r: f64,
    pub p: f64,
    pub bf10: f64,
    pub rmse: f64,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccRow {
    pub measure: String,
    pub kind: EndpointKind,
    pub n_subjects: usize,
    pub k_sessions: usize,
    pub icc: f64,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsOutput {
    pub correlations: Vec<CorrRow>,
    pub icc: Vec<IccRow>,
    /// Automatic pairings and ICC rows that could not be computed, with the reason.
    pub skipped: Vec<String>,
}

fn table_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub const CORR_HEADER: [&str; 9] = [
    "measure_a",
    "measure_b",
    "n",
    "r",
    "p",
    "bf10",
    "rmse",
    "slope",
    "intercept",
];
pub const ICC_HEADER: [&str; 7] = [
    "measure",
    "kind",
    "n_subjects",
    "k_sessions",
    "icc",
    "f",
    "p",
];

impl StatsOutput {
    pub fn correlations_csv(&self) -> Result<String> {
        table_csv(&self.correlations, &CORR_HEADER)
    }

    pub fn icc_csv(&self) -> Result<String> {
        table_csv(&self.icc, &ICC_HEADER)
    }
}

/// Correlations for each pairing (inner join on participant) and test-retest
/// ICC(2,1) over each participant's first two sessions of every measure.
/// Explicit pairings that cannot be computed abort; automatic ones are skipped.
pub fn stats_stage(
    table: &EndpointTable,
    pairings: &[Pairing],
    prior: CorrelationPrior,
) -> Result<StatsOutput> {
    let measures = table.measures();
    let explicit = !pairings.is_empty();
    let pairs: Vec<Pairing> = if explicit {
        pairings.to_vec()
    } else {
        let refs: Vec<MeasureRef> = measures
            .iter()
            .map(|(m, k)| MeasureRef {
                measure: m.clone(),
                kind: *k,
                form: None,
            })
            .collect();
        let mut v = Vec::new();
        for i in 0..refs.len() {
            for j in i + 1..refs.len() {
                v.push(Pairing {
                    a: refs[i].clone(),
                    b: refs[j].clone(),
                });
            }
        }
        v
    };
    let mut out = StatsOutput {
        correlations: vec![],
        icc: vec![],
        skipped: vec![],
    };
    for pair in &pairs {
        let (_, x, y) = pair_by_participant(
            &pair.a.participant_values(table),
            &pair.b.participant_values(table),
        );
        let res = if x.len() < 3 {
            Err(format!("{} paired participants (need 3)", x.len()))
        } else {
            correlate(&x, &y, prior).map_err(|e| match e {
                Error::Precondition(m) | Error::Numerical(m) => m,
                other => other.to_string(),
            })
        };
        match res {
            Ok(c) => out.correlations.push(CorrRow {
                measure_a: pair.a.to_string(),
                measure_b: pair.b.to_string(),
                n: c.n,
                r: c.r,
                p: c.p,
                bf10: c.bf10,
                rmse: c.rmse,
                slope: c.slope,
                intercept: c.intercept,
            }),
            Err(e) if !explicit => out.skipped.push(format!("{} vs {}: {e}", pair.a, pair.b)),
            Err(e) => {
                return Err(Error::Precondition(format!(
                    "pairing {} vs {}: {e}",
                    pair.a, pair.b
                )));
            }
        }
    }
    for (measure, kind) in &measures {
        let by = table.by_session(measure, *kind);
        let matrix: Vec<Vec<Option<f64>>> = by
            .values()
            .filter(|s| s.len() >= 2)
            .map(|s| s.values().take(2).map(|v| Some(*v)).collect())
            .collect();
        match icc_2_1(&matrix) {
            Ok(r) => out.icc.push(IccRow {
                measure: measure.clone(),
                kind: *kind,
                n_subjects: r.n,
                k_sessions: r.k,
                icc: r.icc,
                f: r.f,
                p: r.p,
            }),
            Err(e) => out.skipped.push(format!("ICC {measure}:{kind}: {e}")),
        }
    }
    Ok(out)
}

/// File name → contents of a bundle.
pub type Artifacts = BTreeMap<String, Vec<u8>>;

pub fn trajectory_artifacts(analysis: &TrajectoryAnalysis) -> Result<Artifacts> {
    let mut a = Artifacts::new();
    a.insert(
        "trajectory_features.csv".into(),
        analysis.features_csv()?.into_bytes(),
    );
    a.insert(
        "trajectory_embedding.csv".into(),
        analysis.embedding_csv()?.into_bytes(),
    );
    a.insert(
        "session_profiles.json".into(),
        analysis.profiles_json()?.into_bytes(),
    );
    a.insert(
        "confusion_matrix.csv".into(),
        analysis.identification.to_csv()?.into_bytes(),
    );
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub notes: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes the artifacts plus a manifest into `out_dir`. Files are staged in a
/// sibling directory and moved into place only when everything was written;
/// on failure nothing is left behind. An existing `out_dir` is replaced only
/// if it is empty or holds an earlier bundle.
pub fn write_bundle(
    out_dir: &Path,
    artifacts: &Artifacts,
    config_sha256: Option<String>,
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    notes: Vec<String>,
) -> Result<Manifest> {
    if out_dir.exists() {
        let empty = std::fs::read_dir(out_dir)
            .map_err(|e| Error::io(out_dir, e))?
            .next()
            .is_none();
        if !empty && !out_dir.join(MANIFEST).exists() {
            return Err(Error::InvalidInput(format!(
                "{} exists and is not a previous bundle; refusing to overwrite",
                out_dir.display()
            )));
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256,
        seed,
        inputs,
        outputs: artifacts
            .iter()
            .map(|(name, bytes)| FileDigest {
                file: name.clone(),
                sha256: sha256_hex(bytes),
            })
            .collect(),
        notes,
    };
    let mut staging = out_dir.as_os_str().to_owned();
    staging.push(".partial");
    let staging = PathBuf::from(staging);
    let result = (|| -> Result<()> {
        if staging.exists() {
            std::fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        for (name, bytes) in artifacts {
            let path = staging.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        std::fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        let mpath = staging.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&mpath, text).map_err(|e| Error::io(&mpath, e))?;
        if out_dir.exists() {
            std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        }
        std::fs::rename(&staging, out_dir).map_err(|e| Error::io(out_dir, e))?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(e);
    }
    Ok(manifest)
}

/// What a pipeline run produced, for callers that want more than the files.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub manifest: Manifest,
    pub clean: CleanOutput,
    pub endpoints: EndpointsOutput,
    pub stats: StatsOutput,
    pub trajectory: Option<TrajectoryAnalysis>,
    pub truth: Vec<GroundTruth>,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Runs every stage and writes the bundle. Stage errors carry the stage name;
/// nothing is written unless all stages succeed.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let mut artifacts = Artifacts::new();
    let mut inputs = Vec::new();
    let mut notes = Vec::new();

    let mut files = Vec::new();
    let mut truth = Vec::new();
    if let Some(spec) = &config.simulate {
        let seed = config.seed.expect("validated");
        let sims = simulate_cohort(spec, seed).map_err(|e| e.in_stage("simulate"))?;
        for s in sims {
            let name = format!("logs/{}.{LOG_EXTENSION}", s.truth.session);
            artifacts.insert(
                name,
                write_logfile(&s.log).map_err(|e| e.in_stage("simulate"))?,
            );
            let mut t = serde_json::to_string_pretty(&s.truth)?;
            t.push('\n');
            artifacts.insert(format!("truth/{}.json", s.truth.session), t.into_bytes());
            files.push(s.log);
            truth.push(s.truth);
        }
    }
    let mut paths = config.logs.clone();
    if let Some(dir) = &config.log_dir {
        paths.extend(list_logs(dir).map_err(|e| e.in_stage("validate"))?);
    }
    for p in &paths {
        inputs.push(FileDigest {
            file: p.display().to_string(),
            sha256: sha256_hex(&read_input(p).map_err(|e| e.in_stage("validate"))?),
        });
    }
    files.extend(load_logs(&paths).map_err(|e| e.in_stage("validate"))?);
    let files = sort_logs(files).map_err(|e| e.in_stage("validate"))?;

    let clean = clean_stage(&files, &config.cleaning, config.include_errors)
        .map_err(|e| e.in_stage("clean"))?;
    artifacts.insert(
        "exclusions.csv".into(),
        clean.exclusions_csv()?.into_bytes(),
    );

    let external = match &config.external_scores {
        Some(p) => {
            let bytes = read_input(p).map_err(|e| e.in_stage("endpoints"))?;
            inputs.push(FileDigest {
                file: p.display().to_string(),
                sha256: sha256_hex(&bytes),
            });
            Some(bytes)
        }
        None => None,
    };
    let endpoints = endpoints_stage(
        &files,
        &clean,
        external.as_deref(),
        config.cleaning.participant_mad_ratio,
    )
    .map_err(|e| e.in_stage("endpoints"))?;
    artifacts.insert(
        "endpoints.csv".into(),
        endpoints.table.to_csv()?.into_bytes(),
    );
    for d in &endpoints.participant_outliers {
        notes.push(format!(
            "participant-level outlier removed: {} {} {}:{} = {}",
            d.participant, d.session, d.measure, d.kind, d.value
        ));
    }
    notes.extend(
        endpoints
            .rejected_external
            .iter()
            .map(|r| format!("external score rejected: {r}")),
    );

    let stats = stats_stage(&endpoints.table, &config.pairings, config.prior)
        .map_err(|e| e.in_stage("stats"))?;
    artifacts.insert(
        "correlations.csv".into(),
        stats.correlations_csv()?.into_bytes(),
    );
    artifacts.insert("icc.csv".into(), stats.icc_csv()?.into_bytes());
    notes.extend(stats.skipped.iter().map(|s| format!("stats skipped: {s}")));

    let has_nk = files.iter().any(|f| f.header.game == Game::NetherKnight);
    let trajectory = if has_nk {
        let seed = config.seed.ok_or_else(|| {
            Error::InvalidInput("a seed is required for the trajectory stage".into())
                .in_stage("trajectory")
        })?;
        let analysis =
            analyze(&files, &config.trajectory, seed).map_err(|e| e.in_stage("trajectory"))?;
        artifacts.extend(trajectory_artifacts(&analysis)?);
        for (reason, n) in &analysis.rejected {
            notes.push(format!("trajectory trials dropped ({reason}): {n}"));
        }
        for s in &analysis.identification.tied_sessions {
            notes.push(format!("identification tie broken by player id: {s}"));
        }
        for p in &analysis.identification.self_inclusive {
            notes.push(format!(
                "identification average includes the session itself (single session): {p}"
            ));
        }
        Some(analysis)
    } else {
        notes.push("trajectory skipped: no Nether Knight sessions".into());
        None
    };

    let manifest = write_bundle(
        &config.output_dir,
        &artifacts,
        Some(config.hash()),
        config.seed,
        inputs,
        notes,
    )
    .map_err(|e| e.in_stage("report"))?;
    Ok(PipelineRun {
        manifest,
        clean,
        endpoints,
        stats,
        trajectory,
        truth,
    })
}

/// Bundles previously written stage outputs without recomputing anything.
/// Each file must be `.csv` or `.json` and parse as such; it keeps its file name.
pub fn assemble_report(parts: &[PathBuf], out_dir: &Path, seed: Option<u64>) -> Result<Manifest> {
    let mut artifacts = Artifacts::new();
    let mut inputs = Vec::new();
    for p in parts {
        let name = p
            .file_name()
            .and_then(|n| n.to_str())
            .filter(|n| n.ends_with(".csv") || n.ends_with(".json"))
            .filter(|n| *n != MANIFEST)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{}: expected a .csv or .json stage output",
                    p.display()
                ))
            })?
            .to_string();
        let bytes = read_input(p)?;
        if name.ends_with(".json") {
            serde_json::from_slice::<serde_json::Value>(&bytes)?;
        } else {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            for rec in r.records() {
                rec?;
            }
        }
        if artifacts.contains_key(&name) {
            return Err(Error::InvalidInput(format!("{name} given twice")));
        }
        inputs.push(FileDigest {
            file: p.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        artifacts.insert(name, bytes);
    }
    if artifacts.is_empty() {
        return Err(Error::InvalidInput(
            "report needs at least one stage output".into(),
        ));
    }
    write_bundle(out_dir, &artifacts, None, seed, inputs, vec![])
}
