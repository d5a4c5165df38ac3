mod common;

use std::path::Path;

use cogplay::endpoints::EndpointKind;
use cogplay::logmodel::save_logfile;
use cogplay::pipeline::{
    assemble_report, run_pipeline, sha256_hex, Manifest, MeasureRef, Pairing, PipelineConfig,
    MANIFEST,
};
use cogplay::synthplayer::{
    simulate_cohort, AgentParams, CohortSpec, PlayerSpec, SimulatedSession,
};
use cogplay::taskengine::Game;
use cogplay::Error;

fn players(n: usize) -> Vec<PlayerSpec> {
    (0..n)
        .map(|i| PlayerSpec {
            id: format!("p{i:02}"),
            sessions: 2,
            params: AgentParams {
                latency_mu: (600.0 + 80.0 * i as f64).ln(),
                span_theta: 4.0 + 0.4 * i as f64,
                ..AgentParams::default()
            },
        })
        .collect()
}

fn write_logs(dir: &Path, sims: &[SimulatedSession]) {
    std::fs::create_dir_all(dir).unwrap();
    for s in sims {
        save_logfile(&dir.join(format!("{}.pxlog", s.truth.session)), &s.log).unwrap();
    }
}

fn nk_rt(kind: EndpointKind) -> MeasureRef {
    MeasureRef {
        measure: "NK".into(),
        kind,
        form: None,
    }
}

fn config(out: &Path) -> PipelineConfig {
    PipelineConfig {
        output_dir: out.to_path_buf(),
        seed: Some(1),
        ..PipelineConfig::from_json("{}").unwrap()
    }
}

/// External task scores that track each player's planted latency.
fn external_csv(n: usize) -> String {
    let mut s = String::from("participant,task,form,kind,value\n");
    for i in 0..n {
        s += &format!(
            "p{i:02},Flanker,A,RT,{:.3}\n",
            0.45 + 0.04 * i as f64 + 0.01 * ((i * 7) % 3) as f64
        );
    }
    s += "p99,Flanker,A,RT,\n";
    s
}

fn read_manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(dir.join(MANIFEST)).unwrap()).unwrap()
}

#[test]
fn logs_on_disk_to_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 10;
    let spec = CohortSpec {
        games: vec![Game::NetherKnight, Game::RainbowRandom],
        players: players(n),
    };
    let sims = simulate_cohort(&spec, 21).unwrap();
    let logs = tmp.path().join("logs");
    write_logs(&logs, &sims);
    let ext = tmp.path().join("external.csv");
    std::fs::write(&ext, external_csv(n)).unwrap();
    let out = tmp.path().join("bundle");
    let cfg = PipelineConfig {
        log_dir: Some(logs),
        external_scores: Some(ext),
        pairings: vec![Pairing {
            a: nk_rt(EndpointKind::Rt),
            b: MeasureRef {
                measure: "Flanker".into(),
                kind: EndpointKind::Rt,
                form: Some("A".into()),
            },
        }],
        ..config(&out)
    };
    let run = run_pipeline(&cfg).unwrap();

    for f in [
        "exclusions.csv",
        "endpoints.csv",
        "correlations.csv",
        "icc.csv",
        "confusion_matrix.csv",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let manifest = read_manifest(&out);
    assert_eq!(manifest, run.manifest);
    assert_eq!(manifest.inputs.len(), sims.len() + 1);
    for d in &manifest.outputs {
        assert_eq!(
            sha256_hex(&std::fs::read(out.join(&d.file)).unwrap()),
            d.sha256,
            "{}",
            d.file
        );
    }
    assert!(manifest
        .notes
        .iter()
        .any(|n| n.contains("external score rejected")));

    let corr = &run.stats.correlations;
    assert_eq!(corr.len(), 1);
    assert_eq!(corr[0].n, n);
    assert!(corr[0].r > 0.8, "r = {}", corr[0].r);
    // theta and both time endpoints get a test-retest row
    let icc_measures: Vec<String> = run
        .stats
        .icc
        .iter()
        .map(|r| format!("{}:{}", r.measure, r.kind))
        .collect();
    for m in ["NK:RT", "NK:gRT", "RR:theta"] {
        assert!(
            icc_measures.iter().any(|x| x == m),
            "{m} missing from {icc_measures:?}"
        );
    }
}

#[test]
fn missing_log_is_an_io_error_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let cfg = PipelineConfig {
        logs: vec![tmp.path().join("absent.pxlog")],
        ..config(&out)
    };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(
        matches!(
            &err,
            Error::Stage {
                stage: "validate",
                ..
            }
        ),
        "{err}"
    );
    assert!(err.to_string().contains("absent.pxlog"));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn impossible_pairing_fails_in_stats_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let cfg = PipelineConfig {
        simulate: Some(CohortSpec {
            games: vec![Game::BarnyardBlast],
            players: players(4),
        }),
        pairings: vec![Pairing {
            a: nk_rt(EndpointKind::Rt),
            b: nk_rt(EndpointKind::Grt),
        }],
        ..config(&out)
    };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(matches!(&err, Error::Stage { stage: "stats", .. }), "{err}");
    assert!(!out.exists());
    assert_eq!(
        std::fs::read_dir(tmp.path()).unwrap().count(),
        0,
        "no partial output left"
    );
}

#[test]
fn refuses_to_overwrite_a_foreign_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("notes.txt"), "keep me").unwrap();
    let cfg = PipelineConfig {
        simulate: Some(CohortSpec {
            games: vec![Game::DoorDecipher],
            players: players(3),
        }),
        ..config(&out)
    };
    assert!(run_pipeline(&cfg).is_err());
    assert_eq!(
        std::fs::read_to_string(out.join("notes.txt")).unwrap(),
        "keep me"
    );

    std::fs::remove_file(out.join("notes.txt")).unwrap();
    run_pipeline(&cfg).unwrap();
    // a previous bundle may be replaced
    run_pipeline(&cfg).unwrap();
    assert!(out.join("logs").join("p00-DD-s1.pxlog").is_file());
}

#[test]
fn report_rebundles_stage_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let cfg = PipelineConfig {
        simulate: Some(CohortSpec {
            games: vec![Game::BarnyardBlast],
            players: players(5),
        }),
        ..config(&out)
    };
    run_pipeline(&cfg).unwrap();
    let parts: Vec<_> = ["endpoints.csv", "icc.csv", "correlations.csv"]
        .iter()
        .map(|f| out.join(f))
        .collect();
    let rep = tmp.path().join("report");
    let m = assemble_report(&parts, &rep, Some(5)).unwrap();
    assert_eq!(m.outputs.len(), 3);
    assert_eq!(
        std::fs::read(rep.join("icc.csv")).unwrap(),
        std::fs::read(out.join("icc.csv")).unwrap()
    );

    let twice = [parts[0].clone(), parts[0].clone()];
    assert!(assemble_report(&twice, &tmp.path().join("r2"), None).is_err());
    assert!(assemble_report(&[out.join(MANIFEST)], &tmp.path().join("r3"), None).is_err());
}

#[test]
fn seed_changes_the_simulated_cohort() {
    let tmp = tempfile::tempdir().unwrap();
    let base = PipelineConfig {
        simulate: Some(CohortSpec {
            games: vec![Game::NetherKnight],
            players: common::style_mix_players(1),
        }),
        ..config(&tmp.path().join("a"))
    };
    let a = run_pipeline(&base).unwrap();
    let b = run_pipeline(&PipelineConfig {
        seed: Some(2),
        output_dir: tmp.path().join("b"),
        ..base
    })
    .unwrap();
    let endpoints = |run: &cogplay::pipeline::PipelineRun| run.endpoints.table.to_csv().unwrap();
    assert_ne!(endpoints(&a), endpoints(&b));
}
