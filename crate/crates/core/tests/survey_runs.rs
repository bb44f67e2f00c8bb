mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::data_dir;
use vls_core::survey::{
    parse_survey, run_survey, run_survey_into, OutputWriter, SeedPolicy, SimulationHandle,
};

/// A short variant of the bundled TLS tree survey.
fn short_tls(dir: &Path, sweep_deg: f64) -> PathBuf {
    let data = data_dir();
    let path = dir.join("tls_short.xml");
    fs::write(
        &path,
        format!(
            r#"<document>
  <survey name="tls_short" scene="{d}/scenes.xml#tls_tree" platform="{d}/platforms.xml#tripod" scanner="{d}/scanners.xml#tls">
    <FWFSettings binWidth_ns="0.25" maxFullwaveRange_ns="100"/>
    <leg>
      <platformSettings x="0" y="0" z="0"/>
      <scannerSettings headRotatePerSec_deg="20" headRotateStart_deg="-{s}" headRotateStop_deg="{s}"/>
    </leg>
  </survey>
</document>"#,
            d = data.display(),
            s = sweep_deg / 2.0
        ),
    )
    .unwrap();
    path
}

fn write_run(survey: &Path, root: &Path, policy: &SeedPolicy) {
    let mut s = parse_survey(survey).unwrap();
    s.outputs.write_waveform = true;
    let mut w = OutputWriter::create(root, &s.name, s.outputs).unwrap();
    run_survey_into(&s, policy, &mut w).unwrap();
    w.finish().unwrap();
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let survey = short_tls(dir.path(), 2.0);
    let policy = SeedPolicy::new(Some("42".into()), 1, true);
    write_run(&survey, &dir.path().join("a"), &policy);
    write_run(&survey, &dir.path().join("b"), &policy);
    for f in ["points.xyz", "fullwave.txt", "trajectory.txt"] {
        let a = fs::read(dir.path().join("a/tls_short").join(f)).unwrap();
        let b = fs::read(dir.path().join("b/tls_short").join(f)).unwrap();
        assert!(!a.is_empty());
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn vegetation_returns_come_from_crown() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_survey(&short_tls(dir.path(), 4.0)).unwrap();
    let out = run_survey(&s, &SeedPolicy::deterministic("7")).unwrap();
    let crown = out.points.iter().filter(|p| p.classification == 5).count();
    assert!(crown > 100, "only {crown} crown returns");
    for p in out.points.iter().filter(|p| p.classification == 5) {
        // crown voxels span x -4..4, y 6..14, z 2..10; the beam footprint is a few mm
        assert!(p.position.x.abs() < 4.1 && (5.9..14.1).contains(&p.position.y));
        assert!((1.9..10.1).contains(&p.position.z));
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_survey(&short_tls(dir.path(), 1.0)).unwrap();
    let one = run_survey(&s, &SeedPolicy::new(Some("9".into()), 1, false)).unwrap();
    let three = run_survey(&s, &SeedPolicy::new(Some("9".into()), 3, false)).unwrap();
    assert_eq!(three.report.workers, 3);
    assert_eq!(one.points, three.points);
}

#[test]
fn airborne_points_lie_on_terrain() {
    let dir = tempfile::tempdir().unwrap();
    let d = data_dir();
    let path = dir.path().join("hover.xml");
    fs::write(dir.path().join("hover_platform.xml"), r#"<document><platform id="hover" type="static"/></document>"#).unwrap();
    fs::write(
        &path,
        format!(
            r#"<document>
  <survey name="hover" scene="{d}/scenes.xml#als_terrain" platform="hover_platform.xml#hover" scanner="{d}/scanners.xml#als" seed="3">
    <FWFSettings binWidth_ns="0.25" maxFullwaveRange_ns="150"/>
    <leg><platformSettings x="-30" y="10" z="60"/><scannerSettings duration_s="0.04"/></leg>
  </survey>
</document>"#,
            d = d.display()
        ),
    )
    .unwrap();
    let s = parse_survey(&path).unwrap();
    let out = run_survey(&s, &SeedPolicy::deterministic("3")).unwrap();
    assert_eq!(out.report.pulses, 1000);
    assert!(out.points.len() >= 990);
    for p in &out.points {
        let ground = s.scene.ground_height(p.position.x, p.position.y).unwrap();
        // range noise is 2 cm; slope across the footprint adds a few more
        assert!((p.position.z - ground).abs() < 0.15, "{} vs {ground}", p.position.z);
        assert_eq!(p.classification, 2);
    }
}

#[test]
fn callback_fires_every_n_pulses() {
    let dir = tempfile::tempdir().unwrap();
    let d = data_dir();
    let path = dir.path().join("cb.xml");
    fs::write(dir.path().join("p.xml"), r#"<document><platform id="hover" type="static"/></document>"#).unwrap();
    fs::write(
        &path,
        format!(
            r#"<document>
  <survey name="cb" scene="{d}/scenes.xml#als_terrain" platform="p.xml#hover" scanner="{d}/scanners.xml#als" seed="1">
    <leg><platformSettings x="0" y="0" z="40"/><scannerSettings duration_s="0.04"/></leg>
  </survey>
</document>"#,
            d = d.display()
        ),
    )
    .unwrap();
    let h = SimulationHandle::open(&path).unwrap();
    let mut calls = 0;
    let mut delivered = 0;
    let result = h
        .run_with_callback(100, |batch| {
            calls += 1;
            delivered += batch.len();
            Ok::<(), String>(())
        })
        .unwrap();
    assert_eq!(result.report.pulses, 1000);
    assert_eq!(calls, 10);
    assert_eq!(delivered, result.points.len());

    // the array view equals the rows written to the ASCII file
    let mut s = h.survey();
    s.outputs = Default::default();
    let mut w = OutputWriter::create(dir.path(), &s.name, s.outputs).unwrap();
    run_survey_into(&s, &h.seed_policy(), &mut w).unwrap();
    let paths = w.finish().unwrap();
    let text = fs::read_to_string(paths.points).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    let array = result.points_array();
    assert_eq!(rows.len(), array.len());
    for (row, arr) in rows.iter().zip(&array) {
        for (a, b) in row.iter().zip(arr) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}
