//! Run summaries and suite aggregates recomputed from the written files.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use goblend_core::metrics::ccc;
use goblend_core::{run_suite, SuiteConfig, SuiteOptions};

fn suite() -> SuiteConfig {
    serde_json::from_str(
        r#"{"synthetic":{"sessions":5},"experiments":[
            {"name":"random","agent":"random","iterations":60,"runs":3},
            {"name":"max_score","replacement":"score","iterations":300,"runs":3},
            {"name":"r_ac","replacement":"rac","iterations":300,"runs":2}]}"#,
    )
    .unwrap()
}

fn column(rows: &[HashMap<String, f64>], name: &str) -> Vec<f64> {
    rows.iter().map(|r| r[name]).collect()
}

fn read_rows(path: &Path) -> Vec<HashMap<String, f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.parse().unwrap())).collect()
        })
        .collect()
}

/// Lin's coefficient from its textbook definition.
fn lin(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let sxx = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / n;
    let syy = y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / n;
    let den = sxx + syy + (mx - my).powi(2);
    // identical constant series agree perfectly
    if den == 0.0 { 1.0 } else { 2.0 * sxy / den }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

#[test]
fn summaries_match_the_written_traces() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_suite(suite(), &SuiteOptions::default(), dir.path()).unwrap();
    assert_eq!(report.results.len(), 8);

    let mut per_experiment: HashMap<String, Vec<serde_json::Value>> = HashMap::new();
    for r in &report.results {
        let run = dir.path().join("runs").join(&r.experiment).join(r.run.to_string());
        let rows = read_rows(&run.join("best_trace.csv"));
        let result: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(run.join("result.json")).unwrap()).unwrap();
        let s = &result["summary"];
        let get = |k: &str| s[k].as_f64().unwrap();

        let h = column(&rows, "h_a");
        let t = column(&rows, "t_a");
        let c = column(&rows, "c_a");
        let sigma = column(&rows, "sigma");
        let score = column(&rows, "score");
        let inside: Vec<f64> =
            h.iter().zip(&t).zip(&c).map(|((h, t), c)| if (h - t).abs() < *c { 1.0 } else { -1.0 }).collect();

        assert_eq!(get("final_score"), *score.last().unwrap());
        assert_eq!(get("final_score"), result["best"]["r_b"].as_f64().unwrap());
        assert_eq!(rows.len(), result["best"]["length"].as_u64().unwrap() as usize);
        assert!(close(get("behavior_ccc"), lin(&score, &column(&rows, "target_score"))));
        assert!(close(get("mean_arousal"), mean(&h)));
        assert!(close(get("arousal_ccc"), lin(&h, &t)));
        assert!(close(get("arousal_deviation"), mean(&sigma)));
        assert!(close(get("confidence"), mean(&inside)));
        assert!(close(get("offroad_pct"), 100.0 * mean(&column(&rows, "offroad"))));
        assert!(close(get("avg_speed"), mean(&column(&rows, "speed"))));
        if r.experiment == "random" {
            assert!(s["fill_pct"].is_null());
        } else {
            let lines = fs::read_to_string(run.join("archive.jsonl")).unwrap().lines().count();
            assert!(close(get("fill_pct"), 100.0 * lines as f64 / 3648.0));
        }
        per_experiment.entry(r.experiment.clone()).or_default().push(result);
    }

    // summary.csv: mean and 1.96 * sample sd / sqrt(n) per column
    let mut reader = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let results = &per_experiment[&rec[0]];
        assert_eq!(rec[1].parse::<usize>().unwrap(), results.len());
        for (i, name) in header.iter().enumerate().skip(2).step_by(2) {
            let values: Vec<f64> = results.iter().filter_map(|r| r["summary"][name].as_f64()).collect();
            if values.is_empty() {
                assert_eq!((&rec[i], &rec[i + 1]), ("NA", "NA"));
                continue;
            }
            let m = mean(&values);
            let n = values.len() as f64;
            let sd = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!(close(rec[i].parse().unwrap(), m), "{name}");
            assert!(close(rec[i + 1].parse().unwrap(), 1.96 * sd / n.sqrt()), "{name}_ci");
        }
    }
}

#[test]
fn ccc_known_values() {
    let x = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(ccc(&x, &x).unwrap(), 1.0);
    let neg: Vec<f64> = x.iter().map(|v| 5.0 - v).collect();
    assert!((ccc(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    // mean shift of one: 2 * 1.25 / (1.25 + 1.25 + 1)
    let shifted: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
    assert!((ccc(&x, &shifted).unwrap() - 2.5 / 3.5).abs() < 1e-15);
    assert_eq!(ccc(&[0.3, 0.3], &[0.3, 0.3]).unwrap(), 1.0);
    assert_eq!(ccc(&[0.3, 0.3], &[0.5, 0.5]).unwrap(), 0.0);
    assert!(ccc(&[1.0], &[1.0]).is_err());
    assert!(ccc(&[1.0, 2.0], &[1.0]).is_err());
}
