//! Config, manifest, and output plumbing shared with the `lifshitz`
//! binary: energy-grid parsing, the run manifest, and the CSV writers.
//!
//! CSV reals use shortest round-trip decimal formatting, switching to
//! scientific notation outside [1e-4, 1e16) so deep-tail values stay
//! readable; parsing the text back recovers the exact f64 either way.

use crate::bounds::{finite_lower_coeff, lower_bound_ids, upper_bound_ids, BoundsCurve};
use crate::error::{Error, Result};
use crate::experiments::{DosEstimate, ExperimentConfig, RunLengthReport, SandwichReport};
use crate::spectral::SpectrumSlice;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// Parses an energy grid: either a comma list ("0.1,0.2,0.3", sorted and
/// deduplicated) or a geometric grid "lo:hi:n" with both endpoints
/// included, eps_i = lo * (hi/lo)^(i/(n-1)).
pub fn parse_eps_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::invalid("empty energy grid"));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!(
                "geometric grid must be lo:hi:n, got {text:?}"
            )));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid endpoint {:?}", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid endpoint {:?}", parts[1])))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid count {:?}", parts[2])))?;
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid("grid endpoints must be positive finite"));
        }
        if n == 0 {
            return Err(Error::invalid("grid needs at least one point"));
        }
        if n == 1 {
            if lo != hi {
                return Err(Error::invalid("a 1-point grid needs lo = hi"));
            }
            return Ok(vec![lo]);
        }
        if !(hi > lo) {
            return Err(Error::invalid(format!(
                "geometric grid needs hi > lo, got {lo}:{hi}"
            )));
        }
        let ratio = hi / lo;
        let mut grid: Vec<f64> = (0..n)
            .map(|i| lo * ratio.powf(i as f64 / (n - 1) as f64))
            .collect();
        grid[0] = lo;
        grid[n - 1] = hi;
        Ok(grid)
    } else {
        let mut grid = Vec::new();
        for piece in text.split(',') {
            let v: f64 = piece
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad energy {piece:?}")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "energies must be positive finite, got {v}"
                )));
            }
            grid.push(v);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }
}

/// Shortest round-trip decimal for CSV cells; scientific notation outside
/// [1e-4, 1e16) keeps tail values legible.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Provenance record emitted next to every run's data. Feeding a manifest
/// file back through --config reproduces the data bytes exactly; only the
/// timestamp fields differ between runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config,
            outputs: Vec::new(),
            wall_time_secs: 0.0,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Reads an [`ExperimentConfig`] from JSON text that is either a bare
/// config object or a run manifest (the object under its "config" key).
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::invalid(format!("config is not valid JSON: {e}")))?;
    let obj = match v.get("config") {
        Some(inner) => inner.clone(),
        None => v,
    };
    let cfg: ExperimentConfig = serde_json::from_value(obj)
        .map_err(|e| Error::invalid(format!("config does not match the schema: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// [`parse_experiment_config`] over a file path.
pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_experiment_config(&text)
}

/// The pinned `simulate` schema. `finite_lower` is the finite-volume
/// lower coefficient evaluated at the run's mean longest zero run.
pub const SIMULATE_CSV_HEADER: &str =
    "epsilon,mean_ids,stderr,total_count,lower_bound,upper_bound,finite_lower,realizations,L,p,b,C,seed";

pub fn simulate_csv(est: &DosEstimate) -> String {
    let cfg = &est.config;
    let p = cfg.model.p;
    let b = cfg.model.b;
    let mut out = String::from(SIMULATE_CSV_HEADER);
    out.push('\n');
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let (lo, up, fin) = if p < 1.0 {
            (
                lower_bound_ids(eps, p),
                upper_bound_ids(eps, p, b, cfg.c_corr),
                finite_lower_coeff(eps, p, est.mean_ell0),
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(eps),
            fmt_f64(est.mean_ids[i]),
            fmt_f64(est.stderr[i]),
            est.total_counts[i],
            fmt_f64(lo),
            fmt_f64(up),
            fmt_f64(fin),
            cfg.realizations,
            cfg.model.sites,
            fmt_f64(p),
            fmt_f64(b),
            fmt_f64(cfg.c_corr),
            cfg.seed
        );
    }
    out
}

pub fn bounds_csv(curve: &BoundsCurve) -> String {
    let mut out = String::from("epsilon,lower_bound,upper_bound,finite_lower,underflow\n");
    for row in &curve.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(row.epsilon),
            fmt_f64(row.lower_bound),
            fmt_f64(row.upper_bound),
            fmt_f64(row.finite_lower),
            row.underflow
        );
    }
    out
}

pub fn spectrum_csv(slice: &SpectrumSlice) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, ev) in slice.eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, fmt_f64(*ev));
    }
    out
}

pub fn intervals_csv(report: &RunLengthReport) -> String {
    let mut out = String::from("y,threshold,limit_probability,raw_empirical,smoothed_empirical\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(row.y),
            fmt_f64(row.threshold),
            fmt_f64(row.limit_probability),
            fmt_f64(row.raw_empirical),
            fmt_f64(row.smoothed_empirical)
        );
    }
    out
}

pub fn sandwich_csv(report: &SandwichReport) -> String {
    let mut out = String::from("epsilon,mean_ids,stderr,lower_bound,upper_bound,lower_ok,upper_ok\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(row.epsilon),
            fmt_f64(row.mean_ids),
            fmt_f64(row.stderr),
            fmt_f64(row.lower_bound),
            fmt_f64(row.upper_bound),
            row.lower_ok,
            row.upper_ok
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{estimate_dos, Ensemble};
    use crate::model::ModelParams;

    #[test]
    fn comma_grids_sort_and_dedup() {
        let g = parse_eps_grid("0.3, 0.1,0.2,0.2 ").unwrap();
        assert_eq!(g, vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_eps_grid("1.5").unwrap(), vec![1.5]);
        assert!(parse_eps_grid("a,b").is_err());
        assert!(parse_eps_grid("0.1,-0.2").is_err());
        assert!(parse_eps_grid("0.1,0").is_err());
        assert!(parse_eps_grid("").is_err());
    }

    #[test]
    fn geometric_grids_hit_both_endpoints() {
        let g = parse_eps_grid("0.05:0.5:6").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[5], 0.5);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // Constant ratio between neighbours.
        let r0 = g[1] / g[0];
        for w in g.windows(2) {
            assert!((w[1] / w[0] / r0 - 1.0).abs() < 1e-12);
        }
        assert_eq!(parse_eps_grid("0.1:0.1:1").unwrap(), vec![0.1]);
        assert!(parse_eps_grid("0.5:0.1:4").is_err());
        assert!(parse_eps_grid("0:1:4").is_err());
        assert!(parse_eps_grid("0.1:1:0").is_err());
        assert!(parse_eps_grid("0.1:1").is_err());
        assert!(parse_eps_grid("0.1:1:4:9").is_err());
    }

    #[test]
    fn formatted_reals_parse_back_exactly() {
        let samples = [
            0.1,
            1.0 / 3.0,
            5.114520884631678e-4,
            1.913482458258863,
            2.2e-308,
            1.7e300,
            123456.75,
            -0.25,
            f64::MIN_POSITIVE,
        ];
        for &x in &samples {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s}");
        }
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "0");
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelParams::new(500, 0.5, 1.0).unwrap(),
            epsilons: vec![0.25, 0.5],
            realizations: 4,
            seed: 9,
            ensemble: Ensemble::FixedL,
            n: None,
            c_corr: 0.0,
            oracle_limit: 5000,
        }
    }

    #[test]
    fn simulate_csv_has_the_pinned_schema() {
        let est = estimate_dos(&small_config(), Some(1)).unwrap();
        let csv = simulate_csv(&est);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SIMULATE_CSV_HEADER);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            assert_eq!(cells.len(), 13);
            assert_eq!(cells[7], "4", "realizations column");
            assert_eq!(cells[8], "500", "L column");
            assert_eq!(cells[12], "9", "seed column");
            let _: f64 = cells[0].parse().unwrap();
            let _: u64 = cells[3].parse().unwrap();
        }
    }

    #[test]
    fn config_loads_bare_or_wrapped_in_a_manifest() {
        let cfg = small_config();
        let bare = serde_json::to_string(&cfg).unwrap();
        let from_bare = parse_experiment_config(&bare).unwrap();
        assert_eq!(from_bare.model.sites, 500);
        assert_eq!(from_bare.seed, 9);
        assert_eq!(from_bare.epsilons, cfg.epsilons);

        let manifest = RunManifest::new("simulate", serde_json::to_value(&cfg).unwrap());
        let wrapped = serde_json::to_string(&manifest).unwrap();
        let from_manifest = parse_experiment_config(&wrapped).unwrap();
        assert_eq!(from_manifest.model.sites, 500);
        assert_eq!(from_manifest.epsilons, cfg.epsilons);

        assert!(parse_experiment_config("{not json").is_err());
        assert!(parse_experiment_config("{\"L\": 10}").is_err());
    }

    #[test]
    fn config_json_uses_the_documented_field_names() {
        let cfg = small_config();
        let v = serde_json::to_value(&cfg).unwrap();
        for key in ["L", "p", "b", "epsilons", "realizations", "seed", "ensemble", "C"] {
            assert!(v.get(key).is_some(), "missing {key} in {v}");
        }
        assert_eq!(v["L"], 500);
        assert_eq!(v["ensemble"], "fixed-l");
        // Defaults may be omitted on input.
        let minimal = r#"{"L": 40, "p": 0.5, "b": 1.0,
            "epsilons": [0.5], "realizations": 2, "seed": 1}"#;
        let cfg = parse_experiment_config(minimal).unwrap();
        assert_eq!(cfg.ensemble, Ensemble::FixedL);
        assert_eq!(cfg.c_corr, 0.0);
        assert_eq!(cfg.oracle_limit, 5000);
    }

    #[test]
    fn writers_emit_parseable_tables() {
        let curve = BoundsCurve::compute(&[0.1, 0.2], 0.5, 1.0, 1.0, f64::INFINITY).unwrap();
        let csv = bounds_csv(&curve);
        assert!(csv.starts_with("epsilon,lower_bound,upper_bound,finite_lower,underflow\n"));
        assert_eq!(csv.lines().count(), 3);
        for row in csv.lines().skip(1) {
            assert_eq!(row.split(',').count(), 5);
        }

        let slice = crate::spectral::SpectrumSlice {
            eigenvalues: vec![0.5, 2.0],
            tolerance: 1e-10,
            method: crate::spectral::SliceMethod::Bisection,
        };
        let csv = spectrum_csv(&slice);
        assert_eq!(csv, "index,eigenvalue\n1,0.5\n2,2\n");
    }
}
