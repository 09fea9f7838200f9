use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{ExperimentConfig, StationaryReport, SweepPoint, SweepResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: String,
    pub config_hash: String,
}

/// Index of every file an invocation wrote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub first_seed: u64,
    pub last_seed: u64,
    pub files: Vec<ManifestEntry>,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| Error::Io { path, source })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn provenance(hash: &str, first_seed: u64, last_seed: u64) -> String {
    format!("# config_hash={hash}\n# seeds={first_seed}..={last_seed}\n")
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn point_trace_csv(p: &SweepPoint) -> String {
    let mut s = provenance(&p.config_hash, p.first_seed, p.last_seed);
    let _ = writeln!(s, "# realizations={} window_slots={}", p.realizations.len(), p.window_slots);
    s.push_str("t,mean_sum_rate,std_error\n");
    for (t, (m, se)) in p.mean_trace.iter().zip(&p.trace_std_error).enumerate() {
        let _ = writeln!(s, "{},{},{}", t + 1, m, se);
    }
    s
}

fn point_realizations_csv(p: &SweepPoint) -> String {
    let mut s = provenance(&p.config_hash, p.first_seed, p.last_seed);
    let _ = writeln!(s, "# window_slots={}", p.window_slots);
    s.push_str("realization,seed,topology_seed,final_window_mean,phi_star,optimal_occupancy,final_profile\n");
    for r in &p.realizations {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.index,
            r.seed,
            r.topology_seed,
            r.final_window_mean,
            opt(r.phi_star),
            opt(r.optimal_occupancy),
            r.final_profile
        );
    }
    s
}

fn summary_csv(result: &SweepResult) -> String {
    let (first, last) = result
        .points
        .first()
        .map_or((0, 0), |p| (p.first_seed, p.last_seed));
    let mut s = provenance(&result.base_hash, first, last);
    s.push_str(
        "point,config_hash,realizations,window_slots,final_mean,final_std_error,\
         phi_star_mean,occupancy_mean,occupancy_std_error\n",
    );
    for p in &result.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            p.label,
            p.config_hash,
            p.realizations.len(),
            p.window_slots,
            p.final_mean,
            p.final_std_error,
            opt(p.phi_star_mean),
            opt(p.occupancy_mean),
            opt(p.occupancy_std_error)
        );
    }
    s
}

/// Writes one trace and one per-realization table per sweep point, the
/// leading trajectories, a summary table, the config and `manifest.json`.
pub fn write_sweep(result: &SweepResult, base: &ExperimentConfig, dir: &Path) -> Result<Manifest> {
    create_dir(dir)?;
    let mut files = Vec::new();
    let mut add = |name: String, kind: &str, hash: &str, contents: &str| -> Result<()> {
        write_file(dir, &name, contents)?;
        files.push(ManifestEntry {
            file: name,
            kind: kind.into(),
            config_hash: hash.into(),
        });
        Ok(())
    };
    add("config.toml".into(), "config", &result.base_hash, &base.to_toml()?)?;
    for p in &result.points {
        let stem = format!("{}_{}", sanitize(&result.name), sanitize(&p.label));
        add(format!("{stem}_trace.csv"), "trace", &p.config_hash, &point_trace_csv(p))?;
        add(
            format!("{stem}_realizations.csv"),
            "realizations",
            &p.config_hash,
            &point_realizations_csv(p),
        )?;
        for (k, csv) in &p.trajectories {
            let mut text = provenance(&p.config_hash, p.first_seed + *k as u64, p.first_seed + *k as u64);
            text.push_str(csv);
            add(format!("{stem}_trajectory_r{k}.csv"), "trajectory", &p.config_hash, &text)?;
        }
    }
    add(
        format!("{}_summary.csv", sanitize(&result.name)),
        "summary",
        &result.base_hash,
        &summary_csv(result),
    )?;
    let (first_seed, last_seed) = result
        .points
        .first()
        .map_or((0, 0), |p| (p.first_seed, p.last_seed));
    let manifest = Manifest {
        command: result.name.clone(),
        config_hash: result.base_hash.clone(),
        first_seed,
        last_seed,
        files,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    write_file(dir, "manifest.json", &(text + "\n"))
}

/// Writes the per-temperature distributions and a summary of the stability
/// verdict, plus `manifest.json`.
pub fn write_stationary_report(
    report: &StationaryReport,
    base: &ExperimentConfig,
    dir: &Path,
) -> Result<Manifest> {
    create_dir(dir)?;
    let hash = &report.config_hash;
    // The analysis is deterministic; the only seed is the layout's.
    let seeds = (base.topology_seed_for(0), base.topology_seed_for(0));

    let mut dist = provenance(hash, seeds.0, seeds.1);
    dist.push_str("# state index = mixed-radix code of active channels, lowest active UE least significant\n");
    dist.push_str("tau,state,profile,direct,gibbs,tree,optimal\n");
    for p in &report.points {
        for s in 0..report.num_states {
            let _ = writeln!(
                dist,
                "{},{},{},{},{},{},{}",
                p.tau,
                s,
                report.profiles[s],
                p.direct[s],
                p.gibbs[s],
                opt(p.tree.as_ref().map(|t| t[s])),
                u8::from(report.optimum.contains(&s))
            );
        }
    }

    let mut summary = provenance(hash, seeds.0, seeds.1);
    let join = |v: &[usize]| {
        v.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";")
    };
    let _ = writeln!(summary, "# optimum={} phi_star={}", join(&report.optimum), report.phi_star);
    let _ = writeln!(
        summary,
        "# stable={} verdict={}",
        report.stable.as_deref().map(join).unwrap_or_else(|| "none".into()),
        match report.verdict {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "none",
        }
    );
    for w in &report.warnings {
        let _ = writeln!(summary, "# warning: {w}");
    }
    summary.push_str("tau,direct_residual,max_diff_direct_gibbs,max_diff_direct_tree\n");
    for p in &report.points {
        let _ = writeln!(
            summary,
            "{},{},{},{}",
            p.tau,
            p.direct_residual,
            p.max_diff_direct_gibbs,
            opt(p.max_diff_direct_tree)
        );
    }

    let mut files = Vec::new();
    for (name, kind, text) in [
        ("config.toml", "config", base.to_toml()?),
        ("stationary_distributions.csv", "distributions", dist),
        ("stationary_summary.csv", "summary", summary),
    ] {
        write_file(dir, name, &text)?;
        files.push(ManifestEntry {
            file: name.into(),
            kind: kind.into(),
            config_hash: hash.clone(),
        });
    }
    let manifest = Manifest {
        command: "analyze-stationary".into(),
        config_hash: hash.clone(),
        first_seed: seeds.0,
        last_seed: seeds.1,
        files,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}
