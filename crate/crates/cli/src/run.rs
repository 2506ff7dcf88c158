use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::Path;

use anyhow::{Context, Result};
use jamsim_core::experiment::{fit_edge, summarize, write_dos_csv, write_fit_csv, Experiment, ExperimentConfig, FitRow};
use jamsim_core::sim::export::{write_attempts, write_samples};
use rayon::prelude::*;

pub fn load(config: &Path) -> Result<Experiment> {
    let cfg = ExperimentConfig::load(config).with_context(|| format!("config {}", config.display()))?;
    cfg.resolve().with_context(|| format!("config {}", config.display()))
}

pub fn fit_parallel(exp: &Experiment) -> Vec<FitRow> {
    (0..exp.graph.edge_count()).into_par_iter().map(|e| fit_edge(exp, e)).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

pub fn cmd_run(config: &Path, out: &Path) -> Result<bool> {
    let exp = load(config)?;
    let trace = exp.run()?;
    let fits = fit_parallel(&exp);
    let summary = summarize(&exp, &trace, &fits);

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    fs::write(out.join("config.json"), exp.config.to_json() + "\n")?;
    write_attempts(&trace, create(&out.join("attempts.csv"))?)?;
    write_samples(&trace, create(&out.join("samples.csv"))?)?;
    write_dos_csv(&exp, create(&out.join("dos.csv"))?)?;
    write_fit_csv(&fits, create(&out.join("fit.csv"))?)?;
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
    println!("nodes           {}", summary.nodes);
    println!("edges           {}", summary.edges);
    println!("events          {} ({} jammed)", summary.events, summary.jammed);
    println!("end time        {:.6}", summary.end_time);
    println!("T*              {}", opt(summary.t_star));
    println!("T* bound        {}", opt(summary.t_star_bound));
    println!("max gap         {:.6} (delta = {:.6})", summary.max_pairwise_gap, summary.delta);
    println!("in set          {}", summary.in_set);
    println!("all certified   {}", summary.all_certified);
    Ok(true)
}

pub fn cmd_fit(config: &Path, out: Option<&Path>) -> Result<bool> {
    let exp = load(config)?;
    let fits = fit_parallel(&exp);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            write_fit_csv(&fits, create(&dir.join("fit.csv"))?)?;
        }
        None => write_fit_csv(&fits, io::stdout().lock())?,
    }
    let uncertified = fits.iter().filter(|r| !r.certified).count();
    if uncertified > 0 {
        eprintln!("{uncertified} of {} links are not certified (alpha >= 1 or Phi beyond the horizon)", fits.len());
    }
    Ok(true)
}
