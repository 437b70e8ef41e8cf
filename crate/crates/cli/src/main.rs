//! `cadkit <pipeline> --config <file> [--out dir] [overrides]`
//!
//! Exit codes: 0 every check passed, 2 a check failed, 1 error.

mod config;
mod pipelines;
mod report;

use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

fn usage() -> String {
    "usage: cadkit <pipeline> --config <file> [--out <dir>] \
     [--pitch H] [--walks N] [--seed S] [--q Q] [--c0 C] [--epsilon M] [--depth D]\n\
     pipelines: classify | ainfty_to_nta | kp_appendix"
        .to_string()
}

type Parsed = (String, PathBuf, Option<PathBuf>, Vec<(String, String)>);

fn parse_args(args: &[String]) -> Result<Parsed, String> {
    if args.is_empty() {
        return Err(usage());
    }
    let pipeline = args[0].clone();
    let mut config = None;
    let mut out = None;
    let mut overrides = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let value = args
            .get(i + 1)
            .ok_or_else(|| format!("missing value for {flag}\n{}", usage()))?
            .clone();
        match flag {
            "--config" => config = Some(PathBuf::from(&value)),
            "--out" => out = Some(PathBuf::from(&value)),
            "--pitch" | "--walks" | "--seed" | "--q" | "--c0" | "--epsilon" | "--depth" => {
                overrides.push((flag[2..].to_string(), value));
            }
            other => return Err(format!("unknown flag {other}\n{}", usage())),
        }
        i += 2;
    }
    let config = config.ok_or_else(|| format!("--config is required\n{}", usage()))?;
    Ok((pipeline, config, out, overrides))
}

fn apply_overrides(cfg: &mut Config, overrides: &[(String, String)]) -> Result<(), String> {
    for (k, v) in overrides {
        match k.as_str() {
            "pitch" => cfg.pitch = v.parse().map_err(|e| format!("--pitch: {e}"))?,
            "walks" => cfg.walks = v.parse().map_err(|e| format!("--walks: {e}"))?,
            "seed" => cfg.seed = v.parse().map_err(|e| format!("--seed: {e}"))?,
            "q" => cfg.params.q = v.parse().map_err(|e| format!("--q: {e}"))?,
            "c0" => cfg.params.c0 = v.parse().map_err(|e| format!("--c0: {e}"))?,
            "epsilon" => cfg.params.epsilon = v.parse().map_err(|e| format!("--epsilon: {e}"))?,
            "depth" => cfg.depth = v.parse().map_err(|e| format!("--depth: {e}"))?,
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (pipeline, config_path, out, overrides) = match parse_args(&args) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    let mut cfg = match Config::load(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    cfg.pipeline = pipeline;
    if let Err(msg) = apply_overrides(&mut cfg, &overrides) {
        eprintln!("{msg}");
        return ExitCode::from(1);
    }
    let out_dir = out.or_else(|| cfg.out_dir.as_ref().map(PathBuf::from));
    let report = match pipelines::run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for r in &report.records {
        println!(
            "[{}] {} {}: value {:.6e} (tolerance {:.3e}, {} ms)",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.anchor,
            r.value,
            r.tolerance,
            r.runtime_ms
        );
    }
    if let Some(dir) = out_dir {
        match report.emit(&dir, &["json", "csv", "svg"]) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error writing reports: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
