//! Command-line front end: catalog verification, radius-quartic scans and
//! per-geodesic residual sampling.
//!
//! Exit codes: 0 = all expectations met, 1 = numerical mismatch,
//! 2 = usage error.

use biharm::catalog;
use biharm::helices;
use biharm::hypersurfaces;
use biharm::report::VerificationReport;
use biharm::{GeomError, RunConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "biharm", about = "Biharmonic geometry verification suite")]
struct Cli {
    /// Default directory for relative --out paths.
    #[arg(long, env = "BIHARM_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonOpts {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Finite-difference step.
    #[arg(long)]
    step: Option<f64>,
    /// Per-check tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Number of sampled geodesics.
    #[arg(long)]
    count: Option<usize>,
    /// Geodesic arc length.
    #[arg(long)]
    length: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a catalog case (or "all") against its expected verdicts.
    Verify {
        /// Case selector, e.g. "clifford-torus:1,1", or "all".
        selector: String,
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Scan the totally-biharmonic radius quartic over a mu grid.
    ScanQuartic {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        mu_min: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_max: f64,
        #[arg(long, default_value_t = 11)]
        mu_count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample intrinsic geodesics of a case and report biharmonicity
    /// residuals per geodesic.
    Geodesics {
        selector: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| "expected name=value".to_string())?;
    let v: f64 = value.parse().map_err(|e| format!("bad tolerance: {e}"))?;
    if v <= 0.0 {
        return Err("tolerance must be positive".into());
    }
    Ok((name.to_string(), v))
}

fn build_config(common: &CommonOpts) -> RunConfig {
    let mut cfg = RunConfig {
        seed: common.seed,
        ..RunConfig::default()
    };
    if let Some(s) = common.step {
        cfg.fd_step = s;
    }
    if let Some(c) = common.count {
        cfg.geodesic_count = c;
    }
    if let Some(l) = common.length {
        cfg.geodesic_length = l;
    }
    for (name, v) in &common.tol {
        cfg.tol.insert(name.clone(), *v);
    }
    cfg
}

fn emit(out_dir: &Option<PathBuf>, out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => {
            let path = match (out_dir, path.is_relative()) {
                (Some(dir), true) => dir.join(path),
                _ => path.clone(),
            };
            std::fs::write(path, text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut s = String::from("case,check,max_residual,tolerance,pass\n");
    for r in reports {
        for c in &r.checks {
            s.push_str(&format!(
                "{},{},{:.12e},{:.12e},{}\n",
                r.case, c.name, c.max_residual, c.tolerance, c.pass
            ));
        }
    }
    s
}

fn cmd_verify(
    out_dir: &Option<PathBuf>,
    selector: &str,
    common: &CommonOpts,
    format: &str,
) -> u8 {
    let cfg = build_config(common);
    let cases = if selector == "all" {
        catalog::registry()
    } else {
        match catalog::resolve(selector) {
            Ok(c) => vec![c],
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
    };
    let mut reports = Vec::new();
    for case in &cases {
        match catalog::verify_case(case, &cfg) {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("error: case {}: {e}", case.name);
                return 1;
            }
        }
    }
    reports.sort_by(|a, b| a.case.cmp(&b.case));
    let all_pass = reports.iter().all(|r| r.pass());
    let text = match format {
        "json" => {
            let mut t = serde_json::to_string_pretty(&reports).expect("serializable");
            t.push('\n');
            t
        }
        "csv" => reports_csv(&reports),
        other => {
            eprintln!("error: unknown format {other:?} (expected json or csv)");
            return 2;
        }
    };
    if emit(out_dir, &common.out, &text).is_err() {
        eprintln!("error: cannot write output");
        return 1;
    }
    for r in &reports {
        let failing: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        if !failing.is_empty() {
            eprintln!("FAIL {}: {}", r.case, failing.join(", "));
        }
    }
    if all_pass {
        0
    } else {
        1
    }
}

fn cmd_scan_quartic(
    out_dir: &Option<PathBuf>,
    a: f64,
    b: f64,
    mu_min: f64,
    mu_max: f64,
    mu_count: usize,
    out: &Option<PathBuf>,
) -> u8 {
    if mu_count == 0 {
        eprintln!("error: empty mu grid");
        return 2;
    }
    if (4.0 * a - b * b).abs() < 1e-12 {
        eprintln!("warning: 4a = b^2 is a space form; the radius quartic does not apply");
        return 2;
    }
    let mut text = String::from("mu,r2_minus,r2_plus,admissible_minus,admissible_plus\n");
    let mut root_sets: Vec<Vec<f64>> = Vec::new();
    for k in 0..mu_count {
        let mu = if mu_count == 1 {
            mu_min
        } else {
            mu_min + (mu_max - mu_min) * k as f64 / (mu_count - 1) as f64
        };
        let q = helices::tb_radius_quartic(a, b, mu);
        let fmt = |r: Option<&f64>| match r {
            Some(v) => format!("{v:.12e}"),
            None => String::new(),
        };
        let adm = |r: Option<&f64>| match r {
            Some(v) => (1.0 + a * v > 0.0).to_string(),
            None => String::from("false"),
        };
        text.push_str(&format!(
            "{:.12e},{},{},{},{}\n",
            mu,
            fmt(q.roots_r2.first()),
            fmt(q.roots_r2.get(1)),
            adm(q.roots_r2.first()),
            adm(q.roots_r2.get(1)),
        ));
        root_sets.push(q.roots_r2);
    }
    let independent = root_sets.windows(2).all(|w| {
        w[0].len() == w[1].len()
            && w[0]
                .iter()
                .zip(&w[1])
                .all(|(x, y)| (x - y).abs() < 1e-9)
    });
    text.push_str(&format!(
        "# verdict: {}\n",
        if independent {
            "mu-independent"
        } else {
            "mu-dependent"
        }
    ));
    if emit(out_dir, out, &text).is_err() {
        eprintln!("error: cannot write output");
        return 1;
    }
    0
}

fn cmd_geodesics(out_dir: &Option<PathBuf>, selector: &str, common: &CommonOpts) -> u8 {
    let cfg = build_config(common);
    let case = match catalog::resolve(selector) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut rng = catalog::case_rng(cfg.seed, &case.name);
    let tol = cfg.tolerance("tb-geodesic", 1e-5);
    let outcome = match hypersurfaces::tb_geodesic_check(
        &case.immersion,
        cfg.geodesic_count,
        cfg.geodesic_length,
        cfg.geodesic_step,
        tol,
        &mut rng,
    ) {
        Ok(o) => o,
        Err(GeomError::UnknownCase(_)) => unreachable!(),
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.6e}"))
            .collect::<Vec<_>>()
            .join(";")
    };
    let mut text = String::from("id,u0,dir0,res_t,res_n,res_b,verdict\n");
    for row in &outcome.rows {
        text.push_str(&format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{}\n",
            row.id,
            join(&row.u0),
            join(&row.dir0),
            row.res_t,
            row.res_n,
            row.res_b,
            row.verdict
        ));
    }
    if emit(out_dir, &common.out, &text).is_err() {
        eprintln!("error: cannot write output");
        return 1;
    }
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Verify {
            selector,
            common,
            format,
        } => cmd_verify(&cli.out_dir, selector, common, format),
        Cmd::ScanQuartic {
            a,
            b,
            mu_min,
            mu_max,
            mu_count,
            out,
        } => cmd_scan_quartic(&cli.out_dir, *a, *b, *mu_min, *mu_max, *mu_count, out),
        Cmd::Geodesics { selector, common } => cmd_geodesics(&cli.out_dir, selector, common),
    };
    ExitCode::from(code)
}
