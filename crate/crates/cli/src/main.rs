//! `singular-sos`: command-line front end for the moment-SOS pipeline.

mod problem;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use singular_sos::boundcalc::{b, bound_table};
use singular_sos::certify::{verify_certificate, CertificateJson, SOSCertificate, DEFAULT_TOL};
use singular_sos::momentsos::{
    build_relaxation, reduce, solve_direct, solve_singular, PipelineReport, Reduction, ASSUMPTIONS,
};
use singular_sos::sdpcore::sdpa;
use singular_sos::varietylab::singular_system;

use problem::{load_problem, Prepared};

/// Exit codes.
const EXIT_CONVERGED: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INFEASIBLE_KKT: u8 = 3;
const EXIT_CERTIFY_FAIL: u8 = 4;

#[derive(Parser)]
#[command(name = "singular-sos", version, about = "Moment-SOS relaxations on singular real varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hierarchy and write a JSON report.
    Solve {
        problem: PathBuf,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certificate path; defaults to `<out>.cert.json` when `--out` is set.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k_min: Option<u32>,
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// Print the KKT system, one polynomial per line.
    Kkt { problem: PathBuf },
    /// Print the generators of the singular-locus system.
    SingularLocus { problem: PathBuf },
    /// Print the pulled-back objective.
    Pullback { problem: PathBuf },
    /// Print the order-bound table.
    Bounds { n: u64, d: u64, l: u64 },
    /// Verify a certificate against a problem.
    Certify {
        problem: PathBuf,
        certificate: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Write the reduced order-`k` program in SDPA sparse format.
    ExportSdp {
        problem: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Solve { problem, out, certificate, seed, k_min, k_max } => {
            cmd_solve(&problem, out.as_deref(), certificate, seed, k_min, k_max)
        }
        Command::Kkt { problem } => {
            let p = load_problem(&problem)?;
            let (_, kkt) = p.prepared.kkt(p.options.reduce_objective)?;
            print_lines(&kkt.to_text());
            Ok(0)
        }
        Command::SingularLocus { problem } => {
            let p = load_problem(&problem)?;
            let v = p.prepared.variety();
            let sys = singular_system(v)?;
            print_lines(&sys.system.generators.iter().map(|g| g.to_text(&v.vars)).collect::<Vec<_>>());
            Ok(0)
        }
        Command::Pullback { problem } => {
            let p = load_problem(&problem)?;
            let Prepared::Singular { phi, .. } = &p.prepared else {
                anyhow::bail!("problem has no morphism");
            };
            let h0 = p.prepared.objective(p.options.reduce_objective)?;
            println!("{}", h0.to_text(&phi.source.vars));
            Ok(0)
        }
        Command::Bounds { n, d, l } => {
            let t = bound_table(n, d, l)?;
            println!("n = {n}, d = {d}, l = {l}");
            println!("bit(d) = {}", t.bit_d);
            println!("c = {}", t.c);
            println!("b({n}, {d}, {l}) = {}", b(n, d, l));
            println!("b(n+l, d, n+l+1) = {}", t.b);
            println!("w (c-branch) = {}", t.w_c_branch);
            println!("w (b-branch) = {}", t.w_b_branch);
            println!("w = {}", t.w);
            println!("r = {}", t.r);
            println!("cardinality = {}", t.cardinality);
            Ok(0)
        }
        Command::Certify { problem, certificate, tol } => cmd_certify(&problem, &certificate, tol),
        Command::ExportSdp { problem, k, out } => {
            let p = load_problem(&problem)?;
            let (h0, kkt) = p.prepared.kkt(p.options.reduce_objective)?;
            let rel = build_relaxation(&h0, &kkt.polynomials, k)?;
            match reduce(&rel) {
                Reduction::Inconsistent(_) => {
                    eprintln!(
                        "order {k}: the equalities are inconsistent (1 lies in the truncated ideal); nothing to export"
                    );
                    Ok(EXIT_INFEASIBLE_KKT)
                }
                Reduction::Reduced(r) => {
                    let comment = format!(
                        "order {k}, variables {}; objective offset {} (add to c^T u)",
                        kkt.vars.join(" "),
                        r.offset
                    );
                    write_or_print(out.as_deref(), &sdpa::export(&r.lmi, &comment))?;
                    Ok(0)
                }
            }
        }
    }
}

fn print_lines(lines: &[String]) {
    for l in lines {
        println!("{l}");
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Report status as an exit code.
pub fn exit_code(report: &PipelineReport) -> u8 {
    if report.infeasible_kkt {
        EXIT_INFEASIBLE_KKT
    } else if report.hierarchy.converged && !report.non_attainment {
        EXIT_CONVERGED
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn status_name(code: u8) -> &'static str {
    match code {
        EXIT_CONVERGED => "converged",
        EXIT_INFEASIBLE_KKT => "infeasible-kkt",
        _ => "not-converged",
    }
}

#[derive(Serialize)]
struct Timings {
    total_ms: f64,
}

fn cmd_solve(
    path: &Path,
    out: Option<&Path>,
    certificate: Option<PathBuf>,
    seed: Option<u64>,
    k_min: Option<u32>,
    k_max: Option<u32>,
) -> Result<u8> {
    let start = Instant::now();
    let mut p = load_problem(path)?;
    if let Some(s) = seed {
        p.options.seed = s;
    }
    if let Some(k) = k_min {
        p.options.k_min = k;
    }
    if let Some(k) = k_max {
        p.options.k_max = k;
    }
    let opts = p.options.pipeline();
    let report = match &p.prepared {
        Prepared::Singular { v, f, phi } => {
            eprintln!("assuming (not verified):");
            for a in ASSUMPTIONS {
                eprintln!("  - {a}");
            }
            solve_singular(v, f, phi, p.options.k_min, p.options.k_max, &opts)?
        }
        Prepared::Direct { v, f } => solve_direct(v, f, p.options.k_min, p.options.k_max, &opts)?,
    };
    let code = exit_code(&report);
    let cert_record = report
        .hierarchy
        .converged_at
        .and_then(|k| report.hierarchy.record(k))
        .or_else(|| report.hierarchy.records.iter().rev().find(|r| r.certificate.is_some()))
        .and_then(|r| r.certificate.as_ref());
    let cert_path = certificate.or_else(|| out.map(|o| o.with_extension("cert.json")));
    let mut cert_file = None;
    if let (Some(c), Some(cp)) = (cert_record, &cert_path) {
        fs::write(cp, serde_json::to_string_pretty(&c.to_json())?)
            .with_context(|| format!("writing {}", cp.display()))?;
        cert_file = Some(cp.display().to_string());
    }
    if report.infeasible_kkt {
        eprintln!("infeasible KKT relaxation: no real KKT point; the hierarchy cannot reach the infimum");
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    let doc = json!({
        "tool": "singular-sos",
        "version": env!("CARGO_PKG_VERSION"),
        "status": status_name(code),
        "exit_code": code,
        "value": report.value(),
        "input": p.raw,
        "options": p.options,
        "assumptions": report.assumptions,
        "certificate_file": cert_file,
        "certificate": cert_record.map(|c| c.to_json()),
        "report": report,
        "timings": Timings { total_ms: start.elapsed().as_secs_f64() * 1e3 },
    });
    write_or_print(out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(code)
}

fn cmd_certify(problem: &Path, certificate: &Path, tol: f64) -> Result<u8> {
    let p = load_problem(problem)?;
    let (h0, kkt) = p.prepared.kkt(p.options.reduce_objective)?;
    let text = fs::read_to_string(certificate).with_context(|| format!("reading {}", certificate.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let j: CertificateJson = serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("{}: at {}: {}", certificate.display(), e.path(), e.inner()))?;
    let cert = SOSCertificate::from_json(&j)?;
    if cert.vars != kkt.vars {
        anyhow::bail!("certificate variables {:?} do not match the problem's {:?}", cert.vars, kkt.vars);
    }
    let rep = verify_certificate(&cert, &h0, &kkt.polynomials, tol)?;
    println!("xi = {}", cert.xi);
    println!("max residual coefficient = {:e}", rep.max_residual_coefficient);
    println!("gram min eigenvalue = {:e}", rep.gram_min_eigenvalue);
    println!("{}", if rep.pass { "PASS" } else { "FAIL" });
    Ok(if rep.pass { 0 } else { EXIT_CERTIFY_FAIL })
}
