//! `conic`: face lattices, intrinsic volumes and identity checks from JSON files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use conic_core::io::{ConeFile, Suite};
use conic_core::kinematics::Report;
use conic_core::measures::{estimate_u, estimate_v, exact_u, exact_v};
use conic_core::measures::exact::to_f64;
use conic_core::numerics::rng::ALGORITHM;
use conic_core::numerics::Rng;
use conic_core::Error;

#[derive(Parser)]
#[command(name = "conic", version, about = "Polyhedral cone measures and conic kinematic formula checks")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Face lattice summary: f- and lineality vectors and the face table.
    Faces {
        cone: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo intrinsic volumes, optionally with closed forms.
    Ivols {
        cone: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, env = "CONIC_SEED", default_value_t = 0)]
        seed: u64,
        /// Add closed-form values and z-scores when known.
        #[arg(long)]
        exact: bool,
        /// Also estimate the u-vector (n samples per face).
        #[arg(long)]
        u: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment suite and write reports.
    Verify {
        config: PathBuf,
        #[arg(long, env = "CONIC_SEED", default_value_t = 0)]
        seed: u64,
        /// Directory for reports.json, reports.csv and manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit codes: 0 pass, 1 identity failure or runtime error, 2 invalid input, 3 size guard.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SizeGuard(_) => 3,
        Error::Parse { .. }
        | Error::InvalidRational(_)
        | Error::InvalidConfig(_)
        | Error::InvalidFormula(_)
        | Error::DimensionMismatch { .. }
        | Error::Io(_)
        | Error::NotReadOnce
        | Error::NonOrthogonalTransform(_)
        | Error::UnsupportedKind(_)
        | Error::Singular => 2,
        _ => 1,
    }
}

#[derive(Serialize)]
struct FaceRow {
    id: usize,
    dim: usize,
    generators: Vec<usize>,
    facets: Vec<usize>,
}

#[derive(Serialize)]
struct FacesReport {
    name: String,
    d: usize,
    lineality: usize,
    f: Vec<usize>,
    ell: Vec<usize>,
    faces: Vec<FaceRow>,
}

fn faces(path: &Path, json: bool) -> Result<(), Error> {
    let file = ConeFile::load(path)?;
    let c = file.to_cone()?;
    let lattice = c.lattice();
    let mut rows: Vec<FaceRow> = lattice
        .faces
        .iter()
        .enumerate()
        .map(|(id, f)| FaceRow { id, dim: f.dim, generators: f.generators.clone(), facets: f.facets.clone() })
        .collect();
    rows.sort_by_key(|r| (r.dim, r.id));
    let report = FacesReport {
        name: file.name,
        d: c.dim(),
        lineality: c.lineality(),
        f: c.f_vector().as_usize(),
        ell: c.ell_vector().as_usize(),
        faces: rows,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(());
    }
    println!("cone {} in R^{} (lineality {})", report.name, report.d, report.lineality);
    println!("f = {:?}", report.f);
    println!("l = {:?}", report.ell);
    println!("{:>4} {:>4}  {:<20} facets", "id", "dim", "generators");
    for r in &report.faces {
        println!("{:>4} {:>4}  {:<20} {:?}", r.id, r.dim, format!("{:?}", r.generators), r.facets);
    }
    Ok(())
}

#[derive(Serialize)]
struct Entry {
    k: usize,
    mean: f64,
    stderr: f64,
    exact: Option<f64>,
    z: Option<f64>,
}

#[derive(Serialize)]
struct IvolsReport {
    name: String,
    n: u64,
    seed: u64,
    rng: &'static str,
    degenerate_drops: u64,
    v: Vec<Entry>,
    v_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<Vec<Entry>>,
}

fn entries(means: &[f64], stderrs: &[f64], exact: Option<Vec<f64>>) -> Vec<Entry> {
    means
        .iter()
        .zip(stderrs)
        .enumerate()
        .map(|(k, (&mean, &stderr))| {
            let x = exact.as_ref().map(|e| e[k]);
            let z = x.map(|x| if stderr > 0.0 { (mean - x) / stderr } else if mean == x { 0.0 } else { f64::INFINITY });
            Entry { k, mean, stderr, exact: x, z }
        })
        .collect()
}

fn ivols(path: &Path, n: u64, seed: u64, exact: bool, with_u: bool, json: bool) -> Result<(), Error> {
    let file = ConeFile::load(path)?;
    let c = file.to_cone()?;
    let rng = Rng::new(seed);
    let v = estimate_v(&c, n, &rng.child(0))?;
    let ev = if exact { exact_v(&c).map(|x| to_f64(&x)) } else { None };
    let u = if with_u {
        let est = estimate_u(&c, n, &rng.child(1))?;
        let eu = if exact { exact_u(&c).map(|x| to_f64(&x)) } else { None };
        let means: Vec<f64> = est.iter().map(|e| e.mean).collect();
        let stderrs: Vec<f64> = est.iter().map(|e| e.stderr).collect();
        Some(entries(&means, &stderrs, eu))
    } else {
        None
    };
    let report = IvolsReport {
        name: file.name,
        n,
        seed,
        rng: ALGORITHM,
        degenerate_drops: v.degenerate_drops(),
        v_sum: v.counts.iter().sum::<u64>() as f64 / n as f64,
        v: entries(&v.means(), &v.stderrs(), ev),
        u,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(());
    }
    println!("cone {} (n = {n}, seed = {seed})", report.name);
    let print = |label: &str, rows: &[Entry]| {
        println!("{:>3} {:>10} {:>10} {:>10} {:>8}", "k", label, "stderr", "exact", "z");
        for e in rows {
            let x = e.exact.map_or("-".to_string(), |x| format!("{x:.6}"));
            let z = e.z.map_or("-".to_string(), |z| format!("{z:.2}"));
            println!("{:>3} {:>10.6} {:>10.6} {:>10} {:>8}", e.k, e.mean, e.stderr, x, z);
        }
    };
    print("v", &report.v);
    println!("sum v = {}", report.v_sum);
    if let Some(u) = &report.u {
        print("u", u);
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    reports: usize,
    passed: usize,
    failed: usize,
    informational: usize,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config: String,
    config_sha256: String,
    seed: u64,
    version: String,
    rng: &'static str,
    seconds: f64,
    summary: Summary,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_bytes(reports: &[Report]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in reports {
        w.serialize(r).expect("reports serialize to CSV");
    }
    w.into_inner().expect("in-memory writer")
}

fn verify(config: &Path, seed: u64, out: Option<&Path>) -> Result<bool, Error> {
    let start = Instant::now();
    let text = std::fs::read(config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
    let suite = Suite::parse(&String::from_utf8_lossy(&text))?;
    let base = config.parent().unwrap_or(Path::new("."));
    let reports = conic_core::io::run_suite(&suite, seed, base)?;
    let summary = Summary {
        reports: reports.len(),
        passed: reports.iter().filter(|r| r.pass == Some(true)).count(),
        failed: reports.iter().filter(|r| r.pass == Some(false)).count(),
        informational: reports.iter().filter(|r| r.pass.is_none()).count(),
    };
    let ok = summary.failed == 0;
    let csv = csv_bytes(&reports);
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            let mut json = serde_json::to_vec_pretty(&reports).expect("serializable");
            json.push(b'\n');
            write(&dir.join("reports.json"), &json)?;
            write(&dir.join("reports.csv"), &csv)?;
            let manifest = Manifest {
                command: std::env::args().collect::<Vec<_>>().join(" "),
                config: config.display().to_string(),
                config_sha256: hex::encode(Sha256::digest(&text)),
                seed: suite.seed.unwrap_or(seed),
                version: format!("conic {}", env!("CARGO_PKG_VERSION")),
                rng: ALGORITHM,
                seconds: start.elapsed().as_secs_f64(),
                summary,
            };
            write(&dir.join("manifest.json"), &serde_json::to_vec_pretty(&manifest).expect("serializable"))?;
        }
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    for r in reports.iter().filter(|r| r.pass == Some(false)) {
        eprintln!("FAIL {} [{}] z = {:.2}", r.identity, r.params, r.z);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Faces { cone, json } => faces(cone, *json).map(|_| true),
        Command::Ivols { cone, n, seed, exact, u, json } => ivols(cone, *n, *seed, *exact, *u, *json).map(|_| true),
        Command::Verify { config, seed, out } => verify(config, *seed, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
