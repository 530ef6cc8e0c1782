//! `nrep`: command-line front end.
//!
//! Exit codes: 0 success, 1 verdict NO (`check --script`), 2 input error,
//! 3 resource cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nrep_core::duality;
use nrep_core::ellipsoid::{ground_energy_via_oracle, EllipsoidConfig, TRACE_HEADER};
use nrep_core::fock::{ground_energy_exact, SlaterBasis, DEFAULT_SECTOR_CAP};
use nrep_core::formats;
use nrep_core::hamiltonians::{
    default_penalty, parse_spin_hamiltonian, spin_to_fermion, spin_to_fermion_parity,
    DEFAULT_PARITY_PENALTY,
};
use nrep_core::oracle::{
    is_representable_with, ProjectionOptions, RepresentabilityInstance, VerdictKind,
};
use nrep_core::rdm::{expectation_vector, observable_basis, two_rdm};
use nrep_core::verifier::{honest_witness, Verifier, VerifierConfig};
use nrep_core::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "nrep", version, about = "Fermionic N-representability toolkit")]
struct Cli {
    /// Print a JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodingArg {
    OnePerSite,
    Parity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Exact,
    Ellipsoid,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spin Hamiltonian to fermionic operator.
    Map {
        hamiltonian: PathBuf,
        #[arg(long, value_enum, default_value = "one-per-site")]
        encoding: EncodingArg,
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// 2-RDM of an n-state or n-density file.
    Rdm {
        state: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Observable coordinates as CSV.
        #[arg(long)]
        alpha_csv: Option<PathBuf>,
    },
    /// Representability verdict for a 2-RDM file.
    Check {
        rdm: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Exit with status 1 on a NO verdict.
        #[arg(long)]
        script: bool,
    },
    /// Ground energy of a spin Hamiltonian.
    Energy {
        hamiltonian: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
        #[arg(long)]
        eps: Option<f64>,
        /// Ellipsoid trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trace_stride: usize,
    },
    /// Simulated verifier runs.
    Verify {
        rdm: PathBuf,
        #[arg(long, conflicts_with = "honest_from", required_unless_present = "honest_from")]
        witness: Option<PathBuf>,
        /// Build an honest witness from an n-state or n-density file.
        #[arg(long)]
        honest_from: Option<PathBuf>,
        #[arg(long, default_value_t = 0.4)]
        beta: f64,
        /// Shots per observable; calibrated when absent.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Particle-hole maps and the inner-ball certificate.
    Duality {
        #[arg(long)]
        d: usize,
        /// Directory for `A.txt` and `B.txt`.
        #[arg(long)]
        maps: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(Error::SectorTooLarge { .. } | Error::QubitCap { .. }) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => f.write_str(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn sector_cap() -> CliResult<usize> {
    match std::env::var("NREP_SECTOR_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Io(format!("NREP_SECTOR_CAP must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SECTOR_CAP),
    }
}

/// Comment lines naming the tool version and the resolved configuration.
fn provenance(config: &Value) -> String {
    format!("# nrep {VERSION}\n# config {config}\n")
}

/// What a command prints: text lines or a JSON object.
struct Report {
    lines: Vec<String>,
    json: Value,
    code: u8,
}

fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Map {
            hamiltonian,
            encoding,
            penalty,
            output,
        } => cmd_map(hamiltonian, *encoding, *penalty, output.as_deref()),
        Command::Rdm {
            state,
            output,
            alpha_csv,
        } => cmd_rdm(state, output.as_deref(), alpha_csv.as_deref()),
        Command::Check {
            rdm,
            beta,
            tol,
            script,
        } => cmd_check(rdm, *beta, *tol, *script),
        Command::Energy {
            hamiltonian,
            method,
            eps,
            trace,
            trace_stride,
        } => cmd_energy(hamiltonian, *method, *eps, trace.as_deref(), *trace_stride),
        Command::Verify {
            rdm,
            witness,
            honest_from,
            beta,
            shots,
            threshold,
            seed,
            runs,
        } => cmd_verify(
            rdm,
            witness.as_deref(),
            honest_from.as_deref(),
            *beta,
            *shots,
            *threshold,
            *seed,
            *runs,
        ),
        Command::Duality { d, maps } => cmd_duality(*d, maps.as_deref()),
    }
}

fn cmd_map(
    path: &Path,
    encoding: EncodingArg,
    penalty: Option<f64>,
    output: Option<&Path>,
) -> CliResult<Report> {
    let h = parse_spin_hamiltonian(&read(path)?)?;
    let (op, map, w) = match encoding {
        EncodingArg::OnePerSite => {
            let w = penalty.unwrap_or_else(|| default_penalty(&h));
            let (op, map) = spin_to_fermion(&h, w)?;
            (op, map, w)
        }
        EncodingArg::Parity => {
            let w = penalty.unwrap_or(DEFAULT_PARITY_PENALTY);
            let (op, map) = spin_to_fermion_parity(&h, w)?;
            (op, map, w)
        }
    };
    let enc = match encoding {
        EncodingArg::OnePerSite => "one-per-site",
        EncodingArg::Parity => "parity",
    };
    let config = json!({
        "command": "map",
        "hamiltonian": path.display().to_string(),
        "encoding": enc,
        "penalty": w,
        "output": output.map(|p| p.display().to_string()),
    });
    let text = format!("{}{}", provenance(&config), formats::write_fermion_op(&op));
    let note = format!("sector d={} N={}", map.d(), map.n_qubits());
    let mut lines = vec![note.clone()];
    match output {
        Some(p) => write(p, &text)?,
        None => lines.push(text.trim_end().to_string()),
    }
    Ok(Report {
        json: json!({
            "config": config,
            "d": map.d(),
            "N": map.n_qubits(),
            "terms": op.len(),
            "operator": if output.is_none() { Value::String(text) } else { Value::Null },
        }),
        lines,
        code: 0,
    })
}

fn load_density(path: &Path) -> CliResult<nrep_core::fock::NSectorDensity> {
    let text = read(path)?;
    let tag = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    Ok(match tag {
        "n-state" => formats::parse_n_state(&text)?.density(),
        _ => formats::parse_n_density(&text)?,
    })
}

fn cmd_rdm(path: &Path, output: Option<&Path>, alpha_csv: Option<&Path>) -> CliResult<Report> {
    let sigma = load_density(path)?;
    let rho = two_rdm(&sigma)?;
    let alpha = expectation_vector(&rho)?;
    let basis = observable_basis(rho.d())?;
    let config = json!({
        "command": "rdm",
        "state": path.display().to_string(),
        "d": rho.d(),
        "N": rho.n(),
        "output": output.map(|p| p.display().to_string()),
        "alpha_csv": alpha_csv.map(|p| p.display().to_string()),
    });
    let head = provenance(&config);
    let text = format!("{head}{}", formats::write_two_rdm(&rho));
    let mut lines = vec![format!("ell={}", alpha.len())];
    match output {
        Some(p) => write(p, &text)?,
        None => lines.push(text.trim_end().to_string()),
    }
    if let Some(p) = alpha_csv {
        let mut csv = format!("{head}index,observable,value\n");
        for (k, v) in alpha.values().iter().enumerate() {
            csv.push_str(&format!("{k},{},{v:.16e}\n", basis.name(k)));
        }
        write(p, &csv)?;
    }
    Ok(Report {
        json: json!({
            "config": config,
            "ell": alpha.len(),
            "alpha": alpha.values(),
        }),
        lines,
        code: 0,
    })
}

fn cmd_check(path: &Path, beta: f64, tol: f64, script: bool) -> CliResult<Report> {
    let rho = formats::parse_two_rdm(&read(path)?)?;
    let cap = sector_cap()?;
    SlaterBasis::with_cap(rho.d(), rho.n(), cap)?;
    let instance = RepresentabilityInstance::new(rho, beta)?;
    let verdict = is_representable_with(&instance, &ProjectionOptions::with_tol(tol))?;
    let code = if script && verdict.kind == VerdictKind::No { 1 } else { 0 };
    Ok(Report {
        json: json!({
            "config": {"command": "check", "rdm": path.display().to_string(), "beta": beta, "tol": tol},
            "verdict": verdict.kind.to_string(),
            "distance": verdict.distance,
            "lower_bound": verdict.lower_bound,
            "iterations": verdict.iterations,
        }),
        lines: vec![verdict.to_string()],
        code,
    })
}

fn cmd_energy(
    path: &Path,
    method: Method,
    eps: Option<f64>,
    trace: Option<&Path>,
    trace_stride: usize,
) -> CliResult<Report> {
    let h = parse_spin_hamiltonian(&read(path)?)?;
    let cap = sector_cap()?;
    let (config, energy, extra) = match method {
        Method::Exact => {
            let (op, map) = spin_to_fermion(&h, default_penalty(&h))?;
            let basis = Arc::new(SlaterBasis::with_cap(map.d(), map.n_qubits(), cap)?);
            let (e, _) = ground_energy_exact(&op, &basis)?;
            let config = json!({"command": "energy", "hamiltonian": path.display().to_string(), "method": "exact", "sector_cap": cap});
            (config, e, json!({}))
        }
        Method::Ellipsoid => {
            let n = h.n_qubits().max(2);
            SlaterBasis::with_cap(2 * n, n, cap)?;
            let cfg = EllipsoidConfig {
                eps,
                trace_stride: if trace.is_some() { trace_stride.max(1) } else { 0 },
                ..EllipsoidConfig::default()
            };
            let out = ground_energy_via_oracle(&h, &cfg)?;
            let config = json!({
                "command": "energy",
                "hamiltonian": path.display().to_string(),
                "method": "ellipsoid",
                "eps": out.result.eps,
                "trace": trace.map(|p| p.display().to_string()),
                "trace_stride": trace_stride,
                "sector_cap": cap,
            });
            if let Some(p) = trace {
                let mut csv = format!("{}{TRACE_HEADER}\n", provenance(&config));
                for row in &out.result.trace {
                    csv.push_str(&format!("{row}\n"));
                }
                write(p, &csv)?;
            }
            let extra = json!({
                "lower_bound": out.result.lower_bound,
                "iterations": out.result.iterations,
                "converged": out.result.converged,
                "eps": out.result.eps,
            });
            (config, out.value, extra)
        }
    };
    let mut line = format!("energy={energy:.16e}");
    if let Value::Object(m) = &extra {
        for (k, v) in m {
            match v.as_f64() {
                Some(x) if v.is_f64() => line.push_str(&format!(" {k}={x:.16e}")),
                _ => line.push_str(&format!(" {k}={v}")),
            }
        }
    }
    Ok(Report {
        json: json!({"config": config, "energy": energy, "details": extra}),
        lines: vec![line],
        code: 0,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    rdm: &Path,
    witness: Option<&Path>,
    honest_from: Option<&Path>,
    beta: f64,
    shots: Option<u64>,
    threshold: Option<f64>,
    seed: u64,
    runs: usize,
) -> CliResult<Report> {
    let rho = formats::parse_two_rdm(&read(rdm)?)?;
    let calibrated = VerifierConfig::calibrated(rho.clone(), beta)?;
    let config = VerifierConfig::new(
        rho,
        beta,
        shots.unwrap_or(calibrated.shots),
        threshold.unwrap_or(calibrated.threshold),
    )?;
    let verifier = Verifier::new(config)?;
    let blocks = match (witness, honest_from) {
        (Some(p), _) => formats::parse_witness(&read(p)?)?,
        (None, Some(p)) => honest_witness(&load_density(p)?, verifier.observable_count())?,
        (None, None) => return Err(CliError::Io("need --witness or --honest-from".into())),
    };
    let summary = verifier.run_many(&blocks, runs.max(1), seed)?;
    let resolved = json!({
        "command": "verify",
        "rdm": rdm.display().to_string(),
        "witness": witness.map(|p| p.display().to_string()),
        "honest_from": honest_from.map(|p| p.display().to_string()),
        "beta": beta,
        "shots": verifier.config().shots,
        "threshold": verifier.config().threshold,
        "seed": seed,
        "runs": runs.max(1),
    });
    let mut lines: Vec<String> = summary.outcomes.iter().map(|o| o.to_string()).collect();
    lines.push(format!("acceptance={:.16e} runs={}", summary.frequency, summary.outcomes.len()));
    Ok(Report {
        json: json!({
            "config": resolved,
            "acceptance": summary.frequency,
            "runs": summary.outcomes.iter().map(|o| json!({
                "seed": o.seed,
                "accepted": o.accepted,
                "max_dev": if o.max_dev.is_finite() { json!(o.max_dev) } else { Value::Null },
                "blocks": o.blocks,
                "shots": o.shots,
            })).collect::<Vec<_>>(),
        }),
        lines,
        code: 0,
    })
}

fn cmd_duality(d: usize, maps: Option<&Path>) -> CliResult<Report> {
    let (a, b) = duality::build_maps(d)?;
    let (smin, smax) = a.singular_range();
    let radius = duality::pair_inner_radius(d)?;
    let certificate = radius * smin;
    let id = b.compose(&a);
    let ell = a.dim();
    let mut inverse_err: f64 = id.offset.iter().fold(0.0, |m, x| m.max(x.abs()));
    for r in 0..ell {
        for c in 0..ell {
            let want = if r == c { 1.0 } else { 0.0 };
            inverse_err = inverse_err.max((id.matrix[(r, c)] - want).abs());
        }
    }
    let symbolic = duality::symbolic_check(d, &a)?;
    let config = json!({"command": "duality", "d": d, "maps": maps.map(|p| p.display().to_string())});
    if let Some(dir) = maps {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let head = provenance(&config);
        write(&dir.join("A.txt"), &format!("{head}{}", a.to_text()))?;
        write(&dir.join("B.txt"), &format!("{head}{}", b.to_text()))?;
    }
    let values = [
        ("ell", json!(ell)),
        ("sigma_min_a", json!(smin)),
        ("sigma_max_a", json!(smax)),
        ("pair_inner_radius", json!(radius)),
        ("inner_ball_certificate", json!(certificate)),
        ("trace_btb", json!(b.frobenius_squared())),
        ("trace_btb_bound", json!(duality::hole_map_bound(d))),
        ("inverse_error", json!(inverse_err)),
        ("symbolic_error", json!(symbolic.max())),
    ];
    let lines = values
        .iter()
        .map(|(k, v)| match v.as_f64() {
            Some(x) if v.is_f64() => format!("{k}={x:.16e}"),
            _ => format!("{k}={v}"),
        })
        .collect();
    let mut obj = serde_json::Map::new();
    obj.insert("config".into(), config);
    for (k, v) in values {
        obj.insert(k.into(), v);
    }
    Ok(Report {
        json: Value::Object(obj),
        lines,
        code: 0,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("serializable"));
            } else {
                for line in &report.lines {
                    println!("{line}");
                }
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
