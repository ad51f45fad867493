//! Command-line front end: config parsing, subcommands and exit codes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_states::{
    action, fock_state, periodic_state, quasi_energy, trajectory_coherent_state,
};
use crate::hamilton_ehrenfest::{
    closed_form, coherent_constants, periodic_constants, uncertainty_invariant, Constants,
};
use crate::io::{
    fmt_f64, read_wavefunction, sha256_hex, wavefunction_to_csv, wavefunction_to_json,
};
use crate::model::{Model, ModelParams};
use crate::oracle::{run, SolverConfig};
use crate::propagator::{auto_steps, compose, compose_auto, constants_for};
use crate::symmetry::{apply_op, symmetry_apply, LinearKernelOp};
use crate::wavefunction::{moments, Grid, WaveFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CAUSTIC: i32 = 2;
pub const EXIT_GRID: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub output: OutputFormat,
    pub seed: u64,
    /// SHA-256 of the config text.
    pub hash: String,
}

impl RunConfig {
    pub fn model(&self) -> Result<Model> {
        Model::new(self.model)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "m",
    "k",
    "hbar",
    "omega",
    "e",
    "E",
    "a",
    "b",
    "c",
    "kappa",
    "x_min",
    "x_max",
    "n_points",
    "dt",
    "renormalize",
    "output",
    "seed",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            key: line.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                key: key.into(),
                message: "unknown key".into(),
            });
        }
        if entries
            .insert(key.to_string(), (line_no, value.to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                key: key.into(),
                message: "duplicate key".into(),
            });
        }
    }

    let num = |key: &str, default: Option<f64>| -> Result<f64> {
        match entries.get(key) {
            Some((line, v)) => v.parse::<f64>().map_err(|e| Error::Parse {
                line: *line,
                key: key.into(),
                message: e.to_string(),
            }),
            None => default.ok_or_else(|| Error::Parse {
                line: 0,
                key: key.into(),
                message: "required key missing".into(),
            }),
        }
    };

    let model = ModelParams {
        m: num("m", None)?,
        k: num("k", None)?,
        hbar: num("hbar", None)?,
        omega: num("omega", None)?,
        e_charge: num("e", Some(1.0))?,
        e_field: num("E", Some(0.0))?,
        a: num("a", Some(0.0))?,
        b: num("b", Some(0.0))?,
        c: num("c", Some(0.0))?,
        kappa: num("kappa", Some(0.0))?,
    };
    let built = Model::new(model)?;

    let n_points = match entries.get("n_points") {
        Some((line, v)) => v.parse::<usize>().map_err(|e| Error::Parse {
            line: *line,
            key: "n_points".into(),
            message: e.to_string(),
        })?,
        None => 1024,
    };
    let grid = match (entries.contains_key("x_min"), entries.contains_key("x_max")) {
        (true, true) => Grid::new(num("x_min", None)?, num("x_max", None)?, n_points)?,
        (false, false) => default_grid(&built, n_points)?,
        _ => {
            let missing = if entries.contains_key("x_min") {
                "x_max"
            } else {
                "x_min"
            };
            return Err(Error::Parse {
                line: 0,
                key: missing.into(),
                message: "x_min and x_max go together".into(),
            });
        }
    };

    let mut solver = SolverConfig::default_for(&built);
    if entries.contains_key("dt") {
        solver.dt = num("dt", None)?;
    }
    if let Some((line, v)) = entries.get("renormalize") {
        solver.renormalize = v.parse::<bool>().map_err(|e| Error::Parse {
            line: *line,
            key: "renormalize".into(),
            message: e.to_string(),
        })?;
    }
    solver.validate(&built)?;

    let output = match entries.get("output").map(|(l, v)| (*l, v.as_str())) {
        None | Some((_, "csv")) => OutputFormat::Csv,
        Some((_, "json")) => OutputFormat::Json,
        Some((line, other)) => {
            return Err(Error::Parse {
                line,
                key: "output".into(),
                message: format!("expected csv or json, got `{other}`"),
            })
        }
    };
    let seed = match entries.get("seed") {
        Some((line, v)) => v.parse::<u64>().map_err(|e| Error::Parse {
            line: *line,
            key: "seed".into(),
            message: e.to_string(),
        })?,
        None => 0,
    };
    Ok(RunConfig {
        model,
        grid,
        solver,
        output,
        seed,
        hash: sha256_hex(text.as_bytes()),
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_str(&fs::read_to_string(path)?)
}

/// Symmetric grid holding Fock levels up to 4 around the driven orbit.
pub fn default_grid(model: &Model, n_points: usize) -> Result<Grid> {
    let half = 12.0 * model.fock_variance(4).sqrt() + model.drive_amplitude().abs();
    Grid::around(0.0, half, n_points)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Caustic { .. } => EXIT_CAUSTIC,
        Error::Grid(_) | Error::Alias { .. } => EXIT_GRID,
        Error::Quadrature { .. } | Error::Class(_) | Error::Tolerance { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hartree-exact",
    version,
    about = "Exact evolution and symmetry operators for the quadratic Hartree equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a trajectory-coherent (or periodic) state and its JSON sidecar.
    States {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        p0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        /// Use the time-periodic constants instead of (p0, x0).
        #[arg(long)]
        periodic: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the nonlinear evolution operator.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        /// Number of kernel substeps; 0 picks them automatically.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the equation directly with the split-step solver.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a nonlinear symmetry operator to a state given at time t.
    Symmetry {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        op: SymmetryOp,
        /// Displacement parameter as `re,im`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print quasi-energies and geometric phases of the periodic states.
    Quasienergy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
    },
    /// Run the invariant battery and print a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SymmetryOp {
    #[value(name = "ladder+")]
    LadderPlus,
    #[value(name = "ladder-")]
    LadderMinus,
    #[value(name = "displace")]
    Displace,
}

fn metadata(config: &RunConfig, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config_sha256".to_string(), config.hash.clone()),
    ];
    out.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    out
}

fn format_for(path: &Path, default: OutputFormat) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        _ => default,
    }
}

fn write_state(
    path: &Path,
    psi: &WaveFunction,
    config: &RunConfig,
    extra: &[(&str, String)],
) -> Result<()> {
    let meta = metadata(config, extra);
    let text = match format_for(path, config.output) {
        OutputFormat::Csv => wavefunction_to_csv(psi, &meta),
        OutputFormat::Json => wavefunction_to_json(psi, &meta)?,
    };
    fs::write(path, text)?;
    Ok(())
}

fn read_state(path: &Path) -> Result<WaveFunction> {
    read_wavefunction(&fs::read_to_string(path)?)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut p = out.to_path_buf();
    let stem = p
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("state")
        .to_string();
    p.set_file_name(format!("{stem}.meta.json"));
    p
}

#[derive(Debug, Serialize)]
struct StateSidecar {
    n: usize,
    t: f64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "E_n")]
    e_n: f64,
    gamma: f64,
    constants: [f64; 5],
    config_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    /// `None` when the check could not be evaluated.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn new(check: &str, value: f64, tolerance: f64) -> Self {
        let pass = value.is_finite() && value <= tolerance;
        CheckResult {
            check: check.into(),
            value: value.is_finite().then_some(value),
            tolerance,
            pass,
            error: None,
        }
    }

    fn failed(check: &str, tolerance: f64, err: &Error) -> Self {
        CheckResult {
            check: check.into(),
            value: None,
            tolerance,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

/// Evaluate `f`, turning errors into failed checks.
fn check(
    report: &mut Vec<CheckResult>,
    name: &str,
    tolerance: f64,
    f: impl FnOnce() -> Result<f64>,
) {
    report.push(match f() {
        Ok(v) => CheckResult::new(name, v, tolerance),
        Err(e) => CheckResult::failed(name, tolerance, &e),
    });
}

/// The invariant battery behind `verify`.
pub fn cmd_verify(config: &RunConfig) -> Result<Vec<CheckResult>> {
    let model = config.model()?;
    let grid = config.grid;
    let hbar = model.params.hbar;
    let period = model.period();
    let (p0, x0) = (0.3, -0.2);
    let mut report = Vec::new();

    check(&mut report, "fock_norm", 1e-10, || {
        let c = coherent_constants(&model, 0, p0, x0);
        let mut worst: f64 = 0.0;
        for n in 0..=3 {
            let psi = fock_state(&model, &grid, n, &c, 0.4)?;
            psi.check_concentrated()?;
            worst = worst.max((psi.norm_sq() - 1.0).abs());
        }
        Ok(worst)
    });

    check(&mut report, "variance_identity", 1e-10, || {
        let mut worst: f64 = 0.0;
        for n in 0..=5 {
            let psi = trajectory_coherent_state(&model, &grid, n, p0, x0, 0.0)?;
            let ms = moments(&psi, 2, hbar)?;
            worst = worst.max((ms.sigma_xx() - model.fock_variance(n)).abs());
        }
        Ok(worst)
    });

    check(&mut report, "uncertainty_invariant", 1e-10, || {
        let c = Constants([0.2, -0.1, 0.05, -0.03, 0.6]);
        let i0 = uncertainty_invariant(&closed_form(&model, &c, 0.0));
        let worst = (1..=16)
            .map(|k| {
                let it = uncertainty_invariant(&closed_form(&model, &c, k as f64 * period / 7.0));
                ((it - i0) / i0).abs()
            })
            .fold(0.0, f64::max);
        Ok(worst)
    });

    let t_mid = period / 3.0;
    check(&mut report, "evolve_vs_closed_form", 1e-6, || {
        let psi0 = trajectory_coherent_state(&model, &grid, 0, p0, x0, 0.0)?;
        let exact = trajectory_coherent_state(&model, &grid, 0, p0, x0, t_mid)?;
        Ok(compose_auto(&model, &psi0, 0.0, t_mid)?.l2_distance(&exact))
    });

    check(&mut report, "evolve_norm", 1e-8, || {
        let psi0 = trajectory_coherent_state(&model, &grid, 1, p0, x0, 0.0)?;
        Ok((compose_auto(&model, &psi0, 0.0, t_mid)?.norm_sq() - 1.0).abs())
    });

    check(&mut report, "left_inverse", 1e-6, || {
        let psi0 = trajectory_coherent_state(&model, &grid, 1, p0, x0, 0.0)?;
        let s = 0.1;
        let t = s + 0.4 * std::f64::consts::PI / model.freqs.omega_width;
        let forward = compose(&model, &psi0, s, t, 1)?;
        Ok(compose(&model, &forward, t, s, 1)?.l2_distance(&psi0))
    });

    check(&mut report, "moment_transport", 1e-6, || {
        let psi0 = trajectory_coherent_state(&model, &grid, 2, p0, x0, 0.0)?;
        let c0 = constants_for(&model, &psi0, 0.0)?;
        let evolved = compose_auto(&model, &psi0, 0.0, t_mid)?;
        let ms = moments(&evolved, 2, hbar)?;
        let g = closed_form(&model, &c0, t_mid);
        let diffs = [
            ms.x_mean - g.x,
            ms.p_mean - g.p,
            ms.sigma_xx() - g.sigma_xx,
            ms.sigma_px() - g.sigma_px,
            ms.sigma_pp() - g.sigma_pp,
        ];
        Ok(diffs.iter().map(|d| d.abs()).fold(0.0, f64::max))
    });

    check(&mut report, "ladder_commutator", 1e-8, || {
        let psi = trajectory_coherent_state(&model, &grid, 1, p0, x0, 0.0)?;
        let plus = LinearKernelOp::LadderPlus { p0, x0 };
        let minus = LinearKernelOp::LadderMinus { p0, x0 };
        let a = apply_op(&model, &minus, &apply_op(&model, &plus, &psi)?)?;
        let b = apply_op(&model, &plus, &apply_op(&model, &minus, &psi)?)?;
        Ok(a.sub(&b).l2_distance(&psi))
    });

    check(&mut report, "ladder_raise", 1e-5, || {
        let t = 0.7;
        let psi = trajectory_coherent_state(&model, &grid, 1, p0, x0, t)?;
        let (raised, _) = symmetry_apply(&model, &LinearKernelOp::LadderPlus { p0, x0 }, &psi, t)?;
        let target = trajectory_coherent_state(&model, &grid, 2, p0, x0, t)?;
        Ok(raised.sup_distance(&target.scaled(Complex64::new(2f64.sqrt(), 0.0))))
    });

    check(&mut report, "displacement_group_law", 1e-6, || {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let psi = trajectory_coherent_state(&model, &grid, 0, p0, x0, 0.0)?;
        let mut worst: f64 = 0.0;
        for _ in 0..3 {
            let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let d = |alpha: f64| LinearKernelOp::Displacement {
                alpha: Complex64::new(alpha, 0.0),
                p0,
                x0,
            };
            let lhs = apply_op(&model, &d(a + b), &psi)?;
            let rhs = apply_op(&model, &d(a), &apply_op(&model, &d(b), &psi)?)?;
            worst = worst.max(lhs.sup_distance(&rhs));
        }
        Ok(worst)
    });

    check(&mut report, "floquet", 1e-8, || {
        let mut worst: f64 = 0.0;
        for n in 0..=2 {
            let q = quasi_energy(&model, n);
            let a = periodic_state(&model, &grid, n, 0.3)?;
            let b = periodic_state(&model, &grid, n, 0.3 + period)?;
            let phase = Complex64::from_polar(1.0, q.energy * period / hbar);
            worst = worst.max(b.scaled(phase).sup_distance(&a));
        }
        Ok(worst)
    });

    check(&mut report, "quasi_energy_levels", 1e-12, || {
        let w = model.freqs.omega_width;
        let quantum =
            hbar * (w + model.freqs.kappa_eff * model.params.c / (2.0 * model.params.m * w));
        let mut worst: f64 = 0.0;
        for n in 0..4 {
            let e = quasi_energy(&model, n).energy;
            let spacing = quasi_energy(&model, n + 1).energy - e;
            worst = worst.max((spacing - quantum).abs());
            if model.params.e_field == 0.0 {
                worst = worst.max((e - quantum * (n as f64 + 0.5)).abs());
            }
        }
        Ok(worst)
    });

    check(&mut report, "oracle_vs_closed_form", 1e-4, || {
        let steps = 1024;
        let solver = SolverConfig {
            dt: period / 4.0 / steps as f64,
            ..config.solver
        };
        let psi0 = trajectory_coherent_state(&model, &grid, 1, p0, x0, 0.0)?;
        let out = run(&model, &psi0, 0.0, period / 4.0, solver)?;
        Ok(out.l2_distance(&trajectory_coherent_state(
            &model,
            &grid,
            1,
            p0,
            x0,
            period / 4.0,
        )?))
    });

    Ok(report)
}

fn parse_alpha(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::Parse {
        line: 0,
        key: "alpha".into(),
        message: format!("expected `re,im`, got `{s}`"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let re = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let im = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Print to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// Run a parsed command, printing machine-readable output to stdout.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::States {
            config,
            n,
            t,
            p0,
            x0,
            periodic,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let model = cfg.model()?;
            let c = if periodic {
                periodic_constants(&model, n)
            } else {
                coherent_constants(&model, n, p0, x0)
            };
            let psi = if periodic {
                periodic_state(&model, &cfg.grid, n, t)?
            } else {
                trajectory_coherent_state(&model, &cfg.grid, n, p0, x0, t)?
            };
            let q = quasi_energy(&model, n);
            write_state(&out, &psi, &cfg, &[("n", n.to_string()), ("t", fmt_f64(t))])?;
            let sidecar = StateSidecar {
                n,
                t,
                s: action(&model, &c, t)?.s,
                e_n: q.energy,
                gamma: q.aa_phase,
                constants: c.0,
                config_sha256: cfg.hash.clone(),
            };
            fs::write(sidecar_path(&out), serde_json::to_string_pretty(&sidecar)?)?;
            Ok(EXIT_OK)
        }
        Command::Evolve {
            config,
            from,
            t0,
            t1,
            steps,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let model = cfg.model()?;
            let psi = read_state(&from)?;
            let n = if steps == 0 {
                auto_steps(&model, t0, t1)
            } else {
                steps
            };
            let result = compose(&model, &psi, t0, t1, n)?;
            write_state(
                &out,
                &result,
                &cfg,
                &[("t", fmt_f64(t1)), ("steps", n.to_string())],
            )?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            config,
            from,
            t0,
            t1,
            dt,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let model = cfg.model()?;
            let psi = read_state(&from)?;
            // Shrink dt so the interval holds a whole number of steps.
            let target = dt.unwrap_or(cfg.solver.dt);
            let steps = ((t1 - t0).abs() / target).ceil().max(1.0);
            let solver = SolverConfig {
                dt: (t1 - t0).abs() / steps,
                ..cfg.solver
            };
            let result = run(&model, &psi, t0, t1, solver)?;
            write_state(
                &out,
                &result,
                &cfg,
                &[("t", fmt_f64(t1)), ("dt", fmt_f64(solver.dt))],
            )?;
            Ok(EXIT_OK)
        }
        Command::Symmetry {
            config,
            op,
            alpha,
            state,
            t,
            out,
        } => {
            let cfg = parse_config(&config)?;
            let model = cfg.model()?;
            let psi = read_state(&state)?;
            let initial = if t == 0.0 {
                psi.clone()
            } else {
                compose_auto(&model, &psi, t, 0.0)?
            };
            let ms = moments(&initial, 2, model.params.hbar)?;
            let (p0, x0) = (ms.p_mean, ms.x_mean);
            let linear = match op {
                SymmetryOp::LadderPlus => LinearKernelOp::LadderPlus { p0, x0 },
                SymmetryOp::LadderMinus => LinearKernelOp::LadderMinus { p0, x0 },
                SymmetryOp::Displace => LinearKernelOp::Displacement {
                    alpha: parse_alpha(&alpha)?,
                    p0,
                    x0,
                },
            };
            let (result, constants) = symmetry_apply(&model, &linear, &psi, t)?;
            write_state(&out, &result, &cfg, &[("t", fmt_f64(t))])?;
            let report = serde_json::json!({
                "reference": { "p0": p0, "x0": x0 },
                "constants": constants.map(|c| c.0),
                "config_sha256": cfg.hash,
            });
            emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Quasienergy { config, n_max } => {
            let cfg = parse_config(&config)?;
            let model = cfg.model()?;
            let levels: Vec<_> = (0..=n_max).map(|n| quasi_energy(&model, n)).collect();
            emit(&serde_json::to_string_pretty(&levels)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify { config } => {
            let cfg = parse_config(&config)?;
            let report = cmd_verify(&cfg)?;
            emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(if report.iter().all(|c| c.pass) {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

/// Size the global thread pool from HARTREE_EXACT_THREADS, if set.
pub fn init_threads() {
    if let Some(n) = std::env::var("HARTREE_EXACT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}
