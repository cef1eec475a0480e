//! Batch front end: parse a flat key-value config, orchestrate runs, and
//! emit machine-readable reports (JSON, CSV for tables). Exit codes:
//! 0 = all checks pass, 1 = a physics check was violated, 2 = invalid
//! input. Identical config + seed produce byte-identical output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use pamlab::fock::{ElectronConfiguration, SpinfulBasis};
use pamlab::graph::{connect, enumerate_configs, path_to_f, validate_path};
use pamlab::ham::{build_deformed, build_model, Model, ModelParams};
use pamlab::lattice::{build_lattice, validate_assumptions, Lattice, LatticeKind};
use pamlab::linalg::{CsrMatrix, HermitianEig};
use pamlab::ops::s2_total;
use pamlab::phonon::{PhononSpace, PositionFrame};
use pamlab::positivity::{
    align_to_cone, cone_membership, negative_control, sample_cone_element,
    semigroup_positivity_check,
};
use pamlab::spectral::{correlator_table, ground_state, total_spin_of, SolverOpts};

#[derive(Parser)]
#[command(name = "pamlab", version, about = "Exact-diagonalization toolkit for \
lattice electron-phonon models: spectra, correlators, configuration graphs, \
and cone-positivity certification")]
struct Cli {
    /// Flat key-value config file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the check tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the phonon occupancy cutoff.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check lattice and parameter assumptions.
    Validate,
    /// Ground-state energy, gap, and total spin.
    Spectrum,
    /// Staggered spin-correlator table (CSV).
    Correlators,
    /// Configuration-graph paths and validation.
    Graph {
        /// d-orbital mask of the start configuration.
        #[arg(long)]
        xd: Option<u32>,
        /// f-orbital mask of the start configuration.
        #[arg(long)]
        xf: Option<u32>,
        /// d-orbital mask of the end configuration.
        #[arg(long)]
        yd: Option<u32>,
        /// f-orbital mask of the end configuration.
        #[arg(long)]
        yf: Option<u32>,
    },
    /// Heat-semigroup cone-positivity report.
    Positivity,
    /// Run the full acceptance suite.
    Verify,
}

/// Fully resolved run configuration; every field (including defaults) is
/// embedded in each report for provenance.
#[derive(Clone, Serialize)]
struct RunConfig {
    lattice: String,
    sites: usize,
    t: f64,
    model: String,
    u_f: f64,
    u_d: f64,
    v: f64,
    g: f64,
    omega0: f64,
    /// Explicit override; `None` selects the symmetric value.
    epsilon_f: Option<f64>,
    n_max: usize,
    tol: f64,
    seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: "chain".into(),
            sites: 2,
            t: 1.0,
            model: "d-coupled".into(),
            u_f: 2.0,
            u_d: 1.0,
            v: 1.0,
            g: 0.3,
            omega0: 1.0,
            epsilon_f: None,
            n_max: 4,
            tol: 1e-8,
            seed: 7,
        }
    }
}

/// Failure cause, mapped to the exit code.
enum Failure {
    /// Exit 1: a physics check was violated.
    Physics(String),
    /// Exit 2: invalid input.
    Input(String),
}

type RunResult<T> = std::result::Result<T, Failure>;

fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

impl From<pamlab::PamError> for Failure {
    fn from(e: pamlab::PamError) -> Self {
        match e {
            pamlab::PamError::InvalidParams(_) | pamlab::PamError::InvalidLattice(_) => {
                Failure::Input(e.to_string())
            }
            other => Failure::Physics(other.to_string()),
        }
    }
}

fn parse_config(text: &str) -> RunResult<RunConfig> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| input_err(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| input_err(format!("line {}: invalid {what}: {value}", lineno + 1));
        match key {
            "lattice" => cfg.lattice = value.to_string(),
            "sites" => cfg.sites = value.parse().map_err(|_| bad("sites"))?,
            "t" => cfg.t = value.parse().map_err(|_| bad("t"))?,
            "model" => cfg.model = value.to_string(),
            "u_f" => cfg.u_f = value.parse().map_err(|_| bad("u_f"))?,
            "u_d" => cfg.u_d = value.parse().map_err(|_| bad("u_d"))?,
            "v" => cfg.v = value.parse().map_err(|_| bad("v"))?,
            "g" => cfg.g = value.parse().map_err(|_| bad("g"))?,
            "omega0" => cfg.omega0 = value.parse().map_err(|_| bad("omega0"))?,
            "epsilon_f" => cfg.epsilon_f = Some(value.parse().map_err(|_| bad("epsilon_f"))?),
            "n_max" => cfg.n_max = value.parse().map_err(|_| bad("n_max"))?,
            "tol" => cfg.tol = value.parse().map_err(|_| bad("tol"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            other => {
                return Err(input_err(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(cfg)
}

struct Setup {
    cfg: RunConfig,
    config_sha256: String,
    lattice: Lattice,
    basis: SpinfulBasis,
    params: ModelParams,
    phonons: Option<PhononSpace>,
    regime: &'static str,
}

fn build_setup(cli: &Cli) -> RunResult<Setup> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(nmax) = cli.nmax {
        cfg.n_max = nmax;
    }
    let config_sha256 = format!("{:x}", Sha256::digest(text.as_bytes()));
    let kind = match cfg.lattice.as_str() {
        "chain" => LatticeKind::Chain { n: cfg.sites },
        "ring" => LatticeKind::Ring { n: cfg.sites },
        other => return Err(input_err(format!("unsupported lattice '{other}'"))),
    };
    let lattice = build_lattice(&kind, cfg.t)?;
    let model = match cfg.model.as_str() {
        "pam" => Model::Pam,
        "d-coupled" => Model::DCoupled,
        "f-coupled" => Model::FCoupled,
        other => return Err(input_err(format!("unsupported model '{other}'"))),
    };
    let mut params = ModelParams {
        epsilon_f: 0.0,
        u_f: cfg.u_f,
        u_d: cfg.u_d,
        v: cfg.v,
        g: cfg.g,
        omega0: cfg.omega0,
        model,
    };
    let symmetric = match model {
        // The bare model's theorem regime uses the particle-hole
        // symmetric level without the d interaction.
        Model::Pam => -cfg.u_f / 2.0,
        _ => params.symmetric_epsilon_f(),
    };
    params.epsilon_f = cfg.epsilon_f.unwrap_or(symmetric);
    params.validate()?;
    let regime = if (params.epsilon_f - symmetric).abs() <= 1e-12 * symmetric.abs().max(1.0) {
        "theorem regime (symmetric level)"
    } else {
        "outside theorem regime"
    };
    let basis = SpinfulBasis::half_filled(cfg.sites)?;
    let phonons = match model {
        Model::Pam => None,
        _ => Some(PhononSpace::new(cfg.sites, cfg.n_max)?),
    };
    Ok(Setup {
        cfg,
        config_sha256,
        lattice,
        basis,
        params,
        phonons,
        regime,
    })
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    library_version: String,
    config_sha256: String,
    config: RunConfig,
    regime: String,
    #[serde(flatten)]
    payload: T,
}

fn emit<T: Serialize>(setup: &Setup, out: &Option<PathBuf>, payload: T) -> RunResult<()> {
    let report = Report {
        library_version: pamlab::VERSION.to_string(),
        config_sha256: setup.config_sha256.clone(),
        config: setup.cfg.clone(),
        regime: setup.regime.to_string(),
        payload,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Physics(format!("serialization: {e}")))?;
    write_out(out, &(text + "\n"))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> RunResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| input_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn hamiltonian(setup: &Setup) -> RunResult<CsrMatrix> {
    Ok(build_model(
        &setup.lattice,
        &setup.params,
        &setup.basis,
        setup.phonons.as_ref(),
    )?)
}

fn run_validate(setup: &Setup, out: &Option<PathBuf>) -> RunResult<()> {
    let report = validate_assumptions(&setup.lattice);
    if !(report.symmetric && report.real && report.bipartite && report.connected) {
        return Err(input_err(format!(
            "lattice assumptions violated: {report:?}"
        )));
    }
    #[derive(Serialize)]
    struct Payload {
        lattice_symmetric: bool,
        lattice_real: bool,
        lattice_bipartite: bool,
        lattice_connected: bool,
        params_valid: bool,
    }
    emit(
        setup,
        out,
        Payload {
            lattice_symmetric: report.symmetric,
            lattice_real: report.real,
            lattice_bipartite: report.bipartite,
            lattice_connected: report.connected,
            params_valid: true,
        },
    )
}

fn run_spectrum(setup: &Setup, out: &Option<PathBuf>) -> RunResult<()> {
    let h = hamiltonian(setup)?;
    let gs = ground_state(&h, &solver_opts(setup))?;
    let ph_dim = setup.phonons.as_ref().map_or(1, |p| p.dim());
    let s2 = if ph_dim == 1 {
        s2_total(&setup.basis)?
    } else {
        s2_total(&setup.basis)?.kron(&CsrMatrix::identity(ph_dim))
    };
    let spin = total_spin_of(&gs.psi, &s2)?;
    #[derive(Serialize)]
    struct Payload {
        e0: f64,
        gap: f64,
        unique: bool,
        total_spin: f64,
        s2_expectation: f64,
        spin_residual: f64,
        solver: &'static str,
        solver_residual: f64,
        dimension: usize,
    }
    let payload = Payload {
        e0: gs.e0,
        gap: gs.gap,
        unique: gs.is_unique(),
        total_spin: spin.s,
        s2_expectation: spin.expectation,
        spin_residual: spin.residual,
        solver: gs.solver,
        solver_residual: gs.residual,
        dimension: h.nrows(),
    };
    let in_regime = setup.regime.starts_with("theorem");
    let violated = in_regime && (!gs.is_unique() || spin.expectation > 1e-8);
    emit(setup, out, payload)?;
    if violated {
        return Err(Failure::Physics(format!(
            "theorem-regime run violated uniqueness/S=0 (gap {:.3e}, <S2> {:.3e})",
            gs.gap, spin.expectation
        )));
    }
    Ok(())
}

fn run_correlators(setup: &Setup, out: &Option<PathBuf>) -> RunResult<()> {
    let h = hamiltonian(setup)?;
    let gs = ground_state(&h, &solver_opts(setup))?;
    let ph_dim = setup.phonons.as_ref().map_or(1, |p| p.dim());
    let table = correlator_table(&gs.psi, &setup.lattice, &setup.basis, ph_dim, 1e-10)?;
    let header = format!(
        "# library_version={} config_sha256={} regime={}\n",
        pamlab::VERSION,
        setup.config_sha256,
        setup.regime
    );
    write_out(out, &(header + &table.to_csv()))?;
    let in_regime = setup.regime.starts_with("theorem");
    if in_regime && !table.all_positive() {
        return Err(Failure::Physics(
            "theorem-regime correlator table has non-positive entries".into(),
        ));
    }
    Ok(())
}

fn parse_cfg_pair(
    n: usize,
    d: Option<u32>,
    f: Option<u32>,
) -> RunResult<Option<ElectronConfiguration>> {
    match (d, f) {
        (None, None) => Ok(None),
        (d, f) => {
            let cfg = ElectronConfiguration::new(d.unwrap_or(0), f.unwrap_or(0));
            if cfg.n_total() != n || (cfg.xd | cfg.xf) >> n != 0 {
                return Err(input_err(format!(
                    "configuration (d={:#b}, f={:#b}) invalid for {n} sites",
                    cfg.xd, cfg.xf
                )));
            }
            Ok(Some(cfg))
        }
    }
}

#[derive(Serialize)]
struct PathReport {
    configs: Vec<ElectronConfiguration>,
    length: usize,
    valid: bool,
}

fn path_report(p: &pamlab::graph::ConfigPath, lat: &Lattice) -> RunResult<PathReport> {
    let v = validate_path(p, lat)?;
    Ok(PathReport {
        configs: p.configs.clone(),
        length: p.len(),
        valid: v.valid,
    })
}

fn run_graph(
    setup: &Setup,
    out: &Option<PathBuf>,
    xd: Option<u32>,
    xf: Option<u32>,
    yd: Option<u32>,
    yf: Option<u32>,
) -> RunResult<()> {
    let n = setup.lattice.n_sites();
    let x = parse_cfg_pair(n, xd, xf)?;
    let y = parse_cfg_pair(n, yd, yf)?;
    #[derive(Serialize)]
    struct Payload {
        n_configurations: usize,
        paths: Vec<PathReport>,
        all_valid: bool,
    }
    let configs = enumerate_configs(n);
    let mut paths = Vec::new();
    match (x, y) {
        (Some(a), Some(b)) => paths.push(path_report(&connect(&a, &b, &setup.lattice)?, &setup.lattice)?),
        (Some(a), None) => paths.push(path_report(&path_to_f(&a, &setup.lattice)?, &setup.lattice)?),
        (None, Some(b)) => paths.push(path_report(&path_to_f(&b, &setup.lattice)?, &setup.lattice)?),
        (None, None) => {
            // Exhaustive connectivity to the reference configuration.
            for c in &configs {
                paths.push(path_report(&path_to_f(c, &setup.lattice)?, &setup.lattice)?);
            }
        }
    }
    let all_valid = paths.iter().all(|p| p.valid);
    emit(
        setup,
        out,
        Payload {
            n_configurations: configs.len(),
            paths,
            all_valid,
        },
    )?;
    if !all_valid {
        return Err(Failure::Physics("a configuration path failed validation".into()));
    }
    Ok(())
}

fn run_positivity(setup: &Setup, out: &Option<PathBuf>) -> RunResult<()> {
    let ph = setup.phonons.as_ref().ok_or_else(|| {
        input_err("positivity checks need a phonon-coupled model (d-coupled or f-coupled)")
    })?;
    if !setup.regime.starts_with("theorem") {
        return Err(input_err(
            "positivity checks require the symmetric level (remove the epsilon_f override)",
        ));
    }
    let set = build_deformed(&setup.lattice, &setup.params, &setup.basis, ph)?;
    let frame = PositionFrame::new(ph)?;
    let heig = HermitianEig::new(&set.h.to_dense(), 1e-10)
        .map_err(|e| Failure::Physics(e.to_string()))?;
    #[derive(Serialize)]
    struct BetaReport {
        beta: f64,
        failures: usize,
        worst_eigenvalue: f64,
        per_sample_worst: Vec<f64>,
    }
    #[derive(Serialize)]
    struct Payload {
        betas: Vec<BetaReport>,
        ground_state_member: bool,
        ground_state_worst_eigenvalue: f64,
        min_sample_overlap: f64,
        negative_control_failures: usize,
        pass: bool,
    }
    let mut betas = Vec::new();
    let mut all_pass = true;
    for beta in [0.1, 0.5, 1.0] {
        let rep = semigroup_positivity_check(
            &heig,
            beta,
            100,
            setup.cfg.seed,
            &setup.basis,
            &frame,
            setup.cfg.tol,
        )?;
        all_pass &= rep.failures == 0;
        betas.push(BetaReport {
            beta,
            failures: rep.failures,
            worst_eigenvalue: rep.worst_eigenvalue,
            per_sample_worst: rep.per_sample_worst,
        });
    }
    let gs = ground_state(&set.h, &solver_opts(setup))?;
    let mut psi = gs.psi.clone();
    align_to_cone(&mut psi, &setup.basis, &frame);
    let member = cone_membership(&psi, &setup.basis, &frame, setup.cfg.tol)?;
    all_pass &= member.member;
    let mut min_overlap = f64::INFINITY;
    for s in 0..100u64 {
        let v = sample_cone_element(
            setup.cfg.seed.wrapping_add(s),
            1 + (s % 3) as usize,
            &setup.basis,
            &frame,
        )?;
        min_overlap = min_overlap.min(pamlab::linalg::zdot(&v, &psi).re);
    }
    all_pass &= min_overlap > 0.0;
    let bad = negative_control(&set.h, &setup.basis, ph.dim(), 0.6);
    let beig = HermitianEig::new(&bad.to_dense(), 1e-10)
        .map_err(|e| Failure::Physics(e.to_string()))?;
    let control = semigroup_positivity_check(
        &beig,
        1.0,
        100,
        setup.cfg.seed,
        &setup.basis,
        &frame,
        setup.cfg.tol,
    )?;
    all_pass &= control.failures > 0;
    emit(
        setup,
        out,
        Payload {
            betas,
            ground_state_member: member.member,
            ground_state_worst_eigenvalue: member.worst_eigenvalue,
            min_sample_overlap: min_overlap,
            negative_control_failures: control.failures,
            pass: all_pass,
        },
    )?;
    if !all_pass {
        return Err(Failure::Physics("cone-positivity check failed".into()));
    }
    Ok(())
}

fn run_verify(setup: &Setup, out: &Option<PathBuf>) -> RunResult<()> {
    let outcomes = pamlab::acceptance::run_all();
    for o in &outcomes {
        eprintln!(
            "criterion {:02} [{}] {} ({:.2}s): {}",
            o.id,
            if o.pass { "pass" } else { "FAIL" },
            o.name,
            o.seconds,
            o.detail
        );
    }
    let all_pass = outcomes.iter().all(|o| o.pass);
    #[derive(Serialize)]
    struct Payload {
        outcomes: Vec<pamlab::acceptance::CriterionOutcome>,
        pass: bool,
    }
    emit(
        setup,
        out,
        Payload {
            outcomes,
            pass: all_pass,
        },
    )?;
    if !all_pass {
        return Err(Failure::Physics("acceptance suite failed".into()));
    }
    Ok(())
}

fn solver_opts(setup: &Setup) -> SolverOpts {
    SolverOpts {
        seed: setup.cfg.seed,
        ..SolverOpts::default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let setup = match build_setup(&cli) {
        Ok(s) => s,
        Err(Failure::Input(msg)) | Err(Failure::Physics(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Validate => run_validate(&setup, &cli.out),
        Command::Spectrum => run_spectrum(&setup, &cli.out),
        Command::Correlators => run_correlators(&setup, &cli.out),
        Command::Graph { xd, xf, yd, yf } => run_graph(&setup, &cli.out, *xd, *xf, *yd, *yf),
        Command::Positivity => run_positivity(&setup, &cli.out),
        Command::Verify => run_verify(&setup, &cli.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Physics(msg)) => {
            eprintln!("physics violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
