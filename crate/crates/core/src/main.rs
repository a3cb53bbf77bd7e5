//! Command-line front end: builds configured experiments, runs sweeps and
//! emits CSV/JSON artifacts. Flags override config-file entries; unknown
//! config keys are rejected.

use clap::{Args, Parser, Subcommand};
use mzisim::builders::{Coefficients, NmziPosition};
use mzisim::circuit::PolarizedState;
use mzisim::info::{shannon_curve_csv, OutcomeSet, PriorSpec};
use mzisim::wavepacket::{run_nmzi_scenario_with_frames, WavepacketConfig, WavepacketError};
use mzisim::SCHEMA_VERSION;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_STABILITY: u8 = 4;
const EXIT_COMPUTE: u8 = 5;

#[derive(Parser)]
#[command(name = "mzisim", version, about = "Polarized interferometer simulation and information measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key=value config file; command-line flags override file entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the timestamp field so artifacts are byte-identical across runs.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Seed recorded in artifacts for sampling-based studies.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information of a device at a fixed tagging parameter.
    Fisher(FisherArgs),
    /// Shannon mutual information of a device under the tagging prior.
    Shannon(ShannonArgs),
    /// CSV curve of the inner-arm mutual information and its models.
    ShannonCurve(ShannonCurveArgs),
    /// Detection probabilities and conditioned violation strength of the
    /// chained nested MZI over an (N, M) grid.
    SweepChained(SweepChainedArgs),
    /// P_A and F_A of the chained MZI over an (N, theta_w) grid.
    SweepCmzi(SweepCmziArgs),
    /// Post-selected bit-protocol report.
    Protocol(ProtocolArgs),
    /// Wavepacket scenario or calibration.
    Wavepacket(WavepacketArgs),
}

#[derive(Args, Clone, Default)]
struct DeviceArgs {
    /// Device: free | nmzi.
    #[arg(long)]
    device: Option<String>,
    /// Rotator position 0..5 for the nested MZI.
    #[arg(long)]
    position: Option<usize>,
    /// First-splitter reflection coefficient.
    #[arg(long)]
    r1: Option<f64>,
    /// Last-splitter reflection coefficient (defaults to the first
    /// splitter's transmission).
    #[arg(long)]
    r4: Option<f64>,
}

#[derive(Args, Clone)]
struct FisherArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long = "theta-w")]
    theta_w: Option<f64>,
}

#[derive(Args, Clone)]
struct ShannonArgs {
    #[command(flatten)]
    device: DeviceArgs,
    /// Quadrature nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Prior variable: theta | diagonal.
    #[arg(long)]
    prior: Option<String>,
}

#[derive(Args, Clone)]
struct ShannonCurveArgs {
    /// Grid points on [0, 1].
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Clone)]
struct SweepChainedArgs {
    /// Outer splitter counts, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Inner splitter counts, comma separated.
    #[arg(long)]
    m: Option<String>,
    #[arg(long = "theta-w")]
    theta_w: Option<f64>,
    /// Combined grid spec "N=...;M=..." overriding --n/--m.
    #[arg(long)]
    grid: Option<String>,
    /// Also evaluate the blocked (1-bit) detection probabilities.
    #[arg(long)]
    blocked: bool,
}

#[derive(Args, Clone)]
struct SweepCmziArgs {
    #[arg(long)]
    n: Option<String>,
    /// theta_w values, comma separated.
    #[arg(long = "theta-w")]
    theta_w: Option<String>,
    /// Combined grid spec "N=...;THETA=..." overriding --n/--theta-w.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long = "theta-w")]
    theta_w: Option<f64>,
}

#[derive(Args, Clone)]
struct WavepacketArgs {
    /// Spin-coupling strength (0 = off).
    #[arg(long)]
    coupling: Option<f64>,
    /// Recalibrate barrier heights and placement offsets, then print the config.
    #[arg(long)]
    calibrate: bool,
    /// Emit spatially resolved frames (CSV: frame,x,p_up,p_down,potential).
    #[arg(long)]
    fields: bool,
    /// Grid points.
    #[arg(long)]
    n_points: Option<usize>,
    /// Packet momentum.
    #[arg(long)]
    k0: Option<f64>,
    /// Full scenario configuration as a JSON file (grid, packet, layout,
    /// coupling); individual flags override its entries.
    #[arg(long)]
    wp_config: Option<PathBuf>,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let rec = ErrorRecord { error: kind, message };
    eprintln!("{}", serde_json::to_string(&rec).unwrap());
    ExitCode::from(code)
}

/// Flat KEY=VALUE file; '#' starts a comment.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut kv = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(kv)
}

struct FileConfig {
    kv: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl FileConfig {
    fn empty() -> Self {
        Self { kv: BTreeMap::new(), used: Default::default() }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.used.borrow_mut().insert(key.to_string());
        match self.kv.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| format!("config key '{key}': bad value '{v}'")),
        }
    }

    /// Recognized vocabulary across all subcommands; a shared recipe may
    /// carry keys that the current subcommand does not consume.
    const VOCABULARY: [&'static str; 19] = [
        "device", "position", "r1", "r4", "theta_w", "nodes", "prior", "points", "n", "m", "grid",
        "blocked", "epsilon", "t1", "coupling", "fields", "n_points", "k0", "threads",
    ];

    fn check_no_unknown_keys(&self) -> Result<(), String> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self
            .kv
            .keys()
            .filter(|k| !used.contains(*k) && !Self::VOCABULARY.contains(&k.as_str()))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("unknown config keys: {unknown:?}"))
        }
    }
}

/// flag > file > default
fn resolve<T: Clone>(flag: &Option<T>, file: Option<T>, default: T) -> T {
    flag.clone().or(file).unwrap_or(default)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("bad list entry '{p}'")))
        .collect()
}

/// Grid spec "KEY=v1,v2;KEY2=..." returning the requested axis.
fn grid_axis(spec: &str, key: &str) -> Result<Option<String>, String> {
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| format!("bad grid entry '{part}'"))?;
        if k.trim().eq_ignore_ascii_case(key) {
            return Ok(Some(v.trim().to_string()));
        }
    }
    Ok(None)
}

fn build_device(device: &str, position: usize, r1: Option<f64>, r4: Option<f64>) -> Result<(mzisim::Circuit, PolarizedState), String> {
    match device {
        "free" => Ok((mzisim::free_rotator(), PolarizedState::input_h(1, 0).unwrap())),
        "nmzi" => {
            let r1 = r1.unwrap_or(3f64.sqrt() / 2.0);
            if !(0.0..=1.0).contains(&r1) {
                return Err(format!("r1 = {r1} outside [0, 1]"));
            }
            let bs1 = Coefficients::from_r(r1);
            let bs4 = match r4 {
                Some(r4) if (0.0..=1.0).contains(&r4) => Coefficients::from_r(r4),
                Some(r4) => return Err(format!("r4 = {r4} outside [0, 1]")),
                None => Coefficients::from_r(bs1.t),
            };
            let pos = NmziPosition::from_index(position)
                .ok_or_else(|| format!("position {position} outside 0..=5"))?;
            Ok((mzisim::nmzi(bs1, bs4, pos), PolarizedState::input_h(3, 0).unwrap()))
        }
        other => Err(format!("unknown device '{other}'")),
    }
}

fn timestamp(no_timestamp: bool) -> Option<String> {
    if no_timestamp {
        None
    } else {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap_or_default();
        Some(format!("{}", now.as_secs()))
    }
}

enum Artifact {
    Json(serde_json::Value),
    Csv(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(kv) => FileConfig { kv, used: Default::default() },
            Err(e) => return fail("config", e, EXIT_CONFIG),
        },
        None => FileConfig::empty(),
    };
    match run(&cli, &file) {
        Ok(mut artifact) => {
            let seed = cli.seed.or(file.get::<u64>("seed").ok().flatten());
            if let (Some(seed), Artifact::Json(v)) = (seed, &mut artifact) {
                v["seed"] = seed.into();
            }
            match write_artifact(&cli, &file, &artifact) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail("io", e.to_string(), EXIT_IO),
            }
        }
        Err(e) => e,
    }
}

fn run(cli: &Cli, file: &FileConfig) -> Result<Artifact, ExitCode> {
    let cfg_err = |m: String| fail("config", m, EXIT_CONFIG);
    let compute_err = |m: String| fail("compute", m, EXIT_COMPUTE);

    let no_ts = cli.no_timestamp || file.get("no_timestamp").map_err(cfg_err)?.unwrap_or(false);
    let threads = resolve(&cli.threads, file.get("threads").map_err(cfg_err)?, 0usize);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| cfg_err(e.to_string()))?;
    }

    let artifact = match &cli.command {
        Command::Fisher(a) => {
            let device = resolve(&a.device.device, file.get("device").map_err(cfg_err)?, "free".into());
            let position = resolve(&a.device.position, file.get("position").map_err(cfg_err)?, 1usize);
            let r1 = a.device.r1.or(file.get("r1").map_err(cfg_err)?);
            let r4 = a.device.r4.or(file.get("r4").map_err(cfg_err)?);
            let theta_w = resolve(&a.theta_w, file.get("theta_w").map_err(cfg_err)?, 0.0);
            let (circuit, input) = build_device(&device, position, r1, r4).map_err(cfg_err)?;
            let f = mzisim::fisher(&circuit, &input, theta_w, &OutcomeSet::All)
                .map_err(|e| compute_err(e.to_string()))?;
            Artifact::Json(serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "timestamp": timestamp(no_ts),
                "device": device,
                "position": position,
                "theta_w": theta_w,
                "fisher": f.value,
                "method": f.method,
            }))
        }
        Command::Shannon(a) => {
            let device = resolve(&a.device.device, file.get("device").map_err(cfg_err)?, "free".into());
            let position = resolve(&a.device.position, file.get("position").map_err(cfg_err)?, 1usize);
            let r1 = a.device.r1.or(file.get("r1").map_err(cfg_err)?);
            let r4 = a.device.r4.or(file.get("r4").map_err(cfg_err)?);
            let nodes = resolve(&a.nodes, file.get("nodes").map_err(cfg_err)?, 256usize);
            let prior_name = resolve(&a.prior, file.get("prior").map_err(cfg_err)?, "theta".into());
            let prior = match prior_name.as_str() {
                "theta" => PriorSpec::uniform_theta(),
                "diagonal" => PriorSpec::uniform_diagonal(),
                other => return Err(cfg_err(format!("unknown prior '{other}'"))),
            };
            let (circuit, input) = build_device(&device, position, r1, r4).map_err(cfg_err)?;
            let h = mzisim::shannon_mi(&circuit, &input, &prior, nodes)
                .map_err(|e| compute_err(e.to_string()))?;
            Artifact::Json(serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "timestamp": timestamp(no_ts),
                "device": device,
                "position": position,
                "prior": prior_name,
                "nodes": h.quadrature_nodes,
                "shannon_mi": h.value,
                "convergence_delta": h.quadrature_delta,
                "convergence_warning": h.quadrature_warning,
            }))
        }
        Command::ShannonCurve(a) => {
            let points = resolve(&a.points, file.get("points").map_err(cfg_err)?, 401usize);
            Artifact::Csv(shannon_curve_csv(points))
        }
        Command::SweepChained(a) => {
            let grid_spec = resolve(&a.grid, file.get("grid").map_err(cfg_err)?, String::new());
            let mut n_spec = resolve(&a.n, file.get("n").map_err(cfg_err)?, "2,5,10,20,50".into());
            let mut m_spec = resolve(&a.m, file.get("m").map_err(cfg_err)?, "2,5,10,30,100,300,1200".into());
            if !grid_spec.is_empty() {
                if let Some(v) = grid_axis(&grid_spec, "N").map_err(cfg_err)? {
                    n_spec = v;
                }
                if let Some(v) = grid_axis(&grid_spec, "M").map_err(cfg_err)? {
                    m_spec = v;
                }
            }
            let theta_w = resolve(&a.theta_w, file.get("theta_w").map_err(cfg_err)?, 1e-6);
            let blocked = a.blocked || file.get("blocked").map_err(cfg_err)?.unwrap_or(false);
            let n: Vec<usize> = parse_list(&n_spec).map_err(cfg_err)?;
            let m: Vec<usize> = parse_list(&m_spec).map_err(cfg_err)?;
            let mut grid = mzisim::sweep_chained_nmzi(&n, &m, theta_w)
                .map_err(|e| compute_err(e.to_string()))?;
            if blocked {
                for cell in &mut grid.cells {
                    let (p1, p2, ab) = mzisim::chained_detection_probs(cell.n_outer, cell.m_inner, true)
                        .map_err(|e| compute_err(e.to_string()))?;
                    cell.p_d1 = p1;
                    cell.p_d2 = p2;
                    cell.absorbed = ab;
                }
            }
            grid_artifact(cli, file, grid, no_ts)?
        }
        Command::SweepCmzi(a) => {
            let grid_spec = resolve(&a.grid, file.get("grid").map_err(cfg_err)?, String::new());
            let mut n_spec = resolve(&a.n, file.get("n").map_err(cfg_err)?, "2,5,10,20,50,100".into());
            let mut th_spec = resolve(&a.theta_w, file.get("theta_w").map_err(cfg_err)?, "1e-6,1e-4,1e-3,1e-2".into());
            if !grid_spec.is_empty() {
                if let Some(v) = grid_axis(&grid_spec, "N").map_err(cfg_err)? {
                    n_spec = v;
                }
                if let Some(v) = grid_axis(&grid_spec, "THETA").map_err(cfg_err)? {
                    th_spec = v;
                }
            }
            let n: Vec<usize> = parse_list(&n_spec).map_err(cfg_err)?;
            let th: Vec<f64> = parse_list(&th_spec).map_err(cfg_err)?;
            let grid = mzisim::sweep_cmzi(&n, &th).map_err(|e| compute_err(e.to_string()))?;
            grid_artifact(cli, file, grid, no_ts)?
        }
        Command::Protocol(a) => {
            let epsilon = resolve(&a.epsilon, file.get("epsilon").map_err(cfg_err)?, 0.05);
            let t1 = resolve(&a.t1, file.get("t1").map_err(cfg_err)?, 0.02);
            let theta_w = resolve(&a.theta_w, file.get("theta_w").map_err(cfg_err)?, 1e-6);
            let rep = mzisim::protocol_violation(epsilon, t1, theta_w)
                .map_err(|e| compute_err(e.to_string()))?;
            let mut v = serde_json::to_value(&rep).unwrap();
            v["schema_version"] = SCHEMA_VERSION.into();
            v["timestamp"] = timestamp(no_ts).into();
            Artifact::Json(v)
        }
        Command::Wavepacket(a) => {
            let mut cfg = match &a.wp_config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| fail("io", format!("{}: {e}", path.display()), EXIT_IO))?;
                    serde_json::from_str::<WavepacketConfig>(&text)
                        .map_err(|e| cfg_err(format!("wavepacket config: {e}")))?
                }
                None => WavepacketConfig::default(),
            };
            if let Some(n) = a.n_points.or(file.get("n_points").map_err(cfg_err)?) {
                cfg.grid.n_points = n;
            }
            if let Some(k0) = a.k0.or(file.get("k0").map_err(cfg_err)?) {
                cfg.packet_k0 = k0;
            }
            let coupling = resolve(&a.coupling, file.get("coupling").map_err(cfg_err)?, cfg.coupling_strength);
            cfg.coupling_strength = coupling;
            let wp_err = |e: WavepacketError| {
                let code = if matches!(e, WavepacketError::StabilityBound { .. }) {
                    EXIT_STABILITY
                } else {
                    EXIT_COMPUTE
                };
                fail("wavepacket", e.to_string(), code)
            };
            if a.calibrate {
                let calibrated = mzisim::wavepacket::calibrate(&cfg).map_err(wp_err)?;
                let mut v = serde_json::to_value(&calibrated).unwrap();
                v["schema_version"] = SCHEMA_VERSION.into();
                Artifact::Json(v)
            } else {
                let fields = a.fields || file.get("fields").map_err(cfg_err)?.unwrap_or(false);
                let result = run_nmzi_scenario_with_frames(&cfg, coupling != 0.0, fields).map_err(wp_err)?;
                let format = resolve(&cli.format, file.get("format").map_err(cfg_err)?, Format::Json);
                if format == Format::Csv {
                    let mut csv = String::from("frame,x,p_up,p_down,potential\n");
                    if fields {
                        for (k, fr) in result.frames.iter().enumerate() {
                            for i in 0..fr.x.len() {
                                csv.push_str(&format!(
                                    "{k},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                                    fr.x[i], fr.p_up[i], fr.p_down[i], fr.potential[i]
                                ));
                            }
                        }
                    } else {
                        csv = String::from("time,region,p_up,p_down\n");
                        for s in &result.snapshots {
                            for (r, (u, d)) in s.up.iter().zip(&s.down).enumerate() {
                                csv.push_str(&format!("{:.9e},{},{:.9e},{:.9e}\n", s.time, r, u, d));
                            }
                        }
                    }
                    Artifact::Csv(csv)
                } else {
                    let mut v = serde_json::to_value(&result).unwrap();
                    v["schema_version"] = SCHEMA_VERSION.into();
                    v["timestamp"] = timestamp(no_ts).into();
                    Artifact::Json(v)
                }
            }
        }
    };
    // Global keys are always considered recognized.
    let _ = file.get::<String>("format");
    let _ = file.get::<String>("out");
    let _ = file.get::<bool>("no_timestamp");
    let _ = file.get::<u64>("seed");
    file.check_no_unknown_keys().map_err(cfg_err)?;
    Ok(artifact)
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

fn grid_artifact(cli: &Cli, file: &FileConfig, grid: mzisim::SweepGrid, no_ts: bool) -> Result<Artifact, ExitCode> {
    let format = resolve(
        &cli.format,
        file.get("format").map_err(|m| fail("config", m, EXIT_CONFIG))?,
        Format::Json,
    );
    Ok(match format {
        Format::Csv => {
            let mut head = format!("# schema_version,{SCHEMA_VERSION}\n");
            if let Some(ts) = timestamp(no_ts) {
                head.push_str(&format!("# timestamp,{ts}\n"));
            }
            Artifact::Csv(head + &grid.to_csv())
        }
        Format::Json => {
            let mut v = serde_json::to_value(&grid).unwrap();
            v["schema_version"] = SCHEMA_VERSION.into();
            v["timestamp"] = timestamp(no_ts).into();
            if no_ts {
                // Wall-clock metadata also varies between runs.
                v["runtime_seconds"] = 0.0.into();
            }
            Artifact::Json(v)
        }
    })
}

fn write_artifact(cli: &Cli, file: &FileConfig, artifact: &Artifact) -> std::io::Result<()> {
    let out = match &cli.out {
        Some(p) => Some(p.clone()),
        None => file.get::<String>("out").ok().flatten().map(PathBuf::from),
    };
    let text = match artifact {
        Artifact::Json(v) => serde_json::to_string_pretty(v).unwrap() + "\n",
        Artifact::Csv(s) => s.clone(),
    };
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
