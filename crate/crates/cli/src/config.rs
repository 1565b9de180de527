//! Run configuration: `key = value` files merged with command-line flags.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use cooling_core::control::OptimizerConfig;
use cooling_core::dynamics::NoiseParams;
use cooling_core::fock::FockSpace;
use cooling_core::model::SystemParams;

use crate::error::CliError;

/// Every accepted key with its default (`None` means unset).
const KEYS: &[(&str, Option<&str>)] = &[
    ("omega_a", Some("1")),
    ("lambda", Some("0.02")),
    ("epsilon", Some("0")),
    ("crt", Some("false")),
    ("n_th", Some("1")),
    ("n_max", Some("auto")),
    ("gamma", Some("0")),
    ("bath_nth", None),
    ("n_reps", Some("20")),
    ("dense_samples", Some("20")),
    ("dt", Some("0.01")),
    ("n_c", Some("10")),
    ("n_omega", Some("10")),
    ("tau_mult", Some("3")),
    ("restarts", Some("5")),
    ("max_evals", Some("40000")),
    ("pulse", None),
    ("seed", Some("0")),
    ("jobs", Some("1")),
    ("out", Some("out")),
    ("sweep_n_reps", None),
    ("sweep_n_th", None),
    ("sweep_gamma", None),
    ("sweep_epsilon", None),
    ("sweep_lambda", None),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Gs,
    Cs,
    SsOpt,
    SsRun,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Gs => "gs",
            Mode::Cs => "cs",
            Mode::SsOpt => "ss-opt",
            Mode::SsRun => "ss-run",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Auto,
    Fixed(usize),
}

impl Truncation {
    pub fn space(self, n_th: f64) -> Result<FockSpace, CliError> {
        match self {
            Truncation::Auto => Ok(FockSpace::auto(n_th)),
            Truncation::Fixed(n) => Ok(FockSpace::new(n)?),
        }
    }
}

/// Parameter swept in `sweep` mode, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    NReps,
    NTh,
    Gamma,
    Epsilon,
    Lambda,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::NReps, Axis::NTh, Axis::Gamma, Axis::Epsilon, Axis::Lambda];

    pub fn key(self) -> &'static str {
        match self {
            Axis::NReps => "sweep_n_reps",
            Axis::NTh => "sweep_n_th",
            Axis::Gamma => "sweep_gamma",
            Axis::Epsilon => "sweep_epsilon",
            Axis::Lambda => "sweep_lambda",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            Axis::NReps => "n_reps",
            Axis::NTh => "n_th",
            Axis::Gamma => "gamma",
            Axis::Epsilon => "epsilon",
            Axis::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: SystemParams,
    pub n_th: f64,
    pub n_max: Truncation,
    pub gamma: f64,
    pub bath_nth: f64,
    pub n_reps: usize,
    pub dense_samples: usize,
    pub dt: f64,
    pub n_c: usize,
    pub n_omega: usize,
    pub tau_mult: f64,
    pub optimizer: OptimizerConfig,
    pub pulse: Option<PathBuf>,
    pub jobs: usize,
    pub out: PathBuf,
    pub sweep: Vec<(Axis, Vec<f64>)>,
    /// Effective key/value pairs, for the manifest.
    pub echo: BTreeMap<String, String>,
    /// Keys set by the file or flags rather than defaulted.
    pub explicit: BTreeSet<String>,
}

impl RunConfig {
    pub fn noise(&self) -> Option<NoiseParams> {
        (self.gamma > 0.0).then_some(NoiseParams { gamma_d: self.gamma, n_th_bath: self.bath_nth })
    }

    pub fn space(&self) -> Result<FockSpace, CliError> {
        self.n_max.space(self.n_th)
    }
}

/// Parses a `key = value` file. `#` starts a comment.
pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected `key = value`", origin.display(), i + 1))
        })?;
        let key = key.trim().replace('-', "_");
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("{}:{}: duplicate key `{key}`", origin.display(), i + 1)));
        }
    }
    Ok(map)
}

/// Merges defaults, file values and flags (later wins) and validates.
pub fn build(
    mode: Mode,
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
) -> Result<RunConfig, CliError> {
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    let mut explicit = BTreeSet::new();
    for (k, d) in KEYS {
        if let Some(d) = d {
            values.insert(k.to_string(), d.to_string());
        }
    }
    for (k, v) in file.into_iter().chain(flags) {
        if !KEYS.iter().any(|(known, _)| *known == k) {
            return Err(CliError::Config(format!("unknown configuration key `{k}`")));
        }
        explicit.insert(k.clone());
        values.insert(k, v);
    }
    let get = |k: &str| values.get(k).map(String::as_str);
    let real = |k: &str| -> Result<f64, CliError> {
        let v = get(k).ok_or_else(|| CliError::Config(format!("missing key `{k}`")))?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(CliError::Config(format!("`{k}`: malformed number `{v}`"))),
        }
    };
    let int = |k: &str| -> Result<usize, CliError> {
        let v = get(k).ok_or_else(|| CliError::Config(format!("missing key `{k}`")))?;
        v.parse::<usize>().map_err(|_| CliError::Config(format!("`{k}`: expected a non-negative integer, got `{v}`")))
    };
    let positive = |k: &str| -> Result<usize, CliError> {
        let v = int(k)?;
        if v == 0 {
            return Err(CliError::Config(format!("`{k}` must be at least 1")));
        }
        Ok(v)
    };

    let params = SystemParams {
        omega: 1.0,
        omega_a: real("omega_a")?,
        lambda: real("lambda")?,
        epsilon: real("epsilon")?,
        counter_rotating: match get("crt") {
            Some("true") | Some("1") | Some("yes") => true,
            Some("false") | Some("0") | Some("no") => false,
            Some(v) => return Err(CliError::Config(format!("`crt`: expected true or false, got `{v}`"))),
            None => false,
        },
    };
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if mode != Mode::Gs && params.lambda <= 0.0 {
        return Err(CliError::Config(format!("`lambda` must be positive in {} mode", mode.name())));
    }

    let n_th = real("n_th")?;
    if n_th < 0.0 {
        return Err(CliError::Config(format!("`n_th` must be >= 0, got {n_th}")));
    }
    let n_max = match get("n_max") {
        Some("auto") | None => Truncation::Auto,
        Some(_) => {
            let n = int("n_max")?;
            if n < 2 {
                return Err(CliError::Config(format!("`n_max` must be at least 2, got {n}")));
            }
            Truncation::Fixed(n)
        }
    };
    let gamma = real("gamma")?;
    if gamma < 0.0 {
        return Err(CliError::Config(format!("`gamma` must be >= 0, got {gamma}")));
    }
    let bath_nth = if get("bath_nth").is_some() { real("bath_nth")? } else { n_th };
    if bath_nth < 0.0 {
        return Err(CliError::Config(format!("`bath_nth` must be >= 0, got {bath_nth}")));
    }
    let dt = real("dt")?;
    if !(dt > 0.0) {
        return Err(CliError::Config(format!("`dt` must be positive, got {dt}")));
    }
    let tau_mult = real("tau_mult")?;
    if tau_mult < 1.0 {
        return Err(CliError::Config(format!("`tau_mult` must be >= 1 (quantum speed limit), got {tau_mult}")));
    }
    let optimizer = OptimizerConfig {
        max_evals: positive("max_evals")?,
        restarts: positive("restarts")?,
        rng_seed: get("seed")
            .unwrap_or("0")
            .parse::<u64>()
            .map_err(|_| CliError::Config(format!("`seed`: expected an unsigned integer, got `{}`", get("seed").unwrap_or(""))))?,
        ..OptimizerConfig::default()
    };

    let mut sweep = Vec::new();
    for axis in Axis::ALL {
        if let Some(list) = get(axis.key()) {
            sweep.push((axis, parse_grid(axis, list)?));
        }
    }
    if mode == Mode::Sweep && sweep.is_empty() {
        return Err(CliError::Config("sweep mode needs at least one `sweep_*` grid".into()));
    }
    let pulse = get("pulse").map(PathBuf::from);
    if mode == Mode::SsRun && pulse.is_none() {
        return Err(CliError::Config("ss-run needs a pulse file (`pulse` / --pulse)".into()));
    }

    Ok(RunConfig {
        mode,
        params,
        n_th,
        n_max,
        gamma,
        bath_nth,
        n_reps: positive("n_reps")?,
        dense_samples: int("dense_samples")?,
        dt,
        n_c: positive("n_c")?,
        n_omega: positive("n_omega")?,
        tau_mult,
        optimizer,
        pulse,
        jobs: positive("jobs")?,
        out: PathBuf::from(get("out").unwrap_or("out")),
        sweep,
        echo: values.clone(),
        explicit,
    })
}

fn parse_grid(axis: Axis, list: &str) -> Result<Vec<f64>, CliError> {
    let key = axis.key();
    let items: Vec<&str> = list.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(CliError::Config(format!("`{key}`: empty entry in grid `{list}`")));
    }
    items
        .iter()
        .map(|s| {
            let v: f64 = s.parse().map_err(|_| CliError::Config(format!("`{key}`: malformed number `{s}`")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::Config(format!("`{key}`: values must be finite and >= 0, got `{s}`")));
            }
            if axis == Axis::NReps && (v < 1.0 || v.fract() != 0.0) {
                return Err(CliError::Config(format!("`{key}`: repetitions must be positive integers, got `{s}`")));
            }
            Ok(v)
        })
        .collect()
}
