//! Run configuration: defaults, then the TOML config file, then flags.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use latticeweave::lattice::{BipartitionMode, ConstructionSequence, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    #[value(name = "i")]
    #[serde(rename = "i")]
    I,
    #[value(name = "ii")]
    #[serde(rename = "ii")]
    II,
    Custom,
}

impl SchemeChoice {
    pub fn name(self) -> &'static str {
        match self {
            SchemeChoice::I => "i",
            SchemeChoice::II => "ii",
            SchemeChoice::Custom => "custom",
        }
    }

    pub fn builtin(self) -> Option<Scheme> {
        match self {
            SchemeChoice::I => Some(Scheme::I),
            SchemeChoice::II => Some(Scheme::II),
            SchemeChoice::Custom => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Tableau,
    Statevector,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    None,
    Dephasing,
    Ising,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::None => "none",
            Channel::Dephasing => "dephasing",
            Channel::Ising => "ising",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InsertionChoice {
    AfterInit,
    PerGate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BipartitionChoice {
    Columns,
    Species,
}

impl From<BipartitionChoice> for BipartitionMode {
    fn from(b: BipartitionChoice) -> Self {
        match b {
            BipartitionChoice::Columns => BipartitionMode::ByColumns,
            BipartitionChoice::Species => BipartitionMode::BySpecies,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Postselect {
    Plus,
    Random,
}

/// An angle as written by the user: a number or an expression like `pi/20`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Number(f64),
    Text(String),
}

impl AngleValue {
    pub fn resolve(&self) -> Result<f64, CliError> {
        match self {
            AngleValue::Number(v) => check_angle(*v, &v.to_string()),
            AngleValue::Text(s) => parse_angle(s),
        }
    }
}

fn check_angle(v: f64, text: &str) -> Result<f64, CliError> {
    if !v.is_finite() || v < 0.0 {
        return Err(CliError::Config(format!("angle {text:?} must be finite and non-negative")));
    }
    Ok(v)
}

/// Parses `0.1`, `pi`, `pi/20`, `3pi/4`, `3*pi/4` (also with `π`).
pub fn parse_angle(text: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("cannot parse angle {text:?}"));
    let s = text.trim().to_ascii_lowercase().replace('π', "pi").replace(' ', "");
    let v = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some(at) => {
            let coef = s[..at].trim_end_matches('*');
            let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            let rest = &s[at + 2..];
            let den = match rest.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            if den == 0.0 {
                return Err(bad());
            }
            coef * PI / den
        }
    };
    check_angle(v, text)
}

/// Contents of a config file. Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scheme: Option<SchemeChoice>,
    /// Inline sequence text.
    pub sequence: Option<String>,
    pub sequence_file: Option<PathBuf>,
    pub size: Option<String>,
    pub backend: Option<Backend>,
    pub noise: Option<Channel>,
    pub theta: Option<AngleValue>,
    pub grid: Option<Vec<AngleValue>>,
    pub trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub shots: Option<usize>,
    pub cap: Option<usize>,
    pub insertion: Option<InsertionChoice>,
    pub shared_theta: Option<bool>,
    pub block: Option<[i64; 2]>,
    pub interior: Option<Vec<[f64; 2]>>,
    pub bipartition: Option<BipartitionChoice>,
    pub postselect: Option<Postselect>,
    pub schemes: Option<Vec<SchemeChoice>>,
    pub channels: Option<Vec<Channel>>,
    pub out: Option<PathBuf>,
    pub state_dump: Option<bool>,
    pub plot_script: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(f), Some(dir)) = (cfg.sequence_file.as_mut(), path.parent()) {
            if f.is_relative() {
                *f = dir.join(&*f);
            }
        }
        Ok(cfg)
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeChoice>,
    /// Sequence file for `--scheme custom`.
    #[arg(long)]
    pub sequence: Option<PathBuf>,
    /// Lattice extents, e.g. `4x4`.
    #[arg(long)]
    pub size: Option<String>,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    #[arg(long, value_enum)]
    pub noise: Option<Channel>,
    /// Noise strength theta' (number or `pi/20`-style expression).
    #[arg(long)]
    pub theta: Option<String>,
    /// Comma-separated theta' grid for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<String>>,
    #[arg(long, short = 'n')]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total shots per setting for the sampled estimator.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Statevector qubit cap.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, value_enum)]
    pub insertion: Option<InsertionChoice>,
    /// Draw one angle per trajectory instead of one per site or gate.
    #[arg(long)]
    pub shared_theta: Option<bool>,
    /// Unit-block offset in doubled coordinates, e.g. `2,0`.
    #[arg(long)]
    pub block: Option<String>,
    /// Interior site by position, e.g. `--site 1.5,0.5`; repeatable.
    #[arg(long = "site")]
    pub sites: Vec<String>,
    #[arg(long, value_enum)]
    pub bipartition: Option<BipartitionChoice>,
    #[arg(long, value_enum)]
    pub postselect: Option<Postselect>,
    /// Schemes swept by `sweep`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeChoice>>,
    /// Channels swept by `sweep`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub channels: Option<Vec<Channel>>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Write the final amplitudes (statevector builds).
    #[arg(long)]
    pub state_dump: bool,
    /// Also write a matplotlib script for the emitted CSVs.
    #[arg(long)]
    pub plot_script: bool,
}

/// Fully resolved configuration. Everything except output locations and
/// the plot/dump switches enters the config hash.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scheme: SchemeChoice,
    pub sequence: Option<String>,
    pub lx: i64,
    pub ly: i64,
    pub backend: Backend,
    pub noise: Channel,
    pub theta_prime: f64,
    pub grid: Vec<f64>,
    pub trajectories: usize,
    pub seed: u64,
    pub shots: usize,
    pub cap: usize,
    pub insertion: Option<InsertionChoice>,
    pub shared_theta: bool,
    pub block: [i64; 2],
    /// Interior positions in doubled coordinates.
    pub interior: Option<Vec<[i64; 2]>>,
    pub bipartition: Option<BipartitionChoice>,
    pub postselect: Postselect,
    pub schemes: Vec<SchemeChoice>,
    pub channels: Vec<Channel>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub state_dump: bool,
    #[serde(skip)]
    pub plot_script: bool,
}

pub fn default_grid() -> Vec<f64> {
    vec![0.0, PI / 40.0, PI / 20.0, PI / 10.0, PI / 5.0, PI / 2.0]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: SchemeChoice::I,
            sequence: None,
            lx: 3,
            ly: 3,
            backend: Backend::Auto,
            noise: Channel::None,
            theta_prime: 0.0,
            grid: default_grid(),
            trajectories: 2000,
            seed: 1,
            shots: 0,
            cap: latticeweave::statevector::DEFAULT_QUBIT_CAP,
            insertion: None,
            shared_theta: false,
            block: [0, 0],
            interior: None,
            bipartition: None,
            postselect: Postselect::Random,
            schemes: vec![SchemeChoice::I, SchemeChoice::II],
            channels: vec![Channel::Dephasing, Channel::Ising],
            out: PathBuf::from("out"),
            state_dump: false,
            plot_script: false,
        }
    }
}

fn parse_size(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Config(format!("size {s:?} must look like 4x4"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let lx = a.trim().parse().map_err(|_| bad())?;
    let ly = b.trim().parse().map_err(|_| bad())?;
    Ok((lx, ly))
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<[T; 2], CliError> {
    let bad = || CliError::Config(format!("{what} {s:?} must look like a,b"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

fn doubled(p: [f64; 2]) -> Result<[i64; 2], CliError> {
    let d = [p[0] * 2.0, p[1] * 2.0];
    if d.iter().any(|v| (v - v.round()).abs() > 1e-9) {
        return Err(CliError::Config(format!("site position ({}, {}) is not on the half-integer grid", p[0], p[1])));
    }
    Ok([d[0].round() as i64, d[1].round() as i64])
}

fn read_sequence(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut c = RunConfig::default();
        if let Some(v) = file.scheme {
            c.scheme = v;
        }
        if let Some(p) = &file.sequence_file {
            c.sequence = Some(read_sequence(p)?);
        }
        if let Some(s) = file.sequence {
            c.sequence = Some(s);
        }
        if let Some(s) = &file.size {
            (c.lx, c.ly) = parse_size(s)?;
        }
        c.backend = file.backend.unwrap_or(c.backend);
        c.noise = file.noise.unwrap_or(c.noise);
        if let Some(t) = &file.theta {
            c.theta_prime = t.resolve()?;
        }
        if let Some(g) = &file.grid {
            c.grid = g.iter().map(AngleValue::resolve).collect::<Result<_, _>>()?;
        }
        c.trajectories = file.trajectories.unwrap_or(c.trajectories);
        c.seed = file.seed.unwrap_or(c.seed);
        c.shots = file.shots.unwrap_or(c.shots);
        c.cap = file.cap.unwrap_or(c.cap);
        c.insertion = file.insertion.or(c.insertion);
        c.shared_theta = file.shared_theta.unwrap_or(c.shared_theta);
        c.block = file.block.unwrap_or(c.block);
        if let Some(sites) = &file.interior {
            c.interior = Some(sites.iter().map(|&p| doubled(p)).collect::<Result<_, _>>()?);
        }
        c.bipartition = file.bipartition.or(c.bipartition);
        c.postselect = file.postselect.unwrap_or(c.postselect);
        if let Some(s) = file.schemes {
            c.schemes = s;
        }
        if let Some(ch) = file.channels {
            c.channels = ch;
        }
        c.out = file.out.unwrap_or(c.out);
        c.state_dump = file.state_dump.unwrap_or(c.state_dump);
        c.plot_script = file.plot_script.unwrap_or(c.plot_script);

        if let Some(v) = args.scheme {
            c.scheme = v;
        }
        if let Some(p) = &args.sequence {
            c.sequence = Some(read_sequence(p)?);
        }
        if let Some(s) = &args.size {
            (c.lx, c.ly) = parse_size(s)?;
        }
        c.backend = args.backend.unwrap_or(c.backend);
        c.noise = args.noise.unwrap_or(c.noise);
        if let Some(t) = &args.theta {
            c.theta_prime = parse_angle(t)?;
        }
        if let Some(g) = &args.grid {
            c.grid = g.iter().map(|s| parse_angle(s)).collect::<Result<_, _>>()?;
        }
        c.trajectories = args.trajectories.unwrap_or(c.trajectories);
        c.seed = args.seed.unwrap_or(c.seed);
        c.shots = args.shots.unwrap_or(c.shots);
        c.cap = args.cap.unwrap_or(c.cap);
        c.insertion = args.insertion.or(c.insertion);
        c.shared_theta = args.shared_theta.unwrap_or(c.shared_theta);
        if let Some(b) = &args.block {
            c.block = parse_pair(b, "block offset")?;
        }
        if !args.sites.is_empty() {
            c.interior = Some(
                args.sites.iter().map(|s| parse_pair::<f64>(s, "site").and_then(doubled)).collect::<Result<_, _>>()?,
            );
        }
        c.bipartition = args.bipartition.or(c.bipartition);
        c.postselect = args.postselect.unwrap_or(c.postselect);
        if let Some(s) = &args.schemes {
            c.schemes = s.clone();
        }
        if let Some(ch) = &args.channels {
            c.channels = ch.clone();
        }
        if let Some(o) = &args.out {
            c.out = o.clone();
        }
        c.state_dump |= args.state_dump;
        c.plot_script |= args.plot_script;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.lx < 1 || self.ly < 1 {
            return Err(CliError::Config(format!("lattice extents must be positive (got {}x{})", self.lx, self.ly)));
        }
        if self.trajectories == 0 {
            return Err(CliError::Config("trajectories must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(CliError::Config("theta grid is empty".into()));
        }
        if self.schemes.is_empty() || self.channels.is_empty() {
            return Err(CliError::Config("sweep needs at least one scheme and one channel".into()));
        }
        let needs_sequence = self.scheme == SchemeChoice::Custom || self.schemes.contains(&SchemeChoice::Custom);
        if needs_sequence && self.sequence.is_none() {
            return Err(CliError::Config("scheme custom needs a sequence (--sequence or sequence_file)".into()));
        }
        if self.block.iter().any(|v| v % 2 != 0) {
            return Err(CliError::Config("block offset must be even in doubled coordinates".into()));
        }
        Ok(())
    }

    /// Construction sequence for `scheme` on this lattice.
    pub fn sequence_for(
        &self,
        scheme: SchemeChoice,
        lattice: &latticeweave::Lattice,
    ) -> Result<ConstructionSequence, CliError> {
        match scheme.builtin() {
            Some(s) => Ok(s.sequence(lattice)),
            None => {
                let text = self.sequence.as_deref().unwrap_or_default();
                Ok(text.parse::<ConstructionSequence>()?)
            }
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// First line of every CSV.
    pub fn provenance(&self) -> String {
        format!("# latticeweave {} seed={} config={}", env!("CARGO_PKG_VERSION"), self.seed, self.hash())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scheme {} on {}x{}", self.scheme.name(), self.lx, self.ly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert!((parse_angle("pi/20").unwrap() - PI / 20.0).abs() < 1e-15);
        assert!((parse_angle("3*pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_angle("3pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_angle("π").unwrap() - PI).abs() < 1e-15);
        assert!(parse_angle("-0.1").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pie").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("lw-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "scheme = \"ii\"\nsize = \"5x3\"\nseed = 7\ngrid = [0, \"pi/5\"]\n").unwrap();
        let args = RunArgs { config: Some(path), seed: Some(9), ..Default::default() };
        let c = RunConfig::resolve(&args).unwrap();
        assert_eq!(c.scheme, SchemeChoice::II);
        assert_eq!((c.lx, c.ly), (5, 3));
        assert_eq!(c.seed, 9);
        assert_eq!(c.grid, vec![0.0, PI / 5.0]);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = toml::from_str::<FileConfig>("sceme = \"i\"\n").unwrap_err();
        assert!(e.to_string().contains("sceme"));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig { out: PathBuf::from("elsewhere"), plot_script: true, ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 2, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }
}
