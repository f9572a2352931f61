use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::ConstellationKind;
use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::stcodes::SchemeKind;

/// Which family of curves an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Ergodic capacity, average stacked rate and every analytic bound.
    ErgodicRates,
    /// `C / R_sA` with its analytic band.
    Ratio,
    /// `C - R_sA` with its analytic band.
    AbsLoss,
    /// Density of the log condition number, with and without reduction.
    CondPdf,
    /// Bit error rates.
    Ber,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ErgodicRates => "ERGODIC_RATES",
            Self::Ratio => "RATIO",
            Self::AbsLoss => "ABS_LOSS",
            Self::CondPdf => "COND_PDF",
            Self::Ber => "BER",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ERGODIC_RATES" => Ok(Self::ErgodicRates),
            "RATIO" => Ok(Self::Ratio),
            "ABS_LOSS" => Ok(Self::AbsLoss),
            "COND_PDF" => Ok(Self::CondPdf),
            "BER" => Ok(Self::Ber),
            other => Err(format!("unknown experiment kind '{other}'")),
        }
    }
}

/// A code paired with the constellation it carries, written `scheme:constellation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec {
    pub scheme: SchemeKind,
    pub constellation: ConstellationKind,
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scheme, self.constellation)
    }
}

impl FromStr for SchemeSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (scheme, constellation) = match s.split_once(':') {
            Some((a, b)) => (a, b),
            None => (s, "qam4"),
        };
        Ok(Self {
            scheme: scheme.parse().map_err(|e: Error| e.to_string())?,
            constellation: constellation.parse().map_err(|e: Error| e.to_string())?,
        })
    }
}

/// Transmit and receive antenna counts, written `n_t x n_r` (e.g. `4x2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Antennas {
    pub n_t: usize,
    pub n_r: usize,
}

impl fmt::Display for Antennas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_t, self.n_r)
    }
}

impl FromStr for Antennas {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (t, r) = s.split_once(['x', 'X']).ok_or_else(|| format!("antenna pair '{s}' is not of the form NTxNR"))?;
        let n = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad antenna count '{v}'"));
        Ok(Self { n_t: n(t)?, n_r: n(r)? })
    }
}

/// A fully parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub antennas: Vec<Antennas>,
    pub schemes: Vec<SchemeSpec>,
    pub detectors: Vec<DetectorKind>,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    /// Channel realizations per SNR point (every experiment kind).
    pub trials: usize,
    /// Code blocks sent per channel realization in BER runs.
    pub blocks_per_channel: usize,
    pub bins: usize,
    pub max_ln_cond: f64,
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 12] = [
    "name",
    "kind",
    "antennas",
    "schemes",
    "detectors",
    "snr_db",
    "seed",
    "trials",
    "blocks_per_channel",
    "bins",
    "max_ln_cond",
    "out",
];

impl ExperimentSpec {
    /// Defaults for every optional key.
    pub fn new(name: &str, kind: ExperimentKind, antennas: Vec<Antennas>) -> Self {
        Self {
            name: name.to_string(),
            kind,
            antennas,
            schemes: Vec::new(),
            detectors: Vec::new(),
            snr_db: (0..=20).map(|k| 2.0 * k as f64).collect(),
            seed: 1,
            trials: 10_000,
            blocks_per_channel: 4,
            bins: 60,
            max_ln_cond: 6.0,
            out: None,
        }
    }

    /// Flat `key = value` text that [`parse_spec`] reads back to `self`.
    pub fn to_spec_string(&self) -> String {
        let join = |items: Vec<String>| items.join(", ");
        let mut s = String::new();
        s += &format!("name = {}\n", self.name);
        s += &format!("kind = {}\n", self.kind);
        s += &format!("antennas = {}\n", join(self.antennas.iter().map(|a| a.to_string()).collect()));
        if !self.schemes.is_empty() {
            s += &format!("schemes = {}\n", join(self.schemes.iter().map(|a| a.to_string()).collect()));
        }
        if !self.detectors.is_empty() {
            s += &format!("detectors = {}\n", join(self.detectors.iter().map(|a| a.to_string()).collect()));
        }
        s += &format!("snr_db = {}\n", join(self.snr_db.iter().map(|v| format!("{v:?}")).collect()));
        s += &format!("seed = {}\n", self.seed);
        s += &format!("trials = {}\n", self.trials);
        s += &format!("blocks_per_channel = {}\n", self.blocks_per_channel);
        s += &format!("bins = {}\n", self.bins);
        s += &format!("max_ln_cond = {:?}\n", self.max_ln_cond);
        if let Some(out) = &self.out {
            s += &format!("out = {}\n", out.display());
        }
        s
    }
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

/// `start:step:stop` (inclusive) or a comma-separated list.
fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number '{}'", v.trim()));
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 1 {
        return parse_list::<f64>(value).map_err(|_| format!("bad SNR list '{value}'"));
    }
    if parts.len() != 3 {
        return Err(format!("SNR range '{value}' must be start:step:stop"));
    }
    let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || stop < start {
        return Err(format!("SNR range '{value}' needs a positive step and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// Parses spec text. Lines are `key = value`; `#` starts a comment.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut seen: Vec<(&str, usize)> = Vec::new();
    let mut values: Vec<(&str, &str, usize)> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', found '{content}'")))?;
        let key = key.trim();
        let Some(&canonical) = KEYS.iter().find(|k| **k == key) else {
            return Err(err(line, format!("unknown key '{key}'")));
        };
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == canonical) {
            return Err(err(line, format!("key '{key}' repeated (first set on line {first})")));
        }
        seen.push((canonical, line));
        values.push((canonical, value.trim(), line));
    }
    let find = |key: &str| values.iter().find(|(k, _, _)| *k == key).map(|&(_, v, l)| (v, l));
    let missing = |key: &str| err(last_line + 1, format!("required key '{key}' is missing"));

    let (kind_text, kind_line) = find("kind").ok_or_else(|| missing("kind"))?;
    let kind = kind_text.parse().map_err(|e| err(kind_line, e))?;
    let (ant_text, ant_line) = find("antennas").ok_or_else(|| missing("antennas"))?;
    let antennas = parse_list::<Antennas>(ant_text).map_err(|e| err(ant_line, e))?;
    let name = find("name").map(|(v, _)| v.to_string()).unwrap_or_else(|| kind_text.to_ascii_lowercase());
    let mut spec = ExperimentSpec::new(&name, kind, antennas);

    for &(key, value, line) in &values {
        let int = |v: &str| v.parse::<usize>().map_err(|_| err(line, format!("'{key}' must be a non-negative integer, got '{v}'")));
        match key {
            "schemes" => spec.schemes = parse_list(value).map_err(|e| err(line, e))?,
            "detectors" => spec.detectors = parse_list(value).map_err(|e| err(line, e))?,
            "snr_db" => spec.snr_db = parse_grid(value).map_err(|e| err(line, e))?,
            "seed" => spec.seed = value.parse().map_err(|_| err(line, format!("bad seed '{value}'")))?,
            "trials" => spec.trials = int(value)?,
            "blocks_per_channel" => spec.blocks_per_channel = int(value)?,
            "bins" => spec.bins = int(value)?,
            "max_ln_cond" => {
                spec.max_ln_cond = value.parse().map_err(|_| err(line, format!("bad number '{value}'")))?
            }
            "out" => spec.out = Some(PathBuf::from(value)),
            _ => {}
        }
    }
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    parse_spec(&std::fs::read_to_string(path)?)
}
