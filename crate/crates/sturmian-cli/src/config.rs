//! Run configuration: parsing, defaults and domain validation.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use sturmian::cf::{Frequency, GaussSampler};
use sturmian::verify::Suite;

/// The command being run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bands,
    Gaps,
    Dims,
    Pressure,
    Lyapunov,
    Dos,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::Gaps => "gaps",
            Command::Dims => "dims",
            Command::Pressure => "pressure",
            Command::Lyapunov => "lyapunov",
            Command::Dos => "dos",
            Command::Verify => "verify",
        }
    }
}

/// Artifact format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

/// What the `dos` command emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DosOutput {
    /// `L̂`, `d̂` and its bracket, `θ̂`, `ϱ̂`.
    Dimension,
    /// Per-path local dimensions behind the estimate.
    Paths,
    /// Exact masses of all fiber words of one order.
    Masses,
    /// Eigenvalues of one periodic approximant.
    Eigenvalues,
}

/// What the `lyapunov` command emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LyapunovOutput {
    /// `φ̂(x)` on a grid.
    Curve,
    /// `ρ̂` and its bracket.
    Rho,
}

/// How a frequency was specified on the command line.
///
/// * `1,periodic` / `1,2,periodic` — the listed digits repeated forever;
/// * `3,1,4` — a finite digit list;
/// * `5;1,2` — prefix `5` followed by the period `1,2` repeated forever;
/// * `gauss:SEED:STREAM` (or `gauss:SEED`) — a Gauss-measure sample;
/// * `@path.json` — a frequency serialised as JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreqSpec {
    Digits(Vec<u32>),
    Periodic { prefix: Vec<u32>, period: Vec<u32> },
    Gauss { seed: u64, stream: u64 },
    Json(PathBuf),
}

fn parse_digits(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let d: u32 = t
                .trim()
                .parse()
                .with_context(|| format!("bad digit {t:?}"))?;
            if d == 0 {
                bail!("continued-fraction digits must be positive, got 0");
            }
            Ok(d)
        })
        .collect()
}

impl FromStr for FreqSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix('@') {
            return Ok(FreqSpec::Json(PathBuf::from(path)));
        }
        if let Some(rest) = s.strip_prefix("gauss:") {
            let mut it = rest.split(':');
            let seed = it
                .next()
                .unwrap_or("")
                .parse()
                .context("gauss:SEED[:STREAM] needs an integer seed")?;
            let stream = it
                .next()
                .map(str::parse)
                .transpose()
                .context("bad stream id")?
                .unwrap_or(0);
            if it.next().is_some() {
                bail!("expected gauss:SEED[:STREAM], got {s:?}");
            }
            return Ok(FreqSpec::Gauss { seed, stream });
        }
        if let Some((prefix, period)) = s.split_once(';') {
            let period = parse_digits(period.trim_end_matches(",periodic"))?;
            if period.is_empty() {
                bail!("empty period in {s:?}");
            }
            return Ok(FreqSpec::Periodic {
                prefix: parse_digits(prefix)?,
                period,
            });
        }
        if let Some(body) = s.strip_suffix("periodic") {
            let period = parse_digits(body)?;
            if period.is_empty() {
                bail!("empty period in {s:?}");
            }
            return Ok(FreqSpec::Periodic {
                prefix: vec![],
                period,
            });
        }
        let digits = parse_digits(s)?;
        if digits.is_empty() {
            bail!("empty frequency specification");
        }
        Ok(FreqSpec::Digits(digits))
    }
}

impl std::fmt::Display for FreqSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |d: &[u32]| d.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match self {
            FreqSpec::Digits(d) => write!(f, "{}", join(d)),
            FreqSpec::Periodic { prefix, period } if prefix.is_empty() => {
                write!(f, "{},periodic", join(period))
            }
            FreqSpec::Periodic { prefix, period } => write!(f, "{};{}", join(prefix), join(period)),
            FreqSpec::Gauss { seed, stream } => write!(f, "gauss:{seed}:{stream}"),
            FreqSpec::Json(p) => write!(f, "@{}", p.display()),
        }
    }
}

impl Serialize for FreqSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FreqSpec {
    /// Materialise the frequency with at least `depth` digits available.
    pub fn build(&self, depth: usize) -> Result<Frequency> {
        Ok(match self {
            FreqSpec::Digits(d) => Frequency::explicit(d.clone())?,
            FreqSpec::Periodic { prefix, period } => {
                Frequency::periodic(prefix.clone(), period.clone())?
            }
            FreqSpec::Gauss { seed, stream } => GaussSampler::new(*seed, *stream).sample(depth)?,
            FreqSpec::Json(p) => {
                let s = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                Frequency::from_json(&s)?
            }
        })
    }
}

/// A fully resolved, validated run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq: Option<FreqSpec>,
    pub lambda: f64,
    pub depth: usize,
    pub samples: usize,
    pub truncation: usize,
    pub seed: u64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dos_output: Option<DosOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_output: Option<LyapunovOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STURMIAN_OUT_DIR";

impl RunConfig {
    /// Check the domain preconditions, naming the one that is violated.
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            bail!("--lambda must be finite, got {}", self.lambda);
        }
        match self.command {
            Command::Bands if self.lambda <= 4.0 => {
                bail!("bands needs --lambda > 4, got {}", self.lambda)
            }
            Command::Dims | Command::Dos | Command::Gaps if self.lambda < 24.0 => {
                bail!(
                    "{} needs --lambda >= 24, got {}",
                    self.command.name(),
                    self.lambda
                )
            }
            Command::Pressure if self.freq.is_none() && self.lambda < 24.0 => {
                bail!("relativized pressure needs --lambda >= 24, got {} (pass --freq for a single frequency)", self.lambda)
            }
            Command::Pressure if self.lambda <= 4.0 => {
                bail!("pressure needs --lambda > 4, got {}", self.lambda)
            }
            _ => {}
        }
        for (name, v) in [
            ("depth", self.depth),
            ("samples", self.samples),
            ("truncation", self.truncation),
        ] {
            if v == 0 {
                bail!("--{name} must be a positive integer");
            }
        }
        if let Some(g) = self.grid {
            if g < 2 {
                bail!("--grid must be at least 2, got {g}");
            }
        }
        if self.command == Command::Gaps && self.depth < 2 {
            bail!("gaps needs --depth >= 2 (gaps of order n live between order-(n+1) bands)");
        }
        let needs_freq = matches!(self.command, Command::Bands | Command::Gaps)
            || matches!(
                self.dos_output,
                Some(DosOutput::Masses | DosOutput::Eigenvalues)
            );
        if needs_freq && self.freq.is_none() {
            bail!("{} needs --freq", self.command.name());
        }
        if self.command == Command::Verify {
            Suite::from_str(self.suite.as_deref().unwrap_or("all")).map_err(|e| anyhow!("{e}"))?;
        }
        Ok(())
    }

    /// Where the artifact goes: `None` means standard output.
    ///
    /// A relative `--out` is resolved against `$STURMIAN_OUT_DIR` when set;
    /// without `--out`, the variable (if set) selects `<dir>/<command>.<ext>`.
    pub fn artifact_path(&self) -> Option<PathBuf> {
        let dir = std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(PathBuf::from);
        match (&self.out, dir) {
            (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(d)) => Some(d.join(format!(
                "{}.{}",
                self.command.name(),
                self.format.extension()
            ))),
            (None, None) => None,
        }
    }

    /// The frequency (validated to be present).
    pub fn frequency(&self, digits_needed: usize) -> Result<Frequency> {
        self.freq
            .as_ref()
            .ok_or_else(|| anyhow!("{} needs --freq", self.command.name()))?
            .build(digits_needed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_periodic_specs() {
        assert_eq!(
            "1,periodic".parse::<FreqSpec>().unwrap(),
            FreqSpec::Periodic {
                prefix: vec![],
                period: vec![1]
            }
        );
        assert_eq!(
            "1,2,periodic".parse::<FreqSpec>().unwrap(),
            FreqSpec::Periodic {
                prefix: vec![],
                period: vec![1, 2]
            }
        );
        assert_eq!(
            "5;1,2".parse::<FreqSpec>().unwrap(),
            FreqSpec::Periodic {
                prefix: vec![5],
                period: vec![1, 2]
            }
        );
    }

    #[test]
    fn parses_explicit_and_sampled_specs() {
        assert_eq!(
            "3,1,4".parse::<FreqSpec>().unwrap(),
            FreqSpec::Digits(vec![3, 1, 4])
        );
        assert_eq!(
            "gauss:7:3".parse::<FreqSpec>().unwrap(),
            FreqSpec::Gauss { seed: 7, stream: 3 }
        );
        assert_eq!(
            "gauss:7".parse::<FreqSpec>().unwrap(),
            FreqSpec::Gauss { seed: 7, stream: 0 }
        );
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "0,periodic",
            "periodic",
            "1,x",
            "gauss:",
            "gauss:1:2:3",
            "4;",
        ] {
            assert!(
                bad.parse::<FreqSpec>().is_err(),
                "{bad:?} should be rejected"
            );
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["1,periodic", "1,2,periodic", "5;1,2", "3,1,4", "gauss:7:3"] {
            assert_eq!(s.parse::<FreqSpec>().unwrap().to_string(), s);
        }
    }
}
