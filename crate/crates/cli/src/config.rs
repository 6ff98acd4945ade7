//! Configuration file schema, flag overrides and conversion to the library
//! configuration.

use coopsim::code::{CodeSpec, DecodingAlgo};
use coopsim::detect::NcScaling;
use coopsim::schemes::Scheme;
use coopsim::sim::{CampaignConfig, Topology};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Everything that can be set in a configuration file. Every field has a
/// default, so an empty file is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub stopping: StoppingSection,
    pub decoder: DecoderSection,
    pub topology: TopologySection,
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub schemes: Vec<Scheme>,
    /// Octal generators, e.g. "133,165,171".
    pub codes: Vec<String>,
    pub relays: Vec<usize>,
    /// `start:step:stop` in dB, or a comma-separated list.
    pub snr: String,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingSection {
    pub min_bit_errors: u64,
    pub min_frame_errors: u64,
    pub max_packets: u64,
    pub batch_size: u64,
    /// Skip the rest of a curve once its BER drops below this; 0 disables.
    pub ber_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderSection {
    pub algorithm: DecodingAlgo,
    pub nc_scaling: NcScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySection {
    pub pathloss_exponent: f64,
    pub relay_position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// PARC bounds use spectrum terms up to `f + parc_depth`.
    pub parc_depth: u32,
    /// NCC bounds use compound terms up to `2f + ncc_depth`.
    pub ncc_depth: u32,
}

impl Default for Config {
    fn default() -> Self {
        let c = CampaignConfig::default();
        Self {
            run: RunSection {
                schemes: c.schemes,
                codes: c.codes.iter().map(CodeSpec::label).collect(),
                relays: c.n_relays,
                snr: "0:2:20".into(),
                k: c.k,
                seed: c.seed,
            },
            stopping: StoppingSection {
                min_bit_errors: c.min_bit_errors,
                min_frame_errors: c.min_frame_errors,
                max_packets: c.max_packets,
                batch_size: c.batch_size,
                ber_floor: 0.0,
            },
            decoder: DecoderSection {
                algorithm: c.decoder,
                nc_scaling: c.nc_scaling,
            },
            topology: TopologySection {
                pathloss_exponent: c.topology.pathloss_exponent,
                relay_position: c.topology.relay_position,
            },
            analysis: AnalysisSection {
                parc_depth: 10,
                ncc_depth: 8,
            },
        }
    }
}

macro_rules! section_defaults {
    ($($t:ident . $f:ident),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                Config::default().$f
            }
        }
    )*};
}

section_defaults!(
    RunSection.run,
    StoppingSection.stopping,
    DecoderSection.decoder,
    TopologySection.topology,
    AnalysisSection.analysis
);

/// A configuration problem, reported with the offending field path.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn field_error(path: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            match inner.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    field_error(&path, format!("{msg} (line {line})"))
                }
                None => field_error(&path, msg),
            }
        })
    }

    /// The effective configuration as `# `-prefixed TOML lines.
    pub fn echo(&self) -> String {
        let body = toml::to_string(self).expect("config serializes");
        body.lines()
            .map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") })
            .collect()
    }

    pub fn snr_grid(&self) -> Result<Vec<f64>, ConfigError> {
        parse_grid(&self.run.snr).map_err(|e| field_error("run.snr", e))
    }

    pub fn codes(&self) -> Result<Vec<CodeSpec>, ConfigError> {
        self.run
            .codes
            .iter()
            .enumerate()
            .map(|(i, c)| CodeSpec::from_octal(c).map_err(|e| field_error(&format!("run.codes[{i}]"), e)))
            .collect()
    }

    pub fn topology(&self) -> Topology {
        Topology {
            pathloss_exponent: self.topology.pathloss_exponent,
            relay_position: self.topology.relay_position,
        }
    }

    /// Checks every field and builds the campaign configuration.
    pub fn campaign(&self) -> Result<CampaignConfig, ConfigError> {
        let s = &self.stopping;
        if self.run.schemes.is_empty() {
            return Err(field_error("run.schemes", "must not be empty"));
        }
        if self.run.codes.is_empty() {
            return Err(field_error("run.codes", "must not be empty"));
        }
        if self.run.relays.is_empty() {
            return Err(field_error("run.relays", "must not be empty"));
        }
        if let Some(i) = self.run.relays.iter().position(|&n| n == 0) {
            return Err(field_error(&format!("run.relays[{i}]"), "must be at least 1"));
        }
        if self.run.k == 0 {
            return Err(field_error("run.k", "must be at least 1"));
        }
        if s.min_bit_errors == 0 {
            return Err(field_error("stopping.min_bit_errors", "must be at least 1"));
        }
        if s.max_packets == 0 {
            return Err(field_error("stopping.max_packets", "must be at least 1"));
        }
        if s.batch_size == 0 {
            return Err(field_error("stopping.batch_size", "must be at least 1"));
        }
        if !(s.ber_floor >= 0.0 && s.ber_floor < 1.0) {
            return Err(field_error("stopping.ber_floor", "must lie in [0, 1)"));
        }
        let t = &self.topology;
        if !(t.pathloss_exponent.is_finite() && t.pathloss_exponent > 0.0) {
            return Err(field_error("topology.pathloss_exponent", "must be positive"));
        }
        if !(t.relay_position > 0.0 && t.relay_position < 1.0) {
            return Err(field_error("topology.relay_position", "must lie strictly between 0 and 1"));
        }
        let cfg = CampaignConfig {
            schemes: self.run.schemes.clone(),
            codes: self.codes()?,
            n_relays: self.run.relays.clone(),
            snr_db: self.snr_grid()?,
            k: self.run.k,
            min_bit_errors: s.min_bit_errors,
            min_frame_errors: s.min_frame_errors,
            max_packets: s.max_packets,
            batch_size: s.batch_size,
            seed: self.run.seed,
            ber_floor: (s.ber_floor > 0.0).then_some(s.ber_floor),
            topology: self.topology(),
            decoder: self.decoder.algorithm,
            nc_scaling: self.decoder.nc_scaling,
        };
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses `start:step:stop` (inclusive, ascending) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{}` is not a number", s.trim()))
    };
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, step, stop] = parts[..] else {
            return Err(format!("`{text}` is not of the form start:step:stop"));
        };
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if step <= 0.0 || stop < start {
            return Err(format!("`{text}` needs a positive step and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(format!("`{text}` has too many points"));
        }
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("`{text}` is not strictly ascending"));
    }
    Ok(grid)
}
