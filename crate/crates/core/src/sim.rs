//! Monte Carlo campaigns over schemes, codes, relay counts and SNR grids.
//!
//! A cell (scheme, code, N_r, SNR) runs trials in fixed-size batches and
//! checks the stopping rule only between batches. Trial `t` of a cell always
//! uses the streams keyed by `(seed, cell id, t)`, so the records do not
//! depend on the number of worker threads.

use crate::channel::build_link_budget;
use crate::code::{CodeSpec, DecodingAlgo};
use crate::detect::NcScaling;
use crate::error::{invalid, Error, Result};
use crate::rng::{cell_id, TrialStreams};
use crate::schemes::{run_round, RoundResult, Scheme, SchemeConfig};
use rayon::prelude::*;
use std::io::{Read, Write};
use std::time::Instant;

/// Geometry of the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    pub pathloss_exponent: f64,
    /// Relay position on the source-destination line, as a fraction.
    pub relay_position: f64,
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.5,
            relay_position: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub schemes: Vec<Scheme>,
    pub codes: Vec<CodeSpec>,
    pub n_relays: Vec<usize>,
    /// Source-destination average SNRs in dB, strictly ascending.
    pub snr_db: Vec<f64>,
    /// Information bits per source and period.
    pub k: usize,
    pub min_bit_errors: u64,
    /// Frame errors required in addition to `min_bit_errors`; 0 disables.
    pub min_frame_errors: u64,
    pub max_packets: u64,
    /// Periods simulated between two checks of the stopping rule.
    pub batch_size: u64,
    pub seed: u64,
    /// Once a point of a curve has BER below this (or no errors at all), the
    /// higher SNRs of that curve are skipped.
    pub ber_floor: Option<f64>,
    pub topology: Topology,
    pub decoder: DecodingAlgo,
    pub nc_scaling: NcScaling,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Parc],
            codes: vec![CodeSpec::from_octal("133,165,171").expect("valid code")],
            n_relays: vec![2],
            snr_db: vec![0.0],
            k: 1024,
            min_bit_errors: 100,
            min_frame_errors: 0,
            max_packets: 200_000,
            batch_size: 64,
            seed: 1,
            ber_floor: None,
            topology: Topology::default(),
            decoder: DecodingAlgo::default(),
            nc_scaling: NcScaling::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() || self.codes.is_empty() || self.n_relays.is_empty() {
            return invalid("schemes, codes and relay counts must be non-empty");
        }
        if self.snr_db.is_empty() {
            return invalid("SNR grid is empty");
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("SNR grid must be finite and strictly ascending");
        }
        if self.min_bit_errors == 0 {
            return invalid("min_bit_errors must be at least 1");
        }
        if self.max_packets == 0 || self.batch_size == 0 {
            return invalid("max_packets and batch_size must be at least 1");
        }
        for &n in &self.n_relays {
            SchemeConfig {
                n_relays: n,
                k: self.k,
                ..SchemeConfig::new(Scheme::Parc, self.codes[0].clone(), n)
            }
            .validate()?;
        }
        build_link_budget(0.0, self.n_relays[0], self.topology.pathloss_exponent, self.topology.relay_position)?;
        Ok(())
    }
}

/// Why a cell stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Enough errors were collected.
    Errors,
    /// The packet budget ran out first.
    MaxPackets,
}

/// One BER point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub code: String,
    pub n_relays: usize,
    pub snr_db: f64,
    pub packets: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub ci95: f64,
    pub seconds: f64,
    pub stop: StopReason,
}

/// Half-width of the normal-approximation 95% interval of a binomial rate.
pub fn ci95(errors: u64, bits: u64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let p = errors as f64 / bits as f64;
    1.96 * (p * (1.0 - p) / bits as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub scheme: Scheme,
    pub code: String,
    pub n_relays: usize,
    pub snr_db: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignReport {
    pub records: Vec<BerRecord>,
    pub failures: Vec<CellFailure>,
}

/// Stable label of a cell; hashed into the trial streams.
pub fn cell_label(scheme: Scheme, code: &CodeSpec, n_relays: usize, snr_db: f64) -> String {
    format!("{scheme}|{}|{n_relays}|{snr_db:.6}", code.label())
}

#[derive(Default, Clone, Copy)]
struct Tally {
    packets: u64,
    bits: u64,
    bit_errors: u64,
    frame_errors: u64,
}

impl Tally {
    fn add(mut self, r: &RoundResult) -> Self {
        self.packets += 1;
        self.bits += 2 * r.bits;
        self.bit_errors += r.total_bit_errors();
        self.frame_errors += r.total_frame_errors();
        self
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            packets: self.packets + o.packets,
            bits: self.bits + o.bits,
            bit_errors: self.bit_errors + o.bit_errors,
            frame_errors: self.frame_errors + o.frame_errors,
        }
    }
}

/// Simulates one cell.
pub fn run_cell(
    cfg: &CampaignConfig,
    scheme: Scheme,
    code: &CodeSpec,
    n_relays: usize,
    snr_db: f64,
) -> Result<BerRecord> {
    let start = Instant::now();
    let budget = build_link_budget(
        snr_db,
        n_relays,
        cfg.topology.pathloss_exponent,
        cfg.topology.relay_position,
    )?;
    let scfg = SchemeConfig {
        k: cfg.k,
        decoder: cfg.decoder,
        nc_scaling: cfg.nc_scaling,
        ..SchemeConfig::new(scheme, code.clone(), n_relays)
    };
    scfg.validate()?;
    let cell = cell_id(&cell_label(scheme, code, n_relays, snr_db));
    let mut tally = Tally::default();
    let stop = loop {
        if tally.bit_errors >= cfg.min_bit_errors && tally.frame_errors >= cfg.min_frame_errors {
            break StopReason::Errors;
        }
        if tally.packets >= cfg.max_packets {
            break StopReason::MaxPackets;
        }
        let lo = tally.packets;
        let hi = (lo + cfg.batch_size).min(cfg.max_packets);
        let batch = (lo..hi)
            .into_par_iter()
            .map(|t| run_round(&scfg, &budget, &TrialStreams::new(cfg.seed, cell, t)))
            .try_fold(Tally::default, |acc, r| r.map(|r| acc.add(&r)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(batch);
    };
    let ber = if tally.bits == 0 {
        0.0
    } else {
        tally.bit_errors as f64 / tally.bits as f64
    };
    Ok(BerRecord {
        scheme,
        code: code.to_string(),
        n_relays,
        snr_db,
        packets: tally.packets,
        bits: tally.bits,
        bit_errors: tally.bit_errors,
        frame_errors: tally.frame_errors,
        ber,
        ci95: ci95(tally.bit_errors, tally.bits),
        seconds: start.elapsed().as_secs_f64(),
        stop,
    })
}

/// Runs every cell of the campaign. A failing cell is reported in
/// `failures` and the rest of the campaign continues.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    run_campaign_with(cfg, |_| {})
}

/// Like [`run_campaign`], calling `progress` after each finished cell.
pub fn run_campaign_with<F: FnMut(&BerRecord)>(cfg: &CampaignConfig, mut progress: F) -> Result<CampaignReport> {
    cfg.validate()?;
    let mut report = CampaignReport::default();
    for &scheme in &cfg.schemes {
        for code in &cfg.codes {
            for &n_relays in &cfg.n_relays {
                for &snr_db in &cfg.snr_db {
                    match run_cell(cfg, scheme, code, n_relays, snr_db) {
                        Ok(rec) => {
                            progress(&rec);
                            let floor_hit = rec.bit_errors == 0
                                || cfg.ber_floor.is_some_and(|f| rec.ber < f);
                            report.records.push(rec);
                            if cfg.ber_floor.is_some() && floor_hit {
                                break;
                            }
                        }
                        Err(e) => report.failures.push(CellFailure {
                            scheme,
                            code: code.to_string(),
                            n_relays,
                            snr_db,
                            message: e.to_string(),
                        }),
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Column order of the BER CSV.
pub const CSV_HEADER: [&str; 10] = [
    "scheme", "code", "n_relays", "snr_db", "packets", "bits", "bit_errors", "ber", "ci95", "seconds",
];

/// Writes records with a header. With `timing` off the `seconds` column is
/// 0 so that repeated runs produce identical files.
pub fn write_csv<W: Write>(records: &[BerRecord], out: W, timing: bool) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
    wr.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let seconds = if timing { format!("{:.3}", r.seconds) } else { "0".into() };
        wr.write_record([
            r.scheme.to_string(),
            r.code.clone(),
            r.n_relays.to_string(),
            r.snr_db.to_string(),
            r.packets.to_string(),
            r.bits.to_string(),
            r.bit_errors.to_string(),
            r.ber.to_string(),
            r.ci95.to_string(),
            seconds,
        ])
        .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

#[derive(serde::Deserialize)]
struct CsvRow {
    scheme: Scheme,
    code: String,
    n_relays: usize,
    snr_db: f64,
    packets: u64,
    bits: u64,
    bit_errors: u64,
    ber: f64,
    ci95: f64,
    seconds: f64,
}

/// Reads a BER CSV; lines starting with `#` are skipped. Frame errors are
/// not stored in the file and read back as 0.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerRecord>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = rd.headers().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return invalid(format!(
            "unexpected header {:?}, expected {}",
            headers.iter().collect::<Vec<_>>(),
            CSV_HEADER.join(",")
        ));
    }
    rd.deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(BerRecord {
                scheme: r.scheme,
                code: r.code,
                n_relays: r.n_relays,
                snr_db: r.snr_db,
                packets: r.packets,
                bits: r.bits,
                bit_errors: r.bit_errors,
                frame_errors: 0,
                ber: r.ber,
                ci95: r.ci95,
                seconds: r.seconds,
                stop: if r.packets > 0 && r.bit_errors == 0 {
                    StopReason::MaxPackets
                } else {
                    StopReason::Errors
                },
            })
        })
        .collect()
}

/// SNR (dB) at which a BER curve first crosses `target`, interpolating
/// log10(BER) linearly in dB between adjacent points. Points with zero BER
/// are ignored. The records are assumed to form one curve.
pub fn estimate_crossing(records: &[BerRecord], target: f64) -> Result<f64> {
    let curve: Vec<(f64, f64)> = records.iter().map(|r| (r.snr_db, r.ber)).collect();
    crossing(&curve, target)
}

/// [`estimate_crossing`] on `(SNR dB, BER)` pairs.
pub fn crossing(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return invalid(format!("target BER {target} must be positive"));
    }
    let mut pts: Vec<(f64, f64)> = curve.iter().copied().filter(|p| p.1 > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t = target.log10();
    for w in pts.windows(2) {
        let (x0, y0) = (w[0].0, w[0].1.log10());
        let (x1, y1) = (w[1].0, w[1].1.log10());
        if (y0 - t) * (y1 - t) <= 0.0 {
            if y0 == y1 {
                return Ok(x0);
            }
            return Ok(x0 + (t - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    Err(Error::NoCrossing { target })
}
