//! Analytic BER bound curves in the simulation CSV schema.

use coopsim::analysis::{ber_bound_ncc, ber_bound_parc, instantaneous_diversity};
use coopsim::channel::build_link_budget;
use coopsim::code::{build_compound_code, compute_compound_spectrum, compute_distance_spectrum, CodeSpec};
use coopsim::schemes::Scheme;
use coopsim::sim::{BerRecord, StopReason, Topology};
use std::io::Write;

/// One point of an analytic curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub scheme: Scheme,
    pub code: String,
    pub n_relays: usize,
    pub snr_db: f64,
    /// Bound per information bit, averaged over the two sources.
    pub ber_bound: f64,
    /// The same sum before normalization by K.
    pub raw_bound: f64,
    /// Local slope of the curve; absent at the grid ends.
    pub zeta: Option<f64>,
}

pub struct BoundRequest<'a> {
    pub scheme: Scheme,
    pub code: &'a CodeSpec,
    pub n_relays: &'a [usize],
    pub snr_db: &'a [f64],
    pub k: usize,
    pub topology: Topology,
    pub parc_depth: u32,
    pub ncc_depth: u32,
}

/// Bound curves of one scheme and code, for every relay count.
pub fn bound_curves(req: &BoundRequest) -> coopsim::Result<Vec<BoundPoint>> {
    let impulse: u32 = req.code.generators().iter().map(|g| g.count_ones()).sum();
    let single = compute_distance_spectrum(req.code, impulse + req.parc_depth)?;
    let f = single.free_distance();
    let mut out = Vec::new();
    match req.scheme {
        Scheme::Parc => {
            let spectrum = single.truncated(f + req.parc_depth);
            let n = req.code.codeword_len(req.k);
            for &nr in req.n_relays {
                let mut curve = Vec::new();
                for &snr in req.snr_db {
                    let budget = build_link_budget(snr, nr, req.topology.pathloss_exponent, req.topology.relay_position)?;
                    let b: Vec<_> = (0..2)
                        .map(|s| ber_bound_parc(&spectrum, &budget, n, req.k, s))
                        .collect::<Result<_, _>>()?;
                    curve.push((snr, (b[0].total + b[1].total) / 2.0, (b[0].raw + b[1].raw) / 2.0));
                }
                out.extend(with_slopes(req, nr, &curve)?);
            }
        }
        Scheme::Ncc => {
            let g = build_compound_code(req.code);
            let cspec = compute_compound_spectrum(&g, 2 * f + req.ncc_depth)?;
            for &nr in req.n_relays {
                let mut curve = Vec::new();
                for &snr in req.snr_db {
                    let budget = build_link_budget(snr, nr, req.topology.pathloss_exponent, req.topology.relay_position)?;
                    let b: Vec<_> = (0..2)
                        .map(|s| ber_bound_ncc(&cspec, &budget, req.k, s))
                        .collect::<Result<_, _>>()?;
                    curve.push((snr, (b[0].total + b[1].total) / 2.0, (b[0].raw + b[1].raw) / 2.0));
                }
                out.extend(with_slopes(req, nr, &curve)?);
            }
        }
        other => {
            return Err(coopsim::Error::InvalidArgument(format!(
                "no analytic bound for scheme {other}; use parc or ncc"
            )))
        }
    }
    Ok(out)
}

fn with_slopes(req: &BoundRequest, n_relays: usize, curve: &[(f64, f64, f64)]) -> coopsim::Result<Vec<BoundPoint>> {
    let pts: Vec<(f64, f64)> = curve.iter().map(|c| (c.0, c.1)).collect();
    let slopes = if pts.len() >= 3 && pts.iter().all(|p| p.1 > 0.0) {
        instantaneous_diversity(&pts)?
    } else {
        Vec::new()
    };
    Ok(curve
        .iter()
        .map(|&(snr_db, ber_bound, raw_bound)| BoundPoint {
            scheme: req.scheme,
            code: req.code.to_string(),
            n_relays,
            snr_db,
            ber_bound,
            raw_bound,
            zeta: slopes.iter().find(|s| s.0 == snr_db).map(|s| s.1),
        })
        .collect())
}

/// The curve as simulation records, so the two can be overlaid.
pub fn as_records(points: &[BoundPoint]) -> Vec<BerRecord> {
    points
        .iter()
        .map(|p| BerRecord {
            scheme: p.scheme,
            code: p.code.clone(),
            n_relays: p.n_relays,
            snr_db: p.snr_db,
            packets: 0,
            bits: 0,
            bit_errors: 0,
            frame_errors: 0,
            ber: p.ber_bound,
            ci95: 0.0,
            seconds: 0.0,
            stop: StopReason::Errors,
        })
        .collect()
}

pub const DETAIL_HEADER: [&str; 7] = ["scheme", "code", "n_relays", "snr_db", "ber_bound", "raw_bound", "zeta"];

pub fn write_detail<W: Write>(points: &[BoundPoint], out: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(DETAIL_HEADER)?;
    for p in points {
        wr.write_record([
            p.scheme.to_string(),
            p.code.clone(),
            p.n_relays.to_string(),
            p.snr_db.to_string(),
            p.ber_bound.to_string(),
            p.raw_bound.to_string(),
            p.zeta.map_or_else(String::new, |z| z.to_string()),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
