//! `coopsim` command-line front end.

mod analyze;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{Config, ConfigError};
use coopsim::code::{build_compound_code, compute_compound_spectrum, compute_distance_spectrum, CodeSpec, DecodingAlgo};
use coopsim::detect::NcScaling;
use coopsim::schemes::Scheme;
use coopsim::sim::{read_csv, run_campaign_with, write_csv, BerRecord};
use serde::de::DeserializeOwned;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "coopsim", version, about = "Cooperative relaying simulator and BER bound calculator")]
struct Cli {
    /// Worker threads for simulations (default: all cores).
    #[arg(long, global = true, env = "COOPSIM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER simulation over an SNR grid.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the wall time of each point instead of 0.
        #[arg(long)]
        timing: bool,
        /// Suppress per-point progress on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Analytic BER union bounds on the simulation grid.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Spectrum terms beyond the free distance used for PARC bounds.
        #[arg(long)]
        parc_depth: Option<u32>,
        /// Compound spectrum terms beyond 2f used for NCC bounds.
        #[arg(long)]
        ncc_depth: Option<u32>,
        /// Also write bound, raw bound and local slope per point here.
        #[arg(long)]
        detail: Option<PathBuf>,
    },
    /// Distance spectrum of a code, or of its compound code.
    Spectrum {
        /// Octal generators, e.g. 133,165,171.
        #[arg(long)]
        code: String,
        /// Largest output weight to enumerate (default: f + 10, or 2f + 8 with --compound).
        #[arg(long)]
        d_max: Option<u32>,
        #[arg(long)]
        compound: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Local slope of every curve in a BER CSV.
    Diversity {
        /// BER CSV file, or `-` for stdin.
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Configuration file plus overrides; flags win over the file.
#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Comma-separated schemes (parc, ncc, ref1, ref2, direct, uncoded).
    #[arg(long, value_delimiter = ',', value_parser = parse_serde::<Scheme>)]
    scheme: Option<Vec<Scheme>>,
    /// Octal generators; repeat the flag for several codes.
    #[arg(long)]
    code: Option<Vec<String>>,
    /// Comma-separated relay counts.
    #[arg(long, value_delimiter = ',')]
    relays: Option<Vec<usize>>,
    /// SNR grid in dB: start:step:stop or a comma-separated list.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Information bits per source and period.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    min_frame_errors: Option<u64>,
    #[arg(long)]
    max_packets: Option<u64>,
    #[arg(long)]
    batch_size: Option<u64>,
    /// Stop a curve once its BER falls below this (0 disables).
    #[arg(long)]
    ber_floor: Option<f64>,
    /// log-map, max-log-map or linear-log-map.
    #[arg(long, value_parser = parse_serde::<DecodingAlgo>)]
    decoder: Option<DecodingAlgo>,
    /// scaled or unscaled.
    #[arg(long, value_parser = parse_serde::<NcScaling>)]
    nc_scaling: Option<NcScaling>,
    #[arg(long)]
    pathloss_exponent: Option<f64>,
    #[arg(long)]
    relay_position: Option<f64>,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    T::deserialize(toml::Value::String(s.to_ascii_lowercase())).map_err(|e| e.to_string())
}

impl CommonArgs {
    fn config(&self) -> Result<Config, ConfigError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        macro_rules! set {
            ($flag:ident => $($field:tt)+) => {
                if let Some(v) = &self.$flag {
                    c.$($field)+ = v.clone();
                }
            };
        }
        set!(scheme => run.schemes);
        set!(code => run.codes);
        set!(relays => run.relays);
        set!(snr => run.snr);
        set!(seed => run.seed);
        set!(k => run.k);
        set!(min_bit_errors => stopping.min_bit_errors);
        set!(min_frame_errors => stopping.min_frame_errors);
        set!(max_packets => stopping.max_packets);
        set!(batch_size => stopping.batch_size);
        set!(ber_floor => stopping.ber_floor);
        set!(decoder => decoder.algorithm);
        set!(nc_scaling => decoder.nc_scaling);
        set!(pathloss_exponent => topology.pathloss_exponent);
        set!(relay_position => topology.relay_position);
        Ok(c)
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| runtime(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(common: &CommonArgs, timing: bool, quiet: bool) -> Result<(), Failure> {
    let cfg = common.config()?;
    let campaign = cfg.campaign()?;
    let report = run_campaign_with(&campaign, |r| {
        if !quiet {
            eprintln!(
                "{} {} N_r={} {} dB: {} errors in {} packets, BER {:.3e} ({:.1} s)",
                r.scheme, r.code, r.n_relays, r.snr_db, r.bit_errors, r.packets, r.ber, r.seconds
            );
        }
    })
    .map_err(runtime)?;
    let mut out = open_output(&common.output)?;
    out.write_all(cfg.echo().as_bytes()).map_err(runtime)?;
    write_csv(&report.records, &mut out, timing).map_err(runtime)?;
    out.flush().map_err(runtime)?;
    if !report.failures.is_empty() {
        let lines: Vec<String> = report
            .failures
            .iter()
            .map(|f| format!("{} {} N_r={} {} dB: {}", f.scheme, f.code, f.n_relays, f.snr_db, f.message))
            .collect();
        return Err(Failure::Runtime(format!("{} cell(s) failed:\n{}", lines.len(), lines.join("\n"))));
    }
    Ok(())
}

fn analyze(
    common: &CommonArgs,
    parc_depth: Option<u32>,
    ncc_depth: Option<u32>,
    detail: &Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = common.config()?;
    if let Some(d) = parc_depth {
        cfg.analysis.parc_depth = d;
    }
    if let Some(d) = ncc_depth {
        cfg.analysis.ncc_depth = d;
    }
    let campaign = cfg.campaign()?;
    if let Some(s) = campaign.schemes.iter().find(|s| !matches!(s, Scheme::Parc | Scheme::Ncc)) {
        return Err(Failure::Config(format!("run.schemes: no analytic bound for {s}; use parc or ncc")));
    }
    let mut points = Vec::new();
    for &scheme in &campaign.schemes {
        for code in &campaign.codes {
            points.extend(
                analyze::bound_curves(&analyze::BoundRequest {
                    scheme,
                    code,
                    n_relays: &campaign.n_relays,
                    snr_db: &campaign.snr_db,
                    k: campaign.k,
                    topology: campaign.topology,
                    parc_depth: cfg.analysis.parc_depth,
                    ncc_depth: cfg.analysis.ncc_depth,
                })
                .map_err(runtime)?,
            );
        }
    }
    let mut out = open_output(&common.output)?;
    out.write_all(cfg.echo().as_bytes()).map_err(runtime)?;
    write_csv(&analyze::as_records(&points), &mut out, false).map_err(runtime)?;
    out.flush().map_err(runtime)?;
    if let Some(path) = detail {
        let mut d = open_output(&Some(path.clone()))?;
        d.write_all(cfg.echo().as_bytes()).map_err(runtime)?;
        analyze::write_detail(&points, &mut d).map_err(runtime)?;
        d.flush().map_err(runtime)?;
    }
    Ok(())
}

fn spectrum(code: &str, d_max: Option<u32>, compound: bool, output: &Option<PathBuf>) -> Result<(), Failure> {
    let code = CodeSpec::from_octal(code).map_err(|e| Failure::Config(format!("--code: {e}")))?;
    let impulse: u32 = code.generators().iter().map(|g| g.count_ones()).sum();
    let mut out = open_output(output)?;
    let mut echo = format!("# code = \"{}\"\n# compound = {compound}\n", code.label());
    if compound {
        let f = match d_max {
            Some(_) => None,
            None => Some(compute_distance_spectrum(&code, impulse).map_err(runtime)?.free_distance()),
        };
        let d_max = d_max.unwrap_or_else(|| 2 * f.unwrap_or(0) + 8);
        let cs = compute_compound_spectrum(&build_compound_code(&code), d_max).map_err(runtime)?;
        echo += &format!(
            "# d_max = {d_max}\n# F = {}\n# 2f = {}\n",
            cs.min_distance(),
            2 * cs.component_free_distance()
        );
        out.write_all(echo.as_bytes()).map_err(runtime)?;
        cs.write_csv(&mut out).map_err(runtime)?;
    } else {
        let spec = compute_distance_spectrum(&code, d_max.unwrap_or(impulse + 10)).map_err(runtime)?;
        let spec = match d_max {
            Some(_) => spec,
            None => spec.truncated(spec.free_distance() + 10),
        };
        echo += &format!("# d_max = {}\n# f = {}\n", spec.d_max(), spec.free_distance());
        out.write_all(echo.as_bytes()).map_err(runtime)?;
        spec.write_csv(&mut out).map_err(runtime)?;
    }
    out.flush().map_err(runtime)
}

fn diversity(input: &PathBuf, output: &Option<PathBuf>) -> Result<(), Failure> {
    let mut text = String::new();
    if input.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map_err(runtime)?;
    } else {
        File::open(input)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
    }
    let records = read_csv(text.as_bytes()).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
    let mut curves: BTreeMap<(String, String, usize), Vec<&BerRecord>> = BTreeMap::new();
    for r in &records {
        curves.entry((r.scheme.to_string(), r.code.clone(), r.n_relays)).or_default().push(r);
    }
    let mut out = open_output(output)?;
    out.write_all(format!("# input = \"{}\"\n", input.display()).as_bytes()).map_err(runtime)?;
    let mut wr = csv::Writer::from_writer(&mut out);
    wr.write_record(["scheme", "code", "n_relays", "snr_db", "zeta"]).map_err(runtime)?;
    for ((scheme, code, n_relays), mut recs) in curves {
        recs.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        let pts: Vec<(f64, f64)> = recs.iter().filter(|r| r.ber > 0.0).map(|r| (r.snr_db, r.ber)).collect();
        if pts.len() < 3 {
            eprintln!("skipping {scheme} {code} N_r={n_relays}: fewer than 3 points with errors");
            continue;
        }
        let slopes = coopsim::analysis::instantaneous_diversity(&pts).map_err(runtime)?;
        for (snr, zeta) in slopes {
            wr.write_record([scheme.clone(), code.clone(), n_relays.to_string(), snr.to_string(), zeta.to_string()])
                .map_err(runtime)?;
        }
    }
    wr.flush().map_err(runtime)?;
    drop(wr);
    out.flush().map_err(runtime)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(runtime)?;
    }
    match &cli.command {
        Command::Simulate { common, timing, quiet } => simulate(common, *timing, *quiet),
        Command::Analyze {
            common,
            parc_depth,
            ncc_depth,
            detail,
        } => analyze(common, *parc_depth, *ncc_depth, detail),
        Command::Spectrum {
            code,
            d_max,
            compound,
            output,
        } => spectrum(code, *d_max, *compound, output),
        Command::Diversity { input, output } => diversity(input, output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
