//! Schemes that must coincide trial by trial in degenerate configurations,
//! and campaign-level reproducibility.

use coopsim::channel::build_link_budget;
use coopsim::code::CodeSpec;
use coopsim::rng::TrialStreams;
use coopsim::schemes::{run_round, RoundResult, Scheme, SchemeConfig};
use coopsim::sim::{run_campaign, write_csv, CampaignConfig};

fn rounds(scheme: Scheme, code: &str, n_relays: usize, snr_db: f64, mute: bool) -> Vec<RoundResult> {
    let cfg = SchemeConfig {
        k: 96,
        ..SchemeConfig::new(scheme, CodeSpec::from_octal(code).unwrap(), n_relays)
    };
    let mut budget = build_link_budget(snr_db, n_relays, 3.5, 0.5).unwrap();
    if mute {
        budget = budget.with_relay_links_muted();
    }
    (0..60)
        .map(|t| run_round(&cfg, &budget, &TrialStreams::new(4, 77, t)).unwrap())
        .collect()
}

#[test]
fn single_relay_fractional_repetition_is_parc() {
    for snr in [0.0, 6.0] {
        let a = rounds(Scheme::Ref1, "25,33,37", 1, snr, false);
        assert_eq!(a, rounds(Scheme::Parc, "25,33,37", 1, snr, false));
        assert!(a.iter().any(|r| r.total_bit_errors() > 0));
    }
}

#[test]
fn single_relay_network_coded_repetition_is_ncc() {
    let a = rounds(Scheme::Ref2, "5,7,5", 1, 0.0, false);
    assert_eq!(a, rounds(Scheme::Ncc, "5,7,5", 1, 0.0, false));
    assert!(a.iter().any(|r| r.total_bit_errors() > 0));
}

#[test]
fn muted_relays_reduce_parc_to_direct_transmission() {
    for scheme in [Scheme::Parc, Scheme::Ref1] {
        let muted = rounds(scheme, "5,7,5", 2, 2.0, true);
        assert_eq!(muted, rounds(Scheme::Direct, "5,7,5", 2, 2.0, false));
    }
}

#[test]
fn relaying_helps() {
    let errors = |rs: Vec<RoundResult>| rs.iter().map(|r| r.total_bit_errors()).sum::<u64>();
    let direct = errors(rounds(Scheme::Direct, "5,7,5", 2, 4.0, false));
    for scheme in [Scheme::Parc, Scheme::Ncc, Scheme::Ref1, Scheme::Ref2] {
        assert!(errors(rounds(scheme, "5,7,5", 2, 4.0, false)) < direct, "{scheme}");
    }
}

#[test]
fn campaigns_are_reproducible_and_thread_independent() {
    let cfg = CampaignConfig {
        schemes: vec![Scheme::Parc, Scheme::Ncc],
        codes: vec![CodeSpec::from_octal("5,7,5").unwrap()],
        n_relays: vec![2],
        snr_db: vec![0.0, 3.0],
        k: 64,
        min_bit_errors: 30,
        max_packets: 300,
        batch_size: 16,
        seed: 9,
        ..CampaignConfig::default()
    };
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| run_campaign(&cfg)).unwrap();
        assert!(report.failures.is_empty());
        let mut out = Vec::new();
        write_csv(&report.records, &mut out, false).unwrap();
        out
    };
    let one = csv(1);
    assert_eq!(one, csv(1));
    assert_eq!(one, csv(3));
}
