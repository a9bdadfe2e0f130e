use proptest::prelude::*;
use rfid_mti::tag::{make_inventory, Inventory, Seed};
use rfid_mti::{
    run_edfsa, run_ismti, run_ssmti, ChannelConfig, EdfsaConfig, IsmtiConfig, SsmtiConfig,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Noise may flip verdicts but every candidate still gets exactly one.
    #[test]
    fn impaired_runs_still_partition(
        n in 1usize..400,
        q in 0.0f64..=1.0,
        detect in 0.0f64..0.3,
        capture in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let inv = make_inventory(n, q, Seed(seed)).unwrap();
        let ch = ChannelConfig::new(detect, capture, Seed(seed ^ 1)).unwrap();
        let ss = run_ssmti(&inv, &SsmtiConfig::default(), &ch, Seed(seed)).unwrap();
        let is = run_ismti(&inv, &IsmtiConfig::default(), &ch, Seed(seed)).unwrap();
        prop_assert!(ss.partitions(&inv));
        prop_assert!(is.partitions(&inv));
        // a missing tag never answers, so noise only hides present tags
        prop_assert_eq!(ss.false_negatives, 0);
        prop_assert_eq!(is.false_negatives, 0);
    }

    #[test]
    fn results_replay(n in 1usize..300, q in 0.0f64..=1.0, w in 1usize..=96, seed in any::<u64>()) {
        let inv = make_inventory(n, q, Seed(seed)).unwrap();
        let ch = ChannelConfig::new(0.05, 0.1, Seed(seed)).unwrap();
        let cfg = IsmtiConfig { w, ..IsmtiConfig::default() };
        prop_assert_eq!(
            run_ismti(&inv, &cfg, &ch, Seed(seed)).unwrap(),
            run_ismti(&inv, &cfg, &ch, Seed(seed)).unwrap()
        );
        let cfg = SsmtiConfig { w, ..SsmtiConfig::default() };
        prop_assert_eq!(
            run_ssmti(&inv, &cfg, &ch, Seed(seed)).unwrap(),
            run_ssmti(&inv, &cfg, &ch, Seed(seed)).unwrap()
        );
    }

    #[test]
    fn edfsa_is_exact(n in 1usize..500, q in 0.0f64..=1.0, seed in any::<u64>()) {
        let inv = make_inventory(n, q, Seed(seed)).unwrap();
        let r = run_edfsa(&inv, &EdfsaConfig::default(), Seed(seed)).unwrap();
        prop_assert!(r.partitions(&inv));
        prop_assert_eq!(r.misidentified(), 0);
        prop_assert!(r.rounds as f64 <= 10.0 * (n.max(2) as f64).log2());
    }
}

#[test]
fn inventory_file_roundtrip_drives_same_run() {
    let inv = make_inventory(250, 0.4, Seed(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inventory.txt");
    inv.write_text(std::fs::File::create(&path).unwrap())
        .unwrap();
    let back =
        Inventory::read_text(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, inv);
    let ch = ChannelConfig::error_free();
    assert_eq!(
        run_ssmti(&inv, &SsmtiConfig::default(), &ch, Seed(1)).unwrap(),
        run_ssmti(&back, &SsmtiConfig::default(), &ch, Seed(1)).unwrap()
    );
}
