use cachenet::cceo::repair_feasibility;
use cachenet::config::Config;
use cachenet::model::{mpc_placement, ContentLibrary, DeliveryRequirement, MmTierConfig, MuTierConfig};
use cachenet::scdp_mm::{scdp_content_mm, scdp_content_mm_los, scdp_content_mm_nlos, MmCoverageContext};
use cachenet::scdp_mu::{scdp_content_mu, MuCoverageContext};
use cachenet::table::format_sig;
use cachenet::twostair::{placement_from_twostair, TwoStairPoint};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twostair_placements_are_feasible(eps in 0.0f64..=1.0, v in 0.05f64..=1.0, j in 5usize..200, frac in 0.05f64..0.9) {
        let cap = (j as f64 * frac).max(1.0);
        let lib = ContentLibrary::zipf(j, cap, 1.3).unwrap();
        let varpi = v.max(cap / j as f64);
        let pt = TwoStairPoint::new(eps, varpi).unwrap();
        let p = placement_from_twostair(&pt, &lib).unwrap();
        prop_assert!(p.is_feasible(&lib));
        prop_assert!(p.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn mpc_respects_unequal_sizes(sizes in prop::collection::vec(prop::sample::select(vec![1.0, 2.0, 3.0]), 5..60), frac in 0.0f64..1.0) {
        let cap = (sizes.len() as f64 * frac).max(1.0);
        let lib = ContentLibrary::zipf(sizes.len(), cap, 1.1).unwrap().with_sizes(sizes).unwrap();
        prop_assert!(mpc_placement(&lib).is_feasible(&lib));
    }

    #[test]
    fn repair_restores_budget(b in prop::collection::vec(0.0f64..=1.0, 4..40), frac in 0.05f64..0.95) {
        let j = b.len();
        let lib = ContentLibrary::zipf(j, (j as f64 * frac).max(1.0), 0.9).unwrap();
        let mut b = b;
        repair_feasibility(&mut b, &lib);
        prop_assert!(lib.budget_used(&b) <= lib.capacity() + 1e-9);
        prop_assert!(b.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn mm_parts_bounded_and_monotone(b1 in 0.0f64..=1.0, b2 in 0.0f64..=1.0, rate in 1e7f64..2e9) {
        let ctx = MmCoverageContext::from_requirement(MmTierConfig::table_defaults(), &DeliveryRequirement::new(rate).unwrap()).unwrap();
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let total = scdp_content_mm(hi, &ctx).unwrap();
        prop_assert!((0.0..=1.0).contains(&total));
        prop_assert!(scdp_content_mm(lo, &ctx).unwrap() <= total + 1e-15);
        prop_assert!(scdp_content_mm_los(hi, &ctx).unwrap() >= 0.0);
        prop_assert!(scdp_content_mm_nlos(hi, &ctx).unwrap() >= 0.0);
    }

    #[test]
    fn significant_digits_round_trip(x in -1e300f64..1e300) {
        let back: f64 = format_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mu_scdp_bounded_and_monotone(b in 0.01f64..0.99, n in 1u32..5) {
        let mut cfg = MuTierConfig::table_defaults();
        cfg.antennas = n;
        let ctx = MuCoverageContext::from_requirement(cfg, &DeliveryRequirement::default()).unwrap();
        let p = scdp_content_mu(b, &ctx).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(scdp_content_mu(b + 0.01, &ctx).unwrap() >= p - 1e-9);
    }

    #[test]
    fn config_round_trips_through_toml(seed in 0u64..1_000_000, j in 10usize..500, drops in 0usize..100_000) {
        let mut cfg = Config { seed, ..Config::default() };
        cfg.library.contents = j;
        cfg.mc.drops = drops;
        let back = Config::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}
