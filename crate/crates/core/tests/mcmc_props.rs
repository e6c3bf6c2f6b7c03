use fivevertex::mcmc::{init_bpp, sample_mean_height, Chain, ChainConfig, HexDomain};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_sweep_keeps_a_valid_height_field(n in 1usize..8, r in 0.2..4.0f64, seed in any::<u64>()) {
        let mut ch = Chain::new(init_bpp(n).unwrap(), r, seed);
        for _ in 0..30 {
            ch.sweep();
            prop_assert!(ch.field.validate().is_ok());
        }
    }

    #[test]
    fn same_seed_same_trajectory(n in 1usize..6, r in 0.3..3.0f64, seed in any::<u64>()) {
        let run = || {
            let mut ch = Chain::new(init_bpp(n).unwrap(), r, seed);
            for _ in 0..20 {
                ch.sweep();
            }
            ch.field.heights().to_vec()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn raises_and_lowers_balance_per_corner_change() {
    for r in [0.5, 2.0] {
        let mut ch = Chain::new(init_bpp(4).unwrap(), r, 11);
        for _ in 0..2000 {
            ch.sweep();
        }
        ch.stats = Default::default();
        for _ in 0..100_000 {
            ch.sweep();
        }
        let mut tested = 0;
        for k in 0..9 {
            let (a, b) = (ch.stats.raised[k] as f64, ch.stats.lowered[k] as f64);
            if a + b < 1000.0 {
                continue;
            }
            tested += 1;
            assert!((a - b).abs() < 5.0 * (a + b).sqrt(), "r {r}, class {k}: {a} raises vs {b} lowers");
            assert!((a / b - 1.0).abs() < 0.05, "r {r}, class {k}: ratio {}", a / b);
        }
        assert!(tested >= 2);
    }
}

#[test]
fn corner_density_against_weight() {
    let dom = HexDomain::new(6).unwrap();
    let densities: Vec<(f64, f64)> = [0.4, 0.7, 1.0, 1.5]
        .iter()
        .map(|&r| {
            let cfg = ChainConfig { r, sweeps: 20_000, burnin: 2_000, seed: 5, thinning: 6 };
            (r, sample_mean_height(&dom, &cfg).unwrap().mean_corners / dom.face_count() as f64)
        })
        .collect();
    eprintln!("corner density by r: {densities:?}");
    assert!(densities.iter().all(|(_, d)| d.is_finite() && *d >= 0.0));
}
