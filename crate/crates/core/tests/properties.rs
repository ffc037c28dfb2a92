use proptest::prelude::*;

use dnastore::bounds::{capacity, string_to_type, type_to_string};
use dnastore::codec::{self, CodecConfig};
use dnastore::coupon::distinct_count;
use dnastore::genie::{frequency_vector, sample_tagged, tag_pool, FrequencyVector};
use dnastore::model::file::{read_pool, read_samples, write_pool, write_samples};
use dnastore::model::{sample_with_replacement, ChannelParams, MoleculePool};
use dnastore::report::fmt_sig;
use dnastore::rng::ChannelRng;

fn pool(m: u64, l: u32, c: f64, seed: u64) -> MoleculePool {
    MoleculePool::random(ChannelParams::from_lengths(m, l, c).unwrap(), seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pool_file_round_trip(m in 2u64..40, l in 1u32..80, seed: u64) {
        let p = pool(m, l, 1.0, seed);
        let mut buf = Vec::new();
        write_pool(&mut buf, &p).unwrap();
        prop_assert_eq!(buf.len(), 17 + (m as usize * l as usize).div_ceil(8));
        prop_assert_eq!(read_pool(&buf[..]).unwrap().into_pool(1.0).unwrap(), p);
    }

    #[test]
    fn sample_file_round_trip(m in 2u64..30, l in 1u32..70, c in 0.2f64..3.0, seed: u64, tagged: bool) {
        let p = pool(m, l, c, seed);
        let s = if tagged { sample_tagged(&tag_pool(&p), seed) } else { sample_with_replacement(&p, seed) };
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        let back = read_samples(&buf[..]).unwrap();
        prop_assert_eq!(back.draws(), s.draws());
        // a truncated file is rejected
        prop_assert!(read_samples(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn frequency_vector_ignores_draw_order(m in 2u64..30, c in 0.5f64..3.0, seed: u64, shuffle: u64) {
        let p = pool(m, 3, c, seed);
        let s = sample_tagged(&tag_pool(&p), seed);
        let mut order: Vec<usize> = (0..s.len()).collect();
        let mut rng = ChannelRng::new(shuffle);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.below(i as u64 + 1) as usize);
        }
        prop_assert_eq!(frequency_vector(&s.permuted(&order)).unwrap(), frequency_vector(&s).unwrap());
    }

    #[test]
    fn genie_l1_is_distinct_count(m in 2u64..200, c in 0.2f64..4.0, seed: u64) {
        let p = pool(m, 8, c, seed);
        let f = frequency_vector(&sample_tagged(&tag_pool(&p), seed)).unwrap();
        let q = distinct_count(m, p.params().n(), &mut ChannelRng::new(seed));
        prop_assert_eq!(f.l1_norm(), q);
        prop_assert!(f.support_size() as u64 <= q);
    }

    #[test]
    fn frequency_text_round_trip(m in 2u64..40, l in 1u32..20, seed: u64) {
        let p = pool(m, l, 1.5, seed);
        let f = frequency_vector(&sample_tagged(&tag_pool(&p), seed)).unwrap();
        let back = FrequencyVector::read_text(f.to_text().as_bytes()).unwrap();
        prop_assert_eq!(back.counts(), f.counts());
    }

    #[test]
    fn codec_any_k_positions(log_m in 2u32..6, extra in 0u32..20, k_frac in 0.1f64..1.0, seed: u64) {
        let m = 1u64 << log_m;
        let l = log_m + 8 + extra;
        let k = ((k_frac * m as f64) as u64).max(1);
        let cfg = CodecConfig::new(m, l, 8, k);
        prop_assume!(cfg.layout().is_ok());
        let mut rng = ChannelRng::new(seed);
        let mut data = vec![0u8; cfg.layout().unwrap().max_data_bytes() as usize];
        rng.fill_bytes(&mut data);
        let pool = codec::encode(&data, &cfg).unwrap();
        let mut order: Vec<usize> = (0..m as usize).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.below(i as u64 + 1) as usize);
        }
        let picked = order[..k as usize].iter().map(|&i| pool.get(i));
        prop_assert_eq!(codec::decode_molecules(picked, &cfg).unwrap(), data);
    }

    #[test]
    fn rate_never_exceeds_index_ceiling(log_m in 1u32..12, extra in 1u32..40, k_frac in 0.01f64..=1.0) {
        let m = 1u64 << log_m;
        let l = log_m + extra;
        let Ok(w) = dnastore::experiments::default_field_width(m, l) else { return Ok(()) };
        let cfg = CodecConfig::new(m, l, w, ((k_frac * m as f64) as u64).clamp(1, m));
        let Ok(rate) = codec::achieved_rate(&cfg) else { return Ok(()) };
        prop_assert!(rate <= 1.0 - log_m as f64 / l as f64 + 1e-15);
    }

    #[test]
    fn type_string_bijection(x in proptest::collection::vec(0u64..6, 1..8)) {
        let s = type_to_string(&x);
        prop_assert_eq!(s.len() as u64, x.iter().sum::<u64>() + x.len() as u64 - 1);
        prop_assert_eq!(string_to_type(&s), x);
    }

    #[test]
    fn capacity_below_factors(beta in 0.01f64..50.0, c in 0.01f64..20.0) {
        let cap = capacity(beta, c).unwrap();
        prop_assert!(cap >= 0.0);
        prop_assert!(cap <= 1.0 - (-c).exp());
        prop_assert!(cap <= (1.0 - 1.0 / beta).max(0.0));
    }

    #[test]
    fn fmt_sig_keeps_ten_digits(x in -1e15f64..1e15) {
        let back: f64 = fmt_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1e-300));
    }
}
