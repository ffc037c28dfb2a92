//! Encode bytes, push the pool through the sampling channel, decode.
//!
//! cargo run --release --example codec_roundtrip

use dnastore::codec::{achieved_rate, decode, encode, CodecConfig};
use dnastore::model::{sample_with_replacement, ChannelParams};
use dnastore::{bounds, Error};

fn main() -> dnastore::Result<()> {
    let config = CodecConfig::new(1024, 40, 16, 800);
    let layout = config.layout()?;
    println!(
        "index {} bits, payload {} bits in columns {:?}, room for {} bytes",
        layout.index_bits(),
        layout.payload_bits(),
        layout.column_widths(),
        layout.max_data_bytes()
    );

    let data: Vec<u8> = b"unordered sampling, ordered results. "
        .iter()
        .copied()
        .cycle()
        .take(2_500)
        .collect();
    let pool = encode(&data, &config)?.with_params(ChannelParams::from_lengths(1024, 40, 2.0)?)?;

    let mut ok = 0;
    for seed in 0..20 {
        match decode(&sample_with_replacement(&pool, seed), &config) {
            Ok(got) => {
                assert_eq!(got, data);
                ok += 1;
            }
            Err(Error::InsufficientCoverage { deficit, .. }) => println!("seed {seed}: short by {deficit}"),
            Err(e) => return Err(e),
        }
    }
    println!(
        "{ok}/20 recovered at rate {:.4}, capacity {:.4}",
        achieved_rate(&config)?,
        bounds::capacity(4.0, 2.0)?
    );
    Ok(())
}
