//! Pool and sample files written to memory and read back.

use dnastore::genie::{sample_tagged, tag_pool};
use dnastore::model::file::{read_any, read_pool, write_pool, write_samples, ChannelFile};
use dnastore::model::{sample_with_replacement, ChannelParams, MoleculePool};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> dnastore::Result<()> {
    let pool = MoleculePool::random(ChannelParams::from_lengths(4, 6, 1.0)?, 9);
    let mut buf = Vec::new();
    write_pool(&mut buf, &pool)?;
    println!("DNAP ({} bytes): {}", buf.len(), hex(&buf));
    assert_eq!(read_pool(&buf[..])?.molecules, pool.molecules());

    for tagged in [false, true] {
        let samples = if tagged {
            sample_tagged(&tag_pool(&pool), 3)
        } else {
            sample_with_replacement(&pool, 3)
        };
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples)?;
        println!("DNAS tagged={tagged} ({} bytes): {}", buf.len(), hex(&buf));
        match read_any(&buf[..])? {
            ChannelFile::Samples(back) => assert_eq!(back, samples),
            ChannelFile::Pool(_) => unreachable!(),
        }
    }
    Ok(())
}
