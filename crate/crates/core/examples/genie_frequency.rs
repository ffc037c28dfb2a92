//! Genie-tagged sampling and the frequency vector of a pool with repeats.

use dnastore::genie::{augment, frequency_vector, sample_tagged, tag_pool};
use dnastore::model::{ChannelParams, Molecule, MoleculePool};

fn main() -> dnastore::Result<()> {
    // 8 molecules, only 3 distinct contents
    let contents = [0b1010u64, 0b1010, 0b0110, 0b1111, 0b0110, 0b1010, 0b1111, 0b1111];
    let params = ChannelParams::from_lengths(8, 4, 1.5)?;
    let pool = MoleculePool::new(params, contents.iter().map(|&v| Molecule::from_u64(v, 4)).collect())?;

    let samples = sample_tagged(&tag_pool(&pool), 2024);
    let f = frequency_vector(&samples)?;
    print!("{}", f.to_text());
    println!("||f||_1 = {} distinct tags over N = {} draws", f.l1_norm(), params.n());

    let a = augment(f, 0.1)?;
    println!("F0 = {:.4}, event = {}", a.f0, a.event);
    Ok(())
}
