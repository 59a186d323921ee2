// Systematic Reed-Solomon over GF(2^8): encode, corrupt, decode.

use dnasim::rs::CodeSpec;
use dnasim::Result;

pub fn run_example() -> Result<()> {
    // RS(255, 208): 47 parity symbols
    let code = CodeSpec::with_parity(8, 47)?;
    let data: Vec<u16> = (0..code.data_len()).map(|i| (i * 31 % 256) as u16).collect();
    let sent = code.encode(&data)?;
    println!(
        "RS({}, {}) over GF(2^{}), {} parity symbols",
        code.len(),
        code.data_len(),
        code.m(),
        code.parity_len()
    );

    // 20 errors and 7 erasures: 2*20 + 7 = 47, right at the limit
    let mut received = sent.symbols().to_vec();
    for i in 0..20 {
        received[i * 11] ^= 0x5a;
    }
    let erasures: Vec<usize> = (0..7).map(|i| 5 + i * 11).collect();
    for &e in &erasures {
        received[e] = 0;
    }
    let decoded = code.decode(&received, &erasures).expect("within capability");
    assert_eq!(decoded.data, data);
    println!(
        "20 errors + 7 erasures: recovered, {} symbols corrected",
        decoded.corrected
    );

    // one error too many
    received[1] ^= 1;
    match code.decode(&received, &erasures) {
        Ok(d) if d.data == data => println!("one more error: lucky decode"),
        Ok(_) => println!("one more error: miscorrected"),
        Err(e) => println!("one more error: detected failure ({e})"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
