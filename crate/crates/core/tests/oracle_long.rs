//! Brute-force median profile at L=20, the length used for the binary
//! oracle figure. Slow; run with `cargo test --release -- --ignored`.

use dnasim::channel::Alphabet;
use dnasim::consensus::{skew_profile, Reconstructor, SkewParams};

#[test]
#[ignore]
fn oracle_profile_at_length_20() {
    let length = 20;
    let mut peaks = Vec::new();
    for n in [2, 4, 8, 16] {
        let mut params = SkewParams::new(0.2, n, length, Reconstructor::Oracle, 1000);
        params.alphabet = Alphabet::binary();
        params.oracle_cap = Some(length);
        params.seed = 20 + n as u64;
        let e = skew_profile(&params).unwrap().error;
        let line: Vec<String> = e.iter().map(|x| format!("{x:.3}")).collect();
        println!("N={n:>2}: {}", line.join(" "));

        let quarter = length / 4;
        let middle = e[quarter..length - quarter].iter().sum::<f64>() / (length - 2 * quarter) as f64;
        let outer = e[..quarter].iter().chain(&e[length - quarter..]).sum::<f64>() / (2 * quarter) as f64;
        assert!(middle > outer, "N={n}: middle {middle:.3} vs outer {outer:.3}");
        peaks.push(e.iter().cloned().fold(0.0, f64::max));
    }
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
}
