//! MSB-first bit addressing over byte buffers.

#[inline]
pub fn get_bit(bytes: &[u8], i: usize) -> bool {
    bytes[i / 8] >> (7 - i % 8) & 1 == 1
}

#[inline]
pub fn set_bit(bytes: &mut [u8], i: usize, value: bool) {
    let mask = 1 << (7 - i % 8);
    if value {
        bytes[i / 8] |= mask;
    } else {
        bytes[i / 8] &= !mask;
    }
}

#[inline]
pub fn flip_bit(bytes: &mut [u8], i: usize) {
    bytes[i / 8] ^= 1 << (7 - i % 8);
}

/// Reads `width` bits starting at bit `start` as an unsigned value. Bits past
/// the end of `bytes` read as zero.
#[inline]
pub fn read_bits(bytes: &[u8], start: usize, width: u32) -> u16 {
    let mut v = 0u16;
    for k in 0..width as usize {
        let i = start + k;
        let bit = i / 8 < bytes.len() && get_bit(bytes, i);
        v = v << 1 | bit as u16;
    }
    v
}

/// Writes the low `width` bits of `value` starting at bit `start`; bits past
/// the end of `bytes` are dropped.
#[inline]
pub fn write_bits(bytes: &mut [u8], start: usize, width: u32, value: u16) {
    for k in 0..width as usize {
        let i = start + k;
        if i / 8 >= bytes.len() {
            return;
        }
        set_bit(bytes, i, value >> (width as usize - 1 - k) & 1 == 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first() {
        let b = [0b1000_0001u8, 0xF0];
        assert!(get_bit(&b, 0));
        assert!(!get_bit(&b, 1));
        assert!(get_bit(&b, 7));
        assert_eq!(read_bits(&b, 4, 8), 0b0001_1111);
        assert_eq!(read_bits(&b, 12, 8), 0);
    }

    #[test]
    fn write_then_read() {
        let mut b = [0u8; 3];
        write_bits(&mut b, 3, 12, 0xABC);
        assert_eq!(read_bits(&b, 3, 12), 0xABC);
        flip_bit(&mut b, 3);
        assert_eq!(read_bits(&b, 3, 12), 0x2BC);
        write_bits(&mut b, 20, 8, 0xFF);
        assert_eq!(b[2] & 0x0F, 0x0F);
    }
}
