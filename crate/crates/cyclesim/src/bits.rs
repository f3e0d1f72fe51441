//! Raw bit-register helpers shared by the path and ancilla masks.
//!
//! Positions are 1-based. Position 1 is stored at the most significant bit
//! of the `u128`, so the natural integer order on raw values coincides with
//! lexicographic order on the serialized bit strings of equal width.

use crate::error::{Error, Result};

pub(crate) const MAX_WIDTH: u32 = 128;

#[inline]
pub(crate) fn unit(pos: u32) -> u128 {
    debug_assert!((1..=MAX_WIDTH).contains(&pos));
    1u128 << (MAX_WIDTH - pos)
}

#[inline]
pub(crate) fn get(raw: u128, pos: u32) -> bool {
    raw & unit(pos) != 0
}

#[inline]
pub(crate) fn set(raw: &mut u128, pos: u32) {
    *raw |= unit(pos);
}

#[inline]
pub(crate) fn clear(raw: &mut u128, pos: u32) {
    *raw &= !unit(pos);
}

#[inline]
pub(crate) fn toggle(raw: &mut u128, pos: u32) {
    *raw ^= unit(pos);
}

pub(crate) fn to_bit_string(raw: u128, width: u32) -> String {
    (1..=width)
        .map(|pos| if get(raw, pos) { '1' } else { '0' })
        .collect()
}

/// Parses a bit string, returning the raw value and its width.
pub(crate) fn from_bit_string(s: &str) -> Result<(u128, u32)> {
    let mut raw = 0u128;
    let mut width = 0u32;
    for ch in s.chars() {
        width += 1;
        if width > MAX_WIDTH {
            return Err(Error::MaskParse(format!(
                "bit string longer than {MAX_WIDTH} bits"
            )));
        }
        match ch {
            '1' => set(&mut raw, width),
            '0' => {}
            other => {
                return Err(Error::MaskParse(format!(
                    "unexpected character {other:?} at position {width}"
                )))
            }
        }
    }
    Ok((raw, width))
}

/// Hex rendering of the bit string: nibbles are read off position 1 first,
/// padding with zeros on the right to a multiple of four bits.
pub(crate) fn to_hex_string(raw: u128, width: u32) -> String {
    let nibbles = width.div_ceil(4);
    (0..nibbles)
        .map(|i| {
            let mut v = 0u8;
            for j in 0..4 {
                let pos = i * 4 + j + 1;
                if pos <= width && get(raw, pos) {
                    v |= 1 << (3 - j);
                }
            }
            char::from_digit(v as u32, 16).unwrap()
        })
        .collect()
}

pub(crate) fn from_hex_string(s: &str, width: u32) -> Result<u128> {
    let nibbles = width.div_ceil(4);
    if s.chars().count() != nibbles as usize {
        return Err(Error::MaskParse(format!(
            "hex string {s:?} does not match width {width} ({nibbles} nibbles expected)"
        )));
    }
    let mut raw = 0u128;
    for (i, ch) in s.chars().enumerate() {
        let v = ch.to_digit(16).ok_or_else(|| {
            Error::MaskParse(format!("unexpected character {ch:?} in hex string"))
        })? as u8;
        for j in 0..4 {
            if v & (1 << (3 - j)) != 0 {
                let pos = i as u32 * 4 + j + 1;
                if pos > width {
                    return Err(Error::MaskParse(format!(
                        "hex string {s:?} sets padding bit {pos} beyond width {width}"
                    )));
                }
                set(&mut raw, pos);
            }
        }
    }
    Ok(raw)
}

/// Positions of the set bits, ascending.
pub(crate) fn set_positions(raw: u128) -> impl Iterator<Item = u32> {
    (1..=MAX_WIDTH).filter(move |&pos| get(raw, pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_one_is_most_significant() {
        assert_eq!(unit(1), 1u128 << 127);
        assert_eq!(unit(128), 1);
    }

    #[test]
    fn raw_order_matches_string_order() {
        // "011110" < "101101" < "110011" as strings and as raw values.
        let a = from_bit_string("011110").unwrap().0;
        let b = from_bit_string("101101").unwrap().0;
        let c = from_bit_string("110011").unwrap().0;
        assert!(a < b && b < c);
    }

    #[test]
    fn hex_round_trip() {
        let (raw, width) = from_bit_string("111000").unwrap();
        assert_eq!(to_hex_string(raw, width), "e0");
        assert_eq!(from_hex_string("e0", 6).unwrap(), raw);
        assert!(from_hex_string("e1", 6).is_err()); // padding bit set
    }
}
