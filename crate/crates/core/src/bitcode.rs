//! Growable bit strings used as concept and service codes.
//!
//! A code identifies a concept's position in the subsumption lattice: one
//! "identity bit" assigned at encoding time plus every bit inherited from
//! its ancestors. Bit position 1 is the least significant end and belongs
//! to the concept visited first by the encoder. Subsumption between two
//! codes is a word-parallel OR comparison, so a test costs Θ(N/W) for N
//! concepts on a W-bit machine.
//!
//! Codes of different widths compare as if the shorter operand were
//! zero-extended at the high end; appending concepts to an ontology grows
//! the width without invalidating older codes.

use std::fmt;

const WORD_BITS: usize = 64;

/// A bit string with an explicit width (the concept count at assignment
/// time). Content comparisons ignore trailing zero padding.
#[derive(Debug, Clone)]
pub struct BitCode {
    words: Vec<u64>,
    width: usize,
}

impl BitCode {
    /// All-zeros code of the given width (the universal parent's code).
    pub fn zeros(width: usize) -> Self {
        BitCode {
            words: vec![0; width.div_ceil(WORD_BITS)],
            width,
        }
    }

    /// All-ones code of the given width (the universal child's code).
    pub fn ones(width: usize) -> Self {
        let mut code = BitCode::zeros(width);
        for pos in 1..=width {
            code.set_bit(pos);
        }
        code
    }

    /// Width recorded at assignment time.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Sets the 1-indexed bit position, growing the width if needed.
    pub fn set_bit(&mut self, pos: usize) {
        assert!(pos >= 1, "bit positions are 1-indexed");
        let idx = (pos - 1) / WORD_BITS;
        if idx >= self.words.len() {
            self.words.resize(idx + 1, 0);
        }
        self.words[idx] |= 1u64 << ((pos - 1) % WORD_BITS);
        self.width = self.width.max(pos);
    }

    /// Reads the 1-indexed bit position; positions beyond the width are 0.
    pub fn bit(&self, pos: usize) -> bool {
        assert!(pos >= 1, "bit positions are 1-indexed");
        let idx = (pos - 1) / WORD_BITS;
        match self.words.get(idx) {
            Some(w) => (w >> ((pos - 1) % WORD_BITS)) & 1 == 1,
            None => false,
        }
    }

    /// Positions of all set bits, ascending.
    pub fn set_positions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(i * WORD_BITS + b + 1);
                w &= w - 1;
            }
        }
        out
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bitwise OR; the result takes the wider operand's width.
    pub fn or(&self, other: &BitCode) -> BitCode {
        let n = self.words.len().max(other.words.len());
        let mut words = Vec::with_capacity(n);
        for i in 0..n {
            words.push(self.words.get(i).copied().unwrap_or(0) | other.words.get(i).copied().unwrap_or(0));
        }
        BitCode {
            words,
            width: self.width.max(other.width),
        }
    }

    /// Bitwise AND; the result takes the wider operand's width.
    pub fn and(&self, other: &BitCode) -> BitCode {
        let n = self.words.len().max(other.words.len());
        let mut words = Vec::with_capacity(n);
        for i in 0..n {
            words.push(self.words.get(i).copied().unwrap_or(0) & other.words.get(i).copied().unwrap_or(0));
        }
        BitCode {
            words,
            width: self.width.max(other.width),
        }
    }

    /// In-place OR used by encoder fold loops.
    pub fn or_assign(&mut self, other: &BitCode) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i] |= w;
        }
        self.width = self.width.max(other.width);
    }

    /// True when `self | other == self`, i.e. every set bit of `other` is
    /// already set in `self`. Shorter operands compare zero-extended.
    pub fn absorbs(&self, other: &BitCode) -> bool {
        for i in 0..self.words.len().max(other.words.len()) {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            if a | b != a {
                return false;
            }
        }
        true
    }

    /// True when the two codes share at least one set bit.
    pub fn intersects(&self, other: &BitCode) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Shifts every bit position up by `offset`, placing this code into a
    /// composite code space segment.
    pub fn shifted(&self, offset: usize) -> BitCode {
        let mut out = BitCode::zeros(self.width + offset);
        for pos in self.set_positions() {
            out.set_bit(pos + offset);
        }
        out.width = self.width + offset;
        out
    }

    /// Hexadecimal rendering of the code value. Bit position 1 is the least
    /// significant bit of the value; the string has `ceil(width / 4)` digits,
    /// most significant digit first.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let word = self.words.get(bit / WORD_BITS).copied().unwrap_or(0);
            let nibble = (word >> (bit % WORD_BITS)) & 0xF;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Parses the `to_hex` rendering back into a code of the given width.
    pub fn from_hex(hex: &str, width: usize) -> crate::Result<BitCode> {
        let mut code = BitCode::zeros(width);
        let digits = hex.trim();
        for (i, ch) in digits.chars().rev().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| crate::Error::Malformed(format!("invalid hex code `{hex}`")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let pos = i * 4 + b + 1;
                    if pos > width {
                        return Err(crate::Error::Malformed(format!(
                            "hex code `{hex}` has bits beyond width {width}"
                        )));
                    }
                    code.set_bit(pos);
                }
            }
        }
        code.width = width;
        Ok(code)
    }

    fn trimmed(&self) -> &[u64] {
        let mut n = self.words.len();
        while n > 0 && self.words[n - 1] == 0 {
            n -= 1;
        }
        &self.words[..n]
    }
}

impl PartialEq for BitCode {
    /// Content equality; trailing zero padding (width growth) is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl Eq for BitCode {}

impl std::hash::Hash for BitCode {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state);
    }
}

impl PartialOrd for BitCode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitCode {
    /// Arbitrary total order (value order) used only for deterministic
    /// tie-breaking; unrelated to the subsumption order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.trimmed();
        let b = other.trimmed();
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().rev().cmp(b.iter().rev()))
    }
}

impl fmt::Display for BitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeros_absorbed_by_everything() {
        let z = BitCode::zeros(8);
        let mut c = BitCode::zeros(8);
        c.set_bit(3);
        assert!(c.absorbs(&z));
        assert!(!z.absorbs(&c));
    }

    #[test]
    fn fig2_style_positions_render_as_expected() {
        // bits {1,2,5} at width 9 is the canonical 0*10011 pattern
        let mut car = BitCode::zeros(9);
        car.set_bit(1);
        car.set_bit(2);
        car.set_bit(5);
        assert_eq!(car.set_positions(), vec![1, 2, 5]);
        assert_eq!(car.to_hex(), "013");

        let mut land = BitCode::zeros(9);
        land.set_bit(1);
        land.set_bit(2);
        assert!(car.absorbs(&land));
        assert!(!land.absorbs(&car));
    }

    #[test]
    fn padded_comparison_ignores_width() {
        let mut a = BitCode::zeros(4);
        a.set_bit(2);
        let mut b = BitCode::zeros(400);
        b.set_bit(2);
        assert_eq!(a, b);
        assert!(a.absorbs(&b) && b.absorbs(&a));
    }

    #[test]
    fn ones_cover_all_positions() {
        let bottom = BitCode::ones(130);
        assert_eq!(bottom.count_ones(), 130);
        assert_eq!(bottom.set_positions().len(), 130);
    }

    proptest! {
        #[test]
        fn hex_roundtrip(positions in proptest::collection::btree_set(1usize..300, 0..40), extra in 0usize..16) {
            let width = positions.iter().max().copied().unwrap_or(1) + extra;
            let mut code = BitCode::zeros(width);
            for &p in &positions {
                code.set_bit(p);
            }
            let back = BitCode::from_hex(&code.to_hex(), width).unwrap();
            prop_assert_eq!(back, code);
        }

        #[test]
        fn or_monotone(a in proptest::collection::btree_set(1usize..200, 0..30),
                       b in proptest::collection::btree_set(1usize..200, 0..30)) {
            let mut ca = BitCode::zeros(200);
            for &p in &a { ca.set_bit(p); }
            let mut cb = BitCode::zeros(200);
            for &p in &b { cb.set_bit(p); }
            let or = ca.or(&cb);
            prop_assert!(or.absorbs(&ca) && or.absorbs(&cb));
            let and = ca.and(&cb);
            prop_assert!(ca.absorbs(&and) && cb.absorbs(&and));
            prop_assert_eq!(and.is_zero(), !ca.intersects(&cb));
        }
    }
}
