//! Reversible byte → printable character mapping used by byte-level BPE.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Bijection between the 256 byte values and printable characters.
///
/// Printable Latin-1 bytes map to themselves; the rest are shifted to
/// `U+0100` upward in byte order (space becomes `Ġ`, newline `Ċ`).
#[derive(Debug, Clone)]
pub struct ByteEncoder {
    byte_to_char: [char; 256],
    char_to_byte: HashMap<char, u8>,
}

impl ByteEncoder {
    pub fn new() -> Self {
        let printable = |b: u8| matches!(b, b'!'..=b'~' | 0xA1..=0xAC | 0xAE..=0xFF);
        let mut byte_to_char = ['\0'; 256];
        let mut shifted = 0u32;
        for b in 0..=255u8 {
            byte_to_char[b as usize] = if printable(b) {
                char::from(b)
            } else {
                shifted += 1;
                char::from_u32(255 + shifted).unwrap()
            };
        }
        let char_to_byte = byte_to_char.iter().enumerate().map(|(b, &c)| (c, b as u8)).collect();
        ByteEncoder {
            byte_to_char,
            char_to_byte,
        }
    }

    /// Shared instance.
    pub fn global() -> &'static ByteEncoder {
        static ENC: OnceLock<ByteEncoder> = OnceLock::new();
        ENC.get_or_init(ByteEncoder::new)
    }

    pub fn encode_byte(&self, b: u8) -> char {
        self.byte_to_char[b as usize]
    }

    pub fn decode_char(&self, c: char) -> Option<u8> {
        self.char_to_byte.get(&c).copied()
    }

    pub fn encode(&self, bytes: &[u8]) -> String {
        bytes.iter().map(|&b| self.encode_byte(b)).collect()
    }

    /// Inverse of [`encode`](Self::encode); `None` on characters outside the map.
    pub fn decode(&self, s: &str) -> Option<Vec<u8>> {
        s.chars().map(|c| self.decode_char(c)).collect()
    }
}

impl Default for ByteEncoder {
    fn default() -> Self {
        Self::new()
    }
}
