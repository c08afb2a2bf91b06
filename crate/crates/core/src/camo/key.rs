// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CamoError;

/// Key bit vector. Bit `i` is bit `i` of the integer shown by the hex form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Key(Vec<bool>);

impl Key {
    pub fn new(bits: Vec<bool>) -> Key {
        Key(bits)
    }

    pub fn zeros(len: usize) -> Key {
        Key(vec![false; len])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    /// Little-endian integer held in `width` bits starting at `offset`.
    pub fn code(&self, offset: usize, width: usize) -> usize {
        (0..width).fold(0, |acc, j| acc | (self.0[offset + j] as usize) << j)
    }

    pub fn set_code(&mut self, offset: usize, width: usize, code: usize) {
        for j in 0..width {
            self.0[offset + j] = code >> j & 1 == 1;
        }
    }

    /// `len:hex`, most significant nibble first.
    pub fn to_hex(&self) -> String {
        let nibbles = self.0.len().div_ceil(4).max(1);
        let digits: String = (0..nibbles)
            .rev()
            .map(|n| {
                let v = (0..4)
                    .filter(|&j| self.0.get(4 * n + j).copied().unwrap_or(false))
                    .fold(0u32, |acc, j| acc | 1 << j);
                char::from_digit(v, 16).unwrap()
            })
            .collect();
        format!("{}:{}", self.0.len(), digits)
    }

    pub fn from_hex(s: &str) -> Result<Key, CamoError> {
        let bad = || CamoError::BadKeyString(s.to_string());
        let (len, digits) = s.split_once(':').ok_or_else(bad)?;
        let len: usize = len.trim().parse().map_err(|_| bad())?;
        let digits = digits.trim().trim_start_matches("0x");
        let mut bits = vec![false; len];
        for (n, c) in digits.chars().rev().enumerate() {
            let v = c.to_digit(16).ok_or_else(bad)?;
            for j in 0..4 {
                let i = 4 * n + j;
                let bit = v >> j & 1 == 1;
                if i < len {
                    bits[i] = bit;
                } else if bit {
                    return Err(bad());
                }
            }
        }
        Ok(Key(bits))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Key {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Key {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Key, D::Error> {
        let s = String::deserialize(d)?;
        Key::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
