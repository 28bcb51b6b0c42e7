//! The online-shopping payload preset.
//!
//! A shopping order is two byte strings (customer id, item number) framed
//! as `[u16 big-endian length][bytes]` twice and serialized into message
//! bits most-significant-bit first. The frame is self-delimiting, so a
//! message padded out to the protocol's N decodes unambiguously.

use crate::error::{ConfigError, ShoppingDecodeError};
use crate::protocol::Message;

const LEN_BITS: usize = 16;
const MAX_FIELD: usize = u16::MAX as usize;

fn push_byte(bits: &mut Vec<bool>, byte: u8) {
    for shift in (0..8).rev() {
        bits.push((byte >> shift) & 1 == 1);
    }
}

fn push_u16(bits: &mut Vec<bool>, value: u16) {
    let [hi, lo] = value.to_be_bytes();
    push_byte(bits, hi);
    push_byte(bits, lo);
}

/// Encodes a shopping order as a framed bit string.
///
/// The result is `8 * (2 + len(customer_id) + 2 + len(item_number))` bits
/// long; fields longer than a u16 length prefix can carry are rejected.
pub fn shopping_preset(customer_id: &[u8], item_number: &[u8]) -> Result<Message, ConfigError> {
    for field in [customer_id, item_number] {
        if field.len() > MAX_FIELD {
            return Err(ConfigError::ShoppingFieldTooLong {
                max: MAX_FIELD,
                actual: field.len(),
            });
        }
    }
    let mut bits = Vec::with_capacity(8 * (4 + customer_id.len() + item_number.len()));
    push_u16(&mut bits, customer_id.len() as u16);
    for &b in customer_id {
        push_byte(&mut bits, b);
    }
    push_u16(&mut bits, item_number.len() as u16);
    for &b in item_number {
        push_byte(&mut bits, b);
    }
    Ok(Message::from_bits(bits))
}

struct BitReader<'a> {
    bits: &'a [bool],
    offset: usize,
}

impl<'a> BitReader<'a> {
    fn take(&mut self, count: usize) -> Result<&'a [bool], ShoppingDecodeError> {
        if self.offset + count > self.bits.len() {
            return Err(ShoppingDecodeError::Truncated {
                offset: self.offset,
                needed: self.offset + count - self.bits.len(),
            });
        }
        let slice = &self.bits[self.offset..self.offset + count];
        self.offset += count;
        Ok(slice)
    }

    fn read_u16(&mut self) -> Result<u16, ShoppingDecodeError> {
        let bits = self.take(LEN_BITS)?;
        Ok(bits.iter().fold(0u16, |acc, &b| (acc << 1) | u16::from(b)))
    }

    fn read_bytes(&mut self, count: usize) -> Result<Vec<u8>, ShoppingDecodeError> {
        let bits = self.take(count * 8)?;
        Ok(bits
            .chunks(8)
            .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)))
            .collect())
    }
}

/// Decodes a shopping frame, ignoring any padding bits after it.
pub fn decode_shopping(message: &Message) -> Result<(Vec<u8>, Vec<u8>), ShoppingDecodeError> {
    let mut reader = BitReader {
        bits: message.bits(),
        offset: 0,
    };
    let len1 = reader.read_u16()? as usize;
    let customer_id = reader.read_bytes(len1)?;
    let len2 = reader.read_u16()? as usize;
    let item_number = reader.read_bytes(len2)?;
    Ok((customer_id, item_number))
}

/// Pads a frame with zero bits up to the protocol message length.
pub fn pad_to(message: &Message, n: usize) -> Result<Message, ConfigError> {
    if message.len() > n {
        return Err(ConfigError::ShoppingOverflow {
            needed: message.len(),
            available: n,
        });
    }
    let mut bits = message.bits().to_vec();
    bits.resize(n, false);
    Ok(Message::from_bits(bits))
}
