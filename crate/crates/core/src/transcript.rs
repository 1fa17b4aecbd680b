//! Per-edge, per-direction bit accounting for one simulated block.

use crate::model::NodeId;

/// One message: an ordered bit string sent on a directed edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    pub bits: Vec<u8>,
}

impl Message {
    pub fn len(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Everything exchanged while computing one block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolTranscript {
    pub block_len: usize,
    pub messages: Vec<Message>,
}

impl ProtocolTranscript {
    pub fn new(block_len: usize) -> Self {
        ProtocolTranscript {
            block_len,
            messages: Vec::new(),
        }
    }

    pub fn push(&mut self, from: NodeId, to: NodeId, bits: Vec<u8>) {
        self.messages.push(Message { from, to, bits });
    }

    pub fn total_bits(&self) -> u64 {
        self.messages.iter().map(Message::len).sum()
    }

    /// Bits sent in the direction `from -> to`.
    pub fn bits_from_to(&self, from: NodeId, to: NodeId) -> u64 {
        self.messages
            .iter()
            .filter(|m| m.from == from && m.to == to)
            .map(Message::len)
            .sum()
    }

    /// Bits exchanged on the undirected edge {a, b}, both directions.
    pub fn bits_on_edge(&self, a: NodeId, b: NodeId) -> u64 {
        self.bits_from_to(a, b) + self.bits_from_to(b, a)
    }
}
