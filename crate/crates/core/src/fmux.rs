//! Fully-multiplexible functions: parity, MAX and the k-th largest value.
//!
//! Each function lifts a sensed value into a fixed-size payload, merges
//! payloads with a commutative and associative `combine`, and reads the
//! final output off the merged payload. The payload size never depends on
//! how many readings were merged into it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Value = u32;

pub const DEFAULT_ALPHABET: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum FmuxError {
    #[error("value {value} outside alphabet of size {alphabet}")]
    ValueOutOfAlphabet { value: Value, alphabet: u32 },
    #[error("no values to combine")]
    Empty,
    #[error("invalid function parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum FmuxFunction {
    Parity,
    Max {
        #[serde(default = "default_alphabet")]
        alphabet_size: u32,
    },
    /// k-th largest reading (k = 1 is MAX).
    Kth {
        k: usize,
        #[serde(default = "default_alphabet")]
        alphabet_size: u32,
    },
}

fn default_alphabet() -> u32 {
    DEFAULT_ALPHABET
}

/// Merged state of a subset of readings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Parity(bool),
    /// `None` is the identity (no readings yet).
    Max(Option<Value>),
    /// The `k` largest readings seen, descending, `None`-padded.
    TopK(Vec<Option<Value>>),
}

impl FmuxFunction {
    pub fn max(alphabet_size: u32) -> Self {
        FmuxFunction::Max { alphabet_size }
    }

    pub fn kth(k: usize, alphabet_size: u32) -> Self {
        FmuxFunction::Kth { k, alphabet_size }
    }

    pub fn validate(&self) -> Result<(), FmuxError> {
        match *self {
            FmuxFunction::Parity => Ok(()),
            FmuxFunction::Max { alphabet_size } if alphabet_size >= 2 => Ok(()),
            FmuxFunction::Kth { k, alphabet_size } if k >= 1 && alphabet_size >= 2 => Ok(()),
            other => Err(FmuxError::BadParams(format!("{other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FmuxFunction::Parity => "parity",
            FmuxFunction::Max { .. } => "max",
            FmuxFunction::Kth { .. } => "kth",
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        match *self {
            FmuxFunction::Parity => 2,
            FmuxFunction::Max { alphabet_size } | FmuxFunction::Kth { alphabet_size, .. } => {
                alphabet_size
            }
        }
    }

    /// `|R(f)|`. For the k-th statistic this counts k-element multisets of
    /// the alphabet, which is the size of the top-k payload space.
    pub fn range_size(&self) -> f64 {
        match *self {
            FmuxFunction::Parity => 2.0,
            FmuxFunction::Max { alphabet_size } => alphabet_size as f64,
            FmuxFunction::Kth { k, alphabet_size } => {
                // C(n + k - 1, k)
                let n = alphabet_size as f64;
                (1..=k).fold(1.0, |acc, j| acc * (n + j as f64 - 1.0) / j as f64)
            }
        }
    }

    pub fn bits_per_packet(&self) -> f64 {
        self.range_size().log2()
    }

    pub fn identity(&self) -> Payload {
        match *self {
            FmuxFunction::Parity => Payload::Parity(false),
            FmuxFunction::Max { .. } => Payload::Max(None),
            FmuxFunction::Kth { k, .. } => Payload::TopK(vec![None; k]),
        }
    }

    pub fn lift(&self, x: Value) -> Result<Payload, FmuxError> {
        let alphabet = self.alphabet_size();
        if x >= alphabet {
            return Err(FmuxError::ValueOutOfAlphabet { value: x, alphabet });
        }
        Ok(match *self {
            FmuxFunction::Parity => Payload::Parity(x == 1),
            FmuxFunction::Max { .. } => Payload::Max(Some(x)),
            FmuxFunction::Kth { k, .. } => {
                let mut top = vec![None; k];
                top[0] = Some(x);
                Payload::TopK(top)
            }
        })
    }

    /// Merges two payloads of the same function.
    pub fn combine(&self, a: &Payload, b: &Payload) -> Payload {
        match (a, b) {
            (Payload::Parity(x), Payload::Parity(y)) => Payload::Parity(x ^ y),
            (Payload::Max(x), Payload::Max(y)) => Payload::Max((*x).max(*y)),
            (Payload::TopK(x), Payload::TopK(y)) => {
                let k = x.len();
                // Merge of two descending lists; `None` sorts below every value.
                let mut out = Vec::with_capacity(k);
                let (mut i, mut j) = (0, 0);
                while out.len() < k {
                    if x[i] >= y[j] {
                        out.push(x[i]);
                        i += 1;
                    } else {
                        out.push(y[j]);
                        j += 1;
                    }
                }
                Payload::TopK(out)
            }
            _ => panic!("payload kinds do not match: {a:?} vs {b:?}"),
        }
    }

    /// Combine into `acc` in place.
    pub fn absorb(&self, acc: &mut Payload, other: &Payload) {
        *acc = self.combine(acc, other);
    }

    /// Output of a merged payload; `None` when it holds too few readings
    /// (MAX of nothing, or fewer than k readings).
    pub fn finalize(&self, p: &Payload) -> Option<Value> {
        match p {
            Payload::Parity(b) => Some(*b as Value),
            Payload::Max(v) => *v,
            Payload::TopK(top) => *top.last().expect("k >= 1"),
        }
    }

    pub fn lift_and_combine(&self, values: &[Value]) -> Result<Payload, FmuxError> {
        if values.is_empty() {
            return Err(FmuxError::Empty);
        }
        let mut acc = self.identity();
        for &x in values {
            let p = self.lift(x)?;
            self.absorb(&mut acc, &p);
        }
        Ok(acc)
    }

    /// Ground truth computed directly from all readings, without payloads.
    pub fn offline_evaluate(&self, values: &[Value]) -> Option<Value> {
        match *self {
            FmuxFunction::Parity => Some(values.iter().fold(0, |acc, &x| acc ^ (x & 1))),
            FmuxFunction::Max { .. } => values.iter().copied().max(),
            FmuxFunction::Kth { k, .. } => {
                let mut sorted = values.to_vec();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                sorted.get(k - 1).copied()
            }
        }
    }

    /// Checks that evaluating per part of `partition` and merging the part
    /// payloads gives the same output as the offline evaluation.
    /// `partition` holds indices into `values`.
    pub fn check_divisible(&self, partition: &[Vec<usize>], values: &[Value]) -> Result<bool, FmuxError> {
        let mut acc = self.identity();
        for part in partition {
            let part_values: Vec<_> = part.iter().map(|&i| values[i]).collect();
            if part_values.is_empty() {
                continue;
            }
            let p = self.lift_and_combine(&part_values)?;
            self.absorb(&mut acc, &p);
        }
        Ok(self.finalize(&acc) == self.offline_evaluate(values))
    }

    /// Fixed-width wire encoding. The length depends only on the function.
    pub fn encode(&self, p: &Payload) -> Vec<u8> {
        match p {
            Payload::Parity(b) => vec![*b as u8],
            Payload::Max(v) => v.unwrap_or(Value::MAX).to_le_bytes().to_vec(),
            Payload::TopK(top) => top
                .iter()
                .flat_map(|v| v.unwrap_or(Value::MAX).to_le_bytes())
                .collect(),
        }
    }
}
