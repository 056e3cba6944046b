//! Model container and clause dump.
//!
//! Layout of the model file:
//!
//! ```text
//! magic      4 bytes  "TMNV"
//! version    u32 LE
//! header_len u64 LE
//! header     JSON (params, width, vocabulary hash, epochs, state width)
//! states     per class (known, novel), per clause, 2 * width automata,
//!            stored as (state - 1) in `state_bytes` bytes LE
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Clause, ExtractedClause, Polarity, TmParams, TsetlinMachine};
use crate::corpus::Class;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"TMNV";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    params: TmParams,
    width: usize,
    vocab_hash: String,
    epochs_trained: u64,
    state_bytes: u8,
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<model>", e)
}

/// Writes `model` tagged with the hash of the vocabulary it was trained on.
pub fn write_model<W: Write>(model: &TsetlinMachine, vocab_hash: &str, mut out: W) -> Result<()> {
    let state_bytes: u8 = if model.params.states_per_action <= 128 { 1 } else { 2 };
    let header = Header {
        params: model.params,
        width: model.width,
        vocab_hash: vocab_hash.to_string(),
        epochs_trained: model.epochs_trained,
        state_bytes,
    };
    let header = serde_json::to_vec(&header)?;
    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&MODEL_FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    out.write_all(&(header.len() as u64).to_le_bytes()).map_err(io_err)?;
    out.write_all(&header).map_err(io_err)?;
    let mut buf = Vec::with_capacity(2 * model.width * state_bytes as usize);
    for pool in &model.pools {
        for clause in pool {
            buf.clear();
            for &s in clause.states() {
                let v = s - 1;
                if state_bytes == 1 {
                    buf.push(v as u8);
                } else {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            out.write_all(&buf).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

/// Reads a model and the vocabulary hash stored with it.
pub fn read_model<R: Read>(mut input: R) -> Result<(TsetlinMachine, String)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::malformed("model", "bad magic"));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(io_err)?;
    let version = u32::from_le_bytes(word);
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::malformed("model", format!("unsupported version {version}")));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(io_err)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(Error::malformed("model", "oversized header"));
    }
    let mut header = vec![0u8; len];
    input.read_exact(&mut header).map_err(io_err)?;
    let header: Header = serde_json::from_slice(&header)?;
    header.params.validate()?;
    if !matches!(header.state_bytes, 1 | 2) {
        return Err(Error::malformed("model", format!("state width {}", header.state_bytes)));
    }

    let n = header.params.states_per_action;
    let half = header.params.clauses / 2;
    let lits = 2 * header.width;
    let mut raw = vec![0u8; lits * header.state_bytes as usize];
    let mut read_pool = || -> Result<Vec<Clause>> {
        (0..header.params.clauses)
            .map(|j| {
                input.read_exact(&mut raw).map_err(io_err)?;
                let states: Vec<u16> = if header.state_bytes == 1 {
                    raw.iter().map(|&b| u16::from(b) + 1).collect()
                } else {
                    raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) + 1).collect()
                };
                let polarity = if j < half { Polarity::Positive } else { Polarity::Negative };
                Clause::from_states(polarity, n, states)
            })
            .collect()
    };
    let known = read_pool()?;
    let novel = read_pool()?;
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(io_err)? != 0 {
        return Err(Error::malformed("model", "trailing bytes"));
    }
    let model = TsetlinMachine::from_pools(header.params, header.width, [known, novel], header.epochs_trained)?;
    Ok((model, header.vocab_hash))
}

#[derive(Serialize)]
struct ClauseRow<'a> {
    class: Class,
    polarity: Polarity,
    clause_index: usize,
    plain_words: String,
    negated_words: &'a str,
}

/// CSV with columns `class,polarity,clause_index,plain_words,negated_words`;
/// word lists are `;`-joined.
pub fn write_clause_dump<W: Write>(clauses: &[ExtractedClause], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in clauses {
        let negated = c.negated_words.join(";");
        w.serialize(ClauseRow {
            class: c.class,
            polarity: c.polarity,
            clause_index: c.index,
            plain_words: c.plain_words.join(";"),
            negated_words: &negated,
        })?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
