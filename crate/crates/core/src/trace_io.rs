//! Trace file formats for interchange and replay.
//!
//! Text format: a header of `key=value` lines (`kind`, `n`, `seed`, `base`,
//! `element_size`, `generator`), a blank line, then one decimal resolved
//! address per line. This format round-trips the full trace including its
//! provenance.
//!
//! Binary format: a 16-byte block (8-byte magic `VATTRC01`, then the address
//! count as a little-endian u64) followed by the resolved addresses as
//! little-endian u64s. The binary form carries addresses only; reading it
//! back yields a replay trace with base 0 and element size 1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::GENERATOR_NAME;
use crate::workloads::{Trace, WorkloadKind};

pub const BINARY_MAGIC: &[u8; 8] = b"VATTRC01";

/// Provenance recorded in the text header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub kind: WorkloadKind,
    pub seed: u64,
    pub generator: String,
}

impl TraceMeta {
    pub fn new(kind: WorkloadKind, seed: u64) -> Self {
        TraceMeta {
            kind,
            seed,
            generator: GENERATOR_NAME.to_string(),
        }
    }
}

pub fn write_text<W: Write>(out: &mut W, meta: &TraceMeta, trace: &Trace) -> Result<()> {
    writeln!(out, "kind={}", meta.kind)?;
    writeln!(out, "n={}", trace.n)?;
    writeln!(out, "seed={}", meta.seed)?;
    writeln!(out, "base={}", trace.base)?;
    writeln!(out, "element_size={}", trace.element_size)?;
    writeln!(out, "generator={}", meta.generator)?;
    writeln!(out)?;
    for addr in trace.resolved() {
        writeln!(out, "{addr}")?;
    }
    Ok(())
}

pub fn write_text_file(path: &Path, meta: &TraceMeta, trace: &Trace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_text(&mut out, meta, trace)?;
    out.flush()?;
    Ok(())
}

pub fn read_text<R: Read>(input: R) -> Result<(TraceMeta, Trace)> {
    let mut lines = BufReader::new(input).lines();
    let mut kind = None;
    let mut n = None;
    let mut seed = None;
    let mut base = None;
    let mut element_size = None;
    let mut generator = None;

    loop {
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::Parse("missing blank line after header".into())),
        };
        if line.is_empty() {
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header line {line:?}")))?;
        match key {
            "kind" => {
                kind = Some(
                    value
                        .parse::<WorkloadKind>()
                        .map_err(|e| Error::Parse(format!("bad kind: {e}")))?,
                )
            }
            "n" => n = Some(parse_u64("n", value)?),
            "seed" => seed = Some(parse_u64("seed", value)?),
            "base" => base = Some(parse_u64("base", value)?),
            "element_size" => element_size = Some(parse_u64("element_size", value)?),
            "generator" => generator = Some(value.to_string()),
            other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
        }
    }

    let kind = kind.ok_or_else(|| Error::Parse("header missing kind".into()))?;
    let n = n.ok_or_else(|| Error::Parse("header missing n".into()))?;
    let seed = seed.ok_or_else(|| Error::Parse("header missing seed".into()))?;
    let base = base.ok_or_else(|| Error::Parse("header missing base".into()))?;
    let element_size =
        element_size.ok_or_else(|| Error::Parse("header missing element_size".into()))?;
    let generator = generator.ok_or_else(|| Error::Parse("header missing generator".into()))?;
    if element_size == 0 {
        return Err(Error::Parse("element_size must be positive".into()));
    }

    let mut accesses = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let addr = parse_u64("address", &line)?;
        if addr < base || (addr - base) % element_size != 0 {
            return Err(Error::Parse(format!(
                "address {addr} is not base + i * element_size for base {base}, element size {element_size}"
            )));
        }
        accesses.push((addr - base) / element_size);
    }

    Ok((
        TraceMeta {
            kind,
            seed,
            generator,
        },
        Trace {
            base,
            element_size,
            accesses,
            n,
        },
    ))
}

pub fn read_text_file(path: &Path) -> Result<(TraceMeta, Trace)> {
    read_text(File::open(path)?)
}

fn parse_u64(what: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::Parse(format!("bad {what} value {value:?}")))
}

pub fn write_binary<W: Write>(out: &mut W, addresses: &[u64]) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(addresses.len() as u64).to_le_bytes())?;
    for &a in addresses {
        out.write_all(&a.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_binary_file(path: &Path, addresses: &[u64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_binary(&mut out, addresses)?;
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<u64>> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Parse("binary trace shorter than its 16-byte header".into()))?;
    if &header[..8] != BINARY_MAGIC {
        return Err(Error::Parse(format!(
            "bad magic {:?}, expected {:?}",
            &header[..8],
            BINARY_MAGIC
        )));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let mut addresses = Vec::with_capacity(count as usize);
    let mut buf = [0u8; 8];
    for i in 0..count {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::Parse(format!("truncated at address {i} of {count}")))?;
        addresses.push(u64::from_le_bytes(buf));
    }
    Ok(addresses)
}

pub fn read_binary_file(path: &Path) -> Result<Vec<u64>> {
    read_binary(File::open(path)?)
}

/// Sniff the format of a trace file: binary if the magic matches, text
/// otherwise. Binary replays come back with synthetic metadata.
pub fn read_any_file(path: &Path) -> Result<(Option<TraceMeta>, Trace)> {
    let mut probe = [0u8; 8];
    let mut f = File::open(path)?;
    let is_binary = match f.read_exact(&mut probe) {
        Ok(()) => &probe == BINARY_MAGIC,
        Err(_) => false,
    };
    if is_binary {
        Ok((None, Trace::from_addresses(read_binary_file(path)?)))
    } else {
        let (meta, trace) = read_text_file(path)?;
        Ok((Some(meta), trace))
    }
}
