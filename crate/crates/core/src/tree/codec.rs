//! Text and binary tree encodings, and contour/height CSV export.
//!
//! Text: `types:<csv> parents:<csv>` with 1-based types and 0-based parent
//! indices for vertices 1..n-1. Binary: little-endian u32 values `n`,
//! `parents[1..n-1]`, `types[0..n-1]` (types 1-based).

use std::io::{Read, Write};

use super::multitype::MultitypeTree;
use crate::error::{Error, Result};

fn csv<T: ToString>(xs: impl Iterator<Item = T>) -> String {
    xs.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn to_text(t: &MultitypeTree) -> String {
    format!(
        "types:{} parents:{}",
        csv(t.types().iter().map(|&x| x as u32 + 1)),
        csv(t.shape().parents()[1..].iter())
    )
}

fn parse_list(s: &str, what: &str) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u32>()
                .map_err(|e| Error::Codec(format!("bad {what} entry `{x}`: {e}")))
        })
        .collect()
}

pub fn from_text(line: &str) -> Result<MultitypeTree> {
    let line = line.trim();
    let rest = line
        .strip_prefix("types:")
        .ok_or_else(|| Error::Codec("line must start with `types:`".into()))?;
    let (types, parents) = rest
        .split_once(" parents:")
        .or_else(|| rest.strip_suffix(" parents:").map(|t| (t, "")))
        .ok_or_else(|| Error::Codec("missing ` parents:` section".into()))?;
    let types = parse_list(types, "type")?;
    let parents = parse_list(parents, "parent")?;
    if types.iter().any(|&t| t == 0 || t > u16::MAX as u32) {
        return Err(Error::Codec("types are 1-based".into()));
    }
    if parents.len() + 1 != types.len() {
        return Err(Error::Codec(format!(
            "{} parents for {} vertices",
            parents.len(),
            types.len()
        )));
    }
    let mut full = Vec::with_capacity(types.len());
    full.push(0);
    full.extend(parents);
    MultitypeTree::from_parents(&full, types.iter().map(|&t| (t - 1) as u16).collect())
}

pub fn write_binary<W: Write>(w: &mut W, t: &MultitypeTree) -> std::io::Result<()> {
    let n = t.len();
    let mut buf = Vec::with_capacity(4 * (2 * n));
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for &p in &t.shape().parents()[1..] {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    for &ty in t.types() {
        buf.extend_from_slice(&(ty as u32 + 1).to_le_bytes());
    }
    w.write_all(&buf)
}

/// Reads one tree, or `None` at a clean end of stream.
pub fn read_binary<R: Read>(r: &mut R) -> Result<Option<MultitypeTree>> {
    let mut word = [0u8; 4];
    match r.read_exact(&mut word) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let n = u32::from_le_bytes(word) as usize;
    if n == 0 {
        return Err(Error::Codec("tree with zero vertices".into()));
    }
    let mut bytes = vec![0u8; 4 * (2 * n - 1)];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Codec(format!("truncated tree record: {e}")))?;
    let vals: Vec<u32> = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let mut parents = Vec::with_capacity(n);
    parents.push(0);
    parents.extend_from_slice(&vals[..n - 1]);
    let types = vals[n - 1..]
        .iter()
        .map(|&t| {
            if t == 0 || t > u16::MAX as u32 {
                Err(Error::Codec(format!("type label {t} out of range")))
            } else {
                Ok((t - 1) as u16)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MultitypeTree::from_parents(&parents, types).map(Some)
}

pub fn read_all_binary<R: Read>(r: &mut R) -> Result<Vec<MultitypeTree>> {
    let mut out = Vec::new();
    while let Some(t) = read_binary(r)? {
        out.push(t);
    }
    Ok(out)
}

/// `(step, value)` CSV rows for a contour or height sequence.
pub fn write_sequence_csv<W: Write>(w: W, values: &[u32]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["step", "value"]).map_err(csv_err)?;
    for (i, v) in values.iter().enumerate() {
        wr.serialize((i, v)).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let t = MultitypeTree::from_parents(&[0, 0, 1, 0], vec![0, 1, 0, 0]).unwrap();
        let s = to_text(&t);
        assert_eq!(s, "types:1,2,1,1 parents:0,1,0");
        assert_eq!(from_text(&s).unwrap(), t);
        let single = from_text("types:1 parents:").unwrap();
        assert_eq!(single.len(), 1);
        assert!(from_text("types:1,1 parents:").is_err());
        assert!(from_text("types:0 parents:").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let a = MultitypeTree::from_parents(&[0, 0, 1, 0], vec![0, 1, 0, 0]).unwrap();
        let b = MultitypeTree::from_parents(&[0], vec![0]).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &a).unwrap();
        write_binary(&mut buf, &b).unwrap();
        assert_eq!(buf.len(), 4 * (1 + 3 + 4) + 4 * 2);
        let back = read_all_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
        assert!(read_all_binary(&mut &buf[..buf.len() - 2]).is_err());
    }

    #[test]
    fn sequence_csv() {
        let mut out = Vec::new();
        write_sequence_csv(&mut out, &[0, 1, 0]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "step,value\n0,0\n1,1\n2,0\n"
        );
    }
}
