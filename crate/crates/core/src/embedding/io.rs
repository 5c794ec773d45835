//! word2vec text and binary formats.
//!
//! Text: a `<vocab_size> <dim>` header, then `<word> v1 ... vdim` per line.
//! Values are written with the shortest representation that reads back to
//! the same `f32`, so a save/load cycle is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::table::EmbeddingTable;
use crate::{Error, Result};

pub fn write_word2vec_text<W: Write>(table: &EmbeddingTable, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    let mut line = String::new();
    for (word, v) in table.rows() {
        use std::fmt::Write as _;
        line.clear();
        line.push_str(word);
        for x in v {
            write!(line, " {x}").expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let parse = |s: Option<&str>| -> Result<usize> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("malformed header `{line}`")))
    };
    let n = parse(it.next())?;
    let dim = parse(it.next())?;
    if it.next().is_some() || dim == 0 {
        return Err(Error::parse(1, format!("malformed header `{line}`")));
    }
    Ok((n, dim))
}

pub fn read_word2vec_text<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let (n, dim) = parse_header(&header)?;
    let mut rows = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line").to_string();
        let v = fields
            .map(|f| {
                f.parse::<f32>()
                    .map_err(|_| Error::parse(line_no, format!("non-numeric value `{f}`")))
            })
            .collect::<Result<Vec<f32>>>()?;
        if v.len() != dim {
            return Err(Error::parse(
                line_no,
                format!("expected {dim} values, found {}", v.len()),
            ));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::parse(line_no, "non-finite value"));
        }
        rows.push((word, v));
    }
    if rows.len() != n {
        return Err(Error::Embedding(format!(
            "header announces {n} words but the file has {}",
            rows.len()
        )));
    }
    EmbeddingTable::from_rows(dim, rows)
}

/// Binary variant: text header, then per word `<word> ` followed by `dim`
/// little-endian `f32` values and a newline.
pub fn write_word2vec_binary<W: Write>(table: &EmbeddingTable, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for (word, v) in table.rows() {
        out.write_all(word.as_bytes())?;
        out.write_all(b" ")?;
        for x in v {
            out.write_all(&x.to_le_bytes())?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_word2vec_binary<R: BufRead>(mut reader: R) -> Result<EmbeddingTable> {
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (n, dim) = parse_header(header.trim())?;
    let mut rows = Vec::with_capacity(n);
    let mut buf = vec![0u8; dim * 4];
    for i in 0..n {
        let mut word = Vec::new();
        reader.read_until(b' ', &mut word)?;
        if word.pop() != Some(b' ') {
            return Err(Error::Embedding(format!(
                "header announces {n} words but the file has {i}"
            )));
        }
        while word.first() == Some(&b'\n') {
            word.remove(0);
        }
        let word = String::from_utf8(word)
            .map_err(|_| Error::Embedding(format!("word {} is not UTF-8", i + 1)))?;
        reader
            .read_exact(&mut buf)
            .map_err(|_| Error::Embedding(format!("truncated vector for `{word}`")))?;
        let v: Vec<f32> = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        rows.push((word, v));
    }
    EmbeddingTable::from_rows(dim, rows)
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_word2vec_text(table, BufWriter::new(file))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec_text(BufReader::new(file))
}
