//! Plain-text channel file format.
//!
//! ```text
//! irs-channels 1
//! <M> <N>
//! # h_r: M*N entries, row-major
//! <re> <im>
//! ...
//! # h_v: N entries
//! ...
//! # h_d: M entries
//! ...
//! ```
//!
//! The first non-comment line carries the magic word and the format version,
//! the second the dimensions. Lines starting with `#` and blank lines are
//! ignored. Components are written with 17 significant digits so every
//! binary64 value round-trips exactly.

use std::io::{BufRead, Write};

use super::ChannelSet;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

pub const MAGIC: &str = "irs-channels";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_channels<W: Write>(channels: &ChannelSet, mut out: W) -> Result<()> {
    let (m, n) = (channels.m(), channels.n());
    writeln!(out, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "{m} {n}")?;
    writeln!(out, "# h_r: {m}x{n}, row-major")?;
    for i in 0..m {
        for j in 0..n {
            write_entry(&mut out, channels.h_r[(i, j)])?;
        }
    }
    writeln!(out, "# h_v: {n}")?;
    for z in channels.h_v.iter() {
        write_entry(&mut out, *z)?;
    }
    writeln!(out, "# h_d: {m}")?;
    for z in channels.h_d.iter() {
        write_entry(&mut out, *z)?;
    }
    Ok(())
}

fn write_entry<W: Write>(out: &mut W, z: Complex64) -> std::io::Result<()> {
    writeln!(out, "{:.16e} {:.16e}", z.re, z.im)
}

pub fn channels_to_string(channels: &ChannelSet) -> String {
    let mut buf = Vec::new();
    write_channels(channels, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("channel files are ASCII")
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::ChannelFormat {
        line,
        message: message.into(),
    }
}

pub fn read_channels<R: BufRead>(input: R) -> Result<ChannelSet> {
    let mut lines = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((idx + 1, trimmed.to_owned()));
    }
    let mut it = lines.into_iter();

    let (ln, header) = it.next().ok_or_else(|| format_err(1, "empty file"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(format_err(
            ln,
            format!("expected header `{MAGIC} <version>`"),
        ));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format_err(ln, "missing or malformed format version"))?;
    if version != FORMAT_VERSION {
        return Err(format_err(
            ln,
            format!("unsupported format version {version}"),
        ));
    }
    if parts.next().is_some() {
        return Err(format_err(ln, "trailing tokens after format version"));
    }

    let (ln, dims) = it
        .next()
        .ok_or_else(|| format_err(ln + 1, "missing dimensions line"))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format_err(ln, "dimensions must be two positive integers `M N`"))?;
    let (m, n) = match dims[..] {
        [m, n] if m > 0 && n > 0 => (m, n),
        _ => {
            return Err(format_err(
                ln,
                "dimensions must be two positive integers `M N`",
            ))
        }
    };

    let expected = m * n + n + m;
    let mut values = Vec::with_capacity(expected);
    let mut last_line = ln;
    for (ln, text) in it {
        last_line = ln;
        if values.len() == expected {
            return Err(format_err(
                ln,
                format!("unexpected data after {expected} entries"),
            ));
        }
        values.push(parse_entry(ln, &text)?);
    }
    if values.len() != expected {
        return Err(format_err(
            last_line,
            format!(
                "expected {expected} entries for M={m}, N={n}, found {}",
                values.len()
            ),
        ));
    }

    let h_r = CMatrix::from_row_slice(m, n, &values[..m * n]);
    let h_v = CVector::from_column_slice(&values[m * n..m * n + n]);
    let h_d = CVector::from_column_slice(&values[m * n + n..]);
    ChannelSet::new(h_r, h_v, h_d)
}

fn parse_entry(line: usize, text: &str) -> Result<Complex64> {
    let mut parts = text.split_whitespace();
    let mut component = |name| -> Result<f64> {
        let tok = parts
            .next()
            .ok_or_else(|| format_err(line, format!("missing {name} component")))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| format_err(line, format!("cannot parse {name} component `{tok}`")))?;
        if !v.is_finite() {
            return Err(format_err(
                line,
                format!("non-finite {name} component `{tok}`"),
            ));
        }
        Ok(v)
    };
    let re = component("real")?;
    let im = component("imaginary")?;
    if parts.next().is_some() {
        return Err(format_err(line, "expected exactly two numbers `re im`"));
    }
    Ok(Complex64::new(re, im))
}

pub fn channels_from_str(text: &str) -> Result<ChannelSet> {
    read_channels(text.as_bytes())
}
