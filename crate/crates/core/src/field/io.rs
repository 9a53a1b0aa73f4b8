//! Plain-text field files.
//!
//! ```text
//! MONOFLUX-FIELD v1 n=2 m=1 N=161 L=4 potential=double-well
//! <m values of node 0>
//! <m values of node 1>
//! ...
//! ```
//!
//! Nodes appear in storage order; values use 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Field, Grid};
use crate::error::{Error, Result};
use crate::potential::{PotentialKind, PotentialSpec};

pub const FIELD_MAGIC: &str = "MONOFLUX-FIELD";

pub fn write_field<W: Write>(field: &Field, mut out: W) -> std::io::Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "{FIELD_MAGIC} v1 n={} m={} N={} L={} potential={}",
        g.n(),
        field.m(),
        g.points_per_axis(),
        g.half_width(),
        field.potential().kind()
    )?;
    let mut line = String::new();
    for chunk in field.values().chunks(field.m()) {
        line.clear();
        for (a, v) in chunk.iter().enumerate() {
            if a > 0 {
                line.push(' ');
            }
            line.push_str(&crate::fmt_f64(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_field(field, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a field. The header names only the potential kind, so custom
/// polynomial fields need `potential` supplied; when given it must agree
/// with the header's kind and `m`.
pub fn read_field<R: BufRead>(
    reader: R,
    origin: &Path,
    potential: Option<PotentialSpec>,
) -> Result<Field> {
    let bad = |line: usize, message: String| Error::FieldFormat {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(origin, e))?,
        None => return Err(bad(1, "empty file".into())),
    };
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(FIELD_MAGIC) || tokens.next() != Some("v1") {
        return Err(bad(1, format!("expected '{FIELD_MAGIC} v1' header")));
    }
    let (mut n, mut m, mut np, mut half, mut kind) = (None, None, None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| bad(1, format!("malformed header token '{tok}'")))?;
        let num_err = |_| bad(1, format!("bad value for {key}: '{value}'"));
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(num_err)?),
            "m" => m = Some(value.parse::<usize>().map_err(num_err)?),
            "N" => np = Some(value.parse::<usize>().map_err(num_err)?),
            "L" => {
                half = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| bad(1, format!("bad value for L: '{value}'")))?,
                )
            }
            "potential" => kind = Some(value.parse::<PotentialKind>().map_err(|e| bad(1, e))?),
            other => return Err(bad(1, format!("unknown header key '{other}'"))),
        }
    }
    let missing = |k: &str| bad(1, format!("header missing {k}"));
    let (n, m, np, half, kind) = (
        n.ok_or_else(|| missing("n"))?,
        m.ok_or_else(|| missing("m"))?,
        np.ok_or_else(|| missing("N"))?,
        half.ok_or_else(|| missing("L"))?,
        kind.ok_or_else(|| missing("potential"))?,
    );
    let grid = Grid::new(n, half, np).map_err(|e| bad(1, e.to_string()))?;
    let potential = match potential {
        Some(p) => {
            if p.kind() != kind || p.m() != m {
                return Err(bad(
                    1,
                    format!(
                        "supplied potential {} (m={}) does not match header",
                        p.kind(),
                        p.m()
                    ),
                ));
            }
            p
        }
        None => match kind {
            PotentialKind::DoubleWell => PotentialSpec::double_well(),
            PotentialKind::GinzburgLandau => {
                PotentialSpec::ginzburg_landau(m).map_err(|e| bad(1, e.to_string()))?
            }
            PotentialKind::CustomPolynomial => {
                return Err(bad(
                    1,
                    "custom-polynomial fields need explicit coefficients".into(),
                ))
            }
        },
    };
    let mut values = Vec::with_capacity(grid.node_count() * m);
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split(' ') {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| bad(lineno, format!("bad number '{tok}'")))?,
            );
        }
        if values.len() - before != m {
            return Err(bad(
                lineno,
                format!("expected {m} values, got {}", values.len() - before),
            ));
        }
    }
    if values.len() != grid.node_count() * m {
        return Err(bad(
            grid.node_count() + 1,
            format!(
                "expected {} nodes, got {}",
                grid.node_count(),
                values.len() / m
            ),
        ));
    }
    Field::new(grid, potential, values)
}

pub fn load_field(path: impl AsRef<Path>, potential: Option<PotentialSpec>) -> Result<Field> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(BufReader::new(file), path, potential)
}
