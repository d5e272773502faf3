//! Field serialization: a little-endian binary codec and a CSV codec.
//!
//! Both decoders validate everything before allocating or trusting a length:
//! magic, version, grid shape (including the node budget), value count, and
//! coordinate columns. Malformed input of any kind is an error, never a
//! panic; NaN values are rejected, infinities are allowed (blown-up states
//! are legitimately infinite).
//!
//! Binary layout, all little-endian:
//!
//! | offset | size      | field                          |
//! |--------|-----------|--------------------------------|
//! | 0      | 4         | magic `FNPB`                   |
//! | 4      | 2         | format version, currently 1    |
//! | 6      | 1         | boundary: 0 dirichlet-zero, 1 frozen |
//! | 7      | 1         | dimension                      |
//! | 8      | 4         | points per axis                |
//! | 12     | 8         | radius (f64)                   |
//! | 20     | 8 each    | points^dim values (f64), row-major |

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, GridField, MAX_NODES};

const MAGIC: &[u8; 4] = b"FNPB";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 20;

/// CSV first line; the second carries the grid shape.
pub const CSV_SIGNATURE: &str = "# fnparab-field-csv v1";

/// FNV-1a over the raw f64 bit patterns; a cheap content fingerprint for
/// certificates and logs (not a cryptographic hash).
pub fn fingerprint(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn boundary_code(b: Boundary) -> u8 {
    match b {
        Boundary::DirichletZero => 0,
        Boundary::Frozen => 1,
    }
}

fn boundary_from_code(c: u8) -> Result<Boundary> {
    match c {
        0 => Ok(Boundary::DirichletZero),
        1 => Ok(Boundary::Frozen),
        other => Err(Error::Format(format!("unknown boundary code {other}"))),
    }
}

/// Serializes a field to the binary layout above.
pub fn encode_binary(f: &GridField) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.node_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(boundary_code(f.boundary()));
    out.push(grid.dim() as u8);
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.radius().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses the binary layout. Every header field is validated (and the value
/// count checked against the node budget) before the value block is read.
pub fn decode_binary(bytes: &[u8]) -> Result<GridField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "binary field too short: {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected FNPB".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}, expected {VERSION}"
        )));
    }
    let boundary = boundary_from_code(bytes[6])?;
    let dim = bytes[7] as usize;
    let points = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let radius = f64::from_le_bytes(bytes[12..20].try_into().expect("8 header bytes"));
    let grid = Grid::new(dim, points, radius)?;
    debug_assert!(grid.node_count() <= MAX_NODES);
    let expect = HEADER_LEN + 8 * grid.node_count();
    if bytes.len() != expect {
        return Err(Error::Format(format!(
            "binary field length {} does not match grid ({} expected)",
            bytes.len(),
            expect
        )));
    }
    let mut values = Vec::with_capacity(grid.node_count());
    for chunk in bytes[HEADER_LEN..].chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if v.is_nan() {
            return Err(Error::Format("field contains NaN".into()));
        }
        values.push(v);
    }
    GridField::from_values(grid, boundary, values)
}

/// Serializes a field as CSV: two comment lines describing the grid, a
/// header row, then one row per node with its coordinates and value.
pub fn encode_csv(f: &GridField) -> String {
    let grid = f.grid();
    let dim = grid.dim();
    let mut out = String::new();
    out.push_str(CSV_SIGNATURE);
    out.push('\n');
    out.push_str(&format!(
        "# dim={} points={} radius={} boundary={}\n",
        dim,
        grid.points(),
        grid.radius(),
        f.boundary().as_str()
    ));
    for a in 0..dim {
        out.push_str(&format!("x{a},"));
    }
    out.push_str("value\n");
    for flat in 0..grid.node_count() {
        let xs = grid.coords(flat);
        for x in xs.iter().take(dim) {
            out.push_str(&format!("{x},"));
        }
        out.push_str(&format!("{}\n", f.value(flat)));
    }
    out
}

fn parse_shape_line(line: &str) -> Result<(usize, usize, f64, Boundary)> {
    let rest = line
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("second line must be the shape comment".into()))?;
    let (mut dim, mut points, mut radius, mut boundary) = (None, None, None, None);
    for part in rest.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad shape entry {part:?}")))?;
        match key {
            "dim" => {
                dim = Some(value.parse::<usize>().map_err(|e| {
                    Error::Format(format!("bad dim {value:?}: {e}"))
                })?)
            }
            "points" => {
                points = Some(value.parse::<usize>().map_err(|e| {
                    Error::Format(format!("bad points {value:?}: {e}"))
                })?)
            }
            "radius" => {
                radius = Some(value.parse::<f64>().map_err(|e| {
                    Error::Format(format!("bad radius {value:?}: {e}"))
                })?)
            }
            "boundary" => boundary = Some(Boundary::parse(value)?),
            other => return Err(Error::Format(format!("unknown shape key {other:?}"))),
        }
    }
    match (dim, points, radius, boundary) {
        (Some(d), Some(p), Some(r), Some(b)) => Ok((d, p, r, b)),
        _ => Err(Error::Format(
            "shape comment must set dim, points, radius, boundary".into(),
        )),
    }
}

/// Parses the CSV form, validating the signature, shape, header row, row
/// count, and that each row's coordinates match the node they claim to be.
pub fn decode_csv(text: &str) -> Result<GridField> {
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty input".into()))?;
    if first.trim_end() != CSV_SIGNATURE {
        return Err(Error::Format(format!(
            "missing signature line {CSV_SIGNATURE:?}"
        )));
    }
    let shape = lines
        .next()
        .ok_or_else(|| Error::Format("missing shape line".into()))?;
    let (dim, points, radius, boundary) = parse_shape_line(shape.trim_end())?;
    let grid = Grid::new(dim, points, radius)?;
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("missing column header".into()))?;
    let mut expect_header = String::new();
    for a in 0..dim {
        expect_header.push_str(&format!("x{a},"));
    }
    expect_header.push_str("value");
    if header.trim_end() != expect_header {
        return Err(Error::Format(format!(
            "column header {header:?} does not match grid dimension {dim}"
        )));
    }

    let coord_tol = 1e-9 * radius.max(1.0);
    let mut values = Vec::with_capacity(grid.node_count());
    for (row, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let flat = values.len();
        if flat >= grid.node_count() {
            return Err(Error::Format(format!(
                "more rows than the {} grid nodes",
                grid.node_count()
            )));
        }
        let mut cols = line.split(',');
        let xs = grid.coords(flat);
        for (a, expected) in xs.iter().take(dim).enumerate() {
            let cell = cols.next().ok_or_else(|| {
                Error::Format(format!("row {} has too few columns", row + 1))
            })?;
            let got: f64 = cell.parse().map_err(|e| {
                Error::Format(format!("row {} coordinate {a}: {e}", row + 1))
            })?;
            if (got - expected).abs() > coord_tol {
                return Err(Error::Format(format!(
                    "row {} coordinate {a} is {got}, expected {expected}",
                    row + 1
                )));
            }
        }
        let cell = cols
            .next()
            .ok_or_else(|| Error::Format(format!("row {} missing value", row + 1)))?;
        if cols.next().is_some() {
            return Err(Error::Format(format!("row {} has extra columns", row + 1)));
        }
        let v: f64 = cell.parse().map_err(|e| {
            Error::Format(format!("row {} value: {e}", row + 1))
        })?;
        if v.is_nan() {
            return Err(Error::Format(format!("row {} value is NaN", row + 1)));
        }
        values.push(v);
    }
    if values.len() != grid.node_count() {
        return Err(Error::Format(format!(
            "{} rows for a grid with {} nodes",
            values.len(),
            grid.node_count()
        )));
    }
    GridField::from_values(grid, boundary, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> GridField {
        let grid = Grid::new(2, 9, 2.0).unwrap();
        GridField::from_fn(grid, Boundary::DirichletZero, |x| {
            (x[0] + 2.0 * x[1]).sin() * 0.5
        })
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let f = sample_field();
        let bytes = encode_binary(&f);
        let g = decode_binary(&bytes).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn binary_rejects_corruption() {
        let f = sample_field();
        let good = encode_binary(&f);

        assert!(decode_binary(&good[..10]).is_err());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(decode_binary(&bad_magic).is_err());
        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(decode_binary(&bad_version).is_err());
        let mut bad_boundary = good.clone();
        bad_boundary[6] = 7;
        assert!(decode_binary(&bad_boundary).is_err());
        let mut truncated = good.clone();
        truncated.truncate(good.len() - 8);
        assert!(decode_binary(&truncated).is_err());
        let mut huge = good.clone();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_binary(&huge).is_err());
        let mut nan = good.clone();
        nan[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        // First node is a boundary node of a dirichlet-zero field, so both
        // the NaN guard and the boundary check would object; either way the
        // decode must fail without panicking.
        assert!(decode_binary(&nan).is_err());
    }

    #[test]
    fn binary_allows_infinity_on_frozen_fields() {
        let grid = Grid::new(1, 5, 1.0).unwrap();
        let mut f = GridField::zeros(grid, Boundary::Frozen);
        f.values_mut()[2] = f64::INFINITY;
        let g = decode_binary(&encode_binary(&f)).unwrap();
        assert_eq!(g.value(2), f64::INFINITY);
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let f = sample_field();
        let text = encode_csv(&f);
        assert!(text.starts_with(CSV_SIGNATURE));
        let g = decode_csv(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_rejects_malformed_inputs() {
        let f = sample_field();
        let good = encode_csv(&f);

        assert!(decode_csv("").is_err());
        assert!(decode_csv("# wrong\n").is_err());
        let no_shape = format!("{CSV_SIGNATURE}\n");
        assert!(decode_csv(&no_shape).is_err());
        let bad_key = format!("{CSV_SIGNATURE}\n# dim=1 points=5 radius=1 frobnicate=2\n");
        assert!(decode_csv(&bad_key).is_err());

        let mut missing_row = good.clone();
        missing_row.truncate(good.rfind('\n').unwrap());
        let missing_row = missing_row
            .rsplit_once('\n')
            .map(|(head, _)| format!("{head}\n"))
            .unwrap();
        assert!(decode_csv(&missing_row).is_err());

        let extra_row = format!("{good}0,0,0\n");
        assert!(decode_csv(&extra_row).is_err());

        let wrong_coord = good.replace("\n-2,-1.5,", "\n-2,-1.4,");
        assert!(decode_csv(&wrong_coord).is_err());
    }

    #[test]
    fn fingerprint_detects_single_bit_changes() {
        let f = sample_field();
        let base = fingerprint(f.values());
        let mut g = f.clone();
        let mid = g.values().len() / 2;
        g.values_mut()[mid] += 1e-300;
        assert_ne!(base, fingerprint(g.values()));
        assert_eq!(base, fingerprint(f.values()));
    }
}
