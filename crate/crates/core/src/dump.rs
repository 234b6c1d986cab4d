//! CSV field dumps.
//!
//! Scalar: `# scalar nr=<int> nz=<int> rmax=<float> zmax=<float>` then `r,z,value`
//! rows with i outer, j inner. Vector: `# vector n=<int> L=<float>` then
//! `x,y,z,Ux,Uy,Uz` rows in flat index order. Floats carry 17 significant digits.

use crate::error::{Error, Result};
use crate::grid::{Grid2, Grid3, ScalarField, VectorField3};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn scalar_to_string(u: &ScalarField) -> String {
    let g = &u.grid;
    let mut s = String::with_capacity(64 * g.len());
    let _ = writeln!(
        s,
        "# scalar nr={} nz={} rmax={} zmax={}",
        g.nr,
        g.nz,
        fmt_f64(g.r_max),
        fmt_f64(g.z_max)
    );
    for i in 0..g.nr {
        for j in 0..g.nz {
            let _ = writeln!(s, "{},{},{}", fmt_f64(g.r(i)), fmt_f64(g.z(j)), fmt_f64(u.get(i, j)));
        }
    }
    s
}

pub fn vector_to_string(f: &VectorField3) -> String {
    let g = &f.grid;
    let mut s = String::with_capacity(128 * g.len());
    let _ = writeln!(s, "# vector n={} L={}", g.n, fmt_f64(g.half_width));
    for m in 0..g.len() {
        let (i, j, k) = g.unflatten(m);
        let p = g.point(i, j, k);
        let v = f.values[m];
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(p[2]),
            fmt_f64(v[0]),
            fmt_f64(v[1]),
            fmt_f64(v[2])
        );
    }
    s
}

pub fn write_scalar(path: &Path, u: &ScalarField) -> Result<()> {
    write_atomic(path, &scalar_to_string(u))
}

pub fn write_vector(path: &Path, f: &VectorField3) -> Result<()> {
    write_atomic(path, &vector_to_string(f))
}

fn header_fields<'a>(line: &'a str, tag: &str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let rest = line
        .strip_prefix("# ")
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| Error::Dump(format!("expected '# {tag} ...' header, got '{line}'")))?;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() != keys.len() {
        return Err(Error::Dump(format!("header needs {} fields: '{line}'", keys.len())));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(p, k)| {
            p.strip_prefix(k)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| Error::Dump(format!("expected {k}=<value> in header, got '{p}'")))
        })
        .collect()
}

fn parse<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Dump(format!("line {line}: cannot parse {what} from '{s}'")))
}

fn rows(text: &str, width: usize, expected: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(expected);
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::Dump(format!("line {}: expected {width} columns, got {}", n + 1, cells.len())));
        }
        out.push(cells.iter().map(|c| parse::<f64>(c, "a number", n + 1)).collect::<Result<Vec<_>>>()?);
    }
    if out.len() != expected {
        return Err(Error::Dump(format!("expected {expected} rows, found {}", out.len())));
    }
    Ok(out)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

pub fn scalar_from_str(text: &str) -> Result<ScalarField> {
    let head = text.lines().next().ok_or_else(|| Error::Dump("empty file".into()))?;
    let f = header_fields(head, "scalar", &["nr", "nz", "rmax", "zmax"])?;
    let grid = Grid2::new(
        parse(f[0], "nr", 1)?,
        parse(f[1], "nz", 1)?,
        parse(f[2], "rmax", 1)?,
        parse(f[3], "zmax", 1)?,
    )
    .map_err(|e| Error::Dump(format!("header describes an invalid grid: {e}")))?;
    let data = rows(text, 3, grid.len())?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, row) in data.iter().enumerate() {
        let (i, j) = (k / grid.nz, k % grid.nz);
        if !close(row[0], grid.r(i)) || !close(row[1], grid.z(j)) {
            return Err(Error::Dump(format!("row {}: coordinates do not match the header grid", k + 2)));
        }
        values.push(row[2]);
    }
    ScalarField::from_values(&grid, values)
}

pub fn vector_from_str(text: &str) -> Result<VectorField3> {
    let head = text.lines().next().ok_or_else(|| Error::Dump("empty file".into()))?;
    let f = header_fields(head, "vector", &["n", "L"])?;
    let grid = Grid3::new(parse(f[0], "n", 1)?, parse(f[1], "L", 1)?)
        .map_err(|e| Error::Dump(format!("header describes an invalid grid: {e}")))?;
    let data = rows(text, 6, grid.len())?;
    let mut out = VectorField3::zeros(&grid);
    for (m, row) in data.iter().enumerate() {
        let (i, j, k) = grid.unflatten(m);
        let p = grid.point(i, j, k);
        if !(0..3).all(|d| close(row[d], p[d])) {
            return Err(Error::Dump(format!("row {}: coordinates do not match the header grid", m + 2)));
        }
        out.values[m] = [row[3], row[4], row[5]];
    }
    Ok(out)
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    scalar_from_str(&fs::read_to_string(path)?)
}

pub fn read_vector(path: &Path) -> Result<VectorField3> {
    vector_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_scalar;

    #[test]
    fn scalar_round_trip_is_exact() {
        let g = Grid2::new(8, 17, 3.0, 2.0).unwrap();
        let u = sample_scalar(&g, |r, z| r * (-r * r - z * z).exp() / 3.0).unwrap();
        let back = scalar_from_str(&scalar_to_string(&u)).unwrap();
        assert_eq!(back.values, u.values);
        assert_eq!(back.grid, u.grid);
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let g = Grid3::new(9, 1.5).unwrap();
        let f = crate::grid::sample_vector(&g, |p| [p[0] / 7.0, -p[2], p[1] * p[0]]);
        let back = vector_from_str(&vector_to_string(&f)).unwrap();
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let g = Grid2::new(8, 17, 3.0, 2.0).unwrap();
        let text = scalar_to_string(&ScalarField::zeros(&g));
        assert!(scalar_from_str("").is_err());
        assert!(scalar_from_str(&text.replacen("# scalar", "# scalr", 1)).is_err());
        assert!(scalar_from_str(&text.replacen("nz=17", "nz=x", 1)).is_err());
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(matches!(scalar_from_str(&truncated), Err(Error::Dump(_))));
        assert!(vector_from_str(&text).is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
