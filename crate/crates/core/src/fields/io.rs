//! CSV formats.
//!
//! * zero sequences: header `re,im,multiplicity`;
//! * grid fields: a first line `# grid x0 x1 y0 y1 nx ny`, then header
//!   `re,im,value` and one row per node in row-major order (`-inf` and `nan`
//!   are accepted values; `nan` marks a node without data);
//! * measures: rows `cell,x0,x1,y0,y1,mass`, `disk,cx,cy,r,mass` or
//!   `atom,re,im,mass`, an optional header starting with `kind`, `#` comments.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{DiscreteMeasure, FieldError, GridSamples, GridSpec, Region, ZeroSequence};

fn io_err(path: &Path, e: impl std::fmt::Display) -> FieldError {
    FieldError::Io(format!("{}: {e}", path.display()))
}

fn num(path: &Path, row: usize, s: &str) -> Result<f64, FieldError> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| io_err(path, format!("row {row}: bad number `{s}`: {e}")))
}

pub fn parse_zeros_csv(text: &str, path: &Path) -> Result<ZeroSequence, FieldError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    let expected = ["re", "im", "multiplicity"];
    if header.len() != 3 || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(io_err(path, "header must be `re,im,multiplicity`"));
    }
    let mut entries = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = k + 2;
        let m = rec[2]
            .parse::<u32>()
            .map_err(|_| io_err(path, format!("row {row}: multiplicity `{}` is not a positive integer", &rec[2])))?;
        entries.push((Complex64::new(num(path, row, &rec[0])?, num(path, row, &rec[1])?), m));
    }
    ZeroSequence::new(entries)
}

pub fn read_zeros(path: &Path) -> Result<ZeroSequence, FieldError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_zeros_csv(&text, path)
}

pub fn write_zeros(path: &Path, seq: &ZeroSequence) -> Result<(), FieldError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["re", "im", "multiplicity"]).map_err(|e| io_err(path, e))?;
    for (p, m) in seq.entries() {
        w.write_record([p.re.to_string(), p.im.to_string(), m.to_string()]).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_grid(path: &Path) -> Result<GridSamples, FieldError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let dims: Vec<&str> = first
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix("grid"))
        .ok_or_else(|| io_err(path, "first line must be `# grid x0 x1 y0 y1 nx ny`"))?
        .split_whitespace()
        .collect();
    let spec: GridSpec = dims.join(",").parse()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rest.as_bytes());
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["re", "im", "value"] {
        return Err(io_err(path, "header must be `re,im,value`"));
    }
    let h = spec.step();
    let mut values = Vec::with_capacity(spec.len());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = k + 3;
        if k >= spec.len() {
            return Err(io_err(path, format!("more rows than the {} grid nodes", spec.len())));
        }
        let z = Complex64::new(num(path, row, &rec[0])?, num(path, row, &rec[1])?);
        if (z - spec.node_at(k)).norm() > 1e-6 * h {
            return Err(io_err(path, format!("row {row}: node {z} out of row-major order")));
        }
        values.push(num(path, row, &rec[2])?);
    }
    GridSamples::new(spec, values)
}

pub fn write_grid(path: &Path, g: &GridSamples) -> Result<(), FieldError> {
    let mut out = Vec::new();
    let (x0, x1, y0, y1) = g.spec.bounds();
    writeln!(out, "# grid {x0} {x1} {y0} {y1} {} {}", g.spec.nx(), g.spec.ny()).expect("write to Vec");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", "value"]).map_err(|e| io_err(path, e))?;
    for (k, v) in g.values.iter().enumerate() {
        let z = g.spec.node_at(k);
        w.write_record([z.re.to_string(), z.im.to_string(), v.to_string()]).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, FieldError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let (mut cells, mut atoms) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = k + 1;
        let kind = &rec[0];
        if k == 0 && kind == "kind" {
            continue;
        }
        let vals: Vec<f64> = rec.iter().skip(1).map(|s| num(path, row, s)).collect::<Result<_, _>>()?;
        let arity = |n: usize| {
            if vals.len() == n {
                Ok(())
            } else {
                Err(io_err(path, format!("row {row}: `{kind}` needs {n} numbers, got {}", vals.len())))
            }
        };
        match kind {
            "cell" => {
                arity(5)?;
                cells.push((Region::rect(vals[0], vals[1], vals[2], vals[3]), vals[4]));
            }
            "disk" => {
                arity(4)?;
                cells.push((Region::disk(Complex64::new(vals[0], vals[1]), vals[2]), vals[3]));
            }
            "atom" => {
                arity(3)?;
                atoms.push((Complex64::new(vals[0], vals[1]), vals[2]));
            }
            other => return Err(io_err(path, format!("row {row}: unknown kind `{other}`"))),
        }
    }
    DiscreteMeasure::new(cells, atoms)
}

pub fn write_measure(path: &Path, m: &DiscreteMeasure) -> Result<(), FieldError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path).map_err(|e| io_err(path, e))?;
    let mut put = |rec: Vec<String>| w.write_record(rec).map_err(|e| io_err(path, e));
    put(vec!["kind".into(), "params...".into(), "mass".into()])?;
    for (r, mass) in m.cells() {
        match *r {
            Region::Rect { x0, x1, y0, y1 } => put(vec![
                "cell".into(),
                x0.to_string(),
                x1.to_string(),
                y0.to_string(),
                y1.to_string(),
                mass.to_string(),
            ])?,
            Region::Disk { center, radius } => put(vec![
                "disk".into(),
                center.re.to_string(),
                center.im.to_string(),
                radius.to_string(),
                mass.to_string(),
            ])?,
        }
    }
    for (p, mass) in m.atoms() {
        put(vec!["atom".into(), p.re.to_string(), p.im.to_string(), mass.to_string()])?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.csv");
        let seq = ZeroSequence::new(vec![(Complex64::new(0.3, -0.2), 2), (Complex64::new(0.0, 0.0), 1)]).unwrap();
        write_zeros(&path, &seq).unwrap();
        assert_eq!(read_zeros(&path).unwrap(), seq);
    }

    #[test]
    fn zeros_need_header_and_integer_multiplicity() {
        let p = Path::new("inline");
        assert!(parse_zeros_csv("0,0,1\n", p).is_err());
        assert!(parse_zeros_csv("re,im,multiplicity\n0,0,1.5\n", p).is_err());
        assert!(parse_zeros_csv("re,im,multiplicity\n0,0,0\n", p).is_err());
    }

    #[test]
    fn grid_round_trip_keeps_special_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let spec = GridSpec::new(-1.0, 1.0, 0.0, 1.0, 3, 2).unwrap();
        let g = GridSamples::new(spec, vec![0.5, f64::NEG_INFINITY, 1e-17, f64::NAN, 2.0, -3.25]).unwrap();
        write_grid(&path, &g).unwrap();
        let back = read_grid(&path).unwrap();
        assert_eq!(back.spec, spec);
        for (a, b) in back.values.iter().zip(&g.values) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn measure_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DiscreteMeasure::new(
            vec![(Region::rect(0.0, 1.0, 0.0, 1.0), 0.25), (Region::disk(Complex64::new(3.0, 0.0), 0.5), 1.0)],
            vec![(Complex64::new(-1.0, 2.0), 2.0)],
        )
        .unwrap();
        write_measure(&path, &m).unwrap();
        assert_eq!(read_measure(&path).unwrap(), m);
    }
}
