//! File formats: dense matrix CSV, edge-list CSV and JSON records.
//!
//! Matrices are written without a header, one row per line, each value with
//! 17 significant digits so that a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexGraph;
use crate::sampling::SampleSet;

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path, headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_f64(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| {
        Error::parse(
            path,
            format!("line {line}: cannot parse {field:?} as a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("{} line {line}", path.display())));
    }
    Ok(v)
}

/// Reads a rectangular, header-less CSV of finite numbers.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in csv_reader(path, false)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = k as u64 + 1;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| parse_f64(path, line, f))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    format!(
                        "line {line}: {} fields, expected {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "empty matrix"));
    }
    let (n, t) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut line = String::new();
    for row in m.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_f64(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads an edge list with header `u,v,weight` on `n` vertices.
pub fn read_edge_list(path: impl AsRef<Path>, n: usize) -> Result<VertexGraph> {
    let path = path.as_ref();
    let mut reader = csv_reader(path, true)?;
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["u", "v", "weight"] {
        return Err(Error::parse(
            path,
            format!("expected header u,v,weight, got {}", names.join(",")),
        ));
    }
    let mut edges = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = k as u64 + 2;
        if rec.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {line}: expected 3 fields"),
            ));
        }
        let index = |f: &str| -> Result<usize> {
            f.parse()
                .map_err(|_| Error::parse(path, format!("line {line}: bad vertex index {f:?}")))
        };
        edges.push((
            index(&rec[0])?,
            index(&rec[1])?,
            parse_f64(path, line, &rec[2])?,
        ));
    }
    VertexGraph::new(n, edges)
}

pub fn write_edge_list(path: impl AsRef<Path>, graph: &VertexGraph) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut out = String::from("u,v,weight\n");
    for e in graph.edges() {
        out.push_str(&format!("{},{},{}\n", e.u, e.v, format_f64(e.weight)));
    }
    w.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn read_sample_set(path: impl AsRef<Path>) -> Result<SampleSet> {
    read_json(path)
}

pub fn write_sample_set(path: impl AsRef<Path>, s: &SampleSet) -> Result<()> {
    write_json(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let m = DMatrix::from_row_slice(
            2,
            3,
            &[0.1, -1.0 / 3.0, 1e-300, 2.0_f64.sqrt(), 0.0, -7.25e12],
        );
        write_matrix(&p, &m).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
    }

    #[test]
    fn ragged_and_non_finite_rows_fail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "1,2,3\n4,5\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Parse { .. })));
        std::fs::write(&p, "1,NaN\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::NonFinite(_))));
        std::fs::write(&p, "1,x\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let g = VertexGraph::new(4, [(0, 1, 1.0), (3, 2, 0.5)]).unwrap();
        write_edge_list(&p, &g).unwrap();
        let back = read_edge_list(&p, 4).unwrap();
        assert_eq!(back.edges(), g.edges());
        std::fs::write(&p, "a,b,c\n0,1,1\n").unwrap();
        assert!(read_edge_list(&p, 4).is_err());
    }

    #[test]
    fn sample_set_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = SampleSet::new(
            1,
            vec![0, 2],
            vec![1],
            vec![(2, 1), (0, 1)],
            vec![0.25, -3.0],
        )
        .unwrap();
        write_sample_set(&p, &s).unwrap();
        assert_eq!(read_sample_set(&p).unwrap(), s);
    }
}
