//! Sensor recordings split into fixed-length signal windows.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Metric, TimeHorizon, VertexGraph};
use crate::io::read_matrix;
use crate::signal::Ftvgs;

/// Where the vertex graph comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetGraph {
    /// Coordinates when a sidecar is given, correlation otherwise.
    #[default]
    Auto,
    Coordinates,
    Correlation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub window_len: usize,
    /// Declared sensor count; selects the orientation of the CSV.
    #[serde(default)]
    pub sensors: Option<usize>,
    /// `sensor_id,lat,lon` sidecar, one line per sensor in data order.
    #[serde(default)]
    pub coordinates: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub graph: DatasetGraph,
}

fn default_k() -> usize {
    5
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, window_len: usize) -> Self {
        DatasetSpec {
            path: path.into(),
            window_len,
            sensors: None,
            coordinates: None,
            k: default_k(),
            graph: DatasetGraph::Auto,
        }
    }
}

pub struct Dataset {
    pub graph: VertexGraph,
    pub windows: Vec<Ftvgs>,
}

/// Non-overlapping `N x window_len` windows, `floor(total / window_len)` of
/// them; a trailing remainder is dropped.
pub fn split_windows(data: &DMatrix<f64>, window_len: usize) -> Result<Vec<DMatrix<f64>>> {
    if window_len == 0 {
        return Err(Error::invalid("window length must be >= 1"));
    }
    let total = data.ncols();
    if total < window_len {
        return Err(Error::invalid(format!(
            "window length {window_len} exceeds the {total} available timesteps"
        )));
    }
    Ok((0..total / window_len)
        .map(|w| data.columns(w * window_len, window_len).into_owned())
        .collect())
}

fn read_coordinates(path: &Path, n: usize) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["sensor_id", "lat", "lon"] {
        return Err(Error::parse(
            path,
            format!("expected header sensor_id,lat,lon, got {}", names.join(",")),
        ));
    }
    let mut points = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = k + 2;
        if rec.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {line}: expected 3 fields"),
            ));
        }
        let num = |f: &str| -> Result<f64> {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, format!("line {line}: bad coordinate {f:?}")))
        };
        points.push((num(&rec[1])?, num(&rec[2])?));
    }
    if points.len() != n {
        return Err(Error::parse(
            path,
            format!("{} coordinates for {n} sensors", points.len()),
        ));
    }
    Ok(points)
}

fn abs_correlation(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows();
    let t = data.ncols() as f64;
    let mut centered = data.clone();
    for i in 0..n {
        let mean = data.row(i).sum() / t;
        centered.row_mut(i).add_scalar_mut(-mean);
    }
    let norms: Vec<f64> = centered.row_iter().map(|r| r.norm()).collect();
    let gram = &centered * centered.transpose();
    DMatrix::from_fn(n, n, |a, b| {
        let d = norms[a] * norms[b];
        // a constant series has no defined correlation; treat it as unrelated
        if d > 0.0 {
            (gram[(a, b)] / d).abs()
        } else {
            0.0
        }
    })
}

/// Reads a sensors-by-time CSV (or its transpose), builds the vertex graph
/// and splits the series into windows.
pub fn ingest_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let raw = read_matrix(&spec.path)?;
    let data = match spec.sensors {
        Some(s) if raw.nrows() == s => raw,
        Some(s) if raw.ncols() == s => raw.transpose(),
        Some(s) => {
            return Err(Error::dims(
                format!("{s} sensors along one axis"),
                format!("{}x{}", raw.nrows(), raw.ncols()),
            ))
        }
        None => raw,
    };
    let n = data.nrows();
    let horizon = TimeHorizon::new(spec.window_len)?;
    let windows = split_windows(&data, spec.window_len)?;

    let use_coords = match spec.graph {
        DatasetGraph::Coordinates => {
            if spec.coordinates.is_none() {
                return Err(Error::invalid(
                    "coordinate graph requested but no coordinates file given",
                ));
            }
            true
        }
        DatasetGraph::Correlation => false,
        DatasetGraph::Auto => spec.coordinates.is_some(),
    };
    let graph = if use_coords {
        let path = spec.coordinates.as_ref().expect("checked above");
        let points = read_coordinates(path, n)?;
        VertexGraph::knn_gaussian(&points, spec.k, Metric::Haversine)?
    } else {
        let corr = abs_correlation(&data);
        VertexGraph::knn_similarity(n, spec.k, |a, b| corr[(a, b)])?
    };

    let windows = windows
        .into_iter()
        .map(|w| Ftvgs::new(w, graph.clone(), horizon))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { graph, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_matrix;

    fn series(n: usize, total: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, total, |i, j| {
            ((i + 1) as f64 * 0.1 * j as f64).sin() + i as f64
        })
    }

    #[test]
    fn window_counts() {
        let x = series(3, 20);
        assert_eq!(split_windows(&x, 20).unwrap().len(), 1);
        assert_eq!(split_windows(&series(3, 39), 20).unwrap().len(), 1);
        assert_eq!(split_windows(&x, 4).unwrap().len(), 5);
        assert!(split_windows(&x, 21).is_err());
    }

    #[test]
    fn windows_partition_the_prefix() {
        let x = series(4, 23);
        let w = split_windows(&x, 5).unwrap();
        for (k, win) in w.iter().enumerate() {
            assert_eq!(win, &x.columns(k * 5, 5).into_owned());
        }
        assert_eq!(w.len() * 5, 20);
    }

    #[test]
    fn orientation_follows_the_sensor_count() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_matrix(&p, &series(6, 40).transpose()).unwrap();
        let mut spec = DatasetSpec::new(&p, 10);
        spec.sensors = Some(6);
        spec.k = 2;
        let d = ingest_dataset(&spec).unwrap();
        assert_eq!(d.windows.len(), 4);
        assert_eq!(d.windows[0].num_vertices(), 6);
        spec.sensors = Some(7);
        assert!(ingest_dataset(&spec).is_err());
    }

    #[test]
    fn coordinate_graph_needs_a_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_matrix(&p, &series(4, 12)).unwrap();
        let mut spec = DatasetSpec::new(&p, 6);
        spec.graph = DatasetGraph::Coordinates;
        assert!(ingest_dataset(&spec).is_err());

        let c = dir.path().join("coords.csv");
        std::fs::write(
            &c,
            "sensor_id,lat,lon\n10,34.1,-118.2\n11,34.2,-118.3\n12,34.0,-118.1\n13,34.3,-118.4\n",
        )
        .unwrap();
        spec.coordinates = Some(c);
        spec.k = 2;
        let d = ingest_dataset(&spec).unwrap();
        assert!(d.graph.num_edges() >= 4);
        assert_eq!(d.windows.len(), 2);
    }
}
