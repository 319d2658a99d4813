#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dfdr::simulation::{generate_instance, SimulationConfig};
use dfdr::DataMatrix;

/// A synthetic two-group matrix with a block of shifted features.
pub fn synthetic(m: usize, n_per_group: usize, seed: u64) -> DataMatrix {
    let config = SimulationConfig {
        m,
        pi0: 0.7,
        replicates: 1,
        n_a: n_per_group,
        n_b: n_per_group,
        delta: 2.5,
        permutations: 1,
        seed,
        ..SimulationConfig::default()
    };
    generate_instance(&config, 0).0
}

/// Writes `matrix` as TSV with `subject:group` header cells, shifting every
/// value so the matrix is strictly positive.
pub fn write_matrix(matrix: &DataMatrix, path: &Path) {
    let mut s = String::from("feature");
    for (id, g) in matrix.subject_ids().iter().zip(matrix.labels()) {
        let _ = write!(s, "\t{id}:{g}");
    }
    s.push('\n');
    for i in 0..matrix.n_features() {
        s.push_str(&matrix.feature_ids()[i]);
        for v in matrix.row(i) {
            let _ = write!(s, "\t{}", v + 10.0);
        }
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

pub fn read_summary(path: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value line");
            (k.to_string(), v.to_string())
        })
        .collect()
}

/// Rows of a comma-separated file with a header, header dropped.
pub fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
