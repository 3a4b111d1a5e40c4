//! Snapshot CSV and run manifests.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scheme::{BlowupRecord, EvolveOptions, RunResult};
use super::system::{GridSpec, InitialData, SystemSpec};
use crate::digest::json_hash;
use crate::error::Result;

/// Writes `t, r, u, v` rows for every stored snapshot.
pub fn write_snapshots_csv<W: Write>(run: &RunResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "r", "u", "v"])?;
    let dr = run.grid.dr;
    for snap in &run.snapshots {
        for (j, (u, v)) in snap.u.iter().zip(&snap.v).enumerate() {
            w.serialize((snap.t, j as f64 * dr, u, v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_snapshots_csv(run: &RunResult, path: &Path) -> Result<()> {
    write_snapshots_csv(run, std::fs::File::create(path)?)
}

#[derive(Serialize)]
struct RunInputs<'a> {
    spec: &'a SystemSpec,
    data: &'a InitialData,
    grid: &'a GridSpec,
    options: &'a EvolveOptions,
}

/// Everything needed to reproduce a run, plus its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub spec: SystemSpec,
    pub data: InitialData,
    pub grid: GridSpec,
    pub options: EvolveOptions,
    pub blowup: BlowupRecord,
    pub steps: usize,
    /// SHA-256 of the JSON-encoded inputs.
    pub input_hash: String,
}

impl RunManifest {
    pub fn new(
        spec: &SystemSpec,
        data: &InitialData,
        options: &EvolveOptions,
        run: &RunResult,
    ) -> Result<Self> {
        let input_hash = json_hash(&RunInputs {
            spec,
            data,
            grid: &run.grid,
            options,
        })?;
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec: spec.clone(),
            data: *data,
            grid: run.grid,
            options: *options,
            blowup: run.blowup,
            steps: run.diagnostics.steps,
            input_hash,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{CouplingKind, Dimension, ExponentPair};
    use crate::solver::{evolve, make_initial_data, ComponentWeights};

    fn setup() -> (SystemSpec, InitialData, GridSpec, EvolveOptions) {
        let spec = SystemSpec::free(
            CouplingKind::SG,
            Dimension::new(3).unwrap(),
            ExponentPair::new(1.5, 2.0).unwrap(),
            0.3,
        );
        let data = make_initial_data(1.0, 1.0, 4, ComponentWeights::ALL).unwrap();
        let grid = GridSpec::covering(0.1, 0.5, 1.0, 1.0);
        let options = EvolveOptions {
            snapshot_stride: 5,
            ..EvolveOptions::default()
        };
        (spec, data, grid, options)
    }

    #[test]
    fn csv_has_one_row_per_node_and_snapshot() {
        let (spec, data, grid, options) = setup();
        let run = evolve(&spec, &data, &grid, &options).unwrap();
        let mut buf = Vec::new();
        write_snapshots_csv(&run, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text.lines().count() - 1;
        assert_eq!(text.lines().next(), Some("t,r,u,v"));
        assert_eq!(rows, run.snapshots.len() * run.radii().len());
    }

    #[test]
    fn manifest_round_trip_and_hash() {
        let (spec, data, grid, options) = setup();
        let run = evolve(&spec, &data, &grid, &options).unwrap();
        let m = RunManifest::new(&spec, &data, &options, &run).unwrap();
        let back: RunManifest = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let again = RunManifest::new(&spec, &data, &options, &run).unwrap();
        assert_eq!(again.input_hash, m.input_hash);
        let other = spec.clone().with_epsilon(0.4);
        let run2 = evolve(&other, &data, &grid, &options).unwrap();
        assert_ne!(
            RunManifest::new(&other, &data, &options, &run2)
                .unwrap()
                .input_hash,
            m.input_hash
        );
    }
}
