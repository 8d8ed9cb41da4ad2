//! CSV output for sweeps and single-drop audits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocation::Role;
use crate::error::{Error, Result};
use crate::evaluation::{DropResult, SweepResult};
use crate::units::linear_to_db;

pub const SWEEP_HEADER: [&str; 7] = [
    "sweep_value",
    "mean_total_bps",
    "std_total_bps",
    "mean_cue_bps",
    "mean_vue_bps",
    "mean_admitted_cues",
    "mean_admitted_vues",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: usize,
    pub mean_total_bps: f64,
    pub std_total_bps: f64,
    pub mean_cue_bps: f64,
    pub mean_vue_bps: f64,
    pub mean_admitted_cues: f64,
    pub mean_admitted_vues: f64,
}

impl SweepRow {
    pub fn rows(result: &SweepResult) -> Vec<SweepRow> {
        result
            .points
            .iter()
            .map(|p| SweepRow {
                sweep_value: p.sweep_value,
                mean_total_bps: p.total_bps.mean,
                std_total_bps: p.total_bps.std,
                mean_cue_bps: p.cue_bps.mean,
                mean_vue_bps: p.vue_bps.mean,
                mean_admitted_cues: p.admitted_cues.mean,
                mean_admitted_vues: p.admitted_vues.mean,
            })
            .collect()
    }
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in SweepRow::rows(result) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the sweep table: header row plus one row per sweep value.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_sweep_csv(result, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_sweep_csv<R: Read>(input: R) -> std::result::Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// One line of a single-drop audit. For a V-UE, `block` is the block of the
/// C-UE whose resource it reuses and `reuse_partner` that C-UE's id; for a
/// C-UE, `reuse_partner` lists the V-UE pairs on its resource, `;`-separated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub user_id: usize,
    pub role: Role,
    pub block: Option<usize>,
    pub codebook: Option<usize>,
    pub reuse_partner: String,
    pub gamma_db: Option<f64>,
    pub rate: f64,
}

pub fn audit_records(drop: &DropResult) -> Vec<AuditRecord> {
    let alloc = &drop.allocation;
    let report = &drop.report;
    let mut out = Vec::with_capacity(alloc.num_cues() + alloc.num_vues());
    for i in 0..alloc.num_cues() {
        let slot = drop.cue_map.slot(i);
        let partners = alloc.cue_partners(i);
        out.push(AuditRecord {
            user_id: i,
            role: Role::Cue,
            block: slot.map(|s| s.block),
            codebook: slot.map(|s| s.codebook),
            reuse_partner: partners
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            gamma_db: alloc.admitted_cues[i].then(|| linear_to_db(report.gamma_cue[i])),
            rate: report.rate_cue[i],
        });
    }
    for j in 0..alloc.num_vues() {
        let partner = alloc.vue_partner(j);
        let slot = partner.and_then(|i| drop.cue_map.slot(i));
        out.push(AuditRecord {
            user_id: j,
            role: Role::Vue,
            block: slot.map(|s| s.block),
            codebook: None,
            reuse_partner: partner.map(|i| i.to_string()).unwrap_or_default(),
            gamma_db: alloc.admitted_vues[j].then(|| linear_to_db(report.gamma_vue[j])),
            rate: report.rate_vue[j],
        });
    }
    out
}

pub fn write_audit_csv<W: Write>(records: &[AuditRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{Summary, SweepPoint};

    fn point(v: usize, x: f64) -> SweepPoint {
        let s = Summary { mean: x, std: x / 7.0, n: 3 };
        SweepPoint {
            sweep_value: v,
            total_bps: s,
            cue_bps: Summary { mean: x * 0.6, ..s },
            vue_bps: Summary { mean: x * 0.4, ..s },
            admitted_cues: Summary { mean: 1.0 / 3.0, ..s },
            admitted_vues: Summary { mean: 2.5, ..s },
        }
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let mut buf = Vec::new();
        write_sweep_csv(&SweepResult::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sweep_value,mean_total_bps,std_total_bps,mean_cue_bps,mean_vue_bps,mean_admitted_cues,mean_admitted_vues\n"
        );
    }

    #[test]
    fn one_point_two_lines_and_round_trip() {
        let result = SweepResult {
            points: vec![point(10, 123_456_789.012_345_6)],
        };
        let mut buf = Vec::new();
        write_sweep_csv(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        let rows = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, SweepRow::rows(&result));
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("out.csv");
        let err = emit_csv(&SweepResult::default(), &bad).unwrap_err();
        assert!(err.to_string().contains("out.csv"));
    }
}
