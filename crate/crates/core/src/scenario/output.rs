//! CSV rendering of scenario results. Column names are part of the output
//! contract and do not change between releases.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::mcs::mcs;

use super::{AreaRow, CsiReport, FrameTrace, HandoverRow, MrcPoint, SisoRow};

pub const SISO_HEADER: &[&str] = &[
    "distance_m",
    "rssi_dbm",
    "snr_db",
    "mcs",
    "fsr_model",
    "successes",
    "frames",
    "fsr",
];
pub const TIMELINE_HEADER: &[&str] = &[
    "frame_index",
    "rssi_chain0_dbm",
    "rssi_chain1_dbm",
    "combined_rssi_dbm",
    "technique",
    "mcs",
    "success",
];
pub const MRC_POINT_HEADER: &[&str] = &["path", "snr_db", "fsr_model", "frames", "fsr"];
pub const HANDOVER_HEADER: &[&str] = &["angle_deg", "rssi_a_dbm", "rssi_b_dbm", "rssi_mrc_dbm"];
pub const AREA_HEADER: &[&str] = &[
    "placement",
    "area_rx1",
    "area_rx2",
    "mcs",
    "solvable",
    "condition_number",
    "min_stream_snr_db",
    "fsr_model",
    "successes",
    "frames",
    "fsr",
];
pub const CSI_HEADER: &[&str] = &["rx", "tx", "subcarrier", "re", "im", "scale"];
pub const ORACLE_HEADER: &[&str] = &[
    "mcs",
    "n_streams",
    "snr_db",
    "fsr_model",
    "fsr_oracle",
    "abs_diff",
];

/// One analytic-versus-waveform comparison point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub mcs_index: u8,
    pub snr_db: f64,
    pub fsr_model: f64,
    pub fsr_oracle: f64,
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn opt(v: Option<u8>) -> String {
    v.map_or_else(String::new, |a| a.to_string())
}

pub fn write_siso<W: Write>(out: W, rows: &[SisoRow]) -> Result<()> {
    let mut w = writer(out, SISO_HEADER)?;
    for r in rows {
        w.write_record([
            r.distance_m.to_string(),
            r.rssi_dbm.to_string(),
            r.snr_db.to_string(),
            r.mcs_index.to_string(),
            r.fsr_model.to_string(),
            r.successes.to_string(),
            r.frames.to_string(),
            r.fsr_measured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-chain timelines only; missing chains are left empty.
pub fn write_timeline<W: Write>(out: W, traces: &[FrameTrace]) -> Result<()> {
    let mut w = writer(out, TIMELINE_HEADER)?;
    for t in traces {
        let chain = |i: usize| {
            t.per_chain_rssi_dbm
                .get(i)
                .map_or_else(String::new, f64::to_string)
        };
        w.write_record([
            t.frame_index.to_string(),
            chain(0),
            chain(1),
            t.combined_rssi_dbm.to_string(),
            t.technique.name().to_string(),
            t.mcs_index.to_string(),
            t.success.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mrc_point<W: Write>(out: W, p: &MrcPoint) -> Result<()> {
    let mut w = writer(out, MRC_POINT_HEADER)?;
    for (path, snr, model, measured) in [
        ("A", p.snr_a_db, p.fsr_model_a, p.fsr_a),
        ("B", p.snr_b_db, p.fsr_model_b, p.fsr_b),
        ("MRC", p.snr_mrc_db, p.fsr_model_mrc, p.fsr_mrc),
    ] {
        w.write_record([
            path.to_string(),
            snr.to_string(),
            model.to_string(),
            p.frames.to_string(),
            measured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_handover<W: Write>(out: W, rows: &[HandoverRow]) -> Result<()> {
    let mut w = writer(out, HANDOVER_HEADER)?;
    for r in rows {
        w.write_record([
            r.angle_deg.to_string(),
            r.rssi_a_dbm.to_string(),
            r.rssi_b_dbm.to_string(),
            r.rssi_mrc_dbm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_area_grid<W: Write>(out: W, rows: &[AreaRow]) -> Result<()> {
    let mut w = writer(out, AREA_HEADER)?;
    for r in rows {
        w.write_record([
            r.placement.clone(),
            opt(r.area_rx1),
            opt(r.area_rx2),
            r.mcs_index.to_string(),
            r.solvable.to_string(),
            r.condition_number.to_string(),
            r.min_stream_snr_db.to_string(),
            r.fsr_model.to_string(),
            r.successes.to_string(),
            r.frames.to_string(),
            r.fsr_measured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csi<W: Write>(out: W, report: &CsiReport) -> Result<()> {
    let mut w = writer(out, CSI_HEADER)?;
    for e in &report.entries {
        w.write_record([
            report.rx_ids[e.rx].clone(),
            report.tx_ids[e.tx].clone(),
            e.subcarrier.to_string(),
            e.re.to_string(),
            e.im.to_string(),
            report.scale.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_oracle<W: Write>(out: W, rows: &[OracleRow]) -> Result<()> {
    let mut w = writer(out, ORACLE_HEADER)?;
    for r in rows {
        let streams = mcs(r.mcs_index)?.n_streams;
        w.write_record([
            r.mcs_index.to_string(),
            streams.to_string(),
            r.snr_db.to_string(),
            r.fsr_model.to_string(),
            r.fsr_oracle.to_string(),
            (r.fsr_model - r.fsr_oracle).abs().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
