use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sapsr_ppto::PptoDiagnostics;

use crate::error::SimError;
use crate::harness::DayMetrics;

pub const CSV_HEADER: &str = "day,S,A,P,Y,R,isolated,new_infections,cum_infections,tests_used";

pub fn write_metrics<W: Write>(out: W, rows: &[DayMetrics]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn metrics_csv(rows: &[DayMetrics]) -> String {
    let mut buf = Vec::new();
    write_metrics(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

pub fn read_metrics<R: Read>(input: R) -> csv::Result<Vec<DayMetrics>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn save_metrics(path: &Path, rows: &[DayMetrics]) -> Result<(), SimError> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    write_metrics(BufWriter::new(file), rows).map_err(|e| SimError::csv(path, e))
}

pub fn load_metrics(path: &Path) -> Result<Vec<DayMetrics>, SimError> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    read_metrics(file).map_err(|e| SimError::csv(path, e))
}

/// One line per simulated day.
pub fn save_ppto_log(path: &Path, log: &[PptoDiagnostics]) -> Result<(), SimError> {
    let mut text = String::new();
    for d in log {
        text.push_str(&d.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| SimError::io(path, e))
}
