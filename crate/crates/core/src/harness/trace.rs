use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skills::PrimitiveKind;

/// Column order of trace files.
pub const TRACE_HEADER: &str =
    "t,tilt,poured_true,poured_sensed,u_r_tilt,u_h_tilt,primitive,map_g,mean_g,entropy";

/// One tick of the observation history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub tilt: f64,
    pub poured_true: f64,
    pub poured_sensed: f64,
    pub u_r_tilt: f64,
    pub u_h_tilt: f64,
    pub primitive: PrimitiveKind,
    pub map_g: f64,
    pub mean_g: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn new(rows: Vec<TraceRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Floats are written in shortest round-trip form, so reading a trace back
    /// reproduces every value bit for bit.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        w.write_record(TRACE_HEADER.split(','))?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        if header.join(",") != TRACE_HEADER {
            return Err(Error::Trace(format!(
                "unexpected header {:?}, expected {TRACE_HEADER:?}",
                header.join(",")
            )));
        }
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRow>, _>>()
            .map_err(|e| Error::Trace(e.to_string()))?;
        if rows.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Trace(
                "timestamps must be strictly increasing".into(),
            ));
        }
        Ok(Self { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
