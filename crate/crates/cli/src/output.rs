//! CSV writing and decimal formatting (no binary floats in outputs).

use anyhow::{Context, Result};
use padesurf_core::numerics::real_to_string;
use padesurf_core::{ComplexValue, Real};
use std::fs::File;
use std::path::Path;

/// Full-precision decimal.
pub fn real(x: &Real) -> String {
    real_to_string(x)
}

/// `re im` at full precision.
pub fn cplx(z: &ComplexValue) -> String {
    format!("{} {}", real_to_string(z.real()), real_to_string(z.imag()))
}

/// Shortest round-trip decimal of a diagnostic `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub struct CsvOut {
    w: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<()> {
        self.w.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}
