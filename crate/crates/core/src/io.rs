//! Single-column sample files.

use std::io::{Read, Write};
use std::path::Path;

use crate::distributions::Sample;
use crate::error::{GofError, Result};

/// Reads one value per row. A non-numeric first row is taken as a header;
/// blank rows and `#` comments are skipped.
pub fn read_sample<R: Read>(reader: R) -> Result<Sample<f64>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut first = true;
    for record in csv.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 1 {
            return Err(GofError::Parse(format!("expected one column, found {}", record.len())));
        }
        match record[0].parse::<f64>() {
            Ok(x) => values.push(x),
            Err(_) if first => {}
            Err(_) => return Err(GofError::Parse(format!("cannot parse '{}' as a number", &record[0]))),
        }
        first = false;
    }
    Sample::new(values)
}

pub fn read_sample_path(path: impl AsRef<Path>) -> Result<Sample<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| GofError::Io(format!("{}: {e}", path.display())))?;
    read_sample(file)
}

/// Writes `# key=value` comment lines, a `x` header, and the values in
/// shortest round-trip form.
pub fn write_sample<W: Write>(mut out: W, values: &[f64], meta: &[(&str, String)]) -> Result<()> {
    for (key, value) in meta {
        writeln!(out, "# {key}={value}")?;
    }
    writeln!(out, "x")?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}
