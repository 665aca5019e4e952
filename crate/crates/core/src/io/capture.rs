//! Capture-history CSV: header `id,t1,...,tT`, one row per marked individual.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::CaptureData;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input)
}

/// Parses a capture matrix. `source` names the input in error messages.
pub fn parse_capture_csv<R: Read>(input: R, source: &str) -> Result<CaptureData> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("id") {
        return Err(Error::invalid(format!("{source}: header must start with `id`")));
    }
    let occasions = header.len() - 1;
    if occasions == 0 {
        return Err(Error::invalid(format!("{source}: header has no occasion columns")));
    }
    for (t, name) in header.iter().skip(1).enumerate() {
        if name != format!("t{}", t + 1) {
            return Err(Error::invalid(format!(
                "{source}: header column {} is `{name}`, expected `t{}`",
                t + 2,
                t + 1
            )));
        }
    }
    let mut ids: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k as u64 + 2, |p| p.line());
        if record.len() != occasions + 1 {
            return Err(Error::invalid(format!(
                "{source}, line {line}: {} fields, expected {}",
                record.len(),
                occasions + 1
            )));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(Error::invalid(format!("{source}, line {line}: empty id")));
        }
        if let Some(first) = ids.iter().position(|x| *x == id) {
            return Err(Error::invalid(format!(
                "{source}, line {line}: duplicate id `{id}` (first seen in data row {})",
                first + 1
            )));
        }
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(t, cell)| match cell {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::invalid(format!(
                    "{source}, line {line}, column t{}: cell `{other}` is not 0 or 1",
                    t + 1
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if row.iter().all(|&y| y == 0) {
            return Err(Error::invalid(format!("{source}, line {line}: id `{id}` has no captures")));
        }
        ids.push(id);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid(format!("{source}: no data rows")));
    }
    CaptureData::new(ids, rows)
}

pub fn read_capture_csv(path: &Path) -> Result<CaptureData> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_capture_csv(file, &path.display().to_string())
}

/// Writes the observed rows; augmented rows are never written.
pub fn write_capture_csv<W: Write>(data: &CaptureData, mut out: W) -> std::io::Result<()> {
    let n = data.n_occasions();
    let mut line = String::from("id");
    for t in 1..=n {
        line.push_str(&format!(",t{t}"));
    }
    writeln!(out, "{line}")?;
    for (i, id) in data.ids().iter().enumerate() {
        line.clear();
        line.push_str(id);
        for &y in data.history(i) {
            line.push(',');
            line.push(if y == 1 { '1' } else { '0' });
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<CaptureData> {
        parse_capture_csv(text.as_bytes(), "test.csv")
    }

    #[test]
    fn reads_a_small_matrix() {
        let d = parse("id,t1,t2,t3\na,1,0,0\nb,0,1,1\n").unwrap();
        assert_eq!(d.n_observed(), 2);
        assert_eq!(d.n_occasions(), 3);
        assert_eq!(d.history(1), &[0, 1, 1]);
        assert_eq!(d.ids()[0], "a");
    }

    #[test]
    fn names_the_bad_cell() {
        let err = parse("id,t1,t2\na,1,0\nb,2,1\n").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("t1") && err.contains("`2`"), "{err}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(parse("id,t1,t2\n").unwrap_err().to_string().contains("no data rows"));
        assert!(parse("id,t1,t2\na,1\n").unwrap_err().to_string().contains("fields"));
        assert!(parse("id,t1,t2\na,1,0\na,0,1\n").unwrap_err().to_string().contains("duplicate id"));
        assert!(parse("id,t1,t2\na,0,0\n").unwrap_err().to_string().contains("no captures"));
        assert!(parse("name,t1\na,1\n").is_err());
        assert!(parse("id,t1,t3\na,1,1\n").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "id,t1,t2,t3,t4\nx1,1,0,0,1\nx2,0,0,1,0\nx3,1,1,1,1\n";
        let d = parse(text).unwrap();
        let mut buf = Vec::new();
        write_capture_csv(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }
}
