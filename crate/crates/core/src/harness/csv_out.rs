//! CSV persistence: one header row, then one row per record.

use std::io::Write;
use std::path::Path;

use crate::Result;

/// Output switches that change the column set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub timing: bool,
}

pub trait CsvRecord {
    fn columns(opts: CsvOptions) -> Vec<&'static str>;
    fn values(&self, opts: CsvOptions) -> Vec<String>;
}

/// Shortest round-tripping decimal, with `inf`/`nan` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

pub fn fmt_opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

pub fn write_csv<R: CsvRecord, W: Write>(records: &[R], opts: CsvOptions, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::columns(opts))?;
    for r in records {
        w.write_record(r.values(opts))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path<R: CsvRecord>(records: &[R], opts: CsvOptions, path: &Path) -> Result<()> {
    write_csv(records, opts, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Row(u32, f64);

    impl CsvRecord for Row {
        fn columns(_: CsvOptions) -> Vec<&'static str> {
            vec!["id", "value"]
        }
        fn values(&self, _: CsvOptions) -> Vec<String> {
            vec![self.0.to_string(), fmt_f64(self.1)]
        }
    }

    #[test]
    fn header_only_and_rows() {
        let mut buf = Vec::new();
        write_csv::<Row, _>(&[], CsvOptions::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,value\n");
        let mut buf = Vec::new();
        write_csv(&[Row(1, 0.1), Row(2, f64::INFINITY)], CsvOptions::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,value\n1,0.1\n2,inf\n");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }
}
