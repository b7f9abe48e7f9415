//! Trace files: header `k,sfo,lmo,f,gap,wall_ns`, one line per recorded
//! iterate. Floats use 17 significant digits so parsing restores them
//! exactly; an absent gap is an empty field.

use std::io::{Read, Write};
use std::path::Path;

use sfw_core::metrics::{Trace, TraceRow};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 6] = ["k", "sfo", "lmo", "f", "gap", "wall_ns"];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.k.to_string(),
            r.sfo.to_string(),
            r.lmo.to_string(),
            format_float(r.f),
            r.gap.map(format_float).unwrap_or_default(),
            r.wall_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(trace: &Trace, path: &Path) -> Result<()> {
    let io_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_trace(trace, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => CliError::Csv(format!("{other:?}")),
    })
}

/// Reads rows written by [`write_trace`]. Metadata is not stored in the file.
pub fn read_trace<R: Read>(input: R) -> Result<Trace> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| CliError::Csv(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(CliError::Csv(format!("unexpected header {header:?}")));
    }
    let mut trace = Trace::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        let bad = |field: &str| CliError::Csv(format!("row {}: bad {field}", line + 1));
        let int = |i: usize| rec[i].parse::<u64>().map_err(|_| bad(HEADER[i]));
        let gap = match &rec[4] {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("gap"))?),
        };
        trace.rows.push(TraceRow {
            k: int(0)?,
            sfo: int(1)?,
            lmo: int(2)?,
            f: rec[3].parse().map_err(|_| bad("f"))?,
            gap,
            wall_ns: int(5)?,
        });
    }
    Ok(trace)
}

pub fn load_csv(path: &Path) -> Result<Trace> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Csv(format!("{}: {e}", path.display())))?;
    read_trace(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: u64, f: f64, gap: Option<f64>) -> TraceRow {
        TraceRow {
            k,
            sfo: 10 * k,
            lmo: k,
            f,
            gap,
            wall_ns: 0,
        }
    }

    fn render(trace: &Trace) -> String {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(render(&Trace::default()), "k,sfo,lmo,f,gap,wall_ns\n");
    }

    #[test]
    fn one_row_is_two_lines() {
        let t = Trace {
            rows: vec![row(0, 0.5, None)],
            ..Default::default()
        };
        let text = render(&t);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "0,0,0,5.0000000000000000e-1,,0");
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = format_float(std::f64::consts::PI);
        let mantissa = s.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn round_trip_is_exact() {
        let t = Trace {
            rows: vec![
                row(0, 0.6931471805599453, Some(1234.5)),
                row(1, 1e-300, None),
                row(2, 123456789.00000001, Some(0.0)),
                row(3, f64::MIN_POSITIVE / 4.0, Some(5e-324)),
            ],
            ..Default::default()
        };
        let back = read_trace(render(&t).as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_trace("k,sfo,lmo,f,gap,wall_ns\n1,2,3,x,,0\n".as_bytes()).is_err());
    }
}
