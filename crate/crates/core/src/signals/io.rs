//! CSV forms of signals.
//!
//! Sparse: header `n_1,…,n_d,value`, one support point per row.
//! Periodic: a `d,N` header row followed by one value per row in row-major order.

use std::io::{Read, Write};

use super::{PeriodicSignal, SparseSignal};
use crate::{Error, Result};

impl SparseSignal {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("n_{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (n, v) in self.iter() {
            let mut row: Vec<String> = n.iter().map(|x| x.to_string()).collect();
            row.push(format!("{v:e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let cols = r.headers()?.len();
        if cols < 2 {
            return Err(Error::Format(
                "sparse signal needs at least one coordinate column".into(),
            ));
        }
        let mut s = SparseSignal::new(cols - 1);
        for rec in r.records() {
            let rec = rec?;
            let mut point = Vec::with_capacity(cols - 1);
            for field in rec.iter().take(cols - 1) {
                point.push(
                    field
                        .trim()
                        .parse::<i64>()
                        .map_err(|e| Error::Format(format!("coordinate {field:?}: {e}")))?,
                );
            }
            let v: f64 = rec[cols - 1]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("value: {e}")))?;
            s.add(&point, v);
        }
        Ok(s)
    }
}

impl PeriodicSignal {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["d", "N"])?;
        w.write_record([self.dim.to_string(), self.side.to_string()])?;
        for v in self.values() {
            w.write_record([format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let mut rows = r.records();
        let shape = rows
            .next()
            .ok_or_else(|| Error::Format("missing d,N row".into()))??;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("shape field {s:?}: {e}")))
        };
        if shape.len() != 2 {
            return Err(Error::Format("shape row must hold d and N".into()));
        }
        let (dim, side) = (parse(&shape[0])?, parse(&shape[1])?);
        let mut values = Vec::new();
        for rec in rows {
            let rec = rec?;
            values.push(
                rec[0]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("value: {e}")))?,
            );
        }
        PeriodicSignal::from_values(dim, side, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_round_trip() {
        let mut s = SparseSignal::new(3);
        s.insert(vec![1, -2, 3], 0.125);
        s.insert(vec![0, 0, 0], -1.0 / 3.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("n_1,n_2,n_3,value"));
        assert_eq!(SparseSignal::read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn periodic_round_trip() {
        let p =
            PeriodicSignal::from_values(2, 3, (0..9).map(|i| i as f64 / 7.0).collect()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(PeriodicSignal::read_csv(&buf[..]).unwrap(), p);
        assert!(PeriodicSignal::read_csv("d,N\n2,3\n1.0\n".as_bytes()).is_err());
    }
}
