//! CSV writers and readers for every table the crate produces. Floats are
//! written with 17 significant digits so that reading a table back recovers
//! the exact values, and identical inputs give byte-identical files.

use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::DiscretePmf;
use crate::gem::{Construction, SampleSummary};
use crate::limit::{CdfMethod, LimitCdfPoint};
use crate::stats::{GofReport, TestKind};
use crate::ties::TiePath;

pub const PMF_HEADER: [&str; 2] = ["k", "prob"];
pub const SAMPLE_HEADER: [&str; 6] = ["replica", "n", "M", "K", "L", "construction"];
pub const CDF_HEADER: [&str; 4] = ["x", "value", "error_estimate", "method"];
pub const TIE_HEADER: [&str; 3] = ["replica", "n", "running_max_L"];
pub const REPORT_HEADER: [&str; 6] = ["test", "statistic", "p_value", "dof", "bins", "n_samples"];

const TAIL_MASS_TAG: &str = "# tail_mass=";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: FromStr>(field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse(format!("bad {what} '{field}'")))
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let found = rd.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!("expected header {}, found {}", header.join(","), found.iter().collect::<Vec<_>>().join(","))));
    }
    rd.records().map(|r| r.map_err(Error::from)).collect()
}

/// `k,prob` rows followed by a `# tail_mass=` line.
pub fn write_pmf<W: Write>(w: W, pmf: &DiscretePmf) -> Result<()> {
    let mut out = writer(w, &PMF_HEADER)?;
    for (i, p) in pmf.probs.iter().enumerate() {
        out.write_record([(pmf.offset + i as u64).to_string(), fmt_f64(*p)])?;
    }
    let mut w = out.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w, "{TAIL_MASS_TAG}{}", fmt_f64(pmf.tail_mass))?;
    Ok(())
}

pub fn read_pmf<R: Read>(r: R) -> Result<DiscretePmf> {
    let mut text = String::new();
    let mut tail = None;
    for line in BufReader::new(r).lines() {
        let line = line?;
        match line.strip_prefix(TAIL_MASS_TAG) {
            Some(v) => tail = Some(parse::<f64>(v, "tail mass")?),
            None => {
                text.push_str(&line);
                text.push('\n');
            }
        }
    }
    let tail = tail.ok_or_else(|| Error::Parse("missing tail_mass line".into()))?;
    let recs = rows(text.as_bytes(), &PMF_HEADER)?;
    let mut offset = None;
    let mut probs = Vec::with_capacity(recs.len());
    for (i, rec) in recs.iter().enumerate() {
        let k: u64 = parse(&rec[0], "k")?;
        let first = *offset.get_or_insert(k);
        if k != first + i as u64 {
            return Err(Error::Parse(format!("pmf rows must be consecutive, found k={k}")));
        }
        probs.push(parse(&rec[1], "prob")?);
    }
    DiscretePmf::new(offset.unwrap_or(0), probs, tail)
}

/// One row of a sample table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRow {
    pub replica: u64,
    pub n: u64,
    pub max_value: u64,
    pub distinct_count: u64,
    pub tie_count: u64,
    pub construction: Construction,
}

impl From<&SampleSummary> for SampleRow {
    fn from(s: &SampleSummary) -> Self {
        Self {
            replica: s.key.replica_index,
            n: s.n,
            max_value: s.max_value,
            distinct_count: s.distinct_count,
            tie_count: s.tie_count,
            construction: s.construction,
        }
    }
}

pub fn write_samples<W: Write>(w: W, samples: &[SampleSummary]) -> Result<()> {
    let mut out = writer(w, &SAMPLE_HEADER)?;
    for s in samples {
        out.write_record([
            s.key.replica_index.to_string(),
            s.n.to_string(),
            s.max_value.to_string(),
            s.distinct_count.to_string(),
            s.tie_count.to_string(),
            s.construction.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<Vec<SampleRow>> {
    rows(r, &SAMPLE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(SampleRow {
                replica: parse(&rec[0], "replica")?,
                n: parse(&rec[1], "n")?,
                max_value: parse(&rec[2], "M")?,
                distinct_count: parse(&rec[3], "K")?,
                tie_count: parse(&rec[4], "L")?,
                construction: rec[5].parse()?,
            })
        })
        .collect()
}

pub fn write_cdf<W: Write>(w: W, points: &[LimitCdfPoint]) -> Result<()> {
    let mut out = writer(w, &CDF_HEADER)?;
    for p in points {
        out.write_record([fmt_f64(p.x), fmt_f64(p.value), fmt_f64(p.error_estimate), p.method.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cdf<R: Read>(r: R) -> Result<Vec<LimitCdfPoint>> {
    rows(r, &CDF_HEADER)?
        .iter()
        .map(|rec| {
            Ok(LimitCdfPoint {
                x: parse(&rec[0], "x")?,
                value: parse(&rec[1], "value")?,
                error_estimate: parse(&rec[2], "error_estimate")?,
                method: rec[3].parse::<CdfMethod>()?,
            })
        })
        .collect()
}

pub fn write_tie_paths<W: Write>(w: W, paths: &[TiePath]) -> Result<()> {
    let mut out = writer(w, &TIE_HEADER)?;
    for p in paths {
        for &(n, l) in &p.checkpoints {
            out.write_record([p.replica.to_string(), n.to_string(), l.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_tie_paths<R: Read>(r: R) -> Result<Vec<TiePath>> {
    let mut paths: Vec<TiePath> = Vec::new();
    for rec in rows(r, &TIE_HEADER)? {
        let replica: u64 = parse(&rec[0], "replica")?;
        let point = (parse(&rec[1], "n")?, parse(&rec[2], "running_max_L")?);
        match paths.last_mut() {
            Some(p) if p.replica == replica => p.checkpoints.push(point),
            _ => paths.push(TiePath { replica, checkpoints: vec![point] }),
        }
    }
    Ok(paths)
}

pub fn write_reports<W: Write>(w: W, reports: &[GofReport]) -> Result<()> {
    let mut out = writer(w, &REPORT_HEADER)?;
    for g in reports {
        out.write_record([
            g.test.to_string(),
            fmt_f64(g.statistic),
            fmt_f64(g.p_value),
            g.dof.to_string(),
            g.bins.to_string(),
            g.n_samples.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_reports<R: Read>(r: R) -> Result<Vec<GofReport>> {
    rows(r, &REPORT_HEADER)?
        .iter()
        .map(|rec| {
            Ok(GofReport {
                test: rec[0].parse::<TestKind>()?,
                statistic: parse(&rec[1], "statistic")?,
                p_value: parse(&rec[2], "p_value")?,
                dof: parse(&rec[3], "dof")?,
                bins: parse(&rec[4], "bins")?,
                n_samples: parse(&rec[5], "n_samples")?,
            })
        })
        .collect()
}
