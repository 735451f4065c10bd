//! Table files: markdown for reading, CSV with unrounded values.

use std::path::{Path, PathBuf};

use dirtask_core::eval::{render_demand_markdown, render_markdown, Metric, MetricsTable, Row};
use dirtask_core::Family;

use crate::error::{Error, Result};
use crate::io::write_text;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "md" | "markdown" => Some(Format::Markdown),
            "csv" => Some(Format::Csv),
            "both" => Some(Format::Both),
            _ => None,
        }
    }
}

fn header(t: &MetricsTable) -> Vec<String> {
    let mut h = vec![String::from("row")];
    h.extend(t.columns.iter().map(|f| f.short().to_string()));
    if t.metric.has_averages() {
        h.push("AVG".into());
    }
    h
}

fn raw(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn render_csv(t: &MetricsTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::format("<csv>", e);
    w.write_record(header(t)).map_err(csv_err)?;
    for r in &t.rows {
        let mut rec = vec![r.label.clone()];
        rec.extend(r.values.iter().map(|v| raw(*v)));
        if t.metric.has_averages() {
            rec.push(raw(r.avg));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("<csv>", e))?;
    String::from_utf8(bytes).map_err(|e| Error::format("<csv>", e))
}

pub fn parse_csv(text: &str, metric: Metric) -> Result<MetricsTable> {
    let bad = |m: String| Error::format("<csv>", m);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let mut names: Vec<&str> = head.iter().skip(1).collect();
    if metric.has_averages() && names.pop() != Some("AVG") {
        return Err(bad("missing AVG column".into()));
    }
    let columns = names
        .iter()
        .map(|n| Family::parse(n).ok_or_else(|| bad(format!("unknown column `{n}`"))))
        .collect::<Result<Vec<_>>>()?;
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("bad value `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let cells: Vec<&str> = rec.iter().collect();
        let values = cells[1..1 + columns.len()].iter().map(|s| num(s)).collect::<Result<_>>()?;
        let avg = if metric.has_averages() { num(cells[1 + columns.len()])? } else { None };
        rows.push(Row {
            label: cells[0].to_string(),
            values,
            avg,
        });
    }
    Ok(MetricsTable { metric, columns, rows })
}

/// Writes `table3.md`/`.csv` and friends into `dir`; with `by_demand`,
/// also `<table>_demand.md`. Returns the written paths.
pub fn write_reports(dir: &Path, tables: &[MetricsTable], format: Format, by_demand: bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for t in tables {
        let name = t.metric.table_name();
        if matches!(format, Format::Markdown | Format::Both) {
            let p = dir.join(format!("{name}.md"));
            write_text(&p, &render_markdown(t))?;
            out.push(p);
        }
        if matches!(format, Format::Csv | Format::Both) {
            let p = dir.join(format!("{name}.csv"));
            write_text(&p, &render_csv(t)?)?;
            out.push(p);
        }
        if by_demand {
            let p = dir.join(format!("{name}_demand.md"));
            write_text(&p, &render_demand_markdown(t))?;
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirtask_core::eval::{aggregate, Condition};

    fn sample(metric: Metric) -> MetricsTable {
        MetricsTable {
            metric,
            columns: Family::ALL.to_vec(),
            rows: vec![
                Row {
                    label: "G (+ask)".into(),
                    values: vec![Some(1.0), Some(2.0 / 3.0), None, Some(12.0), Some(0.1), Some(2.0), Some(3.5)],
                    avg: Some(19.266666666666666 / 6.0),
                },
                Row {
                    label: "Planner".into(),
                    values: vec![Some(1.0); 7],
                    avg: Some(1.0),
                },
            ],
        }
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        for m in Metric::ALL {
            let mut t = sample(m);
            if !m.has_averages() {
                t.rows.iter_mut().for_each(|r| r.avg = None);
            }
            let text = render_csv(&t).unwrap();
            let back = parse_csv(&text, m).unwrap();
            assert_eq!(back, t);
            assert_eq!(render_csv(&back).unwrap(), text);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = aggregate(&[], &[], &Family::ALL, Metric::Steps);
        assert_eq!(render_csv(&t).unwrap(), "row,Persp,Far,Hidd,Not,Dist,Base,Near,AVG\n");
        let md = render_markdown(&t);
        assert_eq!(md.lines().count(), 4);
        let t = aggregate(&[], &[Condition::Planner], &Family::ALL, Metric::FirstTake);
        assert_eq!(render_csv(&t).unwrap().lines().next().unwrap(), "row,Persp,Far,Hidd,Not,Dist,Base,Near");
    }
}
