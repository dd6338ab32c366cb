use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchRecord, Cell};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// CSV column order. The first thirteen columns are the fixed report
/// interface; per-variant ratios follow.
pub const CSV_HEADER: [&str; 16] = [
    "size",
    "qs_ms",
    "bitonic_seq_ms",
    "basic_ms",
    "semi_ms",
    "optimized_ms",
    "ratio",
    "launches_basic",
    "launches_semi",
    "launches_opt",
    "gmem_basic",
    "gmem_semi",
    "gmem_opt",
    "ratio_basic",
    "ratio_semi",
    "ratio_opt",
];

/// One CSV data row. Missing or unreliable measurements are empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub size: usize,
    pub qs_ms: Option<f64>,
    pub bitonic_seq_ms: Option<f64>,
    pub basic_ms: Option<f64>,
    pub semi_ms: Option<f64>,
    pub optimized_ms: Option<f64>,
    pub ratio: Option<f64>,
    pub launches_basic: Option<u64>,
    pub launches_semi: Option<u64>,
    pub launches_opt: Option<u64>,
    pub gmem_basic: Option<u64>,
    pub gmem_semi: Option<u64>,
    pub gmem_opt: Option<u64>,
    pub ratio_basic: Option<f64>,
    pub ratio_semi: Option<f64>,
    pub ratio_opt: Option<f64>,
}

fn time(c: &Option<Cell>) -> Option<f64> {
    c.as_ref().filter(|c| c.reliable).map(|c| c.elapsed_ms)
}

fn launches(c: &Option<Cell>) -> Option<u64> {
    c.as_ref()?.counters.map(|k| k.kernel_launches)
}

fn gmem(c: &Option<Cell>) -> Option<u64> {
    c.as_ref()?.counters.map(|k| k.global_traffic())
}

fn ratio(c: &Option<Cell>) -> Option<f64> {
    c.as_ref()?.ratio
}

impl From<&BenchRecord> for CsvRow {
    fn from(r: &BenchRecord) -> Self {
        CsvRow {
            size: r.size,
            qs_ms: time(&r.quicksort),
            bitonic_seq_ms: time(&r.bitonic_sequential),
            basic_ms: time(&r.basic),
            semi_ms: time(&r.semi),
            optimized_ms: time(&r.optimized),
            ratio: r.ratio,
            launches_basic: launches(&r.basic),
            launches_semi: launches(&r.semi),
            launches_opt: launches(&r.optimized),
            gmem_basic: gmem(&r.basic),
            gmem_semi: gmem(&r.semi),
            gmem_opt: gmem(&r.optimized),
            ratio_basic: ratio(&r.basic),
            ratio_semi: ratio(&r.semi),
            ratio_opt: ratio(&r.optimized),
        }
    }
}

/// Renders records as an aligned table, CSV, or a JSON array.
pub fn emit_report(records: &[BenchRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => table(records),
        OutputFormat::Csv => csv(records),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s
        }
    }
}

fn csv(records: &[BenchRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.serialize(CsvRow::from(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn table(records: &[BenchRecord]) -> String {
    const HEAD: [&str; 13] = [
        "Array size",
        "QuickSort",
        "BitonicSort",
        "Basic",
        "Semi",
        "Optimized",
        "Ratio",
        "Launch B",
        "Launch S",
        "Launch O",
        "GMem B",
        "GMem S",
        "GMem O",
    ];
    let ms = |c: &Option<Cell>| match c {
        None => String::new(),
        Some(c) if c.reliable => format!("{:.3}", c.elapsed_ms),
        Some(c) => format!("{:.3}*", c.elapsed_ms),
    };
    let num = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();

    let rows: Vec<[String; 13]> = records
        .iter()
        .map(|r| {
            [
                r.size.to_string(),
                ms(&r.quicksort),
                ms(&r.bitonic_sequential),
                ms(&r.basic),
                ms(&r.semi),
                ms(&r.optimized),
                r.ratio.map(|x| format!("{x:.2}")).unwrap_or_default(),
                num(launches(&r.basic)),
                num(launches(&r.semi)),
                num(launches(&r.optimized)),
                num(gmem(&r.basic)),
                num(gmem(&r.semi)),
                num(gmem(&r.optimized)),
            ]
        })
        .collect();

    let mut width: Vec<usize> = HEAD.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &mut HEAD.iter().copied());
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &rows {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    if records.iter().any(|r| {
        [
            &r.quicksort,
            &r.bitonic_sequential,
            &r.basic,
            &r.semi,
            &r.optimized,
        ]
        .into_iter()
        .flatten()
        .any(|c| !c.reliable)
    }) {
        out.push_str("* below timer threshold, excluded from ratios\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Counters;
    use crate::verify::validate;

    fn record(size: usize, ms: f64) -> BenchRecord {
        let cell = |ms: f64, launches: Option<u64>| Cell {
            elapsed_ms: ms,
            reliable: true,
            verification: validate(&[1], &[1]),
            counters: launches.map(|l| Counters {
                kernel_launches: l,
                global_reads: l * size as u64,
                global_writes: l * size as u64,
                compare_exchanges: 7,
            }),
            ratio: Some(1.5),
        };
        BenchRecord {
            size,
            padded_size: size,
            input_digest: "00".into(),
            quicksort: Some(cell(ms, None)),
            bitonic_sequential: Some(cell(ms * 3.0, None)),
            basic: Some(cell(ms / 2.0, Some(10))),
            semi: Some(cell(ms / 3.0, Some(4))),
            optimized: None,
            ratio: Some(3.0),
        }
    }

    #[test]
    fn csv_single_record_two_lines() {
        let text = emit_report(&[record(1024, 2.0)], OutputFormat::Csv);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![record(1024, 2.0), record(2048, 0.123456789)];
        let text = emit_report(&recs, OutputFormat::Csv);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<CsvRow> = rd.deserialize().collect::<Result<_, _>>().unwrap();
        let expected: Vec<CsvRow> = recs.iter().map(CsvRow::from).collect();
        assert_eq!(rows, expected);
        assert_eq!(rows[1].qs_ms, Some(0.123456789));
        assert_eq!(rows[0].launches_semi, Some(4));
        assert_eq!(rows[0].gmem_basic, Some(2 * 10 * 1024));
        assert_eq!(rows[0].optimized_ms, None);
    }

    #[test]
    fn table_size_column_monotone() {
        let recs = vec![record(256, 1.0), record(512, 2.0), record(1024, 4.0)];
        let text = emit_report(&recs, OutputFormat::Table);
        let sizes: Vec<usize> = text
            .lines()
            .skip(2)
            .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(sizes, vec![256, 512, 1024]);
        assert!(text.starts_with("Array size"));
    }

    #[test]
    fn json_has_stable_fields() {
        let text = emit_report(&[record(8, 1.0)], OutputFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let first = &v[0];
        for key in [
            "size",
            "quicksort",
            "basic",
            "semi",
            "optimized",
            "ratio",
            "input_digest",
        ] {
            assert!(first.get(key).is_some(), "{key}");
        }
        assert_eq!(first["basic"]["counters"]["kernel_launches"], 10);
    }

    #[test]
    fn unreliable_cells_are_marked() {
        let mut r = record(64, 1.0);
        r.basic.as_mut().unwrap().reliable = false;
        let table = emit_report(&[r.clone()], OutputFormat::Table);
        assert!(table.contains('*'));
        let row = CsvRow::from(&r);
        assert_eq!(row.basic_ms, None);
    }
}
