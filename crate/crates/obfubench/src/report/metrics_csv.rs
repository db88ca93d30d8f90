//! The metrics CSV: one row per (function, model, regime).

use std::io::{Read, Write};

use obfubench_core::{Category, MetricRecord, RecordStatus, Regime};

use super::ReportError;

pub const HEADER: [&str; 15] = [
    "function_id",
    "category",
    "model",
    "pet",
    "pass_rate",
    "expansion_ratio",
    "cc_original",
    "cc_obfuscated",
    "cc_delta",
    "entropy_original",
    "entropy_obfuscated",
    "entropy_delta",
    "time_delta_s",
    "semantic_elasticity",
    "status",
];

/// Six decimals; negative zero prints as zero.
pub fn fmt_real(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn row(r: &MetricRecord) -> [String; 15] {
    [
        r.function_id.clone(),
        r.category.as_str().into(),
        r.model_id.clone(),
        r.regime.as_str().into(),
        fmt_real(r.pass_rate),
        opt(r.expansion, fmt_real),
        r.cc_original.to_string(),
        opt(r.cc_obfuscated, |v| v.to_string()),
        opt(r.cc_delta, |v| v.to_string()),
        fmt_real(r.entropy_original),
        opt(r.entropy_obfuscated, fmt_real),
        opt(r.entropy_delta, fmt_real),
        opt(r.time_delta, fmt_real),
        fmt_real(r.semantic_elasticity),
        r.status.as_str().into(),
    ]
}

/// Rows in (model, pet, function_id) order.
pub fn sorted(records: &[MetricRecord]) -> Vec<&MetricRecord> {
    let mut rows: Vec<&MetricRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        (a.model_id.as_str(), a.regime.as_str(), a.function_id.as_str()).cmp(&(
            b.model_id.as_str(),
            b.regime.as_str(),
            b.function_id.as_str(),
        ))
    });
    rows
}

pub fn write_metrics<W: Write>(records: &[MetricRecord], out: W) -> Result<(), ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in sorted(records) {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn metrics_to_string(records: &[MetricRecord]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_metrics(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn bad(line: u64, column: &str, value: &str) -> ReportError {
    ReportError::Parse {
        line,
        message: format!("column {column}: cannot parse {value:?}"),
    }
}

pub fn read_metrics<R: Read>(input: R) -> Result<Vec<MetricRecord>, ReportError> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != HEADER {
        return Err(ReportError::Parse {
            line: 1,
            message: format!("unexpected header {}", header.join(",")),
        });
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let field = |idx: usize| row.get(idx).unwrap_or_default();
        let real = |idx: usize| -> Result<f64, ReportError> {
            field(idx).parse().map_err(|_| bad(line, HEADER[idx], field(idx)))
        };
        let opt_real = |idx: usize| -> Result<Option<f64>, ReportError> {
            match field(idx) {
                "" => Ok(None),
                _ => real(idx).map(Some),
            }
        };
        let opt_int = |idx: usize| -> Result<Option<i64>, ReportError> {
            match field(idx) {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(line, HEADER[idx], v)),
            }
        };
        records.push(MetricRecord {
            function_id: field(0).into(),
            category: field(1).parse::<Category>().map_err(|_| bad(line, HEADER[1], field(1)))?,
            model_id: field(2).into(),
            regime: field(3).parse::<Regime>().map_err(|_| bad(line, HEADER[3], field(3)))?,
            pass_rate: real(4)?,
            expansion: opt_real(5)?,
            cc_original: field(6).parse().map_err(|_| bad(line, HEADER[6], field(6)))?,
            cc_obfuscated: opt_int(7)?
                .map(|v| u32::try_from(v).map_err(|_| bad(line, HEADER[7], field(7))))
                .transpose()?,
            cc_delta: opt_int(8)?,
            entropy_original: real(9)?,
            entropy_obfuscated: opt_real(10)?,
            entropy_delta: opt_real(11)?,
            time_delta: opt_real(12)?,
            semantic_elasticity: real(13)?,
            status: RecordStatus::parse(field(14)).ok_or_else(|| bad(line, HEADER[14], field(14)))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, model: &str, regime: Regime) -> MetricRecord {
        MetricRecord {
            function_id: id.into(),
            category: Category::Mathematical,
            model_id: model.into(),
            regime,
            pass_rate: 1.0,
            expansion: Some(1.25),
            cc_original: 2,
            cc_obfuscated: Some(1),
            cc_delta: Some(-1),
            entropy_original: 0.918_295_834_054_489_6,
            entropy_obfuscated: Some(1.5),
            entropy_delta: Some(0.581_704_165_945_510_4),
            time_delta: None,
            semantic_elasticity: 0.8,
            status: RecordStatus::Ok,
        }
    }

    #[test]
    fn single_record_two_lines() {
        let text = metrics_to_string(&[record("factorial", "gpt", Regime::ZeroShot)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], HEADER.join(","));
        assert_eq!(
            lines[1],
            "factorial,mathematical,gpt,zero_shot,1.000000,1.250000,2,1,-1,0.918296,1.500000,0.581704,,0.800000,ok"
        );
        let cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cols[12], "");
    }

    #[test]
    fn ordering_and_determinism() {
        let recs = vec![
            record("b", "m2", Regime::ZeroShot),
            record("a", "m2", Regime::ZeroShot),
            record("z", "m1", Regime::ZeroShot),
            record("c", "m2", Regime::FewShot),
        ];
        let text = metrics_to_string(&recs).unwrap();
        let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(ids, ["z", "c", "a", "b"]);
        let mut shuffled = recs.clone();
        shuffled.reverse();
        assert_eq!(metrics_to_string(&shuffled).unwrap(), text);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(metrics_to_string(&[]), Err(ReportError::EmptyInput)));
    }

    #[test]
    fn negative_zero() {
        assert_eq!(fmt_real(-1e-12), "0.000000");
        assert_eq!(fmt_real(-0.5), "-0.500000");
    }

    #[test]
    fn header_checked_on_read() {
        assert!(read_metrics("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn arb_record() -> impl Strategy<Value = MetricRecord> {
        (
            "[a-z_]{1,12}",
            "[a-zA-Z0-9 ,.\"-]{1,12}",
            prop::bool::ANY,
            0.0f64..=1.0,
            prop::option::of(0.01f64..20.0),
            1u32..40,
            prop::option::of(1u32..40),
            prop::option::of(-5.0f64..5.0),
            prop::option::of(-1.0f64..1.0),
            0.0f64..100.0,
            0usize..3,
        )
            .prop_map(|(id, model, few, p, e, cco, ccb, dh, dt, se, st)| MetricRecord {
                function_id: id,
                category: Category::ALL[cco as usize % 5],
                model_id: model,
                regime: if few { Regime::FewShot } else { Regime::ZeroShot },
                pass_rate: p,
                expansion: e,
                cc_original: cco,
                cc_obfuscated: ccb,
                cc_delta: ccb.map(|b| b as i64 - cco as i64),
                entropy_original: 2.0,
                entropy_obfuscated: dh.map(|d| 2.0 + d),
                entropy_delta: dh,
                time_delta: dt,
                semantic_elasticity: se,
                status: [RecordStatus::Ok, RecordStatus::LoadError, RecordStatus::LexError][st],
            })
    }

    fn within(a: Option<f64>, b: Option<f64>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => (x - y).abs() <= 5e-7,
            _ => false,
        }
    }

    proptest! {
        #[test]
        fn roundtrip(recs in prop::collection::vec(arb_record(), 1..20)) {
            let text = metrics_to_string(&recs).unwrap();
            let back = read_metrics(text.as_bytes()).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (orig, read) in sorted(&recs).into_iter().zip(&back) {
                prop_assert_eq!(&orig.function_id, &read.function_id);
                prop_assert_eq!(&orig.model_id, &read.model_id);
                prop_assert_eq!((orig.category, orig.regime, orig.status), (read.category, read.regime, read.status));
                prop_assert_eq!((orig.cc_original, orig.cc_obfuscated, orig.cc_delta), (read.cc_original, read.cc_obfuscated, read.cc_delta));
                for (a, b) in [
                    (Some(orig.pass_rate), Some(read.pass_rate)),
                    (orig.expansion, read.expansion),
                    (Some(orig.entropy_original), Some(read.entropy_original)),
                    (orig.entropy_obfuscated, read.entropy_obfuscated),
                    (orig.entropy_delta, read.entropy_delta),
                    (orig.time_delta, read.time_delta),
                    (Some(orig.semantic_elasticity), Some(read.semantic_elasticity)),
                ] {
                    prop_assert!(within(a, b), "{:?} vs {:?}", a, b);
                }
            }
            prop_assert_eq!(metrics_to_string(&back).unwrap(), text);
        }
    }
}
