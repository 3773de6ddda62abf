use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::AllegationRecord;
use crate::error::{Error, Result};

/// Key of an optional first-line metadata object in JSON-lines files.
/// Readers skip a line whose only key is this one.
pub const JSONL_HEADER_KEY: &str = "_header";

/// Reads one record per non-empty line. Errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && is_header_line(&line) {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::format("jsonl record", format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

fn is_header_line(line: &str) -> bool {
    matches!(
        serde_json::from_str::<serde_json::Value>(line),
        Ok(serde_json::Value::Object(m)) if m.len() == 1 && m.contains_key(JSONL_HEADER_KEY)
    )
}

/// Writes compact JSON, one record per line, keys in field order.
pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

const CSV_COLUMNS: &str = "case_id,metadata,conclusion,law_header,curated";

/// Writes `allegations.csv`: label sets joined with `;`.
pub fn write_allegations_csv<W: Write>(mut writer: W, records: &[AllegationRecord]) -> Result<()> {
    writeln!(writer, "{CSV_COLUMNS}")?;
    for r in records {
        if r.case_id.contains([',', '"', '\n']) {
            return Err(Error::format("allegations csv", format!("case id {:?}", r.case_id)));
        }
        writeln!(
            writer,
            "{},{},{},{},{}",
            r.case_id,
            r.metadata_articles.join(";"),
            r.conclusion_articles.join(";"),
            r.law_header_articles.join(";"),
            r.curated.join(";")
        )?;
    }
    Ok(())
}

/// Reads `allegations.csv`; lines starting with `#` are skipped.
pub fn read_allegations_csv<R: BufRead>(reader: R) -> Result<Vec<AllegationRecord>> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line.trim() != CSV_COLUMNS {
                return Err(Error::format("allegations csv", format!("line {}: bad header", i + 1)));
            }
            seen_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::format(
                "allegations csv",
                format!("line {}: expected 5 columns, got {}", i + 1, cols.len()),
            ));
        }
        let set = |s: &str| -> Vec<String> {
            s.split(';').filter(|x| !x.is_empty()).map(String::from).collect()
        };
        out.push(AllegationRecord {
            case_id: cols[0].to_string(),
            metadata_articles: set(cols[1]),
            conclusion_articles: set(cols[2]),
            law_header_articles: set(cols[3]),
            curated: set(cols[4]),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CaseDocument, ProxyFlags};

    #[test]
    fn canonical_line_round_trips_byte_for_byte() {
        let line = r#"{"case_id":"001-1","judgment_date":"2019-05-02","paragraphs":["The applicant, état d'urgence.","He was \"held\"."],"alleged":["3","6"],"violated":["3"],"proxies":{"judge_split":0,"key_case":1,"omit_alleg":0,"article6":1,"diff_pred":0,"diff_fam":0,"num_para":2}}"#;
        let input = format!("{line}\n");
        let docs: Vec<CaseDocument> = read_jsonl(input.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_jsonl(&mut out, &docs).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
        assert_eq!(docs[0].proxies, Some(ProxyFlags { key_case: 1, article6: 1, num_para: 2, ..Default::default() }));
    }

    #[test]
    fn header_line_skipped_and_errors_carry_line_numbers() {
        let text = "{\"_header\":{\"tool\":\"x\"}}\n{\"case_id\":1}\n";
        let err = read_jsonl::<CaseDocument, _>(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn allegations_csv_round_trip() {
        let recs = vec![AllegationRecord {
            case_id: "c1".into(),
            metadata_articles: vec!["3".into()],
            conclusion_articles: vec!["3".into(), "6".into()],
            law_header_articles: vec![],
            curated: vec!["3".into(), "6".into()],
        }];
        let mut buf = Vec::new();
        write_allegations_csv(&mut buf, &recs).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "case_id,metadata,conclusion,law_header,curated\nc1,3,3;6,,3;6\n"
        );
        assert_eq!(read_allegations_csv(buf.as_slice()).unwrap(), recs);
    }
}
