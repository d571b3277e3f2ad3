//! RFC 4180 subset reader and a small writer used for debugging and tests.
//!
//! Dialect: `"` quoting with `""` escapes, records end at `\n` or `\r\n`,
//! blank lines are skipped, no separator sniffing.

use super::{Column, Table, TableError};

/// Cells equal to one of these (ASCII case-insensitive, after trimming) are missing.
const MISSING_TOKENS: [&str; 3] = ["", "na", "nan"];

/// Record as read from the input, with the 1-based line it started on.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Record {
    pub line: usize,
    pub fields: Vec<String>,
}

pub fn parse_csv(raw: &[u8]) -> Result<Table, TableError> {
    parse_delimited(raw, b',')
}

/// Same dialect as [`parse_csv`] with a different single-byte separator.
pub fn parse_delimited(raw: &[u8], delimiter: u8) -> Result<Table, TableError> {
    let text = std::str::from_utf8(raw).map_err(|e| TableError::EncodingError {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let records = read_records(text, delimiter as char)?;
    let mut iter = records.into_iter();
    let header = iter.next().ok_or(TableError::EmptyInput)?;
    let width = header.fields.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); width];
    for rec in iter {
        if rec.fields.len() != width {
            return Err(TableError::RaggedRow {
                line: rec.line,
                expected: width,
                found: rec.fields.len(),
            });
        }
        for (dst, field) in cells.iter_mut().zip(rec.fields) {
            dst.push(field);
        }
    }
    build_table(header.fields, cells)
}

pub(crate) fn build_table(names: Vec<String>, cells: Vec<Vec<String>>) -> Result<Table, TableError> {
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(TableError::InvalidHeader {
                index: i,
                reason: "empty column name".into(),
            });
        }
        if names[..i].contains(name) {
            return Err(TableError::InvalidHeader {
                index: i,
                reason: format!("duplicate column name `{name}`"),
            });
        }
    }
    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, raw)| infer_column(name, &raw))
        .collect();
    Table::from_columns(columns)
}

pub(crate) fn read_records(text: &str, delimiter: char) -> Result<Vec<Record>, TableError> {
    let mut records = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while chars.peek().is_some() {
        let start_line = line;
        let mut fields = Vec::new();
        let mut field = String::new();
        let mut quoted = false;
        let mut at_field_start = true;
        loop {
            let Some(c) = chars.next() else {
                fields.push(std::mem::take(&mut field));
                break;
            };
            if at_field_start && c == '"' {
                quoted = true;
                at_field_start = false;
                // Quoted field: read to the closing quote.
                loop {
                    match chars.next() {
                        None => return Err(TableError::MalformedQuote { line: start_line }),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            field.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            field.push(ch);
                        }
                    }
                }
                match chars.peek() {
                    None | Some('\n') | Some('\r') => {}
                    Some(&ch) if ch == delimiter => {}
                    Some(_) => return Err(TableError::MalformedQuote { line }),
                }
                continue;
            }
            at_field_start = false;
            if c == delimiter {
                fields.push(std::mem::take(&mut field));
                quoted = false;
                at_field_start = true;
            } else if c == '\n' || (c == '\r' && chars.peek() == Some(&'\n')) {
                if c == '\r' {
                    chars.next();
                }
                line += 1;
                fields.push(std::mem::take(&mut field));
                break;
            } else if c == '"' {
                return Err(TableError::MalformedQuote { line });
            } else {
                field.push(c);
            }
        }
        let blank = fields.len() == 1 && fields[0].is_empty() && !quoted;
        if !blank {
            records.push(Record {
                line: start_line,
                fields,
            });
        }
    }
    Ok(records)
}

pub(crate) fn is_missing_token(s: &str) -> bool {
    let t = s.trim();
    MISSING_TOKENS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]` (fraction-only `.5` and
/// trailing-dot `5.` are accepted). Overflowing values are rejected.
pub(crate) fn parse_decimal(s: &str) -> Option<f64> {
    let t = s.trim();
    let b = t.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Numeric if every present cell is a decimal number; otherwise categorical
/// when the number of distinct labels is at most `max(20, 5% of rows)`;
/// otherwise text.
pub(crate) fn infer_column(name: String, raw: &[String]) -> Column {
    let present: Vec<Option<&str>> = raw
        .iter()
        .map(|s| (!is_missing_token(s)).then_some(s.as_str()))
        .collect();
    let numbers: Option<Vec<Option<f64>>> = present
        .iter()
        .map(|c| match c {
            None => Some(None),
            Some(s) => parse_decimal(s).map(Some),
        })
        .collect();
    if let Some(values) = numbers {
        return Column::numeric(name, values);
    }
    let mut distinct = std::collections::HashSet::new();
    for s in present.iter().flatten() {
        distinct.insert(*s);
    }
    let limit = f64::max(20.0, 0.05 * raw.len() as f64);
    if distinct.len() as f64 <= limit {
        Column::categorical(name, &present)
    } else {
        Column::text(name, present.iter().map(|c| c.map(str::to_owned)).collect())
    }
}

fn quote_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with(' ') || s.ends_with(' ') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Writes every column (dataset then aux) as CSV. Missing cells become
/// empty fields; numbers use Rust's shortest round-trip formatting.
pub fn to_csv(table: &Table) -> String {
    let cols: Vec<&Column> = table.columns().collect();
    let mut out = cols
        .iter()
        .map(|c| quote_field(c.name()))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    let labels: Vec<Vec<Option<String>>> = cols.iter().map(|c| c.labels()).collect();
    for row in 0..table.row_count() {
        let line = labels
            .iter()
            .map(|l| l[row].as_deref().map(quote_field).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(",");
        // A bare empty line would be read back as a skipped blank line.
        out.push_str(if line.is_empty() { "\"\"" } else { &line });
        out.push('\n');
    }
    out
}

/// Column-major JSON dump `{"name": [cells...], ...}`.
pub fn to_debug_json(table: &Table) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for c in table.columns() {
        map.insert(
            c.name().to_owned(),
            serde_json::Value::Array(c.cells().map(|cell| cell.to_json()).collect()),
        );
    }
    serde_json::Value::Object(map)
}

/// JSON array of flat objects. Keys of the first object define the columns;
/// every value is turned into text and then typed like a CSV cell.
#[cfg(feature = "extended-formats")]
pub fn parse_json_records(raw: &[u8]) -> Result<Table, TableError> {
    use serde_json::Value;
    let text = std::str::from_utf8(raw).map_err(|e| TableError::EncodingError {
        offset: e.valid_up_to(),
    })?;
    let doc: Value =
        serde_json::from_str(text).map_err(|e| TableError::MalformedRecords(e.to_string()))?;
    let rows = doc
        .as_array()
        .ok_or_else(|| TableError::MalformedRecords("expected an array of objects".into()))?;
    let first = rows
        .first()
        .and_then(Value::as_object)
        .ok_or(TableError::EmptyInput)?;
    let names: Vec<String> = first.keys().cloned().collect();
    let mut cells = vec![Vec::with_capacity(rows.len()); names.len()];
    for (i, row) in rows.iter().enumerate() {
        let obj = row
            .as_object()
            .ok_or_else(|| TableError::MalformedRecords(format!("record {i} is not an object")))?;
        if obj.len() != names.len() || !names.iter().all(|n| obj.contains_key(n)) {
            return Err(TableError::RaggedRow {
                line: i + 1,
                expected: names.len(),
                found: obj.len(),
            });
        }
        for (dst, name) in cells.iter_mut().zip(&names) {
            dst.push(match &obj[name] {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                other => other.to_string(),
            });
        }
    }
    build_table(names, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Cell, ColumnKind};

    #[test]
    fn minimal_numeric() {
        let t = parse_csv(b"a,b\n1,2\n3,4").unwrap();
        assert_eq!(t.row_count(), 2);
        let a = t.column("a").unwrap();
        assert_eq!(a.kind(), ColumnKind::Numeric);
        assert_eq!(a.numbers().unwrap(), &[Some(1.0), Some(3.0)]);
        assert_eq!(t.column("b").unwrap().numbers().unwrap(), &[Some(2.0), Some(4.0)]);
    }

    #[test]
    fn header_only() {
        let t = parse_csv(b"x\n").unwrap();
        assert_eq!(t.row_count(), 0);
        assert_eq!(t.columns().count(), 1);
        assert_eq!(t.column("x").unwrap().name(), "x");
    }

    #[test]
    fn mixed_column_is_categorical() {
        let t = parse_csv(b"v\n1\nfoo\n3\n").unwrap();
        let v = t.column("v").unwrap();
        assert_eq!(v.kind(), ColumnKind::Categorical);
        assert_eq!(v.cell(0), Cell::Label("1"));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_csv(b"").unwrap_err(), TableError::EmptyInput);
        assert_eq!(parse_csv(b"\n\n").unwrap_err(), TableError::EmptyInput);
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse_csv(b"a,b\n1,2\n3\n").unwrap_err();
        assert_eq!(
            err,
            TableError::RaggedRow {
                line: 3,
                expected: 2,
                found: 1
            }
        );
        // A quoted newline advances the physical line count.
        let err = parse_csv(b"a,b\n\"x\ny\",2\n3\n").unwrap_err();
        assert!(matches!(err, TableError::RaggedRow { line: 4, .. }));
    }

    #[test]
    fn encoding_error() {
        assert_eq!(
            parse_csv(b"a\n\xff\n").unwrap_err(),
            TableError::EncodingError { offset: 2 }
        );
    }

    #[test]
    fn missing_tokens() {
        let t = parse_csv(b"a\n1\nNA\nnan\n\n \n2\n").unwrap();
        // The bare empty line is skipped; " " is kept as a missing cell.
        assert_eq!(
            t.column("a").unwrap().numbers().unwrap(),
            &[Some(1.0), None, None, None, Some(2.0)]
        );
    }

    #[test]
    fn quoting_and_crlf() {
        let t = parse_csv(b"name,note\r\n\"a,b\",\"say \"\"hi\"\"\"\r\nc,d\r\n").unwrap();
        let name = t.column("name").unwrap();
        assert_eq!(name.cell(0), Cell::Label("a,b"));
        assert_eq!(t.column("note").unwrap().cell(0), Cell::Label("say \"hi\""));
    }

    #[test]
    fn malformed_quotes() {
        assert!(matches!(parse_csv(b"a\n\"open\n"), Err(TableError::MalformedQuote { .. })));
        assert!(matches!(parse_csv(b"a\n\"x\"y\n"), Err(TableError::MalformedQuote { .. })));
        assert!(matches!(parse_csv(b"a\nx\"y\n"), Err(TableError::MalformedQuote { .. })));
    }

    #[test]
    fn header_validation() {
        assert!(matches!(parse_csv(b"a,\n1,2\n"), Err(TableError::InvalidHeader { index: 1, .. })));
        assert!(matches!(parse_csv(b"a,a\n1,2\n"), Err(TableError::InvalidHeader { index: 1, .. })));
    }

    #[test]
    fn decimal_grammar() {
        for ok in ["1", "-2.5", "+.5", "5.", "1e3", "1.5E-2", " 7 "] {
            assert!(parse_decimal(ok).is_some(), "{ok}");
        }
        for bad in ["", ".", "e5", "1e", "inf", "NaN", "0x10", "1,0", "1e999", "--1"] {
            assert!(parse_decimal(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn text_when_many_distinct_values() {
        let mut raw = String::from("s\n");
        for i in 0..30 {
            raw.push_str(&format!("v{i}\n"));
        }
        let t = parse_csv(raw.as_bytes()).unwrap();
        assert_eq!(t.column("s").unwrap().kind(), ColumnKind::Text);
    }

    #[test]
    fn debug_json_is_column_major() {
        let t = parse_csv(b"a,b\n1,x\n,y\n").unwrap();
        let j = to_debug_json(&t);
        assert_eq!(j, serde_json::json!({"a": [1.0, null], "b": ["x", "y"]}));
    }

    #[cfg(feature = "extended-formats")]
    #[test]
    fn json_records() {
        let t = parse_json_records(br#"[{"a":1,"b":"x"},{"a":null,"b":"y"}]"#).unwrap();
        assert_eq!(t.column("a").unwrap().numbers().unwrap(), &[Some(1.0), None]);
        assert!(matches!(
            parse_json_records(br#"[{"a":1},{"b":2}]"#),
            Err(TableError::RaggedRow { line: 2, .. })
        ));
    }
}
