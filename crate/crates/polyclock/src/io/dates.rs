//! Tip-date tables: two whitespace- or tab-delimited columns, name then
//! decimal calendar year. Lines starting with '#' are comments.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parse a tip-date table. Duplicate names are an error.
pub fn parse_date_table(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let name = fields.next().unwrap().to_string();
        let value = fields.next().ok_or_else(|| Error::DateTable {
            line: line_no,
            message: format!("missing date for '{name}'"),
        })?;
        let date: f64 = value.parse().map_err(|_| Error::DateTable {
            line: line_no,
            message: format!("invalid decimal year '{value}'"),
        })?;
        if !date.is_finite() {
            return Err(Error::DateTable {
                line: line_no,
                message: format!("non-finite date {date}"),
            });
        }
        if map.insert(name.clone(), date).is_some() {
            return Err(Error::DateTable {
                line: line_no,
                message: format!("duplicate name '{name}'"),
            });
        }
    }
    if map.is_empty() {
        return Err(Error::DateTable {
            line: 1,
            message: "no dates found".into(),
        });
    }
    Ok(map)
}

/// Write a tip-date table, one `name<TAB>decimal_year` row per entry.
pub fn write_date_table(dates: &BTreeMap<String, f64>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    for (name, date) in dates {
        out.push_str(&format!("{name}\t{date}\n"));
    }
    out
}
