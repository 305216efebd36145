//! Plain-text rendering of JSON reports for `--pretty`.

use serde_json::Value;

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    block(value, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6}")
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string(),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn scalars(items: &[Value]) -> Option<Vec<String>> {
    items.iter().map(scalar).collect()
}

fn push_line(out: &mut String, indent: usize, text: &str) {
    out.push_str(&" ".repeat(indent));
    out.push_str(text);
    out.push('\n');
}

fn block(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, v) in map {
                if let Some(s) = scalar(v) {
                    push_line(out, indent, &format!("{k:<width$}  {s}"));
                } else if let Some(items) = v.as_array().and_then(|a| scalars(a)) {
                    push_line(out, indent, &format!("{k:<width$}  {}", items.join(", ")));
                } else {
                    push_line(out, indent, &format!("{k}:"));
                    block(v, indent + 2, out);
                }
            }
        }
        Value::Array(items) => {
            if let Some(rows) = items
                .iter()
                .map(|r| r.as_array().and_then(|a| scalars(a)))
                .collect::<Option<Vec<_>>>()
            {
                table(None, &rows, indent, out);
            } else if let Some(rows) = flat_objects(items) {
                table(Some(&rows.0), &rows.1, indent, out);
            } else {
                for (i, item) in items.iter().enumerate() {
                    push_line(out, indent, &format!("[{i}]"));
                    block(item, indent + 2, out);
                }
            }
        }
        other => push_line(out, indent, &scalar(other).unwrap_or_default()),
    }
}

/// Arrays of objects whose values are all scalars share one header.
fn flat_objects(items: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = items.first()?.as_object()?;
    let header: Vec<String> = first.keys().cloned().collect();
    let rows = items
        .iter()
        .map(|item| {
            let obj = item.as_object()?;
            if obj.len() != header.len() {
                return None;
            }
            header
                .iter()
                .map(|h| obj.get(h).and_then(scalar))
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((header, rows))
}

fn table(header: Option<&[String]>, rows: &[Vec<String>], indent: usize, out: &mut String) {
    let cols = header.map_or_else(|| rows.iter().map(Vec::len).max().unwrap_or(0), <[String]>::len);
    let mut width = vec![0; cols];
    for row in header.into_iter().map(<[String]>::to_vec).chain(rows.iter().cloned()) {
        for (c, cell) in row.iter().enumerate() {
            width[c] = width[c].max(cell.len());
        }
    }
    let line = |row: &[String]| {
        row.iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:>w$}", w = width[c]))
            .collect::<Vec<_>>()
            .join("  ")
    };
    if let Some(h) = header {
        push_line(out, indent, &line(h));
    }
    for row in rows {
        push_line(out, indent, &line(row));
    }
}
