use std::collections::HashSet;
use std::fmt::Write as _;

use ndarray::Array2;

use super::{AttributeKind, AttributeSpec, DatasetError, LabeledDataset, MISSING};

/// Parses a multi-label ARFF document.
///
/// The relation name must carry `-C L`: for `L > 0` the first `L` attributes
/// are labels, for `L < 0` the last `|L|`. Label attributes must be nominal
/// with exactly the categories `0` and `1`. Dense and sparse rows may be mixed;
/// unlisted sparse entries take value index 0.
pub fn parse_arff(text: &str) -> Result<LabeledDataset, DatasetError> {
    let mut relation: Option<(String, i64)> = None;
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    let mut rows: Vec<(usize, Vec<Option<String>>)> = Vec::new();
    let mut in_data = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            rows.push((line_no, parse_row(line, attributes.len(), line_no)?));
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            let rest = line["@relation".len()..].trim();
            let (name, _) = take_token(rest).ok_or(DatasetError::MalformedHeader {
                line: line_no,
                reason: "missing relation name".into(),
            })?;
            relation = Some(split_relation_name(&name)?);
        } else if lower.starts_with("@attribute") {
            attributes.push(parse_attribute(line["@attribute".len()..].trim(), line_no)?);
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(DatasetError::MalformedHeader {
                line: line_no,
                reason: format!("unexpected header line `{line}`"),
            });
        }
    }

    let (relation_name, label_option) = relation.ok_or(DatasetError::MissingLabelCount)?;
    let mut seen = HashSet::new();
    for a in &attributes {
        if !seen.insert(a.name.as_str()) {
            return Err(DatasetError::DuplicateAttribute(a.name.clone()));
        }
    }
    let total = attributes.len();
    let m = label_option.unsigned_abs() as usize;
    if label_option == 0 || m > total {
        return Err(DatasetError::LabelCountOutOfRange {
            requested: label_option,
            attributes: total,
        });
    }
    let label_range = if label_option > 0 { 0..m } else { total - m..total };
    let label_positive: Vec<usize> = label_range
        .clone()
        .map(|j| match &attributes[j].kind {
            AttributeKind::Nominal(cats) if is_binary_categories(cats) => {
                Ok(cats.iter().position(|c| c == "1").unwrap())
            }
            _ => Err(DatasetError::NonBinaryLabel(attributes[j].name.clone())),
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }

    let feature_cols: Vec<usize> = (0..total).filter(|j| !label_range.contains(j)).collect();
    let n = rows.len();
    let mut features = Array2::from_elem((n, feature_cols.len()), 0.0);
    let mut labels = Array2::zeros((n, m));
    for (i, (line_no, values)) in rows.iter().enumerate() {
        for (k, j) in label_range.clone().enumerate() {
            let attr = &attributes[j];
            let idx = match values[j].as_deref() {
                None => 0,
                Some("?") => {
                    return Err(DatasetError::MalformedRow {
                        line: *line_no,
                        reason: format!("label `{}` is missing", attr.name),
                    })
                }
                Some(v) => category_index(attr, v, *line_no)?,
            };
            labels[[i, k]] = u8::from(idx == label_positive[k]);
        }
        for (c, &j) in feature_cols.iter().enumerate() {
            features[[i, c]] = convert_value(&attributes[j], values[j].as_deref(), *line_no)?;
        }
    }

    Ok(LabeledDataset {
        relation_name,
        label_names: label_range.map(|j| attributes[j].name.clone()).collect(),
        attributes: feature_cols.iter().map(|&j| attributes[j].clone()).collect(),
        features,
        labels,
    })
}

/// Writes `data` as dense ARFF with the labels first (`-C m`).
pub fn write_arff(data: &LabeledDataset) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "@relation {}\n",
        quote(&format!("{}: -C {}", data.relation_name, data.n_labels()))
    );
    for name in &data.label_names {
        let _ = writeln!(out, "@attribute {} {{0,1}}", quote(name));
    }
    for attr in &data.attributes {
        match &attr.kind {
            AttributeKind::Numeric => {
                let _ = writeln!(out, "@attribute {} numeric", quote(&attr.name));
            }
            AttributeKind::Nominal(cats) => {
                let cats: Vec<String> = cats.iter().map(|c| quote(c)).collect();
                let _ = writeln!(out, "@attribute {} {{{}}}", quote(&attr.name), cats.join(","));
            }
        }
    }
    out.push_str("\n@data\n");
    for i in 0..data.n_instances() {
        let mut fields: Vec<String> = data.labels.row(i).iter().map(|b| b.to_string()).collect();
        for (j, attr) in data.attributes.iter().enumerate() {
            let v = data.features[[i, j]];
            fields.push(if v.is_nan() {
                "?".to_string()
            } else {
                match &attr.kind {
                    AttributeKind::Numeric => format!("{v}"),
                    AttributeKind::Nominal(cats) => quote(&cats[v as usize]),
                }
            });
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn is_binary_categories(cats: &[String]) -> bool {
    cats.len() == 2 && cats.iter().any(|c| c == "0") && cats.iter().any(|c| c == "1")
}

fn category_index(attr: &AttributeSpec, value: &str, line: usize) -> Result<usize, DatasetError> {
    match &attr.kind {
        AttributeKind::Nominal(cats) => {
            cats.iter()
                .position(|c| c == value)
                .ok_or_else(|| DatasetError::UnknownCategory {
                    line,
                    attribute: attr.name.clone(),
                    value: value.to_string(),
                })
        }
        AttributeKind::Numeric => unreachable!("labels are nominal"),
    }
}

fn convert_value(attr: &AttributeSpec, value: Option<&str>, line: usize) -> Result<f64, DatasetError> {
    match (value, &attr.kind) {
        (None, _) => Ok(0.0),
        (Some("?"), _) => Ok(MISSING),
        (Some(v), AttributeKind::Numeric) => v.parse::<f64>().map_err(|_| DatasetError::MalformedRow {
            line,
            reason: format!("`{v}` is not numeric for `{}`", attr.name),
        }),
        (Some(v), AttributeKind::Nominal(_)) => category_index(attr, v, line).map(|i| i as f64),
    }
}

/// Splits MEKA-style relation names like `'scene: -C 6 -split 0'` into the
/// base name and the label count.
fn split_relation_name(name: &str) -> Result<(String, i64), DatasetError> {
    let tokens: Vec<&str> = name.split_whitespace().collect();
    let pos = tokens
        .iter()
        .position(|t| *t == "-C")
        .ok_or(DatasetError::MissingLabelCount)?;
    let count = tokens
        .get(pos + 1)
        .and_then(|t| t.parse::<i64>().ok())
        .ok_or(DatasetError::MissingLabelCount)?;
    let base = match name.find(':') {
        Some(colon) => &name[..colon],
        None => name.split(" -C").next().unwrap_or(name),
    };
    Ok((base.trim().to_string(), count))
}

fn parse_attribute(rest: &str, line: usize) -> Result<AttributeSpec, DatasetError> {
    let (name, remainder) = take_token(rest).ok_or(DatasetError::MalformedHeader {
        line,
        reason: "attribute without name".into(),
    })?;
    let ty = remainder.trim();
    if ty.starts_with('{') {
        let inner = ty
            .strip_prefix('{')
            .and_then(|s| s.trim_end().strip_suffix('}'))
            .ok_or(DatasetError::MalformedHeader {
                line,
                reason: format!("unterminated category list for `{name}`"),
            })?;
        let cats = split_fields(inner, line)?;
        let mut uniq = HashSet::new();
        if cats.is_empty() || !cats.iter().all(|c| uniq.insert(c.clone())) {
            return Err(DatasetError::MalformedHeader {
                line,
                reason: format!("category list of `{name}` is empty or repeats a value"),
            });
        }
        return Ok(AttributeSpec {
            name,
            kind: AttributeKind::Nominal(cats),
        });
    }
    match ty.to_ascii_lowercase().split_whitespace().next() {
        Some("numeric" | "real" | "integer") => Ok(AttributeSpec {
            name,
            kind: AttributeKind::Numeric,
        }),
        Some(other) => Err(DatasetError::UnsupportedAttributeType {
            name,
            kind: other.to_string(),
        }),
        None => Err(DatasetError::MalformedHeader {
            line,
            reason: format!("attribute `{name}` has no type"),
        }),
    }
}

fn parse_row(line: &str, arity: usize, line_no: usize) -> Result<Vec<Option<String>>, DatasetError> {
    let malformed = |reason: String| DatasetError::MalformedRow { line: line_no, reason };
    if let Some(body) = line.strip_prefix('{') {
        let body = body
            .trim_end()
            .strip_suffix('}')
            .ok_or_else(|| malformed("unterminated sparse row".into()))?;
        let mut values = vec![None; arity];
        for entry in split_fields(body, line_no)? {
            let (idx, value) = take_token(&entry).ok_or_else(|| malformed("empty sparse entry".into()))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| malformed(format!("bad sparse index `{idx}`")))?;
            if idx >= arity {
                return Err(malformed(format!("sparse index {idx} beyond {arity} attributes")));
            }
            let (value, _) = take_token(value.trim()).ok_or_else(|| malformed(format!("no value at index {idx}")))?;
            values[idx] = Some(value);
        }
        Ok(values)
    } else {
        let fields = split_fields(line, line_no)?;
        if fields.len() != arity {
            return Err(malformed(format!("{} values for {arity} attributes", fields.len())));
        }
        Ok(fields.into_iter().map(Some).collect())
    }
}

/// Splits on commas outside quotes; fields are trimmed and unquoted.
fn split_fields(s: &str, line: usize) -> Result<Vec<String>, DatasetError> {
    let mut fields = Vec::new();
    let mut rest = s.trim();
    if rest.is_empty() {
        return Ok(fields);
    }
    loop {
        let (field, after) = if rest.starts_with('\'') || rest.starts_with('"') {
            let (tok, after) = take_token(rest).ok_or(DatasetError::MalformedRow {
                line,
                reason: "unterminated quote".into(),
            })?;
            (tok, after.trim_start())
        } else {
            match rest.find(',') {
                Some(p) => (rest[..p].trim().to_string(), &rest[p..]),
                None => (rest.trim().to_string(), ""),
            }
        };
        fields.push(field);
        if after.is_empty() {
            return Ok(fields);
        }
        rest = after
            .strip_prefix(',')
            .ok_or(DatasetError::MalformedRow {
                line,
                reason: format!("expected `,` before `{after}`"),
            })?
            .trim_start();
    }
}

/// Takes one whitespace-delimited or quoted token, returning it unquoted
/// together with the remaining text.
fn take_token(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let first = s.chars().next()?;
    if first == '\'' || first == '"' {
        let mut out = String::new();
        let mut escaped = false;
        for (i, ch) in s[1..].char_indices() {
            if escaped {
                out.push(ch);
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == first {
                return Some((out, &s[1 + i + 1..]));
            } else {
                out.push(ch);
            }
        }
        None
    } else {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        Some((s[..end].to_string(), &s[end..]))
    }
}

fn quote(s: &str) -> String {
    let plain = !s.is_empty()
        && s != "?"
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LABELS_FIRST: &str = "% toy\n@relation 'toy: -C 2'\n@attribute y1 {0,1}\n@attribute y2 {0,1}\n@attribute x numeric\n@data\n1,0,3.5\n";
    const LABELS_LAST: &str = "@relation 'toy: -C -2'\n@attribute x numeric\n@attribute y1 {0,1}\n@attribute y2 {0,1}\n@data\n3.5,1,0\n";

    #[test]
    fn labels_first() {
        let d = parse_arff(LABELS_FIRST).unwrap();
        assert_eq!(d.relation_name, "toy");
        assert_eq!(d.n_labels(), 2);
        assert_eq!(d.attributes.len(), 1);
        assert_eq!(d.labels.row(0).to_vec(), vec![1, 0]);
        assert_eq!(d.features[[0, 0]], 3.5);
    }

    #[test]
    fn negative_count_means_labels_last() {
        assert_eq!(parse_arff(LABELS_LAST).unwrap(), parse_arff(LABELS_FIRST).unwrap());
    }

    #[test]
    fn sparse_row_matches_dense_rewrite() {
        let sparse = LABELS_FIRST.replace("1,0,3.5", "{0 1, 2 3.5}\n{1 1}");
        let dense = LABELS_FIRST.replace("1,0,3.5", "1,0,3.5\n0,1,0");
        let d = parse_arff(&sparse).unwrap();
        assert_eq!(d, parse_arff(&dense).unwrap());
        assert_eq!(d.labels.row(0).to_vec(), vec![1, 0]);
        assert_eq!(d.features[[0, 0]], 3.5);
    }

    #[test]
    fn error_paths() {
        let no_c = LABELS_FIRST.replace("'toy: -C 2'", "toy");
        assert_eq!(parse_arff(&no_c), Err(DatasetError::MissingLabelCount));

        let numeric_label = LABELS_FIRST.replace("@attribute y2 {0,1}", "@attribute y2 numeric");
        assert_eq!(parse_arff(&numeric_label), Err(DatasetError::NonBinaryLabel("y2".into())));

        let tri_label = LABELS_FIRST.replace("@attribute y2 {0,1}", "@attribute y2 {0,1,2}");
        assert_eq!(parse_arff(&tri_label), Err(DatasetError::NonBinaryLabel("y2".into())));

        let short = LABELS_FIRST.replace("1,0,3.5", "1,0");
        assert!(matches!(parse_arff(&short), Err(DatasetError::MalformedRow { line: 7, .. })));

        let unknown = LABELS_FIRST.replace("1,0,3.5", "1,5,3.5");
        assert!(matches!(parse_arff(&unknown), Err(DatasetError::UnknownCategory { .. })));

        let string_attr = LABELS_FIRST.replace("x numeric", "x string");
        assert!(matches!(
            parse_arff(&string_attr),
            Err(DatasetError::UnsupportedAttributeType { .. })
        ));

        let too_many = LABELS_FIRST.replace("-C 2", "-C 4");
        assert!(matches!(
            parse_arff(&too_many),
            Err(DatasetError::LabelCountOutOfRange { .. })
        ));
    }

    #[test]
    fn quoted_names_and_missing_values() {
        let text = "@relation \"odd name: -C 1 -split 3\"\n\
                    @attribute 'lab el' {1,0}\n\
                    @attribute colour {'dark red',blue}\n\
                    @attribute 'x,y' real\n\
                    @data\n\
                    1,'dark red',?\n\
                    0,?,2\n";
        let d = parse_arff(text).unwrap();
        assert_eq!(d.relation_name, "odd name");
        assert_eq!(d.label_names, vec!["lab el"]);
        assert_eq!(d.labels.column(0).to_vec(), vec![1, 0]);
        assert_eq!(d.features[[0, 0]], 0.0);
        assert!(d.features[[0, 1]].is_nan());
        assert!(d.features[[1, 0]].is_nan());
        let back = parse_arff(&write_arff(&d)).unwrap();
        assert_eq!(back, d);
    }
}
