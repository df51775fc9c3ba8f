use super::{parse_flow, Flow, ParseError};

/// Pulls a flow out of free-form model output.
///
/// Markdown code fences are searched first; the first balanced top-level
/// JSON object found is handed to [`parse_flow`].
pub fn extract_flow_from_model_output(text: &str) -> Result<Flow, ParseError> {
    let object = fenced_blocks(text)
        .find_map(find_json_object)
        .or_else(|| find_json_object(text))
        .ok_or(ParseError::NoJsonFound)?;
    parse_flow(object)
}

/// Returns the first balanced `{...}` span that is valid JSON, falling back
/// to the first balanced span at all.
pub fn find_json_object(text: &str) -> Option<&str> {
    let mut first_balanced = None;
    for (start, _) in text.match_indices('{') {
        if let Some(end) = balanced_end(&text[start..]) {
            let candidate = &text[start..start + end];
            if serde_json::from_str::<serde_json::Value>(candidate).is_ok() {
                return Some(candidate);
            }
            first_balanced.get_or_insert(candidate);
        }
    }
    first_balanced
}

/// Byte length of the object starting at `s[0] == '{'`, if it closes.
fn balanced_end(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn fenced_blocks(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        let open = rest.find("```")?;
        let after = &rest[open + 3..];
        // skip the info string (e.g. `json`) up to the end of the line
        let body_start = after.find('\n').map(|n| n + 1).unwrap_or(after.len());
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                rest = &body[close + 3..];
                Some(&body[..close])
            }
            None => {
                rest = "";
                Some(body)
            }
        }
    })
}
