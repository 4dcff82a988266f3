use alloc::string::String;

use serde::{Deserialize, Serialize};

const DIAGNOSIS: &str = "DIAGNOSIS:";
const CORRECTION: &str = "CORRECTION:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reflection {
    pub diagnosis: String,
    pub correction: String,
}

/// Splits Debugger output at the first `DIAGNOSIS:` and first
/// `CORRECTION:` marker, in whichever order they occur.
///
/// Without a usable correction the whole trimmed text becomes the
/// correction, so a malformed reply still feeds the next attempt.
pub fn parse_reflection(text: &str) -> Reflection {
    let d = text.find(DIAGNOSIS);
    let c = text.find(CORRECTION);
    let after = |at: usize, marker: &str| at + marker.len();
    let (diagnosis, correction) = match (d, c) {
        (Some(d), Some(c)) if d < c => (&text[after(d, DIAGNOSIS)..c], &text[after(c, CORRECTION)..]),
        (Some(d), Some(c)) => (&text[after(d, DIAGNOSIS)..], &text[after(c, CORRECTION)..d]),
        (None, Some(c)) => ("", &text[after(c, CORRECTION)..]),
        (Some(d), None) => (&text[after(d, DIAGNOSIS)..], ""),
        (None, None) => ("", ""),
    };
    let correction = match correction.trim() {
        "" => text.trim(),
        c => c,
    };
    Reflection { diagnosis: String::from(diagnosis.trim()), correction: String::from(correction) }
}
