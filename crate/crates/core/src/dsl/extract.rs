use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub const FENCE_TAG: &str = "vds-dsl";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no fenced ```vds-dsl block found in model output")]
pub struct ExtractionError;

/// Returns the body of the last complete fenced block tagged `vds-dsl`.
pub fn extract_dsl_block(llm_text: &str) -> Result<String, ExtractionError> {
    let mut last: Option<Vec<&str>> = None;
    let mut open: Option<Vec<&str>> = None;
    for line in llm_text.lines() {
        let trimmed = line.trim();
        match open.as_mut() {
            Some(body) => {
                if trimmed == "```" {
                    last = open.take();
                } else {
                    body.push(line);
                }
            }
            None => {
                if let Some(tag) = trimmed.strip_prefix("```") {
                    if tag.trim() == FENCE_TAG {
                        open = Some(Vec::new());
                    }
                }
            }
        }
    }
    last.map(|body| {
        let mut out = body.join("\n");
        out.push('\n');
        out
    })
    .ok_or(ExtractionError)
}
