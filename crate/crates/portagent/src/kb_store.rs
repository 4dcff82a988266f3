//! Knowledge-base directories: `primitives/*.md` with a front-matter header
//! and `exemplars/*.json`, one file per entry.

use std::fs;
use std::path::{Path, PathBuf};

use portagent_core::knowledge::{Exemplar, KnowledgeBase, KnowledgeError, Primitive, PrimitiveCategory};
use thiserror::Error;

use crate::io::{self, IoError};

#[derive(Debug, Error)]
pub enum KbError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("knowledge base directory {0} does not exist")]
    Missing(PathBuf),
    #[error("{path}: {message}")]
    Primitive { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Validation { path: PathBuf, source: KnowledgeError },
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error("exemplar file {0} already exists")]
    Exists(PathBuf),
}

/// Parses a primitive document: `---`, `key: value` lines for id, category
/// and title, `---`, then the body.
pub fn parse_primitive(text: &str) -> Result<Primitive, String> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some("---") {
        return Err("missing front matter".into());
    }
    let (mut id, mut category, mut title) = (None, None, None);
    let mut closed = false;
    for line in lines.by_ref() {
        if line.trim_end() == "---" {
            closed = true;
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| format!("bad front-matter line {line:?}"))?;
        let value = value.trim().to_owned();
        match key.trim() {
            "id" => id = Some(value),
            "category" => {
                category = Some(PrimitiveCategory::parse(&value).ok_or_else(|| format!("unknown category {value:?}"))?)
            }
            "title" => title = Some(value),
            other => return Err(format!("unknown front-matter key {other:?}")),
        }
    }
    if !closed {
        return Err("unterminated front matter".into());
    }
    let body: Vec<&str> = lines.collect();
    Ok(Primitive {
        id: id.filter(|s| !s.is_empty()).ok_or("missing id")?,
        category: category.ok_or("missing category")?,
        title: title.ok_or("missing title")?,
        body: body.join("\n").trim().to_owned(),
    })
}

pub fn render_primitive(p: &Primitive) -> String {
    format!("---\nid: {}\ncategory: {}\ntitle: {}\n---\n{}\n", p.id, p.category, p.title, p.body)
}

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, IoError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let read = |source| IoError::Read { path: dir.to_owned(), source };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(read)? {
        let path = entry.map_err(read)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Loads and validates every entry. An existing but empty directory is an
/// empty base.
pub fn load(dir: &Path) -> Result<KnowledgeBase, KbError> {
    if !dir.is_dir() {
        return Err(KbError::Missing(dir.to_owned()));
    }
    let mut primitives = Vec::new();
    for path in files_with_ext(&dir.join("primitives"), "md")? {
        let text = io::read_text(&path)?;
        let p = parse_primitive(&text).map_err(|message| KbError::Primitive { path: path.clone(), message })?;
        primitives.push(p);
    }
    let mut exemplars = Vec::new();
    for path in files_with_ext(&dir.join("exemplars"), "json")? {
        let e: Exemplar = io::read_json(&path)?;
        e.validate().map_err(|source| KbError::Validation { path: path.clone(), source })?;
        exemplars.push(e);
    }
    Ok(KnowledgeBase::new(primitives, exemplars)?)
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect()
}

/// Writes one exemplar file; refuses to overwrite.
pub fn save_exemplar(dir: &Path, exemplar: &Exemplar) -> Result<PathBuf, KbError> {
    let path = dir.join("exemplars").join(format!("{}.json", file_stem(&exemplar.id)));
    if path.exists() {
        return Err(KbError::Exists(path));
    }
    io::write_json(&path, exemplar)?;
    Ok(path)
}

/// Validates `exemplar` against the base in `dir` and persists it.
pub fn add(dir: &Path, exemplar: Exemplar) -> Result<PathBuf, KbError> {
    let mut kb = load(dir)?;
    kb.add_exemplar(exemplar.clone())?;
    save_exemplar(dir, &exemplar)
}

const SEED_PRIMITIVES: [&str; 6] = [
    include_str!("../kb/seed/primitives/edge-removal.md"),
    include_str!("../kb/seed/primitives/flow-balance.md"),
    include_str!("../kb/seed/primitives/flow-variables.md"),
    include_str!("../kb/seed/primitives/path-requirements.md"),
    include_str!("../kb/seed/primitives/total-travel-time.md"),
    include_str!("../kb/seed/primitives/vehicle-forbidden-edge.md"),
];
const SEED_EXEMPLARS: [&str; 1] = [include_str!("../kb/seed/exemplars/classic.json")];

/// The shipped seed base, compiled in: every primitive and the classic
/// exemplar.
pub fn seed() -> KnowledgeBase {
    let primitives = SEED_PRIMITIVES.iter().map(|t| parse_primitive(t).expect("seed primitive parses")).collect();
    let exemplars = SEED_EXEMPLARS.iter().map(|t| serde_json::from_str(t).expect("seed exemplar parses")).collect();
    KnowledgeBase::new(primitives, exemplars).expect("seed base validates")
}
