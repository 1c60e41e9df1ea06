//! File loading, corpus discovery and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::timeline::{load_chart, load_jams, Timeline};
use crate::{Error, Result};

const JAMS_SUFFIX: &str = ".jams.json";
const CHART_SUFFIX: &str = ".chart";

fn file_name(path: &Path) -> &str {
    path.file_name().and_then(|n| n.to_str()).unwrap_or("")
}

pub fn is_corpus_file(path: &Path) -> bool {
    let name = file_name(path);
    name.ends_with(JAMS_SUFFIX) || name.ends_with(CHART_SUFFIX)
}

/// File name without the `.jams.json`, `.json` or `.chart` suffix.
pub fn piece_stem(path: &Path) -> String {
    let name = file_name(path);
    [JAMS_SUFFIX, ".jams", ".json", CHART_SUFFIX]
        .iter()
        .find_map(|s| name.strip_suffix(s))
        .unwrap_or(name)
        .to_string()
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Loads a `.chart` file or a JAMS file (anything ending in `.json` or
/// `.jams`). A piece without an id takes its file stem.
pub fn load_timeline(path: &Path) -> Result<Timeline> {
    let name = file_name(path);
    let parsed = if name.ends_with(CHART_SUFFIX) {
        std::fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|t| load_chart(&t))
    } else if name.ends_with(".json") || name.ends_with(".jams") {
        std::fs::read(path).map_err(Error::from).and_then(|b| load_jams(&b))
    } else {
        Err(Error::InvalidParameter(
            "unrecognised file type (expected .chart, .jams or .json)".into(),
        ))
    };
    let mut tl = with_path(path, parsed)?;
    if tl.id.is_empty() {
        tl.id = piece_stem(path);
    }
    Ok(tl)
}

/// Corpus files under `dir`, recursively, sorted by path.
pub fn discover_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| Error::File {
            path: e.path().unwrap_or(dir).to_path_buf(),
            source: Box::new(Error::Io(e.into())),
        })?;
        if entry.file_type().is_file() && is_corpus_file(entry.path()) {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

pub fn load_corpus(dir: &Path) -> Result<Vec<Timeline>> {
    if !dir.is_dir() {
        return with_path(dir, Err(Error::InvalidParameter("not a directory".into())));
    }
    let files = discover_corpus(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let corpus: Vec<Timeline> = files.iter().map(|f| load_timeline(f)).collect::<Result<_>>()?;
    log::info!("loaded {} pieces from {}", corpus.len(), dir.display());
    Ok(corpus)
}

/// Writes via a temporary file in the target directory and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
