use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cdsalign::seqmodel::Dataset;
use cdsalign::spliced::{parse_alignment_tsv, SplicedAlignment};
use cdsalign::Error as CoreError;

/// Marks a failure caused by the user's inputs.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// 1 for internal failures, 2 for bad inputs.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<InputError>() {
            return 2;
        }
        if let Some(c) = cause.downcast_ref::<CoreError>() {
            return match c {
                CoreError::Internal(_) | CoreError::RoundTrip(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())).into())
}

/// Adds the file name to a core parse error without losing its type.
pub fn in_file<T>(r: cdsalign::Result<T>, path: &Path) -> Result<T> {
    r.with_context(|| format!("in {}", path.display()))
}

pub fn load_dataset(genes: &Path, annotation: &Path) -> Result<Dataset> {
    let fasta = read_text(genes)?;
    let ann = read_text(annotation)?;
    in_file(Dataset::from_text(&fasta, &ann), annotation)
}

/// `*.tsv` files of the given paths, directories expanded, in name order.
pub fn alignment_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| InputError(format!("cannot list {}: {e}", p.display())))?
                .filter_map(|d| d.ok().map(|d| d.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "tsv"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_alignments(paths: &[PathBuf]) -> Result<Vec<SplicedAlignment>> {
    let mut out = Vec::new();
    for f in alignment_files(paths)? {
        let text = read_text(&f)?;
        out.extend(in_file(parse_alignment_tsv(&text), &f)?);
    }
    Ok(out)
}

pub fn alignment_file_name(cds_id: &str, gene_id: &str) -> String {
    format!("{cds_id}__{gene_id}.tsv")
}

/// Writes to `path`, or to standard output when `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
