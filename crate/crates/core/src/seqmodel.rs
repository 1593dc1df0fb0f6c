//! Genes, exons, CDS and their sequences.
//!
//! All coordinates are 1-based and inclusive, as in an `(a, b)` exon of a
//! gene. Kernels convert to 0-based slices internally.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// A gene sequence over `A`, `C`, `G`, `T` (and `N`), sense orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gene {
    pub id: String,
    pub seq: Vec<u8>,
}

impl Gene {
    pub fn new(id: impl Into<String>, seq: impl AsRef<[u8]>) -> Result<Self> {
        let id = id.into();
        let seq = normalize(&id, seq.as_ref())?;
        Ok(Gene { id, seq })
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// `gene[a, b]`, 1-based inclusive. Panics when out of range.
    pub fn segment(&self, a: usize, b: usize) -> &[u8] {
        &self.seq[a - 1..b]
    }
}

/// A segment `(start, end)` of a sequence, 1-based inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exon {
    pub start: usize,
    pub end: usize,
}

impl Exon {
    pub const fn new(start: usize, end: usize) -> Self {
        Exon { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos <= self.end
    }
}

impl fmt::Display for Exon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.start, self.end)
    }
}

/// A CDS: an increasing chain of non-overlapping exons of one gene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cds {
    pub id: String,
    pub gene_id: String,
    pub exons: Vec<Exon>,
}

impl Cds {
    /// Builds a CDS, sorting exons by start and checking the chain condition.
    pub fn new(id: impl Into<String>, gene_id: impl Into<String>, mut exons: Vec<Exon>) -> Result<Self> {
        let id = id.into();
        exons.sort();
        let chained = exons.iter().all(|e| e.start >= 1 && e.start <= e.end)
            && exons.windows(2).all(|w| w[0].end < w[1].start);
        if exons.is_empty() || !chained {
            return Err(Error::ExonChain { cds: id });
        }
        Ok(Cds { id, gene_id: gene_id.into(), exons })
    }

    pub fn len(&self) -> usize {
        self.exons.iter().map(Exon::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.exons.is_empty()
    }

    /// `Intron(C)`: the `(b_i, a_{i+1})` junction pairs in gene coordinates.
    pub fn introns(&self) -> Vec<(usize, usize)> {
        self.exons.windows(2).map(|w| (w[0].end, w[1].start)).collect()
    }

    /// Checks that every exon lies inside `gene`.
    pub fn check_bounds(&self, gene: &Gene) -> Result<()> {
        for e in &self.exons {
            if e.end > gene.len() {
                return Err(Error::ExonOutOfRange {
                    cds: self.id.clone(),
                    gene: gene.id.clone(),
                    start: e.start,
                    end: e.end,
                    len: gene.len(),
                });
            }
        }
        Ok(())
    }
}

/// The spliced sequence of a CDS together with its exon structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdsSequence {
    pub cds_id: String,
    pub gene_id: String,
    pub seq: Vec<u8>,
    /// Exons in CDS coordinates; they tile `[1, len]` in order.
    pub cds_exons: Vec<Exon>,
    /// Introns of the source CDS in source-gene coordinates.
    pub source_introns: Vec<(usize, usize)>,
}

impl CdsSequence {
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn segment(&self, k: usize, l: usize) -> &[u8] {
        &self.seq[k - 1..l]
    }

    /// Index of the CDS exon containing CDS position `pos`.
    pub fn exon_index(&self, pos: usize) -> Option<usize> {
        let i = self.cds_exons.partition_point(|e| e.end < pos);
        (i < self.cds_exons.len() && self.cds_exons[i].contains(pos)).then_some(i)
    }

    pub fn is_exon_start(&self, pos: usize) -> bool {
        self.cds_exons.iter().any(|e| e.start == pos)
    }

    pub fn is_exon_end(&self, pos: usize) -> bool {
        self.cds_exons.iter().any(|e| e.end == pos)
    }
}

/// Builds `G_C` from a gene and one of its CDS.
pub fn cds_sequence(gene: &Gene, cds: &Cds) -> Result<CdsSequence> {
    if cds.gene_id != gene.id {
        return Err(Error::AlignmentMismatch { expected: gene.id.clone(), found: cds.gene_id.clone() });
    }
    cds.check_bounds(gene)?;
    let mut seq = Vec::with_capacity(cds.len());
    let mut cds_exons = Vec::with_capacity(cds.exons.len());
    for e in &cds.exons {
        let k = seq.len() + 1;
        seq.extend_from_slice(gene.segment(e.start, e.end));
        cds_exons.push(Exon::new(k, seq.len()));
    }
    Ok(CdsSequence {
        cds_id: cds.id.clone(),
        gene_id: gene.id.clone(),
        seq,
        cds_exons,
        source_introns: cds.introns(),
    })
}

/// `E(G)`: the union of the exons of every CDS of one gene.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneExonSet {
    pub gene_id: String,
    pub exons: BTreeSet<Exon>,
}

impl GeneExonSet {
    pub fn from_cds<'a>(gene_id: &str, cds: impl IntoIterator<Item = &'a Cds>) -> Self {
        let exons = cds
            .into_iter()
            .filter(|c| c.gene_id == gene_id)
            .flat_map(|c| c.exons.iter().copied())
            .collect();
        GeneExonSet { gene_id: gene_id.to_string(), exons }
    }

    pub fn contains(&self, e: Exon) -> bool {
        self.exons.contains(&e)
    }

    pub fn is_start(&self, pos: usize) -> bool {
        self.exons.iter().any(|e| e.start == pos)
    }

    pub fn is_end(&self, pos: usize) -> bool {
        self.exons.iter().any(|e| e.end == pos)
    }

    /// Distinct exon start positions, ascending.
    pub fn starts(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.exons.iter().map(|e| e.start).collect();
        s.into_iter().collect()
    }

    /// Distinct exon end positions, ascending.
    pub fn ends(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.exons.iter().map(|e| e.end).collect();
        s.into_iter().collect()
    }
}

/// Warnings for CDS that are not full coding sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdsDiagnostic {
    LengthNotMultipleOfThree,
    MissingStartCodon,
    MissingStopCodon,
}

impl fmt::Display for CdsDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CdsDiagnostic::LengthNotMultipleOfThree => "length not a multiple of 3",
            CdsDiagnostic::MissingStartCodon => "missing start codon ATG",
            CdsDiagnostic::MissingStopCodon => "missing stop codon",
        };
        f.write_str(s)
    }
}

pub fn validate_full_cds(cs: &CdsSequence) -> Vec<CdsDiagnostic> {
    let mut out = Vec::new();
    let s = &cs.seq;
    if s.len() % 3 != 0 {
        out.push(CdsDiagnostic::LengthNotMultipleOfThree);
    }
    if !s.starts_with(b"ATG") {
        out.push(CdsDiagnostic::MissingStartCodon);
    }
    let stop = s.len() >= 6 && [&b"TAA"[..], b"TAG", b"TGA"].iter().any(|c| s.ends_with(c));
    if !stop {
        out.push(CdsDiagnostic::MissingStopCodon);
    }
    out
}

fn normalize(id: &str, raw: &[u8]) -> Result<Vec<u8>> {
    raw.iter()
        .map(|&c| match c.to_ascii_uppercase() {
            b @ (b'A' | b'C' | b'G' | b'T' | b'N') => Ok(b),
            _ => Err(Error::InvalidBase { id: id.to_string(), ch: c as char }),
        })
        .collect()
}

/// Reads FASTA text into an ordered `id -> sequence` map.
///
/// Line wraps are joined and bases uppercased. The id is the first
/// whitespace-delimited token of the header.
pub fn parse_fasta(text: &str) -> Result<IndexMap<String, Vec<u8>>> {
    let mut records: IndexMap<String, Vec<u8>> = IndexMap::new();
    let mut current: Option<(String, Vec<u8>)> = None;

    let finish = |rec: Option<(String, Vec<u8>)>, records: &mut IndexMap<String, Vec<u8>>| -> Result<()> {
        if let Some((id, seq)) = rec {
            if seq.is_empty() {
                return Err(Error::EmptySequence(id));
            }
            if records.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            records.insert(id, seq);
        }
        Ok(())
    };

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            finish(current.take(), &mut records)?;
            let id = header.split_whitespace().next().unwrap_or("");
            if id.is_empty() {
                return Err(Error::Parse { line: lineno + 1, msg: "empty FASTA header".into() });
            }
            current = Some((id.to_string(), Vec::new()));
        } else if line.is_empty() {
            continue;
        } else {
            let Some((id, seq)) = current.as_mut() else {
                return Err(Error::Parse { line: lineno + 1, msg: "sequence data before first header".into() });
            };
            seq.extend(normalize(id, line.trim().as_bytes())?);
        }
    }
    finish(current.take(), &mut records)?;
    Ok(records)
}

pub fn genes_from_fasta(text: &str) -> Result<Vec<Gene>> {
    Ok(parse_fasta(text)?.into_iter().map(|(id, seq)| Gene { id, seq }).collect())
}

pub fn write_fasta(records: impl IntoIterator<Item = (impl AsRef<str>, impl AsRef<[u8]>)>, width: usize) -> String {
    let mut out = String::new();
    for (id, seq) in records {
        out.push('>');
        out.push_str(id.as_ref());
        out.push('\n');
        for chunk in seq.as_ref().chunks(width.max(1)) {
            out.push_str(std::str::from_utf8(chunk).expect("ascii sequence"));
            out.push('\n');
        }
    }
    out
}

/// Reads the exon annotation TSV: `gene_id  cds_id  start  end`, one exon per line.
///
/// CDS are returned in order of first appearance, exons sorted by start.
pub fn parse_annotation(text: &str) -> Result<Vec<Cds>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (String, Vec<Exon>)> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(err("expected 4 tab-separated fields"));
        }
        let start: usize = fields[2].trim().parse().map_err(|_| err("bad start"))?;
        let end: usize = fields[3].trim().parse().map_err(|_| err("bad end"))?;
        if start == 0 || end < start {
            return Err(err("exon must satisfy 1 <= start <= end"));
        }
        let (gene_id, cds_id) = (fields[0].to_string(), fields[1].to_string());
        match groups.get_mut(&cds_id) {
            Some((g, exons)) => {
                if *g != gene_id {
                    return Err(err("cds listed under two genes"));
                }
                exons.push(Exon::new(start, end));
            }
            None => {
                order.push(cds_id.clone());
                groups.insert(cds_id, (gene_id, vec![Exon::new(start, end)]));
            }
        }
    }
    order
        .into_iter()
        .map(|id| {
            let (gene, exons) = groups.remove(&id).expect("grouped");
            Cds::new(id, gene, exons)
        })
        .collect()
}

pub fn serialize_annotation(cds: &[Cds]) -> String {
    let mut out = String::new();
    for c in cds {
        for e in &c.exons {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", c.gene_id, c.id, e.start, e.end));
        }
    }
    out
}

/// Genes plus their CDS, with every cross reference checked.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub genes: IndexMap<String, Gene>,
    pub cds: Vec<Cds>,
}

impl Dataset {
    pub fn new(genes: Vec<Gene>, cds: Vec<Cds>) -> Result<Self> {
        let mut map = IndexMap::new();
        for g in genes {
            if g.is_empty() {
                return Err(Error::EmptySequence(g.id));
            }
            if map.contains_key(&g.id) {
                return Err(Error::DuplicateId(g.id));
            }
            map.insert(g.id.clone(), g);
        }
        let mut seen = BTreeSet::new();
        for c in &cds {
            if !seen.insert(c.id.clone()) || map.contains_key(&c.id) {
                return Err(Error::DuplicateId(c.id.clone()));
            }
            let g = map.get(&c.gene_id).ok_or_else(|| Error::UnknownGene(c.gene_id.clone()))?;
            c.check_bounds(g)?;
        }
        Ok(Dataset { genes: map, cds })
    }

    pub fn from_text(fasta: &str, annotation: &str) -> Result<Self> {
        Dataset::new(genes_from_fasta(fasta)?, parse_annotation(annotation)?)
    }

    pub fn gene(&self, id: &str) -> Result<&Gene> {
        self.genes.get(id).ok_or_else(|| Error::UnknownGene(id.to_string()))
    }

    pub fn cds_by_id(&self, id: &str) -> Option<&Cds> {
        self.cds.iter().find(|c| c.id == id)
    }

    pub fn cds_sequence(&self, cds: &Cds) -> Result<CdsSequence> {
        cds_sequence(self.gene(&cds.gene_id)?, cds)
    }

    pub fn exon_set(&self, gene_id: &str) -> GeneExonSet {
        GeneExonSet::from_cds(gene_id, &self.cds)
    }

    /// CDS sorted by id, for deterministic iteration.
    pub fn sorted_cds(&self) -> Vec<&Cds> {
        let mut v: Vec<&Cds> = self.cds.iter().collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Gene ids sorted lexicographically.
    pub fn sorted_gene_ids(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.genes.keys().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}
