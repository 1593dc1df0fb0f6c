//! Scoring scheme, alignment kernels, translated anchors and the spliced
//! alignment objective.

pub mod align;
pub mod anchors;
pub mod calibrate;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::seqmodel::{Exon, Gene, GeneExonSet};
use crate::spliced::SplicedAlignment;

pub use align::{block_identity, gap_cost, global_align, global_score, semiglobal_align, AlignmentDetail, Identity};
pub use anchors::{local_anchors, Anchor, AnchorTiers};

/// Every numeric knob of the scoring functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoringScheme {
    pub match_score: i32,
    pub mismatch: i32,
    pub gap_open: i32,
    pub gap_extend: i32,
    pub intr_both: i32,
    pub intr_one: i32,
    pub intr_none: i32,
    pub exon_both: i32,
    pub exon_one: i32,
    pub exon_none: i32,
    pub aa_match: i32,
    pub aa_mismatch: i32,
    /// Minimum exact amino-acid seed length for anchors.
    pub seed_len: usize,
    /// X-drop for ungapped seed extension, in amino-acid score units.
    pub xdrop: i32,
}

impl Default for ScoringScheme {
    fn default() -> Self {
        ScoringScheme {
            match_score: 2,
            mismatch: -1,
            gap_open: -4,
            gap_extend: -1,
            intr_both: 10,
            intr_one: 4,
            intr_none: 0,
            exon_both: 8,
            exon_one: 3,
            exon_none: 0,
            aa_match: 5,
            aa_mismatch: -2,
            seed_len: 5,
            xdrop: 12,
        }
    }
}

impl ScoringScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.intr_both > self.intr_one && self.intr_one > self.intr_none) {
            return bad("need intr_both > intr_one > intr_none");
        }
        if !(self.exon_both > self.exon_one && self.exon_one > self.exon_none) {
            return bad("need exon_both > exon_one > exon_none");
        }
        if !(self.match_score > 0 && self.mismatch < 0) {
            return bad("need match > 0 > mismatch");
        }
        if !(self.aa_match > 0 && self.aa_mismatch < 0) {
            return bad("need aa_match > 0 > aa_mismatch");
        }
        if self.gap_open > 0 || self.gap_extend > 0 {
            return bad("gap penalties must be <= 0");
        }
        if self.seed_len == 0 || self.xdrop <= 0 {
            return bad("seed_len and xdrop must be positive");
        }
        Ok(())
    }
}

/// Scheme and anchor tiers read from a flat `key = value` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoringConfig {
    pub scheme: ScoringScheme,
    pub tiers: AnchorTiers,
}

impl ScoringConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors,
    /// missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScoringConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let int = || value.parse::<i32>().map_err(|_| Error::Config(format!("line {}: bad integer for {key}", lineno + 1)));
            let s = &mut cfg.scheme;
            match key {
                "match" => s.match_score = int()?,
                "mismatch" => s.mismatch = int()?,
                "gap_open" => s.gap_open = int()?,
                "gap_extend" => s.gap_extend = int()?,
                "intr_both" => s.intr_both = int()?,
                "intr_one" => s.intr_one = int()?,
                "intr_none" => s.intr_none = int()?,
                "exon_both" => s.exon_both = int()?,
                "exon_one" => s.exon_one = int()?,
                "exon_none" => s.exon_none = int()?,
                "aa_match" => s.aa_match = int()?,
                "aa_mismatch" => s.aa_mismatch = int()?,
                "seed_len" => s.seed_len = int()?.max(0) as usize,
                "xdrop" => s.xdrop = int()?,
                "tier1" => cfg.tiers.t1 = int()?,
                "tier2" => cfg.tiers.t2 = int()?,
                "tier3" => cfg.tiers.t3 = int()?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        cfg.scheme.validate()?;
        cfg.tiers.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let s = &self.scheme;
        let pairs: BTreeMap<&str, i64> = [
            ("match", s.match_score as i64),
            ("mismatch", s.mismatch as i64),
            ("gap_open", s.gap_open as i64),
            ("gap_extend", s.gap_extend as i64),
            ("intr_both", s.intr_both as i64),
            ("intr_one", s.intr_one as i64),
            ("intr_none", s.intr_none as i64),
            ("exon_both", s.exon_both as i64),
            ("exon_one", s.exon_one as i64),
            ("exon_none", s.exon_none as i64),
            ("aa_match", s.aa_match as i64),
            ("aa_mismatch", s.aa_mismatch as i64),
            ("seed_len", s.seed_len as i64),
            ("xdrop", s.xdrop as i64),
            ("tier1", self.tiers.t1 as i64),
            ("tier2", self.tiers.t2 as i64),
            ("tier3", self.tiers.t3 as i64),
        ]
        .into_iter()
        .collect();
        pairs.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Splice-site status of an intron interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntronSites {
    pub donor: bool,
    pub acceptor: bool,
    /// Number of nucleotides strictly between the flanking blocks.
    pub interior_len: usize,
}

impl IntronSites {
    pub fn canonical(&self) -> bool {
        self.donor && self.acceptor
    }

    pub fn is_empty_interior(&self) -> bool {
        self.interior_len == 0
    }
}

/// Splice sites of the intron between gene positions `b` and `a`; the
/// interior is `h[b+1 .. a-1]`. Interiors shorter than 4 nt carry no sites.
pub fn intron_sites(h: &[u8], b: usize, a: usize) -> IntronSites {
    let interior_len = a.saturating_sub(b + 1);
    if interior_len < 4 || a > h.len() + 1 {
        return IntronSites { donor: false, acceptor: false, interior_len };
    }
    // 0-based interior is h[b .. a-1)
    let donor = &h[b..b + 2] == b"GT";
    let acceptor = &h[a - 3..a - 1] == b"AG";
    IntronSites { donor, acceptor, interior_len }
}

/// `intr(H[b,a])`.
pub fn intron_score(h: &Gene, intron: (usize, usize), scheme: &ScoringScheme) -> i32 {
    intron_score_seq(&h.seq, intron, scheme)
}

pub fn intron_score_seq(h: &[u8], (b, a): (usize, usize), scheme: &ScoringScheme) -> i32 {
    let s = intron_sites(h, b, a);
    match (s.donor, s.acceptor) {
        (true, true) => scheme.intr_both,
        (true, false) | (false, true) => scheme.intr_one,
        _ => scheme.intr_none,
    }
}

/// `exon_{E(G_C),E(H)}(k,l,a,b)` by exact coordinate membership.
pub fn exon_score(block: (usize, usize, usize, usize), cds_exons: &[Exon], gene_exons: &GeneExonSet, scheme: &ScoringScheme) -> i32 {
    let (k, l, a, b) = block;
    let in_cds = cds_exons.contains(&Exon::new(k, l));
    let in_gene = gene_exons.contains(Exon::new(a, b));
    match (in_cds, in_gene) {
        (true, true) => scheme.exon_both,
        (true, false) | (false, true) => scheme.exon_one,
        _ => scheme.exon_none,
    }
}

/// Which spliced alignment objective to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SapVariant {
    /// Similarity only.
    I,
    /// Similarity plus intron scores.
    II,
    /// Similarity, intron and exon scores.
    III,
}

impl fmt::Display for SapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SapVariant::I => "I",
            SapVariant::II => "II",
            SapVariant::III => "III",
        })
    }
}

/// Objective value of a spliced alignment of `cds` (with exons `cds_exons`) on `h`.
///
/// Conserved blocks contribute the optimal global alignment score of their
/// two segments; deleted blocks the affine cost of deleting the segment.
pub fn sap_objective(
    a: &SplicedAlignment,
    cds: &[u8],
    cds_exons: &[Exon],
    h: &[u8],
    gene_exons: &GeneExonSet,
    scheme: &ScoringScheme,
    variant: SapVariant,
) -> i64 {
    let mut total: i64 = 0;
    for blk in &a.blocks {
        total += if blk.is_conserved() {
            global_score(&cds[blk.k - 1..blk.l], &h[blk.a - 1..blk.b], scheme) as i64
        } else {
            gap_cost(blk.l + 1 - blk.k, scheme) as i64
        };
        if variant == SapVariant::III && blk.is_conserved() {
            total += exon_score((blk.k, blk.l, blk.a, blk.b), cds_exons, gene_exons, scheme) as i64;
        }
    }
    if variant >= SapVariant::II {
        total += a.introns().into_iter().map(|i| intron_score_seq(h, i, scheme) as i64).sum::<i64>();
    }
    total
}
