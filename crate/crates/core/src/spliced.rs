//! Spliced alignment blocks and their TSV form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scoring::AlignmentDetail;

/// One `(k, l, a, b)` quadruplet. Deleted blocks have `a = b = 0` and no detail.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub k: usize,
    pub l: usize,
    pub a: usize,
    pub b: usize,
    pub detail: Option<AlignmentDetail>,
    pub identity: f64,
}

impl Block {
    pub fn conserved(k: usize, l: usize, a: usize, b: usize, detail: AlignmentDetail) -> Self {
        let identity = detail.identity().value();
        Block { k, l, a, b, detail: Some(detail), identity }
    }

    pub fn deleted(k: usize, l: usize) -> Self {
        Block { k, l, a: 0, b: 0, detail: None, identity: 0.0 }
    }

    pub fn is_conserved(&self) -> bool {
        self.b != 0
    }

    pub fn cds_len(&self) -> usize {
        self.l + 1 - self.k
    }

    pub fn quad(&self) -> (usize, usize, usize, usize) {
        (self.k, self.l, self.a, self.b)
    }

    pub fn gap_columns(&self) -> usize {
        self.detail.as_ref().map_or(0, AlignmentDetail::gap_columns)
    }
}

/// A chain of blocks tiling a CDS sequence, conserved blocks increasing on the gene.
#[derive(Debug, Clone, PartialEq)]
pub struct SplicedAlignment {
    pub cds_id: String,
    pub gene_id: String,
    pub blocks: Vec<Block>,
}

impl SplicedAlignment {
    /// Builds an alignment from conserved blocks sorted by `k`, filling
    /// uncovered CDS positions with deleted blocks.
    pub fn tile(cds_id: &str, gene_id: &str, cds_len: usize, conserved: Vec<Block>) -> Self {
        let mut blocks = Vec::with_capacity(conserved.len() * 2 + 1);
        let mut next = 1;
        for blk in conserved {
            if blk.k > next {
                blocks.push(Block::deleted(next, blk.k - 1));
            }
            next = blk.l + 1;
            blocks.push(blk);
        }
        if next <= cds_len {
            blocks.push(Block::deleted(next, cds_len));
        }
        SplicedAlignment { cds_id: cds_id.to_string(), gene_id: gene_id.to_string(), blocks }
    }

    /// `Cons(A)`.
    pub fn conserved(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.is_conserved())
    }

    /// `Intron(A)`: `(b_i, a_{i+1})` for successive blocks that are both conserved.
    pub fn introns(&self) -> Vec<(usize, usize)> {
        self.blocks
            .windows(2)
            .filter(|w| w[0].is_conserved() && w[1].is_conserved())
            .map(|w| (w[0].b, w[1].a))
            .collect()
    }

    pub fn cds_len(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.l)
    }

    /// Fraction of CDS positions inside conserved blocks.
    pub fn coverage(&self) -> f64 {
        let total = self.cds_len();
        if total == 0 {
            return 0.0;
        }
        let covered: usize = self.conserved().map(Block::cds_len).sum();
        covered as f64 / total as f64
    }

    /// Merges runs of adjacent deleted blocks.
    pub fn merge_deleted(&mut self) {
        let mut out: Vec<Block> = Vec::with_capacity(self.blocks.len());
        for blk in self.blocks.drain(..) {
            match out.last_mut() {
                Some(prev) if !prev.is_conserved() && !blk.is_conserved() => prev.l = blk.l,
                _ => out.push(blk),
            }
        }
        self.blocks = out;
    }

    /// Checks the tiling and non-crossing conditions against sequence lengths.
    pub fn validate(&self, cds_len: usize, gene_len: usize) -> Result<()> {
        let fail = |m: String| Err(Error::Internal(format!("{} on {}: {m}", self.cds_id, self.gene_id)));
        if cds_len == 0 {
            return if self.blocks.is_empty() { Ok(()) } else { fail("blocks on empty cds".into()) };
        }
        let mut next = 1;
        let mut last_b = 0;
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.k != next || blk.l < blk.k {
                return fail(format!("block {} breaks the tiling", i + 1));
            }
            next = blk.l + 1;
            if blk.is_conserved() {
                if blk.a == 0 || blk.a > blk.b || blk.b > gene_len {
                    return fail(format!("block {} has invalid gene segment", i + 1));
                }
                if blk.a <= last_b {
                    return fail(format!("block {} crosses a previous block", i + 1));
                }
                last_b = blk.b;
            } else if blk.a != 0 {
                return fail(format!("deleted block {} has a gene segment", i + 1));
            }
        }
        if next != cds_len + 1 {
            return fail("cds not fully tiled".into());
        }
        Ok(())
    }

    /// TSV lines `cds_id gene_id idx k l a b status identity`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let status = if b.is_conserved() { "conserved" } else { "deleted" };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
                self.cds_id,
                self.gene_id,
                i + 1,
                b.k,
                b.l,
                b.a,
                b.b,
                status,
                b.identity
            );
        }
        out
    }
}

/// Reads alignment TSV text; lines are grouped by `(cds_id, gene_id)` in
/// order of first appearance and must carry consecutive indices.
pub fn parse_alignment_tsv(text: &str) -> Result<Vec<SplicedAlignment>> {
    let mut out: Vec<SplicedAlignment> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| Error::Parse { line: lineno + 1, msg: m.to_string() };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(err("expected 9 tab-separated fields"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| err("bad integer"));
        let (idx, k, l, a, b) = (num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?, num(f[6])?);
        let identity: f64 = f[8].parse().map_err(|_| err("bad identity"))?;
        let block = match f[7] {
            "conserved" if a >= 1 && a <= b => Block { k, l, a, b, detail: None, identity },
            "deleted" if a == 0 && b == 0 => Block::deleted(k, l),
            _ => return Err(err("bad status or gene coordinates")),
        };
        let same = out.last().is_some_and(|x| x.cds_id == f[0] && x.gene_id == f[1]);
        if !same {
            out.push(SplicedAlignment { cds_id: f[0].to_string(), gene_id: f[1].to_string(), blocks: vec![] });
        }
        let cur = out.last_mut().expect("pushed");
        if idx != cur.blocks.len() + 1 {
            return Err(err("non-consecutive block index"));
        }
        cur.blocks.push(block);
    }
    Ok(out)
}
