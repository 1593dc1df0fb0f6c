//! Quality measures for pairwise spliced alignments and multiple CDS alignments.

use std::fmt::Write as _;

use crate::downstream::MultiColumnAlignment;
use crate::error::{Error, Result};
use crate::scoring::align::GAP;
use crate::scoring::intron_sites;
use crate::seqmodel::{CdsSequence, Dataset, GeneExonSet};
use crate::spliced::SplicedAlignment;

/// Gap runs at least this long count as long gaps.
pub const LONG_GAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMetrics {
    pub cds_id: String,
    pub gene_id: String,
    /// Fraction of CDS positions in conserved blocks.
    pub coverage: f64,
    /// Internal block extremities that fall on a CDS exon extremity.
    pub cds_extremity_ratio: f64,
    /// Internal block extremities that fall on a gene exon extremity.
    pub gene_extremity_ratio: f64,
    /// Induced introns with both GT and AG.
    pub canonical_intron_ratio: f64,
    /// Donor and acceptor sites that are GT and AG, over twice the intron count.
    pub canonical_site_ratio: f64,
    pub internal_extremities: usize,
    pub introns: usize,
    /// Fewer than two internal extremities; extremity ratios reported as 0.
    pub insufficient: bool,
}

/// Measures `a` against the CDS exons of `cs`, the gene exons `ge` and gene sequence `h`.
///
/// Internal extremities are the starts and ends of conserved blocks, except
/// the start of the first and the end of the last. Starts are matched against
/// exon starts, ends against exon ends.
pub fn pairwise_metrics(a: &SplicedAlignment, cs: &CdsSequence, ge: &GeneExonSet, h: &[u8]) -> PairwiseMetrics {
    let cons: Vec<_> = a.conserved().collect();
    let covered: usize = cons.iter().map(|b| b.cds_len()).sum();
    let coverage = if cs.is_empty() { 0.0 } else { covered as f64 / cs.len() as f64 };
    let (mut internal, mut cds_hits, mut gene_hits) = (0usize, 0usize, 0usize);
    for (i, b) in cons.iter().enumerate() {
        if i > 0 {
            internal += 1;
            cds_hits += cs.is_exon_start(b.k) as usize;
            gene_hits += ge.is_start(b.a) as usize;
        }
        if i + 1 < cons.len() {
            internal += 1;
            cds_hits += cs.is_exon_end(b.l) as usize;
            gene_hits += ge.is_end(b.b) as usize;
        }
    }
    let introns = a.introns();
    let (mut canon, mut sites) = (0usize, 0usize);
    for &(b, e) in &introns {
        let s = intron_sites(h, b, e);
        canon += s.canonical() as usize;
        sites += s.donor as usize + s.acceptor as usize;
    }
    let insufficient = internal < 2;
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    PairwiseMetrics {
        cds_id: a.cds_id.clone(),
        gene_id: a.gene_id.clone(),
        coverage,
        cds_extremity_ratio: if insufficient { 0.0 } else { ratio(cds_hits, internal) },
        gene_extremity_ratio: if insufficient { 0.0 } else { ratio(gene_hits, internal) },
        canonical_intron_ratio: ratio(canon, introns.len()),
        canonical_site_ratio: ratio(sites, 2 * introns.len()),
        internal_extremities: internal,
        introns: introns.len(),
        insufficient,
    }
}

/// Metrics for every alignment, in input order.
pub fn pairwise_metrics_all(ds: &Dataset, alignments: &[SplicedAlignment]) -> Result<Vec<PairwiseMetrics>> {
    use rayon::prelude::*;
    alignments
        .par_iter()
        .map(|a| {
            let c = ds.cds_by_id(&a.cds_id).ok_or_else(|| Error::UnknownSequence(a.cds_id.clone()))?;
            let cs = ds.cds_sequence(c)?;
            let h = ds.gene(&a.gene_id)?;
            a.validate(cs.len(), h.len())?;
            Ok(pairwise_metrics(a, &cs, &ds.exon_set(&a.gene_id), &h.seq))
        })
        .collect()
}

pub const PAIRWISE_HEADER: &str =
    "cds_id\tgene_id\tcoverage\tcds_extremities\tgene_extremities\tcanonical_introns\tcanonical_sites\tinternal_extremities\tintrons\tflag";

pub fn pairwise_tsv(rows: &[PairwiseMetrics]) -> String {
    let mut out = format!("{PAIRWISE_HEADER}\n");
    for m in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
            m.cds_id,
            m.gene_id,
            m.coverage,
            m.cds_extremity_ratio,
            m.gene_extremity_ratio,
            m.canonical_intron_ratio,
            m.canonical_site_ratio,
            m.internal_extremities,
            m.introns,
            if m.insufficient { "insufficient" } else { "ok" }
        );
    }
    out
}

/// Means over alignments: coverage, then the extremity and splice-site ratios
/// over alignments with enough extremities.
pub fn pairwise_summary(rows: &[PairwiseMetrics]) -> String {
    let mean = |v: Vec<f64>| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let ok: Vec<&PairwiseMetrics> = rows.iter().filter(|m| !m.insufficient).collect();
    let mut out = String::new();
    let _ = writeln!(out, "alignments\t{}", rows.len());
    let _ = writeln!(out, "mean_coverage\t{:.4}", mean(rows.iter().map(|m| m.coverage).collect()));
    let _ = writeln!(out, "with_extremities\t{}", ok.len());
    let _ = writeln!(out, "mean_cds_extremities\t{:.4}", mean(ok.iter().map(|m| m.cds_extremity_ratio).collect()));
    let _ = writeln!(out, "mean_gene_extremities\t{:.4}", mean(ok.iter().map(|m| m.gene_extremity_ratio).collect()));
    let _ = writeln!(out, "mean_canonical_introns\t{:.4}", mean(ok.iter().map(|m| m.canonical_intron_ratio).collect()));
    let _ = writeln!(out, "mean_canonical_sites\t{:.4}", mean(ok.iter().map(|m| m.canonical_site_ratio).collect()));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsaMetrics {
    pub columns: usize,
    pub identical_columns: usize,
    /// Columns with at least two residues, all identical, over all columns.
    pub column_identity: f64,
    pub long_gaps: usize,
    /// Long gaps whose flanking CDS positions lie in consecutive exons.
    pub real_long_gaps: usize,
    /// `real_long_gaps / long_gaps`, or 1 when there are none.
    pub long_gap_real_ratio: f64,
    pub no_long_gaps: bool,
}

/// Column identity over all rows and long-gap statistics over CDS rows.
///
/// A long gap is a run of at least [`LONG_GAP`] gap characters in a CDS row
/// with CDS nucleotides on both sides. Rows naming a CDS of `ds` must spell
/// that CDS once gaps are removed.
pub fn msa_metrics(m: &MultiColumnAlignment, ds: &Dataset) -> Result<MsaMetrics> {
    let width = m.rows.first().map_or(0, Vec::len);
    if m.rows.iter().any(|r| r.len() != width) {
        return Err(Error::Parse { line: 0, msg: "aligned rows differ in length".into() });
    }
    let mut identical = 0;
    for c in 0..width {
        let mut residues = m.rows.iter().map(|r| r[c]).filter(|&x| x != GAP);
        if let Some(first) = residues.next() {
            let mut n = 1;
            let mut same = first != b'N';
            for x in residues {
                n += 1;
                same &= x == first;
            }
            identical += (n >= 2 && same) as usize;
        }
    }
    let (mut long, mut real) = (0, 0);
    for (id, row) in m.ids.iter().zip(&m.rows) {
        let Some(c) = ds.cds_by_id(id) else { continue };
        let cs = ds.cds_sequence(c)?;
        let stripped: Vec<u8> = row.iter().copied().filter(|&x| x != GAP).collect();
        if stripped != cs.seq {
            return Err(Error::RoundTrip(id.clone()));
        }
        let mut pos = 0usize;
        let mut run = 0usize;
        for &x in row {
            if x == GAP {
                run += 1;
                continue;
            }
            pos += 1;
            if run >= LONG_GAP && pos > 1 {
                long += 1;
                let (before, after) = (cs.exon_index(pos - 1), cs.exon_index(pos));
                real += matches!((before, after), (Some(i), Some(j)) if j == i + 1) as usize;
            }
            run = 0;
        }
    }
    Ok(MsaMetrics {
        columns: width,
        identical_columns: identical,
        column_identity: if width == 0 { 0.0 } else { identical as f64 / width as f64 },
        long_gaps: long,
        real_long_gaps: real,
        long_gap_real_ratio: if long == 0 { 1.0 } else { real as f64 / long as f64 },
        no_long_gaps: long == 0,
    })
}

pub fn msa_tsv(m: &MsaMetrics) -> String {
    format!(
        "columns\tidentical_columns\tcolumn_identity\tlong_gaps\treal_long_gaps\tlong_gap_real_ratio\tflag\n{}\t{}\t{:.4}\t{}\t{}\t{:.4}\t{}\n",
        m.columns,
        m.identical_columns,
        m.column_identity,
        m.long_gaps,
        m.real_long_gaps,
        m.long_gap_real_ratio,
        if m.no_long_gaps { "no_long_gaps" } else { "ok" }
    )
}
