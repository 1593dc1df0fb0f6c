//! Multiple spliced alignment of several CDS on several genes.
//!
//! Conserved blocks of all pairwise alignments are merged greedily into
//! multi-blocks. A block joins a multi-block when one of its two segments
//! shares an extremity with the multi-block's segment of the same sequence and
//! the other extremities differ by at most `epsilon`. Conflicts between a
//! CDS-side and a gene-side match are settled by block correctness and by
//! counting supporting pairwise blocks.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scoring::{sap_objective, SapVariant, ScoringScheme};
use crate::seqmodel::Dataset;
use crate::spliced::{Block, SplicedAlignment};

/// `(s, e)`, 1-based inclusive; `(0, 0)` marks an absent sequence.
pub type Segment = (usize, usize);
pub const ABSENT: Segment = (0, 0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsaParams {
    pub epsilon: usize,
    pub tau: f64,
}

impl Default for MsaParams {
    fn default() -> Self {
        MsaParams { epsilon: 50, tau: 0.6 }
    }
}

impl MsaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidParam(format!("tau {} outside [0,1]", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqInfo {
    pub id: String,
    pub len: usize,
    /// Own id for genes, parent gene for CDS.
    pub gene_id: String,
    pub is_cds: bool,
}

/// The sequences of a multiple spliced alignment: genes first, then CDS, each sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    pub seqs: Vec<SeqInfo>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut seqs = Vec::new();
        for g in ds.sorted_gene_ids() {
            let len = ds.genes[g].len();
            seqs.push(SeqInfo { id: g.to_string(), len, gene_id: g.to_string(), is_cds: false });
        }
        for c in ds.sorted_cds() {
            seqs.push(SeqInfo { id: c.id.clone(), len: c.len(), gene_id: c.gene_id.clone(), is_cds: true });
        }
        let index = seqs.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        Registry { seqs, index }
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index(id).ok_or_else(|| Error::UnknownSequence(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    pub fn cds_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.seqs.len()).filter(|&i| self.seqs[i].is_cds)
    }
}

/// One segment per sequence, indexed like the registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiBlock {
    pub segments: Vec<Segment>,
}

impl MultiBlock {
    pub fn empty(n: usize) -> Self {
        MultiBlock { segments: vec![ABSENT; n] }
    }

    pub fn get(&self, seq: usize) -> Option<Segment> {
        let s = self.segments[seq];
        (s != ABSENT).then_some(s)
    }

    pub fn present(&self) -> impl Iterator<Item = (usize, Segment)> + '_ {
        self.segments.iter().enumerate().filter(|(_, s)| **s != ABSENT).map(|(i, s)| (i, *s))
    }

    pub fn present_count(&self) -> usize {
        self.present().count()
    }
}

/// How each conserved block was handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseCounts {
    pub created: usize,
    pub absorbed: usize,
    pub merged: usize,
    pub dropped_incorrect: usize,
    pub arbitrated: usize,
    /// Blocks whose insertion would overlap or cross existing multi-blocks.
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleSplicedAlignment {
    pub registry: Registry,
    pub multiblocks: Vec<MultiBlock>,
    pub counts: CaseCounts,
    pub diagnostics: Vec<String>,
}

pub fn segments_compatible(s1: Segment, s2: Segment, epsilon: usize) -> bool {
    (s1.0.abs_diff(s2.0) <= epsilon && s1.1 == s2.1) || (s1.0 == s2.0 && s1.1.abs_diff(s2.1) <= epsilon)
}

/// CDS-side and gene-side compatibility of block `(k,l,a,b)` of the pair
/// `(x, y)` with `mb`.
pub fn block_multiblock_compatible(quad: (usize, usize, usize, usize), x: usize, y: usize, mb: &MultiBlock, epsilon: usize) -> (bool, bool) {
    let (k, l, a, b) = quad;
    let side = |seq: usize, seg: Segment| mb.get(seq).is_some_and(|m| segments_compatible(seg, m, epsilon));
    (side(x, (k, l)), side(y, (a, b)))
}

/// Multi-blocks are compatible when every sequence present in both has compatible segments.
pub fn multiblocks_compatible(m1: &MultiBlock, m2: &MultiBlock, epsilon: usize) -> bool {
    m1.segments
        .iter()
        .zip(&m2.segments)
        .all(|(&s1, &s2)| s1 == ABSENT || s2 == ABSENT || segments_compatible(s1, s2, epsilon))
}

/// At least `tau` identity and no gap in the block alignment.
pub fn is_correct_block(block: &Block, tau: f64) -> bool {
    block.identity >= tau && block.detail.as_ref().is_some_and(|d| d.gap_columns() == 0)
}

/// Larger of two overlapping segments, or their hull when neither contains the other.
fn join(old: Segment, new: Segment) -> Option<Segment> {
    if old == ABSENT {
        Some(new)
    } else if old.0 <= new.1 && new.0 <= old.1 {
        Some((old.0.min(new.0), old.1.max(new.1)))
    } else {
        None
    }
}

type Quad = (usize, usize, usize, usize);

struct Item {
    x: usize,
    y: usize,
    quad: Quad,
    identity: f64,
    correct: bool,
}

/// Conserved block quadruplets of each `(cds, gene)` pair, by registry index.
struct PairIndex(HashMap<(usize, usize), Vec<Quad>>);

impl PairIndex {
    fn support(&self, reg: &Registry, seq: usize, mb: &MultiBlock, epsilon: usize) -> usize {
        let is_cds = reg.seqs[seq].is_cds;
        let mut n = 0;
        for (other, _) in mb.present().filter(|(o, _)| reg.seqs[*o].is_cds != is_cds) {
            let (x, y) = if is_cds { (seq, other) } else { (other, seq) };
            for &q in self.0.get(&(x, y)).into_iter().flatten() {
                let (c, g) = block_multiblock_compatible(q, x, y, mb, epsilon);
                n += (c || g) as usize;
            }
        }
        n
    }
}

fn index_pairs(reg: &Registry, alignments: &[SplicedAlignment], tau: f64) -> Result<(PairIndex, Vec<Item>)> {
    let mut idx: HashMap<(usize, usize), Vec<Quad>> = HashMap::new();
    let mut items = Vec::new();
    for a in alignments {
        let x = reg.require(&a.cds_id)?;
        let y = reg.require(&a.gene_id)?;
        if !reg.seqs[x].is_cds || reg.seqs[y].is_cds {
            return Err(Error::AlignmentMismatch { expected: "a CDS on a gene".into(), found: format!("{} on {}", a.cds_id, a.gene_id) });
        }
        a.validate(reg.seqs[x].len, reg.seqs[y].len)?;
        for b in a.conserved() {
            idx.entry((x, y)).or_default().push(b.quad());
            items.push(Item { x, y, quad: b.quad(), identity: b.identity, correct: is_correct_block(b, tau) });
        }
    }
    Ok((PairIndex(idx), items))
}

/// Every sequence's present segments are disjoint and the multi-blocks admit
/// an order increasing on every sequence.
fn chain_order(mbs: &[MultiBlock], n_seqs: usize) -> Option<Vec<usize>> {
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); mbs.len()];
    let mut indeg = vec![0usize; mbs.len()];
    for s in 0..n_seqs {
        let mut segs: Vec<(Segment, usize)> = mbs.iter().enumerate().filter_map(|(i, m)| m.get(s).map(|g| (g, i))).collect();
        segs.sort_unstable();
        for w in segs.windows(2) {
            if w[0].0 .1 >= w[1].0 .0 {
                return None;
            }
            succ[w[0].1].push(w[1].1);
            indeg[w[1].1] += 1;
        }
    }
    // ties go to the multi-block whose first present sequence comes first
    let key = |i: usize| mbs[i].present().next().map_or((usize::MAX, 0), |(s, g)| (s, g.0));
    let mut heap: BinaryHeap<Reverse<((usize, usize), usize)>> =
        (0..mbs.len()).filter(|&i| indeg[i] == 0).map(|i| Reverse((key(i), i))).collect();
    let mut order = Vec::with_capacity(mbs.len());
    while let Some(Reverse((_, i))) = heap.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                heap.push(Reverse((key(j), j)));
            }
        }
    }
    (order.len() == mbs.len()).then_some(order)
}

struct Builder<'a> {
    reg: &'a Registry,
    params: MsaParams,
    pairs: PairIndex,
    mbs: Vec<MultiBlock>,
    counts: CaseCounts,
}

impl Builder<'_> {
    /// Index of the candidate whose segment of `seq` overlaps `seg` the most.
    fn pick(&self, cands: &[usize], seq: usize, seg: Segment) -> Option<usize> {
        cands.iter().copied().max_by_key(|&i| {
            let m = self.mbs[i].segments[seq];
            (m.1.min(seg.1) + 1).saturating_sub(m.0.max(seg.0)) as isize * 1_000_000 - i as isize
        })
    }

    fn insert(&mut self, it: &Item) {
        let (x, y, q) = (it.x, it.y, it.quad);
        let eps = self.params.epsilon;
        let (cds_seg, gene_seg) = ((q.0, q.1), (q.2, q.3));
        let mut cds_c = Vec::new();
        let mut gene_c = Vec::new();
        for (i, m) in self.mbs.iter().enumerate() {
            let (c, g) = block_multiblock_compatible(q, x, y, m, eps);
            if c {
                cds_c.push(i);
            }
            if g {
                gene_c.push(i);
            }
        }
        let add = |m: &mut MultiBlock| -> bool {
            match (join(m.segments[x], cds_seg), join(m.segments[y], gene_seg)) {
                (Some(s), Some(g)) => {
                    m.segments[x] = s;
                    m.segments[y] = g;
                    true
                }
                _ => false,
            }
        };

        let mut next = self.mbs.clone();
        let both = cds_c.iter().copied().find(|i| gene_c.contains(i));
        let (ok, case) = match (both, self.pick(&cds_c, x, cds_seg), self.pick(&gene_c, y, gene_seg)) {
            (Some(m), _, _) | (None, Some(m), None) | (None, None, Some(m)) => (add(&mut next[m]), 1),
            (None, None, None) => {
                let mut m = MultiBlock::empty(self.reg.len());
                m.segments[x] = cds_seg;
                m.segments[y] = gene_seg;
                next.push(m);
                (true, 0)
            }
            (None, Some(i), Some(j)) if multiblocks_compatible(&next[i], &next[j], eps) => {
                let mut merged = next[i].clone();
                let mut ok = true;
                for (s, seg) in next[j].present() {
                    match join(merged.segments[s], seg) {
                        Some(v) => merged.segments[s] = v,
                        None => ok = false,
                    }
                }
                ok &= add(&mut merged);
                let (lo, hi) = (i.min(j), i.max(j));
                next[lo] = merged;
                next.remove(hi);
                (ok, 2)
            }
            (None, Some(i), Some(j)) => {
                if !it.correct {
                    self.counts.dropped_incorrect += 1;
                    return;
                }
                let sx = self.pairs.support(self.reg, x, &self.mbs[i], eps);
                let sy = self.pairs.support(self.reg, y, &self.mbs[j], eps);
                // ties keep the CDS-side occurrence
                let ok = if sx >= sy {
                    next[j].segments[y] = ABSENT;
                    add(&mut next[i])
                } else {
                    next[i].segments[x] = ABSENT;
                    add(&mut next[j])
                };
                (ok, 3)
            }
        };
        if !ok || chain_order(&next, self.reg.len()).is_none() {
            self.counts.rejected += 1;
            return;
        }
        self.mbs = next;
        match case {
            0 => self.counts.created += 1,
            1 => self.counts.absorbed += 1,
            2 => self.counts.merged += 1,
            _ => self.counts.arbitrated += 1,
        }
    }
}

/// Builds the multiple spliced alignment from pairwise alignments.
///
/// Blocks are processed by decreasing identity, then decreasing CDS length,
/// then `(cds_id, gene_id, k)`. Conserved blocks need alignment details for
/// the correctness test; blocks without details count as incorrect.
pub fn build_msa(reg: &Registry, alignments: &[SplicedAlignment], params: &MsaParams) -> Result<MultipleSplicedAlignment> {
    params.validate()?;
    let (pairs, mut items) = index_pairs(reg, alignments, params.tau)?;
    items.sort_by(|p, q| {
        q.identity
            .total_cmp(&p.identity)
            .then((q.quad.1 - q.quad.0).cmp(&(p.quad.1 - p.quad.0)))
            .then_with(|| reg.seqs[p.x].id.cmp(&reg.seqs[q.x].id))
            .then_with(|| reg.seqs[p.y].id.cmp(&reg.seqs[q.y].id))
            .then(p.quad.0.cmp(&q.quad.0))
    });
    let mut b = Builder { reg, params: *params, pairs, mbs: Vec::new(), counts: CaseCounts::default() };
    for it in &items {
        b.insert(it);
    }
    let mbs: Vec<MultiBlock> = b.mbs.into_iter().filter(|m| m.present_count() >= 2).collect();
    let counts = b.counts;
    finalize(reg.clone(), mbs, counts)
}

fn finalize(registry: Registry, mbs: Vec<MultiBlock>, counts: CaseCounts) -> Result<MultipleSplicedAlignment> {
    let order = chain_order(&mbs, registry.len()).ok_or_else(|| {
        let ids: Vec<&str> = registry.seqs.iter().map(|s| s.id.as_str()).collect();
        Error::Internal(format!("multi-blocks cannot be chained over {}", ids.join(",")))
    })?;
    let mut slots: Vec<Option<MultiBlock>> = mbs.into_iter().map(Some).collect();
    let multiblocks = order.into_iter().map(|i| slots[i].take().expect("each index once")).collect();
    let mut msa = MultipleSplicedAlignment { registry, multiblocks, counts, diagnostics: Vec::new() };
    for (x, gaps) in msa.uncovered() {
        for (s, e) in gaps {
            msa.diagnostics.push(format!("{} positions {s}..{e} are in no multi-block", msa.registry.seqs[x].id));
        }
    }
    Ok(msa)
}

impl MultipleSplicedAlignment {
    /// CDS intervals outside every multi-block, per CDS registry index.
    pub fn uncovered(&self) -> Vec<(usize, Vec<Segment>)> {
        let mut out = Vec::new();
        for x in self.registry.cds_indices() {
            let mut gaps = Vec::new();
            let mut next = 1;
            for m in &self.multiblocks {
                if let Some((s, e)) = m.get(x) {
                    if s > next {
                        gaps.push((next, s - 1));
                    }
                    next = e + 1;
                }
            }
            if next <= self.registry.seqs[x].len {
                gaps.push((next, self.registry.seqs[x].len));
            }
            if !gaps.is_empty() {
                out.push((x, gaps));
            }
        }
        out
    }

    /// Segments of one sequence in chain order.
    pub fn segments_of(&self, seq: usize) -> Vec<(usize, Segment)> {
        self.multiblocks.iter().enumerate().filter_map(|(i, m)| m.get(seq).map(|s| (i, s))).collect()
    }

    /// Spliced alignment of CDS `x` on gene `y` read off the multi-blocks
    /// containing `x`; uncovered CDS positions become deleted blocks.
    pub fn induced_pairwise(&self, x: &str, y: &str) -> Result<SplicedAlignment> {
        let xi = self.registry.require(x)?;
        let yi = self.registry.require(y)?;
        let len = self.registry.seqs[xi].len;
        let mut blocks = Vec::new();
        let mut next = 1;
        for m in &self.multiblocks {
            let Some((s, e)) = m.get(xi) else { continue };
            if s > next {
                blocks.push(Block::deleted(next, s - 1));
            }
            next = e + 1;
            blocks.push(match m.get(yi) {
                Some((a, b)) => Block { k: s, l: e, a, b, detail: None, identity: 0.0 },
                None => Block::deleted(s, e),
            });
        }
        if next <= len {
            blocks.push(Block::deleted(next, len));
        }
        let mut out = SplicedAlignment { cds_id: x.to_string(), gene_id: y.to_string(), blocks };
        out.merge_deleted();
        Ok(out)
    }

    /// Sum over all `(CDS, gene)` pairs of the objective of the induced alignment.
    pub fn objective(&self, ds: &Dataset, scheme: &ScoringScheme, variant: SapVariant) -> Result<i64> {
        let mut total = 0;
        for c in ds.sorted_cds() {
            let cs = ds.cds_sequence(c)?;
            for g in ds.sorted_gene_ids() {
                let a = self.induced_pairwise(&c.id, g)?;
                let h = &ds.gene(g)?.seq;
                total += sap_objective(&a, &cs.seq, &cs.cds_exons, h, &ds.exon_set(g), scheme, variant);
            }
        }
        Ok(total)
    }

    /// Lines `mb_idx seq_id s e` for present segments, in chain then registry order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.multiblocks.iter().enumerate() {
            for (s, (a, b)) in m.present() {
                let _ = writeln!(out, "{}\t{}\t{a}\t{b}", i + 1, self.registry.seqs[s].id);
            }
        }
        out
    }

    /// Reads the TSV form back against `registry`; the chain must be valid as listed.
    pub fn parse_tsv(text: &str, registry: &Registry) -> Result<Self> {
        let mut mbs: Vec<MultiBlock> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse { line: lineno + 1, msg: m.to_string() };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(err("expected 4 tab-separated fields"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err("bad integer"));
            let (idx, s, e) = (num(f[0])?, num(f[2])?, num(f[3])?);
            let seq = registry.index(f[1]).ok_or_else(|| err("unknown sequence"))?;
            if idx == 0 || idx < mbs.len() || idx > mbs.len() + 1 {
                return Err(err("multi-block indices must start at 1 and be consecutive"));
            }
            if idx > mbs.len() {
                mbs.push(MultiBlock::empty(registry.len()));
            }
            if s == 0 || s > e || e > registry.seqs[seq].len || mbs[idx - 1].segments[seq] != ABSENT {
                return Err(err("bad or repeated segment"));
            }
            mbs[idx - 1].segments[seq] = (s, e);
        }
        for seq in 0..registry.len() {
            let segs: Vec<Segment> = mbs.iter().filter_map(|m| m.get(seq)).collect();
            if segs.windows(2).any(|w| w[0].1 >= w[1].0) {
                return Err(Error::Parse { line: 0, msg: format!("segments of {} cross or overlap", registry.seqs[seq].id) });
            }
        }
        let mut msa = MultipleSplicedAlignment { registry: registry.clone(), multiblocks: mbs, counts: CaseCounts::default(), diagnostics: vec![] };
        for (x, gaps) in msa.uncovered() {
            for (s, e) in gaps {
                msa.diagnostics.push(format!("{} positions {s}..{e} are in no multi-block", msa.registry.seqs[x].id));
            }
        }
        Ok(msa)
    }
}

/// Support of the occurrence of `seq_id` in multi-block `mb_idx` (0-based):
/// pairwise blocks between `seq_id` and sequences of the other kind present in
/// the multi-block that are compatible with it.
pub fn support_score(msa: &MultipleSplicedAlignment, alignments: &[SplicedAlignment], seq_id: &str, mb_idx: usize, epsilon: usize) -> Result<usize> {
    let (pairs, _) = index_pairs(&msa.registry, alignments, 1.0)?;
    let seq = msa.registry.require(seq_id)?;
    let mb = msa.multiblocks.get(mb_idx).ok_or_else(|| Error::InvalidParam(format!("no multi-block {mb_idx}")))?;
    Ok(pairs.support(&msa.registry, seq, mb, epsilon))
}
