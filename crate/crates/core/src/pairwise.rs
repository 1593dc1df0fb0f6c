//! Structure-aware spliced alignment of one CDS sequence onto one gene.
//!
//! [`splice_align`] runs the five heuristic steps in order: translated
//! anchors, anchor chaining and extension to CDS exon boundaries (one round per
//! anchor tier), semi-global alignment of the remaining regions, splice
//! junction correction and block-end correction against gene exons. An
//! optional re-chaining pass then picks the best-scoring chain among the
//! heuristic blocks and exon-to-exon candidates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scoring::align::GAP;
use crate::scoring::{
    exon_score, gap_cost, global_align, global_score, intron_score_seq, intron_sites, local_anchors, semiglobal_align, AlignmentDetail,
    Anchor, AnchorTiers, Identity, ScoringScheme,
};
use crate::seqmodel::{CdsSequence, Dataset, Exon, Gene, GeneExonSet};
use crate::spliced::{Block, SplicedAlignment};

/// Largest DP matrix the gap filler will fill for one region.
const MAX_FILL_CELLS: usize = 25_000_000;

/// Heuristic knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Compatibility slack for multi-blocks.
    pub epsilon: usize,
    /// Identity threshold of a correct block, also used to keep gap-filling stretches.
    pub tau: f64,
    /// Conserved blocks below this identity are turned into deleted blocks.
    pub min_idty: f64,
    /// Largest junction shift tried, in nucleotides.
    pub junction_shift_max: usize,
    /// Largest new gap tried at a junction, in codons.
    pub junction_gap_max: usize,
    /// Gap runs at least this long split a gap-filling alignment into separate blocks.
    pub min_intron: usize,
    /// Re-chain blocks by objective after end correction.
    pub rechain: bool,
    pub tiers: AnchorTiers,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            epsilon: 50,
            tau: 0.6,
            min_idty: 0.6,
            junction_shift_max: 30,
            junction_gap_max: 3,
            min_intron: 10,
            rechain: true,
            tiers: AnchorTiers::default(),
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if !(0.0..=1.0).contains(&self.min_idty) {
            return bad("min_idty must lie in [0,1]");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0,1]");
        }
        if self.junction_shift_max == 0 || self.junction_gap_max == 0 || self.min_intron == 0 {
            return bad("shift, gap and intron limits must be positive");
        }
        self.tiers.validate()
    }
}

fn ident(b: &Block) -> Identity {
    b.detail.as_ref().map(AlignmentDetail::identity).unwrap_or_default()
}

fn realign(cds: &[u8], h: &[u8], (k, l, a, b): (usize, usize, usize, usize), scheme: &ScoringScheme) -> Block {
    let (_, d) = global_align(&cds[k - 1..l], &h[a - 1..b], scheme);
    Block::conserved(k, l, a, b, d)
}

fn disjoint(x: (usize, usize, usize, usize), y: (usize, usize, usize, usize)) -> bool {
    (x.1 < y.0 && x.3 < y.2) || (y.1 < x.0 && y.3 < x.2)
}

/// Removes `count` residues of one row from one end of a block's alignment.
/// Returns `None` when either side would become empty.
fn trim(blk: &Block, front: bool, cds_row: bool, count: usize) -> Option<Block> {
    let det = blk.detail.as_ref()?;
    let cols = det.columns();
    let (mut removed, mut rc, mut rg, mut n) = (0, 0, 0, 0);
    while removed < count && n < cols {
        let c = if front { n } else { cols - 1 - n };
        let (q, s) = (det.query[c], det.subject[c]);
        if q != GAP {
            rc += 1;
        }
        if s != GAP {
            rg += 1;
        }
        removed += if cds_row { (q != GAP) as usize } else { (s != GAP) as usize };
        n += 1;
    }
    if rc >= blk.cds_len() || rg >= blk.b + 1 - blk.a {
        return None;
    }
    let range = if front { n..cols } else { 0..cols - n };
    let d = AlignmentDetail { query: det.query[range.clone()].to_vec(), subject: det.subject[range].to_vec() };
    Some(if front {
        Block::conserved(blk.k + rc, blk.l, blk.a + rg, blk.b, d)
    } else {
        Block::conserved(blk.k, blk.l - rc, blk.a, blk.b - rg, d)
    })
}

/// Extends a block by `len` ungapped columns on one side.
fn extend_ungapped(blk: &Block, front: bool, len: usize, cds: &[u8], h: &[u8]) -> Option<Block> {
    let det = blk.detail.as_ref()?;
    if front {
        if len >= blk.k || len >= blk.a {
            return None;
        }
        let (k, a) = (blk.k - len, blk.a - len);
        let mut q = cds[k - 1..blk.k - 1].to_vec();
        let mut s = h[a - 1..blk.a - 1].to_vec();
        q.extend_from_slice(&det.query);
        s.extend_from_slice(&det.subject);
        Some(Block::conserved(k, blk.l, a, blk.b, AlignmentDetail { query: q, subject: s }))
    } else {
        let (l, b) = (blk.l + len, blk.b + len);
        if l > cds.len() || b > h.len() {
            return None;
        }
        let mut q = det.query.clone();
        let mut s = det.subject.clone();
        q.extend_from_slice(&cds[blk.l..l]);
        s.extend_from_slice(&h[blk.b..b]);
        Some(Block::conserved(blk.k, l, blk.a, b, AlignmentDetail { query: q, subject: s }))
    }
}

/// Chaining: the maximum-score chain of anchors that do not cross or
/// overlap each other or any `existing` block. Ties keep earlier anchors in
/// `(k, a, l, b)` order.
pub fn select_compatible_anchors(anchors: &[Anchor], existing: &[Block], cds: &[u8], h: &[u8]) -> Vec<Block> {
    let mut idx: Vec<usize> =
        (0..anchors.len()).filter(|&i| existing.iter().all(|e| disjoint(anchors[i].quad(), e.quad()))).collect();
    idx.sort_by_key(|&i| (anchors[i].quad(), i));
    let n = idx.len();
    let mut best = vec![0i64; n];
    let mut prev = vec![usize::MAX; n];
    for j in 0..n {
        let aj = &anchors[idx[j]];
        best[j] = aj.score as i64;
        for i in 0..j {
            let ai = &anchors[idx[i]];
            if ai.l < aj.k && ai.b < aj.a && best[i] + aj.score as i64 > best[j] {
                best[j] = best[i] + aj.score as i64;
                prev[j] = i;
            }
        }
    }
    let Some(mut j) = (0..n).fold(None, |acc: Option<usize>, j| match acc {
        Some(b) if best[b] >= best[j] => Some(b),
        _ => Some(j),
    }) else {
        return Vec::new();
    };
    let mut chain = Vec::new();
    loop {
        let an = &anchors[idx[j]];
        let d = AlignmentDetail::ungapped(&cds[an.k - 1..an.l], &h[an.a - 1..an.b]);
        chain.push(Block::conserved(an.k, an.l, an.a, an.b, d));
        if prev[j] == usize::MAX {
            break;
        }
        j = prev[j];
    }
    chain.reverse();
    chain
}

/// Extension: pushes block ends out to the enclosing CDS exon
/// boundaries. An extension that overlaps a neighbour on the CDS trims the
/// neighbour, and is applied only if both identities strictly increase.
pub fn extend_blocks_cds(mut bl: Vec<Block>, cs: &CdsSequence, h: &[u8]) -> Vec<Block> {
    bl.sort_by_key(|b| b.k);
    let exon_of = |pos: usize| cs.exon_index(pos).map(|i| cs.cds_exons[i]);
    for i in 0..bl.len() {
        // left end
        if !cs.is_exon_start(bl[i].k) {
            if let Some(e) = exon_of(bl[i].k) {
                let cur = &bl[i];
                if let Some(ext) = extend_ungapped(cur, true, cur.k - e.start, &cs.seq, h) {
                    if i > 0 && bl[i - 1].l >= ext.k {
                        let p = &bl[i - 1];
                        if let Some(tp) = (ext.k > p.k).then(|| trim(p, false, true, p.l + 1 - ext.k)).flatten() {
                            if tp.b < ext.a && ident(&ext) > ident(cur) && ident(&tp) > ident(p) {
                                bl[i - 1] = tp;
                                bl[i] = ext;
                            }
                        }
                    } else if (i == 0 || bl[i - 1].b < ext.a) && ident(&ext) >= ident(cur) {
                        bl[i] = ext;
                    }
                }
            }
        }
        // right end
        if !cs.is_exon_end(bl[i].l) {
            if let Some(e) = exon_of(bl[i].l) {
                let cur = &bl[i];
                if let Some(ext) = extend_ungapped(cur, false, e.end - cur.l, &cs.seq, h) {
                    if i + 1 < bl.len() && bl[i + 1].k <= ext.l {
                        let nx = &bl[i + 1];
                        if let Some(tn) = (ext.l < nx.l).then(|| trim(nx, true, true, ext.l + 1 - nx.k)).flatten() {
                            if ext.b < tn.a && ident(&ext) > ident(cur) && ident(&tn) > ident(nx) {
                                bl[i + 1] = tn;
                                bl[i] = ext;
                            }
                        }
                    } else if (i + 1 == bl.len() || ext.b < bl[i + 1].a) && ident(&ext) >= ident(cur) {
                        bl[i] = ext;
                    }
                }
            }
        }
    }
    bl
}

/// Splits a semi-global alignment of `cds[k0..]` against `h[a0..]` at long
/// gap runs and keeps the stretches, trimmed to match columns, whose identity
/// reaches `tau`.
fn stretches(det: &AlignmentDetail, k0: usize, a0: usize, tau: f64, min_intron: usize) -> Vec<Block> {
    let cols = det.columns();
    // 1-based positions of the residue at or before each column
    let (mut pc, mut pg) = (k0 - 1, a0 - 1);
    let mut pos = Vec::with_capacity(cols);
    for c in 0..cols {
        pc += (det.query[c] != GAP) as usize;
        pg += (det.subject[c] != GAP) as usize;
        pos.push((pc, pg));
    }
    // column ranges separated by long gap runs
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    let mut c = 0;
    while c < cols {
        let qgap = det.query[c] == GAP;
        let sgap = det.subject[c] == GAP;
        if qgap || sgap {
            let mut e = c;
            while e < cols && (det.query[e] == GAP) == qgap && (det.subject[e] == GAP) == sgap {
                e += 1;
            }
            if e - c >= min_intron {
                if c > start {
                    pieces.push((start, c));
                }
                start = e;
            }
            c = e;
        } else {
            c += 1;
        }
    }
    if start < cols {
        pieces.push((start, cols));
    }
    let mut out = Vec::new();
    for (s, e) in pieces {
        let is_m = |c: usize| det.query[c] != GAP && det.query[c] == det.subject[c] && det.query[c] != b'N';
        let Some(f) = (s..e).find(|&c| is_m(c)) else { continue };
        let t = (s..e).rev().find(|&c| is_m(c)).expect("f exists");
        let d = AlignmentDetail { query: det.query[f..=t].to_vec(), subject: det.subject[f..=t].to_vec() };
        if d.identity().value() >= tau {
            out.push(Block::conserved(pos[f].0, pos[t].0, pos[f].1, pos[t].1, d));
        }
    }
    out
}

/// Gap filling: semi-global alignment of every uncovered CDS region against the
/// gene interval between its flanking blocks.
pub fn fill_gaps_global(bl: Vec<Block>, cs: &CdsSequence, h: &[u8], scheme: &ScoringScheme, params: &Params) -> Vec<Block> {
    let (m, n) = (cs.len(), h.len());
    let mut out = Vec::with_capacity(bl.len() * 2);
    let (mut prev_l, mut prev_b) = (0, 0);
    for i in 0..=bl.len() {
        let (next_k, next_a) = bl.get(i).map_or((m + 1, n + 1), |b| (b.k, b.a));
        if next_k > prev_l + 1 && next_a > prev_b + 1 {
            let cds = &cs.seq[prev_l..next_k - 1];
            let gene = &h[prev_b..next_a - 1];
            if cds.len() * gene.len() <= MAX_FILL_CELLS {
                let (_, det) = semiglobal_align(cds, gene, scheme);
                out.extend(stretches(&det, prev_l + 1, prev_b + 1, params.tau, params.min_intron));
            }
        }
        if let Some(b) = bl.get(i) {
            prev_l = b.l;
            prev_b = b.b;
            out.push(b.clone());
        }
    }
    out
}

fn canonical_at(h: &[u8], b: usize, a: usize) -> bool {
    a <= h.len() + 1 && intron_sites(h, b, a).canonical()
}

/// Junction correction: moves non-canonical junctions between CDS-adjacent blocks onto a
/// GT..AG interior when neither flanking identity drops.
pub fn correct_junctions(mut bl: Vec<Block>, cs: &CdsSequence, h: &[u8], scheme: &ScoringScheme, params: &Params) -> Vec<Block> {
    let smax = params.junction_shift_max as isize;
    let gmax = 3 * params.junction_gap_max as isize;
    let n = h.len() as isize;
    for i in 0..bl.len().saturating_sub(1) {
        let (x, y) = (&bl[i], &bl[i + 1]);
        if x.l + 1 != y.k || canonical_at(h, x.b, y.a) {
            continue;
        }
        let x0 = realign(&cs.seq, h, x.quad(), scheme);
        let y0 = realign(&cs.seq, h, y.quad(), scheme);
        let (ix, iy) = (ident(&x0), ident(&y0));
        let mut best: Option<(Block, Block, (isize, isize, isize))> = None;
        for s in -smax..=smax {
            let l1 = x.l as isize + s;
            if l1 < x.k as isize || l1 >= y.l as isize {
                continue;
            }
            for gd in (-gmax..=gmax).step_by(3) {
                let b1 = x.b as isize + s + gd;
                if b1 < x.a as isize || b1 > n {
                    continue;
                }
                for ga in (-gmax..=gmax).step_by(3) {
                    let a2 = y.a as isize + s + ga;
                    if a2 > y.b as isize || a2 - b1 - 1 < 4 || !canonical_at(h, b1 as usize, a2 as usize) {
                        continue;
                    }
                    let nx = realign(&cs.seq, h, (x.k, l1 as usize, x.a, b1 as usize), scheme);
                    let ny = realign(&cs.seq, h, ((l1 + 1) as usize, y.l, a2 as usize, y.b), scheme);
                    if ident(&nx) < ix || ident(&ny) < iy {
                        continue;
                    }
                    let key = (s, gd, ga);
                    let better = match &best {
                        None => true,
                        Some((bx, by, bk)) => {
                            let c = Identity::cmp_sum((ident(&nx), ident(&ny)), (ident(bx), ident(by)));
                            let rank = |k: &(isize, isize, isize)| (k.0.abs(), k.1.abs() + k.2.abs(), k.0, k.1, k.2);
                            c.is_gt() || (c.is_eq() && rank(&key) < rank(bk))
                        }
                    };
                    if better {
                        best = Some((nx, ny, key));
                    }
                }
            }
        }
        if let Some((nx, ny, _)) = best {
            bl[i] = nx;
            bl[i + 1] = ny;
        }
    }
    bl
}

fn on_left_extremity(b: &Block, cs: &CdsSequence, ge: &GeneExonSet) -> bool {
    ge.is_start(b.a) || cs.is_exon_start(b.k)
}

fn on_right_extremity(b: &Block, cs: &CdsSequence, ge: &GeneExonSet) -> bool {
    ge.is_end(b.b) || cs.is_exon_end(b.l)
}

/// End correction: trims block ends that sit on no exon extremity back to the nearest
/// gene exon extremity inside the block, then extends the ends still off any
/// extremity out to the nearest free gene exon extremity when identity does
/// not drop.
pub fn correct_block_ends_gene(mut bl: Vec<Block>, cs: &CdsSequence, ge: &GeneExonSet, h: &[u8]) -> Vec<Block> {
    let starts = ge.starts();
    let ends = ge.ends();

    for blk in bl.iter_mut() {
        if !on_left_extremity(blk, cs, ge) {
            if let Some(&x) = starts.iter().find(|&&x| x > blk.a && x <= blk.b) {
                if let Some(t) = trim(blk, true, false, x - blk.a) {
                    *blk = t;
                }
            }
        }
        if !on_right_extremity(blk, cs, ge) {
            if let Some(&y) = ends.iter().rev().find(|&&y| y < blk.b && y >= blk.a) {
                if let Some(t) = trim(blk, false, false, blk.b - y) {
                    *blk = t;
                }
            }
        }
    }

    for i in 0..bl.len() {
        if !on_left_extremity(&bl[i], cs, ge) {
            let (pl, pb) = if i > 0 { (bl[i - 1].l, bl[i - 1].b) } else { (0, 0) };
            let cur = &bl[i];
            if let Some(&x) = starts.iter().rev().find(|&&x| x < cur.a) {
                let len = cur.a - x;
                if x > pb && cur.k > pl + len {
                    if let Some(ext) = extend_ungapped(cur, true, len, &cs.seq, h) {
                        if ident(&ext) >= ident(cur) {
                            bl[i] = ext;
                        }
                    }
                }
            }
        }
        if !on_right_extremity(&bl[i], cs, ge) {
            let (nk, na) = bl.get(i + 1).map_or((cs.len() + 1, h.len() + 1), |b| (b.k, b.a));
            let cur = &bl[i];
            if let Some(&y) = ends.iter().find(|&&y| y > cur.b) {
                let len = y - cur.b;
                if y < na && cur.l + len < nk {
                    if let Some(ext) = extend_ungapped(cur, false, len, &cs.seq, h) {
                        if ident(&ext) >= ident(cur) {
                            bl[i] = ext;
                        }
                    }
                }
            }
        }
    }
    bl
}

/// Objective-guided re-chaining.
///
/// Candidates are the current blocks, their projections onto the CDS exons
/// they touch, and every CDS exon / gene exon pair whose lengths are within a
/// factor of two. The best chain under the full objective replaces
/// the current one only if it scores strictly higher.
pub fn rechain(bl: Vec<Block>, cs: &CdsSequence, ge: &GeneExonSet, h: &[u8], scheme: &ScoringScheme) -> Vec<Block> {
    let (m, n) = (cs.len(), h.len());
    let mut cand: Vec<(usize, usize, usize, usize)> = bl.iter().map(Block::quad).collect();
    for blk in &bl {
        for e in &cs.cds_exons {
            if e.end < blk.k || e.start > blk.l {
                continue;
            }
            let d = blk.a as isize - blk.k as isize;
            let (a, b) = (e.start as isize + d, e.end as isize + d);
            if a >= 1 && b <= n as isize {
                cand.push((e.start, e.end, a as usize, b as usize));
            }
        }
    }
    for e in &cs.cds_exons {
        let le = e.end + 1 - e.start;
        for g in &ge.exons {
            let lg = g.end + 1 - g.start;
            if g.end <= n && 2 * le.min(lg) >= le.max(lg) {
                cand.push((e.start, e.end, g.start, g.end));
            }
        }
    }
    cand.sort_unstable();
    cand.dedup();

    let value = |q: (usize, usize, usize, usize)| -> i64 {
        global_score(&cs.seq[q.0 - 1..q.1], &h[q.2 - 1..q.3], scheme) as i64 + exon_score(q, &cs.cds_exons, ge, scheme) as i64
    };
    let link = |p: (usize, usize, usize, usize), q: (usize, usize, usize, usize)| -> i64 {
        if p.1 + 1 == q.0 {
            intron_score_seq(h, (p.3, q.2), scheme) as i64
        } else {
            gap_cost(q.0 - p.1 - 1, scheme) as i64
        }
    };
    let chain_value = |chain: &[(usize, usize, usize, usize)]| -> i64 {
        let Some(first) = chain.first() else { return gap_cost(m, scheme) as i64 };
        let mut v = gap_cost(first.0 - 1, scheme) as i64 + chain.iter().map(|&q| value(q)).sum::<i64>();
        for w in chain.windows(2) {
            v += link(w[0], w[1]);
        }
        v + gap_cost(m - chain.last().expect("non-empty").1, scheme) as i64
    };

    let vals: Vec<i64> = cand.iter().map(|&q| value(q)).collect();
    let mut best = vec![0i64; cand.len()];
    let mut prev = vec![usize::MAX; cand.len()];
    for j in 0..cand.len() {
        let q = cand[j];
        best[j] = gap_cost(q.0 - 1, scheme) as i64 + vals[j];
        for i in 0..j {
            let p = cand[i];
            if p.1 < q.0 && p.3 < q.2 {
                let v = best[i] + link(p, q) + vals[j];
                if v > best[j] {
                    best[j] = v;
                    prev[j] = i;
                }
            }
        }
    }
    let mut top: Option<(i64, usize)> = None;
    for j in 0..cand.len() {
        let v = best[j] + gap_cost(m - cand[j].1, scheme) as i64;
        if top.is_none_or(|(bv, _)| v > bv) {
            top = Some((v, j));
        }
    }
    let current: Vec<_> = bl.iter().map(Block::quad).collect();
    let Some((v, mut j)) = top else { return bl };
    if v <= chain_value(&current) {
        return bl;
    }
    let mut chain = Vec::new();
    loop {
        chain.push(cand[j]);
        if prev[j] == usize::MAX {
            break;
        }
        j = prev[j];
    }
    chain.reverse();
    chain.into_iter().map(|q| realign(&cs.seq, h, q, scheme)).collect()
}

/// Conserved blocks below `min_idty` become deleted; adjacent deleted blocks merge.
pub fn filter_min_identity(mut a: SplicedAlignment, min_idty: f64) -> SplicedAlignment {
    for blk in a.blocks.iter_mut() {
        if blk.is_conserved() && blk.identity < min_idty {
            *blk = Block::deleted(blk.k, blk.l);
        }
    }
    a.merge_deleted();
    a
}

/// Runs the full heuristic and the identity filter.
pub fn splice_align(cs: &CdsSequence, h: &Gene, ge: &GeneExonSet, scheme: &ScoringScheme, params: &Params) -> SplicedAlignment {
    if cs.is_empty() {
        return SplicedAlignment { cds_id: cs.cds_id.clone(), gene_id: h.id.clone(), blocks: vec![] };
    }
    let hs = &h.seq[..];
    let anchors = local_anchors(&cs.seq, hs, scheme, &params.tiers);
    let mut bl: Vec<Block> = Vec::new();
    for tier in 1..=4u8 {
        let group: Vec<Anchor> = anchors.iter().filter(|a| a.tier == tier).cloned().collect();
        if group.is_empty() {
            continue;
        }
        let chosen = select_compatible_anchors(&group, &bl, &cs.seq, hs);
        bl.extend(chosen);
        bl = extend_blocks_cds(bl, cs, hs);
    }
    bl = fill_gaps_global(bl, cs, hs, scheme, params);
    bl = correct_junctions(bl, cs, hs, scheme, params);
    bl = correct_block_ends_gene(bl, cs, ge, hs);
    bl.retain(|b| b.k <= b.l && b.a <= b.b);
    if params.rechain {
        bl = rechain(bl, cs, ge, hs, scheme);
    }
    let blocks: Vec<Block> = bl.iter().map(|b| realign(&cs.seq, hs, b.quad(), scheme)).collect();
    let a = SplicedAlignment::tile(&cs.cds_id, &h.id, cs.len(), blocks);
    debug_assert!(a.validate(cs.len(), h.len()).is_ok());
    filter_min_identity(a, params.min_idty)
}

/// Every `(CDS, gene)` pair to align, sorted by `(cds_id, gene_id)`. Pairs on
/// the CDS's own gene are included only with `with_self`.
pub fn all_pairs(ds: &Dataset, with_self: bool) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for c in ds.sorted_cds() {
        for g in ds.sorted_gene_ids() {
            if with_self || g != c.gene_id {
                out.push((c.id.clone(), g.to_string()));
            }
        }
    }
    out
}

/// Aligns the given pairs in parallel on the current rayon pool; output order
/// follows `pairs`.
pub fn align_pairs(ds: &Dataset, pairs: &[(String, String)], scheme: &ScoringScheme, params: &Params) -> Result<Vec<SplicedAlignment>> {
    pairs
        .par_iter()
        .map(|(c, g)| {
            let cds = ds.cds_by_id(c).ok_or_else(|| Error::UnknownSequence(c.clone()))?;
            let gene = ds.gene(g)?;
            let cs = ds.cds_sequence(cds)?;
            Ok(splice_align(&cs, gene, &ds.exon_set(g), scheme, params))
        })
        .collect()
}

/// Aligns every CDS on every other gene.
pub fn align_all(ds: &Dataset, scheme: &ScoringScheme, params: &Params, with_self: bool) -> Result<Vec<SplicedAlignment>> {
    align_pairs(ds, &all_pairs(ds, with_self), scheme, params)
}

/// Recomputes block alignments and identities of `a`, e.g. after reading it from TSV.
pub fn attach_details(a: &mut SplicedAlignment, ds: &Dataset, scheme: &ScoringScheme) -> Result<()> {
    let cds = ds.cds_by_id(&a.cds_id).ok_or_else(|| Error::UnknownSequence(a.cds_id.clone()))?;
    let cs = ds.cds_sequence(cds)?;
    let h = &ds.gene(&a.gene_id)?.seq;
    a.validate(cs.len(), h.len())?;
    for blk in a.blocks.iter_mut().filter(|b| b.is_conserved()) {
        *blk = realign(&cs.seq, h, blk.quad(), scheme);
    }
    Ok(())
}

/// CDS exons as `Exon`s in CDS coordinates, for callers holding only blocks.
pub fn cds_exon_bounds(cs: &CdsSequence) -> Vec<Exon> {
    cs.cds_exons.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{sap_objective, SapVariant};
    use crate::seqmodel::{cds_sequence, Cds};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dna(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
    }

    fn intron(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        let mut v = b"GT".to_vec();
        v.extend(dna(rng, n - 4));
        v.extend_from_slice(b"AG");
        v
    }

    /// A gene `exon intron exon intron exon` plus its CDS.
    fn three_exon(rng: &mut ChaCha8Rng, lens: [usize; 3], intron_len: usize) -> (Gene, Cds) {
        let mut seq = dna(rng, 30);
        let mut exons = Vec::new();
        for (i, &len) in lens.iter().enumerate() {
            let s = seq.len() + 1;
            seq.extend(dna(rng, len));
            exons.push(Exon::new(s, s + len - 1));
            if i < 2 {
                seq.extend(intron(rng, intron_len));
            }
        }
        seq.extend(dna(rng, 30));
        (Gene::new("h", &seq).unwrap(), Cds::new("c", "h", exons).unwrap())
    }

    fn anchor(k: usize, l: usize, a: usize, b: usize, score: i32) -> Anchor {
        Anchor { k, l, a, b, score, identity: 1.0, tier: 1 }
    }

    #[test]
    fn crossing_anchors_keep_the_heavier() {
        let cds = vec![b'A'; 100];
        let h = vec![b'A'; 200];
        let got = select_compatible_anchors(&[anchor(1, 20, 100, 119, 10), anchor(30, 50, 10, 30, 7)], &[], &cds, &h);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].quad(), (1, 20, 100, 119));
    }

    #[test]
    fn compatible_anchors_all_kept() {
        let cds = vec![b'A'; 100];
        let h = vec![b'A'; 200];
        let an = [anchor(1, 10, 1, 10, 5), anchor(20, 30, 40, 50, 5), anchor(40, 50, 90, 100, 5)];
        assert_eq!(select_compatible_anchors(&an, &[], &cds, &h).len(), 3);
    }

    #[test]
    fn anchors_conflicting_with_existing_blocks_are_dropped() {
        let cds = vec![b'A'; 100];
        let h = vec![b'A'; 200];
        let existing = [Block::conserved(1, 10, 1, 10, AlignmentDetail::ungapped(&cds[..10], &h[..10]))];
        let got = select_compatible_anchors(&[anchor(5, 20, 30, 45, 50), anchor(20, 30, 40, 50, 5)], &existing, &cds, &h);
        assert_eq!(got.iter().map(Block::quad).collect::<Vec<_>>(), vec![(20, 30, 40, 50)]);
    }

    /// Exhaustive subset search over eight anchors.
    #[test]
    fn chaining_matches_subset_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cds = vec![b'A'; 200];
        let h = vec![b'A'; 200];
        for _ in 0..300 {
            let an: Vec<Anchor> = (0..8)
                .map(|_| {
                    let k = rng.gen_range(1..150);
                    let a = rng.gen_range(1..150);
                    let len = rng.gen_range(5..40);
                    anchor(k, k + len, a, a + len, rng.gen_range(1..60))
                })
                .collect();
            let mut brute = 0i64;
            for mask in 0u32..256 {
                let set: Vec<&Anchor> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| &an[i]).collect();
                let ok = set.iter().enumerate().all(|(i, x)| set[i + 1..].iter().all(|y| disjoint(x.quad(), y.quad())));
                if ok {
                    brute = brute.max(set.iter().map(|x| x.score as i64).sum());
                }
            }
            let got = select_compatible_anchors(&an, &[], &cds, &h);
            let total: i64 = got
                .iter()
                .map(|b| an.iter().find(|x| x.quad() == b.quad()).unwrap().score as i64)
                .sum();
            assert_eq!(total, brute);
            for w in got.windows(2) {
                assert!(disjoint(w[0].quad(), w[1].quad()));
            }
        }
    }

    #[test]
    fn extension_to_cds_exon_start_on_exact_flank() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        // block covers CDS 3..10 of exon 1 (CDS 1..30)
        let a = c.exons[0].start + 2;
        let blk = Block::conserved(3, 10, a, a + 7, AlignmentDetail::ungapped(&cs.seq[2..10], &g.seq[a - 1..a + 7]));
        let out = extend_blocks_cds(vec![blk], &cs, &g.seq);
        assert_eq!(out[0].quad(), (1, 30, c.exons[0].start, c.exons[0].end));
    }

    #[test]
    fn extension_refused_when_identity_drops() {
        let cds = b"AAAAAAAAAAAAAAAAAAAA".to_vec();
        // gene flank before the block is all mismatches
        let mut h = b"CCCCC".to_vec();
        h.extend_from_slice(&cds[5..]);
        let g = Gene::new("h", &h).unwrap();
        let c = Cds::new("c", "h", vec![Exon::new(1, 20)]).unwrap();
        let mut cs = cds_sequence(&g, &c).unwrap();
        cs.seq = cds.clone();
        let blk = Block::conserved(6, 20, 6, 20, AlignmentDetail::ungapped(&cds[5..], &h[5..]));
        let out = extend_blocks_cds(vec![blk], &cs, &h);
        assert_eq!(out[0].quad(), (6, 20, 6, 20));
    }

    /// Right extension of the left block into the right block's CDS range
    /// trims the right block only when both identities strictly increase.
    #[test]
    fn overlap_extension_trims_neighbour() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let e1 = c.exons[0];
        let e2 = c.exons[1];
        // one substitution inside the left block keeps its identity below 1
        let mut hs = g.seq.clone();
        hs[e1.start + 4] = if hs[e1.start + 4] == b'A' { b'C' } else { b'A' };
        let g = Gene::new("h", &hs).unwrap();
        // left block: CDS 1..24 correct, extendable to 30
        let left = Block::conserved(1, 24, e1.start, e1.start + 23, AlignmentDetail::ungapped(&cs.seq[..24], &g.seq[e1.start - 1..e1.start + 23]));
        // right block wrongly claims CDS 26..40 with its first five columns in the intron
        let mut q = cs.seq[25..40].to_vec();
        let mut s = g.seq[e2.start - 6..e2.start - 1].to_vec();
        s.extend_from_slice(&g.seq[e2.start - 1..e2.start + 9]);
        q.truncate(15);
        let right = Block::conserved(26, 40, e2.start - 5, e2.start + 9, AlignmentDetail::ungapped(&q, &s));
        let (il, ir) = (ident(&left), ident(&right));
        let out = extend_blocks_cds(vec![left, right], &cs, &g.seq);
        assert_eq!(out[0].quad(), (1, 30, e1.start, e1.end));
        assert_eq!(out[1].k, 31);
        assert!(ident(&out[0]) >= il);
        assert!(ident(&out[1]) > ir, "{:?} vs {ir}", ident(&out[1]));
    }

    #[test]
    fn fill_region_identical_to_gene_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let (e1, e3) = (c.exons[0], c.exons[2]);
        let b1 = realign(&cs.seq, &g.seq, (1, 30, e1.start, e1.end), &ScoringScheme::default());
        let b3 = realign(&cs.seq, &g.seq, (61, 90, e3.start, e3.end), &ScoringScheme::default());
        let out = fill_gaps_global(vec![b1, b3], &cs, &g.seq, &ScoringScheme::default(), &Params::default());
        assert_eq!(out.len(), 3);
        assert_eq!(out[1].quad(), (31, 60, c.exons[1].start, c.exons[1].end));
    }

    #[test]
    fn fill_region_without_gene_interval_stays_deleted() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let s = ScoringScheme::default();
        let b1 = realign(&cs.seq, &g.seq, (1, 30, 1, 40), &s);
        let b3 = realign(&cs.seq, &g.seq, (61, 90, 41, 70), &s);
        let out = fill_gaps_global(vec![b1, b3], &cs, &g.seq, &s, &Params::default());
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn fill_region_matching_half_the_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = ScoringScheme::default();
        let left = dna(&mut rng, 20);
        let half = dna(&mut rng, 30);
        let junk = dna(&mut rng, 30);
        let right = dna(&mut rng, 20);
        let cds: Vec<u8> = [&left[..], &half, &junk, &right].concat();
        let h: Vec<u8> = [&left[..], &dna(&mut rng, 15), &half, &dna(&mut rng, 15), &right].concat();
        let g = Gene::new("h", &h).unwrap();
        let c = Cds::new("c", "h", vec![Exon::new(1, 100)]).unwrap();
        let mut cs = cds_sequence(&g, &c).unwrap();
        cs.seq = cds.clone();
        let b1 = realign(&cds, &h, (1, 20, 1, 20), &s);
        let b3 = realign(&cds, &h, (81, 100, 81, 100), &s);
        let out = fill_gaps_global(vec![b1, b3], &cs, &h, &s, &Params::default());
        let mids: Vec<_> = out[1..out.len() - 1].to_vec();
        assert_eq!(mids.len(), 1, "{:?}", out.iter().map(|b| (b.quad(), b.identity)).collect::<Vec<_>>());
        let m = &mids[0];
        // the conserved half sits at CDS 21..50 / gene 36..65 up to end slack
        assert!(m.k <= 23 && m.l >= 48 && m.a <= 38 && m.b >= 63, "{:?}", m.quad());
        assert!(m.identity >= Params::default().tau);
        let a = SplicedAlignment::tile("c", "h", 100, out);
        assert!(a.blocks.iter().any(|b| !b.is_conserved()));
    }

    #[test]
    fn junction_shift_by_one() {
        // exon 1 ends in G like the intron, so the junction can sit one base early
        let e1 = b"ATGGCCAAGCTGGAATTCAAGG".to_vec();
        let intr = b"GTAAGTCCCCCCCCCCCCCTAG".to_vec();
        let e2 = b"ACCGGTTCAAGCTTGGCATAA".to_vec();
        let h: Vec<u8> = [&e1[..], &intr, &e2].concat();
        let g = Gene::new("h", &h).unwrap();
        let x = e1.len();
        let a2 = x + intr.len() + 1;
        let c = Cds::new("c", "h", vec![Exon::new(1, x), Exon::new(a2, h.len())]).unwrap();
        let cs = cds_sequence(&g, &c).unwrap();
        let s = ScoringScheme::default();
        let b1 = realign(&cs.seq, &h, (1, x - 1, 1, x - 1), &s);
        let b2 = realign(&cs.seq, &h, (x, cs.len(), a2 - 1, h.len()), &s);
        assert!(!canonical_at(&h, x - 1, a2 - 1));
        assert_eq!((ident(&b1).value(), ident(&b2).value()), (1.0, 1.0));
        let out = correct_junctions(vec![b1, b2], &cs, &h, &s, &Params::default());
        assert_eq!(out[0].quad(), (1, x, 1, x));
        assert_eq!(out[1].quad(), (x + 1, cs.len(), a2, h.len()));
        assert_eq!((ident(&out[0]).value(), ident(&out[1]).value()), (1.0, 1.0));
    }

    #[test]
    fn canonical_junction_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let s = ScoringScheme::default();
        let bl: Vec<Block> = c
            .exons
            .iter()
            .zip(&cs.cds_exons)
            .map(|(ge, ce)| realign(&cs.seq, &g.seq, (ce.start, ce.end, ge.start, ge.end), &s))
            .collect();
        let out = correct_junctions(bl.clone(), &cs, &g.seq, &s, &Params::default());
        assert_eq!(out, bl);
    }

    #[test]
    fn junction_beyond_shift_limit_untouched() {
        // only a 40 nt shift reaches GT..AG; every closer placement lacks a GT
        let e1: Vec<u8> = b"ACACACACAC".repeat(6); // 60 nt without G
        let mut h = e1.clone();
        let tail = b"CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC"; // 50 nt
        h.extend_from_slice(tail);
        let e2: Vec<u8> = b"ACACACACAC".repeat(6);
        h.extend_from_slice(&e2);
        let g = Gene::new("h", &h).unwrap();
        let cds: Vec<u8> = [&e1[..], &e2[..]].concat();
        let c = Cds::new("c", "h", vec![Exon::new(1, 60), Exon::new(111, 170)]).unwrap();
        let cs = cds_sequence(&g, &c).unwrap();
        assert_eq!(cs.seq, cds);
        let s = ScoringScheme::default();
        let bl = vec![realign(&cds, &h, (1, 60, 1, 60), &s), realign(&cds, &h, (61, 120, 111, 170), &s)];
        let out = correct_junctions(bl.clone(), &cs, &h, &s, &Params::default());
        assert_eq!(out.iter().map(Block::quad).collect::<Vec<_>>(), bl.iter().map(Block::quad).collect::<Vec<_>>());
    }

    #[test]
    fn gene_end_trim_then_neighbour_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let ge = GeneExonSet::from_cds("h", [&c]);
        let (e1, e2) = (c.exons[0], c.exons[1]);
        // A[i] overruns exon 1 by 4 nt into the intron; A[i+1] starts 4 nt late
        let s = ScoringScheme::default();
        let left = Block::conserved(
            1,
            34,
            e1.start,
            e1.end + 4,
            AlignmentDetail::ungapped(&cs.seq[..34], &g.seq[e1.start - 1..e1.end + 4]),
        );
        let right = realign(&cs.seq, &g.seq, (35, 60, e2.start + 4, e2.end), &s);
        let out = correct_block_ends_gene(vec![left, right], &cs, &ge, &g.seq);
        assert_eq!(out[0].quad(), (1, 30, e1.start, e1.end));
        assert_eq!(out[1].quad(), (31, 60, e2.start, e2.end));
    }

    #[test]
    fn exon_ends_are_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (g, c) = three_exon(&mut rng, [30, 30, 30], 40);
        let cs = cds_sequence(&g, &c).unwrap();
        let ge = GeneExonSet::from_cds("h", [&c]);
        let s = ScoringScheme::default();
        let bl: Vec<Block> = c
            .exons
            .iter()
            .zip(&cs.cds_exons)
            .map(|(x, y)| realign(&cs.seq, &g.seq, (y.start, y.end, x.start, x.end), &s))
            .collect();
        assert_eq!(correct_block_ends_gene(bl.clone(), &cs, &ge, &g.seq), bl);
    }

    #[test]
    fn no_gene_extremity_inside_block_skips_trim() {
        let cds = b"ACGTACGTACGTACGTACGT".to_vec();
        let mut h = b"TTTTT".to_vec();
        h.extend_from_slice(&cds);
        h.extend_from_slice(b"TTTTT");
        let g = Gene::new("h", &h).unwrap();
        let c = Cds::new("c", "h", vec![Exon::new(6, 25)]).unwrap();
        let cs = cds_sequence(&g, &c).unwrap();
        let ge = GeneExonSet { gene_id: "h".into(), exons: [Exon::new(1, 3)].into_iter().collect() };
        let blk = Block::conserved(2, 19, 7, 24, AlignmentDetail::ungapped(&cds[1..19], &h[6..24]));
        let out = correct_block_ends_gene(vec![blk.clone()], &cs, &ge, &h);
        assert_eq!(out[0].quad(), blk.quad());
    }

    #[test]
    fn min_identity_filter() {
        let mk = |k, l, a, b, id: f64| Block { k, l, a, b, detail: None, identity: id };
        let a = SplicedAlignment { cds_id: "c".into(), gene_id: "h".into(), blocks: vec![mk(1, 10, 1, 10, 0.9), mk(11, 20, 30, 39, 0.5)] };
        assert_eq!(filter_min_identity(a.clone(), 0.0), a);
        let f = filter_min_identity(a, 0.6);
        assert!(f.blocks[0].is_conserved());
        assert!(!f.blocks[1].is_conserved());
    }

    #[test]
    fn self_alignment_recovers_exons() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lens = [rng.gen_range(20..120), rng.gen_range(20..120), rng.gen_range(20..120)];
            let il = rng.gen_range(40..200);
            let (g, c) = three_exon(&mut rng, lens, il);
            let cs = cds_sequence(&g, &c).unwrap();
            let ge = GeneExonSet::from_cds("h", [&c]);
            let a = splice_align(&cs, &g, &ge, &ScoringScheme::default(), &Params::default());
            let quads: Vec<_> = a.blocks.iter().map(Block::quad).collect();
            let want: Vec<_> = cs.cds_exons.iter().zip(&c.exons).map(|(x, y)| (x.start, x.end, y.start, y.end)).collect();
            assert_eq!(quads, want, "seed {seed}");
            assert_eq!(a.introns(), cs.source_introns);
        }
    }

    #[test]
    fn deleted_exon_becomes_deleted_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (g, c) = three_exon(&mut rng, [60, 45, 60], 80);
        let cs = cds_sequence(&g, &c).unwrap();
        // remove exon 2 and its downstream intron from the gene
        let e2 = c.exons[1];
        let e3 = c.exons[2];
        let mut h = g.seq[..e2.start - 1].to_vec();
        h.extend_from_slice(&g.seq[e3.start - 1..]);
        let hg = Gene::new("h2", &h).unwrap();
        let shift = e3.start - e2.start;
        let hc = Cds::new("c2", "h2", vec![c.exons[0], Exon::new(e3.start - shift, e3.end - shift)]).unwrap();
        let ge = GeneExonSet::from_cds("h2", [&hc]);
        let a = splice_align(&cs, &hg, &ge, &ScoringScheme::default(), &Params::default());
        let quads: Vec<_> = a.blocks.iter().map(Block::quad).collect();
        assert_eq!(quads, vec![(1, 60, c.exons[0].start, c.exons[0].end), (61, 105, 0, 0), (106, 165, hc.exons[1].start, hc.exons[1].end)]);
    }

    #[test]
    fn objective_variants_are_ordered_on_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (g, c) = three_exon(&mut rng, [45, 60, 45], 60);
        let cs = cds_sequence(&g, &c).unwrap();
        let ge = GeneExonSet::from_cds("h", [&c]);
        let s = ScoringScheme::default();
        let a = splice_align(&cs, &g, &ge, &s, &Params::default());
        let v = |x| sap_objective(&a, &cs.seq, &cs.cds_exons, &g.seq, &ge, &s, x);
        assert!(v(SapVariant::III) >= v(SapVariant::II) && v(SapVariant::II) >= v(SapVariant::I));
    }
}
