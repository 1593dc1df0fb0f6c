//! Translated seed-and-extend anchors between a CDS and a gene.
//!
//! Both sequences are translated in their three forward frames. Every exact
//! amino-acid match of `seed_len` residues is extended without gaps under an
//! X-drop rule. Extensions that land on the same nucleotide diagonal and
//! overlap are merged, so the three codon phasings of one conserved stretch
//! yield a single anchor.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::ScoringScheme;

const CODE: &[u8; 64] = b"FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

fn base_index(b: u8) -> Option<usize> {
    match b {
        b'T' => Some(0),
        b'C' => Some(1),
        b'A' => Some(2),
        b'G' => Some(3),
        _ => None,
    }
}

/// Standard genetic code; codons with `N` become `X`, stops `*`.
pub fn translate_codon(c: &[u8]) -> u8 {
    match (base_index(c[0]), base_index(c[1]), base_index(c[2])) {
        (Some(x), Some(y), Some(z)) => CODE[x * 16 + y * 4 + z],
        _ => b'X',
    }
}

/// Translation of `seq[frame..]` in whole codons.
pub fn translate(seq: &[u8], frame: usize) -> Vec<u8> {
    if frame >= seq.len() {
        return Vec::new();
    }
    seq[frame..].chunks_exact(3).map(translate_codon).collect()
}

#[inline]
fn aa_score(x: u8, y: u8, scheme: &ScoringScheme) -> i32 {
    if x == y && x != b'*' && x != b'X' {
        scheme.aa_match
    } else {
        scheme.aa_mismatch
    }
}

/// Raw-score cutoffs standing in for E-value bands; tier 1 is the most reliable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnchorTiers {
    pub t1: i32,
    pub t2: i32,
    pub t3: i32,
}

impl Default for AnchorTiers {
    /// Frozen output of `calibrate_tiers(&ScoringScheme::default(), 1, ..)`.
    fn default() -> Self {
        AnchorTiers { t1: 32, t2: 22, t3: 13 }
    }
}

impl AnchorTiers {
    pub fn validate(&self) -> Result<()> {
        if self.t1 > self.t2 && self.t2 > self.t3 && self.t3 > 0 {
            Ok(())
        } else {
            Err(Error::Config("anchor tiers must satisfy t1 > t2 > t3 > 0".into()))
        }
    }

    pub fn tier(&self, score: i32) -> u8 {
        if score >= self.t1 {
            1
        } else if score >= self.t2 {
            2
        } else if score >= self.t3 {
            3
        } else {
            4
        }
    }
}

/// An ungapped local match in nucleotide coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub k: usize,
    pub l: usize,
    pub a: usize,
    pub b: usize,
    pub score: i32,
    pub identity: f64,
    pub tier: u8,
}

impl Anchor {
    pub fn quad(&self) -> (usize, usize, usize, usize) {
        (self.k, self.l, self.a, self.b)
    }

    pub fn diagonal(&self) -> isize {
        self.a as isize - self.k as isize
    }
}

fn nt_identity(cds: &[u8], gene: &[u8], k: usize, l: usize, a: usize) -> f64 {
    let len = l + 1 - k;
    let m = cds[k - 1..l].iter().zip(&gene[a - 1..a - 1 + len]).filter(|(x, y)| x == y && **x != b'N').count();
    m as f64 / len as f64
}

/// Extends a seed at `(i, j)` in amino-acid space. Returns `(i0, i1, j0, score)`, end exclusive.
fn extend(p: &[u8], q: &[u8], i: usize, j: usize, w: usize, scheme: &ScoringScheme) -> (usize, usize, usize, i32) {
    let seed: i32 = (0..w).map(|t| aa_score(p[i + t], q[j + t], scheme)).sum();

    let (mut run, mut best, mut best_len) = (0, 0, 0);
    let mut t = 0;
    while i + w + t < p.len() && j + w + t < q.len() {
        run += aa_score(p[i + w + t], q[j + w + t], scheme);
        t += 1;
        if run > best {
            best = run;
            best_len = t;
        }
        if best - run > scheme.xdrop {
            break;
        }
    }
    let right = (best, best_len);

    let (mut run, mut best, mut best_len) = (0, 0, 0);
    let mut t = 0;
    while t < i && t < j {
        run += aa_score(p[i - t - 1], q[j - t - 1], scheme);
        t += 1;
        if run > best {
            best = run;
            best_len = t;
        }
        if best - run > scheme.xdrop {
            break;
        }
    }
    let left = (best, best_len);

    (i - left.1, i + w + right.1, j - left.1, seed + left.0 + right.0)
}

/// Translated anchors between `cds` and `gene`, sorted by `(k, a)`.
pub fn local_anchors(cds: &[u8], gene: &[u8], scheme: &ScoringScheme, tiers: &AnchorTiers) -> Vec<Anchor> {
    let w = scheme.seed_len.max(1);
    let mut raw: Vec<(isize, usize, usize, i32)> = Vec::new();

    let gene_frames: Vec<Vec<u8>> = (0..3).map(|f| translate(gene, f)).collect();
    let indices: Vec<HashMap<&[u8], Vec<usize>>> = gene_frames
        .iter()
        .map(|q| {
            let mut idx: HashMap<&[u8], Vec<usize>> = HashMap::new();
            if q.len() >= w {
                for j in 0..=q.len() - w {
                    let win = &q[j..j + w];
                    if win.iter().all(|&c| c != b'*' && c != b'X') {
                        idx.entry(win).or_default().push(j);
                    }
                }
            }
            idx
        })
        .collect();

    for fc in 0..3 {
        let p = translate(cds, fc);
        if p.len() < w {
            continue;
        }
        for fg in 0..3 {
            let q = &gene_frames[fg];
            let idx = &indices[fg];
            let mut covered: HashMap<isize, usize> = HashMap::new();
            for i in 0..=p.len() - w {
                let Some(hits) = idx.get(&p[i..i + w]) else { continue };
                for &j in hits {
                    let d = j as isize - i as isize;
                    if covered.get(&d).is_some_and(|&end| end > i) {
                        continue;
                    }
                    let (i0, i1, j0, score) = extend(&p, q, i, j, w, scheme);
                    covered.insert(d, i1);
                    let k = fc + 3 * i0 + 1;
                    let l = fc + 3 * i1;
                    let a = fg + 3 * j0 + 1;
                    raw.push((a as isize - k as isize, k, l, score));
                }
            }
        }
    }

    // merge overlapping or abutting extensions on one nucleotide diagonal
    raw.sort_unstable();
    let mut merged: Vec<(isize, usize, usize, i32)> = Vec::new();
    for r in raw {
        match merged.last_mut() {
            Some(m) if m.0 == r.0 && r.1 <= m.2 + 1 => {
                m.2 = m.2.max(r.2);
                m.3 = m.3.max(r.3);
            }
            _ => merged.push(r),
        }
    }

    let mut out: Vec<Anchor> = merged
        .into_iter()
        .map(|(d, k, l, score)| {
            let a = (k as isize + d) as usize;
            let b = (l as isize + d) as usize;
            Anchor { k, l, a, b, score, identity: nt_identity(cds, gene, k, l, a), tier: tiers.tier(score) }
        })
        .collect();
    out.sort_by_key(|x| (x.k, x.a, x.l, x.b));
    out
}
