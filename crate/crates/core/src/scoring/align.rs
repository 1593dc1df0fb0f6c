//! Affine-gap nucleotide alignment kernels.
//!
//! Three-state Gotoh recurrences over `s1` (rows) and `s2` (columns). A gap
//! of length `L` costs `gap_open + gap_extend * (L - 1)`. Either gap state may
//! be opened from any state, so a gap in one sequence may directly follow a
//! gap in the other.

use std::cmp::Ordering;
use std::fmt;

use super::ScoringScheme;

pub const GAP: u8 = b'-';
const NEG: i32 = i32::MIN / 4;

/// Substitution score; `N` never matches.
#[inline]
pub fn subst(a: u8, b: u8, scheme: &ScoringScheme) -> i32 {
    if a == b && a != b'N' {
        scheme.match_score
    } else {
        scheme.mismatch
    }
}

#[inline]
pub fn is_match(a: u8, b: u8) -> bool {
    a == b && a != b'N' && a != GAP
}

/// Cost of a gap of `len` columns (0 for an empty gap).
pub fn gap_cost(len: usize, scheme: &ScoringScheme) -> i32 {
    if len == 0 {
        0
    } else {
        scheme.gap_open + scheme.gap_extend * (len as i32 - 1)
    }
}

/// Identity as an exact fraction `matches / columns`, compared without rounding.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity {
    pub matches: usize,
    pub columns: usize,
}

impl Identity {
    pub fn new(matches: usize, columns: usize) -> Self {
        Identity { matches, columns }
    }

    pub fn value(&self) -> f64 {
        if self.columns == 0 {
            0.0
        } else {
            self.matches as f64 / self.columns as f64
        }
    }

    pub fn add(self, other: Identity) -> Identity {
        Identity::new(self.matches + other.matches, self.columns + other.columns)
    }

    /// Exact comparison of the sums `self_a + self_b` and `other_a + other_b`.
    pub fn cmp_sum(a: (Identity, Identity), b: (Identity, Identity)) -> Ordering {
        let num = |x: Identity, y: Identity| (x.matches as i128) * (y.columns.max(1) as i128) + (y.matches as i128) * (x.columns.max(1) as i128);
        let den = |x: Identity, y: Identity| (x.columns.max(1) as i128) * (y.columns.max(1) as i128);
        (num(a.0, a.1) * den(b.0, b.1)).cmp(&(num(b.0, b.1) * den(a.0, a.1)))
    }
}

impl PartialEq for Identity {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Identity {}

impl PartialOrd for Identity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Identity {
    fn cmp(&self, other: &Self) -> Ordering {
        let l = self.matches as u128 * other.columns.max(1) as u128;
        let r = other.matches as u128 * self.columns.max(1) as u128;
        l.cmp(&r)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.value())
    }
}

/// A gapped two-row alignment. Stripping gaps from `query` / `subject`
/// yields the two aligned segments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentDetail {
    pub query: Vec<u8>,
    pub subject: Vec<u8>,
}

impl AlignmentDetail {
    pub fn ungapped(query: &[u8], subject: &[u8]) -> Self {
        assert_eq!(query.len(), subject.len(), "ungapped rows differ in length");
        AlignmentDetail { query: query.to_vec(), subject: subject.to_vec() }
    }

    pub fn columns(&self) -> usize {
        self.query.len()
    }

    pub fn identity(&self) -> Identity {
        let m = self.query.iter().zip(&self.subject).filter(|(a, b)| is_match(**a, **b)).count();
        Identity::new(m, self.columns())
    }

    pub fn gap_columns(&self) -> usize {
        self.query.iter().zip(&self.subject).filter(|(a, b)| **a == GAP || **b == GAP).count()
    }

    /// Number of maximal gap runs (either row).
    pub fn gap_count(&self) -> usize {
        let mut runs = 0;
        let mut prev = (false, false);
        for (a, b) in self.query.iter().zip(&self.subject) {
            let cur = (*a == GAP, *b == GAP);
            if (cur.0 && !prev.0) || (cur.1 && !prev.1) {
                runs += 1;
            }
            prev = cur;
        }
        runs
    }

    pub fn query_residues(&self) -> Vec<u8> {
        self.query.iter().copied().filter(|&c| c != GAP).collect()
    }

    pub fn subject_residues(&self) -> Vec<u8> {
        self.subject.iter().copied().filter(|&c| c != GAP).collect()
    }

    /// Global (end-gaps penalized) score of these rows.
    pub fn score(&self, scheme: &ScoringScheme) -> i32 {
        let mut total = 0;
        let mut run: Option<(bool, usize)> = None;
        let flush = |run: &mut Option<(bool, usize)>, total: &mut i32| {
            if let Some((_, len)) = run.take() {
                *total += gap_cost(len, scheme);
            }
        };
        for (&a, &b) in self.query.iter().zip(&self.subject) {
            match (a == GAP, b == GAP) {
                (false, false) => {
                    flush(&mut run, &mut total);
                    total += subst(a, b, scheme);
                }
                (true, true) => {}
                (qgap, _) => match run {
                    Some((side, ref mut len)) if side == qgap => *len += 1,
                    _ => {
                        flush(&mut run, &mut total);
                        run = Some((qgap, 1));
                    }
                },
            }
        }
        flush(&mut run, &mut total);
        total
    }
}

/// `matched columns / total columns`; gap columns count in the denominator.
pub fn block_identity(detail: &AlignmentDetail) -> f64 {
    detail.identity().value()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Global,
    SemiGlobal,
}

// Traceback byte layout: bits 0-1 source of H (0 diag, 1 up, 2 left),
// bit 2 up-state extended, bit 3 left-state extended.
const H_DIAG: u8 = 0;
const H_UP: u8 = 1;
const H_LEFT: u8 = 2;
const UP_EXT: u8 = 4;
const LEFT_EXT: u8 = 8;

fn dp(s1: &[u8], s2: &[u8], scheme: &ScoringScheme, mode: Mode) -> (i32, AlignmentDetail) {
    let (m, n) = (s1.len(), s2.len());
    let w = n + 1;
    let mut tb = vec![0u8; (m + 1) * w];
    let border = |len: usize| if mode == Mode::Global { gap_cost(len, scheme) } else { 0 };

    let mut h_prev: Vec<i32> = (0..=n).map(border).collect();
    let mut up_prev: Vec<i32> = vec![NEG; n + 1];
    for j in 1..=n {
        tb[j] = H_LEFT | if j > 1 { LEFT_EXT } else { 0 };
    }
    let mut h_cur = vec![0i32; n + 1];
    let mut up_cur = vec![NEG; n + 1];

    // best end cell for semi-global: last row or last column
    let mut best = (h_prev[n], 0usize, n);
    if mode == Mode::SemiGlobal {
        for (j, &v) in h_prev.iter().enumerate() {
            if v > best.0 || (v == best.0 && better_end((0, j), (best.1, best.2), m, n)) {
                best = (v, 0, j);
            }
        }
    }

    for i in 1..=m {
        h_cur[0] = border(i);
        up_cur[0] = if mode == Mode::Global { gap_cost(i, scheme) } else { NEG };
        tb[i * w] = H_UP | if i > 1 { UP_EXT } else { 0 };
        let mut left = NEG;
        let a = s1[i - 1];
        for j in 1..=n {
            let mut t = 0u8;
            let up_open = h_prev[j] + scheme.gap_open;
            let up_ext = up_prev[j] + scheme.gap_extend;
            let up = if up_ext > up_open {
                t |= UP_EXT;
                up_ext
            } else {
                up_open
            };
            let left_open = h_cur[j - 1] + scheme.gap_open;
            let left_ext = left + scheme.gap_extend;
            left = if left_ext > left_open {
                t |= LEFT_EXT;
                left_ext
            } else {
                left_open
            };
            let diag = h_prev[j - 1] + subst(a, s2[j - 1], scheme);
            let h = if diag >= up && diag >= left {
                diag
            } else if up >= left {
                t |= H_UP;
                up
            } else {
                t |= H_LEFT;
                left
            };
            h_cur[j] = h;
            up_cur[j] = up;
            tb[i * w + j] = t;
        }
        if mode == Mode::SemiGlobal {
            let v = h_cur[n];
            if v > best.0 || (v == best.0 && better_end((i, n), (best.1, best.2), m, n)) {
                best = (v, i, n);
            }
            if i == m {
                for (j, &v) in h_cur.iter().enumerate() {
                    if v > best.0 || (v == best.0 && better_end((m, j), (best.1, best.2), m, n)) {
                        best = (v, m, j);
                    }
                }
            }
        }
        std::mem::swap(&mut h_prev, &mut h_cur);
        std::mem::swap(&mut up_prev, &mut up_cur);
    }

    let (score, ei, ej) = match mode {
        Mode::Global => (h_prev[n], m, n),
        Mode::SemiGlobal => best,
    };

    let mut q = Vec::with_capacity(m + n);
    let mut s = Vec::with_capacity(m + n);
    // free trailing overhangs
    for jj in (ej..n).rev() {
        q.push(GAP);
        s.push(s2[jj]);
    }
    for ii in (ei..m).rev() {
        q.push(s1[ii]);
        s.push(GAP);
    }
    let (mut i, mut j) = (ei, ej);
    // state: 0 = H, 1 = up, 2 = left
    let mut state = 0u8;
    while i > 0 || j > 0 {
        if mode == Mode::SemiGlobal && (i == 0 || j == 0) {
            break;
        }
        let t = tb[i * w + j];
        match state {
            0 => match t & 3 {
                H_DIAG if i > 0 && j > 0 => {
                    q.push(s1[i - 1]);
                    s.push(s2[j - 1]);
                    i -= 1;
                    j -= 1;
                }
                H_UP => state = 1,
                H_LEFT => state = 2,
                _ => state = if i > 0 { 1 } else { 2 },
            },
            1 => {
                q.push(s1[i - 1]);
                s.push(GAP);
                if t & UP_EXT == 0 {
                    state = 0;
                }
                i -= 1;
            }
            _ => {
                q.push(GAP);
                s.push(s2[j - 1]);
                if t & LEFT_EXT == 0 {
                    state = 0;
                }
                j -= 1;
            }
        }
    }
    // free leading overhangs
    while i > 0 {
        q.push(s1[i - 1]);
        s.push(GAP);
        i -= 1;
    }
    while j > 0 {
        q.push(GAP);
        s.push(s2[j - 1]);
        j -= 1;
    }
    q.reverse();
    s.reverse();
    (score, AlignmentDetail { query: q, subject: s })
}

// Among equal-scoring semi-global end cells prefer (m, n), then the longer
// consumption of s2 along the last row, then of s1 along the last column.
fn better_end(cand: (usize, usize), cur: (usize, usize), m: usize, n: usize) -> bool {
    let key = |(i, j): (usize, usize)| {
        if (i, j) == (m, n) {
            (3, 0)
        } else if i == m {
            (2, j)
        } else {
            (1, i)
        }
    };
    key(cand) > key(cur)
}

/// Optimal affine-gap alignment with free end gaps in both sequences.
///
/// Ties in the traceback prefer the diagonal, then `up` (a residue of `s1`
/// against a gap), then `left`.
pub fn semiglobal_align(s1: &[u8], s2: &[u8], scheme: &ScoringScheme) -> (i32, AlignmentDetail) {
    dp(s1, s2, scheme, Mode::SemiGlobal)
}

/// Optimal affine-gap global alignment (end gaps penalized).
pub fn global_align(s1: &[u8], s2: &[u8], scheme: &ScoringScheme) -> (i32, AlignmentDetail) {
    dp(s1, s2, scheme, Mode::Global)
}

/// Global alignment score in linear memory.
pub fn global_score(s1: &[u8], s2: &[u8], scheme: &ScoringScheme) -> i32 {
    let n = s2.len();
    if s1.is_empty() {
        return gap_cost(n, scheme);
    }
    if n == 0 {
        return gap_cost(s1.len(), scheme);
    }
    let mut h_prev: Vec<i32> = (0..=n).map(|j| gap_cost(j, scheme)).collect();
    let mut up_prev = vec![NEG; n + 1];
    let mut h_cur = vec![0i32; n + 1];
    let mut up_cur = vec![NEG; n + 1];
    for (i, &a) in s1.iter().enumerate() {
        h_cur[0] = gap_cost(i + 1, scheme);
        up_cur[0] = h_cur[0];
        let mut left = NEG;
        for j in 1..=n {
            let up = (h_prev[j] + scheme.gap_open).max(up_prev[j] + scheme.gap_extend);
            left = (h_cur[j - 1] + scheme.gap_open).max(left + scheme.gap_extend);
            let diag = h_prev[j - 1] + subst(a, s2[j - 1], scheme);
            h_cur[j] = diag.max(up).max(left);
            up_cur[j] = up;
        }
        std::mem::swap(&mut h_prev, &mut h_cur);
        std::mem::swap(&mut up_prev, &mut up_cur);
    }
    h_prev[n]
}
