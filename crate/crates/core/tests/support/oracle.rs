//! Independent reference implementations used as test oracles. Nothing here
//! calls into the alignment kernels of the library.

#![allow(dead_code)]

const NEG: i64 = i64::MIN / 4;

pub struct Scores {
    pub mat: i64,
    pub mis: i64,
    pub open: i64,
    pub ext: i64,
    pub intr: [i64; 3],
    pub exon: [i64; 3],
}

pub const DEFAULT: Scores = Scores { mat: 2, mis: -1, open: -4, ext: -1, intr: [10, 4, 0], exon: [8, 3, 0] };

fn sub(x: u8, y: u8, s: &Scores) -> i64 {
    if x == y && x != b'N' {
        s.mat
    } else {
        s.mis
    }
}

fn gap(len: usize, s: &Scores) -> i64 {
    if len == 0 {
        0
    } else {
        s.open + s.ext * (len as i64 - 1)
    }
}

/// Semi-global score with every gap run enumerated by its full length, so no
/// affine state machine is involved. Leading and trailing overhangs are free.
pub fn semiglobal_bruteforce(x: &[u8], y: &[u8], s: &Scores) -> i64 {
    let (n, m) = (x.len(), y.len());
    let edge = |i: usize, j: usize| i == 0 || j == 0;
    let mut d = vec![vec![NEG; m + 1]; n + 1];
    let mut gx = vec![vec![NEG; m + 1]; n + 1];
    let mut gy = vec![vec![NEG; m + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=m {
            let before = if edge(i - 1, j - 1) { 0 } else { d[i - 1][j - 1].max(gx[i - 1][j - 1]).max(gy[i - 1][j - 1]) };
            d[i][j] = before + sub(x[i - 1], y[j - 1], s);
            for g in 1..=i {
                let p = if edge(i - g, j) { 0 } else { d[i - g][j].max(gy[i - g][j]) };
                gx[i][j] = gx[i][j].max(p + gap(g, s));
            }
            for g in 1..=j {
                let p = if edge(i, j - g) { 0 } else { d[i][j - g].max(gx[i][j - g]) };
                gy[i][j] = gy[i][j].max(p + gap(g, s));
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        for j in 1..=m {
            if i == n || j == m {
                best = best.max(d[i][j].max(gx[i][j]).max(gy[i][j]));
            }
        }
    }
    best
}

/// Global affine scores from one start `(k, a)` (1-based) to every end `(l, b)`.
/// `out[l - k][b - a]` holds the score of `x[k..=l]` against `y[a..=b]`.
pub fn global_from(x: &[u8], y: &[u8], k: usize, a: usize, s: &Scores) -> Vec<Vec<i64>> {
    let xs = &x[k - 1..];
    let ys = &y[a - 1..];
    let (n, m) = (xs.len(), ys.len());
    let mut mm = vec![vec![NEG; m + 1]; n + 1];
    let mut ix = vec![vec![NEG; m + 1]; n + 1];
    let mut iy = vec![vec![NEG; m + 1]; n + 1];
    mm[0][0] = 0;
    for i in 0..=n {
        for j in 0..=m {
            if i > 0 && j > 0 {
                let p = mm[i - 1][j - 1].max(ix[i - 1][j - 1]).max(iy[i - 1][j - 1]);
                mm[i][j] = p + sub(xs[i - 1], ys[j - 1], s);
            }
            if i > 0 {
                let open = mm[i - 1][j].max(iy[i - 1][j]) + s.open;
                ix[i][j] = open.max(ix[i - 1][j] + s.ext);
            }
            if j > 0 {
                let open = mm[i][j - 1].max(ix[i][j - 1]) + s.open;
                iy[i][j] = open.max(iy[i][j - 1] + s.ext);
            }
        }
    }
    (1..=n).map(|i| (1..=m).map(|j| mm[i][j].max(ix[i][j]).max(iy[i][j])).collect()).collect()
}

fn intron(h: &[u8], b: usize, a: usize, s: &Scores) -> i64 {
    let len = a.saturating_sub(b + 1);
    if len < 4 {
        return s.intr[2];
    }
    let d = h[b] == b'G' && h[b + 1] == b'T';
    let ac = h[a - 3] == b'A' && h[a - 2] == b'G';
    match (d, ac) {
        (true, true) => s.intr[0],
        (false, false) => s.intr[2],
        _ => s.intr[1],
    }
}

/// Exact SAP_III optimum by dynamic programming over every block `(k,l,a,b)`.
///
/// `fc[l][b]`: best prefix ending with a conserved block that ends at `(l, b)`.
/// `fd[l][b]`: best prefix ending with a deleted block at `l` whose last
/// conserved block ended at gene position `b` (0 if none).
/// Returns the optimum and one optimal chain of conserved blocks.
pub fn sap3_optimum(
    x: &[u8],
    cds_exons: &[(usize, usize)],
    h: &[u8],
    gene_exons: &[(usize, usize)],
    s: &Scores,
) -> (i64, Vec<(usize, usize, usize, usize)>) {
    #[derive(Clone, Copy)]
    enum From {
        Start,
        Cons(usize),
        Del(usize),
    }
    let (m, n) = (x.len(), h.len());
    // (value, block, predecessor)
    let mut fc = vec![vec![(NEG, (0, 0, 0, 0), From::Start); n + 1]; m + 1];
    // (value, start of the deleted block, gene end of the conserved block before it)
    let mut fd = vec![vec![(NEG, 0usize, 0usize); n + 1]; m + 1];
    for k in 1..=m {
        let mut pre = vec![(NEG, From::Start); n + 1];
        for a in 1..=n {
            if k == 1 {
                pre[a] = (0, From::Start);
                continue;
            }
            for bp in 0..a {
                if fc[k - 1][bp].0 > NEG {
                    let v = fc[k - 1][bp].0 + intron(h, bp, a, s);
                    if v > pre[a].0 {
                        pre[a] = (v, From::Cons(bp));
                    }
                }
                if fd[k - 1][bp].0 > pre[a].0 {
                    pre[a] = (fd[k - 1][bp].0, From::Del(bp));
                }
            }
        }
        for l in k..=m {
            let cost = gap(l + 1 - k, s);
            if k == 1 {
                if cost > fd[l][0].0 {
                    fd[l][0] = (cost, 1, 0);
                }
            } else {
                for bp in 0..=n {
                    if fc[k - 1][bp].0 > NEG && fc[k - 1][bp].0 + cost > fd[l][bp].0 {
                        fd[l][bp] = (fc[k - 1][bp].0 + cost, k, bp);
                    }
                }
            }
        }
        for a in 1..=n {
            if pre[a].0 <= NEG {
                continue;
            }
            let sims = global_from(x, h, k, a, s);
            let cds_start = cds_exons.iter().find(|e| e.0 == k);
            for l in k..=m {
                let in_cds = cds_start.is_some_and(|e| e.1 == l);
                for b in a..=n {
                    let in_gene = gene_exons.contains(&(a, b));
                    let ex = match (in_cds, in_gene) {
                        (true, true) => s.exon[0],
                        (false, false) => s.exon[2],
                        _ => s.exon[1],
                    };
                    let v = pre[a].0 + sims[l - k][b - a] + ex;
                    if v > fc[l][b].0 {
                        fc[l][b] = (v, (k, l, a, b), pre[a].1);
                    }
                }
            }
        }
    }
    let mut best = (NEG, 0usize, true);
    for b in 0..=n {
        if fc[m][b].0 > best.0 {
            best = (fc[m][b].0, b, true);
        }
        if fd[m][b].0 > best.0 {
            best = (fd[m][b].0, b, false);
        }
    }
    let mut chain = Vec::new();
    let (mut l, mut b, mut cons) = (m, best.1, best.2);
    while l > 0 {
        if cons {
            let (_, q, from) = fc[l][b];
            chain.push(q);
            match from {
                From::Start => break,
                From::Cons(bp) => (l, b, cons) = (q.0 - 1, bp, true),
                From::Del(bp) => (l, b, cons) = (q.0 - 1, bp, false),
            }
        } else {
            let (_, k, bp) = fd[l][b];
            if k == 1 {
                break;
            }
            (l, b, cons) = (k - 1, bp, true);
        }
    }
    chain.reverse();
    (best.0, chain)
}
