//! Consumers of a multiple spliced alignment: CDS groups and the multiple CDS alignment.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::msa_spliced::MultipleSplicedAlignment;
use crate::ortho_pair::{ClusterSet, UnionFind};
use crate::scoring::align::{subst, GAP};
use crate::scoring::{semiglobal_align, ScoringScheme};
use crate::seqmodel::{write_fasta, Dataset};

/// CDS groups read off the multi-blocks, with the pair types found in each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsaClusters {
    pub set: ClusterSet,
    /// Per cluster: contains a same-gene pair (close paralogs).
    pub has_paralogs: Vec<bool>,
    /// Per cluster: contains a pair from different genes.
    pub has_orthologs: Vec<bool>,
}

impl MsaClusters {
    /// Cluster lines with a flag column: `P`, `O`, `OP`, or `-` for singletons.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.set.clusters.iter().enumerate() {
            let flag = match (self.has_orthologs[i], self.has_paralogs[i]) {
                (true, true) => "OP",
                (true, false) => "O",
                (false, true) => "P",
                (false, false) => "-",
            };
            let _ = writeln!(out, "{}\t{flag}", c.join(","));
        }
        out
    }
}

/// Groups CDS present in exactly the same multi-blocks with segment lengths
/// congruent modulo 3, closed under transitivity.
pub fn cluster_from_msa(msa: &MultipleSplicedAlignment) -> MsaClusters {
    let reg = &msa.registry;
    let cds: Vec<usize> = reg.cds_indices().collect();
    let same = |x: usize, y: usize| {
        msa.multiblocks.iter().all(|m| match (m.get(x), m.get(y)) {
            (None, None) => true,
            (Some((sx, ex)), Some((sy, ey))) => ((ex - sx) as isize - (ey - sy) as isize) % 3 == 0,
            _ => false,
        })
    };
    let mut uf = UnionFind::new(cds.len());
    for i in 0..cds.len() {
        for j in i + 1..cds.len() {
            if same(cds[i], cds[j]) {
                uf.union(i, j);
            }
        }
    }
    let ids = cds.iter().map(|&x| reg.seqs[x].id.as_str());
    let mut edges = Vec::new();
    for i in 0..cds.len() {
        edges.push((reg.seqs[cds[i]].id.as_str(), reg.seqs[cds[uf.find(i)]].id.as_str()));
    }
    let set = ClusterSet::from_edges(ids, edges);
    let gene_of: HashMap<&str, &str> = cds.iter().map(|&x| (reg.seqs[x].id.as_str(), reg.seqs[x].gene_id.as_str())).collect();
    let mut has_paralogs = Vec::new();
    let mut has_orthologs = Vec::new();
    for c in &set.clusters {
        let genes: Vec<&str> = c.iter().map(|m| gene_of[m.as_str()]).collect();
        let mut p = false;
        let mut o = false;
        for i in 0..genes.len() {
            for j in i + 1..genes.len() {
                if genes[i] == genes[j] {
                    p = true;
                } else {
                    o = true;
                }
            }
        }
        has_paralogs.push(p);
        has_orthologs.push(o);
    }
    MsaClusters { set, has_paralogs, has_orthologs }
}

/// Aligns the segments of one multi-block; rows come back in input order.
pub trait SegmentAligner: Sync {
    fn align(&self, segments: &[(String, Vec<u8>)]) -> Result<Vec<Vec<u8>>>;
}

/// Built-in progressive aligner.
#[derive(Debug, Clone)]
pub struct ProgressiveAligner {
    pub scheme: ScoringScheme,
}

impl SegmentAligner for ProgressiveAligner {
    fn align(&self, segments: &[(String, Vec<u8>)]) -> Result<Vec<Vec<u8>>> {
        Ok(align_multiblock(segments, &self.scheme))
    }
}

/// Runs an external program that reads FASTA on stdin and writes aligned FASTA on stdout.
#[derive(Debug, Clone)]
pub struct ExternalAligner {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalAligner {
    /// Splits a command line on whitespace.
    pub fn from_command(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| Error::InvalidParam("empty aligner command".into()))?;
        Ok(ExternalAligner { program, args: parts.collect() })
    }
}

impl SegmentAligner for ExternalAligner {
    fn align(&self, segments: &[(String, Vec<u8>)]) -> Result<Vec<Vec<u8>>> {
        if segments.len() == 1 {
            return Ok(vec![segments[0].1.clone()]);
        }
        let input = write_fasta(segments.iter().enumerate().map(|(i, (_, s))| (format!("s{i}"), s)), 60);
        let fail = |m: String| Error::Internal(format!("external aligner `{}`: {m}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        writer.join().map_err(|_| fail("stdin writer panicked".into()))?.map_err(|e| fail(e.to_string()))?;
        if !out.status.success() {
            return Err(fail(format!("exit status {}", out.status)));
        }
        let rows = parse_aligned_fasta(&String::from_utf8_lossy(&out.stdout))?;
        let mut result = Vec::with_capacity(segments.len());
        for (i, (id, seq)) in segments.iter().enumerate() {
            let row = rows.get(&format!("s{i}")).ok_or_else(|| fail(format!("row for {id} missing")))?;
            if strip_gaps(row) != *seq {
                return Err(Error::RoundTrip(id.clone()));
            }
            result.push(row.clone());
        }
        if result.iter().any(|r| r.len() != result[0].len()) {
            return Err(fail("rows of unequal length".into()));
        }
        Ok(result)
    }
}

fn strip_gaps(row: &[u8]) -> Vec<u8> {
    row.iter().copied().filter(|&c| c != GAP).collect()
}

/// Reads aligned FASTA: bases, `N` and `-`, uppercased; wraps joined.
pub fn parse_aligned_fasta(text: &str) -> Result<IndexMap<String, Vec<u8>>> {
    let mut out: IndexMap<String, Vec<u8>> = IndexMap::new();
    let mut cur: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(h) = line.strip_prefix('>') {
            let id = h.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() || out.contains_key(&id) {
                return Err(Error::Parse { line: lineno + 1, msg: "empty or repeated header".into() });
            }
            out.insert(id.clone(), Vec::new());
            cur = Some(id);
        } else if !line.is_empty() {
            let id = cur.as_ref().ok_or(Error::Parse { line: lineno + 1, msg: "data before header".into() })?;
            for c in line.bytes() {
                let c = c.to_ascii_uppercase();
                if !b"ACGTN-".contains(&c) {
                    return Err(Error::InvalidBase { id: id.clone(), ch: c as char });
                }
                out[id.as_str()].push(c);
            }
        }
    }
    Ok(out)
}

const ALPHABET: &[u8; 5] = b"ACGTN";

fn code(c: u8) -> Option<usize> {
    ALPHABET.iter().position(|&a| a == c)
}

/// Residue counts per column of a set of gapped rows.
struct Profile {
    members: Vec<usize>,
    rows: Vec<Vec<u8>>,
    counts: Vec<[i64; 5]>,
}

impl Profile {
    fn single(i: usize, seq: &[u8]) -> Self {
        let mut p = Profile { members: vec![i], rows: vec![seq.to_vec()], counts: Vec::new() };
        p.recount();
        p
    }

    fn recount(&mut self) {
        let width = self.rows[0].len();
        self.counts = vec![[0; 5]; width];
        for r in &self.rows {
            for (c, &x) in r.iter().enumerate() {
                if let Some(k) = code(x) {
                    self.counts[c][k] += 1;
                }
            }
        }
    }
}

/// Global profile-profile alignment with affine gaps; column pairs score the
/// sum of substitution scores over residue pairs, gap columns are charged
/// once per row pair.
fn align_profiles(p: &Profile, q: &Profile, scheme: &ScoringScheme) -> Profile {
    let (n, m) = (p.counts.len(), q.counts.len());
    let pairs = (p.rows.len() * q.rows.len()) as i64;
    let mut sub = [[0i64; 5]; 5];
    for (i, row) in sub.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = subst(ALPHABET[i], ALPHABET[j], scheme) as i64;
        }
    }
    let col = |i: usize, j: usize| -> i64 {
        let (a, b) = (&p.counts[i], &q.counts[j]);
        let mut s = 0;
        for x in 0..5 {
            if a[x] != 0 {
                for y in 0..5 {
                    s += a[x] * b[y] * sub[x][y];
                }
            }
        }
        s
    };
    let open = scheme.gap_open as i64 * pairs;
    let ext = scheme.gap_extend as i64 * pairs;
    const NEG: i64 = i64::MIN / 4;
    let w = m + 1;
    // states: 0 column pair, 1 p column against gaps, 2 q column against gaps;
    // each cell keeps its value and the state it came from
    let mut val = [vec![NEG; (n + 1) * w], vec![NEG; (n + 1) * w], vec![NEG; (n + 1) * w]];
    let mut from = [vec![0u8; (n + 1) * w], vec![0u8; (n + 1) * w], vec![0u8; (n + 1) * w]];
    val[0][0] = 0;
    // ties prefer column pairs, then gaps in q, then gaps in p
    let pick = |c: [i64; 3]| -> (i64, u8) {
        let mut best = (c[0], 0u8);
        for (k, &v) in c.iter().enumerate().skip(1) {
            if v > best.0 {
                best = (v, k as u8);
            }
        }
        best
    };
    for i in 0..=n {
        for j in 0..=m {
            let at = i * w + j;
            if i > 0 && j > 0 {
                let d = at - w - 1;
                let (v, f) = pick([val[0][d], val[1][d], val[2][d]]);
                val[0][at] = v + col(i - 1, j - 1);
                from[0][at] = f;
            }
            if i > 0 {
                let u = at - w;
                let (v, f) = pick([val[0][u] + open, val[1][u] + ext, val[2][u] + open]);
                val[1][at] = v;
                from[1][at] = f;
            }
            if j > 0 {
                let l = at - 1;
                let (v, f) = pick([val[0][l] + open, val[1][l] + open, val[2][l] + ext]);
                val[2][at] = v;
                from[2][at] = f;
            }
        }
    }
    let end = n * w + m;
    let (_, mut state) = pick([val[0][end], val[1][end], val[2][end]]);
    let (mut i, mut j) = (n, m);
    let mut ops = Vec::with_capacity(n + m);
    while i > 0 || j > 0 {
        let at = i * w + j;
        ops.push(state);
        let prev = from[state as usize][at];
        match state {
            0 => {
                i -= 1;
                j -= 1;
            }
            1 => i -= 1,
            _ => j -= 1,
        }
        state = prev;
    }
    ops.reverse();
    let mut rows: Vec<Vec<u8>> = vec![Vec::with_capacity(ops.len()); p.rows.len() + q.rows.len()];
    let (mut pi, mut qj) = (0, 0);
    for op in ops {
        let (take_p, take_q) = match op {
            0 => (true, true),
            1 => (true, false),
            _ => (false, true),
        };
        for (r, row) in p.rows.iter().enumerate() {
            rows[r].push(if take_p { row[pi] } else { GAP });
        }
        for (r, row) in q.rows.iter().enumerate() {
            rows[p.rows.len() + r].push(if take_q { row[qj] } else { GAP });
        }
        pi += take_p as usize;
        qj += take_q as usize;
    }
    let mut members = p.members.clone();
    members.extend(&q.members);
    let mut out = Profile { members, rows, counts: Vec::new() };
    out.recount();
    out
}

/// Progressive alignment of the segments of one multi-block.
///
/// Pairwise semi-global scores give the similarities; the two most similar
/// groups (average linkage, ties to the lowest input positions) are joined
/// by profile alignment until one group remains. Rows come back in input order.
pub fn align_multiblock(segments: &[(String, Vec<u8>)], scheme: &ScoringScheme) -> Vec<Vec<u8>> {
    let n = segments.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![segments[0].1.clone()];
    }
    // input positions ordered by id give the deterministic tie-break
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by(|&a, &b| segments[a].0.cmp(&segments[b].0).then(a.cmp(&b)));
    let mut sim = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (s, _) = semiglobal_align(&segments[i].1, &segments[j].1, scheme);
            sim[i][j] = s as i64;
            sim[j][i] = s as i64;
        }
    }
    let mut groups: Vec<Profile> = by_id.iter().map(|&i| Profile::single(i, &segments[i].1)).collect();
    while groups.len() > 1 {
        let mut best: Option<(i64, i64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let total: i64 = groups[a].members.iter().map(|&x| groups[b].members.iter().map(|&y| sim[x][y]).sum::<i64>()).sum();
                let count = (groups[a].members.len() * groups[b].members.len()) as i64;
                // compare total/count exactly by cross-multiplication
                let better = match best {
                    None => true,
                    Some((bt, bc, _, _)) => total * bc > bt * count,
                };
                if better {
                    best = Some((total, count, a, b));
                }
            }
        }
        let (_, _, a, b) = best.expect("two or more groups");
        let q = groups.remove(b);
        let p = groups.remove(a);
        groups.insert(a, align_profiles(&p, &q, scheme));
    }
    let g = groups.pop().expect("one group");
    let mut rows = vec![Vec::new(); n];
    for (r, &member) in g.members.iter().enumerate() {
        rows[member] = g.rows[r].clone();
    }
    rows
}

/// Equal-length gapped rows of every registered sequence, plus the multi-block behind each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiColumnAlignment {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<u8>>,
    /// `None` for columns holding CDS positions outside every multi-block.
    pub provenance: Vec<Option<usize>>,
}

impl MultiColumnAlignment {
    pub fn columns(&self) -> usize {
        self.provenance.len()
    }

    pub fn row(&self, id: &str) -> Option<&[u8]> {
        self.ids.iter().position(|x| x == id).map(|i| self.rows[i].as_slice())
    }

    pub fn to_fasta(&self) -> String {
        write_fasta(self.ids.iter().zip(&self.rows), 60)
    }

    pub fn from_fasta(text: &str) -> Result<Self> {
        let rows = parse_aligned_fasta(text)?;
        let width = rows.values().next().map_or(0, Vec::len);
        if rows.values().any(|r| r.len() != width) {
            return Err(Error::Parse { line: 0, msg: "aligned rows differ in length".into() });
        }
        Ok(MultiColumnAlignment { ids: rows.keys().cloned().collect(), rows: rows.into_values().collect(), provenance: vec![None; width] })
    }
}

/// Concatenates per-multi-block alignments in chain order. CDS positions
/// outside every multi-block are placed, unaligned, just before the next
/// multi-block holding that CDS. Gene rows hold only multi-block segments.
pub fn multiple_cds_alignment(msa: &MultipleSplicedAlignment, ds: &Dataset, aligner: &dyn SegmentAligner) -> Result<MultiColumnAlignment> {
    let reg = &msa.registry;
    let mut seqs: Vec<Vec<u8>> = Vec::with_capacity(reg.len());
    for s in &reg.seqs {
        seqs.push(if s.is_cds {
            let c = ds.cds_by_id(&s.id).ok_or_else(|| Error::UnknownSequence(s.id.clone()))?;
            ds.cds_sequence(c)?.seq
        } else {
            ds.gene(&s.id)?.seq.clone()
        });
        if seqs.last().map(Vec::len) != Some(s.len) {
            return Err(Error::AlignmentMismatch { expected: format!("{} of length {}", s.id, s.len), found: "another length".into() });
        }
    }

    // units: (multi-block index or None, [(seq, s, e)])
    let mut before: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); msa.multiblocks.len() + 1];
    for (x, gaps) in msa.uncovered() {
        let segs = msa.segments_of(x);
        for (s, e) in gaps {
            let slot = segs.iter().find(|(_, g)| g.0 > e).map_or(msa.multiblocks.len(), |(i, _)| *i);
            before[slot].push((x, s, e));
        }
    }
    let mut units: Vec<(Option<usize>, Vec<(usize, usize, usize)>)> = Vec::new();
    for (i, fillers) in before.iter_mut().enumerate() {
        fillers.sort_unstable();
        for &f in fillers.iter() {
            units.push((None, vec![f]));
        }
        if let Some(m) = msa.multiblocks.get(i) {
            units.push((Some(i), m.present().map(|(s, (a, b))| (s, a, b)).collect()));
        }
    }

    let aligned: Vec<Vec<Vec<u8>>> = units
        .par_iter()
        .map(|(_, segs)| {
            let input: Vec<(String, Vec<u8>)> = segs.iter().map(|&(s, a, b)| (reg.seqs[s].id.clone(), seqs[s][a - 1..b].to_vec())).collect();
            let rows = aligner.align(&input)?;
            if rows.len() != input.len() || rows.iter().any(|r| r.len() != rows[0].len()) {
                return Err(Error::Internal("aligner returned malformed rows".into()));
            }
            for (r, (id, seq)) in rows.iter().zip(&input) {
                if strip_gaps(r) != *seq {
                    return Err(Error::RoundTrip(id.clone()));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<Vec<u8>> = vec![Vec::new(); reg.len()];
    let mut provenance = Vec::new();
    for ((mb, segs), block_rows) in units.iter().zip(aligned) {
        let width = block_rows[0].len();
        let mut filled = vec![false; reg.len()];
        for (&(s, _, _), r) in segs.iter().zip(block_rows) {
            rows[s].extend(r);
            filled[s] = true;
        }
        for (s, f) in filled.iter().enumerate() {
            if !f {
                rows[s].extend(std::iter::repeat_n(GAP, width));
            }
        }
        provenance.extend(std::iter::repeat_n(*mb, width));
    }
    for (s, info) in reg.seqs.iter().enumerate() {
        if info.is_cds && strip_gaps(&rows[s]) != seqs[s] {
            return Err(Error::RoundTrip(info.id.clone()));
        }
    }
    Ok(MultiColumnAlignment { ids: reg.seqs.iter().map(|s| s.id.clone()).collect(), rows, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::msa_spliced::{build_msa, MsaParams, Registry};
    use crate::pairwise::{align_all, Params};
    use crate::seqmodel::{Cds, Exon, Gene};

    fn segs(v: &[(&str, &str)]) -> Vec<(String, Vec<u8>)> {
        v.iter().map(|(i, s)| (i.to_string(), s.as_bytes().to_vec())).collect()
    }

    #[test]
    fn one_segment_is_unchanged() {
        let rows = align_multiblock(&segs(&[("a", "ACGTAC")]), &ScoringScheme::default());
        assert_eq!(rows, vec![b"ACGTAC".to_vec()]);
    }

    #[test]
    fn identical_segments_align_without_gaps() {
        let rows = align_multiblock(&segs(&[("b", "ACGTTGCA"), ("a", "ACGTTGCA")]), &ScoringScheme::default());
        assert_eq!(rows, vec![b"ACGTTGCA".to_vec(), b"ACGTTGCA".to_vec()]);
    }

    #[test]
    fn codon_deletion_is_one_gap_run() {
        let full = "ATGGCTAAACCCGGGTTTCATCAGTGGAGCTTAGCAGCC";
        let del = "ATGGCTAAACCCGGGCATCAGTGGAGCTTAGCAGCC";
        let rows = align_multiblock(&segs(&[("a", full), ("b", full), ("c", del)]), &ScoringScheme::default());
        assert_eq!(rows[0].len(), full.len());
        assert_eq!(rows[0], full.as_bytes());
        let gaps: Vec<usize> = rows[2].iter().enumerate().filter(|(_, &c)| c == GAP).map(|(i, _)| i).collect();
        assert_eq!(gaps.len(), 3);
        assert_eq!(gaps[2] - gaps[0], 2);
        assert_eq!(strip_gaps(&rows[2]), del.as_bytes());
    }

    #[test]
    fn rows_keep_input_order_and_content() {
        let input = segs(&[("z", "ACGTACGTTT"), ("a", "ACGTTCGTTTA"), ("m", "CGTACGTT")]);
        let rows = align_multiblock(&input, &ScoringScheme::default());
        for (r, (_, s)) in rows.iter().zip(&input) {
            assert_eq!(strip_gaps(r), *s);
            assert_eq!(r.len(), rows[0].len());
        }
    }

    fn two_gene_dataset() -> Dataset {
        let e1 = "ATGGCTAAACCCGGGTTTCAT";
        let e2 = "CAGTGGAGCTTAGCAGCCTGA";
        let (ig, ih) = ("GTAAGTTTTTTTTTTTTCAG", "GTAAGCCCCCCCCCCCCCCCCAG");
        let g = format!("CCCC{e1}{ig}{e2}CCCC");
        let h = format!("AAAA{e1}{ih}{e2}AAAA");
        let (l1, l2) = (e1.len(), e2.len());
        let second = |i: &str| Exon::new(5 + l1 + i.len(), 4 + l1 + i.len() + l2);
        let cds = vec![
            Cds::new("gx", "G", vec![Exon::new(5, 4 + l1), second(ig)]).unwrap(),
            Cds::new("hx", "H", vec![Exon::new(5, 4 + l1), second(ih)]).unwrap(),
        ];
        Dataset::new(vec![Gene::new("G", g).unwrap(), Gene::new("H", h).unwrap()], cds).unwrap()
    }

    #[test]
    fn identical_family_gives_gap_free_alignment() {
        let ds = two_gene_dataset();
        let s = ScoringScheme::default();
        let al = align_all(&ds, &s, &Params::default(), true).unwrap();
        let reg = Registry::from_dataset(&ds);
        let msa = build_msa(&reg, &al, &MsaParams::default()).unwrap();
        assert_eq!(msa.multiblocks.len(), 2);
        let m = multiple_cds_alignment(&msa, &ds, &ProgressiveAligner { scheme: s.clone() }).unwrap();
        assert_eq!(m.ids, vec!["G", "H", "gx", "hx"]);
        assert!(m.rows.iter().all(|r| !r.contains(&GAP)));
        let cl = cluster_from_msa(&msa);
        assert_eq!(cl.to_text(), "gx,hx\tO\n");
    }

    #[test]
    fn presence_and_length_decide_groups() {
        let reg_ds = two_gene_dataset();
        let reg = Registry::from_dataset(&reg_ds);
        let [g, h, gx, hx] = [0, 1, 2, 3];
        let mk = |rows: &[(usize, (usize, usize))]| {
            let mut m = crate::msa_spliced::MultiBlock::empty(4);
            for &(s, seg) in rows {
                m.segments[s] = seg;
            }
            m
        };
        let base = MultipleSplicedAlignment {
            registry: reg,
            multiblocks: vec![mk(&[(g, (5, 25)), (h, (5, 25)), (gx, (1, 21)), (hx, (1, 21))])],
            counts: Default::default(),
            diagnostics: vec![],
        };
        assert_eq!(cluster_from_msa(&base).set.clusters.len(), 1);
        let mut shifted = base.clone();
        shifted.multiblocks[0].segments[hx] = (1, 24);
        assert_eq!(cluster_from_msa(&shifted).set.clusters.len(), 1);
        shifted.multiblocks[0].segments[hx] = (1, 23);
        assert_eq!(cluster_from_msa(&shifted).set.clusters.len(), 2);
        let mut absent = base.clone();
        absent.multiblocks.push(mk(&[(g, (50, 60)), (gx, (22, 32))]));
        let cl = cluster_from_msa(&absent);
        assert_eq!(cl.set.clusters.len(), 2);
        assert_eq!(cl.to_text(), "gx\t-\nhx\t-\n");
    }

    #[test]
    fn aligned_fasta_round_trip() {
        let m = MultiColumnAlignment { ids: vec!["a".into(), "b".into()], rows: vec![b"AC-T".to_vec(), b"ACGT".to_vec()], provenance: vec![Some(0); 4] };
        let back = MultiColumnAlignment::from_fasta(&m.to_fasta()).unwrap();
        assert_eq!(back.rows, m.rows);
        assert_eq!(back.ids, m.ids);
    }
}
