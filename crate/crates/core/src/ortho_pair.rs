//! CDS orthology from reciprocal pairwise spliced alignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seqmodel::Cds;
use crate::spliced::SplicedAlignment;

/// How the two intron-set tests of a CDS pair combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrthologyMode {
    /// Either alignment reproduces the other CDS's introns.
    #[default]
    Permissive,
    /// Both alignments must.
    Reciprocal,
}

impl FromStr for OrthologyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permissive" => Ok(OrthologyMode::Permissive),
            "reciprocal" => Ok(OrthologyMode::Reciprocal),
            _ => Err(Error::InvalidParam(format!("unknown orthology mode `{s}`"))),
        }
    }
}

impl fmt::Display for OrthologyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrthologyMode::Permissive => "permissive",
            OrthologyMode::Reciprocal => "reciprocal",
        })
    }
}

/// A partition of CDS ids. Members are sorted, clusters ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterSet {
    pub clusters: Vec<Vec<String>>,
}

impl ClusterSet {
    /// Transitive closure of `edges` over `ids`.
    pub fn from_edges<'a>(ids: impl IntoIterator<Item = &'a str>, edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let ids: Vec<&str> = ids.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut uf = UnionFind::new(ids.len());
        for (a, b) in edges {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                uf.union(i, j);
            }
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            groups.entry(uf.find(i)).or_default().push(id.to_string());
        }
        let mut clusters: Vec<Vec<String>> = groups.into_values().collect();
        clusters.sort();
        ClusterSet { clusters }
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.iter().any(|m| m == id))
    }

    /// True when every cluster of `self` lies inside one cluster of `other`.
    pub fn refines(&self, other: &ClusterSet) -> bool {
        self.clusters.iter().all(|c| {
            let target = other.cluster_of(&c[0]);
            target.is_some() && c.iter().all(|m| other.cluster_of(m) == target)
        })
    }

    /// One line per cluster, comma-separated ids.
    pub fn to_text(&self) -> String {
        self.clusters.iter().map(|c| c.join(",") + "\n").collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut clusters = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ids = line.split('\t').next().unwrap_or_default();
            let mut c: Vec<String> = ids.split(',').map(str::to_string).collect();
            if c.iter().any(String::is_empty) {
                return Err(Error::Parse { line: i + 1, msg: "empty cluster member".into() });
            }
            c.sort();
            clusters.push(c);
        }
        clusters.sort();
        Ok(ClusterSet { clusters })
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, i: usize, j: usize) {
        let (a, b) = (self.find(i), self.find(j));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

fn intron_set(v: Vec<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    v.into_iter().collect()
}

/// Decides whether `c1` (on gene G) and `c2` (on gene H) are orthologs, given
/// `a1` aligning `c1` on H and `a2` aligning `c2` on G.
pub fn are_orthologs(c1: &Cds, a1: &SplicedAlignment, c2: &Cds, a2: &SplicedAlignment, mode: OrthologyMode) -> Result<bool> {
    let check = |a: &SplicedAlignment, cds: &str, gene: &str| {
        if a.cds_id != cds || a.gene_id != gene {
            return Err(Error::AlignmentMismatch { expected: format!("{cds} on {gene}"), found: format!("{} on {}", a.cds_id, a.gene_id) });
        }
        Ok(())
    };
    check(a1, &c1.id, &c2.gene_id)?;
    check(a2, &c2.id, &c1.gene_id)?;
    if c1.exons.len() != c2.exons.len() {
        return Ok(false);
    }
    if c1.exons.iter().zip(&c2.exons).any(|(x, y)| (x.len() as isize - y.len() as isize) % 3 != 0) {
        return Ok(false);
    }
    let fwd = intron_set(a1.introns()) == intron_set(c2.introns());
    let back = intron_set(a2.introns()) == intron_set(c1.introns());
    Ok(match mode {
        OrthologyMode::Permissive => fwd || back,
        OrthologyMode::Reciprocal => fwd && back,
    })
}

/// Clusters CDS by the transitive closure of pairwise orthology.
///
/// Every CDS must have an alignment on every gene other than its own.
pub fn cluster_orthologs(cds: &[Cds], alignments: &[SplicedAlignment], mode: OrthologyMode) -> Result<ClusterSet> {
    let by_pair: HashMap<(&str, &str), &SplicedAlignment> =
        alignments.iter().map(|a| ((a.cds_id.as_str(), a.gene_id.as_str()), a)).collect();
    let mut sorted: Vec<&Cds> = cds.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut pairs = Vec::new();
    let mut missing = BTreeSet::new();
    for (i, c1) in sorted.iter().enumerate() {
        for c2 in &sorted[i + 1..] {
            if c1.gene_id == c2.gene_id {
                continue;
            }
            let a1 = by_pair.get(&(c1.id.as_str(), c2.gene_id.as_str()));
            let a2 = by_pair.get(&(c2.id.as_str(), c1.gene_id.as_str()));
            if a1.is_none() {
                missing.insert(format!("{}/{}", c1.id, c2.gene_id));
            }
            if a2.is_none() {
                missing.insert(format!("{}/{}", c2.id, c1.gene_id));
            }
            if let (Some(a1), Some(a2)) = (a1, a2) {
                pairs.push((*c1, *a1, *c2, *a2));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingAlignment(missing.into_iter().collect::<Vec<_>>().join(", ")));
    }
    let verdicts: Vec<bool> = pairs
        .par_iter()
        .map(|(c1, a1, c2, a2)| are_orthologs(c1, a1, c2, a2, mode))
        .collect::<Result<_>>()?;
    let edges = pairs.iter().zip(verdicts).filter(|(_, v)| *v).map(|((c1, _, c2, _), _)| (c1.id.as_str(), c2.id.as_str()));
    Ok(ClusterSet::from_edges(sorted.iter().map(|c| c.id.as_str()), edges))
}
