//! Seeded synthetic gene families with known exon structure and CDS groups.
//!
//! A random root gene evolves along a random binary species tree. On each
//! branch every gene copy receives substitutions (splice dinucleotides are
//! kept), may lose an internal exon, may tandem-duplicate an exon and may be
//! duplicated as a whole. Each leaf gene carries its full CDS and, optionally,
//! one exon-skipping isoform. CDS built from the same list of ancestral exons
//! form one truth group.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seqmodel::{serialize_annotation, write_fasta, Cds, Dataset, Exon, Gene};

const BASES: &[u8; 4] = b"ACGT";
const STOPS: [&[u8; 3]; 3] = [b"TAA", b"TAG", b"TGA"];

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub seed: u64,
    pub n_species: usize,
    /// Per-branch probability that a gene copy is duplicated.
    pub duplication_prob: f64,
    /// Per-site substitution probability on a branch of length 1.
    pub substitution_rate: f64,
    pub exon_count: (usize, usize),
    pub exon_len: (usize, usize),
    /// Round exon lengths to whole codons.
    pub codon_exons: bool,
    pub intron_len: (usize, usize),
    /// Per-branch probability of losing one internal exon.
    pub exon_loss_prob: f64,
    /// Per-branch probability of tandem-duplicating one exon.
    pub exon_duplication_prob: f64,
    pub canonical_intron_prob: f64,
    /// Per-gene probability of an extra isoform that skips one internal exon.
    pub skip_prob: f64,
    /// Length of the untranslated flanks on each side of the gene.
    pub flank: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            seed: 1,
            n_species: 4,
            duplication_prob: 0.0,
            substitution_rate: 0.05,
            exon_count: (3, 6),
            exon_len: (60, 180),
            codon_exons: true,
            intron_len: (60, 300),
            exon_loss_prob: 0.0,
            exon_duplication_prob: 0.0,
            canonical_intron_prob: 1.0,
            skip_prob: 0.0,
            flank: 50,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            self.duplication_prob,
            self.substitution_rate,
            self.exon_loss_prob,
            self.exon_duplication_prob,
            self.canonical_intron_prob,
            self.skip_prob,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParam("probabilities must lie in [0,1]".into()));
        }
        let ranges = [self.exon_count, self.exon_len, self.intron_len];
        if ranges.iter().any(|r| r.0 > r.1) || self.exon_count.0 == 0 || self.n_species == 0 {
            return Err(Error::InvalidParam("empty range or zero count".into()));
        }
        if self.exon_len.0 < 6 || self.intron_len.0 < 4 {
            return Err(Error::InvalidParam("exons need >= 6 nt and introns >= 4 nt".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ExonModel {
    anc: String,
    seq: Vec<u8>,
}

#[derive(Debug, Clone)]
struct GeneModel {
    up: Vec<u8>,
    exons: Vec<ExonModel>,
    introns: Vec<Vec<u8>>,
    down: Vec<u8>,
    history: String,
}

impl GeneModel {
    /// Gene sequence and 1-based exon coordinates.
    fn assemble(&self) -> (Vec<u8>, Vec<Exon>) {
        let mut seq = self.up.clone();
        let mut coords = Vec::with_capacity(self.exons.len());
        for (i, e) in self.exons.iter().enumerate() {
            let s = seq.len() + 1;
            seq.extend_from_slice(&e.seq);
            coords.push(Exon::new(s, seq.len()));
            if i + 1 < self.exons.len() {
                seq.extend_from_slice(&self.introns[i]);
            }
        }
        seq.extend_from_slice(&self.down);
        (seq, coords)
    }
}

/// One generator event, kept for the truth file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub kind: String,
    pub lineage: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truth {
    /// Sorted groups of CDS ids, ordered by smallest member.
    pub groups: Vec<Vec<String>>,
    pub events: Vec<Event>,
    /// Ancestral exon ids of each CDS, in order.
    pub cds_exons: BTreeMap<String, Vec<String>>,
}

impl Truth {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, g) in self.groups.iter().enumerate() {
            let _ = writeln!(out, "cluster\t{}\t{}", i + 1, g.join(","));
        }
        for (id, ex) in &self.cds_exons {
            let _ = writeln!(out, "structure\t{id}\t{}", ex.join(","));
        }
        for e in &self.events {
            let _ = writeln!(out, "event\t{}\t{}\t{}", e.kind, e.lineage, e.detail);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Family {
    pub genes: Vec<Gene>,
    pub cds: Vec<Cds>,
    pub truth: Truth,
}

impl Family {
    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(self.genes.clone(), self.cds.clone())
    }

    pub fn fasta(&self) -> String {
        write_fasta(self.genes.iter().map(|g| (g.id.as_str(), g.seq.as_slice())), 60)
    }

    pub fn annotation(&self) -> String {
        serialize_annotation(&self.cds)
    }
}

struct Sim<'a> {
    p: &'a SimParams,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    dup_counter: usize,
}

impl Sim<'_> {
    fn range(&mut self, r: (usize, usize)) -> usize {
        self.rng.gen_range(r.0..=r.1)
    }

    fn dna(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| BASES[self.rng.gen_range(0..4)]).collect()
    }

    fn sense_codon(&mut self) -> [u8; 3] {
        loop {
            let c = [BASES[self.rng.gen_range(0..4)], BASES[self.rng.gen_range(0..4)], BASES[self.rng.gen_range(0..4)]];
            if !STOPS.iter().any(|s| **s == c) {
                return c;
            }
        }
    }

    fn intron(&mut self) -> Vec<u8> {
        let len = self.range(self.p.intron_len);
        let mut v = self.dna(len);
        if self.rng.gen_bool(self.p.canonical_intron_prob) {
            v[..2].copy_from_slice(b"GT");
            v[len - 2..].copy_from_slice(b"AG");
        } else {
            if &v[..2] == b"GT" {
                v[0] = b'C';
            }
            if &v[len - 2..] == b"AG" {
                v[len - 1] = b'C';
            }
        }
        v
    }

    fn root(&mut self) -> GeneModel {
        let n = self.range(self.p.exon_count);
        let mut lens: Vec<usize> = (0..n).map(|_| self.range(self.p.exon_len)).collect();
        if self.p.codon_exons {
            for l in lens.iter_mut() {
                *l = (*l / 3).max(2) * 3;
            }
        }
        let total: usize = lens.iter().sum();
        let mut cds = b"ATG".to_vec();
        while cds.len() + 3 < total {
            let c = self.sense_codon();
            cds.extend_from_slice(&c);
        }
        cds.truncate(total.saturating_sub(3));
        let stop = *STOPS[self.rng.gen_range(0..3)];
        cds.extend_from_slice(&stop[3 - (total - cds.len()).min(3)..]);
        let mut exons = Vec::with_capacity(n);
        let mut at = 0;
        for (i, l) in lens.iter().enumerate() {
            exons.push(ExonModel { anc: format!("e{}", i + 1), seq: cds[at..at + l].to_vec() });
            at += l;
        }
        let introns = (0..n - 1).map(|_| self.intron()).collect();
        let up = self.dna(self.p.flank);
        let down = self.dna(self.p.flank);
        GeneModel { up, exons, introns, down, history: String::new() }
    }

    fn mutate(&mut self, seq: &mut [u8], p: f64, keep_ends: bool) {
        let n = seq.len();
        for i in 0..n {
            if keep_ends && (i < 2 || i + 2 >= n) {
                continue;
            }
            if self.rng.gen_bool(p) {
                let old = seq[i];
                let choices: Vec<u8> = BASES.iter().copied().filter(|&b| b != old).collect();
                seq[i] = *choices.choose(&mut self.rng).expect("three bases");
            }
        }
    }

    fn evolve(&mut self, g: &mut GeneModel, lineage: &str) {
        let p = (self.p.substitution_rate * self.rng.gen_range(0.0..1.0f64)).min(1.0);
        let mut up = std::mem::take(&mut g.up);
        self.mutate(&mut up, p, false);
        g.up = up;
        let mut down = std::mem::take(&mut g.down);
        self.mutate(&mut down, p, false);
        g.down = down;
        for i in 0..g.exons.len() {
            let mut s = std::mem::take(&mut g.exons[i].seq);
            self.mutate(&mut s, p, false);
            g.exons[i].seq = s;
        }
        for i in 0..g.introns.len() {
            let mut s = std::mem::take(&mut g.introns[i]);
            self.mutate(&mut s, p, true);
            g.introns[i] = s;
        }

        if self.rng.gen_bool(self.p.exon_loss_prob) && g.exons.len() >= 3 {
            let i = self.rng.gen_range(1..g.exons.len() - 1);
            let lost = g.exons.remove(i);
            g.introns.remove(i);
            self.events.push(Event { kind: "exon_loss".into(), lineage: lineage.into(), detail: lost.anc });
        }
        if self.rng.gen_bool(self.p.exon_duplication_prob) && g.exons.len() >= 2 {
            let i = if g.exons.len() >= 3 { self.rng.gen_range(1..g.exons.len() - 1) } else { 0 };
            self.dup_counter += 1;
            let mut copy = g.exons[i].clone();
            copy.anc = format!("{}.d{}", copy.anc, self.dup_counter);
            let intron = self.intron();
            self.events.push(Event {
                kind: "exon_duplication".into(),
                lineage: lineage.into(),
                detail: format!("{}->{}", g.exons[i].anc, copy.anc),
            });
            g.exons.insert(i + 1, copy);
            g.introns.insert(i, intron);
        }
    }
}

/// Generates one family; identical parameters give identical output.
pub fn generate_family(p: &SimParams) -> Result<Family> {
    p.validate()?;
    let mut sim = Sim { p, rng: ChaCha8Rng::seed_from_u64(p.seed), events: Vec::new(), dup_counter: 0 };
    let root = sim.root();

    // leaves hold the gene copies of each current lineage
    let mut leaves: Vec<(String, Vec<GeneModel>)> = vec![("r".into(), vec![root])];
    while leaves.len() < p.n_species {
        let i = sim.rng.gen_range(0..leaves.len());
        let (name, genes) = leaves.remove(i);
        for side in ["0", "1"] {
            let child = format!("{name}{side}");
            let mut out = Vec::new();
            for (j, g) in genes.iter().enumerate() {
                let mut g = g.clone();
                let tag = format!("{child}.{j}");
                sim.evolve(&mut g, &tag);
                if sim.rng.gen_bool(p.duplication_prob) {
                    let mut copy = g.clone();
                    copy.history.push_str(&format!("{child}d"));
                    sim.events.push(Event { kind: "gene_duplication".into(), lineage: tag, detail: String::new() });
                    out.push(g);
                    out.push(copy);
                } else {
                    out.push(g);
                }
            }
            leaves.insert(i, (child, out));
        }
    }

    let mut genes = Vec::new();
    let mut cds = Vec::new();
    let mut structure: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (si, (lineage, models)) in leaves.iter().enumerate() {
        for (gi, m) in models.iter().enumerate() {
            let gid = format!("s{}g{}", si + 1, gi + 1);
            let (seq, coords) = m.assemble();
            let gene = Gene::new(&gid, &seq)?;
            let full_id = format!("{gid}_c1");
            cds.push(Cds::new(&full_id, &gid, coords.clone())?);
            structure.insert(full_id, m.exons.iter().map(|e| e.anc.clone()).collect());
            if m.exons.len() >= 3 && sim.rng.gen_bool(p.skip_prob) {
                let skip = sim.rng.gen_range(1..m.exons.len() - 1);
                let id = format!("{gid}_c2");
                let ex: Vec<Exon> = coords.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, e)| *e).collect();
                cds.push(Cds::new(&id, &gid, ex)?);
                structure.insert(
                    id.clone(),
                    m.exons.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, e)| e.anc.clone()).collect(),
                );
                sim.events.push(Event { kind: "exon_skipping".into(), lineage: lineage.clone(), detail: format!("{id}:{}", m.exons[skip].anc) });
            }
            genes.push(gene);
        }
    }

    let mut by_key: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
    for (id, key) in &structure {
        by_key.entry(key.clone()).or_default().push(id.clone());
    }
    let mut groups: Vec<Vec<String>> = by_key.into_values().collect();
    for g in groups.iter_mut() {
        g.sort();
    }
    groups.sort();
    Ok(Family { genes, cds, truth: Truth { groups, events: sim.events, cds_exons: structure } })
}

/// A small CDS/gene pair for exhaustive optimality checks.
#[derive(Debug, Clone)]
pub struct ToyInstance {
    /// Source gene of the CDS.
    pub source: Gene,
    pub cds: Cds,
    /// Substituted copy of the source gene with the same exon coordinates.
    pub target: Gene,
    pub target_cds: Cds,
}

/// Two or three exons of 12..20 nt, canonical introns of 10..25 nt, at most
/// 120 nt of gene, and a target copy at >= 90% exon identity.
pub fn toy_instance(seed: u64) -> ToyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dna = |rng: &mut ChaCha8Rng, n: usize| -> Vec<u8> { (0..n).map(|_| BASES[rng.gen_range(0..4)]).collect() };
    let n_exons = rng.gen_range(2..=3);
    let head = rng.gen_range(0..=5);
    let mut seq = dna(&mut rng, head);
    let mut exons = Vec::new();
    for i in 0..n_exons {
        let len = rng.gen_range(12..=20);
        let s = seq.len() + 1;
        seq.extend(dna(&mut rng, len));
        exons.push(Exon::new(s, s + len - 1));
        if i + 1 < n_exons {
            let il = rng.gen_range(10..=25);
            let mut intr = dna(&mut rng, il);
            intr[..2].copy_from_slice(b"GT");
            intr[il - 2..].copy_from_slice(b"AG");
            seq.extend(intr);
        }
    }
    let tail = rng.gen_range(0..=5);
    seq.extend(dna(&mut rng, tail));

    let exon_len: usize = exons.iter().map(Exon::len).sum();
    let max_subs = exon_len / 10;
    let mut target = seq.clone();
    let mut subs = 0;
    for i in 0..target.len() {
        let in_exon = exons.iter().any(|e| e.contains(i + 1));
        let splice = exons.windows(2).any(|w| i + 1 == w[0].end + 1 || i + 1 == w[0].end + 2 || i + 1 + 1 == w[1].start || i + 2 + 1 == w[1].start);
        if splice || !rng.gen_bool(0.05) || (in_exon && subs >= max_subs) {
            continue;
        }
        subs += in_exon as usize;
        let old = target[i];
        let choices: Vec<u8> = BASES.iter().copied().filter(|&b| b != old).collect();
        target[i] = *choices.choose(&mut rng).expect("three bases");
    }
    let source = Gene::new("g", &seq).expect("valid");
    let cds = Cds::new("g_c1", "g", exons.clone()).expect("valid");
    let target = Gene::new("h", &target).expect("valid");
    let target_cds = Cds::new("h_c1", "h", exons).expect("valid");
    ToyInstance { source, cds, target, target_cds }
}
