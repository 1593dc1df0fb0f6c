//! Raw-score anchor tiers from an ungapped null model.
//!
//! Residues are translations of uniform random codons. The tail of the best
//! ungapped segment score starting at a position pair behaves like
//! `K * exp(-lambda * s)`; each tier cutoff is the smallest score whose tail
//! probability falls below its target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::anchors::{translate_codon, AnchorTiers};
use super::ScoringScheme;

/// Per-position-pair tail probabilities for tiers 1, 2 and 3.
pub const TIER_PROBABILITIES: [f64; 3] = [1e-7, 1e-5, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub match_prob: f64,
    pub lambda: f64,
    pub k: f64,
    pub tiers: AnchorTiers,
}

/// Probability that two residues from uniform random codons score as a match.
pub fn match_probability() -> f64 {
    let mut counts = [0usize; 256];
    for x in b"ACGT" {
        for y in b"ACGT" {
            for z in b"ACGT" {
                counts[translate_codon(&[*x, *y, *z]) as usize] += 1;
            }
        }
    }
    counts[b'*' as usize] = 0;
    counts.iter().map(|&c| (c as f64 / 64.0).powi(2)).sum()
}

/// Root of `p e^{l m} + (1-p) e^{l x} = 1` with `l > 0`.
pub fn solve_lambda(p: f64, m: i32, x: i32) -> f64 {
    let f = |l: f64| p * (l * m as f64).exp() + (1.0 - p) * (l * x as f64).exp() - 1.0;
    let (mut lo, mut hi) = (1e-6, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn random_protein(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let c = [b"ACGT"[rng.gen_range(0..4)], b"ACGT"[rng.gen_range(0..4)], b"ACGT"[rng.gen_range(0..4)]];
            translate_codon(&c)
        })
        .collect()
}

/// Estimates `K` from counts of maximal segments scoring at least `floor`
/// over `reps` random sequence pairs of `len` residues, then derives tiers.
pub fn calibrate_tiers(scheme: &ScoringScheme, seed: u64, reps: usize, len: usize) -> Calibration {
    let p = match_probability();
    let lambda = solve_lambda(p, scheme.aa_match, scheme.aa_mismatch);
    let floor = 3 * scheme.aa_match;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    let mut cells = 0u64;
    for _ in 0..reps {
        let s = random_protein(&mut rng, len);
        let t = random_protein(&mut rng, len);
        for d in -(len as isize - 1)..(len as isize) {
            let (mut run, mut peak) = (0i32, 0i32);
            let (i0, j0) = if d >= 0 { (0, d as usize) } else { ((-d) as usize, 0) };
            let n = len - i0.max(j0);
            cells += n as u64;
            for t_ in 0..n {
                let (x, y) = (s[i0 + t_], t[j0 + t_]);
                run += if x == y && x != b'*' { scheme.aa_match } else { scheme.aa_mismatch };
                if run <= 0 {
                    if peak >= floor {
                        hits += 1;
                    }
                    run = 0;
                    peak = 0;
                } else {
                    peak = peak.max(run);
                }
            }
            if peak >= floor {
                hits += 1;
            }
        }
    }
    let k = (hits.max(1) as f64 / cells as f64) * (lambda * floor as f64).exp();
    let cut = |pr: f64| ((k / pr).ln() / lambda).ceil() as i32;
    let tiers = AnchorTiers { t1: cut(TIER_PROBABILITIES[0]), t2: cut(TIER_PROBABILITIES[1]), t3: cut(TIER_PROBABILITIES[2]) };
    Calibration { match_prob: p, lambda, k, tiers }
}
