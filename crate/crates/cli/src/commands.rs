use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use cdsalign::downstream::{cluster_from_msa, multiple_cds_alignment, ExternalAligner, MultiColumnAlignment, ProgressiveAligner, SegmentAligner};
use cdsalign::metrics::{msa_metrics, msa_tsv, pairwise_metrics_all, pairwise_summary, pairwise_tsv};
use cdsalign::msa_spliced::{build_msa, MsaParams, MultipleSplicedAlignment, Registry};
use cdsalign::ortho_pair::{cluster_orthologs, OrthologyMode};
use cdsalign::pairwise::{align_all, all_pairs, attach_details, splice_align, Params};
use cdsalign::scoring::calibrate::calibrate_tiers;
use cdsalign::scoring::{ScoringConfig, ScoringScheme};
use cdsalign::seqmodel::Dataset;
use cdsalign::simulate::{generate_family, SimParams};
use cdsalign::spliced::SplicedAlignment;
use cdsalign::Error as CoreError;
use rayon::prelude::*;

use crate::io::{alignment_file_name, emit, in_file, load_alignments, load_dataset, read_text, write_file, InputError};
use crate::{Cli, Command, Global};

struct Ctx {
    scheme: ScoringScheme,
    params: Params,
    msa: MsaParams,
    mode: OrthologyMode,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self> {
        let cfg = match &g.scoring {
            Some(p) => in_file(ScoringConfig::parse(&read_text(p)?), p)?,
            None => ScoringConfig::default(),
        };
        let params = Params { min_idty: g.min_idty, epsilon: g.epsilon, tau: g.tau, tiers: cfg.tiers, ..Params::default() };
        params.validate()?;
        let msa = MsaParams { epsilon: g.epsilon, tau: g.tau };
        msa.validate()?;
        Ok(Ctx { scheme: cfg.scheme, params, msa, mode: g.mode })
    }

    fn aligner(&self, cmd: Option<&str>) -> Result<Box<dyn SegmentAligner>> {
        Ok(match cmd {
            Some(c) => Box::new(ExternalAligner::from_command(c)?),
            None => Box::new(ProgressiveAligner { scheme: self.scheme }),
        })
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global()?;
    }
    let ctx = Ctx::new(&cli.global)?;
    match cli.command {
        Command::AlignPair { inputs, cds, gene, out } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let c = ds.cds_by_id(&cds).ok_or_else(|| CoreError::UnknownSequence(cds.clone()))?;
            let h = ds.gene(&gene)?;
            let a = splice_align(&ds.cds_sequence(c)?, h, &ds.exon_set(&gene), &ctx.scheme, &ctx.params);
            emit(out.as_deref(), &a.to_tsv())
        }
        Command::AlignAll { inputs, out, with_self } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let al = align_all(&ds, &ctx.scheme, &ctx.params, with_self)?;
            write_alignments(&out, &al)
        }
        Command::ClusterPairwise { inputs, alignments, out } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let al = load_alignments(&alignments)?;
            check_alignments(&ds, &al)?;
            emit(out.as_deref(), &cluster_pairwise(&ctx, &ds, &al)?)
        }
        Command::Msa { inputs, alignments, out } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let mut al = load_alignments(&alignments)?;
            check_alignments(&ds, &al)?;
            al.par_iter_mut().try_for_each(|a| attach_details(a, &ds, &ctx.scheme))?;
            let msa = msa(&ctx, &ds, &al)?;
            emit(out.as_deref(), &msa.to_tsv())
        }
        Command::ClusterMulti { inputs, msa, out } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let m = load_msa(&ds, &msa)?;
            emit(out.as_deref(), &cluster_from_msa(&m).to_text())
        }
        Command::CdsMsa { inputs, msa, aligner_cmd, out } => {
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            let m = load_msa(&ds, &msa)?;
            let mca = multiple_cds_alignment(&m, &ds, ctx.aligner(aligner_cmd.as_deref())?.as_ref())?;
            emit(out.as_deref(), &mca.to_fasta())
        }
        Command::Evaluate { inputs, alignments, cds_msa, out, msa_out } => {
            if alignments.is_empty() && cds_msa.is_none() {
                bail!(InputError("evaluate needs --alignments, --cds-msa or both".into()));
            }
            let ds = load_dataset(&inputs.genes, &inputs.annotation)?;
            if !alignments.is_empty() {
                let al = load_alignments(&alignments)?;
                check_alignments(&ds, &al)?;
                let rows = pairwise_metrics_all(&ds, &al)?;
                eprint!("{}", pairwise_summary(&rows));
                emit(out.as_deref(), &pairwise_tsv(&rows))?;
            }
            if let Some(p) = cds_msa {
                let m = in_file(MultiColumnAlignment::from_fasta(&read_text(&p)?), &p)?;
                emit(msa_out.as_deref(), &msa_tsv(&msa_metrics(&m, &ds)?))?;
            }
            Ok(())
        }
        Command::Simulate {
            out,
            seed,
            species,
            substitution_rate,
            duplication_prob,
            exon_loss_prob,
            exon_duplication_prob,
            canonical_intron_prob,
            skip_prob,
        } => {
            let p = SimParams {
                seed,
                n_species: species,
                substitution_rate,
                duplication_prob,
                exon_loss_prob,
                exon_duplication_prob,
                canonical_intron_prob,
                skip_prob,
                ..SimParams::default()
            };
            let fam = generate_family(&p)?;
            write_file(&out.join("genes.fa"), &fam.fasta())?;
            write_file(&out.join("annotation.tsv"), &fam.annotation())?;
            write_file(&out.join("truth.tsv"), &fam.truth.to_tsv())
        }
        Command::Calibrate { seed, reps, len } => {
            let c = calibrate_tiers(&ctx.scheme, seed, reps, len);
            let cfg = ScoringConfig { scheme: ctx.scheme, tiers: c.tiers };
            print!("# match_prob = {:.6}\n# lambda = {:.6}\n# k = {:.6}\n{}", c.match_prob, c.lambda, c.k, cfg.to_text());
            Ok(())
        }
        Command::Pipeline { inputs, out, aligner_cmd } => pipeline(&ctx, &inputs.genes, &inputs.annotation, &out, aligner_cmd.as_deref()),
    }
}

fn write_alignments(dir: &Path, al: &[SplicedAlignment]) -> Result<()> {
    for a in al {
        write_file(&dir.join(alignment_file_name(&a.cds_id, &a.gene_id)), &a.to_tsv())?;
    }
    eprintln!("wrote {} alignments to {}", al.len(), dir.display());
    Ok(())
}

/// Every alignment names a known CDS and gene and fits their lengths.
fn check_alignments(ds: &Dataset, al: &[SplicedAlignment]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for a in al {
        let c = ds.cds_by_id(&a.cds_id).ok_or_else(|| CoreError::UnknownSequence(a.cds_id.clone()))?;
        let h = ds.gene(&a.gene_id)?;
        a.validate(c.len(), h.len())?;
        if !seen.insert((a.cds_id.as_str(), a.gene_id.as_str())) {
            bail!(InputError(format!("alignment of {} on {} given twice", a.cds_id, a.gene_id)));
        }
    }
    Ok(())
}

fn cluster_pairwise(ctx: &Ctx, ds: &Dataset, al: &[SplicedAlignment]) -> Result<String> {
    Ok(cluster_orthologs(&ds.cds, al, ctx.mode)?.to_text())
}

/// Needs every CDS on every gene, its own included.
fn msa(ctx: &Ctx, ds: &Dataset, al: &[SplicedAlignment]) -> Result<MultipleSplicedAlignment> {
    let have: BTreeSet<(&str, &str)> = al.iter().map(|a| (a.cds_id.as_str(), a.gene_id.as_str())).collect();
    let missing: Vec<String> =
        all_pairs(ds, true).into_iter().filter(|(c, g)| !have.contains(&(c.as_str(), g.as_str()))).map(|(c, g)| format!("{c}/{g}")).collect();
    if !missing.is_empty() {
        return Err(CoreError::MissingAlignment(missing.join(", ")).into());
    }
    let m = build_msa(&Registry::from_dataset(ds), al, &ctx.msa)?;
    for d in &m.diagnostics {
        eprintln!("note: {d}");
    }
    Ok(m)
}

fn load_msa(ds: &Dataset, path: &Path) -> Result<MultipleSplicedAlignment> {
    in_file(MultipleSplicedAlignment::parse_tsv(&read_text(path)?, &Registry::from_dataset(ds)), path)
}

fn pipeline(ctx: &Ctx, genes: &Path, annotation: &Path, out: &Path, aligner_cmd: Option<&str>) -> Result<()> {
    let ds = load_dataset(genes, annotation)?;
    let al = align_all(&ds, &ctx.scheme, &ctx.params, true)?;
    write_alignments(&out.join("alignments"), &al)?;
    let cross: Vec<SplicedAlignment> = al.iter().filter(|a| ds.cds_by_id(&a.cds_id).is_some_and(|c| c.gene_id != a.gene_id)).cloned().collect();

    write_file(&out.join("pairwise_clusters.tsv"), &cluster_pairwise(ctx, &ds, &cross)?)?;
    let m = msa(ctx, &ds, &al)?;
    write_file(&out.join("msa.tsv"), &m.to_tsv())?;
    write_file(&out.join("multi_clusters.tsv"), &cluster_from_msa(&m).to_text())?;
    let mca = multiple_cds_alignment(&m, &ds, ctx.aligner(aligner_cmd)?.as_ref())?;
    write_file(&out.join("cds_msa.fa"), &mca.to_fasta())?;

    let rows = pairwise_metrics_all(&ds, &cross)?;
    eprint!("{}", pairwise_summary(&rows));
    write_file(&out.join("pairwise_metrics.tsv"), &pairwise_tsv(&rows))?;
    write_file(&out.join("msa_metrics.tsv"), &msa_tsv(&msa_metrics(&mca, &ds)?))?;
    eprintln!("pipeline output in {}", PathBuf::from(out).display());
    Ok(())
}
