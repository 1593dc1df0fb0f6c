mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cdsalign::ortho_pair::OrthologyMode;

use crate::io::exit_code;

#[derive(Parser, Debug)]
#[command(name = "cdsalign", version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("CARGO_PKG_NAME"), ")"))]
#[command(about = "Spliced alignment of CDS on homologous genes, multiple spliced alignment and CDS ortholog groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Scoring file of `key = value` lines.
    #[arg(long, global = true)]
    pub scoring: Option<PathBuf>,
    /// Conserved blocks below this identity become deleted.
    #[arg(long, global = true, default_value_t = 0.6)]
    pub min_idty: f64,
    /// Compatibility slack of multi-blocks, in nucleotides.
    #[arg(long, global = true, default_value_t = 50)]
    pub epsilon: usize,
    /// Identity of a correct block.
    #[arg(long, global = true, default_value_t = 0.6)]
    pub tau: f64,
    #[arg(long, global = true, default_value_t = OrthologyMode::Permissive)]
    pub mode: OrthologyMode,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// Gene sequences, FASTA.
    #[arg(long)]
    pub genes: PathBuf,
    /// CDS annotation, one `gene_id cds_id start end` line per exon.
    #[arg(long)]
    pub annotation: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Align one CDS on one gene.
    AlignPair {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        cds: String,
        #[arg(long)]
        gene: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Align every CDS on every other gene, one TSV per pair.
    AlignAll {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
        /// Also align each CDS on its own gene (needed by `msa`).
        #[arg(long)]
        with_self: bool,
    },
    /// Ortholog groups from pairwise alignments.
    ClusterPairwise {
        #[command(flatten)]
        inputs: Inputs,
        /// Alignment TSV files or directories of them.
        #[arg(long, required = true, num_args = 1..)]
        alignments: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiple spliced alignment from all CDS-gene alignments, self pairs included.
    Msa {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, required = true, num_args = 1..)]
        alignments: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CDS groups read off a multiple spliced alignment.
    ClusterMulti {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        msa: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Column alignment of all CDS and gene exons, aligned FASTA.
    CdsMsa {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        msa: PathBuf,
        /// External aligner reading FASTA on stdin and writing aligned FASTA on stdout.
        #[arg(long)]
        aligner_cmd: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics of pairwise alignments and, optionally, of a column alignment.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, num_args = 1..)]
        alignments: Vec<PathBuf>,
        /// Aligned FASTA written by `cds-msa`.
        #[arg(long)]
        cds_msa: Option<PathBuf>,
        /// Pairwise metrics TSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Column-alignment metrics TSV; standard output when absent.
        #[arg(long)]
        msa_out: Option<PathBuf>,
    },
    /// Generate a synthetic family: genes.fa, annotation.tsv, truth.tsv.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        species: usize,
        #[arg(long, default_value_t = 0.05)]
        substitution_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        duplication_prob: f64,
        #[arg(long, default_value_t = 0.0)]
        exon_loss_prob: f64,
        #[arg(long, default_value_t = 0.0)]
        exon_duplication_prob: f64,
        #[arg(long, default_value_t = 1.0)]
        canonical_intron_prob: f64,
        #[arg(long, default_value_t = 0.0)]
        skip_prob: f64,
    },
    /// Derive anchor score tiers from random sequences; prints a scoring file.
    Calibrate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        reps: usize,
        #[arg(long, default_value_t = 300)]
        len: usize,
    },
    /// Run align-all, both clusterings, msa, cds-msa and evaluate into one directory.
    Pipeline {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        aligner_cmd: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
