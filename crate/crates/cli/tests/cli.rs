use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cdsalign::ortho_pair::ClusterSet;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cdsalign"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

fn simulate(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    ok(&["simulate", "--seed", &seed.to_string(), "--out", p(dir)]);
    (dir.join("genes.fa"), dir.join("annotation.tsv"))
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

// two genes, three CDS
fn small(dir: &Path) -> (PathBuf, PathBuf) {
    let (g, a) = simulate(&dir.join("sim"), 3);
    let fasta = fs::read_to_string(&g).unwrap();
    let keep: Vec<&str> = fasta.split('>').filter(|r| r.starts_with("s1g1\n") || r.starts_with("s2g1\n")).collect();
    let ann = fs::read_to_string(&a).unwrap();
    let mut lines: Vec<String> = ann.lines().filter(|l| l.starts_with("s1g1\t") || l.starts_with("s2g1\t")).map(String::from).collect();
    // a second isoform of s1g1 made of its first exon only
    lines.push(lines[0].replace("s1g1_c1", "s1g1_x"));
    let gp = dir.join("g.fa");
    let ap = dir.join("a.tsv");
    fs::write(&gp, keep.iter().map(|r| format!(">{r}")).collect::<String>()).unwrap();
    fs::write(&ap, lines.join("\n") + "\n").unwrap();
    (gp, ap)
}

#[test]
fn align_all_writes_one_file_per_cross_pair() {
    let t = TempDir::new().unwrap();
    let (g, a) = small(t.path());
    let out = t.path().join("al");
    ok(&["align-all", "--genes", p(&g), "--annotation", p(&a), "--out", p(&out)]);
    assert_eq!(files(&out), ["s1g1_c1__s2g1.tsv", "s1g1_x__s2g1.tsv", "s2g1_c1__s1g1.tsv"]);
}

#[test]
fn missing_annotation_exits_with_input_error() {
    let t = TempDir::new().unwrap();
    let (g, _) = simulate(t.path(), 1);
    let o = run(&["align-all", "--genes", p(&g), "--annotation", p(&t.path().join("none.tsv")), "--out", p(&t.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn msa_lists_missing_pairs() {
    let t = TempDir::new().unwrap();
    let (g, a) = simulate(t.path(), 2);
    let al = t.path().join("al");
    ok(&["align-all", "--genes", p(&g), "--annotation", p(&a), "--out", p(&al)]);
    let o = run(&["msa", "--genes", p(&g), "--annotation", p(&a), "--alignments", p(&al)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s1g1_c1/s1g1"));
}

#[test]
fn reruns_are_byte_identical() {
    let t = TempDir::new().unwrap();
    let (g, a) = simulate(t.path(), 4);
    let (x, y) = (t.path().join("x"), t.path().join("y"));
    ok(&["align-all", "--genes", p(&g), "--annotation", p(&a), "--out", p(&x), "--threads", "1"]);
    ok(&["align-all", "--genes", p(&g), "--annotation", p(&a), "--out", p(&y), "--threads", "3"]);
    assert_eq!(files(&x), files(&y));
    for f in files(&x) {
        assert_eq!(fs::read(x.join(&f)).unwrap(), fs::read(y.join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn evaluate_self_alignments_gives_full_coverage() {
    let t = TempDir::new().unwrap();
    let (g, a) = simulate(t.path(), 5);
    let ann = fs::read_to_string(&a).unwrap();
    let al = t.path().join("al");
    fs::create_dir(&al).unwrap();
    let mut pairs: Vec<(String, String)> = ann.lines().map(|l| l.split('\t')).map(|mut f| (f.next().unwrap().into(), f.next().unwrap().into())).collect();
    pairs.dedup();
    for (gene, cds) in &pairs {
        let o = ok(&["align-pair", "--genes", p(&g), "--annotation", p(&a), "--cds", cds, "--gene", gene]);
        fs::write(al.join(format!("{cds}__{gene}.tsv")), o.stdout).unwrap();
    }
    let o = ok(&["evaluate", "--genes", p(&g), "--annotation", p(&a), "--alignments", p(&al)]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), pairs.len());
    assert!(rows.iter().all(|r| r.split('\t').nth(2) == Some("1.0000")), "{text}");
}

#[test]
fn pipeline_recovers_truth_and_multi_clusters_refine() {
    let t = TempDir::new().unwrap();
    let (g, a) = simulate(&t.path().join("sim"), 7);
    let out = t.path().join("run");
    ok(&["pipeline", "--genes", p(&g), "--annotation", p(&a), "--out", p(&out)]);
    let truth = fs::read_to_string(t.path().join("sim/truth.tsv")).unwrap();
    let groups: Vec<Vec<String>> = truth
        .lines()
        .filter(|l| l.starts_with("cluster\t"))
        .map(|l| l.split('\t').nth(2).unwrap().split(',').map(String::from).collect())
        .collect();
    let pc = ClusterSet::parse(&fs::read_to_string(out.join("pairwise_clusters.tsv")).unwrap()).unwrap();
    assert_eq!(pc.clusters, groups);

    // the same through the separate commands
    let msa = t.path().join("msa.tsv");
    ok(&["msa", "--genes", p(&g), "--annotation", p(&a), "--alignments", p(&out.join("alignments")), "--out", p(&msa)]);
    assert_eq!(fs::read(&msa).unwrap(), fs::read(out.join("msa.tsv")).unwrap());
    let o = ok(&["cluster-multi", "--genes", p(&g), "--annotation", p(&a), "--msa", p(&msa)]);
    let mc = ClusterSet::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(pc.refines(&mc));
    let o = ok(&["cds-msa", "--genes", p(&g), "--annotation", p(&a), "--msa", p(&msa)]);
    assert_eq!(o.stdout, fs::read(out.join("cds_msa.fa")).unwrap());
}

#[test]
fn external_aligner_hook_runs() {
    use std::os::unix::fs::PermissionsExt;
    let t = TempDir::new().unwrap();
    let (g, a) = simulate(&t.path().join("sim"), 7);
    let out = t.path().join("run");
    ok(&["pipeline", "--genes", p(&g), "--annotation", p(&a), "--out", p(&out)]);
    // pads every segment with trailing gaps to the longest one
    let script = t.path().join("pad.sh");
    fs::write(
        &script,
        "#!/bin/sh\nawk '/^>/{n++; id[n]=$0; next} {s[n]=s[n] $0} END{m=0; for(i=1;i<=n;i++) if(length(s[i])>m) m=length(s[i]); \
         for(i=1;i<=n;i++){r=s[i]; while(length(r)<m) r=r \"-\"; print id[i]; print r}}'\n",
    )
    .unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let fa = t.path().join("ext.fa");
    ok(&["cds-msa", "--genes", p(&g), "--annotation", p(&a), "--msa", p(&out.join("msa.tsv")), "--aligner-cmd", p(&script), "--out", p(&fa)]);
    let o = ok(&["evaluate", "--genes", p(&g), "--annotation", p(&a), "--cds-msa", p(&fa)]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("columns\t"));
}

#[test]
fn scoring_file_and_calibration() {
    let t = TempDir::new().unwrap();
    let o = ok(&["calibrate"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("tier1 = "));
    let cfg = t.path().join("s.conf");
    fs::write(&cfg, &text).unwrap();
    let (g, a) = simulate(&t.path().join("sim"), 1);
    ok(&["align-all", "--scoring", p(&cfg), "--genes", p(&g), "--annotation", p(&a), "--out", p(&t.path().join("al"))]);
    fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = run(&["align-all", "--scoring", p(&cfg), "--genes", p(&g), "--annotation", p(&a), "--out", p(&t.path().join("al"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn version_is_printed() {
    let o = ok(&["--version"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("cdsalign "));
}
