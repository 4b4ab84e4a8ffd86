use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use orgeval::compare::{build_report, write_distribution_stats, write_quartile_matrix, write_rank_table};
use orgeval::corpus::{load_incidence, load_publications, load_registry, load_roster, load_scheme, Corpus};
use orgeval::disambig::{disambiguate, load_clusters, save_clusters};
use orgeval::fss::{
    build_citation_cells, read_researcher_scores, read_university_scores, write_researcher_scores,
    write_university_scores,
};
use orgeval::pipeline::{finalize, score_supervised, score_unsupervised};
use orgeval::staff::{derive_staff, read_staff, write_review_queue, write_staff, DerivedStaff};
use orgeval::synth::generate;

use crate::config::Resolved;
use crate::manifest;

pub const CORPUS: &str = "corpus.jsonl";
pub const CLUSTERS: &str = "clusters.jsonl";
pub const STAFF: &str = "staff.csv";
pub const REVIEW_QUEUE: &str = "review_queue.csv";
pub const SCORES_RESEARCHERS: &str = "scores_researchers.csv";
pub const SCORES_UNIVERSITIES: &str = "scores_universities.csv";
pub const EXCLUSIONS: &str = "exclusions.json";
pub const REPORT_JSON: &str = "report.json";
pub const RANK_TABLE: &str = "rank_table.csv";
pub const QUARTILE_MATRIX: &str = "quartile_matrix.csv";
pub const DISTRIBUTIONS: &str = "distribution_stats.csv";
pub const REPORT_TEXT: &str = "report.txt";

/// A file a previous subcommand should have written.
#[derive(Debug)]
pub struct MissingArtifact {
    pub path: PathBuf,
    pub step: &'static str,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} not found; run `{}` first", self.path.display(), self.step)
    }
}

impl std::error::Error for MissingArtifact {}

/// An input the user supplies (or `synth` writes).
#[derive(Debug)]
pub struct MissingInput {
    pub path: PathBuf,
    pub flag: &'static str,
}

impl fmt::Display for MissingInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "input {} not found; pass --{} or run `synth`", self.path.display(), self.flag)
    }
}

impl std::error::Error for MissingInput {}

fn artifact(r: &Resolved, name: &str, step: &'static str) -> Result<PathBuf> {
    let path = r.out.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(MissingArtifact { path, step }.into())
    }
}

fn input(path: &Path, flag: &'static str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(MissingInput {
            path: path.to_path_buf(),
            flag,
        }
        .into())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> orgeval::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn prepare(r: &Resolved) -> Result<()> {
    std::fs::create_dir_all(&r.out).with_context(|| format!("creating {}", r.out.display()))
}

fn record(r: &Resolved, step: &str, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<()> {
    manifest::record(&r.out, step, &r.canonical(), r.pipeline.seed, inputs, outputs)
}

pub fn synth(r: &Resolved) -> Result<()> {
    prepare(r)?;
    let out = generate(&r.synth)?;
    let written = out.write_to(&r.out)?;
    log::info!(
        "{} persons, {} roster entries, {} universities",
        out.truth.persons.len(),
        out.roster.len(),
        out.registry.universities().len()
    );
    record(r, "synth", &[], &written)
}

pub fn ingest(r: &Resolved) -> Result<()> {
    prepare(r)?;
    let src = input(&r.inputs.publications, "publications")?;
    let corpus = load_publications(&src, &r.pipeline.ingest_options())?;
    let dst = r.out.join(CORPUS);
    corpus.write_jsonl(&dst)?;
    log::info!("{} publications, {} mentions", corpus.len(), corpus.mention_count());
    record(r, "ingest", &[src], &[dst])
}

pub fn disambiguate_step(r: &Resolved) -> Result<()> {
    let src = artifact(r, CORPUS, "ingest")?;
    let corpus = Corpus::read_jsonl(&src)?;
    let clusters = disambiguate(&corpus, &r.pipeline.rules)?;
    let dst = r.out.join(CLUSTERS);
    save_clusters(&clusters, &dst)?;
    log::info!("{} clusters from {} mentions", clusters.len(), corpus.mention_count());
    record(r, "disambiguate", &[src], &[dst])
}

pub fn derive_staff_step(r: &Resolved) -> Result<()> {
    let src = artifact(r, CLUSTERS, "disambiguate")?;
    let registry_path = input(&r.inputs.registry, "registry")?;
    let clusters = load_clusters(&src)?;
    let registry = load_registry(&registry_path)?;
    let staff = derive_staff(&clusters, &registry, &r.pipeline.filters);
    let (staff_path, queue_path) = (r.out.join(STAFF), r.out.join(REVIEW_QUEUE));
    write_with(&staff_path, |w| write_staff(&staff, w))?;
    write_with(&queue_path, |w| write_review_queue(&staff, w))?;
    log::info!("{} staff units, {} clusters queued for review", staff.unit_count(), staff.review_queue.len());
    record(r, "derive-staff", &[src, registry_path], &[staff_path, queue_path])
}

#[derive(Serialize)]
struct ExclusionLog<'a> {
    excluded_scs: &'a std::collections::BTreeMap<String, orgeval::fss::ExclusionReason>,
    without_baseline: &'a [(orgeval::fss::Mode, String)],
    baselines: &'a std::collections::BTreeMap<orgeval::fss::Mode, std::collections::BTreeMap<String, orgeval::fss::SCBaseline>>,
}

pub fn score(r: &Resolved) -> Result<()> {
    let corpus_path = artifact(r, CORPUS, "ingest")?;
    let clusters_path = artifact(r, CLUSTERS, "disambiguate")?;
    let staff_path = artifact(r, STAFF, "derive-staff")?;
    let roster_path = input(&r.inputs.roster, "roster")?;
    let scheme_path = input(&r.inputs.scheme, "scheme")?;

    let corpus = Corpus::read_jsonl(&corpus_path)?;
    let clusters = load_clusters(&clusters_path)?;
    let staff = DerivedStaff::from_units(read_staff(File::open(&staff_path)?)?);
    let roster = load_roster(&roster_path, &r.pipeline.window)?;
    let scheme = load_scheme(&scheme_path)?;
    let incidence = r.inputs.incidence.as_deref().map(load_incidence).transpose()?;

    let cells = build_citation_cells(&corpus);
    let mut scores = score_supervised(&corpus, &cells, &roster, incidence.as_ref(), &r.pipeline)?;
    scores.extend(score_unsupervised(&corpus, &cells, &clusters, &staff, &r.pipeline)?);
    let f = finalize(scores, &scheme, &r.pipeline.exclusions)?;

    let (res_path, uni_path, ex_path) = (
        r.out.join(SCORES_RESEARCHERS),
        r.out.join(SCORES_UNIVERSITIES),
        r.out.join(EXCLUSIONS),
    );
    write_with(&res_path, |w| write_researcher_scores(&f.researchers, w))?;
    write_with(&uni_path, |w| write_university_scores(&f.universities, w))?;
    write_json(
        &ex_path,
        &ExclusionLog {
            excluded_scs: &f.excluded_scs,
            without_baseline: &f.without_baseline,
            baselines: &f.baselines,
        },
    )?;
    log::info!("{} researchers scored, {} SCs excluded", f.researchers.len(), f.excluded_scs.len());
    let mut inputs = vec![corpus_path, clusters_path, staff_path, roster_path, scheme_path];
    inputs.extend(r.inputs.incidence.clone());
    record(r, "score", &inputs, &[res_path, uni_path, ex_path])
}

pub fn compare(r: &Resolved) -> Result<()> {
    let res_path = artifact(r, SCORES_RESEARCHERS, "score")?;
    let uni_path = artifact(r, SCORES_UNIVERSITIES, "score")?;
    let researchers = read_researcher_scores(File::open(&res_path)?)?;
    let universities = read_university_scores(File::open(&uni_path)?)?;
    let report = build_report(&researchers, &universities, &r.pipeline.report)?;

    let outputs = [REPORT_JSON, RANK_TABLE, QUARTILE_MATRIX, DISTRIBUTIONS].map(|n| r.out.join(n));
    write_json(&outputs[0], &report)?;
    write_with(&outputs[1], |w| write_rank_table(&report.rank_table, w))?;
    write_with(&outputs[2], |w| write_quartile_matrix(&report.quartile_matrix, w))?;
    write_with(&outputs[3], |w| write_distribution_stats(&report.distributions, w))?;
    record(r, "compare", &[res_path, uni_path], &outputs)
}

fn num(v: &serde_json::Value) -> String {
    v.as_f64().map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

/// Plain-text summary of `report.json`.
pub fn render(report: &serde_json::Value) -> String {
    let mut s = String::new();
    let n = &report["rank_table"]["n"];
    let _ = writeln!(s, "universities ranked in both modes: {n}");
    if let Some(c) = report["correlations"].get(0) {
        let _ = writeln!(s, "overall pearson {} spearman {}", num(&c["pearson"]), num(&c["spearman"]));
    }
    let _ = writeln!(s, "\nquartiles (rows unsupervised, columns supervised)");
    if let Some(rows) = report["quartile_matrix"]["counts"].as_array() {
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row.as_array().into_iter().flatten().map(|c| format!("{:>4}", c.to_string())).collect();
            let _ = writeln!(s, "  Q{} {}", i + 1, cells.join(""));
        }
    }
    let q = &report["quartile_summary"];
    let _ = writeln!(
        s,
        "same quartile {}, better unsupervised {}, better supervised {}",
        q["diagonal"], q["above_diagonal"], q["below_diagonal"]
    );
    for (key, label) in [("two_quartile_jumps", "two-quartile jumps"), ("three_quartile_jumps", "three-quartile jumps")] {
        let jumps = report[key].as_array().cloned().unwrap_or_default();
        let _ = writeln!(s, "{label}: {}", jumps.len());
        for j in jumps {
            let _ = writeln!(
                s,
                "  {} Q{} -> Q{}",
                j["university_id"].as_str().unwrap_or("?"),
                j["quartile_unsupervised"],
                j["quartile_supervised"]
            );
        }
    }
    let _ = writeln!(
        s,
        "max |delta rank| {}, among supervised top {} {}",
        report["max_abs_delta_rank"], report["top_k"], report["max_abs_delta_rank_top_k"]
    );
    let d = &report["deviation_correlations"];
    let _ = writeln!(
        s,
        "head-count deviation vs: SC mean {}, SC median {}, university score {}, rank change {}",
        num(&d["sc_obs_vs_mean"]),
        num(&d["sc_obs_vs_median"]),
        num(&d["university_obs_vs_fss_u"]),
        num(&d["university_obs_vs_delta_rank"])
    );
    if let Some(u) = report["unpaired_universities"].as_array().filter(|u| !u.is_empty()) {
        let names: Vec<&str> = u.iter().filter_map(|v| v.as_str()).collect();
        let _ = writeln!(s, "scored in one mode only: {}", names.join(", "));
    }
    s
}

pub fn report(r: &Resolved) -> Result<()> {
    let src = artifact(r, REPORT_JSON, "compare")?;
    let value: serde_json::Value = serde_json::from_slice(&std::fs::read(&src)?)?;
    let text = render(&value);
    let dst = r.out.join(REPORT_TEXT);
    std::fs::write(&dst, &text).with_context(|| format!("writing {}", dst.display()))?;
    print!("{text}");
    record(r, "report", &[src], &[dst])
}
