use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use orgeval::corpus::YearRange;
use orgeval::disambig::ScoringRules;
use orgeval::fss::ObsRule;
use orgeval::pipeline::PipelineConfig;
use orgeval::synth::SynthConfig;

/// Flags shared by every subcommand. Each overrides the config file.
#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Evaluation window, e.g. `2015:2019`.
    #[arg(long, global = true)]
    pub window: Option<String>,
    #[arg(long, global = true)]
    pub min_clusters: Option<usize>,
    #[arg(long, global = true)]
    pub min_age: Option<i32>,
    #[arg(long, global = true)]
    pub recency: Option<i32>,
    #[arg(long, global = true)]
    pub min_obs: Option<usize>,
    /// `literal` or `strict`.
    #[arg(long, global = true)]
    pub obs_rule: Option<String>,
    /// Disambiguation rules file (TOML); replaces the `[rules]` table.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Working directory for inputs and artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub publications: Option<PathBuf>,
    #[arg(long, global = true)]
    pub roster: Option<PathBuf>,
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    #[arg(long, global = true)]
    pub scheme: Option<PathBuf>,
    /// Field-to-SC incidence table; optional.
    #[arg(long, global = true)]
    pub incidence: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Paths {
    publications: Option<PathBuf>,
    roster: Option<PathBuf>,
    registry: Option<PathBuf>,
    scheme: Option<PathBuf>,
    incidence: Option<PathBuf>,
}

pub struct InputPaths {
    pub publications: PathBuf,
    pub roster: PathBuf,
    pub registry: PathBuf,
    pub scheme: PathBuf,
    /// `None` when neither given nor present in the working directory.
    pub incidence: Option<PathBuf>,
}

pub struct Resolved {
    pub pipeline: PipelineConfig,
    pub synth: SynthConfig,
    pub inputs: InputPaths,
    pub out: PathBuf,
}

impl Resolved {
    /// Canonical text of everything that shapes outputs, used for the
    /// manifest hash.
    pub fn canonical(&self) -> String {
        format!("{}\n[synth]\n{}", self.pipeline.to_toml(), toml::to_string(&self.synth).expect("synth config serializes"))
    }
}

/// Splits the `[paths]` and `[synth]` tables off the file; the rest is the
/// pipeline config.
fn read_file(path: &Path) -> Result<(PipelineConfig, SynthConfig, Paths)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut table: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
    let paths = match table.remove("paths") {
        Some(v) => v.try_into().context("config [paths]")?,
        None => Paths::default(),
    };
    let synth = match table.remove("synth") {
        Some(v) => v.try_into().context("config [synth]")?,
        None => SynthConfig::default(),
    };
    let pipeline = PipelineConfig::from_toml(&toml::to_string(&table)?)?;
    Ok((pipeline, synth, paths))
}

pub fn resolve(o: &Overrides) -> Result<Resolved> {
    let (mut p, mut synth, paths) = match &o.config {
        Some(path) => read_file(path)?,
        None => (PipelineConfig::default(), SynthConfig::default(), Paths::default()),
    };
    if let Some(s) = o.seed {
        p.seed = s;
    }
    if let Some(w) = &o.window {
        p.window = w.parse::<YearRange>()?;
    }
    if let Some(v) = o.min_clusters {
        p.filters.min_clusters = v;
    }
    if let Some(v) = o.min_age {
        p.filters.min_age = v;
    }
    if let Some(v) = o.recency {
        p.filters.recency_year = v;
    }
    if let Some(v) = o.min_obs {
        p.exclusions.min_obs = v;
    }
    if let Some(r) = &o.obs_rule {
        p.exclusions.rule = r.parse::<ObsRule>()?;
    }
    if let Some(path) = &o.rules {
        p.rules = ScoringRules::load(path)?;
    }
    p.validate()?;
    if p.filters.recency_year < p.window.end {
        bail!("recency year {} precedes the window end {}", p.filters.recency_year, p.window.end);
    }

    synth.seed = p.seed;
    synth.window = p.window;
    synth.through_year = p.filters.recency_year;

    let pick = |flag: &Option<PathBuf>, file: Option<PathBuf>, name: &str| {
        flag.clone().or(file).unwrap_or_else(|| o.out.join(name))
    };
    let incidence = pick(&o.incidence, paths.incidence, orgeval::synth::INCIDENCE_FILE);
    let incidence_given = o.incidence.is_some() || incidence.exists();
    Ok(Resolved {
        inputs: InputPaths {
            publications: pick(&o.publications, paths.publications, orgeval::synth::PUBLICATIONS_FILE),
            roster: pick(&o.roster, paths.roster, orgeval::synth::ROSTER_FILE),
            registry: pick(&o.registry, paths.registry, orgeval::synth::REGISTRY_FILE),
            scheme: pick(&o.scheme, paths.scheme, orgeval::synth::SCHEME_FILE),
            incidence: incidence_given.then_some(incidence),
        },
        pipeline: p,
        synth,
        out: o.out.clone(),
    })
}
