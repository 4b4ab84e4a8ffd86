//! In-memory wiring of the stages, shared by the CLI and the tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::compare::{build_report, ComparisonReport, ReportParams};
use crate::corpus::{Corpus, DocType, IncidenceTable, IngestOptions, RosterEntry, SCScheme, UniversityRegistry, YearRange};
use crate::disambig::{disambiguate, AuthorCluster, ScoringRules};
use crate::fss::{
    apply_exclusions, build_citation_cells, compute_fss_u, compute_sc_baselines, score_subjects, CellMap,
    ExclusionParams, ExclusionReason, Level, Mode, ResearcherScore, SCBaseline, ScoringContext, Subject,
    UniversityScore,
};
use crate::staff::{derive_staff, DerivedStaff, FilterParams};
use crate::{Error, Result};

/// Every knob of a run. Deserializes from TOML; missing keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub window: YearRange,
    /// Years of production, ending at the window end, that decide a roster
    /// member's subject category.
    pub sc_lookback: u32,
    pub doc_types: BTreeSet<DocType>,
    pub rules: ScoringRules,
    pub filters: FilterParams,
    pub exclusions: ExclusionParams,
    pub report: ReportParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            window: YearRange { start: 2015, end: 2019 },
            sc_lookback: 19,
            doc_types: DocType::default_filter(),
            rules: ScoringRules::default(),
            filters: FilterParams::default(),
            exclusions: ExclusionParams::default(),
            report: ReportParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        YearRange::new(self.window.start, self.window.end)?;
        if self.sc_lookback == 0 {
            return Err(Error::invalid("config", "sc_lookback must be positive"));
        }
        if self.doc_types.is_empty() {
            return Err(Error::invalid("config", "doc_types is empty"));
        }
        self.rules.validate()
    }

    /// Keeps publications up to the recency year so the recency filter can
    /// see them.
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            window: self.window,
            doc_filter: self.doc_types.clone(),
            sc_lookback: self.sc_lookback,
            through_year: Some(self.filters.recency_year),
        }
    }

    pub fn lookback(&self) -> YearRange {
        YearRange {
            start: self.window.end - self.sc_lookback as i32 + 1,
            end: self.window.end,
        }
    }

    fn context<'a>(&self, corpus: &'a Corpus, cells: &'a CellMap, incidence: Option<&'a IncidenceTable>) -> ScoringContext<'a> {
        ScoringContext {
            corpus,
            cells,
            window: self.window,
            lookback: self.lookback(),
            incidence,
            seed: self.seed,
        }
    }
}

/// FSS_R for every roster member with at least one year on staff in the
/// window; members without one are skipped with a warning.
pub fn score_supervised(
    corpus: &Corpus,
    cells: &CellMap,
    roster: &[RosterEntry],
    incidence: Option<&IncidenceTable>,
    cfg: &PipelineConfig,
) -> Result<Vec<ResearcherScore>> {
    let mut subjects = Vec::with_capacity(roster.len());
    for e in roster {
        let s = Subject::supervised(e, corpus, &cfg.window);
        if s.t == 0.0 {
            log::warn!("{} has no years on staff in {}; skipped", e.person_id, cfg.window);
            continue;
        }
        subjects.push(s);
    }
    score_subjects(&subjects, &cfg.context(corpus, cells, incidence))
}

/// FSS_R for every derived staff unit.
pub fn score_unsupervised(
    corpus: &Corpus,
    cells: &CellMap,
    clusters: &[AuthorCluster],
    staff: &DerivedStaff,
    cfg: &PipelineConfig,
) -> Result<Vec<ResearcherScore>> {
    let by_id: HashMap<&str, &AuthorCluster> = clusters.iter().map(|c| (c.cluster_id.as_str(), c)).collect();
    let subjects = staff
        .units()
        .map(|u| Subject::unsupervised(u, &by_id, &cfg.window))
        .collect::<Result<Vec<_>>>()?;
    score_subjects(&subjects, &cfg.context(corpus, cells, None))
}

#[derive(Debug, Clone, Default)]
pub struct Finalized {
    /// Researchers that survived exclusions and have a baseline.
    pub researchers: Vec<ResearcherScore>,
    pub universities: Vec<UniversityScore>,
    pub baselines: BTreeMap<Mode, BTreeMap<String, SCBaseline>>,
    pub excluded_scs: BTreeMap<String, ExclusionReason>,
    /// `(mode, subject_id)` of researchers whose SC had nobody productive in
    /// their mode.
    pub without_baseline: Vec<(Mode, String)>,
}

/// Exclusions over both modes together, then per-mode baselines and FSS_U at
/// every level.
pub fn finalize(scores: Vec<ResearcherScore>, scheme: &SCScheme, params: &ExclusionParams) -> Result<Finalized> {
    let ex = apply_exclusions(scores, scheme, params)?;
    let mut out = Finalized {
        excluded_scs: ex.excluded_scs,
        ..Finalized::default()
    };
    for mode in [Mode::Supervised, Mode::Unsupervised] {
        let (mine, _): (Vec<ResearcherScore>, Vec<_>) = ex.kept.iter().cloned().partition(|s| s.mode == mode);
        if mine.is_empty() {
            continue;
        }
        let baselines = compute_sc_baselines(&mine);
        let (kept, dropped): (Vec<ResearcherScore>, Vec<ResearcherScore>) =
            mine.into_iter().partition(|s| baselines.contains_key(&s.sc_id));
        for d in dropped {
            log::warn!("{} ({mode}): nobody productive in {}; left out of FSS_U", d.subject_id, d.sc_id);
            out.without_baseline.push((mode, d.subject_id));
        }
        for level in Level::ALL {
            out.universities.extend(compute_fss_u(&kept, &baselines, scheme, level)?);
        }
        out.researchers.extend(kept);
        out.baselines.insert(mode, baselines);
    }
    Ok(out)
}

pub struct Inputs<'a> {
    pub corpus: &'a Corpus,
    pub roster: &'a [RosterEntry],
    pub registry: &'a UniversityRegistry,
    pub scheme: &'a SCScheme,
    pub incidence: Option<&'a IncidenceTable>,
}

pub struct RunOutput {
    pub clusters: Vec<AuthorCluster>,
    pub staff: DerivedStaff,
    pub finalized: Finalized,
    pub report: ComparisonReport,
}

/// Disambiguation through comparison in one call.
pub fn run(inputs: &Inputs<'_>, cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let cells = build_citation_cells(inputs.corpus);
    let clusters = disambiguate(inputs.corpus, &cfg.rules)?;
    let staff = derive_staff(&clusters, inputs.registry, &cfg.filters);
    let mut scores = score_supervised(inputs.corpus, &cells, inputs.roster, inputs.incidence, cfg)?;
    scores.extend(score_unsupervised(inputs.corpus, &cells, &clusters, &staff, cfg)?);
    let finalized = finalize(scores, inputs.scheme, &cfg.exclusions)?;
    let report = build_report(&finalized.researchers, &finalized.universities, &cfg.report)?;
    Ok(RunOutput {
        clusters,
        staff,
        finalized,
        report,
    })
}
