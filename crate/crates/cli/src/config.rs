//! Command-line flags and the validated run configuration built from them.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prokwo_core::corpus::SpeakerFilter;
use prokwo_core::distributional::{CountingOptions, Predictor, WindowFillers, DEFAULT_WINDOW};
use prokwo_core::regression::{GlmmOptions, ModelSpec};
use prokwo_core::rng::DEFAULT_SEED;
use prokwo_core::{age_in_range, MAX_AGE_MONTHS, MIN_AGE_MONTHS};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "prokwo", version, about = "Distributional predictors of early word production")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse transcripts into corpus.jsonl and list skipped documents.
    Ingest,
    /// Per-age production proportions from the survey data.
    Mcdip,
    /// Frequency, lexical diversity, document diversity and Pro-KWo per age and word.
    Predictors,
    /// Correlations among predictors and with MCDIp, overall and per class.
    Correlate,
    /// Pro-KWo computed from permuted MCDIp values.
    Shuffle,
    /// Mixed-effects logistic regressions of word production.
    Fit,
    /// Run every stage and write the consolidated tables and figures.
    Report,
    /// Compare report outputs against the reference qualitative pattern.
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ingest => "ingest",
            Self::Mcdip => "mcdip",
            Self::Predictors => "predictors",
            Self::Correlate => "correlate",
            Self::Shuffle => "shuffle",
            Self::Fit => "fit",
            Self::Report => "report",
            Self::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Chat,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fillers {
    All,
    McdiOnly,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Directory of transcripts (`.cha` for chat, `.jsonl` for normalized), or a single file.
    #[arg(long, global = true)]
    pub corpus_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "chat")]
    pub corpus_format: CorpusFormat,
    /// CSV with word, mcdi_category, grammatical_class, excluded.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Extra words to exclude, one per line.
    #[arg(long, global = true)]
    pub exclusions: Option<PathBuf>,
    /// Long-format CSV with child_id, age_months, word, produced.
    #[arg(long, global = true)]
    pub administrations: Option<PathBuf>,
    /// Read MCDIp from a previous mcdip.csv instead of the administrations.
    #[arg(long, global = true)]
    pub mcdip: Option<PathBuf>,
    /// Read predictors from a previous predictors.csv instead of the corpus.
    #[arg(long, global = true)]
    pub predictors: Option<PathBuf>,
    /// Ages in months: a range `16..30`, a list `18,24,30`, or a mix.
    #[arg(long, global = true, default_value = "16..30")]
    pub ages: AgeList,
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Count the target child's own utterances too.
    #[arg(long, global = true)]
    pub include_child_speech: bool,
    /// Do not count a word co-occurring with itself.
    #[arg(long, global = true)]
    pub no_diagonal: bool,
    /// Whether non-checklist tokens take up window positions.
    #[arg(long, global = true, value_enum, default_value = "all")]
    pub window_fillers: Fillers,
    #[arg(long, global = true, default_value_t = 1000)]
    pub shuffles: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// `single:<predictor>` or `full`.
    #[arg(long, global = true)]
    pub model: Option<ModelSelector>,
    /// Objective evaluations allowed per variance-component search.
    #[arg(long, global = true, default_value_t = GlmmOptions::default().outer.max_evaluations)]
    pub max_evaluations: usize,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Also write the co-occurrence counts as cooccurrence.csv.
    #[arg(long, global = true)]
    pub dump_cooccurrence: bool,
}

/// Sorted, deduplicated ages within the checklist range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AgeList(pub Vec<u32>);

impl FromStr for AgeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut ages = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("invalid age {t:?}"));
            match part.split_once("..") {
                Some((lo, hi)) => {
                    let hi = hi.strip_prefix('=').unwrap_or(hi);
                    let (lo, hi) = (parse(lo)?, parse(hi)?);
                    if lo > hi {
                        return Err(format!("empty age range {part:?}"));
                    }
                    ages.extend(lo..=hi);
                }
                None => ages.push(parse(part)?),
            }
        }
        if ages.is_empty() {
            return Err("no ages given".into());
        }
        if let Some(bad) = ages.iter().find(|&&a| !age_in_range(a)) {
            return Err(format!("age {bad} outside {MIN_AGE_MONTHS}..{MAX_AGE_MONTHS}"));
        }
        ages.sort_unstable();
        ages.dedup();
        Ok(Self(ages))
    }
}

impl fmt::Display for AgeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Predictor by its short name or its predictors.csv column name.
pub fn parse_predictor(name: &str) -> Option<Predictor> {
    match name {
        "frequency_log10" => Some(Predictor::Frequency),
        other => other.parse().ok(),
    }
}

/// Column of predictors.csv holding `p`.
pub fn predictor_column(p: Predictor) -> &'static str {
    match p {
        Predictor::Frequency => "frequency_log10",
        other => other.as_str(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSelector {
    Single(Predictor),
    Full,
}

impl ModelSelector {
    /// The four single-predictor models followed by the full model.
    pub fn all() -> Vec<ModelSelector> {
        let mut v: Vec<_> = Predictor::ALL.into_iter().map(Self::Single).collect();
        v.push(Self::Full);
        v
    }

    pub fn spec(self, age: u32) -> ModelSpec {
        match self {
            Self::Single(p) => ModelSpec::single(age, p),
            Self::Full => ModelSpec::full(age),
        }
    }

    pub fn predictors(self) -> Vec<Predictor> {
        match self {
            Self::Single(p) => vec![p],
            Self::Full => Predictor::ALL.to_vec(),
        }
    }
}

impl FromStr for ModelSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "full" {
            return Ok(Self::Full);
        }
        let name = s
            .strip_prefix("single:")
            .ok_or_else(|| format!("expected single:<predictor> or full, got {s:?}"))?;
        parse_predictor(name).map(Self::Single).ok_or_else(|| {
            let known: Vec<&str> = Predictor::ALL.iter().map(|p| p.as_str()).collect();
            format!("unknown predictor {name:?} (known: {})", known.join(", "))
        })
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(p) => write!(f, "single:{p}"),
            Self::Full => f.write_str("full"),
        }
    }
}

impl Serialize for ModelSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        display(self, s)
    }
}

/// Where the corpus comes from.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusSource {
    pub path: PathBuf,
    pub format: CorpusFormat,
}

/// Validated configuration of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub corpus: Option<CorpusSource>,
    pub lexicon: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    pub administrations: Option<PathBuf>,
    pub mcdip: Option<PathBuf>,
    pub predictors: Option<PathBuf>,
    pub ages: AgeList,
    pub window: usize,
    #[serde(serialize_with = "display")]
    pub speaker_filter: SpeakerFilter,
    pub include_diagonal: bool,
    #[serde(serialize_with = "display")]
    pub window_fillers: WindowFillers,
    pub shuffles: u64,
    pub seed: u64,
    pub models: Vec<ModelSelector>,
    pub max_evaluations: usize,
    pub out: PathBuf,
    pub threads: usize,
    pub svg: bool,
    pub dump_cooccurrence: bool,
}

/// Which inputs a command reads.
#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    corpus: bool,
    lexicon: bool,
    mcdip: bool,
    predictors: bool,
    records: bool,
}

fn needs(command: Command, o: &Options) -> Needs {
    let predictors_from_corpus = o.predictors.is_none();
    match command {
        Command::Ingest => Needs {
            corpus: true,
            ..Needs::default()
        },
        Command::Mcdip => Needs {
            lexicon: true,
            records: true,
            ..Needs::default()
        },
        Command::Predictors => Needs {
            corpus: true,
            lexicon: true,
            mcdip: true,
            ..Needs::default()
        },
        Command::Correlate => Needs {
            corpus: predictors_from_corpus,
            lexicon: true,
            mcdip: true,
            predictors: true,
            ..Needs::default()
        },
        Command::Shuffle => Needs {
            corpus: true,
            lexicon: true,
            mcdip: true,
            ..Needs::default()
        },
        Command::Fit => Needs {
            corpus: predictors_from_corpus,
            lexicon: true,
            mcdip: true,
            predictors: true,
            records: true,
        },
        Command::Report => Needs {
            corpus: true,
            lexicon: true,
            mcdip: true,
            predictors: true,
            records: true,
        },
        Command::Check => Needs::default(),
    }
}

fn readable(path: &Path, flag: &str) -> Result<()> {
    std::fs::metadata(path)
        .map(|_| ())
        .map_err(|e| CliError::usage(format!("--{flag} {}: {e}", path.display())))
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str, command: Command) -> Result<&'a PathBuf> {
    value
        .as_ref()
        .ok_or_else(|| CliError::usage(format!("`{}` needs --{flag}", command.name())))
}

impl RunConfig {
    /// Check that every flag the command depends on is present and usable.
    pub fn from_options(command: Command, o: &Options) -> Result<Self> {
        let need = needs(command, o);
        if o.window == 0 {
            return Err(CliError::usage("--window must be at least 1"));
        }
        if o.max_evaluations == 0 {
            return Err(CliError::usage("--max-evaluations must be at least 1"));
        }
        if o.shuffles == 0 {
            return Err(CliError::usage("--shuffles must be at least 1"));
        }

        let corpus = if need.corpus || (command == Command::Report && o.corpus_dir.is_some()) {
            let path = required(&o.corpus_dir, "corpus-dir", command)?;
            readable(path, "corpus-dir")?;
            Some(CorpusSource {
                path: path.clone(),
                format: o.corpus_format,
            })
        } else {
            None
        };
        let lexicon = if need.lexicon || need.records {
            let p = required(&o.lexicon, "lexicon", command)?;
            readable(p, "lexicon")?;
            Some(p.clone())
        } else {
            None
        };
        if let Some(p) = &o.exclusions {
            readable(p, "exclusions")?;
        }

        let mcdip_from_file = need.mcdip && o.mcdip.is_some() && command != Command::Report;
        let administrations = if need.records || (need.mcdip && !mcdip_from_file) {
            let p = o.administrations.as_ref().ok_or_else(|| {
                if need.mcdip && !need.records {
                    CliError::usage(format!("`{}` needs --administrations or --mcdip", command.name()))
                } else {
                    CliError::usage(format!("`{}` needs --administrations", command.name()))
                }
            })?;
            readable(p, "administrations")?;
            Some(p.clone())
        } else {
            None
        };
        let mcdip = if mcdip_from_file {
            let p = o.mcdip.clone().expect("checked above");
            readable(&p, "mcdip")?;
            Some(p)
        } else {
            None
        };
        let predictors = match &o.predictors {
            Some(p) if need.predictors && command != Command::Report => {
                readable(p, "predictors")?;
                Some(p.clone())
            }
            _ => None,
        };

        let models = match (command, o.model) {
            (Command::Fit, Some(m)) => vec![m],
            (Command::Fit, None) => return Err(CliError::usage("`fit` needs --model single:<predictor> or --model full")),
            (Command::Report, Some(m)) => vec![m],
            (Command::Report, None) => ModelSelector::all(),
            _ => Vec::new(),
        };
        if command == Command::Check {
            readable(&o.out, "out")?;
        }

        let counting = counting_options(o);
        Ok(Self {
            command: command.name(),
            corpus,
            lexicon,
            exclusions: o.exclusions.clone(),
            administrations,
            mcdip,
            predictors,
            ages: o.ages.clone(),
            window: counting.window,
            speaker_filter: speaker_filter(o),
            include_diagonal: counting.include_diagonal,
            window_fillers: counting.fillers,
            shuffles: o.shuffles,
            seed: o.seed,
            models,
            max_evaluations: o.max_evaluations,
            out: o.out.clone(),
            threads: o.threads,
            svg: o.svg,
            dump_cooccurrence: o.dump_cooccurrence,
        })
    }

    pub fn glmm(&self) -> GlmmOptions {
        let mut options = GlmmOptions::default();
        options.outer.max_evaluations = self.max_evaluations;
        options
    }

    pub fn counting(&self) -> CountingOptions {
        CountingOptions {
            window: self.window,
            include_diagonal: self.include_diagonal,
            fillers: self.window_fillers,
        }
    }
}

fn display<T: fmt::Display, S: serde::Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

fn counting_options(o: &Options) -> CountingOptions {
    CountingOptions {
        window: o.window,
        include_diagonal: !o.no_diagonal,
        fillers: match o.window_fillers {
            Fillers::All => WindowFillers::AllTokens,
            Fillers::McdiOnly => WindowFillers::LexiconOnly,
        },
    }
}

fn speaker_filter(o: &Options) -> SpeakerFilter {
    if o.include_child_speech {
        SpeakerFilter::AllSpeakers
    } else {
        SpeakerFilter::ExcludeTargetChild
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn age_lists() {
        assert_eq!("16..30".parse::<AgeList>().unwrap().0.len(), 15);
        assert_eq!("24,18,21..22".parse::<AgeList>().unwrap().0, [18, 21, 22, 24]);
        assert_eq!("18..=19".parse::<AgeList>().unwrap().0, [18, 19]);
        assert!("15..20".parse::<AgeList>().is_err());
        assert!("20..18".parse::<AgeList>().is_err());
        assert!("".parse::<AgeList>().is_err());
        assert!("x".parse::<AgeList>().is_err());
    }

    #[test]
    fn model_selectors() {
        assert_eq!("full".parse::<ModelSelector>().unwrap(), ModelSelector::Full);
        assert_eq!(
            "single:pro_kwo".parse::<ModelSelector>().unwrap(),
            ModelSelector::Single(Predictor::ProKwo)
        );
        assert_eq!(
            "single:frequency_log10".parse::<ModelSelector>().unwrap(),
            ModelSelector::Single(Predictor::Frequency)
        );
        let err = "single:salience".parse::<ModelSelector>().unwrap_err();
        assert!(err.contains("unknown predictor"));
        assert!("pro_kwo".parse::<ModelSelector>().is_err());
    }

    #[test]
    fn selector_display_round_trips() {
        for m in ModelSelector::all() {
            assert_eq!(m.to_string().parse::<ModelSelector>().unwrap(), m);
        }
    }
}
