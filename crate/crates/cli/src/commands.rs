//! Command execution. Each command loads and validates all of its inputs and
//! computes every output in memory before anything is written to disk.

use std::path::{Path, PathBuf};
use std::time::Instant;

use prokwo_core::distributional::AgeCounts;
use prokwo_core::lexicon::{compute_mcdip, production_records, Administration, Lexicon, McdipTable};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::check::{read_correlations, read_fits, run_checks, CheckOutcome};
use crate::config::{Command, ModelSelector, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{self, LoadedCorpus, LoadedPredictors};
use crate::outputs;
use crate::pipeline::{self, ModelFit};

/// A file to be written into the output directory.
#[derive(Debug, Clone)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub stage: &'static str,
    pub rows: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Digest256 {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub inputs: Vec<Digest256>,
    pub outputs: Vec<OutputEntry>,
    pub stages: Vec<Stage>,
}

pub const MANIFEST: &str = "run_manifest.json";

/// What a finished command reports back.
#[derive(Debug, Clone)]
pub struct Summary {
    pub written: Vec<PathBuf>,
    pub checks: Vec<CheckOutcome>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<Digest256> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Digest256 {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

fn data_rows(bytes: &[u8]) -> usize {
    bytes.iter().filter(|&&b| b == b'\n').count().saturating_sub(1)
}

struct Run<'a> {
    config: &'a RunConfig,
    stages: Vec<Stage>,
    inputs: Vec<PathBuf>,
    outputs: Vec<Output>,
}

impl<'a> Run<'a> {
    fn new(config: &'a RunConfig) -> Self {
        Self {
            config,
            stages: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn timed<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>, rows: impl Fn(&T) -> usize) -> Result<T> {
        let start = Instant::now();
        let value = f()?;
        self.stages.push(Stage {
            stage,
            rows: rows(&value),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(value)
    }

    fn emit(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.outputs.push(Output {
            name: name.into(),
            bytes: bytes.into(),
        });
    }

    fn lexicon(&mut self) -> Result<Lexicon> {
        let path = self.config.lexicon.clone().expect("validated");
        self.inputs.push(path.clone());
        if let Some(ex) = &self.config.exclusions {
            self.inputs.push(ex.clone());
        }
        let ex = self.config.exclusions.clone();
        self.timed("lexicon", || formats::read_lexicon(&path, ex.as_deref()), Lexicon::len)
    }

    fn corpus(&mut self) -> Result<LoadedCorpus> {
        let source = self.config.corpus.clone().expect("validated");
        let loaded = self.timed("corpus", || formats::load_corpus(&source), |c| c.corpus.len())?;
        self.inputs.extend(loaded.files.iter().cloned());
        Ok(loaded)
    }

    fn administrations(&mut self, lexicon: &Lexicon) -> Result<Vec<Administration>> {
        let path = self.config.administrations.clone().expect("validated");
        self.inputs.push(path.clone());
        self.timed(
            "administrations",
            || formats::read_administrations(&path, lexicon),
            Vec::len,
        )
    }

    /// MCDIp from --mcdip, or computed from the administrations.
    fn mcdip(&mut self, lexicon: &Lexicon, admins: Option<&[Administration]>) -> Result<McdipTable> {
        let table = match (&self.config.mcdip, admins) {
            (Some(path), _) => {
                let path = path.clone();
                self.inputs.push(path.clone());
                self.timed("mcdip", || formats::read_mcdip(&path, lexicon), |t| t.ages().count())?
            }
            (None, Some(a)) => {
                let err = self.config.administrations.clone();
                self.timed(
                    "mcdip",
                    || {
                        compute_mcdip(a, lexicon).map_err(|e| match &err {
                            Some(p) => CliError::data(p, e),
                            None => CliError::analysis(e),
                        })
                    },
                    |t| t.ages().count(),
                )?
            }
            (None, None) => {
                let admins = self.administrations(lexicon)?;
                return self.mcdip(lexicon, Some(&admins));
            }
        };
        let source = self
            .config
            .mcdip
            .as_ref()
            .or(self.config.administrations.as_ref())
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        pipeline::check_mcdip_ages(&table, &self.config.ages.0, &source)?;
        Ok(table)
    }

    fn data_error_admins(&self, e: impl std::fmt::Display) -> CliError {
        match &self.config.administrations {
            Some(p) => CliError::data(p, e),
            None => CliError::analysis(e),
        }
    }

    fn counts(&mut self, corpus: &LoadedCorpus, lexicon: &Lexicon) -> Result<Vec<AgeCounts>> {
        let c = self.config;
        self.timed(
            "cooccurrence",
            || {
                Ok(pipeline::count_corpus(
                    &corpus.corpus,
                    lexicon,
                    c.speaker_filter,
                    &c.counting(),
                    &c.ages.0,
                ))
            },
            |v| v.iter().map(|a| a.matrix.nnz()).sum(),
        )
    }

    /// Predictors from --predictors, or computed from the corpus.
    fn predictors(&mut self, lexicon: &Lexicon, mcdip: &McdipTable) -> Result<(LoadedPredictors, Option<LoadedCorpus>)> {
        let ages = self.config.ages.0.clone();
        if let Some(path) = self.config.predictors.clone() {
            self.inputs.push(path.clone());
            let loaded = self.timed(
                "predictors",
                || formats::read_predictors(&path, lexicon),
                |t| t.table.rows().len(),
            )?;
            pipeline::check_table_ages(&loaded.table, &ages, &path.display().to_string())?;
            return Ok((loaded, None));
        }
        let corpus = self.corpus()?;
        let counts = self.counts(&corpus, lexicon)?;
        let table = self.timed(
            "predictors",
            || pipeline::predictor_table(&counts, mcdip, &corpus.corpus, lexicon),
            |t| t.rows().len(),
        )?;
        if self.config.dump_cooccurrence {
            self.emit("cooccurrence.csv", outputs::cooccurrence_csv(&counts, lexicon));
        }
        Ok((
            LoadedPredictors {
                table,
                columns: prokwo_core::distributional::Predictor::ALL.to_vec(),
                path: None,
            },
            Some(corpus),
        ))
    }
}

fn run_ingest(run: &mut Run) -> Result<()> {
    let corpus = run.corpus()?;
    run.emit("corpus.jsonl", formats::corpus_jsonl(&corpus.corpus));
    run.emit("skipped.csv", formats::skipped_csv(&corpus.skipped));
    Ok(())
}

fn run_mcdip(run: &mut Run) -> Result<()> {
    let lexicon = run.lexicon()?;
    let admins = run.administrations(&lexicon)?;
    let table = run.mcdip(&lexicon, Some(&admins))?;
    run.emit("mcdip.csv", formats::mcdip_csv(&table, &lexicon));
    Ok(())
}

fn run_predictors(run: &mut Run) -> Result<()> {
    let lexicon = run.lexicon()?;
    let mcdip = run.mcdip(&lexicon, None)?;
    let (p, corpus) = run.predictors(&lexicon, &mcdip)?;
    run.emit("predictors.csv", formats::predictors_csv(&p.table, &lexicon));
    if let Some(c) = corpus {
        run.emit("skipped.csv", formats::skipped_csv(&c.skipped));
    }
    Ok(())
}

fn correlation_svgs(run: &mut Run, cells: &[prokwo_core::stats::CorrelationReport], shuffles: &[pipeline::ShuffleAge]) {
    if !run.config.svg {
        return;
    }
    for &age in &run.config.ages.0 {
        run.emit(format!("correlogram_{age}.svg"), outputs::correlogram_svg(cells, age));
    }
    run.emit("figure2.svg", outputs::figure2_svg(cells, shuffles));
    run.emit("figure6.svg", outputs::figure6_svg(cells));
}

fn run_correlate(run: &mut Run) -> Result<()> {
    let lexicon = run.lexicon()?;
    let mcdip = run.mcdip(&lexicon, None)?;
    let (p, _) = run.predictors(&lexicon, &mcdip)?;
    let ages = run.config.ages.0.clone();
    let cells = run.timed(
        "correlations",
        || Ok(pipeline::correlations(&p.table, &mcdip, &lexicon, &ages)),
        Vec::len,
    )?;
    run.emit("correlations.csv", outputs::correlations_csv(&cells));
    correlation_svgs(run, &cells, &[]);
    Ok(())
}

fn shuffle_stage(run: &mut Run, counts: &[AgeCounts], mcdip: &McdipTable) -> Result<Vec<pipeline::ShuffleAge>> {
    let (n, seed) = (run.config.shuffles, run.config.seed);
    run.timed("shuffle", || pipeline::shuffles(counts, mcdip, n, seed), |v| v.len() * n as usize)
}

fn run_shuffle(run: &mut Run) -> Result<()> {
    let lexicon = run.lexicon()?;
    let mcdip = run.mcdip(&lexicon, None)?;
    let corpus = run.corpus()?;
    let counts = run.counts(&corpus, &lexicon)?;
    let shuffles = shuffle_stage(run, &counts, &mcdip)?;
    run.emit("shuffle_report.csv", outputs::shuffle_csv(&shuffles));
    Ok(())
}

fn fit_stage(
    run: &mut Run,
    lexicon: &Lexicon,
    admins: &[Administration],
    mcdip: &McdipTable,
    predictors: &LoadedPredictors,
) -> Result<Vec<ModelFit>> {
    for m in &run.config.models {
        for p in m.predictors() {
            predictors.require(p)?;
        }
    }
    let records = production_records(admins, lexicon).map_err(|e| run.data_error_admins(e))?;
    let models = run.config.models.clone();
    let ages = run.config.ages.0.clone();
    let options = run.config.glmm();
    run.timed(
        "fit",
        || pipeline::fits(&records, &predictors.table, mcdip, &models, &ages, &options),
        Vec::len,
    )
}

fn emit_fits(run: &mut Run, fits: &[ModelFit], lexicon: &Lexicon) {
    run.emit("fits.csv", outputs::fits_csv(fits));
    run.emit("variance_components.csv", outputs::variance_csv(fits));
    run.emit("convergence.csv", outputs::convergence_csv(fits));
    run.emit("item_errors.csv", outputs::item_errors_csv(fits, lexicon));
    run.emit("item_error_correlations.csv", outputs::item_error_correlations_csv(fits));
    if run.config.svg {
        let model = if run.config.models.contains(&ModelSelector::Full) {
            ModelSelector::Full
        } else {
            run.config.models[0]
        };
        run.emit("figure7.svg", outputs::figure7_svg(fits, lexicon, model));
    }
}

fn run_fit(run: &mut Run) -> Result<Vec<ModelFit>> {
    let lexicon = run.lexicon()?;
    let admins = run.administrations(&lexicon)?;
    let mcdip = run.mcdip(&lexicon, Some(&admins))?;
    let (p, _) = run.predictors(&lexicon, &mcdip)?;
    let fits = fit_stage(run, &lexicon, &admins, &mcdip, &p)?;
    emit_fits(run, &fits, &lexicon);
    Ok(fits)
}

fn run_report(run: &mut Run) -> Result<Vec<ModelFit>> {
    let lexicon = run.lexicon()?;
    let admins = run.administrations(&lexicon)?;
    let mcdip = run.mcdip(&lexicon, Some(&admins))?;
    let corpus = run.corpus()?;
    let counts = run.counts(&corpus, &lexicon)?;
    let table = run.timed(
        "predictors",
        || pipeline::predictor_table(&counts, &mcdip, &corpus.corpus, &lexicon),
        |t| t.rows().len(),
    )?;
    let predictors = LoadedPredictors {
        table,
        columns: prokwo_core::distributional::Predictor::ALL.to_vec(),
        path: None,
    };
    let ages = run.config.ages.0.clone();
    let cells = run.timed(
        "correlations",
        || Ok(pipeline::correlations(&predictors.table, &mcdip, &lexicon, &ages)),
        Vec::len,
    )?;
    let shuffles = shuffle_stage(run, &counts, &mcdip)?;
    let fits = fit_stage(run, &lexicon, &admins, &mcdip, &predictors)?;

    run.emit("skipped.csv", formats::skipped_csv(&corpus.skipped));
    run.emit("mcdip.csv", formats::mcdip_csv(&mcdip, &lexicon));
    run.emit("predictors.csv", formats::predictors_csv(&predictors.table, &lexicon));
    if run.config.dump_cooccurrence {
        run.emit("cooccurrence.csv", outputs::cooccurrence_csv(&counts, &lexicon));
    }
    run.emit("correlations.csv", outputs::correlations_csv(&cells));
    run.emit("shuffle_report.csv", outputs::shuffle_csv(&shuffles));
    emit_fits(run, &fits, &lexicon);
    run.emit("table2.csv", outputs::table2_csv(&cells, &ages));
    run.emit("table3.csv", outputs::table3_csv(&fits));
    run.emit("table4.csv", outputs::table4_csv(&fits));
    correlation_svgs(run, &cells, &shuffles);
    Ok(fits)
}

fn run_check(config: &RunConfig) -> Result<Vec<CheckOutcome>> {
    let corr = read_correlations(&config.out.join("correlations.csv"))?;
    let fits = read_fits(&config.out.join("fits.csv"))?;
    Ok(run_checks(&corr, &fits))
}

fn write_outputs(run: &Run) -> Result<Vec<PathBuf>> {
    let dir = &run.config.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut inputs = Vec::with_capacity(run.inputs.len());
    for p in &run.inputs {
        inputs.push(digest_file(p)?);
    }
    let manifest = RunManifest {
        toolkit: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: run.config.clone(),
        inputs,
        outputs: run
            .outputs
            .iter()
            .map(|o| OutputEntry {
                file: o.name.clone(),
                rows: data_rows(&o.bytes),
                sha256: sha256_hex(&o.bytes),
            })
            .collect(),
        stages: run.stages.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    let mut written = Vec::new();
    for o in run.outputs.iter().chain(std::iter::once(&Output {
        name: MANIFEST.into(),
        bytes: json,
    })) {
        let path = dir.join(&o.name);
        std::fs::write(&path, &o.bytes).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Validate, compute and write. Non-convergence is reported after the
/// outputs (including partial fits) have been written.
pub fn execute(command: Command, config: &RunConfig) -> Result<Summary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    pool.install(|| {
        if command == Command::Check {
            let checks = run_check(config)?;
            return Ok(Summary {
                written: Vec::new(),
                checks,
            });
        }
        let mut run = Run::new(config);
        let fits = match command {
            Command::Ingest => run_ingest(&mut run).map(|()| Vec::new()),
            Command::Mcdip => run_mcdip(&mut run).map(|()| Vec::new()),
            Command::Predictors => run_predictors(&mut run).map(|()| Vec::new()),
            Command::Correlate => run_correlate(&mut run).map(|()| Vec::new()),
            Command::Shuffle => run_shuffle(&mut run).map(|()| Vec::new()),
            Command::Fit => run_fit(&mut run),
            Command::Report => run_report(&mut run),
            Command::Check => unreachable!(),
        }?;
        let written = write_outputs(&run)?;
        let failed = pipeline::unconverged(&fits);
        if !failed.is_empty() {
            return Err(CliError::NotConverged(format!(
                "did not converge: {} (partial results written)",
                failed.join(", ")
            )));
        }
        Ok(Summary {
            written,
            checks: Vec::new(),
        })
    })
}
