//! Run configuration, pipeline orchestration, and artifact plumbing behind
//! the command-line binary: train, generate, inspect, selftest.
//!
//! A run directory is fully described by its `manifest.toml`; re-running
//! `train` with that manifest (into any output directory) reproduces every
//! artifact byte for byte.

use crate::adversarial::{
    generate, train, Agent, EpochSummary, GameConfig, GenerationRecord, SampleOutcome,
};
use crate::circuits::{
    build_generator, discriminator_param_count, generator_cx_count, generator_param_count,
    generator_state, state_to_params,
};
use crate::dataio::{export_csv, export_pgm, load_idx, ImageSet};
use crate::encoding::{fit_scale, si_decode, si_encode, ScaleFactor, ScaleStatistic};
use crate::error::{Error, Result};
use crate::optimizer::{
    minimize, population_size, CmaesState, LogBase, ObjectiveSpec,
};
use crate::pca::PcaModel;
use crate::scalar::norm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Environment variable naming a directory that holds the standard MNIST
/// files, used when the config gives no explicit paths.
pub const DATA_DIR_ENV: &str = "QGAN_DATA_DIR";
pub const DEFAULT_IMAGES_FILE: &str = "train-images-idx3-ubyte";
pub const DEFAULT_LABELS_FILE: &str = "train-labels-idx1-ubyte";

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const PCA_FILE: &str = "pca_model.txt";
pub const PARAMS_FILE: &str = "params.json";
pub const LOG_FILE: &str = "training_log.jsonl";
pub const IMAGES_DIR: &str = "images";
pub const CSV_FILE: &str = "generated.csv";
pub const SKIPPED_FILE: &str = "skipped.txt";

/// Everything a training run needs; serializable so a run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Generator register width; the discriminator adds one ancilla.
    pub qubits: usize,
    /// Which digit class to train on.
    pub digit: u8,
    /// Training subset size drawn from that class.
    pub count: usize,
    pub epochs: usize,
    /// Optimizer generations per player per epoch.
    pub generations: usize,
    pub seed: u64,
    pub scale_statistic: ScaleStatistic,
    pub log_base: LogBase,
    pub warm_start: bool,
    pub joint_generator: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            qubits: 2,
            digit: 0,
            count: 20,
            epochs: 25,
            generations: 500,
            seed: 7,
            scale_statistic: ScaleStatistic::Mean,
            log_base: LogBase::Natural,
            warm_start: true,
            joint_generator: false,
            images: None,
            labels: None,
        }
    }
}

impl RunConfig {
    /// Number of principal components: one per free amplitude of the
    /// generator state.
    pub fn n_pca(&self) -> usize {
        (1 << self.qubits) - 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.qubits) {
            return Err(Error::Config(format!(
                "qubits must be between 2 and 8, got {}",
                self.qubits
            )));
        }
        if self.digit > 9 {
            return Err(Error::Config(format!("digit must be 0..9, got {}", self.digit)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        let needed = self.n_pca() + 1;
        if self.count < needed {
            return Err(Error::Config(format!(
                "{} qubits need {} principal components, which requires at least {} \
                 training images; got count = {}",
                self.qubits,
                self.n_pca(),
                needed,
                self.count
            )));
        }
        Ok(())
    }

    /// Resolve the MNIST file paths: explicit config paths win, then the
    /// data-directory environment variable.
    pub fn data_paths(&self) -> Result<(PathBuf, PathBuf)> {
        let env_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let images = self
            .images
            .clone()
            .or_else(|| env_dir.as_ref().map(|d| d.join(DEFAULT_IMAGES_FILE)));
        let labels = self
            .labels
            .clone()
            .or_else(|| env_dir.as_ref().map(|d| d.join(DEFAULT_LABELS_FILE)));
        match (images, labels) {
            (Some(i), Some(l)) => Ok((i, l)),
            _ => Err(Error::Config(format!(
                "no MNIST paths: set images/labels in the config or point {DATA_DIR_ENV} \
                 at a directory holding {DEFAULT_IMAGES_FILE} and {DEFAULT_LABELS_FILE}"
            ))),
        }
    }
}

/// Values computed from the config and data, recorded for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Derived {
    pub n_pca: usize,
    pub generator_parameters: usize,
    pub discriminator_parameters: usize,
    pub generator_population: usize,
    pub discriminator_population: usize,
    pub cumulative_explained_variance: f64,
    pub scale_factor: f64,
}

/// The replay record written to every run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config: RunConfig,
    pub derived: Derived,
}

/// Final trained angles, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedParams {
    pub qubits: usize,
    pub theta_d: Vec<f64>,
    pub theta_g: Vec<Vec<f64>>,
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogLine {
    Gen {
        epoch: usize,
        agent: Agent,
        generation: usize,
        best_cost: f64,
        mean_cost: f64,
        cost_variance: f64,
    },
    Epoch {
        epoch: usize,
        best_loss_d: f64,
        best_loss_g: f64,
        mean_sigma_generated: f64,
    },
}

impl From<&GenerationRecord<f64>> for LogLine {
    fn from(r: &GenerationRecord<f64>) -> Self {
        LogLine::Gen {
            epoch: r.epoch,
            agent: r.agent,
            generation: r.generation,
            best_cost: r.best_cost,
            mean_cost: r.mean_cost,
            cost_variance: r.cost_variance,
        }
    }
}

impl From<&EpochSummary<f64>> for LogLine {
    fn from(e: &EpochSummary<f64>) -> Self {
        LogLine::Epoch {
            epoch: e.epoch,
            best_loss_d: e.best_loss_d,
            best_loss_g: e.best_loss_g,
            mean_sigma_generated: e.mean_sigma_generated,
        }
    }
}

/// Read a config from a TOML file; accepts either a bare config or a full
/// run manifest (whose `[config]` table is used).
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let parsed = if table.contains_key("config") {
        table.try_into::<Manifest>().map(|m| m.config)
    } else {
        table.try_into::<RunConfig>()
    };
    parsed.map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn load_manifest(run_dir: &Path) -> Result<Manifest> {
    let path = run_dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(Error::Format(format!("{} is missing", path.display())));
    }
    let text = std::fs::read_to_string(&path)?;
    toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn image_name(index: usize, total: usize) -> String {
    let width = total.saturating_sub(1).to_string().len().max(2);
    format!("generated_{index:0width$}.pgm")
}

/// Write PGMs and the CSV matrix for generated samples; returns how many
/// images were written and the skip descriptions.
fn export_samples(
    outcomes: &[SampleOutcome<f64>],
    dir: &Path,
) -> Result<(usize, Vec<String>)> {
    std::fs::create_dir_all(dir.join(IMAGES_DIR))?;
    let mut csv_rows = Vec::new();
    let mut skipped = Vec::new();
    for (k, outcome) in outcomes.iter().enumerate() {
        match outcome {
            SampleOutcome::Image(unit_pixels) => {
                let pixels: Vec<f64> = unit_pixels.iter().map(|v| v * 255.0).collect();
                let name = image_name(k, outcomes.len());
                export_pgm(&pixels, &dir.join(IMAGES_DIR).join(name))?;
                csv_rows.push(pixels);
            }
            SampleOutcome::Skipped(reason) => {
                skipped.push(format!("sample {k}: {reason}"));
            }
        }
    }
    export_csv(&csv_rows, &dir.join(CSV_FILE))?;
    if !skipped.is_empty() {
        std::fs::write(dir.join(SKIPPED_FILE), skipped.join("\n") + "\n")?;
    }
    Ok((csv_rows.len(), skipped))
}

/// Run the full pipeline: load data, project, encode, train, and write all
/// artifacts into `out_dir`.
pub fn cmd_train(config: &RunConfig, out_dir: &Path) -> Result<()> {
    config.validate()?;
    let (images_path, labels_path) = config.data_paths()?;
    if !images_path.is_file() {
        return Err(Error::Config(format!(
            "image file {} does not exist",
            images_path.display()
        )));
    }
    if !labels_path.is_file() {
        return Err(Error::Config(format!(
            "label file {} does not exist",
            labels_path.display()
        )));
    }

    let set: ImageSet = load_idx(&images_path, &labels_path)?;
    let subset = set.select_subset(config.digit, config.count, config.seed)?;
    let unit = subset.unit_pixels();
    let pca = PcaModel::fit(&unit, config.n_pca())?;
    let coeffs: Vec<Vec<f64>> = (0..subset.len())
        .map(|i| pca.transform(unit.row(i)))
        .collect::<Result<_>>()?;
    let scale = fit_scale(&coeffs, config.scale_statistic)?;
    let encoded: Vec<Vec<f64>> = coeffs
        .iter()
        .map(|c| si_encode(&scale.apply(c)))
        .collect::<Result<_>>()?;

    let game = GameConfig::<f64> {
        qubits: config.qubits,
        epochs: config.epochs,
        generations_per_epoch: config.generations,
        seed: config.seed,
        log_base: config.log_base,
        joint_generator: config.joint_generator,
        warm_start: config.warm_start,
        ..GameConfig::default()
    };
    let state = train(&game, &encoded)?;

    std::fs::create_dir_all(out_dir)?;
    pca.save(&out_dir.join(PCA_FILE))?;

    let dim_g = generator_param_count(config.qubits);
    let dim_d = discriminator_param_count(config.qubits);
    let generator_population = if config.joint_generator {
        population_size(config.count * dim_g, config.log_base)
    } else {
        population_size(dim_g, config.log_base)
    };
    let manifest = Manifest {
        config: config.clone(),
        derived: Derived {
            n_pca: config.n_pca(),
            generator_parameters: dim_g,
            discriminator_parameters: dim_d,
            generator_population,
            discriminator_population: population_size(dim_d, config.log_base),
            cumulative_explained_variance: pca.cumulative_explained_variance(),
            scale_factor: scale.value(),
        },
    };
    let manifest_text = toml::to_string_pretty(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest_text)?;

    let params = SavedParams {
        qubits: config.qubits,
        theta_d: state.theta_d.clone(),
        theta_g: state.theta_g.clone(),
    };
    let params_text = serde_json::to_string_pretty(&params)
        .map_err(|e| Error::Format(format!("parameter serialization: {e}")))?;
    std::fs::write(out_dir.join(PARAMS_FILE), params_text + "\n")?;

    let mut log = String::new();
    for epoch in 1..=config.epochs {
        for rec in state.records.iter().filter(|r| r.epoch == epoch) {
            let line = serde_json::to_string(&LogLine::from(rec))
                .map_err(|e| Error::Format(format!("log serialization: {e}")))?;
            log.push_str(&line);
            log.push('\n');
        }
        if let Some(summary) = state.epochs.iter().find(|s| s.epoch == epoch) {
            let line = serde_json::to_string(&LogLine::from(summary))
                .map_err(|e| Error::Format(format!("log serialization: {e}")))?;
            log.push_str(&line);
            log.push('\n');
        }
    }
    std::fs::write(out_dir.join(LOG_FILE), log)?;

    let outcomes = generate(config.qubits, &state.theta_g, &pca, &scale)?;
    let (written, skipped) = export_samples(&outcomes, out_dir)?;

    let last = state.epochs.last().expect("training ran at least one epoch");
    println!(
        "trained {} epochs: best discriminator loss {:.6}, best generator loss {:.6}",
        config.epochs, last.best_loss_d, last.best_loss_g
    );
    println!(
        "wrote {written} images ({} skipped) to {}",
        skipped.len(),
        out_dir.display()
    );
    for line in &skipped {
        eprintln!("skipped {line}");
    }
    Ok(())
}

/// Regenerate images from a finished run's saved parameters.
pub fn cmd_generate(run_dir: &Path, out_dir: Option<&Path>) -> Result<usize> {
    let manifest = load_manifest(run_dir)?;
    let params_text = std::fs::read_to_string(run_dir.join(PARAMS_FILE))?;
    let params: SavedParams = serde_json::from_str(&params_text)
        .map_err(|e| Error::Format(format!("{}: {e}", run_dir.join(PARAMS_FILE).display())))?;
    if params.qubits != manifest.config.qubits {
        return Err(Error::Inconsistent(format!(
            "manifest says {} qubits, parameters say {}",
            manifest.config.qubits, params.qubits
        )));
    }
    let pca = PcaModel::load(&run_dir.join(PCA_FILE))?;
    let scale = ScaleFactor::new(manifest.derived.scale_factor)?;
    let outcomes = generate(params.qubits, &params.theta_g, &pca, &scale)?;
    let default_dir = run_dir.join("regenerated");
    let dest = out_dir.unwrap_or(&default_dir);
    let (written, skipped) = export_samples(&outcomes, dest)?;
    println!("wrote {written} images ({} skipped) to {}", skipped.len(), dest.display());
    Ok(written)
}

/// Summarize a run directory: per-epoch losses and variances as CSV, plus
/// the first epoch where the generated samples score positive on average.
pub fn cmd_inspect(run_dir: &Path) -> Result<String> {
    let manifest = load_manifest(run_dir)?;
    let log_path = run_dir.join(LOG_FILE);
    let text = std::fs::read_to_string(&log_path)?;

    let mut last_variance: HashMap<(usize, Agent), f64> = HashMap::new();
    let mut epochs: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line: LogLine = serde_json::from_str(raw).map_err(|e| {
            Error::Format(format!("{} line {}: {e}", log_path.display(), i + 1))
        })?;
        match line {
            LogLine::Gen { epoch, agent, cost_variance, .. } => {
                last_variance.insert((epoch, agent), cost_variance);
            }
            LogLine::Epoch { epoch, best_loss_d, best_loss_g, mean_sigma_generated } => {
                epochs.push((epoch, best_loss_d, best_loss_g, mean_sigma_generated));
            }
        }
    }
    if epochs.len() != manifest.config.epochs {
        return Err(Error::Inconsistent(format!(
            "manifest says {} epochs, log has {}",
            manifest.config.epochs,
            epochs.len()
        )));
    }

    let mut report =
        String::from("epoch,best_loss_d,best_loss_g,variance_d,variance_g,mean_sigma_generated\n");
    for &(epoch, loss_d, loss_g, sigma) in &epochs {
        let var_d = last_variance.get(&(epoch, Agent::Discriminator)).ok_or_else(|| {
            Error::Inconsistent(format!("no discriminator generations for epoch {epoch}"))
        })?;
        let var_g = last_variance.get(&(epoch, Agent::Generator)).ok_or_else(|| {
            Error::Inconsistent(format!("no generator generations for epoch {epoch}"))
        })?;
        report.push_str(&format!("{epoch},{loss_d},{loss_g},{var_d},{var_g},{sigma}\n"));
    }
    match epochs.iter().find(|&&(_, _, _, sigma)| sigma > 0.0) {
        Some(&(epoch, ..)) => report.push_str(&format!(
            "first epoch with positive mean generated sigma: {epoch}\n"
        )),
        None => report.push_str("mean generated sigma never positive\n"),
    }
    Ok(report)
}

/// One row of reference gate counts: (n, generator (rotations, entanglers),
/// discriminator (rotations, entanglers)).
pub type TemplateCounts = (usize, (usize, usize), (usize, usize));

/// The gate counts the ansatz construction must reproduce, for qubit
/// counts 2 through 4.
pub fn expected_template_counts() -> Vec<TemplateCounts> {
    vec![
        (2, (3, 1), (9, 4)),
        (3, (7, 4), (18, 11)),
        (4, (15, 11), (35, 26)),
    ]
}

/// Check built circuit templates against expected gate counts.
pub fn check_template_counts(expected: &[TemplateCounts]) -> Result<()> {
    for &(n, (g_ry, g_cx), (d_ry, d_cx)) in expected {
        let gen = build_generator(n);
        let disc = crate::circuits::build_discriminator(n);
        let got = (
            (gen.count_rotations(), gen.count_controlled_nots()),
            (disc.count_rotations(), disc.count_controlled_nots()),
        );
        if got != ((g_ry, g_cx), (d_ry, d_cx)) {
            return Err(Error::Inconsistent(format!(
                "n={n}: expected generator ({g_ry},{g_cx}) and discriminator \
                 ({d_ry},{d_cx}), built {:?}",
                got
            )));
        }
        if generator_param_count(n) != g_ry || generator_cx_count(n) != g_cx {
            return Err(Error::Inconsistent(format!(
                "n={n}: count formulas disagree with expected generator counts"
            )));
        }
    }
    Ok(())
}

/// Closed-form product of half-angle cosines/sines for the two-qubit
/// generator state.
fn two_qubit_amplitudes(theta: &[f64; 3]) -> [f64; 4] {
    let c = |t: f64| (t / 2.0).cos();
    let s = |t: f64| (t / 2.0).sin();
    let tp1 = theta[1] + theta[2];
    let tp2 = theta[1] - theta[2];
    [
        c(theta[0]) * c(tp1),
        c(theta[0]) * s(tp1),
        s(theta[0]) * s(tp2),
        s(theta[0]) * c(tp2),
    ]
}

/// Closed-form amplitudes for the three-qubit generator state.
fn three_qubit_amplitudes(theta: &[f64; 7]) -> [f64; 8] {
    let c = |t: f64| (t / 2.0).cos();
    let s = |t: f64| (t / 2.0).sin();
    let tp1 = theta[1] + theta[2];
    let tp2 = theta[1] - theta[2];
    let tpp1 = theta[3] + theta[4] + theta[5] + theta[6];
    let tpp2 = theta[3] - theta[4] + theta[5] - theta[6];
    let tpp3 = theta[3] + theta[4] - theta[5] - theta[6];
    let tpp4 = theta[3] - theta[4] - theta[5] + theta[6];
    [
        c(theta[0]) * c(tp1) * c(tpp1),
        c(theta[0]) * c(tp1) * s(tpp1),
        c(theta[0]) * s(tp1) * c(tpp4),
        c(theta[0]) * s(tp1) * s(tpp4),
        s(theta[0]) * s(tp2) * s(tpp2),
        s(theta[0]) * s(tp2) * c(tpp2),
        s(theta[0]) * c(tp2) * s(tpp3),
        s(theta[0]) * c(tp2) * c(tpp3),
    ]
}

/// Compare simulated generator states against the closed-form amplitude
/// products for two and three qubits, over seeded random angles.
pub fn check_closed_form_amplitudes(draws: usize, tol: f64, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle =
        |rng: &mut ChaCha8Rng| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    for _ in 0..draws {
        let t2 = [angle(&mut rng), angle(&mut rng), angle(&mut rng)];
        let expected = two_qubit_amplitudes(&t2);
        let state = generator_state::<f64>(2, &t2)?;
        for (i, (&got, &want)) in state.amplitudes().iter().zip(expected.iter()).enumerate() {
            if (got - want).abs() > tol {
                return Err(Error::Inconsistent(format!(
                    "two-qubit amplitude {i}: simulated {got}, closed form {want}"
                )));
            }
        }
        let t3: [f64; 7] = std::array::from_fn(|_| angle(&mut rng));
        let expected = three_qubit_amplitudes(&t3);
        let state = generator_state::<f64>(3, &t3)?;
        for (i, (&got, &want)) in state.amplitudes().iter().zip(expected.iter()).enumerate() {
            if (got - want).abs() > tol {
                return Err(Error::Inconsistent(format!(
                    "three-qubit amplitude {i}: simulated {got}, closed form {want}"
                )));
            }
        }
    }
    Ok(())
}

/// Random unit states must survive parameter recovery and re-preparation
/// up to a global sign.
pub fn check_state_round_trip(max_qubits: usize, draws: usize, tol: f64, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 2..=max_qubits {
        let dim = 1usize << n;
        for _ in 0..draws {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = norm(&v);
            if len < 1e-3 {
                continue;
            }
            for x in &mut v {
                *x /= len;
            }
            let recovered = state_to_params(&v)?;
            let state = generator_state::<f64>(n, &recovered.angles)?;
            let sign = if recovered.negated { -1.0 } else { 1.0 };
            for (i, (&got, &want)) in state.amplitudes().iter().zip(v.iter()).enumerate() {
                if (sign * got - want).abs() > tol {
                    return Err(Error::Inconsistent(format!(
                        "{n}-qubit state round trip: amplitude {i} came back as \
                         {got} for target {want}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Random plane vectors must survive the sphere encoding and decoding.
pub fn check_encoding_round_trip(dims: &[usize], draws: usize, tol: f64, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &dim in dims {
        for _ in 0..draws {
            let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let v = si_encode(&u)?;
            let back = si_decode(&v)?;
            let scale = norm(&u).max(1.0);
            for (i, (&got, &want)) in back.iter().zip(u.iter()).enumerate() {
                if (got - want).abs() > tol * scale {
                    return Err(Error::Inconsistent(format!(
                        "encode/decode round trip in dimension {dim}: component {i} \
                         came back as {got} for {want}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The population rule must match 4 + floor(2 ln M) for every dimension.
pub fn check_population_rule(max_dim: usize) -> Result<()> {
    for dim in 1..=max_dim {
        let expected = 4 + (2.0 * (dim as f64).ln()).floor() as usize;
        let got = population_size(dim, LogBase::Natural);
        if got != expected {
            return Err(Error::Inconsistent(format!(
                "population for dimension {dim}: rule gives {expected}, function gives {got}"
            )));
        }
    }
    Ok(())
}

/// The optimizer must drive a shifted sphere function below `target`
/// within the evaluation budget.
pub fn check_sphere_benchmark(dim: usize, budget: usize, target: f64, seed: u64) -> Result<()> {
    let shift: Vec<f64> = (0..dim).map(|i| 0.1 * (i as f64 + 1.0)).collect();
    let mut objective = ObjectiveSpec::unbounded(|x: &[f64]| {
        x.iter().zip(&shift).map(|(a, b)| (a - b) * (a - b)).sum()
    });
    let mut state = CmaesState::new(vec![0.0; dim], 0.5, seed)?;
    let outcome = minimize(&mut state, &mut objective, budget, None)?;
    if outcome.best_cost > target {
        return Err(Error::Inconsistent(format!(
            "sphere benchmark reached {} after {} evaluations, target {target}",
            outcome.best_cost, outcome.evaluations
        )));
    }
    Ok(())
}

/// Run the fast invariant suite and return a pass/fail report; any failure
/// makes the whole command fail.
pub fn cmd_selftest() -> Result<String> {
    let checks: Vec<(&str, Result<()>)> = vec![
        ("circuit template gate counts", check_template_counts(&expected_template_counts())),
        ("closed-form amplitude products", check_closed_form_amplitudes(200, 1e-12, 11)),
        ("state preparation round trip", check_state_round_trip(4, 200, 1e-10, 12)),
        (
            "stereographic encode/decode round trip",
            check_encoding_round_trip(&[3, 7, 15], 2000, 1e-10, 13),
        ),
        ("optimizer population rule", check_population_rule(1000)),
        ("optimizer sphere benchmark", check_sphere_benchmark(10, 10_000, 1e-8, 14)),
    ];
    let mut report = String::new();
    let mut failures = 0;
    for (name, result) in checks {
        match result {
            Ok(()) => report.push_str(&format!("PASS {name}\n")),
            Err(e) => {
                failures += 1;
                report.push_str(&format!("FAIL {name}: {e}\n"));
            }
        }
    }
    if failures > 0 {
        report.push_str(&format!("{failures} check(s) failed\n"));
        return Err(Error::Inconsistent(report));
    }
    report.push_str("all checks passed\n");
    Ok(report)
}
