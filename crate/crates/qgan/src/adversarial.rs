//! The adversarial game: a discriminator scoring states through an ancilla
//! readout, the two quadratic losses built on that score, and the
//! alternating training loop that pits the generator against it.
//!
//! The discriminator acts on `n + 1` qubits. Its input is either a real
//! data state (a unit vector already on the sphere) or the generator's
//! output; either way the `n`-qubit state is joined with the ancilla in
//! `|0>` and the discriminator circuit runs on the pair. The score
//!
//! ```text
//! sigma = <Z on the ancilla>  in [-1, 1]
//! ```
//!
//! is pushed toward +1 on real samples and -1 on generated ones by the
//! discriminator loss, while the generator loss rewards generated samples
//! that score like real ones:
//!
//! ```text
//! L_D = (1/2N) sum_l [ (1 - sigma_real_l)^2 + (1 + sigma_gen_l)^2 ]
//! L_G = (1/N)  sum_l (1 - sigma_gen_l)^2
//! ```
//!
//! Training alternates per epoch: minimize `L_D` over the discriminator
//! angles with the generators frozen, then minimize `L_G` over each
//! generator's angles with the discriminator frozen at its new optimum.
//! Both sides use the evolution strategy from [`crate::optimizer`].
//! `L_G` is a sum of independent per-sample terms, so by default every
//! sample gets its own low-dimensional search (run in lockstep so the
//! trace stays comparable); a literal joint search over all generator
//! angles at once is available as a config switch.

use crate::circuits::{
    build_discriminator, build_generator, discriminator_param_count, generator_param_count,
};
use crate::encoding::{si_decode, ScaleFactor};
use crate::error::{Error, Result};
use crate::optimizer::{
    angle_bounds, cost_statistics, default_angle_step, minimize, CmaesOptions, CmaesState,
    LogBase, ObjectiveSpec, Stagnation,
};
use crate::pca::PcaModel;
use crate::scalar::{norm, Real};
use crate::simulator::{CircuitTemplate, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const STREAM_INIT: u64 = 1;
const STREAM_DISC: u64 = 2;
const STREAM_GEN: u64 = 3;
const STREAM_FRESH: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a stream tag and an index into an independent
/// child seed, so every optimizer and draw in a run gets its own
/// reproducible randomness.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

/// What the discriminator is scoring.
#[derive(Debug, Clone, Copy)]
pub enum DiscriminatorInput<'a, T: Real = f64> {
    /// A unit amplitude vector of length `2^n`, fed in directly.
    State(&'a [T]),
    /// Generator angles (length `2^n - 1`); the generator runs first.
    GeneratorParams(&'a [T]),
}

/// Join an n-qubit amplitude vector with an ancilla in `|0>`: the ancilla
/// is the last qubit, so the input amplitudes land on even indices.
fn embed_with_ancilla<T: Real>(amps: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); amps.len() * 2];
    for (i, &a) in amps.iter().enumerate() {
        out[2 * i] = a;
    }
    out
}

/// Run a prebuilt discriminator over an already-embedded state and read
/// the ancilla.
fn score_embedded<T: Real>(disc: &CircuitTemplate, embedded: &[T], theta_d: &[T]) -> T {
    let n = disc.num_qubits() - 1;
    let mut state =
        StateVector::from_amplitudes(embedded.to_vec()).expect("embedded state is unit norm");
    disc.apply(&mut state, theta_d).expect("dimensions checked by caller");
    state.expect_z(n).expect("ancilla index in range")
}

/// The discriminator's verdict on one input: the ancilla Z expectation,
/// in `[-1, 1]`.
pub fn sigma<T: Real>(n: usize, input: DiscriminatorInput<'_, T>, theta_d: &[T]) -> Result<T> {
    if n == 0 {
        return Err(Error::invalid("need at least one input qubit"));
    }
    if theta_d.len() != discriminator_param_count(n) {
        return Err(Error::DimensionMismatch(format!(
            "discriminator on {n} qubits takes {} angles, got {}",
            discriminator_param_count(n),
            theta_d.len()
        )));
    }
    let amps: Vec<T> = match input {
        DiscriminatorInput::State(v) => {
            if v.len() != 1 << n {
                return Err(Error::DimensionMismatch(format!(
                    "input state has {} amplitudes, expected {}",
                    v.len(),
                    1 << n
                )));
            }
            let len = norm(v);
            if (len - T::one()).abs() > T::unit_norm_tolerance() {
                return Err(Error::NotNormalized { norm: len.to_f64().unwrap_or(f64::NAN) });
            }
            v.to_vec()
        }
        DiscriminatorInput::GeneratorParams(theta_g) => {
            build_generator(n).run(theta_g)?.into_amplitudes()
        }
    };
    let disc = build_discriminator(n);
    Ok(score_embedded(&disc, &embed_with_ancilla(&amps), theta_d))
}

/// `L_D` from precomputed scores.
pub fn discriminator_loss_from_sigmas<T: Real>(real: &[T], generated: &[T]) -> T {
    debug_assert_eq!(real.len(), generated.len());
    let one = T::one();
    let sum: T = real
        .iter()
        .zip(generated)
        .map(|(&sr, &sg)| (one - sr) * (one - sr) + (one + sg) * (one + sg))
        .sum();
    sum / (T::of(2.0) * T::of(real.len() as f64))
}

/// `L_G` from precomputed scores.
pub fn generator_loss_from_sigmas<T: Real>(generated: &[T]) -> T {
    let one = T::one();
    let sum: T = generated.iter().map(|&s| (one - s) * (one - s)).sum();
    sum / T::of(generated.len() as f64)
}

/// `L_D` evaluated from scratch on a data set and a generator set.
pub fn loss_discriminator<T: Real>(
    n: usize,
    theta_d: &[T],
    theta_g_set: &[Vec<T>],
    data_states: &[Vec<T>],
) -> Result<T> {
    if theta_g_set.len() != data_states.len() || data_states.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "need matching non-empty sets, got {} generator and {} data entries",
            theta_g_set.len(),
            data_states.len()
        )));
    }
    let real: Vec<T> = data_states
        .iter()
        .map(|v| sigma(n, DiscriminatorInput::State(v), theta_d))
        .collect::<Result<_>>()?;
    let generated: Vec<T> = theta_g_set
        .iter()
        .map(|th| sigma(n, DiscriminatorInput::GeneratorParams(th), theta_d))
        .collect::<Result<_>>()?;
    Ok(discriminator_loss_from_sigmas(&real, &generated))
}

/// `L_G` evaluated from scratch on a generator set.
pub fn loss_generator<T: Real>(n: usize, theta_g_set: &[Vec<T>], theta_d: &[T]) -> Result<T> {
    if theta_g_set.is_empty() {
        return Err(Error::invalid("generator set is empty"));
    }
    let generated: Vec<T> = theta_g_set
        .iter()
        .map(|th| sigma(n, DiscriminatorInput::GeneratorParams(th), theta_d))
        .collect::<Result<_>>()?;
    Ok(generator_loss_from_sigmas(&generated))
}

/// Which player a trace row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Discriminator,
    Generator,
}

/// One optimizer generation of one player within one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord<T: Real = f64> {
    pub epoch: usize,
    pub agent: Agent,
    pub generation: usize,
    pub best_cost: T,
    pub mean_cost: T,
    pub cost_variance: T,
}

/// End-of-epoch snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary<T: Real = f64> {
    pub epoch: usize,
    pub best_loss_d: T,
    pub best_loss_g: T,
    /// Mean discriminator score over the generated set at epoch end; the
    /// generator starts passing for real data once this turns positive.
    pub mean_sigma_generated: T,
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct GameConfig<T: Real = f64> {
    pub qubits: usize,
    pub epochs: usize,
    /// Optimizer generations per player per epoch.
    pub generations_per_epoch: usize,
    pub seed: u64,
    pub log_base: LogBase,
    /// Optimize all generator angle sets as one joint search instead of
    /// one independent search per sample.
    pub joint_generator: bool,
    /// Start each epoch's search at the previous epoch's best parameters
    /// instead of a fresh random draw.
    pub warm_start: bool,
    pub initial_step: T,
    pub stagnation: Option<Stagnation<T>>,
}

impl<T: Real> Default for GameConfig<T> {
    fn default() -> Self {
        GameConfig {
            qubits: 2,
            epochs: 25,
            generations_per_epoch: 500,
            seed: 0,
            log_base: LogBase::Natural,
            joint_generator: false,
            warm_start: true,
            initial_step: default_angle_step(),
            stagnation: None,
        }
    }
}

impl<T: Real> GameConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 {
            return Err(Error::Config("qubit count must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epoch count must be at least 1".into()));
        }
        if self.generations_per_epoch == 0 {
            return Err(Error::Config("generations per epoch must be at least 1".into()));
        }
        if !(self.initial_step.is_finite() && self.initial_step > T::zero()) {
            return Err(Error::Config(format!(
                "initial step must be positive, got {}",
                self.initial_step
            )));
        }
        Ok(())
    }
}

/// Everything the game accumulates over a run.
#[derive(Debug, Clone)]
pub struct GameState<T: Real = f64> {
    pub theta_d: Vec<T>,
    pub theta_g: Vec<Vec<T>>,
    /// The encoded training states, one unit vector of length `2^n` each.
    pub data_states: Vec<Vec<T>>,
    pub records: Vec<GenerationRecord<T>>,
    pub epochs: Vec<EpochSummary<T>>,
}

fn draw_angles<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<T> {
    (0..dim)
        .map(|_| T::of(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect()
}

/// Run the adversarial game on pre-encoded data states.
pub fn train<T: Real>(config: &GameConfig<T>, data_states: &[Vec<T>]) -> Result<GameState<T>> {
    config.validate()?;
    let n = config.qubits;
    let dim_state = 1usize << n;
    if data_states.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    for (k, v) in data_states.iter().enumerate() {
        if v.len() != dim_state {
            return Err(Error::DimensionMismatch(format!(
                "data state {k} has {} amplitudes, expected {dim_state}",
                v.len()
            )));
        }
        let len = norm(v);
        if (len - T::one()).abs() > T::unit_norm_tolerance() {
            return Err(Error::NotNormalized { norm: len.to_f64().unwrap_or(f64::NAN) });
        }
    }
    let n_samples = data_states.len();
    let dim_g = generator_param_count(n);
    let dim_d = discriminator_param_count(n);
    let count = T::of(n_samples as f64);

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT, 0));
    let mut theta_d: Vec<T> = draw_angles(&mut init_rng, dim_d);
    let mut theta_g: Vec<Vec<T>> =
        (0..n_samples).map(|_| draw_angles(&mut init_rng, dim_g)).collect();

    let disc = build_discriminator(n);
    let gen = build_generator(n);
    let real_embedded: Vec<Vec<T>> =
        data_states.iter().map(|v| embed_with_ancilla(v)).collect();
    let opts = CmaesOptions { log_base: config.log_base, population_size: None };

    let mut records: Vec<GenerationRecord<T>> = Vec::new();
    let mut summaries: Vec<EpochSummary<T>> = Vec::new();

    for epoch in 1..=config.epochs {
        // Discriminator phase: generators are frozen, so their states are
        // fixed for the whole phase and get prepared once.
        let gen_embedded: Vec<Vec<T>> = theta_g
            .iter()
            .map(|th| Ok(embed_with_ancilla(gen.run(th)?.amplitudes())))
            .collect::<Result<_>>()?;

        let d_mean = if config.warm_start || epoch == 1 {
            theta_d.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.seed,
                STREAM_FRESH,
                2 * epoch as u64,
            ));
            draw_angles(&mut rng, dim_d)
        };
        let mut d_state = CmaesState::with_options(
            d_mean,
            config.initial_step,
            derive_seed(config.seed, STREAM_DISC, epoch as u64),
            &opts,
        )?;
        let mut d_objective = ObjectiveSpec::new(
            |theta: &[T]| {
                let real: Vec<T> =
                    real_embedded.iter().map(|e| score_embedded(&disc, e, theta)).collect();
                let generated: Vec<T> =
                    gen_embedded.iter().map(|e| score_embedded(&disc, e, theta)).collect();
                discriminator_loss_from_sigmas(&real, &generated)
            },
            Some(angle_bounds(dim_d)),
        );
        let budget = config.generations_per_epoch * d_state.population_size();
        let outcome = minimize(&mut d_state, &mut d_objective, budget, config.stagnation)?;
        for row in &outcome.trace {
            records.push(GenerationRecord {
                epoch,
                agent: Agent::Discriminator,
                generation: row.generation,
                best_cost: row.best_cost,
                mean_cost: row.mean_cost,
                cost_variance: row.cost_variance,
            });
        }
        let best_loss_d = outcome.best_cost;
        theta_d = outcome.best_params;

        // Generator phase against the frozen, freshly trained critic.
        let best_loss_g = if config.joint_generator {
            train_generators_jointly(
                config, epoch, &gen, &disc, &theta_d, &mut theta_g, &opts, &mut records,
            )?
        } else {
            train_generators_per_sample(
                config, epoch, &gen, &disc, &theta_d, &mut theta_g, &opts, &mut records,
            )?
        };

        let mean_sigma_generated = theta_g
            .iter()
            .map(|th| {
                let run = gen.run(th).expect("angles have generator arity");
                score_embedded(&disc, &embed_with_ancilla(run.amplitudes()), &theta_d)
            })
            .sum::<T>()
            / count;
        summaries.push(EpochSummary { epoch, best_loss_d, best_loss_g, mean_sigma_generated });
    }

    Ok(GameState {
        theta_d,
        theta_g,
        data_states: data_states.to_vec(),
        records,
        epochs: summaries,
    })
}

#[allow(clippy::too_many_arguments)]
fn train_generators_per_sample<T: Real>(
    config: &GameConfig<T>,
    epoch: usize,
    gen: &CircuitTemplate,
    disc: &CircuitTemplate,
    theta_d: &[T],
    theta_g: &mut [Vec<T>],
    opts: &CmaesOptions,
    records: &mut Vec<GenerationRecord<T>>,
) -> Result<T> {
    let n_samples = theta_g.len();
    let dim_g = theta_g[0].len();
    let count = T::of(n_samples as f64);
    let epoch_seed = derive_seed(config.seed, STREAM_GEN, epoch as u64);

    let mut fresh_rng = if config.warm_start || epoch == 1 {
        None
    } else {
        Some(ChaCha8Rng::seed_from_u64(derive_seed(
            config.seed,
            STREAM_FRESH,
            2 * epoch as u64 + 1,
        )))
    };
    let mut searches: Vec<CmaesState<T>> = theta_g
        .iter()
        .enumerate()
        .map(|(k, th)| {
            let mean = match &mut fresh_rng {
                Some(rng) => draw_angles(rng, dim_g),
                None => th.clone(),
            };
            let mut st = CmaesState::with_options(
                mean,
                config.initial_step,
                derive_seed(epoch_seed, 1, k as u64),
                opts,
            )?;
            st.set_bounds(Some(angle_bounds(dim_g)))?;
            Ok(st)
        })
        .collect::<Result<_>>()?;

    let population = searches[0].population_size();
    let one = T::one();
    let mut best_history: Vec<T> = Vec::new();
    for generation in 1..=config.generations_per_epoch {
        // joint-loss cost of the population's j-th member, averaged over
        // the independent per-sample searches
        let mut member_costs = vec![T::zero(); population];
        let mut best_sum = T::zero();
        for search in searches.iter_mut() {
            let pop = search.ask();
            let costs: Vec<T> = pop
                .iter()
                .map(|th| {
                    let run = gen.run(th).expect("candidates have generator arity");
                    let s = score_embedded(disc, &embed_with_ancilla(run.amplitudes()), theta_d);
                    (one - s) * (one - s)
                })
                .collect();
            search.tell(&pop, &costs)?;
            for (acc, &c) in member_costs.iter_mut().zip(&costs) {
                *acc = *acc + c / count;
            }
            best_sum = best_sum + search.best().map(|(_, c)| c).unwrap_or(T::infinity());
        }
        let aggregate_best = best_sum / count;
        let (mean_cost, cost_variance) = cost_statistics(&member_costs);
        records.push(GenerationRecord {
            epoch,
            agent: Agent::Generator,
            generation,
            best_cost: aggregate_best,
            mean_cost,
            cost_variance,
        });
        best_history.push(aggregate_best);
        if let Some(s) = config.stagnation {
            if best_history.len() > s.window {
                let before = best_history[best_history.len() - 1 - s.window];
                if before - aggregate_best < s.tolerance {
                    break;
                }
            }
        }
    }

    let mut best_sum = T::zero();
    for (th, search) in theta_g.iter_mut().zip(&searches) {
        let (params, cost) = search.best().expect("at least one generation ran");
        *th = params.to_vec();
        best_sum = best_sum + cost;
    }
    Ok(best_sum / count)
}

#[allow(clippy::too_many_arguments)]
fn train_generators_jointly<T: Real>(
    config: &GameConfig<T>,
    epoch: usize,
    gen: &CircuitTemplate,
    disc: &CircuitTemplate,
    theta_d: &[T],
    theta_g: &mut [Vec<T>],
    opts: &CmaesOptions,
    records: &mut Vec<GenerationRecord<T>>,
) -> Result<T> {
    let n_samples = theta_g.len();
    let dim_g = theta_g[0].len();
    let count = T::of(n_samples as f64);
    let one = T::one();

    let mean = if config.warm_start || epoch == 1 {
        theta_g.iter().flatten().copied().collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            config.seed,
            STREAM_FRESH,
            2 * epoch as u64 + 1,
        ));
        draw_angles(&mut rng, n_samples * dim_g)
    };
    let mut state = CmaesState::with_options(
        mean,
        config.initial_step,
        derive_seed(config.seed, STREAM_GEN, epoch as u64),
        opts,
    )?;
    let mut objective = ObjectiveSpec::new(
        |joint: &[T]| {
            joint
                .chunks(dim_g)
                .map(|th| {
                    let run = gen.run(th).expect("chunks have generator arity");
                    let s = score_embedded(disc, &embed_with_ancilla(run.amplitudes()), theta_d);
                    (one - s) * (one - s)
                })
                .sum::<T>()
                / count
        },
        Some(angle_bounds(n_samples * dim_g)),
    );
    let budget = config.generations_per_epoch * state.population_size();
    let outcome = minimize(&mut state, &mut objective, budget, config.stagnation)?;
    for row in &outcome.trace {
        records.push(GenerationRecord {
            epoch,
            agent: Agent::Generator,
            generation: row.generation,
            best_cost: row.best_cost,
            mean_cost: row.mean_cost,
            cost_variance: row.cost_variance,
        });
    }
    for (th, chunk) in theta_g.iter_mut().zip(outcome.best_params.chunks(dim_g)) {
        *th = chunk.to_vec();
    }
    Ok(outcome.best_cost)
}

/// What came out of the pipeline for one trained sample.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleOutcome<T: Real = f64> {
    /// Reconstructed pixel vector (unclipped, in the PCA's input scale).
    Image(Vec<T>),
    /// The decoded point sat too close to the projection pole; the reason
    /// is kept for the log.
    Skipped(String),
}

/// Decode trained generator parameters back into images: run the
/// generator, project the state off the sphere, undo the dataset scaling,
/// and reconstruct pixels from the principal components.
pub fn generate<T: Real>(
    n: usize,
    theta_g_set: &[Vec<T>],
    pca: &PcaModel<T>,
    scale: &ScaleFactor<T>,
) -> Result<Vec<SampleOutcome<T>>> {
    let plane_dim = (1usize << n) - 1;
    if pca.n_components() != plane_dim {
        return Err(Error::DimensionMismatch(format!(
            "decoded vectors have dimension {plane_dim}, PCA expects {}",
            pca.n_components()
        )));
    }
    let gen = build_generator(n);
    let mut out = Vec::with_capacity(theta_g_set.len());
    for theta in theta_g_set {
        let state = gen.run(theta)?;
        match si_decode(state.amplitudes()) {
            Ok(scaled_plane) => {
                let plane = scale.remove(&scaled_plane);
                out.push(SampleOutcome::Image(pca.inverse_transform(&plane)?));
            }
            Err(err @ Error::PoleProximity { .. }) => {
                out.push(SampleOutcome::Skipped(err.to_string()));
            }
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}
