//! Covariance matrix adaptation evolution strategy (CMA-ES), the
//! gradient-free minimizer both players of the adversarial game train with.
//!
//! The implementation follows the standard reference formulation: sample a
//! population from N(mean, step^2 C), rank it by cost, recombine the best
//! half with log-linear weights, and adapt mean, step size (via the
//! conjugate evolution path) and covariance (rank-1 plus rank-mu updates).
//! The covariance eigendecomposition reuses the in-repo Jacobi solver;
//! parameter dimensions here stay small (at most a few dozen).
//!
//! Candidates violating box bounds are repaired by reflection at the walls,
//! and the repaired point is both what gets evaluated and what enters the
//! distribution update; angles live on `[-pi, pi)` where reflection avoids
//! the boundary pile-up that clamping causes.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Base of the logarithm in the population-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Natural logarithm (the conventional choice).
    #[default]
    Natural,
    /// Base-10 logarithm.
    Ten,
}

/// Default population size for dimension `dim`: `4 + floor(2 log dim)`.
pub fn population_size(dim: usize, base: LogBase) -> usize {
    assert!(dim >= 1, "dimension must be at least 1");
    let log = match base {
        LogBase::Natural => (dim as f64).ln(),
        LogBase::Ten => (dim as f64).log10(),
    };
    4 + (2.0 * log).floor() as usize
}

/// Default initial step size for angle-valued parameters: 0.3 of the
/// half-width of `[-pi, pi)`.
pub fn default_angle_step<T: Real>() -> T {
    T::of(0.3) * T::PI()
}

/// The canonical angle box, `[-pi, pi)` in every coordinate.
pub fn angle_bounds<T: Real>(dim: usize) -> Vec<(T, T)> {
    vec![(-T::PI(), T::PI()); dim]
}

/// Construction-time knobs that deviate from the defaults.
#[derive(Debug, Clone, Default)]
pub struct CmaesOptions {
    pub log_base: LogBase,
    /// Override the population-size rule entirely.
    pub population_size: Option<usize>,
}

/// Full optimizer state; one instance per independent search.
#[derive(Debug, Clone)]
pub struct CmaesState<T: Real = f64> {
    dim: usize,
    population: usize,
    mu: usize,
    weights: Vec<T>,
    mu_eff: T,
    c_sigma: T,
    d_sigma: T,
    c_cov_path: T,
    c_rank_one: T,
    c_rank_mu: T,
    chi_n: T,

    mean: Vec<T>,
    step_size: T,
    /// Hard ceiling on the step size; see the safeguard note in [`Self::tell`].
    max_step: T,
    covariance: Matrix<T>,
    path_sigma: Vec<T>,
    path_cov: Vec<T>,
    generation: usize,

    bounds: Option<Vec<(T, T)>>,
    best_params: Option<Vec<T>>,
    best_cost: T,

    eigen_vectors: Matrix<T>,
    eigen_sqrt: Vec<T>,
    eigen_stale: bool,
    rng: ChaCha8Rng,
}

impl<T: Real> CmaesState<T> {
    /// Fresh state centered at `initial_mean` with identity covariance.
    pub fn new(initial_mean: Vec<T>, initial_step: T, seed: u64) -> Result<Self> {
        Self::with_options(initial_mean, initial_step, seed, &CmaesOptions::default())
    }

    pub fn with_options(
        initial_mean: Vec<T>,
        initial_step: T,
        seed: u64,
        options: &CmaesOptions,
    ) -> Result<Self> {
        let dim = initial_mean.len();
        if dim == 0 {
            return Err(Error::invalid("optimizer dimension must be at least 1"));
        }
        if !(initial_step.is_finite() && initial_step > T::zero()) {
            return Err(Error::invalid(format!(
                "initial step size must be positive, got {initial_step}"
            )));
        }
        let population = match options.population_size {
            Some(p) if p >= 2 => p,
            Some(p) => {
                return Err(Error::invalid(format!("population must be at least 2, got {p}")))
            }
            None => population_size(dim, options.log_base),
        };
        let mu = population / 2;
        let mut weights: Vec<T> = (1..=mu)
            .map(|i| T::of(((population as f64 + 1.0) / 2.0).ln() - (i as f64).ln()))
            .collect();
        let total: T = weights.iter().copied().sum();
        for w in &mut weights {
            *w = *w / total;
        }
        let mu_eff = T::one() / weights.iter().map(|&w| w * w).sum::<T>();

        let m = T::of(dim as f64);
        let two = T::of(2.0);
        let c_sigma = (mu_eff + two) / (m + mu_eff + T::of(5.0));
        let d_sigma = T::one()
            + two * T::max(T::zero(), ((mu_eff - T::one()) / (m + T::one())).sqrt() - T::one())
            + c_sigma;
        let c_cov_path = (T::of(4.0) + mu_eff / m) / (m + T::of(4.0) + two * mu_eff / m);
        let c_rank_one = two / ((m + T::of(1.3)) * (m + T::of(1.3)) + mu_eff);
        let c_rank_mu = T::min(
            T::one() - c_rank_one,
            two * (mu_eff - two + T::one() / mu_eff) / ((m + two) * (m + two) + mu_eff),
        );
        let chi_n = m.sqrt()
            * (T::one() - T::one() / (T::of(4.0) * m)
                + T::one() / (T::of(21.0) * m * m));

        Ok(CmaesState {
            dim,
            population,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_cov_path,
            c_rank_one,
            c_rank_mu,
            chi_n,
            mean: initial_mean,
            step_size: initial_step,
            max_step: initial_step * T::of(1e12),
            covariance: Matrix::identity(dim),
            path_sigma: vec![T::zero(); dim],
            path_cov: vec![T::zero(); dim],
            generation: 0,
            bounds: None,
            best_params: None,
            best_cost: T::infinity(),
            eigen_vectors: Matrix::identity(dim),
            eigen_sqrt: vec![T::one(); dim],
            eigen_stale: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Install box bounds; samples are reflected into them.
    pub fn set_bounds(&mut self, bounds: Option<Vec<(T, T)>>) -> Result<()> {
        if let Some(b) = &bounds {
            if b.len() != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "{} bound pairs for dimension {}",
                    b.len(),
                    self.dim
                )));
            }
            for &(lo, hi) in b {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::invalid(format!("invalid bound interval [{lo}, {hi})")));
                }
            }
        }
        self.bounds = bounds;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn population_size(&self) -> usize {
        self.population
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn step_size(&self) -> T {
        self.step_size
    }

    pub fn covariance(&self) -> &Matrix<T> {
        &self.covariance
    }

    pub fn best(&self) -> Option<(&[T], T)> {
        self.best_params.as_deref().map(|p| (p, self.best_cost))
    }

    fn refresh_eigen(&mut self) {
        if !self.eigen_stale {
            return;
        }
        let eig = jacobi_eigen(&self.covariance).expect("covariance is square and symmetric");
        let largest = eig.values[0];
        if !(largest.is_finite() && largest > T::zero()) {
            // the distribution collapsed; restart the shape from scratch
            self.covariance = Matrix::identity(self.dim);
            self.eigen_vectors = Matrix::identity(self.dim);
            self.eigen_sqrt = vec![T::one(); self.dim];
            self.eigen_stale = false;
            return;
        }
        let floor = largest * T::of(1e-14);
        self.eigen_sqrt = eig.values.iter().map(|&v| T::max(v, floor).sqrt()).collect();
        self.eigen_vectors = eig.vectors;
        self.eigen_stale = false;
    }

    /// Draw the next population: `P` candidates from N(mean, step^2 C),
    /// reflected into the bounds when bounds are set.
    pub fn ask(&mut self) -> Vec<Vec<T>> {
        self.refresh_eigen();
        let mut out = Vec::with_capacity(self.population);
        for _ in 0..self.population {
            let scaled: Vec<T> = self
                .eigen_sqrt
                .iter()
                .map(|&d| {
                    let z: f64 = self.rng.sample(StandardNormal);
                    d * T::of(z)
                })
                .collect();
            let shift = self.eigen_vectors.mul_vec(&scaled);
            let mut x: Vec<T> = self
                .mean
                .iter()
                .zip(&shift)
                .map(|(&m, &s)| m + self.step_size * s)
                .collect();
            if let Some(bounds) = &self.bounds {
                for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
                    *v = reflect_into(*v, lo, hi);
                }
            }
            out.push(x);
        }
        out
    }

    /// Rank the evaluated population and update mean, paths, covariance,
    /// step size and the best-ever record. Non-finite costs rank worst.
    pub fn tell(&mut self, population: &[Vec<T>], costs: &[T]) -> Result<()> {
        if population.len() != self.population || costs.len() != self.population {
            return Err(Error::DimensionMismatch(format!(
                "expected population of {}, got {} candidates with {} costs",
                self.population,
                population.len(),
                costs.len()
            )));
        }
        for x in population {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "candidate of length {} in dimension {}",
                    x.len(),
                    self.dim
                )));
            }
        }
        self.refresh_eigen();

        let mut order: Vec<usize> = (0..self.population).collect();
        order.sort_by(|&a, &b| rank_cost(costs[a], costs[b]).then(a.cmp(&b)));

        let sigma = self.step_size;
        let selected: Vec<&Vec<T>> = order[..self.mu].iter().map(|&i| &population[i]).collect();
        let steps: Vec<Vec<T>> = selected
            .iter()
            .map(|x| x.iter().zip(&self.mean).map(|(&xi, &mi)| (xi - mi) / sigma).collect())
            .collect();
        let mut step_w = vec![T::zero(); self.dim];
        for (w, y) in self.weights.iter().zip(&steps) {
            for (acc, &yi) in step_w.iter_mut().zip(y) {
                *acc = *acc + *w * yi;
            }
        }

        for (m, &s) in self.mean.iter_mut().zip(&step_w) {
            *m = *m + sigma * s;
        }

        // whitened recombined step C^{-1/2} y_w drives the step-size path
        let t = self.eigen_vectors.t_mul_vec(&step_w);
        let t: Vec<T> = t.iter().zip(&self.eigen_sqrt).map(|(&v, &d)| v / d).collect();
        let whitened = self.eigen_vectors.mul_vec(&t);

        let one = T::one();
        let two = T::of(2.0);
        let decay_s = one - self.c_sigma;
        let input_s = (self.c_sigma * (two - self.c_sigma) * self.mu_eff).sqrt();
        for (p, &w) in self.path_sigma.iter_mut().zip(&whitened) {
            *p = decay_s * *p + input_s * w;
        }
        let path_norm =
            self.path_sigma.iter().map(|&p| p * p).sum::<T>().sqrt();

        let gen_t = T::of((self.generation + 1) as f64);
        let unbias = (one - decay_s.powf(two * gen_t)).sqrt();
        let threshold = (T::of(1.4) + two / (T::of(self.dim as f64) + one)) * self.chi_n;
        let stalled = path_norm / unbias >= threshold;

        let decay_c = one - self.c_cov_path;
        let input_c = (self.c_cov_path * (two - self.c_cov_path) * self.mu_eff).sqrt();
        for (p, &s) in self.path_cov.iter_mut().zip(&step_w) {
            *p = decay_c * *p + if stalled { T::zero() } else { input_c * s };
        }

        let stall_fill =
            if stalled { self.c_cov_path * (two - self.c_cov_path) } else { T::zero() };
        let base = one - self.c_rank_one - self.c_rank_mu;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut v = (base + self.c_rank_one * stall_fill) * self.covariance[(i, j)];
                v = v + self.c_rank_one * self.path_cov[i] * self.path_cov[j];
                for (w, y) in self.weights.iter().zip(&steps) {
                    v = v + self.c_rank_mu * *w * y[i] * y[j];
                }
                self.covariance[(i, j)] = v;
            }
        }
        self.covariance.symmetrize();
        self.eigen_stale = true;

        // On flat stretches of the objective the path norm random-walks and
        // the step size can drift without limit, eventually overflowing the
        // sampled candidates. Clamp the per-generation change and cap the
        // step outright: under reflection a step wider than the box adds
        // nothing, and without bounds twelve orders of magnitude beyond the
        // initial step means the search has already lost the scale.
        let exponent = ((self.c_sigma / self.d_sigma) * (path_norm / self.chi_n - one))
            .max(-one)
            .min(one);
        let cap = self
            .bounds
            .as_ref()
            .map(|b| {
                b.iter().map(|&(lo, hi)| hi - lo).fold(T::zero(), T::max)
            })
            .unwrap_or(self.max_step)
            .min(self.max_step);
        self.step_size = (sigma * exponent.exp()).min(cap);
        self.generation += 1;

        let lead = order[0];
        if costs[lead].is_finite() && costs[lead] < self.best_cost {
            self.best_cost = costs[lead];
            self.best_params = Some(population[lead].clone());
        }
        Ok(())
    }
}

fn rank_cost<T: Real>(a: T, b: T) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => Ordering::Equal,
    }
}

/// Fold a value into `[lo, hi)` by reflecting at the walls.
fn reflect_into<T: Real>(x: T, lo: T, hi: T) -> T {
    if x >= lo && x < hi {
        return x;
    }
    let width = hi - lo;
    let period = T::of(2.0) * width;
    let mut y = (x - lo) % period;
    if y < T::zero() {
        y = y + period;
    }
    let r = if y < width { y } else { period - y };
    let out = lo + r;
    if out >= hi {
        lo
    } else {
        out
    }
}

type CostFn<'a, T> = Box<dyn FnMut(&[T]) -> T + 'a>;

/// A cost function plus the box its arguments live in.
pub struct ObjectiveSpec<'a, T: Real = f64> {
    evaluate: CostFn<'a, T>,
    bounds: Option<Vec<(T, T)>>,
}

impl<'a, T: Real> ObjectiveSpec<'a, T> {
    pub fn new(
        evaluate: impl FnMut(&[T]) -> T + 'a,
        bounds: Option<Vec<(T, T)>>,
    ) -> Self {
        ObjectiveSpec { evaluate: Box::new(evaluate), bounds }
    }

    /// Objective over `dim` angle parameters bounded to `[-pi, pi)`.
    pub fn angles(dim: usize, evaluate: impl FnMut(&[T]) -> T + 'a) -> Self {
        Self::new(evaluate, Some(angle_bounds(dim)))
    }

    pub fn unbounded(evaluate: impl FnMut(&[T]) -> T + 'a) -> Self {
        Self::new(evaluate, None)
    }

    pub fn evaluate(&mut self, x: &[T]) -> T {
        (self.evaluate)(x)
    }

    pub fn bounds(&self) -> Option<&[(T, T)]> {
        self.bounds.as_deref()
    }
}

/// Early-stop rule for [`minimize`]: stop once the best-ever cost improved
/// by less than `tolerance` over the last `window` generations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stagnation<T: Real = f64> {
    pub tolerance: T,
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    BudgetExhausted,
    Stagnated,
}

/// One row of the optimization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationTrace<T: Real = f64> {
    pub generation: usize,
    pub best_cost: T,
    pub mean_cost: T,
    /// Population variance (1/P normalization) of the costs.
    pub cost_variance: T,
    pub step_size: T,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome<T: Real = f64> {
    pub best_params: Vec<T>,
    pub best_cost: T,
    pub trace: Vec<GenerationTrace<T>>,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// Population statistics used for trace rows: (mean, population variance).
pub fn cost_statistics<T: Real>(costs: &[T]) -> (T, T) {
    let count = T::of(costs.len() as f64);
    let mean = costs.iter().copied().sum::<T>() / count;
    let var = costs.iter().map(|&c| (c - mean) * (c - mean)).sum::<T>() / count;
    (mean, var)
}

/// Run ask/evaluate/tell until the evaluation budget is spent or the best
/// cost stagnates.
pub fn minimize<T: Real>(
    state: &mut CmaesState<T>,
    objective: &mut ObjectiveSpec<'_, T>,
    budget: usize,
    stagnation: Option<Stagnation<T>>,
) -> Result<MinimizeOutcome<T>> {
    if budget < state.population_size() {
        return Err(Error::invalid(format!(
            "budget {budget} cannot cover one population of {}",
            state.population_size()
        )));
    }
    state.set_bounds(objective.bounds.clone())?;
    let mut evaluations = 0;
    let mut trace = Vec::new();
    let mut best_history: Vec<T> = Vec::new();
    let mut stop = StopReason::BudgetExhausted;

    while evaluations + state.population_size() <= budget {
        let population = state.ask();
        let costs: Vec<T> = population.iter().map(|x| objective.evaluate(x)).collect();
        evaluations += costs.len();
        state.tell(&population, &costs)?;

        let (mean_cost, cost_variance) = cost_statistics(&costs);
        let best_cost = state.best().map(|(_, c)| c).unwrap_or(T::infinity());
        trace.push(GenerationTrace {
            generation: state.generation(),
            best_cost,
            mean_cost,
            cost_variance,
            step_size: state.step_size(),
        });
        best_history.push(best_cost);

        if let Some(s) = stagnation {
            if best_history.len() > s.window {
                let before = best_history[best_history.len() - 1 - s.window];
                let improvement = before - best_cost;
                if improvement < s.tolerance {
                    stop = StopReason::Stagnated;
                    break;
                }
            }
        }
    }

    let (best_params, best_cost) = match state.best() {
        Some((p, c)) => (p.to_vec(), c),
        None => (state.mean().to_vec(), T::infinity()),
    };
    Ok(MinimizeOutcome { best_params, best_cost, trace, evaluations, stop })
}
