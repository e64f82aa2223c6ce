//! Genetic optimization of the five pulse genes.
//!
//! Each generation is scored, individuals below the mean fitness are
//! eliminated, the best survivors are kept as elites, the population is
//! refilled with roulette-wheel crossover children and every non-elite is
//! mutated. Scoring runs in parallel; every random draw happens afterwards on
//! one sequential stream, so a seed fixes the whole run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::FitnessProblem;
use crate::pulse::{ChirpedPulseParams, Gene, ParamRanges};

/// Mutation standard deviation as a fraction of the gene's range width.
pub const DEFAULT_MUTATION_SCALE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub elite_count: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub mutation_scale: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 40,
            generations: 10,
            elite_count: 5,
            crossover_prob: 0.25,
            mutation_prob: 0.9,
            mutation_scale: DEFAULT_MUTATION_SCALE,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::InvalidConfig(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.generations == 0 {
            return Err(GaError::InvalidConfig(
                "generations must be at least 1".into(),
            ));
        }
        if self.elite_count >= self.population_size {
            return Err(GaError::InvalidConfig(format!(
                "elite_count {} must be below population_size {}",
                self.elite_count, self.population_size
            )));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale.is_finite()) {
            return Err(GaError::InvalidConfig(format!(
                "mutation_scale must be positive, got {}",
                self.mutation_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub chromosome: ChirpedPulseParams,
    /// None until scored.
    pub fitness: Option<f64>,
    /// Scoring failed and the individual was assigned zero fitness.
    pub failed: bool,
}

impl Individual {
    pub fn new(chromosome: ChirpedPulseParams) -> Self {
        Self {
            chromosome,
            fitness: None,
            failed: false,
        }
    }

    pub fn score(&self) -> f64 {
        self.fitness.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub min: f64,
    pub best_chromosome: ChirpedPulseParams,
    /// Scorings run in this generation; elites are not rescored.
    pub evaluations: usize,
    pub failures: usize,
    /// Parent selection fell back to uniform draws because every survivor
    /// had zero fitness.
    pub uniform_fallback: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaHistory {
    pub generations: Vec<GenerationSummary>,
}

impl GaHistory {
    pub fn evaluations(&self) -> usize {
        self.generations.iter().map(|g| g.evaluations).sum()
    }

    pub fn best_trace(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub history: GaHistory,
    pub final_population: Vec<Individual>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` individuals with every gene uniform in its range.
pub fn init_population<R: Rng>(ranges: &ParamRanges, n: usize, rng: &mut R) -> Vec<Individual> {
    (0..n)
        .map(|_| {
            let mut genes = [0.0; 5];
            for (g, r) in genes.iter_mut().zip(ranges.bounds()) {
                *g = rng.random_range(r.min..=r.max);
            }
            Individual::new(chromosome(genes))
        })
        .collect()
}

fn chromosome(genes: [f64; 5]) -> ChirpedPulseParams {
    ChirpedPulseParams {
        amplitude: genes[0],
        frequency: genes[1],
        center: genes[2],
        width: genes[3],
        chirp: genes[4],
    }
}

/// Index drawn with probability proportional to `weights`, or None when
/// they sum to zero.
pub fn roulette_select<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if x < *w {
            return Some(k);
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0)
}

/// Scores every unscored individual in parallel. Failures get zero fitness.
pub fn evaluate_population<P: FitnessProblem>(
    population: &mut [Individual],
    problem: &P,
) -> (usize, usize) {
    let results: Vec<Option<Result<f64, String>>> = population
        .par_iter()
        .map(|ind| {
            ind.fitness
                .is_none()
                .then(|| problem.fitness(&ind.chromosome).map_err(|e| e.to_string()))
        })
        .collect();
    let (mut evaluations, mut failures) = (0, 0);
    for (ind, result) in population.iter_mut().zip(results) {
        let Some(result) = result else { continue };
        evaluations += 1;
        match result {
            Ok(j) if j.is_finite() => ind.fitness = Some(j.clamp(0.0, 1.0)),
            Ok(j) => {
                log::warn!("non-finite fitness {j} for {:?}", ind.chromosome);
                ind.fitness = Some(0.0);
                ind.failed = true;
                failures += 1;
            }
            Err(e) => {
                log::warn!("fitness evaluation failed for {:?}: {e}", ind.chromosome);
                ind.fitness = Some(0.0);
                ind.failed = true;
                failures += 1;
            }
        }
    }
    (evaluations, failures)
}

/// Indices of `population` sorted by descending fitness; ties keep their
/// original order.
fn ranking(population: &[Individual]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[b].score().total_cmp(&population[a].score()));
    order
}

/// One elimination, elitism, crossover and mutation cycle over a scored
/// population. Returns the next population and whether parent selection
/// had to fall back to uniform draws.
pub fn evolve_generation<R: Rng>(
    population: &[Individual],
    config: &GaConfig,
    ranges: &ParamRanges,
    rng: &mut R,
) -> (Vec<Individual>, bool) {
    let mean = population.iter().map(Individual::score).sum::<f64>() / population.len() as f64;
    let survivors: Vec<usize> = ranking(population)
        .into_iter()
        .filter(|&k| population[k].score() >= mean)
        .collect();
    let elites = config.elite_count.min(survivors.len());

    let mut next: Vec<Individual> = survivors
        .iter()
        .take(config.population_size)
        .map(|&k| population[k].clone())
        .collect();

    let weights: Vec<f64> = survivors.iter().map(|&k| population[k].score()).collect();
    let mut fallback = false;
    let mut pick = |rng: &mut R| -> usize {
        roulette_select(&weights, rng).unwrap_or_else(|| {
            fallback = true;
            rng.random_range(0..weights.len())
        })
    };
    while next.len() < config.population_size {
        let a = population[survivors[pick(rng)]].chromosome.genes();
        let b = population[survivors[pick(rng)]].chromosome.genes();
        let mut child = a;
        for (c, g) in child.iter_mut().zip(b) {
            if rng.random::<f64>() < config.crossover_prob {
                *c = g;
            }
        }
        next.push(Individual::new(chromosome(child)));
    }

    for ind in next.iter_mut().skip(elites) {
        let mut genes = ind.chromosome.genes();
        for gene in Gene::ALL {
            if rng.random::<f64>() < config.mutation_prob {
                let r = ranges.get(gene);
                let noise = Normal::new(0.0, config.mutation_scale * r.width())
                    .expect("range widths are positive")
                    .sample(rng);
                genes[gene.index()] = r.clip(genes[gene.index()] + noise);
            }
        }
        *ind = Individual::new(chromosome(ranges.clip(genes)));
    }
    (next, fallback)
}

fn summarize(
    generation: usize,
    population: &[Individual],
    evaluations: usize,
    failures: usize,
    fallback: bool,
) -> GenerationSummary {
    let scores: Vec<f64> = population.iter().map(Individual::score).collect();
    let best = ranking(population)[0];
    GenerationSummary {
        generation,
        best: scores[best],
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        min: scores.iter().cloned().fold(f64::INFINITY, f64::min),
        best_chromosome: population[best].chromosome,
        evaluations,
        failures,
        uniform_fallback: fallback,
    }
}

/// Runs `config.generations` scoring rounds; the first round scores the
/// initial population.
pub fn optimize<P: FitnessProblem>(
    config: &GaConfig,
    ranges: &ParamRanges,
    problem: &P,
) -> Result<GaOutcome, GaError> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let mut population = init_population(ranges, config.population_size, &mut rng);
    let mut history = GaHistory::default();
    let mut best: Option<Individual> = None;
    let mut fallback = false;

    for generation in 0..config.generations {
        let (evaluations, failures) = evaluate_population(&mut population, problem);
        let summary = summarize(generation, &population, evaluations, failures, fallback);
        log::info!(
            "generation {generation}: best {:.6} mean {:.6} min {:.6}",
            summary.best,
            summary.mean,
            summary.min
        );
        let leader = &population[ranking(&population)[0]];
        if best.as_ref().is_none_or(|b| leader.score() > b.score()) {
            best = Some(leader.clone());
        }
        history.generations.push(summary);
        if generation + 1 < config.generations {
            let (next, fell_back) = evolve_generation(&population, config, ranges, &mut rng);
            population = next;
            fallback = fell_back;
        }
    }

    let best = best.expect("at least one generation runs");
    let edge = ranges.genes_on_boundary(&best.chromosome);
    if !edge.is_empty() {
        log::info!("best chromosome sits on the range boundary for {edge:?}");
    }
    Ok(GaOutcome {
        best,
        history,
        final_population: population,
    })
}

/// Analytic test problem: a normalized 5-D Gaussian peaked at `optimum`,
/// given in range-normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSurrogate {
    pub ranges: ParamRanges,
    pub optimum: [f64; 5],
    pub width: f64,
}

impl GaussianSurrogate {
    pub const DEFAULT_OPTIMUM: [f64; 5] = [0.3, 0.6, 0.45, 0.7, 0.55];
    pub const DEFAULT_WIDTH: f64 = 0.6;

    pub fn new(ranges: ParamRanges) -> Self {
        Self {
            ranges,
            optimum: Self::DEFAULT_OPTIMUM,
            width: Self::DEFAULT_WIDTH,
        }
    }

    pub fn optimum_pulse(&self) -> ChirpedPulseParams {
        let mut genes = [0.0; 5];
        for ((g, r), x) in genes.iter_mut().zip(self.ranges.bounds()).zip(self.optimum) {
            *g = r.min + x * r.width();
        }
        chromosome(genes)
    }

    pub fn value(&self, pulse: &ChirpedPulseParams) -> f64 {
        let r2: f64 = pulse
            .genes()
            .iter()
            .zip(self.ranges.bounds())
            .zip(self.optimum)
            .map(|((g, r), x)| ((g - r.min) / r.width() - x).powi(2))
            .sum();
        (-r2 / (2.0 * self.width * self.width)).exp()
    }
}

impl FitnessProblem for GaussianSurrogate {
    type Error = std::convert::Infallible;

    fn fitness(&self, pulse: &ChirpedPulseParams) -> Result<f64, Self::Error> {
        Ok(self.value(pulse))
    }
}
