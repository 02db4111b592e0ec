//! Genetic search over discretization cut points.
//!
//! A chromosome is the flattened cut list for every numeric condition
//! attribute. Fitness discretizes the training table with the repaired
//! chromosome and scores the resulting information system, either by the
//! approximation accuracy of the positive decision class or by the fraction
//! of decision-pure condition patterns. Selection is rank-based normalized
//! geometric, crossover is cyclic (position-exchange fallback for
//! continuous genes) or arithmetic blend, mutation redraws genes uniformly
//! inside their attribute bounds.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretize::{apply, equal_width, repair, CutPointSet, DiscretizedTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{InformationTable, Schema};

/// What the optimizer maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMetric {
    /// Approximation accuracy of the positive decision class,
    /// `|lower| / |upper|`; zero when there are no positives.
    Alpha,
    /// Fraction of condition patterns whose records share one decision.
    PatternRatio,
}

/// Recombination operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverOp {
    Cyclic,
    Blend,
}

/// Search settings. Defaults follow the reference configuration:
/// population 20, 100 generations, geometric selection with q = 0.08,
/// cyclic crossover at rate 0.8, uniform mutation at rate 0.05,
/// generational replacement without elitism.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig<F> {
    pub population_size: usize,
    pub generations: usize,
    pub selection_q: F,
    pub crossover_rate: F,
    pub mutation_rate: F,
    pub elitism: bool,
    pub metric: FitnessMetric,
    pub crossover: CrossoverOp,
    pub parallel: bool,
    pub seed: u64,
}

impl<F: Scalar> Default for GaConfig<F> {
    fn default() -> Self {
        let f = |x: f64| F::from_f64(x).expect("constant fits in scalar");
        Self {
            population_size: 20,
            generations: 100,
            selection_q: f(0.08),
            crossover_rate: f(0.8),
            mutation_rate: f(0.05),
            elitism: false,
            metric: FitnessMetric::Alpha,
            crossover: CrossoverOp::Cyclic,
            parallel: true,
            seed: 0,
        }
    }
}

impl<F: Scalar> GaConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("population size must be at least 2".into()));
        }
        if self.generations == 0 {
            return Err(Error::Config("generation count must be positive".into()));
        }
        if self.selection_q <= F::zero() || self.selection_q >= F::one() {
            return Err(Error::Config("selection q must lie in (0, 1)".into()));
        }
        for (name, rate) in [
            ("crossover rate", self.crossover_rate),
            ("mutation rate", self.mutation_rate),
        ] {
            if rate < F::zero() || rate > F::one() {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One candidate solution: raw genes plus the cached score of their
/// repaired form.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<F> {
    pub genes: Vec<F>,
    pub fitness: Option<F>,
}

impl<F> Chromosome<F> {
    pub fn new(genes: Vec<F>) -> Self {
        Self {
            genes,
            fitness: None,
        }
    }
}

/// `(lo, hi)` of the attribute owning each gene, in gene order.
pub fn gene_bounds<F: Scalar>(schema: &Schema<F>, bins: usize) -> Result<Vec<(F, F)>> {
    if bins < 2 {
        return Err(Error::Parameter("bin count must be at least 2".into()));
    }
    let numeric = schema.numeric_condition_indices();
    if numeric.is_empty() {
        return Err(Error::Parameter(
            "schema has no numeric condition attributes to optimize".into(),
        ));
    }
    let mut out = Vec::with_capacity(numeric.len() * (bins - 1));
    for attr in numeric {
        let (lo, hi) = schema.attributes()[attr]
            .kind
            .bounds()
            .expect("numeric attribute has bounds");
        for _ in 0..bins - 1 {
            out.push((lo, hi));
        }
    }
    Ok(out)
}

/// Builds the starting population: individual 0 carries the equal-width
/// cut points, the rest are drawn uniformly inside each gene's bounds.
pub fn init_population<F: Scalar, R: Rng>(
    schema: &Schema<F>,
    bins: usize,
    population_size: usize,
    rng: &mut R,
) -> Result<Vec<Chromosome<F>>> {
    let bounds = gene_bounds(schema, bins)?;
    let baseline = equal_width(schema, bins)?.flatten();
    debug_assert_eq!(baseline.len(), bounds.len());
    let mut pop = Vec::with_capacity(population_size);
    pop.push(Chromosome::new(baseline));
    for _ in 1..population_size {
        let genes = bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        pop.push(Chromosome::new(genes));
    }
    Ok(pop)
}

struct MetricCounts {
    pure: usize,
    total: usize,
    lower_positive: usize,
    upper_positive: usize,
}

/// Single grouping pass over the discretized rows, from which both fitness
/// metrics follow. Matches the set-theoretic route through partitions and
/// approximations; kept lean because it sits in the optimizer's inner loop.
fn metric_counts<F: Scalar>(disc: &DiscretizedTable<F>) -> MetricCounts {
    let schema = disc.schema();
    let cond = schema.condition_indices();
    let n = disc.len();
    let w = cond.len();
    let mut flat: Vec<u32> = Vec::with_capacity(n * w);
    let mut decisions: Vec<u8> = Vec::with_capacity(n);
    for i in 0..n {
        let row = disc.row(i);
        for &a in &cond {
            flat.push(row[a]);
        }
        decisions.push(disc.decision(i));
    }
    let mut groups: HashMap<&[u32], (u32, u32)> = HashMap::with_capacity(n.min(4096));
    for (i, &d) in decisions.iter().enumerate() {
        let counts = groups.entry(&flat[i * w..(i + 1) * w]).or_insert((0, 0));
        if d == 1 {
            counts.1 += 1;
        } else {
            counts.0 += 1;
        }
    }
    let mut out = MetricCounts {
        pure: 0,
        total: groups.len(),
        lower_positive: 0,
        upper_positive: 0,
    };
    for (neg, pos) in groups.values() {
        let size = (neg + pos) as usize;
        if *neg == 0 || *pos == 0 {
            out.pure += 1;
        }
        if *pos > 0 {
            out.upper_positive += size;
            if *neg == 0 {
                out.lower_positive += size;
            }
        }
    }
    out
}

/// Scores one cut point set against the table.
pub fn fitness_of<F: Scalar>(
    table: &InformationTable<F>,
    cuts: &CutPointSet<F>,
    metric: FitnessMetric,
) -> Result<F> {
    let disc = apply(table, cuts)?;
    let counts = metric_counts(&disc);
    Ok(match metric {
        FitnessMetric::Alpha => {
            if counts.upper_positive == 0 {
                F::zero()
            } else {
                F::from_count(counts.lower_positive) / F::from_count(counts.upper_positive)
            }
        }
        FitnessMetric::PatternRatio => {
            if counts.total == 0 {
                F::zero()
            } else {
                F::from_count(counts.pure) / F::from_count(counts.total)
            }
        }
    })
}

/// Fills in every missing fitness. The parallel path changes scheduling
/// only; scores are pure functions of the genes, so results are identical
/// either way.
pub fn evaluate_population<F: Scalar>(
    population: &mut [Chromosome<F>],
    table: &InformationTable<F>,
    bins: usize,
    metric: FitnessMetric,
    parallel: bool,
) -> Result<()> {
    let score = |c: &mut Chromosome<F>| -> Result<()> {
        if c.fitness.is_none() {
            let cuts = repair(&c.genes, table.schema(), bins)?;
            c.fitness = Some(fitness_of(table, &cuts, metric)?);
        }
        Ok(())
    };
    if parallel {
        population.par_iter_mut().try_for_each(score)
    } else {
        population.iter_mut().try_for_each(score)
    }
}

/// Normalized geometric rank weights: rank 1 is the fittest and receives
/// `q' = q / (1 - (1-q)^P)`, rank r receives `q' (1-q)^(r-1)`. The weights
/// sum to one.
pub fn rank_weights<F: Scalar>(population_size: usize, q: F) -> Result<Vec<F>> {
    if population_size == 0 {
        return Err(Error::Parameter("population size must be positive".into()));
    }
    if q <= F::zero() || q >= F::one() {
        return Err(Error::Parameter("selection q must lie in (0, 1)".into()));
    }
    let one = F::one();
    let normalizer = one - (one - q).powi(population_size as i32);
    let q_prime = q / normalizer;
    let mut weights = Vec::with_capacity(population_size);
    let mut w = q_prime;
    for _ in 0..population_size {
        weights.push(w);
        w = w * (one - q);
    }
    Ok(weights)
}

/// Population indices ordered best first; equal fitness keeps the lower
/// index first, so ranking is deterministic.
fn ranking<F: Scalar>(population: &[Chromosome<F>]) -> Result<Vec<usize>> {
    if population.iter().any(|c| c.fitness.is_none()) {
        return Err(Error::State(
            "selection requires an evaluated population".into(),
        ));
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = population[a].fitness.expect("checked above");
        let fb = population[b].fitness.expect("checked above");
        fb.partial_cmp(&fa)
            .expect("fitness values are comparable")
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Draws a full parent pool (one index per population slot) by inverse
/// transform over the cumulative rank weights.
pub fn select<F: Scalar, R: Rng>(
    population: &[Chromosome<F>],
    q: F,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let order = ranking(population)?;
    let weights = rank_weights(population.len(), q)?;
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut sum = F::zero();
    for w in &weights {
        sum = sum + *w;
        cumulative.push(sum);
    }
    let mut parents = Vec::with_capacity(population.len());
    for _ in 0..population.len() {
        let u: F = rng.random_range(F::zero()..F::one());
        let rank = cumulative
            .partition_point(|c| *c <= u)
            .min(population.len() - 1);
        parents.push(order[rank]);
    }
    Ok(parents)
}

/// Cycle crossover adapted to continuous genes. Starting from `start`, the
/// cycle follows value matches: the gene `b[i]` is looked up in `a` and the
/// walk continues at that position. If the walk returns to `start` the
/// children swap everything outside the cycle; continuous genes rarely
/// match, so the usual outcome is the fallback, which swaps exactly the
/// visited positions.
pub fn cyclic_crossover<F: Scalar>(a: &[F], b: &[F], start: usize) -> (Vec<F>, Vec<F>) {
    let n = a.len();
    assert_eq!(n, b.len(), "parents must have equal gene counts");
    assert!(start < n, "start position out of range");
    let mut in_cycle = vec![false; n];
    let mut i = start;
    let mut closed = false;
    for _ in 0..n {
        in_cycle[i] = true;
        match a.iter().position(|&g| g == b[i]) {
            Some(j) if j == start => {
                closed = true;
                break;
            }
            Some(j) if !in_cycle[j] => i = j,
            _ => break,
        }
    }
    let mut child_a = Vec::with_capacity(n);
    let mut child_b = Vec::with_capacity(n);
    for k in 0..n {
        // A closed cycle keeps its positions and swaps the rest; the
        // fallback swaps the visited positions instead.
        let keep = in_cycle[k] == closed;
        if keep {
            child_a.push(a[k]);
            child_b.push(b[k]);
        } else {
            child_a.push(b[k]);
            child_b.push(a[k]);
        }
    }
    (child_a, child_b)
}

/// Arithmetic blend: children are the two convex combinations of the
/// parents at weight `lambda`.
pub fn blend_crossover<F: Scalar>(a: &[F], b: &[F], lambda: F) -> (Vec<F>, Vec<F>) {
    assert_eq!(a.len(), b.len(), "parents must have equal gene counts");
    let one = F::one();
    let child_a = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| lambda * x + (one - lambda) * y)
        .collect();
    let child_b = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (one - lambda) * x + lambda * y)
        .collect();
    (child_a, child_b)
}

/// Redraws each gene with probability `rate`, uniformly inside its bounds.
/// Returns whether anything changed.
pub fn mutate_genes<F: Scalar, R: Rng>(
    genes: &mut [F],
    rate: F,
    bounds: &[(F, F)],
    rng: &mut R,
) -> bool {
    debug_assert_eq!(genes.len(), bounds.len());
    let mut changed = false;
    for (gene, &(lo, hi)) in genes.iter_mut().zip(bounds) {
        let u: F = rng.random_range(F::zero()..F::one());
        if u < rate {
            *gene = rng.random_range(lo..hi);
            changed = true;
        }
    }
    changed
}

/// Per-generation population statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats<F> {
    pub generation: usize,
    pub best: F,
    pub mean: F,
    pub best_so_far: F,
}

/// Statistics for every generation, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionHistory<F>(pub Vec<GenerationStats<F>>);

impl<F: Scalar> EvolutionHistory<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best,mean,best_so_far\n");
        for row in &self.0 {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.generation, row.best, row.mean, row.best_so_far
            ));
        }
        out
    }
}

/// Result of one optimization run, including the equal-width baseline
/// scored on the same table and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutcome<F> {
    pub best_cuts: CutPointSet<F>,
    pub best_fitness: F,
    pub baseline_cuts: CutPointSet<F>,
    pub baseline_fitness: F,
    pub history: EvolutionHistory<F>,
}

/// Runs the full generational loop on a cleaned table. Individual 0 of the
/// starting population is the equal-width chromosome, so the final best
/// never scores below the baseline.
pub fn evolve<F: Scalar>(
    table: &InformationTable<F>,
    bins: usize,
    config: &GaConfig<F>,
) -> Result<EvolutionOutcome<F>> {
    config.validate()?;
    if table.is_empty() {
        return Err(Error::Parameter("training table is empty".into()));
    }
    let schema = table.schema();
    let bounds = gene_bounds(schema, bins)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population = init_population(schema, bins, config.population_size, &mut rng)?;

    let mut best_genes = population[0].genes.clone();
    let mut best_fitness = F::neg_infinity();
    let mut history = EvolutionHistory::default();

    for generation in 0..config.generations {
        evaluate_population(&mut population, table, bins, config.metric, config.parallel)?;

        let mut gen_best = F::neg_infinity();
        let mut sum = F::zero();
        for c in &population {
            let f = c.fitness.expect("population was just evaluated");
            sum = sum + f;
            if f > gen_best {
                gen_best = f;
            }
            if f > best_fitness {
                best_fitness = f;
                best_genes = c.genes.clone();
            }
        }
        history.0.push(GenerationStats {
            generation,
            best: gen_best,
            mean: sum / F::from_count(population.len()),
            best_so_far: best_fitness,
        });

        if generation + 1 == config.generations {
            break;
        }

        let parents = select(&population, config.selection_q, &mut rng)?;
        let mut next = Vec::with_capacity(population.len());
        for pair in parents.chunks(2) {
            if pair.len() == 1 {
                next.push(population[pair[0]].clone());
                continue;
            }
            let (pa, pb) = (&population[pair[0]], &population[pair[1]]);
            let u: F = rng.random_range(F::zero()..F::one());
            if u < config.crossover_rate {
                let (ga, gb) = match config.crossover {
                    CrossoverOp::Cyclic => {
                        let start = rng.random_range(0..pa.genes.len());
                        cyclic_crossover(&pa.genes, &pb.genes, start)
                    }
                    CrossoverOp::Blend => {
                        let lambda: F = rng.random_range(F::zero()..F::one());
                        blend_crossover(&pa.genes, &pb.genes, lambda)
                    }
                };
                next.push(Chromosome::new(ga));
                next.push(Chromosome::new(gb));
            } else {
                next.push(pa.clone());
                next.push(pb.clone());
            }
        }
        for c in &mut next {
            if mutate_genes(&mut c.genes, config.mutation_rate, &bounds, &mut rng) {
                c.fitness = None;
            }
        }
        if config.elitism {
            next[0] = Chromosome {
                genes: best_genes.clone(),
                fitness: Some(best_fitness),
            };
        }
        population = next;
    }

    let best_cuts = repair(&best_genes, schema, bins)?;
    let baseline_cuts = equal_width(schema, bins)?;
    let baseline_fitness = fitness_of(table, &baseline_cuts, config.metric)?;
    Ok(EvolutionOutcome {
        best_cuts,
        best_fitness,
        baseline_cuts,
        baseline_fitness,
        history,
    })
}
