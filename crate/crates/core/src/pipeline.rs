//! End-to-end comparison pipeline: split a cleaned table, optimize cut
//! points on the training side, and score both the optimized and the
//! equal-width discretization on held-out records.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::discretize::apply;
use crate::error::{Error, Result};
use crate::evolve::{evolve, fitness_of, EvolutionOutcome, FitnessMetric, GaConfig};
use crate::rough::InformationSystem;
use crate::rules::{evaluate, extract, Evaluation, RuleSet};
use crate::scalar::Scalar;
use crate::table::{AttributeKind, InformationTable};

/// Keeps the train/test RNG stream distinct from the optimizer's stream
/// even though both derive from the one user-facing seed.
const SPLIT_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Splits by decision class so both sides keep the class balance: each
/// class is shuffled separately and its first `test_fraction` records
/// (rounded down) go to the test side. Record ids and their relative
/// order are preserved.
pub fn stratified_split<F: Scalar>(
    table: &InformationTable<F>,
    test_fraction: F,
    seed: u64,
) -> Result<(InformationTable<F>, InformationTable<F>)> {
    if test_fraction <= F::zero() || test_fraction >= F::one() {
        return Err(Error::Parameter("test fraction must lie in (0, 1)".into()));
    }
    if table.is_empty() {
        return Err(Error::Parameter("cannot split an empty table".into()));
    }
    let decision = table.schema().decision_index();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_ids = std::collections::HashSet::new();
    for class in [0u32, 1] {
        let mut members: Vec<usize> = table
            .records()
            .iter()
            .filter(|r| r.values[decision] == crate::table::Value::Code(class))
            .map(|r| r.id)
            .collect();
        members.shuffle(&mut rng);
        let take = (F::from_count(members.len()) * test_fraction)
            .floor()
            .to_usize()
            .expect("split size fits in usize");
        test_ids.extend(members.into_iter().take(take));
    }
    if test_ids.is_empty() {
        return Err(Error::Parameter(
            "test fraction leaves the test side empty".into(),
        ));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for record in table.records() {
        if test_ids.contains(&record.id) {
            test.push(record.clone());
        } else {
            train.push(record.clone());
        }
    }
    if train.is_empty() {
        return Err(Error::Parameter(
            "test fraction leaves the training side empty".into(),
        ));
    }
    Ok((
        InformationTable::from_records(table.schema().clone(), train)?,
        InformationTable::from_records(table.schema().clone(), test)?,
    ))
}

/// Training-side statistics for one discretization arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats<F> {
    pub fitness: F,
    pub alpha: F,
    pub pattern_ratio: F,
    pub patterns_pure: usize,
    pub patterns_total: usize,
    pub certain_rules: usize,
    pub possible_rules: usize,
    pub evaluation: Evaluation,
}

/// Everything `run_compare` measures, renderable as a deterministic
/// key=value report.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport<F> {
    pub records: usize,
    pub train_records: usize,
    pub test_records: usize,
    pub bins: usize,
    pub seed: u64,
    pub metric: FitnessMetric,
    pub pattern_space: u64,
    pub baseline: ArmStats<F>,
    pub optimized: ArmStats<F>,
}

impl<F: Scalar> CompareReport<F> {
    pub fn to_text(&self) -> String {
        let metric = match self.metric {
            FitnessMetric::Alpha => "alpha",
            FitnessMetric::PatternRatio => "pattern",
        };
        let mut out = String::new();
        out.push_str(&format!("records={}\n", self.records));
        out.push_str(&format!("train-records={}\n", self.train_records));
        out.push_str(&format!("test-records={}\n", self.test_records));
        out.push_str(&format!("bins={}\n", self.bins));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("metric={metric}\n"));
        out.push_str(&format!("pattern-space={}\n", self.pattern_space));
        for (prefix, arm) in [("baseline", &self.baseline), ("optimized", &self.optimized)] {
            out.push_str(&format!("{prefix}-fitness={}\n", arm.fitness));
            out.push_str(&format!("{prefix}-alpha={}\n", arm.alpha));
            out.push_str(&format!("{prefix}-pattern-ratio={}\n", arm.pattern_ratio));
            out.push_str(&format!("{prefix}-patterns-pure={}\n", arm.patterns_pure));
            out.push_str(&format!("{prefix}-patterns-total={}\n", arm.patterns_total));
            out.push_str(&format!("{prefix}-certain-rules={}\n", arm.certain_rules));
            out.push_str(&format!("{prefix}-possible-rules={}\n", arm.possible_rules));
            let accuracy = match arm.evaluation.accuracy::<f64>() {
                Some(a) => a.to_string(),
                None => "n/a".into(),
            };
            out.push_str(&format!("{prefix}-test-accuracy={accuracy}\n"));
            out.push_str(&format!(
                "{prefix}-test-coverage={}\n",
                arm.evaluation.coverage::<f64>()
            ));
            out.push_str(&format!(
                "{prefix}-test-correct={}\n",
                arm.evaluation.correct
            ));
            out.push_str(&format!(
                "{prefix}-test-abstained={}\n",
                arm.evaluation.abstained()
            ));
        }
        let gain = self.optimized.fitness - self.baseline.fitness;
        out.push_str(&format!("fitness-gain={gain}\n"));
        out
    }
}

/// Output of the full comparison: the optimizer run, both rule sets, and
/// the measured report.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutcome<F> {
    pub evolution: EvolutionOutcome<F>,
    pub optimized_rules: RuleSet<F>,
    pub baseline_rules: RuleSet<F>,
    pub report: CompareReport<F>,
}

/// Number of distinct condition patterns the discretized space can hold:
/// the product of category counts and bin counts.
pub fn pattern_space<F: Scalar>(table: &InformationTable<F>, bins: usize) -> u64 {
    let schema = table.schema();
    schema
        .condition_indices()
        .into_iter()
        .map(|i| match &schema.attributes()[i].kind {
            AttributeKind::Categorical(cats) => cats.len() as u64,
            _ => bins as u64,
        })
        .fold(1u64, u64::saturating_mul)
}

fn arm_stats<F: Scalar>(
    train: &InformationTable<F>,
    test: &InformationTable<F>,
    cuts: &crate::discretize::CutPointSet<F>,
    fitness: F,
) -> Result<(ArmStats<F>, RuleSet<F>)> {
    let disc_train = apply(train, cuts)?;
    let system = InformationSystem::from_discretized(&disc_train);
    let stats = system.pattern_consistency()?;
    let counts = system.approximation_counts();
    let rules = extract(&disc_train)?;
    let disc_test = apply(test, cuts)?;
    let evaluation = evaluate(&rules, &disc_test)?;
    Ok((
        ArmStats {
            fitness,
            alpha: counts.alpha(1).unwrap_or_else(F::zero),
            pattern_ratio: stats.ratio(),
            patterns_pure: stats.pure,
            patterns_total: stats.total,
            certain_rules: rules.certain_count(),
            possible_rules: rules.possible_count(),
            evaluation,
        },
        rules,
    ))
}

/// Splits the cleaned table, optimizes cut points on the training side,
/// and scores both arms. The returned report is a pure function of the
/// inputs, so repeated runs are byte-identical.
pub fn run_compare<F: Scalar>(
    table: &InformationTable<F>,
    bins: usize,
    config: &GaConfig<F>,
    test_fraction: F,
) -> Result<CompareOutcome<F>> {
    for record in table.records() {
        if record.values.iter().any(|v| v.is_missing()) {
            return Err(Error::Parameter(format!(
                "record {} has missing values; clean the table first",
                record.id
            )));
        }
    }
    let (train, test) = stratified_split(table, test_fraction, config.seed ^ SPLIT_SEED_SALT)?;
    let evolution = evolve(&train, bins, config)?;
    if evolution.best_fitness < evolution.baseline_fitness {
        return Err(Error::State(format!(
            "optimized fitness {} fell below the equal-width baseline {}",
            evolution.best_fitness, evolution.baseline_fitness
        )));
    }
    let (baseline, baseline_rules) = arm_stats(
        &train,
        &test,
        &evolution.baseline_cuts,
        evolution.baseline_fitness,
    )?;
    let (optimized, optimized_rules) =
        arm_stats(&train, &test, &evolution.best_cuts, evolution.best_fitness)?;
    debug_assert_eq!(
        optimized.fitness,
        fitness_of(&train, &evolution.best_cuts, config.metric)?
    );
    let report = CompareReport {
        records: table.len(),
        train_records: train.len(),
        test_records: test.len(),
        bins,
        seed: config.seed,
        metric: config.metric,
        pattern_space: pattern_space(table, bins),
        baseline,
        optimized,
    };
    Ok(CompareOutcome {
        evolution,
        optimized_rules,
        baseline_rules,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, SynthSpec};
    use crate::table::{survey_schema, Value};

    fn synthetic(records: usize, seed: u64) -> InformationTable<f64> {
        let schema = survey_schema::<f64>();
        let spec = SynthSpec::parse(
            &format!("records={records}; noise=0.1; rule=Mothers Age > 25 and Education < 7"),
            &schema,
        )
        .unwrap();
        synthesize(&schema, &spec, seed).unwrap()
    }

    #[test]
    fn split_is_stratified_and_partitions_ids() {
        let table = synthetic(1000, 3);
        let decision = table.schema().decision_index();
        let positives = |t: &InformationTable<f64>| {
            t.records()
                .iter()
                .filter(|r| r.values[decision] == Value::Code(1))
                .count()
        };
        let total_pos = positives(&table);
        let (train, test) = stratified_split(&table, 0.2, 99).unwrap();
        assert_eq!(train.len() + test.len(), 1000);
        assert_eq!(positives(&test), total_pos / 5);
        let mut ids: Vec<usize> = train
            .records()
            .iter()
            .chain(test.records())
            .map(|r| r.id)
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_in_the_seed() {
        let table = synthetic(300, 4);
        let (a_train, a_test) = stratified_split(&table, 0.2, 7).unwrap();
        let (b_train, b_test) = stratified_split(&table, 0.2, 7).unwrap();
        assert_eq!(a_train.to_csv(), b_train.to_csv());
        assert_eq!(a_test.to_csv(), b_test.to_csv());
        let (c_train, _) = stratified_split(&table, 0.2, 8).unwrap();
        assert_ne!(a_train.to_csv(), c_train.to_csv());
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let table = synthetic(50, 5);
        assert!(stratified_split(&table, 0.0, 1).is_err());
        assert!(stratified_split(&table, 1.0, 1).is_err());
        // Too small for a fifth of either class to exist.
        let tiny = synthetic(2, 5);
        assert!(stratified_split(&tiny, 0.2, 1).is_err());
    }

    #[test]
    fn pattern_space_counts_combinations() {
        let table = synthetic(10, 1);
        // Race has four categories; five numeric attributes at four bins.
        assert_eq!(pattern_space(&table, 4), 4 * 4u64.pow(5));
        assert_eq!(pattern_space(&table, 2), 4 * 2u64.pow(5));
    }

    #[test]
    fn compare_reports_are_reproducible_and_ordered() {
        let table = synthetic(600, 11);
        let mut config = GaConfig::<f64> {
            population_size: 8,
            generations: 6,
            metric: FitnessMetric::PatternRatio,
            seed: 11,
            ..GaConfig::default()
        };
        let first = run_compare(&table, 3, &config, 0.2).unwrap();
        let again = run_compare(&table, 3, &config, 0.2).unwrap();
        assert_eq!(first.report.to_text(), again.report.to_text());
        assert_eq!(
            first.optimized_rules.to_tsv(),
            again.optimized_rules.to_tsv()
        );
        assert_eq!(
            first.evolution.history.to_csv(),
            again.evolution.history.to_csv()
        );

        config.parallel = !config.parallel;
        let flipped = run_compare(&table, 3, &config, 0.2).unwrap();
        assert_eq!(first.report.to_text(), flipped.report.to_text());

        assert_eq!(
            first.report.train_records + first.report.test_records,
            first.report.records
        );
        let text = first.report.to_text();
        for key in [
            "records=600",
            "bins=3",
            "metric=pattern",
            "pattern-space=",
            "baseline-fitness=",
            "optimized-fitness=",
            "baseline-pattern-ratio=",
            "optimized-test-accuracy=",
            "fitness-gain=",
        ] {
            assert!(text.contains(key), "report is missing '{key}':\n{text}");
        }
        assert!(first.report.optimized.fitness >= first.report.baseline.fitness);
    }

    #[test]
    fn compare_rejects_tables_with_missing_values() {
        let schema = survey_schema::<f64>();
        let rows = vec![vec![
            Value::Code(1),
            Value::Missing,
            Value::Real(5.0),
            Value::Int(1),
            Value::Int(0),
            Value::Real(30.0),
            Value::Code(0),
        ]];
        let table = InformationTable::from_rows(schema, rows).unwrap();
        let config = GaConfig::<f64>::default();
        assert!(matches!(
            run_compare(&table, 4, &config, 0.2),
            Err(Error::Parameter(_))
        ));
    }
}
