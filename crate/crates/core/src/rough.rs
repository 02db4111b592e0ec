//! Rough set mathematics: indiscernibility partitioning, lower/upper
//! approximations, rough membership, approximation accuracy, and the
//! pattern-level consistency ratio.
//!
//! Everything here is integer and set arithmetic over discretized values;
//! only the final ratios are scalar-typed.

use std::collections::{BTreeSet, HashMap};

use crate::discretize::DiscretizedTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite universe of record ids, each carrying a tuple of condition
/// attribute values (bin indices or categorical codes) and a binary decision.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationSystem {
    ids: Vec<usize>,
    attribute_names: Vec<String>,
    /// Row-major condition values, stride = attribute count.
    values: Vec<u32>,
    decisions: Vec<u8>,
}

impl InformationSystem {
    /// Builds a system directly from raw condition patterns and decisions.
    /// The value map must be total: every row carries every attribute.
    pub fn new(
        ids: Vec<usize>,
        attribute_names: Vec<String>,
        rows: Vec<Vec<u32>>,
        decisions: Vec<u8>,
    ) -> Result<Self> {
        if rows.len() != ids.len() || decisions.len() != ids.len() {
            return Err(Error::Parameter(
                "ids, rows and decisions must have equal lengths".into(),
            ));
        }
        if decisions.iter().any(|&d| d > 1) {
            return Err(Error::Parameter("decisions must be 0 or 1".into()));
        }
        let width = attribute_names.len();
        let mut values = Vec::with_capacity(width * rows.len());
        for row in &rows {
            if row.len() != width {
                return Err(Error::Parameter(format!(
                    "row has {} values, expected {}",
                    row.len(),
                    width
                )));
            }
            values.extend_from_slice(row);
        }
        let mut seen = std::collections::HashSet::new();
        if !ids.iter().all(|id| seen.insert(*id)) {
            return Err(Error::Parameter("record ids must be unique".into()));
        }
        Ok(Self {
            ids,
            attribute_names,
            values,
            decisions,
        })
    }

    pub fn from_discretized<F: Scalar>(table: &DiscretizedTable<F>) -> Self {
        let schema = table.schema();
        let names = schema
            .condition_indices()
            .into_iter()
            .map(|i| schema.attributes()[i].name.clone())
            .collect();
        let mut rows = Vec::with_capacity(table.len());
        let mut decisions = Vec::with_capacity(table.len());
        for i in 0..table.len() {
            rows.push(table.condition_row(i));
            decisions.push(table.decision(i));
        }
        Self::new(table.ids().to_vec(), names, rows, decisions)
            .expect("discretized table is well-formed")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute_count(&self) -> usize {
        self.attribute_names.len()
    }

    /// The universe as an id set.
    pub fn universe(&self) -> BTreeSet<usize> {
        self.ids.iter().copied().collect()
    }

    fn row(&self, i: usize) -> &[u32] {
        let w = self.attribute_names.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn decision_of(&self, position: usize) -> u8 {
        self.decisions[position]
    }

    /// Ids whose decision equals `d`.
    pub fn decision_class(&self, d: u8) -> BTreeSet<usize> {
        self.ids
            .iter()
            .zip(&self.decisions)
            .filter(|(_, &dec)| dec == d)
            .map(|(&id, _)| id)
            .collect()
    }

    /// Groups the universe into equivalence classes of the indiscernibility
    /// relation over attribute subset `subset` (indices into the condition
    /// attribute list): two records share a class iff their values agree on
    /// every attribute in the subset. Classes are ordered lexicographically
    /// by their shared pattern.
    pub fn partition(&self, subset: &[usize]) -> Result<EquivalenceClassPartition> {
        if subset.is_empty() {
            return Err(Error::Parameter(
                "attribute subset must be non-empty".into(),
            ));
        }
        let width = self.attribute_names.len();
        if let Some(&bad) = subset.iter().find(|&&a| a >= width) {
            return Err(Error::Parameter(format!(
                "attribute index {bad} out of range (have {width})"
            )));
        }
        let mut groups: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
        for (pos, &id) in self.ids.iter().enumerate() {
            let row = self.row(pos);
            let pattern: Vec<u32> = subset.iter().map(|&a| row[a]).collect();
            groups.entry(pattern).or_default().push(id);
        }
        let mut classes: Vec<EquivalenceClass> = groups
            .into_iter()
            .map(|(pattern, mut members)| {
                members.sort_unstable();
                EquivalenceClass { pattern, members }
            })
            .collect();
        classes.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        let mut class_of = HashMap::with_capacity(self.ids.len());
        for (ci, class) in classes.iter().enumerate() {
            for &id in &class.members {
                class_of.insert(id, ci);
            }
        }
        Ok(EquivalenceClassPartition {
            subset: subset.to_vec(),
            universe: self.universe(),
            classes,
            class_of,
        })
    }

    /// Partition over the full condition attribute set.
    pub fn full_partition(&self) -> EquivalenceClassPartition {
        self.partition(&(0..self.attribute_count()).collect::<Vec<_>>())
            .expect("full attribute set is non-empty")
    }

    /// Counts distinct condition patterns and how many of them are pure
    /// (all records of the pattern share one decision).
    pub fn pattern_consistency(&self) -> Result<PatternStats> {
        if self.is_empty() {
            return Err(Error::Parameter("system is empty".into()));
        }
        let mut groups: HashMap<&[u32], (u32, u32)> = HashMap::new();
        for pos in 0..self.len() {
            let counts = groups.entry(self.row(pos)).or_insert((0, 0));
            if self.decisions[pos] == 1 {
                counts.1 += 1;
            } else {
                counts.0 += 1;
            }
        }
        let total = groups.len();
        let pure = groups
            .values()
            .filter(|(neg, pos)| *neg == 0 || *pos == 0)
            .count();
        Ok(PatternStats { pure, total })
    }

    /// Lower/upper approximation sizes of both decision classes under the
    /// full partition, computed in one grouping pass. Equivalent to building
    /// the partition and approximating each decision class, but cheap enough
    /// for the GA fitness loop.
    pub fn approximation_counts(&self) -> ApproximationCounts {
        let mut groups: HashMap<&[u32], (u32, u32)> = HashMap::new();
        for pos in 0..self.len() {
            let counts = groups.entry(self.row(pos)).or_insert((0, 0));
            if self.decisions[pos] == 1 {
                counts.1 += 1;
            } else {
                counts.0 += 1;
            }
        }
        let mut counts = ApproximationCounts::default();
        for (neg, pos) in groups.values() {
            let size = (neg + pos) as usize;
            if *pos > 0 {
                counts.upper_positive += size;
                if *neg == 0 {
                    counts.lower_positive += size;
                }
            }
            if *neg > 0 {
                counts.upper_negative += size;
                if *pos == 0 {
                    counts.lower_negative += size;
                }
            }
        }
        counts
    }
}

/// `|lower|` and `|upper|` for both decision classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApproximationCounts {
    pub lower_positive: usize,
    pub upper_positive: usize,
    pub lower_negative: usize,
    pub upper_negative: usize,
}

impl ApproximationCounts {
    /// Approximation accuracy `|lower| / |upper|` for decision `d`;
    /// `None` when the upper approximation is empty.
    pub fn alpha<F: Scalar>(&self, d: u8) -> Option<F> {
        let (lower, upper) = match d {
            1 => (self.lower_positive, self.upper_positive),
            _ => (self.lower_negative, self.upper_negative),
        };
        if upper == 0 {
            None
        } else {
            Some(F::from_count(lower) / F::from_count(upper))
        }
    }
}

/// One equivalence class: the shared value pattern and the sorted member ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub pattern: Vec<u32>,
    pub members: Vec<usize>,
}

/// Disjoint equivalence classes covering the universe, for a chosen
/// attribute subset.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClassPartition {
    subset: Vec<usize>,
    universe: BTreeSet<usize>,
    classes: Vec<EquivalenceClass>,
    class_of: HashMap<usize, usize>,
}

impl EquivalenceClassPartition {
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn classes(&self) -> &[EquivalenceClass] {
        &self.classes
    }

    pub fn universe(&self) -> &BTreeSet<usize> {
        &self.universe
    }

    /// The class containing record `id`.
    pub fn class_of(&self, id: usize) -> Option<&EquivalenceClass> {
        self.class_of.get(&id).map(|&ci| &self.classes[ci])
    }

    fn check_subset(&self, target: &BTreeSet<usize>) -> Result<()> {
        if !target.is_subset(&self.universe) {
            return Err(Error::Parameter(
                "target set is not a subset of the universe".into(),
            ));
        }
        Ok(())
    }

    /// Union of the classes entirely contained in `target`: the records
    /// that certainly belong to it.
    pub fn lower_approx(&self, target: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
        self.check_subset(target)?;
        let mut out = BTreeSet::new();
        for class in &self.classes {
            if class.members.iter().all(|id| target.contains(id)) {
                out.extend(class.members.iter().copied());
            }
        }
        Ok(out)
    }

    /// Union of the classes intersecting `target`: the records that possibly
    /// belong to it.
    pub fn upper_approx(&self, target: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
        self.check_subset(target)?;
        let mut out = BTreeSet::new();
        for class in &self.classes {
            if class.members.iter().any(|id| target.contains(id)) {
                out.extend(class.members.iter().copied());
            }
        }
        Ok(out)
    }

    /// Both approximations of `target` at once.
    pub fn approximate(&self, target: &BTreeSet<usize>) -> Result<ApproximationPair> {
        Ok(ApproximationPair {
            target: target.clone(),
            lower: self.lower_approx(target)?,
            upper: self.upper_approx(target)?,
        })
    }

    /// Rough membership of record `x` in `target`: the fraction of `x`'s
    /// equivalence class that lies inside `target`.
    pub fn membership<F: Scalar>(&self, x: usize, target: &BTreeSet<usize>) -> Result<F> {
        self.check_subset(target)?;
        let class = self
            .class_of(x)
            .ok_or_else(|| Error::Parameter(format!("record {x} is not in the universe")))?;
        let inside = class
            .members
            .iter()
            .filter(|id| target.contains(id))
            .count();
        Ok(F::from_count(inside) / F::from_count(class.members.len()))
    }
}

/// Lower and upper approximations of a target record set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximationPair {
    pub target: BTreeSet<usize>,
    pub lower: BTreeSet<usize>,
    pub upper: BTreeSet<usize>,
}

impl ApproximationPair {
    /// Records whose membership cannot be decided.
    pub fn boundary(&self) -> BTreeSet<usize> {
        self.upper.difference(&self.lower).copied().collect()
    }

    /// Approximation accuracy `|lower| / |upper|`; `None` (not applicable)
    /// when the upper approximation is empty.
    pub fn accuracy<F: Scalar>(&self) -> Option<F> {
        if self.upper.is_empty() {
            None
        } else {
            Some(F::from_count(self.lower.len()) / F::from_count(self.upper.len()))
        }
    }
}

/// Distinct condition patterns and how many are decision-pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternStats {
    pub pure: usize,
    pub total: usize,
}

impl PatternStats {
    pub fn mixed(&self) -> usize {
        self.total - self.pure
    }

    pub fn ratio<F: Scalar>(&self) -> F {
        if self.total == 0 {
            F::zero()
        } else {
            F::from_count(self.pure) / F::from_count(self.total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_attr_system(values: &[u32], decisions: &[u8]) -> InformationSystem {
        InformationSystem::new(
            (0..values.len()).collect(),
            vec!["a".into()],
            values.iter().map(|&v| vec![v]).collect(),
            decisions.to_vec(),
        )
        .unwrap()
    }

    fn set(ids: &[usize]) -> BTreeSet<usize> {
        ids.iter().copied().collect()
    }

    /// Worked five-record example: values (a,a,b,b,b) as (0,0,1,1,1),
    /// target X = {0,1,3}.
    fn worked() -> (InformationSystem, BTreeSet<usize>) {
        let sys = single_attr_system(&[0, 0, 1, 1, 1], &[1, 1, 0, 1, 0]);
        (sys, set(&[0, 1, 3]))
    }

    #[test]
    fn partition_groups_by_value() {
        let (sys, _) = worked();
        let p = sys.partition(&[0]).unwrap();
        let members: Vec<&[usize]> = p.classes().iter().map(|c| c.members.as_slice()).collect();
        assert_eq!(members, vec![&[0usize, 1][..], &[2, 3, 4][..]]);
    }

    #[test]
    fn partition_of_identical_records_is_one_class() {
        let sys = single_attr_system(&[7, 7, 7], &[0, 1, 0]);
        let p = sys.partition(&[0]).unwrap();
        assert_eq!(p.classes().len(), 1);
        assert_eq!(p.classes()[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn partition_rejects_empty_subset() {
        let (sys, _) = worked();
        assert!(matches!(sys.partition(&[]), Err(Error::Parameter(_))));
    }

    #[test]
    fn lower_approx_worked_example() {
        let (sys, x) = worked();
        let p = sys.partition(&[0]).unwrap();
        assert_eq!(p.lower_approx(&x).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn lower_approx_full_and_empty_targets() {
        let (sys, _) = worked();
        let p = sys.partition(&[0]).unwrap();
        let u = sys.universe();
        assert_eq!(p.lower_approx(&u).unwrap(), u);
        assert_eq!(p.lower_approx(&BTreeSet::new()).unwrap(), BTreeSet::new());
    }

    #[test]
    fn upper_approx_worked_example() {
        let (sys, x) = worked();
        let p = sys.partition(&[0]).unwrap();
        assert_eq!(p.upper_approx(&x).unwrap(), set(&[0, 1, 2, 3, 4]));
        assert_eq!(p.upper_approx(&BTreeSet::new()).unwrap(), BTreeSet::new());
    }

    #[test]
    fn approximations_reject_foreign_targets() {
        let (sys, _) = worked();
        let p = sys.partition(&[0]).unwrap();
        let foreign = set(&[99]);
        assert!(matches!(p.lower_approx(&foreign), Err(Error::Parameter(_))));
        assert!(matches!(p.upper_approx(&foreign), Err(Error::Parameter(_))));
    }

    #[test]
    fn consistent_system_is_crisp() {
        let sys = single_attr_system(&[0, 0, 1, 1, 2], &[1, 1, 0, 0, 1]);
        let p = sys.partition(&[0]).unwrap();
        for d in [0u8, 1] {
            let x = sys.decision_class(d);
            let pair = p.approximate(&x).unwrap();
            assert_eq!(pair.lower, x);
            assert_eq!(pair.upper, x);
            assert_eq!(pair.accuracy::<f64>(), Some(1.0));
        }
    }

    #[test]
    fn membership_worked_example() {
        let (sys, x) = worked();
        let p = sys.partition(&[0]).unwrap();
        let m: f64 = p.membership(2, &x).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-12);
        // Records of a class fully inside X have membership 1.
        assert_eq!(p.membership::<f64>(0, &x).unwrap(), 1.0);
        // A class disjoint from X gives 0.
        assert_eq!(p.membership::<f64>(2, &set(&[0, 1])).unwrap(), 0.0);
        assert!(matches!(
            p.membership::<f64>(99, &x),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn accuracy_worked_example() {
        let (sys, x) = worked();
        let p = sys.partition(&[0]).unwrap();
        let pair = p.approximate(&x).unwrap();
        assert_eq!(pair.accuracy::<f64>(), Some(0.4));
        assert_eq!(pair.boundary(), set(&[2, 3, 4]));
    }

    #[test]
    fn accuracy_empty_upper_is_not_applicable() {
        let (sys, _) = worked();
        let p = sys.partition(&[0]).unwrap();
        let pair = p.approximate(&BTreeSet::new()).unwrap();
        assert_eq!(pair.accuracy::<f64>(), None);
    }

    #[test]
    fn accuracy_zero_when_lower_empty() {
        // Every class mixed: lower empty, upper = U.
        let sys = single_attr_system(&[0, 0, 1, 1], &[0, 1, 0, 1]);
        let p = sys.partition(&[0]).unwrap();
        let pair = p.approximate(&sys.decision_class(1)).unwrap();
        assert_eq!(pair.accuracy::<f64>(), Some(0.0));
    }

    #[test]
    fn pattern_consistency_consistent_toy() {
        let sys = single_attr_system(
            &[0, 0, 1, 1, 2, 2, 3, 3, 4, 4],
            &[1, 1, 0, 0, 1, 1, 0, 0, 1, 1],
        );
        let stats = sys.pattern_consistency().unwrap();
        assert_eq!(stats.pure, 5);
        assert_eq!(stats.total, 5);
        assert_eq!(stats.ratio::<f64>(), 1.0);
    }

    #[test]
    fn pattern_consistency_counts_mixed_patterns() {
        let sys = single_attr_system(&[0, 0, 1, 2], &[1, 0, 1, 0]);
        let stats = sys.pattern_consistency().unwrap();
        assert_eq!(stats.pure, 2);
        assert_eq!(stats.mixed(), 1);
        assert_eq!(stats.total, 3);
    }

    #[test]
    fn approximation_counts_match_set_route() {
        let sys = single_attr_system(&[0, 0, 1, 1, 1, 2], &[1, 1, 0, 1, 0, 0]);
        let counts = sys.approximation_counts();
        let p = sys.full_partition();
        for d in [0u8, 1] {
            let pair = p.approximate(&sys.decision_class(d)).unwrap();
            let (lower, upper) = if d == 1 {
                (counts.lower_positive, counts.upper_positive)
            } else {
                (counts.lower_negative, counts.upper_negative)
            };
            assert_eq!(lower, pair.lower.len());
            assert_eq!(upper, pair.upper.len());
        }
    }

    #[test]
    fn binary_duality_holds() {
        let sys = single_attr_system(&[0, 0, 1, 1, 1, 2, 2], &[1, 0, 0, 0, 1, 1, 1]);
        let p = sys.partition(&[0]).unwrap();
        let u = sys.universe();
        let x0 = sys.decision_class(0);
        let x1 = sys.decision_class(1);
        let lower0 = p.lower_approx(&x0).unwrap();
        let upper1 = p.upper_approx(&x1).unwrap();
        let complement: BTreeSet<usize> = u.difference(&upper1).copied().collect();
        assert_eq!(lower0, complement);
        let pair0 = p.approximate(&x0).unwrap();
        let pair1 = p.approximate(&x1).unwrap();
        assert_eq!(pair0.boundary(), pair1.boundary());
    }
}
