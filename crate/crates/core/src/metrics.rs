//! Plan-quality metrics: edit distance, wPED, DepCov, ReplanQ, success rate,
//! QA accuracy and judge-vote aggregation. Every function here is pure.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hub::catalog::{seed_catalog, Category};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("failure index {index} out of range for a plan of {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {predicted} predictions for {gold} gold answers")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("rule {0}: before and after sets overlap")]
    OverlappingRule(String),
}

// ── edit distance ──────────────────────────────────────────

/// Per-operation costs. All ones gives plain Levenshtein distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditWeights {
    pub insertion: f64,
    pub deletion: f64,
    pub substitution: f64,
}

impl Default for EditWeights {
    fn default() -> Self {
        Self {
            insertion: 1.0,
            deletion: 1.0,
            substitution: 1.0,
        }
    }
}

/// Minimum number of single-item insertions, deletions or substitutions
/// turning `a` into `b`.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance under custom operation costs. Deleting from `a` costs
/// `deletion`, inserting from `b` costs `insertion`.
pub fn weighted_levenshtein<T: PartialEq>(a: &[T], b: &[T], w: &EditWeights) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * w.insertion).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * w.deletion;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + if x == y { 0.0 } else { w.substitution };
            cur[j + 1] = sub.min(prev[j + 1] + w.deletion).min(cur[j] + w.insertion);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn normalized_similarity<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

// ── wPED / ReplanQ ─────────────────────────────────────────

/// `1 - L(pred, ref) / max(|pred|, |ref|)`; two empty sequences score 1.
pub fn wped<S: AsRef<str>>(pred: &[S], reference: &[S]) -> f64 {
    let p: Vec<&str> = pred.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    normalized_similarity(&p, &r)
}

/// wPED under custom edit costs, normalized by the longer length times the
/// largest cost. Unit costs reproduce [`wped`].
pub fn wped_weighted<S: AsRef<str>>(pred: &[S], reference: &[S], w: &EditWeights) -> f64 {
    let p: Vec<&str> = pred.iter().map(AsRef::as_ref).collect();
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let longest = p.len().max(r.len());
    if longest == 0 {
        return 1.0;
    }
    let scale = w.insertion.max(w.deletion).max(w.substitution);
    if scale <= 0.0 {
        return 1.0;
    }
    (1.0 - weighted_levenshtein(&p, &r, w) / (longest as f64 * scale)).clamp(0.0, 1.0)
}

/// Similarity of the suffixes of `orig` and `replanned` from failure index
/// `i` (zero-based). Both suffixes empty scores 1.
pub fn replanq<S: AsRef<str>>(orig: &[S], replanned: &[S], i: usize) -> Result<f64, MetricError> {
    if i > orig.len() {
        return Err(MetricError::IndexOutOfRange {
            index: i,
            len: orig.len(),
        });
    }
    let a: Vec<&str> = orig[i..].iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = replanned.get(i..).unwrap_or(&[]).iter().map(AsRef::as_ref).collect();
    Ok(normalized_similarity(&a, &b))
}

// ── DepCov ─────────────────────────────────────────────────

/// Matches a tool by exact name or by its catalog category.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSet {
    #[serde(default)]
    pub names: BTreeSet<String>,
    #[serde(default)]
    pub categories: BTreeSet<Category>,
}

impl ToolSet {
    pub fn new(names: &[&str], categories: &[Category]) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            categories: categories.iter().copied().collect(),
        }
    }

    pub fn matches(&self, tool: &str) -> bool {
        self.names.contains(tool) || category_of(tool).is_some_and(|c| self.categories.contains(&c))
    }
}

fn category_of(tool: &str) -> Option<Category> {
    static INDEX: OnceLock<BTreeMap<String, Category>> = OnceLock::new();
    INDEX
        .get_or_init(|| seed_catalog().into_iter().map(|d| (d.name, d.category)).collect())
        .get(tool)
        .copied()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyRule {
    pub rule_id: String,
    pub description: String,
    pub before: ToolSet,
    pub after: ToolSet,
    #[serde(default = "enabled")]
    pub enabled: bool,
}

fn enabled() -> bool {
    true
}

impl DependencyRule {
    /// Fails when some tool of the seeded catalog falls in both sets.
    pub fn check(&self) -> Result<(), MetricError> {
        let overlap_names = self.before.names.iter().any(|n| self.after.matches(n))
            || self.after.names.iter().any(|n| self.before.matches(n));
        let overlap_categories = self.before.categories.intersection(&self.after.categories).next().is_some();
        if overlap_names || overlap_categories {
            return Err(MetricError::OverlappingRule(self.rule_id.clone()));
        }
        Ok(())
    }
}

/// Content must be generated or ingested before it is edited.
pub fn rule_r1() -> DependencyRule {
    DependencyRule {
        rule_id: "R1".into(),
        description: "generation or ingestion precedes editing".into(),
        before: ToolSet::new(&["materials_search"], &[Category::VideoGeneration, Category::Image]),
        after: ToolSet::new(&[], &[Category::VideoEditing]),
        enabled: true,
    }
}

/// Understanding precedes editing. Off by default.
pub fn rule_r2() -> DependencyRule {
    DependencyRule {
        rule_id: "R2".into(),
        description: "understanding precedes editing of a user video".into(),
        before: ToolSet::new(&[], &[Category::VideoUnderstanding]),
        after: ToolSet::new(&[], &[Category::VideoEditing]),
        enabled: false,
    }
}

pub fn default_rules() -> Vec<DependencyRule> {
    vec![rule_r1(), rule_r2()]
}

/// One induced dependency: step `after` (1-based) needs a prior step matching
/// the rule's before set; `before` is the nearest such step, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyPair {
    pub rule_id: String,
    pub before: Option<usize>,
    pub after: usize,
}

impl DependencyPair {
    pub fn satisfied(&self) -> bool {
        self.before.is_some()
    }
}

pub fn dependency_pairs<S: AsRef<str>>(plan: &[S], rules: &[DependencyRule]) -> Vec<DependencyPair> {
    let mut pairs = Vec::new();
    for rule in rules.iter().filter(|r| r.enabled) {
        let mut last_before = None;
        for (i, tool) in plan.iter().enumerate() {
            let tool = tool.as_ref();
            if rule.after.matches(tool) {
                pairs.push(DependencyPair {
                    rule_id: rule.rule_id.clone(),
                    before: last_before,
                    after: i + 1,
                });
            } else if rule.before.matches(tool) {
                last_before = Some(i + 1);
            }
        }
    }
    pairs
}

/// Fraction of induced dependencies that are satisfied; 1 when none are induced.
pub fn depcov<S: AsRef<str>>(plan: &[S], rules: &[DependencyRule]) -> f64 {
    let pairs = dependency_pairs(plan, rules);
    if pairs.is_empty() {
        return 1.0;
    }
    pairs.iter().filter(|p| p.satisfied()).count() as f64 / pairs.len() as f64
}

// ── outcome aggregates ─────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub wped: Option<f64>,
    pub depcov: Option<f64>,
    pub replanq: Option<f64>,
    pub success: bool,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl MetricReport {
    /// Scores a predicted plan against a reference. `replans` holds
    /// (original, revised, zero-based failure index) per re-planning event;
    /// ReplanQ is their mean.
    pub fn score<S: AsRef<str>>(
        pred: &[S],
        reference: &[S],
        rules: &[DependencyRule],
        replans: &[(Vec<String>, Vec<String>, usize)],
    ) -> Self {
        let w = wped(pred, reference);
        let mut notes = Vec::new();
        let mut values = Vec::new();
        for (orig, revised, i) in replans {
            match replanq(orig, revised, *i) {
                Ok(v) => values.push(v),
                Err(e) => notes.push(e.to_string()),
            }
        }
        let replanq = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        Self {
            wped: Some(w),
            depcov: Some(depcov(pred, rules)),
            replanq,
            success: w > 0.0,
            notes,
        }
    }

    pub fn in_range(&self) -> bool {
        [self.wped, self.depcov, self.replanq]
            .into_iter()
            .flatten()
            .all(|v| (0.0..=1.0).contains(&v))
    }
}

/// Fraction of reports whose wPED is positive.
pub fn success_rate(reports: &[MetricReport]) -> Result<f64, MetricError> {
    if reports.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let ok = reports.iter().filter(|r| r.wped.is_some_and(|w| w > 0.0)).count();
    Ok(ok as f64 / reports.len() as f64)
}

/// Exact-match accuracy. An empty pair of lists scores 1.
pub fn qa_accuracy<S: AsRef<str>>(predicted: &[S], gold: &[S]) -> Result<f64, MetricError> {
    if predicted.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            predicted: predicted.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Ok(1.0);
    }
    let hits = predicted.iter().zip(gold).filter(|(p, g)| p.as_ref() == g.as_ref()).count();
    Ok(hits as f64 / gold.len() as f64)
}

// ── judge votes ────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    A,
    B,
    #[serde(rename = "tie")]
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub judge_id: String,
    pub preference: Preference,
}

impl Vote {
    pub fn new(judge_id: impl Into<String>, preference: Preference) -> Self {
        Self {
            judge_id: judge_id.into(),
            preference,
        }
    }
}

/// Majority over non-tie votes; an even split (including no decisive votes)
/// discards the instance.
pub fn aggregate_judgments(votes: &[Vote]) -> Option<Preference> {
    let a = votes.iter().filter(|v| v.preference == Preference::A).count();
    let b = votes.iter().filter(|v| v.preference == Preference::B).count();
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => Some(Preference::A),
        std::cmp::Ordering::Less => Some(Preference::B),
        std::cmp::Ordering::Equal => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Textbook recursive definition, no memoization.
    fn oracle(a: &[u8], b: &[u8]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                if x == y {
                    oracle(ra, rb)
                } else {
                    1 + oracle(ra, b).min(oracle(a, rb)).min(oracle(ra, rb))
                }
            }
        }
    }

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein::<char>(&[], &chars("abc")), 3);
        assert_eq!(levenshtein(&chars("abc"), &chars("abc")), 0);
        assert_eq!(levenshtein(&chars("kitten"), &chars("sitting")), 3);
        assert_eq!(oracle(b"kitten", b"sitting"), 3);
    }

    #[test]
    fn weighted_with_unit_costs_matches_plain() {
        let w = EditWeights::default();
        for (a, b) in [("kitten", "sitting"), ("", "ab"), ("flaw", "lawn")] {
            assert_eq!(weighted_levenshtein(&chars(a), &chars(b), &w), levenshtein(&chars(a), &chars(b)) as f64);
        }
        let pricey = EditWeights { substitution: 3.0, ..w };
        assert_eq!(weighted_levenshtein(&chars("a"), &chars("b"), &pricey), 2.0);
    }

    #[test]
    fn wped_examples() {
        let x = ["text2video_gen", "repainting", "merge_video"];
        assert_eq!(wped(&x, &x), 1.0);
        let y = ["text2video_gen", "recolor", "merge_video"];
        assert!((wped(&x, &y) - 2.0 / 3.0).abs() < 1e-9);
        let empty: [&str; 0] = [];
        assert_eq!(wped(&empty, &["a", "b", "c", "d"]), 0.0);
        assert_eq!(wped(&empty, &empty), 1.0);
        assert_eq!(wped(&["A"], &["a"]), 0.0);
    }

    #[test]
    fn weighted_wped_defaults_to_literal() {
        let x = ["t2v", "repaint", "merge"];
        let y = ["t2v", "recolor", "merge"];
        assert_eq!(wped_weighted(&x, &y, &EditWeights::default()), wped(&x, &y));
    }

    #[test]
    fn depcov_examples() {
        let rules = default_rules();
        assert_eq!(depcov(&["text2video_gen", "repainting"], &rules), 1.0);
        assert_eq!(depcov(&["repainting"], &rules), 0.0);
        assert_eq!(depcov(&["text2video_gen", "video_extension"], &rules), 1.0);
        let pairs = dependency_pairs(&["text2image_generate", "text2video_gen", "recolor"], &rules);
        assert_eq!(
            pairs,
            vec![DependencyPair {
                rule_id: "R1".into(),
                before: Some(2),
                after: 3
            }]
        );
    }

    #[test]
    fn r2_counts_when_enabled() {
        let mut r2 = rule_r2();
        r2.enabled = true;
        let rules = vec![rule_r1(), r2];
        assert_eq!(depcov(&["text2video_gen", "recolor"], &rules), 0.5);
        assert_eq!(depcov(&["vision2text_gen", "text2video_gen", "recolor"], &rules), 1.0);
    }

    #[test]
    fn shipped_rules_are_disjoint() {
        for rule in default_rules() {
            rule.check().unwrap();
        }
        let bad = DependencyRule {
            before: ToolSet::new(&["recolor"], &[]),
            ..rule_r1()
        };
        assert_eq!(bad.check(), Err(MetricError::OverlappingRule("R1".into())));
    }

    #[test]
    fn replanq_examples() {
        assert_eq!(replanq(&["a", "b", "c"], &["a", "x", "c"], 1), Ok(0.5));
        assert_eq!(replanq(&["a", "b"], &["a", "b"], 2), Ok(1.0));
        assert_eq!(replanq(&["a", "b", "c"], &["a"], 1), Ok(0.0));
        assert_eq!(replanq(&["a", "b"], &["x", "y"], 0), Ok(0.0));
        assert_eq!(
            replanq(&["a"], &["a"], 2),
            Err(MetricError::IndexOutOfRange { index: 2, len: 1 })
        );
    }

    #[test]
    fn success_rate_counts_positive_wped() {
        let r = |w: f64| MetricReport {
            wped: Some(w),
            depcov: None,
            replanq: None,
            success: w > 0.0,
            notes: vec![],
        };
        assert_eq!(success_rate(&[r(0.5), r(0.0), r(0.2), r(0.0)]), Ok(0.5));
        assert_eq!(success_rate(&[r(0.0), r(0.0)]), Ok(0.0));
        assert_eq!(success_rate(&[]), Err(MetricError::EmptyInput));
    }

    #[test]
    fn qa_examples() {
        assert_eq!(qa_accuracy(&["a", "b"], &["a", "b"]), Ok(1.0));
        assert_eq!(qa_accuracy(&["a", "b"], &["c", "d"]), Ok(0.0));
        assert_eq!(
            qa_accuracy(&["a"], &["a", "b"]),
            Err(MetricError::LengthMismatch { predicted: 1, gold: 2 })
        );
    }

    #[test]
    fn judge_examples() {
        use Preference::*;
        let votes = |ps: &[Preference]| ps.iter().enumerate().map(|(i, p)| Vote::new(format!("j{i}"), *p)).collect::<Vec<_>>();
        assert_eq!(aggregate_judgments(&votes(&[A, A, B])), Some(A));
        assert_eq!(aggregate_judgments(&votes(&[A, B])), None);
        assert_eq!(aggregate_judgments(&votes(&[Tie, Tie, A])), Some(A));
        assert_eq!(aggregate_judgments(&votes(&[Tie])), None);
    }

    #[test]
    fn report_scores_replans() {
        let pred = ["a", "b", "c"];
        let replans = vec![(vec!["a".into(), "b".into(), "c".into()], vec!["a".into(), "x".into(), "c".into()], 1)];
        let report = MetricReport::score(&pred, &pred, &default_rules(), &replans);
        assert_eq!(report.wped, Some(1.0));
        assert_eq!(report.replanq, Some(0.5));
        assert!(report.success && report.in_range());
    }

    fn tools() -> impl Strategy<Value = Vec<String>> {
        let names = ["text2video_gen", "repainting", "recolor", "merge_video", "text2image_generate", "vision2text_gen"];
        prop::collection::vec(prop::sample::select(names.to_vec()), 0..8)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn levenshtein_matches_oracle(a in prop::collection::vec(0u8..3, 0..7), b in prop::collection::vec(0u8..3, 0..7)) {
            prop_assert_eq!(levenshtein(&a, &b), oracle(&a, &b));
        }

        #[test]
        fn wped_is_bounded_symmetric_reflexive(a in tools(), b in tools()) {
            let v = wped(&a, &b);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, wped(&b, &a));
            prop_assert_eq!(wped(&a, &a), 1.0);
        }

        #[test]
        fn levenshtein_triangle(a in tools(), b in tools(), c in tools()) {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn depcov_ignores_unmatched_steps(plan in tools(), extra in prop::collection::vec(prop::sample::select(vec!["merge_video", "add_subtitle", "speech_gen"]), 0..5)) {
            let rules = default_rules();
            let mut longer = plan.clone();
            longer.extend(extra.iter().map(|s| s.to_string()));
            prop_assert_eq!(depcov(&plan, &rules), depcov(&longer, &rules));
        }

        #[test]
        fn replanq_identity(plan in tools(), k in 0usize..8) {
            let i = k.min(plan.len());
            prop_assert_eq!(replanq(&plan, &plan, i), Ok(1.0));
        }

        #[test]
        fn judge_winner_has_strict_majority(ps in prop::collection::vec(prop::sample::select(vec![Preference::A, Preference::B, Preference::Tie]), 1..12)) {
            let votes: Vec<Vote> = ps.iter().map(|p| Vote::new("j", *p)).collect();
            let a = ps.iter().filter(|p| **p == Preference::A).count();
            let b = ps.iter().filter(|p| **p == Preference::B).count();
            match aggregate_judgments(&votes) {
                Some(Preference::A) => prop_assert!(a > b),
                Some(Preference::B) => prop_assert!(b > a),
                Some(Preference::Tie) => prop_assert!(false),
                None => prop_assert_eq!(a, b),
            }
        }
    }
}
