//! Shared data model: comments, goal hierarchies, need attributions, datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::backend::CompletionRequest;
use crate::pipeline::{PipelineConfig, StepOutcome, Strategy};

/// Number of fundamental psychological needs.
pub const FPN_COUNT: usize = 13;

/// The 13 fundamental psychological needs, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FpnName {
    Autonomy,
    Beauty,
    Comfort,
    Community,
    Competence,
    Fitness,
    Impact,
    Morality,
    Purpose,
    Recognition,
    Relatedness,
    Security,
    Stimulation,
}

impl FpnName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FpnName::Autonomy => "autonomy",
            FpnName::Beauty => "beauty",
            FpnName::Comfort => "comfort",
            FpnName::Community => "community",
            FpnName::Competence => "competence",
            FpnName::Fitness => "fitness",
            FpnName::Impact => "impact",
            FpnName::Morality => "morality",
            FpnName::Purpose => "purpose",
            FpnName::Recognition => "recognition",
            FpnName::Relatedness => "relatedness",
            FpnName::Security => "security",
            FpnName::Stimulation => "stimulation",
        }
    }

    /// Case-insensitive lookup; `None` for names outside the typology.
    pub fn parse(name: &str) -> Option<FpnName> {
        let lower = name.trim().to_lowercase();
        canonical_fpn_order()
            .iter()
            .copied()
            .find(|f| f.as_str() == lower)
    }

    /// Position in the canonical order.
    pub fn index(&self) -> usize {
        canonical_fpn_order()
            .iter()
            .position(|f| f == self)
            .expect("member of canonical order")
    }
}

impl fmt::Display for FpnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 13 need names in their canonical (listing) order. Vector positions in
/// the similarity metric are defined by this order; it never changes.
pub fn canonical_fpn_order() -> [FpnName; FPN_COUNT] {
    [
        FpnName::Autonomy,
        FpnName::Beauty,
        FpnName::Comfort,
        FpnName::Community,
        FpnName::Competence,
        FpnName::Fitness,
        FpnName::Impact,
        FpnName::Morality,
        FpnName::Purpose,
        FpnName::Recognition,
        FpnName::Relatedness,
        FpnName::Security,
        FpnName::Stimulation,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityCategory {
    HouseCleaning,
    Traveling,
    DigitalEntertainment,
    Other,
}

/// One product comment written by a user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserComment {
    pub id: String,
    pub activity_category: ActivityCategory,
    pub text: String,
}

/// Free-text goals at the three hierarchy levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSet {
    pub do_goals: String,
    pub motor_goals: String,
    pub be_goals: String,
}

impl GoalSet {
    /// All three levels non-empty after trimming.
    pub fn is_complete(&self) -> bool {
        !self.do_goals.trim().is_empty()
            && !self.motor_goals.trim().is_empty()
            && !self.be_goals.trim().is_empty()
    }

    pub fn levels(&self) -> [(GoalLevel, &str); 3] {
        [
            (GoalLevel::Do, self.do_goals.as_str()),
            (GoalLevel::Motor, self.motor_goals.as_str()),
            (GoalLevel::Be, self.be_goals.as_str()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalLevel {
    Do,
    Motor,
    Be,
}

impl GoalLevel {
    pub fn field_name(&self) -> &'static str {
        match self {
            GoalLevel::Do => "do_goals",
            GoalLevel::Motor => "motor_goals",
            GoalLevel::Be => "be_goals",
        }
    }
}

/// Likert scores as they appear in a dataset file. Deliberately permissive:
/// out-of-range or incomplete maps deserialize fine so that validation can
/// report the problem instead of the reader choking on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct FpnScores(pub BTreeMap<String, i64>);

impl FpnScores {
    pub fn from_attribution(attr: &FpnAttribution) -> FpnScores {
        FpnScores(
            attr.iter()
                .map(|(name, r)| (name.as_str().to_string(), i64::from(r)))
                .collect(),
        )
    }

    /// Problems that keep these scores from forming a valid attribution.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, value) in &self.0 {
            match FpnName::parse(name) {
                Some(fpn) => {
                    if !(1..=5).contains(value) {
                        out.push(format!("rating out of range [1,5] on {fpn}: {value}"));
                    }
                }
                None => out.push(format!("unknown FPN name `{name}`")),
            }
        }
        for fpn in canonical_fpn_order() {
            if !self.0.contains_key(fpn.as_str()) {
                out.push(format!("missing FPN: {fpn}"));
            }
        }
        out
    }

    /// Strict conversion; the first violation becomes the error.
    pub fn to_attribution(&self) -> Result<FpnAttribution, DomainError> {
        let mut ratings = [0u8; FPN_COUNT];
        for fpn in canonical_fpn_order() {
            let value = *self
                .0
                .get(fpn.as_str())
                .ok_or_else(|| DomainError::MissingNeed(fpn.as_str().to_string()))?;
            if !(1..=5).contains(&value) {
                return Err(DomainError::RatingOutOfRange {
                    need: fpn.as_str().to_string(),
                    value,
                });
            }
            ratings[fpn.index()] = value as u8;
        }
        if let Some((name, _)) = self.0.iter().find(|(name, _)| FpnName::parse(name).is_none()) {
            return Err(DomainError::UnknownNeed(name.clone()));
        }
        Ok(FpnAttribution { ratings })
    }
}

/// A validated need attribution: exactly 13 integer ratings in [1,5], stored
/// positionally in canonical order. Iteration and serialization always follow
/// that order regardless of how the source file ordered its keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpnAttribution {
    ratings: [u8; FPN_COUNT],
}

impl FpnAttribution {
    pub fn new(ratings: [u8; FPN_COUNT]) -> Result<Self, DomainError> {
        for (i, r) in ratings.iter().enumerate() {
            if !(1..=5).contains(r) {
                return Err(DomainError::RatingOutOfRange {
                    need: canonical_fpn_order()[i].as_str().to_string(),
                    value: i64::from(*r),
                });
            }
        }
        Ok(FpnAttribution { ratings })
    }

    /// Builds from (name, rating) pairs; every need exactly once, each rating
    /// in range.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DomainError>
    where
        I: IntoIterator<Item = (FpnName, i64)>,
    {
        let mut ratings = [0u8; FPN_COUNT];
        let mut seen = [false; FPN_COUNT];
        for (name, value) in pairs {
            let idx = name.index();
            if seen[idx] {
                return Err(DomainError::DuplicateNeed(name.as_str().to_string()));
            }
            if !(1..=5).contains(&value) {
                return Err(DomainError::RatingOutOfRange {
                    need: name.as_str().to_string(),
                    value,
                });
            }
            seen[idx] = true;
            ratings[idx] = value as u8;
        }
        if let Some(idx) = seen.iter().position(|s| !s) {
            return Err(DomainError::MissingNeed(
                canonical_fpn_order()[idx].as_str().to_string(),
            ));
        }
        Ok(FpnAttribution { ratings })
    }

    pub fn get(&self, name: FpnName) -> u8 {
        self.ratings[name.index()]
    }

    pub fn ratings(&self) -> &[u8; FPN_COUNT] {
        &self.ratings
    }

    /// (need, rating) pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (FpnName, u8)> + '_ {
        canonical_fpn_order()
            .into_iter()
            .map(move |name| (name, self.ratings[name.index()]))
    }
}

impl Serialize for FpnAttribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(FPN_COUNT))?;
        for (name, rating) in self.iter() {
            map.serialize_entry(name.as_str(), &rating)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FpnAttribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FpnVisitor;
        impl<'de> Visitor<'de> for FpnVisitor {
            type Value = FpnAttribution;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of the 13 need names to integer ratings in [1,5]")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut scores = BTreeMap::new();
                while let Some((key, value)) = access.next_entry::<String, i64>()? {
                    scores.insert(key, value);
                }
                FpnScores(scores)
                    .to_attribution()
                    .map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_map(FpnVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineSource {
    UserSelfReport,
}

/// A user's self-reported goals and need attribution for one comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub comment_id: String,
    pub goals: GoalSet,
    pub fpn: FpnScores,
    pub source: BaselineSource,
}

/// Who produced an inference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InferenceSource {
    Designer { designer_id: String },
    Llm { pipeline: Strategy, model_id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    #[default]
    Complete,
    Failed,
}

/// One completion request and everything the backend returned for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub step: String,
    pub request: CompletionRequest,
    pub responses: Vec<String>,
}

/// One pipeline run (or one designer inference) for one comment.
///
/// LLM records carry the full transcript and configuration snapshot; designer
/// records ingested through a dataset's `benchmark_inferences` list usually
/// carry only goals and fpn. Run records omit the timestamp so that reruns
/// with identical inputs produce identical payloads; wall-clock times live in
/// the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRecord {
    pub comment_id: String,
    pub source: InferenceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_snapshot: Option<PipelineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<GoalSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpn: Option<FpnScores>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepOutcome>,
    #[serde(default)]
    pub parse_status: ParseStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// A full dataset file: comments, self-report baselines, and optionally the
/// designer benchmark inferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub comments: Vec<UserComment>,
    pub baselines: Vec<BaselineRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub benchmark_inferences: Vec<InferenceRecord>,
}

impl Dataset {
    pub fn from_path(path: &Path) -> Result<Dataset, DomainError> {
        let bytes = std::fs::read(path).map_err(|source| DomainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_slice(&bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Dataset, DomainError> {
        serde_json::from_slice(bytes).map_err(|e| DomainError::Format {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn comment(&self, id: &str) -> Option<&UserComment> {
        self.comments.iter().find(|c| c.id == id)
    }

    pub fn baseline(&self, comment_id: &str) -> Option<&BaselineRecord> {
        self.baselines.iter().find(|b| b.comment_id == comment_id)
    }
}

/// One problem found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: String,
    pub problem: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.problem)
    }
}

/// Checks a deserialized dataset and returns every violation found; an empty
/// list means the dataset is valid. Pure: never mutates its input.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (i, comment) in dataset.comments.iter().enumerate() {
        let loc = format!("comments[{i}] (id `{}`)", comment.id);
        if comment.id.trim().is_empty() {
            violations.push(Violation {
                location: loc.clone(),
                problem: "empty comment id".into(),
            });
        }
        if !seen_ids.insert(comment.id.clone()) {
            violations.push(Violation {
                location: loc.clone(),
                problem: format!("duplicate comment id `{}`", comment.id),
            });
        }
        if comment.text.trim().is_empty() {
            violations.push(Violation {
                location: loc,
                problem: "empty comment text".into(),
            });
        }
    }

    let comment_ids: BTreeSet<&str> = dataset.comments.iter().map(|c| c.id.as_str()).collect();
    let mut baselined = BTreeSet::new();
    for (i, baseline) in dataset.baselines.iter().enumerate() {
        let loc = format!("baselines[{i}] (comment `{}`)", baseline.comment_id);
        if !comment_ids.contains(baseline.comment_id.as_str()) {
            violations.push(Violation {
                location: loc.clone(),
                problem: format!("dangling comment_id `{}`", baseline.comment_id),
            });
        }
        if !baselined.insert(baseline.comment_id.clone()) {
            violations.push(Violation {
                location: loc.clone(),
                problem: format!("duplicate baseline for comment `{}`", baseline.comment_id),
            });
        }
        push_goal_violations(&mut violations, &loc, &baseline.goals);
        for problem in baseline.fpn.violations() {
            violations.push(Violation {
                location: loc.clone(),
                problem,
            });
        }
    }

    for (i, record) in dataset.benchmark_inferences.iter().enumerate() {
        let loc = format!(
            "benchmark_inferences[{i}] (comment `{}`)",
            record.comment_id
        );
        if !comment_ids.contains(record.comment_id.as_str()) {
            violations.push(Violation {
                location: loc.clone(),
                problem: format!("dangling comment_id `{}`", record.comment_id),
            });
        }
        if matches!(record.source, InferenceSource::Llm { .. }) && record.transcript.is_empty() {
            violations.push(Violation {
                location: loc.clone(),
                problem: "llm-source record with empty transcript".into(),
            });
        }
        if record.parse_status == ParseStatus::Complete {
            match &record.goals {
                Some(goals) => push_goal_violations(&mut violations, &loc, goals),
                None => violations.push(Violation {
                    location: loc.clone(),
                    problem: "parse-complete record without goals".into(),
                }),
            }
            match &record.fpn {
                Some(fpn) => {
                    for problem in fpn.violations() {
                        violations.push(Violation {
                            location: loc.clone(),
                            problem,
                        });
                    }
                }
                None => violations.push(Violation {
                    location: loc.clone(),
                    problem: "parse-complete record without fpn".into(),
                }),
            }
        }
    }

    violations
}

fn push_goal_violations(violations: &mut Vec<Violation>, loc: &str, goals: &GoalSet) {
    for (level, text) in goals.levels() {
        if text.trim().is_empty() {
            violations.push(Violation {
                location: loc.to_string(),
                problem: format!("empty {}", level.field_name()),
            });
        }
    }
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("rating out of range [1,5] on {need}: {value}")]
    RatingOutOfRange { need: String, value: i64 },
    #[error("missing FPN: {0}")]
    MissingNeed(String),
    #[error("duplicate FPN: {0}")]
    DuplicateNeed(String),
    #[error("unknown FPN name `{0}`")]
    UnknownNeed(String),
    #[error("dataset format error at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain;

    pub(crate) fn flat_scores(value: i64) -> FpnScores {
        FpnScores(
            canonical_fpn_order()
                .iter()
                .map(|f| (f.as_str().to_string(), value))
                .collect(),
        )
    }

    fn sample_goals() -> GoalSet {
        GoalSet {
            do_goals: "charge my phone while traveling".into(),
            motor_goals: "plug the charger into my phone".into(),
            be_goals: "stay connected".into(),
        }
    }

    fn sample_dataset() -> Dataset {
        Dataset {
            comments: vec![UserComment {
                id: "c1".into(),
                activity_category: ActivityCategory::Traveling,
                text: "I like this charger".into(),
            }],
            baselines: vec![BaselineRecord {
                comment_id: "c1".into(),
                goals: sample_goals(),
                fpn: flat_scores(3),
                source: BaselineSource::UserSelfReport,
            }],
            benchmark_inferences: vec![],
        }
    }

    #[test]
    fn canonical_order_starts_with_autonomy_ends_with_stimulation() {
        let order = canonical_fpn_order();
        assert_eq!(order.len(), 13);
        assert_eq!(order[0], FpnName::Autonomy);
        assert_eq!(order[12], FpnName::Stimulation);
    }

    #[test]
    fn canonical_order_is_stable_across_calls() {
        assert_eq!(domain::canonical_fpn_order(), canonical_fpn_order());
    }

    #[test]
    fn fpn_name_parse_is_case_insensitive() {
        assert_eq!(FpnName::parse("Autonomy"), Some(FpnName::Autonomy));
        assert_eq!(FpnName::parse("  SECURITY "), Some(FpnName::Security));
        assert_eq!(FpnName::parse("freedom"), None);
    }

    #[test]
    fn well_formed_dataset_has_no_violations() {
        assert!(validate_dataset(&sample_dataset()).is_empty());
    }

    #[test]
    fn missing_need_is_reported_by_name() {
        let mut dataset = sample_dataset();
        dataset.baselines[0].fpn.0.remove("stimulation");
        let violations = validate_dataset(&dataset);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].problem, "missing FPN: stimulation");
    }

    #[test]
    fn out_of_range_rating_is_reported() {
        let mut dataset = sample_dataset();
        dataset.baselines[0].fpn.0.insert("autonomy".into(), 6);
        let violations = validate_dataset(&dataset);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].problem.contains("rating out of range [1,5]"));
    }

    #[test]
    fn dangling_and_duplicate_ids_are_reported() {
        let mut dataset = sample_dataset();
        dataset.comments.push(dataset.comments[0].clone());
        dataset.baselines[0].comment_id = "nope".into();
        let problems: Vec<String> = validate_dataset(&dataset)
            .into_iter()
            .map(|v| v.problem)
            .collect();
        assert!(problems.iter().any(|p| p.contains("duplicate comment id")));
        assert!(problems.iter().any(|p| p.contains("dangling comment_id")));
    }

    #[test]
    fn empty_texts_are_reported() {
        let mut dataset = sample_dataset();
        dataset.comments[0].text = "  \n ".into();
        dataset.baselines[0].goals.be_goals = "".into();
        let problems: Vec<String> = validate_dataset(&dataset)
            .into_iter()
            .map(|v| v.problem)
            .collect();
        assert!(problems.contains(&"empty comment text".to_string()));
        assert!(problems.contains(&"empty be_goals".to_string()));
    }

    #[test]
    fn validate_is_pure() {
        let dataset = sample_dataset();
        let before = dataset.clone();
        let first = validate_dataset(&dataset);
        let second = validate_dataset(&dataset);
        assert_eq!(first, second);
        assert_eq!(dataset, before);
    }

    #[test]
    fn attribution_iterates_in_canonical_order_regardless_of_key_order() {
        // keys deliberately reversed in the source text
        let json = r#"{"stimulation":5,"security":4,"relatedness":3,"recognition":2,
            "purpose":1,"morality":2,"impact":3,"fitness":4,"competence":5,
            "community":1,"comfort":2,"beauty":3,"autonomy":4}"#;
        let attr: FpnAttribution = serde_json::from_str(json).unwrap();
        let names: Vec<FpnName> = attr.iter().map(|(n, _)| n).collect();
        assert_eq!(names, canonical_fpn_order().to_vec());
        assert_eq!(attr.get(FpnName::Autonomy), 4);
        assert_eq!(attr.get(FpnName::Stimulation), 5);
        // serialization re-emits canonical order
        let out = serde_json::to_string(&attr).unwrap();
        assert!(out.starts_with(r#"{"autonomy":"#));
        assert!(out.ends_with(r#""stimulation":5}"#));
    }

    #[test]
    fn strict_attribution_rejects_bad_input() {
        assert!(matches!(
            FpnAttribution::new([0; FPN_COUNT]),
            Err(DomainError::RatingOutOfRange { .. })
        ));
        let mut pairs: Vec<(FpnName, i64)> =
            canonical_fpn_order().iter().map(|f| (*f, 3i64)).collect();
        pairs[1].0 = FpnName::Autonomy;
        assert!(matches!(
            FpnAttribution::from_pairs(pairs),
            Err(DomainError::DuplicateNeed(_))
        ));
    }

    #[test]
    fn dataset_round_trips_field_by_field() {
        let dataset = sample_dataset();
        let json = dataset.to_json_string();
        let back = Dataset::from_slice(json.as_bytes()).unwrap();
        assert_eq!(dataset, back);
    }

    #[test]
    fn format_error_names_position() {
        let err = Dataset::from_slice(b"{\"comments\": [,]}").unwrap_err();
        match err {
            DomainError::Format { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
