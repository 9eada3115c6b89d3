//! The stage graph as explicit data.
//!
//! Dependencies drive both execution order and staleness: a stage's inputs
//! digest covers its upstream stages' output digests plus the config slice
//! it reads, so editing an upstream output or the relevant config marks the
//! stage stale. `ALL` is a topological order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageId {
    Ingest,
    Indexes,
    BasicInfo,
    Allegations,
    Admissibility,
    Periculum,
    Fumus,
    Recommendations,
}

impl StageId {
    pub const ALL: [StageId; 8] = [
        StageId::Ingest,
        StageId::Indexes,
        StageId::BasicInfo,
        StageId::Allegations,
        StageId::Admissibility,
        StageId::Periculum,
        StageId::Fumus,
        StageId::Recommendations,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StageId::Ingest => "ingest",
            StageId::Indexes => "indexes",
            StageId::BasicInfo => "basic_info",
            StageId::Allegations => "allegations",
            StageId::Admissibility => "admissibility",
            StageId::Periculum => "periculum",
            StageId::Fumus => "fumus",
            StageId::Recommendations => "recommendations",
        }
    }

    pub fn from_name(name: &str) -> Option<StageId> {
        StageId::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// Direct dependencies.
    pub fn deps(&self) -> &'static [StageId] {
        match self {
            StageId::Ingest => &[],
            StageId::Indexes => &[StageId::Ingest],
            StageId::BasicInfo => &[StageId::Ingest, StageId::Indexes],
            StageId::Allegations => &[StageId::Ingest],
            StageId::Admissibility => &[StageId::Ingest, StageId::Indexes],
            StageId::Periculum => &[StageId::Ingest, StageId::Indexes],
            StageId::Fumus => &[StageId::Allegations, StageId::Indexes],
            StageId::Recommendations => &[
                StageId::BasicInfo,
                StageId::Allegations,
                StageId::Admissibility,
                StageId::Periculum,
                StageId::Fumus,
            ],
        }
    }

    /// Transitive dependencies, in topological order.
    pub fn upstream(&self) -> Vec<StageId> {
        StageId::ALL
            .iter()
            .copied()
            .filter(|s| s != self && depends_on(*self, *s))
            .collect()
    }

    /// Transitive dependents, in topological order.
    pub fn downstream(&self) -> Vec<StageId> {
        StageId::ALL
            .iter()
            .copied()
            .filter(|s| s != self && depends_on(*s, *self))
            .collect()
    }
}

fn depends_on(stage: StageId, candidate: StageId) -> bool {
    stage.deps().iter().any(|d| *d == candidate || depends_on(*d, candidate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_is_a_topological_order() {
        for (i, stage) in StageId::ALL.iter().enumerate() {
            for dep in stage.deps() {
                let dep_pos = StageId::ALL.iter().position(|s| s == dep).unwrap();
                assert!(dep_pos < i, "{dep:?} must precede {stage:?}");
            }
        }
    }

    #[test]
    fn downstream_of_allegations_reaches_recommendations() {
        let down = StageId::Allegations.downstream();
        assert!(down.contains(&StageId::Fumus));
        assert!(down.contains(&StageId::Recommendations));
        assert!(!down.contains(&StageId::Periculum));
    }

    #[test]
    fn ingest_cascades_everywhere() {
        assert_eq!(StageId::Ingest.downstream().len(), StageId::ALL.len() - 1);
    }

    #[test]
    fn upstream_of_fumus() {
        let up = StageId::Fumus.upstream();
        assert_eq!(
            up,
            vec![StageId::Ingest, StageId::Indexes, StageId::Allegations]
        );
    }

    #[test]
    fn names_round_trip() {
        for stage in StageId::ALL {
            assert_eq!(StageId::from_name(stage.name()), Some(stage));
        }
        assert_eq!(StageId::from_name("bogus"), None);
    }
}
