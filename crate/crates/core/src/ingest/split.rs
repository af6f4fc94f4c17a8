use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{IngestError, Result, SubjectId};

pub const MIN_SUBJECTS: usize = 3;

/// One LOOCV fold. Subjects, not hands, are the unit of assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: BTreeSet<SubjectId>,
    pub val: SubjectId,
    pub test: SubjectId,
}

impl Split {
    pub fn contains(&self, s: SubjectId) -> bool {
        self.train.contains(&s) || self.val == s || self.test == s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub splits: Vec<Split>,
}

/// One split per remaining subject as test; the validation subject is the
/// next one in sorted order (wrapping), everyone else trains.
pub fn make_split_plan(subjects: &[SubjectId], exclude: &[SubjectId]) -> Result<SplitPlan> {
    let ids: Vec<SubjectId> = subjects
        .iter()
        .copied()
        .filter(|s| !exclude.contains(s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if ids.len() < MIN_SUBJECTS {
        return Err(IngestError::TooFewSubjects {
            required: MIN_SUBJECTS,
            found: ids.len(),
        });
    }
    let n = ids.len();
    let splits = (0..n)
        .map(|k| {
            let test = ids[k];
            let val = ids[(k + 1) % n];
            let train = ids
                .iter()
                .copied()
                .filter(|&s| s != test && s != val)
                .collect();
            Split { train, val, test }
        })
        .collect();
    Ok(SplitPlan { splits })
}
