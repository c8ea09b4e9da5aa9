//! Analyze and plan.
//!
//! Analyze marks a grounding as ERROR when a measured QA falls below the
//! value its design expects, or when a component the design requires has
//! failed. Plan filters out designs whose expectations are not met by the
//! current measurements (or whose components are unavailable) and picks the
//! remaining design with the highest expected performance.

use std::collections::BTreeMap;

use super::{
    ComponentStatus, DesignId, FunctionDesign, GroundingId, GroundingStatus, KnowledgeBase, ObjectiveId,
    ObjectiveStatus, Qa,
};
use crate::scalar::Scalar;

/// Planned (re)groundings: objective -> chosen design, or `None` when no
/// design is feasible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration(BTreeMap<ObjectiveId, Option<DesignId>>);

impl Configuration {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, objective: ObjectiveId) -> Option<Option<DesignId>> {
        self.0.get(&objective).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjectiveId, Option<DesignId>)> + '_ {
        self.0.iter().map(|(o, d)| (*o, *d))
    }
}

impl FromIterator<(ObjectiveId, Option<DesignId>)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (ObjectiveId, Option<DesignId>)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Design is usable under the current measurements and component statuses.
/// An expected QA with no measurement yet does not constrain the design.
pub fn design_is_feasible<S: Scalar>(kb: &KnowledgeBase<S>, design: &FunctionDesign<S>) -> bool {
    let components_ok = design
        .required_components
        .iter()
        .all(|c| kb.component_status(c) == Some(ComponentStatus::Available));
    components_ok
        && design
            .expected_qas
            .iter()
            .all(|(qa, exp)| kb.measurement(*qa).is_none_or(|meas| *exp <= meas))
}

fn grounding_violated<S: Scalar>(kb: &KnowledgeBase<S>, design: &FunctionDesign<S>, measured: &BTreeMap<Qa, S>) -> bool {
    let qa_violated = measured
        .iter()
        .any(|(qa, meas)| design.expected_qas.get(qa).is_some_and(|exp| *meas < *exp));
    let component_failed = design
        .required_components
        .iter()
        .any(|c| kb.component_status(c) == Some(ComponentStatus::Failed));
    qa_violated || component_failed
}

impl<S: Scalar> KnowledgeBase<S> {
    /// Re-evaluates every grounding and propagates ERROR/OK to its objective.
    pub fn analyze(&mut self) -> Vec<(GroundingId, GroundingStatus)> {
        let verdicts: Vec<(GroundingId, ObjectiveId, GroundingStatus)> = self
            .groundings
            .values()
            .map(|fg| {
                let design = &self.designs[&fg.of_design];
                let status = if grounding_violated(self, design, &fg.measured_qas) {
                    GroundingStatus::Error
                } else {
                    GroundingStatus::Ok
                };
                (fg.id, fg.solves_objective, status)
            })
            .collect();
        for &(g, o, status) in &verdicts {
            if let Some(fg) = self.groundings.get_mut(&g) {
                fg.status = status;
            }
            if let Some(obj) = self.objectives.get_mut(&o) {
                obj.status = match status {
                    GroundingStatus::Error => ObjectiveStatus::Error,
                    GroundingStatus::Ok => ObjectiveStatus::Ok,
                };
            }
        }
        verdicts.into_iter().map(|(g, _, s)| (g, s)).collect()
    }

    /// Best feasible design for the function of `objective`, lowest index on
    /// ties. Designs without an expected performance rank below all others.
    pub fn best_design(&self, objective: ObjectiveId) -> Option<DesignId> {
        let function = self.objectives.get(&objective)?.of_function;
        let mut best: Option<(&FunctionDesign<S>, Option<S>)> = None;
        for fd in self.designs.values().filter(|fd| fd.solves == function) {
            if !design_is_feasible(self, fd) {
                continue;
            }
            let score = fd.expected_qas.get(&Qa::Performance).copied();
            let better = match &best {
                None => true,
                Some((_, best_score)) => match (score, best_score) {
                    (Some(s), Some(b)) => s > *b,
                    (Some(_), None) => true,
                    (None, _) => false,
                },
            };
            if better {
                best = Some((fd, score));
            }
        }
        best.map(|(fd, _)| fd.id)
    }

    /// Objectives that need a new grounding and the design to use.
    ///
    /// An objective is (re)planned when it is NULL or ERROR, or when a
    /// strictly better feasible design than the grounded one exists.
    /// Infeasible objectives are set to ERROR and mapped to `None`.
    pub fn plan(&mut self) -> Configuration {
        let mut changes = BTreeMap::new();
        let ids: Vec<ObjectiveId> = self.objectives.keys().copied().collect();
        for id in ids {
            let best = self.best_design(id);
            let status = self.objectives[&id].status;
            let current = self.grounding_of(id).map(|fg| fg.of_design);
            let needs = matches!(status, ObjectiveStatus::Null | ObjectiveStatus::Error) || current != best;
            if !needs {
                continue;
            }
            if best.is_none() {
                if let Some(obj) = self.objectives.get_mut(&id) {
                    obj.status = ObjectiveStatus::Error;
                }
            }
            changes.insert(id, best);
        }
        Configuration(changes)
    }
}
