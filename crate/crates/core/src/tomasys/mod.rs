//! Knowledge base following the TOMASys metamodel: functions, function
//! designs, objectives, function groundings, components and quality
//! attributes, together with the analyze and plan steps of the MAPE-K loop.

mod catalog;
mod reasoning;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

pub use catalog::{
    init_kb, DESIGN_ALL_THRUSTERS, DESIGN_FOLLOW_PIPELINE, DESIGN_RECOVER_THRUSTERS, DESIGN_SPIRAL_HIGH,
    DESIGN_SPIRAL_LOW, DESIGN_SPIRAL_MEDIUM, FOLLOW_PIPELINE, GENERATE_SEARCH_PATH, MAINTAIN_MOTION, THRUSTERS,
};
pub use reasoning::{design_is_feasible, Configuration};

/// Quality attributes. Both are higher-is-better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Qa {
    /// Maximum altitude (m) from which the seabed can be perceived, in `[0, inf)`.
    WaterVisibility,
    /// Efficiency of the search strategy, in `[0, 1]`.
    Performance,
}

impl Qa {
    pub const ALL: [Qa; 2] = [Qa::WaterVisibility, Qa::Performance];

    pub fn name(self) -> &'static str {
        match self {
            Qa::WaterVisibility => "water_visibility",
            Qa::Performance => "performance",
        }
    }

    pub fn from_name(name: &str) -> Option<Qa> {
        Qa::ALL.into_iter().find(|q| q.name() == name)
    }

    fn admits<S: Scalar>(self, value: S) -> bool {
        match self {
            Qa::WaterVisibility => value >= S::zero(),
            Qa::Performance => value >= S::zero() && value <= S::one(),
        }
    }
}

impl fmt::Display for Qa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! catalog_id {
    ($(#[$m:meta])* $name:ident, $prefix:literal) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
                s.collect_str(self)
            }
        }
    };
}

catalog_id!(FunctionId, "F");
catalog_id!(
    /// Designs are ranked by this index when breaking ties.
    DesignId,
    "FD"
);
catalog_id!(
    /// One active objective per function, so `O<n>` always refers to `F<n>`.
    ObjectiveId,
    "O"
);
catalog_id!(GroundingId, "FG");

impl FunctionId {
    pub fn objective(self) -> ObjectiveId {
        ObjectiveId(self.0)
    }
}

impl ObjectiveId {
    pub fn grounding(self) -> GroundingId {
        GroundingId(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ComponentStatus {
    Available,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ObjectiveStatus {
    /// Freshly created, not yet grounded.
    Null,
    Ok,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GroundingStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Function {
    pub id: FunctionId,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionDesign<S> {
    pub id: DesignId,
    pub name: String,
    pub solves: FunctionId,
    pub required_components: BTreeSet<String>,
    pub expected_qas: BTreeMap<Qa, S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Objective<S> {
    pub id: ObjectiveId,
    pub of_function: FunctionId,
    pub status: ObjectiveStatus,
    /// Carried for completeness; no rule in this exemplar consumes it.
    pub required_qas: BTreeMap<Qa, S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionGrounding<S> {
    pub id: GroundingId,
    pub solves_objective: ObjectiveId,
    pub of_design: DesignId,
    pub status: GroundingStatus,
    pub measured_qas: BTreeMap<Qa, S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement<S> {
    pub value: S,
    pub stamp: S,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("unknown function design {0}")]
    UnknownDesign(DesignId),
    #[error("unknown objective {0}")]
    UnknownObjective(ObjectiveId),
    #[error("unknown component {0}")]
    UnknownComponent(String),
    #[error("function {0} already has an active objective")]
    DuplicateObjective(FunctionId),
    #[error("{0} already in catalog")]
    DuplicateEntry(String),
    #[error("{qa} value {value} outside its range")]
    OutOfRange { qa: Qa, value: f64 },
    #[error("{design} does not solve the function of {objective}")]
    IllFormed { objective: ObjectiveId, design: DesignId },
}

/// Runtime knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct KnowledgeBase<S: Scalar> {
    functions: BTreeMap<FunctionId, Function>,
    designs: BTreeMap<DesignId, FunctionDesign<S>>,
    components: BTreeMap<String, ComponentStatus>,
    objectives: BTreeMap<ObjectiveId, Objective<S>>,
    groundings: BTreeMap<GroundingId, FunctionGrounding<S>>,
    measurements: BTreeMap<Qa, Measurement<S>>,
}

impl<S: Scalar> Default for KnowledgeBase<S> {
    fn default() -> Self {
        Self {
            functions: BTreeMap::new(),
            designs: BTreeMap::new(),
            components: BTreeMap::new(),
            objectives: BTreeMap::new(),
            groundings: BTreeMap::new(),
            measurements: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> KnowledgeBase<S> {
    /// Empty knowledge base; see [`init_kb`] for the exemplar catalog.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_function(&mut self, id: FunctionId, name: &str, description: &str) -> Result<(), KbError> {
        if self.functions.contains_key(&id) || self.function_by_name(name).is_some() {
            return Err(KbError::DuplicateEntry(id.to_string()));
        }
        self.functions.insert(
            id,
            Function {
                id,
                name: name.to_string(),
                description: description.to_string(),
            },
        );
        Ok(())
    }

    pub fn add_component(&mut self, name: &str, status: ComponentStatus) -> Result<(), KbError> {
        if self.components.contains_key(name) {
            return Err(KbError::DuplicateEntry(name.to_string()));
        }
        self.components.insert(name.to_string(), status);
        Ok(())
    }

    pub fn add_design<I, Q>(
        &mut self,
        id: DesignId,
        name: &str,
        solves: FunctionId,
        required_components: I,
        expected_qas: Q,
    ) -> Result<(), KbError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        Q: IntoIterator<Item = (Qa, S)>,
    {
        if self.designs.contains_key(&id) {
            return Err(KbError::DuplicateEntry(id.to_string()));
        }
        if !self.functions.contains_key(&solves) {
            return Err(KbError::UnknownFunction(solves.to_string()));
        }
        let required_components: BTreeSet<String> = required_components.into_iter().map(Into::into).collect();
        if let Some(c) = required_components.iter().find(|c| !self.components.contains_key(*c)) {
            return Err(KbError::UnknownComponent(c.clone()));
        }
        let expected_qas: BTreeMap<Qa, S> = expected_qas.into_iter().collect();
        if let Some((&qa, &value)) = expected_qas.iter().find(|(q, v)| !q.admits(**v)) {
            return Err(KbError::OutOfRange {
                qa,
                value: value.as_f64(),
            });
        }
        self.designs.insert(
            id,
            FunctionDesign {
                id,
                name: name.to_string(),
                solves,
                required_components,
                expected_qas,
            },
        );
        Ok(())
    }

    pub fn functions(&self) -> impl Iterator<Item = &Function> {
        self.functions.values()
    }

    pub fn function(&self, id: FunctionId) -> Option<&Function> {
        self.functions.get(&id)
    }

    pub fn function_by_name(&self, name: &str) -> Option<FunctionId> {
        self.functions.values().find(|f| f.name == name).map(|f| f.id)
    }

    pub fn designs(&self) -> impl Iterator<Item = &FunctionDesign<S>> {
        self.designs.values()
    }

    pub fn design(&self, id: DesignId) -> Option<&FunctionDesign<S>> {
        self.designs.get(&id)
    }

    pub fn components(&self) -> impl Iterator<Item = (&str, ComponentStatus)> {
        self.components.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn component_status(&self, name: &str) -> Option<ComponentStatus> {
        self.components.get(name).copied()
    }

    pub fn objectives(&self) -> impl Iterator<Item = &Objective<S>> {
        self.objectives.values()
    }

    pub fn objective(&self, id: ObjectiveId) -> Option<&Objective<S>> {
        self.objectives.get(&id)
    }

    pub fn groundings(&self) -> impl Iterator<Item = &FunctionGrounding<S>> {
        self.groundings.values()
    }

    pub fn grounding_of(&self, objective: ObjectiveId) -> Option<&FunctionGrounding<S>> {
        self.groundings.get(&objective.grounding())
    }

    pub fn measurement(&self, qa: Qa) -> Option<S> {
        self.measurements.get(&qa).map(|m| m.value)
    }

    /// Creates a NULL-status objective for `function`.
    pub fn set_objective(
        &mut self,
        function: FunctionId,
        required_qas: BTreeMap<Qa, S>,
    ) -> Result<ObjectiveId, KbError> {
        if !self.functions.contains_key(&function) {
            return Err(KbError::UnknownFunction(function.to_string()));
        }
        let id = function.objective();
        if self.objectives.contains_key(&id) {
            return Err(KbError::DuplicateObjective(function));
        }
        self.objectives.insert(
            id,
            Objective {
                id,
                of_function: function,
                status: ObjectiveStatus::Null,
                required_qas,
            },
        );
        Ok(id)
    }

    /// Retires an objective together with its grounding.
    pub fn remove_objective(&mut self, id: ObjectiveId) -> Result<Objective<S>, KbError> {
        let objective = self.objectives.remove(&id).ok_or(KbError::UnknownObjective(id))?;
        self.groundings.remove(&id.grounding());
        Ok(objective)
    }

    pub fn update_measured_qa(&mut self, qa: Qa, value: S, stamp: S) -> Result<(), KbError> {
        if !qa.admits(value) {
            return Err(KbError::OutOfRange {
                qa,
                value: value.as_f64(),
            });
        }
        self.measurements.insert(qa, Measurement { value, stamp });
        for fg in self.groundings.values_mut() {
            if self.designs[&fg.of_design].expected_qas.contains_key(&qa) {
                fg.measured_qas.insert(qa, value);
            }
        }
        Ok(())
    }

    pub fn update_component_status(&mut self, name: &str, status: ComponentStatus) -> Result<(), KbError> {
        let slot = self
            .components
            .get_mut(name)
            .ok_or_else(|| KbError::UnknownComponent(name.to_string()))?;
        *slot = status;
        Ok(())
    }

    /// Binds `objective` to `design`, replacing any previous grounding.
    pub fn apply_grounding(
        &mut self,
        objective: ObjectiveId,
        design: DesignId,
    ) -> Result<&FunctionGrounding<S>, KbError> {
        let fd = self.designs.get(&design).ok_or(KbError::UnknownDesign(design))?;
        let obj = self
            .objectives
            .get_mut(&objective)
            .ok_or(KbError::UnknownObjective(objective))?;
        if obj.of_function != fd.solves {
            return Err(KbError::IllFormed { objective, design });
        }
        let measured_qas = self
            .measurements
            .iter()
            .filter(|(qa, _)| fd.expected_qas.contains_key(qa))
            .map(|(qa, m)| (*qa, m.value))
            .collect();
        obj.status = ObjectiveStatus::Ok;
        let id = objective.grounding();
        self.groundings.insert(
            id,
            FunctionGrounding {
                id,
                solves_objective: objective,
                of_design: design,
                status: GroundingStatus::Ok,
                measured_qas,
            },
        );
        Ok(&self.groundings[&id])
    }

    /// JSON snapshot of every instance and status.
    pub fn snapshot_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("knowledge base serializes")
    }
}
