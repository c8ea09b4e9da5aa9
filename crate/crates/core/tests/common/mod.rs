//! Random small knowledge bases plus a brute-force reference for analyze
//! and plan, written against a plain description rather than the KB.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use suave::tomasys::{DesignId, FunctionId, GroundingId, GroundingStatus, KnowledgeBase, ObjectiveId, ObjectiveStatus, Qa};

#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub id: u32,
    pub function: u32,
    pub components: Vec<usize>,
    pub qas: Vec<(Qa, f64)>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub functions: Vec<u32>,
    pub components: Vec<bool>,
    pub designs: Vec<DesignSpec>,
    /// Function with an objective, and the design grounding it (if any).
    pub objectives: Vec<(u32, Option<u32>)>,
    pub measurements: Vec<(Qa, f64)>,
}

const WV_LEVELS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
const PERF_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn level(rng: &mut ChaCha8Rng, qa: Qa) -> f64 {
    // Mostly catalog levels so ties and boundary equality come up often.
    let table: &[f64] = match qa {
        Qa::WaterVisibility => &WV_LEVELS,
        Qa::Performance => &PERF_LEVELS,
    };
    if rng.gen_bool(0.8) {
        table[rng.gen_range(0..table.len())]
    } else {
        let hi = if qa == Qa::Performance { 1.0 } else { 3.5 };
        rng.gen_range(0.0..=hi)
    }
}

fn component_name(i: usize) -> String {
    format!("c{i}")
}

impl Scenario {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = rng.gen_range(1..=3u32);
        let functions: Vec<u32> = (1..=nf).collect();
        let components: Vec<bool> = (0..rng.gen_range(0..=4)).map(|_| rng.gen_bool(0.7)).collect();
        let nd = rng.gen_range(1..=6u32);
        let designs: Vec<DesignSpec> = (1..=nd)
            .map(|id| {
                let mut qas = Vec::new();
                for q in Qa::ALL {
                    if rng.gen_bool(0.6) {
                        qas.push((q, level(&mut rng, q)));
                    }
                }
                DesignSpec {
                    id,
                    function: rng.gen_range(1..=nf),
                    components: (0..components.len()).filter(|_| rng.gen_bool(0.4)).collect(),
                    qas,
                }
            })
            .collect();
        let with_objective: Vec<u32> = functions.iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
        let objectives = with_objective
            .into_iter()
            .map(|f| {
                let candidates: Vec<u32> = designs.iter().filter(|d| d.function == f).map(|d| d.id).collect();
                let grounded = if !candidates.is_empty() && rng.gen_bool(0.6) {
                    Some(candidates[rng.gen_range(0..candidates.len())])
                } else {
                    None
                };
                (f, grounded)
            })
            .collect();
        let mut measurements = Vec::new();
        for q in Qa::ALL {
            if rng.gen_bool(0.7) {
                measurements.push((q, level(&mut rng, q)));
            }
        }
        Self {
            functions,
            components,
            designs,
            objectives,
            measurements,
        }
    }

    /// Builds the KB. Half of the measurements arrive before the groundings
    /// and half after, so both copy paths are exercised.
    pub fn build(&self) -> KnowledgeBase<f64> {
        let mut kb = KnowledgeBase::new();
        for &f in &self.functions {
            kb.add_function(FunctionId(f), &format!("f{f}"), "").unwrap();
        }
        for (i, _) in self.components.iter().enumerate() {
            kb.add_component(&component_name(i), suave::tomasys::ComponentStatus::Available)
                .unwrap();
        }
        for d in &self.designs {
            kb.add_design(
                DesignId(d.id),
                &format!("d{}", d.id),
                FunctionId(d.function),
                d.components.iter().map(|&c| component_name(c)),
                d.qas.iter().copied(),
            )
            .unwrap();
        }
        let (early, late) = self.measurements.split_at(self.measurements.len() / 2);
        for &(q, v) in early {
            kb.update_measured_qa(q, v, 0.0).unwrap();
        }
        for &(f, grounded) in &self.objectives {
            let o = kb.set_objective(FunctionId(f), BTreeMap::new()).unwrap();
            if let Some(d) = grounded {
                kb.apply_grounding(o, DesignId(d)).unwrap();
            }
        }
        for &(q, v) in late {
            kb.update_measured_qa(q, v, 1.0).unwrap();
        }
        for (i, &available) in self.components.iter().enumerate() {
            if !available {
                kb.update_component_status(&component_name(i), suave::tomasys::ComponentStatus::Failed)
                    .unwrap();
            }
        }
        kb
    }

    fn measurement(&self, qa: Qa) -> Option<f64> {
        self.measurements.iter().find(|(q, _)| *q == qa).map(|(_, v)| *v)
    }

    fn design(&self, id: u32) -> &DesignSpec {
        self.designs.iter().find(|d| d.id == id).unwrap()
    }

    fn components_ok(&self, d: &DesignSpec) -> bool {
        d.components.iter().all(|&c| self.components[c])
    }

    /// A grounding is in error when some measured QA is below what its
    /// design expects, or a required component has failed.
    pub fn grounding_in_error(&self, design: u32) -> bool {
        let d = self.design(design);
        let below = d
            .qas
            .iter()
            .any(|&(q, exp)| self.measurement(q).is_some_and(|m| m < exp));
        below || !self.components_ok(d)
    }

    pub fn feasible(&self, d: &DesignSpec) -> bool {
        self.components_ok(d)
            && d
                .qas
                .iter()
                .all(|&(q, exp)| self.measurement(q).is_none_or(|m| exp <= m))
    }

    /// Exhaustive argmax over performance; unrated designs lose to rated
    /// ones, ties go to the lowest id.
    pub fn best(&self, function: u32) -> Option<u32> {
        let perf = |d: &DesignSpec| d.qas.iter().find(|(q, _)| *q == Qa::Performance).map(|(_, v)| *v);
        let mut feasible: Vec<&DesignSpec> = self
            .designs
            .iter()
            .filter(|d| d.function == function && self.feasible(d))
            .collect();
        feasible.sort_by_key(|d| d.id);
        let top = feasible.iter().map(|d| perf(d)).fold(None, |acc: Option<Option<f64>>, p| match acc {
            None => Some(p),
            Some(best) => Some(match (best, p) {
                (Some(b), Some(x)) => Some(b.max(x)),
                (None, x) => x,
                (b, None) => b,
            }),
        })?;
        feasible.into_iter().find(|d| perf(d) == top).map(|d| d.id)
    }

    pub fn expected_analyze(&self) -> Vec<(GroundingId, GroundingStatus)> {
        let mut out: Vec<_> = self
            .objectives
            .iter()
            .filter_map(|&(f, g)| g.map(|d| (f, d)))
            .map(|(f, d)| {
                let status = if self.grounding_in_error(d) {
                    GroundingStatus::Error
                } else {
                    GroundingStatus::Ok
                };
                (FunctionId(f).objective().grounding(), status)
            })
            .collect();
        out.sort_by_key(|(g, _)| *g);
        out
    }

    /// Expected configuration and final objective statuses after
    /// analyze followed by plan.
    pub fn expected_plan(&self) -> (Vec<(ObjectiveId, Option<DesignId>)>, BTreeMap<ObjectiveId, ObjectiveStatus>) {
        let mut config = Vec::new();
        let mut statuses = BTreeMap::new();
        let mut objectives = self.objectives.clone();
        objectives.sort();
        for (f, grounded) in objectives {
            let o = FunctionId(f).objective();
            let mut status = match grounded {
                None => ObjectiveStatus::Null,
                Some(d) if self.grounding_in_error(d) => ObjectiveStatus::Error,
                Some(_) => ObjectiveStatus::Ok,
            };
            let best = self.best(f);
            let needs = matches!(status, ObjectiveStatus::Null | ObjectiveStatus::Error) || grounded != best;
            if needs {
                if best.is_none() {
                    status = ObjectiveStatus::Error;
                }
                config.push((o, best.map(DesignId)));
            }
            statuses.insert(o, status);
        }
        (config, statuses)
    }
}

/// Runs analyze and plan on the built KB and compares against the
/// reference. Returns a description of the first mismatch.
pub fn check(seed: u64) -> Result<(), String> {
    let scenario = Scenario::random(seed);
    let mut kb = scenario.build();
    let analyzed = kb.analyze();
    let expected = scenario.expected_analyze();
    if analyzed != expected {
        return Err(format!("seed {seed}: analyze {analyzed:?} != {expected:?}\n{scenario:#?}"));
    }
    let plan: Vec<_> = kb.plan().iter().collect();
    let (expected_plan, expected_status) = scenario.expected_plan();
    if plan != expected_plan {
        return Err(format!("seed {seed}: plan {plan:?} != {expected_plan:?}\n{scenario:#?}"));
    }
    let status: BTreeMap<_, _> = kb.objectives().map(|o| (o.id, o.status)).collect();
    if status != expected_status {
        return Err(format!("seed {seed}: status {status:?} != {expected_status:?}"));
    }
    Ok(())
}
