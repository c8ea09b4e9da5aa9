use super::{ComponentStatus, DesignId, FunctionId, KnowledgeBase, Qa};
use crate::scalar::Scalar;

pub const MAINTAIN_MOTION: FunctionId = FunctionId(1);
pub const GENERATE_SEARCH_PATH: FunctionId = FunctionId(2);
pub const FOLLOW_PIPELINE: FunctionId = FunctionId(3);

pub const DESIGN_ALL_THRUSTERS: DesignId = DesignId(1);
pub const DESIGN_RECOVER_THRUSTERS: DesignId = DesignId(2);
pub const DESIGN_SPIRAL_LOW: DesignId = DesignId(3);
pub const DESIGN_SPIRAL_MEDIUM: DesignId = DesignId(4);
pub const DESIGN_SPIRAL_HIGH: DesignId = DesignId(5);
pub const DESIGN_FOLLOW_PIPELINE: DesignId = DesignId(6);

pub const THRUSTERS: [&str; 6] = [
    "thruster_1",
    "thruster_2",
    "thruster_3",
    "thruster_4",
    "thruster_5",
    "thruster_6",
];

/// id, name, function, needs every thruster, expected QAs.
type DesignRow<S> = (DesignId, &'static str, FunctionId, bool, Vec<(Qa, S)>);

/// The pipeline-inspection catalog with no objectives.
pub fn init_kb<S: Scalar>() -> KnowledgeBase<S> {
    let mut kb = KnowledgeBase::new();
    let l = S::lit;

    kb.add_function(MAINTAIN_MOTION, "maintain_motion", "keep the vehicle under control")
        .and_then(|_| kb.add_function(GENERATE_SEARCH_PATH, "generate_search_path", "plan a path that searches for the pipeline"))
        .and_then(|_| kb.add_function(FOLLOW_PIPELINE, "follow_pipeline", "track the pipeline and inspect it"))
        .expect("static function catalog");

    for t in THRUSTERS {
        kb.add_component(t, ComponentStatus::Available).expect("unique thruster");
    }

    let none: [&str; 0] = [];
    let designs: [DesignRow<S>; 6] = [
        (DESIGN_ALL_THRUSTERS, "all_thrusters", MAINTAIN_MOTION, true, vec![(Qa::Performance, l(1.0))]),
        (DESIGN_RECOVER_THRUSTERS, "recover_thrusters", MAINTAIN_MOTION, false, vec![(Qa::Performance, l(0.5))]),
        (
            DESIGN_SPIRAL_LOW,
            "spiral_low",
            GENERATE_SEARCH_PATH,
            false,
            vec![(Qa::WaterVisibility, l(0.5)), (Qa::Performance, l(0.25))],
        ),
        (
            DESIGN_SPIRAL_MEDIUM,
            "spiral_medium",
            GENERATE_SEARCH_PATH,
            false,
            vec![(Qa::WaterVisibility, l(1.0)), (Qa::Performance, l(0.5))],
        ),
        (
            DESIGN_SPIRAL_HIGH,
            "spiral_high",
            GENERATE_SEARCH_PATH,
            false,
            vec![(Qa::WaterVisibility, l(2.0)), (Qa::Performance, l(1.0))],
        ),
        (DESIGN_FOLLOW_PIPELINE, "follow_pipeline", FOLLOW_PIPELINE, false, vec![]),
    ];
    for (id, name, solves, needs_thrusters, qas) in designs {
        let result = if needs_thrusters {
            kb.add_design(id, name, solves, THRUSTERS, qas)
        } else {
            kb.add_design(id, name, solves, none, qas)
        };
        result.expect("static design catalog");
    }
    kb
}
