//! Bundled golden scenarios for prototypical space-sharing conflicts, the
//! expected FeAR sign table, and the move-de-rigueur sensitivity grid.

use std::fmt::Write as _;

use crate::collision::{resolve_trajectories, ResolvedTrajectories};
use crate::error::{FearError, Result};
use crate::fear::{fear_matrix, FearMatrix};
use crate::io::{load_scenario, LoadedScenario};
use crate::mdr::{social_force_mdr, LaneSpec, MdrSpec, SocialForceConfig};
use crate::scenario::{JointAction, Scenario};

/// Minimum magnitude for a strict sign claim.
pub const SIGN_MARGIN: f64 = 0.01;
/// Tolerance for a zero claim.
pub const ZERO_TOLERANCE: f64 = 1e-9;

pub struct GoldenFile {
    pub id: &'static str,
    pub title: &'static str,
    pub text: &'static str,
}

pub const GOLDEN: [GoldenFile; 12] = [
    GoldenFile { id: "a", title: "Obstructed path: follower slows, leader speeds up", text: include_str!("../scenarios/case_a.json") },
    GoldenFile { id: "b", title: "Obstructed path: follower speeds up, leader speeds up", text: include_str!("../scenarios/case_b.json") },
    GoldenFile { id: "c", title: "Obstructed path: follower speeds up, leader slows", text: include_str!("../scenarios/case_c.json") },
    GoldenFile { id: "d", title: "Caught in the middle: agent 2 slows and is rear-ended", text: include_str!("../scenarios/case_d.json") },
    GoldenFile { id: "e", title: "Caught in the middle: agent 2 speeds up gently", text: include_str!("../scenarios/case_e.json") },
    GoldenFile { id: "f", title: "Caught in the middle: agent 2 speeds up hard and hits agent 3", text: include_str!("../scenarios/case_f.json") },
    GoldenFile { id: "g", title: "Corridor version of b", text: include_str!("../scenarios/case_g.json") },
    GoldenFile { id: "h", title: "Intersection version of e", text: include_str!("../scenarios/case_h.json") },
    GoldenFile { id: "i", title: "Crossing: agent 1 slows", text: include_str!("../scenarios/case_i.json") },
    GoldenFile { id: "j", title: "Crossing: agent 1 speeds up", text: include_str!("../scenarios/case_j.json") },
    GoldenFile { id: "k", title: "Passing on parallel lanes", text: include_str!("../scenarios/case_k.json") },
    GoldenFile { id: "l", title: "Overdetermination: squeezed from both sides", text: include_str!("../scenarios/case_l.json") },
];

pub const MDR_SCENE: &str = include_str!("../scenarios/mdr_scene.json");
/// Eight agents around a crossing, used for planning with agent 3 as ego.
pub const GRIDLOCK_SCENE: &str = include_str!("../scenarios/gridlock.json");
pub const SIGNS_TABLE: &str = include_str!("../scenarios/SIGNS.md");

/// One expectation on a single case. Agent indices are 1-based as in the
/// sign table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Claim {
    Positive(usize, usize),
    Negative(usize, usize),
    Zero(usize, usize),
    /// `FeAR[a] > FeAR[b]`.
    Greater((usize, usize), (usize, usize)),
    Collides(usize),
    CollisionFree(usize),
}

/// One expectation relating two cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossClaim {
    /// Entry `(i, j)` is bit-identical in both cases.
    Same(&'static str, &'static str, (usize, usize)),
    /// Every positive off-diagonal entry of the case with obstacles is at
    /// least its obstacle-free counterpart.
    Amplified { free: &'static str, walled: &'static str },
}

pub fn expected_claims(id: &str) -> Vec<Claim> {
    use Claim::*;
    match id {
        "a" => vec![Negative(1, 2), Negative(2, 1), CollisionFree(1), CollisionFree(2)],
        "b" => vec![Positive(1, 2), Negative(2, 1), CollisionFree(1), CollisionFree(2)],
        "c" => vec![Positive(1, 2), Positive(2, 1), Collides(1), Collides(2)],
        "d" => vec![
            Positive(1, 2),
            Positive(3, 2),
            Greater((1, 2), (3, 2)),
            Positive(2, 1),
            Negative(2, 3),
            Collides(2),
            Collides(1),
            CollisionFree(3),
        ],
        "e" => vec![
            Positive(1, 2),
            Positive(3, 2),
            Greater((1, 2), (3, 2)),
            Negative(2, 1),
            Positive(2, 3),
            CollisionFree(1),
            CollisionFree(2),
            CollisionFree(3),
        ],
        "f" => vec![
            Positive(1, 2),
            Positive(3, 2),
            Greater((1, 2), (3, 2)),
            Negative(2, 1),
            Positive(2, 3),
            Collides(2),
            Collides(3),
            CollisionFree(1),
        ],
        "g" => vec![Positive(1, 2), Negative(2, 1), CollisionFree(1), CollisionFree(2)],
        "h" => vec![
            Positive(1, 2),
            Positive(3, 2),
            Negative(2, 1),
            Positive(2, 3),
            CollisionFree(1),
            CollisionFree(2),
            CollisionFree(3),
        ],
        "i" => vec![Positive(1, 2)],
        "j" => vec![Negative(1, 2)],
        "k" => vec![Positive(1, 2), Positive(2, 1), Greater((1, 2), (2, 1)), CollisionFree(1), CollisionFree(2)],
        "l" => vec![Zero(1, 2), Zero(3, 2), Zero(2, 2)],
        _ => Vec::new(),
    }
}

pub fn expected_cross_claims() -> Vec<CrossClaim> {
    use CrossClaim::*;
    vec![
        Same("a", "b", (2, 1)),
        Same("b", "c", (1, 2)),
        Same("d", "e", (1, 2)),
        Same("e", "f", (1, 2)),
        Same("d", "e", (3, 2)),
        Same("e", "f", (3, 2)),
        Amplified { free: "b", walled: "g" },
        Amplified { free: "e", walled: "h" },
    ]
}

impl Claim {
    pub fn describe(&self) -> String {
        match *self {
            Claim::Positive(i, j) => format!("FeAR[{i},{j}] > 0"),
            Claim::Negative(i, j) => format!("FeAR[{i},{j}] < 0"),
            Claim::Zero(i, j) => format!("FeAR[{i},{j}] = 0"),
            Claim::Greater((a, b), (c, d)) => format!("FeAR[{a},{b}] > FeAR[{c},{d}]"),
            Claim::Collides(i) => format!("agent {i} collides"),
            Claim::CollisionFree(i) => format!("agent {i} is collision-free"),
        }
    }

    pub fn holds(&self, m: &FearMatrix, resolved: &ResolvedTrajectories) -> bool {
        let v = |i: usize, j: usize| m.get(i - 1, j - 1);
        match *self {
            Claim::Positive(i, j) => v(i, j) > SIGN_MARGIN,
            Claim::Negative(i, j) => v(i, j) < -SIGN_MARGIN,
            Claim::Zero(i, j) => v(i, j).abs() <= ZERO_TOLERANCE,
            Claim::Greater((a, b), (c, d)) => v(a, b) > v(c, d),
            Claim::Collides(i) => resolved.collided[i - 1],
            Claim::CollisionFree(i) => !resolved.collided[i - 1],
        }
    }
}

impl CrossClaim {
    pub fn describe(&self) -> String {
        match *self {
            CrossClaim::Same(x, y, (i, j)) => format!("FeAR[{i},{j}] identical in {x} and {y}"),
            CrossClaim::Amplified { free, walled } => {
                format!("positive FeAR in {walled} not smaller than in {free}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub scope: String,
    pub claim: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub loaded: LoadedScenario,
    pub mdr: JointAction,
    pub matrix: FearMatrix,
    pub resolved: ResolvedTrajectories,
    pub checks: Vec<CheckOutcome>,
}

pub fn load_golden(file: &GoldenFile) -> Result<LoadedScenario> {
    load_scenario(file.text).map_err(|e| crate::error::invalid("golden scenario", format!("{}: {e}", file.id)))
}

fn evaluate_case(file: &'static GoldenFile) -> Result<CaseOutcome> {
    let loaded = load_golden(file)?;
    let mdr = loaded.mdr.compute(&loaded.scenario)?;
    let matrix = fear_matrix(&loaded.scenario, &loaded.joint, &mdr)?;
    let resolved = resolve_trajectories(&loaded.scenario, &loaded.joint, None)?;
    let checks = expected_claims(file.id)
        .iter()
        .map(|c| CheckOutcome {
            scope: file.id.to_string(),
            claim: c.describe(),
            passed: c.holds(&matrix, &resolved),
        })
        .collect();
    Ok(CaseOutcome {
        id: file.id,
        title: file.title,
        loaded,
        mdr,
        matrix,
        resolved,
        checks,
    })
}

fn cross_check(claim: &CrossClaim, cases: &[CaseOutcome]) -> CheckOutcome {
    let find = |id: &str| cases.iter().find(|c| c.id == id).map(|c| &c.matrix);
    let passed = match *claim {
        CrossClaim::Same(x, y, (i, j)) => match (find(x), find(y)) {
            (Some(a), Some(b)) => a.get(i - 1, j - 1).to_bits() == b.get(i - 1, j - 1).to_bits(),
            _ => false,
        },
        CrossClaim::Amplified { free, walled } => match (find(free), find(walled)) {
            (Some(a), Some(b)) if a.size() == b.size() => (0..a.size()).all(|i| {
                (0..a.size()).all(|j| i == j || b.get(i, j) <= 0.0 || b.get(i, j) >= a.get(i, j))
            }),
            _ => false,
        },
    };
    CheckOutcome {
        scope: "cross".into(),
        claim: claim.describe(),
        passed,
    }
}

/// The three social-force policies of the sensitivity study: yielding without
/// lanes, unyielding with lanes at the current positions, and yielding to the
/// left with lanes offset by 20 m.
pub fn mdr_variants(scenario: &Scenario, base: &SocialForceConfig) -> [(&'static str, SocialForceConfig); 3] {
    let ys: Vec<f64> = scenario.agents.iter().map(|a| a.position.y).collect();
    let left = |i: usize| {
        let heading = scenario.agents[i].velocity.x;
        if heading < 0.0 {
            ys[i] - 20.0
        } else {
            ys[i] + 20.0
        }
    };
    let yielding = SocialForceConfig {
        lanes: Vec::new(),
        ..base.clone()
    };
    let unyielding = SocialForceConfig {
        lanes: ys.iter().map(|&y| Some(LaneSpec::horizontal(y))).collect(),
        k_lane: 1.0,
        ..base.clone()
    };
    let yield_left = SocialForceConfig {
        lanes: (0..ys.len()).map(|i| Some(LaneSpec::horizontal(left(i)))).collect(),
        k_lane: 3.0,
        ..base.clone()
    };
    [("B", yielding), ("C", unyielding), ("D", yield_left)]
}

#[derive(Debug, Clone)]
pub struct MdrCell {
    pub joint_label: &'static str,
    pub mdr_label: &'static str,
    pub matrix: FearMatrix,
}

#[derive(Debug, Clone)]
pub struct MdrStudy {
    pub scenario: Scenario,
    /// Joint action produced by each policy, labelled.
    pub actions: Vec<(&'static str, JointAction)>,
    pub cells: Vec<MdrCell>,
    pub checks: Vec<CheckOutcome>,
}

pub fn load_mdr_scene() -> Result<(Scenario, SocialForceConfig)> {
    let loaded = load_scenario(MDR_SCENE).map_err(|e| crate::error::invalid("mdr scene", e.to_string()))?;
    match loaded.mdr {
        MdrSpec::SocialForce(cfg) => Ok((loaded.scenario, cfg)),
        MdrSpec::Zero => Err(crate::error::invalid("mdr scene", "expected a social-force policy")),
    }
}

pub fn run_mdr_study() -> Result<MdrStudy> {
    let (scenario, base) = load_mdr_scene()?;
    let actions = mdr_variants(&scenario, &base)
        .into_iter()
        .map(|(label, cfg)| Ok((label, social_force_mdr(&scenario, &cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(9);
    let mut checks = Vec::new();
    for (jl, joint) in &actions {
        for (ml, mdr) in &actions {
            let matrix = fear_matrix(&scenario, joint, mdr)?;
            if jl == ml {
                let k = matrix.size();
                let zero = (0..k).all(|i| (0..k).all(|j| i == j || matrix.get(i, j) == 0.0));
                checks.push(CheckOutcome {
                    scope: format!("A_{jl}/mu_{ml}"),
                    claim: "all off-diagonal FeAR = 0".into(),
                    passed: zero,
                });
            }
            cells.push(MdrCell {
                joint_label: jl,
                mdr_label: ml,
                matrix,
            });
        }
    }
    Ok(MdrStudy {
        scenario,
        actions,
        cells,
        checks,
    })
}

pub struct CaseStudyReport {
    pub cases: Vec<CaseOutcome>,
    pub cross: Vec<CheckOutcome>,
    pub mdr: MdrStudy,
}

impl CaseStudyReport {
    pub fn checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.cases
            .iter()
            .flat_map(|c| c.checks.iter())
            .chain(self.cross.iter())
            .chain(self.mdr.checks.iter())
    }

    pub fn passed(&self) -> bool {
        self.checks().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks().filter(|c| !c.passed).collect()
    }

    pub fn matrix_count(&self) -> usize {
        self.cases.len() + self.mdr.cells.len()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Case-study sign report\n\n");
        for case in &self.cases {
            let _ = writeln!(out, "## Case {}: {}\n", case.id, case.title);
            write_matrix(&mut out, &case.matrix);
            let _ = writeln!(out);
            let dt = case.loaded.scenario.grid.dt();
            for (i, f) in case.resolved.freeze_interval.iter().enumerate() {
                if let Some(t) = f {
                    let _ = writeln!(out, "Agent {} froze at t = {:.2} s.", i + 1, (*t - 1) as f64 * dt);
                }
            }
            let _ = writeln!(out);
            for c in &case.checks {
                let _ = writeln!(out, "- [{}] {}", mark(c.passed), c.claim);
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "## Cross-case checks\n");
        for c in &self.cross {
            let _ = writeln!(out, "- [{}] {}", mark(c.passed), c.claim);
        }
        let _ = writeln!(out, "\n## Move-de-rigueur sensitivity\n");
        for cell in &self.mdr.cells {
            let _ = writeln!(out, "### A = {}, mu = {}\n", cell.joint_label, cell.mdr_label);
            write_matrix(&mut out, &cell.matrix);
            let _ = writeln!(out);
        }
        for c in &self.mdr.checks {
            let _ = writeln!(out, "- [{}] {}: {}", mark(c.passed), c.scope, c.claim);
        }
        let failures = self.failures();
        let _ = writeln!(
            out,
            "\n{} matrices, {} checks, {} failed",
            self.matrix_count(),
            self.checks().count(),
            failures.len()
        );
        out
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "x"
    } else {
        " "
    }
}

fn write_matrix(out: &mut String, m: &FearMatrix) {
    let k = m.size();
    out.push_str("| actor \\ affected |");
    for j in 1..=k {
        let _ = write!(out, " {j} |");
    }
    out.push_str("\n|---|");
    for _ in 0..k {
        out.push_str("---|");
    }
    out.push('\n');
    for i in 0..k {
        let _ = write!(out, "| {} |", i + 1);
        for j in 0..k {
            let _ = write!(out, " {} |", crate::io::fmt6(m.get(i, j)));
        }
        out.push('\n');
    }
}

/// Runs all golden cases, the cross-case checks and the 3 x 3 sensitivity grid.
pub fn run_case_studies() -> Result<CaseStudyReport> {
    let cases = GOLDEN.iter().map(evaluate_case).collect::<Result<Vec<_>>>()?;
    let cross = expected_cross_claims().iter().map(|c| cross_check(c, &cases)).collect();
    let mdr = run_mdr_study()?;
    Ok(CaseStudyReport { cases, cross, mdr })
}

/// Looks up one golden file by id.
pub fn golden(id: &str) -> Result<&'static GoldenFile> {
    GOLDEN
        .iter()
        .find(|g| g.id == id)
        .ok_or_else(|| FearError::InvalidParameter {
            name: "case",
            reason: format!("unknown case {id:?}"),
        })
}
