//! Root cutting-plane loop and a small best-bound branch-and-bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::detect::with_detected_products;
use crate::error::SolveError;
use crate::model::{validate, Problem, VarId};
use crate::separate::{
    separate_rlt, Cut, SeparationCounters, SeparationData, SeparationMode, SeparationSettings,
    EPS_CUT,
};
use crate::simplex::{lp_from_problem, LpSolution, LpSolver, LpStatus};

/// Tolerance for integrality and for product relations at incumbents.
pub const EPS_INT: f64 = 1e-6;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RltMode {
    Off,
    /// cuts from explicit relations only
    Erlt,
    /// cuts from explicit and detected relations
    Ierlt,
}

impl RltMode {
    pub fn name(self) -> &'static str {
        match self {
            RltMode::Off => "off",
            RltMode::Erlt => "erlt",
            RltMode::Ierlt => "ierlt",
        }
    }

    pub fn parse(s: &str) -> Option<RltMode> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Some(RltMode::Off),
            "erlt" => Some(RltMode::Erlt),
            "ierlt" => Some(RltMode::Ierlt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub max_unknown_terms: usize,
    pub root_rounds: usize,
    pub node_rounds: usize,
    pub sep_frequency_nodes: usize,
    pub detect_implicit: bool,
    pub use_marking: bool,
    pub use_projection: bool,
    pub rlt_mode: RltMode,
    pub time_limit_s: f64,
    pub max_cuts_per_round: usize,
    /// nodes processed after the root
    pub node_limit: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            max_unknown_terms: 20,
            root_rounds: 10,
            node_rounds: 1,
            sep_frequency_nodes: 10,
            detect_implicit: false,
            use_marking: true,
            use_projection: true,
            rlt_mode: RltMode::Erlt,
            time_limit_s: f64::INFINITY,
            max_cuts_per_round: 100,
            node_limit: 100_000,
        }
    }
}

impl Settings {
    pub fn for_mode(mode: RltMode) -> Self {
        Settings {
            rlt_mode: mode,
            detect_implicit: mode == RltMode::Ierlt,
            ..Settings::default()
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.rlt_mode == RltMode::Ierlt && !self.detect_implicit {
            return Err("rlt_mode ierlt requires detect_implicit".into());
        }
        if self.time_limit_s.is_nan() || self.time_limit_s < 0.0 {
            return Err(format!(
                "time limit must be nonnegative, got {}",
                self.time_limit_s
            ));
        }
        if self.sep_frequency_nodes == 0 && self.node_rounds > 0 && self.rlt_mode != RltMode::Off {
            return Err("sep_frequency_nodes must be positive when node separation is on".into());
        }
        Ok(())
    }

    fn separation(&self) -> SeparationSettings {
        SeparationSettings {
            max_unknown_terms: self.max_unknown_terms,
            eps_cut: EPS_CUT,
        }
    }

    fn mode(&self) -> SeparationMode {
        if self.use_marking {
            SeparationMode::Marking
        } else {
            SeparationMode::Baseline
        }
    }
}

/// Keeps the `max_cuts` cuts of highest efficacy; ties go to the smaller cut id.
pub fn select_cuts(mut cuts: Vec<Cut>, max_cuts: usize) -> Vec<Cut> {
    cuts.sort_by(|a, b| {
        b.efficacy()
            .total_cmp(&a.efficacy())
            .then_with(|| a.id().cmp(&b.id()))
    });
    cuts.truncate(max_cuts);
    cuts
}

#[derive(Clone, Debug, Default)]
pub struct RootReport {
    /// `(round, dual bound)`, round 0 being the initial relaxation
    pub bound_trajectory: Vec<(usize, f64)>,
    pub cuts_added: Vec<usize>,
    pub final_bound: f64,
    pub lp_iterations: usize,
    pub lp_solves: usize,
    pub separation_time: Duration,
    pub detection_time: Duration,
    pub relations_detected: usize,
    pub counters: SeparationCounters,
    /// every cut added to the LP, in order
    pub cuts: Vec<Cut>,
    /// final root LP point
    pub x: Vec<f64>,
}

impl RootReport {
    pub fn initial_bound(&self) -> f64 {
        self.bound_trajectory.first().map_or(f64::NAN, |b| b.1)
    }
}

/// Problem, LP and separation structures shared by the root loop and the tree.
struct Engine {
    problem: Problem,
    data: SeparationData,
    solver: LpSolver,
    settings: Settings,
    start: Instant,
}

impl Engine {
    fn new(problem: &Problem, settings: &Settings) -> Result<(Engine, RootReport), SolveError> {
        settings.check().map_err(|m| {
            SolveError::InvalidProblem(vec![crate::model::Violation {
                location: crate::model::Location::Objective,
                message: m,
            }])
        })?;
        let violations = validate(problem);
        if !violations.is_empty() {
            return Err(SolveError::InvalidProblem(violations));
        }
        let start = Instant::now();
        let mut report = RootReport::default();
        let problem = if settings.detect_implicit {
            let t = Instant::now();
            let (p, n) = with_detected_products(problem);
            report.detection_time = t.elapsed();
            report.relations_detected = n;
            p
        } else {
            problem.clone()
        };
        let data = SeparationData::new(&problem);
        let solver = LpSolver::new(lp_from_problem(&problem, true));
        Ok((
            Engine {
                problem,
                data,
                solver,
                settings: settings.clone(),
                start,
            },
            report,
        ))
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed().as_secs_f64() > self.settings.time_limit_s
    }

    fn solve(&mut self, report: &mut RootReport) -> LpSolution {
        let sol = self.solver.solve();
        report.lp_iterations += sol.iterations;
        report.lp_solves += 1;
        sol
    }

    /// One separation round at `x`; returns the cuts added.
    fn separate_round(&mut self, x: &[f64], report: &mut RootReport) -> usize {
        let t = Instant::now();
        let ctx = self.data.context(&self.problem, self.settings.separation());
        let res = separate_rlt(&ctx, x, self.settings.mode(), self.settings.use_projection);
        let chosen = select_cuts(res.cuts, self.settings.max_cuts_per_round);
        report.separation_time += t.elapsed();
        report.counters += res.counters;
        let n = chosen.len();
        self.solver.add_rows(chosen.iter().map(Cut::to_lp_row));
        report.cuts.extend(chosen);
        n
    }

    fn root(&mut self, report: &mut RootReport) -> Result<LpSolution, SolveError> {
        let mut sol = self.solve(report);
        check_status(&sol, 0)?;
        let mut bound = sol.objective;
        report.bound_trajectory.push((0, bound));
        if self.settings.rlt_mode != RltMode::Off {
            for round in 1..=self.settings.root_rounds {
                if self.out_of_time() {
                    break;
                }
                let x = sol.x.clone();
                let added = self.separate_round(&x, report);
                if added == 0 {
                    break;
                }
                report.cuts_added.push(added);
                sol = self.solve(report);
                check_status(&sol, round)?;
                bound = bound.max(sol.objective);
                report.bound_trajectory.push((round, bound));
            }
        }
        report.final_bound = bound;
        report.x = sol.x.clone();
        Ok(sol)
    }
}

fn check_status(sol: &LpSolution, round: usize) -> Result<(), SolveError> {
    match sol.status {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible => Err(SolveError::Infeasible { round }),
        LpStatus::Unbounded => Err(SolveError::Unbounded { round }),
        LpStatus::IterationLimit => Err(SolveError::IterationLimit { round }),
    }
}

/// Runs the root cutting-plane loop.
pub fn solve_root(problem: &Problem, settings: &Settings) -> Result<RootReport, SolveError> {
    let (mut engine, mut report) = Engine::new(problem, settings)?;
    engine.root(&mut report)?;
    Ok(report)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
    /// Some integral node violated a product relation that branching on
    /// binaries cannot repair; the bounds remain valid but the gap may be open.
    Unresolved,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::Unresolved => "unresolved",
        }
    }

    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Infeasible)
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub primal_bound: f64,
    pub dual_bound: f64,
    /// nodes processed, root included
    pub nodes: usize,
    pub lp_iterations: usize,
    pub separation_time: Duration,
    pub wall_time: Duration,
    pub incumbent: Option<Vec<f64>>,
    pub unresolved_nodes: usize,
    pub cuts_added: usize,
    pub root: RootReport,
}

struct Node {
    bound: f64,
    id: usize,
    fixings: Vec<(VarId, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// max-heap order: smaller bound first, then older node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Tree {
    incumbent: Option<(f64, Vec<f64>)>,
    open: BinaryHeap<Node>,
    next_id: usize,
    unresolved: usize,
    unresolved_bound: f64,
}

impl Tree {
    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.0)
    }

    /// Prunes, branches on, or accepts the node solution `sol`.
    fn handle(&mut self, sol: &LpSolution, fixings: &[(VarId, f64)], problem: &Problem) {
        if prunable(sol.objective, self.incumbent_value()) {
            return;
        }
        match branching_candidate(problem, &sol.x) {
            Some(v) => {
                for val in [0.0, 1.0] {
                    let mut f = fixings.to_vec();
                    f.push((v, val));
                    self.open.push(Node {
                        bound: sol.objective,
                        id: self.next_id,
                        fixings: f,
                    });
                    self.next_id += 1;
                }
            }
            None if relations_hold(problem, &sol.x) => {
                self.incumbent = Some((sol.objective, sol.x.clone()))
            }
            None => {
                self.unresolved += 1;
                self.unresolved_bound = self.unresolved_bound.min(sol.objective);
            }
        }
    }
}

/// Most fractional binary, lowest id on ties.
fn branching_candidate(problem: &Problem, x: &[f64]) -> Option<VarId> {
    let mut best: Option<(VarId, f64)> = None;
    for v in problem.binaries() {
        let f = x[v.index()] - x[v.index()].floor();
        let frac = f.min(1.0 - f);
        if frac > EPS_INT && best.is_none_or(|(_, b)| frac > b) {
            best = Some((v, frac));
        }
    }
    best.map(|b| b.0)
}

fn relations_hold(problem: &Problem, x: &[f64]) -> bool {
    problem.relations.iter().all(|r| r.holds(x, EPS_INT))
}

fn prunable(bound: f64, incumbent: f64) -> bool {
    bound >= incumbent - 1e-9 * (1.0 + incumbent.abs())
}

/// Best-bound branch-and-bound on the binaries with RLT separation at the root
/// and every `sep_frequency_nodes`-th node.
pub fn branch_and_bound(problem: &Problem, settings: &Settings) -> Result<SolveReport, SolveError> {
    let (mut engine, mut root) = Engine::new(problem, settings)?;
    let start = engine.start;
    let root_sol = match engine.root(&mut root) {
        Ok(s) => s,
        Err(SolveError::Infeasible { .. }) => {
            return Ok(SolveReport {
                status: SolveStatus::Infeasible,
                primal_bound: f64::INFINITY,
                dual_bound: f64::INFINITY,
                nodes: 1,
                lp_iterations: root.lp_iterations,
                separation_time: root.separation_time,
                wall_time: start.elapsed(),
                incumbent: None,
                unresolved_nodes: 0,
                cuts_added: root.cuts.len(),
                root,
            })
        }
        Err(e) => return Err(e),
    };

    let globals: Vec<(f64, f64)> = engine
        .problem
        .variables
        .iter()
        .map(|v| (v.lb, v.ub))
        .collect();
    let mut stats = root.clone();
    stats.cuts.clear();
    let mut tree = Tree {
        incumbent: None,
        open: BinaryHeap::new(),
        next_id: 1,
        unresolved: 0,
        unresolved_bound: f64::INFINITY,
    };
    let mut nodes = 1usize;
    let mut status = SolveStatus::Optimal;
    tree.handle(&root_sol, &[], &engine.problem);

    while let Some(node) = tree.open.pop() {
        let inc_val = tree.incumbent_value();
        if prunable(node.bound, inc_val) {
            continue;
        }
        if nodes > settings.node_limit {
            tree.open.push(node);
            status = SolveStatus::NodeLimit;
            break;
        }
        if engine.out_of_time() {
            tree.open.push(node);
            status = SolveStatus::TimeLimit;
            break;
        }
        nodes += 1;
        for (k, &(lb, ub)) in globals.iter().enumerate() {
            if engine.problem.variables[k].is_binary() {
                engine.solver.set_col_bounds(k, lb, ub);
            }
        }
        for &(v, val) in &node.fixings {
            engine.solver.set_col_bounds(v.index(), val, val);
        }
        let mut sol = engine.solve(&mut stats);
        let separate_here = settings.rlt_mode != RltMode::Off
            && settings.node_rounds > 0
            && settings.sep_frequency_nodes > 0
            && (nodes - 1).is_multiple_of(settings.sep_frequency_nodes);
        if separate_here && sol.status == LpStatus::Optimal {
            for _ in 0..settings.node_rounds {
                let x = sol.x.clone();
                let mut cuts_report = RootReport::default();
                let added = engine.separate_round(&x, &mut cuts_report);
                stats.separation_time += cuts_report.separation_time;
                stats.counters += cuts_report.counters;
                stats.cuts.extend(cuts_report.cuts);
                if added == 0 {
                    break;
                }
                sol = engine.solve(&mut stats);
                if sol.status != LpStatus::Optimal {
                    break;
                }
            }
        }
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded | LpStatus::IterationLimit => {
                tree.unresolved += 1;
                tree.unresolved_bound = tree.unresolved_bound.min(node.bound);
                continue;
            }
        }
        let bound = sol.objective.max(node.bound);
        let sol = LpSolution {
            objective: bound,
            ..sol
        };
        tree.handle(&sol, &node.fixings, &engine.problem);
    }

    let Tree {
        incumbent,
        open,
        unresolved,
        unresolved_bound,
        ..
    } = tree;
    let open_bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let primal = incumbent.as_ref().map_or(f64::INFINITY, |i| i.0);
    let mut dual = open_bound.min(unresolved_bound).min(primal);
    if status == SolveStatus::Optimal {
        if unresolved > 0 && unresolved_bound < primal - 1e-9 * (1.0 + primal.abs()) {
            status = SolveStatus::Unresolved;
        } else if incumbent.is_none() {
            status = if unresolved > 0 {
                SolveStatus::Unresolved
            } else {
                SolveStatus::Infeasible
            };
        } else {
            dual = primal;
        }
    }
    if !open.is_empty() || status != SolveStatus::Optimal {
        dual = dual.max(root.final_bound.min(primal));
    }
    Ok(SolveReport {
        status,
        primal_bound: primal,
        dual_bound: dual,
        nodes,
        lp_iterations: stats.lp_iterations,
        separation_time: stats.separation_time,
        wall_time: start.elapsed(),
        incumbent: incumbent.map(|i| i.1),
        unresolved_nodes: unresolved,
        cuts_added: root.cuts.len() + stats.cuts.len(),
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::AffineExpr;
    use crate::model::{LinearRow, ProductRelation, RelationSense, Variable};

    fn worked() -> Problem {
        let mut p = Problem::default();
        let x1 = p.add_variable(Variable::continuous("x1", 0.0, 1.0));
        let x2 = p.add_variable(Variable::continuous("x2", 0.0, 1.0));
        let w = p.add_variable(Variable::continuous("w", 0.0, 1.0));
        p.add_row(LinearRow::le("r", [(x1, 1.0), (x2, 1.0)], 1.0));
        p.add_relation(ProductRelation::explicit(x1, x2, w, RelationSense::Eq));
        p.set_objective([(w, -1.0)]);
        p
    }

    #[test]
    fn worked_root_improves_to_quarter() {
        let r = solve_root(&worked(), &Settings::for_mode(RltMode::Erlt)).unwrap();
        assert!((r.initial_bound() + 0.5).abs() < 1e-9);
        assert!(
            (r.bound_trajectory[1].1 + 0.25).abs() < 1e-9,
            "{:?}",
            r.bound_trajectory
        );
        assert!(r
            .cuts
            .iter()
            .any(|c| c.expr == AffineExpr::var(VarId(2), 1.0) && (c.rhs - 0.25).abs() < 1e-9));
    }

    #[test]
    fn off_mode_keeps_mccormick_bound() {
        let r = solve_root(&worked(), &Settings::for_mode(RltMode::Off)).unwrap();
        assert_eq!(r.bound_trajectory.len(), 1);
        assert!((r.final_bound + 0.5).abs() < 1e-9);
        assert!(r.cuts.is_empty());
    }

    #[test]
    fn no_products_means_one_lp() {
        let mut p = Problem::default();
        let x = p.add_variable(Variable::continuous("x", 0.0, 1.0));
        p.add_row(LinearRow::le("r", [(x, 1.0)], 0.5));
        p.set_objective([(x, -1.0)]);
        let r = solve_root(&p, &Settings::for_mode(RltMode::Ierlt)).unwrap();
        assert_eq!(r.lp_solves, 1);
        assert!(r.cuts.is_empty());
    }

    #[test]
    fn select_ranks_by_efficacy_then_id() {
        let r = solve_root(&worked(), &Settings::for_mode(RltMode::Erlt)).unwrap();
        let mut a = r.cuts[0].clone();
        let mut b = a.clone();
        a.violation = 0.2;
        a.expr = AffineExpr::var(VarId(2), 1.0);
        b.violation = 0.1;
        b.expr = AffineExpr::var(VarId(2), 1.0);
        let kept = select_cuts(vec![b.clone(), a.clone()], 1);
        assert_eq!(kept[0].violation, 0.2);
        b.violation = 0.2;
        b.provenance.id.row = crate::model::RowId(5);
        let kept = select_cuts(vec![b, a], 2);
        assert_eq!(kept[0].provenance.id.row, crate::model::RowId(0));
    }

    #[test]
    fn knapsack_matches_enumeration() {
        let values = [5.0, 4.0, 3.0, 7.0, 1.0];
        let weights = [4.0, 3.0, 2.0, 5.0, 1.0];
        let cap = 9.0;
        let mut p = Problem::default();
        let vs: Vec<_> = (0..5)
            .map(|k| p.add_variable(Variable::binary(format!("b{k}"))))
            .collect();
        p.add_row(LinearRow::le(
            "cap",
            vs.iter().zip(weights).map(|(&v, w)| (v, w)),
            cap,
        ));
        p.set_objective(vs.iter().zip(values).map(|(&v, c)| (v, -c)));
        let mut best = 0.0f64;
        for mask in 0..32u32 {
            let (mut w, mut val) = (0.0, 0.0);
            for k in 0..5 {
                if mask >> k & 1 == 1 {
                    w += weights[k];
                    val += values[k];
                }
            }
            if w <= cap {
                best = best.max(val);
            }
        }
        let r = branch_and_bound(&p, &Settings::for_mode(RltMode::Off)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal_bound + best).abs() < 1e-9);
        assert!((r.dual_bound - r.primal_bound).abs() < 1e-9);
    }

    #[test]
    fn binary_times_continuous() {
        let mut p = Problem::default();
        let x1 = p.add_variable(Variable::binary("x1"));
        let x2 = p.add_variable(Variable::continuous("x2", 0.0, 1.0));
        let w = p.add_variable(Variable::continuous("w", 0.0, 1.0));
        p.add_row(LinearRow::le("r", [(x1, 1.0), (x2, 1.0)], 1.0));
        p.add_relation(ProductRelation::explicit(x1, x2, w, RelationSense::Eq));
        p.set_objective([(w, -1.0)]);
        for mode in [RltMode::Off, RltMode::Erlt, RltMode::Ierlt] {
            let r = branch_and_bound(&p, &Settings::for_mode(mode)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!(r.primal_bound.abs() < 1e-9, "{mode:?}: {}", r.primal_bound);
            let x = r.incumbent.unwrap();
            assert!((x[2] - x[0] * x[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn node_limit_zero_stops_at_root() {
        // LP optimum is fractional
        let mut p = Problem::default();
        let vs: Vec<_> = (0..3)
            .map(|k| p.add_variable(Variable::binary(format!("b{k}"))))
            .collect();
        p.add_row(LinearRow::le("r", vs.iter().map(|&v| (v, 2.0)), 3.0));
        p.set_objective(vs.iter().map(|&v| (v, -1.0)));
        let settings = Settings {
            node_limit: 0,
            ..Settings::for_mode(RltMode::Off)
        };
        let r = branch_and_bound(&p, &settings).unwrap();
        assert_eq!(r.status, SolveStatus::NodeLimit);
        assert_eq!(r.nodes, 1);
        assert!((r.dual_bound - r.root.final_bound).abs() < 1e-12);
    }

    #[test]
    fn ierlt_requires_detection() {
        let settings = Settings {
            detect_implicit: false,
            ..Settings::for_mode(RltMode::Ierlt)
        };
        assert!(solve_root(&worked(), &settings).is_err());
    }
}
