// SPDX-License-Identifier: Apache-2.0

mod common;

use std::time::Duration;

use common::Small;
use proptest::prelude::*;
use sfq_clocking::formulation::{formulate_mode, Mode};
use sfq_clocking::dag::build_dag;
use sfq_clocking::generate::random_netlist;
use sfq_clocking::solver::model::{Model, Sense};
use sfq_clocking::solver::{
    export_lp_format, round_solution, solve_ilp, solve_lp, solve_model_ilp, solve_model_lp,
    IlpOptions, SolveStatus, SolverError,
};

fn arb_small() -> impl Strategy<Value = Small> {
    (1usize..=6).prop_flat_map(|n| {
        let row = (
            prop::collection::vec(-3i64..=3, n),
            prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)],
            -6i64..=12,
        );
        (
            prop::collection::vec(0i64..=8, n),
            prop::collection::vec(-5i64..=5, n),
            prop::collection::vec(row, 0..=4),
        )
            .prop_map(|(upper, cost, rows)| Small { upper, cost, rows })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ilp_matches_enumeration(s in arb_small()) {
        let model = s.to_model();
        let ilp = solve_model_ilp(&model, &IlpOptions::default()).unwrap();
        let lp = solve_model_lp(&model).unwrap();
        match s.brute_force() {
            None => {
                prop_assert_eq!(ilp.status, SolveStatus::Infeasible);
            }
            Some(best) => {
                prop_assert_eq!(ilp.status, SolveStatus::Optimal);
                prop_assert!((ilp.objective - best as f64).abs() < 1e-6, "ilp {} brute {}", ilp.objective, best);
                prop_assert_eq!(model.max_violation(&ilp.values) <= 1e-6, true);
                prop_assert_eq!(lp.status, SolveStatus::Optimal);
                prop_assert!(lp.objective <= ilp.objective + 1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// LP bound, ILP optimum and the recounted rounded-LP cost are ordered.
    #[test]
    fn lp_ilp_rounded_order(seed in any::<u64>(), regs in 0usize..3, mode_ix in 0usize..4, n in 1u32..5) {
        let mode = Mode::ALL[mode_ix];
        let n = match mode {
            Mode::Fpb => 1,
            Mode::HoldSafe => n.max(2),
            _ => n,
        };
        let net = random_netlist("p", seed, 3, 14, regs, 2);
        let dag = build_dag(&net).unwrap();
        let inst = formulate_mode(&dag, mode, n, None).unwrap();
        let lp = solve_lp(&inst).unwrap();
        let rounded = round_solution(&inst, &lp).unwrap();
        let warm = inst.integral_point(&rounded);
        let rounded_cost = inst.model().objective_value(&warm);
        let opts = IlpOptions { time_limit: Duration::from_secs(30), node_limit: None, warm_start: Some(warm) };
        let ilp = solve_ilp(&inst, &opts).unwrap();
        prop_assert_eq!(ilp.status, SolveStatus::Optimal);
        prop_assert!(lp.objective <= ilp.objective + 1e-6);
        prop_assert!(ilp.objective <= rounded_cost + 1e-6);
        prop_assert!(ilp.bound <= ilp.objective + 1e-6);
    }

    /// A warm start never makes the result worse than a cold start.
    #[test]
    fn warm_start_never_worse(seed in any::<u64>()) {
        let net = random_netlist("w", seed, 4, 30, 1, 3);
        let dag = build_dag(&net).unwrap();
        let inst = formulate_mode(&dag, Mode::Baseline, 2, None).unwrap();
        let lp = solve_lp(&inst).unwrap();
        let warm = inst.integral_point(&round_solution(&inst, &lp).unwrap());
        let base = IlpOptions { time_limit: Duration::from_secs(30), node_limit: Some(200), warm_start: None };
        let cold = solve_ilp(&inst, &base).unwrap();
        let hot = solve_ilp(&inst, &IlpOptions { warm_start: Some(warm), ..base }).unwrap();
        prop_assert!(hot.has_values());
        if cold.has_values() {
            prop_assert!(hot.objective <= cold.objective + 1e-6);
        }
    }
}

#[test]
fn infeasible_warm_start_is_rejected() {
    let mut m = Model::new();
    let x = m.add_var("x", 0.0, 4.0, true);
    m.set_objective(x, 1.0);
    m.add_row("r", vec![(x, 1.0)], Sense::Ge, 2.5);
    let opts = IlpOptions {
        warm_start: Some(vec![0.0]),
        ..IlpOptions::default()
    };
    assert!(matches!(solve_model_ilp(&m, &opts), Err(SolverError::InvalidWarmStart(_))));
    let s = solve_model_ilp(&m, &IlpOptions::default()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.objective, 3.0);
}

#[test]
fn node_limit_returns_incumbent() {
    let net = random_netlist("lim", 3, 8, 90, 0, 6);
    let dag = build_dag(&net).unwrap();
    let inst = formulate_mode(&dag, Mode::Baseline, 3, None).unwrap();
    let lp = solve_lp(&inst).unwrap();
    let warm = inst.integral_point(&round_solution(&inst, &lp).unwrap());
    let opts = IlpOptions {
        time_limit: Duration::from_secs(60),
        node_limit: Some(1),
        warm_start: Some(warm),
    };
    let s = solve_ilp(&inst, &opts).unwrap();
    assert!(matches!(s.status, SolveStatus::Optimal | SolveStatus::Incumbent));
    assert!(s.has_values());
    assert!(s.stats.branch_nodes <= 1);
}

#[test]
fn lp_export_lists_every_row_and_integer() {
    let net = random_netlist("x", 9, 3, 10, 1, 2);
    let dag = build_dag(&net).unwrap();
    let inst = formulate_mode(&dag, Mode::Fanout, 2, None).unwrap();
    let text = export_lp_format(inst.model(), true);
    for row in &inst.model().rows {
        assert!(text.contains(&format!(" {}:", row.name)), "missing row {}", row.name);
    }
    let general = text.split("General").nth(1).expect("General section");
    for v in &inst.model().vars {
        assert!(general.contains(&v.name), "{} not marked integer", v.name);
    }
    assert!(!export_lp_format(inst.model(), false).contains("General"));
    assert!(text.trim_end().ends_with("End"));
}
