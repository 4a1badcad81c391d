//! Randomized cross-checks of the LP engine against an independently coded
//! reference simplex, plus the incremental-resolve and duality invariants.

mod common;

use common::reference_lp::{solve_reference, RefStatus};
use hedgebounds::lp::{LinearProgram, LpStatus, Relation, Row};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_feasible_lp(rng: &mut ChaCha20Rng) -> LinearProgram {
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=12);
    let mut bounds = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    for _ in 0..n {
        let (lo, hi) = match rng.gen_range(0..4) {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (0.0, f64::INFINITY),
            2 => (f64::NEG_INFINITY, rng.gen_range(0.0..5.0)),
            _ => {
                let lo = rng.gen_range(-3.0..0.0);
                (lo, lo + rng.gen_range(0.5..4.0))
            }
        };
        let a = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => rng.gen_range(lo..hi),
            (true, false) => lo + rng.gen_range(0.0..2.0),
            (false, true) => hi - rng.gen_range(0.0..2.0),
            (false, false) => rng.gen_range(-2.0..2.0),
        };
        bounds.push((lo, hi));
        anchor.push(a);
    }
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut lp = LinearProgram::new(objective, bounds);
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let at_anchor: f64 = coeffs.iter().zip(&anchor).map(|(a, x)| a * x).sum();
        // rhs chosen so the anchor point satisfies the row with slack.
        let (rel, rhs) = match rng.gen_range(0..3) {
            0 => (Relation::Le, at_anchor + rng.gen_range(0.0..2.0)),
            1 => (Relation::Ge, at_anchor - rng.gen_range(0.0..2.0)),
            _ => (Relation::Eq, at_anchor),
        };
        lp.add_row(coeffs, rel, rhs);
    }
    lp
}

#[test]
fn matches_reference_solver_on_random_programs() {
    let mut rng = ChaCha20Rng::seed_from_u64(20240501);
    let mut optimal = 0;
    let mut unbounded = 0;
    for case in 0..300 {
        let lp = random_feasible_lp(&mut rng);
        let mine = lp.solve().unwrap();
        let reference = solve_reference(&lp);
        match (mine.status, reference.status) {
            (LpStatus::Optimal, RefStatus::Optimal) => {
                optimal += 1;
                let tol = 1e-6 * (1.0 + mine.objective.abs());
                assert!(
                    (mine.objective - reference.objective).abs() <= tol,
                    "case {case}: objective {} vs reference {}\n{}",
                    mine.objective,
                    reference.objective,
                    lp.dump()
                );
            }
            (LpStatus::Unbounded, RefStatus::Unbounded) => unbounded += 1,
            (a, b) => panic!("case {case}: status {a:?} vs reference {b:?}\n{}", lp.dump()),
        }
    }
    // The generator should exercise both outcomes.
    assert!(optimal > 100, "only {optimal} optimal cases");
    assert!(unbounded > 10, "only {unbounded} unbounded cases");
}

#[test]
fn solutions_satisfy_feasibility_and_duality_bounds() {
    let mut rng = ChaCha20Rng::seed_from_u64(77_001);
    let mut checked = 0;
    for _ in 0..300 {
        let lp = random_feasible_lp(&mut rng);
        let sol = lp.solve().unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        checked += 1;
        let rhs_inf = lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        let feas_tol = 1e-8 * (1.0 + rhs_inf);
        for row in &lp.rows {
            let lhs: f64 = row.coeffs.iter().zip(&sol.x).map(|(a, v)| a * v).sum();
            match row.relation {
                Relation::Ge => assert!(lhs >= row.rhs - feas_tol, "{lhs} < {}", row.rhs),
                Relation::Le => assert!(lhs <= row.rhs + feas_tol, "{lhs} > {}", row.rhs),
                Relation::Eq => assert!((lhs - row.rhs).abs() <= feas_tol),
            }
        }
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            assert!(sol.x[j] >= lo - feas_tol && sol.x[j] <= hi + feas_tol);
        }
        // Duality gap via the bound multipliers implied by reduced costs.
        let mut dual_obj: f64 = sol.duals.iter().zip(&lp.rows).map(|(y, r)| y * r.rhs).sum();
        for j in 0..lp.num_vars() {
            let z = lp.objective[j]
                - lp.rows.iter().zip(&sol.duals).map(|(r, y)| r.coeffs[j] * y).sum::<f64>();
            let (lo, hi) = lp.bounds[j];
            if z > 1e-9 {
                assert!(lo.is_finite(), "positive reduced cost on var {j} without lower bound");
                dual_obj += z * lo;
            } else if z < -1e-9 {
                assert!(hi.is_finite(), "negative reduced cost on var {j} without upper bound");
                dual_obj += z * hi;
            }
        }
        let gap_tol = 1e-6 * (1.0 + sol.objective.abs());
        assert!(
            (sol.objective - dual_obj).abs() <= gap_tol,
            "duality gap {} vs {}",
            sol.objective,
            dual_obj
        );
    }
    assert!(checked > 100);
}

#[test]
fn extend_and_resolve_equals_scratch_on_random_programs() {
    let mut rng = ChaCha20Rng::seed_from_u64(threading_seed());
    for case in 0..120 {
        let mut lp = random_feasible_lp(&mut rng);
        if lp.solve().unwrap().status != LpStatus::Optimal {
            continue;
        }
        let extra: Vec<Row> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let coeffs: Vec<f64> = (0..lp.num_vars()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                Row::new(coeffs, Relation::Ge, rng.gen_range(-4.0..1.0))
            })
            .collect();
        let mut scratch = lp.clone();
        scratch.rows.extend(extra.clone());
        let scratch_sol = scratch.solve().unwrap();
        let ext_sol = lp.extend_and_resolve(extra).unwrap();
        assert_eq!(ext_sol.status, scratch_sol.status, "case {case}");
        if ext_sol.status == LpStatus::Optimal {
            assert!(
                (ext_sol.objective - scratch_sol.objective).abs() <= 1e-9 * (1.0 + ext_sol.objective.abs()),
                "case {case}: {} vs {}",
                ext_sol.objective,
                scratch_sol.objective
            );
        }
    }
}

#[test]
fn objective_monotone_under_added_ge_rows() {
    let mut rng = ChaCha20Rng::seed_from_u64(4242);
    for _ in 0..120 {
        let mut lp = random_feasible_lp(&mut rng);
        let base = lp.solve().unwrap();
        if base.status != LpStatus::Optimal {
            continue;
        }
        let coeffs: Vec<f64> = (0..lp.num_vars()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let cut = Row::new(coeffs, Relation::Ge, rng.gen_range(-1.0..3.0));
        let after = lp.extend_and_resolve(vec![cut]).unwrap();
        match after.status {
            LpStatus::Optimal => {
                assert!(after.objective >= base.objective - 1e-7 * (1.0 + base.objective.abs()))
            }
            LpStatus::Infeasible => {} // the cut removed the whole feasible set
            LpStatus::Unbounded => panic!("restriction cannot create unboundedness"),
        }
    }
}

fn threading_seed() -> u64 {
    9_190_016
}
