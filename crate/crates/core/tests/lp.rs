use microlp::{ComparisonOp, OptimizationDirection, Problem};
use projfeas::generate::gen_interval_lp;
use projfeas::linalg::SparseRowMatrix;
use projfeas::lp::*;
use projfeas::projections::BoxProjector;
use projfeas::rowaction::{Art3Status, IntervalSystem};

/// Simplex optimum over the same rows and the unit box.
fn oracle(lp: &LpProblem<f64>) -> f64 {
    let n = lp.objective.len();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n).map(|i| p.add_var(lp.objective[i], (0.0, 1.0))).collect();
    for r in lp.system.rows() {
        let expr: Vec<_> = r.indices().iter().zip(r.values()).map(|(&j, &v)| (vars[j], v)).collect();
        if r.lower().is_finite() {
            p.add_constraint(expr.clone(), ComparisonOp::Ge, r.lower());
        }
        if r.upper().is_finite() {
            p.add_constraint(expr, ComparisonOp::Le, r.upper());
        }
    }
    p.solve().unwrap().objective()
}

#[test]
fn box_minimum() {
    let b = BoxProjector::uniform(2, 0.0, 1.0).unwrap();
    let p: LpProblem<f64> = LpProblem::new(vec![1.0, 0.0], IntervalSystem::new(2, vec![]).unwrap(), Some(b)).unwrap();
    let out = art3plus_o(&p, 1.5, None).unwrap();
    assert!(out.value_best.abs() <= 1e-6);
}

#[test]
fn active_slab_minimum() {
    let a = SparseRowMatrix::from_row_lists(2, vec![vec![(0, 1.0), (1, 1.0)]]).unwrap();
    let sys = IntervalSystem::from_matrix(&a, &[1.0], &[10.0], None).unwrap();
    let p: LpProblem<f64> = LpProblem::new(vec![1.0, 1.0], sys, Some(BoxProjector::uniform(2, 0.0, 5.0).unwrap())).unwrap();
    let out = art3plus_o(&p, 1.5, None).unwrap();
    assert!((out.value_best - 1.0).abs() <= 1e-5 * 2.0);
}

#[test]
fn augment_row_count() {
    let (p, _) = gen_interval_lp::<f64>(7, 4, 2).unwrap();
    // the box folds into four more rows
    assert_eq!(augment(&p, 0.3).unwrap().len(), 7 + 4 + 1);
    assert_eq!(augment(&p, f64::INFINITY).unwrap().len(), 7 + 4);
    let last = augment(&p, 0.3).unwrap().rows().last().unwrap().clone();
    assert_eq!(last.upper(), 0.3);
    assert_eq!(last.values(), p.objective.as_slice());
}

#[test]
fn small_instances_match_simplex() {
    for seed in 0..8 {
        let (p, _) = gen_interval_lp::<f64>(10, 6, seed).unwrap();
        let f = oracle(&p);
        let out = art3plus_o(&p, 1.9, Some(200_000)).unwrap();
        assert!(out.value_best >= f - 1e-9, "seed {seed}: {} below {f}", out.value_best);
        assert!(out.value_best - f <= 1e-3 * (1.0 + f.abs()), "seed {seed}: {} vs {f}", out.value_best);
        assert!(p.feasibility_system().unwrap().is_feasible(&out.x_best));
    }
}

#[test]
fn probe_trace_invariants() {
    let (p, _) = gen_interval_lp::<f64>(12, 8, 5).unwrap();
    let out = art3plus_o(&p, 1.9, Some(5000)).unwrap();
    let sys = p.feasibility_system().unwrap();
    assert!(sys.is_feasible(&out.x_best));
    assert_eq!(out.value_best, out.probes.last().unwrap().hi);
    assert!(out.probes[0].bound.is_infinite());
    for w in out.probes.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(b.hi <= a.hi);
        assert!(b.lo >= a.lo);
        match b.status {
            Art3Status::Feasible => {
                let v = b.value.unwrap();
                assert!(v <= b.bound * (1.0 + 1e-9) + 1e-9);
                assert_eq!(b.hi, a.hi.min(v));
            }
            Art3Status::SweepLimit => {
                assert_eq!(b.lo, b.bound);
                assert!(b.value.is_none());
            }
        }
        // every probe at least halves the bracket
        assert!(b.hi - b.lo <= 0.5 * (a.hi - a.lo) + 1e-9);
    }
    // every hi equals the value of a point actually found
    for pr in &out.probes {
        assert!(out.probes.iter().any(|q| q.value == Some(pr.hi)));
    }
}

#[test]
fn probe_csv() {
    let (p, _) = gen_interval_lp::<f64>(6, 4, 1).unwrap();
    let out = art3plus_o(&p, 1.9, Some(2000)).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf, &[]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("probe,bound,status,value,sweeps"));
    assert_eq!(lines.count(), out.probes.len());
    assert!(text.lines().nth(1).unwrap().starts_with("0,inf,feasible,"));
}
