//! Property tests of invariants that hold for every input.

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use reslab::operator::{assemble_full_scaled, ScalingContour};
use reslab::pipeline::{fit_depth, DepthRow, EpsRecord, ExperimentConfig, ResonanceRow, RunRecord, StageError};
use reslab::potential::{eval_potential, presets};
use reslab::spectral::{sturm_count, TridiagLu};
use reslab::symbols::symbol_h1;
use reslab::wells::{barrier_cost_bruteforce, barrier_cost_grid, Grid2D};
use reslab::Complex64;

fn tridiagonal() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..24).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-5.0..5.0f64, n - 1),
        )
    })
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, 1e-30..1e-3f64]
}

fn eps_record() -> impl Strategy<Value = EpsRecord> {
    (
        0.01..1.0f64,
        prop::collection::vec(finite(), 0..4),
        prop::option::of(finite()),
        prop::collection::vec((finite(), finite(), prop::option::of(finite()), 0usize..500), 0..3),
        prop::bool::ANY,
    )
        .prop_map(|(eps, lambdas, r0, res, failed)| EpsRecord {
            eps,
            r0,
            n: r0.map(|_| 4000),
            residuals: lambdas.iter().map(|l| l.abs() * 1e-12).collect(),
            resonances: res
                .into_iter()
                .enumerate()
                .map(|(index, (re, im, drift, iters))| ResonanceRow {
                    index,
                    lambda_seed: re,
                    mu: Complex64::new(re, im),
                    theta_drift: drift,
                    grid_drift: drift.map(|d| d * 0.5),
                    r_max_drift: None,
                    iters,
                })
                .collect(),
            s_proxy: lambdas.iter().map(|l| (l.abs() > 1.0).then_some(l.abs().ln())).collect(),
            lambdas,
            seed_failures: Vec::new(),
            symbol: None,
            errors: if failed {
                vec![StageError {
                    stage: "interior_spectrum".into(),
                    message: "grid too coarse: \"quoted\", ümlaut".into(),
                }]
            } else {
                Vec::new()
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sturm_count_matches_dense_inertia((d, e) in tridiagonal(), x in -20.0..20.0f64) {
        let n = d.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j { d[i] } else if i + 1 == j { e[i] } else if j + 1 == i { e[j] } else { 0.0 }
        });
        let eig = SymmetricEigen::new(m).eigenvalues;
        // skip shifts within rounding of an eigenvalue
        prop_assume!(eig.iter().all(|l| (l - x).abs() > 1e-9));
        let below = eig.iter().filter(|&&l| l < x).count();
        prop_assert_eq!(sturm_count(&d, &e, x), below);
    }

    #[test]
    fn complex_tridiagonal_solve_has_small_residual(
        (d, e) in tridiagonal(),
        im in prop::collection::vec(-1.0..1.0f64, 24),
        shift in -3.0..3.0f64,
    ) {
        let n = d.len();
        let dc: Vec<Complex64> = (0..n).map(|k| Complex64::new(d[k], im[k])).collect();
        let ec: Vec<Complex64> = (0..n - 1).map(|k| Complex64::new(e[k], 0.5 * im[k + 1])).collect();
        let s = Complex64::new(shift, 0.1);
        let lu = TridiagLu::factor(&dc, &ec, s).unwrap();
        let b: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0 + k as f64, -(k as f64))).collect();
        let mut x = b.clone();
        lu.solve(&mut x);
        let scale = dc.iter().map(|z| z.norm()).fold(1.0, f64::max) + 10.0;
        let xmax = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let mut r = (dc[k] - s) * x[k] - b[k];
            if k > 0 { r += ec[k - 1] * x[k - 1]; }
            if k + 1 < n { r += ec[k] * x[k + 1]; }
            prop_assert!(r.norm() <= 1e-10 * scale * (1.0 + xmax), "row {} residual {}", k, r.norm());
        }
    }

    #[test]
    fn dijkstra_equals_enumeration(
        nx in 2usize..6,
        ny in 2usize..6,
        seed_vals in prop::collection::vec(0u8..6, 36),
        src in (0usize..36, 0usize..36),
        tgt in (0usize..36, 0usize..36),
    ) {
        // few distinct levels so that ties are common
        let grid = Grid2D { nx, ny, x0: 0.0, y0: 0.0, hx: 1.0, hy: 1.0 };
        let v: Vec<f64> = seed_vals[..nx * ny].iter().map(|&k| k as f64 * 0.25).collect();
        let x = (src.0 % nx, src.1 % ny);
        let t = [(tgt.0 % nx, tgt.1 % ny)];
        prop_assert_eq!(
            barrier_cost_grid(&grid, &v, x, &t).unwrap(),
            barrier_cost_bruteforce(&grid, &v, x, &t).unwrap()
        );
    }

    #[test]
    fn potential_derivatives_are_consistent(x in -8.0..8.0f64, eps in 0.05..0.3f64) {
        let s = presets::reference();
        let h = 1e-5;
        let [f, g, l, _] = s.derivs(x);
        let fd_g = (s.f(x + h) - s.f(x - h)) / (2.0 * h);
        let fd_l = (s.grad(x + h) - s.grad(x - h)) / (2.0 * h);
        prop_assert!((fd_g - g).abs() <= 1e-6 * (1.0 + g.abs()), "F' {} vs {}", g, fd_g);
        prop_assert!((fd_l - l).abs() <= 1e-5 * (1.0 + l.abs()), "F'' {} vs {}", l, fd_l);
        let p = eval_potential(&s, x, eps);
        prop_assert_eq!(p.f, f);
        prop_assert!((p.v - 0.25 * g * g).abs() <= 1e-12 * (1.0 + p.v));
        prop_assert!((p.v_eps - (p.v - 0.5 * eps * l)).abs() <= 1e-12 * (1.0 + p.v.abs()));
    }

    #[test]
    fn unrotated_symbol_is_real(x in -50.0..50.0f64, xi in -100.0..100.0f64, eps in 0.05..0.2f64) {
        let s = presets::reference();
        let r0 = 0.49 / eps;
        let p = symbol_h1(&s, &[x], &[xi], eps, 0.0, r0).unwrap();
        prop_assert_eq!(p.h1.im, 0.0);
    }

    #[test]
    fn scaled_operator_is_complex_symmetric(beta in 0.05..0.5f64, eps in 0.1..0.2f64) {
        let s = presets::reference();
        let r0 = 0.49 / eps;
        let op = assemble_full_scaled(&s, eps, &ScalingContour::sharp(r0, beta), 400, 4.0 * r0, false).unwrap();
        let u: Vec<Complex64> = (0..op.n()).map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
        let w: Vec<Complex64> = (0..op.n()).map(|k| Complex64::new((k as f64 * 0.23).cos(), 0.0)).collect();
        // w^T H u = u^T H w for the bilinear (not sesquilinear) form
        let a: Complex64 = w.iter().zip(op.apply(&u)).map(|(x, y)| x * y).sum();
        let b: Complex64 = u.iter().zip(op.apply(&w)).map(|(x, y)| x * y).sum();
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn depth_fit_recovers_pure_laws(d in 0.1..5.0f64, c in -3.0..3.0f64, n in 4usize..9) {
        let pts: Vec<(f64, f64)> = (0..n).map(|k| {
            let eps = 0.1 + 0.1 * k as f64 / (n - 1) as f64;
            (eps, (c - d / eps).exp())
        }).collect();
        let (dh, r2) = fit_depth(&pts).unwrap();
        prop_assert!((dh - d).abs() <= 1e-9 * d.max(1.0));
        prop_assert!(r2 > 1.0 - 1e-12);
    }

    #[test]
    fn record_json_round_trip(
        per_eps in prop::collection::vec(eps_record(), 0..4),
        depth in prop::option::of((finite(), finite())),
        started in 0u64..u64::MAX / 2,
    ) {
        let mut rec = RunRecord::empty(ExperimentConfig::default());
        rec.started_unix_ms = started;
        rec.finished_unix_ms = started + 1;
        rec.per_eps = per_eps;
        if let Some((dw, df)) = depth {
            rec.depths.push(DepthRow {
                index: 1,
                d_well_analysis: dw,
                d_fitted: Some(df),
                rel_err: Some(((df - dw) / dw).abs()),
                r2: None,
                points: 4,
                note: Some("fit".into()),
            });
        }
        let back = RunRecord::from_json(&rec.to_json()).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn config_hash_ignores_key_order(
        top in Just(vec!["potential = \"preset:reference\"", "seeds = 2", "eps_list = [0.2, 0.15, 0.1, 0.05]", "out_dir = \"o\""]).prop_shuffle(),
        grid in Just(vec!["n_min = 5000", "r_max_factor = 5.0", "check_truncation = true"]).prop_shuffle(),
        contour in Just(vec!["beta = 0.25", "mode = \"smooth\"", "width = 0.4"]).prop_shuffle(),
        grid_first in prop::bool::ANY,
    ) {
        let mut sections = [format!("[grid]\n{}", grid.join("\n")), format!("[contour]\n{}", contour.join("\n"))];
        if !grid_first {
            sections.reverse();
        }
        let perm = format!("{}\n{}\n", top.join("\n"), sections.join("\n"));
        let base = "potential = \"preset:reference\"\nseeds = 2\neps_list = [0.2, 0.15, 0.1, 0.05]\nout_dir = \"o\"\n\
                    [grid]\nn_min = 5000\nr_max_factor = 5.0\ncheck_truncation = true\n\
                    [contour]\nbeta = 0.25\nmode = \"smooth\"\nwidth = 0.4\n";
        let a = ExperimentConfig::from_toml(base, None).unwrap();
        let b = ExperimentConfig::from_toml(&perm, None).unwrap();
        prop_assert_eq!(a.content_hash(), b.content_hash());
    }
}
