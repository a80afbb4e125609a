//! Operator-level checks: adjoint identity, gradient, CG against a dense
//! solve, and the manufactured solution of example 1.

use std::f64::consts::PI;

use inadmm::cg::{cg_solve, cg_solve_with, CgOptions, CgStatus};
use inadmm::problems::{example1, example2};
use inadmm::reduced::ReducedOperator;
use inadmm::{ControlField, Problem, StateTrajectory};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_control(problem: &Problem, rng: &mut ChaCha8Rng) -> ControlField {
    let d = problem.disc();
    ControlField::from_fn(d.n_control(), d.n_t(), |_, _| rng.gen_range(-1.0..1.0))
}

fn random_state(problem: &Problem, rng: &mut ChaCha8Rng) -> StateTrajectory {
    let d = problem.disc();
    StateTrajectory::from_fn(d.n_state(), d.n_t(), |_, _| rng.gen_range(-1.0..1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_identity(seed in any::<u64>(), sub in any::<bool>(), m in prop::sample::select(vec![4usize, 8]), n_t in 1usize..6) {
        let spec = if sub { example2() } else { example1() };
        let problem = spec.assemble(m, n_t).unwrap();
        let d = problem.disc();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_control(&problem, &mut rng);
        let w = random_state(&problem, &mut rng);
        let lhs = d.dot_y(&d.apply_sbar(&u).unwrap(), &w).unwrap();
        let rhs = d.dot_u(&u, &d.apply_sbar_star(&w).unwrap()).unwrap();
        let scale = d.norm_u(&u).unwrap() * d.norm_y(&w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    for spec in [example1(), example2()] {
        let problem = spec.assemble(8, 8).unwrap();
        let d = problem.disc();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_control(&problem, &mut rng);
        let g = problem.gradient(&u).unwrap();
        for _ in 0..5 {
            let v = random_control(&problem, &mut rng);
            let eps = 1e-3 * d.norm_u(&u).unwrap() / d.norm_u(&v).unwrap();
            let jp = problem.objective_j(&ControlField::lin_comb(1.0, &u, eps, &v)).unwrap();
            let jm = problem.objective_j(&ControlField::lin_comb(1.0, &u, -eps, &v)).unwrap();
            let fd = (jp - jm) / (2.0 * eps);
            let exact = d.dot_u(&g, &v).unwrap();
            assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-300), "{fd} vs {exact}");
        }
    }
}

/// `H` as a dense matrix acting on coefficient vectors.
fn dense_h(op: &ReducedOperator<'_>) -> Vec<Vec<f64>> {
    let d = op.problem().disc();
    let n = d.n_control() * d.n_t();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e = ControlField::from_fn(d.n_control(), d.n_t(), |l, i| {
            if (l - 1) * d.n_control() + i == j { 1.0 } else { 0.0 }
        });
        cols.push(op.apply_h(&e).unwrap().values().to_vec());
    }
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let (top, rest) = a.split_at_mut(r);
            for (x, p) in rest[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

#[test]
fn control_fields_are_level_major() {
    let problem = example1().assemble(4, 4).unwrap();
    let d = problem.disc();
    let f = ControlField::from_fn(d.n_control(), d.n_t(), |l, i| (l * 100 + i) as f64);
    assert_eq!(f.level(1)[0], 100.0);
    assert_eq!(f.values()[d.n_control()], 200.0);
}

fn cg_setup(problem: &Problem, seed: u64) -> (ControlField, ControlField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = random_control(problem, &mut rng);
    let lambda = random_control(problem, &mut rng);
    (z, lambda)
}

#[test]
fn cg_matches_dense_solve() {
    let problem = example1().assemble(4, 4).unwrap();
    let op = ReducedOperator::new(&problem, 2.5).unwrap();
    let (z, lambda) = cg_setup(&problem, 3);
    let d = op.assemble_d(&z, &lambda).unwrap();
    let exact = gauss_solve(dense_h(&op), d.values().to_vec());
    let dn = problem.disc().norm_u(&d).unwrap();
    let out = cg_solve(&op, &d, &problem.disc().zero_control(), 1e-13 * dn).unwrap();
    assert_eq!(out.status, CgStatus::Converged);
    let num: f64 = out.u.values().iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num <= 1e-8 * den, "relative error {}", num / den);
}

#[test]
fn cg_error_decreases_in_energy_norm() {
    let problem = example1().assemble(4, 4).unwrap();
    let disc = problem.disc();
    let op = ReducedOperator::new(&problem, 2.0).unwrap();
    let (z, lambda) = cg_setup(&problem, 11);
    let d = op.assemble_d(&z, &lambda).unwrap();
    let exact = ControlField::from_values(disc.n_control(), disc.n_t(), gauss_solve(dense_h(&op), d.values().to_vec())).unwrap();
    let energy = |u: &ControlField| {
        let e = ControlField::lin_comb(1.0, u, -1.0, &exact);
        disc.dot_u(&op.apply_h(&e).unwrap(), &e).unwrap().sqrt()
    };
    let u0 = disc.zero_control();
    let mut prev = energy(&u0);
    for steps in 1..=12 {
        let opts = CgOptions { max_iter: Some(steps), ..CgOptions::with_tol(1e-300) };
        let out = cg_solve_with(&op, &d, &u0, opts).unwrap();
        let e = energy(&out.u);
        assert!(e <= prev * (1.0 + 1e-10) + 1e-14, "step {steps}: {e} > {prev}");
        prev = e;
    }
}

#[test]
fn recursive_residual_tracks_true_residual() {
    let problem = example1().assemble(8, 8).unwrap();
    let op = ReducedOperator::new(&problem, 2.0).unwrap();
    let (z, lambda) = cg_setup(&problem, 5);
    let d = op.assemble_d(&z, &lambda).unwrap();
    // The smallest inner tolerance the outer loop ever requests.
    let opts = CgOptions { drift_check_every: Some(10), ..CgOptions::with_tol(1e-6) };
    let out = cg_solve_with(&op, &d, &problem.disc().zero_control(), opts).unwrap();
    assert!(!out.drift_checks.is_empty());
    for c in &out.drift_checks {
        let rel = (c.recursive - c.true_residual).abs() / c.true_residual;
        assert!(rel <= 1e-8, "step {}: {} vs {}", c.step, c.recursive, c.true_residual);
    }
}

#[test]
fn zero_right_hand_side_needs_no_iterations() {
    let problem = example1().assemble(4, 4).unwrap();
    let op = ReducedOperator::new(&problem, 2.0).unwrap();
    let zero = problem.disc().zero_control();
    let out = cg_solve(&op, &zero, &zero, 1e-6).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.u, zero);
}

// Example 1 closed forms, written out independently of the library.
fn s1(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}
fn s2(x: f64, y: f64) -> f64 {
    (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}
fn ybar(x: f64, y: f64, t: f64) -> f64 {
    (1.0 - t) * s1(x, y)
}
fn pbar(x: f64, y: f64, t: f64) -> f64 {
    (1.0 - t) * s2(x, y) / 1e5
}

fn laplacian(f: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    let h = 1e-4;
    (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h)
}

fn dt(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-5;
    (f(t + h) - f(t - h)) / (2.0 * h)
}

#[test]
fn example1_data_satisfy_the_optimality_system() {
    let spec = example1();
    let f = spec.source.clone().unwrap();
    let yd = spec.target.clone();
    let ubar = spec.exact_control.clone().unwrap();
    let phi = spec.initial.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (x, y, t) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        // u = P_[a,b](-gamma_d p)
        let u = (-1e5 * pbar(x, y, t)).clamp(-0.5, 0.5);
        assert!((ubar(x, y, t) - u).abs() < 1e-12);
        // y_t - lap y = f + u
        let state_res = dt(|s| ybar(x, y, s), t) - laplacian(|a, b| ybar(a, b, t), x, y) - f(x, y, t) - u;
        assert!(state_res.abs() < 1e-4, "state residual {state_res}");
        // -p_t - lap p = y - y_d
        let adj_res = -dt(|s| pbar(x, y, s), t) - laplacian(|a, b| pbar(a, b, t), x, y) - (ybar(x, y, t) - yd(x, y, t));
        assert!(adj_res.abs() < 1e-7, "adjoint residual {adj_res}");
        assert!((phi(x, y) - ybar(x, y, 0.0)).abs() < 1e-14);
    }
    assert!(pbar(0.3, 0.7, 1.0).abs() < 1e-15);
}

/// `max_n ||r^n|| / tau` for the exact pair plugged into the discrete state
/// equation, with `||.||` the lumped dual norm.
fn manufactured_residual(m: usize) -> f64 {
    let problem = example1().assemble(m, m).unwrap();
    let disc = problem.disc();
    let grid = disc.grid();
    let tau = disc.tau();
    let h = grid.h();
    let mass = &disc.ops().mass;
    let y = |t: f64| grid.interpolate(|a, b| ybar(a, b, t));
    let u = problem.exact_control().unwrap();
    let f = problem.source().unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=m {
        let t = n as f64 * tau;
        let (yn, yprev) = (y(t), y(t - tau));
        let mut ext = vec![0.0; disc.n_state()];
        grid.extend_control(u.level(n), &mut ext);
        let rhs: Vec<f64> = (0..yn.len()).map(|i| yprev[i] + tau * (ext[i] + f.level(n)[i])).collect();
        let lhs = disc.system().mul_vec(&yn);
        let mrhs = mass.mul_vec(&rhs);
        let r2: f64 = lhs.iter().zip(&mrhs).map(|(a, b)| (a - b).powi(2)).sum();
        worst = worst.max((r2 / (h * h)).sqrt() / tau);
    }
    worst
}

#[test]
fn manufactured_residual_is_first_order_with_tau_equal_h() {
    let r: Vec<f64> = [8, 16, 32].iter().map(|&m| manufactured_residual(m)).collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=4.5).contains(&ratio), "residuals {r:?}");
    }
}
