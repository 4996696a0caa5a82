mod common;

use common::{cubic, max_diff, quadratic, random_symmetric, DP_X0};
use dfdg::autodiff::{d2_dg_ad, grad_ad, hess_ad};
use dfdg::discrete_gradient::{ia_dg, sia_dg, DgKind};
use dfdg::finite_diff::{fd_d2_ia, fd_d2_sia, fd_hessian, optimal_steps};
use dfdg::linalg::Mat;
use dfdg::systems::{
    eval_energy, make_double_pendulum, make_harmonic, make_lennard_jones, EvalCounter, Hamiltonian, NoisyHamiltonian,
};
use proptest::prelude::*;

const TAU1: f64 = 1e-5;

fn ia<H: Hamiltonian>(sys: &H, x: &[f64], xh: &[f64]) -> Vec<f64> {
    ia_dg(sys, x, xh, TAU1, &mut EvalCounter::new()).unwrap().value
}

fn sia<H: Hamiltonian>(sys: &H, x: &[f64], xh: &[f64]) -> Vec<f64> {
    sia_dg(sys, x, xh, TAU1, &mut EvalCounter::new()).unwrap().value
}

fn energy<H: Hamiltonian>(sys: &H, x: &[f64]) -> f64 {
    eval_energy(sys, x, &mut EvalCounter::new()).unwrap()
}

#[test]
fn ia_examples() {
    let h = make_harmonic(2).unwrap();
    assert_eq!(ia(&h, &[0.0, 0.0], &[2.0, 4.0]), vec![1.0, 2.0]);
    let c = cubic();
    let g = ia(&c, &[1.0, 1.0], &[2.0, 3.0]);
    assert_eq!(g, vec![3.0, 4.0]);
    assert_eq!(g[0] * 1.0 + g[1] * 2.0, energy(&c, &[2.0, 3.0]) - energy(&c, &[1.0, 1.0]));
    let fallback = ia(&c, &[1.0, 1.0], &[1.0, 1.0]);
    assert!(max_diff(&fallback, &[2.0, 1.0]) < 1e-9, "{fallback:?}");
}

#[test]
fn sia_examples() {
    let c = cubic();
    let g = sia(&c, &[1.0, 1.0], &[2.0, 3.0]);
    assert!(max_diff(&g, &[6.0, 2.5]) < 1e-14, "{g:?}");
    assert!((g[0] + 2.0 * g[1] - 11.0).abs() < 1e-13);
    let h = make_harmonic(4).unwrap();
    let x = [0.3, -0.2, 1.0, 0.5];
    let xh = [1.1, 0.4, -0.6, 0.2];
    let mid: Vec<f64> = x.iter().zip(&xh).map(|(a, b)| (a + b) / 2.0).collect();
    assert!(max_diff(&sia(&h, &x, &xh), &mid) < 1e-15);
}

#[test]
fn dg_evaluation_counts() {
    let dp = make_double_pendulum();
    let xh: Vec<f64> = DP_X0.iter().map(|v| v + 0.1).collect();
    let mut c = EvalCounter::new();
    let g = ia_dg(&dp, &DP_X0, &xh, TAU1, &mut c).unwrap();
    assert_eq!((c.count(), g.evals_used), (8, 8));
    let mut c = EvalCounter::new();
    let g = sia_dg(&dp, &DP_X0, &xh, TAU1, &mut c).unwrap();
    assert_eq!((c.count(), g.evals_used), (16, 16));
    assert_eq!(DgKind::Sia.evals_per_call(4), 16);
}

fn consistency_slope(kind: DgKind) -> f64 {
    let dp = make_double_pendulum();
    let dir = [0.3, -0.5, 0.7, 0.2];
    let errs: Vec<(f64, f64)> = (0..5)
        .map(|k| {
            let d = 0.1 / 2f64.powi(k);
            let xh: Vec<f64> = DP_X0.iter().zip(dir).map(|(x, v)| x + d * v).collect();
            // IA against the gradient at x, SIA against the gradient at the midpoint
            let (g, at) = match kind {
                DgKind::Ia => (ia(&dp, &DP_X0, &xh), DP_X0.to_vec()),
                DgKind::Sia => (sia(&dp, &DP_X0, &xh), DP_X0.iter().zip(&xh).map(|(a, b)| (a + b) / 2.0).collect()),
            };
            let exact: Vec<f64> = grad_ad(&dp, &at).unwrap();
            (d, common::dist(&g, &exact))
        })
        .collect();
    dfdg::harness::fit_slope(&errs).unwrap()
}

#[test]
fn dg_consistency_orders() {
    let s_ia = consistency_slope(DgKind::Ia);
    let s_sia = consistency_slope(DgKind::Sia);
    assert!((s_ia - 1.0).abs() <= 0.3, "IA slope {s_ia}");
    assert!((s_sia - 2.0).abs() <= 0.3, "SIA slope {s_sia}");
}

#[test]
fn optimal_step_examples() {
    let (t1, t2) = optimal_steps(1e-15).unwrap();
    assert!((t1 - 1e-5).abs() < 1e-18);
    assert!((t2 - 1.778279410038923e-4).abs() < 1e-15);
    let (t1, t2) = optimal_steps(1e-12).unwrap();
    assert!((t1 - 1e-4).abs() < 1e-17 && (t2 - 1e-3).abs() < 1e-16);
    assert_eq!(optimal_steps(1.0).unwrap(), (1.0, 1.0));
    assert!(optimal_steps(0.0).is_err());
    assert!(optimal_steps(-1.0).is_err());
}

#[test]
fn fd_hessian_examples() {
    let a = random_symmetric(4, 11);
    let q = quadratic(a.clone());
    let h = fd_hessian(&q, &[0.3, -0.1, 0.8, 0.4], 1e-4, &mut EvalCounter::new()).unwrap();
    assert!(h.max_abs_diff(&a) <= 1e-6);
    let c = cubic();
    let mut counter = EvalCounter::new();
    let h = fd_hessian(&c, &[1.0, 1.0], 1e-4, &mut counter).unwrap();
    assert!(h.max_abs_diff(&Mat::from_rows(&[vec![2.0, 2.0], vec![2.0, 0.0]])) <= 1e-6);
    assert_eq!(counter.count(), 11);
    assert_eq!(h, h.transpose());
}

#[test]
fn fd_hessian_convergence_in_tau() {
    let dp = make_double_pendulum();
    let exact: Mat<f64> = hess_ad(&dp, &DP_X0).unwrap();
    let pts: Vec<(f64, f64)> = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
        .iter()
        .map(|&t| (t, fd_hessian(&dp, &DP_X0, t, &mut EvalCounter::new()).unwrap().max_abs_diff(&exact)))
        .collect();
    let slope = dfdg::harness::fit_slope(&pts).unwrap();
    assert!((slope - 2.0).abs() <= 0.3, "slope {slope}, {pts:?}");
}

#[test]
fn fd_d2_examples() {
    let h = make_harmonic(2).unwrap();
    let x = [0.2, 0.7];
    let xh = [1.0, -0.3];
    let d = fd_d2_sia(&h, &x, &xh, TAU1, &mut EvalCounter::new(), true).unwrap();
    assert!(d.max_abs_diff(&Mat::identity(2).scale(0.5)) <= 1e-8);
    let d_ia = fd_d2_ia(&h, &x, &xh, TAU1, &mut EvalCounter::new()).unwrap();
    let ad: Mat<f64> = d2_dg_ad(DgKind::Ia, &h, &x, &xh).unwrap();
    assert!(d_ia.max_abs_diff(&ad) <= 1e-8);

    let dp = make_double_pendulum();
    let xh: Vec<f64> = DP_X0.iter().map(|v| v + 0.05).collect();
    let fd = fd_d2_sia(&dp, &DP_X0, &xh, TAU1, &mut EvalCounter::new(), true).unwrap();
    let ad: Mat<f64> = d2_dg_ad(DgKind::Sia, &dp, &DP_X0, &xh).unwrap();
    assert!(fd.max_abs_diff(&ad) <= 1e-5);
}

#[test]
fn fd_d2_counts() {
    let dp = make_double_pendulum();
    let xh: Vec<f64> = DP_X0.iter().map(|v| v + 0.05).collect();
    let mut c = EvalCounter::new();
    fd_d2_sia(&dp, &DP_X0, &xh, TAU1, &mut c, false).unwrap();
    assert_eq!(c.count(), 48);
    let mut c = EvalCounter::new();
    fd_d2_sia(&dp, &DP_X0, &xh, TAU1, &mut c, true).unwrap();
    assert_eq!(c.count(), 80);
    let lj = make_lennard_jones();
    let mut c = EvalCounter::new();
    fd_d2_ia(&lj, &[1.2, 0.3], &[1.25, 0.28], TAU1, &mut c).unwrap();
    assert_eq!(c.count(), 12);
}

#[test]
fn first_derivative_noise_scaling() {
    // error of the FD Jacobian at the matched step scales like ε̄^{2/3}
    let dp = make_double_pendulum();
    let xh: Vec<f64> = DP_X0.iter().map(|v| v + 0.05).collect();
    let ad: Mat<f64> = d2_dg_ad(DgKind::Sia, &dp, &DP_X0, &xh).unwrap();
    let err = |eps: f64| {
        let (t1, _) = optimal_steps(eps).unwrap();
        (0..8u64)
            .map(|seed| {
                let noisy = NoisyHamiltonian::new(dp.clone(), eps, seed).unwrap();
                fd_d2_sia(&noisy, &DP_X0, &xh, t1, &mut EvalCounter::new(), true).unwrap().max_abs_diff(&ad)
            })
            .fold(0.0, f64::max)
    };
    let ratio = err(1e-9) / err(1e-12);
    let predicted = 1e3f64.powf(2.0 / 3.0);
    assert!(ratio > predicted / 10.0 && ratio < predicted * 10.0, "ratio {ratio}");
}

fn lj_state() -> impl Strategy<Value = Vec<f64>> {
    (0.9f64..2.0, -1.0f64..1.0).prop_map(|(q, p)| vec![q, p])
}

fn dp_state() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4)
}

fn dg_residual<H: Hamiltonian>(sys: &H, g: &[f64], x: &[f64], xh: &[f64]) -> f64 {
    let lhs: f64 = g.iter().zip(xh.iter().zip(x)).map(|(gi, (b, a))| gi * (b - a)).sum();
    let (hx, hxh) = (energy(sys, x), energy(sys, xh));
    (lhs - (hxh - hx)).abs() / (1.0 + hx.abs() + hxh.abs())
}

proptest! {
    #[test]
    fn dg_property_double_pendulum(x in dp_state(), xh in dp_state()) {
        let dp = make_double_pendulum();
        prop_assert!(dg_residual(&dp, &ia(&dp, &x, &xh), &x, &xh) <= 1e-12);
        prop_assert!(dg_residual(&dp, &sia(&dp, &x, &xh), &x, &xh) <= 1e-12);
    }

    #[test]
    fn dg_property_lennard_jones(x in lj_state(), xh in lj_state()) {
        let lj = make_lennard_jones();
        prop_assert!(dg_residual(&lj, &ia(&lj, &x, &xh), &x, &xh) <= 1e-12);
        prop_assert!(dg_residual(&lj, &sia(&lj, &x, &xh), &x, &xh) <= 1e-12);
    }

    #[test]
    fn sia_is_symmetric(x in dp_state(), xh in dp_state()) {
        let dp = make_double_pendulum();
        prop_assert_eq!(sia(&dp, &x, &xh), sia(&dp, &xh, &x));
    }

    #[test]
    fn fd_d2_ia_matches_ad_on_lennard_jones(x in lj_state(), d in prop::collection::vec(-0.05f64..0.05, 2)) {
        let lj = make_lennard_jones();
        let xh: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b + 0.01f64.copysign(*b)).collect();
        let fd = fd_d2_ia(&lj, &x, &xh, TAU1, &mut EvalCounter::new()).unwrap();
        let ad: Mat<f64> = d2_dg_ad(DgKind::Ia, &lj, &x, &xh).unwrap();
        prop_assert!(fd.max_abs_diff(&ad) <= 1e-5, "{}", fd.max_abs_diff(&ad));
    }

    #[test]
    fn fd_hessian_symmetric(x in dp_state()) {
        let dp = make_double_pendulum();
        let h = fd_hessian(&dp, &x, 1e-4, &mut EvalCounter::new()).unwrap();
        prop_assert_eq!(h.clone(), h.transpose());
    }
}
