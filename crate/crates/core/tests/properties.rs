use std::f64::consts::PI;

use biharm::catalog::{convolve_with_kernel, KernelSpec, NonlinearitySpec, Profile, Reaction};
use biharm::certify::{contraction_constant, nontriviality_check};
use biharm::duhamel::{apply_tau, rhs_time_derivative};
use biharm::oracles::{exact_linear_solution, if_stepper_solve, random_smooth_field, relative_l2_error};
use biharm::picard::solve_global;
use biharm::spectral::{forward_ft, h4_norm, inverse_ft, l2_norm, w142_norm};
use biharm::{Field, GridSpec, Model, ProblemParams, SolveOptions, SpaceTimeField, TimeGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bumps(grid: &GridSpec, centres: &[f64], widths: &[f64], amps: &[f64]) -> Field {
    grid.sample(|x| {
        centres
            .iter()
            .zip(widths)
            .zip(amps)
            .map(|((c, w), a)| a * (-((x - c) / w).powi(2) / 2.0).exp())
            .sum()
    })
    .unwrap()
}

fn field_strategy() -> impl Strategy<Value = Field> {
    (
        prop::collection::vec(-8.0..8.0f64, 3),
        prop::collection::vec(0.6..3.0f64, 3),
        prop::collection::vec(-2.0..2.0f64, 3),
    )
        .prop_map(|(c, w, a)| bumps(&GridSpec::new(40.0, 512).unwrap(), &c, &w, &a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(f in field_strategy()) {
        let norm2 = l2_norm(&f).powi(2);
        prop_assume!(norm2 > 1e-6);
        let spectral: f64 = forward_ft(&f).coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * f.grid().dp();
        prop_assert!((spectral - norm2).abs() <= 1e-10 * norm2);
    }

    #[test]
    fn round_trip_is_identity(f in field_strategy()) {
        let norm = l2_norm(&f);
        prop_assume!(norm > 1e-6);
        let back = inverse_ft(&forward_ft(&f)).unwrap();
        prop_assert!(l2_norm(&back.sub(&f).unwrap()) <= 1e-12 * norm);
    }

    #[test]
    fn convolution_superposes(f in field_strategy(), g in field_strategy(), s in -3.0..3.0f64) {
        let grid = *f.grid();
        let kernel = KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, &grid).unwrap();
        let combined = f.add(&g.scaled(s)).unwrap();
        let lhs = convolve_with_kernel(&kernel, &combined).unwrap();
        let rhs = convolve_with_kernel(&kernel, &f)
            .unwrap()
            .add(&convolve_with_kernel(&kernel, &g).unwrap().scaled(s))
            .unwrap();
        let scale = l2_norm(&lhs).max(1.0);
        prop_assert!(l2_norm(&lhs.sub(&rhs).unwrap()) <= 1e-12 * scale);
    }

    #[test]
    fn q_increases_in_each_argument(
        g in 0.1..5.0f64, l in 0.01..1.0f64, a in 0.0..2.0f64, b in -3.0..3.0f64,
        t in 0.05..4.0f64, bump in 1.01..2.0f64,
    ) {
        let q = contraction_constant(g, l, a, b, t).unwrap();
        prop_assert!(contraction_constant(g * bump, l, a, b, t).unwrap() > q);
        prop_assert!(contraction_constant(g, l * bump, a, b, t).unwrap() > q);
        prop_assert!(contraction_constant(g, l, a + bump - 1.0, b, t).unwrap() > q);
        prop_assert!(contraction_constant(g, l, a, b.abs() * bump + 0.01, t).unwrap() > q);
        prop_assert!(contraction_constant(g, l, a, b, t * bump).unwrap() > q);
    }
}

fn std_kernel(grid: &GridSpec) -> KernelSpec {
    KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, grid).unwrap()
}

#[test]
fn support_overlap_is_antitone_in_eps() {
    let grid = GridSpec::new(40.0, 512).unwrap();
    let h = Profile::Gaussian { sigma: 0.5, amp: 0.3 }.sample(&grid).unwrap();
    let f = NonlinearitySpec::new(Reaction::Tanh { s: 0.05 }, h).unwrap();
    let kernel = std_kernel(&grid);
    let mut last = f64::INFINITY;
    for eps in [1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2] {
        let m = nontriviality_check(&kernel, &f, &grid, eps).unwrap().measure;
        assert!(m <= last, "eps {eps}: {m} > {last}");
        last = m;
    }
}

#[test]
fn gaussian_overlap_width_follows_log_formula() {
    // Ĝ(p) = e^{-p²/2}/√(2π) exceeds eps on |p| < √(2 ln(1/(eps√(2π)))); the
    // much wider ĥ does not bind.
    let grid = GridSpec::new(40.0, 1024).unwrap();
    let h = Profile::Gaussian { sigma: 0.1, amp: 1.0 }.sample(&grid).unwrap();
    let f = NonlinearitySpec::new(Reaction::Forcing, h).unwrap();
    let kernel = std_kernel(&grid);
    for eps in [1e-8, 1e-5, 1e-3] {
        let expected = 2.0 * (2.0 * (1.0 / (eps * (2.0 * PI).sqrt())).ln()).sqrt();
        let m = nontriviality_check(&kernel, &f, &grid, eps).unwrap();
        assert!((m.measure - expected).abs() <= 2.0 * grid.dp(), "{eps}: {} vs {expected}", m.measure);
        assert!(!m.trivial_solution_possible());
    }
}

#[test]
fn disjoint_spectral_supports_allow_trivial_solution() {
    let grid = GridSpec::new(40.0, 1024).unwrap();
    // Ĝ concentrates near |p| = 4, ĥ below |p| ≈ 2.
    let kernel = KernelSpec::sampled(grid.sample(|x| (4.0 * x).cos() * (-x * x / 50.0).exp()).unwrap()).unwrap();
    let h = Profile::Gaussian { sigma: 3.0, amp: 0.5 }.sample(&grid).unwrap();
    let f = NonlinearitySpec::new(Reaction::Tanh { s: 0.1 }, h).unwrap();
    let m = nontriviality_check(&kernel, &f, &grid, 1e-8).unwrap();
    assert_eq!(m.measure, 0.0);
    assert!(m.trivial_solution_possible());
}

fn tanh_model(grid: &GridSpec, params: ProblemParams) -> Model {
    let h = Profile::Gaussian { sigma: 2.0, amp: 0.3 }.sample(grid).unwrap();
    Model::new(
        params,
        std_kernel(grid),
        NonlinearitySpec::new(Reaction::Tanh { s: 0.2 }, h).unwrap(),
    )
}

#[test]
fn tau_output_obeys_the_a_priori_bound() {
    let grid = GridSpec::new(40.0, 256).unwrap();
    let params = ProblemParams::new(0.3, -0.8).unwrap();
    let model = tanh_model(&grid, params);
    let tg = TimeGrid::new(1.5, 64).unwrap();
    let u0 = Profile::Gaussian { sigma: 1.5, amp: 2.0 }.sample(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = model.kernel.g_constant();
    let k = model.nonlinearity.growth_constant();
    let h = l2_norm(model.nonlinearity.offset());
    for _ in 0..10 {
        let v = random_smooth_field(grid, tg, &mut rng).unwrap();
        let u = apply_tau(&v, &u0, &model).unwrap();
        let v_sup = v.frames().iter().map(l2_norm).fold(0.0, f64::max);
        let t = tg.horizon();
        let bound = 2.0 * (params.a() * t).exp() * (l2_norm(&u0) + t * g * (k * v_sup + h));
        for frame in u.frames() {
            assert!(frame.is_finite());
            assert!(l2_norm(frame) <= bound, "{} > {bound}", l2_norm(frame));
            assert!(h4_norm(frame).is_finite());
        }
        assert!(w142_norm(&u).unwrap().is_finite());
    }
}

/// Last frame of `τ(v)` for `v(x, t)` sampled on `M` steps.
fn tau_last_frame(model: &Model, u0: &Field, steps: usize) -> Field {
    let grid = *u0.grid();
    let tg = TimeGrid::new(1.0, steps).unwrap();
    let v = SpaceTimeField::sample(grid, tg, |x, t| (1.0 + t * t + (3.0 * t).sin()) * (-(x - 1.0).powi(2) / 3.0).exp()).unwrap();
    apply_tau(&v, u0, model).unwrap().last_frame().clone()
}

#[test]
fn tau_time_quadrature_is_second_order() {
    let grid = GridSpec::new(30.0, 256).unwrap();
    let model = tanh_model(&grid, ProblemParams::new(0.1, 0.5).unwrap());
    let u0 = Profile::Gaussian { sigma: 1.0, amp: 1.0 }.sample(&grid).unwrap();
    let frames: Vec<Field> = [16, 32, 64].iter().map(|&m| tau_last_frame(&model, &u0, m)).collect();
    let coarse = l2_norm(&frames[0].sub(&frames[1]).unwrap());
    let fine = l2_norm(&frames[1].sub(&frames[2]).unwrap());
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn rhs_matches_central_differences_to_second_order() {
    let grid = GridSpec::new(30.0, 256).unwrap();
    let model = tanh_model(&grid, ProblemParams::new(0.1, 0.5).unwrap());
    let u0 = Profile::Gaussian { sigma: 2.0, amp: 1.0 }.sample(&grid).unwrap();
    let mut errors = Vec::new();
    for steps in [32usize, 64, 128] {
        let tg = TimeGrid::new(1.0, steps).unwrap();
        let v = SpaceTimeField::sample(grid, tg, |x, t| (1.0 + t) * (-(x * x) / 4.0).exp()).unwrap();
        let u = apply_tau(&v, &u0, &model).unwrap();
        let du = rhs_time_derivative(&u, &v, &model).unwrap();
        let m = steps / 2;
        let fd = u.frame(m + 1).sub(u.frame(m - 1)).unwrap().scaled(0.5 / tg.dt());
        errors.push(l2_norm(&fd.sub(du.frame(m)).unwrap()));
    }
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 3.0, "{errors:?}");
    }
}

#[test]
fn stepper_is_fourth_order_against_linear_closed_form() {
    let grid = GridSpec::new(40.0, 256).unwrap();
    let params = ProblemParams::new(0.0, 0.5).unwrap();
    let kernel = std_kernel(&grid);
    let kappa = 8.0;
    let model = Model::new(
        params,
        kernel.clone(),
        NonlinearitySpec::without_offset(Reaction::Linear { kappa }, &grid).unwrap(),
    );
    let u0 = Profile::Gaussian { sigma: 1.0, amp: 1.0 }.sample(&grid).unwrap();
    let tg = TimeGrid::new(1.0, 4).unwrap();
    let exact = exact_linear_solution(&u0, &params, &kernel, kappa, tg).unwrap();
    let errors: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&s| relative_l2_error(&if_stepper_solve(&u0, &model, tg, s).unwrap(), &exact).unwrap())
        .collect();
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 12.0, "{errors:?}");
    }
}

#[test]
fn chained_forcing_windows_grow_monotonically() {
    // With a positive source and no initial data every window adds mass.
    let grid = GridSpec::new(40.0, 256).unwrap();
    let h = Profile::Gaussian { sigma: 2.0, amp: 0.5 }.sample(&grid).unwrap();
    let model = Model::new(
        ProblemParams::new(0.0, 0.0).unwrap(),
        std_kernel(&grid),
        NonlinearitySpec::new(Reaction::Forcing, h).unwrap(),
    );
    let sol = solve_global(&grid.zeros(), &model, 3.0, 1.0, 32, &SolveOptions::default()).unwrap();
    assert_eq!(sol.reports.len(), 3);
    assert!(sol.seam_jumps.iter().all(|&j| j == 0.0));
    assert!(sol.window_increments.iter().all(|&d| d > 0.0));
    let masses: Vec<f64> = (0..=3)
        .map(|k| sol.field.frame(32 * k).values().iter().sum::<f64>())
        .collect();
    assert!(masses.windows(2).all(|w| w[1] > w[0]), "{masses:?}");
}
