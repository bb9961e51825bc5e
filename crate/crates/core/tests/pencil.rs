use opcalc_core::calculus::{boxdot, funm, CalculusOptions};
use opcalc_core::holofun::HoloFun1;
use opcalc_core::numcore::eigenvalues;
use opcalc_core::pencil::{
    impulse_response, impulse_response_factored, impulse_responses, pencil_resolvent, right_solvent_newton,
    solve_ivp_many, verify_factorization, PencilFactorization, QuadraticPencil,
};
use opcalc_core::random::MatrixRng;
use opcalc_core::{Complex64, ComplexMatrix, Error};
use opcalc_oracles::{lift_of, multiset_distance, rk4_pencil};

fn opts() -> CalculusOptions {
    CalculusOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn solvents(seed: u64, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = MatrixRng::seeded(seed);
    (rng.matrix_left_of(n, -0.5).unwrap(), rng.matrix_right_of(n, 0.5).unwrap())
}

fn monic_from(a1: &ComplexMatrix, a2: &ComplexMatrix) -> QuadraticPencil {
    let n = a1.rows();
    PencilFactorization::new(a1.clone(), a2.clone()).unwrap().pencil(&ComplexMatrix::identity(n)).unwrap()
}

#[test]
fn scalar_pencil_gives_sine_and_cosine() {
    let p = QuadraticPencil::monic(ComplexMatrix::scalar(c(0.0, 0.0)), ComplexMatrix::scalar(c(1.0, 0.0))).unwrap();
    let ts: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    for r in impulse_responses(&p, &ts, &opts()).unwrap() {
        assert!((r.value[(0, 0)] - r.time.sin()).norm() <= 1e-9, "t = {}", r.time);
        assert!((r.derivative[(0, 0)] - r.time.cos()).norm() <= 1e-9, "t = {}", r.time);
    }
    let fact = PencilFactorization::new(ComplexMatrix::scalar(c(0.0, 1.0)), ComplexMatrix::scalar(c(0.0, -1.0))).unwrap();
    let r = impulse_response_factored(&fact, &ComplexMatrix::identity(1), 0.8, &opts()).unwrap();
    assert!((r.value[(0, 0)] - 0.8f64.sin()).norm() < 1e-10);
}

#[test]
fn diagonal_pencil_resolvent() {
    let f = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-2.0, 0.5)]);
    let h = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(0.5, 0.0)]);
    let p = QuadraticPencil::monic(f.clone(), h.clone()).unwrap();
    let l = c(0.3, 2.0);
    let r = pencil_resolvent(&p, l).unwrap();
    for i in 0..2 {
        assert!((r[(i, i)] - 1.0 / (l * l + l * f[(i, i)] + h[(i, i)])).norm() < 1e-14);
    }
    assert_eq!(r[(0, 1)], c(0.0, 0.0));
}

#[test]
fn zero_solvents_give_linear_growth() {
    let z = ComplexMatrix::zeros(3, 3);
    let fact = PencilFactorization::new(z.clone(), z).unwrap();
    let r = impulse_response_factored(&fact, &ComplexMatrix::identity(3), 1.7, &opts()).unwrap();
    assert!(r.value.dist(&ComplexMatrix::identity(3).scale_real(1.7)) < 1e-10);
    assert!(r.derivative.dist(&ComplexMatrix::identity(3)) < 1e-10);
}

#[test]
fn initial_values_of_the_impulse_response() {
    let mut rng = MatrixRng::seeded(31);
    let e = ComplexMatrix::identity(4) + rng.matrix(4, 4).scale_real(0.3);
    let p = QuadraticPencil::new(e.clone(), rng.matrix(4, 4), rng.matrix(4, 4)).unwrap();
    let r = impulse_response(&p, 0.0, &opts()).unwrap();
    assert!(r.value.norm_fro() < 1e-10);
    let e_inv = opcalc_core::numcore::inverse(&e).unwrap();
    assert!(r.derivative.rel_dist(&e_inv) < 1e-10);
}

#[test]
fn factored_and_direct_responses_agree() {
    for seed in 0..3 {
        let (a1, a2) = solvents(seed, 5);
        let p = monic_from(&a1, &a2);
        let fact = PencilFactorization::new(a1, a2).unwrap();
        for t in [0.3, 1.0, 2.0] {
            let direct = impulse_response(&p, t, &opts()).unwrap();
            let factored = impulse_response_factored(&fact, p.e(), t, &opts()).unwrap();
            assert!(direct.value.rel_dist(&factored.value) <= 1e-8, "seed {seed} t {t}");
            assert!(direct.derivative.rel_dist(&factored.derivative) <= 1e-8, "seed {seed} t {t}");
        }
    }
}

#[test]
fn factored_path_with_general_leading_coefficient() {
    let (a1, a2) = solvents(8, 4);
    let mut rng = MatrixRng::seeded(80);
    let e = ComplexMatrix::identity(4) + rng.matrix(4, 4).scale_real(0.4);
    let fact = PencilFactorization::new(a1, a2).unwrap();
    let p = fact.pencil(&e).unwrap();
    verify_factorization(&p, &fact, 5, 1, 1e-8).unwrap();
    let direct = impulse_response(&p, 0.9, &opts()).unwrap();
    let factored = impulse_response_factored(&fact, &e, 0.9, &opts()).unwrap();
    assert!(direct.value.rel_dist(&factored.value) <= 1e-8);
    assert!(direct.derivative.rel_dist(&factored.derivative) <= 1e-8);
}

#[test]
fn wrong_factorization_is_reported() {
    let (a1, a2) = solvents(4, 3);
    let p = monic_from(&a1, &a2);
    let bad = PencilFactorization::new(a2, a1).unwrap();
    assert!(matches!(verify_factorization(&p, &bad, 5, 2, 1e-8), Err(Error::ResidualCheckFailed { .. })));
}

#[test]
fn ivp_matches_runge_kutta() {
    for seed in 0..2 {
        let (a1, a2) = solvents(20 + seed, 4);
        let p = monic_from(&a1, &a2);
        let mut rng = MatrixRng::seeded(200 + seed);
        let y0 = rng.matrix(4, 1);
        let y1 = rng.matrix(4, 1);
        let ts = [0.5, 1.0, 2.0];
        let ys = solve_ivp_many(&p, &y0, &y1, &ts, &opts()).unwrap();
        for (t, y) in ts.iter().zip(ys) {
            let reference = rk4_pencil(p.e(), p.f(), p.h(), &y0, &y1, *t, 1e-3);
            assert!(y.rel_dist(&reference) <= 1e-6, "seed {seed} t {t}: {:e}", y.rel_dist(&reference));
        }
    }
    let (a1, a2) = solvents(3, 3);
    let zero = ComplexMatrix::zeros(3, 1);
    let y = solve_ivp_many(&monic_from(&a1, &a2), &zero, &zero, &[1.0], &opts()).unwrap();
    assert_eq!(y[0].norm_fro(), 0.0);
}

#[test]
fn semigroup_identity() {
    let (a1, a2) = solvents(5, 5);
    let p = monic_from(&a1, &a2);
    let (t, s) = (0.7, 1.1);
    let rs = impulse_responses(&p, &[t, s, t + s], &opts()).unwrap();
    let e1 = funm(&HoloFun1::exp(t), &a1, &opts()).unwrap();
    let e2 = funm(&HoloFun1::exp(s), &a2, &opts()).unwrap();
    let rhs = e1.matmul(&rs[1].value) + rs[0].value.matmul(&e2);
    assert!(rs[2].value.rel_dist(&rhs) <= 1e-8, "{:e}", rs[2].value.rel_dist(&rhs));
}

#[test]
fn response_solves_the_ode() {
    let mut rng = MatrixRng::seeded(40);
    let e = ComplexMatrix::identity(3) + rng.matrix(3, 3).scale_real(0.2);
    let p = QuadraticPencil::new(e, rng.matrix(3, 3), rng.matrix(3, 3)).unwrap();
    let (t, h) = (1.0, 1e-3);
    let r = impulse_responses(&p, &[t - h, t, t + h], &opts()).unwrap();
    let second = (&r[2].value - &r[1].value.scale_real(2.0) + r[0].value.clone()).scale_real(1.0 / (h * h));
    let ode = p.e().matmul(&second) + p.f().matmul(&r[1].derivative) + p.h().matmul(&r[1].value);
    let scale = p.e().norm_fro() * second.norm_fro() + p.f().norm_fro() * r[1].derivative.norm_fro();
    assert!(ode.norm_fro() <= 1e-4 * scale);
    let hd = 1e-4;
    let d = impulse_responses(&p, &[t - hd, t + hd], &opts()).unwrap();
    let fd = (&d[1].value - &d[0].value).scale_real(0.5 / hd);
    assert!(fd.rel_dist(&r[1].derivative) <= 1e-6);
}

#[test]
fn response_transformator_spectrum() {
    let (a1, a2) = solvents(12, 3);
    let t = 0.6;
    let exp_t = HoloFun1::exp(t);
    let lift = lift_of(3, 3, |c| boxdot(&exp_t, &a1, &a2, c, &opts()).unwrap());
    let want: Vec<Complex64> = eigenvalues(&a1)
        .unwrap()
        .iter()
        .flat_map(|&l| eigenvalues(&a2).unwrap().into_iter().map(move |m| (l, m)))
        .map(|(l, m)| exp_t.divided_difference(l, m))
        .collect();
    assert!(multiset_distance(&eigenvalues(&lift).unwrap(), &want) <= 1e-6);
}

#[test]
fn newton_recovers_constructed_solvents() {
    for seed in 0..4 {
        let (a1, a2) = solvents(50 + seed, 5);
        let p = monic_from(&a1, &a2);
        let mut rng = MatrixRng::seeded(500 + seed);
        let x0 = &a1 + &rng.matrix(5, 5).scale_real(0.05);
        let sol = right_solvent_newton(p.f(), p.h(), &x0, &opts()).unwrap();
        assert!(sol.iterations <= 30);
        assert!(sol.residual <= 1e-10);
        assert!(sol.x.rel_dist(&a1) < 1e-8);
        let fact = PencilFactorization::from_right_solvent(p.f(), &sol.x).unwrap();
        verify_factorization(&p, &fact, 5, seed, 1e-8).unwrap();
    }
}

#[test]
fn scalar_newton_finds_a_root() {
    // x² − 3x + 2 = (x − 1)(x − 2)
    let f = ComplexMatrix::scalar(c(-3.0, 0.0));
    let h = ComplexMatrix::scalar(c(2.0, 0.0));
    let sol = right_solvent_newton(&f, &h, &ComplexMatrix::scalar(c(0.6, 0.1)), &opts()).unwrap();
    assert!((sol.x[(0, 0)] - 1.0).norm() < 1e-12);
}
