use opcalc_core::calculus::{boxdot, funm, funm_on, CalculusOptions};
use opcalc_core::contour::{Circle, Contour};
use opcalc_core::holofun::{bezoutian, divided_difference_tau, parse_f1, HoloFun1};
use opcalc_core::numcore::{eigenvalues, kron_lift, resolvent};
use opcalc_core::random::MatrixRng;
use opcalc_core::sylvester::{kron_sylvester, solve_sylvester, SylvesterMethod, SylvesterProblem};
use opcalc_core::{Complex64, ComplexMatrix};
use opcalc_oracles::multiset_distance;
use proptest::prelude::*;

fn opts() -> CalculusOptions {
    CalculusOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn catalogue() -> Vec<HoloFun1> {
    vec![
        HoloFun1::exp(0.8),
        HoloFun1::xexp(0.5),
        HoloFun1::Pow(4),
        HoloFun1::inv_shift(c(6.0, 1.0)),
        HoloFun1::rational(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-5.0, 0.0)]).unwrap(),
        HoloFun1::exp(1.0).product(HoloFun1::Pow(2)),
        HoloFun1::exp(0.3).sum(HoloFun1::Pow(3)).scaled(c(0.5, -0.5)),
    ]
}

fn point() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

fn fast() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(fast())]

    #[test]
    fn resolvent_hilbert_identity(seed in 0u64..1000, l in point(), m in point()) {
        let a = MatrixRng::seeded(seed).matrix(5, 5).scale_real(0.3);
        // keep λ, μ well off the spectrum
        let (l, m) = (l + c(6.0, 0.0), m + c(-6.0, 0.0));
        let (rl, rm) = (resolvent(&a, l).unwrap(), resolvent(&a, m).unwrap());
        let h = &rl - &rm + rl.matmul(&rm).scale(l - m);
        prop_assert!(h.norm_fro() <= 1e-10 * rl.norm_fro() * rm.norm_fro());
    }

    #[test]
    fn kron_lift_is_linear_and_multiplicative(seed in 0u64..1000, alpha in point()) {
        let mut rng = MatrixRng::seeded(seed);
        let (a1, b1, a2, b2) = (rng.matrix(3, 3), rng.matrix(2, 2), rng.matrix(3, 3), rng.matrix(2, 2));
        let l1 = kron_lift(&[(a1.scale(alpha), b1.clone())]).unwrap();
        let l2 = kron_lift(&[(a2.clone(), b2.clone())]).unwrap();
        let both = kron_lift(&[(a1.scale(alpha), b1.clone()), (a2.clone(), b2.clone())]).unwrap();
        prop_assert!(both.lift().dist(&(l1.lift() + l2.lift())) <= 1e-12 * (1.0 + both.lift().norm_fro()));
        // (C ↦ A1 C B1) after (C ↦ A2 C B2) is C ↦ A1 A2 C B2 B1
        let composed = l1.compose(&l2).unwrap();
        let direct = kron_lift(&[(a1.scale(alpha).matmul(&a2), b2.matmul(&b1))]).unwrap();
        prop_assert!(composed.lift().rel_dist(direct.lift()) <= 1e-12);
        let x = rng.matrix(3, 2);
        let applied = l1.apply(&x).unwrap();
        prop_assert!(applied.rel_dist(&a1.scale(alpha).matmul(&x).matmul(&b1)) <= 1e-12);
    }

    #[test]
    fn kron_eigenvalues_are_pairwise_products(seed in 0u64..1000) {
        let mut rng = MatrixRng::seeded(seed);
        let ea = rng.separated_points(3, c(1.0, 0.0), 1.0, 0.3);
        let eb = rng.separated_points(3, c(-0.5, 1.0), 1.0, 0.3);
        let (a, b) = (rng.with_spectrum(&ea).unwrap(), rng.with_spectrum(&eb).unwrap());
        let lift = b.transpose().kron(&a);
        let want: Vec<Complex64> = ea.iter().flat_map(|&l| eb.iter().map(move |&m| l * m)).collect();
        prop_assert!(multiset_distance(&eigenvalues(&lift).unwrap(), &want) <= 1e-8);
    }

    #[test]
    fn contour_deformation_and_orientation(seed in 0u64..1000, k in 0usize..7, grow in 0.5..3.0f64) {
        let a = MatrixRng::seeded(seed).matrix(4, 4).scale_real(0.4);
        let f = &catalogue()[k];
        let radius = eigenvalues(&a).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max) + 0.5;
        let small = Contour::new(vec![Circle::new(c(0.0, 0.0), radius)], 64).unwrap();
        let large = Contour::new(vec![Circle::new(c(0.0, 0.0), radius + grow)], 64).unwrap();
        let v1 = funm_on(f, &a, &small, &opts()).unwrap().value;
        let v2 = funm_on(f, &a, &large, &opts()).unwrap().value;
        prop_assert!(v1.dist(&v2) <= 10.0 * opts().tol * (1.0 + v1.norm_fro()), "{f}: {:e}", v1.dist(&v2));
        let back = funm_on(f, &a, &small.reversed(), &opts()).unwrap().value;
        prop_assert_eq!(back, v1.scale_real(-1.0));
    }

    #[test]
    fn divided_difference_identities(k in 0usize..7, j in 0usize..7, l in point(), m in point()) {
        prop_assume!((l - m).norm() > 1e-3);
        let (g, h) = (&catalogue()[k], &catalogue()[j]);
        let tol = |z: Complex64| 1e-10 * (1.0 + z.norm());

        let sym = g.divided_difference(l, m) - g.divided_difference(m, l);
        prop_assert!(sym.norm() <= 1e-12 * (1.0 + g.divided_difference(l, m).norm()));

        let gh = g.clone().product(h.clone()).divided_difference(l, m);
        let rule = g.eval(l) * h.divided_difference(l, m) + g.divided_difference(l, m) * h.eval(m);
        prop_assert!((gh - rule).norm() <= tol(gh), "{g} {h}");

        prop_assume!(h.eval(l).norm() > 1e-3 && h.eval(m).norm() > 1e-3);
        let q = g.clone().quotient(h.clone()).divided_difference(l, m);
        let b = bezoutian(g, h, l, m) / (h.eval(l) * h.eval(m));
        prop_assert!((q - b).norm() <= 1e-9 * (1.0 + q.norm()), "{g} / {h}");

        let tau = divided_difference_tau(g, l, m);
        prop_assert!((tau - g.divided_difference(l, m)).norm() <= tol(tau));
    }

    #[test]
    fn divided_difference_is_continuous_at_the_diagonal(k in 0usize..7, l in point(), e in -12.0..-6.0f64, dir in 0.0..std::f64::consts::TAU) {
        let f = &catalogue()[k];
        let delta = 10f64.powf(e);
        let m = l + Complex64::from_polar(delta, dir);
        let d = f.divided_difference(l, m);
        let slope = f.derivative().deriv(l).norm() + 1.0;
        prop_assert!((d - f.deriv(l)).norm() <= 10.0 * slope * delta + 1e-12 * (1.0 + d.norm()), "{f} δ = {delta:e}");
    }

    #[test]
    fn function_specs_round_trip(k in 0usize..5, t in -3.0..3.0f64, n in 0u32..9) {
        // arithmetic combinations are display-only; the grammar covers the builtins
        let builtins = [HoloFun1::exp(t), HoloFun1::xexp(t), HoloFun1::Pow(n), HoloFun1::inv_shift(c(t, -t)), catalogue()[4].clone()];
        let f = &builtins[k];
        let back = parse_f1(&f.spec()).unwrap();
        prop_assert_eq!(back.spec(), f.spec());
        let z = c(0.3, -0.7);
        prop_assert!((back.eval(z) - f.eval(z)).norm() <= 1e-14 * (1.0 + f.eval(z).norm()));
    }

    #[test]
    fn boxdot_product_rule_and_increment(seed in 0u64..1000, k in 0usize..7, j in 0usize..7) {
        let mut rng = MatrixRng::seeded(seed);
        let (a, b, x) = (rng.matrix(4, 4).scale_real(0.5), rng.matrix(3, 3).scale_real(0.5), rng.matrix(4, 3));
        let (g, h) = (&catalogue()[k], &catalogue()[j]);
        let tol = 10.0 * opts().tol;
        let lhs = boxdot(&g.clone().product(h.clone()), &a, &b, &x, &opts()).unwrap();
        let hb = funm(h, &b, &opts()).unwrap();
        let ga = funm(g, &a, &opts()).unwrap();
        let rhs = boxdot(g, &a, &b, &x.matmul(&hb), &opts()).unwrap() + ga.matmul(&boxdot(h, &a, &b, &x, &opts()).unwrap());
        prop_assert!(lhs.dist(&rhs) <= tol * (1.0 + rhs.norm_fro()), "{g} {h}: {:e}", lhs.dist(&rhs));

        let a2 = &a + &rng.matrix(4, 4).scale_real(0.2);
        let inc = boxdot(g, &a2, &a, &(&a2 - &a), &opts()).unwrap();
        let want = funm(g, &a2, &opts()).unwrap() - ga;
        prop_assert!(inc.dist(&want) <= tol * (1.0 + want.norm_fro()), "{g}: {:e}", inc.dist(&want));
    }

    #[test]
    fn boxdot_in_the_commuting_case(seed in 0u64..1000, k in 0usize..7) {
        let mut rng = MatrixRng::seeded(seed);
        let a = rng.matrix(4, 4).scale_real(0.5);
        let cm = a.matmul(&a).scale(c(0.3, 0.1)) + a.scale_real(-0.7) + ComplexMatrix::identity(4);
        let f = &catalogue()[k];
        let lhs = boxdot(f, &a, &a, &cm, &opts()).unwrap();
        let rhs = funm(&f.derivative(), &a, &opts()).unwrap().matmul(&cm);
        prop_assert!(lhs.dist(&rhs) <= 10.0 * opts().tol * (1.0 + rhs.norm_fro()), "{f}");
    }

    #[test]
    fn sylvester_transformator_is_linear_and_reduces_boxdot(seed in 0u64..1000, alpha in point(), k in 0usize..7) {
        let mut rng = MatrixRng::seeded(seed);
        let a = rng.matrix_left_of(4, -1.0).unwrap();
        let b = rng.matrix_right_of(3, 1.0).unwrap();
        let (c1, c2) = (rng.matrix(4, 3), rng.matrix(4, 3));
        let q = |x: &ComplexMatrix| kron_sylvester(&a, &b, x).unwrap();
        let lin = q(&(c1.scale(alpha) + c2.clone()));
        prop_assert!(lin.dist(&(q(&c1).scale(alpha) + q(&c2))) <= 1e-12 * (1.0 + lin.norm_fro()));

        let f = &catalogue()[k];
        let (fa, fb) = (funm(f, &a, &opts()).unwrap(), funm(f, &b, &opts()).unwrap());
        let lhs = boxdot(f, &a, &b, &c1, &opts()).unwrap();
        let qc = q(&c1);
        let once = fa.matmul(&qc) - qc.matmul(&fb);
        let reversed = q(&(fa.matmul(&c1) - c1.matmul(&fb)));
        let tol = 10.0 * opts().tol * (1.0 + lhs.norm_fro());
        prop_assert!(lhs.dist(&once) <= tol, "{f}: {:e}", lhs.dist(&once));
        prop_assert!(lhs.dist(&reversed) <= tol, "{f}: {:e}", lhs.dist(&reversed));
    }

    #[test]
    fn backends_agree_when_all_apply(seed in 0u64..1000) {
        let mut rng = MatrixRng::seeded(seed);
        // σ(A) near −1 and small, σ(B) near 4: every representation applies
        let a = rng.matrix(4, 4).scale_real(0.15).shift(c(-1.0, 0.0));
        let b = rng.matrix(3, 3).scale_real(0.15).shift(c(4.0, 0.0));
        let p = SylvesterProblem::new(a, b, rng.matrix(4, 3)).unwrap();
        let sols: Vec<ComplexMatrix> = [SylvesterMethod::Contour, SylvesterMethod::ExpIntegral, SylvesterMethod::Series]
            .into_iter()
            .map(|m| {
                let s = solve_sylvester(&p, m, &opts()).unwrap();
                assert!(s.relative_residual <= opts().residual_tol);
                s.z
            })
            .collect();
        prop_assert!(sols[0].rel_dist(&sols[1]) <= 1e-7);
        prop_assert!(sols[0].rel_dist(&sols[2]) <= 1e-7);
        prop_assert!(sols[1].rel_dist(&sols[2]) <= 1e-7);
    }
}
