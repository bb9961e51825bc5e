use opcalc_core::calculus::{
    boxdot, boxtimes, compose_apply, funm, funm_fixed, transformator_matrix, transformator_resolvent,
    transformator_resolvent_matrix, transformator_spectrum, CalculusOptions,
};
use opcalc_core::holofun::{HoloFun1, HoloFun2};
use opcalc_core::numcore::eigenvalues;
use opcalc_core::random::MatrixRng;
use opcalc_core::{Complex64, ComplexMatrix, Error, TransformatorMatrix};
use opcalc_oracles::{expm_taylor, multiset_distance, sylvester_kron};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn opts() -> CalculusOptions {
    CalculusOptions::default()
}

#[test]
fn funm_exp_matches_taylor() {
    let mut rng = MatrixRng::seeded(11);
    let a = rng.matrix(6, 6);
    let e = funm(&HoloFun1::exp(1.0), &a, &opts()).unwrap();
    assert!(e.dist(&expm_taylor(&a)) < 1e-9 * expm_taylor(&a).norm_fro());
}

#[test]
fn quadrature_error_drops_with_doubling() {
    let mut rng = MatrixRng::seeded(3);
    let a = rng.matrix(6, 6);
    let want = expm_taylor(&a);
    let e32 = funm_fixed(&HoloFun1::exp(1.0), &a, 32, &opts()).unwrap().dist(&want);
    let e64 = funm_fixed(&HoloFun1::exp(1.0), &a, 64, &opts()).unwrap().dist(&want);
    assert!(e32 >= 100.0 * e64);
}

#[test]
fn separable_boxtimes_is_product() {
    let mut rng = MatrixRng::seeded(5);
    let (a, b, cm) = (rng.matrix(4, 4), rng.matrix(3, 3), rng.matrix(4, 3));
    let f = HoloFun2::Separable(HoloFun1::exp(0.5), HoloFun1::exp(0.5));
    let got = boxtimes(&f, &a, &b, &cm, &opts()).unwrap();
    let want = expm_taylor(&a.scale_real(0.5)).matmul(&cm).matmul(&expm_taylor(&b.scale_real(0.5)));
    assert!(got.dist(&want) < 1e-9 * want.norm_fro());
}

#[test]
fn sylvester_kernel_solves_equation() {
    let mut rng = MatrixRng::seeded(8);
    let a = rng.matrix_left_of(5, -1.0).unwrap();
    let b = rng.matrix_right_of(4, 1.0).unwrap();
    let cm = rng.matrix(5, 4);
    let z = boxtimes(&HoloFun2::SylvesterW, &a, &b, &cm, &opts()).unwrap();
    let want = sylvester_kron(&a, &b, &cm);
    assert!(z.dist(&want) < 1e-8 * want.norm_fro());
}

#[test]
fn bridge_between_calculi() {
    let mut rng = MatrixRng::seeded(21);
    let (a, b, cm) = (rng.matrix(5, 5), rng.matrix(4, 4), rng.matrix(5, 4));
    for f in [HoloFun1::Pow(5), HoloFun1::exp(0.7), HoloFun1::inv_shift(c(4.0, 1.0))] {
        let lhs = boxdot(&f, &a, &b, &cm, &opts()).unwrap();
        let rhs = boxtimes(&HoloFun2::DividedDifference(f.clone()), &a, &b, &cm, &opts()).unwrap();
        eprintln!("{f} bridge {:e}", lhs.dist(&rhs));
        assert!(lhs.dist(&rhs) < 1e-8 * (1.0 + lhs.norm_fro()));
    }
}


fn separated_pair(seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = MatrixRng::seeded(seed);
    let ea = rng.separated_points(4, c(-2.0, 0.0), 0.8, 0.25);
    let eb = rng.separated_points(3, c(2.0, 0.5), 0.8, 0.25);
    (rng.with_spectrum(&ea).unwrap(), rng.with_spectrum(&eb).unwrap())
}

#[test]
fn transformator_spectral_mapping() {
    let kernels = [
        HoloFun2::SylvesterW,
        HoloFun2::Separable(HoloFun1::exp(1.0), HoloFun1::exp(1.0)),
        HoloFun2::composed(HoloFun1::exp(1.0), HoloFun2::Sum),
    ];
    for seed in 0..4 {
        let (a, b) = separated_pair(seed);
        for f in &kernels {
            let lifted = transformator_matrix(f, &a, &b, &opts()).unwrap().eigenvalues().unwrap();
            let mapped = transformator_spectrum(f, &a, &b).unwrap();
            assert!(multiset_distance(&lifted, &mapped) <= 1e-6, "{f} seed {seed}");
        }
    }
}

#[test]
fn overlapping_spectra_have_no_sylvester_spectrum() {
    let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
    let r = transformator_spectrum(&HoloFun2::SylvesterW, &a, &a);
    assert!(matches!(r, Err(Error::SpectraOverlap { .. })));
}

#[test]
fn composition_matches_direct_kernel() {
    let (a, b) = separated_pair(9);
    let cm = MatrixRng::seeded(90).matrix(4, 3);
    let via_lift = compose_apply(&HoloFun1::exp(1.0), &HoloFun2::Sum, &a, &b, &cm, &opts()).unwrap();
    let want = expm_taylor(&a).matmul(&cm).matmul(&expm_taylor(&b));
    assert!(via_lift.rel_dist(&want) < 1e-9);
    // f applied to the Sylvester transformator against the composed kernel
    let f = HoloFun1::Pow(2);
    let lhs = compose_apply(&f, &HoloFun2::SylvesterW, &a, &b, &cm, &opts()).unwrap();
    let q = sylvester_kron(&a, &b, &cm);
    let rhs = sylvester_kron(&a, &b, &q);
    assert!(lhs.rel_dist(&rhs) < 1e-8);
}

fn hilbert_residual(s_nu: &TransformatorMatrix, s_eta: &TransformatorMatrix, nu: Complex64, eta: Complex64) -> f64 {
    let (x, y) = (s_nu.lift(), s_eta.lift());
    let r = x - y + s_nu.compose(s_eta).unwrap().lift().scale(nu - eta);
    r.norm_fro() / (x.norm_fro() * y.norm_fro())
}

#[test]
fn transformator_resolvent_is_a_pseudo_resolvent() {
    let mut rng = MatrixRng::seeded(13);
    let a = rng.matrix(4, 4).scale_real(0.5);
    let b = rng.matrix(3, 3).scale_real(0.5);
    let cm = rng.matrix(4, 3);
    let kernels = [HoloFun2::Diff, HoloFun2::Separable(HoloFun1::Pow(2), HoloFun1::constant(1.0))];
    let (nu, eta) = (c(4.0, 1.0), c(-3.0, 2.5));
    for f in &kernels {
        let s_nu = transformator_resolvent_matrix(f, &a, &b, nu, &opts()).unwrap();
        let s_eta = transformator_resolvent_matrix(f, &a, &b, eta, &opts()).unwrap();
        assert!(hilbert_residual(&s_nu, &s_eta, nu, eta) <= 1e-8, "{f}");
        // against the inverse of ν − T with T materialized independently
        let t = transformator_matrix(f, &a, &b, &opts()).unwrap();
        let direct = opcalc_core::numcore::inverse(&t.lift().scale_real(-1.0).shift(nu)).unwrap();
        assert!(s_nu.lift().rel_dist(&direct) < 1e-9, "{f}");
        let applied = transformator_resolvent(f, &a, &b, nu, &cm, &opts()).unwrap();
        assert!(applied.rel_dist(&s_nu.apply(&cm).unwrap()) < 1e-9);
    }
}

#[test]
fn resolvent_at_a_spectral_value_is_refused() {
    let mut rng = MatrixRng::seeded(14);
    let a = rng.matrix(3, 3);
    let b = rng.matrix(2, 2);
    let nu = eigenvalues(&a).unwrap()[1] - eigenvalues(&b).unwrap()[0];
    let r = transformator_resolvent(&HoloFun2::Diff, &a, &b, nu, &rng.matrix(3, 2), &opts());
    assert!(matches!(r, Err(Error::NuInSpectrum(_))));
}

#[test]
fn funm_is_multiplicative() {
    let mut rng = MatrixRng::seeded(15);
    let a = rng.matrix_right_of(6, 0.5).unwrap();
    let rational = HoloFun1::rational(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0), c(9.0, 0.0)]).unwrap();
    let pairs = [
        (HoloFun1::exp(1.0), HoloFun1::Pow(3)),
        (HoloFun1::inv_shift(c(-1.0, 0.5)), rational.clone()),
        (HoloFun1::Sqrt, HoloFun1::Log),
        (HoloFun1::xexp(0.5), HoloFun1::Sqrt),
    ];
    for (f, g) in pairs {
        let fa = funm(&f, &a, &opts()).unwrap();
        let ga = funm(&g, &a, &opts()).unwrap();
        let fg = funm(&f.clone().product(g.clone()), &a, &opts()).unwrap();
        let r = fg.dist(&fa.matmul(&ga)) / fg.norm_fro();
        assert!(r <= 1e-9, "{f} * {g}: {r:e}");
        let sum = funm(&f.clone().sum(g.clone()), &a, &opts()).unwrap();
        assert!(sum.rel_dist(&(fa + ga)) <= 1e-9);
    }
    let root = funm(&HoloFun1::Sqrt, &a, &opts()).unwrap();
    assert!(root.matmul(&root).rel_dist(&a) < 1e-9);
}

#[test]
fn one_variable_spectral_mapping() {
    let mut rng = MatrixRng::seeded(16);
    let a = rng.matrix_right_of(6, 0.5).unwrap();
    let eigs = eigenvalues(&a).unwrap();
    for f in [HoloFun1::exp(1.0), HoloFun1::Pow(3), HoloFun1::Log, HoloFun1::inv_shift(c(-1.0, 0.0))] {
        let got = eigenvalues(&funm(&f, &a, &opts()).unwrap()).unwrap();
        let want: Vec<Complex64> = eigs.iter().map(|&l| f.eval(l)).collect();
        assert!(multiset_distance(&got, &want) <= 1e-6, "{f}");
    }
}
