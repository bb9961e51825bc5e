use opcalc_core::calculus::{funm, CalculusOptions};
use opcalc_core::frechet::{
    frechet, frechet_block_oracle, frechet_exp, frechet_norm_estimate, frechet_spectrum, frechet_xexp,
    inverse_frechet, perturbed_resolvent, DifferentialRequest,
};
use opcalc_core::holofun::HoloFun1;
use opcalc_core::numcore::{eigenvalues, resolvent};
use opcalc_core::random::MatrixRng;
use opcalc_core::sylvester::kron_sylvester;
use opcalc_core::{Complex64, ComplexMatrix, Error};
use opcalc_oracles::{eigenvalues_charpoly, lift_of, multiset_distance};

fn opts() -> CalculusOptions {
    CalculusOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rational() -> HoloFun1 {
    // (z² + 1)/(z − 5)
    HoloFun1::rational(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-5.0, 0.0)]).unwrap()
}

fn catalogue() -> Vec<HoloFun1> {
    vec![HoloFun1::exp(1.0), HoloFun1::Pow(3), rational()]
}

fn diff(f: &HoloFun1, a: &ComplexMatrix, d: &ComplexMatrix) -> ComplexMatrix {
    frechet(&DifferentialRequest::new(f.clone(), a.clone(), d.clone()).unwrap(), &opts()).unwrap()
}

#[test]
fn matches_block_oracle_and_central_differences() {
    for seed in 0..3 {
        let mut rng = MatrixRng::seeded(seed);
        let a = rng.matrix(5, 5);
        let d = rng.matrix(5, 5);
        for f in catalogue() {
            let df = diff(&f, &a, &d);
            let block = frechet_block_oracle(&f, &a, &d, &opts()).unwrap();
            assert!(df.rel_dist(&block) <= 1e-8, "{f} seed {seed}: {:e}", df.rel_dist(&block));
            let h = 1e-5;
            let plus = funm(&f, &(&a + &d.scale_real(h)), &opts()).unwrap();
            let minus = funm(&f, &(&a - &d.scale_real(h)), &opts()).unwrap();
            let fd = (plus - minus).scale_real(0.5 / h);
            assert!(df.rel_dist(&fd) <= 1e-4, "{f} seed {seed}: {:e}", df.rel_dist(&fd));
        }
    }
}

#[test]
fn remainder_is_quadratic() {
    let mut rng = MatrixRng::seeded(17);
    let a = rng.matrix(5, 5);
    let dir = rng.matrix(5, 5);
    let dir = dir.scale_real(1.0 / dir.norm_fro());
    let f = HoloFun1::exp(1.0);
    let fa = funm(&f, &a, &opts()).unwrap();
    let ks: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            let d = dir.scale_real(eps);
            let rem = funm(&f, &(&a + &d), &opts()).unwrap() - fa.clone() - diff(&f, &a, &d);
            rem.norm_fro() / (eps * eps)
        })
        .collect();
    let (lo, hi) = ks.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &k| (l.min(k), h.max(k)));
    assert!(hi / lo < 1.5, "remainder constants {ks:?}");
}

#[test]
fn karplus_schwinger_forms() {
    let mut rng = MatrixRng::seeded(23);
    let a = rng.matrix(5, 5);
    let d = rng.matrix(5, 5);
    for t in [0.5, 1.3] {
        let ks = frechet_exp(&a, &d, t, &opts()).unwrap();
        let df = diff(&HoloFun1::exp(t), &a, &d);
        assert!(ks.rel_dist(&df) <= 1e-8, "t {t}: {:e}", ks.rel_dist(&df));
        let block = frechet_block_oracle(&HoloFun1::exp(t), &a, &d, &opts()).unwrap();
        assert!(ks.rel_dist(&block) <= 1e-8);

        let kx = frechet_xexp(&a, &d, t, &opts()).unwrap();
        let bx = frechet_block_oracle(&HoloFun1::xexp(t), &a, &d, &opts()).unwrap();
        assert!(kx.rel_dist(&bx) <= 1e-8, "t {t}: {:e}", kx.rel_dist(&bx));
        assert!(diff(&HoloFun1::xexp(t), &a, &d).rel_dist(&bx) <= 1e-8);
    }
}

#[test]
fn commuting_direction() {
    let mut rng = MatrixRng::seeded(29);
    let a = rng.matrix(4, 4);
    let d = a.matmul(&a).scale_real(0.5) + a.scale_real(-0.3);
    let t = 0.9;
    let e = funm(&HoloFun1::exp(t), &a, &opts()).unwrap();
    let want = e.matmul(&d).scale_real(t);
    assert!(frechet_exp(&a, &d, t, &opts()).unwrap().rel_dist(&want) < 1e-9);
    let want_x = e.matmul(&d) + a.matmul(&e).matmul(&d).scale_real(t);
    assert!(frechet_xexp(&a, &d, t, &opts()).unwrap().rel_dist(&want_x) < 1e-9);
}

#[test]
fn commutator_and_product_rules() {
    let mut rng = MatrixRng::seeded(31);
    let a = rng.matrix(5, 5);
    let x = rng.matrix(5, 5);
    let tol = opts().tol;
    for f in catalogue() {
        let fa = funm(&f, &a, &opts()).unwrap();
        let comm = a.matmul(&x) - x.matmul(&a);
        let lhs = diff(&f, &a, &comm);
        let rhs = fa.matmul(&x) - x.matmul(&fa);
        assert!(lhs.dist(&rhs) <= 10.0 * tol * (1.0 + rhs.norm_fro()), "{f}");
    }
    let d = rng.matrix(5, 5);
    let (g, h) = (HoloFun1::exp(0.5), rational());
    let gh = g.clone().product(h.clone());
    let lhs = diff(&gh, &a, &d);
    let rhs = diff(&g, &a, &d).matmul(&funm(&h, &a, &opts()).unwrap())
        + funm(&g, &a, &opts()).unwrap().matmul(&diff(&h, &a, &d));
    assert!(lhs.dist(&rhs) <= 10.0 * tol * (1.0 + rhs.norm_fro()));
}

#[test]
fn spectrum_of_the_square_differential() {
    let a = ComplexMatrix::from_real_rows(&[&[1.0, 5.0], &[0.0, 2.0]]);
    let got = frechet_spectrum(&HoloFun1::Pow(2), &a).unwrap();
    let want = [c(2.0, 0.0), c(3.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
    assert!(multiset_distance(&got, &want) < 1e-12);
}

#[test]
fn spectrum_matches_lifted_eigenvalues() {
    for seed in 0..3 {
        let mut rng = MatrixRng::seeded(40 + seed);
        let eigs = rng.separated_points(4, c(0.0, 0.0), 1.2, 0.3);
        let a = rng.with_spectrum(&eigs).unwrap();
        for f in catalogue() {
            let lift = lift_of(4, 4, |e| diff(&f, &a, e));
            let got = eigenvalues(&lift).unwrap();
            let want = frechet_spectrum(&f, &a).unwrap();
            assert!(multiset_distance(&got, &want) <= 1e-6, "{f} seed {seed}");
        }
    }
}

#[test]
fn norm_estimate_matches_largest_singular_value() {
    let mut rng = MatrixRng::seeded(51);
    let a = rng.matrix(3, 3);
    let f = HoloFun1::exp(1.0);
    let lift = lift_of(3, 3, |e| diff(&f, &a, e));
    let gram = lift.adjoint().matmul(&lift);
    let top = eigenvalues_charpoly(&gram).iter().map(|z| z.re).fold(0.0, f64::max).sqrt();
    let est = frechet_norm_estimate(&f, &a, &opts()).unwrap();
    assert!((est - top).abs() <= 1e-6 * top, "{est} vs {top}");
}

#[test]
fn inverse_differential() {
    let mut rng = MatrixRng::seeded(61);
    let db = rng.matrix(4, 4);
    let a = rng.matrix(4, 4);
    assert!(inverse_frechet(&HoloFun1::Id, &a, &db, &opts()).unwrap().rel_dist(&db) < 1e-9);

    // for the square, A X + X A = ΔB with σ(A) in the right half-plane
    let ar = rng.matrix_right_of(4, 0.5).unwrap();
    let x = inverse_frechet(&HoloFun1::Pow(2), &ar, &db, &opts()).unwrap();
    let want = kron_sylvester(&ar, &(-ar.clone()), &db).unwrap();
    assert!(x.rel_dist(&want) < 1e-8);

    let f = HoloFun1::exp(1.0);
    let back = diff(&f, &a, &inverse_frechet(&f, &a, &db, &opts()).unwrap());
    assert!(back.rel_dist(&db) <= 1e-7);
}

#[test]
fn inverse_spectrum_identity() {
    let mut rng = MatrixRng::seeded(71);
    let a = rng.matrix(3, 3);
    let f = HoloFun1::exp(1.0);
    let lift = lift_of(3, 3, |e| inverse_frechet(&f, &a, e, &opts()).unwrap());
    let want: Vec<Complex64> = frechet_spectrum(&f, &a).unwrap().iter().map(|v| 1.0 / v).collect();
    assert!(multiset_distance(&eigenvalues(&lift).unwrap(), &want) <= 1e-6);
}

#[test]
fn degenerate_inverse_is_refused() {
    // eigenvalues ±1 give (λ + μ) = 0 for the square
    let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.3], &[0.0, -1.0]]);
    let r = inverse_frechet(&HoloFun1::Pow(2), &a, &ComplexMatrix::identity(2), &opts());
    assert!(matches!(r, Err(Error::DegenerateDifferential { .. })));
}

#[test]
fn perturbed_resolvent_is_a_resolvent() {
    let mut rng = MatrixRng::seeded(81);
    let a = rng.matrix(4, 4);
    let d = rng.matrix(4, 4).scale_real(0.2);
    let (l, m) = (c(3.0, 1.0), c(-2.5, 2.0));
    let tl = perturbed_resolvent(&a, &d, l).unwrap();
    let tm = perturbed_resolvent(&a, &d, m).unwrap();
    let hilbert = &tl - &tm + (tl.matmul(&tm)).scale(l - m);
    assert!(hilbert.norm_fro() <= 1e-10 * tl.norm_fro() * tm.norm_fro());
    assert!(tl.rel_dist(&resolvent(&(&a + &d), l).unwrap()) < 1e-12);
}
