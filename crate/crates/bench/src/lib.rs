//! Seeded inputs shared by the benchmarks.

use opcalc_core::random::MatrixRng;
use opcalc_core::sylvester::SylvesterProblem;
use opcalc_core::ComplexMatrix;

pub fn square(seed: u64, n: usize) -> ComplexMatrix {
    MatrixRng::seeded(seed).matrix(n, n)
}

/// A with spectrum left of −1, B right of +1.
pub fn separated_sylvester(seed: u64, n: usize, m: usize) -> SylvesterProblem {
    let mut rng = MatrixRng::seeded(seed);
    let a = rng.matrix_left_of(n, -1.0).expect("left-shifted matrix");
    let b = rng.matrix_right_of(m, 1.0).expect("right-shifted matrix");
    SylvesterProblem::new(a, b, rng.matrix(n, m)).expect("shapes agree")
}

/// Solvent pair `(A1, A2)` for the monic pencil `(λ − A2)(λ − A1)`.
pub fn solvents(seed: u64, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = MatrixRng::seeded(seed);
    (
        rng.matrix_left_of(n, -0.5).expect("left-shifted matrix"),
        rng.matrix_right_of(n, 0.5).expect("right-shifted matrix"),
    )
}
