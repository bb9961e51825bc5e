//! Reference computations that share no code path with the algorithms they
//! check: Taylor exponentials, characteristic-polynomial roots, Kronecker
//! solves with complete pivoting, RK4 and Hungarian matching.

use opcalc_core::{Complex64, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Matrix exponential by Taylor series with scaling and squaring.
pub fn expm_taylor(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.norm_fro();
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.25 {
        s += 1;
    }
    let scaled = a.scale_real(1.0 / 2f64.powi(s as i32));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale_real(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Solves `M x = b` by Gaussian elimination with complete pivoting.
pub fn gauss_solve(m: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    assert_eq!(m.cols(), n);
    assert_eq!(b.rows(), n);
    let k_rhs = b.cols();
    let mut a = m.clone();
    let mut x = b.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = a[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        assert!(pv > 0.0, "oracle system is singular");
        for j in 0..n {
            let t = a[(k, j)];
            a[(k, j)] = a[(pi, j)];
            a[(pi, j)] = t;
        }
        for j in 0..k_rhs {
            let t = x[(k, j)];
            x[(k, j)] = x[(pi, j)];
            x[(pi, j)] = t;
        }
        for i in 0..n {
            let t = a[(i, k)];
            a[(i, k)] = a[(i, pj)];
            a[(i, pj)] = t;
        }
        col_perm.swap(k, pj);
        let p = a[(k, k)];
        for i in (k + 1)..n {
            let l = a[(i, k)] / p;
            if l == ZERO {
                continue;
            }
            for j in k..n {
                let u = a[(k, j)];
                a[(i, j)] -= l * u;
            }
            for j in 0..k_rhs {
                let u = x[(k, j)];
                x[(i, j)] -= l * u;
            }
        }
    }
    let mut y = ComplexMatrix::zeros(n, k_rhs);
    for j in 0..k_rhs {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for t in (i + 1)..n {
                s -= a[(i, t)] * y[(t, j)];
            }
            y[(i, j)] = s / a[(i, i)];
        }
    }
    let mut out = ComplexMatrix::zeros(n, k_rhs);
    for (pos, &orig) in col_perm.iter().enumerate() {
        for j in 0..k_rhs {
            out[(orig, j)] = y[(pos, j)];
        }
    }
    out
}

fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[(j * rows + i, 0)])
}

/// `AZ − ZB = C` via `(Iₘ⊗A − Bᵀ⊗Iₙ) vec Z = vec C`.
pub fn sylvester_kron(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.rows(), b.rows());
    let op = ComplexMatrix::identity(m).kron(a) - b.transpose().kron(&ComplexMatrix::identity(n));
    unvec(&gauss_solve(&op, &c.vec()), n, m)
}

/// `Z − AZB = C` via `(I − Bᵀ⊗A) vec Z = vec C`.
pub fn stein_kron(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.rows(), b.rows());
    let op = ComplexMatrix::identity(n * m) - b.transpose().kron(a);
    unvec(&gauss_solve(&op, &c.vec()), n, m)
}

/// Materializes a linear map on `n×m` matrices column by column.
pub fn lift_of(n: usize, m: usize, mut apply: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut lift = ComplexMatrix::zeros(n * m, n * m);
    for col in 0..n * m {
        let mut e = ComplexMatrix::zeros(n, m);
        e[(col % n, col / n)] = ONE;
        let image = apply(&e).vec();
        for row in 0..n * m {
            lift[(row, col)] = image[(row, 0)];
        }
    }
    lift
}

/// Monic characteristic polynomial, highest degree first (Faddeev–LeVerrier).
pub fn charpoly(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.rows();
    let mut coeffs = vec![ONE];
    // M_k = A M_{k−1} + c_{k−1} I,  c_k = −tr(A M_k)/k
    let mut mk = ComplexMatrix::zeros(n, n);
    let mut ck = ONE;
    for k in 1..=n {
        mk = a.matmul(&mk).shift(ck);
        ck = -a.matmul(&mk).trace() / k as f64;
        coeffs.push(ck);
    }
    coeffs
}

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64, Complex64) {
    let mut v = p[0];
    let mut d = ZERO;
    let mut dd = ZERO;
    for &c in &p[1..] {
        dd = dd * z + d;
        d = d * z + v;
        v = v * z + c;
    }
    (v, d, 2.0 * dd)
}

fn laguerre(p: &[Complex64], mut z: Complex64) -> Complex64 {
    let deg = (p.len() - 1) as f64;
    for it in 0..500 {
        let (v, d, dd) = horner(p, z);
        if v.norm() == 0.0 {
            return z;
        }
        let g = d / v;
        let h = g * g - dd / v;
        let root = ((deg - 1.0) * (deg * h - g * g)).sqrt();
        let den = if (g + root).norm() >= (g - root).norm() { g + root } else { g - root };
        let step = if den.norm() == 0.0 {
            Complex64::from_polar(1.0 + z.norm(), it as f64)
        } else {
            deg / den
        };
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Roots of a polynomial (highest degree first) by Laguerre with deflation and polishing.
pub fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let mut q: Vec<Complex64> = p.to_vec();
    let mut roots = Vec::with_capacity(p.len() - 1);
    while q.len() > 1 {
        let z = laguerre(&q, ZERO);
        roots.push(z);
        // synthetic division
        let mut next = Vec::with_capacity(q.len() - 1);
        let mut acc = ZERO;
        for &c in &q[..q.len() - 1] {
            acc = acc * z + c;
            next.push(acc);
        }
        q = next;
    }
    roots.into_iter().map(|z| laguerre(p, z)).collect()
}

/// Eigenvalues as roots of the characteristic polynomial.
pub fn eigenvalues_charpoly(a: &ComplexMatrix) -> Vec<Complex64> {
    poly_roots(&charpoly(a))
}

/// Minimum-cost assignment (Hungarian method); returns `assign[i] = j`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Largest pairwise distance under the optimal matching of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    if a.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    hungarian(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}

/// `y(t)` for `E y'' + F y' + H y = 0`, `y(0) = y0`, `y'(0) = y1`, by classical RK4 with step ≤ `h`.
pub fn rk4_pencil(
    e: &ComplexMatrix,
    f: &ComplexMatrix,
    hm: &ComplexMatrix,
    y0: &ComplexMatrix,
    y1: &ComplexMatrix,
    t: f64,
    h: f64,
) -> ComplexMatrix {
    let n = e.rows();
    let e_inv = gauss_solve(e, &ComplexMatrix::identity(n));
    let ef = e_inv.matmul(f);
    let eh = e_inv.matmul(hm);
    let rhs = |y: &ComplexMatrix, v: &ComplexMatrix| -> (ComplexMatrix, ComplexMatrix) {
        (v.clone(), -(ef.matmul(v) + eh.matmul(y)))
    };
    let steps = (t / h).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut y = y0.clone();
    let mut v = y1.clone();
    if t == 0.0 {
        return y;
    }
    for _ in 0..steps {
        let (k1y, k1v) = rhs(&y, &v);
        let (k2y, k2v) = rhs(&(&y + &k1y.scale_real(dt / 2.0)), &(&v + &k1v.scale_real(dt / 2.0)));
        let (k3y, k3v) = rhs(&(&y + &k2y.scale_real(dt / 2.0)), &(&v + &k2v.scale_real(dt / 2.0)));
        let (k4y, k4v) = rhs(&(&y + &k3y.scale_real(dt)), &(&v + &k3v.scale_real(dt)));
        y += &(k1y + k2y.scale_real(2.0) + k3y.scale_real(2.0) + k4y).scale_real(dt / 6.0);
        v += &(k1v + k2v.scale_real(2.0) + k3v.scale_real(2.0) + k4v).scale_real(dt / 6.0);
    }
    y
}

/// `AZ + ZB + ZCZ + D`.
pub fn riccati_residual(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    z: &ComplexMatrix,
) -> ComplexMatrix {
    a.matmul(z) + z.matmul(b) + z.matmul(c).matmul(z) + d.clone()
}

/// Newton's method on the Riccati residual with Kronecker-solved steps.
pub fn riccati_newton(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    z0: &ComplexMatrix,
) -> ComplexMatrix {
    let (n, m) = z0.shape();
    let mut z = z0.clone();
    for _ in 0..50 {
        let r = riccati_residual(a, b, c, d, &z);
        if r.norm_fro() <= 1e-15 * (1.0 + d.norm_fro()) {
            break;
        }
        let left = a + &z.matmul(c);
        let right = b + &c.matmul(&z);
        let op = ComplexMatrix::identity(m).kron(&left) + right.transpose().kron(&ComplexMatrix::identity(n));
        let dz = unvec(&gauss_solve(&op, &r.vec().scale_real(-1.0)), n, m);
        z += &dz;
        if dz.norm_fro() <= 1e-16 * (1.0 + z.norm_fro()) {
            break;
        }
    }
    z
}
