//! Dense matrix algebra shared by every other module: Kronecker products,
//! shuffle-product powers, spectral radii and symmetric eigenvalue extrema.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Tolerance on `max |S - S^T|` accepted before symmetrizing.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Kronecker product `x ⊗ y`.
pub fn kron(x: &RealMatrix, y: &RealMatrix) -> RealMatrix {
    let (ry, cy) = y.shape();
    let mut out = RealMatrix::zeros(x.nrows() * ry, x.ncols() * cy);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let s = x[(i, j)];
            if s == 0.0 {
                continue;
            }
            for k in 0..ry {
                for l in 0..cy {
                    out[(i * ry + k, j * cy + l)] = s * y[(k, l)];
                }
            }
        }
    }
    out
}

/// `m^p` by repeated multiplication; `m^0 = I`.
pub fn mat_pow(m: &RealMatrix, p: usize) -> RealMatrix {
    let mut out = RealMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Writes `block` into `target` with its top-left corner at `(row, col)`.
pub fn set_block(target: &mut RealMatrix, row: usize, col: usize, block: &RealMatrix) {
    target
        .view_mut((row, col), block.shape())
        .copy_from(block);
}

/// Block-diagonal matrix from a list of blocks.
pub fn block_diag(blocks: &[&RealMatrix]) -> RealMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        set_block(&mut out, r, c, b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all parts must share a row count.
pub fn hstack(parts: &[&RealMatrix]) -> RealMatrix {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack row mismatch");
        set_block(&mut out, 0, c, p);
        c += p.ncols();
    }
    out
}

/// Vertical concatenation; all parts must share a column count.
pub fn vstack(parts: &[&RealMatrix]) -> RealMatrix {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = RealMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack column mismatch");
        set_block(&mut out, r, 0, p);
        r += p.nrows();
    }
    out
}

/// Largest absolute entry (0 for empty matrices).
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|v| Complex::new(v, 0.0))
}

/// Memoized triangle of shuffle powers `A^[i] B^[j]` for `i + j <= max_order`.
#[derive(Debug, Clone)]
pub struct ShuffleTable {
    base_a: RealMatrix,
    base_b: RealMatrix,
    max_order: usize,
    // row-major over (i, j) with i + j <= max_order
    table: Vec<Vec<RealMatrix>>,
}

impl ShuffleTable {
    pub fn new(a: &RealMatrix, b: &RealMatrix, max_order: usize) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "shuffle product needs equal square matrices, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let n = a.nrows();
        let mut table: Vec<Vec<RealMatrix>> = Vec::with_capacity(max_order + 1);
        for i in 0..=max_order {
            let mut row = Vec::with_capacity(max_order + 1 - i);
            for j in 0..=(max_order - i) {
                let entry = match (i, j) {
                    (0, 0) => RealMatrix::identity(n, n),
                    (0, _) => b * &row[j - 1],
                    (_, 0) => a * &table[i - 1][0],
                    _ => a * &table[i - 1][j] + b * &row[j - 1],
                };
                row.push(entry);
            }
            table.push(row);
        }
        Ok(Self {
            base_a: a.clone(),
            base_b: b.clone(),
            max_order,
            table,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn base_a(&self) -> &RealMatrix {
        &self.base_a
    }

    pub fn base_b(&self) -> &RealMatrix {
        &self.base_b
    }

    /// `A^[i] B^[j]`. Panics if `i + j` exceeds the table order.
    pub fn get(&self, i: usize, j: usize) -> &RealMatrix {
        assert!(
            i + j <= self.max_order,
            "shuffle power ({i},{j}) beyond table order {}",
            self.max_order
        );
        &self.table[i][j]
    }
}

/// `A^[i] B^[j]`, the sum of all words with `i` copies of `A` and `j` copies of `B`.
pub fn shuffle_power(a: &RealMatrix, b: &RealMatrix, i: usize, j: usize) -> Result<RealMatrix> {
    Ok(ShuffleTable::new(a, b, i + j)?.get(i, j).clone())
}

/// Eigenvalues of a general complex square matrix via the complex Schur form.
pub fn complex_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {:?}",
            m.shape()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("complex Schur iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur form is not triangular".into()))?;
    Ok(eig.iter().copied().collect())
}

/// `max |λ|` over the eigenvalues of `m`.
pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(complex_eigenvalues(m)?
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm())))
}

pub fn spectral_radius_real(m: &RealMatrix) -> Result<f64> {
    spectral_radius(&to_complex(m))
}

/// Largest singular value of a complex matrix.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Checks near-symmetry and returns `(S + S^T) / 2`.
pub fn symmetrize(s: &RealMatrix) -> Result<RealMatrix> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {:?}",
            s.shape()
        )));
    }
    let asym = max_abs(&(s - s.transpose()));
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    Ok((s + s.transpose()) * 0.5)
}

/// Smallest and largest eigenvalue of the symmetrized input.
pub fn sym_eig_extrema(s: &RealMatrix) -> Result<(f64, f64)> {
    let sym = symmetrize(s)?;
    if sym.nrows() == 0 {
        return Err(Error::Dimension("empty matrix has no eigenvalues".into()));
    }
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Smallest eigenvalue and a unit eigenvector for it (input assumed symmetric).
pub(crate) fn min_eigpair(s: &RealMatrix) -> (f64, nalgebra::DVector<f64>) {
    let eig = SymmetricEigen::new(s.clone());
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    (val, eig.eigenvectors.column(idx).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RealMatrix {
        RealMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn kron_identity_and_scalar() {
        let i6 = kron(&RealMatrix::identity(2, 2), &RealMatrix::identity(3, 3));
        assert_eq!(i6, RealMatrix::identity(6, 6));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random(&mut rng, 3, 2);
        let two = RealMatrix::from_element(1, 1, 2.0);
        assert_eq!(kron(&two, &y), &y * 2.0);
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (x, y, u, v) = (
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
                random(&mut rng, 2, 2),
            );
            let lhs = kron(&x, &y) * kron(&u, &v);
            // elementwise evaluation of (XU) ⊗ (YV)
            let xu = &x * &u;
            let yv = &y * &v;
            let mut rhs = RealMatrix::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            rhs[(2 * i + k, 2 * j + l)] = xu[(i, j)] * yv[(k, l)];
                        }
                    }
                }
            }
            assert!(max_abs(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn kron_bilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, x2, y) = (random(&mut rng, 2, 3), random(&mut rng, 2, 3), random(&mut rng, 3, 2));
        let (alpha, beta) = (0.7, -1.3);
        let lhs = kron(&(&x * alpha + &x2 * beta), &y);
        let rhs = kron(&x, &y) * alpha + kron(&x2, &y) * beta;
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn shuffle_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(&mut rng, 2, 2);
        let b = random(&mut rng, 2, 2);
        let expected = &a * &b * &b + &b * &a * &b + &b * &b * &a;
        let got = shuffle_power(&a, &b, 1, 2).unwrap();
        assert!(max_abs(&(got - expected)) < 1e-14);

        let cube = shuffle_power(&a, &b, 3, 0).unwrap();
        assert!(max_abs(&(cube - &a * &a * &a)) < 1e-14);
        assert_eq!(shuffle_power(&a, &b, 0, 0).unwrap(), RealMatrix::identity(2, 2));
    }

    #[test]
    fn shuffle_two_two_matches_interleavings() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&mut rng, 3, 3);
        let b = random(&mut rng, 3, 3);
        // the 6 words with two A's and two B's
        let words = ["AABB", "ABAB", "ABBA", "BAAB", "BABA", "BBAA"];
        let mut sum = RealMatrix::zeros(3, 3);
        for w in words {
            let mut p = RealMatrix::identity(3, 3);
            for ch in w.chars() {
                p = if ch == 'A' { &p * &a } else { &p * &b };
            }
            sum += p;
        }
        let got = shuffle_power(&a, &b, 2, 2).unwrap();
        assert!(max_abs(&(got - sum)) < 1e-13);
    }

    #[test]
    fn shuffle_left_and_right_recursions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random(&mut rng, 2, 2);
        let b = random(&mut rng, 2, 2);
        let t = ShuffleTable::new(&a, &b, 8).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                let right = t.get(i - 1, j) * &a + t.get(i, j - 1) * &b;
                assert!(max_abs(&(t.get(i, j) - right)) < 1e-12);
            }
        }
    }

    #[test]
    fn shuffle_dimension_mismatch() {
        let a = RealMatrix::identity(2, 2);
        let b = RealMatrix::identity(3, 3);
        assert!(matches!(shuffle_power(&a, &b, 1, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn spectral_radius_examples() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(spectral_radius(&z).unwrap(), 0.0);

        let d = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.4, -0.7]));
        assert!((spectral_radius_real(&d).unwrap() - 0.7).abs() < 1e-15);

        // companion matrix of z^2 - z - 1
        let c = RealMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((spectral_radius_real(&c).unwrap() - golden).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_below_row_sum_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = ComplexMatrix::from_fn(4, 4, |_, _| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let row_sum = (0..4)
                .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(spectral_radius(&m).unwrap() <= row_sum + 1e-12);
        }
    }

    #[test]
    fn sym_extrema_examples() {
        assert_eq!(sym_eig_extrema(&RealMatrix::identity(3, 3)).unwrap(), (1.0, 1.0));
        let d = RealMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 5.0]));
        let (lo, hi) = sym_eig_extrema(&d).unwrap();
        assert!((lo + 2.0).abs() < 1e-14 && (hi - 5.0).abs() < 1e-14);
    }

    #[test]
    fn sym_extrema_rejects_asymmetric() {
        let s = RealMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_eig_extrema(&s), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn sym_extrema_vs_rayleigh_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random(&mut rng, 4, 4);
        let s = &g + g.transpose();
        let (lo, _) = sym_eig_extrema(&s).unwrap();
        // oracle: minimum Rayleigh quotient over random unit vectors
        let rq = |u: &nalgebra::DVector<f64>| (u.transpose() * &s * u)[(0, 0)];
        let mut best = f64::INFINITY;
        let mut best_u = nalgebra::DVector::zeros(4);
        for _ in 0..100_000 {
            let v = nalgebra::DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let nv = v.norm();
            if nv < 1e-3 {
                continue;
            }
            let u = v / nv;
            let q = rq(&u);
            if q < best {
                best = q;
                best_u = u;
            }
        }
        assert!(best >= lo - 1e-12);
        // polish the best sample by gradient descent on the sphere
        let mut u = best_u;
        for _ in 0..20_000 {
            let g = (&s * &u) * 2.0 - &u * (2.0 * rq(&u));
            let next = &u - g * 0.05;
            u = &next / next.norm();
        }
        let polished = rq(&u);
        assert!(polished >= lo - 1e-12);
        assert!(polished - lo < 1e-6, "sampled {polished} vs exact {lo}");
    }
}
