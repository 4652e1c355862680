//! The system under study and every structured block family derived from it.
//!
//! All families are built from the internal (`b > a`) labelling of a
//! [`SystemPair`]; the swap, when it happens, is recorded on the pair.

use crate::algebra::{hstack, kron, mat_pow, set_block, RealMatrix, ShuffleTable};
use crate::error::{Error, Result};

/// Default cap on the block order `k`.
pub const DEFAULT_MAX_K: usize = 12;

/// Coefficient pair of `x(t) = A x(t-a) + B x(t-b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPair {
    a: RealMatrix,
    b: RealMatrix,
    delay_a: f64,
    delay_b: f64,
    swapped: bool,
}

impl SystemPair {
    /// Builds a pair, swapping `(A, a)` and `(B, b)` when `a > b` so that the
    /// internal labelling always has the longer delay on `B`.
    pub fn new(a: RealMatrix, b: RealMatrix, delay_a: f64, delay_b: f64) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::Dimension(format!("A must be square and non-empty, got {:?}", a.shape())));
        }
        if a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "A is {:?} but B is {:?}",
                a.shape(),
                b.shape()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        if !(delay_a.is_finite() && delay_b.is_finite() && delay_a > 0.0 && delay_b > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delays must be finite and positive, got a={delay_a}, b={delay_b}"
            )));
        }
        if delay_a > delay_b {
            Ok(Self { a: b, b: a, delay_a: delay_b, delay_b: delay_a, swapped: true })
        } else {
            Ok(Self { a, b, delay_a, delay_b, swapped: false })
        }
    }

    /// Convenience constructor with delays `(1, 2)`; strong stability does not
    /// depend on the delay values.
    pub fn from_matrices(a: RealMatrix, b: RealMatrix) -> Result<Self> {
        Self::new(a, b, 1.0, 2.0)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Coefficient of the shorter delay (internal labelling).
    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    /// Coefficient of the longer delay (internal labelling).
    pub fn b(&self) -> &RealMatrix {
        &self.b
    }

    pub fn delay_a(&self) -> f64 {
        self.delay_a
    }

    pub fn delay_b(&self) -> f64 {
        self.delay_b
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn equal_delays(&self) -> bool {
        self.delay_a == self.delay_b
    }

    /// `(A, B, a, b)` in the caller's original labelling.
    pub fn original(&self) -> (&RealMatrix, &RealMatrix, f64, f64) {
        if self.swapped {
            (&self.b, &self.a, self.delay_b, self.delay_a)
        } else {
            (&self.a, &self.b, self.delay_a, self.delay_b)
        }
    }

    pub fn sum(&self) -> RealMatrix {
        &self.a + &self.b
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput("block order k must be at least 1".into()));
    }
    Ok(())
}

/// `[[D, S, 0, ...], [0, D, S, ...], ..., [0, ..., D, S]]` with `k` block rows:
/// the bidiagonal pattern of `[𝒜_k ℬ_k]` (and of its uncertainty analogue).
pub fn bidiagonal_stamp(diag: &RealMatrix, sup: &RealMatrix, k: usize) -> RealMatrix {
    assert_eq!(diag.shape(), sup.shape(), "stamp blocks must share a shape");
    let (r, c) = diag.shape();
    let mut out = RealMatrix::zeros(k * r, (k + 1) * c);
    for i in 0..k {
        set_block(&mut out, i * r, i * c, diag);
        set_block(&mut out, i * r, (i + 1) * c, sup);
    }
    out
}

/// Shift realization and the coefficient-linear blocks of the main LMI.
#[derive(Debug, Clone)]
pub struct Thm4Family {
    pub k: usize,
    pub n: usize,
    pub shift_a: RealMatrix,
    pub shift_b: RealMatrix,
    pub lift: RealMatrix,
    pub script_a: RealMatrix,
    pub script_b: RealMatrix,
}

impl Thm4Family {
    /// `[A_k B_k]`.
    pub fn shift(&self) -> RealMatrix {
        hstack(&[&self.shift_a, &self.shift_b])
    }

    /// `[𝒜_k ℬ_k]`.
    pub fn script(&self) -> RealMatrix {
        hstack(&[&self.script_a, &self.script_b])
    }
}

pub fn build_thm4(sys: &SystemPair, k: usize) -> Result<Thm4Family> {
    check_k(k)?;
    let n = sys.n();
    let kn = k * n;
    let mut shift_a = RealMatrix::zeros(kn, kn);
    for i in 0..kn.saturating_sub(n) {
        shift_a[(i, i + n)] = 1.0;
    }
    let mut shift_b = RealMatrix::zeros(kn, n);
    set_block(&mut shift_b, kn - n, 0, &RealMatrix::identity(n, n));
    let mut lift = RealMatrix::zeros(kn, kn + n);
    set_block(&mut lift, 0, 0, &RealMatrix::identity(kn, kn));

    let stamped = bidiagonal_stamp(sys.b(), sys.a(), k);
    let script_a = stamped.columns(0, kn).into_owned();
    let script_b = stamped.columns(kn, n).into_owned();
    Ok(Thm4Family { k, n, shift_a, shift_b, lift, script_a, script_b })
}

/// Power-based block family of the Bliman-type condition.
#[derive(Debug, Clone)]
pub struct BlimanFamily {
    pub k: usize,
    pub n: usize,
    pub abar: RealMatrix,
    pub bbar: RealMatrix,
    pub script_abar: RealMatrix,
    pub script_bbar: RealMatrix,
    pub cbar: RealMatrix,
    pub dbar: RealMatrix,
}

impl BlimanFamily {
    pub fn shift(&self) -> RealMatrix {
        hstack(&[&self.abar, &self.bbar])
    }

    pub fn script(&self) -> RealMatrix {
        hstack(&[&self.script_abar, &self.script_bbar])
    }
}

pub fn build_bliman(sys: &SystemPair, k: usize) -> Result<BlimanFamily> {
    check_k(k)?;
    let n = sys.n();
    let (a, b) = (sys.a(), sys.b());
    let pows: Vec<RealMatrix> = (0..=k).map(|p| mat_pow(a, p)).collect();
    let apb: Vec<RealMatrix> = pows.iter().map(|p| p * b).collect();

    let mut abar = RealMatrix::zeros(k * n, k * n);
    let mut script_abar = RealMatrix::zeros(k * n, k * n);
    let mut bbar = RealMatrix::zeros(k * n, n);
    let mut script_bbar = RealMatrix::zeros(k * n, n);
    for i in 0..k {
        for j in i..k {
            set_block(&mut script_abar, i * n, j * n, &apb[j - i]);
            if j > i {
                set_block(&mut abar, i * n, j * n, &apb[j - i - 1]);
            }
        }
        set_block(&mut bbar, i * n, 0, &pows[k - 1 - i]);
        set_block(&mut script_bbar, i * n, 0, &pows[k - i]);
    }
    let cbar = hstack(&apb[..k].iter().collect::<Vec<_>>());
    let dbar = pows[k].clone();
    Ok(BlimanFamily { k, n, abar, bbar, script_abar, script_bbar, cbar, dbar })
}

/// Shuffle-power transforms connecting the two block families.
#[derive(Debug, Clone)]
pub struct ShuffleFamily {
    pub k: usize,
    pub n: usize,
    pub w: RealMatrix,
    pub t: RealMatrix,
    pub c: RealMatrix,
    pub d: RealMatrix,
    /// Top-left `(k-1)n` block of `W_k`; empty when `k = 1`.
    pub u: RealMatrix,
    /// `[B^[k-1]A^[1], ..., B^[1]A^[k-1]]`; empty when `k = 1`.
    pub v: RealMatrix,
}

pub fn build_shuffle_family(sys: &SystemPair, k: usize) -> Result<ShuffleFamily> {
    check_k(k)?;
    let n = sys.n();
    let table = ShuffleTable::new(sys.a(), sys.b(), k)?;
    // W_k block (i, j), j >= i: A-count j - i, B-count k - 1 - j
    let mut w = RealMatrix::zeros(k * n, k * n);
    for i in 0..k {
        for j in i..k {
            set_block(&mut w, i * n, j * n, table.get(j - i, k - 1 - j));
        }
    }
    let mut t = RealMatrix::zeros((k + 1) * n, (k + 1) * n);
    set_block(&mut t, 0, 0, &w);
    set_block(&mut t, k * n, k * n, &RealMatrix::identity(n, n));

    let c_blocks: Vec<&RealMatrix> = (0..k).map(|j| table.get(j, k - j)).collect();
    let c = hstack(&c_blocks);
    let d = table.get(k, 0).clone();

    let u = w.view((0, 0), ((k - 1) * n, (k - 1) * n)).into_owned();
    let v = if k > 1 {
        let v_blocks: Vec<&RealMatrix> = (0..k - 1).map(|j| table.get(j + 1, k - 1 - j)).collect();
        hstack(&v_blocks)
    } else {
        RealMatrix::zeros(n, 0)
    };
    Ok(ShuffleFamily { k, n, w, t, c, d, u, v })
}

/// `E = [Bᵀ⊗A, Aᵀ⊗B, Aᵀ⊗A + Bᵀ⊗B − I⊗I]`.
#[derive(Debug, Clone)]
pub struct KroneckerData {
    pub e: RealMatrix,
}

pub fn build_kronecker_e(sys: &SystemPair) -> KroneckerData {
    let (a, b) = (sys.a(), sys.b());
    let n = sys.n();
    let (at, bt) = (a.transpose(), b.transpose());
    let eye = RealMatrix::identity(n * n, n * n);
    let third = kron(&at, a) + kron(&bt, b) - eye;
    KroneckerData { e: hstack(&[&kron(&bt, a), &kron(&at, b), &third]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{max_abs, to_complex, ComplexMatrix};
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> RealMatrix {
        RealMatrix::from_element(1, 1, v)
    }

    fn random_sys(rng: &mut ChaCha8Rng, n: usize) -> SystemPair {
        let a = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = RealMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        SystemPair::from_matrices(a, b).unwrap()
    }

    #[test]
    fn constructor_swaps_when_a_is_longer() {
        let sys = SystemPair::new(scalar(1.0), scalar(2.0), 3.0, 1.0).unwrap();
        assert!(sys.swapped());
        assert_eq!(sys.a()[(0, 0)], 2.0);
        assert_eq!(sys.delay_a(), 1.0);
        let (a, _, da, _) = sys.original();
        assert_eq!((a[(0, 0)], da), (1.0, 3.0));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(SystemPair::new(scalar(1.0), scalar(1.0), 0.0, 1.0).is_err());
        assert!(SystemPair::new(scalar(1.0), RealMatrix::zeros(2, 2), 1.0, 2.0).is_err());
        assert!(SystemPair::new(scalar(f64::NAN), scalar(1.0), 1.0, 2.0).is_err());
        assert!(SystemPair::new(scalar(1.0), scalar(1.0), 1.0, 1.0).unwrap().equal_delays());
    }

    #[test]
    fn thm4_shift_blocks() {
        let sys = SystemPair::from_matrices(RealMatrix::zeros(2, 2), RealMatrix::zeros(2, 2)).unwrap();
        let f = build_thm4(&sys, 2).unwrap();
        let mut expected_a = RealMatrix::zeros(4, 4);
        set_block(&mut expected_a, 0, 2, &RealMatrix::identity(2, 2));
        assert_eq!(f.shift_a, expected_a);
        let mut expected_b = RealMatrix::zeros(4, 2);
        set_block(&mut expected_b, 2, 0, &RealMatrix::identity(2, 2));
        assert_eq!(f.shift_b, expected_b);
        assert_eq!(f.lift.shape(), (4, 6));
    }

    #[test]
    fn thm4_k1_and_scalar_k3() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = random_sys(&mut rng, 2);
        let f = build_thm4(&sys, 1).unwrap();
        assert_eq!(f.shift_a, RealMatrix::zeros(2, 2));
        assert_eq!(f.shift_b, RealMatrix::identity(2, 2));
        assert_eq!(&f.script_a, sys.b());
        assert_eq!(&f.script_b, sys.a());

        let sys = SystemPair::from_matrices(scalar(2.0), scalar(3.0)).unwrap();
        let f = build_thm4(&sys, 3).unwrap();
        let expected = RealMatrix::from_row_slice(3, 3, &[3., 2., 0., 0., 3., 2., 0., 0., 3.]);
        assert_eq!(f.script_a, expected);
        assert_eq!(f.script_b, RealMatrix::from_column_slice(3, 1, &[0., 0., 2.]));
    }

    #[test]
    fn bliman_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random_sys(&mut rng, 2);
        let f = build_bliman(&sys, 1).unwrap();
        assert_eq!(f.abar, RealMatrix::zeros(2, 2));
        assert_eq!(f.bbar, RealMatrix::identity(2, 2));
        assert_eq!(&f.script_abar, sys.b());
        assert_eq!(&f.script_bbar, sys.a());
        assert_eq!(&f.cbar, sys.b());
        assert_eq!(&f.dbar, sys.a());

        let sys = SystemPair::from_matrices(scalar(2.0), scalar(3.0)).unwrap();
        let f = build_bliman(&sys, 2).unwrap();
        assert_eq!(f.abar, RealMatrix::from_row_slice(2, 2, &[0., 3., 0., 0.]));
        assert_eq!(f.script_abar, RealMatrix::from_row_slice(2, 2, &[3., 6., 0., 3.]));
        assert_eq!(f.bbar, RealMatrix::from_column_slice(2, 1, &[2., 1.]));
        assert_eq!(f.script_bbar, RealMatrix::from_column_slice(2, 1, &[4., 2.]));

        let sys = SystemPair::from_matrices(scalar(2.0), scalar(1.0)).unwrap();
        let f = build_bliman(&sys, 3).unwrap();
        assert_eq!(f.cbar, RealMatrix::from_row_slice(1, 3, &[1., 2., 4.]));
        assert_eq!(f.dbar, scalar(8.0));
    }

    #[test]
    fn shuffle_family_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = random_sys(&mut rng, 2);
        let f = build_shuffle_family(&sys, 1).unwrap();
        assert_eq!(f.w, RealMatrix::identity(2, 2));
        assert_eq!(f.t, RealMatrix::identity(4, 4));
        assert_eq!(&f.c, sys.b());
        assert_eq!(&f.d, sys.a());
        for k in 1..=4 {
            let f = build_shuffle_family(&sys, k).unwrap();
            assert!(max_abs(&(&f.d - mat_pow(sys.a(), k))) < 1e-14);
            let br = f.w.view(((k - 1) * 2, (k - 1) * 2), (2, 2)).into_owned();
            assert_eq!(br, RealMatrix::identity(2, 2));
        }

        let sys = SystemPair::from_matrices(scalar(2.0), scalar(3.0)).unwrap();
        let f = build_shuffle_family(&sys, 2).unwrap();
        assert_eq!(f.w, RealMatrix::from_row_slice(2, 2, &[3., 2., 0., 1.]));
        assert_eq!(f.c, RealMatrix::from_row_slice(1, 2, &[9., 12.]));
        assert_eq!(f.d, scalar(4.0));
    }

    #[test]
    fn kronecker_examples() {
        let n = 2;
        let sys = SystemPair::from_matrices(RealMatrix::identity(n, n), RealMatrix::zeros(n, n)).unwrap();
        assert_eq!(build_kronecker_e(&sys).e, RealMatrix::zeros(4, 12));

        let sys = SystemPair::from_matrices(scalar(2.0), scalar(3.0)).unwrap();
        assert_eq!(build_kronecker_e(&sys).e, RealMatrix::from_row_slice(1, 3, &[6., 6., 12.]));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = random_sys(&mut rng, 2);
        let e = build_kronecker_e(&sys).e;
        let (a, b) = (sys.a(), sys.b());
        // independent elementwise Kronecker: (X⊗Y)[2i+k, 2j+l] = X[i,j] Y[k,l]
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let (r, c) = (2 * i + k, 2 * j + l);
                        assert_eq!(e[(r, c)], b[(j, i)] * a[(k, l)]);
                        assert_eq!(e[(r, 4 + c)], a[(j, i)] * b[(k, l)]);
                        let id = if r == c { 1.0 } else { 0.0 };
                        let third = a[(j, i)] * a[(k, l)] + b[(j, i)] * b[(k, l)] - id;
                        assert!((e[(r, 8 + c)] - third).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn thm4_script_blocks_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (s1, s2) = (random_sys(&mut rng, 2), random_sys(&mut rng, 2));
        let (alpha, beta) = (0.3, -1.7);
        let mix = SystemPair::from_matrices(
            s1.a() * alpha + s2.a() * beta,
            s1.b() * alpha + s2.b() * beta,
        )
        .unwrap();
        for k in 1..=4 {
            let (f1, f2, fm) = (
                build_thm4(&s1, k).unwrap(),
                build_thm4(&s2, k).unwrap(),
                build_thm4(&mix, k).unwrap(),
            );
            let lin = f1.script() * alpha + f2.script() * beta;
            assert!(max_abs(&(fm.script() - lin)) < 1e-14);
            assert_eq!(f1.shift(), fm.shift());
            assert_eq!(f1.lift, fm.lift);
        }
    }

    fn e_pow(theta: f64, p: i32) -> Complex<f64> {
        Complex::from_polar(1.0, p as f64 * theta)
    }

    #[test]
    fn resolvent_and_modulation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=2 {
            let sys = random_sys(&mut rng, n);
            for k in 1..=4 {
                let f = build_thm4(&sys, k).unwrap();
                let kn = k * n;
                for g in 0..32 {
                    let theta = 2.0 * std::f64::consts::PI * g as f64 / 32.0;
                    let ejt = e_pow(theta, 1);
                    let m = ComplexMatrix::identity(kn, kn) * ejt - to_complex(&f.shift_a);
                    let z = m.lu().solve(&to_complex(&f.shift_b)).unwrap();
                    let mut expected = ComplexMatrix::zeros(kn, n);
                    for blk in 0..k {
                        let p = -((k - blk) as i32);
                        for d in 0..n {
                            expected[(blk * n + d, d)] = e_pow(theta, p);
                        }
                    }
                    assert!((&z - &expected).norm() < 1e-10);

                    let mut zi = ComplexMatrix::zeros(kn + n, n);
                    zi.view_mut((0, 0), (kn, n)).copy_from(&z);
                    zi.view_mut((kn, 0), (n, n)).copy_from(&ComplexMatrix::identity(n, n));
                    let delta = to_complex(sys.a()) + to_complex(sys.b()) * e_pow(theta, -1);
                    let lhs1 = to_complex(&f.shift()) * &zi;
                    assert!((&lhs1 - &z * ejt).norm() < 1e-10);
                    let lhs2 = to_complex(&f.script()) * &zi;
                    assert!((&lhs2 - &z * ejt * &delta).norm() < 1e-10);
                    let lhs3 = to_complex(&f.lift) * &zi;
                    assert!((&lhs3 - &z).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn w_times_blocks_have_shuffle_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=2 {
            let sys = random_sys(&mut rng, n);
            for k in 1..=3 {
                let sf = build_shuffle_family(&sys, k).unwrap();
                let f = build_thm4(&sys, k).unwrap();
                let table = ShuffleTable::new(sys.a(), sys.b(), k).unwrap();
                let ws = &sf.w * f.script();
                let wshift = &sf.w * f.shift();
                for i in 0..k {
                    for j in 0..=k {
                        let blk = ws.view((i * n, j * n), (n, n)).into_owned();
                        // row i of W[𝒜 ℬ] holds order k - i shuffles, A-count j - i
                        let expected = if j >= i {
                            table.get(j - i, k - j).clone()
                        } else {
                            RealMatrix::zeros(n, n)
                        };
                        assert!(max_abs(&(blk - expected)) < 1e-12);

                        let blk = wshift.view((i * n, j * n), (n, n)).into_owned();
                        let expected = if j > i {
                            table.get(j - i - 1, k - j).clone()
                        } else {
                            RealMatrix::zeros(n, n)
                        };
                        assert!(max_abs(&(blk - expected)) < 1e-12);
                    }
                }
                // W_k 𝒜_k = [[B^[k], V_k], [0, U_k]]
                if k > 1 {
                    let wa = &sf.w * &f.script_a;
                    let top_right = wa.view((0, n), (n, (k - 1) * n)).into_owned();
                    assert!(max_abs(&(top_right - &sf.v)) < 1e-12);
                    let bottom_right = wa.view((n, n), ((k - 1) * n, (k - 1) * n)).into_owned();
                    assert!(max_abs(&(bottom_right - &sf.u)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn binomial_expansion_of_delta_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sys = random_sys(&mut rng, 2);
        let table = ShuffleTable::new(sys.a(), sys.b(), 4).unwrap();
        for g in 0..16 {
            let theta = 2.0 * std::f64::consts::PI * g as f64 / 16.0;
            let delta = to_complex(sys.a()) + to_complex(sys.b()) * e_pow(theta, -1);
            let mut power = ComplexMatrix::identity(2, 2);
            for i in 1..=4 {
                power = &power * &delta;
                let mut sum = ComplexMatrix::zeros(2, 2);
                for m in 0..=i {
                    sum += to_complex(table.get(i - m, m)) * e_pow(theta, -(m as i32));
                }
                assert!((&power - sum).norm() < 1e-10);
            }
        }
    }
}
