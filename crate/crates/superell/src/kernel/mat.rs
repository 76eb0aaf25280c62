//! Exact matrix algebra: Bareiss determinants over `Z`, rational matrices
//! with inverses and solves, integer row Hermite normal form, kernels over
//! prime fields, and the evaluation–interpolation determinant of a linear
//! matrix pencil.

use super::poly::IntPoly;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Fraction-free determinant (Bareiss). Consumes its working copy.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    debug_assert!(m.iter().all(|r| r.len() == n));
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero());
                m[i][j] = q;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigRational>) -> Self {
        assert_eq!(rows * cols, data.len());
        RatMat { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows_vec: Vec<Vec<BigRational>>) -> Self {
        let rows = rows_vec.len();
        let cols = rows_vec.first().map_or(0, |r| r.len());
        assert!(rows_vec.iter().all(|r| r.len() == cols));
        RatMat {
            rows,
            cols,
            data: rows_vec.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * other.at(k, j);
                    *out.at_mut(i, j) += prod;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigRational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let prod = vi * self.at(i, j);
                out[j] += prod;
            }
        }
        out
    }

    pub fn det(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        // clear denominators rowwise, Bareiss on the integer matrix
        let mut scale = BigRational::one();
        let mut m = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut den = BigInt::one();
            for j in 0..self.cols {
                den = den.lcm(self.at(i, j).denom());
            }
            scale *= BigRational::from_integer(den.clone());
            m.push(
                (0..self.cols)
                    .map(|j| {
                        let v = self.at(i, j);
                        v.numer() * (&den / v.denom())
                    })
                    .collect::<Vec<_>>(),
            );
        }
        BigRational::from_integer(bareiss_det(m)) / scale
    }

    /// Inverse via Gauss–Jordan; `Err` when singular.
    pub fn inverse(&self) -> Result<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&i| !a.at(i, col).is_zero())
                .ok_or(Error::ZeroDivisor)?;
            if pivot != col {
                for j in 0..n {
                    let t = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = a.at(col, j).clone();
                    *a.at_mut(col, j) = t;
                    let t = inv.at(pivot, j).clone();
                    *inv.at_mut(pivot, j) = inv.at(col, j).clone();
                    *inv.at_mut(col, j) = t;
                }
            }
            let p = a.at(col, col).clone();
            for j in 0..n {
                *a.at_mut(col, j) /= p.clone();
                *inv.at_mut(col, j) /= p.clone();
            }
            for i in 0..n {
                if i == col || a.at(i, col).is_zero() {
                    continue;
                }
                let f = a.at(i, col).clone();
                for j in 0..n {
                    let t = &f * a.at(col, j);
                    *a.at_mut(i, j) -= t;
                    let t = &f * inv.at(col, j);
                    *inv.at_mut(i, j) -= t;
                }
            }
        }
        Ok(inv)
    }
}

/// Row-style Hermite normal form of the lattice spanned by the rows.
///
/// Returns the nonzero rows: echelon with positive pivots, entries above
/// each pivot reduced into `[0, pivot)`.
pub fn row_hnf(mut m: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    if m.is_empty() {
        return m;
    }
    let cols = m[0].len();
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == m.len() {
            break;
        }
        // euclidean elimination in this column below pivot_row
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..m.len() {
                if !m[i][col].is_zero() {
                    match best {
                        None => best = Some(i),
                        Some(b) => {
                            if m[i][col].magnitude() < m[b][col].magnitude() {
                                best = Some(i)
                            }
                        }
                    }
                }
            }
            let b = match best {
                None => break,
                Some(b) => b,
            };
            m.swap(pivot_row, b);
            let mut done = true;
            for i in pivot_row + 1..m.len() {
                if m[i][col].is_zero() {
                    continue;
                }
                let q = div_floor_big(&m[i][col], &m[pivot_row][col]);
                if !q.is_zero() {
                    for j in 0..cols {
                        let t = &q * &m[pivot_row][j];
                        m[i][j] -= t;
                    }
                }
                if !m[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col].is_zero() {
            continue;
        }
        if m[pivot_row][col].is_negative() {
            for j in 0..cols {
                m[pivot_row][j] = -m[pivot_row][j].clone();
            }
        }
        // reduce entries above the pivot
        let pivot = m[pivot_row][col].clone();
        for i in 0..pivot_row {
            let q = div_floor_big(&m[i][col], &pivot);
            if !q.is_zero() {
                for j in 0..cols {
                    let t = &q * &m[pivot_row][j];
                    m[i][j] -= t;
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m
}

fn div_floor_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Kernel of a matrix over `F_p` (rows × cols, entries reduced mod `p`).
/// Returns a basis of row vectors `v` with `v · m = 0`.
pub fn fp_kernel(m: &[Vec<BigInt>], p: &BigInt) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    // reduce a working copy of the transpose-action system: we do column
    // elimination on m^T, tracking row operations on an identity block
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(p)).collect())
        .collect();
    let mut t: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| {
            let mut row = vec![BigInt::zero(); rows];
            row[i] = BigInt::one();
            row
        })
        .collect();
    let mut rank_rows = 0;
    for col in 0..cols {
        let pivot = (rank_rows..rows).find(|&i| !a[i][col].is_zero());
        let pivot = match pivot {
            None => continue,
            Some(pv) => pv,
        };
        a.swap(rank_rows, pivot);
        t.swap(rank_rows, pivot);
        let inv = mod_inverse(&a[rank_rows][col], p).expect("prime modulus");
        for j in 0..cols {
            a[rank_rows][j] = (&a[rank_rows][j] * &inv).mod_floor(p);
        }
        for j in 0..rows {
            t[rank_rows][j] = (&t[rank_rows][j] * &inv).mod_floor(p);
        }
        for i in 0..rows {
            if i == rank_rows || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..cols {
                let v = (&a[i][j] - &f * &a[rank_rows][j]).mod_floor(p);
                a[i][j] = v;
            }
            for j in 0..rows {
                let v = (&t[i][j] - &f * &t[rank_rows][j]).mod_floor(p);
                t[i][j] = v;
            }
        }
        rank_rows += 1;
    }
    (rank_rows..rows).map(|i| t[i].clone()).collect()
}

/// Modular inverse of `a` mod `m` when `gcd(a, m) = 1`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Determinant of the pencil `x·A + z·B` as a homogeneous integer form.
///
/// Returns the coefficient vector `[c_0, …, c_d]` where the form is
/// `Σ c_i x^(d−i) z^i` and `d` is the common dimension. Exact, via
/// evaluation of `det(t·A + B)` at `d+1` integer points followed by
/// rational interpolation.
pub fn det_linear_pencil(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let d = a.len();
    if b.len() != d
        || a.iter().any(|r| r.len() != d)
        || b.iter().any(|r| r.len() != d)
    {
        return Err(Error::DimensionMismatch(format!(
            "pencil blocks must both be {d}×{d}"
        )));
    }
    if d == 0 {
        return Ok(vec![BigInt::one()]);
    }
    // evaluation points 0, 1, -1, 2, -2, ...
    let mut points = Vec::with_capacity(d + 1);
    let mut k = 0i64;
    while points.len() < d + 1 {
        points.push(BigInt::from(k));
        if k > 0 {
            points.push(BigInt::from(-k));
        }
        k += 1;
        points.truncate(d + 1);
    }
    let values: Vec<BigInt> = points
        .iter()
        .map(|t| {
            let m: Vec<Vec<BigInt>> = (0..d)
                .map(|i| (0..d).map(|j| t * &a[i][j] + &b[i][j]).collect())
                .collect();
            bareiss_det(m)
        })
        .collect();
    let poly = interpolate(&points, &values)?;
    // det(xA + zB) = z^d · p(x/z): coefficient of x^(d-i) z^i is p_(d-i)
    Ok((0..=d).map(|i| poly.coeff(d - i)).collect())
}

/// Lagrange interpolation with integer result check.
fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> Result<IntPoly> {
    let n = xs.len();
    let mut acc: Vec<BigRational> = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial ∏_{j≠i} (x - x_j) / (x_i - x_j)
        let mut num = vec![BigRational::one()];
        let mut den = BigRational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let xj = BigRational::from_integer(xs[j].clone());
            // multiply num by (x - xj)
            let mut next = vec![BigRational::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xj;
            }
            num = next;
            den *= BigRational::from_integer(&xs[i] - &xs[j]);
        }
        let w = BigRational::from_integer(ys[i].clone()) / den;
        for (k, c) in num.iter().enumerate() {
            acc[k] += c * &w;
        }
    }
    let mut out = Vec::with_capacity(n);
    for c in acc {
        if !c.is_integer() {
            return Err(Error::Internal(
                "pencil determinant interpolation produced a non-integer".into(),
            ));
        }
        out.push(c.to_integer());
    }
    Ok(IntPoly::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn mat(vals: &[&[i64]]) -> Vec<Vec<BigInt>> {
        vals.iter()
            .map(|r| r.iter().map(|&x| bi(x)).collect())
            .collect()
    }

    #[test]
    fn bareiss_matches_cofactor_small_cases() {
        assert_eq!(bareiss_det(mat(&[&[2]])), bi(2));
        assert_eq!(bareiss_det(mat(&[&[1, 2], &[3, 4]])), bi(-2));
        assert_eq!(
            bareiss_det(mat(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]])),
            bi(-2)
        );
        assert_eq!(bareiss_det(mat(&[&[0, 0], &[0, 1]])), bi(0));
    }

    #[test]
    fn pencil_identity_case() {
        // A = I2, B = 0 -> x²
        let a = mat(&[&[1, 0], &[0, 1]]);
        let b = mat(&[&[0, 0], &[0, 0]]);
        assert_eq!(det_linear_pencil(&a, &b).unwrap(), vec![bi(1), bi(0), bi(0)]);
    }

    #[test]
    fn pencil_off_diagonal_case() {
        // A=[[0,1],[1,0]], B=[[1,0],[0,0]] -> det([[z,x],[x,0]]) = -x²
        let a = mat(&[&[0, 1], &[1, 0]]);
        let b = mat(&[&[1, 0], &[0, 0]]);
        assert_eq!(
            det_linear_pencil(&a, &b).unwrap(),
            vec![bi(-1), bi(0), bi(0)]
        );
    }

    #[test]
    fn pencil_dimension_mismatch() {
        let a = mat(&[&[1, 0], &[0, 1]]);
        let b = mat(&[&[1]]);
        assert!(det_linear_pencil(&a, &b).is_err());
    }

    #[test]
    fn pencil_agrees_with_direct_determinant_at_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let d = rng.gen_range(1..5usize);
            let a: Vec<Vec<BigInt>> = (0..d)
                .map(|_| (0..d).map(|_| bi(rng.gen_range(-5..6))).collect())
                .collect();
            let b: Vec<Vec<BigInt>> = (0..d)
                .map(|_| (0..d).map(|_| bi(rng.gen_range(-5..6))).collect())
                .collect();
            let form = det_linear_pencil(&a, &b).unwrap();
            for _ in 0..10 {
                let t = bi(rng.gen_range(-20..21));
                let m: Vec<Vec<BigInt>> = (0..d)
                    .map(|i| (0..d).map(|j| &t * &a[i][j] + &b[i][j]).collect())
                    .collect();
                let direct = bareiss_det(m);
                // form evaluated at (x,z) = (t,1)
                let mut acc = BigInt::zero();
                for (i, c) in form.iter().enumerate() {
                    acc += c * t.pow((d - i) as u32);
                }
                assert_eq!(acc, direct);
            }
        }
    }

    #[test]
    fn pencil_congruence_covariance() {
        // det(x·PᵀAP + z·PᵀBP) = det(P)²·det(x·A + z·B)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..8 {
            let d = rng.gen_range(1..4usize);
            let rnd_mat = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<BigInt>> {
                (0..d)
                    .map(|_| (0..d).map(|_| bi(rng.gen_range(-4..5))).collect())
                    .collect()
            };
            let a = rnd_mat(&mut rng);
            let b = rnd_mat(&mut rng);
            let p = rnd_mat(&mut rng);
            let det_p = bareiss_det(p.clone());
            let conj = |m: &Vec<Vec<BigInt>>| -> Vec<Vec<BigInt>> {
                // PᵀMP
                let mut mp = vec![vec![BigInt::zero(); d]; d];
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            let t = &m[i][k] * &p[k][j];
                            mp[i][j] += t;
                        }
                    }
                }
                let mut out = vec![vec![BigInt::zero(); d]; d];
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            let t = &p[k][i] * &mp[k][j];
                            out[i][j] += t;
                        }
                    }
                }
                out
            };
            let lhs = det_linear_pencil(&conj(&a), &conj(&b)).unwrap();
            let rhs: Vec<BigInt> = det_linear_pencil(&a, &b)
                .unwrap()
                .into_iter()
                .map(|c| c * &det_p * &det_p)
                .collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hnf_canonicalizes_lattice_bases() {
        // two bases of the same lattice must give the same HNF
        let b1 = mat(&[&[2, 0], &[0, 3]]);
        let b2 = mat(&[&[2, 3], &[4, 3]]);
        assert_eq!(row_hnf(b1), row_hnf(b2));
        // rank-deficient input drops zero rows
        let r = row_hnf(mat(&[&[1, 2], &[2, 4]]));
        assert_eq!(r, mat(&[&[1, 2]]));
    }

    #[test]
    fn rational_inverse_round_trip() {
        use num_rational::BigRational;
        let m = RatMat::from_rows(vec![
            vec![
                BigRational::new(bi(1), bi(2)),
                BigRational::from_integer(bi(3)),
            ],
            vec![
                BigRational::from_integer(bi(-1)),
                BigRational::new(bi(2), bi(5)),
            ],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMat::identity(2));
    }

    #[test]
    fn fp_kernel_finds_nullspace() {
        let p = bi(3);
        // rows: (1,2), (2,4)=(2,1) mod 3 -> kernel contains (1,1)? 1·(1,2)+1·(2,1)=(3,3)=0 ✓
        let m = mat(&[&[1, 2], &[2, 4]]);
        let k = fp_kernel(&m, &p);
        assert_eq!(k.len(), 1);
        for v in &k {
            for j in 0..2 {
                let s: BigInt = (0..2).map(|i| &v[i] * &m[i][j]).sum();
                assert!(s.mod_floor(&p).is_zero());
            }
        }
    }
}
