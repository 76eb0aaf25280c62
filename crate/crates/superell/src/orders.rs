//! The rank-(2n+1) ring attached to a separable binary form, its ζ-basis
//! multiplication table, the canonical ideals `I_F^j`, fractional ideals
//! with exact norms, and the coordinate functionals used by the orbit
//! construction.
//!
//! Internally every element of `K_F = Q[x]/(F(x,1))` is stored in the power
//! basis of `t = f0·θ`, the root of the monicized form. That keeps reduction
//! division-free and confines denominators to powers of `f0`.

use crate::forms::{BinaryForm, UnimodularMatrix2};
use crate::kernel::{row_hnf, IntPoly, RatMat};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// Precomputed arithmetic environment for `K_F` and the order `R_F`.
pub struct FormContext {
    id: u64,
    form: BinaryForm,
    n: usize,
    /// Monic minimal polynomial of `t = f0·θ` (the x-dehomogenized monicized form).
    f_mon: IntPoly,
    disc: BigInt,
    /// Rows: `ζ_0 = 1, ζ_1, …, ζ_{2n}` in `t`-power coordinates.
    zeta: RatMat,
    zeta_inv: RatMat,
    /// Inverse of the basis `1, θ, …, θ^(2n−1), ζ_{2n}` (rows in `t`-coordinates).
    mixed_inv: RatMat,
    /// `mult_table[i-1][j-1]` = integer ζ-coordinates of `ζ_i·ζ_j` (i, j ≥ 1).
    mult_table: Vec<Vec<Vec<BigInt>>>,
}

/// An element of `K_F`, stored as coordinates in the `t`-power basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgNum {
    ctx_id: u64,
    coords: Vec<BigRational>,
}

impl AlgNum {
    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }
}

/// A full-rank lattice in `K_F` with a distinguished (ordered) basis.
///
/// The defining basis fixes the sign of the norm; lattice equality and
/// membership go through a canonical Hermite normal form, which forgets the
/// basis (and hence the norm's sign).
#[derive(Clone, Debug)]
pub struct FracIdeal {
    ctx_id: u64,
    basis: Vec<Vec<BigRational>>,
    /// canonical form: `(den, rows)` with the lattice `= (1/den)·rowspan(rows)`
    hnf: (BigInt, Vec<Vec<BigInt>>),
}

impl FormContext {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn form(&self) -> &BinaryForm {
        &self.form
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    /// Integer ζ-coordinates of `ζ_i·ζ_j` for `i, j ∈ {1, …, 2n}`.
    pub fn mult_table_entry(&self, i: usize, j: usize) -> &[BigInt] {
        &self.mult_table[i - 1][j - 1]
    }
}

/// Builds and verifies the arithmetic context for a separable form with
/// nonzero leading coefficient.
pub fn build_context(form: &BinaryForm) -> Result<FormContext> {
    if form.leading().is_zero() {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let disc = form.disc();
    if disc.is_zero() {
        return Err(Error::Inseparable);
    }
    let n = form.n();
    let dim = 2 * n + 1;
    let f_mon = form.monicize()?.poly_x();
    let f0 = form.leading().clone();

    // ζ_i = Σ_{j<i} f_j θ^(i−j) with θ = t/f0
    let mut zeta_rows = vec![vec![BigRational::zero(); dim]; dim];
    zeta_rows[0][0] = BigRational::one();
    for i in 1..dim {
        for j in 0..i {
            let e = i - j;
            zeta_rows[i][e] = BigRational::new(form.coeff(j).clone(), f0.pow(e as u32));
        }
    }
    let zeta = RatMat::from_rows(zeta_rows.clone());
    let zeta_inv = zeta.inverse().map_err(|_| {
        Error::Internal("ζ-basis change is singular for a separable form".into())
    })?;

    let mut mixed_rows = vec![vec![BigRational::zero(); dim]; dim];
    for (i, row) in mixed_rows.iter_mut().enumerate().take(dim - 1) {
        row[i] = BigRational::new(BigInt::one(), f0.pow(i as u32));
    }
    mixed_rows[dim - 1] = zeta_rows[dim - 1].clone();
    let mixed = RatMat::from_rows(mixed_rows);
    let mixed_inv = mixed
        .inverse()
        .map_err(|_| Error::Internal("mixed basis is singular".into()))?;

    let mut ctx = FormContext {
        id: context_id(form),
        form: form.clone(),
        n,
        f_mon,
        disc,
        zeta,
        zeta_inv,
        mixed_inv,
        mult_table: vec![],
    };

    // the multiplication table: closed form, then verified against K_F
    let mut table = vec![vec![Vec::new(); 2 * n]; 2 * n];
    for i in 1..=2 * n {
        for j in 1..=2 * n {
            table[i - 1][j - 1] = nakagawa_row(form, i.min(j), i.max(j));
        }
    }
    ctx.mult_table = table;
    verify_context(&ctx)?;
    Ok(ctx)
}

fn context_id(form: &BinaryForm) -> u64 {
    let mut h = DefaultHasher::new();
    form.encode().hash(&mut h);
    h.finish()
}

/// ζ-coordinates of `ζ_i·ζ_j` (`i ≤ j`) from the closed-form table, with
/// `ζ_0 = 1` and `ζ_{2n+1} = −f_{2n+1}` folded into the constant slot.
pub(crate) fn nakagawa_row(form: &BinaryForm, i: usize, j: usize) -> Vec<BigInt> {
    let n = form.n();
    let dim = 2 * n + 1;
    let mut out = vec![BigInt::zero(); dim];
    let mut add = |k: usize, c: BigInt| {
        if k == dim {
            // ζ_{2n+1} = −f_{2n+1}
            out[0] += c * -form.coeff(dim).clone();
        } else {
            out[k] += c;
        }
    };
    let upper = (i + j).min(dim);
    for k in j + 1..=upper {
        add(k, form.coeff(i + j - k).clone());
    }
    let lower = if i + j > dim { i + j - dim } else { 1 };
    for k in lower..=i {
        add(k, -form.coeff(i + j - k).clone());
    }
    out
}

fn verify_context(ctx: &FormContext) -> Result<()> {
    let n = ctx.n;
    // the closed-form table must match multiplication in K_F exactly
    for i in 1..=2 * n {
        for j in i..=2 * n {
            let prod = ctx.mul(&ctx.zeta_elt(i), &ctx.zeta_elt(j));
            let want = ctx.from_zeta_coords_int(ctx.mult_table_entry(i, j));
            if prod != want {
                return Err(Error::Internal(format!(
                    "multiplication table mismatch at ζ_{i}·ζ_{j}"
                )));
            }
        }
    }
    // table-level associativity and commutativity on all basis triples
    for i in 1..=2 * n {
        for j in 1..=2 * n {
            let ij = ctx.table_product_coords(i, j);
            let ji = ctx.table_product_coords(j, i);
            if ij != ji {
                return Err(Error::Internal("table is not commutative".into()));
            }
            for k in 1..=2 * n {
                let left = ctx.table_mul_by_zeta(&ij, k);
                let jk = ctx.table_product_coords(j, k);
                let right = ctx.table_mul_by_zeta(&jk, i);
                if left != right {
                    return Err(Error::Internal(format!(
                        "table is not associative at ({i},{j},{k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl FormContext {
    fn check_ctx(&self, x: &AlgNum) -> Result<()> {
        if x.ctx_id != self.id {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn zero(&self) -> AlgNum {
        AlgNum {
            ctx_id: self.id,
            coords: vec![BigRational::zero(); self.dim()],
        }
    }

    pub fn one(&self) -> AlgNum {
        let mut x = self.zero();
        x.coords[0] = BigRational::one();
        x
    }

    pub fn from_rational(&self, r: BigRational) -> AlgNum {
        let mut x = self.zero();
        x.coords[0] = r;
        x
    }

    pub fn from_t_coords(&self, coords: Vec<BigRational>) -> AlgNum {
        assert_eq!(coords.len(), self.dim());
        AlgNum {
            ctx_id: self.id,
            coords,
        }
    }

    /// The root θ of `F(x,1)`, i.e. `t/f0`.
    pub fn theta(&self) -> AlgNum {
        let mut x = self.zero();
        x.coords[1] = BigRational::new(BigInt::one(), self.form.leading().clone());
        x
    }

    /// `ζ_i` (with `ζ_0 = 1`).
    pub fn zeta_elt(&self, i: usize) -> AlgNum {
        AlgNum {
            ctx_id: self.id,
            coords: self.zeta.row(i).to_vec(),
        }
    }

    fn from_zeta_coords_int(&self, coords: &[BigInt]) -> AlgNum {
        let v: Vec<BigRational> = coords.iter().map(|c| rat(c.clone())).collect();
        AlgNum {
            ctx_id: self.id,
            coords: self.zeta_coords_to_t(&v),
        }
    }

    fn zeta_coords_to_t(&self, zeta_coords: &[BigRational]) -> Vec<BigRational> {
        self.zeta.vec_mul(zeta_coords)
    }

    /// ζ-coordinates of `x` (rational in general).
    pub fn zeta_coords(&self, x: &AlgNum) -> Vec<BigRational> {
        self.zeta_inv.vec_mul(&x.coords)
    }

    fn table_product_coords(&self, i: usize, j: usize) -> Vec<BigInt> {
        self.mult_table_entry(i, j).to_vec()
    }

    /// Multiply a ζ-coordinate vector by `ζ_k` using only the integer table;
    /// validates the table as a standalone presentation of the ring.
    fn table_mul_by_zeta(&self, coords: &[BigInt], k: usize) -> Vec<BigInt> {
        let dim = self.dim();
        let mut out = vec![BigInt::zero(); dim];
        out[k] += &coords[0];
        for i in 1..dim {
            if coords[i].is_zero() {
                continue;
            }
            let row = self.mult_table_entry(i, k);
            for (s, r) in out.iter_mut().zip(row.iter()) {
                *s += &coords[i] * r;
            }
        }
        out
    }

    pub fn add(&self, a: &AlgNum, b: &AlgNum) -> AlgNum {
        debug_assert!(a.ctx_id == self.id && b.ctx_id == self.id);
        AlgNum {
            ctx_id: self.id,
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, a: &AlgNum, b: &AlgNum) -> AlgNum {
        debug_assert!(a.ctx_id == self.id && b.ctx_id == self.id);
        AlgNum {
            ctx_id: self.id,
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn neg(&self, a: &AlgNum) -> AlgNum {
        AlgNum {
            ctx_id: self.id,
            coords: a.coords.iter().map(|x| -x).collect(),
        }
    }

    pub fn scale(&self, a: &AlgNum, c: &BigRational) -> AlgNum {
        AlgNum {
            ctx_id: self.id,
            coords: a.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, a: &AlgNum, b: &AlgNum) -> AlgNum {
        debug_assert!(a.ctx_id == self.id && b.ctx_id == self.id);
        let dim = self.dim();
        let mut prod = vec![BigRational::zero(); 2 * dim - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let v = x * y;
                prod[i + j] += v;
            }
        }
        // reduce modulo the monic minimal polynomial of t
        for k in (dim..prod.len()).rev() {
            let c = prod[k].clone();
            if c.is_zero() {
                continue;
            }
            prod[k] = BigRational::zero();
            for (e, coeff) in self.f_mon.coeffs().iter().enumerate().take(dim) {
                if coeff.is_zero() {
                    continue;
                }
                let v = &c * rat(coeff.clone());
                prod[k - dim + e] -= v;
            }
        }
        prod.truncate(dim);
        AlgNum {
            ctx_id: self.id,
            coords: prod,
        }
    }

    pub fn pow(&self, a: &AlgNum, e: usize) -> AlgNum {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Matrix of multiplication by `a` (row `i`: image of `t^i`).
    pub fn mult_matrix(&self, a: &AlgNum) -> RatMat {
        let dim = self.dim();
        let mut rows = Vec::with_capacity(dim);
        let mut cur = a.clone();
        rows.push(cur.coords.clone());
        for _ in 1..dim {
            cur = self.mul(&cur, &self.t_elt());
            rows.push(cur.coords.clone());
        }
        RatMat::from_rows(rows)
    }

    fn t_elt(&self) -> AlgNum {
        let mut x = self.zero();
        x.coords[1] = BigRational::one();
        x
    }

    /// Field norm `N(a) = det(multiplication by a)`; zero divisors rejected.
    pub fn norm_elt(&self, a: &AlgNum) -> Result<BigRational> {
        self.check_ctx(a)?;
        let d = self.mult_matrix(a).det();
        if d.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(d)
    }

    pub fn inverse(&self, a: &AlgNum) -> Result<AlgNum> {
        self.check_ctx(a)?;
        let m = self.mult_matrix(a);
        let inv = m.inverse().map_err(|_| Error::ZeroDivisor)?;
        // first row of the inverse matrix is the image of 1
        Ok(AlgNum {
            ctx_id: self.id,
            coords: inv.row(0).to_vec(),
        })
    }

    pub fn is_zero_elt(&self, a: &AlgNum) -> bool {
        a.coords.iter().all(|c| c.is_zero())
    }

    /// The two coordinate functionals on the basis
    /// `1, θ, …, θ^(2n−1), ζ_{2n}`: the first reads the `θ^(2n−1)`
    /// coordinate, the second the negative of the `ζ_{2n}` coordinate.
    pub fn pi_functionals(&self, a: &AlgNum) -> Result<(BigRational, BigRational)> {
        self.check_ctx(a)?;
        let coords = self.mixed_inv.vec_mul(&a.coords);
        let dim = self.dim();
        Ok((coords[dim - 2].clone(), -coords[dim - 1].clone()))
    }

    /// Evaluates an integer polynomial at θ.
    pub fn eval_poly_at_theta(&self, p: &IntPoly) -> AlgNum {
        let theta = self.theta();
        let mut acc = self.zero();
        for c in p.coeffs().iter().rev() {
            acc = self.mul(&acc, &theta);
            acc.coords[0] += rat(c.clone());
        }
        acc
    }
}

impl FracIdeal {
    /// A lattice with the given ordered basis (rows in `t`-coordinates).
    pub fn new(ctx: &FormContext, basis: Vec<Vec<BigRational>>) -> Result<FracIdeal> {
        let dim = ctx.dim();
        if basis.len() != dim || basis.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "ideal basis must be {dim}×{dim}"
            )));
        }
        let hnf = hnf_of_generators(&basis);
        if hnf.1.len() != dim {
            return Err(Error::ZeroDivisor);
        }
        Ok(FracIdeal {
            ctx_id: ctx.id(),
            basis,
            hnf,
        })
    }

    pub fn from_elements(ctx: &FormContext, elts: &[AlgNum]) -> Result<FracIdeal> {
        FracIdeal::new(ctx, elts.iter().map(|e| e.coords.clone()).collect())
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.basis
    }

    pub fn basis_elements(&self, ctx: &FormContext) -> Vec<AlgNum> {
        self.basis
            .iter()
            .map(|r| ctx.from_t_coords(r.clone()))
            .collect()
    }

    /// Basis read off the canonical Hermite form (deterministic).
    pub fn hnf_basis_elements(&self, ctx: &FormContext) -> Vec<AlgNum> {
        let (den, rows) = &self.hnf;
        rows.iter()
            .map(|r| {
                ctx.from_t_coords(
                    r.iter()
                        .map(|x| BigRational::new(x.clone(), den.clone()))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn eq_lattice(&self, other: &FracIdeal) -> bool {
        self.ctx_id == other.ctx_id && self.hnf == other.hnf
    }

    /// Signed norm with respect to the defining basis: the determinant of
    /// the transformation taking this basis to the ζ-basis of the order.
    pub fn norm(&self, ctx: &FormContext) -> Result<BigRational> {
        if self.ctx_id != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        let rows: Vec<Vec<BigRational>> = self
            .basis
            .iter()
            .map(|r| ctx.zeta_inv.vec_mul(r))
            .collect();
        Ok(RatMat::from_rows(rows).det())
    }

    /// Membership via exact back-substitution against the canonical basis.
    pub fn contains(&self, ctx: &FormContext, a: &AlgNum) -> Result<bool> {
        if self.ctx_id != ctx.id() || a.ctx_id != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        let (den, rows) = &self.hnf;
        let dim = ctx.dim();
        let mut target: Vec<BigRational> = a
            .coords
            .iter()
            .map(|c| c * rat(den.clone()))
            .collect();
        for row in rows {
            let pivot_col = row
                .iter()
                .position(|x| !x.is_zero())
                .expect("nonzero HNF row");
            let c = &target[pivot_col] / rat(row[pivot_col].clone());
            if !c.is_integer() {
                return Ok(false);
            }
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    let v = &c * rat(r.clone());
                    target[j] -= v;
                }
            }
        }
        Ok((0..dim).all(|j| target[j].is_zero()))
    }

    /// Containment of lattices.
    pub fn subset_of(&self, ctx: &FormContext, other: &FracIdeal) -> Result<bool> {
        for b in self.hnf_basis_elements(ctx) {
            if !other.contains(ctx, &b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Product lattice, generated by all pairwise basis products.
    pub fn product(&self, ctx: &FormContext, other: &FracIdeal) -> Result<FracIdeal> {
        if self.ctx_id != ctx.id() || other.ctx_id != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        let mut gens: Vec<Vec<BigRational>> = Vec::new();
        for a in &self.basis {
            let ea = ctx.from_t_coords(a.clone());
            for b in &other.basis {
                let eb = ctx.from_t_coords(b.clone());
                gens.push(ctx.mul(&ea, &eb).coords);
            }
        }
        let (den, rows) = hnf_of_generators(&gens);
        if rows.len() != ctx.dim() {
            return Err(Error::ZeroDivisor);
        }
        let basis: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| BigRational::new(x.clone(), den.clone()))
                    .collect()
            })
            .collect();
        FracIdeal::new(ctx, basis)
    }

    /// The lattice `κ·I`.
    pub fn scale_elt(&self, ctx: &FormContext, kappa: &AlgNum) -> Result<FracIdeal> {
        if self.ctx_id != ctx.id() || kappa.ctx_id != ctx.id() {
            return Err(Error::ContextMismatch);
        }
        let basis: Vec<Vec<BigRational>> = self
            .basis
            .iter()
            .map(|r| ctx.mul(&ctx.from_t_coords(r.clone()), kappa).coords)
            .collect();
        FracIdeal::new(ctx, basis)
    }

    /// Verifies closure under multiplication by the order's generators.
    pub fn verify_module(&self, ctx: &FormContext) -> Result<bool> {
        for k in 1..=2 * ctx.n() {
            let zk = ctx.zeta_elt(k);
            for b in &self.basis {
                let prod = ctx.mul(&ctx.from_t_coords(b.clone()), &zk);
                if !self.contains(ctx, &prod)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Canonical `(den, rows)` of the lattice generated by rational rows.
fn hnf_of_generators(gens: &[Vec<BigRational>]) -> (BigInt, Vec<Vec<BigInt>>) {
    let mut den = BigInt::one();
    for r in gens {
        for x in r {
            den = den.lcm(x.denom());
        }
    }
    let int_rows: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|r| r.iter().map(|x| x.numer() * (&den / x.denom())).collect())
        .collect();
    let rows = row_hnf(int_rows);
    // normalize the pair by the common content
    let mut g = den.clone();
    for r in &rows {
        for x in r {
            g = g.gcd(x);
        }
    }
    if g > BigInt::one() {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| x / &g).collect())
            .collect();
        (den / g, rows)
    } else {
        (den, rows)
    }
}

/// The canonical ideal `I_F^j`, with defining basis
/// `1, θ, …, θ^j, ζ_{j+1}, …, ζ_{2n}`; its signed norm is `f0^(−j)`.
pub fn ideal_power(ctx: &FormContext, j: usize) -> Result<FracIdeal> {
    let n = ctx.n();
    if j > 2 * n {
        return Err(Error::IndexOutOfRange(format!("need 0 ≤ j ≤ {}", 2 * n)));
    }
    let mut elts = Vec::with_capacity(ctx.dim());
    let theta = ctx.theta();
    let mut cur = ctx.one();
    elts.push(cur.clone());
    for _ in 1..=j {
        cur = ctx.mul(&cur, &theta);
        elts.push(cur.clone());
    }
    for k in j + 1..=2 * n {
        elts.push(ctx.zeta_elt(k));
    }
    FracIdeal::from_elements(ctx, &elts)
}

/// The map identifying `I_F^j` with `I_{F'}^j` for `F' = γ·F`: multiply by
/// `(−bθ+a)^(−j)` and reinterpret through `K_F ≅ K_{F'}`
/// (θ ↦ (aθ'+c)/(bθ'+d)). Returns the image lattice inside the context of
/// `F'`. Fails when the relevant denominators are not invertible.
pub fn ideal_translate(
    ctx: &FormContext,
    ctx_prime: &FormContext,
    gamma: &UnimodularMatrix2,
    ideal: &FracIdeal,
    j: usize,
) -> Result<FracIdeal> {
    let theta_p = ctx_prime.theta();
    let num = ctx_prime.add(
        &ctx_prime.scale(&theta_p, &rat(gamma.a.clone())),
        &ctx_prime.from_rational(rat(gamma.c.clone())),
    );
    let den = ctx_prime.add(
        &ctx_prime.scale(&theta_p, &rat(gamma.b.clone())),
        &ctx_prime.from_rational(rat(gamma.d.clone())),
    );
    let theta_image = ctx_prime.mul(&num, &ctx_prime.inverse(&den)?);
    // transport of a K_F element: evaluate its t-expansion at f0·theta_image
    let f0 = ctx.form().leading().clone();
    let t_image = ctx_prime.scale(&theta_image, &rat(f0));
    let transport = |a: &AlgNum| -> AlgNum {
        let mut acc = ctx_prime.zero();
        for c in a.coords().iter().rev() {
            acc = ctx_prime.mul(&acc, &t_image);
            acc.coords[0] += c.clone();
        }
        acc
    };
    let minus_b_theta_plus_a = ctx_prime.add(
        &ctx_prime.scale(&theta_image, &rat(-gamma.b.clone())),
        &ctx_prime.from_rational(rat(gamma.a.clone())),
    );
    let mult = ctx_prime.pow(&ctx_prime.inverse(&minus_b_theta_plus_a)?, j);
    let basis: Vec<Vec<BigRational>> = ideal
        .basis
        .iter()
        .map(|r| {
            let moved = transport(&ctx.from_t_coords(r.clone()));
            ctx_prime.mul(&moved, &mult).coords
        })
        .collect();
    FracIdeal::new(ctx_prime, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BinaryForm;
    use rand::{Rng, SeedableRng};

    fn form(n: usize, cs: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(n, cs).unwrap()
    }

    fn rnd_separable(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> BinaryForm {
        loop {
            let mut cs: Vec<i64> = (0..2 * n + 2).map(|_| rng.gen_range(-5..6)).collect();
            if cs[0] == 0 {
                cs[0] = rng.gen_range(1..5);
            }
            let f = form(n, &cs);
            if f.is_separable() {
                return f;
            }
        }
    }

    #[test]
    fn monic_cubic_context_reduces_to_power_basis() {
        // F = x³ + z³: ζ₁ = θ, ζ₂ = θ², and θ³ = −1
        let ctx = build_context(&form(1, &[1, 0, 0, 1])).unwrap();
        let theta = ctx.theta();
        assert_eq!(ctx.zeta_elt(1), theta);
        assert_eq!(ctx.zeta_elt(2), ctx.mul(&theta, &theta));
        let cube = ctx.pow(&theta, 3);
        assert_eq!(
            cube,
            ctx.from_rational(BigRational::from_integer((-1).into()))
        );
    }

    #[test]
    fn nonmonic_cubic_zeta_basis() {
        // F = 2x³+x²z+xz²+z³: ζ₁ = 2θ, ζ₂ = 2θ²+θ
        let ctx = build_context(&form(1, &[2, 1, 1, 1])).unwrap();
        let theta = ctx.theta();
        let two = BigRational::from_integer(2.into());
        assert_eq!(ctx.zeta_elt(1), ctx.scale(&theta, &two));
        let t2 = ctx.mul(&theta, &theta);
        let want = ctx.add(&ctx.scale(&t2, &two), &theta);
        assert_eq!(ctx.zeta_elt(2), want);
    }

    #[test]
    fn inseparable_rejected() {
        assert!(matches!(
            build_context(&form(1, &[1, 0, 0, 0])),
            Err(Error::Inseparable)
        ));
    }

    #[test]
    fn table_verified_on_random_forms() {
        // build_context verifies the table and ring axioms internally
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let n = rng.gen_range(1..4usize);
            let f = rnd_separable(&mut rng, n);
            build_context(&f).unwrap();
        }
    }

    #[test]
    fn ideal_power_norms() {
        let ctx = build_context(&form(1, &[2, 1, 1, 1])).unwrap();
        let r0 = ideal_power(&ctx, 0).unwrap();
        assert_eq!(r0.norm(&ctx).unwrap(), BigRational::one());
        let i1 = ideal_power(&ctx, 1).unwrap();
        assert_eq!(i1.norm(&ctx).unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(ideal_power(&ctx, 3).is_err());
    }

    #[test]
    fn ideal_norms_track_f0_powers_and_sign() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..6 {
            let n = rng.gen_range(1..3usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let f0 = BigRational::from_integer(f.leading().clone());
            for j in 0..=2 * n {
                let ij = ideal_power(&ctx, j).unwrap();
                let want = BigRational::one() / f0.pow(j as i32);
                assert_eq!(ij.norm(&ctx).unwrap(), want, "j={j} form={f:?}");
                assert!(ij.verify_module(&ctx).unwrap(), "I^{j} not a module");
            }
        }
    }

    #[test]
    fn ideal_powers_multiply() {
        // I^j · I^1 = I^(j+1) as lattices
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..4 {
            let n = rng.gen_range(1..3usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let i1 = ideal_power(&ctx, 1).unwrap();
            for j in 0..2 * n {
                let ij = ideal_power(&ctx, j).unwrap();
                let prod = ij.product(&ctx, &i1).unwrap();
                let want = ideal_power(&ctx, j + 1).unwrap();
                assert!(prod.eq_lattice(&want), "I^{j}·I^1 ≠ I^{}", j + 1);
            }
        }
    }

    #[test]
    fn norm_of_theta_and_multiplicativity() {
        let ctx = build_context(&form(1, &[2, 1, 1, 1])).unwrap();
        let minus_theta = ctx.neg(&ctx.theta());
        assert_eq!(
            ctx.norm_elt(&minus_theta).unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(ctx.norm_elt(&ctx.one()).unwrap(), BigRational::one());

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(1..3usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let kappa = loop {
                let coords: Vec<BigRational> = (0..ctx.dim())
                    .map(|_| BigRational::from_integer(rng.gen_range(-3..4).into()))
                    .collect();
                let k = ctx.from_t_coords(coords);
                if ctx.norm_elt(&k).is_ok() {
                    break k;
                }
            };
            let j = rng.gen_range(0..=2 * n);
            let ideal = ideal_power(&ctx, j).unwrap();
            let scaled = ideal.scale_elt(&ctx, &kappa).unwrap();
            let lhs = scaled.norm(&ctx).unwrap();
            let rhs = ctx.norm_elt(&kappa).unwrap() * ideal.norm(&ctx).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pi_functionals_on_basis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let n = rng.gen_range(1..4usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let theta = ctx.theta();
            let mut cur = ctx.one();
            for _ in 0..2 * n - 1 {
                let (p1, p2) = ctx.pi_functionals(&cur).unwrap();
                assert!(p1.is_zero() && p2.is_zero());
                cur = ctx.mul(&cur, &theta);
            }
            // cur = θ^(2n−1)
            let (p1, p2) = ctx.pi_functionals(&cur).unwrap();
            assert!(p1.is_one() && p2.is_zero());
            let (p1, p2) = ctx.pi_functionals(&ctx.zeta_elt(2 * n)).unwrap();
            assert!(p1.is_zero());
            assert_eq!(p2, -BigRational::one());
        }
    }

    #[test]
    fn pi_2n_of_theta_2n_reads_half() {
        // for F = 2x³+…: θ² = (ζ₂ − θ)/2, so π₂(θ²) = −1/2
        let ctx = build_context(&form(1, &[2, 1, 1, 1])).unwrap();
        let t2 = ctx.pow(&ctx.theta(), 2);
        let (_, p2) = ctx.pi_functionals(&t2).unwrap();
        assert_eq!(p2, BigRational::new((-1).into(), 2.into()));
    }

    #[test]
    fn lattice_membership_and_unit_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for _ in 0..8 {
            let n = rng.gen_range(1..3usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let rf = ideal_power(&ctx, 0).unwrap();
            assert!(rf.contains(&ctx, &ctx.one()).unwrap());
            // θ·I^(2n−1) ⊆ I^(2n)
            let i_prev = ideal_power(&ctx, 2 * n - 1).unwrap();
            let i_top = ideal_power(&ctx, 2 * n).unwrap();
            let theta = ctx.theta();
            let scaled = i_prev.scale_elt(&ctx, &theta).unwrap();
            assert!(scaled.subset_of(&ctx, &i_top).unwrap());
            // I·R_F = I
            let j = rng.gen_range(0..=2 * n);
            let ideal = ideal_power(&ctx, j).unwrap();
            assert!(ideal.product(&ctx, &rf).unwrap().eq_lattice(&ideal));
        }
    }

    #[test]
    fn trace_form_determinant_equals_form_discriminant() {
        // Gram determinant of the trace form on the ζ-basis = disc(F),
        // including sign
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let n = rng.gen_range(1..4usize);
            let f = rnd_separable(&mut rng, n);
            let ctx = build_context(&f).unwrap();
            let dim = ctx.dim();
            let mut gram = Vec::with_capacity(dim);
            for i in 0..dim {
                let zi = ctx.zeta_elt(i.min(2 * n));
                let zi = if i == 0 { ctx.one() } else { zi };
                let mut row = Vec::with_capacity(dim);
                for j in 0..dim {
                    let zj = if j == 0 { ctx.one() } else { ctx.zeta_elt(j) };
                    let prod = ctx.mul(&zi, &zj);
                    let m = ctx.mult_matrix(&prod);
                    let mut tr = BigRational::zero();
                    for k in 0..dim {
                        tr += m.at(k, k).clone();
                    }
                    row.push(tr);
                }
                gram.push(row);
            }
            let det = RatMat::from_rows(gram).det();
            assert_eq!(det, BigRational::from_integer(f.disc()), "form {f:?}");
        }
    }

    #[test]
    fn ideal_translation_under_sl2() {
        // the translation map sends I_F^j onto I_{F'}^j for F' = γ·F
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        let mut done = 0;
        while done < 6 {
            let n = rng.gen_range(1..3usize);
            let f = rnd_separable(&mut rng, n);
            let mut g = UnimodularMatrix2::identity();
            for _ in 0..3 {
                let k = rng.gen_range(-2..3i64);
                let s = if rng.gen_bool(0.5) {
                    UnimodularMatrix2::from_i64(1, k, 0, 1).unwrap()
                } else {
                    UnimodularMatrix2::from_i64(1, 0, k, 1).unwrap()
                };
                g = g.mul(&s);
            }
            let fp = f.sl2_act(&g);
            if fp.leading().is_zero() || !fp.is_separable() {
                continue;
            }
            let ctx = build_context(&f).unwrap();
            let ctx_p = build_context(&fp).unwrap();
            let j = rng.gen_range(0..=2 * n);
            let ij = ideal_power(&ctx, j).unwrap();
            let moved = match ideal_translate(&ctx, &ctx_p, &g, &ij, j) {
                Ok(m) => m,
                Err(Error::ZeroDivisor) => continue, // bθ'+d not invertible
                Err(e) => panic!("{e}"),
            };
            let want = ideal_power(&ctx_p, j).unwrap();
            assert!(moved.eq_lattice(&want), "j={j} f={f:?} γ={g:?}");
            done += 1;
        }
    }
}
