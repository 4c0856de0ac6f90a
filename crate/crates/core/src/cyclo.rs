//! Arithmetic in cyclotomic fields `Q(zeta_n)`, elements stored over the power
//! basis `1, zeta, ..., zeta^(phi(n)-1)` reduced modulo the cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::util::{euler_phi, gcd, lcm};

struct FieldData {
    n: u32,
    phi: usize,
    poly: Vec<i64>,
    red: Vec<Vec<i64>>,
    big_n: u32,
    roots: Vec<Vec<BigInt>>,
}

/// Handle to `Q(zeta_n)`; cheap to clone, equal iff the conductors agree.
#[derive(Clone)]
pub struct CycloField(Arc<FieldData>);

impl PartialEq for CycloField {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n
    }
}
impl Eq for CycloField {}

impl Hash for CycloField {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.n.hash(state)
    }
}

impl fmt::Debug for CycloField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(zeta_{})", self.0.n)
    }
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut q = vec![0i128; num.len() - dd];
    for k in (0..q.len()).rev() {
        let c = rem[k + dd] / lead;
        q[k] = c;
        for (i, d) in den.iter().enumerate() {
            rem[k + i] -= c * d;
        }
    }
    assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    q
}

fn cyclotomic_poly(n: u64, cache: &mut HashMap<u64, Vec<i128>>) -> Vec<i128> {
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    let mut p = vec![0i128; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let pd = cyclotomic_poly(d, cache);
            p = poly_div_exact(&p, &pd);
        }
    }
    cache.insert(n, p.clone());
    p
}

/// Coefficients of the `n`-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    let mut cache = HashMap::new();
    cyclotomic_poly(n as u64, &mut cache)
        .into_iter()
        .map(|c| i64::try_from(c).expect("cyclotomic coefficient overflow"))
        .collect()
}

fn build_field(n: u32) -> FieldData {
    let poly = cyclotomic_polynomial(n);
    let phi = poly.len() - 1;
    debug_assert_eq!(phi as u64, euler_phi(n as u64));
    let times_x = |v: &[i64]| -> Vec<i64> {
        let mut out = vec![0i64; phi];
        let top = v[phi - 1];
        for i in (1..phi).rev() {
            out[i] = v[i - 1];
        }
        for i in 0..phi {
            out[i] = out[i]
                .checked_sub(top.checked_mul(poly[i]).expect("overflow"))
                .expect("overflow");
        }
        out
    };
    let mut unit = vec![0i64; phi];
    unit[0] = 1;
    let kmax = (2 * phi).max(n as usize + 1);
    let mut red = Vec::with_capacity(kmax);
    red.push(unit);
    for k in 1..kmax {
        let next = if k < phi {
            let mut u = vec![0i64; phi];
            u[k] = 1;
            u
        } else {
            times_x(&red[k - 1])
        };
        red.push(next);
    }
    let big_n = if n % 2 == 0 { n } else { 2 * n };
    let mut roots = Vec::with_capacity(big_n as usize);
    for j in 0..big_n as u64 {
        let v: Vec<BigInt> = if n % 2 == 0 {
            red[j as usize].iter().map(|&c| BigInt::from(c)).collect()
        } else {
            let e = (j * (n as u64 + 1) / 2) % n as u64;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            red[e as usize].iter().map(|&c| BigInt::from(sign * c)).collect()
        };
        roots.push(v);
    }
    FieldData { n, phi, poly, red, big_n, roots }
}

/// Returns `Q(zeta_n)` with the cyclotomic polynomial obtained by dividing
/// `x^n - 1` by every `Phi_d` with `d | n`, `d < n`.
pub fn make_field(n: u32) -> CycloField {
    assert!(n >= 1, "conductor must be positive");
    static CACHE: OnceLock<Mutex<HashMap<u32, CycloField>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&n) {
        return f.clone();
    }
    let f = CycloField(Arc::new(build_field(n)));
    cache.lock().unwrap().entry(n).or_insert(f).clone()
}

impl CycloField {
    pub fn conductor(&self) -> u32 {
        self.0.n
    }

    pub fn degree(&self) -> usize {
        self.0.phi
    }

    pub fn reduction_poly(&self) -> &[i64] {
        &self.0.poly
    }

    /// Representation of `x^k mod Phi_n` for `k < 2 phi(n)` (or `n + 1`).
    pub fn reduction_table(&self) -> &[Vec<i64>] {
        &self.0.red
    }

    /// Order of the root-of-unity group of the field, `lcm(2, n)`.
    pub fn roots_order(&self) -> u32 {
        self.0.big_n
    }

    /// True if `Q(zeta_m)` is a subfield of this field.
    pub fn contains_roots(&self, m: u32) -> bool {
        self.0.big_n % m == 0
    }

    pub fn contains_field(&self, other: &CycloField) -> bool {
        self.contains_roots(other.conductor())
    }

    /// Smallest field (by our conductor convention) containing both.
    pub fn join(&self, other: &CycloField) -> CycloField {
        if self.contains_field(other) {
            self.clone()
        } else if other.contains_field(self) {
            other.clone()
        } else {
            make_field(lcm(self.conductor() as u64, other.conductor() as u64) as u32)
        }
    }

    /// Field containing this one together with the `d`-th roots of unity.
    pub fn with_roots(&self, d: u32) -> CycloField {
        if self.contains_roots(d) {
            self.clone()
        } else {
            make_field(lcm(self.conductor() as u64, d as u64) as u32)
        }
    }

    pub fn zero(&self) -> CycloElt {
        CycloElt {
            field: self.clone(),
            num: vec![BigInt::zero(); self.0.phi],
            den: BigInt::one(),
        }
    }

    pub fn one(&self) -> CycloElt {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> CycloElt {
        let mut e = self.zero();
        e.num[0] = BigInt::from(c);
        e
    }

    pub fn from_ratio(&self, r: &BigRational) -> CycloElt {
        let mut e = self.zero();
        e.num[0] = r.numer().clone();
        e.den = r.denom().clone();
        e.normalize();
        e
    }

    pub fn from_frac(&self, p: i64, q: i64) -> CycloElt {
        self.from_ratio(&BigRational::new(p.into(), q.into()))
    }

    /// `zeta_N^k` where `N = lcm(2, n)`.
    fn root_index(&self, j: i64) -> CycloElt {
        let bn = self.0.big_n as i64;
        let j = j.rem_euclid(bn) as usize;
        CycloElt {
            field: self.clone(),
            num: self.0.roots[j].clone(),
            den: BigInt::one(),
        }
    }

    /// `zeta_n^k`.
    pub fn zeta(&self, k: i64) -> CycloElt {
        let scale = (self.0.big_n / self.0.n) as i64;
        self.root_index(k * scale)
    }

    /// `zeta_d^k`, provided the field contains the `d`-th roots of unity.
    pub fn root(&self, d: u32, k: i64) -> Result<CycloElt> {
        if !self.contains_roots(d) {
            return Err(Error::NotEmbeddable { from: d, to: self.conductor() });
        }
        let scale = (self.0.big_n / d) as i64;
        Ok(self.root_index(k * scale))
    }

    /// Element `sum c_i zeta_n^(e_i)` from sparse integer terms.
    pub fn from_terms(&self, terms: &[(i64, i64)]) -> CycloElt {
        let mut acc = self.zero();
        for &(c, e) in terms {
            acc += &(&self.zeta(e) * &self.from_int(c));
        }
        acc
    }

    /// Reduces an arbitrary-length rational polynomial in `zeta_n`.
    pub fn from_poly(&self, coeffs: &[BigRational]) -> CycloElt {
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut num = vec![BigInt::zero(); self.0.phi];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            let kk = k % self.0.n as usize;
            let row = self.power_vec(kk);
            for (i, r) in row.iter().enumerate() {
                if *r != 0 {
                    num[i] += &scaled * *r;
                }
            }
        }
        let mut e = CycloElt { field: self.clone(), num, den };
        e.normalize();
        e
    }

    fn power_vec(&self, k: usize) -> Vec<i64> {
        if k < self.0.red.len() {
            self.0.red[k].clone()
        } else {
            let scale = (self.0.big_n / self.0.n) as usize;
            self.0.roots[(k * scale) % self.0.big_n as usize]
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect()
        }
    }

    pub fn from_coeffs(&self, coeffs: &[BigRational]) -> Result<CycloElt> {
        if coeffs.len() != self.0.phi {
            return Err(Error::Parse(format!(
                "expected {} coefficients, found {}",
                self.0.phi,
                coeffs.len()
            )));
        }
        Ok(self.from_poly(coeffs))
    }
}

/// Element of `Q(zeta_n)` as integer numerators over a common positive denominator,
/// with `gcd(numerators, denominator) = 1`.
#[derive(Clone)]
pub struct CycloElt {
    field: CycloField,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CycloElt {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.den == other.den && self.num == other.num
    }
}
impl Eq for CycloElt {}

impl Hash for CycloElt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl PartialOrd for CycloElt {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CycloElt {
    /// Arbitrary but deterministic total order used for tie-breaking.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.field
            .conductor()
            .cmp(&other.field.conductor())
            .then_with(|| self.coeffs().cmp(&other.coeffs()))
    }
}

impl CycloElt {
    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        if self.den.is_one() {
            return;
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if !c.is_zero() {
                g = g.gcd(c);
                if g.is_one() {
                    return;
                }
            }
        }
        for c in self.num.iter_mut() {
            *c = &*c / &g;
        }
        self.den = &self.den / &g;
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn check_field(&self, other: &CycloElt) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.field.conductor(), other.field.conductor()))
        }
    }

    fn add_impl(&self, other: &CycloElt, sign: i32) -> CycloElt {
        assert!(self.field == other.field, "field mismatch in cyclotomic arithmetic");
        let mut num;
        let den;
        if self.den == other.den {
            num = self.num.clone();
            for (a, b) in num.iter_mut().zip(&other.num) {
                if sign > 0 {
                    *a += b;
                } else {
                    *a -= b;
                }
            }
            den = self.den.clone();
        } else {
            let l = self.den.lcm(&other.den);
            let fa = &l / &self.den;
            let fb = &l / &other.den;
            num = self.num.iter().map(|a| a * &fa).collect();
            for (a, b) in num.iter_mut().zip(&other.num) {
                if sign > 0 {
                    *a += b * &fb;
                } else {
                    *a -= b * &fb;
                }
            }
            den = l;
        }
        let mut e = CycloElt { field: self.field.clone(), num, den };
        e.normalize();
        e
    }

    fn mul_impl(&self, other: &CycloElt) -> CycloElt {
        assert!(self.field == other.field, "field mismatch in cyclotomic arithmetic");
        let phi = self.field.0.phi;
        if phi == 1 {
            let mut e = CycloElt {
                field: self.field.clone(),
                num: vec![&self.num[0] * &other.num[0]],
                den: &self.den * &other.den,
            };
            e.normalize();
            return e;
        }
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                prod[i + j] += a * b;
            }
        }
        let red = &self.field.0.red;
        let mut num: Vec<BigInt> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (i, r) in red[k].iter().enumerate() {
                if *r != 0 {
                    num[i] += c * *r;
                }
            }
        }
        let mut e = CycloElt {
            field: self.field.clone(),
            num,
            den: &self.den * &other.den,
        };
        e.normalize();
        e
    }

    pub fn scale_int(&self, c: i64) -> CycloElt {
        let mut e = CycloElt {
            field: self.field.clone(),
            num: self.num.iter().map(|a| a * c).collect(),
            den: self.den.clone(),
        };
        e.normalize();
        e
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Phi_n`.
    pub fn inv(&self) -> Result<CycloElt> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(self.field.from_ratio(&r.recip()));
        }
        let a: Vec<BigRational> = trim(self.coeffs());
        let m: Vec<BigRational> = self
            .field
            .0
            .poly
            .iter()
            .map(|&c| BigRational::from_integer(c.into()))
            .collect();
        let (g, s) = ext_gcd(&m, &a);
        debug_assert_eq!(g.len(), 1);
        let c = g[0].recip();
        let coeffs: Vec<BigRational> = s.iter().map(|x| x * &c).collect();
        Ok(self.field.from_poly(&coeffs))
    }

    pub fn checked_div(&self, other: &CycloElt) -> Result<CycloElt> {
        self.check_field(other)?;
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<CycloElt> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Image under `zeta_n -> zeta_n^k`, `k` coprime to `n`.
    pub fn galois(&self, k: i64) -> CycloElt {
        let n = self.field.0.n as i64;
        debug_assert_eq!(gcd(k.rem_euclid(n) as u64, n as u64), 1);
        let mut acc = self.field.zero();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = self.field.zeta(k * i as i64);
            for (a, b) in acc.num.iter_mut().zip(&r.num) {
                *a += c * b;
            }
        }
        acc.den = self.den.clone();
        acc.normalize();
        acc
    }

    /// Complex conjugation, `zeta -> zeta^(-1)`.
    pub fn conj(&self) -> CycloElt {
        self.galois(-1)
    }

    /// Image under `zeta_m -> zeta_n^(n/m)` where `Q(zeta_m)` is this element's field.
    pub fn embed(&self, target: &CycloField) -> Result<CycloElt> {
        if &self.field == target {
            return Ok(self.clone());
        }
        let m = self.field.conductor();
        if !target.contains_roots(m) {
            return Err(Error::NotEmbeddable { from: m, to: target.conductor() });
        }
        let mut acc = target.zero();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = target.root(m, i as i64)?;
            for (a, b) in acc.num.iter_mut().zip(&r.num) {
                *a += c * b;
            }
        }
        acc.den = self.den.clone();
        acc.normalize();
        Ok(acc)
    }

    /// Preimage in the subfield `sub`, if the element lies there.
    pub fn try_descend(&self, sub: &CycloField) -> Option<CycloElt> {
        if &self.field == sub {
            return Some(self.clone());
        }
        if !self.field.contains_field(sub) {
            return None;
        }
        let cols: Vec<Vec<BigRational>> = (0..sub.degree())
            .map(|i| sub.zeta(i as i64).embed(&self.field).unwrap().coeffs())
            .collect();
        let rhs = self.coeffs();
        let sol = solve_rational(&cols, &rhs)?;
        let cand = sub.from_coeffs(&sol).ok()?;
        if cand.embed(&self.field).ok()? == *self {
            Some(cand)
        } else {
            None
        }
    }

    /// Smallest-conductor field containing this element, among divisors of the conductor.
    pub fn descend_minimal(&self) -> CycloElt {
        let n = self.field.conductor();
        let mut best = self.clone();
        for d in crate::util::divisors(n as u64) {
            let d = d as u32;
            if d == n {
                break;
            }
            let f = make_field(d);
            if (f.degree(), d) >= (best.field.degree(), best.field.conductor()) {
                continue;
            }
            if let Some(e) = self.try_descend(&f) {
                best = e;
            }
        }
        best
    }

    /// If this element is a root of unity, returns it in reduced form.
    pub fn as_root_of_unity(&self) -> Option<RootOfUnity> {
        if !self.den.is_one() {
            return None;
        }
        let bn = self.field.0.big_n;
        for (j, r) in self.field.0.roots.iter().enumerate() {
            if *r == self.num {
                return Some(RootOfUnity::new(bn, j as i64));
            }
        }
        None
    }

    /// Reduction modulo a prime `p` given the image of `zeta_n` in `F_p`;
    /// `None` if `p` divides the denominator.
    pub fn reduce_mod(&self, p: u64, zeta_img: u64) -> Option<u64> {
        let pb = BigInt::from(p);
        let d = self.den.mod_floor(&pb).to_u64().unwrap();
        if d == 0 {
            return None;
        }
        let mut acc = 0u64;
        let mut pw = 1u64;
        for c in &self.num {
            let cm = c.mod_floor(&pb).to_u64().unwrap();
            acc = (acc + crate::util::mul_mod(cm, pw, p)) % p;
            pw = crate::util::mul_mod(pw, zeta_img, p);
        }
        let dinv = crate::util::pow_mod(d, p - 2, p);
        Some(crate::util::mul_mod(acc, dinv, p))
    }

    /// Approximate complex value under `zeta_n = exp(2 pi i / n)`; diagnostics only.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.field.0.n as f64;
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.num.iter().enumerate() {
            let c = c.to_f64().unwrap_or(f64::NAN) / den;
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n;
            re += c * ang.cos();
            im += c * ang.sin();
        }
        (re, im)
    }
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.len() > 1 && v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() <= db {
        return (vec![BigRational::zero()], trim(r));
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lead;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[k + i] -= &c * bi;
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    (trim(q), trim(r))
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    trim(out)
}

fn is_zero_poly(p: &[BigRational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Returns `(g, t)` with `t * b = g (mod m)` and `g = gcd(m, b)`.
fn ext_gcd(m: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r0 = trim(m.to_vec());
    let mut r1 = trim(b.to_vec());
    let mut t0 = vec![BigRational::zero()];
    let mut t1 = vec![BigRational::one()];
    while !is_zero_poly(&r1) {
        let (q, r) = poly_divrem(&r0, &r1);
        let t2 = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t2;
    }
    (r0, t0)
}

/// Solves `sum x_i cols[i] = rhs` over `Q`; `None` when inconsistent.
fn solve_rational(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let nrows = rhs.len();
    let ncols = cols.len();
    let mut a: Vec<Vec<BigRational>> = (0..nrows)
        .map(|r| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for c in col..=ncols {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..nrows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=ncols {
                    let v = &f * &a[row][c];
                    a[r][c] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][ncols].clone();
    }
    Some(x)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&CycloElt> for &CycloElt {
            type Output = CycloElt;
            fn $method(self, rhs: &CycloElt) -> CycloElt {
                let f: fn(&CycloElt, &CycloElt) -> CycloElt = $body;
                f(self, rhs)
            }
        }
        impl $tr<CycloElt> for CycloElt {
            type Output = CycloElt;
            fn $method(self, rhs: CycloElt) -> CycloElt {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&CycloElt> for CycloElt {
            type Output = CycloElt;
            fn $method(self, rhs: &CycloElt) -> CycloElt {
                (&self).$method(rhs)
            }
        }
        impl $tr<CycloElt> for &CycloElt {
            type Output = CycloElt;
            fn $method(self, rhs: CycloElt) -> CycloElt {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, 1));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, -1));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));

impl AddAssign<&CycloElt> for CycloElt {
    fn add_assign(&mut self, rhs: &CycloElt) {
        *self = self.add_impl(rhs, 1);
    }
}

impl SubAssign<&CycloElt> for CycloElt {
    fn sub_assign(&mut self, rhs: &CycloElt) {
        *self = self.add_impl(rhs, -1);
    }
}

impl MulAssign<&CycloElt> for CycloElt {
    fn mul_assign(&mut self, rhs: &CycloElt) {
        *self = self.mul_impl(rhs);
    }
}

impl Neg for &CycloElt {
    type Output = CycloElt;
    fn neg(self) -> CycloElt {
        CycloElt {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloElt {
    type Output = CycloElt;
    fn neg(self) -> CycloElt {
        -&self
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Field-checked arithmetic.
pub fn arith(a: &CycloElt, b: &CycloElt, op: ArithOp) -> Result<CycloElt> {
    a.check_field(b)?;
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

fn fmt_ratio(f: &mut fmt::Formatter<'_>, p: &BigInt, q: &BigInt) -> fmt::Result {
    let g = p.gcd(q);
    let (p, q) = if g.is_zero() { (p.clone(), q.clone()) } else { (p / &g, q / &g) };
    if q.is_one() {
        write!(f, "{}", p)
    } else {
        write!(f, "{}/{}", p, q)
    }
}

impl fmt::Display for CycloElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.field.conductor())?;
        for (i, c) in self.num.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            fmt_ratio(f, c, &self.den)?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for CycloElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FromStr for CycloElt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing conductor in {s:?}")))?;
        let n: u32 = n.trim().parse().map_err(|_| Error::Parse(format!("bad conductor {n:?}")))?;
        if n == 0 {
            return Err(Error::Parse("conductor 0".into()));
        }
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("bad coefficient list in {s:?}")))?;
        let coeffs = body
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        make_field(n).from_coeffs(&coeffs)
    }
}

/// `zeta_d^k` with `k/d` in lowest terms (`d = 1` for the value 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    order: u32,
    exp: u32,
}

impl RootOfUnity {
    pub fn new(d: u32, k: i64) -> RootOfUnity {
        assert!(d >= 1);
        let k = k.rem_euclid(d as i64) as u64;
        let g = gcd(k, d as u64).max(1);
        let g = if k == 0 { d as u64 } else { g };
        RootOfUnity { order: (d as u64 / g) as u32, exp: (k / g) as u32 }
    }

    /// From a residue `num/den` modulo 1.
    pub fn from_residue(num: i64, den: u32) -> RootOfUnity {
        RootOfUnity::new(den, num)
    }

    pub fn one() -> RootOfUnity {
        RootOfUnity { order: 1, exp: 0 }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// Residue `k/d` in `[0, 1)` as a `(numerator, denominator)` pair.
    pub fn residue(&self) -> (u32, u32) {
        (self.exp, self.order)
    }

    pub fn residue_ratio(&self) -> num_rational::Ratio<i64> {
        num_rational::Ratio::new(self.exp as i64, self.order as i64)
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        let l = lcm(self.order as u64, other.order as u64);
        let k = self.exp as u64 * (l / self.order as u64) + other.exp as u64 * (l / other.order as u64);
        RootOfUnity::new(l as u32, k as i64)
    }

    pub fn inv(&self) -> RootOfUnity {
        RootOfUnity::new(self.order, -(self.exp as i64))
    }

    pub fn pow(&self, e: i64) -> RootOfUnity {
        RootOfUnity::new(self.order, (self.exp as i64 * e).rem_euclid(self.order as i64))
    }

    pub fn is_one(&self) -> bool {
        self.order == 1
    }

    /// Conductor of the smallest field holding this root, normalised as in `util::canonical_conductor`.
    pub fn minimal_conductor(&self) -> u32 {
        crate::util::canonical_conductor(self.order as u64) as u32
    }

    pub fn to_elt(&self, field: &CycloField) -> Result<CycloElt> {
        field.root(self.order, self.exp as i64)
    }

    /// Value in the smallest cyclotomic field holding it.
    pub fn to_minimal_elt(&self) -> CycloElt {
        self.to_elt(&make_field(self.minimal_conductor())).unwrap()
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.order, self.exp)
    }
}

impl FromStr for RootOfUnity {
    type Err = Error;

    /// Parses `d:k` meaning `zeta_d^k`.
    fn from_str(s: &str) -> Result<Self> {
        let (d, k) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected d:k, got {s:?}")))?;
        let d: u32 = d.trim().parse().map_err(|_| Error::Parse(format!("bad order {d:?}")))?;
        let k: i64 = k.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {k:?}")))?;
        if d == 0 {
            return Err(Error::Parse("order 0".into()));
        }
        Ok(RootOfUnity::new(d, k))
    }
}
