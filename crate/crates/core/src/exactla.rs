//! Dense exact linear algebra over a single cyclotomic field.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_rational::BigRational;

use crate::cyclo::{make_field, CycloElt, CycloField, RootOfUnity};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    field: CycloField,
    dim: usize,
    data: Vec<CycloElt>,
}

impl Mat {
    pub fn new(field: &CycloField, dim: usize, data: Vec<CycloElt>) -> Result<Mat> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!("{} entries for dim {}", data.len(), dim)));
        }
        if let Some(e) = data.iter().find(|e| e.field() != field) {
            return Err(Error::FieldMismatch(field.conductor(), e.field().conductor()));
        }
        Ok(Mat { field: field.clone(), dim, data })
    }

    pub fn identity(field: &CycloField, dim: usize) -> Mat {
        let mut m = Mat::zero(field, dim);
        for i in 0..dim {
            m.data[i * dim + i] = field.one();
        }
        m
    }

    pub fn zero(field: &CycloField, dim: usize) -> Mat {
        Mat { field: field.clone(), dim, data: vec![field.zero(); dim * dim] }
    }

    pub fn scalar(c: &CycloElt, dim: usize) -> Mat {
        let mut m = Mat::zero(c.field(), dim);
        for i in 0..dim {
            m.data[i * dim + i] = c.clone();
        }
        m
    }

    pub fn diag(entries: &[CycloElt]) -> Mat {
        let f = entries[0].field().clone();
        let n = entries.len();
        let mut m = Mat::zero(&f, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_rows(field: &CycloField, rows: Vec<Vec<CycloElt>>) -> Result<Mat> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        Mat::new(field, dim, rows.into_iter().flatten().collect())
    }

    pub fn from_int_rows(field: &CycloField, rows: &[Vec<i64>]) -> Mat {
        let dim = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().map(|&c| field.from_int(c))).collect();
        Mat::new(field, dim, data).expect("square integer matrix")
    }

    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[CycloElt] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &CycloElt {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycloElt) {
        assert!(v.field() == &self.field);
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<CycloElt> {
        self.data[i * self.dim..(i + 1) * self.dim].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<CycloElt> {
        (0..self.dim).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<CycloElt>> {
        (0..self.dim).map(|i| self.row(i)).collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        assert!(self.field == other.field, "field mismatch in matmul");
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<CycloElt> = None;
                for k in 0..n {
                    let a = &self.data[i * n + k];
                    if a.is_zero() {
                        continue;
                    }
                    let b = &other.data[k * n + j];
                    if b.is_zero() {
                        continue;
                    }
                    let t = a * b;
                    acc = Some(match acc {
                        None => t,
                        Some(s) => s + t,
                    });
                }
                data.push(acc.unwrap_or_else(|| self.field.zero()));
            }
        }
        Mat { field: self.field.clone(), dim: n, data }
    }

    pub fn apply(&self, v: &[CycloElt]) -> Vec<CycloElt> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = self.field.zero();
                for k in 0..n {
                    let a = &self.data[i * n + k];
                    if !a.is_zero() && !v[k].is_zero() {
                        acc += &(a * &v[k]);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { field: self.field.clone(), dim: self.dim, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { field: self.field.clone(), dim: self.dim, data }
    }

    pub fn scale(&self, c: &CycloElt) -> Mat {
        let data = self.data.iter().map(|a| a * c).collect();
        Mat { field: self.field.clone(), dim: self.dim, data }
    }

    pub fn neg(&self) -> Mat {
        let data = self.data.iter().map(|a| -a).collect();
        Mat { field: self.field.clone(), dim: self.dim, data }
    }

    pub fn minus_identity(&self) -> Mat {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] = &m.data[i * self.dim + i] - &self.field.one();
        }
        m
    }

    pub fn transpose(&self) -> Mat {
        let n = self.dim;
        let data = (0..n * n).map(|k| self.data[(k % n) * n + k / n].clone()).collect();
        Mat { field: self.field.clone(), dim: n, data }
    }

    pub fn conj(&self) -> Mat {
        let data = self.data.iter().map(|a| a.conj()).collect();
        Mat { field: self.field.clone(), dim: self.dim, data }
    }

    pub fn embed(&self, target: &CycloField) -> Result<Mat> {
        if &self.field == target {
            return Ok(self.clone());
        }
        let data = self.data.iter().map(|a| a.embed(target)).collect::<Result<_>>()?;
        Ok(Mat { field: target.clone(), dim: self.dim, data })
    }

    pub fn try_descend(&self, sub: &CycloField) -> Option<Mat> {
        let data = self.data.iter().map(|a| a.try_descend(sub)).collect::<Option<_>>()?;
        Some(Mat { field: sub.clone(), dim: self.dim, data })
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim;
        (0..n * n).all(|k| {
            if k / n == k % n {
                self.data[k].is_one()
            } else {
                self.data[k].is_zero()
            }
        })
    }

    /// `Some(c)` if the matrix equals `c * I`.
    pub fn as_scalar(&self) -> Option<CycloElt> {
        let n = self.dim;
        let c = self.data[0].clone();
        let ok = (0..n * n).all(|k| {
            if k / n == k % n {
                self.data[k] == c
            } else {
                self.data[k].is_zero()
            }
        });
        ok.then_some(c)
    }

    pub fn trace(&self) -> CycloElt {
        let mut acc = self.field.zero();
        for i in 0..self.dim {
            acc += &self.data[i * self.dim + i];
        }
        acc
    }

    pub fn det(&self) -> CycloElt {
        let n = self.dim;
        if n == 1 {
            return self.data[0].clone();
        }
        if n == 2 {
            return &(&self.data[0] * &self.data[3]) - &(&self.data[1] * &self.data[2]);
        }
        let mut a = self.rows();
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det = &det * &a[c][c];
            let inv = a[c][c].inv().unwrap();
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..n {
                    let v = &f * &a[c][k];
                    a[r][k] -= &v;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.dim;
        if n == 2 {
            let d = self.det();
            if d.is_zero() {
                return Err(Error::Singular);
            }
            let di = d.inv()?;
            let data = vec![
                &self.data[3] * &di,
                -(&self.data[1] * &di),
                -(&self.data[2] * &di),
                &self.data[0] * &di,
            ];
            return Ok(Mat { field: self.field.clone(), dim: 2, data });
        }
        let mut a: Vec<Vec<CycloElt>> = (0..n)
            .map(|i| {
                let mut r = self.row(i);
                r.extend((0..n).map(|j| if i == j { self.field.one() } else { self.field.zero() }));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero()).ok_or(Error::Singular)?;
            a.swap(p, c);
            let inv = a[c][c].inv()?;
            for k in 0..2 * n {
                if !a[c][k].is_zero() {
                    a[c][k] = &a[c][k] * &inv;
                }
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    if a[c][k].is_zero() {
                        continue;
                    }
                    let v = &f * &a[c][k];
                    a[r][k] -= &v;
                }
            }
        }
        let data = a.into_iter().flat_map(|r| r.into_iter().skip(n)).collect();
        Ok(Mat { field: self.field.clone(), dim: n, data })
    }

    pub fn pow(&self, e: i64) -> Result<Mat> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Mat::identity(&self.field, self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        Ok(acc)
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows();
        rref(&mut rows).len()
    }

    /// Monic `det(xI - A)` by Faddeev-LeVerrier, lowest degree first.
    pub fn charpoly(&self) -> CharPoly {
        let n = self.dim;
        let f = &self.field;
        let mut c = vec![f.zero(); n + 1];
        c[n] = f.one();
        let mut mk = Mat::zero(f, n);
        for k in 1..=n {
            let mut next = self.matmul(&mk);
            for i in 0..n {
                next.data[i * n + i] = &next.data[i * n + i] + &c[n - k + 1];
            }
            let tr = self.matmul(&next).trace();
            let kinv = f.from_ratio(&BigRational::new((-1).into(), (k as i64).into()));
            c[n - k] = &tr * &kinv;
            mk = next;
        }
        CharPoly { coeffs: c }
    }

    /// Multiplicities of the candidate roots of unity as roots of the characteristic polynomial.
    pub fn eig_multiplicity(&self, candidates: &[RootOfUnity]) -> Vec<(RootOfUnity, usize)> {
        let cp = self.charpoly();
        cp.root_multiplicities(candidates)
    }

    /// Nullity of `A - c I`.
    pub fn eigenspace_dim(&self, c: &CycloElt) -> usize {
        self.dim - self.sub(&Mat::scalar(c, self.dim)).rank()
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.matmul(rhs)
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        self.matmul(&rhs)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim={}; field={};", self.dim, self.field.conductor())?;
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "{};", row.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn header_value<'a>(tok: &'a str, key: &str) -> Result<&'a str> {
    let (k, v) = tok
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected {key}=..., got {tok:?}")))?;
    if k.trim() != key {
        return Err(Error::Parse(format!("expected {key}, got {:?}", k.trim())));
    }
    Ok(v.trim())
}

fn split_entries(row: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in row.char_indices() {
        if start.is_none() && !ch.is_whitespace() {
            start = Some(i);
        }
        if ch == ']' {
            if let Some(s) = start.take() {
                out.push(row[s..=i].trim());
            }
        }
    }
    out
}

impl FromStr for Mat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mat> {
        let toks: Vec<&str> = s.split(';').map(str::trim).filter(|t| !t.is_empty()).collect();
        if toks.len() < 2 {
            return Err(Error::Parse("matrix header missing".into()));
        }
        let dim: usize = header_value(toks[0], "dim")?
            .parse()
            .map_err(|_| Error::Parse("bad dim".into()))?;
        let n: u32 = header_value(toks[1], "field")?
            .parse()
            .map_err(|_| Error::Parse("bad field".into()))?;
        let field = make_field(n);
        if toks.len() != 2 + dim {
            return Err(Error::Parse(format!("expected {dim} rows, found {}", toks.len() - 2)));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in &toks[2..] {
            let ents = split_entries(row);
            if ents.len() != dim {
                return Err(Error::Parse(format!("row has {} entries, expected {dim}", ents.len())));
            }
            for e in ents {
                let v: CycloElt = e.parse()?;
                data.push(v.embed(&field)?);
            }
        }
        Mat::new(&field, dim, data)
    }
}

/// Characteristic polynomial, monic, coefficients lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub coeffs: Vec<CycloElt>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn field(&self) -> &CycloField {
        self.coeffs[0].field()
    }

    pub fn eval(&self, x: &CycloElt) -> CycloElt {
        let mut acc = x.field().zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_mat(&self, a: &Mat) -> Mat {
        let mut acc = Mat::zero(a.field(), a.dim());
        for c in self.coeffs.iter().rev() {
            acc = acc.matmul(a).add(&Mat::scalar(c, a.dim()));
        }
        acc
    }

    pub fn embed(&self, target: &CycloField) -> Result<CharPoly> {
        Ok(CharPoly {
            coeffs: self.coeffs.iter().map(|c| c.embed(target)).collect::<Result<_>>()?,
        })
    }

    /// Quotient by `(x - r)` when `r` is a root.
    pub fn divide_root(&self, r: &CycloElt) -> Option<CharPoly> {
        let n = self.degree();
        if n == 0 {
            return None;
        }
        let mut q = vec![r.field().zero(); n];
        let mut carry = r.field().zero();
        for i in (0..n).rev() {
            carry = &self.coeffs[i + 1] + &(&carry * r);
            q[i] = carry.clone();
        }
        let rem = &self.coeffs[0] + &(&carry * r);
        rem.is_zero().then_some(CharPoly { coeffs: q })
    }

    /// Multiplicity of each candidate by repeated synthetic division; the polynomial is
    /// embedded into a field holding all candidates first.
    pub fn root_multiplicities(&self, candidates: &[RootOfUnity]) -> Vec<(RootOfUnity, usize)> {
        let mut field = self.field().clone();
        for c in candidates {
            field = field.with_roots(c.order());
        }
        let mut rest = self.embed(&field).expect("embedding into a larger field");
        let mut out = Vec::new();
        for c in candidates {
            let x = c.to_elt(&field).unwrap();
            let mut m = 0;
            while let Some(q) = rest.divide_root(&x) {
                rest = q;
                m += 1;
            }
            if m > 0 {
                out.push((*c, m));
            }
        }
        out
    }
}

/// Reduced row echelon form in place; returns pivot columns and drops zero rows.
pub fn rref(rows: &mut Vec<Vec<CycloElt>>) -> Vec<usize> {
    if rows.is_empty() {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().unwrap();
        if !inv.is_one() {
            for k in c..ncols {
                if !rows[r][k].is_zero() {
                    rows[r][k] = &rows[r][k] * &inv;
                }
            }
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for k in c..ncols {
                if rows[r][k].is_zero() {
                    continue;
                }
                let v = &f * &rows[r][k];
                rows[i][k] -= &v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Solutions `x` of `rows * x = 0` for a (possibly rectangular) row list with `ncols` columns.
pub fn nullspace(rows: &[Vec<CycloElt>], ncols: usize, field: &CycloField) -> Vec<Vec<CycloElt>> {
    let mut r = rows.to_vec();
    let pivots = rref(&mut r);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![field.zero(); ncols];
        v[free] = field.one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -&r[i][free];
        }
        out.push(v);
    }
    out
}

/// Subspace of `F^ambient` stored as an RREF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: CycloField,
    ambient: usize,
    basis: Vec<Vec<CycloElt>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span(field: &CycloField, ambient: usize, vectors: Vec<Vec<CycloElt>>) -> Subspace {
        let mut rows = vectors;
        let pivots = rref(&mut rows);
        Subspace { field: field.clone(), ambient, basis: rows, pivots }
    }

    pub fn zero(field: &CycloField, ambient: usize) -> Subspace {
        Subspace { field: field.clone(), ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<CycloElt>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after eliminating the pivot coordinates.
    pub fn reduce(&self, v: &[CycloElt]) -> Vec<CycloElt> {
        let mut w = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (k, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    w[k] -= &(&f * x);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[CycloElt]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Subspace::span(&self.field, self.ambient, v)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let du = self.dim();
        let dw = other.dim();
        if du == 0 || dw == 0 {
            return Subspace::zero(&self.field, self.ambient);
        }
        // Columns u_i and -w_j; a kernel vector (a, b) gives sum a_i u_i in both spaces.
        let rows: Vec<Vec<CycloElt>> = (0..self.ambient)
            .map(|k| {
                let mut r: Vec<CycloElt> = self.basis.iter().map(|u| u[k].clone()).collect();
                r.extend(other.basis.iter().map(|w| -&w[k]));
                r
            })
            .collect();
        let ker = nullspace(&rows, du + dw, &self.field);
        let vecs = ker
            .into_iter()
            .map(|x| {
                let mut v = vec![self.field.zero(); self.ambient];
                for (a, u) in x.iter().take(du).zip(&self.basis) {
                    if a.is_zero() {
                        continue;
                    }
                    for (k, uk) in u.iter().enumerate() {
                        if !uk.is_zero() {
                            v[k] += &(a * uk);
                        }
                    }
                }
                v
            })
            .collect();
        Subspace::span(&self.field, self.ambient, vecs)
    }

    /// Coordinates not among the pivots, in increasing order.
    pub fn complement_indices(&self) -> Vec<usize> {
        (0..self.ambient).filter(|c| !self.pivots.contains(c)).collect()
    }
}

/// Null space of `A` acting on column vectors.
pub fn kernel(a: &Mat) -> Subspace {
    let vecs = nullspace(&a.rows(), a.dim(), a.field());
    Subspace::span(a.field(), a.dim(), vecs)
}

/// Column space of `A`.
pub fn image(a: &Mat) -> Subspace {
    Subspace::span(a.field(), a.dim(), (0..a.dim()).map(|j| a.col(j)).collect())
}

pub fn subspace_sum(u: &Subspace, w: &Subspace) -> Subspace {
    u.sum(w)
}

/// Matrix of `B` on `F^n / U` in the basis `e_j + U`, `j` running over non-pivot coordinates.
pub fn quotient_action(b: &Mat, u: &Subspace) -> Result<Mat> {
    if b.dim() != u.ambient() {
        return Err(Error::Dimension("quotient ambient mismatch".into()));
    }
    for v in u.basis() {
        if !u.contains(&b.apply(v)) {
            return Err(Error::NotInvariant);
        }
    }
    let comp = u.complement_indices();
    let d = comp.len();
    let mut data = vec![b.field().zero(); d * d];
    for (cj, &j) in comp.iter().enumerate() {
        let w = u.reduce(&b.col(j));
        for (ci, &i) in comp.iter().enumerate() {
            data[ci * d + cj] = w[i].clone();
        }
    }
    Mat::new(b.field(), d, data)
}

/// Ordered list of invertible matrices of equal size over one field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MatTuple {
    mats: Vec<Mat>,
}

impl MatTuple {
    pub fn new(mats: Vec<Mat>) -> Result<MatTuple> {
        if mats.is_empty() {
            return Err(Error::Invalid("empty tuple".into()));
        }
        let f = mats[0].field().clone();
        let d = mats[0].dim();
        for m in &mats {
            if m.field() != &f {
                return Err(Error::FieldMismatch(f.conductor(), m.field().conductor()));
            }
            if m.dim() != d {
                return Err(Error::Dimension("tuple entries differ in size".into()));
            }
        }
        Ok(MatTuple { mats })
    }

    /// Builds a tuple after embedding all entries into their common field.
    pub fn unify(mats: Vec<Mat>) -> Result<MatTuple> {
        let mut f = mats.first().ok_or_else(|| Error::Invalid("empty tuple".into()))?.field().clone();
        for m in &mats {
            f = f.join(m.field());
        }
        MatTuple::new(mats.iter().map(|m| m.embed(&f)).collect::<Result<_>>()?)
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn field(&self) -> &CycloField {
        self.mats[0].field()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn product(&self) -> Mat {
        let mut p = self.mats[0].clone();
        for m in &self.mats[1..] {
            p = p.matmul(m);
        }
        p
    }

    pub fn embed(&self, target: &CycloField) -> Result<MatTuple> {
        Ok(MatTuple { mats: self.mats.iter().map(|m| m.embed(target)).collect::<Result<_>>()? })
    }

    /// `[A_T^-1, ..., A_1^-1]`.
    pub fn inverse_tuple(&self) -> Result<MatTuple> {
        let mats = self.mats.iter().rev().map(|m| m.inverse()).collect::<Result<_>>()?;
        Ok(MatTuple { mats })
    }

    pub fn conjugate_by(&self, g: &Mat) -> Result<MatTuple> {
        let gi = g.inverse()?;
        Ok(MatTuple { mats: self.mats.iter().map(|m| g.matmul(m).matmul(&gi)).collect() })
    }
}

impl fmt::Display for MatTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tuple len={};", self.mats.len())?;
        for m in &self.mats {
            write!(f, "{}", m)?;
        }
        Ok(())
    }
}

/// Parse consecutive matrices in text format; each starts at a line beginning with `dim=`.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_mat_list(body: &str) -> Result<Vec<Mat>> {
    let mut chunks: Vec<String> = Vec::new();
    for line in body.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with("dim=") {
            chunks.push(String::new());
        }
        let cur = chunks
            .last_mut()
            .ok_or_else(|| Error::Parse("matrix data before header".into()))?;
        cur.push_str(t);
        cur.push('\n');
    }
    chunks.iter().map(|c| c.parse()).collect()
}

impl FromStr for MatTuple {
    type Err = Error;

    /// Header `tuple len=T;` followed by `T` matrices, each starting with `dim=`.
    fn from_str(s: &str) -> Result<MatTuple> {
        let s: String = s
            .lines()
            .skip_while(|l| l.trim().is_empty() || l.trim().starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n");
        let rest = s
            .trim()
            .strip_prefix("tuple")
            .ok_or_else(|| Error::Parse("tuple header missing".into()))?;
        let (hdr, body) = rest
            .split_once(';')
            .ok_or_else(|| Error::Parse("tuple header missing ';'".into()))?;
        let len: usize = header_value(hdr.trim(), "len")?
            .parse()
            .map_err(|_| Error::Parse("bad tuple length".into()))?;
        let mats = parse_mat_list(body)?;
        if mats.len() != len {
            return Err(Error::Parse(format!("expected {len} matrices, found {}", mats.len())));
        }
        MatTuple::unify(mats)
    }
}
