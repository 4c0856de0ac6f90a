//! Finite matrix groups: exact closure, reflections and their conjugacy
//! classes, generation tests, and the catalog of reflection groups.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::cyclo::{make_field, CycloField, RootOfUnity};
use crate::error::{Error, Result};
use crate::exactla::{parse_mat_list, Mat};
use crate::modp::ModP;
use crate::util::{divisors, lcm, lcm_all};

pub const DEFAULT_CAP: usize = 2_000_000;

/// Matrix with `i64` numerators over a common positive denominator, entries in
/// the power basis of the field. Canonical, so usable as a hash key.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PackedMat {
    den: i64,
    num: Box<[i64]>,
}

#[derive(Clone, Debug)]
pub struct Packer {
    field: CycloField,
    dim: usize,
    phi: usize,
    red: Vec<Vec<i64>>,
}

impl Packer {
    pub fn new(field: &CycloField, dim: usize) -> Packer {
        Packer {
            field: field.clone(),
            dim,
            phi: field.degree(),
            red: field.reduction_table().to_vec(),
        }
    }

    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity(&self) -> PackedMat {
        let mut num = vec![0i64; self.dim * self.dim * self.phi];
        for i in 0..self.dim {
            num[(i * self.dim + i) * self.phi] = 1;
        }
        PackedMat { den: 1, num: num.into() }
    }

    pub fn pack(&self, m: &Mat) -> Result<PackedMat> {
        if m.dim() != self.dim || m.field() != &self.field {
            return Err(Error::Dimension("matrix does not match packer".into()));
        }
        let mut den = BigInt::from(1);
        for e in m.entries() {
            den = den.lcm(e.denominator());
        }
        let mut num = Vec::with_capacity(self.dim * self.dim * self.phi);
        for e in m.entries() {
            let scale = &den / e.denominator();
            for c in e.numerators() {
                num.push((c * &scale).to_i64().ok_or(Error::Overflow)?);
            }
        }
        Ok(PackedMat {
            den: den.to_i64().ok_or(Error::Overflow)?,
            num: num.into(),
        })
    }

    pub fn unpack(&self, p: &PackedMat) -> Mat {
        let den = BigInt::from(p.den);
        let data = p
            .num
            .chunks(self.phi)
            .map(|c| {
                let co: Vec<BigRational> = c
                    .iter()
                    .map(|&x| BigRational::new(BigInt::from(x), den.clone()))
                    .collect();
                self.field.from_coeffs(&co).expect("packed entry has field degree")
            })
            .collect();
        Mat::new(&self.field, self.dim, data).expect("packed matrix has packer shape")
    }

    pub fn mul(&self, a: &PackedMat, b: &PackedMat) -> Result<PackedMat> {
        let (n, f) = (self.dim, self.phi);
        let mut num = vec![0i64; n * n * f];
        let mut acc = vec![0i128; 2 * f - 1];
        for i in 0..n {
            for j in 0..n {
                acc.iter_mut().for_each(|x| *x = 0);
                for k in 0..n {
                    let x = &a.num[(i * n + k) * f..(i * n + k + 1) * f];
                    if x.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let y = &b.num[(k * n + j) * f..(k * n + j + 1) * f];
                    for (s, &xs) in x.iter().enumerate() {
                        if xs == 0 {
                            continue;
                        }
                        for (t, &yt) in y.iter().enumerate() {
                            acc[s + t] += xs as i128 * yt as i128;
                        }
                    }
                }
                for s in f..2 * f - 1 {
                    let c = acc[s];
                    if c != 0 {
                        for t in 0..f {
                            acc[t] += c * self.red[s][t] as i128;
                        }
                    }
                }
                for t in 0..f {
                    num[(i * n + j) * f + t] = i64::try_from(acc[t]).map_err(|_| Error::Overflow)?;
                }
            }
        }
        let den = a.den.checked_mul(b.den).ok_or(Error::Overflow)?;
        Ok(normalize(den, num))
    }
}

fn normalize(mut den: i64, mut num: Vec<i64>) -> PackedMat {
    if den != 1 {
        let g = num.iter().fold(den, |g, &x| g.gcd(&x));
        if g > 1 {
            den /= g;
            num.iter_mut().for_each(|x| *x /= g);
        }
    }
    PackedMat { den, num: num.into() }
}

/// All elements of a finite matrix group, in BFS order from the identity.
#[derive(Clone)]
pub struct GroupElements {
    packer: Packer,
    gens: Vec<Mat>,
    elems: Vec<PackedMat>,
    index: HashMap<PackedMat, u32>,
}

impl fmt::Debug for GroupElements {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElements(order={}, dim={})", self.elems.len(), self.packer.dim)
    }
}

/// BFS closure under left multiplication by the generators.
pub fn closure(gens: &[Mat], cap: usize) -> Result<GroupElements> {
    closure_impl(gens, cap, true)
}

/// Closure by right multiplication; used to cross-check `closure`.
pub fn closure_right(gens: &[Mat], cap: usize) -> Result<GroupElements> {
    closure_impl(gens, cap, false)
}

fn closure_impl(gens: &[Mat], cap: usize, left: bool) -> Result<GroupElements> {
    let first = gens
        .first()
        .ok_or_else(|| Error::Invalid("closure needs at least one generator".into()))?;
    let packer = Packer::new(first.field(), first.dim());
    let packed: Vec<PackedMat> = gens.iter().map(|g| packer.pack(g)).collect::<Result<_>>()?;
    let id = packer.identity();
    let mut elems = vec![id.clone()];
    let mut index = HashMap::new();
    index.insert(id, 0u32);
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head].clone();
        head += 1;
        for g in &packed {
            let y = if left { packer.mul(g, &x)? } else { packer.mul(&x, g)? };
            if !index.contains_key(&y) {
                if elems.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                index.insert(y.clone(), elems.len() as u32);
                elems.push(y);
            }
        }
    }
    Ok(GroupElements { packer, gens: gens.to_vec(), elems, index })
}

impl GroupElements {
    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn dim(&self) -> usize {
        self.packer.dim
    }

    pub fn field(&self) -> &CycloField {
        &self.packer.field
    }

    pub fn generators(&self) -> &[Mat] {
        &self.gens
    }

    pub fn packer(&self) -> &Packer {
        &self.packer
    }

    pub fn packed(&self, i: usize) -> &PackedMat {
        &self.elems[i]
    }

    pub fn element(&self, i: usize) -> Mat {
        self.packer.unpack(&self.elems[i])
    }

    pub fn index_of(&self, m: &Mat) -> Option<usize> {
        let m = if m.field() == self.field() { m.clone() } else { m.embed(self.field()).ok()? };
        let p = self.packer.pack(&m).ok()?;
        self.index.get(&p).map(|&i| i as usize)
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.index_of(m).is_some()
    }

    /// Same element set, regardless of order or generators.
    pub fn same_set(&self, other: &GroupElements) -> bool {
        self.order() == other.order() && self.elems.iter().all(|e| other.index.contains_key(e))
    }
}

#[derive(Clone, Debug)]
pub struct Reflection {
    pub element: usize,
    pub mat: Mat,
    pub eigenvalue: RootOfUnity,
    pub class: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ReflectionSet {
    pub members: Vec<Reflection>,
    pub class_count: usize,
}

impl ReflectionSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// First member of each class, by class id.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.class_count];
        for (i, r) in self.members.iter().enumerate() {
            if reps[r.class] == usize::MAX {
                reps[r.class] = i;
            }
        }
        reps
    }

    pub fn class_members(&self, c: usize) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i].class == c).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.class_count];
        for r in &self.members {
            s[r.class] += 1;
        }
        s
    }
}

/// A finite group with mod-p indexing, reflections, and cached lookup tables.
pub struct FiniteGroup {
    elements: GroupElements,
    modp: ModP,
    reduced: Vec<u64>,
    modp_index: HashMap<Box<[u64]>, u32>,
    reflections: ReflectionSet,
    refl_conj: Vec<Vec<u32>>,
    refl_tables: OnceLock<Vec<Vec<u32>>>,
    eigen: OnceLock<Vec<Vec<(u32, u8)>>>,
    gen_memo: Mutex<HashMap<Vec<u32>, bool>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiniteGroup(order={}, reflections={}, classes={})",
            self.order(),
            self.reflections.len(),
            self.reflections.class_count
        )
    }
}

impl FiniteGroup {
    /// `eigen_order`, when given, must be a multiple of every element order
    /// (e.g. the lcm of the degrees); otherwise the exponent is computed.
    pub fn from_gens(gens: &[Mat], cap: usize, eigen_order: Option<u64>) -> Result<FiniteGroup> {
        let elements = closure(gens, cap)?;
        Self::from_elements(elements, eigen_order)
    }

    pub fn from_elements(elements: GroupElements, eigen_order: Option<u64>) -> Result<FiniteGroup> {
        let roots = elements.field().roots_order() as u64;
        let m = match eigen_order {
            Some(e) => lcm(e, roots),
            None => {
                let pre = ModP::new(roots);
                let red = reduce_all(&elements, &pre);
                lcm(exponent(&pre, &red, elements.dim()), roots)
            }
        };
        let modp = ModP::new(m);
        let reduced = reduce_all(&elements, &modp);
        let n2 = elements.dim() * elements.dim();
        let mut modp_index = HashMap::with_capacity(elements.order());
        for i in 0..elements.order() {
            modp_index.insert(reduced[i * n2..(i + 1) * n2].to_vec().into_boxed_slice(), i as u32);
        }
        if modp_index.len() != elements.order() {
            return Err(Error::Invalid("reduction modulo p is not injective on the group".into()));
        }
        let mut g = FiniteGroup {
            elements,
            modp,
            reduced,
            modp_index,
            reflections: ReflectionSet::default(),
            refl_conj: Vec::new(),
            refl_tables: OnceLock::new(),
            eigen: OnceLock::new(),
            gen_memo: Mutex::new(HashMap::new()),
        };
        g.find_reflections()?;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.elements.order()
    }

    pub fn dim(&self) -> usize {
        self.elements.dim()
    }

    pub fn field(&self) -> &CycloField {
        self.elements.field()
    }

    pub fn elements(&self) -> &GroupElements {
        &self.elements
    }

    pub fn modp(&self) -> &ModP {
        &self.modp
    }

    /// Order of the roots of unity in which eigenvalues are resolved.
    pub fn eigen_order(&self) -> u64 {
        self.modp.order
    }

    pub fn reflections(&self) -> &ReflectionSet {
        &self.reflections
    }

    pub fn element(&self, i: usize) -> Mat {
        self.elements.element(i)
    }

    pub fn reduced(&self, i: usize) -> &[u64] {
        let n2 = self.dim() * self.dim();
        &self.reduced[i * n2..(i + 1) * n2]
    }

    pub fn index_of(&self, m: &Mat) -> Option<usize> {
        self.elements.index_of(m)
    }

    pub fn index_of_reduced(&self, r: &[u64]) -> Option<usize> {
        self.modp_index.get(r).map(|&i| i as usize)
    }

    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        let prod = self.modp.matmul(self.reduced(a), self.reduced(b), self.dim());
        self.index_of_reduced(&prod).expect("group is closed")
    }

    pub fn inverse_idx(&self, a: usize) -> usize {
        let inv = self.element(a).inverse().expect("group elements are invertible");
        self.index_of(&inv).expect("group is closed under inverses")
    }

    fn find_reflections(&mut self) -> Result<()> {
        let n = self.dim();
        let p = self.modp.p;
        let mut members = Vec::new();
        for i in 1..self.order() {
            let mut a = self.reduced(i).to_vec();
            for k in 0..n {
                a[k * n + k] = (a[k * n + k] + p - 1) % p;
            }
            if self.modp.rank(&a, n, n) != 1 {
                continue;
            }
            let mat = self.element(i);
            if mat.minus_identity().rank() != 1 {
                continue;
            }
            let eigenvalue = mat
                .det()
                .as_root_of_unity()
                .ok_or_else(|| Error::Invalid("reflection eigenvalue is not a root of unity".into()))?;
            members.push(Reflection { element: i, mat, eigenvalue, class: 0 });
        }
        let pos: HashMap<usize, usize> =
            members.iter().enumerate().map(|(k, r)| (r.element, k)).collect();
        // conj[s][r] = index of s r s^-1 among the reflections
        let inv: Vec<usize> = members.iter().map(|r| self.inverse_idx(r.element)).collect();
        let mut conj = vec![vec![0u32; members.len()]; members.len()];
        for (s, rs) in members.iter().enumerate() {
            for (r, rr) in members.iter().enumerate() {
                let x = self.mul_idx(self.mul_idx(rs.element, rr.element), inv[s]);
                conj[s][r] = pos[&x] as u32;
            }
        }
        let gens: Vec<(usize, usize)> = self
            .elements
            .generators()
            .iter()
            .map(|g| {
                let gi = self.index_of(g).expect("generator lies in its closure");
                let ginv = self.inverse_idx(gi);
                (gi, ginv)
            })
            .collect();
        let mut parent: Vec<usize> = (0..members.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for (r, rr) in members.iter().enumerate() {
            for &(gi, ginv) in &gens {
                let x = self.mul_idx(self.mul_idx(gi, rr.element), ginv);
                let t = pos[&x];
                let (a, b) = (find(&mut parent, r), find(&mut parent, t));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut class_of_root = HashMap::new();
        for r in 0..members.len() {
            let root = find(&mut parent, r);
            let next = class_of_root.len();
            let c = *class_of_root.entry(root).or_insert(next);
            members[r].class = c;
        }
        self.reflections = ReflectionSet { members, class_count: class_of_root.len() };
        self.refl_conj = conj;
        Ok(())
    }

    /// Index of `s r s^-1` among the reflections.
    pub fn conjugate_reflection(&self, s: usize, r: usize) -> usize {
        self.refl_conj[s][r] as usize
    }

    /// Right-multiplication tables: `tables[r][x]` is the index of `x * R_r`.
    pub fn reflection_tables(&self) -> &[Vec<u32>] {
        self.refl_tables.get_or_init(|| {
            self.reflections
                .members
                .iter()
                .map(|r| self.right_table(r.element))
                .collect()
        })
    }

    pub fn right_table(&self, g: usize) -> Vec<u32> {
        let n = self.dim();
        let rg = self.reduced(g).to_vec();
        (0..self.order())
            .map(|x| {
                let prod = self.modp.matmul(self.reduced(x), &rg, n);
                self.modp_index[prod.as_slice()]
            })
            .collect()
    }

    /// Eigenvalues with multiplicities of element `i`, as `(k, mult)` meaning `zeta_M^k`.
    pub fn eigen_raw(&self, i: usize) -> &[(u32, u8)] {
        &self.all_eigen()[i]
    }

    pub fn eigen(&self, i: usize) -> Vec<(RootOfUnity, usize)> {
        let m = self.eigen_order() as u32;
        self.eigen_raw(i)
            .iter()
            .map(|&(k, c)| (RootOfUnity::new(m, k as i64), c as usize))
            .collect()
    }

    fn all_eigen(&self) -> &Vec<Vec<(u32, u8)>> {
        self.eigen.get_or_init(|| {
            let n = self.dim();
            (0..self.order())
                .map(|i| {
                    let cp = self.modp.charpoly(self.reduced(i), n);
                    self.modp
                        .root_multiplicities(&cp)
                        .into_iter()
                        .map(|(k, c)| (k as u32, c as u8))
                        .collect()
                })
                .collect()
        })
    }

    /// True iff every element's eigenvalues are resolved as `eigen_order`-th roots.
    pub fn eigen_complete(&self) -> bool {
        let n = self.dim();
        self.all_eigen()
            .iter()
            .all(|e| e.iter().map(|&(_, c)| c as usize).sum::<usize>() == n)
    }

    /// Maximum multiplicity of a primitive `d`-th root of unity over all elements,
    /// for every `d` dividing the eigen order.
    pub fn max_primitive_multiplicities(&self) -> Vec<(u64, usize)> {
        let m = self.eigen_order();
        let mut best: HashMap<u64, usize> = HashMap::new();
        for e in self.all_eigen() {
            for &(k, c) in e {
                let d = m / (k as u64).gcd(&m);
                let b = best.entry(d).or_insert(0);
                *b = (*b).max(c as usize);
            }
        }
        divisors(m)
            .into_iter()
            .map(|d| (d, best.get(&d).copied().unwrap_or(0)))
            .collect()
    }

    /// Whether the reflections with the given indices generate the whole group.
    pub fn generates_reflections(&self, refl: &[usize]) -> bool {
        let mut key: Vec<u32> = refl.iter().map(|&r| r as u32).collect();
        key.sort_unstable();
        key.dedup();
        if let Some(&v) = self.gen_memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.conjugation_closed(&key) && self.bfs_generates(&key);
        self.gen_memo.lock().unwrap().insert(key, v);
        v
    }

    // Conjugates of the set under the subgroup must fill whole classes of W.
    fn conjugation_closed(&self, set: &[u32]) -> bool {
        let mut seen: HashSet<u32> = set.iter().copied().collect();
        let mut queue: VecDeque<u32> = set.iter().copied().collect();
        while let Some(r) = queue.pop_front() {
            for &s in set {
                let t = self.refl_conj[s as usize][r as usize];
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        let classes: HashSet<usize> =
            set.iter().map(|&r| self.reflections.members[r as usize].class).collect();
        let sizes = self.reflections.class_sizes();
        seen.len() == classes.iter().map(|&c| sizes[c]).sum::<usize>()
    }

    fn bfs_generates(&self, set: &[u32]) -> bool {
        let tables = self.reflection_tables();
        let order = self.order();
        let mut seen = vec![false; order];
        seen[0] = true;
        let mut count = 1usize;
        let mut stack = vec![0u32];
        while let Some(x) = stack.pop() {
            for &s in set {
                let y = tables[s as usize][x as usize];
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    if 2 * count > order {
                        return true;
                    }
                    stack.push(y);
                }
            }
        }
        count == order
    }

    /// Order of the subgroup generated by the given elements.
    pub fn subgroup_order(&self, elems: &[usize]) -> usize {
        let tables: Vec<Vec<u32>> = elems.iter().map(|&g| self.right_table(g)).collect();
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut count = 1;
        let mut stack = vec![0u32];
        while let Some(x) = stack.pop() {
            for t in &tables {
                let y = t[x as usize];
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count
    }

    /// Product of elements (in the given order) by index.
    pub fn product_idx(&self, elems: &[usize]) -> usize {
        elems.iter().fold(0, |acc, &e| self.mul_idx(acc, e))
    }
}

fn reduce_all(elements: &GroupElements, modp: &ModP) -> Vec<u64> {
    let phi = elements.field().degree();
    let z = modp.zeta_image(elements.field().conductor());
    let zp: Vec<u64> = (0..phi as u64).map(|k| crate::util::pow_mod(z, k, modp.p)).collect();
    let p = modp.p;
    let mut out = Vec::with_capacity(elements.order() * elements.dim() * elements.dim());
    for e in &elements.elems {
        let dinv = modp.inv((e.den.rem_euclid(p as i64)) as u64);
        for c in e.num.chunks(phi) {
            let mut acc = 0u64;
            for (k, &x) in c.iter().enumerate() {
                if x != 0 {
                    acc = modp.add(acc, modp.mul(x.rem_euclid(p as i64) as u64, zp[k]));
                }
            }
            out.push(modp.mul(acc, dinv));
        }
    }
    out
}

fn exponent(modp: &ModP, reduced: &[u64], n: usize) -> u64 {
    let n2 = n * n;
    let order = reduced.len() / n2;
    let mut id = vec![0u64; n2];
    for k in 0..n {
        id[k * n + k] = 1;
    }
    let mut e = 1u64;
    for i in 0..order {
        let a = &reduced[i * n2..(i + 1) * n2];
        let mut x = a.to_vec();
        let mut k = 1u64;
        while x != id {
            x = modp.matmul(&x, a, n);
            k += 1;
            assert!(k as usize <= order, "element order exceeds group order");
        }
        e = lcm(e, k);
    }
    e
}

/// Whether `subset` generates `w`.
pub fn generates(subset: &[Mat], w: &GroupCatalogEntry, cap: usize) -> Result<bool> {
    let g = catalog_group(&w.id)?;
    let idx: Option<Vec<usize>> = subset.iter().map(|m| g.index_of(m)).collect();
    match idx {
        Some(idx) => {
            let refl: Option<Vec<usize>> = idx
                .iter()
                .map(|&i| g.reflections.members.iter().position(|r| r.element == i))
                .collect();
            Ok(match refl {
                Some(r) => g.generates_reflections(&r),
                None => g.subgroup_order(&idx) == g.order(),
            })
        }
        None => {
            if cap < w.order as usize {
                return Err(Error::CapExceeded { cap });
            }
            Ok(closure(subset, cap)?.order() == w.order as usize)
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupCatalogEntry {
    pub id: String,
    pub rank: usize,
    pub order: u64,
    pub degrees: Vec<u64>,
    pub generators: Vec<Mat>,
    pub base_field: CycloField,
    pub reflection_classes: Option<usize>,
}

impl GroupCatalogEntry {
    pub fn degree_lcm(&self) -> u64 {
        lcm_all(self.degrees.iter().copied())
    }

    /// Base field extended to contain every eigenvalue of every element.
    pub fn eigen_field(&self) -> CycloField {
        self.base_field.with_roots(self.degree_lcm() as u32)
    }

    pub fn parse(text: &str) -> Result<GroupCatalogEntry> {
        let mut lines = text.lines().skip_while(|l| l.trim().is_empty() || l.trim().starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty catalog file".into()))?;
        let mut kv = HashMap::new();
        for tok in header.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| Error::Parse(format!("header lacks {k}")));
        let id = get("id")?;
        let order: u64 = get("order")?.parse().map_err(|_| Error::Parse("bad order".into()))?;
        let degrees: Vec<u64> = get("degrees")?
            .split(',')
            .map(|d| d.trim().parse().map_err(|_| Error::Parse("bad degree".into())))
            .collect::<Result<_>>()?;
        let field: u32 = get("field")?.parse().map_err(|_| Error::Parse("bad field".into()))?;
        let reflection_classes = match kv.get("reflection_classes") {
            Some(v) => Some(v.parse().map_err(|_| Error::Parse("bad class count".into()))?),
            None => None,
        };
        let body: Vec<&str> = lines.collect();
        let base_field = make_field(field);
        let generators: Vec<Mat> = parse_mat_list(&body.join("\n"))?
            .into_iter()
            .map(|m| m.embed(&base_field))
            .collect::<Result<_>>()?;
        let rank = generators.first().map(|g| g.dim()).unwrap_or(0);
        Ok(GroupCatalogEntry { id, rank, order, degrees, generators, base_field, reflection_classes })
    }

    pub fn to_text(&self) -> String {
        let degs: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
        let mut s = format!(
            "id={}; order={}; degrees={}; field={};",
            self.id,
            self.order,
            degs.join(","),
            self.base_field.conductor()
        );
        if let Some(c) = self.reflection_classes {
            s.push_str(&format!(" reflection_classes={c};"));
        }
        s.push('\n');
        for g in &self.generators {
            s.push_str(&g.to_string());
        }
        s
    }
}

const CATALOG_FILES: &[(&str, &str)] = &[
    ("G23", include_str!("../data/catalog/G23.txt")),
    ("G24", include_str!("../data/catalog/G24.txt")),
    ("G25", include_str!("../data/catalog/G25.txt")),
    ("G26", include_str!("../data/catalog/G26.txt")),
    ("G27", include_str!("../data/catalog/G27.txt")),
    ("G28", include_str!("../data/catalog/G28.txt")),
    ("G29", include_str!("../data/catalog/G29.txt")),
    ("G30", include_str!("../data/catalog/G30.txt")),
    ("G31", include_str!("../data/catalog/G31.txt")),
    ("G32", include_str!("../data/catalog/G32.txt")),
];

pub fn catalog_ids() -> Vec<&'static str> {
    CATALOG_FILES.iter().map(|(k, _)| *k).collect()
}

/// Parse `G(m,p,n)`.
pub fn parse_imprimitive_id(id: &str) -> Option<(u32, u32, usize)> {
    let inner = id.trim().strip_prefix("G(")?.strip_suffix(')')?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return None;
    }
    Some((parts[0].parse().ok()?, parts[1].parse().ok()?, parts[2].parse().ok()?))
}

/// Unvalidated entry: parsed from the shipped data or built for `G(m,p,n)`.
pub fn catalog_entry_raw(id: &str) -> Result<GroupCatalogEntry> {
    if let Some((_, text)) = CATALOG_FILES.iter().find(|(k, _)| *k == id) {
        return GroupCatalogEntry::parse(text);
    }
    if let Some((m, p, n)) = parse_imprimitive_id(id) {
        return crate::imprim::catalog_entry(m, p, n);
    }
    Err(Error::UnknownGroup(id.to_string()))
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub id: String,
    pub order: usize,
    pub reflections: usize,
    pub reflection_classes: usize,
    pub class_eigenvalues: Vec<RootOfUnity>,
    /// `(d, expected, observed)` max multiplicity of primitive `d`-th roots.
    pub degree_checks: Vec<(u64, usize, usize)>,
}

/// Checks order, eigenvalue multiplicities against the degrees, and class count.
pub fn validate(entry: &GroupCatalogEntry, cap: usize) -> Result<(FiniteGroup, ValidationReport)> {
    let bad = |reason: String| Error::CatalogInvalid { id: entry.id.clone(), reason };
    if entry.generators.is_empty() {
        return Err(bad("no generators".into()));
    }
    let g = FiniteGroup::from_gens(&entry.generators, cap.max(entry.order as usize + 1), Some(entry.degree_lcm()))?;
    if g.order() as u64 != entry.order {
        return Err(bad(format!("closure has order {}, expected {}", g.order(), entry.order)));
    }
    if !g.eigen_complete() {
        return Err(bad("element eigenvalues are not roots of the degree lcm".into()));
    }
    let mut degree_checks = Vec::new();
    for (d, observed) in g.max_primitive_multiplicities() {
        let expected = entry.degrees.iter().filter(|&&k| k % d == 0).count();
        degree_checks.push((d, expected, observed));
        if expected != observed {
            return Err(bad(format!(
                "primitive {d}-th roots: max multiplicity {observed}, degrees predict {expected}"
            )));
        }
    }
    let rs = g.reflections();
    if let Some(c) = entry.reflection_classes {
        if rs.class_count != c {
            return Err(bad(format!("{} reflection classes, expected {c}", rs.class_count)));
        }
    }
    let class_eigenvalues = rs.representatives().iter().map(|&i| rs.members[i].eigenvalue).collect();
    let report = ValidationReport {
        id: entry.id.clone(),
        order: g.order(),
        reflections: rs.len(),
        reflection_classes: rs.class_count,
        class_eigenvalues,
        degree_checks,
    };
    Ok((g, report))
}

type Cached = (GroupCatalogEntry, Arc<FiniteGroup>, ValidationReport);

fn cache() -> &'static Mutex<HashMap<String, Arc<OnceLock<std::result::Result<Cached, Error>>>>> {
    static C: OnceLock<Mutex<HashMap<String, Arc<OnceLock<std::result::Result<Cached, Error>>>>>> =
        OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn load_cached(id: &str) -> Result<Cached> {
    let slot = {
        let mut c = cache().lock().unwrap();
        c.entry(id.to_string()).or_default().clone()
    };
    slot.get_or_init(|| {
        let entry = catalog_entry_raw(id)?;
        let (g, report) = validate(&entry, DEFAULT_CAP)?;
        Ok((entry, Arc::new(g), report))
    })
    .clone()
}

/// Validated catalog entry. Validation runs once per process and id.
pub fn load_catalog(id: &str) -> Result<GroupCatalogEntry> {
    Ok(load_cached(id)?.0)
}

pub fn catalog_group(id: &str) -> Result<Arc<FiniteGroup>> {
    Ok(load_cached(id)?.1)
}

pub fn catalog_report(id: &str) -> Result<ValidationReport> {
    Ok(load_cached(id)?.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_roundtrip_and_product() {
        let f = make_field(12);
        let a = Mat::from_rows(
            &f,
            vec![
                vec![f.zeta(1), f.from_frac(1, 2)],
                vec![f.from_int(0), f.zeta(5)],
            ],
        )
        .unwrap();
        let b = Mat::from_rows(
            &f,
            vec![
                vec![f.zeta(3), f.from_int(2)],
                vec![f.from_frac(-3, 4), f.zeta(7)],
            ],
        )
        .unwrap();
        let p = Packer::new(&f, 2);
        let (pa, pb) = (p.pack(&a).unwrap(), p.pack(&b).unwrap());
        assert_eq!(p.unpack(&pa), a);
        assert_eq!(p.unpack(&p.mul(&pa, &pb).unwrap()), a.matmul(&b));
    }

    #[test]
    fn trivial_and_cyclic_closure() {
        let f = make_field(5);
        let id = Mat::identity(&f, 2);
        assert_eq!(closure(&[id], 10).unwrap().order(), 1);
        let d = Mat::diag(&[f.zeta(1), f.one()]);
        assert_eq!(closure(&[d.clone()], 10).unwrap().order(), 5);
        assert_eq!(closure(&[d], 3).unwrap_err(), Error::CapExceeded { cap: 3 });
    }
}
