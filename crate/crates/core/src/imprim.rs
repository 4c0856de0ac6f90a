//! The imprimitive groups G(m,p,n): symbolic elements `[a_1..a_n | sigma]`,
//! Type 1 / Type 2 reflections, the graph invariant delta, reflection-subgroup
//! identification, explicit nice tuples and an exhaustive search oracle.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::cyclo::{make_field, RootOfUnity};
use crate::error::{Error, Result};
use crate::exactla::Mat;
use crate::refgroup::GroupCatalogEntry;

/// `[a_1, ..., a_n | sigma]`: entry `(i, sigma(i))` is `zeta_m^{a_i}`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GpnElement {
    pub m: u32,
    pub exps: Vec<u32>,
    pub perm: Vec<usize>,
}

impl GpnElement {
    pub fn identity(m: u32, n: usize) -> GpnElement {
        GpnElement { m, exps: vec![0; n], perm: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// `[a|s][b|t] = [a_i + b_{s(i)} | t o s]`.
    pub fn mul(&self, other: &GpnElement) -> GpnElement {
        let n = self.n();
        let mut exps = vec![0; n];
        let mut perm = vec![0; n];
        for i in 0..n {
            let s = self.perm[i];
            exps[i] = (self.exps[i] + other.exps[s]) % self.m;
            perm[i] = other.perm[s];
        }
        GpnElement { m: self.m, exps, perm }
    }

    pub fn inverse(&self) -> GpnElement {
        let n = self.n();
        let mut inv = vec![0; n];
        for i in 0..n {
            inv[self.perm[i]] = i;
        }
        let exps = (0..n).map(|i| (self.m - self.exps[inv[i]]) % self.m).collect();
        GpnElement { m: self.m, exps, perm: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&a| a == 0) && self.perm.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn exponent_sum(&self) -> u32 {
        self.exps.iter().sum::<u32>() % self.m
    }

    pub fn to_matrix(&self) -> Mat {
        let f = make_field(self.m);
        let n = self.n();
        let mut m = Mat::zero(&f, n);
        for i in 0..n {
            m.set(i, self.perm[i], f.zeta(self.exps[i] as i64));
        }
        m
    }

    /// Cycles of the permutation with the exponent sum along each.
    pub fn cycles(&self) -> Vec<(Vec<usize>, u32)> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut sum = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x);
                sum = (sum + self.exps[x]) % self.m;
                x = self.perm[x];
            }
            out.push((cyc, sum));
        }
        out
    }

    /// Eigenvalues with multiplicity: a cycle of length `l` and exponent sum `s`
    /// contributes the `l`-th roots of `zeta_m^s`.
    pub fn eigenvalues(&self) -> Vec<(RootOfUnity, usize)> {
        let mut count: HashMap<RootOfUnity, usize> = HashMap::new();
        for (cyc, s) in self.cycles() {
            let l = cyc.len() as u32;
            for j in 0..l {
                let r = RootOfUnity::new(self.m * l, (s + self.m * j) as i64);
                *count.entry(r).or_insert(0) += 1;
            }
        }
        let mut v: Vec<_> = count.into_iter().collect();
        v.sort();
        v
    }
}

/// Underlying permutation.
pub fn phi(g: &GpnElement) -> Vec<usize> {
    g.perm.clone()
}

impl fmt::Display for GpnElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.exps.iter().map(|x| x.to_string()).collect();
        let s: Vec<String> = self.perm.iter().map(|x| (x + 1).to_string()).collect();
        write!(f, "[{} | {}]", a.join(","), s.join(" "))
    }
}

/// `s(i,j;a)` with `i != j`, or the diagonal `s(i;a)`. Indices are 1-based as in print.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypedReflection {
    Type1 { i: usize, j: usize, a: i64 },
    Type2 { i: usize, a: i64 },
}

pub fn s1(i: usize, j: usize, a: i64) -> TypedReflection {
    TypedReflection::Type1 { i, j, a }
}

pub fn s2(i: usize, a: i64) -> TypedReflection {
    TypedReflection::Type2 { i, a }
}

impl TypedReflection {
    /// Canonical form: `i < j` and exponents in `[0, m)`.
    pub fn normalized(&self, m: u32) -> TypedReflection {
        let m = m as i64;
        match *self {
            TypedReflection::Type1 { i, j, a } if i > j => s1(j, i, (-a).rem_euclid(m)),
            TypedReflection::Type1 { i, j, a } => s1(i, j, a.rem_euclid(m)),
            TypedReflection::Type2 { i, a } => s2(i, a.rem_euclid(m)),
        }
    }

    pub fn to_element(&self, m: u32, n: usize) -> GpnElement {
        let mut g = GpnElement::identity(m, n);
        let mm = m as i64;
        match *self {
            TypedReflection::Type1 { i, j, a } => {
                g.perm.swap(i - 1, j - 1);
                g.exps[i - 1] = a.rem_euclid(mm) as u32;
                g.exps[j - 1] = (-a).rem_euclid(mm) as u32;
            }
            TypedReflection::Type2 { i, a } => {
                g.exps[i - 1] = a.rem_euclid(mm) as u32;
            }
        }
        g
    }

    pub fn to_matrix(&self, m: u32, n: usize) -> Mat {
        self.to_element(m, n).to_matrix()
    }

    pub fn is_type1(&self) -> bool {
        matches!(self, TypedReflection::Type1 { .. })
    }
}

impl fmt::Display for TypedReflection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedReflection::Type1 { i, j, a } => write!(f, "s({i},{j};{a})"),
            TypedReflection::Type2 { i, a } => write!(f, "s({i};{a})"),
        }
    }
}

impl FromStr for TypedReflection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad reflection {s:?}"));
        let inner = s.trim().strip_prefix("s(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (idx, a) = inner.split_once(';').ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let idx: Vec<usize> = idx
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match idx.as_slice() {
            [i, j] if i != j && *i > 0 && *j > 0 => Ok(s1(*i, *j, a)),
            [i] if *i > 0 => Ok(s2(*i, a)),
            _ => Err(bad()),
        }
    }
}

/// All reflections of G(m,p,n), normalized, Type 1 first.
pub fn reflections(m: u32, p: u32, n: usize) -> Vec<TypedReflection> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            for a in 0..m as i64 {
                out.push(s1(i, j, a));
            }
        }
    }
    if p < m {
        for i in 1..=n {
            for a in (p as i64..m as i64).step_by(p as usize) {
                out.push(s2(i, a));
            }
        }
    }
    out
}

pub fn group_order(m: u32, p: u32, n: usize) -> u64 {
    let fact: u64 = (1..=n as u64).product();
    (m as u64).pow(n as u32) * fact / p as u64
}

pub fn degrees(m: u32, p: u32, n: usize) -> Vec<u64> {
    let mut d: Vec<u64> = (1..n as u64).map(|k| k * m as u64).collect();
    d.push((m / p) as u64 * n as u64);
    d
}

/// Generating reflections: `s(i,i+1;0)`, plus `s(1,2;1)` when `p > 1`, plus `s(1;p)` when `p < m`.
pub fn generators(m: u32, p: u32, n: usize) -> Vec<TypedReflection> {
    let mut g: Vec<TypedReflection> = (1..n).map(|i| s1(i, i + 1, 0)).collect();
    if p > 1 && n > 1 {
        g.push(s1(1, 2, 1));
    }
    if p < m {
        g.push(s2(1, p as i64));
    }
    g
}

pub fn catalog_entry(m: u32, p: u32, n: usize) -> Result<GroupCatalogEntry> {
    if m == 0 || p == 0 || m % p != 0 || n == 0 {
        return Err(Error::Invalid(format!("G({m},{p},{n}) needs p | m and n >= 1")));
    }
    Ok(GroupCatalogEntry {
        id: format!("G({m},{p},{n})"),
        rank: n,
        order: group_order(m, p, n),
        degrees: degrees(m, p, n),
        generators: generators(m, p, n).iter().map(|r| r.to_matrix(m, n)).collect(),
        base_field: make_field(m),
        reflection_classes: None,
    })
}

/// `|sum b_h|` around the unique cycle of the Type 1 graph, exponents taken in `[0, m)`.
/// `None` unless the graph is connected with exactly one cycle.
pub fn delta(x: &[TypedReflection], m: u32) -> Option<u64> {
    let edges: Vec<(usize, usize, i64)> = x
        .iter()
        .filter_map(|r| match r.normalized(m) {
            TypedReflection::Type1 { i, j, a } => Some((i, j, a)),
            _ => None,
        })
        .collect();
    let mut nodes: Vec<usize> = edges.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.is_empty() || !connected(&nodes, &edges) || edges.len() != nodes.len() {
        return None;
    }
    // Strip leaves; what remains is the cycle.
    let mut alive = vec![true; edges.len()];
    loop {
        let mut deg: HashMap<usize, usize> = HashMap::new();
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            if alive[k] {
                *deg.entry(i).or_insert(0) += 1;
                *deg.entry(j).or_insert(0) += 1;
            }
        }
        let mut changed = false;
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            if alive[k] && (deg[&i] == 1 || deg[&j] == 1) {
                alive[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let cyc: Vec<(usize, usize, i64)> =
        edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(e, _)| *e).collect();
    let start = cyc[0].0;
    let mut used = vec![false; cyc.len()];
    let mut at = start;
    let mut sum = 0i64;
    loop {
        let k = (0..cyc.len()).find(|&k| !used[k] && (cyc[k].0 == at || cyc[k].1 == at))?;
        used[k] = true;
        let (i, j, b) = cyc[k];
        if i == at {
            sum += b;
            at = j;
        } else {
            sum -= b;
            at = i;
        }
        if at == start {
            break;
        }
    }
    Some(sum.unsigned_abs())
}

fn connected(nodes: &[usize], edges: &[(usize, usize, i64)]) -> bool {
    let mut reached = vec![nodes[0]];
    let mut k = 0;
    while k < reached.len() {
        let v = reached[k];
        k += 1;
        for &(i, j, _) in edges {
            for (a, b) in [(i, j), (j, i)] {
                if a == v && !reached.contains(&b) {
                    reached.push(b);
                }
            }
        }
    }
    reached.len() == nodes.len()
}

/// Parameters `(m', p', n')` of a group G(m',p',n') (up to conjugacy).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GpnId {
    pub m: u32,
    pub p: u32,
    pub n: usize,
}

impl fmt::Display for GpnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({},{},{})", self.m, self.p, self.n)
    }
}

/// Identify the reflection subgroup generated by `x` inside G(m,p,n).
pub fn identify_subgroup(x: &[TypedReflection], m: u32, p: u32, n: usize) -> Result<GpnId> {
    let _ = p;
    let unsupported = |why: &str| Err(Error::Unsupported(format!("reflection set: {why}")));
    let xs: Vec<TypedReflection> = x.iter().map(|r| r.normalized(m)).collect();
    let type2: Vec<(usize, i64)> = xs
        .iter()
        .filter_map(|r| match *r {
            TypedReflection::Type2 { i, a } => Some((i, a)),
            _ => None,
        })
        .collect();
    let edges: Vec<(usize, usize, i64)> = xs
        .iter()
        .filter_map(|r| match *r {
            TypedReflection::Type1 { i, j, a } => Some((i, j, a)),
            _ => None,
        })
        .collect();
    let mut nodes: Vec<usize> = edges.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    nodes.extend(type2.iter().map(|&(i, _)| i));
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.is_empty() || nodes.iter().any(|&v| v > n) {
        return unsupported("empty or out of range");
    }
    if !connected(&nodes, &edges) {
        return unsupported("graph is not connected");
    }
    let n1 = nodes.len();
    let cycles = edges.len() + 1 - n1;
    match (type2.len(), cycles) {
        (0, 1) => {
            let d = delta(&xs, m).expect("one cycle");
            let g = (d as u32).gcd(&m);
            Ok(GpnId { m: m / g, p: m / g, n: n1 })
        }
        (1, 1) => {
            let b = type2[0].1 as u32;
            let d = delta(&xs, m).expect("one cycle") as u32;
            let m1 = b.gcd(&m).gcd(&d);
            Ok(GpnId { m: m / m1, p: b.gcd(&m) / m1, n: n1 })
        }
        (1, 0) => {
            let b = type2[0].1 as u32;
            Ok(GpnId { m: m / b.gcd(&m), p: 1, n: n1 })
        }
        (0, 0) => unsupported("tree without a Type 2 reflection"),
        (k, _) if k > 1 => unsupported("more than one Type 2 reflection"),
        _ => unsupported("more than one cycle"),
    }
}

/// Product of a tuple of reflections as a group element.
pub fn tuple_product(t: &[TypedReflection], m: u32, n: usize) -> GpnElement {
    t.iter().fold(GpnElement::identity(m, n), |acc, r| acc.mul(&r.to_element(m, n)))
}

/// Nontrivial eigenvalues of `g` with multiplicity exactly `k`.
pub fn eigenvalues_of_multiplicity(g: &GpnElement, k: usize) -> Vec<RootOfUnity> {
    g.eigenvalues().into_iter().filter(|(r, c)| !r.is_one() && *c == k).map(|(r, _)| r).collect()
}

/// The explicit witness for a nice `T`-tuple in G(m,p,n) together with the
/// convolution parameter (inverse of the product eigenvalue of multiplicity `T-2`).
pub fn construct_nice(m: u32, p: u32, n: usize, t: usize) -> Result<Option<(Vec<TypedReflection>, RootOfUnity)>> {
    if m < 2 || p == 0 || m % p != 0 {
        return Err(Error::Invalid(format!("G({m},{p},{n}) needs m > 1 and p | m")));
    }
    let tuple = match (n, t) {
        (3, 3) if p == 1 => Some(vec![s1(2, 3, 1), s1(1, 2, 1), s2(3, 1)]),
        (3, 3) if p == m => Some(vec![s1(2, 3, 1), s1(1, 2, 1), s1(1, 2, 0)]),
        (3, 3) => None,
        (3, 4) if p == m => (m != 3).then(|| vec![s1(1, 2, 1), s1(1, 2, 0), s1(2, 3, 2), s1(2, 3, 0)]),
        (3, 4) if p == 1 => {
            (m.gcd(&3) == 1).then(|| vec![s1(1, 2, 0), s1(2, 3, 1), s1(2, 3, -1), s2(3, 3)])
        }
        (3, 4) => (p == 3).then(|| vec![s1(1, 2, 0), s1(2, 3, 1), s1(2, 3, -1), s2(3, 3)]),
        (4, 4) if p == m && m == 4 => Some(vec![s1(1, 4, -1), s1(1, 4, 0), s1(1, 2, -1), s1(2, 3, 0)]),
        (4, 4) if p == m && m == 2 => Some(vec![s1(1, 4, 1), s1(1, 4, 0), s1(1, 2, 0), s1(2, 3, 0)]),
        (4, 4) => None,
        (4, 5) if p == m && m == 4 => {
            Some(vec![s1(1, 2, 1), s1(1, 3, 0), s1(1, 2, 0), s1(2, 3, 1), s1(2, 4, 1)])
        }
        (4, 5) if p == m && m == 2 => {
            Some(vec![s1(1, 2, 1), s1(1, 3, 0), s1(1, 2, 0), s1(2, 3, 1), s1(2, 4, 0)])
        }
        (4, 5) => None,
        (n, t) if n >= 5 && (t == n || t == n + 1) => None,
        _ => return Err(Error::Unsupported(format!("(n, T) = ({n}, {t})"))),
    };
    Ok(tuple.map(|tu| {
        let prod = tuple_product(&tu, m, n);
        let mu = eigenvalues_of_multiplicity(&prod, t - 2)
            .into_iter()
            .min_by_key(|r| r.residue_ratio())
            .expect("witness product has an eigenvalue of multiplicity T-2");
        (tu.iter().map(|r| r.normalized(m)).collect(), mu.inv())
    }))
}

/// Compact encoding of elements of G(m,1,n) as integers, for bitset closures.
struct Codec {
    m: u32,
    n: usize,
    fact: Vec<usize>,
}

impl Codec {
    fn new(m: u32, n: usize) -> Codec {
        let mut fact = vec![1usize; n + 1];
        for k in 1..=n {
            fact[k] = fact[k - 1] * k;
        }
        Codec { m, n, fact }
    }

    fn size(&self) -> usize {
        (self.m as usize).pow(self.n as u32) * self.fact[self.n]
    }

    fn encode(&self, g: &GpnElement) -> usize {
        // Lehmer code of the permutation, then the exponents in base m.
        let mut rank = 0;
        for i in 0..self.n {
            let smaller = (i + 1..self.n).filter(|&j| g.perm[j] < g.perm[i]).count();
            rank += smaller * self.fact[self.n - 1 - i];
        }
        let mut e = 0usize;
        for &a in g.exps.iter().rev() {
            e = e * self.m as usize + a as usize;
        }
        rank * (self.m as usize).pow(self.n as u32) + e
    }
}

fn closure_reaches(gens: &[GpnElement], target: u64, codec: &Codec) -> bool {
    let n = codec.n;
    let mut seen = vec![false; codec.size()];
    let id = GpnElement::identity(codec.m, n);
    seen[codec.encode(&id)] = true;
    let mut count = 1u64;
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = x.mul(g);
            let c = codec.encode(&y);
            if !seen[c] {
                seen[c] = true;
                count += 1;
                if 2 * count > target {
                    return true;
                }
                stack.push(y);
            }
        }
    }
    count == target
}

/// Order of the subgroup of G(m,1,n) generated by `gens`.
pub fn subgroup_order(gens: &[TypedReflection], m: u32, n: usize) -> u64 {
    let codec = Codec::new(m, n);
    let els: Vec<GpnElement> = gens.iter().map(|r| r.to_element(m, n)).collect();
    let mut seen = vec![false; codec.size()];
    let id = GpnElement::identity(m, n);
    seen[codec.encode(&id)] = true;
    let mut count = 1;
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in &els {
            let y = x.mul(g);
            let c = codec.encode(&y);
            if !seen[c] {
                seen[c] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count
}

/// Exhaustive search for nice `T`-tuples: ordered tuples of reflections that
/// generate G(m,p,n) and whose product has a nontrivial eigenvalue of multiplicity
/// exactly `T-2`. The first entry ranges over representatives of the reflection
/// classes under conjugation by G(m,1,n), which preserves every condition.
pub fn brute_nice_search(m: u32, p: u32, n: usize, t: usize, cap: u64) -> Result<Vec<Vec<TypedReflection>>> {
    if m < 1 || p == 0 || m % p != 0 || n < 2 || t < 3 {
        return Err(Error::Invalid(format!("brute search for G({m},{p},{n}) with T = {t}")));
    }
    let order = group_order(m, p, n);
    if group_order(m, 1, n) > cap {
        return Err(Error::CapExceeded { cap: cap as usize });
    }
    let refl = reflections(m, p, n);
    let els: Vec<GpnElement> = refl.iter().map(|r| r.to_element(m, n)).collect();
    let first: Vec<usize> = (0..refl.len())
        .filter(|&k| match refl[k] {
            TypedReflection::Type1 { i, j, a } => i == 1 && j == 2 && a == 0,
            TypedReflection::Type2 { i, .. } => i == 1,
        })
        .collect();
    let codec = Codec::new(m, n);
    let lcm_len: u32 = (1..=n as u32).fold(1, |a, b| a.lcm(&b));
    let big = m * lcm_len;
    let mut memo: HashMap<u128, bool> = HashMap::new();
    let mut out = Vec::new();
    let mut idx = vec![0usize; t];
    let mut prefix = vec![GpnElement::identity(m, n); t + 1];
    let mut counts = vec![0u32; big as usize];
    for &f in &first {
        idx[0] = f;
        prefix[1] = els[f].clone();
        search_rec(
            1, t, &els, &mut idx, &mut prefix, &mut |idx: &[usize], prod: &GpnElement| {
                if !has_mult_eigen(prod, t - 2, big, lcm_len, &mut counts) {
                    return;
                }
                let mut mask = 0u128;
                for &k in idx {
                    mask |= 1u128 << (k % 128);
                }
                let generates = if refl.len() <= 128 {
                    *memo.entry(mask).or_insert_with(|| {
                        let gens: Vec<GpnElement> = dedup_idx(idx).iter().map(|&k| els[k].clone()).collect();
                        closure_reaches(&gens, order, &codec)
                    })
                } else {
                    let gens: Vec<GpnElement> = dedup_idx(idx).iter().map(|&k| els[k].clone()).collect();
                    closure_reaches(&gens, order, &codec)
                };
                if generates {
                    out.push(idx.iter().map(|&k| refl[k]).collect());
                }
            },
        );
    }
    Ok(out)
}

fn dedup_idx(idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn search_rec(
    depth: usize,
    t: usize,
    els: &[GpnElement],
    idx: &mut Vec<usize>,
    prefix: &mut Vec<GpnElement>,
    leaf: &mut dyn FnMut(&[usize], &GpnElement),
) {
    if depth == t {
        let prod = prefix[t].clone();
        leaf(idx, &prod);
        return;
    }
    for k in 0..els.len() {
        idx[depth] = k;
        prefix[depth + 1] = prefix[depth].mul(&els[k]);
        search_rec(depth + 1, t, els, idx, prefix, leaf);
    }
}

// Eigenvalues as residues modulo `big = m * lcm(1..n)`.
fn has_mult_eigen(g: &GpnElement, k: usize, big: u32, lcm_len: u32, counts: &mut [u32]) -> bool {
    let m = g.m;
    let mut touched = Vec::with_capacity(g.n());
    for (cyc, s) in g.cycles() {
        let l = cyc.len() as u32;
        let step = lcm_len / l;
        for j in 0..l {
            let r = (((s + m * j) * step) % big) as usize;
            counts[r] += 1;
            touched.push(r);
        }
    }
    let hit = touched.iter().any(|&r| r != 0 && counts[r] as usize == k);
    for r in touched {
        counts[r] = 0;
    }
    hit
}
