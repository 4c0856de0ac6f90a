//! From a rank-2 convolution to an SL2 tuple: characters, subgroup recognition, trace residues.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_rational::Ratio;

use crate::cyclo::{make_field, CycloElt, RootOfUnity};
use crate::error::{Error, Result};
use crate::exactla::{Mat, MatTuple};
use crate::util::{divisors, lcm};

pub const DEFAULT_GROUP_CAP: usize = 20_000;

#[derive(Clone, Debug)]
pub struct Induced {
    pub tuple: MatTuple,
    pub character: Vec<RootOfUnity>,
}

/// The square root of `r` with residue in `[0, 1/2)`.
pub fn principal_sqrt(r: RootOfUnity) -> RootOfUnity {
    let (k, d) = r.residue();
    RootOfUnity::new(2 * d, k as i64)
}

/// Appends the inverse product and scales by a character so that every
/// determinant is 1 and the product stays the identity.
pub fn induce(mc: &MatTuple) -> Result<Induced> {
    if mc.dim() != 2 {
        return Err(Error::Dimension("induce needs 2x2 matrices".into()));
    }
    let mut chars = Vec::with_capacity(mc.len() + 1);
    for m in mc.mats() {
        let d = m.det().as_root_of_unity().ok_or(Error::NotRootOfUnity)?;
        chars.push(principal_sqrt(d.inv()));
    }
    let total = chars.iter().fold(RootOfUnity::one(), |a, b| a.mul(b));
    chars.push(total.inv());
    induce_with(mc, &chars)
}

/// Induces with a given character of length `T + 1`; fails unless every
/// scaled determinant is 1.
pub fn induce_with(mc: &MatTuple, character: &[RootOfUnity]) -> Result<Induced> {
    if character.len() != mc.len() + 1 {
        return Err(Error::Invalid(format!("character needs {} entries", mc.len() + 1)));
    }
    let order = character.iter().fold(1u64, |l, c| lcm(l, c.order() as u64));
    let f = mc.field().with_roots(order as u32);
    let mut mats: Vec<Mat> = mc.embed(&f)?.mats().to_vec();
    mats.push(MatTuple::new(mats.clone())?.product().inverse()?);
    let scaled = mats
        .iter()
        .zip(character)
        .map(|(m, a)| Ok(m.scale(&a.to_elt(&f)?)))
        .collect::<Result<Vec<_>>>()?;
    if scaled.iter().any(|m| !m.det().is_one()) {
        return Err(Error::Invalid("character does not make every determinant 1".into()));
    }
    Ok(Induced { tuple: MatTuple::new(scaled)?, character: character.to_vec() })
}

/// Characters made from `reference` by reordering its first `T` entries that induce `mc`,
/// without repeats. The last entry stays in place.
pub fn transported_characters(mc: &MatTuple, reference: &[RootOfUnity]) -> Vec<Vec<RootOfUnity>> {
    let t = mc.len();
    if reference.len() != t + 1 {
        return Vec::new();
    }
    let mut out: Vec<Vec<RootOfUnity>> = Vec::new();
    let mut perm: Vec<usize> = (0..t).collect();
    permute(&mut perm, 0, &mut |p| {
        let mut c: Vec<RootOfUnity> = p.iter().map(|&i| reference[i]).collect();
        c.push(reference[t]);
        if !out.contains(&c) && induce_with(mc, &c).is_ok() {
            out.push(c);
        }
    });
    out
}

fn permute(v: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// `theta` in `[0, 1/2]` with `t = zeta^theta + zeta^-theta`, `zeta = exp(2 pi i)`.
pub fn trace_residue(t: &CycloElt) -> Result<Ratio<i64>> {
    let (re, im) = t.to_complex();
    if im.abs() > 1e-9 || re.abs() > 2.0 + 1e-9 {
        return Err(Error::NotFiniteOrder);
    }
    let theta = (re / 2.0).clamp(-1.0, 1.0).acos() / (2.0 * std::f64::consts::PI);
    let n = t.field().conductor() as u64;
    for d in divisors(12 * n) {
        let k = (theta * d as f64).round() as i64;
        let cand = 2.0 * (2.0 * std::f64::consts::PI * k as f64 / d as f64).cos();
        if (cand - re).abs() > 1e-7 {
            continue;
        }
        let f = t.field().with_roots(d as u32);
        let z = f.root(d as u32, k)?;
        let zi = f.root(d as u32, -k)?;
        if &z + &zi == t.embed(&f)? {
            return Ok(Ratio::new(k, d as i64));
        }
    }
    Err(Error::NotFiniteOrder)
}

/// Finite order test for a 2x2 matrix with exact arithmetic.
pub fn has_finite_order(m: &Mat) -> bool {
    let Some(d) = m.det().as_root_of_unity() else { return false };
    let t = m.trace();
    let Ok(dv) = d.to_elt(m.field()) else { return false };
    let Ok(di) = dv.inv() else { return false };
    let u = &(&(&t * &t) * &di) - &m.field().from_int(2);
    match trace_residue(&u) {
        Ok(r) if *r.numer() == 0 => m.as_scalar().is_some(),
        Ok(_) => true,
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sl2Label {
    Cyclic(usize),
    Dicyclic(usize),
    Sl23,
    BinaryOctahedral,
    Sl25,
    Other(Vec<(usize, usize)>),
}

impl Sl2Label {
    /// `(order, number)` in the small-groups library, where known.
    pub fn small_group_id(&self) -> Option<(usize, usize)> {
        match self {
            Sl2Label::Cyclic(1) => Some((1, 1)),
            Sl2Label::Dicyclic(8) => Some((8, 4)),
            Sl2Label::Dicyclic(12) => Some((12, 1)),
            Sl2Label::Dicyclic(16) => Some((16, 9)),
            Sl2Label::Dicyclic(20) => Some((20, 1)),
            Sl2Label::Dicyclic(24) => Some((24, 4)),
            Sl2Label::Sl23 => Some((24, 3)),
            Sl2Label::BinaryOctahedral => Some((48, 28)),
            Sl2Label::Sl25 => Some((120, 5)),
            _ => None,
        }
    }
}

impl fmt::Display for Sl2Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sl2Label::Cyclic(n) => write!(f, "cyclic({n})"),
            Sl2Label::Dicyclic(n) => write!(f, "dicyclic({n})"),
            Sl2Label::Sl23 => write!(f, "SL(2,3)"),
            Sl2Label::BinaryOctahedral => write!(f, "binary octahedral"),
            Sl2Label::Sl25 => write!(f, "SL(2,5)"),
            Sl2Label::Other(h) => write!(f, "other{h:?}"),
        }
    }
}

/// An element of infinite order: the generator word (0-based indices) and its matrix.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub word: Vec<usize>,
    pub element: Mat,
}

#[derive(Clone, Debug)]
pub enum GroupVerdict {
    Finite { elements: Vec<Mat> },
    Infinite(Certificate),
}

impl GroupVerdict {
    /// Order, with 0 for infinite groups.
    pub fn order(&self) -> usize {
        match self {
            GroupVerdict::Finite { elements } => elements.len(),
            GroupVerdict::Infinite(_) => 0,
        }
    }
}

/// Closure of a matrix monoid, stopping at the first element of infinite order.
pub fn matrix_group(gens: &[Mat], cap: usize) -> Result<GroupVerdict> {
    let g0 = gens.first().ok_or_else(|| Error::Invalid("no generators".into()))?;
    let id = Mat::identity(g0.field(), g0.dim());
    let mut index: HashMap<Mat, usize> = HashMap::from([(id.clone(), 0)]);
    let mut elements = vec![id];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for (gi, g) in gens.iter().enumerate() {
            let y = elements[k].matmul(g);
            if index.contains_key(&y) {
                continue;
            }
            let idx = elements.len();
            parent.push(Some((k, gi)));
            if !has_finite_order(&y) {
                let mut word = Vec::new();
                let mut at = idx;
                while let Some((p, gj)) = parent[at] {
                    word.push(gj);
                    at = p;
                }
                word.reverse();
                return Ok(GroupVerdict::Infinite(Certificate { word, element: y }));
            }
            if elements.len() >= cap {
                return Err(Error::Inconclusive { cap });
            }
            index.insert(y.clone(), idx);
            elements.push(y);
            queue.push_back(idx);
        }
    }
    Ok(GroupVerdict::Finite { elements })
}

pub fn element_order(m: &Mat, limit: usize) -> Option<usize> {
    let mut p = m.clone();
    for k in 1..=limit {
        if p.is_identity() {
            return Some(k);
        }
        p = p.matmul(m);
    }
    None
}

/// Sorted `(element order, count)` pairs.
pub fn order_histogram(elements: &[Mat]) -> Vec<(usize, usize)> {
    let mut h: HashMap<usize, usize> = HashMap::new();
    for e in elements {
        let o = element_order(e, elements.len()).expect("element of a finite group");
        *h.entry(o).or_insert(0) += 1;
    }
    let mut v: Vec<_> = h.into_iter().collect();
    v.sort_unstable();
    v
}

/// Finite subgroups of SL2(C) told apart by order and element orders.
pub fn classify(elements: &[Mat]) -> Sl2Label {
    let n = elements.len();
    let h = order_histogram(elements);
    let count = |o: usize| h.iter().find(|(k, _)| *k == o).map_or(0, |(_, c)| *c);
    if count(n) > 0 || n == 1 {
        return Sl2Label::Cyclic(n);
    }
    if n % 4 == 0 && count(4) >= n / 2 {
        return Sl2Label::Dicyclic(n);
    }
    match n {
        24 if count(3) == 8 && count(6) == 8 && count(4) == 6 => Sl2Label::Sl23,
        48 if count(8) == 12 && count(4) == 18 => Sl2Label::BinaryOctahedral,
        120 if count(5) == 24 && count(10) == 24 && count(4) == 30 => Sl2Label::Sl25,
        _ => Sl2Label::Other(h),
    }
}

#[derive(Clone, Debug)]
pub enum SubgroupId {
    Finite { order: usize, label: Sl2Label },
    Infinite(Certificate),
}

impl fmt::Display for SubgroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupId::Finite { order, label } => match label.small_group_id() {
                Some((o, k)) => write!(f, "<{o},{k}> {label}"),
                None => write!(f, "{order} {label}"),
            },
            SubgroupId::Infinite(c) => write!(f, "0 (infinite order word {:?})", c.word),
        }
    }
}

pub fn subgroup_id(m: &MatTuple, cap: usize) -> Result<SubgroupId> {
    Ok(match matrix_group(m.mats(), cap)? {
        GroupVerdict::Finite { elements } => {
            SubgroupId::Finite { order: elements.len(), label: classify(&elements) }
        }
        GroupVerdict::Infinite(c) => SubgroupId::Infinite(c),
    })
}

/// Trace residues: `theta_i` for each matrix and `sigma_ij` for each pair `i < j` (1-based).
#[derive(Clone, Debug)]
pub struct Residues {
    pub theta: Vec<Result<Ratio<i64>>>,
    pub sigma: Vec<((usize, usize), Result<Ratio<i64>>)>,
}

pub fn residues(m: &MatTuple) -> Residues {
    let mats = m.mats();
    let theta = mats.iter().map(|x| trace_residue(&x.trace())).collect();
    let mut sigma = Vec::new();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            sigma.push(((i + 1, j + 1), trace_residue(&mats[i].matmul(&mats[j]).trace())));
        }
    }
    Residues { theta, sigma }
}

/// `t = 2 cos(pi theta)` scaling of a residue, reduced to `[0, 1]`.
pub fn half_angle_residue(r: Ratio<i64>) -> Ratio<i64> {
    let d = r * 2;
    let one = Ratio::from_integer(1);
    if d > one {
        Ratio::from_integer(2) - d
    } else {
        d
    }
}

/// Values `zeta^k + zeta^-k` for a small order, used as reference traces.
pub fn two_cos(d: u32, k: i64) -> CycloElt {
    let f = make_field(d);
    &f.zeta(k) + &f.zeta(-k)
}
