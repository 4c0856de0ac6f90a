//! Braid-group action on tuples, trace-coordinate signatures and orbit enumeration.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::cyclo::CycloElt;
use crate::error::{Error, Result};
use crate::exactla::{Mat, MatTuple};

pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;

/// `sigma_i` (1-based): `(..., M_i M_{i+1} M_i^-1, M_i, ...)`.
pub fn braid_act(i: usize, m: &MatTuple) -> Result<MatTuple> {
    let n = m.len();
    if i == 0 || i >= n {
        return Err(Error::Invalid(format!("braid generator {i} out of range for a {n}-tuple")));
    }
    let mut mats = m.mats().to_vec();
    let a = &m.mats()[i - 1];
    let b = &m.mats()[i];
    mats[i - 1] = a.matmul(b).matmul(&a.inverse()?);
    mats[i] = a.clone();
    MatTuple::new(mats)
}

/// Trace coordinates of an SL2 tuple with 4 or 5 entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub len: usize,
    pub coords: Vec<CycloElt>,
}

impl Signature {
    /// Index sets in coordinate order, 0-based.
    pub fn index_sets(len: usize) -> Vec<Vec<usize>> {
        let t = len - 1;
        let mut out: Vec<Vec<usize>> = (0..t).map(|i| vec![i]).collect();
        for i in 0..t {
            for j in i + 1..t {
                out.push(vec![i, j]);
            }
        }
        if t == 4 {
            for i in 0..t {
                for j in i + 1..t {
                    for k in j + 1..t {
                        out.push(vec![i, j, k]);
                    }
                }
            }
        }
        out.push((0..t).collect());
        out
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", c.join(" "))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

pub fn check_sl2_tuple(m: &MatTuple) -> Result<()> {
    if m.dim() != 2 {
        return Err(Error::Dimension("SL2 tuple needs 2x2 matrices".into()));
    }
    if m.mats().iter().any(|x| !x.det().is_one()) {
        return Err(Error::Invalid("determinant is not 1".into()));
    }
    if !m.product().is_identity() {
        return Err(Error::Invalid("product is not the identity".into()));
    }
    Ok(())
}

fn trace_of(m: &MatTuple, idx: &[usize]) -> CycloElt {
    let mut p = m.mats()[idx[0]].clone();
    for &k in &idx[1..] {
        p = p.matmul(&m.mats()[k]);
    }
    p.trace()
}

/// `(t_1..t_T, t_ij, [t_ijk,] t_{T+1})` with `t_{T+1} = tr(M_1...M_T)`.
pub fn signature(m: &MatTuple) -> Result<Signature> {
    if !(4..=5).contains(&m.len()) {
        return Err(Error::Invalid(format!("signatures need 4 or 5 matrices, got {}", m.len())));
    }
    check_sl2_tuple(m)?;
    Ok(signature_unchecked(m))
}

fn signature_unchecked(m: &MatTuple) -> Signature {
    let coords = Signature::index_sets(m.len()).iter().map(|s| trace_of(m, s)).collect();
    Signature { len: m.len(), coords }
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub representatives: Vec<MatTuple>,
    pub signatures: HashMap<Signature, usize>,
    /// `(parent index, generator)` for each representative after the first.
    pub generator_log: Vec<Option<(usize, usize)>>,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.representatives.len()
    }

    pub fn contains(&self, s: &Signature) -> bool {
        self.signatures.contains_key(s)
    }
}

/// Breadth-first search over positive braid words, one representative per signature.
pub fn orbit(m: &MatTuple, cap: usize) -> Result<Orbit> {
    let s0 = signature(m)?;
    let mut orb = Orbit {
        representatives: vec![m.clone()],
        signatures: HashMap::from([(s0, 0)]),
        generator_log: vec![None],
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for i in 1..m.len() {
            let next = braid_act(i, &orb.representatives[k])?;
            let s = signature_unchecked(&next);
            if orb.signatures.contains_key(&s) {
                continue;
            }
            if orb.representatives.len() >= cap {
                return Err(Error::OrbitCapExceeded { cap, partial: orb.representatives.len() });
            }
            orb.signatures.insert(s, orb.representatives.len());
            orb.generator_log.push(Some((k, i)));
            queue.push_back(orb.representatives.len());
            orb.representatives.push(next);
        }
    }
    Ok(orb)
}

/// Orbit size, or the lower bound reached when the cap is hit.
pub fn orbit_size(m: &MatTuple, cap: usize) -> Result<OrbitSize> {
    match orbit(m, cap) {
        Ok(o) => Ok(OrbitSize::Exact(o.size())),
        Err(Error::OrbitCapExceeded { partial, .. }) => Ok(OrbitSize::AtLeast(partial)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitSize {
    Exact(usize),
    AtLeast(usize),
}

impl OrbitSize {
    pub fn value(&self) -> usize {
        match *self {
            OrbitSize::Exact(n) | OrbitSize::AtLeast(n) => n,
        }
    }
}

impl fmt::Display for OrbitSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitSize::Exact(n) => write!(f, "{n}"),
            OrbitSize::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

fn common_field(m1: &MatTuple, m2: &MatTuple) -> Result<(MatTuple, MatTuple)> {
    let f = m1.field().join(m2.field());
    Ok((m1.embed(&f)?, m2.embed(&f)?))
}

pub fn same_orbit(m1: &MatTuple, m2: &MatTuple, cap: usize) -> Result<bool> {
    if m1.len() != m2.len() {
        return Err(Error::Invalid("tuples of different length".into()));
    }
    let (m1, m2) = common_field(m1, m2)?;
    let s2 = signature(&m2)?;
    Ok(orbit(&m1, cap)?.contains(&s2))
}

/// All sign patterns with an even number of flips, the identity pattern first.
/// These are exactly the tuples reachable by changing the inducing character.
pub fn sign_variants(m: &MatTuple) -> Result<Vec<MatTuple>> {
    let n = m.len();
    let mut out = Vec::with_capacity(1 << (n - 1));
    for mask in 0u32..(1 << n) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let v = m
            .mats()
            .iter()
            .enumerate()
            .map(|(i, x)| if mask >> i & 1 == 1 { x.neg() } else { x.clone() })
            .collect();
        out.push(MatTuple::new(v)?);
    }
    Ok(out)
}

/// Whether some sign variant of `other` has its signature in `orb`.
/// `orb` and `other` must share a field.
pub fn orbit_meets_variants(orb: &Orbit, other: &MatTuple) -> Result<bool> {
    for v in sign_variants(other)? {
        if orb.contains(&signature(&v)?) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Orbit equivalence where the second tuple may be induced with any character.
pub fn equivalent_up_to_sign(m1: &MatTuple, m2: &MatTuple, cap: usize) -> Result<bool> {
    if m1.len() != m2.len() {
        return Ok(false);
    }
    let (m1, m2) = common_field(m1, m2)?;
    orbit_meets_variants(&orbit(&m1, cap)?, &m2)
}

/// One application of each equivalence move: sign change on a pair,
/// complex conjugation, cyclic shift, inverse-and-reverse.
pub fn tykhyy_variants(m: &MatTuple) -> Result<Vec<MatTuple>> {
    let mats = m.mats();
    let n = mats.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut v = mats.to_vec();
            v[i] = v[i].neg();
            v[j] = v[j].neg();
            out.push(MatTuple::new(v)?);
        }
    }
    out.push(MatTuple::new(mats.iter().map(Mat::conj).collect())?);
    for s in 1..n {
        let v: Vec<Mat> = (0..n).map(|k| mats[(k + s) % n].clone()).collect();
        out.push(MatTuple::new(v)?);
    }
    out.push(m.inverse_tuple()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::make_field;

    #[test]
    fn identity_tuple_orbit() {
        let f = make_field(1);
        let id = Mat::identity(&f, 2);
        let t = MatTuple::new(vec![id.clone(); 4]).unwrap();
        let s = signature(&t).unwrap();
        assert!(s.coords.iter().all(|c| *c == f.from_int(2)));
        assert_eq!(s.coords.len(), 7);
        assert_eq!(orbit(&t, 10).unwrap().size(), 1);
        let t5 = MatTuple::new(vec![id; 5]).unwrap();
        assert_eq!(signature(&t5).unwrap().coords.len(), 15);
    }
}
