//! Nice-tuple search, type partition, per-eigenvalue convolution rows and a file store.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use crate::braid::{orbit, orbit_meets_variants, signature, Orbit, OrbitSize};
use crate::cyclo::{CycloElt, RootOfUnity};
use crate::error::{Error, Result};
use crate::exactla::{Mat, MatTuple};
use crate::midconv::middle_convolution;
use crate::refgroup::{catalog_group, load_catalog, FiniteGroup};
use crate::sl2::{induce, induce_with, matrix_group, subgroup_id, GroupVerdict, Induced, SubgroupId};

pub const DEFAULT_SEARCH_CAP: usize = 10_000_000;
pub const STEP9_MEMBER_LIMIT: usize = 500;

#[derive(Clone, Debug)]
pub struct Witness {
    pub generates: bool,
    /// Eigenvalues of the inverse product with multiplicities, sorted.
    pub inverse_eigen: Vec<(RootOfUnity, usize)>,
}

/// A nice tuple, kept as indices into the group's reflection list.
#[derive(Clone, Debug)]
pub struct NiceTuple {
    pub group: String,
    pub reflections: Vec<usize>,
    pub witness: Witness,
}

impl NiceTuple {
    pub fn matrices(&self, g: &FiniteGroup) -> Result<MatTuple> {
        let mats = self.reflections.iter().map(|&r| g.reflections().members[r].mat.clone()).collect();
        MatTuple::new(mats)
    }

    /// Nontrivial inverse-product eigenvalues of multiplicity `T - 2`.
    pub fn admissible_lambdas(&self) -> Vec<RootOfUnity> {
        admissible(&self.witness.inverse_eigen, self.reflections.len())
    }
}

fn admissible(eig: &[(RootOfUnity, usize)], t: usize) -> Vec<RootOfUnity> {
    let mut v: Vec<RootOfUnity> =
        eig.iter().filter(|(r, c)| !r.is_one() && *c == t - 2).map(|(r, _)| *r).collect();
    v.sort_by_key(|r| r.residue_ratio());
    v
}

fn sort_eigen(mut v: Vec<(RootOfUnity, usize)>) -> Vec<(RootOfUnity, usize)> {
    v.sort_by_key(|(r, c)| (r.residue_ratio(), *c));
    v
}

fn inverse_key(k: &[(RootOfUnity, usize)]) -> Vec<(RootOfUnity, usize)> {
    sort_eigen(k.iter().map(|(r, c)| (r.inv(), *c)).collect())
}

pub fn format_key(k: &[(RootOfUnity, usize)]) -> String {
    let parts: Vec<String> = k
        .iter()
        .flat_map(|(r, c)| std::iter::repeat(fmt_residue(r.residue_ratio())).take(*c))
        .collect();
    format!("{{{}}}", parts.join(","))
}

fn fmt_residue(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn check_rank(g: &FiniteGroup, t: usize) -> Result<()> {
    let n = g.dim();
    if t != n && t != n + 1 {
        return Err(Error::Invalid(format!("T must be {n} or {} for a rank-{n} group", n + 1)));
    }
    Ok(())
}

/// Eigenvalue exponents (out of the group's eigen order) allowed for the
/// multiplicity `T - 2` eigenvalue: orders dividing at least `T - 2` degrees.
fn allowed_exponents(id: &str, g: &FiniteGroup, t: usize) -> Result<Vec<bool>> {
    let degrees = load_catalog(id)?.degrees;
    let m = g.eigen_order();
    Ok((0..m)
        .map(|k| {
            let d = m / num_integer::gcd(k, m);
            k != 0 && degrees.iter().filter(|&&e| e % d == 0).count() >= t - 2
        })
        .collect())
}

/// Ordered nice `T`-tuples whose first entry is a class representative.
///
/// Fails with `CapExceeded` when the number of ordered tuples to scan exceeds `cap`.
pub fn search_nice(id: &str, t: usize, cap: usize) -> Result<Vec<NiceTuple>> {
    let g = catalog_group(id)?;
    check_rank(&g, t)?;
    let r = g.reflections().len();
    let reps = g.reflections().representatives();
    let total = (reps.len() as u128) * (r as u128).pow(t as u32 - 1);
    if total > cap as u128 {
        return Err(Error::CapExceeded { cap });
    }
    let allowed = allowed_exponents(id, &g, t)?;
    let tables = g.reflection_tables();
    let mut out = Vec::new();
    let mut idx = vec![0usize; t];
    let mut prefix = vec![0u32; t];
    for &q in &reps {
        idx[0] = q;
        prefix[0] = g.reflections().members[q].element as u32;
        dfs(&g, id, t, 1, &mut idx, &mut prefix, tables, &allowed, &mut out);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &FiniteGroup,
    id: &str,
    t: usize,
    depth: usize,
    idx: &mut [usize],
    prefix: &mut [u32],
    tables: &[Vec<u32>],
    allowed: &[bool],
    out: &mut Vec<NiceTuple>,
) {
    if depth == t {
        let p = prefix[t - 1] as usize;
        let hit = g.eigen_raw(p).iter().any(|&(k, c)| c as usize == t - 2 && allowed[k as usize]);
        if hit && g.generates_reflections(idx) {
            let inv = g.inverse_idx(p);
            out.push(NiceTuple {
                group: id.to_string(),
                reflections: idx.to_vec(),
                witness: Witness { generates: true, inverse_eigen: sort_eigen(g.eigen(inv)) },
            });
        }
        return;
    }
    for (s, table) in tables.iter().enumerate() {
        idx[depth] = s;
        prefix[depth] = table[prefix[depth - 1] as usize];
        dfs(g, id, t, depth + 1, idx, prefix, tables, allowed, out);
    }
}

/// Re-checks the three defining conditions with exact arithmetic, independently of the search.
pub fn verify_nice(id: &str, tuple: &MatTuple) -> Result<Witness> {
    let g = catalog_group(id)?;
    let t = tuple.len();
    check_rank(&g, t)?;
    let f = g.field().clone();
    let tuple = tuple.embed(&f.join(tuple.field()))?;
    for m in tuple.mats() {
        if m.minus_identity().rank() != 1 || g.index_of(&m.embed(&f).unwrap_or_else(|_| m.clone())).is_none() {
            return Err(Error::Invalid("entry is not a reflection of the group".into()));
        }
    }
    let entry = load_catalog(id)?;
    let generates = crate::refgroup::generates(tuple.mats(), &entry, usize::MAX)?;
    let cands: Vec<RootOfUnity> =
        (0..g.eigen_order()).map(|k| RootOfUnity::new(g.eigen_order() as u32, k as i64)).collect();
    let inv = tuple.product().inverse()?;
    let inverse_eigen = sort_eigen(inv.eig_multiplicity(&cands));
    let w = Witness { generates, inverse_eigen };
    if !w.generates {
        return Err(Error::Invalid("tuple does not generate the group".into()));
    }
    if admissible(&w.inverse_eigen, t).is_empty() {
        return Err(Error::Invalid(format!("no eigenvalue other than 1 of multiplicity {}", t - 2)));
    }
    Ok(w)
}

#[derive(Clone, Debug)]
pub struct TupleType {
    pub label: String,
    pub key: Vec<(RootOfUnity, usize)>,
    pub exemplar: NiceTuple,
    pub members: Vec<Vec<usize>>,
    /// Index of the type with the inverse multiset (itself when self-inverse).
    pub inverse_partner: Option<usize>,
}

impl TupleType {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn is_representative(&self, me: usize) -> bool {
        self.inverse_partner.is_none_or(|p| p >= me)
    }
}

/// Types ordered so that each inverse pair is adjacent, the representative first.
/// Representatives are labelled `A, B, ...`, their partners `A', B', ...`.
pub fn partition_types(tuples: &[NiceTuple]) -> Vec<TupleType> {
    let mut groups: BTreeMap<Vec<(Ratio<i64>, usize)>, Vec<&NiceTuple>> = BTreeMap::new();
    for t in tuples {
        let k = t.witness.inverse_eigen.iter().map(|(r, c)| (r.residue_ratio(), *c)).collect();
        groups.entry(k).or_default().push(t);
    }
    let mut keyed: Vec<(Vec<(RootOfUnity, usize)>, Vec<&NiceTuple>)> =
        groups.into_values().map(|v| (v[0].witness.inverse_eigen.clone(), v)).collect();
    keyed.sort_by_key(|(k, _)| k.iter().map(|(r, c)| (r.residue_ratio(), *c)).collect::<Vec<_>>());
    let pos: HashMap<Vec<(RootOfUnity, usize)>, usize> =
        keyed.iter().enumerate().map(|(i, (k, _))| (k.clone(), i)).collect();

    let mut done = vec![false; keyed.len()];
    let mut order = Vec::new();
    for i in 0..keyed.len() {
        if done[i] {
            continue;
        }
        done[i] = true;
        let partner = pos.get(&inverse_key(&keyed[i].0)).copied();
        order.push((i, partner));
        if let Some(p) = partner.filter(|&p| p != i) {
            done[p] = true;
            order.push((p, Some(i)));
        }
    }
    let new_pos: HashMap<usize, usize> = order.iter().enumerate().map(|(n, &(i, _))| (i, n)).collect();
    let mut letter = 0u8;
    let mut out = Vec::with_capacity(order.len());
    for &(i, partner) in &order {
        let (key, members) = &keyed[i];
        let mut members: Vec<&NiceTuple> = members.clone();
        members.sort_by(|a, b| a.reflections.cmp(&b.reflections));
        let partner = partner.map(|p| new_pos[&p]);
        let me = out.len();
        let label = if partner.is_none_or(|p| p >= me) {
            letter += 1;
            type_letter(letter - 1)
        } else {
            format!("{}'", out.get(partner.unwrap()).map_or(String::new(), |t: &TupleType| t.label.clone()))
        };
        out.push(TupleType {
            label,
            key: key.clone(),
            exemplar: members[0].clone(),
            members: members.iter().map(|m| m.reflections.clone()).collect(),
            inverse_partner: partner,
        });
    }
    out
}

fn type_letter(i: u8) -> String {
    if i < 26 {
        ((b'A' + i) as char).to_string()
    } else {
        format!("T{}", i + 1)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub search_cap: usize,
    pub orbit_cap: usize,
    pub group_cap: usize,
    /// Emit rows for both members of each inverse pair.
    pub all_types: bool,
    /// Run the step-9 checks on types with at most this many members (0 disables).
    pub step9_limit: usize,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            search_cap: DEFAULT_SEARCH_CAP,
            orbit_cap: crate::braid::DEFAULT_ORBIT_CAP,
            group_cap: crate::sl2::DEFAULT_GROUP_CAP,
            all_types: false,
            step9_limit: 0,
            out: None,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Summary of the SL2 group generated by the induced tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Summary {
    /// 0 for infinite groups.
    pub order: usize,
    pub small_id: Option<(usize, usize)>,
    pub text: String,
}

impl Sl2Summary {
    fn from_id(s: &SubgroupId) -> Sl2Summary {
        match s {
            SubgroupId::Finite { order, label } => {
                Sl2Summary { order: *order, small_id: label.small_group_id(), text: s.to_string() }
            }
            SubgroupId::Infinite(_) => Sl2Summary { order: 0, small_id: None, text: s.to_string() },
        }
    }

    pub fn short(&self) -> String {
        match (self.order, self.small_id) {
            (0, _) => "0".into(),
            (_, Some((o, k))) => format!("<{o},{k}>"),
            (o, None) => o.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Step9 {
    pub members_checked: usize,
    pub members_in_orbit: usize,
    /// Inverse-pair consistency, when the partner type exists.
    pub inverse_consistent: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub group: String,
    pub t: usize,
    pub type_label: String,
    pub type_key: String,
    pub members: usize,
    pub xi: Ratio<i64>,
    pub lambda: RootOfUnity,
    pub input: MatTuple,
    pub output: MatTuple,
    pub character: Vec<RootOfUnity>,
    pub induced: MatTuple,
    pub orbit: Option<OrbitSize>,
    /// Size of the GL2 group generated by the convolution, 0 when infinite.
    pub s_size: Option<usize>,
    pub sl2: Option<Sl2Summary>,
    /// Position of a scalar `±I` entry of the induced tuple.
    pub identity_entry: Option<usize>,
    pub reduced_orbit: Option<OrbitSize>,
    pub step9: Option<Step9>,
    pub notes: Vec<String>,
}

impl ReportRow {
    pub fn reduces(&self) -> bool {
        self.identity_entry.is_some()
    }

    pub fn signature_hash(&self) -> String {
        let s = signature(&self.induced).map(|s| s.to_string()).unwrap_or_else(|_| self.induced.to_string());
        hash_hex(&s)
    }
}

fn hash_hex(s: &str) -> String {
    let d = Sha256::digest(s.as_bytes());
    d.iter().take(12).fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

/// Drops a `±I` entry after moving its sign onto a neighbour.
pub fn reduce_identity(m: &MatTuple) -> Option<(usize, MatTuple)> {
    let mats = m.mats();
    let n = mats.len();
    let i = mats.iter().position(|x| x.as_scalar().is_some_and(|c| c.is_one() || (-&c).is_one()))?;
    let mut v = mats.to_vec();
    if !v[i].is_identity() {
        let j = (i + 1) % n;
        v[j] = v[j].neg();
    }
    v.remove(i);
    MatTuple::new(v).ok().map(|t| (i, t))
}

struct Job<'a> {
    ty: &'a TupleType,
    partner: Option<&'a TupleType>,
    lambda: RootOfUnity,
}

/// Convolution, inducing, orbit and subgroup for every representative type and admissible eigenvalue.
pub fn run_group(id: &str, t: usize, opts: &RunOptions) -> Result<Vec<ReportRow>> {
    let tuples = search_nice(id, t, opts.search_cap)?;
    let types = partition_types(&tuples);
    run_types(id, t, &types, opts)
}

pub fn run_types(id: &str, t: usize, types: &[TupleType], opts: &RunOptions) -> Result<Vec<ReportRow>> {
    let g = catalog_group(id)?;
    let store = opts.out.as_ref().map(|d| Store::open(d, id, t)).transpose()?;
    let mut jobs = Vec::new();
    for (i, ty) in types.iter().enumerate() {
        if !opts.all_types && !ty.is_representative(i) {
            continue;
        }
        let partner = ty.inverse_partner.map(|p| &types[p]);
        for lambda in ty.exemplar.admissible_lambdas() {
            jobs.push(Job { ty, partner, lambda });
        }
    }
    let mut slots: Vec<Option<Result<ReportRow>>> = (0..jobs.len()).map(|_| None).collect();
    let threads = opts.threads.max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..threads.min(jobs.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(job) = jobs.get(k) else { break };
                let cached = store.as_ref().and_then(|st| st.lookup(&job.ty.label, job.lambda));
                let row = match cached {
                    Some(r) => Ok(r),
                    None => compute_row(&g, id, t, job, opts),
                };
                results.lock().unwrap()[k] = Some(row);
            });
        }
    });
    let mut rows = Vec::with_capacity(slots.len());
    for r in slots.into_iter().flatten() {
        let row = r?;
        if let Some(st) = &store {
            st.append(&row)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn compute_row(g: &FiniteGroup, id: &str, t: usize, job: &Job, opts: &RunOptions) -> Result<ReportRow> {
    let ty = job.ty;
    let input = ty.exemplar.matrices(g)?;
    let lam_elt = job.lambda.to_elt(&input.field().with_roots(job.lambda.order()))?;
    let output = middle_convolution(&input, &lam_elt)?;
    if output.dim() != 2 {
        return Err(Error::Convolution(format!("{id} type {}: rank {} output", ty.label, output.dim())));
    }
    let mut notes = Vec::new();
    let s_size = match matrix_group(output.mats(), opts.group_cap) {
        Ok(v) => Some(v.order()),
        Err(e) => {
            notes.push(format!("S. Size: {e}"));
            None
        }
    };
    let ind = induce(&output)?;
    let mut row = ReportRow {
        group: id.to_string(),
        t,
        type_label: ty.label.clone(),
        type_key: format_key(&ty.key),
        members: ty.members.len(),
        xi: job.lambda.residue_ratio(),
        lambda: job.lambda,
        input,
        output,
        character: Vec::new(),
        induced: ind.tuple.clone(),
        orbit: None,
        s_size,
        sl2: None,
        identity_entry: None,
        reduced_orbit: None,
        step9: None,
        notes,
    };
    let orb = fill_induced(&mut row, ind, opts);
    if let Some(o) = &orb {
        if opts.step9_limit > 0 && ty.members.len() <= opts.step9_limit {
            row.step9 = Some(step9(g, ty, job.partner, job.lambda, &row.induced, o, opts.orbit_cap)?);
        }
    }
    Ok(row)
}

/// Sets every field that depends on the inducing character.
fn fill_induced(row: &mut ReportRow, ind: Induced, opts: &RunOptions) -> Option<Orbit> {
    row.character = ind.character;
    row.induced = ind.tuple;
    row.sl2 = match subgroup_id(&row.induced, opts.group_cap) {
        Ok(s) => Some(Sl2Summary::from_id(&s)),
        Err(e) => {
            row.notes.push(format!("SL2: {e}"));
            None
        }
    };
    let orb = match orbit(&row.induced, opts.orbit_cap) {
        Ok(o) => {
            row.orbit = Some(OrbitSize::Exact(o.size()));
            Some(o)
        }
        Err(Error::OrbitCapExceeded { partial, .. }) => {
            row.orbit = Some(OrbitSize::AtLeast(partial));
            None
        }
        Err(e) => {
            row.notes.push(format!("orbit: {e}"));
            row.orbit = None;
            None
        }
    };
    (row.identity_entry, row.reduced_orbit) = match reduce_identity(&row.induced) {
        Some((i, red)) if red.len() >= 4 => (Some(i), crate::braid::orbit_size(&red, opts.orbit_cap).ok()),
        Some((i, _)) => (Some(i), None),
        None => (None, None),
    };
    orb
}

/// The same row induced with another character; step-9 results are dropped.
pub fn reinduce(row: &ReportRow, character: &[RootOfUnity], opts: &RunOptions) -> Result<ReportRow> {
    let ind = induce_with(&row.output, character)?;
    let mut out = row.clone();
    out.step9 = None;
    out.notes.retain(|n| !n.starts_with("SL2:") && !n.starts_with("orbit:"));
    fill_induced(&mut out, ind, opts);
    Ok(out)
}

/// Induced `MC_lambda` of an arbitrary tuple.
pub fn induced_convolution(a: &MatTuple, lambda: RootOfUnity) -> Result<MatTuple> {
    let l = lambda.to_elt(&a.field().with_roots(lambda.order()))?;
    Ok(induce(&middle_convolution(a, &l)?)?.tuple)
}

fn in_orbit(orb: &Orbit, field_of: &MatTuple, m: &MatTuple) -> Result<bool> {
    let f = field_of.field();
    if f.contains_field(m.field()) {
        orbit_meets_variants(orb, &m.embed(f)?)
    } else {
        let j = f.join(m.field());
        let o = orbit(&field_of.embed(&j)?, orb.size() + 1)?;
        orbit_meets_variants(&o, &m.embed(&j)?)
    }
}

/// Other members of the type land in the exemplar's orbit; the induced inverse
/// tuple lands in the orbit of the partner exemplar at the inverse eigenvalue.
fn step9(
    g: &FiniteGroup,
    ty: &TupleType,
    partner: Option<&TupleType>,
    lambda: RootOfUnity,
    induced: &MatTuple,
    orb: &Orbit,
    cap: usize,
) -> Result<Step9> {
    let mut res = Step9::default();
    for m in &ty.members {
        let nt = NiceTuple { group: ty.exemplar.group.clone(), reflections: m.clone(), witness: ty.exemplar.witness.clone() };
        let ind = induced_convolution(&nt.matrices(g)?, lambda)?;
        res.members_checked += 1;
        if in_orbit(orb, induced, &ind)? {
            res.members_in_orbit += 1;
        }
    }
    if let Some(p) = partner {
        let pm = p.exemplar.matrices(g)?;
        let pi = induced_convolution(&pm, lambda.inv())?;
        let inv = induced.inverse_tuple()?;
        let po = orbit(&pi, cap)?;
        res.inverse_consistent = Some(in_orbit(&po, &pi, &inv)?);
    }
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// Same braid orbit of the induced tuples.
    Strict,
    /// Same braid orbit after some change of the inducing character.
    UpToSign,
}

/// Number of classes of rows under the given orbit equivalence.
pub fn distinct_orbits(rows: &[ReportRow], cap: usize, eq: Equivalence) -> Result<usize> {
    let n = rows.len();
    let mut rep: Vec<usize> = (0..n).collect();
    for i in 0..n {
        if rep[i] != i {
            continue;
        }
        let mut orb: Option<Orbit> = None;
        for j in i + 1..n {
            if rep[j] != j || rows[i].induced.len() != rows[j].induced.len() || rows[i].orbit != rows[j].orbit {
                continue;
            }
            if !matches!(rows[i].orbit, Some(OrbitSize::Exact(_))) {
                continue;
            }
            let o = match &orb {
                Some(o) => o,
                None => orb.insert(orbit(&rows[i].induced, cap)?),
            };
            let hit = match eq {
                Equivalence::UpToSign => in_orbit(o, &rows[i].induced, &rows[j].induced)?,
                Equivalence::Strict => {
                    let (a, b) = (&rows[i].induced, &rows[j].induced);
                    if a.field().contains_field(b.field()) {
                        o.contains(&signature(&b.embed(a.field())?)?)
                    } else {
                        crate::braid::same_orbit(a, b, cap)?
                    }
                }
            };
            if hit {
                rep[j] = i;
            }
        }
    }
    Ok((0..n).filter(|&i| rep[i] == i).count())
}

pub fn pretty_elt(e: &CycloElt) -> String {
    let e = e.descend_minimal();
    let n = e.field().conductor();
    let mut s = String::new();
    for (k, c) in e.coeffs().iter().enumerate() {
        if *c.numer() == 0.into() {
            continue;
        }
        let neg = *c.numer() < 0.into();
        let a = if neg { -c.clone() } else { c.clone() };
        let mono = match k {
            0 => String::new(),
            1 => format!("z{n}"),
            _ => format!("z{n}^{k}"),
        };
        let coef = if a.is_integer() && *a.numer() == 1.into() && !mono.is_empty() { String::new() } else { a.to_string() };
        let term = if coef.is_empty() || mono.is_empty() { format!("{coef}{mono}") } else { format!("{coef}*{mono}") };
        if s.is_empty() {
            s = if neg { format!("-{term}") } else { term };
        } else {
            s.push_str(if neg { " - " } else { " + " });
            s.push_str(&term);
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

pub fn pretty_mat(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|r| format!("[{}]", m.row(r).iter().map(pretty_elt).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn fmt_roots(c: &[RootOfUnity]) -> String {
    c.iter().map(|r| fmt_residue(r.residue_ratio())).collect::<Vec<_>>().join(",")
}

/// Append-only store: one directory per group and tuple length, tuple files
/// named by the hash of their signature, and an `index.tsv`.
pub struct Store {
    dir: PathBuf,
    index: std::sync::Mutex<Vec<IndexLine>>,
}

pub const INDEX_HEADER: &str = "group\tT\ttype\ttype_key\tmembers\txi\tlambda\tcharacter\torbit\treduced_orbit\ts_size\tsl2\tsl2_text\tidentity_entry\tstep9\tinput\toutput\tinduced\tnotes";

#[derive(Clone, Debug)]
pub struct IndexLine {
    pub fields: Vec<String>,
}

impl IndexLine {
    pub fn get(&self, col: &str) -> &str {
        let i = INDEX_HEADER.split('\t').position(|c| c == col).expect("known column");
        self.fields.get(i).map_or("", String::as_str)
    }
}

impl Store {
    pub fn dir_for(root: &Path, id: &str, t: usize) -> PathBuf {
        let safe: String = id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
        root.join(format!("{safe}_T{t}"))
    }

    pub fn open(root: &Path, id: &str, t: usize) -> Result<Store> {
        let dir = Self::dir_for(root, id, t);
        fs::create_dir_all(&dir)?;
        let index = read_index(&dir.join("index.tsv"))?;
        Ok(Store { dir, index: std::sync::Mutex::new(index) })
    }

    fn write_tuple(&self, m: &MatTuple) -> Result<String> {
        let text = m.to_string();
        let name = format!("{}.tuple", hash_hex(&text));
        let path = self.dir.join(&name);
        if !path.exists() {
            atomic_write(&path, &text)?;
        }
        Ok(name)
    }

    fn read_tuple(&self, name: &str) -> Option<MatTuple> {
        MatTuple::from_str(&fs::read_to_string(self.dir.join(name)).ok()?).ok()
    }

    pub fn lookup(&self, label: &str, lambda: RootOfUnity) -> Option<ReportRow> {
        let xi = fmt_residue(lambda.residue_ratio());
        let idx = self.index.lock().unwrap();
        let line = idx.iter().rev().find(|l| l.get("type") == label && l.get("xi") == xi)?;
        row_from_line(line, |n| self.read_tuple(n))
    }

    pub fn append(&self, row: &ReportRow) -> Result<()> {
        let mut idx = self.index.lock().unwrap();
        let xi = fmt_residue(row.xi);
        if idx.iter().any(|l| l.get("type") == row.type_label && l.get("xi") == xi) {
            return Ok(());
        }
        let files = [&row.input, &row.output, &row.induced].map(|m| self.write_tuple(m));
        let [a, b, c] = files;
        let fields = index_fields(row, [a?, b?, c?]);
        idx.push(IndexLine { fields });
        let mut text = String::from(INDEX_HEADER);
        text.push('\n');
        for l in idx.iter() {
            text.push_str(&l.fields.join("\t"));
            text.push('\n');
        }
        atomic_write(&self.dir.join("index.tsv"), &text)
    }
}

fn atomic_write(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn opt_str<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("-".into(), |x| x.to_string())
}

fn index_fields(row: &ReportRow, files: [String; 3]) -> Vec<String> {
    let step9 = row.step9.as_ref().map_or("-".into(), |s| {
        format!("{}/{};{}", s.members_in_orbit, s.members_checked, opt_str(&s.inverse_consistent))
    });
    let [input, output, induced] = files;
    vec![
        row.group.clone(),
        row.t.to_string(),
        row.type_label.clone(),
        row.type_key.clone(),
        row.members.to_string(),
        fmt_residue(row.xi),
        format!("{}/{}", row.lambda.residue().0, row.lambda.residue().1),
        fmt_roots(&row.character),
        opt_str(&row.orbit),
        opt_str(&row.reduced_orbit),
        opt_str(&row.s_size),
        row.sl2.as_ref().map_or("-".into(), Sl2Summary::short),
        row.sl2.as_ref().map_or("-".into(), |s| s.text.replace('\t', " ")),
        opt_str(&row.identity_entry),
        step9,
        input,
        output,
        induced,
        row.notes.join("; ").replace(['\t', '\n'], " "),
    ]
}

pub fn read_index(path: &Path) -> Result<Vec<IndexLine>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == INDEX_HEADER => {}
        _ => return Err(Error::Parse(format!("{} has an unexpected header", path.display()))),
    }
    Ok(lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| IndexLine { fields: l.split('\t').map(str::to_string).collect() })
        .collect())
}

fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    match s.split_once('/') {
        Some((a, b)) => Some(Ratio::new(a.parse().ok()?, b.parse().ok()?)),
        None => Some(Ratio::from_integer(s.parse().ok()?)),
    }
}

fn parse_root(s: &str) -> Option<RootOfUnity> {
    let r = parse_ratio(s)?;
    Some(RootOfUnity::new(*r.denom() as u32, *r.numer()))
}

fn parse_orbit(s: &str) -> Option<OrbitSize> {
    match s.strip_prefix(">=") {
        Some(n) => n.parse().ok().map(OrbitSize::AtLeast),
        None => s.parse().ok().map(OrbitSize::Exact),
    }
}

fn parse_sl2(short: &str, text: &str) -> Option<Sl2Summary> {
    if short == "-" {
        return None;
    }
    if let Some(inner) = short.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
        let (o, k) = inner.split_once(',')?;
        let (o, k) = (o.parse().ok()?, k.parse().ok()?);
        return Some(Sl2Summary { order: o, small_id: Some((o, k)), text: text.into() });
    }
    Some(Sl2Summary { order: short.parse().ok()?, small_id: None, text: text.into() })
}

fn row_from_line(l: &IndexLine, read: impl Fn(&str) -> Option<MatTuple>) -> Option<ReportRow> {
    let xi = parse_ratio(l.get("xi"))?;
    let lambda = parse_root(l.get("lambda"))?;
    let character = l.get("character").split(',').map(parse_root).collect::<Option<Vec<_>>>()?;
    let step9 = match l.get("step9") {
        "-" => None,
        s => {
            let (frac, inv) = s.split_once(';')?;
            let (a, b) = frac.split_once('/')?;
            Some(Step9 {
                members_in_orbit: a.parse().ok()?,
                members_checked: b.parse().ok()?,
                inverse_consistent: inv.parse().ok(),
            })
        }
    };
    let notes = l.get("notes");
    Some(ReportRow {
        group: l.get("group").into(),
        t: l.get("T").parse().ok()?,
        type_label: l.get("type").into(),
        type_key: l.get("type_key").into(),
        members: l.get("members").parse().ok()?,
        xi,
        lambda,
        input: read(l.get("input"))?,
        output: read(l.get("output"))?,
        character,
        induced: read(l.get("induced"))?,
        orbit: parse_orbit(l.get("orbit")),
        s_size: l.get("s_size").parse().ok(),
        sl2: parse_sl2(l.get("sl2"), l.get("sl2_text")),
        identity_entry: l.get("identity_entry").parse().ok(),
        reduced_orbit: parse_orbit(l.get("reduced_orbit")),
        step9,
        notes: if notes.is_empty() { vec![] } else { vec![notes.to_string()] },
    })
}

/// All rows stored under `root`, one subdirectory per group and length.
pub fn load_rows(root: &Path) -> Result<Vec<ReportRow>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("index.tsv").exists())
        .collect();
    dirs.sort();
    let mut rows = Vec::new();
    for d in dirs {
        for l in read_index(&d.join("index.tsv"))? {
            let row = row_from_line(&l, |n| MatTuple::from_str(&fs::read_to_string(d.join(n)).ok()?).ok())
                .ok_or_else(|| Error::Parse(format!("bad index line in {}", d.display())))?;
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Md,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "md" => Ok(ReportFormat::Md),
            _ => Err(Error::Parse(format!("unknown report format {s:?}"))),
        }
    }
}

/// Appendix-style table: type, ξ, λ, M_1..M_T, character, orbit size, S. Size.
pub fn report(rows: &[ReportRow], format: ReportFormat) -> String {
    let mut by_table: BTreeMap<(String, usize), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        by_table.entry((r.group.clone(), r.t)).or_default().push(r);
    }
    let mut out = String::new();
    for ((g, t), rs) in by_table {
        let mut head = vec!["Type".to_string(), "ξ".into(), "λ".into()];
        head.extend((1..=t).map(|i| format!("M{i}")));
        head.extend(["Character", "O. Size", "S. Size", "SL2"].map(String::from));
        let body: Vec<Vec<String>> = rs
            .iter()
            .map(|r| {
                let mut v = vec![r.type_label.clone(), fmt_residue(r.xi), pretty_elt(&r.lambda.to_minimal_elt())];
                v.extend(r.output.mats().iter().map(pretty_mat));
                v.push(fmt_roots(&r.character));
                let mut o = opt_str(&r.orbit);
                if let Some(red) = &r.reduced_orbit {
                    o.push_str(&format!(" (reduces: {red})"));
                } else if r.reduces() {
                    o.push_str(" (reduces)");
                }
                v.push(o);
                v.push(opt_str(&r.s_size));
                v.push(r.sl2.as_ref().map_or("-".into(), Sl2Summary::short));
                v
            })
            .collect();
        match format {
            ReportFormat::Tsv => {
                let _ = writeln!(out, "# {g} nice {t}-tuples");
                let _ = writeln!(out, "{}", head.join("\t"));
                for b in body {
                    let _ = writeln!(out, "{}", b.join("\t"));
                }
            }
            ReportFormat::Md => {
                let _ = writeln!(out, "### {g} nice {t}-tuples\n");
                let _ = writeln!(out, "| {} |", head.join(" | "));
                let _ = writeln!(out, "|{}", "---|".repeat(head.len()));
                for b in body {
                    let _ = writeln!(out, "| {} |", b.join(" | "));
                }
                out.push('\n');
            }
        }
    }
    out
}

/// GL2 verdict of a convolution, with the certificate when infinite.
pub fn gl2_verdict(m: &MatTuple, cap: usize) -> Result<GroupVerdict> {
    matrix_group(m.mats(), cap)
}
