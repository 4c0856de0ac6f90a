mod common;

use proptest::prelude::*;
use refmc::braid::*;
use refmc::cyclo::make_field;
use refmc::pipeline::induced_convolution;
use refmc::sl2::{residues, trace_residue, two_cos};
use refmc::{Error, Mat, MatTuple, RootOfUnity};

const CAP: usize = 5_000;

fn induced(name: &str, num: i64, den: u32) -> MatTuple {
    induced_convolution(&common::exemplar(name), RootOfUnity::from_residue(num, den)).unwrap()
}

fn unipotent(upper: bool, a: i64) -> Mat {
    let f = make_field(1);
    if upper {
        Mat::from_int_rows(&f, &[vec![1, a], vec![0, 1]])
    } else {
        Mat::from_int_rows(&f, &[vec![1, 0], vec![a, 1]])
    }
}

fn closing(mats: Vec<Mat>) -> MatTuple {
    let t = MatTuple::new(mats.clone()).unwrap();
    let mut all = mats;
    all.push(t.product().inverse().unwrap());
    MatTuple::new(all).unwrap()
}

#[test]
fn g23_type_a_orbit_at_minus_one() {
    let m = induced("G23_3_A", 1, 2);
    check_sl2_tuple(&m).unwrap();
    assert_eq!(orbit(&m, CAP).unwrap().size(), 40);
    assert_eq!(orbit_size(&m, 10).unwrap(), OrbitSize::AtLeast(10));
    assert!(matches!(orbit(&m, 10), Err(Error::OrbitCapExceeded { cap: 10, .. })));
}

#[test]
fn g25_type_c_orbit_sizes() {
    assert_eq!(orbit(&induced("G25_3_C", 2, 3), CAP).unwrap().size(), 16);
}

#[test]
fn orbit_is_closed_and_logged() {
    let m = induced("G23_3_A", 1, 2);
    let o = orbit(&m, CAP).unwrap();
    assert_eq!(o.generator_log.len(), o.size());
    for (k, entry) in o.generator_log.iter().enumerate().skip(1) {
        let (p, g) = entry.unwrap();
        assert_eq!(signature(&braid_act(g, &o.representatives[p]).unwrap()).unwrap(), signature(&o.representatives[k]).unwrap());
    }
    for r in &o.representatives {
        for i in 1..r.len() {
            assert!(o.contains(&signature(&braid_act(i, r).unwrap()).unwrap()));
        }
    }
}

#[test]
fn same_orbit_examples() {
    let m = induced("G23_3_A", 1, 2);
    let moved = braid_act(2, &braid_act(1, &m).unwrap()).unwrap();
    assert!(same_orbit(&m, &moved, CAP).unwrap());
    let other = induced("G23_3_B", 1, 2);
    assert!(!same_orbit(&m, &other, CAP).unwrap());
    assert!(!equivalent_up_to_sign(&m, &other, CAP).unwrap());
    let short = MatTuple::new(m.mats()[..3].to_vec()).unwrap();
    assert!(same_orbit(&m, &short, CAP).is_err());
}

#[test]
fn signature_layout() {
    assert_eq!(Signature::index_sets(4).len(), 7);
    assert_eq!(Signature::index_sets(5).len(), 15);
    assert_eq!(Signature::index_sets(4)[3], vec![0, 1]);
    assert_eq!(*Signature::index_sets(5).last().unwrap(), vec![0, 1, 2, 3]);

    let t = closing(vec![unipotent(true, 1), unipotent(false, -1), unipotent(true, 2)]);
    let s = signature(&t).unwrap();
    let f = make_field(1);
    assert_eq!(s.coords[..3], [f.from_int(2), f.from_int(2), f.from_int(2)]);
    assert_eq!(s.coords[3], f.from_int(1));
    assert!(signature(&MatTuple::new(t.mats()[..3].to_vec()).unwrap()).is_err());
}

#[test]
fn signature_coordinates_are_finite_order_traces() {
    let m = induced("G23_3_A", 1, 2);
    let s = signature(&m).unwrap();
    for t in &s.coords {
        let r = trace_residue(t).unwrap();
        let want = two_cos(*r.denom() as u32, *r.numer());
        let f = t.field().join(want.field());
        assert_eq!(want.embed(&f).unwrap(), t.embed(&f).unwrap());
    }
    let r = residues(&m);
    assert_eq!(r.theta.len(), 4);
    assert_eq!(r.sigma.len(), 6);
    assert_eq!(r.theta[0].as_ref().unwrap(), &trace_residue(&s.coords[0]).unwrap());
}

#[test]
fn sign_variants_keep_the_product() {
    let m = induced("G25_3_C", 11, 12);
    let v = sign_variants(&m).unwrap();
    assert_eq!(v.len(), 8);
    assert_eq!(v[0], m);
    for x in &v {
        check_sl2_tuple(x).unwrap();
    }
    let o = orbit(&m, CAP).unwrap();
    assert!(orbit_meets_variants(&o, &v[3]).unwrap());
}

#[test]
fn equivalence_moves() {
    let m = induced("G23_3_A", 1, 2);
    let v = tykhyy_variants(&m).unwrap();
    assert_eq!(v.len(), 6 + 1 + 3 + 1);
    for x in &v {
        check_sl2_tuple(x).unwrap();
    }
    // Sign pairs can change the orbit size; the other moves cannot.
    for x in &v[6..] {
        assert_eq!(orbit(x, CAP).unwrap().size(), 40);
    }
}

#[test]
fn braid_act_rejects_bad_index() {
    let m = induced("G23_3_A", 1, 2);
    assert!(braid_act(0, &m).is_err());
    assert!(braid_act(4, &m).is_err());
}

fn elementary(a: i64, b: i64, c: i64) -> Mat {
    let f = make_field(1);
    let u = Mat::from_int_rows(&f, &[vec![1, a], vec![0, 1]]);
    let l = Mat::from_int_rows(&f, &[vec![1, 0], vec![b, 1]]);
    let w = Mat::from_int_rows(&f, &[vec![1, c], vec![0, 1]]);
    u.matmul(&l).matmul(&w)
}

fn sl2_tuple(len: usize) -> impl Strategy<Value = MatTuple> {
    proptest::collection::vec((-2i64..=2, -2i64..=2, -2i64..=2), len - 1)
        .prop_map(|v| closing(v.into_iter().map(|(a, b, c)| elementary(a, b, c)).collect()))
}

fn act(word: &[usize], m: &MatTuple) -> MatTuple {
    word.iter().fold(m.clone(), |acc, &i| braid_act(i, &acc).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn braid_relations_hold(m in (4usize..=5).prop_flat_map(sl2_tuple)) {
        let n = m.len();
        for i in 1..n - 1 {
            prop_assert_eq!(act(&[i, i + 1, i], &m), act(&[i + 1, i, i + 1], &m));
        }
        for i in 1..n {
            for j in i + 2..n {
                prop_assert_eq!(act(&[i, j], &m), act(&[j, i], &m));
            }
            prop_assert_eq!(braid_act(i, &m).unwrap().product(), m.product());
        }
    }

    #[test]
    fn signature_is_conjugation_invariant(m in sl2_tuple(4), (a, b, c) in (-2i64..=2, -2i64..=2, -2i64..=2)) {
        let g = elementary(a, b, c);
        prop_assert_eq!(signature(&m.conjugate_by(&g).unwrap()).unwrap(), signature(&m).unwrap());
    }
}
