mod common;

use refmc::braid::OrbitSize;
use refmc::pipeline::*;
use refmc::refgroup::catalog_group;
use refmc::RootOfUnity;

fn opts() -> RunOptions {
    RunOptions { threads: 1, orbit_cap: 5_000, ..RunOptions::default() }
}

#[test]
fn groups_without_nice_four_tuples() {
    for id in ["G24", "G29", "G31"] {
        assert!(search_nice(id, 4, DEFAULT_SEARCH_CAP).unwrap().is_empty(), "{id}");
    }
}

#[test]
fn g23_three_tuples_partition() {
    let tuples = search_nice("G23", 3, DEFAULT_SEARCH_CAP).unwrap();
    let types = partition_types(&tuples);
    assert_eq!(types.len(), 3);
    assert!(types.iter().all(|t| t.inverse_partner == Some(types.iter().position(|u| u.label == t.label).unwrap())));
    assert_eq!(types.iter().map(TupleType::member_count).sum::<usize>(), tuples.len());
    for t in &types {
        let w = verify_nice("G23", &t.exemplar.matrices(&catalog_group("G23").unwrap()).unwrap()).unwrap();
        assert!(w.generates);
        assert_eq!(t.exemplar.admissible_lambdas().len(), 3);
    }
}

#[test]
fn exemplar_fixtures_are_nice() {
    for (g, t, name) in common::exemplar_names() {
        let w = verify_nice(&g, &common::exemplar(&name)).unwrap();
        assert!(w.generates, "{name}");
        assert!(w.inverse_eigen.iter().any(|(r, c)| !r.is_one() && *c == t - 2), "{name}");
    }
}

#[test]
fn g23_rows_match_reference_orbits() {
    let o = RunOptions { step9_limit: 2_000, ..opts() };
    let rows = run_group("G23", 3, &o).unwrap();
    assert_eq!(rows.len(), 9);
    for a in common::appendix_rows().into_iter().filter(|a| a.group == "G23" && a.t == 3) {
        let r = common::matching(&rows, &a).unwrap_or_else(|| panic!("{} missing", a.label()));
        let again = reinduce(r, &a.character, &o).unwrap();
        let common::Expected::Exact(n) = a.orbit else { panic!("{}", a.label()) };
        assert_eq!(again.orbit, Some(OrbitSize::Exact(n)), "{}", a.label());
        assert_eq!(r.s_size, Some(a.s_size), "{}", a.label());
        if let Some(s9) = &r.step9 {
            assert!(s9.members_in_orbit <= s9.members_checked);
            assert!(s9.members_checked <= r.members);
        }
    }
}

#[test]
fn g28_has_one_distinct_orbit() {
    let rows = run_group("G28", 4, &opts()).unwrap();
    assert_eq!(rows.len(), 2);
    let table: Vec<_> = common::appendix_rows()
        .into_iter()
        .filter(|a| a.group == "G28")
        .map(|a| reinduce(common::matching(&rows, &a).unwrap(), &a.character, &opts()).unwrap())
        .collect();
    assert_eq!(table.len(), 2);
    assert_eq!(distinct_orbits(&table, 5_000, Equivalence::Strict).unwrap(), 1);
    assert_eq!(distinct_orbits(&rows, 5_000, Equivalence::UpToSign).unwrap(), 1);
}

#[test]
fn store_round_trip_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = RunOptions { out: Some(dir.path().to_path_buf()), ..opts() };
    let rows = run_group("G25", 3, &o).unwrap();
    let loaded = load_rows(dir.path()).unwrap();
    assert_eq!(loaded.len(), rows.len());
    for (a, b) in rows.iter().zip(&loaded) {
        assert_eq!(a.type_label, b.type_label);
        assert_eq!(a.xi, b.xi);
        assert_eq!(a.induced, b.induced);
        assert_eq!(a.orbit, b.orbit);
        assert_eq!(a.sl2, b.sl2);
        assert_eq!(a.signature_hash(), b.signature_hash());
    }
    let store = Store::open(dir.path(), "G25", 3).unwrap();
    let first = &rows[0];
    assert!(store.lookup(&first.type_label, first.lambda).is_some());
    assert!(store.lookup("Z", RootOfUnity::new(5, 1)).is_none());
    store.append(first).unwrap();
    assert_eq!(load_rows(dir.path()).unwrap().len(), rows.len());

    let again = run_group("G25", 3, &o).unwrap();
    assert_eq!(again.len(), rows.len());

    let tsv = report(&loaded, ReportFormat::Tsv);
    assert!(tsv.starts_with("# G25 nice 3-tuples\nType\tξ\tλ\tM1\tM2\tM3\tCharacter\tO. Size\tS. Size\tSL2\n"));
    assert_eq!(tsv.lines().count(), 2 + rows.len());
    let md = report(&loaded, ReportFormat::Md);
    assert!(md.contains("| Type | ξ | λ | M1 | M2 | M3 |"));
    assert!("html".parse::<ReportFormat>().is_err());
}

#[test]
fn index_rejects_foreign_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("index.tsv");
    std::fs::write(&p, "a\tb\n").unwrap();
    assert!(read_index(&p).is_err());
    assert!(read_index(&dir.path().join("missing.tsv")).unwrap().is_empty());
}

#[test]
fn identity_entries_reduce() {
    let rows = run_group("G28", 4, &opts()).unwrap();
    for r in rows.iter().filter(|r| r.reduces()) {
        let (i, red) = reduce_identity(&r.induced).unwrap();
        assert_eq!(Some(i), r.identity_entry);
        assert_eq!(red.len(), r.induced.len() - 1);
        assert!(red.product().is_identity());
    }
}

#[test]
fn pretty_printing() {
    let f = refmc::make_field(5);
    assert_eq!(pretty_elt(&f.one()), "1");
    assert_eq!(pretty_elt(&f.zero()), "0");
    assert!(!pretty_elt(&f.zeta(2)).is_empty());
    assert_eq!(format_key(&[(RootOfUnity::new(2, 1), 2)]), "{1/2,1/2}");
}
