use proptest::prelude::*;
use yoked::gf2::BitVec;
use yoked::qpcc::*;

/// Plain Gaussian elimination on byte rows, independent of the packed implementation.
fn oracle_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] == 1) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && m[i][c] == 1 {
                for j in 0..cols {
                    m[i][j] ^= m[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn bytes(code: &ParityCheckCode, p: Pauli) -> Vec<Vec<u8>> {
    let n = code.n();
    code.checks(p).rows().iter().map(|r| (0..n).map(|i| r.get(i) as u8).collect()).collect()
}

fn admissible_sides(max_n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 1..=3usize {
        let m = 1 << r;
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(s) = stack.pop() {
            if s.len() == r {
                out.push(s);
                continue;
            }
            let prod: usize = s.iter().product();
            let mut side = m;
            while prod * side * m.pow((r - s.len() - 1) as u32) <= max_n {
                let mut t = s.clone();
                t.push(side);
                stack.push(t);
                side += m;
            }
        }
    }
    out
}

fn formula_k(sides: &[usize]) -> usize {
    2 * sides.iter().map(|s| s - 1).product::<usize>() - sides.iter().product::<usize>()
}

#[test]
fn eight_by_eight_table_parameters() {
    let code = build_qpcc(&[8, 8]).unwrap();
    assert_eq!(code.x_checks().n_rows(), 16);
    assert_eq!(code.z_checks().n_rows(), 16);
    assert_eq!(code.redundant_checks(Pauli::X), 1);
    assert_eq!(code.redundant_checks(Pauli::Z), 1);
    assert!(verify_commutation(&code).is_empty());
    let p = code_parameters(&code, 4).unwrap();
    assert_eq!(p, CodeParameters { n: 64, k: 34, d: Distance::Exact(4) });
}

#[test]
fn small_parameter_vectors() {
    assert_eq!(code_parameters(&build_qpcc(&[4, 4]).unwrap(), 4).unwrap(), CodeParameters { n: 16, k: 2, d: Distance::Exact(4) });
    let two = build_qpcc(&[2]).unwrap();
    assert_eq!(two.k(), 0);
    let p = code_parameters(&two, 2).unwrap();
    assert_eq!((p.n, p.k), (2, 0));
    assert_eq!(two.d(), 2);
    let four = build_qpcc(&[4]).unwrap();
    assert_eq!(code_parameters(&four, 2).unwrap(), CodeParameters { n: 4, k: 2, d: Distance::Exact(2) });
    let cube = build_qpcc(&[8, 8, 8]).unwrap();
    assert_eq!((cube.n(), cube.k(), cube.d()), (512, 174, 8));
}

#[test]
fn rank_k_matches_formula_for_all_admissible_codes() {
    let all = admissible_sides(512);
    assert!(all.contains(&vec![8, 8, 8]) && all.contains(&vec![4, 128]) && all.contains(&vec![512]));
    for sides in all {
        let code = build_qpcc(&sides).unwrap();
        assert!(verify_commutation(&code).is_empty(), "{sides:?}");
        let want_rank = code.n() - sides.iter().map(|s| s - 1).product::<usize>();
        assert_eq!(code.rank(Pauli::X), want_rank, "{sides:?}");
        assert_eq!(code.rank(Pauli::Z), want_rank, "{sides:?}");
        let k = code.n() - code.rank(Pauli::X) - code.rank(Pauli::Z);
        assert_eq!(k, formula_k(&sides), "{sides:?}");
        assert_eq!(code.k(), k);
    }
}

#[test]
fn rank_agrees_with_byte_oracle() {
    for sides in [vec![4, 4], vec![8, 4], vec![8, 8], vec![12], vec![8, 8, 8]] {
        let code = build_qpcc(&sides).unwrap();
        assert_eq!(oracle_rank(&bytes(&code, Pauli::X)), code.rank(Pauli::X));
        assert_eq!(oracle_rank(&bytes(&code, Pauli::Z)), code.rank(Pauli::Z));
    }
}

#[test]
fn distance_is_two_to_the_r_for_small_codes() {
    for sides in admissible_sides(20) {
        let code = build_qpcc(&sides).unwrap();
        if code.k() == 0 {
            continue;
        }
        let d = 1 << sides.len();
        assert_eq!(code_parameters(&code, d).unwrap().d, Distance::Exact(d), "{sides:?}");
    }
}

#[test]
fn weight_and_kernel_searches_agree() {
    for sides in [vec![4], vec![6], vec![8], vec![4, 4], vec![4, 8]] {
        let code = build_qpcc(&sides).unwrap();
        for p in [Pauli::X, Pauli::Z] {
            let cap = 1 << sides.len();
            let a = min_logical_weight(&code, p, cap, u128::MAX, SearchPath::Weight).unwrap();
            let b = min_logical_weight(&code, p, cap, u128::MAX, SearchPath::Kernel).unwrap();
            assert_eq!(a, b, "{sides:?} {p}");
            assert_eq!(a, Some(cap));
        }
    }
}

#[test]
fn budget_guard_trips() {
    let code = build_qpcc(&[8, 8]).unwrap();
    let err = code_parameters_with(&code, 4, 1000, SearchPath::Weight).unwrap_err();
    assert_eq!(err.kind(), "BudgetError");
}

fn is_rectangle(sides: &[usize], pts: &[usize]) -> bool {
    let cs: Vec<Vec<usize>> = pts.iter().map(|&q| coords(sides, q)).collect();
    let mut values: Vec<Vec<usize>> = vec![vec![]; sides.len()];
    for c in &cs {
        for (a, &x) in c.iter().enumerate() {
            if !values[a].contains(&x) {
                values[a].push(x);
            }
        }
    }
    values.iter().all(|v| v.len() == 2) && pts.len() == 1 << sides.len()
}

#[test]
fn minimum_weight_logicals_are_rectangles() {
    for sides in [vec![4, 4], vec![4], vec![8]] {
        let code = build_qpcc(&sides).unwrap();
        let d = code.d();
        let z = logicals_of_weight(&code, Pauli::Z, d);
        assert!(!z.is_empty());
        for pts in &z {
            assert!(is_rectangle(&sides, pts), "{sides:?} Z {pts:?}");
        }
        let fwd = &code.permutation().forward;
        let x = logicals_of_weight(&code, Pauli::X, d);
        assert!(!x.is_empty());
        for pts in &x {
            let mapped: Vec<usize> = pts.iter().map(|&q| fwd[q]).collect();
            assert!(is_rectangle(&sides, &mapped), "{sides:?} X {pts:?}");
        }
    }
}

#[test]
fn unpermuted_two_dimensional_checks_anticommute() {
    let rows = delta_checks(&[8, 8]);
    let bad = anticommuting_pairs(&rows, &rows);
    // Every row line meets every column line exactly once.
    assert_eq!(bad.len(), 2 * 8 * 8);
    assert!(verify_commutation(&build_qpcc(&[4]).unwrap()).is_empty());
}

#[test]
fn span_membership_vectors() {
    let code = build_qpcc(&[4]).unwrap();
    assert!(in_stabilizer_span(&code, &BitVec::zeros(4), Pauli::X).unwrap());
    assert!(in_stabilizer_span(&code, code.x_checks().row(0), Pauli::X).unwrap());
    for q in 0..4 {
        assert!(!in_stabilizer_span(&code, &BitVec::from_indices(4, [q]), Pauli::X).unwrap());
    }
    assert_eq!(in_stabilizer_span(&code, &BitVec::zeros(5), Pauli::Z).unwrap_err().kind(), "LengthMismatch");
}

#[test]
fn span_membership_matches_enumeration() {
    let code = build_qpcc(&[4, 4]).unwrap();
    for p in [Pauli::X, Pauli::Z] {
        let rows = code.checks(p).rows();
        let mut members = std::collections::HashSet::new();
        for mask in 0u32..(1 << rows.len()) {
            let mut v = BitVec::zeros(16);
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_assign(r);
                }
            }
            members.insert(v.words()[0]);
        }
        for w in 0u64..(1 << 16) {
            let v = BitVec::from_indices(16, (0..16).filter(|i| w >> i & 1 == 1));
            assert_eq!(in_stabilizer_span(&code, &v, p).unwrap(), members.contains(&w));
        }
    }
}

#[test]
fn exports_round_trip_supports() {
    let code = build_qpcc(&[4, 4]).unwrap();
    let dense = code.to_dense_text(Pauli::Z);
    let sparse = code.to_sparse_text();
    let zlines: Vec<&str> = sparse.lines().filter(|l| l.starts_with('Z')).collect();
    for (d, s) in dense.lines().zip(zlines) {
        let from_dense: Vec<usize> = d.char_indices().filter(|(_, c)| *c == '1').map(|(i, _)| i).collect();
        let from_sparse: Vec<usize> = s.split(' ').skip(1).map(|t| t.parse().unwrap()).collect();
        assert_eq!(from_dense, from_sparse);
    }
}

fn sides_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1usize..=16).prop_map(|a| vec![2 * a]),
        (1usize..=6, 1usize..=6).prop_map(|(a, b)| vec![4 * a, 4 * b]),
        (1usize..=2, 1usize..=2, 1usize..=2).prop_map(|(a, b, c)| vec![8 * a, 8 * b, 8 * c]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constructed_codes_commute_and_match_formula(sides in sides_strategy()) {
        let code = build_qpcc(&sides).unwrap();
        prop_assert!(verify_commutation(&code).is_empty());
        prop_assert_eq!(code.n() - code.rank(Pauli::X) - code.rank(Pauli::Z), formula_k(&sides));
    }

    #[test]
    fn permutation_is_a_bijection(sides in sides_strategy()) {
        let code = build_qpcc(&sides).unwrap();
        let p = code.permutation();
        for i in 0..code.n() {
            prop_assert_eq!(p.inverse[p.forward[i]], i);
            prop_assert_eq!(p.forward[p.inverse[i]], i);
        }
        // Mapping Z supports forward recovers the line pattern.
        let lines = delta_checks(&sides);
        for (z, l) in code.z_checks().rows().iter().zip(lines.rows()) {
            let back = BitVec::from_indices(code.n(), z.ones().map(|q| p.forward[q]));
            prop_assert_eq!(&back, l);
        }
    }
}
