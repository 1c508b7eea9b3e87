use std::collections::BTreeMap;

use loopsoup::fourier::{
    holonomy_class_intensities, homology1_intensity, homology2_field_law, homology2_intensities, FiniteGroup,
    GroupConnection, TorusGrid,
};
use loopsoup::graph::{GraphModel, SpanningTreeFrame};
use loopsoup::measure::{enumerate_measure, total_mass};
use loopsoup::signature::currents::{current, homology1};

fn skew_key(w: &loopsoup::freegroup::Word, r: usize, p: i64) -> Vec<i64> {
    let mut key = Vec::new();
    for i in 1..=r {
        for j in i + 1..=r {
            key.push(current(w, &[i, j], r).unwrap().rem_euclid(p));
        }
    }
    key
}

fn check_second_homology(g: &GraphModel, n_max: usize, primes: &[u64]) {
    let frame = SpanningTreeFrame::bfs(g).unwrap();
    let r = frame.rank();
    let e = enumerate_measure(g, &frame, n_max).unwrap();
    for &p in primes {
        let mut by_key: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        *by_key.entry(vec![0; r * (r - 1) / 2]).or_insert(0.0) += e.contractible;
        for (c, &m) in &e.classes {
            let w = c.word();
            if homology1(&w, r).unwrap().iter().any(|&x| x != 0) {
                continue;
            }
            *by_key.entry(skew_key(&w, r, p as i64)).or_insert(0.0) += m;
        }
        for (key, v) in homology2_intensities(g, &frame, p).unwrap() {
            let en = by_key.get(&key).copied().unwrap_or(0.0);
            assert!(
                v - en >= -1e-9 && v - en <= e.tail_bound,
                "p={p} m={key:?}: {v} vs {en} (tail {})",
                e.tail_bound
            );
        }
    }
}

#[test]
fn second_homology_matches_enumeration_on_bowtie() {
    check_second_homology(&GraphModel::bowtie(1.0).unwrap(), 14, &[3, 5, 7]);
}

#[test]
fn second_homology_matches_enumeration_on_k4() {
    check_second_homology(&GraphModel::complete(4, 1.0).unwrap(), 12, &[3, 5]);
}

#[test]
fn second_homology_field_law_is_a_distribution() {
    let g = GraphModel::bowtie(1.0).unwrap();
    let frame = SpanningTreeFrame::bfs(&g).unwrap();
    let law = homology2_field_law(&g, &frame, 1.0, 5, 16).unwrap();
    let total: f64 = law.iter().map(|(_, v)| v).sum();
    assert!((total - 1.0).abs() < 1e-8);
    assert!(law.iter().all(|(_, v)| *v >= -1e-12));
    let tiny = homology2_field_law(&g, &frame, 1e-9, 5, 16).unwrap();
    assert!((tiny[0].1 - 1.0).abs() < 1e-8);
}

#[test]
fn cyclic_holonomy_equals_aliased_winding() {
    let g = GraphModel::triangle(1.0).unwrap();
    let frame = SpanningTreeFrame::bfs(&g).unwrap();
    for n in [2usize, 3, 5] {
        let group = FiniteGroup::cyclic(n);
        let conn = GroupConnection::new(&g, &group, &[(frame.cogenerators()[0], 1)]).unwrap();
        let classes = holonomy_class_intensities(&g, &conn, &group).unwrap();
        let aliased = TorusGrid::with_resolution(&g, &frame, n).unwrap();
        for (k, v) in classes.iter().enumerate() {
            let expect = aliased.intensity(&[k as i64]).unwrap();
            assert!((v - expect).abs() < 1e-12, "Z{n} class {k}: {v} vs {expect}");
        }
    }
}

#[test]
fn symmetric_group_class_intensities_sum_to_total_mass() {
    let g = GraphModel::bowtie(0.7).unwrap();
    let frame = SpanningTreeFrame::bfs(&g).unwrap();
    let group = FiniteGroup::symmetric3();
    let edges = frame.cogenerators();
    let conn = GroupConnection::new(&g, &group, &[(edges[0], 1), (edges[1], 3)]).unwrap();
    let classes = holonomy_class_intensities(&g, &conn, &group).unwrap();
    let total = total_mass(&g).unwrap();
    assert!((classes.iter().sum::<f64>() - total).abs() < 1e-10);
    assert!(classes.iter().all(|&v| v > 0.0));
}

#[test]
fn first_homology_grid_refinement_converges() {
    let g = GraphModel::bowtie(1.0).unwrap();
    let frame = SpanningTreeFrame::bfs(&g).unwrap();
    for h in [[0, 0], [1, 0], [1, -1], [2, 1]] {
        let coarse = homology1_intensity(&g, &frame, &h, 32).unwrap();
        let fine = homology1_intensity(&g, &frame, &h, 64).unwrap();
        assert!((coarse - fine).abs() < 1e-8, "h={h:?}");
    }
}
