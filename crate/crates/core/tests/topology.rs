use jamsim_core::{Edge, Graph};
use proptest::prelude::*;

/// Union-find over an edge list.
fn components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while p[r] != r {
            r = p[r];
        }
        let mut v = v;
        while p[v] != r {
            let next = p[v];
            p[v] = r;
            v = next;
        }
        r
    }
    let mut count = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..12).prop_flat_map(|n| {
        let pair = (0..n, 1..n).prop_map(move |(a, k)| (a, (a + k) % n));
        (Just(n), prop::collection::vec(pair, 0..30))
    })
}

proptest! {
    #[test]
    fn degree_sum_is_twice_edge_count((n, edges) in edge_list()) {
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        let stats = g.degree_stats();
        prop_assert_eq!(stats.total, 2 * g.edge_count());
        for v in 0..n {
            prop_assert_eq!(g.degree(v), g.neighbors(v).len());
            for &w in g.neighbors(v) {
                prop_assert!(g.neighbors(w).contains(&v));
            }
        }
        prop_assert_eq!(g.remove_links(&[]).unwrap(), g.clone());
    }

    #[test]
    fn connectivity_matches_union_find((n, edges) in edge_list()) {
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        prop_assert_eq!(g.is_connected(), components(n, &edges) == 1);
    }

    #[test]
    fn bridges_match_removal_oracle((n, edges) in edge_list()) {
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        let base = components(n, &edges);
        for &e in g.edges() {
            let rest: Vec<(usize, usize)> =
                g.edges().iter().filter(|&&f| f != e).map(|f| (f.lo(), f.hi())).collect();
            prop_assert_eq!(g.is_bridge(e).unwrap(), components(n, &rest) > base);
        }
    }

    #[test]
    fn relabelling_preserves_structure((n, edges) in edge_list(), seed in any::<u64>()) {
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = g.relabel(&perm).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count());
        for v in 0..n {
            prop_assert_eq!(h.degree(perm[v]), g.degree(v));
        }
        prop_assert_eq!(h.is_connected(), g.is_connected());
    }
}

#[test]
fn random_regular_is_connected_and_uniform_for_100_seeds() {
    for seed in 0..100 {
        for (n, deg) in [(40, 4), (10, 3), (7, 2)] {
            let g = Graph::random_regular_connected(n, deg, seed).unwrap();
            assert!(g.is_connected(), "seed {seed}");
            let s = g.degree_stats();
            assert_eq!((s.max, s.min, s.total), (deg, deg, n * deg), "seed {seed}");
            assert_eq!(Graph::random_regular_connected(n, deg, seed).unwrap(), g);
        }
    }
}

#[test]
fn two_regular_on_four_nodes_is_a_labelled_four_cycle() {
    // every connected 2-regular edge subset of K4
    let all: Vec<Edge> = (0..4).flat_map(|a| ((a + 1)..4).map(move |b| Edge::new(a, b).unwrap())).collect();
    let mut cycles = Vec::new();
    for mask in 0u32..(1 << all.len()) {
        let chosen: Vec<(usize, usize)> =
            (0..all.len()).filter(|k| mask >> k & 1 == 1).map(|k| (all[k].lo(), all[k].hi())).collect();
        let g = Graph::new(4, chosen.iter().copied()).unwrap();
        if (0..4).all(|v| g.degree(v) == 2) && components(4, &chosen) == 1 {
            cycles.push(g);
        }
    }
    assert_eq!(cycles.len(), 3);
    for seed in 0..50 {
        let g = Graph::random_regular_connected(4, 2, seed).unwrap();
        assert!(cycles.contains(&g));
    }
}

#[test]
fn star_and_empty_stats() {
    let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let s = star.degree_stats();
    assert_eq!((s.max, s.min, s.total), (3, 1, 6));
    let empty = Graph::new(3, std::iter::empty::<(usize, usize)>()).unwrap();
    let s = empty.degree_stats();
    assert_eq!((s.max, s.min, s.total), (0, 0, 0));
}
