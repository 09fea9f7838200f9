/// Calls `visit` with the parent array of every spanning arborescence of the
/// directed graph on `n` nodes in which all edges point toward `root`.
///
/// `edge(v, w)` says whether `v → w` exists. In the parent array
/// `parent[root] == root`. Enumeration is exhaustive, so callers cap `n`.
pub fn for_each_arborescence(
    n: usize,
    root: usize,
    edge: impl Fn(usize, usize) -> bool,
    mut visit: impl FnMut(&[usize]),
) {
    assert!(root < n, "root {root} out of range for {n} nodes");
    let choices: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if v == root {
                vec![root]
            } else {
                (0..n).filter(|&w| w != v && edge(v, w)).collect()
            }
        })
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    let mut parent = vec![root; n];
    let mut pick = vec![0usize; n];
    loop {
        for v in 0..n {
            parent[v] = choices[v][pick[v]];
        }
        if reaches_root(&parent, root) {
            visit(&parent);
        }
        // Odometer increment over the choice lists.
        let mut v = 0;
        loop {
            if v == n {
                return;
            }
            pick[v] += 1;
            if pick[v] < choices[v].len() {
                break;
            }
            pick[v] = 0;
            v += 1;
        }
    }
}

fn reaches_root(parent: &[usize], root: usize) -> bool {
    let n = parent.len();
    (0..n).all(|start| {
        let mut v = start;
        for _ in 0..n {
            if v == root {
                return true;
            }
            v = parent[v];
        }
        v == root
    })
}
