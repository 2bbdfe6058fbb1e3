use super::CsrMatrix;
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let degree: Vec<usize> = adj.iter().map(|r| r.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree, &mut level);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        let mut nbrs: Vec<usize> = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_unstable_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for r in adj.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    adj
}

/// George–Liu search for a node of large eccentricity in the component of `seed`.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], level: &mut [usize]) -> usize {
    let mut root = seed;
    let mut ecc = 0;
    for _ in 0..16 {
        let (last_level, depth) = bfs_levels(root, adj, level);
        let cand = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        if depth <= ecc {
            break;
        }
        ecc = depth;
        root = cand;
    }
    root
}

fn bfs_levels(root: usize, adj: &[Vec<usize>], level: &mut [usize]) -> (Vec<usize>, usize) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if level[w] == usize::MAX {
                    level[w] = depth + 1;
                    next.push(w);
                    touched.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        frontier = next;
    }
    for &v in &touched {
        level[v] = usize::MAX;
    }
    (frontier, depth)
}
