//! Maximum clique by branch and bound with Bron–Kerbosch pivoting.

/// Undirected graph on `0..n` stored as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u64>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![0; words(n)]; n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.adj[a][b / 64] |= 1 << (b % 64);
        self.adj[b][a / 64] |= 1 << (a % 64);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

type Set = Vec<u64>;

fn count(s: &Set) -> usize {
    s.iter().map(|w| w.count_ones() as usize).sum()
}

fn and(a: &Set, b: &Set) -> Set {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn members(s: &Set) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &bits) in s.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            let t = b.trailing_zeros() as usize;
            out.push(w * 64 + t);
            b &= b - 1;
        }
    }
    out
}

/// A maximum clique; among maximum cliques the lexicographically smallest
/// (sorted) vertex list is returned.
pub fn maximum_clique(g: &Graph) -> Vec<usize> {
    if g.n == 0 {
        return Vec::new();
    }
    let mut all = vec![0u64; words(g.n)];
    for v in 0..g.n {
        all[v / 64] |= 1 << (v % 64);
    }
    let mut best = vec![0];
    let mut current = Vec::new();
    expand(g, &mut current, all, vec![0; words(g.n)], &mut best);
    best
}

fn better(candidate: &[usize], best: &[usize]) -> bool {
    if candidate.len() != best.len() {
        return candidate.len() > best.len();
    }
    let mut c = candidate.to_vec();
    c.sort_unstable();
    c.as_slice() < best
}

fn expand(g: &Graph, current: &mut Vec<usize>, mut cand: Set, mut excl: Set, best: &mut Vec<usize>) {
    let n_cand = count(&cand);
    if current.len() + n_cand < best.len() {
        return;
    }
    if n_cand == 0 {
        if better(current, best) {
            let mut c = current.clone();
            c.sort_unstable();
            *best = c;
        }
        return;
    }
    // pivot with the most candidate neighbours
    let pivot = members(&cand)
        .into_iter()
        .chain(members(&excl))
        .max_by_key(|&u| (count(&and(&cand, &g.adj[u])), std::cmp::Reverse(u)))
        .expect("candidates are nonempty");
    let branch: Vec<usize> = members(&cand)
        .into_iter()
        .filter(|&v| !g.has_edge(pivot, v))
        .collect();
    for v in branch {
        current.push(v);
        expand(g, current, and(&cand, &g.adj[v]), and(&excl, &g.adj[v]), best);
        current.pop();
        cand[v / 64] &= !(1 << (v % 64));
        excl[v / 64] |= 1 << (v % 64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(g: &Graph) -> usize {
        let n = g.len();
        (0u32..1 << n)
            .filter(|mask| {
                (0..n).all(|a| (0..n).all(|b| a == b || mask >> a & 1 == 0 || mask >> b & 1 == 0 || g.has_edge(a, b)))
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let mut seed = 12345u64;
        for n in 1..10 {
            for _ in 0..20 {
                let mut g = Graph::new(n);
                for a in 0..n {
                    for b in a + 1..n {
                        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        if seed >> 33 & 1 == 1 {
                            g.add_edge(a, b);
                        }
                    }
                }
                let clique = maximum_clique(&g);
                assert_eq!(clique.len(), brute_force(&g));
                for &a in &clique {
                    for &b in &clique {
                        assert!(a == b || g.has_edge(a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn ties_resolve_to_smallest_indices() {
        let mut g = Graph::new(4);
        g.add_edge(0, 3);
        g.add_edge(1, 2);
        assert_eq!(maximum_clique(&g), vec![0, 3]);
        assert_eq!(maximum_clique(&Graph::new(3)), vec![0]);
    }

    #[test]
    fn handles_more_than_64_vertices() {
        let mut g = Graph::new(70);
        for a in 60..70 {
            for b in a + 1..70 {
                g.add_edge(a, b);
            }
        }
        assert_eq!(maximum_clique(&g), (60..70).collect::<Vec<_>>());
    }
}
