//! Disjoint sets over `0..n` whose class representative is always the
//! smallest member. Callers index elements in canonical (lexicographic)
//! order, so the representative is the lexicographically smallest element.

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
        }
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        // path compression
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; the smaller root wins.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Representative of every element, plus the sorted list of distinct
    /// representatives.
    pub fn classes(&mut self) -> (Vec<usize>, Vec<usize>) {
        let reps: Vec<usize> = (0..self.parent.len()).map(|i| self.find(i)).collect();
        let mut roots: Vec<usize> = reps.clone();
        roots.sort_unstable();
        roots.dedup();
        (reps, roots)
    }
}
