//! Fill-reducing ordering by recursive bisection of BFS level structures.

use super::CsrPattern;

const LEAF_SIZE: usize = 48;

struct Dissector<'a> {
    pattern: &'a CsrPattern,
    region: Vec<usize>,
    next_region: usize,
    stamp: Vec<usize>,
    epoch: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn new_region(&mut self) -> usize {
        self.next_region += 1;
        self.next_region
    }

    /// BFS levels from `start` restricted to the region `id`.
    fn levels(&mut self, start: usize, id: usize) -> Vec<Vec<usize>> {
        self.epoch += 1;
        let epoch = self.epoch;
        self.stamp[start] = epoch;
        let mut levels = vec![vec![start]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &w in self.pattern.row(v) {
                    if self.region[w] == id && self.stamp[w] != epoch {
                        self.stamp[w] = epoch;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return levels;
            }
            levels.push(next);
        }
    }

    fn degree(&self, v: usize, id: usize) -> usize {
        self.pattern.row(v).iter().filter(|&&w| self.region[w] == id).count()
    }

    fn pseudo_peripheral(&mut self, root: usize, id: usize) -> (usize, Vec<Vec<usize>>) {
        let mut start = root;
        let mut levels = self.levels(start, id);
        for _ in 0..6 {
            let candidate = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (self.degree(v, id), v))
                .unwrap();
            let trial = self.levels(candidate, id);
            if trial.len() <= levels.len() {
                break;
            }
            start = candidate;
            levels = trial;
        }
        (start, levels)
    }

    fn dissect(&mut self, verts: Vec<usize>, id: usize) {
        if verts.len() <= LEAF_SIZE {
            self.order.extend(verts);
            return;
        }
        let (_, levels) = self.pseudo_peripheral(verts[0], id);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < verts.len() {
            let (a, b) = (self.new_region(), self.new_region());
            let mut comp: Vec<usize> = levels.into_iter().flatten().collect();
            comp.sort_unstable();
            for &v in &verts {
                self.region[v] = b;
            }
            for &v in &comp {
                self.region[v] = a;
            }
            let rest: Vec<usize> = verts.into_iter().filter(|&v| self.region[v] == b).collect();
            self.dissect(comp, a);
            self.dissect(rest, b);
            return;
        }
        if levels.len() < 3 {
            self.order.extend(verts);
            return;
        }
        let half = verts.len() / 2;
        let mut acc = 0;
        let mut sep = levels.len() / 2;
        for (k, level) in levels.iter().enumerate() {
            acc += level.len();
            if acc >= half {
                sep = k;
                break;
            }
        }
        let sep = sep.clamp(1, levels.len() - 2);
        let (a, b, s) = (self.new_region(), self.new_region(), self.new_region());
        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        for (k, level) in levels.iter().enumerate() {
            let (target, id) = match k.cmp(&sep) {
                std::cmp::Ordering::Less => (&mut part_a, a),
                std::cmp::Ordering::Greater => (&mut part_b, b),
                std::cmp::Ordering::Equal => continue,
            };
            for &v in level {
                self.region[v] = id;
                target.push(v);
            }
        }
        let mut separator = levels[sep].clone();
        for &v in &separator {
            self.region[v] = s;
        }
        part_a.sort_unstable();
        part_b.sort_unstable();
        separator.sort_unstable();
        self.dissect(part_a, a);
        self.dissect(part_b, b);
        self.order.extend(separator);
    }
}

/// Nested-dissection permutation: `perm[k]` is the original index of the
/// k-th eliminated unknown. Deterministic for a given pattern.
pub fn nested_dissection(pattern: &CsrPattern) -> Vec<usize> {
    let n = pattern.n();
    let mut d = Dissector {
        pattern,
        region: vec![0; n],
        next_region: 0,
        stamp: vec![0; n],
        epoch: 0,
        order: Vec::with_capacity(n),
    };
    d.dissect((0..n).collect(), 0);
    debug_assert_eq!(d.order.len(), n);
    d.order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ordering_is_a_permutation() {
        let m = 30;
        let idx = |i: usize, j: usize| i * m + j;
        let mut elems = Vec::new();
        for i in 0..m - 1 {
            for j in 0..m - 1 {
                elems.push(vec![idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                elems.push(vec![idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let p = CsrPattern::from_elements(m * m, elems.iter().map(|e| e.as_slice()));
        let mut perm = nested_dissection(&p);
        perm.sort_unstable();
        assert_eq!(perm, (0..m * m).collect::<Vec<_>>());
    }
}
