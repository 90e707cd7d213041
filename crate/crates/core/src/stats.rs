//! Counters collected during a solve.

use serde::Serialize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub ip_calls: u64,
    pub refinements: u64,
    pub max_depth: usize,
    /// Refinements performed by the loop at each recursion depth.
    pub refinements_by_depth: Vec<u64>,
    /// Abstraction iterations at each recursion depth.
    pub iterations_by_depth: Vec<u64>,
    pub wall_ms: u64,
    pub outcome: String,
}

fn bump(v: &mut Vec<u64>, depth: usize) {
    if v.len() <= depth {
        v.resize(depth + 1, 0);
    }
    v[depth] += 1;
}

impl SolveStats {
    pub fn enter(&mut self, depth: usize) {
        self.max_depth = self.max_depth.max(depth);
    }

    pub fn iteration(&mut self, depth: usize) {
        bump(&mut self.iterations_by_depth, depth);
    }

    pub fn refinement(&mut self, depth: usize) {
        self.refinements += 1;
        bump(&mut self.refinements_by_depth, depth);
    }

    pub fn refinements_at(&self, depth: usize) -> u64 {
        self.refinements_by_depth.get(depth).copied().unwrap_or(0)
    }

    /// Adds the counters of `other` (used to total several decision solves).
    pub fn absorb(&mut self, other: &SolveStats) {
        self.ip_calls += other.ip_calls;
        self.refinements += other.refinements;
        self.max_depth = self.max_depth.max(other.max_depth);
        for (d, n) in other.refinements_by_depth.iter().enumerate() {
            for _ in 0..*n {
                bump(&mut self.refinements_by_depth, d);
            }
        }
        for (d, n) in other.iterations_by_depth.iter().enumerate() {
            if self.iterations_by_depth.len() <= d {
                self.iterations_by_depth.resize(d + 1, 0);
            }
            self.iterations_by_depth[d] += n;
        }
    }

    pub const CSV_HEADER: &'static str = "outcome,wall_ms,ip_calls,refinements,max_depth";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.outcome, self.wall_ms, self.ip_calls, self.refinements, self.max_depth
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_depth_counters() {
        let mut s = SolveStats::default();
        s.refinement(0);
        s.refinement(2);
        s.refinement(0);
        assert_eq!(s.refinements, 3);
        assert_eq!(s.refinements_by_depth, vec![2, 0, 1]);
        assert_eq!(s.refinements_at(5), 0);
    }

    #[test]
    fn absorb_sums() {
        let mut a = SolveStats::default();
        a.ip_calls = 2;
        a.iteration(0);
        let mut b = SolveStats::default();
        b.ip_calls = 3;
        b.refinement(1);
        b.iteration(1);
        a.absorb(&b);
        assert_eq!(a.ip_calls, 5);
        assert_eq!(a.refinements_by_depth, vec![0, 1]);
        assert_eq!(a.iterations_by_depth, vec![1, 1]);
    }
}
