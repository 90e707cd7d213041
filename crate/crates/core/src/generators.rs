//! Benchmark families: QRandomParity (QIP and QDIMACS forms) and multilevel
//! critical node instances.
//!
//! Permutations and random graphs are drawn with [`SplitMix64`] so that a
//! `(n, seed)` pair produces the same instance in any implementation that
//! follows the same recipe:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! The permutation is a Fisher-Yates shuffle of `1..=n`: for `i` from `n-1`
//! down to `1`, swap position `i` with position `next() % (i + 1)`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::{LinearConstraint, QipBuilder, QipInstance, Quantifier, Relation, Sense, VarId};
use crate::parser::serialize_qip;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("QRandomParity needs n >= 2, got {0}")]
    TooSmall(usize),
    #[error("budget {name} = {value} exceeds |V| = {vertices}")]
    Budget {
        name: &'static str,
        value: usize,
        vertices: usize,
    },
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// σ as a 1-based list: `sigma[i - 1] = σ(i)`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed);
    let mut sigma: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        sigma.swap(i, j);
    }
    sigma
}

fn sigma_line(sigma: &[usize]) -> String {
    let parts: Vec<String> = sigma.iter().map(|s| s.to_string()).collect();
    parts.join(" ")
}

/// Linear encoding: every XOR `a = b ^ c` becomes `b + c + a = 2 d`.
pub fn gen_qrandomparity(n: usize, seed: u64) -> Result<QipInstance, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall(n));
    }
    let sigma = permutation(n, seed);
    let mut b = QipBuilder::new();
    let x: Vec<VarId> = (1..=n).map(|i| b.binary(format!("x{i}"), Quantifier::Exists)).collect();
    let u = b.binary("u", Quantifier::Forall);
    let t: Vec<VarId> = (2..=n).map(|i| b.binary(format!("t{i}"), Quantifier::Exists)).collect();
    let d: Vec<VarId> = (2..=n).map(|i| b.binary(format!("d{i}"), Quantifier::Exists)).collect();
    let s: Vec<VarId> = (2..=n).map(|i| b.binary(format!("s{i}"), Quantifier::Exists)).collect();
    let e: Vec<VarId> = (2..=n).map(|i| b.binary(format!("e{i}"), Quantifier::Exists)).collect();
    let xs = |i: usize| x[sigma[i - 1] - 1];

    let xor = |a: VarId, p: VarId, q: VarId, aux: VarId| {
        LinearConstraint::from_ints(&[(1, p), (1, q), (1, a), (-2, aux)], Relation::Eq, 0)
    };
    b.exist_row(xor(t[0], x[0], x[1], d[0]));
    for i in 3..=n {
        b.exist_row(xor(t[i - 2], t[i - 3], x[i - 1], d[i - 2]));
    }
    b.exist_row(xor(s[0], xs(1), xs(2), e[0]));
    for i in 3..=n {
        b.exist_row(xor(s[i - 2], s[i - 3], xs(i), e[i - 2]));
    }
    b.exist_row(LinearConstraint::from_ints(&[(-1, u), (-1, t[n - 2])], Relation::Ge, -1));
    b.exist_row(LinearConstraint::from_ints(&[(1, u), (1, s[n - 2])], Relation::Ge, 1));
    Ok(b.build().expect("generated instance is well formed"))
}

/// The QIP text for [`gen_qrandomparity`] with σ recorded in a comment header.
pub fn qrandomparity_qip_text(n: usize, seed: u64) -> Result<String, GenError> {
    let inst = gen_qrandomparity(n, seed)?;
    let sigma = permutation(n, seed);
    Ok(format!(
        "# QRandomParity n={n} seed={seed}\n# sigma = {}\n{}",
        sigma_line(&sigma),
        serialize_qip(&inst)
    ))
}

/// Clausal form in QDIMACS. Numbering: `x_i = i`, `u = n+1`, `t_i = n+i`,
/// `s_i = 2n+i-1` for `i = 2..n`.
pub fn emit_qdimacs_qrandomparity(n: usize, seed: u64) -> Result<String, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall(n));
    }
    let sigma = permutation(n, seed);
    let n_i = n as i64;
    let x = |i: usize| i as i64;
    let u = n_i + 1;
    let t = |i: usize| n_i + i as i64;
    let s = |i: usize| 2 * n_i + i as i64 - 1;
    let xs = |i: usize| x(sigma[i - 1]);

    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut xor = |a: i64, p: i64, q: i64| {
        clauses.push(vec![-p, q, a]);
        clauses.push(vec![p, -q, a]);
        clauses.push(vec![p, q, -a]);
        clauses.push(vec![-p, -q, -a]);
    };
    xor(t(2), x(1), x(2));
    for i in 3..=n {
        xor(t(i), x(i), t(i - 1));
    }
    xor(s(2), xs(1), xs(2));
    for i in 3..=n {
        xor(s(i), xs(i), s(i - 1));
    }
    clauses.push(vec![-u, -t(n)]);
    clauses.push(vec![u, s(n)]);

    let vars = 3 * n - 1;
    let mut out = String::new();
    let _ = writeln!(out, "c QRandomParity n={n} seed={seed}");
    let _ = writeln!(out, "c sigma = {}", sigma_line(&sigma));
    let _ = writeln!(out, "c x_i = i, u = {u}, t_i = {n}+i, s_i = {}+i (i = 2..{n})", 2 * n - 1);
    let _ = writeln!(out, "p cnf {vars} {}", clauses.len());
    let line = |ids: Vec<i64>| {
        let parts: Vec<String> = ids.iter().map(|v| v.to_string()).collect();
        parts.join(" ")
    };
    let _ = writeln!(out, "e {} 0", line((1..=n).map(x).collect()));
    let _ = writeln!(out, "a {u} 0");
    let inner: Vec<i64> = (2..=n).map(t).chain((2..=n).map(s)).collect();
    let _ = writeln!(out, "e {} 0", line(inner));
    for c in clauses {
        let _ = writeln!(out, "{} 0", line(c));
    }
    Ok(out)
}

/// Directed graph on vertices `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    arcs: Vec<(usize, usize)>,
}

impl Graph {
    /// Drops self-loops and duplicate arcs.
    pub fn directed(vertices: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = arcs
            .into_iter()
            .filter(|&(u, v)| u != v && u < vertices && v < vertices)
            .collect();
        Graph {
            vertices,
            arcs: set.into_iter().collect(),
        }
    }

    /// Every edge becomes two arcs.
    pub fn undirected(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Graph::directed(vertices, edges.into_iter().flat_map(|(u, v)| [(u, v), (v, u)]))
    }

    pub fn edgeless(vertices: usize) -> Self {
        Graph::directed(vertices, [])
    }

    pub fn path(vertices: usize) -> Self {
        Graph::undirected(vertices, (1..vertices).map(|v| (v - 1, v)))
    }

    /// G(n, p): each unordered pair is an edge with probability `p`.
    pub fn random(vertices: usize, p: f64, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.next_f64() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::undirected(vertices, edges)
    }

    /// `|V|` on the first line, then one undirected edge `u v` per line
    /// (0-based). Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self, GenError> {
        let err = |line: usize, message: String| GenError::EdgeList { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, head) = lines.next().ok_or_else(|| err(1, "missing vertex count".into()))?;
        let vertices: usize = head
            .parse()
            .map_err(|_| err(first, format!("bad vertex count `{head}`")))?;
        let mut edges = Vec::new();
        for (no, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err(no, format!("expected `u v`, got `{l}`")));
            }
            let mut ends = [0usize; 2];
            for (slot, p) in ends.iter_mut().zip(&parts) {
                *slot = p.parse().map_err(|_| err(no, format!("bad vertex `{p}`")))?;
                if *slot >= vertices {
                    return Err(err(no, format!("vertex {slot} out of range 0..{vertices}")));
                }
            }
            if ends[0] == ends[1] {
                return Err(err(no, format!("self-loop on {}", ends[0])));
            }
            edges.push((ends[0], ends[1]));
        }
        Ok(Graph::undirected(vertices, edges))
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McnBudgets {
    pub omega: usize,
    pub phi: usize,
    pub lambda: usize,
}

/// Vaccinate `z`, attack `y`, protect `x`; `a_v = 1` when node `v` is saved.
pub fn gen_mcn(g: &Graph, budgets: McnBudgets) -> Result<QipInstance, GenError> {
    let nv = g.vertices();
    for (name, value) in [("omega", budgets.omega), ("phi", budgets.phi), ("lambda", budgets.lambda)] {
        if value > nv {
            return Err(GenError::Budget {
                name,
                value,
                vertices: nv,
            });
        }
    }
    let mut b = QipBuilder::new();
    let z: Vec<VarId> = (0..nv).map(|v| b.binary(format!("z{v}"), Quantifier::Exists)).collect();
    let y: Vec<VarId> = (0..nv).map(|v| b.binary(format!("y{v}"), Quantifier::Forall)).collect();
    let x: Vec<VarId> = (0..nv).map(|v| b.binary(format!("x{v}"), Quantifier::Exists)).collect();
    let a: Vec<VarId> = (0..nv).map(|v| b.binary(format!("a{v}"), Quantifier::Exists)).collect();

    let sum = |vs: &[VarId]| vs.iter().map(|&v| (1, v)).collect::<Vec<_>>();
    b.exist_row(LinearConstraint::from_ints(&sum(&z), Relation::Le, budgets.omega as i64));
    b.exist_row(LinearConstraint::from_ints(&sum(&x), Relation::Le, budgets.lambda as i64));
    for v in 0..nv {
        b.exist_row(LinearConstraint::from_ints(
            &[(1, a[v]), (-1, z[v]), (1, y[v])],
            Relation::Le,
            1,
        ));
    }
    for &(u, v) in g.arcs() {
        b.exist_row(LinearConstraint::from_ints(
            &[(1, a[v]), (-1, a[u]), (-1, x[v]), (-1, z[v])],
            Relation::Le,
            0,
        ));
    }
    b.univ_row(LinearConstraint::from_ints(&sum(&y), Relation::Le, budgets.phi as i64));
    b.objective(Sense::Max, sum(&a));
    Ok(b.build().expect("generated instance is well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;
    use crate::oracle_bruteforce::{minimax_feasible, minimax_value, MinimaxValue};
    use crate::parser::parse_qip;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0 from the reference C implementation.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn permutation_is_a_bijection() {
        for seed in 0..20 {
            let mut p = permutation(9, seed);
            p.sort_unstable();
            assert_eq!(p, (1..=9).collect::<Vec<_>>());
        }
        assert_eq!(permutation(1, 7), vec![1]);
    }

    #[test]
    fn qrp_counts() {
        let inst = gen_qrandomparity(3, 1).unwrap();
        assert_eq!(inst.variables().len(), 12);
        assert_eq!(inst.exist_system().len(), 6);
        assert!(inst.univ_system().is_empty());
        assert!(inst.objective().is_none());
        assert_eq!(inst.blocks().len(), 3);
        assert!(validate_instance(&inst).is_admissible());
        assert_eq!(gen_qrandomparity(1, 0).unwrap_err(), GenError::TooSmall(1));
    }

    #[test]
    fn qrp_is_infeasible_by_enumeration() {
        for n in 2..=4 {
            for seed in 0..3 {
                let inst = gen_qrandomparity(n, seed).unwrap();
                assert!(!minimax_feasible(&inst).unwrap(), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn qrp_without_the_universal_is_satisfiable() {
        // Fixing u = 0 leaves only u + s_n >= 1, which parity allows.
        let inst = gen_qrandomparity(3, 5).unwrap();
        let u = inst.find("u").unwrap();
        let fixed = inst.with_exist_row(LinearConstraint::from_ints(&[(1, u)], Relation::Le, 0));
        let mut b = QipBuilder::new();
        for v in fixed.variables() {
            b.var(v.name.clone(), Quantifier::Exists, v.lower, v.upper);
        }
        for r in fixed.exist_system() {
            b.exist_row(r.clone());
        }
        assert!(minimax_feasible(&b.build().unwrap()).unwrap());
    }

    #[test]
    fn qdimacs_n3() {
        let text = emit_qdimacs_qrandomparity(3, 11).unwrap();
        assert!(text.lines().any(|l| l == "p cnf 8 18"));
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
        assert_eq!(body[1], "e 1 2 3 0");
        assert_eq!(body[2], "a 4 0");
        assert_eq!(body[3], "e 5 6 7 8 0");
        // t2 = x1 xor x2 with t2 = 5.
        assert_eq!(&body[4..8], &["-1 2 5 0", "1 -2 5 0", "1 2 -5 0", "-1 -2 -5 0"]);
        assert_eq!(body[body.len() - 2], "-4 -6 0");
        assert_eq!(body[body.len() - 1], "4 8 0");
        assert_eq!(body.len(), 4 + 18);
    }

    #[test]
    fn both_forms_log_the_same_sigma() {
        let qip = qrandomparity_qip_text(6, 42).unwrap();
        let cnf = emit_qdimacs_qrandomparity(6, 42).unwrap();
        let sigma = format!("sigma = {}", sigma_line(&permutation(6, 42)));
        assert!(qip.contains(&sigma));
        assert!(cnf.contains(&sigma));
    }

    #[test]
    fn qdimacs_clauses_match_the_linear_rows() {
        // Brute-force both encodings over (x, u) and compare which x admit
        // completions for each u.
        let n = 3;
        let seed = 9;
        let cnf = emit_qdimacs_qrandomparity(n, seed).unwrap();
        let clauses: Vec<Vec<i64>> = cnf
            .lines()
            .filter(|l| !l.starts_with(['c', 'p', 'e', 'a']))
            .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).filter(|&v| v != 0).collect())
            .collect();
        let inst = gen_qrandomparity(n, seed).unwrap();
        for bits in 0u32..(1 << (n + 1)) {
            let cnf_sat = (0u32..(1 << (2 * (n - 1)))).any(|inner| {
                let val = |lit: i64| {
                    let v = lit.unsigned_abs() as usize;
                    let b = if v <= n + 1 { bits >> (v - 1) & 1 } else { inner >> (v - n - 2) & 1 };
                    (b == 1) == (lit > 0)
                };
                clauses.iter().all(|c| c.iter().any(|&l| val(l)))
            });
            let mut b = QipBuilder::new();
            for v in inst.variables() {
                b.var(v.name.clone(), Quantifier::Exists, v.lower, v.upper);
            }
            for r in inst.exist_system() {
                b.exist_row(r.clone());
            }
            for i in 0..=n {
                let bit = (bits >> i & 1) as i64;
                b.exist_row(LinearConstraint::from_ints(&[(1, VarId(i as u32))], Relation::Eq, bit));
            }
            let qip_sat = minimax_feasible(&b.build().unwrap()).unwrap();
            assert_eq!(cnf_sat, qip_sat, "bits={bits:b}");
        }
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(qrandomparity_qip_text(7, 3).unwrap(), qrandomparity_qip_text(7, 3).unwrap());
        assert_eq!(
            emit_qdimacs_qrandomparity(7, 3).unwrap(),
            emit_qdimacs_qrandomparity(7, 3).unwrap()
        );
        assert_ne!(permutation(7, 3), permutation(7, 4));
    }

    #[test]
    fn graph_invariants() {
        let g = Graph::directed(3, [(0, 1), (0, 1), (1, 1), (2, 0)]);
        assert_eq!(g.arcs(), &[(0, 1), (2, 0)]);
        let g = Graph::undirected(3, [(0, 1)]);
        assert_eq!(g.arcs(), &[(0, 1), (1, 0)]);
        assert_eq!(Graph::path(4).arcs().len(), 6);
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::parse_edge_list("4\n0 1\n# comment\n2 3\n\n1 0\n").unwrap();
        assert_eq!(g.vertices(), 4);
        assert_eq!(g.arcs(), &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let e = Graph::parse_edge_list("3\n0 5\n").unwrap_err();
        assert!(matches!(e, GenError::EdgeList { line: 2, .. }));
        assert!(Graph::parse_edge_list("3\n1 1\n").is_err());
        assert!(Graph::parse_edge_list("x\n").is_err());
        assert!(Graph::parse_edge_list("").is_err());
    }

    #[test]
    fn random_graph_density() {
        let g = Graph::random(60, 0.05, 1);
        let edges = g.arcs().len() / 2;
        // 1770 pairs at 5%: mean 88.5, sd about 9.2.
        assert!((50..130).contains(&edges), "{edges}");
        assert_eq!(Graph::random(10, 0.3, 8), Graph::random(10, 0.3, 8));
        assert!(Graph::random(5, 0.0, 1).arcs().is_empty());
    }

    #[test]
    fn mcn_shape() {
        let g = Graph::path(4);
        let inst = gen_mcn(&g, McnBudgets { omega: 0, phi: 1, lambda: 1 }).unwrap();
        assert_eq!(inst.variables().len(), 16);
        assert_eq!(inst.blocks().len(), 3);
        assert_eq!(inst.exist_system().len(), 2 + 4 + 6);
        assert_eq!(inst.univ_system().len(), 1);
        assert!(validate_instance(&inst).is_admissible());
        let e = gen_mcn(&g, McnBudgets { omega: 5, phi: 0, lambda: 0 }).unwrap_err();
        assert!(matches!(e, GenError::Budget { name: "omega", .. }));
    }

    #[test]
    fn mcn_edgeless_value() {
        for phi in 0..=3 {
            let inst = gen_mcn(&Graph::edgeless(3), McnBudgets { omega: 0, phi, lambda: 0 }).unwrap();
            let v = minimax_value(&inst).unwrap();
            assert_eq!(v.value, MinimaxValue::Value(3 - phi as i64));
        }
    }

    #[test]
    fn mcn_path_by_hand() {
        // Path 0-1-2-3, one attack, one protection, no vaccination. The attacker
        // hits an inner node; the defender protects one neighbour and saves its
        // side: attacking 1 leaves {2, 3} savable by protecting 2, and {0} is lost
        // either way, so 2 saved. Attacking an end node loses only that node
        // after protecting its neighbour: 3 saved.
        let inst = gen_mcn(&Graph::path(4), McnBudgets { omega: 0, phi: 1, lambda: 1 }).unwrap();
        assert_eq!(minimax_value(&inst).unwrap().value, MinimaxValue::Value(2));
    }

    #[test]
    fn generated_text_round_trips() {
        let inst = gen_mcn(&Graph::random(5, 0.4, 2), McnBudgets { omega: 1, phi: 1, lambda: 1 }).unwrap();
        let text = serialize_qip(&inst);
        assert_eq!(serialize_qip(&parse_qip(&text).unwrap()), text);
        let qrp = qrandomparity_qip_text(4, 0).unwrap();
        let parsed = parse_qip(&qrp).unwrap();
        assert_eq!(parsed, gen_qrandomparity(4, 0).unwrap());
    }
}
