//! Complete deterministic subsequential transducers over the digits
//! `0, …, q−1`.
//!
//! Input is read least significant digit first: the value of state `j` obeys
//! `T_j(qn + r) = T_{t(j,r)}(n) + o(j,r)` for `qn + r > 0` and `T_j(0)` is the
//! final output of `j`. Many automaton toolkits read the most significant
//! digit first; this one does not. State 0 is the initial state.

use num_complex::Complex64;
use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::Rng;
use serde::Serialize;

use crate::linrep::{LinearRepresentation, Mode};
use crate::matrix::ExactMatrix;
use crate::scalar::Scalar;
use crate::spectral::{spectrum, SpectralError, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransducerError {
    #[error("radix {0} is smaller than 2")]
    RadixTooSmall(u64),
    #[error("transducer has no states")]
    NoStates,
    #[error("state {state} has {found} transitions, expected one per digit ({expected})")]
    DigitCount {
        state: usize,
        expected: usize,
        found: usize,
    },
    #[error("transition of state {state} on digit {digit} targets missing state {target}")]
    TargetOutOfRange {
        state: usize,
        digit: usize,
        target: usize,
    },
    #[error("{found} final outputs given for {expected} states")]
    FinalCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transducer {
    q: u64,
    /// `transitions[j][r] = (t(j,r), o(j,r))`.
    transitions: Vec<Vec<(usize, Scalar)>>,
    finals: Vec<Scalar>,
}

impl Transducer {
    pub fn new(
        q: u64,
        transitions: Vec<Vec<(usize, Scalar)>>,
        finals: Vec<Scalar>,
    ) -> Result<Self, TransducerError> {
        if q < 2 {
            return Err(TransducerError::RadixTooSmall(q));
        }
        let d = transitions.len();
        if d == 0 {
            return Err(TransducerError::NoStates);
        }
        for (state, row) in transitions.iter().enumerate() {
            if row.len() as u64 != q {
                return Err(TransducerError::DigitCount {
                    state,
                    expected: q as usize,
                    found: row.len(),
                });
            }
            for (digit, &(target, _)) in row.iter().enumerate() {
                if target >= d {
                    return Err(TransducerError::TargetOutOfRange {
                        state,
                        digit,
                        target,
                    });
                }
            }
        }
        if finals.len() != d {
            return Err(TransducerError::FinalCount {
                expected: d,
                found: finals.len(),
            });
        }
        Ok(Transducer {
            q,
            transitions,
            finals,
        })
    }

    /// A random transducer with integer outputs in `-5..=5`.
    pub fn random<R: Rng>(rng: &mut R, q: u64, states: usize) -> Self {
        let transitions = (0..states)
            .map(|_| {
                (0..q)
                    .map(|_| (rng.gen_range(0..states), Scalar::int(rng.gen_range(-5..=5))))
                    .collect()
            })
            .collect();
        let finals = (0..states)
            .map(|_| Scalar::int(rng.gen_range(-5..=5)))
            .collect();
        Transducer::new(q, transitions, finals).expect("generated transducer is valid")
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[Vec<(usize, Scalar)>] {
        &self.transitions
    }

    pub fn finals(&self) -> &[Scalar] {
        &self.finals
    }

    pub fn target(&self, state: usize, digit: usize) -> usize {
        self.transitions[state][digit].0
    }

    pub fn output(&self, state: usize, digit: usize) -> &Scalar {
        &self.transitions[state][digit].1
    }

    /// `T(n)`: outputs along the least-significant-first digit path from the
    /// initial state plus the final output of the state reached.
    pub fn run(&self, n: u64) -> Scalar {
        self.run_from(0, n)
    }

    pub fn run_from(&self, mut state: usize, mut n: u64) -> Scalar {
        let mut acc = Scalar::zero();
        while n > 0 {
            let r = (n % self.q) as usize;
            acc += self.output(state, r);
            state = self.target(state, r);
            n /= self.q;
        }
        acc += &self.finals[state];
        acc
    }

    /// Sequence-mode representation of dimension `d + 2` for
    /// `ṽ(n) = (T_0(n), …, T_{d−1}(n), 1, [n = 0])`.
    pub fn to_linear_representation(&self) -> LinearRepresentation {
        let d = self.states();
        let one = d;
        let zero_flag = d + 1;
        let matrices = (0..self.q as usize)
            .map(|r| {
                let mut a = ExactMatrix::zeros(d + 2, d + 2);
                for j in 0..d {
                    let (t, ref o) = self.transitions[j][r];
                    a[(j, t)] += &Scalar::one();
                    a[(j, one)] = o.clone();
                    if r == 0 {
                        a[(j, zero_flag)] = &(&self.finals[j] - &self.finals[t]) - o;
                    }
                }
                a[(one, one)] = Scalar::one();
                if r == 0 {
                    a[(zero_flag, zero_flag)] = Scalar::one();
                }
                a
            })
            .collect();
        let mut v0 = self.finals.clone();
        v0.push(Scalar::one());
        v0.push(Scalar::one());
        LinearRepresentation::try_new(self.q, matrices, v0, None, Mode::Sequence)
            .expect("embedding satisfies the sequence-mode invariants")
    }

    /// Adjacency matrix `M` of the underlying digraph (arc multiplicities).
    pub fn adjacency(&self) -> ExactMatrix {
        let d = self.states();
        let mut m = ExactMatrix::zeros(d, d);
        for (j, row) in self.transitions.iter().enumerate() {
            for &(t, _) in row {
                m[(j, t)] += &Scalar::one();
            }
        }
        m
    }

    fn digraph(&self) -> (DiGraph<(), ()>, Vec<NodeIndex>) {
        let mut g = DiGraph::new();
        let nodes: Vec<_> = (0..self.states()).map(|_| g.add_node(())).collect();
        for (j, row) in self.transitions.iter().enumerate() {
            for &(t, _) in row {
                g.add_edge(nodes[j], nodes[t], ());
            }
        }
        (g, nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphReport {
    /// Strongly connected components, each sorted by state index.
    pub components: Vec<Vec<usize>>,
    /// A component is final when no arc leaves it.
    pub is_final: Vec<bool>,
    /// gcd of the cycle lengths inside each component; 0 if it has no cycle.
    pub periods: Vec<u64>,
    /// lcm of the periods of the final components.
    pub final_period: u64,
}

pub fn graph_analysis(t: &Transducer) -> GraphReport {
    let (g, _) = t.digraph();
    let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
            v.sort_unstable();
            v
        })
        .collect();
    components.sort();
    let mut comp_of = vec![0; t.states()];
    for (c, members) in components.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let mut is_final = vec![true; components.len()];
    for j in 0..t.states() {
        for &(target, _) in &t.transitions[j] {
            if comp_of[target] != comp_of[j] {
                is_final[comp_of[j]] = false;
            }
        }
    }
    let periods: Vec<u64> = components
        .iter()
        .enumerate()
        .map(|(c, members)| component_period(t, members, &comp_of, c))
        .collect();
    let final_period = periods
        .iter()
        .zip(&is_final)
        .filter(|(_, &f)| f)
        .fold(1u64, |acc, (&p, _)| acc.lcm(&p.max(1)));
    GraphReport {
        components,
        is_final,
        periods,
        final_period,
    }
}

/// gcd over arcs `u → v` inside the component of `level(u) + 1 − level(v)`,
/// with levels from a breadth-first search inside the component.
fn component_period(t: &Transducer, members: &[usize], comp_of: &[usize], c: usize) -> u64 {
    let mut level = vec![i64::MIN; t.states()];
    let start = members[0];
    level[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &t.transitions[u] {
            if comp_of[v] == c && level[v] == i64::MIN {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: i64 = 0;
    for &u in members {
        for &(v, _) in &t.transitions[u] {
            if comp_of[v] == c {
                g = g.gcd(&(level[u] + 1 - level[v]));
            }
        }
    }
    g.unsigned_abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjacencySpectrumReport {
    /// Eigenvalues of `M` with modulus within `1e-6` of `q`:
    /// `(value, algebraic multiplicity, largest Jordan block)`.
    pub dominant: Vec<(f64, f64, usize, usize)>,
    pub violations: Vec<String>,
}

impl AdjacencySpectrumReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every eigenvalue of `M` of modulus `q` is `q` times a `p`-th
/// root of unity (`p` the final period) and has only trivial Jordan blocks.
pub fn adjacency_spectrum_check(
    t: &Transducer,
    report: &GraphReport,
) -> Result<AdjacencySpectrumReport, SpectralError> {
    let spec = spectrum(&t.adjacency(), DEFAULT_TOL)?;
    let q = t.q as f64;
    let p = report.final_period as i32;
    let mut dominant = Vec::new();
    let mut violations = Vec::new();
    for e in &spec.eigenvalues {
        let modulus = e.value.norm();
        if modulus > q + 1e-6 {
            violations.push(format!("eigenvalue {} exceeds q in modulus", e.value));
        }
        if (modulus - q).abs() > 1e-6 {
            continue;
        }
        dominant.push((e.value.re, e.value.im, e.multiplicity, e.max_jordan));
        let zeta = e.value / q;
        if (zeta.powi(p) - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
            violations.push(format!(
                "eigenvalue {} is not q times a {p}-th root of unity",
                e.value
            ));
        }
        if e.max_jordan != 1 {
            violations.push(format!(
                "eigenvalue {} has a Jordan block of size {}",
                e.value, e.max_jordan
            ));
        }
    }
    Ok(AdjacencySpectrumReport {
        dominant,
        violations,
    })
}

/// One state, `q = 2`, output equal to the digit read: the binary sum of
/// digits.
pub fn identity_transducer() -> Transducer {
    Transducer::new(
        2,
        vec![vec![(0, Scalar::zero()), (0, Scalar::one())]],
        vec![Scalar::zero()],
    )
    .expect("built-in transducer is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two states swapped by every digit; outputs depend on the state.
    fn swap_transducer() -> Transducer {
        Transducer::new(
            2,
            vec![
                vec![(1, Scalar::int(1)), (1, Scalar::int(2))],
                vec![(0, Scalar::int(0)), (0, Scalar::int(-1))],
            ],
            vec![Scalar::int(3), Scalar::int(5)],
        )
        .unwrap()
    }

    #[test]
    fn identity_runs_sum_of_digits() {
        let t = identity_transducer();
        assert_eq!(t.run(5), Scalar::int(2));
        assert_eq!(t.run(0), Scalar::zero());
    }

    #[test]
    fn path_trace() {
        // 6 = 110 in binary: digits 0,1,1 from state 0.
        // state0 -0/1-> state1 -1/-1-> state0 -1/2-> state1, final 5; total 7
        assert_eq!(swap_transducer().run(6), Scalar::int(7));
    }

    #[test]
    fn embedding_matches_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in [identity_transducer(), swap_transducer(), Transducer::random(&mut rng, 3, 4)] {
            let rep = t.to_linear_representation();
            assert!(rep.validate().is_empty());
            for n in 0..500 {
                assert_eq!(rep.evaluate(n), t.run(n), "n={n}");
            }
            // the middle coordinate gives a common left eigenvector
            let d = t.states();
            for a in rep.matrices() {
                for k in 0..d + 2 {
                    let expect = if k == d { Scalar::one() } else { Scalar::zero() };
                    assert_eq!(a[(d, k)], expect);
                }
            }
        }
    }

    #[test]
    fn invalid_transducers() {
        assert_eq!(
            Transducer::new(2, vec![vec![(0, Scalar::zero())]], vec![Scalar::zero()]),
            Err(TransducerError::DigitCount {
                state: 0,
                expected: 2,
                found: 1
            })
        );
        assert!(matches!(
            Transducer::new(2, vec![vec![(0, Scalar::zero()), (3, Scalar::zero())]], vec![Scalar::zero()]),
            Err(TransducerError::TargetOutOfRange { target: 3, .. })
        ));
    }

    #[test]
    fn graph_periods() {
        let r = graph_analysis(&identity_transducer());
        assert_eq!(r.components, vec![vec![0]]);
        assert_eq!((r.is_final[0], r.periods[0], r.final_period), (true, 1, 1));

        let r = graph_analysis(&swap_transducer());
        assert_eq!(r.components, vec![vec![0, 1]]);
        assert_eq!(r.final_period, 2);

        // transient state 0 feeding the looping state 1
        let chain = Transducer::new(
            2,
            vec![
                vec![(1, Scalar::zero()), (1, Scalar::one())],
                vec![(1, Scalar::zero()), (1, Scalar::one())],
            ],
            vec![Scalar::zero(), Scalar::zero()],
        )
        .unwrap();
        let r = graph_analysis(&chain);
        assert_eq!(r.components, vec![vec![0], vec![1]]);
        assert_eq!(r.is_final, vec![false, true]);
        assert_eq!(r.periods, vec![0, 1]);
        assert_eq!(r.final_period, 1);
    }

    #[test]
    fn adjacency_spectra() {
        let t = identity_transducer();
        let rep = adjacency_spectrum_check(&t, &graph_analysis(&t)).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.dominant, vec![(2.0, 0.0, 1, 1)]);

        let t = swap_transducer();
        let rep = adjacency_spectrum_check(&t, &graph_analysis(&t)).unwrap();
        assert!(rep.ok());
        let mut re: Vec<f64> = rep.dominant.iter().map(|x| x.0).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
    }
}
