//! Ball carving with exponential shifts.
//!
//! Shifts are fixed point with [`FRAC_BITS`] fractional bits. A source `v`
//! with shift `r_v` reaches active nodes within `floor(r_v) + 1` hops of it
//! inside the active subgraph. A node keeps the two best
//! `m = r_v - d(u, v)` over distinct sources; it is clustered to the best
//! source when `m1 >= 0` and `m1 - m2 > 1`, and deactivated otherwise.
//! The extra ring makes every active neighbor of a clustered node reached,
//! so the clustered neighbor either joins the same cluster or is deactivated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bit_length, ceil_sqrt_log2, Graph};

pub const FRAC_BITS: u32 = 16;
/// The value `1` in fixed point.
pub const ONE: i64 = 1 << FRAC_BITS;

/// `-ln(u) / beta` for `u` in `(0, 1]`.
pub fn exp_from_uniform(beta: f64, u: f64) -> f64 {
    -u.ln() / beta
}

/// One draw from the exponential distribution with rate `beta`.
pub fn sample_exp<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    exp_from_uniform(beta, u)
}

/// Fixed-point value of `r`, rounded down and saturated far above any cap.
pub fn to_fixed(r: f64) -> i64 {
    (r * ONE as f64).floor().min((i64::MAX / 4) as f64) as i64
}

pub fn from_fixed(x: i64) -> f64 {
    x as f64 / ONE as f64
}

/// Carving parameters for a meta-graph with `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarveParams {
    pub n: usize,
    /// `ceil(sqrt(log2 n))`.
    pub s: u32,
    /// `2^(-s-2)`.
    pub beta: f64,
    /// Shift cap `2^(2s)`.
    pub cap_d: u64,
    /// A run succeeds when at least this fraction (`2^(-s)`) of reached nodes is clustered.
    pub success_fraction: f64,
}

impl CarveParams {
    pub fn for_size(n: usize) -> Self {
        let s = ceil_sqrt_log2(n as u128);
        Self {
            n,
            s,
            beta: (-(s as f64) - 2.0).exp2(),
            cap_d: 1u64 << (2 * s),
            success_fraction: (-(s as f64)).exp2(),
        }
    }

    pub fn cap_fixed(&self) -> i64 {
        (self.cap_d as i64) << FRAC_BITS
    }

    /// Separation of the intermediate decomposition that keeps the reach
    /// regions of distinct same-color clusters apart and non-adjacent.
    pub fn separation(&self) -> u32 {
        2 * self.cap_d as u32 + 2
    }

    /// Bits of one signed fixed-point value in `[-1, cap_d]`.
    pub fn value_bits(&self) -> u32 {
        1 + bit_length(self.cap_d as u128 + 1) + FRAC_BITS
    }

    /// Bits of one carving message: two (value, source id) pairs.
    pub fn message_bits(&self, id_bits: u32) -> u32 {
        2 * (self.value_bits() + id_bits)
    }

    /// Whether a run with `clustered` of `reached` nodes and the given
    /// largest shift meets the success definition.
    pub fn is_success(&self, max_shift: i64, reached: usize, clustered: usize) -> bool {
        max_shift <= self.cap_fixed() && clustered as f64 >= self.success_fraction * reached as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Untouched,
    /// Clustered to the source at this H-node.
    Clustered(usize),
    Deactivated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub outcome: Vec<Outcome>,
    /// Best two `(m, source)` per node, best first.
    pub top: Vec<[Option<(i64, usize)>; 2]>,
    /// Sources whose shift exceeded the cap and stayed silent.
    pub suppressed: Vec<usize>,
    /// Rounds until no node's state changed.
    pub rounds: usize,
}

impl StepResult {
    /// Source a reached node is attributed to (its best source).
    pub fn owner(&self, v: usize) -> Option<usize> {
        self.top[v][0].map(|(_, s)| s)
    }
}

type Top = [Option<(i64, usize)>; 2];

fn better(h: &Graph, a: (i64, usize), b: (i64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && h.id(a.1) < h.id(b.1))
}

fn offer(h: &Graph, top: &mut Top, cand: (i64, usize)) {
    if cand.0 < -ONE {
        return;
    }
    let mut items: Vec<(i64, usize)> = top.iter().flatten().copied().collect();
    match items.iter_mut().find(|x| x.1 == cand.1) {
        Some(x) if better(h, cand, *x) => *x = cand,
        Some(_) => return,
        None => items.push(cand),
    }
    items.sort_by(|&a, &b| {
        if better(h, a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    *top = [items.first().copied(), items.get(1).copied()];
}

/// One carving step on `h` restricted to `active`, with fixed-point shifts
/// for `sources` (which must be active). Sources above `cap` stay silent.
///
/// Each round every active node forwards its best two pairs to its active
/// neighbors, which is enough to learn the exact best two values.
pub fn carve_step(
    h: &Graph,
    active: &[bool],
    sources: &[(usize, i64)],
    cap: i64,
) -> Result<StepResult> {
    let n = h.n();
    if active.len() != n {
        return Err(Error::InvalidParams(
            "active mask length differs from n".into(),
        ));
    }
    let mut top: Vec<Top> = vec![[None, None]; n];
    let mut suppressed = Vec::new();
    for &(v, r) in sources {
        if v >= n || !active[v] {
            return Err(Error::InvalidParams(format!("source {v} is not active")));
        }
        if r < 0 {
            return Err(Error::InvalidParams(format!(
                "source {v} has a negative shift"
            )));
        }
        if r > cap {
            suppressed.push(v);
        } else {
            let mut t = top[v];
            offer(h, &mut t, (r, v));
            top[v] = t;
        }
    }
    let own: Vec<Top> = top.clone();
    let mut rounds = 0;
    loop {
        let next: Vec<Top> = (0..n)
            .map(|v| {
                if !active[v] {
                    return [None, None];
                }
                let mut t = own[v];
                for &w in h.neighbors(v) {
                    if active[w] {
                        for (m, s) in top[w].iter().flatten() {
                            offer(h, &mut t, (m - ONE, *s));
                        }
                    }
                }
                t
            })
            .collect();
        if next == top {
            break;
        }
        top = next;
        rounds += 1;
    }
    let outcome = (0..n)
        .map(|v| match top[v] {
            [None, _] => Outcome::Untouched,
            [Some((m1, s)), second] => {
                let gap_ok = second.map_or(true, |(m2, _)| m1 - m2 > ONE);
                if m1 >= 0 && gap_ok {
                    Outcome::Clustered(s)
                } else {
                    Outcome::Deactivated
                }
            }
        })
        .collect();
    Ok(StepResult {
        outcome,
        top,
        suppressed,
        rounds,
    })
}

/// Monte-Carlo estimate of the probability that the two largest values of
/// `delta_j - d_j` lie within 1 of each other, `delta_j ~ Exp(beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub estimate: f64,
    /// Standard deviation of the estimator if the true probability were `beta`.
    pub sigma: f64,
    pub trials: usize,
}

pub fn gap_probability_check(
    ds: &[f64],
    beta: f64,
    trials: usize,
    seed: u64,
) -> Result<GapEstimate> {
    if beta <= 0.0 || trials == 0 {
        return Err(Error::InvalidParams(
            "beta and trials must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    if ds.len() >= 2 {
        for _ in 0..trials {
            let (mut a, mut b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &d in ds {
                let x = sample_exp(beta, &mut rng) - d;
                if x > a {
                    b = a;
                    a = x;
                } else if x > b {
                    b = x;
                }
            }
            if a - b <= 1.0 {
                hits += 1;
            }
        }
    }
    let p = beta.min(1.0);
    Ok(GapEstimate {
        estimate: hits as f64 / trials as f64,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel, UNREACHED};

    fn path(n: usize) -> Graph {
        generate_graph(&GraphModel::Path { n }, 0).unwrap()
    }

    #[test]
    fn uniform_one_gives_zero() {
        assert_eq!(exp_from_uniform(0.3, 1.0), 0.0);
    }

    #[test]
    fn empirical_mean_and_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let beta = 0.25;
        let draws: Vec<f64> = (0..100_000).map(|_| sample_exp(beta, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 4.0).abs() < 0.05, "{mean}");
        let d = 8.0;
        let tail = draws.iter().filter(|&&x| x >= d + 1.0).count() as f64 / draws.len() as f64;
        let bound = (-beta * (d + 1.0)).exp();
        let sigma = (bound * (1.0 - bound) / draws.len() as f64).sqrt();
        assert!((tail - bound).abs() <= 3.0 * sigma, "{tail} vs {bound}");
    }

    #[test]
    fn isolated_source_clusters_itself() {
        let h = Graph::from_edges(1, &[]).unwrap();
        let r = carve_step(&h, &[true], &[(0, to_fixed(0.3))], ONE * 4).unwrap();
        assert_eq!(r.outcome, vec![Outcome::Clustered(0)]);
    }

    #[test]
    fn p3_middle_joins_center() {
        let h = path(3);
        let sources = [(0, to_fixed(3.0)), (2, to_fixed(0.5))];
        let r = carve_step(&h, &[true; 3], &sources, ONE * 16).unwrap();
        assert_eq!(r.top[1][0], Some((to_fixed(2.0), 0)));
        assert_eq!(r.top[1][1], Some((to_fixed(-0.5), 2)));
        assert_eq!(r.outcome[1], Outcome::Clustered(0));
    }

    #[test]
    fn gap_exactly_one_deactivates() {
        let h = path(3);
        let sources = [(0, to_fixed(2.5)), (2, to_fixed(1.5))];
        let r = carve_step(&h, &[true; 3], &sources, ONE * 16).unwrap();
        assert_eq!(r.top[1][0].unwrap().0 - r.top[1][1].unwrap().0, ONE);
        assert_eq!(r.outcome[1], Outcome::Deactivated);
    }

    #[test]
    fn suppressed_source_is_silent() {
        let h = path(2);
        let r = carve_step(&h, &[true; 2], &[(0, ONE * 9)], ONE * 8).unwrap();
        assert_eq!(r.suppressed, vec![0]);
        assert_eq!(r.outcome, vec![Outcome::Untouched; 2]);
    }

    /// Direct evaluation of the best two values from per-source distances.
    fn oracle(
        h: &Graph,
        active: &[bool],
        sources: &[(usize, i64)],
    ) -> Vec<(Option<i64>, Option<i64>)> {
        let mut vals: Vec<Vec<i64>> = vec![Vec::new(); h.n()];
        for &(s, r) in sources {
            let dist = crate::graph::bfs_within(h, &[s], UNREACHED - 1, &|v| active[v]);
            let reach = (r >> FRAC_BITS) as u32 + 1;
            for v in 0..h.n() {
                if dist[v] <= reach {
                    vals[v].push(r - dist[v] as i64 * ONE);
                }
            }
        }
        vals.into_iter()
            .map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                (v.first().copied(), v.get(1).copied())
            })
            .collect()
    }

    #[test]
    fn forwarding_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let h = generate_graph(
                &GraphModel::Gnp {
                    n: 60,
                    p: 0.06,
                    connected: false,
                },
                seed,
            )
            .unwrap();
            let active: Vec<bool> = (0..60).map(|_| rng.gen_bool(0.85)).collect();
            let picked: Vec<usize> = (0..60)
                .filter(|&v| active[v] && rng.gen_bool(0.2))
                .collect();
            let sources: Vec<(usize, i64)> = picked
                .into_iter()
                .map(|v| (v, to_fixed(sample_exp(0.3, &mut rng))))
                .collect();
            let r = carve_step(&h, &active, &sources, i64::MAX / 8).unwrap();
            let o = oracle(&h, &active, &sources);
            for v in 0..60 {
                let got = (r.top[v][0].map(|x| x.0), r.top[v][1].map(|x| x.0));
                assert_eq!(got, o[v], "seed {seed} node {v}");
            }
            // clustered sets are connected to their source and non-adjacent
            for (a, b) in h.edges() {
                if let (Outcome::Clustered(x), Outcome::Clustered(y)) = (r.outcome[a], r.outcome[b])
                {
                    assert_eq!(x, y);
                }
                for (u, w) in [(a, b), (b, a)] {
                    if matches!(r.outcome[u], Outcome::Clustered(_)) && active[w] {
                        assert_ne!(r.outcome[w], Outcome::Untouched);
                    }
                }
            }
        }
    }

    #[test]
    fn gap_lemma_cases() {
        assert_eq!(
            gap_probability_check(&[0.0], 0.1, 10_000, 1)
                .unwrap()
                .estimate,
            0.0
        );
        let e = gap_probability_check(&[0.0; 10], 0.1, 20_000, 2).unwrap();
        assert!(e.estimate <= 0.1 + 3.0 * e.sigma, "{e:?}");
        let e = gap_probability_check(&[0.0, 1.0, 2.5, 4.0], 0.5, 20_000, 3).unwrap();
        assert!(e.estimate <= 0.5 + 3.0 * e.sigma, "{e:?}");
    }

    #[test]
    fn params_small_sizes() {
        let p = CarveParams::for_size(64);
        assert_eq!(p.s, 3);
        assert_eq!(p.cap_d, 64);
        assert_eq!(p.beta, 1.0 / 32.0);
        assert!(p.is_success(p.cap_fixed(), 8, 1));
        assert!(!p.is_success(p.cap_fixed() + 1, 8, 8));
    }
}
