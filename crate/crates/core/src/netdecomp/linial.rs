//! Linial's color reduction by polynomials over a prime field.
//!
//! A color `c < q^(t+1)` is read as the polynomial `f_c` of degree at most
//! `t` whose coefficients are the base-`q` digits of `c`. Two distinct such
//! polynomials agree on at most `t` points, so when `q > delta * t` every
//! node finds an evaluation point `a` where its polynomial differs from all
//! neighbors'; its new color is `a * q + f_c(a)`, one of `q^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinialResult {
    pub colors: Vec<u64>,
    /// Colors lie in `0..palette`.
    pub palette: u64,
    pub iterations: usize,
}

/// Properly colors the graph given by symmetric adjacency lists, starting
/// from the identifiers (at most `id_bits` bits each) as colors. `delta`
/// must bound every degree; the result uses at most `16 * delta^2` colors.
pub fn linial_color(
    adj: &[Vec<usize>],
    ids: &[u128],
    id_bits: u32,
    delta: usize,
) -> Result<LinialResult> {
    if ids.len() != adj.len() {
        return Err(Error::InvalidParams(
            "one identifier per node required".into(),
        ));
    }
    if let Some(v) = (0..adj.len()).find(|&v| adj[v].len() > delta) {
        return Err(Error::InvalidParams(format!(
            "node {v} has degree {} above the bound {delta}",
            adj[v].len()
        )));
    }
    if delta == 0 {
        return Ok(LinialResult {
            colors: vec![0; adj.len()],
            palette: 1,
            iterations: 0,
        });
    }
    let mut max_color: u128 = if id_bits >= 128 {
        u128::MAX
    } else {
        (1u128 << id_bits) - 1
    };
    if ids.iter().any(|&id| id > max_color) {
        return Err(Error::InvalidParams(format!(
            "identifier wider than {id_bits} bits"
        )));
    }
    let mut colors: Vec<u128> = ids.to_vec();
    let mut iterations = 0;
    while let Some((t, q)) = best_step(delta as u128, max_color) {
        if q * q > max_color {
            break;
        }
        colors = (0..adj.len())
            .map(|v| {
                let mine = digits(colors[v], q, t);
                let theirs: Vec<Vec<u128>> =
                    adj[v].iter().map(|&u| digits(colors[u], q, t)).collect();
                let a = (0..q)
                    .find(|&a| {
                        let x = eval(&mine, a, q);
                        theirs.iter().all(|p| eval(p, a, q) != x)
                    })
                    .expect("q > delta * t leaves a free point");
                a * q + eval(&mine, a, q)
            })
            .collect();
        max_color = q * q - 1;
        iterations += 1;
    }
    if max_color >= u64::MAX as u128 {
        return Err(Error::InvalidParams(format!(
            "degree bound {delta} too large to reduce colors"
        )));
    }
    Ok(LinialResult {
        colors: colors.into_iter().map(|c| c as u64).collect(),
        palette: (max_color + 1) as u64,
        iterations,
    })
}

/// Iterations [`linial_color`] performs for `delta` from `id_bits`-bit colors.
pub fn linial_schedule(id_bits: u32, delta: usize) -> Vec<(u32, u128)> {
    let mut max_color: u128 = if id_bits >= 128 {
        u128::MAX
    } else {
        (1u128 << id_bits) - 1
    };
    let mut steps = Vec::new();
    if delta == 0 {
        return steps;
    }
    while let Some((t, q)) = best_step(delta as u128, max_color) {
        if q * q > max_color {
            break;
        }
        steps.push((t, q));
        max_color = q * q - 1;
    }
    steps
}

/// `(t, q)` minimizing the next palette `q^2` subject to `q > delta * t`
/// and `q^(t+1) > max_color`, smallest `t` on ties.
fn best_step(delta: u128, max_color: u128) -> Option<(u32, u128)> {
    const Q_LIMIT: u128 = 1 << 62;
    let mut best: Option<(u32, u128)> = None;
    for t in 1..=127u32 {
        let floor = delta * t as u128 + 1;
        if floor >= Q_LIMIT {
            break;
        }
        let root = iroot(max_color, t + 1);
        // smallest q with q^(t+1) > max_color is root + 1
        let need = floor.max(root + 1);
        if need >= Q_LIMIT {
            continue;
        }
        let q = next_prime(need as u64) as u128;
        if best.map_or(true, |(_, bq)| q < bq) {
            best = Some((t, q));
        }
    }
    best
}

/// `floor(x^(1/k))`.
fn iroot(x: u128, k: u32) -> u128 {
    if k == 1 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64) as u128;
    let pow_le = |r: u128| r.checked_pow(k).is_some_and(|p| p <= x);
    while r > 0 && !pow_le(r) {
        r -= 1;
    }
    while pow_le(r + 1) {
        r += 1;
    }
    r
}

fn digits(mut c: u128, q: u128, t: u32) -> Vec<u128> {
    (0..=t)
        .map(|_| {
            let d = c % q;
            c /= q;
            d
        })
        .collect()
}

/// Horner evaluation mod `q < 2^62`.
fn eval(coeffs: &[u128], a: u128, q: u128) -> u128 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * a + c) % q)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    (n.max(2)..).find(|&x| is_prime(x)).expect("prime exists")
}
