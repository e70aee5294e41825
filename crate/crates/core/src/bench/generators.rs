//! Benchmark circuit generators, all lowered to single-qubit gates and CZ.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BenchError;
use crate::circuit::{Circuit, SingleGate};

fn rz(c: &mut Circuit, theta: f64, q: usize) {
    c.single(SingleGate::Rz, &[theta], q);
}

fn zz(c: &mut Circuit, theta: f64, a: usize, b: usize) {
    c.cx(a, b);
    rz(c, theta, b);
    c.cx(a, b);
}

/// H on q0 then a CX chain down the register.
pub fn cat(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n == 0 {
        return c;
    }
    c.h(0);
    for i in 0..n - 1 {
        c.cx(i, i + 1);
    }
    c
}

/// Bernstein–Vazirani with the target on the last qubit.
pub fn bernstein_vazirani(n: usize, secret: &[bool]) -> Result<Circuit, BenchError> {
    if n < 2 || secret.len() != n - 1 {
        return Err(BenchError::InvalidSpec(format!(
            "BV needs n >= 2 and n - 1 secret bits (n = {n}, {} bits)",
            secret.len()
        )));
    }
    let target = n - 1;
    let mut c = Circuit::new(n);
    c.single(SingleGate::X, &[], target);
    for q in 0..n {
        c.h(q);
    }
    for (i, &bit) in secret.iter().enumerate() {
        if bit {
            c.cx(i, target);
        }
    }
    for q in 0..target {
        c.h(q);
    }
    Ok(c)
}

/// Textbook QFT including the final qubit reversal.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.h(j);
        for k in j + 1..n {
            c.cphase(PI / (1u64 << (k - j)) as f64, k, j);
        }
    }
    for i in 0..n / 2 {
        c.swap(i, n - 1 - i);
    }
    c
}

/// Transverse-field Ising Trotter steps on an open chain, even bonds first.
pub fn ising(n: usize, steps: usize) -> Circuit {
    let (j, h) = (0.4, 0.3);
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.h(q);
    }
    for _ in 0..steps {
        for start in [0, 1] {
            for a in (start..n.saturating_sub(1)).step_by(2) {
                zz(&mut c, 2.0 * j, a, a + 1);
            }
        }
        for q in 0..n {
            c.single(SingleGate::Rx, &[2.0 * h], q);
        }
    }
    c
}

/// Max-cut QAOA on a random `d`-regular graph, `p` rounds.
pub fn qaoa(n: usize, d: usize, p: usize, seed: u64) -> Result<Circuit, BenchError> {
    let edges = random_regular_graph(n, d, seed)?;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.h(q);
    }
    for layer in 0..p {
        let gamma = 0.3 + 0.1 * layer as f64;
        let beta = 0.7 - 0.1 * layer as f64;
        for &(a, b) in &edges {
            zz(&mut c, 2.0 * gamma, a, b);
        }
        for q in 0..n {
            c.single(SingleGate::Rx, &[2.0 * beta], q);
        }
    }
    Ok(c)
}

/// Four-qubit ripple-carry adder with ten CX.
pub fn adder4() -> Circuit {
    use SingleGate::{Tdg, S, T, X};
    let mut c = Circuit::new(4);
    c.single(X, &[], 0).single(X, &[], 1).h(3);
    c.cx(2, 3);
    c.single(T, &[], 0)
        .single(T, &[], 1)
        .single(T, &[], 2)
        .single(Tdg, &[], 3);
    c.cx(0, 1).cx(2, 3).cx(3, 0).cx(1, 2).cx(0, 1).cx(2, 3);
    c.single(Tdg, &[], 0)
        .single(Tdg, &[], 1)
        .single(Tdg, &[], 2)
        .single(T, &[], 3);
    c.cx(0, 1).cx(2, 3);
    c.single(S, &[], 3);
    c.cx(3, 0);
    c.h(3);
    c
}

/// Toy period finding on five qubits: three counting qubits drive modular
/// additions on a two-qubit work register, then an inverse QFT.
pub fn shor5() -> Circuit {
    let mut c = Circuit::new(5);
    for q in 0..3 {
        c.h(q);
    }
    c.single(SingleGate::X, &[], 3);
    // q0 controls +1 mod 4 on (q3 low, q4 high)
    c.ccx(0, 3, 4);
    c.cx(0, 3);
    // q1 controls +2 mod 4; q2 would add 4 = 0
    c.cx(1, 4);
    // inverse QFT on q0..q2
    c.swap(0, 2);
    for j in (0..3).rev() {
        for k in (j + 1..3).rev() {
            c.cphase(-PI / (1u64 << (k - j)) as f64, k, j);
        }
        c.h(j);
    }
    c
}

/// Uniform `d`-regular simple graph by the pairing model with rejection,
/// edges in a seeded random order.
pub fn random_regular_graph(
    n: usize,
    d: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>, BenchError> {
    if (n * d) % 2 == 1 || d >= n.max(1) {
        return Err(BenchError::InfeasibleGraph { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..100_000 {
        points.shuffle(&mut rng);
        let mut edges = BTreeSet::new();
        let ok = points.chunks(2).all(|p| {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            a != b && edges.insert((a, b))
        });
        if ok {
            let mut list: Vec<(usize, usize)> = edges.into_iter().collect();
            list.shuffle(&mut rng);
            return Ok(list);
        }
    }
    Err(BenchError::InfeasibleGraph { n, d })
}

/// H on every qubit, then one CZ per edge.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Circuit, BenchError> {
    let edges = random_regular_graph(n, d, seed)?;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.h(q);
    }
    for (a, b) in edges {
        c.cz(a, b);
    }
    Ok(c)
}
