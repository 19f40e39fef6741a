//! Seeded random networks, circuits, and boundary partitions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{ratio, Rational};
use crate::network::{Circuit, SuperportNetwork};

pub use rand::SeedableRng;
pub type SeededRng = ChaCha8Rng;

/// Bounds for generated networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkShape {
    pub min_n: usize,
    pub max_n: usize,
    pub max_edges: usize,
    pub max_p: usize,
    /// Largest numerator and denominator of a conductance.
    pub max_entry: i64,
    /// Require at least one non-root boundary vertex.
    pub need_non_root: bool,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape {
            min_n: 2,
            max_n: 8,
            max_edges: 14,
            max_p: 3,
            max_entry: 10,
            need_non_root: true,
        }
    }
}

pub fn rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

pub fn random_conductance(rng: &mut impl Rng, max_entry: i64) -> Rational {
    ratio(rng.gen_range(1..=max_entry), rng.gen_range(1..=max_entry))
}

/// A random spanning tree on shuffled vertices, then extra random edges,
/// then a random split of the first `m` vertices into `p` superports.
pub fn random_network(rng: &mut impl Rng, shape: &NetworkShape) -> SuperportNetwork {
    let n = rng.gen_range(shape.min_n.max(2)..=shape.max_n.max(2));
    let all_pairs = n * (n - 1) / 2;
    let target = rng.gen_range(n - 1..=shape.max_edges.max(n - 1).min(all_pairs));

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(target);
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let v = order[k];
        pairs.push((parent.min(v), parent.max(v)));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !pairs.contains(e))
        .collect();
    rest.shuffle(rng);
    pairs.extend(rest.into_iter().take(target - (n - 1)));

    let max_p = shape.max_p.max(1);
    let (p, m) = if shape.need_non_root {
        let p = rng.gen_range(1..=max_p.min(n - 1));
        (p, rng.gen_range(p + 1..=n))
    } else {
        let p = rng.gen_range(1..=max_p.min(n));
        (p, rng.gen_range(p..=n))
    };
    let sizes = random_composition(rng, m, p);
    let edges: Vec<(usize, usize, Rational)> = pairs
        .into_iter()
        .map(|(u, v)| (u, v, random_conductance(rng, shape.max_entry)))
        .collect();
    SuperportNetwork::new(n, edges, &sizes).expect("generated network is valid")
}

/// `total` split into `parts` positive sizes, uniformly over compositions.
pub fn random_composition(rng: &mut impl Rng, total: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..total).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Random rational voltage differences in `[-max, max]`.
pub fn random_circuit(rng: &mut impl Rng, net: &SuperportNetwork, max_entry: i64) -> Circuit {
    let deltas = net
        .non_roots()
        .iter()
        .map(|_| {
            ratio(
                rng.gen_range(-max_entry..=max_entry),
                rng.gen_range(1..=max_entry),
            )
        })
        .collect();
    Circuit::new(net.clone(), deltas).expect("one difference per non-root")
}

/// Random disjoint `X`, `Y` of equal size at most `max_x`, random `Z` from
/// the rest of `0..m`; `W` is what remains.
pub fn random_xyz(
    rng: &mut impl Rng,
    m: usize,
    max_x: usize,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let k = rng.gen_range(0..=max_x.min(m / 2));
    let mut pool: Vec<usize> = (0..m).collect();
    pool.shuffle(rng);
    let mut x: Vec<usize> = pool[..k].to_vec();
    let mut y: Vec<usize> = pool[k..2 * k].to_vec();
    let mut z: Vec<usize> = pool[2 * k..]
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    x.sort_unstable();
    y.sort_unstable();
    z.sort_unstable();
    (x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_networks_respect_shape() {
        let mut r = rng(7);
        let shape = NetworkShape::default();
        for _ in 0..200 {
            let net = random_network(&mut r, &shape);
            assert!(net.n() <= 8 && net.edges().len() <= 14 && net.p() <= 3);
            assert!(net.m() > net.p());
            for e in net.edges() {
                let (p, q) = (e.conductance.numer(), e.conductance.denom());
                assert!(*p >= 1.into() && *p <= 10.into() && *q <= 10.into());
            }
        }
    }

    #[test]
    fn same_seed_same_network() {
        let shape = NetworkShape::default();
        assert_eq!(
            random_network(&mut rng(3), &shape),
            random_network(&mut rng(3), &shape)
        );
    }

    #[test]
    fn compositions_sum() {
        let mut r = rng(1);
        for _ in 0..50 {
            let s = random_composition(&mut r, 6, 3);
            assert_eq!(s.len(), 3);
            assert_eq!(s.iter().sum::<usize>(), 6);
            assert!(s.iter().all(|&x| x > 0));
        }
    }
}
