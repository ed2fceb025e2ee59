//! Seeded random instances for property tests, acceptance runs and benches.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::discrete::DiscreteInstance;
use crate::exact_solver::PrecisionParams;
use crate::ratlp::{LinearProgram, Relation};
use crate::valuations::{int, rat, CakeInstance, Rational};

/// `count` disjoint sorted spans `[a,b]` with endpoints on the grid `1/den`.
fn disjoint_spans<R: Rng>(rng: &mut R, den: usize, count: usize) -> Vec<(usize, usize)> {
    let count = count.clamp(1, den);
    let mut pts: Vec<usize> = (0..=den).collect();
    pts.shuffle(rng);
    let mut chosen: Vec<usize> = pts[..2 * count.min(den.div_ceil(2))].to_vec();
    chosen.sort_unstable();
    let mut spans: Vec<(usize, usize)> = chosen.chunks(2).map(|c| (c[0], c[1])).collect();
    if rng.gen_bool(0.3) {
        // Touching neighbours exercise adjacent-block handling.
        for i in 1..spans.len() {
            if spans[i - 1].1 < spans[i].0 {
                spans[i - 1].1 = spans[i].0;
                break;
            }
        }
    }
    spans
}

/// Agents with up to `max_blocks` blocks on a grid of denominator at most
/// `max_den`, integer heights `1..=5` before normalization.
pub fn piecewise_instance<R: Rng>(rng: &mut R, n: usize, max_blocks: usize, max_den: usize) -> CakeInstance {
    let agents = (0..n)
        .map(|_| {
            let den = rng.gen_range(2..=max_den.max(2));
            let count = rng.gen_range(1..=max_blocks.max(1));
            disjoint_spans(rng, den, count)
                .into_iter()
                .map(|(a, b)| (rat(a as i64, den as i64), rat(b as i64, den as i64), int(rng.gen_range(1..=5))))
                .collect()
        })
        .collect();
    CakeInstance::from_blocks(agents).expect("generated blocks are valid")
}

/// Every agent uniform on one interval with endpoints on `1/den`, `den <= max_den`.
pub fn uniform_interval_instance<R: Rng>(rng: &mut R, n: usize, max_den: usize) -> CakeInstance {
    let agents = (0..n)
        .map(|_| {
            let den = rng.gen_range(1..=max_den.max(1)) as i64;
            let a = rng.gen_range(0..den);
            let b = rng.gen_range(a + 1..=den);
            vec![(rat(a, den), rat(b, den), int(1))]
        })
        .collect();
    CakeInstance::from_blocks(agents).expect("generated interval is valid")
}

/// Instance whose normalized description uses numerators and denominators at
/// most `max_m`, with at most `k` blocks per agent.
pub fn small_m_instance<R: Rng>(rng: &mut R, n: usize, k: usize, max_m: u32) -> CakeInstance {
    let den_max = max_m.max(2) as usize;
    loop {
        let inst = piecewise_instance(rng, n, k, den_max);
        if PrecisionParams::from_instance(&inst).m <= max_m.max(3).into() {
            return inst;
        }
    }
}

/// Cake in which no two agents' blocks overlap: `den` grid slots dealt out to
/// agents, each agent receiving at least one.
pub fn disjoint_block_instance<R: Rng>(rng: &mut R, n: usize, max_blocks: usize, den: usize) -> CakeInstance {
    let den = den.max(n);
    let mut slots: Vec<usize> = (0..den).collect();
    slots.shuffle(rng);
    let mut agents: Vec<Vec<(Rational, Rational, Rational)>> = vec![Vec::new(); n];
    for (i, &s) in slots.iter().enumerate() {
        let a = if i < n { i } else { rng.gen_range(0..n + 1) };
        if a < n && agents[a].len() < max_blocks.max(1) {
            let d = den as i64;
            agents[a].push((rat(s as i64, d), rat(s as i64 + 1, d), int(rng.gen_range(1..=4))));
        }
    }
    CakeInstance::from_blocks(agents).expect("generated blocks are valid")
}

/// Binary items where each item has at most one interested agent and every
/// agent values at least one item.
pub fn disjoint_binary_instance<R: Rng>(rng: &mut R, n: usize, m: usize) -> DiscreteInstance {
    let m = m.max(n);
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let mut valued = vec![Vec::new(); n];
    for (t, &j) in items.iter().enumerate() {
        if t < n {
            valued[t].push(j);
        } else if let Some(a) = (rng.gen_range(0..=n) < n).then(|| rng.gen_range(0..n)) {
            valued[a].push(j);
        }
    }
    DiscreteInstance::binary(m, valued).expect("every agent values an item")
}

/// Small LP with integer data in `[-4,4]`, variables boxed in `[-bound, bound]`
/// and mixed relations.
pub fn small_lp<R: Rng>(rng: &mut R, vars: usize, constraints: usize, bound: i64) -> LinearProgram {
    let mut lp = LinearProgram::new(vars);
    lp.minimize((0..vars).map(|_| int(rng.gen_range(-4..=4))).collect());
    for v in 0..vars {
        lp.bound(v, Some(int(-bound)), Some(int(bound)));
    }
    for _ in 0..constraints {
        let mut coeffs: Vec<Rational> = (0..vars).map(|_| int(rng.gen_range(-4..=4))).collect();
        if coeffs.iter().all(Zero::is_zero) {
            coeffs[rng.gen_range(0..vars)] = int(1);
        }
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add(coeffs, relation, int(rng.gen_range(-6..=6)));
    }
    lp
}
