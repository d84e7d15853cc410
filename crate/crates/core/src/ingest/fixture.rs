use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IngestError;

/// The fifteen most polymorphous toned syllables of the reference dictionary.
pub const REFERENCE_TOP15: [(&str, u64); 15] = [
    ("yi4", 83),
    ("xi1", 76),
    ("bi4", 58),
    ("yu4", 57),
    ("fu2", 52),
    ("zhi4", 50),
    ("ji4", 48),
    ("li4", 47),
    ("yu2", 45),
    ("ji1", 43),
    ("qi2", 39),
    ("shi4", 39),
    ("jue2", 36),
    ("ji2", 34),
    ("hui4", 34),
];

/// Fitted Beta rank function of the reference dictionary (natural scale,
/// multiplied by the total to give expected counts).
const BETA_SCALE: f64 = 5.95e-6;
const BETA_RANK_EXPONENT: f64 = 0.324;
const BETA_TAIL_EXPONENT: f64 = 1.025;

/// Smallest middle count.
const MIDDLE_FLOOR: u64 = 2;
/// Total adjustments first touch only middle counts at or above this value,
/// the steep upper shoulder of the curve next to the top entries.
const ADJUST_BAND: u64 = 20;

/// Shape of the reconstructed syllable-to-character spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSpec {
    pub n_syllables: usize,
    pub total_characters: u64,
    /// Leading entries, copied verbatim, in descending count order.
    pub top: Vec<(String, u64)>,
    pub singleton_count: usize,
    pub median_target: u64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            n_syllables: 1280,
            total_characters: 9505,
            top: REFERENCE_TOP15.iter().map(|&(l, c)| (l.to_string(), c)).collect(),
            singleton_count: 203,
            median_target: 5,
            seed: 1,
        }
    }
}

impl FixtureSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

fn infeasible(msg: impl Into<String>) -> IngestError {
    IngestError::InfeasibleFixture(msg.into())
}

/// Builds the fixture: the `top` pairs verbatim, `singleton_count` ones at the
/// bottom, and a middle block following the fitted Beta rank function.
///
/// Middle counts are the Beta curve times the total, stochastically rounded
/// with the seeded generator and clipped to `[2, min top count]`. The two
/// central order statistics are then pinned to `median_target`, and the total
/// is matched by round-robin unit steps over the middle runs, first within
/// the `>= 20` shoulder, then anywhere that keeps rank order and the median.
/// Middle and singleton labels are `s` plus the zero-padded rank.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Vec<(String, i64)>, IngestError> {
    let n = spec.n_syllables;
    let n_top = spec.top.len();
    if spec.top.is_empty() || spec.top.windows(2).any(|w| w[0].1 < w[1].1) {
        return Err(infeasible("top entries must be non-empty and descending"));
    }
    let cap = spec.top[n_top - 1].1;
    if cap < MIDDLE_FLOOR {
        return Err(infeasible("top counts must exceed the middle floor"));
    }
    if n <= n_top + spec.singleton_count {
        return Err(infeasible("no room for middle entries"));
    }
    let n_mid = n - n_top - spec.singleton_count;
    let top_sum: u64 = spec.top.iter().map(|t| t.1).sum();
    let fixed = top_sum + spec.singleton_count as u64;
    let target = spec
        .total_characters
        .checked_sub(fixed)
        .ok_or_else(|| infeasible("total below fixed entries"))?;
    if target < MIDDLE_FLOOR * n_mid as u64 || target > cap * n_mid as u64 {
        return Err(infeasible(format!("middle sum {target} unreachable with {n_mid} counts in [{MIDDLE_FLOOR}, {cap}]")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mid: Vec<u64> = (n_top + 1..=n_top + n_mid)
        .map(|r| {
            let expected = BETA_SCALE * ((n + 1 - r) as f64).powf(BETA_TAIL_EXPONENT)
                / (r as f64).powf(BETA_RANK_EXPONENT)
                * spec.total_characters as f64;
            let floor = expected.floor();
            let up = rng.random::<f64>() < expected - floor;
            (floor as u64 + up as u64).clamp(MIDDLE_FLOOR, cap)
        })
        .collect();
    mid.sort_unstable_by(|a, b| b.cmp(a));

    // Median ranks (1-based, descending order) expressed as middle indices.
    let median_ranks: Vec<usize> = if n.is_multiple_of(2) { vec![n / 2, n / 2 + 1] } else { vec![n.div_ceil(2)] };
    let pinned: Vec<usize> = median_ranks
        .iter()
        .filter(|&&r| r > n_top && r <= n_top + n_mid)
        .map(|&r| r - n_top - 1)
        .collect();
    let m = spec.median_target;
    if pinned.len() == median_ranks.len() {
        if !(MIDDLE_FLOOR..=cap).contains(&m) {
            return Err(infeasible("median target outside middle range"));
        }
        let (first, last) = (pinned[0], pinned[pinned.len() - 1]);
        for (i, c) in mid.iter_mut().enumerate() {
            if i < first {
                *c = (*c).max(m);
            } else if i > last {
                *c = (*c).min(m);
            } else {
                *c = m;
            }
        }
    }

    let bounds = |i: usize| -> (u64, u64) {
        match (pinned.first(), pinned.last()) {
            (Some(&f), Some(&l)) if i >= f && i <= l => (m, m),
            (Some(&f), _) if i < f => (m, cap),
            (_, Some(&l)) if i > l => (MIDDLE_FLOOR, m),
            _ => (MIDDLE_FLOOR, cap),
        }
    };
    adjust_total(&mut mid, target, |i, _| bounds(i), ADJUST_BAND);
    adjust_total(&mut mid, target, |i, _| bounds(i), MIDDLE_FLOOR);
    if mid.iter().sum::<u64>() != target {
        return Err(infeasible("total unreachable under rank-order and median constraints"));
    }

    let mut all: Vec<u64> = spec.top.iter().map(|t| t.1).collect();
    all.extend(&mid);
    all.extend(std::iter::repeat_n(1, spec.singleton_count));
    let mut sorted = all.clone();
    sorted.sort_unstable();
    let twice_median = if n.is_multiple_of(2) { sorted[n / 2 - 1] + sorted[n / 2] } else { 2 * sorted[n / 2] };
    if twice_median != 2 * m {
        return Err(infeasible(format!("median {} differs from target {m}", twice_median as f64 / 2.0)));
    }

    let width = n.to_string().len().max(4);
    let mut out: Vec<(String, i64)> = spec.top.iter().map(|(l, c)| (l.clone(), *c as i64)).collect();
    for (i, &c) in all.iter().enumerate().skip(n_top) {
        out.push((format!("s{:0width$}", i + 1), c as i64));
    }
    Ok(out)
}

/// Moves the sum of the descending vector `v` toward `target` by unit steps,
/// one per run per pass, touching only values `>= band` and staying within
/// the per-index bounds. Decrements hit the last element of a run and
/// increments the first, so the vector stays descending.
fn adjust_total(v: &mut [u64], target: u64, bounds: impl Fn(usize, u64) -> (u64, u64), band: u64) {
    let mut sum: u64 = v.iter().sum();
    while sum != target {
        let shrink = sum > target;
        let mut moved = false;
        let mut i = 0;
        while i < v.len() && sum != target {
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            let at = if shrink { j } else { i };
            let (lo, hi) = bounds(at, v[at]);
            let ok_neighbours = if shrink {
                at + 1 == v.len() || v[at + 1] < v[at]
            } else {
                at == 0 || v[at - 1] > v[at]
            };
            if v[at] >= band && ok_neighbours {
                if shrink && v[at] > lo {
                    v[at] -= 1;
                    sum -= 1;
                    moved = true;
                } else if !shrink && v[at] < hi {
                    v[at] += 1;
                    sum += 1;
                    moved = true;
                }
            }
            i = j + 1;
        }
        if !moved {
            return;
        }
    }
}
