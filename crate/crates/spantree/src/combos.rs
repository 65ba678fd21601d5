//! Internal helpers: k-subset enumeration, binomial counting, uniform
//! subset sampling, and exact comparison of `count * d` against a count
//! for real `d`.

use std::cmp::Ordering;

use rand::Rng;

/// Binomial coefficient, saturating at `u64::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` for every k-subset of `pool` (indices into `pool`, items passed
/// by value) in lexicographic order over `pool` positions. Stops early when
/// `f` returns `false`.
pub(crate) fn for_each_subset<F>(pool: &[usize], k: usize, f: &mut F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    if k > pool.len() {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
    loop {
        if !f(&buf) {
            return false;
        }
        // advance the index vector
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] != i + pool.len() - k {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = pool[idx[j]];
        }
    }
}

/// Uniform random k-subset of `0..n`, returned sorted.
pub(crate) fn sample_subset<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    // Floyd's algorithm
    let mut chosen = std::collections::BTreeSet::new();
    for j in n - k..n {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

/// Uniform random k-subset of `pool` (assumed sorted), returned sorted.
pub(crate) fn sample_subset_of<R: Rng>(rng: &mut R, pool: &[usize], k: usize) -> Vec<usize> {
    let picks = sample_subset(rng, pool.len(), k);
    picks.into_iter().map(|i| pool[i]).collect()
}

/// Compares `factor * d` with `rhs` exactly, treating the f64 `d` as the
/// rational number it encodes. Avoids float rounding at decision boundaries
/// like `|N(X)| >= d * |X|`.
pub(crate) fn cmp_scaled(factor: u64, d: f64, rhs: u64) -> Ordering {
    debug_assert!(d.is_finite() && d >= 0.0);
    if factor == 0 || d == 0.0 {
        return 0.cmp(&rhs);
    }
    // d = mant * 2^exp with mant, exp integers
    let bits = d.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let raw_mant = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if raw_exp == 0 {
        (raw_mant, -1074i64)
    } else {
        (raw_mant | (1 << 52), raw_exp - 1075)
    };
    let lhs = factor as u128 * mant as u128; // <= 2^64 * 2^53, fits u128
    let rhs = rhs as u128;
    if exp >= 0 {
        match lhs.checked_shl(exp.min(127) as u32) {
            Some(shifted) if exp <= 127 => shifted.cmp(&rhs),
            _ => Ordering::Greater, // lhs != 0 shifted past 2^127 dwarfs any u64
        }
    } else {
        let shift = -exp;
        match rhs.checked_shl(shift.min(127) as u32) {
            Some(shifted) if shift <= 127 => lhs.cmp(&shifted),
            _ => {
                if rhs == 0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }
}

/// `count >= d * factor`, compared exactly.
pub(crate) fn count_at_least(count: u64, d: f64, factor: u64) -> bool {
    cmp_scaled(factor, d, count) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(60, 5), 5_461_512);
    }

    #[test]
    fn subset_enumeration_counts() {
        let pool: Vec<usize> = (0..6).collect();
        let mut count = 0;
        for_each_subset(&pool, 3, &mut |s| {
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            count += 1;
            true
        });
        assert_eq!(count, 20);

        let mut seen = 0;
        let done = for_each_subset(&pool, 2, &mut |_| {
            seen += 1;
            seen < 5
        });
        assert!(!done);
        assert_eq!(seen, 5);

        // k = 0 visits the empty subset once
        let mut empties = 0;
        for_each_subset(&pool, 0, &mut |s| {
            assert!(s.is_empty());
            empties += 1;
            true
        });
        assert_eq!(empties, 1);
    }

    #[test]
    fn sampled_subsets_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = sample_subset(&mut rng, 10, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&v| v < 10));
        }
    }

    #[test]
    fn exact_scaled_comparison() {
        assert_eq!(cmp_scaled(3, 2.0, 6), Ordering::Equal);
        assert_eq!(cmp_scaled(3, 2.0, 7), Ordering::Less);
        assert_eq!(cmp_scaled(3, 2.0, 5), Ordering::Greater);
        // 0.1 is slightly above 1/10 in binary, so 10 * 0.1 > 1
        assert_eq!(cmp_scaled(10, 0.1, 1), Ordering::Greater);
        assert_eq!(cmp_scaled(0, 5.0, 0), Ordering::Equal);
        assert_eq!(cmp_scaled(1, 0.0, 1), Ordering::Less);
        assert!(count_at_least(6, 2.0, 3));
        assert!(!count_at_least(5, 2.0, 3));
        // huge exponents fall back to the dominance rules
        assert_eq!(cmp_scaled(1, f64::MAX, 1), Ordering::Greater);
        assert_eq!(cmp_scaled(1, f64::MIN_POSITIVE, 1), Ordering::Less);
    }
}
