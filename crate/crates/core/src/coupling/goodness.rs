//! Good blocks: intervals where both paths are simultaneously inside excursions
//! that start from neighbouring contacts.

use super::dressed::DressedPath;

/// Checks `x ∈ τ^A`, `y = ` first contact of `B` at or after `x`, with no contact of
/// either path strictly between, and `ψ = 1` for both paths on `[x, y]`.
fn good_from(a: &DressedPath, b: &DressedPath, x: i64, hi: i64) -> bool {
    let j = b.contacts.partition_point(|&c| c < x);
    let Some(&y) = b.contacts.get(j) else { return false };
    if y > hi {
        return false;
    }
    let next_a = a.contacts.partition_point(|&c| c <= x);
    if a.contacts.get(next_a).is_some_and(|&c| c < y) {
        return false;
    }
    // ψ is constant on each gap, so the endpoints of [x, y] see every gap involved
    [x, y].iter().all(|&t| a.psi_at(t) == Some(true) && b.psi_at(t) == Some(true))
}

/// Whether each block `[l, r]` is good for the pair.
pub fn good_blocks(p1: &DressedPath, p2: &DressedPath, blocks: &[(i64, i64)]) -> Vec<bool> {
    blocks
        .iter()
        .map(|&(l, r)| {
            let scan = |a: &DressedPath, b: &DressedPath| {
                let lo = a.contacts.partition_point(|&c| c < l);
                a.contacts[lo..].iter().take_while(|&&x| x <= r).any(|&x| good_from(a, b, x, r))
            };
            scan(p1, p2) || scan(p2, p1)
        })
        .collect()
}

/// Disjoint blocks `{(ℓ−1)len + 1, …, ℓ len}` covering `{1, …, k}` (the last one may be shorter).
pub fn fixed_blocks(k: i64, len: i64) -> Vec<(i64, i64)> {
    let len = len.max(1);
    (0..k).step_by(len as usize).map(|l| (l + 1, (l + len).min(k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;

    fn naive_psi(p: &DressedPath, t: i64) -> Option<bool> {
        for i in 0..p.gap_count() {
            let (a, b) = p.gap(i);
            if a <= t && t < b {
                return Some(p.flags[i]);
            }
        }
        None
    }

    fn naive(p1: &DressedPath, p2: &DressedPath, (l, r): (i64, i64)) -> bool {
        for x in l..=r {
            for y in x..=r {
                let linked = (p1.contacts.contains(&x) && p2.contacts.contains(&y))
                    || (p2.contacts.contains(&x) && p1.contacts.contains(&y));
                if !linked {
                    continue;
                }
                let between = (x + 1..y).any(|t| p1.contacts.contains(&t) || p2.contacts.contains(&t));
                if between {
                    continue;
                }
                if (x..=y).all(|t| naive_psi(p1, t) == Some(true) && naive_psi(p2, t) == Some(true)) {
                    return true;
                }
            }
        }
        false
    }

    fn random_path<R: Rng>(rng: &mut R) -> DressedPath {
        let mut c = vec![rng.random_range(-4..=0)];
        while *c.last().unwrap() < 24 {
            let last = *c.last().unwrap();
            c.push(last + rng.random_range(1..=5));
        }
        let flags = (1..c.len()).map(|_| rng.random_bool(0.6)).collect();
        DressedPath::from_parts(c, flags, 4).unwrap()
    }

    #[test]
    fn matches_quadratic_scan() {
        let mut rng = seeds::rng(41);
        let blocks = fixed_blocks(20, 5);
        for _ in 0..1000 {
            let (p1, p2) = (random_path(&mut rng), random_path(&mut rng));
            let fast = good_blocks(&p1, &p2, &blocks);
            for (b, &g) in blocks.iter().zip(&fast) {
                assert_eq!(g, naive(&p1, &p2, *b), "{:?} {:?} {b:?}", p1, p2);
            }
        }
    }

    #[test]
    fn definition_examples() {
        let p1 = DressedPath::from_parts(vec![0, 3, 9], vec![true, true], 4).unwrap();
        let p2 = DressedPath::from_parts(vec![-2, 3, 7], vec![false, true], 4).unwrap();
        assert_eq!(good_blocks(&p1, &p2, &[(2, 4)]), vec![true]);
        let lonely = DressedPath::from_parts(vec![-10, 20], vec![true], 4).unwrap();
        assert_eq!(good_blocks(&p1, &lonely, &[(2, 8)]), vec![false]);
        assert_eq!(fixed_blocks(10, 4), vec![(1, 4), (5, 8), (9, 10)]);
    }
}
