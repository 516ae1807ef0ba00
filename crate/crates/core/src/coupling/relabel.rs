//! Pairing of first-class particles after a joint birth.
//!
//! Positions are in half-steps. A joint birth at EPCS site `x` and auxiliary
//! site `xp` moves every particle left of the birth site half a step left,
//! every other particle half a step right, and adds a particle half a step
//! left of the birth site in each marginal.

#[inline]
fn moved(p: i64, site: i64) -> i64 {
    if p < site {
        p - 1
    } else {
        p + 1
    }
}

/// New pairs listed by the relabeling recipe, from the old pairs `(z, w)`
/// given in label order. Output is sorted by EPCS position.
pub fn recipe_pairs(pairs: &[(i64, i64)], x: i64, xp: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(pairs.len() + 1);
    let mut below_above = Vec::new();
    let mut above_below = Vec::new();
    for &(z, w) in pairs {
        if z < x && w >= xp {
            below_above.push((z, w));
        } else if z >= x && w < xp {
            above_below.push((z, w));
        } else {
            out.push((moved(z, x), moved(w, xp)));
        }
    }
    if !below_above.is_empty() {
        let l = below_above.len();
        out.push((below_above[0].0 - 1, xp - 1));
        for j in 1..l {
            out.push((below_above[j].0 - 1, below_above[j - 1].1 + 1));
        }
        out.push((x - 1, below_above[l - 1].1 + 1));
    } else if !above_below.is_empty() {
        let l = above_below.len();
        out.push((x - 1, above_below[0].1 - 1));
        for j in 1..l {
            out.push((above_below[j - 1].0 + 1, above_below[j].1 - 1));
        }
        out.push((above_below[l - 1].0 + 1, xp - 1));
    } else {
        out.push((x - 1, xp - 1));
    }
    out.sort_unstable();
    out
}

/// Pairs obtained by moving both particle lists, inserting the two new
/// particles and matching the `k`-th particle of one list with the `k`-th of the other.
pub fn rank_pairs(epcs: &[i64], aux: &[i64], x: i64, xp: i64) -> Vec<(i64, i64)> {
    let mut a: Vec<i64> = epcs.iter().map(|&z| moved(z, x)).collect();
    a.push(x - 1);
    a.sort_unstable();
    let mut b: Vec<i64> = aux.iter().map(|&w| moved(w, xp)).collect();
    b.push(xp - 1);
    b.sort_unstable();
    a.into_iter().zip(b).collect()
}

/// Largest distance between paired positions (half-steps).
pub fn max_distance(pairs: &[(i64, i64)]) -> i64 {
    pairs.iter().map(|(z, w)| (z - w).abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subsets(
        universe: &[i64],
        max: usize,
        out: &mut Vec<Vec<i64>>,
        cur: &mut Vec<i64>,
        from: usize,
    ) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        for i in from..universe.len() {
            cur.push(universe[i]);
            subsets(universe, max, out, cur, i + 1);
            cur.pop();
        }
    }

    /// Every layout of up to four pairs in a width-10 window, every birth site,
    /// both relative lattices: the recipe equals rank matching and never
    /// increases the largest pair distance.
    #[test]
    fn recipe_equals_rank_matching_exhaustively() {
        let integers: Vec<i64> = (0..10).map(|k| 2 * k).collect();
        let halves: Vec<i64> = (0..10).map(|k| 2 * k + 1).collect();
        let mut zs = Vec::new();
        subsets(&integers, 4, &mut zs, &mut Vec::new(), 0);
        let mut checked = 0u64;
        for offset in [0i64, 1] {
            let lattice_w = if offset == 0 { &integers } else { &halves };
            let mut ws = Vec::new();
            subsets(lattice_w, 4, &mut ws, &mut Vec::new(), 0);
            for z in &zs {
                if z.is_empty() {
                    continue;
                }
                for w in ws.iter().filter(|w| w.len() == z.len()) {
                    let pairs: Vec<(i64, i64)> = z.iter().copied().zip(w.iter().copied()).collect();
                    let before = max_distance(&pairs);
                    for x in (0..=20).step_by(2) {
                        let xp = x + offset;
                        let recipe = recipe_pairs(&pairs, x, xp);
                        let ranked = rank_pairs(z, w, x, xp);
                        assert_eq!(recipe, ranked, "pairs {pairs:?}, x {x}, x' {xp}");
                        assert!(max_distance(&recipe) <= before);
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1_000_000);
    }

    #[test]
    fn crossing_example() {
        // EPCS particles at 0, 2; auxiliary partners at 5, 7 (half-steps); birth at x = 4, x' = 5.
        let pairs = [(0, 5), (2, 7)];
        let out = recipe_pairs(&pairs, 4, 5);
        assert_eq!(out, vec![(-1, 4), (1, 6), (3, 8)]);
    }
}
