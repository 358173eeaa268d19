//! Finding a tuple avoided by all the finitely supported obstruction
//! functions: the greedy coordinate-by-coordinate selection (last coordinate
//! first), an exhaustive scanning oracle, and the counting threshold that
//! guarantees greedy success.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::caps::AVOID_SCAN_CAP;
use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::modules::FinVec;
use crate::ring::RingHandle;

/// Functions `v_i` from the i-th projected tuple space into finitely
/// supported vectors over the full tuple space.
#[derive(Debug, Clone)]
pub struct AvoidanceProblem {
    ring: RingHandle,
    sets: Vec<IndexSet>,
    product: IndexSet,
    projected: Vec<IndexSet>,
    /// `values[i][proj_pos]` is the vector `v_i(s')`.
    values: Vec<Vec<FinVec>>,
}

impl AvoidanceProblem {
    pub fn new(ring: &RingHandle, sets: Vec<IndexSet>, values: Vec<Vec<FinVec>>) -> Result<Self> {
        let n = sets.len();
        if n == 0 || values.len() != n {
            return Err(Error::IndexMismatch(format!(
                "{} value families for {} sets",
                values.len(),
                n
            )));
        }
        let product = IndexSet::product(sets.clone());
        let mut projected = Vec::with_capacity(n);
        for (i, vals) in values.iter().enumerate() {
            let others: Vec<IndexSet> = sets
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, s)| s.clone())
                .collect();
            let p = IndexSet::product(others);
            if vals.len() != p.len() {
                return Err(Error::IndexMismatch(format!(
                    "v_{i} has {} vectors for a projected space of size {}",
                    vals.len(),
                    p.len()
                )));
            }
            for v in vals {
                if v.ring() != ring || v.index() != &product {
                    return Err(Error::IndexMismatch(
                        "avoidance values must live over the full tuple space".into(),
                    ));
                }
            }
            projected.push(p);
        }
        Ok(AvoidanceProblem {
            ring: ring.clone(),
            sets,
            product,
            projected,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn product(&self) -> &IndexSet {
        &self.product
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    fn encode(&self, coords: &[usize]) -> usize {
        if coords.len() == 1 {
            coords[0]
        } else {
            self.product.encode_product(coords)
        }
    }

    fn proj_pos(&self, i: usize, coords: &[usize]) -> usize {
        let mut pc = coords.to_vec();
        pc.remove(i);
        match pc.len() {
            0 => 0,
            1 => pc[0],
            _ => self.projected[i].encode_product(&pc),
        }
    }

    /// `v_i(p^n_i(coords))(coords)`.
    pub fn eval(&self, i: usize, coords: &[usize]) -> bool {
        let vp = &self.values[i][self.proj_pos(i, coords)];
        !vp.get(self.encode(coords)).is_zero()
    }

    /// True iff every obstruction vanishes at the tuple.
    pub fn avoided(&self, coords: &[usize]) -> bool {
        (0..self.n()).all(|i| !self.eval(i, coords))
    }

    /// Largest support of any coordinate slice of any value vector: the
    /// quantity the counting threshold bounds.
    pub fn max_slice_support(&self) -> usize {
        let mut max = 0usize;
        let n = self.n();
        for i in 0..n {
            for v in &self.values[i] {
                // bucket the support by the tuple with coordinate i dropped
                let mut buckets: std::collections::BTreeMap<Vec<usize>, usize> = Default::default();
                for (pos, _) in v.iter() {
                    let coords = if n == 1 {
                        vec![pos]
                    } else {
                        self.product.decode_product(pos)
                    };
                    let mut base = coords;
                    base.remove(i);
                    *buckets.entry(base).or_insert(0) += 1;
                }
                max = max.max(buckets.values().copied().max().unwrap_or(0));
            }
        }
        max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Greedy,
    Exhaustive,
}

/// What happened at one level of the greedy recursion.
#[derive(Debug, Clone)]
pub struct LevelTrace {
    pub level: usize,
    pub domain_size: usize,
    pub excluded: usize,
    pub chosen: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct AvoidanceResult {
    pub witness: Option<Vec<usize>>,
    pub method: SearchMethod,
    pub levels: Vec<LevelTrace>,
    /// Level (1-based coordinate count) at which the greedy search ran out of
    /// candidates, when it failed.
    pub failed_at: Option<usize>,
}

/// The greedy selection: fix the last coordinate first, choosing the least
/// element whose column avoids `v_n` against every prefix, then recurse on
/// the restricted problem. Failure (an exhausted level) is an answer, not an
/// error.
pub fn find_avoiding_greedy(p: &AvoidanceProblem) -> AvoidanceResult {
    let n = p.n();
    let sizes: Vec<usize> = p.sets.iter().map(|s| s.len()).collect();
    let mut tail: Vec<usize> = Vec::new(); // chosen s_{m+1}..s_n, reversed
    let mut levels = Vec::with_capacity(n);
    for m in (0..n).rev() {
        // exclude every candidate c with v_m nonzero at (prefix, c, tail)
        let mut excluded = vec![false; sizes[m]];
        let mut prefix = vec![0usize; m];
        loop {
            for (c, ex) in excluded.iter_mut().enumerate() {
                if *ex {
                    continue;
                }
                let mut coords = prefix.clone();
                coords.push(c);
                coords.extend(tail.iter().rev());
                if p.eval(m, &coords) {
                    *ex = true;
                }
            }
            // odometer over the prefix
            let mut i = m;
            let mut done = true;
            while i > 0 {
                i -= 1;
                prefix[i] += 1;
                if prefix[i] < sizes[i] {
                    done = false;
                    break;
                }
                prefix[i] = 0;
            }
            if done {
                break;
            }
        }
        let excluded_count = excluded.iter().filter(|&&e| e).count();
        let chosen = excluded.iter().position(|&e| !e);
        levels.push(LevelTrace {
            level: m + 1,
            domain_size: sizes[m],
            excluded: excluded_count,
            chosen,
        });
        match chosen {
            Some(c) => tail.push(c),
            None => {
                return AvoidanceResult {
                    witness: None,
                    method: SearchMethod::Greedy,
                    levels,
                    failed_at: Some(m + 1),
                }
            }
        }
    }
    let witness: Vec<usize> = tail.into_iter().rev().collect();
    debug_assert!(p.avoided(&witness));
    AvoidanceResult {
        witness: Some(witness),
        method: SearchMethod::Greedy,
        levels,
        failed_at: None,
    }
}

/// Scans the tuple space in lexicographic order and returns the first
/// avoiding tuple.
pub fn find_avoiding_exhaustive(p: &AvoidanceProblem) -> Result<AvoidanceResult> {
    let total = p.product.len();
    if total > AVOID_SCAN_CAP {
        return Err(Error::CapExceeded(format!(
            "{total} tuples exceed the exhaustive scan cap"
        )));
    }
    let n = p.n();
    let sizes: Vec<usize> = p.sets.iter().map(|s| s.len()).collect();
    let mut coords = vec![0usize; n];
    loop {
        if p.avoided(&coords) {
            return Ok(AvoidanceResult {
                witness: Some(coords),
                method: SearchMethod::Exhaustive,
                levels: vec![],
                failed_at: None,
            });
        }
        let mut i = n;
        let mut done = true;
        while i > 0 {
            i -= 1;
            coords[i] += 1;
            if coords[i] < sizes[i] {
                done = false;
                break;
            }
            coords[i] = 0;
        }
        if done {
            return Ok(AvoidanceResult {
                witness: None,
                method: SearchMethod::Exhaustive,
                levels: vec![],
                failed_at: None,
            });
        }
    }
}

/// The finite counting condition: with every slice support bounded by `k`,
/// level `m` excludes at most `k · prod_{j<m} |S_j|` candidates, so
/// `|S_m| > k · prod_{j<m} |S_j|` at every level guarantees greedy success.
pub fn threshold_check(p: &AvoidanceProblem, k: usize) -> bool {
    let sizes: Vec<usize> = p.sets.iter().map(|s| s.len()).collect();
    for m in 0..p.n() {
        let prefix_product: usize = sizes[..m].iter().product();
        match k.checked_mul(prefix_product) {
            Some(bound) if sizes[m] > bound => {}
            _ => return false,
        }
    }
    true
}

/// Seeded random instance with every value supported on at most `k` points
/// (hence all slice supports at most `k`). Values are nonzero ring samples.
pub fn random_instance(
    ring: &RingHandle,
    sizes: &[usize],
    k: usize,
    seed: u64,
) -> Result<AvoidanceProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<IndexSet> = sizes.iter().map(|&s| IndexSet::numbered(s)).collect();
    let product = IndexSet::product(sets.clone());
    let n = sets.len();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let proj_size: usize = sizes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &s)| s)
            .product();
        let mut per_proj = Vec::with_capacity(proj_size);
        for _ in 0..proj_size {
            let mut v = FinVec::zero(ring, &product);
            for _ in 0..k {
                let pos = rng.gen_range(0..product.len());
                // a nonzero coefficient on a random basis element
                let dim = ring.dim().ok_or(Error::InfiniteDimensional)?;
                let b = rng.gen_range(0..dim) as u32;
                let c = rng.gen_range(1..ring.p()) as u8;
                v.set(pos, ring.basis_elem(b).scale_fp(c));
            }
            per_proj.push(v);
        }
        values.push(per_proj);
    }
    AvoidanceProblem::new(ring, sets, values)
}

/// A covering instance with no avoiding tuple: sizes are `{0,1}` on the
/// first n-1 coordinates and `n+1` values on the last; `v_n` covers last
/// coordinate 0 and 1, and each `v_i` (i < n) covers one larger value. Every
/// slice support is at most 2, and the threshold check fails at `k = 2`.
pub fn covering_instance(ring: &RingHandle, n: usize) -> Result<AvoidanceProblem> {
    if n == 0 {
        return Err(Error::EmptySpec);
    }
    let mut sizes = vec![2usize; n - 1];
    sizes.push(n + 1);
    let sets: Vec<IndexSet> = sizes.iter().map(|&s| IndexSet::numbered(s)).collect();
    let product = IndexSet::product(sets.clone());
    let one = ring.one();
    let mut values: Vec<Vec<FinVec>> = Vec::with_capacity(n);
    for i in 0..n {
        let proj_size: usize = sizes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &s)| s)
            .product();
        values.push(vec![FinVec::zero(ring, &product); proj_size]);
    }
    // enumerate all tuples once and write the covering supports
    let mut coords = vec![0usize; n];
    loop {
        let last = coords[n - 1];
        let covering_i = if last <= 1 {
            n - 1 // v_n handles last coordinate in {0,1}
        } else {
            last - 2 // v_{last-2} handles the value `last`
        };
        let mut pc = coords.clone();
        pc.remove(covering_i);
        let proj_pos = match pc.len() {
            0 => 0,
            1 => pc[0],
            _ => {
                let others: Vec<IndexSet> = sets
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != covering_i)
                    .map(|(_, s)| s.clone())
                    .collect();
                IndexSet::product(others).encode_product(&pc)
            }
        };
        let pos = if n == 1 {
            coords[0]
        } else {
            product.encode_product(&coords)
        };
        values[covering_i][proj_pos].set(pos, one.clone());
        let mut i = n;
        let mut done = true;
        while i > 0 {
            i -= 1;
            coords[i] += 1;
            if coords[i] < sizes[i] {
                done = false;
                break;
            }
            coords[i] = 0;
        }
        if done {
            break;
        }
    }
    AvoidanceProblem::new(ring, sets, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingDescriptor};

    fn f2() -> RingHandle {
        make_ring(&RingDescriptor::ProductFp { p: 2, m: 1 }).unwrap()
    }

    fn single_set_problem(support: &[usize], size: usize) -> AvoidanceProblem {
        let r = f2();
        let s = IndexSet::numbered(size);
        let mut v = FinVec::zero(&r, &s);
        for &pos in support {
            v.set(pos, r.one());
        }
        AvoidanceProblem::new(&r, vec![s], vec![vec![v]]).unwrap()
    }

    #[test]
    fn greedy_picks_least_unexcluded() {
        let p = single_set_problem(&[0], 2);
        let res = find_avoiding_greedy(&p);
        assert_eq!(res.witness, Some(vec![1]));
        assert_eq!(res.levels[0].excluded, 1);
    }

    #[test]
    fn greedy_fails_when_covered() {
        let p = single_set_problem(&[0], 1);
        let res = find_avoiding_greedy(&p);
        assert!(res.witness.is_none());
        assert_eq!(res.failed_at, Some(1));
        let ex = find_avoiding_exhaustive(&p).unwrap();
        assert!(ex.witness.is_none());
    }

    #[test]
    fn greedy_and_exhaustive_agree_on_singletons() {
        // n=2, |S_i|=3, each v_i(s') supported on one point
        let r = f2();
        let s = IndexSet::numbered(3);
        let product = IndexSet::product(vec![s.clone(), s.clone()]);
        let mut values = vec![vec![], vec![]];
        for (i, vals) in values.iter_mut().enumerate() {
            for proj in 0..3usize {
                let mut v = FinVec::zero(&r, &product);
                let coords = if i == 0 { [proj, proj] } else { [proj, 0] };
                v.set(product.encode_product(&coords), r.one());
                vals.push(v);
            }
        }
        let p = AvoidanceProblem::new(&r, vec![s.clone(), s], values).unwrap();
        let g = find_avoiding_greedy(&p);
        let e = find_avoiding_exhaustive(&p).unwrap();
        assert_eq!(g.witness, Some(vec![0, 1]));
        assert!(e.witness.is_some());
        assert!(p.avoided(g.witness.as_ref().unwrap()));
        assert!(p.avoided(e.witness.as_ref().unwrap()));
    }

    #[test]
    fn all_zero_gives_least_tuple() {
        let r = f2();
        let s = IndexSet::numbered(2);
        let product = IndexSet::product(vec![s.clone(), s.clone()]);
        let values = vec![
            vec![FinVec::zero(&r, &product); 2],
            vec![FinVec::zero(&r, &product); 2],
        ];
        let p = AvoidanceProblem::new(&r, vec![s.clone(), s], values).unwrap();
        let e = find_avoiding_exhaustive(&p).unwrap();
        assert_eq!(e.witness, Some(vec![0, 0]));
        let g = find_avoiding_greedy(&p);
        assert_eq!(g.witness, Some(vec![0, 0]));
    }

    #[test]
    fn threshold_examples() {
        let r = f2();
        // n=1, k=1, |S|=2: 2 > 1
        let p = single_set_problem(&[0], 2);
        assert!(threshold_check(&p, 1));
        // n=2, k=1, sizes (2,3) reordered: threshold wants
        // |S_1| > 1 and |S_2| > |S_1|
        let inst = random_instance(&r, &[2, 3], 1, 7).unwrap();
        assert!(threshold_check(&inst, 1));
        assert!(find_avoiding_greedy(&inst).witness.is_some());
        // n=2, k=2, sizes (2,4): 4 is not > 2·2
        let inst = random_instance(&r, &[2, 4], 2, 7).unwrap();
        assert!(!threshold_check(&inst, 2));
    }

    #[test]
    fn covering_instances_have_no_witness() {
        let r = f2();
        for n in 1..=3usize {
            let p = covering_instance(&r, n).unwrap();
            assert!(p.max_slice_support() <= 2, "n={n}");
            assert!(!threshold_check(&p, 2), "n={n}");
            let e = find_avoiding_exhaustive(&p).unwrap();
            assert!(e.witness.is_none(), "n={n}");
            let g = find_avoiding_greedy(&p);
            assert!(g.witness.is_none(), "n={n}");
        }
    }

    #[test]
    fn guarantee_holds_on_random_instances() {
        let r = f2();
        for seed in 0..200u64 {
            let inst = random_instance(&r, &[2, 3], 1, seed).unwrap();
            if threshold_check(&inst, 1) {
                let g = find_avoiding_greedy(&inst);
                assert!(g.witness.is_some(), "seed {seed}");
                assert!(inst.avoided(g.witness.as_ref().unwrap()));
            }
        }
    }

    #[test]
    fn max_slice_support_counts_lines() {
        let r = f2();
        let s = IndexSet::numbered(3);
        let product = IndexSet::product(vec![s.clone(), s.clone()]);
        // v_1(s') supported on a full column: slice support 3 along coord 0
        let mut v = FinVec::zero(&r, &product);
        for c in 0..3 {
            v.set(product.encode_product(&[c, 1]), r.one());
        }
        let values = vec![
            vec![v, FinVec::zero(&r, &product), FinVec::zero(&r, &product)],
            vec![FinVec::zero(&r, &product); 3],
        ];
        let p = AvoidanceProblem::new(&r, vec![s.clone(), s], values).unwrap();
        assert_eq!(p.max_slice_support(), 3);
    }
}
