use super::idla::{run_idla, GrowthHistory, IdlaOptions};
use crate::error::Result;
use crate::lattice::Site;
use std::collections::BTreeSet;

/// Diaconis-Fulton smash sum of two finite site sets: start from `A union B`
/// and release one walker from each site of `A intersect B`, in lexicographic
/// order, each settling at the first site outside the current set.
pub fn smash_sum(a: &[Site], b: &[Site], m: u32, seed: u64, opts: IdlaOptions) -> Result<GrowthHistory> {
    let sa: BTreeSet<Site> = a.iter().copied().collect();
    let sb: BTreeSet<Site> = b.iter().copied().collect();
    let union: Vec<Site> = sa.union(&sb).copied().collect();
    let inter: Vec<Site> = sa.intersection(&sb).copied().collect();
    run_idla(&union, &inter, m, seed, opts)
}
