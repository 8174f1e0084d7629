//! Fixed-capacity replay memory.
//!
//! The buffer fills by classic reservoir sampling (algorithm R), serves
//! uniform without-replacement retrieval, and supports a per-task rewrite:
//! given integer quotas per class, the slots currently held by one task are
//! replaced by policy-chosen samples while every other task's slots stay put.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;

use crate::analytics::{ClassScore, SampleScore};
use crate::error::{Error, Result};
use crate::policy::SampleStrategy;
use crate::stream::Sample;

/// Replay memory with reservoir semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    capacity: usize,
    slots: Vec<Sample>,
    /// Total samples ever offered to the reservoir.
    stream_count: usize,
}

impl Buffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("buffer capacity must be >= 1"));
        }
        Ok(Buffer { capacity, slots: Vec::new(), stream_count: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn stream_count(&self) -> usize {
        self.stream_count
    }

    pub fn slots(&self) -> &[Sample] {
        &self.slots
    }

    /// Offers a batch to the reservoir: while not full, append; afterwards
    /// the i-th stream item (1-based) replaces a uniform slot with
    /// probability capacity/i.
    pub fn reservoir_update<R: Rng>(&mut self, batch: &[Sample], rng: &mut R) {
        for sample in batch {
            self.stream_count += 1;
            if self.slots.len() < self.capacity {
                self.slots.push(sample.clone());
            } else {
                let j = rng.random_range(0..self.stream_count);
                if j < self.capacity {
                    self.slots[j] = sample.clone();
                }
            }
        }
    }

    /// Draws `q` slots uniformly without replacement (all slots, shuffled,
    /// when `q >= len`). An empty buffer yields an empty batch, which is the
    /// signal to skip replay.
    pub fn random_retrieval<R: Rng>(&self, q: usize, rng: &mut R) -> Vec<Sample> {
        let take = q.min(self.slots.len());
        let mut indices: Vec<usize> = (0..self.slots.len()).collect();
        // partial Fisher-Yates: the first `take` entries are a uniform draw
        for i in 0..take {
            let j = rng.random_range(i..indices.len());
            indices.swap(i, j);
        }
        indices[..take].iter().map(|&i| self.slots[i].clone()).collect()
    }

    /// Number of slots currently owned by task `t`.
    pub fn task_share(&self, task: usize) -> usize {
        self.slots.iter().filter(|s| s.task == task).count()
    }

    /// Per-class composition of task `t`'s slots.
    pub fn task_class_counts(&self, task: usize) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for s in self.slots.iter().filter(|s| s.task == task) {
            *counts.entry(s.label).or_insert(0) += 1;
        }
        counts
    }

    /// Replaces the slots of task `t` with `chosen`, in slot order. Slot
    /// count, other tasks' slots, and the stream count are untouched.
    pub fn casp_rewrite(&mut self, task: usize, chosen: Vec<Sample>) -> Result<()> {
        let share = self.task_share(task);
        if chosen.len() != share {
            return Err(Error::invalid(format!(
                "task {task} holds {share} slots but {} replacements were given",
                chosen.len()
            )));
        }
        if chosen.iter().any(|s| s.task != task) {
            return Err(Error::invalid("replacement samples must belong to the rewritten task"));
        }
        let mut replacements = chosen.into_iter();
        for slot in self.slots.iter_mut().filter(|s| s.task == task) {
            *slot = replacements.next().expect("length checked above");
        }
        Ok(())
    }

    /// One row per slot: `slot,sample_id,task,class`.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, s) in self.slots.iter().enumerate() {
            writeln!(w, "{},{},{},{}", i, s.id, s.task, s.label)?;
        }
        Ok(())
    }
}

/// Integer buffer quotas for one task, summing exactly to the task's share.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub task: usize,
    pub quotas: BTreeMap<usize, usize>,
    pub total: usize,
}

impl AllocationPlan {
    pub fn quota(&self, class: usize) -> usize {
        self.quotas.get(&class).copied().unwrap_or(0)
    }
}

/// Largest-remainder rounding of nonnegative real shares to integers summing
/// to `total`. Remainder ties break toward the lower class id.
fn largest_remainder(shares: &[(usize, f64)], total: usize) -> BTreeMap<usize, usize> {
    let mut quotas: BTreeMap<usize, usize> = BTreeMap::new();
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(shares.len());
    let mut assigned = 0usize;
    for &(class, share) in shares {
        let floor = share.floor();
        let q = floor as usize;
        quotas.insert(class, q);
        assigned += q;
        remainders.push((class, share - floor));
    }
    let mut leftover = total.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (class, _) in remainders {
        if leftover == 0 {
            break;
        }
        *quotas.get_mut(&class).unwrap() += 1;
        leftover -= 1;
    }
    quotas
}

/// Splits `total` buffer slots across classes proportionally to nonnegative
/// weights, rounding by largest remainder. Quotas are capped at each class's
/// available sample count; the surplus is redistributed among uncapped
/// classes, again proportionally, until stable. All weights zero falls back
/// to an equal split.
pub fn allocate_quota_weighted(
    task: usize,
    weights: &[(usize, f64)],
    total: usize,
    class_counts: &BTreeMap<usize, usize>,
) -> Result<AllocationPlan> {
    if weights.is_empty() {
        return Err(Error::invalid("no classes to allocate over"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(class, w) in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!("class {class}: weight must be finite and >= 0")));
        }
        if !seen.insert(class) {
            return Err(Error::invalid(format!("class {class} listed twice")));
        }
        if !class_counts.contains_key(&class) {
            return Err(Error::invalid(format!("class {class} has no sample count")));
        }
    }
    let available: usize = weights.iter().map(|(c, _)| class_counts[c]).sum();
    if total > available {
        return Err(Error::invalid(format!(
            "cannot allocate {total} slots over {available} available samples"
        )));
    }

    let mut quotas: BTreeMap<usize, usize> = BTreeMap::new();
    let mut active: Vec<(usize, f64)> = weights.to_vec();
    let mut budget = total;
    while !active.is_empty() {
        let weight_sum: f64 = active.iter().map(|(_, w)| w).sum();
        let shares: Vec<(usize, f64)> = if weight_sum > 0.0 {
            active.iter().map(|&(c, w)| (c, w / weight_sum * budget as f64)).collect()
        } else {
            // degenerate: every class equally weighted
            active.iter().map(|&(c, _)| (c, budget as f64 / active.len() as f64)).collect()
        };
        let round = largest_remainder(&shares, budget);
        let over: Vec<usize> = round
            .iter()
            .filter(|&(c, &q)| q > class_counts[c])
            .map(|(&c, _)| c)
            .collect();
        if over.is_empty() {
            for (c, q) in round {
                quotas.insert(c, q);
            }
            budget = 0;
            break;
        }
        for c in over {
            let cap = class_counts[&c];
            quotas.insert(c, cap);
            budget -= cap;
            active.retain(|&(a, _)| a != c);
        }
    }
    debug_assert_eq!(budget + quotas.values().sum::<usize>(), total + budget);
    debug_assert_eq!(quotas.values().sum::<usize>(), total);
    Ok(AllocationPlan { task, quotas, total })
}

/// Quotas proportional to class vulnerability.
pub fn allocate_quota(
    task: usize,
    scores: &[ClassScore],
    total: usize,
    class_counts: &BTreeMap<usize, usize>,
) -> Result<AllocationPlan> {
    let weights: Vec<(usize, f64)> =
        scores.iter().map(|s| (s.class_id, s.vulnerability)).collect();
    allocate_quota_weighted(task, &weights, total, class_counts)
}

/// Picks each class's quota out of `task_samples` according to the sample
/// strategy. Score-driven strategies break ties toward the lower sample id;
/// Random draws uniformly without replacement.
pub fn select_samples<R: Rng>(
    task_samples: &[Sample],
    scores: &[SampleScore],
    plan: &AllocationPlan,
    strategy: SampleStrategy,
    rng: &mut R,
) -> Result<Vec<Sample>> {
    let score_by_id: BTreeMap<usize, &SampleScore> =
        scores.iter().map(|s| (s.sample_id, s)).collect();
    let mut by_class: BTreeMap<usize, Vec<&Sample>> = BTreeMap::new();
    for s in task_samples {
        by_class.entry(s.label).or_default().push(s);
    }

    let mut chosen = Vec::with_capacity(plan.total);
    for (&class, &quota) in &plan.quotas {
        if quota == 0 {
            continue;
        }
        let candidates = by_class.get_mut(&class).ok_or_else(|| {
            Error::invalid(format!("class {class} has a quota but no samples"))
        })?;
        if quota > candidates.len() {
            return Err(Error::invalid(format!(
                "class {class}: quota {quota} exceeds population {}",
                candidates.len()
            )));
        }
        match strategy {
            SampleStrategy::Random => {
                for i in 0..quota {
                    let j = rng.random_range(i..candidates.len());
                    candidates.swap(i, j);
                }
                chosen.extend(candidates[..quota].iter().map(|s| (*s).clone()));
            }
            _ => {
                let mut ranked: Vec<(&Sample, f64)> = candidates
                    .iter()
                    .map(|s| {
                        let score = score_by_id.get(&s.id).ok_or_else(|| {
                            Error::invalid(format!("sample {} has no score", s.id))
                        })?;
                        let key = match strategy {
                            SampleStrategy::Challenging => -score.vulnerability,
                            SampleStrategy::Hard => score.mean_confidence,
                            SampleStrategy::Simple => -score.mean_confidence,
                            SampleStrategy::Random => unreachable!(),
                        };
                        Ok((*s, key))
                    })
                    .collect::<Result<_>>()?;
                ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id.cmp(&b.0.id)));
                chosen.extend(ranked[..quota].iter().map(|(s, _)| (*s).clone()));
            }
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sub_rng;
    use proptest::prelude::*;

    fn sample(id: usize, task: usize, label: usize) -> Sample {
        Sample { id, features: vec![id as f64], label, task }
    }

    fn stream(task: usize, label: usize, ids: std::ops::Range<usize>) -> Vec<Sample> {
        ids.map(|i| sample(i, task, label)).collect()
    }

    #[test]
    fn reservoir_keeps_everything_under_capacity() {
        let mut buf = Buffer::new(10).unwrap();
        let mut rng = sub_rng(1, "t");
        buf.reservoir_update(&stream(0, 0, 0..10), &mut rng);
        assert_eq!(buf.len(), 10);
        let ids: Vec<usize> = buf.slots().iter().map(|s| s.id).collect();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn capacity_one_keeps_second_item_half_the_time() {
        let mut kept_second = 0usize;
        let trials = 20_000;
        for t in 0..trials {
            let mut buf = Buffer::new(1).unwrap();
            let mut rng = sub_rng(t as u64, "res");
            buf.reservoir_update(&stream(0, 0, 0..2), &mut rng);
            if buf.slots()[0].id == 1 {
                kept_second += 1;
            }
        }
        let freq = kept_second as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn reservoir_inclusion_is_uniform() {
        let trials = 20_000usize;
        let capacity = 10usize;
        let n = 100usize;
        let mut hits = vec![0usize; n];
        for t in 0..trials {
            let mut buf = Buffer::new(capacity).unwrap();
            let mut rng = sub_rng(t as u64, "uniformity");
            buf.reservoir_update(&stream(0, 0, 0..n), &mut rng);
            for s in buf.slots() {
                hits[s.id] += 1;
            }
        }
        let p = capacity as f64 / n as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (i, &h) in hits.iter().enumerate() {
            let freq = h as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "item {i}: frequency {freq} vs expected {p} (3 sigma = {})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn retrieval_of_everything_is_a_shuffle() {
        let mut buf = Buffer::new(5).unwrap();
        let mut rng = sub_rng(3, "r");
        buf.reservoir_update(&stream(0, 0, 0..5), &mut rng);
        let got = buf.random_retrieval(9, &mut rng);
        let mut ids: Vec<usize> = got.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn retrieval_is_uniform() {
        let mut buf = Buffer::new(10).unwrap();
        let mut fill = sub_rng(0, "fill");
        buf.reservoir_update(&stream(0, 0, 0..10), &mut fill);
        let mut hits = vec![0usize; 10];
        let trials = 20_000;
        let mut rng = sub_rng(7, "draw");
        for _ in 0..trials {
            let got = buf.random_retrieval(1, &mut rng);
            hits[got[0].id] += 1;
        }
        for &h in &hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - 0.1).abs() <= 0.02, "slot frequency {freq}");
        }
    }

    #[test]
    fn empty_buffer_retrieves_nothing() {
        let buf = Buffer::new(4).unwrap();
        let mut rng = sub_rng(0, "x");
        assert!(buf.random_retrieval(3, &mut rng).is_empty());
    }

    #[test]
    fn task_share_counts_slots() {
        let mut buf = Buffer::new(50).unwrap();
        let mut rng = sub_rng(0, "s");
        buf.reservoir_update(&stream(0, 0, 0..50), &mut rng);
        assert_eq!(buf.task_share(0), 50);
        assert_eq!(buf.task_share(9), 0);
    }

    #[test]
    fn two_equal_tasks_split_the_reservoir_in_expectation() {
        let trials = 1000;
        let mut total_share = 0usize;
        for t in 0..trials {
            let mut buf = Buffer::new(100).unwrap();
            let mut rng = sub_rng(t as u64, "half");
            buf.reservoir_update(&stream(0, 0, 0..100), &mut rng);
            buf.reservoir_update(&stream(1, 1, 100..200), &mut rng);
            total_share += buf.task_share(1);
        }
        let mean = total_share as f64 / trials as f64;
        assert!((mean - 50.0).abs() <= 3.0, "mean task-1 share {mean}");
    }

    #[test]
    fn capacity_is_never_exceeded() {
        let mut buf = Buffer::new(7).unwrap();
        let mut rng = sub_rng(5, "cap");
        for t in 0..4 {
            buf.reservoir_update(&stream(t, t, t * 30..(t + 1) * 30), &mut rng);
            assert!(buf.len() <= 7);
        }
        assert_eq!(buf.len(), 7);
        assert_eq!(buf.stream_count(), 120);
    }

    fn counts(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        pairs.iter().copied().collect()
    }

    fn weights(pairs: &[(usize, f64)]) -> Vec<(usize, f64)> {
        pairs.to_vec()
    }

    #[test]
    fn equal_weights_split_evenly() {
        let plan = allocate_quota_weighted(
            0,
            &weights(&[(0, 1.0), (1, 1.0)]),
            10,
            &counts(&[(0, 100), (1, 100)]),
        )
        .unwrap();
        assert_eq!(plan.quota(0), 5);
        assert_eq!(plan.quota(1), 5);
    }

    #[test]
    fn exact_proportional_split() {
        let plan = allocate_quota_weighted(
            0,
            &weights(&[(0, 3.0), (1, 1.0)]),
            8,
            &counts(&[(0, 100), (1, 100)]),
        )
        .unwrap();
        assert_eq!(plan.quota(0), 6);
        assert_eq!(plan.quota(1), 2);
    }

    #[test]
    fn largest_remainder_ties_take_lowest_class() {
        let plan = allocate_quota_weighted(
            0,
            &weights(&[(0, 1.0), (1, 1.0), (2, 1.0)]),
            10,
            &counts(&[(0, 100), (1, 100), (2, 100)]),
        )
        .unwrap();
        assert_eq!(
            plan.quotas.values().copied().collect::<Vec<_>>(),
            vec![4, 3, 3]
        );
    }

    #[test]
    fn zero_weights_fall_back_to_equal_split() {
        let plan = allocate_quota_weighted(
            0,
            &weights(&[(0, 0.0), (1, 0.0), (2, 0.0)]),
            10,
            &counts(&[(0, 100), (1, 100), (2, 100)]),
        )
        .unwrap();
        assert_eq!(
            plan.quotas.values().copied().collect::<Vec<_>>(),
            vec![4, 3, 3]
        );
    }

    #[test]
    fn capped_surplus_is_redistributed() {
        // class 0 dominates but only has 3 samples; the rest flows to 1 and 2
        let plan = allocate_quota_weighted(
            0,
            &weights(&[(0, 100.0), (1, 1.0), (2, 1.0)]),
            10,
            &counts(&[(0, 3), (1, 10), (2, 10)]),
        )
        .unwrap();
        assert_eq!(plan.quota(0), 3);
        assert_eq!(plan.quota(1) + plan.quota(2), 7);
        assert_eq!(plan.quota(1), 4); // tie -> lower class id
        assert_eq!(plan.quota(2), 3);
    }

    #[test]
    fn allocation_rejects_overfull_requests() {
        let err = allocate_quota_weighted(
            0,
            &weights(&[(0, 1.0), (1, 1.0)]),
            11,
            &counts(&[(0, 5), (1, 5)]),
        );
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn allocation_sums_and_stays_monotone(
            raw in proptest::collection::vec(0.0f64..10.0, 2..8),
            total in 0usize..60,
        ) {
            let weights: Vec<(usize, f64)> = raw.iter().copied().enumerate().collect();
            let counts: BTreeMap<usize, usize> =
                (0..raw.len()).map(|c| (c, 40usize)).collect();
            prop_assume!(total <= 40 * raw.len());
            let plan = allocate_quota_weighted(0, &weights, total, &counts).unwrap();
            prop_assert_eq!(plan.quotas.values().sum::<usize>(), total);
            // no class is capped here, so bigger weight implies >= quota
            for &(a, wa) in &weights {
                for &(b, wb) in &weights {
                    if wa > wb {
                        prop_assert!(plan.quota(a) >= plan.quota(b));
                    }
                }
            }
            // scaling all weights by a power of two is exactly invariant
            let scaled: Vec<(usize, f64)> =
                weights.iter().map(|&(c, w)| (c, w * 4.0)).collect();
            let plan2 = allocate_quota_weighted(0, &scaled, total, &counts).unwrap();
            prop_assert_eq!(plan.quotas, plan2.quotas);
        }
    }

    fn scored(id: usize, mean: f64, vul: f64) -> SampleScore {
        SampleScore { sample_id: id, mean_confidence: mean, vulnerability: vul }
    }

    #[test]
    fn challenging_selection_takes_highest_vulnerability() {
        let samples = vec![sample(0, 0, 0), sample(1, 0, 0)];
        let scores = vec![scored(0, 0.5, 0.4), scored(1, 0.5, 0.1)];
        let plan = AllocationPlan { task: 0, quotas: counts(&[(0, 1)]), total: 1 };
        let mut rng = sub_rng(0, "sel");
        let got =
            select_samples(&samples, &scores, &plan, SampleStrategy::Challenging, &mut rng)
                .unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].id, 0);
    }

    #[test]
    fn hard_and_simple_disagree() {
        let samples = vec![sample(0, 0, 0), sample(1, 0, 0)];
        let scores = vec![scored(0, 0.9, 0.0), scored(1, 0.1, 0.0)];
        let plan = AllocationPlan { task: 0, quotas: counts(&[(0, 1)]), total: 1 };
        let mut rng = sub_rng(0, "sel");
        let hard =
            select_samples(&samples, &scores, &plan, SampleStrategy::Hard, &mut rng).unwrap();
        let simple =
            select_samples(&samples, &scores, &plan, SampleStrategy::Simple, &mut rng).unwrap();
        assert_eq!(hard[0].id, 1);
        assert_eq!(simple[0].id, 0);
    }

    #[test]
    fn random_with_full_quota_returns_whole_class() {
        let samples: Vec<Sample> = (0..6).map(|i| sample(i, 0, 0)).collect();
        let plan = AllocationPlan { task: 0, quotas: counts(&[(0, 6)]), total: 6 };
        let mut rng = sub_rng(9, "sel");
        let got =
            select_samples(&samples, &[], &plan, SampleStrategy::Random, &mut rng).unwrap();
        let mut ids: Vec<usize> = got.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn selection_rejects_oversized_quota() {
        let samples = vec![sample(0, 0, 0)];
        let plan = AllocationPlan { task: 0, quotas: counts(&[(0, 2)]), total: 2 };
        let mut rng = sub_rng(0, "sel");
        assert!(
            select_samples(&samples, &[], &plan, SampleStrategy::Random, &mut rng).is_err()
        );
    }

    #[test]
    fn rewrite_replaces_only_the_named_task() {
        let mut buf = Buffer::new(10).unwrap();
        let mut rng = sub_rng(2, "rw");
        buf.reservoir_update(&stream(0, 0, 0..5), &mut rng);
        buf.reservoir_update(&stream(1, 1, 5..10), &mut rng);
        let before_t1: Vec<usize> =
            buf.slots().iter().filter(|s| s.task == 1).map(|s| s.id).collect();
        let share = buf.task_share(0);
        let chosen: Vec<Sample> = (100..100 + share).map(|i| sample(i, 0, 0)).collect();
        let chosen_ids: Vec<usize> = chosen.iter().map(|s| s.id).collect();
        buf.casp_rewrite(0, chosen).unwrap();
        assert_eq!(buf.task_share(0), share);
        assert_eq!(buf.len(), 10);
        let after_t0: Vec<usize> =
            buf.slots().iter().filter(|s| s.task == 0).map(|s| s.id).collect();
        assert_eq!(after_t0, chosen_ids);
        let after_t1: Vec<usize> =
            buf.slots().iter().filter(|s| s.task == 1).map(|s| s.id).collect();
        assert_eq!(before_t1, after_t1);
    }

    #[test]
    fn rewrite_with_identical_contents_is_identity() {
        let mut buf = Buffer::new(5).unwrap();
        let mut rng = sub_rng(4, "rw");
        buf.reservoir_update(&stream(0, 0, 0..5), &mut rng);
        let same: Vec<Sample> = buf.slots().to_vec();
        let before = buf.clone();
        buf.casp_rewrite(0, same).unwrap();
        assert_eq!(buf, before);
    }

    #[test]
    fn rewrite_of_absent_task_is_noop() {
        let mut buf = Buffer::new(5).unwrap();
        let mut rng = sub_rng(4, "rw");
        buf.reservoir_update(&stream(0, 0, 0..5), &mut rng);
        let before = buf.clone();
        buf.casp_rewrite(3, Vec::new()).unwrap();
        assert_eq!(buf, before);
    }

    #[test]
    fn rewrite_rejects_size_mismatch() {
        let mut buf = Buffer::new(5).unwrap();
        let mut rng = sub_rng(4, "rw");
        buf.reservoir_update(&stream(0, 0, 0..5), &mut rng);
        assert!(buf.casp_rewrite(0, vec![sample(9, 0, 0)]).is_err());
    }

    #[test]
    fn snapshot_format() {
        let mut buf = Buffer::new(2).unwrap();
        let mut rng = sub_rng(0, "snap");
        buf.reservoir_update(&[sample(4, 1, 3), sample(7, 1, 2)], &mut rng);
        let mut out = Vec::new();
        buf.write_snapshot(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0,4,1,3\n1,7,1,2\n");
    }
}
