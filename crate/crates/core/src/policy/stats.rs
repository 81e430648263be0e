//! Per-instance statistics and the position-based elimination rules.

use crate::error::{CascadeError, Result};
use crate::model::{ItemId, RecList};

use super::radius::ConfidenceRadius;

/// Play counts, click counts and per-position elimination sets of one
/// elimination instance. Means are `clicks / plays`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceStats {
    plays: Vec<u64>,
    clicks: Vec<u64>,
    /// `eliminated[position][item]`
    eliminated: Vec<Vec<bool>>,
}

impl InstanceStats {
    pub fn new(items: usize, positions: usize) -> Self {
        Self {
            plays: vec![0; items],
            clicks: vec![0; items],
            eliminated: vec![vec![false; items]; positions],
        }
    }

    pub fn items(&self) -> usize {
        self.plays.len()
    }

    pub fn positions(&self) -> usize {
        self.eliminated.len()
    }

    pub fn plays(&self, item: ItemId) -> u64 {
        self.plays[item.0]
    }

    pub fn clicks(&self, item: ItemId) -> u64 {
        self.clicks[item.0]
    }

    pub fn mean(&self, item: ItemId) -> f64 {
        match self.plays[item.0] {
            0 => 0.0,
            n => self.clicks[item.0] as f64 / n as f64,
        }
    }

    pub fn is_eliminated(&self, position: usize, item: ItemId) -> bool {
        self.eliminated[position][item.0]
    }

    /// Items in `M_position`.
    pub fn eliminated_at(&self, position: usize) -> Vec<ItemId> {
        self.eliminated[position]
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(|(i, _)| ItemId(i))
            .collect()
    }

    /// Returns whether the item was newly added.
    pub fn eliminate(&mut self, position: usize, item: ItemId) -> bool {
        !std::mem::replace(&mut self.eliminated[position][item.0], true)
    }

    pub fn record(&mut self, item: ItemId, clicked: bool) {
        self.plays[item.0] += 1;
        self.clicks[item.0] += u64::from(clicked);
    }

    /// Least-played item of `E \ (M_position ∪ chosen)`, ties to the smaller
    /// index.
    pub fn least_played_available(&self, position: usize, chosen: &[ItemId]) -> Option<ItemId> {
        let mut best: Option<usize> = None;
        for (i, &dead) in self.eliminated[position].iter().enumerate() {
            if dead || chosen.contains(&ItemId(i)) {
                continue;
            }
            if best.is_none_or(|b| self.plays[i] < self.plays[b]) {
                best = Some(i);
            }
        }
        best.map(ItemId)
    }
}

/// Fills positions in order with the least-played available item.
pub fn pbe_select(stats: &InstanceStats, k: usize) -> Result<RecList> {
    let mut chosen = Vec::with_capacity(k);
    for position in 0..k {
        let item = stats
            .least_played_available(position, &chosen)
            .ok_or(CascadeError::PolicyExhausted { position })?;
        chosen.push(item);
    }
    RecList::new(chosen, stats.items())
}

/// Folds the observed (possibly corrupted) click into the statistics:
/// positions up to and including the click, or all positions when nothing
/// was clicked. With `guarded`, an item already eliminated at its position
/// is skipped.
pub fn pbe_update(stats: &mut InstanceStats, list: &RecList, click: Option<usize>, guarded: bool) {
    let last = click.map_or(list.len(), |c| (c + 1).min(list.len()));
    for (position, &item) in list.items()[..last].iter().enumerate() {
        if guarded && stats.is_eliminated(position, item) {
            continue;
        }
        stats.record(item, click == Some(position));
    }
}

/// Applies the elimination rule to every active (item, position) pair and
/// returns the newly eliminated pairs.
///
/// Item `i` leaves `M_k`'s complement when at least `k` (1-based) other items
/// active at that position satisfy `mean(a) - mean(i) >= wd(a) + wd(i)`.
/// The rule is evaluated against the active sets as they were on entry.
pub fn pbe_eliminate(stats: &mut InstanceStats, radius: &ConfidenceRadius) -> Vec<(usize, ItemId)> {
    let l = stats.items();
    let wd: Vec<f64> = stats.plays.iter().map(|&n| radius.at(n)).collect();
    let mean: Vec<f64> = (0..l).map(|i| stats.mean(ItemId(i))).collect();
    let lcb: Vec<f64> = (0..l).map(|i| mean[i] - wd[i]).collect();

    let mut found = Vec::new();
    let mut active = Vec::with_capacity(l);
    let mut sorted_lcb = Vec::with_capacity(l);
    for position in 0..stats.positions() {
        let need = position + 1;
        active.clear();
        active.extend((0..l).filter(|&i| !stats.eliminated[position][i]));
        if active.len() <= need {
            continue;
        }
        sorted_lcb.clear();
        sorted_lcb.extend(active.iter().map(|&i| lcb[i]).filter(|x| x.is_finite()));
        if sorted_lcb.len() < need {
            continue;
        }
        sorted_lcb.sort_unstable_by(|a, b| b.total_cmp(a));
        // Pruning bound only; the exact test below decides.
        let kth_lcb = sorted_lcb[need - 1];
        for &i in &active {
            if !wd[i].is_finite() || kth_lcb < mean[i] + wd[i] - 1e-9 {
                continue;
            }
            let separated = active
                .iter()
                .filter(|&&a| a != i && mean[a] - mean[i] >= wd[a] + wd[i])
                .take(need)
                .count();
            if separated >= need {
                found.push((position, ItemId(i)));
            }
        }
    }
    for &(position, item) in &found {
        stats.eliminate(position, item);
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_counts(plays: &[u64], clicks: &[u64], k: usize) -> InstanceStats {
        let mut s = InstanceStats::new(plays.len(), k);
        s.plays = plays.to_vec();
        s.clicks = clicks.to_vec();
        s
    }

    #[test]
    fn fresh_selection_uses_index_order() {
        let s = InstanceStats::new(6, 3);
        assert_eq!(pbe_select(&s, 3).unwrap(), RecList::from_indices(&[0, 1, 2], 6).unwrap());
    }

    #[test]
    fn elimination_sets_are_per_position() {
        let mut s = InstanceStats::new(4, 2);
        s.eliminate(0, ItemId(0));
        let list = pbe_select(&s, 2).unwrap();
        assert_eq!(list.items(), &[ItemId(1), ItemId(0)]);
    }

    #[test]
    fn exhausted_position_errors() {
        let mut s = InstanceStats::new(3, 2);
        for i in 0..3 {
            s.eliminate(1, ItemId(i));
        }
        assert!(matches!(pbe_select(&s, 2), Err(CascadeError::PolicyExhausted { position: 1 })));
    }

    #[test]
    fn update_click_at_first_position() {
        let mut s = InstanceStats::new(4, 3);
        let list = RecList::from_indices(&[2, 0, 1], 4).unwrap();
        pbe_update(&mut s, &list, Some(0), false);
        assert_eq!((s.plays(ItemId(2)), s.clicks(ItemId(2))), (1, 1));
        assert_eq!(s.plays(ItemId(0)) + s.plays(ItemId(1)), 0);
    }

    #[test]
    fn update_without_click_touches_every_position() {
        let mut s = InstanceStats::new(4, 3);
        let list = RecList::from_indices(&[2, 0, 1], 4).unwrap();
        pbe_update(&mut s, &list, None, false);
        for i in [0, 1, 2] {
            assert_eq!((s.plays(ItemId(i)), s.mean(ItemId(i))), (1, 0.0));
        }
        assert_eq!(s.plays(ItemId(3)), 0);
    }

    #[test]
    fn guarded_update_skips_eliminated() {
        let mut s = InstanceStats::new(4, 2);
        s.eliminate(1, ItemId(3));
        let list = RecList::from_indices(&[0, 3], 4).unwrap();
        pbe_update(&mut s, &list, None, true);
        assert_eq!(s.plays(ItemId(3)), 0);
        pbe_update(&mut s, &list, None, false);
        assert_eq!(s.plays(ItemId(3)), 1);
    }

    #[test]
    fn fresh_stats_never_eliminate() {
        let mut s = InstanceStats::new(5, 2);
        let r = ConfidenceRadius::fast(5, 100, 0.1);
        assert!(pbe_eliminate(&mut s, &r).is_empty());
    }

    #[test]
    fn boundary_gap_eliminates() {
        // log term 1: wd = sqrt(1/4) = 0.5 for both items; gap 1.0 = 0.5 + 0.5.
        let r = ConfidenceRadius::fast(4, 10, 8.0 * 4.0 * 10.0 / std::f64::consts::E);
        assert!((r.at(4) - 0.5).abs() < 1e-15);
        let mut s = with_counts(&[4, 4, 0], &[4, 0, 0], 1);
        let out = pbe_eliminate(&mut s, &r);
        assert_eq!(out, vec![(0, ItemId(1))]);
        // one play less on the loser widens its radius past the gap
        let mut s = with_counts(&[4, 3, 0], &[4, 0, 0], 1);
        assert!(pbe_eliminate(&mut s, &r).is_empty());
    }

    #[test]
    fn eliminated_items_do_not_count_as_comparators() {
        let r = ConfidenceRadius::fast(4, 10, 8.0 * 4.0 * 10.0 / std::f64::consts::E);
        // position 1 needs two separated comparators; item 0 is dead there
        let mut s = with_counts(&[100, 100, 100, 100], &[100, 100, 0, 10], 2);
        s.eliminate(1, ItemId(0));
        let out = pbe_eliminate(&mut s, &r);
        assert!(out.contains(&(0, ItemId(2))));
        assert!(!out.contains(&(1, ItemId(2))));
    }

    /// Every (item, position) pair checked against the literal rule.
    fn exhaustive(stats: &InstanceStats, r: &ConfidenceRadius) -> Vec<(usize, ItemId)> {
        let l = stats.items();
        let wd = |i: usize| r.at(stats.plays[i]);
        let mut out = Vec::new();
        for k in 0..stats.positions() {
            for i in 0..l {
                if stats.eliminated[k][i] {
                    continue;
                }
                let mut count = 0;
                for a in 0..l {
                    if a != i
                        && !stats.eliminated[k][a]
                        && stats.mean(ItemId(a)) - stats.mean(ItemId(i)) >= wd(a) + wd(i)
                    {
                        count += 1;
                    }
                }
                if count >= k + 1 {
                    out.push((k, ItemId(i)));
                }
            }
        }
        out
    }

    /// Brute-force selection: scan everything, keep the strict minimum.
    fn brute_select(stats: &InstanceStats, k: usize) -> Vec<ItemId> {
        let mut chosen: Vec<ItemId> = Vec::new();
        for pos in 0..k {
            let cands: Vec<usize> = (0..stats.items())
                .filter(|&i| !stats.eliminated[pos][i] && !chosen.contains(&ItemId(i)))
                .collect();
            let min = cands.iter().map(|&i| stats.plays[i]).min().unwrap();
            chosen.push(ItemId(*cands.iter().find(|&&i| stats.plays[i] == min).unwrap()));
        }
        chosen
    }

    proptest! {
        #[test]
        fn elimination_matches_exhaustive_checker(
            plays in prop::collection::vec(0u64..200, 5),
            frac in prop::collection::vec(0.0f64..=1.0, 5),
            dead in prop::collection::vec(any::<bool>(), 10),
        ) {
            let clicks: Vec<u64> = plays.iter().zip(&frac).map(|(&p, f)| (p as f64 * f).floor() as u64).collect();
            let mut s = with_counts(&plays, &clicks, 2);
            for (j, &d) in dead.iter().enumerate() {
                if d && j % 3 == 0 { s.eliminate(j / 5, ItemId(j % 5)); }
            }
            let r = ConfidenceRadius::fast(5, 50, 0.5);
            let want = exhaustive(&s, &r);
            let got = pbe_eliminate(&mut s, &r);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn selection_matches_brute_force(
            plays in prop::collection::vec(0u64..6, 6),
            dead in prop::collection::vec(0usize..6, 0..3),
        ) {
            let mut s = with_counts(&plays, &[0; 6], 2);
            for &d in &dead { s.eliminate(0, ItemId(d)); }
            let got = pbe_select(&s, 2).unwrap();
            prop_assert_eq!(got.items(), &brute_select(&s, 2)[..]);
        }

        #[test]
        fn means_match_event_log(events in prop::collection::vec((0usize..4, prop::option::of(0usize..3)), 1..60)) {
            let mut s = InstanceStats::new(5, 3);
            let mut log: Vec<(usize, bool)> = Vec::new();
            for (shift, click) in events {
                let ix: Vec<usize> = (0..3).map(|p| (p + shift) % 5).collect();
                let list = RecList::from_indices(&ix, 5).unwrap();
                pbe_update(&mut s, &list, click, false);
                let last = click.map_or(3, |c| c + 1);
                for (p, &i) in ix[..last].iter().enumerate() {
                    log.push((i, click == Some(p)));
                }
            }
            for i in 0..5 {
                let n = log.iter().filter(|e| e.0 == i).count() as u64;
                let c = log.iter().filter(|e| e.0 == i && e.1).count() as f64;
                prop_assert_eq!(s.plays(ItemId(i)), n);
                if n > 0 {
                    prop_assert!((s.mean(ItemId(i)) - c / n as f64).abs() < 1e-15);
                }
            }
        }
    }
}
