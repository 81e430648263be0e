//! Items, attraction weights, ranked lists, per-round feedback and the
//! cascade reward/regret functions shared by every other module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};

/// Zero-based index of an item in the ground set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub usize);

impl ItemId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ItemId {
    // One-based for humans.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0 + 1)
    }
}

/// Hidden per-item attraction probabilities of the cascade model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractionModel {
    weights: Vec<f64>,
}

impl AttractionModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(CascadeError::config(format!(
                "a ground set needs at least 2 items, got {}",
                weights.len()
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(0.0..=1.0).contains(*w))
        {
            return Err(CascadeError::config(format!(
                "weight of item {i} is {w}, outside [0, 1]"
            )));
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, item: ItemId) -> Result<f64> {
        self.weights
            .get(item.0)
            .copied()
            .ok_or(CascadeError::OutOfRange {
                item: item.0,
                items: self.weights.len(),
            })
    }

    /// Attraction gap `w(a) - w(b)`.
    pub fn gap(&self, a: ItemId, b: ItemId) -> Result<f64> {
        Ok(self.weight(a)? - self.weight(b)?)
    }

    /// Items sorted by decreasing weight, ties broken by smaller index.
    pub fn ranking(&self) -> Vec<ItemId> {
        let mut order: Vec<ItemId> = (0..self.weights.len()).map(ItemId).collect();
        order.sort_by(|a, b| {
            self.weights[b.0]
                .total_cmp(&self.weights[a.0])
                .then(a.0.cmp(&b.0))
        });
        order
    }

    /// Weight of the `k`-th best item (1-based), the reference point for the
    /// per-position gap of a sub-optimal item.
    pub fn kth_best_weight(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.ranking().get(i).map(|item| self.weights[item.0]))
    }

    /// Number of items whose weight is strictly larger than `item`'s.
    pub fn strictly_better_count(&self, item: ItemId) -> usize {
        let w = self.weights[item.0];
        self.weights.iter().filter(|&&x| x > w).count()
    }
}

/// An ordered list of `K` distinct items shown to the user.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecList {
    items: Vec<ItemId>,
}

impl RecList {
    /// Validates distinctness, `1 <= K < L` and item ranges.
    pub fn new(items: Vec<ItemId>, ground_size: usize) -> Result<Self> {
        if items.is_empty() || items.len() >= ground_size {
            return Err(CascadeError::config(format!(
                "list length {} must satisfy 0 < K < L = {ground_size}",
                items.len()
            )));
        }
        for (pos, item) in items.iter().enumerate() {
            if item.0 >= ground_size {
                return Err(CascadeError::OutOfRange {
                    item: item.0,
                    items: ground_size,
                });
            }
            if items[..pos].contains(item) {
                return Err(CascadeError::ContractViolation(format!(
                    "item {item} appears twice in a recommended list"
                )));
            }
        }
        Ok(Self { items })
    }

    pub fn from_indices(indices: &[usize], ground_size: usize) -> Result<Self> {
        Self::new(indices.iter().copied().map(ItemId).collect(), ground_size)
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, position: usize) -> Option<ItemId> {
        self.items.get(position).copied()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.contains(&item)
    }
}

/// First attractive position, `None` when nothing is attractive.
pub fn first_click(attractions: &[bool]) -> Option<usize> {
    attractions.iter().position(|&a| a)
}

/// True and corrupted attraction indicators of the shown list for one round.
///
/// Click indices are always derived from the indicator vectors, so the
/// corrupted click cannot disagree with the corrupted indicators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundFeedback {
    attractions: Vec<bool>,
    corrupted_attractions: Vec<bool>,
    click_index: Option<usize>,
    corrupted_click_index: Option<usize>,
    /// Indicators of the optimal list drawn in the same round, present only
    /// when realized regret is being tracked.
    optimal_attractions: Option<Vec<bool>>,
}

impl RoundFeedback {
    /// Uncorrupted feedback: corrupted fields start equal to the true ones.
    pub fn new(attractions: Vec<bool>) -> Self {
        let click_index = first_click(&attractions);
        Self {
            corrupted_attractions: attractions.clone(),
            attractions,
            click_index,
            corrupted_click_index: click_index,
            optimal_attractions: None,
        }
    }

    pub fn with_optimal(mut self, optimal_attractions: Vec<bool>) -> Self {
        self.optimal_attractions = Some(optimal_attractions);
        self
    }

    pub fn attractions(&self) -> &[bool] {
        &self.attractions
    }

    pub fn corrupted_attractions(&self) -> &[bool] {
        &self.corrupted_attractions
    }

    pub fn click_index(&self) -> Option<usize> {
        self.click_index
    }

    pub fn corrupted_click_index(&self) -> Option<usize> {
        self.corrupted_click_index
    }

    pub fn optimal_attractions(&self) -> Option<&[bool]> {
        self.optimal_attractions.as_deref()
    }

    pub fn len(&self) -> usize {
        self.attractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attractions.is_empty()
    }

    /// Replaces the corrupted indicators and re-derives the corrupted click.
    pub fn set_corrupted(&mut self, corrupted: Vec<bool>) -> Result<()> {
        if corrupted.len() != self.attractions.len() {
            return Err(CascadeError::ContractViolation(format!(
                "corrupted feedback has {} positions, expected {}",
                corrupted.len(),
                self.attractions.len()
            )));
        }
        self.corrupted_click_index = first_click(&corrupted);
        self.corrupted_attractions = corrupted;
        Ok(())
    }

    /// Zeroes one corrupted indicator and re-derives the corrupted click.
    pub(crate) fn suppress(&mut self, position: usize) {
        self.corrupted_attractions[position] = false;
        self.corrupted_click_index = first_click(&self.corrupted_attractions);
    }

    /// `max_k |R(a_k) - R~(a_k)|`, either 0 or 1.
    pub fn corruption_magnitude(&self) -> u8 {
        self.attractions
            .iter()
            .zip(&self.corrupted_attractions)
            .any(|(a, b)| a != b) as u8
    }
}

/// How per-round regret is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// `f(A*, w) - f(A_t, w)`: pseudo-regret.
    #[default]
    Expected,
    /// `f(A*, R_t) - f(A_t, R_t)` on the round's draw.
    Realized,
}

fn check_shape(list: &RecList, fb: &RoundFeedback) -> Result<()> {
    if list.len() != fb.len() {
        return Err(CascadeError::ContractViolation(format!(
            "feedback has {} positions for a list of {}",
            fb.len(),
            list.len()
        )));
    }
    Ok(())
}

/// Cascade reward of the round on the TRUE indicators: 1 iff any shown item
/// was attractive.
pub fn realized_reward(list: &RecList, fb: &RoundFeedback) -> Result<u8> {
    check_shape(list, fb)?;
    Ok(fb.attractions.iter().any(|&a| a) as u8)
}

/// `1 - prod_{a in list} (1 - w(a))`.
pub fn expected_reward(list: &RecList, model: &AttractionModel) -> Result<f64> {
    let mut miss = 1.0;
    for &item in list.items() {
        miss *= 1.0 - model.weight(item)?;
    }
    Ok(1.0 - miss)
}

/// The `K` heaviest items in decreasing weight order (ties: smaller index).
pub fn optimal_list(model: &AttractionModel, k: usize) -> Result<RecList> {
    if k == 0 || k >= model.len() {
        return Err(CascadeError::config(format!(
            "K = {k} must satisfy 0 < K < L = {}",
            model.len()
        )));
    }
    let mut ranking = model.ranking();
    ranking.truncate(k);
    RecList::new(ranking, model.len())
}

pub fn optimal_value(model: &AttractionModel, k: usize) -> Result<f64> {
    expected_reward(&optimal_list(model, k)?, model)
}

/// Regret of one round. Both modes use the uncorrupted world.
pub fn regret_increment(
    list: &RecList,
    fb: &RoundFeedback,
    model: &AttractionModel,
    k: usize,
    mode: RegretMode,
) -> Result<f64> {
    check_shape(list, fb)?;
    if list.len() != k {
        return Err(CascadeError::ContractViolation(format!(
            "list length {} differs from K = {k}",
            list.len()
        )));
    }
    match mode {
        RegretMode::Expected => Ok(optimal_value(model, k)? - expected_reward(list, model)?),
        RegretMode::Realized => {
            let optimal = fb.optimal_attractions().ok_or_else(|| {
                CascadeError::ContractViolation(
                    "realized regret needs the optimal list's indicators for the round".into(),
                )
            })?;
            let best = optimal.iter().any(|&a| a) as u8;
            Ok(f64::from(best) - f64::from(realized_reward(list, fb)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model(w: &[f64]) -> AttractionModel {
        AttractionModel::new(w.to_vec()).unwrap()
    }

    fn list(ix: &[usize], l: usize) -> RecList {
        RecList::from_indices(ix, l).unwrap()
    }

    /// Sum over all 2^K indicator outcomes of P(outcome) * f(outcome).
    fn enumerate_expected(weights: &[f64]) -> f64 {
        let k = weights.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << k) {
            let mut p = 1.0;
            for (i, w) in weights.iter().enumerate() {
                p *= if mask >> i & 1 == 1 { *w } else { 1.0 - *w };
            }
            total += p * if mask != 0 { 1.0 } else { 0.0 };
        }
        total
    }

    #[test]
    fn realized_reward_cases() {
        let l = list(&[0, 1, 2], 4);
        for (ind, want) in [
            (vec![false, false, false], 0),
            (vec![false, true, false], 1),
            (vec![true, true, true], 1),
        ] {
            let fb = RoundFeedback::new(ind);
            assert_eq!(realized_reward(&l, &fb).unwrap(), want);
            assert_eq!(want == 1, fb.click_index().is_some());
        }
    }

    #[test]
    fn realized_reward_shape_mismatch() {
        let fb = RoundFeedback::new(vec![true, false]);
        assert!(matches!(
            realized_reward(&list(&[0, 1, 2], 4), &fb),
            Err(CascadeError::ContractViolation(_))
        ));
    }

    #[test]
    fn expected_reward_examples() {
        let m = model(&[0.5, 0.5, 0.1]);
        assert_abs_diff_eq!(expected_reward(&list(&[0, 1], 3), &m).unwrap(), 0.75);
        let m = model(&[0.2, 1.0, 0.3]);
        assert_eq!(expected_reward(&list(&[0, 1], 3), &m).unwrap(), 1.0);
        let m = model(&[0.9, 0.5, 0.1]);
        let got = expected_reward(&list(&[0, 1], 3), &m).unwrap();
        assert_abs_diff_eq!(got, enumerate_expected(&[0.9, 0.5]), epsilon = 1e-12);
    }

    #[test]
    fn expected_reward_out_of_range() {
        let m = model(&[0.1, 0.2]);
        let l = list(&[2], 4);
        assert!(matches!(
            expected_reward(&l, &m),
            Err(CascadeError::OutOfRange { item: 2, items: 2 })
        ));
    }

    #[test]
    fn optimal_value_examples() {
        let m = model(&[0.9, 0.5, 0.1]);
        assert_abs_diff_eq!(optimal_value(&m, 2).unwrap(), 0.95, epsilon = 1e-15);
        let eq = model(&[0.3; 5]);
        assert_abs_diff_eq!(
            optimal_value(&eq, 2).unwrap(),
            expected_reward(&list(&[3, 1], 5), &eq).unwrap()
        );
        assert!(matches!(optimal_value(&m, 3), Err(CascadeError::InvalidConfig(_))));
        // tie rule
        let tied = model(&[0.2, 0.5, 0.5, 0.5]);
        assert_eq!(optimal_list(&tied, 2).unwrap().items(), &[ItemId(1), ItemId(2)]);
    }

    #[test]
    fn regret_expected_examples() {
        let m = model(&[0.9, 0.5, 0.1]);
        let best = optimal_list(&m, 2).unwrap();
        let fb = RoundFeedback::new(vec![false, false]);
        assert_eq!(regret_increment(&best, &fb, &m, 2, RegretMode::Expected).unwrap(), 0.0);
        let r = regret_increment(&list(&[0, 2], 3), &fb, &m, 2, RegretMode::Expected).unwrap();
        assert_abs_diff_eq!(r, 0.04, epsilon = 1e-12);
    }

    #[test]
    fn regret_realized_needs_optimal_draw() {
        let m = model(&[0.9, 0.5, 0.1]);
        let l = list(&[0, 2], 3);
        let fb = RoundFeedback::new(vec![false, false]);
        assert!(regret_increment(&l, &fb, &m, 2, RegretMode::Realized).is_err());
        let fb = fb.with_optimal(vec![false, true]);
        assert_eq!(regret_increment(&l, &fb, &m, 2, RegretMode::Realized).unwrap(), 1.0);
    }

    #[test]
    fn rec_list_validation() {
        assert!(RecList::from_indices(&[0, 0], 3).is_err());
        assert!(RecList::from_indices(&[0, 1, 2], 3).is_err());
        assert!(RecList::from_indices(&[], 3).is_err());
        assert!(RecList::from_indices(&[5], 3).is_err());
        assert!(AttractionModel::new(vec![0.5]).is_err());
        assert!(AttractionModel::new(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn corruption_magnitude_is_binary() {
        let mut fb = RoundFeedback::new(vec![true, false, true]);
        assert_eq!(fb.corruption_magnitude(), 0);
        fb.set_corrupted(vec![false, false, false]).unwrap();
        assert_eq!(fb.corruption_magnitude(), 1);
        assert_eq!(fb.corrupted_click_index(), None);
        assert_eq!(fb.click_index(), Some(0));
    }

    fn weights_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..=1.0, 3..10)
    }

    proptest! {
        #[test]
        fn expected_reward_is_order_invariant(w in weights_strategy(), seed in any::<u64>()) {
            let l = w.len();
            let k = 1 + (seed as usize % (l - 1));
            let m = AttractionModel::new(w).unwrap();
            let mut ix: Vec<usize> = (0..l).collect();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..l).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ix.swap(i, (s >> 33) as usize % (i + 1));
            }
            let a = RecList::from_indices(&ix[..k], l).unwrap();
            let mut rev = ix[..k].to_vec();
            rev.reverse();
            let b = RecList::from_indices(&rev, l).unwrap();
            prop_assert!((expected_reward(&a, &m).unwrap() - expected_reward(&b, &m).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn expected_reward_is_monotone(w in weights_strategy(), pos in 0usize..3) {
            let l = w.len();
            let k = 2.min(l - 1);
            let m = AttractionModel::new(w.clone()).unwrap();
            let base: Vec<usize> = (0..k).collect();
            let before = expected_reward(&RecList::from_indices(&base, l).unwrap(), &m).unwrap();
            let p = pos % k;
            for cand in k..l {
                if w[cand] > w[base[p]] {
                    let mut swapped = base.clone();
                    swapped[p] = cand;
                    let after = expected_reward(&RecList::from_indices(&swapped, l).unwrap(), &m).unwrap();
                    prop_assert!(after >= before - 1e-15);
                }
            }
        }

        #[test]
        fn optimal_value_matches_subset_enumeration(w in prop::collection::vec(0.0f64..=1.0, 3..12), kk in 1usize..5) {
            let l = w.len();
            let k = kk.min(l - 1);
            let m = AttractionModel::new(w.clone()).unwrap();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << l) {
                if mask.count_ones() as usize != k { continue; }
                let miss: f64 = (0..l).filter(|i| mask >> i & 1 == 1).map(|i| 1.0 - w[i]).product();
                best = best.max(1.0 - miss);
            }
            prop_assert!((optimal_value(&m, k).unwrap() - best).abs() < 1e-12);
        }
    }
}
