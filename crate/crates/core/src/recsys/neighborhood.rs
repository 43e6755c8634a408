//! Item-item neighborhoods with adjusted cosine similarity.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::catalog::{MovieId, RatingsMatrix, UserProfile};

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_MIN_SUPPORT: usize = 2;

/// Top-k most similar items per item.
///
/// Lists are sorted by descending similarity, ties by ascending id, and never
/// contain the item itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ItemNeighborhood {
    pub k: usize,
    pub min_support: usize,
    neighbors: BTreeMap<MovieId, Vec<(MovieId, f64)>>,
}

impl ItemNeighborhood {
    pub fn neighbors(&self, movie: MovieId) -> &[(MovieId, f64)] {
        self.neighbors.get(&movie).map_or(&[], Vec::as_slice)
    }

    pub fn similarity(&self, a: MovieId, b: MovieId) -> Option<f64> {
        self.neighbors(a)
            .iter()
            .find(|(id, _)| *id == b)
            .map(|(_, s)| *s)
    }

    pub fn items(&self) -> impl Iterator<Item = (MovieId, &[(MovieId, f64)])> {
        self.neighbors.iter().map(|(id, n)| (*id, n.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.values().all(Vec::is_empty)
    }
}

#[derive(Clone, Copy, Default)]
struct PairSums {
    dot: f64,
    norm_a: f64,
    norm_b: f64,
    support: usize,
}

/// Adjusted cosine over co-rating users: every rating is centered on its
/// user's mean, then cosine is taken over the users who rated both items.
/// Pairs with fewer than `min_support` co-raters, or a zero norm, are
/// dropped. Rows are built in parallel; each row sums in ascending user
/// order, so the result is identical to a sequential build and symmetric.
pub fn build_item_model(ratings: &RatingsMatrix, k: usize, min_support: usize) -> ItemNeighborhood {
    assert!(k >= 1, "k must be at least 1");
    assert!(min_support >= 1, "min_support must be at least 1");

    let mut item_ids: Vec<MovieId> = ratings.entries().map(|(_, m, _)| m).collect();
    item_ids.sort();
    item_ids.dedup();
    let item_index: HashMap<MovieId, usize> =
        item_ids.iter().enumerate().map(|(i, m)| (*m, i)).collect();

    // users ascending; per user (item index, centered rating)
    let mut by_user: Vec<Vec<(usize, f64)>> = Vec::with_capacity(ratings.user_count());
    let mut raters: Vec<Vec<(usize, f64)>> = vec![Vec::new(); item_ids.len()];
    for (u, (_, user_ratings)) in ratings.users().enumerate() {
        if user_ratings.is_empty() {
            by_user.push(Vec::new());
            continue;
        }
        let mean = user_ratings.values().sum::<f64>() / user_ratings.len() as f64;
        let row: Vec<(usize, f64)> = user_ratings
            .iter()
            .map(|(m, r)| (item_index[m], r - mean))
            .collect();
        for &(i, c) in &row {
            raters[i].push((u, c));
        }
        by_user.push(row);
    }

    let rows: Vec<Vec<(MovieId, f64)>> = (0..item_ids.len())
        .into_par_iter()
        .map(|i| {
            let mut sums = vec![PairSums::default(); item_ids.len()];
            let mut touched = Vec::new();
            for &(u, a) in &raters[i] {
                for &(j, b) in &by_user[u] {
                    if j == i {
                        continue;
                    }
                    let s = &mut sums[j];
                    if s.support == 0 {
                        touched.push(j);
                    }
                    s.dot += a * b;
                    s.norm_a += a * a;
                    s.norm_b += b * b;
                    s.support += 1;
                }
            }
            let mut row: Vec<(MovieId, f64)> = touched
                .into_iter()
                .filter_map(|j| {
                    let s = sums[j];
                    if s.support < min_support {
                        return None;
                    }
                    let denom = s.norm_a.sqrt() * s.norm_b.sqrt();
                    (denom > 0.0).then(|| (item_ids[j], (s.dot / denom).clamp(-1.0, 1.0)))
                })
                .collect();
            row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            row.truncate(k);
            row
        })
        .collect();

    ItemNeighborhood {
        k,
        min_support,
        neighbors: item_ids.into_iter().zip(rows).collect(),
    }
}

/// Similarity-weighted average of the user's ratings on the item's
/// neighbors: `sum(sim * r) / sum(|sim|)`. `None` without a rated neighbor
/// or with a zero denominator.
pub fn predict_rating(
    profile: &UserProfile,
    movie: MovieId,
    neighborhood: &ItemNeighborhood,
) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut any = false;
    for &(neighbor, sim) in neighborhood.neighbors(movie) {
        if let Some(r) = profile.rating(neighbor) {
            num += sim * r;
            den += sim.abs();
            any = true;
        }
    }
    (any && den > 0.0).then(|| num / den)
}
