//! Candidate ranking: personalized top-N from item-based KNN collaborative
//! filtering, explicit popularity or recency orders, and content-based
//! related-item lists.

mod content;
mod neighborhood;

use std::collections::BTreeSet;

pub use content::{ContentIndex, ContentVector, SimilarityError};
pub use neighborhood::{
    build_item_model, predict_rating, ItemNeighborhood, DEFAULT_K, DEFAULT_MIN_SUPPORT,
};

use crate::catalog::{Catalog, MovieId, QuerySpec, SortKey, UserProfile};

/// Ranks `candidates` for one user and truncates to `n`.
///
/// Movies the user already rated are never returned. An explicit sort order
/// replaces personalization entirely; otherwise movies with a predicted
/// rating come first (highest prediction, then lowest id), followed by the
/// rest in popularity order.
pub fn rank_topn(
    profile: &UserProfile,
    candidates: &[MovieId],
    spec: &QuerySpec,
    neighborhood: &ItemNeighborhood,
    catalog: &Catalog,
    n: usize,
) -> Vec<MovieId> {
    let unrated: Vec<MovieId> = candidates
        .iter()
        .copied()
        .filter(|id| !profile.has_rated(*id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut ranked = match spec.sort.key() {
        Some(key) => catalog.order_by(&unrated, key),
        None => {
            let mut predicted = Vec::new();
            let mut rest = Vec::new();
            for id in unrated {
                match predict_rating(profile, id, neighborhood) {
                    Some(score) => predicted.push((id, score)),
                    None => rest.push(id),
                }
            }
            predicted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut out: Vec<MovieId> = predicted.into_iter().map(|(id, _)| id).collect();
            out.extend(catalog.order_by(&rest, SortKey::Popular));
            out
        }
    };
    ranked.truncate(n);
    ranked
}
