//! Content vectors (genre one-hot plus tag TF-IDF) and related-item ranking.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::catalog::{Catalog, Genre, Movie, MovieId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("movie {0} is not in the catalog")]
    UnknownSeed(MovieId),
    #[error("movie {0} has no genres or tags to compare")]
    SeedWithoutContent(MovieId),
}

/// Sparse vector as `(dimension, weight)` pairs in ascending dimension order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContentVector(Vec<(usize, f64)>);

impl ContentVector {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|(_, w)| *w == 0.0)
    }

    pub fn dot(&self, other: &ContentVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < self.0.len() && j < other.0.len() {
            let (da, wa) = self.0[i];
            let (db, wb) = other.0[j];
            match da.cmp(&db) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// Content vectors for every catalog movie.
///
/// Dimensions: one per genre (weight 1.0), then one per tag with weight
/// `count * ln(N / (1 + df))`. Each vector is L2-normalized when non-zero.
#[derive(Debug, Clone)]
pub struct ContentIndex {
    tag_dims: BTreeMap<String, usize>,
    vectors: HashMap<MovieId, ContentVector>,
}

impl ContentIndex {
    pub fn build(catalog: &Catalog) -> Self {
        let tags: BTreeSet<&String> = catalog.movies().iter().flat_map(|m| m.tags.keys()).collect();
        let tag_dims: BTreeMap<String, usize> = tags
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), Genre::ALL.len() + i))
            .collect();

        let mut df: HashMap<&str, usize> = HashMap::new();
        for m in catalog.movies() {
            for tag in m.tags.keys() {
                *df.entry(tag.as_str()).or_default() += 1;
            }
        }
        let n = catalog.len() as f64;
        let idf: HashMap<&str, f64> = df
            .iter()
            .map(|(t, d)| (*t, (n / (1.0 + *d as f64)).ln()))
            .collect();

        let vectors = catalog
            .movies()
            .iter()
            .map(|m| (m.id, Self::vector_for(m, &tag_dims, &idf)))
            .collect();
        ContentIndex { tag_dims, vectors }
    }

    fn vector_for(
        movie: &Movie,
        tag_dims: &BTreeMap<String, usize>,
        idf: &HashMap<&str, f64>,
    ) -> ContentVector {
        let mut entries: Vec<(usize, f64)> = movie.genres.iter().map(|g| (g.index(), 1.0)).collect();
        for (tag, count) in &movie.tags {
            entries.push((tag_dims[tag], f64::from(*count) * idf[tag.as_str()]));
        }
        entries.sort_by_key(|(d, _)| *d);
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut entries {
                *w /= norm;
            }
        }
        ContentVector(entries)
    }

    pub fn dimensions(&self) -> usize {
        Genre::ALL.len() + self.tag_dims.len()
    }

    pub fn tag_dimension(&self, tag: &str) -> Option<usize> {
        self.tag_dims.get(tag).copied()
    }

    pub fn vector(&self, movie: MovieId) -> Option<&ContentVector> {
        self.vectors.get(&movie)
    }

    /// Cosine similarity; zero when either vector is zero.
    pub fn similarity(&self, a: MovieId, b: MovieId) -> f64 {
        match (self.vector(a), self.vector(b)) {
            (Some(va), Some(vb)) if !va.is_zero() && !vb.is_zero() => va.dot(vb),
            _ => 0.0,
        }
    }

    /// Candidates ranked by content similarity to `seed`, most similar first;
    /// ties by rating count descending, then id. The seed itself is skipped.
    pub fn similar_items(
        &self,
        seed: MovieId,
        candidates: &[MovieId],
        catalog: &Catalog,
        n: usize,
    ) -> Result<Vec<(MovieId, f64)>, SimilarityError> {
        let seed_vec = self.vector(seed).ok_or(SimilarityError::UnknownSeed(seed))?;
        if seed_vec.is_zero() {
            return Err(SimilarityError::SeedWithoutContent(seed));
        }
        let mut unique: Vec<MovieId> = candidates.to_vec();
        unique.sort();
        unique.dedup();
        let mut scored: Vec<(MovieId, f64)> = unique
            .into_iter()
            .filter(|&id| id != seed && catalog.contains(id))
            .map(|id| (id, self.similarity(seed, id)))
            .collect();
        scored.sort_by(|a, b| {
            let pop = |id: MovieId| catalog.get(id).map_or(0, |m| m.rating_count);
            b.1.total_cmp(&a.1)
                .then(pop(b.0).cmp(&pop(a.0)))
                .then(a.0.cmp(&b.0))
        });
        scored.truncate(n);
        Ok(scored)
    }
}
