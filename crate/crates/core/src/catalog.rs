//! Movie catalog and ratings ingestion.
//!
//! Reads MovieLens-style `movies.csv`, `ratings.csv` and optional `tags.csv`
//! files, normalizes titles, aggregates tags and rating statistics, and answers
//! the filter and ordering queries the ranker builds on. Everything here is
//! immutable after load.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalized_key;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MovieId(pub u32);

impl fmt::Display for MovieId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

/// The closed MovieLens genre vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Genre {
    Action,
    Adventure,
    Animation,
    Children,
    Comedy,
    Crime,
    Documentary,
    Drama,
    Fantasy,
    FilmNoir,
    Horror,
    Imax,
    Musical,
    Mystery,
    Romance,
    SciFi,
    Thriller,
    War,
    Western,
}

impl Genre {
    pub const ALL: [Genre; 19] = [
        Genre::Action,
        Genre::Adventure,
        Genre::Animation,
        Genre::Children,
        Genre::Comedy,
        Genre::Crime,
        Genre::Documentary,
        Genre::Drama,
        Genre::Fantasy,
        Genre::FilmNoir,
        Genre::Horror,
        Genre::Imax,
        Genre::Musical,
        Genre::Mystery,
        Genre::Romance,
        Genre::SciFi,
        Genre::Thriller,
        Genre::War,
        Genre::Western,
    ];

    /// Label as written in the movies file.
    pub fn label(self) -> &'static str {
        match self {
            Genre::Action => "Action",
            Genre::Adventure => "Adventure",
            Genre::Animation => "Animation",
            Genre::Children => "Children",
            Genre::Comedy => "Comedy",
            Genre::Crime => "Crime",
            Genre::Documentary => "Documentary",
            Genre::Drama => "Drama",
            Genre::Fantasy => "Fantasy",
            Genre::FilmNoir => "Film-Noir",
            Genre::Horror => "Horror",
            Genre::Imax => "IMAX",
            Genre::Musical => "Musical",
            Genre::Mystery => "Mystery",
            Genre::Romance => "Romance",
            Genre::SciFi => "Sci-Fi",
            Genre::Thriller => "Thriller",
            Genre::War => "War",
            Genre::Western => "Western",
        }
    }

    /// Form used inside spoken sentences ("Here are some action movies").
    pub fn spoken(self) -> &'static str {
        match self {
            Genre::Action => "action",
            Genre::Adventure => "adventure",
            Genre::Animation => "animated",
            Genre::Children => "children's",
            Genre::Comedy => "comedy",
            Genre::Crime => "crime",
            Genre::Documentary => "documentary",
            Genre::Drama => "drama",
            Genre::Fantasy => "fantasy",
            Genre::FilmNoir => "film noir",
            Genre::Horror => "horror",
            Genre::Imax => "IMAX",
            Genre::Musical => "musical",
            Genre::Mystery => "mystery",
            Genre::Romance => "romance",
            Genre::SciFi => "science fiction",
            Genre::Thriller => "thriller",
            Genre::War => "war",
            Genre::Western => "western",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownGenre(pub String);

impl fmt::Display for UnknownGenre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown genre {:?}", self.0)
    }
}

impl std::error::Error for UnknownGenre {}

impl FromStr for Genre {
    type Err = UnknownGenre;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Genre::ALL
            .into_iter()
            .find(|g| g.label() == s)
            .ok_or_else(|| UnknownGenre(s.to_string()))
    }
}

impl Serialize for Genre {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Genre {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Movie {
    pub id: MovieId,
    /// Canonical title: year suffix removed, trailing article moved to the front.
    pub title: String,
    pub year: Option<i32>,
    pub genres: BTreeSet<Genre>,
    /// Normalized tag text to number of times it was applied.
    pub tags: BTreeMap<String, u32>,
    pub rating_count: u32,
    /// Present iff `rating_count > 0`.
    pub mean_rating: Option<f64>,
}

impl Movie {
    pub fn new(id: u32, title: &str, year: Option<i32>, genres: &[Genre]) -> Self {
        Movie {
            id: MovieId(id),
            title: title.to_string(),
            year,
            genres: genres.iter().copied().collect(),
            tags: BTreeMap::new(),
            rating_count: 0,
            mean_rating: None,
        }
    }

    pub fn with_tags<'a>(mut self, tags: impl IntoIterator<Item = &'a str>) -> Self {
        for tag in tags {
            let key = normalized_key(tag);
            if !key.is_empty() {
                *self.tags.entry(key).or_default() += 1;
            }
        }
        self
    }

    pub fn with_ratings(mut self, count: u32, mean: f64) -> Self {
        self.rating_count = count;
        self.mean_rating = (count > 0).then_some(mean);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortKey {
    Popular,
    Recent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    #[default]
    Personalized,
    Popular,
    Recent,
}

impl SortOrder {
    pub fn key(self) -> Option<SortKey> {
        match self {
            SortOrder::Personalized => None,
            SortOrder::Popular => Some(SortKey::Popular),
            SortOrder::Recent => Some(SortKey::Recent),
        }
    }
}

impl From<SortKey> for SortOrder {
    fn from(key: SortKey) -> Self {
        match key {
            SortKey::Popular => SortOrder::Popular,
            SortKey::Recent => SortOrder::Recent,
        }
    }
}

/// Constraints for a candidate query. Genres are conjunctive; descriptor
/// terms are disjunctive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub genre_filter: BTreeSet<Genre>,
    pub descriptor_terms: Vec<String>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
    pub sort: SortOrder,
    /// Set only for related-item requests.
    pub seed_movie: Option<MovieId>,
    /// Carried for completeness; cast data is not available so it never filters.
    pub person_filter: Option<String>,
}

impl QuerySpec {
    pub fn genres(genres: impl IntoIterator<Item = Genre>) -> Self {
        QuerySpec {
            genre_filter: genres.into_iter().collect(),
            ..Default::default()
        }
    }

    /// True when any field other than sort order would restrict candidates.
    pub fn has_filters(&self) -> bool {
        !self.genre_filter.is_empty()
            || !self.descriptor_terms.is_empty()
            || self.year_min.is_some()
            || self.year_max.is_some()
    }
}

/// Surface form (normalized) to canonical genre.
pub type GenreSynonyms = BTreeMap<String, Genre>;

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    movies: Vec<Movie>,
    index: HashMap<MovieId, usize>,
}

impl Catalog {
    /// Builds a catalog from already-parsed movies. Panics on duplicate ids;
    /// file loading reports those as errors instead.
    pub fn from_movies(movies: impl IntoIterator<Item = Movie>) -> Self {
        let mut movies: Vec<Movie> = movies.into_iter().collect();
        movies.sort_by_key(|m| m.id);
        let mut index = HashMap::with_capacity(movies.len());
        for (i, m) in movies.iter().enumerate() {
            assert!(index.insert(m.id, i).is_none(), "duplicate movie id {}", m.id);
        }
        Catalog { movies, index }
    }

    pub fn len(&self) -> usize {
        self.movies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.movies.is_empty()
    }

    pub fn get(&self, id: MovieId) -> Option<&Movie> {
        self.index.get(&id).map(|&i| &self.movies[i])
    }

    pub fn contains(&self, id: MovieId) -> bool {
        self.index.contains_key(&id)
    }

    /// Movies in ascending id order.
    pub fn movies(&self) -> &[Movie] {
        &self.movies
    }

    pub fn ids(&self) -> impl Iterator<Item = MovieId> + '_ {
        self.movies.iter().map(|m| m.id)
    }

    /// Position of a movie in `movies()`, usable as a dense index.
    pub fn position(&self, id: MovieId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn tag_count(&self) -> usize {
        self.movies.iter().map(|m| m.tags.values().sum::<u32>() as usize).sum()
    }

    /// Ids of every movie satisfying all of the spec's filters, ascending.
    pub fn filter_candidates(&self, spec: &QuerySpec, synonyms: &GenreSynonyms) -> Vec<MovieId> {
        let descriptors: Vec<String> = spec
            .descriptor_terms
            .iter()
            .map(|t| normalized_key(t))
            .collect();
        self.movies
            .iter()
            .filter(|m| spec.genre_filter.is_subset(&m.genres))
            .filter(|m| match spec.year_min {
                Some(min) => m.year.is_some_and(|y| y >= min),
                None => true,
            })
            .filter(|m| match spec.year_max {
                Some(max) => m.year.is_some_and(|y| y <= max),
                None => true,
            })
            .filter(|m| {
                descriptors.is_empty()
                    || descriptors
                        .iter()
                        .any(|d| descriptor_matches(m, d, synonyms))
            })
            .map(|m| m.id)
            .collect()
    }

    /// Orders `ids` by popularity (rating count) or recency (release year),
    /// both descending, with absent years last and ascending id as tie-break.
    pub fn order_by(&self, ids: &[MovieId], key: SortKey) -> Vec<MovieId> {
        let mut out = ids.to_vec();
        match key {
            SortKey::Popular => out.sort_by_key(|id| {
                let count = self.get(*id).map_or(0, |m| m.rating_count);
                (std::cmp::Reverse(count), *id)
            }),
            SortKey::Recent => out.sort_by_key(|id| {
                let year = self.get(*id).and_then(|m| m.year);
                (year.is_none(), std::cmp::Reverse(year), *id)
            }),
        }
        out
    }
}

fn descriptor_matches(movie: &Movie, term: &str, synonyms: &GenreSynonyms) -> bool {
    movie.tags.contains_key(term)
        || synonyms
            .get(term)
            .is_some_and(|g| movie.genres.contains(g))
}

/// Sparse user x movie ratings on the 0.5-step scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsMatrix {
    by_user: BTreeMap<UserId, BTreeMap<MovieId, f64>>,
    len: usize,
}

impl RatingsMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous rating for the pair, if any.
    pub fn insert(&mut self, user: UserId, movie: MovieId, rating: f64) -> Option<f64> {
        let prev = self.by_user.entry(user).or_default().insert(movie, rating);
        if prev.is_none() {
            self.len += 1;
        }
        prev
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn user_count(&self) -> usize {
        self.by_user.len()
    }

    /// Users in ascending id order with their ratings.
    pub fn users(&self) -> impl Iterator<Item = (UserId, &BTreeMap<MovieId, f64>)> {
        self.by_user.iter().map(|(u, r)| (*u, r))
    }

    pub fn get(&self, user: UserId, movie: MovieId) -> Option<f64> {
        self.by_user.get(&user)?.get(&movie).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (UserId, MovieId, f64)> + '_ {
        self.by_user
            .iter()
            .flat_map(|(u, r)| r.iter().map(move |(m, v)| (*u, *m, *v)))
    }

    /// The user's ratings; empty for unknown users.
    pub fn profile(&self, user: UserId) -> UserProfile {
        UserProfile {
            user_id: user,
            ratings: self.by_user.get(&user).cloned().unwrap_or_default(),
        }
    }
}

impl FromIterator<(u32, u32, f64)> for RatingsMatrix {
    /// Later duplicates overwrite earlier ones.
    fn from_iter<T: IntoIterator<Item = (u32, u32, f64)>>(iter: T) -> Self {
        let mut m = RatingsMatrix::new();
        for (u, i, r) in iter {
            m.insert(UserId(u), MovieId(i), r);
        }
        m
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserProfile {
    pub user_id: UserId,
    pub ratings: BTreeMap<MovieId, f64>,
}

impl UserProfile {
    pub fn new(user: u32, ratings: impl IntoIterator<Item = (u32, f64)>) -> Self {
        UserProfile {
            user_id: UserId(user),
            ratings: ratings.into_iter().map(|(m, r)| (MovieId(m), r)).collect(),
        }
    }

    pub fn rating(&self, movie: MovieId) -> Option<f64> {
        self.ratings.get(&movie).copied()
    }

    pub fn has_rated(&self, movie: MovieId) -> bool {
        self.ratings.contains_key(&movie)
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }
}

static YEAR_SUFFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(.*?)\s*\((\d{4})\)\s*$").unwrap());
static TRAILING_ARTICLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(.+), (The|A|An|Les|La|Le|Il|El|Das|Der|Die)( \(.*\))?$").unwrap()
});

/// Splits a MovieLens title into canonical title and release year:
/// `"Matrix, The (1999)"` becomes `("The Matrix", Some(1999))`.
pub fn parse_title(raw: &str) -> (String, Option<i32>) {
    let raw = raw.trim();
    let (base, year) = match YEAR_SUFFIX.captures(raw) {
        Some(c) => (c[1].to_string(), c[2].parse().ok()),
        None => (raw.to_string(), None),
    };
    let title = match TRAILING_ARTICLE.captures(&base) {
        Some(c) => format!(
            "{} {}{}",
            &c[2],
            &c[1],
            c.get(3).map_or("", |m| m.as_str())
        ),
        None => base,
    };
    (title, year)
}

const NO_GENRES: &str = "(no genres listed)";

/// Loads and indexes the three data files.
pub fn load_catalog(
    movies: &Path,
    ratings: &Path,
    tags: Option<&Path>,
) -> Result<(Catalog, RatingsMatrix)> {
    let open = |p: &Path| File::open(p).map_err(|e| Error::io(p, e));
    let tags_file = tags.map(open).transpose()?;
    load_catalog_from_readers(open(movies)?, open(ratings)?, tags_file)
}

/// The small MovieLens-format sample bundled with the crate.
pub mod sample {
    pub const MOVIES: &str = include_str!("../data/sample/movies.csv");
    pub const RATINGS: &str = include_str!("../data/sample/ratings.csv");
    pub const TAGS: &str = include_str!("../data/sample/tags.csv");
}

pub fn load_sample() -> Result<(Catalog, RatingsMatrix)> {
    load_catalog_from_readers(
        sample::MOVIES.as_bytes(),
        sample::RATINGS.as_bytes(),
        Some(sample::TAGS.as_bytes()),
    )
}

pub fn load_catalog_from_readers<M: Read, R: Read, T: Read>(
    movies: M,
    ratings: R,
    tags: Option<T>,
) -> Result<(Catalog, RatingsMatrix)> {
    let mut movie_list = read_movies(movies)?;
    let index: HashMap<MovieId, usize> = movie_list
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id, i))
        .collect();

    let matrix = read_ratings(ratings, &index)?;
    let mut sums = vec![(0u32, 0.0f64); movie_list.len()];
    for (_, movie, rating) in matrix.entries() {
        let slot = &mut sums[index[&movie]];
        slot.0 += 1;
        slot.1 += rating;
    }
    for (m, (count, sum)) in movie_list.iter_mut().zip(sums) {
        m.rating_count = count;
        m.mean_rating = (count > 0).then(|| sum / f64::from(count));
    }

    if let Some(tags) = tags {
        read_tags(tags, &index, &mut movie_list)?;
    }
    Ok((Catalog::from_movies(movie_list), matrix))
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &str, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_error(file, e))?;
    let got: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if got != expected {
        return Err(Error::Malformed {
            file: file.to_string(),
            line: 1,
            message: format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Malformed {
        file: file.to_string(),
        line,
        message: e.to_string(),
    }
}

fn malformed(file: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Malformed {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_id(file: &str, line: u64, field: &str, what: &str) -> Result<u32> {
    field
        .trim()
        .parse::<u32>()
        .ok()
        .filter(|&id| id > 0)
        .ok_or_else(|| malformed(file, line, format!("invalid {what} {field:?}")))
}

fn read_movies<R: Read>(source: R) -> Result<Vec<Movie>> {
    const FILE: &str = "movies";
    let mut rdr = csv_reader(source);
    check_header(&mut rdr, FILE, &["movieId", "title", "genres"])?;
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(FILE, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = parse_id(FILE, line, &record[0], "movie id")?;
        if seen.insert(id, line).is_some() {
            return Err(Error::DuplicateMovie {
                file: FILE.into(),
                line,
                id,
            });
        }
        let (title, year) = parse_title(&record[1]);
        if title.is_empty() {
            return Err(malformed(FILE, line, "empty title"));
        }
        let genres = match record[2].trim() {
            "" | NO_GENRES => BTreeSet::new(),
            list => list
                .split('|')
                .map(|g| g.trim().parse::<Genre>())
                .collect::<Result<BTreeSet<_>, _>>()
                .map_err(|e| malformed(FILE, line, e.to_string()))?,
        };
        out.push(Movie {
            id: MovieId(id),
            title,
            year,
            genres,
            tags: BTreeMap::new(),
            rating_count: 0,
            mean_rating: None,
        });
    }
    Ok(out)
}

fn parse_rating(file: &str, line: u64, field: &str) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| malformed(file, line, format!("invalid rating {field:?}")))?;
    let on_scale = (0.5..=5.0).contains(&value) && (value * 2.0).fract() == 0.0;
    if !on_scale {
        return Err(malformed(
            file,
            line,
            format!("rating {value} is not on the 0.5..5.0 half-star scale"),
        ));
    }
    Ok(value)
}

fn read_ratings<R: Read>(source: R, movies: &HashMap<MovieId, usize>) -> Result<RatingsMatrix> {
    const FILE: &str = "ratings";
    let mut rdr = csv_reader(source);
    check_header(&mut rdr, FILE, &["userId", "movieId", "rating", "timestamp"])?;
    let mut matrix = RatingsMatrix::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(FILE, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let user = parse_id(FILE, line, &record[0], "user id")?;
        let movie = parse_id(FILE, line, &record[1], "movie id")?;
        let rating = parse_rating(FILE, line, &record[2])?;
        if !movies.contains_key(&MovieId(movie)) {
            return Err(Error::UnknownMovie {
                file: FILE.into(),
                line,
                id: movie,
            });
        }
        if matrix.insert(UserId(user), MovieId(movie), rating).is_some() {
            return Err(Error::DuplicateRating {
                file: FILE.into(),
                line,
                user,
                movie,
            });
        }
    }
    Ok(matrix)
}

fn read_tags<R: Read>(
    source: R,
    movies: &HashMap<MovieId, usize>,
    list: &mut [Movie],
) -> Result<()> {
    const FILE: &str = "tags";
    let mut rdr = csv_reader(source);
    check_header(&mut rdr, FILE, &["userId", "movieId", "tag", "timestamp"])?;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(FILE, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let movie = parse_id(FILE, line, &record[1], "movie id")?;
        let Some(&i) = movies.get(&MovieId(movie)) else {
            return Err(Error::UnknownMovie {
                file: FILE.into(),
                line,
                id: movie,
            });
        };
        let tag = normalized_key(&record[2]);
        if !tag.is_empty() {
            *list[i].tags.entry(tag).or_default() += 1;
        }
    }
    Ok(())
}
