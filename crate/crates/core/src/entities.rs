//! Entity lexicons built from the catalog, and resolution of noisy utterance
//! spans to genres and movie titles.
//!
//! Title resolution tolerates transcription errors with a character-level
//! edit-distance score; anything under the configured threshold is dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use crate::catalog::{Catalog, Genre, GenreSynonyms, MovieId, SortKey};
use crate::error::{Error, Result};
use crate::text::{edit_similarity, normalize, normalized_key};

/// Checked-in synonym table used when no override file is configured.
pub const DEFAULT_GENRE_SYNONYMS: &str = include_str!("../data/genre_synonyms.tsv");

pub const DEFAULT_TITLE_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct TitleMatch {
    pub movie_id: MovieId,
    /// Token range in the utterance.
    pub span: Range<usize>,
    /// 1.0 exactly when the span is an indexed title.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum KeyKind {
    Canonical,
    Alias,
}

#[derive(Debug, Clone)]
struct TitleKey {
    key: String,
    ids: Vec<MovieId>,
    kind: KeyKind,
}

#[derive(Debug, Clone)]
pub struct Lexicons {
    genre_synonyms: GenreSynonyms,
    max_synonym_tokens: usize,
    titles: Vec<TitleKey>,
    title_lookup: HashMap<String, usize>,
    /// Title key indexes bucketed by character length.
    titles_by_len: BTreeMap<usize, Vec<usize>>,
    max_title_tokens: usize,
    tag_vocabulary: BTreeSet<String>,
    max_tag_tokens: usize,
    sort_keywords: BTreeMap<String, SortKey>,
    title_threshold: f64,
    /// Release year and rating count per movie, for title disambiguation.
    movie_facts: HashMap<MovieId, (Option<i32>, u32)>,
}

/// Parses `surface<TAB>Genre` lines. Blank lines and `#` comments are skipped.
///
/// Multi-word surfaces may not contain a shorter surface that maps to a
/// different genre; that keeps longest-match scanning monotone.
pub fn parse_genre_synonyms(text: &str) -> Result<GenreSynonyms> {
    const FILE: &str = "genre synonyms";
    let mut out = GenreSynonyms::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            file: FILE.into(),
            line: i as u64 + 1,
            message,
        };
        let (surface, genre) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected surface<TAB>genre".into()))?;
        let genre: Genre = genre.trim().parse().map_err(|e| malformed(format!("{e}")))?;
        let key = normalized_key(surface);
        if key.is_empty() {
            return Err(malformed("empty surface form".into()));
        }
        if let Some(prev) = out.insert(key.clone(), genre) {
            if prev != genre {
                return Err(malformed(format!("{key:?} maps to both {prev} and {genre}")));
            }
        }
    }
    for label in Genre::ALL {
        out.entry(normalized_key(label.label())).or_insert(label);
    }
    check_synonym_consistency(&out)?;
    Ok(out)
}

fn check_synonym_consistency(synonyms: &GenreSynonyms) -> Result<()> {
    for (surface, genre) in synonyms {
        let tokens: Vec<&str> = surface.split(' ').collect();
        for len in 1..tokens.len() {
            for start in 0..=tokens.len() - len {
                let sub = tokens[start..start + len].join(" ");
                if let Some(other) = synonyms.get(&sub) {
                    if other != genre {
                        return Err(Error::Malformed {
                            file: "genre synonyms".into(),
                            line: 0,
                            message: format!(
                                "{sub:?} ({other}) is part of {surface:?} ({genre})"
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn default_sort_keywords() -> BTreeMap<String, SortKey> {
    [
        ("popular", SortKey::Popular),
        ("best", SortKey::Popular),
        ("recent", SortKey::Recent),
        ("new", SortKey::Recent),
        ("newest", SortKey::Recent),
        ("latest", SortKey::Recent),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Index keys for one title: the full canonical form, the form without
/// parenthesized alternate titles, any "a.k.a." names, and a multi-word
/// prefix before a colon ("Star Wars: Episode IV" indexes "star wars").
fn title_keys(title: &str) -> (String, Vec<String>) {
    let canonical = normalized_key(title);
    let mut aliases = Vec::new();
    let primary = match title.find(" (") {
        Some(pos) => {
            for group in title[pos..].split('(').skip(1) {
                let inner = group.trim().trim_end_matches(')').trim();
                if let Some(aka) = inner.strip_prefix("a.k.a.") {
                    aliases.push(normalized_key(aka));
                }
            }
            &title[..pos]
        }
        None => title,
    };
    aliases.push(normalized_key(primary));
    if let Some((prefix, _)) = primary.split_once(':') {
        let prefix = normalize(prefix);
        if prefix.len() >= 2 {
            aliases.push(prefix.join(" "));
        }
    }
    aliases.retain(|a| !a.is_empty() && *a != canonical);
    aliases.sort();
    aliases.dedup();
    (canonical, aliases)
}

impl Lexicons {
    pub fn build(catalog: &Catalog, genre_synonyms: GenreSynonyms) -> Self {
        let mut keyed: BTreeMap<(String, KeyKind), Vec<MovieId>> = BTreeMap::new();
        for movie in catalog.movies() {
            let (canonical, aliases) = title_keys(&movie.title);
            keyed
                .entry((canonical, KeyKind::Canonical))
                .or_default()
                .push(movie.id);
            for alias in aliases {
                keyed.entry((alias, KeyKind::Alias)).or_default().push(movie.id);
            }
        }

        let mut titles = Vec::new();
        let mut title_lookup = HashMap::new();
        for ((key, kind), ids) in keyed {
            // a canonical title shadows an identical alias of another movie
            if let Some(&existing) = title_lookup.get(&key) {
                let entry: &mut TitleKey = &mut titles[existing];
                if kind == KeyKind::Alias && entry.kind == KeyKind::Canonical {
                    continue;
                }
                entry.ids.extend(ids);
                continue;
            }
            title_lookup.insert(key.clone(), titles.len());
            titles.push(TitleKey { key, ids, kind });
        }
        let mut titles_by_len: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in titles.iter().enumerate() {
            titles_by_len.entry(t.key.chars().count()).or_default().push(i);
        }
        let max_title_tokens = titles
            .iter()
            .map(|t| t.key.split(' ').count())
            .max()
            .unwrap_or(0);

        let tag_vocabulary: BTreeSet<String> = catalog
            .movies()
            .iter()
            .flat_map(|m| m.tags.keys().cloned())
            .collect();
        let max_tag_tokens = tag_vocabulary
            .iter()
            .map(|t| t.split(' ').count())
            .max()
            .unwrap_or(0);
        let max_synonym_tokens = genre_synonyms
            .keys()
            .map(|s| s.split(' ').count())
            .max()
            .unwrap_or(0);

        Lexicons {
            genre_synonyms,
            max_synonym_tokens,
            titles,
            title_lookup,
            titles_by_len,
            max_title_tokens,
            tag_vocabulary,
            max_tag_tokens,
            sort_keywords: default_sort_keywords(),
            title_threshold: DEFAULT_TITLE_THRESHOLD,
            movie_facts: catalog
                .movies()
                .iter()
                .map(|m| (m.id, (m.year, m.rating_count)))
                .collect(),
        }
    }

    /// Lexicons with the checked-in genre synonym table.
    pub fn with_default_synonyms(catalog: &Catalog) -> Self {
        let synonyms =
            parse_genre_synonyms(DEFAULT_GENRE_SYNONYMS).expect("bundled synonym table is valid");
        Self::build(catalog, synonyms)
    }

    pub fn with_title_threshold(mut self, threshold: f64) -> Self {
        self.title_threshold = threshold;
        self
    }

    pub fn title_threshold(&self) -> f64 {
        self.title_threshold
    }

    pub fn genre_synonyms(&self) -> &GenreSynonyms {
        &self.genre_synonyms
    }

    pub fn tag_vocabulary(&self) -> &BTreeSet<String> {
        &self.tag_vocabulary
    }

    pub fn sort_keyword(&self, token: &str) -> Option<SortKey> {
        self.sort_keywords.get(token).copied()
    }

    /// Movies indexed under exactly this normalized title key.
    pub fn lookup_title(&self, key: &str) -> &[MovieId] {
        self.title_lookup
            .get(key)
            .map_or(&[], |&i| self.titles[i].ids.as_slice())
    }

    /// Every span of `tokens` scored against the title index, best match
    /// per movie, in descending score order.
    ///
    /// Ties prefer the longer span, then a canonical title over an alias,
    /// then the lower movie id.
    pub fn resolve_title(&self, tokens: &[String]) -> Vec<TitleMatch> {
        // movie -> (score, span, kind)
        let mut best: HashMap<MovieId, (f64, Range<usize>, KeyKind)> = HashMap::new();
        let mut offer = |id: MovieId, score: f64, span: Range<usize>, kind: KeyKind| {
            let better = match best.get(&id) {
                None => true,
                Some((s, sp, k)) => {
                    (score, span.len(), std::cmp::Reverse(kind))
                        > (*s, sp.len(), std::cmp::Reverse(*k))
                }
            };
            if better {
                best.insert(id, (score, span, kind));
            }
        };

        let threshold = self.title_threshold;
        for start in 0..tokens.len() {
            let longest = self.max_title_tokens.min(tokens.len() - start);
            for len in 1..=longest {
                let span = start..start + len;
                let text = tokens[span.clone()].join(" ");
                if let Some(&i) = self.title_lookup.get(&text) {
                    let entry = &self.titles[i];
                    for &id in &entry.ids {
                        offer(id, 1.0, span.clone(), entry.kind);
                    }
                }
                let n = text.chars().count();
                // lev >= length difference, so only near-length keys can pass
                let lo = (n as f64 * threshold).floor() as usize;
                let hi = (n as f64 / threshold).ceil() as usize;
                for indexes in self.titles_by_len.range(lo..=hi).map(|(_, v)| v) {
                    for &i in indexes {
                        let entry = &self.titles[i];
                        if entry.key == text {
                            continue;
                        }
                        let score = edit_similarity(&text, &entry.key);
                        if score >= threshold {
                            for &id in &entry.ids {
                                offer(id, score, span.clone(), entry.kind);
                            }
                        }
                    }
                }
            }
        }

        let mut ranked: Vec<(MovieId, f64, Range<usize>, KeyKind)> = best
            .into_iter()
            .map(|(id, (score, span, kind))| (id, score, span, kind))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(b.2.len().cmp(&a.2.len()))
                .then(a.3.cmp(&b.3))
                .then(a.0.cmp(&b.0))
        });
        ranked
            .into_iter()
            .map(|(movie_id, score, span, _)| TitleMatch {
                movie_id,
                span,
                score,
            })
            .collect()
    }

    /// Picks one match from `resolve_title` output: among the matches tied
    /// with the first on score and span, prefer a release-year match, then
    /// the most-rated movie, then the lowest id.
    pub fn pick_title(&self, matches: &[TitleMatch], year: Option<i32>) -> Option<TitleMatch> {
        let first = matches.first()?;
        matches
            .iter()
            .take_while(|m| m.score == first.score && m.span == first.span)
            .min_by_key(|m| {
                let (movie_year, count) = self.movie_facts.get(&m.movie_id).copied().unwrap_or_default();
                let year_match = year.is_some() && movie_year == year;
                (!year_match, std::cmp::Reverse(count), m.movie_id)
            })
            .cloned()
    }

    /// Maximal genre-synonym occurrences: every occurrence not strictly
    /// contained in a longer one.
    pub fn genre_spans(&self, tokens: &[String]) -> Vec<(Range<usize>, Genre)> {
        let mut found = Vec::new();
        for start in 0..tokens.len() {
            let longest = self.max_synonym_tokens.min(tokens.len() - start);
            for len in 1..=longest {
                let key = tokens[start..start + len].join(" ");
                if let Some(&g) = self.genre_synonyms.get(&key) {
                    found.push((start..start + len, g));
                }
            }
        }
        let contained = |inner: &Range<usize>, outer: &Range<usize>| {
            outer.start <= inner.start && inner.end <= outer.end && outer.len() > inner.len()
        };
        found
            .iter()
            .filter(|(span, _)| !found.iter().any(|(other, _)| contained(span, other)))
            .cloned()
            .collect()
    }

    pub fn match_genres(&self, tokens: &[String]) -> BTreeSet<Genre> {
        self.genre_spans(tokens).into_iter().map(|(_, g)| g).collect()
    }

    /// Longest-first tag matches over tokens not already `consumed`.
    pub fn tag_spans(&self, tokens: &[String], consumed: &[bool]) -> Vec<(Range<usize>, String)> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < tokens.len() {
            let longest = self.max_tag_tokens.min(tokens.len() - start);
            let hit = (1..=longest).rev().find_map(|len| {
                let span = start..start + len;
                if consumed[span.clone()].iter().any(|&c| c) {
                    return None;
                }
                let key = tokens[span.clone()].join(" ");
                self.tag_vocabulary.contains(&key).then_some((span, key))
            });
            match hit {
                Some((span, key)) => {
                    start = span.end;
                    out.push((span, key));
                }
                None => start += 1,
            }
        }
        out
    }
}
