//! Independent oracles and fixtures shared by the integration tests and
//! the acceptance harness. Nothing here calls the code under test to
//! produce an expected value.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use mltv_core::catalog::{Catalog, Genre, Movie, MovieId, RatingsMatrix, SortKey, UserProfile};
use mltv_core::config::Config;
use mltv_core::dialogue::{handle, open_session, Deps, SessionState, ViewFrame};
use mltv_core::entities::TitleMatch;
use mltv_core::intent::{IntentLabel, SlotSet, StructuredRequest};
use mltv_core::protocol::View;
use mltv_core::recsys::{build_item_model, ContentIndex};
use mltv_core::service::Models;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_models() -> Arc<Models> {
    static MODELS: OnceLock<Arc<Models>> = OnceLock::new();
    MODELS
        .get_or_init(|| Arc::new(Models::from_config(&Config::default()).expect("sample data loads")))
        .clone()
}

// ---- collaborative filtering ----

/// users x items, `None` where unrated. User `u` is id `u + 1`, item `i` is id `i + 1`.
pub type Dense = Vec<Vec<Option<f64>>>;

/// The 5-user x 6-item fixture.
pub fn cf_fixture() -> Dense {
    let n = None;
    let s = |v: f64| Some(v);
    vec![
        vec![s(5.0), s(3.0), s(4.0), n, s(1.0), s(2.0)],
        vec![s(4.0), n, s(4.0), s(2.0), s(1.0), n],
        vec![s(1.0), s(2.0), n, s(5.0), s(4.0), s(3.0)],
        vec![n, s(4.0), s(3.0), s(4.0), n, s(5.0)],
        vec![s(2.0), s(1.0), s(5.0), s(3.0), s(2.0), n],
    ]
}

/// Adjusted cosine for the fixture with min_support 2, computed once by a
/// separate script and checked in. `(a, b, sim)` for a < b.
pub const CF_FIXTURE_SIMILARITIES: &[(u32, u32, f64)] = &[
    (1, 2, 0.5425797402981534),
    (1, 3, 0.30232096300723144),
    (1, 4, -0.9789975153178582),
    (1, 5, -0.8562331000499677),
    (1, 6, -0.7071067811865475),
    (2, 3, -0.8615497903412856),
    (2, 4, -0.6860128686890022),
    (2, 5, -0.009156986997206693),
    (2, 6, 0.0),
    (3, 4, 0.009175646856025546),
    (3, 5, -0.7160007852797539),
    (3, 6, -0.9999999999999998),
    (4, 5, 0.6723137407708732),
    (4, 6, 0.0),
    (5, 6, 0.8944271909999159),
];

/// User 5's predicted rating for item 6 over the full neighborhood (k = 6).
pub const CF_FIXTURE_PREDICTION_U5_I6: f64 = -1.7779353373140356;

pub fn to_matrix(dense: &Dense) -> RatingsMatrix {
    let mut out = Vec::new();
    for (u, row) in dense.iter().enumerate() {
        for (i, r) in row.iter().enumerate() {
            if let Some(r) = r {
                out.push((u as u32 + 1, i as u32 + 1, *r));
            }
        }
    }
    out.into_iter().collect()
}

/// Textbook double loop: center each rating on its user's mean, then
/// cosine over co-raters. `None` for pairs under `min_support` or with a
/// zero norm.
pub fn adjusted_cosine_oracle(dense: &Dense, min_support: usize) -> BTreeMap<(u32, u32), f64> {
    let items = dense.first().map_or(0, Vec::len);
    let means: Vec<Option<f64>> = dense
        .iter()
        .map(|row| {
            let rated: Vec<f64> = row.iter().flatten().copied().collect();
            (!rated.is_empty()).then(|| rated.iter().sum::<f64>() / rated.len() as f64)
        })
        .collect();
    let mut out = BTreeMap::new();
    for a in 0..items {
        for b in 0..items {
            if a == b {
                continue;
            }
            let (mut dot, mut na, mut nb, mut support) = (0.0, 0.0, 0.0, 0);
            for (u, row) in dense.iter().enumerate() {
                if let (Some(ra), Some(rb), Some(m)) = (row[a], row[b], means[u]) {
                    dot += (ra - m) * (rb - m);
                    na += (ra - m) * (ra - m);
                    nb += (rb - m) * (rb - m);
                    support += 1;
                }
            }
            if support >= min_support && na > 0.0 && nb > 0.0 {
                out.insert((a as u32 + 1, b as u32 + 1), dot / (na.sqrt() * nb.sqrt()));
            }
        }
    }
    out
}

/// Checks `build_item_model` against the oracle: every retained neighbor
/// value within 1e-9, lists of length min(k, available), and nothing
/// excluded that beats a retained neighbor.
pub fn check_item_model(dense: &Dense, k: usize, min_support: usize) -> Result<(), String> {
    let oracle = adjusted_cosine_oracle(dense, min_support);
    let model = build_item_model(&to_matrix(dense), k, min_support);
    let items = dense.first().map_or(0, Vec::len) as u32;
    for a in 1..=items {
        let expected: Vec<(u32, f64)> = oracle
            .iter()
            .filter(|((x, _), _)| *x == a)
            .map(|((_, b), s)| (*b, *s))
            .collect();
        let got = model.neighbors(MovieId(a));
        if got.len() != expected.len().min(k) {
            return Err(format!("item {a}: {} neighbors, oracle has {} (k={k})", got.len(), expected.len()));
        }
        for (b, s) in got {
            let Some(&(_, want)) = expected.iter().find(|(x, _)| MovieId(*x) == *b) else {
                return Err(format!("item {a}: neighbor {b} not in oracle"));
            };
            if (s - want).abs() > 1e-9 {
                return Err(format!("sim({a},{b}) = {s}, oracle {want}"));
            }
        }
        let weakest = got.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
        for (b, s) in &expected {
            if !got.iter().any(|(x, _)| *x == MovieId(*b)) && *s > weakest + 1e-9 {
                return Err(format!("item {a}: dropped {b} ({s}) but kept one at {weakest}"));
            }
        }
        if got.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(format!("item {a}: neighbors not in descending order"));
        }
    }
    Ok(())
}

/// Prediction oracle: arithmetic over the oracle's top-k table.
pub fn predict_oracle(dense: &Dense, user: usize, item: u32, k: usize, min_support: usize) -> Option<f64> {
    let oracle = adjusted_cosine_oracle(dense, min_support);
    let mut nbrs: Vec<(u32, f64)> = oracle
        .iter()
        .filter(|((a, _), _)| *a == item)
        .map(|((_, b), s)| (*b, *s))
        .collect();
    nbrs.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    nbrs.truncate(k);
    let (mut num, mut den, mut any) = (0.0, 0.0, false);
    for (b, s) in nbrs {
        if let Some(r) = dense[user][b as usize - 1] {
            num += s * r;
            den += s.abs();
            any = true;
        }
    }
    (any && den > 0.0).then(|| num / den)
}

pub fn random_dense(rng: &mut impl Rng, max_users: usize, max_items: usize) -> Dense {
    let users = rng.random_range(1..=max_users);
    let items = rng.random_range(1..=max_items);
    (0..users)
        .map(|_| {
            (0..items)
                .map(|_| rng.random_bool(0.6).then(|| f64::from(rng.random_range(1..=10u32)) * 0.5))
                .collect()
        })
        .collect()
}

// ---- content similarity ----

/// Ten movies around a Pitch Black-like seed (id 1).
pub fn content_fixture() -> Catalog {
    use Genre::*;
    Catalog::from_movies([
        Movie::new(1, "Seed", Some(2000), &[SciFi, Thriller]).with_tags(["aliens", "dark", "space", "space"]).with_ratings(50, 3.5),
        Movie::new(2, "Twin", Some(2001), &[SciFi, Thriller]).with_tags(["aliens", "dark", "space", "space"]).with_ratings(10, 3.0),
        Movie::new(3, "Twin Popular", Some(2002), &[SciFi, Thriller]).with_tags(["aliens", "dark", "space", "space"]).with_ratings(90, 4.0),
        Movie::new(4, "Space Horror", Some(1979), &[Horror, SciFi]).with_tags(["aliens", "space"]).with_ratings(80, 4.2),
        Movie::new(5, "Thriller", Some(1995), &[Thriller, Crime]).with_tags(["heist"]).with_ratings(40, 3.8),
        Movie::new(6, "Romance", Some(2003), &[Romance, Comedy]).with_tags(["paris"]).with_ratings(30, 3.1),
        Movie::new(7, "Dark Drama", Some(2010), &[Drama]).with_tags(["dark"]).with_ratings(20, 3.3),
        Movie::new(8, "Sci-Fi Only", Some(2015), &[SciFi]).with_ratings(60, 3.9),
        Movie::new(9, "Untagged", None, &[]).with_ratings(5, 2.0),
        Movie::new(10, "Space Doc", Some(2011), &[Documentary]).with_tags(["space", "space", "space"]).with_ratings(15, 4.5),
    ])
}

/// Dense genre-then-tag vectors, TF-IDF on tags, plain cosine, sorted by
/// similarity (to 1e-12), then rating count descending, then id.
pub fn dense_cosine_order(catalog: &Catalog, seed: MovieId) -> Vec<MovieId> {
    let tags: BTreeSet<&String> = catalog.movies().iter().flat_map(|m| m.tags.keys()).collect();
    let tags: Vec<&String> = tags.into_iter().collect();
    let n = catalog.len() as f64;
    let vec_of = |m: &Movie| -> Vec<f64> {
        let mut v: Vec<f64> = Genre::ALL.iter().map(|g| if m.genres.contains(g) { 1.0 } else { 0.0 }).collect();
        for t in &tags {
            let df = catalog.movies().iter().filter(|x| x.tags.contains_key(*t)).count() as f64;
            let tf = f64::from(m.tags.get(*t).copied().unwrap_or(0));
            v.push(tf * (n / (1.0 + df)).ln());
        }
        v
    };
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 { 0.0 } else { dot / (na * nb) }
    };
    let s = vec_of(catalog.get(seed).unwrap());
    let mut scored: Vec<(i64, u32, MovieId)> = catalog
        .movies()
        .iter()
        .filter(|m| m.id != seed)
        .map(|m| ((cos(&s, &vec_of(m)) * 1e12).round() as i64, m.rating_count, m.id))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    scored.into_iter().map(|(_, _, id)| id).collect()
}

/// For every seed with content, compares `similar_items` to the dense oracle.
pub fn check_content_fixture() -> Result<(), String> {
    let catalog = content_fixture();
    let index = ContentIndex::build(&catalog);
    let all: Vec<MovieId> = catalog.ids().collect();
    for m in catalog.movies() {
        let got = index.similar_items(m.id, &all, &catalog, all.len());
        if m.genres.is_empty() && m.tags.is_empty() {
            if got.is_ok() {
                return Err(format!("seed {} has no content but got a ranking", m.id));
            }
            continue;
        }
        let got: Vec<MovieId> = got.map_err(|e| e.to_string())?.into_iter().map(|(id, _)| id).collect();
        let want = dense_cosine_order(&catalog, m.id);
        if got != want {
            return Err(format!("seed {}: got {got:?}, oracle {want:?}", m.id));
        }
    }
    Ok(())
}

// ---- title noise ----

pub const TITLE_NOISE_SEED: u64 = 20180401;

/// 100 distinct sample titles with one letter substituted each.
pub fn perturbed_titles(catalog: &Catalog, seed: u64) -> Vec<(MovieId, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut movies: Vec<&Movie> = catalog.movies().iter().collect();
    movies.shuffle(&mut rng);
    movies
        .into_iter()
        .take(100)
        .map(|m| {
            let clean = mltv_core::text::normalize(&m.title).join(" ");
            let mut chars: Vec<char> = clean.chars().collect();
            let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_ascii_alphanumeric()).collect();
            let at = letters[rng.random_range(0..letters.len())];
            let replacement = loop {
                let c = (b'a' + rng.random_range(0..26u8)) as char;
                if c != chars[at] {
                    break c;
                }
            };
            chars[at] = replacement;
            (m.id, chars.into_iter().collect())
        })
        .collect()
}

/// (correct, total) top-match resolutions over the perturbed sample.
pub fn title_noise_trial(models: &Models) -> (usize, usize) {
    let trials = perturbed_titles(&models.catalog, TITLE_NOISE_SEED);
    let correct = trials
        .iter()
        .filter(|(id, text)| {
            let tokens = mltv_core::text::normalize(text);
            let matches = models.lexicons.resolve_title(&tokens);
            models.lexicons.pick_title(&matches, None).is_some_and(|m| m.movie_id == *id)
        })
        .count();
    (correct, trials.len())
}

// ---- dialogue sequences ----

#[derive(Debug, Clone)]
pub struct Step {
    pub dt: u64,
    pub request: StructuredRequest,
}

const GAPS: [u64; 8] = [0, 1, 5, 30, 119, 120, 121, 600];

pub fn random_steps(rng: &mut impl Rng, catalog: &Catalog, len: usize) -> Vec<Step> {
    let ids: Vec<MovieId> = catalog.ids().collect();
    let genres = [Genre::Action, Genre::Comedy, Genre::SciFi, Genre::Drama, Genre::Horror, Genre::Thriller];
    (0..len)
        .map(|_| {
            // long gaps are rare so most sequences get deep
            let dt = if rng.random_bool(0.9) { GAPS[rng.random_range(0..4)] } else { GAPS[rng.random_range(4..8)] };
            let intent = IntentLabel::ALL[rng.random_range(0..IntentLabel::ALL.len())];
            let mut slots = SlotSet::default();
            match intent {
                IntentLabel::FindMovies => {
                    for _ in 0..rng.random_range(0..3) {
                        slots.genres.insert(genres[rng.random_range(0..genres.len())]);
                    }
                    if rng.random_bool(0.3) {
                        slots.sort = Some(if rng.random_bool(0.5) { SortKey::Popular } else { SortKey::Recent });
                    }
                    if rng.random_bool(0.2) {
                        slots.year_min = Some(rng.random_range(1970..2015));
                    }
                    if rng.random_bool(0.15) {
                        slots.descriptor_terms.push("futuristic".into());
                    }
                    if rng.random_bool(0.05) {
                        slots.person_span = Some("tom hanks".into());
                    }
                    slots.refinement = rng.random_bool(0.3);
                }
                IntentLabel::SimilarMovies | IntentLabel::ShowDetails if rng.random_bool(0.8) => {
                    slots.title_match = Some(TitleMatch {
                        movie_id: ids[rng.random_range(0..ids.len())],
                        span: 0..1,
                        score: 1.0,
                    });
                }
                _ => {}
            }
            Step {
                dt,
                request: StructuredRequest::new(intent, slots),
            }
        })
        .collect()
}

fn page_ids(view: &View) -> Option<Vec<MovieId>> {
    match view {
        View::Explore(p) => Some(p.movies.iter().map(|c| c.id).collect()),
        _ => None,
    }
}

/// Runs one sequence, checking after every step: Home at the bottom of an
/// open stack, GoBack undoing any push, paging disjoint and a prefix of the
/// ranked list, the 120 s boundary, monotone activity time, and purity.
pub fn check_sequence(models: &Models, profile: &UserProfile, steps: &[Step]) -> Result<(), String> {
    let deps = Deps {
        catalog: &models.catalog,
        lexicons: &models.lexicons,
        neighborhood: &models.neighborhood,
        content: &models.content,
        profile,
        config: &models.dialogue,
    };
    let timeout = models.dialogue.session_timeout_s;
    let page = models.dialogue.page_size;
    let mut now = 1_000;
    let mut state: SessionState = open_session("prop", "u", now);
    // pages emitted for the current Explore frame, in order
    let mut run: Option<(Vec<MovieId>, Vec<MovieId>)> = None;

    for (n, step) in steps.iter().enumerate() {
        now += step.dt;
        let ctx = |msg: String| format!("step {n} ({:?}, dt {}): {msg}", step.request.intent, step.dt);
        let (next, update) = handle(&state, &step.request, &deps, now);

        let again = handle(&state, &step.request, &deps, now);
        if again.0 != next || again.1 != update {
            return Err(ctx("handle is not deterministic".into()));
        }
        if next.last_activity < state.last_activity {
            return Err(ctx("last_activity went backwards".into()));
        }
        if next.open && next.view_stack.first() != Some(&ViewFrame::Home) {
            return Err(ctx("open session without Home at the bottom".into()));
        }

        let idle = now - state.last_activity;
        let is_home = step.request.intent == IntentLabel::Home;
        if state.open && idle > timeout && !is_home {
            if next.open || next.last_activity != state.last_activity {
                return Err(ctx(format!("idle {idle}s should have expired")));
            }
        } else if state.open && idle <= timeout && next.last_activity != now {
            return Err(ctx(format!("idle {idle}s should have been handled")));
        }
        if is_home && (idle > timeout || !state.open) && next != open_session("prop", "u", now) {
            return Err(ctx("reopen is not a fresh session".into()));
        }

        if next.open && next.view_stack.len() == state.view_stack.len() + 1 {
            let (undone, _) = handle(&next, &StructuredRequest::new(IntentLabel::GoBack, SlotSet::default()), &deps, now);
            if undone.view_stack != state.view_stack {
                return Err(ctx("GoBack did not restore the previous stack".into()));
            }
        }

        if let View::Explore(p) = &update.view {
            if p.movies.len() > page {
                return Err(ctx("explore page longer than page_size".into()));
            }
        }
        match (next.view_stack.last(), page_ids(&update.view)) {
            (Some(ViewFrame::Explore(frame)), Some(ids)) if next.open => {
                let offset = frame.page_offset;
                if offset % page != 0 || (offset >= frame.ranked.len() && offset != 0) {
                    return Err(ctx(format!("bad page offset {offset}")));
                }
                let end = (offset + page).min(frame.ranked.len());
                if ids != frame.ranked[offset..end] {
                    return Err(ctx("page is not the ranked slice at its offset".into()));
                }
                let advanced = step.request.intent == IntentLabel::MoreResults
                    && matches!(state.view_stack.last(), Some(ViewFrame::Explore(prev)) if prev.ranked == frame.ranked && prev.page_offset < offset);
                match run.as_mut() {
                    Some((ranked, seen)) if advanced && *ranked == frame.ranked => {
                        if ids.iter().any(|id| seen.contains(id)) {
                            return Err(ctx("paging repeated a movie".into()));
                        }
                        seen.extend(ids.iter().copied());
                        if !ranked.starts_with(seen) {
                            return Err(ctx("pages are not a prefix of the ranked list".into()));
                        }
                    }
                    _ => run = Some((frame.ranked.clone(), frame.ranked[..end].to_vec())),
                }
            }
            _ => run = None,
        }
        state = next;
    }
    Ok(())
}

pub fn sequence_profile(models: &Models) -> UserProfile {
    models.profile("1")
}

/// `count` seeded sequences of `len` steps; the first failure, if any.
pub fn run_dialogue_sequences(models: &Models, count: u64, len: usize) -> Result<(), String> {
    let profile = sequence_profile(models);
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = random_steps(&mut rng, &models.catalog, len);
        check_sequence(models, &profile, &steps).map_err(|e| format!("sequence seed {seed}: {e}"))?;
    }
    Ok(())
}

// ---- wire goldens ----

pub const WIRE_SCRIPT: &str = "Alexa, open MovieLens
show action movies
show me more like Pitch Black
tell me about Pitch Black
play the trailer
";

/// (file name, compact JSON) for every golden wire message, produced by
/// running `WIRE_SCRIPT` on the sample data.
pub fn wire_cases(models: Arc<Models>) -> Vec<(&'static str, String)> {
    use mltv_core::protocol::SkillRequest;
    let turns = mltv_core::transcript::run_script_text(models, WIRE_SCRIPT).expect("script runs");
    let names = [
        "render_home.json",
        "render_explore.json",
        "render_explore_similar.json",
        "render_details.json",
        "render_details_trailer.json",
    ];
    let mut out: Vec<(&'static str, String)> = names.into_iter().zip(turns.iter().map(|t| t.message.to_json())).collect();
    let request = SkillRequest {
        session_id: "amzn1.echo-api.session.0001".into(),
        user_id: "1".into(),
        text: "show action movies".into(),
    };
    out.push(("skill_request.json", serde_json::to_string(&request).unwrap()));
    out.push(("skill_response.json", serde_json::to_string(&turns[1].response).unwrap()));
    out
}

fn round_trip<T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug>(
    name: &str,
    produced: &str,
    golden: &str,
) -> Result<(), String> {
    if produced != golden {
        return Err(format!("{name}: produced\n{produced}\ngolden\n{golden}"));
    }
    let parsed: T = serde_json::from_str(golden).map_err(|e| format!("{name}: {e}"))?;
    let reparsed: T = serde_json::from_str(produced).map_err(|e| format!("{name}: {e}"))?;
    if parsed != reparsed {
        return Err(format!("{name}: decoded values differ"));
    }
    let again = serde_json::to_string(&parsed).map_err(|e| e.to_string())?;
    if again != golden {
        return Err(format!("{name}: re-encoding changed bytes\n{again}"));
    }
    Ok(())
}

/// Byte-exact comparison against the checked-in files plus a decode and
/// re-encode round trip. With MLTV_BLESS set the files are rewritten.
pub fn check_wire_goldens(dir: &std::path::Path, models: Arc<Models>) -> Result<usize, String> {
    use mltv_core::protocol::{RenderMessage, SkillRequest, SkillResponse};
    let cases = wire_cases(models);
    let mut kinds = BTreeSet::new();
    for (name, produced) in &cases {
        let path = dir.join(name);
        if std::env::var_os("MLTV_BLESS").is_some() {
            std::fs::write(&path, format!("{produced}\n")).map_err(|e| e.to_string())?;
        }
        let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let golden = golden.strip_suffix('\n').unwrap_or(&golden);
        match *name {
            "skill_request.json" => round_trip::<SkillRequest>(name, produced, golden)?,
            "skill_response.json" => round_trip::<SkillResponse>(name, produced, golden)?,
            _ => {
                round_trip::<RenderMessage>(name, produced, golden)?;
                let m: RenderMessage = serde_json::from_str(golden).unwrap();
                kinds.insert(m.view.kind());
            }
        }
    }
    if kinds.len() != 3 {
        return Err(format!("goldens cover view kinds {kinds:?}"));
    }
    Ok(cases.len())
}
