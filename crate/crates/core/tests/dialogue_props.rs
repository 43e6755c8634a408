mod support;

use mltv_core::dialogue::{handle, open_session, Deps, ViewFrame};
use mltv_core::intent::{IntentLabel, SlotSet, StructuredRequest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

#[test]
fn thousand_seeded_sequences() {
    let models = sample_models();
    run_dialogue_sequences(&models, 1000, 30).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arbitrary_sequences(seed in any::<u64>(), len in 1usize..60) {
        let models = sample_models();
        let profile = sequence_profile(&models);
        let steps = random_steps(&mut ChaCha8Rng::seed_from_u64(seed), &models.catalog, len);
        prop_assert_eq!(check_sequence(&models, &profile, &steps), Ok(()));
    }
}

#[test]
fn expiry_boundary_is_exclusive() {
    let models = sample_models();
    let profile = models.profile("1");
    let deps = Deps {
        catalog: &models.catalog,
        lexicons: &models.lexicons,
        neighborhood: &models.neighborhood,
        content: &models.content,
        profile: &profile,
        config: &models.dialogue,
    };
    let more = StructuredRequest::new(IntentLabel::MoreResults, SlotSet::default());
    let start = open_session("s", "1", 10);
    let (at_limit, _) = handle(&start, &more, &deps, 10 + 120);
    assert!(at_limit.open);
    assert_eq!(at_limit.last_activity, 130);
    let (past, update) = handle(&start, &more, &deps, 10 + 121);
    assert!(!past.open);
    assert_eq!(past.view_stack, [ViewFrame::Home]);
    assert!(update.speech_text.contains("closed"));
}
