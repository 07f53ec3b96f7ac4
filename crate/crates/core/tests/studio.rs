mod common;

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use common::sample_checkpoint;
use lynwerk_core::model::Checkpoint;
use lynwerk_core::studio::{
    normalize_for_edit, parse_log, CreateSession, Entry, EntryInput, PoemStatus, Studio, StudioError, StudioState,
};

const MODEL: &str = "sample";

fn checkpoint() -> &'static Checkpoint {
    static CKPT: OnceLock<Checkpoint> = OnceLock::new();
    CKPT.get_or_init(sample_checkpoint)
}

fn studio() -> Studio {
    let s = Studio::new(Some(MODEL.into()), 3);
    s.register_model(MODEL, checkpoint().clone());
    s
}

fn seeded(seed: u64) -> CreateSession {
    CreateSession {
        seed: Some(seed),
        ..CreateSession::default()
    }
}

fn line(id: &str) -> EntryInput {
    EntryInput::Line {
        line_id: id.to_owned(),
        text: None,
    }
}

fn edited(id: &str, text: &str) -> EntryInput {
    EntryInput::Line {
        line_id: id.to_owned(),
        text: Some(text.to_owned()),
    }
}

#[test]
fn new_session_is_empty() {
    let s = studio();
    let session = s.create_session(CreateSession::default()).unwrap();
    assert_eq!(session.id, "s0");
    assert!(session.offered.is_empty() && session.selected.is_empty());
    assert_eq!(session.checkpoint, MODEL);
}

#[test]
fn missing_checkpoint_is_rejected() {
    let s = studio();
    let req = CreateSession {
        checkpoint: Some("/nonexistent/model.ckpt".into()),
        ..CreateSession::default()
    };
    assert!(matches!(s.create_session(req), Err(StudioError::BadCheckpoint(_))));
    assert_eq!(Studio::new(None, 0).create_session(CreateSession::default()), Err(StudioError::NoCheckpoint));
}

#[test]
fn same_seed_same_first_batch() {
    let s = studio();
    let a = s.create_session(seeded(42)).unwrap();
    let b = s.create_session(seeded(42)).unwrap();
    assert_eq!(s.request_lines(&a.id, 10).unwrap(), s.request_lines(&b.id, 10).unwrap());
}

#[test]
fn batches_are_distinct_and_counted() {
    let s = studio();
    let id = s.create_session(seeded(9)).unwrap().id;
    let first = s.request_lines(&id, 25).unwrap();
    let second = s.request_lines(&id, 25).unwrap();
    let a: HashSet<_> = first.iter().map(|l| l.id.clone()).collect();
    let b: HashSet<_> = second.iter().map(|l| l.id.clone()).collect();
    assert_eq!((a.len(), b.len()), (25, 25));
    assert!(a.is_disjoint(&b));
    let session = s.session(&id).unwrap();
    assert_eq!(session.offered.len(), 50);
    assert_eq!(session.batches, 2);
    assert_eq!(s.request_lines(&id, 0), Err(StudioError::InvalidCount(0)));
    assert!(matches!(s.request_lines("s99", 1), Err(StudioError::SessionNotFound(_))));
}

#[test]
fn selection_rules() {
    let s = studio();
    let id = s.create_session(seeded(1)).unwrap().id;
    let lines = s.request_lines(&id, 5).unwrap();
    let pick = vec![lines[0].id.clone(), lines[1].id.clone()];
    let once = s.change_selection(&id, &pick, &[]).unwrap();
    let twice = s.change_selection(&id, &pick, &[]).unwrap();
    assert_eq!(once.selected, twice.selected);
    assert_eq!(once.selected.len(), 2);
    assert_eq!(
        s.change_selection(&id, &["nope".into()], &[]),
        Err(StudioError::UnknownLine("nope".into()))
    );

    s.create_poem(&id, "t", Some(&[line(&pick[0])])).unwrap();
    assert_eq!(
        s.change_selection(&id, &[], &pick[..1]),
        Err(StudioError::LineInUse(pick[0].clone()))
    );
    let after = s.change_selection(&id, &[], &pick[1..]).unwrap();
    assert_eq!(after.selected.len(), 1);
}

#[test]
fn poems_follow_the_arrangement() {
    let s = studio();
    let id = s.create_session(seeded(2)).unwrap().id;
    let lines = s.request_lines(&id, 6).unwrap();
    let ids: Vec<String> = lines.iter().take(3).map(|l| l.id.clone()).collect();
    s.change_selection(&id, &ids, &[]).unwrap();

    let poem = s.create_poem(&id, "Titel", Some(&[line(&ids[0]), line(&ids[1]), line(&ids[2])])).unwrap();
    let expected = format!("Titel\n\n{}\n{}\n{}\n", lines[0].text, lines[1].text, lines[2].text);
    assert_eq!(s.export_text(&poem.id).unwrap(), expected);

    let reordered = s
        .set_entries(&poem.id, &[line(&ids[2]), EntryInput::Break, line(&ids[0]), line(&ids[1])], None)
        .unwrap();
    assert_eq!(reordered.entries[1], Entry::Break);
    let expected = format!("Titel\n\n{}\n\n{}\n{}\n", lines[2].text, lines[0].text, lines[1].text);
    assert_eq!(s.export_text(&poem.id).unwrap(), expected);

    let capitalised = {
        let t = &lines[0].text;
        let mut c = t.chars();
        let first = c.next().unwrap().to_uppercase().collect::<String>();
        format!("{first}{}!", c.as_str())
    };
    let p = s.set_entries(&poem.id, &[edited(&ids[0], &capitalised)], Some("Nuwe titel")).unwrap();
    assert_eq!(p.title, "Nuwe titel");
    assert!(matches!(
        s.set_entries(&poem.id, &[edited(&ids[0], "heeltemal ander woorde")], None),
        Err(StudioError::EditRuleViolation { .. })
    ));
    assert_eq!(
        s.set_entries(&poem.id, &[line(&lines[5].id)], None),
        Err(StudioError::NotSelected(lines[5].id.clone()))
    );
    assert!(s.snapshot().poem_provenance_holds(&poem.id));

    let empty = s.create_poem(&id, "", None).unwrap();
    assert_eq!(s.finalize(&empty.id), Err(StudioError::EmptyPoem(empty.id.clone())));
    let done = s.finalize(&poem.id).unwrap();
    assert_eq!(done.status, PoemStatus::Final);
    assert_eq!(
        s.set_entries(&poem.id, &[line(&ids[1])], None),
        Err(StudioError::PoemFinalized(poem.id.clone()))
    );
    assert!(matches!(s.finalize("p77"), Err(StudioError::PoemNotFound(_))));
}

/// create → 3 batches → select → arrange → edit → finalize.
fn scripted_session(s: &Studio) -> (String, String) {
    let id = s.create_session(seeded(77)).unwrap().id;
    let mut offered = Vec::new();
    for _ in 0..3 {
        offered.extend(s.request_lines(&id, 8).unwrap());
    }
    let chosen: Vec<String> = [1, 9, 17, 20].iter().map(|&i| offered[i].id.clone()).collect();
    s.change_selection(&id, &chosen, &[]).unwrap();
    let poem = s
        .create_poem(&id, "Oggend", Some(&[line(&chosen[0]), line(&chosen[1]), EntryInput::Break, line(&chosen[2])]))
        .unwrap();
    let shout = format!("{}!", offered[20].text.to_uppercase());
    s.set_entries(
        &poem.id,
        &[line(&chosen[2]), line(&chosen[0]), EntryInput::Break, line(&chosen[1]), edited(&chosen[3], &shout)],
        None,
    )
    .unwrap();
    s.finalize(&poem.id).unwrap();
    (id, poem.id)
}

#[test]
fn exported_lines_come_from_the_session() {
    let s = studio();
    let (session_id, poem_id) = scripted_session(&s);
    let generated: HashSet<String> = s
        .session(&session_id)
        .unwrap()
        .offered
        .values()
        .map(|l| normalize_for_edit(&l.text))
        .collect();
    let text = s.export_text(&poem_id).unwrap();
    let body: Vec<&str> = text.lines().skip(2).filter(|l| !l.is_empty()).collect();
    assert_eq!(body.len(), 4);
    for row in body {
        assert!(generated.contains(&normalize_for_edit(row)), "{row}");
    }
}

#[test]
fn replaying_the_store_restores_state() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("events.jsonl");
    let s = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
    s.register_model(MODEL, checkpoint().clone());
    let (session_id, _) = scripted_session(&s);
    let live = s.snapshot();
    drop(s);

    let reopened = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
    reopened.register_model(MODEL, checkpoint().clone());
    assert_eq!(reopened.snapshot(), live);
    live.check_invariants().unwrap();

    // The restored session continues its line stream where it stopped.
    let next_a = reopened.request_lines(&session_id, 4).unwrap();
    let fresh = studio();
    let (fresh_id, _) = scripted_session(&fresh);
    assert_eq!(fresh.request_lines(&fresh_id, 4).unwrap(), next_a);
    assert_eq!(reopened.create_session(CreateSession::default()).unwrap().id, "s1");
}

#[test]
fn every_log_prefix_replays_to_a_valid_state() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("events.jsonl");
    let s = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
    s.register_model(MODEL, checkpoint().clone());
    scripted_session(&s);
    let full = s.snapshot();
    drop(s);

    let bytes = std::fs::read(&store).unwrap();
    let mut cuts: Vec<usize> = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i + 1).collect();
    // Also cut in the middle of every record.
    let mids: Vec<usize> = cuts.iter().map(|&c| c.saturating_sub(7)).collect();
    cuts.extend(mids);
    cuts.push(0);
    for cut in cuts {
        let (events, valid) = parse_log(&bytes[..cut]).unwrap();
        assert!(valid <= cut);
        let state = StudioState::replay(&events);
        state.check_invariants().unwrap_or_else(|e| panic!("prefix {cut}: {e}"));
    }
    let (events, _) = parse_log(&bytes).unwrap();
    assert_eq!(StudioState::replay(&events), full);
}

#[test]
fn interrupted_write_is_dropped_and_appends_continue() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("events.jsonl");
    {
        let s = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
        s.register_model(MODEL, checkpoint().clone());
        s.create_session(seeded(1)).unwrap();
    }
    let mut bytes = std::fs::read(&store).unwrap();
    bytes.extend_from_slice(br#"{"event":"session_created","at":1,"sess"#);
    std::fs::write(&store, &bytes).unwrap();

    let s = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
    s.register_model(MODEL, checkpoint().clone());
    assert_eq!(s.snapshot().sessions.len(), 1);
    s.create_session(seeded(2)).unwrap();
    drop(s);
    let s = Studio::open(Some(MODEL.into()), 3, &store).unwrap();
    assert_eq!(s.snapshot().sessions.len(), 2);
}

#[test]
fn corrupt_middle_record_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("events.jsonl");
    std::fs::write(&store, "garbage\n{\"event\":\"poem_finalized\",\"at\":1,\"poem_id\":\"p0\"}\n").unwrap();
    assert!(matches!(Studio::open(None, 0, &store), Err(StudioError::Storage(_))));
}

#[test]
fn sessions_generate_concurrently() {
    let s = Arc::new(studio());
    let ids: Vec<String> = (0..4).map(|i| s.create_session(seeded(100 + i)).unwrap().id).collect();
    let handles: Vec<_> = ids
        .iter()
        .map(|id| {
            let (s, id) = (s.clone(), id.clone());
            std::thread::spawn(move || s.request_lines(&id, 10).unwrap())
        })
        .collect();
    let parallel: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();

    let serial = studio();
    for (i, batch) in parallel.iter().enumerate() {
        let id = serial.create_session(seeded(100 + i as u64)).unwrap().id;
        assert_eq!(&serial.request_lines(&id, 10).unwrap(), batch);
    }
}
