use std::collections::BTreeMap;

use midly::{MidiMessage, Smf, Timing, TrackEventKind};
use proptest::prelude::*;
use yao_core::interpret::{build_music_plan, Keywords, MusicPlan, Reading};
use yao_core::music::{layer_for_line, render_casting, Beats, EventStream, GenParams, Instrument, NoteEvent};
use yao_core::render::{chunk_stream, write_midi, MidiRenderConfig};
use yao_core::{derive_zhi_gua, CastingRecord, Coin, CoinToss, Hexagram, Line, LineKind, Pattern};

fn coin() -> impl Strategy<Value = Coin> {
    prop_oneof![Just(Coin::Heads), Just(Coin::Tails)]
}

fn toss() -> impl Strategy<Value = CoinToss> {
    [coin(), coin(), coin()].prop_map(CoinToss::new)
}

fn kind() -> impl Strategy<Value = LineKind> {
    (6u8..=9).prop_map(|s| LineKind::from_sum(s).unwrap())
}

fn instrument() -> impl Strategy<Value = Instrument> {
    proptest::sample::select(Instrument::ALL.to_vec())
}

fn note() -> impl Strategy<Value = NoteEvent> {
    (
        instrument(),
        0u32..20_000,
        1u32..4_000,
        1u8..=127,
        -1.0f64..=1.0,
        any::<u8>(),
    )
        .prop_map(|(instrument, onset, duration, velocity, pan, p)| {
            let (low, high) = instrument.register();
            NoteEvent {
                onset: Beats::from_ticks(onset),
                duration: Beats::from_ticks(duration),
                pitch: low + p % (high - low + 1),
                velocity,
                instrument,
                pan,
            }
        })
}

fn stream() -> impl Strategy<Value = EventStream> {
    (prop::collection::vec(note(), 0..60), 30u32..200).prop_map(|(events, tempo)| {
        let end = events.iter().map(NoteEvent::end).max().unwrap_or(Beats::ZERO);
        EventStream::new(events, end.to_seconds(tempo), tempo)
    })
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z]{1,10}", 1..4)
}

proptest! {
    #[test]
    fn toss_sum_matches_coin_values(t in toss()) {
        let heads = t.coins().iter().filter(|c| **c == Coin::Heads).count() as u8;
        prop_assert_eq!(t.sum(), 6 + heads);
        let kind = LineKind::from_sum(t.sum()).unwrap();
        // three tails and three heads are the changing lines
        prop_assert_eq!(kind.is_changing(), heads == 0 || heads == 3);
    }

    #[test]
    fn zhi_gua_is_xor_of_changing_mask(bits in 0u8..64, mask in 0u8..64) {
        let ben = Hexagram::from_pattern(Pattern::new(bits));
        let dong: Vec<u8> = (1..=6).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let zhi = derive_zhi_gua(&ben, &dong).unwrap();
        prop_assert_eq!(zhi.pattern().bits(), bits ^ mask);
        prop_assert_eq!(derive_zhi_gua(&zhi, &dong).unwrap(), ben);
        prop_assert!((1..=64).contains(&zhi.king_wen()));
    }

    #[test]
    fn casting_record_round_trips(seed in any::<u64>(), tosses in prop::collection::vec(toss(), 0..=6)) {
        let record = CastingRecord::from_tosses(seed, &tosses).unwrap();
        let json = record.to_canonical_json();
        let back: CastingRecord = serde_json::from_slice(&json).unwrap();
        prop_assert_eq!(&back, &record);
        prop_assert_eq!(back.to_canonical_json(), json);
        prop_assert_eq!(record.is_complete(), tosses.len() == 6);
        prop_assert_eq!(record.ben_gua().is_some(), tosses.len() == 6);
    }

    #[test]
    fn tampered_record_is_rejected(seed in any::<u64>(), tosses in prop::collection::vec(toss(), 6)) {
        let record = CastingRecord::from_tosses(seed, &tosses).unwrap();
        let mut value: serde_json::Value = serde_json::from_slice(&record.to_canonical_json()).unwrap();
        let flipped = !value["lines"][0]["changing"].as_bool().unwrap();
        value["lines"][0]["changing"] = flipped.into();
        prop_assert!(serde_json::from_value::<CastingRecord>(value).is_err());
    }

    #[test]
    fn layers_stay_on_scale_and_inside_the_loop(
        seed in any::<u64>(),
        stream in any::<u64>(),
        k in kind(),
        index in 1u8..=6,
        root in 0u8..12,
    ) {
        let params = GenParams { scale_root: root, ..GenParams::default() };
        let scale: Vec<u8> = [0u8, 2, 4, 7, 9].iter().map(|d| (root + d) % 12).collect();
        let layer = layer_for_line(Line::from(k), index, &params, seed, stream).unwrap();
        let (low, high) = layer.instrument.register();
        let menu: Vec<Beats> = params.duration_weights.get(k).iter().map(|c| c.beats).collect();
        prop_assert_eq!(layer.notes.len(), params.notes_per_loop as usize);
        for n in &layer.notes {
            prop_assert!(scale.contains(&(n.pitch % 12)), "pitch {} off scale", n.pitch);
            prop_assert!((low..=high).contains(&n.pitch));
            prop_assert!(n.onset < layer.loop_length);
            prop_assert!(menu.contains(&n.duration));
            prop_assert!(n.validate().is_ok());
        }
        prop_assert!(layer.notes.windows(2).all(|w| w[0].onset < w[1].onset));
    }

    #[test]
    fn casting_render_unrolls_every_layer(seed in any::<u64>(), kinds in prop::collection::vec(kind(), 1..=6), cycles in 1u32..6) {
        let params = GenParams::default();
        let layers: Vec<_> = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| layer_for_line(Line::from(*k), i as u8 + 1, &params, seed, i as u64).unwrap())
            .collect();
        let stream = render_casting(&layers, cycles, &params).unwrap();
        let notes: usize = layers.iter().map(|l| l.notes.len()).sum();
        prop_assert_eq!(stream.events.len(), notes * cycles as usize);
        prop_assert!(stream.validate().is_ok());
        prop_assert!(stream.total_duration >= (params.loop_length * cycles).to_seconds(params.tempo));
    }

    #[test]
    fn chunks_partition_the_stream(s in stream(), window in 0.25f64..20.0) {
        let mut seen = 0;
        let mut from = 0.0;
        let mut index = 0u32;
        while from <= s.total_duration {
            let chunk = chunk_stream(&s, from, window).unwrap();
            prop_assert_eq!(&chunk.stream_digest, &s.digest());
            for e in &chunk.events {
                let t = s.onset_seconds(e);
                prop_assert!(t >= from && t < from + window);
            }
            seen += chunk.events.len();
            index += 1;
            from = f64::from(index) * window;
        }
        prop_assert_eq!(seen, s.events.len());
    }

    #[test]
    fn midi_notes_match_the_stream(s in stream()) {
        let bytes = write_midi(&s, &MidiRenderConfig::default()).unwrap();
        let smf = Smf::parse(&bytes).unwrap();
        prop_assert_eq!(smf.header.timing, Timing::Metrical(480.into()));
        let mut expected: BTreeMap<(u32, u8, bool), usize> = BTreeMap::new();
        for e in &s.events {
            *expected.entry((e.onset.ticks(), e.pitch, true)).or_default() += 1;
            *expected.entry((e.end().ticks(), e.pitch, false)).or_default() += 1;
        }
        let mut found: BTreeMap<(u32, u8, bool), usize> = BTreeMap::new();
        for track in &smf.tracks {
            let mut tick = 0u32;
            for ev in track {
                tick += ev.delta.as_int();
                if let TrackEventKind::Midi { message, .. } = ev.kind {
                    match message {
                        MidiMessage::NoteOn { key, vel } if vel > 0 => {
                            *found.entry((tick, key.as_int(), true)).or_default() += 1
                        }
                        MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                            *found.entry((tick, key.as_int(), false)).or_default() += 1
                        }
                        _ => {}
                    }
                }
            }
        }
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn plan_round_trips(seed in any::<u64>(), tosses in prop::collection::vec(toss(), 6),
                        mood in words(), energy in words(), dynamics in words(), spatial in words()) {
        let record = CastingRecord::from_tosses(seed, &tosses).unwrap();
        let reading = Reading {
            body: "b".into(),
            keywords: Keywords::new(mood, energy, dynamics, spatial).unwrap(),
            provider: "p".into(),
            template_version: "t".into(),
        };
        let plan = build_music_plan(&reading, &record).unwrap();
        let json = plan.to_canonical_json();
        let back = MusicPlan::from_json_str(std::str::from_utf8(&json).unwrap()).unwrap();
        prop_assert_eq!(&back, &plan);
        prop_assert_eq!(back.to_canonical_json(), json);
        prop_assert_eq!(&plan.provenance.casting_digest, &record.digest());
    }

    #[test]
    fn provider_output_never_panics(raw in ".{0,200}") {
        let _ = Reading::from_provider_output(&raw, "p", "t");
    }

    #[test]
    fn keywords_are_normalised(mood in words(), energy in words()) {
        let shout = |w: &Vec<String>| w.iter().map(|s| format!("  {} ", s.to_uppercase())).collect::<Vec<_>>();
        let raw = serde_json::json!({
            "body": "text",
            "keywords": {"mood": shout(&mood), "energy": shout(&energy), "dynamics": ["soft"], "spatial": ["wide"]},
        });
        let r = Reading::from_provider_output(&raw.to_string(), "p", "t").unwrap();
        prop_assert_eq!(r.keywords.mood(), &mood[..]);
        prop_assert_eq!(r.keywords.energy(), &energy[..]);
    }
}

#[test]
fn one_beat_note_ends_at_tick_480() {
    let s = EventStream::new(
        vec![NoteEvent {
            onset: Beats::ZERO,
            duration: Beats::whole(1),
            pitch: 62,
            velocity: 80,
            instrument: Instrument::Koto,
            pan: 0.0,
        }],
        1.0,
        60,
    );
    let smf = Smf::parse(&write_midi(&s, &MidiRenderConfig::default()).unwrap())
        .unwrap()
        .to_static();
    let mut tick = 0;
    let mut off = None;
    for ev in &smf.tracks[1] {
        tick += ev.delta.as_int();
        if let TrackEventKind::Midi { message, .. } = ev.kind {
            match message {
                MidiMessage::NoteOff { .. } => off = Some(tick),
                MidiMessage::NoteOn { vel, .. } if vel == 0 => off = Some(tick),
                _ => {}
            }
        }
    }
    assert_eq!(off, Some(480));
}

#[test]
fn empty_keyword_category_is_malformed() {
    let raw = r#"{"body":"x","keywords":{"mood":[],"energy":["still"],"dynamics":["soft"],"spatial":["near"]}}"#;
    assert!(Reading::from_provider_output(raw, "p", "t").is_err());
}
