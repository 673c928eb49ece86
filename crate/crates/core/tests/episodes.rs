use std::sync::Arc;
use std::thread;

use visfore::episode::{ApproachSpec, EpisodeRunner, EpisodeSettings, Forecaster};
use visfore::forecast::Space;
use visfore::policy::bridge::{
    encode_message, parse_server, BridgePolicy, ChannelTransport, ClientMessage, ServerMessage,
};
use visfore::policy::PolicySpec;
use visfore::render::{Approach, Class};
use visfore::sim::presets::{open_field, s_turn_suite};
use visfore::sim::{Action, ScenarioConfig, TerminationCause};

fn settings(approach: Approach, forecaster: Forecaster, space: Space) -> EpisodeSettings {
    EpisodeSettings {
        approach: ApproachSpec {
            approach,
            forecaster,
            space,
        },
        ..EpisodeSettings::default()
    }
}

fn runner(cfg: ScenarioConfig, s: EpisodeSettings) -> EpisodeRunner {
    EpisodeRunner::new(Arc::new(cfg), s).unwrap()
}

#[test]
fn straight_road_is_driven_to_the_goal() {
    let r = runner(open_field(30.0), EpisodeSettings::default());
    let mut policy = PolicySpec::Straight.build();
    let out = r.run(policy.as_mut(), 1).unwrap();
    assert_eq!(out.record.cause, TerminationCause::Success);
    // nothing is in the way, so the driven path is the shortest one up to a step
    let cfg = r.config();
    let step = cfg.kinematics.speed * cfg.dt;
    assert!(out.record.path <= out.record.shortest + step + 1e-9);
    assert!(out.record.is_consistent(cfg.kinematics.speed, cfg.dt));
}

#[test]
fn every_approach_runs_and_records_are_consistent() {
    let cfg = s_turn_suite()[3].clone();
    let combos = [
        (Approach::Seg, Forecaster::None, Space::World),
        (Approach::SegBox, Forecaster::None, Space::World),
        (Approach::SegBoxBox, Forecaster::Kf, Space::World),
        (Approach::SegBoxBox, Forecaster::Cvm, Space::Image),
        (Approach::SegAp, Forecaster::Gt, Space::World),
        (Approach::SegAp, Forecaster::Kf, Space::Image),
    ];
    for (a, f, s) in combos {
        for policy in ["pure-pursuit", "forecast-avoid", "pixel-avoid"] {
            let r = runner(cfg.clone(), settings(a, f, s));
            let mut p = PolicySpec::parse(policy).unwrap().build();
            let out = r.run(p.as_mut(), 7).unwrap();
            assert!(
                out.record.is_consistent(cfg.kinematics.speed, cfg.dt),
                "{a:?}/{f:?}/{s:?} {policy}: {:?}",
                out.record
            );
        }
    }
}

#[test]
fn episodes_replay_exactly() {
    let cfg = s_turn_suite()[5].clone();
    let mut s = settings(Approach::SegAp, Forecaster::Kf, Space::Image);
    s.log_steps = true;
    let r = runner(cfg, s);
    let a = r
        .run(
            PolicySpec::parse("pixel-avoid").unwrap().build().as_mut(),
            11,
        )
        .unwrap();
    let b = r
        .run(
            PolicySpec::parse("pixel-avoid").unwrap().build().as_mut(),
            11,
        )
        .unwrap();
    assert_eq!(a, b);
    assert_eq!(a.steps.len() as u64, a.record.steps);
    // replaying the logged actions reproduces the same frames
    let actions: Vec<Action> = a.steps.iter().map(|s| s.action).collect();
    let frames = r.frames(11, actions.iter().copied()).unwrap();
    assert_eq!(frames.len(), actions.len() + 1);
    assert_eq!(frames, r.frames(11, actions).unwrap());
}

#[test]
fn overlays_appear_only_with_forecasts() {
    let cfg = s_turn_suite()[0].clone();
    let count = |a, f, class| {
        let r = runner(cfg.clone(), settings(a, f, Space::World));
        let actions = vec![Action::Noop; 30];
        r.frames(2, actions)
            .unwrap()
            .iter()
            .map(|img| img.count(class))
            .sum::<usize>()
    };
    assert_eq!(
        count(Approach::Seg, Forecaster::None, Class::ForecastPath),
        0
    );
    assert_eq!(
        count(Approach::SegBox, Forecaster::None, Class::ForecastBox),
        0
    );
    assert!(count(Approach::SegBoxBox, Forecaster::Gt, Class::ForecastBox) > 0);
    assert!(count(Approach::SegAp, Forecaster::Gt, Class::ForecastPath) > 0);
}

/// A NOOP policy on the far side of an in-process bridge.
fn noop_peer() -> BridgePolicy {
    let (transport, peer) = ChannelTransport::pair();
    thread::spawn(move || {
        for line in peer.rx.iter() {
            let reply = match parse_server(&line).unwrap() {
                ServerMessage::Close => return,
                ServerMessage::Obs { done: true, .. } => continue,
                _ => encode_message(&ClientMessage::from_action(&Action::Noop)),
            };
            if peer.tx.send(Ok(reply)).is_err() {
                return;
            }
        }
    });
    BridgePolicy::new(Box::new(transport))
}

#[test]
fn bridged_noop_matches_straight() {
    let suite = s_turn_suite();
    let mut bridged = noop_peer();
    for (i, cfg) in suite.iter().take(4).enumerate() {
        let r = runner(cfg.clone(), EpisodeSettings::default());
        let local = r
            .run(PolicySpec::Straight.build().as_mut(), i as u64)
            .unwrap();
        let remote = r.run(&mut bridged, i as u64).unwrap();
        assert_eq!(local.record, remote.record);
    }
    bridged.close().unwrap();
}
