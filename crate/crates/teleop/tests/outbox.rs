use gsc_teleop::protocol::{parse_server, ServerBody};
use gsc_teleop::server::{Outbox, SNAPSHOT_QUEUE_CAP};
use gsc_teleop::session::SessionCore;
use gsc_teleop::ClientBody;

fn snapshots(n: usize) -> Vec<ServerBody> {
    let mut core = SessionCore::new();
    let start = ClientBody::Start {
        scenario: "two-mode-autopilot".into(),
        controller: "linear-blend".parse().unwrap(),
        seed: 0,
        tick_hz: None,
        paused: false,
    };
    let mut out: Vec<ServerBody> = core.handle(start).into_iter().skip(1).collect();
    while out.len() < n {
        out.extend(core.tick().into_iter().filter(|b| matches!(b, ServerBody::StateSnapshot(_))));
    }
    out
}

fn step_of(text: &str) -> Option<u64> {
    match parse_server(text).unwrap().body {
        ServerBody::StateSnapshot(s) => Some(s.step),
        _ => None,
    }
}

#[tokio::test]
async fn backlog_keeps_only_the_newest_snapshots() {
    let outbox = Outbox::default();
    let frames = snapshots(20);
    for f in &frames[..10] {
        outbox.push(f, "s");
    }
    outbox.push(&ServerBody::Error { code: "out-of-range".into(), message: "x".into() }, "s");
    for f in &frames[10..] {
        outbox.push(f, "s");
    }
    assert_eq!(outbox.len(), SNAPSHOT_QUEUE_CAP + 1);
    assert_eq!(outbox.dropped(), (20 - SNAPSHOT_QUEUE_CAP) as u64);
    let mut steps = Vec::new();
    let mut errors = 0;
    while !outbox.is_empty() {
        let text = outbox.pop().await;
        match step_of(&text) {
            Some(s) => steps.push(s),
            None => errors += 1,
        }
    }
    assert_eq!(errors, 1, "control messages are never dropped");
    let newest: Vec<u64> = (20 - SNAPSHOT_QUEUE_CAP as u64..20).collect();
    assert_eq!(steps, newest);
}

#[tokio::test]
async fn restart_discards_stale_frames() {
    let outbox = Outbox::default();
    for f in &snapshots(5) {
        outbox.push(f, "s");
    }
    outbox.push(&ServerBody::Reset {}, "s");
    assert_eq!(outbox.len(), 1);
    assert!(step_of(&outbox.pop().await).is_none());
}
