//! Conformance against the golden message corpus in `tests/golden` and the
//! examples embedded in `protocol.md`.

use std::path::PathBuf;

use gsc_teleop::protocol::{parse_client, parse_server, ServerBody, ServerMessage};
use gsc_teleop::{ClientBody, SessionCore};
use serde_json::Value;

const SESSION: &str = "5b0e6f43-2c4e-4b8e-9a51-0f4a3d1c7e21";

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn load(name: &str) -> Vec<Value> {
    serde_json::from_str(&std::fs::read_to_string(golden_dir().join(name)).unwrap()).unwrap()
}

#[test]
fn valid_client_messages_parse_and_round_trip() {
    for case in load("client.json") {
        let text = case["message"].to_string();
        let msg = parse_client(&text).unwrap_or_else(|e| panic!("{}: {e:?}", case["name"]));
        let back: Value = serde_json::from_str(&msg.to_json()).unwrap();
        assert_eq!(back, case["message"], "{}", case["name"]);
    }
}

#[test]
fn malformed_client_messages_are_rejected_with_a_code() {
    for case in load("malformed.json") {
        let err = parse_client(case["text"].as_str().unwrap()).unwrap_err();
        assert_eq!(err.code, case["code"].as_str().unwrap(), "{}", case["name"]);
        assert!(!err.message.is_empty());
    }
}

#[test]
fn well_formed_but_invalid_requests_are_refused_without_harm() {
    for case in load("rejected.json") {
        let mut core = SessionCore::new();
        if !case["before_start"].as_bool().unwrap() {
            core.handle(ClientBody::Start {
                scenario: "multimodal-corridor".into(),
                controller: "linear-blend".parse().unwrap(),
                seed: 0,
                tick_hz: None,
                paused: false,
            });
        }
        let before = core.step();
        let msg = parse_client(&case["message"].to_string()).unwrap();
        let out = core.handle(msg.body);
        match &out[..] {
            [ServerBody::Error { code, .. }] => assert_eq!(code, case["code"].as_str().unwrap(), "{}", case["name"]),
            other => panic!("{}: expected one error, got {other:?}", case["name"]),
        }
        assert_eq!(core.step(), before);
        if before.is_some() {
            // The session keeps running afterwards.
            assert!(!core.tick().is_empty());
        }
    }
}

fn envelope(body: ServerBody) -> String {
    let mut s = serde_json::to_string_pretty(&ServerMessage::new(Some(SESSION.into()), body)).unwrap();
    s.push('\n');
    s
}

/// Server messages produced by a scripted session, one per message type.
fn server_examples() -> Vec<(&'static str, String)> {
    let mut core = SessionCore::new();
    let mut out = vec![(
        "hello",
        envelope(ServerBody::Hello { server: "gsc-teleop/0.1.0".into(), tick_hz: 10.0, resumed: false }),
    )];
    let list = core.handle(ClientBody::ScenarioList {});
    out.push(("scenario_list", envelope(list[0].clone())));
    let started = core.handle(ClientBody::Start {
        scenario: "two-mode-autopilot".into(),
        controller: "gsc".parse().unwrap(),
        seed: 0,
        tick_hz: None,
        paused: false,
    });
    out.push(("start", envelope(started[0].clone())));
    core.handle(ClientBody::OperatorInput { vx: 0.0, vy: 1.0, step: None });
    core.tick();
    let snap = core.tick();
    out.push(("state_snapshot", envelope(snap[0].clone())));
    let update = core.handle(parse_client(r#"{"protocol_version":1,"type":"config_update","lag":10}"#).unwrap().body);
    out.push(("config_update", envelope(update[0].clone())));
    let err = core.handle(parse_client(r#"{"protocol_version":1,"type":"config_update","drop":1.5}"#).unwrap().body);
    out.push(("error", envelope(err[0].clone())));
    let reset = core.handle(ClientBody::Reset {});
    out.push(("reset", envelope(reset[0].clone())));
    let ended = loop {
        let msgs = core.tick();
        if let Some(e) = msgs.iter().find(|m| matches!(m, ServerBody::RunEnded { .. })) {
            break e.clone();
        }
        assert!(!msgs.is_empty(), "run stalled");
    };
    out.push(("run_ended", envelope(ended)));
    out
}

#[test]
fn server_messages_match_the_goldens() {
    let dir = golden_dir().join("server");
    let update = std::env::var_os("GSC_UPDATE_GOLDEN").is_some();
    for (name, text) in server_examples() {
        let path = dir.join(format!("{name}.json"));
        if update {
            std::fs::write(&path, &text).unwrap();
        }
        let golden = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
        assert_eq!(text, golden, "{name} drifted; rerun with GSC_UPDATE_GOLDEN=1 if intended");
        let parsed = parse_server(&golden).unwrap();
        let tag = serde_json::from_str::<Value>(&golden).unwrap()["type"].as_str().unwrap().to_string();
        assert_eq!(tag, name);
        assert_eq!(parsed.protocol_version, 1);
        assert_eq!(parsed.session.as_deref(), Some(SESSION));
        assert_eq!(envelope(parsed.body), golden);
    }
}

#[test]
fn every_message_type_has_a_golden() {
    let client: Vec<String> =
        load("client.json").iter().map(|c| c["message"]["type"].as_str().unwrap().to_string()).collect();
    for t in ["hello", "scenario_list", "start", "operator_input", "config_update", "reset"] {
        assert!(client.iter().any(|c| c == t), "client {t}");
    }
    for t in ["hello", "scenario_list", "start", "config_update", "state_snapshot", "run_ended", "reset", "error"] {
        assert!(golden_dir().join(format!("server/{t}.json")).is_file(), "server {t}");
    }
}

#[test]
fn protocol_document_examples_parse() {
    let doc = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("protocol.md")).unwrap();
    let mut blocks = 0;
    let mut rest = doc.as_str();
    while let Some(start) = rest.find("```json\n") {
        let body = &rest[start + 8..];
        let end = body.find("```").unwrap();
        let text = &body[..end];
        rest = &body[end + 3..];
        let v: Value = serde_json::from_str(text).unwrap_or_else(|e| panic!("bad example: {e}\n{text}"));
        let ok = parse_client(text).is_ok() || parse_server(text).is_ok();
        assert!(ok, "example does not parse as a protocol message:\n{v}");
        blocks += 1;
    }
    assert!(blocks >= 10, "only {blocks} examples found");
}
