use std::net::SocketAddr;
use std::time::Duration;

use chainplan_core::gallery;
use chainplan_core::{
    plan_interactive, posture_collides, Intervention, JointConfig, Outcome, PlannerEvent, ScriptedSource,
};
use chainplan_server::protocol::codes;
use chainplan_server::{
    serve_tcp, serve_ws, Client, ClientMessage, Hub, HubConfig, LogEntry, ServerMessage, SessionState, WireError,
};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;

const WAIT: Duration = Duration::from_secs(30);

async fn server(config: HubConfig) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_tcp(listener, Hub::new(config)));
    addr
}

async fn default_server() -> SocketAddr {
    server(HubConfig::default()).await
}

async fn next(c: &mut Client) -> ServerMessage {
    c.recv_timeout(WAIT)
        .await
        .unwrap()
        .expect("server closed the connection")
}

async fn create(c: &mut Client, doc: &str) -> String {
    c.send(&ClientMessage::CreateSession { scenario: doc.into() })
        .await
        .unwrap();
    match next(c).await {
        ServerMessage::SessionCreated { id } => id,
        other => panic!("expected session_created, got {other:?}"),
    }
}

async fn expect_error(c: &mut Client) -> WireError {
    match next(c).await {
        ServerMessage::Error(e) => e,
        other => panic!("expected error, got {other:?}"),
    }
}

async fn entries(c: &mut Client) -> Vec<LogEntry> {
    match next(c).await {
        ServerMessage::Events { entries, .. } => entries,
        other => panic!("expected events, got {other:?}"),
    }
}

/// Collects subscribed entries, answering each wait with the next scripted
/// intervention, until the session finishes.
async fn drive(c: &mut Client, id: &str, mut script: Vec<Intervention>) -> Vec<LogEntry> {
    script.reverse();
    let mut log = Vec::new();
    loop {
        let batch = entries(c).await;
        let mut done = false;
        for e in &batch {
            match e.state() {
                Some(SessionState::AwaitingIntervention) => {
                    let intervention = script.pop().unwrap_or(Intervention::Abort);
                    c.send(&ClientMessage::Intervene {
                        id: id.into(),
                        intervention,
                    })
                    .await
                    .unwrap();
                }
                Some(SessionState::Finished { .. }) => done = true,
                _ => {}
            }
        }
        log.extend(batch);
        if done {
            return log;
        }
    }
}

fn events(log: &[LogEntry]) -> Vec<PlannerEvent> {
    log.iter().filter_map(|e| e.event().cloned()).collect()
}

fn final_state(log: &[LogEntry]) -> SessionState {
    *log.iter().rev().find_map(|e| e.state()).unwrap()
}

fn assert_contiguous(log: &[LogEntry], from: u64) {
    let seqs: Vec<u64> = log.iter().map(LogEntry::seq).collect();
    let expect: Vec<u64> = (from..from + log.len() as u64).collect();
    assert_eq!(seqs, expect);
}

async fn start_subscribed(c: &mut Client, doc: &str) -> String {
    let id = create(c, doc).await;
    c.send(&ClientMessage::Subscribe {
        id: id.clone(),
        from: 0,
    })
    .await
    .unwrap();
    c.send(&ClientMessage::Start { id: id.clone() }).await.unwrap();
    id
}

#[tokio::test]
async fn creating_sessions_gives_distinct_ids() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let a = create(&mut c, gallery::RRR_20_10_20).await;
    let b = create(&mut c, gallery::RRR_20_10_20).await;
    assert_ne!(a, b);
}

#[tokio::test]
async fn malformed_scenario_is_a_parse_error_with_location() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let doc = gallery::RRR_20_10_20.replace("epsilon = 0.5", "epsilon = 0.5\nbogus = 1");
    c.send(&ClientMessage::CreateSession { scenario: doc }).await.unwrap();
    let e = expect_error(&mut c).await;
    assert_eq!(e.code, codes::PARSE);
    assert_eq!(e.key.as_deref(), Some("bogus"));

    c.send(&ClientMessage::CreateSession {
        scenario: "version = 1\nname = [".into(),
    })
    .await
    .unwrap();
    let e = expect_error(&mut c).await;
    assert_eq!(e.code, codes::PARSE);
    assert_eq!(e.line, Some(2));
}

#[tokio::test]
async fn garbage_frames_are_reported_and_the_connection_survives() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    c.send_raw("type = \"launch\"").await.unwrap();
    assert_eq!(expect_error(&mut c).await.code, codes::BAD_MESSAGE);
    create(&mut c, gallery::RRR_20_10_20).await;
}

#[tokio::test]
async fn unknown_sessions_are_reported() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let msgs = [
        ClientMessage::Start { id: "nope".into() },
        ClientMessage::Subscribe {
            id: "nope".into(),
            from: 0,
        },
        ClientMessage::Replay { id: "nope".into() },
        ClientMessage::Intervene {
            id: "nope".into(),
            intervention: Intervention::Abort,
        },
    ];
    for m in msgs {
        c.send(&m).await.unwrap();
        let e = expect_error(&mut c).await;
        assert_eq!(e.code, codes::UNKNOWN_SESSION);
        assert_eq!(e.id.as_deref(), Some("nope"));
    }
}

#[tokio::test]
async fn trap_session_with_set_step_matches_a_direct_scripted_run() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::TRAP).await;
    let log = drive(&mut c, &id, vec![Intervention::SetStep { dq: 0.1 }]).await;

    assert_contiguous(&log, 0);
    assert_eq!(
        final_state(&log),
        SessionState::Finished {
            outcome: Outcome::Success
        }
    );
    let s = gallery::scenario("trap").unwrap();
    let (traj, direct) = plan_interactive(&s, &mut ScriptedSource::new(gallery::setstep01())).unwrap();
    assert_eq!(traj.outcome(), Some(Outcome::Success));
    assert_eq!(events(&log), direct);

    let lm = events(&log)
        .into_iter()
        .find_map(|e| match e {
            PlannerEvent::LocalMinimum(m) => Some(m),
            _ => None,
        })
        .unwrap();
    assert_eq!(lm.candidates.len(), 26);
}

#[tokio::test]
async fn state_changes_follow_the_session_lifecycle() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::TRAP).await;
    let log = drive(&mut c, &id, vec![Intervention::SetStep { dq: 0.1 }]).await;
    let states: Vec<SessionState> = log.iter().filter_map(|e| e.state().copied()).collect();
    assert_eq!(
        states,
        vec![
            SessionState::Idle,
            SessionState::Running,
            SessionState::AwaitingIntervention,
            SessionState::Running,
            SessionState::Finished {
                outcome: Outcome::Success
            },
        ]
    );
}

#[tokio::test]
async fn abort_finishes_the_session_as_aborted() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::TRAP).await;
    let log = drive(&mut c, &id, vec![Intervention::Abort]).await;
    assert_eq!(
        final_state(&log),
        SessionState::Finished {
            outcome: Outcome::Aborted
        }
    );
    assert!(matches!(
        events(&log).last(),
        Some(PlannerEvent::Finished {
            outcome: Outcome::Aborted,
            ..
        })
    ));
}

#[tokio::test]
async fn intervening_outside_a_wait_is_refused() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = create(&mut c, gallery::RRR_20_10_20).await;
    let iv = ClientMessage::Intervene {
        id: id.clone(),
        intervention: Intervention::SetStep { dq: 0.1 },
    };
    c.send(&iv).await.unwrap();
    let e = expect_error(&mut c).await;
    assert_eq!(e.code, codes::NOT_AWAITING);
    assert_eq!(e.id.as_deref(), Some(id.as_str()));

    c.send(&ClientMessage::Subscribe {
        id: id.clone(),
        from: 0,
    })
    .await
    .unwrap();
    c.send(&ClientMessage::Start { id: id.clone() }).await.unwrap();
    let log = drive(&mut c, &id, vec![]).await;
    assert_eq!(
        final_state(&log),
        SessionState::Finished {
            outcome: Outcome::Success
        }
    );
    c.send(&iv).await.unwrap();
    assert_eq!(expect_error(&mut c).await.code, codes::NOT_AWAITING);
}

#[tokio::test]
async fn a_session_runs_once() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::RRR_20_10_20).await;
    drive(&mut c, &id, vec![]).await;
    c.send(&ClientMessage::Start { id: id.clone() }).await.unwrap();
    assert_eq!(expect_error(&mut c).await.code, codes::NOT_IDLE);
}

#[tokio::test]
async fn rejected_interventions_are_reported_and_can_be_retried() {
    let s = gallery::scenario("trap").unwrap();
    let colliding = (0..520)
        .map(|i| JointConfig::from(vec![-2.6 + 0.01 * i as f64, 0.0, 0.0]))
        .find(|q| posture_collides(&s.chain, q, &s.env))
        .expect("some straight posture hits an obstacle");

    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::TRAP).await;
    let mut log = Vec::new();
    let mut rejected = 0;
    let mut waits = 0;
    loop {
        match next(&mut c).await {
            ServerMessage::Events { entries, .. } => {
                for e in &entries {
                    if e.state() == Some(&SessionState::AwaitingIntervention) {
                        waits += 1;
                        let intervention = if waits == 1 {
                            Intervention::SetPosture {
                                angles: colliding.clone(),
                            }
                        } else {
                            Intervention::SetStep { dq: 0.1 }
                        };
                        c.send(&ClientMessage::Intervene {
                            id: id.clone(),
                            intervention,
                        })
                        .await
                        .unwrap();
                    }
                }
                let done = entries
                    .iter()
                    .any(|e| matches!(e.state(), Some(SessionState::Finished { .. })));
                log.extend(entries);
                if done {
                    break;
                }
            }
            ServerMessage::Error(e) => {
                assert_eq!(e.code, codes::REJECTED);
                assert!(e.text.contains("collides"), "{}", e.text);
                rejected += 1;
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert_eq!(rejected, 1);
    assert_eq!(waits, 2);
    assert_contiguous(&log, 0);
    assert_eq!(
        final_state(&log),
        SessionState::Finished {
            outcome: Outcome::Success
        }
    );
}

#[tokio::test]
async fn unsubscribed_interveners_get_a_direct_acknowledgement() {
    let addr = default_server().await;
    let mut watcher = Client::connect(addr).await.unwrap();
    let mut other = Client::connect(addr).await.unwrap();
    let id = start_subscribed(&mut watcher, gallery::TRAP).await;
    loop {
        let batch = entries(&mut watcher).await;
        if batch
            .iter()
            .any(|e| e.state() == Some(&SessionState::AwaitingIntervention))
        {
            break;
        }
    }
    other
        .send(&ClientMessage::Intervene {
            id: id.clone(),
            intervention: Intervention::SetStep { dq: 0.1 },
        })
        .await
        .unwrap();
    let ack = entries(&mut other).await;
    assert_eq!(ack.len(), 1);
    assert_eq!(
        ack[0].event(),
        Some(&PlannerEvent::InterventionApplied {
            step: ack[0].event().unwrap().step(),
            intervention: Intervention::SetStep { dq: 0.1 },
        })
    );
}

#[tokio::test]
async fn late_subscribers_see_a_gapless_log() {
    let addr = default_server().await;
    let mut driver = Client::connect(addr).await.unwrap();
    let id = start_subscribed(&mut driver, gallery::TRAP).await;
    // Wait until the run is parked so the late subscriber joins mid-run.
    let mut seen = Vec::new();
    loop {
        let batch = entries(&mut driver).await;
        let parked = batch
            .iter()
            .any(|e| e.state() == Some(&SessionState::AwaitingIntervention));
        seen.extend(batch);
        if parked {
            break;
        }
    }
    let mut late = Client::connect(addr).await.unwrap();
    late.send(&ClientMessage::Subscribe {
        id: id.clone(),
        from: 0,
    })
    .await
    .unwrap();
    let prefix = entries(&mut late).await;
    assert_eq!(prefix, seen);

    let mut partial = Client::connect(addr).await.unwrap();
    partial
        .send(&ClientMessage::Subscribe {
            id: id.clone(),
            from: 3,
        })
        .await
        .unwrap();
    let tail = entries(&mut partial).await;
    assert_eq!(tail[..], seen[3..]);

    driver
        .send(&ClientMessage::Intervene {
            id: id.clone(),
            intervention: Intervention::SetStep { dq: 0.1 },
        })
        .await
        .unwrap();
    let mut full = prefix;
    loop {
        let batch = entries(&mut late).await;
        let done = batch
            .iter()
            .any(|e| matches!(e.state(), Some(SessionState::Finished { .. })));
        full.extend(batch);
        if done {
            break;
        }
    }
    assert_contiguous(&full, 0);

    late.send(&ClientMessage::Replay { id: id.clone() }).await.unwrap();
    assert_eq!(entries(&mut late).await, full);
}

#[tokio::test]
async fn replaying_a_finished_session_ends_with_finished() {
    let mut c = Client::connect(default_server().await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::RRR_20_10_20).await;
    drive(&mut c, &id, vec![]).await;
    c.send(&ClientMessage::Replay { id }).await.unwrap();
    let log = entries(&mut c).await;
    assert_contiguous(&log, 0);
    assert!(matches!(
        events(&log).last(),
        Some(PlannerEvent::Finished {
            outcome: Outcome::Success,
            ..
        })
    ));
}

#[tokio::test]
async fn a_parked_session_aborts_after_the_idle_timeout() {
    let addr = server(HubConfig {
        park_timeout: Duration::from_millis(200),
        ..HubConfig::default()
    })
    .await;
    let mut c = Client::connect(addr).await.unwrap();
    let id = create(&mut c, gallery::TRAP).await;
    c.send(&ClientMessage::Start { id: id.clone() }).await.unwrap();
    // Nobody is listening; the run parks and then gives up.
    drop(c);
    tokio::time::sleep(Duration::from_millis(300)).await;

    let mut c = Client::connect(addr).await.unwrap();
    let log = loop {
        c.send(&ClientMessage::Replay { id: id.clone() }).await.unwrap();
        let log = entries(&mut c).await;
        if matches!(final_state(&log), SessionState::Finished { .. }) {
            break log;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    };
    assert_eq!(
        final_state(&log),
        SessionState::Finished {
            outcome: Outcome::Aborted
        }
    );
    c.send(&ClientMessage::Intervene {
        id,
        intervention: Intervention::SetStep { dq: 0.1 },
    })
    .await
    .unwrap();
    assert_eq!(expect_error(&mut c).await.code, codes::NOT_AWAITING);
}

#[tokio::test]
async fn a_reconnecting_client_can_resume_a_parked_session() {
    let addr = default_server().await;
    let mut c = Client::connect(addr).await.unwrap();
    let id = start_subscribed(&mut c, gallery::TRAP).await;
    loop {
        let batch = entries(&mut c).await;
        if batch
            .iter()
            .any(|e| e.state() == Some(&SessionState::AwaitingIntervention))
        {
            break;
        }
    }
    drop(c);

    let mut c = Client::connect(addr).await.unwrap();
    c.send(&ClientMessage::Subscribe {
        id: id.clone(),
        from: 0,
    })
    .await
    .unwrap();
    let prefix = entries(&mut c).await;
    assert_eq!(final_state(&prefix), SessionState::AwaitingIntervention);
    c.send(&ClientMessage::Intervene {
        id: id.clone(),
        intervention: Intervention::SetStep { dq: 0.1 },
    })
    .await
    .unwrap();
    let rest = drive(&mut c, &id, vec![]).await;
    assert_eq!(
        final_state(&rest),
        SessionState::Finished {
            outcome: Outcome::Success
        }
    );
}

async fn batches(config: HubConfig) -> Vec<Vec<LogEntry>> {
    let mut c = Client::connect(server(config).await).await.unwrap();
    let id = start_subscribed(&mut c, gallery::RRR_20_20_40).await;
    let mut out = Vec::new();
    loop {
        let batch = entries(&mut c).await;
        let done = batch
            .iter()
            .any(|e| matches!(e.state(), Some(SessionState::Finished { .. })));
        out.push(batch);
        if done {
            break;
        }
    }
    let _ = id;
    out
}

fn is_step(e: &LogEntry) -> bool {
    matches!(e.event(), Some(PlannerEvent::Stepped { .. }))
}

#[tokio::test]
async fn step_events_are_batched_under_a_long_throttle() {
    let out = batches(HubConfig {
        throttle: Duration::from_secs(3600),
        ..HubConfig::default()
    })
    .await;
    let steps: usize = out.iter().flatten().filter(|e| is_step(e)).count();
    assert!(steps > 10, "{steps} steps");
    // Only lifecycle changes and non-step events release a batch.
    for batch in &out {
        assert!(!is_step(batch.last().unwrap()), "a batch ended on a step");
    }
    assert!(out.len() <= 4, "{} batches", out.len());
}

#[tokio::test]
async fn a_zero_throttle_sends_every_step_on_its_own() {
    let out = batches(HubConfig {
        throttle: Duration::ZERO,
        ..HubConfig::default()
    })
    .await;
    for batch in out.iter().filter(|b| b.iter().any(is_step)) {
        assert_eq!(batch.len(), 1, "{batch:?}");
    }
}

#[tokio::test]
async fn the_web_socket_transport_speaks_the_same_protocol() {
    use tokio_tungstenite::tungstenite::Message;

    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_ws(listener, Hub::default()));
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws"))
        .await
        .unwrap();

    let send = |m: ClientMessage| Message::Text(chainplan_server::protocol::encode(&m).into());
    ws.send(send(ClientMessage::CreateSession {
        scenario: gallery::RRR_20_10_20.into(),
    }))
    .await
    .unwrap();
    let recv = |m: Message| -> ServerMessage { chainplan_server::protocol::decode(m.to_text().unwrap()).unwrap() };
    let id = match recv(ws.next().await.unwrap().unwrap()) {
        ServerMessage::SessionCreated { id } => id,
        other => panic!("{other:?}"),
    };
    ws.send(send(ClientMessage::Subscribe {
        id: id.clone(),
        from: 0,
    }))
    .await
    .unwrap();
    ws.send(send(ClientMessage::Start { id: id.clone() })).await.unwrap();
    let mut log = Vec::new();
    while !matches!(
        log.last().and_then(LogEntry::state),
        Some(SessionState::Finished { .. })
    ) {
        match recv(ws.next().await.unwrap().unwrap()) {
            ServerMessage::Events { entries, .. } => log.extend(entries),
            other => panic!("{other:?}"),
        }
    }
    assert_contiguous(&log, 0);
    let s = gallery::scenario("rrr_20_10_20").unwrap();
    let (_, direct) = chainplan_core::plan_soo(&s).unwrap();
    assert_eq!(events(&log), direct);
}
