use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use isochrono::bridge::conformance::run_conformance;
use isochrono::bridge::mock::{mock_qe, MockWorker};
use isochrono::bridge::{BridgeClient, BridgeError, ErrorCode, RequestBody};
use isochrono::duration::BridgePredictor;
use isochrono::evaluation::{evaluate_system, EvalError, EvalOptions};
use isochrono::qe::{BridgeQe, QeItem};
use isochrono::{DurationPredictor, LanguagePair, PredictError, QeProvider, Segment, Submission};

fn mock(max_delay_ms: u64) -> SocketAddr {
    let worker = MockWorker {
        max_delay_ms,
        seed: 42,
        ..MockWorker::default()
    };
    worker.listen("127.0.0.1:0").unwrap().0
}

fn client(addr: SocketAddr) -> BridgeClient {
    BridgeClient::connect(&addr.to_string()).unwrap()
}

/// Accepts one connection and hands it to `script`.
fn fake_server(script: impl FnOnce(BufReader<TcpStream>, TcpStream) + Send + 'static) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        script(BufReader::new(stream.try_clone().unwrap()), stream);
    });
    addr
}

#[test]
fn durations_follow_the_mock_formula() {
    let c = client(mock(0));
    let got = c
        .durations(&[("hello", "en"), ("日本語です", "zh"), ("a b c", "de")])
        .unwrap();
    let seconds: Vec<f64> = got.into_iter().map(Result::unwrap).collect();
    for (s, want) in seconds.iter().zip([0.5, 0.5, 0.5]) {
        assert!((s - want).abs() < 1e-12, "{s} vs {want}");
    }
}

#[test]
fn per_item_errors_do_not_spoil_the_batch() {
    let c = client(mock(2));
    let got = c
        .durations(&[("fine", "en"), ("   ", "en"), ("bien", "xx"), ("gut", "de")])
        .unwrap();
    assert!((got[0].as_ref().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(got[1].as_ref().unwrap_err().code, ErrorCode::EmptyText);
    assert_eq!(got[2].as_ref().unwrap_err().code, ErrorCode::UnsupportedLanguage);
    assert!((got[3].as_ref().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn responses_are_reordered_by_id() {
    let c = client(mock(5)).with_max_in_flight(8);
    let texts: Vec<String> = (1..=60).map(|n| "x".repeat(n)).collect();
    let items: Vec<(&str, &str)> = texts.iter().map(|t| (t.as_str(), "en")).collect();
    let got = c.durations(&items).unwrap();
    for (n, s) in (1..=60).zip(got) {
        assert!((s.unwrap() - 0.1 * n as f64).abs() < 1e-9);
    }
}

#[test]
fn concurrent_callers_share_one_connection() {
    let c = Arc::new(client(mock(1)));
    thread::scope(|scope| {
        for k in 1..=4 {
            let c = c.clone();
            scope.spawn(move || {
                let text = "y".repeat(k * 10);
                for _ in 0..5 {
                    let got = c.durations(&[(text.as_str(), "ru")]).unwrap();
                    assert!((got[0].as_ref().unwrap() - k as f64).abs() < 1e-9);
                }
            });
        }
    });
}

#[test]
fn qe_scores_round_trip() {
    let c = Arc::new(client(mock(0)));
    let provider = BridgeQe::new(c);
    let item = QeItem {
        segment_id: "s1",
        system: "sys",
        source_text: "the red house",
        translated_text: "the blue house",
        source_language: "en",
        target_language: "en",
    };
    let score = provider.score(&item).unwrap();
    assert!((score - mock_qe("the red house", "the blue house")).abs() < 1e-12);
    assert!((score - 2.5).abs() < 1e-12);
}

#[test]
fn mock_passes_the_conformance_suite() {
    let addr = mock(3);
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let checks = run_conformance(&mut reader, &mut writer, "en");
    assert!(checks.len() >= 5);
    for c in &checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}

#[test]
fn conformance_catches_a_sloppy_worker() {
    // Echoes a fixed id and never reports errors.
    let addr = fake_server(|reader, mut writer| {
        for line in reader.lines() {
            if line.is_err() {
                break;
            }
            let _ = writeln!(
                writer,
                r#"{{"id":1,"ok":true,"result":{{"seconds":1.0,"languages":["en"],"qe":true}}}}"#
            );
        }
    });
    let stream = TcpStream::connect(addr).unwrap();
    stream
        .set_read_timeout(Some(std::time::Duration::from_secs(2)))
        .unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let checks = run_conformance(&mut reader, &mut writer, "en");
    assert!(checks.iter().any(|c| !c.passed));
}

#[test]
fn unreachable_bridge_is_a_connect_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    match BridgeClient::connect(&format!("tcp://{port}")) {
        Err(BridgeError::Connect { .. }) => {}
        other => panic!("expected connect error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn missing_worker_binary_is_a_spawn_error() {
    match BridgeClient::connect("/nonexistent/worker --flag") {
        Err(BridgeError::Spawn { .. }) => {}
        other => panic!("expected spawn error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn worker_hanging_up_breaks_the_client() {
    let addr = fake_server(|mut reader, _writer| {
        let mut line = String::new();
        let _ = reader.read_line(&mut line);
    });
    let c = client(addr);
    let err = c.durations(&[("hello", "en")]).unwrap_err();
    assert!(matches!(err, BridgeError::Closed | BridgeError::Io(_)), "{err:?}");
    assert!(c.is_broken());
    assert_eq!(c.durations(&[("hello", "en")]).unwrap_err(), BridgeError::Closed);
}

#[test]
fn unknown_response_ids_are_protocol_errors() {
    let addr = fake_server(|mut reader, mut writer| {
        let mut line = String::new();
        let _ = reader.read_line(&mut line);
        let _ = writeln!(writer, r#"{{"id":999999,"ok":true,"result":{{"seconds":1.0}}}}"#);
        let _ = reader.read_line(&mut line);
    });
    let err = client(addr).call(RequestBody::Capabilities).unwrap_err();
    assert!(matches!(err, BridgeError::Protocol(_)), "{err:?}");
}

#[test]
fn garbage_lines_are_protocol_errors() {
    let addr = fake_server(|mut reader, mut writer| {
        let mut line = String::new();
        let _ = reader.read_line(&mut line);
        let _ = writeln!(writer, "not json");
        let _ = reader.read_line(&mut line);
    });
    let err = client(addr).call(RequestBody::Capabilities).unwrap_err();
    assert!(matches!(err, BridgeError::Protocol(_)), "{err:?}");
}

#[test]
fn bridge_predictor_maps_error_codes() {
    let p = BridgePredictor::new(Arc::new(client(mock(0)))).unwrap();
    assert!(p.id().starts_with("bridge:"));
    assert!(p.supported_languages().contains("zh"));
    let out = p.predict_batch(&[("ok", "en"), ("", "en"), ("ok", "xx")]);
    assert!((out[0].as_ref().unwrap().seconds() - 0.2).abs() < 1e-12);
    assert!(matches!(out[1], Err(PredictError::EmptyText)));
    assert!(matches!(out[2], Err(PredictError::UnsupportedLanguage(_))));
}

#[test]
fn transport_failure_during_evaluation_is_not_a_segment_error() {
    let addr = fake_server(|mut reader, mut writer| {
        let mut line = String::new();
        let _ = reader.read_line(&mut line);
        let _ = writeln!(
            writer,
            r#"{{"id":{},"ok":true,"result":{{"languages":["en","de"],"qe":true}}}}"#,
            serde_json::from_str::<serde_json::Value>(&line).unwrap()["id"]
        );
    });
    let predictor = BridgePredictor::new(Arc::new(client(addr))).unwrap();
    let pair = LanguagePair::new("en", "de");
    let corpus = vec![Segment::new("s1", "hello world", "en", None, 3, 0)];
    let submission = Submission::new("sys", pair).with_translation("s1", "hallo welt");
    let qe = isochrono::qe::ConstantQe::new(4.0);
    let err = evaluate_system(&corpus, &submission, &predictor, &qe, &EvalOptions::default()).unwrap_err();
    assert!(matches!(err, EvalError::Transport { .. }), "{err:?}");
}
