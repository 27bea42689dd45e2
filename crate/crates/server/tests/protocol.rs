use axum::body::Body;
use axum::http::{header, Request as HttpRequest, StatusCode};
use serde_json::{json, Value};
use std::sync::Arc;
use tokio::sync::Mutex;
use tower::ServiceExt;

use dl_core::kernel::check_dlp;
use dl_server::{router, App, Request, Server};

fn problem(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn send(server: &mut Server, session: Option<u64>, message: Value) -> Value {
    let req: Request = serde_json::from_value(json!({"session": session, "message": message})).unwrap();
    server.handle(req)
}

fn load(server: &mut Server, name: &str) -> u64 {
    let r = send(server, None, json!({"type": "loadProblem", "text": problem(name)}));
    assert_eq!(r["ok"], true, "{r}");
    r["session"].as_u64().unwrap()
}

fn goals(r: &Value) -> Vec<Value> {
    r["state"]["goals"].as_array().unwrap().clone()
}

fn succ0() -> Value {
    json!({"side": "succ", "index": 0})
}

fn box_part() -> Value {
    json!({"side": "succ", "index": 0, "path": [1]})
}

#[test]
fn load_reports_applicable_rules() {
    let mut server = Server::new();
    let sid = load(&mut server, "braking.dl");
    let r = send(&mut server, Some(sid), json!({"type": "getState"}));
    assert_eq!(r["version"], 1);
    assert_eq!(goals(&r).len(), 1);
    let g = &goals(&r)[0];
    let hints: Vec<&str> = g["hints"].as_array().unwrap().iter().map(|h| h.as_str().unwrap()).collect();
    assert!(hints.contains(&"[;]"), "{hints:?}");
    assert!(!hints.contains(&"DI"));
    assert_eq!(r["state"]["proved"], false);
}

#[test]
fn differential_invariant_premise() {
    let mut server = Server::new();
    let sid = load(&mut server, "rotational.dl");
    let r = send(&mut server, Some(sid), json!({"type": "applyRule", "goalId": 0, "ruleId": "impR"}));
    assert_eq!(r["ok"], true, "{r}");
    let g = goals(&r)[0]["id"].as_u64().unwrap();
    let r = send(
        &mut server,
        Some(sid),
        json!({"type": "applyRule", "goalId": g, "ruleId": "DI", "args": {"position": succ0()}}),
    );
    assert_eq!(r["ok"], true, "{r}");
    assert_eq!(goals(&r).len(), 1);
    let texts: Vec<String> = goals(&r).iter().map(|g| g["sequent"].as_str().unwrap().to_string()).collect();
    assert!(texts.iter().any(|t| t.contains("2*x*y + 2*y*(-x) >= 0")), "{texts:?}");
    for g in goals(&r) {
        let r = send(&mut server, Some(sid), json!({"type": "closeArith", "goalId": g["id"]}));
        assert_eq!(r["ok"], true, "{r}");
    }
    let r = send(&mut server, Some(sid), json!({"type": "exportProof"}));
    assert_eq!(r["ok"], true, "{r}");
    let proof = r["result"]["proof"].as_str().unwrap();
    check_dlp(proof).unwrap();
}

#[test]
fn stale_goal_is_rejected_without_change() {
    let mut server = Server::new();
    let sid = load(&mut server, "braking.dl");
    let r = send(&mut server, Some(sid), json!({"type": "applyAxiom", "goalId": 0, "axiomId": "[;]", "position": box_part()}));
    assert_eq!(r["ok"], true, "{r}");
    let before = r["state"].clone();
    let r = send(&mut server, Some(sid), json!({"type": "applyAxiom", "goalId": 0, "axiomId": "[;]", "position": box_part()}));
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"]["kind"], "UnknownGoal");
    assert_eq!(r["state"], before);
}

#[test]
fn side_conditions_are_reported() {
    let mut server = Server::new();
    let sid = load(&mut server, "progress.dl");
    let r = send(&mut server, Some(sid), json!({"type": "applyRule", "goalId": 0, "ruleId": "DV", "args": {"position": succ0()}}));
    assert_eq!(r["ok"], true, "{r}");
    let text = "Vars: x\nProve: <{x'=1}> x = 5";
    let r = send(&mut server, Some(sid), json!({"type": "loadProblem", "text": text}));
    assert_eq!(r["session"], sid);
    assert_eq!(r["ok"], true, "{r}");
    let r = send(&mut server, Some(sid), json!({"type": "applyRule", "goalId": 0, "ruleId": "DV", "args": {"position": succ0()}}));
    assert_eq!(r["ok"], false);
    assert_eq!(r["error"]["kind"], "SideConditionError");
    assert!(r["error"]["message"].as_str().unwrap().contains("F may not contain equalities"), "{r}");
}

#[test]
fn undo_restores_previous_state() {
    let mut server = Server::new();
    let sid = load(&mut server, "braking.dl");
    let start = send(&mut server, Some(sid), json!({"type": "getState"}))["state"].clone();
    let r = send(&mut server, Some(sid), json!({"type": "applyAxiom", "goalId": 0, "axiomId": "[;]", "position": box_part()}));
    assert_ne!(r["state"], start);
    let r = send(&mut server, Some(sid), json!({"type": "undo"}));
    assert_eq!(r["ok"], true);
    assert_eq!(r["state"], start);
    let r = send(&mut server, Some(sid), json!({"type": "undo"}));
    assert_eq!(r["error"]["kind"], "NothingToUndo");
}

#[test]
fn tactics_and_falsification() {
    let mut server = Server::new();
    let sid = load(&mut server, "braking.dl");
    let r = send(&mut server, Some(sid), json!({"type": "applyTactic", "goalId": 0, "name": "auto"}));
    assert_eq!(r["ok"], true, "{r}");
    assert_eq!(r["state"]["proved"], true);
    let r = send(&mut server, Some(sid), json!({"type": "exportProof"}));
    check_dlp(r["result"]["proof"].as_str().unwrap()).unwrap();

    let other = load(&mut server, "braking_noassume.dl");
    assert_ne!(other, sid);
    let r = send(&mut server, Some(other), json!({"type": "falsify", "goalId": 0, "budget": 500}));
    assert_eq!(r["ok"], true, "{r}");
    assert!(r["result"]["counterexample"].is_object(), "{r}");
    let r = send(&mut server, Some(other), json!({"type": "exportProof"}));
    assert_eq!(r["error"]["kind"], "OpenGoals");
    let r = send(&mut server, Some(99), json!({"type": "getState"}));
    assert_eq!(r["error"]["kind"], "UnknownSession");
}

#[test]
fn replay_reproduces_sessions() {
    let mut server = Server::new();
    let a = load(&mut server, "rotational.dl");
    let b = load(&mut server, "braking.dl");
    send(&mut server, Some(a), json!({"type": "applyRule", "goalId": 0, "ruleId": "impR"}));
    send(&mut server, Some(b), json!({"type": "applyAxiom", "goalId": 0, "axiomId": "[;]", "position": box_part()}));
    send(&mut server, Some(b), json!({"type": "applyAxiom", "goalId": 1, "axiomId": "[:=]", "position": box_part()}));
    send(&mut server, Some(a), json!({"type": "applyTactic", "goalId": 1, "name": "di"}));
    send(&mut server, Some(b), json!({"type": "undo"}));
    let text = serde_json::to_string(server.log()).unwrap();
    let log: Vec<Request> = serde_json::from_str(&text).unwrap();
    let mut copy = Server::replay(&log);
    for id in [a, b] {
        let want = send(&mut server, Some(id), json!({"type": "getState"}));
        let got = send(&mut copy, Some(id), json!({"type": "getState"}));
        assert_eq!(want, got);
    }
}

#[tokio::test]
async fn http_endpoint() {
    let app = router(Arc::new(Mutex::new(App::default())));
    let body = json!({"message": {"type": "loadProblem", "text": problem("velocity.dl")}});
    let req = HttpRequest::post("/")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["session"], 0);

    let req = HttpRequest::post("/")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(r#"{"message": {"type": "bogus"}}"#))
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.status().is_client_error());
}
