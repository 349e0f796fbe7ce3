mod common;

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

use common::{corpus, read};
use umlval::server::{router, AppState};

struct Client {
    app: Router,
}

impl Client {
    fn new() -> Self {
        Client {
            app: router(AppState::new(), None),
        }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Json>) -> (StatusCode, String) {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(j) => {
                req = req.header("content-type", "application/json");
                Body::from(j.to_string())
            }
            None => Body::empty(),
        };
        let resp = self.app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn json(&self, method: Method, uri: &str, body: Option<Json>) -> (StatusCode, Json) {
        let (status, text) = self.call(method, uri, body).await;
        (status, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
    }

    /// A session with the corpus model and its configuration file loaded.
    async fn session(&self) -> String {
        let (st, j) = self.json(Method::POST, "/sessions", None).await;
        assert_eq!(st, StatusCode::CREATED);
        let id = j["id"].as_str().unwrap().to_string();
        let path = corpus("carrental.use");
        let (st, j) = self
            .json(
                Method::POST,
                &format!("/sessions/{id}/model"),
                Some(json!({ "text": read("carrental.use"), "path": path })),
            )
            .await;
        assert_eq!(st, StatusCode::OK, "{j}");
        assert_eq!(j["configs"], json!(["datatypes", "parts", "full", "application"]));
        id
    }

    async fn submit(&self, session: &str, body: Json) -> String {
        let (st, j) = self.json(Method::POST, &format!("/sessions/{session}/jobs"), Some(body)).await;
        assert_eq!(st, StatusCode::ACCEPTED, "{j}");
        j["id"].as_str().unwrap().to_string()
    }

    async fn job(&self, id: &str) -> Json {
        self.json(Method::GET, &format!("/jobs/{id}"), None).await.1
    }

    /// Polls until the job leaves `running`/`queued`, recording each state.
    async fn wait(&self, id: &str, seen: &mut Vec<String>) -> Json {
        let start = Instant::now();
        loop {
            let j = self.job(id).await;
            let state = j["state"].as_str().unwrap().to_string();
            if seen.last() != Some(&state) {
                seen.push(state.clone());
            }
            if state == "done" || state == "cancelled" {
                return j;
            }
            assert!(start.elapsed() < Duration::from_secs(60), "job stuck in {state}");
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }
}

fn forward_only(seen: &[String]) -> bool {
    let rank = |s: &str| ["queued", "running", "done", "cancelled"].iter().position(|x| *x == s).unwrap().min(2);
    seen.windows(2).all(|w| rank(&w[0]) < rank(&w[1]))
}

#[tokio::test(flavor = "multi_thread")]
async fn scenario_job_reaches_done_with_sat() {
    let c = Client::new();
    let s = c.session().await;
    let id = c.submit(&s, json!({ "kind": "validate", "configName": "parts" })).await;
    let mut seen = Vec::new();
    let j = c.wait(&id, &mut seen).await;
    assert!(forward_only(&seen), "{seen:?}");
    assert_eq!(j["state"], "done");
    assert_eq!(j["result"]["verdict"], "SAT");

    let (st, text) = c.call(Method::GET, &format!("/jobs/{id}/state.json"), None).await;
    assert_eq!(st, StatusCode::OK);
    let state = umlval::state::import_json(&text).unwrap();
    assert_eq!((state.objects.len(), state.links.len()), (3, 2));
    let (st, dot) = c.call(Method::GET, &format!("/jobs/{id}/state.dot"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert!(dot.starts_with("digraph"));
    let (st, _) = c.call(Method::GET, &format!("/jobs/{id}/state.dot?index=3"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn unparsable_value_is_422_with_key() {
    let c = Client::new();
    let s = c.session().await;
    let (st, j) = c
        .json(
            Method::PUT,
            &format!("/sessions/{s}/configs/parts"),
            Some(json!({ "text": "Customer_min = abc\n" })),
        )
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let e = &j["errors"][0];
    assert_eq!(e["key"], "Customer_min");
    assert_eq!(e["location"]["line"], 1);
    assert!(!e["message"].as_str().unwrap().is_empty());

    // Validation failures on the JSON form are keyed as well.
    let (_, cfg) = c.json(Method::GET, &format!("/sessions/{s}/configs/parts"), None).await;
    let mut config = cfg["config"].clone();
    config["class_bounds"]["Branch"] = json!({ "min": 3, "max": { "value": 1 } });
    let (st, j) = c
        .json(Method::PUT, &format!("/sessions/{s}/configs/parts"), Some(json!({ "config": config })))
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY, "{j}");
    assert_eq!(j["errors"][0]["key"], "Branch_min");
}

#[tokio::test(flavor = "multi_thread")]
async fn cancel_running_job() {
    let c = Client::new();
    let s = c.session().await;
    // Proving this invariant implied takes the search through the whole space.
    let slow = json!({ "kind": "independence", "configName": "full", "invariant": "Branch::staffAgeLimit" });
    let first = c.submit(&s, slow.clone()).await;
    let second = c.submit(&s, slow).await;
    let start = Instant::now();
    while c.job(&first).await["state"] != "running" {
        assert!(start.elapsed() < Duration::from_secs(10));
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    // One finder job per session at a time.
    assert_eq!(c.job(&second).await["state"], "queued");

    let (st, _) = c.json(Method::POST, &format!("/jobs/{second}/cancel"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(c.job(&second).await["state"], "cancelled");

    c.json(Method::POST, &format!("/jobs/{first}/cancel"), None).await;
    let mut seen = vec!["running".to_string()];
    let j = c.wait(&first, &mut seen).await;
    assert_eq!(j["state"], "cancelled");
    assert_eq!(j["result"]["reports"][0]["outcome"], "inconclusive");
    assert!(forward_only(&seen), "{seen:?}");
    // The cancelled queued job never runs.
    tokio::time::sleep(Duration::from_millis(50)).await;
    assert_eq!(c.job(&second).await["state"], "cancelled");
    assert!(c.job(&second).await.get("result").is_none());
}

#[tokio::test(flavor = "multi_thread")]
async fn config_management_statuses() {
    let c = Client::new();
    let s = c.session().await;
    let base = format!("/sessions/{s}/configs");
    let (st, j) = c.json(Method::POST, &format!("{base}/parts/clone"), None).await;
    assert_eq!(st, StatusCode::CREATED, "{j}");
    let (st, _) = c
        .json(Method::POST, &format!("{base}/parts/rename"), Some(json!({ "new_name": "full" })))
        .await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, j) = c
        .json(Method::POST, &format!("{base}/parts/rename"), Some(json!({ "new_name": "scenario" })))
        .await;
    assert_eq!(st, StatusCode::OK);
    assert!(j["names"].as_array().unwrap().contains(&json!("scenario")));
    let (st, _) = c.json(Method::POST, &format!("{base}/nope/delete"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c.json(Method::GET, &format!("{base}/nope"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c.json(Method::GET, "/sessions/00000000-0000-0000-0000-000000000000", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c.json(Method::GET, "/jobs/not-a-job", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c
        .json(Method::POST, &format!("/sessions/{s}/jobs"), Some(json!({ "kind": "validate", "configName": "nope" })))
        .await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn config_text_round_trips_byte_identically() {
    let c = Client::new();
    let s = c.session().await;
    let (_, j) = c.json(Method::GET, &format!("/sessions/{s}/configs"), None).await;
    let text = j["text"].as_str().unwrap().to_string();
    let (st, _) = c.json(Method::PUT, &format!("/sessions/{s}/configs"), Some(json!({ "text": text }))).await;
    assert_eq!(st, StatusCode::OK);
    let (_, j) = c.json(Method::GET, &format!("/sessions/{s}/configs"), None).await;
    assert_eq!(j["text"].as_str().unwrap(), text);

    let (_, one) = c.json(Method::GET, &format!("/sessions/{s}/configs/application"), None).await;
    let t = one["text"].as_str().unwrap().to_string();
    let (st, back) = c
        .json(Method::PUT, &format!("/sessions/{s}/configs/application"), Some(json!({ "text": t })))
        .await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(back["text"].as_str().unwrap(), t);
    assert_eq!(back["config"], one["config"]);
}

#[tokio::test(flavor = "multi_thread")]
async fn warnings_model_errors_and_base_state() {
    let c = Client::new();
    let s = c.session().await;
    let (_, j) = c.json(Method::GET, &format!("/sessions/{s}/warnings"), None).await;
    let kinds: Vec<&str> = j["warnings"].as_array().unwrap().iter().map(|w| w["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds.len(), 2, "{kinds:?}");

    let (st, j) = c
        .json(Method::POST, &format!("/sessions/{s}/model"), Some(json!({ "text": read("fixtures/broken.use") })))
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(j["errors"][0]["location"]["line"].as_u64().unwrap() >= 1);

    // A partial state given as commands is kept in the result.
    let cmds = read("fixtures/unemployed.cmd");
    let id = c.submit(&s, json!({ "kind": "validate", "configName": "parts", "baseState": cmds })).await;
    let j = c.wait(&id, &mut Vec::new()).await;
    assert_eq!(j["result"]["verdict"], "SAT", "{j}");
    let names: Vec<&str> = j["result"]["states"][0]["objects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"e1") && names.contains(&"b1"), "{names:?}");
}

#[tokio::test(flavor = "multi_thread")]
async fn snapshot_restores_sessions() {
    let state = AppState::new();
    let c = Client {
        app: router(state.clone(), None),
    };
    let s = c.session().await;
    let snap = state.snapshot().await;
    let fresh = AppState::new();
    fresh.restore(&snap).await;
    let c2 = Client {
        app: router(fresh, None),
    };
    let (st, j) = c2.json(Method::GET, &format!("/sessions/{s}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(j["configs"], json!(["datatypes", "parts", "full", "application"]));
}
