use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use slax_core::container;
use slax_core::fixtures;
use slax_core::wav::PcmBuffer;
use slax_server::{router, AppState, LoadedPiece};

fn loaded(piece: slax_core::Piece) -> LoadedPiece {
    let stems: Vec<PcmBuffer> = (0..piece.tracks.len())
        .map(|i| PcmBuffer::sine(110.0 * (i + 1) as f64, piece.sample_rate, 64, 8000))
        .collect();
    let bytes = container::encode_pcm(&piece, &stems).unwrap();
    LoadedPiece::from_bytes(&bytes).unwrap()
}

async fn get(state: AppState, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = router(state)
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

#[tokio::test]
async fn piece_lists_manifest_and_stem_urls() {
    let state = AppState::new(Some(loaded(fixtures::three_instruments())));
    let (status, body) = get(state, "/piece").await;
    assert_eq!(status, StatusCode::OK);
    let doc: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(doc["manifest"]["tracks"].as_array().unwrap().len(), 9);
    assert_eq!(
        doc["manifest"]["selection_constraints"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    assert!(doc["manifest"]["group_tree"].is_object());
    let stems: Vec<&str> = doc["stems"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect();
    assert_eq!(stems.len(), 9);
    assert_eq!(stems[8], "/stems/8");
}

#[tokio::test]
async fn unconstrained_piece_has_empty_constraint_lists() {
    let state = AppState::new(Some(loaded(fixtures::unconstrained(2))));
    let (_, body) = get(state, "/piece").await;
    let doc: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(
        doc["manifest"]["selection_constraints"],
        serde_json::json!([])
    );
    assert_eq!(doc["manifest"]["mix_constraints"], serde_json::json!([]));
}

#[tokio::test]
async fn stems_are_the_stored_payloads() {
    let piece = loaded(fixtures::three_instruments());
    let state = AppState::new(Some(piece.clone()));
    for (i, payload) in piece.stems.iter().enumerate() {
        let (status, body) = get(state.clone(), &format!("/stems/{i}")).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(&body, payload);
    }
    assert_eq!(
        get(state.clone(), "/stems/9").await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(get(state, "/stems/x").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn nothing_loaded_is_unavailable() {
    let state = AppState::new(None);
    assert_eq!(
        get(state.clone(), "/piece").await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );
    assert_eq!(
        get(state.clone(), "/stems/0").await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );
    let (status, body) = get(state, "/healthz").await;
    assert_eq!(status, StatusCode::OK);
    let doc: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(doc["loaded"], false);
}
