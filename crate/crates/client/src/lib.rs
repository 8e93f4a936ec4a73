//! Typed access to the tutor service API.

use cyrus_api::*;
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use cyrus_api as api;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{0}")]
    Api(ApiError),
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected {status} response: {body}")]
    Unexpected { status: StatusCode, body: String },
}

impl ClientError {
    /// The service's error code, if the service produced one.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api(e) => Some(&e.code),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn call<B: Serialize, T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&B>,
    ) -> Result<T, ClientError> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().await?;
        let status = resp.status();
        let bytes = resp.bytes().await?;
        if status.is_success() {
            return serde_json::from_slice(&bytes).map_err(|_| ClientError::Unexpected {
                status,
                body: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
        match serde_json::from_slice::<ApiError>(&bytes) {
            Ok(e) => Err(ClientError::Api(e)),
            Err(_) => Err(ClientError::Unexpected {
                status,
                body: String::from_utf8_lossy(&bytes).into_owned(),
            }),
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        self.call::<(), T>(Method::GET, path, None).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T, ClientError> {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn databases(&self) -> Result<Vec<DatabaseInfo>, ClientError> {
        self.get("/databases").await
    }

    pub async fn schema(&self, database: &str) -> Result<SchemaDoc, ClientError> {
        self.get(&format!("/databases/{database}/schema")).await
    }

    pub async fn start_session(&self, req: &CreateSession) -> Result<SessionInfo, ClientError> {
        self.post("/sessions", req).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionInfo, ClientError> {
        self.get(&format!("/sessions/{id}")).await
    }

    pub async fn translate(&self, id: &str, text: &str) -> Result<TranslateResponse, ClientError> {
        let body = TranslateRequest {
            text: text.to_string(),
        };
        self.post(&format!("/sessions/{id}/translate"), &body).await
    }

    pub async fn run_sql(&self, id: &str, sql: &str) -> Result<ResultTable, ClientError> {
        let body = SqlRequest {
            sql: sql.to_string(),
        };
        self.post(&format!("/sessions/{id}/sql"), &body).await
    }

    pub async fn submit_answer(
        &self,
        id: &str,
        assignment: &str,
        sql: &str,
    ) -> Result<AnswerResponse, ClientError> {
        let body = AnswerRequest {
            assignment: assignment.to_string(),
            sql: sql.to_string(),
        };
        self.post(&format!("/sessions/{id}/answers"), &body).await
    }

    pub async fn score(&self, id: &str) -> Result<Score, ClientError> {
        self.get(&format!("/sessions/{id}/score")).await
    }

    pub async fn assignments(&self, id: &str) -> Result<Vec<AssignmentView>, ClientError> {
        self.get(&format!("/sessions/{id}/assignments")).await
    }
}
