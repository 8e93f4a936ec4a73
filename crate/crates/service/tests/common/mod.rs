#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cyrus_client::Client;
use cyrus_service::{discover, Tutor, TutorConfig};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub fn data_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn config(log: Option<PathBuf>) -> TutorConfig {
    TutorConfig {
        databases: discover(&data_root()).expect("bundled data"),
        log,
        ..TutorConfig::default()
    }
}

/// A tutor serving on an ephemeral loopback port.
pub struct Server {
    pub client: Client,
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<std::io::Result<()>>>,
}

impl Server {
    pub async fn start(config: TutorConfig) -> Self {
        let tutor = Arc::new(Tutor::open(config).expect("tutor opens"));
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", 0))
            .await
            .unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(cyrus_service::serve(listener, tutor, async {
            let _ = rx.await;
        }));
        Self {
            client: Client::new(format!("http://{addr}")),
            addr,
            stop: Some(tx),
            task: Some(task),
        }
    }

    /// Stops serving and waits for the log to be flushed.
    pub async fn stop(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap().unwrap();
        }
    }
}
