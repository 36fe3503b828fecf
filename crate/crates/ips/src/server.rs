//! Serves any [`Backend`] over the JSON wire protocol understood by
//! [`RemoteBackend`](crate::remote::RemoteBackend).

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use ips_core::{Backend, Error};
use tiny_http::{Header, Method, Request, Response, Server};

use crate::remote::{
    ForwardBatchRequest, ForwardBatchResponse, ForwardRequest, ForwardResponse, ReturnHidden,
};

/// A running server; stops its workers when dropped.
pub struct ServerHandle {
    server: Arc<Server>,
    addr: SocketAddr,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until every worker exits.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free port) and answers requests on
/// `workers` threads.
pub fn spawn(
    backend: Arc<dyn Backend>,
    addr: &str,
    workers: usize,
) -> anyhow::Result<ServerHandle> {
    let server = Arc::new(Server::http(addr).map_err(|e| anyhow::anyhow!("bind {addr}: {e}"))?);
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| anyhow::anyhow!("server is not bound to an IP address"))?;
    let workers = (0..workers.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let backend = Arc::clone(&backend);
            std::thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    handle(backend.as_ref(), req);
                }
            })
        })
        .collect();
    Ok(ServerHandle {
        server,
        addr,
        workers,
    })
}

fn json_header() -> Header {
    Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("static header")
}

fn handle(backend: &dyn Backend, mut req: Request) {
    let mut body = String::new();
    let result = req
        .as_reader()
        .read_to_string(&mut body)
        .map_err(|e| (400, e.to_string()))
        .and_then(|_| route(backend, req.method(), req.url(), &body));
    let (status, text) = match result {
        Ok(text) => (200, text),
        Err((status, msg)) => (status, serde_json::json!({ "error": msg }).to_string()),
    };
    let _ = req.respond(
        Response::from_string(text)
            .with_status_code(status)
            .with_header(json_header()),
    );
}

fn route(
    backend: &dyn Backend,
    method: &Method,
    url: &str,
    body: &str,
) -> Result<String, (u16, String)> {
    let bad = |e: serde_json::Error| (400, e.to_string());
    let failed = |e: Error| (422, e.to_string());
    match (method, url) {
        (Method::Get, "/info") => Ok(serde_json::to_string(&backend.info()).expect("serializable")),
        (Method::Post, "/forward") => {
            let req: ForwardRequest = serde_json::from_str(body).map_err(bad)?;
            let out = backend
                .forward(&req.tokens, req.return_hidden == ReturnHidden::All)
                .map_err(failed)?;
            let resp = ForwardResponse {
                probs: Some(out.probs),
                logits: None,
                hidden_last: Some(out.hidden_last.into_inner()),
                hidden_all: out
                    .hidden_all
                    .map(|rows| rows.into_iter().map(|h| h.into_inner()).collect()),
            };
            Ok(serde_json::to_string(&resp).expect("serializable"))
        }
        (Method::Post, "/forward_batch") => {
            let req: ForwardBatchRequest = serde_json::from_str(body).map_err(bad)?;
            let hidden = backend
                .forward_candidates(&req.prefix, &req.candidates)
                .map_err(failed)?
                .into_iter()
                .map(|h| h.into_inner())
                .collect();
            Ok(serde_json::to_string(&ForwardBatchResponse { hidden }).expect("serializable"))
        }
        _ => Err((404, format!("no route for {method} {url}"))),
    }
}
