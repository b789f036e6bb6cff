//! Serve the JSON game API on localhost.
//!
//! Usage: `play_server [port]`

use std::net::SocketAddr;

use spinorbit_pd::service::{serve, ServiceConfig};

#[tokio::main]
async fn main() -> spinorbit_pd::Result<()> {
    let port = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8080);
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    println!("listening on http://{addr}  (try GET /api/strategies)");
    serve(ServiceConfig::default(), addr).await
}
