//! Live teleoperation sessions over WebSocket.
//!
//! `GET /scenarios` lists the catalog; `/session` upgrades to a WebSocket
//! speaking the JSON protocol in `protocol.md`. Each session runs the same
//! simulation loop as the batch harness, with the scripted operator
//! replaced by the client's inputs.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientBody, ClientMessage, ServerBody, ServerMessage, PROTOCOL_VERSION};
pub use server::{router, serve, serve_blocking, serve_on, AppState, ServerConfig, DEFAULT_PORT};
pub use session::SessionCore;
