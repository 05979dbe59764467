//! Planner runs as interactive sessions.
//!
//! A client creates a session from a scenario document, starts it and
//! subscribes to its log. When the planner gets stuck the session waits for
//! an `intervene` message. Messages are TOML documents, carried either as
//! length-prefixed frames over TCP or as web-socket text frames on `/ws`.

pub mod client;
pub mod protocol;
mod session;
mod transport;

pub use client::Client;
pub use protocol::{ClientMessage, LogEntry, ServerMessage, SessionState, WireError};
pub use session::{Connection, Hub, HubConfig};
pub use transport::{serve, serve_tcp, serve_ws, ws_router};
