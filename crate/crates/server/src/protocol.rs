//! Wire messages. Each message is one TOML document with a `type` key.

use chainplan_core::{Intervention, Outcome, ParseError, PlannerEvent};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// `scenario` holds a complete scenario document.
    CreateSession {
        scenario: String,
    },
    Start {
        id: String,
    },
    Intervene {
        id: String,
        intervention: Intervention,
    },
    /// Log entries from sequence number `from` onwards, then live entries.
    Subscribe {
        id: String,
        #[serde(default)]
        from: u64,
    },
    Replay {
        id: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    SessionCreated {
        id: String,
    },
    /// Consecutive log entries of one session.
    Events {
        id: String,
        entries: Vec<LogEntry>,
    },
    Error(WireError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    Event { seq: u64, event: PlannerEvent },
    StateChanged { seq: u64, state: SessionState },
}

impl LogEntry {
    pub fn seq(&self) -> u64 {
        match self {
            LogEntry::Event { seq, .. } | LogEntry::StateChanged { seq, .. } => *seq,
        }
    }

    pub fn event(&self) -> Option<&PlannerEvent> {
        match self {
            LogEntry::Event { event, .. } => Some(event),
            LogEntry::StateChanged { .. } => None,
        }
    }

    pub fn state(&self) -> Option<&SessionState> {
        match self {
            LogEntry::StateChanged { state, .. } => Some(state),
            LogEntry::Event { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Running,
    AwaitingIntervention,
    Finished { outcome: Outcome },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireError {
    pub code: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
}

pub mod codes {
    pub const BAD_MESSAGE: &str = "bad-message";
    pub const PARSE: &str = "parse";
    pub const UNKNOWN_SESSION: &str = "unknown-session";
    pub const NOT_IDLE: &str = "not-idle";
    pub const NOT_AWAITING: &str = "not-awaiting";
    pub const REJECTED: &str = "rejected";
}

impl WireError {
    pub fn new(code: &str, text: impl Into<String>) -> Self {
        WireError {
            code: code.to_string(),
            text: text.into(),
            id: None,
            key: None,
            line: None,
        }
    }

    pub fn for_session(mut self, id: &str) -> Self {
        self.id = Some(id.to_string());
        self
    }

    pub fn from_parse(e: &ParseError) -> Self {
        WireError {
            code: codes::PARSE.to_string(),
            text: e.to_string(),
            id: None,
            key: e.key().map(str::to_string),
            line: e.line().map(|l| l as u64),
        }
    }
}

impl From<WireError> for ServerMessage {
    fn from(e: WireError) -> Self {
        ServerMessage::Error(e)
    }
}

pub fn encode<T: Serialize>(msg: &T) -> String {
    toml::to_string(msg).expect("wire messages always serialize")
}

pub fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, toml::de::Error> {
    toml::from_str(text)
}
