use std::sync::{Arc, Mutex, PoisonError, RwLock};

use serde_json::Value;

use super::{handle_message, PluginRegistry};
use crate::session::SessionState;

/// One live session. Events are applied strictly one at a time; read-only
/// requests run against the last committed state without waiting.
#[derive(Debug)]
pub struct SessionHost {
    registry: Arc<PluginRegistry>,
    writer: Mutex<()>,
    current: RwLock<Arc<SessionState>>,
}

impl SessionHost {
    pub fn new(registry: Arc<PluginRegistry>, state: SessionState) -> Self {
        Self {
            registry,
            writer: Mutex::new(()),
            current: RwLock::new(Arc::new(state)),
        }
    }

    pub fn registry(&self) -> &PluginRegistry {
        &self.registry
    }

    pub fn snapshot(&self) -> Arc<SessionState> {
        self.current.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    pub fn handle(&self, raw: &[u8]) -> Value {
        let is_event = serde_json::from_slice::<Value>(raw)
            .ok()
            .is_some_and(|v| v.get("kind").and_then(Value::as_str) == Some("event"));
        if !is_event {
            return handle_message(&self.snapshot(), &self.registry, raw).1;
        }
        let _guard = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let state = self.snapshot();
        let (next, response) = handle_message(&state, &self.registry, raw);
        if next != *state {
            *self.current.write().unwrap_or_else(PoisonError::into_inner) = Arc::new(next);
        }
        response
    }
}
