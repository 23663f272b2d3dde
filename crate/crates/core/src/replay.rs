//! Multi-product reading sessions reconstructed from their event log.
//!
//! The ordered event log is the only durable state: replaying it against the
//! same catalog and engine configuration reproduces every product's
//! [`SessionState`], metrics and served suggestions exactly.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::session::{EngineConfig, InteractionEvent, SessionState, VisitOutcome, VisitRequest};
use crate::space::Catalog;

/// Serializable form of a session: header plus the full event log.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionSnapshot {
    pub session_id: String,
    pub created_at: u64,
    pub events: Vec<InteractionEvent>,
}

/// Replay failure: the offending event position and why.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("event {index}: {error}")]
pub struct ReplayError {
    pub index: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadingSession {
    session_id: String,
    created_at: u64,
    products: BTreeMap<String, SessionState>,
    log: Vec<InteractionEvent>,
}

impl ReadingSession {
    pub fn new(session_id: impl Into<String>, created_at: u64) -> Self {
        ReadingSession {
            session_id: session_id.into(),
            created_at,
            products: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn created_at(&self) -> u64 {
        self.created_at
    }

    pub fn log(&self) -> &[InteractionEvent] {
        &self.log
    }

    pub fn last_timestamp(&self) -> u64 {
        self.log.last().map_or(self.created_at, |e| e.timestamp)
    }

    /// State for a product, if the reader touched it.
    pub fn product(&self, product_id: &str) -> Option<&SessionState> {
        self.products.get(product_id)
    }

    /// State for a product, created on first access.
    pub fn product_state(
        &mut self,
        catalog: &Catalog,
        config: &EngineConfig,
        product_id: &str,
    ) -> Result<&mut SessionState> {
        let space = catalog.get(product_id)?;
        let created_at = self.created_at;
        let session_id = &self.session_id;
        Ok(self
            .products
            .entry(product_id.to_string())
            .or_insert_with(|| SessionState::new(session_id, space, config, created_at)))
    }

    fn check_time(&self, timestamp: u64) -> Result<()> {
        let last = self.last_timestamp();
        if timestamp < last {
            return Err(Error::NonMonotonicTimestamp { last, got: timestamp });
        }
        Ok(())
    }

    pub fn visit(
        &mut self,
        catalog: &Catalog,
        config: &EngineConfig,
        product_id: &str,
        review_id: &str,
        request: VisitRequest,
        timestamp: u64,
    ) -> Result<VisitOutcome> {
        self.check_time(timestamp)?;
        let space = catalog.get(product_id)?;
        let state = self.product_state(catalog, config, product_id)?;
        let outcome = state.visit(space, review_id, request, timestamp, config)?;
        let event = state.events().last().expect("visit logs an event").clone();
        self.log.push(event);
        Ok(outcome)
    }

    /// Logs a non-visit interaction. Product-scoped events also land in that
    /// product's state log.
    pub fn record(&mut self, catalog: &Catalog, config: &EngineConfig, event: InteractionEvent) -> Result<()> {
        if event.is_visit() {
            return Err(Error::InvalidInput(
                "visit events must go through the visit path".to_string(),
            ));
        }
        self.check_time(event.timestamp)?;
        if let Some(pid) = event.product_id.clone() {
            self.product_state(catalog, config, &pid)?.record_event(event.clone())?;
        }
        self.log.push(event);
        Ok(())
    }

    /// Applies one logged event, visits included.
    pub fn apply(&mut self, catalog: &Catalog, config: &EngineConfig, event: &InteractionEvent) -> Result<()> {
        match event.visit_method() {
            Some(method) => {
                let (Some(pid), Some(rid)) = (event.product_id.as_deref(), event.target.as_deref()) else {
                    return Err(Error::InvalidInput(
                        "visit event without product_id or target".to_string(),
                    ));
                };
                let request = VisitRequest {
                    method,
                    dwell_ms: event.dwell_ms,
                    source: event.component,
                };
                self.visit(catalog, config, pid, rid, request, event.timestamp)
                    .map(|_| ())
            }
            None => self.record(catalog, config, event.clone()),
        }
    }

    pub fn replay(snapshot: &SessionSnapshot, catalog: &Catalog, config: &EngineConfig) -> Result<Self, ReplayError> {
        let mut session = ReadingSession::new(snapshot.session_id.clone(), snapshot.created_at);
        for (index, event) in snapshot.events.iter().enumerate() {
            session
                .apply(catalog, config, event)
                .map_err(|error| ReplayError { index, error })?;
        }
        Ok(session)
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            session_id: self.session_id.clone(),
            created_at: self.created_at,
            events: self.log.clone(),
        }
    }
}
