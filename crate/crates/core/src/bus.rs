//! In-process message fabric.
//!
//! Topics deliver [`Envelope`]s synchronously to every subscriber in
//! subscription order. Services route a [`ServiceRequest`] to exactly one
//! handler and hand back its [`ServiceResponse`]. Everything runs on the
//! simulation thread; the bus uses interior mutability so that handlers may
//! themselves call into the bus (a handler may call another service, but may
//! not re-enter the topic or service it is serving).
//!
//! Every operation can be recorded in an access log tagged with the name of
//! the [`Port`] that issued it. The log is what the interface-purity checks
//! inspect.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Monitor interface shared by every managing subsystem.
pub const DIAGNOSTICS_TOPIC: &str = "/diagnostics";
/// Mode transitions announced by the mode manager.
pub const MODE_TRANSITIONS_TOPIC: &str = "/mode_manager/transitions";
/// Adaptation goals from the mission coordinator to the manager.
pub const OBJECTIVE_SERVICE: &str = "/mros/objective";
/// Reasoner to system-modes-bridge hop.
pub const REQUEST_CONFIGURATION_SERVICE: &str = "/mros/request_configuration";

/// Change-mode service name for a lifecycle node, e.g.
/// `/f_maintain_motion/change_mode`.
pub fn change_mode_service(node: &str) -> String {
    format!("/{node}/change_mode")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DiagnosticLevel {
    Ok,
    Warn,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyValue {
    pub key: String,
    pub value: String,
}

/// Structural analog of a `diagnostic_msgs/DiagnosticStatus`.
///
/// Keys are unique: [`DiagnosticStatus::set`] replaces an existing entry in
/// place so insertion order is preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticStatus {
    pub level: DiagnosticLevel,
    pub name: String,
    pub message: String,
    values: Vec<KeyValue>,
}

impl DiagnosticStatus {
    pub fn new(level: DiagnosticLevel, name: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            level,
            name: name.into(),
            message: message.into(),
            values: Vec::new(),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        let key = key.into();
        let value = value.into();
        match self.values.iter_mut().find(|kv| kv.key == key) {
            Some(kv) => kv.value = value,
            None => self.values.push(KeyValue { key, value }),
        }
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|kv| kv.key == key)
            .map(|kv| kv.value.as_str())
    }

    pub fn values(&self) -> &[KeyValue] {
        &self.values
    }
}

/// Fixed two-decimal encoding used for every numeric diagnostic value.
pub fn format_value(x: f64) -> String {
    format!("{x:.2}")
}

pub fn parse_value(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeChange {
    pub node: String,
    pub mode: String,
}

/// Set or retire the objective for a function, identified by name
/// (e.g. `generate_search_path`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ObjectiveRequest {
    Set { function: String },
    Remove { function: String },
}

/// Topic payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Diagnostic(DiagnosticStatus),
    ModeChanged(ModeChange),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PayloadKind {
    Diagnostic,
    ModeChanged,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Diagnostic(_) => PayloadKind::Diagnostic,
            Payload::ModeChanged(_) => PayloadKind::ModeChanged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub topic: String,
    /// Simulated time in seconds.
    pub stamp: f64,
    pub payload: Payload,
}

impl Envelope {
    pub fn new(topic: impl Into<String>, stamp: f64, payload: Payload) -> Self {
        Self {
            topic: topic.into(),
            stamp,
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceRequest {
    /// Table-of-modes switch for one lifecycle node.
    ChangeMode { node: String, mode: String },
    /// Reasoner asks the system-modes bridge for a node/mode configuration.
    RequestConfiguration { node: String, mode: String },
    Objective(ObjectiveRequest),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceResponse {
    pub success: bool,
    pub detail: String,
}

impl ServiceResponse {
    pub fn ok(detail: impl Into<String>) -> Self {
        Self {
            success: true,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self {
            success: false,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BusError {
    #[error("service not found: {0}")]
    NotFound(String),
    #[error("service already registered: {0}")]
    DuplicateService(String),
    #[error("wiring error: topic {topic} carries {declared:?}, got {found:?}")]
    KindMismatch {
        topic: String,
        declared: PayloadKind,
        found: PayloadKind,
    },
    #[error("wiring error: envelope addressed to {envelope} published on {topic}")]
    TopicMismatch { topic: String, envelope: String },
    #[error("wiring error: empty endpoint name")]
    EmptyName,
    #[error("wiring error: re-entrant publish on {0}")]
    ReentrantPublish(String),
    #[error("wiring error: re-entrant call to service {0}")]
    ReentrantCall(String),
    #[error("stamp regression on {topic}: {stamp} after {last}")]
    StampRegression { topic: String, stamp: f64, last: f64 },
}

impl BusError {
    /// Wiring errors signal a build bug and abort the run.
    pub fn is_wiring(&self) -> bool {
        !matches!(self, BusError::NotFound(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubscriptionId(u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessOp {
    Subscribe,
    Publish,
    Serve,
    Call,
}

impl AccessOp {
    /// Subscribing and serving consume data from an endpoint.
    pub fn is_read(self) -> bool {
        matches!(self, AccessOp::Subscribe | AccessOp::Serve)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Access {
    pub client: String,
    pub endpoint: String,
    pub op: AccessOp,
    pub stamp: f64,
    pub request: Option<ServiceRequest>,
}

type TopicHandler = Rc<RefCell<dyn FnMut(&Envelope)>>;
type ServiceHandler = Rc<RefCell<dyn FnMut(&ServiceRequest) -> ServiceResponse>>;

struct Topic {
    kind: PayloadKind,
    subscribers: Vec<(SubscriptionId, TopicHandler)>,
}

const ANONYMOUS: &str = "-";

#[derive(Default)]
pub struct Bus {
    topics: RefCell<BTreeMap<String, Topic>>,
    services: RefCell<BTreeMap<String, ServiceHandler>>,
    last_stamp: RefCell<BTreeMap<String, f64>>,
    publishing: RefCell<BTreeSet<String>>,
    next_id: Cell<u64>,
    clock: Cell<f64>,
    log: RefCell<Option<Vec<Access>>>,
}

impl fmt::Debug for Bus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bus")
            .field("topics", &self.topic_names())
            .field("services", &self.service_names())
            .field("clock", &self.clock.get())
            .finish()
    }
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shared() -> Rc<Self> {
        Rc::new(Self::new())
    }

    /// Handle that tags every operation with `client` in the access log.
    pub fn port(self: &Rc<Self>, client: impl Into<String>) -> Port {
        Port {
            bus: Rc::clone(self),
            client: client.into(),
        }
    }

    pub fn set_time(&self, t: f64) {
        self.clock.set(t);
    }

    pub fn now(&self) -> f64 {
        self.clock.get()
    }

    pub fn record_access(&self, enabled: bool) {
        *self.log.borrow_mut() = if enabled { Some(Vec::new()) } else { None };
    }

    pub fn access_log(&self) -> Vec<Access> {
        self.log.borrow().clone().unwrap_or_default()
    }

    pub fn topic_count(&self) -> usize {
        self.topics.borrow().len()
    }

    pub fn service_count(&self) -> usize {
        self.services.borrow().len()
    }

    pub fn topic_names(&self) -> Vec<String> {
        self.topics.borrow().keys().cloned().collect()
    }

    pub fn service_names(&self) -> Vec<String> {
        self.services.borrow().keys().cloned().collect()
    }

    pub fn has_service(&self, name: &str) -> bool {
        self.services.borrow().contains_key(name)
    }

    pub fn subscribe<F>(&self, topic: &str, kind: PayloadKind, handler: F) -> Result<SubscriptionId, BusError>
    where
        F: FnMut(&Envelope) + 'static,
    {
        self.subscribe_as(ANONYMOUS, topic, kind, handler)
    }

    pub fn publish(&self, topic: &str, env: Envelope) -> Result<(), BusError> {
        self.publish_as(ANONYMOUS, topic, env)
    }

    pub fn register_service<F>(&self, name: &str, handler: F) -> Result<(), BusError>
    where
        F: FnMut(&ServiceRequest) -> ServiceResponse + 'static,
    {
        self.register_service_as(ANONYMOUS, name, handler)
    }

    pub fn call_service(&self, name: &str, req: ServiceRequest) -> Result<ServiceResponse, BusError> {
        self.call_service_as(ANONYMOUS, name, req)
    }

    fn record(&self, client: &str, endpoint: &str, op: AccessOp, request: Option<&ServiceRequest>) {
        if let Some(log) = self.log.borrow_mut().as_mut() {
            log.push(Access {
                client: client.to_string(),
                endpoint: endpoint.to_string(),
                op,
                stamp: self.clock.get(),
                request: request.cloned(),
            });
        }
    }

    fn subscribe_as<F>(
        &self,
        client: &str,
        topic: &str,
        kind: PayloadKind,
        handler: F,
    ) -> Result<SubscriptionId, BusError>
    where
        F: FnMut(&Envelope) + 'static,
    {
        if topic.is_empty() {
            return Err(BusError::EmptyName);
        }
        let mut topics = self.topics.borrow_mut();
        let entry = topics.entry(topic.to_string()).or_insert_with(|| Topic {
            kind,
            subscribers: Vec::new(),
        });
        if entry.kind != kind {
            return Err(BusError::KindMismatch {
                topic: topic.to_string(),
                declared: entry.kind,
                found: kind,
            });
        }
        let id = SubscriptionId(self.next_id.get());
        self.next_id.set(id.0 + 1);
        entry.subscribers.push((id, Rc::new(RefCell::new(handler))));
        drop(topics);
        self.record(client, topic, AccessOp::Subscribe, None);
        Ok(id)
    }

    fn publish_as(&self, client: &str, topic: &str, env: Envelope) -> Result<(), BusError> {
        if topic.is_empty() {
            return Err(BusError::EmptyName);
        }
        if env.topic != topic {
            return Err(BusError::TopicMismatch {
                topic: topic.to_string(),
                envelope: env.topic.clone(),
            });
        }
        {
            let mut stamps = self.last_stamp.borrow_mut();
            if let Some(&last) = stamps.get(topic) {
                if env.stamp < last {
                    return Err(BusError::StampRegression {
                        topic: topic.to_string(),
                        stamp: env.stamp,
                        last,
                    });
                }
            }
            stamps.insert(topic.to_string(), env.stamp);
        }
        let handlers: Vec<TopicHandler> = {
            let topics = self.topics.borrow();
            match topics.get(topic) {
                None => Vec::new(),
                Some(t) if t.kind != env.payload.kind() => {
                    return Err(BusError::KindMismatch {
                        topic: topic.to_string(),
                        declared: t.kind,
                        found: env.payload.kind(),
                    })
                }
                Some(t) => t.subscribers.iter().map(|(_, h)| Rc::clone(h)).collect(),
            }
        };
        self.record(client, topic, AccessOp::Publish, None);
        if !self.publishing.borrow_mut().insert(topic.to_string()) {
            return Err(BusError::ReentrantPublish(topic.to_string()));
        }
        for handler in handlers {
            (handler.borrow_mut())(&env);
        }
        self.publishing.borrow_mut().remove(topic);
        Ok(())
    }

    fn register_service_as<F>(&self, client: &str, name: &str, handler: F) -> Result<(), BusError>
    where
        F: FnMut(&ServiceRequest) -> ServiceResponse + 'static,
    {
        if name.is_empty() {
            return Err(BusError::EmptyName);
        }
        let mut services = self.services.borrow_mut();
        if services.contains_key(name) {
            return Err(BusError::DuplicateService(name.to_string()));
        }
        services.insert(name.to_string(), Rc::new(RefCell::new(handler)));
        drop(services);
        self.record(client, name, AccessOp::Serve, None);
        Ok(())
    }

    fn call_service_as(&self, client: &str, name: &str, req: ServiceRequest) -> Result<ServiceResponse, BusError> {
        let handler = self
            .services
            .borrow()
            .get(name)
            .cloned()
            .ok_or_else(|| BusError::NotFound(name.to_string()))?;
        self.record(client, name, AccessOp::Call, Some(&req));
        let mut handler = handler
            .try_borrow_mut()
            .map_err(|_| BusError::ReentrantCall(name.to_string()))?;
        Ok(handler(&req))
    }
}

/// Client handle onto a shared [`Bus`]; stamps envelopes with the bus clock.
#[derive(Clone)]
pub struct Port {
    bus: Rc<Bus>,
    client: String,
}

impl fmt::Debug for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Port").field("client", &self.client).finish()
    }
}

impl Port {
    pub fn client(&self) -> &str {
        &self.client
    }

    pub fn bus(&self) -> &Rc<Bus> {
        &self.bus
    }

    pub fn now(&self) -> f64 {
        self.bus.now()
    }

    pub fn publish(&self, topic: &str, payload: Payload) -> Result<(), BusError> {
        let env = Envelope::new(topic, self.bus.now(), payload);
        self.bus.publish_as(&self.client, topic, env)
    }

    pub fn subscribe<F>(&self, topic: &str, kind: PayloadKind, handler: F) -> Result<SubscriptionId, BusError>
    where
        F: FnMut(&Envelope) + 'static,
    {
        self.bus.subscribe_as(&self.client, topic, kind, handler)
    }

    pub fn register_service<F>(&self, name: &str, handler: F) -> Result<(), BusError>
    where
        F: FnMut(&ServiceRequest) -> ServiceResponse + 'static,
    {
        self.bus.register_service_as(&self.client, name, handler)
    }

    pub fn call_service(&self, name: &str, req: ServiceRequest) -> Result<ServiceResponse, BusError> {
        self.bus.call_service_as(&self.client, name, req)
    }
}
