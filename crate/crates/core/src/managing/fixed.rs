//! The `none` manager: applies a fixed mode assignment once and never
//! adapts.

use std::collections::BTreeMap;
use std::rc::Rc;

use super::{serve_objectives, Manager, ManagerKind};
use crate::bus::{change_mode_service, Bus, BusError, Port, ServiceRequest};

pub const FIXED_CLIENT: &str = "fixed_manager";

#[derive(Debug)]
pub struct FixedManager {
    port: Port,
    modes: BTreeMap<String, String>,
    applied: bool,
}

impl FixedManager {
    pub fn attach(bus: &Rc<Bus>, modes: BTreeMap<String, String>) -> Result<Self, BusError> {
        let port = bus.port(FIXED_CLIENT);
        serve_objectives(&port, |_| Ok(()))?;
        Ok(Self {
            port,
            modes,
            applied: false,
        })
    }
}

impl Manager for FixedManager {
    fn kind(&self) -> ManagerKind {
        ManagerKind::None
    }

    fn tick(&mut self, _step: u64) -> Result<(), BusError> {
        if self.applied {
            return Ok(());
        }
        self.applied = true;
        for (node, mode) in &self.modes {
            let resp = self.port.call_service(
                &change_mode_service(node),
                ServiceRequest::ChangeMode {
                    node: node.clone(),
                    mode: mode.clone(),
                },
            )?;
            if !resp.success {
                log::warn!("fixed mode {node}={mode} refused: {}", resp.detail);
            }
        }
        Ok(())
    }

    fn clients(&self) -> Vec<&'static str> {
        vec![FIXED_CLIENT]
    }
}
