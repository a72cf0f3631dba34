use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;
use indexmap::IndexMap;
use thiserror::Error;

use pvsim_core::{
    bundled_names, bundled_panel, estimate_parameters, EstimatedParams, PanelDatasheet, SimError,
    StcContext,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PanelEntry {
    pub id: String,
    pub datasheet: PanelDatasheet,
    pub params: EstimatedParams,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error(transparent)]
    Estimation(#[from] SimError),
}

type Snapshot = IndexMap<String, Arc<PanelEntry>>;

/// Registered panels, keyed by id in registration order.
///
/// Readers load an immutable snapshot and never wait. Writers serialize on
/// `next_seq`, estimate outside the critical section and publish a new
/// snapshot only on success.
pub struct Registry {
    panels: ArcSwap<Snapshot>,
    next_seq: Mutex<u64>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            panels: ArcSwap::from_pointee(IndexMap::new()),
            next_seq: Mutex::new(1),
        }
    }

    pub fn with_bundled(ctx: &StcContext) -> Result<Self, RegistryError> {
        let mut panels = IndexMap::new();
        for name in bundled_names() {
            let datasheet = bundled_panel(name).expect("bundled name resolves");
            let params = estimate_parameters(&datasheet, ctx)?;
            let entry = PanelEntry {
                id: name.to_string(),
                datasheet,
                params,
            };
            panels.insert(entry.id.clone(), Arc::new(entry));
        }
        Ok(Registry {
            panels: ArcSwap::from_pointee(panels),
            next_seq: Mutex::new(1),
        })
    }

    pub fn get(&self, id: &str) -> Option<Arc<PanelEntry>> {
        self.panels.load().get(id).cloned()
    }

    pub fn list(&self) -> Vec<Arc<PanelEntry>> {
        self.panels.load().values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.panels.load().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Estimates `datasheet` and registers it under a fresh `panel-<k>` id.
    /// On failure the registry is left untouched.
    pub fn register(
        &self,
        datasheet: PanelDatasheet,
        ctx: &StcContext,
    ) -> Result<Arc<PanelEntry>, RegistryError> {
        let params = estimate_parameters(&datasheet, ctx)?;
        let mut seq = self.next_seq.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.panels.load_full();
        let mut id = format!("panel-{}", *seq);
        while current.contains_key(&id) {
            *seq += 1;
            id = format!("panel-{}", *seq);
        }
        *seq += 1;
        let entry = Arc::new(PanelEntry {
            id: id.clone(),
            datasheet,
            params,
        });
        let mut next: Snapshot = (*current).clone();
        next.insert(id, entry.clone());
        self.panels.store(Arc::new(next));
        Ok(entry)
    }
}
