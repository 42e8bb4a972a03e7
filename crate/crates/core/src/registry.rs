//! Named strategies for subspace enumeration and fixed-point search.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermitian_duality::{EnumerateFilter, FixedPointStrategy, LagrangianBfs};
use crate::lattice_window::{BruteForce, ClosureBfs, SubspaceEnumerator};

pub struct Registry {
    enumerators: Vec<Arc<dyn SubspaceEnumerator>>,
    fixed_points: Vec<Arc<dyn FixedPointStrategy>>,
}

impl Registry {
    /// The built-in strategies, sharing one worker-count setting.
    pub fn with_defaults(threads: Option<usize>) -> Registry {
        Registry {
            enumerators: vec![
                Arc::new(ClosureBfs { threads }),
                Arc::new(BruteForce { threads, ..BruteForce::default() }),
            ],
            fixed_points: vec![Arc::new(LagrangianBfs { threads }), Arc::new(EnumerateFilter)],
        }
    }

    pub fn register_enumerator(&mut self, e: Arc<dyn SubspaceEnumerator>) {
        self.enumerators.retain(|x| x.name() != e.name());
        self.enumerators.push(e);
    }

    pub fn register_fixed_points(&mut self, s: Arc<dyn FixedPointStrategy>) {
        self.fixed_points.retain(|x| x.name() != s.name());
        self.fixed_points.push(s);
    }

    pub fn enumerator(&self, name: &str) -> Result<Arc<dyn SubspaceEnumerator>> {
        self.enumerators
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn fixed_points(&self, name: &str) -> Result<Arc<dyn FixedPointStrategy>> {
        self.fixed_points
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn enumerator_names(&self) -> Vec<&'static str> {
        self.enumerators.iter().map(|e| e.name()).collect()
    }

    pub fn fixed_point_names(&self) -> Vec<&'static str> {
        self.fixed_points.iter().map(|e| e.name()).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::with_defaults(None)
    }
}
