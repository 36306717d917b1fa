use std::collections::BTreeMap;

use crate::error::{FpuError, Result};
use crate::lattice::ModelParams;

use super::{Integrator, Leapfrog, SpectralSplit};

/// Builds a fresh integrator for a given chain.
pub type IntegratorFactory = fn(&ModelParams) -> Result<Box<dyn Integrator>>;

/// Name-keyed table of integrator constructors.
#[derive(Debug, Clone, Default)]
pub struct IntegratorRegistry {
    factories: BTreeMap<&'static str, IntegratorFactory>,
}

impl IntegratorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `leapfrog` and `spectral`.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(Leapfrog::NAME, |_| Ok(Box::new(Leapfrog::new())));
        registry.register(SpectralSplit::NAME, |params| {
            Ok(Box::new(SpectralSplit::new(params.n_sites())?))
        });
        registry
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, factory: IntegratorFactory) -> &mut Self {
        self.factories.insert(name, factory);
        self
    }

    pub fn create(&self, name: &str, params: &ModelParams) -> Result<Box<dyn Integrator>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| FpuError::UnknownIntegrator(name.to_string()))?;
        factory(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }
}
