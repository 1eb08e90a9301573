//! Named solver backends and the registry that routes solves to them.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::ipm::{self, SolveOutcome, SolveSettings, SolverError};
use crate::program::ConicProgram;
use crate::scalar::Scalar;

/// Anything that can solve a [`ConicProgram`] under the bundled solver's contract.
pub trait ConicBackend<T: Scalar>: Send + Sync {
    fn solve(
        &self,
        program: &ConicProgram<T>,
        settings: &SolveSettings<T>,
    ) -> Result<SolveOutcome<T>, SolverError>;
}

/// The in-crate interior-point method.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bundled;

impl<T: Scalar> ConicBackend<T> for Bundled {
    fn solve(
        &self,
        program: &ConicProgram<T>,
        settings: &SolveSettings<T>,
    ) -> Result<SolveOutcome<T>, SolverError> {
        ipm::solve(program, settings)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("backend `{0}` is already registered")]
    Duplicate(String),
    #[error("unknown solver backend `{name}`; registered: {}", .available.join(", "))]
    Unknown { name: String, available: Vec<String> },
}

struct Entry<T> {
    backend: Arc<dyn ConicBackend<T>>,
    calls: AtomicUsize,
}

/// Backends by name, with a per-backend solve counter.
///
/// Registration needs `&mut self`; solving only needs `&self`, so a fully
/// registered registry can be shared across threads.
pub struct BackendRegistry<T> {
    entries: BTreeMap<String, Entry<T>>,
}

impl<T: Scalar> Default for BackendRegistry<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> BackendRegistry<T> {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding `bundled` and, when compiled in, `clarabel`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("bundled", Arc::new(Bundled)).expect("fresh registry");
        #[cfg(feature = "clarabel")]
        r.register("clarabel", Arc::new(crate::clarabel_backend::Clarabel))
            .expect("fresh registry");
        r
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        backend: Arc<dyn ConicBackend<T>>,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(RegistryError::Duplicate(name));
        }
        self.entries.insert(
            name,
            Entry {
                backend,
                calls: AtomicUsize::new(0),
            },
        );
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    fn entry(&self, name: &str) -> Result<&Entry<T>, RegistryError> {
        self.entries.get(name).ok_or_else(|| RegistryError::Unknown {
            name: name.to_string(),
            available: self.names(),
        })
    }

    /// Checks that `name` is registered.
    pub fn resolve(&self, name: &str) -> Result<(), RegistryError> {
        self.entry(name).map(|_| ())
    }

    /// Solves through backend `name`, counting the call.
    pub fn solve(
        &self,
        name: &str,
        program: &ConicProgram<T>,
        settings: &SolveSettings<T>,
    ) -> Result<Result<SolveOutcome<T>, SolverError>, RegistryError> {
        let entry = self.entry(name)?;
        entry.calls.fetch_add(1, Ordering::SeqCst);
        Ok(entry.backend.solve(program, settings))
    }

    pub fn call_count(&self, name: &str) -> usize {
        self.entries
            .get(name)
            .map_or(0, |e| e.calls.load(Ordering::SeqCst))
    }

    pub fn total_calls(&self) -> usize {
        self.entries
            .values()
            .map(|e| e.calls.load(Ordering::SeqCst))
            .sum()
    }

    pub fn reset_counts(&self) {
        for e in self.entries.values() {
            e.calls.store(0, Ordering::SeqCst);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_registration_fails() {
        let mut r = BackendRegistry::<f64>::with_defaults();
        assert_eq!(
            r.register("bundled", Arc::new(Bundled)),
            Err(RegistryError::Duplicate("bundled".into()))
        );
    }

    #[test]
    fn unknown_backend_lists_registered_names() {
        let r = BackendRegistry::<f64>::with_defaults();
        let err = r.resolve("gurobi").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gurobi") && msg.contains("bundled"), "{msg}");
    }
}
