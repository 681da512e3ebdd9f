//! Name-keyed registry of trait-object strategies.

use std::fmt;

/// Ordered set of named strategies. Lookups are linear; registries hold a
/// handful of entries.
pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a strategy under `name`.
    ///
    /// Panics on a duplicate name; registries are assembled once at startup
    /// and a collision is a programming error.
    pub fn register(&mut self, name: &'static str, strategy: Box<T>) -> &mut Self {
        assert!(
            self.get(name).is_none(),
            "strategy '{name}' registered twice"
        );
        self.entries.push((name, strategy));
        self
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|(n, _)| *n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
