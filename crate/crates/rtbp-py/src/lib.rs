//! Python bindings (populated together with the CLI).
