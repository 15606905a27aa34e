//! Placeholder; detectors land next.
