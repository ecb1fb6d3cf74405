//! Operation counters shared by all engines.

use std::sync::atomic::{AtomicU64, Ordering};

/// Thread-safe counters; engines add to them in bulk.
#[derive(Debug, Default)]
pub struct Metrics {
    scanned: AtomicU64,
    probes: AtomicU64,
    emitted: AtomicU64,
    comparisons: AtomicU64,
    inspected: AtomicU64,
    peak_intermediate: AtomicU64,
    bound_violations: AtomicU64,
}

/// A point-in-time copy of [`Metrics`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Tuples read while building indexes, filtering or projecting.
    pub scanned: u64,
    /// Hash lookups.
    pub probes: u64,
    /// Result tuples produced by joins, before any deduplication.
    pub emitted: u64,
    /// Ratio comparisons in the bag engine (sorting and scans).
    pub comparisons: u64,
    /// Tuples inspected by the emptiness decision procedure.
    pub inspected: u64,
    /// Largest intermediate relation built by the difference engines.
    pub peak_intermediate: u64,
    /// Intermediates that exceeded the input-plus-output bound.
    pub bound_violations: u64,
}

impl Counters {
    /// Sum of the work counters.
    pub fn total(&self) -> u64 {
        self.scanned + self.probes + self.emitted + self.comparisons + self.inspected
    }

    pub fn fields(&self) -> [(&'static str, u64); 7] {
        [
            ("scanned", self.scanned),
            ("probes", self.probes),
            ("emitted", self.emitted),
            ("comparisons", self.comparisons),
            ("inspected", self.inspected),
            ("peak_intermediate", self.peak_intermediate),
            ("bound_violations", self.bound_violations),
        ]
    }
}

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scanned(&self, n: usize) {
        self.scanned.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn probes(&self, n: usize) {
        self.probes.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn emitted(&self, n: usize) {
        self.emitted.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn comparisons(&self, n: usize) {
        self.comparisons.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn inspected(&self, n: usize) {
        self.inspected.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn intermediate(&self, size: usize) {
        self.peak_intermediate
            .fetch_max(size as u64, Ordering::Relaxed);
    }

    pub fn bound_violation(&self) {
        self.bound_violations.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> Counters {
        Counters {
            scanned: self.scanned.load(Ordering::Relaxed),
            probes: self.probes.load(Ordering::Relaxed),
            emitted: self.emitted.load(Ordering::Relaxed),
            comparisons: self.comparisons.load(Ordering::Relaxed),
            inspected: self.inspected.load(Ordering::Relaxed),
            peak_intermediate: self.peak_intermediate.load(Ordering::Relaxed),
            bound_violations: self.bound_violations.load(Ordering::Relaxed),
        }
    }
}
