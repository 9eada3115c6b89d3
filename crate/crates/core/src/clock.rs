//! Time source abstraction.
//!
//! Persisted artifacts (stage outputs, audit log, run reports) must be
//! byte-identical across reruns with the same inputs, so anything that
//! records a timestamp or duration reads it through a [`Clock`]. A fixed
//! clock pins all timestamps and reports zero durations.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    /// Every reading returns this unix timestamp; durations are zero.
    Fixed(u64),
}

impl Clock {
    pub fn now_unix(&self) -> u64 {
        match self {
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            Clock::Fixed(ts) => *ts,
        }
    }

    /// Run `f`, returning its result together with the elapsed wall time in
    /// milliseconds (zero under a fixed clock).
    pub fn measure<T>(&self, f: impl FnOnce() -> T) -> (T, u64) {
        match self {
            Clock::System => {
                let start = Instant::now();
                let out = f();
                (out, start.elapsed().as_millis() as u64)
            }
            Clock::Fixed(_) => (f(), 0),
        }
    }
}

impl Default for Clock {
    fn default() -> Self {
        Clock::System
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_clock_is_constant() {
        let clock = Clock::Fixed(1700000000);
        assert_eq!(clock.now_unix(), 1700000000);
        let (value, ms) = clock.measure(|| 42);
        assert_eq!(value, 42);
        assert_eq!(ms, 0);
    }

    #[test]
    fn system_clock_advances() {
        let clock = Clock::System;
        assert!(clock.now_unix() > 1_600_000_000);
    }
}
