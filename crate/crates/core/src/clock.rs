//! Monotonic time sources. Timing code takes a `&dyn Clock` so tests can
//! drive it with a fake.

use std::cell::Cell;
use std::time::Instant;

/// Monotonic time source reporting seconds since an arbitrary origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Wall clock backed by [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Manually advanced clock.
#[derive(Debug, Default)]
pub struct FakeClock {
    t: Cell<f64>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Moves time forward; negative steps are ignored.
    pub fn advance(&self, dt: f64) {
        if dt > 0.0 {
            self.t.set(self.t.get() + dt);
        }
    }

    pub fn set(&self, t: f64) {
        if t > self.t.get() {
            self.t.set(t);
        }
    }
}

impl Clock for FakeClock {
    fn now(&self) -> f64 {
        self.t.get()
    }
}

/// Clock that advances by a fixed step on every read. Readings are
/// `step, 2*step, ...`, which makes timing outputs a pure function of how
/// often the code under test consults the clock.
#[derive(Debug)]
pub struct SteppingClock {
    step: f64,
    reads: Cell<u64>,
}

impl SteppingClock {
    pub fn new(step: f64) -> Self {
        SteppingClock {
            step: step.max(0.0),
            reads: Cell::new(0),
        }
    }

    pub fn reads(&self) -> u64 {
        self.reads.get()
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> f64 {
        let n = self.reads.get() + 1;
        self.reads.set(n);
        self.step * n as f64
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> f64 {
        (**self).now()
    }
}
