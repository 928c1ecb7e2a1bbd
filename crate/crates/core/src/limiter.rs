//! Bounded in-flight limit shared by every remote client.
//!
//! The limiter holds `capacity` tokens. [`InFlightLimiter::acquire`] blocks
//! until a token is free and returns a [`Permit`]; dropping the permit
//! returns the token. Counts never exceed capacity.

use std::sync::{Arc, Condvar, Mutex};

#[derive(Debug)]
struct State {
    in_flight: usize,
    peak: usize,
}

#[derive(Debug)]
pub struct InFlightLimiter {
    capacity: usize,
    state: Mutex<State>,
    freed: Condvar,
}

impl InFlightLimiter {
    pub fn new(capacity: usize) -> Arc<Self> {
        Arc::new(InFlightLimiter {
            capacity: capacity.max(1),
            state: Mutex::new(State { in_flight: 0, peak: 0 }),
            freed: Condvar::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut st = self.state.lock().expect("limiter poisoned");
        while st.in_flight >= self.capacity {
            st = self.freed.wait(st).expect("limiter poisoned");
        }
        st.in_flight += 1;
        st.peak = st.peak.max(st.in_flight);
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().expect("limiter poisoned").in_flight
    }

    /// Highest simultaneous count observed so far.
    pub fn peak(&self) -> usize {
        self.state.lock().expect("limiter poisoned").peak
    }

    fn release(&self) {
        let mut st = self.state.lock().expect("limiter poisoned");
        st.in_flight -= 1;
        drop(st);
        self.freed.notify_one();
    }
}

#[must_use = "the token is returned when the permit is dropped"]
pub struct Permit<'a> {
    limiter: &'a InFlightLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        self.limiter.release();
    }
}
