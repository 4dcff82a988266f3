/// Monotonic time source used for wall-time accounting and solver limits.
pub trait Clock {
    /// Seconds elapsed since an arbitrary fixed origin.
    fn now_secs(&self) -> f64;
}

/// A clock that never advances. Makes traces and reports bit-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now_secs(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_secs(&self) -> f64 {
        (**self).now_secs()
    }
}
