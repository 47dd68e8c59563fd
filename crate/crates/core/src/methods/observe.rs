use super::trace::TraceRow;

/// Wall-clock source injected by callers; the core crate has no clock.
pub trait Clock {
    /// Nanoseconds since an arbitrary fixed origin.
    fn now_ns(&self) -> u64;
}

/// Clock that always reads zero.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ns(&self) -> u64 {
        0
    }
}

/// Iterate data handed to observers together with each trace row.
#[derive(Debug, Clone, Copy)]
pub struct IterateView<'a> {
    pub row: &'a TraceRow,
    /// `x^k`
    pub x: &'a [f64],
    /// Extrapolated point `y^k` the fast step was taken from.
    pub y: Option<&'a [f64]>,
    /// `d(y^k)`
    pub d_y: Option<f64>,
    /// `∇d(y^k)`
    pub grad_y: Option<&'a [f64]>,
    /// `w^k = x^{k−1} + θ_k (x^k − x^{k−1})`
    pub w: Option<&'a [f64]>,
    /// `θ_k` for fast phases, zero otherwise.
    pub theta: f64,
    /// Dual Lipschitz constant in use.
    pub l_d: f64,
}

/// Receives every recorded iterate.
pub trait Observer {
    fn observe(&mut self, view: &IterateView<'_>);
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _view: &IterateView<'_>) {}
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, view: &IterateView<'_>) {
        self.0.observe(view);
        self.1.observe(view);
    }
}

impl<T: Observer + ?Sized> Observer for &mut T {
    fn observe(&mut self, view: &IterateView<'_>) {
        (**self).observe(view);
    }
}
