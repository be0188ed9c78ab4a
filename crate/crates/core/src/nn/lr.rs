/// Plateau schedule on the outer-iteration validation loss.
///
/// Losses are averaged over consecutive windows of `window` observations.
/// When a window average fails to improve on the previous one by at least the
/// relative fraction `tolerance`, the rate is multiplied by `factor`. The rate
/// never increases.
#[derive(Debug, Clone)]
pub struct LrController {
    lr: f64,
    window: usize,
    tolerance: f64,
    factor: f64,
    sum: f64,
    count: usize,
    previous: Option<f64>,
}

impl LrController {
    pub fn new(lr: f64) -> Self {
        Self::with_schedule(lr, 10, 0.05, 0.5)
    }

    pub fn with_schedule(lr: f64, window: usize, tolerance: f64, factor: f64) -> Self {
        Self {
            lr,
            window: window.max(1),
            tolerance,
            factor,
            sum: 0.0,
            count: 0,
            previous: None,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Records one outer-iteration loss and returns the rate to use next.
    pub fn observe(&mut self, loss: f64) -> f64 {
        self.sum += loss;
        self.count += 1;
        if self.count == self.window {
            let current = self.sum / self.window as f64;
            if let Some(prev) = self.previous {
                if !(current <= prev * (1.0 - self.tolerance)) {
                    self.lr *= self.factor;
                }
            }
            self.previous = Some(current);
            self.sum = 0.0;
            self.count = 0;
        }
        self.lr
    }
}
