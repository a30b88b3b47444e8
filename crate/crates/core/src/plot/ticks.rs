/// A tick step of `mantissa × 10^exponent`, mantissa in {1, 2, 5}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Step {
    mantissa: i64,
    exponent: i32,
}

impl Step {
    fn value(self) -> f64 {
        self.scale(1)
    }

    /// `index × step`, computed so that decimal steps come out as the
    /// nearest double to the decimal value (0.3, not 0.30000000000000004).
    fn scale(self, index: i64) -> f64 {
        let units = (index * self.mantissa) as f64;
        if self.exponent >= 0 {
            units * 10f64.powi(self.exponent)
        } else {
            units / 10f64.powi(-self.exponent)
        }
    }

    fn next(self) -> Step {
        match self.mantissa {
            1 => Step { mantissa: 2, ..self },
            2 => Step { mantissa: 5, ..self },
            _ => Step {
                mantissa: 1,
                exponent: self.exponent + 1,
            },
        }
    }

    /// Largest index at or below `lo` and smallest at or above `hi`.
    fn span(self, lo: f64, hi: f64) -> (i64, i64) {
        let s = self.value();
        let mut first = (lo / s).floor() as i64;
        while self.scale(first + 1) <= lo {
            first += 1;
        }
        while self.scale(first) > lo {
            first -= 1;
        }
        let mut last = (hi / s).ceil() as i64;
        while self.scale(last - 1) >= hi {
            last -= 1;
        }
        while self.scale(last) < hi {
            last += 1;
        }
        (first, last)
    }
}

/// Axis ticks at a 1/2/5 × 10^k step: the smallest such step whose ticks
/// (from `floor(lo/s)·s` up to the first multiple ≥ `hi`) number at most
/// `max_ticks`. Equal bounds give `[lo, lo + 1]`.
pub fn nice_ticks(lo: f64, hi: f64, max_ticks: usize) -> Vec<f64> {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if lo == hi {
        return vec![lo, lo + 1.0];
    }
    // a range straddling zero needs three ticks at any step
    let max_ticks = max_ticks.max(3);
    let raw = (hi - lo) / (max_ticks - 1) as f64;
    // start one decade below the lower bound on the step and walk up
    let mut step = Step {
        mantissa: 1,
        exponent: raw.log10().floor() as i32 - 1,
    };
    loop {
        let (first, last) = step.span(lo, hi);
        if last - first < max_ticks as i64 {
            return (first..=last).map(|i| step.scale(i)).collect();
        }
        step = step.next();
    }
}

/// Decimal places needed to print ticks spaced `step` apart.
pub fn tick_decimals(step: f64) -> usize {
    if step >= 1.0 || step <= 0.0 {
        0
    } else {
        (-step.log10() - 1e-9).ceil() as usize
    }
}
