//! Dormand–Prince 5(4) stepper for two-component systems.

pub type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One trial step. Returns the 5th-order solution, the error estimate and
/// the derivative at the new point (FSAL).
fn trial<F: Fn(f64, &State) -> State>(f: &F, t: f64, y: &State, k1: &State, h: f64) -> (State, State, State) {
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y1 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y1);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y1, err, k7)
}

/// Adaptive integrator that can be advanced to prescribed output points.
pub struct Stepper<F: Fn(f64, &State) -> State> {
    f: F,
    pub t: f64,
    pub y: State,
    k: State,
    h: f64,
    tol: Tolerance,
    pub steps: usize,
}

impl<F: Fn(f64, &State) -> State> Stepper<F> {
    pub fn new(f: F, t0: f64, y0: State, h0: f64, tol: Tolerance) -> Self {
        let k = f(t0, &y0);
        Stepper { f, t: t0, y: y0, k, h: h0, tol, steps: 0 }
    }

    fn err_norm(&self, y1: &State, err: &State) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            let sc = self.tol.atol + self.tol.rtol * self.y[i].abs().max(y1[i].abs());
            m = m.max((err[i] / sc).abs());
        }
        m
    }

    /// Advances exactly to `t_end`, never stepping past it.
    /// `max_h` bounds the step size.
    pub fn advance_to(&mut self, t_end: f64, max_h: f64) -> bool {
        let mut guard = 0usize;
        while self.t < t_end {
            guard += 1;
            if guard > 100_000 {
                return false;
            }
            let mut h = self.h.min(max_h).min(t_end - self.t);
            let last = t_end - self.t <= h * (1.0 + 1e-12);
            if last {
                h = t_end - self.t;
            }
            let (y1, err, k7) = trial(&self.f, self.t, &self.y, &self.k, h);
            let en = self.err_norm(&y1, &err);
            if !en.is_finite() {
                self.h = h * 0.2;
                if self.h < 1e-14 * (1.0 + self.t.abs()) {
                    return false;
                }
                continue;
            }
            if en <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y1;
                self.k = k7;
                self.steps += 1;
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the proposed step even when the last step was shortened to hit a node.
                self.h = if last { self.h.max(h * fac) } else { h * fac };
            } else {
                self.h = h * (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                if self.h < 1e-14 * (1.0 + self.t.abs()) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let tol = Tolerance { rtol: 1e-12, atol: 1e-14 };
        let mut s = Stepper::new(|_t, y: &State| [y[1], -y[0]], 0.0, [1.0, 0.0], 0.01, tol);
        for k in 1..=100 {
            assert!(s.advance_to(0.1 * k as f64, 1.0));
        }
        assert!((s.y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((s.y[1] + 10f64.sin()).abs() < 1e-10);
    }
}
