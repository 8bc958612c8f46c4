//! Periodic cubic spline on a uniform knot grid.

/// Interpolating C² cubic spline through `values` at knots `0, h, 2h, …`,
/// wrapping with period `values.len() * h`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    second: Vec<f64>,
    step: f64,
}

impl PeriodicSpline {
    pub fn new(values: &[f64], step: f64) -> Self {
        let n = values.len();
        assert!(n >= 3, "periodic spline needs at least 3 knots");
        assert!(step > 0.0);
        let scale = 6.0 / (step * step);
        let rhs: Vec<f64> = (0..n)
            .map(|k| {
                let prev = values[(k + n - 1) % n];
                let next = values[(k + 1) % n];
                scale * (next - 2.0 * values[k] + prev)
            })
            .collect();
        let second = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Self {
            values: values.to_vec(),
            second,
            step,
        }
    }

    pub fn period(&self) -> f64 {
        self.values.len() as f64 * self.step
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let period = self.period();
        let t = t.rem_euclid(period);
        let pos = t / self.step;
        let k = (pos.floor() as usize).min(n - 1);
        let u = pos - k as f64;
        let k1 = (k + 1) % n;
        let w = 1.0 - u;
        let h2 = self.step * self.step / 6.0;
        w * self.values[k]
            + u * self.values[k1]
            + h2 * ((w * w * w - w) * self.second[k] + (u * u * u - u) * self.second[k1])
    }
}

/// Solves the circulant tridiagonal system with constant bands
/// `lower·x[i-1] + diag·x[i] + upper·x[i+1] = rhs[i]` (indices mod n)
/// by Sherman–Morrison on top of the Thomas algorithm.
fn solve_cyclic(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let gamma = -diag;
    let mut main = vec![diag; n];
    main[0] = diag - gamma;
    main[n - 1] = diag - lower * upper / gamma;

    let x = thomas(lower, &main, upper, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = upper;
    let z = thomas(lower, &main, upper, &u);

    let fact = (x[0] + lower * x[n - 1] / gamma) / (1.0 + z[0] + lower * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(lower: f64, main: &[f64], upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper / main[0];
    d[0] = rhs[0] / main[0];
    for i in 1..n {
        let m = main[i] - lower * c[i - 1];
        c[i] = upper / m;
        d[i] = (rhs[i] - lower * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interpolates_knots() {
        let vals = [1.0, 3.0, -2.0, 0.5, 4.0];
        let s = PeriodicSpline::new(&vals, 0.7);
        for (k, v) in vals.iter().enumerate() {
            assert!((s.eval(k as f64 * 0.7) - v).abs() < 1e-12);
        }
        // wraps
        assert!((s.eval(5.0 * 0.7) - 1.0).abs() < 1e-12);
        assert!((s.eval(-0.7) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_is_reproduced_exactly() {
        let s = PeriodicSpline::new(&[2.5; 7], 0.3);
        for i in 0..50 {
            assert_eq!(s.eval(i as f64 * 0.0371), 2.5);
        }
    }

    #[test]
    fn second_derivatives_solve_cyclic_system() {
        let vals: Vec<f64> = (0..9).map(|k| ((k * 7) % 5) as f64).collect();
        let h = 0.4;
        let s = PeriodicSpline::new(&vals, h);
        let n = vals.len();
        for k in 0..n {
            let lhs = s.second[(k + n - 1) % n] + 4.0 * s.second[k] + s.second[(k + 1) % n];
            let rhs = 6.0 / (h * h) * (vals[(k + 1) % n] - 2.0 * vals[k] + vals[(k + n - 1) % n]);
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn smooth_periodic_function_converges() {
        let n = 32;
        let h = 2.0 * PI / n as f64;
        let vals: Vec<f64> = (0..n).map(|k| (k as f64 * h).sin() + 0.3 * (2.0 * k as f64 * h).cos()).collect();
        let s = PeriodicSpline::new(&vals, h);
        let max_err = (0..1000)
            .map(|i| {
                let t = i as f64 * 2.0 * PI / 1000.0;
                (s.eval(t) - (t.sin() + 0.3 * (2.0 * t).cos())).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_err < 1e-4, "max_err = {max_err}");
    }
}
