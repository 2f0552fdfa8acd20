//! Built-in curves with analytic Jacobians.

use std::f64::consts::{PI, TAU};

use super::engine::Model;

/// `Σ c_k·x^k` for `k = 0..=degree`.
#[derive(Debug, Clone, Copy)]
pub struct Polynomial {
    degree: usize,
}

impl Polynomial {
    pub fn new(degree: usize) -> Self {
        assert!(degree <= 3, "polynomial degree above 3 is not supported");
        Self { degree }
    }
}

impl Model for Polynomial {
    fn name(&self) -> &'static str {
        "polynomial"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["c0", "c1", "c2", "c3"][..=self.degree]
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
    fn gradient(&self, x: f64, _p: &[f64], out: &mut [f64]) {
        let mut xk = 1.0;
        for o in out.iter_mut() {
            *o = xk;
            xk *= x;
        }
    }
}

/// `B + A·(κ/2)²/((x − x₀)² + (κ/2)²)` with `κ` the full width.
#[derive(Debug, Clone, Copy)]
pub struct Lorentzian;

impl Model for Lorentzian {
    fn name(&self) -> &'static str {
        "lorentzian"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["center", "linewidth", "amplitude", "baseline"]
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let h = 0.5 * p[1];
        let d = x - p[0];
        p[3] + p[2] * h * h / (d * d + h * h)
    }
    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let h = 0.5 * p[1];
        let d = x - p[0];
        let den = d * d + h * h;
        let shape = h * h / den;
        out[0] = p[2] * 2.0 * d * h * h / (den * den);
        // ∂shape/∂h = 2h·d²/den², and ∂h/∂κ = 1/2.
        out[1] = p[2] * h * d * d / (den * den);
        out[2] = shape;
        out[3] = 1.0;
    }
}

/// `A·e^{−t/τ}·sin(πt/T_π) + P_b`.
#[derive(Debug, Clone, Copy)]
pub struct DampedSine;

impl Model for DampedSine {
    fn name(&self) -> &'static str {
        "time_rabi"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "tau", "t_pi", "offset"]
    }
    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-t / p[1]).exp() * (PI * t / p[2]).sin() + p[3]
    }
    fn gradient(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let env = (-t / p[1]).exp();
        let phase = PI * t / p[2];
        let (s, c) = phase.sin_cos();
        out[0] = env * s;
        out[1] = p[0] * env * s * t / (p[1] * p[1]);
        out[2] = -p[0] * env * c * phase / p[2];
        out[3] = 1.0;
    }
}

/// `A·sin(πV/V_π) + P_b`.
#[derive(Debug, Clone, Copy)]
pub struct PowerRabi;

impl Model for PowerRabi {
    fn name(&self) -> &'static str {
        "power_rabi"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "v_pi", "offset"]
    }
    fn eval(&self, v: f64, p: &[f64]) -> f64 {
        p[0] * (PI * v / p[1]).sin() + p[2]
    }
    fn gradient(&self, v: f64, p: &[f64], out: &mut [f64]) {
        let phase = PI * v / p[1];
        let (s, c) = phase.sin_cos();
        out[0] = s;
        out[1] = -p[0] * c * phase / p[1];
        out[2] = 1.0;
    }
}

/// `A·e^{−t/T} + C`.
#[derive(Debug, Clone, Copy)]
pub struct ExpDecay;

impl Model for ExpDecay {
    fn name(&self) -> &'static str {
        "t1"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "t1", "offset"]
    }
    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-t / p[1]).exp() + p[2]
    }
    fn gradient(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let e = (-t / p[1]).exp();
        out[0] = e;
        out[1] = p[0] * e * t / (p[1] * p[1]);
        out[2] = 1.0;
    }
}

/// `A·e^{−t/T₂*}·cos(2πft + φ) + C`.
#[derive(Debug, Clone, Copy)]
pub struct Ramsey;

impl Model for Ramsey {
    fn name(&self) -> &'static str {
        "ramsey"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "t2star", "fringe", "phase", "offset"]
    }
    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-t / p[1]).exp() * (TAU * p[2] * t + p[3]).cos() + p[4]
    }
    fn gradient(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let e = (-t / p[1]).exp();
        let (s, c) = (TAU * p[2] * t + p[3]).sin_cos();
        out[0] = e * c;
        out[1] = p[0] * e * c * t / (p[1] * p[1]);
        out[2] = -p[0] * e * s * TAU * t;
        out[3] = -p[0] * e * s;
        out[4] = 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check<M: Model>(m: &M, sample: impl Fn(&mut ChaCha8Rng) -> (f64, Vec<f64>)) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let k = m.n_params();
        for _ in 0..100 {
            let (x, p) = sample(&mut rng);
            let mut analytic = vec![0.0; k];
            m.gradient(x, &p, &mut analytic);
            for j in 0..k {
                let central = |h: f64| {
                    let mut up = p.clone();
                    let mut dn = p.clone();
                    up[j] += h;
                    dn[j] -= h;
                    (m.eval(x, &up) - m.eval(x, &dn)) / (2.0 * h)
                };
                // One Richardson step removes the O(h²) truncation term.
                let h = 1e-7 * p[j].abs().max(1e-300);
                let numeric = (4.0 * central(0.5 * h) - central(h)) / 3.0;
                let scale = analytic[j].abs().max(numeric.abs());
                // Columns that vanish at this point are compared absolutely
                // against the model's own magnitude.
                let floor = 1e-9 * (m.eval(x, &p).abs() + 1.0) / p[j].abs().max(1e-300);
                assert!(
                    (analytic[j] - numeric).abs() <= 1e-6 * scale + floor,
                    "{} param {j}: analytic {} numeric {}",
                    m.name(),
                    analytic[j],
                    numeric
                );
            }
        }
    }

    #[test]
    fn jacobians_match_central_differences() {
        check(&Lorentzian, |r| {
            let c = 3.703e9;
            let w = r.random_range(1e5..2e6);
            (c + r.random_range(-3.0..3.0) * w, vec![c, w, r.random_range(0.1..2.0), r.random_range(-1.0..1.0)])
        });
        check(&DampedSine, |r| {
            (r.random_range(0.0..3e-6), vec![r.random_range(0.1..1.0), r.random_range(2e-7..2e-6), r.random_range(1e-7..4e-7), r.random_range(-1.0..1.0)])
        });
        check(&PowerRabi, |r| {
            (r.random_range(850e-9..960e-9), vec![r.random_range(0.1..1.0), r.random_range(19e-9..22e-9), r.random_range(-1.0..1.0)])
        });
        check(&ExpDecay, |r| {
            (r.random_range(0.0..3e-5), vec![r.random_range(0.1..1.0), r.random_range(1e-6..2e-5), r.random_range(-1.0..1.0)])
        });
        check(&Ramsey, |r| {
            (
                r.random_range(0.0..3e-6),
                vec![r.random_range(0.1..1.0), r.random_range(2e-7..2e-6), r.random_range(1e6..1e7), r.random_range(-3.0..3.0), r.random_range(-1.0..1.0)],
            )
        });
        check(&Polynomial::new(3), |r| (r.random_range(-2.0..2.0), (0..4).map(|_| r.random_range(0.5..2.0)).collect()));
    }
}
