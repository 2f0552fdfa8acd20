use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::dataset::Dataset;

/// A curve `y = f(x; p)` with an analytic parameter Jacobian.
pub trait Model {
    fn name(&self) -> &'static str;
    fn param_names(&self) -> &'static [&'static str];
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    /// Write `∂f/∂p_j` into `out[j]`.
    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]);

    fn n_params(&self) -> usize {
        self.param_names().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub residual_tolerance: f64,
    pub gradient_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, initial_damping: 1e-3, residual_tolerance: 1e-10, gradient_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    /// Weighted residual norm `√χ²`.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub notes: Vec<String>,
    /// χ² after every accepted step, starting with the initial guess.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.sigma)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    pub(crate) fn set(&mut self, name: &str, value: f64, sigma: f64) {
        if let Some(p) = self.params.iter_mut().find(|p| p.name == name) {
            p.value = value;
            p.sigma = sigma;
        }
    }
}

struct ParamTable<'a>(&'a [FitParam]);

impl Serialize for ParamTable<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            value: f64,
            sigma: f64,
        }
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for p in self.0 {
            map.serialize_entry(&p.name, &Entry { value: p.value, sigma: p.sigma })?;
        }
        map.end()
    }
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FitResult", 6)?;
        st.serialize_field("model", &self.model)?;
        st.serialize_field("params", &ParamTable(&self.params))?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("converged", &self.converged)?;
        st.serialize_field("iterations", &self.iterations)?;
        st.serialize_field("notes", &self.notes)?;
        st.end()
    }
}

struct Problem<'a> {
    model: &'a dyn Model,
    data: &'a Dataset,
}

impl Problem<'_> {
    fn weight(&self, i: usize) -> f64 {
        self.data.sigma.as_ref().map_or(1.0, |s| 1.0 / s[i])
    }

    fn residuals(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.data.len(),
            (0..self.data.len()).map(|i| (self.data.y[i] - self.model.eval(self.data.x[i], p)) * self.weight(i)),
        )
    }

    /// Jacobian of the model (not the residual), weighted.
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.data.len();
        let k = p.len();
        let mut j = DMatrix::zeros(n, k);
        let mut row = vec![0.0; k];
        for i in 0..n {
            self.model.gradient(self.data.x[i], p, &mut row);
            let w = self.weight(i);
            for (c, v) in row.iter().enumerate() {
                j[(i, c)] = v * w;
            }
        }
        j
    }
}

fn cost(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

fn finite(p: &DVector<f64>) -> bool {
    p.iter().all(|v| v.is_finite())
}

/// Scale-free gradient measure: the largest cosine between a Jacobian column
/// and the residual vector.
fn scaled_gradient(j: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let g = j.transpose() * r;
    (0..j.ncols())
        .map(|c| {
            let cn = j.column(c).norm();
            if cn == 0.0 {
                0.0
            } else {
                (g[c] / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Solve `(Ĵᵀ Ĵ + λ I) z = Ĵᵀ r` with `Ĵ = J D⁻¹`, returning `D⁻¹ z`.
///
/// Column scaling makes the damping term equivalent to `λ·diag(JᵀJ)`.
fn damped_step(j: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let k = j.ncols();
    let scale = DVector::from_iterator(k, (0..k).map(|c| {
        let n = j.column(c).norm();
        if n > 0.0 {
            n
        } else {
            1.0
        }
    }));
    let mut js = j.clone();
    for c in 0..k {
        js.column_mut(c).scale_mut(1.0 / scale[c]);
    }
    let mut a = js.transpose() * &js;
    for c in 0..k {
        a[(c, c)] += lambda;
    }
    let b = js.transpose() * r;
    let z = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a.lu().solve(&b)?,
    };
    let step = z.component_div(&scale);
    finite(&step).then_some(step)
}

/// Covariance `(JᵀJ)⁻¹`, scaled by the reduced χ² when no σ is supplied.
fn covariance(j: &DMatrix<f64>, chi2: f64, dof: usize, has_sigma: bool) -> DMatrix<f64> {
    let k = j.ncols();
    let jtj = j.transpose() * j;
    let inv = jtj
        .clone()
        .try_inverse()
        .filter(|m| finite(&DVector::from_column_slice(m.as_slice())))
        .unwrap_or_else(|| jtj.pseudo_inverse(1e-15).unwrap_or_else(|_| DMatrix::from_element(k, k, f64::NAN)));
    if has_sigma || dof == 0 {
        inv
    } else {
        inv * (chi2 / dof as f64)
    }
}

/// Levenberg-Marquardt minimization of `Σ((y − f(x; p))/σ)²` from `init`.
pub fn least_squares(model: &dyn Model, data: &Dataset, init: &[f64], options: &LmOptions) -> FitResult {
    let problem = Problem { model, data };
    let mut p = DVector::from_column_slice(init);
    let mut r = problem.residuals(p.as_slice());
    let mut c = cost(&r);
    let mut lambda = options.initial_damping;
    let mut history = vec![c];
    let mut converged = false;
    let mut iterations = 0;
    let mut notes = Vec::new();

    if !finite(&p) || !c.is_finite() {
        notes.push("initial guess is not finite".to_string());
        return finish(&problem, p, c, false, 0, notes, history);
    }

    while iterations < options.max_iterations {
        let j = problem.jacobian(p.as_slice());
        if scaled_gradient(&j, &r) < options.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while lambda < 1e20 {
            if let Some(step) = damped_step(&j, &r, lambda) {
                let trial = &p + &step;
                let tr = problem.residuals(trial.as_slice());
                let tc = cost(&tr);
                if tc.is_finite() && tc <= c {
                    let rel = if c > 0.0 { (c - tc) / c } else { 0.0 };
                    p = trial;
                    r = tr;
                    c = tc;
                    history.push(c);
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    if rel < options.residual_tolerance {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step exists at machine precision.
            let g = scaled_gradient(&j, &r);
            converged = g < 1e-6;
            if !converged {
                notes.push(format!("damping saturated with scaled gradient {g:.3e}"));
            }
            break;
        }
        if converged {
            break;
        }
    }
    if !converged && iterations >= options.max_iterations {
        notes.push(format!("stopped after {} iterations", options.max_iterations));
    }
    finish(&problem, p, c, converged, iterations, notes, history)
}

fn finish(
    problem: &Problem<'_>,
    p: DVector<f64>,
    c: f64,
    converged: bool,
    iterations: usize,
    notes: Vec<String>,
    history: Vec<f64>,
) -> FitResult {
    let k = p.len();
    let j = problem.jacobian(p.as_slice());
    let dof = problem.data.len().saturating_sub(k);
    let cov = covariance(&j, c, dof, problem.data.sigma.is_some());
    let params = problem
        .model
        .param_names()
        .iter()
        .enumerate()
        .map(|(i, name)| FitParam { name: name.to_string(), value: p[i], sigma: cov[(i, i)].max(0.0).sqrt() })
        .collect();
    FitResult {
        model: problem.model.name().to_string(),
        params,
        residual: c.sqrt(),
        converged,
        iterations,
        notes,
        cost_history: history,
    }
}
