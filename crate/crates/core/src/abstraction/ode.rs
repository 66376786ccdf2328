//! Controlled ODE models and their exact-time discretization by fixed-step
//! RK4 integration.

use std::fmt::{Debug, Display};
use std::sync::Arc;

use num_traits::Float;

use super::AbsError;

/// Scalar type the continuous side is generic over (`f32`, `f64`, ...).
pub trait Real: Float + Debug + Display + Send + Sync + 'static {}
impl<T: Float + Debug + Display + Send + Sync + 'static> Real for T {}

/// Converts an `f64` constant into the working scalar type.
pub fn real<F: Real>(v: f64) -> F {
    F::from(v).expect("constant must be representable in the scalar type")
}

/// Right-hand side of `ẋ = f(x, u)` together with a componentwise Jacobian
/// bound used to inflate abstract successors.
pub trait VectorField<F: Real>: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    /// Writes `f(x, u)` into `out` (`out.len() == state_dim`).
    fn eval(&self, x: &[F], u: &[F], out: &mut [F]);
    /// Row-major n×n matrix `M` with `M[i][j] ≥ sup_x |∂f_i/∂x_j|` over the
    /// domain for the given constant input. Deviations between two
    /// trajectories then obey `|δ(t)| ≤ e^{M t} |δ(0)|` componentwise.
    fn growth_matrix(&self, u: &[F]) -> Vec<F>;
}

/// Kinematic unicycle: state `(x, y, θ)`, input `(v, ω)`,
/// `ẋ = v·cosθ, ẏ = v·sinθ, θ̇ = ω`.
pub struct Unicycle;

impl<F: Real> VectorField<F> for Unicycle {
    fn state_dim(&self) -> usize {
        3
    }

    fn input_dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[F], u: &[F], out: &mut [F]) {
        out[0] = u[0] * x[2].cos();
        out[1] = u[0] * x[2].sin();
        out[2] = u[1];
    }

    fn growth_matrix(&self, u: &[F]) -> Vec<F> {
        // Only ∂ẋ/∂θ and ∂ẏ/∂θ are nonzero, both bounded by |v|; the
        // matrix is nilpotent, so the growth factor e^{Mτ} = I + Mτ.
        let mut m = vec![F::zero(); 9];
        m[2] = u[0].abs();
        m[5] = u[0].abs();
        m
    }
}

/// Looks a built-in vector field up by name.
pub fn lookup_field<F: Real>(name: &str) -> Option<Arc<dyn VectorField<F>>> {
    match name {
        "unicycle" => Some(Arc::new(Unicycle)),
        _ => None,
    }
}

/// A controlled ODE plus everything needed to sample it: domain box, wrap
/// flags for periodic dimensions, the finite input menu, the sampling
/// period, and the RK4 substep count.
pub struct OdeModel<F: Real> {
    pub field: Arc<dyn VectorField<F>>,
    pub dim_names: Vec<String>,
    pub domain: Vec<(F, F)>,
    pub wrap: Vec<bool>,
    /// Named constant input vectors (the finite input set).
    pub inputs: Vec<(String, Vec<F>)>,
    pub tau: F,
    pub substeps: usize,
}

impl<F: Real> OdeModel<F> {
    pub fn dim(&self) -> usize {
        self.field.state_dim()
    }

    // Negated comparisons so that NaN parameters are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), AbsError> {
        let n = self.dim();
        if self.dim_names.len() != n || self.domain.len() != n || self.wrap.len() != n {
            return Err(AbsError::Shape(format!(
                "model is {n}-dimensional but got {} names, {} domain ranges, {} wrap flags",
                self.dim_names.len(),
                self.domain.len(),
                self.wrap.len()
            )));
        }
        for (d, &(lo, hi)) in self.domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(AbsError::Shape(format!(
                    "domain range for dimension `{}` is empty or non-finite",
                    self.dim_names[d]
                )));
            }
        }
        if self.inputs.is_empty() {
            return Err(AbsError::Shape("input set is empty".into()));
        }
        for (name, vals) in &self.inputs {
            if vals.len() != self.field.input_dim() {
                return Err(AbsError::Shape(format!(
                    "input `{name}` has {} components, field expects {}",
                    vals.len(),
                    self.field.input_dim()
                )));
            }
        }
        if !(self.tau > F::zero()) || self.substeps == 0 {
            return Err(AbsError::Shape(
                "sampling period and substep count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn input_values(&self, u: u32) -> &[F] {
        &self.inputs[u as usize].1
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|(n, _)| n.clone()).collect()
    }
}

/// Integrates `ẋ = f(x, u)` for `t` time units under a constant input with
/// classic RK4, using the model's fixed substep `τ/substeps` (so flowing
/// for τ twice performs exactly the same steps as flowing for 2τ once).
pub fn flow<F: Real>(m: &OdeModel<F>, x0: &[F], u: &[F], t: F) -> Result<Vec<F>, AbsError> {
    let h_nominal = m.tau / real::<F>(m.substeps as f64);
    let ratio = (t / h_nominal)
        .round()
        .to_f64()
        .unwrap_or(f64::NAN);
    if !ratio.is_finite() {
        return Err(AbsError::NonFinite);
    }
    let steps = (ratio as usize).max(1);
    let h = t / real::<F>(steps as f64);

    let n = m.dim();
    let mut x = x0.to_vec();
    let mut k1 = vec![F::zero(); n];
    let mut k2 = vec![F::zero(); n];
    let mut k3 = vec![F::zero(); n];
    let mut k4 = vec![F::zero(); n];
    let mut tmp = vec![F::zero(); n];
    let half = real::<F>(0.5);
    let sixth = F::one() / real::<F>(6.0);
    let two = real::<F>(2.0);

    for _ in 0..steps {
        m.field.eval(&x, u, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + half * h * k1[i];
        }
        m.field.eval(&tmp, u, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + half * h * k2[i];
        }
        m.field.eval(&tmp, u, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        m.field.eval(&tmp, u, &mut k4);
        for i in 0..n {
            x[i] = x[i] + h * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AbsError::NonFinite);
        }
    }
    Ok(x)
}

#[cfg(test)]
pub(crate) fn unicycle_model(tau: f64) -> OdeModel<f64> {
    let tau_f = tau;
    OdeModel {
        field: lookup_field::<f64>("unicycle").unwrap(),
        dim_names: vec!["x".into(), "y".into(), "theta".into()],
        domain: vec![(0.0, 5.0), (0.0, 5.0), (0.0, std::f64::consts::TAU)],
        wrap: vec![false, false, true],
        inputs: vec![
            ("halt".into(), vec![0.0, 0.0]),
            ("fwd".into(), vec![0.4, 0.0]),
            ("arc".into(), vec![0.2, 0.2]),
        ],
        tau: tau_f,
        substeps: 16,
    }
}
