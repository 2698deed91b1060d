//! Feedforward networks stored as a flat parameter vector.
//!
//! Parameters are kept in a single `Vec<f64>` in the order
//! `(vec(W_1), b_1, ..., vec(W_{L+1}), b_{L+1})` where `vec` stacks the
//! columns of a matrix, so weight `W_k[i, j]` lives at
//! `offset_k + j * p_k + i`. Every structural statistic (sparsity, sup norm)
//! and the JSON format work directly on that vector; the batched kernels view
//! each `W_k` as a column-major ndarray matrix.

use ndarray::{linalg::general_mat_mul, s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis, ShapeBuilder};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden-layer activation. The output layer is always affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative with the convention `relu'(0) = 0`.
    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Width vector `(p_0, ..., p_{L+1})` with `p_{L+1} = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NetworkArchitecture {
    widths: Vec<usize>,
}

impl NetworkArchitecture {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "width vector needs at least input and output entries, got {widths:?}"
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidSpec(format!("all widths must be >= 1, got {widths:?}")));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::InvalidSpec(format!("output width must be 1, got {widths:?}")));
        }
        Ok(Self { widths })
    }

    /// `d -> hidden[0] -> ... -> 1`.
    pub fn with_hidden(input_dim: usize, hidden: &[usize]) -> Result<Self> {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input_dim);
        widths.extend_from_slice(hidden);
        widths.push(1);
        Self::new(widths)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.widths.len() - 2
    }

    /// Largest hidden width, 0 for a network without hidden layers.
    pub fn max_width(&self) -> usize {
        self.widths[1..self.widths.len() - 1].iter().copied().max().unwrap_or(0)
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    /// `(rows, cols, weight offset, bias offset)` for affine layer `k` (0-based).
    fn layer(&self, k: usize) -> (usize, usize, usize, usize) {
        let mut off = 0;
        for w in self.widths.windows(2).take(k) {
            off += w[1] * w[0] + w[1];
        }
        let (rows, cols) = (self.widths[k + 1], self.widths[k]);
        (rows, cols, off, off + rows * cols)
    }
}

impl TryFrom<Vec<usize>> for NetworkArchitecture {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NetworkArchitecture> for Vec<usize> {
    fn from(a: NetworkArchitecture) -> Self {
        a.widths
    }
}

/// Constraint tuple `(L, N, B, F, S)` of a sparsity constrained class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub depth: f64,
    pub width: f64,
    /// Cap on `‖θ‖_∞`.
    pub sup_norm: f64,
    /// Cap on `‖h‖_∞`, enforced by clamping the network output.
    pub output_bound: f64,
    /// Cap on `‖θ‖_0`.
    pub sparsity: f64,
    #[serde(default)]
    pub activation: Activation,
}

impl ClassSpec {
    pub fn validate(&self) -> Result<()> {
        let caps = [
            ("depth", self.depth),
            ("width", self.width),
            ("sup_norm", self.sup_norm),
            ("output_bound", self.output_bound),
            ("sparsity", self.sparsity),
        ];
        for (name, v) in caps {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InvalidSpec(format!("{name} cap must be positive, got {v}")));
            }
        }
        if self.sparsity < 1.0 {
            return Err(Error::InvalidSpec(format!(
                "sparsity level must be >= 1, got {}",
                self.sparsity
            )));
        }
        Ok(())
    }

    /// Largest admissible number of nonzero parameters.
    pub fn max_nonzero(&self) -> usize {
        if self.sparsity.is_infinite() {
            usize::MAX
        } else {
            self.sparsity.floor() as usize
        }
    }

    /// Membership of the parameter vector in the class. The output bound is
    /// not a property of `θ` alone and is enforced at evaluation time instead.
    pub fn contains(&self, params: &NetworkParams) -> bool {
        params.depth() as f64 <= self.depth
            && params.max_width() as f64 <= self.width
            && params.sup_norm() <= self.sup_norm
            && params.count_nonzero() <= self.max_nonzero()
    }

    fn admits_architecture(&self, arch: &NetworkArchitecture) -> bool {
        arch.depth() as f64 <= self.depth && arch.max_width() as f64 <= self.width
    }
}

/// Parameters of a feedforward network in flattened `θ(h)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    arch: NetworkArchitecture,
    theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_relu")]
    activation: Activation,
}

fn is_relu(a: &Activation) -> bool {
    *a == Activation::Relu
}

impl NetworkParams {
    pub fn zeros(arch: NetworkArchitecture) -> Self {
        let theta = vec![0.0; arch.n_params()];
        Self {
            arch,
            theta,
            activation: Activation::Relu,
        }
    }

    pub fn from_theta(arch: NetworkArchitecture, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != arch.n_params() {
            return Err(Error::Shape(format!(
                "architecture {:?} needs {} parameters, got {}",
                arch.widths(),
                arch.n_params(),
                theta.len()
            )));
        }
        Ok(Self {
            arch,
            theta,
            activation: Activation::Relu,
        })
    }

    /// He-uniform weights on `[-sqrt(6 / fan_in), sqrt(6 / fan_in)]`, zero biases.
    pub fn he_uniform<R: Rng + ?Sized>(arch: NetworkArchitecture, rng: &mut R) -> Self {
        let mut params = Self::zeros(arch);
        for k in 0..params.arch.n_layers() {
            let (rows, cols, w_off, _) = params.arch.layer(k);
            let limit = (6.0 / cols as f64).sqrt();
            for w in &mut params.theta[w_off..w_off + rows * cols] {
                *w = rng.random_range(-limit..=limit);
            }
        }
        params
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn arch(&self) -> &NetworkArchitecture {
        &self.arch
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn into_theta(self) -> Vec<f64> {
        self.theta
    }

    pub fn count_nonzero(&self) -> usize {
        self.theta.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn sup_norm(&self) -> f64 {
        self.theta.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn depth(&self) -> usize {
        self.arch.depth()
    }

    pub fn max_width(&self) -> usize {
        self.arch.max_width()
    }

    /// `W_k` (0-based layer index) as a `p_{k+1} x p_k` matrix view.
    pub fn weight(&self, k: usize) -> ArrayView2<'_, f64> {
        let (rows, cols, w_off, _) = self.arch.layer(k);
        ArrayView2::from_shape((rows, cols).f(), &self.theta[w_off..w_off + rows * cols])
            .expect("layer slice matches its shape")
    }

    pub fn bias(&self, k: usize) -> ArrayView1<'_, f64> {
        let (rows, _, _, b_off) = self.arch.layer(k);
        ArrayView1::from(&self.theta[b_off..b_off + rows])
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::Shape(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.arch.input_dim()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("input contains {v}")));
        }
        Ok(())
    }

    /// Pre-activations of every layer for a single input. The last entry is the
    /// unclamped network output.
    fn preactivations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.arch.n_layers());
        let mut input: Vec<f64> = x.to_vec();
        for k in 0..self.arch.n_layers() {
            let (rows, cols, w_off, b_off) = self.arch.layer(k);
            let mut z = self.theta[b_off..b_off + rows].to_vec();
            for (j, &xj) in input.iter().enumerate().take(cols) {
                let col = &self.theta[w_off + j * rows..w_off + (j + 1) * rows];
                for (zi, &w) in z.iter_mut().zip(col) {
                    *zi += w * xj;
                }
            }
            input = if k + 1 < self.arch.n_layers() {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                Vec::new()
            };
            pre.push(z);
        }
        pre
    }

    /// Network output `h(x)`, clipped to `[-F, F]` when `clamp` is given.
    pub fn forward(&self, x: &[f64], clamp: Option<f64>) -> Result<f64> {
        self.check_input(x)?;
        let out = self.preactivations(x).last().unwrap()[0];
        Ok(apply_clamp(out, clamp))
    }

    /// Gradient of `upstream * h(x)` with respect to `θ`, shaped like `self`.
    ///
    /// Kinks: the ReLU derivative is 0 at a zero pre-activation and the clamp
    /// passes gradient only where `|h| < F`.
    pub fn grad(&self, x: &[f64], upstream: f64, clamp: Option<f64>) -> Result<NetworkParams> {
        self.check_input(x)?;
        let mut g = NetworkParams::zeros(self.arch.clone()).with_activation(self.activation);
        let pre = self.preactivations(x);
        let out = pre.last().unwrap()[0];
        let upstream = upstream * clamp_derivative(out, clamp);
        if upstream == 0.0 {
            return Ok(g);
        }
        let mut delta = vec![upstream];
        for k in (0..self.arch.n_layers()).rev() {
            let (rows, cols, w_off, b_off) = self.arch.layer(k);
            let input: Vec<f64> = if k == 0 {
                x.to_vec()
            } else {
                pre[k - 1].iter().map(|&v| self.activation.apply(v)).collect()
            };
            for j in 0..cols {
                for i in 0..rows {
                    g.theta[w_off + j * rows + i] = delta[i] * input[j];
                }
            }
            g.theta[b_off..b_off + rows].copy_from_slice(&delta);
            if k > 0 {
                let mut next = vec![0.0; cols];
                for (j, nj) in next.iter_mut().enumerate() {
                    let col = &self.theta[w_off + j * rows..w_off + (j + 1) * rows];
                    let s: f64 = col.iter().zip(&delta).map(|(w, d)| w * d).sum();
                    *nj = s * self.activation.derivative(pre[k - 1][j]);
                }
                delta = next;
            }
        }
        Ok(g)
    }

    /// Outputs for every row of `x` (shape `batch x p_0`).
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>, clamp: Option<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.arch.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                x.ncols(),
                self.arch.input_dim()
            )));
        }
        let mut a = x.to_owned();
        for k in 0..self.arch.n_layers() {
            let mut z = self.affine(k, a.view());
            if k + 1 < self.arch.n_layers() {
                let act = self.activation;
                z.mapv_inplace(|v| act.apply(v));
            }
            a = z;
        }
        Ok(a.column(0).mapv(|v| apply_clamp(v, clamp)))
    }

    fn affine(&self, k: usize, a: ArrayView2<'_, f64>) -> Array2<f64> {
        let w = self.weight(k);
        let b = self.bias(k);
        let mut z = Array2::from_shape_fn((a.nrows(), w.nrows()), |(_, i)| b[i]);
        general_mat_mul(1.0, &a, &w.t(), 1.0, &mut z);
        z
    }

    /// Batched backpropagation. `upstream(i, h_i)` returns `dℓ/dh` for row `i`
    /// given its (clamped) output; the gradient of `Σ_i ℓ_i` is written into
    /// `grad` (overwritten, same layout as `θ`). Returns the outputs.
    pub fn backward_batch<F>(
        &self,
        x: ArrayView2<'_, f64>,
        clamp: Option<f64>,
        mut upstream: F,
        grad: &mut [f64],
    ) -> Result<Array1<f64>>
    where
        F: FnMut(usize, f64) -> f64,
    {
        if x.ncols() != self.arch.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                x.ncols(),
                self.arch.input_dim()
            )));
        }
        if grad.len() != self.theta.len() {
            return Err(Error::Shape(format!(
                "gradient buffer has {} entries, expected {}",
                grad.len(),
                self.theta.len()
            )));
        }
        let n_layers = self.arch.n_layers();
        // acts[k] is the input of affine layer k; pres[k] its pre-activation.
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        let mut pres: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        acts.push(x.to_owned());
        for k in 0..n_layers {
            let z = self.affine(k, acts[k].view());
            if k + 1 < n_layers {
                let act = self.activation;
                acts.push(z.mapv(|v| act.apply(v)));
            }
            pres.push(z);
        }
        let raw = pres[n_layers - 1].column(0).to_owned();
        let outputs = raw.mapv(|v| apply_clamp(v, clamp));
        let mut delta = Array2::from_shape_fn((x.nrows(), 1), |(i, _)| {
            upstream(i, outputs[i]) * clamp_derivative(raw[i], clamp)
        });
        for k in (0..n_layers).rev() {
            let (rows, cols, w_off, b_off) = self.arch.layer(k);
            let (head, tail) = grad.split_at_mut(b_off);
            let mut gw = ArrayViewMut2::from_shape((rows, cols).f(), &mut head[w_off..])
                .expect("layer slice matches its shape");
            general_mat_mul(1.0, &delta.t(), &acts[k], 0.0, &mut gw);
            let gb = delta.sum_axis(Axis(0));
            tail[..rows].copy_from_slice(gb.as_slice().unwrap());
            if k > 0 {
                let mut next = delta.dot(&self.weight(k));
                let act = self.activation;
                next.zip_mut_with(&pres[k - 1], |d, &z| *d *= act.derivative(z));
                delta = next;
            }
        }
        Ok(outputs)
    }

    /// Clip to `[-B, B]` and keep only the `⌊S⌋` largest magnitudes.
    ///
    /// Ties in magnitude are broken by position in `θ`: the lower index is
    /// kept. The architecture itself must already respect the depth and width
    /// caps.
    pub fn project_to_class(&self, spec: &ClassSpec) -> Result<NetworkParams> {
        let mut out = self.clone();
        out.project_in_place(spec)?;
        Ok(out)
    }

    pub fn project_in_place(&mut self, spec: &ClassSpec) -> Result<()> {
        spec.validate()?;
        if !spec.admits_architecture(&self.arch) {
            return Err(Error::InvalidSpec(format!(
                "architecture {:?} exceeds depth cap {} or width cap {}",
                self.arch.widths(),
                spec.depth,
                spec.width
            )));
        }
        project_theta(&mut self.theta, spec.sup_norm, spec.max_nonzero());
        Ok(())
    }
}

/// Clip every entry to `[-bound, bound]` and zero all but the `keep` largest
/// magnitudes (stable in index).
pub fn project_theta(theta: &mut [f64], bound: f64, keep: usize) {
    for v in theta.iter_mut() {
        *v = v.clamp(-bound, bound);
    }
    let nnz = theta.iter().filter(|&&v| v != 0.0).count();
    if nnz <= keep {
        return;
    }
    let mut order: Vec<usize> = (0..theta.len()).filter(|&i| theta[i] != 0.0).collect();
    order.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()).then(a.cmp(&b)));
    for &i in &order[keep..] {
        theta[i] = 0.0;
    }
}

#[inline]
fn apply_clamp(v: f64, clamp: Option<f64>) -> f64 {
    match clamp {
        Some(f) => v.clamp(-f, f),
        None => v,
    }
}

#[inline]
fn clamp_derivative(raw: f64, clamp: Option<f64>) -> f64 {
    match clamp {
        Some(f) if raw.abs() >= f => 0.0,
        _ => 1.0,
    }
}

/// Copy rows `rows` of `x` into a contiguous batch.
pub(crate) fn gather_rows(x: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), x.ncols()));
    for (dst, &r) in rows.iter().enumerate() {
        out.slice_mut(s![dst, ..]).assign(&x.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arch(w: &[usize]) -> NetworkArchitecture {
        NetworkArchitecture::new(w.to_vec()).unwrap()
    }

    fn spec(b: f64, s: f64) -> ClassSpec {
        ClassSpec {
            depth: 10.0,
            width: 10.0,
            sup_norm: b,
            output_bound: 1.0,
            sparsity: s,
            activation: Activation::Relu,
        }
    }

    #[test]
    fn architecture_validation() {
        assert!(NetworkArchitecture::new(vec![3]).is_err());
        assert!(NetworkArchitecture::new(vec![3, 0, 1]).is_err());
        assert!(NetworkArchitecture::new(vec![3, 4, 2]).is_err());
        let a = arch(&[3, 100, 100, 1]);
        assert_eq!(a.depth(), 2);
        assert_eq!(a.max_width(), 100);
        assert_eq!(a.n_params(), 3 * 100 + 100 + 100 * 100 + 100 + 100 + 1);
        assert_eq!(arch(&[4, 1]).max_width(), 0);
    }

    #[test]
    fn theta_layout_is_column_major() {
        // 2 -> 2 -> 1, W_1 = [[1, 2], [3, 4]] stored column by column.
        let p = NetworkParams::from_theta(arch(&[2, 2, 1]), vec![1., 3., 2., 4., 0., 0., 1., 1., 0.])
            .unwrap()
            .with_activation(Activation::Identity);
        assert_eq!(p.weight(0)[[0, 1]], 2.0);
        assert_eq!(p.weight(0)[[1, 0]], 3.0);
        // h(x) = (1 + 2) + (3 + 4) for x = (1, 1)
        assert_eq!(p.forward(&[1.0, 1.0], None).unwrap(), 10.0);
        assert_eq!(p.forward(&[1.0, 0.0], None).unwrap(), 4.0);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = NetworkParams::zeros(arch(&[3, 5, 1]));
        assert_eq!(p.forward(&[1.0, -2.0, 7.0], None).unwrap(), 0.0);
    }

    #[test]
    fn relu_kills_negative_preactivation() {
        // W_1 = (1, 0, 0), b = 0, W_2 = (1)
        let p = NetworkParams::from_theta(arch(&[3, 1, 1]), vec![1., 0., 0., 0., 1., 0.]).unwrap();
        assert_eq!(p.forward(&[-3.0, 1.0, 1.0], None).unwrap(), 0.0);
        assert_eq!(p.forward(&[2.0, 1.0, 1.0], None).unwrap(), 2.0);
    }

    #[test]
    fn clamp_limits_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = NetworkParams::he_uniform(arch(&[2, 4, 1]), &mut rng);
        // Output bias pushes the unclamped value to 5.7 at x = 0.
        let last = p.theta().len() - 1;
        p.theta_mut()[last] = 5.7;
        let x = [0.0, 0.0];
        let raw = p.forward(&x, None).unwrap();
        assert_eq!(raw, 5.7);
        assert_eq!(p.forward(&x, Some(2.0)).unwrap(), 2.0);
        p.theta_mut()[last] = -5.7;
        assert_eq!(p.forward(&x, Some(2.0)).unwrap(), -2.0);
    }

    #[test]
    fn forward_errors() {
        let p = NetworkParams::zeros(arch(&[3, 2, 1]));
        assert!(matches!(p.forward(&[1.0], None), Err(Error::Shape(_))));
        assert!(matches!(p.forward(&[1.0, f64::NAN, 0.0], None), Err(Error::Numeric(_))));
        assert!(matches!(p.grad(&[1.0, 2.0], 1.0, None), Err(Error::Shape(_))));
    }

    #[test]
    fn affine_gradient_is_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = NetworkParams::he_uniform(arch(&[4, 1]), &mut rng);
        let g = p.grad(&[1.0; 4], 1.0, None).unwrap();
        assert_eq!(g.theta(), &[1.0, 1.0, 1.0, 1.0, 1.0]);
        let g = p.grad(&[1.0, 2.0, 3.0, 4.0], 1.0, None).unwrap();
        assert_eq!(g.theta(), &[1.0, 2.0, 3.0, 4.0, 1.0]);
    }

    #[test]
    fn zero_upstream_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = NetworkParams::he_uniform(arch(&[3, 6, 5, 1]), &mut rng);
        let g = p.grad(&[0.3, -1.0, 2.0], 0.0, None).unwrap();
        assert!(g.theta().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn clamp_blocks_gradient() {
        let p = NetworkParams::from_theta(arch(&[1, 1]), vec![1.0, 0.0]).unwrap();
        let g = p.grad(&[3.0], 1.0, Some(2.0)).unwrap();
        assert!(g.theta().iter().all(|&v| v == 0.0));
        // exactly at the boundary: zero as well
        let g = p.grad(&[2.0], 1.0, Some(2.0)).unwrap();
        assert!(g.theta().iter().all(|&v| v == 0.0));
        let g = p.grad(&[1.0], 1.0, Some(2.0)).unwrap();
        assert_eq!(g.theta(), &[1.0, 1.0]);
    }

    #[test]
    fn batch_backward_matches_per_sample_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = NetworkParams::he_uniform(arch(&[3, 7, 5, 1]), &mut rng);
        let x = Array2::from_shape_fn((6, 3), |(i, j)| ((i * 3 + j) as f64 * 0.37).sin() * 2.0);
        let ups = [0.5, -1.0, 2.0, 0.0, 1.5, -0.25];
        let mut gb = vec![0.0; p.theta().len()];
        let out = p.backward_batch(x.view(), None, |i, _| ups[i], &mut gb).unwrap();
        let mut gs = vec![0.0; p.theta().len()];
        for i in 0..6 {
            let xi: Vec<f64> = x.row(i).to_vec();
            assert!((out[i] - p.forward(&xi, None).unwrap()).abs() < 1e-12);
            let g = p.grad(&xi, ups[i], None).unwrap();
            for (a, b) in gs.iter_mut().zip(g.theta()) {
                *a += b;
            }
        }
        for (a, b) in gs.iter().zip(&gb) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let fb = p.forward_batch(x.view(), None).unwrap();
        for i in 0..6 {
            assert!((fb[i] - out[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_examples() {
        let a = arch(&[1, 1]);
        let p = NetworkParams::from_theta(a.clone(), vec![3.0, -0.5]).unwrap();
        assert_eq!(p.project_to_class(&spec(1.0, 2.0)).unwrap().theta(), &[1.0, -0.5]);

        let a3 = arch(&[2, 1]);
        let p = NetworkParams::from_theta(a3.clone(), vec![3.0, -0.5, 0.1]).unwrap();
        assert_eq!(p.project_to_class(&spec(10.0, 2.0)).unwrap().theta(), &[3.0, -0.5, 0.0]);

        let p = NetworkParams::from_theta(a3, vec![1.0, -1.0, 1.0]).unwrap();
        assert_eq!(p.project_to_class(&spec(1.0, 2.0)).unwrap().theta(), &[1.0, -1.0, 0.0]);
    }

    /// Among all 2-sparse vectors obtained by zeroing one entry of (1, -1, 1),
    /// every choice has the same l2 distance; the rule keeps the two lowest
    /// indices, i.e. the lexicographically first admissible support.
    #[test]
    fn tie_break_matches_enumeration() {
        let theta = [1.0, -1.0, 1.0];
        let mut best: Option<(f64, Vec<usize>)> = None;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let dist: f64 = (0..3).filter(|i| *i != a && *i != b).map(|i| theta[i] * theta[i]).sum();
                let better = match &best {
                    None => true,
                    Some((d, _)) => dist < *d,
                };
                if better {
                    best = Some((dist, vec![a, b]));
                }
            }
        }
        let support = best.unwrap().1;
        let mut projected = theta.to_vec();
        project_theta(&mut projected, 1.0, 2);
        let kept: Vec<usize> = (0..3).filter(|&i| projected[i] != 0.0).collect();
        assert_eq!(kept, support);
    }

    #[test]
    fn projection_rejects_bad_spec() {
        let p = NetworkParams::zeros(arch(&[2, 3, 1]));
        assert!(matches!(p.project_to_class(&spec(1.0, 0.5)), Err(Error::InvalidSpec(_))));
        let mut narrow = spec(1.0, 5.0);
        narrow.width = 2.0;
        assert!(p.project_to_class(&narrow).is_err());
    }

    #[test]
    fn statistics() {
        let p = NetworkParams::zeros(arch(&[2, 1]));
        assert_eq!(p.count_nonzero(), 0);
        assert_eq!(p.sup_norm(), 0.0);
        let p = NetworkParams::from_theta(arch(&[2, 1]), vec![0.5, -2.0, 0.0]).unwrap();
        assert_eq!(p.count_nonzero(), 2);
        assert_eq!(p.sup_norm(), 2.0);
    }

    #[test]
    fn json_format() {
        let p = NetworkParams::from_theta(arch(&[2, 1]), vec![0.5, -2.0, 0.0]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"arch":[2,1],"theta":[0.5,-2.0,0.0]}"#);
        let back: NetworkParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<NetworkParams>(r#"{"arch":[2,3],"theta":[]}"#).is_err());
    }

    #[test]
    fn he_uniform_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = NetworkParams::he_uniform(arch(&[3, 100, 100, 1]), &mut rng);
        let w1 = p.weight(0);
        let lim1 = (6.0f64 / 3.0).sqrt();
        assert!(w1.iter().all(|v| v.abs() <= lim1));
        let lim2 = (6.0f64 / 100.0).sqrt();
        assert!(p.weight(1).iter().all(|v| v.abs() <= lim2));
        assert!(p.bias(0).iter().all(|&v| v == 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn clamped_output_in_range(seed in any::<u64>(), f in 0.01f64..5.0, x in proptest::collection::vec(-3.0f64..3.0, 3)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut p = NetworkParams::he_uniform(arch(&[3, 6, 4, 1]), &mut rng);
                for v in p.theta_mut() { *v *= 3.0; }
                let out = p.forward(&x, Some(f)).unwrap();
                prop_assert!(out.abs() <= f);
            }

            #[test]
            fn affine_scale_covariance(theta in proptest::collection::vec(-5.0f64..5.0, 4), c in 0.0f64..10.0, x in proptest::collection::vec(-3.0f64..3.0, 3)) {
                let a = arch(&[3, 1]);
                let p = NetworkParams::from_theta(a.clone(), theta.clone()).unwrap();
                let scaled = NetworkParams::from_theta(a, theta.iter().map(|v| v * c).collect()).unwrap();
                let lhs = scaled.forward(&x, None).unwrap();
                let rhs = c * p.forward(&x, None).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }

            #[test]
            fn projection_idempotent_and_member(theta in proptest::collection::vec(-4.0f64..4.0, 9), b in 0.1f64..5.0, s in 1.0f64..12.0) {
                let a = arch(&[2, 2, 1]);
                let p = NetworkParams::from_theta(a, theta).unwrap();
                let sp = spec(b, s);
                let once = p.project_to_class(&sp).unwrap();
                let twice = once.project_to_class(&sp).unwrap();
                prop_assert_eq!(&once, &twice);
                prop_assert!(sp.contains(&once));
            }
        }
    }
}
