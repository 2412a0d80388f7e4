use ndarray::{linalg::general_mat_mul, Array2, ArrayView2, ArrayViewMut2, Axis, Zip};

use super::mlp::Mlp;
use crate::error::{Error, Result};

/// One quantity of the network output at each input point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deriv {
    Value,
    /// `du/dx_j`
    First(usize),
    /// `d2u/dx_j dx_k`; the pair is unordered.
    Second(usize, usize),
}

/// The set of input-derivative channels to carry through a forward pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivRequest {
    dirs: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl DerivRequest {
    /// Collects the channels needed for `derivs`; second derivatives pull in
    /// their first-order directions.
    pub fn new(input_dim: usize, derivs: impl IntoIterator<Item = Deriv>) -> Result<Self> {
        let mut dirs = Vec::new();
        let mut pairs = Vec::new();
        let check = |j: usize| {
            if j < input_dim {
                Ok(j)
            } else {
                Err(Error::DimensionMismatch { expected: input_dim, got: j + 1 })
            }
        };
        for d in derivs {
            match d {
                Deriv::Value => {}
                Deriv::First(j) => dirs.push(check(j)?),
                Deriv::Second(j, k) => {
                    let (j, k) = (check(j.min(k))?, check(j.max(k))?);
                    dirs.extend([j, k]);
                    pairs.push((j, k));
                }
            }
        }
        dirs.sort_unstable();
        dirs.dedup();
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self { dirs, pairs })
    }

    pub fn directions(&self) -> &[usize] {
        &self.dirs
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    fn dir_index(&self, j: usize) -> Option<usize> {
        self.dirs.binary_search(&j).ok()
    }

    fn pair_index(&self, j: usize, k: usize) -> Option<usize> {
        self.pairs.binary_search(&(j.min(k), j.max(k))).ok()
    }
}

/// Batched hyper-dual channels: each matrix is `batch x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jets {
    request: DerivRequest,
    pub value: Array2<f64>,
    pub first: Vec<Array2<f64>>,
    pub second: Vec<Array2<f64>>,
}

impl Jets {
    fn zeros(request: &DerivRequest, rows: usize, cols: usize) -> Self {
        Self {
            request: request.clone(),
            value: Array2::zeros((rows, cols)),
            first: vec![Array2::zeros((rows, cols)); request.dirs.len()],
            second: vec![Array2::zeros((rows, cols)); request.pairs.len()],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.request, self.value.nrows(), self.value.ncols())
    }

    pub fn request(&self) -> &DerivRequest {
        &self.request
    }

    /// Column `output` of channel `d`, one entry per batch point.
    pub fn get(&self, d: Deriv) -> Option<ArrayView2<'_, f64>> {
        match d {
            Deriv::Value => Some(self.value.view()),
            Deriv::First(j) => self.request.dir_index(j).map(|i| self.first[i].view()),
            Deriv::Second(j, k) => self.request.pair_index(j, k).map(|i| self.second[i].view()),
        }
    }

    pub fn get_mut(&mut self, d: Deriv) -> Option<ArrayViewMut2<'_, f64>> {
        match d {
            Deriv::Value => Some(self.value.view_mut()),
            Deriv::First(j) => self.request.dir_index(j).map(|i| self.first[i].view_mut()),
            Deriv::Second(j, k) => self.request.pair_index(j, k).map(|i| self.second[i].view_mut()),
        }
    }

    fn channels(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.value).chain(&self.first).chain(&self.second)
    }

    fn map_channels(&self, mut f: impl FnMut(&Array2<f64>) -> Array2<f64>) -> Self {
        Self {
            request: self.request.clone(),
            value: f(&self.value),
            first: self.first.iter().map(&mut f).collect(),
            second: self.second.iter().map(&mut f).collect(),
        }
    }
}

struct Activated {
    pre: Jets,
    d1: Array2<f64>,
    d2: Array2<f64>,
    d3: Array2<f64>,
}

struct LayerRecord {
    input: Jets,
    activated: Option<Activated>,
}

/// A recorded batched forward pass, ready for one or more reverse sweeps.
pub struct Tape {
    generation: u64,
    widths: Vec<usize>,
    layers: Vec<LayerRecord>,
}

impl Tape {
    /// Runs the forward pass on the rows of `x`, carrying the requested
    /// derivative channels, and returns the output jets with the tape.
    pub fn record(net: &Mlp, x: ArrayView2<'_, f64>, request: &DerivRequest) -> Result<(Jets, Tape)> {
        let d = net.input_dim();
        if x.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.ncols() });
        }
        if let Some(&j) = request.dirs.last() {
            if j >= d {
                return Err(Error::DimensionMismatch { expected: d, got: j + 1 });
            }
        }
        let n = x.nrows();
        let mut h = Jets::zeros(request, n, d);
        h.value.assign(&x);
        for (i, &j) in request.dirs.iter().enumerate() {
            h.first[i].column_mut(j).fill(1.0);
        }

        let last = net.num_layers() - 1;
        let mut layers = Vec::with_capacity(net.num_layers());
        for layer in 0..=last {
            let (w, b) = net.layer(layer);
            let mut z = h.map_channels(|c| c.dot(&w.t()));
            z.value += &b.insert_axis(Axis(0));
            if layer == last {
                layers.push(LayerRecord { input: h, activated: None });
                h = z;
                break;
            }
            let act = net.activation();
            let shape = z.value.raw_dim();
            let mut a0 = Array2::zeros(shape);
            let mut d1 = Array2::zeros(shape);
            let mut d2 = Array2::zeros(shape);
            let mut d3 = Array2::zeros(shape);
            Zip::from(&z.value).and(&mut a0).and(&mut d1).and(&mut d2).and(&mut d3).for_each(
                |&zv, a, s1, s2, s3| {
                    let [v0, v1, v2, v3] = act.derivatives(zv);
                    *a = v0;
                    *s1 = v1;
                    *s2 = v2;
                    *s3 = v3;
                },
            );
            let first: Vec<Array2<f64>> = z.first.iter().map(|zj| zj * &d1).collect();
            let second = request
                .pairs
                .iter()
                .zip(&z.second)
                .map(|(&(j, k), zjk)| {
                    let (zj, zk) = (&z.first[request.dir_index(j).unwrap()], &z.first[request.dir_index(k).unwrap()]);
                    let mut out = zjk * &d1;
                    Zip::from(&mut out).and(&d2).and(zj).and(zk).for_each(|o, &s2, &a, &c| *o += s2 * a * c);
                    out
                })
                .collect();
            let a = Jets { request: request.clone(), value: a0, first, second };
            layers.push(LayerRecord { input: h, activated: Some(Activated { pre: z, d1, d2, d3 }) });
            h = a;
        }
        let tape = Tape { generation: net.generation(), widths: net.widths().to_vec(), layers };
        Ok((h, tape))
    }

    /// Zeroed cotangent with the shape of this tape's outputs.
    pub fn zero_cotangent(&self) -> Jets {
        let input = &self.layers[0].input;
        Jets::zeros(&input.request, input.value.nrows(), *self.widths.last().unwrap())
    }

    /// Gradient of `sum over channels and entries of cotangent * output` with
    /// respect to the network parameters.
    pub fn backward(&self, net: &Mlp, cotangent: &Jets) -> Result<Vec<f64>> {
        if net.generation() != self.generation || net.widths() != self.widths.as_slice() {
            return Err(Error::StaleTape);
        }
        let template = &self.layers[0].input;
        let expected = (template.value.nrows(), *self.widths.last().unwrap());
        if cotangent.request != template.request || cotangent.value.dim() != expected {
            return Err(Error::DimensionMismatch { expected: expected.0 * expected.1, got: cotangent.value.len() });
        }
        let request = &template.request;
        let mut grad = vec![0.0; net.param_count()];
        let mut upstream = cotangent.clone();

        for layer in (0..self.layers.len()).rev() {
            let record = &self.layers[layer];
            let bar_z = match &record.activated {
                None => upstream,
                Some(act) => activation_backward(request, act, &upstream),
            };
            let (w, _) = net.layer(layer);
            let (fan_out, fan_in) = w.dim();
            let start = net.layer_offset(layer);
            let (w_grad, b_grad) = grad[start..start + (fan_in + 1) * fan_out].split_at_mut(fan_in * fan_out);
            let mut w_grad = ArrayViewMut2::from_shape((fan_out, fan_in), w_grad).expect("layer shape");
            for (zc, hc) in bar_z.channels().zip(record.input.channels()) {
                general_mat_mul(1.0, &zc.t(), hc, 1.0, &mut w_grad);
            }
            for (bg, s) in b_grad.iter_mut().zip(bar_z.value.sum_axis(Axis(0))) {
                *bg += s;
            }
            if layer > 0 {
                upstream = bar_z.map_channels(|c| c.dot(&w));
            } else {
                break;
            }
        }
        Ok(grad)
    }
}

/// Pulls a cotangent on activated jets back to the pre-activation jets.
fn activation_backward(request: &DerivRequest, act: &Activated, bar_a: &Jets) -> Jets {
    let z = &act.pre;
    let mut bar_z = bar_a.zeros_like();
    bar_z.value = &bar_a.value * &act.d1;
    for (i, bar_aj) in bar_a.first.iter().enumerate() {
        Zip::from(&mut bar_z.value).and(bar_aj).and(&act.d2).and(&z.first[i]).for_each(|o, &g, &s2, &zj| *o += g * s2 * zj);
        bar_z.first[i] = bar_aj * &act.d1;
    }
    for (p, &(j, k)) in request.pairs.iter().enumerate() {
        let (ij, ik) = (request.dir_index(j).unwrap(), request.dir_index(k).unwrap());
        let g = &bar_a.second[p];
        Zip::from(&mut bar_z.value)
            .and(g)
            .and(&act.d3)
            .and(&z.first[ij])
            .and(&z.first[ik])
            .for_each(|o, &g, &s3, &zj, &zk| *o += g * s3 * zj * zk);
        Zip::from(&mut bar_z.value).and(g).and(&act.d2).and(&z.second[p]).for_each(|o, &g, &s2, &zjk| *o += g * s2 * zjk);
        let scaled = g * &act.d2;
        Zip::from(&mut bar_z.first[ij]).and(&scaled).and(&z.first[ik]).for_each(|o, &s, &zk| *o += s * zk);
        Zip::from(&mut bar_z.first[ik]).and(&scaled).and(&z.first[ij]).for_each(|o, &s, &zj| *o += s * zj);
        bar_z.second[p] = g * &act.d1;
    }
    bar_z
}

/// Reverse-mode gradient of `<upstream, u(x)>` in the parameters.
pub fn grad_params(net: &Mlp, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    if upstream.len() != net.output_dim() {
        return Err(Error::DimensionMismatch { expected: net.output_dim(), got: upstream.len() });
    }
    let xv = ArrayView2::from_shape((1, x.len()), x).expect("row view");
    let (_, tape) = Tape::record(net, xv, &DerivRequest::default())?;
    let mut cot = tape.zero_cotangent();
    cot.value.row_mut(0).assign(&ndarray::ArrayView1::from(upstream));
    tape.backward(net, &cot)
}

/// `du_0/dx_j` for `order == 1` or `d2u_0/dx_j dx_k` for `order == 2`, where
/// `coords = (j, k)` and `u_0` is the first network output.
pub fn input_derivatives(net: &Mlp, x: &[f64], order: u8, coords: (usize, usize)) -> Result<f64> {
    let d = match order {
        1 => Deriv::First(coords.0),
        2 => Deriv::Second(coords.0, coords.1),
        _ => return Err(Error::Unsupported(format!("input derivatives of order {order}"))),
    };
    let request = DerivRequest::new(net.input_dim(), [d])?;
    let xv = ArrayView2::from_shape((1, x.len()), x).expect("row view");
    let (jets, _) = Tape::record(net, xv, &request)?;
    Ok(jets.get(d).expect("requested channel")[[0, 0]])
}
