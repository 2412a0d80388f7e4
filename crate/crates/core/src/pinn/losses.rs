use ndarray::{Array1, Array2, Zip};

use super::collocation::CollocationSet;
use super::problems::{PdeSpec, Region, Term};
use crate::autodiff::{Activation, DerivRequest, Mlp, Tape};
use crate::error::{Error, Result};
use crate::saddle::{LossEvaluation, LossSet};

struct ConditionData {
    points: Array2<f64>,
    targets: Array1<f64>,
    terms: Vec<Term>,
    request: DerivRequest,
    interior: bool,
}

/// The mean-squared-residual loss of every condition of a problem, over a
/// fixed collocation set, as functions of the network parameters.
pub struct PinnLosses {
    widths: Vec<usize>,
    activation: Activation,
    conditions: Vec<ConditionData>,
    names: Vec<String>,
}

impl PinnLosses {
    pub fn new(spec: &PdeSpec, colloc: &CollocationSet, widths: &[usize], activation: Activation) -> Result<Self> {
        spec.validate()?;
        if widths.first() != Some(&spec.dim()) || widths.last() != Some(&1) {
            return Err(Error::invalid(format!(
                "network widths {widths:?} must start with input dimension {} and end with 1",
                spec.dim()
            )));
        }
        let mut conditions = Vec::with_capacity(spec.conditions.len());
        for c in &spec.conditions {
            let points = match &c.region {
                Region::Interior => colloc.interior.clone(),
                Region::Boundary(faces) => colloc.boundary_on(faces),
            };
            if points.nrows() == 0 {
                return Err(Error::invalid(format!("no collocation points for condition '{}'", c.name)));
            }
            if points.ncols() != spec.dim() {
                return Err(Error::DimensionMismatch { expected: spec.dim(), got: points.ncols() });
            }
            let targets = points.rows().into_iter().map(|r| (c.target)(r.as_slice().expect("standard layout"))).collect();
            let request = DerivRequest::new(spec.dim(), c.terms.iter().map(|t| t.deriv))?;
            conditions.push(ConditionData { points, targets, terms: c.terms.clone(), request, interior: c.is_interior() });
        }
        Ok(Self {
            widths: widths.to_vec(),
            activation,
            conditions,
            names: spec.conditions.iter().map(|c| c.name.clone()).collect(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Value and parameter gradient of each loss for `net`.
    pub fn loss_terms(&self, net: &Mlp) -> Result<Vec<(f64, Vec<f64>)>> {
        if net.widths() != self.widths.as_slice() {
            return Err(Error::invalid(format!("network widths {:?} differ from {:?}", net.widths(), self.widths)));
        }
        self.conditions.iter().map(|c| condition_loss(net, c)).collect()
    }

    /// Residual vector of every condition, without gradients.
    pub fn residuals(&self, net: &Mlp) -> Result<Vec<Array1<f64>>> {
        self.conditions
            .iter()
            .map(|c| {
                let (jets, _) = Tape::record(net, c.points.view(), &c.request)?;
                Ok(residual(&jets, c))
            })
            .collect()
    }
}

fn residual(jets: &crate::autodiff::Jets, c: &ConditionData) -> Array1<f64> {
    let mut r = -&c.targets;
    for t in &c.terms {
        let channel = jets.get(t.deriv).expect("requested channel");
        Zip::from(&mut r).and(channel.column(0)).for_each(|r, &v| *r += t.coeff * v);
    }
    r
}

fn condition_loss(net: &Mlp, c: &ConditionData) -> Result<(f64, Vec<f64>)> {
    let (jets, tape) = Tape::record(net, c.points.view(), &c.request)?;
    let r = residual(&jets, c);
    let n = r.len() as f64;
    let value = r.iter().map(|v| v * v).sum::<f64>() / n;
    let mut cot = tape.zero_cotangent();
    for t in &c.terms {
        let mut slot = cot.get_mut(t.deriv).expect("requested channel");
        let scale = 2.0 * t.coeff / n;
        Zip::from(slot.column_mut(0)).and(&r).for_each(|s, &ri| *s += scale * ri);
    }
    Ok((value, tape.backward(net, &cot)?))
}

impl LossSet for PinnLosses {
    fn len(&self) -> usize {
        self.conditions.len()
    }

    fn dim(&self) -> usize {
        Mlp::param_count_for(&self.widths)
    }

    fn evaluate(&self, theta: &[f64]) -> Result<LossEvaluation> {
        let net = Mlp::from_params(&self.widths, self.activation, theta.to_vec())?;
        let (values, gradients) = self.loss_terms(&net)?.into_iter().unzip();
        Ok(LossEvaluation { values, gradients })
    }

    fn residual_mask(&self) -> Option<Vec<bool>> {
        Some(self.conditions.iter().map(|c| c.interior).collect())
    }
}

/// One `(value, parameter gradient)` pair per condition of `spec`.
pub fn loss_terms(net: &Mlp, spec: &PdeSpec, colloc: &CollocationSet) -> Result<Vec<(f64, Vec<f64>)>> {
    PinnLosses::new(spec, colloc, net.widths(), net.activation())?.loss_terms(net)
}
