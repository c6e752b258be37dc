//! JSON documents: networks, datasets, forged constructions and certificates.
//!
//! Matrices are written row-major. Floats go through serde_json's shortest
//! round-trip formatting, so a write/read cycle is lossless. Non-finite
//! values become `null`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::activations::ActivationSpec;
use crate::certify::{Certificate, Verdict};
use crate::error::{Error, Result};
use crate::forge_piecewise::{Branch, PiecewiseConstruction};
use crate::forge_sigmoid::{self, OneNeuronPoint, SigmoidConstruction};
use crate::forge_smooth::{Lemma2Constants, OutputConditions, SmoothConstruction, Witness};
use crate::network::{Architecture, Dataset, NetworkParams};

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeMismatch(format!("{name} rows have unequal lengths")));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.iter().flatten().copied()))
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed JSON: {e}"))
}

/// Weights and biases without the activation, as stored for witnesses and counterexamples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub arch: Vec<usize>,
    /// one row-major list per layer, output layer last
    pub weights: Vec<Vec<f64>>,
    /// hidden layers only; the output layer has no bias
    pub biases: Vec<Vec<f64>>,
}

impl ParamsDoc {
    pub fn new(params: &NetworkParams) -> Result<Self> {
        let arch = params.architecture()?;
        Ok(Self {
            arch: arch.dims(),
            weights: params.weights.iter().map(row_major).collect(),
            biases: params.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
        })
    }

    pub fn params(&self) -> Result<NetworkParams> {
        let arch = Architecture::from_dims(&self.arch)?;
        let dims = arch.dims();
        if self.weights.len() != dims.len() - 1 || self.biases.len() != dims.len() - 2 {
            return Err(Error::ShapeMismatch(format!(
                "arch {:?} needs {} weight and {} bias lists, got {} and {}",
                self.arch,
                dims.len() - 1,
                dims.len() - 2,
                self.weights.len(),
                self.biases.len()
            )));
        }
        let weights = self
            .weights
            .iter()
            .zip(dims.windows(2))
            .enumerate()
            .map(|(l, (w, d))| {
                if w.len() != d[0] * d[1] {
                    return Err(Error::ShapeMismatch(format!("layer {} weights: expected {}x{}, got {} numbers", l + 1, d[1], d[0], w.len())));
                }
                Ok(DMatrix::from_row_slice(d[1], d[0], w))
            })
            .collect::<Result<Vec<_>>>()?;
        let biases = self
            .biases
            .iter()
            .zip(&dims[1..])
            .enumerate()
            .map(|(l, (b, &d))| {
                if b.len() != d {
                    return Err(Error::ShapeMismatch(format!("layer {} bias: expected {d}, got {}", l + 1, b.len())));
                }
                Ok(DVector::from_column_slice(b))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NetworkParams { weights, biases })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    #[serde(flatten)]
    pub params: ParamsDoc,
    pub activation: ActivationSpec,
}

impl NetworkDoc {
    pub fn new(params: &NetworkParams, spec: &ActivationSpec) -> Result<Self> {
        Ok(Self { params: ParamsDoc::new(params)?, activation: spec.clone() })
    }

    /// The anchor is not validated: evaluating a network does not need one.
    pub fn decode(&self) -> Result<(NetworkParams, ActivationSpec)> {
        Ok((self.params.params()?, self.activation.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetDoc {
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
}

impl DatasetDoc {
    pub fn new(data: &Dataset) -> Self {
        Self { x: rows(&data.x), y: rows(&data.y) }
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(from_rows("X", &self.x)?, from_rows("Y", &self.y)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessDoc {
    pub params: ParamsDoc,
    pub v: f64,
    pub epsilon: f64,
    pub direction: usize,
    pub sign_factor: f64,
    pub s: f64,
    pub m_norm_sq: f64,
    pub gap_analytic: f64,
    pub gap_direct: f64,
    pub gap_relative_error: f64,
    pub loss_at_witness: f64,
}

impl WitnessDoc {
    pub fn new(w: &Witness) -> Result<Self> {
        Ok(Self {
            params: ParamsDoc::new(&w.params)?,
            v: w.v,
            epsilon: w.epsilon,
            direction: w.direction,
            sign_factor: w.sign_factor,
            s: w.s,
            m_norm_sq: w.m_norm_sq,
            gap_analytic: w.gap_analytic,
            gap_direct: w.gap_direct,
            gap_relative_error: w.relative_gap_error(),
            loss_at_witness: w.loss_at_witness,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneNeuronDoc {
    pub v: f64,
    pub w: f64,
    pub b: f64,
    pub h_matrix: [[f64; 2]; 2],
    pub h_min_eig: f64,
    pub gradient_residual: f64,
}

impl OneNeuronDoc {
    pub fn new(p: &OneNeuronPoint) -> Self {
        let h = &p.h_matrix;
        Self {
            v: p.v,
            w: p.w,
            b: p.b,
            h_matrix: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
            h_min_eig: forge_sigmoid::eigen2(h).0,
            gradient_residual: p.gradient_residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma3Doc {
    pub holds: bool,
    pub max_equality_residual: f64,
    pub min_margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Smooth,
    Sigmoid,
    Piecewise,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::Sigmoid => "sigmoid",
            Self::Piecewise => "piecewise",
        }
    }
}

/// Everything a forge produced, in one document. Sections that do not apply
/// to the pipeline are omitted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bundle {
    pub pipeline: Pipeline,
    pub network: NetworkDoc,
    pub dataset: DatasetDoc,
    pub loss_at_theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<Lemma2Constants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margins: Option<OutputConditions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma3: Option<Lemma3Doc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_neuron: Option<OneNeuronDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    /// [rank([X; 1; Y]), rank([X; 1])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_witness: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_margin: Option<f64>,
}

impl Bundle {
    fn bare(pipeline: Pipeline, params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, loss: f64) -> Result<Self> {
        Ok(Self {
            pipeline,
            network: NetworkDoc::new(params, spec)?,
            dataset: DatasetDoc::new(data),
            loss_at_theta: loss,
            witness: None,
            constants: None,
            margins: None,
            alphas: None,
            lemma3: None,
            one_neuron: None,
            branch: None,
            rank_witness: None,
            projection_residual: None,
            segment_margin: None,
        })
    }

    pub fn smooth(c: &SmoothConstruction) -> Result<Self> {
        Ok(Self {
            witness: Some(WitnessDoc::new(&c.witness)?),
            constants: Some(c.constants.clone()),
            margins: Some(c.conditions.clone()),
            alphas: Some(rows(&c.alphas)),
            ..Self::bare(Pipeline::Smooth, &c.params, &c.dataset, &c.spec, c.loss_at_theta)?
        })
    }

    /// A sigmoid network with its Lemma-3 check and, when available, the
    /// merged one-neuron point it was split from.
    pub fn sigmoid(params: &NetworkParams, data: &Dataset, loss: f64, one_neuron: Option<&OneNeuronPoint>) -> Result<Self> {
        let cert = forge_sigmoid::check_lemma3(params, data)?;
        Ok(Self {
            lemma3: Some(Lemma3Doc { holds: cert.holds(), max_equality_residual: cert.max_equality_residual(), min_margin: cert.min_margin() }),
            one_neuron: one_neuron.map(OneNeuronDoc::new),
            ..Self::bare(Pipeline::Sigmoid, params, data, &forge_sigmoid::sigmoid_spec(), loss)?
        })
    }

    pub fn sigmoid_construction(c: &SigmoidConstruction) -> Result<Self> {
        let one = forge_sigmoid::merge_to_one_neuron(c).ok();
        Ok(Self { alphas: Some(vec![c.alphas.clone()]), ..Self::sigmoid(&c.params(), &c.dataset(), c.loss(), one.as_ref())? })
    }

    pub fn piecewise(c: &PiecewiseConstruction) -> Result<Self> {
        Ok(Self {
            branch: Some(c.branch),
            rank_witness: Some([c.rank_witness.0, c.rank_witness.1]),
            projection_residual: Some(c.projection_residual),
            segment_margin: Some(c.segment_margin),
            ..Self::bare(Pipeline::Piecewise, &c.params, &c.dataset, &c.spec, c.loss_at_theta)?
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleDoc {
    pub loss: f64,
    pub radius: f64,
    pub params: ParamsDoc,
}

/// Serialized certificate. The verdict is numerical evidence, not a proof.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateDoc {
    pub evidence: &'static str,
    pub verdict: Verdict,
    pub suboptimal: bool,
    pub loss: f64,
    pub gradient_residual: f64,
    pub certified_radius: f64,
    pub samples_tested: usize,
    pub samples_requested: usize,
    pub min_loss_delta: f64,
    pub halfspace_min_margin: f64,
    pub hessian_min_eig: Option<f64>,
    pub radius_cap: Option<f64>,
    pub witness_gap: Option<f64>,
    pub baseline_loss: Option<f64>,
    pub counterexample: Option<CounterexampleDoc>,
}

impl CertificateDoc {
    pub fn new(c: &Certificate) -> Result<Self> {
        Ok(Self {
            evidence: "sampled numerical evidence, not a formal proof",
            verdict: c.verdict,
            suboptimal: c.suboptimal(),
            loss: c.loss,
            gradient_residual: c.gradient_residual,
            certified_radius: c.certified_radius,
            samples_tested: c.samples_tested,
            samples_requested: c.samples_requested,
            min_loss_delta: c.min_loss_delta,
            halfspace_min_margin: c.halfspace_min_margin,
            hessian_min_eig: c.hessian_min_eig,
            radius_cap: c.radius_cap,
            witness_gap: c.witness_gap,
            baseline_loss: c.baseline_loss,
            counterexample: c
                .counterexample
                .as_ref()
                .map(|x| Ok::<_, Error>(CounterexampleDoc { loss: x.loss, radius: x.radius, params: ParamsDoc::new(&x.params)? }))
                .transpose()?,
        })
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Read a network from either a bare network document or a bundle.
pub fn load_network(json: &str) -> Result<(NetworkParams, ActivationSpec)> {
    let mut v: Value = serde_json::from_str(json).map_err(parse_err)?;
    let v = v.get_mut("network").map(Value::take).unwrap_or(v);
    serde_json::from_value::<NetworkDoc>(v).map_err(parse_err)?.decode()
}

/// Read a dataset from either a bare dataset document or a bundle.
pub fn load_dataset(json: &str) -> Result<Dataset> {
    let mut v: Value = serde_json::from_str(json).map_err(parse_err)?;
    let v = v.get_mut("dataset").map(Value::take).unwrap_or(v);
    serde_json::from_value::<DatasetDoc>(v).map_err(parse_err)?.dataset()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::{select_anchor, ActivationKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> NetworkParams {
        NetworkParams {
            weights: vec![DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), DMatrix::from_row_slice(1, 2, &[0.1, -0.2])],
            biases: vec![DVector::from_vec(vec![0.5, -0.5])],
        }
    }

    #[test]
    fn weights_are_row_major() {
        let doc = ParamsDoc::new(&net()).unwrap();
        assert_eq!(doc.arch, vec![3, 2, 1]);
        assert_eq!(doc.weights[0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(doc.biases, vec![vec![0.5, -0.5]]);
    }

    #[test]
    fn network_and_dataset_round_trip() {
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let mut p = net();
        p.weights[0][(1, 2)] = 0.1 + 0.2;
        let json = to_json(&NetworkDoc::new(&p, &spec).unwrap()).unwrap();
        let (back, s) = load_network(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(s, spec);

        let d = Dataset::new(DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 1.0 / 3.0]), DMatrix::from_row_slice(1, 3, &[7.0, 8.0, 9.0])).unwrap();
        let json = to_json(&DatasetDoc::new(&d)).unwrap();
        assert!(json.contains("\"X\""));
        assert_eq!(load_dataset(&json).unwrap(), d);
    }

    #[test]
    fn bundle_is_loadable_as_network_and_dataset() {
        let x = crate::data::gen_data(2, 8, 3, crate::data::Distribution::Normal, crate::data::Requirement::Generic).unwrap();
        let arch = Architecture::new(2, vec![4, 3], 1).unwrap();
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let c = crate::forge_smooth::forge_theorem1(&x, &arch, &spec, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let json = to_json(&Bundle::smooth(&c).unwrap()).unwrap();
        assert!(json.contains("\"witness\"") && json.contains("\"constants\"") && !json.contains("\"branch\""));
        assert_eq!(load_network(&json).unwrap().0, c.params);
        assert_eq!(load_dataset(&json).unwrap(), c.dataset);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(load_network("{").is_err());
        let bad = r#"{"arch":[2,2,1],"weights":[[1,2,3],[1,2]],"biases":[[0,0]],"activation":{"kind":"tanh","anchor":0.5,"delta":0.5}}"#;
        assert!(matches!(load_network(bad), Err(Error::ShapeMismatch(_))));
        assert!(matches!(load_dataset(r#"{"X":[[1,2],[3]],"Y":[[1,2]]}"#), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn non_finite_numbers_become_null() {
        let json = to_json(&serde_json::json!({ "v": f64::INFINITY })).unwrap();
        assert!(json.contains("null"));
    }
}
