//! JSON layouts for series, systems, normal forms and reduction reports.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::BivariateSeries;
use crate::ensemble::space::{ParamSpace, SpaceJson};
use crate::ensemble::system::{EnsembleSystem, Entry, FieldTag, MatrixField};
use crate::error::{Error, Result};
use crate::reduction::{NormalForm, PipelineReport, ReductionCase, Route, SliceWitness};
use crate::witness::CertificateJson;

type C64 = Complex64;

/// Series literal: a constant, a list of `[k, ℓ, [re, im]]` terms, or
/// `{"terms": [...], "radius": r}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeriesJson {
    Constant(f64),
    Terms(Vec<(u32, u32, [f64; 2])>),
    Object {
        terms: Vec<(u32, u32, [f64; 2])>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
}

impl SeriesJson {
    pub fn to_series(&self) -> Result<BivariateSeries> {
        let build = |terms: &[(u32, u32, [f64; 2])], radius: f64| {
            BivariateSeries::new(terms.iter().map(|&(k, l, c)| (k, l, C64::new(c[0], c[1]))), radius)
        };
        match self {
            SeriesJson::Constant(c) => BivariateSeries::new([(0, 0, C64::new(*c, 0.0))], f64::INFINITY),
            SeriesJson::Terms(t) => build(t, f64::INFINITY),
            SeriesJson::Object { terms, radius } => build(terms, radius.unwrap_or(f64::INFINITY)),
        }
    }

    pub fn from_series(s: &BivariateSeries) -> Self {
        let terms = s.terms().map(|(k, l, c)| (k, l, [c.re, c.im])).collect();
        let radius = s.radius().is_finite().then_some(s.radius());
        SeriesJson::Object { terms, radius }
    }
}

/// Matrix entry: a series literal or `{"samples": [[re, im], ...]}` with one
/// value per grid node.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EntryJson {
    Samples { samples: Vec<[f64; 2]> },
    Series(SeriesJson),
}

impl EntryJson {
    fn to_entry(&self) -> Result<Entry> {
        Ok(match self {
            EntryJson::Samples { samples } => {
                Entry::Samples(Arc::new(samples.iter().map(|c| C64::new(c[0], c[1])).collect()))
            }
            EntryJson::Series(s) => Entry::Series(s.to_series()?),
        })
    }
}

fn default_field() -> FieldTag {
    FieldTag::Complex
}

/// `ẋ = A(σ)x + B(σ)u` with row-major entry lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemJson {
    pub space: SpaceJson,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<EntryJson>,
    #[serde(rename = "B")]
    pub b: Vec<EntryJson>,
    #[serde(default = "default_field")]
    pub field: FieldTag,
    /// Optional seed point for the eigenvalue branch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<f64>>,
}

impl SystemJson {
    pub fn build(&self, radial: Option<usize>, angular: Option<usize>) -> Result<EnsembleSystem> {
        let space: ParamSpace = self.space.build(radial, angular)?;
        let conv = |v: &[EntryJson]| v.iter().map(EntryJson::to_entry).collect::<Result<Vec<_>>>();
        let a = MatrixField::from_entries(self.n, self.n, conv(&self.a)?)?;
        let b = MatrixField::from_entries(self.n, self.m, conv(&self.b)?)?;
        EnsembleSystem::new(space, a, b, self.field)
    }
}

/// Normal form `ẋ = μx + Σ b_i(μ)u_i` on `D[R]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFormJson {
    #[serde(rename = "R")]
    pub r: f64,
    pub b: Vec<SeriesJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fit_residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_trip: Option<f64>,
    #[serde(rename = "a_J", default, skip_serializing_if = "Option::is_none")]
    pub a_j: Option<[f64; 2]>,
    #[serde(rename = "sigma_J", default, skip_serializing_if = "Option::is_none")]
    pub sigma_j: Option<Vec<f64>>,
}

impl NormalFormJson {
    pub fn inputs(&self) -> Result<Vec<BivariateSeries>> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!("R must be positive, got {}", self.r)));
        }
        self.b.iter().map(SeriesJson::to_series).collect()
    }
}

impl From<&NormalForm> for NormalFormJson {
    fn from(nf: &NormalForm) -> Self {
        NormalFormJson {
            r: nf.r,
            b: nf.b.iter().map(SeriesJson::from_series).collect(),
            fit_residuals: nf.fit_residuals.clone(),
            round_trip: Some(nf.round_trip),
            a_j: Some([nf.a_j.re, nf.a_j.im]),
            sigma_j: Some(nf.sigma_j.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    pub n: usize,
    pub case: String,
    pub k_a: usize,
    pub k_g: usize,
    pub seed_lambda: Option<[f64; 2]>,
    pub region: SpaceJson,
    pub lower_left: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceJson {
    pub probe_power: u32,
    pub g_norm: f64,
    pub max_ratio: f64,
    pub a_variation: f64,
    pub slice_ranks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartJson {
    pub origin: [f64; 2],
    pub along: [f64; 2],
    pub across: [f64; 2],
    pub half_width: f64,
}

impl From<&SliceWitness> for SliceJson {
    fn from(w: &SliceWitness) -> Self {
        SliceJson {
            probe_power: w.probe_power,
            g_norm: w.g_norm,
            max_ratio: w.max_ratio,
            a_variation: w.a_variation,
            slice_ranks: w.slice_ranks.clone(),
            chart: w.chart.as_ref().map(|c| ChartJson {
                origin: c.origin,
                along: c.along,
                across: c.across,
                half_width: c.half_width,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    /// `"normal_form"` or `"slice_witness"`.
    pub route: String,
    pub levels: Vec<LevelJson>,
    /// Set when the branch region is smaller than the input space.
    pub region_shrunk: bool,
    pub pairs: usize,
    #[serde(rename = "k_J")]
    pub k_j: usize,
    #[serde(rename = "sigma_J")]
    pub sigma_j: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceJson>,
    /// Soundness of the certificate or verification of the slice witness.
    pub verified: bool,
}

impl ReportJson {
    pub fn new(rep: &PipelineReport, input_space: &ParamSpace) -> Self {
        let levels: Vec<LevelJson> = rep
            .reduction
            .levels
            .iter()
            .map(|l| LevelJson {
                n: l.n,
                case: match l.case {
                    ReductionCase::Scalar => "scalar",
                    ReductionCase::Diagonal => "diagonal",
                    ReductionCase::Corner => "corner",
                }
                .into(),
                k_a: l.alg_mult,
                k_g: l.geo_mult,
                seed_lambda: l.seed_lambda.is_finite().then_some([l.seed_lambda.re, l.seed_lambda.im]),
                region: SpaceJson::from_space(&l.region),
                lower_left: l.lower_left,
            })
            .collect();
        let region_shrunk = rep
            .reduction
            .levels
            .iter()
            .any(|l| l.case != ReductionCase::Scalar && SpaceJson::from_space(&l.region) != SpaceJson::from_space(input_space));
        let mut out = ReportJson {
            route: String::new(),
            levels,
            region_shrunk,
            pairs: rep.reduction.pairs.len(),
            k_j: rep.jacobian.k_j,
            sigma_j: rep.jacobian.sigma_j.clone(),
            normal_form: None,
            certificate: None,
            slice: None,
            verified: false,
        };
        match &rep.route {
            Route::NormalForm { normal_form, certificate } => {
                out.route = "normal_form".into();
                out.normal_form = Some(normal_form.into());
                out.certificate = Some(certificate.into());
                out.verified = certificate.is_sound();
            }
            Route::Slice(w) => {
                out.route = "slice_witness".into();
                out.slice = Some(w.into());
                out.verified = true;
            }
        }
        out
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_literals() {
        let s: SeriesJson = serde_json::from_str("[[0, 1, [1.0, 0.0]], [2, 0, [0.0, -0.5]]]").unwrap();
        let s = s.to_series().unwrap();
        assert_eq!(s.coeff(0, 1), C64::new(1.0, 0.0));
        assert_eq!(s.coeff(2, 0), C64::new(0.0, -0.5));
        assert!(s.radius().is_infinite());
        let o: SeriesJson = serde_json::from_str(r#"{"terms": [[1, 0, [1, 0]]], "radius": 2.0}"#).unwrap();
        assert_eq!(o.to_series().unwrap().radius(), 2.0);
        let c: SeriesJson = serde_json::from_str("3.5").unwrap();
        assert_eq!(c.to_series().unwrap(), BivariateSeries::constant(C64::new(3.5, 0.0)));
        assert!(serde_json::from_str::<SeriesJson>(r#"{"terms": 1}"#).is_err());
    }

    #[test]
    fn series_round_trip() {
        let s = BivariateSeries::new([(1, 2, C64::new(0.1, 1.0 / 3.0)), (0, 0, C64::new(-2.0, 0.0))], 1.5).unwrap();
        let text = serde_json::to_string(&SeriesJson::from_series(&s)).unwrap();
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_series().unwrap(), s);
    }

    #[test]
    fn system_from_json() {
        let text = r#"{
            "space": {"kind": "disk", "R": 1.0, "nodes": [8, 16]},
            "n": 1, "m": 1,
            "A": [[[1, 0, [1, 0]]]],
            "B": [1.0]
        }"#;
        let sys: SystemJson = serde_json::from_str(text).unwrap();
        let sys = sys.build(None, None).unwrap();
        assert_eq!((sys.n, sys.m, sys.space.len()), (1, 1, 128));
        let p = sys.space.grid.points[5].clone();
        let a = sys.a.eval_point(&p).unwrap()[(0, 0)];
        assert!((a - C64::new(p[0], p[1])).norm() < 1e-15);
    }

    #[test]
    fn sampled_entries_and_dimension_checks() {
        let text = r#"{
            "space": {"kind": "interval", "a": 0, "b": 1, "nodes": 2},
            "n": 1, "m": 1,
            "A": [{"samples": [[0, 0], [1, 0]]}],
            "B": [1.0]
        }"#;
        let sys: SystemJson = serde_json::from_str(text).unwrap();
        assert!(sys.build(None, None).is_ok());
        let bad = text.replace("\"m\": 1", "\"m\": 2");
        let sys: SystemJson = serde_json::from_str(&bad).unwrap();
        assert!(matches!(sys.build(None, None), Err(Error::Dimension(_))));
    }
}
