//! Scalar-curvature weight configurations `(d, W, A_w, E, λ)`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_geometry::{affine_dim, JForm, QVec};
use crate::rational::{fmt_rat, int, parse_rat, to_f64, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    TypeI,
    TypeII,
    TypeIII,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    pub entries: Vec<i64>,
    pub kind: WeightKind,
}

impl WeightVector {
    pub fn to_qvec(&self) -> QVec {
        self.entries.iter().map(|&x| int(x)).collect()
    }

    /// The weight with a zero appended in the soliton-potential slot.
    pub fn extended(&self) -> QVec {
        let mut v = self.to_qvec();
        v.push(Rat::zero());
        v
    }
}

/// Assigns the weight type from the pattern of nonzero entries.
pub fn classify_weight(w: &[i64]) -> WeightVector {
    let mut nz: Vec<i64> = w.iter().copied().filter(|&x| x != 0).collect();
    nz.sort_unstable();
    let kind = match nz.as_slice() {
        [-1] => WeightKind::TypeI,
        [-1, -1, 1] => WeightKind::TypeII,
        [-2, 1] => WeightKind::TypeIII,
        _ => WeightKind::Other,
    };
    WeightVector {
        entries: w.to_vec(),
        kind,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub dims: Vec<u64>,
    pub weights: Vec<(WeightVector, Rat)>,
    pub e: Rat,
    pub lambda: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub hull_dim: usize,
    pub full_measure: bool,
    /// 1-based coordinate positions in which every weight vanishes.
    pub uncovered_coordinates: Vec<usize>,
    /// Weights not of type I, II or III.
    pub other_kinds: Vec<Vec<i64>>,
}

impl Configuration {
    pub fn new(dims: Vec<u64>, weights: Vec<(Vec<i64>, Rat)>, e: Rat, lambda: Rat) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Config(
                "dims must be nonempty positive integers".into(),
            ));
        }
        let r = dims.len();
        let mut ws: Vec<(WeightVector, Rat)> = Vec::with_capacity(weights.len());
        for (w, a) in weights {
            if w.len() != r {
                return Err(Error::Dimension {
                    expected: r,
                    got: w.len(),
                });
            }
            if a.is_zero() {
                return Err(Error::Config(format!("zero coefficient for weight {w:?}")));
            }
            if ws.iter().any(|(v, _)| v.entries == w) {
                return Err(Error::Config(format!("duplicate weight {w:?}")));
            }
            ws.push((classify_weight(&w), a));
        }
        Ok(Configuration {
            dims,
            weights: ws,
            e,
            lambda,
        })
    }

    pub fn r(&self) -> usize {
        self.dims.len()
    }

    pub fn n(&self) -> u64 {
        self.dims.iter().sum()
    }

    pub fn jform(&self) -> JForm {
        JForm::new(&self.dims).expect("validated dims")
    }

    pub fn d_ext(&self) -> QVec {
        self.jform().d_ext()
    }

    pub fn is_steady(&self) -> bool {
        self.lambda.is_zero()
    }

    /// `A_w` for an extended or ambient weight vector, if present.
    pub fn coefficient(&self, w: &[Rat]) -> Option<&Rat> {
        let r = self.r();
        if w.len() == r + 1 && !w[r].is_zero() {
            return None;
        }
        self.weights
            .iter()
            .find(|(v, _)| v.entries.iter().zip(w).all(|(&a, b)| int(a) == *b))
            .map(|(_, a)| a)
    }

    /// Extended weights `W̃ = W ∪ {0}` with a zero extended slot.
    pub fn extended_weights_with_zero(&self) -> Vec<QVec> {
        let mut out = vec![vec![Rat::zero(); self.r() + 1]];
        out.extend(self.weights.iter().map(|(w, _)| w.extended()));
        out
    }

    pub fn validate(&self) -> MeasureReport {
        let r = self.r();
        let pts: Vec<QVec> = self.weights.iter().map(|(w, _)| w.to_qvec()).collect();
        let hull_dim = affine_dim(&pts);
        let uncovered_coordinates = (0..r)
            .filter(|&i| self.weights.iter().all(|(w, _)| w.entries[i] == 0))
            .map(|i| i + 1)
            .collect();
        let other_kinds = self
            .weights
            .iter()
            .filter(|(w, _)| w.kind == WeightKind::Other)
            .map(|(w, _)| w.entries.clone())
            .collect();
        MeasureReport {
            hull_dim,
            full_measure: hull_dim + 1 == r,
            uncovered_coordinates,
            other_kinds,
        }
    }

    /// `S = Σ A_w e^{w·q}` in double precision.
    pub fn scalar_curvature(&self, q: &[f64]) -> f64 {
        self.weights
            .iter()
            .map(|(w, a)| {
                let x: f64 = w
                    .entries
                    .iter()
                    .zip(q)
                    .map(|(&wi, qi)| wi as f64 * qi)
                    .sum();
                to_f64(a) * x.exp()
            })
            .sum()
    }

    pub fn to_json(&self) -> ConfigJson {
        ConfigJson {
            r: self.r(),
            dims: self.dims.clone(),
            weights: self
                .weights
                .iter()
                .map(|(w, a)| WeightJson {
                    vec: w.entries.clone(),
                    a: fmt_rat(a),
                })
                .collect(),
            e: fmt_rat(&self.e),
            lambda: fmt_rat(&self.lambda),
        }
    }

    pub fn from_json(j: &ConfigJson) -> Result<Self> {
        if j.dims.len() != j.r {
            return Err(Error::Schema(format!(
                "r = {} but {} dims given",
                j.r,
                j.dims.len()
            )));
        }
        let weights = j
            .weights
            .iter()
            .map(|w| Ok((w.vec.clone(), parse_rat(&w.a)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            j.dims.clone(),
            weights,
            parse_rat(&j.e)?,
            parse_rat(&j.lambda)?,
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ConfigJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_json(&j)
    }

    pub fn with_e(&self, e: Rat) -> Self {
        Configuration { e, ..self.clone() }
    }

    pub fn with_lambda(&self, lambda: Rat) -> Self {
        Configuration {
            lambda,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub vec: Vec<i64>,
    #[serde(rename = "A")]
    pub a: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigJson {
    pub r: usize,
    pub dims: Vec<u64>,
    pub weights: Vec<WeightJson>,
    #[serde(rename = "E")]
    pub e: String,
    pub lambda: String,
}

/// Whether a catalog entry is searched with constant or polynomial coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    Constant,
    Polynomial,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub config: Configuration,
    pub mode: CoefficientMode,
    /// Number of superpotentials the classification predicts.
    pub expected: usize,
    /// Negative controls are not part of the classification list.
    pub classified: bool,
}

#[allow(clippy::too_many_arguments)]
fn entry(
    name: &'static str,
    description: &'static str,
    dims: &[u64],
    weights: &[(&[i64], Rat)],
    e: Rat,
    lambda: Rat,
    mode: CoefficientMode,
    expected: usize,
    classified: bool,
) -> CatalogEntry {
    let config = Configuration::new(
        dims.to_vec(),
        weights
            .iter()
            .map(|(w, a)| (w.to_vec(), a.clone()))
            .collect(),
        e,
        lambda,
    )
    .expect("catalog entries are valid");
    CatalogEntry {
        name,
        description,
        config,
        mode,
        expected,
        classified,
    }
}

/// Built-in configurations: the classified cases with test defaults, and negative controls.
pub fn builtin_catalog() -> Vec<CatalogEntry> {
    use crate::rational::rat;
    use CoefficientMode::*;
    vec![
        entry(
            "bryant2",
            "d=(1), W empty; 2-dimensional Bryant soliton, E=1",
            &[1],
            &[],
            int(1),
            int(0),
            Constant,
            1,
            true,
        ),
        entry(
            "bryant5",
            "d=(4), W={(-1)}, A=n(n-1)=12; 5-dimensional Bryant soliton, E=1",
            &[4],
            &[(&[-1], int(12))],
            int(1),
            int(0),
            Constant,
            1,
            true,
        ),
        entry(
            "warped-2x2",
            "d=(2,2), W={(-1,0),(0,-1)}, A=2 each; product of two round 2-spheres, E=1",
            &[2, 2],
            &[(&[-1, 0], int(2)), (&[0, -1], int(2))],
            int(1),
            int(0),
            Constant,
            1,
            true,
        ),
        entry(
            "bbc-r2",
            "Berard Bergery-Calabi ansatz r=2, d=(1,2), A_(0,-1)=4, A_(1,-2)=-1/2, E=1",
            &[1, 2],
            &[(&[0, -1], int(4)), (&[1, -2], rat(-1, 2))],
            int(1),
            int(0),
            Constant,
            1,
            true,
        ),
        entry(
            "bbc-r3",
            "Berard Bergery-Calabi ansatz r=3, d=(1,2,4), A_(0,-1,0)=A_(0,0,-1)=4, A_(1,-2,0)=-1/2, A_(1,0,-2)=-1/4, E=1",
            &[1, 2, 4],
            &[
                (&[0, -1, 0], int(4)),
                (&[0, 0, -1], int(4)),
                (&[1, -2, 0], rat(-1, 2)),
                (&[1, 0, -2], rat(-1, 4)),
            ],
            int(1),
            int(0),
            Constant,
            1,
            true,
        ),
        entry(
            "bbc-case5",
            "Berard Bergery-Calabi ansatz r=3, d=(1,2,2), A_(0,-1,0)=A_(0,0,-1)=4, A_(1,-2,0)=A_(1,0,-2)=-1/2, E=1",
            &[1, 2, 2],
            &[
                (&[0, -1, 0], int(4)),
                (&[0, 0, -1], int(4)),
                (&[1, -2, 0], rat(-1, 2)),
                (&[1, 0, -2], rat(-1, 2)),
            ],
            int(1),
            int(0),
            Constant,
            2,
            true,
        ),
        entry(
            "n1-expanding",
            "n=1, W empty, E=1, lambda=1; polynomial coefficients of degree <= 1 in u",
            &[1],
            &[],
            int(1),
            int(1),
            Polynomial,
            1,
            true,
        ),
        entry(
            "bryant3",
            "negative control: d=(3), W={(-1)}, A=6",
            &[3],
            &[(&[-1], int(6))],
            int(1),
            int(0),
            Constant,
            0,
            false,
        ),
        entry(
            "warped-2x2-expanding",
            "negative control: warped-2x2 data with lambda=1, constant coefficients",
            &[2, 2],
            &[(&[-1, 0], int(2)), (&[0, -1], int(2))],
            int(1),
            int(1),
            Constant,
            0,
            false,
        ),
    ]
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    builtin_catalog().into_iter().find(|e| e.name == name)
}
