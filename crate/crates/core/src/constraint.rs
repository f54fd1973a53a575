//! Constraint sets `K = {w : R(w) <= R}` and their Euclidean projections.
//!
//! Four regularizers are supported: none, the l2 ball, the l1 ball, and the
//! (nonconvex) sparsity level set `||w||_0 <= k`. Projections are exact:
//! radial shrink for l2, the sort-based simplex threshold for l1, and
//! keep-the-k-largest-magnitudes for sparsity (a valid Euclidean projection
//! onto the nonconvex set; ties keep the lowest index).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WeightVector;

/// Regularizer family, as named on the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    None,
    L2,
    L1,
    Sparsity,
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ConstraintKind::None),
            "l2" => Ok(ConstraintKind::L2),
            "l1" => Ok(ConstraintKind::L1),
            "sparsity" => Ok(ConstraintKind::Sparsity),
            other => Err(Error::Config(format!(
                "unknown constraint kind {other:?}; expected none|l1|l2|sparsity"
            ))),
        }
    }
}

/// A fully specified constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSet {
    Unconstrained,
    L2Ball { radius: f64 },
    L1Ball { radius: f64 },
    SparsityK { k: usize },
}

impl ConstraintSet {
    pub fn kind(&self) -> ConstraintKind {
        match self {
            ConstraintSet::Unconstrained => ConstraintKind::None,
            ConstraintSet::L2Ball { .. } => ConstraintKind::L2,
            ConstraintSet::L1Ball { .. } => ConstraintKind::L1,
            ConstraintSet::SparsityK { .. } => ConstraintKind::Sparsity,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            ConstraintSet::Unconstrained => Ok(()),
            ConstraintSet::L2Ball { radius } | ConstraintSet::L1Ball { radius } => {
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "ball radius must be positive and finite, got {radius}"
                    )))
                }
            }
            ConstraintSet::SparsityK { k } => {
                if k >= 1 && k <= d {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "sparsity level k = {k} must satisfy 1 <= k <= d = {d}"
                    )))
                }
            }
        }
    }

    /// Regularizer value `R(v)` for this set's `R`.
    pub fn level(&self, v: &WeightVector) -> f64 {
        match self {
            ConstraintSet::Unconstrained => 0.0,
            ConstraintSet::L2Ball { .. } => v.norm_l2(),
            ConstraintSet::L1Ball { .. } => v.norm_l1(),
            ConstraintSet::SparsityK { .. } => v.nnz() as f64,
        }
    }

    /// Membership up to `tol` on the level value (exact for sparsity).
    pub fn contains(&self, v: &WeightVector, tol: f64) -> bool {
        match *self {
            ConstraintSet::Unconstrained => true,
            ConstraintSet::L2Ball { radius } => v.norm_l2() <= radius + tol,
            ConstraintSet::L1Ball { radius } => v.norm_l1() <= radius + tol,
            ConstraintSet::SparsityK { k } => v.nnz() <= k,
        }
    }

    /// Euclidean projection onto the set. Members are returned unchanged
    /// (bitwise), so projecting twice is exactly idempotent.
    pub fn project(&self, v: &WeightVector) -> Result<WeightVector> {
        self.validate(v.d())?;
        if !v.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot project a non-finite vector".into(),
            ));
        }
        let out = match *self {
            ConstraintSet::Unconstrained => v.clone(),
            ConstraintSet::L2Ball { radius } => {
                let norm = v.norm_l2();
                if norm <= radius {
                    v.clone()
                } else {
                    WeightVector(v.0.mapv(|x| x * (radius / norm)))
                }
            }
            ConstraintSet::L1Ball { radius } => {
                if v.norm_l1() <= radius {
                    v.clone()
                } else {
                    WeightVector(project_l1_interior(&v.0, radius))
                }
            }
            ConstraintSet::SparsityK { k } => {
                if v.nnz() <= k {
                    v.clone()
                } else {
                    WeightVector(project_top_k(&v.0, k))
                }
            }
        };
        Ok(out)
    }

    /// The constraint at the natural level `R = R(w*)`.
    pub fn natural_radius(kind: ConstraintKind, w_star: &WeightVector) -> Result<ConstraintSet> {
        match kind {
            ConstraintKind::None => Ok(ConstraintSet::Unconstrained),
            ConstraintKind::L2 => {
                let radius = w_star.norm_l2();
                if radius == 0.0 {
                    return Err(Error::ZeroVector(
                        "cannot anchor an l2 ball at w* = 0".into(),
                    ));
                }
                Ok(ConstraintSet::L2Ball { radius })
            }
            ConstraintKind::L1 => {
                let radius = w_star.norm_l1();
                if radius == 0.0 {
                    return Err(Error::ZeroVector(
                        "cannot anchor an l1 ball at w* = 0".into(),
                    ));
                }
                Ok(ConstraintSet::L1Ball { radius })
            }
            ConstraintKind::Sparsity => {
                let k = w_star.nnz();
                if k == 0 {
                    return Err(Error::ZeroVector(
                        "cannot take the sparsity level of w* = 0".into(),
                    ));
                }
                Ok(ConstraintSet::SparsityK { k })
            }
        }
    }
}

/// Sort-based exact threshold for the l1 ball, assuming `||v||_1 > radius`.
///
/// Finds the largest `rho` with `m_rho > (S_rho - R)/rho` over descending
/// magnitudes `m` and soft-thresholds at `theta = (S_rho - R)/rho`.
fn project_l1_interior(v: &ndarray::Array1<f64>, radius: f64) -> ndarray::Array1<f64> {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (idx, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (idx + 1) as f64;
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// Keeps the `k` largest-magnitude entries (stable, so equal magnitudes keep
/// the lowest index) and zeroes the rest.
fn project_top_k(v: &ndarray::Array1<f64>, k: usize) -> ndarray::Array1<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().partial_cmp(&v[a].abs()).expect("finite"));
    let mut out = ndarray::Array1::zeros(v.len());
    for &i in order.iter().take(k) {
        out[i] = v[i];
    }
    out
}

/// Constraint specification as written in config files and on the CLI:
/// a kind plus a radius that is either `"auto"` (the natural level `R(w*)`)
/// or an explicit number, and likewise for the sparsity level `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    #[serde(default)]
    pub radius: RadiusPolicy,
    #[serde(default)]
    pub k: LevelPolicy,
}

impl ConstraintSpec {
    pub fn unconstrained() -> Self {
        ConstraintSpec {
            kind: ConstraintKind::None,
            radius: RadiusPolicy::Auto,
            k: LevelPolicy::Auto,
        }
    }

    /// Resolves the spec into a concrete set; `w_star` is required whenever a
    /// policy says `"auto"`.
    pub fn resolve(&self, w_star: Option<&WeightVector>) -> Result<ConstraintSet> {
        let need_w = |what: &str| {
            Error::Config(format!(
                "constraint {what} is \"auto\" but the dataset carries no w_star"
            ))
        };
        match self.kind {
            ConstraintKind::None => Ok(ConstraintSet::Unconstrained),
            ConstraintKind::L1 | ConstraintKind::L2 => match self.radius {
                RadiusPolicy::Fixed(radius) => {
                    let set = if self.kind == ConstraintKind::L1 {
                        ConstraintSet::L1Ball { radius }
                    } else {
                        ConstraintSet::L2Ball { radius }
                    };
                    set.validate(usize::MAX)?;
                    Ok(set)
                }
                RadiusPolicy::Auto => {
                    let w = w_star.ok_or_else(|| need_w("radius"))?;
                    ConstraintSet::natural_radius(self.kind, w)
                }
            },
            ConstraintKind::Sparsity => match self.k {
                LevelPolicy::Fixed(k) => Ok(ConstraintSet::SparsityK { k }),
                LevelPolicy::Auto => {
                    let w = w_star.ok_or_else(|| need_w("k"))?;
                    ConstraintSet::natural_radius(self.kind, w)
                }
            },
        }
    }
}

/// `"auto"` or an explicit positive radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "RadiusRepr", into = "RadiusRepr")]
pub enum RadiusPolicy {
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RadiusRepr {
    Text(String),
    Value(f64),
}

impl TryFrom<RadiusRepr> for RadiusPolicy {
    type Error = String;

    fn try_from(raw: RadiusRepr) -> std::result::Result<Self, String> {
        match raw {
            RadiusRepr::Text(s) if s == "auto" => Ok(RadiusPolicy::Auto),
            RadiusRepr::Text(s) => Err(format!("radius must be \"auto\" or a number, got {s:?}")),
            RadiusRepr::Value(v) if v > 0.0 && v.is_finite() => Ok(RadiusPolicy::Fixed(v)),
            RadiusRepr::Value(v) => Err(format!("radius must be positive, got {v}")),
        }
    }
}

impl From<RadiusPolicy> for RadiusRepr {
    fn from(p: RadiusPolicy) -> Self {
        match p {
            RadiusPolicy::Auto => RadiusRepr::Text("auto".into()),
            RadiusPolicy::Fixed(v) => RadiusRepr::Value(v),
        }
    }
}

/// `"auto"` or an explicit sparsity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "LevelRepr", into = "LevelRepr")]
pub enum LevelPolicy {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Text(String),
    Value(usize),
}

impl TryFrom<LevelRepr> for LevelPolicy {
    type Error = String;

    fn try_from(raw: LevelRepr) -> std::result::Result<Self, String> {
        match raw {
            LevelRepr::Text(s) if s == "auto" => Ok(LevelPolicy::Auto),
            LevelRepr::Text(s) => Err(format!("k must be \"auto\" or an integer, got {s:?}")),
            LevelRepr::Value(v) if v >= 1 => Ok(LevelPolicy::Fixed(v)),
            LevelRepr::Value(v) => Err(format!("k must be >= 1, got {v}")),
        }
    }
}

impl From<LevelPolicy> for LevelRepr {
    fn from(p: LevelPolicy) -> Self {
        match p {
            LevelPolicy::Auto => LevelRepr::Text("auto".into()),
            LevelPolicy::Fixed(v) => LevelRepr::Value(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(entries: &[f64]) -> WeightVector {
        WeightVector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn members_project_to_themselves() {
        let sets = [
            ConstraintSet::Unconstrained,
            ConstraintSet::L2Ball { radius: 3.0 },
            ConstraintSet::L1Ball { radius: 3.0 },
            ConstraintSet::SparsityK { k: 2 },
        ];
        let v = wv(&[1.0, -0.5, 0.0]);
        for set in sets {
            assert_eq!(set.project(&v).unwrap(), v, "{set:?}");
        }
    }

    #[test]
    fn l1_projection_pinned_values() {
        let set = ConstraintSet::L1Ball { radius: 2.0 };
        assert_eq!(set.project(&wv(&[3.0, 1.0])).unwrap(), wv(&[2.0, 0.0]));
        assert_eq!(set.project(&wv(&[2.0, 2.0])).unwrap(), wv(&[1.0, 1.0]));
    }

    #[test]
    fn top_k_projection_pinned_values() {
        let set = ConstraintSet::SparsityK { k: 2 };
        assert_eq!(
            set.project(&wv(&[3.0, -1.0, 2.0])).unwrap(),
            wv(&[3.0, 0.0, 2.0])
        );
    }

    #[test]
    fn top_k_ties_keep_lowest_index() {
        let set = ConstraintSet::SparsityK { k: 1 };
        assert_eq!(set.project(&wv(&[2.0, -2.0])).unwrap(), wv(&[2.0, 0.0]));
    }

    #[test]
    fn l2_projection_shrinks_radially() {
        let set = ConstraintSet::L2Ball { radius: 5.0 };
        assert_eq!(set.project(&wv(&[6.0, 8.0])).unwrap(), wv(&[3.0, 4.0]));
    }

    #[test]
    fn zero_projects_to_zero_in_every_ball() {
        let zero = WeightVector::zeros(4);
        for set in [
            ConstraintSet::L2Ball { radius: 0.1 },
            ConstraintSet::L1Ball { radius: 0.1 },
            ConstraintSet::SparsityK { k: 1 },
        ] {
            assert_eq!(set.project(&zero).unwrap(), zero);
        }
    }

    #[test]
    fn natural_radius_pinned_values() {
        let w = wv(&[1.0, -1.0, 0.0]);
        assert_eq!(
            ConstraintSet::natural_radius(ConstraintKind::L1, &w).unwrap(),
            ConstraintSet::L1Ball { radius: 2.0 }
        );
        let w2 = wv(&[3.0, 4.0]);
        assert_eq!(
            ConstraintSet::natural_radius(ConstraintKind::L2, &w2).unwrap(),
            ConstraintSet::L2Ball { radius: 5.0 }
        );
        let mut entries = vec![0.0; 32];
        for e in entries.iter_mut().take(10) {
            *e = 1.0;
        }
        let w3 = wv(&entries);
        assert_eq!(
            ConstraintSet::natural_radius(ConstraintKind::Sparsity, &w3).unwrap(),
            ConstraintSet::SparsityK { k: 10 }
        );
    }

    #[test]
    fn natural_radius_rejects_zero_anchor() {
        let zero = WeightVector::zeros(3);
        for kind in [ConstraintKind::L1, ConstraintKind::L2, ConstraintKind::Sparsity] {
            assert!(matches!(
                ConstraintSet::natural_radius(kind, &zero),
                Err(Error::ZeroVector(_))
            ));
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ConstraintSet::L1Ball { radius: 0.0 }.validate(4).is_err());
        assert!(ConstraintSet::SparsityK { k: 0 }.validate(4).is_err());
        assert!(ConstraintSet::SparsityK { k: 5 }.validate(4).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let text = r#"{"kind":"l1","radius":"auto"}"#;
        let spec: ConstraintSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.kind, ConstraintKind::L1);
        assert_eq!(spec.radius, RadiusPolicy::Auto);
        let text2 = r#"{"kind":"sparsity","k":7}"#;
        let spec2: ConstraintSpec = serde_json::from_str(text2).unwrap();
        assert_eq!(spec2.k, LevelPolicy::Fixed(7));
        let bad = r#"{"kind":"l1","radius":-2.0}"#;
        assert!(serde_json::from_str::<ConstraintSpec>(bad).is_err());
    }

    #[test]
    fn auto_resolution_needs_w_star() {
        let spec: ConstraintSpec = serde_json::from_str(r#"{"kind":"l1"}"#).unwrap();
        assert!(matches!(spec.resolve(None), Err(Error::Config(_))));
        let w = wv(&[1.0, -2.0]);
        assert_eq!(
            spec.resolve(Some(&w)).unwrap(),
            ConstraintSet::L1Ball { radius: 3.0 }
        );
    }
}
