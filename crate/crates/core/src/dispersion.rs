//! Principal refractive indices and indicatrix orientation from crystal data files.
//!
//! A crystal file is JSON with the fields `name`, `symmetry`, `sellmeier`
//! (three sets along e1⁰, e2⁰, e3⁰), `phi_formula` or `phi_table`,
//! `d_matrix`, `transparency_nm`, `handedness` and `provenance`.
//! Wavelengths are in nm at the interface and µm inside the Sellmeier formulas.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::direction::{Direction, Vec3};
use crate::error::{Error, Result};
use crate::numeric::MonotoneCubic;
use crate::waveoptics::{mode_indices, Mode};

/// Central-difference step for `dn_dlambda`, nm.
pub const DN_DLAMBDA_STEP_NM: f64 = 0.1;

const BUNDLED_BIBO: &str = include_str!("../../../data/bibo.json");
const BUNDLED_BBO: &str = include_str!("../../../data/bbo.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    BiaxialMonoclinic,
    Uniaxial,
    Isotropic,
}

/// One dispersion formula, λ in µm.
#[derive(Debug, Clone, PartialEq)]
pub enum Sellmeier {
    /// n² = A + B/(λ² − C) − Dλ²
    UvIr {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    /// n² = 1 + Σ Bᵢλ²/(λ² − Cᵢ)
    Standard {
        terms: Vec<(f64, f64)>,
    },
    Constant(f64),
}

impl Sellmeier {
    fn from_parts(formula: &str, coefficients: &[f64]) -> Result<Self> {
        let bad = |n: &str| Error::InvalidCrystal(format!("formula `{formula}` expects {n} coefficients"));
        match formula {
            "sellmeier-uv-ir" => match coefficients {
                &[a, b, c, d] => Ok(Self::UvIr { a, b, c, d }),
                _ => Err(bad("4")),
            },
            "sellmeier-standard" => {
                if coefficients.is_empty() || !coefficients.len().is_multiple_of(2) {
                    return Err(bad("an even, non-zero number of"));
                }
                let terms = coefficients.chunks(2).map(|p| (p[0], p[1])).collect();
                Ok(Self::Standard { terms })
            }
            "constant" => match coefficients {
                &[n] => Ok(Self::Constant(n)),
                _ => Err(bad("1")),
            },
            other => Err(Error::UnknownFormula(other.to_string())),
        }
    }

    pub fn index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        match self {
            Self::UvIr { a, b, c, d } => (a + b / (l2 - c) - d * l2).sqrt(),
            Self::Standard { terms } => (1.0 + terms.iter().map(|(b, c)| b * l2 / (l2 - c)).sum::<f64>()).sqrt(),
            Self::Constant(n) => *n,
        }
    }
}

/// Orientation angle Φ(λ) of e3⁰ from e3, degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiModel {
    Zero,
    /// Φ = offset + strength/(λ² − pole), λ in µm.
    OnePole {
        offset_deg: f64,
        strength_deg_um2: f64,
        pole_um2: f64,
    },
    /// Monotone cubic through (λ nm, Φ deg) nodes.
    Table(MonotoneCubic),
}

impl PhiModel {
    pub fn phi_deg(&self, lambda_nm: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::OnePole { offset_deg, strength_deg_um2, pole_um2 } => {
                let l = lambda_nm * 1e-3;
                offset_deg + strength_deg_um2 / (l * l - pole_um2)
            }
            Self::Table(t) => t.eval(lambda_nm),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorFrame {
    /// Crystal-physical frame {e_i}.
    Physical,
    /// Indicatrix frame {e_i⁰} at a reference wavelength.
    Indicatrix { reference_nm: f64 },
}

/// Contracted d-matrices as stored in the crystal file, pm/V.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrixData {
    pub frame: TensorFrame,
    pub kleinman: [[f64; 6]; 3],
    pub full: Option<[[f64; 6]; 3]>,
}

/// A validated crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalDefinition {
    pub name: String,
    pub symmetry: Symmetry,
    pub sellmeier: [Sellmeier; 3],
    pub phi: PhiModel,
    pub d_matrix: DMatrixData,
    pub transparency_nm: (f64, f64),
    pub handedness: i8,
    pub provenance: Vec<String>,
}

/// Principal indices along e1⁰, e2⁰, e3⁰.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalIndices {
    pub n: [f64; 3],
    pub lambda_nm: f64,
}

impl PrincipalIndices {
    /// Values sorted ascending, i.e. (n_x, n_y, n_z).
    pub fn sorted(&self) -> [f64; 3] {
        let mut s = self.n;
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Rotation between {e_i} and {e_i⁰(λ)} about e2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRotation {
    /// Columns are e_i⁰ written in {e_i}.
    pub matrix: Matrix3<f64>,
    pub phi_deg: f64,
    pub lambda_nm: f64,
}

impl FrameRotation {
    pub fn about_e2(phi_deg: f64, lambda_nm: f64) -> Self {
        let (s, c) = phi_deg.to_radians().sin_cos();
        let matrix = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
        Self { matrix, phi_deg, lambda_nm }
    }

    pub fn to_indicatrix(&self, v: &Vec3) -> Vec3 {
        self.matrix.transpose() * v
    }

    pub fn to_physical(&self, v: &Vec3) -> Vec3 {
        self.matrix * v
    }
}

#[derive(Deserialize)]
struct SellmeierFile {
    formula: String,
    coefficients: Vec<f64>,
}

#[derive(Deserialize)]
struct PhiFormulaFile {
    kind: String,
    offset_deg: f64,
    strength_deg_um2: f64,
    pole_um2: f64,
}

#[derive(Deserialize)]
struct DMatrixFile {
    frame: String,
    reference_nm: Option<f64>,
    kleinman: [[f64; 6]; 3],
    full: Option<[[f64; 6]; 3]>,
}

#[derive(Deserialize)]
struct CrystalFile {
    name: String,
    symmetry: Symmetry,
    transparency_nm: [f64; 2],
    sellmeier: Vec<SellmeierFile>,
    phi_formula: Option<PhiFormulaFile>,
    phi_table: Option<Vec<[f64; 2]>>,
    d_matrix: DMatrixFile,
    handedness: i8,
    #[serde(default)]
    provenance: Vec<String>,
}

const REQUIRED: [&str; 6] = ["name", "symmetry", "sellmeier", "transparency_nm", "d_matrix", "handedness"];

/// Parses and validates a crystal definition document.
pub fn load_crystal(source: &str) -> Result<CrystalDefinition> {
    let value: Value = serde_json::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    if let Some(missing) = REQUIRED.iter().find(|k| !obj.contains_key(**k)) {
        return Err(Error::MissingField(missing));
    }
    let file: CrystalFile = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    CrystalDefinition::from_file(file)
}

impl CrystalDefinition {
    pub fn bundled_bibo() -> Self {
        load_crystal(BUNDLED_BIBO).expect("bundled BiBO definition is valid")
    }

    pub fn bundled_bbo() -> Self {
        load_crystal(BUNDLED_BBO).expect("bundled BBO definition is valid")
    }

    fn from_file(f: CrystalFile) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidCrystal(m));
        let [tmin, tmax] = f.transparency_nm;
        if !(tmin > 0.0 && tmax > tmin && tmax.is_finite()) {
            return invalid(format!("bad transparency interval [{tmin}, {tmax}]"));
        }
        if f.sellmeier.len() != 3 {
            return invalid(format!("expected 3 Sellmeier sets, got {}", f.sellmeier.len()));
        }
        let parsed =
            f.sellmeier.iter().map(|s| Sellmeier::from_parts(&s.formula, &s.coefficients)).collect::<Result<Vec<_>>>()?;
        let sellmeier: [Sellmeier; 3] = parsed.try_into().expect("length checked");

        let phi = match (f.phi_formula, f.phi_table) {
            (Some(_), Some(_)) => return invalid("give phi_formula or phi_table, not both".into()),
            (Some(p), None) => {
                if p.kind != "one-pole" {
                    return Err(Error::UnknownFormula(p.kind));
                }
                PhiModel::OnePole { offset_deg: p.offset_deg, strength_deg_um2: p.strength_deg_um2, pole_um2: p.pole_um2 }
            }
            (None, Some(t)) => {
                let (xs, ys) = t.iter().map(|r| (r[0], r[1])).unzip();
                PhiModel::Table(
                    MonotoneCubic::new(xs, ys)
                        .ok_or_else(|| Error::InvalidCrystal("phi_table needs ≥2 strictly increasing wavelengths".into()))?,
                )
            }
            (None, None) => PhiModel::Zero,
        };

        let frame = match f.d_matrix.frame.as_str() {
            "physical" => TensorFrame::Physical,
            "indicatrix" => TensorFrame::Indicatrix {
                reference_nm: f.d_matrix.reference_nm.ok_or(Error::MissingField("d_matrix.reference_nm"))?,
            },
            other => return invalid(format!("unknown d_matrix frame `{other}`")),
        };
        let sign = match f.handedness {
            1 => 1.0,
            -1 => -1.0,
            h => return invalid(format!("handedness must be +1 or -1, got {h}")),
        };
        let signed = |m: [[f64; 6]; 3]| m.map(|row| row.map(|v| v * sign));
        let d_matrix = DMatrixData { frame, kleinman: signed(f.d_matrix.kleinman), full: f.d_matrix.full.map(signed) };

        let crystal = Self {
            name: f.name,
            symmetry: f.symmetry,
            sellmeier,
            phi,
            d_matrix,
            transparency_nm: (tmin, tmax),
            handedness: f.handedness,
            provenance: f.provenance,
        };
        crystal.validate()?;
        Ok(crystal)
    }

    fn validate(&self) -> Result<()> {
        let (tmin, tmax) = self.transparency_nm;
        for i in 0..=400 {
            let lambda = tmin + (tmax - tmin) * i as f64 / 400.0;
            for (axis, s) in self.sellmeier.iter().enumerate() {
                let n = s.index(lambda * 1e-3);
                if !(n.is_finite() && n > 1.0) {
                    return Err(Error::InvalidCrystal(format!(
                        "Sellmeier set {} gives n = {n} at {lambda} nm inside the transparency range",
                        axis + 1
                    )));
                }
            }
        }
        let same = |i: usize, j: usize| self.sellmeier[i] == self.sellmeier[j];
        let identical_pairs = [(0, 1), (0, 2), (1, 2)].iter().filter(|(i, j)| same(*i, *j)).count();
        match self.symmetry {
            Symmetry::Uniaxial | Symmetry::Isotropic => {
                let want = if self.symmetry == Symmetry::Uniaxial { 1 } else { 3 };
                if identical_pairs != want {
                    return Err(Error::InvalidCrystal(format!(
                        "{:?} crystal with {identical_pairs} identical Sellmeier pairs",
                        self.symmetry
                    )));
                }
                if self.phi != PhiModel::Zero {
                    return Err(Error::InvalidCrystal("Φ must be identically zero unless biaxial".into()));
                }
            }
            Symmetry::BiaxialMonoclinic => {
                let mid = 0.5 * (tmin + tmax);
                let s = self.principal_at(mid).sorted();
                if !(s[0] < s[1] && s[1] < s[2]) {
                    return Err(Error::InvalidCrystal("biaxial crystal needs three distinct principal indices".into()));
                }
            }
        }
        let matrices = std::iter::once(&self.d_matrix.kleinman).chain(self.d_matrix.full.as_ref());
        for m in matrices {
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCrystal("non-finite d_matrix entry".into()));
            }
        }
        Ok(())
    }

    fn principal_at(&self, lambda_nm: f64) -> PrincipalIndices {
        let l = lambda_nm * 1e-3;
        PrincipalIndices { n: [0, 1, 2].map(|i| self.sellmeier[i].index(l)), lambda_nm }
    }

    pub fn check_wavelength(&self, lambda_nm: f64) -> Result<()> {
        let (min_nm, max_nm) = self.transparency_nm;
        if lambda_nm.is_finite() && lambda_nm >= min_nm && lambda_nm <= max_nm {
            Ok(())
        } else {
            Err(Error::OutsideTransparency { lambda_nm, min_nm, max_nm })
        }
    }
}

pub fn principal_indices(crystal: &CrystalDefinition, lambda_nm: f64) -> Result<PrincipalIndices> {
    crystal.check_wavelength(lambda_nm)?;
    Ok(crystal.principal_at(lambda_nm))
}

pub fn indicatrix_rotation(crystal: &CrystalDefinition, lambda_nm: f64) -> Result<FrameRotation> {
    crystal.check_wavelength(lambda_nm)?;
    Ok(FrameRotation::about_e2(crystal.phi.phi_deg(lambda_nm), lambda_nm))
}

/// Derivative of a mode index with respect to wavelength along a fixed direction, nm⁻¹.
///
/// The direction is held fixed in {e_i}, so the result includes the rotation
/// of the indicatrix with wavelength.
pub fn dn_dlambda(crystal: &CrystalDefinition, lambda_nm: f64, direction: &Direction, mode: Mode) -> Result<f64> {
    dn_dlambda_with_step(crystal, lambda_nm, direction, mode, DN_DLAMBDA_STEP_NM)
}

pub fn dn_dlambda_with_step(
    crystal: &CrystalDefinition,
    lambda_nm: f64,
    direction: &Direction,
    mode: Mode,
    step_nm: f64,
) -> Result<f64> {
    let n_at = |l: f64| mode_indices(crystal, l, direction).map(|m| m.get(mode));
    Ok((n_at(lambda_nm + step_nm)? - n_at(lambda_nm - step_nm)?) / (2.0 * step_nm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bundled_files_load() {
        let bibo = CrystalDefinition::bundled_bibo();
        assert_eq!(bibo.name, "BiBO");
        assert_eq!(bibo.symmetry, Symmetry::BiaxialMonoclinic);
        let bbo = CrystalDefinition::bundled_bbo();
        assert_eq!(bbo.name, "BBO");
        assert_eq!(bbo.symmetry, Symmetry::Uniaxial);
        assert_eq!(bbo.phi, PhiModel::Zero);
    }

    #[test]
    fn missing_d_matrix_is_reported() {
        let mut v: Value = serde_json::from_str(BUNDLED_BIBO).unwrap();
        v.as_object_mut().unwrap().remove("d_matrix");
        let err = load_crystal(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::MissingField("d_matrix")));
        assert!(err.to_string().contains("missing field"));
    }

    #[test]
    fn unknown_formula_rejected() {
        let src = BUNDLED_BBO.replacen("sellmeier-uv-ir", "cauchy", 1);
        assert!(matches!(load_crystal(&src), Err(Error::UnknownFormula(_))));
    }

    #[test]
    fn index_below_one_rejected() {
        let mut v: Value = serde_json::from_str(BUNDLED_BBO).unwrap();
        v["sellmeier"][2]["coefficients"] = serde_json::json!([0.5, 0.0, 0.0, 0.0]);
        assert!(matches!(load_crystal(&v.to_string()), Err(Error::InvalidCrystal(_))));
    }

    #[test]
    fn garbage_is_parse_error() {
        assert!(matches!(load_crystal("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn uniaxial_with_phi_rejected() {
        let mut v: Value = serde_json::from_str(BUNDLED_BBO).unwrap();
        v["phi_table"] = serde_json::json!([[400.0, 1.0], [800.0, 2.0]]);
        assert!(load_crystal(&v.to_string()).is_err());
    }

    #[test]
    fn handedness_flips_d_sign() {
        let mut v: Value = serde_json::from_str(BUNDLED_BIBO).unwrap();
        v["handedness"] = serde_json::json!(-1);
        let flipped = load_crystal(&v.to_string()).unwrap();
        let base = CrystalDefinition::bundled_bibo();
        assert_eq!(flipped.d_matrix.kleinman[1][1], -base.d_matrix.kleinman[1][1]);
    }

    #[test]
    fn phi_table_interpolates() {
        let mut v: Value = serde_json::from_str(BUNDLED_BIBO).unwrap();
        v.as_object_mut().unwrap().remove("phi_formula");
        v["phi_table"] = serde_json::json!([[300.0, 40.0], [390.0, 43.8], [780.0, 46.9], [2000.0, 47.6]]);
        let c = load_crystal(&v.to_string()).unwrap();
        assert!((indicatrix_rotation(&c, 390.0).unwrap().phi_deg - 43.8).abs() < 1e-12);
    }

    #[test]
    fn bibo_principal_ordering_at_780() {
        let bibo = CrystalDefinition::bundled_bibo();
        let p = principal_indices(&bibo, 780.0).unwrap();
        // e2⁰ carries n_x, e3⁰ n_y, e1⁰ n_z
        assert!(p.n[1] < p.n[2] && p.n[2] < p.n[0]);
    }

    #[test]
    fn bbo_ordinary_pair() {
        let bbo = CrystalDefinition::bundled_bbo();
        let p = principal_indices(&bbo, 780.0).unwrap();
        assert_eq!(p.n[0], p.n[1]);
        assert!(p.n[2] < p.n[0]);
    }

    #[test]
    fn outside_transparency() {
        let bibo = CrystalDefinition::bundled_bibo();
        assert!(matches!(principal_indices(&bibo, 5000.0), Err(Error::OutsideTransparency { .. })));
        assert!(indicatrix_rotation(&bibo, 100.0).is_err());
    }

    #[test]
    fn bbo_phi_is_zero() {
        let bbo = CrystalDefinition::bundled_bbo();
        for l in [300.0, 390.0, 780.0, 1550.0] {
            assert_eq!(indicatrix_rotation(&bbo, l).unwrap().phi_deg, 0.0);
        }
    }

    #[test]
    fn rotation_keeps_e2() {
        let r = FrameRotation::about_e2(46.9, 780.0);
        assert_eq!(r.to_indicatrix(&Vec3::y()), Vec3::y());
        assert_eq!(r.to_physical(&Vec3::y()), Vec3::y());
        assert!((r.matrix.determinant() - 1.0).abs() < 1e-15);
        let e3_0 = r.to_physical(&Vec3::z());
        assert!((e3_0.dot(&Vec3::z()).acos().to_degrees() - 46.9).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn frame_round_trip(phi in -90f64..90.0, x in -1f64..1.0, y in -1f64..1.0, z in -1f64..1.0) {
            let r = FrameRotation::about_e2(phi, 500.0);
            let v = Vec3::new(x, y, z);
            let back = r.to_physical(&r.to_indicatrix(&v));
            prop_assert!((back - v).norm() <= 1e-12 * v.norm().max(1e-300));
            let m = r.matrix.transpose() * r.matrix;
            prop_assert!((m - Matrix3::identity()).norm() < 1e-14);
        }

        #[test]
        fn indices_bounded_and_continuous(lambda in 290f64..2400.0) {
            let bibo = CrystalDefinition::bundled_bibo();
            let a = principal_indices(&bibo, lambda).unwrap();
            let b = principal_indices(&bibo, lambda + 1e-6).unwrap();
            for i in 0..3 {
                prop_assert!(a.n[i] > 1.0 && a.n[i] < 4.0);
                prop_assert!((a.n[i] - b.n[i]).abs() < 1e-8);
            }
        }
    }
}
