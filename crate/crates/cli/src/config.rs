use std::path::{Path, PathBuf};

use cusplab::geometry::{FuchsianSurface, MobiusMap};
use cusplab::indicial::{OperatorSpec, OperatorTerm};
use cusplab::lp::Profile;
use cusplab::mode0::RGrid;
use cusplab::tensor::TensorGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// One run configuration. Every section and key is optional; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub surface: SurfaceSection,
    pub operator: OperatorSection,
    pub grid: GridSection,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSection {
    /// `punctured-torus`, or `custom` with `generators` and `cusp_width`.
    pub preset: String,
    /// Generator matrices as rows `[a, b, c, d]`.
    pub generators: Vec<[f64; 4]>,
    pub cusp_width: Option<f64>,
    pub max_word_len: usize,
    /// Keep only the first `class_cap` classes in (length, word) order.
    pub class_cap: Option<usize>,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        Self {
            preset: "punctured-torus".into(),
            generators: vec![],
            cusp_width: None,
            max_word_len: 6,
            class_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorSection {
    /// `derivative`, `divergence`, `laplacian`, `sasaki-gradient`, `identity` or `custom`.
    pub family: String,
    pub d: usize,
    /// Fourier degree for `sasaki-gradient`, size for `identity`.
    pub modes: usize,
    /// Term list for `custom`.
    pub terms: Vec<OperatorTerm>,
    /// Real-part window for root searches.
    pub window: [f64; 2],
    pub rho: f64,
    pub rho_to: Option<f64>,
    /// Hölder-Zygmund exponent.
    pub s: f64,
    pub profile: Profile,
}

impl Default for OperatorSection {
    fn default() -> Self {
        Self {
            family: "laplacian".into(),
            d: 1,
            modes: 3,
            terms: vec![],
            window: [-10.0, 10.0],
            rho: 0.0,
            rho_to: None,
            s: 0.5,
            profile: Profile::Quintic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Zero-mode field CSV; a bump in the first component when absent.
    pub field: Option<PathBuf>,
    /// Chart `y ∈ [chart_height, 20·chart_height]`.
    pub chart_height: f64,
    pub nr: usize,
    pub ntheta: usize,
    /// `zero`, `metric`, `bump`, `potential` or a path to a tensor JSON file.
    pub tensor: Option<String>,
    /// Size of the band-limited family for the norm-equivalence report.
    pub family_size: Option<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        let r = RGrid::default();
        Self {
            r_min: r.r_min,
            r_max: r.r_max,
            points: r.points,
            field: None,
            chart_height: 1.0,
            nr: 512,
            ntheta: 256,
            tensor: None,
            family_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute quadrature tolerance for X-ray values.
    pub xray: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { xray: 1e-10 }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// SHA-256 of the canonical JSON form, so formatting and key order do not matter.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    pub fn surface(&self) -> Result<FuchsianSurface, CliError> {
        let s = &self.surface;
        match s.preset.as_str() {
            "punctured-torus" => Ok(FuchsianSurface::punctured_torus()),
            "custom" => {
                let gens = s
                    .generators
                    .iter()
                    .map(|&[a, b, c, d]| MobiusMap::new(a, b, c, d))
                    .collect::<cusplab::Result<Vec<_>>>()?;
                let width = s.cusp_width.ok_or_else(|| {
                    CliError::Validation("custom surface needs cusp_width".into())
                })?;
                Ok(FuchsianSurface::new(gens, width)?)
            }
            other => Err(CliError::Validation(format!(
                "unknown surface preset {other:?}"
            ))),
        }
    }

    pub fn operator(&self) -> Result<OperatorSpec, CliError> {
        let o = &self.operator;
        if o.family != "custom" && !o.terms.is_empty() {
            return Err(CliError::Validation(
                "operator terms are only read for family = \"custom\"".into(),
            ));
        }
        let spec = match o.family.as_str() {
            "derivative" => OperatorSpec::sym_derivative(o.d),
            "divergence" => OperatorSpec::divergence(o.d),
            "laplacian" => OperatorSpec::sym_laplacian(o.d),
            "sasaki-gradient" => OperatorSpec::sasaki_gradient(o.modes),
            "identity" => OperatorSpec::identity(o.modes, o.d),
            "custom" => OperatorSpec::new("custom", o.d, o.terms.clone())?,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown operator family {other:?}"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn window(&self) -> Result<(f64, f64), CliError> {
        let [lo, hi] = self.operator.window;
        if !(lo < hi) {
            return Err(CliError::Validation(format!(
                "empty root window [{lo}, {hi}]"
            )));
        }
        Ok((lo, hi))
    }

    pub fn rho_to(&self) -> Result<f64, CliError> {
        self.operator
            .rho_to
            .ok_or_else(|| CliError::Validation("operator.rho_to is required".into()))
    }

    pub fn r_grid(&self) -> Result<RGrid, CliError> {
        Ok(RGrid::new(
            self.grid.r_min,
            self.grid.r_max,
            self.grid.points,
        )?)
    }

    pub fn chart(&self, theta_period: f64) -> Result<TensorGrid, CliError> {
        Ok(TensorGrid::for_cusp(
            self.grid.chart_height,
            self.grid.nr,
            self.grid.ntheta,
            theta_period,
        )?)
    }

    pub fn xray_tol(&self) -> Result<f64, CliError> {
        let t = self.tolerances.xray;
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Validation(format!(
                "tolerances.xray must be positive, got {t}"
            )));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("[grid]\nnr = 64\nbogus = 1\n").is_err());
        assert!(Config::parse("[extra]\nx = 1\n").is_err());
        assert!(Config::parse("[grid]\nnr = 64\n").is_ok());
    }

    #[test]
    fn digest_survives_reserialization() {
        let c = Config::parse(
            "[operator]\nfamily = \"derivative\"\nd = 2\n\n[tolerances]\nxray = 1e-9\n",
        )
        .unwrap();
        let again = Config::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.digest(), again.digest());
        let reordered = Config::parse(
            "[tolerances]\nxray = 0.000000001\n[operator]\nd = 2\nfamily = \"derivative\"\n",
        )
        .unwrap();
        assert_eq!(c.digest(), reordered.digest());
        assert_ne!(c.digest(), Config::default().digest());
    }

    proptest::proptest! {
        #[test]
        fn digest_is_a_function_of_the_parsed_config(
            nr in 16usize..2048,
            xray in 1e-14..1e-3f64,
            lo in -20.0..0.0f64,
            family in proptest::sample::select(vec!["derivative", "divergence", "laplacian", "identity"]),
            cap in proptest::option::of(1usize..200),
        ) {
            let mut c = Config::default();
            c.grid.nr = nr;
            c.tolerances.xray = xray;
            c.operator.window = [lo, 10.0];
            c.operator.family = family.into();
            c.surface.class_cap = cap;
            let text = toml::to_string(&c).unwrap();
            let back = Config::parse(&text).unwrap();
            proptest::prop_assert_eq!(&back, &c);
            proptest::prop_assert_eq!(back.digest(), c.digest());
            let pretty = Config::parse(&toml::to_string_pretty(&c).unwrap()).unwrap();
            proptest::prop_assert_eq!(pretty.digest(), c.digest());
        }
    }

    #[test]
    fn operators() {
        let mut c = Config::default();
        assert_eq!(c.operator().unwrap().name, "Δ");
        c.operator.family = "nope".into();
        assert!(c.operator().is_err());
        c.operator.family = "custom".into();
        assert!(c.operator().is_err());
    }
}
