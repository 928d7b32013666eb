//! Scene and run configuration: a TOML file with sections, overridden by
//! command-line flags.
//!
//! ```toml
//! [map]
//! family = "poly"          # or: formula = "exp(-z)"
//! [map.params]
//! p = "z^3 - 1"
//!
//! [view]
//! center = "0"             # a constant formula: "0.25-3i", "pi/2", ...
//! width = 4.0
//! px = 256                 # or px_w / px_h
//!
//! [iteration]
//! max_iter = 1000
//! tol_root = 1e-12
//!
//! [palette]
//! seed = 0
//!
//! [run]
//! workers = 4
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use newton_atlas_core::expr::{eval_jet, parse_function, Mode};
use newton_atlas_core::functions::{
    expression, make_catalog, CatalogError, CatalogItem, EntireFunction, Family, NewtonMap,
    ParamValue, Params,
};
use newton_atlas_core::{IterationConfig, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("bad config {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub map: MapSection,
    #[serde(default)]
    pub view: ViewSection,
    pub iteration: Option<IterationConfig>,
    #[serde(default)]
    pub palette: PaletteSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub family: Option<Family>,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    pub formula: Option<String>,
}

/// A number or a constant formula.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Text(String),
}

impl ComplexValue {
    pub fn resolve(&self) -> Result<C64, String> {
        match self {
            ComplexValue::Real(x) => Ok(C64::new(*x, 0.0)),
            ComplexValue::Text(s) => parse_complex(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSection {
    pub center: Option<ComplexValue>,
    pub width: Option<f64>,
    pub px: Option<u32>,
    pub px_w: Option<u32>,
    pub px_h: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PaletteSection {
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub workers: Option<usize>,
}

pub fn load(path: &Path) -> Result<FileConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Read {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|source| ConfigFileError::Parse {
        path: path.display().to_string(),
        source: Box::new(source),
    })
}

/// Parses a constant such as `0.25-10i`, `-1`, `pi/4 + 2i` or `1e-3`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let ast = parse_function(s, Mode::Entire).map_err(|e| format!("{s:?}: {e}"))?;
    if ast.root.depends_on_var() {
        return Err(format!("{s:?} is not a constant"));
    }
    let v = eval_jet(&ast, C64::new(0.0, 0.0)).value;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// What a map specification resolves to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedMap {
    pub family: Option<Family>,
    pub params: BTreeMap<String, ParamValue>,
    pub formula: Option<String>,
    pub label: String,
}

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("give either a family or a formula, not both")]
    Ambiguous,
    #[error("no map given: use --family with --param, or --formula")]
    Missing,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("formula: {0}")]
    Formula(String),
    #[error("family {0} has no Newton map")]
    NotNewton(Family),
}

impl MapSection {
    /// Flags win over the file.
    pub fn merged(
        &self,
        family: Option<Family>,
        params: &[(String, ParamValue)],
        formula: Option<&str>,
    ) -> MapSection {
        let mut out = self.clone();
        if family.is_some() || formula.is_some() {
            out.family = family;
            out.formula = formula.map(str::to_string);
            if family.is_some() && self.family != family {
                out.params.clear();
            }
        }
        for (k, v) in params {
            out.params.insert(k.clone(), v.clone());
        }
        out
    }

    pub fn catalog_item(&self) -> Result<(CatalogItem, ResolvedMap), MapError> {
        let item = match (&self.family, &self.formula) {
            (Some(_), Some(_)) => return Err(MapError::Ambiguous),
            (None, None) => return Err(MapError::Missing),
            (None, Some(src)) => {
                let f = expression(src).map_err(|e| MapError::Formula(e.to_string()))?;
                CatalogItem::Function(f)
            }
            (Some(family), None) => {
                let params = Params(
                    self.params
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect(),
                );
                make_catalog(*family, &params)?
            }
        };
        let label = match &item {
            CatalogItem::Function(f) => f.label(),
            CatalogItem::Newton(n) => n.label(),
            CatalogItem::Quotient(q) => format!("{q:?}"),
        };
        Ok((
            item,
            ResolvedMap {
                family: self.family,
                params: self.params.clone(),
                formula: self.formula.clone(),
                label,
            },
        ))
    }

    pub fn newton(&self) -> Result<(NewtonMap, Arc<dyn EntireFunction>, ResolvedMap), MapError> {
        let (item, resolved) = self.catalog_item()?;
        let n = item
            .newton_map()
            .ok_or(MapError::NotNewton(self.family.unwrap_or(Family::PolyExp)))?;
        let f = n
            .function()
            .cloned()
            .ok_or(MapError::NotNewton(self.family.unwrap_or(Family::PolyExp)))?;
        Ok((n, f, resolved))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.25-10i").unwrap(), C64::new(0.25, -10.0));
        assert_eq!(parse_complex("-1").unwrap(), C64::new(-1.0, 0.0));
        assert!(parse_complex("z").is_err());
        assert!(parse_complex("1/0").is_err());
    }

    #[test]
    fn file_round_trip_and_overrides() {
        let text = r#"
            [map]
            family = "poly"
            [map.params]
            p = "z^3 - 1"

            [view]
            center = "0"
            width = 4.0
            px = 64

            [iteration]
            max_iter = 50
        "#;
        let cfg: FileConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.view.px, Some(64));
        assert_eq!(cfg.iteration.unwrap().max_iter, 50);
        assert_eq!(cfg.iteration.unwrap().tol_root, 1e-12);
        let (n, _, resolved) = cfg.map.newton().unwrap();
        assert_eq!(resolved.label, "z^3 - 1");
        assert!(n.step(C64::new(1.0, 0.0)).point().is_some());

        let m = cfg.map.merged(
            Some(Family::FAlpha),
            &[("alpha".into(), ParamValue::Number(0.5))],
            None,
        );
        assert_eq!(m.params.len(), 1);
        assert!(m.catalog_item().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[view]\nzoom = 2").is_err());
        assert!(toml::from_str::<FileConfig>("[iteration]\nmax_iter = 5").is_ok());
        assert!(toml::from_str::<FileConfig>("[iteration]\nmax_itr = 5").is_err());
    }

    #[test]
    fn map_errors() {
        assert!(matches!(
            MapSection::default().catalog_item(),
            Err(MapError::Missing)
        ));
        let both = MapSection {
            family: Some(Family::FAlpha),
            formula: Some("z".into()),
            ..Default::default()
        };
        assert!(matches!(both.catalog_item(), Err(MapError::Ambiguous)));
        let g = MapSection {
            family: Some(Family::GAlpha),
            params: [("alpha".to_string(), ParamValue::Number(0.3))].into(),
            ..Default::default()
        };
        assert!(matches!(
            g.newton(),
            Err(MapError::NotNewton(Family::GAlpha))
        ));
    }
}
