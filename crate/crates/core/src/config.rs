//! `key=value` configuration files, one setting per line, `#` comments.
//!
//! Keys are the role names of [`AdPacParams`] fields; the Greek letters and
//! their spelled-out forms are accepted as aliases. Classic-snake settings
//! live under the `classic.` prefix.

use std::path::Path;

use thiserror::Error;

use crate::baseline::ClassicPolarParams;
use crate::tracker::AdPacParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Canonical keys in file order.
pub const KEYS: [&str; 29] = [
    "curvature",
    "continuity",
    "edge",
    "region",
    "intensity",
    "contraction",
    "step",
    "radial_gain",
    "epsilon",
    "spacing",
    "forgetting",
    "tol",
    "max_iters",
    "r_factor",
    "contraction_sign",
    "spatial",
    "temporal",
    "cap_ratio",
    "stats_refresh",
    "step_safety",
    "classic.alpha",
    "classic.beta",
    "classic.gamma",
    "classic.window",
    "classic.resolution",
    "classic.samples",
    "classic.points",
    "classic.r_factor",
    "classic.max_sweeps",
];

const ALIASES: [(&str, &str); 22] = [
    ("alpha", "curvature"),
    ("α", "curvature"),
    ("beta", "continuity"),
    ("β", "continuity"),
    ("gamma", "edge"),
    ("γ", "edge"),
    ("kappa", "region"),
    ("κ", "region"),
    ("zeta", "intensity"),
    ("ζ", "intensity"),
    ("nu", "contraction"),
    ("ν", "contraction"),
    ("mu1", "step"),
    ("μ₁", "step"),
    ("mu2", "radial_gain"),
    ("μ₂", "radial_gain"),
    ("eps", "epsilon"),
    ("ε", "epsilon"),
    ("lambda", "spacing"),
    ("Λ", "spacing"),
    ("xi", "forgetting"),
    ("ξ", "forgetting"),
];

/// Resolves aliases; `None` for unknown keys.
pub fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .copied()
        .find(|k| *k == key)
        .or_else(|| ALIASES.iter().find(|(a, _)| *a == key).map(|(_, k)| *k))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Config {
    pub adpac: AdPacParams,
    pub classic: ClassicPolarParams,
}

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn float(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|e| bad(key, v, e))
}

fn count(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>().map_err(|e| bad(key, v, e))
}

fn flag(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad(key, v, "expected true or false")),
    }
}

impl Config {
    /// Parses a config file body. Absent keys keep their defaults; the
    /// result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: format!("expected key=value, found `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey(_) | ConfigError::BadValue { .. } => ConfigError::Syntax {
                    line: i + 1,
                    reason: e.to_string(),
                },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.adpac.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.classic.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Sets one parameter by key or alias, without validating the whole set.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let name = canonical(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        let (a, c) = (&mut self.adpac, &mut self.classic);
        match name {
            "curvature" => a.scales.curvature = float(key, value)?,
            "continuity" => a.scales.continuity = float(key, value)?,
            "edge" => a.scales.edge = float(key, value)?,
            "region" => a.scales.region = float(key, value)?,
            "intensity" => a.scales.intensity = float(key, value)?,
            "contraction" => a.scales.contraction = float(key, value)?,
            "step" => a.step.base = float(key, value)?,
            "radial_gain" => a.step.radial_gain = float(key, value)?,
            "epsilon" => a.adaptation.epsilon = float(key, value)?,
            "spacing" => a.spacing = float(key, value)?,
            "forgetting" => a.adaptation.forgetting = float(key, value)?,
            "tol" => a.tol = float(key, value)?,
            "max_iters" => a.max_iters = count(key, value)?,
            "r_factor" => a.r_factor = float(key, value)?,
            "contraction_sign" => a.contraction_sign = float(key, value)?,
            "spatial" => a.adaptation.spatial = flag(key, value)?,
            "temporal" => a.adaptation.temporal = flag(key, value)?,
            "cap_ratio" => a.adaptation.cap_ratio = float(key, value)?,
            "stats_refresh" => a.stats_refresh = count(key, value)?,
            "step_safety" => a.step_safety = float(key, value)?,
            "classic.alpha" => c.alpha = float(key, value)?,
            "classic.beta" => c.beta = float(key, value)?,
            "classic.gamma" => c.gamma = float(key, value)?,
            "classic.window" => c.window = float(key, value)?,
            "classic.resolution" => c.resolution = float(key, value)?,
            "classic.samples" => c.samples = count(key, value)?,
            "classic.points" => c.points = count(key, value)?,
            "classic.r_factor" => c.r_factor = float(key, value)?,
            "classic.max_sweeps" => c.max_sweeps = count(key, value)?,
            _ => unreachable!("every canonical key is handled"),
        }
        Ok(())
    }

    /// The full configuration in file form; parsing it gives `self` back.
    pub fn to_text(&self) -> String {
        let (a, c) = (&self.adpac, &self.classic);
        let values: [String; 29] = [
            a.scales.curvature.to_string(),
            a.scales.continuity.to_string(),
            a.scales.edge.to_string(),
            a.scales.region.to_string(),
            a.scales.intensity.to_string(),
            a.scales.contraction.to_string(),
            a.step.base.to_string(),
            a.step.radial_gain.to_string(),
            a.adaptation.epsilon.to_string(),
            a.spacing.to_string(),
            a.adaptation.forgetting.to_string(),
            a.tol.to_string(),
            a.max_iters.to_string(),
            a.r_factor.to_string(),
            a.contraction_sign.to_string(),
            a.adaptation.spatial.to_string(),
            a.adaptation.temporal.to_string(),
            a.adaptation.cap_ratio.to_string(),
            a.stats_refresh.to_string(),
            a.step_safety.to_string(),
            c.alpha.to_string(),
            c.beta.to_string(),
            c.gamma.to_string(),
            c.window.to_string(),
            c.resolution.to_string(),
            c.samples.to_string(),
            c.points.to_string(),
            c.r_factor.to_string(),
            c.max_sweeps.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
