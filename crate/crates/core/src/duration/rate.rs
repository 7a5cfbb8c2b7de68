//! Deterministic speaking-rate predictor.
//!
//! `seconds = pause_floor + units(text) / units_per_second`, with one profile per language.
//! Profiles are loaded from a TOML file:
//!
//! ```toml
//! [[profile]]
//! language = "en"
//! units_per_second = 14.2
//! unit_kind = "characters"   # or "tokens"
//! pause_floor = 0.31
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DurationPredictor, PredictError};
use crate::metrics::DurationEstimate;
use crate::scalar::Scalar;
use crate::tokenize::{count_characters, count_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    /// Non-whitespace characters.
    #[default]
    Characters,
    /// Toolkit tokens (whitespace words, single CJK characters).
    Tokens,
}

impl UnitKind {
    pub fn count(self, text: &str) -> usize {
        match self {
            UnitKind::Characters => count_characters(text),
            UnitKind::Tokens => count_tokens(text),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Characters => "characters",
            UnitKind::Tokens => "tokens",
        }
    }
}

impl std::str::FromStr for UnitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "characters" | "chars" => Ok(UnitKind::Characters),
            "tokens" => Ok(UnitKind::Tokens),
            other => Err(format!("unknown unit kind {other:?} (expected characters or tokens)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProfileConfigError {
    #[error("failed to read profile file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed profile file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid profile for {language:?}: {reason}")]
    Invalid { language: String, reason: String },
    #[error("duplicate profile for language {0:?}")]
    DuplicateLanguage(String),
    #[error("profile file defines no languages")]
    Empty,
}

/// Speaking-rate parameters for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile<T> {
    language: String,
    units_per_second: T,
    unit_kind: UnitKind,
    pause_floor: T,
}

impl<T: Scalar> RateProfile<T> {
    pub fn new(
        language: impl Into<String>,
        units_per_second: T,
        unit_kind: UnitKind,
        pause_floor: T,
    ) -> Result<Self, ProfileConfigError> {
        let language = language.into();
        let invalid = |reason: String| ProfileConfigError::Invalid {
            language: language.clone(),
            reason,
        };
        if language.trim().is_empty() {
            return Err(invalid("language code is empty".into()));
        }
        if !(units_per_second.is_finite() && units_per_second > T::zero()) {
            return Err(invalid(format!("units_per_second must be > 0, got {units_per_second}")));
        }
        if !(pause_floor.is_finite() && pause_floor >= T::zero()) {
            return Err(invalid(format!("pause_floor must be >= 0, got {pause_floor}")));
        }
        Ok(Self {
            language,
            units_per_second,
            unit_kind,
            pause_floor,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn units_per_second(&self) -> T {
        self.units_per_second
    }

    pub fn unit_kind(&self) -> UnitKind {
        self.unit_kind
    }

    pub fn pause_floor(&self) -> T {
        self.pause_floor
    }

    /// Stable identifier derived from the parameter values.
    pub fn id(&self) -> String {
        format!(
            "rate:{}:{}:{}:{}",
            self.language,
            self.unit_kind.as_str(),
            self.units_per_second,
            self.pause_floor
        )
    }
}

pub fn rate_predict<T: Scalar>(profile: &RateProfile<T>, text: &str) -> Result<DurationEstimate<T>, PredictError> {
    if text.trim().is_empty() {
        return Err(PredictError::EmptyText);
    }
    let units = T::from_count(profile.unit_kind.count(text));
    let seconds = profile.pause_floor + units / profile.units_per_second;
    Ok(DurationEstimate::new(seconds, profile.id(), count_tokens(text))?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    #[serde(default)]
    profile: Vec<ProfileEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    language: String,
    units_per_second: f64,
    #[serde(default)]
    unit_kind: UnitKind,
    #[serde(default)]
    pause_floor: f64,
}

/// Rate predictor over a set of per-language profiles.
#[derive(Debug, Clone)]
pub struct RatePredictor<T> {
    profiles: BTreeMap<String, RateProfile<T>>,
    id: String,
}

impl<T: Scalar> RatePredictor<T> {
    pub fn new(profiles: impl IntoIterator<Item = RateProfile<T>>) -> Result<Self, ProfileConfigError> {
        let mut map = BTreeMap::new();
        for p in profiles {
            if map.contains_key(&p.language) {
                return Err(ProfileConfigError::DuplicateLanguage(p.language));
            }
            map.insert(p.language.clone(), p);
        }
        if map.is_empty() {
            return Err(ProfileConfigError::Empty);
        }
        let id = if map.len() == 1 {
            map.values().next().map(RateProfile::id).unwrap_or_default()
        } else {
            let joined: Vec<String> = map.values().map(RateProfile::id).collect();
            format!("rate[{}]", joined.join(";"))
        };
        Ok(Self { profiles: map, id })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProfileConfigError> {
        let file: ProfileFile = toml::from_str(text)?;
        let profiles = file
            .profile
            .into_iter()
            .map(|e| {
                RateProfile::new(
                    e.language,
                    T::lit(e.units_per_second),
                    e.unit_kind,
                    T::lit(e.pause_floor),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(profiles)
    }

    pub fn from_file(path: &Path) -> Result<Self, ProfileConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn profile(&self, language: &str) -> Option<&RateProfile<T>> {
        self.profiles.get(language)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &RateProfile<T>> {
        self.profiles.values()
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        for p in self.profiles.values() {
            out.push_str("[[profile]]\n");
            out.push_str(&format!("language = {:?}\n", p.language));
            out.push_str(&format!(
                "units_per_second = {:?}\n",
                p.units_per_second.to_f64().unwrap_or(f64::NAN)
            ));
            out.push_str(&format!("unit_kind = {:?}\n", p.unit_kind.as_str()));
            out.push_str(&format!(
                "pause_floor = {:?}\n\n",
                p.pause_floor.to_f64().unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

impl<T: Scalar> DurationPredictor<T> for RatePredictor<T> {
    fn id(&self) -> &str {
        &self.id
    }

    fn supported_languages(&self) -> BTreeSet<String> {
        self.profiles.keys().cloned().collect()
    }

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<T>, PredictError> {
        let profile = self
            .profiles
            .get(language)
            .ok_or_else(|| PredictError::UnsupportedLanguage(language.to_string()))?;
        let estimate = rate_predict(profile, text)?;
        // Re-stamp with the predictor-level id so every estimate names the same source.
        Ok(DurationEstimate::new(
            estimate.seconds(),
            self.id.clone(),
            estimate.text_units(),
        )?)
    }
}
