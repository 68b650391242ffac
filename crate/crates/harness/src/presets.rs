//! Configurations of the published numerical examples, embedded at build time.

use crate::config::LoadedConfig;
use crate::HarnessError;

pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(Preset { name: $name, source: include_str!(concat!("../presets/", $name, ".toml")) }),*]
    };
}

pub const PRESETS: &[Preset] = presets![
    "example1-lieI",
    "example1-lieII",
    "example1-strangI",
    "example1-strangII",
    "example1-error-growth",
    "example2-casei",
    "example2-caseii",
    "example2-caseiii",
    "example2-portrait",
    "example3-casei",
    "example3-caseii",
    "example3-caseiii",
    "example3-portrait",
    "example4-casei",
    "example4-caseii",
    "example5-casei-sigma1",
    "example5-casei-sigma2",
    "example5-casei-sigma3",
    "example5-caseii-sigma1",
    "example5-caseii-sigma2",
    "example5-caseii-sigma3",
    "example6-sigma1",
    "example6-sigma2",
    "example6-sigma3",
    "rate-cutoff",
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn load(name: &str) -> Result<LoadedConfig, HarnessError> {
    let preset = find(name).ok_or_else(|| {
        HarnessError::Config(format!("unknown preset {name:?}; run list-presets for the available names"))
    })?;
    LoadedConfig::parse(preset.source, &format!("preset {name}"))
}
