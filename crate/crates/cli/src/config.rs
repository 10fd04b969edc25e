//! TOML inputs of the single-run subcommands. Every file carries
//! `schema_version`; unknown top-level keys are rejected.

use std::path::Path;

use fracwave::experiments::{InitialData, SweepConfig};
use fracwave::flux::FluxSpec;
use fracwave::traveling_wave::{LeftClosure, TWSpec, WindowPlan};
use fracwave::viscous_evolution::{BumpTestFn, EvolutionConfig};
use fracwave::{io, FracError, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveFile {
    pub schema_version: u32,
    pub evolution: EvolutionConfig,
    pub initial: InitialData,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionFile {
    pub schema_version: u32,
    pub evolution: EvolutionConfig,
    pub u0: InitialData,
    pub v0: InitialData,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyFile {
    pub schema_version: u32,
    pub evolution: EvolutionConfig,
    pub initial: InitialData,
    pub test_fn: BumpTestFn,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    pub sweep: SweepConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwFile {
    pub schema_version: u32,
    pub flux: FluxSpec,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub epsilon: f64,
    pub alpha: f64,
    #[serde(default)]
    pub plan: WindowPlan,
    #[serde(default)]
    pub left_closure: LeftClosure,
}

impl TwFile {
    pub fn spec(&self) -> Result<TWSpec> {
        let mut spec = TWSpec::auto(self.flux, self.phi_minus, self.phi_plus, self.epsilon, self.alpha, self.plan)?;
        spec.left_closure = self.left_closure;
        Ok(spec)
    }
}

pub trait Versioned {
    fn version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn version(&self) -> u32 {
                self.schema_version
            }
        }
    )*};
}

versioned!(EvolveFile, ContractionFile, EntropyFile, SweepFile, TwFile);

pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T> {
    let value: T = io::read_toml(path)?;
    if value.version() != SCHEMA_VERSION {
        return Err(FracError::Config(format!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            value.version()
        )));
    }
    Ok(value)
}
