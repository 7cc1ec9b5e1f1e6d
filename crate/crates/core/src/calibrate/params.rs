use serde::{Deserialize, Serialize};

use crate::constitutive::{Dissipation, Material};
use crate::error::{CalibrateError, DomainError};

/// Material quantity a search entry controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    YoungsModulus,
    PoissonRatio,
    /// Deviatoric viscosity alone.
    NuD,
    /// Dilational viscosity alone.
    NuV,
    /// Both viscosities, tied.
    Viscosity,
    MuN,
    LambdaN,
    /// Return-map coefficient `a`, set directly.
    CoeffA,
    /// Return-map coefficient `b`, set directly.
    CoeffB,
}

impl ParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::YoungsModulus => "youngs_modulus",
            ParamName::PoissonRatio => "poisson_ratio",
            ParamName::NuD => "nu_d",
            ParamName::NuV => "nu_v",
            ParamName::Viscosity => "viscosity",
            ParamName::MuN => "mu_n",
            ParamName::LambdaN => "lambda_n",
            ParamName::CoeffA => "coeff_a",
            ParamName::CoeffB => "coeff_b",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamEntry {
    pub name: ParamName,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Search in log10 space.
    #[serde(default)]
    pub log_scale: bool,
    /// Restrict to one material index; all materials when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<usize>,
}

impl ParamEntry {
    /// Log-scaled entry, the usual choice for moduli and viscosities.
    pub fn log(name: ParamName, value: f64, lower: f64, upper: f64) -> Self {
        ParamEntry { name, value, lower, upper, log_scale: true, material: None }
    }

    pub fn linear(name: ParamName, value: f64, lower: f64, upper: f64) -> Self {
        ParamEntry { name, value, lower, upper, log_scale: false, material: None }
    }

    fn scale(&self, v: f64) -> f64 {
        if self.log_scale {
            v.log10()
        } else {
            v
        }
    }

    fn unscale(&self, s: f64) -> f64 {
        if self.log_scale {
            10f64.powf(s)
        } else {
            s
        }
    }

    pub fn scaled_bounds(&self) -> (f64, f64) {
        (self.scale(self.lower), self.scale(self.upper))
    }

    pub fn scaled_value(&self) -> f64 {
        self.scale(self.value)
    }
}

/// Named, bounded search parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector {
    pub entries: Vec<ParamEntry>,
}

impl ParamVector {
    pub fn new(entries: Vec<ParamEntry>) -> Self {
        ParamVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: ParamName) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        for e in &self.entries {
            let bad = |msg: String| Err(CalibrateError::InvalidParams(format!("{}: {msg}", e.name.as_str())));
            if !(e.lower <= e.upper) || !e.lower.is_finite() || !e.upper.is_finite() {
                return bad(format!("bounds [{}, {}] are not an interval", e.lower, e.upper));
            }
            if e.log_scale && !(e.lower > 0.0) {
                return bad("log-scaled entries need a positive lower bound".into());
            }
            if !(e.value >= e.lower && e.value <= e.upper) {
                return bad(format!("value {} outside [{}, {}]", e.value, e.lower, e.upper));
            }
        }
        Ok(())
    }

    pub fn scaled(&self) -> Vec<f64> {
        self.entries.iter().map(ParamEntry::scaled_value).collect()
    }

    pub fn scaled_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.entries.iter().map(ParamEntry::scaled_bounds).unzip()
    }

    /// Copy with values taken from search coordinates, clamped into bounds.
    pub fn with_scaled(&self, s: &[f64]) -> ParamVector {
        let entries = self
            .entries
            .iter()
            .zip(s)
            .map(|(e, &x)| ParamEntry { value: e.unscale(x).clamp(e.lower, e.upper), ..*e })
            .collect();
        ParamVector { entries }
    }

    /// Writes the entries into the material table.
    pub fn apply(&self, materials: &mut [Material]) -> Result<(), DomainError> {
        for e in &self.entries {
            let targets: Vec<usize> = match e.material {
                Some(i) if i < materials.len() => vec![i],
                Some(i) => return Err(DomainError::InvalidParameter(format!("no material {i}"))),
                None => (0..materials.len()).collect(),
            };
            for i in targets {
                apply_entry(&mut materials[i], e.name, e.value)?;
            }
        }
        for m in materials.iter() {
            m.visco.validate()?;
        }
        Ok(())
    }
}

fn apply_entry(m: &mut Material, name: ParamName, v: f64) -> Result<(), DomainError> {
    let d = &mut m.visco.dissipation;
    match name {
        ParamName::YoungsModulus => m.elastic = m.elastic.with_youngs(v)?,
        ParamName::PoissonRatio => m.elastic = m.elastic.with_poisson(v)?,
        ParamName::MuN => m.visco.lame_mu_n = Some(v),
        ParamName::LambdaN => m.visco.lame_lambda_n = Some(v),
        ParamName::Viscosity => *d = Dissipation::tied(v),
        ParamName::NuD => {
            *d = match *d {
                Dissipation::Viscous { nu_v, .. } => Dissipation::Viscous { nu_d: v, nu_v },
                _ => Dissipation::Viscous { nu_d: v, nu_v: f64::INFINITY },
            }
        }
        ParamName::NuV => {
            *d = match *d {
                Dissipation::Viscous { nu_d, .. } => Dissipation::Viscous { nu_d, nu_v: v },
                _ => Dissipation::Viscous { nu_d: f64::INFINITY, nu_v: v },
            }
        }
        ParamName::CoeffA => {
            *d = match *d {
                Dissipation::Direct { b, .. } => Dissipation::Direct { a: v, b },
                _ => Dissipation::Direct { a: v, b: 0.0 },
            }
        }
        ParamName::CoeffB => {
            *d = match *d {
                Dissipation::Direct { a, .. } => Dissipation::Direct { a, b: v },
                _ => Dissipation::Direct { a: 1.0, b: v },
            }
        }
    }
    Ok(())
}
