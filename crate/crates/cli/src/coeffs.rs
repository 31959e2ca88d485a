//! `--coeffs` resolution: a built-in set name or a JSON file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dlmscale::builtin::{builtin_coefficients, Builtin};
use dlmscale::isoflop::Frontier;
use dlmscale::laws::{Coefficients, DataLawCoefficients, LawCoefficients, LawKind};
use serde_json::Value;

/// Resolves `spec` to a built-in set or reads it from JSON. `paper` picks the
/// published set for `law`.
///
/// JSON may be bare coefficients, a fit report (`coefficients` key), a
/// frontier (`n`/`d` power laws) or an isoflop result (`frontier` key).
pub fn load(spec: &str, law: LawKind) -> Result<Builtin> {
    let name = match spec {
        "paper" => match law {
            LawKind::Compute => "paper-compute",
            LawKind::Data => "paper-data",
            LawKind::Alt1 => "paper-alt1",
            LawKind::Alt2 => "paper-alt2",
        },
        s => s,
    };
    if let Ok(b) = builtin_coefficients(name) {
        return Ok(b);
    }
    let path = Path::new(spec);
    if !path.exists() {
        // Surface the list of built-in names.
        return Ok(builtin_coefficients(name)?);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    from_json(v, law).with_context(|| format!("{}: no usable coefficients", path.display()))
}

fn from_json(v: Value, law: LawKind) -> Result<Builtin> {
    if let Some(inner) = v.get("coefficients") {
        return from_json(inner.clone(), law);
    }
    if let Some(inner) = v.get("frontier") {
        return from_json(inner.clone(), law);
    }
    if v.get("n").is_some() && v.get("d").is_some() {
        return Ok(Builtin::Frontier(serde_json::from_value::<Frontier>(v)?));
    }
    // Prefer the requested law when the fields allow it.
    let typed = match law {
        LawKind::Compute => serde_json::from_value::<LawCoefficients>(v.clone()).map(Coefficients::Compute),
        LawKind::Data => serde_json::from_value::<DataLawCoefficients>(v.clone()).map(Coefficients::Data),
        _ => Err(serde::de::Error::custom("")),
    };
    match typed {
        Ok(c) => Ok(Builtin::Law(c)),
        Err(_) => Ok(Builtin::Law(serde_json::from_value::<Coefficients>(v)?)),
    }
}

pub fn compute_law(b: &Builtin) -> Option<LawCoefficients> {
    match b {
        Builtin::Law(Coefficients::Compute(c)) => Some(*c),
        Builtin::Law(Coefficients::Data(c)) => Some(c.learning()),
        Builtin::Law(Coefficients::Alt1(c)) => Some(c.learning()),
        Builtin::Law(Coefficients::Alt2(c)) => Some(c.learning()),
        Builtin::Frontier(_) => None,
    }
}

pub fn data_law(spec: &str) -> Result<DataLawCoefficients> {
    match load(spec, LawKind::Data)? {
        Builtin::Law(Coefficients::Data(c)) => Ok(c),
        Builtin::Law(c) => bail!("`{spec}` holds {} coefficients; this command needs the data law", c.kind()),
        Builtin::Frontier(_) => bail!("`{spec}` is a frontier; this command needs the data law"),
    }
}

pub fn law(spec: &str, kind: LawKind) -> Result<Coefficients> {
    match load(spec, kind)? {
        Builtin::Law(c) if c.kind() == kind => Ok(c),
        Builtin::Law(c) => bail!("`{spec}` holds {} coefficients, expected {kind}", c.kind()),
        Builtin::Frontier(_) => bail!("`{spec}` is a frontier, expected {kind} coefficients"),
    }
}
