//! Built-in named fields and profiles.

use std::fmt::Write;

use crate::fields::{parse_field, Domain, ScalarField};
use crate::trigconvex::NAMED_PROFILES;

/// Named plane fields: `(name, expression in z, description)`.
pub const NAMED_FIELDS: &[(&str, &str, &str)] = &[
    ("re", "re(z)", "Re z, harmonic"),
    ("im", "im(z)", "Im z, harmonic"),
    ("rez2", "re(z*z)", "Re z², harmonic"),
    ("xy", "re(z)*im(z)", "xy = Im z² / 2, harmonic"),
    ("abs2", "pow(abs(z),2)", "|z|², subharmonic with Riesz density 2/π"),
    ("logabs", "log(abs(z))", "ln|z|, Riesz measure a unit atom at 0"),
];

pub fn field(name: &str, domain: Domain) -> Option<ScalarField> {
    let (_, src, _) = NAMED_FIELDS.iter().find(|f| f.0 == name)?;
    Some(parse_field(src, domain).expect("catalog expressions parse"))
}

pub fn list() -> String {
    let mut out = String::from("fields:\n");
    for (name, src, desc) in NAMED_FIELDS {
        let _ = writeln!(out, "  {name:<10} {desc} [{src}]");
    }
    out.push_str("  pot:X,Y,M;...  log-modulus of the zeros (X+iY with multiplicity M)\n");
    out.push_str("  ext:P:RHO  |z|^RHO·P(arg z) for a profile P\n");
    out.push_str("profiles:\n");
    out.push_str("  const:R    profile ≡ R\n");
    for (name, src, desc) in NAMED_PROFILES {
        let _ = writeln!(out, "  {name:<10} {desc} [{src}]");
    }
    out
}

pub fn show(name: &str) -> Option<String> {
    if let Some(r) = name.strip_prefix("const:") {
        let c: f64 = r.trim().parse().ok()?;
        return Some(format!("profile ≡ {c}"));
    }
    if let Some((_, src, desc)) = NAMED_FIELDS.iter().find(|f| f.0 == name) {
        return Some(format!("{desc}\nexpression: {src}"));
    }
    if let Some((_, src, desc)) = NAMED_PROFILES.iter().find(|f| f.0 == name) {
        return Some(format!("profile {desc}\nexpression: {src}"));
    }
    if name.starts_with("pot:") {
        return Some("log-modulus Σ m·ln|z − λ| of the listed zeros".to_string());
    }
    if name.starts_with("ext:") {
        return Some("positively homogeneous extension |z|^ρ·h(arg z)".to_string());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        assert!(list().contains("abssin"));
        assert_eq!(show("const:1").unwrap(), "profile ≡ 1");
        assert!(show("re").unwrap().starts_with("Re z, harmonic"));
        assert!(show("nope").is_none());
    }

    #[test]
    fn harmonic_entries_are_harmonic() {
        use crate::zeros::discrete_riesz;
        use crate::fields::GridSpec;
        let grid = GridSpec::centered(0.5, 1.0 / 16.0).unwrap();
        for name in ["re", "im", "rez2", "xy"] {
            let m = discrete_riesz(&field(name, Domain::UnitDisk).unwrap(), &grid).unwrap();
            assert!(m.cells().iter().all(|c| c.1.abs() < 1e-12), "{name}");
        }
    }
}
