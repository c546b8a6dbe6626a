//! Run-card reader. A card is a TOML document; physical quantities are
//! strings with units such as `"0.8 uA/cm2"`.

use std::path::Path;

use toml::{Table, Value};

use super::{chen_meira, Preset, RunMode, Scenario};
use crate::chem::{salinity_to_concentration, Exposure, MeiraBC};
use crate::error::{Error, Result};
use crate::mesh::Side;
use crate::units::{parse_quantity, Dimension};

fn card_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Card(msg.into()))
}

/// A table of the card with the keys it may hold.
struct Section<'a> {
    name: &'a str,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: &'a Table, allowed: &[&str]) -> Result<Self> {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                return card_err(format!("unknown key `{key}` in [{name}]; expected one of {}", allowed.join(", ")));
            }
        }
        Ok(Section { name, table })
    }

    fn path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn quantity_of(&self, key: &str, v: &Value, dim: Dimension) -> Result<f64> {
        match v {
            Value::String(s) => parse_quantity(s, dim).map_err(|e| Error::Card(format!("{}: {e}", self.path(key)))),
            Value::Integer(i) if dim == Dimension::NONE => Ok(*i as f64),
            Value::Float(f) if dim == Dimension::NONE => Ok(*f),
            Value::Integer(_) | Value::Float(_) => {
                card_err(format!("{} needs a unit, e.g. \"{} <unit>\"", self.path(key), v))
            }
            _ => card_err(format!("{} must be a quantity string", self.path(key))),
        }
    }

    fn quantity(&self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        self.table.get(key).map(|v| self.quantity_of(key, v, dim)).transpose()
    }

    /// A percentage written with its `%` sign; returned in percent.
    fn percent(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) if s.trim_end().ends_with('%') => {
                Ok(Some(100.0 * self.quantity_of(key, &Value::String(s.clone()), Dimension::NONE)?))
            }
            Some(_) => card_err(format!("{} must be a percentage such as \"0.22 %\"", self.path(key))),
        }
    }

    fn quantities(&self, key: &str, dim: Dimension) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| self.quantity_of(key, v, dim)).collect::<Result<_>>().map(Some),
            Some(_) => card_err(format!("{} must be a list", self.path(key))),
        }
    }

    fn percents(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) if s.trim_end().ends_with('%') => {
                        Ok(100.0 * self.quantity_of(key, v, Dimension::NONE)?)
                    }
                    _ => card_err(format!("{} entries must be percentages", self.path(key))),
                })
                .collect::<Result<_>>()
                .map(Some),
            Some(_) => card_err(format!("{} must be a list", self.path(key))),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<usize>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => card_err(format!("{} must be a non-negative integer", self.path(key))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => card_err(format!("{} must be a string", self.path(key))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => card_err(format!("{} must be true or false", self.path(key))),
        }
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<&'a str>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.as_str()),
                    _ => card_err(format!("{} entries must be strings", self.path(key))),
                })
                .collect::<Result<_>>()
                .map(Some),
            Some(_) => card_err(format!("{} must be a list", self.path(key))),
        }
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn sub<'a>(root: &'a Table, name: &'a str, allowed: &[&str]) -> Result<Option<Section<'a>>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Section::new(name, t, allowed).map(Some),
        Some(_) => card_err(format!("[{name}] must be a table")),
    }
}

const TOP_KEYS: &[&str] = &[
    "name", "preset", "mode", "geometry", "concrete", "steel", "rust", "transport", "fracture", "exposure", "time",
    "sweep",
];

/// Parse a run card. `default_preset` seeds the values the card does not
/// set, unless the card names its own `preset`.
pub fn parse_card(text: &str, default_preset: Preset) -> Result<Scenario> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Card(e.to_string()))?;
    let top = Section::new("", &root, TOP_KEYS)?;
    let preset = match top.string("preset")? {
        Some(p) => Preset::parse(p).ok_or_else(|| Error::Card(format!("unknown preset `{p}`")))?,
        None => default_preset,
    };
    let mut s = Scenario::preset(preset);
    if let Some(name) = top.string("name")? {
        s.name = name.to_string();
    }
    if let Some(m) = top.string("mode")? {
        s.mode = RunMode::parse(m).ok_or_else(|| Error::Card(format!("unknown mode `{m}`")))?;
    }

    if let Some(g) = sub(
        &root,
        "geometry",
        &[
            "width",
            "height",
            "rebar_diameter",
            "cover",
            "circumferential_divisions",
            "radial_divisions",
            "radial_grading",
            "far_field_size",
            "resolve_length_scale",
            "exposed",
            "msh",
        ],
    )? {
        let geo = &mut s.geometry;
        set(&mut geo.width, g.quantity("width", Dimension::LENGTH)?);
        set(&mut geo.height, g.quantity("height", Dimension::LENGTH)?);
        set(&mut geo.rebar_diameter, g.quantity("rebar_diameter", Dimension::LENGTH)?);
        set(&mut geo.cover, g.quantity("cover", Dimension::LENGTH)?);
        set(&mut geo.circumferential_divisions, g.integer("circumferential_divisions")?);
        set(&mut geo.radial_divisions, g.integer("radial_divisions")?);
        set(&mut geo.radial_grading, g.quantity("radial_grading", Dimension::NONE)?);
        set(&mut geo.far_field_size, g.quantity("far_field_size", Dimension::LENGTH)?);
        set(&mut geo.resolve_length_scale, g.boolean("resolve_length_scale")?);
        if let Some(sides) = g.strings("exposed")? {
            geo.exposed = sides
                .iter()
                .map(|n| Side::parse(n).ok_or_else(|| Error::Card(format!("unknown side `{n}` in geometry.exposed"))))
                .collect::<Result<_>>()?;
        }
        if let Some(path) = g.string("msh")? {
            geo.msh = Some(path.into());
        }
    }

    let rust_keys = ["youngs", "poisson", "porosity", "molar_mass", "density", "iron_density", "iron_molar_mass"];
    if let Some(c) = sub(&root, "concrete", &["youngs", "poisson", "tensile_strength", "fracture_energy", "porosity", "binder_content"])? {
        set(&mut s.mech.concrete_youngs, c.quantity("youngs", Dimension::PRESSURE)?);
        set(&mut s.mech.concrete_poisson, c.quantity("poisson", Dimension::NONE)?);
        set(&mut s.mech.tensile_strength, c.quantity("tensile_strength", Dimension::PRESSURE)?);
        set(&mut s.mech.fracture_energy, c.quantity("fracture_energy", Dimension::ENERGY_PER_AREA)?);
        set(&mut s.transport.porosity, c.quantity("porosity", Dimension::NONE)?);
        set(&mut s.transport.binder_content, c.quantity("binder_content", Dimension::DENSITY)?);
    }
    if let Some(c) = sub(&root, "steel", &["youngs", "poisson"])? {
        set(&mut s.mech.steel_youngs, c.quantity("youngs", Dimension::PRESSURE)?);
        set(&mut s.mech.steel_poisson, c.quantity("poisson", Dimension::NONE)?);
    }
    if let Some(r) = sub(&root, "rust", &rust_keys)? {
        set(&mut s.mech.rust_youngs, r.quantity("youngs", Dimension::PRESSURE)?);
        set(&mut s.mech.rust_poisson, r.quantity("poisson", Dimension::NONE)?);
        set(&mut s.mech.rust_porosity, r.quantity("porosity", Dimension::NONE)?);
        if let Some(m) = r.quantity("molar_mass", Dimension::MOLAR_MASS)? {
            s.mech.rust_molar_mass = m;
            s.transport.rust_molar_mass = m;
        }
        if let Some(d) = r.quantity("density", Dimension::DENSITY)? {
            s.mech.rust_density = d;
            s.transport.rust_density = d;
        }
        set(&mut s.mech.iron_density, r.quantity("iron_density", Dimension::DENSITY)?);
        set(&mut s.mech.iron_molar_mass, r.quantity("iron_molar_mass", Dimension::MOLAR_MASS)?);
    }
    if let Some(t) = sub(
        &root,
        "transport",
        &[
            "d_chloride",
            "d_chloride_cracked",
            "d_ferrous",
            "d_ferrous_cracked",
            "d_ferric",
            "d_ferric_cracked",
            "binding_rate",
            "binding_ratio",
            "threshold",
            "current_density",
            "chloride_molar_mass",
            "oxidation_rate",
            "precipitation_rate",
            "oxygen",
            "iron_crack_transport",
            "undershoot_tolerance",
        ],
    )? {
        let p = &mut s.transport;
        set(&mut p.d_chloride, t.quantity("d_chloride", Dimension::DIFFUSIVITY)?);
        set(&mut p.d_chloride_cracked, t.quantity("d_chloride_cracked", Dimension::DIFFUSIVITY)?);
        set(&mut p.d_ferrous, t.quantity("d_ferrous", Dimension::DIFFUSIVITY)?);
        set(&mut p.d_ferrous_cracked, t.quantity("d_ferrous_cracked", Dimension::DIFFUSIVITY)?);
        set(&mut p.d_ferric, t.quantity("d_ferric", Dimension::DIFFUSIVITY)?);
        set(&mut p.d_ferric_cracked, t.quantity("d_ferric_cracked", Dimension::DIFFUSIVITY)?);
        set(&mut p.binding_rate, t.quantity("binding_rate", Dimension::RATE)?);
        set(&mut p.binding_ratio, t.quantity("binding_ratio", Dimension::NONE)?);
        set(&mut p.threshold_pct, t.percent("threshold")?);
        set(&mut p.current_density, t.quantity("current_density", Dimension::CURRENT_DENSITY)?);
        set(&mut p.chloride_molar_mass, t.quantity("chloride_molar_mass", Dimension::MOLAR_MASS)?);
        set(&mut p.oxidation_rate, t.quantity("oxidation_rate", Dimension::SECOND_ORDER_RATE)?);
        set(&mut p.precipitation_rate, t.quantity("precipitation_rate", Dimension::RATE)?);
        set(&mut p.oxygen, t.quantity("oxygen", Dimension::CONCENTRATION)?);
        set(&mut s.iron_crack_transport, t.boolean("iron_crack_transport")?);
        set(&mut s.undershoot_tolerance, t.quantity("undershoot_tolerance", Dimension::NONE)?);
    }
    if let Some(f) = sub(&root, "fracture", &["length_scale", "reference_width"])? {
        if let Some(l) = f.quantity("length_scale", Dimension::LENGTH)? {
            s.length_scale = Some(l);
        }
        set(&mut s.reference_width, f.quantity("reference_width", Dimension::LENGTH)?);
    }
    if let Some(e) = sub(
        &root,
        "exposure",
        &["model", "concentration", "salinity", "initial_content", "k_cmax", "deposition_rate", "chloride_fraction", "surface_layer"],
    )? {
        set(&mut s.surface_layer, e.quantity("surface_layer", Dimension::LENGTH)?);
        let model = e.string("model")?.unwrap_or(match s.exposure {
            Exposure::Meira(_) => "meira",
            Exposure::Constant(_) => "constant",
        });
        match model {
            "meira" => {
                if e.table.contains_key("concentration") || e.table.contains_key("salinity") {
                    return card_err("exposure: `concentration`/`salinity` belong to the constant model");
                }
                let mut bc: MeiraBC = match s.exposure {
                    Exposure::Meira(bc) => bc,
                    Exposure::Constant(_) => chen_meira(),
                };
                set(&mut bc.initial_pct, e.percent("initial_content")?);
                set(&mut bc.k_cmax, e.quantity("k_cmax", Dimension::NONE)?);
                // the Meira law takes grams per square metre
                set(&mut bc.deposition_rate, e.quantity("deposition_rate", Dimension::DEPOSITION)?.map(|v| 1e3 * v));
                set(&mut bc.chloride_fraction, e.quantity("chloride_fraction", Dimension::NONE)?);
                s.exposure = Exposure::Meira(bc);
            }
            "constant" => {
                for key in ["initial_content", "k_cmax", "deposition_rate", "chloride_fraction"] {
                    if e.table.contains_key(key) {
                        return card_err(format!("exposure: `{key}` belongs to the meira model"));
                    }
                }
                let c = e.quantity("concentration", Dimension::CONCENTRATION)?;
                // g/L and kg/m3 coincide
                let g = e.quantity("salinity", Dimension::DENSITY)?;
                s.exposure = match (c, g) {
                    (Some(_), Some(_)) => return card_err("exposure: give either concentration or salinity"),
                    (Some(c), None) => Exposure::Constant(c),
                    (None, Some(g)) => Exposure::Constant(salinity_to_concentration(g)),
                    (None, None) => match s.exposure {
                        Exposure::Constant(c) => Exposure::Constant(c),
                        Exposure::Meira(_) => return card_err("exposure: the constant model needs concentration or salinity"),
                    },
                };
            }
            other => return card_err(format!("unknown exposure model `{other}`")),
        }
    }
    if let Some(t) = sub(
        &root,
        "time",
        &["horizon", "dt", "initiation_multiplier", "output_interval", "snapshot_interval"],
    )? {
        set(&mut s.time.horizon, t.quantity("horizon", Dimension::TIME)?);
        set(&mut s.time.dt, t.quantity("dt", Dimension::TIME)?);
        set(&mut s.time.initiation_multiplier, t.quantity("initiation_multiplier", Dimension::NONE)?);
        set(&mut s.time.output_interval, t.quantity("output_interval", Dimension::TIME)?);
        if let Some(v) = t.quantity("snapshot_interval", Dimension::TIME)? {
            s.time.snapshot_interval = Some(v);
        }
    }
    if let Some(w) = sub(&root, "sweep", &["cover", "d_chloride", "threshold", "salinity", "cartesian"])? {
        set(&mut s.sweep.cover, w.quantities("cover", Dimension::LENGTH)?);
        set(&mut s.sweep.d_chloride, w.quantities("d_chloride", Dimension::DIFFUSIVITY)?);
        set(&mut s.sweep.threshold, w.percents("threshold")?);
        set(&mut s.sweep.salinity, w.quantities("salinity", Dimension::DENSITY)?);
        set(&mut s.sweep.cartesian, w.boolean("cartesian")?);
    }
    s.validate()?;
    Ok(s)
}

/// Read and parse a run card from disk.
pub fn load_card(path: &Path, default_preset: Preset) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut s = parse_card(&text, default_preset)?;
    // relative mesh paths are taken from the card's directory
    if let (Some(msh), Some(dir)) = (s.geometry.msh.as_mut(), path.parent()) {
        if msh.is_relative() {
            *msh = dir.join(&*msh);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_card_is_the_preset() {
        assert_eq!(parse_card("", Preset::Chen2020).unwrap(), Scenario::preset(Preset::Chen2020));
        assert_eq!(parse_card("preset = \"ye2017\"", Preset::Chen2020).unwrap(), Scenario::preset(Preset::Ye2017));
    }

    #[test]
    fn quantities_are_normalized() {
        let s = parse_card(
            r#"
mode = "uniform"
[geometry]
cover = "25 mm"
exposed = ["top", "left"]
[transport]
current_density = "1.5 uA/cm2"
threshold = "0.3 %"
d_chloride = "3e-12 m2/s"
[exposure]
model = "constant"
salinity = "35 g/L"
[time]
horizon = "1 yr"
dt = "12 h"
[sweep]
cover = ["15 mm", "30 mm"]
threshold = ["0.2 %"]
"#,
            Preset::Chen2020,
        )
        .unwrap();
        assert_eq!(s.mode, RunMode::Uniform);
        assert_relative_eq!(s.geometry.cover, 0.025, max_relative = 1e-12);
        assert_eq!(s.geometry.exposed, vec![Side::Top, Side::Left]);
        assert_relative_eq!(s.transport.current_density, 1.5e-2, max_relative = 1e-12);
        assert_relative_eq!(s.transport.threshold_pct, 0.3, max_relative = 1e-12);
        assert_relative_eq!(s.time.dt, 43_200.0, max_relative = 1e-12);
        match s.exposure {
            Exposure::Constant(c) => assert_relative_eq!(c, 598.9, epsilon = 0.05),
            _ => panic!("expected constant exposure"),
        }
        assert_eq!(s.sweep.cover.len(), 2);
        assert_relative_eq!(s.sweep.threshold[0], 0.2, max_relative = 1e-12);
    }

    #[test]
    fn meira_deposition_in_grams() {
        let s = parse_card("[exposure]\ndeposition_rate = \"5.69 mg/cm2/h\"", Preset::Chen2020).unwrap();
        match s.exposure {
            Exposure::Meira(bc) => assert_relative_eq!(bc.deposition_rate, 56.9 / 3600.0, max_relative = 1e-12),
            _ => panic!("expected Meira exposure"),
        }
    }

    #[test]
    fn bad_cards_are_rejected() {
        for text in [
            "[geometry]\ncover = 20",
            "[geometry]\ncover = \"20 s\"",
            "[geometry]\ncolour = \"red\"",
            "mode = \"sideways\"",
            "[transport]\nthreshold = 0.22",
            "[exposure]\nmodel = \"constant\"\nsalinity = \"35 g/L\"\nconcentration = \"600 mol/m3\"",
            "[time]\ndt = \"-1 d\"",
            "not toml ==",
        ] {
            assert!(matches!(parse_card(text, Preset::Chen2020), Err(Error::Card(_))), "{text}");
        }
    }
}
