//! JSON scenario document. Angles are degrees and lengths are meters or
//! wavelength fractions; every number is written with 12 significant digits.

use serde::{Deserialize, Serialize};

use super::{LinkRays, Node, NodeId, Placement, Ray, Scenario};
use crate::error::{Error, Result};
use crate::geometry::{wrap_two_pi, AngleDirection, ArrayGeometry, Wave};
use crate::io::{round_significant, Provenance};

pub const PRECISION_DIGITS: usize = 12;

fn r(x: f64) -> f64 {
    round_significant(x, PRECISION_DIGITS)
}

fn azimuth_deg(rad: f64) -> f64 {
    let d = r(wrap_two_pi(rad).to_degrees());
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveEntry {
    pub wavelength_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub position_m: [f64; 3],
    pub yaw_deg: f64,
    pub nx: usize,
    pub nz: usize,
    pub dx_over_lambda: f64,
    pub dz_over_lambda: f64,
    pub ucx_over_lambda: f64,
    pub ucz_over_lambda: f64,
}

/// `[elevation, azimuth]` pairs in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayEntry {
    pub aod_deg: [f64; 2],
    pub aoa_deg: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub from: String,
    pub to: String,
    pub rays: Vec<RayEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub wave: WaveEntry,
    pub bs: NodeEntry,
    pub ris: Vec<NodeEntry>,
    pub links: Vec<LinkEntry>,
    pub seed: u64,
    pub delta_a_deg: f64,
}

impl NodeEntry {
    fn from_node(node: &Node, wave: &Wave) -> Self {
        let l = wave.wavelength();
        let g = &node.geometry;
        Self {
            position_m: node.placement.position.map(r),
            yaw_deg: azimuth_deg(node.placement.yaw),
            nx: g.nx,
            nz: g.nz,
            dx_over_lambda: r(g.dx / l),
            dz_over_lambda: r(g.dz / l),
            ucx_over_lambda: r(g.unit_cell_x / l),
            ucz_over_lambda: r(g.unit_cell_z / l),
        }
    }

    fn to_node(&self, field: &str, wave: &Wave) -> Result<Node> {
        if let Some(i) = self.position_m.iter().position(|v| !v.is_finite()) {
            return Err(Error::schema(format!("{field}.position_m[{i}]"), "must be finite"));
        }
        if !self.yaw_deg.is_finite() {
            return Err(Error::schema(format!("{field}.yaw_deg"), "must be finite"));
        }
        for (name, n) in [("nx", self.nx), ("nz", self.nz)] {
            if n == 0 {
                return Err(Error::schema(format!("{field}.{name}"), "must be >= 1"));
            }
        }
        for (name, v) in [
            ("dx_over_lambda", self.dx_over_lambda),
            ("dz_over_lambda", self.dz_over_lambda),
            ("ucx_over_lambda", self.ucx_over_lambda),
            ("ucz_over_lambda", self.ucz_over_lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::schema(format!("{field}.{name}"), format!("{v} must be positive")));
            }
        }
        let l = wave.wavelength();
        Ok(Node {
            placement: Placement::new(self.position_m, self.yaw_deg.to_radians()),
            geometry: ArrayGeometry::new(
                self.nx,
                self.nz,
                self.dx_over_lambda * l,
                self.dz_over_lambda * l,
                self.ucx_over_lambda * l,
                self.ucz_over_lambda * l,
            )?,
        })
    }
}

fn angle_entry(a: &AngleDirection) -> [f64; 2] {
    [r(a.elevation().to_degrees()), azimuth_deg(a.azimuth())]
}

fn parse_angle(field: String, v: [f64; 2]) -> Result<AngleDirection> {
    if !(v[0].is_finite() && (0.0..=180.0).contains(&v[0])) {
        return Err(Error::schema(field, format!("elevation {} deg outside [0, 180]", v[0])));
    }
    if !v[1].is_finite() {
        return Err(Error::schema(field, "azimuth must be finite"));
    }
    AngleDirection::from_degrees(v[0], v[1]).map_err(|e| Error::schema(field, e.to_string()))
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario, provenance: Option<&Provenance>) -> Self {
        Self {
            provenance: provenance.cloned(),
            wave: WaveEntry {
                wavelength_m: r(s.wave.wavelength()),
            },
            bs: NodeEntry::from_node(&s.bs, &s.wave),
            ris: s.ris.iter().map(|n| NodeEntry::from_node(n, &s.wave)).collect(),
            links: s
                .links
                .iter()
                .map(|l| LinkEntry {
                    from: l.from.to_string(),
                    to: l.to.to_string(),
                    rays: l
                        .rays
                        .iter()
                        .map(|ray| RayEntry {
                            aod_deg: angle_entry(&ray.aod),
                            aoa_deg: angle_entry(&ray.aoa),
                        })
                        .collect(),
                })
                .collect(),
            seed: s.seed,
            delta_a_deg: r(s.angle_spread.to_degrees()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::io::parse_json(text)
    }

    /// Validates every field and converts to internal units (radians, meters).
    pub fn into_scenario(self) -> Result<Scenario> {
        if !(self.wave.wavelength_m.is_finite() && self.wave.wavelength_m > 0.0) {
            return Err(Error::schema("wave.wavelength_m", "must be positive"));
        }
        let wave = Wave::new(self.wave.wavelength_m)?;
        if !(self.delta_a_deg.is_finite() && self.delta_a_deg >= 0.0) {
            return Err(Error::schema("delta_a_deg", "must be >= 0"));
        }
        if self.ris.is_empty() {
            return Err(Error::schema("ris", "at least one RIS is required"));
        }
        let bs = self.bs.to_node("bs", &wave)?;
        let ris = self
            .ris
            .iter()
            .enumerate()
            .map(|(i, n)| n.to_node(&format!("ris[{i}]"), &wave))
            .collect::<Result<Vec<_>>>()?;

        let mut links = Vec::with_capacity(self.links.len());
        for (li, link) in self.links.iter().enumerate() {
            let endpoint = |name: &str, v: &str| -> Result<NodeId> {
                let id: NodeId = v
                    .parse()
                    .map_err(|m: String| Error::schema(format!("links[{li}].{name}"), m))?;
                if let NodeId::Ris(i) = id {
                    if i > ris.len() {
                        return Err(Error::schema(
                            format!("links[{li}].{name}"),
                            format!("{v} does not exist ({} RIS defined)", ris.len()),
                        ));
                    }
                }
                Ok(id)
            };
            let from = endpoint("from", &link.from)?;
            let to = endpoint("to", &link.to)?;
            if link.rays.is_empty() {
                return Err(Error::schema(format!("links[{li}].rays"), "at least one ray is required"));
            }
            let rays = link
                .rays
                .iter()
                .enumerate()
                .map(|(ri, ray)| {
                    Ok(Ray {
                        aod: parse_angle(format!("links[{li}].rays[{ri}].aod_deg"), ray.aod_deg)?,
                        aoa: parse_angle(format!("links[{li}].rays[{ri}].aoa_deg"), ray.aoa_deg)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            links.push(LinkRays { from, to, rays });
        }

        let scenario = Scenario {
            wave,
            bs,
            ris,
            links,
            seed: self.seed,
            angle_spread: self.delta_a_deg.to_radians(),
        };
        scenario.validate().map_err(|e| match e {
            Error::Schema { .. } => e,
            other => Error::schema("links", other.to_string()),
        })?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::reference_scenario;
    use proptest::prelude::*;

    #[test]
    fn reference_file_has_expected_keys() {
        let s = reference_scenario(7, (7, 7), 10f64.to_radians()).unwrap();
        let text = s.to_json(None).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["wave", "bs", "ris", "links", "seed", "delta_a_deg"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["links"].as_array().unwrap().len(), 16);
        assert_eq!(v["ris"][0]["dx_over_lambda"], 0.25);
        assert_eq!(v["links"][0]["from"], "bs");
        assert_eq!(v["links"][0]["to"], "ris1");
        assert_eq!(v["links"][0]["rays"][0]["aod_deg"][1], 30.0);
        assert_eq!(v["links"][0]["rays"][0]["aoa_deg"][1], 145.0);
        assert_eq!(v["delta_a_deg"], 10.0);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let s = reference_scenario(1, (2, 2), 0.0).unwrap();
        let good = s.to_json(None).unwrap();

        let bad = good.replacen("\"nx\": 2", "\"nx\": 0", 1);
        let err = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("ris[0].nx"), "{err}");

        let bad = good.replacen("\"from\": \"bs\"", "\"from\": \"tower\"", 1);
        let err = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("links[0].from"), "{err}");

        let bad = good.replacen("\"seed\"", "\"sede\"", 1);
        let err = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("sede"), "{err}");

        let bad = good.replacen("\"wavelength_m\": 0.01", "\"wavelength_m\": -1.0", 1);
        let err = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("wave.wavelength_m"), "{err}");
    }

    #[test]
    fn load_rejects_inconsistent_los() {
        let s = reference_scenario(1, (2, 2), 0.0).unwrap();
        let mut f = ScenarioFile::from_scenario(&s, None);
        f.links[6].rays[0].aod_deg[1] += 0.5;
        let err = f.into_scenario().unwrap_err().to_string();
        assert!(err.contains("LoS"), "{err}");
    }

    #[test]
    fn provenance_is_carried_and_ignored_on_load() {
        let s = reference_scenario(3, (2, 2), 0.1).unwrap();
        let p = Provenance::new("risfocus scenario gen --seed 3", Some(3));
        let text = s.to_json(Some(&p)).unwrap();
        let f = ScenarioFile::from_json(&text).unwrap();
        assert_eq!(f.provenance.as_ref(), Some(&p));
        assert_eq!(f.into_scenario().unwrap().seed, 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn write_load_write_is_stable(seed in 0u64..1_000_000, spread_deg in 0.0f64..30.0, n in 1usize..6) {
            let s = reference_scenario(seed, (n, n + 1), spread_deg.to_radians()).unwrap();
            let first = s.to_json(None).unwrap();
            let loaded = Scenario::from_json(&first).unwrap();
            let second = loaded.to_json(None).unwrap();
            prop_assert_eq!(&first, &second);
            for (a, b) in s.links.iter().zip(&loaded.links) {
                for (x, y) in a.rays.iter().zip(&b.rays) {
                    for (p, q) in [(x.aod, y.aod), (x.aoa, y.aoa)] {
                        prop_assert!(crate::geometry::angle_diff(p.azimuth(), q.azimuth()).abs() <= 1e-9);
                        prop_assert!((p.elevation() - q.elevation()).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}
