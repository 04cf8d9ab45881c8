//! Multi-RIS deployments: placement, panel orientation, LoS angle derivation
//! and seeded NLoS ray sampling.
//!
//! Global frame: BS at the origin, azimuth measured from +x in the x–y plane.
//! A panel's local azimuth is its global azimuth minus the panel yaw. AoDs
//! point from a node towards its peer, AoAs point from the receiving node
//! back towards the transmitter.

mod file;

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, wrap_two_pi, AngleDirection, ArrayGeometry, Wave};

pub use file::{ScenarioFile, PRECISION_DIGITS};

/// Angular tolerance for LoS consistency checks (radians).
pub const LOS_TOL: f64 = 1e-9;

const MIN_SEPARATION: f64 = 1e-9;

/// Position (meters) and yaw (radians, rotation of the panel frame about z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: [f64; 3],
    pub yaw: f64,
}

impl Placement {
    pub fn new(position: [f64; 3], yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_two_pi(yaw),
        }
    }

    pub fn distance_to(&self, other: &Placement) -> f64 {
        let d = displacement(self, other);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

fn displacement(a: &Placement, b: &Placement) -> [f64; 3] {
    [
        b.position[0] - a.position[0],
        b.position[1] - a.position[1],
        b.position[2] - a.position[2],
    ]
}

/// Identifies a node; RIS ids are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Bs,
    Ris(usize),
}

impl NodeId {
    fn code(self) -> u64 {
        match self {
            NodeId::Bs => 0,
            NodeId::Ris(i) => i as u64,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Bs => write!(f, "bs"),
            NodeId::Ris(i) => write!(f, "ris{i}"),
        }
    }
}

impl std::str::FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "bs" {
            return Ok(NodeId::Bs);
        }
        s.strip_prefix("ris")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .map(NodeId::Ris)
            .ok_or_else(|| format!("expected \"bs\" or \"ris<N>\" with N >= 1, got {s:?}"))
    }
}

/// One propagation path of a link: departure at the transmitting node and
/// arrival at the receiving node, each in that node's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub aod: AngleDirection,
    pub aoa: AngleDirection,
}

/// All rays of a directed link; ray 0 is the LoS path.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRays {
    pub from: NodeId,
    pub to: NodeId,
    pub rays: Vec<Ray>,
}

impl LinkRays {
    pub fn los(&self) -> &Ray {
        &self.rays[0]
    }
}

/// A node: placement plus array geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub placement: Placement,
    pub geometry: ArrayGeometry,
}

/// A complete deployment with per-link ray sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub wave: Wave,
    pub bs: Node,
    pub ris: Vec<Node>,
    pub links: Vec<LinkRays>,
    pub seed: u64,
    /// NLoS azimuth half-width Δ_a (radians).
    pub angle_spread: f64,
}

/// Geometric LoS ray from `a` to `b`.
fn los_ray(a: &Placement, b: &Placement) -> Result<Ray> {
    let d = displacement(a, b);
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r.is_nan() || r <= MIN_SEPARATION {
        return Err(Error::InvalidLayout(format!(
            "coincident placements at {:?} and {:?}",
            a.position, b.position
        )));
    }
    let alpha = d[1].atan2(d[0]);
    let theta = (d[2] / r).clamp(-1.0, 1.0).acos();
    Ok(Ray {
        aod: AngleDirection::new(theta, alpha - a.yaw)?,
        aoa: AngleDirection::new(PI - theta, alpha + PI - b.yaw)?,
    })
}

/// Places RIS `i` at `d_i (cos φ_t,i, sin φ_t,i, 0)` with the yaw that makes the
/// BS arrival azimuth in its local frame equal `φ_r,i`.
pub fn derive_layout(d_bs: &[f64], aod_bs: &[f64], aoa_ris: &[f64]) -> Result<Vec<Placement>> {
    if d_bs.len() != aod_bs.len() || d_bs.len() != aoa_ris.len() {
        return Err(Error::InvalidLayout(format!(
            "list lengths differ: {} distances, {} departure and {} arrival azimuths",
            d_bs.len(),
            aod_bs.len(),
            aoa_ris.len()
        )));
    }
    d_bs.iter()
        .zip(aod_bs)
        .zip(aoa_ris)
        .enumerate()
        .map(|(i, ((&d, &phi_t), &phi_r))| {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidLayout(format!("RIS {} at non-positive distance {d}", i + 1)));
            }
            Ok(Placement::new([d * phi_t.cos(), d * phi_t.sin(), 0.0], phi_t + PI - phi_r))
        })
        .collect()
}

/// LoS-only links for every ordered RIS pair `(i, j)`, ids 1-based.
pub fn los_inter_ris_rays(placements: &[Placement]) -> Result<Vec<LinkRays>> {
    if placements.len() < 2 {
        return Err(Error::InvalidLayout(format!(
            "need at least two RIS placements, got {}",
            placements.len()
        )));
    }
    let mut links = Vec::with_capacity(placements.len() * (placements.len() - 1));
    for (i, a) in placements.iter().enumerate() {
        for (j, b) in placements.iter().enumerate() {
            if i != j {
                links.push(LinkRays {
                    from: NodeId::Ris(i + 1),
                    to: NodeId::Ris(j + 1),
                    rays: vec![los_ray(a, b)?],
                });
            }
        }
    }
    Ok(links)
}

/// `count` horizontal directions with azimuths uniform in `los ± spread`.
pub fn sample_nlos<R: Rng + ?Sized>(
    rng: &mut R,
    los: AngleDirection,
    spread: f64,
    count: usize,
) -> Vec<AngleDirection> {
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            AngleDirection::horizontal(los.azimuth() + spread * (2.0 * u - 1.0))
        })
        .collect()
}

/// Independent generator for one directed link.
fn link_rng(seed: u64, from: NodeId, to: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((from.code() << 32) | to.code());
    rng
}

/// Parametric multi-RIS layout from BS distances and LoS azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    pub wave: Wave,
    pub bs_geometry: ArrayGeometry,
    pub ris_geometry: Vec<ArrayGeometry>,
    pub d_bs: Vec<f64>,
    pub aod_bs: Vec<f64>,
    pub aoa_ris: Vec<f64>,
    pub rays_per_bs_link: usize,
    pub rays_per_ris_link: usize,
}

/// Carrier used by the reference layout; only the ratios d/λ and L/λ enter the
/// codebooks, so the value is immaterial.
pub const REFERENCE_WAVELENGTH: f64 = 0.01;
pub const REFERENCE_D_BS: [f64; 4] = [50.0, 60.0, 40.0, 20.0];
pub const REFERENCE_AOD_BS_DEG: [f64; 4] = [30.0, 70.0, 110.0, 135.0];
pub const REFERENCE_AOA_RIS_DEG: [f64; 4] = [145.0, 90.0, 45.0, 10.0];
pub const REFERENCE_RAYS: usize = 3;

impl LayoutSpec {
    /// Four-RIS layout with a 10×5 BS, λ/4 spacing and λ/4 unit cells.
    pub fn reference(nx: usize, nz: usize) -> Result<Self> {
        let wave = Wave::new(REFERENCE_WAVELENGTH)?;
        let ris = ArrayGeometry::in_wavelengths(nx, nz, &wave, 0.25, 0.25)?;
        Ok(Self {
            wave,
            bs_geometry: ArrayGeometry::in_wavelengths(10, 5, &wave, 0.25, 0.25)?,
            ris_geometry: vec![ris; 4],
            d_bs: REFERENCE_D_BS.to_vec(),
            aod_bs: REFERENCE_AOD_BS_DEG.iter().map(|d| d.to_radians()).collect(),
            aoa_ris: REFERENCE_AOA_RIS_DEG.iter().map(|d| d.to_radians()).collect(),
            rays_per_bs_link: REFERENCE_RAYS,
            rays_per_ris_link: REFERENCE_RAYS,
        })
    }

    pub fn build(&self, seed: u64, spread: f64) -> Result<Scenario> {
        if !(spread.is_finite() && spread >= 0.0) {
            return Err(Error::InvalidAngle(format!("angle spread {spread} must be >= 0")));
        }
        if self.rays_per_bs_link == 0 || self.rays_per_ris_link == 0 {
            return Err(Error::EmptyRays("link rays"));
        }
        if self.ris_geometry.len() != self.d_bs.len() {
            return Err(Error::InvalidLayout(format!(
                "{} RIS geometries for {} placements",
                self.ris_geometry.len(),
                self.d_bs.len()
            )));
        }
        let placements = derive_layout(&self.d_bs, &self.aod_bs, &self.aoa_ris)?;
        let bs = Node {
            placement: Placement::new([0.0; 3], 0.0),
            geometry: self.bs_geometry,
        };

        let with_nlos = |mut link: LinkRays, count: usize| {
            let mut rng = link_rng(seed, link.from, link.to);
            let los = *link.los();
            let aods = sample_nlos(&mut rng, los.aod, spread, count - 1);
            let aoas = sample_nlos(&mut rng, los.aoa, spread, count - 1);
            link.rays
                .extend(aods.into_iter().zip(aoas).map(|(aod, aoa)| Ray { aod, aoa }));
            link
        };

        let mut links = Vec::with_capacity(placements.len() * placements.len());
        for (i, p) in placements.iter().enumerate() {
            let los = LinkRays {
                from: NodeId::Bs,
                to: NodeId::Ris(i + 1),
                rays: vec![los_ray(&bs.placement, p)?],
            };
            links.push(with_nlos(los, self.rays_per_bs_link));
        }
        if placements.len() >= 2 {
            for link in los_inter_ris_rays(&placements)? {
                links.push(with_nlos(link, self.rays_per_ris_link));
            }
        }

        let scenario = Scenario {
            wave: self.wave,
            bs,
            ris: placements
                .into_iter()
                .zip(&self.ris_geometry)
                .map(|(placement, &geometry)| Node { placement, geometry })
                .collect(),
            links,
            seed,
            angle_spread: spread,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Reference deployment for one seed, panel size and NLoS half-width (radians).
pub fn reference_scenario(seed: u64, n_elements: (usize, usize), spread: f64) -> Result<Scenario> {
    LayoutSpec::reference(n_elements.0, n_elements.1)?.build(seed, spread)
}

impl Scenario {
    pub fn ris_count(&self) -> usize {
        self.ris.len()
    }

    /// RIS ids `1..=I`.
    pub fn ris_ids(&self) -> impl Iterator<Item = usize> {
        1..=self.ris.len()
    }

    pub fn ris(&self, id: usize) -> Result<&Node> {
        id.checked_sub(1)
            .and_then(|i| self.ris.get(i))
            .ok_or(Error::UnknownRis(id))
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        match id {
            NodeId::Bs => Ok(&self.bs),
            NodeId::Ris(i) => self.ris(i),
        }
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Result<&LinkRays> {
        self.links
            .iter()
            .find(|l| l.from == from && l.to == to)
            .ok_or_else(|| Error::MissingLink {
                from: from.to_string(),
                to: to.to_string(),
            })
    }

    /// AoAs at `ris` of the BS→`ris` rays (LoS first).
    pub fn incident_rays(&self, ris: usize) -> Result<Vec<AngleDirection>> {
        self.ris(ris)?;
        Ok(self.link(NodeId::Bs, NodeId::Ris(ris))?.rays.iter().map(|r| r.aoa).collect())
    }

    /// AoDs at `source` of the `source`→`target` rays (LoS first).
    pub fn departure_rays(&self, source: usize, target: usize) -> Result<Vec<AngleDirection>> {
        self.ris(source)?;
        self.ris(target)?;
        Ok(self
            .link(NodeId::Ris(source), NodeId::Ris(target))?
            .rays
            .iter()
            .map(|r| r.aod)
            .collect())
    }

    /// Global azimuth of the LoS departure on a link.
    pub fn global_los_azimuth(&self, from: NodeId, to: NodeId) -> Result<f64> {
        let link = self.link(from, to)?;
        let yaw = self.node(from)?.placement.yaw;
        Ok(wrap_two_pi(link.los().aod.azimuth() + yaw))
    }

    /// Checks link completeness, non-empty ray sets and LoS consistency with
    /// the node placements.
    pub fn validate(&self) -> Result<()> {
        if self.ris.is_empty() {
            return Err(Error::InvalidLayout("scenario has no RIS".into()));
        }
        let mut expected = Vec::new();
        for i in self.ris_ids() {
            expected.push((NodeId::Bs, NodeId::Ris(i)));
        }
        for i in self.ris_ids() {
            for j in self.ris_ids() {
                if i != j {
                    expected.push((NodeId::Ris(i), NodeId::Ris(j)));
                }
            }
        }
        for link in &self.links {
            self.node(link.from)?;
            self.node(link.to)?;
            if link.from == link.to || link.to == NodeId::Bs {
                return Err(Error::InvalidLayout(format!("unsupported link {} -> {}", link.from, link.to)));
            }
        }
        for (from, to) in expected {
            let matching = self.links.iter().filter(|l| l.from == from && l.to == to).count();
            if matching > 1 {
                return Err(Error::InvalidLayout(format!("duplicate link {from} -> {to}")));
            }
            let link = self.link(from, to)?;
            if link.rays.is_empty() {
                return Err(Error::InvalidLayout(format!("link {from} -> {to} has no rays")));
            }
            let want = los_ray(&self.node(from)?.placement, &self.node(to)?.placement)?;
            let got = link.los();
            let err = [
                angle_diff(got.aod.azimuth(), want.aod.azimuth()),
                angle_diff(got.aoa.azimuth(), want.aoa.azimuth()),
                got.aod.elevation() - want.aod.elevation(),
                got.aoa.elevation() - want.aoa.elevation(),
            ]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()));
            if err > LOS_TOL {
                return Err(Error::InvalidLayout(format!(
                    "LoS ray of {from} -> {to} deviates from the placement geometry by {err:.3e} rad"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, provenance: Option<&crate::io::Provenance>) -> Result<String> {
        ScenarioFile::from_scenario(self, provenance).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ScenarioFile::from_json(text)?.into_scenario()
    }
}
