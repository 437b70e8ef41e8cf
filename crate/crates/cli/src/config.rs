//! Experiment configuration: JSON on disk, CLI flag overrides on top.

use cadkit_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Params {
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_kstar")]
    pub k_star: u32,
    #[serde(default = "d_k0")]
    pub k0: f64,
    #[serde(default = "d_c0")]
    pub c0: f64,
    /// ε exponent: ε = 2^{-epsilon}.
    #[serde(default = "d_eps")]
    pub epsilon: u32,
    #[serde(default = "d_q")]
    pub q: f64,
    #[serde(default = "d_k0stop")]
    pub k0_stop: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
}

fn d_lambda() -> f64 {
    0.125
}
fn d_kstar() -> u32 {
    7
}
fn d_k0() -> f64 {
    2.0
}
fn d_c0() -> f64 {
    1.0 / 32.0
}
fn d_eps() -> u32 {
    2
}
fn d_q() -> f64 {
    2.0
}
fn d_k0stop() -> f64 {
    4.0
}
fn d_theta() -> f64 {
    0.5
}

impl Default for Params {
    fn default() -> Self {
        Params {
            lambda: d_lambda(),
            k_star: d_kstar(),
            k0: d_k0(),
            c0: d_c0(),
            epsilon: d_eps(),
            q: d_q(),
            k0_stop: d_k0stop(),
            theta: d_theta(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Config {
    pub pipeline: String,
    /// Domain preset name (disk, square, koch, lipschitz, cusp, half_plane,
    /// slit) or a path to a domain JSON file.
    pub domain: String,
    #[serde(default = "d_coeff")]
    pub coefficients: String,
    #[serde(default = "d_depth")]
    pub depth: u32,
    #[serde(default = "d_pitch")]
    pub pitch: f64,
    #[serde(default = "d_walks")]
    pub walks: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn d_coeff() -> String {
    "identity".into()
}
fn d_depth() -> u32 {
    5
}
fn d_pitch() -> f64 {
    1.0 / 64.0
}
fn d_walks() -> u32 {
    50_000
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config json")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch > 0.0 && self.pitch <= 0.25) {
            return Err(Error::Parameter(format!("pitch {} out of range", self.pitch)));
        }
        if self.depth == 0 || self.depth > 12 {
            return Err(Error::Parameter(format!("depth {} out of range", self.depth)));
        }
        let p = &self.params;
        if !(p.lambda > 0.0 && p.lambda <= 0.125) {
            return Err(Error::Parameter("lambda outside (0, 1/8]".into()));
        }
        if !(p.c0 > 0.0 && p.c0 < 1.0) {
            return Err(Error::Parameter("c0 outside (0,1)".into()));
        }
        if p.q <= 1.0 {
            return Err(Error::Parameter("q must exceed 1".into()));
        }
        if p.k0_stop < 1.0 || p.theta <= 0.0 {
            return Err(Error::Parameter("stopping parameters out of range".into()));
        }
        Ok(())
    }

    /// Build the configured domain.
    pub fn build_domain(&self) -> Result<cadkit_core::boundary::Domain> {
        use cadkit_core::boundary::shapes;
        let atom = (self.pitch / 4.0).min(2e-3);
        Ok(match self.domain.as_str() {
            "disk" => shapes::disk(2048, atom),
            "square" => shapes::unit_square(atom),
            "koch" => shapes::koch_snowflake(3, atom),
            "lipschitz" => shapes::lipschitz_graph(0.5, 4.0, 4.0, 1.0, atom),
            "cusp" => shapes::cusp_disk(1024, 3, 1e-5, atom),
            "half_plane" => shapes::half_plane_strip(8.0, 8.0, atom),
            "slit" => shapes::slit_disk(1024, atom),
            path => cadkit_core::boundary::io::load_domain(std::path::Path::new(path), atom)?,
        })
    }

    /// Window for PDE grids and Whitney decompositions.
    pub fn window(&self) -> cadkit_core::geom::Rect {
        use cadkit_core::geom::Rect;
        match self.domain.as_str() {
            "lipschitz" => Rect::new([-4.0, -0.25], [4.0, 4.0]),
            "half_plane" => Rect::new([-8.0, 0.0], [8.0, 8.0]),
            "square" => Rect::new([0.0, 0.0], [1.0, 1.0]),
            _ => Rect::new([-1.25, -1.25], [1.25, 1.25]),
        }
    }
}
