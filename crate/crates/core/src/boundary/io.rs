//! Domain file format.
//!
//! `{"dim": 2, "components": [[[x,y],...], ...], "interior_hint": [x,y]}`
//! Components are closed loops listed without a repeated endpoint; the loader
//! rejects open polylines (a repeated endpoint marks an authoring error) and
//! degenerate loops.

use super::{Domain, InteriorRule};
use crate::geom::{dist, Pt};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct DomainFile {
    dim: usize,
    components: Vec<Vec<[f64; 2]>>,
    interior_hint: [f64; 2],
}

pub fn load_domain_str(text: &str, atom_len: f64) -> Result<Domain> {
    let file: DomainFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("domain json: {e}")))?;
    if file.dim != 2 {
        return Err(Error::Format(format!(
            "unsupported dimension {} in domain file",
            file.dim
        )));
    }
    let mut components = Vec::new();
    for (ci, comp) in file.components.iter().enumerate() {
        if comp.len() < 3 {
            return Err(Error::Format(format!(
                "component {ci}: open or degenerate polyline ({} vertices)",
                comp.len()
            )));
        }
        let verts: Vec<Pt> = comp.iter().map(|v| [v[0], v[1], 0.0]).collect();
        if dist(verts[0], verts[verts.len() - 1]) == 0.0 {
            return Err(Error::Format(format!(
                "component {ci}: repeated endpoint; list loop vertices once"
            )));
        }
        components.push(verts);
    }
    let closed = vec![true; components.len()];
    let domain = Domain::from_polylines(components, closed, InteriorRule::RayParity, atom_len)?;
    domain.validate()?;
    let hint = [file.interior_hint[0], file.interior_hint[1], 0.0];
    if !domain.is_inside(hint) {
        return Err(Error::InvalidDomain(
            "interior hint is not inside the loaded domain".into(),
        ));
    }
    Ok(domain)
}

pub fn load_domain(path: &std::path::Path, atom_len: f64) -> Result<Domain> {
    let text = std::fs::read_to_string(path)?;
    load_domain_str(&text, atom_len)
}

pub fn save_domain(domain: &Domain, interior_hint: [f64; 2]) -> Result<String> {
    if domain.ambient_dim != 2 {
        return Err(Error::Format("only planar domains serialize".into()));
    }
    let file = DomainFile {
        dim: 2,
        components: domain
            .components
            .iter()
            .map(|c| c.iter().map(|v| [v[0], v[1]]).collect())
            .collect(),
        interior_hint,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
}
