//! Moving flows between the lifted network and the small network along the
//! node map φ that forgets segment and ensemble indices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::maxflow::FlowAssignment;
use super::network::{FlowNetwork, NetworkKind};
use crate::error::{Error, Result};

fn check_pair(lifted: &FlowNetwork, small: &FlowNetwork) -> Result<()> {
    if lifted.kind() != NetworkKind::Lifted {
        return Err(Error::Provenance(
            "first network must be the lifted network".into(),
        ));
    }
    if !matches!(small.kind(), NetworkKind::Small { .. }) {
        return Err(Error::Provenance(
            "second network must be the small network".into(),
        ));
    }
    if !lifted.same_provenance(small) {
        return Err(Error::Provenance(format!(
            "networks built from different inputs: lifted (k={}, q={}), small (k={}, q={})",
            lifted.k(),
            lifted.q(),
            small.k(),
            small.q()
        )));
    }
    Ok(())
}

/// Image of every lifted arc under φ, as an index into `small.arcs()`.
pub fn arc_images(lifted: &FlowNetwork, small: &FlowNetwork) -> Result<Vec<usize>> {
    check_pair(lifted, small)?;
    let node_image = |v: usize| -> Result<usize> {
        let role = lifted.nodes()[v].project();
        small
            .node_of(role)
            .ok_or_else(|| Error::Internal(format!("node {} has no image", lifted.label(v))))
    };
    lifted
        .arcs()
        .iter()
        .map(|a| {
            let (u, v) = (node_image(a.from)?, node_image(a.to)?);
            small.arc_between(u, v).ok_or_else(|| {
                Error::Internal(format!(
                    "arc {} -> {} maps to a non-arc",
                    lifted.label(a.from),
                    lifted.label(a.to)
                ))
            })
        })
        .collect()
}

/// `f(e) = Σ_{ê ∈ φ⁻¹(e)} f̂(ê)`.
pub fn project_flow(
    f_hat: &FlowAssignment,
    lifted: &FlowNetwork,
    small: &FlowNetwork,
) -> Result<FlowAssignment> {
    let images = arc_images(lifted, small)?;
    if f_hat.values.len() != lifted.arc_count() {
        return Err(Error::ArcMismatch(format!(
            "flow has {} arc values, lifted network has {} arcs",
            f_hat.values.len(),
            lifted.arc_count()
        )));
    }
    let mut values = vec![BigRational::zero(); small.arc_count()];
    for (img, v) in images.iter().zip(&f_hat.values) {
        values[*img] += v;
    }
    Ok(FlowAssignment {
        values,
        value: f_hat.value.clone(),
    })
}

/// `f̂(ê) = f(φ(ê)) / |φ⁻¹(φ(ê))|`: every arc of a fiber carries an equal
/// share. Fiber sizes are `k+1` over source-control arcs, `(k+1)q` over
/// source-state arcs and left-right arcs, and `q` over sink arcs.
pub fn lift_flow(
    f: &FlowAssignment,
    small: &FlowNetwork,
    lifted: &FlowNetwork,
) -> Result<FlowAssignment> {
    let images = arc_images(lifted, small)?;
    if f.values.len() != small.arc_count() {
        return Err(Error::ArcMismatch(format!(
            "flow has {} arc values, small network has {} arcs",
            f.values.len(),
            small.arc_count()
        )));
    }
    let mut fiber = vec![0u64; small.arc_count()];
    for &img in &images {
        fiber[img] += 1;
    }
    let values = images
        .iter()
        .map(|&img| &f.values[img] / BigRational::from_integer(BigInt::from(fiber[img])))
        .collect();
    Ok(FlowAssignment {
        values,
        value: f.value.clone(),
    })
}
