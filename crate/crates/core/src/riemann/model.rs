use serde::{Deserialize, Serialize};

use crate::{tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    DaganzoFifo,
    Lebacque,
    SupplyProportional,
    PriorityBased,
    PartialEvacuation,
}

impl ModelTag {
    pub const ALL: [ModelTag; 5] = [
        ModelTag::DaganzoFifo,
        ModelTag::Lebacque,
        ModelTag::SupplyProportional,
        ModelTag::PriorityBased,
        ModelTag::PartialEvacuation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::DaganzoFifo => "daganzo-fifo",
            ModelTag::Lebacque => "lebacque",
            ModelTag::SupplyProportional => "supply-proportional",
            ModelTag::PriorityBased => "priority-based",
            ModelTag::PartialEvacuation => "partial-evacuation",
        }
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Diverge model (entropy condition) with its parameters.
///
/// * `xi`: turning proportions `(xi_1, xi_2)` of routed vehicles.
/// * `alpha`: priority weights `(alpha_1, alpha_2)` for unrouted demand.
///
/// Constructors validate parameters; the fields are private so every value
/// in circulation is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergeModel {
    DaganzoFifo { xi: [f64; 2] },
    Lebacque { xi: [f64; 2] },
    SupplyProportional,
    PriorityBased { alpha: [f64; 2] },
    PartialEvacuation { xi: [f64; 2], alpha: [f64; 2] },
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn sums_to_one(p: [f64; 2]) -> bool {
    (p[0] + p[1] - 1.0).abs() <= tol::FLUX
}

fn check_fifo(xi: [f64; 2]) -> Result<()> {
    if !(xi[0] > 0.0 && xi[1] > 0.0 && in_unit(xi[0]) && in_unit(xi[1]) && sums_to_one(xi)) {
        return Err(Error::Parameter(format!(
            "FIFO proportions must be positive and sum to 1, got {xi:?}"
        )));
    }
    Ok(())
}

impl DivergeModel {
    pub fn daganzo(xi: [f64; 2]) -> Result<Self> {
        check_fifo(xi)?;
        Ok(DivergeModel::DaganzoFifo { xi })
    }

    pub fn lebacque(xi: [f64; 2]) -> Result<Self> {
        check_fifo(xi)?;
        Ok(DivergeModel::Lebacque { xi })
    }

    pub fn supply_proportional() -> Self {
        DivergeModel::SupplyProportional
    }

    pub fn priority(alpha: [f64; 2]) -> Result<Self> {
        if !(in_unit(alpha[0]) && in_unit(alpha[1]) && sums_to_one(alpha)) {
            return Err(Error::Parameter(format!(
                "priorities must lie in [0, 1] and sum to 1, got {alpha:?}"
            )));
        }
        Ok(DivergeModel::PriorityBased { alpha })
    }

    pub fn partial(xi: [f64; 2], alpha: [f64; 2]) -> Result<Self> {
        if !(in_unit(xi[0]) && in_unit(xi[1]) && xi[0] + xi[1] <= 1.0 + tol::FLUX) {
            return Err(Error::Parameter(format!(
                "partial proportions must be nonnegative with sum <= 1, got {xi:?}"
            )));
        }
        if !sums_to_one(alpha) {
            return Err(Error::Parameter(format!(
                "priorities must sum to 1, got {alpha:?}"
            )));
        }
        for (i, j) in [(0, 1), (1, 0)] {
            if alpha[i] < xi[i] - tol::FLUX || alpha[i] > 1.0 - xi[j] + tol::FLUX {
                return Err(Error::Parameter(format!(
                    "alpha_{} = {} outside [xi_{}, 1 - xi_{}] = [{}, {}]",
                    i + 1,
                    alpha[i],
                    i + 1,
                    j + 1,
                    xi[i],
                    1.0 - xi[j]
                )));
            }
        }
        Ok(DivergeModel::PartialEvacuation { xi, alpha })
    }

    /// Build from a tag and optional parameters, as read from configuration.
    pub fn from_parts(tag: ModelTag, xi: Option<[f64; 2]>, alpha: Option<[f64; 2]>) -> Result<Self> {
        let need = |p: Option<[f64; 2]>, name: &str| {
            p.ok_or_else(|| Error::Parameter(format!("model {tag} requires `{name}`")))
        };
        match tag {
            ModelTag::DaganzoFifo => Self::daganzo(need(xi, "xi")?),
            ModelTag::Lebacque => Self::lebacque(need(xi, "xi")?),
            ModelTag::SupplyProportional => Ok(Self::supply_proportional()),
            ModelTag::PriorityBased => Self::priority(need(alpha, "alpha")?),
            ModelTag::PartialEvacuation => Self::partial(need(xi, "xi")?, need(alpha, "alpha")?),
        }
    }

    pub fn tag(&self) -> ModelTag {
        match self {
            DivergeModel::DaganzoFifo { .. } => ModelTag::DaganzoFifo,
            DivergeModel::Lebacque { .. } => ModelTag::Lebacque,
            DivergeModel::SupplyProportional => ModelTag::SupplyProportional,
            DivergeModel::PriorityBased { .. } => ModelTag::PriorityBased,
            DivergeModel::PartialEvacuation { .. } => ModelTag::PartialEvacuation,
        }
    }

    pub fn xi(&self) -> Option<[f64; 2]> {
        match *self {
            DivergeModel::DaganzoFifo { xi }
            | DivergeModel::Lebacque { xi }
            | DivergeModel::PartialEvacuation { xi, .. } => Some(xi),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<[f64; 2]> {
        match *self {
            DivergeModel::PriorityBased { alpha } | DivergeModel::PartialEvacuation { alpha, .. } => {
                Some(alpha)
            }
            _ => None,
        }
    }

    /// Models whose vehicles all follow predefined routes.
    pub fn is_fifo_family(&self) -> bool {
        matches!(self, DivergeModel::DaganzoFifo { .. } | DivergeModel::Lebacque { .. })
    }
}

impl std::fmt::Display for DivergeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.tag())?;
        if let Some(xi) = self.xi() {
            write!(f, " xi=({}, {})", xi[0], xi[1])?;
        }
        if let Some(a) = self.alpha() {
            write!(f, " alpha=({}, {})", a[0], a[1])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(DivergeModel::daganzo([0.7, 0.3]).is_ok());
        assert!(DivergeModel::daganzo([1.0, 0.0]).is_err());
        assert!(DivergeModel::lebacque([0.0, 1.0]).is_err());
        assert!(DivergeModel::lebacque([0.6, 0.3]).is_err());
        assert!(DivergeModel::priority([1.0, 0.0]).is_ok());
        assert!(DivergeModel::priority([1.1, -0.1]).is_err());
        assert!(DivergeModel::partial([0.3, 0.2], [0.5, 0.5]).is_ok());
        assert!(DivergeModel::partial([0.0, 0.0], [0.9, 0.1]).is_ok());
        // alpha_1 must be at least xi_1.
        assert!(DivergeModel::partial([0.3, 0.2], [0.2, 0.8]).is_err());
        // alpha_1 must not exceed 1 - xi_2.
        assert!(DivergeModel::partial([0.3, 0.2], [0.85, 0.15]).is_err());
        assert!(DivergeModel::partial([0.7, 0.4], [0.7, 0.3]).is_err());
    }

    #[test]
    fn from_parts_requires_parameters() {
        assert!(DivergeModel::from_parts(ModelTag::DaganzoFifo, None, None).is_err());
        assert_eq!(
            DivergeModel::from_parts(ModelTag::SupplyProportional, None, None).unwrap(),
            DivergeModel::SupplyProportional
        );
        let m = DivergeModel::from_parts(ModelTag::PartialEvacuation, Some([0.1, 0.1]), Some([0.5, 0.5]))
            .unwrap();
        assert_eq!(m.tag(), ModelTag::PartialEvacuation);
        assert_eq!(m.xi(), Some([0.1, 0.1]));
    }
}
