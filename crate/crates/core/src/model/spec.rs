//! Model structure: which parameters vary by occasion and/or mixture group.
//!
//! Notation follows the usual open-population mixture grid: `(.)` constant,
//! `(t)` time-varying, `(h)` group-specific, `(t+h)` separable, `(t x h)`
//! fully interacted. The RPT structure is a fixed three-group layout
//! (Resident, Part-time, Transient) where the transient group has its own,
//! lower, survival and the part-time group's capture is thinned by `1 - delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Const,
    Time,
    Group,
    TimePlusGroup,
    TimeByGroup,
}

impl Effect {
    fn notation(self) -> &'static str {
        match self {
            Effect::Const => ".",
            Effect::Time => "t",
            Effect::Group => "h",
            Effect::TimePlusGroup => "t+h",
            Effect::TimeByGroup => "t*h",
        }
    }
}

/// Index of each RPT group.
pub const RESIDENT: usize = 0;
pub const PART_TIME: usize = 1;
pub const TRANSIENT: usize = 2;

/// Survival classes of the RPT model, ordered by the prior constraint `phi_T < phi_NT`.
pub const PHI_TRANSIENT: usize = 0;
pub const PHI_NON_TRANSIENT: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub groups: usize,
    pub rho: Effect,
    pub phi: Effect,
    pub p: Effect,
    #[serde(default)]
    pub rpt: bool,
}

impl ModelSpec {
    /// The Resident / Part-time / Transient model.
    pub fn rpt() -> Self {
        Self { groups: 3, rho: Effect::TimeByGroup, phi: Effect::Group, p: Effect::Time, rpt: true }
    }

    /// Competitor models M1..M10.
    ///
    /// M1 `{rho_t, phi, p_t}`; M2-M4 `{rho_(t*h), phi, p_(t+h)}` with G = 2..4;
    /// M5-M7 `{rho_(t*h), phi_h, p_t}`; M8-M10 `[rho_(t*h), phi_(t*h), p_(t*h)]`.
    pub fn pledger(index: usize) -> Result<Self> {
        let (groups, rho, phi, p) = match index {
            1 => (1, Effect::Time, Effect::Const, Effect::Time),
            2..=4 => (index, Effect::TimeByGroup, Effect::Const, Effect::TimePlusGroup),
            5..=7 => (index - 3, Effect::TimeByGroup, Effect::Group, Effect::Time),
            8..=10 => (index - 6, Effect::TimeByGroup, Effect::TimeByGroup, Effect::TimeByGroup),
            _ => return Err(Error::invalid(format!("no competitor model M{index}; expected 1..=10"))),
        };
        Ok(Self { groups, rho, phi, p, rpt: false })
    }

    pub fn homogeneous() -> Self {
        Self::pledger(1).expect("M1 exists")
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 {
            return Err(Error::invalid("a model needs at least one group"));
        }
        if self.rpt {
            if *self != Self::rpt() {
                return Err(Error::invalid("the RPT model has a fixed three-group structure"));
            }
            return Ok(());
        }
        if !matches!(self.rho, Effect::Time | Effect::TimeByGroup) {
            return Err(Error::invalid(format!(
                "recruitment must be time-varying (t or t*h), got ({})",
                self.rho.notation()
            )));
        }
        if self.phi == Effect::TimePlusGroup {
            return Err(Error::invalid("survival structure (t+h) is not supported"));
        }
        Ok(())
    }

    /// Short label such as `{rho_t*h, phi_h, p_t}[3]`.
    pub fn notation(&self) -> String {
        if self.rpt {
            return "RPT".to_string();
        }
        format!(
            "{{rho_{}, phi_{}, p_{}}}[{}]",
            self.rho.notation(),
            self.phi.notation(),
            self.p.notation(),
            self.groups
        )
    }

    pub fn group_names(&self) -> Vec<String> {
        if self.rpt {
            vec!["R".into(), "P".into(), "T".into()]
        } else {
            (1..=self.groups).map(|g| g.to_string()).collect()
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self)
    }
}

impl std::str::FromStr for ModelSpec {
    type Err = Error;

    /// Accepts `rpt` or `m1`..`m10` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "rpt" {
            return Ok(Self::rpt());
        }
        if let Some(num) = lower.strip_prefix('m') {
            if let Ok(k) = num.parse::<usize>() {
                return Self::pledger(k);
            }
        }
        Err(Error::invalid(format!("unknown model `{s}`; expected rpt or m1..m10")))
    }
}

/// Resolved mapping from groups to the parameter rows that govern them.
///
/// Parameters are stored per *class*: groups sharing a class share the value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub groups: usize,
    pub rho_classes: usize,
    pub rho_class: Vec<usize>,
    pub phi_classes: usize,
    pub phi_class: Vec<usize>,
    /// Survival varies by occasion (one value per transition).
    pub phi_time: bool,
    pub mu_classes: usize,
    pub mu_class: Vec<usize>,
    /// Number of occasion-effect vectors (0 when capture is constant in time).
    pub tau_classes: usize,
    pub tau_class: Vec<Option<usize>>,
    /// Groups whose capture is thinned by `1 - delta`.
    pub thinned: Vec<bool>,
}

impl Layout {
    pub fn new(spec: &ModelSpec) -> Self {
        let g = spec.groups;
        let per_group: Vec<usize> = (0..g).collect();
        if spec.rpt {
            return Self {
                groups: 3,
                rho_classes: 3,
                rho_class: per_group,
                phi_classes: 2,
                phi_class: vec![PHI_NON_TRANSIENT, PHI_NON_TRANSIENT, PHI_TRANSIENT],
                phi_time: false,
                mu_classes: 1,
                mu_class: vec![0; 3],
                tau_classes: 1,
                tau_class: vec![Some(0); 3],
                thinned: vec![false, true, false],
            };
        }
        let shared = vec![0; g];
        let (rho_classes, rho_class) = match spec.rho {
            Effect::TimeByGroup | Effect::Group | Effect::TimePlusGroup if g > 1 => (g, per_group.clone()),
            _ => (1, shared.clone()),
        };
        let (phi_classes, phi_class) = match spec.phi {
            Effect::Group | Effect::TimeByGroup | Effect::TimePlusGroup if g > 1 => (g, per_group.clone()),
            _ => (1, shared.clone()),
        };
        let phi_time = matches!(spec.phi, Effect::Time | Effect::TimeByGroup | Effect::TimePlusGroup);
        let (mu_classes, mu_class) = match spec.p {
            Effect::Group | Effect::TimePlusGroup | Effect::TimeByGroup if g > 1 => (g, per_group.clone()),
            _ => (1, shared.clone()),
        };
        let (tau_classes, tau_class) = match spec.p {
            Effect::Const | Effect::Group => (0, vec![None; g]),
            Effect::Time | Effect::TimePlusGroup => (1, vec![Some(0); g]),
            Effect::TimeByGroup => (g, per_group.iter().map(|&k| Some(k)).collect()),
        };
        Self {
            groups: g,
            rho_classes,
            rho_class,
            phi_classes,
            phi_class,
            phi_time,
            mu_classes,
            mu_class,
            tau_classes,
            tau_class,
            thinned: vec![false; g],
        }
    }

    pub fn has_thinning(&self) -> bool {
        self.thinned.iter().any(|&b| b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn competitor_grid() {
        let m1 = ModelSpec::pledger(1).unwrap();
        assert_eq!(m1.groups, 1);
        let l = m1.layout();
        assert_eq!((l.rho_classes, l.phi_classes, l.mu_classes, l.tau_classes), (1, 1, 1, 1));
        assert!(!l.phi_time);

        let m3 = ModelSpec::pledger(3).unwrap().layout();
        assert_eq!(
            (m3.groups, m3.rho_classes, m3.phi_classes, m3.mu_classes, m3.tau_classes),
            (3, 3, 1, 3, 1)
        );

        let m6 = ModelSpec::pledger(6).unwrap().layout();
        assert_eq!((m6.groups, m6.phi_classes, m6.mu_classes), (3, 3, 1));

        let m10 = ModelSpec::pledger(10).unwrap().layout();
        assert_eq!((m10.groups, m10.phi_classes, m10.tau_classes), (4, 4, 4));
        assert!(m10.phi_time);

        assert!(ModelSpec::pledger(0).is_err());
        assert!(ModelSpec::pledger(11).is_err());
    }

    #[test]
    fn rpt_layout() {
        let l = ModelSpec::rpt().layout();
        assert_eq!(l.phi_class, vec![PHI_NON_TRANSIENT, PHI_NON_TRANSIENT, PHI_TRANSIENT]);
        assert_eq!(l.thinned, vec![false, true, false]);
        assert_eq!(l.mu_classes, 1);
        assert!(ModelSpec::rpt().validate().is_ok());
        let mut bad = ModelSpec::rpt();
        bad.groups = 2;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parse_model_names() {
        assert_eq!("RPT".parse::<ModelSpec>().unwrap(), ModelSpec::rpt());
        assert_eq!("m7".parse::<ModelSpec>().unwrap(), ModelSpec::pledger(7).unwrap());
        assert!("m0".parse::<ModelSpec>().is_err());
        assert!("foo".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn constant_recruitment_is_rejected() {
        let spec =
            ModelSpec { groups: 2, rho: Effect::Const, phi: Effect::Const, p: Effect::Time, rpt: false };
        assert!(spec.validate().is_err());
    }
}
