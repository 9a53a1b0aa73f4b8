use std::fmt;

/// Properties certified by the checks in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Nonnegativity,
    Converged,
    Symmetry,
    TraceIdentity,
    Positivity,
    ProfileConsistency,
    DivergenceFree,
    ModicaPointwise,
    WeakTheorem,
    WeakE,
    StrongTheorem,
    ModicaStrongE,
    SmyrnelisW,
}

impl Property {
    pub const ALL: [Property; 13] = [
        Property::Nonnegativity,
        Property::Converged,
        Property::Symmetry,
        Property::TraceIdentity,
        Property::Positivity,
        Property::ProfileConsistency,
        Property::DivergenceFree,
        Property::ModicaPointwise,
        Property::WeakTheorem,
        Property::WeakE,
        Property::StrongTheorem,
        Property::ModicaStrongE,
        Property::SmyrnelisW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Nonnegativity => "Nonnegativity",
            Property::Converged => "Converged",
            Property::Symmetry => "Symmetry",
            Property::TraceIdentity => "TraceIdentity",
            Property::Positivity => "Positivity",
            Property::ProfileConsistency => "ProfileConsistency",
            Property::DivergenceFree => "DivergenceFree",
            Property::ModicaPointwise => "ModicaPointwise",
            Property::WeakTheorem => "WeakTheorem",
            Property::WeakE => "Weak_e",
            Property::StrongTheorem => "StrongTheorem",
            Property::ModicaStrongE => "ModicaStrong_e",
            Property::SmyrnelisW => "Smyrnelis_w",
        }
    }

    pub fn from_name(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the worst violation of a verdict was observed.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    None,
    Radius(f64),
    Node([usize; 3]),
    Point(Vec<f64>),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::None => f.write_str("-"),
            Location::Radius(r) => write!(f, "R={}", crate::fmt_f64(*r)),
            Location::Node(idx) => write!(f, "node=({}:{}:{})", idx[0], idx[1], idx[2]),
            Location::Point(p) => {
                let parts: Vec<String> = p.iter().map(|v| crate::fmt_f64(*v)).collect();
                write!(f, "p=({})", parts.join(":"))
            }
        }
    }
}

/// Outcome of one certified property. `passed` holds exactly when
/// `worst_violation <= tolerance_used`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub property: Property,
    pub passed: bool,
    pub worst_violation: f64,
    pub worst_location: Location,
    pub tolerance_used: f64,
}

impl Verdict {
    pub fn new(
        property: Property,
        worst_violation: f64,
        worst_location: Location,
        tolerance: f64,
    ) -> Self {
        Verdict {
            property,
            passed: worst_violation <= tolerance,
            // -0.0 prints as "-0e0"
            worst_violation: worst_violation + 0.0,
            worst_location,
            tolerance_used: tolerance,
        }
    }

    /// `PROPERTY,PASS|FAIL,worst_violation,location,tolerance`
    pub fn summary_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.property,
            if self.passed { "PASS" } else { "FAIL" },
            crate::fmt_f64(self.worst_violation),
            self.worst_location,
            crate::fmt_f64(self.tolerance_used)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_iff_within_tolerance() {
        assert!(Verdict::new(Property::WeakTheorem, 1e-3, Location::None, 1e-3).passed);
        assert!(!Verdict::new(Property::WeakTheorem, 1.0000001e-3, Location::None, 1e-3).passed);
        assert!(!Verdict::new(Property::WeakTheorem, f64::NAN, Location::None, 1.0).passed);
    }

    #[test]
    fn names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn summary_line_shape() {
        let v = Verdict::new(Property::SmyrnelisW, -0.5, Location::Radius(1.25), 1e-10);
        let line = v.summary_line();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], "Smyrnelis_w");
        assert_eq!(fields[1], "PASS");
        assert_eq!(fields[3], "R=1.2500000000000000e0");
    }
}
