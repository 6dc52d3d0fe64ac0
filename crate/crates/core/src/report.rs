use std::fmt;

/// Which side of `bound` a constraint's value must lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// value < bound
    Below,
    /// value ≤ bound
    AtMost,
    /// value > bound
    Above,
    /// value ≥ bound
    AtLeast,
}

impl Direction {
    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Direction::Below => value < bound,
            Direction::AtMost => value <= bound,
            Direction::Above => value > bound,
            Direction::AtLeast => value >= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Below => "<",
            Direction::AtMost => "<=",
            Direction::Above => ">",
            Direction::AtLeast => ">=",
        }
    }
}

/// One audited feasibility constraint. `satisfied` is derived from `value`,
/// `bound` and `direction`, never set independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    pub satisfied: bool,
    pub note: String,
}

impl ConstraintReport {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        direction: Direction,
        bound: f64,
        note: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            direction,
            satisfied: direction.holds(value, bound),
            note: note.into(),
        }
    }

    /// A check that could not be evaluated; reported as unsatisfied.
    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            bound: f64::NAN,
            direction: Direction::AtMost,
            satisfied: false,
            note: note.into(),
        }
    }

    /// An informational quantity with no limiting bound.
    pub fn info(name: impl Into<String>, value: f64, note: impl Into<String>) -> Self {
        Self::new(name, value, Direction::AtMost, f64::INFINITY, note)
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.satisfied { "ok  " } else { "FAIL" };
        write!(
            f,
            "[{verdict}] {:<28} {:>14.6e} {:>2} {:<14.6e} {}",
            self.name,
            self.value,
            self.direction.symbol(),
            self.bound,
            self.note
        )
    }
}
