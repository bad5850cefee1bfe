use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    W1,
    W2,
    W3,
    W4,
    W5,
    W6,
    W7,
    W3Prime,
    W5Prime,
    W6Prime,
    U1,
    U2,
    U3,
    U4,
}

impl Component {
    pub const ALL: [Component; 14] = [
        Component::W1,
        Component::W2,
        Component::W3,
        Component::W4,
        Component::W5,
        Component::W6,
        Component::W7,
        Component::W3Prime,
        Component::W5Prime,
        Component::W6Prime,
        Component::U1,
        Component::U2,
        Component::U3,
        Component::U4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::W1 => "w1",
            Component::W2 => "w2",
            Component::W3 => "w3",
            Component::W4 => "w4",
            Component::W5 => "w5",
            Component::W6 => "w6",
            Component::W7 => "w7",
            Component::W3Prime => "w3'",
            Component::W5Prime => "w5'",
            Component::W6Prime => "w6'",
            Component::U1 => "u1",
            Component::U2 => "u2",
            Component::U3 => "u3",
            Component::U4 => "u4",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-packet latency components in ms. `w2` and `w4` are reported for
/// reference but are already folded into the slot-aligned `w3`/`w5`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatencyBreakdown {
    values: [Option<f64>; 14],
    pub total: f64,
}

impl LatencyBreakdown {
    pub fn get(&self, c: Component) -> Option<f64> {
        self.values[c as usize]
    }

    pub fn set(&mut self, c: Component, ms: f64) {
        self.values[c as usize] = Some(ms);
    }

    pub fn with(mut self, c: Component, ms: f64) -> Self {
        self.set(c, ms);
        self
    }

    pub fn components(&self) -> impl Iterator<Item = (Component, f64)> + '_ {
        Component::ALL
            .iter()
            .filter_map(|&c| self.values[c as usize].map(|v| (c, v)))
    }

    /// Sum of the listed components (missing ones count as zero).
    pub fn sum_of(&self, parts: &[Component]) -> f64 {
        parts.iter().filter_map(|&c| self.get(c)).sum()
    }
}

impl Serialize for LatencyBreakdown {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        for (c, v) in self.components() {
            m.serialize_entry(c.name(), &v)?;
        }
        m.serialize_entry("total", &self.total)?;
        m.end()
    }
}
