use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Wellness dimension of a record.
///
/// [`Label::ALL`] fixes the class order for plan vectors and matrix axes.
/// Prediction ties also resolve in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    PA,
    IVA,
    SA,
    SEA,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::PA, Label::IVA, Label::SA, Label::SEA];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            Label::PA => 0,
            Label::IVA => 1,
            Label::SA => 2,
            Label::SEA => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            Label::PA => "PA",
            Label::IVA => "IVA",
            Label::SA => "SA",
            Label::SEA => "SEA",
        }
    }

    /// Human-readable topic name substituted into generation prompts.
    pub fn long_name(self) -> &'static str {
        match self {
            Label::PA => "Physical Aspect",
            Label::IVA => "Intellectual and Vocational Aspect",
            Label::SA => "Social Aspect",
            Label::SEA => "Spiritual and Emotional Aspect",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?} (expected one of PA, IVA, SA, SEA)")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PA" => Ok(Label::PA),
            "IVA" => Ok(Label::IVA),
            "SA" => Ok(Label::SA),
            "SEA" => Ok(Label::SEA),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips() {
        for (i, l) in Label::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(Label::from_index(i), Some(*l));
            assert_eq!(l.code().parse::<Label>().unwrap(), *l);
        }
        assert_eq!(Label::from_index(4), None);
    }

    #[test]
    fn unknown_label_names_value() {
        let err = "XX".parse::<Label>().unwrap_err();
        assert!(err.to_string().contains("XX"));
    }
}
