//! Sensor identifiers and sets of sensors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Sensor {
    Acc,
    Mag,
    Gyro,
    Mic,
}

impl Sensor {
    pub const ALL: [Sensor; 4] = [Sensor::Acc, Sensor::Mag, Sensor::Gyro, Sensor::Mic];
    /// Motion sensors in feature-block order.
    pub const MOTION: [Sensor; 3] = [Sensor::Acc, Sensor::Mag, Sensor::Gyro];

    pub fn tag(self) -> &'static str {
        match self {
            Sensor::Acc => "ACC",
            Sensor::Mag => "MAG",
            Sensor::Gyro => "GYRO",
            Sensor::Mic => "MIC",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Sensor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ACC" => Ok(Sensor::Acc),
            "MAG" => Ok(Sensor::Mag),
            "GYRO" => Ok(Sensor::Gyro),
            "MIC" => Ok(Sensor::Mic),
            other => Err(invalid(format!("unknown sensor '{other}'"))),
        }
    }
}

/// A set of sensors, written `ACC+MAG+GYRO`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SensorSet(u8);

impl SensorSet {
    pub const EMPTY: SensorSet = SensorSet(0);
    pub const ACC: SensorSet = SensorSet(1);
    pub const ACC_MAG: SensorSet = SensorSet(0b11);
    pub const ACC_MAG_GYRO: SensorSet = SensorSet(0b111);

    /// The three sensor sets the standing-activity recipes are defined for.
    pub const FUSION_SETS: [SensorSet; 3] = [Self::ACC, Self::ACC_MAG, Self::ACC_MAG_GYRO];

    pub fn from_sensors<I: IntoIterator<Item = Sensor>>(sensors: I) -> Self {
        sensors.into_iter().fold(Self::EMPTY, |s, x| s.with(x))
    }

    /// All 16 subsets of {ACC, MAG, GYRO, MIC}.
    pub fn all_subsets() -> impl Iterator<Item = SensorSet> {
        (0u8..16).map(SensorSet)
    }

    pub fn with(self, sensor: Sensor) -> Self {
        SensorSet(self.0 | sensor.bit())
    }

    pub fn contains(self, sensor: Sensor) -> bool {
        self.0 & sensor.bit() != 0
    }

    pub fn is_superset_of(self, other: SensorSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Sensor> {
        Sensor::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    /// Motion sensors of the set, in block order.
    pub fn motion(self) -> impl Iterator<Item = Sensor> {
        Sensor::MOTION.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn is_motion_only(self) -> bool {
        !self.is_empty() && !self.contains(Sensor::Mic)
    }
}

impl fmt::Display for SensorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("NONE");
        }
        let tags: Vec<&str> = self.iter().map(Sensor::tag).collect();
        f.write_str(&tags.join("+"))
    }
}

impl FromStr for SensorSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("NONE") {
            return Ok(Self::EMPTY);
        }
        s.split(['+', ','])
            .map(str::parse::<Sensor>)
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_sensors)
    }
}

impl Serialize for SensorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SensorSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parse_roundtrip() {
        for set in SensorSet::all_subsets() {
            let text = set.to_string();
            assert_eq!(text.parse::<SensorSet>().unwrap(), set, "{text}");
        }
        assert_eq!(SensorSet::ACC_MAG_GYRO.to_string(), "ACC+MAG+GYRO");
        assert_eq!("mic+acc".parse::<SensorSet>().unwrap().to_string(), "ACC+MIC");
    }

    #[test]
    fn rejects_unknown_sensor() {
        assert!("ACC+GPS".parse::<SensorSet>().is_err());
    }
}
