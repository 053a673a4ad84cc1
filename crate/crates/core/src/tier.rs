use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Levels of the five-level service hierarchy, coarse to fine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    City,
    District,
    LifeCircle,
    CommunityCluster,
    Community,
}

impl Tier {
    pub const ALL: [Tier; 5] = [Tier::City, Tier::District, Tier::LifeCircle, Tier::CommunityCluster, Tier::Community];

    /// Rank-sum score: city 12 down to community 8.
    pub fn rank_weight(self) -> f64 {
        match self {
            Tier::City => 12.0,
            Tier::District => 11.0,
            Tier::LifeCircle => 10.0,
            Tier::CommunityCluster => 9.0,
            Tier::Community => 8.0,
        }
    }

    /// Default minimum leftover parcel in m².
    pub fn default_min_parcel(self) -> f64 {
        match self {
            Tier::City | Tier::District => 2500.0,
            Tier::LifeCircle => 2000.0,
            Tier::CommunityCluster => 1000.0,
            Tier::Community => 500.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::City => "city",
            Tier::District => "district",
            Tier::LifeCircle => "life_circle",
            Tier::CommunityCluster => "community_cluster",
            Tier::Community => "community",
        }
    }

    /// CamelCase label used for policy parameter columns (`DistrictRadius`).
    pub fn label(self) -> &'static str {
        match self {
            Tier::City => "City",
            Tier::District => "District",
            Tier::LifeCircle => "LifeCircle",
            Tier::CommunityCluster => "CommunityCluster",
            Tier::Community => "Community",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm: String =
            s.trim().chars().filter(|c| !matches!(c, '_' | ' ' | '-')).collect::<String>().to_ascii_lowercase();
        match norm.as_str() {
            "city" => Ok(Tier::City),
            "district" => Ok(Tier::District),
            "lifecircle" => Ok(Tier::LifeCircle),
            "communitycluster" => Ok(Tier::CommunityCluster),
            "community" => Ok(Tier::Community),
            _ => Err(Error::UnknownTier(s.to_string())),
        }
    }
}

impl Serialize for Tier {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Tier {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_in_several_spellings() {
        for t in Tier::ALL {
            assert_eq!(t.name().parse::<Tier>().unwrap(), t);
            assert_eq!(t.label().parse::<Tier>().unwrap(), t);
        }
        assert_eq!("community cluster".parse::<Tier>().unwrap(), Tier::CommunityCluster);
        assert!(matches!("suburb".parse::<Tier>(), Err(Error::UnknownTier(_))));
    }

    #[test]
    fn weights_descend_linearly() {
        let w: Vec<f64> = Tier::ALL.iter().map(|t| t.rank_weight()).collect();
        assert_eq!(w, vec![12.0, 11.0, 10.0, 9.0, 8.0]);
    }
}
