use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Land-use classes. Declaration order is the canonical column order
/// (`x_R..x_F`) used in every output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LandUse {
    /// Residential
    R,
    /// Admin / office
    A,
    /// Green / open space
    G,
    /// Business / retail
    B,
    /// Industrial
    I,
    /// Transport
    T,
    /// Education
    E,
    /// Food
    F,
}

impl LandUse {
    pub const ALL: [LandUse; 8] =
        [LandUse::R, LandUse::A, LandUse::G, LandUse::B, LandUse::I, LandUse::T, LandUse::E, LandUse::F];
    pub const GOOD: [LandUse; 5] = [LandUse::A, LandUse::G, LandUse::B, LandUse::E, LandUse::F];
    pub const BAD: [LandUse; 2] = [LandUse::I, LandUse::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_good(self) -> bool {
        Self::GOOD.contains(&self)
    }

    pub fn is_bad(self) -> bool {
        Self::BAD.contains(&self)
    }

    pub fn is_residential(self) -> bool {
        self == LandUse::R
    }

    pub fn letter(self) -> char {
        match self {
            LandUse::R => 'R',
            LandUse::A => 'A',
            LandUse::G => 'G',
            LandUse::B => 'B',
            LandUse::I => 'I',
            LandUse::T => 'T',
            LandUse::E => 'E',
            LandUse::F => 'F',
        }
    }
}

impl fmt::Display for LandUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for LandUse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "R" => Ok(LandUse::R),
            "A" => Ok(LandUse::A),
            "G" => Ok(LandUse::G),
            "B" => Ok(LandUse::B),
            "I" => Ok(LandUse::I),
            "T" => Ok(LandUse::T),
            "E" => Ok(LandUse::E),
            "F" => Ok(LandUse::F),
            other => Err(Error::Parse(format!("unknown land use `{other}`"))),
        }
    }
}

impl Serialize for LandUse {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LandUse {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// One value per land use, indexed by [`LandUse`]. Serializes as a
/// `{"R": .., "A": .., ...}` map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UseMap<T>(pub [T; 8]);

impl<T: Copy> UseMap<T> {
    pub fn from_fn(f: impl Fn(LandUse) -> T) -> Self {
        UseMap(LandUse::ALL.map(f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (LandUse, T)> + '_ {
        LandUse::ALL.iter().map(move |&u| (u, self.0[u.index()]))
    }
}

impl UseMap<f64> {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Shares summing to one. `None` when the total is not positive.
    pub fn normalized(&self) -> Option<Self> {
        let total = self.sum();
        (total > 0.0).then(|| UseMap(self.0.map(|v| v / total)))
    }
}

impl<T> Index<LandUse> for UseMap<T> {
    type Output = T;
    fn index(&self, u: LandUse) -> &T {
        &self.0[u.index()]
    }
}

impl<T> IndexMut<LandUse> for UseMap<T> {
    fn index_mut(&mut self, u: LandUse) -> &mut T {
        &mut self.0[u.index()]
    }
}

impl<T: Serialize> Serialize for UseMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(8))?;
        for u in LandUse::ALL {
            map.serialize_entry(&u.letter().to_string(), &self.0[u.index()])?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de> + Default + Copy> Deserialize<'de> for UseMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);
        impl<'de, T: Deserialize<'de> + Default + Copy> Visitor<'de> for V<T> {
            type Value = UseMap<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map keyed by land-use letters R,A,G,B,I,T,E,F")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut m: M) -> std::result::Result<Self::Value, M::Error> {
                let mut out = UseMap([T::default(); 8]);
                while let Some((k, v)) = m.next_entry::<String, T>()? {
                    let u: LandUse = k.parse().map_err(de::Error::custom)?;
                    out[u] = v;
                }
                Ok(out)
            }
        }
        d.deserialize_map(V(std::marker::PhantomData))
    }
}

/// A strict priority order over all eight uses, e.g. `B>A>E>F>G>R>I>T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriorityOrder(Vec<LandUse>);

impl PriorityOrder {
    pub fn new(order: Vec<LandUse>) -> Result<Self> {
        let mut seen = [false; 8];
        for u in &order {
            if std::mem::replace(&mut seen[u.index()], true) {
                return Err(Error::InvalidConfig(format!("use {u} repeated in priority order")));
            }
        }
        if order.len() != 8 {
            return Err(Error::InvalidConfig(format!("priority order must list all 8 uses, got {}", order.len())));
        }
        Ok(PriorityOrder(order))
    }

    pub fn uses(&self) -> &[LandUse] {
        &self.0
    }

    /// Position of `u` in the order (0 = highest priority).
    pub fn rank(&self, u: LandUse) -> usize {
        self.0.iter().position(|&v| v == u).expect("permutation covers all uses")
    }
}

impl Default for PriorityOrder {
    fn default() -> Self {
        use LandUse::*;
        PriorityOrder(vec![B, A, E, F, G, R, I, T])
    }
}

impl fmt::Display for PriorityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|u| u.to_string()).collect();
        f.write_str(&s.join(">"))
    }
}

impl FromStr for PriorityOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let uses = s.split(['>', ',']).filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
        PriorityOrder::new(uses)
    }
}

impl Serialize for PriorityOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PriorityOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Observed share vector used as the default target `s*`.
pub fn default_target_shares() -> UseMap<f64> {
    use LandUse::*;
    let mut m = UseMap([0.0; 8]);
    m[F] = 0.058;
    m[B] = 0.174;
    m[E] = 0.047;
    m[G] = 0.065;
    m[A] = 0.059;
    m[R] = 0.333;
    m[I] = 0.190;
    m[T] = 0.074;
    m
}

/// Default construction-share vector `γ*`.
pub fn default_construction_shares() -> UseMap<f64> {
    use LandUse::*;
    let mut m = UseMap([0.0; 8]);
    m[A] = 0.10;
    m[B] = 0.25;
    m[G] = 0.0;
    m[I] = 0.05;
    m[T] = 0.05;
    m[R] = 0.35;
    m[E] = 0.10;
    m[F] = 0.10;
    m
}
