use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActivityFamily {
    Adl,
    Om,
    Fall,
}

impl ActivityFamily {
    pub fn prefix(self) -> &'static str {
        match self {
            ActivityFamily::Adl => "ADL",
            ActivityFamily::Om => "OM",
            ActivityFamily::Fall => "FALL",
        }
    }

    pub fn valid_indices(self) -> &'static [u8] {
        match self {
            ActivityFamily::Adl => &[1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 14, 15],
            ActivityFamily::Om => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
            ActivityFamily::Fall => &[1, 2, 3, 5, 6],
        }
    }
}

/// One entry of the activity catalogue: `ADL_2`, `OM_6`, `FALL_3` and so on,
/// optionally performed carrying a rifle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivityCode {
    pub family: ActivityFamily,
    pub index: u8,
    pub with_rifle: bool,
}

// ADL codes also performed with a rifle (then counted as military activity).
const ADL_WITH_RIFLE: &[u8] = &[1, 4, 5, 6, 11, 12, 13, 14];

struct CatalogEntry {
    family: ActivityFamily,
    index: u8,
    name: &'static str,
    repetitions: u32,
    duration_s: f64,
}

const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 1,
        name: "Standing",
        repetitions: 1,
        duration_s: 180.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 2,
        name: "Walking",
        repetitions: 1,
        duration_s: 180.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 3,
        name: "Running",
        repetitions: 3,
        duration_s: 30.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 4,
        name: "Jumping",
        repetitions: 3,
        duration_s: 30.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 5,
        name: "Stair climbing",
        repetitions: 3,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 6,
        name: "Stair descending",
        repetitions: 3,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 7,
        name: "Sitting in chair",
        repetitions: 6,
        duration_s: 5.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 8,
        name: "Standing from chair",
        repetitions: 6,
        duration_s: 5.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 11,
        name: "Uphill walking",
        repetitions: 3,
        duration_s: 30.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 12,
        name: "Downhill walking",
        repetitions: 3,
        duration_s: 30.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 13,
        name: "Uphill running",
        repetitions: 3,
        duration_s: 15.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 14,
        name: "Downhill running",
        repetitions: 3,
        duration_s: 15.0,
    },
    CatalogEntry {
        family: ActivityFamily::Adl,
        index: 15,
        name: "Stair hopping",
        repetitions: 3,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 1,
        name: "Sweep (Walking)",
        repetitions: 1,
        duration_s: 180.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 2,
        name: "Sweep (Quick Engagement)",
        repetitions: 3,
        duration_s: 45.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 3,
        name: "Kneeling Shooting Position (Standing)",
        repetitions: 3,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 4,
        name: "Kneeling Shooting Position (Walking)",
        repetitions: 3,
        duration_s: 60.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 5,
        name: "Kneeling Shooting Position (Running)",
        repetitions: 3,
        duration_s: 45.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 6,
        name: "Prone Shooting Position (Standing)",
        repetitions: 3,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 7,
        name: "Prone Shooting Position (Walking)",
        repetitions: 3,
        duration_s: 60.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 8,
        name: "Prone Shooting Position (Running)",
        repetitions: 3,
        duration_s: 45.0,
    },
    CatalogEntry {
        family: ActivityFamily::Om,
        index: 9,
        name: "Crawl",
        repetitions: 3,
        duration_s: 50.0,
    },
    CatalogEntry {
        family: ActivityFamily::Fall,
        index: 1,
        name: "Frontal Fall (Supine)",
        repetitions: 6,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Fall,
        index: 2,
        name: "Frontal Fall (Prone)",
        repetitions: 6,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Fall,
        index: 3,
        name: "Backward Fall",
        repetitions: 6,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Fall,
        index: 5,
        name: "Lateral Fall - Right",
        repetitions: 6,
        duration_s: 10.0,
    },
    CatalogEntry {
        family: ActivityFamily::Fall,
        index: 6,
        name: "Lateral Fall - Left",
        repetitions: 6,
        duration_s: 10.0,
    },
];

impl ActivityCode {
    pub fn new(family: ActivityFamily, index: u8, with_rifle: bool) -> Result<Self> {
        let code = ActivityCode {
            family,
            index,
            with_rifle,
        };
        if !family.valid_indices().contains(&index) {
            return Err(Error::InvalidActivity(code.to_string()));
        }
        if with_rifle && family == ActivityFamily::Adl && !ADL_WITH_RIFLE.contains(&index) {
            return Err(Error::InvalidActivity(code.to_string()));
        }
        Ok(code)
    }

    pub fn adl(index: u8) -> Self {
        Self::new(ActivityFamily::Adl, index, false).expect("valid ADL index")
    }

    pub fn om(index: u8) -> Self {
        Self::new(ActivityFamily::Om, index, false).expect("valid OM index")
    }

    pub fn fall(index: u8) -> Self {
        Self::new(ActivityFamily::Fall, index, false).expect("valid FALL index")
    }

    pub fn with_rifle(self, with_rifle: bool) -> Result<Self> {
        Self::new(self.family, self.index, with_rifle)
    }

    /// All 27 catalogue activities, without rifle.
    pub fn vocabulary() -> Vec<ActivityCode> {
        CATALOG
            .iter()
            .map(|e| ActivityCode {
                family: e.family,
                index: e.index,
                with_rifle: false,
            })
            .collect()
    }

    /// Every valid code including rifle variants.
    pub fn full_vocabulary() -> Vec<ActivityCode> {
        let mut out = Vec::new();
        for code in Self::vocabulary() {
            out.push(code);
            if let Ok(r) = code.with_rifle(true) {
                out.push(r);
            }
        }
        out
    }

    fn entry(&self) -> &'static CatalogEntry {
        CATALOG
            .iter()
            .find(|e| e.family == self.family && e.index == self.index)
            .expect("validated activity code")
    }

    pub fn name(&self) -> &'static str {
        self.entry().name
    }

    pub fn nominal_repetitions(&self) -> u32 {
        self.entry().repetitions
    }

    pub fn nominal_duration_s(&self) -> f64 {
        self.entry().duration_s
    }

    pub fn is_fall(&self) -> bool {
        self.family == ActivityFamily::Fall
    }

    /// The code without the rifle flag, e.g. `FALL_3`.
    pub fn base_label(&self) -> String {
        format!("{}_{}", self.family.prefix(), self.index)
    }
}

impl fmt::Display for ActivityCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.family.prefix(), self.index)?;
        if self.with_rifle {
            f.write_str("_withRifle")?;
        }
        Ok(())
    }
}

impl FromStr for ActivityCode {
    type Err = Error;

    /// Accepts `FALL_3`, `fall3`, `OM-6`, `ADL_12_withRifle` and the catalogue
    /// names (`Backward Fall`).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if let Some(e) = CATALOG
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(trimmed))
        {
            return ActivityCode::new(e.family, e.index, false);
        }
        let upper: String = trimmed
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        let (family, rest) = if let Some(r) = upper.strip_prefix("FALL") {
            (ActivityFamily::Fall, r)
        } else if let Some(r) = upper.strip_prefix("ADL") {
            (ActivityFamily::Adl, r)
        } else if let Some(r) = upper.strip_prefix("OM") {
            (ActivityFamily::Om, r)
        } else if let Some(r) = upper.strip_prefix("MO") {
            (ActivityFamily::Om, r)
        } else {
            return Err(Error::InvalidActivity(s.to_string()));
        };
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        let suffix = &rest[digits.len()..];
        let index: u8 = digits
            .parse()
            .map_err(|_| Error::InvalidActivity(s.to_string()))?;
        let with_rifle = match suffix {
            "" => false,
            "WITHRIFLE" | "RIFLE" => true,
            _ => return Err(Error::InvalidActivity(s.to_string())),
        };
        ActivityCode::new(family, index, with_rifle)
            .map_err(|_| Error::InvalidActivity(s.to_string()))
    }
}

impl Serialize for ActivityCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActivityCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
