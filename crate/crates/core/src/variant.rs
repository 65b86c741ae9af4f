use core::fmt;
use core::str::FromStr;

use crate::Error;

/// Compartmental structure of the epidemic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Sir,
    Seir,
    Sis,
    Sirs,
}

impl Variant {
    pub fn has_exposed(self) -> bool {
        matches!(self, Variant::Seir)
    }

    pub fn has_recovered(self) -> bool {
        !matches!(self, Variant::Sis)
    }

    /// Whether recovered individuals eventually become susceptible again.
    pub fn is_recurrent(self) -> bool {
        matches!(self, Variant::Sis | Variant::Sirs)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Sir => "SIR",
            Variant::Seir => "SEIR",
            Variant::Sis => "SIS",
            Variant::Sirs => "SIRS",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "SIR" => Ok(Variant::Sir),
            "SEIR" => Ok(Variant::Seir),
            "SIS" => Ok(Variant::Sis),
            "SIRS" => Ok(Variant::Sirs),
            _ => Err(Error::param("variant", "expected SIR, SEIR, SIS or SIRS")),
        }
    }
}
