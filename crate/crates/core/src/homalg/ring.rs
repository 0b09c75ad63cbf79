use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Coefficient ring of a module sheaf: `ℤ` or `ℤ/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ring {
    Integers,
    /// `ℤ/m` with `m ≥ 2`.
    Mod(u32),
}

impl Ring {
    pub fn zmod(m: u32) -> Result<Ring> {
        if m < 2 {
            return Err(Error::Input(format!("modulus must be at least 2, got {m}")));
        }
        Ok(Ring::Mod(m))
    }

    pub fn modulus(&self) -> Option<i64> {
        match *self {
            Ring::Integers => None,
            Ring::Mod(m) => Some(m as i64),
        }
    }

    /// The prime `p` if this ring is the field `ℤ/p`.
    pub fn field_prime(&self) -> Option<i64> {
        match *self {
            Ring::Mod(m) if is_prime(m as u64) => Some(m as i64),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        self.field_prime().is_some()
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> i64 {
        match *self {
            Ring::Integers => x,
            Ring::Mod(m) => x.rem_euclid(m as i64),
        }
    }

    pub fn reduce_vec(&self, v: &mut [i64]) {
        if let Ring::Mod(m) = *self {
            for x in v.iter_mut() {
                *x = x.rem_euclid(m as i64);
            }
        }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Mod(m) => write!(f, "Z/{m}"),
        }
    }
}

impl FromStr for Ring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ring> {
        let s = s.trim();
        if s == "Z" {
            return Ok(Ring::Integers);
        }
        if let Some(m) = s.strip_prefix("Z/") {
            let m: u32 = m
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad ring `{s}`")))?;
            return Ring::zmod(m);
        }
        Err(Error::Input(format!("bad ring `{s}`, expected Z or Z/m")))
    }
}
