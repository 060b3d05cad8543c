//! Exact angles on the π/8 grid.
//!
//! Protocol angles live in small finite sets, so they are kept as integer
//! multiples of π/8 and only turned into radians at the matrix boundary.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// An angle `eighths · π/8`, kept unreduced so that exact global phases survive
/// (R(θ + 2π) = −R(θ)). Use [`Angle::reduced`] for set membership.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(pub i32);

/// Quarter-π multiples allowed for encrypted rotations: {0, π/4, π/2, π, 5π/4, 3π/2}.
pub const ROTATION_SET_QUARTERS: [u8; 6] = [0, 1, 2, 4, 5, 6];

impl Angle {
    pub const ZERO: Angle = Angle(0);
    pub const PI: Angle = Angle(8);
    pub const HALF_PI: Angle = Angle(4);
    pub const QUARTER_PI: Angle = Angle(2);

    pub const fn eighths(k: i32) -> Self {
        Angle(k)
    }

    pub const fn quarters(k: i32) -> Self {
        Angle(2 * k)
    }

    /// `bit · π`.
    pub fn pi_times(bit: bool) -> Self {
        if bit {
            Angle::PI
        } else {
            Angle::ZERO
        }
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * PI / 8.0
    }

    /// Snap a radian value onto the π/8 grid.
    pub fn from_radians(rad: f64) -> Result<Self> {
        let k = rad * 8.0 / PI;
        let r = k.round();
        if (k - r).abs() > 1e-9 {
            return Err(Error::OffGrid(rad));
        }
        Ok(Angle(r as i32))
    }

    /// Representative in `[0, 2π)`.
    pub fn reduced(self) -> Self {
        Angle(self.0.rem_euclid(16))
    }

    pub fn is_zero_mod_2pi(self) -> bool {
        self.reduced().0 == 0
    }

    /// Index in the eight-element set `{kπ/4}` if the angle lies on that grid.
    pub fn quarter_index(self) -> Option<u8> {
        let r = self.reduced().0;
        (r % 2 == 0).then_some((r / 2) as u8)
    }

    pub fn on_quarter_grid(self) -> bool {
        self.quarter_index().is_some()
    }

    pub fn in_rotation_set(self) -> bool {
        self.quarter_index()
            .is_some_and(|k| ROTATION_SET_QUARTERS.contains(&k))
    }

    /// `(-1)^flip · self`.
    pub fn signed(self, flip: bool) -> Self {
        if flip {
            -self
        } else {
            self
        }
    }

    /// Split a quarter-grid angle into two summands that both lie in the
    /// encryption set. The split depends only on the reduced angle.
    pub fn split_into_rotation_set(self) -> Result<(Angle, Angle)> {
        let k = self.quarter_index().ok_or(Error::NotInRotationSet(self.0))?;
        let (a, b) = match k {
            3 => (2, 1),
            7 => (6, 1),
            k => (k as i32, 0),
        };
        Ok((Angle::quarters(a), Angle::quarters(b)))
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle(-self.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.0;
        if k == 0 {
            return write!(f, "0");
        }
        let mut g = 8;
        while k % g != 0 {
            g /= 2;
        }
        let (num, den) = (k / g, 8 / g);
        let num = match num {
            1 => String::new(),
            -1 => "-".to_string(),
            n => n.to_string(),
        };
        if den == 1 {
            write!(f, "{num}π")
        } else {
            write!(f, "{num}π/{den}")
        }
    }
}

/// All eight angles `kπ/4`, `k = 0..8`.
pub fn eight_angles() -> impl Iterator<Item = Angle> {
    (0..8).map(Angle::quarters)
}

/// The encryption set as angles.
pub fn rotation_set() -> impl Iterator<Item = Angle> {
    ROTATION_SET_QUARTERS.iter().map(|&k| Angle::quarters(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_set_closed_under_pi() {
        for a in rotation_set() {
            assert!((a + Angle::PI).in_rotation_set(), "{a}");
        }
        assert!(!Angle::quarters(3).in_rotation_set());
        assert!(!Angle::quarters(7).in_rotation_set());
    }

    #[test]
    fn split_covers_all_quarters() {
        for a in eight_angles() {
            let (x, y) = a.split_into_rotation_set().unwrap();
            assert!(x.in_rotation_set() && y.in_rotation_set());
            assert_eq!((x + y).reduced(), a.reduced());
        }
        assert!(Angle::eighths(1).split_into_rotation_set().is_err());
    }

    #[test]
    fn radians_round_trip() {
        assert_eq!(Angle::from_radians(-PI / 2.0).unwrap(), Angle(-4));
        assert!(Angle::from_radians(PI / 16.0).is_err());
        assert_eq!(Angle(-4).reduced(), Angle(12));
    }

    #[test]
    fn display() {
        let shown: Vec<String> = [0, 8, -8, 4, 12, 2, 6, 1, -3, 16]
            .iter()
            .map(|&k| Angle(k).to_string())
            .collect();
        assert_eq!(shown, ["0", "π", "-π", "π/2", "3π/2", "π/4", "3π/4", "π/8", "-3π/8", "2π"]);
    }
}
