//! Reading conventions for the handful of formulas whose published form is
//! ambiguous (bracket direction, interval membership at zero, twist
//! direction on index wrap-around, anchor row of the unramified jump).
//!
//! Every construction in this crate takes a [`ConventionSet`] so that the
//! calibration harness can sweep all 2^5 assignments and demonstrate that
//! exactly one of them satisfies the full battery of structural invariants.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Which integer bracket a half-integer expression uses.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    Floor,
    Ceil,
}

/// Direction of the ramification twist applied when a basis index is
/// wrapped back into the fundamental window: wrapping *up* by one period
/// multiplies by T^{-1} (`InverseUp`) or by T (`DirectUp`).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrapTwist {
    InverseUp,
    DirectUp,
}

/// Anchor row of the three-term column in the unramified monodromy formula:
/// either the column's own index k (`Anchored`) or k+1 (`Shifted`).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpAnchor {
    Anchored,
    Shifted,
}

/// One assignment of all five two-valued reading conventions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ConventionSet {
    /// Bracket in the even-side incoming index count ⌊qk/n + 1/2⌉.
    pub ev_in_bracket: Bracket,
    /// Bracket in the odd-side incoming index count ⌊qk/n⌉.
    pub odd_in_bracket: Bracket,
    /// Whether the branch-test count of natural numbers includes zero.
    pub nat_contains_zero: bool,
    /// Twist direction on index wrap-around.
    pub wrap_twist: WrapTwist,
    /// Anchor row of the unramified jump column.
    pub explicit_jump_anchor: JumpAnchor,
}

impl Default for ConventionSet {
    fn default() -> Self {
        ConventionSet {
            ev_in_bracket: Bracket::Floor,
            odd_in_bracket: Bracket::Floor,
            nat_contains_zero: true,
            wrap_twist: WrapTwist::InverseUp,
            explicit_jump_anchor: JumpAnchor::Anchored,
        }
    }
}

impl ConventionSet {
    /// All 32 assignments, defaults first.
    pub fn all() -> Vec<ConventionSet> {
        let mut out = Vec::with_capacity(32);
        for &ev in &[Bracket::Floor, Bracket::Ceil] {
            for &od in &[Bracket::Floor, Bracket::Ceil] {
                for &nz in &[true, false] {
                    for &wt in &[WrapTwist::InverseUp, WrapTwist::DirectUp] {
                        for &ja in &[JumpAnchor::Anchored, JumpAnchor::Shifted] {
                            out.push(ConventionSet {
                                ev_in_bracket: ev,
                                odd_in_bracket: od,
                                nat_contains_zero: nz,
                                wrap_twist: wt,
                                explicit_jump_anchor: ja,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Compact human-readable tag, used in calibration reports.
    pub fn tag(&self) -> String {
        format!(
            "ev_in={}/odd_in={}/nat0={}/wrap={}/jump={}",
            match self.ev_in_bracket {
                Bracket::Floor => "floor",
                Bracket::Ceil => "ceil",
            },
            match self.odd_in_bracket {
                Bracket::Floor => "floor",
                Bracket::Ceil => "ceil",
            },
            self.nat_contains_zero,
            match self.wrap_twist {
                WrapTwist::InverseUp => "inverse_up",
                WrapTwist::DirectUp => "direct_up",
            },
            match self.explicit_jump_anchor {
                JumpAnchor::Anchored => "anchored",
                JumpAnchor::Shifted => "shifted",
            },
        )
    }
}

/// Environment variable that overrides the conventions artifact location.
pub const CONVENTIONS_ENV: &str = "ELSTOKES_CONVENTIONS";

/// Default artifact file name, relative to the working directory.
pub const CONVENTIONS_FILE: &str = "elstokes-conventions.json";

/// Artifact path: the environment override when set, else the default
/// file in the working directory.
pub fn conventions_path() -> PathBuf {
    match std::env::var_os(CONVENTIONS_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(CONVENTIONS_FILE),
    }
}

/// Loads the persisted convention assignment. A missing file yields
/// `None` (callers fall back to the built-in default); an unreadable or
/// malformed file is an error so that a corrupted artifact can never be
/// silently replaced by defaults.
pub fn load_conventions(path: &Path) -> Result<Option<ConventionSet>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => {
            return Err(Error::Io(std::io::Error::new(
                e.kind(),
                format!("cannot read conventions artifact {}: {e}", path.display()),
            )))
        }
    };
    let c: ConventionSet = serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!(
            "conventions artifact {} is malformed: {e}",
            path.display()
        ))
    })?;
    Ok(Some(c))
}

/// Persists the assignment atomically: writes a sibling temp file and
/// renames it over the target so readers never observe a torn file.
pub fn store_conventions_atomic(path: &Path, c: &ConventionSet) -> Result<()> {
    let text = serde_json::to_string_pretty(c).expect("conventions serialize");
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("conv")
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("conv")
        )),
    };
    std::fs::write(&tmp, text).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", tmp.display()),
        ))
    })?;
    std::fs::rename(&tmp, path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!(
                "cannot move {} into place at {}: {e}",
                tmp.display(),
                path.display()
            ),
        ))
    })
}
