//! The region in the `(mu, nu)` plane, `M = q^mu` and `N = q^nu`, where the
//! sup-norm form of the new bound beats every earlier one:
//!
//! ```text
//! 2 mu + 7 nu >= 4,   2 mu + 11 nu >= 6,   1 + mu >= 2 nu,   3 nu >= 2 mu >= nu
//! ```
//!
//! together with `mu <= 1` and `nu <= 1` (`M, N <= q`).

use std::fmt;

/// Slack below which a constraint counts as tight.
pub const REGION_TOLERANCE: f64 = 1e-12;

/// Corners of the polygon.
pub const REGION_VERTICES: [(f64, f64); 5] = [
    (0.25, 0.5),
    (1.0 / 3.0, 2.0 / 3.0),
    (1.0, 1.0),
    (1.0, 2.0 / 3.0),
    (9.0 / 14.0, 3.0 / 7.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionClass {
    Interior,
    Boundary,
    Outside,
}

impl RegionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionClass::Interior => "interior",
            RegionClass::Boundary => "boundary",
            RegionClass::Outside => "outside",
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slack of each constraint, non-negative exactly when it holds. The first
/// five are the improvement conditions, the last two the box.
pub fn region_slacks(mu: f64, nu: f64) -> [f64; 7] {
    [
        2.0 * mu + 7.0 * nu - 4.0,
        2.0 * mu + 11.0 * nu - 6.0,
        1.0 + mu - 2.0 * nu,
        3.0 * nu - 2.0 * mu,
        2.0 * mu - nu,
        1.0 - mu,
        1.0 - nu,
    ]
}

pub fn improvement_region(mu: f64, nu: f64) -> RegionClass {
    let slacks = region_slacks(mu, nu);
    if slacks.iter().any(|&s| s < -REGION_TOLERANCE || s.is_nan()) {
        RegionClass::Outside
    } else if slacks.iter().any(|&s| s <= REGION_TOLERANCE) {
        RegionClass::Boundary
    } else {
        RegionClass::Interior
    }
}

/// `(log M / log q, log N / log q)`.
pub fn exponents(q: u64, m: u64, n: u64) -> (f64, f64) {
    let lq = (q as f64).ln();
    ((m as f64).ln() / lq, (n as f64).ln() / lq)
}
