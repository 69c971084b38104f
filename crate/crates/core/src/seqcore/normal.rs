// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::SQRT_2;

/// Upper-tail standard normal probability `P(Z > z)`.
#[inline]
pub fn normal_sf(z: f64) -> f64 {
    if z < 0.0 {
        1.0 - 0.5 * libm::erfc(-z / SQRT_2)
    } else {
        0.5 * libm::erfc(z / SQRT_2)
    }
}

/// Two-sided p-value `2 P(Z > |z|)`.
#[inline]
pub fn two_sided_p(z: f64) -> f64 {
    2.0 * normal_sf(z.abs())
}
