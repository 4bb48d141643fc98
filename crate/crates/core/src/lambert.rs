//! Real branches of the Lambert W function, `w·e^w = x`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `-1/e`, the common branch point.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const MAX_ITER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `W₀`, defined for `x >= -1/e`, values `>= -1`.
    Principal,
    /// `W₋₁`, defined for `-1/e <= x < 0`, values `<= -1`.
    Lower,
}

/// Solves `w·e^w = x` on the requested branch by Halley iteration.
pub fn lambert_w(x: f64, branch: Branch) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("lambert_w of NaN"));
    }
    // Allow a few ulps of slack below the branch point for callers that
    // compute -1/e themselves.
    if x < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::domain(format!(
            "lambert_w undefined for x = {x} < -1/e"
        )));
    }
    if branch == Branch::Lower && x >= 0.0 {
        return Err(Error::domain(format!(
            "lower branch of lambert_w needs -1/e <= x < 0, got {x}"
        )));
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(halley(x, initial_guess(x, branch)))
}

fn initial_guess(x: f64, branch: Branch) -> f64 {
    // Series in p = sqrt(2(ex + 1)) around the branch point.
    let near_branch = x < -0.25;
    if near_branch {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        let p = match branch {
            Branch::Principal => p,
            Branch::Lower => -p,
        };
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    match branch {
        Branch::Principal if x < 3.0 => {
            let l = x.ln_1p();
            l * (1.0 - (l.ln_1p()) / (2.0 + l))
        }
        Branch::Principal => {
            let l1 = x.ln();
            let l2 = l1.ln();
            l1 - l2 + l2 / l1
        }
        Branch::Lower => {
            let l1 = (-x).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    }
}

fn halley(x: f64, mut w: f64) -> f64 {
    let mut best = (f64::INFINITY, w);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() < best.0 {
            best = (f.abs(), w);
        }
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() || (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            w = if next.is_finite() { next } else { w };
            break;
        }
        w = next;
    }
    let f = (w * w.exp() - x).abs();
    if f <= best.0 {
        w
    } else {
        best.1
    }
}
