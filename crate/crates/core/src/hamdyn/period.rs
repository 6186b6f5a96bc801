use serde::Serialize;

use super::system::PhaseSpace;
use super::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PeriodClass {
    /// Every sample equals the first; the period group is all of `R`.
    Constant,
    /// Period group `tau Z`.
    Periodic { period: f64 },
    /// No return within the sampled window.
    NoPeriod,
}

/// Classifies a uniformly sampled trajectory by the first return of the full
/// state to the initial one. The return time is refined by fitting a
/// parabola to the squared distance around the closest sample.
pub fn prime_period(space: PhaseSpace, times: &[f64], states: &[Vector], tol: f64) -> PeriodClass {
    if states.len() < 2 || times.len() != states.len() {
        return PeriodClass::NoPeriod;
    }
    let z0 = &states[0];
    let d2: Vec<f64> = states
        .iter()
        .map(|z| space.distance(z, z0).powi(2))
        .collect();
    if d2.iter().all(|&d| d <= tol * tol) {
        return PeriodClass::Constant;
    }
    let dt = times[1] - times[0];
    let Some(left) = d2.iter().position(|&d| d > tol * tol) else {
        return PeriodClass::Constant;
    };
    // The trajectory left the tolerance ball; look for the first local
    // minimum of the distance that re-enters it.
    let mut k = left;
    while k + 1 < d2.len() {
        let is_min = d2[k] <= d2[k - 1] && d2[k] <= d2[k + 1];
        if is_min && d2[k] <= tol * tol {
            let (a, b, c) = (d2[k - 1], d2[k], d2[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            return PeriodClass::Periodic {
                period: times[k] - times[0] + shift * dt,
            };
        }
        k += 1;
    }
    if d2[d2.len() - 1] <= tol * tol && d2[d2.len() - 2] > d2[d2.len() - 1] {
        return PeriodClass::Periodic {
            period: times[times.len() - 1] - times[0],
        };
    }
    PeriodClass::NoPeriod
}
