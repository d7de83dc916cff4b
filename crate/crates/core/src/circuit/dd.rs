//! Dynamical-decoupling sequences for idle windows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CircuitError, Gate};
use crate::topology::QubitId;

#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DdScheme {
    #[default]
    None,
    /// One X in the middle of the window.
    HahnEcho,
    /// Two X pulses with 1:2:1 delay spacing.
    DoublePi,
    /// Equally spaced X pulses on every idle qubit at `rate` pulses per µs,
    /// rounded to an even count.
    Pdd { rate: f64 },
    /// PDD on a two-colouring of the idle qubits, with colour 1 pulsed at
    /// twice the rate of colour 0. Unlike aligned PDD this also refocuses
    /// ZZ coupling between the two colours.
    StaggeredPdd { rate: f64 },
}

impl fmt::Display for DdScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DdScheme::None => write!(f, "none"),
            DdScheme::HahnEcho => write!(f, "hahn"),
            DdScheme::DoublePi => write!(f, "double-pi"),
            DdScheme::Pdd { rate } => write!(f, "pdd:{rate}"),
            DdScheme::StaggeredPdd { rate } => write!(f, "spdd:{rate}"),
        }
    }
}

impl FromStr for DdScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rate = |r: &str| -> Result<f64, String> {
            let v: f64 = r.parse().map_err(|_| format!("bad pulse rate {r:?}"))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(format!("pulse rate must be positive, got {v}"))
            }
        };
        match s {
            "none" => Ok(DdScheme::None),
            "hahn" => Ok(DdScheme::HahnEcho),
            "double-pi" => Ok(DdScheme::DoublePi),
            _ => match s.split_once(':') {
                Some(("pdd", r)) => Ok(DdScheme::Pdd { rate: rate(r)? }),
                Some(("spdd", r)) => Ok(DdScheme::StaggeredPdd { rate: rate(r)? }),
                _ => Err(format!("unknown decoupling scheme {s:?}")),
            },
        }
    }
}

impl DdScheme {
    /// Number of pulses PDD places in a window of `total_ns`.
    pub fn pdd_pulses(rate_per_us: f64, total_ns: u64) -> u64 {
        let n = rate_per_us * total_ns as f64 * 1e-3;
        2 * (n / 2.0).round() as u64
    }
}

/// Rounded cut points `F (2k - 1) / (2n)` for `k = 1..=n`.
fn cut_points(free_ns: u64, n: u64) -> Vec<u64> {
    (1..=n)
        .map(|k| {
            let num = free_ns as u128 * (2 * k - 1) as u128;
            let den = 2 * n as u128;
            ((2 * num + den) / (2 * den)) as u64
        })
        .collect()
}

fn delay(qubits: &[QubitId], ns: u64) -> Option<Gate> {
    (ns > 0).then(|| Gate::Delay { qubits: qubits.to_vec(), ns })
}

/// Gate sequence filling an idle window of `total_ns` on `qubits`.
///
/// Every qubit spends exactly `total_ns` in the window: pulses of `x_ns` plus
/// delays. `colors` (parallel to `qubits`) is needed by
/// [`DdScheme::StaggeredPdd`] only.
pub fn insert_dd(
    qubits: &[QubitId],
    colors: Option<&[u8]>,
    total_ns: u64,
    dd: DdScheme,
    x_ns: u64,
) -> Result<Vec<Gate>, CircuitError> {
    if qubits.is_empty() || total_ns == 0 {
        return Ok(Vec::new());
    }
    let too_short = |needed_ns| CircuitError::DelayTooShort { total_ns, needed_ns };
    let pulse = |out: &mut Vec<Gate>| out.extend(qubits.iter().map(|&q| Gate::X { q }));
    let mut out = Vec::new();
    match dd {
        DdScheme::None => out.extend(delay(qubits, total_ns)),
        DdScheme::HahnEcho => {
            let free = total_ns.checked_sub(x_ns).ok_or_else(|| too_short(x_ns))?;
            let a = free / 2;
            out.extend(delay(qubits, a));
            pulse(&mut out);
            out.extend(delay(qubits, free - a));
        }
        DdScheme::DoublePi => {
            let free = total_ns.checked_sub(2 * x_ns).ok_or_else(|| too_short(2 * x_ns))?;
            let a = free / 4;
            let b = free / 2;
            out.extend(delay(qubits, a));
            pulse(&mut out);
            out.extend(delay(qubits, b));
            pulse(&mut out);
            out.extend(delay(qubits, free - a - b));
        }
        DdScheme::Pdd { rate } => {
            let n = DdScheme::pdd_pulses(rate, total_ns);
            let free = total_ns.checked_sub(n * x_ns).ok_or_else(|| too_short(n * x_ns))?;
            let mut last = 0;
            for c in cut_points(free, n) {
                out.extend(delay(qubits, c - last));
                pulse(&mut out);
                last = c;
            }
            out.extend(delay(qubits, free - last));
        }
        DdScheme::StaggeredPdd { rate } => {
            let colors = colors.ok_or(CircuitError::MissingColoring)?;
            if colors.len() != qubits.len() {
                return Err(CircuitError::MissingColoring);
            }
            let n = DdScheme::pdd_pulses(rate, total_ns);
            let layers = 3 * n;
            let free = total_ns.checked_sub(layers * x_ns).ok_or_else(|| too_short(layers * x_ns))?;
            // colour 0 flips at odd multiples of 1/(2n), colour 1 at odd
            // multiples of 1/(4n); on a 1/(4n) grid these are 2 mod 4 and odd
            let mut events: Vec<(u64, u8)> = (1..=n)
                .map(|k| ((4 * k - 2), 0u8))
                .chain((1..=2 * n).map(|j| (2 * j - 1, 1u8)))
                .collect();
            events.sort_unstable();
            let den = 4 * n as u128;
            let mut last = 0;
            for (num, color) in events {
                let c = ((2 * free as u128 * num as u128 + den) / (2 * den)) as u64;
                out.extend(delay(qubits, c - last));
                let (on, off): (Vec<_>, Vec<_>) =
                    qubits.iter().zip(colors).partition(|(_, &col)| col == color);
                out.extend(on.into_iter().map(|(&q, _)| Gate::X { q }));
                let rest: Vec<QubitId> = off.into_iter().map(|(&q, _)| q).collect();
                out.extend(delay(&rest, x_ns));
                last = c;
            }
            out.extend(delay(qubits, free - last));
        }
    }
    Ok(out)
}
