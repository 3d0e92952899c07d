//! Removal of neighbouring-peak leakage from windowed peak areas.

use alloc::vec::Vec;

use super::histogram::PeakAreas;
use super::timing::PeakShape;

const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-12;

struct Leak {
    from: (i32, i32),
    fraction: f64,
}

/// Fractions of each neighbouring peak that fall into the window of `(p, k)`.
fn leaks(areas: &PeakAreas, shape: &PeakShape, p: i32, k: i32) -> Vec<Leak> {
    let layout = &areas.layout;
    let half = 0.5 * areas.width_ps;
    let center = layout.peak_center(p, k);
    let p_max = areas.max_period_offset();
    let mut out = Vec::new();
    for q in (p - 1).max(-p_max)..=(p + 1).min(p_max) {
        for j in -2..=2 {
            if (q, j) == (p, k) {
                continue;
            }
            let offset = center - layout.peak_center(q, j);
            let fraction = shape.mass_between(offset - half, offset + half);
            if fraction > 0.0 {
                out.push(Leak {
                    from: (q, j),
                    fraction,
                });
            }
        }
    }
    out
}

/// Subtracts the tails of neighbouring peaks from every window and returns
/// the area each peak deposits in its own window, clamped at 0.
///
/// Observed window areas are modelled as `obs_i = c A_i + sum_j L_ij A_j`
/// with `c` the own-window capture and `L_ij` the share of peak `j` in
/// window `i`; the true areas `A` are found by Jacobi iteration.
pub fn overlap_correction(areas: &PeakAreas, shape: &PeakShape) -> PeakAreas {
    let capture = shape.capture(areas.width_ps);
    let p_max = areas.max_period_offset();
    let mut out = areas.clone();
    if capture <= 0.0 {
        return out;
    }
    let cells: Vec<(i32, i32)> = (-p_max..=p_max)
        .flat_map(|p| (-2..=2).map(move |k| (p, k)))
        .collect();
    let leak_table: Vec<Vec<Leak>> = cells
        .iter()
        .map(|&(p, k)| leaks(areas, shape, p, k))
        .collect();
    if leak_table.iter().all(|l| l.is_empty()) {
        return out;
    }

    let idx = |(p, k): (i32, i32)| ((p + p_max) * 5 + k + 2) as usize;
    let mut truth: Vec<f64> = cells.iter().map(|&(p, k)| areas.get(p, k) / capture).collect();
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<f64> = cells
            .iter()
            .zip(&leak_table)
            .map(|(&(p, k), l)| {
                let spill: f64 = l.iter().map(|x| x.fraction * truth[idx(x.from)]).sum();
                ((areas.get(p, k) - spill) / capture).max(0.0)
            })
            .collect();
        let change = next
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        truth = next;
        if change <= TOLERANCE * (1.0 + truth.iter().cloned().fold(0.0, f64::max)) {
            break;
        }
    }

    for (&(p, k), l) in cells.iter().zip(&leak_table) {
        let spill_var: f64 = l
            .iter()
            .map(|x| {
                let f = x.fraction / capture;
                f * f * areas.variance(x.from.0, x.from.1)
            })
            .sum();
        out.set(p, k, capture * truth[idx((p, k))], areas.variance(p, k) + spill_var);
    }
    out
}

/// Total peak areas, undoing both the neighbour leakage and the finite
/// window capture.
pub fn deconvolve_peaks(areas: &PeakAreas, shape: &PeakShape) -> PeakAreas {
    let capture = shape.capture(areas.width_ps);
    let corrected = overlap_correction(areas, shape);
    if capture <= 0.0 {
        return corrected;
    }
    corrected.scaled(1.0 / capture)
}
