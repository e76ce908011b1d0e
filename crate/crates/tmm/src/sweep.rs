use std::fmt::Write as _;
use std::time::{Duration, Instant};

use materials::{IncidenceCondition, LayerStack, SpectralGrid};
use serde::{Deserialize, Serialize};

use crate::optics::{spectrum_slice, SpectralResponse, SpectrumPoint};
use crate::{Result, TmmError};

/// Outcome of a multi-condition sweep.
///
/// Responses are stored in request order, one per condition. The payload is
/// a pure function of (stack, grid, conditions); `duration`, `workers`, and
/// `matrix_ops` are diagnostics and are excluded from the serialized CSV so
/// that output is bit-identical across worker counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub conditions: Vec<IncidenceCondition>,
    pub responses: Vec<SpectralResponse>,
    #[serde(skip, default)]
    pub duration: Duration,
    pub workers: usize,
    /// Total interface + propagation factors cascaded.
    pub matrix_ops: u64,
}

impl SweepResult {
    pub fn response_for(&self, cond: &IncidenceCondition) -> Option<&SpectralResponse> {
        self.conditions
            .iter()
            .position(|c| c == cond)
            .map(|i| &self.responses[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IncidenceCondition, &SpectralResponse)> {
        self.conditions.iter().zip(self.responses.iter())
    }

    /// CSV rows `angle_deg,polarization,wavelength_um,R,T,A` with 12
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_deg,polarization,wavelength_um,R,T,A\n");
        for (cond, resp) in self.iter() {
            for p in &resp.points {
                writeln!(
                    out,
                    "{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e}",
                    cond.angle_deg, cond.polarization, p.wavelength_um, p.r, p.t, p.a
                )
                .expect("writing to a String cannot fail");
            }
        }
        out
    }
}

/// One unit of sweep work: a contiguous wavelength block of one condition.
struct Task {
    cond_idx: usize,
    start: usize,
    end: usize,
}

/// Evaluates every (condition, wavelength) cell of the work grid using
/// `workers` threads.
///
/// The wavelength domain of each condition is split into contiguous blocks
/// of ceil(|grid| / workers) points; workers own disjoint task lists and
/// write into private buffers that a single collector merges back in grid
/// order. The merged payload is identical to a single-threaded run; any
/// worker error aborts the sweep.
pub fn sweep(
    stack: &LayerStack,
    grid: &SpectralGrid,
    conditions: &[IncidenceCondition],
    workers: usize,
) -> Result<SweepResult> {
    if workers == 0 {
        return Err(TmmError::Config("sweep needs at least one worker".into()));
    }
    if conditions.is_empty() {
        return Err(TmmError::Config("sweep needs at least one condition".into()));
    }
    let started = Instant::now();
    let wavelengths = grid.wavelengths();
    let block = wavelengths.len().div_ceil(workers);

    let mut tasks = Vec::new();
    for (cond_idx, _) in conditions.iter().enumerate() {
        let mut start = 0;
        while start < wavelengths.len() {
            let end = (start + block).min(wavelengths.len());
            tasks.push(Task {
                cond_idx,
                start,
                end,
            });
            start = end;
        }
    }

    // Deal tasks round-robin so every worker touches every condition and the
    // load stays even; assignment never affects the merged values.
    let assignments: Vec<Vec<&Task>> = (0..workers)
        .map(|w| tasks.iter().skip(w).step_by(workers).collect())
        .collect();

    type BlockOut = (usize, usize, Vec<SpectrumPoint>, u64);
    let run_tasks = |list: &[&Task]| -> Result<Vec<BlockOut>> {
        let mut out = Vec::with_capacity(list.len());
        for task in list {
            let cond = &conditions[task.cond_idx];
            let slice = &wavelengths[task.start..task.end];
            let (points, ops) = spectrum_slice(stack, slice, cond)?;
            out.push((task.cond_idx, task.start, points, ops));
        }
        Ok(out)
    };

    let worker_outputs: Vec<Result<Vec<BlockOut>>> = if workers == 1 {
        vec![run_tasks(&assignments[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = assignments
                .iter()
                .map(|list| scope.spawn(|| run_tasks(list)))
                .collect();
            handles
                .into_iter()
                .map(|h| match h.join() {
                    Ok(result) => result,
                    Err(_) => Err(TmmError::Worker("worker thread panicked".into())),
                })
                .collect()
        })
    };

    let mut merged: Vec<Vec<Option<SpectrumPoint>>> =
        vec![vec![None; wavelengths.len()]; conditions.len()];
    let mut matrix_ops = 0u64;
    for output in worker_outputs {
        for (cond_idx, start, points, ops) in output? {
            matrix_ops += ops;
            for (offset, point) in points.into_iter().enumerate() {
                merged[cond_idx][start + offset] = Some(point);
            }
        }
    }

    let responses: Vec<SpectralResponse> = merged
        .into_iter()
        .map(|row| SpectralResponse {
            points: row
                .into_iter()
                .map(|p| p.expect("every work-grid cell is covered by exactly one task"))
                .collect(),
        })
        .collect();

    Ok(SweepResult {
        conditions: conditions.to_vec(),
        responses,
        duration: started.elapsed(),
        workers,
        matrix_ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use materials::{Layer, Material, Polarization};

    fn test_stack(layers: usize) -> LayerStack {
        let a = Material::constant("a", 1.5, 0.0).unwrap();
        let b = Material::constant("b", 2.3, 0.01).unwrap();
        let layers = (0..layers)
            .map(|i| {
                Layer::new(
                    if i % 2 == 0 { a.clone() } else { b.clone() },
                    80.0 + 7.0 * (i % 5) as f64,
                )
                .unwrap()
            })
            .collect();
        LayerStack::new(Material::air(), layers, a).unwrap()
    }

    fn some_conditions(count: usize) -> Vec<IncidenceCondition> {
        (0..count)
            .map(|i| {
                let pol = match i % 3 {
                    0 => Polarization::S,
                    1 => Polarization::P,
                    _ => Polarization::Unpolarized,
                };
                IncidenceCondition::new((i as f64 * 89.0) / count.max(1) as f64, pol).unwrap()
            })
            .collect()
    }

    #[test]
    fn worker_count_does_not_change_the_payload() {
        let stack = test_stack(9);
        let grid = SpectralGrid::linspace(0.4, 2.0, 33).unwrap();
        let conditions = some_conditions(7);
        let baseline = sweep(&stack, &grid, &conditions, 1).unwrap();
        for workers in [2, 3, 8, 64] {
            let run = sweep(&stack, &grid, &conditions, workers).unwrap();
            assert_eq!(baseline.to_csv(), run.to_csv(), "workers = {workers}");
            assert_eq!(baseline.matrix_ops, run.matrix_ops);
        }
    }

    #[test]
    fn every_condition_is_present_exactly_once() {
        let stack = test_stack(3);
        let grid = SpectralGrid::linspace(0.5, 1.5, 11).unwrap();
        let conditions = some_conditions(20);
        let result = sweep(&stack, &grid, &conditions, 6).unwrap();
        assert_eq!(result.responses.len(), conditions.len());
        for (cond, resp) in result.iter() {
            assert_eq!(resp.len(), grid.len());
            assert!(result.response_for(cond).is_some());
        }
    }

    #[test]
    fn more_workers_than_work_items_is_fine() {
        let stack = test_stack(2);
        let grid = SpectralGrid::new(vec![0.6, 0.7]).unwrap();
        let conditions = some_conditions(1);
        let result = sweep(&stack, &grid, &conditions, 32).unwrap();
        assert_eq!(result.responses[0].len(), 2);
    }

    #[test]
    fn worker_errors_abort_the_sweep() {
        // Substrate table covers only part of the grid; some worker hits a
        // range error.
        let narrow = Material::new(
            "narrow",
            vec![
                materials::DispersionRow {
                    wavelength_um: 0.5,
                    n: 1.5,
                    k: 0.0,
                },
                materials::DispersionRow {
                    wavelength_um: 0.8,
                    n: 1.5,
                    k: 0.0,
                },
            ],
        )
        .unwrap();
        let stack = LayerStack::bare(Material::air(), narrow).unwrap();
        let grid = SpectralGrid::linspace(0.5, 1.5, 16).unwrap();
        let conditions = some_conditions(3);
        let err = sweep(&stack, &grid, &conditions, 4).unwrap_err();
        assert!(matches!(err, TmmError::Material(_)), "{err}");
    }

    #[test]
    fn ops_scale_linearly_with_conditions() {
        let stack = test_stack(5);
        let grid = SpectralGrid::linspace(0.5, 1.5, 10).unwrap();
        // s-pol only so each cell costs the same number of factors.
        let conds: Vec<IncidenceCondition> = (0..8)
            .map(|i| IncidenceCondition::new(i as f64 * 10.0, Polarization::S).unwrap())
            .collect();
        let one = sweep(&stack, &grid, &conds[..1], 2).unwrap();
        let eight = sweep(&stack, &grid, &conds, 2).unwrap();
        assert_eq!(one.matrix_ops, (2 * 5 + 1) * grid.len() as u64);
        assert_eq!(eight.matrix_ops, 8 * one.matrix_ops);
    }

    #[test]
    fn zero_workers_is_a_config_error() {
        let stack = test_stack(1);
        let grid = SpectralGrid::new(vec![0.6]).unwrap();
        assert!(matches!(
            sweep(&stack, &grid, &some_conditions(1), 0),
            Err(TmmError::Config(_))
        ));
    }
}
