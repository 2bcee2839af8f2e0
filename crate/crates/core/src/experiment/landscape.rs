use rayon::prelude::*;

use super::output::{fmt_num, CsvTable};
use crate::doe::grid2d;
use crate::error::{invalid, Result};
use crate::stats::{ks_one_sample, uniform_cdf, TestRecord};
use crate::suite::{ProblemInstance, LOWER_BOUND, UPPER_BOUND};

/// Floor applied before taking logarithms of mean precision.
pub const PRECISION_FLOOR: f64 = 1e-16;

/// Per-coordinate KS test of optimum locations against Uniform(-4, 4).
pub fn optimum_uniformity(instances: &[ProblemInstance]) -> Result<Vec<TestRecord>> {
    let Some(first) = instances.first() else {
        return invalid("no instances");
    };
    (0..first.dim())
        .map(|j| {
            let coords: Vec<f64> = instances.iter().map(|i| i.xopt()[j]).collect();
            ks_one_sample(&coords, uniform_cdf(-4.0, 4.0))
        })
        .collect()
}

pub(crate) fn uniformity_rows(t: &mut CsvTable, fid: u32, tests: &[TestRecord], alpha: f64) -> Result<()> {
    for (j, r) in tests.iter().enumerate() {
        t.row([
            fid.to_string(),
            (j + 1).to_string(),
            r.n1.to_string(),
            fmt_num(r.statistic),
            fmt_num(r.p_value),
            (r.p_value < alpha).to_string(),
        ])?;
    }
    Ok(())
}

/// `log10` of the mean precision over `iids` at each point of a square
/// grid over the domain, first coordinate varying fastest.
pub fn average_grid(fid: u32, iids: &[u32], resolution: usize) -> Result<Vec<([f64; 2], f64)>> {
    let grid = grid2d(resolution, LOWER_BOUND, UPPER_BOUND)?;
    if iids.is_empty() {
        return invalid("average grid needs at least one instance");
    }
    let instances = iids
        .iter()
        .map(|&i| ProblemInstance::new(fid, i, 2))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .par_iter()
        .map(|p| {
            let mut sum = 0.0;
            for inst in &instances {
                sum += inst.chain().eval_unshifted(p);
            }
            let mean = sum / instances.len() as f64;
            (*p, mean.max(PRECISION_FLOOR).log10())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sphere_instance_is_closed_form() {
        let g = average_grid(1, &[3], 11).unwrap();
        let inst = ProblemInstance::new(1, 3, 2).unwrap();
        assert_eq!(g.len(), 121);
        for (p, v) in g {
            let d2: f64 = p.iter().zip(inst.xopt()).map(|(a, b)| (a - b) * (a - b)).sum();
            assert_eq!(v, d2.max(PRECISION_FLOOR).log10());
        }
    }

    #[test]
    fn grid_size() {
        assert_eq!(average_grid(2, &[1, 2], 101).unwrap().len(), 101 * 101);
    }
}
