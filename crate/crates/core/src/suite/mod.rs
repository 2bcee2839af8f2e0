//! The 24 noiseless BBOB functions with seeded instance generation.
//!
//! An instance is fully determined by `(fid, iid, dim)`: the instance seed
//! `fid + 10000 * iid` keys independent random streams for the optimum
//! location, the optimal value, the two rotations and any per-function tables.
//! Instances are immutable once created and evaluation is pure.

mod chain;
mod functions;
mod transforms;

use serde::{Deserialize, Serialize};
use std::io::Write;

pub use chain::{PeakTable, RawFunction, Step, TransformChain};
pub use transforms::{
    derive_seed, f_pen, lambda_alpha, rotation_from_seed, t_asy, t_osz, t_osz_scalar,
    SquareMatrix, MAX_FID,
};

use crate::error::{invalid, Error, Result};

/// Box bounds treated as the search domain.
pub const LOWER_BOUND: f64 = -5.0;
pub const UPPER_BOUND: f64 = 5.0;

/// Functions whose optimum is not drawn uniformly from `[-4, 4]^d`.
pub const NON_UNIFORM_OPTIMUM: [u32; 7] = [4, 5, 8, 9, 19, 20, 24];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProblemId {
    fid: u32,
    iid: u32,
    dim: usize,
}

impl ProblemId {
    pub fn new(fid: u32, iid: u32, dim: usize) -> Result<Self> {
        derive_seed(fid, iid)?;
        if dim < 2 {
            return invalid(format!("dimension must be >= 2, got {dim}"));
        }
        Ok(Self { fid, iid, dim })
    }

    pub fn fid(&self) -> u32 {
        self.fid
    }

    pub fn iid(&self) -> u32 {
        self.iid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.fid as u64 + 10_000 * self.iid as u64
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "f{}_i{}_d{}", self.fid, self.iid, self.dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    id: ProblemId,
    xopt: Vec<f64>,
    fopt: f64,
    rot_r: SquareMatrix,
    rot_q: SquareMatrix,
    chain: TransformChain,
}

/// Materializes an instance from its id.
pub fn create_instance(id: ProblemId) -> Result<ProblemInstance> {
    if !(1..=MAX_FID).contains(&id.fid) {
        return invalid(format!("unsupported fid {}", id.fid));
    }
    let m = functions::materialize(id.fid, id.dim, id.seed());
    Ok(ProblemInstance {
        id,
        fopt: m.chain.fopt,
        xopt: m.xopt,
        rot_r: m.rot_r,
        rot_q: m.rot_q,
        chain: m.chain,
    })
}

impl ProblemInstance {
    pub fn new(fid: u32, iid: u32, dim: usize) -> Result<Self> {
        create_instance(ProblemId::new(fid, iid, dim)?)
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.id.dim
    }

    pub fn name(&self) -> &'static str {
        functions::function_name(self.id.fid)
    }

    pub fn xopt(&self) -> &[f64] {
        &self.xopt
    }

    pub fn fopt(&self) -> f64 {
        self.fopt
    }

    pub fn rot_r(&self) -> &SquareMatrix {
        &self.rot_r
    }

    pub fn rot_q(&self) -> &SquareMatrix {
        &self.rot_q
    }

    pub fn chain(&self) -> &TransformChain {
        &self.chain
    }

    #[cfg(test)]
    pub(crate) fn with_chain(&self, chain: TransformChain) -> Self {
        Self {
            chain,
            ..self.clone()
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.id.dim {
            return Err(Error::DimensionMismatch {
                expected: self.id.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.chain.eval(x))
    }

    /// `evaluate(x) - fopt`, computed without adding and removing `fopt`.
    pub fn precision(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.chain.eval_unshifted(x))
    }
}

/// Writes the optimum manifest: `fid,iid,dim,fopt,xopt_1..xopt_d`.
pub fn write_manifest<W: Write>(instances: &[ProblemInstance], out: W) -> Result<()> {
    let dim = instances.first().map(|i| i.dim()).unwrap_or(0);
    if instances.iter().any(|i| i.dim() != dim) {
        return invalid("manifest instances must share one dimension");
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["fid".to_string(), "iid".into(), "dim".into(), "fopt".into()];
    header.extend((1..=dim).map(|i| format!("xopt_{i}")));
    w.write_record(&header)?;
    for inst in instances {
        let mut row = vec![
            inst.id.fid.to_string(),
            inst.id.iid.to_string(),
            dim.to_string(),
            inst.fopt.to_string(),
        ];
        row.extend(inst.xopt.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn invalid_ids() {
        assert!(ProblemId::new(0, 1, 2).is_err());
        assert!(ProblemId::new(25, 1, 2).is_err());
        assert!(ProblemId::new(1, 0, 2).is_err());
        assert!(ProblemId::new(1, 1, 1).is_err());
    }

    #[test]
    fn deterministic_creation() {
        let a = ProblemInstance::new(1, 1, 2).unwrap();
        let b = ProblemInstance::new(1, 1, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.xopt(), b.xopt());
        assert_eq!(a.fopt().to_bits(), b.fopt().to_bits());
    }

    #[test]
    fn sphere_values() {
        let inst = ProblemInstance::new(1, 3, 4).unwrap();
        assert_eq!(inst.evaluate(inst.xopt()).unwrap(), inst.fopt());
        let mut x = inst.xopt().to_vec();
        x[0] += 1.0;
        assert_abs_diff_eq!(inst.evaluate(&x).unwrap(), inst.fopt() + 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(inst.precision(&x).unwrap(), 1.0, epsilon = 1e-12);

        let inst = ProblemInstance::new(1, 1, 2).unwrap();
        let x = [inst.xopt()[0] + 3.0, inst.xopt()[1] + 4.0];
        assert_abs_diff_eq!(inst.precision(&x).unwrap(), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let inst = ProblemInstance::new(3, 1, 3).unwrap();
        assert!(matches!(
            inst.evaluate(&[0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn linear_slope_corners_and_lower_bound() {
        for iid in 1..=100 {
            let inst = ProblemInstance::new(5, iid, 3).unwrap();
            assert!(inst.xopt().iter().all(|v| v.abs() == 5.0));
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for iid in 1..=5 {
            let inst = ProblemInstance::new(5, iid, 4).unwrap();
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..=5.0)).collect();
                assert!(inst.evaluate(&x).unwrap() >= inst.fopt());
            }
        }
    }

    #[test]
    fn precision_identity() {
        let inst = ProblemInstance::new(12, 1, 2).unwrap();
        let x = [1.234, -2.5];
        let direct = inst.evaluate(&x).unwrap() - inst.fopt();
        let p = inst.precision(&x).unwrap();
        assert!((direct - p).abs() <= 1e-9 * p.abs().max(1.0), "{direct} vs {p}");
    }

    #[test]
    fn fopt_range() {
        for fid in 1..=24 {
            for iid in 1..=50 {
                let inst = ProblemInstance::new(fid, iid, 2).unwrap();
                let f = inst.fopt();
                assert!((-1000.0..=1000.0).contains(&f));
                assert_eq!((f * 100.0).round() / 100.0, f);
            }
        }
    }

    #[test]
    fn manifest_layout() {
        let insts: Vec<_> = (1..=2).map(|i| ProblemInstance::new(1, i, 2).unwrap()).collect();
        let mut buf = Vec::new();
        write_manifest(&insts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "fid,iid,dim,fopt,xopt_1,xopt_2");
        assert_eq!(text.lines().count(), 3);
        assert!(!text.contains('\r'));
    }
}
