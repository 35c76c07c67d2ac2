//! Seeded benchmark instances: LASSO, 1D and 2D total variation denoising,
//! and compressed-sensing MRI with homodyne detection.

mod image;
mod lasso;
mod mri;
mod tv;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linops::adjoint_mismatch;
use crate::solvers::SaddleProblem;
use crate::{Error, Result};

pub use image::synthetic_image;
pub use lasso::gen_lasso;
pub use mri::{
    centered_row, gen_masks, gen_mri_problem, homodyne_phase, homodyne_ramp, phantom, Homodyne, MriData, MriParams,
    SamplingMask,
};
pub use tv::{gen_tv1d, gen_tv2d, SplitMethod};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Lasso,
    Tv1d,
    Tv2d,
    Mri,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [ProblemKind::Lasso, ProblemKind::Tv1d, ProblemKind::Tv2d, ProblemKind::Mri];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Lasso => "lasso",
            ProblemKind::Tv1d => "tv1d",
            ProblemKind::Tv2d => "tv2d",
            ProblemKind::Mri => "mri",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}' (expected lasso, tv1d, tv2d or mri)")))
    }
}

/// A generated problem together with its ground truth and data.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub problem: SaddleProblem,
    /// Ground truth in the primal space (signal or image), when synthetic.
    pub truth: Option<Vec<f64>>,
    /// Measurements `b`.
    pub data: Vec<f64>,
    /// `(rows, cols)` when the primal variable or the truth is an image.
    pub grid: Option<(usize, usize)>,
    pub params: BTreeMap<String, f64>,
    pub mri: Option<MriData>,
}

const ADJOINT_PROBES: usize = 4;
const ADJOINT_TOL: f64 = 1e-10;

/// Checks the adjoint identity of `A` (and `B`) and the split identity.
pub fn validate(prob: &SaddleProblem) -> Result<()> {
    let err = adjoint_mismatch(&prob.a, ADJOINT_PROBES, 0xad)?;
    if err > ADJOINT_TOL {
        return Err(Error::Construction(format!("adjoint check of {} failed ({err:e})", prob.a.name())));
    }
    if let Some(split) = &prob.split {
        let err = adjoint_mismatch(&split.b, ADJOINT_PROBES, 0xae)?;
        if err > ADJOINT_TOL {
            return Err(Error::Construction(format!("adjoint check of {} failed ({err:e})", split.b.name())));
        }
        let res = split.verify(crate::bsplit::SPLIT_PROBES, 0xaf)?;
        if res > crate::bsplit::SPLIT_TOL {
            return Err(Error::Construction(format!("split identity residual {res:e}")));
        }
    }
    Ok(())
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (String::from(*k), *v)).collect()
}
