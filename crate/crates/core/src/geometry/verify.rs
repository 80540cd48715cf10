use nalgebra::DMatrix;
use serde::Serialize;

use super::QContactStructure;
use crate::report::CheckResult;
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero in the
/// rank checks.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub structure: String,
    pub points: usize,
    pub checks: Vec<CheckResult>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Number of singular values of `m` that fall below `RANK_RTOL * scale`,
/// with the smallest relative singular value.
fn rank_deficit(m: &DMatrix<f64>, scale: f64) -> (usize, f64) {
    let expected = m.nrows().min(m.ncols());
    if !(scale > 0.0) {
        return (expected, 0.0);
    }
    let sv = m.clone().singular_values();
    let deficit = sv.iter().filter(|s| !(**s > RANK_RTOL * scale)).count();
    (deficit, sv.min() / scale)
}

/// Orthonormal basis of `xi = ker lambda_1 ∩ .. ∩ ker lambda_q`, as columns.
fn kernel_basis(forms: &DMatrix<f64>) -> DMatrix<f64> {
    let (q, dim) = forms.shape();
    let mut aug = DMatrix::zeros(dim, q + dim);
    aug.view_mut((0, 0), (dim, q)).copy_from(&forms.transpose());
    aug.view_mut((0, q), (dim, dim)).fill_with_identity();
    let qmat = aug.qr().q();
    qmat.columns(q, dim - q).into_owned()
}

/// Checks the structure axioms at every sample point: duality
/// `lambda_i(R_j) = delta_ij`, uniformity `d lambda_i = d lambda_1`,
/// nondegeneracy of `d lambda_1` on `xi`, `R_k` in the kernel of
/// `d lambda_1`, and pointwise independence of the forms.
pub fn verify_structure(s: &QContactStructure, points: &[Vec<f64>]) -> Result<StructureReport> {
    if points.is_empty() {
        return Err(Error::Model("verify_structure needs at least one sample point".into()));
    }
    let dims = s.dims();
    let tol = s.tolerance();
    let mut duality = Vec::new();
    let mut uniformity = Vec::new();
    let mut nondegeneracy = Vec::new();
    let mut kernel = Vec::new();
    let mut independence = Vec::new();
    let mut worst_nondeg = f64::INFINITY;
    let mut worst_indep = f64::INFINITY;

    for x in points {
        dims.check_len(x.len())?;
        let forms = s.forms(x)?;
        let reeb = s.reeb(x)?;
        let omegas = s.differentials(x)?;
        let omega = &omegas[0];

        let pairing = &forms * reeb.transpose();
        duality.push((pairing - DMatrix::identity(dims.qcount, dims.qcount)).amax());

        uniformity.push(omegas.iter().map(|o| (o - omega).amax()).fold(0.0, f64::max));

        let xi = kernel_basis(&forms);
        let restricted = xi.transpose() * omega * &xi;
        let (deficit, rel) = rank_deficit(&restricted, omega.amax());
        worst_nondeg = worst_nondeg.min(rel);
        nondegeneracy.push(deficit as f64);

        kernel.push((omega.transpose() * reeb.transpose()).amax());

        let mut normalized = forms.clone();
        for mut row in normalized.row_iter_mut() {
            let m = row.amax();
            if m > 0.0 {
                row.scale_mut(1.0 / m);
            }
        }
        let (deficit, rel) = rank_deficit(&normalized, 1.0);
        worst_indep = worst_indep.min(rel);
        independence.push(deficit as f64);
    }

    let checks = vec![
        CheckResult::from_samples("duality", duality, tol),
        CheckResult::from_samples("uniformity", uniformity, tol),
        CheckResult::from_samples("nondegeneracy", nondegeneracy, tol).with_detail(format!(
            "rank deficit of d lambda_1 on xi; smallest relative singular value {worst_nondeg:.3e}"
        )),
        CheckResult::from_samples("reeb-kernel", kernel, tol),
        CheckResult::from_samples("independence", independence, tol).with_detail(format!(
            "rank deficit of the coframe; smallest relative singular value {worst_indep:.3e}"
        )),
    ];
    Ok(StructureReport {
        structure: s.name().to_string(),
        points: points.len(),
        checks,
    })
}
