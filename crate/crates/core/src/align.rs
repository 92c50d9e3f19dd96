//! Rigid rotation between two corresponding point sets (Kabsch).

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    cross3, dot3, mat3_vec, norm3, scale3, sub3, symmetric_eigen, Mat3, Matrix, Vec3,
};
use alloc::vec::Vec;

fn centroid(points: &[Vec3]) -> Vec3 {
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k];
        }
    }
    scale3(c, 1.0 / points.len() as f64)
}

fn normalized(v: Vec3) -> Vec3 {
    scale3(v, 1.0 / norm3(v))
}

/// Proper rotation `R` minimizing `Σ ‖R (pᵢ − p̄) − (qᵢ − q̄)‖²`.
///
/// With `H = Σ (pᵢ − p̄)(qᵢ − q̄)ᵀ = U Σ Vᵀ`, the answer is `V D Uᵀ` where
/// `D` flips the weakest singular direction when needed to keep `det R = +1`.
/// The SVD comes from the eigendecomposition of `HᵀH`. Completing both
/// bases with cross products gives two proper frames, which is the same as
/// applying `D`.
pub fn estimate_template_rotation(frame: &[Vec3], template: &[Vec3]) -> Result<Mat3> {
    if frame.len() != template.len() {
        return Err(invalid!(
            "point sets differ in size ({} vs {})",
            frame.len(),
            template.len()
        ));
    }
    if frame.len() < 3 {
        return Err(Error::DegeneratePoints(alloc::format!(
            "need at least 3 points, got {}",
            frame.len()
        )));
    }
    let (pc, qc) = (centroid(frame), centroid(template));
    let mut h = [[0.0; 3]; 3];
    for (p, q) in frame.iter().zip(template) {
        let (a, b) = (sub3(*p, pc), sub3(*q, qc));
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] += a[i] * b[j];
            }
        }
    }
    // HᵀH
    let mut hth = Matrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            hth.set(i, j, (0..3).map(|k| h[k][i] * h[k][j]).sum());
        }
    }
    let (vals, vecs) = symmetric_eigen(&hth)?;
    let sigma: Vec<f64> = vals.iter().map(|v| libm::sqrt(v.max(0.0))).collect();
    if !(sigma[0] > 1e-12) || sigma[1] <= 1e-9 * sigma[0] {
        return Err(Error::DegeneratePoints(alloc::string::String::from(
            "points are coincident or collinear",
        )));
    }
    // Eigenvectors of HᵀH live in template space; H maps them back into
    // frame space: H w = σ u.
    let col = |k: usize| [vecs.get(0, k), vecs.get(1, k), vecs.get(2, k)];
    let w1 = normalized(col(0));
    let w2 = normalized(sub3(col(1), scale3(w1, dot3(w1, col(1)))));
    let w3 = cross3(w1, w2);
    let u1 = normalized(mat3_vec(&h, w1));
    let u2 = mat3_vec(&h, w2);
    let u2 = normalized(sub3(u2, scale3(u1, dot3(u1, u2))));
    let u3 = cross3(u1, u2);
    let mut r = [[0.0; 3]; 3];
    for (w, u) in [(w1, u1), (w2, u2), (w3, u3)] {
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += w[i] * u[j];
            }
        }
    }
    Ok(r)
}
