//! Symmetric normalized graph propagation operator.

use crate::linalg::Mat;

/// The propagation matrix `G = D^(-1/2) (A + I) D^(-1/2)` where `D` holds
/// the row sums of the self-looped adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianOperator {
    pub g: Mat,
}

/// Build the operator from a row-major binary adjacency with zero diagonal.
/// Self-loops guarantee every degree is at least one, so no division can
/// fail.
pub fn normalized_laplacian(adjacency: &[u8], n: usize) -> LaplacianOperator {
    debug_assert_eq!(adjacency.len(), n * n);
    let mut a_tilde = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            debug_assert!(adjacency[i * n + j] <= 1, "adjacency must be binary");
            debug_assert_eq!(
                adjacency[i * n + j],
                adjacency[j * n + i],
                "adjacency must be symmetric"
            );
            a_tilde[(i, j)] = f64::from(adjacency[i * n + j]);
        }
        debug_assert_eq!(adjacency[i * n + i], 0, "adjacency diagonal must be zero");
        a_tilde[(i, i)] = 1.0;
    }
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = (0..n).map(|j| a_tilde[(i, j)]).sum();
            1.0 / deg.sqrt()
        })
        .collect();
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inv_sqrt_deg[i] * a_tilde[(i, j)] * inv_sqrt_deg[j];
        }
    }
    LaplacianOperator { g }
}
