//! Node feature matrices: sinusoidal embedding of the geometric attributes,
//! optional external per-component feature vectors, and pivot normalization.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::geometry::TextComponent;
use crate::linalg::Mat;
use crate::local_graph::LocalGraph;

/// Sinusoidal embedding parameters: `c_eps` output dimensions per scalar
/// (even), wavelengths spanning powers of `wavelength_base`, and a scale
/// applied to attributes before embedding.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub c_eps: usize,
    pub wavelength_base: f64,
    pub scale: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            c_eps: 16,
            wavelength_base: 1000.0,
            scale: 1.0,
        }
    }
}

impl EmbeddingConfig {
    pub fn with_c_eps(c_eps: usize) -> Self {
        Self {
            c_eps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_eps < 2 || self.c_eps % 2 != 0 {
            return Err(DrrgError::Config(format!(
                "c_eps must be an even integer >= 2, got {}",
                self.c_eps
            )));
        }
        if !(self.wavelength_base > 1.0) {
            return Err(DrrgError::Config(format!(
                "wavelength base must exceed 1, got {}",
                self.wavelength_base
            )));
        }
        Ok(())
    }

    /// Width of the geometric feature block: six embedded attributes.
    pub fn geometric_dim(&self) -> usize {
        6 * self.c_eps
    }
}

/// Per-component feature source: geometric embeddings only, or geometric
/// embeddings concatenated after externally supplied vectors (the stand-in
/// for pooled CNN features).
#[derive(Debug, Clone)]
pub enum FeatureProvider {
    GeometricOnly,
    External(ExternalFeatures),
}

impl FeatureProvider {
    pub fn external_dim(&self) -> usize {
        match self {
            FeatureProvider::GeometricOnly => 0,
            FeatureProvider::External(f) => f.dim,
        }
    }

    fn external_vector(&self, component: usize) -> Result<&[f64]> {
        match self {
            FeatureProvider::GeometricOnly => Ok(&[]),
            FeatureProvider::External(f) => f
                .vectors
                .get(&component)
                .map(Vec::as_slice)
                .ok_or_else(|| {
                    DrrgError::Data(format!(
                        "external feature vector missing for component {component}"
                    ))
                }),
        }
    }
}

/// External feature file payload: `{dim, vectors: {component_index: [..]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalFeatures {
    pub dim: usize,
    pub vectors: HashMap<usize, Vec<f64>>,
}

impl ExternalFeatures {
    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.vectors {
            if v.len() != self.dim {
                return Err(DrrgError::Data(format!(
                    "external vector for component {k} has width {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// Node feature matrix of one local graph; row 0 is the pivot and is all
/// zeros after normalization.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub mat: Mat,
}

impl FeatureMatrix {
    pub fn dim(&self) -> usize {
        self.mat.cols()
    }
}

/// Sine/cosine embedding of one scalar: slot `2i` is
/// `cos(z / base^(2i/c_eps))`, slot `2i+1` the matching sine.
pub fn embed_scalar(z: f64, cfg: &EmbeddingConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(cfg.c_eps);
    for i in 0..cfg.c_eps / 2 {
        let denom = cfg
            .wavelength_base
            .powf(2.0 * i as f64 / cfg.c_eps as f64);
        let arg = z / denom;
        out.push(arg.cos());
        out.push(arg.sin());
    }
    out
}

/// Geometric feature of a component: the embeddings of
/// `(x, y, h, w, cos_t, sin_t)` concatenated in that order.
pub fn component_embedding(c: &TextComponent, cfg: &EmbeddingConfig) -> Vec<f64> {
    let attrs = [c.x, c.y, c.h, c.w, c.cos_t, c.sin_t];
    let mut out = Vec::with_capacity(cfg.geometric_dim());
    for a in attrs {
        out.extend(embed_scalar(a * cfg.scale, cfg));
    }
    out
}

/// Assemble the normalized node feature matrix of a local graph: per node,
/// the provider vector concatenated with the geometric embedding, then the
/// pivot row subtracted from every row.
pub fn assemble_feature_matrix(
    g: &LocalGraph,
    comps: &[TextComponent],
    provider: &FeatureProvider,
    cfg: &EmbeddingConfig,
) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let width = provider.external_dim() + cfg.geometric_dim();
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(g.nodes.len());
    for &node in &g.nodes {
        let mut row = Vec::with_capacity(width);
        row.extend_from_slice(provider.external_vector(node)?);
        row.extend(component_embedding(&comps[node], cfg));
        raw.push(row);
    }
    let pivot_row = raw[0].clone();
    for row in &mut raw {
        for (v, p) in row.iter_mut().zip(&pivot_row) {
            *v -= p;
        }
    }
    Ok(FeatureMatrix {
        mat: Mat::from_rows(&raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_graph::{build_local_graph, GraphConfig};

    fn comp_at(x: f64, y: f64) -> TextComponent {
        TextComponent::new(x, y, 20.0, 10.0, 0.3).unwrap()
    }

    #[test]
    fn embed_zero_alternates_one_zero() {
        let cfg = EmbeddingConfig::with_c_eps(8);
        let e = embed_scalar(0.0, &cfg);
        for (i, v) in e.iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(*v, 1.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn embed_pair_norm_identity() {
        let cfg = EmbeddingConfig::with_c_eps(16);
        for &z in &[0.0, 1.0, -7.5, 123.456, 5000.0] {
            let e = embed_scalar(z, &cfg);
            for pair in e.chunks(2) {
                assert!((pair[0] * pair[0] + pair[1] * pair[1] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn embed_known_values() {
        let cfg = EmbeddingConfig::with_c_eps(4);
        let e = embed_scalar(10.0, &cfg);
        let root = 1000.0f64.sqrt();
        assert!((e[0] - 10.0f64.cos()).abs() < 1e-15);
        assert!((e[1] - 10.0f64.sin()).abs() < 1e-15);
        assert!((e[2] - (10.0 / root).cos()).abs() < 1e-15);
        assert!((e[3] - (10.0 / root).sin()).abs() < 1e-15);
        // frozen transcendental values
        assert!((e[0] - (-0.83907)).abs() < 1e-5);
        assert!((e[1] - (-0.54402)).abs() < 1e-5);
        assert!((e[2] - 0.95042).abs() < 1e-5);
        assert!((e[3] - 0.31098).abs() < 1e-5);
    }

    #[test]
    fn component_embedding_dim_and_recompute() {
        let cfg = EmbeddingConfig::with_c_eps(6);
        let c = comp_at(12.0, 34.0);
        let e = component_embedding(&c, &cfg);
        assert_eq!(e.len(), 36);
        // independent slot-by-slot recomputation
        let attrs = [c.x, c.y, c.h, c.w, c.cos_t, c.sin_t];
        for (a_idx, &z) in attrs.iter().enumerate() {
            for i in 0..cfg.c_eps / 2 {
                let denom = 1000.0f64.powf(2.0 * i as f64 / cfg.c_eps as f64);
                assert_eq!(e[a_idx * cfg.c_eps + 2 * i], (z / denom).cos());
                assert_eq!(e[a_idx * cfg.c_eps + 2 * i + 1], (z / denom).sin());
            }
        }
    }

    #[test]
    fn pivot_row_is_zero_and_shape_matches() {
        let comps: Vec<TextComponent> =
            (0..7).map(|k| comp_at(k as f64 * 15.0, 0.0)).collect();
        let g = build_local_graph(2, &comps, &GraphConfig::default());
        let cfg = EmbeddingConfig::with_c_eps(16);
        let fm =
            assemble_feature_matrix(&g, &comps, &FeatureProvider::GeometricOnly, &cfg).unwrap();
        assert_eq!(fm.mat.rows(), g.nodes.len());
        assert_eq!(fm.dim(), 96);
        assert!(fm.mat.row(0).iter().all(|&v| v == 0.0));
        assert!(fm.mat.is_finite());
    }

    #[test]
    fn shift_invariance_of_normalized_features() {
        // Adding a constant vector to every raw node feature must cancel.
        // External vectors provide the constant shift.
        let comps: Vec<TextComponent> =
            (0..5).map(|k| comp_at(k as f64 * 12.0, 3.0)).collect();
        let g = build_local_graph(1, &comps, &GraphConfig::default());
        let cfg = EmbeddingConfig::with_c_eps(4);

        let zeros = ExternalFeatures {
            dim: 3,
            vectors: (0..5).map(|i| (i, vec![0.0; 3])).collect(),
        };
        let shifted = ExternalFeatures {
            dim: 3,
            vectors: (0..5).map(|i| (i, vec![4.25; 3])).collect(),
        };
        let a = assemble_feature_matrix(&g, &comps, &FeatureProvider::External(zeros), &cfg)
            .unwrap();
        let b = assemble_feature_matrix(&g, &comps, &FeatureProvider::External(shifted), &cfg)
            .unwrap();
        assert_eq!(a.mat, b.mat);
        assert_eq!(a.dim(), 3 + 24);
    }

    #[test]
    fn missing_external_vector_is_a_data_error() {
        let comps: Vec<TextComponent> =
            (0..4).map(|k| comp_at(k as f64 * 12.0, 0.0)).collect();
        let g = build_local_graph(0, &comps, &GraphConfig::default());
        let partial = ExternalFeatures {
            dim: 2,
            vectors: [(0usize, vec![1.0, 2.0])].into_iter().collect(),
        };
        let err = assemble_feature_matrix(
            &g,
            &comps,
            &FeatureProvider::External(partial),
            &EmbeddingConfig::with_c_eps(4),
        )
        .unwrap_err();
        assert!(err.to_string().contains("component"), "{err}");
    }

    #[test]
    fn odd_c_eps_rejected() {
        let cfg = EmbeddingConfig {
            c_eps: 5,
            ..EmbeddingConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
