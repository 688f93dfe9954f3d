//! Static SVG rendering of scenes, components, local-graph edges, and
//! detection results. Output is deterministic text.

use std::fmt::Write as _;

use crate::geometry::{component_corners, Point, TextComponent};
use crate::inference::DetectedInstance;
use crate::local_graph::LocalGraph;
use crate::synth::Scene;

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    /// Draw the one-hop/two-hop edges of this pivot's local graph.
    pub graph: Option<LocalGraph>,
    pub detections: Vec<DetectedInstance>,
    /// Components to draw instead of the scene's ground-truth list
    /// (e.g. the perturbed detector input).
    pub components_override: Option<Vec<TextComponent>>,
}

fn points_attr(points: &[Point]) -> String {
    let mut s = String::new();
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{},{}", fmt(p.x), fmt(p.y));
    }
    s
}

fn fmt(v: f64) -> String {
    // two decimals keep files small; rendering is display-only
    format!("{v:.2}")
}

pub fn render_scene(scene: &Scene, opts: &RenderOptions) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = fmt(scene.width),
        h = fmt(scene.height)
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        fmt(scene.width),
        fmt(scene.height)
    );

    for inst in &scene.instances {
        let _ = writeln!(
            svg,
            "  <polygon points=\"{}\" fill=\"#4477aa22\" stroke=\"#4477aa\" stroke-width=\"1\"/>",
            points_attr(&inst.boundary)
        );
    }

    let comps = opts
        .components_override
        .as_deref()
        .unwrap_or(&scene.components);
    for c in comps {
        let _ = writeln!(
            svg,
            "  <polygon points=\"{}\" fill=\"none\" stroke=\"#22883388\" stroke-width=\"0.8\"/>",
            points_attr(&component_corners(c))
        );
    }

    if let Some(g) = &opts.graph {
        let pivot = comps[g.pivot].center();
        for (pos, &node) in g.nodes.iter().enumerate().skip(1) {
            let p = comps[node].center();
            let one_hop = g.one_hop.contains(&pos);
            let (color, width) = if one_hop {
                ("#cc3311", "1.2")
            } else {
                ("#cc331155", "0.6")
            };
            let _ = writeln!(
                svg,
                "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"{width}\"/>",
                fmt(pivot.x),
                fmt(pivot.y),
                fmt(p.x),
                fmt(p.y)
            );
        }
        let _ = writeln!(
            svg,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#cc3311\"/>",
            fmt(pivot.x),
            fmt(pivot.y)
        );
    }

    for det in &opts.detections {
        let _ = writeln!(
            svg,
            "  <polygon points=\"{}\" fill=\"#ee773344\" stroke=\"#ee7733\" stroke-width=\"1.5\"/>",
            points_attr(&det.boundary)
        );
        if let Some(quad) = &det.quad {
            let _ = writeln!(
                svg,
                "  <polygon points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-dasharray=\"4 2\" stroke-width=\"1\"/>",
                points_attr(quad)
            );
        }
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_scene, SceneConfig};

    #[test]
    fn render_is_deterministic_and_well_formed() {
        let scene = generate_scene(&SceneConfig::default(), 5).unwrap();
        let a = render_scene(&scene, &RenderOptions::default());
        let b = render_scene(&scene, &RenderOptions::default());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(
            a.matches("<polygon").count(),
            scene.instances.len() + scene.components.len()
        );
    }
}
