//! Segmentation-style observations and visual forecast overlays.

mod ground;
mod image;
mod overlay;
mod raster;
mod scene;

pub use ground::GroundGrid;
pub use image::{
    write_png, Class, LabelImage, ObservationStack, IMAGE_HEIGHT, IMAGE_WIDTH, PALETTE,
};
pub use overlay::{ap_quad, overlay_ap, overlay_box_forecast};
pub use raster::{coverage_spans, fill_box, fill_polygon, polygon_spans, Span};
pub use scene::{pedestrian_layers, rasterize_scene, PedestrianLayer, SceneRenderer};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PedestrianStyle {
    Contour,
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overlay {
    None,
    Box,
    Ap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RenderMode {
    pub pedestrian_style: PedestrianStyle,
    pub overlay: Overlay,
}

/// The four observation configurations compared in evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    /// Pedestrian contours, no overlay.
    #[serde(rename = "seg")]
    Seg,
    /// Pedestrians filled to their boxes, no overlay.
    #[serde(rename = "seg-box")]
    SegBox,
    /// Box-filled pedestrians plus the forecast box sequence.
    #[serde(rename = "seg-box+box")]
    SegBoxBox,
    /// Pedestrian contours plus the augmented path.
    #[serde(rename = "seg+ap")]
    SegAp,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::Seg,
        Approach::SegBox,
        Approach::SegBoxBox,
        Approach::SegAp,
    ];

    pub fn mode(self) -> RenderMode {
        let (pedestrian_style, overlay) = match self {
            Approach::Seg => (PedestrianStyle::Contour, Overlay::None),
            Approach::SegBox => (PedestrianStyle::Box, Overlay::None),
            Approach::SegBoxBox => (PedestrianStyle::Box, Overlay::Box),
            Approach::SegAp => (PedestrianStyle::Contour, Overlay::Ap),
        };
        RenderMode {
            pedestrian_style,
            overlay,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Seg => "seg",
            Approach::SegBox => "seg-box",
            Approach::SegBoxBox => "seg-box+box",
            Approach::SegAp => "seg+ap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.to_ascii_lowercase().replace(['(', ')', ' '], "");
        match norm.as_str() {
            "seg" => Some(Approach::Seg),
            "seg-box" | "segbox" => Some(Approach::SegBox),
            "seg-box+box" | "segbox+box" => Some(Approach::SegBoxBox),
            "seg+ap" => Some(Approach::SegAp),
            _ => None,
        }
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approach_names_round_trip() {
        for a in Approach::ALL {
            assert_eq!(Approach::parse(a.as_str()), Some(a));
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.as_str()));
        }
        assert_eq!(Approach::parse("Seg(box)+BOX"), Some(Approach::SegBoxBox));
        assert_eq!(Approach::parse("nope"), None);
    }

    #[test]
    fn approach_modes() {
        assert_eq!(
            Approach::SegBox.mode().pedestrian_style,
            PedestrianStyle::Box
        );
        assert_eq!(Approach::SegAp.mode().overlay, Overlay::Ap);
        assert_eq!(Approach::Seg.mode().overlay, Overlay::None);
    }
}
