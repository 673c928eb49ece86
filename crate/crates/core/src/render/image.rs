use std::io::Write;

use serde::{Deserialize, Serialize};

pub const IMAGE_WIDTH: usize = 180;
pub const IMAGE_HEIGHT: usize = 84;

/// Per-pixel semantic class. Discriminants are the stored byte values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Class {
    Background = 0,
    Road = 1,
    Boundary = 2,
    Goal = 3,
    Pedestrian = 4,
    ForecastBox = 5,
    ForecastPath = 6,
}

impl Class {
    pub const ALL: [Class; 7] = [
        Class::Background,
        Class::Road,
        Class::Boundary,
        Class::Goal,
        Class::Pedestrian,
        Class::ForecastBox,
        Class::ForecastPath,
    ];

    pub fn from_u8(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    /// Paint precedence; a pixel only takes a class of equal or higher rank.
    pub fn rank(self) -> u8 {
        match self {
            Class::Background => 0,
            Class::Road => 1,
            Class::Boundary => 2,
            Class::Goal => 3,
            Class::ForecastBox | Class::ForecastPath => 4,
            Class::Pedestrian => 5,
        }
    }

    pub fn is_forecast(self) -> bool {
        matches!(self, Class::ForecastBox | Class::ForecastPath)
    }
}

/// RGB colours used for PNG dumps, indexed by class id.
pub const PALETTE: [[u8; 3]; 7] = [
    [0, 0, 0],
    [128, 64, 128],
    [244, 35, 232],
    [0, 200, 0],
    [220, 20, 60],
    [255, 200, 0],
    [0, 160, 255],
];

/// Class-id raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Default for LabelImage {
    fn default() -> Self {
        Self::new(IMAGE_WIDTH, IMAGE_HEIGHT)
    }
}

impl LabelImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Class::Background as u8; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> Class {
        Class::from_u8(self.data[row * self.width + col]).expect("valid class id")
    }

    /// Unconditional write.
    pub fn set(&mut self, col: usize, row: usize, class: Class) {
        self.data[row * self.width + col] = class as u8;
    }

    /// Writes `class` unless the pixel holds a class of higher precedence.
    pub fn paint(&mut self, col: usize, row: usize, class: Class) {
        let px = &mut self.data[row * self.width + col];
        let cur = Class::from_u8(*px).expect("valid class id");
        if class.rank() >= cur.rank() {
            *px = class as u8;
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn count(&self, class: Class) -> usize {
        self.data.iter().filter(|&&v| v == class as u8).count()
    }

    pub fn classes_present(&self) -> Vec<Class> {
        Class::ALL
            .into_iter()
            .filter(|c| self.count(*c) > 0)
            .collect()
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize, Class)> + '_ {
        self.data.iter().enumerate().map(move |(i, &v)| {
            (
                i % self.width,
                i / self.width,
                Class::from_u8(v).expect("valid class id"),
            )
        })
    }
}

/// Three most recent frames, oldest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationStack {
    frames: [LabelImage; 3],
}

impl ObservationStack {
    pub const DEPTH: usize = 3;

    /// Fills every slot with `frame`.
    pub fn reset(frame: LabelImage) -> Self {
        Self {
            frames: [frame.clone(), frame.clone(), frame],
        }
    }

    pub fn push_frame(&mut self, frame: LabelImage) {
        self.frames.rotate_left(1);
        self.frames[2] = frame;
    }

    pub fn frames(&self) -> &[LabelImage; 3] {
        &self.frames
    }

    pub fn newest(&self) -> &LabelImage {
        &self.frames[2]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major `3 x height x width` class-id tensor.
    pub fn to_tensor(&self) -> Vec<u8> {
        self.frames
            .iter()
            .flat_map(|f| f.as_bytes().iter().copied())
            .collect()
    }

    pub fn from_tensor(width: usize, height: usize, bytes: &[u8]) -> Option<Self> {
        let n = width * height;
        if bytes.len() != 3 * n || bytes.iter().any(|&b| Class::from_u8(b).is_none()) {
            return None;
        }
        let frame = |k: usize| LabelImage {
            width,
            height,
            data: bytes[k * n..(k + 1) * n].to_vec(),
        };
        Some(Self {
            frames: [frame(0), frame(1), frame(2)],
        })
    }
}

/// Writes `img` as an 8-bit paletted PNG.
pub fn write_png<W: Write>(img: &LabelImage, out: W) -> Result<(), png::EncodingError> {
    let mut enc = png::Encoder::new(out, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Indexed);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_palette(PALETTE.concat());
    let mut writer = enc.write_header()?;
    writer.write_image_data(&img.data)?;
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(class: Class) -> LabelImage {
        let mut img = LabelImage::default();
        for r in 0..IMAGE_HEIGHT {
            for c in 0..IMAGE_WIDTH {
                img.set(c, r, class);
            }
        }
        img
    }

    #[test]
    fn reset_replicates() {
        let a = solid(Class::Road);
        let s = ObservationStack::reset(a.clone());
        assert!(s.frames().iter().all(|f| *f == a));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn push_drops_oldest() {
        let [a, b, c, d] =
            [Class::Road, Class::Goal, Class::Boundary, Class::Pedestrian].map(solid);
        let mut s = ObservationStack::reset(a);
        for f in [b.clone(), c.clone(), d.clone()] {
            s.push_frame(f);
            assert_eq!(s.len(), 3);
        }
        assert_eq!(s.frames(), &[b, c, d]);
    }

    #[test]
    fn precedence_is_respected() {
        let mut img = LabelImage::default();
        img.paint(0, 0, Class::Pedestrian);
        img.paint(0, 0, Class::ForecastBox);
        assert_eq!(img.get(0, 0), Class::Pedestrian);
        img.paint(1, 0, Class::Goal);
        img.paint(1, 0, Class::Road);
        assert_eq!(img.get(1, 0), Class::Goal);
        img.paint(1, 0, Class::ForecastPath);
        assert_eq!(img.get(1, 0), Class::ForecastPath);
    }

    #[test]
    fn tensor_round_trip() {
        let mut s = ObservationStack::reset(solid(Class::Road));
        s.push_frame(solid(Class::Goal));
        let t = s.to_tensor();
        assert_eq!(t.len(), 3 * IMAGE_WIDTH * IMAGE_HEIGHT);
        assert_eq!(
            ObservationStack::from_tensor(IMAGE_WIDTH, IMAGE_HEIGHT, &t).unwrap(),
            s
        );
        assert!(ObservationStack::from_tensor(IMAGE_WIDTH, IMAGE_HEIGHT, &t[1..]).is_none());
    }

    #[test]
    fn png_is_paletted_and_decodable() {
        let mut img = LabelImage::default();
        img.set(3, 4, Class::ForecastPath);
        let mut buf = Vec::new();
        write_png(&img, &mut buf).unwrap();
        let dec = png::Decoder::new(std::io::Cursor::new(buf));
        let mut reader = dec.read_info().unwrap();
        assert_eq!(reader.info().color_type, png::ColorType::Indexed);
        let mut out = vec![0; reader.output_buffer_size().unwrap()];
        reader.next_frame(&mut out).unwrap();
        assert_eq!(&out[..IMAGE_WIDTH * IMAGE_HEIGHT], img.as_bytes());
    }
}
