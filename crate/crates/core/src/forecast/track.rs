use std::collections::VecDeque;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::Space;
use crate::geometry::{Cylinder, ImageBox};
use crate::{Error, Real};

/// Samples kept per track.
pub const DEFAULT_HISTORY: usize = 8;

/// Centre-size box used by every forecaster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct BoxState<T: Real> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Real> BoxState<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn center(&self) -> Vector2<T> {
        Vector2::new(self.cx, self.cy)
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.cx, self.cy, self.w, self.h]
    }

    pub fn from_array([cx, cy, w, h]: [T; 4]) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn translated(&self, d: Vector2<T>) -> Self {
        Self {
            cx: self.cx + d.x,
            cy: self.cy + d.y,
            ..*self
        }
    }

    pub fn from_image_box(b: &ImageBox<T>) -> Self {
        let c = b.center();
        Self::new(c.x, c.y, b.w, b.h)
    }

    pub fn to_image_box(&self) -> ImageBox<T> {
        let half = T::lit(0.5);
        ImageBox::new(
            self.cx - self.w * half,
            self.cy - self.h * half,
            self.w,
            self.h,
        )
    }

    /// World-space state: ground centre, diameter, height.
    pub fn from_cylinder(c: &Cylinder<T>) -> Self {
        Self::new(c.center.x, c.center.y, c.radius * T::lit(2.0), c.height)
    }

    pub fn to_cylinder(&self) -> Option<Cylinder<T>> {
        Cylinder::new(self.center(), self.w * T::lit(0.5), self.h).ok()
    }
}

/// Bounded history of one object's observed boxes, all in the same space.
#[derive(Clone, Debug, PartialEq)]
pub struct Track<T: Real> {
    pub object_id: u32,
    pub space: Space,
    capacity: usize,
    entries: VecDeque<(u64, BoxState<T>)>,
}

impl<T: Real> Track<T> {
    pub fn new(object_id: u32, space: Space) -> Self {
        Self::with_capacity(object_id, space, DEFAULT_HISTORY)
    }

    pub fn with_capacity(object_id: u32, space: Space, capacity: usize) -> Self {
        let capacity = capacity.max(2);
        Self {
            object_id,
            space,
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    /// Appends a sample; steps must be strictly increasing.
    pub fn push(&mut self, step: u64, state: BoxState<T>) -> Result<(), Error> {
        if let Some(&(last, _)) = self.entries.back() {
            if step <= last {
                return Err(Error::NonMonotonicStep { last, got: step });
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((step, state));
        Ok(())
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn last(&self) -> Option<&(u64, BoxState<T>)> {
        self.entries.back()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &(u64, BoxState<T>)> + ExactSizeIterator {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_buffer_drops_oldest() {
        let mut t = Track::<f64>::with_capacity(1, Space::World, 3);
        for s in 0..5 {
            t.push(s, BoxState::new(s as f64, 0.0, 1.0, 1.0)).unwrap();
        }
        assert_eq!(t.len(), 3);
        assert_eq!(t.iter().next().unwrap().0, 2);
    }

    #[test]
    fn steps_must_increase() {
        let mut t = Track::<f64>::new(1, Space::Image);
        t.push(4, BoxState::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(matches!(
            t.push(4, BoxState::new(0.0, 0.0, 1.0, 1.0)),
            Err(Error::NonMonotonicStep { .. })
        ));
    }

    #[test]
    fn image_box_conversion() {
        let b = ImageBox::new(10.0, 20.0, 4.0, 6.0);
        let s = BoxState::from_image_box(&b);
        assert_eq!((s.cx, s.cy), (12.0, 23.0));
        assert_eq!(s.to_image_box(), b);
    }
}
