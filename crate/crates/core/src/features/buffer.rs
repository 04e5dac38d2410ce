use std::collections::VecDeque;

use rustfft::num_complex::Complex64;

use super::spatial::SpatialFeatures;
use crate::error::{Error, Result};

/// What one frame contributes: the slow-time samples at the track's range
/// bin and the footprint features of its RA patch.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEntry {
    pub series: Vec<Complex64>,
    pub spatial: SpatialFeatures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub frame: u64,
    /// True when the track had no detection in this frame.
    pub missing: bool,
    pub entry: Option<FrameEntry>,
}

/// Sliding window of the last `capacity` frames of one track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackBuffer {
    pub track_id: u64,
    pub capacity: usize,
    slots: VecDeque<Slot>,
}

impl TrackBuffer {
    pub fn new(track_id: u64, capacity: usize) -> Self {
        Self {
            track_id,
            capacity: capacity.max(1),
            slots: VecDeque::with_capacity(capacity),
        }
    }

    /// Appends a frame (`None` for a missed detection), dropping the oldest
    /// once full.
    pub fn push(&mut self, frame: u64, entry: Option<FrameEntry>) -> Result<()> {
        if let Some(last) = self.slots.back() {
            if frame <= last.frame {
                return Err(Error::Misaligned(format!("frame {frame} after {}", last.frame)));
            }
        }
        if let (Some(e), Some(len)) = (&entry, self.series_len()) {
            if e.series.len() != len {
                return Err(Error::Misaligned(format!("series of {} samples, expected {len}", e.series.len())));
            }
        }
        self.slots.push_back(Slot {
            frame,
            missing: entry.is_none(),
            entry,
        });
        while self.slots.len() > self.capacity {
            self.slots.pop_front();
        }
        Ok(())
    }

    fn series_len(&self) -> Option<usize> {
        self.slots.iter().find_map(|s| s.entry.as_ref().map(|e| e.series.len()))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    pub fn slots(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.slots.iter().map(|s| s.missing).collect()
    }

    pub fn frame_span(&self) -> Option<(u64, u64)> {
        Some((self.slots.front()?.frame, self.slots.back()?.frame))
    }

    /// Replaces missing frames by the elementwise mean of the present ones.
    /// The mask is kept.
    pub fn fill_missing(&self) -> Result<TrackBuffer> {
        let present: Vec<&FrameEntry> = self.slots.iter().filter_map(|s| s.entry.as_ref()).collect();
        if present.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        if present.len() == self.slots.len() {
            return Ok(self.clone());
        }
        let n = present.len() as f64;
        let len = present[0].series.len();
        let mut series = vec![Complex64::default(); len];
        for e in &present {
            for (a, v) in series.iter_mut().zip(&e.series) {
                *a += v;
            }
        }
        series.iter_mut().for_each(|a| *a /= n);
        let spatial = super::spatial::average_spatial(present.iter().map(|e| &e.spatial));
        let fill = FrameEntry { series, spatial };
        let mut out = self.clone();
        for s in out.slots.iter_mut().filter(|s| s.entry.is_none()) {
            s.entry = Some(fill.clone());
        }
        Ok(out)
    }

    /// Present-or-filled series of every slot, concatenated in time order.
    pub fn concatenated(&self) -> Vec<Complex64> {
        self.slots
            .iter()
            .filter_map(|s| s.entry.as_ref())
            .flat_map(|e| e.series.iter().copied())
            .collect()
    }
}
