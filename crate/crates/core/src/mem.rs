//! Working-set accounting for the smoothing engines.
//!
//! Engines take their scratch buffers from a [`Meter`], which records the
//! live byte count and its high-water mark. Inputs, spectra and emitted
//! results are never drawn from a meter, so the peak isolates the memory a
//! plan needs on top of its inputs and outputs.

use std::cell::Cell;
use std::mem::size_of;
use std::ops::{Deref, DerefMut};

/// Single-threaded byte counter. Each worker owns its own meter.
#[derive(Debug, Default)]
pub struct Meter {
    current: Cell<usize>,
    peak: Cell<usize>,
}

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current(&self) -> usize {
        self.current.get()
    }

    pub fn peak(&self) -> usize {
        self.peak.get()
    }

    /// A zero-filled scratch buffer of `len` elements charged to this meter.
    pub fn buffer<T: Clone + Default>(&self, len: usize) -> Tracked<'_, T> {
        let bytes = len * size_of::<T>();
        let now = self.current.get() + bytes;
        self.current.set(now);
        self.peak.set(self.peak.get().max(now));
        Tracked {
            data: vec![T::default(); len],
            meter: self,
            bytes,
        }
    }
}

/// A buffer whose size is released back to its [`Meter`] when dropped.
pub struct Tracked<'m, T> {
    data: Vec<T>,
    meter: &'m Meter,
    bytes: usize,
}

impl<T> Deref for Tracked<'_, T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.data
    }
}

impl<T> DerefMut for Tracked<'_, T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T> Drop for Tracked<'_, T> {
    fn drop(&mut self) {
        self.meter
            .current
            .set(self.meter.current.get() - self.bytes);
    }
}
