use std::cell::Cell;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{Access, BlackBox, Probe, Response};
use crate::scalar::Real;

/// Stateful adversarial test double: the first query returns a uniform
/// label, every later query repeats the previous label whatever the input.
///
/// Fools the plain measuring-twice protocol into reporting sharpness 1 but
/// also forces agreement on independent inputs, which the coin-routed
/// protocol detects.
#[derive(Debug)]
pub struct RepeatLast {
    dim: usize,
    last: Cell<Option<usize>>,
}

impl RepeatLast {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            last: Cell::new(None),
        }
    }

    pub fn reset(&self) {
        self.last.set(None);
    }
}

impl<T: Real> BlackBox<T> for RepeatLast {
    fn dim(&self) -> usize {
        self.dim
    }

    fn access(&self) -> Access {
        Access::WithPostState
    }

    fn probe<R: Rng + ?Sized>(&self, input: &Probe<T>, rng: &mut R) -> Result<Response<T>> {
        if self.dim == 0 {
            return Err(Error::InvalidDimension("dimension must be at least 1".into()));
        }
        let index = self.last.get().unwrap_or_else(|| rng.gen_range(0..self.dim));
        self.last.set(Some(index));
        Ok(Response {
            index,
            post: Some(input.clone()),
        })
    }
}
