use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(n, k, r)`: `n` ideals, any `k` of which must share no `r`-th prime power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub k: u32,
    pub r: u32,
}

impl Params {
    pub fn new(n: u32, k: u32, r: u32) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::invalid(format!(
                "need n >= k >= 2, got n = {n}, k = {k}"
            )));
        }
        if r < 1 {
            return Err(Error::invalid("r must be at least 1"));
        }
        Ok(Params { n, k, r })
    }

    /// Pairwise coprimality of `n` ideals.
    pub fn pairwise(n: u32) -> Result<Self> {
        Params::new(n, 2, 1)
    }
}
