use crate::error::{Error, Result};

/// Resource caps shared by every cap-bounded operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest `k` for which the `(2k-1)!!` pairings of `{1, ..., 2k}` are enumerated.
    pub max_pairing_k: usize,
    /// Largest `n^m` allowed for a dense tensor.
    pub max_dense_entries: usize,
    /// Largest `k` for which a full Gram matrix (or its row profile) is built.
    pub max_gram_k: usize,
    /// Largest `k` for which the exact `m = 2k` moment system is solved.
    pub max_solve_k: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_pairing_k: 8,
            max_dense_entries: 10_000_000,
            max_gram_k: 6,
            max_solve_k: 4,
        }
    }
}

impl Limits {
    pub(crate) fn check_pairing_k(&self, k: usize) -> Result<()> {
        if k > self.max_pairing_k {
            return Err(Error::SizeLimit(format!(
                "pairing enumeration for k = {k} exceeds the cap k <= {}",
                self.max_pairing_k
            )));
        }
        Ok(())
    }

    pub(crate) fn check_gram_k(&self, k: usize) -> Result<()> {
        self.check_pairing_k(k)?;
        if k > self.max_gram_k {
            return Err(Error::SizeLimit(format!(
                "Gram matrix for k = {k} exceeds the cap k <= {}",
                self.max_gram_k
            )));
        }
        Ok(())
    }

    pub(crate) fn check_solve_k(&self, k: usize) -> Result<()> {
        self.check_pairing_k(k)?;
        if k > self.max_solve_k {
            return Err(Error::SizeLimit(format!(
                "exact moment system for m = {} exceeds the cap m <= {}",
                2 * k,
                2 * self.max_solve_k
            )));
        }
        Ok(())
    }

    /// Returns `n^m` if it fits under the dense-entry cap.
    pub(crate) fn dense_len(&self, n: usize, m: usize) -> Result<usize> {
        let exceeded = || {
            Error::SizeLimit(format!(
                "dense tensor with n = {n}, m = {m} exceeds the cap of {} entries",
                self.max_dense_entries
            ))
        };
        let m32 = u32::try_from(m).map_err(|_| exceeded())?;
        let len = n.checked_pow(m32).ok_or_else(exceeded)?;
        if len > self.max_dense_entries {
            return Err(exceeded());
        }
        Ok(len)
    }
}
