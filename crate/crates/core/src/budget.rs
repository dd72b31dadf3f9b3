//! Evaluation caps for the exhaustive oracles.
//!
//! Costs are counted in points visited: `q^4` for a single anisotropy scan,
//! `q^3 * q^4` for a sweep over every triple, and `q^8` for the nominal
//! generator space of a morphism scan.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Anisotropy scan of one algebra (`q^4` points).
    pub per_algebra: u128,
    /// Sweep over all `q^3` triples (`q^7` points).
    pub sweep: u128,
    /// Brute-force morphism enumeration (`q^8` nominal candidates).
    pub morphisms: u128,
}

impl Default for Budget {
    /// Admits single scans up to `q = 13`, sweeps up to `q = 9` and
    /// morphism scans up to `q = 7`.
    fn default() -> Self {
        Budget {
            per_algebra: 13u128.pow(4),
            sweep: 9u128.pow(7),
            morphisms: 7u128.pow(8),
        }
    }
}

impl Budget {
    /// The same cap for every kind of scan.
    pub fn uniform(points: u128) -> Self {
        Budget {
            per_algebra: points,
            sweep: points,
            morphisms: points,
        }
    }

    pub fn unlimited() -> Self {
        Budget::uniform(u128::MAX)
    }

    pub fn check_algebra(&self, q: u64) -> Result<()> {
        check("anisotropy scan", u128::from(q).pow(4), self.per_algebra)
    }

    pub fn check_sweep(&self, q: u64) -> Result<()> {
        check("admissibility sweep", u128::from(q).pow(7), self.sweep)
    }

    pub fn check_morphisms(&self, q: u64) -> Result<()> {
        check("morphism scan", u128::from(q).pow(8), self.morphisms)
    }
}

fn check(what: &'static str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded {
            what,
            needed,
            budget,
        })
    } else {
        Ok(())
    }
}
