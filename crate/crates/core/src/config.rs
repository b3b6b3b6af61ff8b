//! Run configuration shared by the command-line tool and embedders.

use crate::curves::{dyadic_grid, validate_grid, DEFAULT_MAX_LEAVES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    /// `i / 2^N` for `i = 0..=2^N`
    Dyadic(u32),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let g = match self {
            GridSpec::Explicit(g) => g.clone(),
            GridSpec::Dyadic(n) if *n <= 20 => dyadic_grid(*n),
            GridSpec::Dyadic(n) => return Err(Error::input(format!("dyadic level {n} is too fine"))),
        };
        validate_grid(&g)?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub p: f64,
    pub tol_equiv: f64,
    pub tol_check: f64,
    pub grid: GridSpec,
    pub format: OutputFormat,
    /// Largest admissible level of a product tree.
    pub max_leaves: usize,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p: 2.0,
            tol_equiv: 0.0,
            tol_check: 1e-9,
            grid: GridSpec::Dyadic(2),
            format: OutputFormat::Json,
            max_leaves: DEFAULT_MAX_LEAVES,
            threads: None,
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::input(format!("p must be at least 1, got {}", self.p)));
        }
        if !(self.tol_equiv >= 0.0) || !(self.tol_check >= 0.0) {
            return Err(Error::input("tolerances must be nonnegative"));
        }
        if self.max_leaves == 0 {
            return Err(Error::input("max_leaves must be positive"));
        }
        self.grid.points()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = Config::default();
        c.validate().unwrap();
        assert_eq!(c.grid.points().unwrap().len(), 5);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            Config { p: 0.5, ..Config::default() },
            Config { tol_check: -1.0, ..Config::default() },
            Config { grid: GridSpec::Explicit(vec![0.0, 0.6, 0.4, 1.0]), ..Config::default() },
            Config { max_leaves: 0, ..Config::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
