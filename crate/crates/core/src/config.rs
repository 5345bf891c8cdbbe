//! Run configuration shared by the library entry points and the command line.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::boundalg::DEFAULT_REWRITE_CAP;
use crate::repmod::{
    Caps, DEFAULT_END_CAP, DEFAULT_EXT_CAP, DEFAULT_HOM_CAP, DEFAULT_SUBMODULE_BUDGET,
};
use crate::scalars::DEFAULT_LAURENT_CAP;

pub const DEFAULT_DEGREE_BOUND: i64 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapsConfig {
    pub hom_dim: usize,
    pub ext_dim: usize,
    pub end_dim: usize,
    pub submodule_budget: usize,
    pub rewrite_paths: usize,
    pub degree_bound: i64,
    pub laurent_bound_cap: i64,
}

impl Default for CapsConfig {
    fn default() -> Self {
        CapsConfig {
            hom_dim: DEFAULT_HOM_CAP,
            ext_dim: DEFAULT_EXT_CAP,
            end_dim: DEFAULT_END_CAP,
            submodule_budget: DEFAULT_SUBMODULE_BUDGET,
            rewrite_paths: DEFAULT_REWRITE_CAP,
            degree_bound: DEFAULT_DEGREE_BOUND,
            laurent_bound_cap: DEFAULT_LAURENT_CAP,
        }
    }
}

impl CapsConfig {
    pub fn module_caps(&self) -> Caps {
        Caps {
            hom_dim: self.hom_dim,
            ext_dim: self.ext_dim,
            end_dim: self.end_dim,
            submodule_budget: self.submodule_budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub cache_dir: Option<PathBuf>,
    pub caps: CapsConfig,
    pub primes: Vec<u64>,
    /// 0 lets the worker pool pick.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cache_dir: None,
            caps: CapsConfig::default(),
            primes: vec![2, 3, 5],
            threads: 0,
        }
    }
}
