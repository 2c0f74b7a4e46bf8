//! JSON form of a design. Only pool member lists are stored; the incidence index
//! is rebuilt on load.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::params::{DerivedParams, DesignParams};
use super::pooling::PoolingDesign;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompartmentBounds {
    pub items: Vec<usize>,
    pub pools: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub params: DesignParams,
    pub derived: DerivedParams,
    pub compartment_bounds: CompartmentBounds,
    pub pools: Vec<Vec<u32>>,
}

impl DesignFile {
    pub fn new(params: &DesignParams, derived: &DerivedParams, design: &PoolingDesign) -> Self {
        Self {
            params: params.clone(),
            derived: *derived,
            compartment_bounds: CompartmentBounds {
                items: design.item_bounds().to_vec(),
                pools: design.pool_bounds().to_vec(),
            },
            pools: design.pool_lists(),
        }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    /// Rebuild the design, checking it against the recorded parameters.
    pub fn into_design(self) -> Result<(DesignParams, DerivedParams, PoolingDesign)> {
        let d = self.derived;
        let bounds = &self.compartment_bounds;
        if bounds.items.len() != d.compartments() + 1 {
            return Err(Error::InvalidDesign(format!(
                "{} item bounds for {} compartments",
                bounds.items.len(),
                d.compartments()
            )));
        }
        if self.pools.len() != d.m || self.pools.iter().any(|p| p.len() != d.gamma) {
            return Err(Error::InvalidDesign(format!(
                "expected {} pools of size {}",
                d.m, d.gamma
            )));
        }
        let design = PoolingDesign::from_parts(
            d.s,
            bounds.items.clone(),
            bounds.pools.clone(),
            &self.pools,
            Some(d.slots_per_source()),
        )?;
        if design.n_bulk() != self.params.n {
            return Err(Error::InvalidDesign(format!(
                "design holds {} bulk items, parameters say {}",
                design.n_bulk(),
                self.params.n
            )));
        }
        Ok((self.params, d, design))
    }
}
