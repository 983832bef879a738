//! JSON game descriptions (quadratic costs, affine local maps).

use dpnash_core::game::{AffineMap, GameSpec, Player, QuadraticAggCost};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: Vec<PlayerFile>,
    /// Strong monotonicity constant; derived when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerFile {
    pub cost: CostFile,
    #[serde(default)]
    pub phi: PhiFile,
    pub lo: f64,
    pub hi: f64,
}

/// `J(q, s) = q (a s + b1) + p0 (kappa (1 - q/b2)^2 + intercept)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFile {
    pub a: f64,
    pub b1: f64,
    pub p0: f64,
    pub kappa: f64,
    pub b2: f64,
    #[serde(default)]
    pub intercept: f64,
}

/// `phi(q) = c q + d`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiFile {
    pub c: f64,
    pub d: f64,
}

impl Default for PhiFile {
    fn default() -> Self {
        Self { c: 1.0, d: 0.0 }
    }
}

impl GameFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::json(origin, e))
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn to_spec(&self) -> Result<GameSpec> {
        let players = self
            .players
            .iter()
            .map(|p| {
                let c = p.cost;
                let cost = QuadraticAggCost::new(c.a, c.b1, c.p0, c.kappa, c.b2, c.intercept)?;
                Ok(Player::quadratic(
                    cost,
                    AffineMap::new(p.phi.c, p.phi.d),
                    p.lo,
                    p.hi,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GameSpec::new(players, self.monotonicity)?)
    }
}
