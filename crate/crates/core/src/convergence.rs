//! Observed orders of convergence over a refinement ladder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residuals at or below this are treated as exact zeros.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderStatus {
    Converging,
    /// Every residual is at round-off level; the order is undefined.
    Exact,
    /// Some residual failed to decrease under refinement.
    NonDecreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub name: String,
    pub h: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `ln(e_i / e_{i+1}) / ln(h_i / h_{i+1})` for each successive pair.
    pub orders: Vec<f64>,
    pub status: OrderStatus,
}

impl OrderRow {
    /// The smallest successive estimate; `None` when the order is undefined.
    pub fn order(&self) -> Option<f64> {
        match self.status {
            OrderStatus::Exact => None,
            _ => Some(self.orders.iter().copied().fold(f64::INFINITY, f64::min)),
        }
    }

    /// Passes when exact, or converging with every successive estimate at least `p`.
    pub fn meets(&self, p: f64) -> bool {
        match self.status {
            OrderStatus::Exact => true,
            OrderStatus::NonDecreasing => false,
            OrderStatus::Converging => self.orders.iter().all(|o| *o >= p),
        }
    }
}

/// Validates a refinement ladder: at least three strictly increasing sizes.
pub fn check_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "refinement ladder needs at least 3 sizes, got {}",
            ladder.len()
        )));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "refinement ladder {ladder:?} is not strictly increasing"
        )));
    }
    Ok(())
}

/// Observed orders from residuals `e` at spacings `h` (coarse to fine).
pub fn observed_orders(name: impl Into<String>, h: &[f64], e: &[f64]) -> Result<OrderRow> {
    let name = name.into();
    if h.len() != e.len() || h.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "{name}: need at least 3 (h, residual) pairs, got {} and {}",
            h.len(),
            e.len()
        )));
    }
    if h.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(format!("{name}: spacings must decrease")));
    }
    let orders: Vec<f64> = h
        .windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    let status = if e.iter().all(|r| r.abs() <= EXACT_FLOOR) {
        OrderStatus::Exact
    } else if e.windows(2).any(|w| !(w[1] < w[0])) {
        log::warn!("{name}: residuals {e:?} do not decrease under refinement");
        OrderStatus::NonDecreasing
    } else {
        OrderStatus::Converging
    };
    Ok(OrderRow {
        name,
        h: h.to_vec(),
        residuals: e.to_vec(),
        orders,
        status,
    })
}

/// Plain-text table, one row per check.
pub fn table(rows: &[OrderRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let res: Vec<String> = r.residuals.iter().map(|e| format!("{e:.3e}")).collect();
        let ord = match r.status {
            OrderStatus::Exact => "exact".to_owned(),
            _ => r.orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" "),
        };
        let flag = if r.status == OrderStatus::NonDecreasing {
            "  non-decreasing"
        } else {
            ""
        };
        s.push_str(&format!("{:<28} {}  p = {ord}{flag}\n", r.name, res.join(" ")));
    }
    s
}
