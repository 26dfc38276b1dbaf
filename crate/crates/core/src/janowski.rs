//! Janowski cube-life indexes implied by the linear jump model.
//!
//! Janowski's refined model mixes dead and live cube equities with weight
//! `x` per player; its take point depends only on `x1` and its cash point
//! only on `x2`. Matching those to the jump model's take and cash points at
//! constant volatility gives closed forms for both indexes.

use serde::Serialize;

use crate::params::WinLossParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpliedIndexes {
    /// Governs the take point.
    pub x1: f64,
    /// Governs the cash point.
    pub x2: f64,
}

pub fn implied_indexes(wl: WinLossParams, alpha: f64) -> ImpliedIndexes {
    let (w, l) = (wl.w(), wl.l());
    let s2 = wl.live_slope().powi(2);
    ImpliedIndexes {
        x1: 1.0 - alpha * s2 / (2.0 * (l + 1.0) * (w - 0.5)),
        x2: 1.0 - alpha * s2 / (2.0 * (w + 1.0) * (l - 0.5)),
    }
}

/// Rounds half away from zero to `decimals` places, tolerating the binary
/// representation error of values that sit exactly on a half.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let y = x * scale;
    (y + 1e-9f64.copysign(y)).round() / scale
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexTable {
    pub alpha: f64,
    pub w_values: Vec<f64>,
    pub l_values: Vec<f64>,
    /// `raw[row][col]` for `l_values[row]`, `w_values[col]`.
    pub raw: Vec<Vec<ImpliedIndexes>>,
}

impl IndexTable {
    pub fn rounded(&self, decimals: i32) -> Vec<Vec<ImpliedIndexes>> {
        self.raw
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| ImpliedIndexes {
                        x1: round_half_up(x.x1, decimals),
                        x2: round_half_up(x.x2, decimals),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,w,x1,x2\n");
        for (row, &l) in self.raw.iter().zip(&self.l_values) {
            for (x, &w) in row.iter().zip(&self.w_values) {
                out.push_str(&format!("{l},{w},{},{}\n", x.x1, x.x2));
            }
        }
        out
    }

    /// Aligned `x1/x2` grid with two decimals, rows by `L`, columns by `W`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>6}", "L\\W");
        for w in &self.w_values {
            out.push_str(&format!("{w:>11}"));
        }
        out.push('\n');
        for (row, &l) in self.rounded(2).iter().zip(&self.l_values) {
            out.push_str(&format!("{l:>6}"));
            for x in row {
                out.push_str(&format!("{:>11}", format!("{:.2}/{:.2}", x.x1, x.x2)));
            }
            out.push('\n');
        }
        out
    }
}

pub fn implied_index_table(w_values: &[f64], l_values: &[f64], alpha: f64) -> crate::Result<IndexTable> {
    if w_values.is_empty() || l_values.is_empty() {
        return Err(crate::Error::Empty("table grid"));
    }
    let raw = l_values
        .iter()
        .map(|&l| {
            w_values
                .iter()
                .map(|&w| WinLossParams::new(w, l).map(|wl| implied_indexes(wl, alpha)))
                .collect::<crate::Result<Vec<_>>>()
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(IndexTable {
        alpha,
        w_values: w_values.to_vec(),
        l_values: l_values.to_vec(),
        raw,
    })
}
