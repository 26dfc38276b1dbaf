use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Win probability of one game after each ply; `p_win[0]` is the start.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub game_id: u64,
    pub p_win: Vec<f64>,
}

impl Trajectory {
    pub fn is_terminal(&self) -> bool {
        matches!(self.p_win.last(), Some(&p) if p == 0.0 || p == 1.0)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    game_id: u64,
    ply: usize,
    p_win: f64,
}

pub fn write_trajectories<W: Write>(out: W, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trajectories {
        for (ply, &p_win) in t.p_win.iter().enumerate() {
            w.serialize(Row {
                game_id: t.game_id,
                ply,
                p_win,
            })
            .map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of a game must be contiguous with plies counting up from zero.
pub fn read_trajectories<R: Read>(input: R) -> Result<Vec<Trajectory>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["game_id", "ply", "p_win"] {
        return Err(Error::Format(format!("expected header game_id,ply,p_win, got {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out: Vec<Trajectory> = Vec::new();
    for (line, row) in r.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Format(e.to_string()))?;
        if !(0.0..=1.0).contains(&row.p_win) {
            return Err(Error::Format(format!("row {}: p_win {} outside [0, 1]", line + 2, row.p_win)));
        }
        match out.last_mut() {
            Some(t) if t.game_id == row.game_id => {
                if row.ply != t.p_win.len() {
                    return Err(Error::Format(format!("row {}: ply {} out of sequence", line + 2, row.ply)));
                }
                t.p_win.push(row.p_win);
            }
            _ => {
                if row.ply != 0 {
                    return Err(Error::Format(format!("row {}: game {} does not start at ply 0", line + 2, row.game_id)));
                }
                if out.iter().any(|t| t.game_id == row.game_id) {
                    return Err(Error::Format(format!("row {}: game {} is not contiguous", line + 2, row.game_id)));
                }
                out.push(Trajectory {
                    game_id: row.game_id,
                    p_win: vec![row.p_win],
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("trajectory file"));
    }
    Ok(out)
}
