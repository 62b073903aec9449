//! Surveillance grid world: a defender steers a vehicle on an M×N grid
//! toward target cells while an attacker degrades motion precision.
//!
//! Cell (x, y) is state x + M·y. The defender picks a direction R, L, U, D;
//! the adversary picks A (attack) or NA. The intended neighbor is reached
//! with probability `p_nominal` under NA and `p_attack` under A, and the
//! residual mass spreads uniformly over staying put and the remaining
//! neighbors, with divisor |N| (the residual set swaps the intended
//! neighbor for the current cell, so it has exactly |N| elements). A move
//! pointing off the grid keeps the vehicle in place with probability 1.
//! Cells are labeled `tar`, `obs`, or `free`.

use crate::model::{ModelError, StochasticGame};
use thiserror::Error;

/// Defender directions in index order.
pub const GRID_DEF_ACTIONS: [&str; 4] = ["R", "L", "U", "D"];
/// Adversary actions in index order: attack, no attack.
pub const GRID_ADV_ACTIONS: [&str; 2] = ["A", "NA"];
/// Cell labels in index order.
pub const GRID_PROPS: [&str; 3] = ["tar", "obs", "free"];

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid must have positive width and height, got {width}×{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("{what} cell ({x}, {y}) is outside the {width}×{height} grid")]
    CellOutOfBounds {
        what: &'static str,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("cell ({x}, {y}) is declared both target and obstacle")]
    CellConflict { x: usize, y: usize },
    #[error(
        "probabilities must satisfy 0 < p_attack ≤ p_nominal ≤ 1, \
         got p_nominal = {p_nominal}, p_attack = {p_attack}"
    )]
    BadProbabilities { p_nominal: f64, p_attack: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Layout and motion parameters of a grid world.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub targets: Vec<(usize, usize)>,
    pub obstacles: Vec<(usize, usize)>,
    pub p_nominal: f64,
    pub p_attack: f64,
}

impl GridSpec {
    /// Empty grid with the default motion parameters 0.8 / 0.6.
    pub fn new(width: usize, height: usize) -> GridSpec {
        GridSpec {
            width,
            height,
            targets: Vec::new(),
            obstacles: Vec::new(),
            p_nominal: 0.8,
            p_attack: 0.6,
        }
    }

    pub fn with_target(mut self, x: usize, y: usize) -> GridSpec {
        self.targets.push((x, y));
        self
    }

    pub fn with_obstacle(mut self, x: usize, y: usize) -> GridSpec {
        self.obstacles.push((x, y));
        self
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x + self.width * y
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i % self.width, i / self.width)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.width == 0 || self.height == 0 {
            return Err(GridError::EmptyGrid {
                width: self.width,
                height: self.height,
            });
        }
        if !(self.p_attack > 0.0 && self.p_attack <= self.p_nominal && self.p_nominal <= 1.0) {
            return Err(GridError::BadProbabilities {
                p_nominal: self.p_nominal,
                p_attack: self.p_attack,
            });
        }
        for (what, cells) in [("target", &self.targets), ("obstacle", &self.obstacles)] {
            for &(x, y) in cells {
                if x >= self.width || y >= self.height {
                    return Err(GridError::CellOutOfBounds {
                        what,
                        x,
                        y,
                        width: self.width,
                        height: self.height,
                    });
                }
            }
        }
        for &(x, y) in &self.targets {
            if self.obstacles.contains(&(x, y)) {
                return Err(GridError::CellConflict { x, y });
            }
        }
        Ok(())
    }

    /// In-grid 4-neighbors of (x, y) in index order.
    fn neighbors(&self, x: usize, y: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(4);
        if y > 0 {
            out.push(self.index(x, y - 1));
        }
        if x > 0 {
            out.push(self.index(x - 1, y));
        }
        if x + 1 < self.width {
            out.push(self.index(x + 1, y));
        }
        if y + 1 < self.height {
            out.push(self.index(x, y + 1));
        }
        out
    }

    /// Cell the direction points at, or `None` when it leaves the grid.
    fn intended(&self, x: usize, y: usize, dir: usize) -> Option<usize> {
        match dir {
            0 if x + 1 < self.width => Some(self.index(x + 1, y)),
            1 if x > 0 => Some(self.index(x - 1, y)),
            2 if y + 1 < self.height => Some(self.index(x, y + 1)),
            3 if y > 0 => Some(self.index(x, y - 1)),
            _ => None,
        }
    }
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Build the stochastic game for a grid layout.
pub fn build_grid(spec: &GridSpec) -> Result<StochasticGame, GridError> {
    spec.validate()?;
    let n = spec.n_cells();
    let mut labels = vec![2usize; n];
    for &(x, y) in &spec.targets {
        labels[spec.index(x, y)] = 0;
    }
    for &(x, y) in &spec.obstacles {
        labels[spec.index(x, y)] = 1;
    }

    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for y in 0..spec.height {
        for x in 0..spec.width {
            let i = spec.index(x, y);
            let neighborhood = spec.neighbors(x, y);
            for dir in 0..GRID_DEF_ACTIONS.len() {
                let intended = spec.intended(x, y, dir);
                for (ua, &p) in [spec.p_attack, spec.p_nominal].iter().enumerate() {
                    match intended {
                        None => entries.push((i, dir, ua, i, 1.0)),
                        Some(next) => {
                            entries.push((i, dir, ua, next, p));
                            let share = (1.0 - p) / neighborhood.len() as f64;
                            entries.push((i, dir, ua, i, share));
                            for &other in &neighborhood {
                                if other != next {
                                    entries.push((i, dir, ua, other, share));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(StochasticGame::from_entries(
        names(&GRID_DEF_ACTIONS),
        names(&GRID_ADV_ACTIONS),
        names(&GRID_PROPS),
        labels,
        &entries,
    )?)
}

/// The 10×10 demonstration layout: one target on the right edge at (9, 5)
/// and two isolated obstacles at (3, 3) and (6, 2), with the default
/// motion parameters.
pub fn demo_ten_by_ten() -> GridSpec {
    GridSpec::new(10, 10)
        .with_target(9, 5)
        .with_obstacle(3, 3)
        .with_obstacle(6, 2)
}
