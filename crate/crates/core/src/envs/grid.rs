use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;

use super::mdp::TabularMdp;
use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

/// Grid moves, in the action order used by every gridworld here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Up = 0,
    Right = 1,
    Down = 2,
    Left = 3,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Right, Move::Down, Move::Left];
}

/// A blocked passage between two orthogonally adjacent cells, stored with
/// the smaller cell first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WallEdge(Cell, Cell);

impl WallEdge {
    pub fn between(a: Cell, b: Cell) -> Self {
        if a <= b {
            WallEdge(a, b)
        } else {
            WallEdge(b, a)
        }
    }

    pub fn cells(&self) -> (Cell, Cell) {
        (self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWorldSpec {
    pub width: usize,
    pub height: usize,
    pub start_cell: Cell,
    pub goal_cell: Cell,
    pub cliff_cells: BTreeSet<Cell>,
    pub wall_edges: BTreeSet<WallEdge>,
    pub step_reward: f64,
    pub cliff_reward: f64,
    /// Reward for the move that enters the goal.
    pub goal_reward: f64,
    pub horizon: usize,
}

impl GridWorldSpec {
    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn state_of(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_of(&self, state: usize) -> Cell {
        Cell::new(state / self.width, state % self.width)
    }

    pub fn start_state(&self) -> usize {
        self.state_of(self.start_cell)
    }

    pub fn goal_state(&self) -> usize {
        self.state_of(self.goal_cell)
    }

    fn contains(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid dimensions must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        for (name, c) in [("start", self.start_cell), ("goal", self.goal_cell)] {
            if !self.contains(c) {
                return Err(Error::invalid(format!("{name} cell {c:?} outside the grid")));
            }
            if self.cliff_cells.contains(&c) {
                return Err(Error::invalid(format!("{name} cell {c:?} lies on the cliff")));
            }
        }
        Ok(())
    }

    /// Cell reached by `mv` from `from`, ignoring the cliff. Moves off the
    /// grid or through a wall leave the agent in place.
    pub fn target(&self, from: Cell, mv: Move) -> Cell {
        let to = match mv {
            Move::Up if from.row > 0 => Cell::new(from.row - 1, from.col),
            Move::Right if from.col + 1 < self.width => Cell::new(from.row, from.col + 1),
            Move::Down if from.row + 1 < self.height => Cell::new(from.row + 1, from.col),
            Move::Left if from.col > 0 => Cell::new(from.row, from.col - 1),
            _ => from,
        };
        if to != from && self.wall_edges.contains(&WallEdge::between(from, to)) {
            from
        } else {
            to
        }
    }

    /// Deterministic MDP: goal and cliff cells are terminal.
    pub fn to_mdp(&self, gamma: f64) -> Result<TabularMdp> {
        self.validate()?;
        let n = self.n_cells();
        let mut transition = Vec::with_capacity(n);
        let mut reward = Vec::with_capacity(n);
        let mut terminal = vec![false; n];
        for (s, term) in terminal.iter_mut().enumerate() {
            let cell = self.cell_of(s);
            *term = cell == self.goal_cell || self.cliff_cells.contains(&cell);
            let mut rows = Vec::with_capacity(4);
            let mut rewards = Vec::with_capacity(4);
            for mv in Move::ALL {
                let to = self.target(cell, mv);
                let mut row = vec![0.0; n];
                row[self.state_of(to)] = 1.0;
                rows.push(row);
                rewards.push(if to == self.goal_cell {
                    self.goal_reward
                } else if self.cliff_cells.contains(&to) {
                    self.cliff_reward
                } else {
                    self.step_reward
                });
            }
            transition.push(rows);
            reward.push(rewards);
        }
        let r_max = [self.step_reward, self.cliff_reward, self.goal_reward]
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()))
            .max(f64::MIN_POSITIVE);
        TabularMdp::new(transition, reward, gamma, r_max, terminal)
    }

    /// Breadth-first shortest path length (in moves) from start to goal,
    /// never entering the cliff. `None` when the goal is unreachable.
    pub fn shortest_path_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n_cells()];
        let mut queue = VecDeque::new();
        dist[self.start_state()] = 0;
        queue.push_back(self.start_cell);
        while let Some(c) = queue.pop_front() {
            if c == self.goal_cell {
                return Some(dist[self.state_of(c)]);
            }
            for mv in Move::ALL {
                let to = self.target(c, mv);
                if self.cliff_cells.contains(&to) {
                    continue;
                }
                let (si, ti) = (self.state_of(c), self.state_of(to));
                if dist[ti] == usize::MAX {
                    dist[ti] = dist[si] + 1;
                    queue.push_back(to);
                }
            }
        }
        None
    }
}

pub const CLIFF_WIDTH: usize = 12;
pub const CLIFF_HEIGHT: usize = 4;
pub const CLIFF_HORIZON: usize = 100;
pub const DEFAULT_GAMMA: f64 = 0.99;

/// The 4x12 cliff walk: start bottom-left, goal bottom-right, cliff along
/// the bottom row between them. Each move costs -1, entering the cliff
/// costs -100 and ends the episode.
pub fn cliff_walking_env() -> (TabularMdp, GridWorldSpec) {
    let bottom = CLIFF_HEIGHT - 1;
    let spec = GridWorldSpec {
        width: CLIFF_WIDTH,
        height: CLIFF_HEIGHT,
        start_cell: Cell::new(bottom, 0),
        goal_cell: Cell::new(bottom, CLIFF_WIDTH - 1),
        cliff_cells: (1..CLIFF_WIDTH - 1).map(|c| Cell::new(bottom, c)).collect(),
        wall_edges: BTreeSet::new(),
        step_reward: -1.0,
        cliff_reward: -100.0,
        goal_reward: -1.0,
        horizon: CLIFF_HORIZON,
    };
    let mdp = spec.to_mdp(DEFAULT_GAMMA).expect("cliff layout is valid");
    (mdp, spec)
}

pub const MAZE_HORIZON: usize = 4000;

/// Perfect maze carved by a seeded recursive backtracker. Start top-left,
/// goal bottom-right; +1 for reaching the goal and `-0.1 / cells` for
/// every other move.
pub fn random_maze_env(seed: u64, width: usize, height: usize) -> Result<(TabularMdp, GridWorldSpec)> {
    random_maze_env_with_horizon(seed, width, height, MAZE_HORIZON)
}

pub fn random_maze_env_with_horizon(
    seed: u64,
    width: usize,
    height: usize,
    horizon: usize,
) -> Result<(TabularMdp, GridWorldSpec)> {
    if width < 2 || height < 2 {
        return Err(Error::invalid(format!(
            "maze must be at least 2x2, got {width}x{height}"
        )));
    }
    let spec = GridWorldSpec {
        width,
        height,
        start_cell: Cell::new(0, 0),
        goal_cell: Cell::new(height - 1, width - 1),
        cliff_cells: BTreeSet::new(),
        wall_edges: carve_maze(seed, width, height),
        step_reward: -0.1 / (width * height) as f64,
        cliff_reward: 0.0,
        goal_reward: 1.0,
        horizon,
    };
    let mdp = spec.to_mdp(DEFAULT_GAMMA)?;
    Ok((mdp, spec))
}

/// Returns the walls left standing after an iterative depth-first carve.
fn carve_maze(seed: u64, width: usize, height: usize) -> BTreeSet<WallEdge> {
    let mut walls = BTreeSet::new();
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                walls.insert(WallEdge::between(Cell::new(r, c), Cell::new(r, c + 1)));
            }
            if r + 1 < height {
                walls.insert(WallEdge::between(Cell::new(r, c), Cell::new(r + 1, c)));
            }
        }
    }

    let mut rng = stream_rng(seed, Stream::Generate);
    let mut visited = vec![false; width * height];
    let mut stack = vec![Cell::new(0, 0)];
    visited[0] = true;
    while let Some(&cur) = stack.last() {
        let mut neighbours = Vec::with_capacity(4);
        if cur.row > 0 {
            neighbours.push(Cell::new(cur.row - 1, cur.col));
        }
        if cur.col + 1 < width {
            neighbours.push(Cell::new(cur.row, cur.col + 1));
        }
        if cur.row + 1 < height {
            neighbours.push(Cell::new(cur.row + 1, cur.col));
        }
        if cur.col > 0 {
            neighbours.push(Cell::new(cur.row, cur.col - 1));
        }
        neighbours.retain(|n| !visited[n.row * width + n.col]);
        match neighbours.choose(&mut rng) {
            Some(&next) => {
                walls.remove(&WallEdge::between(cur, next));
                visited[next.row * width + next.col] = true;
                stack.push(next);
            }
            None => {
                stack.pop();
            }
        }
    }
    walls
}
