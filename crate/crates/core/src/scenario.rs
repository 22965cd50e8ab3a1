//! Scenario descriptors: hand-placed clusters in a uniform background.
//!
//! The text format has one directive per line; blank lines and `#` comments
//! are skipped:
//!
//! ```text
//! grid W H            # required, must come first
//! background KIND     # required
//! cluster X Y W H     # a block of collective cells, all masters
//! role X Y MASTER|SLAVE   # set the role of one cluster cell
//! freeze_roles on|off # default off
//! ```
//!
//! `role` lines must target a cell already covered by a `cluster` line.

use thiserror::Error;

use crate::grid::{CellState, GridState};
use crate::strategy::{Role, StrategyKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("descriptor is missing the grid directive")]
    MissingGrid,
    #[error("descriptor is missing the background directive")]
    MissingBackground,
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

/// A parsed and validated scenario, ready to build a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    width: u32,
    height: u32,
    background: StrategyKind,
    /// (x, y, w, h) cluster rectangles, in file order.
    clusters: Vec<(u32, u32, u32, u32)>,
    roles: Vec<(u32, u32, Role)>,
    freeze_roles: bool,
}

impl Scenario {
    /// Parses descriptor text, validating directives as they appear so
    /// errors carry the offending line number.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut grid: Option<(u32, u32)> = None;
        let mut background: Option<StrategyKind> = None;
        let mut clusters: Vec<(u32, u32, u32, u32)> = Vec::new();
        let mut roles: Vec<(u32, u32, Role)> = Vec::new();
        let mut freeze_roles = false;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let directive = tokens.next().unwrap();
            let args: Vec<&str> = tokens.collect();
            let arity = |n: usize| -> Result<(), ScenarioError> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(parse_err(
                        line_no,
                        format!("{directive} takes {n} argument(s), got {}", args.len()),
                    ))
                }
            };
            let number = |s: &str| -> Result<u32, ScenarioError> {
                s.parse::<u32>().map_err(|_| {
                    parse_err(
                        line_no,
                        format!("expected a nonnegative integer, got {s:?}"),
                    )
                })
            };
            match directive {
                "grid" => {
                    arity(2)?;
                    if grid.is_some() {
                        return Err(parse_err(line_no, "duplicate grid directive"));
                    }
                    let (w, h) = (number(args[0])?, number(args[1])?);
                    if w < 3 || h < 3 {
                        return Err(parse_err(
                            line_no,
                            format!("grid must be at least 3x3, got {w}x{h}"),
                        ));
                    }
                    grid = Some((w, h));
                }
                "background" => {
                    arity(1)?;
                    if background.is_some() {
                        return Err(parse_err(line_no, "duplicate background directive"));
                    }
                    let kind: StrategyKind = args[0]
                        .parse()
                        .map_err(|e| parse_err(line_no, format!("{e}")))?;
                    background = Some(kind);
                }
                "cluster" => {
                    arity(4)?;
                    let (w, h) =
                        grid.ok_or_else(|| parse_err(line_no, "cluster before grid directive"))?;
                    let (cx, cy, cw, ch) = (
                        number(args[0])?,
                        number(args[1])?,
                        number(args[2])?,
                        number(args[3])?,
                    );
                    if cx.checked_add(cw).is_none_or(|e| e > w)
                        || cy.checked_add(ch).is_none_or(|e| e > h)
                    {
                        return Err(parse_err(
                            line_no,
                            format!("cluster {cx},{cy} {cw}x{ch} lies outside the {w}x{h} grid"),
                        ));
                    }
                    clusters.push((cx, cy, cw, ch));
                }
                "role" => {
                    arity(3)?;
                    let (w, h) =
                        grid.ok_or_else(|| parse_err(line_no, "role before grid directive"))?;
                    let (x, y) = (number(args[0])?, number(args[1])?);
                    if x >= w || y >= h {
                        return Err(parse_err(
                            line_no,
                            format!("role cell {x},{y} lies outside the grid"),
                        ));
                    }
                    let covered = clusters
                        .iter()
                        .any(|&(cx, cy, cw, ch)| x >= cx && x < cx + cw && y >= cy && y < cy + ch);
                    if !covered {
                        return Err(parse_err(
                            line_no,
                            format!("role cell {x},{y} is not covered by any cluster"),
                        ));
                    }
                    let role: Role = args[2]
                        .parse()
                        .map_err(|e| parse_err(line_no, format!("{e}")))?;
                    roles.push((x, y, role));
                }
                "freeze_roles" => {
                    arity(1)?;
                    freeze_roles = match args[0] {
                        "on" => true,
                        "off" => false,
                        other => {
                            return Err(parse_err(
                                line_no,
                                format!("expected on or off, got {other:?}"),
                            ))
                        }
                    };
                }
                other => return Err(parse_err(line_no, format!("unknown directive {other:?}"))),
            }
        }

        let (width, height) = grid.ok_or(ScenarioError::MissingGrid)?;
        let background = background.ok_or(ScenarioError::MissingBackground)?;
        Ok(Scenario {
            width,
            height,
            background,
            clusters,
            roles,
            freeze_roles,
        })
    }

    pub fn freeze_roles(&self) -> bool {
        self.freeze_roles
    }

    /// Builds the generation-0 grid: background everywhere, cluster cells
    /// as collective masters, then explicit role overrides.
    pub fn build(&self) -> GridState {
        let background = match self.background {
            StrategyKind::Csmsm => CellState::csmsm(Role::Master),
            kind => CellState::plain(kind),
        };
        let mut grid = GridState::uniform(self.width, self.height, background)
            .expect("dimensions validated at parse time");
        for &(cx, cy, cw, ch) in &self.clusters {
            for y in cy..cy + ch {
                for x in cx..cx + cw {
                    let idx = grid.index_of(x, y);
                    grid.set_cell(idx, CellState::csmsm(Role::Master));
                }
            }
        }
        for &(x, y, role) in &self.roles {
            let idx = grid.index_of(x, y);
            grid.set_cell(idx, CellState::csmsm(role));
        }
        grid
    }
}
