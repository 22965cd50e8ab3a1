//! File formats emitted by runs: stats.csv, snapshots, summaries and the
//! generation-0 payoff dump.
//!
//! All numeric columns use six decimal places so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;

use ipd_lab::grid::GridState;
use ipd_lab::sim::{FirstGeneration, GenerationStats};
use ipd_lab::strategy::{StrategyKind, ALL_KINDS};

fn lower(kind: StrategyKind) -> String {
    kind.token().to_lowercase()
}

/// The stats.csv header: fractions per kind, the master/slave split, then
/// average payoff per move for every group.
pub fn stats_header() -> String {
    let mut header = String::from("generation");
    for kind in ALL_KINDS {
        write!(header, ",{}_frac", lower(kind)).unwrap();
    }
    header.push_str(",csmsm_master_frac,csmsm_slave_frac");
    for kind in ALL_KINDS.into_iter().filter(|&k| k != StrategyKind::Csmsm) {
        write!(header, ",{}_avg_payoff_per_move", lower(kind)).unwrap();
    }
    header.push_str(
        ",csmsm_master_avg_payoff_per_move,csmsm_slave_avg_payoff_per_move,csmsm_all_avg_payoff_per_move",
    );
    header
}

pub fn stats_row(stats: &GenerationStats) -> String {
    let mut row = format!("{}", stats.generation);
    for kind in ALL_KINDS {
        write!(row, ",{:.6}", stats.kind_fraction(kind)).unwrap();
    }
    write!(row, ",{:.6}", stats.master_fraction()).unwrap();
    write!(row, ",{:.6}", stats.slave_fraction()).unwrap();
    for kind in ALL_KINDS.into_iter().filter(|&k| k != StrategyKind::Csmsm) {
        write!(row, ",{:.6}", stats.kind_avg_payoff_per_move[kind.index()]).unwrap();
    }
    write!(row, ",{:.6}", stats.master_avg_payoff_per_move).unwrap();
    write!(row, ",{:.6}", stats.slave_avg_payoff_per_move).unwrap();
    write!(row, ",{:.6}", stats.csmsm_avg_payoff_per_move()).unwrap();
    row
}

pub fn stats_csv(stats: &[GenerationStats]) -> String {
    let mut out = stats_header();
    out.push('\n');
    for s in stats {
        out.push_str(&stats_row(s));
        out.push('\n');
    }
    out
}

pub fn snapshot_filename(generation: u64) -> String {
    format!("gen_{generation:06}.txt")
}

/// The one-line run summary: fixation generation (or NONE) plus the final
/// kind fractions.
pub fn summary_line(fixation: Option<(u64, StrategyKind)>, final_grid: &GridState) -> String {
    let mut line = match fixation {
        Some((generation, kind)) => format!("fixation={generation} fixation_kind={kind}"),
        None => String::from("fixation=NONE"),
    };
    let counts = final_grid.kind_counts();
    let total = final_grid.cell_count() as f64;
    line.push_str(" final:");
    for kind in ALL_KINDS {
        write!(
            line,
            " {}={:.6}",
            lower(kind),
            counts[kind.index()] as f64 / total
        )
        .unwrap();
    }
    line
}

/// Per-cell payoff dump of the first generation of a scenario run.
pub fn payoff_dump(first: &FirstGeneration) -> String {
    let mut out = String::from("x,y,kind,role,total_payoff\n");
    for (i, (cell, payoff)) in first.played.cells().iter().zip(&first.payoffs).enumerate() {
        let (x, y) = first.played.coords_of(i);
        let role = cell.role().map(|r| r.token()).unwrap_or("");
        writeln!(out, "{x},{y},{},{role},{payoff:.6}", cell.kind()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ipd_lab::grid::CellState;
    use ipd_lab::strategy::Role;

    #[test]
    fn header_and_row_have_matching_arity() {
        let grid = GridState::uniform(3, 3, CellState::csmsm(Role::Master)).unwrap();
        let stats = GenerationStats::occupancy_only(&grid);
        let header_fields = stats_header().split(',').count();
        let row_fields = stats_row(&stats).split(',').count();
        assert_eq!(header_fields, row_fields);
        // generation + 8 fracs + 2 role fracs + 7 kind averages + 3 group averages
        assert_eq!(header_fields, 21);
    }

    #[test]
    fn summary_reports_fixation_and_fractions() {
        let grid = GridState::uniform(3, 3, CellState::plain(StrategyKind::Tft)).unwrap();
        let line = summary_line(Some((4, StrategyKind::Tft)), &grid);
        assert!(line.starts_with("fixation=4 fixation_kind=TFT final:"));
        assert!(line.contains("tft=1.000000"));
        assert!(line.contains("csmsm=0.000000"));
        let line = summary_line(None, &grid);
        assert!(line.starts_with("fixation=NONE final:"));
    }

    #[test]
    fn snapshot_filenames_are_zero_padded() {
        assert_eq!(snapshot_filename(0), "gen_000000.txt");
        assert_eq!(snapshot_filename(13), "gen_000013.txt");
        assert_eq!(snapshot_filename(123456), "gen_123456.txt");
    }
}
