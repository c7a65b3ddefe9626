//! SVG figures comparing protocols round by round.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use eesaa_core::{ProtocolKind, SimSummary};

use crate::error::CliError;

/// Summaries of one protocol, usually one per seed.
#[derive(Debug, Clone)]
pub struct ProtocolRuns {
    pub protocol: ProtocolKind,
    pub runs: Vec<SimSummary>,
}

const COLORS: [RGBColor; 4] = [
    RGBColor(200, 30, 30),
    RGBColor(30, 90, 200),
    RGBColor(20, 150, 60),
    RGBColor(150, 60, 170),
];

#[derive(Clone, Copy)]
enum Metric {
    Alive,
    Dead,
    ChCount,
    CumulativePackets,
}

impl Metric {
    fn file_name(self) -> &'static str {
        match self {
            Metric::Alive => "alive_nodes.svg",
            Metric::Dead => "dead_nodes.svg",
            Metric::ChCount => "ch_per_round.svg",
            Metric::CumulativePackets => "packets_to_bs.svg",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::Alive => "Alive nodes",
            Metric::Dead => "Dead nodes",
            Metric::ChCount => "Cluster heads per round",
            Metric::CumulativePackets => "Packets to BS (cumulative)",
        }
    }
}

/// Per-round value of `metric` for one run, extended to `len` rounds with
/// the run's final state.
fn series(run: &SimSummary, metric: Metric, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut cumulative = 0u64;
    for i in 0..len {
        let v = match run.per_round.get(i) {
            Some(r) => {
                cumulative += r.packets_to_bs;
                match metric {
                    Metric::Alive => f64::from(r.alive),
                    Metric::Dead => f64::from(r.dead),
                    Metric::ChCount => f64::from(r.ch_count),
                    Metric::CumulativePackets => cumulative as f64,
                }
            }
            None => {
                let last = run.per_round.last();
                match metric {
                    Metric::Alive => last.map_or(0.0, |r| f64::from(r.alive)),
                    Metric::Dead => last.map_or(0.0, |r| f64::from(r.dead)),
                    Metric::ChCount => 0.0,
                    Metric::CumulativePackets => cumulative as f64,
                }
            }
        };
        out.push(v);
    }
    out
}

/// Series drawn for one protocol. Alive, dead and packet curves are averaged
/// over the runs; the CH count shows the first run only, since averaging
/// would hide the round-to-round variation the figure is meant to show.
fn protocol_series(group: &ProtocolRuns, metric: Metric, len: usize) -> Vec<f64> {
    match metric {
        Metric::ChCount => series(&group.runs[0], metric, len),
        _ => {
            let mut acc = vec![0.0; len];
            for run in &group.runs {
                for (a, v) in acc.iter_mut().zip(series(run, metric, len)) {
                    *a += v;
                }
            }
            let n = group.runs.len() as f64;
            acc.into_iter().map(|v| v / n).collect()
        }
    }
}

fn draw(groups: &[ProtocolRuns], metric: Metric, path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let len = groups
        .iter()
        .flat_map(|g| g.runs.iter())
        .map(|r| r.per_round.len())
        .max()
        .unwrap_or(0);
    let data: Vec<Vec<f64>> = groups.iter().map(|g| protocol_series(g, metric, len)).collect();
    let y_max = data.iter().flatten().copied().fold(1.0, f64::max) * 1.05;
    let x_max = (len.max(1)) as f64;

    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(metric.title(), ("sans-serif", 24))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..x_max, 0.0..y_max)?;
    chart.configure_mesh().x_desc("Round").y_desc(metric.title()).draw()?;

    for (i, (group, values)) in groups.iter().zip(&data).enumerate() {
        let color = COLORS[i % COLORS.len()];
        chart
            .draw_series(LineSeries::new(
                values.iter().enumerate().map(|(r, &v)| ((r + 1) as f64, v)),
                color.stroke_width(2),
            ))?
            .label(group.protocol.name().to_uppercase())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Writes the four comparison figures into `out_dir` and returns their paths.
pub fn emit_plots(groups: &[ProtocolRuns], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if groups.is_empty() || groups.iter().any(|g| g.runs.is_empty()) {
        return Err(CliError::Runtime("plotting needs at least one run per protocol".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    for metric in [Metric::Alive, Metric::Dead, Metric::ChCount, Metric::CumulativePackets] {
        let path = out_dir.join(metric.file_name());
        draw(groups, metric, &path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
