//! Scenario commands: each turns a [`RunConfig`] into files under the
//! output directory. Files written by a failing command are removed.

use crate::analysis::{self, Direction};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::gridfile::{write_grid, GridFile};
use crate::morse::{EigenTable, MorseParams};
use crate::phase_space::{auto_momentum_grid, wigner_transform, LobeCounter, AUTO_P_SPAN};
use crate::wavepacket::PhaseLockedPacket;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Conventions stamped into every table and grid file.
pub const CONVENTIONS: &str = "hbar=1; x=r/r0-1; p conjugate to x; W prefactor 1/pi; \
overlap=2pi*sum(W1*W2)dxdp; tile_area=1/(dx*dp)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigen,
    State,
    Wigner,
    Carpet,
    Metrics,
    Sensitivity,
    Table1,
    Table2,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Eigen,
        Command::State,
        Command::Wigner,
        Command::Carpet,
        Command::Metrics,
        Command::Sensitivity,
        Command::Table1,
        Command::Table2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::State => "state",
            Command::Wigner => "wigner",
            Command::Carpet => "carpet",
            Command::Metrics => "metrics",
            Command::Sensitivity => "sensitivity",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid("command", format!("unknown command {s:?}")))
    }
}

/// Round-trip decimal formatting (17 significant digits).
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// θ columns of the table outputs: 0, π/8, …, π.
pub fn table_thetas() -> Vec<f64> {
    (0..9).map(|j| j as f64 * PI / 8.0).collect()
}

const TABLE_THETA_LABELS: [&str; 9] = [
    "0", "pi/8", "pi/4", "3pi/8", "pi/2", "5pi/8", "3pi/4", "7pi/8", "pi",
];

/// Tracks written files so a failed command can take them back.
struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn open(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, body)?;
        Ok(())
    }

    fn grid(&mut self, name: &str, g: &GridFile) -> Result<()> {
        let p = self.path(name);
        write_grid(&p, g)
    }

    fn discard(self) {
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

/// Runs `command`, returning the files it wrote.
pub fn run_command(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let mut out = Outputs::open(&config.output_dir)?;
    match dispatch(command, config, &mut out) {
        Ok(()) => Ok(out.files),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn dispatch(command: Command, config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let params = config.params()?;
    let grid = config.x_grid()?;
    match command {
        Command::Eigen => eigen(config, params, grid, out),
        Command::State => state(config, &packet(config, params, grid)?, out),
        Command::Wigner => wigner(config, &packet(config, params, grid)?, out),
        Command::Carpet => carpet(config, &packet(config, params, grid)?, out),
        Command::Metrics => metrics(config, &packet(config, params, grid)?, out),
        Command::Sensitivity => sensitivity(config, &packet(config, params, grid)?, out),
        Command::Table1 => table1(&packet(config, params, grid)?, out),
        Command::Table2 => table2(&packet(config, params, grid)?, out),
    }
}

fn packet(config: &RunConfig, params: MorseParams, grid: UniformGrid) -> Result<PhaseLockedPacket> {
    let p = PhaseLockedPacket::build(params, grid, config.zeta(), config.n_levels)?;
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(p)
}

fn provenance(params: &MorseParams, zeta: f64) -> String {
    format!(
        "# phaselock {VERSION}; lambda={}; zeta={}; {CONVENTIONS}\n",
        fmt_num(params.lambda()),
        fmt_num(zeta)
    )
}

fn base_metadata(params: &MorseParams, zeta: f64) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("version".into(), VERSION.into());
    m.insert("conventions".into(), CONVENTIONS.into());
    m.insert("lambda".into(), fmt_num(params.lambda()));
    m.insert("zeta".into(), fmt_num(zeta));
    m
}

/// (θ index, t index, θ, t) over the configured lattice.
fn lattice(config: &RunConfig) -> Result<Vec<(usize, usize, f64, f64)>> {
    let times = config.times_au()?;
    Ok(config
        .theta
        .iter()
        .enumerate()
        .flat_map(|(i, &th)| times.iter().enumerate().map(move |(j, &t)| (i, j, th, t)))
        .collect())
}

fn eigen(
    config: &RunConfig,
    params: MorseParams,
    grid: UniformGrid,
    out: &mut Outputs,
) -> Result<()> {
    let table = EigenTable::new(params, grid, config.n_levels)?;
    for w in table.truncation_warnings() {
        eprintln!("warning: {w}");
    }
    let mut csv = provenance(&params, config.zeta());
    csv.push_str("m,energy,captured_norm,grid_norm\n");
    for f in table.functions() {
        let rho: Vec<f64> = f.values.iter().map(|v| v * v).collect();
        writeln!(
            csv,
            "{},{},{},{}",
            f.state.m,
            fmt_num(f.state.energy),
            fmt_num(f.captured_norm),
            fmt_num(grid.trapezoid(&rho))
        )
        .unwrap();
    }
    out.text("eigen.csv", &csv)
}

fn state(config: &RunConfig, packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    for (i, j, th, t) in lattice(config)? {
        let s = packet.phase_locked_state(th, t);
        let mut csv = provenance(packet.params(), config.zeta());
        writeln!(
            csv,
            "# theta={} t={}",
            fmt_num(s.theta.unwrap_or(th)),
            fmt_num(t)
        )
        .unwrap();
        csv.push_str("x,re,im,density\n");
        for (x, z) in s.x().iter().zip(&s.psi) {
            writeln!(
                csv,
                "{},{},{},{}",
                fmt_num(*x),
                fmt_num(z.re),
                fmt_num(z.im),
                fmt_num(z.norm_sqr())
            )
            .unwrap();
        }
        out.text(&format!("state_th{i}_t{j}.csv"), &csv)?;
    }
    Ok(())
}

fn momentum_grid(config: &RunConfig, state: &crate::wavepacket::StateGrid) -> Result<UniformGrid> {
    match config.p_max {
        Some(p) => UniformGrid::new(-p, p, config.np),
        None => auto_momentum_grid(state, config.np, AUTO_P_SPAN),
    }
}

fn wigner(config: &RunConfig, packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    let lobes = LobeCounter::for_model(packet.params(), config.lobe_threshold)?;
    for (i, j, th, t) in lattice(config)? {
        let s = packet.phase_locked_state(th, t);
        let p = momentum_grid(config, &s)?;
        let w = wigner_transform(&s, &p)?;
        let count = lobes.count(&w)?;
        let stem = format!("wigner_th{i}_t{j}");
        if config.format.grid() {
            let mut meta = base_metadata(packet.params(), config.zeta());
            meta.insert("theta".into(), fmt_num(w.theta.unwrap_or(th)));
            meta.insert("t".into(), fmt_num(t));
            meta.insert("lobe_count".into(), count.to_string());
            meta.insert("lobe_threshold".into(), fmt_num(config.lobe_threshold));
            meta.insert("norm_captured".into(), fmt_num(w.norm_captured));
            meta.insert("purity".into(), fmt_num(w.purity()));
            meta.insert("axes".into(), "x,p".into());
            let g = GridFile::new(vec![w.x.points(), w.p.points()], w.w.clone(), meta)?;
            out.grid(&format!("{stem}.wgrd"), &g)?;
        }
        if config.format.csv() {
            let mut csv = provenance(packet.params(), config.zeta());
            writeln!(
                csv,
                "# theta={} t={} lobe_count={count}; first row: p axis; first column: x",
                fmt_num(w.theta.unwrap_or(th)),
                fmt_num(t)
            )
            .unwrap();
            csv.push_str("x\\p");
            for v in w.p.points() {
                csv.push(',');
                csv.push_str(&fmt_num(v));
            }
            csv.push('\n');
            for r in 0..w.nx() {
                csv.push_str(&fmt_num(w.x.point(r)));
                for v in w.row(r) {
                    csv.push(',');
                    csv.push_str(&fmt_num(*v));
                }
                csv.push('\n');
            }
            out.text(&format!("{stem}.csv"), &csv)?;
        }
    }
    Ok(())
}

fn carpet(config: &RunConfig, packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    for (j, t) in config.times_au()?.into_iter().enumerate() {
        let c = analysis::carpet(packet, t, config.theta_count)?;
        let stem = format!("carpet_t{j}");
        if config.format.grid() {
            let mut meta = base_metadata(packet.params(), config.zeta());
            meta.insert("t".into(), fmt_num(t));
            meta.insert("axes".into(), "theta,x".into());
            let payload = c.density.concat();
            let g = GridFile::new(vec![c.theta.clone(), c.x.points()], payload, meta)?;
            out.grid(&format!("{stem}.wgrd"), &g)?;
        }
        if config.format.csv() {
            let mut csv = provenance(packet.params(), config.zeta());
            writeln!(
                csv,
                "# t={}; first row: x axis; first column: theta",
                fmt_num(t)
            )
            .unwrap();
            csv.push_str("theta\\x");
            for v in c.x.points() {
                csv.push(',');
                csv.push_str(&fmt_num(v));
            }
            csv.push('\n');
            for (th, row) in c.theta.iter().zip(&c.density) {
                csv.push_str(&fmt_num(*th));
                for v in row {
                    csv.push(',');
                    csv.push_str(&fmt_num(*v));
                }
                csv.push('\n');
            }
            out.text(&format!("{stem}.csv"), &csv)?;
        }
    }
    Ok(())
}

fn metrics(config: &RunConfig, packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    let lobes = LobeCounter::for_model(packet.params(), config.lobe_threshold)?;
    let rows = lattice(config)?
        .into_par_iter()
        .map(|(_, _, th, t)| analysis::metrics(packet, th, t, &lobes, config.np))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = provenance(packet.params(), config.zeta());
    csv.push_str("theta,t,dx,dp,action,tile_area,fringe_amplitude,lobe_count\n");
    for r in rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.theta),
            fmt_num(r.t),
            fmt_num(r.dx),
            fmt_num(r.dp),
            fmt_num(r.action),
            fmt_num(r.tile_area),
            fmt_num(r.fringe_amplitude),
            r.lobe_count
        )
        .unwrap();
    }
    out.text("metrics.csv", &csv)
}

fn sensitivity(config: &RunConfig, packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    let direction = config.scan_direction;
    let mut summary = provenance(packet.params(), config.zeta());
    summary.push_str(
        "theta,t,direction,spread,tile_dimension,first_zero,max_wigner_route_deviation\n",
    );
    for (i, j, th, t) in lattice(config)? {
        let s = packet.phase_locked_state(th, t);
        let (dx, dp) = analysis::uncertainties(&s);
        // the tile of area 1/(ΔxΔp) with the state's aspect ratio spans 1/Δp in x
        let (spread, tile_dim) = match direction {
            Direction::Position => (dx, 1.0 / dp),
            Direction::Momentum => (dp, 1.0 / dx),
        };
        let scan = analysis::sensitivity_scan(
            &s,
            direction,
            config.scan_max.unwrap_or(spread),
            config.scan_steps,
        )?;
        let mut csv = provenance(packet.params(), config.zeta());
        writeln!(
            csv,
            "# theta={} t={} direction={}",
            fmt_num(s.theta.unwrap_or(th)),
            fmt_num(t),
            direction.name()
        )
        .unwrap();
        csv.push_str("shift,overlap\n");
        for (a, b) in scan.shifts.iter().zip(&scan.overlaps) {
            writeln!(csv, "{},{}", fmt_num(*a), fmt_num(*b)).unwrap();
        }
        out.text(&format!("sensitivity_th{i}_t{j}.csv"), &csv)?;
        let deviation = scan
            .wigner_check
            .iter()
            .map(|(_, a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        writeln!(
            summary,
            "{},{},{},{},{},{},{}",
            fmt_num(s.theta.unwrap_or(th)),
            fmt_num(t),
            direction.name(),
            fmt_num(spread),
            fmt_num(tile_dim),
            scan.first_zero
                .map(fmt_num)
                .unwrap_or_else(|| "none".into()),
            fmt_num(deviation)
        )
        .unwrap();
    }
    out.text("sensitivity_summary.csv", &summary)
}

/// Fringe amplitudes at T_rev/8 over the table θ columns.
pub fn table1_values(packet: &PhaseLockedPacket) -> Result<Vec<f64>> {
    let t = packet.params().characteristic_times().revival / 8.0;
    let r0 = packet.params().r0();
    table_thetas()
        .into_par_iter()
        .map(|th| {
            let s = packet.phase_locked_state(th, t);
            analysis::fringe_amplitude(&s.density(), &s.grid, r0)
        })
        .collect()
}

/// Tile areas at T_rev/8 (first row) and T_rev/16 (second row).
pub fn table2_values(packet: &PhaseLockedPacket) -> Vec<Vec<f64>> {
    let revival = packet.params().characteristic_times().revival;
    [8.0, 16.0]
        .iter()
        .map(|q| {
            table_thetas()
                .into_par_iter()
                .map(|th| analysis::tile_area(&packet.phase_locked_state(th, revival / q)))
                .collect()
        })
        .collect()
}

fn table_header() -> String {
    format!("theta,{}\n", TABLE_THETA_LABELS.join(","))
}

fn table_row(label: &str, values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
    format!("{label},{}\n", cells.join(","))
}

fn table1(packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    let values = table1_values(packet)?;
    let mut csv = provenance(packet.params(), packet.coefficients().zeta);
    csv.push_str("# fringe amplitude per atomic unit of r at t=T_rev/8\n");
    csv.push_str(&table_header());
    csv.push_str(&table_row("A_m", &values));
    out.text("table1.csv", &csv)
}

fn table2(packet: &PhaseLockedPacket, out: &mut Outputs) -> Result<()> {
    let rows = table2_values(packet);
    let mut csv = provenance(packet.params(), packet.coefficients().zeta);
    csv.push_str("# tile area 1/(dx*dp) in atomic units\n");
    csv.push_str(&table_header());
    csv.push_str(&table_row("T_rev/8", &rows[0]));
    csv.push_str(&table_row("T_rev/16", &rows[1]));
    out.text("table2.csv", &csv)
}
