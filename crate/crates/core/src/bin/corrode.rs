use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use corrosion_crack::driver::{
    fit_diffusivity, load_card, log_grid, run_simulation, run_sweep, Measurement, Preset, RunMode, Scenario,
};
use corrosion_crack::post::write_vtk;
use corrosion_crack::state::FieldState;
use corrosion_crack::Error;

#[derive(Parser)]
#[command(name = "corrode", version, about = "Chloride-induced corrosion cracking of reinforced concrete")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run card (TOML with unit-carrying quantities).
    #[arg(long, global = true)]
    card: Option<PathBuf>,
    /// Parameter preset used for values the card leaves out.
    #[arg(long, global = true, default_value = "chen2020", value_parser = parse_preset)]
    preset: Preset,
    /// nonuniform, uniform or no-crack-transport; overrides the card.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<RunMode>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and fits.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Accepted for scripting; every computation is deterministic and no
    /// random numbers are drawn.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario to its horizon.
    Run,
    /// Run the sweep axes of the card.
    Sweep,
    /// Fit the intact chloride diffusivity to measured profiles.
    FitDiffusivity {
        /// CSV with columns depth_m, C_tot_pct, t_s.
        #[arg(long)]
        data: PathBuf,
        /// Number of log-spaced candidates.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value_t = 1e-13)]
        d_min: f64,
        #[arg(long, default_value_t = 1e-11)]
        d_max: f64,
    },
    /// Generate the mesh and report its statistics.
    Mesh,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("unknown preset `{s}` (chen2020, ye2017, seawater)"))
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    RunMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (nonuniform, uniform, no-crack-transport)"))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Abort { .. } | Error::Fem(_) => 3,
        Error::Io { .. } | Error::Output { .. } => 1,
        Error::Card(_) | Error::Param(_) | Error::Mesh(_) => 2,
    }
}

fn scenario(common: &Common) -> Result<Scenario, Error> {
    let mut s = match &common.card {
        Some(path) => load_card(path, common.preset).map_err(|e| match e {
            Error::Io { path, source } => Error::Card(format!("{}: {source}", path.display())),
            other => other,
        })?,
        None => Scenario::preset(common.preset),
    };
    if let Some(m) = common.mode {
        s.mode = m;
    }
    s.validate()?;
    Ok(s)
}

fn read_measurements(path: &Path) -> Result<Vec<Measurement>, Error> {
    let card = |m: String| Error::Card(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| card(e.to_string()))?;
    let headers = reader.headers().map_err(|e| card(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| card(format!("missing column {name}")))
    };
    let (d, c, t) = (column("depth_m")?, column("C_tot_pct")?, column("t_s")?);
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| card(e.to_string()))?;
        let get = |k: usize| -> Result<f64, Error> {
            rec.get(k)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| card(format!("row {}: bad number", line + 2)))
        };
        out.push(Measurement {
            depth: get(d)?,
            content: get(c)?,
            time: get(t)?,
        });
    }
    Ok(out)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let common = &cli.common;
    let s = scenario(common)?;
    let out = common.out.as_deref();
    let clock = Instant::now();
    match &cli.command {
        Command::Run => {
            let t = run_simulation(&s, out)?;
            let last = t.last().copied();
            println!("scenario {} ({})", s.name, s.mode);
            let days = |v: Option<f64>| v.map_or("never".to_string(), |t| format!("{:.1} d", t / 86_400.0));
            println!("first activation     {}", days(t.first_activation));
            println!("full activation      {}", days(t.full_activation));
            println!("surface crack        {}", days(t.surface_crack_time));
            if let Some(d) = t.first_damage {
                println!(
                    "first cracked element {} at {:.1} d, {:.1} deg from the exposed side",
                    d.element,
                    d.time / 86_400.0,
                    d.angle_from_exposed
                );
            }
            if let Some(r) = last {
                println!("final crack width    {:.4} mm ({:.3} of reference)", r.crack_width * 1e3, r.relative_width);
                println!("final mass loss      {:.4} %", r.mass_loss);
                println!("max saturation S_p   {:.4}", r.max_saturation);
            }
            println!(
                "steps {} accepted, {} rejected; wall time {:.1} s",
                t.accepted_steps,
                t.rejected_steps,
                clock.elapsed().as_secs_f64()
            );
        }
        Command::Sweep => {
            let outcomes = run_sweep(&s, common.threads, out)?;
            println!("{:<44} {:>12} {:>8}  status", "point", "w (mm)", "w/w_ref");
            for o in &outcomes {
                match &o.result {
                    Ok(t) => {
                        let r = t.last().copied();
                        println!(
                            "{:<44} {:>12.5} {:>8.3}  ok",
                            o.point.label(),
                            r.map_or(0.0, |r| r.crack_width * 1e3),
                            r.map_or(0.0, |r| r.relative_width)
                        );
                    }
                    Err(e) => println!("{:<44} {:>12} {:>8}  {e}", o.point.label(), "-", "-"),
                }
            }
        }
        Command::FitDiffusivity {
            data,
            grid,
            d_min,
            d_max,
        } => {
            let measurements = read_measurements(data)?;
            let candidates = log_grid(*d_min, *d_max, *grid);
            let fit = fit_diffusivity(&measurements, &s, &candidates, common.threads)?;
            println!("{:>12}  {:>10}", "D_f (m2/s)", "R2");
            for (d, r2) in &fit.r_squared {
                println!("{d:>12.4e}  {r2:>10.5}");
            }
            println!("best D_f = {:.4e} m2/s", fit.best);
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join("fit.csv");
                let mut text = String::from("d_f_m2s,r2\n");
                for (d, r2) in &fit.r_squared {
                    text.push_str(&format!("{d:e},{r2}\n"));
                }
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
        }
        Command::Mesh => {
            let l = s.effective_length_scale();
            let mesh = s.geometry.build_mesh(l)?;
            let steel = mesh.boundaries.steel_interface.iter().map(|&e| mesh.edge_length(e));
            let min_edge = steel.fold(f64::INFINITY, f64::min);
            println!("nodes                {}", mesh.num_nodes());
            println!("triangles            {}", mesh.num_triangles());
            println!("concrete triangles   {}", mesh.concrete_triangles().count());
            println!("steel interface      {} edges, shortest {:.4} mm", mesh.boundaries.steel_interface.len(), min_edge * 1e3);
            println!("exposed edges        {}", mesh.boundaries.chloride_exposed.len());
            println!("sealed edges         {}", mesh.boundaries.sealed.len());
            println!("upper surface edges  {}", mesh.boundaries.upper_surface.len());
            println!("phase-field length   {:.4} mm", l * 1e3);
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let state = FieldState::new(&mesh, s.transport.porosity, 0, 0.0);
                write_vtk(&dir.join("mesh.vtk"), &mesh, &state, &s.transport)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
