use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use changeset::config::{parse_rule, Config};
use changeset::connect::{estimate_from_fields, validate_theorem_conditions, Mode};
use changeset::cusum::Gamma;
use changeset::error::{Error, Result};
use changeset::experiment::{render_figure, run_table, FigureInputs};
use changeset::lattice::{jaccard_distance, Lattice, PointSet};
use changeset::scan::{scan, OverlapRule};
use changeset::slicing::{FrameSequence, Orientation};

#[derive(Parser)]
#[command(
    version,
    about = "Common change-set estimation on lattice image sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic frame sequence and its true change set.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        frames: Option<usize>,
        /// Also write one CSV file per frame.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the change set of a frame sequence.
    Estimate {
        /// Binary frame file, or a directory of per-frame CSV files.
        #[arg(long)]
        input: PathBuf,
        /// True change set (`row col` per line), for scoring.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo table of mean Jaccard distances.
    Table {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Use the full rule × γ × d grid instead of the trimmed one.
        #[arg(long)]
        full_table: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render point sets and frame averages as PGM images.
    Figure {
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        estimate: Option<PathBuf>,
        #[arg(long)]
        relevant: Option<PathBuf>,
        /// Frame sequence whose time average is drawn.
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value = "figure")]
        stem: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check whether a change set satisfies the consistency conditions.
    Validate {
        /// Point-set file; when absent the scenario truth from --config is used.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        xi: usize,
        #[arg(long, default_value = "h")]
        mode: Mode,
    },
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, default_value = "h")]
    mode: Mode,
    /// Window and run length as `N,Q`.
    #[arg(long, default_value = "6,2", value_parser = rule_arg)]
    rule: OverlapRule,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

fn rule_arg(s: &str) -> std::result::Result<OverlapRule, String> {
    parse_rule(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn load_frames(path: &Path) -> Result<FrameSequence> {
    if path.is_dir() {
        FrameSequence::load_csv_dir(path)
    } else {
        FrameSequence::load(path)
    }
}

fn load_points(path: &Path, lat: Lattice) -> Result<PointSet> {
    PointSet::from_text(lat, &read_text(path)?, &path.display().to_string())
}

fn lattice_arg(
    rows: Option<usize>,
    cols: Option<usize>,
    frames: Option<&FrameSequence>,
) -> Result<Lattice> {
    match (rows, cols, frames) {
        (Some(r), Some(c), _) => Lattice::new(r, c),
        (None, None, Some(seq)) => Ok(seq.lattice()),
        _ => Err(Error::Domain("give --rows and --cols (or --frames)".into())),
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate {
            config,
            seed,
            frames,
            csv,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let frames = frames.unwrap_or(cfg.scenario.frames);
            let data = cfg.scenario.generate(seed.unwrap_or(cfg.seed), frames)?;
            let truth = cfg.scenario.truth()?;
            mkdir(&out)?;
            data.save(&out.join("frames.bin"))?;
            if csv {
                data.save_csv_dir(&out.join("frames"))?;
            }
            write_text(&out.join("truth.txt"), &truth.to_text())?;
            render_figure(
                &FigureInputs {
                    truth: Some(&truth),
                    frames: Some(&data),
                    ..Default::default()
                },
                &out,
                "generated",
            )?;
            println!(
                "{} frames of {}x{}, |S| = {}",
                frames,
                data.lattice().rows(),
                data.lattice().cols(),
                truth.len()
            );
        }
        Command::Estimate {
            input,
            truth,
            est,
            out,
        } => {
            let data = load_frames(&input)?;
            let gamma = Gamma::new(est.gamma)?;
            mkdir(&out)?;
            let mut fields = [None, None];
            for (slot, o) in [Orientation::Horizontal, Orientation::Vertical]
                .into_iter()
                .enumerate()
            {
                if est.mode.uses(o) {
                    let field = scan(&data, o, est.rule.window(), gamma)?;
                    let path = out.join(format!("scan_{}.csv", o.label()));
                    let mut w = create(&path)?;
                    field
                        .write_csv(&mut w)
                        .and_then(|_| w.flush())
                        .map_err(|e| Error::Io { path, source: e })?;
                    fields[slot] = Some(field);
                }
            }
            let [h, v] = fields;
            let result =
                estimate_from_fields(data.lattice(), h.as_ref(), v.as_ref(), est.mode, est.rule)?;
            write_text(&out.join("estimate.txt"), &result.set.to_text())?;
            write_text(&out.join("relevant.txt"), &result.relevant.to_text())?;
            let truth = truth.map(|p| load_points(&p, data.lattice())).transpose()?;
            render_figure(
                &FigureInputs {
                    truth: truth.as_ref(),
                    relevant: Some(&result.relevant),
                    estimate: Some(&result.set),
                    frames: None,
                },
                &out,
                "estimate",
            )?;
            print!("|estimate| = {}", result.set.len());
            if let Some(t) = &truth {
                print!(", jaccard = {:.6}", jaccard_distance(&result.set, t));
            }
            println!();
        }
        Command::Table {
            config,
            seed,
            reps,
            full_table,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let mut grid = cfg.grid(full_table);
            if let Some(s) = seed {
                grid.base_seed = s;
            }
            if let Some(r) = reps {
                grid.reps = r;
            }
            mkdir(&out)?;
            let path = out.join("table.csv");
            let mut w = create(&path)?;
            let records = run_table(&grid, &cfg.scenario, &mut w)?;
            println!("{} cells written to {}", records.len(), path.display());
        }
        Command::Figure {
            truth,
            estimate,
            relevant,
            frames,
            rows,
            cols,
            stem,
            out,
        } => {
            let seq = frames.as_deref().map(load_frames).transpose()?;
            let lat = lattice_arg(rows, cols, seq.as_ref())?;
            let load = |p: Option<PathBuf>| p.map(|p| load_points(&p, lat)).transpose();
            let (truth, estimate, relevant) = (load(truth)?, load(estimate)?, load(relevant)?);
            let written = render_figure(
                &FigureInputs {
                    truth: truth.as_ref(),
                    relevant: relevant.as_ref(),
                    estimate: estimate.as_ref(),
                    frames: seq.as_ref(),
                },
                &out,
                &stem,
            )?;
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Validate {
            truth,
            config,
            rows,
            cols,
            xi,
            mode,
        } => {
            let (lat, set) = match truth {
                Some(p) => {
                    let lat = match (rows, cols) {
                        (None, None) => load_config(config.as_deref())?.scenario.lattice,
                        _ => lattice_arg(rows, cols, None)?,
                    };
                    (lat, load_points(&p, lat)?)
                }
                None => {
                    let cfg = load_config(config.as_deref())?;
                    (cfg.scenario.lattice, cfg.scenario.truth()?)
                }
            };
            let report = validate_theorem_conditions(&set, lat, xi, mode);
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
