use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dnastore::bounds::{
    capacity_point, enumerate_types, rate_upper_bound_finite_m, type_count_exact, type_count_upper_log,
};
use dnastore::codec::{self, CodecConfig};
use dnastore::coupon::{chebyshev_tail_bound_form, simulate_distinct, TailBoundInputs, TailForm};
use dnastore::experiments::{self, ExperimentSpec};
use dnastore::genie::{augment, frequency_vector, sample_tagged, tag_pool};
use dnastore::model::file::{read_any, read_pool, write_pool, write_samples, ChannelFile};
use dnastore::model::sample_with_replacement;
use dnastore::report::{fmt_sig, write_atomic};
use dnastore::{Error, Result};

#[derive(Parser)]
#[command(name = "dnastore", version, about = "Unordered-sampling DNA storage channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity and the two simple converse bounds.
    Capacity {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
    },
    /// Simple bounds, plus the finite-M converse when --m is given.
    Bounds {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, requires = "delta")]
        m: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        pe: f64,
    },
    /// Number of length-a nonnegative vectors summing to b.
    Typecount {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, group = "mode")]
        exact: bool,
        #[arg(long, group = "mode")]
        log_bound: bool,
        #[arg(long, group = "mode")]
        enumerate: bool,
    },
    /// Simulated distinct counts with tail frequencies.
    Coupon {
        #[arg(long)]
        m: u64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, allow_negative_numbers = true)]
        delta: Vec<f64>,
        /// Per-trial CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chebyshev tail bound on the distinct fraction.
    Tail {
        #[arg(long)]
        m: u64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        displayed_form: bool,
    },
    /// Encodes bytes into a pool file.
    Encode {
        #[arg(long)]
        config: PathBuf,
        /// Input bytes, `-` for stdin.
        #[arg(long, default_value = "-")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decodes a sample file (or a pool file) back into bytes.
    Decode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        r#in: PathBuf,
        /// Output bytes; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples a pool file with replacement.
    Channel {
        #[arg(long)]
        r#in: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Tag every draw with its pool index.
        #[arg(long)]
        genie: bool,
        /// Also write the frequency vector as text.
        #[arg(long, requires = "genie")]
        freq: Option<PathBuf>,
        /// Report the augmented coordinate for this delta.
        #[arg(long, requires = "genie", allow_negative_numbers = true)]
        delta: Option<f64>,
    },
    /// Runs an experiment spec; exits 1 if any assertion fails.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory; defaults to the spec's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scalar(label: &str, x: f64) {
    eprint!("{label}: ");
    let _ = io::stderr().flush();
    println!("{}", fmt_sig(x));
    let _ = io::stdout().flush();
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read(path)?)
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Capacity { beta, c } => {
            let p = capacity_point(beta, c)?;
            scalar("capacity", p.capacity);
            scalar("bound1 (1 - e^-c)", p.index_genie_bound);
            scalar("bound2 (1 - 1/beta)", p.type_count_bound);
        }
        Command::Bounds { beta, c, m, delta, pe } => {
            let p = capacity_point(beta, c)?;
            scalar("index genie bound", p.index_genie_bound);
            scalar("type count bound", p.type_count_bound);
            scalar("capacity", p.capacity);
            if let (Some(m), Some(delta)) = (m, delta) {
                let b = rate_upper_bound_finite_m(m, beta, c, delta, pe)?;
                scalar("finite-M bound", b.value);
                scalar("limit", b.limit);
                if !b.alpha_valid {
                    eprintln!("warning: the 2e constant is not valid at this (M, beta)");
                }
            }
        }
        Command::Typecount {
            a,
            b,
            log_bound,
            enumerate,
            ..
        } => {
            if log_bound {
                scalar("ln upper bound", type_count_upper_log(a, b)?);
            } else if enumerate {
                let types = enumerate_types(a, b)?;
                let mut out = io::stdout().lock();
                for t in &types {
                    let cells: Vec<String> = t.iter().map(u64::to_string).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
                eprintln!("count: {}", types.len());
            } else {
                eprint!("T[{a},{b}]: ");
                println!("{}", type_count_exact(a, b));
            }
        }
        Command::Coupon {
            m,
            c,
            trials,
            seed,
            delta,
            out,
        } => {
            let s = simulate_distinct(m, c, trials, seed, &delta)?;
            scalar("mean Q/M", s.mean);
            scalar("analytic E[Q]/M", s.analytic_mean());
            scalar("std Q/M", s.std);
            for t in &s.tails {
                scalar(&format!("tail frequency delta={}", fmt_sig(t.delta)), t.empirical);
                match t.bound {
                    Some(b) => scalar("  bound", b),
                    None => eprintln!("  bound undefined at this M"),
                }
            }
            if let Some(path) = out {
                write_atomic(&path, s.trials_table().to_csv().as_bytes())?;
            }
        }
        Command::Tail {
            m,
            c,
            delta,
            displayed_form,
        } => {
            let form = if displayed_form {
                TailForm::Displayed
            } else {
                TailForm::Proof
            };
            scalar(
                "tail bound",
                chebyshev_tail_bound_form(&TailBoundInputs::new(m, c, delta)?, form)?,
            );
        }
        Command::Encode { config, r#in, out } => {
            let config = CodecConfig::load(&config)?;
            let pool = codec::encode(&read_input(&r#in)?, &config)?;
            let mut bytes = Vec::new();
            write_pool(&mut bytes, &pool)?;
            write_atomic(&out, &bytes)?;
            scalar("achieved rate", codec::achieved_rate(&config)?);
        }
        Command::Decode { config, r#in, out } => {
            let config = CodecConfig::load(&config)?;
            let data = match read_any(std::fs::File::open(&r#in)?)? {
                ChannelFile::Samples(s) => codec::decode(&s, &config)?,
                ChannelFile::Pool(p) => codec::decode_molecules(&p.molecules, &config)?,
            };
            match out {
                Some(path) => write_atomic(&path, &data)?,
                None => io::stdout().write_all(&data)?,
            }
        }
        Command::Channel {
            r#in,
            c,
            seed,
            out,
            genie,
            freq,
            delta,
        } => {
            let pool = read_pool(std::fs::File::open(&r#in)?)?.into_pool(c)?;
            let samples = if genie {
                sample_tagged(&tag_pool(&pool), seed)
            } else {
                sample_with_replacement(&pool, seed)
            };
            let mut bytes = Vec::new();
            write_samples(&mut bytes, &samples)?;
            if genie {
                let f = frequency_vector(&samples)?;
                eprintln!("distinct tags: {} over {} contents", f.l1_norm(), f.support_size());
                if let Some(delta) = delta {
                    let a = augment(f.clone(), delta)?;
                    scalar("F0", a.f0);
                }
                if let Some(path) = freq {
                    write_atomic(&path, f.to_text().as_bytes())?;
                }
            }
            write_atomic(&out, &bytes)?;
        }
        Command::Experiment { spec, out } => {
            let spec = ExperimentSpec::load(&spec)?;
            let dir = out
                .or_else(|| spec.out.clone())
                .ok_or_else(|| Error::Domain("no output directory: pass --out or set \"out\" in the spec".into()))?;
            let report = experiments::run(&spec)?;
            for path in report.write_dir(&dir)? {
                eprintln!("wrote {}", path.display());
            }
            for a in report.assertions.iter().filter(|a| !a.pass) {
                eprintln!("FAIL {}: {}", a.name, a.detail);
            }
            eprintln!(
                "{}/{} assertions pass",
                report.assertions.iter().filter(|a| a.pass).count(),
                report.assertions.len()
            );
            return Ok(report.pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
