use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use qca_core::evolution::Qca;
use qca_core::fock::{read_snapshot, write_snapshot, SparseState};
use qca_core::stateprep::{dirac_sea, loop_create, pair_create, particle, vacuum, Path as LoopPath};

use crate::config::{Prep, RunConfig};

const NORM_DRIFT: f64 = 1e-8;

pub fn initial_state(cfg: &RunConfig) -> Result<SparseState> {
    let lat = &cfg.lattice;
    let mut items = cfg.initial.iter().peekable();
    let mut state = match items.peek() {
        Some(Prep::Vacuum) => {
            items.next();
            vacuum(lat)
        }
        Some(Prep::DiracSea) => {
            items.next();
            dirac_sea(lat)
        }
        Some(Prep::File(p)) => {
            let f = File::open(p).with_context(|| format!("opening initial state {}", p.display()))?;
            items.next();
            read_snapshot(lat, BufReader::new(f))?
        }
        // Pairs are created out of the sea; everything else out of the vacuum.
        Some(Prep::Pair(_)) => dirac_sea(lat),
        _ => vacuum(lat),
    };
    for item in items {
        state = match item {
            Prep::Vacuum | Prep::DiracSea | Prep::File(_) => bail!("config key `initial_state`: base state must come first"),
            Prep::Pair(x) => pair_create(lat, &state, *x)?,
            Prep::Particle(x, j) => particle(lat, &state, *x, *j)?,
            Prep::Loop(p) => loop_create(lat, &state, &LoopPath::plaquette(lat, *p))?,
        };
    }
    let n = state.norm();
    if n == 0.0 {
        bail!("config key `initial_state`: preparation gives the zero state");
    }
    if (n - 1.0).abs() > NORM_DRIFT {
        state.normalize();
    }
    Ok(state)
}

fn row(cfg: &RunConfig, step: usize, state: &SparseState) -> String {
    let mut line = format!("{step},{}", step as f64 * cfg.step.eps);
    for o in &cfg.observables {
        line.push_str(&format!(",{}", o.evaluate(&cfg.lattice, state, &cfg.step)));
    }
    line
}

fn snapshot(cfg: &RunConfig, dir: &Path, step: usize, state: &SparseState) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("step_{step:06}.txt"));
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_snapshot(&cfg.lattice, state, &mut w)?;
    Ok(())
}

/// Runs the automaton, writing one CSV row per step (step 0 included).
pub fn run(cfg: &RunConfig, out: &mut impl Write, snapshot_dir: &Path) -> Result<()> {
    let mut q = Qca::new(&cfg.lattice, cfg.step)?.with_max_entries(cfg.max_configs);
    if cfg.workers > 1 {
        q = q.with_workers(cfg.workers);
    }
    let mut state = initial_state(cfg)?;
    let n0 = state.norm();
    let header: Vec<String> = cfg.observables.iter().map(|o| o.to_string()).collect();
    writeln!(out, "step,t{}{}", if header.is_empty() { "" } else { "," }, header.join(","))?;
    writeln!(out, "{}", row(cfg, 0, &state))?;
    if cfg.snapshot_every > 0 {
        snapshot(cfg, snapshot_dir, 0, &state)?;
    }
    for step in 1..=cfg.steps {
        state = match q.full_step(&state) {
            Ok(s) => s,
            Err(e) => {
                out.flush()?;
                return Err(e).with_context(|| format!("step {step} from {} configurations (raise `max_configs` or shrink the system)", state.len()));
            }
        };
        let drift = (state.norm() - n0).abs();
        if drift > NORM_DRIFT {
            out.flush()?;
            bail!("norm drift {drift:e} after step {step} exceeds {NORM_DRIFT:e} ({} configurations)", state.len());
        }
        writeln!(out, "{}", row(cfg, step, &state))?;
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            snapshot(cfg, snapshot_dir, step, &state)?;
        }
    }
    out.flush()?;
    Ok(())
}
