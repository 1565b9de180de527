//! Mode dispatch: each mode runs the simulation and fills a bundle.

use std::f64::consts::PI;
use std::fs;

use rayon::prelude::*;

use cooling_core::control::{optimize_pulse, CrabProblem, PulseFile};
use cooling_core::dynamics::PropagationConfig;
use cooling_core::fock::truncation_converged;
use cooling_core::model::{exact_ground_state, perturbative_ground_state, perturbative_occupation};
use cooling_core::observables::non_gaussianity;
use cooling_core::protocols::{min_occupation, run_concatenated, run_single_shot, CoolingRecord, CsConfig, SsConfig};

use crate::config::{Axis, Mode, RunConfig};
use crate::error::CliError;
use crate::output::{num, Bundle, Manifest, Table, TIMESERIES_COLUMNS};
use crate::plots;

pub fn run(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let mut bundle = Bundle::new(&cfg.out)?;
    log::info!("{} run into {}", cfg.mode.name(), cfg.out.display());
    match cfg.mode {
        Mode::Gs => ground_state(cfg, &mut bundle)?,
        Mode::Cs => concatenated(cfg, &mut bundle)?,
        Mode::SsOpt => optimize(cfg, &mut bundle)?,
        Mode::SsRun => single_shot(cfg, &mut bundle)?,
        Mode::Sweep => sweep(cfg, &mut bundle)?,
    }
    bundle.finish(cfg.mode.name(), &cfg.echo)
}

fn ground_state(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), CliError> {
    let space = cfg.n_max.space(0.0)?;
    let exact = exact_ground_state(&cfg.params, space)?;
    let pert = perturbative_ground_state(&cfg.params, space)?;
    let mut table = Table::new(&["n", "amp_exact", "amp_perturbative", "p_exact", "p_perturbative"]);
    for n in 0..space.n_max() {
        let (a, b) = (exact.state[n], pert.state[n]);
        table.push(vec![n.to_string(), num(a.re), num(b.re), num(a.norm_sqr()), num(b.norm_sqr())]);
    }
    bundle.table("ground_state.csv", &table)?;
    let (converged, _, _) =
        truncation_converged(space, |s| exact_ground_state(&cfg.params, s).map(|g| g.occupation))?;
    let r = cfg.params.epsilon / cfg.params.omega;
    bundle.note("n_max", space.n_max());
    bundle.note("occupation_exact", exact.occupation);
    bundle.note("occupation_perturbative", pert.occupation);
    bundle.note("occupation_formula", 21.0 * r * r / 128.0);
    bundle.note("energy_exact", exact.energy);
    bundle.note("energy_perturbative", pert.energy);
    bundle.note("infidelity_perturbative", 1.0 - exact.fidelity_with(&pert));
    bundle.note("delta_g", non_gaussianity(&exact.density())?);
    bundle.note("truncation_converged", converged);
    println!(
        "ground state: <n>={:.6e} (formula {:.6e}, normalized {:.6e}), energy={:.9e}",
        exact.occupation,
        21.0 * r * r / 128.0,
        perturbative_occupation(r),
        exact.energy
    );
    Ok(())
}

fn timeseries(record: &CoolingRecord) -> Table {
    let mut t = Table::new(&TIMESERIES_COLUMNS);
    for k in 0..record.len() {
        let p_step = if k == 0 { 1.0 } else { record.step_success_probs[k - 1] };
        t.push(vec![
            record.steps[k].to_string(),
            num(record.times[k]),
            num(record.lambda * record.times[k]),
            num(record.mean_n[k]),
            num(record.fidelity[k]),
            num(1.0 - record.fidelity[k]),
            num(record.non_gaussianity[k]),
            num(p_step),
            num(record.cumulative_probs[k]),
        ]);
    }
    t
}

fn trajectory(record: &CoolingRecord) -> Table {
    let mut t = Table::new(&["block", "omega_t", "lambda_t", "mean_n", "fidelity", "infidelity", "delta_g"]);
    for p in &record.trajectory {
        t.push(vec![
            p.block.to_string(),
            num(p.time),
            num(record.lambda * p.time),
            num(p.mean_n),
            num(p.fidelity),
            num(1.0 - p.fidelity),
            num(p.non_gaussianity),
        ]);
    }
    t
}

fn populations(record: &CoolingRecord) -> Table {
    let mut t = Table::new(&["step", "n", "population"]);
    for (k, pops) in record.populations.iter().enumerate() {
        for (n, p) in pops.iter().enumerate() {
            t.push(vec![record.steps[k].to_string(), n.to_string(), num(*p)]);
        }
    }
    t
}

fn summarize(bundle: &mut Bundle, record: &CoolingRecord) {
    let (n_min, at) = min_occupation(record);
    bundle.note("final_mean_n", record.final_mean_n());
    bundle.note("final_fidelity", record.final_fidelity());
    bundle.note("final_delta_g", *record.non_gaussianity.last().unwrap_or(&f64::NAN));
    bundle.note("p_sdp", record.cumulative_success_prob);
    bundle.note("min_mean_n", n_min);
    bundle.note("min_step", at);
    bundle.note("total_time", record.total_time());
    println!(
        "final <n>={:.6e} F={:.9} delta_G={:.6e} p_sdp={:.6} (min <n>={n_min:.6e} at step {at})",
        record.final_mean_n(),
        record.final_fidelity(),
        record.non_gaussianity.last().unwrap_or(&f64::NAN),
        record.cumulative_success_prob
    );
}

fn write_record(bundle: &mut Bundle, record: &CoolingRecord) -> Result<(), CliError> {
    bundle.table("timeseries.csv", &timeseries(record))?;
    bundle.table("populations.csv", &populations(record))?;
    let dense = !record.trajectory.is_empty();
    if dense {
        bundle.table("trajectory.csv", &trajectory(record))?;
    }
    for (name, body) in plots::timeseries_scripts(dense) {
        bundle.text(&name, "script", &body)?;
    }
    let (name, body) = plots::populations_script();
    bundle.text(&name, "script", &body)?;
    summarize(bundle, record);
    Ok(())
}

fn cs_config(cfg: &RunConfig, n_reps: usize, dense: usize) -> CsConfig {
    CsConfig {
        n_reps,
        noise: cfg.noise(),
        propagation: PropagationConfig { dt: cfg.dt, ..Default::default() },
        dense_samples: dense,
    }
}

fn concatenated(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), CliError> {
    let space = cfg.space()?;
    let record = run_concatenated(&cfg.params, cfg.n_th, &cs_config(cfg, cfg.n_reps, cfg.dense_samples), space)?;
    bundle.note("n_max", space.n_max());
    write_record(bundle, &record)
}

fn optimize(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), CliError> {
    let lambda = cfg.params.lambda;
    let tau = cfg.tau_mult * PI / (2.0 * lambda);
    let problem = CrabProblem::with_default_dt(cfg.n_c, lambda, tau, cfg.n_omega)?;
    let best = optimize_pulse(&problem, &cfg.optimizer)?;
    let file = PulseFile { pulse: best.pulse.clone(), lambda, cost: best.cost, seed: cfg.optimizer.rng_seed };
    bundle.text("pulse.txt", "pulse", &file.render())?;

    let mut shape = Table::new(&["omega_t", "lambda_t", "omega_a"]);
    let samples = 1000;
    for k in 0..=samples {
        let t = tau * k as f64 / samples as f64;
        shape.push(vec![num(t), num(lambda * t), num(best.pulse.eval(t)?)]);
    }
    bundle.table("pulse_shape.csv", &shape)?;

    let mut subs = Table::new(&["n", "transfer"]);
    for (n, p) in problem.transfer_probabilities(&best.pulse.to_vector(), 2 * cfg.n_c).into_iter().enumerate() {
        subs.push(vec![n.to_string(), num(p)]);
    }
    bundle.table("subspaces.csv", &subs)?;

    let mut restarts = Table::new(&["restart", "cost"]);
    for (i, c) in best.restart_costs.iter().enumerate() {
        restarts.push(vec![i.to_string(), num(*c)]);
    }
    bundle.table("restarts.csv", &restarts)?;
    let (name, body) = plots::pulse_script();
    bundle.text(&name, "script", &body)?;

    bundle.note("cost", best.cost);
    bundle.note("restart_index", best.restart_index);
    bundle.note("evals", best.evals);
    bundle.note("tau", tau);
    println!("pulse cost {:.6e} (restart {}, {} evaluations)", best.cost, best.restart_index, best.evals);
    Ok(())
}

fn load_pulse(cfg: &RunConfig) -> Result<PulseFile, CliError> {
    let path = cfg.pulse.as_ref().ok_or_else(|| CliError::Config("no pulse file given".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file = PulseFile::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(file)
}

/// The pulse's coupling unless the configuration sets a different one.
fn pulse_lambda(cfg: &RunConfig, lambda: f64, file: &PulseFile) -> Result<f64, CliError> {
    if cfg.explicit.contains("lambda") && (lambda - file.lambda).abs() > 1e-12 * file.lambda {
        return Err(CliError::Config(format!(
            "pulse was optimized for lambda = {}, configuration asks for {lambda}",
            file.lambda
        )));
    }
    Ok(file.lambda)
}

fn ss_config(cfg: &RunConfig, file: &PulseFile) -> SsConfig {
    let mut ss = SsConfig::new(file.pulse.clone());
    if cfg.explicit.contains("dt") {
        ss.propagation.dt = cfg.dt;
    }
    ss.noise = cfg.noise();
    ss
}

fn single_shot(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), CliError> {
    let file = load_pulse(cfg)?;
    let mut params = cfg.params;
    params.lambda = pulse_lambda(cfg, params.lambda, &file)?;
    let space = cfg.space()?;
    let record = run_single_shot(&params, cfg.n_th, &ss_config(cfg, &file), space)?;
    bundle.note("n_max", space.n_max());
    bundle.note("pulse_cost", file.cost);
    write_record(bundle, &record)
}

#[derive(Debug, Clone)]
struct Cell {
    index: usize,
    values: Vec<(Axis, f64)>,
}

fn cells(grids: &[(Axis, Vec<f64>)]) -> Vec<Cell> {
    let mut out: Vec<Vec<(Axis, f64)>> = vec![Vec::new()];
    for (axis, values) in grids {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push((*axis, v));
                    next
                })
            })
            .collect();
    }
    out.into_iter().enumerate().map(|(index, values)| Cell { index, values }).collect()
}

struct CellResult {
    row: Vec<String>,
    series: Table,
}

fn run_cell(cfg: &RunConfig, cell: &Cell, pulse: Option<&PulseFile>) -> Result<CellResult, CliError> {
    let mut c = cfg.clone();
    let mut n_reps = cfg.n_reps;
    for &(axis, v) in &cell.values {
        match axis {
            Axis::NReps => n_reps = v as usize,
            Axis::NTh => {
                c.n_th = v;
                if !cfg.explicit.contains("bath_nth") {
                    c.bath_nth = v;
                }
            }
            Axis::Gamma => c.gamma = v,
            Axis::Epsilon => c.params.epsilon = v,
            Axis::Lambda => c.params.lambda = v,
        }
    }
    c.params.validate().map_err(|e| CliError::Config(format!("sweep cell {}: {e}", cell.index)))?;
    let space = c.space()?;
    let record = run_concatenated(&c.params, c.n_th, &cs_config(&c, n_reps, 0), space)?;
    let (n_min, at) = min_occupation(&record);
    let mut row: Vec<String> = cell
        .values
        .iter()
        .map(|&(axis, v)| if axis == Axis::NReps { (v as usize).to_string() } else { num(v) })
        .collect();
    row.extend([
        num(record.final_mean_n()),
        num(n_min),
        at.to_string(),
        num(record.final_fidelity()),
        num(*record.non_gaussianity.last().unwrap_or(&f64::NAN)),
        num(record.cumulative_success_prob),
    ]);
    if let Some(file) = pulse {
        let mut params = c.params;
        params.lambda = pulse_lambda(&c, params.lambda, file)?;
        let ss = run_single_shot(&params, c.n_th, &ss_config(&c, file), space)?;
        row.extend([num(ss.final_mean_n()), num(ss.final_fidelity()), num(ss.cumulative_success_prob)]);
    }
    log::info!("sweep cell {} done: <n> = {:.4e}", cell.index, record.final_mean_n());
    Ok(CellResult { row, series: timeseries(&record) })
}

fn sweep(cfg: &RunConfig, bundle: &mut Bundle) -> Result<(), CliError> {
    let pulse = match cfg.pulse {
        Some(_) => Some(load_pulse(cfg)?),
        None => None,
    };
    let grid = cells(&cfg.sweep);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    let results: Vec<Result<CellResult, CliError>> =
        pool.install(|| grid.par_iter().map(|cell| run_cell(cfg, cell, pulse.as_ref())).collect());

    let mut columns: Vec<String> = cfg.sweep.iter().map(|(a, _)| a.column().to_string()).collect();
    columns.extend(
        ["final_mean_n", "min_mean_n", "min_step", "final_fidelity", "final_delta_g", "p_cumulative"].map(String::from),
    );
    if pulse.is_some() {
        columns.extend(["ss_mean_n", "ss_fidelity", "ss_p"].map(String::from));
    }
    let mut table = Table::new(&columns);
    for (cell, result) in grid.iter().zip(results) {
        let result = result?;
        bundle.table(&format!("cells/cell_{:04}.csv", cell.index), &result.series)?;
        table.push(result.row);
    }
    bundle.table("sweep.csv", &table)?;
    let axes: Vec<&str> = cfg.sweep.iter().map(|(a, _)| a.column()).collect();
    let (name, body) = plots::sweep_script(&axes);
    bundle.text(&name, "script", &body)?;
    bundle.note("cells", grid.len());
    println!("sweep: {} cells", grid.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_cartesian_in_axis_order() {
        let g = cells(&[(Axis::NReps, vec![5.0, 10.0]), (Axis::NTh, vec![1.0, 2.0, 3.0])]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0].values, vec![(Axis::NReps, 5.0), (Axis::NTh, 1.0)]);
        assert_eq!(g[4].values, vec![(Axis::NReps, 10.0), (Axis::NTh, 2.0)]);
        assert_eq!(g[5].index, 5);
    }
}
