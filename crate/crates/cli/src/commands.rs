use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use optpred_core::io::{self, Header, Table};
use optpred_core::sampler::sample_many;
use optpred_core::*;

use crate::args::*;
use crate::plot::{self, Series};

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Sample(a) => sample(a),
        Command::Truth(a) => truth(a),
        Command::Kernel(a) => kernel(a),
        Command::Galerkin(a) => reduced(a, ReducedKind::Galerkin, "galerkin"),
        Command::Op1(a) => reduced(a, ReducedKind::FirstOrderOp, "op1"),
        Command::Predict(a) => predict(a),
        Command::Compare(a) => compare(a),
    }
}

fn header(command: &str) -> Header {
    Header::new()
        .with("tool", "optpred")
        .with("version", VERSION)
        .with("command", command)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn save(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> optpred_core::Result<()>,
) -> Result<()> {
    let mut out = create(path)?;
    write(&mut out).with_context(|| format!("writing {}", path.display()))?;
    out.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn initial_point(model: &CoupledOscillators, data: &InitialData) -> Result<ResolvedPoint> {
    Ok(ResolvedPoint::new(vec![data.x1, data.x2], model.params())?)
}

fn sample(a: &SampleArgs) -> Result<()> {
    let model = CoupledOscillators::new(a.temp)?;
    let samples = sample_many(&model, a.n, a.seed)?;
    let h = header("sample")
        .with("n", a.n)
        .with("temp", a.temp)
        .with("seed", a.seed);
    save(&a.out, |w| io::write_samples(w, &samples, &h))
}

fn truth(a: &TruthArgs) -> Result<()> {
    let model = CoupledOscillators::new(a.temp)?;
    let r = initial_point(&model, &a.data)?;
    let stats = ensemble_truth(&model, &r, a.members, a.grid.dt, a.grid.steps, a.seed)?;
    let h = header("truth")
        .with("x1", a.data.x1)
        .with("x2", a.data.x2)
        .with("temp", a.temp)
        .with("members", a.members)
        .with("steps", a.grid.steps)
        .with("seed", a.seed);
    save(&a.out, |w| io::write_ensemble(w, &stats, &h))
}

fn kernel(a: &KernelArgs) -> Result<()> {
    ensure!(
        a.max_lag <= a.grid.steps,
        "--max-lag ({}) cannot exceed --steps ({})",
        a.max_lag,
        a.grid.steps
    );
    let model = CoupledOscillators::new(a.temp)?;
    let table = estimate_k0(
        &model,
        a.component as usize,
        a.members,
        a.grid.dt,
        a.grid.steps,
        a.max_lag,
        a.seed,
    )?;
    let h = header("kernel")
        .with("steps", a.grid.steps)
        .with("max_lag", a.max_lag);
    save(&a.out, |w| io::write_kernel(w, &table, &h))
}

fn reduced(a: &ReducedArgs, kind: ReducedKind, name: &str) -> Result<()> {
    let model = CoupledOscillators::new(a.temp)?;
    let r = initial_point(&model, &a.data)?;
    let traj = ReducedSystem::new(kind, &model).solve(&r, a.grid.dt, a.grid.steps)?;
    let h = header(name)
        .with("x1", a.data.x1)
        .with("x2", a.data.x2)
        .with("temp", a.temp)
        .with("steps", a.grid.steps);
    save(&a.out, |w| io::write_trajectory(w, &traj, &h))
}

fn predict(a: &PredictArgs) -> Result<()> {
    let (_, table) = io::read_kernel(open(&a.kernel)?)
        .with_context(|| format!("reading kernel file {}", a.kernel.display()))?;
    let dt = a.dt.unwrap_or(table.dt);
    if dt != table.dt {
        bail!(
            "--dt {dt} differs from the lag spacing {} of kernel file {}",
            table.dt,
            a.kernel.display()
        );
    }
    let steps = a.steps.unwrap_or(table.max_lag_steps());
    let meta = table.meta.clone();
    let component = table.component;
    let model = CoupledOscillators::new(meta.temperature)?;
    let r = initial_point(&model, &a.data)?;
    let sign = match a.sign {
        Sign::Consistent => SignConvention::ConsistentWithFullSystem,
        Sign::Paper => SignConvention::PaperExample2,
    };
    let traj = MemoryModel::new(table, &model)?
        .with_sign_convention(sign)
        .solve_memory(&r, dt, steps)?;
    let h = header("predict")
        .with("x1", a.data.x1)
        .with("x2", a.data.x2)
        .with("kernel", a.kernel.display())
        .with("kernel_component", component)
        .with("kernel_seed", meta.seed)
        .with("kernel_members", meta.n_members)
        .with("temp", meta.temperature)
        .with("steps", steps)
        .with("sign", sign_name(a.sign));
    save(&a.out, |w| io::write_trajectory(w, &traj, &h))
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Consistent => "consistent",
        Sign::Paper => "paper",
    }
}

struct Grid {
    t0: f64,
    dt: f64,
    len: usize,
}

fn check_grid(reference: (&Path, &Grid), other: (&Path, &Grid)) -> Result<()> {
    let (pa, a) = reference;
    let (pb, b) = other;
    if a.t0 != b.t0 || a.dt != b.dt || a.len != b.len {
        bail!(
            "grid mismatch: {} has t0={}, dt={}, {} nodes but {} has t0={}, dt={}, {} nodes; \
             compare does not resample",
            pa.display(),
            a.t0,
            a.dt,
            a.len,
            pb.display(),
            b.t0,
            b.dt,
            b.len
        );
    }
    Ok(())
}

/// Trapezoidal L2 distance on a uniform grid.
pub(crate) fn l2_distance(a: &[f64], b: &[f64], dt: f64) -> f64 {
    let n = a.len();
    let sum: f64 = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            w * (x - y).powi(2)
        })
        .sum();
    (dt * sum).sqrt()
}

fn compare(a: &CompareArgs) -> Result<()> {
    let (_, truth) = io::read_ensemble(open(&a.truth)?)
        .with_context(|| format!("reading ensemble file {}", a.truth.display()))?;
    let truth_grid = Grid {
        t0: truth.t0,
        dt: truth.dt,
        len: truth.len(),
    };
    let mut curves = Vec::new();
    for path in [&a.galerkin, &a.op1, &a.predict] {
        let (_, traj) = io::read_trajectory(open(path)?)
            .with_context(|| format!("reading trajectory file {}", path.display()))?;
        let grid = Grid {
            t0: traj.t0,
            dt: traj.dt,
            len: traj.len(),
        };
        check_grid((&a.truth, &truth_grid), (path, &grid))?;
        curves.push(traj.component(0));
    }
    let t: Vec<f64> = (0..truth.len()).map(|k| truth.time(k)).collect();
    let mean = truth.mean_component(0);
    let stderr = truth.stderr_component(0);

    let names = ["galerkin", "op1", "memory"];
    let mut h = header("compare")
        .with("truth", a.truth.display())
        .with("galerkin", a.galerkin.display())
        .with("op1", a.op1.display())
        .with("predict", a.predict.display())
        .with("t0", io::fmt_f64(truth.t0))
        .with("dt", io::fmt_f64(truth.dt));
    for (name, curve) in names.iter().zip(&curves) {
        h.set(
            format!("l2_{name}"),
            io::fmt_f64(l2_distance(&mean, curve, truth.dt)),
        );
    }
    let mut columns = vec!["t".to_string(), "truth".into(), "truth_stderr".into()];
    columns.extend(names.iter().map(|n| n.to_string()));
    let rows = (0..t.len())
        .map(|k| {
            let mut row = vec![t[k], mean[k], stderr[k]];
            row.extend(curves.iter().map(|c| c[k]));
            row
        })
        .collect();
    let table = Table {
        header: h,
        columns,
        rows,
    };
    save(&a.out_csv, |w| io::write_table(w, &table))?;

    let series = [
        Series {
            name: "truth (ensemble mean)",
            color: "#000000",
            values: &mean,
        },
        Series {
            name: "Galerkin",
            color: "#1f77b4",
            values: &curves[0],
        },
        Series {
            name: "first-order OP",
            color: "#2ca02c",
            values: &curves[1],
        },
        Series {
            name: "memory",
            color: "#d62728",
            values: &curves[2],
        },
    ];
    let svg = plot::render("Resolved component y1", "t", "y1(t)", &t, &series);
    let mut out = create(&a.out_svg)?;
    out.write_all(svg.as_bytes())
        .and_then(|()| out.flush())
        .with_context(|| format!("writing {}", a.out_svg.display()))?;
    Ok(())
}
