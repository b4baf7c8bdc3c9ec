//! One function per subcommand. Each returns [`Status`] for completed runs and
//! an error for unusable input.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::Serialize;
use wavebank::cascade::{scaling_function, wavelet_from_scaling, GridFunction};
use wavebank::design::{
    daubechies4, lifting_factorize, lifting_recompose, six_tap_from_angles, unitary_from_projections, ProjectionParam,
};
use wavebank::filterbank::{check_qmf, dual_filters, filters_from_polyphase, polyphase_from_filters, QmfReport};
use wavebank::io::{read_signal_csv, write_grid_csv, write_grid_svg, write_signal_csv};
use wavebank::laurent::is_unitary_on_torus;
use wavebank::operators::{
    packet_decompose, packet_reconstruct, pyramid_decompose, pyramid_reconstruct, PacketPartition, Signal,
};
use wavebank::transfer::{fixed_point_check, per_report, per_samples, spectrum, PerReport, SpectrumReport, TransferSpec, PERIPHERAL_TOL};
use wavebank::{Complex64, Error, FilterBank, LaurentPoly, MatLaurentPoly};

use crate::{CascadeArgs, DesignArgs, LiftArgs, PacketsArgs, PyramidArgs, TransferArgs, VerifyArgs};

#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The workflow ran but a verification did not hold.
    Failed,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Ok
        } else {
            Status::Failed
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn read_bank(path: &Path) -> Result<FilterBank> {
    read_json(path)
}

fn read_signal(path: &Path) -> Result<Signal> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_signal_csv(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn write_signal(path: &Path, s: &Signal) -> Result<()> {
    let mut out = BufWriter::new(create(path)?);
    write_signal_csv(&mut out, s)?;
    out.flush()?;
    Ok(())
}

fn write_grid(csv: &Path, svg: Option<&Path>, g: &GridFunction) -> Result<()> {
    let mut out = BufWriter::new(create(csv)?);
    write_grid_csv(&mut out, g)?;
    out.flush()?;
    if let Some(svg) = svg {
        let mut out = BufWriter::new(create(svg)?);
        write_grid_svg(&mut out, g)?;
        out.flush()?;
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create directory {}", path.display()))
}

/// Prints `report` to stdout and optionally to a file.
fn emit<T: Serialize>(report: &T, output: Option<&Path>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, report)?;
    writeln!(stdout)?;
    if let Some(path) = output {
        write_json(path, report)?;
    }
    Ok(())
}

pub fn design(args: &DesignArgs, seed: u64) -> Result<Status> {
    let bank = if args.d4 {
        daubechies4()
    } else if args.haar {
        FilterBank::haar()
    } else if let Some(angles) = &args.six_tap {
        six_tap_from_angles(angles[0], angles[1])
    } else {
        let params: Vec<ProjectionParam> = match (&args.projections, args.random) {
            (Some(path), _) => read_json(path)?,
            (None, Some(k)) => {
                let mut rng = StdRng::seed_from_u64(seed);
                (0..k)
                    .map(|_| ProjectionParam { lambda: rng.gen_range(0.0..=1.0), theta: rng.gen_range(0.0..2.0 * PI) })
                    .collect()
            }
            (None, None) => bail!("no design source given"),
        };
        for (i, p) in params.iter().enumerate() {
            p.validate().with_context(|| format!("projection parameter {i}"))?;
        }
        filters_from_polyphase(&unitary_from_projections(&params)?)?
    };
    write_json(&args.output, &bank)?;
    if let Some(path) = &args.dual {
        let pair = dual_filters(&polyphase_from_filters(&bank), args.grid)?;
        write_json(path, &pair.dual)?;
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    qmf: QmfReport,
    polyphase_unitary: bool,
    polyphase_residual: f64,
}

pub fn verify(args: &VerifyArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    let qmf = check_qmf(&bank, args.grid, args.tol);
    let unitary = is_unitary_on_torus(&polyphase_from_filters(&bank), args.grid, args.tol);
    let pass = qmf.pass && qmf.lowpass_ok;
    let report = VerifyReport {
        pass,
        qmf,
        polyphase_unitary: unitary.unitary,
        polyphase_residual: unitary.max_residual,
    };
    emit(&report, args.output.as_deref())?;
    Ok(Status::from_pass(pass))
}

#[derive(Serialize)]
struct CascadeReport {
    iterations: usize,
    last_difference: Option<f64>,
    converged: bool,
    diverged: bool,
    support: (f64, f64),
}

pub fn cascade(args: &CascadeArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    let result = scaling_function(&bank, args.j_level, args.iters)?;
    let phi = &result.phi;
    write_grid(&args.output, args.plot.as_deref(), phi)?;
    if let Some(dir) = &args.wavelets {
        create_dir(dir)?;
        for (j, psi) in wavelet_from_scaling(&bank, phi).iter().enumerate() {
            let j = j + 1;
            let svg = dir.join(format!("psi_{j}.svg"));
            write_grid(&dir.join(format!("psi_{j}.csv")), Some(&svg), psi)?;
        }
    }
    let h = phi.step();
    let report = CascadeReport {
        iterations: result.iterations(),
        last_difference: result.last_difference(),
        converged: result.converged,
        diverged: result.diverged,
        support: (phi.support_lo() as f64 * h, phi.support_hi() as f64 * h),
    };
    emit(&report, None)?;
    Ok(Status::from_pass(!result.diverged))
}

fn parse_leaf(s: &str) -> Result<(usize, usize)> {
    let (k, n) = s.trim().split_once(':').ok_or_else(|| anyhow!("leaf {s:?} is not of the form k:n"))?;
    let k = k.trim().parse().with_context(|| format!("leaf {s:?}"))?;
    let n = n.trim().parse().with_context(|| format!("leaf {s:?}"))?;
    Ok((k, n))
}

#[derive(Serialize)]
struct ReconstructionReport {
    pass: bool,
    bands: usize,
    reconstruction_error: f64,
    energy_in: f64,
    energy_out: f64,
}

fn reconstruction_report(input: &Signal, rebuilt: &Signal, bands: usize, energy_out: f64, tol: f64) -> ReconstructionReport {
    let reconstruction_error = input.l2_distance(rebuilt);
    let energy_in = input.energy();
    ReconstructionReport {
        pass: reconstruction_error <= tol * energy_in.sqrt().max(1.0),
        bands,
        reconstruction_error,
        energy_in,
        energy_out,
    }
}

pub fn packets(args: &PacketsArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    let signal = read_signal(&args.signal)?;
    let partition = match (&args.leaves, args.depth) {
        (Some(leaves), _) => PacketPartition::new(leaves.iter().map(|s| parse_leaf(s)).collect::<Result<Vec<_>>>()?),
        (None, depth) => PacketPartition::full(depth.unwrap_or(1), bank.scale_n()),
    };
    let leaves = packet_decompose(&signal, &bank, &partition)?;
    create_dir(&args.output)?;
    for (&(k, n), s) in &leaves {
        write_signal(&args.output.join(format!("{k}_{n}.csv")), s)?;
    }
    let rebuilt = packet_reconstruct(&leaves, &bank)?;
    let energy_out = leaves.values().map(Signal::energy).sum();
    let report = reconstruction_report(&signal, &rebuilt, leaves.len(), energy_out, args.tol);
    emit(&report, None)?;
    Ok(Status::from_pass(report.pass))
}

pub fn pyramid(args: &PyramidArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    let signal = read_signal(&args.signal)?;
    let p = pyramid_decompose(&signal, &bank, args.levels)?;
    create_dir(&args.output)?;
    write_signal(&args.output.join("coarse.csv"), &p.coarse)?;
    let mut bands = 1;
    for (level, details) in p.details.iter().enumerate() {
        for (j, d) in details.iter().enumerate() {
            write_signal(&args.output.join(format!("detail_{}_{}.csv", level + 1, j + 1)), d)?;
            bands += 1;
        }
    }
    let rebuilt = pyramid_reconstruct(&p, &bank)?;
    let report = reconstruction_report(&signal, &rebuilt, bands, p.energy(), args.tol);
    emit(&report, None)?;
    Ok(Status::from_pass(report.pass))
}

#[derive(Serialize)]
struct TransferReport {
    pass: bool,
    band_m: usize,
    spectrum: SpectrumReport,
    periodization: PerReport,
    fixed_point_residual: f64,
}

pub fn transfer(args: &TransferArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    let spec = TransferSpec::from_bank(&bank)?;
    let spectrum = spectrum(&spec, PERIPHERAL_TOL)?;
    let samples = per_samples(&bank, args.per_grid, args.n_max)?;
    let periodization = per_report(&samples);
    let fixed_point_residual = fixed_point_check(&bank, &samples)?;
    let pass = spectrum.pf_holds && periodization.is_constant_1;
    let report = TransferReport { pass, band_m: spec.band_m(), spectrum, periodization, fixed_point_residual };
    emit(&report, args.output.as_deref())?;
    Ok(Status::from_pass(pass))
}

#[derive(Serialize)]
struct LiftOutput {
    /// `A(z) = diag(1, c z^deg) · Π steps`.
    det_factor: DetFactor,
    steps: Vec<wavebank::design::LiftingStep>,
    residual: f64,
}

#[derive(Serialize)]
struct DetFactor {
    c: Complex64,
    deg: i32,
}

pub fn lift(args: &LiftArgs) -> Result<Status> {
    let bank = read_bank(&args.bank)?;
    if bank.scale_n() != 2 {
        bail!("lifting needs a two-band bank, got N = {}", bank.scale_n());
    }
    let a = polyphase_from_filters(&bank);
    let det = a.det().trimmed(args.tol);
    let (c, deg) = det
        .as_monomial()
        .ok_or_else(|| anyhow!("polyphase determinant {det:?} is not a monomial"))?;
    let inv = LaurentPoly::monomial(c.inv(), -deg);
    let scale = MatLaurentPoly::from_entries(&[
        vec![LaurentPoly::one(), LaurentPoly::zero()],
        vec![LaurentPoly::zero(), inv],
    ])?;
    let normalized = scale.checked_mul(&a)?;
    match lifting_factorize(&normalized) {
        Ok(steps) => {
            let residual = lifting_recompose(&steps).distance(&normalized);
            writeln!(std::io::stdout(), "{} lifting steps, residual {residual:.3e}", steps.len())?;
            write_json(&args.output, &LiftOutput { det_factor: DetFactor { c, deg }, steps, residual })?;
            Ok(Status::Ok)
        }
        Err(e @ Error::FactorizationFailed { .. }) => {
            eprintln!("{e}");
            Ok(Status::Failed)
        }
        Err(e) => Err(e.into()),
    }
}
