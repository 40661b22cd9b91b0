//! Subcommand arguments and their implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use nbqc::anneal::{
    construct_base, default_step1_t0, EnergyParams, SaConfig, DEFAULT_I_MAX, DEFAULT_STEP2_T0, DEFAULT_T_END,
};
use nbqc::bounds::bound_curve;
use nbqc::formats::{bound_csv, fer_csv, parse_spectrum_csv, spectrum_csv, MatrixFile, MatrixKind};
use nbqc::graph::{ace_of_cycle, incidence_to_base, tanner_cycles, tanner_girth};
use nbqc::labeler::{candidates_for_base, label_coefficients, optimize_degrees, LabelOptions, DEFAULT_G_CAP};
use nbqc::qc::Encoder;
use nbqc::sim::{expand_qc, run_fer, DEFAULT_MAX_ITER};
use nbqc::spectrum::ensemble_avg_spectrum;
use nbqc::{seed, CodeMatrices, EnsembleSpec, FerConfig, GfContext, WeightSpectrum};

use crate::grid::parse_snr_grid;
use crate::manifest::{default_manifest_path, FileDigest, RunManifest, TOOL};

/// What a finished command reports back to `main`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Status {
    /// Some simulation point stopped at the frame limit.
    pub truncated: bool,
}

/// A command whose parameters can be stored in a manifest and replayed.
pub trait Job: Clone + Serialize + DeserializeOwned {
    const NAME: &'static str;
    fn inputs_mut(&mut self) -> Vec<&mut PathBuf>;
    fn outputs_mut(&mut self) -> Vec<&mut PathBuf>;
    fn manifest_mut(&mut self) -> &mut Option<PathBuf>;
    fn seed(&self) -> u64 {
        0
    }
    fn default_manifest(&self) -> Option<PathBuf> {
        None
    }
    fn execute(&self) -> Result<Status>;

    fn inputs(&self) -> Vec<PathBuf> {
        self.clone().inputs_mut().into_iter().map(|p| p.clone()).collect()
    }

    fn outputs(&self) -> Vec<PathBuf> {
        self.clone().outputs_mut().into_iter().map(|p| p.clone()).collect()
    }
}

/// Runs a job with absolute paths and writes its manifest when asked to.
pub fn run_job<J: Job>(mut job: J) -> Result<Status> {
    for p in job.inputs_mut() {
        *p = std::path::absolute(&*p)?;
    }
    for p in job.outputs_mut() {
        *p = std::path::absolute(&*p)?;
    }
    if let Some(p) = job.manifest_mut() {
        *p = std::path::absolute(&*p)?;
    }
    let manifest = job.manifest_mut().clone().or_else(|| job.default_manifest());
    let inputs = job
        .inputs()
        .iter()
        .map(|p| FileDigest::of(p))
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let status = job.execute()?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(path) = manifest {
        let outputs = job
            .outputs()
            .iter()
            .map(|p| FileDigest::of(p))
            .collect::<Result<Vec<_>>>()?;
        RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: J::NAME.into(),
            params: serde_json::to_value(&job)?,
            seed: job.seed(),
            inputs,
            outputs,
            wall_time_s: wall,
        }
        .write(&path)?;
        println!("manifest: {}", path.display());
    }
    Ok(status)
}

/// Re-runs the job of a manifest and compares output digests. Outputs go to
/// a scratch directory unless `in_place` is set.
pub fn replay_job<J: Job>(m: &RunManifest, in_place: bool) -> Result<bool> {
    let mut job: J =
        serde_json::from_value(m.params.clone()).context("manifest parameters do not match the command")?;
    for (want, path) in m.inputs.iter().zip(job.inputs()) {
        let now = FileDigest::of(&path)?;
        if now.sha256 != want.sha256 {
            bail!("input {} changed since the recorded run", path.display());
        }
    }
    let scratch = tempfile::tempdir()?;
    if !in_place {
        for (i, p) in job.outputs_mut().into_iter().enumerate() {
            let name = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            *p = scratch.path().join(format!("{i}-{name}"));
        }
    }
    *job.manifest_mut() = None;
    job.execute()?;
    let mut same = true;
    for (want, path) in m.outputs.iter().zip(job.outputs()) {
        let got = FileDigest::of(&path)?;
        let ok = got.sha256 == want.sha256;
        same &= ok;
        println!("{} {}", if ok { "identical" } else { "DIFFERS  " }, want.path.display());
    }
    Ok(same)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<MatrixFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MatrixFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ConstructBase {
    /// Rows of the base matrix (hypergraph vertices).
    #[arg(long)]
    pub rows: usize,
    /// Columns of the base matrix.
    #[arg(long)]
    pub cols: usize,
    /// Number of weight-3 columns; the others have weight 2.
    #[arg(long, default_value_t = 0)]
    pub c3: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Annealing iterations of each step.
    #[arg(long, default_value_t = DEFAULT_I_MAX)]
    pub iters: u64,
    /// Step-1 initial temperature [default: tabulated value for the nearest c3].
    #[arg(long)]
    pub t0: Option<f64>,
    /// Step-2 initial temperature.
    #[arg(long, default_value_t = DEFAULT_STEP2_T0)]
    pub t0_step2: f64,
    #[arg(long, default_value_t = DEFAULT_T_END)]
    pub t_end: f64,
    /// Longest cycle (in Tanner length) reported.
    #[arg(long, default_value_t = 12)]
    pub g_cap: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Write a run manifest here.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

impl Job for ConstructBase {
    const NAME: &'static str = "construct-base";

    fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        Vec::new()
    }

    fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.out]
    }

    fn manifest_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.manifest
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<Status> {
        if self.cols < self.rows + self.c3 {
            bail!(
                "infeasible geometry: cols - c3 = {} weight-2 columns cannot hold a Hamiltonian cycle on {} rows",
                self.cols as i64 - self.c3 as i64,
                self.rows
            );
        }
        let t0 = self.t0.unwrap_or_else(|| default_step1_t0(self.c3));
        let cfg1 = SaConfig::new(self.iters, t0, self.t_end, seed::derive(self.seed, "construct.step1"))?;
        let cfg2 = SaConfig::new(
            self.iters,
            self.t0_step2,
            self.t_end,
            seed::derive(self.seed, "construct.step2"),
        )?;
        let h = construct_base(
            self.rows,
            self.cols - self.c3,
            self.c3,
            &cfg1,
            &cfg2,
            &EnergyParams::default(),
        )?;
        let b = incidence_to_base(&h);
        write(&self.out, &MatrixFile::base(&b).render())?;
        let hist: BTreeMap<usize, usize> = (0..b.cols()).fold(BTreeMap::new(), |mut m, c| {
            *m.entry(b.col_weight(c)).or_insert(0) += 1;
            m
        });
        println!("base {}x{}: column weights {hist:?}", b.rows(), b.cols());
        match tanner_girth(&b, self.g_cap) {
            Some(g) => {
                let cycles: Vec<_> = tanner_cycles(&b, g).into_iter().filter(|c| c.len() == g).collect();
                let aces: Vec<usize> = cycles.iter().map(|c| ace_of_cycle(&b, c)).collect();
                println!("tanner girth {g}, {} shortest cycles", cycles.len());
                println!(
                    "ace of shortest cycles: min {}, max {}",
                    aces.iter().min().unwrap(),
                    aces.iter().max().unwrap()
                );
            }
            None => println!("tanner girth > {}", self.g_cap),
        }
        Ok(Status::default())
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Label {
    /// Base matrix file.
    #[arg(long)]
    pub base: PathBuf,
    /// Lifting factor L.
    #[arg(long)]
    pub lifting: usize,
    /// Field degree m of GF(2^m).
    #[arg(long)]
    pub field: u32,
    /// Constituent-code candidates per row weight.
    #[arg(long, default_value_t = 50)]
    pub candidates: usize,
    /// Attempts without improvement before the coefficient search stops.
    #[arg(long, default_value_t = 1000)]
    pub imax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest cycle (Tanner length) examined.
    #[arg(long, default_value_t = DEFAULT_G_CAP)]
    pub g_cap: usize,
    #[arg(long)]
    pub out_degrees: PathBuf,
    #[arg(long)]
    pub out_coeffs: PathBuf,
    /// Write a run manifest here.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

impl Job for Label {
    const NAME: &'static str = "label";

    fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.base]
    }

    fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.out_degrees, &mut self.out_coeffs]
    }

    fn manifest_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.manifest
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn execute(&self) -> Result<Status> {
        let base = read_matrix(&self.base)?.to_base()?;
        if self.lifting < 1 {
            bail!("lifting factor must be positive");
        }
        let ctx = GfContext::new(self.field, None)?;
        let degrees = optimize_degrees(
            &base,
            self.lifting,
            seed::derive(self.seed, "label.degrees"),
            self.g_cap,
        )?;
        let cands = candidates_for_base(
            &ctx,
            &base,
            self.candidates,
            seed::derive(self.seed, "label.candidates"),
        )?;
        let opts = LabelOptions {
            i_max: self.imax,
            seed: seed::derive(self.seed, "label.coeffs"),
            g_cap: self.g_cap,
            require_encodable: true,
        };
        let lab = label_coefficients(&ctx, &base, &degrees, self.lifting, &cands, &opts)?;
        write(
            &self.out_degrees,
            &MatrixFile::degrees(lab.code.degrees(), self.lifting).render(),
        )?;
        write(
            &self.out_coeffs,
            &MatrixFile::coeffs(lab.code.coeffs(), self.field).render(),
        )?;
        match lab.girth {
            Some(g) => println!("generalized girth {g}, {} shortest lifted cycles", lab.multiplicity),
            None => println!("generalized girth > {}", self.g_cap),
        }
        println!(
            "encodable: {}; {} attempts",
            if lab.encodable { "yes" } else { "no" },
            lab.attempts
        );
        Ok(Status::default())
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    /// Number of strips J.
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    /// Maximum row weight K (blocks per strip).
    #[arg(long = "K", visible_alias = "k")]
    pub k: usize,
    /// Row weight of each strip, comma separated [default: K for every strip].
    #[arg(long, value_delimiter = ',')]
    pub strip_weights: Option<Vec<usize>>,
    /// Rows per strip M.
    #[arg(
        long = "M",
        visible_alias = "m-rows",
        conflicts_with = "binary_length",
        required_unless_present = "binary_length"
    )]
    pub m_rows: Option<usize>,
    /// Binary code length; must equal M·K·m for an integer M.
    #[arg(long)]
    pub binary_length: Option<usize>,
    /// Field degree m (1 for binary).
    #[arg(long, default_value_t = 1)]
    pub field: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Write a run manifest here.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

impl Job for Spectrum {
    const NAME: &'static str = "spectrum";

    fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        Vec::new()
    }

    fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.out]
    }

    fn manifest_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.manifest
    }

    fn execute(&self) -> Result<Status> {
        let weights = self.strip_weights.clone().unwrap_or_else(|| vec![self.k; self.j]);
        if weights.len() != self.j {
            bail!("{} strip weights given for J = {}", weights.len(), self.j);
        }
        let m_rows = match (self.m_rows, self.binary_length) {
            (Some(m), _) => m,
            (None, Some(n)) => EnsembleSpec::from_length(self.j, self.k, n, self.field)?.m_rows,
            (None, None) => bail!("give --M or --binary-length"),
        };
        let spec = EnsembleSpec::new(self.k, weights, m_rows, self.field)?;
        let s = ensemble_avg_spectrum(&spec);
        write(&self.out, &spectrum_csv(&s))?;
        println!(
            "n = {} bits, design rate {:.6}, M = {}",
            spec.binary_len(),
            spec.design_rate(),
            spec.m_rows
        );
        match s.typical_min_distance() {
            Some(d) => println!("typical minimum distance {d}"),
            None => println!("cumulative average multiplicity stays below 1"),
        }
        Ok(Status::default())
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Bounds {
    /// Spectrum CSV (`w,log_avg_multiplicity`).
    #[arg(long, conflicts_with = "binomial", required_unless_present = "binomial")]
    pub spectrum: Option<PathBuf>,
    /// Use the random-coding spectrum `2^{-n(1-R)} C(n,w)`.
    #[arg(long, requires = "n")]
    pub binomial: bool,
    /// Binary block length for --binomial.
    #[arg(long)]
    pub n: Option<usize>,
    /// Code rate R; SNR is Eb/N0 in dB with sigma^2 = 1/(2R 10^(SNR/10)).
    #[arg(long)]
    pub rate: f64,
    /// SNR grid in dB, `from:step:to` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Write a run manifest here.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

impl Job for Bounds {
    const NAME: &'static str = "bounds";

    fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        self.spectrum.iter_mut().collect()
    }

    fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.out]
    }

    fn manifest_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.manifest
    }

    fn execute(&self) -> Result<Status> {
        let snrs = parse_snr_grid(&self.snr)?;
        let spectrum = match (&self.spectrum, self.n) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_spectrum_csv(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(n)) => WeightSpectrum::binomial(n, self.rate),
            (None, None) => bail!("give --spectrum or --binomial --n"),
        };
        let points = bound_curve(&spectrum, self.rate, &snrs)?;
        write(&self.out, &bound_csv(&points))?;
        println!("{:>8} {:>14} {:>14}", "snr_db", "log10 lower", "log10 upper");
        for p in &points {
            println!("{:>8} {:>14.4} {:>14.4}", p.snr_db, p.log10_lower, p.log10_upper);
        }
        Ok(Status::default())
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct Simulate {
    /// Degree matrix file.
    #[arg(long)]
    pub degrees: PathBuf,
    /// Coefficient matrix file.
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Lifting factor; must agree with the degree file header if both are given.
    #[arg(long)]
    pub lifting: Option<usize>,
    /// Field degree; must agree with the coefficient file header if both are given.
    #[arg(long)]
    pub field: Option<u32>,
    /// SNR grid in dB (Eb/N0 at the design rate), `from:step:to` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: String,
    /// Stop a point after this many frame errors.
    #[arg(long, default_value_t = 20)]
    pub target_errors: u64,
    /// Stop a point after this many frames.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_frames: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decoder threads; results do not depend on it.
    #[arg(long, env = "NBQC_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Send the all-zero codeword instead of encoding random information.
    #[arg(long)]
    pub zero_codeword: bool,
    /// FER CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path [default: <out>.manifest.json].
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

fn agree<T: PartialEq + std::fmt::Display>(what: &str, flag: Option<T>, header: Option<T>) -> Result<T> {
    match (flag, header) {
        (Some(a), Some(b)) if a != b => bail!("{what} {a} given on the command line but the file says {b}"),
        (Some(a), _) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => bail!("{what} is neither in the file header nor on the command line"),
    }
}

impl Job for Simulate {
    const NAME: &'static str = "simulate";

    fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.degrees, &mut self.coeffs]
    }

    fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        vec![&mut self.out]
    }

    fn manifest_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.manifest
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn default_manifest(&self) -> Option<PathBuf> {
        Some(default_manifest_path(&self.out))
    }

    fn execute(&self) -> Result<Status> {
        let snrs = parse_snr_grid(&self.snr)?;
        let d = read_matrix(&self.degrees)?;
        let c = read_matrix(&self.coeffs)?;
        if d.kind != MatrixKind::Degree || c.kind != MatrixKind::Coeff {
            bail!("expected a degree file and a coefficient file");
        }
        let lifting = agree("lifting factor", self.lifting, d.lifting)?;
        let m = agree("field degree", self.field, c.field)?;
        let cm = CodeMatrices::new(d.data.support(), d.data.clone(), c.data.clone(), lifting, m)?;
        let ctx = GfContext::new(m, None)?;
        let code = expand_qc(&cm, &ctx)?;
        let random_info = !self.zero_codeword && Encoder::new(&code).is_ok();
        if !self.zero_codeword && !random_info {
            println!("parity part is not invertible; sending the all-zero codeword");
        }
        let cfg = FerConfig {
            target_errors: self.target_errors,
            max_frames: self.max_frames,
            max_iter: self.max_iter,
            seed: self.seed,
            workers: self.workers,
            random_info,
        };
        let report = run_fer(&code, &snrs, &cfg)?;
        write(&self.out, &fer_csv(&report))?;
        println!(
            "{} bits, rate {:.4}; {:>6} {:>10} {:>7} {:>11} {:>6}",
            code.binary_length(),
            code.design_rate(),
            "snr_db",
            "frames",
            "errors",
            "fer",
            "iters"
        );
        for r in &report.records {
            println!(
                "{:>6} {:>10} {:>7} {:>11.4e} {:>6.2}{}",
                r.snr_db,
                r.frames,
                r.frame_errors,
                r.fer,
                r.avg_iters,
                if r.truncated { "  (frame limit)" } else { "" }
            );
        }
        Ok(Status {
            truncated: report.any_truncated(),
        })
    }
}

#[derive(Args, Clone, Debug)]
pub struct Replay {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Overwrite the recorded output files instead of using a scratch directory.
    #[arg(long)]
    pub in_place: bool,
}

impl Replay {
    pub fn execute(&self) -> Result<bool> {
        let m = RunManifest::read(&self.manifest)?;
        match m.command.as_str() {
            ConstructBase::NAME => replay_job::<ConstructBase>(&m, self.in_place),
            Label::NAME => replay_job::<Label>(&m, self.in_place),
            Spectrum::NAME => replay_job::<Spectrum>(&m, self.in_place),
            Bounds::NAME => replay_job::<Bounds>(&m, self.in_place),
            Simulate::NAME => replay_job::<Simulate>(&m, self.in_place),
            other => bail!("unknown command '{other}' in manifest"),
        }
    }
}
