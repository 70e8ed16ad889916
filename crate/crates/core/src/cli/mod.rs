//! Command-line front end. Every subcommand is also callable as a function
//! so scripts and tests can drive it without spawning a process.

mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use manifest::{sha256_hex, RunManifest};

use crate::codec::{BlockRecord, CodecConfig, ToolFlags};
use crate::eval::{
    bd_rate, curve_from_rows, read_rd_csv, ref_usage_by_frame, sequence_report, write_rd_csv, write_ref_usage_csv,
    BDResult, RdRow, RefUsageStats,
};
use crate::frame::{read_y4m, write_y4m, Frame, Y4mHeader, LOSSLESS_PSNR_DB};
use crate::stenet::{CallLog, Stenet};
use crate::stew::{
    decode_sequence_with, encode_sequence, plan_sequence, schedule_trace, ActionRecord, EncodeOptions, PurityAudit,
    TraceEntry,
};

/// Environment variable holding the worker count for multi-QP runs.
pub const THREADS_ENV: &str = "STENC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "stenc", version, about = "Video codec with synthesized references and a switchable post-filter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a Y4M file into a bitstream plus stats JSON.
    Encode(EncodeArgs),
    /// Decode a bitstream to Y4M.
    Decode(DecodeArgs),
    /// BD-rate of a test RD curve against an anchor, as JSON.
    Bdrate(BdrateArgs),
    /// Print the synthesis/enhancement schedule as JSON.
    SchedTrace(SchedTraceArgs),
    /// PSNR table between two Y4M files.
    Metrics(MetricsArgs),
    /// Encode and decode at several QPs and write an RD curve CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, Default, Args)]
pub struct ToolArgs {
    /// Disable reference frame synthesis.
    #[arg(long)]
    pub no_rfs: bool,
    /// Disable the post-filter.
    #[arg(long)]
    pub no_pfe: bool,
    /// Run synthesis and enhancement as separate inferences.
    #[arg(long)]
    pub no_jise: bool,
}

impl ToolArgs {
    pub fn flags(&self) -> ToolFlags {
        ToolFlags {
            rfs: !self.no_rfs,
            pfe: !self.no_pfe,
            jise: !self.no_jise,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub qp: u8,
    /// Encode only the first K frames.
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub intra_period: u32,
    #[command(flatten)]
    pub tools: ToolArgs,
    /// Write per-block reference choices and executed actions as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Per-frame reference usage CSV.
    #[arg(long)]
    pub usage_csv: Option<PathBuf>,
    /// Stats JSON; defaults to the bitstream path with `.json` appended.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Also write the final output frames.
    #[arg(long)]
    pub recon: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Run synthesis and enhancement as separate inferences.
    #[arg(long)]
    pub no_jise: bool,
}

#[derive(Clone, Debug, Args)]
pub struct BdrateArgs {
    pub anchor: PathBuf,
    pub test: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SchedTraceArgs {
    /// Number of frames in the sequence.
    #[arg(long)]
    pub frames: u32,
    #[command(flatten)]
    pub tools: ToolArgs,
}

#[derive(Clone, Debug, Args)]
pub struct MetricsArgs {
    pub reference: PathBuf,
    pub distorted: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![22u8, 27, 32, 37, 42])]
    pub qps: Vec<u8>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub intra_period: u32,
    #[command(flatten)]
    pub tools: ToolArgs,
    /// RD curve CSV; a manifest is written next to it.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode(a) => {
            let stats = cmd_encode(&a)?;
            println!(
                "{} frames, {} bits, {:.3} kbps, Y {:.3} dB",
                stats.frames, stats.total_bits, stats.rate_kbps, stats.psnr[0]
            );
        }
        Command::Decode(a) => {
            let n = cmd_decode(&a)?;
            println!("{n} frames written to {}", a.output.display());
        }
        Command::Bdrate(a) => {
            let r = cmd_bdrate(&a)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::SchedTrace(a) => {
            println!("{}", serde_json::to_string_pretty(&cmd_sched_trace(&a))?);
        }
        Command::Metrics(a) => {
            let t = cmd_metrics(&a)?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&t)?);
            } else {
                print!("{}", t.render());
            }
        }
        Command::Sweep(a) => {
            let rows = cmd_sweep(&a)?;
            for r in rows {
                println!("qp {:2}  {:10.3} kbps  Y {:.3} dB", r.qp, r.rate_kbps, r.psnr_y);
            }
        }
    }
    Ok(())
}

/// Worker count from the environment, or the machine's parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn load_y4m(path: &Path, limit: Option<usize>) -> anyhow::Result<(Y4mHeader, Vec<Frame>)> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let (h, mut frames) = read_y4m(&data).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(k) = limit {
        ensure!(k > 0, "--frames must be positive");
        ensure!(k <= frames.len(), "{} has {} frames, {k} requested", path.display(), frames.len());
        frames.truncate(k);
    }
    Ok((h, frames))
}

fn write_file(path: &Path, data: &[u8]) -> anyhow::Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameStats {
    pub poc: u32,
    pub bits: u64,
    pub psnr: [f64; 3],
    pub recon_psnr: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct EncodeStats {
    pub manifest: RunManifest,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub qp: u8,
    pub tools: ToolFlags,
    pub total_bits: u64,
    pub rate_kbps: f64,
    /// Final output quality per component.
    pub psnr: [f64; 3],
    pub recon_psnr: [f64; 3],
    pub lossless: [bool; 3],
    pub per_frame: Vec<FrameStats>,
    pub ref_usage: RefUsageStats,
    /// `[both_virtual, one_virtual, none]`, absent without inter blocks.
    pub ref_usage_fractions: Option<[f64; 3]>,
    pub calls: BTreeMap<&'static str, u64>,
    pub actions: usize,
    pub audit: PurityAudit,
    /// SHA-256 of each final output frame.
    pub output_frame_hashes: Vec<String>,
}

#[derive(Serialize)]
struct TraceFrame<'a> {
    poc: u32,
    usage: RefUsageStats,
    blocks: &'a [BlockRecord],
}

#[derive(Serialize)]
struct TraceFile<'a> {
    frames: Vec<TraceFrame<'a>>,
    actions: &'a [ActionRecord],
}

fn frame_hashes(frames: &[Frame]) -> Vec<String> {
    frames.iter().map(|f| manifest::hex(&f.digest())).collect()
}

/// Everything an encode produces, in memory.
pub struct EncodeRun {
    pub stats: EncodeStats,
    pub bitstream: Vec<u8>,
    pub outputs: Vec<Frame>,
    pub blocks: BTreeMap<u32, Vec<BlockRecord>>,
    pub actions: Vec<ActionRecord>,
}

/// Encodes frames and computes the stats without touching the file system.
pub fn encode_frames(
    frames: &[Frame],
    fps: f64,
    config: CodecConfig,
    tools: ToolFlags,
    mut manifest: RunManifest,
) -> anyhow::Result<EncodeRun> {
    let opts = EncodeOptions { config, tools };
    let log = CallLog::new();
    let enc = encode_sequence(frames, &opts, &Stenet::default(), &log)?;
    let s = enc.session;
    s.audit.ensure_clean()?;
    let total_bits = 8 * enc.bitstream.len() as u64;
    let out = sequence_report(frames, &s.outputs, total_bits, fps)?;
    let rec = sequence_report(frames, &s.recons, total_bits, fps)?;
    let (_, usage) = ref_usage_by_frame(&s.blocks)?;
    let per_frame = out
        .per_frame
        .iter()
        .zip(&rec.per_frame)
        .map(|(o, r)| FrameStats {
            poc: o.poc,
            bits: enc.frame_bits.get(&o.poc).copied().unwrap_or(0),
            psnr: o.psnr,
            recon_psnr: r.psnr,
        })
        .collect();
    manifest.add_output("bitstream", &enc.bitstream);
    let output_frame_hashes = frame_hashes(&s.outputs);
    Ok(EncodeRun {
        stats: EncodeStats {
            manifest,
            width: frames[0].width(),
            height: frames[0].height(),
            frames: frames.len(),
            qp: opts.config.qp,
            tools,
            total_bits,
            rate_kbps: out.rate_kbps,
            psnr: out.psnr,
            recon_psnr: rec.psnr,
            lossless: out.lossless,
            per_frame,
            ref_usage: usage,
            ref_usage_fractions: usage.fractions(),
            calls: log.snapshot(),
            actions: s.actions.len(),
            audit: s.audit,
            output_frame_hashes,
        },
        bitstream: enc.bitstream,
        outputs: s.outputs,
        blocks: s.blocks,
        actions: s.actions,
    })
}

fn codec_config(qp: u8, intra_period: u32, h: &Y4mHeader) -> CodecConfig {
    CodecConfig {
        qp,
        intra_period,
        fps_num: h.fps_num,
        fps_den: h.fps_den.max(1),
        ..CodecConfig::default()
    }
}

pub fn cmd_encode(a: &EncodeArgs) -> anyhow::Result<EncodeStats> {
    let (h, frames) = load_y4m(&a.input, a.frames)?;
    let input_bytes = fs::read(&a.input)?;
    let config = codec_config(a.qp, a.intra_period, &h);
    let tools = a.tools.flags();
    let manifest = RunManifest::new(&a.input, &input_bytes, vec![a.qp], frames.len(), tools, &config)?;
    let run = encode_frames(&frames, h.fps(), config, tools, manifest)?;
    let EncodeRun {
        mut stats,
        bitstream,
        outputs,
        blocks,
        actions,
    } = run;
    write_file(&a.output, &bitstream)?;
    stats.manifest.outputs.push(a.output.display().to_string());
    if let Some(p) = &a.recon {
        let y4m = write_y4m(&h, &outputs)?;
        write_file(p, &y4m)?;
        stats.manifest.add_output("recon", &y4m);
        stats.manifest.outputs.push(p.display().to_string());
    }
    let (per_usage, _) = ref_usage_by_frame(&blocks)?;
    if let Some(p) = &a.usage_csv {
        let mut buf = Vec::new();
        write_ref_usage_csv(&mut buf, &per_usage)?;
        write_file(p, &buf)?;
        stats.manifest.outputs.push(p.display().to_string());
    }
    if let Some(p) = &a.trace {
        let t = TraceFile {
            frames: blocks
                .iter()
                .map(|(&poc, b)| TraceFrame {
                    poc,
                    usage: per_usage[&poc],
                    blocks: b,
                })
                .collect(),
            actions: &actions,
        };
        write_file(p, &serde_json::to_vec_pretty(&t)?)?;
        stats.manifest.outputs.push(p.display().to_string());
    }
    let stats_path = a.stats.clone().unwrap_or_else(|| with_suffix(&a.output, ".json"));
    stats.manifest.outputs.push(stats_path.display().to_string());
    write_file(&stats_path, &serde_json::to_vec_pretty(&stats)?)?;
    Ok(stats)
}

/// Decodes to a Y4M file and returns the frame count.
pub fn cmd_decode(a: &DecodeArgs) -> anyhow::Result<usize> {
    let data = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let dec = decode_sequence_with(&data, !a.no_jise, &Stenet::default(), &CallLog::new())
        .with_context(|| format!("decoding {}", a.input.display()))?;
    dec.session.audit.ensure_clean()?;
    let h = Y4mHeader::new(dec.header.width as usize, dec.header.height as usize);
    write_file(&a.output, &write_y4m(&h, &dec.session.outputs)?)?;
    Ok(dec.session.outputs.len())
}

fn read_curve_csv(path: &Path) -> anyhow::Result<Vec<RdRow>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_rd_csv(f).with_context(|| format!("parsing {}", path.display()))
}

pub fn cmd_bdrate(a: &BdrateArgs) -> anyhow::Result<BDResult> {
    let anchor = curve_from_rows(&read_curve_csv(&a.anchor)?).context("anchor curve")?;
    let test = curve_from_rows(&read_curve_csv(&a.test)?).context("test curve")?;
    let r = bd_rate(&anchor, &test)?;
    if let Some(p) = &a.output {
        write_file(p, &serde_json::to_vec_pretty(&r)?)?;
    }
    Ok(r)
}

pub fn cmd_sched_trace(a: &SchedTraceArgs) -> Vec<TraceEntry> {
    schedule_trace(&plan_sequence(a.frames, a.tools.flags()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricsTable {
    pub frames: Vec<[f64; 3]>,
    pub mean: [f64; 3],
    pub lossless: [bool; 3],
}

impl MetricsTable {
    pub fn render(&self) -> String {
        let cell = |v: f64| {
            if v == LOSSLESS_PSNR_DB {
                format!("{:>10}", "lossless")
            } else {
                format!("{v:>10.4}")
            }
        };
        let mut s = format!("{:>6} {:>10} {:>10} {:>10}\n", "poc", "psnr_y", "psnr_u", "psnr_v");
        for (i, p) in self.frames.iter().enumerate() {
            s += &format!("{i:>6} {} {} {}\n", cell(p[0]), cell(p[1]), cell(p[2]));
        }
        s += &format!("{:>6} {} {} {}\n", "mean", cell(self.mean[0]), cell(self.mean[1]), cell(self.mean[2]));
        s
    }
}

pub fn cmd_metrics(a: &MetricsArgs) -> anyhow::Result<MetricsTable> {
    let (_, x) = load_y4m(&a.reference, None)?;
    let (_, y) = load_y4m(&a.distorted, None)?;
    let r = sequence_report(&x, &y, 0, 1.0)?;
    Ok(MetricsTable {
        frames: r.per_frame.iter().map(|f| f.psnr).collect(),
        mean: r.psnr,
        lossless: r.lossless,
    })
}

/// One encode and decode with the closed loop checked.
fn sweep_point(frames: &[Frame], fps: f64, config: CodecConfig, tools: ToolFlags) -> anyhow::Result<(RdRow, Vec<u8>)> {
    let qp = config.qp;
    let enc = encode_sequence(frames, &EncodeOptions { config, tools }, &Stenet::default(), &CallLog::new())?;
    enc.session.audit.ensure_clean()?;
    let dec = decode_sequence_with(&enc.bitstream, tools.jise, &Stenet::default(), &CallLog::new())?;
    if dec.session.outputs != enc.session.outputs {
        bail!("decoder output differs from encoder output at qp {qp}");
    }
    let rep = sequence_report(frames, &enc.session.outputs, 8 * enc.bitstream.len() as u64, fps)?;
    Ok((
        RdRow {
            qp,
            rate_kbps: rep.rate_kbps,
            psnr_y: rep.psnr[0],
            psnr_u: rep.psnr[1],
            psnr_v: rep.psnr[2],
        },
        enc.bitstream,
    ))
}

pub fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<Vec<RdRow>> {
    ensure!(!a.qps.is_empty(), "no QPs given");
    let (h, frames) = load_y4m(&a.input, a.frames)?;
    let input_bytes = fs::read(&a.input)?;
    let tools = a.tools.flags();
    let base = codec_config(0, a.intra_period, &h);
    let mut manifest = RunManifest::new(&a.input, &input_bytes, a.qps.clone(), frames.len(), tools, &base)?;
    let workers = thread_count().min(a.qps.len());
    let mut results: Vec<Option<anyhow::Result<(RdRow, Vec<u8>)>>> = (0..a.qps.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (w, chunk) in results.chunks_mut(a.qps.len().div_ceil(workers)).enumerate() {
            let start = w * a.qps.len().div_ceil(workers);
            let (frames, base, qps) = (&frames, &base, &a.qps);
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let config = CodecConfig {
                        qp: qps[start + i],
                        ..base.clone()
                    };
                    *slot = Some(sweep_point(frames, h.fps(), config, tools));
                }
            });
        }
    });
    let mut rows = Vec::new();
    for r in results {
        let (row, bits) = r.expect("every QP ran")?;
        manifest.add_output(&format!("qp{}", row.qp), &bits);
        rows.push(row);
    }
    let mut buf = Vec::new();
    write_rd_csv(&mut buf, &rows)?;
    write_file(&a.output, &buf)?;
    manifest.add_output("curve", &buf);
    manifest.outputs.push(a.output.display().to_string());
    let mpath = with_suffix(&a.output, ".manifest.json");
    manifest.outputs.push(mpath.display().to_string());
    write_file(&mpath, &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(rows)
}
