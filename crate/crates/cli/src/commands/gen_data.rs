//! `gen-data`: procedural shapes splits and hue-colorized digit datasets.

use std::path::PathBuf;

use clap::{Args, Subcommand};

use t3cen::datasets::colorize::{colorize_hue_shift, gray_set_from_idx, HueRange};
use t3cen::datasets::idx::read_idx;
use t3cen::datasets::manifest::{write_manifest, LabeledImageSet};
use t3cen::datasets::shapes::{generate_shapes, SplitKind};

use crate::config::write_resolved_config;
use crate::CliError;

#[derive(Args)]
pub struct GenDataArgs {
    #[command(subcommand)]
    pub source: Source,
}

#[derive(Subcommand)]
pub enum Source {
    /// Procedural wall/floor/object scenes with color splits.
    Shapes(ShapesArgs),
    /// Hue-colorized grayscale digits from IDX files.
    MnistHue(MnistHueArgs),
}

#[derive(Args)]
pub struct ShapesArgs {
    /// Split family: hue-abc, sat-abc, hsl-random, or plain.
    #[arg(long, default_value = "plain")]
    pub split: String,
    /// Images per split.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 1999)]
    pub seed: u64,
    #[command(flatten)]
    pub out: crate::OutDir,
}

#[derive(Args)]
pub struct MnistHueArgs {
    /// Directory holding {train,test}-{images,labels}-idx*-ubyte files.
    #[arg(long)]
    pub idx_dir: PathBuf,
    /// Train hue range in degrees, lo:hi.
    #[arg(long, default_value = "0:120")]
    pub train_range: String,
    /// Test hue range in degrees, lo:hi.
    #[arg(long, default_value = "120:360")]
    pub test_range: String,
    #[arg(long, default_value_t = 10000)]
    pub train_count: usize,
    #[arg(long, default_value_t = 2000)]
    pub test_count: usize,
    /// Integer box-downsampling factor applied to the source digits.
    #[arg(long, default_value_t = 1)]
    pub downsample: usize,
    #[arg(long, default_value_t = 1999)]
    pub seed: u64,
    #[command(flatten)]
    pub out: crate::OutDir,
}

fn summarize(name: &str, set: &LabeledImageSet) {
    println!(
        "{name}: {} images, class histogram {:?}",
        set.len(),
        set.class_histogram()
    );
}

pub fn run(args: GenDataArgs) -> Result<(), CliError> {
    match args.source {
        Source::Shapes(a) => run_shapes(a),
        Source::MnistHue(a) => run_mnist(a),
    }
}

fn run_shapes(a: ShapesArgs) -> Result<(), CliError> {
    let splits: Vec<(&str, SplitKind)> = match a.split.as_str() {
        "hue-abc" => vec![
            ("A", SplitKind::HueA),
            ("B", SplitKind::HueB),
            ("C", SplitKind::HueC),
        ],
        "sat-abc" => vec![
            ("A", SplitKind::SatA),
            ("B", SplitKind::SatB),
            ("C", SplitKind::SatC),
        ],
        "hsl-random" => vec![("test", SplitKind::HslRandom)],
        "plain" => vec![("all", SplitKind::HueA)],
        other => {
            return Err(CliError::Config(format!(
                "unknown split {other:?}; expected hue-abc, sat-abc, hsl-random, or plain"
            )))
        }
    };
    write_resolved_config(
        &a.out.out,
        "gen-data shapes",
        &[
            ("split", a.split.clone()),
            ("count", a.count.to_string()),
            ("size", a.size.to_string()),
            ("seed", a.seed.to_string()),
            ("out", a.out.out.display().to_string()),
        ],
    )?;
    for (name, kind) in splits {
        let mut cfg = kind.configure(a.count, a.seed);
        cfg.size = a.size;
        let set = generate_shapes(&cfg);
        let dir = a.out.out.join(name);
        write_manifest(&set, &dir, serde_json::to_value(&cfg).expect("spec"), a.seed)?;
        summarize(name, &set);
    }
    Ok(())
}

fn run_mnist(a: MnistHueArgs) -> Result<(), CliError> {
    let (train_lo, train_hi) = super::parse_range(&a.train_range).map_err(CliError::Config)?;
    let (test_lo, test_hi) = super::parse_range(&a.test_range).map_err(CliError::Config)?;
    write_resolved_config(
        &a.out.out,
        "gen-data mnist-hue",
        &[
            ("idx-dir", a.idx_dir.display().to_string()),
            ("train-range", a.train_range.clone()),
            ("test-range", a.test_range.clone()),
            ("train-count", a.train_count.to_string()),
            ("test-count", a.test_count.to_string()),
            ("downsample", a.downsample.to_string()),
            ("seed", a.seed.to_string()),
            ("out", a.out.out.display().to_string()),
        ],
    )?;
    let load = |prefix: &str| -> Result<LabeledImageSet, CliError> {
        let images = read_idx(&a.idx_dir.join(format!("{prefix}-images-idx3-ubyte")))?;
        let labels = read_idx(&a.idx_dir.join(format!("{prefix}-labels-idx1-ubyte")))?;
        Ok(gray_set_from_idx(&images, &labels, a.downsample)?)
    };
    let train_gray = load("train")?;
    let test_gray = load("test")?;
    let train = colorize_hue_shift(
        &train_gray,
        HueRange::new(train_lo, train_hi),
        a.train_count,
        a.seed,
    );
    let test = colorize_hue_shift(
        &test_gray,
        HueRange::new(test_lo, test_hi),
        a.test_count,
        a.seed.wrapping_add(1),
    );
    let spec = serde_json::json!({
        "kind": "mnist-hue",
        "train_range": [train_lo, train_hi],
        "test_range": [test_lo, test_hi],
        "downsample": a.downsample,
    });
    write_manifest(&train, &a.out.out.join("train"), spec.clone(), a.seed)?;
    write_manifest(&test, &a.out.out.join("test"), spec, a.seed.wrapping_add(1))?;
    summarize("train", &train);
    summarize("test", &test);
    Ok(())
}
