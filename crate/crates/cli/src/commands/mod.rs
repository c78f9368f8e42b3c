pub mod analyze;
pub mod equiv;
pub mod eval;
pub mod gen_data;
pub mod lift;
pub mod train;

use t3cen::colorspace::rgb_to_hsl;
use t3cen::datasets::manifest::LabeledImageSet;
use t3cen::nn::train::Sample;

/// Converts a labeled RGB set into network samples.
pub fn to_samples(set: &LabeledImageSet) -> Vec<Sample> {
    set.images
        .iter()
        .zip(&set.labels)
        .map(|(img, &label)| Sample {
            image: rgb_to_hsl(img),
            label,
        })
        .collect()
}

/// Parses "a,b,c" into a list of usizes.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p}: {e}")))
        .collect()
}

/// Parses "lo:hi" into a pair of f64 degrees.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    Ok((
        lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?,
        hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?,
    ))
}
