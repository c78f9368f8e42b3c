//! `lift`: dump the lifted image stack as PPM files plus an index.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use t3cen::colorspace::{hsl_to_rgb, rgb_to_hsl};
use t3cen::groups::HslGroup;
use t3cen::lifting::lift_image;
use t3cen::ppm::{read_ppm, write_ppm};

use crate::config::write_resolved_config;
use crate::CliError;

#[derive(Args)]
pub struct LiftArgs {
    /// Input image (binary P6 PPM).
    #[arg(long)]
    pub image: PathBuf,
    /// Group orders as hue,sat,lum.
    #[arg(long, default_value = "4,1,1")]
    pub orders: String,
    #[command(flatten)]
    pub out: crate::OutDir,
}

pub fn run(a: LiftArgs) -> Result<(), CliError> {
    let orders = super::parse_usize_list(&a.orders).map_err(CliError::Config)?;
    if orders.len() != 3 || orders.contains(&0) {
        return Err(CliError::Config(format!(
            "--orders needs three positive integers, got {:?}",
            a.orders
        )));
    }
    write_resolved_config(
        &a.out.out,
        "lift",
        &[
            ("image", a.image.display().to_string()),
            ("orders", a.orders.clone()),
            ("out", a.out.out.display().to_string()),
        ],
    )?;
    let img = rgb_to_hsl(&read_ppm(&a.image)?);
    let group = HslGroup::new(orders[0], orders[1], orders[2]);
    let stack = lift_image(&img, &group);
    let images_dir = a.out.out.join("images");
    std::fs::create_dir_all(&images_dir).map_err(anyhow::Error::from)?;
    let mut index = String::from("slot,hue,sat,lum,file\n");
    for (flat, el) in group.elements().enumerate() {
        let (i, j, k) = el.indices();
        let name = format!("lift_{i}_{j}_{k}.ppm");
        write_ppm(&hsl_to_rgb(&stack.images()[flat]), &images_dir.join(&name))?;
        let _ = writeln!(index, "{flat},{i},{j},{k},images/{name}");
    }
    std::fs::write(a.out.out.join("index.csv"), index).map_err(anyhow::Error::from)?;
    println!(
        "lifted {} into {} slots under {}",
        a.image.display(),
        group.size(),
        a.out.out.display()
    );
    Ok(())
}
