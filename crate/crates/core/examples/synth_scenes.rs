//! Writes procedural grayscale scenes for trying out the pipeline.
//!
//! Usage: synth_scenes <out_dir> [count] [width] [height] [first_seed]

use std::path::PathBuf;
use std::process::ExitCode;

use featbounds::imaging::{save_image, synthetic_scene};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(out) = args.first().map(PathBuf::from) else {
        eprintln!("usage: synth_scenes <out_dir> [count] [width] [height] [first_seed]");
        return ExitCode::from(2);
    };
    let num = |i: usize, default: u64| -> Option<u64> {
        args.get(i).map_or(Some(default), |s| s.parse().ok())
    };
    let (Some(count), Some(w), Some(h), Some(seed)) = (num(1, 3), num(2, 128), num(3, 96), num(4, 1)) else {
        eprintln!("numeric arguments expected");
        return ExitCode::from(2);
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("{}: {e}", out.display());
        return ExitCode::from(3);
    }
    for i in 0..count {
        let img = synthetic_scene(seed + i, w as usize, h as usize);
        let path = out.join(format!("scene{:02}.png", i + 1));
        if let Err(e) = save_image(&img, &path) {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    }
    println!("wrote {count} scenes to {}", out.display());
    ExitCode::SUCCESS
}
