//! Load MNIST and USPS, preprocess both directions and cache them.
//!
//! Set `QTF_DATA_DIR` to a directory holding `train-images-idx3-ubyte`,
//! `train-labels-idx1-ubyte` and a USPS text file. Without it the example
//! writes small stand-in files in the same formats and runs on those.

use std::path::PathBuf;

use qtransfer::data_io::{
    load_mnist_idx, load_usps, preprocess_digits, read_bundle, write_bundle, write_idx, RawImages,
};

fn stand_in(dir: &std::path::Path) -> qtransfer::Result<()> {
    let blob = |side: usize, c: usize, k: usize| -> Vec<f64> {
        (0..side * side)
            .map(|p| {
                if (p / side + p % side + c) % 10 < 3 + k % 2 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    };
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        images.push(blob(28, i % 10, i));
        labels.push(i % 10);
    }
    let mnist = RawImages::new(28, 28, images, labels)?;
    write_idx(
        &mnist,
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )?;
    let mut text = String::new();
    for i in 0..200 {
        text.push_str(&(i % 10).to_string());
        for v in blob(16, i % 10, i) {
            text.push_str(&format!(" {:.1}", 2.0 * v - 1.0));
        }
        text.push('\n');
    }
    std::fs::write(dir.join("usps"), text).map_err(|e| qtransfer::Error::Io {
        path: dir.join("usps"),
        source: e,
    })
}

fn main() -> qtransfer::Result<()> {
    let dir = match std::env::var_os("QTF_DATA_DIR") {
        Some(d) => PathBuf::from(d),
        None => {
            let d = std::env::temp_dir().join("qtransfer-digits-example");
            std::fs::create_dir_all(&d).expect("temp dir");
            stand_in(&d)?;
            println!("QTF_DATA_DIR unset, using stand-in files in {}", d.display());
            d
        }
    };
    let mnist = load_mnist_idx(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )?;
    let usps = load_usps(&dir.join("usps"))?;
    println!(
        "MNIST {} images of {}x{}, USPS {} images of {}x{}",
        mnist.len(),
        mnist.rows,
        mnist.cols,
        usps.len(),
        usps.rows,
        usps.cols
    );

    let (mu, um) = preprocess_digits(&mnist, &usps, 100, 90, 0)?;
    for b in [&mu, &um] {
        println!(
            "{}: {} features, {} source, {} target",
            b.name,
            b.x.dim(),
            b.x.n_source(),
            b.x.n_target()
        );
    }
    let cache = dir.join("mnist_usps.qtf");
    write_bundle(&mu, 0, &cache)?;
    let (back, seed) = read_bundle(&cache)?;
    println!(
        "cache round trip equal: {} (seed {seed})",
        back.x == mu.x && back.y_s == mu.y_s
    );
    Ok(())
}
