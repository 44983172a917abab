//! Compare the single-parameter equidistant family against random
//! fiducial search.
//!
//! The equidistant parametrization keeps the search one-complex-dimensional
//! and lands on condition numbers of order 10; unconstrained random states
//! can do a little better, at the price of losing the neighborhood
//! structure that makes a working point robust.
//!
//! Run with: cargo run --release --example fiducial_search

use multisym::fiducial::{
    complex_amplitudes, condition_number, random_fiducial_search, AlphaParam,
};

fn main() -> Result<(), multisym::Error> {
    let pi = std::f64::consts::PI;

    for dim in [6usize, 15] {
        // Reference: the best of the published working points.
        let reference = match dim {
            6 => (0.8, 0.36),
            _ => (0.54, 0.4),
        };
        let alpha = AlphaParam::new(reference.0, reference.1 * pi)?;
        let ref_cond = condition_number(&complex_amplitudes(&alpha, dim)?, dim)?;

        let samples = 2000;
        let (best, best_cond) = random_fiducial_search(dim, samples, 20_240_817)?;
        println!(
            "D = {dim:2}: equidistant working point C = {ref_cond:.3}, \
             best of {samples} random fiducials C = {best_cond:.3}"
        );
        print!("         best amplitudes:");
        for k in 0..dim.min(8) {
            print!(" {:.3}", best.amplitude(k).re);
        }
        println!("{}", if dim > 8 { " …" } else { "" });
        assert!(
            best_cond <= ref_cond,
            "random search over {samples} states should beat the 1-parameter family"
        );
    }
    Ok(())
}
