//! Central sequence and Fisher information at a Gaussian null: the empirical
//! covariance of the central sequence over replications approaches the information.

use ellsym::matops::SpdMatrix;
use ellsym::radial::{RadialDensity, RadialFamily};
use ellsym::samplers::{AlternativeSpec, RngStream};
use ellsym::ulan::{central_sequence, decompose, fisher_blocks, PI_DOT_GAUSSIAN};
use nalgebra::{DMatrix, DVector};

fn main() -> ellsym::Result<()> {
    let d = 2;
    let sigma = SpdMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]])?;
    let theta = DVector::zeros(d);
    let f = RadialDensity::new(RadialFamily::Gaussian, d)?;
    let sampler = AlternativeSpec::elliptical(RadialFamily::Gaussian)
        .with_sigma(&sigma)
        .sampler()?;

    let reps = 2000;
    let mut draws = Vec::with_capacity(reps);
    for r in 0..reps {
        let x = sampler.sample(200, RngStream::new(5, r as u64));
        let dec = decompose(&x, &theta, &sigma)?;
        draws.push(central_sequence(&dec, &f, PI_DOT_GAUSSIAN)?.stacked());
    }
    let p = draws[0].len();
    let mut cov = DMatrix::zeros(p, p);
    for v in &draws {
        cov += v * v.transpose();
    }
    cov /= reps as f64;

    let info = fisher_blocks(&sigma, &f, PI_DOT_GAUSSIAN)?.assemble();
    println!("information:\n{info:.3}");
    println!("empirical covariance ({reps} replications):\n{cov:.3}");
    println!("max abs difference: {:.3}", (&cov - &info).abs().max());
    Ok(())
}
