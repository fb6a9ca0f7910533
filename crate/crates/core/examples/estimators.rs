//! Location and shape estimators on a heavy-tailed sample with a few gross outliers.

use ellsym::estimators::{hr_median, sample_cov, sample_mean, spatial_median, tyler_shape};
use ellsym::matops::SpdMatrix;
use ellsym::radial::RadialFamily;
use ellsym::samplers::{AlternativeSpec, RngStream};

fn main() -> ellsym::Result<()> {
    let sigma = SpdMatrix::from_rows(&[&[4.0, 1.0], &[1.0, 1.0]])?;
    let mut x = AlternativeSpec::elliptical(RadialFamily::student(3.0))
        .with_theta(&[1.0, -1.0])
        .with_sigma(&sigma)
        .sample(300, RngStream::new(9, 0))?;
    for i in 0..5 {
        x[(i, 0)] = 80.0;
        x[(i, 1)] = 80.0;
    }

    let mean = sample_mean(&x)?;
    let med = spatial_median(&x)?;
    let (hr_loc, hr_shape) = hr_median(&x)?;
    println!("mean            {:.3?}", mean.as_slice());
    println!("spatial median  {:.3?}", med.as_slice());
    println!("HR location     {:.3?}", hr_loc.as_slice());

    // Shapes are compared after normalizing to unit determinant.
    let truth = sigma.normalized_det();
    let cov = sample_cov(&x)?.normalized_det();
    let tyler = tyler_shape(&x, &med)?.normalized_det();
    let show = |s: &SpdMatrix| {
        let m = s.as_matrix();
        format!(
            "[{:.3} {:.3}; {:.3} {:.3}]",
            m[(0, 0)],
            m[(0, 1)],
            m[(1, 0)],
            m[(1, 1)]
        )
    };
    println!("true shape      {}", show(&truth));
    println!("covariance      {}", show(&cov));
    println!("Tyler           {}", show(&tyler));
    println!("HR shape        {}", show(&hr_shape.normalized_det()));
    Ok(())
}
