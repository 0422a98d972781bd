//! Fits a factorized KDE on a mixed space and shows how widening the
//! bandwidths spreads the samples.

use bohb::configspace::{ConfigurationSpace, IdGen, ParameterSpec};
use bohb::density::KdeModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bohb::Result<()> {
    let space = ConfigurationSpace::new(vec![
        ParameterSpec::continuous("x", 0.0, 1.0),
        ParameterSpec::categorical("color", ["red", "green", "blue"]),
    ])?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ids = IdGen::new();

    // Points clustered around x = 0.3, mostly "green".
    let data: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            vec![
                0.3 + 0.01 * (i % 7) as f64,
                if i % 5 == 0 { 2.0 } else { 1.0 },
            ]
        })
        .collect();
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let model = KdeModel::fit(&space, &rows, 1e-3)?;
    println!("bandwidths (x, color): {:?}", model.bandwidths());

    for x in [0.1, 0.3, 0.5] {
        println!("pdf(x={x}, green) = {:.4}", model.pdf(&[x, 1.0]));
    }
    let total: f64 = (0..3).map(|c| model.pdf(&[0.33, c as f64])).sum::<f64>();
    println!("pdf(x=0.33, .) summed over colors = {total:.4} (equals the x marginal)");

    for factor in [1.0, 3.0] {
        let draws: Vec<Vec<f64>> = (0..5000).map(|_| model.sample(factor, &mut rng)).collect();
        let mean = draws.iter().map(|d| d[0]).sum::<f64>() / draws.len() as f64;
        let sd =
            (draws.iter().map(|d| (d[0] - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
        let green = draws.iter().filter(|d| d[1] == 1.0).count() as f64 / draws.len() as f64;
        println!("factor {factor}: x mean {mean:.3}, x sd {sd:.3}, green share {green:.3}");
    }

    let sample = space.configuration(model.sample(1.0, &mut rng), &ids)?;
    println!("one sample: {:?}", space.describe(&sample)?);
    Ok(())
}
