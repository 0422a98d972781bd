//! Drives the model-based sampler by hand: record observations, then ask for
//! proposals and inspect the densities behind them.

use bohb::configspace::{ConfigurationSpace, IdGen, ParameterSpec};
use bohb::sampler::{
    acquisition, propose, Observation, ObservationStore, Provenance, SamplerParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bohb::Result<()> {
    let space = ConfigurationSpace::new(vec![
        ParameterSpec::log_continuous("learning_rate", 1e-5, 1e-1),
        ParameterSpec::integer("layers", 1, 8, false),
    ])?;
    let ids = IdGen::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = SamplerParams {
        rho: 0.0,
        ..Default::default()
    };

    // Toy loss: best around learning rate 1e-3 (unit 0.5) and 3 layers.
    let mut store = ObservationStore::new();
    for _ in 0..30 {
        let config = space.sample_uniform(&mut rng, &ids);
        let u = config.unit();
        let loss = (u[0] - 0.5).powi(2) + (u[1] - 0.3).powi(2);
        store.record(Observation::new(config, 10.0, loss));
    }

    for _ in 0..3 {
        let p = propose(&store, &params, &space, &mut rng, &ids);
        print!("{:?} {:?}", p.provenance, space.describe(&p.config)?);
        if let (Provenance::Model, Some(t)) = (p.provenance, &p.trace) {
            let score = acquisition(&t.good, &t.bad, &t.candidates[t.chosen], params.eps_density);
            print!(
                "  budget {} good {} bad {} best l/g {score:.3e} of {} candidates",
                t.budget,
                t.good.len(),
                t.bad.len(),
                t.candidates.len()
            );
        }
        println!();
    }
    Ok(())
}
