//! The stepping phases write disjoint outputs from read-only inputs, so
//! results must be bitwise independent of how many worker threads the
//! process uses. This drives the same case inside differently sized
//! thread pools and demands identical bits.

use dugks::benchmarks::TaylorVortexSpec;
use dugks::grid::{DistributionField, UniformPeriodicGrid};
use dugks::kinetics::{initialize_near_equilibrium, RelaxationModel};
use dugks::scheme::{SchemeConfig, SchemeVariant, Stepper};
use dugks::velocity_set::DiscreteVelocitySet;

fn stepped_field(threads: usize, variant: SchemeVariant) -> Vec<f64> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| {
        let model = RelaxationModel::new(1e-3).unwrap();
        let tau = std::f64::consts::TAU;
        let spec = TaylorVortexSpec::new(tau, tau, 0.01, 1.0, 0.5, model.viscosity(0.5)).unwrap();
        let grid = UniformPeriodicGrid::new(2, 24).unwrap();
        let set = DiscreteVelocitySet::d2q9(0.5).unwrap();
        let mut field = DistributionField::new(grid, set).unwrap();
        initialize_near_equilibrium(&mut field, &spec, &model).unwrap();
        let config = SchemeConfig::new(model, 0.5, variant).unwrap();
        let mut stepper = Stepper::new(config, &field).unwrap();
        for _ in 0..25 {
            stepper.step(&mut field).unwrap();
        }
        field.current().to_vec()
    })
}

#[test]
fn steps_are_bitwise_independent_of_worker_count() {
    for variant in [SchemeVariant::Dugks, SchemeVariant::Clr, SchemeVariant::LaxWendroff] {
        let single = stepped_field(1, variant);
        let pooled = stepped_field(4, variant);
        assert!(
            single == pooled,
            "{variant:?}: thread count changed the bits"
        );
    }
}
