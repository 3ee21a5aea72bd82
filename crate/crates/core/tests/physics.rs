use proptest::prelude::*;
use spinegrip_core::actuation::{current_to_torque, plate_force, ActuatorModel};
use spinegrip_core::finger::{moment_sum, pressure_profile, PhalanxChain};
use spinegrip_core::sim::{margin_in_sigma, required_grip_force, Body};
use spinegrip_core::spine::{effective_friction, relatch_probability, RelatchWindow};

proptest! {
    #[test]
    fn pressure_is_linear_in_tension(n in 1usize..8, l in 0.01..0.1f64, t in 0.0..200.0f64, k in 0.0..10.0f64) {
        let chain = PhalanxChain::uniform(n, l, 0.2 * l).unwrap();
        let a = pressure_profile(&chain, t).unwrap();
        let b = pressure_profile(&chain, k * t).unwrap();
        for (x, y) in a.pressures.iter().zip(&b.pressures) {
            prop_assert!((k * x - y).abs() <= 1e-9 * y.abs().max(1e-12));
        }
    }

    #[test]
    fn uniform_fingers_press_hardest_at_the_tip(n in 2usize..10, l in 0.01..0.1f64, t in 0.1..200.0f64) {
        let chain = PhalanxChain::uniform(n, l, 0.2 * l).unwrap();
        let p = pressure_profile(&chain, t).unwrap().pressures;
        prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(p.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn moment_sum_grows_toward_the_base(lengths in prop::collection::vec(0.005..0.1f64, 2..8)) {
        let m: Vec<f64> = (0..lengths.len()).map(|j| moment_sum(&lengths, j).unwrap()).collect();
        prop_assert!(m.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn effective_friction_rises_with_base_friction(mu in 0.05..1.0f64, d in 0.001..0.2f64, frac in 0.0..0.95f64) {
        let beta = frac * (1.0 / (mu + d)).atan();
        prop_assert!(effective_friction(mu + d, beta).unwrap() > effective_friction(mu, beta).unwrap());
    }

    #[test]
    fn relatch_probability_is_a_probability(
        t in 0.0..150.0f64, low in 20.0..60.0f64, width in 0.0..40.0f64, floor in 0.0..0.9f64, rolloff in 0.5..20.0f64,
    ) {
        let w = RelatchWindow { low, high: low + width, floor, rolloff };
        let p = relatch_probability(t, &w);
        prop_assert!((floor..=1.0).contains(&p));
        if (low..=low + width).contains(&t) {
            prop_assert_eq!(p, 1.0);
        }
    }

    #[test]
    fn torque_interpolates_between_anchors(c in 0.15..0.275f64) {
        let m = ActuatorModel::default();
        let tau = current_to_torque(c, &m).unwrap();
        prop_assert!((0.084..=0.179).contains(&tau));
        prop_assert!(plate_force(tau, &m).unwrap() > 0.0);
    }

    #[test]
    fn grip_force_is_weight_over_stance(mass in 0.1..100.0f64, g in 0.1..20.0f64, legs in 1usize..7) {
        let f = required_grip_force(mass, g, legs).unwrap();
        prop_assert!((f * legs as f64 - mass * g).abs() <= 1e-9 * mass * g);
    }
}

#[test]
fn mission_presets() {
    let moon = required_grip_force(20.0, Body::Moon.gravity(), 3).unwrap();
    let mars = required_grip_force(20.0, Body::Mars.gravity(), 3).unwrap();
    assert!((moon - 10.8).abs() <= 0.01);
    assert!((mars - 24.73).abs() <= 0.01);
    assert!(margin_in_sigma(35.68, 17.33, mars).unwrap() > 0.0);
    assert!(required_grip_force(20.0, 1.62, 0).is_err());
}
