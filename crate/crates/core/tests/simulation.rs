mod common;

use bns_core::simulate::{simulate, stream_rng, SimConfig, Simulator, Stream};
use bns_core::{MomentEngine, ObservationSeries};
use common::*;

#[test]
fn stationary_gamma_draws() {
    let sim = Simulator::new(&daily_gamma_ou(), 1).unwrap();
    let mut rng = stream_rng(1, 0, Stream::InitialState);
    let xs: Vec<f64> = (0..1_000_000)
        .map(|_| sim.draw_stationary_v0(&mut rng))
        .collect();
    let (mean, se) = mean_se(&xs);
    assert!((mean - 0.04).abs() < 4.0 * se, "{mean}");
    let sq: Vec<f64> = xs.iter().map(|x| (x - 0.04).powi(2)).collect();
    let (var, var_se) = mean_se(&sq);
    assert!((var - 2.56 / 64f64.powi(2)).abs() < 4.0 * var_se, "{var}");
}

#[test]
fn stationary_ig_draws() {
    let sim = Simulator::new(&daily_ig_ou(), 1).unwrap();
    let mut rng = stream_rng(2, 0, Stream::InitialState);
    let xs: Vec<f64> = (0..1_000_000)
        .map(|_| sim.draw_stationary_v0(&mut rng))
        .collect();
    let (mean, se) = mean_se(&xs);
    assert!((mean - 0.32).abs() < 4.0 * se, "{mean}");
}

#[test]
fn jump_intensity_and_size() {
    // Z = 0 exactly when the cell has no jump; E[Z] = (jump rate) x (mean size)
    let model = daily_gamma_ou();
    let sim = Simulator::new(&model, 1).unwrap();
    let mut driving = stream_rng(3, 0, Stream::Driving);
    let mut brownian = stream_rng(3, 0, Stream::Brownian);
    let steps: Vec<_> = (0..1_000_000)
        .map(|_| sim.step(0.04, &mut driving, &mut brownian))
        .collect();
    let rate: f64 = 256.0 * 2.56 / 250.0;
    assert!((rate - 2.621).abs() < 1e-3);
    let empty: Vec<f64> = steps.iter().map(|s| f64::from(s.z == 0.0)).collect();
    let (p0, se0) = mean_se(&empty);
    assert!((p0 - (-rate).exp()).abs() < 4.0 * se0, "P(no jump) = {p0}");
    let z: Vec<f64> = steps.iter().map(|s| s.z).collect();
    let (mz, sez) = mean_se(&z);
    assert!((mz - rate / 64.0).abs() < 4.0 * sez, "E[Z] = {mz}");
}

#[test]
fn one_step_conditional_mean_of_variance() {
    let model = daily_gamma_ou();
    let engine = MomentEngine::from_model(&model).unwrap();
    let sim = Simulator::new(&model, 1).unwrap();
    for (r, v) in [0.0, 0.04, 0.2].into_iter().enumerate() {
        let mut driving = stream_rng(4, r as u64, Stream::Driving);
        let mut brownian = stream_rng(4, r as u64, Stream::Brownian);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sim.step(v, &mut driving, &mut brownian).v)
            .collect();
        let (mean, se) = mean_se(&xs);
        let f1 = engine.conditional_moment(0, 1, v).unwrap();
        assert!((mean - f1).abs() < 4.0 * se, "v={v}: {mean} vs {f1}");
    }
}

#[test]
fn brownian_stream_is_independent_of_jumps() {
    let model = daily_gamma_ou();
    let p = *model.params();
    let sim = Simulator::new(&model, 1).unwrap();
    let mut driving = stream_rng(5, 0, Stream::Driving);
    let mut brownian = stream_rng(5, 0, Stream::Brownian);
    let n = 100_000;
    let (mut w, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let s = sim.step(0.04, &mut driving, &mut brownian);
        w.push((s.x - p.mu() * p.delta_t() - p.beta() * s.y - p.rho() * s.z) / s.y.sqrt());
        z.push(s.z);
    }
    let (mw, _) = mean_se(&w);
    let (mz, _) = mean_se(&z);
    let cov: f64 = w
        .iter()
        .zip(&z)
        .map(|(a, b)| (a - mw) * (b - mz))
        .sum::<f64>();
    let sw = w.iter().map(|a| (a - mw).powi(2)).sum::<f64>().sqrt();
    let sz = z.iter().map(|b| (b - mz).powi(2)).sum::<f64>().sqrt();
    let corr = cov / (sw * sz);
    assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
}

#[test]
fn ig_paths_keep_the_ar_lower_bound() {
    let model = daily_ig_ou();
    let s = simulate(&SimConfig::new(model.clone(), 5000, 6)).unwrap();
    let g = model.params().gamma();
    let mut prev = s.v0().unwrap();
    for &v in s.v() {
        assert!(v >= g * prev && v >= 0.0);
        prev = v;
    }
}

#[test]
fn ig_subgrid_refinement_is_within_noise() {
    let model = daily_ig_ou();
    let p = *model.params();
    let n = 200_000;
    let mean_u = |subgrid: usize| {
        let sim = Simulator::new(&model, subgrid).unwrap();
        let mut driving = stream_rng(7, subgrid as u64, Stream::Driving);
        let mut brownian = stream_rng(7, subgrid as u64, Stream::Brownian);
        let us: Vec<f64> = (0..n)
            .map(|_| sim.step(0.32, &mut driving, &mut brownian).u)
            .collect();
        mean_se(&us)
    };
    let (a, sa) = mean_u(8);
    let (b, sb) = mean_u(16);
    assert!(
        (a - b).abs() < 4.0 * (sa * sa + sb * sb).sqrt(),
        "{a} vs {b}"
    );
    let exact = (1.0 - p.gamma()) * p.zeta();
    assert!((b - exact).abs() < 4.0 * sb, "{b} vs {exact}");
}

#[test]
fn simulated_series_round_trip_through_csv() {
    let s = simulate(&SimConfig::new(daily_gamma_ou(), 300, 11)).unwrap();
    let text = s.to_csv_string().unwrap();
    assert_eq!(ObservationSeries::from_csv_str(&text).unwrap(), s);
}
