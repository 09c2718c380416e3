use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdcavity::analysis::dominant_frequency;
use qdcavity::baseline::{jc_baseline, jc_frequency, nl_block_baseline};
use qdcavity::config::Preset;
use qdcavity::manifold::{
    evolve, integrate, Amplitude, DynamicsParams, DynamicsSpec, ManifoldAmplitudes, ManifoldIndex,
    Rates, TimeGrid,
};

fn jc(g_a: f64, delta_a: f64, lambda: f64) -> DynamicsParams {
    DynamicsParams {
        g_a,
        g_b: 0.0,
        g_nl: 0.0,
        delta_a,
        delta_b: 0.0,
        huang_rhys: lambda,
    }
}

fn run(params: DynamicsParams, idx: ManifoldIndex, initial: Amplitude, t_end: f64, step: f64) -> qdcavity::TimeSeries {
    integrate(&DynamicsSpec {
        index: idx,
        params,
        initial: ManifoldAmplitudes::basis(initial),
        grid: TimeGrid::new(0.0, t_end, (t_end * 100.0) as usize, step).unwrap(),
    })
    .unwrap()
}

#[test]
fn jc_limit_matches_baseline_across_manifolds() {
    for (g, delta, lambda, m) in [(1.0, 0.0, 0.0, 0u32), (0.8, 1.0, 0.3, 0), (1.2, -0.5, 0.1, 3)] {
        let ts = run(jc(g, delta, lambda), ManifoldIndex::new(m, 0), Amplitude::D, 20.0, 1e-3);
        for s in &ts.samples {
            let expected = jc_baseline(s.t, g, lambda, delta, m).unwrap();
            assert!((s.p2() - expected).abs() < 1e-8, "t={} g={g} δ={delta} m={m}", s.t);
        }
    }
}

#[test]
fn nl_block_matches_baseline() {
    for (g_nl, m, n) in [(1.0, 0u32, 0u32), (0.3, 2, 1)] {
        let params = DynamicsParams {
            g_nl,
            ..jc(0.0, 0.4, 0.0)
        };
        let ts = run(params, ManifoldIndex::new(m, n), Amplitude::B, 20.0, 1e-3);
        for s in &ts.samples {
            let expected = nl_block_baseline(s.t, g_nl, m, n).unwrap();
            assert!((s.y.probability(Amplitude::B) - expected).abs() < 1e-8);
        }
    }
}

#[test]
fn dressing_scales_rabi_period() {
    let f0 = {
        let ts = run(jc(1.0, 0.0, 0.0), ManifoldIndex::default(), Amplitude::D, 40.0, 1e-3);
        dominant_frequency(&ts.times(), &ts.p2()).unwrap()
    };
    for lambda in [0.25, 1.0, 2.0] {
        let ts = run(jc(1.0, 0.0, lambda), ManifoldIndex::default(), Amplitude::D, 40.0, 1e-3);
        let f = dominant_frequency(&ts.times(), &ts.p2()).unwrap();
        assert_relative_eq!(f / f0, (-lambda / 2.0).exp(), max_relative = 1e-3);
        assert_relative_eq!(f, jc_frequency(1.0, lambda, 0.0, 0), max_relative = 1e-6);
    }
}

#[test]
fn backward_integration_recovers_initial_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for preset in Preset::ALL {
        let rates = Rates::new(&preset.params(), ManifoldIndex::default()).unwrap();
        let mut y0 = ManifoldAmplitudes::zero();
        y0.0.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let y0 = (1.0 / y0.norm().sqrt()) * y0;
        let h = 1e-3;
        let steps = 20_000;
        let forward = evolve(&y0, 0.0, h, steps, &rates).unwrap();
        let back = evolve(&forward, steps as f64 * h, -h, steps, &rates).unwrap();
        assert!(back.max_abs_diff(&y0) < 1e-8, "{}", preset.name());
    }
}

#[test]
fn richardson_estimate_is_small_at_default_step() {
    for preset in Preset::ALL {
        let coarse = run(preset.params(), ManifoldIndex::default(), Amplitude::D, 25.0, 1e-3);
        let fine = run(preset.params(), ManifoldIndex::default(), Amplitude::D, 25.0, 5e-4);
        let diff = coarse
            .samples
            .iter()
            .zip(&fine.samples)
            .map(|(a, b)| a.y.max_abs_diff(&b.y))
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{}: {diff:e}", preset.name());
    }
}

#[test]
fn p2_stays_a_probability() {
    for preset in Preset::ALL {
        let ts = run(preset.params(), ManifoldIndex::default(), Amplitude::D, 25.0, 1e-3);
        assert!(ts.p2().iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
        assert!(ts.max_norm_drift() < 1e-9);
    }
}
