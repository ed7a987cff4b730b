use hoplab_core::engine::{reconstruct, EngineConfig, Mode};
use hoplab_core::labeler::{build_hop_samples, validate_balance, HopSample, LabelerConfig};
use hoplab_core::metrics::{mae, reverse_voc, voc};
use hoplab_core::predictor::{PredictorSpec, QuantizedPredictor};
use hoplab_core::simulate::{simulate, SimulationConfig};
use hoplab_core::trajectory::{sample_sequence, Trajectory, TrajectoryRecord};

fn corpus(n: usize, seed: u64) -> Vec<Trajectory> {
    simulate(&SimulationConfig {
        n_trajectories: n,
        frame_count: 100..=600,
        segments: 2..=6,
        n_views: 2,
        seed,
    })
    .unwrap()
}

#[test]
fn records_round_trip_through_json() {
    for t in corpus(10, 1) {
        let line = serde_json::to_string(&t.to_record()).unwrap();
        let back = Trajectory::try_from(serde_json::from_str::<TrajectoryRecord>(&line).unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(sample_sequence(&back, 10).unwrap(), sample_sequence(&t, 10).unwrap());
    }
}

#[test]
fn samples_round_trip_and_stay_balanced() {
    let cfg = LabelerConfig::default();
    for t in corpus(5, 2) {
        let seq = sample_sequence(&t, 5).unwrap();
        let set = build_hop_samples(&seq, &cfg).unwrap();
        assert!(validate_balance(&set.samples, &cfg).is_balanced());
        for s in &set.samples {
            let json = serde_json::to_string(s).unwrap();
            assert_eq!(&serde_json::from_str::<HopSample>(&json).unwrap(), s);
        }
    }
}

#[test]
fn quantized_predictor_degrades_gracefully() {
    let q = QuantizedPredictor::new(20).unwrap();
    for t in corpus(20, 3) {
        let seq = sample_sequence(&t, 10).unwrap();
        let series = reconstruct(&q, &seq, &EngineConfig::default()).unwrap();
        let values = series.values();
        assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        let gt = seq.ground_truth();
        // anchored estimates are off by at most half a bin (bin width 0.1)
        for (p, g) in series.points.iter().zip(&gt) {
            assert!((p.phi_fwd - g).abs() <= 0.05 + 1e-12);
            assert!((p.phi_bwd - g).abs() <= 0.05 + 1e-12);
        }
        assert!(mae(&values, &gt).unwrap() < 0.1);
        assert!(voc(&values).unwrap().value > 90.0);
    }
}

#[test]
fn noisy_predictor_keeps_rank_order() {
    let spec: PredictorSpec = "noisy:0.05,9".parse().unwrap();
    let p = spec.build(0).unwrap();
    let cfg = EngineConfig {
        mode: Mode::FusedMean,
        ..EngineConfig::default()
    };
    let (mut fwd, mut rev) = (0.0, 0.0);
    let trajs = corpus(30, 4);
    for t in &trajs {
        let seq = sample_sequence(t, 10).unwrap();
        fwd += voc(&reconstruct(&p, &seq, &cfg).unwrap().values()).unwrap().value;
        rev += reverse_voc(&p, &seq, &cfg).unwrap().value;
    }
    let n = trajs.len() as f64;
    assert!(fwd / n > 90.0, "{}", fwd / n);
    assert!(rev / n > 90.0, "{}", rev / n);
}
