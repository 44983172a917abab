//! Property tests for the file formats: every save/load pair must be
//! lossless, and writers must be byte-deterministic.

use proptest::prelude::*;

use multisym::io::{
    load_counts, load_fiducial, load_report, save_counts, save_fiducial, save_report, ConfigEcho,
    FidelityBlock, ReportFile,
};
use multisym::linalg::ComplexVector;
use multisym::povm::{s_max, Fiducial};
use multisym::simulator::CountsTable;
use multisym::C64;

fn tmp_path(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("multisym-fmt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(format!("{tag}-{:?}.dat", std::thread::current().id()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_round_trip(
        dim in 2usize..7,
        n_rounds in 1usize..4,
        seed in any::<u64>(),
    ) {
        let cells = dim * s_max(dim);
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % 100_000
        };
        let rounds: Vec<Vec<u64>> = (0..n_rounds)
            .map(|_| (0..cells).map(|_| next()).collect())
            .collect();
        let table = CountsTable::from_rounds(dim, s_max(dim), rounds).unwrap();
        let path = tmp_path("counts");
        save_counts(&table, &path).unwrap();
        let loaded = load_counts(&path).unwrap();
        prop_assert_eq!(loaded, table);
    }

    #[test]
    fn fiducial_round_trip(
        dim in 2usize..10,
        seed in any::<u64>(),
    ) {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut amps: Vec<C64> = (0..dim).map(|_| C64::new(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        let fiducial = Fiducial::new(ComplexVector::from_vec(amps)).unwrap();
        let path = tmp_path("fiducial");
        save_fiducial(&fiducial, &path).unwrap();
        let loaded = load_fiducial(&path).unwrap();
        prop_assert_eq!(loaded, fiducial);
    }

    #[test]
    fn report_round_trip(
        mean in 0.0f64..1.0,
        sigma in 0.0f64..0.1,
        cond in prop_oneof![1.0f64..1e6, Just(f64::INFINITY)],
        trials in proptest::collection::vec(0.0f64..1.0, 0..12),
    ) {
        let report = ReportFile {
            kind: "simulate".into(),
            config: ConfigEcho {
                dim: 2,
                s_max: 3,
                fiducial_source: "alpha:0.3,0.2pi".into(),
                state: Some("psi1".into()),
                rounds: Some(10),
                shots_per_round: Some(20_000),
                mc_trials: Some(trials.len().max(1) as u64),
                seed: Some(1),
                raw: false,
                detector_efficiency: 1.0,
                detector_dark: 0.0,
                mle_max_iters: 5000,
                mle_gradient_tolerance: 1e-9,
                mle_step_shrink: 0.5,
                mle_initial_step: 1.0,
            },
            condition_number: cond,
            density_re: vec![vec![mean, 0.1], vec![0.1, 1.0 - mean]],
            density_im: vec![vec![0.0, -sigma], vec![sigma, 0.0]],
            min_eigenvalue: -sigma,
            fidelity: Some(FidelityBlock {
                target: "psi1".into(),
                mean,
                sigma,
                interval: (mean - 5.0 * sigma, mean + 5.0 * sigma),
                trial1: mean,
            }),
            trial_converged: trials.iter().map(|f| *f > 0.5).collect(),
            trial_fidelities: trials,
            warnings: vec![],
        };
        let path = tmp_path("report");
        save_report(&report, &path).unwrap();
        let loaded = load_report(&path).unwrap();
        prop_assert_eq!(loaded, report);
    }
}
