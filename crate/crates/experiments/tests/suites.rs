use dyadlab_core::norms::SchurKind;
use dyadlab_experiments::algebra::{master_identity, shift_algebra};
use dyadlab_experiments::constants::verify_bmo_rec_bound;
use dyadlab_experiments::extremal::{extremal_search, SearchConfig};
use dyadlab_experiments::machinery::{last_step_increase, schur_norms};
use dyadlab_experiments::mainskip::{battery, survivor_instance, survivor_survey};
use dyadlab_experiments::one_param::c_window;
use dyadlab_experiments::smallness::smallness_falsifier;
use dyadlab_experiments::{SymbolKind, TrialConfig};

#[test]
fn identity_holds_on_small_grids() {
    let (out, rows) = master_identity(&[2, 3], 3, 11);
    assert!(out.passed(), "{:?}", out.first_failure);
    assert_eq!(rows.len(), 12);
    assert!(shift_algebra(&[2, 3, 4]).iter().all(|r| r.square_zero && r.adjoint_square_zero));
}

#[test]
fn battery_passes_at_depth_three() {
    let rep = battery(&[3], 6, 5).unwrap();
    for o in &rep.outcomes {
        assert!(o.passed(), "{}: {:?}", o.name, o.first_failure);
    }
}

#[test]
fn survivors_match_at_depth_three() {
    let s = survivor_survey(3, 1, 40, 0).unwrap();
    assert!(s.matches_expectation(), "{:?}", s.nonzero_counts);
    assert!(survivor_instance(3, 1, "πZ3").unwrap().is_some());
}

#[test]
fn constants_are_finite_and_reproducible() {
    let cfg = TrialConfig { trials: 20, seed: 4, pad: 1 };
    let (a, _) = verify_bmo_rec_bound(&[2, 3], &cfg);
    let (b, _) = verify_bmo_rec_bound(&[2, 3], &cfg);
    assert!(a.all_finite());
    assert_eq!(a.max_by_depth, b.max_by_depth);
}

#[test]
fn smallness_on_full_catalogue() {
    let out = smallness_falsifier(2, 0, 0).unwrap();
    assert!(out.horizontal.passed(), "{:?}", out.horizontal.first_failure);
}

#[test]
fn c_window_holds_for_moderate_grids() {
    for n in 4..=6 {
        assert!(c_window(n).unwrap().outcome.passed());
    }
}

#[test]
fn schur_norms_increase_with_depth() {
    let rows = schur_norms(SchurKind::Tree, &[3, 4, 5], 2.0).unwrap();
    assert!(rows.windows(2).all(|w| w[1].norm >= w[0].norm - 1e-9));
    assert!(last_step_increase(&rows).unwrap() < 0.05);
}

#[test]
fn extremal_search_is_deterministic() {
    let cfg = SearchConfig::new(2, SymbolKind::ScaleSkipping, 60, 3);
    let a = extremal_search(&cfg);
    let b = extremal_search(&cfg);
    assert_eq!(a.best(), b.best());
    assert!(a.best().unwrap() <= 0.5 + 1e-9);
}
