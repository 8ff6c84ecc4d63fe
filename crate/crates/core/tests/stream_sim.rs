use hetstream::model::generate_adversarial;
use hetstream::single_chunk::delay_one_to_one;
use hetstream::stream::{
    find_group_period, measured_stream_delay, plan_intra_then_inter, stream_delay_floor,
    verify_schedule,
};
use hetstream::{BandwidthProfile, DiffusionModel, StreamConfig};

#[test]
fn small_homogeneous_stream_meets_its_bound() {
    let profile = BandwidthProfile::homogeneous(1.0, 4).unwrap();
    for (s, model) in [
        (0.5, DiffusionModel::ManyToOne),
        (0.25, DiffusionModel::OneToOne),
        (0.25, DiffusionModel::OneToSome(2)),
    ] {
        let stream = StreamConfig::new(s, 1).unwrap();
        let m = measured_stream_delay(&profile, &stream, model, Some(8)).unwrap();
        assert!(m.result.valid, "{model}: {:?}", m.result.violations);
        assert!(m.result.complete, "{model}");
        assert!(m.delay() <= m.plan.delay_bound + 1e-9, "{model}: {}", m.delay());
    }
}

#[test]
fn saturated_pair_has_the_doubling_floor_but_no_plan() {
    let profile = BandwidthProfile::homogeneous(1.0, 2).unwrap();
    let stream = StreamConfig::new(1.0, 1).unwrap();
    let floor = stream_delay_floor(&profile, &stream).unwrap();
    assert_eq!(floor.forced_peer, Some(0));
    assert!((floor.floor - 1.0).abs() < 1e-12);
    assert!(measured_stream_delay(&profile, &stream, DiffusionModel::OneToOne, Some(4)).is_err());
}

#[test]
fn single_chunk_horizon_is_bounded_below_by_the_full_delay() {
    let profile = BandwidthProfile::from_unsorted((1..=40).map(|i| 0.2 + 0.05 * i as f64).collect()).unwrap();
    let stream = StreamConfig::new(0.3, 2).unwrap();
    for model in [DiffusionModel::ManyToOne, DiffusionModel::OneToOne, DiffusionModel::OneToSome(3)] {
        let m = measured_stream_delay(&profile, &stream, model, Some(1)).unwrap();
        assert!(m.result.valid);
        assert!(m.delay() >= m.plan.diagnostics.full_delay - 1e-9);
    }
}

#[test]
fn replayed_schedule_with_one_dropped_transfer_is_incomplete() {
    let profile = BandwidthProfile::homogeneous(1.0, 6).unwrap();
    let stream = StreamConfig::new(0.25, 1).unwrap();
    let model = DiffusionModel::OneToOne;
    let plan = find_group_period(&profile, &stream, model).unwrap().unwrap();
    let mut schedule = plan_intra_then_inter(&profile, &stream, model, &plan, 2 * plan.period).unwrap();
    let last = schedule.events.iter().rposition(|e| !e.is_injection()).unwrap();
    schedule.events.remove(last);
    let r = verify_schedule(&profile, &stream, model, &schedule);
    assert!(r.valid);
    assert!(!r.complete);
}

#[test]
fn two_peer_floor() {
    let profile = BandwidthProfile::new(vec![0.75, 0.25]).unwrap();
    let stream = StreamConfig::new(1.0, 1).unwrap();
    let floor = stream_delay_floor(&profile, &stream).unwrap();
    assert_eq!(floor.forced_peer, Some(1));
    assert!((floor.floor - 4.0).abs() < 1e-12);
    // Mean upload below the rate: no group period exists.
    assert!(find_group_period(&profile, &stream, DiffusionModel::ManyToOne).unwrap().is_none());
}

#[test]
fn adversarial_floor_outgrows_the_homogeneous_delay() {
    let stream = StreamConfig::new(1.0, 1).unwrap();
    let mut previous = 0.0;
    for peers in [10, 100, 1000] {
        let profile = generate_adversarial(peers, 1, 0.0, 1.0).unwrap();
        let floor = stream_delay_floor(&profile, &stream).unwrap().floor;
        assert!((floor - (peers - 1) as f64 / 2.0).abs() < 1e-9 * floor);
        let equivalent = BandwidthProfile::homogeneous(profile.mean(), peers).unwrap();
        let d1 = delay_one_to_one(&equivalent, 1, peers).unwrap().last();
        assert!(floor > d1);
        assert!(floor > previous);
        previous = floor;
    }
}
