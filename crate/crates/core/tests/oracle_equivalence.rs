use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hetstream::oracle::{exhaustive_min_delay, ratio};
use hetstream::report::{oracle_battery, random_case, run_oracle};
use hetstream::single_chunk::greedy::{greedy_copies, many_to_one};
use hetstream::DiffusionModel;

fn greedy_last(uploads: &[Rational64], n0: usize, c: usize, n: usize) -> Rational64 {
    greedy_copies(uploads, n0, c, n).last().map(|e| e.time).unwrap()
}

#[test]
fn greedy_matches_exhaustive_search_for_every_parallelism() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let case = random_case(&mut rng, 5);
        let m = many_to_one(&case.uploads, case.n0, case.n).unwrap();
        for c in 1..=3 {
            let model = DiffusionModel::one_to_some(c).unwrap().normalized();
            let exact = exhaustive_min_delay(&case.uploads, case.n0, case.n, model).unwrap();
            assert_eq!(exact, greedy_last(&case.uploads, case.n0, c, case.n), "{case:?} c={c}");
            assert!(m[case.n - 1] <= exact, "{case:?}");
        }
    }
}

#[test]
fn battery_passes() {
    for case in oracle_battery(3, 40) {
        let outcome = run_oracle(&case).unwrap();
        assert!(outcome.pass(), "{case:?}: {outcome:?}");
    }
}

#[test]
fn heterogeneous_worked_example() {
    let uploads = [ratio(8, 5), ratio(4, 5), ratio(4, 5), ratio(4, 5)];
    let exact = exhaustive_min_delay(&uploads, 2, 4, DiffusionModel::OneToOne).unwrap();
    assert_eq!(exact, ratio(5, 4));
}

#[test]
fn copies_past_the_population_use_idle_dummies() {
    // Two peers, five copies: dummies never upload.
    let uploads = [ratio(2, 1), ratio(1, 1)];
    let exact = exhaustive_min_delay(&uploads, 1, 5, DiffusionModel::OneToOne).unwrap();
    assert_eq!(exact, greedy_last(&uploads, 1, 1, 5));
}

#[test]
fn many_to_one_is_rejected() {
    assert!(exhaustive_min_delay(&[ratio(1, 1)], 1, 1, DiffusionModel::ManyToOne).is_err());
}
