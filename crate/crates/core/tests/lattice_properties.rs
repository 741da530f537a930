use domconv::domain::{lattice_join, lattice_meet, running_meet, tail_sup_envelope, tail_sup_envelopes};
use domconv::{FunctionSequence, Grid, SampledFunction};
use proptest::prelude::*;

fn pair(max: usize) -> impl Strategy<Value = (SampledFunction, SampledFunction, SampledFunction)> {
    (2..max).prop_flat_map(|n| {
        let v = || prop::collection::vec(-1e3..1e3f64, n);
        (v(), v(), v()).prop_map(move |(a, b, c)| {
            let grid = Grid::uniform(n).unwrap();
            (
                SampledFunction::new(grid.clone(), a).unwrap(),
                SampledFunction::new(grid.clone(), b).unwrap(),
                SampledFunction::new(grid, c).unwrap(),
            )
        })
    })
}

fn sequence(max_len: usize, points: usize) -> impl Strategy<Value = FunctionSequence> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, points), 1..max_len).prop_map(move |rows| {
        let grid = Grid::uniform(points).unwrap();
        let terms = rows
            .into_iter()
            .map(|v| SampledFunction::new(grid.clone(), v).unwrap())
            .collect();
        FunctionSequence::new(terms, 1.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn join_plus_meet_is_sum_exactly((g, h, _) in pair(70)) {
        let lhs = lattice_join(&g, &h).unwrap().add(&lattice_meet(&g, &h).unwrap()).unwrap();
        let sum = g.add(&h).unwrap();
        prop_assert_eq!(lhs.values(), sum.values());
    }

    #[test]
    fn lattice_laws((f, g, h) in pair(40)) {
        prop_assert_eq!(f.join(&g).unwrap(), g.join(&f).unwrap());
        prop_assert_eq!(f.meet(&g).unwrap(), g.meet(&f).unwrap());
        prop_assert_eq!(
            f.join(&g).unwrap().join(&h).unwrap(),
            f.join(&g.join(&h).unwrap()).unwrap()
        );
        prop_assert_eq!(
            f.meet(&g).unwrap().meet(&h).unwrap(),
            f.meet(&g.meet(&h).unwrap()).unwrap()
        );
        prop_assert_eq!(f.join(&f).unwrap(), f.clone());
        prop_assert_eq!(f.meet(&f).unwrap(), f.clone());
        let j = f.join(&g).unwrap();
        let m = f.meet(&g).unwrap();
        prop_assert!(j.dominates(&f).unwrap() && j.dominates(&g).unwrap());
        prop_assert!(f.dominates(&m).unwrap() && g.dominates(&m).unwrap());
    }

    #[test]
    fn tail_envelope_dominates_its_tail(seq in sequence(12, 9), start in 1usize..12, horizon in 1usize..12) {
        let len = seq.len();
        let n = start.min(len);
        let h = horizon.clamp(n, len);
        let env = tail_sup_envelope(&seq, n, h).unwrap();
        for k in n..=h {
            prop_assert!(env.dominates(seq.term(k).unwrap()).unwrap());
        }
        let all = tail_sup_envelopes(&seq, h).unwrap();
        prop_assert_eq!(&all[n - 1], &env);
        for w in all.windows(2) {
            prop_assert!(w[0].dominates(&w[1]).unwrap());
        }
    }

    #[test]
    fn running_meet_is_nonincreasing(seq in sequence(12, 9)) {
        let meets = running_meet(seq.terms()).unwrap();
        prop_assert_eq!(&meets[0], seq.term(1).unwrap());
        for w in meets.windows(2) {
            prop_assert!(w[0].dominates(&w[1]).unwrap());
        }
    }
}

#[test]
fn json_round_trips() {
    let grid = Grid::uniform(5).unwrap();
    let f = SampledFunction::from_fn(&grid, |x| x * x).unwrap();
    let text = serde_json::to_string(&f).unwrap();
    assert!(text.starts_with("{\"grid\":"));
    let back: SampledFunction = serde_json::from_str(&text).unwrap();
    assert_eq!(back, f);

    let seq = FunctionSequence::new(vec![f.clone(), f.scale(0.5).unwrap()], 1.0).unwrap();
    let text = serde_json::to_string(&seq).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["bound"], 1.0);
    assert_eq!(value["terms"].as_array().unwrap().len(), 2);
    let back: FunctionSequence = serde_json::from_str(&text).unwrap();
    assert_eq!(back.terms(), seq.terms());
}
