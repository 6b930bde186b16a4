use proptest::prelude::*;

use qmultisum::field::{int, rat, ExactScalar, Field};
use qmultisum::qcore::{complete_homogeneous, gauss_binomial, q_pochhammer};
use qmultisum::registry::{
    entry_for, eval_pair, random_instance, Backend, Bounds, ChainOrder, EvalOptions, Laurent, SideValue, Vals,
};
use qmultisum::{verify, IdentityId, ReportDocument};

fn rational() -> impl Strategy<Value = ExactScalar> {
    (-50i64..=50, 1i64..=50).prop_map(|(p, d)| rat(p, d))
}

fn base() -> impl Strategy<Value = ExactScalar> {
    rational().prop_filter("q must avoid 0 and +-1", |q| *q != int(0) && *q != int(1) && *q != int(-1))
}

fn exact_ids() -> Vec<IdentityId> {
    IdentityId::ALL.iter().copied().filter(|id| entry_for(*id).backend == Backend::Exact).collect()
}

fn exact_id() -> impl Strategy<Value = IdentityId> {
    proptest::sample::select(exact_ids())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_recurrence(args in prop::collection::vec(rational(), 2..=6), k in 1i64..=6) {
        let n = args.len();
        let full = complete_homogeneous(k, &args).unwrap();
        let rec = complete_homogeneous(k, &args[..n - 1]).unwrap()
            + &args[n - 1] * complete_homogeneous(k - 1, &args).unwrap();
        prop_assert_eq!(full, rec);
    }

    #[test]
    fn gauss_binomial_symmetric(q in base(), n in 0u32..=10, r in 0u32..=10) {
        let r = r.min(n);
        prop_assert_eq!(gauss_binomial(n, r, &q).unwrap(), gauss_binomial(n, n - r, &q).unwrap());
    }

    #[test]
    fn pochhammer_split(a in rational(), q in base(), m in 0u32..=8, n in 0u32..=8) {
        let shifted = a.clone() * q.powi(i64::from(m)).unwrap();
        prop_assert_eq!(q_pochhammer(&a, &q, m + n), q_pochhammer(&a, &q, m) * q_pochhammer(&shifted, &q, n));
    }

    #[test]
    fn random_instances_are_reproducible(id in proptest::sample::select(IdentityId::ALL.to_vec()), seed in any::<u64>()) {
        let b = Bounds::default();
        let first = random_instance(id, seed, &b).unwrap();
        prop_assert_eq!(&first, &random_instance(id, seed, &b).unwrap());
        prop_assert!(first.validate().is_ok());
    }

    #[test]
    fn summation_order_does_not_matter(id in exact_id(), seed in 0u64..10_000) {
        let inst = random_instance(id, seed, &Bounds::default()).unwrap();
        let unit = int(1);
        let vals = Vals::from_env(&unit, &inst.env);
        let reference = eval_pair(&inst, &vals, EvalOptions::default()).unwrap();
        for order in [ChainOrder::Reversed, ChainOrder::Memoized] {
            let opts = EvalOptions { order, ..EvalOptions::default() };
            prop_assert_eq!(&eval_pair(&inst, &vals, opts).unwrap(), &reference, "{:?}", order);
        }
    }

    #[test]
    fn exact_identities_hold(id in exact_id(), seed in 10_000u64..20_000) {
        let inst = random_instance(id, seed, &Bounds::default()).unwrap();
        let r = verify(&inst).unwrap();
        prop_assert!(r.passed(), "{} [{}]", id, r.instance);
    }

    #[test]
    fn laurent_regular_part_is_multiplicative(a in rational(), b in rational(), c in rational()) {
        // (a + eps)(b + eps) / (c + eps) at eps = 0, when c != 0.
        prop_assume!(c != int(0));
        let f = Laurent::shifted(a.clone()) * Laurent::shifted(b.clone()) * Laurent::shifted(c.clone()).inv().unwrap();
        prop_assert_eq!(f.regular_value().unwrap(), a * b / c);
    }

    #[test]
    fn laurent_simple_pole_residue(a in rational()) {
        // (1 - t)/(1 - t) * a with t = 1 + eps has no pole left.
        let t = Laurent::shifted(int(1));
        let one = t.one_like();
        let f = (one.clone() - t.clone()) * Laurent::constant(a.clone()) * (one - t).inv().unwrap();
        prop_assert_eq!(f.regular_value().unwrap(), a);
    }

    #[test]
    fn side_values_round_trip(v in rational()) {
        let s = SideValue::exact(v.clone());
        let text = serde_json::to_string(&s).unwrap();
        let back: SideValue = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.as_rational(), Some(&v));
    }

    #[test]
    fn report_documents_round_trip(id in exact_id(), seed in 0u64..1000) {
        let inst = random_instance(id, seed, &Bounds::default()).unwrap();
        let doc = ReportDocument::new(Default::default(), vec![verify(&inst).unwrap()]);
        let text = doc.to_json();
        prop_assert_eq!(ReportDocument::from_json(&text).unwrap().to_json(), text);
    }
}
