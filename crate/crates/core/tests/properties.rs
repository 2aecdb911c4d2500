mod common;

use common::{mi_bits, push};
use lnmc::channel::parse_rows;
use lnmc::degradedness::{check_concavity, eta_ln, eta_ln_div_lower, eta_mc, GridSpec};
use lnmc::infotheory::{aux_decomposition, capacity_ba, mutual_information};
use lnmc::nonlinear::{
    domination_spot_check, envelope, profile_f1, profile_g1, uniform_grid, ProfileBudget, ProfileCurve,
};
use lnmc::regions::{
    bc_inner_region, bc_modified_regions, bdc_achievable, prc_capacity, prc_df_rate, theorem1_check, RegionBudget,
};
use lnmc::{AuxiliaryJoint, Channel, Distribution};
use proptest::prelude::*;

fn law(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let v: Vec<f64> = v.into_iter().map(|x| x + 1e-3).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn channel(nx: usize, ny: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(law(ny), nx).prop_map(|rows| Channel::new(&rows).unwrap())
}

fn sized_channel() -> impl Strategy<Value = Channel> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(nx, ny)| channel(nx, ny))
}

fn input_and_channel() -> impl Strategy<Value = (Vec<f64>, Channel)> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(nx, ny)| (law(nx), channel(nx, ny)))
}

fn informative(ch: &Channel) -> bool {
    ch.max_abs_diff(&Channel::new(&vec![ch.row(0).to_vec(); ch.input_size()]).unwrap()).unwrap() > 0.05
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn push_forward_stays_on_simplex((p, ch) in input_and_channel()) {
        let q = ch.push_forward(&Distribution::new(p).unwrap()).unwrap();
        prop_assert!(q.probs().iter().all(|&v| v >= 0.0));
        prop_assert!((q.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cascade_is_associative(
        (a, b, c) in (2usize..=4, 2usize..=4, 2usize..=4, 2usize..=4)
            .prop_flat_map(|(n0, n1, n2, n3)| (channel(n0, n1), channel(n1, n2), channel(n2, n3)))
    ) {
        let left = a.cascade(&b).unwrap().cascade(&c).unwrap();
        let right = a.cascade(&b.cascade(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
        for r in left.rows() {
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dyadic_channels_round_trip_through_text(
        rows in (2usize..=4, 2usize..=4).prop_flat_map(|(nx, ny)| {
            prop::collection::vec(prop::collection::vec(1u32..=8, ny), nx)
        })
    ) {
        // rescale integer weights to a power-of-two denominator per row
        let rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let total: u32 = r.iter().sum();
                let den = total.next_power_of_two();
                let mut v: Vec<f64> = r.iter().map(|&k| k as f64 / den as f64).collect();
                v[0] += (den - total) as f64 / den as f64;
                v
            })
            .collect();
        let ch = Channel::new(&rows).unwrap();
        let back = Channel::new(&parse_rows(&ch.to_string()).unwrap()).unwrap();
        prop_assert_eq!(back.to_rows(), ch.to_rows());
    }

    #[test]
    fn capacity_dominates_any_input((p, ch) in input_and_channel()) {
        let c = capacity_ba(&ch, 1e-9).unwrap();
        prop_assert!(c.capacity >= mutual_information(&Distribution::new(p).unwrap(), &ch).unwrap() - 1e-9);
    }

    #[test]
    fn data_processing(
        (p, ch, k) in (2usize..=4, 2usize..=4, 2usize..=4)
            .prop_flat_map(|(nx, ny, nz)| (law(nx), channel(nx, ny), channel(ny, nz)))
    ) {
        let p = Distribution::new(p).unwrap();
        let after = mutual_information(&p, &ch.cascade(&k).unwrap()).unwrap();
        prop_assert!(after <= mutual_information(&p, &ch).unwrap() + 1e-12);
    }

    #[test]
    fn aux_information_below_input_information(
        (pu, cond, ch) in (1usize..=4, 2usize..=4, 2usize..=4)
            .prop_flat_map(|(nu, nx, ny)| (law(nu), prop::collection::vec(law(nx), nu), channel(nx, ny)))
    ) {
        let j = AuxiliaryJoint::new(
            Distribution::new(pu).unwrap(),
            cond.into_iter().map(|c| Distribution::new(c).unwrap()).collect(),
        )
        .unwrap();
        let (iuy, ixy_u) = aux_decomposition(&j, &ch).unwrap();
        let ixy = mutual_information(&j.x_marginal(), &ch).unwrap();
        prop_assert!(iuy <= ixy + 1e-12);
        prop_assert!((iuy + ixy_u - ixy).abs() <= 1e-9);
    }

    #[test]
    fn output_permutation_leaves_capacity_unchanged(ch in sized_channel()) {
        let perm: Vec<usize> = (0..ch.output_size()).rev().collect();
        let c = capacity_ba(&ch, 1e-10).unwrap().capacity;
        let d = capacity_ba(&ch.permute_outputs(&perm).unwrap(), 1e-10).unwrap().capacity;
        prop_assert!((c - d).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eta_mc_below_eta_ln(
        (a, b) in (2usize..=3, 2usize..=3, 2usize..=3)
            .prop_flat_map(|(nx, n1, n2)| (channel(nx, n1), channel(nx, n2)))
    ) {
        prop_assume!(informative(&a));
        let spec = GridSpec::default();
        let ln = eta_ln(&a, &b, &spec).unwrap();
        prop_assume!(ln.value.is_finite());
        prop_assert!(eta_mc(&a, &b, &spec).unwrap().value <= ln.value + 1e-6);
    }

    #[test]
    fn eta_ln_of_channel_with_itself_is_one(ch in (2usize..=3, 2usize..=4).prop_flat_map(|(nx, ny)| channel(nx, ny))) {
        prop_assume!(informative(&ch));
        let v = eta_ln(&ch, &ch, &GridSpec::default()).unwrap().value;
        prop_assert!((v - 1.0).abs() <= 1e-9, "{}", v);
    }

    #[test]
    fn divergence_search_stays_below_eta_ln((a, b) in (channel(3, 3), channel(3, 3)), seed in 0u64..1000) {
        prop_assume!(informative(&a));
        let eta = eta_ln(&a, &b, &GridSpec::default()).unwrap().value;
        prop_assume!(eta.is_finite());
        let lower = eta_ln_div_lower(&a, &b, 2000, seed).unwrap().value;
        prop_assert!(lower <= eta + 1e-6, "{} > {}", lower, eta);
    }

    #[test]
    fn binary_eta_ln_matches_curvature_ratio((a, b) in (2usize..=3, 2usize..=3).prop_flat_map(|(n1, n2)| (channel(2, n1), channel(2, n2)))) {
        prop_assume!(informative(&a));
        // v'(-H)v along v = (-1, 1) is sum_y (W(y|1) - W(y|0))^2 / q(y)
        let form = |ch: &Channel, t: f64| -> f64 {
            let q = push(&[1.0 - t, t], ch);
            (0..ch.output_size()).map(|y| (ch.get(1, y) - ch.get(0, y)).powi(2) / q[y]).sum()
        };
        let ratio = |t: f64| form(&b, t) / form(&a, t);
        let n = 200_000;
        let (mut bt, mut bv) = (0.0, ratio(0.0));
        for k in 1..=n {
            let t = k as f64 / n as f64;
            let v = ratio(t);
            if v > bv {
                bt = t;
                bv = v;
            }
        }
        let (mut lo, mut hi) = ((bt - 1.0 / n as f64).max(0.0), (bt + 1.0 / n as f64).min(1.0));
        for _ in 0..100 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if ratio(m1) < ratio(m2) { lo = m1 } else { hi = m2 }
        }
        let want = bv.max(ratio(0.5 * (lo + hi)));
        let got = eta_ln(&a, &b, &GridSpec::default()).unwrap().value;
        prop_assert!((got - want).abs() <= 1e-5 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn output_permutation_leaves_coefficients_unchanged(
        (a, b) in (2usize..=3, 2usize..=3, 2usize..=3).prop_flat_map(|(nx, n1, n2)| (channel(nx, n1), channel(nx, n2)))
    ) {
        prop_assume!(informative(&a));
        let spec = GridSpec::default();
        let rev = |c: &Channel| c.permute_outputs(&(0..c.output_size()).rev().collect::<Vec<_>>()).unwrap();
        let (pa, pb) = (rev(&a), rev(&b));
        let x = eta_ln(&a, &b, &spec).unwrap().value;
        let y = eta_ln(&pa, &pb, &spec).unwrap().value;
        prop_assert!(x == y || (x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
        let x = eta_mc(&a, &b, &spec).unwrap().value;
        let y = eta_mc(&pa, &pb, &spec).unwrap().value;
        prop_assert!(x == y || (x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} vs {}", x, y);
        let budget = RegionBudget::default();
        let x = prc_df_rate(&a, &b, 0.1, &budget).unwrap().0;
        let y = prc_df_rate(&pa, &pb, 0.1, &budget).unwrap().0;
        prop_assert!((x - y).abs() <= 1e-9, "{} vs {} for {} {}", x, y, a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn prc_capacity_is_df_rate_and_below_cut((a, b) in (channel(2, 2), channel(2, 3)), frac in 0.05f64..0.95) {
        prop_assume!(informative(&b));
        let budget = RegionBudget::default();
        let probe = prc_capacity(&a, &b, 0.0, &budget).unwrap();
        let cap = probe.thresholds.get("c12_cap").copied().unwrap_or(0.0);
        prop_assume!(cap > 1e-3);
        let c12 = frac * cap;
        let r = prc_capacity(&a, &b, c12, &budget).unwrap();
        prop_assert!(r.conditions_hold);
        let value = r.capacity().unwrap();
        let (df, _) = prc_df_rate(&a, &b, c12, &budget).unwrap();
        prop_assert!((value - df).abs() <= 1e-6, "{} vs {}", value, df);
        prop_assert!(value <= r.thresholds["cut_bound"] + 1e-12);
    }

    #[test]
    fn bdc_rates_are_ordered(
        (a, b, c) in (channel(2, 2), channel(2, 3), channel(2, 2)),
        c13 in 0.0f64..0.3,
        c23 in 0.0f64..0.3,
    ) {
        let budget = RegionBudget { restarts: 16, ..Default::default() };
        let r = bdc_achievable(&a, &b, &c, c13, c23, 3, &budget).unwrap();
        // capacity plus its certified gap bounds C3 from above even without convergence
        let c3 = match capacity_ba(&c, 1e-9) {
            Ok(r) => r.capacity + r.gap,
            Err(lnmc::Error::NotConverged { best, .. }) => best.capacity + best.gap,
            Err(e) => panic!("{e}"),
        };
        let cut = c3 + c13 + c23;
        prop_assert!(r.ri <= r.aux_rate + 1e-12);
        prop_assert!(r.aux_rate <= cut + 1e-9);
    }
}

fn bsc(p: f64) -> Channel {
    Channel::bsc(p).unwrap()
}

#[test]
fn concavity_brackets_eta_ln_on_example_families() {
    let spec = GridSpec::default();
    let pairs = [
        (bsc(0.1), bsc(0.2)),
        (bsc(0.05), bsc(0.3)),
        (Channel::bec(0.1).unwrap(), Channel::bec(0.4).unwrap()),
        (Channel::bec(0.2).unwrap(), Channel::bec(0.25).unwrap()),
        (Channel::z(0.3).unwrap(), bsc(0.1)),
        (Channel::z(0.3).unwrap(), bsc(0.3)),
    ];
    for (a, b) in &pairs {
        let eta = eta_ln(a, b, &spec).unwrap().value;
        assert!(check_concavity(a, b, eta + 1e-4, &spec).unwrap().concave, "{a} {b} above {eta}");
        assert!(!check_concavity(a, b, eta - 1e-3, &spec).unwrap().concave, "{a} {b} below {eta}");
    }
}

#[test]
fn inner_region_grows_with_the_link() {
    let (a, b) = (bsc(0.1), bsc(0.2));
    let budget = RegionBudget::default();
    let small = bc_inner_region(&a, &b, 0.05, 3, &budget).unwrap();
    let large = bc_inner_region(&a, &b, 0.1, 3, &budget).unwrap();
    for p in &small.boundary {
        let r1 = large.r1_at(p.r2).expect("larger region reaches every height of the smaller one");
        assert!(r1 >= p.r1 - 1e-9, "({}, {}) outside, frontier at {r1}", p.r1, p.r2);
    }
}

#[test]
fn modified_inner_inside_outer_and_sum_rate_dominance() {
    let (a, b) = (bsc(0.1), bsc(0.2));
    let budget = RegionBudget::default();
    let eta = eta_ln(&a, &b, &budget.grid).unwrap();
    let c2 = capacity_ba(&b, 1e-9).unwrap().capacity;
    let c12 = 0.5 * (1.0 - eta.value) / eta.value * c2;
    let (inner, outer) = bc_modified_regions(&a, &b, c12, &eta, 3, &budget).unwrap();
    for p in &inner.boundary {
        let r1 = outer.r1_at(p.r2).expect("outer spans the inner heights");
        assert!(p.r1 <= r1 + 1e-9);
    }
    let r = theorem1_check(&a, &b, c12, &budget).unwrap();
    assert!(r.conditions_hold);
    assert!(r.checks["sum_rate_min_slack"] >= -1e-6);
    // every generator above the threshold satisfies the bound directly
    let thr = eta.value / (1.0 - eta.value) * c12;
    for j in inner.generators.iter().chain(&outer.generators) {
        let (u1, _) = aux_decomposition(j, &a).unwrap();
        let (u2, _) = aux_decomposition(j, &b).unwrap();
        if u2 >= thr {
            assert!(u1 >= u2 + c12 - 1e-6, "I(U;Y1) = {u1}, I(U;Y2) = {u2}");
        }
    }
}

struct Profiles {
    f1: ProfileCurve,
    g1: ProfileCurve,
}

fn profiles() -> &'static Profiles {
    static CELL: std::sync::OnceLock<Profiles> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let (a, b) = (bsc(0.1), bsc(0.2));
        let budget = ProfileBudget::default();
        let c1 = capacity_ba(&a, 1e-10).unwrap().capacity;
        let c2 = capacity_ba(&b, 1e-10).unwrap().capacity;
        Profiles {
            f1: profile_f1(&a, &b, &uniform_grid(c1, 41), 2, &budget).unwrap(),
            g1: profile_g1(&a, &b, &uniform_grid(c2, 81), 2, &budget).unwrap(),
        }
    })
}

#[test]
fn profiles_are_dual_on_the_grid() {
    let Profiles { f1, g1 } = profiles();
    let eps = f1.grid_sensitivity.max(g1.grid_sensitivity);
    for &(t, g) in &g1.samples {
        assert!(f1.value_at(g) >= t - eps, "F1(G1({t})) = {} < {t}", f1.value_at(g));
    }
    for &(t, f) in &f1.samples {
        assert!(g1.value_at(f) <= t + eps, "G1(F1({t})) = {} > {t}", g1.value_at(f));
    }
}

#[test]
fn envelopes_bound_profiles_and_are_monotone() {
    let Profiles { f1, g1 } = profiles();
    let (ef, eg) = (envelope(f1), envelope(g1));
    for (e, s) in ef.samples.iter().zip(&f1.samples) {
        assert!(e.1 >= s.1 - 1e-12);
    }
    for (e, s) in eg.samples.iter().zip(&g1.samples) {
        assert!(e.1 <= s.1 + 1e-12);
    }
    assert!(ef.is_nondecreasing(1e-12) && eg.is_nondecreasing(1e-12));
    assert!(ef.is_member(1e-9) && eg.is_member(1e-9));
}

#[test]
fn envelope_sub_and_superadditivity() {
    let Profiles { f1, g1 } = profiles();
    let (ef, eg) = (envelope(f1), envelope(g1));
    let eps = ef.grid_sensitivity.max(eg.grid_sensitivity);
    for (curve, sub) in [(&ef, true), (&eg, false)] {
        let hi = curve.domain.1;
        for i in 0..=20 {
            for j in 0..=20 {
                let (s, t) = (hi * i as f64 / 40.0, hi * j as f64 / 40.0);
                let (lhs, rhs) = (curve.value_at(s + t), curve.value_at(s) + curve.value_at(t));
                if sub {
                    assert!(lhs <= rhs + eps);
                } else {
                    assert!(lhs >= rhs - eps);
                }
            }
        }
    }
}

#[test]
fn convex_envelope_of_g1_dominates_random_joints() {
    let Profiles { g1, .. } = profiles();
    let curve = envelope(g1);
    let (iuy1, bound) = domination_spot_check(&bsc(0.1), &bsc(0.2), &curve, 3, 10_000, 5);
    assert!(iuy1 >= bound - 1e-6, "I(U;Y1) = {iuy1} below {bound}");
}

#[test]
fn profile_witnesses_achieve_their_samples() {
    let Profiles { f1, .. } = profiles();
    let (a, b) = (bsc(0.1), bsc(0.2));
    for ((t, v), w) in f1.samples.iter().zip(&f1.witnesses) {
        if let Some(j) = w {
            let (u1, _) = aux_decomposition(j, &a).unwrap();
            let (u2, _) = aux_decomposition(j, &b).unwrap();
            assert!(u1 <= t + 1e-6 && u2 >= v - 1e-9, "witness ({u1}, {u2}) for ({t}, {v})");
        }
    }
    let _ = mi_bits;
}
