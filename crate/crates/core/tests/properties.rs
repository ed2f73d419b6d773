use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qdrepeater::exec::Execution;
use qdrepeater::fidelity::{self, overall_fidelity_links};
use qdrepeater::mcsim::{self, ProtocolConfig};
use qdrepeater::output::format_sci;
use qdrepeater::params::{parse_quantity, Dimension};
use qdrepeater::qsim::{self, Bell, DensityMatrix, PureState, TransferParams};
use qdrepeater::rates;
use qdrepeater::ParameterSet;

const TWO_PI: f64 = 2.0 * PI;

fn mean_time(p: &ParameterSet) -> f64 {
    rates::mean_time_parallel(p).unwrap().mean_time.seconds().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_exactly(
        kappa in 1e9f64..1e13,
        f_res in 1.0f64..2000.0,
        eta_d in 0.01f64..1.0,
        l_total in 1e3f64..3e6,
        n_nest in 0u32..6,
        pol in 0.0f64..=1.0,
        t_readout in 1e-9f64..1e-5,
        sigma_q in 0.0f64..1e6,
    ) {
        let overrides = [
            format!("kappa={kappa:e} rad/s"),
            format!("F_res={f_res:e}"),
            format!("eta_d={eta_d:e}"),
            format!("L_total={l_total:e} m"),
            format!("n_nest={n_nest}"),
            format!("nuclear_polarization={pol:e}"),
            format!("T_readout={t_readout:e} s"),
            format!("sigma_Q={sigma_q:e} Hz"),
        ];
        let set = ParameterSet::default().with_overrides(overrides.iter().map(String::as_str)).unwrap();
        let text = set.to_config_string();
        let back = ParameterSet::from_config_str(&text).unwrap();
        prop_assert_eq!(&back.physical, &set.physical);
        prop_assert_eq!(&back.link, &set.link);
        prop_assert_eq!(back.to_config_string(), text);
    }

    #[test]
    fn units_are_linear(x in 1e-3f64..1e3) {
        let two_pi = parse_quantity("kappa", Dimension::Angular, &format!("2pi*{x} GHz")).unwrap();
        prop_assert!((two_pi - TWO_PI * x * 1e9).abs() <= 1e-12 * two_pi);
        let plain = parse_quantity("kappa", Dimension::Angular, &format!("{x} GHz")).unwrap();
        prop_assert!((plain - two_pi).abs() <= 1e-12 * two_pi);
        let rate = parse_quantity("D_dark", Dimension::Rate, &format!("{x} kHz")).unwrap();
        prop_assert!((rate - x * 1e3).abs() <= 1e-12 * rate);
        let t = parse_quantity("T_readout", Dimension::Time, &format!("{x} ns")).unwrap();
        prop_assert!((t - x * 1e-9).abs() <= 1e-12 * t);
        let l = parse_quantity("L_att", Dimension::Length, &format!("{x} km")).unwrap();
        prop_assert!((l - x * 1e3).abs() <= 1e-12 * l);
    }

    #[test]
    fn p0_is_quadratic_in_the_efficiency_product(k in 0.05f64..1.0, zeta in 0.1f64..1.0) {
        let mut link = ParameterSet::default().link;
        link.zeta = zeta;
        let l0 = link.elementary_length();
        let base = rates::link_success_probability(&link, l0).unwrap();
        link.zeta = zeta * k;
        let scaled = rates::link_success_probability(&link, l0).unwrap();
        prop_assert!((scaled - k * k * base).abs() <= 1e-12 * base);
    }

    #[test]
    fn mean_time_grows_with_distance(l in 10e3f64..2000e3, dl in 1e3f64..500e3, n in 0u32..5) {
        let mut p = ParameterSet::default();
        p.link.n_nest = n;
        p.link.l_total = l;
        let near = mean_time(&p);
        p.link.l_total = l + dl;
        prop_assert!(mean_time(&p) > near);
    }

    #[test]
    fn mean_time_falls_with_each_efficiency(which in 0usize..6, x in 0.05f64..0.9, dx in 0.01f64..0.1) {
        let set = |v: f64| {
            let mut p = ParameterSet::default();
            match which {
                0 => p.link.zeta = v,
                1 => p.link.p_emit = v,
                2 => p.link.eta_c = v,
                3 => p.link.eta_d = v,
                4 => p.link.eta_fc = v,
                _ => p.link.eta_cav = v,
            }
            mean_time(&p)
        };
        prop_assert!(set(x + dx) < set(x));
    }

    #[test]
    fn total_fidelity_is_monotone(
        comps in prop::array::uniform5(0.5f64..=1.0),
        which in 0usize..5,
        bump in 0.0f64..0.5,
        n in 0u32..5,
    ) {
        let total = |c: &[f64; 5], links: u64| overall_fidelity_links(links, c[0], c[1], c[2], c[3], c[4]);
        let mut raised = comps;
        raised[which] = (raised[which] + bump).min(1.0);
        let l = 1u64 << n;
        prop_assert!(total(&raised, l) >= total(&comps, l));
        prop_assert!(total(&comps, 2 * l) <= total(&comps, l));
    }

    #[test]
    fn quadrupolar_power_law(sigma in 0.0f64..2e5, t in 0.0f64..2e-6) {
        let f1 = fidelity::quadrupolar_factor(sigma, 1, t).unwrap();
        let f2 = fidelity::quadrupolar_factor(sigma, 2, t).unwrap();
        prop_assert!((f2 - f1.powi(16)).abs() <= 1e-12);
    }

    #[test]
    fn gate_mismatch_term_depends_only_on_difference(e in -1e10f64..1e10, shift in -1e10f64..1e10) {
        let mut g = fidelity::GateInputs::from_params(&ParameterSet::default());
        g.delta_eps1 = e;
        g.delta_eps2 = e;
        prop_assert_eq!(fidelity::gate_fidelity(&g).unwrap().terms.detuning_mismatch, 0.0);
        let a = { g.delta_eps2 = e + 1e8; fidelity::gate_fidelity(&g).unwrap().terms.detuning_mismatch };
        g.delta_eps1 = e + shift;
        g.delta_eps2 = e + shift + 1e8;
        let b = fidelity::gate_fidelity(&g).unwrap().terms.detuning_mismatch;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn nuclear_init_is_monotone(a in 0.8f64..=1.0, b in 0.8f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fidelity::nuclear_init_fidelity(lo).unwrap() <= fidelity::nuclear_init_fidelity(hi).unwrap());
    }

    #[test]
    fn format_sci_round_trips(x in -1e300f64..1e300) {
        let s = format_sci(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-7 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn entanglement_fidelity_converges_in_range(
        f_res in 50.0f64..1000.0,
        detuning_ghz in 0.0f64..400.0,
        fwhm_mhz in 50.0f64..1000.0,
    ) {
        let mut p = ParameterSet::default();
        p.physical.f_res = f_res;
        p.physical.detuning = TWO_PI * detuning_ghz * 1e9;
        p.physical.sigma_sd = qdrepeater::params::fwhm_to_sigma(TWO_PI * fwhm_mhz * 1e6).unwrap();
        let est = fidelity::entanglement_fidelity(&p).unwrap();
        prop_assert!(est.rel_change < 1e-6);
        prop_assert!((0.5..=1.0).contains(&est.value));
    }

    #[test]
    fn transfer_preserves_norm_and_obeys_rabi_law(n in 1usize..200, gt in 0.0f64..20.0, phase in 0.0f64..TWO_PI) {
        let p = TransferParams::new(n, 1e6, 2).unwrap();
        let t = gt / p.coupling();
        let alpha = Complex64::from_polar(0.6, phase);
        let s0 = PureState::electron_with_polarized_ensemble(n, alpha, Complex64::new(0.0, 0.8)).unwrap();
        let s = qsim::evolve_transfer(&s0, &p, t).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        let pop = s.collective_amplitude(false, 1).unwrap().norm_sqr();
        prop_assert!((pop - 0.36 * gt.sin().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn noisy_gate_keeps_states_physical(p in -0.3f64..1.0, q in -0.3f64..1.0, f_gate in 0.3f64..=1.0) {
        let rho = DensityMatrix::werner(Bell::PsiPlus, p).unwrap()
            .tensor(&DensityMatrix::werner(Bell::PhiMinus, q).unwrap()).unwrap();
        let out = qsim::apply_cz(&rho, 1, 2, f_gate).unwrap();
        out.check_physical(1e-10).unwrap();
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), n in 0u32..4, p0 in 0.01f64..1.0, ps in 0.2f64..=1.0) {
        let cfg = ProtocolConfig::new(n, p0, ps, 1e-3, 300, seed);
        let a = mcsim::run_trials(&cfg, Execution::Sequential).unwrap();
        let b = mcsim::run_trials(&cfg, Execution::Parallel).unwrap();
        prop_assert!(a.iter().all(|r| r.success && r.total_time >= cfg.slot_time));
        prop_assert_eq!(a, b);
    }
}
