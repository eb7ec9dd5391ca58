use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qshutter::resonances::{PoleFamily, ResonancePole};
use qshutter::transient::{
    external_ratio_closed_form, internal_buildup_ratio, time_scales, IncidenceSpec, Side, TransientSeries,
    ValidityWindow,
};
use qshutter::units::{canonical_double_barrier, CONSTANTS};

const MU: f64 = 0.067;

proptest! {
    #[test]
    fn closed_form_at_exit_is_the_buildup_ratio(
        a in 0.2f64..2.0,
        b in 1e-4f64..0.05,
        detuning_widths in 0.2f64..20.0,
        t in 0.0f64..2e4,
        above in any::<bool>(),
    ) {
        let pole = ResonancePole::from_wavenumber(1, Complex64::new(a, -b), MU);
        let side = if above { Side::Above } else { Side::Below };
        let de = detuning_widths * pole.width;
        prop_assume!(pole.energy - de > 0.0);
        let inc = IncidenceSpec::relative(&pole, de, side, MU).unwrap();
        let omega = inc.detuning(&pole) / CONSTANTS.hbar;
        let w = ValidityWindow { factor: 1.0, force: true };
        let closed = external_ratio_closed_form(&pole, &inc, 15.0, 15.0, t, w).unwrap();
        prop_assert!((closed - internal_buildup_ratio(pole.width, omega, t)).abs() < 1e-13);
    }

    #[test]
    fn buildup_ratio_is_bounded(width in 0.01f64..50.0, omega in 0.0f64..1.0, t in 0.0f64..1e5) {
        let r = internal_buildup_ratio(width, omega, t);
        let envelope = (1.0 + (-0.5 * width * t / CONSTANTS.hbar).exp()).powi(2);
        prop_assert!(r >= -1e-15);
        prop_assert!(r <= envelope + 1e-12);
    }
}

#[test]
fn crossover_follows_the_pi_width_boundary() {
    let p = canonical_double_barrier();
    let pole = PoleFamily::build(&p, 1).unwrap().terms()[0].pole;
    for i in 1..=60 {
        let m = 0.1 * i as f64;
        let s = time_scales(&pole, pole.energy - m * pole.width, 1);
        let faster = s.tau_r.unwrap() < s.tau_l;
        assert_eq!(s.crossover, faster, "ΔE = {m} Γ");
        assert_eq!(faster, m > PI, "ΔE = {m} Γ");
    }
}

#[test]
fn resonance_incidence_rises_without_pulses() {
    let p = canonical_double_barrier();
    let f = PoleFamily::build(&p, 10).unwrap();
    let pole = f.terms()[0].pole;
    let inc = IncidenceSpec::relative(&pole, 0.0, Side::Below, MU).unwrap();
    let s = TransientSeries::new(&p, &f, inc).unwrap();
    // a short diffraction transient precedes the buildup; from then on the rise is monotone
    let ts: Vec<f64> = (150..=8000).step_by(2).map(f64::from).collect();
    let tr = s.trace(p.length(), &ts).unwrap();
    for (w, t) in tr.density.windows(2).zip(&tr.t) {
        assert!(w[1] >= w[0], "density falls after t = {t} fs");
    }
    assert!(tr.density[0] < 0.5 && *tr.density.last().unwrap() > 0.99);
}
