//! The weight at the sign-change node is `sgn(0) h = +h`, which breaks the
//! `lambda -> -conj(lambda)` symmetry of odd-weight problems at first order
//! in `h`. The continuum sech^2 well has a single nonreal pair at `i`.

use indefsl_core::coeff::CoefficientField;
use indefsl_core::eigen::EigOptions;
use indefsl_core::spectra::level_spectrum;

#[test]
fn sech2_pair_converges_to_i_at_first_order() {
    let f = CoefficientField::parse("sgn(x)", "1", "-2*sech(x)^2")
        .unwrap()
        .with_window(0.0, 0.0);
    let mut re = Vec::new();
    for density in [10.0, 20.0, 40.0] {
        let s = level_spectrum(&f, 10.0, density, &EigOptions::default()).unwrap();
        assert_eq!(s.pairs.len(), 1, "density {density}");
        let z = s.pairs[0];
        assert!((z.im - 1.0).abs() < 0.01, "{z}");
        re.push(z.re);
    }
    for w in re.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.05, "{re:?}");
    }
}
