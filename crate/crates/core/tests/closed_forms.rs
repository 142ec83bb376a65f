//! The decorated SSH chains carry closed-form transmission probabilities
//! (the +/-lambda paired spectrum makes the amplitude a short cosine sum).
//! These tests pin the extracted `TransferForm` against those expressions
//! on a dense sample, and arbitrate both against a matrix-exponential
//! oracle that knows nothing about the spectral reduction.

mod common;

use common::*;
use pgt_core::*;
use rug::Float;

#[test]
fn transfer_forms_match_closed_expressions() {
    let times = sample_times(1000, 7);
    let tol = f(1e-10);
    for (label, spec, cf) in closed_cases() {
        let h = build_one_excitation(&spec).unwrap();
        let sd = decompose(&h, PREC).unwrap();
        let form = transfer_form(&spec, &sd);
        for t in &times {
            let p = evaluate_probability(&form, t, PREC);
            let q = cf.eval(t);
            let diff = Float::with_val(PREC, &p - &q).abs();
            assert!(diff <= tol, "{label}: t={} diff={}", t.to_f64(), diff.to_f64());
        }
    }
}

#[test]
fn evaluation_matches_matrix_exponential() {
    let one = parse_coupling("1").unwrap();
    let mut specs: Vec<(String, ChainSpec)> = Vec::new();
    for n in [2usize, 4, 5, 6, 7, 8, 9, 10] {
        specs.push((
            format!("xx{n}"),
            ChainSpec::xx_uniform(n, ExactValue::from_integer(1)).unwrap(),
        ));
    }
    specs.push((
        "stag4".into(),
        ChainSpec::staggered(4, one.clone(), ExactValue::from_integer(10)).unwrap(),
    ));
    specs.push((
        "stag8".into(),
        ChainSpec::staggered(8, one.clone(), ExactValue::from_integer(5)).unwrap(),
    ));
    for (cells, g) in [(2usize, "sqrt(2)"), (3, "1"), (4, "0"), (5, "1")] {
        specs.push((format!("ssh{}_g={g}", 3 * cells + 2), ssh_spec(cells, g)));
    }

    let times = sample_times(25, 11);
    let tol = f(1e-10);
    for (label, spec) in &specs {
        let h = build_one_excitation(spec).unwrap();
        let sd = decompose(&h, PREC).unwrap();
        let form = transfer_form(spec, &sd);
        for t in &times {
            let p = evaluate_probability(&form, t, PREC);
            let amp = expm_amplitude(&h, t, spec.source, spec.target);
            let q = amp.square();
            let diff = Float::with_val(PREC, &p - &q).abs();
            assert!(
                diff <= tol,
                "{label}: t={} form={} oracle={}",
                t.to_f64(),
                p.to_f64(),
                q.to_f64()
            );
        }
    }
}
