//! Shared fixtures for the integration tests: reference closed forms for
//! the decorated SSH chains (independently derivable from the +/-lambda
//! paired spectrum), a deterministic time sampler, and a matrix-exponential
//! oracle that knows nothing about the spectral reduction.
#![allow(dead_code)]

use pgt_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float};

pub const PREC: u32 = 256;

pub fn f(v: f64) -> Float {
    Float::with_val(PREC, v)
}

pub fn sqrt(v: Float) -> Float {
    v.sqrt()
}

/// (constant + sum w_k cos(x_k t))^2 / denom
pub struct ClosedForm {
    pub constant: Float,
    pub terms: Vec<(Float, Float)>,
    pub denom: u32,
}

impl ClosedForm {
    pub fn eval(&self, t: &Float) -> Float {
        let mut acc = self.constant.clone();
        for (w, x) in &self.terms {
            acc += w * Float::with_val(PREC, x * t).cos();
        }
        acc.square() / self.denom
    }
}

pub fn ssh_spec(cells: usize, g: &str) -> ChainSpec {
    let one = parse_coupling("1").unwrap();
    ChainSpec::ssh_uniform(cells, one.clone(), one, parse_coupling(g).unwrap()).unwrap()
}

/// Eight-spin chain, arbitrary pendant coupling g:
/// (cos sqrt(3+g^2) t - 3 cos sqrt(1+g^2) t + 2 cos g t)^2 / 36.
pub fn closed_ssh8(g: f64) -> ClosedForm {
    let g2 = g * g;
    let mut terms = vec![
        (f(1.0), sqrt(f(3.0 + g2))),
        (f(-3.0), sqrt(f(1.0 + g2))),
    ];
    let mut constant = f(0.0);
    if g == 0.0 {
        constant = f(2.0); // cos(0 t) folds into the constant
    } else {
        terms.push((f(2.0), f(g)));
    }
    ClosedForm {
        constant,
        terms,
        denom: 36,
    }
}

pub fn closed_cases() -> Vec<(&'static str, ChainSpec, ClosedForm)> {
    let s2 = sqrt(f(2.0));
    let s3 = sqrt(f(3.0));
    let s5 = sqrt(f(5.0));
    let mut cases: Vec<(&'static str, ChainSpec, ClosedForm)> = vec![
        ("ssh8 g=0", ssh_spec(2, "0"), closed_ssh8(0.0)),
        ("ssh8 g=1", ssh_spec(2, "1"), closed_ssh8(1.0)),
        ("ssh8 g=4/3", ssh_spec(2, "4/3"), closed_ssh8(4.0 / 3.0)),
        ("ssh8 g=2", ssh_spec(2, "2"), closed_ssh8(2.0)),
    ];
    // Irrational g: build the closed form with exact sqrt to keep 1e-10.
    for (label, lit, gsq) in [
        ("ssh8 g=sqrt(3)", "sqrt(3)", 3.0),
        ("ssh8 g=sqrt(2)", "sqrt(2)", 2.0),
        ("ssh8 g=sqrt(5)", "sqrt(5)", 5.0),
    ] {
        let mut cf = closed_ssh8(0.0);
        cf.terms = vec![
            (f(1.0), sqrt(f(3.0 + gsq))),
            (f(-3.0), sqrt(f(1.0 + gsq))),
            (f(2.0), sqrt(f(gsq))),
        ];
        cf.constant = f(0.0);
        cases.push((label, ssh_spec(2, lit), cf));
    }

    cases.push((
        "ssh11 g=0",
        ssh_spec(3, "0"),
        ClosedForm {
            constant: f(-2.0),
            terms: vec![
                (f(-2.0), s2.clone()),
                (f(2.0) + &s2, sqrt(f(2.0) - &s2)),
                (f(2.0) - &s2, sqrt(f(2.0) + &s2)),
            ],
            denom: 64,
        },
    ));
    cases.push((
        "ssh11 g=1",
        ssh_spec(3, "1"),
        ClosedForm {
            constant: f(0.0),
            terms: vec![
                (f(-2.0), f(1.0)),
                (f(-2.0), s3.clone()),
                (f(2.0) + &s2, sqrt(f(3.0) - &s2)),
                (f(2.0) - &s2, sqrt(f(3.0) + &s2)),
            ],
            denom: 64,
        },
    ));
    cases.push((
        "ssh14 g=0",
        ssh_spec(4, "0"),
        ClosedForm {
            constant: f(4.0),
            terms: vec![
                (-(f(5.0) - &s5), sqrt((f(3.0) + &s5) / 2u32)),
                (-(f(5.0) + &s5), sqrt((f(3.0) - &s5) / 2u32)),
                (f(3.0) + &s5, sqrt((f(5.0) - &s5) / 2u32)),
                (f(3.0) - &s5, sqrt((f(5.0) + &s5) / 2u32)),
            ],
            denom: 400,
        },
    ));
    cases.push((
        "ssh14 g=1",
        ssh_spec(4, "1"),
        ClosedForm {
            constant: f(0.0),
            terms: vec![
                (f(4.0), f(1.0)),
                (-(f(5.0) + &s5), sqrt((f(5.0) - &s5) / 2u32)),
                (-(f(5.0) - &s5), sqrt((f(5.0) + &s5) / 2u32)),
                (f(3.0) + &s5, sqrt((f(7.0) - &s5) / 2u32)),
                (f(3.0) - &s5, sqrt((f(7.0) + &s5) / 2u32)),
            ],
            denom: 400,
        },
    ));
    cases.push((
        "ssh17 g=0",
        ssh_spec(5, "0"),
        ClosedForm {
            constant: f(-2.0),
            terms: vec![
                (f(-3.0), f(1.0)),
                (f(2.0), s2.clone()),
                (f(-1.0), s3.clone()),
                (f(2.0) + &s3, sqrt(f(2.0) - &s3)),
                (f(2.0) - &s3, sqrt(f(2.0) + &s3)),
            ],
            denom: 144,
        },
    ));
    cases.push((
        "ssh17 g=1",
        ssh_spec(5, "1"),
        ClosedForm {
            constant: f(0.0),
            terms: vec![
                (f(-2.0), f(1.0)),
                (f(-1.0), f(2.0)),
                (f(-3.0), s2.clone()),
                (f(2.0), s3.clone()),
                (f(2.0) + &s3, sqrt(f(3.0) - &s3)),
                (f(2.0) - &s3, sqrt(f(3.0) + &s3)),
            ],
            denom: 144,
        },
    ));
    cases
}

pub fn sample_times(n: usize, seed: u64) -> Vec<Float> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Float::with_val(PREC, rng.gen_range(0.0..100.0)))
        .collect()
}

/// e^{-iHt} by scaling-and-squaring with a Taylor core, in rug Complex.
pub fn expm_amplitude(h: &OneExcHamiltonian, t: &Float, source: usize, target: usize) -> Float {
    let n = h.dim();
    let hf = h.to_float_matrix(PREC);
    // A = -i H t / 2^s with a small norm so Taylor converges fast.
    let mut max_abs: f64 = 0.0;
    for row in &hf {
        for v in row {
            max_abs = max_abs.max(v.to_f64().abs());
        }
    }
    let scale = (max_abs * t.to_f64().abs() * n as f64).max(1e-300);
    let s = scale.log2().ceil().max(0.0) as u32 + 2;
    let czero = || Complex::with_val(PREC, (0, 0));
    let mut a: Vec<Vec<Complex>> = vec![vec![czero(); n]; n];
    let factor = Float::with_val(PREC, t) >> s; // t / 2^s
    for i in 0..n {
        for j in 0..n {
            // -i * H_ij * t/2^s
            let re = Float::with_val(PREC, 0);
            let im = Float::with_val(PREC, -&hf[i][j]) * &factor;
            a[i][j] = Complex::with_val(PREC, (re, im));
        }
    }
    let matmul = |x: &Vec<Vec<Complex>>, y: &Vec<Vec<Complex>>| -> Vec<Vec<Complex>> {
        let mut out = vec![vec![czero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if x[i][k].real().is_zero() && x[i][k].imag().is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = Complex::with_val(PREC, &x[i][k] * &y[k][j]);
                    out[i][j] += prod;
                }
            }
        }
        out
    };
    // exp(A) = I + A + A^2/2! + ...
    let mut result: Vec<Vec<Complex>> = vec![vec![czero(); n]; n];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = Complex::with_val(PREC, (1, 0));
    }
    let mut term = result.clone();
    let cutoff = Float::with_val(PREC, 1u32) >> (PREC + 32);
    for k in 1..500u32 {
        term = matmul(&term, &a);
        let mut biggest = Float::new(PREC);
        for i in 0..n {
            for j in 0..n {
                term[i][j] /= k;
                let m = Float::with_val(PREC, term[i][j].clone().abs().real());
                if m > biggest {
                    biggest = m;
                }
                result[i][j] += &term[i][j];
            }
        }
        if biggest < cutoff {
            break;
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    let amp = &result[target - 1][source - 1];
    Float::with_val(PREC, amp.clone().abs().real())
}

