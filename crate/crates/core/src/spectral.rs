//! High-precision eigendecomposition and trigonometric transfer forms.
//!
//! The eigensolver is a cyclic Jacobi iteration in MPFR arithmetic; spectra
//! here are small (N <= 64) and precision dominates cost. The transmission
//! amplitude A(t) = sum_k v_k(i) v_k(j) exp(-i lambda_k t) is reduced, when
//! the spectrum is +/- symmetric, to a constant plus signed cos/sin terms
//! with positive deduplicated frequencies.

use rug::float::Constant;
use rug::{Float, Integer};

use crate::chain::{ChainSpec, OneExcHamiltonian};

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("Jacobi iteration failed to converge at {0} bits after 4 precision escalations")]
    NoConvergence(u32),
    #[error("precision must be at least 64 bits, got {0}")]
    PrecisionTooLow(u32),
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
/// matrix, together with the working mantissa size.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<Float>,
    /// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Float>>,
    pub precision_bits: u32,
}

fn max_abs(m: &[Vec<Float>]) -> Float {
    let prec = m[0][0].prec();
    let mut best = Float::new(prec);
    for row in m {
        for x in row {
            let a = x.clone().abs();
            if a > best {
                best = a;
            }
        }
    }
    best
}

/// One full cyclic Jacobi pass; returns the largest off-diagonal magnitude
/// remaining afterwards.
fn jacobi_sweep(a: &mut [Vec<Float>], q: &mut [Vec<Float>], skip_below: &Float) -> Float {
    let n = a.len();
    let prec = a[0][0].prec();
    for p in 0..n {
        for r in p + 1..n {
            let apr = a[p][r].clone();
            if apr.clone().abs() <= *skip_below {
                continue;
            }
            // Classic symmetric Schur rotation.
            let diff = Float::with_val(prec, &a[r][r] - &a[p][p]);
            let theta = diff / (Float::with_val(prec, 2) * &apr);
            let t = {
                let mag = Float::with_val(prec, theta.clone().square() + 1u32).sqrt();
                let denom = Float::with_val(prec, theta.clone().abs() + mag);
                let t = denom.recip();
                if theta < 0 {
                    -t
                } else {
                    t
                }
            };
            let c = Float::with_val(prec, t.clone().square() + 1u32)
                .sqrt()
                .recip();
            let s = Float::with_val(prec, &t * &c);
            for k in 0..n {
                let akp = a[k][p].clone();
                let akr = a[k][r].clone();
                a[k][p] = Float::with_val(prec, &c * &akp) - Float::with_val(prec, &s * &akr);
                a[k][r] = Float::with_val(prec, &s * &akp) + Float::with_val(prec, &c * &akr);
            }
            for k in 0..n {
                let apk = a[p][k].clone();
                let ark = a[r][k].clone();
                a[p][k] = Float::with_val(prec, &c * &apk) - Float::with_val(prec, &s * &ark);
                a[r][k] = Float::with_val(prec, &s * &apk) + Float::with_val(prec, &c * &ark);
            }
            // Keep the zeroed pair exactly zero.
            a[p][r] = Float::new(prec);
            a[r][p] = Float::new(prec);
            for k in 0..n {
                let qkp = q[k][p].clone();
                let qkr = q[k][r].clone();
                q[k][p] = Float::with_val(prec, &c * &qkp) - Float::with_val(prec, &s * &qkr);
                q[k][r] = Float::with_val(prec, &s * &qkp) + Float::with_val(prec, &c * &qkr);
            }
        }
    }
    let mut worst = Float::new(prec);
    for p in 0..n {
        for r in p + 1..n {
            let m = a[p][r].clone().abs();
            if m > worst {
                worst = m;
            }
        }
    }
    worst
}

fn jacobi(h: &OneExcHamiltonian, prec: u32) -> Option<SpectralData> {
    let n = h.dim();
    let work = prec + 32;
    let mut a = h.to_float_matrix(work);
    let mut q = vec![vec![Float::new(work); n]; n];
    for (k, row) in q.iter_mut().enumerate() {
        row[k] = Float::with_val(work, 1);
    }
    let scale = {
        let m = max_abs(&a);
        if m == 0 {
            Float::with_val(work, 1)
        } else {
            m
        }
    };
    let target = Float::with_val(work, &scale) >> (work - 8);
    let mut converged = false;
    for _ in 0..60 {
        let off = jacobi_sweep(&mut a, &mut q, &target);
        if off <= target {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
    let eigenvalues = order
        .iter()
        .map(|&i| Float::with_val(prec, &a[i][i]))
        .collect();
    let eigenvectors = order
        .iter()
        .map(|&i| (0..n).map(|r| Float::with_val(prec, &q[r][i])).collect())
        .collect();
    Some(SpectralData {
        eigenvalues,
        eigenvectors,
        precision_bits: prec,
    })
}

/// Diagonalize at `precision_bits` or better. On convergence failure the
/// precision is doubled and the sweep restarted, up to four escalations.
pub fn decompose(
    h: &OneExcHamiltonian,
    precision_bits: u32,
) -> Result<SpectralData, SpectralError> {
    if precision_bits < 64 {
        return Err(SpectralError::PrecisionTooLow(precision_bits));
    }
    let mut prec = precision_bits;
    for _ in 0..=4 {
        if let Some(sd) = jacobi(h, prec) {
            return Ok(sd);
        }
        prec *= 2;
    }
    Err(SpectralError::NoConvergence(prec))
}

impl SpectralData {
    /// Worst residual max_k ||h v_k - lambda_k v_k||_inf.
    pub fn residual(&self, h: &OneExcHamiltonian) -> Float {
        let prec = self.precision_bits + 32;
        let hm = h.to_float_matrix(prec);
        let n = h.dim();
        let mut worst = Float::new(prec);
        for (lam, vec) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for r in 0..n {
                let mut acc = Float::new(prec);
                for c in 0..n {
                    acc += Float::with_val(prec, &hm[r][c] * &vec[c]);
                }
                acc -= Float::with_val(prec, lam * &vec[r]);
                let a = acc.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// Worst orthonormality defect max |<v_k, v_l> - delta_kl|.
    pub fn orthonormality_defect(&self) -> Float {
        let prec = self.precision_bits + 32;
        let n = self.eigenvectors.len();
        let mut worst = Float::new(prec);
        for k in 0..n {
            for l in k..n {
                let mut acc = Float::new(prec);
                for c in 0..n {
                    acc += Float::with_val(
                        prec,
                        &self.eigenvectors[k][c] * &self.eigenvectors[l][c],
                    );
                }
                if k == l {
                    acc -= 1u32;
                }
                let a = acc.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }
}

/// Trigonometric term of a reduced transfer form. `shift` 0 is a cosine,
/// 1/2 a sine (the argument target is offset by half a period).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shift {
    Zero,
    Half,
}

impl Shift {
    pub fn is_sin(self) -> bool {
        matches!(self, Shift::Half)
    }
}

#[derive(Clone, Debug)]
pub struct TrigTerm {
    pub weight: Float,
    pub frequency: Float,
    pub shift: Shift,
}

/// One eigenpair's contribution to the unreduced amplitude.
#[derive(Clone, Debug)]
pub struct EigenTerm {
    pub eigenvalue: Float,
    pub weight: Float,
}

/// The transmission amplitude between the spec's source and target sites.
///
/// When the spectrum pairs as lambda <-> -lambda the amplitude collapses to
/// `constant + sum_k weight_k * trig(frequency_k t)` (up to a global phase)
/// and `terms` carries the reduction. Otherwise `general` holds the raw
/// eigenpair sum and the cos/sin fields stay empty; probability evaluation
/// works on either representation.
#[derive(Clone, Debug)]
pub struct TransferForm {
    pub constant: Float,
    pub terms: Vec<TrigTerm>,
    pub general: Option<Vec<EigenTerm>>,
    pub precision_bits: u32,
    pub source: usize,
    pub target: usize,
}

impl TransferForm {
    pub fn is_general(&self) -> bool {
        self.general.is_some()
    }

    /// |a0| + sum |a_k| (or sum |w_k| for general forms). Equals 1 exactly
    /// when the form can reach probability 1.
    pub fn weight_norm(&self) -> Float {
        let prec = self.precision_bits;
        match &self.general {
            Some(pairs) => {
                let mut acc = Float::new(prec + 32);
                for p in pairs {
                    acc += p.weight.clone().abs();
                }
                Float::with_val(prec, acc)
            }
            None => {
                let mut acc = Float::with_val(prec + 32, self.constant.clone().abs());
                for t in &self.terms {
                    acc += t.weight.clone().abs();
                }
                Float::with_val(prec, acc)
            }
        }
    }

    /// Positive frequencies entering the probability. For general forms
    /// these are the eigenvalue gaps to the lowest contributing level (the
    /// probability only sees differences; a global shift is pure phase).
    pub fn frequencies(&self) -> Vec<Float> {
        match &self.general {
            None => self.terms.iter().map(|t| t.frequency.clone()).collect(),
            Some(pairs) => {
                let prec = self.precision_bits;
                let reference = &pairs[0].eigenvalue;
                pairs[1..]
                    .iter()
                    .map(|p| Float::with_val(prec, &p.eigenvalue - reference))
                    .collect()
            }
        }
    }
}

/// Reduce the amplitude for `spec`'s source/target from spectral data.
///
/// Weights are w_k = v_k(source) v_k(target). Eigenvalues pair across
/// lambda <-> -lambda within 2^(-prec/2); equal-weight pairs become cosine
/// terms, opposite-weight pairs sine terms, zero modes accumulate into the
/// constant. Mixed pairs or an asymmetric spectrum fall back to the general
/// representation.
pub fn transfer_form(spec: &ChainSpec, sd: &SpectralData) -> TransferForm {
    let prec = sd.precision_bits;
    let n = sd.eigenvalues.len();
    let tol = Float::with_val(prec, 1) >> (prec / 2);
    let weights: Vec<Float> = (0..n)
        .map(|k| {
            Float::with_val(
                prec,
                &sd.eigenvectors[k][spec.source - 1] * &sd.eigenvectors[k][spec.target - 1],
            )
        })
        .collect();

    let general = || {
        let mut pairs: Vec<EigenTerm> = (0..n)
            .filter(|&k| weights[k].clone().abs() > tol)
            .map(|k| EigenTerm {
                eigenvalue: sd.eigenvalues[k].clone(),
                weight: weights[k].clone(),
            })
            .collect();
        // Merge numerically degenerate levels; P only sees distinct gaps.
        let mut merged: Vec<EigenTerm> = Vec::new();
        for p in pairs.drain(..) {
            match merged.last_mut() {
                Some(last)
                    if Float::with_val(prec, &p.eigenvalue - &last.eigenvalue).abs() <= tol =>
                {
                    last.weight += p.weight;
                }
                _ => merged.push(p),
            }
        }
        merged.retain(|p| p.weight.clone().abs() > tol);
        TransferForm {
            constant: Float::new(prec),
            terms: vec![],
            general: Some(merged),
            precision_bits: prec,
            source: spec.source,
            target: spec.target,
        }
    };

    let mut constant = Float::new(prec);
    let mut terms: Vec<TrigTerm> = Vec::new();
    let mut lo = 0usize;
    let mut hi = n;
    while lo < hi {
        let lam_hi = &sd.eigenvalues[hi - 1];
        if lam_hi.clone().abs() <= tol {
            // Remaining levels are all zero modes.
            for k in lo..hi {
                if sd.eigenvalues[k].clone().abs() > tol {
                    return general();
                }
                constant += &weights[k];
            }
            break;
        }
        if lo == hi - 1 {
            return general(); // unpaired extreme level
        }
        let lam_lo = &sd.eigenvalues[lo];
        if Float::with_val(prec, lam_lo + lam_hi).abs() > tol {
            return general();
        }
        let w_plus = &weights[hi - 1];
        let w_minus = &weights[lo];
        let cos_w = Float::with_val(prec, w_plus + w_minus);
        let sin_w = Float::with_val(prec, w_plus - w_minus);
        match (cos_w.clone().abs() > tol, sin_w.clone().abs() > tol) {
            (true, true) => return general(),
            (true, false) => terms.push(TrigTerm {
                weight: cos_w,
                frequency: lam_hi.clone(),
                shift: Shift::Zero,
            }),
            (false, true) => terms.push(TrigTerm {
                weight: sin_w,
                frequency: lam_hi.clone(),
                shift: Shift::Half,
            }),
            (false, false) => {}
        }
        lo += 1;
        hi -= 1;
    }

    // Sort ascending by frequency, then merge duplicates of the same kind.
    terms.sort_by(|a, b| {
        a.frequency
            .partial_cmp(&b.frequency)
            .unwrap()
            .then_with(|| a.shift.is_sin().cmp(&b.shift.is_sin()))
    });
    let mut merged: Vec<TrigTerm> = Vec::new();
    for t in terms {
        match merged.last_mut() {
            Some(last)
                if last.shift == t.shift
                    && Float::with_val(prec, &t.frequency - &last.frequency).abs() <= tol =>
            {
                last.weight += t.weight;
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.weight.clone().abs() > tol);

    TransferForm {
        constant,
        terms: merged,
        general: None,
        precision_bits: prec,
        source: spec.source,
        target: spec.target,
    }
}

/// Working precision big enough to evaluate trig at argument magnitude
/// `arg_bits` with `target_bits` of headroom after reduction mod 2 pi.
fn trig_working_prec(target_bits: u32, arg_bits: u32) -> u32 {
    target_bits + arg_bits + 32
}

fn arg_bits(x: &Float, t: &Float) -> u32 {
    let bits = |f: &Float| -> u32 {
        match f.get_exp() {
            Some(e) if e > 0 => e as u32,
            _ => 0,
        }
    };
    bits(x) + bits(t) + 1
}

/// Transmission probability of the form at time `t`.
///
/// The working mantissa is widened by the argument magnitude so that
/// cos(x t) keeps `precision_bits/2` valid bits even for t ~ 10^12 pi; the
/// result is clamped to [0, 1].
pub fn evaluate_probability(form: &TransferForm, t: &Float, precision_bits: u32) -> Float {
    let mut worst_arg = 0u32;
    match &form.general {
        None => {
            for term in &form.terms {
                worst_arg = worst_arg.max(arg_bits(&term.frequency, t));
            }
        }
        Some(pairs) => {
            for p in pairs {
                worst_arg = worst_arg.max(arg_bits(&p.eigenvalue, t));
            }
        }
    }
    let wp = trig_working_prec(precision_bits, worst_arg);
    let tw = Float::with_val(wp, t);
    // A(t) = C - i S up to a global phase.
    let mut c = Float::new(wp);
    let mut s = Float::new(wp);
    match &form.general {
        None => {
            c += Float::with_val(wp, &form.constant);
            for term in &form.terms {
                let arg = Float::with_val(wp, &term.frequency) * &tw;
                let w = Float::with_val(wp, &term.weight);
                match term.shift {
                    Shift::Zero => c += w * arg.cos(),
                    Shift::Half => s += w * arg.sin(),
                }
            }
        }
        Some(pairs) => {
            for p in pairs {
                let arg = Float::with_val(wp, &p.eigenvalue) * &tw;
                let w = Float::with_val(wp, &p.weight);
                let (sin, cos) = arg.sin_cos(Float::new(wp));
                c += Float::with_val(wp, &w * &cos);
                s += w * sin;
            }
        }
    }
    let p = Float::with_val(wp, c.square() + s.square());
    let mut out = Float::with_val(precision_bits, p);
    if out > 1 {
        out = Float::with_val(precision_bits, 1);
    }
    if out < 0 {
        out = Float::new(precision_bits);
    }
    out
}

/// Probability at the grid time t = q * pi / den (den 1 or 2).
pub fn evaluate_probability_at_grid(
    form: &TransferForm,
    q: &Integer,
    den: u32,
    precision_bits: u32,
) -> Float {
    let q_bits = q.significant_bits() as u32;
    let wp = precision_bits + q_bits + 64;
    let t = Float::with_val(wp, Constant::Pi) * Float::with_val(wp, q) / den;
    evaluate_probability(form, &t, precision_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_one_excitation, ChainSpec};
    use crate::value::{parse_coupling, ExactValue};

    fn one() -> ExactValue {
        ExactValue::from_integer(1)
    }

    fn xx(n: usize) -> ChainSpec {
        ChainSpec::xx_uniform(n, one()).unwrap()
    }

    fn decompose_spec(spec: &ChainSpec, prec: u32) -> SpectralData {
        decompose(&build_one_excitation(spec).unwrap(), prec).unwrap()
    }

    #[test]
    fn xx2_eigenvalues() {
        let sd = decompose_spec(&xx(2), 128);
        assert!((sd.eigenvalues[0].to_f64() + 1.0).abs() < 1e-30);
        assert!((sd.eigenvalues[1].to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn xx7_reported_spectrum() {
        // {0, +-sqrt(2), +-sqrt(2 -+ sqrt(2))}
        let sd = decompose_spec(&xx(7), 192);
        let sqrt2 = 2f64.sqrt();
        let expect = [
            -(2.0 + sqrt2).sqrt(),
            -sqrt2,
            -(2.0 - sqrt2).sqrt(),
            0.0,
            (2.0 - sqrt2).sqrt(),
            sqrt2,
            (2.0 + sqrt2).sqrt(),
        ];
        for (lam, e) in sd.eigenvalues.iter().zip(expect) {
            assert!((lam.to_f64() - e).abs() < 1e-12, "{lam} vs {e}");
        }
    }

    #[test]
    fn ssh_g2_table_spectrum() {
        // n_c = 2, v = w = 1, g = 2: {0, 0, +-2, +-sqrt5, +-sqrt7}
        let spec = ChainSpec::ssh_uniform(2, one(), one(), ExactValue::from_integer(2)).unwrap();
        let sd = decompose_spec(&spec, 192);
        let mut got: Vec<f64> = sd.eigenvalues.iter().map(|l| l.to_f64()).collect();
        let mut expect = vec![
            0.0,
            0.0,
            2.0,
            -2.0,
            5f64.sqrt(),
            -(5f64.sqrt()),
            7f64.sqrt(),
            -(7f64.sqrt()),
        ];
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_and_orthonormality_invariants() {
        for spec in [
            xx(7),
            ChainSpec::ssh_uniform(3, one(), one(), parse_coupling("sqrt(2)").unwrap()).unwrap(),
            ChainSpec::staggered(8, one(), ExactValue::from_integer(5)).unwrap(),
        ] {
            let h = build_one_excitation(&spec).unwrap();
            let sd = decompose(&h, 256).unwrap();
            let bound = 2f64.powi(-128);
            assert!(sd.residual(&h).to_f64() < bound);
            assert!(sd.orthonormality_defect().to_f64() < bound);
            for w in sd.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn persymmetric_spectrum_is_odd() {
        let sd = decompose_spec(&xx(9), 192);
        let n = sd.eigenvalues.len();
        for i in 0..n {
            let s = Float::with_val(192, &sd.eigenvalues[i] + &sd.eigenvalues[n - 1 - i]);
            assert!(s.abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn xx2_form_is_single_sine() {
        let spec = xx(2);
        let f = transfer_form(&spec, &decompose_spec(&spec, 128));
        assert!(!f.is_general());
        assert_eq!(f.terms.len(), 1);
        assert_eq!(f.terms[0].shift, Shift::Half);
        assert!((f.terms[0].weight.to_f64().abs() - 1.0).abs() < 1e-30);
        assert!((f.terms[0].frequency.to_f64() - 1.0).abs() < 1e-30);
        assert!(f.constant.to_f64().abs() < 1e-30);
    }

    #[test]
    fn xx5_form_matches_closed_expression() {
        // a0 = 2/6, terms (-3/6, 1, cos), (1/6, sqrt3, cos) up to global sign.
        let spec = xx(5);
        let f = transfer_form(&spec, &decompose_spec(&spec, 192));
        assert!(!f.is_general());
        assert_eq!(f.terms.len(), 2);
        let sign = if f.constant.to_f64() > 0.0 { 1.0 } else { -1.0 };
        assert!((sign * f.constant.to_f64() - 2.0 / 6.0).abs() < 1e-40);
        assert!((sign * f.terms[0].weight.to_f64() + 3.0 / 6.0).abs() < 1e-40);
        assert!((f.terms[0].frequency.to_f64() - 1.0).abs() < 1e-40);
        assert!((sign * f.terms[1].weight.to_f64() - 1.0 / 6.0).abs() < 1e-40);
        assert!((f.terms[1].frequency.to_f64() - 3f64.sqrt()).abs() < 1e-40);
        assert_eq!(f.terms[0].shift, Shift::Zero);
    }

    #[test]
    fn ssh_form_weights_are_sixths() {
        // Any g: a0 = 0, weights {2/6 at g, -3/6 at sqrt(1+g^2), 1/6 at
        // sqrt(3+g^2)} up to global sign.
        for g_str in ["1", "2", "sqrt(2)", "4/3"] {
            let g = parse_coupling(g_str).unwrap();
            let spec = ChainSpec::ssh_uniform(2, one(), one(), g.clone()).unwrap();
            let f = transfer_form(&spec, &decompose_spec(&spec, 192));
            assert!(!f.is_general(), "g = {g_str}");
            assert!(f.constant.to_f64().abs() < 1e-25);
            assert_eq!(f.terms.len(), 3);
            let gv = g.to_float(64).to_f64();
            let freqs: Vec<f64> = f.terms.iter().map(|t| t.frequency.to_f64()).collect();
            let mut expect = vec![gv, (1.0 + gv * gv).sqrt(), (3.0 + gv * gv).sqrt()];
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (got, e) in freqs.iter().zip(&expect) {
                assert!((got - e).abs() < 1e-12);
            }
            // The global sign of the amplitude is gauge; accept either.
            let weights: Vec<f64> = f.terms.iter().map(|t| t.weight.to_f64()).collect();
            let matches = |sign: f64| {
                let mut w: Vec<f64> = weights.iter().map(|x| sign * x).collect();
                w.sort_by(|a, b| a.partial_cmp(b).unwrap());
                w.iter()
                    .zip([-0.5, 1.0 / 6.0, 2.0 / 6.0])
                    .all(|(got, e)| (got - e).abs() < 1e-12)
            };
            assert!(matches(1.0) || matches(-1.0), "g = {g_str}");
        }
    }

    #[test]
    fn staggered_form_falls_back_to_general() {
        let spec = ChainSpec::staggered(4, one(), ExactValue::from_integer(10)).unwrap();
        let f = transfer_form(&spec, &decompose_spec(&spec, 192));
        assert!(f.is_general());
        let norm = f.weight_norm().to_f64();
        assert!((norm - 1.0).abs() < 1e-9, "norm = {norm}");
    }

    #[test]
    fn probability_zero_at_t_zero() {
        for spec in [xx(5), xx(6)] {
            let f = transfer_form(&spec, &decompose_spec(&spec, 192));
            let p = evaluate_probability(&f, &Float::with_val(192, 0), 128);
            assert!(p.to_f64() < 1e-30);
            // all-cos with source != target: a0 + sum a_k = 0
            if !f.is_general() && f.terms.iter().all(|t| t.shift == Shift::Zero) {
                let mut s = f.constant.clone();
                for t in &f.terms {
                    s += &t.weight;
                }
                assert!(s.abs().to_f64() < 1e-40);
            }
        }
    }

    #[test]
    fn normalization_bound() {
        for spec in [
            xx(4),
            xx(9),
            ChainSpec::ssh_uniform(4, one(), one(), one()).unwrap(),
            ChainSpec::staggered(8, one(), ExactValue::from_integer(5)).unwrap(),
        ] {
            let f = transfer_form(&spec, &decompose_spec(&spec, 256));
            assert!(f.weight_norm().to_f64() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn huge_argument_evaluation_is_stable() {
        let spec = xx(5);
        let f = transfer_form(&spec, &decompose_spec(&spec, 256));
        let q = Integer::from(10u64.pow(12));
        let p = evaluate_probability_at_grid(&f, &q, 1, 192);
        assert!(p >= 0 && p <= 1);
        // Same value again: deterministic.
        let p2 = evaluate_probability_at_grid(&f, &q, 1, 192);
        assert_eq!(p, p2);
    }
}
