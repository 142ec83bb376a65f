//! Rationality tests and integer-relation detection for form frequencies.
//!
//! The constant 1 is adjoined to the relation search so rational
//! frequencies and rational affine dependencies (x - y = 1 and the like)
//! are caught by one mechanism; K_I is the rank of the rational span of
//! {1, x_1, ..., x_m} minus one. Detection runs lattice reduction on the
//! scaled vector, and every candidate relation is re-verified at the full
//! input precision before it is reported.

use rug::{Float, Integer, Rational};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("frequencies must be positive")]
    NonPositive,
    #[error("frequencies must be pairwise distinct at the working precision")]
    NotDistinct,
    #[error("candidate relation {0:?} is neither verifiable nor refutable at this precision")]
    Inconclusive(Vec<Integer>),
}

/// Classification of a frequency list over the rationals.
#[derive(Clone, Debug)]
pub struct FrequencyAnalysis {
    /// (index into the input list, exact fraction) for frequencies that are
    /// rational within certificate precision.
    pub rational_part: Vec<(usize, Rational)>,
    pub irrational_part: Vec<usize>,
    /// Integer vectors r of length m + 1 with r . (1, x_1, ..., x_m) = 0;
    /// coordinate 0 multiplies the adjoined constant.
    pub relations: Vec<Vec<Integer>>,
    /// Count of rationally independent irrationals:
    /// dim_Q span{1, x_1, ..., x_m} - 1.
    pub k_i: usize,
    pub certificate_precision: u32,
    /// True when reduction produced a short candidate whose coefficients
    /// exceeded the height limit; independence is then only evidenced up to
    /// that height.
    pub unexplored: bool,
}

/// Exact dyadic value of a Float. Every finite Float is a rational with a
/// power-of-two denominator.
pub fn float_to_rational(x: &Float) -> Rational {
    x.to_rational().expect("finite float")
}

/// Continued-fraction convergents of an exact rational, most recent last.
fn rational_convergents(x: &Rational, max_den: &Integer) -> Vec<(Integer, Integer)> {
    let mut out = Vec::new();
    let (mut p_prev, mut q_prev) = (Integer::from(0), Integer::from(1));
    let (mut p, mut q) = (Integer::from(1), Integer::from(0));
    let mut rest = x.clone();
    loop {
        let a = rest.clone().floor().into_numer_denom().0;
        let p_next = Integer::from(&a * &p) + &p_prev;
        let q_next = Integer::from(&a * &q) + &q_prev;
        if q_next > *max_den {
            break;
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
        let frac = rest - a;
        if frac == 0 {
            break;
        }
        rest = frac.recip();
    }
    out
}

/// Best rational p/q with q <= max_den reproducing `x` to 2^(-prec/2),
/// or None if no convergent gets that close.
pub fn rational_check(x: &Float, max_den: &Integer, precision_bits: u32) -> Option<Rational> {
    let exact = float_to_rational(x);
    let threshold = Rational::from((Integer::from(1), Integer::from(1) << (precision_bits / 2)));
    for (p, q) in rational_convergents(&exact, max_den).into_iter().rev() {
        let cand = Rational::from((p, q));
        let err = Rational::from(&exact - &cand).abs();
        if err <= threshold {
            return Some(cand);
        }
    }
    None
}

/// Lovasz-reduce an integer row basis in place (delta = 0.99), using
/// floating Gram-Schmidt at a precision driven by the entry sizes.
pub fn lll_reduce(basis: &mut [Vec<Integer>]) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let dim = basis[0].len();
    let max_bits = basis
        .iter()
        .flat_map(|row| row.iter())
        .map(|e| e.significant_bits())
        .max()
        .unwrap_or(1);
    let prec = max_bits + 32 * n as u32 + 64;

    let gso = |b: &[Vec<Integer>]| -> (Vec<Vec<Float>>, Vec<Float>) {
        let mut mu = vec![vec![Float::new(prec); n]; n];
        let mut star: Vec<Vec<Float>> = Vec::with_capacity(n);
        let mut norm2 = vec![Float::new(prec); n];
        for i in 0..n {
            let mut v: Vec<Float> = b[i]
                .iter()
                .map(|e| Float::with_val(prec, e))
                .collect();
            for j in 0..i {
                let mut dot = Float::new(prec);
                for t in 0..dim {
                    dot += Float::with_val(prec, &b[i][t]) * &star[j][t];
                }
                let m = if norm2[j] == 0 {
                    Float::new(prec)
                } else {
                    dot / &norm2[j]
                };
                for t in 0..dim {
                    let sub = Float::with_val(prec, &m * &star[j][t]);
                    v[t] -= sub;
                }
                mu[i][j] = m;
            }
            let mut s = Float::new(prec);
            for t in 0..dim {
                s += v[t].clone().square();
            }
            norm2[i] = s;
            star.push(v);
        }
        (mu, norm2)
    };

    let delta = 0.99f64;
    let mut k = 1usize;
    let mut guard = 0usize;
    let max_iters = 64 * n * n * (max_bits as usize + 2);
    while k < n {
        guard += 1;
        if guard > max_iters {
            break; // refuse to loop forever on pathological input
        }
        // Size-reduce b_k, refreshing the GSO after every subtraction so
        // large mu values are eliminated to full precision.
        loop {
            let (mu, _) = gso(basis);
            let Some(j) = (0..k)
                .rev()
                .find(|&j| mu[k][j].clone().abs().to_f64() > 0.5)
            else {
                break;
            };
            let ri = mu[k][j]
                .clone()
                .round()
                .to_integer()
                .expect("finite mu");
            if ri == 0 {
                break;
            }
            for t in 0..dim {
                let sub = Integer::from(&ri * &basis[j][t]);
                basis[k][t] -= sub;
            }
        }
        let (mu, norm2b) = gso(basis);
        let lhs = norm2b[k].to_f64();
        let m = mu[k][k - 1].to_f64();
        let rhs = (delta - m * m) * norm2b[k - 1].to_f64();
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

fn abs_float(x: Float) -> Float {
    x.abs()
}

/// Evaluate r . (1, x_1, ..., x_m) at the inputs' precision.
fn relation_residual(r: &[Integer], freqs: &[Float], prec: u32) -> Float {
    let wp = prec + 64;
    let mut acc = Float::with_val(wp, &r[0]);
    for (ri, x) in r[1..].iter().zip(freqs) {
        acc += Float::with_val(wp, ri) * Float::with_val(wp, x);
    }
    abs_float(acc)
}

/// Exact interval check: with each frequency widened to an interval of
/// radius `radius`, does r . (1, x_1, ..., x_m) bracket zero?
pub fn relation_brackets_zero(r: &[Integer], freqs: &[Float], radius: &Rational) -> bool {
    let mut lo = Rational::from(&r[0]);
    let mut hi = lo.clone();
    for (ri, x) in r[1..].iter().zip(freqs) {
        let center = float_to_rational(x);
        let a = Rational::from(ri) * Rational::from(&center - radius);
        let b = Rational::from(ri) * (center + radius);
        if a <= b {
            lo += a;
            hi += b;
        } else {
            lo += b;
            hi += a;
        }
    }
    lo <= 0 && hi >= 0
}

/// Rank over Q of a set of integer vectors (fraction-free elimination).
fn integer_rank(rows: &[Vec<Integer>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(Rational::from).collect())
        .collect();
    let mut rank = 0;
    let cols = rows.first().map_or(0, |r| r.len());
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].clone().recip();
        for c in col..cols {
            m[rank][c] *= &inv;
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let f = m[i][col].clone();
                for c in col..cols {
                    let sub = Rational::from(&f * &m[rank][c]);
                    m[i][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Classify `freqs` into rationals and irrationals, find verified integer
/// relations (with 1 adjoined) up to `height_limit`, and count the
/// rationally independent irrationals.
pub fn classify_frequencies(
    freqs: &[Float],
    height_limit: &Integer,
    precision_bits: u32,
) -> Result<FrequencyAnalysis, ClassifyError> {
    let m = freqs.len();
    let tol = Float::with_val(precision_bits, 1) >> (precision_bits / 2);
    for (i, x) in freqs.iter().enumerate() {
        if !(*x > 0) {
            return Err(ClassifyError::NonPositive);
        }
        for y in &freqs[..i] {
            if Float::with_val(precision_bits, x - y).abs() <= tol {
                return Err(ClassifyError::NotDistinct);
            }
        }
    }

    let mut rational_part = Vec::new();
    let mut irrational_part = Vec::new();
    for (i, x) in freqs.iter().enumerate() {
        match rational_check(x, height_limit, precision_bits) {
            Some(frac) => rational_part.push((i, frac)),
            None => irrational_part.push(i),
        }
    }

    let mut relations: Vec<Vec<Integer>> = Vec::new();
    // Rational frequencies: q x - p = 0 against the adjoined constant.
    for (i, frac) in &rational_part {
        let mut r = vec![Integer::from(0); m + 1];
        r[0] = -Integer::from(frac.numer());
        r[i + 1] = Integer::from(frac.denom());
        relations.push(r);
    }

    // Relation lattice over (1, irrationals): rows [e_i | round(C y_i)].
    let mut unexplored = false;
    if !irrational_part.is_empty() {
        let k = irrational_part.len() + 1; // constant + irrationals
        let scale_bits = precision_bits / 2;
        let wp = precision_bits + 64;
        let scaled: Vec<Integer> = std::iter::once(Float::with_val(wp, 1))
            .chain(
                irrational_part
                    .iter()
                    .map(|&i| Float::with_val(wp, &freqs[i])),
            )
            .map(|y| {
                let s = y << scale_bits;
                s.round().to_integer().expect("finite")
            })
            .collect();
        let mut basis: Vec<Vec<Integer>> = (0..k)
            .map(|i| {
                let mut row = vec![Integer::from(0); k + 1];
                row[i] = Integer::from(1);
                row[k] = scaled[i].clone();
                row
            })
            .collect();
        lll_reduce(&mut basis);

        // A row whose trailing coordinate collapsed is a candidate relation.
        let verify_bound = Float::with_val(wp, 1) >> (precision_bits / 2);
        let reject_bound = Float::with_val(wp, 1) >> (precision_bits / 4);
        let irr_floats: Vec<Float> = irrational_part.iter().map(|&i| freqs[i].clone()).collect();
        for row in &basis {
            let coeffs = &row[..k];
            if coeffs.iter().all(|c| *c == 0) {
                continue;
            }
            let residual_scaled = row[k].clone().abs();
            // Candidate when the scaled residual is far below the scale.
            let cand_bound = Integer::from(1) << (scale_bits / 2);
            if residual_scaled > cand_bound {
                continue;
            }
            // Rows with coefficients beyond the height limit are generic
            // for an independent tuple (LLL shortens the trailing entry at
            // the cost of coefficient growth); they only matter if they
            // turn out to be genuine relations, which then live beyond the
            // certified height.
            let within_height = coeffs.iter().all(|c| c.clone().abs() <= *height_limit);
            let residual = relation_residual(coeffs, &irr_floats, precision_bits);
            if residual <= verify_bound {
                if within_height {
                    // Express over the full index set.
                    let mut full = vec![Integer::from(0); m + 1];
                    full[0] = coeffs[0].clone();
                    for (slot, &orig) in irrational_part.iter().enumerate() {
                        full[orig + 1] = coeffs[slot + 1].clone();
                    }
                    relations.push(full);
                } else {
                    unexplored = true;
                }
            } else if within_height && residual <= reject_bound {
                return Err(ClassifyError::Inconclusive(coeffs.to_vec()));
            }
            // else: lattice artifact, genuinely nonzero; ignore.
        }
    }

    // Deduplicate linearly dependent relations; k_i = m - rank.
    let rank = integer_rank(&relations);
    let k_i = m - rank;
    Ok(FrequencyAnalysis {
        rational_part,
        irrational_part,
        relations,
        k_i,
        certificate_precision: precision_bits,
        unexplored,
    })
}
