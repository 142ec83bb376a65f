//! Chain families and their one-excitation Hamiltonian blocks.
//!
//! Three families are supported: uniform/per-bond XX chains, staggered
//! Heisenberg chains (isotropic exchange with alternating couplings), and
//! decorated SSH chains (one pendant qubit per cell, N = 3 n_c + 2).
//!
//! `build_one_excitation` assembles the N x N block directly from the bond
//! pattern; `brute_force_block` re-derives it by applying the full 2^N spin
//! Hamiltonian to the single-excitation basis and is used as a test oracle.

use rug::{Float, Rational};

use crate::value::ExactValue;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("chain must have at least 2 spins, got {0}")]
    TooShort(usize),
    #[error("coupling list has length {got}, expected {expected}")]
    CouplingLength { got: usize, expected: usize },
    #[error("coupling `{0}` must be nonzero for this family")]
    ZeroCoupling(&'static str),
    #[error("decorated SSH chain needs n_spins = 3*n_c + 2, got {0}")]
    BadSshLength(usize),
    #[error("site index {0} out of range 1..={1}")]
    SiteOutOfRange(usize, usize),
    #[error("source and target sites must differ")]
    SourceEqualsTarget,
    #[error("brute-force projection limited to N <= {limit}, got {got}")]
    BruteForceTooLarge { got: usize, limit: usize },
}

/// Family-dependent coupling data. All values are exact (rationals or
/// square roots of rationals), so Table-style irrational couplings such as
/// g = sqrt(3) stay exact through matrix assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// Nearest-neighbour XX chain; one coupling per bond (N-1 entries).
    Xx { couplings: Vec<ExactValue> },
    /// Isotropic Heisenberg exchange with J on odd bonds = j1, even = j2.
    StaggeredHeisenberg { j1: ExactValue, j2: ExactValue },
    /// Decorated SSH chain with n_c full cells: v[i] binds A1_i - B_i,
    /// w[i] binds B_i - A1_{i+1}, g[i] binds A1_i - A2_i (g has n_c + 1
    /// entries for the closing two-spin cell). g may be zero.
    DecoratedSsh {
        v: Vec<ExactValue>,
        w: Vec<ExactValue>,
        g: Vec<ExactValue>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSpec {
    pub family: Family,
    pub n_spins: usize,
    /// 1-based site index holding the excitation at t = 0.
    pub source: usize,
    /// 1-based site index read out.
    pub target: usize,
}

impl ChainSpec {
    pub fn xx_uniform(n: usize, j: ExactValue) -> Result<Self, SpecError> {
        Self::xx_bonds(n, vec![j; n.saturating_sub(1)])
    }

    pub fn xx_bonds(n: usize, couplings: Vec<ExactValue>) -> Result<Self, SpecError> {
        let spec = ChainSpec {
            family: Family::Xx { couplings },
            n_spins: n,
            source: 1,
            target: n,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn staggered(n: usize, j1: ExactValue, j2: ExactValue) -> Result<Self, SpecError> {
        let spec = ChainSpec {
            family: Family::StaggeredHeisenberg { j1, j2 },
            n_spins: n,
            source: 1,
            target: n,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform decorated SSH chain with `n_c` full cells. Source and target
    /// default to the A1 qubits of the first and last cells (sites 1, N-1).
    pub fn ssh_uniform(
        n_c: usize,
        v: ExactValue,
        w: ExactValue,
        g: ExactValue,
    ) -> Result<Self, SpecError> {
        Self::ssh_cells(vec![v; n_c], vec![w; n_c], vec![g; n_c + 1])
    }

    pub fn ssh_cells(
        v: Vec<ExactValue>,
        w: Vec<ExactValue>,
        g: Vec<ExactValue>,
    ) -> Result<Self, SpecError> {
        let n_c = v.len();
        let n = 3 * n_c + 2;
        let spec = ChainSpec {
            family: Family::DecoratedSsh { v, w, g },
            n_spins: n,
            source: 1,
            target: n - 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_sites(mut self, source: usize, target: usize) -> Result<Self, SpecError> {
        self.source = source;
        self.target = target;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let n = self.n_spins;
        if n < 2 {
            return Err(SpecError::TooShort(n));
        }
        match &self.family {
            Family::Xx { couplings } => {
                if couplings.len() != n - 1 {
                    return Err(SpecError::CouplingLength {
                        got: couplings.len(),
                        expected: n - 1,
                    });
                }
                if couplings.iter().any(|c| c.is_zero()) {
                    return Err(SpecError::ZeroCoupling("J"));
                }
            }
            Family::StaggeredHeisenberg { j1, j2 } => {
                if j1.is_zero() {
                    return Err(SpecError::ZeroCoupling("J1"));
                }
                if j2.is_zero() {
                    return Err(SpecError::ZeroCoupling("J2"));
                }
            }
            Family::DecoratedSsh { v, w, g } => {
                let n_c = (n - 2) / 3;
                if n != 3 * n_c + 2 || n_c < 1 {
                    return Err(SpecError::BadSshLength(n));
                }
                if v.len() != n_c {
                    return Err(SpecError::CouplingLength {
                        got: v.len(),
                        expected: n_c,
                    });
                }
                if w.len() != n_c {
                    return Err(SpecError::CouplingLength {
                        got: w.len(),
                        expected: n_c,
                    });
                }
                if g.len() != n_c + 1 {
                    return Err(SpecError::CouplingLength {
                        got: g.len(),
                        expected: n_c + 1,
                    });
                }
                if v.iter().chain(w.iter()).any(|c| c.is_zero()) {
                    return Err(SpecError::ZeroCoupling("v/w"));
                }
                // g = 0 is allowed (it degenerates to an XX chain plus
                // detached pendant qubits).
            }
        }
        for site in [self.source, self.target] {
            if site < 1 || site > n {
                return Err(SpecError::SiteOutOfRange(site, n));
            }
        }
        if self.source == self.target {
            return Err(SpecError::SourceEqualsTarget);
        }
        Ok(())
    }

    /// Number of unit cells for decorated SSH chains.
    pub fn n_cells(&self) -> Option<usize> {
        match self.family {
            Family::DecoratedSsh { .. } => Some((self.n_spins - 2) / 3),
            _ => None,
        }
    }
}

/// The one-excitation block: a real symmetric N x N matrix with exact
/// entries. Energies are dimensionless (hbar = 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneExcHamiltonian {
    dim: usize,
    /// Row-major dense entries; entry (i, j) and (j, i) are the same
    /// `ExactValue`, cloned, so symmetry holds bit for bit.
    entries: Vec<ExactValue>,
}

impl OneExcHamiltonian {
    fn zeros(dim: usize) -> Self {
        OneExcHamiltonian {
            dim,
            entries: vec![ExactValue::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ExactValue {
        &self.entries[i * self.dim + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, v: ExactValue) {
        self.entries[i * self.dim + j] = v.clone();
        self.entries[j * self.dim + i] = v;
    }

    fn add_diag(&mut self, i: usize, v: &ExactValue) {
        let cur = self.entries[i * self.dim + i].add(v);
        self.entries[i * self.dim + i] = cur;
    }

    /// Render at `prec` bits, symmetric by construction.
    pub fn to_float_matrix(&self, prec: u32) -> Vec<Vec<Float>> {
        let n = self.dim;
        let mut m = vec![vec![Float::new(prec); n]; n];
        for i in 0..n {
            for j in i..n {
                let f = self.entry(i, j).to_float(prec);
                m[i][j] = f.clone();
                m[j][i] = f;
            }
        }
        m
    }

    /// Max |difference| against another block, as f64. Exact equality gives 0.
    pub fn max_abs_diff(&self, other: &OneExcHamiltonian) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0f64;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let d = a.sub(b).to_float(128).to_f64().abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// Bonds of the chain graph with their hop amplitude in the one-excitation
/// block, plus (for Heisenberg) the zz coupling on each bond.
struct BondPattern {
    /// (site_a, site_b, hop amplitude) with 1-based sites.
    hops: Vec<(usize, usize, ExactValue)>,
    /// (site_a, site_b, zz coupling); empty for XX and SSH.
    zz: Vec<(usize, usize, ExactValue)>,
}

fn bond_pattern(spec: &ChainSpec) -> BondPattern {
    let n = spec.n_spins;
    match &spec.family {
        Family::Xx { couplings } => BondPattern {
            hops: (0..n - 1)
                .map(|k| (k + 1, k + 2, couplings[k].clone()))
                .collect(),
            zz: vec![],
        },
        Family::StaggeredHeisenberg { j1, j2 } => {
            // Bond k (1-based) carries J1 when k is odd, J2 when even.
            let two = Rational::from(2);
            let mut hops = Vec::new();
            let mut zz = Vec::new();
            for k in 1..n {
                let j = if k % 2 == 1 { j1 } else { j2 };
                hops.push((k, k + 1, j.scale(&two)));
                zz.push((k, k + 1, j.clone()));
            }
            BondPattern { hops, zz }
        }
        Family::DecoratedSsh { v, w, g } => {
            // Cell i (1-based): A1 at 3i-2, A2 at 3i-1, B at 3i.
            let n_c = (n - 2) / 3;
            let mut hops = Vec::new();
            for i in 1..=n_c + 1 {
                if !g[i - 1].is_zero() {
                    hops.push((3 * i - 2, 3 * i - 1, g[i - 1].clone()));
                }
            }
            for i in 1..=n_c {
                hops.push((3 * i - 2, 3 * i, v[i - 1].clone()));
                hops.push((3 * i, 3 * i + 1, w[i - 1].clone()));
            }
            BondPattern { hops, zz: vec![] }
        }
    }
}

/// Assemble the one-excitation block directly from the bond pattern.
///
/// Off-diagonal (i, j) is the hop amplitude of bond (i, j). For Heisenberg
/// chains the zz part contributes the site-dependent diagonal
/// sum_b J_b - 2 (J_left(k) + J_right(k)); XX and SSH blocks have zero
/// diagonal.
pub fn build_one_excitation(spec: &ChainSpec) -> Result<OneExcHamiltonian, SpecError> {
    spec.validate()?;
    let pattern = bond_pattern(spec);
    let mut h = OneExcHamiltonian::zeros(spec.n_spins);
    for (a, b, amp) in &pattern.hops {
        h.set_sym(a - 1, b - 1, amp.clone());
    }
    if !pattern.zz.is_empty() {
        let total = pattern
            .zz
            .iter()
            .fold(ExactValue::zero(), |acc, (_, _, j)| acc.add(j));
        let minus_two = Rational::from(-2);
        for k in 0..spec.n_spins {
            h.add_diag(k, &total);
            for (a, b, j) in &pattern.zz {
                if *a == k + 1 || *b == k + 1 {
                    h.add_diag(k, &j.scale(&minus_two));
                }
            }
        }
    }
    Ok(h)
}

const BRUTE_FORCE_LIMIT: usize = 14;

/// Project the full 2^N spin Hamiltonian onto the single-excitation basis.
///
/// Works term by term on basis bitmasks (bit k set = excitation at site
/// k+1), so no dense 2^N matrix is ever formed. Panics if a Hamiltonian
/// term ever maps a one-excitation state out of the sector; that would
/// break magnetization conservation, the premise of the block reduction.
pub fn brute_force_block(spec: &ChainSpec) -> Result<OneExcHamiltonian, SpecError> {
    spec.validate()?;
    let n = spec.n_spins;
    if n > BRUTE_FORCE_LIMIT {
        return Err(SpecError::BruteForceTooLarge {
            got: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let pattern = bond_pattern(spec);
    let mut h = OneExcHamiltonian::zeros(n);
    for k in 0..n {
        let state: u32 = 1 << k;
        // Accumulate H|state> as mask -> coefficient.
        let mut out: Vec<(u32, ExactValue)> = Vec::new();
        let mut add = |mask: u32, coeff: ExactValue| {
            if coeff.is_zero() {
                return;
            }
            if let Some(slot) = out.iter_mut().find(|(m, _)| *m == mask) {
                slot.1 = slot.1.add(&coeff);
            } else {
                out.push((mask, coeff));
            }
        };
        for (a, b, amp) in &pattern.hops {
            // amp * (sigma^+_a sigma^-_b + sigma^-_a sigma^+_b)
            let (ba, bb) = (1u32 << (a - 1), 1u32 << (b - 1));
            if state & bb != 0 && state & ba == 0 {
                add(state ^ bb ^ ba, amp.clone());
            }
            if state & ba != 0 && state & bb == 0 {
                add(state ^ ba ^ bb, amp.clone());
            }
        }
        for (a, b, j) in &pattern.zz {
            // sigma^z_a sigma^z_b is diagonal: +1 if the two sites agree,
            // -1 if exactly one carries the excitation.
            let (ba, bb) = (1u32 << (a - 1), 1u32 << (b - 1));
            let aligned = (state & ba != 0) == (state & bb != 0);
            let sign = if aligned {
                Rational::from(1)
            } else {
                Rational::from(-1)
            };
            add(state, j.scale(&sign));
        }
        for (mask, coeff) in out {
            assert_eq!(
                mask.count_ones(),
                1,
                "Hamiltonian term left the one-excitation sector"
            );
            let m = mask.trailing_zeros() as usize;
            // H|k> = sum_m coeff |m>, so coeff is the (m, k) entry.
            let cur = h.entry(m, k).add(&coeff);
            h.entries[m * n + k] = cur.clone();
        }
    }
    // Symmetrize bit for bit: entries were produced column by column and
    // are equal across the diagonal; clone the upper triangle down.
    for i in 0..n {
        for j in i + 1..n {
            debug_assert!(h.entry(i, j).sub(h.entry(j, i)).is_zero());
            h.entries[j * n + i] = h.entry(i, j).clone();
        }
    }
    Ok(h)
}
