//! Field-free spectrum of the scaled symmetric quartic double well
//!
//! ```text
//! V(X) = -X^2/4 + X^4/(64 alpha)
//! ```
//!
//! expanded in harmonic-oscillator eigenfunctions centered at X = 0. The
//! barrier top sits at V(0) = 0, the minima at X = +/-sqrt(8 alpha) with
//! V = -alpha and unit curvature, and alpha roughly counts the tunneling
//! doublets below the barrier.
//!
//! Matrix elements of X, X^2, X^4 and P^2 are exact in the expansion basis
//! (ladder-operator algebra; powers taken in an enlarged basis so truncation
//! never corrupts retained elements). Basis functions have definite parity,
//! so the Hamiltonian splits into even/odd blocks and eigenstates carry an
//! exact parity label.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Barrier parameter of the scaled quartic double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    alpha: f64,
}

impl PotentialParams {
    pub const DEFAULT_ALPHA: f64 = 1.735;

    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// V(X) = -X^2/4 + X^4/(64 alpha).
    pub fn potential(&self, x: f64) -> f64 {
        -x * x / 4.0 + x.powi(4) / (64.0 * self.alpha)
    }

    /// Position of the right minimum, sqrt(8 alpha).
    pub fn minimum_position(&self) -> f64 {
        (8.0 * self.alpha).sqrt()
    }
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self { alpha: Self::DEFAULT_ALPHA }
    }
}

/// Size and frequency of the oscillator expansion basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig {
    n_basis: usize,
    basis_frequency: f64,
}

impl BasisConfig {
    pub const DEFAULT_N_BASIS: usize = 120;
    pub const MIN_N_BASIS: usize = 16;

    pub fn new(n_basis: usize, basis_frequency: f64) -> Result<Self> {
        if n_basis == 0 {
            return Err(Error::InvalidConfig("n_basis must be positive".into()));
        }
        if !basis_frequency.is_finite() || basis_frequency <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "basis_frequency must be positive and finite, got {basis_frequency}"
            )));
        }
        if n_basis < Self::MIN_N_BASIS {
            return Err(Error::BasisInadequacy(format!(
                "n_basis = {n_basis} is below the minimum {} needed for a usable spectrum",
                Self::MIN_N_BASIS
            )));
        }
        Ok(Self { n_basis, basis_frequency })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn basis_frequency(&self) -> f64 {
        self.basis_frequency
    }
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { n_basis: Self::DEFAULT_N_BASIS, basis_frequency: 1.0 }
    }
}

/// Spatial parity of an eigenstate of a symmetric potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// Lowest eigenpairs of the double well: energies, parities, and the dipole
/// matrix <i|X|j> in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    energies: Vec<f64>,
    parities: Vec<Parity>,
    dipole: DMatrix<f64>,
    n_levels: usize,
    max_parity_leakage: f64,
}

impl EigenSolution {
    /// Assemble a solution from raw parts, validating the structural
    /// invariants (ascending energies, symmetric dipole of matching size).
    pub fn from_parts(
        energies: Vec<f64>,
        parities: Vec<Parity>,
        dipole: DMatrix<f64>,
    ) -> Result<Self> {
        let n = energies.len();
        if parities.len() != n || dipole.nrows() != n || dipole.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "energies ({n}), parities ({}), dipole ({}x{}) disagree",
                parities.len(),
                dipole.nrows(),
                dipole.ncols()
            )));
        }
        if energies.iter().any(|e| !e.is_finite())
            || energies.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::NumericalFailure("energies not strictly increasing".into()));
        }
        let scale = dipole.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (dipole[(i, j)] - dipole[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::NumericalFailure(format!(
                        "dipole matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { energies, parities, dipole, n_levels: n, max_parity_leakage: 0.0 })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn parity(&self, k: usize) -> Parity {
        self.parities[k]
    }

    pub fn dipole(&self, i: usize, j: usize) -> f64 {
        self.dipole[(i, j)]
    }

    pub fn dipole_matrix(&self) -> &DMatrix<f64> {
        &self.dipole
    }

    /// Largest weight any eigenvector carries on the wrong-parity basis
    /// indices (exactly zero when the Hamiltonian splits into parity blocks).
    pub fn max_parity_leakage(&self) -> f64 {
        self.max_parity_leakage
    }

    /// Splitting E(2n+1) - E(2n) of the n-th tunneling doublet.
    pub fn doublet_splitting(&self, n: usize) -> Result<f64> {
        let hi = 2 * n + 1;
        if hi >= self.n_levels {
            return Err(Error::OutOfRange(format!(
                "doublet {n} needs level {hi}, only {} retained",
                self.n_levels
            )));
        }
        Ok(self.energies[hi] - self.energies[2 * n])
    }

    /// Number of doublets whose both members lie below the barrier top V = 0.
    pub fn doublets_below_barrier(&self) -> usize {
        (0..self.n_levels / 2)
            .take_while(|&n| self.energies[2 * n + 1] < 0.0)
            .count()
    }
}

/// Position operator in the oscillator basis: X[k][k+1] = sqrt((k+1)/(2 w0)).
fn x_operator(dim: usize, omega0: f64) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(dim, dim);
    for k in 0..dim.saturating_sub(1) {
        let v = ((k + 1) as f64 / (2.0 * omega0)).sqrt();
        x[(k, k + 1)] = v;
        x[(k + 1, k)] = v;
    }
    x
}

/// Exact X^2 and X^4 on an n x n block, via products in an enlarged basis.
fn x_powers(n: usize, omega0: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let ext = n + 4;
    let x = x_operator(ext, omega0);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    (x2.view((0, 0), (n, n)).into_owned(), x4.view((0, 0), (n, n)).into_owned())
}

/// Kinetic operator P^2 in the oscillator basis (exact, pentadiagonal).
fn p_squared(n: usize, omega0: f64) -> DMatrix<f64> {
    let mut p2 = DMatrix::zeros(n, n);
    for k in 0..n {
        p2[(k, k)] = omega0 * (k as f64 + 0.5);
        if k + 2 < n {
            let v = -(omega0 / 2.0) * (((k + 1) * (k + 2)) as f64).sqrt();
            p2[(k, k + 2)] = v;
            p2[(k + 2, k)] = v;
        }
    }
    p2
}

/// Matrix of H0 = P^2/2 - X^2/4 + X^4/(64 alpha) in the oscillator basis.
/// Exactly symmetric; couples only equal-parity basis functions.
pub fn build_hamiltonian(p: &PotentialParams, b: &BasisConfig) -> Result<DMatrix<f64>> {
    let n = b.n_basis();
    let w0 = b.basis_frequency();
    let (x2, x4) = x_powers(n, w0);
    let p2 = p_squared(n, w0);
    let quartic = 1.0 / (64.0 * p.alpha());
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] = 0.5 * p2[(i, j)] - 0.25 * x2[(i, j)] + quartic * x4[(i, j)];
        }
    }
    Ok(h)
}

/// Sorted eigenpairs of a symmetric eigensolve, as (energy, vector) columns.
fn symmetric_eigen_sorted(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((energies, vectors))
}

/// Eigensolve exploiting the even/odd block structure of a parity-preserving
/// Hamiltonian. Returns full-length eigenvectors (exact zeros on the
/// wrong-parity indices) together with their parity labels.
fn block_eigen(h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>, Vec<Parity>)> {
    let n = h.nrows();
    let idx_even: Vec<usize> = (0..n).step_by(2).collect();
    let idx_odd: Vec<usize> = (1..n).step_by(2).collect();

    let mut pairs: Vec<(f64, Vec<f64>, Parity)> = Vec::with_capacity(n);
    for (indices, parity) in [(&idx_even, Parity::Even), (&idx_odd, Parity::Odd)] {
        let m = indices.len();
        let mut block = DMatrix::zeros(m, m);
        for (bi, &i) in indices.iter().enumerate() {
            for (bj, &j) in indices.iter().enumerate() {
                block[(bi, bj)] = h[(i, j)];
            }
        }
        let (evals, evecs) = symmetric_eigen_sorted(block)?;
        for (col, &e) in evals.iter().enumerate() {
            let mut full = vec![0.0; n];
            for (bi, &i) in indices.iter().enumerate() {
                full[i] = evecs[(bi, col)];
            }
            pairs.push((e, full, parity));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let energies: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let parities: Vec<Parity> = pairs.iter().map(|p| p.2).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, (_, v, _)) in pairs.iter().enumerate() {
        for (row, &x) in v.iter().enumerate() {
            vectors[(row, col)] = x;
        }
    }
    Ok((energies, vectors, parities))
}

/// Largest asymmetry relative to the largest element.
fn asymmetry(h: &DMatrix<f64>) -> f64 {
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Largest cross-parity element relative to the largest element.
fn parity_coupling(h: &DMatrix<f64>) -> f64 {
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 1 {
                worst = worst.max(h[(i, j)].abs());
            }
        }
    }
    worst / scale
}

const PARITY_LEAKAGE_LIMIT: f64 = 1e-8;

/// Lowest `n_levels` eigenpairs of a symmetric Hamiltonian expressed in the
/// oscillator basis described by `basis`.
///
/// Eigenvector signs are fixed so that consecutive-level dipole elements
/// dipole[k][k+1] are nonnegative where they are nonzero, making the dipole
/// matrix deterministic. Parities come from the support of each eigenvector
/// on even/odd basis indices; leakage onto the wrong parity class beyond
/// 1e-8 is rejected.
pub fn diagonalize(h: &DMatrix<f64>, n_levels: usize, basis: &BasisConfig) -> Result<EigenSolution> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::ShapeMismatch(format!("Hamiltonian is {}x{}", n, h.ncols())));
    }
    if n != basis.n_basis() {
        return Err(Error::ShapeMismatch(format!(
            "Hamiltonian dimension {n} does not match basis size {}",
            basis.n_basis()
        )));
    }
    if n_levels == 0 || n_levels > n {
        return Err(Error::OutOfRange(format!(
            "n_levels = {n_levels} not in 1..={n}"
        )));
    }
    if asymmetry(h) > 1e-10 {
        return Err(Error::InvalidConfig("Hamiltonian matrix is not symmetric".into()));
    }

    // Parity-preserving matrices are solved per block, which keeps the parity
    // classification exact. Anything else goes through the full solver with
    // an honest leakage measurement.
    let (energies, vectors, parities, leakage) = if parity_coupling(h) < 1e-12 {
        let (e, v, p) = block_eigen(h)?;
        (e, v, p, 0.0)
    } else {
        let (e, v) = symmetric_eigen_sorted(h.clone())?;
        let (p, leak) = classify_parities(&v)?;
        (e, v, p, leak)
    };

    build_solution(&energies, &vectors, &parities, leakage, n_levels, basis)
}

/// Parity labels from eigenvector support, with the worst leakage found.
fn classify_parities(vectors: &DMatrix<f64>) -> Result<(Vec<Parity>, f64)> {
    let n = vectors.nrows();
    let mut parities = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for col in 0..n {
        let mut even_w = 0.0;
        let mut odd_w = 0.0;
        for row in 0..n {
            let w = vectors[(row, col)] * vectors[(row, col)];
            if row % 2 == 0 {
                even_w += w;
            } else {
                odd_w += w;
            }
        }
        let total = even_w + odd_w;
        let leak = even_w.min(odd_w) / total;
        worst = worst.max(leak);
        if leak > PARITY_LEAKAGE_LIMIT {
            return Err(Error::BasisInadequacy(format!(
                "eigenvector {col} has cross-parity leakage {leak:.3e}"
            )));
        }
        parities.push(if even_w > odd_w { Parity::Even } else { Parity::Odd });
    }
    Ok((parities, worst))
}

fn build_solution(
    energies: &[f64],
    vectors: &DMatrix<f64>,
    parities: &[Parity],
    leakage: f64,
    n_levels: usize,
    basis: &BasisConfig,
) -> Result<EigenSolution> {
    let n = vectors.nrows();
    let energies = energies[..n_levels].to_vec();
    let parities = parities[..n_levels].to_vec();

    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NumericalFailure(
            "retained eigenvalues are not strictly increasing".into(),
        ));
    }
    for (k, p) in parities.iter().enumerate() {
        let expected = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        if *p != expected {
            return Err(Error::BasisInadequacy(format!(
                "parity of level {k} does not alternate as (-1)^k"
            )));
        }
    }

    // dipole in the eigenbasis, upper triangle mirrored so the matrix is
    // exactly symmetric
    let x = x_operator(n, basis.basis_frequency());
    let mut sel = DMatrix::zeros(n, n_levels);
    for col in 0..n_levels {
        sel.set_column(col, &vectors.column(col));
    }
    let w = &x * &sel;
    let mut dipole = DMatrix::zeros(n_levels, n_levels);
    for i in 0..n_levels {
        for j in i..n_levels {
            let mut acc = 0.0;
            for row in 0..n {
                acc += sel[(row, i)] * w[(row, j)];
            }
            dipole[(i, j)] = acc;
            dipole[(j, i)] = acc;
        }
    }

    // sign convention: walk up the ladder making dipole[k][k+1] >= 0
    for k in 0..n_levels.saturating_sub(1) {
        if dipole[(k, k + 1)] < -1e-12 {
            for j in 0..n_levels {
                dipole[(k + 1, j)] = -dipole[(k + 1, j)];
                dipole[(j, k + 1)] = -dipole[(j, k + 1)];
            }
        }
    }

    Ok(EigenSolution {
        energies,
        parities,
        dipole,
        n_levels,
        max_parity_leakage: leakage,
    })
}

/// Build and diagonalize in one step.
pub fn solve(p: &PotentialParams, b: &BasisConfig, n_levels: usize) -> Result<EigenSolution> {
    let h = build_hamiltonian(p, b)?;
    diagonalize(&h, n_levels, b)
}
