//! The composite system: `d` coupled primary oscillators, one of which (the
//! star mass) couples to every mode of an `N`-mode harmonic bath.
//!
//! Encoded-state layout used throughout the crate (total dimension
//! `D = 2(d + N)`):
//!
//! | block | range            | content              |
//! |-------|------------------|----------------------|
//! | 1     | `0..d`           | `√K·x`               |
//! | 2     | `d..2d`          | `√M⁻¹·p`             |
//! | 3     | `2d..2d+N`       | `√F·y − Gᵀ·x`        |
//! | 4     | `2d+N..2d+2N`    | `√F·k`               |

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::linalg::{principal_sqrt, StarArrowhead, PSD_RELATIVE_TOLERANCE};
use crate::{Error, Result, C64, DENSE_DIMENSION_CAP};

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Primary-system parameters: masses, spring constants and the bath-coupled index.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    masses: Vec<f64>,
    kappa: DMatrix<f64>,
    star: usize,
}

impl SystemSpec {
    /// `kappa[(i, i)]` is the wall coupling of mass `i`; `kappa[(i, j)]` the
    /// spring between masses `i` and `j`. `star` is zero-based.
    pub fn new(masses: Vec<f64>, kappa: DMatrix<f64>, star: usize) -> Result<Self> {
        let d = masses.len();
        if d == 0 {
            return Err(Error::invalid("system.masses", "at least one primary oscillator is required"));
        }
        for (i, &m) in masses.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid(
                    format!("system.masses[{i}]"),
                    format!("mass must be positive and finite, got {m}"),
                ));
            }
        }
        if kappa.nrows() != d || kappa.ncols() != d {
            return Err(Error::invalid(
                "system.kappa",
                format!("expected a {d}x{d} matrix, got {}x{}", kappa.nrows(), kappa.ncols()),
            ));
        }
        for i in 0..d {
            for j in 0..d {
                let k = kappa[(i, j)];
                if !k.is_finite() || k < 0.0 {
                    return Err(Error::invalid(
                        format!("system.kappa[{i}][{j}]"),
                        format!("spring constant must be finite and nonnegative, got {k}"),
                    ));
                }
                if (k - kappa[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::invalid(
                        format!("system.kappa[{i}][{j}]"),
                        format!("asymmetric coupling: {k} vs kappa[{j}][{i}] = {}", kappa[(j, i)]),
                    ));
                }
            }
        }
        if star >= d {
            return Err(Error::invalid("system.star_index", format!("index {star} out of range for {d} oscillators")));
        }
        Ok(SystemSpec { masses, kappa, star })
    }

    pub fn d(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn kappa(&self) -> &DMatrix<f64> {
        &self.kappa
    }

    pub fn star(&self) -> usize {
        self.star
    }
}

/// Bath mode frequencies `ν_α > 0` and couplings `g_α` to the star mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathSpec {
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
}

impl BathSpec {
    pub fn new(frequencies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::invalid("bath.frequencies", "at least one bath mode is required"));
        }
        if frequencies.len() != couplings.len() {
            return Err(Error::invalid(
                "bath.couplings",
                format!("expected {} couplings to match the frequencies, got {}", frequencies.len(), couplings.len()),
            ));
        }
        for (a, &nu) in frequencies.iter().enumerate() {
            // ν = 0 would make G_{*α} = g/√ν diverge.
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::invalid(
                    format!("bath.frequencies[{a}]"),
                    format!("frequency must be positive and finite, got {nu}"),
                ));
            }
        }
        for (a, &g) in couplings.iter().enumerate() {
            if !g.is_finite() {
                return Err(Error::invalid(
                    format!("bath.couplings[{a}]"),
                    format!("coupling must be finite, got {g}"),
                ));
            }
        }
        Ok(BathSpec { frequencies, couplings })
    }

    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn nu_max(&self) -> f64 {
        self.frequencies.iter().copied().fold(0.0, f64::max)
    }
}

/// `K_ii = Σ_j κ_ij`, `K_ij = −κ_ij` for `i ≠ j`; rejects non-positive-definite results.
pub fn build_spring_matrix(spec: &SystemSpec) -> Result<DMatrix<f64>> {
    let d = spec.d();
    let kappa = spec.kappa();
    let k = DMatrix::from_fn(d, d, |i, j| if i == j { kappa.row(i).sum() } else { -kappa[(i, j)] });
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let min = eig.min();
    if min <= PSD_RELATIVE_TOLERANCE * eig.amax() {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(k)
}

/// Index ranges of the four encoded blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockLayout {
    pub d: usize,
    pub n: usize,
}

impl BlockLayout {
    pub fn dim(&self) -> usize {
        2 * (self.d + self.n)
    }
    pub fn position(&self) -> std::ops::Range<usize> {
        0..self.d
    }
    pub fn momentum(&self) -> std::ops::Range<usize> {
        self.d..2 * self.d
    }
    pub fn bath_position(&self) -> std::ops::Range<usize> {
        2 * self.d..2 * self.d + self.n
    }
    pub fn bath_momentum(&self) -> std::ops::Range<usize> {
        2 * self.d + self.n..self.dim()
    }
}

/// Immutable, validated composite model with all derived matrices.
#[derive(Debug, Clone)]
pub struct CompositeModel {
    system: SystemSpec,
    bath: BathSpec,
    spring: DMatrix<f64>,
    sqrt_spring: DMatrix<f64>,
    inv_sqrt_spring: DMatrix<f64>,
    inv_sqrt_mass: DVector<f64>,
    /// `√K·√M⁻¹`, the position/momentum block of the Hamiltonian.
    stiffness_block: DMatrix<f64>,
    /// Nonzero row of `G`: `g_α / √ν_α`.
    g_row: Vec<f64>,
}

impl CompositeModel {
    pub fn new(system: SystemSpec, bath: BathSpec) -> Result<Self> {
        let spring = build_spring_matrix(&system)?;
        let sqrt_spring = principal_sqrt(&spring)?;
        let inv_sqrt_spring =
            sqrt_spring.clone().try_inverse().ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
        let inv_sqrt_mass = DVector::from_iterator(system.d(), system.masses().iter().map(|m| m.sqrt().recip()));
        let stiffness_block = &sqrt_spring * DMatrix::from_diagonal(&inv_sqrt_mass);
        let g_row = bath.couplings().iter().zip(bath.frequencies()).map(|(g, nu)| g / nu.sqrt()).collect();
        Ok(CompositeModel { system, bath, spring, sqrt_spring, inv_sqrt_spring, inv_sqrt_mass, stiffness_block, g_row })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }
    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }
    pub fn d(&self) -> usize {
        self.system.d()
    }
    pub fn n_modes(&self) -> usize {
        self.bath.n_modes()
    }
    pub fn star(&self) -> usize {
        self.system.star()
    }
    pub fn layout(&self) -> BlockLayout {
        BlockLayout { d: self.d(), n: self.n_modes() }
    }
    /// Total Hilbert-space dimension `D = 2(d + N)`.
    pub fn dim(&self) -> usize {
        self.layout().dim()
    }
    pub fn spring(&self) -> &DMatrix<f64> {
        &self.spring
    }
    pub fn sqrt_spring(&self) -> &DMatrix<f64> {
        &self.sqrt_spring
    }
    pub fn inv_sqrt_spring(&self) -> &DMatrix<f64> {
        &self.inv_sqrt_spring
    }
    pub fn inv_sqrt_mass(&self) -> &DVector<f64> {
        &self.inv_sqrt_mass
    }
    pub fn stiffness_block(&self) -> &DMatrix<f64> {
        &self.stiffness_block
    }
    /// The single nonzero row of `G` (row `star`).
    pub fn g_row(&self) -> &[f64] {
        &self.g_row
    }

    /// Dense `G` (`d × N`); only for small models and tests.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.d(), self.n_modes());
        for (a, &v) in self.g_row.iter().enumerate() {
            g[(self.star(), a)] = v;
        }
        g
    }

    /// Assembles the `D × D` encoding Hamiltonian.
    ///
    /// Upper blocks are written directly and the lower triangle is filled by
    /// conjugate mirroring, so the result is exactly Hermitian.
    pub fn assemble_hamiltonian(&self) -> Result<DMatrix<C64>> {
        let dim = self.dim();
        if dim > DENSE_DIMENSION_CAP {
            return Err(Error::ResourceCap { what: "dense Hamiltonian", required: dim, cap: DENSE_DIMENSION_CAP });
        }
        let l = self.layout();
        let (d, star) = (l.d, self.star());
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        let i = C64::new(0.0, 1.0);
        for r in 0..d {
            for c in 0..d {
                h[(r, d + c)] = i * self.stiffness_block[(r, c)];
            }
        }
        let star_row = l.momentum().start + star;
        let m_star = self.inv_sqrt_mass[star];
        for (a, (&g, &nu)) in self.g_row.iter().zip(self.bath.frequencies()).enumerate() {
            h[(star_row, l.bath_position().start + a)] = i * (m_star * g);
            h[(l.bath_position().start + a, l.bath_momentum().start + a)] = i * nu;
        }
        for r in 0..dim {
            for c in (r + 1)..dim {
                h[(c, r)] = h[(r, c)].conj();
            }
        }
        Ok(h)
    }

    /// `CᵀC` in arrowhead form, where `Ĥ = [[0, iC], [−iCᵀ, 0]]` in the
    /// (blocks 1,3 | blocks 2,4) split. Its eigenvalues are the squared
    /// normal-mode frequencies, so `‖Ĥ‖² = λmax`.
    pub fn dynamical_arrowhead(&self) -> StarArrowhead {
        self.arrowhead(false)
    }

    /// `|C|ᵀ|C|` in arrowhead form; `‖abs(Ĥ)‖² = λmax`.
    pub fn abs_arrowhead(&self) -> StarArrowhead {
        self.arrowhead(true)
    }

    fn arrowhead(&self, absolute: bool) -> StarArrowhead {
        let p = if absolute { self.stiffness_block.abs() } else { self.stiffness_block.clone() };
        let mut core = p.transpose() * &p;
        let star = self.star();
        let m_star = self.inv_sqrt_mass[star];
        let nus = self.bath.frequencies();
        core[(star, star)] += self.g_row.iter().map(|g| (g * m_star).powi(2)).sum::<f64>();
        let spokes = self
            .g_row
            .iter()
            .zip(nus)
            .map(|(g, nu)| {
                let s = g * m_star * nu;
                if absolute {
                    s.abs()
                } else {
                    -s
                }
            })
            .collect();
        let poles = nus.iter().map(|nu| nu * nu).collect();
        StarArrowhead { core, star, spokes, poles }
    }
}
