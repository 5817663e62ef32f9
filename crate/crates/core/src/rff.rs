//! Random Fourier feature basis for the one-dimensional RBF kernel.
//!
//! A [`FeatureBasis`] holds `S` frequency/phase pairs `(z_s, c_s)` shared by
//! every shape function. The feature map
//!
//! ```text
//! φ(x) = √(2/S) · [cos(z_s·x/b + c_s)]_{s=1..S}
//! ```
//!
//! satisfies `φ(x)ᵀφ(x′) ≈ exp(−(x−x′)²/(2b²))`.
//!
//! Two constructions are available:
//!
//! * [`BasisMode::MonteCarlo`]: `z_s ~ N(0,1)` and `c_s ~ U[0, 2π)` i.i.d.
//! * [`BasisMode::Grid`]: `z_s = Φ⁻¹((s−½)/S)` and an equally spaced phase
//!   grid `c_j = (π/4 + 2πj/S) mod 2π`. Phases are dealt to the symmetric
//!   frequency pairs `(z, −z)` so that each pair's phases sum to π/2 modulo
//!   π (the `z = 0` slot of an odd grid gets π/4). Which phase pair lands on
//!   which frequency pair, and its orientation, is a seeded permutation.
//!   With this pairing the cross terms of `φ(x)ᵀφ(x′)` cancel exactly and the
//!   kernel estimate reduces to the quadrature `(1/S)·Σ cos(z_s·(x−x′)/b)`.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normal;

/// How the frequencies and phases are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    MonteCarlo,
    Grid,
}

impl std::str::FromStr for BasisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" | "monte_carlo" => Ok(Self::MonteCarlo),
            "grid" => Ok(Self::Grid),
            other => Err(invalid(format!("unknown basis mode '{other}' (mc|grid)"))),
        }
    }
}

impl std::fmt::Display for BasisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MonteCarlo => "monte_carlo",
            Self::Grid => "grid",
        })
    }
}

// Independent ChaCha streams so that adding pair frequencies never perturbs
// the univariate basis.
const STREAM_UNIVARIATE: u64 = 0;
const STREAM_PAIR: u64 = 1;

pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Frozen random Fourier feature sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBasis {
    size: usize,
    z: Vec<f64>,
    c: Vec<f64>,
    mode: BasisMode,
    seed: u64,
    pair_z: Option<Vec<[f64; 2]>>,
}

/// Builds a basis of `size` samples. See [`FeatureBasis::build`].
pub fn build_basis(size: usize, mode: BasisMode, seed: u64) -> Result<FeatureBasis> {
    FeatureBasis::build(size, mode, seed)
}

impl FeatureBasis {
    /// Deterministic in `(size, mode, seed)`.
    pub fn build(size: usize, mode: BasisMode, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(invalid("basis size S must be at least 1"));
        }
        let mut rng = seeded_rng(seed, STREAM_UNIVARIATE);
        let (z, c) = match mode {
            BasisMode::MonteCarlo => {
                let z: Vec<f64> = (0..size).map(|_| rng.sample(StandardNormal)).collect();
                let c: Vec<f64> = (0..size).map(|_| uniform_phase(&mut rng)).collect();
                (z, c)
            }
            BasisMode::Grid => (quantile_grid(size), paired_phases(size, &mut rng)),
        };
        Ok(Self {
            size,
            z,
            c,
            mode,
            seed,
            pair_z: None,
        })
    }

    /// Adds the two-dimensional frequencies used by pairwise interaction maps.
    ///
    /// Monte Carlo mode draws i.i.d. `N(0, I₂)` rows. Grid mode draws the first
    /// half i.i.d. and mirrors it (`row[S−1−k] = −row[k]`, zero centre row for
    /// odd `S`) so the paired phases cancel cross terms as in the 1-D grid.
    pub fn with_pair_frequencies(mut self) -> Self {
        let mut rng = seeded_rng(self.seed, STREAM_PAIR);
        let s = self.size;
        let draw = |rng: &mut ChaCha20Rng| -> [f64; 2] {
            [rng.sample(StandardNormal), rng.sample(StandardNormal)]
        };
        let rows = match self.mode {
            BasisMode::MonteCarlo => (0..s).map(|_| draw(&mut rng)).collect(),
            BasisMode::Grid => {
                let mut rows = vec![[0.0; 2]; s];
                for k in 0..s / 2 {
                    let r = draw(&mut rng);
                    rows[k] = r;
                    rows[s - 1 - k] = [-r[0], -r[1]];
                }
                rows
            }
        };
        self.pair_z = Some(rows);
        self
    }

    /// Assembles a basis from explicit samples. Mostly useful for analytic
    /// checks; `mode` and `seed` are recorded as given.
    pub fn from_parts(z: Vec<f64>, c: Vec<f64>, mode: BasisMode, seed: u64) -> Result<Self> {
        if z.is_empty() || z.len() != c.len() {
            return Err(invalid(format!(
                "z and c must be non-empty and equal length ({} vs {})",
                z.len(),
                c.len()
            )));
        }
        if z.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(invalid("basis samples must be finite"));
        }
        if c.iter().any(|&v| !(0.0..TAU).contains(&v)) {
            return Err(invalid("phases must lie in [0, 2π)"));
        }
        Ok(Self {
            size: z.len(),
            z,
            c,
            mode,
            seed,
            pair_z: None,
        })
    }

    /// Replaces the pairwise frequencies with explicit rows.
    pub fn with_pair_rows(mut self, rows: Vec<[f64; 2]>) -> Result<Self> {
        if rows.len() != self.size {
            return Err(invalid(format!(
                "pair frequencies need {} rows, got {}",
                self.size,
                rows.len()
            )));
        }
        self.pair_z = Some(rows);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pair_z(&self) -> Option<&[[f64; 2]]> {
        self.pair_z.as_deref()
    }

    pub fn has_pair_frequencies(&self) -> bool {
        self.pair_z.is_some()
    }

    /// Scale `√(2/S)` applied to every feature.
    pub fn amplitude(&self) -> f64 {
        (2.0 / self.size as f64).sqrt()
    }

    /// Writes `φ(x)` for a pre-divided input `t = x / b` into `out`.
    pub(crate) fn fill_features(&self, t: f64, out: &mut [f64]) {
        let a = self.amplitude();
        for ((o, &z), &c) in out.iter_mut().zip(&self.z).zip(&self.c) {
            *o = a * (z * t + c).cos();
        }
    }

    /// Writes the pairwise map for pre-divided inputs into `out`.
    /// Caller guarantees pair frequencies exist.
    pub(crate) fn fill_pair_features(&self, ti: f64, tj: f64, out: &mut [f64]) {
        let a = self.amplitude();
        let rows = self.pair_z.as_deref().unwrap_or(&[]);
        for ((o, r), &c) in out.iter_mut().zip(rows).zip(&self.c) {
            *o = a * (r[0] * ti + r[1] * tj + c).cos();
        }
    }

    /// `φ(x)` with width `b`.
    pub fn feature_map(&self, x: f64, b: f64) -> Result<Vec<f64>> {
        check_width(b)?;
        check_finite(x)?;
        let mut out = vec![0.0; self.size];
        self.fill_features(x / b, &mut out);
        Ok(out)
    }

    /// `φ(x)ᵀφ(x′)`.
    pub fn approx_kernel(&self, x: f64, x_prime: f64, b: f64) -> Result<f64> {
        let u = self.feature_map(x, b)?;
        let v = self.feature_map(x_prime, b)?;
        Ok(crate::matrix::dot(&u, &v))
    }

    /// Two-dimensional map `√(2/S)·[cos((z_s1·x_i + z_s2·x_j)/b + c_s)]`.
    pub fn pair_feature_map(&self, x_i: f64, x_j: f64, b: f64) -> Result<Vec<f64>> {
        if self.pair_z.is_none() {
            return Err(Error::Config(
                "basis has no pair frequencies; build it with interactions enabled".into(),
            ));
        }
        check_width(b)?;
        check_finite(x_i)?;
        check_finite(x_j)?;
        let mut out = vec![0.0; self.size];
        self.fill_pair_features(x_i / b, x_j / b, &mut out);
        Ok(out)
    }
}

/// Free-function form of [`FeatureBasis::feature_map`].
pub fn feature_map(basis: &FeatureBasis, x: f64, b: f64) -> Result<Vec<f64>> {
    basis.feature_map(x, b)
}

/// Free-function form of [`FeatureBasis::approx_kernel`].
pub fn approx_kernel(basis: &FeatureBasis, x: f64, x_prime: f64, b: f64) -> Result<f64> {
    basis.approx_kernel(x, x_prime, b)
}

/// Free-function form of [`FeatureBasis::pair_feature_map`].
pub fn pair_feature_map(basis: &FeatureBasis, x_i: f64, x_j: f64, b: f64) -> Result<Vec<f64>> {
    basis.pair_feature_map(x_i, x_j, b)
}

/// Exact RBF kernel `exp(−‖x − x′‖² / (2b²))`.
pub fn rbf_kernel(x: &[f64], x_prime: &[f64], b: f64) -> Result<f64> {
    check_width(b)?;
    if x.len() != x_prime.len() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            x_prime.len()
        )));
    }
    let sq: f64 = x.iter().zip(x_prime).map(|(a, c)| (a - c) * (a - c)).sum();
    Ok((-sq / (2.0 * b * b)).exp())
}

/// Monte Carlo estimate of
/// `(1/π)∫₀^{2π}∫ cos(zx/b + c)·cos(zx′/b + c)·N(z|0,1) dz dc`,
/// which equals the RBF kernel between `x` and `x′`.
pub fn mc_verify_integral_identity(
    b: f64,
    x: f64,
    x_prime: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_width(b)?;
    check_finite(x)?;
    check_finite(x_prime)?;
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let mut rng = seeded_rng(seed, STREAM_UNIVARIATE);
    let (t, tp) = (x / b, x_prime / b);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let z: f64 = rng.sample(StandardNormal);
        let c = uniform_phase(&mut rng);
        acc += (z * t + c).cos() * (z * tp + c).cos();
    }
    // (1/π)·2π·E[·] over c ~ U(0, 2π)
    Ok(2.0 * acc / n_samples as f64)
}

fn check_width(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("kernel width must be positive and finite, got {b}")))
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("input must be finite, got {x}")))
    }
}

fn uniform_phase(rng: &mut ChaCha20Rng) -> f64 {
    let c = rng.random::<f64>() * TAU;
    // u < 1 can still round up to 2π
    if c >= TAU {
        0.0
    } else {
        c
    }
}

/// `Φ⁻¹((s − ½)/S)` ascending, mirrored so that `z[S−1−k] == −z[k]` exactly.
fn quantile_grid(size: usize) -> Vec<f64> {
    let n = size as f64;
    let mut z = vec![0.0; size];
    for k in 0..size / 2 {
        let q = normal::inverse_cdf((k as f64 + 0.5) / n);
        z[k] = q;
        z[size - 1 - k] = -q;
    }
    z
}

fn grid_phase(j: usize, size: usize) -> f64 {
    (0.125 + j as f64 / size as f64).fract() * TAU
}

/// Partition of phase indices `0..S` into pairs whose phases sum to π/2 mod π.
/// For odd `S` index 0 (phase π/4) is left over for the zero frequency.
fn antithetic_phase_pairs(size: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(size / 2);
    if size % 2 == 1 {
        // phases j and S−j: sum = π/2 + 2π ≡ π/2
        for a in 1..=size / 2 {
            pairs.push((a, size - a));
        }
    } else {
        // need a + b ≡ 0 (mod S/2); residues r and h−r, each with two members
        let h = size / 2;
        for r in 0..h {
            let partner = (h - r) % h;
            if r == partner {
                pairs.push((r, r + h));
            } else if r < partner {
                pairs.push((r, partner));
                pairs.push((r + h, partner + h));
            }
        }
    }
    debug_assert_eq!(pairs.len(), size / 2);
    pairs
}

fn paired_phases(size: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let mut pairs = antithetic_phase_pairs(size);
    pairs.shuffle(rng);
    let mut c = vec![0.0; size];
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        let (a, b) = if rng.random::<bool>() { (b, a) } else { (a, b) };
        c[k] = grid_phase(a, size);
        c[size - 1 - k] = grid_phase(b, size);
    }
    if size % 2 == 1 {
        c[size / 2] = grid_phase(0, size);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(
            build_basis(0, BasisMode::Grid, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn single_grid_sample() {
        let b = build_basis(1, BasisMode::Grid, 123).unwrap();
        assert_eq!(b.z(), &[0.0]);
        assert!((b.c()[0] - PI / 4.0).abs() < 1e-15);
        // exact even for S = 1 with the π/4 phase
        assert!((b.approx_kernel(0.3, 0.3, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_point_grid() {
        let b = build_basis(4, BasisMode::Grid, 7).unwrap();
        let expected = [-1.1503493803760079, -0.31863936396437514, 0.31863936396437514, 1.1503493803760079];
        let mut z = b.z().to_vec();
        z.sort_by(f64::total_cmp);
        for (a, e) in z.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12);
        }
        let mut c = b.c().to_vec();
        c.sort_by(f64::total_cmp);
        for (j, v) in c.iter().enumerate() {
            assert!((v - (0.5 + j as f64) * PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_phases_are_a_permuted_uniform_grid() {
        for s in [2, 3, 5, 8, 50, 64, 99, 100] {
            let b = build_basis(s, BasisMode::Grid, 11).unwrap();
            let mut c = b.c().to_vec();
            c.sort_by(f64::total_cmp);
            for w in c.windows(2) {
                assert!((w[1] - w[0] - TAU / s as f64).abs() < 1e-12, "S={s}");
            }
            assert!(c.iter().all(|v| (0.0..TAU).contains(v)));
            for k in 0..s / 2 {
                let sum = b.c()[k] + b.c()[s - 1 - k];
                let r = (sum - PI / 2.0).rem_euclid(PI);
                assert!(r < 1e-12 || PI - r < 1e-12, "S={s} k={k}");
            }
        }
    }

    #[test]
    fn monte_carlo_moments() {
        let b = build_basis(1000, BasisMode::MonteCarlo, 42).unwrap();
        let n = b.size() as f64;
        let mean = b.z().iter().sum::<f64>() / n;
        let var = b.z().iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var - 1.0).abs() < 0.15, "var {var}");
        assert!(b.c().iter().all(|v| (0.0..TAU).contains(v)));
    }

    #[test]
    fn rbf_examples() {
        assert_eq!(rbf_kernel(&[1.5], &[1.5], 0.7).unwrap(), 1.0);
        assert!((rbf_kernel(&[0.0], &[2f64.sqrt()], 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((rbf_kernel(&[0.0], &[1.0], 2.0).unwrap() - 0.8824969025845955).abs() < 1e-15);
        assert!(rbf_kernel(&[0.0], &[1.0], 0.0).is_err());
        assert!(rbf_kernel(&[0.0], &[1.0], -1.0).is_err());
        assert!(rbf_kernel(&[0.0, 1.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn feature_map_examples() {
        let b = FeatureBasis::from_parts(vec![0.0], vec![0.0], BasisMode::Grid, 0).unwrap();
        let f = b.feature_map(3.7, 1.0).unwrap();
        assert!((f[0] - SQRT2).abs() < 1e-15);

        let b = FeatureBasis::from_parts(vec![0.0, 0.0], vec![0.0, PI], BasisMode::Grid, 0).unwrap();
        let f = b.feature_map(0.0, 1.0).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && (f[1] + 1.0).abs() < 1e-15);

        let b = build_basis(100, BasisMode::MonteCarlo, 3).unwrap();
        let f = b.feature_map(-17.25, 0.3).unwrap();
        assert!(f.iter().all(|v| v.abs() <= 0.1414214));

        assert!(b.feature_map(1.0, 0.0).is_err());
        assert!(b.feature_map(f64::NAN, 1.0).is_err());
        assert!(b.feature_map(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn grid_diagonal_is_exact() {
        let b = build_basis(64, BasisMode::Grid, 5).unwrap();
        assert!((b.approx_kernel(0.9, 0.9, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Oracle: the cross terms cancel, leaving (1/S)·Σ cos(z_s·δ).
    #[test]
    fn grid_kernel_equals_quadrature() {
        let b = build_basis(100, BasisMode::Grid, 9).unwrap();
        for (x, xp) in [(0.3, -1.2), (2.5, 2.0), (-3.0, 3.0)] {
            let q: f64 = b.z().iter().map(|z| (z * (x - xp)).cos()).sum::<f64>() / 100.0;
            assert!((b.approx_kernel(x, xp, 1.0).unwrap() - q).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_kernel_close_to_rbf() {
        let b = build_basis(10_000, BasisMode::MonteCarlo, 42).unwrap();
        let k = b.approx_kernel(0.0, 1.0, 1.0).unwrap();
        assert!((k - 0.6065306597126334).abs() < 0.05, "{k}");
    }

    #[test]
    fn huge_width_flattens_kernel() {
        // MC cross terms leave a residual of order |Δx|/(b·√S)
        for (mode, s) in [(BasisMode::Grid, 50), (BasisMode::MonteCarlo, 1000)] {
            let b = build_basis(s, mode, 1).unwrap();
            let far = b.approx_kernel(-2.0, 5.0, 1e9).unwrap();
            let same = b.approx_kernel(-2.0, -2.0, 1e9).unwrap();
            assert!((far - same).abs() < 1e-9);
        }
    }

    #[test]
    fn pair_map_requires_frequencies() {
        let b = build_basis(10, BasisMode::Grid, 1).unwrap();
        assert!(matches!(b.pair_feature_map(0.0, 0.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn pair_map_zero_frequencies() {
        let b = FeatureBasis::from_parts(vec![0.5; 4], vec![0.0; 4], BasisMode::MonteCarlo, 0)
            .unwrap()
            .with_pair_rows(vec![[0.0, 0.0]; 4])
            .unwrap();
        let f = b.pair_feature_map(1.3, -0.4, 2.0).unwrap();
        assert!(f.iter().all(|v| (v - (0.5f64).sqrt()).abs() < 1e-15));
    }

    #[test]
    fn pair_map_monte_carlo_approximates_2d_rbf() {
        let b = build_basis(10_000, BasisMode::MonteCarlo, 42)
            .unwrap()
            .with_pair_frequencies();
        let u = b.pair_feature_map(0.0, 0.0, 1.0).unwrap();
        let v = b.pair_feature_map(1.0, 1.0, 1.0).unwrap();
        let k = crate::matrix::dot(&u, &v);
        let exact = rbf_kernel(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert!((k - exact).abs() < 0.05, "{k} vs {exact}");
    }

    #[test]
    fn pair_map_grid_identical_points_exact() {
        for s in [7, 64, 100] {
            let b = build_basis(s, BasisMode::Grid, 3).unwrap().with_pair_frequencies();
            let u = b.pair_feature_map(0.8, -1.7, 1.0).unwrap();
            assert!((crate::matrix::dot(&u, &u) - 1.0).abs() < 1e-12, "S={s}");
        }
    }

    #[test]
    fn pair_frequencies_leave_univariate_basis_untouched() {
        let a = build_basis(32, BasisMode::MonteCarlo, 8).unwrap();
        let b = a.clone().with_pair_frequencies();
        assert_eq!(a.z(), b.z());
        assert_eq!(a.c(), b.c());
    }

    #[test]
    fn integral_identity() {
        let same = mc_verify_integral_identity(1.0, 0.4, 0.4, 1_000_000, 1).unwrap();
        assert!((same - 1.0).abs() < 0.01, "{same}");
        let far = mc_verify_integral_identity(1.0, 0.0, 2.0, 1_000_000, 2).unwrap();
        assert!((far - 0.1353352832366127).abs() < 0.01, "{far}");
        let one = mc_verify_integral_identity(1.0, 0.0, 2.0, 1, 3).unwrap();
        assert!(one.is_finite() && (-2.0..=2.0).contains(&one));
        assert!(mc_verify_integral_identity(1.0, 0.0, 2.0, 0, 3).is_err());
    }

    #[test]
    fn monte_carlo_error_shrinks_with_size() {
        let mut rng = seeded_rng(2024, 7);
        let pairs: Vec<(f64, f64)> = (0..50)
            .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        let median_err = |s: usize| {
            let b = build_basis(s, BasisMode::MonteCarlo, 17).unwrap();
            let mut e: Vec<f64> = pairs
                .iter()
                .map(|&(x, xp)| {
                    (b.approx_kernel(x, xp, 1.0).unwrap() - rbf_kernel(&[x], &[xp], 1.0).unwrap()).abs()
                })
                .collect();
            e.sort_by(f64::total_cmp);
            0.5 * (e[24] + e[25])
        };
        assert!(median_err(4000) < median_err(250));
    }

    proptest! {
        #[test]
        fn features_bounded(s in 1usize..300, seed: u64, x in -1e6f64..1e6, b in 1e-3f64..1e3, grid: bool) {
            let mode = if grid { BasisMode::Grid } else { BasisMode::MonteCarlo };
            let basis = build_basis(s, mode, seed).unwrap();
            let f = basis.feature_map(x, b).unwrap();
            let bound = (2.0 / s as f64).sqrt();
            prop_assert!(f.iter().all(|v| v.abs() <= bound));
            prop_assert!(crate::matrix::dot(&f, &f) <= 2.0 + 1e-12);
        }

        #[test]
        fn kernel_symmetric(seed: u64, x in -50f64..50.0, xp in -50f64..50.0, grid: bool) {
            let mode = if grid { BasisMode::Grid } else { BasisMode::MonteCarlo };
            let basis = build_basis(37, mode, seed).unwrap();
            prop_assert_eq!(basis.approx_kernel(x, xp, 0.7).unwrap(), basis.approx_kernel(xp, x, 0.7).unwrap());
        }

        #[test]
        fn grid_self_consistency(s in 3usize..400, seed: u64, x in -1e3f64..1e3) {
            let basis = build_basis(s, BasisMode::Grid, seed).unwrap();
            prop_assert!((basis.approx_kernel(x, x, 1.0).unwrap() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn reconstruction_is_bit_exact(s in 1usize..200, seed: u64, grid: bool) {
            let mode = if grid { BasisMode::Grid } else { BasisMode::MonteCarlo };
            let a = build_basis(s, mode, seed).unwrap().with_pair_frequencies();
            let b = build_basis(s, mode, seed).unwrap().with_pair_frequencies();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn sorted_grid_matches_quantiles(s in 1usize..300, seed: u64) {
            let basis = build_basis(s, BasisMode::Grid, seed).unwrap();
            let mut z = basis.z().to_vec();
            z.sort_by(f64::total_cmp);
            for (k, v) in z.iter().enumerate() {
                let q = normal::inverse_cdf((k as f64 + 0.5) / s as f64);
                prop_assert!((v - q).abs() < 1e-14);
            }
        }
    }
}
