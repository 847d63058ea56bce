//! `(N, H)`-sparse ball families and the recursive decomposition
//! `E = E_1 ∪ … ∪ E_K` with `H_k = |E|^γ H_{k-1}^γ`. All predicates are exact.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::cubes::CubeSet;
use crate::error::{Error, Result};

/// Rational exponent `γ = p/q`.
pub type Exponent = Ratio<u32>;

/// Decay rate `ρ = n/2` of `d̂σ` for a curved hypersurface over `ℝ^n`.
pub fn surface_decay_rate(n: u32) -> Exponent {
    Ratio::new(n, 2)
}

/// `γ = n/ρ`.
pub fn gamma(n: u32, rho: Exponent) -> Result<Exponent> {
    if n == 0 || rho <= Ratio::zero() {
        return Err(Error::Domain(format!("need n >= 1 and ρ > 0, got n = {n}, ρ = {rho}")));
    }
    Ok(Ratio::from_integer(n) / rho)
}

/// Bit length beyond which `H_k` is rejected.
pub const MAX_SCALE_BITS: u64 = 4096;

/// Squared Euclidean distance between lattice points.
pub fn dist2(a: &[i64], b: &[i64]) -> u128 {
    a.iter().zip(b).map(|(&x, &y)| ((x as i128 - y as i128).unsigned_abs()).pow(2)).sum()
}

/// `√D >= (N·H)^γ`, decided as `D^q >= (N·H)^{2p}`.
fn separated(d2: u128, n: usize, h: &BigUint, g: Exponent) -> bool {
    let lhs = BigUint::from(d2).pow(*g.denom());
    let rhs = (BigUint::from(n) * h).pow(2 * *g.numer());
    lhs >= rhs
}

/// `N` balls `B(z_i, H)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFamily {
    pub centers: Vec<Vec<i64>>,
    pub radius: BigUint,
    pub gamma: Exponent,
}

/// Whether the centres are pairwise `(N·H)^γ` separated.
pub fn is_sparse(family: &SparseFamily) -> bool {
    let n = family.centers.len();
    for i in 0..n {
        for j in i + 1..n {
            if !separated(dist2(&family.centers[i], &family.centers[j]), n, &family.radius, family.gamma) {
                return false;
            }
        }
    }
    true
}

/// `⌈x^{p/q}⌉`.
fn ceil_pow(x: &BigUint, g: Exponent) -> BigUint {
    let v = x.pow(*g.numer());
    let q = *g.denom();
    let r = v.nth_root(q);
    if r.pow(q) == v { r } else { r + 1u32 }
}

/// Level `k` of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub k: usize,
    /// `H_k`, the membership radius.
    pub scale: BigUint,
    /// `H_{k-1}`, the radius of the covering balls.
    pub ball_radius: BigUint,
    /// `E_k`.
    pub members: Vec<Vec<i64>>,
    pub families: Vec<SparseFamily>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseDecomposition {
    pub size: usize,
    pub levels_requested: usize,
    pub gamma: Exponent,
    pub levels: Vec<Level>,
}

struct Distances {
    d: Vec<u128>,
    n: usize,
}

impl Distances {
    fn new(pts: &[Vec<i64>]) -> Self {
        let n = pts.len();
        let mut d = vec![0u128; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = dist2(&pts[i], &pts[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { d, n }
    }

    fn get(&self, i: usize, j: usize) -> u128 {
        self.d[i * self.n + j]
    }
}

/// `r²` as `u128`, or `None` when it exceeds every representable distance.
fn square_bound(r: &BigUint) -> Option<u128> {
    (r * r).to_u128()
}

fn within(d2: u128, r2: Option<u128>) -> bool {
    r2.map_or(true, |r2| d2 <= r2)
}

/// Splits `E` into `K` levels and covers each level by sparse families:
/// a maximal `H_{k-1}`-separated subset of `E_k` gives the ball centres,
/// which are assigned first-fit to families that stay sparse.
pub fn sparse_decompose(e: &CubeSet, k_levels: usize, g: Exponent) -> Result<SparseDecomposition> {
    if k_levels == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    if g <= Ratio::zero() {
        return Err(Error::Domain("γ must be positive".into()));
    }
    let pts = e.points();
    let size = pts.len();
    let dist = Distances::new(pts);
    let size_big = BigUint::from(size);
    let mut assigned = vec![false; size];
    let mut prev = BigUint::one();
    let mut levels = Vec::with_capacity(k_levels);
    for k in 1..=k_levels {
        let scale = ceil_pow(&(&size_big * &prev), g);
        if scale.bits() > MAX_SCALE_BITS {
            return Err(Error::Scale {
                level: k,
                message: format!("H_k has {} bits, above the {MAX_SCALE_BITS}-bit limit", scale.bits()),
            });
        }
        let s2 = square_bound(&scale);
        // |E ∩ B(x, H_k)|^K <= |E|^k.
        let budget = size_big.pow(k as u32);
        let chosen: Vec<usize> = (0..size)
            .filter(|&i| !assigned[i])
            .filter(|&i| {
                let count = (0..size).filter(|&j| within(dist.get(i, j), s2)).count();
                BigUint::from(count).pow(k_levels as u32) <= budget
            })
            .collect();
        for &i in &chosen {
            assigned[i] = true;
        }
        let families = cover_level(pts, &dist, &chosen, &prev, g);
        levels.push(Level {
            k,
            scale: scale.clone(),
            ball_radius: prev.clone(),
            members: chosen.iter().map(|&i| pts[i].clone()).collect(),
            families,
        });
        prev = scale;
    }
    debug_assert!(assigned.iter().all(|&a| a));
    Ok(SparseDecomposition { size, levels_requested: k_levels, gamma: g, levels })
}

fn cover_level(pts: &[Vec<i64>], dist: &Distances, members: &[usize], r: &BigUint, g: Exponent) -> Vec<SparseFamily> {
    let r2 = square_bound(r);
    let mut centers: Vec<usize> = Vec::new();
    for &i in members {
        if centers.iter().all(|&c| !within(dist.get(i, c), r2)) {
            centers.push(i);
        }
    }
    let mut fams: Vec<Vec<usize>> = Vec::new();
    for c in centers {
        let slot = fams.iter().position(|f| {
            let n = f.len() + 1;
            let mut all = f.clone();
            all.push(c);
            all.iter().enumerate().all(|(a, &x)| all[a + 1..].iter().all(|&y| separated(dist.get(x, y), n, r, g)))
        });
        match slot {
            Some(s) => fams[s].push(c),
            None => fams.push(vec![c]),
        }
    }
    fams.into_iter()
        .map(|f| SparseFamily { centers: f.iter().map(|&i| pts[i].clone()).collect(), radius: r.clone(), gamma: g })
        .collect()
}

/// Exhaustive check of partition, cover and sparsity, plus family counts
/// against `|E|^{1/K}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Audit {
    pub partition: bool,
    pub cover: bool,
    pub sparse: bool,
    pub family_counts: Vec<usize>,
    /// `|E|^{1/K}`.
    pub family_budget: f64,
    /// `max_k #families / |E|^{1/K}`; compared with a calibrated constant.
    pub max_family_ratio: f64,
}

impl Audit {
    pub fn exact_ok(&self) -> bool {
        self.partition && self.cover && self.sparse
    }
}

pub fn audit(e: &CubeSet, d: &SparseDecomposition) -> Audit {
    let mut seen = vec![0usize; e.len()];
    let mut partition = true;
    for lvl in &d.levels {
        for m in &lvl.members {
            match e.points().binary_search(m) {
                Ok(i) => seen[i] += 1,
                Err(_) => partition = false,
            }
        }
    }
    partition &= seen.iter().all(|&c| c == 1);
    let cover = d.levels.iter().all(|lvl| {
        let r2 = square_bound(&lvl.ball_radius);
        lvl.members.iter().all(|m| {
            lvl.families.iter().any(|f| f.radius == lvl.ball_radius && f.centers.iter().any(|c| within(dist2(m, c), r2)))
        })
    });
    let sparse = d.levels.iter().all(|lvl| lvl.families.iter().all(is_sparse));
    let family_counts: Vec<usize> = d.levels.iter().map(|l| l.families.len()).collect();
    let family_budget = (d.size as f64).powf(1.0 / d.levels_requested as f64);
    let max_family_ratio = family_counts.iter().map(|&c| c as f64 / family_budget).fold(0.0, f64::max);
    Audit { partition, cover, sparse, family_counts, family_budget, max_family_ratio }
}

/// Calibrated ceiling on `#families / |E|^{1/K}` for random clustered sets.
pub const COVER_CONSTANT: f64 = 2.0;

#[derive(Serialize)]
struct FamilyJson {
    radius: String,
    centers: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct LevelJson {
    k: usize,
    scale: String,
    members: usize,
    families: Vec<FamilyJson>,
}

#[derive(Serialize)]
struct DecompositionJson<'a> {
    size: usize,
    levels_requested: usize,
    gamma: String,
    levels: Vec<LevelJson>,
    audit: &'a Audit,
}

impl SparseDecomposition {
    /// JSON tree (levels → families → centres, radii) with the audit summary.
    /// Radii are decimal strings since they exceed 64 bits.
    pub fn to_json(&self, audit: &Audit) -> Result<String> {
        let doc = DecompositionJson {
            size: self.size,
            levels_requested: self.levels_requested,
            gamma: self.gamma.to_string(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelJson {
                    k: l.k,
                    scale: l.scale.to_string(),
                    members: l.members.len(),
                    families: l
                        .families
                        .iter()
                        .map(|f| FamilyJson { radius: f.radius.to_string(), centers: f.centers.clone() })
                        .collect(),
                })
                .collect(),
            audit,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// `δ = 1/K + ε γ^K` with `K = ⌈C_γ^{-1} log(1/ε)⌉`; requires `C_γ > log γ`.
pub fn epsilon_removal_delta(eps: f64, g: f64, c_gamma: f64) -> Result<(usize, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε must lie in (0, 1), got {eps}")));
    }
    if !(g > 1.0) || !(c_gamma > g.ln()) {
        return Err(Error::Domain(format!("need γ > 1 and C_γ > log γ = {}, got C_γ = {c_gamma}", g.ln())));
    }
    let k = ((1.0 / eps).ln() / c_gamma).ceil().max(1.0) as usize;
    Ok((k, 1.0 / k as f64 + eps * g.powi(k as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(centers: Vec<Vec<i64>>, h: u32) -> SparseFamily {
        SparseFamily { centers, radius: BigUint::from(h), gamma: Ratio::from_integer(2) }
    }

    #[test]
    fn gamma_from_decay() {
        for n in 1..4 {
            assert_eq!(gamma(n, surface_decay_rate(n)).unwrap(), Ratio::from_integer(2));
        }
        assert_eq!(gamma(2, Ratio::new(1, 2)).unwrap(), Ratio::from_integer(4));
    }

    #[test]
    fn sparsity_examples() {
        assert!(is_sparse(&fam(vec![vec![0, 0], vec![900, 0], vec![0, 900]], 10)));
        assert!(!is_sparse(&fam(vec![vec![0, 0], vec![899, 0], vec![0, 900]], 10)));
        assert!(is_sparse(&fam(vec![vec![5, 5]], 1000)));
        // (2H)^γ - 1 with H = 10.
        assert!(!is_sparse(&fam(vec![vec![0, 0], vec![399, 0]], 10)));
        assert!(is_sparse(&fam(vec![vec![0, 0], vec![400, 0]], 10)));
    }

    #[test]
    fn rational_exponent_is_exact() {
        // γ = 3/2: (2·4)^{3/2} = 22.627…; 22 fails, 23 passes.
        let g = Ratio::new(3, 2);
        let f = |d: i64| SparseFamily { centers: vec![vec![0, 0], vec![d, 0]], radius: BigUint::from(4u32), gamma: g };
        assert!(!is_sparse(&f(22)));
        assert!(is_sparse(&f(23)));
        assert_eq!(ceil_pow(&BigUint::from(8u32), g), BigUint::from(23u32));
        assert_eq!(ceil_pow(&BigUint::from(4u32), g), BigUint::from(8u32));
    }

    #[test]
    fn trivial_decompositions() {
        let g = Ratio::from_integer(2);
        let one = CubeSet::new(2, vec![vec![3, 4]]).unwrap();
        let d = sparse_decompose(&one, 3, g).unwrap();
        assert_eq!(d.levels[0].members.len(), 1);
        assert_eq!(d.levels[0].families.len(), 1);
        assert!(audit(&one, &d).exact_ok());
        let e = CubeSet::new(2, (0..20).map(|i| vec![i, 2 * i]).collect()).unwrap();
        let d = sparse_decompose(&e, 1, g).unwrap();
        assert_eq!(d.levels[0].members.len(), e.len());
        assert!(audit(&e, &d).exact_ok());
    }

    #[test]
    fn scale_error_names_level() {
        let e = CubeSet::new(2, (0..100).map(|i| vec![i, 0]).collect()).unwrap();
        match sparse_decompose(&e, 12, Ratio::from_integer(2)) {
            Err(Error::Scale { level, .. }) => assert!(level > 3 && level <= 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn epsilon_helper() {
        let (k, d) = epsilon_removal_delta(1e-3, 2.0, 1.0).unwrap();
        assert_eq!(k, 7);
        assert!((d - (1.0 / 7.0 + 1e-3 * 128.0)).abs() < 1e-15);
        let small = epsilon_removal_delta(1e-12, 2.0, 1.0).unwrap().1;
        assert!(small < d);
        assert!(epsilon_removal_delta(0.1, 2.0, 0.5).is_err());
    }
}
