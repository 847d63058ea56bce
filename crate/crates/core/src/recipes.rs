//! Deterministic test fields.

use std::path::PathBuf;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Spectrum};
use crate::grid::Grid;
use crate::kslf;
use crate::propagator::in_sector;
use crate::scalar::{mollifier, Real};

/// Frequency region for band-limited random fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<T> {
    /// The sector Π.
    Sector,
    Ball { center: Vec<T>, radius: T },
    Annulus { inner: T, outer: T },
}

impl<T: Real> Region<T> {
    pub fn contains(&self, xi: &[T]) -> bool {
        match self {
            Region::Sector => in_sector(xi),
            Region::Ball { center, radius } => {
                xi.iter().zip(center).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() <= *radius * *radius
            }
            Region::Annulus { inner, outer } => {
                let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
                r >= *inner && r <= *outer
            }
        }
    }
}

/// How to build an input field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldRecipe<T> {
    /// `exp(-|x - c|²/(2w²))` with torus distance.
    Gaussian { center: Vec<T>, width: T },
    /// Uniform random complex coefficients on the frequency nodes of the
    /// region, normalized to unit `L²` norm.
    RandomBandlimited { region: Region<T>, seed: u64 },
    /// Smooth bump on the frequency box of half-width `1/(2R)` per axis centred
    /// at `1.25 e_1`; its lift to the surface is a `1/R × 1/R²` plate. Unit norm.
    Knapp { r: T },
    File(PathBuf),
}

/// Centre of the Knapp plate.
pub const KNAPP_CENTER: f64 = 1.25;

pub fn make_field<T: Real>(grid: Grid<T>, recipe: &FieldRecipe<T>) -> Result<Field<T>> {
    match recipe {
        FieldRecipe::Gaussian { center, width } => {
            grid.require_dim(center.len())?;
            if !(*width > T::zero()) {
                return Err(Error::Domain("gaussian width must be positive".into()));
            }
            let two_w2 = T::lit(2.0) * *width * *width;
            Ok(Field::from_fn(grid, |x| Complex::new((-grid.torus_dist2(x, center) / two_w2).exp(), T::zero())))
        }
        FieldRecipe::RandomBandlimited { region, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut hits = 0usize;
            let spec = Spectrum::from_fn(grid, |xi| {
                // Draw for every node so the stream does not depend on the region.
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                if region.contains(xi) {
                    hits += 1;
                    Complex::new(T::lit(re), T::lit(im))
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            });
            if hits == 0 {
                return Err(Error::Precondition("frequency region contains no grid nodes".into()));
            }
            normalized(spec.idft())
        }
        FieldRecipe::Knapp { r } => {
            if !(*r >= T::one()) {
                return Err(Error::Domain("Knapp scale must satisfy R >= 1".into()));
            }
            let half = T::lit(0.5) / *r;
            let c = T::lit(KNAPP_CENTER);
            let spec = Spectrum::from_fn(grid, |xi| {
                let mut v = T::one();
                for (i, &x) in xi.iter().enumerate() {
                    let ci = if i == 0 { c } else { T::zero() };
                    v = v * mollifier((x - ci) / half);
                }
                Complex::new(v, T::zero())
            });
            if spec.values().iter().all(|z| z.norm() == T::zero()) {
                return Err(Error::Precondition(format!(
                    "grid frequency spacing {} does not resolve the Knapp plate width {}",
                    grid.dxi(),
                    half * T::lit(2.0)
                )));
            }
            normalized(spec.idft())
        }
        FieldRecipe::File(path) => {
            let f = kslf::read_field::<T>(path)?;
            if f.grid() != &grid {
                return Err(Error::Domain("field file grid differs from the requested grid".into()));
            }
            Ok(f)
        }
    }
}

fn normalized<T: Real>(f: Field<T>) -> Result<Field<T>> {
    let n = f.norm2();
    if !(n > T::zero()) {
        return Err(Error::Precondition("field vanishes identically".into()));
    }
    Ok(f.scale(Complex::new(T::one() / n, T::zero())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_peaks_at_origin() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let f = make_field(g, &FieldRecipe::Gaussian { center: vec![0.0], width: 1.0 }).unwrap();
        assert_eq!(f.samples()[0].re, 1.0);
        assert!(f.samples().iter().all(|z| z.re > 0.0 && z.im == 0.0));
        assert!(f.samples().iter().all(|z| z.re <= 1.0));
    }

    #[test]
    fn random_is_deterministic() {
        let g = Grid::<f64>::new(1, 256, 100.0).unwrap();
        let r = FieldRecipe::RandomBandlimited { region: Region::Sector, seed: 7 };
        let a = make_field(g, &r).unwrap();
        let b = make_field(g, &r).unwrap();
        assert_eq!(a, b);
        assert!((a.dft().mass_fraction(in_sector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knapp_inside_sector() {
        let g = Grid::<f64>::new(1, 4096, 2048.0).unwrap();
        let f = make_field(g, &FieldRecipe::Knapp { r: 16.0 }).unwrap();
        assert!(f.dft().mass_fraction(in_sector) >= 0.999);
        assert!((f.norm2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knapp_unresolved_is_error() {
        let g = Grid::new(1, 8, 4.0).unwrap();
        assert!(make_field(g, &FieldRecipe::Knapp { r: 16.0 }).is_err());
    }
}
