//! Finite unions of unit lattice cubes in spacetime, identified by their
//! lower corners, and the column decomposition `E = ∪_h E(h)`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// A set `E` of unit cubes in `ℤ^{n+1}`; coordinate 0 is time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeSet {
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl CubeSet {
    /// Duplicate points are an error; the stored order is sorted.
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("spacetime dimension must be at least 2, got {dim}")));
        }
        if points.is_empty() {
            return Err(Error::Domain("cube set must contain at least one cube".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Domain(format!("point {p:?} does not have {dim} coordinates")));
        }
        let set: BTreeSet<Vec<i64>> = points.iter().cloned().collect();
        if set.len() != points.len() {
            return Err(Error::Domain("cube set contains duplicate points".into()));
        }
        Ok(Self { dim, points: set.into_iter().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|E|`, the number of cubes.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.points.binary_search_by(|q| q.as_slice().cmp(p)).is_ok()
    }

    /// Largest coordinate extent over all axes.
    pub fn width(&self) -> i64 {
        (0..self.dim)
            .map(|a| {
                let lo = self.points.iter().map(|p| p[a]).min().unwrap_or(0);
                let hi = self.points.iter().map(|p| p[a]).max().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0)
    }

    /// Reads one point per record. A first record that is not all integers is
    /// taken as a header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("cube set CSV: {e}")))?;
            let parsed: std::result::Result<Vec<i64>, _> = rec.iter().map(|f| f.parse::<i64>()).collect();
            match parsed {
                Ok(p) => points.push(p),
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("cube set CSV record {}: {e}", i + 1))),
            }
        }
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        Self::new(dim, points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.dim).map(|a| if a == 0 { "t".to_string() } else { format!("x{a}") }).collect();
        w.write_record(&header).map_err(csv_io)?;
        for p in &self.points {
            w.write_record(p.iter().map(|c| c.to_string())).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// A column `E_x`: the cubes of `E` on one line parallel to `axis`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    /// The point's coordinates with the `axis` coordinate removed.
    pub base: Vec<i64>,
    pub cubes: Vec<Vec<i64>>,
}

/// `E(h)`: the union of columns holding `c` cubes with `h <= c < 2h`, for
/// dyadic `h`. Columns run along `axis` (0 for the time columns `E_x`).
pub fn columns_by_height(e: &CubeSet, axis: usize) -> Result<BTreeMap<u64, Vec<Column>>> {
    if axis >= e.dim() {
        return Err(Error::Domain(format!("axis {axis} out of range for dimension {}", e.dim())));
    }
    let mut cols: BTreeMap<Vec<i64>, Vec<Vec<i64>>> = BTreeMap::new();
    for p in e.points() {
        let mut base = p.clone();
        base.remove(axis);
        cols.entry(base).or_default().push(p.clone());
    }
    let mut out: BTreeMap<u64, Vec<Column>> = BTreeMap::new();
    for (base, cubes) in cols {
        let h = dyadic_floor(cubes.len() as u64);
        out.entry(h).or_default().push(Column { base, cubes });
    }
    Ok(out)
}

/// Largest power of two not exceeding `c >= 1`.
pub fn dyadic_floor(c: u64) -> u64 {
    1u64 << (63 - c.leading_zeros())
}

/// `size` distinct cubes in `[0, width)^dim`, drawn around up to four random
/// centres with a dyadic spread chosen per cube, so the set mixes clusters at
/// every scale up to `width`.
pub fn random_cube_set<R: rand::Rng>(rng: &mut R, dim: usize, size: usize, width: i64) -> Result<CubeSet> {
    if width < 1 {
        return Err(Error::Domain(format!("box width must be at least 1, got {width}")));
    }
    let capacity = (width as f64).powi(dim as i32);
    if size == 0 || size as f64 > capacity {
        return Err(Error::Domain(format!("cannot place {size} cubes in a box of width {width}")));
    }
    let clusters: Vec<Vec<i64>> =
        (0..rng.gen_range(1..=4)).map(|_| (0..dim).map(|_| rng.gen_range(0..width)).collect()).collect();
    let levels = 64 - (width as u64).leading_zeros();
    let mut pts = BTreeSet::new();
    while pts.len() < size {
        let c = &clusters[rng.gen_range(0..clusters.len())];
        let spread = 1i64 << rng.gen_range(0..levels);
        let p: Vec<i64> = c.iter().map(|&x| (x + rng.gen_range(-spread..=spread)).clamp(0, width - 1)).collect();
        pts.insert(p);
    }
    CubeSet::new(dim, pts.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_sets_fit_the_box() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (size, width) in [(1, 1), (9, 3), (128, 1_000_000)] {
            let e = random_cube_set(&mut rng, 2, size, width).unwrap();
            assert_eq!(e.len(), size);
            assert!(e.points().iter().flatten().all(|&x| (0..width).contains(&x)));
        }
        assert!(random_cube_set(&mut rng, 2, 10, 3).is_err());
    }

    #[test]
    fn columns_examples() {
        let mut pts = vec![vec![0, 0]];
        pts.extend((0..4).map(|t| vec![t, 5]));
        let e = CubeSet::new(2, pts).unwrap();
        let cols = columns_by_height(&e, 0).unwrap();
        assert_eq!(cols.keys().copied().collect::<Vec<_>>(), vec![1, 4]);

        let boxed: Vec<Vec<i64>> = (0..8).flat_map(|t| (0..3).map(move |x| vec![t, x])).collect();
        let e = CubeSet::new(2, boxed).unwrap();
        let cols = columns_by_height(&e, 0).unwrap();
        assert_eq!(cols.len(), 1);
        assert_eq!(cols[&8].iter().map(|c| c.cubes.len()).sum::<usize>(), e.len());
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_floor(1), 1);
        assert_eq!(dyadic_floor(7), 4);
        assert_eq!(dyadic_floor(8), 8);
    }

    #[test]
    fn csv_round_trip() {
        let e = CubeSet::new(2, vec![vec![3, -4], vec![0, 1]]).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        assert_eq!(CubeSet::read_csv(buf.as_slice()).unwrap(), e);
        assert!(CubeSet::read_csv("t,x\n1,2\n1,x\n".as_bytes()).is_err());
        assert!(CubeSet::new(2, vec![vec![1, 1], vec![1, 1]]).is_err());
    }
}
