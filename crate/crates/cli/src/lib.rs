//! Point-set generation, file formats and run configuration shared by the
//! `spanner` binary and the test suites.

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// On-disk point set: `{"dim": d, "points": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetFile {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointSetFile {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            bail!("dimension must be >= 1");
        }
        for (i, row) in self.points.iter().enumerate() {
            if row.len() != self.dim {
                bail!("row {i} has {} coordinates, expected {}", row.len(), self.dim);
            }
            if row.iter().any(|c| !c.is_finite()) {
                bail!("row {i} has a non-finite coordinate");
            }
        }
        let mut sorted: Vec<&Vec<f64>> = self.points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                bail!("duplicate point {:?}", w[0]);
            }
        }
        Ok(())
    }

    pub fn to_core_points(&self) -> Vec<spanner_core::Point> {
        self.points
            .iter()
            .map(|c| spanner_core::Point::new(c.clone()).expect("validated"))
            .collect()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }
}

/// One run of the builder, as configured on the command line.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub t: f64,
    pub k: usize,
    pub seed: u64,
    pub n: usize,
    pub dim: usize,
    pub generator: String,
    pub spread: f64,
    pub budget: u64,
}

pub const GENERATORS: &[&str] =
    &["uniform", "clustered", "grid", "exp-line", "circle-center", "parallel-sides"];

/// Generate a named point family. Deterministic for a fixed seed.
pub fn generate(kind: &str, n: usize, dim: usize, seed: u64, spread: f64) -> Result<PointSetFile> {
    if n == 0 {
        bail!("need n >= 1");
    }
    if dim == 0 {
        bail!("need dim >= 1");
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = match kind {
        "uniform" => {
            let mut seen = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let p: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                let bits: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
                if seen.insert(bits) {
                    out.push(p);
                }
            }
            out
        }
        "clustered" => {
            let clusters = (n as f64).sqrt().ceil() as usize;
            let centers: Vec<Vec<f64>> = (0..clusters)
                .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let mut seen = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let c = &centers[out.len() % clusters];
                let p: Vec<f64> = c.iter().map(|&x| x + spread * gaussian(&mut rng)).collect();
                let bits: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
                if seen.insert(bits) {
                    out.push(p);
                }
            }
            out
        }
        "grid" => {
            let side = (n as f64).powf(1.0 / dim as f64).ceil() as usize;
            let side = side.max(1);
            let mut out = Vec::with_capacity(n);
            let mut idx = vec![0usize; dim];
            while out.len() < n {
                let p: Vec<f64> = idx
                    .iter()
                    .map(|&i| if side > 1 { i as f64 / (side - 1) as f64 } else { 0.0 })
                    .collect();
                out.push(p);
                let mut i = 0;
                loop {
                    if i == dim {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < side {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == dim {
                    break;
                }
            }
            if out.len() < n {
                bail!("grid of side {side} cannot hold {n} points");
            }
            out
        }
        "exp-line" => {
            // v0 at the origin, then y = 2^i - eps climbing one axis, and a
            // final point at -2^(n-2) on the same axis
            let eps = 2.0f64.powi(-20);
            let axis = 1.min(dim - 1);
            let mut out = Vec::with_capacity(n);
            let mk = |y: f64| {
                let mut p = vec![0.0; dim];
                p[axis] = y;
                p
            };
            out.push(mk(0.0));
            for i in 1..n.saturating_sub(1) {
                out.push(mk(2.0f64.powi(i as i32) - eps));
            }
            if n >= 2 {
                out.push(mk(-(2.0f64.powi(n as i32 - 2))));
            }
            out
        }
        "circle-center" => {
            if dim < 2 {
                bail!("circle-center needs dim >= 2");
            }
            let mut out = Vec::with_capacity(n);
            out.push(vec![0.0; dim]);
            let m = n - 1;
            for j in 0..m {
                let a = std::f64::consts::TAU * j as f64 / m as f64;
                let mut p = vec![0.0; dim];
                p[0] = a.cos();
                p[1] = a.sin();
                out.push(p);
            }
            out
        }
        "parallel-sides" => {
            if dim < 2 {
                bail!("parallel-sides needs dim >= 2");
            }
            let nh = n / 2;
            let rest = n - nh;
            let mut out = Vec::with_capacity(n);
            for (count, y) in [(nh, 0.0), (rest, 1.0)] {
                for j in 0..count {
                    let x = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.5 };
                    let mut p = vec![0.0; dim];
                    p[0] = x;
                    p[1] = y;
                    out.push(p);
                }
            }
            out
        }
        other => bail!("unknown generator '{other}' (expected one of {GENERATORS:?})"),
    };
    let file = PointSetFile { dim, points };
    file.validate().context("generated point set failed validation")?;
    Ok(file)
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    // Box-Muller
    loop {
        let u: f64 = rng.gen();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.gen();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

/// Read a point set from JSON, or from headerless CSV rows when `csv` is set.
pub fn read_points(path: &std::path::Path, csv: bool) -> Result<PointSetFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    let file = if csv {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .with_context(|| format!("line {}: bad number '{f}'", lineno + 1))
                })
                .collect();
            points.push(row?);
        }
        let dim = points.first().map(Vec::len).unwrap_or(0);
        PointSetFile { dim, points }
    } else {
        serde_json::from_str(&text).with_context(|| format!("parsing {path:?}"))?
    };
    file.validate()?;
    Ok(file)
}

pub fn write_points(path: &std::path::Path, file: &PointSetFile) -> Result<()> {
    let text = serde_json::to_string(file)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {path:?}"))?;
    Ok(())
}

/// Format a float with 12 significant digits, the CLI-wide convention.
pub fn fmt_g(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e12 {
        format!("{x}")
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_four_points_is_unit_square() {
        let f = generate("grid", 4, 2, 0, 0.0).unwrap();
        let mut pts = f.points.clone();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0]
        ]);
    }

    #[test]
    fn exp_line_matches_formula() {
        let f = generate("exp-line", 5, 2, 0, 0.0).unwrap();
        let eps = 2.0f64.powi(-20);
        assert_eq!(f.points[0], vec![0.0, 0.0]);
        assert_eq!(f.points[1], vec![0.0, 2.0 - eps]);
        assert_eq!(f.points[2], vec![0.0, 4.0 - eps]);
        assert_eq!(f.points[3], vec![0.0, 8.0 - eps]);
        assert_eq!(f.points[4], vec![0.0, -8.0]);
    }

    #[test]
    fn uniform_is_deterministic_per_seed() {
        let a = generate("uniform", 50, 2, 42, 0.0).unwrap();
        let b = generate("uniform", 50, 2, 42, 0.0).unwrap();
        let c = generate("uniform", 50, 2, 43, 0.0).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn unknown_generator_errors() {
        assert!(generate("nope", 5, 2, 0, 0.0).is_err());
    }

    #[test]
    fn circle_center_shape() {
        let f = generate("circle-center", 9, 2, 0, 0.0).unwrap();
        assert_eq!(f.points.len(), 9);
        assert_eq!(f.points[0], vec![0.0, 0.0]);
        for p in &f.points[1..] {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_sides_shape() {
        let f = generate("parallel-sides", 10, 2, 0, 0.0).unwrap();
        assert_eq!(f.points.iter().filter(|p| p[1] == 0.0).count(), 5);
        assert_eq!(f.points.iter().filter(|p| p[1] == 1.0).count(), 5);
    }
}
