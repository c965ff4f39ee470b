//! Point-to-point ICP with a pluggable rigid solver.

use std::collections::HashMap;

use far3_core::{geodesic_angle, register, Mat3, PointPairSet, RigidTransform, SolverKind, SolverOptions, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Brute force is used below this many target points when the method is
/// [`Correspondence::Auto`].
pub const BRUTE_FORCE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Correspondence {
    #[default]
    Auto,
    BruteForce,
    GridHash,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpConfig {
    pub max_outer_iterations: usize,
    pub correspondence: Correspondence,
    /// Stop once `angle(ΔC) + |ΔT|` between successive estimates falls below this.
    pub threshold: f64,
    pub solver: SolverKind,
    pub options: SolverOptions,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            max_outer_iterations: 50,
            correspondence: Correspondence::Auto,
            threshold: 1e-8,
            solver: SolverKind::Fa3r,
            options: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpResult {
    pub transform: RigidTransform,
    pub iterations: usize,
    /// RMS correspondence distance at each outer iteration, before the update.
    pub rms: Vec<f64>,
    pub final_rms: f64,
}

/// Uniform grid over the target cloud.
pub struct Grid<'a> {
    points: &'a [Vec3],
    origin: Vec3,
    cell: f64,
    extent: [i64; 3],
    cells: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> Grid<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in points {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let span = hi - lo;
        let longest = span.max_abs().max(f64::MIN_POSITIVE);
        // About two points per cell; flat clouds use their nonzero extents.
        let dims: Vec<f64> = span.to_array().into_iter().filter(|s| *s > 1e-9 * longest).collect();
        let volume: f64 = dims.iter().product();
        let cell = if dims.is_empty() {
            1.0
        } else {
            (2.0 * volume / points.len() as f64).powf(1.0 / dims.len() as f64).max(1e-12 * longest)
        };
        let mut grid = Grid { points, origin: lo, cell, extent: [0; 3], cells: HashMap::new() };
        for (i, p) in points.iter().enumerate() {
            grid.cells.entry(grid.key(*p)).or_default().push(i);
        }
        grid.extent = grid.key(hi);
        grid
    }

    fn key(&self, p: Vec3) -> [i64; 3] {
        let d = p - self.origin;
        d.to_array().map(|v| (v / self.cell).floor() as i64)
    }

    /// Index of the nearest point; the lowest index wins ties.
    pub fn nearest(&self, q: Vec3) -> usize {
        let c = self.key(q);
        // Rings beyond this cover the whole grid.
        let max_ring = (0..3).map(|a| c[a].abs().max((c[a] - self.extent[a]).abs())).max().unwrap_or(0);
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..=max_ring {
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        if let Some(ids) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                            for &i in ids {
                                let d = (self.points[i] - q).norm_squared();
                                if d < best.0 || (d == best.0 && i < best.1) {
                                    best = (d, i);
                                }
                            }
                        }
                    }
                }
            }
            // Anything in ring r + 1 is at least r cells away.
            let reach = r as f64 * self.cell;
            if best.1 != usize::MAX && best.0 < reach * reach {
                break;
            }
        }
        best.1
    }
}

pub fn nearest_brute_force(points: &[Vec3], q: Vec3) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = (*p - q).norm_squared();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn transform_delta(a: &RigidTransform, b: &RigidTransform) -> f64 {
    geodesic_angle(&a.rotation, &b.rotation).unwrap_or(f64::INFINITY) + (a.translation - b.translation).norm()
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) * (1.0 / points.len() as f64)
}

/// Aligns `source` onto `target`, starting from the centroid offset.
pub fn icp(source: &[Vec3], target: &[Vec3], cfg: &IcpConfig) -> Result<IcpResult> {
    if source.len() < 3 || target.len() < 3 {
        return Err(CliError::Input(format!(
            "ICP needs at least 3 points per cloud (source {}, target {})",
            source.len(),
            target.len()
        )));
    }
    if !(cfg.threshold > 0.0) || cfg.max_outer_iterations == 0 {
        return Err(CliError::Input("ICP threshold and iteration cap must be > 0".into()));
    }
    let brute = match cfg.correspondence {
        Correspondence::BruteForce => true,
        Correspondence::GridHash => false,
        Correspondence::Auto => target.len() < BRUTE_FORCE_LIMIT,
    };
    let grid = (!brute).then(|| Grid::new(target));
    let nearest = |q: Vec3| match &grid {
        Some(g) => g.nearest(q),
        None => nearest_brute_force(target, q),
    };

    let mut current = RigidTransform::new(Mat3::IDENTITY, centroid(target) - centroid(source));
    let mut rms = Vec::new();
    let mut last_delta = f64::INFINITY;
    for iteration in 1..=cfg.max_outer_iterations {
        let matches: Vec<usize> = source.iter().map(|p| nearest(current.apply(*p))).collect();
        let matched: Vec<Vec3> = matches.iter().map(|&i| target[i]).collect();
        let sq: f64 = source.iter().zip(&matched).map(|(p, t)| (current.apply(*p) - *t).norm_squared()).sum();
        rms.push((sq / source.len() as f64).sqrt());

        let mut distinct = matches.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(CliError::DegenerateCorrespondences(format!(
                "only {} distinct target points matched at iteration {iteration}",
                distinct.len()
            )));
        }
        let pairs = PointPairSet::new(source.to_vec(), matched)?;
        let next = register(cfg.solver, &pairs, &cfg.options)?.transform;
        last_delta = transform_delta(&current, &next);
        current = next;
        if last_delta < cfg.threshold {
            let sq: f64 =
                source.iter().map(|p| (current.apply(*p) - target[nearest(current.apply(*p))]).norm_squared()).sum();
            return Ok(IcpResult {
                transform: current,
                iterations: iteration,
                rms,
                final_rms: (sq / source.len() as f64).sqrt(),
            });
        }
    }
    Err(CliError::IcpNotConverged { iterations: cfg.max_outer_iterations, last_delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize, seed: u64) -> Vec<Vec3> {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(g.random_range(-3.0..3.0), g.random_range(-1.0..1.0), g.random_range(-0.5..0.5)))
            .collect()
    }

    #[test]
    fn grid_matches_brute_force() {
        let target = cloud(3000, 1);
        let grid = Grid::new(&target);
        for q in cloud(500, 2).into_iter().chain([Vec3::new(50.0, -40.0, 9.0)]) {
            assert_eq!(grid.nearest(q), nearest_brute_force(&target, q));
        }
        let flat: Vec<Vec3> = target.iter().map(|p| Vec3::new(p.x, p.y, 0.0)).collect();
        let grid = Grid::new(&flat);
        for q in cloud(200, 3) {
            assert_eq!(grid.nearest(q), nearest_brute_force(&flat, q));
        }
    }

    #[test]
    fn identical_clouds_stop_at_once() {
        let c = cloud(100, 4);
        let r = icp(&c, &c, &IcpConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.transform.rotation.max_abs_diff(&Mat3::IDENTITY) < 1e-12);
        assert!(r.transform.translation.norm() < 1e-12);
    }

    #[test]
    fn collapsed_target_is_degenerate() {
        let source = cloud(10, 5);
        let target = vec![Vec3::ZERO, Vec3::ZERO, Vec3::new(1e3, 0.0, 0.0)];
        assert!(matches!(icp(&source, &target, &IcpConfig::default()), Err(CliError::DegenerateCorrespondences(_))));
    }
}
