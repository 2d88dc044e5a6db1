//! Independent reference implementations used by the integration and
//! acceptance tests. None of them call into the code they check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};

use vsd::geometry::CameraModel;
use vsd::grid::Grid;

/// SplitMix64, for test-side random inputs independent of the library RNG.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// O(n²) nearest-neighbor distances and NSDC flags (`d_i ≤ d_t`).
pub fn brute_force_compliance(points: &[[f64; 2]], d_t: f64) -> (Vec<f64>, Vec<bool>) {
    let d: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let nsdc = d.iter().map(|&x| x <= d_t).collect();
    (d, nsdc)
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn k_times_r(cam: &CameraModel) -> ([[f64; 3]; 3], [f64; 3]) {
    let k = cam.intrinsics.matrix();
    let r = cam.extrinsics.rotation;
    let t = cam.extrinsics.translation;
    let mut kr = [[0.0; 3]; 3];
    let mut kt = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            kr[i][j] = (0..3).map(|m| k[(i, m)] * r[(m, j)]).sum();
        }
        kt[i] = (0..3).map(|m| k[(i, m)] * t[m]).sum();
    }
    (kr, kt)
}

/// Pixel of the world point `(x, y, h)` by the full pinhole model.
pub fn pinhole_project(cam: &CameraModel, p: [f64; 2], h: f64) -> [f64; 2] {
    let (kr, kt) = k_times_r(cam);
    let v: Vec<f64> = (0..3)
        .map(|i| kr[i][0] * p[0] + kr[i][1] * p[1] + kr[i][2] * h + kt[i])
        .collect();
    [v[0] / v[2], v[1] / v[2]]
}

/// Head-plane point seen at pixel `(u, v)`: solves
/// `KR·(x, y, h) + Kt = s·(u, v, 1)` for `(x, y, s)`.
pub fn backproject_oracle(cam: &CameraModel, px: [f64; 2], h: f64) -> Option<[f64; 2]> {
    let (kr, kt) = k_times_r(cam);
    let uv1 = [px[0], px[1], 1.0];
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for i in 0..3 {
        a[i] = [kr[i][0], kr[i][1], -uv1[i]];
        b[i] = -kt[i] - kr[i][2] * h;
    }
    solve3(a, b).map(|x| [x[0], x[1]])
}

fn element(side: usize) -> Vec<isize> {
    let a = (side / 2) as isize;
    (-a..side as isize - a).collect()
}

/// `X ⊕ B = { x + b }`, restricted to the grid.
pub fn dilate_oracle(m: &Grid<u8>, side: usize) -> Grid<u8> {
    let (w, h) = m.dims();
    let b = element(side);
    let mut out = Grid::filled(w, h, 0u8);
    for r in 0..h {
        for c in 0..w {
            if m.get(c, r) == 0 {
                continue;
            }
            for &dy in &b {
                for &dx in &b {
                    let (x, y) = (c as isize + dx, r as isize + dy);
                    if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                        out.set(x as usize, y as usize, 1);
                    }
                }
            }
        }
    }
    out
}

/// `X ⊖ B = { x : x + b ∈ X for all b }`; cells outside the grid are 0.
pub fn erode_oracle(m: &Grid<u8>, side: usize) -> Grid<u8> {
    let (w, h) = m.dims();
    let b = element(side);
    let mut out = Grid::filled(w, h, 0u8);
    for r in 0..h {
        for c in 0..w {
            let all = b.iter().all(|&dy| {
                b.iter().all(|&dx| {
                    m.get_checked(c as isize + dx, r as isize + dy)
                        .is_some_and(|v| v != 0)
                })
            });
            if all {
                out.set(c, r, 1);
            }
        }
    }
    out
}

/// 8-connected components by breadth-first flood fill, numbered in raster
/// order of their first cell.
pub fn flood_fill_labels(m: &Grid<u8>) -> (Grid<u32>, usize) {
    let (w, h) = m.dims();
    let mut labels = Grid::filled(w, h, 0u32);
    let mut n = 0u32;
    for r in 0..h {
        for c in 0..w {
            if m.get(c, r) == 0 || labels.get(c, r) != 0 {
                continue;
            }
            n += 1;
            labels.set(c, r, n);
            let mut queue = VecDeque::from([(c, r)]);
            while let Some((x, y)) = queue.pop_front() {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if m.get(nx, ny) != 0 && labels.get(nx, ny) == 0 {
                            labels.set(nx, ny, n);
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    (labels, n as usize)
}

/// One person's clipped, renormalized Gaussian footprint, computed cell by
/// cell from the 2-D formula. Density maps must equal the sum of these.
pub fn single_person_density(w: usize, h: usize, col: usize, row: usize, size: usize, sigma: f64) -> Grid<f64> {
    let a = (size / 2) as isize;
    let mut g = Grid::filled(w, h, 0.0);
    let mut total = 0.0;
    for dy in -a..size as isize - a {
        for dx in -a..size as isize - a {
            let (x, y) = (col as isize + dx, row as isize + dy);
            if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
                continue;
            }
            let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            g.set(x as usize, y as usize, v);
            total += v;
        }
    }
    g.map(|v| v / total)
}

/// Random binary grid with the given fill probability.
pub fn random_mask(rng: &mut TestRng, w: usize, h: usize, p: f64) -> Grid<u8> {
    let data = (0..w * h).map(|_| (rng.unit() < p) as u8).collect();
    Grid::from_vec(w, h, data).unwrap()
}

/// Every regular file under `root`, keyed by relative path.
pub fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
