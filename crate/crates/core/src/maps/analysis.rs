use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Point2;

use super::PlanarMap;

/// A level set `{x : f_j(x) = level}` extracted as polylines.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub component: usize,
    pub level: f64,
    pub polylines: Vec<Vec<Point2>>,
    /// Largest change of `f_j` across a grid edge; every polyline point is
    /// within this of the level.
    pub slack: f64,
}

impl LevelSet {
    pub fn points(&self) -> Vec<Point2> {
        self.polylines.iter().flatten().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.is_empty())
    }
}

fn node(a: usize, b: usize, r: usize) -> Point2 {
    let h = 2.0 / (r - 1) as f64;
    Point2::new(-1.0 + a as f64 * h, -1.0 + b as f64 * h)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Key {
    Node(usize),
    Edge(usize, usize),
}

/// Marching squares on an `r × r` grid over `[-1,1]^2`.
pub fn level_set(f: &dyn PlanarMap, j: usize, level: f64, r: usize) -> Result<LevelSet> {
    if r < 2 {
        return Err(Error::InvalidInput("level-set resolution must be at least 2".into()));
    }
    if j != 1 && j != 2 {
        return Err(Error::InvalidInput(format!("component must be 1 or 2, got {j}")));
    }
    let id = |a: usize, b: usize| b * r + a;
    let vals: Vec<f64> = (0..r * r)
        .into_par_iter()
        .map(|k| f.component(node(k % r, k / r, r), j))
        .collect();
    let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let strict = level <= vmin;
    let inside = |v: f64| if strict { v > level } else { v >= level };

    let mut slack = 0.0f64;
    for b in 0..r {
        for a in 0..r {
            if a + 1 < r {
                slack = slack.max((vals[id(a + 1, b)] - vals[id(a, b)]).abs());
            }
            if b + 1 < r {
                slack = slack.max((vals[id(a, b + 1)] - vals[id(a, b)]).abs());
            }
        }
    }

    let mut points: HashMap<Key, Point2> = HashMap::new();
    let mut crossing = |p: usize, q: usize| -> Key {
        let (vp, vq) = (vals[p], vals[q]);
        let t = ((level - vp) / (vq - vp)).clamp(0.0, 1.0);
        let key = if t == 0.0 {
            Key::Node(p)
        } else if t == 1.0 {
            Key::Node(q)
        } else {
            Key::Edge(p.min(q), p.max(q))
        };
        points.entry(key).or_insert_with(|| {
            let (xp, xq) = (node(p % r, p / r, r), node(q % r, q / r, r));
            match key {
                Key::Node(n) => node(n % r, n / r, r),
                Key::Edge(..) => xp + (xq - xp) * t,
            }
        });
        key
    };

    let mut segs: Vec<(Key, Key)> = Vec::new();
    let mut seen: HashSet<(Key, Key)> = HashSet::new();
    for b in 0..r - 1 {
        for a in 0..r - 1 {
            let c = [id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)];
            let ins: Vec<bool> = c.iter().map(|&k| inside(vals[k])).collect();
            let crossed: Vec<usize> = (0..4).filter(|&e| ins[e] != ins[(e + 1) % 4]).collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                2 => vec![(crossed[0], crossed[1])],
                4 => {
                    let center = c.iter().map(|&k| vals[k]).sum::<f64>() / 4.0;
                    let joined = inside(center);
                    if ins[0] == joined {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (e1, e2) in pairs {
                let k1 = crossing(c[e1], c[(e1 + 1) % 4]);
                let k2 = crossing(c[e2], c[(e2 + 1) % 4]);
                if k1 == k2 {
                    continue;
                }
                let ord = (k1.min(k2), k1.max(k2));
                if seen.insert(ord) {
                    segs.push((k1, k2));
                }
            }
        }
    }

    let mut adj: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, &(k1, k2)) in segs.iter().enumerate() {
        adj.entry(k1).or_default().push(i);
        adj.entry(k2).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let next_from = |k: Key, used: &mut Vec<bool>| -> Option<Key> {
        let list = adj.get(&k)?;
        let &i = list.iter().find(|&&i| !used[i])?;
        used[i] = true;
        let (a, b) = segs[i];
        Some(if a == k { b } else { a })
    };
    let mut polylines = Vec::new();
    for i in 0..segs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (a, b) = segs[i];
        let mut fwd = vec![a, b];
        while let Some(k) = next_from(*fwd.last().unwrap(), &mut used) {
            fwd.push(k);
        }
        let mut back = Vec::new();
        while let Some(k) = next_from(*back.last().unwrap_or(&a), &mut used) {
            back.push(k);
        }
        back.reverse();
        back.extend(fwd);
        polylines.push(back.into_iter().map(|k| points[&k]).collect());
    }

    Ok(LevelSet { component: j, level, polylines, slack })
}

/// Counts from the grid invertibility certifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InvertibilityReport {
    pub grid_resolution: usize,
    pub tested_outputs: usize,
    pub unique_count: usize,
    pub missing_count: usize,
    pub multiple_count: usize,
}

impl InvertibilityReport {
    pub fn all_unique(&self) -> bool {
        self.unique_count == self.tested_outputs
    }
}

/// Certifier on `s` outputs spread uniformly over `(-0.95, 0.95)^2`.
pub fn check_invertible_on_grid(f: &dyn PlanarMap, r: usize, s: usize) -> Result<InvertibilityReport> {
    if s == 0 {
        return Err(Error::InvalidInput("certifier needs at least one output".into()));
    }
    let side = (s as f64).sqrt().ceil() as usize;
    let h = 1.9 / side as f64;
    let outputs: Vec<Point2> = (0..s)
        .map(|k| Point2::new(-0.95 + (k % side) as f64 * h + h / 2.0, -0.95 + (k / side) as f64 * h + h / 2.0))
        .collect();
    check_invertible_on_outputs(f, r, &outputs)
}

/// For each output `y`, counts 8-connected clusters of grid nodes with
/// `‖f(x) - y‖∞ ≤ slack`, where slack is the largest sup-norm jump of `f`
/// across a grid edge or cell diagonal.
pub fn check_invertible_on_outputs(
    f: &dyn PlanarMap,
    r: usize,
    outputs: &[Point2],
) -> Result<InvertibilityReport> {
    if r < 2 {
        return Err(Error::InvalidInput("certifier resolution must be at least 2".into()));
    }
    let vals: Vec<Point2> = (0..r * r).into_par_iter().map(|k| f.eval(node(k % r, k / r, r))).collect();
    let id = |a: usize, b: usize| b * r + a;
    let mut slack = 0.0f64;
    for b in 0..r - 1 {
        for a in 0..r - 1 {
            let v = vals[id(a, b)];
            for w in [vals[id(a + 1, b)], vals[id(a, b + 1)], vals[id(a + 1, b + 1)]] {
                slack = slack.max((w - v).norm_inf());
            }
            slack = slack.max((vals[id(a + 1, b)] - vals[id(a, b + 1)]).norm_inf());
        }
    }
    for a in 0..r - 1 {
        slack = slack.max((vals[id(a + 1, r - 1)] - vals[id(a, r - 1)]).norm_inf());
        slack = slack.max((vals[id(r - 1, a + 1)] - vals[id(r - 1, a)]).norm_inf());
    }

    let clusters: Vec<usize> = outputs
        .par_iter()
        .map(|&y| {
            let marked: Vec<usize> = (0..r * r).filter(|&k| (vals[k] - y).norm_inf() <= slack).collect();
            count_clusters(&marked, r)
        })
        .collect();

    let mut rep = InvertibilityReport { grid_resolution: r, tested_outputs: outputs.len(), ..Default::default() };
    for c in clusters {
        match c {
            0 => rep.missing_count += 1,
            1 => rep.unique_count += 1,
            _ => rep.multiple_count += 1,
        }
    }
    Ok(rep)
}

fn count_clusters(marked: &[usize], r: usize) -> usize {
    let mut seen = vec![false; marked.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..marked.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (a, b) = ((marked[i] % r) as isize, (marked[i] / r) as isize);
            for da in -1..=1 {
                for db in -1..=1 {
                    let (na, nb) = (a + da, b + db);
                    if na < 0 || nb < 0 || na >= r as isize || nb >= r as isize {
                        continue;
                    }
                    let k = nb as usize * r + na as usize;
                    if let Ok(j) = marked.binary_search(&k) {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
    }
    count
}

/// Random pairs `(x, x')` in `[-1,1]^2` with `‖x - x'‖∞ ≤ max_sep`.
pub fn random_pairs(n: usize, max_sep: f64, seed: u64) -> Vec<(Point2, Point2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = Point2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let d = Point2::new(rng.random_range(-max_sep..=max_sep), rng.random_range(-max_sep..=max_sep));
        let xp = Point2::new((x.x1 + d.x1).clamp(-1.0, 1.0), (x.x2 + d.x2).clamp(-1.0, 1.0));
        if xp != x {
            out.push((x, xp));
        }
    }
    out
}

/// Largest observed forward ratio `‖f(x)-f(x')‖/‖x-x'‖` and inverse ratio
/// `‖x-x'‖/‖f(x)-f(x')‖` over the pairs (lower bounds on the constants).
pub fn lipschitz_estimate(f: &dyn PlanarMap, pairs: &[(Point2, Point2)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("Lipschitz estimate needs at least one pair".into()));
    }
    let mut fwd = 0.0f64;
    let mut inv = 0.0f64;
    for &(x, xp) in pairs {
        let dx = x.dist(xp);
        if dx == 0.0 {
            continue;
        }
        let dy = f.eval(x).dist(f.eval(xp));
        fwd = fwd.max(dy / dx);
        inv = inv.max(if dy == 0.0 { f64::INFINITY } else { dx / dy });
    }
    Ok((fwd, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FnMap, Identity};

    #[test]
    fn identity_vertical_level() {
        let ls = level_set(&Identity, 1, 0.5, 401).unwrap();
        assert_eq!(ls.polylines.len(), 1);
        let pts = ls.points();
        assert!(pts.iter().all(|p| (p.x1 - 0.5).abs() < 1e-12));
        assert!(pts.iter().any(|p| p.x2 == -1.0) && pts.iter().any(|p| p.x2 == 1.0));
    }

    #[test]
    fn identity_bottom_edge() {
        let ls = level_set(&Identity, 2, -1.0, 101).unwrap();
        let pts = ls.points();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p.x2 == -1.0));
        assert_eq!(pts.len(), 101);
    }

    #[test]
    fn empty_outside_range() {
        let ls = level_set(&Identity, 1, 1.5, 51).unwrap();
        assert!(ls.is_empty());
    }

    #[test]
    fn certifier_identity_and_collapse() {
        let rep = check_invertible_on_grid(&Identity, 101, 25).unwrap();
        assert!(rep.all_unique());
        let collapse = FnMap::new(|x| Point2::new(x.x1, 0.0));
        let ys = [Point2::new(0.2, 0.5), Point2::new(-0.4, -0.3)];
        let rep = check_invertible_on_outputs(&collapse, 101, &ys).unwrap();
        assert_eq!(rep.missing_count, 2);
    }

    #[test]
    fn lipschitz_of_linear() {
        let pairs = random_pairs(500, 0.2, 3);
        let (f, i) = lipschitz_estimate(&Identity, &pairs).unwrap();
        assert!((f - 1.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
        let half = crate::maps::Linear::scale(0.5);
        let (f, _) = lipschitz_estimate(&half, &pairs).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
    }
}
