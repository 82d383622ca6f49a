//! Budgeted orbit balls in the coset space and the exact Følner search over
//! box-shaped candidates (full quotient × integer box in the fiber), with a
//! greedy trimming pass. Everything is deterministic and exact-rational.

use std::collections::{HashMap, HashSet};

use num::Zero;

use crate::action_builder::coset::{CosetPoint, CosetSpace};
use crate::isoperimetry::{boundary_ratio, Ratio};
use crate::words::Letter;
use crate::Result;

/// Incrementally expanded BFS ball of the basepoint orbit.
#[derive(Debug, Clone)]
pub struct OrbitBall {
    pub points: Vec<CosetPoint>,
    pub depth: Vec<u32>,
    pub index: HashMap<CosetPoint, u32>,
    pub radius: usize,
    head: usize,
}

impl OrbitBall {
    pub fn new(space: &CosetSpace) -> OrbitBall {
        let base = space.base();
        let mut index = HashMap::new();
        index.insert(base.clone(), 0);
        OrbitBall {
            points: vec![base],
            depth: vec![0],
            index,
            radius: 0,
            head: 0,
        }
    }

    /// Grow the ball to the given radius, reusing everything already
    /// expanded. Returns false (leaving the ball partially grown) when the
    /// vertex budget is hit.
    pub fn expand_to(&mut self, space: &CosetSpace, radius: usize, max_vertices: usize) -> bool {
        let alphabet = space.alphabet();
        while self.head < self.points.len() {
            let d = self.depth[self.head];
            if d as usize >= radius {
                break;
            }
            let p = self.points[self.head].clone();
            self.head += 1;
            for l in alphabet.letters() {
                let t = space.step_point(l, &p);
                if !self.index.contains_key(&t) {
                    if self.points.len() >= max_vertices {
                        return false;
                    }
                    self.index.insert(t.clone(), self.points.len() as u32);
                    self.points.push(t);
                    self.depth.push(d + 1);
                }
            }
        }
        self.radius = radius;
        true
    }
}

/// A strictly (S,ε)-invariant set found inside a depth-bounded ball,
/// recorded by ball point ids with its exact ratio.
#[derive(Debug, Clone)]
pub struct FolnerCertificate {
    pub point_ids: Vec<u32>,
    pub ratio: Ratio,
    /// The box ranges [lo, hi] per fiber coordinate the set started from.
    pub shape: Vec<(i32, i32)>,
    /// Points removed by the greedy trim.
    pub trimmed: usize,
}

struct Shape {
    ranges: Vec<(i32, i32)>,
    /// No point of the box can be closer than this (ℓ¹ lower bound).
    reach_lb: u32,
    /// Every point of the box is within this distance (transversal plus
    /// per-coordinate Schreier word costs).
    reach_ub: u32,
    size: u128,
}

fn enumerate_shapes(
    space: &CosetSpace,
    eps: &Ratio,
    max_side: usize,
    max_shapes: usize,
) -> Vec<Shape> {
    let r = space.rank;
    let costs = space.schreier_word_lengths();
    let sigma_diam = space.sigma.iter().map(|w| w.len()).max().unwrap_or(0) as u32;
    let budget = eps * Ratio::from_integer((space.order as i64).into());
    let mut shapes = Vec::new();
    let mut m = vec![1usize; r];
    // Depth-first odometer with running Σ 1/m_j; prune when even max_side on
    // all remaining coordinates cannot satisfy the strict budget.
    fn rec(
        m: &mut Vec<usize>,
        i: usize,
        sum: Ratio,
        budget: &Ratio,
        max_side: usize,
        costs: &[usize],
        sigma_diam: u32,
        out: &mut Vec<Shape>,
        max_shapes: usize,
    ) {
        if out.len() >= max_shapes {
            return;
        }
        let r = m.len();
        if i == r {
            if sum < *budget {
                let ranges: Vec<(i32, i32)> = m
                    .iter()
                    .map(|&mj| {
                        let lo = -(((mj - 1) / 2) as i32);
                        (lo, lo + mj as i32 - 1)
                    })
                    .collect();
                let mut lb = 0u32;
                let mut ub = sigma_diam;
                for (j, &(lo, hi)) in ranges.iter().enumerate() {
                    let extreme = lo.unsigned_abs().max(hi.unsigned_abs());
                    lb += extreme;
                    ub += extreme * costs[j] as u32;
                }
                let size: u128 = m.iter().map(|&x| x as u128).product();
                out.push(Shape {
                    ranges,
                    reach_lb: lb,
                    reach_ub: ub,
                    size,
                });
            }
            return;
        }
        // Remaining coordinates contribute at least (r − i − 1)/max_side.
        for side in 1..=max_side {
            let next = &sum + Ratio::new(1.into(), (side as i64).into());
            let floor = Ratio::new(((r - i - 1) as i64).into(), (max_side as i64).into());
            if &next + floor >= *budget {
                continue;
            }
            m[i] = side;
            rec(
                m,
                i + 1,
                next,
                budget,
                max_side,
                costs,
                sigma_diam,
                out,
                max_shapes,
            );
        }
        m[i] = 1;
    }
    rec(
        &mut m,
        0,
        Ratio::zero(),
        &budget,
        max_side,
        &costs,
        sigma_diam,
        &mut shapes,
        max_shapes,
    );
    shapes.sort_by(|a, b| (a.reach_ub, a.size, &a.ranges).cmp(&(b.reach_ub, b.size, &b.ranges)));
    shapes
}

fn box_points(space: &CosetSpace, ranges: &[(i32, i32)]) -> Vec<CosetPoint> {
    let mut pts = Vec::new();
    let mut z: Vec<i32> = ranges.iter().map(|&(lo, _)| lo).collect();
    'outer: loop {
        for q in 0..space.order as u32 {
            pts.push(CosetPoint { q, z: z.clone() });
        }
        for j in 0..ranges.len() {
            z[j] += 1;
            if z[j] <= ranges[j].1 {
                continue 'outer;
            }
            z[j] = ranges[j].0;
        }
        break;
    }
    pts
}

/// Corner points (extreme fiber vectors × all cosets), hardest first — used
/// to reject shapes cheaply before materializing the whole box.
fn box_corners(space: &CosetSpace, ranges: &[(i32, i32)]) -> Vec<CosetPoint> {
    let mut corners: Vec<Vec<i32>> = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::new();
        for c in &corners {
            let mut a = c.clone();
            a.push(lo);
            next.push(a);
            if hi != lo {
                let mut b = c.clone();
                b.push(hi);
                next.push(b);
            }
        }
        corners = next;
        if corners.len() > 512 {
            corners.truncate(512);
        }
    }
    corners.sort_by_key(|z| std::cmp::Reverse(z.iter().map(|v| v.unsigned_abs()).sum::<u32>()));
    let mut pts = Vec::new();
    for z in corners {
        for q in 0..space.order as u32 {
            pts.push(CosetPoint { q, z: z.clone() });
        }
    }
    pts
}

/// Exact boundary ratio of an arbitrary finite set of coset points.
pub fn set_ratio(space: &CosetSpace, pts: &[CosetPoint]) -> Result<Ratio> {
    boundary_ratio(space, pts)
}

/// Reusable Følner search: the candidate shapes are enumerated and ordered
/// once, then probed against balls of growing radius.
pub struct FolnerSearcher {
    shapes: Vec<Shape>,
    eps: Ratio,
}

impl FolnerSearcher {
    pub fn new(space: &CosetSpace, eps: Ratio, max_side: usize, max_shapes: usize) -> Self {
        FolnerSearcher {
            shapes: enumerate_shapes(space, &eps, max_side, max_shapes),
            eps,
        }
    }

    /// Search the ball (restricted to depth ≤ max_depth) for a strictly
    /// ε-invariant set: box candidates ordered by estimated reach, then a
    /// greedy trim that keeps every strict improvement. First hit wins.
    pub fn search(
        &self,
        space: &CosetSpace,
        ball: &OrbitBall,
        max_depth: usize,
    ) -> Result<Option<FolnerCertificate>> {
        let in_ball = |p: &CosetPoint| -> bool {
            ball.index
                .get(p)
                .is_some_and(|&id| ball.depth[id as usize] as usize <= max_depth)
        };
        for shape in &self.shapes {
            if shape.reach_lb as usize > max_depth {
                continue;
            }
            if !box_corners(space, &shape.ranges).iter().all(&in_ball) {
                continue;
            }
            let pts = box_points(space, &shape.ranges);
            if !pts.iter().all(&in_ball) {
                continue;
            }
            let ratio = boundary_ratio(space, &pts)?;
            if ratio >= self.eps {
                continue;
            }
            let (pts, ratio, trimmed) = greedy_trim(space, pts, ratio);
            let mut point_ids: Vec<u32> = pts.iter().map(|p| ball.index[p]).collect();
            point_ids.sort_unstable();
            return Ok(Some(FolnerCertificate {
                point_ids,
                ratio,
                shape: shape.ranges.clone(),
                trimmed,
            }));
        }
        Ok(None)
    }
}

/// One-shot convenience wrapper around [`FolnerSearcher`].
pub fn find_folner(
    space: &CosetSpace,
    ball: &OrbitBall,
    max_depth: usize,
    eps: &Ratio,
    max_side: usize,
    max_shapes: usize,
) -> Result<Option<FolnerCertificate>> {
    FolnerSearcher::new(space, eps.clone(), max_side, max_shapes).search(space, ball, max_depth)
}

/// Remove points whose departure strictly lowers the boundary ratio, best
/// single removal per round, bounded rounds. The ratio never worsens.
fn greedy_trim(
    space: &CosetSpace,
    mut pts: Vec<CosetPoint>,
    mut ratio: Ratio,
) -> (Vec<CosetPoint>, Ratio, usize) {
    let alphabet = space.alphabet();
    let generators: Vec<Letter> = alphabet.generators().collect();
    let mut trimmed = 0;
    for _ in 0..16 {
        if pts.len() <= 1 {
            break;
        }
        let members: HashSet<&CosetPoint> = pts.iter().collect();
        let num: i64 = {
            let mut n = 0i64;
            for p in &pts {
                for s in &generators {
                    if !members.contains(&space.step_point(*s, p)) {
                        n += 1;
                    }
                }
            }
            n
        };
        let size = pts.len() as i64;
        // Removing p changes the boundary by in(p) − out(p); it improves the
        // ratio strictly iff size·(in − out) < −num.
        let mut best: Option<(i64, usize)> = None;
        for (i, p) in pts.iter().enumerate() {
            let mut delta = 0i64;
            for s in &generators {
                if !members.contains(&space.step_point(*s, p)) {
                    delta -= 1;
                }
                let pre = space.step_point(s.inverse(), p);
                if pre != *p && members.contains(&pre) {
                    delta += 1;
                }
            }
            if size * delta < -num && best.map_or(true, |(d, _)| delta < d) {
                best = Some((delta, i));
            }
        }
        match best {
            Some((_, i)) => {
                pts.remove(i);
                trimmed += 1;
            }
            None => break,
        }
    }
    if trimmed > 0 {
        ratio = boundary_ratio(space, &pts).expect("trimmed set stays valid");
    }
    (pts, ratio, trimmed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_builder::quotient::FiniteQuotient;
    use crate::words::Alphabet;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn z2_space() -> CosetSpace {
        let q = FiniteQuotient::cyclic(f2(), 2, &[1, 1]);
        CosetSpace::build(&q.group(4).unwrap()).unwrap()
    }

    #[test]
    fn ball_growth_and_budget() {
        let space = z2_space();
        let mut ball = OrbitBall::new(&space);
        assert!(ball.expand_to(&space, 2, 1_000));
        assert!(ball.points.len() > 4);
        // Degrees are 2|S|, so growth is at most 4-fold per level.
        let mut small = OrbitBall::new(&space);
        assert!(!small.expand_to(&space, 4, 8));
    }

    #[test]
    fn folner_search_meets_eps_one_at_small_radius() {
        let space = z2_space();
        let eps = Ratio::from_integer(1.into());
        let mut ball = OrbitBall::new(&space);
        let mut found = None;
        for k in 1..=16 {
            assert!(ball.expand_to(&space, k, 100_000));
            if let Some(cert) = find_folner(&space, &ball, k - 1, &eps, 6, 50_000).unwrap() {
                found = Some((k, cert));
                break;
            }
        }
        let (_, cert) = found.expect("ε = 1 must be reachable");
        assert!(cert.ratio < eps);
        // Re-verify the recorded ids exactly.
        let pts: Vec<CosetPoint> = cert
            .point_ids
            .iter()
            .map(|&id| ball.points[id as usize].clone())
            .collect();
        assert_eq!(set_ratio(&space, &pts).unwrap(), cert.ratio);
    }

    #[test]
    fn stricter_eps_needs_bigger_sets() {
        let space = z2_space();
        let eps = Ratio::new(1.into(), 2.into());
        let mut ball = OrbitBall::new(&space);
        for k in 1..=24 {
            assert!(ball.expand_to(&space, k, 1_000_000));
            if let Some(cert) = find_folner(&space, &ball, k - 1, &eps, 8, 50_000).unwrap() {
                assert!(cert.ratio < eps);
                assert!(cert.point_ids.len() > 4);
                return;
            }
        }
        panic!("ε = 1/2 not reached within radius 24");
    }
}
