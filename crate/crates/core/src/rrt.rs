//! RRT* in a planar world of axis-aligned rectangular obstacles, with the
//! edge cost replaced by the snap of a minimum-snap spline through the whole
//! root path.
//!
//! Every query `(i_h, u)` builds the waypoint list from the root to vertex
//! `i_h` followed by the point `u`, and solves a two-dimensional time
//! allocation problem with `k = 5`. The waypoints are pinned in value, and
//! the first and last knots are additionally pinned to rest (derivatives one
//! to four equal to zero) so that every query is well posed. The total
//! duration is the path length divided by [`PlannerConfig::speed`].
//!
//! A query passes the collision gate when the resulting trajectory, sampled
//! every `collision_dt` seconds and at every knot, keeps clear of the
//! obstacles by half the largest gap between consecutive samples.
//!
//! Since each spline runs through the whole root path, moving a vertex to a
//! new parent changes the trajectory of every vertex below it. A rewire is
//! therefore kept only if all of those trajectories pass the gate again, so
//! the root-path spline of every vertex in the tree is collision-checked at
//! all times.
//!
//! [`plan_euclidean_baseline`] is the textbook RRT* with straight edges and
//! Euclidean costs; its best path is turned into a spline afterwards without
//! any collision check of the spline itself.
//!
//! This module works in `f64` only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multidim::{solve_multidim, Dimension, FlatTrajectory, MultiDimProblem};
use crate::spline::PinSet;
use crate::variable_time::{Method, Mode, OptimizerConfig};

pub type Point = [f64; 2];

/// Order of the planner splines: the fourth derivative (snap) is penalized.
pub const SNAP_ORDER: usize = 5;

/// Consecutive rejections after which sampling gives up.
pub const MAX_REJECTIONS: usize = 10_000;

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        let finite = min.iter().chain(&max).all(|v| v.is_finite());
        if !finite || min[0] >= max[0] || min[1] >= max[1] {
            return Err(Error::invalid(format!(
                "rectangle min {min:?} must lie strictly below max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..2).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Whether the closed segment `a b` meets the rectangle (slab clipping).
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for axis in 0..2 {
            let d = b[axis] - a[axis];
            if d == 0.0 {
                if a[axis] < self.min[axis] || a[axis] > self.max[axis] {
                    return false;
                }
                continue;
            }
            let mut lo = (self.min[axis] - a[axis]) / d;
            let mut hi = (self.max[axis] - a[axis]) / d;
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// Planar world: a bounding box with rectangular obstacles inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    pub bounds: Rect,
    pub obstacles: Vec<Rect>,
}

impl Workspace {
    pub fn new(bounds: Rect, obstacles: Vec<Rect>) -> Result<Self> {
        if let Some(o) = obstacles.iter().find(|o| !bounds.contains_rect(o)) {
            return Err(Error::invalid(format!(
                "obstacle {o:?} is not inside the bounds"
            )));
        }
        Ok(Self { bounds, obstacles })
    }

    pub fn is_free(&self, p: Point) -> bool {
        self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Straight-line check used by the Euclidean planner.
    pub fn segment_free(&self, a: Point, b: Point) -> bool {
        // the bounds are convex, so checking the endpoints suffices for them
        self.is_free(a)
            && self.is_free(b)
            && !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    pub fn min_obstacle_dimension(&self) -> Option<f64> {
        self.obstacles
            .iter()
            .map(|o| o.width().min(o.height()))
            .min_by(f64::total_cmp)
    }

    /// Positions of `traj` every `dt` seconds plus at every knot, in time
    /// order. `None` when the trajectory lacks an `x` or `y` dimension.
    fn sample_positions(traj: &FlatTrajectory<f64>, dt: f64) -> Option<Vec<Point>> {
        let (x, y) = (traj.spline("x")?, traj.spline("y")?);
        let start = traj.start();
        let end = traj.end();
        let steps = ((end - start) / dt).ceil() as usize;
        let mut taus: Vec<f64> = (0..steps).map(|j| start + j as f64 * dt).collect();
        taus.extend_from_slice(traj.knots());
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus.into_iter()
            .map(|t| Some([x.eval(t, 0).ok()?, y.eval(t, 0).ok()?]))
            .collect()
    }

    /// Plain sampled check: every sample (every `dt` seconds plus every knot)
    /// lies in free space.
    pub fn trajectory_samples_free(&self, traj: &FlatTrajectory<f64>, dt: f64) -> bool {
        Self::sample_positions(traj, dt).is_some_and(|pts| pts.iter().all(|&p| self.is_free(p)))
    }

    /// Collision gate of the planner. Like [`Self::trajectory_samples_free`],
    /// but obstacles are grown by half the largest gap between consecutive
    /// samples, so a path slipping between two samples across an obstacle
    /// corner is rejected as well.
    pub fn trajectory_free(&self, traj: &FlatTrajectory<f64>, dt: f64) -> bool {
        let Some(pts) = Self::sample_positions(traj, dt) else {
            return false;
        };
        let margin = 0.5
            * pts
                .windows(2)
                .map(|w| distance(w[0], w[1]))
                .fold(0.0, f64::max);
        let clear = |p: Point| {
            self.obstacles.iter().all(|o| {
                let dx = (o.min[0] - p[0]).max(p[0] - o.max[0]).max(0.0);
                let dy = (o.min[1] - p[1]).max(p[1] - o.max[1]).max(0.0);
                dx.hypot(dy) > margin
            })
        };
        pts.iter().all(|&p| self.bounds.contains(p) && clear(p))
    }
}

/// Uniform sample of free space by rejection from the bounds.
pub fn sample_free<R: Rng + ?Sized>(workspace: &Workspace, rng: &mut R) -> Result<Point> {
    let b = &workspace.bounds;
    for _ in 0..MAX_REJECTIONS {
        let p = [
            rng.gen_range(b.min[0]..=b.max[0]),
            rng.gen_range(b.min[1]..=b.max[1]),
        ];
        if workspace.is_free(p) {
            return Ok(p);
        }
    }
    Err(Error::DegenerateWorkspace(format!(
        "{MAX_REJECTIONS} consecutive samples fell inside obstacles"
    )))
}

/// Tree embedded in the plane; vertex 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    points: Vec<Point>,
    parents: Vec<Option<usize>>,
    costs: Vec<Option<f64>>,
}

impl Framework {
    pub fn new(root: Point) -> Self {
        Self {
            points: vec![root],
            parents: vec![None],
            costs: vec![Some(0.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> Point {
        self.points[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parents[v]
    }

    /// Cached root-path cost, `None` once invalidated by a rewire upstream.
    pub fn cached_cost(&self, v: usize) -> Option<f64> {
        self.costs[v]
    }

    /// `(parent, child)` pairs ordered by child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
            .collect()
    }

    /// Vertices from the root to `v`, both included.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parents[cur] {
            path.push(p);
            cur = p;
            if path.len() > self.len() {
                break;
            }
        }
        path.reverse();
        path
    }

    pub fn waypoints_to(&self, v: usize) -> Vec<Point> {
        self.path_to(v)
            .into_iter()
            .map(|i| self.points[i])
            .collect()
    }

    /// Whether `a` lies on the root path of `b` (a vertex is its own ancestor).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        let mut steps = 0;
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parents[c];
            steps += 1;
            if steps > self.len() {
                return false;
            }
        }
        false
    }

    /// Nearest vertex in Euclidean distance, lowest index on ties.
    pub fn nearest(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &q) in self.points.iter().enumerate() {
            let d = distance(p, q);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Vertices strictly closer than `radius` to `p`, in index order.
    pub fn near(&self, p: Point, radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| distance(p, self.points[i]) < radius)
            .collect()
    }

    fn add_vertex(&mut self, p: Point) -> usize {
        self.points.push(p);
        self.parents.push(None);
        self.costs.push(None);
        self.len() - 1
    }

    /// Re-parents `v` with the given root-path cost and invalidates the
    /// cached costs of its descendants.
    fn set_parent(&mut self, v: usize, parent: usize, cost: f64) {
        self.parents[v] = Some(parent);
        self.costs[v] = Some(cost);
        for w in 0..self.len() {
            if w != v && self.is_ancestor(v, w) {
                self.costs[w] = None;
            }
        }
    }

    fn set_cost(&mut self, v: usize, cost: f64) {
        self.costs[v] = Some(cost);
    }

    /// Root without parent, every other vertex with an earlier-existing
    /// parent, and no cycles.
    pub fn check_integrity(&self) -> Result<()> {
        if self.parents.first() != Some(&None) {
            return Err(Error::NumericalFailure("root has a parent".into()));
        }
        for v in 1..self.len() {
            match self.parents[v] {
                None => return Err(Error::NumericalFailure(format!("vertex {v} has no parent"))),
                Some(p) if p >= self.len() || p == v => {
                    return Err(Error::NumericalFailure(format!(
                        "vertex {v} has invalid parent {p}"
                    )))
                }
                Some(_) => {}
            }
            if !self.is_ancestor(0, v) {
                return Err(Error::NumericalFailure(format!(
                    "vertex {v} does not reach the root"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Radius of the rewiring ball; `None` means a quarter of the bounds
    /// diagonal.
    pub near_radius: Option<f64>,
    pub max_iters: usize,
    /// Trajectory sampling step of the collision check; `None` derives it
    /// from the smallest obstacle and the speed.
    pub collision_dt: Option<f64>,
    pub seed: u64,
    /// Mean speed: a path of length `s` is given total duration `s / speed`.
    pub speed: f64,
    /// Time allocation settings of every subproblem (the mode and total time
    /// are overridden per query).
    pub optimizer: OptimizerConfig<f64>,
    pub goal: Option<Rect>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            near_radius: None,
            max_iters: 100,
            collision_dt: None,
            seed: 0,
            speed: 1.0,
            optimizer: OptimizerConfig {
                max_iters: 40,
                tol: Some(1e-4),
                ..OptimizerConfig::default()
            },
            goal: None,
        }
    }
}

/// Peak speed of a rest-to-rest minimum-snap segment relative to its mean
/// speed is below 2.5; used to turn a spacing into a sampling period.
const PEAK_SPEED_FACTOR: f64 = 2.5;

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::invalid("speed must be positive"));
        }
        if self.near_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::invalid("near radius must be positive"));
        }
        if self.collision_dt.is_some_and(|dt| !(dt > 0.0)) {
            return Err(Error::invalid("collision_dt must be positive"));
        }
        Ok(())
    }

    pub fn radius(&self, workspace: &Workspace) -> f64 {
        self.near_radius
            .unwrap_or(0.25 * workspace.bounds.diagonal())
    }

    /// Sampling period keeping consecutive samples within 5% of the smallest
    /// obstacle dimension (or of the bounds diagonal without obstacles).
    pub fn dt(&self, workspace: &Workspace) -> f64 {
        self.collision_dt.unwrap_or_else(|| {
            let feature = workspace
                .min_obstacle_dimension()
                .unwrap_or_else(|| workspace.bounds.diagonal());
            0.05 * feature / (PEAK_SPEED_FACTOR * self.speed)
        })
    }
}

/// Minimum-snap spline through a waypoint list.
#[derive(Debug, Clone)]
pub struct SnapTrajectory {
    pub waypoints: Vec<Point>,
    pub trajectory: FlatTrajectory<f64>,
    /// Integral of the squared snap of both coordinates.
    pub total_snap: f64,
}

/// Value pins at every waypoint, rest at both ends.
fn coordinate_pins(points: &[Point], axis: usize) -> PinSet<f64> {
    let values: Vec<f64> = points.iter().map(|p| p[axis]).collect();
    PinSet::rest_to_rest(&values, SNAP_ORDER)
}

/// Solves the two-dimensional minimum-snap time allocation problem through
/// `points`, with total duration `length / speed` and initial segment
/// durations proportional to segment lengths.
pub fn min_snap_through(points: &[Point], config: &PlannerConfig) -> Result<SnapTrajectory> {
    config.validate()?;
    if points.len() < 2 {
        return Err(Error::invalid("a path needs at least two waypoints"));
    }
    let lengths: Vec<f64> = points.windows(2).map(|w| distance(w[0], w[1])).collect();
    let total_len: f64 = lengths.iter().sum();
    if !(total_len > 0.0) {
        return Err(Error::invalid("path has zero length"));
    }
    let total_time = total_len / config.speed;
    let l = lengths.len();
    // short segments keep a share of the time so no initial duration vanishes
    let floor = 0.01 * total_len / l as f64;
    let weight: f64 = lengths.iter().map(|s| s + floor).sum();
    let d0: Vec<f64> = lengths
        .iter()
        .map(|s| 0.5 * total_time * (s + floor) / weight)
        .collect();

    let optimizer = OptimizerConfig {
        mode: Mode::FixedTotalTime,
        total_time: Some(total_time),
        d_min: config.optimizer.d_min.min(1e-3 * total_time / l as f64),
        ..config.optimizer.clone()
    };
    let problem = MultiDimProblem::new(
        vec![
            Dimension::new("x", SNAP_ORDER, coordinate_pins(points, 0)),
            Dimension::new("y", SNAP_ORDER, coordinate_pins(points, 1)),
        ],
        0.0,
        d0,
    )?
    .with_config(optimizer)
    .with_method(Method::Exact);
    let trajectory = solve_multidim(&problem)?;
    let total_snap = trajectory.total_cost().max(0.0);
    Ok(SnapTrajectory {
        waypoints: points.to_vec(),
        trajectory,
        total_snap,
    })
}

/// Spline through the root path of `i_h` followed by `u`.
pub fn min_snap_subproblem(
    framework: &Framework,
    i_h: usize,
    u: Point,
    config: &PlannerConfig,
) -> Result<SnapTrajectory> {
    if i_h >= framework.len() {
        return Err(Error::invalid(format!(
            "vertex {i_h} is not in the framework"
        )));
    }
    let mut points = framework.waypoints_to(i_h);
    points.push(u);
    min_snap_through(&points, config)
}

/// Whether the subproblem trajectory stays in free space; solver failures
/// count as collisions.
pub fn collision_free(
    workspace: &Workspace,
    framework: &Framework,
    i_h: usize,
    u: Point,
    config: &PlannerConfig,
) -> bool {
    min_snap_subproblem(framework, i_h, u, config)
        .map(|s| workspace.trajectory_free(&s.trajectory, config.dt(workspace)))
        .unwrap_or(false)
}

/// Total snap of the subproblem trajectory, `+inf` when it cannot be solved.
pub fn snap_cost(framework: &Framework, i_h: usize, u: Point, config: &PlannerConfig) -> f64 {
    min_snap_subproblem(framework, i_h, u, config)
        .map(|s| s.total_snap)
        .unwrap_or(f64::INFINITY)
}

/// Lowest-cost path found into the goal region.
#[derive(Debug, Clone)]
pub struct BestPath {
    pub vertices: Vec<usize>,
    pub snap: SnapTrajectory,
    /// Whether every sample of the spline at a tenth of the planner's
    /// sampling period lies in free space.
    pub fine_check_passed: bool,
}

/// A parent change of `vertex` that lowered its root-path cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rewire {
    pub vertex: usize,
    pub old_cost: f64,
    pub new_cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanStats {
    /// Subproblem solves, including those used only for cost refreshes.
    pub queries: usize,
    pub rewires: Vec<Rewire>,
    pub rejected_samples: usize,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub framework: Framework,
    pub best: Option<BestPath>,
    pub stats: PlanStats,
}

struct SnapPlanner<'a> {
    workspace: &'a Workspace,
    config: &'a PlannerConfig,
    framework: Framework,
    dt: f64,
    stats: PlanStats,
}

impl SnapPlanner<'_> {
    fn query(&mut self, i_h: usize, u: Point) -> Option<SnapTrajectory> {
        self.stats.queries += 1;
        min_snap_subproblem(&self.framework, i_h, u, self.config).ok()
    }

    /// Cost of the query when it beats `bound` and passes the collision gate.
    fn improving_cost(&mut self, i_h: usize, u: Point, bound: f64) -> Option<f64> {
        let sol = self.query(i_h, u)?;
        (sol.total_snap < bound && self.workspace.trajectory_free(&sol.trajectory, self.dt))
            .then_some(sol.total_snap)
    }

    fn vertex_cost(&mut self, v: usize) -> f64 {
        if let Some(c) = self.framework.cached_cost(v) {
            return c;
        }
        let parent = self
            .framework
            .parent(v)
            .expect("non-root vertex has a parent");
        let p = self.framework.point(v);
        let c = self
            .query(parent, p)
            .map_or(f64::INFINITY, |s| s.total_snap);
        self.framework.set_cost(v, c);
        c
    }

    fn iterate(&mut self, rng: &mut ChaCha8Rng, radius: f64) -> Result<()> {
        let u = sample_free(self.workspace, rng)?;
        let i_init = self.framework.nearest(u);
        let Some(first) = self.query(i_init, u) else {
            self.stats.rejected_samples += 1;
            return Ok(());
        };
        if !self.workspace.trajectory_free(&first.trajectory, self.dt) {
            self.stats.rejected_samples += 1;
            return Ok(());
        }
        let near = self.framework.near(u, radius);
        let n = self.framework.add_vertex(u);

        let mut i_min = i_init;
        let mut j_min = first.total_snap;
        for &i in &near {
            if i == i_init {
                continue;
            }
            if let Some(c) = self.improving_cost(i, u, j_min) {
                i_min = i;
                j_min = c;
            }
        }
        self.framework.set_parent(n, i_min, j_min);

        for &i in &near {
            // the root has no parent edge, and rerouting an ancestor of the
            // new vertex through it would close a cycle
            if i == 0 || self.framework.is_ancestor(i, n) {
                continue;
            }
            let j_near = self.vertex_cost(i);
            let p = self.framework.point(i);
            if let Some(c) = self.improving_cost(n, p, j_near) {
                if !self.try_rewire(i, n, c) {
                    continue;
                }
                self.stats.rewires.push(Rewire {
                    vertex: i,
                    old_cost: j_near,
                    new_cost: c,
                });
            }
        }
        Ok(())
    }

    /// Moves `v` under `parent`. Every descendant of `v` now follows a new
    /// root-path spline, so each one is solved and checked again; the rewire
    /// is undone if any of them fails.
    fn try_rewire(&mut self, v: usize, parent: usize, cost: f64) -> bool {
        let saved_parent = self.framework.parents[v];
        let saved_costs = self.framework.costs.clone();
        self.framework.set_parent(v, parent, cost);
        let descendants: Vec<usize> = (0..self.framework.len())
            .filter(|&w| w != v && self.framework.is_ancestor(v, w))
            .collect();
        for w in descendants {
            let par = self.framework.parent(w).expect("descendant has a parent");
            let p = self.framework.point(w);
            match self.query(par, p) {
                Some(sol) if self.workspace.trajectory_free(&sol.trajectory, self.dt) => {
                    self.framework.set_cost(w, sol.total_snap);
                }
                _ => {
                    self.framework.parents[v] = saved_parent;
                    self.framework.costs = saved_costs;
                    return false;
                }
            }
        }
        true
    }

    fn refresh_costs(&mut self) {
        for v in 1..self.framework.len() {
            self.vertex_cost(v);
        }
    }
}

fn check_start(workspace: &Workspace, start: Point, config: &PlannerConfig) -> Result<()> {
    config.validate()?;
    if !workspace.is_free(start) {
        return Err(Error::invalid(format!(
            "start {start:?} is not in free space"
        )));
    }
    Ok(())
}

/// Goal vertices (root excluded) ordered by cost, then index.
fn goal_candidates(framework: &Framework, goal: &Rect, cost: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut goal_vertices: Vec<(f64, usize)> = (1..framework.len())
        .filter(|&v| goal.contains(framework.point(v)))
        .map(|v| (cost(v), v))
        .filter(|(c, _)| c.is_finite())
        .collect();
    goal_vertices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    goal_vertices.into_iter().map(|(_, v)| v).collect()
}

/// Minimum-snap RRT*. With a goal region, the cheapest goal vertex is
/// returned as the best path, together with the outcome of a plain sampled
/// check at a tenth of the planner's sampling period.
pub fn plan(workspace: &Workspace, start: Point, config: &PlannerConfig) -> Result<PlanResult> {
    check_start(workspace, start, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let radius = config.radius(workspace);
    let mut planner = SnapPlanner {
        workspace,
        config,
        framework: Framework::new(start),
        dt: config.dt(workspace),
        stats: PlanStats::default(),
    };
    for _ in 0..config.max_iters {
        planner.iterate(&mut rng, radius)?;
    }
    planner.refresh_costs();

    let mut best = None;
    if let Some(goal) = &config.goal {
        let fw = &planner.framework;
        let candidates = goal_candidates(fw, goal, |v| fw.cached_cost(v).unwrap_or(f64::INFINITY));
        for v in candidates {
            let points = planner.framework.waypoints_to(v);
            let Ok(snap) = min_snap_through(&points, config) else {
                continue;
            };
            if workspace.trajectory_free(&snap.trajectory, planner.dt) {
                let fine = workspace.trajectory_samples_free(&snap.trajectory, planner.dt / 10.0);
                best = Some(BestPath {
                    vertices: planner.framework.path_to(v),
                    snap,
                    fine_check_passed: fine,
                });
                break;
            }
        }
    }
    Ok(PlanResult {
        framework: planner.framework,
        best,
        stats: planner.stats,
    })
}

/// Euclidean root-path length, filling invalidated caches on the way.
fn euclidean_cost(framework: &mut Framework, v: usize) -> f64 {
    if let Some(c) = framework.cached_cost(v) {
        return c;
    }
    let parent = framework.parent(v).expect("non-root vertex has a parent");
    let c =
        euclidean_cost(framework, parent) + distance(framework.point(parent), framework.point(v));
    framework.set_cost(v, c);
    c
}

/// RRT* with straight edges and Euclidean costs. The best goal path is
/// converted into a minimum-snap spline once, without checking the spline.
pub fn plan_euclidean_baseline(
    workspace: &Workspace,
    start: Point,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    check_start(workspace, start, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let radius = config.radius(workspace);
    let mut fw = Framework::new(start);
    let mut stats = PlanStats::default();
    for _ in 0..config.max_iters {
        let u = sample_free(workspace, &mut rng)?;
        let i_init = fw.nearest(u);
        if !workspace.segment_free(fw.point(i_init), u) {
            stats.rejected_samples += 1;
            continue;
        }
        let near = fw.near(u, radius);
        let n = fw.add_vertex(u);
        let mut i_min = i_init;
        let mut j_min = euclidean_cost(&mut fw, i_init) + distance(fw.point(i_init), u);
        for &i in &near {
            if i == i_init {
                continue;
            }
            let c = euclidean_cost(&mut fw, i) + distance(fw.point(i), u);
            if c < j_min && workspace.segment_free(fw.point(i), u) {
                i_min = i;
                j_min = c;
            }
        }
        fw.set_parent(n, i_min, j_min);
        for &i in &near {
            if i == 0 || fw.is_ancestor(i, n) {
                continue;
            }
            let j_near = euclidean_cost(&mut fw, i);
            let c = j_min + distance(u, fw.point(i));
            if c < j_near && workspace.segment_free(u, fw.point(i)) {
                fw.set_parent(i, n, c);
                stats.rewires.push(Rewire {
                    vertex: i,
                    old_cost: j_near,
                    new_cost: c,
                });
            }
        }
    }
    for v in 1..fw.len() {
        euclidean_cost(&mut fw, v);
    }

    let mut best = None;
    if let Some(goal) = &config.goal {
        let candidates = goal_candidates(&fw, goal, |v| fw.cached_cost(v).unwrap_or(f64::INFINITY));
        if let Some(&v) = candidates.first() {
            stats.queries += 1;
            let snap = min_snap_through(&fw.waypoints_to(v), config)?;
            let fine =
                workspace.trajectory_samples_free(&snap.trajectory, config.dt(workspace) / 10.0);
            best = Some(BestPath {
                vertices: fw.path_to(v),
                snap,
                fine_check_passed: fine,
            });
        }
    }
    Ok(PlanResult {
        framework: fw,
        best,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn open_world() -> Workspace {
        Workspace::new(Rect::new([0.0, 0.0], [10.0, 10.0]).unwrap(), vec![]).unwrap()
    }

    fn fast_config(iters: usize, seed: u64) -> PlannerConfig {
        PlannerConfig {
            max_iters: iters,
            seed,
            near_radius: Some(3.0),
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn rect_contains_is_closed() {
        let r = Rect::new([0.0, 0.0], [1.0, 2.0]).unwrap();
        assert!(r.contains([1.0, 2.0]));
        assert!(r.contains([0.0, 0.5]));
        assert!(!r.contains([1.0 + 1e-12, 0.5]));
        assert!(Rect::new([1.0, 0.0], [1.0, 2.0]).is_err());
    }

    /// Dense sampling of the segment as an independent oracle; only used on
    /// cases whose answer is robust to the sampling resolution.
    fn sampled_intersection(r: &Rect, a: Point, b: Point) -> bool {
        (0..=20_000).any(|j| {
            let t = j as f64 / 20_000.0;
            r.contains([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
        })
    }

    #[test]
    fn segment_rectangle_intersection() {
        let r = Rect::new([2.0, 2.0], [4.0, 3.0]).unwrap();
        assert!(r.intersects_segment([0.0, 2.5], [5.0, 2.5]));
        assert!(r.intersects_segment([3.0, 2.5], [3.0, 2.6]));
        assert!(!r.intersects_segment([0.0, 0.0], [1.0, 5.0]));
        assert!(r.intersects_segment([0.0, 2.0], [2.0, 2.0]));
        assert!(!r.intersects_segment([0.0, 3.5], [5.0, 3.5]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..2000 {
            let a = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..5.0)];
            let b = [rng.gen_range(0.0..6.0), rng.gen_range(0.0..5.0)];
            let exact = r.intersects_segment(a, b);
            // skip grazing cases the sampled oracle cannot resolve
            let shrunk = Rect::new([2.01, 2.01], [3.99, 2.99]).unwrap();
            let grown = Rect::new([1.99, 1.99], [4.01, 3.01]).unwrap();
            if sampled_intersection(&shrunk, a, b) {
                assert!(exact);
                checked += 1;
            } else if !sampled_intersection(&grown, a, b) {
                assert!(!exact);
                checked += 1;
            }
        }
        assert!(checked > 1900);
    }

    #[test]
    fn workspace_rejects_obstacles_outside_bounds() {
        let b = Rect::new([0.0, 0.0], [1.0, 1.0]).unwrap();
        let o = Rect::new([0.5, 0.5], [1.5, 0.8]).unwrap();
        assert!(Workspace::new(b, vec![o]).is_err());
    }

    #[test]
    fn sampling_avoids_obstacles_and_is_reproducible() {
        let ws = Workspace::new(
            Rect::new([0.0, 0.0], [4.0, 4.0]).unwrap(),
            vec![Rect::new([1.0, 0.0], [3.0, 3.0]).unwrap()],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point> = (0..20_000)
            .map(|_| sample_free(&ws, &mut rng).unwrap())
            .collect();
        assert!(pts.iter().all(|&p| ws.is_free(p)));
        let mut again = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(sample_free(&ws, &mut again).unwrap(), pts[0]);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let first: Point = [rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_free(&open_world(), &mut rng).unwrap(), first);

        let full = Workspace::new(
            Rect::new([0.0, 0.0], [1.0, 1.0]).unwrap(),
            vec![Rect::new([0.0, 0.0], [1.0, 1.0]).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            sample_free(&full, &mut rng),
            Err(Error::DegenerateWorkspace(_))
        ));
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut fw = Framework::new([0.0, 0.0]);
        assert_eq!(fw.nearest([5.0, 5.0]), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 1..500 {
            let v = fw.add_vertex([rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]);
            fw.set_parent(v, rng.gen_range(0..i), 0.0);
        }
        for _ in 0..200 {
            let p = [rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)];
            let brute = (0..fw.len())
                .min_by(|&a, &b| {
                    distance(p, fw.point(a))
                        .total_cmp(&distance(p, fw.point(b)))
                        .then(a.cmp(&b))
                })
                .unwrap();
            assert_eq!(fw.nearest(p), brute);
        }
        let mut tie = Framework::new([1.0, 0.0]);
        tie.add_vertex([-1.0, 0.0]);
        assert_eq!(tie.nearest([0.0, 0.0]), 0);
        tie.add_vertex([0.0, 1.0]);
        assert_eq!(tie.nearest([0.0, 0.5]), 2);
    }

    #[test]
    fn straight_two_point_path() {
        let cfg = PlannerConfig::default();
        let s = min_snap_through(&[[0.0, 0.0], [3.0, 4.0]], &cfg).unwrap();
        let x = s.trajectory.spline("x").unwrap();
        let y = s.trajectory.spline("y").unwrap();
        assert_relative_eq!(s.trajectory.end(), 5.0, epsilon = 1e-12);
        for j in 0..=50 {
            let t = 0.1 * j as f64;
            let (px, py) = (x.eval(t, 0).unwrap(), y.eval(t, 0).unwrap());
            // the path stays on the line 4x = 3y
            assert!((4.0 * px - 3.0 * py).abs() < 1e-9);
        }
        let alone = snap_cost(&Framework::new([0.0, 0.0]), 0, [3.0, 4.0], &cfg);
        assert_relative_eq!(alone, s.total_snap, epsilon = 0.0);
    }

    #[test]
    fn snap_cost_is_translation_invariant() {
        let cfg = PlannerConfig::default();
        let a = snap_cost(&Framework::new([2.0, 3.0]), 0, [3.0, 3.0], &cfg);
        let b = snap_cost(&Framework::new([-40.0, 17.5]), 0, [-39.0, 17.5], &cfg);
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn collinear_midpoint_keeps_cost() {
        let cfg = PlannerConfig {
            optimizer: OptimizerConfig {
                tol: Some(1e-12),
                max_iters: 200,
                ..OptimizerConfig::default()
            },
            ..PlannerConfig::default()
        };
        let direct = min_snap_through(&[[0.0, 0.0], [4.0, 0.0]], &cfg).unwrap();
        let split = min_snap_through(&[[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]], &cfg).unwrap();
        assert!(split.total_snap <= direct.total_snap * (1.0 + 1e-9));
    }

    #[test]
    fn blocked_corridor_is_detected() {
        let ws = Workspace::new(
            Rect::new([0.0, 0.0], [10.0, 2.0]).unwrap(),
            vec![Rect::new([4.0, 0.0], [5.0, 2.0]).unwrap()],
        )
        .unwrap();
        let fw = Framework::new([1.0, 1.0]);
        let cfg = PlannerConfig::default();
        assert!(!collision_free(&ws, &fw, 0, [9.0, 1.0], &cfg));
        assert!(collision_free(&ws, &fw, 0, [3.0, 1.5], &cfg));
        assert!(collision_free(
            &open_world(),
            &Framework::new([1.0, 1.0]),
            0,
            [9.0, 9.0],
            &cfg
        ));
    }

    #[test]
    fn zero_iterations_give_root_only() {
        let res = plan(&open_world(), [1.0, 1.0], &fast_config(0, 1)).unwrap();
        assert_eq!(res.framework.len(), 1);
        assert!(res.best.is_none());
    }

    #[test]
    fn start_must_be_free() {
        let ws = Workspace::new(
            Rect::new([0.0, 0.0], [10.0, 10.0]).unwrap(),
            vec![Rect::new([0.0, 0.0], [2.0, 2.0]).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            plan(&ws, [1.0, 1.0], &fast_config(5, 0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn open_world_tree_and_cost_cache() {
        let cfg = fast_config(40, 7);
        let res = plan(&open_world(), [1.0, 1.0], &cfg).unwrap();
        let fw = &res.framework;
        fw.check_integrity().unwrap();
        // splines may still overshoot the bounds, which rejects the sample
        assert_eq!(fw.len() + res.stats.rejected_samples, 41);
        assert!(fw.len() > 30);
        for v in 1..fw.len() {
            let recomputed = snap_cost(fw, fw.parent(v).unwrap(), fw.point(v), &cfg);
            assert_relative_eq!(fw.cached_cost(v).unwrap(), recomputed, max_relative = 1e-12);
        }
        let again = plan(&open_world(), [1.0, 1.0], &cfg).unwrap();
        assert_eq!(again.framework, res.framework);
    }

    #[test]
    fn baseline_costs_are_path_lengths() {
        let cfg = fast_config(150, 2);
        let res = plan_euclidean_baseline(&open_world(), [1.0, 1.0], &cfg).unwrap();
        let fw = &res.framework;
        fw.check_integrity().unwrap();
        for (p, c) in fw.edges() {
            let edge = fw.cached_cost(c).unwrap() - fw.cached_cost(p).unwrap();
            assert_relative_eq!(edge, distance(fw.point(p), fw.point(c)), epsilon = 1e-9);
        }
        assert_eq!(fw.len(), 151);
    }
}
